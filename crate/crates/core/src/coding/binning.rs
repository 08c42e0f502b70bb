use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::SourceModel;
use crate::units::{derive_seed, index_count};

/// Largest per-source sequence space `|U_l|^m`.
pub const MAX_SEQUENCE_SPACE: usize = 1 << 20;
/// Largest number of bin-consistent candidate tuples examined by [`sw_decode`].
pub const MAX_SW_CANDIDATES: usize = 1 << 24;
pub const MAX_SOURCE_BLOCK: usize = 16;

/// Random binning of length-`m` source sequences.
///
/// Sequence `u` of source `l` lands in bin `perm_l[idx(u)] mod M_l`, with
/// `perm_l` a seeded uniform permutation of the sequence space.
#[derive(Clone, Debug)]
pub struct BinningCode {
    alphabets: Vec<usize>,
    m: usize,
    rates: Vec<f64>,
    counts: Vec<usize>,
    seed: u64,
    perms: Vec<Vec<u32>>,
    inverse: Vec<Vec<u32>>,
}

impl BinningCode {
    /// `rates` in bits per source symbol; source `l` gets `ceil(2^{m R_l})` bins.
    pub fn new(alphabets: &[usize], m: usize, rates: &[f64], seed: u64) -> Result<Self> {
        if alphabets.len() != rates.len() {
            return Err(Error::config("source_rates", "need one rate per source"));
        }
        if m == 0 || m > MAX_SOURCE_BLOCK {
            return Err(Error::config(
                "m",
                format!("source block length must lie in 1..={MAX_SOURCE_BLOCK}"),
            ));
        }
        let mut counts = Vec::new();
        let mut perms = Vec::new();
        let mut inverse = Vec::new();
        for (l, (&a, &r)) in alphabets.iter().zip(rates).enumerate() {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::config(
                    "source_rates",
                    format!("rate {r} must be finite and >= 0"),
                ));
            }
            let space = (a as u64)
                .checked_pow(m as u32)
                .filter(|&s| s <= MAX_SEQUENCE_SPACE as u64)
                .ok_or_else(|| Error::budget(format!("|U_{}|^m exceeds 2^20; lower m", l + 1)))?
                as usize;
            let bits = m as f64 * r;
            if bits > 62.0 {
                return Err(Error::budget(format!("m·R_{} = {bits} too large", l + 1)));
            }
            counts.push(index_count(bits) as usize);
            let mut perm: Vec<u32> = (0..space as u32).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(&[seed, l as u64])));
            let mut inv = vec![0u32; space];
            for (i, &p) in perm.iter().enumerate() {
                inv[p as usize] = i as u32;
            }
            perms.push(perm);
            inverse.push(inv);
        }
        Ok(Self {
            alphabets: alphabets.to_vec(),
            m,
            rates: rates.to_vec(),
            counts,
            seed,
            perms,
            inverse,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Number of bins per source.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn sequence_index(&self, l: usize, seq: &[usize]) -> usize {
        let a = self.alphabets[l];
        seq.iter().fold(0, |acc, &u| acc * a + u)
    }

    fn sequence_of(&self, l: usize, mut idx: usize) -> Vec<usize> {
        let a = self.alphabets[l];
        let mut out = vec![0; self.m];
        for slot in out.iter_mut().rev() {
            *slot = idx % a;
            idx /= a;
        }
        out
    }

    pub fn bin_of(&self, l: usize, seq: &[usize]) -> usize {
        self.perms[l][self.sequence_index(l, seq)] as usize % self.counts[l]
    }

    /// Sequence indices of every member of bin `bin` of source `l`.
    pub fn members(&self, l: usize, bin: usize) -> impl Iterator<Item = usize> + '_ {
        let inv = &self.inverse[l];
        (bin..inv.len()).step_by(self.counts[l]).map(move |p| inv[p] as usize)
    }
}

/// Bin index of each source's length-`m` sequence.
pub fn sw_encode(block: &[Vec<usize>], code: &BinningCode) -> Result<Vec<usize>> {
    if block.len() != code.alphabets.len() {
        return Err(Error::invalid("one sequence per source expected"));
    }
    block
        .iter()
        .enumerate()
        .map(|(l, seq)| {
            if seq.len() != code.m || seq.iter().any(|&u| u >= code.alphabets[l]) {
                return Err(Error::invalid(format!(
                    "sequence {} is not a length-m word over its alphabet",
                    l + 1
                )));
            }
            Ok(code.bin_of(l, seq))
        })
        .collect()
}

/// Most probable bin-consistent tuple of sequences, or `None` when no tuple
/// with positive probability is consistent with the bins.
pub fn sw_decode(bins: &[usize], code: &BinningCode, src: &SourceModel) -> Result<Option<Vec<Vec<usize>>>> {
    let k = code.alphabets.len();
    if src.alphabets() != code.alphabets.as_slice() {
        return Err(Error::invalid("source model and binning code disagree on alphabets"));
    }
    if bins.len() != k {
        return Err(Error::invalid("one bin index per source expected"));
    }
    let mut lists: Vec<Vec<Vec<usize>>> = Vec::with_capacity(k);
    let mut total: usize = 1;
    for (l, &b) in bins.iter().enumerate() {
        if b >= code.counts[l] {
            return Err(Error::invalid(format!("bin {b} out of range for source {}", l + 1)));
        }
        let members: Vec<Vec<usize>> = code.members(l, b).map(|i| code.sequence_of(l, i)).collect();
        total = total
            .checked_mul(members.len())
            .filter(|&t| t <= MAX_SW_CANDIDATES)
            .ok_or_else(|| Error::budget("Slepian-Wolf candidate list exceeds 2^24; raise rates or lower m"))?;
        lists.push(members);
    }
    if total == 0 {
        return Ok(None);
    }
    let log_pmf: Vec<f64> = src.pmf().iter().map(|p| p.ln()).collect();
    let mut choice = vec![0usize; k];
    let mut letters = vec![0usize; k];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let mut score = 0.0;
        for i in 0..code.m {
            for l in 0..k {
                letters[l] = lists[l][choice[l]][i];
            }
            score += log_pmf[src.index_of(&letters)];
            if score == f64::NEG_INFINITY {
                break;
            }
        }
        if score > f64::NEG_INFINITY && best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, choice.clone()));
        }
        // odometer, last source fastest
        let mut l = k;
        loop {
            if l == 0 {
                return Ok(best.map(|(_, c)| c.iter().enumerate().map(|(l, &j)| lists[l][j].clone()).collect()));
            }
            l -= 1;
            choice[l] += 1;
            if choice[l] < lists[l].len() {
                break;
            }
            choice[l] = 0;
        }
    }
}

/// Block error count of Slepian-Wolf coding alone over `trials` draws.
///
/// Each trial draws a fresh code and source block from `derive_seed([seed, trial, ..])`.
pub fn sw_block_errors(src: &SourceModel, m: usize, rates: &[f64], trials: usize, seed: u64) -> Result<usize> {
    BinningCode::new(src.alphabets(), m, rates, seed)?;
    let errors: Result<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let code = BinningCode::new(src.alphabets(), m, rates, derive_seed(&[seed, t as u64, 1]))?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, t as u64, 2]));
            let block = src.sample_block(&mut rng, m);
            let bins = sw_encode(&block, &code)?;
            Ok(sw_decode(&bins, &code, src)?.as_ref() != Some(&block))
        })
        .collect();
    Ok(errors?.into_iter().filter(|&e| e).count())
}
