use num_complex::Complex64;

use super::codebook::{GaussianCodebook, MaterializedCodebook};
use crate::error::{Error, Result};
use crate::model::{ChannelParams, CodewordBlock};
use crate::units::derive_seed;

/// Flat index of a message tuple, encoder 1 most significant.
pub fn tuple_index(messages: &[usize], counts: &[usize]) -> usize {
    messages.iter().zip(counts).fold(0, |acc, (&w, &m)| acc * m + w)
}

pub fn tuple_of(mut idx: usize, counts: &[usize]) -> Vec<usize> {
    let mut out = vec![0; counts.len()];
    for (slot, &m) in out.iter_mut().zip(counts).rev() {
        *slot = idx % m;
        idx /= m;
    }
    out
}

/// Codebooks of the block Markov scheme.
///
/// Encoder `l` holds `M_l²` words indexed by `prev · M_l + cur`; the relay
/// holds one word per tuple `(w_1, ..., w_K)`. Message 0 plays the role of
/// the fixed initial/final message.
#[derive(Clone, Debug)]
pub struct MarcCodebooks {
    n: usize,
    counts: Vec<usize>,
    encoders: Vec<MaterializedCodebook>,
    relay: MaterializedCodebook,
}

impl MarcCodebooks {
    pub fn generate(params: &ChannelParams, counts: &[usize], n: usize, seed: u64) -> Result<Self> {
        if counts.len() != params.k() || counts.contains(&0) {
            return Err(Error::invalid("need one positive message count per encoder"));
        }
        let encoders = counts
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let size = m
                    .checked_mul(m)
                    .ok_or_else(|| Error::budget("codebook size overflow"))?;
                GaussianCodebook::new(n, size, params.power(i + 1), derive_seed(&[seed, i as u64 + 1]))?.materialize()
            })
            .collect::<Result<Vec<_>>>()?;
        let tuples = counts
            .iter()
            .try_fold(1usize, |a, &m| a.checked_mul(m))
            .ok_or_else(|| Error::budget("relay codebook size overflow"))?;
        let relay = GaussianCodebook::new(n, tuples, params.power(params.relay_index()), derive_seed(&[seed, 0]))?
            .materialize()?;
        Ok(Self {
            n,
            counts: counts.to_vec(),
            encoders,
            relay,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of message tuples `Π M_l`.
    pub fn tuples(&self) -> usize {
        self.relay.size()
    }

    /// `x_l(prev, cur)` for encoder `l` (1-based).
    pub fn encoder_word(&self, l: usize, prev: usize, cur: usize) -> &[Complex64] {
        let m = self.counts[l - 1];
        assert!(prev < m && cur < m, "message index out of range");
        self.encoders[l - 1].word(prev * m + cur)
    }

    /// `x_{K+1}(w_1, ..., w_K)` by flat tuple index.
    pub fn relay_word(&self, tuple: usize) -> &[Complex64] {
        self.relay.word(tuple)
    }
}

/// Which codewords are sent in each of the `B + 1` blocks.
///
/// Block `b` (1-based) occupies samples `[(b-1)·s, (b-1)·s + n)` with slot
/// length `s = n + guard`; the remaining `guard` samples of the slot are silent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockMarkovSchedule {
    pub k: usize,
    pub blocks: usize,
    pub n: usize,
    pub guard: usize,
}

impl BlockMarkovSchedule {
    pub fn new(k: usize, blocks: usize, n: usize, guard: usize) -> Result<Self> {
        if k == 0 || blocks == 0 || n == 0 {
            return Err(Error::invalid("schedule needs K >= 1, B >= 1 and n >= 1"));
        }
        Ok(Self { k, blocks, n, guard })
    }

    pub fn slot_len(&self) -> usize {
        self.n + self.guard
    }

    pub fn total_len(&self) -> usize {
        (self.blocks + 1) * self.slot_len()
    }

    /// First sample of block `b` (1-based).
    pub fn block_start(&self, b: usize) -> usize {
        (b - 1) * self.slot_len()
    }

    fn message(messages: &[Vec<usize>], l: usize, b: usize) -> usize {
        if b == 0 || b > messages[l - 1].len() {
            0
        } else {
            messages[l - 1][b - 1]
        }
    }

    /// `(W_{l,b-1}, W_{l,b})` sent by encoder `l` in block `b`.
    pub fn encoder_pair(&self, messages: &[Vec<usize>], l: usize, b: usize) -> (usize, usize) {
        (Self::message(messages, l, b - 1), Self::message(messages, l, b))
    }

    /// `(W_{1,b-1}, ..., W_{K,b-1})` sent by the relay in block `b`.
    pub fn relay_tuple(&self, messages: &[Vec<usize>], b: usize) -> Vec<usize> {
        (1..=self.k).map(|l| Self::message(messages, l, b - 1)).collect()
    }

    fn check_messages(&self, messages: &[Vec<usize>], counts: &[usize]) -> Result<()> {
        if messages.len() != self.k || messages.iter().any(|row| row.len() != self.blocks) {
            return Err(Error::invalid(format!(
                "messages must be shaped {}×{}",
                self.k, self.blocks
            )));
        }
        for (l, row) in messages.iter().enumerate() {
            if let Some(&w) = row.iter().find(|&&w| w >= counts[l]) {
                return Err(Error::invalid(format!(
                    "message {w} of encoder {} exceeds codebook range {}",
                    l + 1,
                    counts[l]
                )));
            }
        }
        Ok(())
    }
}

/// Waveforms of all `K + 1` terminals over `B + 1` blocks; the relay row uses
/// the true messages of the previous block.
pub fn block_markov_encode(
    schedule: &BlockMarkovSchedule,
    codebooks: &MarcCodebooks,
    messages: &[Vec<usize>],
) -> Result<CodewordBlock> {
    if codebooks.k() != schedule.k || codebooks.n() != schedule.n {
        return Err(Error::invalid("codebooks do not match the schedule"));
    }
    schedule.check_messages(messages, codebooks.counts())?;
    let len = schedule.total_len();
    let mut rows = vec![vec![Complex64::new(0.0, 0.0); len]; schedule.k + 1];
    for b in 1..=schedule.blocks + 1 {
        let start = schedule.block_start(b);
        for l in 1..=schedule.k {
            let (prev, cur) = schedule.encoder_pair(messages, l, b);
            rows[l - 1][start..start + schedule.n].copy_from_slice(codebooks.encoder_word(l, prev, cur));
        }
        let t = tuple_index(&schedule.relay_tuple(messages, b), codebooks.counts());
        rows[schedule.k][start..start + schedule.n].copy_from_slice(codebooks.relay_word(t));
    }
    CodewordBlock::new(rows)
}
