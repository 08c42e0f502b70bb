use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::{Subset, MAX_TERMINALS};
use crate::units::LogBase;

/// Link gains, noise level and power budgets of a K-encoder relay channel.
///
/// Terminal indices are 1-based in the public vocabulary (`1..=K` encoders,
/// `K+1` relay) and 0-based in the vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelParams {
    k: usize,
    gains_dest: Vec<Complex64>,
    gains_relay: Vec<Complex64>,
    noise_power: f64,
    powers: Vec<f64>,
}

impl ChannelParams {
    pub fn new(
        k: usize,
        gains_dest: Vec<Complex64>,
        gains_relay: Vec<Complex64>,
        noise_power: f64,
        powers: Vec<f64>,
    ) -> Result<Self> {
        if k == 0 || k + 1 > MAX_TERMINALS {
            return Err(Error::config("K", format!("must be in 1..={}", MAX_TERMINALS - 1)));
        }
        if gains_dest.len() != k + 1 {
            return Err(Error::config(
                "gains_dest",
                format!("expected {} entries, got {}", k + 1, gains_dest.len()),
            ));
        }
        if gains_relay.len() != k {
            return Err(Error::config(
                "gains_relay",
                format!("expected {} entries, got {}", k, gains_relay.len()),
            ));
        }
        if powers.len() != k + 1 {
            return Err(Error::config(
                "powers",
                format!("expected {} entries, got {}", k + 1, powers.len()),
            ));
        }
        if gains_dest.iter().any(|g| !g.is_finite()) {
            return Err(Error::config("gains_dest", "non-finite gain"));
        }
        if gains_relay.iter().any(|g| !g.is_finite()) {
            return Err(Error::config("gains_relay", "non-finite gain"));
        }
        if !(noise_power.is_finite() && noise_power > 0.0) {
            return Err(Error::config("noise_power", "must be finite and > 0"));
        }
        if powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::config("powers", "must be finite and >= 0"));
        }
        Ok(Self {
            k,
            gains_dest,
            gains_relay,
            noise_power,
            powers,
        })
    }

    /// Real, uniform configuration: every destination gain `g_dest`, every
    /// relay gain `g_relay`, every power `power`.
    pub fn uniform(k: usize, g_dest: f64, g_relay: f64, power: f64, noise_power: f64) -> Result<Self> {
        Self::new(
            k,
            vec![Complex64::new(g_dest, 0.0); k + 1],
            vec![Complex64::new(g_relay, 0.0); k],
            noise_power,
            vec![power; k + 1],
        )
    }

    /// Number of source encoders.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of transmitting terminals (`K+1`).
    pub fn terminals(&self) -> usize {
        self.k + 1
    }

    pub fn relay_index(&self) -> usize {
        self.k + 1
    }

    pub fn gains_dest(&self) -> &[Complex64] {
        &self.gains_dest
    }

    pub fn gains_relay(&self) -> &[Complex64] {
        &self.gains_relay
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    /// `g_{lD}` for 1-based `l`.
    pub fn gain_dest(&self, l: usize) -> Complex64 {
        self.gains_dest[l - 1]
    }

    /// `g_{lR}` for 1-based encoder index `l`.
    pub fn gain_relay(&self, l: usize) -> Complex64 {
        self.gains_relay[l - 1]
    }

    pub fn power(&self, l: usize) -> f64 {
        self.powers[l - 1]
    }

    pub fn full_set(&self) -> Subset {
        Subset::full(self.k + 1)
    }

    pub fn check_subset(&self, s: Subset) -> Result<()> {
        if s.is_subset_of(self.full_set()) {
            Ok(())
        } else {
            Err(Error::invalid(format!("subset {s} not within [1, {}]", self.k + 1)))
        }
    }

    /// `Σ_{l∈S} |g_{lD}|² P_l`.
    pub fn received_power_dest(&self, s: Subset) -> f64 {
        s.indices().map(|l| self.gain_dest(l).norm_sqr() * self.power(l)).sum()
    }

    /// `Σ_{l∈S} |g_{lR}|² P_l`, `S ⊆ [1, K]`.
    pub fn received_power_relay(&self, s: Subset) -> f64 {
        s.indices().map(|l| self.gain_relay(l).norm_sqr() * self.power(l)).sum()
    }

    /// `Σ_{l∈S} |g_{lD}|² · Σ_{l∈S} P_l`, the Cauchy-Schwarz power proxy.
    pub fn gain_power_product(&self, s: Subset) -> f64 {
        let g: f64 = s.indices().map(|l| self.gain_dest(l).norm_sqr()).sum();
        let p: f64 = s.indices().map(|l| self.power(l)).sum();
        g * p
    }

    /// Copy with the power budgets replaced.
    pub fn with_powers(&self, powers: Vec<f64>) -> Result<Self> {
        Self::new(
            self.k,
            self.gains_dest.clone(),
            self.gains_relay.clone(),
            self.noise_power,
            powers,
        )
    }

    /// Copy with the noise power replaced.
    pub fn with_noise_power(&self, noise_power: f64) -> Result<Self> {
        Self::new(
            self.k,
            self.gains_dest.clone(),
            self.gains_relay.clone(),
            noise_power,
            self.powers.clone(),
        )
    }

    /// Relabel encoders: new encoder `i` (1-based) is old encoder `perm[i-1]`.
    /// The relay keeps its index.
    pub fn permute_encoders(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::invalid("permutation length must equal K"));
        }
        let mut gd: Vec<_> = perm.iter().map(|&p| self.gain_dest(p)).collect();
        gd.push(self.gain_dest(self.k + 1));
        let gr = perm.iter().map(|&p| self.gain_relay(p)).collect();
        let mut pw: Vec<_> = perm.iter().map(|&p| self.power(p)).collect();
        pw.push(self.power(self.k + 1));
        Self::new(self.k, gd, gr, self.noise_power, pw)
    }
}

/// Serialized form of [`ChannelParams`] (gains as `[re, im]` pairs).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParamsFile {
    #[serde(rename = "K")]
    pub k: usize,
    pub gains_dest: Vec<[f64; 2]>,
    pub gains_relay: Vec<[f64; 2]>,
    pub noise_power: f64,
    pub powers: Vec<f64>,
}

impl TryFrom<ChannelParamsFile> for ChannelParams {
    type Error = Error;

    fn try_from(f: ChannelParamsFile) -> Result<Self> {
        let c = |v: Vec<[f64; 2]>| v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        ChannelParams::new(f.k, c(f.gains_dest), c(f.gains_relay), f.noise_power, f.powers)
    }
}

impl From<&ChannelParams> for ChannelParamsFile {
    fn from(p: &ChannelParams) -> Self {
        let c = |v: &[Complex64]| v.iter().map(|g| [g.re, g.im]).collect();
        ChannelParamsFile {
            k: p.k,
            gains_dest: c(&p.gains_dest),
            gains_relay: c(&p.gains_relay),
            noise_power: p.noise_power,
            powers: p.powers.clone(),
        }
    }
}

impl ChannelParams {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ChannelParamsFile =
            toml::from_str(text).map_err(|e| Error::config(toml_key(&e), e.message().to_string()))?;
        file.try_into()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&ChannelParamsFile::from(self)).expect("channel params serialize")
    }
}

/// Best-effort name of the key a TOML error refers to.
pub(crate) fn toml_key(e: &toml::de::Error) -> String {
    let msg = e.message();
    for marker in ["missing field `", "unknown field `"] {
        if let Some(rest) = msg.split(marker).nth(1) {
            if let Some(key) = rest.split('`').next() {
                return key.to_string();
            }
        }
    }
    "<document>".to_string()
}

/// Integer start offsets `d_1..d_{K+1}` and the maximum offset `d_max`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DelayProfile {
    offsets: Vec<usize>,
    d_max: usize,
}

impl DelayProfile {
    pub fn new(offsets: Vec<usize>, d_max: usize) -> Result<Self> {
        if let Some(&d) = offsets.iter().find(|&&d| d > d_max) {
            return Err(Error::invalid(format!("offset {d} exceeds d_max {d_max}")));
        }
        Ok(Self { offsets, d_max })
    }

    pub fn synchronous(terminals: usize) -> Self {
        Self {
            offsets: vec![0; terminals],
            d_max: 0,
        }
    }

    /// Independent uniform offsets on `{0, ..., d_max}`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, terminals: usize, d_max: usize) -> Self {
        Self {
            offsets: (0..terminals).map(|_| rng.random_range(0..=d_max)).collect(),
            d_max,
        }
    }

    /// All corner profiles `{0, d_max}^terminals` (a single profile when `d_max = 0`).
    pub fn corners(terminals: usize, d_max: usize) -> Vec<Self> {
        if d_max == 0 {
            return vec![Self::synchronous(terminals)];
        }
        (0u32..(1 << terminals))
            .map(|mask| Self {
                offsets: (0..terminals)
                    .map(|l| if mask & (1 << l) != 0 { d_max } else { 0 })
                    .collect(),
                d_max,
            })
            .collect()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Offset of 1-based terminal `l`.
    pub fn offset(&self, l: usize) -> usize {
        self.offsets[l - 1]
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// `d1;d2;...` rendering used in reports.
    pub fn label(&self) -> String {
        self.offsets.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(";")
    }
}

/// One length-`n` codeword per transmitting terminal.
#[derive(Clone, Debug, PartialEq)]
pub struct CodewordBlock {
    n: usize,
    symbols: Vec<Vec<Complex64>>,
}

impl CodewordBlock {
    pub fn new(symbols: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = symbols.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::invalid("codeword block needs n >= 1 and at least one terminal"));
        }
        if symbols.iter().any(|x| x.len() != n) {
            return Err(Error::invalid("all codewords in a block must share length n"));
        }
        Ok(Self { n, symbols })
    }

    pub fn zeros(n: usize, terminals: usize) -> Self {
        Self {
            n,
            symbols: vec![vec![Complex64::new(0.0, 0.0); n]; terminals],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terminals(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[Vec<Complex64>] {
        &self.symbols
    }

    /// Codeword of 1-based terminal `l`.
    pub fn word(&self, l: usize) -> &[Complex64] {
        &self.symbols[l - 1]
    }

    pub fn word_mut(&mut self, l: usize) -> &mut Vec<Complex64> {
        &mut self.symbols[l - 1]
    }

    /// `X_l[i]` with the zero-padding convention outside `0..n`.
    pub fn at(&self, l: usize, i: isize) -> Complex64 {
        if i < 0 || i as usize >= self.n {
            Complex64::new(0.0, 0.0)
        } else {
            self.symbols[l - 1][i as usize]
        }
    }

    /// `(1/n) Σ |X_l[i]|²`.
    pub fn empirical_power(&self, l: usize) -> f64 {
        self.word(l).iter().map(|x| x.norm_sqr()).sum::<f64>() / self.n as f64
    }

    /// Checks every terminal against its budget with relative tolerance `tol`.
    pub fn check_powers(&self, powers: &[f64], tol: f64) -> Result<()> {
        if powers.len() != self.terminals() {
            return Err(Error::invalid("power list length differs from terminal count"));
        }
        for (l, &p) in (1..).zip(powers) {
            let emp = self.empirical_power(l);
            if emp > p * (1.0 + tol) {
                return Err(Error::invalid(format!(
                    "terminal {l}: empirical power {emp} exceeds budget {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &CodewordBlock) -> Result<CodewordBlock> {
        if self.n != other.n || self.terminals() != other.terminals() {
            return Err(Error::invalid("block shapes differ"));
        }
        let symbols = self
            .symbols
            .iter()
            .zip(&other.symbols)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(CodewordBlock { n: self.n, symbols })
    }
}

/// Partition of `[0, n + d_max - 1]` into the left tail, right tail and common part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalPartition {
    pub left_tail: Range<usize>,
    pub right_tail: Range<usize>,
    pub common: Range<usize>,
}

impl IntervalPartition {
    pub fn new(n: usize, d_max: usize) -> Result<Self> {
        if d_max > n {
            return Err(Error::invalid(format!("d_max {d_max} exceeds block length {n}")));
        }
        Ok(Self {
            left_tail: 0..d_max,
            right_tail: n..n + d_max,
            common: d_max..n,
        })
    }

    pub fn total_len(&self) -> usize {
        self.right_tail.end
    }
}

/// Joint pmf of K finite-alphabet sources.
///
/// Entries are stored row-major with component 1 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceModel {
    alphabets: Vec<usize>,
    pmf: Vec<f64>,
    log_base: LogBase,
}

impl SourceModel {
    pub fn new(alphabets: Vec<usize>, pmf: Vec<f64>) -> Result<Self> {
        if alphabets.is_empty() || alphabets.contains(&0) {
            return Err(Error::config("alphabets", "need K >= 1 nonempty alphabets"));
        }
        let size = alphabets
            .iter()
            .try_fold(1usize, |acc, &a| acc.checked_mul(a))
            .filter(|&s| s <= 1 << 24)
            .ok_or_else(|| Error::config("alphabets", "joint alphabet larger than 2^24"))?;
        if pmf.len() != size {
            return Err(Error::config(
                "pmf",
                format!("expected {size} entries, got {}", pmf.len()),
            ));
        }
        if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::config("pmf", "entries must be finite and >= 0"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::config("pmf", format!("sums to {total}, not 1")));
        }
        Ok(Self {
            alphabets,
            pmf,
            log_base: LogBase::Bits,
        })
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    /// Doubly symmetric binary source: uniform `U1`, `U2 = U1 ⊕ Bern(p)`.
    pub fn dsbs(p: f64) -> Result<Self> {
        Self::new(vec![2, 2], vec![(1.0 - p) / 2.0, p / 2.0, p / 2.0, (1.0 - p) / 2.0])
    }

    /// Independent uniform components.
    pub fn independent_uniform(alphabets: Vec<usize>) -> Result<Self> {
        let size: usize = alphabets.iter().product();
        Self::new(alphabets, vec![1.0 / size as f64; size])
    }

    /// K identical copies of one uniform variable on `a` letters.
    pub fn identical_uniform(k: usize, a: usize) -> Result<Self> {
        let alphabets = vec![a; k];
        let size: usize = alphabets.iter().product();
        let mut pmf = vec![0.0; size];
        let stride: usize = (0..k).map(|j| a.pow(j as u32)).sum();
        for u in 0..a {
            pmf[u * stride] = 1.0 / a as f64;
        }
        Self::new(alphabets, pmf)
    }

    /// Deterministic sources fixed at letter 0.
    pub fn constant(alphabets: Vec<usize>) -> Result<Self> {
        let size: usize = alphabets.iter().product();
        let mut pmf = vec![0.0; size];
        pmf[0] = 1.0;
        Self::new(alphabets, pmf)
    }

    pub fn k(&self) -> usize {
        self.alphabets.len()
    }

    pub fn alphabets(&self) -> &[usize] {
        &self.alphabets
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn log_base(&self) -> LogBase {
        self.log_base
    }

    /// Flat index of a letter tuple.
    pub fn index_of(&self, letters: &[usize]) -> usize {
        letters.iter().zip(&self.alphabets).fold(0, |acc, (&u, &a)| acc * a + u)
    }

    /// Letter tuple of a flat index.
    pub fn letters_of(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.k()];
        for (slot, &a) in out.iter_mut().zip(&self.alphabets).rev() {
            *slot = idx % a;
            idx /= a;
        }
        out
    }

    pub fn prob(&self, letters: &[usize]) -> f64 {
        self.pmf[self.index_of(letters)]
    }

    /// Marginal pmf of the components in `keep` (1-based), in the same row-major order.
    pub fn marginal(&self, keep: Subset) -> Vec<f64> {
        let comps: Vec<usize> = keep.indices().filter(|&l| l <= self.k()).collect();
        let size: usize = comps.iter().map(|&l| self.alphabets[l - 1]).product();
        let mut out = vec![0.0; size];
        for (idx, &p) in self.pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let letters = self.letters_of(idx);
            let m = comps
                .iter()
                .fold(0, |acc, &l| acc * self.alphabets[l - 1] + letters[l - 1]);
            out[m] += p;
        }
        out
    }

    /// Entropy of the components in `s`; indices beyond K contribute nothing.
    pub fn entropy(&self, s: Subset) -> f64 {
        let marginal = self.marginal(s);
        let nats: f64 = marginal.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
        self.log_base.from_nats(nats)
    }

    /// Draws `m` i.i.d. letter tuples; returns one length-`m` sequence per component.
    pub fn sample_block<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::with_capacity(m); self.k()];
        for _ in 0..m {
            let r: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = self.pmf.len() - 1;
            for (idx, &p) in self.pmf.iter().enumerate() {
                acc += p;
                if r < acc {
                    chosen = idx;
                    break;
                }
            }
            // Guard against landing on a zero-probability tail entry through rounding.
            while self.pmf[chosen] == 0.0 && chosen > 0 {
                chosen -= 1;
            }
            for (seq, u) in out.iter_mut().zip(self.letters_of(chosen)) {
                seq.push(u);
            }
        }
        out
    }

    /// Relabel components: new component `i` is old component `perm[i-1]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let alphabets: Vec<usize> = perm.iter().map(|&p| self.alphabets[p - 1]).collect();
        let mut pmf = vec![0.0; self.pmf.len()];
        let template = Self {
            alphabets: alphabets.clone(),
            pmf: vec![],
            log_base: self.log_base,
        };
        for (idx, &p) in self.pmf.iter().enumerate() {
            let old = self.letters_of(idx);
            let new: Vec<usize> = perm.iter().map(|&q| old[q - 1]).collect();
            pmf[template.index_of(&new)] = p;
        }
        Ok(Self::new(alphabets, pmf)?.with_log_base(self.log_base))
    }
}

/// Serialized form of [`SourceModel`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceModelFile {
    pub alphabets: Vec<usize>,
    pub pmf: Vec<f64>,
}

impl TryFrom<SourceModelFile> for SourceModel {
    type Error = Error;

    fn try_from(f: SourceModelFile) -> Result<Self> {
        SourceModel::new(f.alphabets, f.pmf)
    }
}

impl From<&SourceModel> for SourceModelFile {
    fn from(s: &SourceModel) -> Self {
        Self {
            alphabets: s.alphabets.clone(),
            pmf: s.pmf.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_reject_bad_lengths() {
        let err = ChannelParams::new(
            2,
            vec![Complex64::new(1.0, 0.0); 2],
            vec![Complex64::new(1.0, 0.0); 2],
            1.0,
            vec![1.0; 3],
        )
        .unwrap_err();
        assert!(err.to_string().contains("gains_dest"));
        assert!(ChannelParams::uniform(2, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ChannelParams::uniform(2, f64::INFINITY, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn params_toml_round_trip() {
        let p = ChannelParams::new(
            1,
            vec![Complex64::new(1.0, -0.5), Complex64::new(0.0, 2.0)],
            vec![Complex64::new(3.0, 0.0)],
            0.5,
            vec![1.0, 2.0],
        )
        .unwrap();
        let text = p.to_toml_string();
        assert_eq!(ChannelParams::from_toml_str(&text).unwrap(), p);
    }

    #[test]
    fn toml_errors_name_the_key() {
        let err = ChannelParams::from_toml_str("K = 1\ngains_dest = [[1,0],[1,0]]\nnoise_power = 1\npowers = [1,1]")
            .unwrap_err();
        assert!(err.to_string().contains("gains_relay"), "{err}");
    }

    #[test]
    fn delays_validate_and_enumerate_corners() {
        assert!(DelayProfile::new(vec![0, 5], 4).is_err());
        let corners = DelayProfile::corners(3, 4);
        assert_eq!(corners.len(), 8);
        assert!(corners.iter().all(|c| c.offsets().iter().all(|&d| d == 0 || d == 4)));
        assert_eq!(DelayProfile::corners(3, 0).len(), 1);
    }

    #[test]
    fn partition_covers_everything() {
        let p = IntervalPartition::new(10, 3).unwrap();
        assert_eq!(p.left_tail, 0..3);
        assert_eq!(p.common, 3..10);
        assert_eq!(p.right_tail, 10..13);
        assert_eq!(p.total_len(), 13);
        assert!(IntervalPartition::new(3, 4).is_err());
    }

    #[test]
    fn source_model_validation() {
        assert!(SourceModel::new(vec![2], vec![0.5, 0.6]).is_err());
        assert!(SourceModel::new(vec![2, 2], vec![0.5, 0.5]).is_err());
        let s = SourceModel::dsbs(0.1).unwrap();
        assert_eq!(s.prob(&[0, 1]), 0.05);
        assert_eq!(s.letters_of(s.index_of(&[1, 0])), vec![1, 0]);
    }

    #[test]
    fn identical_uniform_is_diagonal() {
        let s = SourceModel::identical_uniform(2, 3).unwrap();
        for u in 0..3 {
            assert!((s.prob(&[u, u]) - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(s.prob(&[0, 1]), 0.0);
    }

    #[test]
    fn codeword_zero_padding() {
        let b = CodewordBlock::new(vec![vec![Complex64::new(1.0, 0.0); 3]]).unwrap();
        assert_eq!(b.at(1, -1), Complex64::new(0.0, 0.0));
        assert_eq!(b.at(1, 3), Complex64::new(0.0, 0.0));
        assert_eq!(b.at(1, 2), Complex64::new(1.0, 0.0));
        assert!(b.check_powers(&[1.0], 1e-9).is_ok());
        assert!(b.check_powers(&[0.5], 1e-9).is_err());
    }
}
