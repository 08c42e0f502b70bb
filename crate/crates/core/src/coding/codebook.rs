use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::units::{derive_seed, index_count};

/// Largest `log2` of a codebook size.
pub const MAX_CODEBOOK_BITS: f64 = 22.0;
/// Largest number of complex entries held by a [`MaterializedCodebook`].
pub const MAX_MATERIALIZED_ENTRIES: usize = 1 << 25;

/// Random Gaussian codebook; words are generated on demand from `(seed, index)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianCodebook {
    n: usize,
    size: usize,
    power: f64,
    seed: u64,
}

impl GaussianCodebook {
    pub fn new(n: usize, size: usize, power: f64, seed: u64) -> Result<Self> {
        if n == 0 || size == 0 {
            return Err(Error::invalid("codebook needs n >= 1 and at least one word"));
        }
        if !(power.is_finite() && power >= 0.0) {
            return Err(Error::invalid(format!(
                "codeword power must be finite and >= 0, got {power}"
            )));
        }
        if (size as f64).log2() > MAX_CODEBOOK_BITS {
            return Err(Error::budget(format!(
                "codebook of {size} words exceeds 2^{MAX_CODEBOOK_BITS}; lower n·R"
            )));
        }
        Ok(Self { n, size, power, seed })
    }

    /// `ceil(2^{nR})` words.
    pub fn from_rate(n: usize, rate: f64, power: f64, seed: u64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::invalid(format!("rate must be finite and >= 0, got {rate}")));
        }
        let bits = n as f64 * rate;
        if bits > MAX_CODEBOOK_BITS {
            return Err(Error::budget(format!(
                "n·R = {bits} exceeds {MAX_CODEBOOK_BITS}; lower n·R"
            )));
        }
        Self::new(n, index_count(bits) as usize, power, seed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// I.i.d. CN(0,1) entries rescaled so that `(1/n) Σ |x_i|² = power`.
    pub fn word(&self, idx: usize) -> Vec<Complex64> {
        assert!(idx < self.size, "codeword index {idx} out of range {}", self.size);
        let mut out = Vec::with_capacity(self.n);
        self.fill_word(idx, &mut out);
        out
    }

    fn fill_word(&self, idx: usize, out: &mut Vec<Complex64>) {
        let start = out.len();
        if self.power == 0.0 {
            out.resize(start + self.n, Complex64::new(0.0, 0.0));
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[self.seed, idx as u64]));
        let half = std::f64::consts::FRAC_1_SQRT_2;
        for _ in 0..self.n {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            out.push(Complex64::new(re * half, im * half));
        }
        let energy: f64 = out[start..].iter().map(|z| z.norm_sqr()).sum();
        let scale = (self.power * self.n as f64 / energy).sqrt();
        for z in &mut out[start..] {
            *z *= scale;
        }
    }

    pub fn materialize(&self) -> Result<MaterializedCodebook> {
        let entries = self
            .size
            .checked_mul(self.n)
            .filter(|&e| e <= MAX_MATERIALIZED_ENTRIES)
            .ok_or_else(|| Error::budget(format!("codebook {}×{} too large to hold in memory", self.size, self.n)))?;
        let mut words = Vec::with_capacity(entries);
        for idx in 0..self.size {
            self.fill_word(idx, &mut words);
        }
        Ok(MaterializedCodebook {
            n: self.n,
            size: self.size,
            words,
        })
    }
}

/// All words of a codebook stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterializedCodebook {
    n: usize,
    size: usize,
    words: Vec<Complex64>,
}

impl MaterializedCodebook {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn word(&self, idx: usize) -> &[Complex64] {
        &self.words[idx * self.n..(idx + 1) * self.n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_zero_single_word() {
        let c = GaussianCodebook::from_rate(32, 0.0, 1.0, 1).unwrap();
        assert_eq!(c.size(), 1);
        assert_eq!(GaussianCodebook::from_rate(8, 0.5, 1.0, 1).unwrap().size(), 16);
    }

    #[test]
    fn exact_power() {
        let c = GaussianCodebook::new(48, 20, 2.5, 7).unwrap();
        for i in 0..20 {
            let w = c.word(i);
            let p = w.iter().map(|z| z.norm_sqr()).sum::<f64>() / 48.0;
            assert!((p - 2.5).abs() < 1e-9);
        }
        let silent = GaussianCodebook::new(8, 2, 0.0, 7).unwrap();
        assert!(silent.word(1).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn seeds_differ_and_materialize_matches() {
        let a = GaussianCodebook::new(32, 16, 1.0, 1).unwrap();
        let b = GaussianCodebook::new(32, 16, 1.0, 2).unwrap();
        for i in 0..16 {
            assert!(a.word(i).iter().zip(b.word(i)).all(|(x, y)| *x != y));
        }
        let m = a.materialize().unwrap();
        for i in 0..16 {
            assert_eq!(m.word(i), a.word(i).as_slice());
        }
        assert_eq!(a.word(3), a.word(3));
    }

    #[test]
    fn guards() {
        assert!(matches!(
            GaussianCodebook::from_rate(64, 0.5, 1.0, 0),
            Err(Error::Budget(_))
        ));
        assert!(GaussianCodebook::new(8, 4, f64::NAN, 0).is_err());
    }
}
