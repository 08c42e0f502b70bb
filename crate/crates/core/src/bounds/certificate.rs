use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed_form::{alpha_default, converse_rhs, gamma, lambda_bound, zeta};
use super::mi::{gaussian_mi, ChannelMode};
use crate::error::{Error, Result};
use crate::model::{ChannelParams, DelayProfile};
use crate::subset::Subset;
use crate::units::{derive_seed, fmt_sig, LogBase};

/// How `d_max` is chosen for each block length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum DmaxRule {
    /// `floor(sqrt(n))`
    Sqrt,
    Zero,
    Fixed(usize),
    /// `floor(c · n)`
    Fraction(f64),
}

impl DmaxRule {
    pub fn apply(self, n: usize) -> usize {
        match self {
            DmaxRule::Sqrt => {
                let mut r = (n as f64).sqrt() as usize;
                while r * r > n {
                    r -= 1;
                }
                while (r + 1) * (r + 1) <= n {
                    r += 1;
                }
                r
            }
            DmaxRule::Zero => 0,
            DmaxRule::Fixed(d) => d,
            DmaxRule::Fraction(c) => (c * n as f64).floor() as usize,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertificateConfig {
    pub n_list: Vec<usize>,
    pub d_max_rule: DmaxRule,
    pub trials: usize,
    pub seed: u64,
    /// Defaults to every terminal, relay included.
    pub subset: Option<Subset>,
    pub input_powers: Option<Vec<f64>>,
    pub base: LogBase,
}

impl CertificateConfig {
    pub fn new(n_list: Vec<usize>, d_max_rule: DmaxRule, trials: usize, seed: u64) -> Self {
        Self {
            n_list,
            d_max_rule,
            trials,
            seed,
            subset: None,
            input_powers: None,
            base: LogBase::Bits,
        }
    }
}

/// One sampled delay profile.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateRow {
    pub n: usize,
    pub d_max: usize,
    pub trial: usize,
    pub delays: DelayProfile,
    pub subset: Subset,
    pub alpha: Option<usize>,
    pub gamma: f64,
    pub lambda: Option<f64>,
    pub zeta: f64,
    pub eps: f64,
    pub converse_rhs: Option<f64>,
    pub mi_sliced: f64,
    pub mi_cyclic: f64,
    pub gap: f64,
    pub pass: bool,
}

/// Per-`n` aggregate.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateSummary {
    pub n: usize,
    pub d_max: usize,
    pub max_gap: f64,
    pub eps: f64,
    /// `max_gap / eps`, 0 when `eps = 0`.
    pub max_ratio: f64,
    pub all_pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiGapCertificate {
    pub rows: Vec<CertificateRow>,
    pub summaries: Vec<CertificateSummary>,
}

impl MiGapCertificate {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Max gap never increases along `n_list`.
    pub fn trend_nonincreasing(&self) -> bool {
        self.summaries.windows(2).all(|w| w[1].max_gap <= w[0].max_gap)
    }

    pub const CSV_HEADER: &'static str =
        "n,d_max,alpha,S,gamma,lambda,zeta,eps,converse_rhs,mi_sliced,mi_cyclic,gap,pass,trial,delays";

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let opt = |v: Option<f64>| v.map(|x| fmt_sig(x, 12)).unwrap_or_else(|| "NA".into());
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.d_max,
                r.alpha.map(|a| a.to_string()).unwrap_or_else(|| "NA".into()),
                r.subset.to_bitstring(r.delays.len()),
                fmt_sig(r.gamma, 12),
                opt(r.lambda),
                fmt_sig(r.zeta, 12),
                fmt_sig(r.eps, 12),
                opt(r.converse_rhs),
                fmt_sig(r.mi_sliced, 12),
                fmt_sig(r.mi_cyclic, 12),
                fmt_sig(r.gap, 12),
                r.pass,
                r.trial,
                r.delays.label(),
            )?;
        }
        Ok(())
    }
}

/// Compares sliced and cyclic Gaussian MI over random delay profiles.
pub fn mi_gap_certificate(params: &ChannelParams, cfg: &CertificateConfig) -> Result<MiGapCertificate> {
    let s = cfg.subset.unwrap_or_else(|| params.full_set());
    params.check_subset(s)?;
    if s.is_empty() {
        return Err(Error::invalid("certificate subset must be nonempty"));
    }
    let base = cfg.base;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &n in &cfg.n_list {
        let d_max = cfg.d_max_rule.apply(n);
        if d_max > n {
            return Err(Error::invalid(format!("d_max rule gives {d_max} > n = {n}")));
        }
        let g = gamma(params, s, n, d_max, base)?;
        let alpha = alpha_default(n, d_max, base).ok();
        let lambda = alpha.map(|a| lambda_bound(params, s, n, a, base)).transpose()?;
        let rhs = alpha.map(|a| converse_rhs(params, s, n, d_max, a, base)).transpose()?;
        let z = zeta(params, s)?;
        let eps = 3.0 * g;
        let powers = cfg.input_powers.as_deref();
        let block: Vec<CertificateRow> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[cfg.seed, n as u64, t as u64]));
                let delays = DelayProfile::sample(&mut rng, params.terminals(), d_max);
                let sl = gaussian_mi(params, &delays, s, n, ChannelMode::Sliced, powers, base)?;
                let cy = gaussian_mi(params, &delays, s, n, ChannelMode::Cyclic, powers, base)?;
                let gap = (sl - cy).abs();
                Ok(CertificateRow {
                    n,
                    d_max,
                    trial: t,
                    delays,
                    subset: s,
                    alpha,
                    gamma: g,
                    lambda,
                    zeta: z,
                    eps,
                    converse_rhs: rhs,
                    mi_sliced: sl,
                    mi_cyclic: cy,
                    gap,
                    pass: gap <= eps,
                })
            })
            .collect::<Result<_>>()?;
        let max_gap = block.iter().map(|r| r.gap).fold(0.0, f64::max);
        summaries.push(CertificateSummary {
            n,
            d_max,
            max_gap,
            eps,
            max_ratio: if eps > 0.0 { max_gap / eps } else { 0.0 },
            all_pass: block.iter().all(|r| r.pass),
        });
        rows.extend(block);
    }
    Ok(MiGapCertificate { rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_rule() {
        assert_eq!(DmaxRule::Sqrt.apply(32), 5);
        assert_eq!(DmaxRule::Sqrt.apply(64), 8);
        assert_eq!(DmaxRule::Sqrt.apply(255), 15);
        assert_eq!(DmaxRule::Fraction(0.25).apply(10), 2);
    }

    #[test]
    fn zero_rule_gives_zero_gaps() {
        let p = ChannelParams::uniform(2, 1.0, 1.0, 1.0, 1.0).unwrap();
        let c = mi_gap_certificate(&p, &CertificateConfig::new(vec![16, 32], DmaxRule::Zero, 3, 1)).unwrap();
        assert!(c.rows.iter().all(|r| r.gap < 1e-13 && r.pass));
    }

    #[test]
    fn small_sweep_passes_and_is_deterministic() {
        let p = ChannelParams::uniform(2, 1.0, 1.0, 1.0, 1.0).unwrap();
        let cfg = CertificateConfig::new(vec![16, 32, 64], DmaxRule::Sqrt, 6, 9);
        let a = mi_gap_certificate(&p, &cfg).unwrap();
        let b = mi_gap_certificate(&p, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.all_pass());
        assert_eq!(a.rows.len(), 18);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 19);
        assert!(text.lines().nth(1).unwrap().starts_with("16,4,"));
    }
}
