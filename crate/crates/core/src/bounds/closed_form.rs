use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::ChannelParams;
use crate::subset::Subset;
use crate::units::LogBase;

/// `z · log(1 + a/z)` with the `z → 0` limit of 0.
fn vanishing_term(z: f64, a: f64, base: LogBase) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z * base.log1p(a / z)
    }
}

/// Tail-interval bound `(d/n) · log(1 + (n/d) · Σ|g|² ΣP / N)`; 0 when `d_max = 0`.
pub fn gamma(params: &ChannelParams, s: Subset, n: usize, d_max: usize, base: LogBase) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if d_max > n {
        return Err(Error::invalid(format!("d_max {d_max} exceeds n {n}")));
    }
    if s.is_empty() {
        return Err(Error::invalid("subset must be nonempty"));
    }
    params.check_subset(s)?;
    let a = params.gain_power_product(s) / params.noise_power();
    Ok(vanishing_term(d_max as f64 / n as f64, a, base))
}

/// `ceil((n / d_max) · log d_max)`, rejected unless `2α < n`.
pub fn alpha_default(n: usize, d_max: usize, base: LogBase) -> Result<usize> {
    if d_max < 2 {
        return Err(Error::invalid(format!("alpha needs d_max >= 2, got {d_max}")));
    }
    let raw = n as f64 / d_max as f64 * base.log(d_max as f64);
    // Snap values within roundoff of an integer before taking the ceiling.
    let snapped = raw.round();
    let alpha = if (raw - snapped).abs() <= 1e-9 * snapped.max(1.0) {
        snapped
    } else {
        raw.ceil()
    } as usize;
    if 2 * alpha >= n {
        return Err(Error::RegimeNotReached(format!(
            "alpha = {alpha} but n = {n} requires 2·alpha < n; increase n"
        )));
    }
    Ok(alpha)
}

/// Spectral-edge bound `(α/n) · log(1 + (n/α) · Σ|g|² ΣP / N)`.
pub fn lambda_bound(params: &ChannelParams, s: Subset, n: usize, alpha: usize, base: LogBase) -> Result<f64> {
    if alpha == 0 || 2 * alpha >= n {
        return Err(Error::invalid(format!(
            "need 1 <= alpha and 2·alpha < n (alpha {alpha}, n {n})"
        )));
    }
    params.check_subset(s)?;
    let a = params.gain_power_product(s) / params.noise_power();
    Ok(vanishing_term(alpha as f64 / n as f64, a, base))
}

/// Magnitude of the characteristic function of a uniform offset on `{0..d_max}`
/// at frequency `i/n`, and its `1/(d_max |sin(πi/n)|)` bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharFnMagnitude {
    pub exact: f64,
    pub bound: f64,
}

pub fn char_fn_magnitude(i: usize, n: usize, d_max: usize) -> Result<CharFnMagnitude> {
    if n == 0 || i.is_multiple_of(n) {
        return Err(Error::invalid("frequency index must satisfy i ≢ 0 (mod n)"));
    }
    if d_max == 0 {
        return Err(Error::invalid("bound undefined for d_max = 0"));
    }
    let denom = (PI * i as f64 / n as f64).sin().abs();
    // Numerator vanishes exactly when i·(d_max+1) is a multiple of n.
    let exact = if (i * (d_max + 1)).is_multiple_of(n) {
        0.0
    } else {
        let r = (i * (d_max + 1)) % (2 * n);
        (PI * r as f64 / n as f64).sin().abs() / ((d_max + 1) as f64 * denom)
    };
    Ok(CharFnMagnitude {
        exact,
        bound: 1.0 / (d_max as f64 * denom),
    })
}

/// `Σ_{l<l' in S} |g_l||g_l'| (P_l + P_l')`.
pub fn zeta(params: &ChannelParams, s: Subset) -> Result<f64> {
    params.check_subset(s)?;
    let idx: Vec<usize> = s.indices().collect();
    let mut total = 0.0;
    for (a, &l) in idx.iter().enumerate() {
        for &m in &idx[a + 1..] {
            total += params.gain_dest(l).norm() * params.gain_dest(m).norm() * (params.power(l) + params.power(m));
        }
    }
    Ok(total)
}

/// Finite-n right-hand side of the converse, without the Fano term.
pub fn converse_rhs(
    params: &ChannelParams,
    s: Subset,
    n: usize,
    d_max: usize,
    alpha: usize,
    base: LogBase,
) -> Result<f64> {
    if alpha == 0 || 2 * alpha >= n {
        return Err(Error::invalid(format!(
            "need 1 <= alpha and 2·alpha < n (alpha {alpha}, n {n})"
        )));
    }
    if d_max > n {
        return Err(Error::invalid(format!("d_max {d_max} exceeds n {n}")));
    }
    params.check_subset(s)?;
    let z = zeta(params, s)?;
    let cross = if z == 0.0 {
        0.0
    } else if d_max == 0 {
        return Err(Error::invalid("cross term undefined for d_max = 0 with nonzero zeta"));
    } else {
        z / (d_max as f64 * (PI * alpha as f64 / n as f64).sin())
    };
    let middle = (n - 2 * alpha) as f64;
    let main = middle / n as f64
        * base.log1p(n as f64 / middle * (params.received_power_dest(s) + cross) / params.noise_power());
    let lambda = if s.is_empty() {
        0.0
    } else {
        lambda_bound(params, s, n, alpha, base)?
    };
    let gamma = if s.is_empty() {
        0.0
    } else {
        gamma(params, s, n, d_max, base)?
    };
    Ok(main + 2.0 * lambda + 3.0 * gamma)
}

/// `log(1 + Σ_{l∈S} |g_lD|² P_l / N)`, the limit of [`converse_rhs`].
pub fn asymptotic_rhs(params: &ChannelParams, s: Subset, base: LogBase) -> f64 {
    base.log1p(params.received_power_dest(s) / params.noise_power())
}

/// Closed-form quantities for one `(n, d_max, S)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub d_max: usize,
    pub subset: Subset,
    /// `None` when `alpha_default` is not in its regime.
    pub alpha: Option<usize>,
    pub gamma: f64,
    pub lambda: Option<f64>,
    pub zeta: f64,
    /// `3 · gamma`.
    pub eps: f64,
    pub converse_rhs: Option<f64>,
    /// Always true: the Fano term depends on the code and is not included.
    pub fano_excluded: bool,
}

impl BoundReport {
    pub fn evaluate(params: &ChannelParams, s: Subset, n: usize, d_max: usize, base: LogBase) -> Result<Self> {
        let g = gamma(params, s, n, d_max, base)?;
        let alpha = alpha_default(n, d_max, base).ok();
        let (lambda, rhs) = match alpha {
            Some(a) => (
                Some(lambda_bound(params, s, n, a, base)?),
                Some(converse_rhs(params, s, n, d_max, a, base)?),
            ),
            None => (None, None),
        };
        Ok(Self {
            n,
            d_max,
            subset: s,
            alpha,
            gamma: g,
            lambda,
            zeta: zeta(params, s)?,
            eps: 3.0 * g,
            converse_rhs: rhs,
            fano_excluded: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn unit(k: usize) -> ChannelParams {
        ChannelParams::uniform(k, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    /// Single terminal with |g|² = 1, P = 1, N = 1.
    fn single() -> (ChannelParams, Subset) {
        let p = ChannelParams::new(
            1,
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(1.0, 0.0)],
            1.0,
            vec![1.0, 0.0],
        )
        .unwrap();
        (p, Subset::singleton(1))
    }

    #[test]
    fn gamma_values() {
        let (p, s) = single();
        assert_eq!(gamma(&p, s, 100, 0, LogBase::Bits).unwrap(), 0.0);
        let g = gamma(&p, s, 100, 10, LogBase::Bits).unwrap();
        assert!((g - 0.1 * 11f64.log2()).abs() < 1e-15);
        assert!((g - 0.345_943_161_863_73).abs() < 1e-12);
        assert!(gamma(&p, Subset::EMPTY, 100, 10, LogBase::Bits).is_err());
    }

    #[test]
    fn gamma_decreases_along_sqrt_rule() {
        let p = unit(2);
        let s = Subset::full(3);
        let vals: Vec<f64> = [100usize, 1_000, 10_000, 100_000]
            .iter()
            .map(|&n| gamma(&p, s, n, (n as f64).sqrt().floor() as usize, LogBase::Bits).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_default(1000, 100, LogBase::Bits).unwrap(), 67);
        assert_eq!(alpha_default(10_000, 100, LogBase::Bits).unwrap(), 665);
        assert!(matches!(
            alpha_default(16, 2, LogBase::Bits),
            Err(Error::RegimeNotReached(_))
        ));
        assert!(alpha_default(100, 1, LogBase::Bits).is_err());
    }

    #[test]
    fn lambda_examples() {
        let (p, s) = single();
        // (67/1000) · log2(1 + 1000/67)
        let l = lambda_bound(&p, s, 1000, 67, LogBase::Bits).unwrap();
        let oracle = 0.067 * (1.0f64 + 1000.0 / 67.0).log2();
        assert!((l - oracle).abs() < 1e-15);
        assert!((l - 0.267_548_103_114_566).abs() < 1e-12);
        // identical functional form to gamma
        assert_eq!(
            lambda_bound(&p, s, 1000, 40, LogBase::Bits).unwrap(),
            gamma(&p, s, 1000, 40, LogBase::Bits).unwrap()
        );
        let small = lambda_bound(&p, s, 1_000_000_000, 1, LogBase::Bits).unwrap();
        assert!(small < 1e-7);
    }

    fn brute_char_fn(i: usize, n: usize, d_max: usize) -> f64 {
        let sum: Complex64 = (0..=d_max)
            .map(|d| Complex64::from_polar(1.0, 2.0 * PI * (i * d) as f64 / n as f64))
            .sum();
        sum.norm() / (d_max + 1) as f64
    }

    #[test]
    fn char_fn_examples() {
        let c = char_fn_magnitude(4, 8, 3).unwrap();
        assert_eq!(c.exact, 0.0);
        assert!((c.bound - 1.0 / 3.0).abs() < 1e-15);
        for i in 1..16 {
            assert!(char_fn_magnitude(i, 16, 15).unwrap().exact < 1e-12);
        }
        let c = char_fn_magnitude(1, 16, 4).unwrap();
        assert!((c.exact - brute_char_fn(1, 16, 4)).abs() < 1e-12);
        assert!(char_fn_magnitude(8, 8, 3).is_err());
        assert!(char_fn_magnitude(0, 8, 3).is_err());
    }

    #[test]
    fn zeta_examples() {
        let p = unit(2);
        assert_eq!(zeta(&p, Subset::singleton(2)).unwrap(), 0.0);
        assert_eq!(zeta(&p, Subset::from_indices([1, 2])).unwrap(), 2.0);
        assert_eq!(zeta(&p, Subset::full(3)).unwrap(), 6.0);
        let zero = ChannelParams::uniform(2, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(zeta(&zero, Subset::full(3)).unwrap(), 0.0);
    }

    #[test]
    fn converse_exceeds_limit_and_silent_is_small() {
        let p = unit(2);
        let s = Subset::full(3);
        for n in [1_000usize, 10_000, 100_000] {
            let d = (n as f64).sqrt() as usize;
            let a = alpha_default(n, d, LogBase::Bits).unwrap();
            assert!(converse_rhs(&p, s, n, d, a, LogBase::Bits).unwrap() >= asymptotic_rhs(&p, s, LogBase::Bits));
        }
        let silent = ChannelParams::uniform(2, 1.0, 1.0, 0.0, 1.0).unwrap();
        let v = converse_rhs(
            &silent,
            s,
            1_000_000,
            1000,
            alpha_default(1_000_000, 1000, LogBase::Bits).unwrap(),
            LogBase::Bits,
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn report_invariants() {
        let r = BoundReport::evaluate(&unit(2), Subset::full(3), 1000, 31, LogBase::Bits).unwrap();
        assert_eq!(r.eps, 3.0 * r.gamma);
        assert!(r.alpha.is_some() && r.converse_rhs.is_some());
        assert!(r.fano_excluded);
        let short = BoundReport::evaluate(&unit(2), Subset::full(3), 16, 2, LogBase::Bits).unwrap();
        assert_eq!(short.alpha, None);
    }
}
