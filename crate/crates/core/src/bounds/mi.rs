use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ChannelParams, DelayProfile};
use crate::subset::Subset;
use crate::units::LogBase;

/// Largest block length accepted by [`gaussian_mi`].
pub const MAX_MI_BLOCK: usize = 4096;

/// Which destination model the log-det is evaluated on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelMode {
    /// Linear shifts, `n + d_max` output samples.
    Sliced,
    /// Indices taken modulo `n`, `n` output samples.
    Cyclic,
}

/// Shift-structured gain matrix scaled by `sqrt(P/N)`, one column per input symbol.
fn scaled_gain_matrix(
    params: &ChannelParams,
    delays: &DelayProfile,
    s: Subset,
    n: usize,
    mode: ChannelMode,
    powers: &[f64],
) -> DMatrix<Complex64> {
    let rows = match mode {
        ChannelMode::Sliced => n + delays.d_max(),
        ChannelMode::Cyclic => n,
    };
    let members: Vec<usize> = s.indices().collect();
    let mut g = DMatrix::<Complex64>::zeros(rows, members.len() * n);
    for (c, &l) in members.iter().enumerate() {
        let scale = params.gain_dest(l) * (powers[l - 1] / params.noise_power()).sqrt();
        let d = delays.offset(l);
        for j in 0..n {
            let row = match mode {
                ChannelMode::Sliced => j + d,
                ChannelMode::Cyclic => (j + d) % n,
            };
            g[(row, c * n + j)] = scale;
        }
    }
    g
}

/// `(1/n) · log det(I + G Σ G* / N)` for independent white Gaussian inputs on `S`.
///
/// `input_powers` overrides the per-terminal powers of `params` when given.
pub fn gaussian_mi(
    params: &ChannelParams,
    delays: &DelayProfile,
    s: Subset,
    n: usize,
    mode: ChannelMode,
    input_powers: Option<&[f64]>,
    base: LogBase,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if n > MAX_MI_BLOCK {
        return Err(Error::budget(format!(
            "gaussian_mi assembles dense matrices only up to n = {MAX_MI_BLOCK}, got {n}"
        )));
    }
    params.check_subset(s)?;
    if delays.len() != params.terminals() {
        return Err(Error::invalid(format!(
            "delay profile has {} offsets, expected {}",
            delays.len(),
            params.terminals()
        )));
    }
    if mode == ChannelMode::Cyclic && delays.d_max() > n {
        return Err(Error::invalid(format!("d_max {} exceeds n {n}", delays.d_max())));
    }
    let powers = input_powers.unwrap_or(params.powers());
    if powers.len() != params.terminals() || powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invalid(
            "input_powers must hold one finite nonnegative power per terminal",
        ));
    }
    if s.is_empty() {
        return Ok(0.0);
    }
    let a = scaled_gain_matrix(params, delays, s, n, mode, powers);
    let mut m = &a * a.adjoint();
    for i in 0..m.nrows() {
        m[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Internal("I + G Σ G*/N failed to factor".into()))?;
    let l = chol.l_dirty();
    let log_det: f64 = (0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
    Ok(base.from_nats(log_det) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params2() -> ChannelParams {
        ChannelParams::new(
            2,
            vec![
                Complex64::new(1.0, 0.5),
                Complex64::new(-0.7, 0.2),
                Complex64::new(0.3, 0.9),
            ],
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            0.8,
            vec![1.0, 2.0, 0.5],
        )
        .unwrap()
    }

    /// With white inputs the Gram matrix is diagonal: row i collects the
    /// received power of every terminal whose shifted codeword covers i.
    fn diagonal_oracle(p: &ChannelParams, delays: &DelayProfile, s: Subset, n: usize, mode: ChannelMode) -> f64 {
        let rows = match mode {
            ChannelMode::Sliced => n + delays.d_max(),
            ChannelMode::Cyclic => n,
        };
        let mut total = 0.0;
        for i in 0..rows {
            let mut snr = 0.0;
            for l in s.indices() {
                let d = delays.offset(l);
                let active = match mode {
                    ChannelMode::Sliced => i >= d && i < d + n,
                    ChannelMode::Cyclic => true,
                };
                if active {
                    snr += p.gain_dest(l).norm_sqr() * p.power(l) / p.noise_power();
                }
            }
            total += (1.0 + snr).log2();
        }
        total / n as f64
    }

    #[test]
    fn scalar_channel_matches_capacity() {
        let p = ChannelParams::uniform(1, 2.0, 1.0, 1.5, 1.0).unwrap();
        let s = Subset::singleton(1);
        let d = DelayProfile::synchronous(2);
        for mode in [ChannelMode::Sliced, ChannelMode::Cyclic] {
            let v = gaussian_mi(&p, &d, s, 16, mode, None, LogBase::Bits).unwrap();
            assert!((v - (1.0f64 + 4.0 * 1.5).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn synchronous_modes_agree() {
        let p = params2();
        let d = DelayProfile::synchronous(3);
        let a = gaussian_mi(&p, &d, Subset::full(3), 24, ChannelMode::Sliced, None, LogBase::Bits).unwrap();
        let b = gaussian_mi(&p, &d, Subset::full(3), 24, ChannelMode::Cyclic, None, LogBase::Bits).unwrap();
        assert!((a - b).abs() <= 1e-14 * a.abs());
    }

    #[test]
    fn matches_diagonal_oracle() {
        let p = params2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let d = DelayProfile::sample(&mut rng, 3, 5);
            for s in Subset::all(3).filter(|s| !s.is_empty()) {
                for mode in [ChannelMode::Sliced, ChannelMode::Cyclic] {
                    let v = gaussian_mi(&p, &d, s, 20, mode, None, LogBase::Bits).unwrap();
                    let o = diagonal_oracle(&p, &d, s, 20, mode);
                    assert!((v - o).abs() < 1e-11, "{v} vs {o}");
                }
            }
        }
    }

    #[test]
    fn gap_within_three_gamma_at_64() {
        let p = params2();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = Subset::full(3);
        let eps = 3.0 * super::super::gamma(&p, s, 64, 8, LogBase::Bits).unwrap();
        for _ in 0..5 {
            let d = DelayProfile::sample(&mut rng, 3, 8);
            let a = gaussian_mi(&p, &d, s, 64, ChannelMode::Sliced, None, LogBase::Bits).unwrap();
            let b = gaussian_mi(&p, &d, s, 64, ChannelMode::Cyclic, None, LogBase::Bits).unwrap();
            assert!((a - b).abs() <= eps);
        }
    }

    #[test]
    fn input_power_override_and_guard() {
        let p = params2();
        let d = DelayProfile::synchronous(3);
        let zero = gaussian_mi(
            &p,
            &d,
            Subset::full(3),
            8,
            ChannelMode::Sliced,
            Some(&[0.0; 3]),
            LogBase::Bits,
        )
        .unwrap();
        assert!(zero.abs() < 1e-15);
        assert!(matches!(
            gaussian_mi(&p, &d, Subset::full(3), 5000, ChannelMode::Sliced, None, LogBase::Bits),
            Err(Error::Budget(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn invariant_under_phase_and_relabel(phase in 0.0f64..std::f64::consts::TAU, seed in any::<u64>()) {
            let p = params2();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = DelayProfile::sample(&mut rng, 3, 4);
            let s = Subset::full(3);
            let base = gaussian_mi(&p, &d, s, 12, ChannelMode::Sliced, None, LogBase::Bits).unwrap();

            let rot = Complex64::from_polar(1.0, phase);
            let mut gd = p.gains_dest().to_vec();
            gd[1] *= rot;
            let q = ChannelParams::new(2, gd, p.gains_relay().to_vec(), p.noise_power(), p.powers().to_vec()).unwrap();
            let v = gaussian_mi(&q, &d, s, 12, ChannelMode::Sliced, None, LogBase::Bits).unwrap();
            prop_assert!((v - base).abs() < 1e-11);

            let swapped = p.permute_encoders(&[2, 1]).unwrap();
            let o = d.offsets();
            let d2 = DelayProfile::new(vec![o[1], o[0], o[2]], d.d_max()).unwrap();
            let w = gaussian_mi(&swapped, &d2, s, 12, ChannelMode::Sliced, None, LogBase::Bits).unwrap();
            prop_assert!((w - base).abs() < 1e-11);
        }
    }
}
