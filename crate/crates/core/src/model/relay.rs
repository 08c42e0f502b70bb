//! Strictly causal relay encoding.
//!
//! A relay policy is asked for its next symbol given only the relay
//! observations received so far. [`run_relay`] drives a policy over a whole
//! observation and keeps the power account.

use num_complex::Complex64;

/// Deterministic map from a received prefix to the relay's next symbol.
pub trait RelayPolicy {
    /// Symbol at local relay time `local_index`, where `prefix` holds every
    /// relay observation strictly before that time.
    fn next_symbol(&mut self, local_index: usize, prefix: &[Complex64]) -> Complex64;
}

/// A relay that never transmits.
#[derive(Clone, Copy, Debug, Default)]
pub struct SilentRelay;

impl RelayPolicy for SilentRelay {
    fn next_symbol(&mut self, _local_index: usize, _prefix: &[Complex64]) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

/// Scales and forwards the most recent observation.
#[derive(Clone, Copy, Debug)]
pub struct AmplifyForward {
    pub gain: Complex64,
}

impl RelayPolicy for AmplifyForward {
    fn next_symbol(&mut self, _local_index: usize, prefix: &[Complex64]) -> Complex64 {
        prefix.last().map_or(Complex64::new(0.0, 0.0), |y| self.gain * y)
    }
}

/// One causal step: the relay's next symbol from everything received so far.
pub fn relay_causal_encode<P: RelayPolicy + ?Sized>(
    policy: &mut P,
    local_index: usize,
    y_relay_prefix: &[Complex64],
) -> Complex64 {
    policy.next_symbol(local_index, y_relay_prefix)
}

/// Running energy account against `power` per symbol over a fixed horizon.
#[derive(Clone, Debug)]
pub struct PowerMeter {
    power: f64,
    horizon: usize,
    energy: f64,
    tolerance: f64,
    first_violation: Option<usize>,
}

impl PowerMeter {
    pub fn new(power: f64, horizon: usize) -> Self {
        Self {
            power,
            horizon,
            energy: 0.0,
            tolerance: 1e-6,
            first_violation: None,
        }
    }

    pub fn record(&mut self, index: usize, symbol: Complex64) {
        self.energy += symbol.norm_sqr();
        if self.first_violation.is_none() && self.energy > self.budget() * (1.0 + self.tolerance) {
            self.first_violation = Some(index);
        }
    }

    pub fn budget(&self) -> f64 {
        self.power * self.horizon as f64
    }

    pub fn remaining(&self) -> f64 {
        self.budget() - self.energy
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn first_violation(&self) -> Option<usize> {
        self.first_violation
    }
}

/// Output of [`run_relay`].
#[derive(Clone, Debug)]
pub struct RelayRun {
    /// Relay symbols in local relay time.
    pub symbols: Vec<Complex64>,
    pub energy: f64,
    /// Local index at which the cumulative energy first exceeded the budget.
    pub violation: Option<usize>,
}

/// Drives `policy` for `len` local symbols. The relay starts `offset`
/// samples after the common reference, so local symbol `j` sees the
/// observation prefix `y_relay[..j + offset]`.
pub fn run_relay<P: RelayPolicy + ?Sized>(
    policy: &mut P,
    y_relay: &[Complex64],
    offset: usize,
    len: usize,
    power: f64,
) -> RelayRun {
    let mut meter = PowerMeter::new(power, len);
    let symbols: Vec<Complex64> = (0..len)
        .map(|j| {
            let end = (j + offset).min(y_relay.len());
            let x = relay_causal_encode(policy, j, &y_relay[..end]);
            meter.record(j, x);
            x
        })
        .collect();
    RelayRun {
        symbols,
        energy: meter.energy(),
        violation: meter.first_violation(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn silent_relay_outputs_zero() {
        let y = vec![c(1.0); 10];
        let run = run_relay(&mut SilentRelay, &y, 0, 10, 1.0);
        assert!(run.symbols.iter().all(|x| *x == c(0.0)));
        assert_eq!(run.violation, None);
    }

    #[test]
    fn amplify_forward_recomputation() {
        let y: Vec<_> = (0..6).map(|i| c(i as f64 * 0.1)).collect();
        let beta = Complex64::new(0.5, 0.5);
        let run = run_relay(&mut AmplifyForward { gain: beta }, &y, 0, 6, 1.0);
        assert_eq!(run.symbols[0], c(0.0));
        for j in 1..6 {
            assert_eq!(run.symbols[j], beta * y[j - 1]);
        }
        let energy: f64 = run.symbols.iter().map(|x| x.norm_sqr()).sum();
        assert!((run.energy - energy).abs() < 1e-15);
        assert_eq!(run.violation, None);
    }

    #[test]
    fn amplify_forward_power_violation_is_flagged() {
        let y = vec![c(10.0); 8];
        let run = run_relay(&mut AmplifyForward { gain: c(1.0) }, &y, 0, 8, 1.0);
        // 100 per symbol against a total budget of 8
        assert_eq!(run.violation, Some(1));
    }

    #[test]
    fn prefix_respects_offset() {
        struct Probe(Vec<usize>);
        impl RelayPolicy for Probe {
            fn next_symbol(&mut self, _j: usize, prefix: &[Complex64]) -> Complex64 {
                self.0.push(prefix.len());
                c(0.0)
            }
        }
        let y = vec![c(1.0); 5];
        let mut probe = Probe(vec![]);
        run_relay(&mut probe, &y, 2, 5, 0.0);
        assert_eq!(probe.0, vec![2, 3, 4, 5, 5]);
    }
}
