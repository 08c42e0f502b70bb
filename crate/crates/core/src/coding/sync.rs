//! Reference pipeline for the synchronous channel: no guard intervals, no
//! shift search and no causal relay runner.

use std::time::Instant;

use num_complex::Complex64;

use super::schedule::{block_markov_encode, tuple_index, tuple_of, MarcCodebooks};
use super::sim::{aggregate, draw_trial, finish_trial, trial_seed, MonteCarloReport, SimConfig, SimSetup, TrialReport};
use crate::error::{Error, Result};
use crate::model::{transmit, ChannelParams, DelayProfile};

/// Minimum-distance choice of a message tuple for one synchronous block.
/// `word(l, w)` gives encoder `l`'s candidate word for message `w`.
fn sync_ml<'a>(
    y: &[Complex64],
    codebooks: &'a MarcCodebooks,
    gains: &[Complex64],
    relay_gain: Option<Complex64>,
    word: impl Fn(usize, usize) -> &'a [Complex64],
) -> Vec<usize> {
    let counts = codebooks.counts();
    let mut best = f64::INFINITY;
    let mut best_h = 0;
    let mut sig = vec![Complex64::new(0.0, 0.0); y.len()];
    for h in 0..codebooks.tuples() {
        let w = tuple_of(h, counts);
        sig.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (l, &g) in gains.iter().enumerate() {
            for (s, x) in sig.iter_mut().zip(word(l + 1, w[l])) {
                *s += g * x;
            }
        }
        if let Some(g) = relay_gain {
            for (s, x) in sig.iter_mut().zip(codebooks.relay_word(h)) {
                *s += g * x;
            }
        }
        let r: f64 = y.iter().zip(&sig).map(|(a, b)| (a - b).norm_sqr()).sum();
        if r < best {
            best = r;
            best_h = h;
        }
    }
    tuple_of(best_h, counts)
}

fn run_trial_synchronous(setup: &SimSetup, profile: usize, delays: &DelayProfile, trial: usize) -> Result<TrialReport> {
    let started = Instant::now();
    let c = &setup.config;
    let p: &ChannelParams = &c.channel;
    let k = p.k();
    let n = c.n;
    let cb = &setup.codebooks;
    let input = draw_trial(setup, trial_seed(c.seed, profile, trial))?;
    let mut x = block_markov_encode(&setup.schedule, cb, &input.messages)?;
    x.word_mut(k + 1).iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    let y_relay = transmit(p, delays, &x, input.noise)?.y_relay;

    let relay_gains: Vec<Complex64> = (1..=k).map(|l| p.gain_relay(l)).collect();
    let mut relay_est: Vec<Vec<usize>> = Vec::with_capacity(c.blocks);
    let mut prev = vec![0; k];
    for b in 1..=c.blocks {
        let y = &y_relay[(b - 1) * n..b * n];
        let known = prev.clone();
        let est = sync_ml(y, cb, &relay_gains, None, |l, w| cb.encoder_word(l, known[l - 1], w));
        // relay word for block b + 1
        x.word_mut(k + 1)[b * n..(b + 1) * n].copy_from_slice(cb.relay_word(tuple_index(&est, cb.counts())));
        prev = est.clone();
        relay_est.push(est);
    }
    x.word_mut(k + 1)[..n].copy_from_slice(cb.relay_word(0));
    let y_dest = transmit(p, delays, &x, input.noise)?.y_dest;

    let dest_gains: Vec<Complex64> = (1..=k).map(|l| p.gain_dest(l)).collect();
    let relay_gain = Some(p.gain_dest(k + 1));
    let mut dest_est = vec![vec![0; c.blocks]; k];
    let mut next = vec![0; k];
    for b in (2..=c.blocks + 1).rev() {
        let y = &y_dest[(b - 1) * n..b * n];
        let known = next.clone();
        let est = sync_ml(y, cb, &dest_gains, relay_gain, |l, w| {
            cb.encoder_word(l, w, known[l - 1])
        });
        for l in 0..k {
            dest_est[l][b - 2] = est[l];
        }
        next = est;
    }
    let (relay_errors, dest_errors, sw_errors) = finish_trial(setup, &input, &relay_est, &dest_est)?;
    Ok(TrialReport {
        profile,
        trial,
        delays: delays.clone(),
        relay_errors,
        dest_errors,
        sw_errors,
        elapsed: started.elapsed(),
    })
}

/// Same trials as [`super::monte_carlo_error`] on a synchronous channel
/// (`d_max = 0`), decoded by direct residual minimization.
pub fn monte_carlo_synchronous(config: &SimConfig) -> Result<MonteCarloReport> {
    if config.d_max != 0 {
        return Err(Error::config("d_max", "the synchronous pipeline needs d_max = 0"));
    }
    let setup = SimSetup::new(config)?;
    let jobs: Vec<usize> = (0..config.trials).collect();
    use rayon::prelude::*;
    let reports = jobs
        .par_iter()
        .map(|&t| run_trial_synchronous(&setup, 0, &setup.grid[0], t))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(
        &setup.grid,
        config.blocks,
        reports,
        setup.counts().to_vec(),
        setup.channel_rates(),
    ))
}
