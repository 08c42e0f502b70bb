//! The delayed superposition channel and its sliced and sliced-cyclic variants.
//!
//! Noise is drawn from one deterministic stream per `(seed, terminal)` pair,
//! so the three channel variants evaluated with the same seed share their
//! noise realization sample for sample.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::{ChannelParams, CodewordBlock, DelayProfile};
use crate::subset::Subset;
use crate::units::derive_seed;

/// Noise source for a channel evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Noise {
    /// Noiseless evaluation.
    Off,
    Seeded(u64),
}

impl From<u64> for Noise {
    fn from(seed: u64) -> Self {
        Noise::Seeded(seed)
    }
}

/// Receiving terminal, used to separate noise streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Receiver {
    Destination = 0,
    Relay = 1,
}

/// `len` i.i.d. `CN(0, noise_power)` samples (variance `noise_power/2` per real dimension).
///
/// Shorter requests are prefixes of longer ones for the same `(seed, receiver)`.
pub fn noise_stream(seed: u64, receiver: Receiver, len: usize, noise_power: f64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, receiver as u64]));
    let normal = Normal::new(0.0, (noise_power / 2.0).sqrt()).expect("finite noise power");
    (0..len)
        .map(|_| {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect()
}

fn noise_for(noise: Noise, receiver: Receiver, len: usize, noise_power: f64) -> Vec<Complex64> {
    match noise {
        Noise::Off => vec![Complex64::new(0.0, 0.0); len],
        Noise::Seeded(seed) => noise_stream(seed, receiver, len, noise_power),
    }
}

/// Destination and relay observations.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelOutput {
    pub y_dest: Vec<Complex64>,
    pub y_relay: Vec<Complex64>,
}

fn check_dims(params: &ChannelParams, delays: &DelayProfile, block: &CodewordBlock) -> Result<()> {
    if block.terminals() != params.terminals() {
        return Err(Error::invalid(format!(
            "block has {} codewords, channel has {} terminals",
            block.terminals(),
            params.terminals()
        )));
    }
    if delays.len() != params.terminals() {
        return Err(Error::invalid(format!(
            "delay profile has {} offsets, channel has {} terminals",
            delays.len(),
            params.terminals()
        )));
    }
    Ok(())
}

/// Adds `gain · X[i - d]` into `out` for every `i` where the shifted index is inside the word.
fn accumulate_shifted(out: &mut [Complex64], word: &[Complex64], gain: Complex64, d: usize) {
    for (o, x) in out.iter_mut().skip(d).zip(word) {
        *o += gain * x;
    }
}

fn relay_observation(
    params: &ChannelParams,
    delays: &DelayProfile,
    block: &CodewordBlock,
    noise: Noise,
) -> Vec<Complex64> {
    let len = block.n() + delays.d_max();
    let mut y = noise_for(noise, Receiver::Relay, len, params.noise_power());
    for l in 1..=params.k() {
        accumulate_shifted(&mut y, block.word(l), params.gain_relay(l), delays.offset(l));
    }
    y
}

/// Full channel: every terminal reaches the destination, encoders reach the relay.
///
/// Both outputs have length `n + d_max`.
pub fn transmit(
    params: &ChannelParams,
    delays: &DelayProfile,
    block: &CodewordBlock,
    noise: impl Into<Noise>,
) -> Result<ChannelOutput> {
    transmit_sliced(params, delays, block, params.full_set(), noise)
}

/// Sliced channel: only terminals in `s` reach the destination; the relay
/// observation is that of the full channel.
pub fn transmit_sliced(
    params: &ChannelParams,
    delays: &DelayProfile,
    block: &CodewordBlock,
    s: Subset,
    noise: impl Into<Noise>,
) -> Result<ChannelOutput> {
    check_dims(params, delays, block)?;
    params.check_subset(s)?;
    let noise = noise.into();
    let len = block.n() + delays.d_max();
    let mut y_dest = noise_for(noise, Receiver::Destination, len, params.noise_power());
    for l in s.indices() {
        accumulate_shifted(&mut y_dest, block.word(l), params.gain_dest(l), delays.offset(l));
    }
    Ok(ChannelOutput {
        y_dest,
        y_relay: relay_observation(params, delays, block, noise),
    })
}

/// Sliced cyclic channel: destination sees length-`n` circularly shifted words.
pub fn transmit_cyclic(
    params: &ChannelParams,
    delays: &DelayProfile,
    block: &CodewordBlock,
    s: Subset,
    noise: impl Into<Noise>,
) -> Result<ChannelOutput> {
    check_dims(params, delays, block)?;
    params.check_subset(s)?;
    let n = block.n();
    if delays.d_max() > n {
        return Err(Error::invalid(format!(
            "d_max {} exceeds block length {n}",
            delays.d_max()
        )));
    }
    let noise = noise.into();
    let mut y_dest = noise_for(noise, Receiver::Destination, n, params.noise_power());
    for l in s.indices() {
        let g = params.gain_dest(l);
        let d = delays.offset(l) % n;
        let word = block.word(l);
        for (i, y) in y_dest.iter_mut().enumerate() {
            *y += g * word[(i + n - d) % n];
        }
    }
    Ok(ChannelOutput {
        y_dest,
        y_relay: relay_observation(params, delays, block, noise),
    })
}
