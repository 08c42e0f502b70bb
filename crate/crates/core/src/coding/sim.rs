use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::binning::{sw_decode, sw_encode, BinningCode, MAX_SW_CANDIDATES};
use super::decode::{destination_backward_decode, destination_stage, relay_stage};
use super::relay_df::DecodeForwardRelay;
use super::schedule::{block_markov_encode, BlockMarkovSchedule, MarcCodebooks};
use crate::error::{Error, Result};
use crate::model::{run_relay, transmit, ChannelParams, DelayProfile, Noise, SourceModel};
use crate::subset::Subset;
use crate::units::{derive_seed, fmt_sig, index_count};

const TAG_CODEBOOK: u64 = 0xC0DE;
const TAG_BINNING: u64 = 0xB1;
const TAG_GRID: u64 = 0x6D;

/// End-to-end simulation settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub channel: ChannelParams,
    pub source: SourceModel,
    /// Source symbols per block.
    pub m: usize,
    /// Bits per source symbol.
    pub source_rates: Vec<f64>,
    /// Bits per channel use; when given, must address the same number of
    /// messages as the source bins.
    pub channel_rates: Option<Vec<f64>>,
    pub n: usize,
    pub blocks: usize,
    pub d_max: usize,
    pub trials: usize,
    /// Uniform delay profiles added to the corner grid.
    pub delay_samples: usize,
    pub seed: u64,
    pub noise: bool,
}

/// Everything derived once per configuration.
#[derive(Clone, Debug)]
pub struct SimSetup {
    pub config: SimConfig,
    pub binning: BinningCode,
    pub codebooks: MarcCodebooks,
    pub schedule: BlockMarkovSchedule,
    pub grid: Vec<DelayProfile>,
}

impl SimSetup {
    pub fn new(config: &SimConfig) -> Result<Self> {
        let c = config;
        let k = c.channel.k();
        if c.source.k() != k {
            return Err(Error::config(
                "source",
                format!("source has {} components but K = {k}", c.source.k()),
            ));
        }
        if c.trials == 0 {
            return Err(Error::config("trials", "must be >= 1"));
        }
        if c.n == 0 {
            return Err(Error::config("n", "must be >= 1"));
        }
        if c.blocks == 0 {
            return Err(Error::config("blocks", "must be >= 1"));
        }
        let binning = BinningCode::new(
            c.source.alphabets(),
            c.m,
            &c.source_rates,
            derive_seed(&[c.seed, TAG_BINNING]),
        )?;
        let counts = binning.counts().to_vec();
        if let Some(rates) = &c.channel_rates {
            if rates.len() != k {
                return Err(Error::config("channel_rates", "need one rate per encoder"));
            }
            for (l, (&r, &m)) in rates.iter().zip(&counts).enumerate() {
                let msgs = index_count(c.n as f64 * r) as usize;
                if msgs != m {
                    return Err(Error::config(
                        "channel_rates",
                        format!(
                            "encoder {} addresses {msgs} messages but its source has {m} bins",
                            l + 1
                        ),
                    ));
                }
            }
        }
        let candidates = c
            .source
            .alphabets()
            .iter()
            .zip(&counts)
            .try_fold(1usize, |acc, (&a, &m)| acc.checked_mul(a.pow(c.m as u32).div_ceil(m)))
            .filter(|&t| t <= MAX_SW_CANDIDATES);
        if candidates.is_none() {
            return Err(Error::budget(
                "Slepian-Wolf candidate list exceeds 2^24; raise source rates or lower m",
            ));
        }
        let codebooks = MarcCodebooks::generate(&c.channel, &counts, c.n, derive_seed(&[c.seed, TAG_CODEBOOK]))?;
        relay_stage(&c.channel, &codebooks, &vec![0; k], c.d_max).check_budget()?;
        destination_stage(&c.channel, &codebooks, &vec![0; k], c.d_max).check_budget()?;
        let schedule = BlockMarkovSchedule::new(k, c.blocks, c.n, c.d_max)?;
        let mut grid = DelayProfile::corners(k + 1, c.d_max);
        for i in 0..c.delay_samples {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[c.seed, TAG_GRID, i as u64]));
            grid.push(DelayProfile::sample(&mut rng, k + 1, c.d_max));
        }
        Ok(Self {
            config: c.clone(),
            binning,
            codebooks,
            schedule,
            grid,
        })
    }

    pub fn counts(&self) -> &[usize] {
        self.codebooks.counts()
    }

    /// Channel rates actually used, `log2(M_l) / n`.
    pub fn channel_rates(&self) -> Vec<f64> {
        message_rates(self.counts(), self.config.n)
    }
}

pub fn message_rates(counts: &[usize], n: usize) -> Vec<f64> {
    counts.iter().map(|&m| (m as f64).log2() / n as f64).collect()
}

/// Outcome of one end-to-end trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub profile: usize,
    pub trial: usize,
    pub delays: DelayProfile,
    /// Per block: relay estimate differs from the sent messages.
    pub relay_errors: Vec<bool>,
    /// Per block: destination estimate differs from the sent messages.
    pub dest_errors: Vec<bool>,
    /// Per block: reconstructed source block differs from the true one.
    pub sw_errors: Vec<bool>,
    pub elapsed: Duration,
}

impl TrialReport {
    pub fn overall(&self) -> bool {
        self.relay_errors
            .iter()
            .chain(&self.dest_errors)
            .chain(&self.sw_errors)
            .any(|&e| e)
    }
}

pub(crate) struct TrialInput {
    pub sources: Vec<Vec<Vec<usize>>>,
    /// `K × B`
    pub messages: Vec<Vec<usize>>,
    pub noise: Noise,
}

pub(crate) fn draw_trial(setup: &SimSetup, trial_seed: u64) -> Result<TrialInput> {
    let c = &setup.config;
    let k = c.channel.k();
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let mut sources = Vec::with_capacity(c.blocks);
    let mut messages = vec![Vec::with_capacity(c.blocks); k];
    for _ in 0..c.blocks {
        let block = c.source.sample_block(&mut rng, c.m);
        let bins = sw_encode(&block, &setup.binning)?;
        for (row, w) in messages.iter_mut().zip(bins) {
            row.push(w);
        }
        sources.push(block);
    }
    let noise = if c.noise {
        Noise::Seeded(derive_seed(&[trial_seed, 1]))
    } else {
        Noise::Off
    };
    Ok(TrialInput {
        sources,
        messages,
        noise,
    })
}

pub(crate) fn finish_trial(
    setup: &SimSetup,
    input: &TrialInput,
    relay_est: &[Vec<usize>],
    dest_est: &[Vec<usize>],
) -> Result<(Vec<bool>, Vec<bool>, Vec<bool>)> {
    let k = setup.config.channel.k();
    let blocks = setup.config.blocks;
    let column = |m: &[Vec<usize>], b: usize| -> Vec<usize> { (0..k).map(|l| m[l][b]).collect() };
    let mut relay = Vec::with_capacity(blocks);
    let mut dest = Vec::with_capacity(blocks);
    let mut sw = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let truth = column(&input.messages, b);
        relay.push(relay_est.get(b).is_none_or(|r| *r != truth));
        let bins = column(dest_est, b);
        dest.push(bins != truth);
        let rec = sw_decode(&bins, &setup.binning, &setup.config.source)?;
        sw.push(rec.as_ref() != Some(&input.sources[b]));
    }
    Ok((relay, dest, sw))
}

pub fn trial_seed(master: u64, profile: usize, trial: usize) -> u64 {
    derive_seed(&[master, profile as u64, trial as u64])
}

/// Source draw, binning, block Markov transmission with a causal
/// decode-and-forward relay, backward decoding and Slepian-Wolf decoding.
pub fn run_trial(setup: &SimSetup, profile: usize, delays: &DelayProfile, trial: usize) -> Result<TrialReport> {
    let started = Instant::now();
    let c = &setup.config;
    let k = c.channel.k();
    let input = draw_trial(setup, trial_seed(c.seed, profile, trial))?;
    let mut x = block_markov_encode(&setup.schedule, &setup.codebooks, &input.messages)?;
    // The relay observation does not involve the relay's own row.
    x.word_mut(k + 1).iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    let y_relay = transmit(&c.channel, delays, &x, input.noise)?.y_relay;
    let mut policy = DecodeForwardRelay::new(&c.channel, &setup.codebooks, setup.schedule);
    let run = run_relay(
        &mut policy,
        &y_relay,
        0,
        setup.schedule.total_len(),
        c.channel.power(k + 1),
    );
    if let Some(at) = run.violation {
        return Err(Error::Internal(format!(
            "relay exceeded its power budget at sample {at}"
        )));
    }
    let (relay_est, _) = policy.into_result()?;
    *x.word_mut(k + 1) = run.symbols;
    let y_dest = transmit(&c.channel, delays, &x, input.noise)?.y_dest;
    let dest = destination_backward_decode(&y_dest, &c.channel, &setup.codebooks, &setup.schedule)?;
    let (relay_errors, dest_errors, sw_errors) = finish_trial(setup, &input, &relay_est, &dest.messages)?;
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

/// Two-sided 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Error counts for one delay profile.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileStats {
    pub delays: DelayProfile,
    pub trials: usize,
    pub errors: usize,
    pub relay_block_errors: Vec<usize>,
    pub dest_block_errors: Vec<usize>,
    pub sw_block_errors: Vec<usize>,
}

impl ProfileStats {
    fn new(delays: DelayProfile, blocks: usize) -> Self {
        Self {
            delays,
            trials: 0,
            errors: 0,
            relay_block_errors: vec![0; blocks],
            dest_block_errors: vec![0; blocks],
            sw_block_errors: vec![0; blocks],
        }
    }

    fn add(&mut self, r: &TrialReport) {
        self.trials += 1;
        self.errors += r.overall() as usize;
        for (acc, &e) in self.relay_block_errors.iter_mut().zip(&r.relay_errors) {
            *acc += e as usize;
        }
        for (acc, &e) in self.dest_block_errors.iter_mut().zip(&r.dest_errors) {
            *acc += e as usize;
        }
        for (acc, &e) in self.sw_block_errors.iter_mut().zip(&r.sw_errors) {
            *acc += e as usize;
        }
    }

    pub fn error_rate(&self) -> f64 {
        self.errors as f64 / self.trials.max(1) as f64
    }

    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.trials)
    }
}

/// Per-profile error estimates and the worst profile.
#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloReport {
    pub profiles: Vec<ProfileStats>,
    /// Index of the profile with the largest error rate.
    pub headline: usize,
    pub counts: Vec<usize>,
    pub channel_rates: Vec<f64>,
}

impl MonteCarloReport {
    pub fn headline_stats(&self) -> &ProfileStats {
        &self.profiles[self.headline]
    }

    pub fn headline_rate(&self) -> f64 {
        self.headline_stats().error_rate()
    }

    pub const CSV_HEADER: &'static str =
        "row,profile,delays,trials,errors,p_e,ci_low,ci_high,relay_block_errors,dest_block_errors,sw_block_errors";

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        writeln!(out, "{}", Self::CSV_HEADER)?;
        let mut line = |kind: &str, i: usize, p: &ProfileStats| {
            let (lo, hi) = p.interval();
            writeln!(
                out,
                "{kind},{i},{},{},{},{},{},{},{},{},{}",
                p.delays.label(),
                p.trials,
                p.errors,
                fmt_sig(p.error_rate(), 12),
                fmt_sig(lo, 12),
                fmt_sig(hi, 12),
                join(&p.relay_block_errors),
                join(&p.dest_block_errors),
                join(&p.sw_block_errors)
            )
        };
        for (i, p) in self.profiles.iter().enumerate() {
            line("profile", i, p)?;
        }
        line("headline", self.headline, self.headline_stats())
    }
}

pub(crate) fn aggregate(
    grid: &[DelayProfile],
    blocks: usize,
    reports: Vec<TrialReport>,
    counts: Vec<usize>,
    channel_rates: Vec<f64>,
) -> MonteCarloReport {
    let mut profiles: Vec<ProfileStats> = grid.iter().map(|d| ProfileStats::new(d.clone(), blocks)).collect();
    for r in &reports {
        profiles[r.profile].add(r);
    }
    let mut headline = 0;
    for (i, p) in profiles.iter().enumerate() {
        if p.error_rate() > profiles[headline].error_rate() {
            headline = i;
        }
    }
    MonteCarloReport {
        profiles,
        headline,
        counts,
        channel_rates,
    }
}

/// Runs `trials` independent trials on every profile of the delay grid
/// (corners of `{0, d_max}^{K+1}` plus `delay_samples` uniform draws).
pub fn monte_carlo_error(config: &SimConfig) -> Result<MonteCarloReport> {
    let setup = SimSetup::new(config)?;
    monte_carlo_with(&setup, run_trial)
}

pub(crate) fn monte_carlo_with(
    setup: &SimSetup,
    runner: fn(&SimSetup, usize, &DelayProfile, usize) -> Result<TrialReport>,
) -> Result<MonteCarloReport> {
    let jobs: Vec<(usize, usize)> = (0..setup.grid.len())
        .flat_map(|p| (0..setup.config.trials).map(move |t| (p, t)))
        .collect();
    let reports = jobs
        .par_iter()
        .map(|&(p, t)| runner(setup, p, &setup.grid[p], t))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(
        &setup.grid,
        setup.config.blocks,
        reports,
        setup.counts().to_vec(),
        setup.channel_rates(),
    ))
}

/// Which channel constraints a load factor refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadTarget {
    /// Largest ratio over every destination and relay constraint.
    Every,
    /// Ratio on the full destination sum constraint.
    Sum,
}

/// `R_S / C_S` for the requested constraints, with `R_S = Σ_{l∈S∩[1,K]} R_l`.
pub fn channel_load(params: &ChannelParams, rates: &[f64], target: LoadTarget) -> f64 {
    let k = params.k();
    let n0 = params.noise_power();
    let rate = |s: Subset| s.indices().filter(|&l| l <= k).map(|l| rates[l - 1]).sum::<f64>();
    let cap = |p: f64| (1.0 + p / n0).log2();
    match target {
        LoadTarget::Sum => rate(params.full_set()) / cap(params.received_power_dest(params.full_set())),
        LoadTarget::Every => {
            let dest = Subset::with_relay(k).map(|s| (rate(s), cap(params.received_power_dest(s))));
            let relay = Subset::nonempty_encoders(k).map(|s| (rate(s), cap(params.received_power_relay(s))));
            dest.chain(relay)
                .filter(|&(r, _)| r > 0.0)
                .map(|(r, c)| r / c)
                .fold(0.0, f64::max)
        }
    }
}

/// Rescales the noise power so that [`channel_load`] equals `load`.
pub fn calibrate_noise(params: &ChannelParams, rates: &[f64], load: f64, target: LoadTarget) -> Result<ChannelParams> {
    if !(load.is_finite() && load > 0.0) {
        return Err(Error::config("load", "must be finite and > 0"));
    }
    if rates.len() != params.k() || rates.iter().all(|&r| r <= 0.0) {
        return Err(Error::config("load", "needs a positive rate for at least one encoder"));
    }
    let at = |ln_n: f64| -> Result<f64> { Ok(channel_load(&params.with_noise_power(ln_n.exp())?, rates, target)) };
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    if at(lo)? > load || at(hi)? < load {
        return Err(Error::config(
            "load",
            format!("load {load} not reachable by scaling the noise power"),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? < load {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    params.with_noise_power((0.5 * (lo + hi)).exp())
}
