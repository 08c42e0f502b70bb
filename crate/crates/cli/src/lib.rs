//! Subcommand implementations behind the `tamarc` binary.
//!
//! Every subcommand reads one TOML file, writes its outputs plus a
//! `manifest.json` into the output directory and returns the manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tamarc::bounds::{
    alpha_default, asymptotic_rhs, char_fn_magnitude, converse_rhs, mi_gap_certificate, CertificateConfig,
};
use tamarc::coding::monte_carlo_error;
use tamarc::config::{parse_toml, read_text, BoundsConfigFile, IcConfigFile, RegionConfigFile, SimConfigFile};
use tamarc::model::ChannelParamsFile;
use tamarc::regions::{achievable_region_in, feasible, gain_conditions_hold, ic_region, outer_region_in, RateRegion};
use tamarc::units::fmt_sig;
use tamarc::{Error, LogBase, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Region,
    Bounds,
    Simulate,
    Ic,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Region => "region",
            Subcommand::Bounds => "bounds",
            Subcommand::Simulate => "simulate",
            Subcommand::Ic => "ic",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub config: PathBuf,
    /// Overrides the seed in the config file.
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub tool_version: &'static str,
    pub config_path: String,
    pub seed: u64,
    pub log_base: &'static str,
    pub config: serde_json::Value,
    /// Output file names relative to the output directory, manifest excluded.
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

struct Outputs {
    dir: PathBuf,
    names: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            names: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_error(&path, e))?;
        self.names.push(name.to_string());
        Ok(())
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn base_name(b: LogBase) -> &'static str {
    match b {
        LogBase::Bits => "bits",
        LogBase::Nats => "nats",
    }
}

fn snapshot<T: Serialize>(value: &T) -> Result<serde_json::Value> {
    serde_json::to_value(value).map_err(|e| Error::Internal(format!("config snapshot: {e}")))
}

/// Runs a subcommand, on a dedicated thread pool when `threads` is set.
pub fn run(cmd: Subcommand, opts: &RunOptions) -> Result<RunManifest> {
    match opts.threads {
        None => run_inner(cmd, opts),
        Some(0) => Err(Error::config("threads", "must be at least 1")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(|| run_inner(cmd, opts)),
    }
}

fn run_inner(cmd: Subcommand, opts: &RunOptions) -> Result<RunManifest> {
    let text = read_text(&opts.config).map_err(|e| Error::config("--config", e.to_string()))?;
    let base_dir = opts.config.parent().unwrap_or(Path::new("")).to_path_buf();
    let mut out = Outputs::new(&opts.out)?;
    let mut manifest = match cmd {
        Subcommand::Region => cmd_region(&text, &base_dir, opts, &mut out)?,
        Subcommand::Bounds => cmd_bounds(&text, &base_dir, opts, &mut out)?,
        Subcommand::Simulate => cmd_simulate(&text, &base_dir, opts, &mut out)?,
        Subcommand::Ic => cmd_ic(&text, opts, &mut out)?,
    };
    manifest.outputs = out.names.clone();
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Internal(e.to_string()))?;
    json.push('\n');
    out.write(MANIFEST, json.as_bytes())?;
    Ok(manifest)
}

fn manifest(cmd: Subcommand, opts: &RunOptions, seed: u64, base: LogBase, config: serde_json::Value) -> RunManifest {
    RunManifest {
        subcommand: cmd.name(),
        tool_version: env!("CARGO_PKG_VERSION"),
        config_path: opts.config.display().to_string(),
        seed,
        log_base: base_name(base),
        config,
        outputs: Vec::new(),
        warnings: Vec::new(),
    }
}

/// Export lines, skipping constraints that involve no source (their left side is identically zero).
fn export_nonvacuous(region: &RateRegion) -> String {
    let relay_only = tamarc::Subset::singleton(region.k + 1);
    let mut trimmed = region.clone();
    trimmed.constraints.retain(|c| c.subset != relay_only);
    trimmed.export()
}

fn cmd_region(text: &str, base_dir: &Path, opts: &RunOptions, out: &mut Outputs) -> Result<RunManifest> {
    let file: RegionConfigFile = parse_toml(text)?;
    let cfg = file.resolve(base_dir)?;
    let base = cfg.source.log_base();
    let outer = outer_region_in(&cfg.channel, cfg.kappa, base)?;
    let achievable = achievable_region_in(&cfg.channel, cfg.kappa, base)?;
    let gains = gain_conditions_hold(&cfg.channel);
    let verdict = feasible(&cfg.source, &cfg.channel, cfg.kappa)?;
    let width = cfg.channel.terminals();

    let mut s = String::new();
    s.push_str("[outer]\n");
    s.push_str(&export_nonvacuous(&outer));
    s.push_str("[achievable]\n");
    s.push_str(&export_nonvacuous(&achievable));
    for note in &achievable.notes {
        s.push_str(&format!("note: {note}\n"));
    }
    let violating: Vec<String> = gains.violating.iter().map(|v| v.to_bitstring(width)).collect();
    s.push_str(&format!(
        "gain_conditions: hold={} violating=[{}]\n",
        gains.hold,
        violating.join(",")
    ));
    s.push_str(if gains.hold {
        "separation: optimal\n"
    } else {
        "separation: not established\n"
    });
    out.write("region.txt", s.as_bytes())?;
    out.write("verdict.txt", verdict.render(width).as_bytes())?;

    let mut snap = file.clone();
    snap.channel = Some(ChannelParamsFile::from(&cfg.channel));
    snap.channel_file = None;
    Ok(manifest(
        Subcommand::Region,
        opts,
        opts.seed.unwrap_or(0),
        base,
        snapshot(&snap)?,
    ))
}

fn cmd_bounds(text: &str, base_dir: &Path, opts: &RunOptions, out: &mut Outputs) -> Result<RunManifest> {
    let mut file: BoundsConfigFile = parse_toml(text)?;
    if let Some(seed) = opts.seed {
        file.seed = seed;
    }
    let cfg = file.resolve(base_dir)?;
    let mut cert_cfg = CertificateConfig::new(cfg.n_list.clone(), cfg.d_max_rule, cfg.trials, cfg.seed);
    cert_cfg.subset = cfg.subset;
    cert_cfg.base = cfg.base;
    let cert = mi_gap_certificate(&cfg.channel, &cert_cfg)?;

    let mut csv = Vec::new();
    cert.write_csv(&mut csv).map_err(|e| Error::Internal(e.to_string()))?;
    out.write("bounds.csv", &csv)?;

    let mut summary = String::from("n,d_max,max_gap,eps,max_ratio,all_pass\n");
    for s in &cert.summaries {
        summary.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.n,
            s.d_max,
            fmt_sig(s.max_gap, 12),
            fmt_sig(s.eps, 12),
            fmt_sig(s.max_ratio, 12),
            s.all_pass
        ));
    }
    out.write("bounds_summary.csv", summary.as_bytes())?;

    if let Some(t) = &cfg.charfn {
        if t.n < 2 {
            return Err(Error::config("charfn.n", "need n >= 2"));
        }
        let mut s = String::from("n,d_max,i,exact,bound\n");
        for i in 1..t.n {
            let m = char_fn_magnitude(i, t.n, t.d_max).map_err(|e| Error::config("charfn.d_max", e.to_string()))?;
            s.push_str(&format!(
                "{},{},{i},{},{}\n",
                t.n,
                t.d_max,
                fmt_sig(m.exact, 12),
                fmt_sig(m.bound, 12)
            ));
        }
        out.write("charfn.csv", s.as_bytes())?;
    }

    if let Some((n_list, rule)) = &cfg.converse {
        let s_set = cfg.subset.unwrap_or_else(|| cfg.channel.full_set());
        let limit = asymptotic_rhs(&cfg.channel, s_set, cfg.base);
        let width = cfg.channel.terminals();
        let mut s = String::from("n,d_max,alpha,S,converse_rhs,asymptotic_rhs,relative_gap\n");
        for &n in n_list {
            let d = rule.apply(n);
            let (alpha, rhs, gap) = match alpha_default(n, d, cfg.base) {
                Ok(a) => {
                    let rhs = converse_rhs(&cfg.channel, s_set, n, d, a, cfg.base)?;
                    (a.to_string(), fmt_sig(rhs, 12), fmt_sig((rhs - limit) / limit, 12))
                }
                Err(Error::RegimeNotReached(_)) => ("NA".into(), "NA".into(), "NA".into()),
                Err(e) => return Err(e),
            };
            s.push_str(&format!(
                "{n},{d},{alpha},{},{rhs},{},{gap}\n",
                s_set.to_bitstring(width),
                fmt_sig(limit, 12)
            ));
        }
        out.write("converse.csv", s.as_bytes())?;
    }

    let mut snap = file.clone();
    snap.channel = Some(ChannelParamsFile::from(&cfg.channel));
    snap.channel_file = None;
    let mut m = manifest(Subcommand::Bounds, opts, cfg.seed, cfg.base, snapshot(&snap)?);
    if !cert.all_pass() {
        m.warnings.push("some certificate rows exceed the gap bound".into());
    }
    if !cert.trend_nonincreasing() {
        m.warnings
            .push("max gap is not nonincreasing across the n sweep".into());
    }
    Ok(m)
}

fn cmd_simulate(text: &str, base_dir: &Path, opts: &RunOptions, out: &mut Outputs) -> Result<RunManifest> {
    let mut file: SimConfigFile = parse_toml(text)?;
    if let Some(seed) = opts.seed {
        file.seed = seed;
    }
    let cfg = file.resolve(base_dir)?;
    let report = monte_carlo_error(&cfg).map_err(|e| match e {
        Error::Budget(msg) if !msg.contains("lower") => {
            Error::Budget(format!("{msg}; lower n·R (m and source_rates) or d_max"))
        }
        e => e,
    })?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(|e| Error::Internal(e.to_string()))?;
    out.write("trials.csv", &csv)?;

    let mut snap = file.clone();
    // Keep the uncalibrated channel so the snapshot reproduces the run.
    if snap.channel.is_none() {
        snap.channel = Some(ChannelParamsFile::from(&resolve_raw_channel(&file, base_dir)?));
        snap.channel_file = None;
    }
    let mut m = manifest(Subcommand::Simulate, opts, cfg.seed, LogBase::Bits, snapshot(&snap)?);
    if let serde_json::Value::Object(map) = &mut m.config {
        map.insert(
            "effective_noise_power".into(),
            serde_json::json!(cfg.channel.noise_power()),
        );
        let counts: Vec<usize> = report.counts.clone();
        map.insert("message_counts".into(), serde_json::json!(counts));
    }
    Ok(m)
}

fn resolve_raw_channel(file: &SimConfigFile, base_dir: &Path) -> Result<tamarc::model::ChannelParams> {
    let mut raw = file.clone();
    raw.load = None;
    Ok(raw.resolve(base_dir)?.channel)
}

fn cmd_ic(text: &str, opts: &RunOptions, out: &mut Outputs) -> Result<RunManifest> {
    let file: IcConfigFile = parse_toml(text)?;
    let [g11, g12, g21, g22] = file.gains();
    let ic = ic_region(g11, g12, g21, g22, file.p1, file.p2, file.noise_power)?;
    let mut s = String::new();
    s.push_str(&format!("strong: {}\n", ic.strong));
    s.push_str(&ic.region.export());
    s.push_str(&format!(
        "sum_constraints: receiver1={} receiver2={}\n",
        fmt_sig(ic.sum_constraints[0], 12),
        fmt_sig(ic.sum_constraints[1], 12)
    ));
    let mut m = manifest(
        Subcommand::Ic,
        opts,
        opts.seed.unwrap_or(0),
        LogBase::Bits,
        snapshot(&file)?,
    );
    if !ic.strong {
        let w = "weak interference: strong-interference conditions fail, region shown is the MAC intersection only";
        s.push_str(&format!("warning: {w}\n"));
        m.warnings.push(w.into());
    }
    out.write("ic_region.txt", s.as_bytes())?;
    Ok(m)
}

/// Prints the manifest summary and warnings for the binary.
pub fn report<W: Write>(m: &RunManifest, mut w: W) -> std::io::Result<()> {
    for warning in &m.warnings {
        writeln!(w, "warning: {warning}")?;
    }
    writeln!(w, "{}: wrote {}", m.subcommand, m.outputs.join(", "))
}
