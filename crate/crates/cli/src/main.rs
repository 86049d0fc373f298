//! `scfde`: runs the simulator experiments and writes CSV tables plus a
//! JSON run manifest next to each table.
//!
//! Exit status is 0 on success, 2 for invalid arguments or settings and 1
//! when a run fails.

mod args;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::Parser;
use serde_json::Value;

use args::{Cli, Command, Common, LinkArgs};
use manifest::{RunManifest, Sweep};
use scfde::detectors::Detector;
use scfde::harness::{
    dump_channels, run_ber_sweep, run_convergence, run_doppler_sweep, run_multirelay, run_placement_sweep, SimConfig,
};
use scfde::report;

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(msg.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_workers(cli.workers).and_then(|()| run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_workers(workers: Option<usize>) -> Result<(), Failure> {
    let Some(n) = workers else { return Ok(()) };
    if n == 0 {
        return Err(usage("--workers must be >= 1"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting worker pool")?;
    Ok(())
}

/// Merges a config file over `base`. A manifest contributes its `config`
/// and `sweep` sections.
fn load_config(common: &Common, base: SimConfig) -> Result<(SimConfig, Sweep), Failure> {
    let Some(path) = &common.config else {
        return Ok((base, Sweep::default()));
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    let (settings, sweep) = match value {
        Value::Object(mut map) if map.contains_key("config") => {
            let sweep = match map.remove("sweep") {
                Some(v) => serde_json::from_value(v).map_err(|e| usage(format!("bad sweep section: {e}")))?,
                None => Sweep::default(),
            };
            (map.remove("config").unwrap_or(Value::Null), sweep)
        }
        other => (other, Sweep::default()),
    };
    let Value::Object(settings) = settings else {
        return Err(usage("config must be a JSON object"));
    };
    let mut merged = serde_json::to_value(&base).context("serializing defaults")?;
    if let Value::Object(map) = &mut merged {
        map.extend(settings);
    }
    let cfg = serde_json::from_value(merged).map_err(|e| usage(format!("bad config: {e}")))?;
    Ok((cfg, sweep))
}

fn apply_common(cfg: &mut SimConfig, common: &Common) {
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
}

fn apply_link(cfg: &mut SimConfig, link: &LinkArgs) {
    if let Some(d) = &link.detectors {
        cfg.detectors = d.clone();
    }
    if let Some(taps) = link.taps {
        cfg.max_taps = taps;
        cfg.cp_len = taps.saturating_sub(1);
    }
    if let Some(n) = link.block_len {
        cfg.block_len = n;
    }
    if let Some(cp) = link.cp {
        cfg.cp_len = cp;
    }
    if let Some(s) = link.scheme {
        cfg.scheme = s;
    }
    if let Some(g) = &link.snr {
        cfg.snr_db = g.0.clone();
    }
    if let Some(t) = link.trials {
        cfg.trials = t;
    }
    if let Some(mu) = link.mu {
        cfg.mu = mu;
    }
    if let Some(l) = link.lambda {
        cfg.lambda_rls = l;
    }
    if let Some(p) = link.pilots {
        cfg.pilot_frames = p;
    }
    if let Some(d) = link.data_frames {
        cfg.data_frames = d;
    }
    if let Some(d) = link.delta {
        cfg.delta = d;
    }
    if let Some(e) = link.eta {
        cfg.eta = e;
    }
}

fn validate(cfg: &SimConfig) -> Result<(), Failure> {
    cfg.validate().map_err(usage)
}

fn out_path(common: &Common, command: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from("results").join(format!("{command}.csv")))
}

fn finish(command: &str, cfg: SimConfig, sweep: Sweep, out: &Path, rows: usize, start: Instant) -> Result<(), Failure> {
    let manifest = RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: cfg.master_seed,
        config: cfg,
        sweep,
        duration_secs: start.elapsed().as_secs_f64(),
        outputs: vec![out.to_path_buf()],
    };
    let path = manifest::manifest_path(out);
    manifest::write(&path, &manifest).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {rows} rows to {} ({:.1}s)", out.display(), manifest.duration_secs);
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    let start = Instant::now();
    match command {
        Command::Ber { common, link, fd } => {
            let (mut cfg, mut sweep) = load_config(&common, SimConfig::default())?;
            apply_common(&mut cfg, &common);
            apply_link(&mut cfg, &link);
            let fds = fd.or(sweep.fd_norm.take());
            if let Some([single]) = fds.as_deref() {
                cfg.fd_norm = *single;
            }
            validate(&cfg)?;
            for &f in fds.iter().flatten() {
                validate(&SimConfig { fd_norm: f, ..cfg.clone() })?;
            }
            let result = match &fds {
                Some(grid) if grid.len() > 1 => run_doppler_sweep(&cfg, grid),
                _ => run_ber_sweep(&cfg),
            }
            .context("running BER sweep")?;
            let out = out_path(&common, "ber");
            report::write_ber_csv(&out, &result.records).with_context(|| format!("writing {}", out.display()))?;
            sweep.fd_norm = fds;
            finish("ber", cfg, sweep, &out, result.records.len(), start)
        }
        Command::Converge { common, link, ebn0, fd } => {
            let base =
                SimConfig { trials: 1000, detectors: vec![Detector::Lms, Detector::Rls], ..SimConfig::default() };
            let (mut cfg, mut sweep) = load_config(&common, base)?;
            apply_common(&mut cfg, &common);
            apply_link(&mut cfg, &link);
            if let Some(f) = fd {
                cfg.fd_norm = f;
            }
            let ebn0 = ebn0.or(sweep.ebn0_db).unwrap_or(5.0);
            if !ebn0.is_finite() {
                return Err(usage("--ebn0 must be finite"));
            }
            validate(&cfg)?;
            let result = run_convergence(&cfg, ebn0).context("running convergence")?;
            let out = out_path(&common, "converge");
            report::write_convergence_csv(&out, &result).with_context(|| format!("writing {}", out.display()))?;
            sweep.ebn0_db = Some(ebn0);
            finish("converge", cfg, sweep, &out, 3 * result.lms.len(), start)
        }
        Command::Placement { common, link, deltas, fd } => {
            let base = SimConfig {
                detectors: vec![Detector::Lms, Detector::Rls],
                snr_db: vec![0.0, 10.0, 20.0, 30.0],
                ..SimConfig::default()
            };
            let (mut cfg, mut sweep) = load_config(&common, base)?;
            apply_common(&mut cfg, &common);
            apply_link(&mut cfg, &link);
            if let Some(f) = fd {
                cfg.fd_norm = f;
            }
            let grid = deltas
                .map(|g| g.0)
                .or(sweep.deltas.take())
                .unwrap_or_else(|| (1..=9).map(|i| i as f64 / 10.0).collect());
            validate(&cfg)?;
            for &d in &grid {
                validate(&SimConfig { delta: d, ..cfg.clone() })?;
            }
            let result = run_placement_sweep(&cfg, &grid).context("running placement sweep")?;
            let out = out_path(&common, "placement");
            report::write_ber_csv(&out, &result.records).with_context(|| format!("writing {}", out.display()))?;
            sweep.deltas = Some(grid);
            finish("placement", cfg, sweep, &out, result.records.len(), start)
        }
        Command::Multirelay { common, link, relays, fd } => {
            let (mut cfg, mut sweep) = load_config(&common, SimConfig::default())?;
            apply_common(&mut cfg, &common);
            apply_link(&mut cfg, &link);
            cfg.detectors = vec![Detector::Rls];
            let relays = relays.or(sweep.relays.take()).unwrap_or_else(|| vec![1, 2, 3]);
            let fds = fd.or(sweep.fd_norm.take()).unwrap_or_default();
            validate(&cfg)?;
            if relays.is_empty() {
                return Err(usage("--relays must not be empty"));
            }
            for &u in &relays {
                validate(&SimConfig { num_relays: u, ..cfg.clone() })?;
            }
            for &f in &fds {
                validate(&SimConfig { fd_norm: f, ..cfg.clone() })?;
            }
            let result = run_multirelay(&cfg, &relays, &fds).context("running multi-relay sweep")?;
            let out = out_path(&common, "multirelay");
            report::write_ber_csv(&out, &result.records).with_context(|| format!("writing {}", out.display()))?;
            sweep.relays = Some(relays);
            sweep.fd_norm = (!fds.is_empty()).then_some(fds);
            finish("multirelay", cfg, sweep, &out, result.records.len(), start)
        }
        Command::ChannelDump { common, taps, realizations } => {
            let (mut cfg, mut sweep) = load_config(&common, SimConfig::default())?;
            apply_common(&mut cfg, &common);
            if let Some(l) = taps {
                cfg.max_taps = l;
                cfg.cp_len = l.saturating_sub(1);
            }
            let count = realizations.or(sweep.realizations).unwrap_or(100);
            if cfg.max_taps == 0 {
                return Err(usage("--L must be >= 1"));
            }
            cfg.sv.validate().map_err(usage)?;
            let taps = dump_channels(&cfg, count).context("generating channels")?;
            let out = out_path(&common, "channel-dump");
            report::write_channel_csv(&out, &taps).with_context(|| format!("writing {}", out.display()))?;
            sweep.realizations = Some(count);
            finish("channel-dump", cfg, sweep, &out, count * taps.first().map_or(0, Vec::len), start)
        }
    }
}
