//! Seeded Monte Carlo experiments.
//!
//! Every trial owns its random streams, derived purely from
//! `(master_seed, stream family, SNR, trial index)` and then split by purpose
//! and relay. Sweeps over Doppler, relay position and relay count reuse the
//! same streams at each point (common random numbers), so differences along
//! those axes are not masked by independent channel draws. Trials run in
//! parallel and are merged in index order, so results do not depend on the
//! worker count.

mod config;
mod stats;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{evolve_channel, generate_channel, path_gain, quantize_to_taps, LinkState};
use crate::detectors::{
    effective_channel, lms_step, ml_detect, mmse_floor, mmse_weights, mrc_weights, rls_step, Detector,
    EffectiveChannel, FdeWeights, RlsState,
};
use crate::dft::Dft;
use crate::error::Result;
use crate::relay::{relay_forward, relay_receive};
use crate::txrx::{append_cp, demodulate_symbols, modulate};

pub use config::SimConfig;
pub use stats::{paired_standard_error, q_function, standard_error, wilson_half_width, WILSON_Z};

/// Stream family shared by all BER-type experiments.
pub const STREAM_LINK: u64 = 1;
/// Stream family of the convergence experiment.
pub const STREAM_CONVERGENCE: u64 = 2;
/// Stream family of channel dumps.
pub const STREAM_CHANNEL_DUMP: u64 = 3;

const PURPOSE_BITS: u64 = 0;
const PURPOSE_CHANNEL_SR: u64 = 1;
const PURPOSE_CHANNEL_RD: u64 = 2;
const PURPOSE_DOPPLER_SR: u64 = 3;
const PURPOSE_DOPPLER_RD: u64 = 4;
const PURPOSE_NOISE_RELAY: u64 = 5;
const PURPOSE_NOISE_DEST: u64 = 6;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a key path into a seed; a pure function of its inputs.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// Seed of one trial of a BER-type experiment at one SNR.
pub fn trial_seed(master: u64, family: u64, ebn0_db: f64, trial: usize) -> u64 {
    derive_seed(master, &[family, ebn0_db.to_bits(), trial as u64])
}

fn stream(trial_seed: u64, purpose: u64, relay: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, &[purpose, relay as u64]))
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Data bits sent (same for every detector).
    pub bits: u64,
    /// Bit errors per detector, aligned with `SimConfig::detectors`.
    pub errors: Vec<u64>,
    /// Bin-averaged squared a-priori error per pilot frame.
    pub lms_trace: Vec<f64>,
    pub rls_trace: Vec<f64>,
    /// Closed-form MMSE averaged over bins and pilot frames.
    pub mmse_floor: f64,
}

struct Hop {
    taps: Vec<Complex64>,
    stationary_power: Vec<f64>,
    amplitude: f64,
    doppler: ChaCha8Rng,
}

impl Hop {
    fn draw(cfg: &SimConfig, seed: u64, channel: u64, doppler: u64, relay: usize, gain: f64) -> Result<Self> {
        let mut rng = stream(seed, channel, relay);
        let realization = generate_channel(&cfg.sv, &mut rng)?;
        let taps = quantize_to_taps(&realization, cfg.sv.sample_period, cfg.max_taps)?;
        Ok(Self {
            stationary_power: taps.iter().map(|t| t.norm_sqr()).collect(),
            taps,
            amplitude: gain.sqrt(),
            doppler: stream(seed, doppler, relay),
        })
    }

    fn evolve(&mut self, fd_norm: f64) {
        self.taps = evolve_channel(&self.taps, &self.stationary_power, fd_norm, &mut self.doppler);
    }

    fn scaled(&self) -> Vec<Complex64> {
        self.taps.iter().map(|t| t * self.amplitude).collect()
    }
}

struct RelayPath {
    sr: Hop,
    rd: Hop,
    relay_noise: ChaCha8Rng,
    dest_noise: ChaCha8Rng,
}

/// One received block at the destination.
#[derive(Debug, Clone)]
pub struct Frame {
    pub bits: Vec<bool>,
    /// Transmitted time-domain symbols.
    pub symbols: Vec<Complex64>,
    /// Received block after CP removal and FFT.
    pub received: Vec<Complex64>,
    /// Cascade seen by this block.
    pub channel: EffectiveChannel,
}

/// Source, relays and destination of one trial, producing one block per
/// call with the channels evolving in between.
pub struct Link {
    cfg: SimConfig,
    relays: Vec<RelayPath>,
    bit_rng: ChaCha8Rng,
    gain_sr: f64,
    sigma2_relay: f64,
    sigma2_dest: f64,
    started: bool,
}

impl Link {
    /// Draws fresh channels for every relay from the trial's streams.
    pub fn new(cfg: &SimConfig, ebn0_db: f64, seed: u64) -> Result<Self> {
        let sigma2_dest = cfg.noise_variance(ebn0_db);
        let (gain_sr, gain_rd) = path_gain(cfg.delta, cfg.eta)?;
        let relays = (0..cfg.num_relays)
            .map(|u| {
                Ok(RelayPath {
                    sr: Hop::draw(cfg, seed, PURPOSE_CHANNEL_SR, PURPOSE_DOPPLER_SR, u, gain_sr)?,
                    rd: Hop::draw(cfg, seed, PURPOSE_CHANNEL_RD, PURPOSE_DOPPLER_RD, u, gain_rd)?,
                    relay_noise: stream(seed, PURPOSE_NOISE_RELAY, u),
                    dest_noise: stream(seed, PURPOSE_NOISE_DEST, u),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg: cfg.clone(),
            relays,
            bit_rng: stream(seed, PURPOSE_BITS, 0),
            gain_sr,
            sigma2_relay: sigma2_dest * cfg.relay_noise_scale,
            sigma2_dest,
            started: false,
        })
    }

    /// Sends one block of fresh random bits through every relay.
    pub fn next_frame(&mut self, dft: &Dft) -> Result<Frame> {
        let cfg = &self.cfg;
        if self.started {
            for path in &mut self.relays {
                path.sr.evolve(cfg.fd_norm);
                path.rd.evolve(cfg.fd_norm);
            }
        }
        self.started = true;
        let links = self
            .relays
            .iter()
            .map(|p| LinkState::new(p.sr.scaled(), p.rd.scaled(), self.gain_sr, self.sigma2_relay, self.sigma2_dest))
            .collect::<Result<Vec<_>>>()?;

        let bits: Vec<bool> = (0..cfg.bits_per_frame()).map(|_| self.bit_rng.random()).collect();
        let x = modulate(&bits, cfg.scheme)?;
        let tx = append_cp(&x, cfg.cp_len)?;

        let mut r = vec![Complex64::new(0.0, 0.0); cfg.block_len];
        for (path, link) in self.relays.iter_mut().zip(&links) {
            let y = relay_receive(&tx, &link.h_sr, link.sigma2_relay, &mut path.relay_noise)?;
            let fwd = relay_forward(&y, link.zeta, cfg.cp_len)?;
            let ru = relay_receive(&fwd, &link.h_rd, link.sigma2_dest, &mut path.dest_noise)?;
            for (acc, v) in r.iter_mut().zip(ru.samples()) {
                *acc += v;
            }
        }
        dft.forward_in_place(&mut r)?;
        Ok(Frame { bits, symbols: x.into_samples(), received: r, channel: effective_channel(&links, dft)? })
    }
}

/// Runs one trial: fresh channels for every relay, `pilot_frames` training
/// blocks followed by `data_frames` data blocks, channels evolving from
/// block to block at `fd_norm`.
///
/// MRC, MMSE and ML use the exact cascade of the current block; LMS and RLS
/// learn from the pilots and are frozen over the data blocks. Pilots are
/// sent whatever the detector set, so every detector sees the same data
/// blocks.
pub fn run_trial(cfg: &SimConfig, ebn0_db: f64, seed: u64, dft: &Dft) -> Result<TrialOutcome> {
    let n = cfg.block_len;
    let mut link = Link::new(cfg, ebn0_db, seed)?;

    let mut lms = FdeWeights::zeros(n);
    let mut rls = RlsState::new(n, cfg.lambda_rls);
    let mut lms_trace = Vec::with_capacity(cfg.pilot_frames);
    let mut rls_trace = Vec::with_capacity(cfg.pilot_frames);
    let mut floor_acc = 0.0;
    let mean_sq = |e: Vec<Complex64>| e.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;

    for _ in 0..cfg.pilot_frames {
        let f = link.next_frame(dft)?;
        let s = dft.forward(&f.symbols)?;
        floor_acc += mmse_floor(&f.channel);
        lms_trace.push(mean_sq(lms_step(&mut lms, &f.received, &s, cfg.mu)));
        rls_trace.push(mean_sq(rls_step(&mut rls, &f.received, &s)));
    }

    let mut errors = vec![0u64; cfg.detectors.len()];
    let mut bits_sent = 0u64;
    for _ in 0..cfg.data_frames {
        let f = link.next_frame(dft)?;
        bits_sent += f.bits.len() as u64;
        for (slot, det) in cfg.detectors.iter().enumerate() {
            let decided = match det {
                Detector::Ml => ml_detect(&f.received, &f.channel, cfg.scheme, dft)?.into_samples(),
                linear => {
                    let w = match linear {
                        Detector::Mrc => mrc_weights(&f.channel),
                        Detector::Mmse => mmse_weights(&f.channel),
                        Detector::Lms => lms.clone(),
                        Detector::Rls => rls.w.clone(),
                        Detector::Ml => unreachable!(),
                    };
                    let mut est = w.apply(&f.received);
                    dft.inverse_in_place(&mut est)?;
                    est
                }
            };
            let decided_bits = demodulate_symbols(&decided, cfg.scheme);
            errors[slot] += decided_bits.iter().zip(&f.bits).filter(|(a, b)| a != b).count() as u64;
        }
    }

    Ok(TrialOutcome {
        bits: bits_sent,
        errors,
        lms_trace,
        rls_trace,
        mmse_floor: floor_acc / cfg.pilot_frames.max(1) as f64,
    })
}

/// One row of a BER-type experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub experiment: String,
    pub detector: Detector,
    pub snr_db: f64,
    pub fd_norm: f64,
    pub delta: f64,
    pub relays: usize,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci_half_width: f64,
    pub seed: u64,
    /// Error count of each trial, in trial order.
    pub trial_errors: Vec<u64>,
    /// Bits per trial.
    pub trial_bits: u64,
}

impl BerRecord {
    /// Per-trial error rates, the i.i.d. samples behind `ber`.
    pub fn trial_rates(&self) -> Vec<f64> {
        let bits = self.trial_bits.max(1) as f64;
        self.trial_errors.iter().map(|&e| e as f64 / bits).collect()
    }

    /// Monte Carlo standard error of `ber` from trial-to-trial spread.
    pub fn std_error(&self) -> f64 {
        standard_error(&self.trial_rates())
    }
}

/// Collection of BER rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub records: Vec<BerRecord>,
}

impl ExperimentResult {
    pub fn find(&self, detector: Detector, snr_db: f64) -> impl Iterator<Item = &BerRecord> {
        self.records.iter().filter(move |r| r.detector == detector && r.snr_db == snr_db)
    }

    pub fn get(&self, detector: Detector, snr_db: f64) -> Option<&BerRecord> {
        self.find(detector, snr_db).next()
    }
}

fn run_trials(cfg: &SimConfig, family: u64, ebn0_db: f64) -> Result<Vec<TrialOutcome>> {
    (0..cfg.trials)
        .into_par_iter()
        .map_init(
            || Dft::new(cfg.block_len),
            |dft, t| run_trial(cfg, ebn0_db, trial_seed(cfg.master_seed, family, ebn0_db, t), dft),
        )
        .collect()
}

fn sweep(cfg: &SimConfig, experiment: &str) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut records = Vec::new();
    for &snr in &cfg.snr_db {
        let outcomes = run_trials(cfg, STREAM_LINK, snr)?;
        let trial_bits = outcomes.first().map_or(0, |o| o.bits);
        for (slot, &detector) in cfg.detectors.iter().enumerate() {
            let trial_errors: Vec<u64> = outcomes.iter().map(|o| o.errors[slot]).collect();
            let errors: u64 = trial_errors.iter().sum();
            let bits = trial_bits * outcomes.len() as u64;
            records.push(BerRecord {
                experiment: experiment.to_string(),
                detector,
                snr_db: snr,
                fd_norm: cfg.fd_norm,
                delta: cfg.delta,
                relays: cfg.num_relays,
                bits,
                errors,
                ber: if bits > 0 { errors as f64 / bits as f64 } else { f64::NAN },
                ci_half_width: wilson_half_width(errors, bits, WILSON_Z),
                seed: cfg.master_seed,
                trial_errors,
                trial_bits,
            });
        }
    }
    Ok(ExperimentResult { records })
}

/// BER versus SNR for every configured detector.
pub fn run_ber_sweep(cfg: &SimConfig) -> Result<ExperimentResult> {
    sweep(cfg, "ber")
}

/// BER sweeps repeated at each normalized Doppler in `fd_grid`.
pub fn run_doppler_sweep(cfg: &SimConfig, fd_grid: &[f64]) -> Result<ExperimentResult> {
    let mut out = ExperimentResult::default();
    for &fd in fd_grid {
        let point = SimConfig { fd_norm: fd, ..cfg.clone() };
        out.records.extend(sweep(&point, "doppler")?.records);
    }
    Ok(out)
}

/// BER sweeps repeated at each relay position in `delta_grid`.
pub fn run_placement_sweep(cfg: &SimConfig, delta_grid: &[f64]) -> Result<ExperimentResult> {
    let mut out = ExperimentResult::default();
    for &delta in delta_grid {
        let point = SimConfig { delta, ..cfg.clone() };
        out.records.extend(sweep(&point, "placement")?.records);
    }
    Ok(out)
}

/// RLS BER for every `(U, f_d)` pair; `fd_grid` empty means the configured
/// Doppler only.
pub fn run_multirelay(cfg: &SimConfig, relay_grid: &[usize], fd_grid: &[f64]) -> Result<ExperimentResult> {
    let fds = if fd_grid.is_empty() { vec![cfg.fd_norm] } else { fd_grid.to_vec() };
    let mut out = ExperimentResult::default();
    for &fd in &fds {
        for &relays in relay_grid {
            let point = SimConfig { num_relays: relays, fd_norm: fd, detectors: vec![Detector::Rls], ..cfg.clone() };
            out.records.extend(sweep(&point, "multirelay")?.records);
        }
    }
    Ok(out)
}

/// Ensemble-averaged learning curves.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    pub ebn0_db: f64,
    pub lms: Vec<f64>,
    pub rls: Vec<f64>,
    /// Closed-form MMSE for the same channels.
    pub mmse_floor: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Learning curves of LMS and RLS over `pilot_frames` iterations at one SNR.
pub fn run_convergence(cfg: &SimConfig, ebn0_db: f64) -> Result<ConvergenceResult> {
    let cfg = SimConfig { detectors: vec![Detector::Lms, Detector::Rls], data_frames: 0, ..cfg.clone() };
    cfg.validate()?;
    if !ebn0_db.is_finite() {
        return Err(crate::Error::InvalidParameter("SNR must be finite".into()));
    }
    let outcomes = run_trials(&cfg, STREAM_CONVERGENCE, ebn0_db)?;
    let len = cfg.pilot_frames;
    let mut lms = vec![0.0; len];
    let mut rls = vec![0.0; len];
    let mut floor = 0.0;
    for o in &outcomes {
        for i in 0..len {
            lms[i] += o.lms_trace[i];
            rls[i] += o.rls_trace[i];
        }
        floor += o.mmse_floor;
    }
    let t = outcomes.len() as f64;
    lms.iter_mut().chain(rls.iter_mut()).for_each(|v| *v /= t);
    Ok(ConvergenceResult { ebn0_db, lms, rls, mmse_floor: floor / t, trials: outcomes.len(), seed: cfg.master_seed })
}

/// Independent tap realizations of one hop, as used by the link simulation.
pub fn dump_channels(cfg: &SimConfig, realizations: usize) -> Result<Vec<Vec<Complex64>>> {
    cfg.sv.validate()?;
    (0..realizations)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, &[STREAM_CHANNEL_DUMP, i as u64]));
            let realization = generate_channel(&cfg.sv, &mut rng)?;
            quantize_to_taps(&realization, cfg.sv.sample_period, cfg.max_taps)
        })
        .collect()
}
