//! Modified Saleh–Valenzuela underwater channel.
//!
//! A realization is a doubly-Poisson set of eigenrays: clusters arrive with
//! exponential gaps of rate `cluster_rate`, rays inside a cluster with rate
//! `ray_rate`. Each ray has a Nakagami-m amplitude whose mean-square value
//! decays exponentially with cluster and ray delay, and a uniform phase. The
//! realization is reduced to a symbol-spaced tapped delay line by
//! nearest-bin rounding, and taps may then be evolved block by block with a
//! first-order Gauss–Markov recursion to emulate Doppler.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dft::Dft;
use crate::error::{Error, Result};
use crate::relay::af_gain;

/// Saleh–Valenzuela model constants.
///
/// Times are in an arbitrary but consistent unit (nanoseconds for the
/// defaults); rates are per that unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvParams {
    /// Cluster arrival rate Λ.
    pub cluster_rate: f64,
    /// Ray arrival rate λ within a cluster.
    pub ray_rate: f64,
    /// Cluster power decay time constant Γ.
    pub cluster_decay: f64,
    /// Ray power decay time constant γ.
    pub ray_decay: f64,
    /// Number of clusters (eigenpaths) α.
    pub num_clusters: usize,
    /// Rays per cluster β.
    pub rays_per_cluster: usize,
    /// Nakagami shape m.
    pub nakagami_m: f64,
    /// Nakagami spread Ω.
    pub omega: f64,
    /// Tap spacing T_s.
    pub sample_period: f64,
}

impl Default for SvParams {
    fn default() -> Self {
        Self {
            cluster_rate: 1.0 / 14.99,
            ray_rate: 1.0 / 0.476,
            cluster_decay: 0.024,
            ray_decay: 0.12,
            num_clusters: 3,
            rays_per_cluster: 5,
            nakagami_m: 1.3,
            omega: 1.0,
            sample_period: 0.1,
        }
    }
}

impl SvParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cluster_rate", self.cluster_rate),
            ("ray_rate", self.ray_rate),
            ("cluster_decay", self.cluster_decay),
            ("ray_decay", self.ray_decay),
            ("omega", self.omega),
            ("sample_period", self.sample_period),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.nakagami_m >= 0.5) || !self.nakagami_m.is_finite() {
            return Err(Error::InvalidParameter(format!("nakagami_m must be >= 0.5, got {}", self.nakagami_m)));
        }
        if self.num_clusters == 0 || self.rays_per_cluster == 0 {
            return Err(Error::InvalidParameter("num_clusters and rays_per_cluster must be >= 1".into()));
        }
        Ok(())
    }
}

/// One propagation path: complex gain and absolute delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenray {
    pub gain: Complex64,
    pub delay: f64,
}

/// A channel draw: its eigenrays and their symbol-spaced reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Rays grouped cluster by cluster, in arrival order within a cluster.
    pub eigenrays: Vec<Eigenray>,
    /// Unit-power taps spanning every ray (no truncation).
    pub taps: Vec<Complex64>,
}

impl ChannelRealization {
    /// Number of taps L.
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

/// Cumulative exponential arrivals starting at zero.
fn poisson_arrivals<R: Rng + ?Sized>(rate: f64, count: usize, rng: &mut R) -> Vec<f64> {
    let gap = Exp::new(rate).expect("arrival rate validated as positive");
    let mut t = 0.0;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        if i > 0 {
            t += gap.sample(rng);
        }
        out.push(t);
    }
    out
}

/// Cluster arrival times `T_a`, `a = 0..α`, with `T_0 = 0`.
pub fn sample_cluster_arrivals<R: Rng + ?Sized>(params: &SvParams, rng: &mut R) -> Vec<f64> {
    poisson_arrivals(params.cluster_rate, params.num_clusters, rng)
}

/// Ray arrival times relative to each cluster start, one list per cluster.
pub fn sample_ray_arrivals<R: Rng + ?Sized>(params: &SvParams, rng: &mut R) -> Vec<Vec<f64>> {
    (0..params.num_clusters).map(|_| poisson_arrivals(params.ray_rate, params.rays_per_cluster, rng)).collect()
}

/// Nakagami-m amplitude, drawn as the square root of a Gamma(m, Ω/m) power.
pub fn sample_nakagami<R: Rng + ?Sized>(m: f64, omega: f64, rng: &mut R) -> Result<f64> {
    if !(m >= 0.5) {
        return Err(Error::InvalidParameter(format!("nakagami m must be >= 0.5, got {m}")));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("nakagami omega must be > 0, got {omega}")));
    }
    let power = Gamma::new(m, omega / m).map_err(|e| Error::InvalidParameter(e.to_string()))?.sample(rng);
    Ok(power.sqrt())
}

/// Draws a unit-power channel realization.
pub fn generate_channel<R: Rng + ?Sized>(params: &SvParams, rng: &mut R) -> Result<ChannelRealization> {
    params.validate()?;
    let clusters = sample_cluster_arrivals(params, rng);
    let rays = sample_ray_arrivals(params, rng);

    let mut eigenrays = Vec::with_capacity(params.num_clusters * params.rays_per_cluster);
    for (cluster_start, offsets) in clusters.iter().zip(&rays) {
        for offset in offsets {
            let mean_power = (-cluster_start / params.cluster_decay).exp() * (-offset / params.ray_decay).exp();
            // Scaling a unit-Ω draw keeps the number of RNG draws independent of
            // the decay constants.
            let amplitude = sample_nakagami(params.nakagami_m, params.omega, rng)? * mean_power.sqrt();
            let phase = rng.random::<f64>() * 2.0 * PI;
            eigenrays.push(Eigenray { gain: Complex64::from_polar(amplitude, phase), delay: cluster_start + offset });
        }
    }

    let total: f64 = eigenrays.iter().map(|r| r.gain.norm_sqr()).sum();
    let scale = 1.0 / total.sqrt();
    for ray in &mut eigenrays {
        ray.gain *= scale;
    }

    let span = eigenrays.iter().map(|r| (r.delay / params.sample_period).round() as usize).max().unwrap_or(0) + 1;
    let mut realization = ChannelRealization { eigenrays, taps: Vec::new() };
    realization.taps = quantize_to_taps(&realization, params.sample_period, span)?;
    Ok(realization)
}

/// Bins eigenrays at spacing `sample_period` into exactly `max_taps` taps.
///
/// Rays sharing a bin add coherently; rays past the last bin are dropped and
/// the result is renormalized to unit power.
pub fn quantize_to_taps(
    realization: &ChannelRealization,
    sample_period: f64,
    max_taps: usize,
) -> Result<Vec<Complex64>> {
    if !(sample_period > 0.0) {
        return Err(Error::InvalidParameter(format!("sample period must be > 0, got {sample_period}")));
    }
    if max_taps == 0 {
        return Err(Error::NoTapsInRange { max_taps });
    }
    let mut taps = vec![Complex64::new(0.0, 0.0); max_taps];
    for ray in &realization.eigenrays {
        let bin = (ray.delay / sample_period).round();
        if bin >= 0.0 && (bin as usize) < max_taps {
            taps[bin as usize] += ray.gain;
        }
    }
    let power: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
    if !(power > 0.0) {
        return Err(Error::NoTapsInRange { max_taps });
    }
    let scale = 1.0 / power.sqrt();
    taps.iter_mut().for_each(|t| *t *= scale);
    Ok(taps)
}

/// Per-block correlation of the Gauss–Markov tap process.
pub fn doppler_correlation(fd_norm: f64) -> f64 {
    (-2.0 * PI * fd_norm).exp()
}

/// Advances taps one block: `q <- rho q + sqrt(1 - rho^2) w`, where `w` is
/// circular Gaussian with the tap's stationary power.
///
/// Innovations are drawn even when `fd_norm == 0` so that runs differing only
/// in Doppler consume identical random streams.
pub fn evolve_channel<R: Rng + ?Sized>(
    taps: &[Complex64],
    stationary_power: &[f64],
    fd_norm: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    debug_assert!((0.0..0.5).contains(&fd_norm));
    debug_assert_eq!(taps.len(), stationary_power.len());
    let rho = doppler_correlation(fd_norm);
    let innovation = (1.0 - rho * rho).max(0.0).sqrt();
    taps.iter()
        .zip(stationary_power)
        .map(|(&q, &p)| {
            let w = complex_gaussian(rng) * (p * 0.5).sqrt();
            q * rho + w * innovation
        })
        .collect()
}

/// Standard normal pair (unit variance per dimension).
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Column-circulant N×N matrix whose first column is `taps` zero-padded.
pub fn circulant_from_taps(taps: &[Complex64], block_len: usize) -> Result<DMatrix<Complex64>> {
    if taps.len() > block_len {
        return Err(Error::TapsExceedBlock { taps: taps.len(), block_len });
    }
    Ok(DMatrix::from_fn(block_len, block_len, |row, col| {
        let lag = (row + block_len - col) % block_len;
        taps.get(lag).copied().unwrap_or_default()
    }))
}

/// Eigenvalues of the circulant built from `taps`: the unnormalized DFT.
pub fn freq_response(taps: &[Complex64], block_len: usize) -> Result<Vec<Complex64>> {
    Dft::new(block_len).spectrum(taps)
}

/// Power-law hop gains `(source→relay, relay→destination)` for a relay at
/// normalized distance `delta`, anchored to unity at the midpoint.
pub fn path_gain(delta: f64, eta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("relay position delta must lie in (0, 1), got {delta}")));
    }
    Ok(((2.0 * delta).powf(-eta), (2.0 * (1.0 - delta)).powf(-eta)))
}

/// One source→relay→destination cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    pub h_sr: Vec<Complex64>,
    pub h_rd: Vec<Complex64>,
    /// Fixed AF gain ζ.
    pub zeta: f64,
    pub sigma2_relay: f64,
    pub sigma2_dest: f64,
    /// Mean-square gain of the source→relay hop.
    pub sigma2_hsr: f64,
}

impl LinkState {
    /// Builds a link, deriving ζ from the average hop power and relay noise.
    pub fn new(
        h_sr: Vec<Complex64>,
        h_rd: Vec<Complex64>,
        sigma2_hsr: f64,
        sigma2_relay: f64,
        sigma2_dest: f64,
    ) -> Result<Self> {
        if sigma2_relay < 0.0 || sigma2_dest < 0.0 || sigma2_hsr < 0.0 {
            return Err(Error::InvalidParameter("variances must be nonnegative".into()));
        }
        Ok(Self { zeta: af_gain(sigma2_hsr, sigma2_relay)?, h_sr, h_rd, sigma2_relay, sigma2_dest, sigma2_hsr })
    }
}
