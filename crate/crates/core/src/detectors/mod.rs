//! Frequency-domain detection bank.
//!
//! With a cyclic prefix on both hops every cascade is circulant, so the
//! combined channel, the noise covariance and all linear equalizers are
//! diagonal in the DFT basis. Everything here works bin by bin on length-N
//! vectors; the dense matrices only appear in tests as oracles.

mod adaptive;
mod ml;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::LinkState;
use crate::dft::Dft;
use crate::error::{Error, Result};

pub use adaptive::{lms_step, rls_step, train_adaptive, AdaptiveKind, AdaptiveParams, RlsState};
pub use ml::{ml_detect, ML_SEARCH_LIMIT};

/// Detector selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Mrc,
    Mmse,
    Ml,
    Lms,
    Rls,
}

impl Detector {
    pub const ALL: [Detector; 5] = [Detector::Mrc, Detector::Mmse, Detector::Ml, Detector::Lms, Detector::Rls];

    pub fn name(self) -> &'static str {
        match self {
            Detector::Mrc => "mrc",
            Detector::Mmse => "mmse",
            Detector::Ml => "ml",
            Detector::Lms => "lms",
            Detector::Rls => "rls",
        }
    }

    pub fn is_adaptive(self) -> bool {
        matches!(self, Detector::Lms | Detector::Rls)
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Detector::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown detector '{s}'")))
    }
}

/// Diagonal of the frequency-domain equalizer W.
#[derive(Debug, Clone, PartialEq)]
pub struct FdeWeights(pub Vec<Complex64>);

impl FdeWeights {
    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Per-bin estimate `conj(w) * r`.
    pub fn apply(&self, r: &[Complex64]) -> Vec<Complex64> {
        self.0.iter().zip(r).map(|(w, r)| w.conj() * r).collect()
    }
}

/// Diagonals of the cascade response Ξ and the noise covariance Σ.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub xi: Vec<Complex64>,
    pub sigma: Vec<f64>,
}

impl EffectiveChannel {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// Combines all relay cascades into one per-bin response and noise profile.
///
/// For relay u with source→relay response `H_u(f)` and relay→destination
/// response `G_u(f)`: `xi = Σ ζ_u G_u H_u` and
/// `sigma = Σ (ζ_u² |G_u|² σ²_u + σ²_D)`.
pub fn effective_channel(links: &[LinkState], dft: &Dft) -> Result<EffectiveChannel> {
    if links.is_empty() {
        return Err(Error::InvalidParameter("at least one relay link is required".into()));
    }
    let n = dft.len();
    let mut xi = vec![Complex64::new(0.0, 0.0); n];
    let mut sigma = vec![0.0; n];
    for link in links {
        let h = dft.spectrum(&link.h_sr)?;
        let g = dft.spectrum(&link.h_rd)?;
        let z2 = link.zeta * link.zeta;
        for k in 0..n {
            xi[k] += g[k] * h[k] * link.zeta;
            sigma[k] += z2 * g[k].norm_sqr() * link.sigma2_relay + link.sigma2_dest;
        }
    }
    Ok(EffectiveChannel { xi, sigma })
}

/// Per-bin matched filter, scaled by the inverse mean channel power.
///
/// The common scale only sets the output amplitude; it does not undo the
/// per-bin distortion, so residual ISI remains.
pub fn mrc_weights(ch: &EffectiveChannel) -> FdeWeights {
    let mean_power = ch.xi.iter().map(|x| x.norm_sqr()).sum::<f64>() / ch.len().max(1) as f64;
    let scale = if mean_power > 0.0 { mean_power.recip() } else { 0.0 };
    FdeWeights(ch.xi.iter().map(|x| x * scale).collect())
}

/// Per-bin Wiener solution `w = xi / (|xi|² + sigma)`; a 0/0 bin gets weight 0.
pub fn mmse_weights(ch: &EffectiveChannel) -> FdeWeights {
    FdeWeights(
        ch.xi
            .iter()
            .zip(&ch.sigma)
            .map(|(x, s)| {
                let denom = x.norm_sqr() + s;
                if denom > 0.0 {
                    x / denom
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect(),
    )
}

/// Closed-form per-bin MMSE, `sigma / (|xi|² + sigma)`, averaged over bins.
pub fn mmse_floor(ch: &EffectiveChannel) -> f64 {
    let total: f64 = ch
        .xi
        .iter()
        .zip(&ch.sigma)
        .map(|(x, s)| {
            let denom = x.norm_sqr() + s;
            if denom > 0.0 {
                s / denom
            } else {
                1.0
            }
        })
        .sum();
    total / ch.len().max(1) as f64
}
