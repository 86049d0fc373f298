use serde::{Deserialize, Serialize};

use crate::channel::SvParams;
use crate::detectors::{Detector, ML_SEARCH_LIMIT};
use crate::error::{Error, Result};
use crate::txrx::Modulation;

/// Everything a run needs. Serialized as one flat JSON object; missing keys
/// take their default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Block length N.
    pub block_len: usize,
    pub cp_len: usize,
    pub scheme: Modulation,
    #[serde(flatten)]
    pub sv: SvParams,
    /// Tap count L of every hop.
    pub max_taps: usize,
    /// E_b/N_0 grid in dB.
    pub snr_db: Vec<f64>,
    pub detectors: Vec<Detector>,
    /// Number of relays U.
    pub num_relays: usize,
    /// Doppler frequency times block duration.
    pub fd_norm: f64,
    /// Source→relay distance as a fraction of source→destination.
    pub delta: f64,
    /// Path-loss exponent.
    pub eta: f64,
    pub mu: f64,
    pub lambda_rls: f64,
    pub pilot_frames: usize,
    pub data_frames: usize,
    pub trials: usize,
    pub master_seed: u64,
    /// Relay noise variance relative to the destination's.
    pub relay_noise_scale: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            block_len: 64,
            cp_len: 14,
            scheme: Modulation::Bpsk,
            sv: SvParams::default(),
            max_taps: 15,
            snr_db: (0..=15).map(|i| 2.0 * i as f64).collect(),
            detectors: vec![Detector::Mrc, Detector::Mmse, Detector::Lms, Detector::Rls],
            num_relays: 1,
            fd_norm: 0.0,
            delta: 0.5,
            eta: 2.0,
            mu: 0.05,
            lambda_rls: 0.995,
            pilot_frames: 50,
            data_frames: 10,
            trials: 200,
            master_seed: 1,
            relay_noise_scale: 1.0,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.sv.validate()?;
        if self.block_len == 0 {
            return Err(invalid("block_len must be >= 1"));
        }
        if self.max_taps == 0 {
            return Err(invalid("max_taps must be >= 1"));
        }
        if self.max_taps > self.block_len {
            return Err(Error::TapsExceedBlock { taps: self.max_taps, block_len: self.block_len });
        }
        if self.cp_len > self.block_len {
            return Err(Error::CpTooLong { cp_len: self.cp_len, block_len: self.block_len });
        }
        if self.cp_len + 1 < self.max_taps {
            return Err(Error::CpShorterThanChannel { cp_len: self.cp_len, taps: self.max_taps });
        }
        if self.trials == 0 {
            return Err(invalid("trials must be >= 1"));
        }
        if self.num_relays == 0 {
            return Err(invalid("num_relays must be >= 1"));
        }
        if let Some(bad) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(invalid(format!("SNR values must be finite, got {bad}")));
        }
        if !(0.0..0.5).contains(&self.fd_norm) {
            return Err(invalid(format!("fd_norm must lie in [0, 0.5), got {}", self.fd_norm)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !self.eta.is_finite() || self.eta < 0.0 {
            return Err(invalid(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(invalid(format!("mu must be >= 0, got {}", self.mu)));
        }
        if !(self.lambda_rls > 0.0 && self.lambda_rls <= 1.0) {
            return Err(invalid(format!("lambda_rls must lie in (0, 1], got {}", self.lambda_rls)));
        }
        if !(self.relay_noise_scale >= 0.0) || !self.relay_noise_scale.is_finite() {
            return Err(invalid("relay_noise_scale must be finite and >= 0"));
        }
        if self.detectors.contains(&Detector::Ml) {
            let size = (self.scheme.order() as f64).powi(self.block_len as i32);
            if size > ML_SEARCH_LIMIT as f64 {
                return Err(Error::MlSearchTooLarge {
                    size: size.min(u128::MAX as f64) as u128,
                    limit: ML_SEARCH_LIMIT,
                });
            }
        }
        Ok(())
    }

    /// Destination noise variance per complex sample for a given E_b/N_0.
    pub fn noise_variance(&self, ebn0_db: f64) -> f64 {
        let ebn0 = 10f64.powf(ebn0_db / 10.0);
        1.0 / (self.scheme.bits_per_symbol() as f64 * ebn0)
    }

    pub fn bits_per_frame(&self) -> usize {
        self.block_len * self.scheme.bits_per_symbol()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            SimConfig { trials: 0, ..Default::default() },
            SimConfig { cp_len: 3, ..Default::default() },
            SimConfig { delta: 1.0, ..Default::default() },
            SimConfig { snr_db: vec![f64::NAN], ..Default::default() },
            SimConfig { fd_norm: 0.5, ..Default::default() },
            SimConfig { lambda_rls: 0.0, ..Default::default() },
            SimConfig { detectors: vec![Detector::Ml], ..Default::default() },
            SimConfig { max_taps: 80, cp_len: 64, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        let ml_ok = SimConfig { block_len: 16, detectors: vec![Detector::Ml], ..Default::default() };
        ml_ok.validate().unwrap();
    }

    #[test]
    fn flat_json_round_trip() {
        let cfg = SimConfig::default();
        let json = serde_json::to_value(&cfg).unwrap();
        assert!(json.get("cluster_rate").is_some(), "sv params are flattened");
        assert_eq!(json["scheme"], "bpsk");
        let back: SimConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, cfg);

        let partial: SimConfig = serde_json::from_str(r#"{"trials": 7, "ray_decay": 3.0}"#).unwrap();
        assert_eq!(partial.trials, 7);
        assert_eq!(partial.sv.ray_decay, 3.0);
        assert_eq!(partial.block_len, 64);
    }

    #[test]
    fn noise_variance_convention() {
        let cfg = SimConfig::default();
        assert!((cfg.noise_variance(0.0) - 1.0).abs() < 1e-15);
        let qpsk = SimConfig { scheme: Modulation::Qpsk, ..Default::default() };
        assert!((qpsk.noise_variance(10.0) - 0.05).abs() < 1e-15);
    }
}
