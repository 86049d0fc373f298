//! LMS and RLS frequency-domain equalizers.
//!
//! W is diagonal, so both algorithms reduce to N independent scalar filters
//! and RLS keeps only the diagonal of its inverse autocorrelation. The
//! updates are written so each bin converges to the Wiener weight
//! `xi / (|xi|² + sigma)`, the same quantity [`super::mmse_weights`] returns.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FdeWeights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdaptiveKind {
    Lms,
    Rls,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveParams {
    /// LMS step size μ.
    pub mu: f64,
    /// RLS forgetting factor.
    pub lambda: f64,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        Self { mu: 0.05, lambda: 0.995 }
    }
}

/// One LMS iteration: `e = s - conj(w) r`, `w += mu r conj(e)`.
///
/// Returns the a-priori error per bin.
pub fn lms_step(w: &mut FdeWeights, r: &[Complex64], s: &[Complex64], mu: f64) -> Vec<Complex64> {
    debug_assert_eq!(w.len(), r.len());
    debug_assert_eq!(w.len(), s.len());
    w.0.iter_mut()
        .zip(r.iter().zip(s))
        .map(|(w, (&r, &s))| {
            let e = s - w.conj() * r;
            *w += r * e.conj() * mu;
            e
        })
        .collect()
}

/// Per-bin RLS state.
#[derive(Debug, Clone, PartialEq)]
pub struct RlsState {
    pub w: FdeWeights,
    /// Diagonal of the inverse autocorrelation estimate.
    pub p: Vec<f64>,
    pub lambda: f64,
    /// Number of bins reinitialized after `p` lost positivity.
    pub resets: usize,
}

impl RlsState {
    /// Zero weights and `P = I`.
    pub fn new(len: usize, lambda: f64) -> Self {
        Self { w: FdeWeights::zeros(len), p: vec![1.0; len], lambda, resets: 0 }
    }
}

/// One RLS iteration; returns the a-priori error per bin.
pub fn rls_step(state: &mut RlsState, r: &[Complex64], s: &[Complex64]) -> Vec<Complex64> {
    let inv_lambda = state.lambda.recip();
    let mut errors = Vec::with_capacity(r.len());
    for k in 0..r.len() {
        let p_scaled = state.p[k] * inv_lambda;
        let gain = r[k] * p_scaled / (1.0 + p_scaled * r[k].norm_sqr());
        let e = s[k] - state.w.0[k].conj() * r[k];
        state.w.0[k] += gain * e.conj();
        let p_next = p_scaled - p_scaled * (gain * r[k].conj()).re;
        if p_next > 0.0 && p_next.is_finite() {
            state.p[k] = p_next;
        } else {
            state.p[k] = 1.0;
            state.resets += 1;
        }
        errors.push(e);
    }
    errors
}

fn mean_sq(errors: &[Complex64]) -> f64 {
    errors.iter().map(|e| e.norm_sqr()).sum::<f64>() / errors.len().max(1) as f64
}

/// Runs a detector over pilot frames `(r_f, s_f)` from zero initial weights.
///
/// Returns the final weights and the bin-averaged squared a-priori error of
/// every iteration.
pub fn train_adaptive<'a, I>(
    kind: AdaptiveKind,
    pilots: I,
    len: usize,
    params: AdaptiveParams,
) -> (FdeWeights, Vec<f64>)
where
    I: IntoIterator<Item = (&'a [Complex64], &'a [Complex64])>,
{
    let mut trace = Vec::new();
    match kind {
        AdaptiveKind::Lms => {
            let mut w = FdeWeights::zeros(len);
            for (r, s) in pilots {
                trace.push(mean_sq(&lms_step(&mut w, r, s, params.mu)));
            }
            (w, trace)
        }
        AdaptiveKind::Rls => {
            let mut state = RlsState::new(len, params.lambda);
            for (r, s) in pilots {
                trace.push(mean_sq(&rls_step(&mut state, r, s)));
            }
            (state.w, trace)
        }
    }
}
