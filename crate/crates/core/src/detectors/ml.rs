//! Exhaustive maximum-likelihood block detection.
//!
//! The metric `(r - Ξ F x)^H Σ^{-1} (r - Ξ F x)` is expanded into the
//! quadratic form `x^H G x - 2 Re(b^H x)` with `G = F^H Ξ^H Σ^{-1} Ξ F` and
//! `b = F^H Ξ^H Σ^{-1} r`. Candidates are visited in reflected M-ary Gray
//! order so each step changes one symbol and the metric updates in O(N).

use num_complex::Complex64;

use crate::dft::Dft;
use crate::error::{Error, Result};
use crate::txrx::{BlockFrame, Modulation};

use super::EffectiveChannel;

/// Largest number of candidate blocks `M^N` the search will visit.
pub const ML_SEARCH_LIMIT: u128 = 1 << 16;

fn search_size(order: usize, block_len: usize) -> u128 {
    let mut size: u128 = 1;
    for _ in 0..block_len {
        size = size.saturating_mul(order as u128);
        if size > ML_SEARCH_LIMIT {
            break;
        }
    }
    size
}

/// Returns the time-domain constellation block minimizing the
/// noise-whitened distance to `r_f`.
pub fn ml_detect(r_f: &[Complex64], ch: &EffectiveChannel, scheme: Modulation, dft: &Dft) -> Result<BlockFrame> {
    let n = dft.len();
    if r_f.len() != n || ch.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: if r_f.len() != n { r_f.len() } else { ch.len() } });
    }
    let size = search_size(scheme.order(), n);
    if size > ML_SEARCH_LIMIT {
        return Err(Error::MlSearchTooLarge { size, limit: ML_SEARCH_LIMIT });
    }

    // Inverse noise weights; bins with zero noise variance are treated as
    // dominating every noisy bin.
    let max_sigma = ch.sigma.iter().cloned().fold(0.0, f64::max);
    let weight: Vec<f64> =
        if max_sigma > 0.0 { ch.sigma.iter().map(|&s| 1.0 / s.max(1e-12 * max_sigma)).collect() } else { vec![1.0; n] };

    // diag(Ξ^H Σ^{-1} Ξ) and Ξ^H Σ^{-1} r.
    let gain: Vec<f64> = ch.xi.iter().zip(&weight).map(|(x, w)| w * x.norm_sqr()).collect();
    let matched: Vec<Complex64> = ch.xi.iter().zip(&weight).zip(r_f).map(|((x, w), r)| x.conj() * r * *w).collect();

    // G is circulant: its first column is the unitary inverse DFT of `gain`
    // scaled by sqrt(N).
    let root_n = (n as f64).sqrt();
    let g_col: Vec<Complex64> = dft
        .inverse(&gain.iter().map(|&g| Complex64::new(g, 0.0)).collect::<Vec<_>>())?
        .into_iter()
        .map(|v| v / root_n)
        .collect();
    let g = |i: usize, j: usize| g_col[(i + n - j) % n];
    let b = dft.inverse(&matched)?;

    let points = scheme.constellation();
    let m = points.len();
    let mut digits = vec![0usize; n];
    let mut direction = vec![1isize; n];
    let mut x: Vec<Complex64> = vec![points[0]; n];
    let mut gx: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| g(i, j) * x[j]).sum()).collect();
    let mut metric: f64 = x.iter().zip(&gx).map(|(xi, gxi)| (xi.conj() * gxi).re).sum::<f64>()
        - 2.0 * x.iter().zip(&b).map(|(xi, bi)| (bi.conj() * xi).re).sum::<f64>();
    let mut best = metric;
    let mut best_digits = digits.clone();
    let g_diag = g_col[0].re;

    loop {
        let mut j = 0;
        while j < n {
            let next = digits[j] as isize + direction[j];
            if next >= 0 && (next as usize) < m {
                break;
            }
            direction[j] = -direction[j];
            j += 1;
        }
        if j == n {
            break;
        }
        let new_digit = (digits[j] as isize + direction[j]) as usize;
        let d = points[new_digit] - x[j];
        metric += 2.0 * (d.conj() * gx[j]).re + d.norm_sqr() * g_diag - 2.0 * (b[j].conj() * d).re;
        for (i, gxi) in gx.iter_mut().enumerate() {
            *gxi += g(i, j) * d;
        }
        x[j] = points[new_digit];
        digits[j] = new_digit;
        if metric < best {
            best = metric;
            best_digits.copy_from_slice(&digits);
        }
    }

    Ok(BlockFrame::time(best_digits.iter().map(|&d| points[d]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::detectors::{mmse_weights, EffectiveChannel};
    use crate::txrx::{demodulate_symbols, modulate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force metric evaluation used as an independent reference.
    fn brute_force(r: &[Complex64], ch: &EffectiveChannel, scheme: Modulation, dft: &Dft) -> Vec<Complex64> {
        let n = dft.len();
        let pts = scheme.constellation();
        let total = pts.len().pow(n as u32);
        let mut best = (f64::INFINITY, vec![]);
        for idx in 0..total {
            let mut rem = idx;
            let x: Vec<Complex64> = (0..n)
                .map(|_| {
                    let p = pts[rem % pts.len()];
                    rem /= pts.len();
                    p
                })
                .collect();
            let s = dft.forward(&x).unwrap();
            let metric: f64 = (0..n).map(|k| (r[k] - ch.xi[k] * s[k]).norm_sqr() / ch.sigma[k]).sum();
            if metric < best.0 {
                best = (metric, x);
            }
        }
        best.1
    }

    fn random_channel(rng: &mut ChaCha8Rng, n: usize) -> EffectiveChannel {
        EffectiveChannel {
            xi: (0..n).map(|_| complex_gaussian(rng)).collect(),
            sigma: (0..n).map(|_| 0.2 + rng.random::<f64>()).collect(),
        }
    }

    #[test]
    fn noiseless_exhaustive_recovery() {
        let n = 4;
        let dft = Dft::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ch = random_channel(&mut rng, n);
        ch.sigma = vec![0.0; n];
        for word in 0u32..16 {
            let bits: Vec<bool> = (0..n).map(|i| (word >> i) & 1 == 1).collect();
            let x = modulate(&bits, Modulation::Bpsk).unwrap();
            let s = dft.forward(x.samples()).unwrap();
            let r: Vec<Complex64> = s.iter().zip(&ch.xi).map(|(s, x)| s * x).collect();
            let est = ml_detect(&r, &ch, Modulation::Bpsk, &dft).unwrap();
            assert_eq!(est, x);
        }
    }

    #[test]
    fn matches_brute_force_on_noisy_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (scheme, n) in [(Modulation::Bpsk, 8), (Modulation::Qpsk, 4)] {
            let dft = Dft::new(n);
            for _ in 0..30 {
                let ch = random_channel(&mut rng, n);
                let r: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng)).collect();
                let fast = ml_detect(&r, &ch, scheme, &dft).unwrap();
                assert_eq!(fast.samples(), brute_force(&r, &ch, scheme, &dft).as_slice());
            }
        }
    }

    #[test]
    fn noise_scale_does_not_move_argmin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 8;
        let dft = Dft::new(n);
        for _ in 0..20 {
            let ch = random_channel(&mut rng, n);
            let r: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng)).collect();
            let scaled = EffectiveChannel { xi: ch.xi.clone(), sigma: ch.sigma.iter().map(|s| s * 7.5).collect() };
            assert_eq!(
                ml_detect(&r, &ch, Modulation::Bpsk, &dft).unwrap(),
                ml_detect(&r, &scaled, Modulation::Bpsk, &dft).unwrap()
            );
        }
    }

    #[test]
    fn flat_high_snr_agrees_with_mmse() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 8;
        let dft = Dft::new(n);
        let ch = EffectiveChannel { xi: vec![Complex64::new(1.0, 0.0); n], sigma: vec![0.01; n] };
        let w = mmse_weights(&ch);
        for _ in 0..1000 {
            let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            let x = modulate(&bits, Modulation::Bpsk).unwrap();
            let mut r = dft.forward(x.samples()).unwrap();
            for v in &mut r {
                *v += complex_gaussian(&mut rng) * 0.05f64.sqrt();
            }
            let ml = ml_detect(&r, &ch, Modulation::Bpsk, &dft).unwrap();
            let lin = demodulate_symbols(&dft.inverse(&w.apply(&r)).unwrap(), Modulation::Bpsk);
            assert_eq!(demodulate_symbols(ml.samples(), Modulation::Bpsk), lin);
        }
    }

    #[test]
    fn search_cap() {
        let dft = Dft::new(17);
        let ch = EffectiveChannel { xi: vec![Complex64::new(1.0, 0.0); 17], sigma: vec![1.0; 17] };
        let r = vec![Complex64::new(0.0, 0.0); 17];
        assert!(matches!(ml_detect(&r, &ch, Modulation::Bpsk, &dft), Err(Error::MlSearchTooLarge { .. })));
        let dft = Dft::new(9);
        let ch = EffectiveChannel { xi: vec![Complex64::new(1.0, 0.0); 9], sigma: vec![1.0; 9] };
        assert!(ml_detect(&r[..9], &ch, Modulation::Qpsk, &dft).is_err());
    }
}
