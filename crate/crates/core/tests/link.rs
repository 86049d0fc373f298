use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scfde::channel::{circulant_from_taps, evolve_channel, LinkState};
use scfde::detectors::{effective_channel, ml_detect, mmse_weights, mrc_weights, EffectiveChannel};
use scfde::dft::Dft;
use scfde::harness::{Link, SimConfig};
use scfde::txrx::{demodulate, modulate, BlockFrame, Modulation};

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let n = rand_distr::StandardNormal;
    Complex64::new(rng.sample(n), rng.sample(n))
}

fn dft_matrix(n: usize) -> DMatrix<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |k, m| {
        Complex64::from_polar(scale, -2.0 * std::f64::consts::PI * ((k * m) % n) as f64 / n as f64)
    })
}

fn linear_decisions(w: &scfde::detectors::FdeWeights, r: &[Complex64], dft: &Dft) -> Vec<bool> {
    let est = dft.inverse(&w.apply(r)).unwrap();
    demodulate(&BlockFrame::time(est), Modulation::Bpsk).unwrap()
}

#[test]
fn circulant_is_diagonalized_by_the_dft() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [8, 64, 256] {
        let taps: Vec<Complex64> = (0..n.min(15)).map(|_| gaussian(&mut rng)).collect();
        let f = dft_matrix(n);
        let d = &f * circulant_from_taps(&taps, n).unwrap() * f.adjoint();
        let (mut diag, mut off) = (0.0f64, 0.0f64);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    diag = diag.max(d[(i, j)].norm());
                } else {
                    off = off.max(d[(i, j)].norm());
                }
            }
        }
        assert!(off / diag < 1e-9, "N={n}: {}", off / diag);
    }
}

#[test]
fn mrc_matches_mmse_without_multipath() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 16;
    let dft = Dft::new(n);
    for _ in 0..10_000 {
        let link = LinkState::new(vec![gaussian(&mut rng)], vec![gaussian(&mut rng)], 1.0, 0.3, 0.3).unwrap();
        let ch = effective_channel(&[link], &dft).unwrap();
        let r: Vec<Complex64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        assert_eq!(linear_decisions(&mrc_weights(&ch), &r, &dft), linear_decisions(&mmse_weights(&ch), &r, &dft));
    }
}

#[test]
fn noiseless_relays_sum_to_the_effective_channel() {
    let cfg = SimConfig { block_len: 32, num_relays: 3, fd_norm: 0.01, delta: 0.3, ..SimConfig::default() };
    let dft = Dft::new(cfg.block_len);
    let mut link = Link::new(&cfg, 400.0, 77).unwrap();
    for _ in 0..5 {
        let frame = link.next_frame(&dft).unwrap();
        let s = dft.forward(&frame.symbols).unwrap();
        for ((r, xi), s) in frame.received.iter().zip(&frame.channel.xi).zip(&s) {
            assert!((r - xi * s).norm() < 1e-8);
        }
    }
}

#[test]
fn doppler_preserves_tap_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let power = [0.6, 0.3, 0.1];
    let runs = 20_000;
    let mut acc = [0.0; 3];
    for _ in 0..runs {
        let mut taps: Vec<Complex64> = power.iter().map(|p| gaussian(&mut rng) * (p / 2.0f64).sqrt()).collect();
        for _ in 0..20 {
            taps = evolve_channel(&taps, &power, 0.02, &mut rng);
        }
        for (a, t) in acc.iter_mut().zip(&taps) {
            *a += t.norm_sqr() / runs as f64;
        }
    }
    for (a, p) in acc.iter().zip(power) {
        assert!((a / p - 1.0).abs() < 0.02, "{a} vs {p}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_scaling_keeps_decisions(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 8;
        let dft = Dft::new(n);
        let ch = EffectiveChannel {
            xi: (0..n).map(|_| gaussian(&mut rng)).collect(),
            sigma: (0..n).map(|_| 0.05 + rng.random::<f64>()).collect(),
        };
        let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let s = dft.forward(modulate(&bits, Modulation::Bpsk).unwrap().samples()).unwrap();
        let r: Vec<Complex64> = (0..n)
            .map(|k| ch.xi[k] * s[k] + gaussian(&mut rng) * (ch.sigma[k] / 2.0).sqrt())
            .collect();
        let scaled = EffectiveChannel {
            xi: ch.xi.iter().map(|x| x * scale).collect(),
            sigma: ch.sigma.iter().map(|v| v * scale * scale).collect(),
        };
        let r_scaled: Vec<Complex64> = r.iter().map(|v| v * scale).collect();

        prop_assert_eq!(
            linear_decisions(&mrc_weights(&ch), &r, &dft),
            linear_decisions(&mrc_weights(&scaled), &r_scaled, &dft)
        );
        prop_assert_eq!(
            linear_decisions(&mmse_weights(&ch), &r, &dft),
            linear_decisions(&mmse_weights(&scaled), &r_scaled, &dft)
        );
        prop_assert_eq!(
            ml_detect(&r, &ch, Modulation::Bpsk, &dft).unwrap(),
            ml_detect(&r_scaled, &scaled, Modulation::Bpsk, &dft).unwrap()
        );
    }
}
