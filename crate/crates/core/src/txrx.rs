//! Block construction at the source and the shared block transforms.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft::Dft;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Time,
    Frequency,
}

/// A length-N block of complex symbols, optionally carrying a cyclic prefix.
///
/// With a prefix attached the stored vector is `cp_len + N` long and its
/// first `cp_len` entries repeat the last `cp_len` entries of the body.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFrame {
    symbols: Vec<Complex64>,
    domain: Domain,
    cp_len: Option<usize>,
}

impl BlockFrame {
    pub fn time(symbols: Vec<Complex64>) -> Self {
        Self { symbols, domain: Domain::Time, cp_len: None }
    }

    pub fn frequency(symbols: Vec<Complex64>) -> Self {
        Self { symbols, domain: Domain::Frequency, cp_len: None }
    }

    /// Wraps a time-domain vector that already begins with a `cp_len` prefix.
    ///
    /// Only the length is checked; the prefix content is the caller's claim.
    pub fn with_prefix(symbols: Vec<Complex64>, cp_len: usize) -> Result<Self> {
        if symbols.len() < 2 * cp_len {
            return Err(Error::CpTooLong { cp_len, block_len: symbols.len().saturating_sub(cp_len) });
        }
        Ok(Self { symbols, domain: Domain::Time, cp_len: Some(cp_len) })
    }

    /// Stored samples, prefix included.
    pub fn samples(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.symbols
    }

    /// Block body without the prefix.
    pub fn body(&self) -> &[Complex64] {
        &self.symbols[self.cp_len.unwrap_or(0)..]
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn has_cp(&self) -> bool {
        self.cp_len.is_some()
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len.unwrap_or(0)
    }

    /// Block length N.
    pub fn block_len(&self) -> usize {
        self.symbols.len() - self.cp_len()
    }
}

/// Supported constellations, both normalized to unit average energy and
/// Gray-labelled. A point's index in [`Modulation::constellation`] is its
/// bit label read MSB first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qpsk,
}

const BPSK: [Complex64; 2] = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
const QPSK: [Complex64; 4] = [
    Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    Complex64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
];

impl Modulation {
    pub fn order(self) -> usize {
        self.constellation().len()
    }

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
        }
    }

    pub fn constellation(self) -> &'static [Complex64] {
        match self {
            Modulation::Bpsk => &BPSK,
            Modulation::Qpsk => &QPSK,
        }
    }

    /// Nearest constellation index; equidistant points resolve to the lower index.
    pub fn slice(self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.constellation().iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" => Ok(Modulation::Qpsk),
            other => Err(Error::InvalidParameter(format!("unknown modulation '{other}'"))),
        }
    }
}

/// Maps bits (one `bool` per bit, MSB first per symbol) onto a time-domain block.
pub fn modulate(bits: &[bool], scheme: Modulation) -> Result<BlockFrame> {
    let k = scheme.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return Err(Error::LengthMismatch { expected: bits.len().div_ceil(k) * k, actual: bits.len() });
    }
    let points = scheme.constellation();
    let symbols = bits
        .chunks(k)
        .map(|chunk| {
            let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            points[label]
        })
        .collect();
    Ok(BlockFrame::time(symbols))
}

/// Minimum-distance slicing followed by the inverse Gray map.
pub fn demodulate(frame: &BlockFrame, scheme: Modulation) -> Result<Vec<bool>> {
    if frame.domain() != Domain::Time {
        return Err(Error::WrongDomain);
    }
    if frame.has_cp() {
        return Err(Error::CpAttached);
    }
    Ok(demodulate_symbols(frame.samples(), scheme))
}

pub(crate) fn demodulate_symbols(symbols: &[Complex64], scheme: Modulation) -> Vec<bool> {
    let k = scheme.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * k);
    for &z in symbols {
        let label = scheme.slice(z);
        for shift in (0..k).rev() {
            bits.push((label >> shift) & 1 == 1);
        }
    }
    bits
}

/// Copies the last `cp_len` body symbols to the front.
pub fn append_cp(frame: &BlockFrame, cp_len: usize) -> Result<BlockFrame> {
    if frame.domain() != Domain::Time {
        return Err(Error::WrongDomain);
    }
    if frame.has_cp() {
        return Err(Error::CpAttached);
    }
    let body = frame.samples();
    let n = body.len();
    if cp_len > n {
        return Err(Error::CpTooLong { cp_len, block_len: n });
    }
    let mut out = Vec::with_capacity(n + cp_len);
    out.extend_from_slice(&body[n - cp_len..]);
    out.extend_from_slice(body);
    Ok(BlockFrame { symbols: out, domain: Domain::Time, cp_len: Some(cp_len) })
}

/// Discards the prefix.
pub fn remove_cp(frame: &BlockFrame) -> Result<BlockFrame> {
    let cp_len = frame.cp_len.ok_or(Error::MissingCp)?;
    if frame.symbols.len() < 2 * cp_len {
        return Err(Error::CpTooLong { cp_len, block_len: frame.symbols.len().saturating_sub(cp_len) });
    }
    Ok(BlockFrame { symbols: frame.symbols[cp_len..].to_vec(), domain: frame.domain, cp_len: None })
}

/// Unitary DFT of a time-domain block without prefix.
pub fn fft(frame: &BlockFrame, dft: &Dft) -> Result<BlockFrame> {
    if frame.has_cp() {
        return Err(Error::CpAttached);
    }
    if frame.domain() != Domain::Time {
        return Err(Error::WrongDomain);
    }
    Ok(BlockFrame::frequency(dft.forward(frame.samples())?))
}

/// Unitary inverse DFT of a frequency-domain block.
pub fn ifft(frame: &BlockFrame, dft: &Dft) -> Result<BlockFrame> {
    if frame.has_cp() {
        return Err(Error::CpAttached);
    }
    if frame.domain() != Domain::Frequency {
        return Err(Error::WrongDomain);
    }
    Ok(BlockFrame::time(dft.inverse(frame.samples())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constellations_have_unit_energy() {
        for scheme in [Modulation::Bpsk, Modulation::Qpsk] {
            let pts = scheme.constellation();
            let e: f64 = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / pts.len() as f64;
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qpsk_neighbours_differ_in_one_bit() {
        let pts = Modulation::Qpsk.constellation();
        let dmin = 2.0f64.sqrt();
        for i in 0..4 {
            for j in 0..4 {
                if i != j && ((pts[i] - pts[j]).norm() - dmin).abs() < 1e-12 {
                    assert_eq!((i ^ j).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn bit_conventions() {
        let f = modulate(&[false, true], Modulation::Bpsk).unwrap();
        assert_eq!(f.samples(), &[c(1.0, 0.0), c(-1.0, 0.0)]);
        let f = modulate(&[false, false], Modulation::Qpsk).unwrap();
        assert_eq!(f.samples(), &[c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)]);
        assert!(modulate(&[true, false, true], Modulation::Qpsk).is_err());
    }

    #[test]
    fn bpsk_round_trip_exhaustive() {
        let n = 12;
        for word in 0u32..(1 << n) {
            let bits: Vec<bool> = (0..n).map(|i| (word >> i) & 1 == 1).collect();
            let frame = modulate(&bits, Modulation::Bpsk).unwrap();
            assert_eq!(demodulate(&frame, Modulation::Bpsk).unwrap(), bits);
        }
    }

    #[test]
    fn tie_break_picks_lowest_index() {
        let zeros = BlockFrame::time(vec![c(0.0, 0.0); 3]);
        assert_eq!(demodulate(&zeros, Modulation::Bpsk).unwrap(), vec![false; 3]);
        assert_eq!(demodulate(&zeros, Modulation::Qpsk).unwrap(), vec![false; 6]);
    }

    #[test]
    fn small_perturbations_are_recovered() {
        let bits = [true, false, false, true, true, true];
        let frame = modulate(&bits, Modulation::Qpsk).unwrap();
        let noisy: Vec<Complex64> = frame.samples().iter().map(|s| s + c(0.3, -0.3)).collect();
        let out = demodulate(&BlockFrame::time(noisy), Modulation::Qpsk).unwrap();
        assert_eq!(out, bits);
    }

    #[test]
    fn cp_layout() {
        let x = BlockFrame::time(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let with = append_cp(&x, 2).unwrap();
        let expected: Vec<Complex64> = [3.0, 4.0, 1.0, 2.0, 3.0, 4.0].iter().map(|&v| c(v, 0.0)).collect();
        assert_eq!(with.samples(), expected.as_slice());
        assert_eq!(with.body(), x.samples());
        assert_eq!(remove_cp(&with).unwrap(), x);

        let zero = append_cp(&x, 0).unwrap();
        assert_eq!(zero.samples(), x.samples());
        assert_eq!(remove_cp(&zero).unwrap(), x);

        assert!(matches!(append_cp(&x, 5), Err(Error::CpTooLong { .. })));
        assert_eq!(remove_cp(&x), Err(Error::MissingCp));
        assert!(BlockFrame::with_prefix(vec![c(0.0, 0.0); 3], 2).is_err());
    }

    #[test]
    fn fft_cases() {
        let dft = Dft::new(4);
        let impulse = BlockFrame::time(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let freq = fft(&impulse, &dft).unwrap();
        assert_eq!(freq.domain(), Domain::Frequency);
        assert!(freq.samples().iter().all(|v| (v - c(0.5, 0.0)).norm() < 1e-15));

        let dft2 = Dft::new(2);
        let freq = fft(&BlockFrame::time(vec![c(1.0, 0.0), c(-1.0, 0.0)]), &dft2).unwrap();
        assert!(freq.samples()[0].norm() < 1e-15);
        assert!((freq.samples()[1] - c(2.0 * FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);

        let with = append_cp(&impulse, 1).unwrap();
        assert_eq!(fft(&with, &dft), Err(Error::CpAttached));
        assert_eq!(ifft(&impulse, &dft), Err(Error::WrongDomain));
    }

    fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), len)
            .prop_map(|v| v.into_iter().map(|(re, im)| c(re, im)).collect())
    }

    proptest! {
        #[test]
        fn unitary_round_trip(x in complex_vec(64)) {
            let dft = Dft::new(64);
            let frame = BlockFrame::time(x.clone());
            let freq = fft(&frame, &dft).unwrap();
            let norm_t: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let norm_f: f64 = freq.samples().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((norm_t - norm_f).abs() <= 1e-12 * norm_t.max(1.0));
            let back = ifft(&freq, &dft).unwrap();
            for (a, b) in back.samples().iter().zip(&x) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn cp_round_trip(x in complex_vec(16), cp in 0usize..=16) {
            let frame = BlockFrame::time(x);
            let with = append_cp(&frame, cp).unwrap();
            prop_assert_eq!(with.block_len(), 16);
            prop_assert_eq!(&with.samples()[..cp], &frame.samples()[16 - cp..]);
            prop_assert_eq!(remove_cp(&with).unwrap(), frame);
        }

        #[test]
        fn qpsk_round_trip(bits in prop::collection::vec(any::<bool>(), 32)) {
            let frame = modulate(&bits, Modulation::Qpsk).unwrap();
            prop_assert_eq!(demodulate(&frame, Modulation::Qpsk).unwrap(), bits);
        }
    }
}
