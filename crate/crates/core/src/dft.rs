//! Unitary DFT pair backed by `rustfft`.
//!
//! Both directions carry a `1/sqrt(N)` factor so that `F` is unitary and
//! `F C F^H` is a similarity transform of a circulant `C`. The unnormalized
//! transform of a tap vector (its frequency response) is exposed separately
//! through [`Dft::spectrum`].

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Planned forward/inverse transforms for a fixed block length.
#[derive(Clone)]
pub struct Dft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl fmt::Debug for Dft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dft").field("len", &self.len).finish()
    }
}

impl Dft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "DFT length must be positive");
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            scale: 1.0 / (len as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unitary forward transform, in place.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check_len(buf.len())?;
        self.forward.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }

    /// Unitary inverse transform, in place.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check_len(buf.len())?;
        self.inverse.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut buf = x.to_vec();
        self.forward_in_place(&mut buf)?;
        Ok(buf)
    }

    pub fn inverse(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut buf = x.to_vec();
        self.inverse_in_place(&mut buf)?;
        Ok(buf)
    }

    /// Unnormalized N-point DFT of `taps` zero-padded to the block length.
    ///
    /// This is the eigenvalue vector of the circulant built from `taps`.
    pub fn spectrum(&self, taps: &[Complex64]) -> Result<Vec<Complex64>> {
        if taps.len() > self.len {
            return Err(Error::TapsExceedBlock { taps: taps.len(), block_len: self.len });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        buf[..taps.len()].copy_from_slice(taps);
        self.forward.process(&mut buf);
        Ok(buf)
    }

    fn check_len(&self, actual: usize) -> Result<()> {
        if actual != self.len {
            return Err(Error::LengthMismatch { expected: self.len, actual });
        }
        Ok(())
    }
}
