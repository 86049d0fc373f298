//! Fixed-gain amplify-and-forward relaying.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::complex_gaussian;
use crate::error::{Error, Result};
use crate::txrx::{append_cp, BlockFrame, Domain};

/// ζ = 1 / sqrt(σ²_h + σ²_n).
pub fn af_gain(sigma2_hsr: f64, sigma2_relay: f64) -> Result<f64> {
    let total = sigma2_hsr + sigma2_relay;
    if !(total > 0.0) {
        return Err(Error::DegenerateGain);
    }
    Ok(total.sqrt().recip())
}

/// Linear convolution of `taps` with a prefixed frame, keeping the N output
/// samples that follow the prefix.
///
/// Because the prefix spans the channel memory, those samples equal the
/// circular convolution of the taps with the block body.
pub fn propagate(tx: &BlockFrame, taps: &[Complex64]) -> Result<Vec<Complex64>> {
    if tx.domain() != Domain::Time {
        return Err(Error::WrongDomain);
    }
    if !tx.has_cp() {
        return Err(Error::MissingCp);
    }
    let cp_len = tx.cp_len();
    if taps.len() > cp_len + 1 {
        return Err(Error::CpShorterThanChannel { cp_len, taps: taps.len() });
    }
    let input = tx.samples();
    let out = (cp_len..input.len()).map(|n| taps.iter().enumerate().map(|(l, &h)| h * input[n - l]).sum()).collect();
    Ok(out)
}

/// Adds circular complex Gaussian noise of variance `sigma2` per sample.
pub fn add_noise<R: Rng + ?Sized>(samples: &mut [Complex64], sigma2: f64, rng: &mut R) {
    let std = (sigma2 * 0.5).sqrt();
    for s in samples {
        *s += complex_gaussian(rng) * std;
    }
}

/// Received block at a relay after prefix removal: `y = H x + n`.
pub fn relay_receive<R: Rng + ?Sized>(
    tx: &BlockFrame,
    taps: &[Complex64],
    sigma2: f64,
    rng: &mut R,
) -> Result<BlockFrame> {
    let mut y = propagate(tx, taps)?;
    add_noise(&mut y, sigma2, rng);
    Ok(BlockFrame::time(y))
}

/// Scales the relay's block by ζ and prepends a fresh prefix.
pub fn relay_forward(y: &BlockFrame, zeta: f64, cp_len: usize) -> Result<BlockFrame> {
    if y.has_cp() {
        return Err(Error::CpAttached);
    }
    let scaled = BlockFrame::time(y.samples().iter().map(|v| v * zeta).collect());
    append_cp(&scaled, cp_len)
}
