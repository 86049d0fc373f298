//! CSV output.
//!
//! Files are written to a temporary sibling and renamed into place, so a
//! crashed run never leaves a truncated table behind.

use std::io;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::detectors::Detector;
use crate::harness::{BerRecord, ConvergenceResult};

#[derive(Serialize)]
struct BerRow<'a> {
    experiment: &'a str,
    detector: Detector,
    snr_db: f64,
    fd_norm: f64,
    delta: f64,
    #[serde(rename = "U")]
    relays: usize,
    bits: u64,
    errors: u64,
    ber: f64,
    ci_half_width: f64,
    seed: u64,
}

#[derive(Serialize)]
struct ConvergenceRow<'a> {
    detector: &'a str,
    iteration: usize,
    ensemble_mse: f64,
    trials: usize,
    seed: u64,
}

#[derive(Serialize)]
struct TapRow {
    realization_id: usize,
    tap_index: usize,
    re: f64,
    im: f64,
    power: f64,
}

fn write_atomic<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut writer = csv::Writer::from_writer(tmp.as_file());
        for row in rows {
            writer.serialize(row).map_err(io::Error::other)?;
        }
        writer.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Columns `experiment,detector,snr_db,fd_norm,delta,U,bits,errors,ber,ci_half_width,seed`.
pub fn write_ber_csv(path: &Path, records: &[BerRecord]) -> io::Result<()> {
    write_atomic(
        path,
        records.iter().map(|r| BerRow {
            experiment: &r.experiment,
            detector: r.detector,
            snr_db: r.snr_db,
            fd_norm: r.fd_norm,
            delta: r.delta,
            relays: r.relays,
            bits: r.bits,
            errors: r.errors,
            ber: r.ber,
            ci_half_width: r.ci_half_width,
            seed: r.seed,
        }),
    )
}

/// Columns `detector,iteration,ensemble_mse,trials,seed`. The closed-form
/// MMSE floor is written as detector `mmse_floor`, constant over iterations.
pub fn write_convergence_csv(path: &Path, res: &ConvergenceResult) -> io::Result<()> {
    let floor = vec![res.mmse_floor; res.lms.len()];
    let series: [(&str, &[f64]); 3] = [("lms", &res.lms), ("rls", &res.rls), ("mmse_floor", &floor)];
    write_atomic(
        path,
        series.iter().flat_map(|(name, values)| {
            values.iter().enumerate().map(move |(i, &v)| ConvergenceRow {
                detector: name,
                iteration: i + 1,
                ensemble_mse: v,
                trials: res.trials,
                seed: res.seed,
            })
        }),
    )
}

/// Columns `realization_id,tap_index,re,im,power`.
pub fn write_channel_csv(path: &Path, realizations: &[Vec<Complex64>]) -> io::Result<()> {
    write_atomic(
        path,
        realizations.iter().enumerate().flat_map(|(id, taps)| {
            taps.iter().enumerate().map(move |(l, t)| TapRow {
                realization_id: id,
                tap_index: l,
                re: t.re,
                im: t.im,
                power: t.norm_sqr(),
            })
        }),
    )
}
