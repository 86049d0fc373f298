use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use scfde::detectors::Detector;
use scfde::txrx::Modulation;

#[derive(Debug, Parser)]
#[command(name = "scfde", version, about = "Monte Carlo simulator for SC-FDE amplify-and-forward relay links")]
pub struct Cli {
    /// Worker threads for the trial pool (default: one per core)
    #[arg(long, global = true, env = "SCFDE_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// BER versus Eb/N0 for a set of detectors
    Ber {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        link: LinkArgs,
        /// Normalized Doppler values, one sweep each (e.g. 0,0.001,0.01)
        #[arg(long, value_delimiter = ',')]
        fd: Option<Vec<f64>>,
    },
    /// Ensemble learning curves of the LMS and RLS equalizers
    Converge {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        link: LinkArgs,
        /// Eb/N0 in dB
        #[arg(long, allow_hyphen_values = true)]
        ebn0: Option<f64>,
        /// Normalized Doppler
        #[arg(long)]
        fd: Option<f64>,
    },
    /// BER versus relay position
    Placement {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        link: LinkArgs,
        /// Source-relay distance fractions, as a list or start:step:stop
        #[arg(long, value_parser = parse_grid)]
        deltas: Option<Grid>,
        /// Normalized Doppler
        #[arg(long)]
        fd: Option<f64>,
    },
    /// RLS BER versus number of relays
    Multirelay {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        link: LinkArgs,
        /// Relay counts (e.g. 1,2,3)
        #[arg(long, value_delimiter = ',')]
        relays: Option<Vec<usize>>,
        /// Normalized Doppler values
        #[arg(long, value_delimiter = ',')]
        fd: Option<Vec<f64>>,
    },
    /// Dump quantized channel tap realizations
    ChannelDump {
        #[command(flatten)]
        common: Common,
        /// Taps per realization
        #[arg(long = "L")]
        taps: Option<usize>,
        /// Number of realizations
        #[arg(long)]
        realizations: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON config: a flat settings object or a run manifest
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LinkArgs {
    /// Detectors, comma separated (mrc, mmse, ml, lms, rls)
    #[arg(long, value_delimiter = ',')]
    pub detectors: Option<Vec<Detector>>,
    /// Taps per hop; the cyclic prefix follows unless --cp is given
    #[arg(long = "L")]
    pub taps: Option<usize>,
    /// Block length
    #[arg(long = "N")]
    pub block_len: Option<usize>,
    /// Cyclic prefix length
    #[arg(long)]
    pub cp: Option<usize>,
    #[arg(long)]
    pub scheme: Option<Modulation>,
    /// Eb/N0 grid in dB, as a list or start:step:stop
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub snr: Option<Grid>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// LMS step size
    #[arg(long)]
    pub mu: Option<f64>,
    /// RLS forgetting factor
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Training blocks per trial
    #[arg(long)]
    pub pilots: Option<usize>,
    /// Data blocks per trial
    #[arg(long)]
    pub data_frames: Option<usize>,
    /// Relay position as a fraction of the source-destination distance
    #[arg(long)]
    pub delta: Option<f64>,
    /// Path-loss exponent
    #[arg(long)]
    pub eta: Option<f64>,
}

/// A list of values given either explicitly or as an inclusive range.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

/// Parses `a,b,c` or `start:step:stop` (inclusive).
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (number(start)?, number(step)?, number(stop)?);
            if step <= 0.0 || stop < start {
                return Err(format!("empty range {s:?}"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                return Err(format!("range {s:?} has too many points"));
            }
            // Rounded so 0.1:0.1:0.9 yields 0.3, not 0.30000000000000004.
            Ok(Grid((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()))
        }
        [list] => {
            let values = list.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
            Ok(Grid(values))
        }
        _ => Err(format!("expected a list or start:step:stop, got {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:2:30").unwrap().0.len(), 16);
        assert_eq!(parse_grid("0.1:0.1:0.9").unwrap().0, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        assert_eq!(parse_grid("5").unwrap().0, vec![5.0]);
        assert_eq!(parse_grid("-2,0,10").unwrap().0, vec![-2.0, 0.0, 10.0]);
        assert!(parse_grid("1:0:5").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("nan").is_err());
    }
}
