// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Output directory used when `--out` is absent.
pub const OUT_DIR_ENV: &str = "DOOB_AP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "doob-ap",
    version,
    about = "Weighted Doob maximal inequalities on finite filtrations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the A_p characteristic and its per-node table.
    Ap {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 2.0, value_parser = exponent)]
        p: f64,
    },
    /// Print the Doob maximal function (tailed from --level, weighted by --v/--alpha).
    Maximal {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_name = "VALUES")]
        f: String,
        #[arg(long)]
        level: Option<usize>,
        #[command(flatten)]
        weight: WeightArgs,
    },
    /// Build principal sets and check their properties and the pointwise domination.
    Principal {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_name = "VALUES")]
        f: String,
        #[arg(long, default_value_t = 2.0, value_parser = base)]
        a: f64,
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// A single scale k; every nonempty scale when absent.
        #[arg(long, allow_negative_numbers = true)]
        scale: Option<i32>,
    },
    /// Stopping-time decomposition with its partition and chain checks.
    Stopping {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_name = "VALUES")]
        f: String,
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 2.0, value_parser = exponent)]
        p: f64,
        #[arg(long, default_value_t = 2.0, value_parser = base)]
        b: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Weighted bracket suite on seeded random instances.
    Verify {
        #[command(flatten)]
        space: SpaceArgs,
        /// Fixed exponent; drawn per instance when absent.
        #[arg(long, value_parser = exponent)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Power-weight sharpness table.
    Sharpness {
        #[arg(long, default_value_t = 2.0, value_parser = exponent)]
        p: f64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_parser = nonpositive_alpha,
              default_values_t = [-0.3, -0.5, -0.7, -0.9])]
        alpha: Vec<f64>,
        #[arg(long, value_name = "L", default_value_t = 14)]
        dyadic: usize,
        /// Ratio evaluations per weight in the extremal search.
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Table of the closed-form constants.
    Constants {
        #[arg(long, value_delimiter = ',', value_parser = exponent, default_values_t = [2.0])]
        p: Vec<f64>,
    },
    /// Write the phi/psi comparison as CSV and SVG.
    Figure1 {
        #[arg(long, default_value_t = 1.1, value_parser = exponent)]
        pmin: f64,
        #[arg(long, default_value_t = 10.0, value_parser = exponent)]
        pmax: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    /// Uniform dyadic space of depth L.
    #[arg(long, value_name = "L", conflicts_with = "space")]
    pub dyadic: Option<usize>,
    /// Space document in JSON.
    #[arg(long, value_name = "PATH")]
    pub space: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Weight values, comma separated, or @file holding a JSON array.
    #[arg(long, value_name = "VALUES", conflicts_with = "alpha")]
    pub v: Option<String>,
    /// Power weight x^alpha on a dyadic space.
    #[arg(long, allow_negative_numbers = true, value_parser = alpha)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Directory for CSV/SVG output; defaults to $DOOB_AP_OUT_DIR.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

impl OutArgs {
    pub fn dir(&self) -> Option<PathBuf> {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
    }
}

fn number(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("`{s}` is not a finite number"))
}

fn exponent(s: &str) -> Result<f64, String> {
    number(s).and_then(|p| {
        if p > 1.0 {
            Ok(p)
        } else {
            Err(format!("p must exceed 1, got {p}"))
        }
    })
}

fn base(s: &str) -> Result<f64, String> {
    number(s).and_then(|a| {
        if a > 1.0 {
            Ok(a)
        } else {
            Err(format!("base must exceed 1, got {a}"))
        }
    })
}

fn alpha(s: &str) -> Result<f64, String> {
    number(s).and_then(|a| {
        if a > -1.0 {
            Ok(a)
        } else {
            Err(format!("alpha must exceed -1, got {a}"))
        }
    })
}

fn nonpositive_alpha(s: &str) -> Result<f64, String> {
    alpha(s).and_then(|a| {
        if a <= 0.0 {
            Ok(a)
        } else {
            Err(format!("alpha must lie in (-1, 0], got {a}"))
        }
    })
}
