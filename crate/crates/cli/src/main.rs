mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Blaschke,
    Busemann,
}

#[derive(Debug, Parser)]
#[command(
    name = "convexlab",
    version,
    about = "Hilbert and Blaschke geometry on convex projective domains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Domain spec (JSON).
    #[arg(long, global = true)]
    pub domain: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Grid spacing of the Monge-Ampere solve.
    #[arg(long, global = true, default_value_t = 1.0 / 64.0)]
    pub h: f64,
    /// Newton tolerance on the log-residual.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the affine sphere and dump u, h^B and curvature.
    Solve,
    /// Summary diagnostics of the Blaschke metric plus the Hilbert norm field.
    Metrics,
    /// α-profiles along sample chords with the slope-bound check.
    Chord {
        #[arg(long, default_value_t = 8)]
        chords: usize,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Seeded audit of the Blaschke-Hilbert comparison inequalities.
    Compare {
        #[arg(long, default_value_t = 200)]
        pairs: usize,
    },
    /// Ball volumes and volume-entropy estimate.
    Entropy {
        /// Radii, comma separated. Defaults to 0.5,1,1.5,2 cut at R_max.
        #[arg(long = "R", value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = Kind::Blaschke)]
        kind: Kind,
        /// Base point `x,y` in the normalized chart. Defaults to the centroid.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        base: Option<Vec<f64>>,
        /// Samples of the ball-inclusion audit.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Translation lengths of short words in a generator set.
    Spectrum {
        #[arg(long)]
        generators: PathBuf,
        /// Word depth of the limit-set hull (ignored with --domain).
        #[arg(long, default_value_t = convexlab::spectrum::DEFAULT_DEPTH)]
        depth: usize,
        /// Orbit length for the Blaschke length bound.
        #[arg(long, default_value_t = 20)]
        n: usize,
    },
    /// SVG figures: unit-ball glyphs, α-profiles, log-volume curves.
    Plot {
        #[arg(long, default_value_t = 12)]
        glyphs: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = commands::run(&cli);
    let (files, code, message) = match result {
        Ok(o) => (o.files, if o.violated { 2 } else { 0 }, o.summary),
        Err(f) => (f.files, 1, format!("error: {}", f.message)),
    };
    if let Err(e) = output::write_all(&cli.out, &files, cli.force) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if code == 1 {
        eprintln!("{message}");
    } else {
        println!("{message}");
    }
    ExitCode::from(code)
}
