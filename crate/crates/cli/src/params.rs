//! The flat parameter table shared by every subcommand.
//!
//! A config file is a single flat TOML table whose keys mirror the long
//! flags; values given on the command line override the file.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Curve exponent a (phi(xi) = |xi|^a).
    #[arg(long)]
    pub a: Option<f64>,

    /// Decomposition exponent b (block width delta^(1/b)).
    #[arg(long)]
    pub b: Option<f64>,

    /// Dyadic delta ladder, e.g. `2^-4..2^-10` or a single `2^-8`.
    #[arg(long)]
    pub delta: Option<String>,

    /// Dyadic torus-size ladder, e.g. `2^6..2^12`.
    #[arg(long)]
    pub n: Option<String>,

    /// RNG seed; mandatory for randomized audits.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Number of randomized queries/audits.
    #[arg(long)]
    pub count: Option<u64>,

    /// Number of random masked fields per delta rung (ratio command).
    #[arg(long)]
    pub random_fields: Option<usize>,

    /// Torus data family: `dirichlet` or `concentrated`.
    #[arg(long)]
    pub family: Option<String>,

    /// Block separations for the bilinear ladder, e.g. `8,16,32,64`.
    #[arg(long)]
    pub separations: Option<String>,

    /// Block counts for the orthogonal ladder, e.g. `4,8,16,32`.
    #[arg(long)]
    pub blocks: Option<String>,

    /// First block index for a single bilinear pair.
    #[arg(long)]
    pub k: Option<i64>,

    /// Second block index for a single bilinear pair.
    #[arg(long)]
    pub j: Option<i64>,

    /// Density samples per unit block (bilinear quadrature resolution).
    #[arg(long)]
    pub samples: Option<usize>,

    /// Spatial oversampling factor for field synthesis (>= 2).
    #[arg(long)]
    pub oversample: Option<usize>,

    /// Run the brute-force oracle alongside the fast counter.
    #[arg(long, default_value_t = false)]
    #[serde(default)]
    pub oracle: bool,

    /// Input CSV for the fit command.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// x column name for the fit command.
    #[arg(long)]
    pub xcol: Option<String>,

    /// y column name for the fit command.
    #[arg(long)]
    pub ycol: Option<String>,

    /// Drop the n coarsest rungs before fitting.
    #[arg(long)]
    pub drop_coarsest: Option<usize>,

    /// Output directory for CSV and manifest files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Params {
    /// File values overlaid by any explicitly given flags.
    pub fn resolve(file: Params, flags: Params) -> Params {
        Params {
            a: flags.a.or(file.a),
            b: flags.b.or(file.b),
            delta: flags.delta.or(file.delta),
            n: flags.n.or(file.n),
            seed: flags.seed.or(file.seed),
            count: flags.count.or(file.count),
            random_fields: flags.random_fields.or(file.random_fields),
            family: flags.family.or(file.family),
            separations: flags.separations.or(file.separations),
            blocks: flags.blocks.or(file.blocks),
            k: flags.k.or(file.k),
            j: flags.j.or(file.j),
            samples: flags.samples.or(file.samples),
            oversample: flags.oversample.or(file.oversample),
            oracle: flags.oracle || file.oracle,
            input: flags.input.or(file.input),
            xcol: flags.xcol.or(file.xcol),
            ycol: flags.ycol.or(file.ycol),
            drop_coarsest: flags.drop_coarsest.or(file.drop_coarsest),
            out: flags.out.or(file.out),
        }
    }

    pub fn from_toml_file(path: &std::path::Path) -> Result<Params> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("bad config {}", path.display()))
    }

    /// SHA-256 of the resolved parameter snapshot (hex, truncated to 16
    /// chars); stamped into every result row and the manifest. The output
    /// location is not part of the experiment identity.
    pub fn config_hash(&self, command: &str) -> String {
        let mut identity = self.clone();
        identity.out = None;
        let snapshot =
            serde_json::to_string(&(command, &identity)).expect("parameter serialization");
        let digest = Sha256::digest(snapshot.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }

    pub fn require_a(&self) -> Result<f64> {
        self.a.context("missing required parameter --a")
    }

    pub fn require_b(&self) -> Result<f64> {
        self.b.context("missing required parameter --b")
    }

    pub fn require_delta(&self) -> Result<&str> {
        self.delta.as_deref().context("missing required parameter --delta")
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.context("missing required parameter --seed (randomized audit)")
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
