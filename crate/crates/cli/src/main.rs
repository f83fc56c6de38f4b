//! `rsf` — batch front-end for the reverse square function laboratory.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 an
//! assertion-style check (oracle comparison, bound audit) failed.

mod experiments;
mod ladder;
mod params;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use params::Params;

#[derive(Debug, Parser)]
#[command(name = "rsf", version, about = "Reverse square function estimate laboratory")]
struct Cli {
    /// Flat TOML config file mirroring the long flags; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Print the loss exponent rho(a, b).
    Rho(Params),
    /// Block overlap counts N(delta) across a delta ladder.
    Overlap(Params),
    /// Randomized sublevel-set bound audit.
    Sublevel(Params),
    /// L4 / square-function ratio ladder (extremizer and random fields).
    Ratio(Params),
    /// Log-log fit of one CSV column against another.
    Fit(Params),
    /// Perturbed Vinogradov quadruple counts, optionally oracle-checked.
    Vinogradov(Params),
    /// Torus Strichartz norm ladder and growth exponent.
    Strichartz(Params),
    /// Bilinear block norms and separation decay.
    Bilinear(Params),
    /// Weighted orthogonal square-function ratios.
    Orthogonal(Params),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rho(_) => "rho",
            Command::Overlap(_) => "overlap",
            Command::Sublevel(_) => "sublevel",
            Command::Ratio(_) => "ratio",
            Command::Fit(_) => "fit",
            Command::Vinogradov(_) => "vinogradov",
            Command::Strichartz(_) => "strichartz",
            Command::Bilinear(_) => "bilinear",
            Command::Orthogonal(_) => "orthogonal",
        }
    }

    fn flags(self) -> Params {
        match self {
            Command::Rho(p)
            | Command::Overlap(p)
            | Command::Sublevel(p)
            | Command::Ratio(p)
            | Command::Fit(p)
            | Command::Vinogradov(p)
            | Command::Strichartz(p)
            | Command::Bilinear(p)
            | Command::Orthogonal(p) => p,
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("RSF_THREADS") {
        let n: usize = v.parse().map_err(|_| {
            anyhow::anyhow!("RSF_THREADS must be a positive integer, got `{v}`")
        })?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    init_threads()?;
    let file_params = match &cli.config {
        Some(path) => Params::from_toml_file(path)?,
        None => Params::default(),
    };
    let name = cli.command.name();
    let resolved = Params::resolve(file_params, cli.command.flags());
    match name {
        "rho" => experiments::run_rho(&resolved),
        "overlap" => experiments::run_overlap(&resolved),
        "sublevel" => experiments::run_sublevel(&resolved),
        "ratio" => experiments::run_ratio(&resolved),
        "fit" => experiments::run_fit(&resolved),
        "vinogradov" => experiments::run_vinogradov(&resolved),
        "strichartz" => experiments::run_strichartz(&resolved),
        "bilinear" => experiments::run_bilinear(&resolved),
        "orthogonal" => experiments::run_orthogonal(&resolved),
        _ => unreachable!("clap enforces the command set"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version paths are successes; everything else is a
            // usage error (exit 1).
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(core) = e.downcast_ref::<rsf_core::Error>() {
                if let rsf_core::Error::MemoryGuard { .. } | rsf_core::Error::CapExceeded(..) =
                    core
                {
                    eprintln!(
                        "hint: shrink the ladder (coarser delta / smaller n) or lower \
                         --oversample to stay under the configured caps"
                    );
                }
            }
            ExitCode::from(1)
        }
    }
}
