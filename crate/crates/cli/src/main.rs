use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use hybrid_tsac::channel::ArrayGeometry;
use hybrid_tsac::combiners::{self, write_matrix, AngleCodebook};
use hybrid_tsac::config::parse_config_with_overrides;
use hybrid_tsac::linalg::CMat;
use hybrid_tsac::report::emit_csv;
use hybrid_tsac::simulation::{db_to_linear, trial_channel};
use hybrid_tsac::validation::{run_validation, ValidationOptions};
use hybrid_tsac::{run_sweep, AdcModel, SweepConfig};

#[derive(Parser)]
#[command(name = "tsac", version, about = "Two-stage analog combining sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write the results as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override a configuration key, e.g. `--set trials=50`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Dump the channel and combiner matrices of the first trial.
    Design {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the built-in numerical checks.
    Validate,
}

fn load_config(path: &Path, overrides: &[String]) -> Result<SweepConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config_with_overrides(&text, overrides)
        .with_context(|| format!("invalid configuration {}", path.display()))
}

fn dump(path: &Path, m: &CMat) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_matrix(&mut w, m)
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {}", path.display()))
}

fn design(config: &SweepConfig, out: &Path) -> Result<usize> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let adc = AdcModel::new(config.bits)?;
    // The greedy design is SNR dependent; dump it for the first SNR point.
    let snr = db_to_linear(config.snr_db[0]);
    let mut written = 0;
    for (point, (n_r, n_rfs)) in config.grid.points().into_iter().enumerate() {
        let channel = trial_channel(config, point, 0)?;
        let h = channel.matrix();
        dump(&out.join(format!("channel_nr{n_r}.txt")), h)?;
        written += 1;
        let geometry = ArrayGeometry::half_wavelength(n_r)?;
        let book = AngleCodebook::new(&geometry, config.codebook_size.unwrap_or(n_r))?;
        for n_rf in n_rfs {
            for &tag in &config.designs {
                let c = combiners::build(tag, h, n_rf, &book, snr, &adc)?;
                let stem = format!("{}_nr{n_r}_nrf{n_rf}", tag.as_str().to_lowercase());
                dump(&out.join(format!("{stem}_w1.txt")), c.w1())?;
                dump(&out.join(format!("{stem}_w2.txt")), c.w2())?;
                dump(&out.join(format!("{stem}_effective.txt")), c.effective())?;
                written += 3;
            }
        }
    }
    Ok(written)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep {
            config,
            out,
            overrides,
        } => {
            let cfg = load_config(&config, &overrides)?;
            let result = run_sweep(&cfg)?;
            emit_csv(&result, &out)?;
            eprintln!("wrote {} rows to {}", result.rows().len(), out.display());
            Ok(true)
        }
        Command::Design {
            config,
            out,
            overrides,
        } => {
            let cfg = load_config(&config, &overrides)?;
            let n = design(&cfg, &out)?;
            eprintln!("wrote {n} matrices to {}", out.display());
            Ok(true)
        }
        Command::Validate => {
            let checks = run_validation(&ValidationOptions::default())?;
            for c in &checks {
                println!("{c}");
            }
            Ok(checks.iter().all(|c| c.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
