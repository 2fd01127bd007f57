use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use layered_eit::geometry::{build_fitted_disk_mesh, pixelize};
use layered_eit::phantoms::validate_pclc;
use layered_eit::pipeline::{oracle_table, parse_config_str, run_pipeline, RunConfig};
use layered_eit::Error;

#[derive(Parser)]
#[command(
    name = "layered-eit",
    version,
    about = "Layered conductivity reconstruction from local ND data"
)]
struct Cli {
    /// error, warn, info, debug or trace
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate data for the configured phantom, reconstruct, and write all outputs.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Noise seed; overrides `noise.seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check the configuration and the phantom's layer assumptions.
    Validate { config: PathBuf },
    /// Compare FEM eigenvalues with the concentric-disk series.
    Oracle {
        #[arg(long, default_value_t = 0.02)]
        target_h: f64,
        #[arg(long, default_value_t = 16)]
        basis_size: usize,
        #[arg(long, default_value_t = 2.0)]
        sigma1: f64,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
    },
}

const EXIT_AMBIGUITY: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

fn config_failure(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn failure(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    })
}

fn load(path: &PathBuf) -> Result<(RunConfig, String), Error> {
    let text = fs::read_to_string(path)?;
    Ok((parse_config_str(&text)?, text))
}

fn run(config: PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> ExitCode {
    let (mut cfg, mut text) = match load(&config) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    if let Some(seed) = seed {
        cfg.noise.seed = seed;
        text = serde_json::to_string_pretty(&cfg).expect("config serializes");
    }
    let out = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match run_pipeline(&cfg, &text, &out) {
        Ok(o) => {
            println!(
                "termination: {}",
                serde_json::to_string(&o.report.termination)
                    .unwrap()
                    .trim_matches('"')
            );
            if let Some(reason) = &o.report.abort {
                println!("abort: {reason}");
                for d in &o.report.unresolved {
                    println!(
                        "  unresolved support: {} pixels in component {}",
                        d.pixels.len(),
                        d.parent
                    );
                }
            }
            println!("eps: {:e} ({})", o.eps.eps, o.eps.mode);
            println!(
                "layers: {} recovered, {} in truth",
                o.metrics.layers_recovered, o.metrics.layers_truth
            );
            for c in &o.metrics.components {
                let constant = c
                    .constant_recovered
                    .map_or("-".to_string(), |v| format!("{v:.4}"));
                println!(
                    "  layer {} component {}: jaccard {:.3}, constant {} (truth {})",
                    c.layer, c.component, c.jaccard, constant, c.constant_truth
                );
            }
            println!("field relative L2 error: {:.4}", o.metrics.field_rel_l2);
            println!("outputs: {}", out.display());
            match o.exit_code() {
                0 => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_AMBIGUITY),
            }
        }
        Err(e) => failure(&e),
    }
}

fn validate(config: PathBuf) -> ExitCode {
    let cfg = match load(&config) {
        Ok((c, _)) => c,
        Err(e) => return config_failure(&e),
    };
    let grid = build_fitted_disk_mesh(cfg.domain.radius, cfg.domain.target_h, cfg.h_px)
        .and_then(|mesh| pixelize(&mesh, cfg.h_px));
    let grid = match grid {
        Ok(g) => g,
        Err(e) => return failure(&e),
    };
    match validate_pclc(&cfg.phantom_spec(), &grid) {
        Ok(d) => {
            println!(
                "ok: {} layers on a {}x{} grid",
                d.n_layers(),
                grid.nx,
                grid.ny
            );
            for (j, layer) in d.layers.iter().enumerate() {
                for (n, c) in layer.iter().enumerate() {
                    println!(
                        "  layer {} component {n}: {} pixels, constant {}, parent {}",
                        j + 1,
                        c.pixels.len(),
                        c.constant,
                        c.parent
                    );
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => failure(&e),
    }
}

fn oracle(target_h: f64, basis_size: usize, sigma1: f64, radius: f64) -> ExitCode {
    match oracle_table(target_h, basis_size, sigma1, radius) {
        Ok(rows) => {
            println!(
                "{:>8} {:>5} {:>14} {:>14} {:>10}",
                "sigma1", "mode", "series", "fem", "rel.err"
            );
            for r in rows {
                println!(
                    "{:>8} {:>5} {:>14.8} {:>14.8} {:>10.2e}",
                    r.sigma1, r.mode, r.reference, r.computed, r.rel_error
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => failure(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .init();
    match cli.command {
        Command::Run { config, out, seed } => run(config, out, seed),
        Command::Validate { config } => validate(config),
        Command::Oracle {
            target_h,
            basis_size,
            sigma1,
            radius,
        } => oracle(target_h, basis_size, sigma1, radius),
    }
}
