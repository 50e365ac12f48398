use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lindblad_relax_cli::{load_config, run, Overrides, Scenario};

/// Propagate Lindblad master equations and certify relaxation.
#[derive(Debug, Parser)]
#[command(name = "lindblad-relax", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the random initial states.
    #[arg(long)]
    seed: Option<u64>,
    /// certify, evolve, otto or commutant.
    #[arg(long)]
    scenario: Option<Scenario>,
    /// Number of grid samples.
    #[arg(long)]
    samples: Option<usize>,
}

const THREADS_VAR: &str = "LINDBLAD_RELAX_THREADS";

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = load_config(&cli.config).and_then(|mut cfg| {
        cfg.apply(&Overrides {
            scenario: cli.scenario,
            seed: cli.seed,
            samples: cli.samples,
            output_dir: cli.out.clone(),
        });
        run(&cfg).map(|report| (cfg, report))
    });
    match result {
        Ok((cfg, report)) => {
            let verdict = report
                .certification
                .as_ref()
                .map(|c| format!("verdict {}", serde_json::to_string(&c.verdict).unwrap_or_default()))
                .or_else(|| {
                    report
                        .commutant
                        .as_ref()
                        .map(|c| format!("commutant dimension {}", c.commutant_dim))
                })
                .unwrap_or_default();
            println!(
                "{}: {verdict}; artifacts in {}",
                cfg.scenario,
                cfg.output_dir().display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
