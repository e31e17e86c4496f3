use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qramsim::bounds::bounds;
use qramsim::channels::{make_channel, ChannelKind};
use qramsim::oracle::GateTable;
use qramsim_cli::commands::{config_bounds, entropy_csv, entropy_points};
use qramsim_cli::fitting::{fit_rows, read_sweep_csv, render_svg};
use qramsim_cli::output::write_atomic;
use qramsim_cli::validation::{run_validation, ValidationOptions};
use qramsim_cli::{run_sweep, CliError, ExperimentConfig, Overrides, VariantName, EXIT_OK};

#[derive(Parser)]
#[command(name = "qramsim", version, about = "Noisy QRAM query simulations")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; overrides QRAMSIM_WORKERS and the config.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory; overrides QRAMSIM_OUT and the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG chart.
    #[arg(long, global = true)]
    svg: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo fidelity sweep over the config's address widths and datasets.
    Sweep,
    /// Oracle cross-checks of the sparse engine and the Monte-Carlo estimator.
    Validate {
        /// Run a reduced suite.
        #[arg(long)]
        quick: bool,
        /// Replace every gate of this kind with the identity in the dense engine.
        #[arg(long, value_name = "KIND")]
        fault_gate: Option<String>,
    },
    /// Log-log scaling fits of a sweep CSV.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        /// Smallest address width included in the fit.
        #[arg(long, default_value_t = 3)]
        min_log_n: usize,
    },
    /// Router entanglement entropy per tree level.
    Entropy {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "bb3")]
        variant: String,
    },
    /// Analytic infidelity bounds, from --config or from explicit parameters.
    Bounds {
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "depolarizing")]
        channel: String,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Hybrid iteration count.
        #[arg(long = "M")]
        big_m: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qramsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn overrides(cli: &Cli) -> Result<Overrides, CliError> {
    Overrides { seed: cli.seed, workers: cli.workers, out: cli.out.clone() }.with_env()
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    ExperimentConfig::load(path)?.apply(&overrides(cli)?)
}

/// Writes `text` to `dir/name` when an output directory is set, else prints it.
fn emit(dir: Option<&Path>, name: &str, text: &str) -> Result<(), CliError> {
    match dir {
        Some(d) => {
            let path = d.join(name);
            write_atomic(&path, text.as_bytes())?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn parse_variant(s: &str) -> Result<VariantName, CliError> {
    VariantName::parse(s).ok_or_else(|| {
        let names: Vec<&str> = VariantName::ALL.iter().map(|v| v.as_str()).collect();
        CliError::Config(format!("unknown variant {s:?}; expected one of {}", names.join(", ")))
    })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Sweep => {
            let cfg = load_config(&cli)?;
            let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("qramsim-out"));
            let result = run_sweep(&cfg, |r| {
                eprintln!("n={} dataset_seed={} F={:.9} +/- {:.2e}", r.n, r.dataset_seed, r.mean_fidelity, r.std_error)
            })?;
            for p in result.write(&dir)? {
                eprintln!("wrote {}", p.display());
            }
            if cli.svg {
                let svg = render_svg(&fit_rows(&result.rows, 1));
                write_atomic(&dir.join("sweep.svg"), svg.as_bytes())?;
            }
            for p in &result.points {
                println!(
                    "n={} T={} infidelity={:.6e} se={:.2e} bound_eq28={:.4e}",
                    p.n, p.t, p.mean_infidelity, p.std_error, p.bound_eq28
                );
            }
            Ok(EXIT_OK)
        }
        Command::Validate { quick, fault_gate } => {
            let o = overrides(&cli)?;
            let (mut seed, mut workers) = (0x5eed, 1);
            if cli.config.is_some() {
                let cfg = load_config(&cli)?;
                seed = cfg.master_seed;
                workers = cfg.workers;
            }
            seed = o.seed.unwrap_or(seed);
            workers = o.workers.unwrap_or(workers).max(1);
            let mut opts =
                if *quick { ValidationOptions::quick(seed, workers) } else { ValidationOptions::full(seed, workers) };
            if let Some(kind) = fault_gate {
                opts.table = GateTable::with_fault(kind);
            }
            let report = run_validation(&opts, |c| {
                println!(
                    "{} {:<18} {:<40} deviation={:.3e} tolerance={:.3e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.suite,
                    c.name,
                    c.deviation,
                    c.tolerance
                )
            })?;
            if let Some(dir) = &o.out {
                write_atomic(&dir.join("validation.json"), json(&report).as_bytes())?;
            }
            let failed = report.failures().count();
            if failed > 0 {
                return Err(CliError::Validation(format!("{failed} of {} checks failed", report.checks.len())));
            }
            println!("all {} checks passed", report.checks.len());
            Ok(EXIT_OK)
        }
        Command::Fit { csv, min_log_n } => {
            let rows = read_sweep_csv(csv)?;
            let report = fit_rows(&rows, *min_log_n);
            let out = overrides(&cli)?.out;
            emit(out.as_deref(), "fit.json", &json(&report))?;
            if cli.svg {
                let dir = out.clone().or_else(|| csv.parent().map(Path::to_path_buf)).unwrap_or_default();
                let path = dir.join("fit.svg");
                write_atomic(&path, render_svg(&report).as_bytes())?;
                eprintln!("wrote {}", path.display());
            }
            Ok(EXIT_OK)
        }
        Command::Entropy { n, variant } => {
            let points = entropy_points(parse_variant(variant)?, *n)?;
            emit(overrides(&cli)?.out.as_deref(), "entropy.csv", &entropy_csv(&points))?;
            Ok(EXIT_OK)
        }
        Command::Bounds { variant, n, channel, epsilon, big_m } => {
            let out = overrides(&cli)?.out;
            if cli.config.is_some() {
                emit(out.as_deref(), "bounds.json", &json(&config_bounds(&load_config(&cli)?)?))?;
                return Ok(EXIT_OK);
            }
            let (Some(variant), Some(n), Some(eps)) = (variant, n, epsilon) else {
                return Err(CliError::Config("bounds needs --config or all of --variant, --n and --epsilon".into()));
            };
            let v = parse_variant(variant)?;
            let kind: ChannelKind = serde_json::from_value(serde_json::Value::String(channel.clone()))
                .map_err(|_| CliError::Config(format!("unknown channel {channel:?}")))?;
            let ch = make_channel(kind, v.dim(), *eps).map_err(|e| CliError::Config(e.to_string()))?;
            let c = v.build(*n, big_m.unwrap_or(1), None)?;
            let report = bounds(*eps, ch.epsilon_w, c.t(), *n, c.summary().big_m);
            emit(out.as_deref(), "bounds.json", &json(&report))?;
            Ok(EXIT_OK)
        }
    }
}
