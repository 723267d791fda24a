use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chainbath::experiments::{estimate, run_scenario, write_outputs, Scenario, ScenarioConfig};
use chainbath::Error;

#[derive(Parser)]
#[command(
    name = "chainbath",
    version,
    about = "Exact Gaussian dynamics of an oscillator coupled to a finite chain bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its CSV and metadata outputs.
    Run {
        config: PathBuf,
        /// Output directory; falls back to run.out_dir in the config, then
        /// $CHAINBATH_OUT_DIR, then ./out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the sweep (0 = one per CPU).
        #[arg(long)]
        workers: Option<usize>,
        /// Override run.dt from the config.
        #[arg(long)]
        dt: Option<f64>,
        /// Override run.t_final from the config.
        #[arg(long)]
        t_final: Option<f64>,
        /// Also write a matplotlib quick-look script next to the CSV.
        #[arg(long)]
        emit_plots: bool,
    },
    /// List scenario names and what each one computes.
    ListScenarios,
    /// Parse and validate a config without running anything.
    Validate { config: PathBuf },
    /// Print sweep size and recurrence horizons without running.
    Estimate { config: PathBuf },
}

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_HARD: u8 = 3;

/// Configuration mistakes exit 1; everything else that kills a run exits 3.
fn classify(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::TomlParse(_) | Error::InvalidModel(_) => EXIT_CONFIG,
        _ => EXIT_HARD,
    }
}

fn load(config: &PathBuf) -> Result<ScenarioConfig, u8> {
    ScenarioConfig::from_file(config).map_err(|e| {
        eprintln!("error: {e}");
        if matches!(e, Error::Io(_)) {
            eprintln!("(while reading {})", config.display());
        }
        EXIT_CONFIG
    })
}

fn cmd_run(
    config: PathBuf,
    out: Option<PathBuf>,
    workers: Option<usize>,
    dt: Option<f64>,
    t_final: Option<f64>,
    emit_plots: bool,
) -> u8 {
    let mut cfg = match load(&config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(dt) = dt {
        cfg.run.dt = Some(dt);
    }
    if let Some(t) = t_final {
        cfg.run.t_final = Some(t);
    }
    if let Some(w) = workers {
        cfg.run.workers = Some(w);
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    let out_dir = out
        .or_else(|| cfg.run.out_dir.clone())
        .or_else(|| std::env::var_os("CHAINBATH_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let result = match run_scenario(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return classify(&e);
        }
    };
    let written = match write_outputs(&result, &out_dir, emit_plots) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error writing outputs: {e}");
            return EXIT_HARD;
        }
    };

    println!(
        "{}: {} rows in {:.1} s",
        result.meta.scenario,
        result.rows.len(),
        result.meta.elapsed_seconds
    );
    println!("  table: {}", written.csv.display());
    println!("  meta:  {}", written.meta.display());
    if let Some(p) = &written.plot {
        println!("  plot:  {}", p.display());
    }
    if result.meta.failed_cells.is_empty() {
        EXIT_OK
    } else {
        eprintln!(
            "warning: {} of {} cells failed (NaN rows; see failed_cells in the meta file)",
            result.meta.failed_cells.len(),
            result.rows.len()
        );
        EXIT_PARTIAL
    }
}

fn cmd_validate(config: PathBuf) -> u8 {
    match load(&config) {
        Ok(cfg) => {
            let n_axes = cfg.sweep.axis.len();
            println!(
                "ok: {} ({n_axes} {})",
                cfg.scenario.id(),
                if n_axes == 1 { "axis" } else { "axes" }
            );
            EXIT_OK
        }
        Err(code) => code,
    }
}

fn cmd_estimate(config: PathBuf) -> u8 {
    let cfg = match load(&config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match estimate(&cfg) {
        Ok(report) => {
            print!("{report}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            classify(&e)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, workers, dt, t_final, emit_plots } => {
            cmd_run(config, out, workers, dt, t_final, emit_plots)
        }
        Command::ListScenarios => {
            for s in Scenario::all() {
                println!("{:<26} {}", s.id(), s.description());
            }
            EXIT_OK
        }
        Command::Validate { config } => cmd_validate(config),
        Command::Estimate { config } => cmd_estimate(config),
    };
    ExitCode::from(code)
}
