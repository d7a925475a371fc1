//! `evci-guard` — seeded, file-based pipeline for charging-depot telemetry
//! simulation, ΔSoC prediction, spoofing injection, and anomaly detection.
//!
//! Exit codes: 0 success; 1 usage or configuration error; 2 when `detect`
//! confirms at least one anomaly (scripting hook).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use evci_guard::pipeline::{
    default_out_root, run_detect, run_eval, run_gen, run_report, run_spoof, run_train,
    DetectArgs, EvalArgs, GenArgs, ReportArgs, SpoofArgs, TrainArgs, OUT_ENV_VAR,
};
use evci_guard::telemetry::PortId;

#[derive(Parser)]
#[command(
    name = "evci-guard",
    version,
    about = "Simulate charging-depot telemetry, train ΔSoC predictors, \
             inject SoC spoofing, and detect it",
    after_help = "Exit codes: 0 success, 1 usage/config error, 2 when \
                  detect confirms at least one anomaly."
)]
struct Cli {
    /// Output root directory (default: $EVCI_GUARD_OUT, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn parse_port(raw: &str) -> Result<PortId, String> {
    raw.parse::<PortId>().map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Simulate depot telemetry (writes gen/telemetry.csv + gen/sessions.csv).
    Gen {
        /// TOML simulation config; builtin defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's duration with whole days.
        #[arg(long)]
        days: Option<u32>,
    },
    /// Train per-port ridge predictors with cross-validated penalties and
    /// calibrate detection thresholds (writes train/…).
    Train {
        /// Cross-validation shuffle seed (default 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Train a single port (e.g. ev0_terra53) instead of all six.
        #[arg(long, value_parser = parse_port)]
        port: Option<PortId>,
    },
    /// Inject seeded spoofing attacks into the test-split ΔSoC (writes spoof/…).
    Spoof {
        /// Base seed for window placement and parameter draws (default 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Spoof a single port instead of all six.
        #[arg(long, value_parser = parse_port)]
        port: Option<PortId>,
        /// Attack window length in samples (default 10).
        #[arg(long)]
        window: Option<usize>,
        /// Attacks per class per port (default 10).
        #[arg(long)]
        per_class: Option<usize>,
    },
    /// Scan reported ΔSoC for anomalies (writes detect/verdicts.csv;
    /// exits 2 when anything is confirmed).
    Detect {
        /// Detect on a single port instead of all six.
        #[arg(long, value_parser = parse_port)]
        port: Option<PortId>,
        /// Override the calibrated per-port thresholds.
        #[arg(long)]
        threshold: Option<f64>,
        /// Confirmation window length (default 10).
        #[arg(long)]
        window: Option<usize>,
    },
    /// Score verdicts against the injection plan (writes eval/…).
    Eval,
    /// Combined summary with reference values from the original testbed
    /// study (writes report/summary.txt).
    Report,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help / --version land here too; they exit 0.
            let code = if err.use_stderr() { 1u8 } else { 0u8 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let out_root = cli.out.unwrap_or_else(default_out_root);

    let outcome = match cli.command {
        Command::Gen { config, seed, days } => run_gen(&GenArgs {
            out_root,
            config,
            seed,
            days,
        })
        .map(|manifest| {
            for path in &manifest.outputs {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }),
        Command::Train { seed, port } => run_train(&TrainArgs {
            out_root,
            seed,
            port,
        })
        .map(|manifest| {
            for path in &manifest.outputs {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }),
        Command::Spoof {
            seed,
            port,
            window,
            per_class,
        } => run_spoof(&SpoofArgs {
            out_root,
            seed,
            port,
            window,
            per_class,
        })
        .map(|(manifest, plan)| {
            println!("injected {} attack windows", plan.events().len());
            for path in &manifest.outputs {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }),
        Command::Detect {
            port,
            threshold,
            window,
        } => run_detect(&DetectArgs {
            out_root,
            port,
            threshold,
            window,
        })
        .map(|(manifest, verdicts)| {
            for path in &manifest.outputs {
                println!("wrote {}", path.display());
            }
            println!("confirmed {} anomalies", verdicts.len());
            if verdicts.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }),
        Command::Eval => run_eval(&EvalArgs { out_root }).map(|(manifest, report)| {
            print!("{}", report.render_text());
            for path in &manifest.outputs {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }),
        Command::Report => run_report(&ReportArgs { out_root }).map(|manifest| {
            for path in &manifest.outputs {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }),
    };

    outcome.unwrap_or_else(|err| {
        eprintln!("error: {err}");
        eprintln!("(outputs default to ${OUT_ENV_VAR} or ./out; see --help)");
        ExitCode::from(1)
    })
}
