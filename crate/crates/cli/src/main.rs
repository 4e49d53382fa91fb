use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use caputo_pme::config::RunConfig;
use caputo_pme::refine::{refine, Knob};
use caputo_pme::run::solve_to_dir;
use caputo_pme::solver::format_float;
use caputo_pme::verify::{run_suite, Suite, VerifyOptions};
use caputo_pme::{build_weights, Error, FractionalOrder};
use clap::{Parser, Subcommand};

const EXIT_FAILED: u8 = 1;
const EXIT_NONCONVERGENCE: u8 = 2;
const EXIT_BAD_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "caputo-pme", version, about = "Discrete Caputo calculus and a time-fractional porous-medium solver")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the random suites; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the weights λ_1..λ_n as CSV (`k,lambda_k`).
    Weights {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: usize,
    },
    /// Run verification suites and print a JSON summary.
    Verify {
        /// weights, caputo, ibp, compactness, spectral, solver or all.
        #[arg(default_value = "all")]
        suite: String,
        /// Add DELTA to λ_K before checking, as `K:DELTA`.
        #[arg(long, value_name = "K:DELTA")]
        perturb_weight: Option<String>,
    },
    /// Run the solver and write the ledger, diagnostics and snapshots.
    Solve,
    /// Refine one knob over several levels and compare consecutive runs.
    Refine {
        /// tau, eps or rho.
        #[arg(long)]
        knob: String,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
}

/// Domain failures that are reported as a result rather than an error.
struct Failed(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Failed(msg))) => {
            eprintln!("failed: {msg}");
            ExitCode::from(EXIT_FAILED)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. }) => EXIT_NONCONVERGENCE,
        _ => EXIT_BAD_INPUT,
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<Option<Failed>> {
    match &cli.command {
        Command::Weights { alpha, n } => {
            cmd_weights(*alpha, *n, cli.out.as_deref())?;
            Ok(None)
        }
        Command::Verify { suite, perturb_weight } => {
            let suite: Suite = suite.parse()?;
            let perturb_weight = perturb_weight.as_deref().map(parse_perturbation).transpose()?;
            let seed = match (cli.seed, &cli.config) {
                (Some(s), _) => s,
                (None, Some(path)) => load_config(path)?.seed,
                (None, None) => VerifyOptions::default().seed,
            };
            let summary = run_suite(suite, &VerifyOptions { seed, perturb_weight })?;
            print_json(&summary)?;
            Ok(summary.first_failure.map(Failed))
        }
        Command::Solve => {
            let config = require_config(&cli)?;
            let out = cli.out.clone().unwrap_or_else(|| config.output_dir.clone());
            let outcome = solve_to_dir(&config, &out)?;
            print_json(&outcome.report)?;
            let failed: Vec<_> = outcome.report.verdicts.iter().filter(|v| !v.passed).map(|v| v.name).collect();
            Ok(if !failed.is_empty() {
                Some(Failed(format!("verdicts {}", failed.join(", "))))
            } else if !outcome.report.certified {
                Some(Failed("run was clipped and is not certified".into()))
            } else {
                None
            })
        }
        Command::Refine { knob, levels } => {
            let config = require_config(&cli)?;
            let knob: Knob = knob.parse()?;
            let report = refine(&config, knob, *levels)?;
            if let Some(out) = &cli.out {
                fs::create_dir_all(out)?;
                let text = serde_json::to_string_pretty(&report)? + "\n";
                fs::write(out.join(format!("refine_{knob}.json")), text)?;
            }
            print_json(&report)?;
            Ok((!report.contract_holds).then(|| Failed(format!("{knob} differences increased across the last two pairs"))))
        }
    }
}

fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(RunConfig::from_json(&text)?)
}

fn require_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let path = cli.config.as_deref().ok_or_else(|| anyhow!("--config is required"))?;
    let mut config = load_config(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn parse_perturbation(s: &str) -> anyhow::Result<(usize, f64)> {
    let (k, delta) = s.split_once(':').ok_or_else(|| anyhow!("expected K:DELTA, got {s:?}"))?;
    let k: usize = k.trim().parse().with_context(|| format!("bad index in {s:?}"))?;
    let delta: f64 = delta.trim().parse().with_context(|| format!("bad delta in {s:?}"))?;
    if k == 0 {
        return Err(anyhow!("weights are indexed from 1"));
    }
    Ok((k, delta))
}

fn cmd_weights(alpha: f64, n: usize, out: Option<&Path>) -> anyhow::Result<()> {
    let w = build_weights(FractionalOrder::new(alpha)?, n)?;
    let mut text = String::from("k,lambda_k\n");
    for (i, l) in w.as_slice().iter().enumerate() {
        text.push_str(&format!("{},{}\n", i + 1, format_float(*l)));
    }
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("weights.csv"), text)?;
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}
