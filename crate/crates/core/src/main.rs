use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fuzzy_prox::bridge::{verify_standard, GammaOptions, VerifyOptions};
use fuzzy_prox::sweep::{
    emit_report, level_constants, run_sweep, ConstantsOptions, Format, SweepConfig, SweepDocument,
};

#[derive(Parser)]
#[command(
    name = "fuzzy-prox",
    version,
    about = "Proximity bounds between fuzzy-sphere matrix algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Constants for every level in range and a report per (m, n) pair.
    Sweep {
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        /// Comma-separated m:n pairs; all pairs in range when omitted.
        #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
        pairs: Option<Vec<(usize, usize)>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        family_size: usize,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 2)]
        quadrature_margin: usize,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
    },
    /// Prints δ̂, γ̂^A and γ̂^B for one level.
    Constants {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        family_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        quadrature_margin: usize,
    },
    /// Checks the function–matrix bridge on the standard families.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 64)]
        family_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (m, n) = s
        .split_once(':')
        .ok_or_else(|| format!("expected m:n, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(m)?, parse(n)?))
}

fn run(cli: Cli) -> fuzzy_prox::Result<ExitCode> {
    match cli.command {
        Command::Sweep {
            n_min,
            n_max,
            pairs,
            seed,
            family_size,
            samples,
            epsilon,
            quadrature_margin,
            time_limit,
            out,
            format,
        } => {
            let config = SweepConfig {
                n_min,
                n_max,
                pairs,
                quadrature_margin,
                family_size,
                samples,
                seed,
                epsilon,
                time_limit_secs: time_limit,
                output_path: Some(out.display().to_string()),
                format,
                ..SweepConfig::default()
            };
            let output = run_sweep(&config)?;
            emit_report(&SweepDocument::new(&config, &output), format, &out)?;
            if output.truncated {
                eprintln!(
                    "time limit reached: {} of {} pairs written",
                    output.reports.len(),
                    config.pair_list().len()
                );
            }
            let violations = output.violations();
            if !violations.is_empty() {
                eprintln!("empirical distance exceeds the certified bound at {violations:?}");
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Constants {
            n,
            family_size,
            seed,
            quadrature_margin,
        } => {
            let c = level_constants(
                n,
                &ConstantsOptions {
                    quadrature_margin,
                    family_size,
                    seed,
                    ..ConstantsOptions::default()
                },
            )?;
            println!("n = {n}");
            println!("delta   = {:.6}", c.delta);
            println!("gammaA  = {:.6}", c.gamma_a);
            println!("gammaB  = {:.6}", c.gamma_b);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            n,
            epsilon,
            family_size,
            seed,
        } => {
            let v = verify_standard(
                n,
                2,
                &GammaOptions {
                    family_size,
                    seed,
                    ..GammaOptions::default()
                },
                VerifyOptions {
                    epsilon,
                    ..VerifyOptions::default()
                },
            )?;
            println!("{}", serde_json::to_string_pretty(&v.report)?);
            Ok(if v.report.passed && v.report.nondegenerate {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
