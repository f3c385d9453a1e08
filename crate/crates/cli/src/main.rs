use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hysmc::models::Study;
use hysmc::smc::Decision;
use hysmc_cli::{
    calibrate, exit_code, render_calibration, render_report, render_table_row, run_table, table_header, verify,
    write_trajectory_csv, BoundUnit, CliError, TableOptions, VerifyOptions,
};

#[derive(Parser)]
#[command(name = "hysmc", version, about = "Statistical model checking of hybrid automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Only {
    Cardiac,
    Circadian,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a property holds with probability 1 on a model.
    Verify {
        /// Model file, or `builtin:cardiac?...` / `builtin:circadian?...`.
        #[arg(long)]
        model: String,
        /// Property file or inline formula.
        #[arg(long)]
        property: String,
        /// Indifference region width.
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        /// Type I error bound.
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        /// Trajectory length in steps (defaults to the model horizon).
        #[arg(long = "K")]
        steps: Option<usize>,
        /// Intermediate time points per step.
        #[arg(long = "J", default_value_t = 10)]
        points: usize,
        /// RK4 substeps per step.
        #[arg(long, default_value_t = 100)]
        substeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Unit of the temporal bounds in the property.
        #[arg(long, value_enum, default_value_t = BoundUnit::Time)]
        bound_unit: BoundUnit,
        /// Write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the counterexample trajectory (CSV) into this directory.
        #[arg(long)]
        dump_trajectories: Option<PathBuf>,
    },
    /// Run the reference property table against the builtin models.
    Table3 {
        #[arg(long, value_enum)]
        only: Option<Only>,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long = "J", default_value_t = 10)]
        points: usize,
        #[arg(long, default_value_t = 10)]
        substeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check the test's error rates on synthetic Bernoulli samples.
    Calibrate {
        /// Per-sample satisfaction probability.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long, default_value_t = 1000)]
        repetitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn write_json<T: Serialize>(path: &PathBuf, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    std::fs::write(path, text + "\n").map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Verify {
            model,
            property,
            delta,
            alpha,
            steps,
            points,
            substeps,
            seed,
            threads,
            bound_unit,
            json,
            dump_trajectories,
        } => {
            let opts = VerifyOptions {
                model,
                property,
                delta,
                alpha,
                steps,
                points,
                substeps,
                seed,
                threads,
                bound_unit,
            };
            let (report, cx, h) = verify(&opts)?;
            print!("{}", render_report(&report));
            if let Some(path) = &json {
                write_json(path, &report)?;
            }
            if let (Some(dir), Some(t)) = (&dump_trajectories, &cx) {
                let io = |source| CliError::Io {
                    path: dir.display().to_string(),
                    source,
                };
                std::fs::create_dir_all(dir).map_err(io)?;
                let file = dir.join(format!("counterexample-seed{}-{}.csv", t.seed, t.index));
                write_trajectory_csv(t, &h, &file).map_err(io)?;
                println!("{:<16} {}", "trajectory", file.display());
            }
            Ok(match report.decision {
                "H0" => exit_code(Decision::H0),
                "H1" => exit_code(Decision::H1),
                _ => exit_code(Decision::Inconclusive),
            })
        }
        Command::Table3 {
            only,
            delta,
            alpha,
            points,
            substeps,
            seed,
            threads,
            json,
        } => {
            let opts = TableOptions {
                only: only.map(|o| match o {
                    Only::Cardiac => Study::Cardiac,
                    Only::Circadian => Study::Circadian,
                }),
                delta,
                alpha,
                points,
                substeps,
                seed,
                threads,
            };
            println!("{}", table_header());
            let rows = run_table(&opts, |r| println!("{}", render_table_row(r)))?;
            let matched = rows.iter().filter(|r| r.matches).count();
            println!("{matched}/{} rows match", rows.len());
            if let Some(path) = &json {
                #[derive(Serialize)]
                struct TableReport<'a> {
                    schema: u32,
                    substeps: usize,
                    points: usize,
                    seed: u64,
                    rows: &'a [hysmc_cli::TableRow],
                }
                write_json(
                    path,
                    &TableReport {
                        schema: hysmc_cli::SCHEMA,
                        substeps,
                        points,
                        seed,
                        rows: &rows,
                    },
                )?;
            }
            Ok(if matched == rows.len() { 0 } else { 1 })
        }
        Command::Calibrate {
            p,
            delta,
            alpha,
            repetitions,
            seed,
            json,
        } => {
            let c = calibrate(p, delta, alpha, repetitions, seed)?;
            print!("{}", render_calibration(&c));
            if let Some(path) = &json {
                write_json(path, &c)?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
