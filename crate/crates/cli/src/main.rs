//! `linfeat` command line.
//!
//! Exit codes: 0 success, 2 config error, 3 data error, 4 numeric error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use linfeat::casestudy::{cmd_casestudy, summary_text, RunConfig};
use linfeat::dataset::{
    apply_split, load_csv, synthesize, write_csv, FunctionalDataset, Layout, SplitSpec, SynthParams,
};
use linfeat::{Error, ErrorKind};

#[derive(Parser)]
#[command(
    name = "linfeat",
    version,
    about = "Feature coefficients and regression path analysis for functional data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full case study from a JSON config.
    ///
    /// Config keys and defaults:
    ///   data            {"csv": {"path", "layout"}} or {"synthetic": {n, p, smoothness, rank, noise_std, seed}}
    ///   split           optional path to a split JSON (train/test1/test2/outliers)
    ///   feature         {"feature": "sum_of_squares"} | {"feature": "sinusoidal", "period": 0.06}
    ///                   | {"feature": "linear", "coefficients": [...]}
    ///   response        {"mode": "from_feature"} (default) | {"mode": "csv_column", "path", "column"}
    ///   objective       "coefficient_distance" (default) | "prediction_distance"
    ///   lambda_range    [lo, hi], default [1e-10·s1², 1e8·s1²]
    ///   grid_points     200
    ///   cv_lambda_grid  default 60 log points over [1e-8·s1², 1e4·s1²]
    ///   k_max           10
    ///   folds           10
    ///   seed            0
    ///   zscore          false
    ///   output_dir      "linfeat-out", relative to the config file
    #[command(verbatim_doc_comment)]
    Casestudy {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long, env = "LINFEAT_OUTPUT_DIR")]
        output_dir: Option<PathBuf>,
        /// Suppress the summary on stdout.
        #[arg(long)]
        quiet: bool,
    },
    /// Generate a seeded low-rank smooth dataset and write it as CSV.
    Synthesize {
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        p: usize,
        #[arg(long, default_value_t = 1.0)]
        smoothness: f64,
        #[arg(long, default_value_t = 5)]
        rank: usize,
        #[arg(long, default_value_t = 1e-4)]
        noise_std: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load a CSV (and optional split) and print its shape as JSON.
    Ingest {
        #[arg(long)]
        csv: PathBuf,
        /// `rows` (one sample per row) or `columns`.
        #[arg(long, default_value = "rows")]
        layout: Layout,
        #[arg(long)]
        split: Option<PathBuf>,
        /// Write train/test1/test2 (or the whole dataset) as CSVs here.
        #[arg(long)]
        write_dir: Option<PathBuf>,
    },
    /// Re-emit a CSV in the canonical rows-are-samples dialect.
    WriteCsv {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "rows")]
        layout: Layout,
        #[arg(long)]
        out: PathBuf,
    },
}

fn shape(ds: &FunctionalDataset) -> serde_json::Value {
    serde_json::json!({ "n": ds.n(), "p": ds.p() })
}

fn run(cli: Cli) -> linfeat::Result<()> {
    match cli.command {
        Command::Casestudy {
            config,
            output_dir,
            quiet,
        } => {
            let cfg = RunConfig::load(&config)?;
            let out = output_dir.unwrap_or_else(|| cfg.resolve(&cfg.output_dir));
            let report = cmd_casestudy(&cfg, &out)?;
            if !quiet {
                print!("{}", summary_text(&report));
                println!("outputs written to {}", out.display());
            }
        }
        Command::Synthesize {
            n,
            p,
            smoothness,
            rank,
            noise_std,
            seed,
            out,
        } => {
            let ds = synthesize(&SynthParams {
                n,
                p,
                smoothness,
                rank,
                noise_std,
                seed,
            })?;
            write_csv(&ds, &out)?;
            println!("{}", shape(&ds));
        }
        Command::Ingest {
            csv,
            layout,
            split,
            write_dir,
        } => {
            let ds = load_csv(&csv, layout)?;
            let mut summary = shape(&ds);
            match split {
                Some(path) => {
                    let spec = SplitSpec::load(&path)?;
                    let parts = apply_split(&ds, &spec)?;
                    summary["train"] = shape(&parts.train);
                    summary["test1"] = shape(&parts.test1);
                    summary["test2"] = shape(&parts.test2);
                    summary["outliers"] = spec.outliers.len().into();
                    if let Some(dir) = &write_dir {
                        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                            path: dir.clone(),
                            source: e,
                        })?;
                        write_csv(&parts.train, dir.join("train.csv"))?;
                        write_csv(&parts.test1, dir.join("test1.csv"))?;
                        write_csv(&parts.test2, dir.join("test2.csv"))?;
                    }
                }
                None => {
                    if let Some(dir) = &write_dir {
                        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                            path: dir.clone(),
                            source: e,
                        })?;
                        write_csv(&ds, dir.join("data.csv"))?;
                    }
                }
            }
            println!("{summary}");
        }
        Command::WriteCsv { csv, layout, out } => {
            let ds = load_csv(&csv, layout)?;
            write_csv(&ds, &out)?;
            println!("{}", shape(&ds));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Data => 3,
                ErrorKind::Numeric => 4,
            })
        }
    }
}
