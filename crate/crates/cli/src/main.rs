use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tnet_core::harness::snapshot::Format;
use tnet_core::harness::{golden, run_experiment, sweep, ExperimentConfig, Snapshot};
use tnet_core::HarnessError;

#[derive(Parser)]
#[command(name = "tnet", version, about = "Transducer networks: segmentation, prediction and planning experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Force deterministic firing.
        #[arg(long)]
        deterministic: bool,
        /// Snapshot path (JSON).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Event log path.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Segment a corpus and print the fixated chunks.
    Segment {
        /// fig1a, fig1b or a corpus file.
        #[arg(long)]
        corpus: String,
        #[arg(long)]
        dw: Option<f64>,
        #[arg(long)]
        decay: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a JSON snapshot to JSON or DOT.
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_format)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a config over a parameter grid and write a CSV table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn exec(cmd: Cmd) -> Result<(), HarnessError> {
    match cmd {
        Cmd::Run { config, seed, deterministic, out, log } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if deterministic {
                cfg.deterministic = true;
            }
            let res = run_experiment(&cfg)?;
            let snap = out.or(cfg.output.snapshot.clone());
            let log = log.or(cfg.output.log.clone());
            res.write(snap.as_deref(), log.as_deref())?;
            for line in &res.summary {
                println!("{line}");
            }
        }
        Cmd::Segment { corpus, dw, decay, theta, out } => {
            let mut cfg = ExperimentConfig::segment(&corpus);
            if let Some(v) = dw {
                cfg.params.dw = v;
            }
            if let Some(v) = decay {
                cfg.params.decay_w = v;
            }
            if let Some(v) = theta {
                cfg.params.theta = v;
            }
            let res = run_experiment(&cfg)?;
            let labels = golden::fixated_chunk_labels(&res.network);
            println!("fixated chunks: {}", labels.len());
            for l in &labels {
                let w = res.network.node(res.network.find(l).expect("label")).expect("node").weight;
                let succ: Vec<String> = golden::chunk_successors(&res.network, l)
                    .into_iter()
                    .map(|(s, w)| format!("{s} ({w:.3})"))
                    .collect();
                println!("  {l} w={w:.3} -> [{}]", succ.join(", "));
            }
            if let Some(p) = out {
                res.write(Some(&p), None)?;
            }
        }
        Cmd::Export { input, format, out } => {
            Snapshot::load(&input)?.export(format, &out)?;
        }
        Cmd::Sweep { config, grid, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let grid = sweep::load_grid(&grid)?;
            let rows = sweep::sweep(&grid, &cfg)?;
            let text = sweep::to_csv(&grid, &rows);
            std::fs::write(&out, text)
                .map_err(|source| HarnessError::Output { path: out.display().to_string(), source })?;
            println!("{} rows", rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match exec(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(HarnessError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

