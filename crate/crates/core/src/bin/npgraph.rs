use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use npgraph::bench::{parse_metrics_csv, run_algorithm, run_benchmark, summarize, write_benchmark, write_run, Algorithm};
use npgraph::config::Config;
use npgraph::io::{format_dataset, format_truth, load_dataset, load_truth};
use npgraph::{simulate, Error, Result};

#[derive(Parser)]
#[command(name = "npgraph", version, about = "Nonparametric pose-graph SLAM: simulate, run and benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the DP concentration.
    #[arg(long)]
    alpha: Option<f64>,
    /// Override the false-positive pruning threshold.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Override the outer iteration limit.
    #[arg(long)]
    max_iterations: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and its ground truth.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Spurious detections per frame.
        #[arg(long)]
        false_positive_rate: Option<f64>,
    },
    /// Run one algorithm on a dataset file.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
        /// Ground truth for evaluation; inlier metrics only when absent.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value = "np-graph")]
        algorithm: Algorithm,
    },
    /// Run all algorithms over several simulated seeds.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated seeds, e.g. `0,1,2`.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        false_positive_rate: Option<f64>,
    },
    /// Rebuild summary.txt from a metrics.csv.
    Report {
        #[arg(long)]
        metrics: PathBuf,
        /// Where to write the summary; printed to stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(a) = common.alpha {
        cfg.run.dp.alpha = a;
    }
    if let Some(e) = common.epsilon {
        cfg.run.dp.epsilon_fp = e;
    }
    if let Some(m) = common.max_iterations {
        cfg.run.max_outer_iterations = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

/// Reads the `# seed N` comment that `simulate` writes at the top of a dataset.
fn seed_comment(path: &Path) -> Option<u64> {
    let text = fs::read_to_string(path).ok()?;
    text.lines().next()?.strip_prefix("# seed ")?.trim().parse().ok()
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate { common, seed, false_positive_rate } => {
            let mut cfg = load_config(&common)?;
            if let Some(s) = seed {
                cfg.sim.seed = s;
            }
            if let Some(r) = false_positive_rate {
                cfg.sim.false_positive_rate = r;
            }
            let (truth, dataset) = simulate(&cfg.sim)?;
            create_dir(&common.out)?;
            let header = format!("# seed {}\n", cfg.sim.seed);
            write(&common.out.join("dataset.txt"), &(header.clone() + &format_dataset(&dataset)?))?;
            write(&common.out.join("dataset.truth"), &(header + &format_truth(&truth)))?;
            println!(
                "seed {}: {} poses, {} detections, {} objects -> {}",
                cfg.sim.seed,
                dataset.num_poses(),
                dataset.detections.len(),
                truth.objects.len(),
                common.out.display()
            );
        }
        Command::Run { common, dataset, truth, algorithm } => {
            let cfg = load_config(&common)?;
            let data = load_dataset(&dataset)?;
            let truth = truth.map(load_truth).transpose()?;
            let start = Instant::now();
            let result = run_algorithm(algorithm, &data, &cfg.run)?;
            write_run(&common.out, algorithm, &result, truth.as_ref(), seed_comment(&dataset))?;
            println!(
                "{algorithm}: {} objects ({} pruned), {} iterations, converged {}, {:.2} s -> {}",
                result.landmarks.len(),
                result.pruned.len(),
                result.iterations_run,
                result.converged,
                start.elapsed().as_secs_f64(),
                common.out.display()
            );
        }
        Command::Bench { common, seeds, false_positive_rate } => {
            let mut cfg = load_config(&common)?;
            if let Some(s) = seeds {
                cfg.seeds = s;
            }
            if let Some(r) = false_positive_rate {
                cfg.sim.false_positive_rate = r;
            }
            let bench = run_benchmark(&cfg.sim, &cfg.run, &cfg.seeds);
            write_benchmark(&bench, &common.out)?;
            print!("{}", summarize(&bench.rows()));
        }
        Command::Report { metrics, out } => {
            let text = fs::read_to_string(&metrics).map_err(|e| Error::Io { path: metrics.clone(), source: e })?;
            let summary = summarize(&parse_metrics_csv(&text, Some(&metrics))?);
            match out {
                Some(path) => write(&path, &summary)?,
                None => print!("{summary}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
