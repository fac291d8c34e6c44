//! A small multi-seed benchmark, written to disk and summarized.

use npgraph::bench::{parse_metrics_csv, run_benchmark, summarize, write_benchmark};
use npgraph::{RunConfig, SimConfig};

fn main() -> npgraph::Result<()> {
    let dir = std::env::temp_dir().join("npgraph-bench-example");
    let bench = run_benchmark(&SimConfig::default(), &RunConfig::default(), &[0, 1, 2]);
    write_benchmark(&bench, &dir)?;
    let path = dir.join("metrics.csv");
    let text = std::fs::read_to_string(&path).map_err(|source| npgraph::Error::Io { path: path.clone(), source })?;
    let rows = parse_metrics_csv(&text, Some(&path))?;
    print!("{}", summarize(&rows));
    println!("outputs in {}", dir.display());
    Ok(())
}
