//! Writes a dataset and its ground truth to disk and reads them back.

use npgraph::io::{format_dataset, load_dataset, load_truth, save_dataset, save_truth};
use npgraph::{simulate, SimConfig};

fn main() -> npgraph::Result<()> {
    let (truth, data) = simulate(&SimConfig { seed: 7, num_objects: 4, min_views: 30, ..SimConfig::default() })?;
    let dir = std::env::temp_dir().join("npgraph-dataset-example");
    std::fs::create_dir_all(&dir).map_err(|source| npgraph::Error::Io { path: dir.clone(), source })?;
    save_dataset(&data, dir.join("dataset.txt"))?;
    save_truth(&truth, dir.join("dataset.truth"))?;

    let back = load_dataset(dir.join("dataset.txt"))?;
    assert_eq!(back, data);
    assert_eq!(load_truth(dir.join("dataset.truth"))?, truth);
    println!("round trip ok, files in {}", dir.display());
    for line in format_dataset(&back)?.lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
