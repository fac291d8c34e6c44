//! Spurious detections end up in landmarks whose class belief favors class 0,
//! and those landmarks are removed at the end.

use npgraph::association::ml_class;
use npgraph::{run_np_slam, simulate, RunConfig, SimConfig};

fn main() -> npgraph::Result<()> {
    let (truth, data) = simulate(&SimConfig { seed: 2, false_positive_rate: 0.3, ..SimConfig::default() })?;
    let spurious = truth.sources.values().filter(|s| s.is_none()).count();
    println!("{} detections, {spurious} spurious", data.detections.len());

    let result = run_np_slam(&data, &RunConfig::default())?;
    println!("kept {} landmarks, pruned {}", result.landmarks.len(), result.pruned.len());
    for l in result.landmarks.values() {
        println!("  kept   {}: p(false positive) {:.3}, {} detections", l.id, ml_class(&l.belief)[0], l.count);
    }
    let shown = result.pruned.len().min(5);
    for l in result.pruned.values().take(shown) {
        println!("  pruned {}: p(false positive) {:.3}, {} detections", l.id, ml_class(&l.belief)[0], l.count);
    }
    if result.pruned.len() > shown {
        println!("  ... and {} more", result.pruned.len() - shown);
    }
    Ok(())
}
