//! Generates a synthetic run and prints what the estimator gets to see.

use npgraph::{dead_reckon, simulate, SimConfig};

fn main() -> npgraph::Result<()> {
    let cfg = SimConfig { seed: 4, false_positive_rate: 0.1, ..SimConfig::default() };
    let (truth, data) = simulate(&cfg)?;
    println!("{} poses, {} detections, {} objects", data.num_poses(), data.detections.len(), truth.objects.len());
    for (i, o) in truth.objects.iter().enumerate() {
        let seen = truth.sources.values().filter(|s| **s == Some(i)).count();
        println!("  object {i:2}: class {} at ({:6.2}, {:6.2}), {seen} detections", o.class, o.position.x, o.position.y);
    }
    let spurious = truth.sources.values().filter(|s| s.is_none()).count();
    println!("spurious detections: {spurious}");

    let dr = dead_reckon(&data);
    let end = dr.last().unwrap().position().distance(&truth.poses.last().unwrap().position());
    println!("dead-reckoning drift at the last pose: {end:.3} m");
    Ok(())
}
