//! Runs NP-Graph on one simulated world and reports its accuracy.

use npgraph::metrics::evaluate;
use npgraph::{run_np_slam, simulate, RunConfig, SimConfig};

fn main() -> npgraph::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let (truth, data) = simulate(&SimConfig { seed, ..SimConfig::default() })?;
    let start = std::time::Instant::now();
    let result = run_np_slam(&data, &RunConfig::default())?;
    let eval = evaluate(&result, &truth)?;

    println!("seed {seed}: {:.2} s, {} sweeps, converged {}", start.elapsed().as_secs_f64(), result.iterations_run, result.converged);
    println!("object counts per sweep: {:?}", result.object_count_history);
    println!("objective per iteration: {:?}", result.objective_history.iter().map(|v| v.round()).collect::<Vec<_>>());
    println!("objects {} (true {})", eval.num_objects, truth.objects.len());
    println!("mean object error {:.3} m", eval.mean_object_error);
    println!("mean pose error {:.3} m, cumulative {:.1} m", eval.mean_pose_error, eval.cumulative_pose_error);
    println!("association accuracy {:.1}%", 100.0 * eval.association_accuracy);
    for l in result.landmarks.values() {
        println!("  {}: ({:6.2}, {:6.2}) class {} from {} detections", l.id, l.position.x, l.position.y, l.belief.most_likely_class(), l.count);
    }
    Ok(())
}
