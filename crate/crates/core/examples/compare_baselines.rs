//! NP-Graph against frame-by-frame, open-loop and consistency-graph baselines.

use npgraph::bench::{run_algorithm, Algorithm};
use npgraph::metrics::evaluate;
use npgraph::{simulate, RunConfig, SimConfig};

fn main() -> npgraph::Result<()> {
    let (truth, data) = simulate(&SimConfig { seed: 3, ..SimConfig::default() })?;
    let cfg = RunConfig::default();
    println!("{:<9} {:>8} {:>10} {:>10} {:>8}", "method", "objects", "obj err", "pose err", "used %");
    for alg in Algorithm::ALL {
        let r = run_algorithm(alg, &data, &cfg)?;
        let e = evaluate(&r, &truth)?;
        println!(
            "{:<9} {:>8} {:>10.3} {:>10.3} {:>8.1}",
            alg.name(),
            e.num_objects,
            e.mean_object_error,
            e.mean_pose_error,
            100.0 * e.fraction_used
        );
    }
    Ok(())
}
