//! Loads simulator and estimator settings from TOML.

use npgraph::config::Config;
use npgraph::{run_np_slam, simulate};

const TEXT: &str = r#"
seeds = [5]

[sim]
num_objects = 6
world_extent = 3.0
min_views = 20
false_positive_rate = 0.2
waypoints = [[0, -2], [2, -2], [2, 2], [-2, 2], [-2, -2], [0, -2]]

[run]
alpha = 0.5
epsilon_fp = 0.05
max_outer_iterations = 20
"#;

fn main() -> npgraph::Result<()> {
    let mut cfg = Config::from_toml(TEXT, None)?;
    cfg.sim.seed = cfg.seeds[0];
    println!("alpha {}, epsilon {}, {} waypoints", cfg.run.dp.alpha, cfg.run.dp.epsilon_fp, cfg.sim.waypoints.len());
    let (truth, data) = simulate(&cfg.sim)?;
    let result = run_np_slam(&data, &cfg.run)?;
    println!("{} poses; {} true objects, {} estimated, {} pruned", data.num_poses(), truth.objects.len(), result.landmarks.len(), result.pruned.len());

    let bad = Config::from_toml("[run]\nalpha = 0.0\n", None);
    println!("alpha = 0 rejected: {}", bad.unwrap_err());
    Ok(())
}
