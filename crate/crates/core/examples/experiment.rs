//! Runs the default synthetic experiment and prints the evaluation.
//!
//! `cargo run --release -p affect-fuzzy --example experiment -- [seed]`

use affect_fuzzy::pipeline::{run, ExperimentConfig};
use affect_fuzzy::synth::GeneratorConfig;

fn main() {
    let mut config = ExperimentConfig::default();
    if let Some(seed) = std::env::args().nth(1) {
        let seed = seed.parse().expect("seed must be an unsigned integer");
        config.generator = GeneratorConfig { seed, ..config.generator };
    }
    let result = run(&config).expect("experiment runs");
    print!("{}", result.report.to_table());
    let c = &result.comparison;
    println!();
    println!("present/absent baseline aspect-1 {:.4} (fuzzy {:.4})", c.baseline_aspect1, c.fuzzy_aspect1);
}
