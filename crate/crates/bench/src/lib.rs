//! Fixtures shared by the criterion benchmarks.

use dyntcp::synth::{generate, SynthConfig};
use dyntcp::Dataset;

/// Correlated history: `tests` tests in groups of ten, `cycles` cycles.
pub fn grouped_dataset(tests: usize, cycles: usize, seed: u64) -> Dataset {
    let mut cfg = SynthConfig::with_uniform_groups(tests, cycles, tests / 10, 10, 0.3, 0.9);
    cfg.background_rate = 0.02;
    cfg.flakiness = 0.02;
    cfg.seed = seed;
    generate(&cfg).expect("valid synthetic config")
}
