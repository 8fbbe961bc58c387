//! Deterministic workloads shared by the benchmarks.

use matchbound_core::analysis::random_market;
use matchbound_core::Market;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A random `n`×`n` market with acceptability probability `p`, retrying
/// seeds until at least one pair is acceptable.
pub fn workload(n: usize, p: f64, seed: u64) -> Market {
    (seed..)
        .find_map(|s| random_market(n, n, p, &mut ChaCha8Rng::seed_from_u64(s)))
        .expect("some seed yields a nonempty market")
}
