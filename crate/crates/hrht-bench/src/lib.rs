//! Seeded instance builders sized for benchmarking the solvers.

use hrht::{gen_random_instance, Instance, RandomParams};

/// A market where every resident lists roughly a dozen hospitals, hospitals
/// tie up to three residents per rank, and quotas run 1 to 4.
pub fn market(residents: u32, hospitals: u32, seed: u64) -> Instance {
    gen_random_instance(&RandomParams {
        residents,
        hospitals,
        density: (12.0 / f64::from(hospitals)).min(0.9),
        max_tie: 3,
        quota_max: 4,
        seed,
    })
}

/// A small instance with an edge count the brute-force oracles handle; scans
/// seeds until one lands in the window, so the result is deterministic.
pub fn oracle_scale_instance(max_edges: usize) -> Instance {
    for seed in 0.. {
        let inst = gen_random_instance(&RandomParams {
            residents: 6,
            hospitals: 4,
            density: 0.5,
            max_tie: 3,
            quota_max: 2,
            seed,
        });
        if (max_edges.saturating_sub(2)..=max_edges).contains(&inst.num_edges()) {
            return inst;
        }
    }
    unreachable!("some seed lands in the edge window")
}
