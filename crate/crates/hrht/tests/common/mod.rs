//! Fixtures and helpers shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hrht::instance::{parse_instance, HId, Instance, Matching, QuotaVector, RId};
use hrht::reductions::{gen_random_instance, RandomParams};

/// One hospital, quota 1, two rank groups of tied pairs. No strongly stable
/// matching exists at quota 1 or 3; quota 2 takes the first tie.
pub const FIX_A: &str = "\
HRHT v1
resident r1: h
resident r2: h
resident r3: h
resident r4: h
hospital h [1]: (r1 r2) (r3 r4)
";

/// Two hospitals, quota 1 each; the motivating example for bounded
/// augmentation. No strongly stable matching at the original quotas.
pub const FIX_B: &str = "\
HRHT v1
resident r1: h1 h2
resident r2: h2 h1
resident r3: h1
resident r4: h2
hospital h1 [1]: (r2 r3) r1
hospital h2 [1]: r1 r2 r4
";

/// A single resident forced to its second choice; the first choice would
/// always lure it away, so no augmentation helps.
pub const FIX_C: &str = "\
HRHT v1
resident r: h1 h2
hospital h1 [1]: r
hospital h2 [1]: r
forced: r h2
";

/// A forced first choice that is already strongly stable with no increase.
pub const FIX_D: &str = "\
HRHT v1
resident r1: h1 h2
resident r2: h1
hospital h1 [1]: r1 r2
hospital h2 [1]: r1
forced: r1 h1
";

/// One-clause monotone formula over three variables.
pub const FIX_E_SAT: &str = "mono3sat 3\n1 2 3\n";

/// Four copies of the same clause: every variable occurs exactly four times.
pub const FIX_F_SAT: &str = "mono3sat 3\n1 2 3\n1 2 3\n1 2 3\n1 2 3\n";

pub fn fixture(text: &str) -> Instance {
    parse_instance(text).expect("fixture parses")
}

pub fn qv(q: &[u32]) -> QuotaVector {
    QuotaVector::new(q.to_vec())
}

/// Seeded corpus of small instances, filtered to at most `max_edges` edges.
/// Parameters cycle through a fixed grid so the corpus mixes densities, tie
/// lengths and quotas; the same arguments always build the same corpus.
pub fn small_corpus(
    count: usize,
    max_residents: u32,
    max_hospitals: u32,
    max_edges: usize,
    max_tie: u32,
    quota_max: u32,
) -> Vec<Instance> {
    let mut out = Vec::with_capacity(count);
    let mut seed = 0u64;
    while out.len() < count {
        let params = RandomParams {
            residents: 2 + (seed % u64::from(max_residents - 1)) as u32,
            hospitals: 2 + (seed / 3 % u64::from(max_hospitals - 1)) as u32,
            density: [0.35, 0.55, 0.75, 0.95][(seed % 4) as usize],
            max_tie: 1 + (seed / 5 % u64::from(max_tie)) as u32,
            quota_max: 1 + (seed / 7 % u64::from(quota_max)) as u32,
            seed,
        };
        seed += 1;
        let inst = gen_random_instance(&params);
        if inst.num_edges() == 0 || inst.num_edges() > max_edges {
            continue;
        }
        out.push(inst);
    }
    out
}

/// Preference rank of the resident's assignment, or `u32::MAX` unmatched.
pub fn rank_or_worst(inst: &Instance, r: RId, m: &Matching) -> u32 {
    match m.assignment(r) {
        Some(h) => inst.resident_rank(r, h).expect("matched along an edge"),
        None => u32::MAX,
    }
}

/// Whether `better` assigns every resident a hospital at least as preferred
/// as `other` does.
pub fn pointwise_at_least(inst: &Instance, better: &Matching, other: &Matching) -> bool {
    inst.residents()
        .all(|r| rank_or_worst(inst, r, better) <= rank_or_worst(inst, r, other))
}

pub fn matched_set(m: &Matching) -> BTreeSet<RId> {
    m.iter().filter_map(|(r, h)| h.map(|_| r)).collect()
}

pub fn shuffled<T: Copy>(items: impl Iterator<Item = T>, seed: u64) -> Vec<T> {
    let mut v: Vec<T> = items.collect();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v
}

/// Hospital loads of a matching.
pub fn loads(inst: &Instance, m: &Matching) -> Vec<u32> {
    let mut loads = vec![0u32; inst.num_hospitals()];
    for (_, h) in m.iter() {
        if let Some(h) = h {
            loads[h.idx()] += 1;
        }
    }
    loads
}

/// All quota vectors of the degree-capped box, for small instances only.
pub fn degree_box_vectors(inst: &Instance) -> Vec<QuotaVector> {
    hrht::oracle::SearchBox::degree_capped(inst).collect_vectors()
}

/// Sum over hospitals of how far the first-choice load exceeds the quota; a
/// simple upper bound for the minimum total increase.
pub fn first_choice_excess(inst: &Instance) -> u64 {
    let mut load = vec![0u32; inst.num_hospitals()];
    for r in inst.residents() {
        if let Some(&h) = inst.resident_pref(r).first() {
            load[h.idx()] += 1;
        }
    }
    inst.hospitals()
        .map(|h| u64::from(load[h.idx()].saturating_sub(inst.quota(h))))
        .sum()
}

pub fn edge_list(inst: &Instance) -> Vec<(RId, HId)> {
    inst.edges().collect()
}
