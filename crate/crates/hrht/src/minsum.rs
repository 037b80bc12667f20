//! Minimum total quota augmentation.
//!
//! Hospitals propose to whole rank groups while under-subscribed; residents
//! keep the best offer seen so far. The assignment this settles into is
//! strongly stable once every hospital's quota is raised to its final load,
//! and the total raise is the least over all quota augmentations that admit a
//! strongly stable matching. The extra bookkeeping fields (matched residents,
//! hospitals left under quota) feed the rural-hospitals style invariants: the
//! set of matched residents, and the loads of hospitals that needed no raise,
//! are the same in every optimal augmentation's stable matchings.

use std::collections::{BTreeSet, VecDeque};

use crate::instance::{HId, Instance, Matching, QuotaVector, RId};

/// Result of [`minsum_augment`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinSumSolution {
    /// Final quotas, `max(q(h), load(h))` per hospital.
    pub quotas: QuotaVector,
    pub matching: Matching,
    /// Total raise over the instance quotas.
    pub total_increase: u64,
    /// Residents matched by the returned matching.
    pub matched_residents: BTreeSet<RId>,
    /// Hospitals that ended below their original quota.
    pub under_hospitals: BTreeSet<HId>,
    /// Complement of `under_hospitals`.
    pub full_hospitals: BTreeSet<HId>,
    /// Matched residents whose hospital is in `under_hospitals`.
    pub matched_to_under: BTreeSet<RId>,
}

/// Minimises the total quota increase that makes the instance admit a
/// strongly stable matching.
///
/// The instance may or may not already admit one; in the latter case the
/// total increase is 0 and the quotas come back unchanged. Hospitals are
/// scheduled in declared order; the order never changes the total increase,
/// the matched resident set, or the loads of hospitals left under quota (see
/// [`minsum_augment_with_order`]).
pub fn minsum_augment(inst: &Instance) -> MinSumSolution {
    let order: Vec<HId> = inst.hospitals().collect();
    minsum_augment_with_order(inst, &order)
}

/// [`minsum_augment`] with an explicit hospital scheduling order, for
/// order-invariance checks.
pub fn minsum_augment_with_order(inst: &Instance, order: &[HId]) -> MinSumSolution {
    let nr = inst.num_residents();
    let nh = inst.num_hospitals();
    assert_eq!(order.len(), nh, "order must list every hospital once");
    let mut seen = vec![false; nh];
    for &h in order {
        assert!(!seen[h.idx()], "order must list every hospital once");
        seen[h.idx()] = true;
    }

    let mut m = Matching::unmatched(nr);
    let mut loads = vec![0u32; nh];
    let mut next_rank = vec![0usize; nh];
    let mut in_queue = vec![true; nh];
    let mut queue: VecDeque<HId> = order.iter().copied().collect();

    // A hospital is eligible while it is under its quota and has un-proposed
    // rank groups. Eligible hospitals are always queued: a hospital re-checks
    // itself after its own turn, and losing a resident re-queues the loser's
    // old hospital the moment it drops below quota.
    while let Some(h) = queue.pop_front() {
        in_queue[h.idx()] = false;
        if loads[h.idx()] >= inst.quota(h) {
            continue; // paused at or above quota
        }
        let groups = inst.hospital_groups(h);
        if next_rank[h.idx()] >= groups.len() {
            continue; // list exhausted
        }
        let rank = next_rank[h.idx()];
        next_rank[h.idx()] += 1;
        for &r in &groups[rank] {
            let strictly_better = match m.assignment(r) {
                None => true,
                Some(cur) => {
                    inst.resident_rank(r, h).expect("mutual edge")
                        < inst.resident_rank(r, cur).expect("matched pair is an edge")
                }
            };
            if !strictly_better {
                continue;
            }
            if let Some(old) = m.assignment(r) {
                loads[old.idx()] -= 1;
                if loads[old.idx()] < inst.quota(old)
                    && next_rank[old.idx()] < inst.hospital_groups(old).len()
                    && !in_queue[old.idx()]
                {
                    in_queue[old.idx()] = true;
                    queue.push_back(old);
                }
            }
            m.set(r, Some(h));
            loads[h.idx()] += 1;
        }
        if loads[h.idx()] < inst.quota(h)
            && next_rank[h.idx()] < groups.len()
            && !in_queue[h.idx()]
        {
            in_queue[h.idx()] = true;
            queue.push_back(h);
        }
    }

    let mut quotas = Vec::with_capacity(nh);
    let mut total_increase = 0u64;
    let mut under_hospitals = BTreeSet::new();
    let mut full_hospitals = BTreeSet::new();
    for h in inst.hospitals() {
        let q = inst.quota(h);
        let load = loads[h.idx()];
        quotas.push(q.max(load));
        total_increase += u64::from(load.saturating_sub(q));
        if load < q {
            under_hospitals.insert(h);
        } else {
            full_hospitals.insert(h);
        }
    }
    let mut matched_residents = BTreeSet::new();
    let mut matched_to_under = BTreeSet::new();
    for (r, h) in m.iter() {
        if let Some(h) = h {
            matched_residents.insert(r);
            if under_hospitals.contains(&h) {
                matched_to_under.insert(r);
            }
        }
    }
    // The total raise equals the matched residents at raised hospitals minus
    // the quota they had to begin with; a cheap cross-check on the loop above.
    debug_assert_eq!(
        total_increase,
        (matched_residents.len() - matched_to_under.len()) as u64
            - full_hospitals
                .iter()
                .map(|&h| u64::from(inst.quota(h)))
                .sum::<u64>()
    );

    MinSumSolution {
        quotas: QuotaVector::new(quotas),
        matching: m,
        total_increase,
        matched_residents,
        under_hospitals,
        full_hospitals,
        matched_to_under,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::stability::{blocking_pairs, BlockingNotion};

    const ONE_HOSPITAL: &str = "\
HRHT v1
resident r1: h
resident r2: h
resident r3: h
resident r4: h
hospital h [1]: (r1 r2) (r3 r4)
";

    const TWO_HOSPITALS: &str = "\
HRHT v1
resident r1: h1 h2
resident r2: h2 h1
resident r3: h1
resident r4: h2
hospital h1 [1]: (r2 r3) r1
hospital h2 [1]: r1 r2 r4
";

    #[test]
    fn augments_single_hospital_by_one() {
        let inst = parse_instance(ONE_HOSPITAL).unwrap();
        let sol = minsum_augment(&inst);
        assert_eq!(sol.quotas.as_slice(), &[2]);
        assert_eq!(sol.total_increase, 1);
        assert_eq!(sol.matching.residents_of(HId(0)), vec![RId(0), RId(1)]);
        let report =
            blocking_pairs(&inst, &sol.quotas, &sol.matching, BlockingNotion::Strong).unwrap();
        assert!(report.is_stable());
    }

    #[test]
    fn augments_two_hospital_instance() {
        let inst = parse_instance(TWO_HOSPITALS).unwrap();
        let sol = minsum_augment(&inst);
        assert_eq!(sol.quotas.as_slice(), &[2, 1]);
        assert_eq!(sol.total_increase, 1);
        assert_eq!(sol.matching.assignment(RId(0)), Some(HId(1)));
        assert_eq!(sol.matching.assignment(RId(1)), Some(HId(0)));
        assert_eq!(sol.matching.assignment(RId(2)), Some(HId(0)));
        assert_eq!(sol.matching.assignment(RId(3)), None);
        assert_eq!(sol.under_hospitals.len(), 0);
        assert_eq!(
            sol.matched_residents,
            [RId(0), RId(1), RId(2)].into_iter().collect()
        );
    }

    #[test]
    fn zero_increase_when_already_feasible() {
        let text = "\
HRHT v1
resident r1: h
resident r2: h
resident r3: h
resident r4: h
hospital h [2]: (r1 r2) (r3 r4)
";
        let inst = parse_instance(text).unwrap();
        let sol = minsum_augment(&inst);
        assert_eq!(sol.total_increase, 0);
        assert_eq!(sol.quotas.as_slice(), inst.quotas());
    }

    #[test]
    fn under_subscribed_hospital_is_tracked() {
        let text = "\
HRHT v1
resident r1: h1
hospital h1 [2]: r1
hospital h2 [1]:
";
        let inst = parse_instance(text).unwrap();
        let sol = minsum_augment(&inst);
        assert_eq!(sol.total_increase, 0);
        assert_eq!(
            sol.under_hospitals,
            [HId(0), HId(1)].into_iter().collect::<BTreeSet<_>>()
        );
        assert_eq!(sol.matched_to_under, [RId(0)].into_iter().collect());
        assert!(sol.full_hospitals.is_empty());
    }

    #[test]
    fn order_invariant_on_a_small_instance() {
        let inst = parse_instance(TWO_HOSPITALS).unwrap();
        let base = minsum_augment(&inst);
        let rev: Vec<HId> = inst.hospitals().rev().collect();
        let alt = minsum_augment_with_order(&inst, &rev);
        assert_eq!(alt.total_increase, base.total_increase);
        assert_eq!(alt.matched_residents, base.matched_residents);
        assert_eq!(alt.under_hospitals, base.under_hospitals);
    }
}
