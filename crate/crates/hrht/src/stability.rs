//! Blocking-pair classification and the strongly stable matching solver.
//!
//! A pair (r, h) that is acceptable but unmatched blocks a matching when both
//! sides would rather have each other than what they hold. With ties on the
//! hospital side "rather" splits into three notions, ordered by how easy they
//! are to trigger: a weakly blocking pair improves both sides strictly, a
//! super blocking pair needs only weak improvement on both sides, and a
//! strong blocking pair improves one side strictly and the other at least
//! weakly. Strong stability (no strong blocking pair) is the notion every
//! solver in this crate targets.
//!
//! Under-subscribed hospitals implicitly hold one placeholder slot per unused
//! quota unit; every acceptable resident is strictly preferred to a
//! placeholder, so an open slot witnesses a block whenever the resident side
//! wants to move.

use std::collections::VecDeque;

use crate::instance::{HId, Instance, Matching, MatchingError, QuotaVector, RId};

/// Which blocking definition to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockingNotion {
    /// One side improves strictly, the other at least weakly.
    Strong,
    /// Both sides improve at least weakly.
    Super,
    /// Both sides improve strictly.
    Weak,
}

/// Hospital-side evidence that a pair blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A matched resident the hospital would displace.
    Displaced(RId),
    /// An unused quota slot.
    EmptySlot,
}

/// One blocking pair together with its hospital-side witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockingPair {
    pub resident: RId,
    pub hospital: HId,
    pub witness: Witness,
}

/// All blocking pairs of a matching under one notion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub notion: BlockingNotion,
    pub pairs: Vec<BlockingPair>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Lists every pair blocking `m` under `notion`, with witnesses.
///
/// `quotas` may be any pointwise nonnegative vector; callers routinely pass
/// augmented vectors rather than the instance quotas. The matching must be
/// valid against `quotas` (edges only, no over-subscription).
///
/// Pairs are reported by resident in declared order, then by preference
/// position. The witness is an empty slot when one exists, otherwise a
/// displaced resident from the least-preferred occupied group that the
/// resident can displace (first by declared order within that group).
pub fn blocking_pairs(
    inst: &Instance,
    quotas: &QuotaVector,
    m: &Matching,
    notion: BlockingNotion,
) -> Result<StabilityReport, MatchingError> {
    m.check_valid(inst, quotas)?;
    let loads = m.loads(inst.num_hospitals());
    let mut members: Vec<Vec<RId>> = vec![Vec::new(); inst.num_hospitals()];
    for (r, h) in m.iter() {
        if let Some(h) = h {
            members[h.idx()].push(r);
        }
    }

    let mut pairs = Vec::new();
    for r in inst.residents() {
        let current_rank = m
            .assignment(r)
            .map(|h| inst.resident_rank(r, h).expect("matched pair is an edge"));
        for &h in inst.resident_pref(r) {
            if m.assignment(r) == Some(h) {
                continue;
            }
            let rank_here = inst.resident_rank(r, h).expect("preference entry is an edge");
            let r_strict = current_rank.map_or(true, |cur| rank_here < cur);
            let r_weak = r_strict || current_rank == Some(rank_here);
            let open_slot = loads[h.idx()] < quotas[h];
            let my_rank = inst.hospital_rank(h, r).expect("mutual edge");

            // Hospital-side witness sets against matched residents: weak
            // displacement tolerates a tie, strict displacement does not. A
            // placeholder slot satisfies both.
            let exists_weak = open_slot
                || members[h.idx()]
                    .iter()
                    .any(|&x| inst.hospital_rank(h, x).expect("member is an edge") >= my_rank);
            let exists_strict = open_slot
                || members[h.idx()]
                    .iter()
                    .any(|&x| inst.hospital_rank(h, x).expect("member is an edge") > my_rank);

            let (blocks, need_strict_witness) = match notion {
                BlockingNotion::Strong => {
                    if r_strict && exists_weak {
                        (true, false)
                    } else {
                        (r_weak && exists_strict, true)
                    }
                }
                BlockingNotion::Super => (r_weak && exists_weak, false),
                BlockingNotion::Weak => (r_strict && exists_strict, true),
            };
            if !blocks {
                continue;
            }
            let witness = if open_slot {
                Witness::EmptySlot
            } else {
                let displaced = members[h.idx()]
                    .iter()
                    .copied()
                    .filter(|&x| {
                        let rank = inst.hospital_rank(h, x).expect("member is an edge");
                        if need_strict_witness {
                            rank > my_rank
                        } else {
                            rank >= my_rank
                        }
                    })
                    .max_by_key(|&x| {
                        (
                            inst.hospital_rank(h, x).expect("member is an edge"),
                            std::cmp::Reverse(x),
                        )
                    })
                    .expect("witness exists when the pair blocks");
                Witness::Displaced(displaced)
            };
            pairs.push(BlockingPair { resident: r, hospital: h, witness });
        }
    }
    Ok(StabilityReport { notion, pairs })
}

pub(crate) struct ProposalOutcome {
    pub matching: Matching,
    /// Hospitals that reached their quota at some point during the rounds.
    pub was_full: Vec<bool>,
}

/// Resident-proposing rounds with group rejections.
///
/// Residents propose down their lists. A hospital provisionally accepts
/// everyone; when it exceeds its quota it rejects its entire least-preferred
/// occupied rank group and permanently deletes that group and every worse one
/// from consideration (the deletion is symmetric: those residents drop the
/// hospital too). The rounds end when every unmatched resident has exhausted
/// the undeleted part of its list.
pub(crate) fn resident_proposals(
    inst: &Instance,
    quotas: &[u32],
    order: &[RId],
) -> ProposalOutcome {
    let nr = inst.num_residents();
    let nh = inst.num_hospitals();
    assert_eq!(quotas.len(), nh, "one quota per hospital");
    assert_eq!(order.len(), nr, "order must list every resident once");
    let mut seen = vec![false; nr];
    for &r in order {
        assert!(!seen[r.idx()], "order must list every resident once");
        seen[r.idx()] = true;
    }

    let mut deleted: Vec<Vec<bool>> = inst
        .residents()
        .map(|r| vec![false; inst.resident_degree(r)])
        .collect();
    let mut cursor = vec![0usize; nr];
    // First deleted group per hospital; groups at or past it are gone.
    let mut cutoff: Vec<usize> = inst
        .hospitals()
        .map(|h| inst.hospital_groups(h).len())
        .collect();
    let mut members: Vec<Vec<RId>> = vec![Vec::new(); nh];
    let mut was_full = vec![false; nh];
    let mut m = Matching::unmatched(nr);
    let mut queue: VecDeque<RId> = order.iter().copied().collect();

    while let Some(r) = queue.pop_front() {
        debug_assert!(m.assignment(r).is_none(), "queued residents are unmatched");
        let prefs = inst.resident_pref(r);
        while cursor[r.idx()] < prefs.len() && deleted[r.idx()][cursor[r.idx()]] {
            cursor[r.idx()] += 1;
        }
        let Some(&h) = prefs.get(cursor[r.idx()]) else {
            continue; // list exhausted, r stays unmatched
        };
        m.set(r, Some(h));
        members[h.idx()].push(r);
        let load = members[h.idx()].len() as u32;
        if load >= quotas[h.idx()] {
            was_full[h.idx()] = true;
        }
        if load > quotas[h.idx()] {
            let worst = members[h.idx()]
                .iter()
                .map(|&x| inst.hospital_rank(h, x).expect("member is an edge"))
                .max()
                .expect("over-subscribed hospital has members");
            let mut rejected = Vec::new();
            members[h.idx()].retain(|&x| {
                if inst.hospital_rank(h, x) == Some(worst) {
                    rejected.push(x);
                    false
                } else {
                    true
                }
            });
            for x in rejected {
                m.set(x, None);
                queue.push_back(x);
            }
            // Deleting a group deletes every worse group with it, so the
            // undeleted part of a hospital list is always a prefix.
            for g in worst as usize..cutoff[h.idx()] {
                for &x in &inst.hospital_groups(h)[g] {
                    let pos = inst.resident_rank(x, h).expect("mutual edge") as usize;
                    deleted[x.idx()][pos] = true;
                }
            }
            cutoff[h.idx()] = worst as usize;
        }
    }

    ProposalOutcome { matching: m, was_full }
}

/// Finds a strongly stable matching under `quotas`, or proves none exists.
///
/// Runs resident-proposing rounds with group rejections; the answer is `None`
/// exactly when some hospital filled up during the rounds but ends
/// under-subscribed. On success the matching is resident-optimal: every
/// resident likes it at least as much as any strongly stable matching under
/// the same quotas.
///
/// Residents propose in declared order; the result does not depend on that
/// order (see [`solve_strong_with_order`]).
pub fn solve_strong(inst: &Instance, quotas: &QuotaVector) -> Option<Matching> {
    let order: Vec<RId> = inst.residents().collect();
    solve_strong_with_order(inst, quotas, &order)
}

/// [`solve_strong`] with an explicit proposal order, for order-invariance
/// checks.
pub fn solve_strong_with_order(
    inst: &Instance,
    quotas: &QuotaVector,
    order: &[RId],
) -> Option<Matching> {
    assert_eq!(quotas.len(), inst.num_hospitals(), "one quota per hospital");
    let outcome = resident_proposals(inst, quotas.as_slice(), order);
    let loads = outcome.matching.loads(inst.num_hospitals());
    for h in inst.hospitals() {
        if outcome.was_full[h.idx()] && loads[h.idx()] < quotas[h] {
            return None;
        }
    }
    Some(outcome.matching)
}
