//! Minimum total augmentation subject to forced pairs.
//!
//! Given a set Q of edges that the final matching must contain (at most one
//! per resident), the pipeline prunes away every edge whose presence would
//! contradict some forced pair in a strongly stable matching, solves the
//! pruned instance, and then reattaches the forced pairs and the pruned
//! edges. Three distinct situations make the requirement impossible, and
//! each is reported as its own infeasibility reason rather than by failing to
//! find a solution.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::instance::{HId, Instance, Matching, QuotaVector, RId};
use crate::minsum::minsum_augment;
use crate::stability::{blocking_pairs, solve_strong, BlockingNotion};

/// A set of pairs the matching must contain, at most one per resident.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForcedEdges {
    edges: Vec<(RId, HId)>,
}

/// Malformed forced sets rejected by [`ForcedEdges::new`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ForcedEdgesError {
    #[error("forced pair ({resident}, {hospital}) is not an edge")]
    NotAnEdge { resident: String, hospital: String },
    #[error("resident `{0}` appears in two forced pairs")]
    DuplicateResident(String),
}

impl ForcedEdges {
    pub fn new(inst: &Instance, edges: Vec<(RId, HId)>) -> Result<Self, ForcedEdgesError> {
        let mut seen = BTreeSet::new();
        for &(r, h) in &edges {
            if r.idx() >= inst.num_residents()
                || h.idx() >= inst.num_hospitals()
                || !inst.is_edge(r, h)
            {
                return Err(ForcedEdgesError::NotAnEdge {
                    resident: inst
                        .resident_names()
                        .get(r.idx())
                        .cloned()
                        .unwrap_or_else(|| format!("<resident {}>", r.0)),
                    hospital: inst
                        .hospital_names()
                        .get(h.idx())
                        .cloned()
                        .unwrap_or_else(|| format!("<hospital {}>", h.0)),
                });
            }
            if !seen.insert(r) {
                return Err(ForcedEdgesError::DuplicateResident(
                    inst.resident_name(r).to_owned(),
                ));
            }
        }
        Ok(ForcedEdges { edges })
    }

    pub fn edges(&self) -> &[(RId, HId)] {
        &self.edges
    }

    pub fn residents(&self) -> BTreeSet<RId> {
        self.edges.iter().map(|&(r, _)| r).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, r: RId, h: HId) -> bool {
        self.edges.contains(&(r, h))
    }
}

/// Why no augmentation can produce a strongly stable matching containing Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfeasibleReason {
    /// Pruning around one forced pair deletes another forced pair.
    ForcedEdgeDeleted,
    /// A hospital some forced resident prefers to its forced partner cannot
    /// fill its quota in the pruned instance; its open slot would block.
    DeficientDistractingHospital,
    /// A resident tied-or-better at a forced hospital, itself unforced, loses
    /// every edge to pruning; unmatched, it blocks with that hospital.
    IsolatedDistractingResident,
}

impl std::fmt::Display for InfeasibleReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InfeasibleReason::ForcedEdgeDeleted => "forced-edge-deleted",
            InfeasibleReason::DeficientDistractingHospital => "deficient-distracting-hospital",
            InfeasibleReason::IsolatedDistractingResident => "isolated-distracting-resident",
        })
    }
}

/// Outcome of [`prune`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PruneOutcome {
    Pruned(PruneResult),
    Infeasible(InfeasibleReason),
}

/// The pruned instance and the bookkeeping the pipeline needs afterwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PruneResult {
    /// The instance restricted to surviving edges, with quotas reduced by
    /// each hospital's forced load.
    pub pruned: Instance,
    /// Every deleted edge, forced pairs included.
    pub deleted: BTreeSet<(RId, HId)>,
    /// Residents some forced hospital likes at least as much as its forced
    /// resident (the forced residents themselves included).
    pub distracting_residents: BTreeSet<RId>,
    /// Hospitals some forced resident strictly prefers to its forced partner.
    pub distracting_hospitals: BTreeSet<HId>,
    /// Least-preferred surviving hospital per resident, `None` when the
    /// resident is isolated in the pruned instance.
    pub last: Vec<Option<HId>>,
    /// Forced pairs per hospital.
    pub forced_per_hospital: Vec<u32>,
}

/// Deletes every edge that would contradict a forced pair.
///
/// For each forced pair (r, h): any resident r2 that h likes at least as much
/// as r loses its edges to hospitals it likes strictly less than h, and any
/// hospital h2 that r likes strictly more than h loses its edges to residents
/// it likes at most as much as r. Finally every forced resident loses all its
/// edges and each hospital's quota drops by its forced load (quotas below the
/// forced load are first raised to it, the raise is charged by
/// [`minsum_fe`]).
///
/// Infeasibility is detected here in two forms: a forced pair deleted by the
/// first phase, and a distracting non-forced resident left with no edges.
pub fn prune(inst: &Instance, forced: &ForcedEdges) -> PruneOutcome {
    let forced_residents = forced.residents();
    let mut deleted: BTreeSet<(RId, HId)> = BTreeSet::new();
    let mut distracting_residents: BTreeSet<RId> = BTreeSet::new();
    let mut distracting_hospitals: BTreeSet<HId> = BTreeSet::new();

    for &(r, h) in forced.edges() {
        let forced_rank = inst.hospital_rank(h, r).expect("forced pair is an edge");
        for group in &inst.hospital_groups(h)[..=forced_rank as usize] {
            for &r2 in group {
                distracting_residents.insert(r2);
                let pos = inst.resident_rank(r2, h).expect("mutual edge") as usize;
                for &h2 in &inst.resident_pref(r2)[pos + 1..] {
                    deleted.insert((r2, h2));
                }
            }
        }
        let pos = inst.resident_rank(r, h).expect("forced pair is an edge") as usize;
        for &h2 in &inst.resident_pref(r)[..pos] {
            distracting_hospitals.insert(h2);
            let my_rank = inst.hospital_rank(h2, r).expect("mutual edge") as usize;
            for group in &inst.hospital_groups(h2)[my_rank..] {
                for &r2 in group {
                    deleted.insert((r2, h2));
                }
            }
        }
    }

    if forced.edges().iter().any(|e| deleted.contains(e)) {
        return PruneOutcome::Infeasible(InfeasibleReason::ForcedEdgeDeleted);
    }

    let mut forced_per_hospital = vec![0u32; inst.num_hospitals()];
    for &(r, h) in forced.edges() {
        forced_per_hospital[h.idx()] += 1;
        for &h2 in inst.resident_pref(r) {
            deleted.insert((r, h2));
        }
    }

    let pruned_quotas: Vec<u32> = inst
        .hospitals()
        .map(|h| inst.quota(h).max(forced_per_hospital[h.idx()]) - forced_per_hospital[h.idx()])
        .collect();
    let resident_prefs: Vec<Vec<HId>> = inst
        .residents()
        .map(|r| {
            inst.resident_pref(r)
                .iter()
                .copied()
                .filter(|&h| !deleted.contains(&(r, h)))
                .collect()
        })
        .collect();
    let hospital_prefs: Vec<Vec<Vec<RId>>> = inst
        .hospitals()
        .map(|h| {
            inst.hospital_groups(h)
                .iter()
                .map(|group| {
                    group
                        .iter()
                        .copied()
                        .filter(|&r| !deleted.contains(&(r, h)))
                        .collect::<Vec<RId>>()
                })
                .filter(|group| !group.is_empty())
                .collect()
        })
        .collect();
    let pruned = Instance::new(
        inst.resident_names().to_vec(),
        inst.hospital_names().to_vec(),
        pruned_quotas,
        resident_prefs,
        hospital_prefs,
    )
    .expect("pruning deletes symmetric edge sets, preserving validity");

    for &r in &distracting_residents {
        if !forced_residents.contains(&r) && pruned.resident_degree(r) == 0 {
            return PruneOutcome::Infeasible(InfeasibleReason::IsolatedDistractingResident);
        }
    }

    let last: Vec<Option<HId>> = pruned
        .residents()
        .map(|r| pruned.resident_pref(r).last().copied())
        .collect();

    PruneOutcome::Pruned(PruneResult {
        pruned,
        deleted,
        distracting_residents,
        distracting_hospitals,
        last,
        forced_per_hospital,
    })
}

/// A feasible answer from [`minsum_fe`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeSolution {
    pub quotas: QuotaVector,
    pub matching: Matching,
    /// Total raise over the instance quotas.
    pub total_increase: u64,
}

/// Outcome of [`minsum_fe`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeOutcome {
    Solution(FeSolution),
    Infeasible(InfeasibleReason),
}

/// Output-verification failure: the assembled matching must be strongly
/// stable, and any counterexample is surfaced instead of being returned as a
/// solution.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeError {
    #[error("assembled matching is blocked by ({resident}, {hospital})")]
    UnstableOutput { resident: String, hospital: String },
}

/// Minimum total quota increase so a strongly stable matching containing all
/// forced pairs exists.
///
/// Pipeline: prune around the forced pairs; find a strongly stable matching
/// of the pruned instance at its reduced quotas, augmenting minimally when
/// none exists; declare infeasibility when a hospital preferred by a forced
/// resident ends below its reduced quota; match every unmatched distracting
/// resident to the last hospital on its surviving list, raising that quota by
/// one; finally add the forced pairs back, raising each hospital's quota by
/// its forced load. The assembled matching is checked for strong stability
/// against the full instance before being returned.
pub fn minsum_fe(inst: &Instance, forced: &ForcedEdges) -> Result<FeOutcome, FeError> {
    let pr = match prune(inst, forced) {
        PruneOutcome::Pruned(pr) => pr,
        PruneOutcome::Infeasible(reason) => return Ok(FeOutcome::Infeasible(reason)),
    };
    let forced_residents = forced.residents();

    let (mut quotas, mut matching) = match solve_strong(&pr.pruned, &pr.pruned.quota_vector()) {
        Some(m) => (pr.pruned.quota_vector(), m),
        None => {
            let sol = minsum_augment(&pr.pruned);
            (sol.quotas, sol.matching)
        }
    };

    let loads = matching.loads(inst.num_hospitals());
    for &h in &pr.distracting_hospitals {
        if loads[h.idx()] < pr.pruned.quota(h) {
            return Ok(FeOutcome::Infeasible(InfeasibleReason::DeficientDistractingHospital));
        }
    }

    for &r in &pr.distracting_residents {
        if !forced_residents.contains(&r) && matching.assignment(r).is_none() {
            let h = pr.last[r.idx()].expect("isolated distracting residents fail prune");
            matching.set(r, Some(h));
            quotas.set(h, quotas[h] + 1);
        }
    }

    for &(r, h) in forced.edges() {
        debug_assert!(
            matching.assignment(r).is_none(),
            "forced residents have no edges in the pruned instance"
        );
        matching.set(r, Some(h));
        quotas.set(h, quotas[h] + 1);
    }

    let total_increase = quotas.total_increase_over(&inst.quota_vector());
    debug_assert!(quotas.pointwise_ge(&inst.quota_vector()));
    debug_assert!(forced.edges().iter().all(|&(r, h)| matching.assignment(r) == Some(h)));

    let report = blocking_pairs(inst, &quotas, &matching, BlockingNotion::Strong)
        .expect("assembled matching is quota-valid");
    if let Some(pair) = report.pairs.first() {
        return Err(FeError::UnstableOutput {
            resident: inst.resident_name(pair.resident).to_owned(),
            hospital: inst.hospital_name(pair.hospital).to_owned(),
        });
    }

    Ok(FeOutcome::Solution(FeSolution { quotas, matching, total_increase }))
}
