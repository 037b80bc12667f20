//! Bounded per-hospital quota augmentation for bounded-tie instances.
//!
//! Given a budget `ell`, every hospital may grow by at most `ell` slots. When
//! hospital ties have length at most `ell + 1`, running the resident-proposing
//! rounds of the strong-stability solver against temporary quotas `q + ell`
//! always ends in a strongly stable matching, and trimming each quota back to
//! `max(q(h), load(h))` keeps it stable. The result is resident-optimal and
//! maximum-cardinality across every `ell`-bounded augmentation that admits a
//! strongly stable matching.

use thiserror::Error;

use crate::instance::{Instance, Matching, QuotaVector, RId};
use crate::stability::resident_proposals;

/// Result of [`minmax_bt`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinMaxSolution {
    /// Final quotas, `max(q(h), load(h))` per hospital.
    pub quotas: QuotaVector,
    pub matching: Matching,
    /// The budget the solution was computed for.
    pub ell: u32,
    /// Largest single-hospital raise, at most `ell`.
    pub max_increase: u32,
}

/// Why [`minmax_bt`] refused to run.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MinMaxError {
    #[error(
        "hospital `{hospital}` has a tie of length {tie_length} at rank {rank}, \
         which exceeds the budget {ell}; the smallest workable budget is {min_ell}"
    )]
    TieBound {
        hospital: String,
        rank: u32,
        tie_length: u32,
        ell: u32,
        min_ell: u32,
    },
}

/// Augments every quota by at most `ell` so a strongly stable matching
/// exists, requiring hospital ties of length at most `ell + 1`.
///
/// The guarantee needs the tie bound: beyond it the rounds can settle into an
/// unstable assignment, so the violation is a hard error naming the first
/// offending hospital and the smallest workable budget. `ell = 0` is legal
/// and meaningful for strict instances, where the rounds degenerate to
/// ordinary resident-proposing deferred acceptance.
///
/// The matching is resident-optimal across all `ell`-bounded augmentations
/// admitting a strongly stable matching, and consequently matches the maximum
/// number of residents over them.
pub fn minmax_bt(inst: &Instance, ell: u32) -> Result<MinMaxSolution, MinMaxError> {
    let order: Vec<RId> = inst.residents().collect();
    minmax_bt_with_order(inst, ell, &order)
}

/// [`minmax_bt`] with an explicit proposal order, for order-invariance
/// checks.
pub fn minmax_bt_with_order(
    inst: &Instance,
    ell: u32,
    order: &[RId],
) -> Result<MinMaxSolution, MinMaxError> {
    for h in inst.hospitals() {
        for (rank, group) in inst.hospital_groups(h).iter().enumerate() {
            if group.len() as u32 > ell + 1 {
                return Err(MinMaxError::TieBound {
                    hospital: inst.hospital_name(h).to_owned(),
                    rank: rank as u32,
                    tie_length: group.len() as u32,
                    ell,
                    min_ell: inst.max_tie_length() - 1,
                });
            }
        }
    }

    let temp: Vec<u32> = inst.quotas().iter().map(|&q| q.saturating_add(ell)).collect();
    let outcome = resident_proposals(inst, &temp, order);
    let loads = outcome.matching.loads(inst.num_hospitals());
    let mut quotas = Vec::with_capacity(inst.num_hospitals());
    let mut max_increase = 0u32;
    for h in inst.hospitals() {
        let q = inst.quota(h);
        let load = loads[h.idx()];
        quotas.push(q.max(load));
        max_increase = max_increase.max(load.saturating_sub(q));
    }
    Ok(MinMaxSolution {
        quotas: QuotaVector::new(quotas),
        matching: outcome.matching,
        ell,
        max_increase,
    })
}
