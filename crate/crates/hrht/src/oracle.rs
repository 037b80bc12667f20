//! Brute-force ground truth for the augmentation solvers.
//!
//! Everything here answers questions by exhaustion so the fast algorithms
//! have something to be checked against. Feasibility of a quota vector means
//! "a strongly stable matching exists under it"; the independent mode decides
//! that by enumerating matchings (or, past the edge cap, by a pruned
//! depth-first search over assignments) and never calls the proposal-based
//! solver, while the fast mode trusts it and is flagged as such in the
//! verdict.
//!
//! Search spaces are boxes of quota vectors. The upper corner is
//! `max(q(h), deg(h))` per hospital: slots beyond a hospital's degree stay
//! permanently empty, and an empty slot never removes a blocking pair but
//! creates one whenever some neighbor sits below the hospital in its own
//! assignment, so raising quotas past the degree never helps existence.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::forced_edges::ForcedEdges;
use crate::instance::{HId, Instance, Matching, QuotaVector, RId};
use crate::stability::solve_strong;

/// Box of quota vectors searched by the brute-force optimizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBox {
    pub lower: QuotaVector,
    pub upper: QuotaVector,
}

impl SearchBox {
    /// Lower corner `q`, upper corner `max(q(h), deg(h))`.
    pub fn degree_capped(inst: &Instance) -> SearchBox {
        Self::degree_capped_with_slack(inst, 0)
    }

    /// Degree-capped box with `slack` extra slots on the upper corner, for
    /// checking that the degree cap loses nothing.
    pub fn degree_capped_with_slack(inst: &Instance, slack: u32) -> SearchBox {
        let lower = inst.quota_vector();
        let upper = QuotaVector::new(
            inst.hospitals()
                .map(|h| {
                    inst.quota(h)
                        .max(inst.hospital_degree(h) as u32)
                        .saturating_add(slack)
                })
                .collect(),
        );
        SearchBox { lower, upper }
    }

    /// Degree-capped box further clipped to `q + ell` per hospital.
    pub fn ell_capped(inst: &Instance, ell: u32) -> SearchBox {
        let base = Self::degree_capped(inst);
        let upper = QuotaVector::new(
            inst.hospitals()
                .map(|h| base.upper[h].min(inst.quota(h).saturating_add(ell)))
                .collect(),
        );
        SearchBox { lower: base.lower, upper }
    }

    /// Per-hospital widths `upper - lower`.
    pub fn widths(&self) -> Vec<u32> {
        self.lower
            .iter()
            .zip(self.upper.iter())
            .map(|(lo, up)| up - lo)
            .collect()
    }

    /// Every vector in the box, lexicographic in declared hospital order.
    /// Intended for small boxes in tests; the optimizers enumerate by level
    /// instead.
    pub fn collect_vectors(&self) -> Vec<QuotaVector> {
        let widths = self.widths();
        let mut out = Vec::new();
        let mut delta = vec![0u32; widths.len()];
        loop {
            let v: Vec<u32> = self
                .lower
                .iter()
                .zip(&delta)
                .map(|(lo, &d)| lo + d)
                .collect();
            out.push(QuotaVector::new(v));
            let mut i = widths.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if delta[i] < widths[i] {
                    delta[i] += 1;
                    break;
                }
                delta[i] = 0;
            }
        }
    }
}

/// How a brute-force optimizer decides vector feasibility.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeasibilityMode {
    /// Exhaustive: matching enumeration up to the edge cap, pruned
    /// assignment search beyond it. Shares no code with the proposal solver.
    Independent,
    /// Trust the proposal solver's existence answer. Faster, not independent.
    Fast,
}

/// Knobs for the brute-force optimizers.
#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    /// Largest instance (by edge count) the matching enumerator accepts.
    pub cap_edges: usize,
    pub mode: FeasibilityMode,
    /// Abort with [`OracleError::BoxTooLarge`] past this many vector checks.
    pub max_checks: u64,
    /// Extra upper-corner slack on the search box (degree-cap soundness
    /// checks).
    pub extra_upper: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            cap_edges: 16,
            mode: FeasibilityMode::Independent,
            max_checks: 1 << 20,
            extra_upper: 0,
        }
    }
}

/// Which question a verdict answers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleQuery {
    MinSum,
    MinSumFe,
    MinEll,
    MinCost,
    SsmAll,
}

/// One optimal quota vector with every strongly stable matching under it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotaWitness {
    pub quotas: QuotaVector,
    pub matchings: Vec<Matching>,
}

/// Result of a brute-force optimization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub query: OracleQuery,
    /// Smallest feasible objective value; `None` when the whole box fails.
    pub optimum: Option<u64>,
    /// All optimal quota vectors in lexicographic order, matchings sorted.
    pub witnesses: Vec<QuotaWitness>,
    /// Vector feasibility checks spent.
    pub feasibility_checks: u64,
    /// False when the verdict leaned on the proposal solver.
    pub independent: bool,
}

/// Why a brute-force run refused to continue.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {edges} edges, the enumeration cap is {cap}")]
    CapExceeded { edges: usize, cap: usize },
    #[error("search would exceed {max} feasibility checks")]
    BoxTooLarge { max: u64 },
}

/// Every quota-valid matching under `quotas`, each exactly once.
///
/// Deterministic order: residents choose in declared order, trying unmatched
/// first and then their preference list top-down. Errors past `cap_edges`.
pub fn enumerate_matchings(
    inst: &Instance,
    quotas: &QuotaVector,
    cap_edges: usize,
) -> Result<Vec<Matching>, OracleError> {
    let mut out = Vec::new();
    for_each_matching(inst, quotas, cap_edges, &[], &mut |assign, _| {
        out.push(Matching::from_assignments(assign.to_vec()));
        true
    })?;
    Ok(out)
}

/// Visits every quota-valid matching extending `pre`; the visitor gets the
/// assignment and per-hospital loads and returns whether to keep going.
/// Returns whether the walk ran to completion.
fn for_each_matching(
    inst: &Instance,
    quotas: &QuotaVector,
    cap_edges: usize,
    pre: &[(RId, HId)],
    visit: &mut dyn FnMut(&[Option<HId>], &[u32]) -> bool,
) -> Result<bool, OracleError> {
    if inst.num_edges() > cap_edges {
        return Err(OracleError::CapExceeded { edges: inst.num_edges(), cap: cap_edges });
    }
    let mut assign: Vec<Option<HId>> = vec![None; inst.num_residents()];
    let mut fixed = vec![false; inst.num_residents()];
    let mut loads = vec![0u32; inst.num_hospitals()];
    for &(r, h) in pre {
        assign[r.idx()] = Some(h);
        fixed[r.idx()] = true;
        loads[h.idx()] += 1;
        if loads[h.idx()] > quotas[h] {
            return Ok(true); // pre-assignment alone violates quotas: no matchings
        }
    }
    fn recurse(
        inst: &Instance,
        quotas: &QuotaVector,
        r: usize,
        assign: &mut Vec<Option<HId>>,
        fixed: &[bool],
        loads: &mut Vec<u32>,
        visit: &mut dyn FnMut(&[Option<HId>], &[u32]) -> bool,
    ) -> bool {
        if r == inst.num_residents() {
            return visit(assign, loads);
        }
        if fixed[r] {
            return recurse(inst, quotas, r + 1, assign, fixed, loads, visit);
        }
        if !recurse(inst, quotas, r + 1, assign, fixed, loads, visit) {
            return false;
        }
        for &h in inst.resident_pref(RId(r as u32)) {
            if loads[h.idx()] < quotas[h] {
                loads[h.idx()] += 1;
                assign[r] = Some(h);
                let more = recurse(inst, quotas, r + 1, assign, fixed, loads, visit);
                assign[r] = None;
                loads[h.idx()] -= 1;
                if !more {
                    return false;
                }
            }
        }
        true
    }
    Ok(recurse(inst, quotas, 0, &mut assign, &fixed, &mut loads, visit))
}

/// Strong-stability predicate evaluated directly on an assignment array.
///
/// With strict resident lists an unmatched acceptable pair blocks strongly
/// exactly when the resident strictly improves and the hospital has an open
/// slot or some member it likes no better than the resident.
fn assignment_is_strongly_stable(
    inst: &Instance,
    quotas: &QuotaVector,
    assign: &[Option<HId>],
    loads: &[u32],
) -> bool {
    let mut worst_rank: Vec<i64> = vec![-1; inst.num_hospitals()];
    for (i, a) in assign.iter().enumerate() {
        if let Some(h) = a {
            let rank = inst
                .hospital_rank(*h, RId(i as u32))
                .expect("matched pair is an edge");
            worst_rank[h.idx()] = worst_rank[h.idx()].max(i64::from(rank));
        }
    }
    for r in inst.residents() {
        let prefs = inst.resident_pref(r);
        let limit = match assign[r.idx()] {
            Some(h) => inst.resident_rank(r, h).expect("matched pair is an edge") as usize,
            None => prefs.len(),
        };
        for &h in &prefs[..limit] {
            if loads[h.idx()] < quotas[h] {
                return false;
            }
            let my_rank = inst.hospital_rank(h, r).expect("mutual edge");
            if worst_rank[h.idx()] >= i64::from(my_rank) {
                return false;
            }
        }
    }
    true
}

/// All strongly stable matchings under `quotas`, by enumeration and
/// filtering. Deterministic order (same as [`enumerate_matchings`]).
pub fn all_strongly_stable(
    inst: &Instance,
    quotas: &QuotaVector,
    cap_edges: usize,
) -> Result<Vec<Matching>, OracleError> {
    let mut out = Vec::new();
    for_each_matching(inst, quotas, cap_edges, &[], &mut |assign, loads| {
        if assignment_is_strongly_stable(inst, quotas, assign, loads) {
            out.push(Matching::from_assignments(assign.to_vec()));
        }
        true
    })?;
    Ok(out)
}

/// Pruned depth-first search over assignments, independent of both the
/// matching enumerator's cap and the proposal solver.
///
/// Residents are processed in declared order. Placing a resident below some
/// hospital h (or leaving it unmatched) commits h to end exactly full with
/// members strictly better than that resident; the search tracks, per
/// hospital, the best rank among residents that passed it over and refuses
/// assignments at or below that rank. Branches die early when a passed-over
/// hospital can no longer be filled by strictly better later residents.
struct StableSearch<'a> {
    inst: &'a Instance,
    quotas: &'a QuotaVector,
    load: Vec<u32>,
    /// Worst rank among current members, -1 when empty.
    worst_rank: Vec<i64>,
    /// Best (minimum) rank among residents that skipped the hospital;
    /// u32::MAX when never skipped. Skipped hospitals must end exactly full.
    skip_rank: Vec<u32>,
    assign: Vec<Option<HId>>,
    /// Hospital neighbors as (resident index, rank), ascending by index, for
    /// the remaining-supply prune.
    neighbors: Vec<Vec<(u32, u32)>>,
    found: Vec<Matching>,
    stop_at_first: bool,
}

impl<'a> StableSearch<'a> {
    fn new(inst: &'a Instance, quotas: &'a QuotaVector, stop_at_first: bool) -> Self {
        let neighbors = inst
            .hospitals()
            .map(|h| {
                let mut v: Vec<(u32, u32)> = inst
                    .hospital_groups(h)
                    .iter()
                    .enumerate()
                    .flat_map(|(rank, group)| {
                        group.iter().map(move |&r| (r.0, rank as u32))
                    })
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        StableSearch {
            inst,
            quotas,
            load: vec![0; inst.num_hospitals()],
            worst_rank: vec![-1; inst.num_hospitals()],
            skip_rank: vec![u32::MAX; inst.num_hospitals()],
            assign: vec![None; inst.num_residents()],
            neighbors,
            found: Vec::new(),
            stop_at_first,
        }
    }

    /// Residents past `r` adjacent to `h` at a rank strictly better than
    /// `rank_cap`; an upper bound on how much load `h` can still gain once
    /// someone of rank `rank_cap` has skipped it.
    fn remaining_supply(&self, h: HId, r: u32, rank_cap: u32) -> u32 {
        self.neighbors[h.idx()]
            .iter()
            .filter(|&&(idx, rank)| idx > r && rank < rank_cap)
            .count() as u32
    }

    /// Commits r to skip h. Returns the previous skip rank on success, or
    /// `None` when the branch is hopeless (a current member no better than
    /// r, or the hospital can no longer fill up).
    fn try_skip(&mut self, r: RId, h: HId) -> Option<u32> {
        let my_rank = self.inst.hospital_rank(h, r).expect("mutual edge");
        if self.worst_rank[h.idx()] >= i64::from(my_rank) {
            return None;
        }
        let new_skip = self.skip_rank[h.idx()].min(my_rank);
        let deficit = self.quotas[h].saturating_sub(self.load[h.idx()]);
        if deficit > self.remaining_supply(h, r.0, new_skip) {
            return None;
        }
        let old = self.skip_rank[h.idx()];
        self.skip_rank[h.idx()] = new_skip;
        Some(old)
    }

    fn search(&mut self, r: usize) -> bool {
        if r == self.inst.num_residents() {
            for h in self.inst.hospitals() {
                if self.skip_rank[h.idx()] != u32::MAX
                    && self.load[h.idx()] != self.quotas[h]
                {
                    return true;
                }
            }
            self.found
                .push(Matching::from_assignments(self.assign.clone()));
            return !self.stop_at_first;
        }
        let rid = RId(r as u32);
        let degree = self.inst.resident_pref(rid).len();
        // Try each preference position, skipping everything better; the
        // prefix of successful skips is unwound when the branch returns.
        let mut skipped: Vec<(HId, u32)> = Vec::with_capacity(degree);
        let mut keep_going = true;
        let mut prefix_alive = true;
        for pos in 0..degree {
            let h = self.inst.resident_pref(rid)[pos];
            let my_rank = self.inst.hospital_rank(h, rid).expect("mutual edge");
            // Assign r to h on top of the skips committed so far.
            if self.load[h.idx()] < self.quotas[h] && my_rank < self.skip_rank[h.idx()] {
                let old_worst = self.worst_rank[h.idx()];
                self.load[h.idx()] += 1;
                self.worst_rank[h.idx()] = old_worst.max(i64::from(my_rank));
                self.assign[r] = Some(h);
                keep_going = self.search(r + 1);
                self.assign[r] = None;
                self.worst_rank[h.idx()] = old_worst;
                self.load[h.idx()] -= 1;
                if !keep_going {
                    break;
                }
            }
            match self.try_skip(rid, h) {
                Some(old) => skipped.push((h, old)),
                None => {
                    prefix_alive = false;
                    break;
                }
            }
        }
        if keep_going && prefix_alive {
            keep_going = self.search(r + 1); // r stays unmatched
        }
        for (h, old) in skipped.into_iter().rev() {
            self.skip_rank[h.idx()] = old;
        }
        keep_going
    }
}

/// True when a strongly stable matching exists under `quotas`; decided by
/// the pruned assignment search, with no edge cap.
pub fn exists_strongly_stable_search(inst: &Instance, quotas: &QuotaVector) -> bool {
    let mut s = StableSearch::new(inst, quotas, true);
    s.search(0);
    !s.found.is_empty()
}

/// Every strongly stable matching under `quotas`, by the pruned assignment
/// search; canonically sorted.
pub fn all_strongly_stable_search(inst: &Instance, quotas: &QuotaVector) -> Vec<Matching> {
    let mut s = StableSearch::new(inst, quotas, false);
    s.search(0);
    let mut found = s.found;
    found.sort_unstable();
    found
}

/// Single-vector feasibility under the configured mode.
pub fn is_feasible_vector(inst: &Instance, quotas: &QuotaVector, cfg: &OracleConfig) -> bool {
    match cfg.mode {
        FeasibilityMode::Fast => solve_strong(inst, quotas).is_some(),
        FeasibilityMode::Independent => {
            if inst.num_edges() <= cfg.cap_edges {
                let mut found = false;
                for_each_matching(inst, quotas, cfg.cap_edges, &[], &mut |assign, loads| {
                    if assignment_is_strongly_stable(inst, quotas, assign, loads) {
                        found = true;
                        return false;
                    }
                    true
                })
                .expect("edge count checked against the cap");
                found
            } else {
                exists_strongly_stable_search(inst, quotas)
            }
        }
    }
}

/// All strongly stable matchings under one vector, canonically sorted;
/// optionally restricted to matchings containing the forced pairs.
fn stable_set(
    inst: &Instance,
    quotas: &QuotaVector,
    cfg: &OracleConfig,
    forced: Option<&ForcedEdges>,
) -> Result<Vec<Matching>, OracleError> {
    let mut out = Vec::new();
    match forced {
        Some(q) => {
            for_each_matching(inst, quotas, cfg.cap_edges, q.edges(), &mut |assign, loads| {
                if assignment_is_strongly_stable(inst, quotas, assign, loads) {
                    out.push(Matching::from_assignments(assign.to_vec()));
                }
                true
            })?;
        }
        None if inst.num_edges() <= cfg.cap_edges => {
            for_each_matching(inst, quotas, cfg.cap_edges, &[], &mut |assign, loads| {
                if assignment_is_strongly_stable(inst, quotas, assign, loads) {
                    out.push(Matching::from_assignments(assign.to_vec()));
                }
                true
            })?;
        }
        None => out = all_strongly_stable_search(inst, quotas),
    }
    out.sort_unstable();
    Ok(out)
}

struct LevelRun<'a> {
    inst: &'a Instance,
    cfg: &'a OracleConfig,
    forced: Option<&'a ForcedEdges>,
    checks: u64,
    witnesses: Vec<QuotaWitness>,
}

impl<'a> LevelRun<'a> {
    /// Checks one vector, collecting its stable set when feasible.
    fn check(&mut self, quotas: &QuotaVector) -> Result<(), OracleError> {
        if self.checks >= self.cfg.max_checks {
            return Err(OracleError::BoxTooLarge { max: self.cfg.max_checks });
        }
        self.checks += 1;
        let matchings = match (self.cfg.mode, self.forced) {
            // Fast mode screens with the proposal solver and only collects
            // witnesses for vectors it accepts.
            (FeasibilityMode::Fast, None) => {
                if solve_strong(self.inst, quotas).is_some() {
                    stable_set(self.inst, quotas, self.cfg, None)?
                } else {
                    return Ok(());
                }
            }
            _ => stable_set(self.inst, quotas, self.cfg, self.forced)?,
        };
        if !matchings.is_empty() {
            self.witnesses.push(QuotaWitness { quotas: quotas.clone(), matchings });
        }
        Ok(())
    }
}

/// Visits every delta vector with the given coordinate caps and total sum,
/// in lexicographic order.
fn for_each_delta_with_total(
    widths: &[u32],
    total: u64,
    f: &mut dyn FnMut(&[u32]) -> Result<(), OracleError>,
) -> Result<(), OracleError> {
    let suffix: Vec<u64> = {
        let mut s = vec![0u64; widths.len() + 1];
        for i in (0..widths.len()).rev() {
            s[i] = s[i + 1] + u64::from(widths[i]);
        }
        s
    };
    fn recurse(
        widths: &[u32],
        suffix: &[u64],
        i: usize,
        remaining: u64,
        delta: &mut Vec<u32>,
        f: &mut dyn FnMut(&[u32]) -> Result<(), OracleError>,
    ) -> Result<(), OracleError> {
        if remaining > suffix[i] {
            return Ok(()); // cannot place the rest
        }
        if i == widths.len() {
            return f(delta);
        }
        let cap = u64::from(widths[i]).min(remaining);
        for d in 0..=cap {
            delta[i] = d as u32;
            recurse(widths, suffix, i + 1, remaining - d, delta, f)?;
        }
        delta[i] = 0;
        Ok(())
    }
    let mut delta = vec![0u32; widths.len()];
    recurse(widths, &suffix, 0, total, &mut delta, f)
}

/// Visits every delta vector with coordinates at most `min(width, level)`
/// and maximum coordinate exactly `level`, in lexicographic order.
fn for_each_delta_max_exact(
    widths: &[u32],
    level: u32,
    f: &mut dyn FnMut(&[u32]) -> Result<(), OracleError>,
) -> Result<(), OracleError> {
    let can_hit: Vec<bool> = {
        let mut v = vec![false; widths.len() + 1];
        for i in (0..widths.len()).rev() {
            v[i] = v[i + 1] || widths[i] >= level;
        }
        v
    };
    fn recurse(
        widths: &[u32],
        can_hit: &[bool],
        level: u32,
        i: usize,
        hit: bool,
        delta: &mut Vec<u32>,
        f: &mut dyn FnMut(&[u32]) -> Result<(), OracleError>,
    ) -> Result<(), OracleError> {
        if i == widths.len() {
            return if hit || level == 0 { f(delta) } else { Ok(()) };
        }
        if !hit && level > 0 && !can_hit[i] {
            return Ok(());
        }
        for d in 0..=widths[i].min(level) {
            delta[i] = d;
            recurse(widths, can_hit, level, i + 1, hit || d == level, delta, f)?;
        }
        delta[i] = 0;
        Ok(())
    }
    let mut delta = vec![0u32; widths.len()];
    recurse(widths, &can_hit, level, 0, false, &mut delta, f)
}

/// Visits every delta vector with the given coordinate caps whose weighted
/// sum equals `cost`, in lexicographic order.
fn for_each_delta_with_cost(
    widths: &[u32],
    costs: &[u64],
    cost: u64,
    f: &mut dyn FnMut(&[u32]) -> Result<(), OracleError>,
) -> Result<(), OracleError> {
    let suffix: Vec<u64> = {
        let mut s = vec![0u64; widths.len() + 1];
        for i in (0..widths.len()).rev() {
            s[i] = s[i + 1] + u64::from(widths[i]) * costs[i];
        }
        s
    };
    fn recurse(
        widths: &[u32],
        costs: &[u64],
        suffix: &[u64],
        i: usize,
        remaining: u64,
        delta: &mut Vec<u32>,
        f: &mut dyn FnMut(&[u32]) -> Result<(), OracleError>,
    ) -> Result<(), OracleError> {
        if remaining > suffix[i] {
            return Ok(());
        }
        if i == widths.len() {
            debug_assert_eq!(remaining, 0);
            return f(delta);
        }
        for d in 0..=widths[i] {
            let spent = u64::from(d) * costs[i];
            if spent > remaining {
                break;
            }
            delta[i] = d;
            recurse(widths, costs, suffix, i + 1, remaining - spent, delta, f)?;
        }
        delta[i] = 0;
        Ok(())
    }
    let mut delta = vec![0u32; widths.len()];
    recurse(widths, costs, &suffix, 0, cost, &mut delta, f)
}

fn vector_from_delta(lower: &QuotaVector, delta: &[u32]) -> QuotaVector {
    QuotaVector::new(
        lower
            .iter()
            .zip(delta)
            .map(|(lo, &d)| lo + d)
            .collect(),
    )
}

/// Residents whose first choice is each hospital; the rank-1 assignment is
/// strongly stable once every quota covers it, which bounds every search.
fn first_choice_loads(inst: &Instance) -> Vec<u32> {
    let mut loads = vec![0u32; inst.num_hospitals()];
    for r in inst.residents() {
        if let Some(&h) = inst.resident_pref(r).first() {
            loads[h.idx()] += 1;
        }
    }
    loads
}

fn check_fe_cap(inst: &Instance, cfg: &OracleConfig) -> Result<(), OracleError> {
    if inst.num_edges() > cfg.cap_edges {
        return Err(OracleError::CapExceeded { edges: inst.num_edges(), cap: cfg.cap_edges });
    }
    Ok(())
}

/// Smallest total quota increase with a strongly stable matching, by level
/// search over the degree-capped box.
pub fn brute_minsum(inst: &Instance, cfg: &OracleConfig) -> Result<OracleVerdict, OracleError> {
    let sbox = SearchBox::degree_capped_with_slack(inst, cfg.extra_upper);
    let widths = sbox.widths();
    let first = first_choice_loads(inst);
    let bound: u64 = inst
        .hospitals()
        .map(|h| u64::from(first[h.idx()].saturating_sub(inst.quota(h))))
        .sum();
    let mut run = LevelRun { inst, cfg, forced: None, checks: 0, witnesses: Vec::new() };
    for t in 0..=bound {
        for_each_delta_with_total(&widths, t, &mut |delta| {
            run.check(&vector_from_delta(&sbox.lower, delta))
        })?;
        if !run.witnesses.is_empty() {
            return Ok(OracleVerdict {
                query: OracleQuery::MinSum,
                optimum: Some(t),
                witnesses: run.witnesses,
                feasibility_checks: run.checks,
                independent: cfg.mode == FeasibilityMode::Independent,
            });
        }
    }
    debug_assert!(false, "the rank-1 vector is always feasible within the bound");
    Ok(OracleVerdict {
        query: OracleQuery::MinSum,
        optimum: None,
        witnesses: Vec::new(),
        feasibility_checks: run.checks,
        independent: cfg.mode == FeasibilityMode::Independent,
    })
}

/// Smallest total quota increase with a strongly stable matching containing
/// every forced pair; scans the whole box before answering `None`.
/// Enumeration-based, therefore capped by `cap_edges`; always independent.
pub fn brute_minsum_fe(
    inst: &Instance,
    forced: &ForcedEdges,
    cfg: &OracleConfig,
) -> Result<OracleVerdict, OracleError> {
    check_fe_cap(inst, cfg)?;
    let sbox = SearchBox::degree_capped_with_slack(inst, cfg.extra_upper);
    let widths = sbox.widths();
    let full: u64 = widths.iter().map(|&w| u64::from(w)).sum();
    let mut run = LevelRun { inst, cfg, forced: Some(forced), checks: 0, witnesses: Vec::new() };
    for t in 0..=full {
        for_each_delta_with_total(&widths, t, &mut |delta| {
            run.check(&vector_from_delta(&sbox.lower, delta))
        })?;
        if !run.witnesses.is_empty() {
            return Ok(OracleVerdict {
                query: OracleQuery::MinSumFe,
                optimum: Some(t),
                witnesses: run.witnesses,
                feasibility_checks: run.checks,
                independent: true,
            });
        }
    }
    Ok(OracleVerdict {
        query: OracleQuery::MinSumFe,
        optimum: None,
        witnesses: Vec::new(),
        feasibility_checks: run.checks,
        independent: true,
    })
}

/// Smallest per-hospital increase bound with a strongly stable matching;
/// level L enumerates exactly the vectors whose largest increase is L.
pub fn brute_min_ell(inst: &Instance, cfg: &OracleConfig) -> Result<OracleVerdict, OracleError> {
    let sbox = SearchBox::degree_capped_with_slack(inst, cfg.extra_upper);
    let widths = sbox.widths();
    let first = first_choice_loads(inst);
    let bound: u32 = inst
        .hospitals()
        .map(|h| first[h.idx()].saturating_sub(inst.quota(h)))
        .max()
        .unwrap_or(0);
    let mut run = LevelRun { inst, cfg, forced: None, checks: 0, witnesses: Vec::new() };
    for level in 0..=bound {
        for_each_delta_max_exact(&widths, level, &mut |delta| {
            run.check(&vector_from_delta(&sbox.lower, delta))
        })?;
        if !run.witnesses.is_empty() {
            return Ok(OracleVerdict {
                query: OracleQuery::MinEll,
                optimum: Some(u64::from(level)),
                witnesses: run.witnesses,
                feasibility_checks: run.checks,
                independent: cfg.mode == FeasibilityMode::Independent,
            });
        }
    }
    debug_assert!(false, "the rank-1 vector is always feasible within the bound");
    Ok(OracleVerdict {
        query: OracleQuery::MinEll,
        optimum: None,
        witnesses: Vec::new(),
        feasibility_checks: run.checks,
        independent: cfg.mode == FeasibilityMode::Independent,
    })
}

/// Smallest weighted quota increase with a strongly stable matching, one
/// cost level at a time over the degree-capped box.
pub fn brute_min_cost(
    inst: &Instance,
    costs: &[u64],
    cfg: &OracleConfig,
) -> Result<OracleVerdict, OracleError> {
    assert_eq!(costs.len(), inst.num_hospitals(), "one cost per hospital");
    let sbox = SearchBox::degree_capped_with_slack(inst, cfg.extra_upper);
    let widths = sbox.widths();
    let full: u64 = widths
        .iter()
        .zip(costs)
        .map(|(&w, &c)| u64::from(w) * c)
        .sum();
    let mut run = LevelRun { inst, cfg, forced: None, checks: 0, witnesses: Vec::new() };
    for cost in 0..=full {
        for_each_delta_with_cost(&widths, costs, cost, &mut |delta| {
            run.check(&vector_from_delta(&sbox.lower, delta))
        })?;
        if !run.witnesses.is_empty() {
            return Ok(OracleVerdict {
                query: OracleQuery::MinCost,
                optimum: Some(cost),
                witnesses: run.witnesses,
                feasibility_checks: run.checks,
                independent: cfg.mode == FeasibilityMode::Independent,
            });
        }
    }
    Ok(OracleVerdict {
        query: OracleQuery::MinCost,
        optimum: None,
        witnesses: Vec::new(),
        feasibility_checks: run.checks,
        independent: cfg.mode == FeasibilityMode::Independent,
    })
}

/// Every strongly stable matching at the instance quotas, as a verdict.
pub fn brute_ssm_all(inst: &Instance, cfg: &OracleConfig) -> Result<OracleVerdict, OracleError> {
    let quotas = inst.quota_vector();
    let matchings = stable_set(inst, &quotas, cfg, None)?;
    let witnesses = if matchings.is_empty() {
        Vec::new()
    } else {
        vec![QuotaWitness { quotas, matchings }]
    };
    Ok(OracleVerdict {
        query: OracleQuery::SsmAll,
        optimum: None,
        witnesses,
        feasibility_checks: 1,
        independent: true,
    })
}

/// Sorted edge sets of all strongly stable matchings, for set comparisons in
/// tests.
pub fn matchings_as_sets(matchings: &[Matching]) -> BTreeSet<Vec<Option<HId>>> {
    matchings
        .iter()
        .map(|m| m.iter().map(|(_, h)| h).collect())
        .collect()
}
