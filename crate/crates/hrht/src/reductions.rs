//! Instance generators driven by monotone 3-clause formulas, a tiny SAT
//! brute-forcer, structural-certificate checkers, and a seeded random
//! instance factory.
//!
//! The two gadget families encode satisfiability questions as augmentation
//! questions. The weighted family admits a zero-cost augmentation with a
//! strongly stable matching exactly when the formula is one-in-three
//! satisfiable; the capacity-1-or-2 family admits a 1-bounded augmentation
//! exactly when the formula is not-all-equal satisfiable. Both emit
//! checkable certificates of their structure: master lists from which one
//! side's preferences arise by restriction, and, for the second family, a
//! strict hospital axis along which every resident's list is single-peaked.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{HId, Instance, Matching, QuotaVector, RId};

/// Conjunction of 3-variable clauses over positive literals only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mono3SatFormula {
    num_vars: u32,
    clauses: Vec<[u32; 3]>,
}

/// Rejections from [`parse_sat`] and [`Mono3SatFormula::new`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SatParseError {
    #[error("line {line}: expected `mono3sat <num_vars>`")]
    Header { line: usize },
    #[error("line {line}: the number of variables must be positive")]
    NoVariables { line: usize },
    #[error("line {line}: malformed number `{tok}`")]
    BadNumber { line: usize, tok: String },
    #[error("line {line}: a clause needs exactly three variable indices")]
    ClauseArity { line: usize },
    #[error("line {line}: variable {var} repeated in a clause")]
    RepeatedVariable { line: usize, var: u32 },
    #[error("line {line}: variable {var} out of range 1..={max}")]
    OutOfRange { line: usize, var: u32, max: u32 },
}

impl Mono3SatFormula {
    /// Validated formula over variables `1..=num_vars`.
    pub fn new(num_vars: u32, clauses: Vec<[u32; 3]>) -> Result<Self, SatParseError> {
        if num_vars == 0 {
            return Err(SatParseError::NoVariables { line: 0 });
        }
        for (i, clause) in clauses.iter().enumerate() {
            validate_clause(clause, num_vars, i + 1)?;
        }
        Ok(Mono3SatFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[[u32; 3]] {
        &self.clauses
    }

    /// How many clauses contain `var` (1-based).
    pub fn occurrences(&self, var: u32) -> u32 {
        self.clauses
            .iter()
            .filter(|c| c.contains(&var))
            .count() as u32
    }

    /// Clause indices containing each variable, in input order; entry 0 is
    /// variable 1.
    pub fn occurrence_lists(&self) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.num_vars as usize];
        for (s, clause) in self.clauses.iter().enumerate() {
            for &var in clause {
                lists[(var - 1) as usize].push(s);
            }
        }
        lists
    }
}

fn validate_clause(clause: &[u32; 3], num_vars: u32, line: usize) -> Result<(), SatParseError> {
    for (i, &var) in clause.iter().enumerate() {
        if var == 0 || var > num_vars {
            return Err(SatParseError::OutOfRange { line, var, max: num_vars });
        }
        if clause[..i].contains(&var) {
            return Err(SatParseError::RepeatedVariable { line, var });
        }
    }
    Ok(())
}

/// Parses the `mono3sat <num_vars>` format: a header line then one clause
/// per line as three distinct 1-based indices. `#` starts a comment; blank
/// lines are ignored.
pub fn parse_sat(text: &str) -> Result<Mono3SatFormula, SatParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_line, header) = lines.next().ok_or(SatParseError::Header { line: 1 })?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("mono3sat") {
        return Err(SatParseError::Header { line: header_line });
    }
    let num_vars: u32 = match parts.next() {
        Some(tok) => tok
            .parse()
            .map_err(|_| SatParseError::BadNumber { line: header_line, tok: tok.to_string() })?,
        None => return Err(SatParseError::Header { line: header_line }),
    };
    if parts.next().is_some() {
        return Err(SatParseError::Header { line: header_line });
    }
    if num_vars == 0 {
        return Err(SatParseError::NoVariables { line: header_line });
    }
    let mut clauses = Vec::new();
    for (line, body) in lines {
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(SatParseError::ClauseArity { line });
        }
        let mut clause = [0u32; 3];
        for (i, tok) in toks.iter().enumerate() {
            clause[i] = tok
                .parse()
                .map_err(|_| SatParseError::BadNumber { line, tok: tok.to_string() })?;
        }
        validate_clause(&clause, num_vars, line)?;
        clauses.push(clause);
    }
    Ok(Mono3SatFormula { num_vars, clauses })
}

/// Which satisfaction rule a clause must meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SatMode {
    /// Exactly one variable per clause true.
    OneInThree,
    /// At least one true and at least one false per clause.
    Nae,
}

impl SatMode {
    fn clause_ok(self, true_count: u32) -> bool {
        match self {
            SatMode::OneInThree => true_count == 1,
            SatMode::Nae => (1..=2).contains(&true_count),
        }
    }

    fn requirement(self) -> &'static str {
        match self {
            SatMode::OneInThree => "exactly one",
            SatMode::Nae => "one or two",
        }
    }
}

const MAX_BRUTE_VARS: u32 = 24;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{vars} variables exceed the exhaustive limit of {max}")]
pub struct TooManyVariables {
    pub vars: u32,
    pub max: u32,
}

/// All satisfying assignments under `mode`, by exhaustive enumeration in
/// increasing bitmask order (variable 1 is the lowest bit).
pub fn sat_solutions(
    f: &Mono3SatFormula,
    mode: SatMode,
) -> Result<Vec<Vec<bool>>, TooManyVariables> {
    if f.num_vars > MAX_BRUTE_VARS {
        return Err(TooManyVariables { vars: f.num_vars, max: MAX_BRUTE_VARS });
    }
    let n = f.num_vars as usize;
    let mut out = Vec::new();
    for mask in 0u64..(1 << n) {
        let assignment: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let ok = f.clauses.iter().all(|clause| {
            let true_count = clause
                .iter()
                .filter(|&&var| assignment[(var - 1) as usize])
                .count() as u32;
            mode.clause_ok(true_count)
        });
        if ok {
            out.push(assignment);
        }
    }
    Ok(out)
}

/// Where a gadget vertex came from, for error messages that speak in terms
/// of the formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexOrigin {
    /// Per-variable vertex of the weighted gadget (a- and v-vertices).
    Variable { var: u32 },
    /// Per-occurrence vertex: b-residents in both gadgets, v-hospitals in
    /// the capacity gadget. Clauses are 1-based.
    VariableInClause { var: u32, clause: u32 },
    /// Dedicated resident holding the first rank of a per-occurrence
    /// v-hospital in the capacity gadget.
    Dedicated { var: u32, clause: u32 },
    /// Padding slot of a clause (d-residents and their last-resort
    /// f-hospitals).
    ClauseSlot { clause: u32, slot: u32 },
    /// The clause hospital itself.
    Clause { clause: u32 },
}

/// A generated gadget instance with its structural certificates.
#[derive(Clone, Debug)]
pub struct GadgetOutput {
    pub instance: Instance,
    /// Per-hospital augmentation costs (weighted gadget only).
    pub costs: Option<Vec<u64>>,
    /// Master ordering of hospitals from which every resident list arises by
    /// restriction.
    pub hospital_master_list: Option<Vec<Vec<HId>>>,
    /// Master ordering of residents (with ties) from which every hospital
    /// list arises by restriction.
    pub resident_master_list: Option<Vec<Vec<RId>>>,
    /// Strict hospital axis along which every resident list is single-peaked
    /// (capacity gadget only).
    pub single_peaked_axis: Option<Vec<HId>>,
    /// Origin of each resident, by declared index.
    pub resident_origin: Vec<VertexOrigin>,
    /// Origin of each hospital, by declared index.
    pub hospital_origin: Vec<VertexOrigin>,
}

impl GadgetOutput {
    pub fn resident_for(&self, origin: &VertexOrigin) -> Option<RId> {
        self.resident_origin
            .iter()
            .position(|o| o == origin)
            .map(|i| RId(i as u32))
    }

    pub fn hospital_for(&self, origin: &VertexOrigin) -> Option<HId> {
        self.hospital_origin
            .iter()
            .position(|o| o == origin)
            .map(|i| HId(i as u32))
    }
}

/// Rejections from the gadget generators.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GadgetError {
    #[error("variable {var} occurs {count} times, at most {max} allowed")]
    TooManyOccurrences { var: u32, count: u32, max: u32 },
    #[error("variable {var} occurs {count} times, exactly {required} required")]
    OccurrenceNotExact { var: u32, count: u32, required: u32 },
}

/// Weighted gadget: per variable p a resident `a<p>` and zero-cost hospital
/// `v<p>`; per clause s residents `b<p>_<s>` (one per member variable),
/// `d1_<s>`, `d2_<s>` and a unit-cost hospital `w<s>`. All quotas 1. The
/// instance admits a zero-cost augmentation with a strongly stable matching
/// exactly when the formula is one-in-three satisfiable. Requires every
/// variable to occur in at most 3 clauses.
pub fn gen_mincost_instance(f: &Mono3SatFormula) -> Result<GadgetOutput, GadgetError> {
    for var in 1..=f.num_vars {
        let count = f.occurrences(var);
        if count > 3 {
            return Err(GadgetError::TooManyOccurrences { var, count, max: 3 });
        }
    }
    let beta = f.num_vars as usize;
    let alpha = f.clauses.len();
    let occ = f.occurrence_lists();

    let mut resident_names = Vec::new();
    let mut resident_origin = Vec::new();
    for p in 1..=beta as u32 {
        resident_names.push(format!("a{p}"));
        resident_origin.push(VertexOrigin::Variable { var: p });
    }
    // b-residents, clause-major; all of them form one master-list tie.
    let mut b_rid = vec![[RId(0); 3]; alpha];
    for (s, clause) in f.clauses.iter().enumerate() {
        for (pos, &var) in clause.iter().enumerate() {
            b_rid[s][pos] = RId(resident_names.len() as u32);
            resident_names.push(format!("b{var}_{}", s + 1));
            resident_origin.push(VertexOrigin::VariableInClause { var, clause: s as u32 + 1 });
        }
    }
    let mut d_rid = vec![[RId(0); 2]; alpha];
    for s in 0..alpha {
        for t in 0..2 {
            d_rid[s][t] = RId(resident_names.len() as u32);
            resident_names.push(format!("d{}_{}", t + 1, s + 1));
            resident_origin.push(VertexOrigin::ClauseSlot {
                clause: s as u32 + 1,
                slot: t as u32 + 1,
            });
        }
    }

    let mut hospital_names = Vec::new();
    let mut hospital_origin = Vec::new();
    for p in 1..=beta as u32 {
        hospital_names.push(format!("v{p}"));
        hospital_origin.push(VertexOrigin::Variable { var: p });
    }
    for s in 0..alpha {
        hospital_names.push(format!("w{}", s + 1));
        hospital_origin.push(VertexOrigin::Clause { clause: s as u32 + 1 });
    }
    let v_hid = |p: usize| HId((p - 1) as u32);
    let w_hid = |s: usize| HId((beta + s) as u32);

    let mut resident_prefs: Vec<Vec<HId>> = Vec::with_capacity(resident_names.len());
    for p in 1..=beta {
        resident_prefs.push(vec![v_hid(p)]);
    }
    for (s, clause) in f.clauses.iter().enumerate() {
        for &var in clause {
            resident_prefs.push(vec![v_hid(var as usize), w_hid(s)]);
        }
    }
    for s in 0..alpha {
        for _ in 0..2 {
            resident_prefs.push(vec![w_hid(s)]);
        }
    }

    let mut hospital_prefs: Vec<Vec<Vec<RId>>> = Vec::with_capacity(hospital_names.len());
    for p in 1..=beta {
        let mut groups = vec![vec![RId((p - 1) as u32)]];
        let tie: Vec<RId> = occ[p - 1]
            .iter()
            .map(|&s| {
                let pos = f.clauses[s].iter().position(|&x| x == p as u32).unwrap();
                b_rid[s][pos]
            })
            .collect();
        if !tie.is_empty() {
            groups.push(tie);
        }
        hospital_prefs.push(groups);
    }
    for s in 0..alpha {
        hospital_prefs.push(vec![b_rid[s].to_vec(), d_rid[s].to_vec()]);
    }

    let num_hospitals = hospital_names.len();
    let costs: Vec<u64> = (0..num_hospitals).map(|i| u64::from(i >= beta)).collect();
    let instance = Instance::new(
        resident_names,
        hospital_names,
        vec![1; num_hospitals],
        resident_prefs,
        hospital_prefs,
    )
    .expect("gadget construction yields mutual, duplicate-free lists")
    .with_costs(costs.iter().map(|&c| Some(c)).collect())
    .expect("one cost per hospital");

    let hospital_master_list = Some((0..num_hospitals).map(|i| vec![HId(i as u32)]).collect());
    let mut resident_master_list: Vec<Vec<RId>> =
        (0..beta).map(|p| vec![RId(p as u32)]).collect();
    resident_master_list.push(b_rid.iter().flatten().copied().collect());
    for s in 0..alpha {
        resident_master_list.push(d_rid[s].to_vec());
    }

    Ok(GadgetOutput {
        instance,
        costs: Some(costs),
        hospital_master_list,
        resident_master_list: Some(resident_master_list),
        single_peaked_axis: None,
        resident_origin,
        hospital_origin,
    })
}

/// Capacity gadget: per clause s and member variable i, residents `a<i>_<s>`
/// and `b<i>_<s>` and a hospital `v<i>_<s>`; per clause three padding
/// residents `d<t>_<s>` and a hospital `w<s>`. All quotas 1. Occurrences of
/// a variable are chained cyclically: `b<i>_<s>` lists its own `v<i>_<s>`,
/// then the v-hospital of the variable's next occurrence, then `w<s>`, and
/// `v<i>_<s>` ties `b<i>_<s>` with the b-resident of the previous
/// occurrence. A quota vector with every value 1 or 2 admits a strongly
/// stable matching exactly when the formula is not-all-equal satisfiable.
/// With `resident_perfect`, each `d<t>_<s>` gets a private last-resort
/// hospital `f<t>_<s>`. Requires every variable to occur in exactly 4
/// clauses.
pub fn gen_cap12_instance(
    f: &Mono3SatFormula,
    resident_perfect: bool,
) -> Result<GadgetOutput, GadgetError> {
    for var in 1..=f.num_vars {
        let count = f.occurrences(var);
        if count != 4 {
            return Err(GadgetError::OccurrenceNotExact { var, count, required: 4 });
        }
    }
    let alpha = f.clauses.len();
    let occ = f.occurrence_lists();
    // Occurrence position of each (clause, member) pair within its
    // variable's cyclic chain.
    let occ_pos = |var: u32, s: usize| -> usize {
        occ[(var - 1) as usize]
            .iter()
            .position(|&c| c == s)
            .expect("clause contains the variable")
    };

    let mut resident_names = Vec::new();
    let mut resident_origin = Vec::new();
    let mut a_rid = vec![[RId(0); 3]; alpha];
    for (s, clause) in f.clauses.iter().enumerate() {
        for (pos, &var) in clause.iter().enumerate() {
            a_rid[s][pos] = RId(resident_names.len() as u32);
            resident_names.push(format!("a{var}_{}", s + 1));
            resident_origin.push(VertexOrigin::Dedicated { var, clause: s as u32 + 1 });
        }
    }
    let mut b_rid = vec![[RId(0); 3]; alpha];
    for (s, clause) in f.clauses.iter().enumerate() {
        for (pos, &var) in clause.iter().enumerate() {
            b_rid[s][pos] = RId(resident_names.len() as u32);
            resident_names.push(format!("b{var}_{}", s + 1));
            resident_origin.push(VertexOrigin::VariableInClause { var, clause: s as u32 + 1 });
        }
    }
    let mut d_rid = vec![[RId(0); 3]; alpha];
    for s in 0..alpha {
        for t in 0..3 {
            d_rid[s][t] = RId(resident_names.len() as u32);
            resident_names.push(format!("d{}_{}", t + 1, s + 1));
            resident_origin.push(VertexOrigin::ClauseSlot {
                clause: s as u32 + 1,
                slot: t as u32 + 1,
            });
        }
    }

    let mut hospital_names = Vec::new();
    let mut hospital_origin = Vec::new();
    let mut v_hid = vec![[HId(0); 3]; alpha];
    for (s, clause) in f.clauses.iter().enumerate() {
        for (pos, &var) in clause.iter().enumerate() {
            v_hid[s][pos] = HId(hospital_names.len() as u32);
            hospital_names.push(format!("v{var}_{}", s + 1));
            hospital_origin.push(VertexOrigin::VariableInClause { var, clause: s as u32 + 1 });
        }
    }
    let mut w_hid = vec![HId(0); alpha];
    for s in 0..alpha {
        w_hid[s] = HId(hospital_names.len() as u32);
        hospital_names.push(format!("w{}", s + 1));
        hospital_origin.push(VertexOrigin::Clause { clause: s as u32 + 1 });
    }
    let mut f_hid = vec![[HId(0); 3]; alpha];
    if resident_perfect {
        for s in 0..alpha {
            for t in 0..3 {
                f_hid[s][t] = HId(hospital_names.len() as u32);
                hospital_names.push(format!("f{}_{}", t + 1, s + 1));
                hospital_origin.push(VertexOrigin::ClauseSlot {
                    clause: s as u32 + 1,
                    slot: t as u32 + 1,
                });
            }
        }
    }
    // The v-hospital of the occurrence `steps` after (clause s, variable
    // var) in the variable's cyclic chain.
    let v_of_occurrence = |var: u32, s: usize, steps: usize| -> HId {
        let chain = &occ[(var - 1) as usize];
        let t = (occ_pos(var, s) + steps) % chain.len();
        let clause = chain[t];
        let pos = f.clauses[clause].iter().position(|&x| x == var).unwrap();
        v_hid[clause][pos]
    };

    let mut resident_prefs: Vec<Vec<HId>> = Vec::with_capacity(resident_names.len());
    for (s, clause) in f.clauses.iter().enumerate() {
        for (pos, _) in clause.iter().enumerate() {
            resident_prefs.push(vec![v_hid[s][pos]]);
        }
    }
    for (s, clause) in f.clauses.iter().enumerate() {
        for (pos, &var) in clause.iter().enumerate() {
            resident_prefs.push(vec![
                v_hid[s][pos],
                v_of_occurrence(var, s, 1),
                w_hid[s],
            ]);
        }
    }
    for s in 0..alpha {
        for t in 0..3 {
            let mut list = vec![w_hid[s]];
            if resident_perfect {
                list.push(f_hid[s][t]);
            }
            resident_prefs.push(list);
        }
    }

    let mut hospital_prefs: Vec<Vec<Vec<RId>>> = Vec::with_capacity(hospital_names.len());
    for (s, clause) in f.clauses.iter().enumerate() {
        for (pos, &var) in clause.iter().enumerate() {
            let chain = &occ[(var - 1) as usize];
            let prev_clause = chain[(occ_pos(var, s) + chain.len() - 1) % chain.len()];
            let prev_pos = f.clauses[prev_clause]
                .iter()
                .position(|&x| x == var)
                .unwrap();
            hospital_prefs.push(vec![
                vec![a_rid[s][pos]],
                vec![b_rid[s][pos], b_rid[prev_clause][prev_pos]],
            ]);
        }
    }
    for s in 0..alpha {
        hospital_prefs.push(vec![b_rid[s].to_vec(), d_rid[s].to_vec()]);
    }
    if resident_perfect {
        for s in 0..alpha {
            for t in 0..3 {
                hospital_prefs.push(vec![vec![d_rid[s][t]]]);
            }
        }
    }

    let num_hospitals = hospital_names.len();
    let instance = Instance::new(
        resident_names,
        hospital_names,
        vec![1; num_hospitals],
        resident_prefs,
        hospital_prefs,
    )
    .expect("gadget construction yields mutual, duplicate-free lists");

    let single_peaked_axis = Some((0..num_hospitals).map(|i| HId(i as u32)).collect());
    let mut resident_master_list: Vec<Vec<RId>> =
        a_rid.iter().flatten().map(|&r| vec![r]).collect();
    resident_master_list.push(b_rid.iter().flatten().copied().collect());
    for s in 0..alpha {
        resident_master_list.push(d_rid[s].to_vec());
    }

    Ok(GadgetOutput {
        instance,
        costs: None,
        hospital_master_list: None,
        resident_master_list: Some(resident_master_list),
        single_peaked_axis,
        resident_origin,
        hospital_origin,
    })
}

/// Rejections when reading a truth assignment back out of a witness.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("variable {var} decodes inconsistently across its occurrences")]
    InconsistentVariable { var: u32 },
    #[error("clause {clause} has {true_count} true variables, needs {requirement}")]
    ClauseNotSatisfied { clause: u32, true_count: u32, requirement: &'static str },
    #[error("resident {resident} is matched to neither its variable nor its clause hospital")]
    MalformedWitness { resident: String },
}

/// Reads a one-in-three assignment out of a strongly stable matching of a
/// zero-cost augmentation of the weighted gadget: a variable is true exactly
/// when its b-residents sit at their clause hospitals.
pub fn decode_mincost_assignment(
    g: &GadgetOutput,
    f: &Mono3SatFormula,
    m: &Matching,
) -> Result<Vec<bool>, DecodeError> {
    let mut assign: Vec<Option<bool>> = vec![None; f.num_vars as usize];
    for (s, clause) in f.clauses().iter().enumerate() {
        let clause_no = s as u32 + 1;
        let w = g
            .hospital_for(&VertexOrigin::Clause { clause: clause_no })
            .expect("one hospital per clause");
        let mut true_count = 0;
        for &var in clause {
            let b = g
                .resident_for(&VertexOrigin::VariableInClause { var, clause: clause_no })
                .expect("one b-resident per occurrence");
            let v = g
                .hospital_for(&VertexOrigin::Variable { var })
                .expect("one hospital per variable");
            let value = match m.assignment(b) {
                Some(h) if h == w => true,
                Some(h) if h == v => false,
                _ => {
                    return Err(DecodeError::MalformedWitness {
                        resident: g.instance.resident_name(b).to_string(),
                    })
                }
            };
            match assign[(var - 1) as usize] {
                Some(prev) if prev != value => {
                    return Err(DecodeError::InconsistentVariable { var })
                }
                _ => assign[(var - 1) as usize] = Some(value),
            }
            true_count += u32::from(value);
        }
        if !SatMode::OneInThree.clause_ok(true_count) {
            return Err(DecodeError::ClauseNotSatisfied {
                clause: clause_no,
                true_count,
                requirement: SatMode::OneInThree.requirement(),
            });
        }
    }
    Ok(assign.into_iter().map(|v| v.unwrap_or(false)).collect())
}

/// Reads a not-all-equal assignment out of an augmented quota vector of the
/// capacity gadget: a variable is true exactly when its v-hospitals hold two
/// slots.
pub fn decode_cap12_assignment(
    g: &GadgetOutput,
    f: &Mono3SatFormula,
    quotas: &QuotaVector,
) -> Result<Vec<bool>, DecodeError> {
    let mut assign: Vec<Option<bool>> = vec![None; f.num_vars as usize];
    for (s, clause) in f.clauses().iter().enumerate() {
        let clause_no = s as u32 + 1;
        let mut true_count = 0;
        for &var in clause {
            let v = g
                .hospital_for(&VertexOrigin::VariableInClause { var, clause: clause_no })
                .expect("one v-hospital per occurrence");
            let value = quotas[v] >= 2;
            match assign[(var - 1) as usize] {
                Some(prev) if prev != value => {
                    return Err(DecodeError::InconsistentVariable { var })
                }
                _ => assign[(var - 1) as usize] = Some(value),
            }
            true_count += u32::from(value);
        }
        if !SatMode::Nae.clause_ok(true_count) {
            return Err(DecodeError::ClauseNotSatisfied {
                clause: clause_no,
                true_count,
                requirement: SatMode::Nae.requirement(),
            });
        }
    }
    Ok(assign.into_iter().map(|v| v.unwrap_or(false)).collect())
}

/// Outcome of checking a gadget's structural certificates. Each field is
/// `None` when the certificate is absent, `Some(passed)` otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateReport {
    pub hospital_master: Option<bool>,
    pub resident_master: Option<bool>,
    pub single_peaked: Option<bool>,
    /// One line per violated vertex.
    pub failures: Vec<String>,
}

impl CertificateReport {
    pub fn all_pass(&self) -> bool {
        [self.hospital_master, self.resident_master, self.single_peaked]
            .iter()
            .all(|c| c.unwrap_or(true))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("the gadget output carries no certificates")]
pub struct MissingCertificates;

/// Checks whether a master ordering restricts to an agent's actual groups:
/// intersect each master tie with the neighbor set, drop empties, compare
/// order and tie structure.
fn restriction_matches<T: Copy + Ord>(
    master: &[Vec<T>],
    neighbors: &BTreeSet<T>,
    actual_groups: &[Vec<T>],
) -> bool {
    let mut seen = BTreeSet::new();
    for x in master.iter().flatten() {
        if !seen.insert(*x) {
            return false; // duplicated master entry
        }
    }
    if !neighbors.iter().all(|x| seen.contains(x)) {
        return false; // a neighbor is missing from the master list
    }
    let expected: Vec<BTreeSet<T>> = master
        .iter()
        .map(|tie| tie.iter().copied().filter(|x| neighbors.contains(x)).collect())
        .filter(|tie: &BTreeSet<T>| !tie.is_empty())
        .collect();
    let actual: Vec<BTreeSet<T>> = actual_groups
        .iter()
        .map(|g| g.iter().copied().collect())
        .collect();
    expected == actual
}

/// Checks the claimed certificates of a gadget output: master lists must
/// restrict to every preference list on their side, and every resident list
/// must be single-peaked along the claimed axis (each successive entry falls
/// outside the axis interval spanned by the better ones). Errs only when no
/// certificate is present at all.
pub fn verify_certificates(g: &GadgetOutput) -> Result<CertificateReport, MissingCertificates> {
    if g.hospital_master_list.is_none()
        && g.resident_master_list.is_none()
        && g.single_peaked_axis.is_none()
    {
        return Err(MissingCertificates);
    }
    let inst = &g.instance;
    let mut failures = Vec::new();

    let hospital_master = g.hospital_master_list.as_ref().map(|master| {
        let mut ok = true;
        for r in inst.residents() {
            let neighbors: BTreeSet<HId> = inst.resident_pref(r).iter().copied().collect();
            let actual: Vec<Vec<HId>> =
                inst.resident_pref(r).iter().map(|&h| vec![h]).collect();
            if !restriction_matches(master, &neighbors, &actual) {
                ok = false;
                failures.push(format!(
                    "hospital master list does not restrict to the list of {}",
                    inst.resident_name(r)
                ));
            }
        }
        ok
    });

    let resident_master = g.resident_master_list.as_ref().map(|master| {
        let mut ok = true;
        for h in inst.hospitals() {
            let neighbors: BTreeSet<RId> =
                inst.hospital_groups(h).iter().flatten().copied().collect();
            if !restriction_matches(master, &neighbors, inst.hospital_groups(h)) {
                ok = false;
                failures.push(format!(
                    "resident master list does not restrict to the list of {}",
                    inst.hospital_name(h)
                ));
            }
        }
        ok
    });

    let single_peaked = g.single_peaked_axis.as_ref().map(|axis| {
        let mut pos = vec![usize::MAX; inst.num_hospitals()];
        let mut duplicate = false;
        for (i, &h) in axis.iter().enumerate() {
            if pos[h.idx()] != usize::MAX {
                duplicate = true;
            }
            pos[h.idx()] = i;
        }
        if duplicate {
            failures.push("axis lists a hospital twice".to_string());
            return false;
        }
        let mut ok = true;
        for r in inst.residents() {
            let list = inst.resident_pref(r);
            if list.is_empty() {
                continue;
            }
            if list.iter().any(|&h| pos[h.idx()] == usize::MAX) {
                ok = false;
                failures.push(format!(
                    "axis is missing a neighbor of {}",
                    inst.resident_name(r)
                ));
                continue;
            }
            let (mut lo, mut hi) = (pos[list[0].idx()], pos[list[0].idx()]);
            for &h in &list[1..] {
                let p = pos[h.idx()];
                if p < lo {
                    lo = p;
                } else if p > hi {
                    hi = p;
                } else {
                    ok = false;
                    failures.push(format!(
                        "list of {} is not single-peaked along the axis",
                        inst.resident_name(r)
                    ));
                    break;
                }
            }
        }
        ok
    });

    Ok(CertificateReport { hospital_master, resident_master, single_peaked, failures })
}

/// Certificate sabotage for negative tests. Every kind is constructed to be
/// caught by [`verify_certificates`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateMutation {
    /// Pull one member out of a tied resident-master group into its own
    /// group right after; hospitals exhibiting that tie stop matching.
    ExtractFromTie,
    /// Move a resident that some hospital ranks strictly first to the end of
    /// the resident master list.
    DemoteTopResident,
    /// Swap a resident's last-choice hospital into the axis interval spanned
    /// by its better choices.
    SwapAxisPair,
    /// Swap the master positions of some resident's two best hospitals.
    SwapMasterHospitals,
}

/// Applies one seeded certificate mutation. Returns `None` when the output
/// lacks the certificate the mutation targets (or no breaking target
/// exists); otherwise the mutated output is guaranteed to fail
/// verification.
pub fn mutate_certificates(
    g: &GadgetOutput,
    kind: CertificateMutation,
    seed: u64,
) -> Option<GadgetOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = g.clone();
    match kind {
        CertificateMutation::ExtractFromTie => {
            let master = out.resident_master_list.as_mut()?;
            let tied: Vec<usize> = master
                .iter()
                .enumerate()
                .filter(|(_, g)| g.len() >= 2)
                .map(|(i, _)| i)
                .collect();
            let &group_idx = pick(&mut rng, &tied)?;
            let member_idx = rng.gen_range(0..master[group_idx].len());
            let member = master[group_idx].remove(member_idx);
            master.insert(group_idx + 1, vec![member]);
        }
        CertificateMutation::DemoteTopResident => {
            let inst = &g.instance;
            let master = out.resident_master_list.as_mut()?;
            // Residents ranked strictly first by a hospital with more
            // groups, and alone in their master group: moving one to the
            // end flips an order the hospital's list exhibits.
            let candidates: Vec<RId> = inst
                .hospitals()
                .filter_map(|h| {
                    let groups = inst.hospital_groups(h);
                    match groups.first() {
                        Some(first) if first.len() == 1 && groups.len() >= 2 => Some(first[0]),
                        _ => None,
                    }
                })
                .filter(|r| master.iter().any(|g| g.len() == 1 && g[0] == *r))
                .collect();
            let &target = pick(&mut rng, &candidates)?;
            master.retain(|g| !(g.len() == 1 && g[0] == target));
            master.push(vec![target]);
        }
        CertificateMutation::SwapAxisPair => {
            let inst = &g.instance;
            let axis = out.single_peaked_axis.as_mut()?;
            let mut pos = vec![usize::MAX; inst.num_hospitals()];
            for (i, &h) in axis.iter().enumerate() {
                pos[h.idx()] = i;
            }
            // (last-choice position, in-between position) pairs whose swap
            // plants the last choice inside the interval of the better ones.
            let mut candidates: Vec<(usize, usize)> = Vec::new();
            for r in inst.residents() {
                let list = inst.resident_pref(r);
                if list.len() < 3 || list.iter().any(|&h| pos[h.idx()] == usize::MAX) {
                    continue;
                }
                let last = list[list.len() - 1];
                let better = &list[..list.len() - 1];
                let lo = better.iter().map(|&h| pos[h.idx()]).min().unwrap();
                let hi = better.iter().map(|&h| pos[h.idx()]).max().unwrap();
                for p in lo + 1..hi {
                    if !better.iter().any(|&h| pos[h.idx()] == p) {
                        candidates.push((pos[last.idx()], p));
                    }
                }
            }
            let &(a, b) = pick(&mut rng, &candidates)?;
            axis.swap(a, b);
        }
        CertificateMutation::SwapMasterHospitals => {
            let inst = &g.instance;
            let master = out.hospital_master_list.as_mut()?;
            let candidates: Vec<(HId, HId)> = inst
                .residents()
                .filter(|&r| inst.resident_pref(r).len() >= 2)
                .map(|r| (inst.resident_pref(r)[0], inst.resident_pref(r)[1]))
                .collect();
            let &(first, second) = pick(&mut rng, &candidates)?;
            let i = master.iter().position(|g| g.contains(&first))?;
            let j = master.iter().position(|g| g.contains(&second))?;
            if i == j {
                return None; // tied in the master list; order carries no claim
            }
            master.swap(i, j);
        }
    }
    Some(out)
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.gen_range(0..items.len())])
    }
}

/// Shape of a seeded random instance.
#[derive(Clone, Copy, Debug)]
pub struct RandomParams {
    pub residents: u32,
    pub hospitals: u32,
    /// Probability of each resident-hospital pair being acceptable.
    pub density: f64,
    /// Largest tie length in hospital lists.
    pub max_tie: u32,
    /// Quotas are drawn uniformly from `1..=quota_max`.
    pub quota_max: u32,
    pub seed: u64,
}

/// Deterministic pseudo-random instance: edges drawn independently with the
/// given density, strict resident lists, hospital lists chopped into ties of
/// bounded length. The same parameters always produce the same instance.
pub fn gen_random_instance(p: &RandomParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let nr = p.residents as usize;
    let nh = p.hospitals as usize;
    let density = p.density.clamp(0.0, 1.0);
    let max_tie = p.max_tie.max(1) as usize;

    let mut resident_prefs: Vec<Vec<HId>> = vec![Vec::new(); nr];
    let mut hospital_adj: Vec<Vec<RId>> = vec![Vec::new(); nh];
    for r in 0..nr {
        for h in 0..nh {
            if rng.gen_bool(density) {
                resident_prefs[r].push(HId(h as u32));
                hospital_adj[h].push(RId(r as u32));
            }
        }
        resident_prefs[r].shuffle(&mut rng);
    }
    let mut hospital_prefs: Vec<Vec<Vec<RId>>> = Vec::with_capacity(nh);
    for adj in &mut hospital_adj {
        adj.shuffle(&mut rng);
        let mut groups = Vec::new();
        let mut rest = adj.as_slice();
        while !rest.is_empty() {
            let take = rng.gen_range(1..=max_tie.min(rest.len()));
            groups.push(rest[..take].to_vec());
            rest = &rest[take..];
        }
        hospital_prefs.push(groups);
    }
    let quotas: Vec<u32> = (0..nh)
        .map(|_| rng.gen_range(1..=p.quota_max.max(1)))
        .collect();

    Instance::new(
        (1..=nr).map(|i| format!("r{i}")).collect(),
        (1..=nh).map(|i| format!("h{i}")).collect(),
        quotas,
        resident_prefs,
        hospital_prefs,
    )
    .expect("random construction yields mutual, duplicate-free lists")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{parse_instance, serialize_instance};
    use crate::oracle::{brute_min_cost, OracleConfig};
    use crate::stability::solve_strong;

    const SINGLE_CLAUSE: &str = "mono3sat 3\n1 2 3\n";
    const FOUR_COPIES: &str = "mono3sat 3\n1 2 3\n1 2 3\n1 2 3\n1 2 3\n";

    #[test]
    fn parses_and_rejects_formulas() {
        let f = parse_sat(SINGLE_CLAUSE).unwrap();
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.clauses(), &[[1, 2, 3]]);
        let f = parse_sat(FOUR_COPIES).unwrap();
        assert_eq!(f.clauses().len(), 4);
        assert!((1..=3).all(|v| f.occurrences(v) == 4));

        assert_eq!(
            parse_sat("mono3sat 2\n1 1 2\n"),
            Err(SatParseError::RepeatedVariable { line: 2, var: 1 })
        );
        assert_eq!(
            parse_sat("mono3sat 2\n1 2 3\n"),
            Err(SatParseError::OutOfRange { line: 2, var: 3, max: 2 })
        );
        assert_eq!(
            parse_sat("mono3sat 3\n1 2\n"),
            Err(SatParseError::ClauseArity { line: 2 })
        );
        assert_eq!(parse_sat("sat 3\n"), Err(SatParseError::Header { line: 1 }));
        assert_eq!(parse_sat("mono3sat 0\n"), Err(SatParseError::NoVariables { line: 1 }));
        let commented = "# a comment\nmono3sat 3 # trailing\n\n1 2 3\n";
        assert_eq!(parse_sat(commented).unwrap().clauses().len(), 1);
    }

    #[test]
    fn enumerates_satisfying_assignments() {
        let single = parse_sat(SINGLE_CLAUSE).unwrap();
        let one_in_three = sat_solutions(&single, SatMode::OneInThree).unwrap();
        assert_eq!(one_in_three.len(), 3);
        assert!(one_in_three
            .iter()
            .all(|a| a.iter().filter(|&&b| b).count() == 1));
        assert_eq!(sat_solutions(&single, SatMode::Nae).unwrap().len(), 6);

        let four = parse_sat(FOUR_COPIES).unwrap();
        assert_eq!(sat_solutions(&four, SatMode::Nae).unwrap().len(), 6);

        let too_big = Mono3SatFormula::new(25, vec![]).unwrap();
        assert_eq!(
            sat_solutions(&too_big, SatMode::Nae),
            Err(TooManyVariables { vars: 25, max: 24 })
        );
    }

    #[test]
    fn weighted_gadget_shape_and_certificates() {
        let f = parse_sat(SINGLE_CLAUSE).unwrap();
        let g = gen_mincost_instance(&f).unwrap();
        assert_eq!(g.instance.num_residents(), 8);
        assert_eq!(g.instance.num_hospitals(), 4);
        assert_eq!(g.costs.as_deref(), Some(&[0, 0, 0, 1][..]));
        assert!(verify_certificates(&g).unwrap().all_pass());
        assert!(solve_strong(&g.instance, &g.instance.quota_vector()).is_none());

        let text = serialize_instance(&g.instance);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back.num_edges(), g.instance.num_edges());
        assert_eq!(back.costs_or(9), g.instance.costs_or(9));
    }

    #[test]
    fn weighted_gadget_degenerate_tie_forms() {
        // Occurrence counts 2, 2, 2, 1, 1 across two clauses.
        let f = Mono3SatFormula::new(5, vec![[1, 2, 3], [1, 2, 4], [3, 5, 2]]).unwrap();
        let g = gen_mincost_instance(&f).unwrap();
        let v1 = g.hospital_for(&VertexOrigin::Variable { var: 1 }).unwrap();
        let groups = g.instance.hospital_groups(v1);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].len(), 1);
        assert_eq!(groups[1].len(), 2); // clauses 1 and 2
        let v4 = g.hospital_for(&VertexOrigin::Variable { var: 4 }).unwrap();
        assert_eq!(g.instance.hospital_groups(v4)[1].len(), 1);
        assert!(verify_certificates(&g).unwrap().all_pass());

        let overfull =
            Mono3SatFormula::new(4, vec![[1, 2, 3], [1, 2, 4], [1, 3, 4], [1, 2, 3]]).unwrap();
        assert_eq!(
            gen_mincost_instance(&overfull).unwrap_err(),
            GadgetError::TooManyOccurrences { var: 1, count: 4, max: 3 }
        );
    }

    #[test]
    fn capacity_gadget_shape_and_certificates() {
        let f = parse_sat(FOUR_COPIES).unwrap();
        let g = gen_cap12_instance(&f, false).unwrap();
        assert_eq!(g.instance.num_residents(), 36);
        assert_eq!(g.instance.num_hospitals(), 16);
        assert!(verify_certificates(&g).unwrap().all_pass());
        assert!(solve_strong(&g.instance, &g.instance.quota_vector()).is_none());

        let rp = gen_cap12_instance(&f, true).unwrap();
        assert_eq!(rp.instance.num_hospitals(), 28);
        assert!(verify_certificates(&rp).unwrap().all_pass());
        assert!(solve_strong(&rp.instance, &rp.instance.quota_vector()).is_none());

        let single = parse_sat(SINGLE_CLAUSE).unwrap();
        assert_eq!(
            gen_cap12_instance(&single, false).unwrap_err(),
            GadgetError::OccurrenceNotExact { var: 1, count: 1, required: 4 }
        );
    }

    #[test]
    fn capacity_gadget_chains_occurrences_cyclically() {
        let f = parse_sat(FOUR_COPIES).unwrap();
        let g = gen_cap12_instance(&f, false).unwrap();
        // Variable 1 in clause 2: next occurrence is clause 3, previous is
        // clause 1.
        let b = g
            .resident_for(&VertexOrigin::VariableInClause { var: 1, clause: 2 })
            .unwrap();
        let list = g.instance.resident_pref(b);
        assert_eq!(g.instance.hospital_name(list[0]), "v1_2");
        assert_eq!(g.instance.hospital_name(list[1]), "v1_3");
        assert_eq!(g.instance.hospital_name(list[2]), "w2");
        let v = g
            .hospital_for(&VertexOrigin::VariableInClause { var: 1, clause: 2 })
            .unwrap();
        let tie = &g.instance.hospital_groups(v)[1];
        let names: Vec<&str> = tie.iter().map(|&r| g.instance.resident_name(r)).collect();
        assert_eq!(names, ["b1_2", "b1_1"]);
        // The fourth occurrence of variable 1 starting at clause 4 wraps to
        // clause 3.
        let b4 = g
            .resident_for(&VertexOrigin::VariableInClause { var: 1, clause: 4 })
            .unwrap();
        assert_eq!(g.instance.hospital_name(g.instance.resident_pref(b4)[1]), "v1_1");
    }

    #[test]
    fn weighted_witness_decodes_to_one_in_three() {
        let f = parse_sat(SINGLE_CLAUSE).unwrap();
        let g = gen_mincost_instance(&f).unwrap();
        let costs = g.instance.costs_or(1);
        let verdict = brute_min_cost(&g.instance, &costs, &OracleConfig::default()).unwrap();
        assert_eq!(verdict.optimum, Some(0));
        assert!(!verdict.witnesses.is_empty());
        for w in &verdict.witnesses {
            for m in &w.matchings {
                let assignment = decode_mincost_assignment(&g, &f, m).unwrap();
                assert_eq!(assignment.iter().filter(|&&b| b).count(), 1);
            }
        }
    }

    #[test]
    fn capacity_quotas_decode_to_nae() {
        let f = parse_sat(FOUR_COPIES).unwrap();
        let g = gen_cap12_instance(&f, false).unwrap();
        // Encode the assignment (true, false, true) the way the feasible
        // direction constructs quota vectors.
        let truth = [true, false, true];
        let mut quotas = g.instance.quota_vector();
        for s in 0..4u32 {
            for var in 1..=3u32 {
                if truth[(var - 1) as usize] {
                    let v = g
                        .hospital_for(&VertexOrigin::VariableInClause { var, clause: s + 1 })
                        .unwrap();
                    quotas.set(v, 2);
                }
            }
        }
        let decoded = decode_cap12_assignment(&g, &f, &quotas).unwrap();
        assert_eq!(decoded, truth);

        // Raising one extra v-quota in clause 1 makes all three variables
        // read true there, tripping the clause check.
        let v21 = g
            .hospital_for(&VertexOrigin::VariableInClause { var: 2, clause: 1 })
            .unwrap();
        quotas.set(v21, 2);
        assert_eq!(
            decode_cap12_assignment(&g, &f, &quotas),
            Err(DecodeError::ClauseNotSatisfied {
                clause: 1,
                true_count: 3,
                requirement: "one or two",
            })
        );
        // Raising a variable in one clause but not the next passes the
        // clause check first, then trips the consistency check.
        let mut inconsistent = g.instance.quota_vector();
        let v11 = g
            .hospital_for(&VertexOrigin::VariableInClause { var: 1, clause: 1 })
            .unwrap();
        inconsistent.set(v11, 2);
        assert_eq!(
            decode_cap12_assignment(&g, &f, &inconsistent),
            Err(DecodeError::InconsistentVariable { var: 1 })
        );
    }

    #[test]
    fn every_mutation_kind_breaks_verification() {
        let weighted = gen_mincost_instance(&parse_sat(SINGLE_CLAUSE).unwrap()).unwrap();
        let capacity = gen_cap12_instance(&parse_sat(FOUR_COPIES).unwrap(), false).unwrap();
        let cases = [
            (&weighted, CertificateMutation::ExtractFromTie),
            (&weighted, CertificateMutation::DemoteTopResident),
            (&weighted, CertificateMutation::SwapMasterHospitals),
            (&capacity, CertificateMutation::ExtractFromTie),
            (&capacity, CertificateMutation::DemoteTopResident),
            (&capacity, CertificateMutation::SwapAxisPair),
        ];
        for (i, (g, kind)) in cases.iter().enumerate() {
            let mutated = mutate_certificates(g, *kind, i as u64).unwrap();
            let report = verify_certificates(&mutated).unwrap();
            assert!(!report.all_pass(), "{kind:?} must break verification");
        }
        // Kinds that target an absent certificate are inapplicable.
        assert!(mutate_certificates(&weighted, CertificateMutation::SwapAxisPair, 0).is_none());
        assert!(
            mutate_certificates(&capacity, CertificateMutation::SwapMasterHospitals, 0).is_none()
        );
    }

    #[test]
    fn random_instances_are_deterministic_and_bounded() {
        let params = RandomParams {
            residents: 8,
            hospitals: 5,
            density: 0.5,
            max_tie: 3,
            quota_max: 2,
            seed: 7,
        };
        let a = gen_random_instance(&params);
        let b = gen_random_instance(&params);
        assert_eq!(serialize_instance(&a), serialize_instance(&b));
        assert!(a.max_tie_length() <= 3);
        assert!(a.hospitals().all(|h| (1..=2).contains(&a.quota(h))));
        let other = gen_random_instance(&RandomParams { seed: 8, ..params });
        assert_ne!(serialize_instance(&a), serialize_instance(&other));

        let empty = gen_random_instance(&RandomParams { density: 0.0, ..params });
        assert_eq!(empty.num_edges(), 0);
        let full = gen_random_instance(&RandomParams { density: 1.0, ..params });
        assert_eq!(full.num_edges(), 8 * 5);
    }
}
