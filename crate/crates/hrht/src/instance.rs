//! Instance model and the `HRHT v1` text format.
//!
//! An instance pairs residents, each holding a strict preference list over
//! hospitals, with hospitals holding tied preference lists over residents.
//! Hospital lists are sequences of rank groups: every resident in a group is
//! preferred to every resident in a later group, and residents inside one
//! group are tied. Each hospital has a nonnegative quota. Optional forced
//! edges and per-hospital costs ride along for the forced-edge and
//! cost-minimisation pipelines.
//!
//! Instances are immutable after construction and all operations on them are
//! pure, so values can be shared freely between threads.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::ops::Index;

use thiserror::Error;

/// First line of every instance file.
pub const FORMAT_HEADER: &str = "HRHT v1";

/// Rank sentinel for "not adjacent" in the dense rank tables.
pub(crate) const NO_RANK: u32 = u32::MAX;

/// Resident index in declared order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RId(pub u32);

/// Hospital index in declared order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HId(pub u32);

impl RId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl HId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// One quota per hospital, indexed in declared order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuotaVector(Vec<u32>);

impl QuotaVector {
    pub fn new(quotas: Vec<u32>) -> Self {
        QuotaVector(quotas)
    }

    pub fn uniform(hospitals: usize, quota: u32) -> Self {
        QuotaVector(vec![quota; hospitals])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, h: HId) -> u32 {
        self.0[h.idx()]
    }

    pub fn set(&mut self, h: HId, quota: u32) {
        self.0[h.idx()] = quota;
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    /// True when `self[h] >= other[h]` for every hospital.
    pub fn pointwise_ge(&self, other: &QuotaVector) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    /// Sum over hospitals of `max(0, self[h] - base[h])`.
    pub fn total_increase_over(&self, base: &QuotaVector) -> u64 {
        assert_eq!(self.0.len(), base.0.len());
        self.0
            .iter()
            .zip(&base.0)
            .map(|(&a, &b)| u64::from(a.saturating_sub(b)))
            .sum()
    }

    /// Largest single-hospital increase, `max_h max(0, self[h] - base[h])`.
    pub fn max_increase_over(&self, base: &QuotaVector) -> u32 {
        assert_eq!(self.0.len(), base.0.len());
        self.0
            .iter()
            .zip(&base.0)
            .map(|(&a, &b)| a.saturating_sub(b))
            .max()
            .unwrap_or(0)
    }

    /// Copy with every quota raised by `delta` (saturating).
    pub fn raised_by(&self, delta: u32) -> QuotaVector {
        QuotaVector(self.0.iter().map(|&q| q.saturating_add(delta)).collect())
    }
}

impl Index<HId> for QuotaVector {
    type Output = u32;

    fn index(&self, h: HId) -> &u32 {
        &self.0[h.idx()]
    }
}

impl From<Vec<u32>> for QuotaVector {
    fn from(quotas: Vec<u32>) -> Self {
        QuotaVector(quotas)
    }
}

/// Assignment of each resident to at most one hospital.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    assign: Vec<Option<HId>>,
}

/// Why a matching is invalid against an instance and quota vector.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("matching covers {got} residents, instance has {want}")]
    WrongLength { got: usize, want: usize },
    #[error("assigned pair ({resident}, {hospital}) is not an edge")]
    NotAnEdge { resident: String, hospital: String },
    #[error("hospital {hospital} holds {load} residents, quota {quota}")]
    Oversubscribed { hospital: String, load: u32, quota: u32 },
}

impl Matching {
    /// Everyone-unmatched assignment over `residents` residents.
    pub fn unmatched(residents: usize) -> Self {
        Matching { assign: vec![None; residents] }
    }

    pub fn from_assignments(assign: Vec<Option<HId>>) -> Self {
        Matching { assign }
    }

    pub fn len(&self) -> usize {
        self.assign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }

    pub fn assignment(&self, r: RId) -> Option<HId> {
        self.assign[r.idx()]
    }

    pub fn set(&mut self, r: RId, h: Option<HId>) {
        self.assign[r.idx()] = h;
    }

    pub fn iter(&self) -> impl Iterator<Item = (RId, Option<HId>)> + '_ {
        self.assign
            .iter()
            .enumerate()
            .map(|(i, &h)| (RId(i as u32), h))
    }

    pub fn matched_count(&self) -> usize {
        self.assign.iter().filter(|h| h.is_some()).count()
    }

    /// Residents assigned to each hospital, counted in declared order.
    pub fn loads(&self, hospitals: usize) -> Vec<u32> {
        let mut loads = vec![0u32; hospitals];
        for h in self.assign.iter().flatten() {
            loads[h.idx()] += 1;
        }
        loads
    }

    /// Residents currently assigned to `h`, in declared order.
    pub fn residents_of(&self, h: HId) -> Vec<RId> {
        self.assign
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == Some(h))
            .map(|(i, _)| RId(i as u32))
            .collect()
    }

    /// Checks edge membership and quota compliance.
    pub fn check_valid(
        &self,
        inst: &Instance,
        quotas: &QuotaVector,
    ) -> Result<(), MatchingError> {
        if self.assign.len() != inst.num_residents() {
            return Err(MatchingError::WrongLength {
                got: self.assign.len(),
                want: inst.num_residents(),
            });
        }
        for (r, h) in self.iter() {
            if let Some(h) = h {
                if inst.resident_rank(r, h).is_none() {
                    return Err(MatchingError::NotAnEdge {
                        resident: inst.resident_name(r).to_owned(),
                        hospital: inst.hospital_name(h).to_owned(),
                    });
                }
            }
        }
        for (i, &load) in self.loads(inst.num_hospitals()).iter().enumerate() {
            let h = HId(i as u32);
            if load > quotas[h] {
                return Err(MatchingError::Oversubscribed {
                    hospital: inst.hospital_name(h).to_owned(),
                    load,
                    quota: quotas[h],
                });
            }
        }
        Ok(())
    }
}

/// A hospitals/residents instance with hospital-side ties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    resident_names: Vec<String>,
    hospital_names: Vec<String>,
    quotas: Vec<u32>,
    resident_prefs: Vec<Vec<HId>>,
    hospital_prefs: Vec<Vec<Vec<RId>>>,
    forced: Vec<(RId, HId)>,
    costs: Vec<Option<u64>>,
    // Dense rank tables, NO_RANK where not adjacent. A resident's rank of a
    // hospital is its position in the strict list; a hospital's rank of a
    // resident is the index of the group containing it.
    r_rank: Vec<Vec<u32>>,
    h_rank: Vec<Vec<u32>>,
}

/// Structural violations rejected by [`Instance::new`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidationError {
    #[error("invalid id token `{0}`")]
    BadToken(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("expected {want} {what}, got {got}")]
    LengthMismatch { what: &'static str, want: usize, got: usize },
    #[error("index out of range in the preference list of `{0}`")]
    IndexOutOfRange(String),
    #[error("duplicate entry `{entry}` in the preference list of `{owner}`")]
    DuplicateEntry { owner: String, entry: String },
    #[error("empty tie group in the preference list of `{0}`")]
    EmptyGroup(String),
    #[error("edge ({resident}, {hospital}) is not mutual")]
    NonMutual { resident: String, hospital: String },
    #[error("forced pair ({resident}, {hospital}) is not an edge")]
    ForcedNonEdge { resident: String, hospital: String },
}

fn valid_token(token: &str) -> bool {
    !token.is_empty()
        && !token
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '#' | '(' | ')' | '[' | ']' | ':'))
}

impl Instance {
    /// Builds and validates an instance from its parts.
    ///
    /// Preference lists index into the declared orders; hospital lists are
    /// given as rank groups, most preferred first.
    pub fn new(
        resident_names: Vec<String>,
        hospital_names: Vec<String>,
        quotas: Vec<u32>,
        resident_prefs: Vec<Vec<HId>>,
        hospital_prefs: Vec<Vec<Vec<RId>>>,
    ) -> Result<Instance, ValidationError> {
        let nr = resident_names.len();
        let nh = hospital_names.len();
        if quotas.len() != nh {
            return Err(ValidationError::LengthMismatch {
                what: "quotas",
                want: nh,
                got: quotas.len(),
            });
        }
        if resident_prefs.len() != nr {
            return Err(ValidationError::LengthMismatch {
                what: "resident preference lists",
                want: nr,
                got: resident_prefs.len(),
            });
        }
        if hospital_prefs.len() != nh {
            return Err(ValidationError::LengthMismatch {
                what: "hospital preference lists",
                want: nh,
                got: hospital_prefs.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &resident_names {
            if !valid_token(name) {
                return Err(ValidationError::BadToken(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(ValidationError::DuplicateId(name.clone()));
            }
        }
        seen.clear();
        for name in &hospital_names {
            if !valid_token(name) {
                return Err(ValidationError::BadToken(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(ValidationError::DuplicateId(name.clone()));
            }
        }

        let mut r_rank = vec![vec![NO_RANK; nh]; nr];
        for (i, prefs) in resident_prefs.iter().enumerate() {
            for (pos, &h) in prefs.iter().enumerate() {
                if h.idx() >= nh {
                    return Err(ValidationError::IndexOutOfRange(
                        resident_names[i].clone(),
                    ));
                }
                if r_rank[i][h.idx()] != NO_RANK {
                    return Err(ValidationError::DuplicateEntry {
                        owner: resident_names[i].clone(),
                        entry: hospital_names[h.idx()].clone(),
                    });
                }
                r_rank[i][h.idx()] = pos as u32;
            }
        }
        let mut h_rank = vec![vec![NO_RANK; nr]; nh];
        for (i, groups) in hospital_prefs.iter().enumerate() {
            for (rank, group) in groups.iter().enumerate() {
                if group.is_empty() {
                    return Err(ValidationError::EmptyGroup(
                        hospital_names[i].clone(),
                    ));
                }
                for &r in group {
                    if r.idx() >= nr {
                        return Err(ValidationError::IndexOutOfRange(
                            hospital_names[i].clone(),
                        ));
                    }
                    if h_rank[i][r.idx()] != NO_RANK {
                        return Err(ValidationError::DuplicateEntry {
                            owner: hospital_names[i].clone(),
                            entry: resident_names[r.idx()].clone(),
                        });
                    }
                    h_rank[i][r.idx()] = rank as u32;
                }
            }
        }
        for r in 0..nr {
            for h in 0..nh {
                if (r_rank[r][h] == NO_RANK) != (h_rank[h][r] == NO_RANK) {
                    return Err(ValidationError::NonMutual {
                        resident: resident_names[r].clone(),
                        hospital: hospital_names[h].clone(),
                    });
                }
            }
        }

        let costs = vec![None; nh];
        Ok(Instance {
            resident_names,
            hospital_names,
            quotas,
            resident_prefs,
            hospital_prefs,
            forced: Vec::new(),
            costs,
            r_rank,
            h_rank,
        })
    }

    /// Replaces the stored forced pairs; each must be an edge.
    pub fn with_forced(mut self, forced: Vec<(RId, HId)>) -> Result<Instance, ValidationError> {
        for &(r, h) in &forced {
            if r.idx() >= self.num_residents()
                || h.idx() >= self.num_hospitals()
                || self.resident_rank(r, h).is_none()
            {
                return Err(ValidationError::ForcedNonEdge {
                    resident: self
                        .resident_names
                        .get(r.idx())
                        .cloned()
                        .unwrap_or_else(|| format!("<resident {}>", r.0)),
                    hospital: self
                        .hospital_names
                        .get(h.idx())
                        .cloned()
                        .unwrap_or_else(|| format!("<hospital {}>", h.0)),
                });
            }
        }
        self.forced = forced;
        Ok(self)
    }

    /// Replaces the stored per-hospital costs (`None` = unspecified).
    pub fn with_costs(mut self, costs: Vec<Option<u64>>) -> Result<Instance, ValidationError> {
        if costs.len() != self.num_hospitals() {
            return Err(ValidationError::LengthMismatch {
                what: "costs",
                want: self.num_hospitals(),
                got: costs.len(),
            });
        }
        self.costs = costs;
        Ok(self)
    }

    pub fn num_residents(&self) -> usize {
        self.resident_names.len()
    }

    pub fn num_hospitals(&self) -> usize {
        self.hospital_names.len()
    }

    pub fn residents(&self) -> impl DoubleEndedIterator<Item = RId> + ExactSizeIterator {
        (0..self.num_residents() as u32).map(RId)
    }

    pub fn hospitals(&self) -> impl DoubleEndedIterator<Item = HId> + ExactSizeIterator {
        (0..self.num_hospitals() as u32).map(HId)
    }

    pub fn resident_name(&self, r: RId) -> &str {
        &self.resident_names[r.idx()]
    }

    pub fn hospital_name(&self, h: HId) -> &str {
        &self.hospital_names[h.idx()]
    }

    pub fn resident_names(&self) -> &[String] {
        &self.resident_names
    }

    pub fn hospital_names(&self) -> &[String] {
        &self.hospital_names
    }

    /// Declared index of the resident named `name`.
    pub fn resident_by_name(&self, name: &str) -> Option<RId> {
        self.resident_names
            .iter()
            .position(|n| n == name)
            .map(|i| RId(i as u32))
    }

    /// Declared index of the hospital named `name`.
    pub fn hospital_by_name(&self, name: &str) -> Option<HId> {
        self.hospital_names
            .iter()
            .position(|n| n == name)
            .map(|i| HId(i as u32))
    }

    pub fn quota(&self, h: HId) -> u32 {
        self.quotas[h.idx()]
    }

    pub fn quotas(&self) -> &[u32] {
        &self.quotas
    }

    pub fn quota_vector(&self) -> QuotaVector {
        QuotaVector(self.quotas.clone())
    }

    /// Strict preference list of `r`, most preferred first.
    pub fn resident_pref(&self, r: RId) -> &[HId] {
        &self.resident_prefs[r.idx()]
    }

    /// Rank groups of `h`, most preferred first.
    pub fn hospital_groups(&self, h: HId) -> &[Vec<RId>] {
        &self.hospital_prefs[h.idx()]
    }

    /// Position of `h` in the list of `r`, `None` when not adjacent.
    pub fn resident_rank(&self, r: RId, h: HId) -> Option<u32> {
        match self.r_rank[r.idx()][h.idx()] {
            NO_RANK => None,
            rank => Some(rank),
        }
    }

    /// Group index of `r` in the list of `h`, `None` when not adjacent.
    pub fn hospital_rank(&self, h: HId, r: RId) -> Option<u32> {
        match self.h_rank[h.idx()][r.idx()] {
            NO_RANK => None,
            rank => Some(rank),
        }
    }

    pub fn is_edge(&self, r: RId, h: HId) -> bool {
        self.r_rank[r.idx()][h.idx()] != NO_RANK
    }

    pub fn resident_degree(&self, r: RId) -> usize {
        self.resident_prefs[r.idx()].len()
    }

    pub fn hospital_degree(&self, h: HId) -> usize {
        self.hospital_prefs[h.idx()].iter().map(Vec::len).sum()
    }

    pub fn num_edges(&self) -> usize {
        self.resident_prefs.iter().map(Vec::len).sum()
    }

    /// All edges, grouped by resident in declared order, most preferred first.
    pub fn edges(&self) -> impl Iterator<Item = (RId, HId)> + '_ {
        self.resident_prefs.iter().enumerate().flat_map(|(i, prefs)| {
            prefs.iter().map(move |&h| (RId(i as u32), h))
        })
    }

    /// Largest rank-group size over all hospital lists; 1 when all lists are
    /// strict or empty.
    pub fn max_tie_length(&self) -> u32 {
        self.hospital_prefs
            .iter()
            .flat_map(|groups| groups.iter().map(|g| g.len() as u32))
            .max()
            .unwrap_or(1)
            .max(1)
    }

    /// Forced pairs carried by the instance file, in file order.
    pub fn forced_pairs(&self) -> &[(RId, HId)] {
        &self.forced
    }

    /// Augmentation cost of `h`, `None` when the file gave no cost line.
    pub fn cost(&self, h: HId) -> Option<u64> {
        self.costs[h.idx()]
    }

    /// Per-hospital costs with unspecified entries replaced by `default`.
    pub fn costs_or(&self, default: u64) -> Vec<u64> {
        self.costs.iter().map(|c| c.unwrap_or(default)).collect()
    }
}

/// Violations rejected by [`parse_instance`], each tagged with its line.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("missing `{FORMAT_HEADER}` header")]
    MissingHeader,
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: unknown id `{id}`")]
    UnknownId { line: usize, id: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: non-mutual edge ({resident}, {hospital})")]
    NonMutualEdge { line: usize, resident: String, hospital: String },
    #[error("line {line}: resident-side tie")]
    ResidentTie { line: usize },
    #[error("line {line}: negative quota")]
    NegativeQuota { line: usize },
    #[error("line {line}: negative cost")]
    NegativeCost { line: usize },
    #[error("line {line}: duplicate entry `{id}` in a preference list")]
    DuplicateEntry { line: usize, id: String },
    #[error("line {line}: duplicate cost for `{id}`")]
    DuplicateCost { line: usize, id: String },
    #[error("line {line}: duplicate forced pair ({resident}, {hospital})")]
    DuplicateForced { line: usize, resident: String, hospital: String },
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, col, msg: msg.into() }
}

/// One preference entry on a hospital line.
enum Entry {
    Single(String),
    Tie(Vec<String>),
}

/// Splits a preference-list body into entries, honouring `( ... )` ties.
fn tokenize_body(line_no: usize, offset: usize, body: &str) -> Result<Vec<Entry>, ParseError> {
    let mut entries = Vec::new();
    let mut tie: Option<Vec<String>> = None;
    let mut token_start = None::<usize>;
    let col = |i: usize| offset + i + 1;

    let flush = |start: Option<usize>, end: usize, tie: &mut Option<Vec<String>>,
                     entries: &mut Vec<Entry>, body: &str| {
        if let Some(s) = start {
            let token = body[s..end].to_owned();
            match tie {
                Some(group) => group.push(token),
                None => entries.push(Entry::Single(token)),
            }
        }
    };

    for (i, c) in body.char_indices() {
        match c {
            c if c.is_whitespace() => {
                flush(token_start.take(), i, &mut tie, &mut entries, body);
            }
            '(' => {
                flush(token_start.take(), i, &mut tie, &mut entries, body);
                if tie.is_some() {
                    return Err(syntax(line_no, col(i), "nested tie"));
                }
                tie = Some(Vec::new());
            }
            ')' => {
                flush(token_start.take(), i, &mut tie, &mut entries, body);
                match tie.take() {
                    Some(group) if group.is_empty() => {
                        return Err(syntax(line_no, col(i), "empty tie"));
                    }
                    Some(group) => entries.push(Entry::Tie(group)),
                    None => return Err(syntax(line_no, col(i), "unmatched `)`")),
                }
            }
            '[' | ']' | ':' | '#' => {
                return Err(syntax(line_no, col(i), format!("unexpected `{c}`")));
            }
            _ => {
                if token_start.is_none() {
                    token_start = Some(i);
                }
            }
        }
    }
    flush(token_start.take(), body.len(), &mut tie, &mut entries, body);
    if tie.is_some() {
        return Err(syntax(line_no, col(body.len()), "unclosed tie"));
    }
    Ok(entries)
}

struct RawResident {
    name: String,
    line: usize,
    prefs: Vec<String>,
}

struct RawHospital {
    name: String,
    line: usize,
    quota: u32,
    groups: Vec<Vec<String>>,
}

/// Parses `HRHT v1` text into an [`Instance`].
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut residents: Vec<RawResident> = Vec::new();
    let mut hospitals: Vec<RawHospital> = Vec::new();
    let mut forced_raw: Vec<(usize, String, String)> = Vec::new();
    let mut costs_raw: Vec<(usize, String, u64)> = Vec::new();
    let mut header_seen = false;

    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        };
        if line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if line.trim() != FORMAT_HEADER {
                return Err(ParseError::MissingHeader);
            }
            header_seen = true;
            continue;
        }

        let colon = match line.find(':') {
            Some(p) => p,
            None => return Err(syntax(line_no, line.len() + 1, "expected `:`")),
        };
        let head: Vec<&str> = line[..colon].split_whitespace().collect();
        let body = &line[colon + 1..];
        let body_off = colon + 1;

        match head.first().copied() {
            Some("resident") => {
                if head.len() != 2 {
                    return Err(syntax(line_no, 1, "expected `resident <id>:`"));
                }
                let name = head[1].to_owned();
                let entries = tokenize_body(line_no, body_off, body)?;
                let mut prefs = Vec::new();
                for e in entries {
                    match e {
                        Entry::Single(t) => prefs.push(t),
                        Entry::Tie(_) => {
                            return Err(ParseError::ResidentTie { line: line_no });
                        }
                    }
                }
                residents.push(RawResident { name, line: line_no, prefs });
            }
            Some("hospital") => {
                if head.len() != 3 {
                    return Err(syntax(
                        line_no,
                        1,
                        "expected `hospital <id> [<quota>]:`",
                    ));
                }
                let name = head[1].to_owned();
                let bracket = head[2];
                let inner = bracket
                    .strip_prefix('[')
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or_else(|| syntax(line_no, 1, "expected quota in `[ ]`"))?;
                let quota: i64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| syntax(line_no, 1, "quota is not an integer"))?;
                if quota < 0 {
                    return Err(ParseError::NegativeQuota { line: line_no });
                }
                let quota = u32::try_from(quota)
                    .map_err(|_| syntax(line_no, 1, "quota too large"))?;
                let entries = tokenize_body(line_no, body_off, body)?;
                let groups = entries
                    .into_iter()
                    .map(|e| match e {
                        Entry::Single(t) => vec![t],
                        Entry::Tie(g) => g,
                    })
                    .collect();
                hospitals.push(RawHospital { name, line: line_no, quota, groups });
            }
            Some("forced") => {
                if head.len() != 1 {
                    return Err(syntax(line_no, 1, "expected `forced: <rid> <hid>`"));
                }
                let mut ids = Vec::new();
                for e in tokenize_body(line_no, body_off, body)? {
                    match e {
                        Entry::Single(t) => ids.push(t),
                        Entry::Tie(_) => {
                            return Err(syntax(line_no, body_off + 1, "tie in forced pair"));
                        }
                    }
                }
                if ids.len() != 2 {
                    return Err(syntax(line_no, body_off + 1, "expected `<rid> <hid>`"));
                }
                forced_raw.push((line_no, ids.remove(0), ids.remove(0)));
            }
            Some("cost") => {
                if head.len() != 2 {
                    return Err(syntax(line_no, 1, "expected `cost <hid>: <n>`"));
                }
                let value_text = body.trim();
                let value: i128 = value_text
                    .parse()
                    .map_err(|_| syntax(line_no, body_off + 1, "cost is not an integer"))?;
                if value < 0 {
                    return Err(ParseError::NegativeCost { line: line_no });
                }
                let value = u64::try_from(value)
                    .map_err(|_| syntax(line_no, body_off + 1, "cost too large"))?;
                costs_raw.push((line_no, head[1].to_owned(), value));
            }
            Some(other) => {
                return Err(syntax(line_no, 1, format!("unknown line kind `{other}`")));
            }
            None => return Err(syntax(line_no, 1, "expected a line kind")),
        }
    }
    if !header_seen {
        return Err(ParseError::MissingHeader);
    }

    // Resolve names. Residents and hospitals live in separate namespaces.
    let mut r_index: HashMap<&str, RId> = HashMap::new();
    for (i, r) in residents.iter().enumerate() {
        if !valid_token(&r.name) {
            return Err(syntax(r.line, 1, format!("invalid id `{}`", r.name)));
        }
        if r_index.insert(&r.name, RId(i as u32)).is_some() {
            return Err(ParseError::DuplicateId { line: r.line, id: r.name.clone() });
        }
    }
    let mut h_index: HashMap<&str, HId> = HashMap::new();
    for (i, h) in hospitals.iter().enumerate() {
        if !valid_token(&h.name) {
            return Err(syntax(h.line, 1, format!("invalid id `{}`", h.name)));
        }
        if h_index.insert(&h.name, HId(i as u32)).is_some() {
            return Err(ParseError::DuplicateId { line: h.line, id: h.name.clone() });
        }
    }

    let mut resident_prefs: Vec<Vec<HId>> = Vec::with_capacity(residents.len());
    for r in &residents {
        let mut prefs = Vec::with_capacity(r.prefs.len());
        let mut seen = HashSet::new();
        for name in &r.prefs {
            let &h = h_index
                .get(name.as_str())
                .ok_or_else(|| ParseError::UnknownId { line: r.line, id: name.clone() })?;
            if !seen.insert(h) {
                return Err(ParseError::DuplicateEntry { line: r.line, id: name.clone() });
            }
            prefs.push(h);
        }
        resident_prefs.push(prefs);
    }
    let mut hospital_prefs: Vec<Vec<Vec<RId>>> = Vec::with_capacity(hospitals.len());
    for h in &hospitals {
        let mut groups = Vec::with_capacity(h.groups.len());
        let mut seen = HashSet::new();
        for group in &h.groups {
            let mut ids = Vec::with_capacity(group.len());
            for name in group {
                let &r = r_index
                    .get(name.as_str())
                    .ok_or_else(|| ParseError::UnknownId { line: h.line, id: name.clone() })?;
                if !seen.insert(r) {
                    return Err(ParseError::DuplicateEntry { line: h.line, id: name.clone() });
                }
                ids.push(r);
            }
            groups.push(ids);
        }
        hospital_prefs.push(groups);
    }

    // Mutuality, attributed to the line whose list holds the one-sided entry.
    let mut r_side = HashSet::new();
    for (i, prefs) in resident_prefs.iter().enumerate() {
        for &h in prefs {
            r_side.insert((RId(i as u32), h));
        }
    }
    let mut h_side = HashSet::new();
    for (i, groups) in hospital_prefs.iter().enumerate() {
        for &r in groups.iter().flatten() {
            h_side.insert((r, HId(i as u32)));
            if !r_side.contains(&(r, HId(i as u32))) {
                return Err(ParseError::NonMutualEdge {
                    line: hospitals[i].line,
                    resident: residents[r.idx()].name.clone(),
                    hospital: hospitals[i].name.clone(),
                });
            }
        }
    }
    for (i, prefs) in resident_prefs.iter().enumerate() {
        for &h in prefs {
            if !h_side.contains(&(RId(i as u32), h)) {
                return Err(ParseError::NonMutualEdge {
                    line: residents[i].line,
                    resident: residents[i].name.clone(),
                    hospital: hospitals[h.idx()].name.clone(),
                });
            }
        }
    }

    let mut forced = Vec::with_capacity(forced_raw.len());
    for (line, r_name, h_name) in &forced_raw {
        let &r = r_index
            .get(r_name.as_str())
            .ok_or_else(|| ParseError::UnknownId { line: *line, id: r_name.clone() })?;
        let &h = h_index
            .get(h_name.as_str())
            .ok_or_else(|| ParseError::UnknownId { line: *line, id: h_name.clone() })?;
        if forced.contains(&(r, h)) {
            return Err(ParseError::DuplicateForced {
                line: *line,
                resident: r_name.clone(),
                hospital: h_name.clone(),
            });
        }
        forced.push((r, h));
    }
    let mut costs: Vec<Option<u64>> = vec![None; hospitals.len()];
    for (line, h_name, value) in &costs_raw {
        let &h = h_index
            .get(h_name.as_str())
            .ok_or_else(|| ParseError::UnknownId { line: *line, id: h_name.clone() })?;
        if costs[h.idx()].is_some() {
            return Err(ParseError::DuplicateCost { line: *line, id: h_name.clone() });
        }
        costs[h.idx()] = Some(*value);
    }

    // All parser-level checks passed; structural validation below can only
    // fail on conditions already excluded, so surface any residue verbatim.
    let quotas: Vec<u32> = hospitals.iter().map(|h| h.quota).collect();
    let inst = Instance::new(
        residents.into_iter().map(|r| r.name).collect(),
        hospitals.into_iter().map(|h| h.name).collect(),
        quotas,
        resident_prefs,
        hospital_prefs,
    )
    .map_err(|e| syntax(0, 0, e.to_string()))?;
    let inst = match inst.with_forced(forced) {
        Ok(inst) => inst,
        Err(e) => {
            // A forced pair referencing a non-edge: attribute to its line.
            let msg = e.to_string();
            let line = forced_raw.first().map(|(l, _, _)| *l).unwrap_or(0);
            return Err(syntax(line, 1, msg));
        }
    };
    inst.with_costs(costs).map_err(|e| syntax(0, 0, e.to_string()))
}

/// Serialises an instance to canonical `HRHT v1` text.
///
/// Residents then hospitals in declared order, single spaces, ties
/// parenthesized; `parse_instance` of the output reproduces the instance
/// field-for-field.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_HEADER}");
    for r in inst.residents() {
        let _ = write!(out, "resident {}:", inst.resident_name(r));
        for &h in inst.resident_pref(r) {
            let _ = write!(out, " {}", inst.hospital_name(h));
        }
        out.push('\n');
    }
    for h in inst.hospitals() {
        let _ = write!(out, "hospital {} [{}]:", inst.hospital_name(h), inst.quota(h));
        for group in inst.hospital_groups(h) {
            match group.as_slice() {
                [r] => {
                    let _ = write!(out, " {}", inst.resident_name(*r));
                }
                rs => {
                    let names: Vec<&str> =
                        rs.iter().map(|&r| inst.resident_name(r)).collect();
                    let _ = write!(out, " ({})", names.join(" "));
                }
            }
        }
        out.push('\n');
    }
    for &(r, h) in inst.forced_pairs() {
        let _ = writeln!(
            out,
            "forced: {} {}",
            inst.resident_name(r),
            inst.hospital_name(h)
        );
    }
    for h in inst.hospitals() {
        if let Some(c) = inst.cost(h) {
            let _ = writeln!(out, "cost {}: {}", inst.hospital_name(h), c);
        }
    }
    out
}

/// Violations rejected by [`parse_matching`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchingParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown id `{id}`")]
    UnknownId { line: usize, id: String },
    #[error("line {line}: repeated line for `{id}`")]
    Repeated { line: usize, id: String },
    #[error("line {line}: pair ({resident}, {hospital}) is not an edge")]
    NotAnEdge { line: usize, resident: String, hospital: String },
    #[error("missing quota line for `{0}`")]
    MissingQuota(String),
    #[error("missing match/unmatched line for `{0}`")]
    MissingResident(String),
}

/// Serialises a matching with its quota vector.
///
/// `quota` lines for every hospital in declared order, then one `match` or
/// `unmatched` line per resident in declared order.
pub fn serialize_matching(inst: &Instance, quotas: &QuotaVector, m: &Matching) -> String {
    let mut out = String::new();
    for h in inst.hospitals() {
        let _ = writeln!(out, "quota {} {}", inst.hospital_name(h), quotas[h]);
    }
    for r in inst.residents() {
        match m.assignment(r) {
            Some(h) => {
                let _ = writeln!(
                    out,
                    "match {} {}",
                    inst.resident_name(r),
                    inst.hospital_name(h)
                );
            }
            None => {
                let _ = writeln!(out, "unmatched {}", inst.resident_name(r));
            }
        }
    }
    out
}

/// Parses matching text against `inst`.
///
/// Every hospital needs exactly one `quota` line and every resident exactly
/// one `match` or `unmatched` line; `match` pairs must be instance edges.
pub fn parse_matching(
    inst: &Instance,
    text: &str,
) -> Result<(QuotaVector, Matching), MatchingParseError> {
    let mut quotas: Vec<Option<u32>> = vec![None; inst.num_hospitals()];
    let mut assign: Vec<Option<Option<HId>>> = vec![None; inst.num_residents()];
    let r_index: HashMap<&str, RId> = inst
        .resident_names()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), RId(i as u32)))
        .collect();
    let h_index: HashMap<&str, HId> = inst
        .hospital_names()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), HId(i as u32)))
        .collect();

    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let unknown = |id: &str| MatchingParseError::UnknownId {
            line: line_no,
            id: id.to_owned(),
        };
        match tokens.as_slice() {
            ["quota", h_name, q_text] => {
                let &h = h_index.get(h_name).ok_or_else(|| unknown(h_name))?;
                let q: u32 = q_text.parse().map_err(|_| MatchingParseError::Syntax {
                    line: line_no,
                    msg: "quota is not a nonnegative integer".into(),
                })?;
                if quotas[h.idx()].is_some() {
                    return Err(MatchingParseError::Repeated {
                        line: line_no,
                        id: (*h_name).to_owned(),
                    });
                }
                quotas[h.idx()] = Some(q);
            }
            ["match", r_name, h_name] => {
                let &r = r_index.get(r_name).ok_or_else(|| unknown(r_name))?;
                let &h = h_index.get(h_name).ok_or_else(|| unknown(h_name))?;
                if !inst.is_edge(r, h) {
                    return Err(MatchingParseError::NotAnEdge {
                        line: line_no,
                        resident: (*r_name).to_owned(),
                        hospital: (*h_name).to_owned(),
                    });
                }
                if assign[r.idx()].is_some() {
                    return Err(MatchingParseError::Repeated {
                        line: line_no,
                        id: (*r_name).to_owned(),
                    });
                }
                assign[r.idx()] = Some(Some(h));
            }
            ["unmatched", r_name] => {
                let &r = r_index.get(r_name).ok_or_else(|| unknown(r_name))?;
                if assign[r.idx()].is_some() {
                    return Err(MatchingParseError::Repeated {
                        line: line_no,
                        id: (*r_name).to_owned(),
                    });
                }
                assign[r.idx()] = Some(None);
            }
            _ => {
                return Err(MatchingParseError::Syntax {
                    line: line_no,
                    msg: "expected `quota <hid> <q>`, `match <rid> <hid>`, \
                          or `unmatched <rid>`"
                        .into(),
                });
            }
        }
    }

    let mut q = Vec::with_capacity(inst.num_hospitals());
    for h in inst.hospitals() {
        match quotas[h.idx()] {
            Some(v) => q.push(v),
            None => {
                return Err(MatchingParseError::MissingQuota(
                    inst.hospital_name(h).to_owned(),
                ))
            }
        }
    }
    let mut a = Vec::with_capacity(inst.num_residents());
    for r in inst.residents() {
        match assign[r.idx()] {
            Some(v) => a.push(v),
            None => {
                return Err(MatchingParseError::MissingResident(
                    inst.resident_name(r).to_owned(),
                ))
            }
        }
    }
    Ok((QuotaVector(q), Matching { assign: a }))
}
