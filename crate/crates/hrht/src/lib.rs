//! Capacity augmentation for strongly stable many-to-one matching with
//! hospital-side ties.
//!
//! The model: residents rank hospitals strictly, hospitals rank residents
//! with ties (rank groups) and carry quotas. A matching is strongly stable
//! when no unmatched acceptable pair blocks it in the strong sense of
//! [`stability::BlockingNotion::Strong`]. Strongly stable matchings need not
//! exist; every solver here answers the follow-up question: how little do
//! quotas have to grow before one does?
//!
//! The crate provides:
//! - [`instance`]: the data model and the `HRHT v1` text format;
//! - [`stability`]: blocking-pair reports and a polynomial-time solver that
//!   finds a resident-optimal strongly stable matching or proves none exists;
//! - [`minsum`]: minimises the total quota increase;
//! - [`minmax`]: bounds the per-hospital increase by a budget, for instances
//!   with tie length at most budget + 1;
//! - [`forced_edges`]: minimum total increase subject to a forced set of
//!   pairs that must be matched;
//! - [`oracle`]: brute-force baselines that confirm the fast algorithms on
//!   small instances, plus exhaustive enumeration of stable matchings;
//! - [`reductions`]: hardness gadgets translating monotone 3-SAT formulas
//!   into instances, with structure certificates and random generators.

pub mod forced_edges;
pub mod instance;
pub mod minmax;
pub mod minsum;
pub mod oracle;
pub mod reductions;
pub mod stability;

pub use instance::{
    parse_instance, parse_matching, serialize_instance, serialize_matching, HId, Instance,
    Matching, MatchingError, MatchingParseError, ParseError, QuotaVector, RId, ValidationError,
};
pub use stability::{solve_strong, BlockingNotion, BlockingPair, StabilityReport, Witness};

pub use forced_edges::{minsum_fe, FeError, FeOutcome, FeSolution, ForcedEdges, InfeasibleReason};
pub use minmax::{minmax_bt, MinMaxError, MinMaxSolution};
pub use minsum::{minsum_augment, MinSumSolution};
pub use oracle::{
    brute_min_cost, brute_min_ell, brute_minsum, brute_minsum_fe, brute_ssm_all, FeasibilityMode,
    OracleConfig, OracleError, OracleQuery, OracleVerdict, QuotaWitness, SearchBox,
};
pub use reductions::{
    decode_cap12_assignment, decode_mincost_assignment, gen_cap12_instance, gen_mincost_instance,
    gen_random_instance, mutate_certificates, parse_sat, sat_solutions, verify_certificates,
    CertificateMutation, CertificateReport, GadgetError, GadgetOutput, Mono3SatFormula,
    RandomParams, SatMode, VertexOrigin,
};
