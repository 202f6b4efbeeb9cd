//! Maximum rule concentration analysis for binary lottery choice data.
//!
//! The pipeline: parse a subject's binary menu choices, evaluate a fixed
//! library of parameter-free perception rules on each menu, keep the rules
//! that strictly rationalize the recorded choice (the admissibility matrix),
//! and find the menu-to-rule assignment whose rule-usage shares have maximal
//! Herfindahl-Hirschman concentration. On top of that sit per-rule importance
//! diagnostics and a conditional permutation test of excess concentration.

pub mod admissibility;
pub mod diagnostics;
pub mod error;
pub mod inference;
pub mod io;
pub mod lottery;
pub mod report;
pub mod rules;
pub mod solver;

pub use admissibility::{
    admissibility_matrix, baseline_library, strict_set, with_attention_rules,
    AdmissibilityMatrix, Dataset, Observation, RecommendationTable,
};
pub use diagnostics::{
    check_perceived, concentration_gain, diagnostics, effective_rules, stability_scores,
    verify_cyclical_consistency, ConsistencyCheck, DiagnosticsReport,
};
pub use error::{Error, Result};
pub use inference::{
    attention_floor, latent_concentration, match_share, permutation_test, permute_choices,
    simulate_rrm, PermTestResult, RrmSpec,
};
pub use io::{parse_cpc18, parse_generic_csv, write_generic_csv};
pub use lottery::{contrast, fsd_strict, fsd_weak, ActTable, Lottery, Menu, MenuForm};
pub use report::{analyze_subject, RunConfig, SubjectReport, FORMAT_VERSION};
pub use rules::{perceive, AttentionConstant, PerceivedMenu, RuleId, ALL_RULES};
pub use solver::{
    cap_bound, greedy_pass, hhi, mrci_exact, mrci_heuristic, solve, Assignment, MrciResult,
    SolveMethod, SolverSettings,
};
