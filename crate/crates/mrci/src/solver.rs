//! The concentration objective and its optimizers: a greedy random-restart
//! heuristic and an exact solver based on a subset dynamic program over
//! greedy rule orders.
//!
//! All value comparisons run on the exact integer numerator `sum_f n_f^2` at
//! fixed denominator `T^2`, so "equal concentration" never depends on a float
//! tolerance.

use crate::admissibility::AdmissibilityMatrix;
use crate::error::{Error, Result};
use crate::rules::RuleId;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Duration;

/// Herfindahl-Hirschman index of a count vector: `sum n_f^2 / T^2`.
pub fn hhi(counts: &[u64], t_total: u64) -> Result<f64> {
    let got: u64 = counts.iter().sum();
    if got != t_total || t_total == 0 {
        return Err(Error::CountSumMismatch { got, expected: t_total });
    }
    Ok(hhi_numerator(counts) as f64 / (t_total * t_total) as f64)
}

fn hhi_numerator(counts: &[u64]) -> u64 {
    counts.iter().map(|&n| n * n).sum()
}

/// Upper bound on the concentration achievable when the largest usage share
/// is capped at `m`: `m^2 + (1-m)^2`.
pub fn cap_bound(m: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&m) {
        return Err(Error::CapOutOfRange(m));
    }
    Ok(m * m + (1.0 - m) * (1.0 - m))
}

/// A complete menu-to-rule assignment: one admissible rule per observation,
/// plus the induced per-rule usage counts (aligned with `rules`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub rules: Vec<RuleId>,
    pub rule_of: Vec<RuleId>,
    pub counts: Vec<u64>,
}

impl Assignment {
    fn from_indices(mat: &AdmissibilityMatrix, idx_of: &[usize]) -> Self {
        let mut counts = vec![0u64; mat.n_rules()];
        let rule_of = idx_of
            .iter()
            .map(|&f| {
                counts[f] += 1;
                mat.rules[f]
            })
            .collect();
        Assignment { rules: mat.rules.clone(), rule_of, counts }
    }

    /// Validate an explicit rule-per-observation vector against the matrix.
    pub fn from_rule_of(mat: &AdmissibilityMatrix, rule_of: Vec<RuleId>) -> Result<Self> {
        if rule_of.len() != mat.n_obs() {
            return Err(Error::LengthMismatch(format!(
                "{} assignments vs {} observations",
                rule_of.len(),
                mat.n_obs()
            )));
        }
        let mut counts = vec![0u64; mat.n_rules()];
        for (t, &rule) in rule_of.iter().enumerate() {
            let f = mat
                .rule_index(rule)
                .ok_or_else(|| Error::InvalidRule(rule.to_string()))?;
            if !mat.is_admissible(t, f) {
                return Err(Error::InadmissibleAssignment(t));
            }
            counts[f] += 1;
        }
        Ok(Assignment { rules: mat.rules.clone(), rule_of, counts })
    }

    pub fn numerator(&self) -> u64 {
        hhi_numerator(&self.counts)
    }

    pub fn value(&self) -> f64 {
        let t = self.rule_of.len() as u64;
        self.numerator() as f64 / (t * t) as f64
    }

    /// Usage count of one rule, 0 if the rule is not in the library.
    pub fn count_of(&self, rule: RuleId) -> u64 {
        self.rules
            .iter()
            .position(|&r| r == rule)
            .map_or(0, |f| self.counts[f])
    }
}

/// Which optimizer produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Heuristic,
    Exact,
    /// Exact when the instance is small enough for the budget, else heuristic.
    Auto,
}

impl SolveMethod {
    pub fn name(self) -> &'static str {
        match self {
            SolveMethod::Heuristic => "heuristic",
            SolveMethod::Exact => "exact",
            SolveMethod::Auto => "auto",
        }
    }
}

/// Solver configuration shared by the CLI and the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub method: SolveMethod,
    pub restarts: usize,
    pub seed: u64,
    pub time_budget: Duration,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            method: SolveMethod::Auto,
            restarts: 100,
            seed: 0,
            time_budget: Duration::from_secs(10),
        }
    }
}

/// Outcome of one maximization: the optimal (or best-found) concentration and
/// the assignment attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrciResult {
    pub value: f64,
    pub numerator: u64,
    pub assignment: Assignment,
    pub method: SolveMethod,
    pub restarts_used: usize,
    pub seed: u64,
    /// True iff the value is a proven global maximum.
    pub certified: bool,
}

impl MrciResult {
    pub fn n_obs(&self) -> usize {
        self.assignment.rule_of.len()
    }
}

/// One greedy sweep: rules claim, in the given order, every still-unassigned
/// menu where they are admissible. Requires every row of the matrix to be
/// nonempty, which holds whenever both attention rules are in the library.
pub fn greedy_pass(mat: &AdmissibilityMatrix, order: &[RuleId]) -> Assignment {
    let t = mat.n_obs();
    let mut idx_of = vec![usize::MAX; t];
    let mut unassigned = t;
    for &rule in order {
        if unassigned == 0 {
            break;
        }
        let f = mat.rule_index(rule).expect("order must permute the matrix rules");
        for (t, slot) in idx_of.iter_mut().enumerate() {
            if *slot == usize::MAX && mat.is_admissible(t, f) {
                *slot = f;
                unassigned -= 1;
            }
        }
    }
    assert_eq!(unassigned, 0, "admissibility matrix has an empty row");
    Assignment::from_indices(mat, &idx_of)
}

/// Popularity-first order: descending coverage, ties broken by the fixed rule
/// declaration order (which the matrix's rule list preserves).
fn popularity_order(mat: &AdmissibilityMatrix) -> Vec<RuleId> {
    let counts = mat.coverage_counts();
    let mut order: Vec<usize> = (0..mat.n_rules()).collect();
    order.sort_by_key(|&f| std::cmp::Reverse(counts[f]));
    order.into_iter().map(|f| mat.rules[f]).collect()
}

/// Greedy random-restart maximization. Restart 0 uses the popularity-first
/// order; restarts 1..K use independent seeded uniform permutations. Restarts
/// run in parallel; ties in value resolve to the lowest restart index.
pub fn mrci_heuristic(mat: &AdmissibilityMatrix, restarts: usize, seed: u64) -> MrciResult {
    assert!(restarts >= 1, "at least one restart");
    let best = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let order = if k == 0 {
                popularity_order(mat)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                let mut order = mat.rules.clone();
                order.shuffle(&mut rng);
                order
            };
            let a = greedy_pass(mat, &order);
            (a.numerator(), k, a)
        })
        .min_by_key(|&(num, k, _)| (std::cmp::Reverse(num), k))
        .expect("restarts >= 1");
    let (numerator, _, assignment) = best;
    let t = mat.n_obs() as u64;
    MrciResult {
        value: numerator as f64 / (t * t) as f64,
        numerator,
        assignment,
        method: SolveMethod::Heuristic,
        restarts_used: restarts,
        seed,
        certified: false,
    }
}

/// Exact maximization. Always certified; the `time_budget` parameter is kept
/// for interface stability but the solve is effectively instant for any
/// library of at most 20 rules.
///
/// Correctness rests on an exchange argument: in an assignment of maximal
/// `sum n_f^2`, a row held by rule `j` can never be admissible under a rule
/// `i != j` with `n_i >= n_j`, because moving the row from `j` to `i` would
/// raise the numerator by `2(n_i - n_j) + 2 > 0`. Sorting the used rules by
/// descending count therefore turns every optimal assignment into a greedy
/// pass for that order: each rule takes all still-unassigned rows where it is
/// admissible. The optimum is thus a maximum over rule orders, and because a
/// greedy prefix's remaining rows depend only on the *set* of rules used so
/// far, it is found by dynamic programming over rule subsets.
pub fn mrci_exact(mat: &AdmissibilityMatrix, _time_budget: Duration) -> MrciResult {
    let nf = mat.n_rules();
    let t = mat.n_obs();
    assert!(t >= 1, "empty admissibility matrix");
    assert!(nf <= 20, "subset solver supports at most 20 rules");
    let full: u32 = (1u32 << nf) - 1;

    // covered[U] = number of rows whose admissible set is contained in U,
    // via a subset-sum transform over exact-mask counts. A greedy pass over
    // rule set S leaves unassigned exactly the rows not admissible under any
    // rule of S, i.e. those whose mask fits inside the complement of S.
    let mut covered = vec![0u64; 1 << nf];
    for r in 0..t {
        let mut mask: u32 = 0;
        for f in 0..nf {
            if mat.is_admissible(r, f) {
                mask |= 1 << f;
            }
        }
        assert!(mask != 0, "admissibility matrix has an empty row");
        covered[mask as usize] += 1;
    }
    for f in 0..nf {
        for u in 0..=(full as usize) {
            if u & (1 << f) != 0 {
                covered[u] += covered[u ^ (1 << f)];
            }
        }
    }
    // Rows left unassigned by a greedy pass over rule set S.
    let left = |s: u32| covered[(full ^ s) as usize];

    // best[S]: maximal numerator over greedy orders of the rule set S;
    // pick[S]: the rule applied last in an optimal order.
    let mut best = vec![0u64; 1 << nf];
    let mut pick = vec![usize::MAX; 1 << nf];
    for s in 1..=full {
        for f in 0..nf {
            if s & (1 << f) != 0 {
                let prev = s ^ (1 << f);
                let n = left(prev) - left(s);
                let cand = best[prev as usize] + n * n;
                if cand > best[s as usize] {
                    best[s as usize] = cand;
                    pick[s as usize] = f;
                }
            }
        }
    }

    let (mut best_num, mut best_set) = (0u64, full);
    for s in 0..=full {
        if left(s) == 0 && best[s as usize] > best_num {
            best_num = best[s as usize];
            best_set = s;
        }
    }

    // Rebuild one optimal order and materialize its greedy assignment.
    let mut order_idx = Vec::with_capacity(nf);
    let mut s = best_set;
    while s != 0 {
        let f = pick[s as usize];
        order_idx.push(f);
        s ^= 1 << f;
    }
    order_idx.reverse();
    for f in 0..nf {
        if !order_idx.contains(&f) {
            order_idx.push(f);
        }
    }
    let order: Vec<RuleId> = order_idx.into_iter().map(|f| mat.rules[f]).collect();
    let assignment = greedy_pass(mat, &order);
    assert_eq!(assignment.numerator(), best_num, "greedy reconstruction mismatch");

    MrciResult {
        value: best_num as f64 / (t as u64 * t as u64) as f64,
        numerator: best_num,
        assignment,
        method: SolveMethod::Exact,
        restarts_used: 0,
        seed: 0,
        certified: true,
    }
}

/// Solve with the configured method. `Auto` resolves to the exact solver,
/// which is certified and fast at any library size in use.
pub fn solve(mat: &AdmissibilityMatrix, settings: &SolverSettings) -> MrciResult {
    match settings.method {
        SolveMethod::Heuristic => mrci_heuristic(mat, settings.restarts, settings.seed),
        SolveMethod::Exact | SolveMethod::Auto => mrci_exact(mat, settings.time_budget),
    }
}
