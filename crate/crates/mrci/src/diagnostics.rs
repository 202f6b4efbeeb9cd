//! Rule-importance diagnostics: concentration gain, deletion-stability
//! scores, the effective number of rules, and a cyclical-consistency check of
//! perceived choice data.

use crate::admissibility::{AdmissibilityMatrix, Dataset};
use crate::error::{Error, Result};
use crate::lottery::{fsd_weak, Lottery};
use crate::rules::{perceive, RuleId};
use crate::solver::{solve, Assignment, SolverSettings};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Effective number of rules implied by a concentration value: `1 / mrci`.
pub fn effective_rules(mrci: f64) -> Result<f64> {
    if !(mrci > 0.0 && mrci <= 1.0) {
        return Err(Error::OutOfUnitInterval(mrci));
    }
    Ok(1.0 / mrci)
}

fn non_attention(mat: &AdmissibilityMatrix) -> Vec<RuleId> {
    mat.rules.iter().copied().filter(|r| !r.is_attention()).collect()
}

fn library_without(mat: &AdmissibilityMatrix, drop: &[RuleId]) -> Vec<RuleId> {
    mat.rules.iter().copied().filter(|r| !drop.contains(r)).collect()
}

/// Concentration gain of one non-attention rule: the relative drop in maximal
/// concentration when the rule is removed from the library,
/// `(H* - H*_without_f) / H*`. Both solves use the same settings.
pub fn concentration_gain(
    mat: &AdmissibilityMatrix,
    f: RuleId,
    settings: &SolverSettings,
) -> Result<f64> {
    if f.is_attention() {
        return Err(Error::AttentionRule(f.to_string()));
    }
    let full = solve(mat, settings);
    let reduced = solve(&mat.restrict(&library_without(mat, &[f])), settings);
    // Same T on both sides, so the numerators compare directly.
    Ok((full.numerator - reduced.numerator.min(full.numerator)) as f64 / full.numerator as f64)
}

/// Deletion-stability scores. For each of `num_orders` seeded random
/// permutations of the non-attention rules, walk the order and delete a rule
/// whenever the reduced library still attains the full-library numerator
/// exactly. A rule's score is the fraction of orders in which it survives.
pub fn stability_scores(
    mat: &AdmissibilityMatrix,
    num_orders: usize,
    seed: u64,
    settings: &SolverSettings,
) -> Vec<(RuleId, f64)> {
    assert!(num_orders >= 1, "at least one deletion order");
    let candidates = non_attention(mat);
    let target = solve(mat, settings).numerator;
    let survive_counts: Vec<usize> = (0..num_orders)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut order = candidates.clone();
            order.shuffle(&mut rng);
            let mut deleted: Vec<RuleId> = Vec::new();
            for &f in &order {
                deleted.push(f);
                let reduced = solve(&mat.restrict(&library_without(mat, &deleted)), settings);
                if reduced.numerator != target {
                    deleted.pop();
                }
            }
            candidates
                .iter()
                .map(|f| usize::from(!deleted.contains(f)))
                .collect::<Vec<_>>()
        })
        .reduce(
            || vec![0usize; candidates.len()],
            |mut acc, row| {
                for (a, r) in acc.iter_mut().zip(row) {
                    *a += r;
                }
                acc
            },
        );
    candidates
        .into_iter()
        .zip(survive_counts)
        .map(|(f, c)| (f, c as f64 / num_orders as f64))
        .collect()
}

/// Outcome of the cyclical-consistency check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCheck {
    pub consistent: bool,
    /// Two distinct perceived chosen lotteries on a mutual revealed-preference
    /// cycle, if one exists.
    pub witness: Option<(Lottery, Lottery)>,
}

/// Check a perceived dataset, given as (perceived chosen, perceived unchosen)
/// pairs, for revealed-preference cycles. The revealed relation: `x` is
/// revealed over `y` when `x` is the chosen lottery of some perceived menu
/// containing an element that weakly dominates `y`. A cycle is a pair of
/// distinct lotteries each transitively revealed over the other. Only chosen
/// lotteries can lie on a cycle, so they are the only nodes considered.
pub fn check_perceived(perceived: &[(Lottery, Lottery)]) -> ConsistencyCheck {
    let mut nodes: Vec<Lottery> = Vec::new();
    for (chosen, _) in perceived {
        if !nodes.iter().any(|n| n.approx_eq(chosen)) {
            nodes.push(chosen.clone());
        }
    }
    let n = nodes.len();
    let mut reach = vec![vec![false; n]; n];
    for (chosen, unchosen) in perceived {
        let i = nodes.iter().position(|x| x.approx_eq(chosen)).unwrap();
        for (j, y) in nodes.iter().enumerate() {
            if fsd_weak(chosen, y) || fsd_weak(unchosen, y) {
                reach[i][j] = true;
            }
        }
    }
    // Transitive closure (Floyd-Warshall).
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if reach[i][j] && reach[j][i] {
                return ConsistencyCheck {
                    consistent: false,
                    witness: Some((nodes[i].clone(), nodes[j].clone())),
                };
            }
        }
    }
    ConsistencyCheck { consistent: true, witness: None }
}

/// Verify that the perceived dataset induced by an admissible assignment has
/// no revealed-preference cycle. Errors if the assignment does not pick an
/// admissible rule at every observation of the dataset.
pub fn verify_cyclical_consistency(
    d: &Dataset,
    mat: &AdmissibilityMatrix,
    assignment: &Assignment,
) -> Result<ConsistencyCheck> {
    // Revalidate against the matrix; rejects tampered assignments.
    Assignment::from_rule_of(mat, assignment.rule_of.clone())?;
    let perceived: Vec<(Lottery, Lottery)> = d
        .observations
        .iter()
        .zip(&assignment.rule_of)
        .map(|(obs, &rule)| {
            let p = perceive(rule, &obs.menu, d.attention);
            if obs.choice == 1 {
                (p.perceived_a, p.perceived_b)
            } else {
                (p.perceived_b, p.perceived_a)
            }
        })
        .collect();
    Ok(check_perceived(&perceived))
}

/// Bundled per-subject diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub mrci: f64,
    pub numerator: u64,
    pub n_eff: f64,
    pub gains: Vec<(RuleId, f64)>,
    pub stability: Vec<(RuleId, f64)>,
    pub num_orders: usize,
    pub seed: u64,
    pub certified: bool,
}

/// Compute all diagnostics for one admissibility matrix.
pub fn diagnostics(
    mat: &AdmissibilityMatrix,
    num_orders: usize,
    seed: u64,
    settings: &SolverSettings,
) -> DiagnosticsReport {
    let full = solve(mat, settings);
    let gains: Vec<(RuleId, f64)> = non_attention(mat)
        .into_par_iter()
        .map(|f| {
            let g = concentration_gain(mat, f, settings).expect("non-attention rule");
            (f, g)
        })
        .collect();
    let stability = stability_scores(mat, num_orders, seed, settings);
    DiagnosticsReport {
        mrci: full.value,
        numerator: full.numerator,
        n_eff: 1.0 / full.value,
        gains,
        stability,
        num_orders,
        seed,
        certified: full.certified,
    }
}
