//! Strict discriminability sets, the per-dataset admissibility matrix, and
//! the per-rule coverage statistic.

use crate::lottery::{fsd_strict, Menu};
use crate::rules::{perceive, AttentionConstant, RuleId, ALL_RULES};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// One recorded choice: a binary menu and which alternative was picked
/// (1 = first-listed, 0 = second-listed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub trial: usize,
    pub menu: Menu,
    pub choice: u8,
}

/// All observations of one subject, with the attention constant derived from
/// the payoffs appearing anywhere in the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub subject_id: String,
    pub observations: Vec<Observation>,
    pub attention: AttentionConstant,
}

impl Dataset {
    pub fn new(subject_id: impl Into<String>, observations: Vec<Observation>) -> Self {
        let attention = AttentionConstant::from_menus(observations.iter().map(|o| &o.menu));
        Dataset { subject_id: subject_id.into(), observations, attention }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn choices(&self) -> Vec<u8> {
        self.observations.iter().map(|o| o.choice).collect()
    }

    /// Share of observations in which the first-listed alternative was chosen.
    pub fn alpha(&self) -> f64 {
        let z: usize = self.observations.iter().map(|o| o.choice as usize).sum();
        z as f64 / self.len() as f64
    }
}

/// Per-menu strict recommendation sides for every rule, independent of the
/// recorded choices. Row `t`, rule `f`: `rec_first` holds when the perceived
/// first alternative strictly dominates the perceived second, `rec_second`
/// the reverse. Both false means the rule does not discriminate at that menu.
#[derive(Debug, Clone)]
pub struct RecommendationTable {
    pub rules: Vec<RuleId>,
    rec_first: Vec<Vec<bool>>,
    rec_second: Vec<Vec<bool>>,
}

impl RecommendationTable {
    /// Evaluate every rule on every menu once. Parallel across observations.
    pub fn build(d: &Dataset, library: &[RuleId]) -> Self {
        let rules = library.to_vec();
        let rows: Vec<(Vec<bool>, Vec<bool>)> = d
            .observations
            .par_iter()
            .map(|obs| {
                let mut first = Vec::with_capacity(rules.len());
                let mut second = Vec::with_capacity(rules.len());
                for &rule in &rules {
                    let p = perceive(rule, &obs.menu, d.attention);
                    first.push(fsd_strict(&p.perceived_a, &p.perceived_b));
                    second.push(fsd_strict(&p.perceived_b, &p.perceived_a));
                }
                (first, second)
            })
            .collect();
        let (rec_first, rec_second) = rows.into_iter().unzip();
        RecommendationTable { rules, rec_first, rec_second }
    }

    pub fn n_obs(&self) -> usize {
        self.rec_first.len()
    }

    pub fn recommends_first(&self, t: usize, rule_idx: usize) -> bool {
        self.rec_first[t][rule_idx]
    }

    pub fn recommends_second(&self, t: usize, rule_idx: usize) -> bool {
        self.rec_second[t][rule_idx]
    }

    /// The admissibility matrix induced by a vector of choice indicators:
    /// rule `f` is admissible at `t` iff it strictly recommends the chosen side.
    pub fn admissibility(&self, choices: &[u8]) -> AdmissibilityMatrix {
        assert_eq!(choices.len(), self.n_obs(), "choice vector length");
        let rows: Vec<Vec<bool>> = choices
            .iter()
            .enumerate()
            .map(|(t, &d)| {
                if d == 1 {
                    self.rec_first[t].clone()
                } else {
                    self.rec_second[t].clone()
                }
            })
            .collect();
        AdmissibilityMatrix { rules: self.rules.clone(), rows, choices: choices.to_vec() }
    }
}

/// The T x |F| boolean matrix of strict local admissibility, together with the
/// choice indicators it was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityMatrix {
    pub rules: Vec<RuleId>,
    pub rows: Vec<Vec<bool>>,
    pub choices: Vec<u8>,
}

impl AdmissibilityMatrix {
    pub fn n_obs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn is_admissible(&self, t: usize, rule_idx: usize) -> bool {
        self.rows[t][rule_idx]
    }

    pub fn rule_index(&self, rule: RuleId) -> Option<usize> {
        self.rules.iter().position(|&r| r == rule)
    }

    /// Number of admissible menus per rule.
    pub fn coverage_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_rules()];
        for row in &self.rows {
            for (f, &a) in row.iter().enumerate() {
                if a {
                    counts[f] += 1;
                }
            }
        }
        counts
    }

    /// Per-rule coverage shares `Cov(f) = (1/T) sum_t a[t][f]`.
    pub fn coverage(&self) -> Vec<(RuleId, f64)> {
        let t = self.n_obs() as f64;
        self.rules
            .iter()
            .zip(self.coverage_counts())
            .map(|(&r, c)| (r, c as f64 / t))
            .collect()
    }

    /// Share of first-listed choices.
    pub fn alpha(&self) -> f64 {
        let z: usize = self.choices.iter().map(|&d| d as usize).sum();
        z as f64 / self.n_obs() as f64
    }

    /// Restrict the matrix to a sub-library (column deletion).
    pub fn restrict(&self, keep: &[RuleId]) -> AdmissibilityMatrix {
        let idx: Vec<usize> = keep
            .iter()
            .map(|&r| self.rule_index(r).expect("rule present in matrix"))
            .collect();
        AdmissibilityMatrix {
            rules: keep.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|row| idx.iter().map(|&i| row[i]).collect())
                .collect(),
            choices: self.choices.clone(),
        }
    }
}

/// The set of rules that strictly discriminate in favor of the recorded
/// choice at a single observation.
pub fn strict_set(
    obs: &Observation,
    library: &[RuleId],
    m: AttentionConstant,
) -> BTreeSet<RuleId> {
    library
        .iter()
        .copied()
        .filter(|&rule| {
            let p = perceive(rule, &obs.menu, m);
            let (chosen, other) = if obs.choice == 1 {
                (&p.perceived_a, &p.perceived_b)
            } else {
                (&p.perceived_b, &p.perceived_a)
            };
            fsd_strict(chosen, other)
        })
        .collect()
}

/// Build the full admissibility matrix for a dataset.
pub fn admissibility_matrix(d: &Dataset, library: &[RuleId]) -> AdmissibilityMatrix {
    RecommendationTable::build(d, library).admissibility(&d.choices())
}

/// The baseline library. A1 and A2 are always members, so every row of every
/// admissibility matrix is nonempty.
pub fn baseline_library() -> Vec<RuleId> {
    ALL_RULES.to_vec()
}

/// Force A1/A2 into a user-selected library subset, preserving declaration order.
pub fn with_attention_rules(subset: &[RuleId]) -> Vec<RuleId> {
    let mut set: BTreeSet<RuleId> = subset.iter().copied().collect();
    set.insert(RuleId::A1);
    set.insert(RuleId::A2);
    ALL_RULES.iter().copied().filter(|r| set.contains(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lottery::Lottery;

    fn lot(prizes: &[f64], probs: &[f64]) -> Lottery {
        Lottery::new(prizes, probs).unwrap()
    }

    fn obs(menu: Menu, choice: u8) -> Observation {
        Observation { trial: 0, menu, choice }
    }

    #[test]
    fn attention_parity() {
        let menu = Menu::marginal(lot(&[0.0, 10.0], &[0.5, 0.5]), Lottery::sure(3.0));
        let d = Dataset::new("s", vec![obs(menu.clone(), 1), obs(menu, 0)]);
        let mat = admissibility_matrix(&d, &baseline_library());
        let a1 = mat.rule_index(RuleId::A1).unwrap();
        let a2 = mat.rule_index(RuleId::A2).unwrap();
        assert!(mat.is_admissible(0, a1) && !mat.is_admissible(0, a2));
        assert!(!mat.is_admissible(1, a1) && mat.is_admissible(1, a2));
    }

    #[test]
    fn rows_never_empty() {
        let menu = Menu::marginal(Lottery::sure(1.0), Lottery::sure(1.0));
        let d = Dataset::new("s", vec![obs(menu, 0)]);
        let mat = admissibility_matrix(&d, &baseline_library());
        assert!(mat.rows[0].iter().any(|&a| a));
    }

    #[test]
    fn duplicated_dataset_repeats_rows() {
        let menu = Menu::marginal(lot(&[3000.0, 0.0], &[0.9, 0.1]), lot(&[6000.0, 0.0], &[0.45, 0.55]));
        let base = vec![obs(menu.clone(), 1), obs(menu, 0)];
        let mut tripled = Vec::new();
        for _ in 0..3 {
            tripled.extend(base.clone());
        }
        let d1 = Dataset::new("s", base);
        let d3 = Dataset::new("s", tripled);
        let m1 = admissibility_matrix(&d1, &baseline_library());
        let m3 = admissibility_matrix(&d3, &baseline_library());
        for b in 0..3 {
            for t in 0..2 {
                assert_eq!(m3.rows[2 * b + t], m1.rows[t]);
            }
        }
    }

    #[test]
    fn strict_set_matches_matrix_row() {
        let menu = Menu::marginal(lot(&[3000.0, 0.0], &[0.9, 0.1]), lot(&[6000.0, 0.0], &[0.45, 0.55]));
        let d = Dataset::new("s", vec![obs(menu, 1)]);
        let lib = baseline_library();
        let set = strict_set(&d.observations[0], &lib, d.attention);
        let mat = admissibility_matrix(&d, &lib);
        for (i, &r) in lib.iter().enumerate() {
            assert_eq!(set.contains(&r), mat.is_admissible(0, i));
        }
        // The common-ratio menu is rationalized by MAP (and the matching attention rule).
        let non_attention: BTreeSet<_> = set.iter().filter(|r| !r.is_attention()).collect();
        assert_eq!(non_attention.len(), 1);
        assert!(set.contains(&RuleId::Map));
        assert!(set.contains(&RuleId::A1));
    }

    #[test]
    fn flipped_choice_mirrors_menu() {
        let menu = Menu::marginal(lot(&[200.0, 0.0], &[0.6, 0.4]), lot(&[300.0, 0.0], &[0.48, 0.52]));
        let lib = baseline_library();
        let m = AttentionConstant::from_menus([&menu, &menu.swapped()]);
        let flipped = strict_set(&obs(menu.clone(), 0), &lib, m);
        let mirrored = strict_set(&obs(menu.swapped(), 1), &lib, m);
        let sym = |s: &BTreeSet<RuleId>| -> BTreeSet<RuleId> {
            s.iter().copied().filter(|r| !r.is_attention()).collect()
        };
        assert_eq!(sym(&flipped), sym(&mirrored));
        assert!(flipped.contains(&RuleId::A2));
        assert!(mirrored.contains(&RuleId::A1));
    }

    #[test]
    fn forced_library_keeps_attention() {
        let lib = with_attention_rules(&[RuleId::Map, RuleId::Sal]);
        assert_eq!(lib, vec![RuleId::Map, RuleId::Sal, RuleId::A1, RuleId::A2]);
    }
}
