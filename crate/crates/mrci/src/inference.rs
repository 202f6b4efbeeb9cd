//! Conditional permutation test of excess concentration and the random rule
//! model simulator used to validate its size and power.

use crate::admissibility::{Dataset, RecommendationTable};
use crate::error::{Error, Result};
use crate::lottery::{fsd_strict, Menu};
use crate::rules::{perceive, AttentionConstant, RuleId};
use crate::solver::mrci_heuristic;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Concentration of a purely mechanical split by listing side:
/// `alpha^2 + (1-alpha)^2`, the floor any dataset attains via the attention
/// rules alone.
pub fn attention_floor(alpha: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&alpha));
    alpha * alpha + (1.0 - alpha) * (1.0 - alpha)
}

/// Coincidence probability of a latent rule process with weights `w`:
/// `sum w_f^2`.
pub fn latent_concentration(w: &[f64]) -> f64 {
    w.iter().map(|&x| x * x).sum()
}

/// Replace the choice indicators by `d[sigma[t]]`, keeping menus fixed.
pub fn permute_choices(d: &Dataset, sigma: &[usize]) -> Result<Dataset> {
    if sigma.len() != d.len() {
        return Err(Error::LengthMismatch(format!(
            "permutation of length {} on {} observations",
            sigma.len(),
            d.len()
        )));
    }
    let mut out = d.clone();
    for (t, obs) in out.observations.iter_mut().enumerate() {
        obs.choice = d.observations[sigma[t]].choice;
    }
    Ok(out)
}

/// Outcome of the permutation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermTestResult {
    pub observed_mrci: f64,
    pub b: usize,
    pub null_samples: Vec<f64>,
    /// Finite-sample corrected p-value `(1 + count) / (1 + B)`.
    pub p_value: f64,
    /// Uncorrected fraction `count / B`.
    pub p_raw: f64,
    /// Number of first-listed choices, preserved by every permutation.
    pub z_count: usize,
    pub seed: u64,
}

/// Mix two seeds into an independent stream seed (splitmix64 finalizer).
fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Right-tail permutation test of the observed concentration against the
/// orbit of choice reshuffles with menus fixed. Rule recommendations do not
/// depend on choices, so they are evaluated once; each permutation only
/// re-derives the admissibility matrix and re-runs the heuristic with
/// `restarts` restarts.
pub fn permutation_test(
    d: &Dataset,
    library: &[RuleId],
    b: usize,
    restarts: usize,
    seed: u64,
) -> PermTestResult {
    assert!(b >= 1, "at least one permutation");
    let rt = RecommendationTable::build(d, library);
    let choices = d.choices();
    let observed = mrci_heuristic(&rt.admissibility(&choices), restarts, seed);

    let null_samples: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            let mut permuted = choices.clone();
            permuted.shuffle(&mut rng);
            let mat = rt.admissibility(&permuted);
            mrci_heuristic(&mat, restarts, derive_seed(seed, k as u64 + 1)).value
        })
        .collect();

    let count = null_samples.iter().filter(|&&v| v >= observed.value).count();
    PermTestResult {
        observed_mrci: observed.value,
        b,
        null_samples,
        p_value: (1 + count) as f64 / (1 + b) as f64,
        p_raw: count as f64 / b as f64,
        z_count: choices.iter().map(|&c| c as usize).sum(),
        seed,
    }
}

/// A random rule model: an i.i.d. latent rule draw per menu, with a fixed
/// attention fallback when the drawn rule does not discriminate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrmSpec {
    weights: Vec<(RuleId, f64)>,
    /// Probability the fallback attends to the first-listed alternative.
    fallback_first: f64,
    pub seed: u64,
}

impl RrmSpec {
    pub fn new(weights: Vec<(RuleId, f64)>, fallback_first: f64, seed: u64) -> Result<Self> {
        let sum: f64 = weights.iter().map(|&(_, w)| w).sum();
        if weights.iter().any(|&(_, w)| w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::ProbSum { sum, tol: 1e-9 });
        }
        if !(0.0..=1.0).contains(&fallback_first) {
            return Err(Error::OutOfUnitInterval(fallback_first));
        }
        Ok(RrmSpec { weights, fallback_first, seed })
    }

    pub fn weights(&self) -> &[(RuleId, f64)] {
        &self.weights
    }

    /// Coincidence probability of the latent weights.
    pub fn tau(&self) -> f64 {
        latent_concentration(&self.weights.iter().map(|&(_, w)| w).collect::<Vec<_>>())
    }

    fn draw_rule(&self, rng: &mut impl Rng) -> RuleId {
        let mut u: f64 = rng.gen();
        for &(rule, w) in &self.weights {
            if u < w {
                return rule;
            }
            u -= w;
        }
        self.weights.last().expect("nonempty weights").0
    }
}

/// Simulate one subject from a random rule model: per menu, draw a latent
/// rule; if its perceived menu has a strictly dominant side, choose that side,
/// otherwise fall back to a random attention draw.
pub fn simulate_rrm(menus: &[Menu], spec: &RrmSpec, subject_id: &str) -> Dataset {
    let m = AttentionConstant::from_menus(menus.iter());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let observations = menus
        .iter()
        .enumerate()
        .map(|(t, menu)| {
            let rule = spec.draw_rule(&mut rng);
            let p = perceive(rule, menu, m);
            let choice = if fsd_strict(&p.perceived_a, &p.perceived_b) {
                1
            } else if fsd_strict(&p.perceived_b, &p.perceived_a) {
                0
            } else {
                u8::from(rng.gen::<f64>() < spec.fallback_first)
            };
            crate::admissibility::Observation { trial: t + 1, menu: menu.clone(), choice }
        })
        .collect();
    Dataset::new(subject_id, observations)
}

/// Maximum feasible single-rule share for a fixed recommendation table and an
/// arbitrary choice vector: the best share of observations any one rule's
/// strict recommendations can match. Always at least `max(alpha, 1-alpha)`
/// thanks to the attention rules.
pub fn match_share(rt: &RecommendationTable, choices: &[u8]) -> f64 {
    assert_eq!(choices.len(), rt.n_obs(), "choice vector length");
    let t = rt.n_obs();
    let best = (0..rt.rules.len())
        .map(|f| {
            (0..t)
                .filter(|&i| {
                    if choices[i] == 1 {
                        rt.recommends_first(i, f)
                    } else {
                        rt.recommends_second(i, f)
                    }
                })
                .count()
        })
        .max()
        .unwrap_or(0);
    best as f64 / t as f64
}
