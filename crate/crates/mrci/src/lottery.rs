//! Finite-support lotteries, act tables, first-order stochastic dominance,
//! and the contrast function.
//!
//! A [`Lottery`] is kept canonical at all times: strictly increasing distinct
//! prizes, strictly positive probabilities summing to one. Dominance
//! comparisons work on right-tail cumulative sums over the ordered union of
//! the two supports.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Absolute tolerance for probability sums and FSD tail comparisons.
pub const PROB_TOL: f64 = 1e-12;
/// Looser tolerance accepted on raw input probabilities before canonicalization.
pub const INPUT_PROB_TOL: f64 = 1e-9;

/// Round a payoff to the canonical 1e-9 grid so that merging can use exact equality.
fn canon_payoff(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// A finite-support lottery over monetary prizes, in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lottery {
    prizes: Vec<f64>,
    probs: Vec<f64>,
}

impl Lottery {
    /// Canonicalize `(prizes, probs)` into a lottery: duplicate prizes merged,
    /// zero-probability outcomes dropped, prizes sorted ascending.
    pub fn new(prizes: &[f64], probs: &[f64]) -> Result<Self> {
        if prizes.len() != probs.len() {
            return Err(Error::LengthMismatch(format!(
                "{} prizes vs {} probabilities",
                prizes.len(),
                probs.len()
            )));
        }
        if prizes.is_empty() {
            return Err(Error::EmptySupport);
        }
        for &p in probs {
            if p < -INPUT_PROB_TOL {
                return Err(Error::NegativeProb(p));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > INPUT_PROB_TOL {
            return Err(Error::ProbSum { sum, tol: INPUT_PROB_TOL });
        }
        let mut pairs: Vec<(f64, f64)> = prizes
            .iter()
            .zip(probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&z, &p)| (canon_payoff(z), p))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (z, p) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == z => last.1 += p,
                _ => merged.push((z, p)),
            }
        }
        if merged.is_empty() {
            return Err(Error::EmptySupport);
        }
        Ok(Lottery {
            prizes: merged.iter().map(|&(z, _)| z).collect(),
            probs: merged.iter().map(|&(_, p)| p).collect(),
        })
    }

    /// The degenerate lottery paying `amount` with probability one.
    pub fn sure(amount: f64) -> Self {
        Lottery { prizes: vec![canon_payoff(amount)], probs: vec![1.0] }
    }

    pub fn prizes(&self) -> &[f64] {
        &self.prizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support_size(&self) -> usize {
        self.prizes.len()
    }

    pub fn min_prize(&self) -> f64 {
        self.prizes[0]
    }

    pub fn max_prize(&self) -> f64 {
        *self.prizes.last().unwrap()
    }

    /// Canonical equality up to `PROB_TOL` on probabilities.
    pub fn approx_eq(&self, other: &Lottery) -> bool {
        self.prizes == other.prizes
            && self
                .probs
                .iter()
                .zip(&other.probs)
                .all(|(a, b)| (a - b).abs() <= PROB_TOL)
    }
}

/// Weak first-order stochastic dominance: `l1` weakly dominates `l2` iff every
/// right-tail cumulative sum of `l1` is at least that of `l2` over the ordered
/// union of supports.
pub fn fsd_weak(l1: &Lottery, l2: &Lottery) -> bool {
    // Walk both supports from the top; tail sums accumulate as the threshold drops.
    let (mut i, mut j) = (l1.prizes.len(), l2.prizes.len());
    let (mut t1, mut t2) = (0.0_f64, 0.0_f64);
    while i > 0 || j > 0 {
        let z1 = if i > 0 { l1.prizes[i - 1] } else { f64::NEG_INFINITY };
        let z2 = if j > 0 { l2.prizes[j - 1] } else { f64::NEG_INFINITY };
        let z = z1.max(z2);
        if z1 == z {
            t1 += l1.probs[i - 1];
            i -= 1;
        }
        if z2 == z {
            t2 += l2.probs[j - 1];
            j -= 1;
        }
        if t1 < t2 - PROB_TOL {
            return false;
        }
    }
    true
}

/// Strict first-order stochastic dominance (the strict part of [`fsd_weak`]).
pub fn fsd_strict(l1: &Lottery, l2: &Lottery) -> bool {
    fsd_weak(l1, l2) && !fsd_weak(l2, l1)
}

/// Contrast between two payoffs: `|x - y| / (|x| + |y| + 1)`, in `[0, 1)`.
/// Increasing in the gap, with diminishing sensitivity in the magnitudes.
pub fn contrast(x: f64, y: f64) -> f64 {
    (x - y).abs() / (x.abs() + y.abs() + 1.0)
}

/// A common finite state space carrying both alternatives of a menu as acts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActTable {
    state_probs: Vec<f64>,
    payoffs_a: Vec<f64>,
    payoffs_b: Vec<f64>,
}

impl ActTable {
    pub fn new(state_probs: &[f64], payoffs_a: &[f64], payoffs_b: &[f64]) -> Result<Self> {
        let n = state_probs.len();
        if n == 0 || payoffs_a.len() != n || payoffs_b.len() != n {
            return Err(Error::LengthMismatch(format!(
                "{} states, {} payoffs for alternative 1, {} for alternative 2",
                n,
                payoffs_a.len(),
                payoffs_b.len()
            )));
        }
        for &p in state_probs {
            if p < 0.0 {
                return Err(Error::NegativeProb(p));
            }
        }
        let sum: f64 = state_probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::ProbSum { sum, tol: PROB_TOL });
        }
        Ok(ActTable {
            state_probs: state_probs.to_vec(),
            payoffs_a: payoffs_a.to_vec(),
            payoffs_b: payoffs_b.to_vec(),
        })
    }

    pub fn n_states(&self) -> usize {
        self.state_probs.len()
    }

    pub fn state_probs(&self) -> &[f64] {
        &self.state_probs
    }

    pub fn payoffs_a(&self) -> &[f64] {
        &self.payoffs_a
    }

    pub fn payoffs_b(&self) -> &[f64] {
        &self.payoffs_b
    }

    /// Swap the two alternatives.
    pub fn swapped(&self) -> ActTable {
        ActTable {
            state_probs: self.state_probs.clone(),
            payoffs_a: self.payoffs_b.clone(),
            payoffs_b: self.payoffs_a.clone(),
        }
    }
}

/// Independent product coupling of two marginal lotteries: states are ordered
/// lexicographically over `support(l1) x support(l2)`.
pub fn product_coupling(l1: &Lottery, l2: &Lottery) -> ActTable {
    let n = l1.support_size() * l2.support_size();
    let mut state_probs = Vec::with_capacity(n);
    let mut payoffs_a = Vec::with_capacity(n);
    let mut payoffs_b = Vec::with_capacity(n);
    for (i, &z1) in l1.prizes.iter().enumerate() {
        for (j, &z2) in l2.prizes.iter().enumerate() {
            state_probs.push(l1.probs[i] * l2.probs[j]);
            payoffs_a.push(z1);
            payoffs_b.push(z2);
        }
    }
    ActTable { state_probs, payoffs_a, payoffs_b }
}

/// Recover the marginal lotteries of an act table by grouping equal payoffs.
pub fn acts_to_lotteries(t: &ActTable) -> (Lottery, Lottery) {
    let a = Lottery::new(&t.payoffs_a, &t.state_probs).expect("valid act table");
    let b = Lottery::new(&t.payoffs_b, &t.state_probs).expect("valid act table");
    (a, b)
}

/// A binary menu, either as two marginal lotteries or as a joint act table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MenuForm {
    Marginal { a: Lottery, b: Lottery },
    Joint(ActTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Menu {
    pub form: MenuForm,
    pub label_a: String,
    pub label_b: String,
}

impl Menu {
    pub fn marginal(a: Lottery, b: Lottery) -> Self {
        Menu { form: MenuForm::Marginal { a, b }, label_a: "A".into(), label_b: "B".into() }
    }

    pub fn joint(t: ActTable) -> Self {
        Menu { form: MenuForm::Joint(t), label_a: "A".into(), label_b: "B".into() }
    }

    /// The two marginal lotteries (first-listed, second-listed).
    pub fn lotteries(&self) -> (Lottery, Lottery) {
        match &self.form {
            MenuForm::Marginal { a, b } => (a.clone(), b.clone()),
            MenuForm::Joint(t) => acts_to_lotteries(t),
        }
    }

    /// The act-table view used by context-dependent rules: the joint form if
    /// given, otherwise the independent product coupling of the marginals.
    pub fn act_table(&self) -> ActTable {
        match &self.form {
            MenuForm::Marginal { a, b } => product_coupling(a, b),
            MenuForm::Joint(t) => t.clone(),
        }
    }

    pub fn is_joint(&self) -> bool {
        matches!(self.form, MenuForm::Joint(_))
    }

    /// Maximum absolute payoff appearing in the menu.
    pub fn max_abs_payoff(&self) -> f64 {
        let (a, b) = self.lotteries();
        a.prizes
            .iter()
            .chain(b.prizes.iter())
            .fold(0.0_f64, |m, &z| m.max(z.abs()))
    }

    /// The same menu with the two alternatives swapped.
    pub fn swapped(&self) -> Menu {
        let form = match &self.form {
            MenuForm::Marginal { a, b } => MenuForm::Marginal { a: b.clone(), b: a.clone() },
            MenuForm::Joint(t) => MenuForm::Joint(t.swapped()),
        };
        Menu { form, label_a: self.label_b.clone(), label_b: self.label_a.clone() }
    }
}
