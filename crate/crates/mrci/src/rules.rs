//! The ten parameter-free perception rules.
//!
//! Each rule maps an objective binary menu into a perceived pair of lotteries.
//! Context-dependent rules (SAL, REG) work on an act-table view of the menu:
//! the joint form when one is given, otherwise the independent product
//! coupling of the two marginals.

use crate::error::{Error, Result};
use crate::lottery::{contrast, ActTable, Lottery, Menu};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Rule identifiers, in the fixed declaration order used for tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    /// Identity: perceive each lottery as it is.
    Id,
    /// MaxMin: collapse each lottery to its sure minimum payoff.
    Mmn,
    /// MinMax: collapse each lottery to its sure maximum payoff.
    Mmx,
    /// Max at p: collapse each lottery to its sure modal payoff.
    Map,
    /// Probability weighting: clamp probabilities into [0.2, 0.8], renormalize.
    Pw,
    /// Salience: collapse both lotteries to their payoffs in the most contrasting state.
    Sal,
    /// Regret: collapse each lottery to minus its worst foregone payoff gap.
    Reg,
    /// Disappointment: collapse each lottery to minus its worst reference-loss contrast.
    Dis,
    /// Attention to the first alternative; the second becomes a dominated sure payoff.
    A1,
    /// Attention to the second alternative; the first becomes a dominated sure payoff.
    A2,
}

/// The baseline ten-rule library, in declaration order.
pub const ALL_RULES: [RuleId; 10] = [
    RuleId::Id,
    RuleId::Mmn,
    RuleId::Mmx,
    RuleId::Map,
    RuleId::Pw,
    RuleId::Sal,
    RuleId::Reg,
    RuleId::Dis,
    RuleId::A1,
    RuleId::A2,
];

impl RuleId {
    pub fn is_attention(self) -> bool {
        matches!(self, RuleId::A1 | RuleId::A2)
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Id => "ID",
            RuleId::Mmn => "MMN",
            RuleId::Mmx => "MMX",
            RuleId::Map => "MAP",
            RuleId::Pw => "PW",
            RuleId::Sal => "SAL",
            RuleId::Reg => "REG",
            RuleId::Dis => "DIS",
            RuleId::A1 => "A1",
            RuleId::A2 => "A2",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ID" => Ok(RuleId::Id),
            "MMN" => Ok(RuleId::Mmn),
            "MMX" => Ok(RuleId::Mmx),
            "MAP" => Ok(RuleId::Map),
            "PW" => Ok(RuleId::Pw),
            "SAL" => Ok(RuleId::Sal),
            "REG" => Ok(RuleId::Reg),
            "DIS" => Ok(RuleId::Dis),
            "A1" => Ok(RuleId::A1),
            "A2" => Ok(RuleId::A2),
            other => Err(Error::InvalidRule(other.to_string())),
        }
    }
}

/// The large constant `M` used by the attention rules: `-M` must lie strictly
/// below every payoff in the dataset, so `M` exceeds every absolute payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionConstant(f64);

impl AttentionConstant {
    /// Smallest clean choice: one more than the maximum absolute payoff.
    pub fn from_menus<'a, I: IntoIterator<Item = &'a Menu>>(menus: I) -> Self {
        let max_abs = menus
            .into_iter()
            .fold(0.0_f64, |m, menu| m.max(menu.max_abs_payoff()));
        AttentionConstant(max_abs + 1.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn dominated_sure(self) -> Lottery {
        Lottery::sure(-self.0)
    }
}

/// A menu after perception by one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceivedMenu {
    pub perceived_a: Lottery,
    pub perceived_b: Lottery,
    pub rule: RuleId,
}

/// The payoff with maximal probability; ties broken toward the highest payoff.
pub fn modal_payoff(l: &Lottery) -> f64 {
    let max_p = l.probs().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    l.prizes()
        .iter()
        .zip(l.probs())
        .filter(|(_, &p)| p >= max_p - crate::lottery::PROB_TOL)
        .map(|(&z, _)| z)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Coarse S-shaped probability distortion: clamp each probability into
/// [0.2, 0.8] and renormalize. Support is unchanged.
pub fn pw_distort(l: &Lottery) -> Lottery {
    let distorted: Vec<f64> = l.probs().iter().map(|&p| p.clamp(0.2, 0.8)).collect();
    let sum: f64 = distorted.iter().sum();
    let probs: Vec<f64> = distorted.iter().map(|&p| p / sum).collect();
    Lottery::new(l.prizes(), &probs).expect("renormalized probabilities are valid")
}

/// Index of the state with maximal payoff contrast; ties broken toward the
/// lowest state index. Zero-based.
pub fn salient_state(t: &ActTable) -> usize {
    let mut best = 0;
    let mut best_c = f64::NEG_INFINITY;
    for s in 0..t.n_states() {
        let c = contrast(t.payoffs_a()[s], t.payoffs_b()[s]);
        if c > best_c {
            best_c = c;
            best = s;
        }
    }
    best
}

/// Which alternative of an act table a rule evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    First,
    Second,
}

/// Worst foregone payoff gap of the given alternative: the maximum over states
/// of `max(other - own, 0)`.
pub fn regret_severity(t: &ActTable, which: Alternative) -> f64 {
    let (own, other) = match which {
        Alternative::First => (t.payoffs_a(), t.payoffs_b()),
        Alternative::Second => (t.payoffs_b(), t.payoffs_a()),
    };
    own.iter()
        .zip(other)
        .map(|(&u, &v)| (v - u).max(0.0))
        .fold(0.0, f64::max)
}

/// Worst reference-loss contrast of a lottery: the maximum contrast from the
/// modal payoff to any strictly lower payoff in the support; 0 if none.
pub fn disappointment_severity(l: &Lottery) -> f64 {
    let r = modal_payoff(l);
    l.prizes()
        .iter()
        .filter(|&&z| z < r)
        .map(|&z| contrast(r, z))
        .fold(0.0, f64::max)
}

/// Apply one rule to a menu, producing the perceived pair of lotteries.
pub fn perceive(rule: RuleId, menu: &Menu, m: AttentionConstant) -> PerceivedMenu {
    let (a, b) = menu.lotteries();
    let (perceived_a, perceived_b) = match rule {
        RuleId::Id => (a, b),
        RuleId::Mmn => (Lottery::sure(a.min_prize()), Lottery::sure(b.min_prize())),
        RuleId::Mmx => (Lottery::sure(a.max_prize()), Lottery::sure(b.max_prize())),
        RuleId::Map => (Lottery::sure(modal_payoff(&a)), Lottery::sure(modal_payoff(&b))),
        RuleId::Pw => (pw_distort(&a), pw_distort(&b)),
        RuleId::Sal => {
            let t = menu.act_table();
            let s = salient_state(&t);
            (Lottery::sure(t.payoffs_a()[s]), Lottery::sure(t.payoffs_b()[s]))
        }
        RuleId::Reg => {
            let t = menu.act_table();
            (
                Lottery::sure(-regret_severity(&t, Alternative::First)),
                Lottery::sure(-regret_severity(&t, Alternative::Second)),
            )
        }
        RuleId::Dis => (
            Lottery::sure(-disappointment_severity(&a)),
            Lottery::sure(-disappointment_severity(&b)),
        ),
        RuleId::A1 => (a, m.dominated_sure()),
        RuleId::A2 => (m.dominated_sure(), b),
    };
    PerceivedMenu { perceived_a, perceived_b, rule }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lottery::fsd_strict;

    fn lot(prizes: &[f64], probs: &[f64]) -> Lottery {
        Lottery::new(prizes, probs).unwrap()
    }

    fn example1_table() -> ActTable {
        let third = 1.0 / 3.0;
        ActTable::new(&[third, third, third], &[20.0, 0.0, 10.0], &[0.0, 11.0, 20.0]).unwrap()
    }

    #[test]
    fn modal_payoff_examples() {
        assert_eq!(modal_payoff(&lot(&[3000.0, 0.0], &[0.9, 0.1])), 3000.0);
        assert_eq!(modal_payoff(&lot(&[6000.0, 0.0], &[0.45, 0.55])), 0.0);
        assert_eq!(modal_payoff(&lot(&[0.0, 100.0], &[0.5, 0.5])), 100.0);
    }

    #[test]
    fn pw_distort_examples() {
        assert!(pw_distort(&Lottery::sure(5.0)).approx_eq(&Lottery::sure(5.0)));
        let l = lot(&[6000.0, 0.0], &[0.001, 0.999]);
        let d = pw_distort(&l);
        assert_eq!(d.prizes(), &[0.0, 6000.0]);
        assert!((d.probs()[0] - 0.8).abs() < 1e-12);
        assert!((d.probs()[1] - 0.2).abs() < 1e-12);
        let interior = lot(&[1.0, 2.0], &[0.5, 0.5]);
        assert!(pw_distort(&interior).approx_eq(&interior));
    }

    #[test]
    fn salient_state_examples() {
        // Example 1 with eps = 1: contrasts (20/21, 11/12, 10/31) -> state 0.
        assert_eq!(salient_state(&example1_table()), 0);
        let same = ActTable::new(&[0.5, 0.5], &[3.0, 3.0], &[3.0, 3.0]).unwrap();
        assert_eq!(salient_state(&same), 0);
        let t = ActTable::new(&[0.5, 0.5], &[0.0, 0.0], &[0.0, 100.0]).unwrap();
        assert_eq!(salient_state(&t), 1);
    }

    #[test]
    fn regret_severity_examples() {
        let t = example1_table();
        assert_eq!(regret_severity(&t, Alternative::First), 11.0);
        assert_eq!(regret_severity(&t, Alternative::Second), 20.0);

        let dominant = ActTable::new(&[0.5, 0.5], &[5.0, 5.0], &[4.0, 5.0]).unwrap();
        assert_eq!(regret_severity(&dominant, Alternative::First), 0.0);

        // Symmetric 50-50 menu: 100 sure vs (200 w.p. 0.5, 0 w.p. 0.5).
        let t = crate::lottery::product_coupling(
            &Lottery::sure(100.0),
            &lot(&[200.0, 0.0], &[0.5, 0.5]),
        );
        assert_eq!(regret_severity(&t, Alternative::First), 100.0);
        assert_eq!(regret_severity(&t, Alternative::Second), 100.0);
    }

    #[test]
    fn disappointment_severity_examples() {
        assert_eq!(disappointment_severity(&Lottery::sure(200.0)), 0.0);
        let l8 = lot(&[300.0, 0.0], &[0.8, 0.2]);
        assert!((disappointment_severity(&l8) - 300.0 / 301.0).abs() < 1e-12);
        let l10 = lot(&[300.0, 0.0], &[0.48, 0.52]);
        assert_eq!(disappointment_severity(&l10), 0.0);
    }

    #[test]
    fn perceive_map_common_ratio() {
        let menu = Menu::marginal(lot(&[3000.0, 0.0], &[0.9, 0.1]), lot(&[6000.0, 0.0], &[0.45, 0.55]));
        let m = AttentionConstant::from_menus([&menu]);
        let p = perceive(RuleId::Map, &menu, m);
        assert!(p.perceived_a.approx_eq(&Lottery::sure(3000.0)));
        assert!(p.perceived_b.approx_eq(&Lottery::sure(0.0)));
    }

    #[test]
    fn perceive_identity_is_identity() {
        let menu = Menu::marginal(lot(&[0.0, 10.0], &[0.5, 0.5]), Lottery::sure(3.0));
        let m = AttentionConstant::from_menus([&menu]);
        let p = perceive(RuleId::Id, &menu, m);
        let (a, b) = menu.lotteries();
        assert_eq!(p.perceived_a, a);
        assert_eq!(p.perceived_b, b);
    }

    #[test]
    fn perceive_attention_dominates() {
        let menu = Menu::marginal(lot(&[0.0, 10.0], &[0.5, 0.5]), Lottery::sure(3.0));
        let m = AttentionConstant::from_menus([&menu]);
        let p1 = perceive(RuleId::A1, &menu, m);
        assert!(p1.perceived_b.approx_eq(&Lottery::sure(-11.0)));
        assert!(fsd_strict(&p1.perceived_a, &p1.perceived_b));
        let p2 = perceive(RuleId::A2, &menu, m);
        assert!(fsd_strict(&p2.perceived_b, &p2.perceived_a));
    }

    #[test]
    fn perceive_regret_example1() {
        let menu = Menu::joint(example1_table());
        let m = AttentionConstant::from_menus([&menu]);
        let p = perceive(RuleId::Reg, &menu, m);
        assert!(p.perceived_a.approx_eq(&Lottery::sure(-11.0)));
        assert!(p.perceived_b.approx_eq(&Lottery::sure(-20.0)));
    }

    #[test]
    fn swap_symmetry() {
        let menu = Menu::marginal(lot(&[3000.0, 0.0], &[0.9, 0.1]), lot(&[6000.0, 0.0], &[0.45, 0.55]));
        let m = AttentionConstant::from_menus([&menu]);
        let swapped = menu.swapped();
        for rule in ALL_RULES {
            if rule.is_attention() {
                continue;
            }
            let p = perceive(rule, &menu, m);
            let q = perceive(rule, &swapped, m);
            assert!(p.perceived_a.approx_eq(&q.perceived_b), "rule {rule}");
            assert!(p.perceived_b.approx_eq(&q.perceived_a), "rule {rule}");
        }
        // A1 on the swapped menu matches A2 on the original, sides exchanged.
        let p = perceive(RuleId::A2, &menu, m);
        let q = perceive(RuleId::A1, &swapped, m);
        assert!(p.perceived_a.approx_eq(&q.perceived_b));
        assert!(p.perceived_b.approx_eq(&q.perceived_a));
    }
}
