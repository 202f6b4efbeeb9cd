//! Randomized property checks for the dominance order, the rule library,
//! admissibility construction, and the concentration solvers.

use mrci::{
    admissibility_matrix, attention_floor, cap_bound, fsd_strict, fsd_weak, match_share,
    mrci_exact, mrci_heuristic, perceive, permute_choices, strict_set, AttentionConstant, Dataset,
    Lottery, Menu, Observation, RecommendationTable, RuleId, ALL_RULES,
};
use proptest::prelude::*;
use std::time::Duration;

fn lottery() -> impl Strategy<Value = Lottery> {
    prop::collection::vec((-4000i64..=4000, 1u32..=100), 1..=4).prop_map(|entries| {
        let prizes: Vec<f64> = entries.iter().map(|&(z, _)| z as f64 / 4.0).collect();
        let total: f64 = entries.iter().map(|&(_, w)| f64::from(w)).sum();
        let probs: Vec<f64> = entries.iter().map(|&(_, w)| f64::from(w) / total).collect();
        Lottery::new(&prizes, &probs).expect("generated lottery is valid")
    })
}

fn menu() -> impl Strategy<Value = Menu> {
    (lottery(), lottery()).prop_map(|(a, b)| Menu::marginal(a, b))
}

fn observations() -> impl Strategy<Value = Vec<Observation>> {
    prop::collection::vec((menu(), prop::bool::ANY), 1..=15).prop_map(|items| {
        items
            .into_iter()
            .enumerate()
            .map(|(i, (menu, first))| Observation { trial: i + 1, menu, choice: u8::from(first) })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fsd_weak_is_reflexive(x in lottery()) {
        prop_assert!(fsd_weak(&x, &x));
        prop_assert!(!fsd_strict(&x, &x));
    }

    #[test]
    fn fsd_weak_is_antisymmetric(x in lottery(), y in lottery()) {
        if fsd_weak(&x, &y) && fsd_weak(&y, &x) {
            prop_assert!(x.approx_eq(&y));
        }
    }

    #[test]
    fn fsd_weak_is_transitive(x in lottery(), y in lottery(), z in lottery()) {
        if fsd_weak(&x, &y) && fsd_weak(&y, &z) {
            prop_assert!(fsd_weak(&x, &z));
        }
    }

    #[test]
    fn uniform_shift_strictly_dominates(x in lottery(), shift in 1u32..=50) {
        let delta = f64::from(shift);
        let raised: Vec<f64> = x.prizes().iter().map(|&z| z + delta).collect();
        let y = Lottery::new(&raised, x.probs()).unwrap();
        prop_assert!(fsd_strict(&y, &x));
        prop_assert!(!fsd_weak(&x, &y));
    }

    #[test]
    fn perception_yields_valid_lotteries(m in menu()) {
        let c = AttentionConstant::from_menus([&m]);
        for &rule in ALL_RULES.iter() {
            let p = perceive(rule, &m, c);
            for l in [&p.perceived_a, &p.perceived_b] {
                let total: f64 = l.probs().iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
                prop_assert!(l.probs().iter().all(|&q| q > 0.0));
                prop_assert!(l.prizes().windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn probability_distortion_preserves_support(m in menu()) {
        let c = AttentionConstant::from_menus([&m]);
        let p = perceive(RuleId::Pw, &m, c);
        let (a, b) = m.lotteries();
        prop_assert_eq!(p.perceived_a.prizes(), a.prizes());
        prop_assert_eq!(p.perceived_b.prizes(), b.prizes());
    }

    #[test]
    fn strict_sets_are_nonempty_with_attention_parity(m in menu(), first in prop::bool::ANY) {
        let obs = Observation { trial: 1, menu: m, choice: u8::from(first) };
        let c = AttentionConstant::from_menus([&obs.menu]);
        let set = strict_set(&obs, &ALL_RULES, c);
        prop_assert!(!set.is_empty());
        prop_assert_eq!(set.contains(&RuleId::A1), first);
        prop_assert_eq!(set.contains(&RuleId::A2), !first);
    }

    #[test]
    fn heuristic_never_exceeds_exact(obs in observations(), seed in 0u64..1000) {
        let d = Dataset::new("s", obs);
        let mat = admissibility_matrix(&d, &ALL_RULES);
        let h = mrci_heuristic(&mat, 20, seed);
        let e = mrci_exact(&mat, Duration::from_secs(30));
        prop_assert!(h.numerator <= e.numerator);
        prop_assert!(e.certified);
        let t = d.len() as u64;
        let num: u64 = e.assignment.counts.iter().map(|&n| n * n).sum();
        prop_assert_eq!(num, e.numerator);
        prop_assert_eq!(e.assignment.counts.iter().sum::<u64>(), t);
    }

    #[test]
    fn concentration_respects_floor_and_cap(obs in observations(), perm_seed in 0u64..1000) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let d = Dataset::new("s", obs);
        let rt = RecommendationTable::build(&d, &ALL_RULES);
        let mut sigma: Vec<usize> = (0..d.len()).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed);
        sigma.shuffle(&mut rng);
        let shuffled = permute_choices(&d, &sigma).unwrap();
        let mat = rt.admissibility(&shuffled.choices());
        let e = mrci_exact(&mat, Duration::from_secs(30));
        let alpha = shuffled.alpha();
        let m = match_share(&rt, &shuffled.choices());
        prop_assert!(m >= alpha.max(1.0 - alpha) - 1e-12);
        prop_assert!(e.value >= attention_floor(alpha) - 1e-12);
        prop_assert!(e.value <= cap_bound(m.max(0.5)).unwrap() + 1e-12);
    }
}
