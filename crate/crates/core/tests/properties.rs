use std::sync::Arc;

use ensemble_instability::aggregator::argmax_over;
use ensemble_instability::axioms::{
    check_idc, check_lemma3, check_mcr_all_menus, check_mcr_pair, check_transitivity, check_unanimity,
    common_strict_order, replay,
};
use ensemble_instability::order::{in_w, order_of, profile_from_orders};
use ensemble_instability::rational::{int, ratio};
use ensemble_instability::search::{enumerate_family, find_witnesses, FamilySpec, Generator, ScanOptions};
use ensemble_instability::{Aggregator, Axiom, Execution, LabelSet, LabelSubset, OrderOnLabels, Rational, ScoreProfile, Witness};
use proptest::prelude::*;

fn labels(k: usize) -> Arc<LabelSet> {
    LabelSet::alphabetic(k).unwrap().shared()
}

/// Small integer entries so ties are common.
fn profile(k: std::ops::RangeInclusive<usize>, m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ScoreProfile> {
    (k, m).prop_flat_map(|(k, m)| {
        prop::collection::vec(prop::collection::vec(0i64..5, k), m)
            .prop_map(move |rows| {
                let rows: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
                ScoreProfile::new(labels(k), rows).unwrap()
            })
    })
}

fn profile_pair() -> impl Strategy<Value = (ScoreProfile, ScoreProfile)> {
    (2usize..=4, 1usize..=3).prop_flat_map(|(k, m)| (profile(k..=k, m..=m), profile(k..=k, m..=m)))
}

fn aggregators(m: usize, weights: &[i64]) -> Vec<Aggregator> {
    let mut out = vec![
        Aggregator::SoftVoting,
        Aggregator::HardVoting,
        Aggregator::Borda,
        Aggregator::PairwiseMajority,
        Aggregator::uniform_weights(m),
        Aggregator::WeightedVoting(weights.iter().take(m).map(|&w| int(w)).collect()),
    ];
    out.extend((1..=m).map(Aggregator::Dictator));
    out
}

fn weights() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..4, 4)
}

fn positive_weights() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(1i64..6, 4)
}

fn strict_profile(k: usize, m: usize) -> impl Strategy<Value = ScoreProfile> {
    let perm = Just((0..k).collect::<Vec<usize>>()).prop_shuffle();
    let rows = prop::collection::vec(prop::collection::vec(1i64..20, k), m);
    (perm, rows).prop_map(move |(perm, rows)| {
        // sort each row's values and hand them out along one shared order
        let rows: Vec<Vec<Rational>> = rows
            .into_iter()
            .enumerate()
            .map(|(j, mut r)| {
                r.sort_unstable_by(|a, b| b.cmp(a));
                for i in 1..k {
                    if r[i] >= r[i - 1] {
                        r[i] = r[i - 1] - 1 - j as i64 % 2;
                    }
                }
                let mut row = vec![int(0); k];
                for (rank, &label) in perm.iter().enumerate() {
                    row[label] = int(r[rank]);
                }
                row
            })
            .collect();
        ScoreProfile::new(labels(k), rows).unwrap()
    })
}

fn assert_replays(w: &Witness) {
    assert!(replay(w).unwrap(), "{w}");
    let back = Witness::from_json(&w.to_json()).unwrap();
    assert!(replay(&back).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn choices_are_nonempty_subsets_and_binary_consistent(z in profile(2..=4, 1..=4), w in weights()) {
        let k = z.num_labels();
        for agg in aggregators(z.models(), &w) {
            for s in LabelSubset::full(k).nonempty_subsets() {
                let c = agg.choose(s, &z).unwrap();
                prop_assert!(!c.is_empty());
                prop_assert!(c.is_subset_of(s));
                for y in s.iter() {
                    let beaten = s.iter().any(|y2| y2 != y && agg.choose(LabelSubset::pair(y, y2), &z).unwrap() == LabelSubset::singleton(y2));
                    if !beaten {
                        prop_assert!(c.contains(y), "{agg} on {s:?}: {y} unbeaten but not chosen");
                    }
                }
                if s.len() == 1 {
                    prop_assert_eq!(c, s);
                }
            }
        }
    }

    #[test]
    fn argmax_ignores_a_constant_shift(z in profile(2..=4, 1..=4), w in weights(), shift in -7i64..8) {
        for agg in aggregators(z.models(), &w).into_iter().filter(Aggregator::is_score_maximizing) {
            let ensemble_instability::aggregator::Prepared::Scores(scores) = agg.prepare(&z).unwrap() else {
                unreachable!()
            };
            let shifted: Vec<Rational> = scores.iter().map(|v| v + int(shift)).collect();
            for s in LabelSubset::full(z.num_labels()).nonempty_subsets() {
                prop_assert_eq!(argmax_over(&shifted, s), agg.choose(s, &z).unwrap());
            }
        }
    }

    #[test]
    fn soft_voting_is_uniform_weighting(z in profile(2..=4, 1..=5)) {
        let uniform = Aggregator::uniform_weights(z.models());
        for s in LabelSubset::full(z.num_labels()).nonempty_subsets() {
            prop_assert_eq!(Aggregator::SoftVoting.choose(s, &z).unwrap(), uniform.choose(s, &z).unwrap());
        }
    }

    #[test]
    fn positive_weights_respect_unanimity(z in profile(2..=4, 1..=4), w in positive_weights()) {
        let m = z.models();
        let weighted = Aggregator::WeightedVoting(w[..m].iter().map(|&v| int(v)).collect());
        for agg in [Aggregator::SoftVoting, weighted] {
            prop_assert!(check_unanimity(&agg, &z).unwrap().holds());
            for a in 0..z.num_labels() {
                for b in 0..z.num_labels() {
                    if a != b && z.unanimous(a, b) {
                        prop_assert!(!agg.choose(LabelSubset::pair(a, b), &z).unwrap().contains(b));
                    }
                }
            }
        }
    }

    #[test]
    fn transitivity_iff_idc_and_strengthened_parts(z in profile(3..=4, 1..=4), w in weights()) {
        let k = z.num_labels();
        for agg in aggregators(z.models(), &w) {
            let t = check_transitivity(&agg, &z).unwrap();
            let i = check_idc(&agg, &z).unwrap();
            prop_assert_eq!(t.holds(), i.holds(), "{} on {:?}", agg, z);
            for v in [&t, &i] {
                if let Some(w) = v.witness() {
                    assert_replays(w);
                }
            }
            if t.holds() {
                for y in 0..k {
                    for y1 in 0..k {
                        for y2 in 0..k {
                            if y != y1 && y1 != y2 && y != y2 {
                                for part in 1..=3 {
                                    let v = check_lemma3(&agg, &z, part, (y, y1, y2)).unwrap();
                                    prop_assert!(!matches!(v, ensemble_instability::Verdict::Violated(_)));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn mcr_and_unanimity_witnesses_replay((z, z2) in profile_pair(), w in weights()) {
        for agg in aggregators(z.models(), &w) {
            if let Some(w) = check_unanimity(&agg, &z).unwrap().witness() {
                assert_replays(w);
            }
            if let Some(w) = check_mcr_all_menus(&agg, &z, &z2).unwrap().witness() {
                assert_replays(w);
            }
        }
    }

    #[test]
    fn common_strict_order_blocks_soft_reversals(z in strict_profile(3, 3), z2 in strict_profile(3, 3)) {
        prop_assert!(common_strict_order(&z).is_some());
        prop_assert!(common_strict_order(&z2).is_some());
        prop_assert!(check_mcr_all_menus(&Aggregator::SoftVoting, &z, &z2).unwrap().holds());
        prop_assert!(check_mcr_pair(&Aggregator::SoftVoting, &z, &z2, z.label_set().all()).unwrap().holds());
    }

    #[test]
    fn rows_sit_in_their_own_order(row in prop::collection::vec(-4i64..5, 2..=5)) {
        let k = row.len();
        let row: Vec<Rational> = row.into_iter().map(|v| ratio(v, 3)).collect();
        let order = order_of(labels(k), &row).unwrap();
        prop_assert!(in_w(&row, &order));
    }
}

#[test]
fn weak_orders_round_trip_through_profiles() {
    for k in 2..=4 {
        let l = labels(k);
        for r in OrderOnLabels::all_weak(&l) {
            let z = profile_from_orders(std::slice::from_ref(&r)).unwrap();
            assert_eq!(order_of(l.clone(), z.row(0)).unwrap(), r);
        }
    }
}

#[test]
fn scans_do_not_depend_on_workers() {
    let spec = FamilySpec::new(labels(3), 2, Generator::Grid(4));
    let family = enumerate_family(&spec).unwrap();
    let axioms = [Axiom::Unanimity, Axiom::Mcr, Axiom::Transitivity, Axiom::Idc];
    for agg in [Aggregator::SoftVoting, Aggregator::HardVoting, Aggregator::PairwiseMajority] {
        let run = |exec| {
            let opts = ScanOptions { budget: 5, exec, ..ScanOptions::default() };
            let found = find_witnesses(&agg, &family, &axioms, &opts).unwrap();
            serde_json::to_string(&found.iter().map(Witness::to_json).collect::<Vec<_>>()).unwrap()
        };
        assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
        for w in find_witnesses(&agg, &family, &axioms, &ScanOptions { budget: 5, ..ScanOptions::default() }).unwrap() {
            assert_replays(&w);
        }
    }
}
