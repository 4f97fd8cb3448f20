use proptest::prelude::*;

use rfvi::importance::{importance_interval, ImportanceMethod, ImportanceRecord, ImportanceReport};
use rfvi::metrics::{accuracy, auc};
use rfvi::selection::{baseline_sizes, search_candidates};
use rfvi::stats::{
    rank_and_classify, wilcoxon_signed_rank, wilcoxon_signed_rank_with, Alternative, PairedSample, WilcoxonMethod,
};
use rfvi::synth::{gen_simulation, EffectCategory, SimulationConfig};
use rfvi::{fit_forest, stratified_kfold, Dataset, Forest, ForestConfig, SeedSpec};

fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut num, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                num += if si > sj { 1.0 } else if si == sj { 0.5 } else { 0.0 };
            }
        }
    }
    num / pairs
}

/// Scores on a coarse grid so ties are common, with both classes present.
fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (2usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec((0u8..8).prop_map(|v| v as f64 / 8.0), n),
            prop::collection::vec(0u8..2, n - 2),
        )
            .prop_map(|(s, mut y)| {
                y.push(0);
                y.push(1);
                (s, y)
            })
    })
}

fn report_from(values: &[f64], halfwidths: &[f64]) -> ImportanceReport {
    let records = values
        .iter()
        .zip(halfwidths)
        .enumerate()
        .map(|(j, (&v, &h))| ImportanceRecord {
            variable: j,
            name: format!("X{}", j + 1),
            value: v,
            per_tree_diffs: Vec::new(),
            ci_lower: v - h,
            ci_upper: v + h,
            ci_degenerate: h == 0.0,
            skipped_trees: 0,
        })
        .collect();
    ImportanceReport {
        method: ImportanceMethod::PermAuc,
        records,
        forest_config: ForestConfig::default(),
        u: 2.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn auc_matches_pair_counting((s, y) in scored_labels()) {
        prop_assert!((auc(&s, &y).unwrap() - pairwise_auc(&s, &y)).abs() < 1e-12);
    }

    #[test]
    fn auc_invariant_under_increasing_maps((s, y) in scored_labels(), a in 0.1f64..5.0, b in -3.0f64..3.0) {
        let t: Vec<f64> = s.iter().map(|v| (a * v + b).exp()).collect();
        prop_assert!((auc(&s, &y).unwrap() - auc(&t, &y).unwrap()).abs() < 1e-12);
        let flipped: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert!((auc(&flipped, &y).unwrap() - (1.0 - auc(&s, &y).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn accuracy_is_a_fraction((s, y) in scored_labels()) {
        let a = accuracy(&s, &y, 0.5);
        prop_assert!((0.0..=1.0).contains(&a));
        let inverse: Vec<f64> = s.iter().map(|v| 1.0 - v).collect();
        let strict = s.iter().filter(|&&v| v != 0.5).count();
        if strict == s.len() {
            prop_assert!((a + accuracy(&inverse, &y, 0.5) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn folds_are_balanced(n0 in 2usize..60, n1 in 2usize..30, k in 2usize..8, seed in any::<u64>()) {
        let labels: Vec<u8> = (0..n0 + n1).map(|i| u8::from(i >= n0)).collect();
        let ds = Dataset::from_rows(&vec![vec![0.0]; n0 + n1], labels).unwrap();
        prop_assume!(k <= (n0 + n1) / 2);
        let folds = stratified_kfold(&ds, k, SeedSpec(seed)).unwrap();
        let spread = |class: Option<u8>| {
            let sizes: Vec<usize> = (0..k)
                .map(|f| folds.test_rows(f).iter().filter(|&&i| class.is_none_or(|c| ds.label(i) == c)).count())
                .collect();
            sizes.iter().max().unwrap() - sizes.iter().min().unwrap()
        };
        prop_assert!(spread(Some(0)) <= 1);
        prop_assert!(spread(Some(1)) <= 1);
        prop_assert!(spread(None) <= 1);
        prop_assert!(folds.fold_of.iter().all(|&f| f < k));
    }

    #[test]
    fn candidates_are_nested_with_separated_pivots(
        entries in prop::collection::vec((-1.0f64..1.0, 0.0f64..0.3), 1..40)
    ) {
        let (values, widths): (Vec<f64>, Vec<f64>) = entries.into_iter().unzip();
        let report = report_from(&values, &widths);
        let sets = search_candidates(&report);
        let order = report.ranking();
        prop_assert_eq!(&sets[0].variables, &order);
        let top = &report.records[order[0]];
        for pair in sets.windows(2) {
            prop_assert!(pair[1].len() < pair[0].len());
            prop_assert_eq!(&pair[1].variables[..], &pair[0].variables[..pair[1].len()]);
            // the previous pivot's interval lies wholly below the new pivot's
            let old = &report.records[*pair[0].variables.last().unwrap()];
            let new = &report.records[*pair[1].variables.last().unwrap()];
            prop_assert!(new.ci_lower > old.ci_upper);
        }
        // the search stops once the top interval meets the last pivot's
        let last = &report.records[*sets.last().unwrap().variables.last().unwrap()];
        prop_assert!(top.ci_lower <= last.ci_upper);
        prop_assert!(sets.len() <= values.len());
    }

    #[test]
    fn interval_is_centred_with_expected_width(diffs in prop::collection::vec(-1.0f64..1.0, 0..50), u in 0.0f64..4.0) {
        let iv = importance_interval(&diffs, u);
        if diffs.len() < 2 {
            prop_assert!(iv.degenerate);
            prop_assert_eq!(iv.lower, iv.upper);
        } else {
            let k = diffs.len() as f64;
            let m = diffs.iter().sum::<f64>() / k;
            let sd = (diffs.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
            prop_assert!((iv.upper - iv.lower - 2.0 * u * sd / k.sqrt()).abs() < 1e-9);
            prop_assert!(((iv.upper + iv.lower) / 2.0 - m).abs() < 1e-9);
        }
    }

    #[test]
    fn wilcoxon_p_values_are_consistent(d in prop::collection::vec(-5i32..6, 1..25)) {
        let diffs: Vec<f64> = d.iter().map(|&v| v as f64).collect();
        let sample = PairedSample::from_differences(&diffs).unwrap();
        let g = wilcoxon_signed_rank(&sample, Alternative::Greater);
        let l = wilcoxon_signed_rank(&sample, Alternative::Less);
        let t = wilcoxon_signed_rank(&sample, Alternative::TwoSided);
        for r in [g, l, t] {
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }
        prop_assert!((t.p_value - (2.0 * g.p_value.min(l.p_value)).min(1.0)).abs() < 1e-12);
        // swapping the pair exchanges the one-sided tails
        let s = wilcoxon_signed_rank(&sample.swapped(), Alternative::Less);
        prop_assert!((s.p_value - g.p_value).abs() < 1e-12);
    }

    #[test]
    fn misclassification_counts_fit_their_bands(values in prop::collection::vec(-1.0f64..1.0, 30)) {
        let truth = SimulationConfig::new(50, 1.0).categories();
        let m = rank_and_classify(&values, &truth).unwrap();
        prop_assert!(m.strong <= 5 && m.moderate <= 5 && m.weak <= 5);
        prop_assert!(m.noise <= 15);
    }

    #[test]
    fn forest_checkpoint_round_trips(seed in any::<u64>()) {
        let ds = gen_simulation(&SimulationConfig::new(30, 2.0), SeedSpec(seed)).unwrap();
        let forest = fit_forest(&ds, &ForestConfig::default().with_ntree(3).with_seed(SeedSpec(seed))).unwrap();
        let mut buf = Vec::new();
        forest.write_json(&mut buf).unwrap();
        let back = Forest::read_json(&buf[..]).unwrap();
        prop_assert_eq!(back.predict_dataset(&ds).unwrap(), forest.predict_dataset(&ds).unwrap());
    }
}

#[test]
fn baseline_sizes_follow_integer_recursion() {
    for p in 2..=500usize {
        let mut expected = vec![p];
        let mut s = p;
        while s > 2 {
            s = (4 * s / 5).clamp(2, s - 1);
            expected.push(s);
        }
        assert_eq!(baseline_sizes(p, 0.2), expected, "p = {p}");
    }
}

#[test]
fn normal_approximation_tracks_exact_at_twelve() {
    let mut rng = SeedSpec(3).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d: Vec<f64> = (0..12)
            .map(|i| {
                let sign = if rand::Rng::random_bool(&mut rng, 0.5) { 1.0 } else { -1.0 };
                sign * (i as f64 + 1.0)
            })
            .collect();
        let sample = PairedSample::from_differences(&d).unwrap();
        let e = wilcoxon_signed_rank_with(&sample, Alternative::TwoSided, WilcoxonMethod::Exact);
        let n = wilcoxon_signed_rank_with(&sample, Alternative::TwoSided, WilcoxonMethod::Normal);
        worst = worst.max((e.p_value - n.p_value).abs());
    }
    assert!(worst < 0.02, "largest gap {worst}");
}

#[test]
fn gini_importance_is_non_negative() {
    for seed in 0..10 {
        let ds = gen_simulation(&SimulationConfig::new(60, 4.0), SeedSpec(seed)).unwrap();
        let forest = fit_forest(&ds, &ForestConfig::default().with_ntree(10)).unwrap();
        let r = rfvi::importance::gini_importance(&forest);
        assert!(r.records.iter().all(|x| x.value >= 0.0));
    }
}

#[test]
fn truth_categories_have_default_block_sizes() {
    let truth = SimulationConfig::new(50, 1.0).categories();
    for (cat, size) in EffectCategory::ALL.into_iter().zip([5, 5, 5, 15]) {
        assert_eq!(truth.iter().filter(|&&c| c == cat).count(), size);
    }
}
