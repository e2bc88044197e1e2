//! Small hand-checkable cases that cross module boundaries. Every expected
//! number is recomputed here from first principles rather than copied.

use adacsl::baselines::expected_posthoc_cost;
use adacsl::data::{model_a_profile, running_example_profile, stratified_folds, synth_generate, LeafProfile, SynthSpec};
use adacsl::harness::{paired_significance, run_sweep, HyperGrid, NonConvergencePolicy, SweepConfig, SweepModel};
use adacsl::roc::{constraint_line, intersect, iso_loss_line, min_feasible_cost, optimal_point, roc_curve, RocPoint};
use adacsl::tree::{fit, leaf_groups, score, score_all, TreeNode};
use adacsl::*;
use approx::assert_abs_diff_eq;

fn costs_19() -> CostMatrix64 {
    CostMatrix::canonical(19.0, 1.0).unwrap()
}

fn q(n: i64, d: i64) -> Exact {
    Exact::new(n, d)
}

#[test]
fn model_a_counts_cost_and_rates() {
    let data = synth_generate(&model_a_profile(), 5).unwrap();
    let pred: Vec<bool> = (0..data.n_instances()).map(|i| data.value(i, 0) == 1.0).collect();
    let eval = evaluate(data.labels(), &pred, &costs_19()).unwrap();
    let c = eval.confusion;
    assert_eq!((c.tp, c.fp, c.fn_, c.tn), (80, 120, 20, 780));
    assert_eq!(eval.cost, 120.0 * 1.0 + 20.0 * 19.0);
    assert_abs_diff_eq!(eval.metrics.accuracy.unwrap(), (80.0 + 780.0) / 1000.0, epsilon = 1e-12);
    assert_abs_diff_eq!(eval.metrics.precision.unwrap(), 80.0 / 200.0, epsilon = 1e-12);
    assert_abs_diff_eq!(eval.metrics.fpr.unwrap(), 120.0 / 900.0, epsilon = 1e-12);
}

#[test]
fn split_value_routes_right() {
    let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
    let data = Dataset::new(rows, vec![false, false, true, true], vec!["x".into()]).unwrap();
    let model = fit(&data, &CostMatrix64::unit(), &TreeParams::new(1, 1)).unwrap();
    let TreeNode::Split { threshold, .. } = &model.root else {
        panic!("expected a split");
    };
    assert_eq!(score(&model, &[*threshold]).unwrap(), 1.0);
    assert_eq!(score(&model, &[*threshold - 1e-9]).unwrap(), 0.0);
}

/// A tree over one feature with leaves at the integer values `0..leaves.len()`,
/// each leaf given as `(n_pos, n_neg)`.
fn staircase(leaves: &[(usize, usize)]) -> TreeModel64 {
    fn build(leaves: &[(usize, usize)], offset: usize) -> TreeNode<f64> {
        if let [(n_pos, n_neg)] = leaves {
            return TreeNode::Leaf {
                n_pos: *n_pos,
                n_neg: *n_neg,
                score: *n_pos as f64 / (n_pos + n_neg) as f64,
            };
        }
        let mid = leaves.len() / 2;
        TreeNode::Split {
            feature: 0,
            threshold: (offset + mid) as f64 - 0.5,
            left: Box::new(build(&leaves[..mid], offset)),
            right: Box::new(build(&leaves[mid..], offset + mid)),
        }
    }
    TreeModel {
        feature_names: vec!["f".into()],
        hyperparams: TreeParams::default(),
        train_costs: CostMatrix::canonical(10.0, 1.0).unwrap(),
        metadata: Default::default(),
        root: build(leaves, 0),
    }
}

/// Instances matching `staircase(leaves)`: leaf `k` holds value `k`.
fn staircase_data(leaves: &[(usize, usize)]) -> Dataset {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (k, &(n_pos, n_neg)) in leaves.iter().enumerate() {
        for i in 0..n_pos + n_neg {
            rows.push(vec![k as f64]);
            labels.push(i < n_pos);
        }
    }
    Dataset::new(rows, labels, vec!["f".into()]).unwrap()
}

#[test]
fn equal_score_leaves_share_a_group() {
    // Leaves (10 instances, 4 positive) and (5, 2) both score 0.4.
    let leaves = [(4, 6), (0, 20), (2, 3)];
    let model = staircase(&leaves);
    let grouping = leaf_groups(&model, &staircase_data(&leaves)).unwrap();
    assert_eq!(model.leaves().len(), 3);
    assert_eq!(grouping.scores(), vec![4.0 / 10.0, 0.0]);
    assert_eq!(grouping.sizes(), vec![10 + 5, 20]);
}

#[test]
fn budgeted_labelling_on_two_groups() {
    let grouping = LeafGrouping::from_sizes(&[q(9, 10), q(2, 5)], &[3, 5]).unwrap();
    let budget = BudgetSpec::new(2, 8).unwrap();
    let tau = q(1, 2);
    let tau_d = classifier_threshold(&grouping, tau, &budget);
    assert_eq!(tau_d, q(9, 10));
    assert_eq!(tie_proportion(&grouping, tau_d, &budget).unwrap(), q(2, 3));
    let pair = ThresholdPair { tau, tau_d };
    for seed in 0..20 {
        let labels = classify_with_budget(&grouping, &pair, &budget, seed).unwrap();
        assert_eq!(labels.n_positive, 2);
        assert!(grouping.groups()[0].members.iter().filter(|&&i| labels.labels[i]).count() == 2);
    }
}

#[test]
fn test_phase_budget_uses_the_test_grouping() {
    // Leaf 1 scores 3/3 = 1 over 3 instances; leaf 0 scores 2/5 = 0.4.
    let leaves = [(2, 3), (3, 0)];
    let model = staircase(&leaves);
    let test = staircase_data(&leaves);
    assert_eq!(static_threshold(&model.train_costs).unwrap(), 1.0 / 11.0);
    for seed in 0..10 {
        let out = apply_to_test(&model, &test, &BudgetSpec::new(2, 8).unwrap(), seed).unwrap();
        assert_eq!(out.n_positive, 2);
        assert_eq!((5..8).filter(|&i| out.labels[i]).count(), 2);
    }
}

#[test]
fn budget_projection() {
    let floor = |b: usize, tr: usize, te: usize| b * tr / te;
    let p = project_budget(&BudgetSpec::new(7, 30).unwrap(), 100, 30).unwrap();
    assert_eq!(p.limit, floor(7, 100, 30));
    assert_eq!(p.limit, 23);
    assert_eq!(project_budget(&BudgetSpec::new(28, 747).unwrap(), 1494, 747).unwrap().limit, 56);
    assert_eq!(project_budget(&BudgetSpec::new(10, 40).unwrap(), 40, 40).unwrap().limit, 10);
}

#[test]
fn roc_geometry() {
    let grouping = LeafGrouping::from_sizes(&[q(4, 5), q(1, 5)], &[5, 5]).unwrap();
    let labels = [true, true, true, true, false, true, false, false, false, false];
    let curve = roc_curve(&grouping, &labels).unwrap();
    let expected = [(0, 1, 0, 1), (1, 5, 4, 5), (1, 1, 1, 1)];
    for (p, &(a, b, c, d)) in curve.points.iter().zip(&expected) {
        assert_eq!((p.fpr, p.tpr), (q(a, b), q(c, d)));
    }

    let line = iso_loss_line(&CostMatrix::canonical(q(19, 1), q(1, 1)).unwrap(), 100, 900, q(500, 1)).unwrap();
    assert_eq!(line.slope, q(900, 1900));
    assert_eq!(line.at(q(2, 15)), q(4, 5));
    let through_origin = iso_loss_line(&costs_19(), 100, 900, 1900.0).unwrap();
    assert_abs_diff_eq!(through_origin.intercept, 0.0, epsilon = 1e-12);

    let constraint = constraint_line::<Exact>(100, 900, &BudgetSpec::new(100, 1000).unwrap()).unwrap();
    assert_eq!((constraint.slope, constraint.intercept), (q(-9, 1), q(1, 1)));
}

#[test]
fn diagonal_intersection_closed_form() {
    let grouping = LeafGrouping::from_sizes(&[q(1, 2)], &[10]).unwrap();
    let labels: Vec<bool> = (0..10).map(|i| i < 5).collect();
    let curve = roc_curve(&grouping, &labels).unwrap();
    for limit in [0usize, 2, 3, 7, 10] {
        let line = constraint_line::<Exact>(5, 5, &BudgetSpec::new(limit, 10).unwrap()).unwrap();
        let p = intersect(&curve, &line).unwrap();
        let fpr = line.intercept / (Exact::from_integer(1) - line.slope);
        assert_eq!(p, RocPoint::new(fpr, fpr));
    }
}

#[test]
fn constrained_optimum_on_model_a() {
    let grouping = LeafGrouping::from_sizes(&[q(2, 5), q(1, 40)], &[200, 800]).unwrap();
    let labels: Vec<bool> = [(200, 80), (800, 20)]
        .iter()
        .flat_map(|&(s, p)| (0..s).map(move |i| i < p))
        .collect();
    let curve = roc_curve(&grouping, &labels).unwrap();
    let costs = CostMatrix::canonical(q(19, 1), q(1, 1)).unwrap();
    let free = optimal_point(&curve, &costs, None).unwrap();
    assert_eq!((free.point.fpr, free.point.tpr, free.loss), (q(2, 15), q(4, 5), q(500, 1)));
    let budget = BudgetSpec::new(100, 1000).unwrap();
    let capped = optimal_point(&curve, &costs, Some(&budget)).unwrap();
    assert_eq!((capped.point.fpr, capped.point.tpr), (q(1, 15), q(2, 5)));
    // 60 false positives at 1 plus 60 missed positives at 19.
    assert_eq!(capped.loss, q(60 + 60 * 19, 1));
    assert_eq!(expected_posthoc_cost(&grouping, &[80, 20], &budget, &costs).unwrap(), capped.loss);
}

#[test]
fn min_feasible_cost_branches() {
    let costs = costs_19();
    assert_eq!(min_feasible_cost(100, &BudgetSpec::new(100, 1000).unwrap(), &costs), 0.0);
    assert_eq!(min_feasible_cost(100, &BudgetSpec::new(80, 1000).unwrap(), &costs), 20.0 * 19.0);
    assert_eq!(min_feasible_cost(100, &BudgetSpec::new(150, 1000).unwrap(), &costs), 50.0 * 1.0);
}

#[test]
fn cost_tree_predicts_at_least_as_many_positives() {
    let data = synth_generate(&running_example_profile(), 8).unwrap();
    let costs = costs_19();
    let tau = static_threshold(&costs).unwrap();
    let count = |m: &TreeModel64| score_all(m, &data).unwrap().iter().filter(|&&s| s >= tau).count();
    for depth in 1..=3 {
        let params = TreeParams::new(depth, 1);
        let plain = fit(&data, &CostMatrix64::unit(), &params).unwrap();
        let cost = fit(&data, &costs, &params).unwrap();
        assert!(count(&cost) >= count(&plain), "depth {depth}");
    }
}

#[test]
fn empty_budget_labels_nothing() {
    let data = synth_generate(&model_a_profile(), 2).unwrap();
    for kind in [BaselineKind::PlainTree, BaselineKind::CostTree] {
        let out = run_baseline(kind, &data, &data, &costs_19(), &BudgetSpec::new(0, 1000).unwrap(), &TreeParams::new(2, 1), 0)
            .unwrap();
        assert_eq!(out.labels.n_positive, 0);
        assert_eq!(out.evaluation.cost, 19.0 * 100.0);
    }
}

#[test]
fn five_standard_errors_is_significant() {
    // Differences d_i = 5 + (i mod 2 ? 1 : -1) * s, chosen so mean / SE = 5.
    let n = 30usize;
    let base: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let sd = (base.iter().map(|v| v * v).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    let se = sd / (n as f64).sqrt();
    let a: Vec<f64> = base.iter().map(|v| 5.0 * se + v).collect();
    let b = vec![0.0; n];
    let p = paired_significance(&a, &b).unwrap();
    // scipy.stats.t.sf(5, 29) * 2
    assert_abs_diff_eq!(p, 2.5366e-05, epsilon = 1e-8);
    assert!(p < 0.05);
}

fn separable(n: usize, n_pos: usize) -> Dataset {
    let spec = SynthSpec {
        n,
        n_pos,
        leaves: vec![LeafProfile::new(n_pos, n_pos, &[1.0]), LeafProfile::new(n - n_pos, 0, &[0.0])],
        signature_names: vec!["f".into()],
        noise_columns: 1,
    };
    synth_generate(&spec, 6).unwrap()
}

#[test]
fn separable_data_reaches_the_cost_floor() {
    let data = separable(300, 60);
    let config = SweepConfig {
        budget_fractions: vec![1.0, 1.5, 2.0],
        repeats: 2,
        grid: HyperGrid {
            max_depth: vec![1, 2],
            min_samples_leaf: vec![1],
            min_cost_reduction: vec![0.0],
            laplace: false,
        },
        // A pure positive leaf that outnumbers the budget keeps the adaptive
        // threshold at 1, so a binding projected budget cannot converge.
        max_iterations: 5,
        nonconvergence: NonConvergencePolicy::RefitLast,
        ..SweepConfig::default()
    };
    let report = run_sweep(&data, &config).unwrap();
    assert_eq!(report.rows.len(), 3 * 3 * 6);
    for row in &report.rows {
        let test_pos = 20;
        let budget = BudgetSpec::new(row.budget, 100).unwrap();
        let floor = min_feasible_cost(test_pos, &budget, &config.costs);
        assert_eq!(row.cost, floor, "{:?} run {} budget {}", row.model, row.run, row.budget);
        assert!(row.n_positive <= row.budget);
    }
}

#[test]
fn nonconvergence_aborts_the_sweep_by_default() {
    let data = separable(300, 60);
    let config = SweepConfig {
        budget_fractions: vec![0.5],
        repeats: 1,
        max_iterations: 3,
        ..SweepConfig::default()
    };
    let err = run_sweep(&data, &config).unwrap_err();
    assert!(err.to_string().contains("did not converge"), "{err}");
}

#[test]
fn marketing_sized_budget_range() {
    // 2240 rows with 336 responders: each 3-fold test split holds 112.
    let data = adacsl::data::hard_dataset(
        &adacsl::data::HardSpec {
            n: 2240,
            ..Default::default()
        },
        1,
    )
    .unwrap();
    assert_eq!(data.n_positive(), 336);
    let plan = stratified_folds(&data, 3, 10, 7).unwrap();
    for split in plan.splits() {
        let test_pos = split.test.iter().filter(|&&i| data.labels()[i]).count();
        assert_eq!(test_pos, 112);
        for (frac, expected) in [(0.25, 28), (0.75, 84)] {
            let b = BudgetSpec::from_positive_fraction(frac, test_pos, split.test.len()).unwrap();
            assert_eq!(b.limit, expected);
        }
    }

    let config = SweepConfig {
        budget_fractions: vec![0.25, 0.75],
        repeats: 1,
        grid: HyperGrid {
            max_depth: vec![2],
            min_samples_leaf: vec![20],
            min_cost_reduction: vec![0.0],
            laplace: false,
        },
        ..SweepConfig::default()
    };
    let report = run_sweep(&data, &config).unwrap();
    for row in &report.rows {
        assert!((28..=84).contains(&row.budget), "{}", row.budget);
        assert!(row.n_positive <= row.budget);
    }
}

#[test]
fn selections_come_from_the_grid() {
    let data = adacsl::data::hard_dataset(&adacsl::data::HardSpec { n: 400, ..Default::default() }, 2).unwrap();
    let grid = HyperGrid {
        max_depth: vec![1, 3],
        min_samples_leaf: vec![5, 40],
        min_cost_reduction: vec![0.0, 2.0],
        laplace: false,
    };
    let config = SweepConfig {
        budget_fractions: vec![0.4, 0.8],
        repeats: 2,
        grid: grid.clone(),
        ..SweepConfig::default()
    };
    let report = run_sweep(&data, &config).unwrap();
    let combos = grid.combos();
    assert_eq!(report.selections.len(), 2 * 3);
    for s in &report.selections {
        assert!(combos.contains(&s.params), "{:?}", s.params);
    }
    for model in [SweepModel::Adacsl, SweepModel::PlainTree, SweepModel::CostTree] {
        assert_eq!(report.rows.iter().filter(|r| r.model == model).count(), 2 * 6);
    }
    assert!(report.rows.iter().all(|r| r.n_positive <= r.budget));
}

#[test]
fn reduction_sizes_on_twenty_three_features() {
    let n = 60;
    let labels: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..23).map(|j| ((i * (j + 1)) % 7) as f64).collect()).collect();
    let names = (0..23).map(|j| format!("x{j}")).collect();
    let data = Dataset::new(rows, labels, names).unwrap();
    let drop = |keep: f64| ((1.0 - keep) * 23.0_f64).ceil() as usize;
    for (keep, expected) in [(0.75, 17), (0.5, 11)] {
        assert_eq!(23 - drop(keep), expected);
        let reduced = adacsl::data::reduce_features(&data, keep, 10).unwrap();
        assert_eq!(reduced.n_features(), expected);
    }
}
