use proptest::prelude::*;
use shapshift::bench::{evaluate, lasso_kkt_violation, lasso_select, LassoParams};
use shapshift::synth::{generate, lambda_at, ShiftKind, ShiftScenario};
use shapshift::{Dataset, GbdtModel, GbdtParams, LagSource};

fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..5, 3usize..40).prop_flat_map(|(m, n)| {
        (prop::collection::vec(prop::collection::vec(-100.0..100.0f64, n), m), prop::collection::vec(-10.0..10.0f64, n))
            .prop_map(move |(cols, y)| {
                // unsorted names on purpose
                let names = (0..m).map(|j| format!("c{}", (m - j) * 3)).collect();
                Dataset::new(names, cols, "target", y).unwrap()
            })
    })
}

fn sorted_columns(ds: &Dataset) -> bool {
    ds.feature_names().windows(2).all(|w| w[0] < w[1])
        && ds.columns().len() == ds.n_features()
        && ds.columns().iter().all(|c| c.len() == ds.n_rows())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn csv_round_trip(ds in dataset()) {
        let text = ds.to_csv_string();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, &text).unwrap();
        let back = Dataset::load_csv(&path, "target").unwrap();
        prop_assert_eq!(&back, &ds);
        prop_assert_eq!(back.to_csv_string(), text);
        prop_assert!(sorted_columns(&back));
    }

    #[test]
    fn chronological_split_partitions(n in 3usize..500, a in 1usize..100, b in 1usize..100) {
        let ds = Dataset::new(vec!["x".into()], vec![(0..n).map(|i| i as f64).collect()], "y", vec![0.0; n]).unwrap();
        match ds.split_chronological(a, b) {
            Ok(s) => {
                let all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                prop_assert_eq!((s.train.len(), s.val.len()), (a, b));
            }
            Err(_) => prop_assert!(a + b > n),
        }
    }

    #[test]
    fn random_split_is_disjoint_and_ordered(n in 10usize..300, seed in any::<u64>()) {
        let ds = Dataset::new(vec!["x".into()], vec![(0..n).map(|i| i as f64).collect()], "y", vec![0.0; n]).unwrap();
        let s = ds.split_random([0.6, 0.2, 0.2], seed).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        for part in [&s.train, &s.val, &s.test] {
            prop_assert!(part.windows(2).all(|w| w[0] < w[1]));
        }
        all.sort();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn permutation_keeps_multiset(ds in dataset(), seed in any::<u64>()) {
        let src = ds.feature_names()[0].clone();
        let out = ds.permute_column(&src, seed, "perm").unwrap();
        let mut a = out.column("perm").unwrap().to_vec();
        let mut b = ds.column(&src).unwrap().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
        prop_assert!(sorted_columns(&out));
    }

    #[test]
    fn lag_aligns_bit_exactly(ds in dataset(), lag in 1usize..3) {
        prop_assume!(lag < ds.n_rows());
        let src = ds.feature_names()[0].clone();
        let out = ds.add_lag_feature(&LagSource::Column(src.clone()), lag, "lagged").unwrap();
        let orig = ds.column(&src).unwrap();
        let lagged = out.column("lagged").unwrap();
        for (i, v) in lagged.iter().enumerate() {
            prop_assert_eq!(v.to_bits(), orig[i].to_bits());
        }
        let tl = ds.add_lag_feature(&LagSource::Target, lag, "tl").unwrap();
        prop_assert_eq!(tl.column("tl").unwrap(), &ds.target()[..ds.n_rows() - lag]);
        prop_assert_eq!(tl.target(), &ds.target()[lag..]);
    }

    #[test]
    fn boosting_never_raises_training_error(ds in dataset(), depth in 1usize..4, leaf in 1usize..4) {
        let params = GbdtParams { n_trees: 15, max_depth: depth, min_samples_leaf: leaf, learning_rate: 0.5, ..Default::default() };
        let model = GbdtModel::fit(&ds, &params).unwrap();
        prop_assert_eq!(&model, &GbdtModel::fit(&ds, &params).unwrap());
        let x = ds.feature_matrix();
        let mut last = f64::INFINITY;
        for t in 0..=model.trees().len() {
            let partial = GbdtModel::new(
                model.base_score(), model.learning_rate(), model.feature_names().to_vec(), model.trees()[..t].to_vec(),
            ).unwrap();
            let p = partial.predict(&x).unwrap();
            let mse = p.iter().zip(ds.target()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / p.len() as f64;
            prop_assert!(mse <= last + 1e-9);
            last = mse;
        }
        prop_assert_eq!(GbdtModel::from_text(&model.to_text()).unwrap(), model);
    }

    #[test]
    fn lasso_meets_optimality(ds in dataset(), lambda in 1e-4..1.0f64) {
        let params = LassoParams { lambda, max_sweeps: 100_000, tol: 1e-12 };
        let fit = lasso_select(&ds, &params).unwrap();
        prop_assume!(fit.converged);
        prop_assert!(lasso_kkt_violation(&ds, &fit, lambda) < 1e-6);
    }

    #[test]
    fn sudden_schedule_is_a_step(index in 0usize..30000) {
        let scn = ShiftScenario::default();
        let want = if index < scn.break_index { scn.lambda1_a } else { scn.lambda1_b };
        prop_assert_eq!(lambda_at(&scn, 1, index).unwrap(), want);
    }
}

#[test]
fn subsampled_fits_depend_on_seed_only() {
    let n = 300;
    let x: Vec<f64> = (0..n).map(|i| ((i * 37) % n) as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| (v / 30.0).sin()).collect();
    let ds = Dataset::new(vec!["x".into()], vec![x], "y", y).unwrap();
    let p = GbdtParams { n_trees: 10, subsample: 0.5, min_samples_leaf: 5, ..Default::default() };
    let a = GbdtModel::fit(&ds, &p.with_seed(1)).unwrap();
    assert_eq!(a, GbdtModel::fit(&ds, &p.with_seed(1)).unwrap());
    assert_ne!(a, GbdtModel::fit(&ds, &p.with_seed(2)).unwrap());
    for tree in a.trees() {
        assert_eq!(tree.root_cover(), n as u64);
    }
}

#[test]
fn incremental_schedule_edges() {
    let scn = ShiftScenario::case(ShiftKind::Incremental, 1).unwrap();
    let (a, b) = (scn.lambda1_a, scn.lambda1_b);
    assert_eq!(lambda_at(&scn, 1, scn.break_index - 1).unwrap(), a);
    assert_eq!(lambda_at(&scn, 1, scn.break_index + scn.ramp_len).unwrap(), b);
    let mid = scn.break_index + 1234;
    let want = ((b - a) * 1234.0 + 10000.0 * a) / 10000.0;
    assert_eq!(lambda_at(&scn, 1, mid).unwrap(), want);
}

#[test]
fn default_generation_layout() {
    let ds = generate(&ShiftScenario { n_samples: 2000, break_index: 1000, ..Default::default() }).unwrap();
    assert_eq!(ds.n_rows(), 1999);
    assert_eq!(ds.n_features(), 21);
    for (name, col) in ds.feature_names().iter().zip(ds.columns()) {
        if name != "y_lag1" {
            assert!(col.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
    assert!(ds.target().iter().all(|v| v.is_finite()));
}

#[test]
fn evaluation_ignores_feature_order() {
    let ds = generate(&ShiftScenario { n_samples: 800, break_index: 400, lagged_inputs: false, ..Default::default() }).unwrap();
    let (tr, _, te) = ds.split_chronological(500, 100).unwrap().apply(&ds).unwrap();
    let p = GbdtParams { n_trees: 20, ..Default::default() };
    let a = evaluate("a", &["x1", "x5", "y_lag1"], &tr, &te, &p, &[1, 2]).unwrap();
    let b = evaluate("a", &["y_lag1", "x1", "x5"], &tr, &te, &p, &[1, 2]).unwrap();
    assert_eq!(a, b);
}
