use super::*;
use crate::cha::build_hull;
use crate::qstate::Dims;
use crate::sampling::{build_dataset, rng_from_seed, Labeler, SamplerConfig};
use rand::Rng;

fn matrix(rows: &[(Vec<f64>, Label)]) -> FeatureMatrix {
    let dim = rows[0].0.len();
    let values = rows.iter().flat_map(|r| r.0.clone()).collect();
    FeatureMatrix::new(dim, values, rows.iter().map(|r| r.1).collect()).unwrap()
}

fn random_rows(n: usize, dim: usize, seed: u64) -> Vec<(Vec<f64>, Label)> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| {
            // Coarse grid values so that ties between thresholds occur.
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(0..6) as f64).collect();
            let noisy = rng.random::<f64>() < 0.2;
            let y = (x[0] + x[1 % dim] > 5.0) ^ noisy;
            (
                x,
                if y {
                    Label::Entangled
                } else {
                    Label::Separable
                },
            )
        })
        .collect()
}

/// Exhaustive stump search: every feature, every midpoint between distinct
/// values, first minimum in (feature, threshold) order.
fn oracle_stump(rows: &[(Vec<f64>, Label)], min_leaf: usize) -> Option<(usize, f64)> {
    let gini = |ys: &[bool]| {
        let n = ys.len() as f64;
        let p = ys.iter().filter(|&&y| y).count() as f64;
        if n == 0.0 {
            0.0
        } else {
            2.0 * p * (n - p) / n
        }
    };
    let all: Vec<bool> = rows.iter().map(|r| r.1 == Label::Entangled).collect();
    let parent = gini(&all);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..rows[0].0.len() {
        let mut vals: Vec<f64> = rows.iter().map(|r| r.0[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let (l, r): (Vec<_>, Vec<_>) = rows.iter().partition(|row| row.0[f] <= t);
            if l.len() < min_leaf || r.len() < min_leaf {
                continue;
            }
            let lab = |v: &Vec<&(Vec<f64>, Label)>| {
                v.iter()
                    .map(|x| x.1 == Label::Entangled)
                    .collect::<Vec<_>>()
            };
            let imp = gini(&lab(&l)) + gini(&lab(&r));
            if best.is_none_or(|b| imp < b.2) {
                best = Some((f, t, imp));
            }
        }
    }
    best.filter(|b| b.2 < parent - 1e-12).map(|b| (b.0, b.1))
}

#[test]
fn stumps_match_exhaustive_search() {
    for seed in 0..40 {
        let rows = random_rows(60, 3, seed);
        let min_leaf = 1 + (seed as usize % 4);
        let params = TreeParams {
            max_depth: 1,
            min_leaf,
            ..Default::default()
        };
        let tree = train_tree(&matrix(&rows), &params).unwrap();
        match (oracle_stump(&rows, min_leaf), &tree.root) {
            (None, Node::Leaf { .. }) => {}
            (
                Some((f, t)),
                Node::Split {
                    feature, threshold, ..
                },
            ) => {
                assert_eq!((f, t), (*feature, *threshold), "seed {seed}");
            }
            (want, got) => panic!("seed {seed}: oracle {want:?}, tree {got:?}"),
        }
    }
}

#[test]
fn single_class_gives_one_leaf() {
    let rows: Vec<_> = (0..20)
        .map(|i| (vec![i as f64, 1.0], Label::Separable))
        .collect();
    let tree = train_tree(&matrix(&rows), &TreeParams::default()).unwrap();
    assert_eq!(
        tree.root,
        Node::Leaf {
            leaf: Label::Separable
        }
    );
    assert_eq!((tree.depth(), tree.leaves()), (0, 1));
}

#[test]
fn one_dimensional_threshold_is_the_midpoint() {
    let rows: Vec<_> = (0..10)
        .map(|i| {
            let y = if i < 4 {
                Label::Separable
            } else {
                Label::Entangled
            };
            (vec![i as f64], y)
        })
        .collect();
    let params = TreeParams {
        min_leaf: 1,
        ..Default::default()
    };
    let tree = train_tree(&matrix(&rows), &params).unwrap();
    match &tree.root {
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            assert_eq!((*feature, *threshold), (0, 3.5));
            assert_eq!(
                **left,
                Node::Leaf {
                    leaf: Label::Separable
                }
            );
            assert_eq!(
                **right,
                Node::Leaf {
                    leaf: Label::Entangled
                }
            );
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(tree.predict(&[3.5]).unwrap(), Label::Separable);
    assert_eq!(tree.predict(&[3.5000001]).unwrap(), Label::Entangled);
    assert!(tree.predict(&[1.0, 2.0]).is_err());
}

#[test]
fn tied_leaves_are_entangled() {
    let rows = vec![(vec![0.0], Label::Separable), (vec![0.0], Label::Entangled)];
    let tree = train_tree(&matrix(&rows), &TreeParams::default()).unwrap();
    assert_eq!(
        tree.root,
        Node::Leaf {
            leaf: Label::Entangled
        }
    );
}

#[test]
fn depth_and_leaf_size_limits_hold() {
    let rows = random_rows(400, 4, 99);
    let params = TreeParams {
        max_depth: 3,
        min_leaf: 10,
        ..Default::default()
    };
    let data = matrix(&rows);
    let tree = train_tree(&data, &params).unwrap();
    assert!(tree.depth() <= 3);
    fn check(node: &Node, rows: Vec<&(Vec<f64>, Label)>, min_leaf: usize) {
        assert!(rows.len() >= min_leaf);
        if let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = node
        {
            let (l, r) = rows.into_iter().partition(|x| x.0[*feature] <= *threshold);
            check(left, l, min_leaf);
            check(right, r, min_leaf);
        }
    }
    check(&tree.root, rows.iter().collect(), 10);
}

#[test]
fn deep_tree_fits_separable_data() {
    let rows: Vec<_> = random_rows(300, 2, 5)
        .into_iter()
        .map(|(x, _)| {
            let y = if x[0] * 7.0 + x[1] > 20.0 {
                Label::Entangled
            } else {
                Label::Separable
            };
            (x, y)
        })
        .collect();
    let params = TreeParams {
        min_leaf: 1,
        ..Default::default()
    };
    let tree = train_tree(&matrix(&rows), &params).unwrap();
    for (x, y) in &rows {
        assert_eq!(tree.predict(x).unwrap(), *y);
    }
}

#[test]
fn tree_json_roundtrip() {
    let tree = train_tree(&matrix(&random_rows(100, 3, 6)), &TreeParams::default()).unwrap();
    let s = serde_json::to_string(&tree).unwrap();
    assert!(s.contains("\"leaf\""));
    let back: DecisionTree = serde_json::from_str(&s).unwrap();
    assert_eq!(back, tree);
    let bad = DecisionTree {
        input_dim: 0,
        root: tree.root.clone(),
    };
    if tree.depth() > 0 {
        assert!(bad.validate().is_err());
    }
}

#[test]
fn committee_of_one_is_a_bootstrap_tree() {
    let data = matrix(&random_rows(200, 3, 7));
    let params = TreeParams::default();
    let mut rng = rng_from_seed(8);
    let committee = train_bagging(&data, 1, &params, &mut rng).unwrap();
    assert_eq!(committee.size(), 1);
    // Re-derive the bootstrap sample from the same streams.
    let base: u64 = rng_from_seed(8).random();
    let mut trng = crate::sampling::stream_rng(base, 0);
    let sample: Vec<usize> = (0..200).map(|_| trng.random_range(0..200)).collect();
    let tree = train_tree_on(&data, &sample, &params).unwrap();
    assert_eq!(committee.trees[0], tree);
    for i in 0..data.len() {
        assert_eq!(
            predict_committee(&committee, data.row(i)).unwrap(),
            tree.predict(data.row(i)).unwrap()
        );
    }
}

#[test]
fn bagging_is_seeded() {
    let data = matrix(&random_rows(150, 3, 9));
    let a = train_bagging(&data, 7, &TreeParams::default(), &mut rng_from_seed(1)).unwrap();
    let b = train_bagging(&data, 7, &TreeParams::default(), &mut rng_from_seed(1)).unwrap();
    assert_eq!(a, b);
    let c = train_bagging(&data, 7, &TreeParams::default(), &mut rng_from_seed(2)).unwrap();
    assert_ne!(a, c);
    assert!(train_bagging(&data, 0, &TreeParams::default(), &mut rng_from_seed(1)).is_err());
}

#[test]
fn split_votes_go_to_entangled() {
    let leaf = |l| DecisionTree {
        input_dim: 1,
        root: Node::Leaf { leaf: l },
    };
    let committee = BaggedCommittee {
        trees: vec![leaf(Label::Separable), leaf(Label::Entangled)],
        input_dim: 1,
        tie_break: Label::Entangled,
    };
    assert_eq!(
        predict_committee(&committee, &[0.0]).unwrap(),
        Label::Entangled
    );
    let majority = BaggedCommittee {
        trees: vec![
            leaf(Label::Separable),
            leaf(Label::Separable),
            leaf(Label::Entangled),
        ],
        ..committee
    };
    assert_eq!(
        predict_committee(&majority, &[0.0]).unwrap(),
        Label::Separable
    );
}

#[test]
fn evaluate_counts_mistakes() {
    let cfg = SamplerConfig::new(Dims::two_qubits(), 3);
    let ds = build_dataset(&cfg, 200, Labeler::Ppt, &mut cfg.rng()).unwrap();
    let sep = ds.separable_fraction();
    let always_entangled = FnClassifier(|_: &Record| Label::Entangled);
    let always_separable = FnClassifier(|_: &Record| Label::Separable);
    assert!((evaluate(&always_entangled, &ds).unwrap() - sep).abs() < 1e-15);
    assert!((evaluate(&always_separable, &ds).unwrap() - (1.0 - sep)).abs() < 1e-15);
    assert!(evaluate(&always_entangled, &LabeledDataset::empty(ds.dims)).is_err());
}

#[test]
fn bcha_uses_alpha_as_an_extra_feature() {
    let dims = Dims::two_qubits();
    let hull = build_hull(dims, 300, &mut rng_from_seed(4)).unwrap();
    let cfg = SamplerConfig::new(dims, 5);
    let ds = build_dataset(&cfg, 300, Labeler::Ppt, &mut cfg.rng()).unwrap();
    let model = train_bcha(&hull, &ds, 5, &TreeParams::default(), &mut rng_from_seed(6)).unwrap();
    assert_eq!(model.committee.input_dim, 16);
    let extended = crate::cha::extend_dataset(&hull, &ds).unwrap();
    // Stored alpha and recomputed alpha give the same answers.
    for (raw, ext) in ds.records.iter().zip(&extended.records).take(50) {
        assert_eq!(model.classify(raw).unwrap(), model.classify(ext).unwrap());
    }
    let rho = crate::qstate::singlet();
    let direct = predict_bcha(&model, &rho).unwrap();
    let rec = Record::unlabeled(crate::qstate::featurize(&rho));
    assert_eq!(direct, model.classify(&rec).unwrap());

    // The hull rule itself is a classifier too.
    let cha_err = evaluate(&ChaClassifier { hull: &hull }, &ds).unwrap();
    assert!(cha_err > 0.0 && cha_err < 0.5);
    assert!(BchaModel::new(
        model.committee.clone(),
        build_hull(Dims::two_qutrits(), 3, &mut rng_from_seed(0)).unwrap()
    )
    .is_err());
}

#[test]
fn feature_matrix_requires_labels_and_alpha() {
    let cfg = SamplerConfig::new(Dims::two_qubits(), 7);
    let ds = build_dataset(&cfg, 5, Labeler::Ppt, &mut cfg.rng()).unwrap();
    assert!(matches!(
        FeatureMatrix::from_dataset(&ds, true),
        Err(Error::MissingAlpha(0))
    ));
    let fm = FeatureMatrix::from_dataset(&ds, false).unwrap();
    assert_eq!((fm.dim(), fm.len()), (15, 5));
    let mut unl = ds.clone();
    unl.records.iter_mut().for_each(|r| r.label = None);
    assert!(matches!(
        FeatureMatrix::from_dataset(&unl, false),
        Err(Error::MissingLabel(0))
    ));
}
