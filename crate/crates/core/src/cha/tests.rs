use super::*;
use crate::linalg::{CVector, ONE, ZERO};
use crate::qstate::DensityMatrix;
use crate::sampling::{rng_from_seed, SamplerConfig};

fn ket(n: usize, i: usize) -> CVector {
    let mut v = CVector::from_element(n, ZERO);
    v[i] = ONE;
    v
}

fn product(i: usize, j: usize) -> ProductState {
    ProductState {
        dims: Dims::two_qubits(),
        a: ket(2, i),
        b: ket(2, j),
    }
}

fn random_states(dims: Dims, count: usize, seed: u64) -> Vec<DensityMatrix> {
    let cfg = SamplerConfig::new(dims, seed);
    let mut rng = cfg.rng();
    (0..count)
        .map(|_| sampling::random_density(&cfg, &mut rng).unwrap())
        .collect()
}

/// Largest `t` with `t rho + (1 - t) I / n` PPT, by bisection.
fn ppt_critical_point(rho: &DensityMatrix) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if qstate::is_ppt(&qstate::depolarize(rho, mid).unwrap()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn hull_shape_is_checked() {
    let dims = Dims::two_qubits();
    assert!(ConvexHull::new(dims, vec![], true).is_err());
    assert!(ConvexHull::new(dims, vec![0.0; 16], true).is_err());
    assert!(build_hull(dims, 0, &mut rng_from_seed(0)).is_err());
    let h = build_hull(dims, 7, &mut rng_from_seed(0)).unwrap();
    assert_eq!((h.len(), h.row(6).len()), (7, 15));
    assert!(h.include_origin());
    h.verify_product_rows(1e-10).unwrap();
    assert!(h.truncated(0).is_err() && h.truncated(8).is_err());
    assert_eq!(h.truncated(3).unwrap().row(2), h.row(2));
}

#[test]
fn non_product_rows_are_detected() {
    let dims = Dims::two_qubits();
    let bell = qstate::featurize(&qstate::singlet());
    let hull = ConvexHull::new(dims, bell.into_coords(), true).unwrap();
    assert!(hull.verify_product_rows(1e-10).is_err());
}

#[test]
fn analytic_hulls() {
    let dims = Dims::two_qubits();
    let f00 = product(0, 0).feature();
    let f11 = product(1, 1).feature();
    let hull = ConvexHull::from_product_states(dims, &[product(0, 0), product(1, 1)]).unwrap();

    // The state itself sits on a vertex.
    assert!((alpha(&hull, &f00).unwrap().alpha - 1.0).abs() < 1e-12);
    // Half way to the origin it can be stretched by two.
    assert!((alpha(&hull, &f00.scaled(0.5)).unwrap().alpha - 2.0).abs() < 1e-12);
    // The classical mixture is the midpoint of the two vertices.
    let mid: Vec<f64> = f00
        .coords()
        .iter()
        .zip(f11.coords())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let r = alpha_coords(&hull, &mid).unwrap();
    assert!((r.alpha - 1.0).abs() < 1e-12);
    assert!(r.origin_weight < 1e-12);
    let mut w = r.weights.clone();
    w.sort_by_key(|x| x.0);
    assert!((w[0].1 - 0.5).abs() < 1e-12 && (w[1].1 - 0.5).abs() < 1e-12);
    // A direction outside the cone of the vertices: only the origin fits.
    let off = product(0, 1).feature();
    let r = alpha(&hull, &off).unwrap();
    assert_eq!(r.alpha, 0.0);
    assert_eq!(r.status, AlphaStatus::Optimal);
}

#[test]
fn origin_is_capped() {
    let hull = build_hull(Dims::two_qubits(), 10, &mut rng_from_seed(1)).unwrap();
    let r = alpha(&hull, &FeatureVector::zeros(Dims::two_qubits())).unwrap();
    assert_eq!(r.alpha, ALPHA_CAP);
    assert_eq!(r.status, AlphaStatus::CappedUnbounded);
    let tiny = vec![1e-13; 15];
    assert_eq!(alpha_coords(&hull, &tiny).unwrap().alpha, ALPHA_CAP);
}

#[test]
fn every_vertex_is_inside() {
    let hull = build_hull(Dims::two_qutrits(), 60, &mut rng_from_seed(2)).unwrap();
    for i in 0..hull.len() {
        let r = alpha_coords(&hull, hull.row(i)).unwrap();
        assert!(r.alpha >= 1.0 - 1e-9, "vertex {i}: {}", r.alpha);
        assert!(r.residual(&hull, hull.row(i)) < 1e-8);
    }
}

#[test]
fn singlet_is_outside_every_product_hull() {
    let hull = build_hull(Dims::two_qubits(), 3000, &mut rng_from_seed(3)).unwrap();
    let s = qstate::singlet();
    let r = alpha(&hull, &qstate::featurize(&s)).unwrap();
    // The depolarized singlet is separable exactly up to weight 1/3.
    assert!(r.alpha <= 1.0 / 3.0 + 1e-9, "{}", r.alpha);
    assert!(
        r.alpha > 0.25,
        "a 3000-point hull should get close: {}",
        r.alpha
    );
    assert_eq!(classify_cha(&hull, &s).unwrap(), Label::Entangled);
}

#[test]
fn alpha_never_exceeds_the_ppt_boundary_on_two_qubits() {
    let dims = Dims::two_qubits();
    let hull = build_hull(dims, 1000, &mut rng_from_seed(4)).unwrap();
    for rho in random_states(dims, 150, 5) {
        let a = alpha(&hull, &qstate::featurize(&rho)).unwrap().alpha;
        if a >= 1.0 {
            assert!(qstate::is_ppt(&rho));
        }
        if a < 1.0 {
            assert!(a <= ppt_critical_point(&rho) + 1e-7);
        }
    }
}

#[test]
fn alpha_scales_inversely() {
    let dims = Dims::two_qubits();
    let hull = build_hull(dims, 500, &mut rng_from_seed(6)).unwrap();
    for rho in random_states(dims, 30, 7) {
        let p = qstate::featurize(&rho);
        let base = alpha(&hull, &p).unwrap().alpha;
        for t in [0.1, 0.5, 3.0] {
            let scaled = alpha(&hull, &p.scaled(t)).unwrap().alpha;
            assert!(
                (scaled - base / t).abs() <= 1e-6 * (1.0 + base / t),
                "t={t}: {scaled} vs {}",
                base / t
            );
        }
    }
}

#[test]
fn alpha_grows_with_the_hull() {
    let dims = Dims::two_qubits();
    let hull = build_hull(dims, 800, &mut rng_from_seed(8)).unwrap();
    let mut rng = rng_from_seed(9);
    let states = random_states(dims, 25, 10);
    for rho in &states {
        let p = qstate::featurize(rho);
        let m1 = rng.random_range(1..800);
        let m2 = rng.random_range(m1..=800);
        let a1 = alpha(&hull.truncated(m1).unwrap(), &p).unwrap().alpha;
        let a2 = alpha(&hull.truncated(m2).unwrap(), &p).unwrap().alpha;
        assert!(a1 <= a2 + 1e-9, "m {m1} -> {m2}: {a1} > {a2}");
    }
}

#[test]
fn weights_reproduce_the_scaled_point() {
    let dims = Dims::two_qutrits();
    let hull = build_hull(dims, 2000, &mut rng_from_seed(11)).unwrap();
    for rho in random_states(dims, 20, 12) {
        let p = qstate::featurize(&rho);
        let r = alpha(&hull, &p).unwrap();
        assert!(r.residual(&hull, p.coords()) <= 1e-8);
        assert!(r.weights.iter().all(|&(_, w)| w >= -1e-12));
        let total: f64 = r.weights.iter().map(|w| w.1).sum::<f64>() + r.origin_weight;
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn tiles_alpha_is_well_below_one() {
    let hull = build_hull(Dims::two_qutrits(), 500, &mut rng_from_seed(13)).unwrap();
    let a = alpha(&hull, &qstate::featurize(&qstate::tiles_state()))
        .unwrap()
        .alpha;
    assert!(a > 0.2 && a < 0.55, "{a}");
}

#[test]
fn hull_without_origin() {
    let dims = Dims::two_qubits();
    let states = [product(0, 0), product(1, 1)];
    let with = ConvexHull::from_product_states(dims, &states).unwrap();
    let without = ConvexHull::new(dims, with.raw_points().to_vec(), false).unwrap();
    let f00 = product(0, 0).feature();
    // The segment [f00, f11] never passes through the origin, so the line
    // through f00 meets it only at f00.
    let r = alpha(&without, &f00).unwrap();
    assert!((r.alpha - 1.0).abs() < 1e-9);
    assert_eq!(r.origin_weight, 0.0);
    let off = product(0, 1).feature();
    assert!(matches!(alpha(&without, &off), Err(Error::Infeasible)));

    // A hull surrounding the origin agrees with its origin-augmented version.
    let big = build_hull(dims, 400, &mut rng_from_seed(14)).unwrap();
    let big_without = ConvexHull::new(dims, big.raw_points().to_vec(), false).unwrap();
    for rho in random_states(dims, 10, 15) {
        let p = qstate::featurize(&rho);
        let a = alpha(&big, &p).unwrap().alpha;
        let b = alpha(&big_without, &p).unwrap().alpha;
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn dimension_mismatches_are_errors() {
    let hull = build_hull(Dims::two_qubits(), 5, &mut rng_from_seed(0)).unwrap();
    let p = FeatureVector::zeros(Dims::two_qutrits());
    assert!(matches!(alpha(&hull, &p), Err(Error::DimensionMismatch(_))));
    assert!(matches!(
        alpha_coords(&hull, &[0.0; 3]),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn batch_matches_single_calls() {
    let dims = Dims::two_qubits();
    let hull = build_hull(dims, 300, &mut rng_from_seed(16)).unwrap();
    let pts: Vec<Vec<f64>> = random_states(dims, 40, 17)
        .iter()
        .map(|r| qstate::featurize(r).into_coords())
        .collect();
    let batch = alpha_batch(&hull, &pts).unwrap();
    for (p, a) in pts.iter().zip(batch) {
        assert_eq!(alpha_coords(&hull, p).unwrap().alpha, a);
    }
}

#[test]
fn critical_point_config_validation() {
    let mut cfg = CriticalPointConfig::default();
    assert!(cfg.validate().is_ok());
    cfg.gamma = 1.0;
    assert!(cfg.validate().is_err());
    let parsed: CriticalPointConfig = serde_json::from_str(r#"{"max_iters": 7}"#).unwrap();
    assert_eq!(parsed.max_iters, 7);
    assert_eq!(parsed.initial_points, 1000);
}

#[test]
fn critical_point_of_the_singlet() {
    let s = qstate::singlet();
    let oracle = ppt_critical_point(&s);
    assert!((oracle - 1.0 / 3.0).abs() < 1e-8);
    let cfg = CriticalPointConfig {
        initial_points: 300,
        ..Default::default()
    };
    let res = critical_point(&s, &cfg, &mut rng_from_seed(18)).unwrap();
    assert!((res.alpha - oracle).abs() < 0.01, "{}", res.alpha);
    assert!(res.alpha <= oracle + 1e-7);
    assert!(res.trace.windows(2).all(|w| w[0] <= w[1]));
    assert_ne!(res.stop, StopReason::Separable);
}

#[test]
fn critical_point_stops_on_separable_states() {
    let dims = Dims::two_qubits();
    let cfg = CriticalPointConfig {
        initial_points: 200,
        ..Default::default()
    };
    let mixed = DensityMatrix::maximally_mixed(dims);
    let res = critical_point(&mixed, &cfg, &mut rng_from_seed(19)).unwrap();
    assert_eq!(res.stop, StopReason::Separable);
    assert_eq!(res.trace.len(), 1);
}

#[test]
fn critical_point_is_seeded() {
    let cfg = CriticalPointConfig {
        initial_points: 100,
        max_iters: 5,
        ..Default::default()
    };
    let s = qstate::singlet();
    let a = critical_point(&s, &cfg, &mut rng_from_seed(20)).unwrap();
    let b = critical_point(&s, &cfg, &mut rng_from_seed(20)).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.hull, b.hull);
}
