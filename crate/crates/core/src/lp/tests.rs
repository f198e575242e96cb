use super::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn col_major(rows: usize, cols: usize, row_major: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = row_major[r * cols + c];
        }
    }
    out
}

/// Minimum over all basic feasible solutions, by enumerating every basis.
fn brute_force(rows: usize, cols: usize, a: &[f64], b: &[f64], c: &[f64]) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..rows).collect();
    loop {
        let bm = DMatrix::from_fn(rows, rows, |i, k| a[idx[k] * rows + i]);
        if bm.determinant().abs() > 1e-9 {
            if let Some(inv) = bm.try_inverse() {
                let x = inv * DVector::from_column_slice(b);
                if x.iter().all(|&v| v >= -1e-9) {
                    let obj: f64 = idx.iter().zip(x.iter()).map(|(&j, v)| c[j] * v).sum();
                    best = Some(best.map_or(obj, |o: f64| o.min(obj)));
                }
            }
        }
        // next combination
        let mut i = rows;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < cols - rows + i {
                idx[i] += 1;
                for k in i + 1..rows {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

#[test]
fn textbook_problem() {
    // min -3x - 5y  s.t. x + s1 = 4, 2y + s2 = 12, 3x + 2y + s3 = 18
    let rm = [
        1.0, 0.0, 1.0, 0.0, 0.0, //
        0.0, 2.0, 0.0, 1.0, 0.0, //
        3.0, 2.0, 0.0, 0.0, 1.0,
    ];
    let a = col_major(3, 5, &rm);
    let b = [4.0, 12.0, 18.0];
    let c = [-3.0, -5.0, 0.0, 0.0, 0.0];
    let sol = solve(&StandardForm {
        rows: 3,
        cols: 5,
        a: &a,
        b: &b,
        c: &c,
    })
    .unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective + 36.0).abs() < 1e-9);
    let x: Vec<f64> = (0..2)
        .map(|j| sol.x.iter().find(|e| e.0 == j).map_or(0.0, |e| e.1))
        .collect();
    assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
}

#[test]
fn detects_infeasible() {
    // x + y = 1 and x + y = 2
    let a = col_major(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    let sol = solve(&StandardForm {
        rows: 2,
        cols: 2,
        a: &a,
        b: &[1.0, 2.0],
        c: &[1.0, 1.0],
    })
    .unwrap();
    assert_eq!(sol.status, LpStatus::Infeasible);
}

#[test]
fn detects_unbounded() {
    // min -x s.t. x - y = 1
    let a = col_major(1, 2, &[1.0, -1.0]);
    let sol = solve(&StandardForm {
        rows: 1,
        cols: 2,
        a: &a,
        b: &[1.0],
        c: &[-1.0, 0.0],
    })
    .unwrap();
    assert_eq!(sol.status, LpStatus::Unbounded);
}

#[test]
fn negative_rhs_and_redundant_rows() {
    // x + y = -(-2); duplicated row; min x + 2y
    let rm = [1.0, 1.0, 1.0, 1.0];
    let a = col_major(2, 2, &rm);
    let sol = solve(&StandardForm {
        rows: 2,
        cols: 2,
        a: &a,
        b: &[2.0, 2.0],
        c: &[1.0, 2.0],
    })
    .unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective - 2.0).abs() < 1e-9);
    let a2: Vec<f64> = a.iter().map(|v| -v).collect();
    let sol = solve(&StandardForm {
        rows: 2,
        cols: 2,
        a: &a2,
        b: &[-2.0, -2.0],
        c: &[1.0, 2.0],
    })
    .unwrap();
    assert!((sol.objective - 2.0).abs() < 1e-9);
}

#[test]
fn matches_basis_enumeration_on_random_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..300 {
        let rows = rng.random_range(1..=4);
        let cols = rng.random_range(rows..=8);
        let rm: Vec<f64> = (0..rows * cols)
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let a = col_major(rows, cols, &rm);
        // Feasible by construction: b = A x0 with x0 >= 0.
        let x0: Vec<f64> = (0..cols).map(|_| rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..rows)
            .map(|r| (0..cols).map(|j| a[j * rows + r] * x0[j]).sum())
            .collect();
        let c: Vec<f64> = (0..cols).map(|_| rng.random_range(0.0..3.0)).collect();
        let sol = solve(&StandardForm {
            rows,
            cols,
            a: &a,
            b: &b,
            c: &c,
        })
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let want = brute_force(rows, cols, &a, &b, &c).expect("feasible problem has a vertex");
        assert!(
            (sol.objective - want).abs() < 1e-7 * (1.0 + want.abs()),
            "{} vs {want}",
            sol.objective
        );
        for r in 0..rows {
            let lhs: f64 = sol.x.iter().map(|&(j, v)| a[j * rows + r] * v).sum();
            assert!((lhs - b[r]).abs() < 1e-8);
        }
        checked += 1;
    }
    assert_eq!(checked, 300);
}

#[test]
fn rejects_bad_shapes() {
    let r = solve(&StandardForm {
        rows: 2,
        cols: 2,
        a: &[1.0; 3],
        b: &[1.0, 1.0],
        c: &[1.0, 1.0],
    });
    assert!(matches!(r, Err(Error::DimensionMismatch(_))));
}

#[test]
fn pricing_section_size_does_not_change_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let (rows, cols) = (3, 40);
        let rm: Vec<f64> = (0..rows * cols)
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let a = col_major(rows, cols, &rm);
        let x0: Vec<f64> = (0..cols).map(|_| rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..rows)
            .map(|r| (0..cols).map(|j| a[j * rows + r] * x0[j]).sum())
            .collect();
        let c: Vec<f64> = (0..cols).map(|_| rng.random_range(0.0..3.0)).collect();
        let lp = StandardForm {
            rows,
            cols,
            a: &a,
            b: &b,
            c: &c,
        };
        let want = brute_force(rows, cols, &a, &b, &c).unwrap();
        for block in [1, 5, cols] {
            let opts = SimplexOptions {
                price_block: block,
                ..Default::default()
            };
            let sol = solve_with(&lp, opts).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            assert!(
                (sol.objective - want).abs() < 1e-7 * (1.0 + want.abs()),
                "block {block}"
            );
        }
    }
}
