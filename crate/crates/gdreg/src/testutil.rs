//! Reference implementations used by the test suites as independent
//! oracles. Nothing here is part of the stable API and nothing here is
//! called by the library itself.

/// Solve the least-squares normal equations (XᵀX)w = Xᵀy by Gaussian
/// elimination with partial pivoting. Requires a full-rank design.
pub fn least_squares(xs: &[Vec<f64>], ys: &[f64]) -> Vec<f64> {
    let d = xs[0].len();
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for (x, &y) in xs.iter().zip(ys) {
        for i in 0..d {
            for j in 0..d {
                a[i][j] += x[i] * x[j];
            }
            b[i] += x[i] * y;
        }
    }
    solve(&mut a, &mut b);
    b
}

/// In-place solve of a·w = b; b is overwritten with the solution.
#[allow(clippy::needless_range_loop)]
pub fn solve(a: &mut [Vec<f64>], b: &mut [f64]) {
    let d = b.len();
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        assert!(a[col][col].abs() > 1e-12, "singular system");
        for row in col + 1..d {
            let f = a[row][col] / a[col][col];
            for k in col..d {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..d).rev() {
        b[col] /= a[col][col];
        for row in 0..col {
            b[row] -= a[row][col] * b[col];
            a[row][col] = 0.0;
        }
        a[col][col] = 1.0;
    }
}
