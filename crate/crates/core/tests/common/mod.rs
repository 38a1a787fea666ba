//! Independent reference computations shared by the integration tests.
//! The oracles here do not call into the library's numerics.

#![allow(dead_code)]

pub mod props;

/// Exponential weights written out directly from cumulative losses.
pub fn hedge_weights(eta: f64, cum1: f64, cum2: f64) -> [f64; 2] {
    let a = -eta * cum1;
    let b = -eta * cum2;
    let m = a.max(b);
    let (ea, eb) = ((a - m).exp(), (b - m).exp());
    [ea / (ea + eb), eb / (ea + eb)]
}

/// Tries every switch point and keeps the first minimum.
pub fn exhaustive_switch(l1: &[f64], l2: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for s in 0..=l1.len() {
        let total: f64 = l1[..s].iter().sum::<f64>() + l2[s..].iter().sum::<f64>();
        if total < best.1 {
            best = (s, total);
        }
    }
    best
}

/// Solves `a x = b` for several right-hand sides by Gaussian elimination
/// with partial pivoting. `a` is `n x n`, `b` is `n x m`, both row-major.
#[allow(clippy::needless_range_loop)]
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            for k in 0..b[row].len() {
                b[row][k] -= f * b[col][k];
            }
        }
    }
    let m = b[0].len();
    let mut x = vec![vec![0.0; m]; n];
    for row in (0..n).rev() {
        for k in 0..m {
            let tail: f64 = (row + 1..n).map(|j| a[row][j] * x[j][k]).sum();
            x[row][k] = (b[row][k] - tail) / a[row][row];
        }
    }
    x
}

/// Ridge least squares from the normal equations:
/// `(sum x_new x_new^T + ridge I) M = sum x_new x_old^T`, returned `d2 x d1`.
pub fn normal_equations_map(news: &[Vec<f64>], olds: &[Vec<f64>], ridge: f64) -> Vec<Vec<f64>> {
    let d2 = news[0].len();
    let d1 = olds[0].len();
    let mut gram = vec![vec![0.0; d2]; d2];
    let mut cross = vec![vec![0.0; d1]; d2];
    for (xn, xo) in news.iter().zip(olds) {
        for i in 0..d2 {
            for j in 0..d2 {
                gram[i][j] += xn[i] * xn[j];
            }
            for j in 0..d1 {
                cross[i][j] += xn[i] * xo[j];
            }
        }
    }
    for (i, row) in gram.iter_mut().enumerate() {
        row[i] += ridge;
    }
    gauss_solve(gram, cross)
}

/// Logistic loss in bits, evaluated naively (fine for moderate margins).
pub fn logistic_bits(prediction: f64, label: f64) -> f64 {
    (1.0 + (-label * prediction).exp()).ln() / std::f64::consts::LN_2
}
