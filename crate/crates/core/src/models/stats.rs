//! Small numeric helpers shared by the models and the significance functions.

use nalgebra::{DMatrix, DVector};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n−1 divisor).
pub fn sample_var(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Sample standard deviation (n−1 divisor).
pub fn sample_sd(xs: &[f64]) -> f64 {
    sample_var(xs).sqrt()
}

/// Signed `(x − mean) / s`; all zeros when the spread is zero.
pub fn signed_zscores(xs: &[f64]) -> Vec<f64> {
    let m = mean(xs);
    let s = sample_sd(xs);
    if !(s > 0.0) {
        return vec![0.0; xs.len()];
    }
    xs.iter().map(|x| (x - m) / s).collect()
}

pub fn abs_zscores(xs: &[f64]) -> Vec<f64> {
    signed_zscores(xs).into_iter().map(f64::abs).collect()
}

/// 1-based descending rank; ties keep the input (canonical cell) order.
pub fn descending_rank(xs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[b].total_cmp(&xs[a]).then(a.cmp(&b)));
    let mut rank = vec![0; xs.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    rank
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Kendall's tau-b.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut conc, mut disc, mut tx, mut ty) = (0.0f64, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let dx = (x[i] - x[j]).signum() * f64::from(x[i] != x[j]);
            let dy = (y[i] - y[j]).signum() * f64::from(y[i] != y[j]);
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1.0;
            } else if dy == 0.0 {
                ty += 1.0;
            } else if dx == dy {
                conc += 1.0;
            } else {
                disc += 1.0;
            }
        }
    }
    (conc - disc) / ((conc + disc + tx) * (conc + disc + ty)).sqrt()
}

/// Ordinary least squares with an intercept column prepended. Returns the
/// coefficients `[intercept, b1, ...]`, or the index of the first column that
/// is linearly dependent on the previous ones.
pub fn ols(columns: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>, usize> {
    let n = y.len();
    let p = columns.len() + 1;
    let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { columns[j - 1][i] });
    // Detect rank deficiency column by column.
    for k in 1..=p {
        let sub = x.columns(0, k).into_owned();
        if sub.rank(1e-9 * (n as f64).max(1.0)) < k {
            return Err(k - 1);
        }
    }
    let xt = x.transpose();
    let xtx = &xt * &x;
    let xty = &xt * DVector::from_column_slice(y);
    let beta = xtx.cholesky().ok_or(p - 1)?.solve(&xty);
    Ok(beta.iter().copied().collect())
}
