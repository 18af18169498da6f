//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff used for ranks and null spaces.
pub const RANK_TOL: f64 = 1e-10;

fn padded_svd(m: &DMatrix<f64>) -> (nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>, usize) {
    let (r, n) = m.shape();
    let rows = r.max(n);
    let mut p = DMatrix::zeros(rows, n);
    p.rows_mut(0, r).copy_from(m);
    (p.svd(true, true), rows)
}

fn cutoff(sv: &DVector<f64>, tol: f64) -> f64 {
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    tol * smax.max(1.0)
}

/// Orthonormal basis (as columns) of `{x : m x = 0}`.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 || n == 0 {
        return DMatrix::identity(n, n);
    }
    let (svd, _) = padded_svd(m);
    let cut = cutoff(&svd.singular_values, tol);
    let vt = svd.v_t.expect("v_t requested");
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| svd.singular_values[i] <= cut)
        .map(|i| vt.row(i).transpose())
        .collect();
    columns(n, &cols)
}

/// Orthonormal basis of the span of the columns of `m`.
pub fn column_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (n, k) = m.shape();
    if k == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    let t = m.transpose();
    let (svd, _) = padded_svd(&t);
    let cut = cutoff(&svd.singular_values, tol);
    let vt = svd.v_t.expect("v_t requested");
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| svd.singular_values[i] > cut)
        .map(|i| vt.row(i).transpose())
        .collect();
    columns(n, &cols)
}

pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let cut = cutoff(&sv, tol);
    sv.iter().filter(|&&s| s > cut).count()
}

pub fn columns(n: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

pub fn rows(n: usize, rows: &[DVector<f64>]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        out.set_row(i, &r.transpose());
    }
    out
}

pub fn vstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

pub fn select_rows(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(idx.len(), m.ncols());
    for (k, &i) in idx.iter().enumerate() {
        out.set_row(k, &m.row(i));
    }
    out
}

/// Moore-Penrose pseudo-inverse with a relative cutoff.
pub fn pinv(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let cut = cutoff(&svd.singular_values, tol);
    svd.pseudo_inverse(cut).expect("svd computed with u and v")
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `0 * inf = 0` inner product, used where one side may carry infinite entries.
pub fn dot_extended(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if *x == 0.0 { 0.0 } else { x * y })
        .sum()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
