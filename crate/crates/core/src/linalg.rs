//! Small dense complex linear-algebra helpers shared by the scattering
//! pipeline (sorted Hermitian eigendecomposition, singular values, log-dets).

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
/// Returns (eigenvalues, eigenvectors as columns).
pub fn hermitian_eigen_sorted(m: &DMatrix<Complex64>) -> Option<(Vec<f64>, DMatrix<Complex64>)> {
    let se = m.clone().try_symmetric_eigen(1e-13, 10_000)?;
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    Some((vals, vecs))
}

/// Singular values sorted descending.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut sv = m.clone().svd(false, false).singular_values.as_slice().to_vec();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

pub fn sigma_min(m: &DMatrix<Complex64>) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// 2-norm condition number estimate via SVD.
pub fn cond2(m: &DMatrix<Complex64>) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// log|det M| via LU, immune to under/overflow of the raw determinant.
pub fn log_abs_det(m: &DMatrix<Complex64>) -> f64 {
    let lu = m.clone().lu();
    let u = lu.u();
    let mut acc = 0.0;
    for i in 0..u.nrows().min(u.ncols()) {
        acc += u[(i, i)].norm().max(1e-300).ln();
    }
    acc
}

/// Frobenius norm of (A^H A − I).
pub fn unitarity_defect(a: &DMatrix<Complex64>) -> f64 {
    let n = a.ncols();
    let g = a.adjoint() * a;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            acc += (g[(i, j)] - want).norm_sqr();
        }
    }
    acc.sqrt()
}
