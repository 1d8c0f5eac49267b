use nalgebra::{DMatrix, DVector};
use nalgebra::linalg::{Schur, SymmetricEigen};

use super::Operator;
use crate::error::EigError;
use crate::scalar::C64;

/// Per-eigenpair residual bound relative to `‖A‖_F`.
pub const EIG_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Eigen {
    /// Sorted by real part, then imaginary part.
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors, column `k` for `values[k]`.
    pub vectors: DMatrix<C64>,
    /// Largest `‖A v - λ v‖ / ‖A‖_F`.
    pub max_residual: f64,
}

pub fn eig(a: &Operator) -> Result<Eigen, EigError> {
    eig_matrix(a.mat())
}

/// Exactly Hermitian input goes to the Hermitian solver (Schur iteration can
/// stall on large degenerate clusters); everything else uses the complex
/// Schur form followed by triangular back-substitution.
pub fn eig_matrix(a: &DMatrix<C64>) -> Result<Eigen, EigError> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: DMatrix::zeros(0, 0), max_residual: 0.0 });
    }
    let norm = a.norm();
    if a == &a.adjoint() {
        return hermitian(a, norm);
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 1000 * n).ok_or(EigError::NoConvergence)?;
    let (q, t) = schur.unpack();

    let tnorm = t.norm();
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut x = DVector::<C64>::zeros(n);
        x[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * x[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < smin {
                denom = C64::new(smin, 0.0);
            }
            x[i] = -acc / denom;
            let big = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if big > 1e150 {
                x /= C64::new(big, 0.0);
            }
        }
        let mut v = &q * x;
        let vn = v.norm();
        if !(vn > 0.0) || !vn.is_finite() {
            return Err(EigError::Breakdown(k));
        }
        v /= C64::new(vn, 0.0);
        vectors.set_column(k, &v);
        values.push(lambda);
    }

    finish(a, norm, values, vectors)
}

fn hermitian(a: &DMatrix<C64>, norm: f64) -> Result<Eigen, EigError> {
    let n = a.nrows();
    let se = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 1000 * n).ok_or(EigError::NoConvergence)?;
    let values = se.eigenvalues.iter().map(|&x| C64::new(x, 0.0)).collect();
    finish(a, norm, values, se.eigenvectors)
}

/// Sorts the pairs and enforces the residual bound.
fn finish(a: &DMatrix<C64>, norm: f64, values: Vec<C64>, vectors: DMatrix<C64>) -> Result<Eigen, EigError> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        values[i].re.total_cmp(&values[j].re).then(values[i].im.total_cmp(&values[j].im))
    });
    let sorted_values: Vec<C64> = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);

    let scale = norm.max(f64::MIN_POSITIVE);
    let mut max_residual = 0.0f64;
    for (k, &lambda) in sorted_values.iter().enumerate() {
        let v = sorted_vectors.column(k);
        let r = (a * v - v * lambda).norm() / scale;
        if !(r <= EIG_RESIDUAL) {
            return Err(EigError::Residual { index: k, residual: r });
        }
        max_residual = max_residual.max(r);
    }
    Ok(Eigen { values: sorted_values, vectors: sorted_vectors, max_residual })
}
