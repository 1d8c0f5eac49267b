//! Two-mode Fock space with per-mode cutoff `n_cut`, the modes
//! `A1 = a ⊗ 1`, `A2 = 1 ⊗ a`, and the Dirac block Hamiltonian
//! `H_K = (2i v_F / ξ) [[0, A2†], [-A2, 0]]` on `K ⊕ K`.
//!
//! `e_{n1,n2}` sits at flat index `n1 * n_cut + n2`. The exact
//! eigenvectors are `(e_{n1,n2}, ∓i e_{n1,n2-1}) / √2` with energy
//! `±(2 v_F/ξ) √n2` for `1 <= n2 < n_cut`, and `(e_{n1,0}, 0)` at zero.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{GrapheneError, SpaceError};
use crate::ladder::greedy_pairing;
use crate::scalar::{c, re, C64};
use crate::space::{eig, make_space, DressedSpace, DressingSpec, Operator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrapheneParams {
    pub v_f: f64,
    pub xi: f64,
    pub n_cut: usize,
}

impl GrapheneParams {
    pub fn new(v_f: f64, xi: f64, n_cut: usize) -> Result<Self, GrapheneError> {
        if !(v_f > 0.0 && v_f.is_finite() && xi > 0.0 && xi.is_finite()) {
            return Err(GrapheneError::Parameter);
        }
        if n_cut < 2 {
            return Err(GrapheneError::Cutoff(n_cut));
        }
        Ok(GrapheneParams { v_f, xi, n_cut })
    }

    /// `2 v_F / ξ`.
    pub fn scale(&self) -> f64 {
        2.0 * self.v_f / self.xi
    }

    pub fn energy(&self, n2: usize) -> f64 {
        self.scale() * (n2 as f64).sqrt()
    }
}

pub fn flat(n1: usize, n2: usize, n_cut: usize) -> usize {
    n1 * n_cut + n2
}

pub fn unflat(k: usize, n_cut: usize) -> (usize, usize) {
    (k / n_cut, k % n_cut)
}

/// Flat indices with both mode numbers below `n_cut - 1`.
pub fn interior_indices(n_cut: usize) -> Vec<usize> {
    (0..n_cut * n_cut)
        .filter(|&k| {
            let (n1, n2) = unflat(k, n_cut);
            n1 + 1 < n_cut && n2 + 1 < n_cut
        })
        .collect()
}

fn lowering(n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |i, j| if j == i + 1 { re((j as f64).sqrt()) } else { re(0.0) })
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// `(A1, A2)` on the `n_cut²`-dimensional space (identity dressing).
pub fn build_modes(n_cut: usize) -> Result<(Operator, Operator), GrapheneError> {
    if n_cut < 2 {
        return Err(GrapheneError::Cutoff(n_cut));
    }
    let space = make_space(n_cut * n_cut, DressingSpec::Identity)?;
    let a = lowering(n_cut);
    let id = DMatrix::<C64>::identity(n_cut, n_cut);
    Ok((Operator::from_ambient(&space, kron(&a, &id))?, Operator::from_ambient(&space, kron(&id, &a))?))
}

fn block(space: &Arc<DressedSpace>, tl: &DMatrix<C64>, tr: &DMatrix<C64>, bl: &DMatrix<C64>, br: &DMatrix<C64>) -> Result<Operator, SpaceError> {
    let m = tl.nrows();
    let mut out = DMatrix::<C64>::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(tl);
    out.view_mut((0, m), (m, m)).copy_from(tr);
    out.view_mut((m, 0), (m, m)).copy_from(bl);
    out.view_mut((m, m), (m, m)).copy_from(br);
    Operator::from_ambient(space, out)
}

/// `H_K` on dimension `2 n_cut²`.
pub fn build_hk(params: &GrapheneParams) -> Result<Operator, GrapheneError> {
    let (_, a2) = build_modes(params.n_cut)?;
    let m = params.n_cut * params.n_cut;
    let space = make_space(2 * m, DressingSpec::Identity)?;
    let pref = c(0.0, params.scale());
    let zero = DMatrix::<C64>::zeros(m, m);
    let tr = a2.mat().adjoint() * pref;
    let bl = a2.mat() * (-pref);
    Ok(block(&space, &zero, &tr, &bl, &zero)?)
}

/// `H_K' = H_K^T`, same spectrum.
pub fn build_hk_prime(params: &GrapheneParams) -> Result<Operator, GrapheneError> {
    Ok(build_hk(params)?.transpose())
}

/// `A1 ⊕ A1` on `K ⊕ K`.
pub fn doubled_a1(params: &GrapheneParams, space: &Arc<DressedSpace>) -> Result<Operator, GrapheneError> {
    let (a1, _) = build_modes(params.n_cut)?;
    let m = params.n_cut * params.n_cut;
    let zero = DMatrix::<C64>::zeros(m, m);
    Ok(block(space, a1.mat(), &zero, &zero, a1.mat())?)
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenRow {
    pub n1: usize,
    pub n2: usize,
    /// `+1`, `-1`, or `0` for the zero modes.
    pub sign: i8,
    pub energy: f64,
    pub norm: f64,
    /// `‖H_K v - E v‖`
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenTable {
    pub params: GrapheneParams,
    pub rows: Vec<EigenRow>,
    pub hk_norm: f64,
    /// `max |H - H†|`
    pub hermiticity: f64,
    /// `max |<v_i, v_j> - δ_ij|` over all rows
    pub orthogonality: f64,
    pub max_residual: f64,
    /// Eigensolver spectrum, real parts, ascending.
    pub spectrum: Vec<f64>,
    pub max_imag: f64,
    /// `max |λ_k + λ_{N-1-k}|`
    pub symmetry: f64,
    /// Largest distance from an analytic value (`n2 <= n_cut - 2`) to its
    /// paired eigensolver value.
    pub analytic_match: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl EigenTable {
    /// Eigensolver values within `tol` of `e`.
    pub fn multiplicity(&self, e: f64, tol: f64) -> usize {
        self.spectrum.iter().filter(|&&x| (x - e).abs() <= tol).count()
    }
}

fn eigenvector(params: &GrapheneParams, n1: usize, n2: usize, sign: i8) -> DVector<C64> {
    let n = params.n_cut;
    let m = n * n;
    let mut v = DVector::<C64>::zeros(2 * m);
    if sign == 0 {
        v[flat(n1, n2, n)] = re(1.0);
        return v;
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    v[flat(n1, n2, n)] = re(s);
    v[m + flat(n1, n2 - 1, n)] = c(0.0, -(sign as f64) * s);
    v
}

/// Builds every closed-form eigenvector and checks it against `H_K` and the
/// eigensolver.
pub fn eigenstructure(params: &GrapheneParams) -> Result<EigenTable, GrapheneError> {
    let h = build_hk(params)?;
    let n = params.n_cut;
    let mut rows = Vec::new();
    let mut vecs = Vec::new();
    for n1 in 0..n {
        for n2 in 0..n {
            let signs: &[i8] = if n2 == 0 { &[0] } else { &[1, -1] };
            for &sign in signs {
                let v = eigenvector(params, n1, n2, sign);
                let energy = sign as f64 * params.energy(n2);
                let residual = (h.apply(&v) - &v * re(energy)).norm();
                rows.push(EigenRow { n1, n2, sign, energy, norm: v.norm(), residual });
                vecs.push(v);
            }
        }
    }
    let basis = DMatrix::from_columns(&vecs);
    let gram = basis.adjoint() * &basis;
    let orthogonality = gram
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let (i, j) = (k % gram.nrows(), k / gram.nrows());
            (z - if i == j { 1.0 } else { 0.0 }).norm()
        })
        .fold(0.0, f64::max);
    let hermiticity = (h.mat() - h.mat().adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);

    let e = eig(&h)?;
    let max_imag = e.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let mut spectrum: Vec<f64> = e.values.iter().map(|z| z.re).collect();
    spectrum.sort_by(f64::total_cmp);
    let len = spectrum.len();
    let symmetry = (0..len).map(|k| (spectrum[k] + spectrum[len - 1 - k]).abs()).fold(0.0, f64::max);

    let analytic: Vec<C64> = rows.iter().filter(|r| r.n2 + 2 <= n).map(|r| re(r.energy)).collect();
    let candidates: Vec<C64> = spectrum.iter().map(|&x| re(x)).collect();
    let pairing = greedy_pairing(&analytic, &candidates);
    let analytic_match = analytic
        .iter()
        .zip(&pairing)
        .map(|(a, &k)| (a.re - spectrum[k]).abs())
        .fold(0.0, f64::max);

    Ok(EigenTable {
        params: *params,
        max_residual: rows.iter().map(|r| r.residual).fold(0.0, f64::max),
        rows,
        hk_norm: h.norm(),
        hermiticity,
        orthogonality,
        max_imag,
        symmetry,
        analytic_match,
        min_eigenvalue: spectrum[0],
        max_eigenvalue: spectrum[len - 1],
        spectrum,
    })
}

/// Smallest eigenvalue of `H_K - α`, from the eigensolver.
pub fn shifted_min_eigenvalue(params: &GrapheneParams, alpha: f64) -> Result<f64, GrapheneError> {
    let h = build_hk(params)?.shifted(re(alpha));
    Ok(eig(&h)?.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min))
}

/// Cutoff beyond which `H_K - α` must keep a negative eigenvalue:
/// `(α ξ / (2 v_F))² + 1`.
pub fn shift_threshold(params: &GrapheneParams, alpha: f64) -> f64 {
    (alpha / params.scale()).powi(2) + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{commutator, op_compare_on, Basis};

    #[test]
    fn flattening_is_bijective() {
        let n = 5;
        for k in 0..n * n {
            let (a, b) = unflat(k, n);
            assert_eq!(flat(a, b, n), k);
        }
    }

    #[test]
    fn modes_commute_exactly() {
        let (a1, a2) = build_modes(4).unwrap();
        let c12 = commutator(&a1, &a2).unwrap();
        assert!(c12.mat().iter().all(|z| *z == re(0.0)));
        let c12d = commutator(&a1, &a2.adjoint()).unwrap();
        assert!(c12d.mat().iter().all(|z| *z == re(0.0)));
    }

    #[test]
    fn canonical_on_interior() {
        let n = 6;
        let (a1, a2) = build_modes(n).unwrap();
        let id = Operator::identity(a1.space());
        let idx = interior_indices(n);
        for a in [&a1, &a2] {
            let comm = commutator(a, &a.adjoint()).unwrap();
            let r = op_compare_on(&comm, &id, Basis::Ambient, &idx, 1e-12, 0.0).unwrap();
            assert!(r.holds && r.max_abs <= 1e-12);
        }
    }

    #[test]
    fn second_mode_lowers() {
        let (_, a2) = build_modes(3).unwrap();
        let mut e01 = DVector::<C64>::zeros(9);
        e01[flat(0, 1, 3)] = re(1.0);
        let out = a2.apply(&e01);
        let mut e00 = DVector::<C64>::zeros(9);
        e00[0] = re(1.0);
        assert_eq!(out, e00);
    }

    #[test]
    fn hermitian_and_zero_modes() {
        let p = GrapheneParams::new(1.0, 1.0, 5).unwrap();
        let t = eigenstructure(&p).unwrap();
        assert!(t.hermiticity <= 1e-12);
        assert!(t.rows.iter().filter(|r| r.n2 == 0).all(|r| r.residual == 0.0));
        // One zero mode per n1 from the closed form, plus the top-row ones.
        assert!(t.multiplicity(0.0, 1e-9 * t.hk_norm) >= p.n_cut);
    }

    #[test]
    fn independent_of_first_mode() {
        let p = GrapheneParams::new(1.0, 1.0, 4).unwrap();
        let h = build_hk(&p).unwrap();
        let d = doubled_a1(&p, h.space()).unwrap();
        assert!(commutator(&h, &d).unwrap().mat().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn energy_example() {
        let p = GrapheneParams::new(1.0, 1.0, 4).unwrap();
        assert!((p.energy(2) - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!((p.energy(2) - 2.828427).abs() < 1e-6);
    }

    #[test]
    fn transpose_block_shares_spectrum() {
        let p = GrapheneParams::new(1.0, 2.0, 3).unwrap();
        let a: Vec<f64> = eig(&build_hk(&p).unwrap()).unwrap().values.iter().map(|z| z.re).collect();
        let b: Vec<f64> = eig(&build_hk_prime(&p).unwrap()).unwrap().values.iter().map(|z| z.re).collect();
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn bad_params() {
        assert_eq!(GrapheneParams::new(0.0, 1.0, 4), Err(GrapheneError::Parameter));
        assert_eq!(GrapheneParams::new(1.0, 1.0, 1), Err(GrapheneError::Cutoff(1)));
    }
}
