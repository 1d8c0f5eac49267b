//! Deformed generalized Heisenberg algebras: `ε_0 = 0`, `ε_n = f(ε_{n-1})`
//! for a strictly increasing `f`, and the triple `(h, a, b)` with
//! `h b = b f(h)`, `a h = f(h) a`, `[a, b] = f(h) - h`.
//!
//! In dressed coordinates `b e_n = √ε_{n+1} e_{n+1}`, `a e_n = √ε_n e_{n-1}`
//! and `h = diag(ε_n)`, so `f(h)` is exact spectral calculus on the diagonal.

pub mod expr;

pub use expr::{parse_f, BinOp, Expr, Func, ParseError};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::DghaError;
use crate::ladder::LadderTriple;
use crate::scalar::{re, C64};
use crate::space::{commutator, inner, op_compare, Basis, Comparison, DressedSpace, Operator};

/// Sample count of the monotonicity certificate.
pub const MONOTONE_SAMPLES: usize = 256;

/// Sampled evidence that `f` increases on `[lo, hi]`. Not a proof.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityCertificate {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub min_slope: f64,
    pub min_slope_at: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DghaModel {
    #[serde(skip)]
    pub f: Expr,
    pub f_text: String,
    /// `ε_0 .. ε_{dim-1}`
    pub eps: Vec<f64>,
    /// `ε_dim`, the first value beyond the truncation.
    pub eps_next: f64,
    pub dim: usize,
    pub certificate: MonotonicityCertificate,
    /// Requested dimension when overflow forced a shorter model.
    pub truncated_from: Option<usize>,
}

impl DghaModel {
    /// `ε_0 ..= ε_dim`.
    pub fn eps_extended(&self) -> Vec<f64> {
        let mut v = self.eps.clone();
        v.push(self.eps_next);
        v
    }

    /// `f(ε_n) - ε_n` over the model.
    pub fn gaps(&self) -> Vec<f64> {
        let ext = self.eps_extended();
        ext.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn eps_csv(&self) -> String {
        let mut out = String::from("n,epsilon\n");
        for (n, e) in self.eps_extended().iter().enumerate() {
            out.push_str(&format!("{n},{e}\n"));
        }
        out
    }
}

/// Iterates `ε_n = f(ε_{n-1})` and certifies strict increase.
///
/// If `ε` overflows before `dim + 1` terms the model is cut to the longest
/// usable dimension and `truncated_from` records the request.
pub fn build_model(f: &Expr, dim: usize) -> Result<DghaModel, DghaError> {
    if dim < 4 {
        return Err(DghaError::DimTooSmall(dim));
    }
    let mut ext = vec![0.0f64];
    while ext.len() <= dim {
        let prev = *ext.last().expect("nonempty");
        let next = f.eval(prev);
        if next.is_nan() || next == f64::NEG_INFINITY {
            return Err(DghaError::Undefined { index: ext.len() - 1, x: prev });
        }
        if !next.is_finite() {
            break;
        }
        if !(next > prev) {
            return Err(DghaError::NotIncreasing { index: ext.len(), prev, next });
        }
        ext.push(next);
    }
    let usable = ext.len() - 1;
    let truncated_from = (usable < dim).then_some(dim);
    if usable < 4 {
        return Err(DghaError::Truncated(ext.len()));
    }

    let hi = ext[usable];
    let certificate = sample_slope(f, 0.0, hi)?;
    Ok(DghaModel {
        f: f.clone(),
        f_text: f.to_string(),
        eps: ext[..usable].to_vec(),
        eps_next: hi,
        dim: usable,
        certificate,
        truncated_from,
    })
}

fn sample_slope(f: &Expr, lo: f64, hi: f64) -> Result<MonotonicityCertificate, DghaError> {
    let n = MONOTONE_SAMPLES;
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    let (mut min_slope, mut min_slope_at) = (f64::INFINITY, lo);
    for i in 0..n - 1 {
        // Overflow to +inf past the last usable iterate is not a decrease.
        if ys[i + 1] == f64::INFINITY {
            break;
        }
        let slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        if !(slope > 0.0) {
            return Err(DghaError::NotMonotone { x: xs[i], slope });
        }
        if slope < min_slope {
            min_slope = slope;
            min_slope_at = xs[i];
        }
    }
    Ok(MonotonicityCertificate { lo, hi, points: n, min_slope, min_slope_at })
}

/// `V diag(f(ε_n)) V^{-1}` for the dressed diagonal `h = V diag(ε_n) V^{-1}`.
pub fn eval_f_on_operator(f: &Expr, h: &Operator, eps: &[f64]) -> Result<Operator, DghaError> {
    let space = h.space();
    if eps.len() != space.dim() {
        return Err(DghaError::DimMismatch { model: eps.len(), space: space.dim() });
    }
    let expected = diag_coords(eps);
    let coords = h.coords();
    let dev = (&coords - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = eps.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    if dev > 1e-10 * space.cond_bound() * scale {
        return Err(DghaError::NotSpectral(dev));
    }
    let mut values = Vec::with_capacity(eps.len());
    for (index, &x) in eps.iter().enumerate() {
        let y = f.eval(x);
        if !y.is_finite() {
            return Err(DghaError::Undefined { index, x });
        }
        values.push(y);
    }
    Ok(Operator::from_coords(space, &diag_coords(&values))?)
}

fn diag_coords(values: &[f64]) -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&v| re(v))))
}

#[derive(Debug, Clone, Serialize)]
pub struct DghaReport {
    /// `h b = b f(h)`
    pub hb: Comparison,
    /// `a h = f(h) a`
    pub ah: Comparison,
    /// `[a, b] = f(h) - h`
    pub ab: Comparison,
    /// `(f(h))† = f(h†)`, on the dual basis
    pub f_adjoint: Comparison,
    /// `h xi_n = ε_n xi_n`, `b a xi_n = ε_n xi_n`, `a b xi_n = ε_{n+1} xi_n`
    pub h_eigen: f64,
    pub ba_eigen: f64,
    pub ab_eigen: f64,
    /// `max |<xi_n, eta_m> - δ_nm|`
    pub biorth: f64,
    /// `‖a xi_0‖` and `‖b† eta_0‖`
    pub a_xi0: f64,
    pub bdag_eta0: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct DghaTriple {
    pub model: DghaModel,
    pub h: Operator,
    pub a: Operator,
    pub b: Operator,
    pub f_h: Operator,
    pub report: DghaReport,
}

impl DghaTriple {
    /// `(h, a, b)` with `λ = 1`.
    pub fn ladder_triple(&self) -> LadderTriple {
        LadderTriple::new(self.h.clone(), self.a.clone(), self.b.clone(), re(1.0)).expect("built on one space")
    }
}

pub fn build_dgha_triple(model: &DghaModel, space: &Arc<DressedSpace>, tol: f64) -> Result<DghaTriple, DghaError> {
    let dim = space.dim();
    if model.dim != dim {
        return Err(DghaError::DimMismatch { model: model.dim, space: dim });
    }
    let ext = model.eps_extended();
    let b_c = DMatrix::from_fn(dim, dim, |i, j| if i == j + 1 { re(ext[i].sqrt()) } else { re(0.0) });
    let a_c = DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { re(ext[j].sqrt()) } else { re(0.0) });
    let h = Operator::from_coords(space, &diag_coords(&model.eps))?;
    let a = Operator::from_coords(space, &a_c)?;
    let b = Operator::from_coords(space, &b_c)?;
    let f_h = eval_f_on_operator(&model.f, &h, &model.eps)?;
    let window = space.window();
    let cmp = |l: &Operator, r: &Operator, terms: &[&Operator], basis: Basis| {
        let hint = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        op_compare(l, r, basis, window, tol, hint).expect("one space")
    };

    let hb_ = &h * &b;
    let bf = &b * &f_h;
    let hb = cmp(&hb_, &bf, &[], Basis::Phi);
    let ah_ = &a * &h;
    let fa = &f_h * &a;
    let ah = cmp(&ah_, &fa, &[], Basis::Phi);
    let ab_op = &a * &b;
    let ba_op = &b * &a;
    let ab = cmp(&commutator(&a, &b)?, &(&f_h - &h), &[&ab_op, &ba_op], Basis::Phi);

    let f_h_dag = eval_f_adjoint(&model.f, space, &model.eps)?;
    let f_adjoint = cmp(&f_h.adjoint(), &f_h_dag, &[], Basis::Psi);

    let rel = |op: &Operator, v: &DVector<C64>, e: f64| (op.apply(v) - v * re(e)).norm() / (op.norm().max(1.0) * v.norm());
    let (mut h_eigen, mut ba_eigen, mut ab_eigen) = (0.0f64, 0.0f64, 0.0f64);
    for n in 0..window {
        let xi = space.phi_basis(n);
        h_eigen = h_eigen.max(rel(&h, &xi, ext[n]));
        ba_eigen = ba_eigen.max(rel(&ba_op, &xi, ext[n]));
        ab_eigen = ab_eigen.max(rel(&ab_op, &xi, ext[n + 1]));
    }
    let mut biorth = 0.0f64;
    for n in 0..dim {
        let xi = space.phi_basis(n);
        for m in 0..dim {
            let delta = if n == m { 1.0 } else { 0.0 };
            biorth = biorth.max((inner(&xi, &space.psi_basis(m)) - delta).norm());
        }
    }
    let a_xi0 = a.apply(&space.phi_basis(0)).norm();
    let bdag_eta0 = b.adjoint().apply(&space.psi_basis(0)).norm();

    let eff = tol * space.cond_bound();
    let scalar_ok = [h_eigen, ba_eigen, ab_eigen, a_xi0 / a.norm().max(1.0), bdag_eta0 / b.norm().max(1.0)]
        .iter()
        .all(|&r| r <= eff);
    let passed = hb.holds && ah.holds && ab.holds && f_adjoint.holds && scalar_ok && biorth <= 1e-9 * space.cond_bound();
    Ok(DghaTriple {
        model: model.clone(),
        h,
        a,
        b,
        f_h,
        report: DghaReport { hb, ah, ab, f_adjoint, h_eigen, ba_eigen, ab_eigen, biorth, a_xi0, bdag_eta0, tol: eff, passed },
    })
}

/// `f(h†) = V^{-†} diag(f(ε_n)) V^†`, from the real spectrum of `h`.
fn eval_f_adjoint(f: &Expr, space: &Arc<DressedSpace>, eps: &[f64]) -> Result<Operator, DghaError> {
    let values: Vec<f64> = eps.iter().map(|&x| f.eval(x)).collect();
    let d = diag_coords(&values);
    let mat = space.dressing_inv_adj() * d * space.dressing().adjoint();
    Ok(Operator::from_ambient(space, mat)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{make_space, DressingSpec};

    /// Independent iteration of the recursion.
    fn eps_oracle(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
        let mut out = vec![0.0];
        for _ in 1..n {
            let last = *out.last().unwrap();
            out.push(f(last));
        }
        out
    }

    #[test]
    fn doubling_plus_one() {
        let m = build_model(&parse_f("2*x + 1").unwrap(), 5).unwrap();
        assert_eq!(m.eps, vec![0.0, 1.0, 3.0, 7.0, 15.0]);
        assert_eq!(m.eps_next, 31.0);
        assert!(m.certificate.min_slope > 1.99);
    }

    #[test]
    fn constant_shift() {
        let m = build_model(&parse_f("x + 3").unwrap(), 5).unwrap();
        assert_eq!(m.eps, vec![0.0, 3.0, 6.0, 9.0, 12.0]);
        assert!(m.gaps().iter().all(|&g| g == 3.0));
    }

    #[test]
    fn decreasing_start_is_rejected() {
        let err = build_model(&parse_f("x - 1").unwrap(), 5).unwrap_err();
        assert!(matches!(err, DghaError::NotIncreasing { index: 1, .. }));
    }

    #[test]
    fn non_monotone_between_iterates_is_rejected() {
        // Iterates 0, 1.9, 2.0, 2.1, ... increase, but f drops near x = 0.5.
        let f = parse_f("x + 1 - 0.9 * tanh(50 * (x - 0.5))").unwrap();
        let r = build_model(&f, 6);
        assert!(matches!(r, Err(DghaError::NotMonotone { .. })), "{r:?}");
    }

    #[test]
    fn overflow_truncates() {
        let m = build_model(&parse_f("x^2 + x + 1").unwrap(), 12).unwrap();
        assert_eq!(m.truncated_from, Some(12));
        assert_eq!(m.dim, 11);
        assert!(m.eps_next.is_finite());
    }

    #[test]
    fn undefined_at_origin() {
        let err = build_model(&parse_f("log(x)").unwrap(), 5).unwrap_err();
        assert_eq!(err, DghaError::Undefined { index: 0, x: 0.0 });
    }

    #[test]
    fn tanh_model_matches_oracle() {
        let m = build_model(&parse_f("x + tanh(x) + 1").unwrap(), 16).unwrap();
        let oracle = eps_oracle(|x| x + x.tanh() + 1.0, 17);
        assert_eq!(m.eps_extended(), oracle);
    }

    #[test]
    fn f_of_identity_is_h() {
        let space = make_space(6, DressingSpec::RandomSeeded { seed: 3, target_cond: 20.0 }).unwrap();
        let m = build_model(&parse_f("x + 3").unwrap(), 6).unwrap();
        let t = build_dgha_triple(&m, &space, 1e-10).unwrap();
        let id = eval_f_on_operator(&Expr::X, &t.h, &m.eps).unwrap();
        assert!((id.mat() - t.h.mat()).iter().all(|z| z.norm() < 1e-10));
        let shifted = &t.h + &(&Operator::identity(&space) * re(3.0));
        assert!((t.f_h.mat() - shifted.mat()).iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn f_undefined_on_spectrum_names_index() {
        let space = make_space(5, DressingSpec::Identity).unwrap();
        let m = build_model(&parse_f("x + 1").unwrap(), 5).unwrap();
        let t = build_dgha_triple(&m, &space, 1e-10).unwrap();
        let err = eval_f_on_operator(&parse_f("log(x)").unwrap(), &t.h, &m.eps).unwrap_err();
        assert_eq!(err, DghaError::Undefined { index: 0, x: 0.0 });
    }

    #[test]
    fn relations_hold_for_doubling() {
        let space = make_space(10, DressingSpec::Identity).unwrap();
        let m = build_model(&parse_f("2*x+1").unwrap(), 10).unwrap();
        let t = build_dgha_triple(&m, &space, 1e-10).unwrap();
        assert!(t.report.passed, "{:?}", t.report);
        // [a,b] = diag(ε_{n+1} - ε_n) = diag(2^n)
        let c = commutator(&t.a, &t.b).unwrap();
        for n in 0..space.window() {
            assert!((c.mat()[(n, n)] - 2f64.powi(n as i32)).norm() <= 1e-12 * 2f64.powi(n as i32));
        }
    }
}
