//! Pseudo-quons: `a b - q b a = 1` with `b ≠ a†` and complex `q ≠ -1`.
//!
//! In dressed coordinates `b e_n = e_{n+1} / α_{n+1}` and
//! `a e_n = α_n [n]_q e_{n-1}`. The dual normalization is
//! `β_n = conj(1 / (α_n [n]_q))`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::QuonError;
use crate::ladder::LadderTriple;
use crate::scalar::{c, is_finite, re, C64};
use crate::space::{commutator, inner, op_compare, qmutator, Basis, Comparison, DressedSpace, Operator};

/// `|q^k - 1|` below this for some `k <= dim` marks a root of unity.
pub const ROOT_OF_UNITY_TOL: f64 = 1e-8;

/// `[n]_q = 1 + q + ... + q^{n-1}`, `[0]_q = 0`, by `[k+1] = 1 + q [k]`.
pub fn qnum(n: usize, q: C64) -> C64 {
    (0..n).fold(C64::new(0.0, 0.0), |acc, _| 1.0 + q * acc)
}

/// `[0]_q ..= [n]_q`.
pub fn qnums(n: usize, q: C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(C64::new(0.0, 0.0));
    for k in 0..n {
        out.push(1.0 + q * out[k]);
    }
    out
}

/// `x_1 x_2 ... x_n`, empty product 1. `seq[0]` is never read.
pub fn factorial_from_one(seq: &[C64], n: usize) -> C64 {
    seq[1..=n].iter().product()
}

/// `x_0 x_1 ... x_n`, with `n = -1` giving 1.
pub fn factorial_from_zero(seq: &[C64], n: isize) -> C64 {
    if n < 0 {
        return re(1.0);
    }
    seq[..=n as usize].iter().product()
}

/// Rejects `q` whose low powers return to 1; `q = 1` itself is allowed.
pub fn check_not_root_of_unity(q: C64, dim: usize) -> Result<(), QuonError> {
    if q == re(1.0) {
        return Ok(());
    }
    let mut p = re(1.0);
    for k in 1..=dim {
        p *= q;
        if (p - 1.0).norm() < ROOT_OF_UNITY_TOL {
            return Err(QuonError::RootOfUnity(k));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuonParams {
    #[serde(with = "crate::scalar::serde_c64")]
    pub q: C64,
    /// `alpha[n] = α_n` for `1 <= n < dim`; `alpha[0] = 1` is a placeholder.
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub alpha: Vec<C64>,
    pub dim: usize,
}

impl QuonParams {
    /// `α_n = 1 / sqrt|[n]_q|`, which balances the growth of the families.
    pub fn with_default_alpha(q: C64, dim: usize) -> Result<Self, QuonError> {
        if (q + 1.0).norm() < 1e-12 {
            return Err(QuonError::MinusOne);
        }
        let qn = qnums(dim, q);
        let mut alpha = vec![re(1.0)];
        for (n, v) in qn.iter().enumerate().take(dim).skip(1) {
            if v.norm() == 0.0 {
                return Err(QuonError::ZeroQNumber(n));
            }
            alpha.push(re(1.0 / v.norm().sqrt()));
        }
        Self::new(q, alpha, dim)
    }

    /// `alpha` given as `α_1, ..., α_{dim-1}`.
    pub fn with_alpha(q: C64, alpha_from_one: &[C64], dim: usize) -> Result<Self, QuonError> {
        if alpha_from_one.len() != dim.saturating_sub(1) {
            return Err(QuonError::AlphaLength { expected: dim.saturating_sub(1), found: alpha_from_one.len() });
        }
        let mut alpha = vec![re(1.0)];
        alpha.extend_from_slice(alpha_from_one);
        Self::new(q, alpha, dim)
    }

    fn new(q: C64, alpha: Vec<C64>, dim: usize) -> Result<Self, QuonError> {
        if (q + 1.0).norm() < 1e-12 {
            return Err(QuonError::MinusOne);
        }
        if let Some(n) = (1..dim).find(|&n| !is_finite(alpha[n]) || alpha[n].norm() == 0.0) {
            return Err(QuonError::ZeroAlpha(n));
        }
        if let Some(n) = qnums(dim, q).iter().enumerate().skip(1).find(|(_, v)| v.norm() == 0.0).map(|(n, _)| n) {
            return Err(QuonError::ZeroQNumber(n));
        }
        Ok(QuonParams { q, alpha, dim })
    }

    pub fn qnums(&self) -> Vec<C64> {
        qnums(self.dim, self.q)
    }

    /// `β_n = conj(1/(α_n [n]_q))` for `n >= 1`; `beta[0] = 1` is a placeholder.
    pub fn beta(&self) -> Vec<C64> {
        let qn = self.qnums();
        let mut out = vec![re(1.0)];
        out.extend((1..self.dim).map(|n| (1.0 / (self.alpha[n] * qn[n])).conj()));
        out
    }
}

/// Closed forms the ladder engine should reproduce.
pub fn expected_energy(n: usize, q: C64) -> C64 {
    (q + 1.0) * qnum(n, q)
}

pub fn expected_mu(n: usize, q: C64) -> C64 {
    q.powu(n as u32)
}

pub fn expected_gamma(n: usize, q: C64) -> C64 {
    qnum(n + 1, q).conj()
}

/// `2 [n]_q + q^n`.
pub fn oscillator_energy(n: usize, q: C64) -> C64 {
    2.0 * qnum(n, q) + q.powu(n as u32)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuonChecks {
    /// `[a, b]_q = 1`
    pub qmutator: Comparison,
    /// `N = b a` is `diag([n]_q)` in dressed coordinates
    pub number: Comparison,
    /// `[a, b] = 1 + (q - 1) N`
    pub commutator: Comparison,
    /// `‖a - b†‖_F`
    pub a_minus_bdag: f64,
}

#[derive(Debug, Clone)]
pub struct QuonModel {
    pub params: QuonParams,
    pub a: Operator,
    pub b: Operator,
    /// `N = b a`
    pub number: Operator,
}

pub fn build_quon_pair(params: &QuonParams, space: &Arc<DressedSpace>) -> Result<QuonModel, QuonError> {
    let dim = space.dim();
    if params.dim != dim {
        return Err(QuonError::DimMismatch { params: params.dim, space: dim });
    }
    let qn = params.qnums();
    let alpha = &params.alpha;
    let b_c = DMatrix::from_fn(dim, dim, |i, j| if i == j + 1 { 1.0 / alpha[i] } else { re(0.0) });
    let a_c = DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { alpha[j] * qn[j] } else { re(0.0) });
    let a = Operator::from_coords(space, &a_c)?;
    let b = Operator::from_coords(space, &b_c)?;
    let number = &b * &a;
    Ok(QuonModel { params: params.clone(), a, b, number })
}

impl QuonModel {
    pub fn space(&self) -> &Arc<DressedSpace> {
        self.a.space()
    }

    pub fn q(&self) -> C64 {
        self.params.q
    }

    /// `h = (q + 1) N`.
    pub fn h(&self) -> Operator {
        &self.number * (self.q() + 1.0)
    }

    /// `(h, a, b)` with `λ = q + 1`; rejects roots of unity.
    pub fn ladder_triple(&self) -> Result<LadderTriple, QuonError> {
        check_not_root_of_unity(self.q(), self.params.dim)?;
        Ok(LadderTriple::new(self.h(), self.a.clone(), self.b.clone(), self.q() + 1.0)?)
    }

    pub fn checks(&self, tol: f64) -> QuonChecks {
        let space = self.space();
        let window = space.window();
        let q = self.q();
        let id = Operator::identity(space);
        let ab = &self.a * &self.b;
        let qba = &self.number * q;
        let hint = |ops: &[&Operator]| ops.iter().map(|o| o.norm()).fold(0.0, f64::max);
        let qm = qmutator(&self.a, &self.b, q).expect("one space");
        let qmutator = op_compare(&qm, &id, Basis::Phi, window, tol, hint(&[&ab, &qba])).expect("one space");
        let diag = DMatrix::from_diagonal(&DVector::from_vec(self.params.qnums()[..space.dim()].to_vec()));
        let expected_n = Operator::from_coords(space, &diag).expect("finite");
        let number = op_compare(&self.number, &expected_n, Basis::Phi, window, tol, 0.0).expect("one space");
        let comm = commutator(&self.a, &self.b).expect("one space");
        let rhs = &id + &(&self.number * (q - 1.0));
        let commutator = op_compare(&comm, &rhs, Basis::Phi, window, tol, hint(&[&ab, &self.number])).expect("one space");
        let a_minus_bdag = (self.a.mat() - self.b.adjoint().mat()).norm();
        QuonChecks { qmutator, number, commutator, a_minus_bdag }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscParams {
    #[serde(with = "crate::scalar::serde_c64")]
    pub alpha: C64,
    #[serde(with = "crate::scalar::serde_c64")]
    pub beta: C64,
}

impl OscParams {
    pub fn new(alpha: C64, beta: C64) -> Result<Self, QuonError> {
        if alpha.norm() == 0.0 || beta.norm() == 0.0 || !is_finite(alpha) || !is_finite(beta) {
            return Err(QuonError::ZeroOscParam);
        }
        Ok(OscParams { alpha, beta })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OscReport {
    /// `H = (q + 1) N + 1`
    pub h_vs_number: Comparison,
    /// `[x, p] = 4iαβ/(q+1) + i(q-1)/(αβ(q+1)) (β² x² + α² p²)`
    pub commutator_identity: Comparison,
}

#[derive(Debug, Clone)]
pub struct Oscillator {
    pub x: Operator,
    pub p: Operator,
    /// `½((p/β)² + (x/α)²)`
    pub big_h: Operator,
    /// `H - 1`
    pub h: Operator,
    pub report: OscReport,
}

impl Oscillator {
    pub fn xp_commutator(&self) -> Operator {
        commutator(&self.x, &self.p).expect("one space")
    }
}

/// `x = α(b + a)`, `p = iβ(b - a)` and the oscillator Hamiltonian built from them.
pub fn build_oscillator(model: &QuonModel, osc: OscParams, tol: f64) -> Result<Oscillator, QuonError> {
    let q = model.q();
    if (q + 1.0).norm() < 1e-12 {
        return Err(QuonError::MinusOne);
    }
    let (a, b) = (&model.a, &model.b);
    let space = model.space();
    let window = space.window();
    let OscParams { alpha, beta } = osc;
    let x = &(b + a) * alpha;
    let p = &(b - a) * (c(0.0, 1.0) * beta);
    let xs = &x * (1.0 / alpha);
    let ps = &p * (1.0 / beta);
    let x2 = &xs * &xs;
    let p2 = &ps * &ps;
    let big_h = &(&p2 + &x2) * re(0.5);
    let id = Operator::identity(space);
    let expected = &(&model.number * (q + 1.0)) + &id;
    let hint = x2.norm().max(p2.norm());
    let h_vs_number = op_compare(&big_h, &expected, Basis::Phi, window, tol, hint).expect("one space");

    let xp = commutator(&x, &p).expect("one space");
    let ab = alpha * beta;
    let quad = &(&(&x * &x) * (beta * beta)) + &(&(&p * &p) * (alpha * alpha));
    let rhs = &(&id * (c(0.0, 4.0) * ab / (q + 1.0))) + &(&quad * (c(0.0, 1.0) * (q - 1.0) / (ab * (q + 1.0))));
    let xp_hint = (&x * &p).norm().max(quad.norm() * ((q - 1.0) / (ab * (q + 1.0))).norm());
    let commutator_identity = op_compare(&xp, &rhs, Basis::Phi, window, tol, xp_hint).expect("one space");

    let h = big_h.shifted(re(1.0));
    Ok(Oscillator { x, p, big_h, h, report: OscReport { h_vs_number, commutator_identity } })
}

#[derive(Debug, Clone, Serialize)]
pub struct QuonFamilyCertificate {
    /// `max |<Psi_n, Phi_m> - δ_nm|`
    pub biorth: f64,
    /// `N Phi_n = [n] Phi_n` and `N† Psi_n = conj([n]) Psi_n`
    pub number_phi: f64,
    pub number_psi: f64,
    /// `b Phi_n = Phi_{n+1}/α_{n+1}`, `a Phi_n = α_n [n] Phi_{n-1}`
    pub b_phi: f64,
    pub a_phi: f64,
    /// `a† Psi_n = Psi_{n+1}/β_{n+1}`, `b† Psi_n = β_n conj([n]) Psi_{n-1}`
    pub adag_psi: f64,
    pub bdag_psi: f64,
    pub tol: f64,
    pub passed: bool,
}

/// The `Phi`/`Psi` families and their images `phi_n = Phi_n / α_n!`,
/// `psi_n = conj(α_n!) Psi_n` in the unit-lowering normalization.
#[derive(Debug, Clone)]
pub struct QuonFamilies {
    pub big_phi: Vec<DVector<C64>>,
    pub big_psi: Vec<DVector<C64>>,
    pub phi: Vec<DVector<C64>>,
    pub psi: Vec<DVector<C64>>,
    pub certificate: QuonFamilyCertificate,
}

/// `Phi_n = α_n b Phi_{n-1}` and `Psi_n = β_n a† Psi_{n-1}` from the vacua
/// `Phi_0 = V e_0`, `Psi_0 = V^{-†} e_0`, for `n <= n_max`.
pub fn quon_families(model: &QuonModel, n_max: usize, tol: f64) -> Result<QuonFamilies, QuonError> {
    let space = model.space();
    let dim = space.dim();
    if n_max >= dim {
        return Err(QuonError::Truncation { n_max, dim });
    }
    let (a, b) = (&model.a, &model.b);
    let (adag, bdag, ndag) = (a.adjoint(), b.adjoint(), model.number.adjoint());
    let alpha = &model.params.alpha;
    let beta = model.params.beta();
    let qn = model.params.qnums();

    let mut big_phi = vec![space.phi_basis(0)];
    let mut big_psi = vec![space.psi_basis(0)];
    for n in 1..=n_max {
        big_phi.push(b.apply(&big_phi[n - 1]) * alpha[n]);
        big_psi.push(adag.apply(&big_psi[n - 1]) * beta[n]);
    }

    let rel = |lhs: DVector<C64>, rhs: DVector<C64>, op: &Operator, v: &DVector<C64>| {
        (lhs - rhs).norm() / (op.norm() * v.norm()).max(f64::MIN_POSITIVE)
    };
    let mut cert = QuonFamilyCertificate {
        biorth: 0.0,
        number_phi: 0.0,
        number_psi: 0.0,
        b_phi: 0.0,
        a_phi: 0.0,
        adag_psi: 0.0,
        bdag_psi: 0.0,
        tol: tol * space.cond_bound(),
        passed: false,
    };
    for n in 0..=n_max {
        for m in 0..=n_max {
            let delta = if n == m { 1.0 } else { 0.0 };
            cert.biorth = cert.biorth.max((inner(&big_psi[n], &big_phi[m]) - delta).norm());
        }
        let (ph, ps) = (&big_phi[n], &big_psi[n]);
        cert.number_phi = cert.number_phi.max(rel(model.number.apply(ph), ph * qn[n], &model.number, ph));
        cert.number_psi = cert.number_psi.max(rel(ndag.apply(ps), ps * qn[n].conj(), &ndag, ps));
        if n < n_max {
            cert.b_phi = cert.b_phi.max(rel(b.apply(ph), &big_phi[n + 1] / alpha[n + 1], b, ph));
            cert.adag_psi = cert.adag_psi.max(rel(adag.apply(ps), &big_psi[n + 1] / beta[n + 1], &adag, ps));
        }
        let (a_rhs, bd_rhs) = if n == 0 {
            (DVector::zeros(dim), DVector::zeros(dim))
        } else {
            (&big_phi[n - 1] * (alpha[n] * qn[n]), &big_psi[n - 1] * (beta[n] * qn[n].conj()))
        };
        cert.a_phi = cert.a_phi.max(rel(a.apply(ph), a_rhs, a, ph));
        cert.bdag_psi = cert.bdag_psi.max(rel(bdag.apply(ps), bd_rhs, &bdag, ps));
    }
    let eff = cert.tol;
    cert.passed = cert.biorth <= 1e-9 * space.cond_bound()
        && [cert.number_phi, cert.number_psi, cert.b_phi, cert.a_phi, cert.adag_psi, cert.bdag_psi]
            .iter()
            .all(|&r| r <= eff);

    let phi = (0..=n_max).map(|n| &big_phi[n] / factorial_from_one(alpha, n)).collect();
    let psi = (0..=n_max).map(|n| &big_psi[n] * factorial_from_one(alpha, n).conj()).collect();
    Ok(QuonFamilies { big_phi, big_psi, phi, psi, certificate: cert })
}
