//! Truncated dressed Fock space and operators acting on it.
//!
//! A [`DressedSpace`] fixes an invertible dressing map `V`. The dressed
//! basis `phi_n = V e_n` and its dual `psi_n = V^{-†} e_n` are biorthonormal
//! by construction, so an operator whose coordinate matrix is `M` is stored
//! as the ambient matrix `V M V^{-1}`. Adjoints are always taken in the
//! ambient orthonormal coordinates.
//!
//! Ladder identities only hold away from the truncation edge: raising then
//! lowering touches index `n + 1`, so comparisons are restricted to the
//! first `window = dim - 2` dressed basis vectors.

mod eig;
mod io;

pub use eig::{eig, eig_matrix, Eigen};
pub use io::{matrix_from_json, matrix_to_json, MatrixJson};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::SpaceError;
use crate::scalar::{is_finite, C64};

/// Condition numbers above this are rejected.
pub const MAX_COND: f64 = 1e6;

/// Default absolute tolerance for window comparisons.
pub const DEFAULT_TOL: f64 = 1e-10;

/// How the dressing map `V` is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DressingSpec {
    Identity,
    Diagonal {
        #[serde(with = "crate::scalar::serde_c64_vec")]
        scales: Vec<C64>,
    },
    RandomSeeded { seed: u64, target_cond: f64 },
}

impl fmt::Display for DressingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DressingSpec::Identity => write!(f, "identity"),
            DressingSpec::Diagonal { scales } => write!(f, "diagonal({} scales)", scales.len()),
            DressingSpec::RandomSeeded { seed, target_cond } => {
                write!(f, "random_seeded(seed={seed}, target_cond={target_cond})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// `V e_n`: the natural basis for identities in `H, T, S`.
    Phi,
    /// `V^{-†} e_n`: the natural basis for identities in the adjoints.
    Psi,
    /// Plain `e_n`.
    Ambient,
}

#[derive(Debug, Clone)]
pub struct DressedSpace {
    dim: usize,
    spec: DressingSpec,
    dressing: DMatrix<C64>,
    dressing_inv: DMatrix<C64>,
    dressing_inv_adj: DMatrix<C64>,
    window: usize,
    cond_bound: f64,
    identity: bool,
}

impl DressedSpace {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn cond_bound(&self) -> f64 {
        self.cond_bound
    }

    pub fn spec(&self) -> &DressingSpec {
        &self.spec
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// `V`.
    pub fn dressing(&self) -> &DMatrix<C64> {
        &self.dressing
    }

    /// `V^{-1}`.
    pub fn dressing_inv(&self) -> &DMatrix<C64> {
        &self.dressing_inv
    }

    /// `V^{-†}`.
    pub fn dressing_inv_adj(&self) -> &DMatrix<C64> {
        &self.dressing_inv_adj
    }

    pub fn phi_basis(&self, n: usize) -> DVector<C64> {
        self.dressing.column(n).into_owned()
    }

    pub fn psi_basis(&self, n: usize) -> DVector<C64> {
        self.dressing_inv_adj.column(n).into_owned()
    }

    fn basis_matrix(&self, basis: Basis) -> Option<&DMatrix<C64>> {
        match basis {
            Basis::Phi => Some(&self.dressing),
            Basis::Psi => Some(&self.dressing_inv_adj),
            Basis::Ambient => None,
        }
    }

    /// `V M V^{-1}`.
    pub fn dress(&self, coords: &DMatrix<C64>) -> DMatrix<C64> {
        if self.identity {
            coords.clone()
        } else {
            &self.dressing * coords * &self.dressing_inv
        }
    }

    /// `V^{-1} A V`.
    pub fn undress(&self, ambient: &DMatrix<C64>) -> DMatrix<C64> {
        if self.identity {
            ambient.clone()
        } else {
            &self.dressing_inv * ambient * &self.dressing
        }
    }

    fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other)
            || (self.dim == other.dim && self.spec == other.spec && self.dressing == other.dressing)
    }
}

/// Builds a dressed space of dimension `dim` (at least 4).
pub fn make_space(dim: usize, spec: DressingSpec) -> Result<Arc<DressedSpace>, SpaceError> {
    if dim < 4 {
        return Err(SpaceError::DimTooSmall(dim));
    }
    let (dressing, identity) = match &spec {
        DressingSpec::Identity => (DMatrix::identity(dim, dim), true),
        DressingSpec::Diagonal { scales } => {
            if scales.len() != dim {
                return Err(SpaceError::DimMismatch { expected: dim, found: scales.len() });
            }
            if let Some(i) = scales.iter().position(|s| s.norm() == 0.0 || !is_finite(*s)) {
                return Err(SpaceError::ZeroScale(i));
            }
            (DMatrix::from_diagonal(&DVector::from_vec(scales.clone())), false)
        }
        DressingSpec::RandomSeeded { seed, target_cond } => {
            if !(1.0..=MAX_COND).contains(target_cond) {
                return Err(SpaceError::TargetCond(*target_cond));
            }
            (random_dressing(dim, *seed, *target_cond), false)
        }
    };

    let cond_bound = match &spec {
        DressingSpec::Identity => 1.0,
        DressingSpec::Diagonal { scales } => {
            let max = scales.iter().map(|s| s.norm()).fold(0.0, f64::max);
            let min = scales.iter().map(|s| s.norm()).fold(f64::INFINITY, f64::min);
            max / min
        }
        DressingSpec::RandomSeeded { .. } => condition_number(&dressing),
    };
    if !(cond_bound <= MAX_COND) {
        return Err(SpaceError::IllConditioned(cond_bound));
    }

    let dressing_inv = if identity {
        DMatrix::identity(dim, dim)
    } else {
        dressing.clone().try_inverse().ok_or(SpaceError::IllConditioned(f64::INFINITY))?
    };
    let err = (&dressing * &dressing_inv - DMatrix::<C64>::identity(dim, dim))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if err > 1e-10 * cond_bound {
        return Err(SpaceError::InverseCheck { err, cond: cond_bound });
    }
    let dressing_inv_adj = dressing_inv.adjoint();

    Ok(Arc::new(DressedSpace {
        dim,
        spec,
        dressing,
        dressing_inv,
        dressing_inv_adj,
        window: dim - 2,
        cond_bound,
        identity,
    }))
}

/// 2-norm condition number from singular values.
pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `U diag(s) W†` with Haar-like unitaries and log-spread singular values whose
/// extreme ratio is `target_cond^0.95`.
fn random_dressing(dim: usize, seed: u64, target_cond: f64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = |rng: &mut ChaCha8Rng| {
        DMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
    };
    let u = gaussian(&mut rng).qr().q();
    let w = gaussian(&mut rng).qr().q();
    let half = 0.475 * target_cond.ln();
    let spread = Uniform::new_inclusive(-half, half).expect("finite bounds");
    let sv: Vec<f64> = (0..dim)
        .map(|i| match i {
            0 => half,
            1 => -half,
            _ => spread.sample(&mut rng),
        })
        .map(f64::exp)
        .collect();
    let s = DMatrix::from_diagonal(&DVector::from_iterator(dim, sv.into_iter().map(|x| C64::new(x, 0.0))));
    u * s * w.adjoint()
}

/// Outcome of comparing two operators on a set of basis vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Largest elementwise deviation of the compared actions.
    pub max_abs: f64,
    /// Magnitude used to make the deviation relative when it exceeds 1.
    pub scale: f64,
    /// `max_abs / max(1, scale)`.
    pub deviation: f64,
    /// Effective tolerance (`tol * cond_bound`).
    pub tol: f64,
    pub holds: bool,
}

impl Comparison {
    pub fn exact_zero() -> Self {
        Comparison { max_abs: 0.0, scale: 0.0, deviation: 0.0, tol: 0.0, holds: true }
    }
}

/// A dense complex operator tied to a dressed space.
#[derive(Debug, Clone)]
pub struct Operator {
    mat: DMatrix<C64>,
    space: Arc<DressedSpace>,
}

impl Operator {
    /// Wraps an ambient matrix.
    pub fn from_ambient(space: &Arc<DressedSpace>, mat: DMatrix<C64>) -> Result<Self, SpaceError> {
        if mat.nrows() != space.dim || mat.ncols() != space.dim {
            return Err(SpaceError::DimMismatch { expected: space.dim, found: mat.nrows() });
        }
        if mat.iter().any(|z| !is_finite(*z)) {
            return Err(SpaceError::NonFinite);
        }
        Ok(Operator { mat, space: Arc::clone(space) })
    }

    /// Dresses a coordinate matrix `M` into `V M V^{-1}`.
    pub fn from_coords(space: &Arc<DressedSpace>, coords: &DMatrix<C64>) -> Result<Self, SpaceError> {
        if coords.nrows() != space.dim || coords.ncols() != space.dim {
            return Err(SpaceError::DimMismatch { expected: space.dim, found: coords.nrows() });
        }
        Self::from_ambient(space, space.dress(coords))
    }

    pub fn identity(space: &Arc<DressedSpace>) -> Self {
        Operator { mat: DMatrix::identity(space.dim, space.dim), space: Arc::clone(space) }
    }

    pub fn zeros(space: &Arc<DressedSpace>) -> Self {
        Operator { mat: DMatrix::zeros(space.dim, space.dim), space: Arc::clone(space) }
    }

    pub fn mat(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn space(&self) -> &Arc<DressedSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    /// Coordinate matrix `V^{-1} A V`.
    pub fn coords(&self) -> DMatrix<C64> {
        self.space.undress(&self.mat)
    }

    pub fn same_space(&self, other: &Operator) -> bool {
        self.space.same_as(&other.space)
    }

    pub fn check_space(&self, other: &Operator) -> Result<(), SpaceError> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(SpaceError::SpaceMismatch)
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn adjoint(&self) -> Operator {
        Operator { mat: self.mat.adjoint(), space: Arc::clone(&self.space) }
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> Operator {
        Operator { mat: self.mat.transpose(), space: Arc::clone(&self.space) }
    }

    pub fn scale(&self, z: C64) -> Operator {
        Operator { mat: &self.mat * z, space: Arc::clone(&self.space) }
    }

    pub fn pow(&self, n: u32) -> Operator {
        let mut acc = Operator::identity(&self.space);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.mat * v
    }

    /// `A - alpha I`.
    pub fn shifted(&self, alpha: C64) -> Operator {
        let mut mat = self.mat.clone();
        for i in 0..self.dim() {
            mat[(i, i)] -= alpha;
        }
        Operator { mat, space: Arc::clone(&self.space) }
    }

    fn binary(&self, other: &Operator, f: impl FnOnce(&DMatrix<C64>, &DMatrix<C64>) -> DMatrix<C64>) -> Operator {
        assert!(self.same_space(other), "operators live on different spaces");
        Operator { mat: f(&self.mat, &other.mat), space: Arc::clone(&self.space) }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.binary(rhs, |a, b| a * b)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.binary(rhs, |a, b| a + b)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.binary(rhs, |a, b| a - b)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { mat: -&self.mat, space: Arc::clone(&self.space) }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

pub fn adjoint(a: &Operator) -> Operator {
    a.adjoint()
}

/// `AB - BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator, SpaceError> {
    a.check_space(b)?;
    Ok(&(a * b) - &(b * a))
}

/// `AB - q BA`.
pub fn qmutator(a: &Operator, b: &Operator, q: C64) -> Result<Operator, SpaceError> {
    a.check_space(b)?;
    Ok(&(a * b) - &(&(b * a) * q))
}

/// Compares `A` and `B` on the first `window` dressed basis vectors `phi_n`.
pub fn op_approx_equal(a: &Operator, b: &Operator, window: usize, tol: f64) -> Result<Comparison, SpaceError> {
    op_compare(a, b, Basis::Phi, window, tol, 0.0)
}

/// Compares `A` and `B` on the first `window` vectors of `basis`.
///
/// The deviation is made relative to the larger of the compared actions and
/// `magnitude_hint` (callers pass the size of the factors when the compared
/// sides are differences of large products).
pub fn op_compare(
    a: &Operator,
    b: &Operator,
    basis: Basis,
    window: usize,
    tol: f64,
    magnitude_hint: f64,
) -> Result<Comparison, SpaceError> {
    let cols: Vec<usize> = (0..window).collect();
    op_compare_on(a, b, basis, &cols, tol, magnitude_hint)
}

/// Like [`op_compare`] but on an explicit list of basis indices.
pub fn op_compare_on(
    a: &Operator,
    b: &Operator,
    basis: Basis,
    columns: &[usize],
    tol: f64,
    magnitude_hint: f64,
) -> Result<Comparison, SpaceError> {
    a.check_space(b)?;
    let space = a.space();
    if let Some(&bad) = columns.iter().find(|&&c| c >= space.dim) {
        return Err(SpaceError::WindowTooLarge { window: bad + 1, limit: space.dim });
    }
    let (mut max_abs, mut max_a, mut max_b) = (0.0f64, 0.0f64, 0.0f64);
    for &col in columns {
        let (ua, ub) = match space.basis_matrix(basis) {
            Some(w) => {
                let v = w.column(col);
                (&a.mat * v, &b.mat * v)
            }
            None => (a.mat.column(col).into_owned(), b.mat.column(col).into_owned()),
        };
        for (x, y) in ua.iter().zip(ub.iter()) {
            max_abs = max_abs.max((x - y).norm());
            max_a = max_a.max(x.norm());
            max_b = max_b.max(y.norm());
        }
    }
    let scale = max_a.max(max_b).max(magnitude_hint);
    let deviation = max_abs / scale.max(1.0);
    let eff = tol * space.cond_bound;
    Ok(Comparison { max_abs, scale, deviation, tol: eff, holds: deviation <= eff })
}

/// `<u, v>`, antilinear in the first slot.
pub fn inner(u: &DVector<C64>, v: &DVector<C64>) -> C64 {
    u.dotc(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c, re};

    fn diag(space: &Arc<DressedSpace>, d: &[f64]) -> Operator {
        let m = DMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| re(x))));
        Operator::from_coords(space, &m).unwrap()
    }

    #[test]
    fn identity_space() {
        let s = make_space(8, DressingSpec::Identity).unwrap();
        assert_eq!(s.dressing(), &DMatrix::<C64>::identity(8, 8));
        assert_eq!(s.window(), 6);
        assert_eq!(s.cond_bound(), 1.0);
    }

    #[test]
    fn diagonal_condition_number() {
        let scales = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0].map(re).to_vec();
        let s = make_space(6, DressingSpec::Diagonal { scales }).unwrap();
        assert_eq!(s.cond_bound(), 32.0);
    }

    #[test]
    fn random_space_is_reproducible_and_bounded() {
        let spec = DressingSpec::RandomSeeded { seed: 42, target_cond: 100.0 };
        let s1 = make_space(16, spec.clone()).unwrap();
        let s2 = make_space(16, spec).unwrap();
        assert_eq!(s1.dressing(), s2.dressing());
        let measured = condition_number(s1.dressing());
        assert!((1.0..=100.0).contains(&measured), "{measured}");
        assert!((s1.cond_bound() - measured).abs() < 1e-12 * measured);
        assert!(s1.cond_bound() > 10.0);
    }

    #[test]
    fn rejections() {
        assert!(matches!(make_space(3, DressingSpec::Identity), Err(SpaceError::DimTooSmall(3))));
        let scales = vec![re(1.0), re(0.0), re(1.0), re(1.0)];
        assert!(matches!(make_space(4, DressingSpec::Diagonal { scales }), Err(SpaceError::ZeroScale(1))));
        let scales = vec![re(1.0), re(1e-7), re(1.0), re(1.0)];
        match make_space(4, DressingSpec::Diagonal { scales }) {
            Err(SpaceError::IllConditioned(k)) => assert!((k - 1e7).abs() < 1.0),
            other => panic!("{other:?}"),
        }
        let spec = DressingSpec::RandomSeeded { seed: 1, target_cond: 0.5 };
        assert!(make_space(4, spec).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let s = make_space(4, DressingSpec::Identity).unwrap();
        let sym = Operator::from_ambient(
            &s,
            DMatrix::from_fn(4, 4, |i, j| re((i + j) as f64 + if i == j { 1.0 } else { 0.0 })),
        )
        .unwrap();
        assert_eq!(adjoint(&sym).mat(), sym.mat());
        let ii = Operator::identity(&s).scale(c(0.0, 1.0));
        assert_eq!(adjoint(&ii).mat(), &(DMatrix::<C64>::identity(4, 4) * c(0.0, -1.0)));
    }

    #[test]
    fn commutator_of_self_vanishes() {
        let s = make_space(5, DressingSpec::RandomSeeded { seed: 3, target_cond: 10.0 }).unwrap();
        let a = Operator::from_ambient(&s, DMatrix::from_fn(5, 5, |i, j| c(i as f64, j as f64 - 1.0))).unwrap();
        let z = commutator(&a, &a).unwrap();
        assert!(z.mat().iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn space_mismatch_is_an_error() {
        let s1 = make_space(4, DressingSpec::Identity).unwrap();
        let s2 = make_space(5, DressingSpec::Identity).unwrap();
        let a = Operator::identity(&s1);
        let b = Operator::identity(&s2);
        assert!(matches!(commutator(&a, &b), Err(SpaceError::SpaceMismatch)));
        assert!(qmutator(&a, &b, re(0.5)).is_err());
    }

    #[test]
    fn window_comparison_examples() {
        let s = make_space(6, DressingSpec::Identity).unwrap();
        let a = diag(&s, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let cmp = op_approx_equal(&a, &a, 4, 1e-10).unwrap();
        assert!(cmp.holds);
        assert_eq!(cmp.max_abs, 0.0);

        let id = Operator::identity(&s);
        let mut m = DMatrix::<C64>::identity(6, 6);
        m[(0, 0)] += re(1e-12);
        let pert = Operator::from_ambient(&s, m).unwrap();
        let cmp = op_approx_equal(&id, &pert, 4, 1e-10).unwrap();
        assert!(cmp.holds);
        assert!((cmp.max_abs - 1e-12).abs() < 1e-15);
    }

    #[test]
    fn window_ignores_truncation_edge() {
        let s = make_space(6, DressingSpec::Identity).unwrap();
        let mut m = DMatrix::<C64>::identity(6, 6);
        m[(5, 5)] = re(7.0);
        let edge = Operator::from_ambient(&s, m).unwrap();
        assert!(op_approx_equal(&edge, &Operator::identity(&s), 4, 1e-12).unwrap().holds);
        assert!(!op_approx_equal(&edge, &Operator::identity(&s), 6, 1e-12).unwrap().holds);
    }

    #[test]
    fn shift_and_pow() {
        let s = make_space(4, DressingSpec::Identity).unwrap();
        let a = diag(&s, &[0.0, 1.0, 2.0, 3.0]);
        let sh = a.shifted(re(1.0));
        assert_eq!(sh.mat()[(0, 0)], re(-1.0));
        assert_eq!(a.pow(0).mat(), Operator::identity(&s).mat());
        assert_eq!(a.pow(2).mat()[(3, 3)], re(9.0));
    }
}
