//! Ladder triples `(H, T, S)`: class membership, eigenfamily construction
//! from a zero-energy seed, the biorthonormal dual family, and the `gamma`
//! ladder of the strong class.
//!
//! Residuals are normwise: `‖lhs - rhs‖ / (‖X‖_F ‖v‖)` where `X` is the
//! operator (or product of operators) applied to `v`. Tolerances passed in
//! are multiplied by the space's `cond_bound`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{EigError, LadderError, SpaceError};
use crate::scalar::{rel_dev, C64};
use crate::space::{commutator, eig, inner, op_compare, Basis, Comparison, Operator};

/// Biorthonormality tolerance (times `cond_bound`).
pub const BIORTH_TOL: f64 = 1e-9;
/// Two recursion eigenvalues closer than this abort the construction.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Dual-route agreement, relative to `max(1, ‖H‖_F)`.
pub const DUAL_ROUTE_TOL: f64 = 1e-8;
/// Relative norm below which `S^n phi_0` counts as zero.
pub const EARLY_STOP: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LadderTriple {
    pub h: Operator,
    pub t: Operator,
    pub s: Operator,
    pub lambda: C64,
}

impl LadderTriple {
    pub fn new(h: Operator, t: Operator, s: Operator, lambda: C64) -> Result<Self, SpaceError> {
        h.check_space(&t)?;
        h.check_space(&s)?;
        Ok(LadderTriple { h, t, s, lambda })
    }

    pub fn with_h(&self, h: Operator) -> Result<Self, SpaceError> {
        Self::new(h, self.t.clone(), self.s.clone(), self.lambda)
    }

    pub fn window(&self) -> usize {
        self.h.space().window()
    }

    pub fn cond_bound(&self) -> f64 {
        self.h.space().cond_bound()
    }

    /// `[T, S]`.
    pub fn ts_commutator(&self) -> Operator {
        commutator(&self.t, &self.s).expect("triple shares one space")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassDeviations {
    /// `[H,S] = λ S [T,S]`
    pub r_lambda: Comparison,
    /// `[H,T] = λ [S,T] T`
    pub strong: Comparison,
    /// `[H,[T,S]] = 0`
    pub commutes: Comparison,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub in_r_lambda: bool,
    /// Both the class identity and the strong identity hold.
    pub in_r_lambda_strong: bool,
    /// The strong identity on its own.
    pub strong_identity_holds: bool,
    pub commutes_with_ts: bool,
    pub deviations: ClassDeviations,
    pub window_used: usize,
    pub tol: f64,
}

impl ClassificationReport {
    pub fn all_hold(&self) -> bool {
        self.in_r_lambda && self.in_r_lambda_strong && self.commutes_with_ts
    }

    pub fn max_deviation(&self) -> f64 {
        let d = &self.deviations;
        d.r_lambda.deviation.max(d.strong.deviation).max(d.commutes.deviation)
    }
}

fn action_max(op: &Operator, basis: Basis, window: usize) -> f64 {
    let space = op.space();
    let w = match basis {
        Basis::Phi => space.dressing(),
        Basis::Psi => space.dressing_inv_adj(),
        Basis::Ambient => return op.mat().columns(0, window).iter().map(|z| z.norm()).fold(0.0, f64::max),
    };
    (op.mat() * w.columns(0, window)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Compares `lhs` and `rhs`, using the largest action among `terms` as the
/// relative scale (the pieces whose difference forms each side).
fn compare_terms(
    lhs: &Operator,
    rhs: &Operator,
    terms: &[&Operator],
    basis: Basis,
    window: usize,
    tol: f64,
) -> Comparison {
    let hint = terms.iter().map(|t| action_max(t, basis, window)).fold(0.0, f64::max);
    op_compare(lhs, rhs, basis, window, tol, hint).expect("triple shares one space")
}

/// Tests the three defining identities on the space's window.
pub fn classify(triple: &LadderTriple, tol: f64) -> ClassificationReport {
    classify_on(triple, triple.window(), tol)
}

pub fn classify_on(triple: &LadderTriple, window: usize, tol: f64) -> ClassificationReport {
    let LadderTriple { h, t, s, lambda } = triple;
    let ts = triple.ts_commutator();
    let st = -&ts;

    let hs = h * s;
    let sh = s * h;
    let sts = &(s * t) * s;
    let sst = &(s * s) * t;
    let lhs = &hs - &sh;
    let rhs = &(s * &ts) * *lambda;
    let r_lambda = compare_terms(&lhs, &rhs, &[&hs, &sh, &sts, &sst], Basis::Phi, window, tol);

    let ht = h * t;
    let th = t * h;
    let stt = &(s * t) * t;
    let tst = &(t * s) * t;
    let lhs = &ht - &th;
    let rhs = &(&st * t) * *lambda;
    let strong = compare_terms(&lhs, &rhs, &[&ht, &th, &stt, &tst], Basis::Phi, window, tol);

    let hc = h * &ts;
    let ch = &ts * h;
    let lhs = &hc - &ch;
    let zero = Operator::zeros(h.space());
    let commutes = compare_terms(&lhs, &zero, &[&hc, &ch], Basis::Phi, window, tol);

    ClassificationReport {
        in_r_lambda: r_lambda.holds,
        in_r_lambda_strong: r_lambda.holds && strong.holds,
        strong_identity_holds: strong.holds,
        commutes_with_ts: commutes.holds,
        deviations: ClassDeviations { r_lambda, strong, commutes },
        window_used: window,
        tol: tol * triple.cond_bound(),
    }
}

/// The adjoint form `[H†,S†] = conj(λ) [T†,S†] S†`, compared on the dual basis.
pub fn classify_adjoint(triple: &LadderTriple, tol: f64) -> Comparison {
    let (h, t, s) = (triple.h.adjoint(), triple.t.adjoint(), triple.s.adjoint());
    let window = triple.window();
    let hs = &h * &s;
    let sh = &s * &h;
    let tss = &(&t * &s) * &s;
    let sts = &(&s * &t) * &s;
    let lhs = &hs - &sh;
    let rhs = &(&tss - &sts) * triple.lambda.conj();
    compare_terms(&lhs, &rhs, &[&hs, &sh, &tss, &sts], Basis::Psi, window, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerRow {
    pub n: u32,
    pub window: usize,
    /// `[H,S^n] = λ S [T,S^n]`
    pub direct: Comparison,
    /// `[H†,(S†)^n] = conj(λ) [T†,(S†)^n] S†`
    pub adjoint: Comparison,
}

/// Power identities for `n = 0..=n_max`. Power `n` is compared on the first
/// `min(window, dim - n)` vectors, where `S^n` stays inside the truncation.
pub fn verify_power_identities(triple: &LadderTriple, n_max: usize, tol: f64) -> Result<Vec<PowerRow>, LadderError> {
    let window = triple.window();
    if n_max > window {
        return Err(LadderError::NMaxTooLarge { n_max, window });
    }
    let dim = triple.h.dim();
    let LadderTriple { h, t, s, lambda } = triple;
    let (hd, td, sd) = (h.adjoint(), t.adjoint(), s.adjoint());
    let mut sn = Operator::identity(h.space());
    let mut sdn = Operator::identity(h.space());
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            sn = &sn * s;
            sdn = &sdn * &sd;
        }
        let w = window.min(dim - n);
        let hsn = h * &sn;
        let snh = &sn * h;
        let stsn = &(s * t) * &sn;
        let ssnt = &(s * &sn) * t;
        let lhs = &hsn - &snh;
        let rhs = &(&stsn - &ssnt) * *lambda;
        let direct = compare_terms(&lhs, &rhs, &[&hsn, &snh, &stsn, &ssnt], Basis::Phi, w, tol);

        let hsdn = &hd * &sdn;
        let sdnh = &sdn * &hd;
        let tsds = &(&td * &sdn) * &sd;
        let sdts = &(&sdn * &td) * &sd;
        let lhs = &hsdn - &sdnh;
        let rhs = &(&tsds - &sdts) * lambda.conj();
        let adjoint = compare_terms(&lhs, &rhs, &[&hsdn, &sdnh, &tsds, &sdts], Basis::Psi, w, tol);
        rows.push(PowerRow { n: n as u32, window: w, direct, adjoint });
    }
    Ok(rows)
}

/// `H - α I`. Class membership is unchanged by the shift.
pub fn shift_to_zero(h: &Operator, alpha: C64) -> Operator {
    h.shifted(alpha)
}

/// Eigenpair of smallest modulus, from the eigensolver.
pub fn ground_state(h: &Operator) -> Result<(C64, DVector<C64>), EigError> {
    let e = eig(h)?;
    let k = (0..e.values.len())
        .min_by(|&i, &j| e.values[i].norm().total_cmp(&e.values[j].norm()))
        .ok_or(EigError::Breakdown(0))?;
    Ok((e.values[k], e.vectors.column(k).into_owned()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Recursion,
    Eigensolver,
}

/// How the dual family was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DualRoute {
    /// The raising family spans the space; `psi` is the inverse adjoint of
    /// the (column-normalized) family matrix. Coincides with scaled columns
    /// of `V^{-†}` whenever `phi_n ∝ V e_n`.
    FullInverse,
    /// Truncated family: dual within its span via the Gram system.
    GramSystem,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyCertificate {
    /// `‖H phi_n - E_n phi_n‖ / (‖H‖ ‖phi_n‖)`
    pub phi_eigen: Vec<f64>,
    /// `‖H† psi_n - conj(E_n) psi_n‖ / (‖H‖ ‖psi_n‖)`
    pub psi_eigen: Vec<f64>,
    /// `S† psi_n = psi_{n-1}`, `S† psi_0 = 0`
    pub psi_lowering: Vec<f64>,
    /// `max |<phi_n, psi_m> - δ_nm|`
    pub biorth_max_abs: f64,
    /// Same, each entry divided by `max(1, ‖phi_n‖ ‖psi_m‖)`.
    pub biorth_scaled: f64,
    pub min_gap: f64,
    pub tol: f64,
    pub biorth_tol: f64,
    pub passed: bool,
}

/// Eigenvectors of `H` (`phi_n = S^n phi_0`) and of `H†` (the dual family).
///
/// `phi` and `psi` hold every vector that was computed; the certified range
/// is `0..=n_max`. The pair is fixed up to one overall phase shared by
/// `phi_0` and `psi_0` (only `<phi_0, psi_0> = 1` is imposed).
#[derive(Debug, Clone, Serialize)]
pub struct EigenFamilyPair {
    #[serde(skip)]
    pub phi: Vec<DVector<C64>>,
    #[serde(skip)]
    pub psi: Vec<DVector<C64>>,
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub energies: Vec<C64>,
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub mu: Vec<C64>,
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub gamma: Vec<C64>,
    #[serde(with = "crate::scalar::serde_c64")]
    pub lambda: C64,
    pub n_max: usize,
    pub early_stop: Option<usize>,
    pub mu_zero: Vec<usize>,
    pub dual_route: DualRoute,
    pub provenance: Provenance,
    pub certificate: FamilyCertificate,
}

impl EigenFamilyPair {
    pub fn phi_norms(&self) -> Vec<f64> {
        self.phi[..=self.n_max].iter().map(|v| v.norm()).collect()
    }

    pub fn psi_norms(&self) -> Vec<f64> {
        self.psi[..=self.n_max].iter().map(|v| v.norm()).collect()
    }

    pub fn with_gamma(mut self, gamma: Vec<C64>) -> Self {
        self.gamma = gamma;
        self
    }
}

/// Builds `phi_n = S^n phi_0`, `mu_n`, `E_n` and the dual family.
///
/// `phi0` must satisfy `H phi_0 = 0` (shift `H` first). Raising continues to
/// the top of the space so the dual can be taken against a full basis; it
/// stops early if `S^n phi_0` collapses to zero.
pub fn build_families(
    triple: &LadderTriple,
    phi0: &DVector<C64>,
    n_max: usize,
    tol: f64,
) -> Result<EigenFamilyPair, LadderError> {
    let window = triple.window();
    if n_max > window {
        return Err(LadderError::NMaxTooLarge { n_max, window });
    }
    let LadderTriple { h, t: _, s, lambda } = triple;
    let dim = h.dim();
    let cond = triple.cond_bound();
    let eff_tol = tol * cond;
    let h_norm = h.norm().max(f64::MIN_POSITIVE);
    let s_norm = s.norm().max(f64::MIN_POSITIVE);

    let seed_norm = phi0.norm();
    if !(seed_norm > 0.0) {
        return Err(LadderError::ZeroSeed);
    }
    let ground = h.apply(phi0).norm() / (h_norm * seed_norm);
    if ground > eff_tol {
        return Err(LadderError::NotGroundState(ground));
    }

    // Raising in a dressed space leaks rounding into higher modes, which then
    // outgrow the wanted one. Each `phi_n` inside the certified range gets one
    // shifted inverse-iteration step at the recursion energy; the projection
    // keeps the scale and phase of `S phi_{n-1}`.
    let ts = triple.ts_commutator();
    let rayleigh = |v: &DVector<C64>| inner(v, &ts.apply(v)) / v.norm_squared();
    let mut phi = vec![phi0.clone()];
    let mut shifts = vec![C64::new(0.0, 0.0)];
    let mut early_stop = None;
    while phi.len() < dim {
        let last = phi.last().expect("nonempty");
        let raw = s.apply(last);
        if raw.norm() < EARLY_STOP * seed_norm {
            early_stop = Some(phi.len());
            break;
        }
        let n = phi.len();
        if n <= n_max {
            let step = lambda * rayleigh(last);
            let target = shifts[n - 1] + step;
            shifts.push(target);
            phi.push(refine(h, &raw, target, h_norm, step.norm()));
        } else {
            phi.push(raw);
        }
    }
    let n_eff = n_max.min(phi.len() - 1);

    let (psi, dual_route) = dual_family(&phi)?;

    // Two-sided quotient: first-order errors in `phi_n` and `psi_n` cancel.
    let mu: Vec<C64> = (0..=n_eff)
        .map(|n| inner(&psi[n], &ts.apply(&phi[n])) / inner(&psi[n], &phi[n]))
        .collect();
    let mu_scale = mu.iter().map(|m| m.norm()).fold(0.0, f64::max);
    let mu_zero: Vec<usize> = mu
        .iter()
        .enumerate()
        .filter(|(_, m)| m.norm() <= 1e-14 * mu_scale.max(1.0))
        .map(|(i, _)| i)
        .collect();

    let mut energies = Vec::with_capacity(n_eff + 1);
    energies.push(C64::new(0.0, 0.0));
    for n in 1..=n_eff {
        energies.push(energies[n - 1] + lambda * mu[n - 1]);
    }

    let mut min_gap = f64::INFINITY;
    for n in 0..=n_eff {
        for m in (n + 1)..=n_eff {
            let gap = (energies[n] - energies[m]).norm();
            if gap < DEGENERACY_GAP {
                return Err(LadderError::Degenerate { n, m, gap });
            }
            min_gap = min_gap.min(gap);
        }
    }

    let hd = h.adjoint();
    let sd = s.adjoint();
    let phi_eigen: Vec<f64> = (0..=n_eff)
        .map(|n| (h.apply(&phi[n]) - &phi[n] * energies[n]).norm() / (h_norm * phi[n].norm()))
        .collect();
    let psi_eigen: Vec<f64> = (0..=n_eff)
        .map(|n| (hd.apply(&psi[n]) - &psi[n] * energies[n].conj()).norm() / (h_norm * psi[n].norm()))
        .collect();
    let psi_lowering: Vec<f64> = (0..=n_eff)
        .map(|n| {
            let lowered = sd.apply(&psi[n]);
            if n == 0 {
                lowered.norm() / (s_norm * psi[0].norm())
            } else {
                (lowered - &psi[n - 1]).norm() / (s_norm * psi[n].norm()).max(psi[n - 1].norm())
            }
        })
        .collect();

    let (mut biorth_max_abs, mut biorth_scaled) = (0.0f64, 0.0f64);
    for n in 0..=n_eff {
        for m in 0..=n_eff {
            let delta = if n == m { 1.0 } else { 0.0 };
            let d = (inner(&phi[n], &psi[m]) - delta).norm();
            biorth_max_abs = biorth_max_abs.max(d);
            biorth_scaled = biorth_scaled.max(d / (phi[n].norm() * psi[m].norm()).max(1.0));
        }
    }
    let biorth_tol = BIORTH_TOL * cond;
    let passed = phi_eigen.iter().chain(&psi_eigen).chain(&psi_lowering).all(|&r| r <= eff_tol)
        && biorth_scaled <= biorth_tol;

    Ok(EigenFamilyPair {
        phi,
        psi,
        energies,
        mu,
        gamma: Vec::new(),
        lambda: *lambda,
        n_max: n_eff,
        early_stop,
        mu_zero,
        dual_route,
        provenance: Provenance::Recursion,
        certificate: FamilyCertificate {
            phi_eigen,
            psi_eigen,
            psi_lowering,
            biorth_max_abs,
            biorth_scaled,
            min_gap,
            tol: eff_tol,
            biorth_tol,
            passed,
        },
    })
}

/// One inverse-iteration step `(H - σ)^{-1} raw` with `σ` just off `target`,
/// rescaled onto `raw`. Falls back to `raw` if the solve fails.
fn refine(h: &Operator, raw: &DVector<C64>, target: C64, h_norm: f64, step: f64) -> DVector<C64> {
    let offset = (1e-13 * h_norm.max(1.0)).min(1e-3 * step).max(f64::MIN_POSITIVE);
    let sigma = target + C64::new(offset, offset);
    let n = raw.len();
    let shifted = h.mat() - DMatrix::<C64>::identity(n, n) * sigma;
    match shifted.lu().solve(raw) {
        Some(x) if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) && x.norm() > 0.0 => {
            let c = inner(&x, raw) / x.norm_squared();
            x * c
        }
        _ => raw.clone(),
    }
}

/// Biorthonormal partner of `phi`, computed with column-normalized vectors.
pub fn dual_family(phi: &[DVector<C64>]) -> Result<(Vec<DVector<C64>>, DualRoute), LadderError> {
    let dim = phi[0].len();
    let k = phi.len();
    let norms: Vec<f64> = phi.iter().map(|v| v.norm()).collect();
    let unit = DMatrix::from_fn(dim, k, |r, c| phi[c][r] / norms[c]);
    let (dual, route) = if k == dim {
        let inv = unit.clone().try_inverse().ok_or(SpaceError::IllConditioned(f64::INFINITY))?;
        (inv.adjoint(), DualRoute::FullInverse)
    } else {
        let gram = unit.adjoint() * &unit;
        let gi = gram.try_inverse().ok_or(SpaceError::IllConditioned(f64::INFINITY))?;
        (&unit * gi, DualRoute::GramSystem)
    };
    let psi = (0..k).map(|c| dual.column(c) / C64::new(norms[c], 0.0)).collect();
    Ok((psi, route))
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaRow {
    pub n: usize,
    #[serde(with = "crate::scalar::serde_c64")]
    pub gamma: C64,
    /// `T† psi_n = γ_n psi_{n+1}`
    pub raising_psi: f64,
    /// `T phi_{n+1} = conj(γ_n) phi_n`
    pub lowering_phi: f64,
    /// `S T phi_n = conj(γ_{n-1}) phi_n` and `T S phi_n = conj(γ_n) phi_n`
    pub st_phi: f64,
    pub ts_phi: f64,
    /// `S† T† psi_n = γ_n psi_n` and `T† S† psi_n = γ_{n-1} psi_n`
    pub sdtd_psi: f64,
    pub tdsd_psi: f64,
    /// `[S,T] phi_n = (conj γ_{n-1} - conj γ_n) phi_n` and the dual form
    pub comm_phi: f64,
    pub comm_psi: f64,
}

impl GammaRow {
    fn max_residual(&self) -> f64 {
        [self.raising_psi, self.lowering_phi, self.st_phi, self.ts_phi, self.sdtd_psi, self.tdsd_psi, self.comm_phi, self.comm_psi]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub gamma: Vec<C64>,
    pub rows: Vec<GammaRow>,
    /// `‖T phi_0‖ / (‖T‖ ‖phi_0‖)`
    pub t_phi0_residual: f64,
    pub t_phi0_annihilated: bool,
    pub zero_gamma: Vec<usize>,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

impl GammaReport {
    /// `γ_n - γ_{n-1}`, `n >= 1`.
    pub fn gaps(&self) -> Vec<C64> {
        self.gamma.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// True when every gap equals the first one within `tol` (relative above 1).
    pub fn constant_gap(&self, tol: f64) -> bool {
        let gaps = self.gaps();
        match gaps.first() {
            Some(&g0) => gaps.iter().all(|&g| rel_dev(g, g0) <= tol),
            None => true,
        }
    }
}

/// Extracts `γ_n = <psi_{n+1}, T† psi_n> / ‖psi_{n+1}‖²` and certifies the
/// ladder relations of the strong class, with `γ_{-1} = 0`.
pub fn gamma_ladder(pair: &EigenFamilyPair, triple: &LadderTriple, tol: f64) -> Result<GammaReport, LadderError> {
    let class = classify(triple, tol);
    if !class.in_r_lambda_strong {
        return Err(LadderError::NotStrong(format!(
            "class deviation {:e}, strong deviation {:e}",
            class.deviations.r_lambda.deviation, class.deviations.strong.deviation
        )));
    }
    let n_eff = pair.n_max;
    if n_eff < 1 {
        return Err(LadderError::FamilyTooShort { available: n_eff + 1, needed: 2 });
    }
    let (t, s) = (&triple.t, &triple.s);
    let (td, sd) = (t.adjoint(), s.adjoint());
    let (phi, psi) = (&pair.phi, &pair.psi);
    let t_norm = t.norm().max(f64::MIN_POSITIVE);
    let s_norm = s.norm().max(f64::MIN_POSITIVE);
    let st_norm = t_norm * s_norm;

    let gamma: Vec<C64> = (0..n_eff)
        .map(|n| inner(&psi[n + 1], &td.apply(&psi[n])) / psi[n + 1].norm_squared())
        .collect();
    let g = |n: isize| if n < 0 { C64::new(0.0, 0.0) } else { gamma[n as usize] };

    let st = &(s * t);
    let ts_op = &(t * s);
    let sdtd = &(&sd * &td);
    let tdsd = &(&td * &sd);
    let comm_st = commutator(s, t)?;
    let comm_sdtd = commutator(&sd, &td)?;
    let resid = |op: &Operator, v: &DVector<C64>, c: C64, scale: f64| {
        (op.apply(v) - v * c).norm() / (scale * v.norm())
    };

    let rows: Vec<GammaRow> = (0..n_eff)
        .map(|n| {
            let ni = n as isize;
            let raising_psi = (td.apply(&psi[n]) - &psi[n + 1] * gamma[n]).norm() / (t_norm * psi[n].norm());
            let lowering_phi = (t.apply(&phi[n + 1]) - &phi[n] * gamma[n].conj()).norm() / (t_norm * phi[n + 1].norm());
            GammaRow {
                n,
                gamma: gamma[n],
                raising_psi,
                lowering_phi,
                st_phi: resid(st, &phi[n], g(ni - 1).conj(), st_norm),
                ts_phi: resid(ts_op, &phi[n], g(ni).conj(), st_norm),
                sdtd_psi: resid(sdtd, &psi[n], g(ni), st_norm),
                tdsd_psi: resid(tdsd, &psi[n], g(ni - 1), st_norm),
                comm_phi: resid(&comm_st, &phi[n], g(ni - 1).conj() - g(ni).conj(), 2.0 * st_norm),
                comm_psi: resid(&comm_sdtd, &psi[n], g(ni) - g(ni - 1), 2.0 * st_norm),
            }
        })
        .collect();

    let eff_tol = tol * triple.cond_bound();
    let t_phi0_residual = t.apply(&phi[0]).norm() / (t_norm * phi[0].norm());
    let gscale = gamma.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let zero_gamma = gamma.iter().enumerate().filter(|(_, z)| z.norm() <= 1e-14 * gscale).map(|(i, _)| i).collect();
    let max_residual = rows.iter().map(GammaRow::max_residual).fold(0.0, f64::max);
    let t_phi0_annihilated = t_phi0_residual <= eff_tol;
    Ok(GammaReport {
        gamma,
        rows,
        t_phi0_residual,
        t_phi0_annihilated,
        zero_gamma,
        max_residual,
        tol: eff_tol,
        passed: max_residual <= eff_tol && t_phi0_annihilated,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma1Row {
    pub n: usize,
    /// `<psi_n, [T†,S†] psi_n> / ‖psi_n‖²`
    #[serde(with = "crate::scalar::serde_c64")]
    pub eigenvalue: C64,
    /// `-conj(mu_n)`
    #[serde(with = "crate::scalar::serde_c64")]
    pub expected: C64,
    pub deviation: f64,
    /// `‖[T†,S†] psi_n + conj(mu_n) psi_n‖ / (‖[T†,S†]‖ ‖psi_n‖)`
    pub eigen_residual: f64,
    #[serde(with = "crate::scalar::serde_c64")]
    pub expectation_phi: C64,
    #[serde(with = "crate::scalar::serde_c64")]
    pub expectation_psi: C64,
    pub expectation_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma1Report {
    pub rows: Vec<Lemma1Row>,
    pub max_deviation: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Checks `[T†,S†] psi_n = -conj(mu_n) psi_n` and that the normalized
/// expectations of `[T,S]` in `phi_n` and `psi_n` agree.
pub fn verify_lemma1(pair: &EigenFamilyPair, t: &Operator, s: &Operator, tol: f64) -> Result<Lemma1Report, LadderError> {
    t.check_space(s)?;
    let k = commutator(&t.adjoint(), &s.adjoint())?;
    let c = commutator(t, s)?;
    let k_norm = k.norm().max(f64::MIN_POSITIVE);
    let rows: Vec<Lemma1Row> = (0..=pair.n_max)
        .map(|n| {
            let psi = &pair.psi[n];
            let phi = &pair.phi[n];
            let expected = -pair.mu[n].conj();
            let kp = k.apply(psi);
            let eigenvalue = inner(psi, &kp) / psi.norm_squared();
            let eigen_residual = (kp - psi * expected).norm() / (k_norm * psi.norm());
            let expectation_phi = inner(phi, &c.apply(phi)) / phi.norm_squared();
            let expectation_psi = inner(psi, &c.apply(psi)) / psi.norm_squared();
            Lemma1Row {
                n,
                eigenvalue,
                expected,
                deviation: rel_dev(eigenvalue, expected),
                eigen_residual,
                expectation_phi,
                expectation_psi,
                expectation_gap: rel_dev(expectation_psi, expectation_phi),
            }
        })
        .collect();
    let eff_tol = tol * t.space().cond_bound();
    let max_deviation = rows
        .iter()
        .map(|r| r.deviation.max(r.expectation_gap).max(r.eigen_residual))
        .fold(0.0, f64::max);
    Ok(Lemma1Report { rows, max_deviation, tol: eff_tol, passed: max_deviation <= eff_tol })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub n: usize,
    #[serde(with = "crate::scalar::serde_c64")]
    pub recursion: C64,
    #[serde(with = "crate::scalar::serde_c64")]
    pub oracle: C64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualRouteReport {
    pub rows: Vec<SpectrumRow>,
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub eigenvalues: Vec<C64>,
    pub max_deviation: f64,
    /// `DUAL_ROUTE_TOL * max(1, ‖H‖_F)`
    pub tol: f64,
    pub eig_max_residual: f64,
    pub passed: bool,
}

/// Pairs recursion energies with eigensolver eigenvalues by greedy nearest
/// neighbour, in index order.
pub fn dual_route_spectrum(h: &Operator, energies: &[C64]) -> Result<DualRouteReport, EigError> {
    let e = eig(h)?;
    let pairs = greedy_pairing(energies, &e.values);
    let rows: Vec<SpectrumRow> = pairs
        .into_iter()
        .enumerate()
        .map(|(n, k)| SpectrumRow {
            n,
            recursion: energies[n],
            oracle: e.values[k],
            deviation: (energies[n] - e.values[k]).norm(),
        })
        .collect();
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let tol = DUAL_ROUTE_TOL * h.norm().max(1.0);
    Ok(DualRouteReport {
        rows,
        eigenvalues: e.values,
        max_deviation,
        tol,
        eig_max_residual: e.max_residual,
        passed: max_deviation <= tol,
    })
}

/// For each target in order, the index of the nearest unused candidate
/// (lowest index on ties).
pub fn greedy_pairing(targets: &[C64], candidates: &[C64]) -> Vec<usize> {
    let mut used = vec![false; candidates.len()];
    targets
        .iter()
        .map(|&x| {
            let k = (0..candidates.len())
                .filter(|&k| !used[k])
                .min_by(|&i, &j| (candidates[i] - x).norm().total_cmp(&(candidates[j] - x).norm()))
                .expect("more candidates than targets");
            used[k] = true;
            k
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::re;
    use crate::space::{make_space, DressingSpec};

    fn op(space: &std::sync::Arc<crate::space::DressedSpace>, rows: &[&[f64]]) -> Operator {
        let n = rows.len();
        Operator::from_ambient(space, DMatrix::from_fn(n, n, |i, j| re(rows[i].get(j).copied().unwrap_or(0.0)))).unwrap()
    }

    #[test]
    fn two_by_two_counterexample() {
        // The spaces need dim >= 4; embed the 2x2 block in the top-left
        // corner and compare on the first two vectors.
        let space = make_space(4, DressingSpec::Identity).unwrap();
        let h = op(&space, &[&[1.0, 0.0], &[0.0, 2.0], &[], &[]]);
        let n = op(&space, &[&[0.0, 1.0], &[0.0, 0.0], &[], &[]]);
        let triple = LadderTriple::new(h, n.clone(), n, re(1.0)).unwrap();
        let report = classify_on(&triple, 2, 1e-10);
        // [H,S] = [[0,-1],[0,0]] while [T,S] = 0.
        assert!(!report.in_r_lambda);
        assert_eq!(report.deviations.r_lambda.max_abs, 1.0);
        assert!(report.commutes_with_ts);
    }

    #[test]
    fn greedy_pairing_breaks_ties_by_index() {
        let t = [re(0.0), re(1.0)];
        let c = [re(1.0), re(0.0), re(0.0)];
        assert_eq!(greedy_pairing(&t, &c), vec![1, 0]);
    }

    #[test]
    fn shift_by_zero_is_identity() {
        let space = make_space(4, DressingSpec::Identity).unwrap();
        let h = op(&space, &[&[1.0, 2.0], &[3.0, 4.0], &[], &[]]);
        assert_eq!(shift_to_zero(&h, re(0.0)).mat(), h.mat());
    }

    #[test]
    fn n_max_beyond_window_is_rejected() {
        let space = make_space(4, DressingSpec::Identity).unwrap();
        let id = Operator::identity(&space);
        let triple = LadderTriple::new(id.clone(), id.clone(), id, re(1.0)).unwrap();
        assert!(matches!(verify_power_identities(&triple, 3, 1e-10), Err(LadderError::NMaxTooLarge { .. })));
    }

    #[test]
    fn seed_must_be_ground_state() {
        let space = make_space(4, DressingSpec::Identity).unwrap();
        let id = Operator::identity(&space);
        let triple = LadderTriple::new(id.clone(), id.clone(), id, re(1.0)).unwrap();
        let seed = space.phi_basis(0);
        assert!(matches!(build_families(&triple, &seed, 1, 1e-10), Err(LadderError::NotGroundState(_))));
    }
}
