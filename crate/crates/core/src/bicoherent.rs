//! Bi-coherent states `phi(z) = N_phi Σ α_n z^n phi_n` and
//! `psi(z) = N_psi Σ z^n psi_n` with `α_{n+1} conj(γ_n) = α_n`, `α_0 = 1`.
//! They satisfy `T phi(z) = z phi(z)` and `S† psi(z) = z psi(z)` inside the
//! convergence radius.
//!
//! The normalization fixes only `conj(N_phi) N_psi = 1/Γ(z)`. Both factors
//! get modulus `|Γ|^{-1/2}` and the whole phase of `1/Γ` goes to `N_psi`.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::BicoherentError;
use crate::ladder::EigenFamilyPair;
use crate::scalar::{re, C64};
use crate::space::{inner, Operator};

/// Minimum sequence length for a growth fit.
pub const MIN_NORMS: usize = 8;
/// Relative change of the consecutive-norm ratio that counts as drift.
pub const RATIO_DRIFT: f64 = 0.05;
/// Increments inspected when deciding whether `|γ_n|` diverges.
pub const GAMMA_WINDOW: usize = 32;
/// `|Γ(z)|` at or below this leaves the normalization unset.
pub const GAMMA_FLOOR: f64 = 1e-12;
/// Slack on the overlap check beyond the tail bound.
pub const OVERLAP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthRegime {
    /// Consecutive ratios have settled: the sequence is geometric.
    Settled,
    /// Ratios still rise: faster than any geometric rate.
    Growing,
    /// Ratios still fall: slower than any geometric rate.
    Decaying,
}

/// `norms[n] <= A r^n M_seq[n]`, equality at the largest `norms[n]/r^n`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthBound {
    pub a: f64,
    pub r: f64,
    pub m_seq: Vec<f64>,
    /// `lim M_n / M_{n+1}`; `0` for super-geometric growth, `inf` for
    /// sub-geometric decay.
    pub m_limit: f64,
    /// Relative drift of the ratio over the inspected tail.
    pub m_uncertainty: f64,
    pub regime: GrowthRegime,
    /// Set when the limit is a regime verdict rather than a settled value.
    pub flagged: bool,
    pub norms: Vec<f64>,
}

pub fn fit_growth_bound(norms: &[f64]) -> Result<GrowthBound, BicoherentError> {
    if norms.len() < MIN_NORMS {
        return Err(BicoherentError::TooFewNorms(norms.len()));
    }
    if let Some(i) = norms.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(BicoherentError::ZeroNorm(i));
    }
    let ratios: Vec<f64> = norms.windows(2).map(|w| w[1] / w[0]).collect();
    let last = ratios.len() - 1;
    let back = 8.min(last);
    let drift = ratios[last] / ratios[last - back] - 1.0;
    let regime = if drift > RATIO_DRIFT {
        GrowthRegime::Growing
    } else if drift < -RATIO_DRIFT {
        GrowthRegime::Decaying
    } else {
        GrowthRegime::Settled
    };
    let r = match regime {
        GrowthRegime::Decaying => 1.0,
        _ => ratios[last],
    };
    let a = norms.iter().enumerate().map(|(n, &v)| v / r.powi(n as i32)).fold(0.0, f64::max);
    let m_seq: Vec<f64> = norms.iter().enumerate().map(|(n, &v)| v / (a * r.powi(n as i32))).collect();
    let m_limit = match regime {
        GrowthRegime::Settled => m_seq[last] / m_seq[last + 1],
        GrowthRegime::Growing => 0.0,
        GrowthRegime::Decaying => f64::INFINITY,
    };
    Ok(GrowthBound {
        a,
        r,
        m_seq,
        m_limit,
        m_uncertainty: drift.abs(),
        regime,
        flagged: regime != GrowthRegime::Settled,
        norms: norms.to_vec(),
    })
}

/// `γ = lim |γ_n|`, read at the last index.
#[derive(Debug, Clone, Serialize)]
pub struct GammaLimit {
    pub value: f64,
    /// Geometric extrapolation of the remaining increments; `inf` if the
    /// increments do not shrink.
    pub slack: f64,
    pub divergent: bool,
    /// Fewer than `GAMMA_WINDOW` increments were available.
    pub short_window: bool,
}

pub fn gamma_limit(gamma: &[C64]) -> Result<GammaLimit, BicoherentError> {
    if gamma.is_empty() {
        return Err(BicoherentError::EmptyGamma);
    }
    if let Some(i) = gamma.iter().position(|g| g.norm() == 0.0) {
        return Err(BicoherentError::ZeroGamma(i));
    }
    let mags: Vec<f64> = gamma.iter().map(|g| g.norm()).collect();
    let last = *mags.last().expect("nonempty");
    if mags.len() < 3 {
        return Ok(GammaLimit { value: last, slack: f64::INFINITY, divergent: false, short_window: true });
    }
    let incr: Vec<f64> = mags.windows(2).map(|w| w[1] - w[0]).collect();
    let w = GAMMA_WINDOW.min(incr.len());
    let tail = &incr[incr.len() - w..];
    let sustained = tail.iter().all(|&d| d > 0.0);
    let k = (w - 1).max(1);
    let d_last = tail[w - 1].abs();
    let d_first = tail[w - 1 - k.min(w - 1)].abs();
    let rate = if d_first > 0.0 { (d_last / d_first).powf(1.0 / k as f64) } else { 0.0 };
    let slack = if d_last == 0.0 {
        0.0
    } else if rate < 1.0 {
        d_last * rate / (1.0 - rate)
    } else {
        f64::INFINITY
    };
    let divergent = sustained && (rate >= 1.0 || slack >= last);
    Ok(GammaLimit {
        value: if divergent { f64::INFINITY } else { last },
        slack,
        divergent,
        short_window: incr.len() < GAMMA_WINDOW,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusReport {
    pub rho: f64,
    /// `γ M(phi) / r_phi`, `M(psi) / r_psi`, `sqrt(γ)`.
    pub candidates: [f64; 3],
    /// The first candidate was `0 · inf` and came from the ratio test on
    /// `|γ_n| ‖phi_n‖ / ‖phi_{n+1}‖` instead.
    pub resolved_by_ratio: bool,
    pub gamma: GammaLimit,
}

/// Convergence radius of the pair of series.
pub fn radius(gamma: &[C64], bound_phi: &GrowthBound, bound_psi: &GrowthBound) -> Result<RadiusReport, BicoherentError> {
    let g = gamma_limit(gamma)?;
    let first = bound_phi.m_limit / bound_phi.r;
    let (c1, resolved_by_ratio) = if g.value.is_infinite() && first == 0.0 {
        (ratio_test(gamma, &bound_phi.norms), true)
    } else {
        (g.value * first, false)
    };
    let c2 = bound_psi.m_limit / bound_psi.r;
    let c3 = g.value.sqrt();
    Ok(RadiusReport { rho: c1.min(c2).min(c3), candidates: [c1, c2, c3], resolved_by_ratio, gamma: g })
}

/// `ρ = min{γ m_phi, m_psi, sqrt(γ)}` from precomputed limits, where
/// `m_phi = M(phi)/r_phi` and `m_psi = M(psi)/r_psi`.
pub fn radius_from_limits(gamma: f64, m_phi: f64, m_psi: f64) -> f64 {
    (gamma * m_phi).min(m_psi).min(gamma.sqrt())
}

/// Limit of `c_n = |γ_n| ‖phi_n‖ / ‖phi_{n+1}‖`: `inf` when the tail keeps
/// rising, otherwise the last value.
fn ratio_test(gamma: &[C64], norms: &[f64]) -> f64 {
    let n = gamma.len().min(norms.len().saturating_sub(1));
    let cs: Vec<f64> = (0..n).map(|k| gamma[k].norm() * norms[k] / norms[k + 1]).collect();
    let Some(&last) = cs.last() else { return 0.0 };
    let w = GAMMA_WINDOW.min(cs.len());
    let tail = &cs[cs.len() - w..];
    if w >= 2 && tail.windows(2).all(|p| p[1] > p[0]) {
        f64::INFINITY
    } else {
        last
    }
}

/// Partial sum of `Γ(z) = Σ |z|^{2n} / γ_{n-1}!` with `γ_{-1}! = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct GammaSeries {
    #[serde(with = "crate::scalar::serde_c64")]
    pub value: C64,
    /// `2 |t_{K-1}| ρ/(1-ρ)` with `ρ = |z|²/|γ_{K-1}|` (or the last
    /// available `γ`); `inf` if `ρ >= 1`.
    pub tail: f64,
    pub terms: usize,
    /// `|t_n|`, for monitoring convergence.
    pub term_moduli: Vec<f64>,
}

/// Uses `γ_0 .. γ_{n_terms-2}`; only `|z|` enters.
pub fn gamma_series(gamma: &[C64], z: C64, n_terms: usize) -> Result<GammaSeries, BicoherentError> {
    if n_terms == 0 {
        return Err(BicoherentError::TooManyTerms { needed: 0, available: gamma.len() + 1 });
    }
    if gamma.len() + 1 < n_terms {
        return Err(BicoherentError::TooManyTerms { needed: n_terms, available: gamma.len() + 1 });
    }
    if let Some(i) = gamma.iter().position(|g| g.norm() == 0.0) {
        return Err(BicoherentError::ZeroGamma(i));
    }
    let z2 = z.norm().powi(2);
    let mut term = re(1.0);
    let mut value = term;
    let mut term_moduli = vec![1.0];
    for g in gamma.iter().take(n_terms - 1) {
        term = term * z2 / g;
        value += term;
        term_moduli.push(term.norm());
    }
    let next = gamma.get(n_terms - 1).or(gamma.last());
    let tail = match next {
        None => 0.0,
        Some(g) => {
            let rho = z2 / g.norm();
            if z2 == 0.0 {
                0.0
            } else if rho < 1.0 {
                2.0 * term.norm() * rho / (1.0 - rho)
            } else {
                f64::INFINITY
            }
        }
    };
    Ok(GammaSeries { value, tail, terms: n_terms, term_moduli })
}

/// `α_0 = 1`, `α_{n+1} = α_n / conj(γ_n)` for `n < len - 1`.
pub fn coefficients(gamma: &[C64], len: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(len);
    out.push(re(1.0));
    for n in 1..len {
        out.push(out[n - 1] / gamma[n - 1].conj());
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct BiCoherentState {
    #[serde(with = "crate::scalar::serde_c64")]
    pub z: C64,
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub coeff_phi: Vec<C64>,
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub coeff_psi: Vec<C64>,
    pub gamma_z: GammaSeries,
    /// `1/Γ(z)`, set only when `|Γ(z)| > GAMMA_FLOOR`.
    #[serde(with = "crate::scalar::serde_opt_c64")]
    pub norm_product: Option<C64>,
    #[serde(with = "crate::scalar::serde_opt_c64")]
    pub n_phi: Option<C64>,
    #[serde(with = "crate::scalar::serde_opt_c64")]
    pub n_psi: Option<C64>,
    pub n_terms: usize,
    /// Largest of the relative tails of the two sums and of `Γ`.
    pub tail_bound: f64,
    /// `<phi(z), psi(z)>` with the normalization applied (raw sums otherwise).
    #[serde(with = "crate::scalar::serde_c64")]
    pub overlap: C64,
    pub overlap_ok: bool,
    #[serde(skip)]
    pub phi: DVector<C64>,
    #[serde(skip)]
    pub psi: DVector<C64>,
    /// `|z| ‖α_{K-1} z^{K-1} phi_{K-1}‖ / ‖Σ‖` and the `psi` analogue: what
    /// the cut series leaves in the eigenvalue equations.
    pub truncation_phi: f64,
    pub truncation_psi: f64,
    pub rho: f64,
}

impl BiCoherentState {
    pub fn normalized(&self) -> bool {
        self.norm_product.is_some()
    }
}

/// Growth fits, `γ` limit and radius for one family pair.
#[derive(Debug, Clone)]
pub struct BiCoherentFamily<'a> {
    pub pair: &'a EigenFamilyPair,
    pub gamma: Vec<C64>,
    pub bound_phi: GrowthBound,
    pub bound_psi: GrowthBound,
    pub radius: RadiusReport,
}

impl<'a> BiCoherentFamily<'a> {
    pub fn new(pair: &'a EigenFamilyPair, gamma: &[C64]) -> Result<Self, BicoherentError> {
        let bound_phi = fit_growth_bound(&pair.phi_norms())?;
        let bound_psi = fit_growth_bound(&pair.psi_norms())?;
        let radius = radius(gamma, &bound_phi, &bound_psi)?;
        Ok(BiCoherentFamily { pair, gamma: gamma.to_vec(), bound_phi, bound_psi, radius })
    }

    pub fn rho(&self) -> f64 {
        self.radius.rho
    }

    /// Partial sums over `n < n_terms`. Rejects `|z| >= ρ`.
    pub fn build_state(&self, z: C64, n_terms: usize) -> Result<BiCoherentState, BicoherentError> {
        let rho = self.rho();
        if z.norm() >= rho {
            return Err(BicoherentError::OutsideRadius { modulus: z.norm(), rho });
        }
        let available = self.pair.n_max + 1;
        if n_terms == 0 || n_terms > available || n_terms > self.gamma.len() + 1 {
            return Err(BicoherentError::TooManyTerms { needed: n_terms, available: available.min(self.gamma.len() + 1) });
        }
        let gamma_z = gamma_series(&self.gamma, z, n_terms)?;
        let coeff_phi = coefficients(&self.gamma, n_terms);
        let coeff_psi = vec![re(1.0); n_terms];
        let dim = self.pair.phi[0].len();
        let (mut phi, mut psi) = (DVector::zeros(dim), DVector::zeros(dim));
        let mut zn = re(1.0);
        let (mut last_phi, mut last_psi) = (0.0, 0.0);
        let (mut prev_phi, mut prev_psi) = (0.0, 0.0);
        for n in 0..n_terms {
            let tp = &self.pair.phi[n] * (coeff_phi[n] * zn);
            let ts = &self.pair.psi[n] * zn;
            (prev_phi, prev_psi) = (last_phi, last_psi);
            (last_phi, last_psi) = (tp.norm(), ts.norm());
            phi += tp;
            psi += ts;
            zn *= z;
        }
        let (phi_norm, psi_norm) = (phi.norm(), psi.norm());
        let truncation_phi = z.norm() * last_phi / phi_norm;
        let truncation_psi = z.norm() * last_psi / psi_norm;
        let geometric = |last: f64, prev: f64, total: f64| {
            if last == 0.0 {
                return 0.0;
            }
            let r = last / prev;
            if prev > 0.0 && r < 1.0 {
                2.0 * last * r / (1.0 - r) / total
            } else {
                f64::INFINITY
            }
        };
        let tail_bound = geometric(last_phi, prev_phi, phi_norm)
            .max(geometric(last_psi, prev_psi, psi_norm))
            .max(gamma_z.tail / gamma_z.value.norm());

        let g = gamma_z.value;
        let (norm_product, n_phi, n_psi) = if g.norm() > GAMMA_FLOOR {
            let m = g.norm().powf(-0.5);
            (Some(1.0 / g), Some(re(m)), Some(C64::from_polar(m, -g.arg())))
        } else {
            (None, None, None)
        };
        if let (Some(a), Some(b)) = (n_phi, n_psi) {
            phi *= a;
            psi *= b;
        }
        let overlap = inner(&phi, &psi);
        let overlap_ok = norm_product.is_some() && (overlap - 1.0).norm() <= tail_bound + OVERLAP_SLACK;
        Ok(BiCoherentState {
            z,
            coeff_phi,
            coeff_psi,
            gamma_z,
            norm_product,
            n_phi,
            n_psi,
            n_terms,
            tail_bound,
            overlap,
            overlap_ok,
            phi,
            psi,
            truncation_phi,
            truncation_psi,
            rho,
        })
    }
}

/// One-shot form of [`BiCoherentFamily::build_state`].
pub fn build_states(pair: &EigenFamilyPair, gamma: &[C64], z: C64, n_terms: usize) -> Result<BiCoherentState, BicoherentError> {
    BiCoherentFamily::new(pair, gamma)?.build_state(z, n_terms)
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResiduals {
    /// `‖T phi(z) - z phi(z)‖ / ‖phi(z)‖`
    pub residual_t: f64,
    /// `‖S† psi(z) - z psi(z)‖ / ‖psi(z)‖`
    pub residual_sdag: f64,
    /// Truncation estimate plus a rounding allowance.
    pub estimate_t: f64,
    pub estimate_sdag: f64,
    pub within_estimate: bool,
}

/// Rounding allowance added to the truncation estimates, times `cond_bound`.
pub const ROUNDING_ALLOWANCE: f64 = 1e-9;

pub fn verify_eigen(state: &BiCoherentState, t: &Operator, s: &Operator) -> EigenResiduals {
    let z = state.z;
    let rel = |op: &Operator, v: &DVector<C64>| {
        let n = v.norm();
        if n == 0.0 {
            0.0
        } else {
            (op.apply(v) - v * z).norm() / n
        }
    };
    let residual_t = rel(t, &state.phi);
    let residual_sdag = rel(&s.adjoint(), &state.psi);
    let allowance = ROUNDING_ALLOWANCE * t.space().cond_bound();
    let estimate_t = state.truncation_phi + allowance;
    let estimate_sdag = state.truncation_psi + allowance;
    EigenResiduals {
        residual_t,
        residual_sdag,
        estimate_t,
        estimate_sdag,
        within_estimate: residual_t <= estimate_t && residual_sdag <= estimate_sdag,
    }
}
