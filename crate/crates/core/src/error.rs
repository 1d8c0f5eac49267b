use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("dimension {0} is below the minimum of 4")]
    DimTooSmall(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("dressing scale {0} is zero or not finite")]
    ZeroScale(usize),
    #[error("target condition number {0} outside [1, 1e6]")]
    TargetCond(f64),
    #[error("dressing is ill-conditioned: condition number {0:e}")]
    IllConditioned(f64),
    #[error("V V^-1 deviates from I by {err:e} (condition number {cond:e})")]
    InverseCheck { err: f64, cond: f64 },
    #[error("operators live on different spaces")]
    SpaceMismatch,
    #[error("window {window} exceeds limit {limit}")]
    WindowTooLarge { window: usize, limit: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigError {
    #[error("Schur iteration did not converge")]
    NoConvergence,
    #[error("eigenvector back-substitution broke down at index {0}")]
    Breakdown(usize),
    #[error("eigenpair {index} residual {residual:e} exceeds contract")]
    Residual { index: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LadderError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error("n_max {n_max} exceeds window {window}")]
    NMaxTooLarge { n_max: usize, window: usize },
    #[error("seed vector is not annihilated by H: relative residual {0:e}")]
    NotGroundState(f64),
    #[error("seed vector is zero")]
    ZeroSeed,
    #[error("eigenvalues E_{n} and E_{m} are degenerate: gap {gap:e}")]
    Degenerate { n: usize, m: usize, gap: f64 },
    #[error("triple is not in the strong class: {0}")]
    NotStrong(String),
    #[error("family holds {available} vectors, {needed} needed")]
    FamilyTooShort { available: usize, needed: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BicoherentError {
    #[error("growth fit needs at least 8 norms, got {0}")]
    TooFewNorms(usize),
    #[error("norm {0} is zero or not finite")]
    ZeroNorm(usize),
    #[error("gamma sequence is empty")]
    EmptyGamma,
    #[error("gamma_{0} vanishes")]
    ZeroGamma(usize),
    #[error("|z| = {modulus} is outside the convergence radius {rho}")]
    OutsideRadius { modulus: f64, rho: f64 },
    #[error("{needed} terms requested but only {available} available")]
    TooManyTerms { needed: usize, available: usize },
    #[error(transparent)]
    Ladder(#[from] LadderError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuonError {
    #[error("q = -1 is excluded")]
    MinusOne,
    #[error("alpha_{0} vanishes or is not finite")]
    ZeroAlpha(usize),
    #[error("alpha sequence has {found} entries, {expected} needed")]
    AlphaLength { expected: usize, found: usize },
    #[error("[{0}]_q vanishes")]
    ZeroQNumber(usize),
    #[error("q is a root of unity of order {0}: spectrum degenerates")]
    RootOfUnity(usize),
    #[error("alpha or beta must be nonzero")]
    ZeroOscParam,
    #[error("family index {n_max} reaches the truncation at dimension {dim}")]
    Truncation { n_max: usize, dim: usize },
    #[error("q parameters dimension {params} does not match space dimension {space}")]
    DimMismatch { params: usize, space: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DghaError {
    #[error(transparent)]
    Parse(#[from] crate::dgha::expr::ParseError),
    #[error("dimension {0} is below the minimum of 4")]
    DimTooSmall(usize),
    #[error("epsilon sequence not strictly increasing at index {index}: {prev} -> {next}")]
    NotIncreasing { index: usize, prev: f64, next: f64 },
    #[error("f is not increasing near x = {x}: sampled slope {slope:e}")]
    NotMonotone { x: f64, slope: f64 },
    #[error("f is undefined at epsilon_{index} = {x}")]
    Undefined { index: usize, x: f64 },
    #[error("model truncated at {0} terms by overflow")]
    Truncated(usize),
    #[error("model dimension {model} does not match space dimension {space}")]
    DimMismatch { model: usize, space: usize },
    #[error("h is not the diagonal built from the epsilon table (deviation {0:e})")]
    NotSpectral(f64),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrapheneError {
    #[error("v_F and xi must be positive and finite")]
    Parameter,
    #[error("n_cut must be at least 2, got {0}")]
    Cutoff(usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Eig(#[from] EigError),
}
