//! Scenario files: strict JSON, resolved against the global flags.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ladderlab::dgha::{build_dgha_triple, build_model, parse_f, DghaTriple};
use ladderlab::ladder::{ground_state, shift_to_zero};
use ladderlab::nalgebra::DVector;
use ladderlab::quon::{build_quon_pair, QuonModel, QuonParams};
use ladderlab::space::{matrix_from_json, DEFAULT_TOL};
use ladderlab::{make_space, DressedSpace, DressingSpec, JsonComplex, LadderTriple, Operator, C64};
use serde::{Deserialize, Serialize};

use crate::args::{Format, GlobalArgs};
use crate::error::CliError;

pub const MIN_DIM: usize = 4;
pub const MAX_DIM: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default = "identity")]
    pub dressing: DressingSpec,
    /// Empty means the command's default suites.
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub z_grid: Vec<JsonComplex>,
    #[serde(default)]
    pub n_terms: Option<usize>,
    #[serde(default)]
    pub osc: Option<OscSpec>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

fn identity() -> DressingSpec {
    DressingSpec::Identity
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Quon {
        q: JsonComplex,
        #[serde(default)]
        alpha_rule: AlphaRule,
    },
    Dgha {
        f: String,
    },
    Graphene {
        v_f: f64,
        xi: f64,
        n_cut: usize,
    },
    /// Coordinate matrices of `H`, `T`, `S`; paths relative to the scenario.
    Imported {
        h: PathBuf,
        t: PathBuf,
        s: PathBuf,
        lambda: JsonComplex,
    },
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Quon { .. } => "quon",
            ModelSpec::Dgha { .. } => "dgha",
            ModelSpec::Graphene { .. } => "graphene",
            ModelSpec::Imported { .. } => "imported",
        }
    }
}

/// `"default"` (`α_n = 1/sqrt|[n]_q|`) or `{"explicit": [α_1, …, α_{dim-1}]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRule {
    #[default]
    Default,
    Explicit(Vec<JsonComplex>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Classification,
    PowerIdentities,
    Adjoint,
    Families,
    DualRoute,
    GammaLadder,
    Lemma1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscSpec {
    pub alpha: JsonComplex,
    pub beta: JsonComplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// A parsed scenario and the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub base: PathBuf,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let scenario: Scenario =
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { scenario, base })
}

/// Everything a command needs besides the model.
#[derive(Debug, Clone)]
pub struct Settings {
    pub tol: f64,
    pub seed: Option<u64>,
    pub dressing: DressingSpec,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub timestamp: bool,
}

impl Settings {
    pub fn resolve(scenario: Option<&Scenario>, global: &GlobalArgs) -> Result<Self, CliError> {
        let tol = global.tol.or(scenario.and_then(|s| s.tol)).unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::config(format!("tolerance must be positive and finite, got {tol}")));
        }
        let seed = global.seed.or(scenario.and_then(|s| s.seed));
        let dressing = scenario.map(|s| s.dressing.clone()).unwrap_or(DressingSpec::Identity);
        let output = scenario.and_then(|s| s.output.clone());
        Ok(Settings {
            tol,
            seed,
            dressing: with_seed(dressing, seed),
            out: global.out.clone().or(output.as_ref().and_then(|o| o.path.clone())),
            format: global.format.or(output.and_then(|o| o.format)).unwrap_or(Format::Json),
            timestamp: global.timestamp,
        })
    }
}

/// A random dressing takes the run's seed when one is given.
pub fn with_seed(spec: DressingSpec, seed: Option<u64>) -> DressingSpec {
    match (spec, seed) {
        (DressingSpec::RandomSeeded { target_cond, .. }, Some(seed)) => DressingSpec::RandomSeeded { seed, target_cond },
        (spec, _) => spec,
    }
}

pub fn check_dim(dim: usize) -> Result<usize, CliError> {
    if (MIN_DIM..=MAX_DIM).contains(&dim) {
        Ok(dim)
    } else {
        Err(CliError::config(format!("dimension {dim} outside [{MIN_DIM}, {MAX_DIM}]")))
    }
}

/// The flag wins over the scenario; one of them must be present.
pub fn required_dim(scenario: Option<usize>, flag: Option<usize>) -> Result<usize, CliError> {
    let dim = flag.or(scenario).ok_or_else(|| CliError::config("dimension missing: set `dim` or pass --dim"))?;
    check_dim(dim)
}

/// A dimension fixed by the model itself; any stated value must agree.
pub fn fixed_dim(actual: usize, scenario: Option<usize>, flag: Option<usize>) -> Result<usize, CliError> {
    for stated in [scenario, flag].into_iter().flatten() {
        if stated != actual {
            return Err(CliError::config(format!("model fixes dimension {actual}, but {stated} was requested")));
        }
    }
    check_dim(actual)
}

/// A model with a ladder triple, ready for the generic engine.
pub struct LadderModel {
    pub kind: &'static str,
    pub space: Arc<DressedSpace>,
    pub triple: LadderTriple,
    /// Zero-energy seed for the family; `None` until the ground state is needed.
    known_ground: Option<DVector<C64>>,
}

/// A shifted triple whose `H` annihilates `seed`.
pub struct Grounded {
    pub triple: LadderTriple,
    pub seed: DVector<C64>,
    /// `α` in `H - α`.
    pub shift: C64,
}

impl LadderModel {
    pub fn grounded(&self) -> Result<Grounded, CliError> {
        if let Some(seed) = &self.known_ground {
            return Ok(Grounded { triple: self.triple.clone(), seed: seed.clone(), shift: C64::new(0.0, 0.0) });
        }
        let (e0, v) = ground_state(&self.triple.h)?;
        let triple = self.triple.with_h(shift_to_zero(&self.triple.h, e0))?;
        Ok(Grounded { triple, seed: v, shift: e0 })
    }
}

pub fn build_quon(q: C64, alpha: &AlphaRule, space: &Arc<DressedSpace>) -> Result<QuonModel, CliError> {
    let dim = space.dim();
    let params = match alpha {
        AlphaRule::Default => QuonParams::with_default_alpha(q, dim)?,
        AlphaRule::Explicit(list) => {
            let alpha: Vec<C64> = list.iter().copied().map(C64::from).collect();
            QuonParams::with_alpha(q, &alpha, dim)?
        }
    };
    Ok(build_quon_pair(&params, space)?)
}

pub fn build_dgha(f: &str, space: &Arc<DressedSpace>, tol: f64) -> Result<DghaTriple, CliError> {
    let expr = parse_f(f).map_err(|e| CliError::config(format!("f = {f:?}: {e}")))?;
    let model = build_model(&expr, space.dim())?;
    if let Some(requested) = model.truncated_from {
        return Err(CliError::config(format!(
            "f = {f:?} overflows: only {} levels are finite, {requested} requested",
            model.dim
        )));
    }
    Ok(build_dgha_triple(&model, space, tol)?)
}

fn read_matrix(base: &Path, rel: &Path) -> Result<ladderlab::nalgebra::DMatrix<C64>, CliError> {
    let path = base.join(rel);
    let text = fs::read_to_string(&path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    matrix_from_json(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn build_ladder(loaded: &Loaded, global: &GlobalArgs, settings: &Settings) -> Result<LadderModel, CliError> {
    let sc = &loaded.scenario;
    match &sc.model {
        ModelSpec::Quon { q, alpha_rule } => {
            let dim = required_dim(sc.dim, global.dim)?;
            let space = make_space(dim, settings.dressing.clone())?;
            let model = build_quon(C64::from(*q), alpha_rule, &space)?;
            let triple = model.ladder_triple()?;
            Ok(LadderModel {
                kind: "quon",
                known_ground: Some(space.phi_basis(0)),
                space,
                triple,
            })
        }
        ModelSpec::Dgha { f } => {
            let dim = required_dim(sc.dim, global.dim)?;
            let space = make_space(dim, settings.dressing.clone())?;
            let d = build_dgha(f, &space, settings.tol)?;
            Ok(LadderModel {
                kind: "dgha",
                known_ground: Some(space.phi_basis(0)),
                triple: d.ladder_triple(),
                space,
            })
        }
        ModelSpec::Imported { h, t, s, lambda } => {
            let (h, t, s) = (read_matrix(&loaded.base, h)?, read_matrix(&loaded.base, t)?, read_matrix(&loaded.base, s)?);
            if t.nrows() != h.nrows() || s.nrows() != h.nrows() {
                return Err(CliError::config(format!(
                    "imported matrices disagree in size: H {}, T {}, S {}",
                    h.nrows(),
                    t.nrows(),
                    s.nrows()
                )));
            }
            let dim = fixed_dim(h.nrows(), sc.dim, global.dim)?;
            let space = make_space(dim, settings.dressing.clone())?;
            let op = |m| Operator::from_coords(&space, m).map_err(CliError::from);
            let triple = LadderTriple::new(op(&h)?, op(&t)?, op(&s)?, C64::from(*lambda))?;
            Ok(LadderModel { kind: "imported", space, triple, known_ground: None })
        }
        ModelSpec::Graphene { .. } => Err(CliError::config(
            "the graphene model has no ladder triple; use the `graphene` or `spectrum` command",
        )),
    }
}
