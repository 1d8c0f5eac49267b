//! Commands tied to one concrete model, plus matrix import.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fs;
use std::path::Path;

use ladderlab::graphene::{eigenstructure, EigenTable, GrapheneParams};
use ladderlab::ladder::{build_families, classify, dual_route_spectrum, gamma_ladder, DUAL_ROUTE_TOL};
use ladderlab::quon::{build_oscillator, oscillator_energy, OscParams};
use ladderlab::scalar::rel_dev;
use ladderlab::space::{eig_matrix, matrix_from_json, matrix_to_json};
use ladderlab::{make_space, DressingSpec, C64};
use serde_json::json;

use super::effective;
use crate::args::GlobalArgs;
use crate::error::CliError;
use crate::report::{num, re_im, to_value, Effective, Report, Table};
use crate::scenario::{build_dgha, build_quon, check_dim, fixed_dim, required_dim, with_seed, Loaded, ModelSpec, Settings};

pub fn quon_osc(
    loaded: &Loaded,
    g: &GlobalArgs,
    alpha: Option<C64>,
    beta: Option<C64>,
) -> Result<(Report, Settings), CliError> {
    let sc = &loaded.scenario;
    let ModelSpec::Quon { q, alpha_rule } = &sc.model else {
        return Err(CliError::config(format!("quon-osc needs a quon model, got {}", sc.model.kind())));
    };
    let settings = Settings::resolve(Some(sc), g)?;
    let dim = required_dim(sc.dim, g.dim)?;
    let space = make_space(dim, settings.dressing.clone())?;
    let model = build_quon(C64::from(*q), alpha_rule, &space)?;
    let default = C64::new(FRAC_1_SQRT_2, 0.0);
    let osc = OscParams::new(
        alpha.or(sc.osc.map(|o| o.alpha.into())).unwrap_or(default),
        beta.or(sc.osc.map(|o| o.beta.into())).unwrap_or(default),
    )?;
    let o = build_oscillator(&model, osc, settings.tol)?;

    let q = model.q();
    let targets: Vec<C64> = (0..space.window()).map(|n| oscillator_energy(n, q)).collect();
    let spec = dual_route_spectrum(&o.big_h, &targets)?;
    let eig_tol = DUAL_ROUTE_TOL * space.cond_bound();
    let mut table = Table::new(&["n", "expected_re", "expected_im", "eig_re", "eig_im", "deviation"]);
    let mut eig_dev = 0.0f64;
    for row in &spec.rows {
        let d = rel_dev(row.oracle, row.recursion);
        eig_dev = eig_dev.max(d);
        let [er, ei] = re_im(row.recursion);
        let [or, oi] = re_im(row.oracle);
        table.push(vec![row.n.to_string(), er, ei, or, oi, num(d)]);
    }
    let eig_ok = eig_dev <= eig_tol;

    let mut report = Report::new("quon-osc", "quon", effective(&settings, &space));
    let r = &o.report;
    report.note("H = (q+1)N + 1", format!("{} (deviation {})", r.h_vs_number.holds, num(r.h_vs_number.deviation)));
    report.note(
        "[x,p] identity",
        format!("{} (deviation {})", r.commutator_identity.holds, num(r.commutator_identity.deviation)),
    );
    report.note("eigenvalues", format!("{eig_ok} (max relative deviation {})", num(eig_dev)));
    report.passed = r.h_vs_number.holds && r.commutator_identity.holds && eig_ok;
    report.result = json!({
        "osc": to_value(&osc),
        "h_vs_number": to_value(&r.h_vs_number),
        "commutator_identity": to_value(&r.commutator_identity),
        "eigenvalues": to_value(&spec.rows),
        "eigenvalue_max_deviation": eig_dev,
        "eigenvalue_tol": eig_tol,
    });
    report.table = table;
    Ok((report, settings))
}

pub fn dgha(
    loaded: Option<&Loaded>,
    g: &GlobalArgs,
    f_flag: Option<&str>,
    dressing_flag: Option<DressingSpec>,
) -> Result<(Report, Settings), CliError> {
    let sc = loaded.map(|l| &l.scenario);
    let scenario_f = match sc.map(|s| &s.model) {
        Some(ModelSpec::Dgha { f }) => Some(f.as_str()),
        Some(other) if f_flag.is_none() => {
            return Err(CliError::config(format!("dgha needs a dgha model or --f, got {}", other.kind())));
        }
        _ => None,
    };
    let f = f_flag.or(scenario_f).ok_or_else(|| CliError::config("dgha needs a scenario or --f"))?;
    let mut settings = Settings::resolve(sc, g)?;
    if let Some(d) = dressing_flag {
        settings.dressing = with_seed(d, settings.seed);
    }
    let dim = required_dim(sc.and_then(|s| s.dim), g.dim)?;
    let space = make_space(dim, settings.dressing.clone())?;
    let tol = settings.tol;
    let d = build_dgha(f, &space, tol)?;
    let triple = d.ladder_triple();
    let pair = build_families(&triple, &space.phi_basis(0), space.window(), tol)?;
    let class = classify(&triple, tol);
    // Outside the strong class there is no gamma ladder to report; that is a
    // failed identity, not a numerical breakdown.
    let gl = if class.in_r_lambda_strong { Some(gamma_ladder(&pair, &triple, tol)?) } else { None };
    let gaps = d.model.gaps();
    let constant_exact = gaps.windows(2).all(|w| w[0] == w[1]);
    let constant_extracted = gl.as_ref().map(|gl| gl.constant_gap(tol * space.cond_bound()));

    let mut table = Table::new(&["n", "eps", "energy_re", "energy_im", "gamma_re", "gamma_im"]);
    for (n, &eps) in d.model.eps.iter().enumerate() {
        let [er, ei] = pair.energies.get(n).map(|&e| re_im(e)).unwrap_or_default();
        let [gr, gi] = gl.as_ref().and_then(|gl| gl.gamma.get(n)).map(|&z| re_im(z)).unwrap_or_default();
        table.push(vec![n.to_string(), num(eps), er, ei, gr, gi]);
    }

    let mut report = Report::new("dgha", format!("dgha f = {f}"), effective(&settings, &space));
    report.note("relations", d.report.passed);
    report.note("family_certificate", pair.certificate.passed);
    report.note("strong_class", class.in_r_lambda_strong);
    report.note("gamma_ladder", gl.as_ref().is_some_and(|gl| gl.passed));
    report.note("constant_gap", constant_exact);
    report.passed = d.report.passed && pair.certificate.passed && gl.as_ref().is_some_and(|gl| gl.passed);
    report.result = json!({
        "model": to_value(&d.model),
        "eps_csv": d.model.eps_csv(),
        "relations": to_value(&d.report),
        "families": to_value(&pair),
        "classification": to_value(&class),
        "gamma_ladder": to_value(&gl),
        "constant_gap": { "exact": constant_exact, "extracted": constant_extracted },
    });
    report.table = table;
    Ok((report, settings))
}

/// Graphene parameters from flags over the scenario; `v_F` and `ξ` default to 1.
fn graphene_inputs(
    sc: Option<&crate::scenario::Scenario>,
    vf: Option<f64>,
    xi: Option<f64>,
    ncut: Option<usize>,
) -> Result<GrapheneParams, CliError> {
    let from_scenario = match sc.map(|s| &s.model) {
        Some(ModelSpec::Graphene { v_f, xi, n_cut }) => Some((*v_f, *xi, *n_cut)),
        Some(other) => return Err(CliError::config(format!("graphene needs a graphene model, got {}", other.kind()))),
        None => None,
    };
    let v_f = vf.or(from_scenario.map(|p| p.0)).unwrap_or(1.0);
    let x = xi.or(from_scenario.map(|p| p.1)).unwrap_or(1.0);
    let n_cut = ncut
        .or(from_scenario.map(|p| p.2))
        .ok_or_else(|| CliError::config("graphene needs n_cut (scenario or --ncut)"))?;
    Ok(GrapheneParams::new(v_f, x, n_cut)?)
}

fn graphene_setup(sc: Option<&crate::scenario::Scenario>, g: &GlobalArgs, params: &GrapheneParams) -> Result<(Settings, Effective), CliError> {
    let settings = Settings::resolve(sc, g)?;
    if settings.dressing != DressingSpec::Identity {
        return Err(CliError::config("the graphene model runs on the plain space; remove the dressing"));
    }
    let dim = 2 * params.n_cut * params.n_cut;
    fixed_dim(dim, sc.and_then(|s| s.dim), g.dim)?;
    let eff = Effective { tol: settings.tol, seed: settings.seed, dim, dressing: DressingSpec::Identity, cond_bound: 1.0 };
    Ok((settings, eff))
}

fn spectrum_tol(t: &EigenTable) -> f64 {
    DUAL_ROUTE_TOL * t.hk_norm.max(1.0)
}

pub fn graphene(
    loaded: Option<&Loaded>,
    g: &GlobalArgs,
    vf: Option<f64>,
    xi: Option<f64>,
    ncut: Option<usize>,
) -> Result<(Report, Settings), CliError> {
    let sc = loaded.map(|l| &l.scenario);
    let params = graphene_inputs(sc, vf, xi, ncut)?;
    let (settings, eff) = graphene_setup(sc, g, &params)?;
    let t = eigenstructure(&params)?;
    let mut table = Table::new(&["n1", "n2", "sign", "energy", "residual"]);
    for r in &t.rows {
        let sign = match r.sign {
            1 => "+",
            -1 => "-",
            _ => "0",
        };
        table.push(vec![r.n1.to_string(), r.n2.to_string(), sign.into(), num(r.energy), num(r.residual)]);
    }
    let residual_ok = t.max_residual <= settings.tol * t.hk_norm;
    let spec_tol = spectrum_tol(&t);
    let analytic_ok = t.analytic_match <= spec_tol;
    let symmetric = t.symmetry <= spec_tol;

    let mut report = Report::new("graphene", "graphene", eff);
    report.note("max_residual / |H_K|", num(t.max_residual / t.hk_norm));
    report.note("analytic_match", num(t.analytic_match));
    report.note("symmetry", num(t.symmetry));
    report.note("min_eigenvalue", num(t.min_eigenvalue));
    report.passed = residual_ok && analytic_ok && symmetric;
    report.result = json!({
        "table": to_value(&t),
        "spectrum_tol": spec_tol,
        "residual_ok": residual_ok,
        "analytic_ok": analytic_ok,
        "symmetric": symmetric,
    });
    report.table = table;
    Ok((report, settings))
}

/// `spectrum` on a graphene scenario: the eigensolver spectrum and its
/// symmetry. `None` for every other model.
pub fn graphene_spectrum(loaded: &Loaded, g: &GlobalArgs) -> Result<Option<(Report, Settings)>, CliError> {
    let sc = &loaded.scenario;
    if !matches!(sc.model, ModelSpec::Graphene { .. }) {
        return Ok(None);
    }
    let params = graphene_inputs(Some(sc), None, None, None)?;
    let (settings, eff) = graphene_setup(Some(sc), g, &params)?;
    let t = eigenstructure(&params)?;
    let spec_tol = spectrum_tol(&t);
    let mut table = Table::new(&["k", "eigenvalue"]);
    for (k, &e) in t.spectrum.iter().enumerate() {
        table.push(vec![k.to_string(), num(e)]);
    }
    let mut report = Report::new("spectrum", "graphene", eff);
    report.note("symmetry", num(t.symmetry));
    report.note("max_imag", num(t.max_imag));
    report.passed = t.symmetry <= spec_tol && t.max_imag <= spec_tol;
    report.result = json!({
        "spectrum": t.spectrum,
        "symmetry": t.symmetry,
        "max_imag": t.max_imag,
        "spectrum_tol": spec_tol,
        "min_eigenvalue": t.min_eigenvalue,
        "max_eigenvalue": t.max_eigenvalue,
    });
    report.table = table;
    Ok(Some((report, settings)))
}

pub fn import_matrix(file: &Path, g: &GlobalArgs) -> Result<(Report, Settings), CliError> {
    let settings = Settings::resolve(None, g)?;
    let text = fs::read_to_string(file).map_err(|e| CliError::config(format!("cannot read {}: {e}", file.display())))?;
    let m = matrix_from_json(&text).map_err(|e| CliError::config(format!("{}: {e}", file.display())))?;
    let dim = check_dim(m.nrows())?;
    if let Some(d) = g.dim.filter(|&d| d != dim) {
        return Err(CliError::config(format!("file holds a {dim}x{dim} matrix, --dim {d} requested")));
    }
    let lossless = matrix_from_json(&matrix_to_json(&m)).map(|back| back == m).unwrap_or(false);
    let e = eig_matrix(&m)?;
    let hermiticity = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut table = Table::new(&["k", "eig_re", "eig_im"]);
    for (k, &z) in e.values.iter().enumerate() {
        let [r, i] = re_im(z);
        table.push(vec![k.to_string(), r, i]);
    }
    let eff = Effective { tol: settings.tol, seed: settings.seed, dim, dressing: DressingSpec::Identity, cond_bound: 1.0 };
    let mut report = Report::new("import-matrix", "imported", eff);
    report.note("roundtrip_lossless", lossless);
    report.note("frobenius_norm", num(m.norm()));
    report.note("hermiticity", num(hermiticity));
    report.passed = lossless;
    report.result = json!({
        "roundtrip_lossless": lossless,
        "frobenius_norm": m.norm(),
        "hermiticity": hermiticity,
        "eig_max_residual": e.max_residual,
        "eigenvalues": e.values.iter().map(|&z| json!({ "re": z.re, "im": z.im })).collect::<Vec<_>>(),
    });
    report.table = table;
    Ok((report, settings))
}
