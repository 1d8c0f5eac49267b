//! Commands driven by the generic ladder engine.

use ladderlab::bicoherent::{verify_eigen, BiCoherentFamily};
use ladderlab::ladder::{
    build_families, classify as classify_triple, classify_adjoint, dual_route_spectrum, gamma_ladder, verify_lemma1,
    verify_power_identities,
};
use ladderlab::{Comparison, JsonComplex, C64};
use serde::Serialize;
use serde_json::{json, Map};

use super::{effective, suites};
use crate::args::GlobalArgs;
use crate::error::CliError;
use crate::report::{num, re_im, to_value, Report, Table};
use crate::scenario::{build_ladder, Check, Loaded, Settings};

const CLASSIFY_SUITES: [Check; 3] = [Check::Classification, Check::PowerIdentities, Check::Adjoint];
const SPECTRUM_SUITES: [Check; 4] = [Check::Families, Check::DualRoute, Check::GammaLadder, Check::Lemma1];
/// Powers checked when the scenario gives no `n_max`.
const DEFAULT_POWERS: usize = 3;
/// Cap on the default number of series terms.
const DEFAULT_TERMS: usize = 30;

fn comparison_row(table: &mut Table, name: &str, c: &Comparison) {
    table.push(vec![name.to_string(), num(c.deviation), num(c.tol), c.holds.to_string()]);
}

pub fn classify(loaded: &Loaded, g: &GlobalArgs) -> Result<(Report, Settings), CliError> {
    let sc = &loaded.scenario;
    let settings = Settings::resolve(Some(sc), g)?;
    let checks = suites(&sc.checks, &CLASSIFY_SUITES, &CLASSIFY_SUITES, "classify")?;
    let m = build_ladder(loaded, g, &settings)?;
    let tol = settings.tol;
    let mut report = Report::new("classify", m.kind, effective(&settings, &m.space));
    let mut table = Table::new(&["identity", "deviation", "tol", "holds"]);
    let mut result = Map::new();
    result.insert("lambda".into(), to_value(&JsonComplex::from(m.triple.lambda)));
    let mut passed = true;

    if checks.contains(&Check::Classification) {
        let c = classify_triple(&m.triple, tol);
        let d = &c.deviations;
        comparison_row(&mut table, "[H,S] = lambda S [T,S]", &d.r_lambda);
        comparison_row(&mut table, "[H,T] = lambda [S,T] T", &d.strong);
        comparison_row(&mut table, "[H,[T,S]] = 0", &d.commutes);
        report.note("in_r_lambda", c.in_r_lambda);
        report.note("in_r_lambda_strong", c.in_r_lambda_strong);
        report.note("commutes_with_ts", c.commutes_with_ts);
        report.note("max_deviation", num(c.max_deviation()));
        passed &= c.all_hold();
        result.insert("classification".into(), to_value(&c));
    }
    if checks.contains(&Check::PowerIdentities) {
        let n_pow = sc.n_max.unwrap_or(DEFAULT_POWERS.min(m.space.window()));
        let rows = verify_power_identities(&m.triple, n_pow, tol)?;
        for r in &rows {
            comparison_row(&mut table, &format!("[H,S^{}] (direct)", r.n), &r.direct);
            comparison_row(&mut table, &format!("[H,S^{}] (adjoint)", r.n), &r.adjoint);
            passed &= r.direct.holds && r.adjoint.holds;
        }
        result.insert("power_identities".into(), to_value(&rows));
    }
    if checks.contains(&Check::Adjoint) {
        let c = classify_adjoint(&m.triple, tol);
        comparison_row(&mut table, "[H+,S+] = conj(lambda) [T+,S+] S+", &c);
        passed &= c.holds;
        result.insert("adjoint".into(), to_value(&c));
    }

    report.passed = passed;
    report.result = result.into();
    report.table = table;
    Ok((report, settings))
}

pub fn spectrum(loaded: &Loaded, g: &GlobalArgs) -> Result<(Report, Settings), CliError> {
    let sc = &loaded.scenario;
    let settings = Settings::resolve(Some(sc), g)?;
    let checks = suites(&sc.checks, &SPECTRUM_SUITES, &SPECTRUM_SUITES, "spectrum")?;
    let m = build_ladder(loaded, g, &settings)?;
    let tol = settings.tol;
    let grounded = m.grounded()?;
    let triple = &grounded.triple;
    let n_max = sc.n_max.unwrap_or(m.space.window());
    let pair = build_families(triple, &grounded.seed, n_max, tol)?;
    let dual = dual_route_spectrum(&triple.h, &pair.energies)?;

    let mut report = Report::new("spectrum", m.kind, effective(&settings, &m.space));
    let mut result = Map::new();
    result.insert("shift".into(), to_value(&JsonComplex::from(grounded.shift)));
    let mut passed = true;
    report.note("n_max", pair.n_max);
    if let Some(k) = pair.early_stop {
        report.note("early_stop", k);
    }

    if checks.contains(&Check::Families) {
        passed &= pair.certificate.passed;
        report.note("family_certificate", pair.certificate.passed);
    }
    result.insert("families".into(), to_value(&pair));
    if checks.contains(&Check::DualRoute) {
        passed &= dual.passed;
        report.note("dual_route_max_deviation", num(dual.max_deviation));
        result.insert("dual_route".into(), to_value(&dual));
    }
    if checks.contains(&Check::GammaLadder) {
        let class = classify_triple(triple, tol);
        if class.in_r_lambda_strong {
            let gl = gamma_ladder(&pair, triple, tol)?;
            passed &= gl.passed;
            report.note("gamma_ladder", gl.passed);
            result.insert("gamma_ladder".into(), to_value(&gl));
        } else {
            // Only an explicit request turns a weak-class triple into a failure.
            passed &= !sc.checks.contains(&Check::GammaLadder);
            report.note("gamma_ladder", "skipped (not in the strong class)");
            result.insert("gamma_ladder".into(), json!({ "skipped": "not in the strong class" }));
        }
    }
    if checks.contains(&Check::Lemma1) {
        let l = verify_lemma1(&pair, &triple.t, &triple.s, tol)?;
        passed &= l.passed;
        report.note("lemma1_max_deviation", num(l.max_deviation));
        result.insert("lemma1".into(), to_value(&l));
    }

    let mut table = Table::new(&["n", "energy_re", "energy_im", "eig_re", "eig_im", "deviation", "mu_re", "mu_im"]);
    for row in &dual.rows {
        let [er, ei] = re_im(row.recursion);
        let [or, oi] = re_im(row.oracle);
        let [mr, mi] = re_im(pair.mu[row.n]);
        table.push(vec![row.n.to_string(), er, ei, or, oi, num(row.deviation), mr, mi]);
    }
    report.passed = passed;
    report.result = result.into();
    report.table = table;
    Ok((report, settings))
}

#[derive(Debug, Serialize)]
struct BicoherentRow {
    z: JsonComplex,
    within_radius: bool,
    /// `null` when the radius is unbounded.
    rho: f64,
    #[serde(rename = "Gamma")]
    gamma: Option<JsonComplex>,
    #[serde(rename = "residual_T")]
    residual_t: Option<f64>,
    #[serde(rename = "residual_Sdag")]
    residual_sdag: Option<f64>,
    n_terms: usize,
    tail_bound: Option<f64>,
    overlap: Option<JsonComplex>,
    overlap_ok: Option<bool>,
    within_estimate: Option<bool>,
}

pub fn bicoherent(
    loaded: &Loaded,
    g: &GlobalArgs,
    z_flags: &[C64],
    n_terms_flag: Option<usize>,
) -> Result<(Report, Settings), CliError> {
    let sc = &loaded.scenario;
    let settings = Settings::resolve(Some(sc), g)?;
    let zs: Vec<C64> = if z_flags.is_empty() { sc.z_grid.iter().copied().map(C64::from).collect() } else { z_flags.to_vec() };
    if zs.is_empty() {
        return Err(CliError::config("no z values: set `z_grid` or pass --z"));
    }
    if let Some(z) = zs.iter().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(CliError::config(format!("z = {z} is not finite")));
    }
    let m = build_ladder(loaded, g, &settings)?;
    let window = m.space.window();
    let n_terms = n_terms_flag.or(sc.n_terms).unwrap_or(DEFAULT_TERMS.min(window));
    let n_max = sc.n_max.unwrap_or(n_terms.min(window));
    if n_terms == 0 || n_terms > n_max + 1 {
        return Err(CliError::config(format!("n_terms = {n_terms} needs 1 <= n_terms <= n_max + 1 = {}", n_max + 1)));
    }
    let tol = settings.tol;
    let grounded = m.grounded()?;
    let triple = &grounded.triple;
    let pair = build_families(triple, &grounded.seed, n_max, tol)?;
    let mut report = Report::new("bicoherent", m.kind, effective(&settings, &m.space));

    if !classify_triple(triple, tol).in_r_lambda_strong {
        report.passed = false;
        report.note("gamma_ladder", "not in the strong class; no bi-coherent states");
        report.result = json!({ "skipped": "not in the strong class" });
        return Ok((report, settings));
    }
    let gl = gamma_ladder(&pair, triple, tol)?;
    let fam = BiCoherentFamily::new(&pair, &gl.gamma)?;
    let rho = fam.rho();
    let terms = n_terms.min(pair.n_max + 1);

    let mut passed = gl.passed;
    let mut rows = Vec::with_capacity(zs.len());
    let mut table = Table::new(&[
        "z_re", "z_im", "within_radius", "Gamma_re", "Gamma_im", "residual_T", "residual_Sdag", "tail_bound",
    ]);
    for &z in &zs {
        let [zr, zi] = re_im(z);
        if z.norm() >= rho {
            table.push(vec![zr, zi, "false".into(), "".into(), "".into(), "".into(), "".into(), "".into()]);
            rows.push(BicoherentRow {
                z: z.into(),
                within_radius: false,
                rho,
                gamma: None,
                residual_t: None,
                residual_sdag: None,
                n_terms: terms,
                tail_bound: None,
                overlap: None,
                overlap_ok: None,
                within_estimate: None,
            });
            continue;
        }
        let state = fam.build_state(z, terms)?;
        let res = verify_eigen(&state, &triple.t, &triple.s);
        passed &= res.within_estimate && state.overlap_ok;
        let [gr, gi] = re_im(state.gamma_z.value);
        table.push(vec![
            zr,
            zi,
            "true".into(),
            gr,
            gi,
            num(res.residual_t),
            num(res.residual_sdag),
            num(state.tail_bound),
        ]);
        rows.push(BicoherentRow {
            z: z.into(),
            within_radius: true,
            rho,
            gamma: Some(state.gamma_z.value.into()),
            residual_t: Some(res.residual_t),
            residual_sdag: Some(res.residual_sdag),
            n_terms: terms,
            tail_bound: Some(state.tail_bound),
            overlap: Some(state.overlap.into()),
            overlap_ok: Some(state.overlap_ok),
            within_estimate: Some(res.within_estimate),
        });
    }
    report.note("rho", num(rho));
    report.note("n_terms", terms);
    report.note("gamma_ladder", gl.passed);
    report.passed = passed;
    report.result = json!({
        "rho": rho,
        "rho_unbounded": rho.is_infinite(),
        "radius": to_value(&fam.radius),
        "gamma": to_value(&gl.gamma.iter().copied().map(JsonComplex::from).collect::<Vec<_>>()),
        "rows": to_value(&rows),
    });
    report.table = table;
    Ok((report, settings))
}
