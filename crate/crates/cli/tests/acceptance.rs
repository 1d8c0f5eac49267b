//! Acceptance suite. Every test prints exactly one `criterion N ... PASS|FAIL`
//! line, visible without `--nocapture`, and then asserts on the same verdict.
//!
//! Expected values come from oracles written here (explicit power sums,
//! closed forms, direct iteration of `f`), never from the library routine
//! under test.

use std::f64::consts::{E, FRAC_1_SQRT_2, PI};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use ladderlab::bicoherent::{gamma_series, verify_eigen, BiCoherentFamily, OVERLAP_SLACK};
use ladderlab::dgha::{build_dgha_triple, build_model, parse_f};
use ladderlab::graphene::{eigenstructure, GrapheneParams};
use ladderlab::ladder::{build_families, classify, dual_route_spectrum, gamma_ladder, verify_lemma1, Provenance};
use ladderlab::quon::{build_oscillator, build_quon_pair, quon_families, OscParams, QuonModel, QuonParams};
use ladderlab::space::{inner, op_compare};
use ladderlab::{make_space, Basis, DressedSpace, DressingSpec, EigenFamilyPair, LadderTriple, Operator, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const QUON_DIM: usize = 24;
const QUON_COUNT: usize = 20;
const Q_SEED: u64 = 0x5eed_0001;
const DRESS_SEED: u64 = 0x5eed_0900;
const TARGET_COND: f64 = 100.0;
const DGHA_DIM: usize = 16;
const DGHA_FS: [&str; 3] = ["2*x+1", "x+3", "x + tanh(x) + 1"];

// ---------------------------------------------------------------- bookkeeping

/// Collects failed checks and the worst value/tolerance ratio seen.
#[derive(Default)]
struct Tally {
    failures: Vec<String>,
    worst: f64,
    checks: usize,
}

impl Tally {
    fn bound(&mut self, value: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        let ratio = value / tol;
        if ratio.is_nan() || ratio > self.worst {
            self.worst = if ratio.is_nan() { f64::INFINITY } else { ratio };
        }
        if !(value <= tol) {
            self.failures.push(format!("{}: {value:.3e} > {tol:.3e}", what()));
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn absorb(&mut self, prefix: &str, other: Tally) {
        self.checks += other.checks;
        self.worst = self.worst.max(other.worst);
        self.failures.extend(other.failures.into_iter().map(|f| format!("{prefix}: {f}")));
    }

    fn finish(self, n: u32, name: &str) {
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let mut text = format!(
            "criterion {n} ({name}): {verdict} [{} checks, worst {:.2e} of tolerance]\n",
            self.checks, self.worst
        );
        for f in self.failures.iter().take(8) {
            text.push_str(&format!("  {f}\n"));
        }
        // Straight to the handle: the harness captures `println!`, and the
        // verdict line belongs in the log even when the test passes.
        std::io::stdout().lock().write_all(text.as_bytes()).unwrap();
        assert!(self.failures.is_empty(), "criterion {n} failed with {} violations", self.failures.len());
    }
}

/// Plain or randomly dressed spaces; each model gets its own dressing seed.
#[derive(Clone, Copy)]
enum Dress {
    Plain,
    Random,
}

impl Dress {
    fn space(self, dim: usize, salt: u64) -> Arc<DressedSpace> {
        let spec = match self {
            Dress::Plain => DressingSpec::Identity,
            Dress::Random => DressingSpec::RandomSeeded { seed: DRESS_SEED + salt, target_cond: TARGET_COND },
        };
        make_space(dim, spec).expect("space")
    }
}

// -------------------------------------------------------------------- oracles

fn rel(actual: C64, expected: C64) -> f64 {
    (actual - expected).norm() / expected.norm().max(1.0)
}

fn pow_oracle(q: C64, n: usize) -> C64 {
    (0..n).fold(C64::new(1.0, 0.0), |acc, _| acc * q)
}

/// `[n]_q` as `(1 - q^n)/(1 - q)`, or the explicit power sum near `q = 1`.
fn qnum_oracle(n: usize, q: C64) -> C64 {
    if (q - 1.0).norm() < 0.05 {
        (0..n).map(|k| pow_oracle(q, k)).sum()
    } else {
        (C64::new(1.0, 0.0) - pow_oracle(q, n)) / (C64::new(1.0, 0.0) - q)
    }
}

fn quon_energy_oracle(n: usize, q: C64) -> C64 {
    (q + 1.0) * qnum_oracle(n, q)
}

/// `ε_0 = 0`, `ε_{n+1} = f(ε_n)` by direct iteration of a Rust closure.
fn eps_oracle(f: fn(f64) -> f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    while out.len() < len {
        let last = *out.last().unwrap();
        out.push(f(last));
    }
    out
}

fn dgha_closure(text: &str) -> fn(f64) -> f64 {
    match text {
        "2*x+1" => |x| 2.0 * x + 1.0,
        "x+3" => |x| x + 3.0,
        "x + tanh(x) + 1" => |x| x + x.tanh() + 1.0,
        _ => unreachable!(),
    }
}

/// Uniform over the annulus `r_min <= |q| <= r_max`, avoiding `-1` by more
/// than 0.1 and any `q` whose energies up to `n = 20` come within `1e-6` of
/// each other (which covers every root of unity of order `<= QUON_DIM`).
fn sample_qs(seed: u64, count: usize, r_min: f64, r_max: f64, need_gap: bool) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let u: f64 = rng.random();
        let r = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
        let theta = 2.0 * PI * rng.random::<f64>();
        let q = C64::from_polar(r, theta);
        if (q + 1.0).norm() <= 0.1 {
            continue;
        }
        let near_root = (1..=QUON_DIM).any(|k| (pow_oracle(q, k) - 1.0).norm() < 1e-6);
        if near_root {
            continue;
        }
        if need_gap {
            let e: Vec<C64> = (0..=20).map(|n| quon_energy_oracle(n, q)).collect();
            let close = (0..e.len()).any(|i| ((i + 1)..e.len()).any(|j| (e[i] - e[j]).norm() < 1e-6));
            if close {
                continue;
            }
        }
        out.push(q);
    }
    out
}

/// The shared q set of criteria 1 to 5.
fn quon_qs() -> Vec<C64> {
    sample_qs(Q_SEED, QUON_COUNT, 0.5, 1.2, true)
}

// ------------------------------------------------------------------- fixtures

struct Quon {
    space: Arc<DressedSpace>,
    model: QuonModel,
    triple: LadderTriple,
}

fn quon(q: C64, dim: usize, dress: Dress, salt: u64) -> Quon {
    let space = dress.space(dim, salt);
    let params = QuonParams::with_default_alpha(q, dim).expect("params");
    let model = build_quon_pair(&params, &space).expect("quon pair");
    let triple = model.ladder_triple().expect("triple");
    Quon { space, model, triple }
}

fn families(triple: &LadderTriple, space: &Arc<DressedSpace>, n_max: usize) -> EigenFamilyPair {
    build_families(triple, &space.phi_basis(0), n_max, 1e-10).expect("families")
}

// ------------------------------------------------------------------- criteria

fn crit1(dress: Dress) -> Tally {
    let mut t = Tally::default();
    let mut qs = quon_qs();
    // Classification needs no family, so the whole disk is sampled as well.
    qs.extend(sample_qs(Q_SEED + 1, QUON_COUNT, 0.0, 1.2, false));
    for (i, &q) in qs.iter().enumerate() {
        let m = quon(q, QUON_DIM, dress, i as u64);
        let cond = m.space.cond_bound();
        let report = classify(&m.triple, 1e-9);
        t.check(report.in_r_lambda && report.in_r_lambda_strong && report.commutes_with_ts, || {
            format!("q={q}: classification {:?}", report.deviations)
        });
        t.bound(report.max_deviation(), 1e-9 * cond, || format!("q={q}: max deviation"));
        let checks = m.model.checks(1e-9);
        t.bound(checks.qmutator.deviation, 1e-9 * cond, || format!("q={q}: [a,b]_q = 1"));
    }
    t
}

fn crit2(dress: Dress) -> Tally {
    let mut t = Tally::default();
    for (i, &q) in quon_qs().iter().enumerate() {
        let m = quon(q, QUON_DIM, dress, i as u64);
        let cond = m.space.cond_bound();
        let pair = families(&m.triple, &m.space, 20);
        t.check(pair.n_max == 20 && pair.provenance == Provenance::Recursion, || format!("q={q}: family length"));
        t.check(pair.certificate.passed, || format!("q={q}: family certificate {:?}", pair.certificate));
        let dual = dual_route_spectrum(&m.triple.h, &pair.energies).expect("eig");
        t.bound(dual.max_deviation, 1e-8 * cond, || format!("q={q}: recursion vs eigensolver"));
        for n in 0..=20 {
            let e = quon_energy_oracle(n, q);
            t.bound(rel(pair.energies[n], e), 1e-10 * cond, || format!("q={q} n={n}: recursion vs closed form"));
            t.bound(rel(dual.rows[n].oracle, e), 1e-10 * cond, || format!("q={q} n={n}: eigensolver vs closed form"));
        }
    }
    t
}

fn crit3(dress: Dress) -> Tally {
    let mut t = Tally::default();
    for (i, &q) in quon_qs().iter().enumerate() {
        let m = quon(q, QUON_DIM, dress, i as u64);
        let cond = m.space.cond_bound();
        let pair = families(&m.triple, &m.space, 20);
        let report = gamma_ladder(&pair, &m.triple, 1e-9).expect("strong class");
        t.check(report.passed, || format!("q={q}: ladder residual {:.3e}", report.max_residual));
        for n in 0..=18 {
            t.bound(rel(pair.mu[n], pow_oracle(q, n)), 1e-9 * cond, || format!("q={q} n={n}: mu"));
            let g = qnum_oracle(n + 1, q).conj();
            t.bound(rel(report.gamma[n], g), 1e-9 * cond, || format!("q={q} n={n}: gamma"));
        }
    }
    t
}

fn lemma1_checks(t: &mut Tally, label: &str, pair: &EigenFamilyPair, a: &Operator, b: &Operator, cond: f64) {
    let report = verify_lemma1(pair, a, b, 1e-9).expect("lemma 1");
    for row in &report.rows {
        let n = row.n;
        t.bound(row.deviation, 1e-9 * cond, || format!("{label} n={n}: eigenvalue vs -conj(mu)"));
        t.bound(row.eigen_residual, 1e-9 * cond, || format!("{label} n={n}: eigen residual"));
        t.bound(row.expectation_gap, 1e-9 * cond, || format!("{label} n={n}: expectation gap"));
    }
}

fn crit4(dress: Dress) -> Tally {
    let mut t = Tally::default();
    for (i, &q) in quon_qs().iter().enumerate() {
        let m = quon(q, QUON_DIM, dress, i as u64);
        let pair = families(&m.triple, &m.space, 20);
        lemma1_checks(&mut t, &format!("quon q={q}"), &pair, &m.model.a, &m.model.b, m.space.cond_bound());
    }
    for (i, text) in DGHA_FS.iter().enumerate() {
        let space = dress.space(DGHA_DIM, 100 + i as u64);
        let model = build_model(&parse_f(text).unwrap(), DGHA_DIM).unwrap();
        let d = build_dgha_triple(&model, &space, 1e-9).unwrap();
        let pair = families(&d.ladder_triple(), &space, DGHA_DIM - 2);
        lemma1_checks(&mut t, &format!("dgha {text}"), &pair, &d.a, &d.b, space.cond_bound());
    }
    t
}

fn crit5(dress: Dress) -> Tally {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(Q_SEED + 5);
    for (i, &q) in quon_qs().iter().enumerate() {
        let m = quon(q, QUON_DIM, dress, i as u64);
        let cond = m.space.cond_bound();
        let mut param = || C64::from_polar(0.5 + rng.random::<f64>(), 2.0 * PI * rng.random::<f64>());
        let osc = OscParams::new(param(), param()).unwrap();
        let o = build_oscillator(&m.model, osc, 1e-10).unwrap();
        t.bound(o.report.h_vs_number.deviation, 1e-10 * cond, || format!("q={q}: H vs (q+1)N + 1"));
        t.bound(o.report.commutator_identity.deviation, 1e-9 * cond, || format!("q={q}: [x,p] identity"));
        let window = m.space.window();
        let targets: Vec<C64> = (0..window).map(|n| 2.0 * qnum_oracle(n, q) + pow_oracle(q, n)).collect();
        let spec = dual_route_spectrum(&o.big_h, &targets).expect("eig");
        for row in &spec.rows {
            let n = row.n;
            t.bound(rel(row.oracle, row.recursion), 1e-9 * cond, || format!("q={q} n={n}: eigenvalue vs 2[n]+q^n"));
        }
    }
    let m = quon(C64::new(1.0, 0.0), QUON_DIM, dress, 999);
    let cond = m.space.cond_bound();
    let osc = OscParams::new(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)).unwrap();
    let o = build_oscillator(&m.model, osc, 1e-12).unwrap();
    let xp = o.xp_commutator();
    let i_id = Operator::identity(&m.space).scale(C64::new(0.0, 1.0));
    let hint = (&o.x * &o.p).norm();
    let cmp = op_compare(&xp, &i_id, Basis::Phi, m.space.window(), 1e-12, hint).unwrap();
    t.bound(cmp.deviation, 1e-12 * cond, || "q=1: [x,p] = i".to_string());
    t
}

fn crit6(dress: Dress) -> Tally {
    let mut t = Tally::default();
    for (i, text) in DGHA_FS.iter().enumerate() {
        let space = dress.space(DGHA_DIM, 100 + i as u64);
        let cond = space.cond_bound();
        let model = build_model(&parse_f(text).unwrap(), DGHA_DIM).unwrap();
        let oracle = eps_oracle(dgha_closure(text), DGHA_DIM + 1);
        t.check(model.truncated_from.is_none() && model.dim == DGHA_DIM, || format!("{text}: truncated"));
        t.check(model.eps.windows(2).all(|w| w[1] > w[0]) && model.certificate.min_slope > 0.0, || {
            format!("{text}: not monotone")
        });
        for (n, (&a, &e)) in model.eps_extended().iter().zip(&oracle).enumerate() {
            t.bound((a - e).abs() / e.abs().max(1.0), 1e-14, || format!("{text} n={n}: eps"));
        }

        let d = build_dgha_triple(&model, &space, 1e-9).unwrap();
        for (name, c) in [("hb = b f(h)", &d.report.hb), ("ah = f(h) a", &d.report.ah), ("[a,b] = f(h) - h", &d.report.ab)] {
            t.bound(c.deviation, 1e-9 * cond, || format!("{text}: {name}"));
        }

        let triple = d.ladder_triple();
        let pair = families(&triple, &space, DGHA_DIM - 2);
        t.check(pair.certificate.passed, || format!("{text}: family certificate {:?}", pair.certificate));
        for n in 0..=pair.n_max {
            t.bound(rel(pair.energies[n], C64::new(oracle[n], 0.0)), 1e-9 * cond, || format!("{text} n={n}: E_n"));
        }
        let gl = gamma_ladder(&pair, &triple, 1e-9).expect("strong class");
        t.check(gl.passed, || format!("{text}: ladder residual {:.3e}", gl.max_residual));
        for (n, &g) in gl.gamma.iter().enumerate() {
            t.bound(rel(g, C64::new(oracle[n + 1], 0.0)), 1e-9 * cond, || format!("{text} n={n}: gamma"));
        }

        let expect_constant = *text == "x+3";
        let gaps = model.gaps();
        let exact = gaps.windows(2).all(|w| w[0] == w[1]);
        t.check(exact == expect_constant, || format!("{text}: exact constant gap {exact}"));
        let extracted = gl.constant_gap(1e-9 * cond);
        t.check(extracted == expect_constant, || format!("{text}: extracted constant gap {extracted}"));
    }
    t
}

fn bicoherent_checks(t: &mut Tally, label: &str, q: C64, n_terms: usize, radius_fraction: f64, z_cap: f64) {
    let dim = 40;
    let m = quon(q, dim, Dress::Plain, 0);
    let pair = families(&m.triple, &m.space, n_terms);
    let gl = gamma_ladder(&pair, &m.triple, 1e-9).expect("strong class");
    let fam = BiCoherentFamily::new(&pair, &gl.gamma).expect("family");
    let rho = fam.rho();
    let z_max = (radius_fraction * rho).min(z_cap);
    t.check(z_max > 0.0, || format!("{label}: radius {rho}"));
    for k in 1..=4 {
        let modulus = z_max * k as f64 / 4.0;
        for phase in [0.0, 1.0, 2.5, 4.0] {
            let z = C64::from_polar(modulus, phase);
            let s = fam.build_state(z, n_terms).expect("state");
            let r = verify_eigen(&s, &m.model.a, &m.model.b);
            t.bound(r.residual_t.max(r.residual_sdag), 1e-6, || format!("{label} z={z:.3}: eigen residual"));
            t.bound((s.overlap - 1.0).norm(), s.tail_bound + OVERLAP_SLACK, || format!("{label} z={z:.3}: overlap"));
            t.check(s.coeff_psi.iter().all(|&c| c == C64::new(1.0, 0.0)), || format!("{label}: psi coefficients"));
            for n in 0..n_terms - 1 {
                // One division then one multiplication: a few ulps at most.
                let back = s.coeff_phi[n + 1] * gl.gamma[n].conj();
                let ulps = 4.0 * f64::EPSILON * s.coeff_phi[n].norm();
                t.bound((back - s.coeff_phi[n]).norm(), ulps, || format!("{label} n={n}: coefficient recursion"));
            }
        }
    }
}

// ----------------------------------------------------------------------- tests

#[test]
fn criterion_1_quon_classification() {
    crit1(Dress::Plain).finish(1, "quon classification");
}

#[test]
fn criterion_2_dual_route_spectrum() {
    crit2(Dress::Plain).finish(2, "dual-route spectrum");
}

#[test]
fn criterion_3_mu_gamma_closed_forms() {
    crit3(Dress::Plain).finish(3, "mu/gamma closed forms");
}

#[test]
fn criterion_4_dual_commutator_eigenvalues() {
    crit4(Dress::Plain).finish(4, "dual commutator eigenvalues");
}

#[test]
fn criterion_5_deformed_oscillator() {
    crit5(Dress::Plain).finish(5, "deformed oscillator");
}

#[test]
fn criterion_6_dgha_end_to_end() {
    crit6(Dress::Plain).finish(6, "dgha end to end");
}

#[test]
fn criterion_7_bicoherent_states() {
    let mut t = Tally::default();
    let m = quon(C64::new(1.0, 0.0), 40, Dress::Plain, 0);
    let pair = families(&m.triple, &m.space, 38);
    let gl = gamma_ladder(&pair, &m.triple, 1e-9).expect("strong class");
    for phase in [0.0, 0.7, 2.0, PI] {
        let g = gamma_series(&gl.gamma, C64::from_polar(1.0, phase), 30).unwrap();
        t.bound((g.value - E).norm(), 1e-10, || format!("Gamma at |z|=1, phase {phase}"));
        t.bound(g.tail, 1e-10, || "certified tail".to_string());
        t.bound((g.value - E).norm(), g.tail + 1e-14, || "Gamma within tail".to_string());
    }
    // Infinite radius: the grid is capped at |z| = 2.
    bicoherent_checks(&mut t, "pseudo-boson", C64::new(1.0, 0.0), 30, 0.5, 2.0);
    // Finite radius sqrt(5).
    bicoherent_checks(&mut t, "quon q=0.8", C64::new(0.8, 0.0), 30, 0.5, f64::INFINITY);
    t.finish(7, "bi-coherent states");
}

#[test]
fn criterion_8_graphene() {
    let mut t = Tally::default();
    let params = GrapheneParams::new(1.0, 1.0, 8).unwrap();
    let table = eigenstructure(&params).unwrap();
    t.bound(table.analytic_match, 1e-9, || "analytic vs eigensolver".to_string());
    for row in &table.rows {
        let (n1, n2) = (row.n1, row.n2);
        t.bound((row.norm - 1.0).abs(), 1e-12, || format!("({n1},{n2}) norm"));
        t.bound(row.residual, 1e-10 * table.hk_norm, || format!("({n1},{n2}) residual"));
        let expected = 2.0 * (n2 as f64).sqrt() * row.sign as f64;
        t.bound((row.energy - expected).abs(), 1e-12, || format!("({n1},{n2}) closed-form energy"));
    }
    t.bound(table.symmetry, 1e-9, || "spectrum symmetry".to_string());
    let mins: Vec<f64> = (6..=10)
        .map(|n| eigenstructure(&GrapheneParams::new(1.0, 1.0, n).unwrap()).unwrap().min_eigenvalue)
        .collect();
    t.check(mins.windows(2).all(|w| w[1] < w[0]), || format!("minimum eigenvalues {mins:?}"));
    for (k, &m) in mins.iter().enumerate() {
        let n_cut = 6 + k;
        t.bound((m + 2.0 * ((n_cut - 1) as f64).sqrt()).abs(), 1e-9, || format!("n_cut={n_cut}: min eigenvalue"));
    }
    t.finish(8, "graphene");
}

#[test]
fn criterion_9_dressing_robustness() {
    let mut t = Tally::default();
    for (name, tally) in [
        ("(1)", crit1(Dress::Random)),
        ("(2)", crit2(Dress::Random)),
        ("(3)", crit3(Dress::Random)),
        ("(4)", crit4(Dress::Random)),
        ("(5)", crit5(Dress::Random)),
        ("(6)", crit6(Dress::Random)),
    ] {
        t.absorb(name, tally);
    }
    for (i, &q) in quon_qs().iter().enumerate() {
        let m = quon(q, QUON_DIM, Dress::Random, i as u64);
        let space = &m.space;
        let cond = space.cond_bound();
        t.bound(cond, TARGET_COND, || format!("q={q}: condition number"));
        let dim = space.dim();
        let (mut biorth, mut gram) = (0.0f64, 0.0f64);
        for n in 0..dim {
            for k in 0..dim {
                let delta = if n == k { 1.0 } else { 0.0 };
                biorth = biorth.max((inner(&space.phi_basis(n), &space.psi_basis(k)) - delta).norm());
                gram = gram.max((inner(&space.phi_basis(n), &space.phi_basis(k)) - delta).norm());
            }
        }
        t.bound(biorth, 1e-8, || format!("q={q}: <phi_n, psi_m> = delta"));
        t.check(gram > 1e-2, || format!("q={q}: phi basis is orthonormal ({gram:.2e})"));
        let fam = quon_families(&m.model, 20, 1e-10).unwrap();
        t.bound(fam.certificate.biorth, 1e-8, || format!("q={q}: <Phi_n, Psi_m> = delta"));
    }
    t.finish(9, "dressing robustness");
}

// ------------------------------------------------------------ reproducibility

/// Golden scenarios with the command that runs them and the exit code owed.
const GOLDEN: [(&str, &str, i32); 14] = [
    ("classify", "quon_classify.json", 0),
    ("spectrum", "quon_spectrum.json", 0),
    ("spectrum", "dgha_spectrum.json", 0),
    ("bicoherent", "pseudo_boson_bicoherent.json", 0),
    ("bicoherent", "quon_bicoherent_radius.json", 0),
    ("quon-osc", "quon_osc.json", 0),
    ("graphene", "graphene.json", 0),
    ("spectrum", "graphene.json", 0),
    ("classify", "imported_quon.json", 0),
    ("spectrum", "imported_quon.json", 0),
    ("classify", "imported_perturbed.json", 1),
    ("classify", "unknown_key.json", 2),
    ("classify", "imported_missing.json", 2),
    ("spectrum", "imported_degenerate.json", 3),
];
const CLI_SEED: &str = "20261018";

fn golden(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name).display().to_string()
}

/// Runs the binary; returns the exit code and the bytes written to `out`.
fn run_cli(args: &[&str], out: &Path) -> (i32, Option<Vec<u8>>) {
    let status = Command::new(env!("CARGO_BIN_EXE_ladderlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status;
    (status.code().unwrap_or(-1), fs::read(out).ok())
}

fn without_timestamp(bytes: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).expect("report is JSON");
    let stamp = v.as_object_mut().and_then(|m| m.remove("generated_at"));
    assert!(stamp.is_some_and(|s| s.is_u64()), "--timestamp adds generated_at");
    v
}

#[test]
fn criterion_10_cli_reproducibility() {
    let mut t = Tally::default();
    let dir = tempfile::tempdir().unwrap();
    let mut codes = Vec::new();
    for (i, (cmd, file, want)) in GOLDEN.iter().enumerate() {
        let path = golden(file);
        let label = format!("{cmd} {file}");
        for format in ["json", "csv", "human"] {
            let args = [*cmd, path.as_str(), "--seed", CLI_SEED, "--format", format];
            let (a_code, a) = run_cli(&args, &dir.path().join(format!("{i}_{format}_a")));
            let (b_code, b) = run_cli(&args, &dir.path().join(format!("{i}_{format}_b")));
            t.check(a_code == *want && b_code == *want, || format!("{label} ({format}): exit {a_code}/{b_code}, want {want}"));
            if *want <= 1 {
                t.check(a.is_some() && a == b, || format!("{label} ({format}): reports differ or are missing"));
            } else {
                t.check(a.is_none(), || format!("{label} ({format}): report written on exit {want}"));
            }
            if format == "json" {
                codes.push(a_code);
                if let (Some(plain), true) = (&a, *want <= 1) {
                    let stamped_args = [*cmd, path.as_str(), "--seed", CLI_SEED, "--timestamp"];
                    let (code, stamped) = run_cli(&stamped_args, &dir.path().join(format!("{i}_stamped")));
                    let same = stamped.is_some_and(|s| {
                        without_timestamp(&s) == serde_json::from_slice::<serde_json::Value>(plain).unwrap()
                    });
                    t.check(code == *want && same, || format!("{label}: timestamped report differs beyond generated_at"));
                }
            }
        }
    }
    for code in 0..=3 {
        t.check(codes.contains(&code), || format!("no golden scenario exercises exit {code}"));
    }
    t.finish(10, "CLI reproducibility");
}
