use std::fmt::Write as _;

use lgfrob::hm::{
    check_wdvv, frobenius_manifold_from_deformation, has_universal_shape, hm_extend,
    universal_choices, universal_good_deformation, HmDeformation,
};
use lgfrob::jacobi::{monomial_basis, spectrum_is_symmetric, JacobiAlgebra};
use lgfrob::json::{polymat_json, structure_from_str, structure_to_json};
use lgfrob::newton::{
    is_nondegenerate_with, milnor_number, newton_polyhedron, subdiagram_monomials, NondegOptions,
    NondegeneracyReport,
};
use lgfrob::oracle::{candidate_levels, graded_dim, jacobi_dim};
use lgfrob::rational::{fmt_q, q};
use lgfrob::structure::{
    build_canonical_structure_with, build_good_maximal_deformation, check_gc, check_ic,
    classify_deformation, is_good_structure, verify_structure_relations, FrobTypeStructure,
    RelationReport, SubdiagramDeformation,
};
use lgfrob::{parse_laurent, Error, LaurentPoly, Poly, Result, Q};
use serde_json::{json, Value};

use crate::format;
use crate::Config;

pub struct Report {
    pub text: String,
    pub json: Value,
    /// False when a verification step failed; the process then exits with 4.
    pub ok: bool,
}

fn parse_input(cfg: &Config) -> Result<LaurentPoly> {
    let text = cfg
        .poly
        .as_deref()
        .ok_or_else(|| Error::Input("no polynomial given".into()))?;
    parse_laurent(text, cfg.n)
}

fn nondeg_options(cfg: &Config) -> NondegOptions {
    NondegOptions {
        trials: cfg.trials,
        seed: cfg.seed,
    }
}

fn describe_nondeg(rep: &NondegeneracyReport) -> String {
    match rep {
        NondegeneracyReport::NondegenerateExact => "yes (exact)".into(),
        NondegeneracyReport::NondegenerateProbabilistic { trials, prime } => {
            format!("yes (randomized, {trials} trials mod {prime})")
        }
        NondegeneracyReport::Degenerate(w) => {
            format!("no (critical face part, certificate {})", w.certificate)
        }
        NondegeneracyReport::Unknown => "undecided".into(),
    }
}

/// Parses the polynomial and insists on convenience and nondegeneracy.
fn checked_input(cfg: &Config) -> Result<(LaurentPoly, NondegeneracyReport)> {
    let f = parse_input(cfg)?;
    let p = newton_polyhedron(&f)?;
    if !p.is_convenient() {
        return Err(Error::Precondition("polynomial is not convenient".into()));
    }
    let rep = is_nondegenerate_with(&f, nondeg_options(cfg))?;
    match rep {
        NondegeneracyReport::Degenerate(_) => Err(Error::Precondition(format!(
            "polynomial is degenerate: {}",
            describe_nondeg(&rep)
        ))),
        NondegeneracyReport::Unknown => Err(Error::Precondition(
            "nondegeneracy undecided; rerun with --trials > 0".into(),
        )),
        _ => Ok((f, rep)),
    }
}

fn deformation(cfg: &Config, f: &LaurentPoly) -> Result<SubdiagramDeformation> {
    if cfg.deform.trim() == "good-max" {
        return build_good_maximal_deformation(f);
    }
    let gs: Vec<LaurentPoly> = cfg
        .deform
        .split(',')
        .map(|g| parse_laurent(g.trim(), f.n()))
        .collect::<Result<_>>()?;
    classify_deformation(f, &gs)
}

/// Builds the structure from the polynomial, or reads it from `--structure`.
fn load_structure(cfg: &Config) -> Result<(Option<SubdiagramDeformation>, FrobTypeStructure)> {
    if let Some(path) = &cfg.structure {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        return Ok((None, structure_from_str(&text)?));
    }
    let (f, _) = checked_input(cfg)?;
    let d = deformation(cfg, &f)?;
    let s = build_canonical_structure_with(&d, cfg.budget)?;
    Ok((Some(d), s))
}

fn extend(s: &FrobTypeStructure, order: usize) -> Result<HmDeformation> {
    if is_good_structure(s) {
        universal_good_deformation(s, order)
    } else {
        hm_extend(s, &universal_choices(s.r, s.mu), order)
    }
}

fn relations_json(rep: &RelationReport) -> Value {
    serde_json::to_value(&rep.checks).expect("serializable")
}

fn relations_text(rep: &RelationReport) -> String {
    let passed = rep.checks.iter().filter(|c| c.passed).count();
    let mut out = format!("relations: {passed}/{} passed\n", rep.checks.len());
    for c in rep.checks.iter().filter(|c| !c.passed) {
        let _ = writeln!(
            out,
            "  FAILED {}: {}",
            c.name,
            c.witness.as_deref().unwrap_or("")
        );
    }
    out
}

fn q_strings(xs: &[Q]) -> Vec<String> {
    xs.iter().map(fmt_q).collect()
}

pub fn analyze(cfg: &Config) -> Result<Report> {
    let f = parse_input(cfg)?;
    let p = newton_polyhedron(&f)?;
    if !p.is_convenient() {
        return Err(Error::Precondition("polynomial is not convenient".into()));
    }
    let nd = is_nondegenerate_with(&f, nondeg_options(cfg))?;
    if let NondegeneracyReport::Degenerate(_) = nd {
        return Err(Error::Precondition(format!(
            "polynomial is degenerate: {}",
            describe_nondeg(&nd)
        )));
    }
    let mu = milnor_number(&p)?;
    let deg = p.degree_fn()?;
    let sub = subdiagram_monomials(&deg);
    let (_, alpha) = monomial_basis(&f)?;

    let facets: Vec<Value> = p
        .facets
        .iter()
        .map(|fc| {
            json!({
                "form": q_strings(&fc.form),
                "points": fc.points.iter().map(|&i| p.points[i].clone()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let json = json!({
        "command": "analyze",
        "f": f.to_text(),
        "n": f.n(),
        "polyhedron": { "vertices": p.vertices, "facets": facets },
        "convenient": true,
        "nondegeneracy": serde_json::to_value(&nd).expect("serializable"),
        "mu": mu,
        "nu": sub.len(),
        "subdiagram_monomials": sub,
        "spectrum": q_strings(&alpha),
    });

    let mut t = String::new();
    let _ = writeln!(t, "f = {}", f.to_text());
    let _ = writeln!(t, "n = {}", f.n());
    let verts: Vec<String> = p.vertices.iter().map(|v| format!("{v:?}")).collect();
    let _ = writeln!(t, "vertices: {}", verts.join(" "));
    for fc in &p.facets {
        let pts: Vec<String> = fc
            .points
            .iter()
            .map(|&i| format!("{:?}", p.points[i]))
            .collect();
        let _ = writeln!(
            t,
            "facet ({}) through {}",
            format::q_list(&fc.form),
            pts.join(" ")
        );
    }
    let _ = writeln!(t, "convenient: yes");
    let _ = writeln!(t, "nondegenerate: {}", describe_nondeg(&nd));
    let _ = writeln!(t, "mu = {mu}");
    let subs: Vec<String> = sub.iter().map(format::monomial).collect();
    let _ = writeln!(
        t,
        "subdiagram monomials (nu = {}): {}",
        sub.len(),
        subs.join(", ")
    );
    let _ = writeln!(t, "spectrum: {}", format::q_list(&alpha));
    Ok(Report {
        text: t,
        json,
        ok: true,
    })
}

pub fn spectrum(cfg: &Config) -> Result<Report> {
    let (f, _) = checked_input(cfg)?;
    let alg = JacobiAlgebra::new(&f)?.with_budget(cfg.budget);
    let dims = alg.graded_dims();
    let json = json!({
        "command": "spectrum",
        "f": f.to_text(),
        "mu": alg.mu(),
        "basis": alg.basis(),
        "alpha": q_strings(alg.alpha()),
        "graded_dims": dims.iter().map(|(a, k)| json!([fmt_q(a), k])).collect::<Vec<_>>(),
    });
    let mut t = String::new();
    let _ = writeln!(t, "f = {}", f.to_text());
    let _ = writeln!(t, "mu = {}", alg.mu());
    for (e, a) in alg.basis().iter().zip(alg.alpha()) {
        let _ = writeln!(t, "  {:<16} alpha = {}", format::monomial(e), fmt_q(a));
    }
    let _ = writeln!(t, "spectrum: {}", format::q_list(alg.alpha()));
    Ok(Report {
        text: t,
        json,
        ok: true,
    })
}

fn deformation_json(d: &SubdiagramDeformation) -> Value {
    json!({
        "gs": d.gs.iter().map(|g| g.to_text()).collect::<Vec<_>>(),
        "injective": d.injective,
        "maximal": d.maximal,
        "surjective": d.surjective,
        "good": d.good,
    })
}

fn deformation_text(d: &SubdiagramDeformation) -> String {
    let gs: Vec<String> = d.gs.iter().map(|g| g.to_text()).collect();
    let mut flags = Vec::new();
    for (name, on) in [
        ("injective", d.injective),
        ("maximal", d.maximal),
        ("surjective", d.surjective),
        ("good", d.good),
    ] {
        flags.push(if on {
            name.to_string()
        } else {
            format!("not {name}")
        });
    }
    format!(
        "deformation: gs = [{}] ({})\n",
        gs.join(", "),
        flags.join(", ")
    )
}

pub fn structure(cfg: &Config) -> Result<Report> {
    let (d, s) = load_structure(cfg)?;
    let rep = verify_structure_relations(&s);
    let mut json = structure_to_json(&s);
    if let Some(d) = &d {
        json["deformation"] = deformation_json(d);
    }
    json["relations"] = relations_json(&rep);

    let xs = format::names("x", s.r);
    let mut t = String::new();
    let _ = writeln!(t, "f = {}", s.f.to_text());
    if let Some(d) = &d {
        t.push_str(&deformation_text(d));
    }
    let basis: Vec<String> = s.basis.iter().map(format::monomial).collect();
    let _ = writeln!(t, "basis: {}", basis.join(", "));
    let _ = writeln!(t, "alpha: {}", format::q_list(&s.alpha));
    t.push_str(&format::poly_mat("B0(x)", &s.b0, &xs));
    for (i, c) in s.c.iter().enumerate() {
        t.push_str(&format::poly_mat(&format!("C{}(x)", i + 1), c, &xs));
    }
    t.push_str(&format::q_mat("Binf", &s.b_inf));
    t.push_str(&format::q_mat("g", &s.g));
    t.push_str(&relations_text(&rep));
    let ok = rep.all_passed();
    Ok(Report { text: t, json, ok })
}

fn extension_names(s: &FrobTypeStructure, ell: usize) -> Vec<String> {
    let mut v = format::names("x", s.r);
    v.extend(format::names("y", ell));
    v
}

pub fn deform(cfg: &Config) -> Result<Report> {
    let (_, s) = load_structure(cfg)?;
    let h = extend(&s, cfg.order)?;
    let rep = h.relations();
    let names = extension_names(&s, h.ell);
    let gamma = h.primitive_map()?;
    let json = json!({
        "command": "deform",
        "f": s.f.to_text(),
        "variables": names,
        "order": h.order,
        "mode": serde_json::to_value(h.mode).expect("serializable"),
        "B0": polymat_json(&h.b0),
        "C": h.c.iter().map(polymat_json).collect::<Vec<_>>(),
        "primitive_map": gamma.iter().map(|p| p.fmt_x()).collect::<Vec<_>>(),
        "relations": relations_json(&rep),
    });
    let mut t = String::new();
    let _ = writeln!(t, "f = {}", s.f.to_text());
    let _ = writeln!(
        t,
        "variables: {} (weighted order {})",
        names.join(", "),
        h.order
    );
    t.push_str(&format::poly_mat("B0", &h.b0, &names));
    for (i, c) in h.c.iter().enumerate() {
        t.push_str(&format::poly_mat(&format!("C[{}]", names[i]), c, &names));
    }
    let chi: Vec<String> = gamma.iter().map(|p| p.fmt_with(&names)).collect();
    let _ = writeln!(t, "primitive map: ({})", chi.join(", "));
    t.push_str(&relations_text(&rep));
    Ok(Report {
        text: t,
        json,
        ok: rep.all_passed(),
    })
}

pub fn potential(cfg: &Config) -> Result<Report> {
    let (_, s) = load_structure(cfg)?;
    let h = extend(&s, cfg.order)?;
    let germ = frobenius_manifold_from_deformation(&h)?;
    let rep = check_wdvv(&germ);
    let mut json = germ.to_json();
    json["command"] = json!("potential");
    json["f"] = json!(s.f.to_text());
    json["checks"] = serde_json::to_value(&rep.checks).expect("serializable");

    let mut t = String::new();
    let _ = writeln!(t, "f = {}", s.f.to_text());
    let _ = writeln!(
        t,
        "flat coordinates: {} (unit {})",
        germ.names.join(", "),
        germ.names[germ.unit]
    );
    let _ = writeln!(t, "charges: {}", format::q_list(&germ.alpha));
    t.push_str(&format::q_mat("metric", &germ.metric));
    let euler: Vec<String> = (0..germ.mu)
        .map(|a| {
            let lin = Poly::var(germ.mu, a).scale(&(q(1) - &germ.alpha[a]));
            let e = &lin + &Poly::constant(germ.mu, germ.euler_shift[a].clone());
            format!("({})*d/d{}", e.fmt_with(&germ.names), germ.names[a])
        })
        .collect();
    let _ = writeln!(t, "Euler field: {}", euler.join(" + "));
    let _ = writeln!(t, "potential through order {}:", germ.order + 3);
    let _ = writeln!(t, "  Phi = {}", germ.potential_text());
    for c in &rep.checks {
        let _ = writeln!(t, "{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(Report {
        text: t,
        json,
        ok: rep.all_passed(),
    })
}

struct Check {
    name: String,
    status: &'static str,
    detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        status: if passed { "pass" } else { "fail" },
        detail,
    }
}

fn skipped(name: &str, detail: String) -> Check {
    Check {
        name: name.into(),
        status: "skip",
        detail,
    }
}

fn oracle_spectrum(f: &LaurentPoly) -> Result<Vec<Q>> {
    let mut out = Vec::new();
    for level in candidate_levels(f, &q(f.n() as i64), 4) {
        for _ in 0..graded_dim(f, &level)? {
            out.push(level.clone());
        }
    }
    Ok(out)
}

/// Extension and germ stages. Preconditions turn into skipped checks and
/// verification errors into failed ones.
fn germ_checks(s: &FrobTypeStructure, order: usize, checks: &mut Vec<Check>) -> Result<()> {
    let h = match extend(s, order) {
        Ok(h) => h,
        Err(e @ Error::Precondition(_)) => {
            checks.push(skipped("universal deformation", e.to_string()));
            return Ok(());
        }
        Err(e @ Error::Verification(_)) => {
            checks.push(check("universal deformation", false, e.to_string()));
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    for c in h.relations().checks {
        checks.push(check(
            &format!("extended: {}", c.name),
            c.passed,
            c.witness.unwrap_or_default(),
        ));
    }
    if is_good_structure(s) {
        let gamma = h.primitive_map()?;
        checks.push(check(
            "primitive map shape",
            has_universal_shape(&gamma, s.r, &h.weights, h.order as i64),
            gamma
                .iter()
                .map(|p| p.fmt_x())
                .collect::<Vec<_>>()
                .join(", "),
        ));
    }
    match frobenius_manifold_from_deformation(&h) {
        Ok(germ) => {
            for c in check_wdvv(&germ).checks {
                checks.push(check(&c.name, c.passed, c.witness.unwrap_or_default()));
            }
        }
        Err(e @ Error::Precondition(_)) => checks.push(skipped("Frobenius germ", e.to_string())),
        Err(e @ Error::Verification(_)) => {
            checks.push(check("Frobenius germ", false, e.to_string()))
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

pub fn verify(cfg: &Config) -> Result<Report> {
    let mut checks = Vec::new();
    let s = if cfg.structure.is_some() {
        load_structure(cfg)?.1
    } else {
        let (f, nd) = checked_input(cfg)?;
        checks.push(check("nondegenerate", true, describe_nondeg(&nd)));
        let mu = milnor_number(&newton_polyhedron(&f)?)?;
        let alg = JacobiAlgebra::new(&f)?.with_budget(cfg.budget);
        let brute = jacobi_dim(&f)?;
        checks.push(check(
            "Milnor number",
            mu as usize == brute && alg.mu() == brute,
            format!("volume {mu}, basis {}, brute force {brute}", alg.mu()),
        ));
        let alpha = alg.alpha().to_vec();
        checks.push(check(
            "spectrum symmetry",
            spectrum_is_symmetric(&alpha, f.n()),
            format::q_list(&alpha),
        ));
        let oracle = oracle_spectrum(&f)?;
        checks.push(check(
            "spectrum oracle",
            oracle == alpha,
            format::q_list(&oracle),
        ));
        let d = deformation(cfg, &f)?;
        build_canonical_structure_with(&d, cfg.budget)?
    };
    let base = verify_structure_relations(&s);
    let base_ok = base.all_passed();
    for c in base.checks {
        checks.push(check(&c.name, c.passed, c.witness.unwrap_or_default()));
    }
    let origin = s.origin();
    checks.push(check(
        "injectivity at origin",
        check_ic(&s, &origin),
        String::new(),
    ));
    if !base_ok {
        checks.push(skipped(
            "universal deformation",
            "base relations fail".into(),
        ));
    } else if !check_gc(&s, &origin) {
        checks.push(skipped(
            "generation at origin",
            "fails; no universal deformation".into(),
        ));
    } else {
        checks.push(check("generation at origin", true, String::new()));
        germ_checks(&s, cfg.order, &mut checks)?;
    }
    let failed = checks.iter().filter(|c| c.status == "fail").count();
    let json = json!({
        "command": "verify",
        "f": s.f.to_text(),
        "checks": checks
            .iter()
            .map(|c| json!({ "name": c.name, "status": c.status, "detail": c.detail }))
            .collect::<Vec<_>>(),
        "failed": failed,
    });
    let mut t = String::new();
    for c in &checks {
        let tag = c.status.to_uppercase();
        if c.detail.is_empty() {
            let _ = writeln!(t, "{tag:<4} {}", c.name);
        } else {
            let _ = writeln!(t, "{tag:<4} {} ({})", c.name, c.detail);
        }
    }
    if failed == 0 {
        let _ = writeln!(t, "all checks passed");
    } else {
        let _ = writeln!(t, "{failed} checks failed");
    }
    Ok(Report {
        text: t,
        json,
        ok: failed == 0,
    })
}
