//! WebAssembly bindings for the browser demo. Every entry point returns a
//! JSON document; failures come back as `{"error": {...}}` rather than as
//! exceptions so the page can render them like any other result.

use lgfrob::hm::{check_wdvv, frobenius_manifold_from_deformation, universal_good_deformation};
use lgfrob::jacobi::monomial_basis;
use lgfrob::json::structure_to_json;
use lgfrob::newton::{is_nondegenerate, milnor_number, newton_polyhedron, subdiagram_monomials};
use lgfrob::rational::fmt_q;
use lgfrob::structure::{
    build_canonical_structure, build_good_maximal_deformation, verify_structure_relations,
};
use lgfrob::{parse_laurent, Error, LaurentPoly, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest truncation order the page accepts; higher orders are slow in a browser tab.
pub const MAX_ORDER: usize = 8;

fn render(r: Result<Value>) -> String {
    let v =
        r.unwrap_or_else(|e| json!({ "error": { "kind": e.kind(), "message": e.to_string() } }));
    serde_json::to_string_pretty(&v).expect("serializable")
}

fn checked(poly: &str, n: usize) -> Result<LaurentPoly> {
    let f = parse_laurent(poly, n)?;
    if !newton_polyhedron(&f)?.is_convenient() {
        return Err(Error::Precondition("polynomial is not convenient".into()));
    }
    if !is_nondegenerate(&f)?.is_nondegenerate() {
        return Err(Error::Precondition("polynomial is degenerate".into()));
    }
    Ok(f)
}

/// Milnor number, spectrum and subdiagram monomials.
#[wasm_bindgen]
pub fn analyze(poly: &str, n: usize) -> String {
    render((|| {
        let f = checked(poly, n)?;
        let p = newton_polyhedron(&f)?;
        let (basis, alpha) = monomial_basis(&f)?;
        Ok(json!({
            "f": f.to_text(),
            "mu": milnor_number(&p)?,
            "vertices": p.vertices,
            "basis": basis,
            "spectrum": alpha.iter().map(fmt_q).collect::<Vec<_>>(),
            "subdiagram_monomials": subdiagram_monomials(&p.degree_fn()?),
        }))
    })())
}

/// Canonical structure on the good maximal deformation.
#[wasm_bindgen]
pub fn structure(poly: &str, n: usize) -> String {
    render((|| {
        let f = checked(poly, n)?;
        let s = build_canonical_structure(&build_good_maximal_deformation(&f)?)?;
        let mut v = structure_to_json(&s);
        v["relations"] =
            serde_json::to_value(verify_structure_relations(&s).checks).expect("serializable");
        Ok(v)
    })())
}

/// Potential of the Frobenius manifold germ through `order`.
#[wasm_bindgen]
pub fn potential(poly: &str, n: usize, order: usize) -> String {
    render((|| {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::Input(format!("order must lie in 1..={MAX_ORDER}")));
        }
        let f = checked(poly, n)?;
        let s = build_canonical_structure(&build_good_maximal_deformation(&f)?)?;
        let germ = frobenius_manifold_from_deformation(&universal_good_deformation(&s, order)?)?;
        let mut v = germ.to_json();
        v["text"] = json!(germ.potential_text());
        v["checks"] = serde_json::to_value(check_wdvv(&germ).checks).expect("serializable");
        Ok(v)
    })())
}
