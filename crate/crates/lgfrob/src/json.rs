//! JSON documents for structures. Rationals are strings `"p/q"`, exponent
//! vectors are integer arrays and matrix entries are polynomial strings in
//! `x1..xr`; keys are emitted in sorted order so output is byte stable.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::laurent::{parse_laurent, parse_xpoly, LaurentPoly};
use crate::matrix::Mat;
use crate::poly::{Exp, Poly};
use crate::rational::{fmt_q, parse_q, Q};
use crate::structure::FrobTypeStructure;

pub fn q_json(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

pub fn qmat_json(m: &Mat<Q>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| q_json(m.get(i, j))).collect()))
            .collect(),
    )
}

pub fn polymat_json(m: &Mat<Poly>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    (0..m.cols())
                        .map(|j| Value::String(m.get(i, j).fmt_x()))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn structure_to_json(s: &FrobTypeStructure) -> Value {
    json!({
        "n": s.n,
        "mu": s.mu,
        "r": s.r,
        "f": s.f.to_text(),
        "gs": s.gs.iter().map(|g| g.to_text()).collect::<Vec<_>>(),
        "basis": s.basis,
        "alpha": s.alpha.iter().map(fmt_q).collect::<Vec<_>>(),
        "B0": polymat_json(&s.b0),
        "C": s.c.iter().map(polymat_json).collect::<Vec<_>>(),
        "Binf": qmat_json(&s.b_inf),
        "g": qmat_json(&s.g),
    })
}

pub fn structure_to_string(s: &FrobTypeStructure) -> String {
    serde_json::to_string_pretty(&structure_to_json(s)).expect("serializable")
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Input(format!("structure document lacks \"{key}\"")))
}

fn as_usize(v: &Value, key: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Input(format!("\"{key}\" must be a non-negative integer")))
}

fn as_array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Input(format!("\"{key}\" must be an array")))
}

fn as_str<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::Input(format!("\"{key}\" entries must be strings")))
}

fn matrix<T>(
    v: &Value,
    key: &str,
    size: usize,
    entry: impl Fn(&str) -> Result<T>,
) -> Result<Mat<T>> {
    let rows = as_array(v, key)?;
    if rows.len() != size {
        return Err(Error::Input(format!("\"{key}\" must have {size} rows")));
    }
    let mut cells = Vec::with_capacity(size * size);
    for row in rows {
        let row = as_array(row, key)?;
        if row.len() != size {
            return Err(Error::Input(format!("\"{key}\" must have {size} columns")));
        }
        for c in row {
            cells.push(entry(as_str(c, key)?)?);
        }
    }
    let mut it = cells.into_iter();
    Ok(Mat::from_fn(size, size, |_, _| it.next().unwrap()))
}

pub fn structure_from_json(v: &Value) -> Result<FrobTypeStructure> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Input("structure document must be an object".into()))?;
    let n = as_usize(field(obj, "n")?, "n")?;
    let mu = as_usize(field(obj, "mu")?, "mu")?;
    let r = as_usize(field(obj, "r")?, "r")?;
    let f = parse_laurent(as_str(field(obj, "f")?, "f")?, n)?;
    let gs: Vec<LaurentPoly> = as_array(field(obj, "gs")?, "gs")?
        .iter()
        .map(|g| parse_laurent(as_str(g, "gs")?, n))
        .collect::<Result<_>>()?;
    if gs.len() != r {
        return Err(Error::Input(format!("expected {r} deformation directions")));
    }
    let basis: Vec<Exp> = serde_json::from_value(field(obj, "basis")?.clone())
        .map_err(|e| Error::Input(format!("\"basis\": {e}")))?;
    let alpha: Vec<Q> = as_array(field(obj, "alpha")?, "alpha")?
        .iter()
        .map(|a| parse_q(as_str(a, "alpha")?))
        .collect::<Result<_>>()?;
    if basis.len() != mu || alpha.len() != mu {
        return Err(Error::Input(format!(
            "basis and alpha must have {mu} entries"
        )));
    }
    let px = |s: &str| parse_xpoly(s, r);
    let b0 = matrix(field(obj, "B0")?, "B0", mu, px)?;
    let c: Vec<Mat<Poly>> = as_array(field(obj, "C")?, "C")?
        .iter()
        .map(|m| matrix(m, "C", mu, px))
        .collect::<Result<_>>()?;
    if c.len() != r {
        return Err(Error::Input(format!("expected {r} Higgs matrices")));
    }
    let b_inf = matrix(field(obj, "Binf")?, "Binf", mu, parse_q)?;
    let g = matrix(field(obj, "g")?, "g", mu, parse_q)?;
    Ok(FrobTypeStructure {
        n,
        r,
        mu,
        f,
        gs,
        basis,
        alpha,
        b0,
        c,
        b_inf,
        g,
        gauge: None,
    })
}

pub fn structure_from_str(text: &str) -> Result<FrobTypeStructure> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        pos: e.column(),
        msg: e.to_string(),
    })?;
    structure_from_json(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{
        build_canonical_structure, build_good_maximal_deformation, same_matrices,
    };

    #[test]
    fn round_trip_is_exact() {
        for (text, n) in [("u1^2 + u1^-2", 1), ("u1 + u2 + u1^-1*u2^-1", 2)] {
            let f = parse_laurent(text, n).unwrap();
            let s =
                build_canonical_structure(&build_good_maximal_deformation(&f).unwrap()).unwrap();
            let a = structure_to_string(&s);
            let back = structure_from_str(&a).unwrap();
            assert!(same_matrices(&s, &back));
            assert_eq!(structure_to_string(&back), a);
        }
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(structure_from_str("{"), Err(Error::Parse { .. })));
        assert!(matches!(
            structure_from_str("{\"n\": 1}"),
            Err(Error::Input(_))
        ));
    }
}
