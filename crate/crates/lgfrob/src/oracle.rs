//! Brute force reference computations used to cross-check the main
//! pipeline. Nothing here touches the graded reducer, the Groebner engine
//! or the polyhedron code: monomials are enumerated in boxes and ranks are
//! computed by sparse exact row reduction.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::poly::Exp;
use crate::rational::{fmt_q, Q};

pub const DEFAULT_MAX_BOX: i32 = 6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: String,
    pub method: &'static str,
    pub certificate: String,
}

/// Incremental sparse row echelon form over Q.
#[derive(Default)]
struct Echelon {
    rows: BTreeMap<usize, BTreeMap<usize, Q>>,
}

impl Echelon {
    /// Adds a vector; returns true when it increased the rank.
    fn insert(&mut self, mut v: BTreeMap<usize, Q>) -> bool {
        v.retain(|_, c| !c.is_zero());
        while let Some((&lead, lc)) = v.iter().next() {
            let lc = lc.clone();
            match self.rows.get(&lead) {
                Some(row) => {
                    for (k, c) in row {
                        let e = v.entry(*k).or_insert_with(Q::zero);
                        *e -= &lc * c;
                        if e.is_zero() {
                            v.remove(k);
                        }
                    }
                }
                None => {
                    let inv = lc.recip();
                    for c in v.values_mut() {
                        *c *= &inv;
                    }
                    self.rows.insert(lead, v);
                    return true;
                }
            }
        }
        false
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

fn box_points(n: usize, b: i32) -> Vec<Exp> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Exp| {
                (-b..=b).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

fn in_box(e: &[i32], b: i32) -> bool {
    e.iter().all(|v| v.abs() <= b)
}

/// `u_k df/du_k` as sparse coefficient lists.
fn log_derivatives(f: &LaurentPoly) -> Vec<Vec<(Exp, Q)>> {
    (0..f.n())
        .map(|k| {
            f.terms()
                .filter(|(e, _)| e[k] != 0)
                .map(|(e, c)| (e.clone(), c.constant_term() * Q::from_integer(e[k].into())))
                .collect()
        })
        .collect()
}

/// Relations `u^m * u_k df/du_k` whose support lies in the box of radius `b`.
fn relations(f: &LaurentPoly, b: i32) -> Vec<Vec<(Exp, Q)>> {
    let n = f.n();
    let gens = log_derivatives(f);
    let mut out = Vec::new();
    for m in box_points(n, b) {
        for g in &gens {
            let shifted: Vec<(Exp, Q)> = g
                .iter()
                .map(|(e, c)| (e.iter().zip(&m).map(|(a, b)| a + b).collect(), c.clone()))
                .collect();
            if !shifted.is_empty() && shifted.iter().all(|(e, _)| in_box(e, b)) {
                out.push(shifted);
            }
        }
    }
    out
}

fn index_of(points: &[Exp]) -> BTreeMap<Exp, usize> {
    points
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect()
}

fn sparse(v: &[(Exp, Q)], idx: &BTreeMap<Exp, usize>) -> BTreeMap<usize, Q> {
    let mut out = BTreeMap::new();
    for (e, c) in v {
        *out.entry(idx[e]).or_insert_with(Q::zero) += c;
    }
    out
}

/// `dim span(box b) / (ideal inside box b+1) ∩ span(box b)`.
fn box_quotient_dim(f: &LaurentPoly, b: i32) -> (usize, usize) {
    let outer = b + 1;
    let pts = box_points(f.n(), outer);
    let idx = index_of(&pts);
    let mut ech = Echelon::default();
    for rel in relations(f, outer) {
        ech.insert(sparse(&rel, &idx));
    }
    let rel_rank = ech.rank();
    let mut dim = 0;
    for p in box_points(f.n(), b) {
        let mut v = BTreeMap::new();
        v.insert(idx[&p], Q::one());
        if ech.insert(v) {
            dim += 1;
        }
    }
    (dim, rel_rank)
}

/// Dimension of the Jacobian quotient by rank computations on growing
/// boxes, stopping when two consecutive boxes agree.
pub fn jacobi_dim_bruteforce(f: &LaurentPoly, max_box: i32) -> Result<OracleResult> {
    if !f.is_parameter_free() || f.is_zero() {
        return Err(Error::Input(
            "oracle needs a nonzero parameter free polynomial".into(),
        ));
    }
    let mut prev: Option<usize> = None;
    for b in 1..=max_box {
        let (d, rank) = box_quotient_dim(f, b);
        if prev == Some(d) {
            return Ok(OracleResult {
                value: d.to_string(),
                method: "box-rank",
                certificate: format!("boxes {} and {b} agree; relation rank {rank}", b - 1),
            });
        }
        prev = Some(d);
    }
    Err(Error::Budget(format!(
        "quotient dimension did not stabilise up to box {max_box}"
    )))
}

pub fn jacobi_dim(f: &LaurentPoly) -> Result<usize> {
    Ok(jacobi_dim_bruteforce(f, DEFAULT_MAX_BOX)?
        .value
        .parse()
        .unwrap())
}

/// Newton degree `nu(a) = min sum lambda_i` over `a = sum lambda_i v_i`,
/// `lambda >= 0`, with `v_i` running over the support; computed by
/// enumerating simplicial cones (no facet data).
pub struct ConeDegree {
    cones: Vec<Vec<Vec<Q>>>,
}

fn det_and_inverse(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut inv: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Q::one() } else { Q::zero() })
                .collect()
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        inv.swap(c, p);
        let pv = a[c][c].recip();
        for j in 0..n {
            a[c][j] *= &pv;
            inv[c][j] *= &pv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let k = a[r][c].clone();
                for j in 0..n {
                    let t = &a[c][j] * &k;
                    a[r][j] -= t;
                    let t = &inv[c][j] * &k;
                    inv[r][j] -= t;
                }
            }
        }
    }
    Some(inv)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

impl ConeDegree {
    pub fn new(f: &LaurentPoly) -> Self {
        let n = f.n();
        let pts: Vec<Exp> = f
            .support()
            .filter(|e| e.iter().any(|&v| v != 0))
            .cloned()
            .collect();
        let mut cones = Vec::new();
        for s in subsets(pts.len(), n) {
            // columns v_i; store the inverse to read off lambda = V^-1 a
            let m: Vec<Vec<Q>> = (0..n)
                .map(|r| {
                    s.iter()
                        .map(|&i| Q::from_integer(pts[i][r].into()))
                        .collect()
                })
                .collect();
            if let Some(inv) = det_and_inverse(&m) {
                cones.push(inv);
            }
        }
        ConeDegree { cones }
    }

    pub fn nu(&self, a: &[i32]) -> Option<Q> {
        if a.iter().all(|&v| v == 0) {
            return Some(Q::zero());
        }
        let mut best: Option<Q> = None;
        for inv in &self.cones {
            let lam: Vec<Q> = inv
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(a)
                        .map(|(c, &v)| c * Q::from_integer(v.into()))
                        .sum()
                })
                .collect();
            if lam.iter().all(|l| !l.is_negative()) {
                let s: Q = lam.iter().sum();
                if best.as_ref().is_none_or(|b| s < *b) {
                    best = Some(s);
                }
            }
        }
        best
    }
}

/// `dim N_alpha / ((ideal ∩ N_alpha) + N_{<alpha})` with the ideal
/// approximated by shifts inside a box; stabilisation over the box radius.
pub fn graded_dim_bruteforce(f: &LaurentPoly, alpha: &Q, max_box: i32) -> Result<OracleResult> {
    let cd = ConeDegree::new(f);
    let mut prev = None;
    for b in 1..=max_box {
        let pts = box_points(f.n(), b);
        let idx = index_of(&pts);
        let nus: Vec<Option<Q>> = pts.iter().map(|p| cd.nu(p)).collect();
        let low: Vec<usize> = (0..pts.len())
            .filter(|&i| nus[i].as_ref().is_some_and(|v| v < alpha))
            .collect();
        let level: Vec<usize> = (0..pts.len())
            .filter(|&i| nus[i].as_ref() == Some(alpha))
            .collect();
        // everything of degree <= alpha must fit well inside the box
        let fits = box_points(f.n(), b - 1)
            .iter()
            .filter(|p| cd.nu(p).is_some_and(|v| &v <= alpha))
            .count()
            == low.len() + level.len();
        let mut ech = Echelon::default();
        for &i in &low {
            ech.insert(BTreeMap::from([(i, Q::one())]));
        }
        let outside: Vec<usize> = (0..pts.len())
            .filter(|&i| nus[i].as_ref().is_none_or(|v| v > alpha))
            .collect();
        // Echelon form of the relations with the coordinates above alpha
        // ordered first: rows leading past them span the relations that
        // lie in N_alpha.
        let order: Vec<usize> = outside.iter().chain(&level).chain(&low).copied().collect();
        let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut rel_ech = Echelon::default();
        for rel in relations(f, b) {
            rel_ech.insert(
                sparse(&rel, &idx)
                    .into_iter()
                    .map(|(i, c)| (pos[&i], c))
                    .collect(),
            );
        }
        for (lead, row) in &rel_ech.rows {
            if *lead >= outside.len() {
                ech.insert(row.iter().map(|(k, c)| (order[*k], c.clone())).collect());
            }
        }
        let mut dim = 0;
        for &i in &level {
            if ech.insert(BTreeMap::from([(i, Q::one())])) {
                dim += 1;
            }
        }
        if fits && prev == Some(dim) {
            return Ok(OracleResult {
                value: dim.to_string(),
                method: "graded-box-rank",
                certificate: format!("level {} stable at boxes {} and {b}", fmt_q(alpha), b - 1),
            });
        }
        if fits {
            prev = Some(dim);
        }
    }
    Err(Error::Budget(format!(
        "graded dimension at level {} did not stabilise up to box {max_box}",
        fmt_q(alpha)
    )))
}

pub fn graded_dim(f: &LaurentPoly, alpha: &Q) -> Result<usize> {
    Ok(graded_dim_bruteforce(f, alpha, DEFAULT_MAX_BOX)?
        .value
        .parse()
        .unwrap())
}

/// Newton degrees of lattice points of degree at most `bound`, for use as
/// candidate levels of [`graded_dim_bruteforce`].
pub fn candidate_levels(f: &LaurentPoly, bound: &Q, b: i32) -> Vec<Q> {
    let cd = ConeDegree::new(f);
    let mut out: Vec<Q> = box_points(f.n(), b)
        .iter()
        .filter_map(|p| cd.nu(p))
        .filter(|v| v <= bound)
        .collect();
    out.sort();
    out.dedup();
    out
}

fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Number of rational plane curves of degree `d` through `3d - 1` points.
pub fn kontsevich_nd(d: i64) -> Result<BigInt> {
    if d < 1 {
        return Err(Error::Input("degree must be at least 1".into()));
    }
    let mut n: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for dd in 2..=d {
        let mut acc = BigInt::zero();
        for d1 in 1..dd {
            let d2 = dd - d1;
            let w = BigInt::from(d1 * d1 * d2)
                * (BigInt::from(d2) * binomial(3 * dd - 4, 3 * d1 - 2)
                    - BigInt::from(d1) * binomial(3 * dd - 4, 3 * d1 - 1));
            acc += &n[d1 as usize] * &n[d2 as usize] * w;
        }
        n.push(acc);
    }
    Ok(n[d as usize].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse_laurent;
    use crate::rational::{q, qf};

    #[test]
    fn dims() {
        for (s, n, mu) in [
            ("u1 + u1^-1", 1, 2),
            ("u1 + u2 + u1^-1*u2^-1", 2, 3),
            ("u1^2 + u1^-2", 1, 4),
        ] {
            assert_eq!(
                jacobi_dim(&parse_laurent(s, n).unwrap()).unwrap(),
                mu,
                "{s}"
            );
        }
    }

    #[test]
    fn graded() {
        let f = parse_laurent("u1 + u1^-1", 1).unwrap();
        assert_eq!(graded_dim(&f, &q(0)).unwrap(), 1);
        assert_eq!(graded_dim(&f, &q(1)).unwrap(), 1);
        assert_eq!(graded_dim(&f, &qf(1, 2)).unwrap(), 0);
        let f = parse_laurent("u1^2 + u1^-2", 1).unwrap();
        assert_eq!(graded_dim(&f, &qf(1, 2)).unwrap(), 2);
    }

    #[test]
    fn kontsevich() {
        let v: Vec<i64> = (1..=5)
            .map(|d| kontsevich_nd(d).unwrap().try_into().unwrap())
            .collect();
        assert_eq!(v, vec![1, 1, 12, 620, 87304]);
    }
}
