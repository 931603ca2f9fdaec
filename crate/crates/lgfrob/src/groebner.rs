//! Groebner bases for the Jacobian ideal of a parameter free Laurent
//! polynomial.
//!
//! Laurent polynomials are cleared of denominators and the ring
//! `Q[u^{+-1}]` is presented as `Q[u, t] / (t u_1 ... u_n - 1)`. The monomial
//! order compares the `t` exponent first and then uses grevlex on `u`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::jacobi::JacobiAlgebra;
use crate::laurent::LaurentPoly;
use crate::matrix::Mat;
use crate::poly::Exp;
use crate::rational::Q;

pub const DEFAULT_PAIR_BUDGET: usize = 20_000;

/// Monomial order on exponent vectors of length `n + 1` (`t` last).
pub fn order(a: &[i32], b: &[i32]) -> Ordering {
    let n = a.len() - 1;
    a[n].cmp(&b[n]).then_with(|| {
        let da: i32 = a[..n].iter().sum();
        let db: i32 = b[..n].iter().sum();
        da.cmp(&db).then_with(|| {
            for k in (0..n).rev() {
                if a[k] != b[k] {
                    return b[k].cmp(&a[k]);
                }
            }
            Ordering::Equal
        })
    })
}

/// Polynomial with terms sorted by decreasing monomial order.
#[derive(Clone, Debug, PartialEq)]
pub struct GPoly {
    terms: Vec<(Exp, Q)>,
}

impl GPoly {
    fn from_unsorted(mut terms: Vec<(Exp, Q)>) -> Self {
        terms.sort_by(|a, b| order(&b.0, &a.0));
        let mut out: Vec<(Exp, Q)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc += c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        GPoly { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lead(&self) -> &Exp {
        &self.terms[0].0
    }

    pub fn terms(&self) -> &[(Exp, Q)] {
        &self.terms
    }

    fn make_monic(&mut self) {
        if let Some((_, c)) = self.terms.first() {
            let inv = c.recip();
            for (_, v) in &mut self.terms {
                *v *= &inv;
            }
        }
    }

    /// `self - c * x^e * other`, merging sorted term lists.
    fn sub_mul(&self, c: &Q, e: &[i32], other: &GPoly) -> GPoly {
        let shifted = other.terms.iter().map(|(oe, oc)| {
            (
                oe.iter().zip(e).map(|(a, b)| a + b).collect::<Exp>(),
                -(oc * c),
            )
        });
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter().cloned().peekable();
        let mut b = shifted.peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => out.push(a.next().unwrap()),
                (None, Some(_)) => out.push(b.next().unwrap()),
                (Some(x), Some(y)) => match order(&x.0, &y.0) {
                    Ordering::Greater => out.push(a.next().unwrap()),
                    Ordering::Less => out.push(b.next().unwrap()),
                    Ordering::Equal => {
                        let (e, c1) = a.next().unwrap();
                        let (_, c2) = b.next().unwrap();
                        let s = c1 + c2;
                        if !s.is_zero() {
                            out.push((e, s));
                        }
                    }
                },
            }
        }
        GPoly { terms: out }
    }
}

fn divides(a: &[i32], b: &[i32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[i32], b: &[i32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn diff(a: &[i32], b: &[i32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Full reduction of `p` modulo `basis`.
fn reduce(p: &GPoly, basis: &[GPoly]) -> GPoly {
    let mut rem: Vec<(Exp, Q)> = Vec::new();
    let mut cur = p.clone();
    while !cur.is_zero() {
        let (le, lc) = cur.terms[0].clone();
        if let Some(g) = basis.iter().find(|g| divides(g.lead(), &le)) {
            let c = &lc / &g.terms[0].1;
            cur = cur.sub_mul(&c, &diff(&le, g.lead()), g);
        } else {
            rem.push((le, lc));
            cur.terms.remove(0);
        }
    }
    GPoly { terms: rem }
}

/// Reduced Groebner basis of the ideal generated by `gens`.
pub fn groebner_basis(gens: Vec<GPoly>, pair_budget: usize) -> Result<Vec<GPoly>> {
    let mut basis: Vec<GPoly> = Vec::new();
    for mut g in gens.into_iter().filter(|g| !g.is_zero()) {
        g.make_monic();
        basis.push(g);
    }
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.insert((i, j));
        }
    }
    let mut steps = 0usize;
    while let Some(&(i, j)) = pairs.iter().next() {
        pairs.remove(&(i, j));
        steps += 1;
        if steps > pair_budget {
            return Err(Error::Budget(format!(
                "Groebner basis exceeded {pair_budget} pairs"
            )));
        }
        let (li, lj) = (basis[i].lead().clone(), basis[j].lead().clone());
        let l = lcm(&li, &lj);
        // coprime leading monomials reduce to zero
        if l.iter()
            .zip(li.iter().zip(&lj))
            .all(|(m, (a, b))| *m == a + b)
        {
            continue;
        }
        let s = GPoly::from_unsorted(
            basis[i]
                .terms
                .iter()
                .map(|(e, c)| {
                    (
                        e.iter().zip(&diff(&l, &li)).map(|(a, b)| a + b).collect(),
                        c.clone(),
                    )
                })
                .collect(),
        )
        .sub_mul(&Q::one(), &diff(&l, &lj), &basis[j]);
        let mut h = reduce(&s, &basis);
        if h.is_zero() {
            continue;
        }
        h.make_monic();
        let k = basis.len();
        basis.push(h);
        for a in 0..k {
            pairs.insert((a, k));
        }
    }
    // minimise and interreduce
    let mut minimal: Vec<GPoly> = Vec::new();
    for (idx, g) in basis.iter().enumerate() {
        let redundant = basis.iter().enumerate().any(|(o, h)| {
            o != idx && divides(h.lead(), g.lead()) && (h.lead() != g.lead() || o < idx)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut reduced = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<GPoly> = minimal
            .iter()
            .enumerate()
            .filter(|(o, _)| *o != k)
            .map(|(_, g)| g.clone())
            .collect();
        let lead = GPoly {
            terms: vec![minimal[k].terms[0].clone()],
        };
        let tail = GPoly {
            terms: minimal[k].terms[1..].to_vec(),
        };
        let mut g = lead;
        g.terms.extend(reduce(&tail, &others).terms);
        reduced.push(g);
    }
    reduced.sort_by(|a, b| order(a.lead(), b.lead()));
    Ok(reduced)
}

/// Jacobian ideal `(u_k df/du_k)` of a parameter free Laurent polynomial.
#[derive(Clone, Debug)]
pub struct JacobianIdeal {
    pub n: usize,
    pub generators: Vec<LaurentPoly>,
    pub groebner: Vec<GPoly>,
    /// Monomials outside the leading term ideal, in increasing order.
    pub standard: Vec<Exp>,
}

/// Multiplies by a power of `u_1 ... u_n` until polynomial and returns the
/// exponent vectors with the matching power of `t` appended.
fn to_gpoly(h: &LaurentPoly) -> GPoly {
    let shift = h
        .support()
        .flat_map(|e| e.iter().copied())
        .min()
        .map(|m| (-m).max(0))
        .unwrap_or(0);
    GPoly::from_unsorted(
        h.terms()
            .map(|(e, c)| {
                let mut x: Exp = e.iter().map(|v| v + shift).collect();
                x.push(shift);
                assert!(c.is_constant());
                (x, c.constant_term())
            })
            .collect(),
    )
}

fn from_gpoly(p: &GPoly, n: usize) -> LaurentPoly {
    let mut out = LaurentPoly::zero(n, 0);
    for (e, c) in p.terms() {
        let t = e[n];
        let x: Exp = e[..n].iter().map(|v| v - t).collect();
        out.add_term(x, crate::poly::Poly::constant(0, c.clone()));
    }
    out
}

pub fn build_ideal(f: &LaurentPoly) -> Result<JacobianIdeal> {
    build_ideal_with(f, DEFAULT_PAIR_BUDGET)
}

pub fn build_ideal_with(f: &LaurentPoly, pair_budget: usize) -> Result<JacobianIdeal> {
    if !f.is_parameter_free() {
        return Err(Error::Input(
            "Groebner normal forms need a parameter free polynomial".into(),
        ));
    }
    let n = f.n();
    let generators: Vec<LaurentPoly> = (0..n).map(|k| f.log_der(k)).collect();
    let mut gens: Vec<GPoly> = generators.iter().map(to_gpoly).collect();
    let mut sat = vec![1; n];
    sat.push(1);
    let zero = vec![0; n + 1];
    gens.push(GPoly::from_unsorted(vec![
        (sat, Q::one()),
        (zero, -Q::one()),
    ]));
    let groebner = groebner_basis(gens, pair_budget)?;
    let standard = standard_monomials(&groebner, n + 1)?;
    Ok(JacobianIdeal {
        n,
        generators,
        groebner,
        standard,
    })
}

/// Enumerates standard monomials; fails when the quotient is not finite.
fn standard_monomials(gb: &[GPoly], nv: usize) -> Result<Vec<Exp>> {
    let mut bounds = vec![None; nv];
    for g in gb {
        let l = g.lead();
        let nz: Vec<usize> = (0..nv).filter(|&k| l[k] != 0).collect();
        if nz.len() == 1 {
            let k = nz[0];
            bounds[k] = Some(bounds[k].map_or(l[k], |b: i32| b.min(l[k])));
        }
    }
    if bounds.iter().any(|b| b.is_none()) {
        return Err(Error::Precondition(
            "Jacobian quotient is not finite dimensional".into(),
        ));
    }
    let bounds: Vec<i32> = bounds.into_iter().map(|b| b.unwrap()).collect();
    let mut out = Vec::new();
    let mut e = vec![0; nv];
    loop {
        if !gb.iter().any(|g| divides(g.lead(), &e)) {
            out.push(e.clone());
        }
        let mut k = 0;
        loop {
            if k == nv {
                out.sort_by(|a, b| order(a, b));
                return Ok(out);
            }
            e[k] += 1;
            if e[k] < bounds[k] {
                break;
            }
            e[k] = 0;
            k += 1;
        }
    }
}

impl JacobianIdeal {
    pub fn dim(&self) -> usize {
        self.standard.len()
    }

    /// Normal form as a Laurent polynomial (`t` replaced by `(u_1...u_n)^-1`).
    pub fn normal_form(&self, h: &LaurentPoly) -> LaurentPoly {
        from_gpoly(&reduce(&to_gpoly(h), &self.groebner), self.n)
    }

    /// Coordinates over the standard monomials.
    pub fn standard_coords(&self, h: &LaurentPoly) -> Vec<Q> {
        let r = reduce(&to_gpoly(h), &self.groebner);
        self.standard
            .iter()
            .map(|s| {
                r.terms()
                    .iter()
                    .find(|(e, _)| e == s)
                    .map(|(_, c)| c.clone())
                    .unwrap_or_else(Q::zero)
            })
            .collect()
    }

    pub fn is_member(&self, h: &LaurentPoly) -> bool {
        reduce(&to_gpoly(h), &self.groebner).is_zero()
    }

    /// Matrix of multiplication by `h` on the classes of the monomials
    /// `basis` (which must represent a basis of the quotient).
    pub fn multiplication_matrix(&self, h: &LaurentPoly, basis: &[Exp]) -> Result<Mat<Q>> {
        let mu = self.dim();
        if basis.len() != mu {
            return Err(Error::Input(format!(
                "basis has {} elements, quotient has dimension {mu}",
                basis.len()
            )));
        }
        let mono = |e: &Exp| LaurentPoly::unit_monomial(e, 0);
        let nb = Mat::from_columns(
            mu,
            basis
                .iter()
                .map(|b| self.standard_coords(&mono(b)))
                .collect(),
        );
        let nb_inv = nb.inverse().ok_or_else(|| {
            Error::Verification("monomials do not form a basis of the quotient".into())
        })?;
        let cols: Vec<Vec<Q>> = basis
            .iter()
            .map(|b| nb_inv.apply(&self.standard_coords(&(&mono(b) * h))))
            .collect();
        Ok(Mat::from_columns(mu, cols))
    }
}

/// Point multiplication matrices (`F` and `-g_i`) of a parameter free
/// polynomial in the graded monomial basis, computed with Groebner bases.
pub fn point_multiplication_matrices(
    f_a: &LaurentPoly,
    gs: &[LaurentPoly],
) -> Result<(Mat<Q>, Vec<Mat<Q>>)> {
    let alg = JacobiAlgebra::new(f_a)?;
    let ideal = build_ideal(f_a)?;
    let basis = alg.basis().to_vec();
    let b0 = ideal.multiplication_matrix(f_a, &basis)?;
    let cs = gs
        .iter()
        .map(|g| ideal.multiplication_matrix(&-g, &basis))
        .collect::<Result<_>>()?;
    Ok((b0, cs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse_laurent;

    #[test]
    fn circle_ideal() {
        let f = parse_laurent("u1 + u1^-1", 1).unwrap();
        let id = build_ideal(&f).unwrap();
        assert_eq!(id.dim(), 2);
        assert_eq!(id.normal_form(&f).to_text(), "2*u1");
        assert!(id.is_member(&f.log_der(0)));
    }

    #[test]
    fn plane_dimension() {
        let f = parse_laurent("u1 + u2 + u1^-1*u2^-1", 2).unwrap();
        assert_eq!(build_ideal(&f).unwrap().dim(), 3);
        let f = parse_laurent("u1 + u2 + u1^-1 + u2^-1", 2).unwrap();
        assert_eq!(build_ideal(&f).unwrap().dim(), 4);
    }

    #[test]
    fn agrees_with_graded_reducer() {
        let f = parse_laurent("u1^2 + u1^-1", 1).unwrap();
        let alg = JacobiAlgebra::new(&f).unwrap();
        let id = build_ideal(&f).unwrap();
        let m = id.multiplication_matrix(&f, alg.basis()).unwrap();
        let m2 = alg
            .multiplication_matrix(&f)
            .unwrap()
            .map(|p| p.constant_term());
        assert_eq!(m, m2);
    }
}
