//! Sparse multivariate polynomials over `Q`.
//!
//! Exponents are signed so the same type carries Laurent monomials; most
//! callers (parameter rings, truncated series) only ever use non-negative
//! exponents.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::rational::{fmt_q, Q};

pub type Exp = Vec<i32>;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exp, Q>,
}

/// Graded lexicographic comparison (total degree, then lex by value).
pub fn grlex(a: &[i32], b: &[i32]) -> Ordering {
    let da: i64 = a.iter().map(|&e| e as i64).sum();
    let db: i64 = b.iter().map(|&e| e as i64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Q::one())
    }

    pub fn monomial(e: Exp, c: Q) -> Self {
        let mut p = Self::zero(e.len());
        p.add_term(e, c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exp, Q)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Q)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Exp, Q)> {
        self.terms.into_iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn coeff(&self, e: &[i32]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, e: Exp, c: Q) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, other: &Poly, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (e, a) in &other.terms {
            self.add_term(e.clone(), a * c);
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
        }
    }

    /// Product keeping only the monomials accepted by `keep`.
    pub fn mul_filtered(&self, other: &Poly, keep: impl Fn(&[i32]) -> bool) -> Poly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = Poly::zero(self.nvars);
        let mut e = vec![0; self.nvars];
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                for k in 0..self.nvars {
                    e[k] = ea[k] + eb[k];
                }
                if keep(&e) {
                    out.add_term(e.clone(), ca * cb);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] != 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * Q::from_integer(e[i].into()));
            }
        }
        out
    }

    /// Antiderivative in variable `i` with zero constant of integration.
    pub fn integrate(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            assert!(e[i] != -1, "cannot integrate a logarithmic term");
            let mut f = e.clone();
            f[i] += 1;
            out.add_term(f, c / Q::from_integer((e[i] + 1).into()));
        }
        out
    }

    pub fn eval(&self, pt: &[Q]) -> Q {
        assert_eq!(pt.len(), self.nvars);
        let mut s = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (k, &ek) in e.iter().enumerate() {
                if ek != 0 {
                    t *= pow_q(&pt[k], ek);
                }
            }
            s += t;
        }
        s
    }

    /// Substitutes every variable `i` by `images[i]`, keeping only
    /// monomials accepted by `keep` along the way.
    pub fn compose_filtered(&self, images: &[Poly], keep: &dyn Fn(&[i32]) -> bool) -> Poly {
        assert_eq!(images.len(), self.nvars);
        let m = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut cache: Vec<Vec<Poly>> = vec![vec![Poly::one(m)]; self.nvars];
        let mut out = Poly::zero(m);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(m, c.clone());
            for (k, &ek) in e.iter().enumerate() {
                assert!(ek >= 0, "composition needs non-negative exponents");
                let ek = ek as usize;
                while cache[k].len() <= ek {
                    let next = cache[k].last().unwrap().mul_filtered(&images[k], keep);
                    cache[k].push(next);
                }
                if ek > 0 {
                    t = t.mul_filtered(&cache[k][ek], keep);
                }
            }
            out = &out + &t;
        }
        out
    }

    pub fn compose(&self, images: &[Poly]) -> Poly {
        self.compose_filtered(images, &|_| true)
    }

    /// `p(x) -> p(x + a)`
    pub fn shift(&self, a: &[Q]) -> Poly {
        let images: Vec<Poly> = (0..self.nvars)
            .map(|i| &Poly::var(self.nvars, i) + &Poly::constant(self.nvars, a[i].clone()))
            .collect();
        self.compose(&images)
    }

    /// Sets variable `i` to `value`, keeping the variable count.
    pub fn subs(&self, i: usize, value: &Q) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut f = e.clone();
            f[i] = 0;
            out.add_term(f, c * pow_q(value, e[i]));
        }
        out
    }

    /// Coefficient of `x_i^p`, as a polynomial in the remaining variables.
    pub fn coeff_in(&self, i: usize, p: i32) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == p {
                let mut f = e.clone();
                f[i] = 0;
                out.add_term(f, c.clone());
            }
        }
        out
    }

    /// Multiplies by `x_i^p`.
    pub fn mul_var_pow(&self, i: usize, p: i32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut f = e.clone();
                    f[i] += p;
                    (f, c.clone())
                })
                .collect(),
        }
    }

    pub fn degree_in(&self, i: usize) -> Option<i32> {
        self.terms.keys().map(|e| e[i]).max()
    }

    pub fn total_degree(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn min_total_degree(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    /// Terms of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: i32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<i32>() == d)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn weighted_degree(e: &[i32], weights: &[u32]) -> i64 {
        e.iter()
            .zip(weights)
            .map(|(&a, &w)| a as i64 * w as i64)
            .sum()
    }

    pub fn truncate(&self, weights: &[u32], order: i64) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| Self::weighted_degree(e, weights) <= order)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Re-embeds into `nvars` variables; old variable `k` becomes `positions[k]`.
    pub fn embed(&self, nvars: usize, positions: &[usize]) -> Poly {
        assert_eq!(positions.len(), self.nvars);
        let mut out = Poly::zero(nvars);
        for (e, c) in &self.terms {
            let mut f = vec![0; nvars];
            for (k, &ek) in e.iter().enumerate() {
                f[positions[k]] += ek;
            }
            out.add_term(f, c.clone());
        }
        out
    }

    /// Drops trailing variables, which must not occur.
    pub fn restrict_vars(&self, nvars: usize) -> Poly {
        let mut out = Poly::zero(nvars);
        for (e, c) in &self.terms {
            assert!(
                e[nvars..].iter().all(|&x| x == 0),
                "dropped variable occurs"
            );
            out.add_term(e[..nvars].to_vec(), c.clone());
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(&Q) -> Q) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    /// Canonical text with the given variable names, terms in descending
    /// graded lex order.
    pub fn fmt_with(&self, names: &[String]) -> String {
        let mut terms: Vec<(&Exp, &Q)> = self.terms.iter().collect();
        terms.sort_by(|a, b| grlex(b.0, a.0));
        fmt_terms(
            terms
                .into_iter()
                .map(|(e, c)| (mono_string(e, names), c.clone())),
        )
    }

    pub fn fmt_x(&self) -> String {
        self.fmt_with(&var_names("x", self.nvars))
    }
}

pub fn var_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn mono_string(e: &[i32], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (k, &ek) in e.iter().enumerate() {
        match ek {
            0 => {}
            1 => parts.push(names[k].clone()),
            _ => parts.push(format!("{}^{}", names[k], ek)),
        }
    }
    parts.join("*")
}

/// Joins (monomial text, coefficient) pairs into `a - b + c` form.
pub fn fmt_terms(terms: impl Iterator<Item = (String, Q)>) -> String {
    let mut s = String::new();
    for (mono, c) in terms {
        let neg = c.is_negative();
        let a = c.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if mono.is_empty() {
            s.push_str(&fmt_q(&a));
        } else if a.is_one() {
            s.push_str(&mono);
        } else {
            let _ = write!(s, "{}*{}", fmt_q(&a), mono);
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

pub fn pow_q(x: &Q, e: i32) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        self.mul_filtered(o, |_| true)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Q::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn x(i: usize) -> Poly {
        Poly::var(2, i)
    }

    #[test]
    fn arithmetic() {
        let p = &x(0) + &x(1);
        let m = &x(0) - &x(1);
        let prod = &p * &m;
        assert_eq!(prod, &x(0).pow(2) - &x(1).pow(2));
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn calculus() {
        let p = &x(0).pow(3).scale(&q(2)) + &x(1);
        assert_eq!(p.derivative(0), x(0).pow(2).scale(&q(6)));
        assert_eq!(p.derivative(0).integrate(0), x(0).pow(3).scale(&q(2)));
    }

    #[test]
    fn shift_and_eval() {
        let p = &x(0).pow(2) + &x(1);
        let s = p.shift(&[q(1), qf(1, 2)]);
        assert_eq!(s.eval(&[q(0), q(0)]), qf(3, 2));
        assert_eq!(s.eval(&[q(2), q(1)]), p.eval(&[q(3), qf(3, 2)]));
    }

    #[test]
    fn printing() {
        let p = &(&x(0).pow(2).scale(&qf(-2, 3)) + &x(1)) - &Poly::one(2);
        assert_eq!(p.fmt_x(), "-2/3*x1^2 + x2 - 1");
        assert_eq!(Poly::zero(1).fmt_x(), "0");
    }
}
