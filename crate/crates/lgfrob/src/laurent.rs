//! Laurent polynomials in `u1..un` with coefficients in `Q[x1..xr]`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{grlex, mono_string, var_names, Exp, Poly};
use crate::rational::Q;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LaurentPoly {
    n: usize,
    r: usize,
    terms: BTreeMap<Exp, Poly>,
}

impl LaurentPoly {
    pub fn zero(n: usize, r: usize) -> Self {
        LaurentPoly {
            n,
            r,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: usize, r: usize) -> Self {
        Self::monomial(vec![0; n], Poly::one(r))
    }

    pub fn monomial(e: Exp, c: Poly) -> Self {
        let mut f = Self::zero(e.len(), c.nvars());
        f.add_term(e, c);
        f
    }

    pub fn unit_monomial(e: &[i32], r: usize) -> Self {
        Self::monomial(e.to_vec(), Poly::one(r))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parameters `x`.
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Poly)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Exp> {
        self.terms.keys()
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

    pub fn coeff(&self, e: &[i32]) -> Poly {
        self.terms
            .get(e)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.r))
    }

    pub fn add_term(&mut self, e: Exp, c: Poly) {
        assert_eq!(e.len(), self.n);
        assert_eq!(c.nvars(), self.r);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// True if no coefficient involves the parameters.
    pub fn is_parameter_free(&self) -> bool {
        self.terms.values().all(|c| c.is_constant())
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.map_coeffs(|p| p.scale(c))
    }

    pub fn mul_poly(&self, c: &Poly) -> Self {
        self.map_coeffs(|p| p * c)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        let mut out = Self::zero(self.n, self.r);
        for (e, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    /// Multiplies by the monomial `u^e`.
    pub fn shift_exponents(&self, e: &[i32]) -> Self {
        LaurentPoly {
            n: self.n,
            r: self.r,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.iter().zip(e).map(|(x, y)| x + y).collect(), c.clone()))
                .collect(),
        }
    }

    /// `u_k d/du_k` (0-based `k`).
    pub fn log_der(&self, k: usize) -> Self {
        let mut out = Self::zero(self.n, self.r);
        for (e, c) in &self.terms {
            if e[k] != 0 {
                out.terms
                    .insert(e.clone(), c.scale(&Q::from_integer(BigInt::from(e[k]))));
            }
        }
        out
    }

    /// `d/dx_i` (0-based `i`).
    pub fn param_derivative(&self, i: usize) -> Self {
        self.map_coeffs(|c| c.derivative(i))
    }

    /// Substitutes `x = a`, giving a parameter free polynomial.
    pub fn at_params(&self, a: &[Q]) -> Self {
        let mut out = Self::zero(self.n, 0);
        for (e, c) in &self.terms {
            let v = c.eval(a);
            if !v.is_zero() {
                out.terms.insert(e.clone(), Poly::constant(0, v));
            }
        }
        out
    }

    /// `x -> x + a`, keeping the parameters.
    pub fn shift_params(&self, a: &[Q]) -> Self {
        self.map_coeffs(|c| c.shift(a))
    }

    /// Same polynomial viewed with `r` parameters (only valid from a
    /// parameter free polynomial or when widening).
    pub fn with_params(&self, r: usize) -> Self {
        let positions: Vec<usize> = (0..self.r).collect();
        assert!(r >= self.r);
        let mut out = Self::zero(self.n, r);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.embed(r, &positions));
        }
        out
    }

    /// Parameter free part evaluated at `x = 0`.
    pub fn at_origin(&self) -> Self {
        self.at_params(&vec![Q::zero(); self.r])
    }

    pub fn rational_coeff(&self, e: &[i32]) -> Q {
        let c = self.coeff(e);
        assert!(c.is_constant());
        c.constant_term()
    }

    /// Canonical text: `u` monomials in descending graded lex order, and the
    /// parameter monomials of each coefficient likewise.
    pub fn to_text(&self) -> String {
        let unames = var_names("u", self.n);
        let xnames = var_names("x", self.r);
        let mut keys: Vec<&Exp> = self.terms.keys().collect();
        keys.sort_by(|a, b| grlex(b, a));
        let mut flat = Vec::new();
        for e in keys {
            let c = &self.terms[e];
            let mut xs: Vec<(&Exp, &Q)> = c.terms().collect();
            xs.sort_by(|a, b| grlex(b.0, a.0));
            for (xe, q) in xs {
                let xm = mono_string(xe, &xnames);
                let um = mono_string(e, &unames);
                let m = match (xm.is_empty(), um.is_empty()) {
                    (true, _) => um,
                    (false, true) => xm,
                    (false, false) => format!("{xm}*{um}"),
                };
                flat.push((m, q.clone()));
            }
        }
        crate::poly::fmt_terms(flat.into_iter())
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn check_shapes(a: &LaurentPoly, b: &LaurentPoly) {
    assert_eq!(a.n, b.n, "variable count mismatch");
    assert_eq!(a.r, b.r, "parameter count mismatch");
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, o: &LaurentPoly) -> LaurentPoly {
        check_shapes(self, o);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, o: &LaurentPoly) -> LaurentPoly {
        self + &(-o)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(&-Q::one())
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, o: &LaurentPoly) -> LaurentPoly {
        check_shapes(self, o);
        let mut acc: BTreeMap<Exp, Poly> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Exp = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let p = ca * cb;
                let slot = acc.entry(e).or_insert_with(|| Poly::zero(self.r));
                *slot = &*slot + &p;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        LaurentPoly {
            n: self.n,
            r: self.r,
            terms: acc,
        }
    }
}

/// Checked sum (variable counts must agree).
pub fn add(f: &LaurentPoly, g: &LaurentPoly) -> Result<LaurentPoly> {
    same_shape(f, g)?;
    Ok(f + g)
}

/// Checked product (variable counts must agree).
pub fn mul(f: &LaurentPoly, g: &LaurentPoly) -> Result<LaurentPoly> {
    same_shape(f, g)?;
    Ok(f * g)
}

fn same_shape(f: &LaurentPoly, g: &LaurentPoly) -> Result<()> {
    if f.n != g.n {
        return Err(Error::VarMismatch(f.n, g.n));
    }
    if f.r != g.r {
        return Err(Error::VarMismatch(f.r, g.r));
    }
    Ok(())
}

/// `u_i df/du_i`, with `i` counted from 1.
pub fn log_derivative(f: &LaurentPoly, i: usize) -> Result<LaurentPoly> {
    if i == 0 || i > f.n {
        return Err(Error::Input(format!(
            "log-derivative index {i} out of range 1..={}",
            f.n
        )));
    }
    Ok(f.log_der(i - 1))
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    n: usize,
    r: usize,
}

type RawTerm = (Q, Exp, Exp);

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn digits(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(txt.parse().unwrap())
    }

    fn signed_int(&mut self) -> Result<i32> {
        self.ws();
        let mut neg = false;
        if let Some(&c) = self.s.get(self.pos) {
            if c == b'-' || c == b'+' {
                neg = c == b'-';
                self.pos += 1;
                self.ws();
            }
        }
        let at = self.pos;
        let v = self.digits()?;
        let v = i32::try_from(&v).map_err(|_| Error::Parse {
            pos: at,
            msg: "exponent too large".into(),
        })?;
        Ok(if neg { -v } else { v })
    }

    fn poly(&mut self) -> Result<Vec<RawTerm>> {
        let mut out = Vec::new();
        let mut sign = Q::one();
        match self.peek() {
            Some(b'-') => {
                sign = -sign;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        loop {
            let (c, ue, xe) = self.term()?;
            out.push((c * &sign, ue, xe));
            match self.peek() {
                None => break,
                Some(b'+') => {
                    sign = Q::one();
                    self.pos += 1;
                }
                Some(b'-') => {
                    sign = -Q::one();
                    self.pos += 1;
                }
                Some(_) => return self.err("expected '+' or '-'"),
            }
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<RawTerm> {
        let mut coeff = Q::one();
        let mut seen = false;
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            let num = self.digits()?;
            let mut den = BigInt::one();
            if self.peek() == Some(b'/') {
                self.pos += 1;
                self.ws();
                let at = self.pos;
                den = self.digits()?;
                if den.is_zero() {
                    return Err(Error::Parse {
                        pos: at,
                        msg: "zero denominator".into(),
                    });
                }
            }
            coeff = Q::new(num, den);
            seen = true;
        }
        let mut ue = vec![0; self.n];
        let mut xe = vec![0; self.r];
        loop {
            let star = self.peek() == Some(b'*');
            if star {
                self.pos += 1;
            }
            match self.peek() {
                Some(b'u') | Some(b'x') => {
                    self.monom(&mut ue, &mut xe)?;
                    seen = true;
                }
                _ if star => return self.err("expected a monomial after '*'"),
                _ => break,
            }
        }
        if !seen {
            return self.err("expected a term");
        }
        Ok((coeff, ue, xe))
    }

    fn monom(&mut self, ue: &mut [i32], xe: &mut [i32]) -> Result<()> {
        let letter = self.s[self.pos];
        let start = self.pos;
        self.pos += 1;
        let idx = self.digits()?;
        let limit = if letter == b'u' { self.n } else { self.r };
        let idx = usize::try_from(&idx).unwrap_or(usize::MAX);
        if idx == 0 || idx > limit {
            return Err(Error::Parse {
                pos: start,
                msg: format!(
                    "variable index out of range: {}{} (have {})",
                    letter as char, idx, limit
                ),
            });
        }
        let mut e = 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            e = self.signed_int()?;
        }
        if letter == b'u' {
            ue[idx - 1] += e;
        } else {
            if e < 0 {
                return Err(Error::Parse {
                    pos: start,
                    msg: "parameters take non-negative exponents".into(),
                });
            }
            xe[idx - 1] += e;
        }
        Ok(())
    }
}

fn parse_raw(text: &str, n: usize, r: usize) -> Result<Vec<RawTerm>> {
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
        n,
        r,
    };
    if p.peek().is_none() {
        return p.err("empty input");
    }
    p.poly()
}

/// Parses a Laurent polynomial in `u1..un` with rational coefficients.
pub fn parse_laurent(text: &str, n: usize) -> Result<LaurentPoly> {
    parse_laurent_params(text, n, 0)
}

/// Parses a Laurent polynomial in `u1..un` whose coefficients may involve
/// the parameters `x1..xr`.
pub fn parse_laurent_params(text: &str, n: usize, r: usize) -> Result<LaurentPoly> {
    if n == 0 {
        return Err(Error::Input("need at least one variable".into()));
    }
    let mut f = LaurentPoly::zero(n, r);
    for (c, ue, xe) in parse_raw(text, n, r)? {
        f.add_term(ue, Poly::monomial(xe, c));
    }
    Ok(f)
}

/// Parses a polynomial in `x1..xr`.
pub fn parse_xpoly(text: &str, r: usize) -> Result<Poly> {
    let mut p = Poly::zero(r);
    for (c, _, xe) in parse_raw(text, 0, r)? {
        p.add_term(xe, c);
    }
    Ok(p)
}
