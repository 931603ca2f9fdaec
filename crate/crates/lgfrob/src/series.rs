//! Truncated power series: polynomials in which some variables carry a
//! positive weight and every monomial above a fixed weighted degree is
//! dropped. Variables of weight zero stay polynomial.

use std::sync::Arc;

use crate::matrix::{Mat, Ring};
use crate::poly::Poly;
use crate::rational::Q;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub weights: Vec<u32>,
    pub order: i64,
}

impl Truncation {
    pub fn new(weights: Vec<u32>, order: i64) -> Arc<Self> {
        Arc::new(Truncation { weights, order })
    }

    pub fn keeps(&self, e: &[i32]) -> bool {
        Poly::weighted_degree(e, &self.weights) <= self.order
    }

    pub fn nvars(&self) -> usize {
        self.weights.len()
    }
}

#[derive(Clone, Debug)]
pub struct Series {
    poly: Poly,
    trunc: Arc<Truncation>,
}

impl PartialEq for Series {
    fn eq(&self, o: &Self) -> bool {
        self.poly == o.poly
    }
}

impl Series {
    pub fn new(p: &Poly, trunc: &Arc<Truncation>) -> Self {
        assert_eq!(p.nvars(), trunc.nvars());
        Series {
            poly: p.truncate(&trunc.weights, trunc.order),
            trunc: trunc.clone(),
        }
    }

    pub fn zero(trunc: &Arc<Truncation>) -> Self {
        Series::new(&Poly::zero(trunc.nvars()), trunc)
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }

    pub fn truncation(&self) -> &Arc<Truncation> {
        &self.trunc
    }

    pub fn derivative(&self, i: usize) -> Series {
        Series::new(&self.poly.derivative(i), &self.trunc)
    }

    /// Part of weighted degree zero.
    pub fn weight_zero_part(&self) -> Poly {
        self.poly.truncate(&self.trunc.weights, 0)
    }

    /// Multiplicative inverse, defined when the weight zero part is a
    /// nonzero constant.
    pub fn inverse(&self) -> Option<Series> {
        let head = self.weight_zero_part();
        if !head.is_constant() || head.is_zero() {
            return None;
        }
        let c = head.constant_term().recip();
        // 1/(c0 (1 + e)) = c0^-1 sum (-e)^k, e of positive weight
        let e = Series::new(&self.poly.scale(&c), &self.trunc).minus(&self.one_like());
        let min_w = self
            .trunc
            .weights
            .iter()
            .copied()
            .filter(|w| *w > 0)
            .min()
            .unwrap_or(1) as i64;
        let steps = (self.trunc.order / min_w).max(0) + 1;
        let mut acc = self.one_like();
        let mut term = self.one_like();
        let neg = e.negate();
        for _ in 0..steps {
            term = term.times(&neg);
            if term.is_zero_elt() {
                break;
            }
            acc = acc.plus(&term);
        }
        Some(acc.scale(&c))
    }

    /// Substitutes series (sharing a truncation) for every variable.
    pub fn compose(&self, images: &[Series]) -> Series {
        let trunc = images[0].trunc.clone();
        let imgs: Vec<Poly> = images.iter().map(|s| s.poly.clone()).collect();
        let t2 = trunc.clone();
        let p = self.poly.compose_filtered(&imgs, &move |e| t2.keeps(e));
        Series::new(&p, &trunc)
    }
}

impl Ring for Series {
    fn zero_like(&self) -> Self {
        Series {
            poly: Poly::zero(self.poly.nvars()),
            trunc: self.trunc.clone(),
        }
    }
    fn one_like(&self) -> Self {
        Series::new(&Poly::one(self.poly.nvars()), &self.trunc)
    }
    fn is_zero_elt(&self) -> bool {
        self.poly.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        Series {
            poly: &self.poly + &o.poly,
            trunc: self.trunc.clone(),
        }
    }
    fn minus(&self, o: &Self) -> Self {
        Series {
            poly: &self.poly - &o.poly,
            trunc: self.trunc.clone(),
        }
    }
    fn times(&self, o: &Self) -> Self {
        let t = &self.trunc;
        Series {
            poly: self.poly.mul_filtered(&o.poly, |e| t.keeps(e)),
            trunc: self.trunc.clone(),
        }
    }
    fn scale(&self, c: &Q) -> Self {
        Series {
            poly: self.poly.scale(c),
            trunc: self.trunc.clone(),
        }
    }
}

pub fn to_series(m: &Mat<Poly>, trunc: &Arc<Truncation>) -> Mat<Series> {
    m.map(|p| Series::new(p, trunc))
}

pub fn to_poly(m: &Mat<Series>) -> Mat<Poly> {
    m.map(|s| s.poly().clone())
}

pub fn series_inverse(m: &Mat<Series>) -> Option<Mat<Series>> {
    m.inverse_with(|d| d.inverse())
}

/// Coefficient of `x^k` in variable `i`, as a series in the same variables.
pub fn coeff_in(s: &Series, i: usize, k: i32) -> Series {
    Series::new(&s.poly.coeff_in(i, k), &s.trunc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn geometric_inverse() {
        let t = Truncation::new(vec![1], 5);
        let one_minus = Series::new(&(&Poly::one(1) - &Poly::var(1, 0)), &t);
        let inv = one_minus.inverse().unwrap();
        for k in 0..=5 {
            assert_eq!(inv.poly().coeff(&[k]), q(1));
        }
        assert_eq!(inv.poly().coeff(&[6]), q(0));
    }

    #[test]
    fn mixed_weights() {
        // x has weight 0 and stays polynomial
        let t = Truncation::new(vec![0, 1], 2);
        let x = Series::new(&Poly::var(2, 0), &t);
        let y = Series::new(&Poly::var(2, 1), &t);
        let p = x.plus(&y).times(&x.plus(&y)).times(&x.plus(&y));
        assert_eq!(p.poly().coeff(&[3, 0]), q(1));
        assert_eq!(p.poly().coeff(&[0, 3]), q(0));
        assert_eq!(p.poly().coeff(&[1, 2]), q(3));
        assert!(x.inverse().is_none());
    }
}
