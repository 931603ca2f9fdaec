//! Dense matrices over commutative Q-algebras.

use std::fmt::Debug;

use num_traits::{One, Zero};

use crate::poly::Poly;
use crate::rational::Q;

/// A commutative Q-algebra element that knows how to make its own zero and
/// one (truncated series carry their truncation along).
pub trait Ring: Clone + PartialEq + Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_elt(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scale(&self, c: &Q) -> Self;
    fn negate(&self) -> Self {
        self.scale(&-Q::one())
    }
}

impl Ring for Q {
    fn zero_like(&self) -> Self {
        Q::zero()
    }
    fn one_like(&self) -> Self {
        Q::one()
    }
    fn is_zero_elt(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: &Q) -> Self {
        self * c
    }
}

impl Ring for Poly {
    fn zero_like(&self) -> Self {
        Poly::zero(self.nvars())
    }
    fn one_like(&self) -> Self {
        Poly::one(self.nvars())
    }
    fn is_zero_elt(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: &Q) -> Self {
        Poly::scale(self, c)
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_columns(rows: usize, cols: Vec<Vec<T>>) -> Self
    where
        T: Clone,
    {
        let ncols = cols.len();
        Mat::from_fn(rows, ncols, |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<T>
    where
        T: Clone,
    {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Mat<T>
    where
        T: Clone,
    {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }
}

impl<T: Ring> Mat<T> {
    pub fn zeros_like(rows: usize, cols: usize, proto: &T) -> Self {
        let z = proto.zero_like();
        Mat::from_fn(rows, cols, |_, _| z.clone())
    }

    pub fn identity_like(n: usize, proto: &T) -> Self {
        let z = proto.zero_like();
        let o = proto.one_like();
        Mat::from_fn(n, n, |i, j| if i == j { o.clone() } else { z.clone() })
    }

    pub fn proto(&self) -> &T {
        &self.data[0]
    }

    pub fn plus(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| a.plus(b))
                .collect(),
        }
    }

    pub fn minus(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| a.minus(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.map(|a| a.scale(c))
    }

    pub fn scale_by(&self, c: &T) -> Self {
        self.map(|a| a.times(c))
    }

    pub fn negate(&self) -> Self {
        self.map(|a| a.negate())
    }

    pub fn times(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch");
        let z = self.proto().zero_like();
        let mut out = Mat::from_fn(self.rows, o.cols, |_, _| z.clone());
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero_elt() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero_elt() {
                        continue;
                    }
                    let v = out.get(i, j).plus(&a.times(b));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = v[0].zero_like();
                for (k, vk) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if !a.is_zero_elt() && !vk.is_zero_elt() {
                        acc = acc.plus(&a.times(vk));
                    }
                }
                acc
            })
            .collect()
    }

    /// `[A, B] = AB - BA`
    pub fn commutator(&self, o: &Self) -> Self {
        self.times(o).minus(&o.times(self))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero_elt())
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn trace(&self) -> T {
        let mut acc = self.proto().zero_like();
        for i in 0..self.rows.min(self.cols) {
            acc = acc.plus(self.get(i, i));
        }
        acc
    }

    /// First entry (row-major) where the two matrices differ.
    pub fn first_difference(&self, o: &Self) -> Option<(usize, usize)> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) != o.get(i, j) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Characteristic polynomial coefficients `c_0..c_n` (monic, `c_n = 1`)
    /// and the Faddeev-LeVerrier matrices; only divisions by integers occur,
    /// so this works over any commutative Q-algebra.
    fn faddeev(&self) -> (Vec<T>, Mat<T>) {
        let n = self.rows;
        assert_eq!(n, self.cols);
        let id = Mat::identity_like(n, self.proto());
        let mut c = vec![self.proto().zero_like(); n + 1];
        c[n] = self.proto().one_like();
        let mut m = Mat::zeros_like(n, n, self.proto());
        for k in 1..=n {
            m = self.times(&m).plus(&id.scale_by(&c[n - k + 1]));
            let am = self.times(&m);
            c[n - k] = am
                .trace()
                .scale(&-Q::from_integer((k as i64).into()).recip());
        }
        (c, m)
    }

    pub fn det(&self) -> T {
        let n = self.rows;
        if n == 0 {
            return self.proto().one_like();
        }
        let (c, _) = self.faddeev();
        if n.is_multiple_of(2) {
            c[0].clone()
        } else {
            c[0].negate()
        }
    }

    /// Inverse given a function inverting the determinant (up to sign,
    /// `A^-1 = -M_n / c_0`).
    pub fn inverse_with(&self, inv_scalar: impl Fn(&T) -> Option<T>) -> Option<Self> {
        let n = self.rows;
        if n == 0 {
            return Some(self.clone());
        }
        let (c, m) = self.faddeev();
        let ic = inv_scalar(&c[0])?;
        Some(m.scale_by(&ic.negate()))
    }
}

impl Mat<Q> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat::from_fn(rows, cols, |_, _| Q::zero())
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { Q::one() } else { Q::zero() })
    }

    pub fn diag(d: &[Q]) -> Self {
        let n = d.len();
        Mat::from_fn(n, n, |i, j| if i == j { d[i].clone() } else { Q::zero() })
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self.get(r, c).recip();
            for j in c..self.cols {
                let v = self.get(r, j) * &inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let f = self.get(i, c).clone();
                for j in c..self.cols {
                    let v = self.get(i, j) - &f * self.get(r, j);
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn inverse(&self) -> Option<Mat<Q>> {
        let n = self.rows;
        assert_eq!(n, self.cols);
        let mut aug = Mat::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                Q::one()
            } else {
                Q::zero()
            }
        });
        let piv = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        Some(Mat::from_fn(n, n, |i, j| aug.get(i, n + j).clone()))
    }

    /// Some solution of `A x = b` with free variables set to zero, plus the
    /// nullity; `None` if inconsistent.
    pub fn solve(&self, b: &[Q]) -> Option<(Vec<Q>, usize)> {
        assert_eq!(b.len(), self.rows);
        let n = self.cols;
        let mut aug = Mat::from_fn(self.rows, n + 1, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else {
                b[i].clone()
            }
        });
        let piv = aug.rref();
        if piv.last() == Some(&n) {
            return None;
        }
        let mut x = vec![Q::zero(); n];
        for (r, &c) in piv.iter().enumerate() {
            x[c] = aug.get(r, n).clone();
        }
        Some((x, n - piv.len()))
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat::identity(self.rows)
    }
}

/// Embeds a rational matrix as constant polynomials.
pub fn const_poly_mat(m: &Mat<Q>, nvars: usize) -> Mat<Poly> {
    m.map(|c| Poly::constant(nvars, c.clone()))
}

/// Evaluates a polynomial matrix at a point.
pub fn eval_mat(m: &Mat<Poly>, pt: &[Q]) -> Mat<Q> {
    m.map(|p| p.eval(pt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn m(rows: &[&[i64]]) -> Mat<Q> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| q(rows[i][j]))
    }

    #[test]
    fn inverse_and_det() {
        let a = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = a.inverse().unwrap();
        assert!(a.times(&inv).is_identity());
        assert_eq!(a.det(), q(18));
        let inv2 = a
            .inverse_with(|c| if c.is_zero() { None } else { Some(c.recip()) })
            .unwrap();
        assert_eq!(inv, inv2);
    }

    #[test]
    fn singular() {
        let a = m(&[&[1, 2], &[2, 4]]);
        assert!(a.inverse().is_none());
        assert_eq!(a.rank(), 1);
        assert_eq!(a.det(), q(0));
        let (x, nul) = a.solve(&[q(1), q(2)]).unwrap();
        assert_eq!(nul, 1);
        assert_eq!(a.apply(&x), vec![q(1), q(2)]);
        assert!(a.solve(&[q(1), q(3)]).is_none());
    }

    #[test]
    fn polynomial_det() {
        let x = Poly::var(1, 0);
        let one = Poly::one(1);
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => x.clone(),
            (0, 1) => one.clone(),
            (1, 0) => one.scale(&q(2)),
            _ => x.clone(),
        });
        let expected = &x.pow(2) - &one.scale(&q(2));
        assert_eq!(a.det(), expected);
    }
}
