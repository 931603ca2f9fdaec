//! Jacobi algebras via Newton graded division.
//!
//! Reduction works level by level in the Newton filtration. At level `alpha`
//! the graded pieces of `u^q * u_k dF/du_k` (with `nu(q) = alpha - 1`) span a
//! subspace of the degree-`alpha` monomials; a complement chosen greedily in
//! descending lexicographic order gives the monomial basis. Coefficients
//! stay in `Q[x]` throughout because the principal parts do not involve the
//! parameters.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::matrix::Mat;
use crate::newton::{is_nondegenerate, NewtonDegree, NewtonPolyhedron};
use crate::poly::{Exp, Poly};
use crate::rational::{q, Q};

/// Step budget for a single reduction.
pub const DEFAULT_BUDGET: usize = 200_000;

#[derive(Debug)]
struct Level {
    monos: Vec<Exp>,
    index: HashMap<Exp, usize>,
    /// Global basis index of each local basis monomial, in local order.
    basis_global: Vec<usize>,
    /// Pivot generators `(q, k)` standing for `u^q * u_k dF/du_k`.
    gens: Vec<(Exp, usize)>,
    /// Inverse of `[basis units | pivot generator columns]`.
    inv: Mat<Q>,
}

/// Outcome of dividing `h` by the log-derivatives of `F`:
/// `h = sum coords_j u^{b_j} + sum_k quotients_k * u_k dF/du_k`.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub coords: Vec<Poly>,
    pub quotients: Vec<LaurentPoly>,
}

#[derive(Debug)]
pub struct JacobiAlgebra {
    n: usize,
    r: usize,
    f: LaurentPoly,
    big_f: LaurentPoly,
    nd: NewtonDegree,
    mu: usize,
    dlog: Vec<LaurentPoly>,
    /// Graded principal parts of `u_k df/du_k`: exponents with `nu = 1`.
    sigma: Vec<Vec<(Exp, Q)>>,
    basis: Vec<Exp>,
    alpha: Vec<Q>,
    levels: Mutex<BTreeMap<Q, Arc<Level>>>,
    budget: usize,
}

impl JacobiAlgebra {
    /// Algebra of a parameter free `f`.
    pub fn new(f: &LaurentPoly) -> Result<Self> {
        Self::parametric(f, &f.with_params(f.r()))
    }

    /// Algebra of `F`, a deformation of the parameter free `f = F(x = 0)`
    /// whose extra terms sit strictly below the Newton boundary.
    pub fn parametric(f: &LaurentPoly, big_f: &LaurentPoly) -> Result<Self> {
        let f = f.at_origin();
        let poly = NewtonPolyhedron::of(&f)?;
        if !poly.is_convenient() {
            return Err(Error::Precondition(format!("{f} is not convenient")));
        }
        let report = is_nondegenerate(&f)?;
        if !report.is_nondegenerate() {
            return Err(Error::Precondition(format!(
                "{f} is not (certifiably) nondegenerate: {report:?}"
            )));
        }
        let nd = poly.degree_fn()?;
        let mu = poly.milnor_number()? as usize;
        let n = f.n();
        let r = big_f.r();
        let diff = big_f - &f.with_params(r);
        for (e, _) in diff.terms() {
            if nd.nu(e) >= Q::one() {
                return Err(Error::Precondition(format!(
                    "deformation term u^{e:?} has Newton degree {} >= 1",
                    nd.nu(e)
                )));
            }
        }
        let dlog = (0..n).map(|k| big_f.log_der(k)).collect();
        let sigma = (0..n)
            .map(|k| {
                f.log_der(k)
                    .terms()
                    .filter(|(e, _)| nd.nu(e) == Q::one())
                    .map(|(e, c)| (e.clone(), c.constant_term()))
                    .collect()
            })
            .collect();
        let mut alg = JacobiAlgebra {
            n,
            r,
            f,
            big_f: big_f.clone(),
            nd,
            mu,
            dlog,
            sigma,
            basis: Vec::new(),
            alpha: Vec::new(),
            levels: Mutex::new(BTreeMap::new()),
            budget: DEFAULT_BUDGET,
        };
        alg.build_basis()?;
        Ok(alg)
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    fn build_basis(&mut self) -> Result<()> {
        let top = q(self.n as i64);
        let mut basis = Vec::new();
        let mut alpha = Vec::new();
        let mut levels = BTreeMap::new();
        for a in self.nd.levels_up_to(&(&top + Q::one())) {
            let (lvl, local) = self.compute_level(&a, basis.len());
            if a > top && !local.is_empty() {
                return Err(Error::Verification(format!(
                    "graded quotient nonzero at level {a} > n"
                )));
            }
            for e in local {
                basis.push(e);
                alpha.push(a.clone());
            }
            levels.insert(a, Arc::new(lvl));
        }
        if basis.len() != self.mu {
            return Err(Error::Verification(format!(
                "graded basis has {} elements but the Kouchnirenko number is {}",
                basis.len(),
                self.mu
            )));
        }
        self.basis = basis;
        self.alpha = alpha;
        *self.levels.lock().unwrap() = levels;
        Ok(())
    }

    /// Level data plus the basis monomials it contributes; new basis
    /// elements are numbered from `next_global`.
    fn compute_level(&self, a: &Q, next_global: usize) -> (Level, Vec<Exp>) {
        let mut monos = self.nd.level(a);
        monos.sort_by(|x, y| y.cmp(x));
        let index: HashMap<Exp, usize> = monos
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        let below = a - Q::one();
        let qs = if below < Q::zero() {
            vec![]
        } else {
            self.nd.level(&below)
        };
        let mut gen_cols: Vec<(Exp, usize, Vec<Q>)> = Vec::new();
        for qv in &qs {
            for k in 0..self.n {
                let mut col = vec![Q::zero(); monos.len()];
                for (e, c) in &self.sigma[k] {
                    let s: Exp = qv.iter().zip(e).map(|(x, y)| x + y).collect();
                    if let Some(&i) = index.get(&s) {
                        col[i] += c;
                    }
                }
                if col.iter().any(|c| !c.is_zero()) {
                    gen_cols.push((qv.clone(), k, col));
                }
            }
        }
        let m = monos.len();
        let g = gen_cols.len();
        let mut aug = Mat::from_fn(m, g + m, |i, j| {
            if j < g {
                gen_cols[j].2[i].clone()
            } else if j - g == i {
                Q::one()
            } else {
                Q::zero()
            }
        });
        let piv = aug.rref();
        let gens: Vec<usize> = piv.iter().copied().filter(|&c| c < g).collect();
        let units: Vec<usize> = piv
            .iter()
            .copied()
            .filter(|&c| c >= g)
            .map(|c| c - g)
            .collect();
        let square = Mat::from_fn(m, m, |i, j| {
            if j < units.len() {
                if units[j] == i {
                    Q::one()
                } else {
                    Q::zero()
                }
            } else {
                gen_cols[gens[j - units.len()]].2[i].clone()
            }
        });
        let inv = square
            .inverse()
            .expect("level matrix is square and invertible");
        let local: Vec<Exp> = units.iter().map(|&i| monos[i].clone()).collect();
        let basis_global = (0..local.len()).map(|j| next_global + j).collect();
        let lvl = Level {
            monos,
            index,
            basis_global,
            gens: gens
                .iter()
                .map(|&c| (gen_cols[c].0.clone(), gen_cols[c].1))
                .collect(),
            inv,
        };
        (lvl, local)
    }

    fn level(&self, a: &Q) -> Result<Arc<Level>> {
        if let Some(l) = self.levels.lock().unwrap().get(a) {
            return Ok(l.clone());
        }
        let (lvl, local) = self.compute_level(a, self.mu);
        if !local.is_empty() {
            return Err(Error::Verification(format!(
                "graded quotient nonzero at level {a} outside the spectrum"
            )));
        }
        let lvl = Arc::new(lvl);
        self.levels.lock().unwrap().insert(a.clone(), lvl.clone());
        Ok(lvl)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn f(&self) -> &LaurentPoly {
        &self.f
    }

    pub fn big_f(&self) -> &LaurentPoly {
        &self.big_f
    }

    pub fn newton_degree(&self) -> &NewtonDegree {
        &self.nd
    }

    pub fn basis(&self) -> &[Exp] {
        &self.basis
    }

    /// Spectrum: Newton degrees of the basis, ascending.
    pub fn alpha(&self) -> &[Q] {
        &self.alpha
    }

    pub fn basis_element(&self, j: usize) -> LaurentPoly {
        LaurentPoly::unit_monomial(&self.basis[j], self.r)
    }

    /// Lifts a polynomial with fewer parameters (typically none).
    pub fn lift(&self, h: &LaurentPoly) -> LaurentPoly {
        if h.r() == self.r {
            h.clone()
        } else {
            h.with_params(self.r)
        }
    }

    pub fn reduce(&self, h: &LaurentPoly) -> Result<Reduction> {
        let mut h = self.lift(h);
        if h.n() != self.n {
            return Err(Error::VarMismatch(h.n(), self.n));
        }
        let mut coords = vec![Poly::zero(self.r); self.mu];
        let mut quotients = vec![LaurentPoly::zero(self.n, self.r); self.n];
        let mut steps = 0;
        while !h.is_zero() {
            steps += 1;
            if steps > self.budget {
                return Err(Error::Budget(format!(
                    "reduction exceeded {} steps",
                    self.budget
                )));
            }
            let top = h.support().map(|e| self.nd.nu(e)).max().unwrap();
            let lvl = self.level(&top)?;
            let mut v = vec![Poly::zero(self.r); lvl.monos.len()];
            for (e, c) in h.terms() {
                if let Some(&i) = lvl.index.get(e) {
                    v[i] = c.clone();
                }
            }
            let nb = lvl.basis_global.len();
            let m = lvl.monos.len();
            for j in 0..m {
                let mut s = Poly::zero(self.r);
                for (i, vi) in v.iter().enumerate() {
                    let w = lvl.inv.get(j, i);
                    if !w.is_zero() && !vi.is_zero() {
                        s.add_scaled(vi, w);
                    }
                }
                if s.is_zero() {
                    continue;
                }
                if j < nb {
                    let g = lvl.basis_global[j];
                    coords[g] = &coords[g] + &s;
                    h = &h - &LaurentPoly::monomial(self.basis[g].clone(), s);
                } else {
                    let (qv, k) = &lvl.gens[j - nb];
                    let term = LaurentPoly::monomial(qv.clone(), s);
                    h = &h - &(&term * &self.dlog[*k]);
                    quotients[*k] = &quotients[*k] + &term;
                }
            }
            if let Some(e) = h.support().find(|e| lvl.index.contains_key(*e)) {
                return Err(Error::Verification(format!(
                    "level {top} not cleared at exponent {e:?}"
                )));
            }
        }
        Ok(Reduction { coords, quotients })
    }

    /// Coordinates of the class of `h` in the monomial basis.
    pub fn coords(&self, h: &LaurentPoly) -> Result<Vec<Poly>> {
        Ok(self.reduce(h)?.coords)
    }

    pub fn normal_form(&self, h: &LaurentPoly) -> Result<LaurentPoly> {
        let c = self.coords(h)?;
        let mut out = LaurentPoly::zero(self.n, self.r);
        for (j, cj) in c.into_iter().enumerate() {
            out.add_term(self.basis[j].clone(), cj);
        }
        Ok(out)
    }

    /// Matrix of multiplication by `h` in the monomial basis.
    pub fn multiplication_matrix(&self, h: &LaurentPoly) -> Result<Mat<Poly>> {
        let h = self.lift(h);
        let mut cols = Vec::with_capacity(self.mu);
        for j in 0..self.mu {
            cols.push(self.coords(&(&h * &self.basis_element(j)))?);
        }
        Ok(Mat::from_columns(self.mu, cols))
    }

    /// Class of `h du/u` in the Brieskorn lattice, written in the monomial
    /// basis with coefficients in `Q[x][theta]` (theta is the last variable).
    ///
    /// Uses `[u_k dF/du_k * a du/u] = theta [u_k da/du_k du/u]` repeatedly.
    pub fn brieskorn(&self, h: &LaurentPoly) -> Result<Vec<Poly>> {
        let nv = self.r + 1;
        let pos: Vec<usize> = (0..self.r).collect();
        let mut out = vec![Poly::zero(nv); self.mu];
        let mut h = self.lift(h);
        let mut d = 0;
        while !h.is_zero() {
            if d > 4 * (self.n + 2) + 64 {
                return Err(Error::Budget("theta expansion did not terminate".into()));
            }
            let red = self.reduce(&h)?;
            for (j, c) in red.coords.iter().enumerate() {
                let lifted = c.embed(nv, &pos).mul_var_pow(self.r, d as i32);
                out[j] = &out[j] + &lifted;
            }
            let mut next = LaurentPoly::zero(self.n, self.r);
            for (k, a) in red.quotients.iter().enumerate() {
                next = &next + &a.log_der(k);
            }
            h = next;
            d += 1;
        }
        Ok(out)
    }

    /// Matrix whose column `j` is `brieskorn(h * b_j)`.
    pub fn brieskorn_matrix(&self, h: &LaurentPoly) -> Result<Mat<Poly>> {
        let h = self.lift(h);
        let mut cols = Vec::with_capacity(self.mu);
        for j in 0..self.mu {
            cols.push(self.brieskorn(&(&h * &self.basis_element(j)))?);
        }
        Ok(Mat::from_columns(self.mu, cols))
    }

    /// Graded pairing: coefficient of the top basis element in `b_i b_j`
    /// when the degrees add up to `n`, zero otherwise (evaluated at `x = 0`).
    pub fn residue_pairing(&self) -> Result<Mat<Q>> {
        let top = q(self.n as i64);
        let origin = vec![Q::zero(); self.r];
        let mu = self.mu;
        let mut g = Mat::zeros(mu, mu);
        for i in 0..mu {
            for j in i..mu {
                if &self.alpha[i] + &self.alpha[j] != top {
                    continue;
                }
                let prod = &self.basis_element(i) * &self.basis_element(j);
                let c = self.coords(&prod)?;
                let v = c[mu - 1].eval(&origin);
                g.set(i, j, v.clone());
                g.set(j, i, v);
            }
        }
        if g.inverse().is_none() {
            return Err(Error::Verification("graded pairing is degenerate".into()));
        }
        Ok(g)
    }

    /// Dimension of the graded quotient at each level (for levels carrying
    /// basis elements).
    pub fn graded_dims(&self) -> BTreeMap<Q, usize> {
        let mut out = BTreeMap::new();
        for a in &self.alpha {
            *out.entry(a.clone()).or_insert(0) += 1;
        }
        out
    }
}

/// Spectrum of a parameter free Laurent polynomial.
pub fn spectrum(f: &LaurentPoly) -> Result<Vec<Q>> {
    Ok(JacobiAlgebra::new(f)?.alpha().to_vec())
}

/// Monomial basis and degrees.
pub fn monomial_basis(f: &LaurentPoly) -> Result<(Vec<Exp>, Vec<Q>)> {
    let a = JacobiAlgebra::new(f)?;
    Ok((a.basis().to_vec(), a.alpha().to_vec()))
}

/// True when `alpha_i + alpha_{mu+1-i} = n`, with single endpoints at 0 and n.
pub fn spectrum_is_symmetric(alpha: &[Q], n: usize) -> bool {
    let mu = alpha.len();
    let top = q(n as i64);
    mu >= 2
        && alpha[0].is_zero()
        && alpha[1] > Q::zero()
        && alpha[mu - 1] == top
        && alpha[mu - 2] < top
        && (0..mu).all(|i| &alpha[i] + &alpha[mu - 1 - i] == top)
}

impl Reduction {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

/// Unit vector helper.
pub fn unit(mu: usize, j: usize) -> Vec<Q> {
    (0..mu)
        .map(|i| if i == j { Q::one() } else { Q::zero() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::{parse_laurent, parse_laurent_params};
    use crate::rational::qf;

    fn alg(s: &str, n: usize) -> JacobiAlgebra {
        JacobiAlgebra::new(&parse_laurent(s, n).unwrap()).unwrap()
    }

    #[test]
    fn circle() {
        let a = alg("u1 + u1^-1", 1);
        assert_eq!(a.basis(), &[vec![0], vec![1]]);
        assert_eq!(a.alpha(), &[q(0), q(1)]);
        let nf = a.normal_form(&parse_laurent("u1^2", 1).unwrap()).unwrap();
        assert_eq!(nf.to_text(), "1");
        let nf = a
            .normal_form(&parse_laurent("u1 + u1^-1", 1).unwrap())
            .unwrap();
        assert_eq!(nf.to_text(), "2*u1");
        let m = a
            .multiplication_matrix(&parse_laurent("u1 + u1^-1", 1).unwrap())
            .unwrap();
        assert_eq!(
            m.map(|p| p.constant_term()),
            Mat::from_fn(2, 2, |i, j| if i == j { q(0) } else { q(2) })
        );
        let g = a.residue_pairing().unwrap();
        assert_eq!(
            g,
            Mat::from_fn(2, 2, |i, j| if i == j { q(0) } else { q(1) })
        );
    }

    #[test]
    fn quartic_circle() {
        let a = alg("u1^2 + u1^-2", 1);
        assert_eq!(a.basis(), &[vec![0], vec![1], vec![-1], vec![2]]);
        assert_eq!(a.alpha(), &[q(0), qf(1, 2), qf(1, 2), q(1)]);
        let g = a.residue_pairing().unwrap();
        // u*u = u^2 is the top element, u*u^-1 = 1 has no top component
        assert_eq!(g.get(1, 1), &q(1));
        assert_eq!(g.get(1, 2), &q(0));
        assert_eq!(g.get(0, 3), &q(1));
    }

    #[test]
    fn projective_plane() {
        let a = alg("u1 + u2 + u1^-1*u2^-1", 2);
        assert_eq!(a.mu(), 3);
        assert_eq!(a.alpha(), &[q(0), q(1), q(2)]);
        assert!(spectrum_is_symmetric(a.alpha(), 2));
        let g = a.residue_pairing().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.get(i, j), &if i + j == 2 { q(1) } else { q(0) });
            }
        }
    }

    #[test]
    fn parametric_reduction_is_polynomial() {
        let f = parse_laurent("u1^2 + u1^-2", 1).unwrap();
        let big = parse_laurent_params("u1^2 + u1^-2 + x1 + x2*u1 + x3*u1^-1", 1, 3).unwrap();
        let a = JacobiAlgebra::parametric(&f, &big).unwrap();
        let m = a.multiplication_matrix(&big).unwrap();
        // multiplication matrices of commuting elements commute
        let g = a
            .multiplication_matrix(&parse_laurent_params("u1", 1, 3).unwrap())
            .unwrap();
        assert!(m.commutator(&g).is_zero());
        // every element reduces to a combination of the basis
        let h = parse_laurent_params("u1^5 + x2*u1^-3", 1, 3).unwrap();
        let red = a.reduce(&h).unwrap();
        let mut back = a.normal_form(&h).unwrap();
        for (k, qk) in red.quotients.iter().enumerate() {
            back = &back + &(qk * &a.big_f().log_der(k));
        }
        assert_eq!(back, h);
    }

    #[test]
    fn rejects_superdiagram_deformation() {
        let f = parse_laurent("u1 + u1^-1", 1).unwrap();
        let big = parse_laurent_params("u1 + u1^-1 + x1*u1", 1, 1).unwrap();
        assert!(matches!(
            JacobiAlgebra::parametric(&f, &big),
            Err(Error::Precondition(_))
        ));
    }
}
