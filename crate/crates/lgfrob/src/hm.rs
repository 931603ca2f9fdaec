//! Extension of a Frobenius type structure by extra variables, order by
//! order in each new variable, and extraction of the resulting Frobenius
//! manifold germ in flat coordinates.
//!
//! For a new variable `s` with Higgs field `D = sum D_p s^p`, the column
//! `D e_1` is prescribed. Commutation with the structure at `s = 0` gives
//! `D_p X_0 = X_0 D_p + Y_X` with `Y_X = -sum_{q<p} [D_q, X_{p-q}]`, so
//! pushing `D_p` through a word `W` applied to `e_1` yields `D_p S = T` for
//! the matrix `S` of generating vectors. The remaining coefficients follow
//! from flatness and the potentiality relation.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::{const_poly_mat, Mat, Ring};
use crate::poly::{var_names, Exp, Poly};
use crate::rational::{fmt_q, q, Q};
use crate::series::{series_inverse, to_poly, to_series, Series, Truncation};
use crate::structure::{
    apply_word, gc_global, integrate_closed_form, is_good_structure, krylov_words, operators,
    relations_within, FrobTypeStructure, GcGlobal, RelationCheck, RelationReport,
};

pub const DEFAULT_ORDER: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HmMode {
    /// Polynomial in the base variables, series in the new ones.
    SemiGlobal,
    /// Series in every variable around the origin.
    Germ,
}

#[derive(Clone, Debug)]
pub struct HmDeformation {
    pub base: FrobTypeStructure,
    pub ell: usize,
    /// Prescribed first columns `f_j(x, y)`, `f(x, 0) = 0`.
    pub f_choices: Vec<Poly>,
    pub b0: Mat<Poly>,
    /// Higgs matrices for `x_1..x_r` followed by `y_1..y_ell`.
    pub c: Vec<Mat<Poly>>,
    /// Identities hold on all monomials of weighted degree `<= order`.
    pub order: usize,
    pub weights: Vec<u32>,
    pub mode: HmMode,
    pub words: Vec<Vec<usize>>,
}

impl HmDeformation {
    pub fn nvars(&self) -> usize {
        self.base.r + self.ell
    }

    /// Truncation the matrices are stored at (one above `order`).
    pub fn stored_order(&self) -> i64 {
        self.order as i64 + 1
    }

    pub fn relations(&self) -> RelationReport {
        let mut rep = relations_within(
            &self.b0,
            &self.c,
            &self.base.b_inf,
            &self.base.g,
            self.base.n,
            Some((&self.weights, self.order as i64)),
        );
        let r = self.base.r;
        let w = (0..self.ell).find_map(|k| {
            (0..self.base.mu).find_map(|j| {
                let lhs = self.c[r + k].get(j, 0);
                let rhs = self.f_choices[j].derivative(r + k);
                let d = (lhs - &rhs).truncate(&self.weights, self.order as i64);
                (!d.is_zero())
                    .then(|| format!("D(y{})[{j},0] - df{j}/dy{} = {}", k + 1, k + 1, d.fmt_x()))
            })
        });
        rep.checks.push(RelationCheck {
            name: "D e_1 = df/dy".into(),
            passed: w.is_none(),
            witness: w,
        });
        let w = self.restriction_mismatch();
        rep.checks.push(RelationCheck {
            name: "y = 0 restriction".into(),
            passed: w.is_none(),
            witness: w,
        });
        rep
    }

    /// Matrices at `y = 0`, as matrices over `Q[x]`.
    pub fn restrict_y0(&self) -> (Mat<Poly>, Vec<Mat<Poly>>) {
        let r = self.base.r;
        let cut = |p: &Poly| {
            let mut p = p.clone();
            for k in 0..self.ell {
                p = p.subs(r + k, &Q::zero());
            }
            p.restrict_vars(r)
        };
        (
            self.b0.map(cut),
            self.c[..r].iter().map(|m| m.map(cut)).collect(),
        )
    }

    fn restriction_mismatch(&self) -> Option<String> {
        let (b0, c) = self.restrict_y0();
        let r = self.base.r;
        let wts = &self.weights[..r];
        let ord = self.order as i64;
        let same = |a: &Mat<Poly>, b: &Mat<Poly>| {
            a.map(|p| p.truncate(wts, ord)) == b.map(|p| p.truncate(wts, ord))
        };
        if !same(&b0, &self.base.b0) {
            return Some("B0(x, 0) differs from the input".into());
        }
        (0..r)
            .find(|&i| !same(&c[i], &self.base.c[i]))
            .map(|i| format!("C({})(x, 0) differs from the input", i + 1))
    }

    /// `x -> x + a` (semi-global mode only).
    pub fn translate(&self, a: &[Q]) -> Result<HmDeformation> {
        if self.mode != HmMode::SemiGlobal {
            return Err(Error::Precondition(
                "only semi-global deformations can be translated".into(),
            ));
        }
        let mut shift = a.to_vec();
        shift.extend(std::iter::repeat_n(Q::zero(), self.ell));
        let sh = |m: &Mat<Poly>| m.map(|p| p.shift(&shift));
        Ok(HmDeformation {
            base: crate::structure::translate_structure(&self.base, a),
            ell: self.ell,
            f_choices: self.f_choices.iter().map(|p| p.shift(&shift)).collect(),
            b0: sh(&self.b0),
            c: self.c.iter().map(sh).collect(),
            order: self.order,
            weights: self.weights.clone(),
            mode: self.mode,
            words: self.words.clone(),
        })
    }

    /// Extended primitive map `Gamma_j = int sum_k C(k)_{j1} dz_k`, through `order + 1`.
    pub fn primitive_map(&self) -> Result<Vec<Poly>> {
        let ord = self.order as i64;
        (0..self.base.mu)
            .map(|j| {
                let w: Vec<Poly> = self
                    .c
                    .iter()
                    .map(|m| m.get(j, 0).truncate(&self.weights, ord))
                    .collect();
                integrate_closed_form(&w)
            })
            .collect()
    }
}

fn e1_series(mu: usize, trunc: &Arc<Truncation>) -> Vec<Series> {
    let z = Series::zero(trunc);
    (0..mu)
        .map(|i| if i == 0 { z.one_like() } else { z.clone() })
        .collect()
}

fn col_matrix(cols: Vec<Vec<Series>>, mu: usize) -> Mat<Series> {
    Mat::from_columns(mu, cols)
}

/// Extends `ops = [B0, C(0), ..., C(s-1)]` by the variable with index `s`.
fn extend_one(
    ops: &mut Vec<Mat<Series>>,
    s: usize,
    v: &[Series],
    words: &[Vec<usize>],
    b_inf: &Mat<Series>,
    trunc: &Arc<Truncation>,
) -> Result<()> {
    let mu = b_inf.rows();
    let m = trunc.order;
    let x0 = ops.clone();
    let e1 = e1_series(mu, trunc);
    let s0 = col_matrix(
        words
            .iter()
            .map(|w| apply_word(&x0, w, e1.clone()))
            .collect(),
        mu,
    );
    let s0inv = series_inverse(&s0).ok_or_else(|| {
        Error::Verification(format!(
            "generating words are not a basis: det = {} (GC fails for variable {})",
            s0.det().poly().fmt_x(),
            s + 1
        ))
    })?;
    let mut exps: Vec<Vec<Mat<Series>>> = x0.iter().map(|x| vec![x.clone()]).collect();
    let mut ds: Vec<Mat<Series>> = Vec::new();
    for p in 0..=m {
        let vp: Vec<Series> = v
            .iter()
            .map(|vi| crate::series::coeff_in(vi, s, p as i32))
            .collect();
        let ys: Vec<Mat<Series>> = (0..ops.len())
            .map(|o| {
                let mut y = b_inf.zeros_like_self();
                for (qq, dq) in ds.iter().enumerate() {
                    y = y.minus(&dq.commutator(&exps[o][p as usize - qq]));
                }
                y
            })
            .collect();
        let cols: Vec<Vec<Series>> = words
            .iter()
            .map(|w| {
                let mut u = vp.clone();
                let mut vv = e1.clone();
                for &k in w {
                    let a = x0[k].apply(&u);
                    let b = ys[k].apply(&vv);
                    u = a.iter().zip(&b).map(|(x, y)| x.plus(y)).collect();
                    vv = x0[k].apply(&vv);
                }
                u
            })
            .collect();
        let t = col_matrix(cols, mu);
        let inner = Truncation::new(trunc.weights.clone(), m - p);
        let dp = to_series(
            &to_poly(&t.times(&s0inv)).map(|e| e.truncate(&inner.weights, inner.order)),
            trunc,
        );
        let k = q(p + 1).recip();
        exps[0].push(b_inf.commutator(&dp).minus(&dp).scale(&k));
        for i in 0..s {
            exps[1 + i].push(dp.map(|e| e.derivative(i)).scale(&k));
        }
        ds.push(dp);
    }
    let assemble = |coeffs: &[Mat<Series>]| {
        let mut acc = Mat::zeros_like(mu, mu, &Series::zero(trunc));
        for (p, cm) in coeffs.iter().enumerate() {
            if p as i64 > m {
                break;
            }
            acc = acc.plus(&cm.map(|e| Series::new(&e.poly().mul_var_pow(s, p as i32), trunc)));
        }
        acc
    };
    let new_ops: Vec<Mat<Series>> = exps.iter().map(|c| assemble(c)).collect();
    *ops = new_ops;
    ops.push(assemble(&ds));
    Ok(())
}

trait ZerosLike {
    fn zeros_like_self(&self) -> Self;
}

impl ZerosLike for Mat<Series> {
    fn zeros_like_self(&self) -> Self {
        Mat::zeros_like(self.rows(), self.cols(), &self.proto().zero_like())
    }
}

/// Chooses the mode and generating words.
fn choose_words(s: &FrobTypeStructure) -> Result<(HmMode, Vec<Vec<usize>>)> {
    match gc_global(s) {
        GcGlobal::Holds { words } => Ok((HmMode::SemiGlobal, words)),
        _ => {
            let at0: Vec<Mat<Q>> = operators(s)
                .iter()
                .map(|m| crate::matrix::eval_mat(m, &s.origin()))
                .collect();
            krylov_words(&at0, s.mu)
                .map(|w| (HmMode::Germ, w))
                .ok_or_else(|| {
                    Error::Precondition("generation condition fails at the origin".into())
                })
        }
    }
}

/// Extends `s` by `ell` new variables with prescribed first columns
/// `f_choices` (polynomials in `x_1..x_r, y_1..y_ell`).
pub fn hm_extend(s: &FrobTypeStructure, f_choices: &[Poly], order: usize) -> Result<HmDeformation> {
    let (mode, words) = choose_words(s)?;
    hm_extend_with(s, f_choices, order, mode, words)
}

/// As [`hm_extend`] but always in germ mode.
pub fn hm_extend_germ(
    s: &FrobTypeStructure,
    f_choices: &[Poly],
    order: usize,
) -> Result<HmDeformation> {
    let at0: Vec<Mat<Q>> = operators(s)
        .iter()
        .map(|m| crate::matrix::eval_mat(m, &s.origin()))
        .collect();
    let words = krylov_words(&at0, s.mu)
        .ok_or_else(|| Error::Precondition("generation condition fails at the origin".into()))?;
    hm_extend_with(s, f_choices, order, HmMode::Germ, words)
}

fn hm_extend_with(
    s: &FrobTypeStructure,
    f_choices: &[Poly],
    order: usize,
    mode: HmMode,
    words: Vec<Vec<usize>>,
) -> Result<HmDeformation> {
    let (r, mu) = (s.r, s.mu);
    if f_choices.len() != mu {
        return Err(Error::Input(format!(
            "expected {mu} prescribed columns, got {}",
            f_choices.len()
        )));
    }
    let nv = f_choices[0].nvars();
    if nv < r || f_choices.iter().any(|p| p.nvars() != nv) {
        return Err(Error::Input(
            "prescribed columns must share the variables x, y".into(),
        ));
    }
    let ell = nv - r;
    for (j, p) in f_choices.iter().enumerate() {
        if p.terms().any(|(e, _)| e[r..].iter().all(|&v| v == 0)) {
            return Err(Error::Input(format!(
                "prescribed column entry {j} does not vanish at y = 0"
            )));
        }
    }
    let x_weight = if mode == HmMode::SemiGlobal { 0 } else { 1 };
    let mut weights = vec![x_weight; r];
    weights.extend(std::iter::repeat_n(1, ell));
    let trunc = Truncation::new(weights.clone(), order as i64 + 1);
    let pos: Vec<usize> = (0..r).collect();
    let lift = |m: &Mat<Poly>| to_series(&m.map(|p| p.embed(nv, &pos)), &trunc);
    let mut ops: Vec<Mat<Series>> = std::iter::once(lift(&s.b0))
        .chain(s.c.iter().map(lift))
        .collect();
    let b_inf = to_series(&const_poly_mat(&s.b_inf, nv), &trunc);
    for k in 0..ell {
        let var = r + k;
        // f with the later variables set to zero
        let v: Vec<Series> = f_choices
            .iter()
            .map(|p| {
                let mut p = p.clone();
                for later in var + 1..nv {
                    p = p.subs(later, &Q::zero());
                }
                Series::new(&p.derivative(var), &trunc)
            })
            .collect();
        extend_one(&mut ops, var, &v, &words, &b_inf, &trunc)?;
    }
    let mut it = ops.into_iter().map(|m| to_poly(&m));
    let b0 = it.next().unwrap();
    let c: Vec<Mat<Poly>> = it.collect();
    let h = HmDeformation {
        base: s.clone(),
        ell,
        f_choices: f_choices.to_vec(),
        b0,
        c,
        order,
        weights,
        mode,
        words,
    };
    if ell > 0 {
        let rep = h.relations();
        if let Some(bad) = rep.first_failure() {
            return Err(Error::Verification(format!(
                "extension violates {}: {}",
                bad.name,
                bad.witness.clone().unwrap_or_default()
            )));
        }
    }
    Ok(h)
}

/// Prescribed columns `f_j = 0` for `j < r` and `f_{r+k} = y_k`.
pub fn universal_choices(r: usize, mu: usize) -> Vec<Poly> {
    (0..mu)
        .map(|j| {
            if j < r {
                Poly::zero(mu)
            } else {
                Poly::var(mu, j)
            }
        })
        .collect()
}

pub fn universal_good_deformation(s: &FrobTypeStructure, order: usize) -> Result<HmDeformation> {
    if !is_good_structure(s) {
        return Err(Error::Precondition(
            "structure does not come from a good deformation".into(),
        ));
    }
    let h = hm_extend(s, &universal_choices(s.r, s.mu), order)?;
    let gamma = h.primitive_map()?;
    if !has_universal_shape(&gamma, s.r, &h.weights, order as i64) {
        return Err(Error::Verification(
            "extended primitive map is not triangular".into(),
        ));
    }
    Ok(h)
}

/// `(-x_1 + G_1(x_2..x_r), ..., -x_r, y_1, ..., y_{mu-r})` through `order`.
pub fn has_universal_shape(gamma: &[Poly], r: usize, weights: &[u32], order: i64) -> bool {
    let nv = gamma.first().map(|p| p.nvars()).unwrap_or(0);
    gamma.iter().enumerate().all(|(j, g)| {
        let g = g.truncate(weights, order);
        if j >= r {
            return g == Poly::var(nv, j);
        }
        let rest = &g + &Poly::var(nv, j);
        let ok = rest
            .terms()
            .all(|(e, _)| e[..=j].iter().all(|&v| v == 0) && e[r..].iter().all(|&v| v == 0));
        ok
    })
}

// ---------------------------------------------------------------------------
// Frobenius germs
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct FrobeniusGerm {
    pub n: usize,
    pub mu: usize,
    /// `c_abc` exact through total degree `order`, potential through `order + 3`.
    pub order: usize,
    pub names: Vec<String>,
    pub alpha: Vec<Q>,
    pub metric: Mat<Q>,
    pub unit: usize,
    /// Constant part of the Euler field, `B0(0) e_1`.
    pub euler_shift: Vec<Q>,
    /// Potential without terms of degree `<= 2`.
    pub potential: Poly,
}

fn all_ones(n: usize) -> Vec<u32> {
    vec![1; n]
}

pub fn frobenius_manifold_from_deformation(h: &HmDeformation) -> Result<FrobeniusGerm> {
    let mu = h.base.mu;
    let nv = h.nvars();
    if nv != mu {
        return Err(Error::Precondition(format!(
            "extended base has {nv} coordinates but the bundle has rank {mu}"
        )));
    }
    let n_ord = h.order as i64;
    let k_ord = n_ord + 1;
    let trunc = Truncation::new(all_ones(mu), k_ord);
    let ser = |m: &Mat<Poly>| to_series(m, &trunc);
    let cs: Vec<Mat<Series>> = h.c.iter().map(ser).collect();
    let b0 = ser(&h.b0);
    // flat coordinates t = -Gamma
    let gamma = h.primitive_map()?;
    let t_of_z: Vec<Series> = gamma
        .iter()
        .map(|g| Series::new(&g.scale(&-Q::one()), &trunc))
        .collect();
    let a = Mat::from_fn(mu, mu, |j, k| {
        let mut e = vec![0; mu];
        e[k] = 1;
        t_of_z[j].poly().coeff(&e)
    });
    let a_inv = a.inverse().ok_or_else(|| {
        Error::Precondition(
            "extended period map is not invertible at the origin (not universal)".into(),
        )
    })?;
    // z(t) by fixed point iteration: z = A^-1 (t - (t(z) - A z))
    let tvars: Vec<Series> = (0..mu)
        .map(|i| Series::new(&Poly::var(mu, i), &trunc))
        .collect();
    let linear = |z: &[Series]| -> Vec<Series> {
        (0..mu)
            .map(|j| {
                let mut acc = Series::zero(&trunc);
                for k in 0..mu {
                    acc = acc.plus(&z[k].scale(a.get(j, k)));
                }
                acc
            })
            .collect()
    };
    let mut z: Vec<Series> = tvars.clone();
    for _ in 0..=k_ord {
        let tz: Vec<Series> = t_of_z.iter().map(|t| t.compose(&z)).collect();
        let lin = linear(&z);
        let rhs: Vec<Series> = (0..mu)
            .map(|j| tvars[j].minus(&tz[j].minus(&lin[j])))
            .collect();
        z = (0..mu)
            .map(|k| {
                let mut acc = Series::zero(&trunc);
                for j in 0..mu {
                    acc = acc.plus(&rhs[j].scale(a_inv.get(k, j)));
                }
                acc
            })
            .collect();
    }
    let check: Vec<Series> = t_of_z.iter().map(|t| t.compose(&z)).collect();
    if check != tvars {
        return Err(Error::Verification(
            "period map inversion did not converge".into(),
        ));
    }
    // dt/dz and the multiplication matrices M_a = -sum_k (dz_k/dt_a) C(k)
    let pm = Mat::from_fn(mu, mu, |j, k| cs[k].get(j, 0).negate());
    let pm_inv = series_inverse(&pm)
        .ok_or_else(|| Error::Precondition("extended period map is not invertible".into()))?;
    let at_t = |m: &Mat<Series>| m.map(|e| e.compose(&z));
    let pm_inv_t = at_t(&pm_inv);
    let cs_t: Vec<Mat<Series>> = cs.iter().map(at_t).collect();
    let g = &h.base.g;
    let gs = to_series(&const_poly_mat(g, mu), &trunc);
    let mut cabc: BTreeMap<(usize, usize, usize), Poly> = BTreeMap::new();
    for ia in 0..mu {
        let mut ma = Mat::zeros_like(mu, mu, &Series::zero(&trunc));
        for k in 0..mu {
            ma = ma.minus(&cs_t[k].scale_by(pm_inv_t.get(k, ia)));
        }
        // c_abc = sum_d (M_a)_{db} g_dc = (M_a^T g)_{bc}
        let low = ma.transpose().times(&gs);
        for ib in 0..mu {
            for ic in 0..mu {
                cabc.insert(
                    (ia, ib, ic),
                    low.get(ib, ic).poly().truncate(&all_ones(mu), n_ord),
                );
            }
        }
    }
    let potential = potential_from_constants(&cabc, mu, n_ord)?;
    let origin = vec![Q::zero(); mu];
    let b00 = crate::matrix::eval_mat(&to_poly(&b0), &origin);
    Ok(FrobeniusGerm {
        n: h.base.n,
        mu,
        order: h.order,
        names: var_names("t", mu)
            .iter()
            .enumerate()
            .map(|(i, _)| format!("t{i}"))
            .collect(),
        alpha: h.base.alpha.clone(),
        metric: g.clone(),
        unit: 0,
        euler_shift: b00.column(0),
        potential,
    })
}

/// Integrates third derivatives `c_abc` (homogeneous pieces of degree
/// `<= order`) into a potential, checking that they are third derivatives.
pub fn potential_from_constants(
    c: &BTreeMap<(usize, usize, usize), Poly>,
    mu: usize,
    order: i64,
) -> Result<Poly> {
    let mut phi = Poly::zero(mu);
    for d in 3..=order + 3 {
        let mut acc = Poly::zero(mu);
        for ((a, b, cc), p) in c {
            let part = p.homogeneous_part((d - 3) as i32);
            if part.is_zero() {
                continue;
            }
            let mut e = vec![0; mu];
            e[*a] += 1;
            e[*b] += 1;
            e[*cc] += 1;
            acc = &acc + &part.mul_filtered(&Poly::monomial(e, Q::one()), |_| true);
        }
        let k = q(d * (d - 1) * (d - 2)).recip();
        phi = &phi + &acc.scale(&k);
    }
    for ((a, b, cc), p) in c {
        let d3 = phi
            .derivative(*a)
            .derivative(*b)
            .derivative(*cc)
            .truncate(&all_ones(mu), order);
        if d3 != *p {
            return Err(Error::Verification(format!(
                "structure constants are not third derivatives (index {a},{b},{cc})"
            )));
        }
    }
    Ok(phi)
}

impl FrobeniusGerm {
    fn w(&self) -> Vec<u32> {
        all_ones(self.mu)
    }

    /// `c_abc = d_a d_b d_c Phi` through degree `order`.
    pub fn c(&self, a: usize, b: usize, c: usize) -> Poly {
        self.potential
            .derivative(a)
            .derivative(b)
            .derivative(c)
            .truncate(&self.w(), self.order as i64)
    }

    /// `c_ab^d = sum_c c_abc g^{cd}`: matrix of multiplication by `d_a`.
    pub fn product_matrix(&self, a: usize) -> Mat<Poly> {
        let gi = self.metric.inverse().expect("metric is nondegenerate");
        Mat::from_fn(self.mu, self.mu, |d, b| {
            let mut acc = Poly::zero(self.mu);
            for cc in 0..self.mu {
                acc.add_scaled(&self.c(a, b, cc), gi.get(cc, d));
            }
            acc
        })
    }

    pub fn potential_coeff(&self, e: &[i32]) -> Q {
        self.potential.coeff(e)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .potential
            .terms()
            .map(|(e, c)| json!([e, fmt_q(c)]))
            .collect();
        json!({
            "coordinates": self.names,
            "unit": self.names[self.unit],
            "n": self.n,
            "order": self.order,
            "charges": self.alpha.iter().map(fmt_q).collect::<Vec<_>>(),
            "euler_shift": self.euler_shift.iter().map(fmt_q).collect::<Vec<_>>(),
            "metric": mat_json(&self.metric),
            "potential": terms,
        })
    }

    pub fn potential_text(&self) -> String {
        self.potential.fmt_with(&self.names)
    }
}

pub fn mat_json(m: &Mat<Q>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    (0..m.cols())
                        .map(|j| Value::String(fmt_q(m.get(i, j))))
                        .collect(),
                )
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WdvvReport {
    pub checks: Vec<RelationCheck>,
}

impl WdvvReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&RelationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const WDVV: &str = "WDVV";
pub const UNIT: &str = "unit";
pub const HOMOGENEITY: &str = "Euler homogeneity";
pub const METRIC: &str = "metric";

pub fn check_wdvv(gm: &FrobeniusGerm) -> WdvvReport {
    let mu = gm.mu;
    let ord = gm.order as i64;
    let w = all_ones(mu);
    let mut checks = Vec::new();
    let mut push = |name: &str, wit: Option<String>| {
        checks.push(RelationCheck {
            name: name.into(),
            passed: wit.is_none(),
            witness: wit,
        })
    };
    let gi = gm.metric.inverse();
    push(
        METRIC,
        match &gi {
            Some(_) if gm.metric.is_symmetric() => None,
            _ => Some("metric is degenerate or not symmetric".into()),
        },
    );
    let Some(gi) = gi else {
        return WdvvReport { checks };
    };
    let c: Vec<Poly> = (0..mu * mu * mu)
        .map(|k| gm.c(k / (mu * mu), (k / mu) % mu, k % mu))
        .collect();
    let cc = |a: usize, b: usize, d: usize| &c[(a * mu + b) * mu + d];

    // unit: c_{0bc} = g_bc
    let mut wit = None;
    'unit: for b in 0..mu {
        for d in 0..mu {
            let diff = cc(gm.unit, b, d) - &Poly::constant(mu, gm.metric.get(b, d).clone());
            if !diff.is_zero() {
                wit = Some(format!(
                    "c_(unit,{b},{d}) - g_({b},{d}) = {}",
                    diff.fmt_with(&gm.names)
                ));
                break 'unit;
            }
        }
    }
    push(UNIT, wit);

    // associativity
    let mut wit = None;
    'wdvv: for a in 0..mu {
        for b in 0..mu {
            for c2 in 0..mu {
                for d in 0..mu {
                    let mut lhs = Poly::zero(mu);
                    for e in 0..mu {
                        for f in 0..mu {
                            let gef = gi.get(e, f);
                            if gef.is_zero() {
                                continue;
                            }
                            let p1 = cc(a, b, e).mul_filtered(cc(f, c2, d), |x| {
                                Poly::weighted_degree(x, &w) <= ord
                            });
                            let p2 = cc(a, c2, e)
                                .mul_filtered(cc(f, b, d), |x| Poly::weighted_degree(x, &w) <= ord);
                            lhs.add_scaled(&(&p1 - &p2), gef);
                        }
                    }
                    if !lhs.is_zero() {
                        let low = lhs.min_total_degree().unwrap_or(0);
                        wit = Some(format!(
                            "indices ({a},{b},{c2},{d}) fail at order {low}: {}",
                            lhs.homogeneous_part(low).fmt_with(&gm.names)
                        ));
                        break 'wdvv;
                    }
                }
            }
        }
    }
    push(WDVV, wit);

    // E(Phi) - (3 - n) Phi has no terms of degree 3..=order+2
    let mut e_phi = gm.potential.scale(&-q(3 - gm.n as i64));
    for a in 0..mu {
        let da = gm.potential.derivative(a);
        let lin = (Q::one() - &gm.alpha[a]).clone();
        e_phi = &e_phi + &(&da * &Poly::var(mu, a)).scale(&lin);
        e_phi = &e_phi + &da.scale(&gm.euler_shift[a]);
    }
    let bad: Vec<(Exp, Q)> = e_phi
        .terms()
        .filter(|(e, _)| {
            let d: i32 = e.iter().sum();
            d >= 3 && (d as i64) <= ord + 2
        })
        .map(|(e, c)| (e.clone(), c.clone()))
        .collect();
    push(
        HOMOGENEITY,
        bad.first()
            .map(|(e, c)| format!("E(Phi) - (3-n)Phi has coefficient {} at {e:?}", fmt_q(c))),
    );
    WdvvReport { checks }
}

// ---------------------------------------------------------------------------
// Comparing germs
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Comparison {
    /// `t2_{perm[a]} = signs[a] * t1_a`.
    Isomorphic { perm: Vec<usize>, signs: Vec<i32> },
    NotIsomorphic {
        reason: String,
        order: Option<usize>,
    },
}

impl Comparison {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, Comparison::Isomorphic { .. })
    }
}

pub const COMPARE_CANDIDATE_LIMIT: usize = 200_000;

fn block_permutations(alpha: &[Q], unit: usize) -> Vec<Vec<usize>> {
    let mut blocks: BTreeMap<Q, Vec<usize>> = BTreeMap::new();
    for (i, a) in alpha.iter().enumerate() {
        if i != unit {
            blocks.entry(a.clone()).or_default().push(i);
        }
    }
    let mut perms = vec![(0..alpha.len()).collect::<Vec<_>>()];
    for idx in blocks.values() {
        let mut next = Vec::new();
        for base in &perms {
            for p in permutations(idx.len()) {
                let mut m = base.clone();
                for (k, &src) in idx.iter().enumerate() {
                    m[src] = idx[p[k]];
                }
                next.push(m);
            }
        }
        perms = next;
    }
    perms
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Pulls `Phi2` back along `t2_{perm[a]} = sign[a] t1_a`.
fn pull_back(phi: &Poly, perm: &[usize], signs: &[i32]) -> Poly {
    let mu = perm.len();
    let mut out = Poly::zero(mu);
    let mut inv = vec![0; mu];
    for (a, &p) in perm.iter().enumerate() {
        inv[p] = a;
    }
    for (e, c) in phi.terms() {
        let mut f = vec![0; mu];
        let mut sign = 1i32;
        for (b, &k) in e.iter().enumerate() {
            let a = inv[b];
            f[a] = k;
            if signs[a] < 0 && k % 2 != 0 {
                sign = -sign;
            }
        }
        out.add_term(f, if sign < 0 { -c.clone() } else { c.clone() });
    }
    out
}

/// Searches for a signed permutation of flat coordinates, respecting the
/// unit and the grading, that carries the metric and potential of `g2` to
/// those of `g1` through the common order.
pub fn compare_structures(g1: &FrobeniusGerm, g2: &FrobeniusGerm) -> Result<Comparison> {
    if g1.mu != g2.mu || g1.alpha != g2.alpha || g1.unit != g2.unit {
        return Ok(Comparison::NotIsomorphic {
            reason: "rank, spectrum or unit differ".into(),
            order: None,
        });
    }
    let mu = g1.mu;
    let ord = g1.order.min(g2.order) as i64 + 3;
    let w = all_ones(mu);
    let p1 = g1.potential.truncate(&w, ord);
    let p2 = g2.potential.truncate(&w, ord);
    let perms = block_permutations(&g1.alpha, g1.unit);
    let free: Vec<usize> = (0..mu).filter(|&i| i != g1.unit).collect();
    let total = perms.len().saturating_mul(1usize << free.len().min(60));
    if total > COMPARE_CANDIDATE_LIMIT {
        return Err(Error::Budget(format!("{total} candidate isomorphisms")));
    }
    let mut best: Option<i64> = None;
    for perm in &perms {
        for mask in 0..(1usize << free.len()) {
            let mut signs = vec![1; mu];
            for (k, &i) in free.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    signs[i] = -1;
                }
            }
            let metric_ok = (0..mu).all(|a| {
                (0..mu).all(|b| {
                    let v = g2.metric.get(perm[a], perm[b]) * q((signs[a] * signs[b]) as i64);
                    &v == g1.metric.get(a, b)
                })
            });
            if !metric_ok {
                continue;
            }
            let diff = &pull_back(&p2, perm, &signs) - &p1;
            if diff.is_zero() {
                return Ok(Comparison::Isomorphic {
                    perm: perm.clone(),
                    signs,
                });
            }
            let low = diff.min_total_degree().unwrap_or(0) as i64;
            best = Some(best.map_or(low, |b: i64| b.max(low)));
        }
    }
    Ok(Comparison::NotIsomorphic {
        reason: "no signed graded permutation matches the potentials".into(),
        order: best.map(|b| (b - 3).max(0) as usize),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse_laurent;
    use crate::structure::{build_good_maximal_deformation, build_structure};

    fn p1_germ(order: usize) -> FrobeniusGerm {
        let f = parse_laurent("u1 + u1^-1", 1).unwrap();
        let s = build_structure(&f, &[parse_laurent("1", 1).unwrap()], None).unwrap();
        let h = universal_good_deformation(&s, order).unwrap();
        assert_eq!(h.mode, HmMode::SemiGlobal);
        frobenius_manifold_from_deformation(&h).unwrap()
    }

    #[test]
    fn projective_line() {
        let g = p1_germ(6);
        // 1/2 t0^2 t1 + sum_{k>=3} t1^k / k!
        assert_eq!(g.potential_coeff(&[2, 1]), crate::rational::qf(1, 2));
        let mut fact = 1i64;
        for k in 1..=9 {
            fact *= k;
            if k >= 3 {
                assert_eq!(
                    g.potential_coeff(&[0, k as i32]),
                    crate::rational::qf(1, fact),
                    "t1^{k}"
                );
            }
        }
        assert!(check_wdvv(&g).all_passed(), "{:?}", check_wdvv(&g));
    }

    #[test]
    fn constant_column() {
        let f = parse_laurent("u1 + u1^-1", 1).unwrap();
        let s = build_structure(&f, &[parse_laurent("1", 1).unwrap()], None).unwrap();
        let fc = vec![Poly::var(2, 1), Poly::zero(2)];
        let h = hm_extend(&s, &fc, 6).unwrap();
        assert_eq!(h.c[1].get(0, 0), &Poly::one(2));
        assert!(h.c[1].get(1, 0).is_zero());
    }

    #[test]
    fn quartic_good_max() {
        let f = parse_laurent("u1^2 + u1^-2", 1).unwrap();
        let d = build_good_maximal_deformation(&f).unwrap();
        let s = crate::structure::build_canonical_structure(&d).unwrap();
        let h = universal_good_deformation(&s, 4).unwrap();
        let g = frobenius_manifold_from_deformation(&h).unwrap();
        assert!(check_wdvv(&g).all_passed(), "{:?}", check_wdvv(&g));
        assert!(compare_structures(&g, &g).unwrap().is_isomorphic());
    }
}
