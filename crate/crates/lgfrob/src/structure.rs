//! Frobenius type structures over the subdiagram parameter space.
//!
//! The basis of the bundle is obtained in two steps. At the origin the graded
//! monomial basis is corrected by a unipotent gauge `P(theta) = I + sum theta^k P_k`
//! so that `theta^2 d/dtheta` takes the normal form `B0 + theta Binf`. The
//! gauge is then carried along the parameters by solving the flatness
//! equations order by order in `x`; with polynomial input the recursion
//! terminates and every identity is checked exactly on the result.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::JacobiAlgebra;
use crate::laurent::LaurentPoly;
use crate::matrix::{const_poly_mat, eval_mat, Mat, Ring};
use crate::newton::{subdiagram_monomials, NewtonPolyhedron};
use crate::poly::{Exp, Poly};
use crate::rational::{fmt_q, q, Q};

/// Highest `x`-degree the transport recursion may reach before giving up.
pub const TRANSPORT_DEGREE_LIMIT: usize = 48;

#[derive(Clone, Debug, PartialEq)]
pub struct SubdiagramDeformation {
    pub f: LaurentPoly,
    pub gs: Vec<LaurentPoly>,
    pub injective: bool,
    pub maximal: bool,
    pub surjective: bool,
    pub good: bool,
}

impl SubdiagramDeformation {
    pub fn r(&self) -> usize {
        self.gs.len()
    }

    /// `F = f + sum x_i g_i`.
    pub fn big_f(&self) -> LaurentPoly {
        deformation_polynomial(&self.f, &self.gs)
    }
}

pub fn deformation_polynomial(f: &LaurentPoly, gs: &[LaurentPoly]) -> LaurentPoly {
    let r = gs.len();
    let mut big = f.at_origin().with_params(r);
    for (i, g) in gs.iter().enumerate() {
        let x = Poly::var(r, i);
        big = &big + &g.at_origin().with_params(r).mul_poly(&x);
    }
    big
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrobTypeStructure {
    pub n: usize,
    pub r: usize,
    pub mu: usize,
    pub f: LaurentPoly,
    pub gs: Vec<LaurentPoly>,
    pub basis: Vec<Exp>,
    pub alpha: Vec<Q>,
    /// Matrix of `R0` (multiplication by `F`) over `Q[x]`.
    pub b0: Mat<Poly>,
    /// Higgs matrices (multiplication by `-g_i`).
    pub c: Vec<Mat<Poly>>,
    pub b_inf: Mat<Q>,
    pub g: Mat<Q>,
    /// Gauge `P(x, theta)` from the monomial basis, `theta` last; absent
    /// after deserialization.
    pub gauge: Option<Mat<Poly>>,
}

impl FrobTypeStructure {
    pub fn origin(&self) -> Vec<Q> {
        vec![Q::zero(); self.r]
    }

    pub fn b0_at(&self, a: &[Q]) -> Mat<Q> {
        eval_mat(&self.b0, a)
    }

    pub fn c_at(&self, i: usize, a: &[Q]) -> Mat<Q> {
        eval_mat(&self.c[i], a)
    }

    /// `theta`-free part of the gauge, `P0(x)`.
    pub fn gauge0(&self) -> Option<Mat<Poly>> {
        self.gauge.as_ref().map(|p| theta_coeff(p, self.r, 0))
    }
}

// ---------------------------------------------------------------------------
// theta / x bookkeeping for matrices over Q[x][theta]
// ---------------------------------------------------------------------------

/// Coefficient of `theta^d` (theta is variable `r`), as a matrix over `Q[x]`.
pub fn theta_coeff(m: &Mat<Poly>, r: usize, d: i32) -> Mat<Poly> {
    m.map(|p| p.coeff_in(r, d).restrict_vars(r))
}

fn theta_degree(m: &Mat<Poly>, r: usize) -> i32 {
    m.entries()
        .filter_map(|p| p.degree_in(r))
        .max()
        .unwrap_or(0)
}

/// Splits a matrix over `Q[x][theta]` into `x`-homogeneous layers whose
/// entries are polynomials in `theta` alone.
fn split_x(m: &Mat<Poly>, r: usize) -> BTreeMap<Exp, Mat<Poly>> {
    let mut keys: BTreeSet<Exp> = BTreeSet::new();
    for p in m.entries() {
        for (e, _) in p.terms() {
            keys.insert(e[..r].to_vec());
        }
    }
    let mut out = BTreeMap::new();
    for k in keys {
        let layer = m.map(|p| {
            let mut t = Poly::zero(1);
            for (e, c) in p.terms() {
                if e[..r] == k[..] {
                    t.add_term(vec![e[r]], c.clone());
                }
            }
            t
        });
        out.insert(k, layer);
    }
    out
}

fn x_degree(m: &Mat<Poly>, r: usize) -> i32 {
    m.entries()
        .flat_map(|p| p.terms().map(|(e, _)| e[..r].iter().sum::<i32>()))
        .max()
        .unwrap_or(0)
}

fn multi_indices(r: usize, d: usize) -> Vec<Exp> {
    if r == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in multi_indices(r - 1, d - first) {
            rest.insert(0, first as i32);
            out.push(rest);
        }
    }
    out
}

fn theta_mat_zero(mu: usize) -> Mat<Poly> {
    Mat::zeros_like(mu, mu, &Poly::zero(1))
}

fn theta_part(m: &Mat<Poly>, d: i32) -> Mat<Q> {
    m.map(|p| p.coeff(&[d]))
}

// ---------------------------------------------------------------------------
// Point gauge
// ---------------------------------------------------------------------------

/// Unipotent gauge at a point. `omega` is the matrix of `theta^2 d/dtheta`
/// on the monomial basis, with entries in `Q[theta]` (one variable).
/// Returns `P(theta)` with `omega P + theta^2 P' = P (omega_0 + theta diag(alpha))`.
pub fn point_gauge(omega: &Mat<Poly>, alpha: &[Q]) -> Result<Mat<Poly>> {
    let mu = alpha.len();
    let deg = theta_degree(omega, 0);
    let om: Vec<Mat<Q>> = (0..=deg).map(|a| theta_part(omega, a)).collect();
    let a_inf = Mat::diag(alpha);
    let max_gap = alpha.last().unwrap() - &alpha[0];
    let kmax = crate::rational::floor_i64(&max_gap) as usize;
    let mut ps: Vec<Mat<Q>> = vec![Mat::identity(mu)];
    for k in 1..=kmax {
        let prev = &ps[k - 1];
        let mut rhs = prev.times(&a_inf).minus(&prev.scale(&q(k as i64 - 1)));
        for a in 1..=k {
            if a < om.len() {
                rhs = rhs.minus(&om[a].times(&ps[k - a]));
            }
        }
        let slots: Vec<(usize, usize)> = (0..mu)
            .flat_map(|i| (0..mu).map(move |j| (i, j)))
            .filter(|&(i, j)| &alpha[i] + q(k as i64) <= alpha[j])
            .collect();
        let mut sys = Mat::zeros(mu * mu, slots.len());
        for (col, &(i, j)) in slots.iter().enumerate() {
            // [omega_0, E_ij] = omega_0 E_ij - E_ij omega_0
            for rr in 0..mu {
                let v = sys.get(rr * mu + j, col) + om[0].get(rr, i);
                sys.set(rr * mu + j, col, v);
            }
            for cc in 0..mu {
                let v = sys.get(i * mu + cc, col) - om[0].get(j, cc);
                sys.set(i * mu + cc, col, v);
            }
        }
        let b: Vec<Q> = (0..mu * mu)
            .map(|t| rhs.get(t / mu, t % mu).clone())
            .collect();
        let Some((sol, _nullity)) = sys.solve(&b) else {
            return Err(Error::Verification(format!(
                "no unipotent Birkhoff gauge at theta order {k}"
            )));
        };
        let mut pk = Mat::zeros(mu, mu);
        for (col, &(i, j)) in slots.iter().enumerate() {
            pk.set(i, j, sol[col].clone());
        }
        ps.push(pk);
    }
    let p = Mat::from_fn(mu, mu, |i, j| {
        let mut t = Poly::zero(1);
        for (k, pk) in ps.iter().enumerate() {
            t.add_term(vec![k as i32], pk.get(i, j).clone());
        }
        t
    });
    let resid = birkhoff_residual(omega, &p, &om[0], alpha);
    if !resid.is_zero() {
        let (i, j) = resid.first_difference(&theta_mat_zero(mu)).unwrap();
        return Err(Error::Verification(format!(
            "Birkhoff normal form residual nonzero at entry ({i},{j})"
        )));
    }
    Ok(p)
}

/// `omega P + theta^2 P' - P (a0 + theta diag(alpha))` with one variable theta.
fn birkhoff_residual(omega: &Mat<Poly>, p: &Mat<Poly>, a0: &Mat<Q>, alpha: &[Q]) -> Mat<Poly> {
    let th = Poly::var(1, 0);
    let th2 = th.pow(2);
    let rhs_m = const_poly_mat(a0, 1).plus(&const_poly_mat(&Mat::diag(alpha), 1).scale_by(&th));
    omega
        .times(p)
        .plus(&p.map(|e| &e.derivative(0) * &th2))
        .minus(&p.times(&rhs_m))
}

// ---------------------------------------------------------------------------
// Flat transport in x
// ---------------------------------------------------------------------------

struct Transport {
    p: Mat<Poly>,
    c: Vec<Mat<Poly>>,
}

/// Solves `psi_i P + theta dP/dx_i = P C_i` with `P(0) = p0` and `C_i`
/// independent of theta.
fn transport(psi: &[Mat<Poly>], p0: &Mat<Poly>, r: usize, mu: usize) -> Result<Transport> {
    let psi_layers: Vec<BTreeMap<Exp, Mat<Poly>>> = psi.iter().map(|m| split_x(m, r)).collect();
    let psi_deg = psi.iter().map(|m| x_degree(m, r)).max().unwrap_or(0) as usize;
    let zero_th = theta_mat_zero(mu);
    let head = theta_part(p0, 0);
    let head_inv = head.inverse().ok_or_else(|| {
        Error::Verification("initial gauge is not invertible at theta = 0".into())
    })?;
    let mut p_layers: BTreeMap<Exp, Mat<Poly>> = BTreeMap::new();
    p_layers.insert(vec![0; r], p0.clone());
    let mut c_layers: Vec<BTreeMap<Exp, Mat<Q>>> = vec![BTreeMap::new(); r];
    let mut zero_run = 0usize;
    let mut d = 0usize;
    loop {
        if d > TRANSPORT_DEGREE_LIMIT {
            return Err(Error::Budget(format!(
                "flat transport did not terminate below x-degree {TRANSPORT_DEGREE_LIMIT}"
            )));
        }
        let mut layer_zero = true;
        for m in multi_indices(r, d) {
            if let Some(pm) = p_layers.get(&m) {
                if !pm.is_zero() {
                    layer_zero = false;
                }
            }
            for i in 0..r {
                // X = [psi_i P]^(m)
                let mut x = zero_th.clone();
                for (mp, pm) in &p_layers {
                    if !le(mp, &m) {
                        continue;
                    }
                    let diff = sub(&m, mp);
                    if let Some(ps) = psi_layers[i].get(&diff) {
                        x = x.plus(&ps.times(pm));
                    }
                }
                // P0^(0) C^(m) = X_0 - sum_{m' != 0} P0^(m') C^(m - m')
                let mut cm = theta_part(&x, 0);
                for (mp, pm) in &p_layers {
                    if mp.iter().all(|&v| v == 0) || !le(mp, &m) {
                        continue;
                    }
                    if let Some(cc) = c_layers[i].get(&sub(&m, mp)) {
                        cm = cm.minus(&theta_part(pm, 0).times(cc));
                    }
                }
                let cm = head_inv.times(&cm);
                if !cm.is_zero() {
                    layer_zero = false;
                }
                c_layers[i].insert(m.clone(), cm);
                // Y = [P C]^(m) - X ; then P^(m + e_i) = Y / (theta (m_i + 1))
                let mut y = x.negate();
                for (mp, pm) in &p_layers {
                    if !le(mp, &m) {
                        continue;
                    }
                    if let Some(cc) = c_layers[i].get(&sub(&m, mp)) {
                        y = y.plus(&pm.times(&const_poly_mat(cc, 1)));
                    }
                }
                if !theta_part(&y, 0).is_zero() {
                    return Err(Error::Verification(
                        "transport: theta-free part does not vanish".into(),
                    ));
                }
                let denom = q(m[i] as i64 + 1).recip();
                let next = y.map(|e| e.mul_var_pow(0, -1).scale(&denom));
                let mut mi = m.clone();
                mi[i] += 1;
                match p_layers.get(&mi) {
                    Some(prev) if *prev != next => {
                        return Err(Error::Verification(format!(
                            "transport: gauge layer {mi:?} inconsistent between directions"
                        )));
                    }
                    Some(_) => {}
                    None => {
                        p_layers.insert(mi, next);
                    }
                }
            }
        }
        if layer_zero && d > 0 {
            zero_run += 1;
        } else {
            zero_run = 0;
        }
        // Once psi_deg + 1 consecutive layers vanish nothing new can appear.
        let next_nonzero = multi_indices(r, d + 1)
            .iter()
            .any(|m| p_layers.get(m).is_some_and(|p| !p.is_zero()));
        if zero_run > psi_deg && !next_nonzero {
            break;
        }
        d += 1;
    }
    let nv = r + 1;
    let assemble_p = Mat::from_fn(mu, mu, |i, j| {
        let mut t = Poly::zero(nv);
        for (m, pm) in &p_layers {
            for (e, c) in pm.get(i, j).terms() {
                let mut full = m.clone();
                full.push(e[0]);
                t.add_term(full, c.clone());
            }
        }
        t
    });
    let cs = c_layers
        .iter()
        .map(|layers| {
            Mat::from_fn(mu, mu, |i, j| {
                let mut t = Poly::zero(r);
                for (m, cm) in layers {
                    t.add_term(m.clone(), cm.get(i, j).clone());
                }
                t
            })
        })
        .collect();
    Ok(Transport {
        p: assemble_p,
        c: cs,
    })
}

fn le(a: &[i32], b: &[i32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn sub(a: &[i32], b: &[i32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Lifts a matrix over `Q[x]` (r variables) to `Q[x][theta]`.
fn lift_theta(m: &Mat<Poly>, r: usize) -> Mat<Poly> {
    let pos: Vec<usize> = (0..r).collect();
    m.map(|p| p.embed(r + 1, &pos))
}

/// Inverse of a polynomial matrix with constant nonzero determinant.
pub fn poly_mat_inverse(m: &Mat<Poly>) -> Option<Mat<Poly>> {
    m.inverse_with(|c| {
        if c.is_constant() && !c.is_zero() {
            Some(Poly::constant(c.nvars(), c.constant_term().recip()))
        } else {
            None
        }
    })
}

// ---------------------------------------------------------------------------
// Building structures
// ---------------------------------------------------------------------------

/// Builds the structure of `F = f + sum x_i g_i`. When `initial_gauge` is
/// given (a unipotent `theta`-gauge at the origin, one variable) it replaces
/// the point solve, which lets a structure be re-centred at another point.
pub fn build_structure(
    f: &LaurentPoly,
    gs: &[LaurentPoly],
    initial_gauge: Option<&Mat<Poly>>,
) -> Result<FrobTypeStructure> {
    let big_f = deformation_polynomial(f, gs);
    let alg = JacobiAlgebra::parametric(&f.at_origin(), &big_f)?;
    build_from_algebra(&alg, gs, initial_gauge)
}

pub fn build_from_algebra(
    alg: &JacobiAlgebra,
    gs: &[LaurentPoly],
    initial_gauge: Option<&Mat<Poly>>,
) -> Result<FrobTypeStructure> {
    let r = alg.r();
    let mu = alg.mu();
    let n = alg.n();
    let big_f = alg.big_f().clone();
    let omega = alg.brieskorn_matrix(&big_f)?;
    let psi: Vec<Mat<Poly>> = (0..r)
        .map(|i| alg.brieskorn_matrix(&-&big_f.param_derivative(i)))
        .collect::<Result<_>>()?;
    let alpha = alg.alpha().to_vec();

    // omega at x = 0 with theta as the only variable
    let omega0 = omega.map(|p| {
        let mut t = Poly::zero(1);
        for (e, c) in p.terms() {
            if e[..r].iter().all(|&v| v == 0) {
                t.add_term(vec![e[r]], c.clone());
            }
        }
        t
    });
    let p_origin = match initial_gauge {
        Some(p) => p.clone(),
        None => point_gauge(&omega0, &alpha)?,
    };
    let tr = if r == 0 {
        Transport {
            p: p_origin.clone(),
            c: vec![],
        }
    } else {
        transport(&psi, &p_origin, r, mu)?
    };
    let p = tr.p;
    let p0 = theta_coeff(&p, r, 0);
    let p0_inv = poly_mat_inverse(&p0)
        .ok_or_else(|| Error::Verification("gauge is not invertible over Q[x]".into()))?;
    let b0 = p0_inv.times(&theta_coeff(&omega, r, 0)).times(&p0);

    // exact checks of the gauge equations
    let th = Poly::var(r + 1, r);
    let b_inf = Mat::diag(&alpha);
    let normal = lift_theta(&b0, r).plus(&const_poly_mat(&b_inf, r + 1).scale_by(&th));
    let resid = omega
        .times(&p)
        .plus(&p.map(|e| &e.derivative(r) * &th.pow(2)))
        .minus(&p.times(&normal));
    if !resid.is_zero() {
        return Err(Error::Verification(
            "theta-connection is not in normal form in the transported basis".into(),
        ));
    }
    for i in 0..r {
        let resid = psi[i]
            .times(&p)
            .plus(&p.map(|e| &e.derivative(i) * &th))
            .minus(&p.times(&lift_theta(&tr.c[i], r)));
        if !resid.is_zero() {
            return Err(Error::Verification(format!(
                "x{}-connection is not in normal form in the transported basis",
                i + 1
            )));
        }
    }
    let g = alg.residue_pairing()?;
    let s = FrobTypeStructure {
        n,
        r,
        mu,
        f: alg.f().clone(),
        gs: gs.iter().map(|g| g.at_origin()).collect(),
        basis: alg.basis().to_vec(),
        alpha,
        b0,
        c: tr.c,
        b_inf,
        g,
        gauge: Some(p),
    };
    let report = verify_structure_relations(&s);
    if let Some(bad) = report.first_failure() {
        return Err(Error::Verification(format!(
            "relation {} fails: {}",
            bad.name,
            bad.witness.clone().unwrap_or_default()
        )));
    }
    Ok(s)
}

pub fn build_canonical_structure(d: &SubdiagramDeformation) -> Result<FrobTypeStructure> {
    build_canonical_structure_with(d, crate::jacobi::DEFAULT_BUDGET)
}

/// As [`build_canonical_structure`] with an explicit reduction step budget.
pub fn build_canonical_structure_with(
    d: &SubdiagramDeformation,
    budget: usize,
) -> Result<FrobTypeStructure> {
    if !d.injective {
        return Err(Error::Precondition("deformation is not injective".into()));
    }
    let alg = JacobiAlgebra::parametric(&d.f, &d.big_f())?.with_budget(budget);
    build_from_algebra(&alg, &d.gs, None)
}

// ---------------------------------------------------------------------------
// Relations
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationCheck {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationReport {
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&RelationCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&RelationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, witness: Option<String>) {
        self.checks.push(RelationCheck {
            name: name.to_string(),
            passed: witness.is_none(),
            witness,
        });
    }
}

pub const REL_FLAT: &str = "dC = 0";
pub const REL_HIGGS: &str = "[C(i),C(j)] = 0";
pub const REL_R0: &str = "[B0,C(i)] = 0";
pub const REL_POTENTIAL: &str = "C(i) + dB0/dx_i = [Binf,C(i)]";
pub const REL_ADJOINT: &str = "g C(i), g B0 symmetric";
pub const REL_RINF: &str = "Binf + g Binf^T g^-1 = n I";
pub const REL_CONSTANT: &str = "Binf, g constant";

fn witness(m: &Mat<Poly>, what: String, trunc: Option<(&[u32], i64)>) -> Option<String> {
    let m = match trunc {
        Some((w, o)) => m.map(|p| p.truncate(w, o)),
        None => m.clone(),
    };
    if m.is_zero() {
        None
    } else {
        let z = Mat::zeros_like(m.rows(), m.cols(), m.proto());
        let (i, j) = m.first_difference(&z).unwrap();
        Some(format!("{what}: entry ({i},{j}) = {}", m.get(i, j).fmt_x()))
    }
}

/// Checks the structure identities as exact polynomial identities.
pub fn verify_structure_relations(s: &FrobTypeStructure) -> RelationReport {
    relations_of(&s.b0, &s.c, &s.b_inf, &s.g, s.n)
}

/// The same identities for arbitrary matrices over `Q[x]`.
pub fn relations_of(
    b0: &Mat<Poly>,
    c: &[Mat<Poly>],
    b_inf: &Mat<Q>,
    g: &Mat<Q>,
    n: usize,
) -> RelationReport {
    relations_within(b0, c, b_inf, g, n, None)
}

/// Identities checked only on monomials of weighted degree at most
/// `order`, for truncated series data.
pub fn relations_within(
    b0: &Mat<Poly>,
    c: &[Mat<Poly>],
    b_inf: &Mat<Q>,
    g: &Mat<Q>,
    n: usize,
    trunc: Option<(&[u32], i64)>,
) -> RelationReport {
    let r = c.len();
    let nv = b0.proto().nvars();
    let mut rep = RelationReport { checks: vec![] };

    let mut w = None;
    'flat: for i in 0..r {
        for j in i + 1..r {
            let d = c[i]
                .map(|p| p.derivative(j))
                .minus(&c[j].map(|p| p.derivative(i)));
            w = witness(
                &d,
                format!("dC({})/dx{} - dC({})/dx{}", i + 1, j + 1, j + 1, i + 1),
                trunc,
            );
            if w.is_some() {
                break 'flat;
            }
        }
    }
    rep.push(REL_FLAT, w);

    let mut w = None;
    'higgs: for i in 0..r {
        for j in i + 1..r {
            w = witness(
                &c[i].commutator(&c[j]),
                format!("[C({}),C({})]", i + 1, j + 1),
                trunc,
            );
            if w.is_some() {
                break 'higgs;
            }
        }
    }
    rep.push(REL_HIGGS, w);

    let w =
        (0..r).find_map(|i| witness(&b0.commutator(&c[i]), format!("[B0,C({})]", i + 1), trunc));
    rep.push(REL_R0, w);

    let binf = const_poly_mat(b_inf, nv);
    let w = (0..r).find_map(|i| {
        let lhs = c[i].plus(&b0.map(|p| p.derivative(i)));
        let rhs = binf.commutator(&c[i]);
        witness(
            &lhs.minus(&rhs),
            format!("C({0}) + dB0/dx{0} - [Binf,C({0})]", i + 1),
            trunc,
        )
    });
    rep.push(REL_POTENTIAL, w);

    let gp = const_poly_mat(g, nv);
    let mut w = None;
    for (name, m) in std::iter::once(("B0".to_string(), b0)).chain(
        c.iter()
            .enumerate()
            .map(|(i, m)| (format!("C({})", i + 1), m)),
    ) {
        let gm = gp.times(m);
        let d = gm.minus(&gm.transpose());
        w = witness(&d, format!("g {name} - (g {name})^T"), trunc);
        if w.is_some() {
            break;
        }
    }
    rep.push(REL_ADJOINT, w);

    let w = match g.inverse() {
        None => Some("g is degenerate".to_string()),
        Some(gi) => {
            let lhs = b_inf.plus(&g.times(&b_inf.transpose()).times(&gi));
            let target = Mat::identity(b_inf.rows()).scale(&q(n as i64));
            lhs.first_difference(&target).map(|(i, j)| {
                format!(
                    "entry ({i},{j}) = {} (expected {})",
                    fmt_q(lhs.get(i, j)),
                    fmt_q(target.get(i, j))
                )
            })
        }
    };
    rep.push(REL_RINF, w);

    // Binf and g are rational matrices by construction; g must also be symmetric.
    let w = if g.is_symmetric() {
        None
    } else {
        Some("g is not symmetric".into())
    };
    rep.push(REL_CONSTANT, w);
    rep
}

// ---------------------------------------------------------------------------
// Deformations
// ---------------------------------------------------------------------------

/// Coefficient vectors of Laurent polynomials over a common monomial list.
fn coefficient_matrix(gs: &[LaurentPoly]) -> (Vec<Exp>, Mat<Q>) {
    let monos: Vec<Exp> = gs
        .iter()
        .flat_map(|g| g.support().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let m = Mat::from_fn(monos.len(), gs.len(), |i, j| {
        gs[j].coeff(&monos[i]).constant_term()
    });
    (monos, m)
}

pub fn classify_deformation(f: &LaurentPoly, gs: &[LaurentPoly]) -> Result<SubdiagramDeformation> {
    let f = f.at_origin();
    let poly = NewtonPolyhedron::of(&f)?;
    let nd = poly.degree_fn()?;
    for g in gs {
        if g.n() != f.n() {
            return Err(Error::VarMismatch(g.n(), f.n()));
        }
        if !g.is_parameter_free() {
            return Err(Error::Input(
                "deformation directions must be parameter free".into(),
            ));
        }
        for e in g.support() {
            let nu = nd.nu(e);
            if nu >= Q::one() {
                return Err(Error::Precondition(format!(
                    "{g} is not subdiagram: monomial {e:?} has Newton degree {}",
                    fmt_q(&nu)
                )));
            }
        }
    }
    let gs: Vec<LaurentPoly> = gs.iter().map(|g| g.at_origin()).collect();
    let (_, cm) = coefficient_matrix(&gs);
    let injective = gs.is_empty() || cm.rank() == gs.len();
    let nu_count = subdiagram_monomials(&nd).len();
    let maximal = injective && gs.len() == nu_count;
    let surjective = is_lattice(&gs, &f)?;
    let good = injective
        && gs.len() <= poly.milnor_number()? as usize
        && build_structure(&f, &gs, None)
            .map(|s| is_good_structure(&s))
            .unwrap_or(false);
    Ok(SubdiagramDeformation {
        f,
        gs,
        injective,
        maximal,
        surjective,
        good,
    })
}

/// Column condition `-C(i) e_1 = e_i + sum_{j<i} a_j(x) e_j`.
pub fn is_good_structure(s: &FrobTypeStructure) -> bool {
    if s.r > s.mu {
        return false;
    }
    (0..s.r).all(|i| {
        (0..s.mu).all(|j| {
            let v = s.c[i].get(j, 0).negate();
            if j == i {
                v == Poly::one(s.r)
            } else if j > i {
                v.is_zero()
            } else {
                true
            }
        })
    })
}

/// Span closure of `{1, g_i}` under multiplication by the `g_i` in `A_f`.
pub fn is_lattice(gs: &[LaurentPoly], f: &LaurentPoly) -> Result<bool> {
    let alg = JacobiAlgebra::new(&f.at_origin())?;
    let mu = alg.mu();
    let mats: Vec<Mat<Q>> = gs
        .iter()
        .map(|g| {
            alg.multiplication_matrix(&g.at_origin())
                .map(|m| m.map(|p| p.constant_term()))
        })
        .collect::<Result<_>>()?;
    let mut span: Vec<Vec<Q>> = vec![crate::jacobi::unit(mu, 0)];
    for g in gs {
        let v: Vec<Q> = alg
            .coords(&g.at_origin())?
            .iter()
            .map(|p| p.constant_term())
            .collect();
        span.push(v);
    }
    Ok(closure_rank(&mats, span, mu) == mu)
}

fn closure_rank(ops: &[Mat<Q>], start: Vec<Vec<Q>>, mu: usize) -> usize {
    let mut basis: Vec<Vec<Q>> = Vec::new();
    let mut queue = start;
    while let Some(v) = queue.pop() {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if Mat::from_columns(mu, trial).rank() > basis.len() {
            basis.push(v.clone());
            for op in ops {
                queue.push(op.apply(&v));
            }
        }
    }
    basis.len()
}

pub fn build_good_maximal_deformation(f: &LaurentPoly) -> Result<SubdiagramDeformation> {
    let f = f.at_origin();
    let alg = JacobiAlgebra::new(&f)?;
    let nd = alg.newton_degree();
    let sub = subdiagram_monomials(nd);
    let low: Vec<Exp> = alg
        .basis()
        .iter()
        .zip(alg.alpha())
        .filter(|(_, a)| **a < Q::one())
        .map(|(b, _)| b.clone())
        .collect();
    if low.len() != sub.len() {
        return Err(Error::Verification(format!(
            "{} basis elements below degree 1 but {} subdiagram monomials",
            low.len(),
            sub.len()
        )));
    }
    let gs: Vec<LaurentPoly> = low
        .iter()
        .map(|e| LaurentPoly::unit_monomial(e, 0))
        .collect();
    let d = classify_deformation(&f, &gs)?;
    if !d.good {
        return Err(Error::Verification(
            "good-max deformation failed the column test".into(),
        ));
    }
    Ok(d)
}

// ---------------------------------------------------------------------------
// Period map, generation and injectivity
// ---------------------------------------------------------------------------

/// Column `i` is `-C(i)(a) e_1`.
pub fn period_map(s: &FrobTypeStructure, a: &[Q]) -> Mat<Q> {
    let cols: Vec<Vec<Q>> = (0..s.r)
        .map(|i| s.c_at(i, a).column(0).iter().map(|v| -v).collect())
        .collect();
    if cols.is_empty() {
        return Mat::zeros(s.mu, 0);
    }
    Mat::from_columns(s.mu, cols)
}

pub fn check_ic(s: &FrobTypeStructure, a: &[Q]) -> bool {
    s.r == 0 || period_map(s, a).rank() == s.r
}

/// Operators generating the bundle from `e_1`: `B0` first, then the `C(i)`.
pub fn operators(s: &FrobTypeStructure) -> Vec<Mat<Poly>> {
    std::iter::once(s.b0.clone())
        .chain(s.c.iter().cloned())
        .collect()
}

/// Breadth first search for words `W_j` (sequences of operator indices,
/// applied right to left) such that the vectors `W_j e_1` evaluated with
/// `eval` span. Returns the words in discovery order.
pub fn krylov_words(ops: &[Mat<Q>], mu: usize) -> Option<Vec<Vec<usize>>> {
    let mut words: Vec<Vec<usize>> = vec![vec![]];
    let mut vecs: Vec<Vec<Q>> = vec![crate::jacobi::unit(mu, 0)];
    let mut frontier = 0;
    while words.len() < mu && frontier < words.len() {
        let (w, v) = (words[frontier].clone(), vecs[frontier].clone());
        frontier += 1;
        for (k, op) in ops.iter().enumerate() {
            let nv = op.apply(&v);
            let mut trial = vecs.clone();
            trial.push(nv.clone());
            if Mat::from_columns(mu, trial).rank() > vecs.len() {
                let mut nw = w.clone();
                nw.push(k);
                words.push(nw);
                vecs.push(nv);
                if words.len() == mu {
                    break;
                }
            }
        }
    }
    (words.len() == mu).then_some(words)
}

/// Applies a word to `e_1`.
pub fn apply_word<T: Ring>(ops: &[Mat<T>], word: &[usize], e1: Vec<T>) -> Vec<T> {
    let mut v = e1;
    for &k in word {
        v = ops[k].apply(&v);
    }
    v
}

pub fn check_gc(s: &FrobTypeStructure, a: &[Q]) -> bool {
    let ops: Vec<Mat<Q>> = operators(s).iter().map(|m| eval_mat(m, a)).collect();
    krylov_words(&ops, s.mu).is_some()
}

#[derive(Clone, Debug, PartialEq)]
pub enum GcGlobal {
    /// Words whose vectors have constant nonzero determinant over `Q[x]`.
    Holds {
        words: Vec<Vec<usize>>,
    },
    FailsAt(Vec<Q>),
    Undecided,
}

/// Deterministic sample points `(k, k^2, ..., k^r)` for `k = 1..=r+2`, plus the origin.
pub fn sample_points(r: usize) -> Vec<Vec<Q>> {
    let mut pts = vec![vec![Q::zero(); r]];
    for k in 1..=(r as i64 + 2) {
        pts.push((1..=r as u32).map(|e| q(k.pow(e))).collect());
    }
    pts
}

pub fn gc_global(s: &FrobTypeStructure) -> GcGlobal {
    let ops = operators(s);
    for pt in sample_points(s.r) {
        let at: Vec<Mat<Q>> = ops.iter().map(|m| eval_mat(m, &pt)).collect();
        if krylov_words(&at, s.mu).is_none() {
            return GcGlobal::FailsAt(pt);
        }
    }
    let at0: Vec<Mat<Q>> = ops.iter().map(|m| eval_mat(m, &s.origin())).collect();
    let Some(words) = krylov_words(&at0, s.mu) else {
        return GcGlobal::Undecided;
    };
    let e1: Vec<Poly> = (0..s.mu)
        .map(|i| {
            if i == 0 {
                Poly::one(s.r)
            } else {
                Poly::zero(s.r)
            }
        })
        .collect();
    let cols: Vec<Vec<Poly>> = words
        .iter()
        .map(|w| apply_word(&ops, w, e1.clone()))
        .collect();
    let det = Mat::from_columns(s.mu, cols).det();
    if det.is_constant() && !det.is_zero() {
        GcGlobal::Holds { words }
    } else {
        GcGlobal::Undecided
    }
}

pub fn check_gc_global(s: &FrobTypeStructure) -> bool {
    matches!(gc_global(s), GcGlobal::Holds { .. })
}

// ---------------------------------------------------------------------------
// Primitive map
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct PrimitiveMapPoly {
    /// `Gamma_j1`, `j = 1..mu`, with `Gamma(0) = 0`.
    pub gamma: Vec<Poly>,
}

/// Potential of the closed one-form `sum_i w_i dx_i` vanishing at the origin.
pub fn integrate_closed_form(w: &[Poly]) -> Result<Poly> {
    let r = w.len();
    let mut out = Poly::zero(w.first().map(|p| p.nvars()).unwrap_or(r));
    for (i, wi) in w.iter().enumerate() {
        for (e, c) in wi.terms() {
            let deg: i32 = e.iter().sum();
            let mut f = e.clone();
            f[i] += 1;
            out.add_term(f, c / q(deg as i64 + 1));
        }
    }
    for (i, wi) in w.iter().enumerate() {
        if out.derivative(i) != *wi {
            return Err(Error::Verification(format!(
                "one-form is not closed (component {})",
                i + 1
            )));
        }
    }
    Ok(out)
}

pub fn primitive_map(s: &FrobTypeStructure) -> Result<PrimitiveMapPoly> {
    let gamma = (0..s.mu)
        .map(|j| {
            let w: Vec<Poly> = (0..s.r).map(|i| s.c[i].get(j, 0).clone()).collect();
            if w.is_empty() {
                Ok(Poly::zero(0))
            } else {
                integrate_closed_form(&w)
            }
        })
        .collect::<Result<_>>()?;
    Ok(PrimitiveMapPoly { gamma })
}

/// Shape `(-x_1 + G_1(x_2..x_r), ..., -x_r, 0, ..., 0)`.
pub fn has_triangular_shape(pm: &PrimitiveMapPoly, r: usize) -> bool {
    pm.gamma.iter().enumerate().all(|(j, g)| {
        if j >= r {
            return g.is_zero();
        }
        let rest = g + &Poly::var(r, j);
        let ok = rest.terms().all(|(e, _)| e[..=j].iter().all(|&v| v == 0));
        ok
    })
}

// ---------------------------------------------------------------------------
// Translation and change of lattice
// ---------------------------------------------------------------------------

pub fn translate_structure(s: &FrobTypeStructure, a: &[Q]) -> FrobTypeStructure {
    let mut shift_theta = a.to_vec();
    shift_theta.push(Q::zero());
    let f_new = {
        let mut f = s.f.clone();
        for (i, g) in s.gs.iter().enumerate() {
            f = &f + &g.scale(&a[i]);
        }
        f
    };
    FrobTypeStructure {
        n: s.n,
        r: s.r,
        mu: s.mu,
        f: f_new,
        gs: s.gs.clone(),
        basis: s.basis.clone(),
        alpha: s.alpha.clone(),
        b0: s.b0.map(|p| p.shift(a)),
        c: s.c.iter().map(|m| m.map(|p| p.shift(a))).collect(),
        b_inf: s.b_inf.clone(),
        g: s.g.clone(),
        gauge: s.gauge.as_ref().map(|p| p.map(|e| e.shift(&shift_theta))),
    }
}

/// Rebuilds the structure of `F(u, x + a)` around `x = 0`, starting the
/// transport from the gauge of `s` at `a`.
pub fn rebuild_translated(s: &FrobTypeStructure, a: &[Q]) -> Result<FrobTypeStructure> {
    let gauge = s
        .gauge
        .as_ref()
        .ok_or_else(|| Error::Input("structure carries no gauge".into()))?;
    let r = s.r;
    let mut pt = a.to_vec();
    pt.push(Q::zero());
    // P(a, theta) with theta as the only variable
    let pa = gauge.map(|p| {
        let mut t = Poly::zero(1);
        let mut at = p.clone();
        for (i, ai) in a.iter().enumerate() {
            at = at.subs(i, ai);
        }
        for (e, c) in at.terms() {
            t.add_term(vec![e[r]], c.clone());
        }
        t
    });
    let moved = translate_structure(s, a);
    build_structure(&moved.f, &s.gs, Some(&pa))
}

/// `L` with `gs2_k = sum_i L_ik gs1_i`.
pub fn change_of_lattice_iso(
    d1: &SubdiagramDeformation,
    d2: &SubdiagramDeformation,
) -> Result<Mat<Q>> {
    if !d1.maximal || !d2.maximal {
        return Err(Error::Precondition(
            "both deformations must be maximal".into(),
        ));
    }
    let mut all = d1.gs.clone();
    all.extend(d2.gs.iter().cloned());
    let (_, cm) = coefficient_matrix(&all);
    let r = d1.gs.len();
    let a = Mat::from_fn(cm.rows(), r, |i, j| cm.get(i, j).clone());
    let mut cols = Vec::new();
    for k in 0..d2.gs.len() {
        let b = cm.column(r + k);
        let (x, nullity) = a
            .solve(&b)
            .ok_or_else(|| Error::Verification("lattices span different spaces".into()))?;
        debug_assert_eq!(nullity, 0);
        cols.push(x);
    }
    Ok(Mat::from_columns(r, cols))
}

/// Pullback by `x -> L x'`: `B0'(x') = B0(Lx')`, `C'(k) = sum_i L_ik C(i)(Lx')`.
pub fn pullback_linear(s: &FrobTypeStructure, l: &Mat<Q>) -> FrobTypeStructure {
    let r2 = l.cols();
    let images: Vec<Poly> = (0..s.r)
        .map(|i| {
            let mut p = Poly::zero(r2);
            for k in 0..r2 {
                p.add_term(
                    {
                        let mut e = vec![0; r2];
                        e[k] = 1;
                        e
                    },
                    l.get(i, k).clone(),
                );
            }
            p
        })
        .collect();
    let sub = |m: &Mat<Poly>| m.map(|p| p.compose(&images));
    let c1: Vec<Mat<Poly>> = s.c.iter().map(sub).collect();
    let c = (0..r2)
        .map(|k| {
            let mut acc = Mat::zeros_like(s.mu, s.mu, &Poly::zero(r2));
            for (i, ci) in c1.iter().enumerate() {
                acc = acc.plus(&ci.scale(l.get(i, k)));
            }
            acc
        })
        .collect();
    let gs = (0..r2)
        .map(|k| {
            let mut g = LaurentPoly::zero(s.n, 0);
            for i in 0..s.r {
                g = &g + &s.gs[i].scale(l.get(i, k));
            }
            g
        })
        .collect();
    FrobTypeStructure {
        n: s.n,
        r: r2,
        mu: s.mu,
        f: s.f.clone(),
        gs,
        basis: s.basis.clone(),
        alpha: s.alpha.clone(),
        b0: sub(&s.b0),
        c,
        b_inf: s.b_inf.clone(),
        g: s.g.clone(),
        gauge: None,
    }
}

/// Same matrices (ignoring provenance and gauge).
pub fn same_matrices(a: &FrobTypeStructure, b: &FrobTypeStructure) -> bool {
    a.mu == b.mu && a.r == b.r && a.b0 == b.b0 && a.c == b.c && a.b_inf == b.b_inf && a.g == b.g
}

// ---------------------------------------------------------------------------
// Extended connection
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedConnection {
    /// `B0(a)`; the `dtau/tau` part is `-(tau B0(a) + Binf)`.
    pub b0: Mat<Q>,
    pub b_inf: Mat<Q>,
    /// `C(i)(a)`; the `dx_i` part is `tau C(i)(a)`.
    pub c: Vec<Mat<Q>>,
}

pub fn extended_connection(s: &FrobTypeStructure, a: &[Q]) -> ExtendedConnection {
    ExtendedConnection {
        b0: s.b0_at(a),
        b_inf: s.b_inf.clone(),
        c: (0..s.r).map(|i| s.c_at(i, a)).collect(),
    }
}

impl ExtendedConnection {
    /// Residue of the `dtau/tau` coefficient at `tau = 0`.
    pub fn residue_at_zero(&self) -> Mat<Q> {
        self.b_inf.negate()
    }

    pub fn to_text(&self) -> String {
        let fm = |m: &Mat<Q>| {
            let rows: Vec<String> = (0..m.rows())
                .map(|i| {
                    let cells: Vec<String> = (0..m.cols()).map(|j| fmt_q(m.get(i, j))).collect();
                    format!("[{}]", cells.join(","))
                })
                .collect();
            format!("[{}]", rows.join(","))
        };
        let mut s = format!("-(tau*{} + {})*dtau/tau", fm(&self.b0), fm(&self.b_inf));
        for (i, c) in self.c.iter().enumerate() {
            s.push_str(&format!(" + tau*{}*dx{}", fm(c), i + 1));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse_laurent;

    fn lp(s: &str, n: usize) -> LaurentPoly {
        parse_laurent(s, n).unwrap()
    }

    #[test]
    fn circle_worked_example() {
        let f = lp("u1 + u1^-1", 1);
        let d = classify_deformation(&f, &[lp("1", 1)]).unwrap();
        assert!(d.injective && d.maximal && !d.surjective && d.good);
        let s = build_canonical_structure(&d).unwrap();
        assert_eq!(
            s.b0.map(|p| p.fmt_x()),
            Mat::from_fn(2, 2, |i, j| if i == j {
                "x1".to_string()
            } else {
                "2".to_string()
            })
        );
        assert_eq!(s.c[0], Mat::identity_like(2, &Poly::one(1)).negate());
        assert_eq!(s.b_inf, Mat::diag(&[q(0), q(1)]));
        assert!(verify_structure_relations(&s).all_passed());
    }

    #[test]
    fn perturbed_binf_fails() {
        let f = lp("u1 + u1^-1", 1);
        let d = classify_deformation(&f, &[lp("1", 1)]).unwrap();
        let mut s = build_canonical_structure(&d).unwrap();
        let v = s.b_inf.get(0, 0) + q(1);
        s.b_inf.set(0, 0, v);
        let rep = verify_structure_relations(&s);
        assert!(!rep.get(REL_RINF).unwrap().passed);
    }

    #[test]
    fn quartic_needs_transport() {
        let f = lp("u1^2 + u1^-2", 1);
        let d = build_good_maximal_deformation(&f).unwrap();
        assert_eq!(d.gs.len(), 3);
        let s = build_canonical_structure(&d).unwrap();
        assert!(verify_structure_relations(&s).all_passed());
        assert!(is_good_structure(&s));
        let pm = primitive_map(&s).unwrap();
        assert!(has_triangular_shape(&pm, 3));
        assert!(check_gc_global(&s));
    }

    #[test]
    fn plane_mirror() {
        let f = lp("u1 + u2 + u1^-1*u2^-1", 2);
        let d = build_good_maximal_deformation(&f).unwrap();
        let s = build_canonical_structure(&d).unwrap();
        assert!(check_gc(&s, &s.origin()));
        assert!(!d.surjective);
        // the monomial basis needs a theta gauge here
        let p = s.gauge.as_ref().unwrap();
        assert!(!p.is_zero());
    }
}
