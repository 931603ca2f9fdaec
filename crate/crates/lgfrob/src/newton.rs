//! Newton polyhedra of Laurent polynomials.
//!
//! The polyhedron is the convex hull of the support together with the
//! origin. Facets are found by brute force over affinely independent point
//! subsets, which is plenty for desk-scale supports in dimension <= 3.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::matrix::Mat;
use crate::poly::Exp;
use crate::rational::{ceil_i64, floor_i64, q, Q};

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    /// Support form, equal to 1 on the facet and < 1 on the rest of the polyhedron.
    pub form: Vec<Q>,
    /// Indices into [`NewtonPolyhedron::points`] lying on the facet.
    pub points: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonPolyhedron {
    pub n: usize,
    /// Support of `f` and the origin, deduplicated and sorted.
    pub points: Vec<Exp>,
    pub vertices: Vec<Exp>,
    pub facets: Vec<Facet>,
    full_dimensional: bool,
    origin_interior: bool,
}

fn dot(a: &[Q], b: &[i32]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, &y)| {
        acc + x * Q::from_integer(y.into())
    })
}

/// Affine dimension of a point set.
pub fn affine_dim(pts: &[&Exp]) -> usize {
    if pts.len() <= 1 {
        return 0;
    }
    let n = pts[0].len();
    let m = Mat::from_fn(pts.len() - 1, n, |i, j| {
        q((pts[i + 1][j] - pts[0][j]) as i64)
    });
    m.rank()
}

/// One vector spanning the kernel of `m` (assumed one dimensional).
fn kernel_vector(m: &Mat<Q>, n: usize) -> Option<Vec<Q>> {
    let mut a = m.clone();
    let piv = if m.rows() == 0 { vec![] } else { a.rref() };
    if piv.len() + 1 != n {
        return None;
    }
    let free = (0..n).find(|c| !piv.contains(c)).unwrap();
    let mut w = vec![Q::zero(); n];
    w[free] = Q::one();
    for (r, &c) in piv.iter().enumerate() {
        w[c] = -a.get(r, free).clone();
    }
    Some(w)
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

impl NewtonPolyhedron {
    pub fn of(f: &LaurentPoly) -> Result<Self> {
        if f.is_zero() {
            return Err(Error::Input(
                "Newton polyhedron of the zero polynomial".into(),
            ));
        }
        Ok(Self::from_support(f.n(), f.support().cloned()))
    }

    pub fn from_support(n: usize, support: impl IntoIterator<Item = Exp>) -> Self {
        let mut set: BTreeSet<Exp> = support.into_iter().collect();
        set.insert(vec![0; n]);
        let points: Vec<Exp> = set.into_iter().collect();
        let refs: Vec<&Exp> = points.iter().collect();
        let full = affine_dim(&refs) == n;
        let mut facets: Vec<Facet> = Vec::new();
        let mut origin_interior = full;
        if full {
            let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
            for combo in combinations(points.len(), n) {
                let p0 = &points[combo[0]];
                let m = Mat::from_fn(n - 1, n, |i, j| q((points[combo[i + 1]][j] - p0[j]) as i64));
                let Some(w) = kernel_vector(&m, n) else {
                    continue;
                };
                let c = dot(&w, p0);
                let vals: Vec<Q> = points.iter().map(|p| dot(&w, p) - &c).collect();
                let (w, c) = if vals.iter().all(|v| !v.is_positive()) {
                    (w, c)
                } else if vals.iter().all(|v| !v.is_negative()) {
                    (w.iter().map(|x| -x).collect::<Vec<_>>(), -c)
                } else {
                    continue;
                };
                let on: Vec<usize> = vals
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.is_zero())
                    .map(|(i, _)| i)
                    .collect();
                if !seen.insert(on.clone()) {
                    continue;
                }
                if c.is_zero() {
                    origin_interior = false;
                    continue;
                }
                let form = w.iter().map(|x| x / &c).collect();
                facets.push(Facet { form, points: on });
            }
        }
        let vertices = if full {
            points
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let forms: Vec<&Vec<Q>> = facets
                        .iter()
                        .filter(|f| f.points.contains(i))
                        .map(|f| &f.form)
                        .collect();
                    !forms.is_empty()
                        && Mat::from_fn(forms.len(), n, |a, b| forms[a][b].clone()).rank() == n
                })
                .map(|(_, p)| p.clone())
                .collect()
        } else {
            Vec::new()
        };
        NewtonPolyhedron {
            n,
            points,
            vertices,
            facets,
            full_dimensional: full,
            origin_interior,
        }
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.full_dimensional
    }

    /// Origin strictly inside a full dimensional polyhedron.
    pub fn is_convenient(&self) -> bool {
        self.full_dimensional && self.origin_interior
    }

    fn require_convenient(&self) -> Result<()> {
        if self.is_convenient() {
            Ok(())
        } else {
            Err(Error::Precondition(
                "Newton polyhedron is not convenient".into(),
            ))
        }
    }

    pub fn degree_fn(&self) -> Result<NewtonDegree> {
        self.require_convenient()?;
        let mut lo = vec![0i64; self.n];
        let mut hi = vec![0i64; self.n];
        for v in &self.vertices {
            for k in 0..self.n {
                lo[k] = lo[k].min(v[k] as i64);
                hi[k] = hi[k].max(v[k] as i64);
            }
        }
        Ok(NewtonDegree {
            forms: self.facets.iter().map(|f| f.form.clone()).collect(),
            lo,
            hi,
        })
    }

    /// `n!` times the volume.
    pub fn milnor_number(&self) -> Result<u64> {
        self.require_convenient()?;
        let mut total = Q::zero();
        for (k, facet) in self.facets.iter().enumerate() {
            let verts: Vec<usize> = facet
                .points
                .iter()
                .copied()
                .filter(|&i| self.vertices.contains(&self.points[i]))
                .collect();
            for simplex in self.triangulate_face(&verts, self.n - 1, k) {
                let m = Mat::from_fn(self.n, self.n, |i, j| q(self.points[simplex[i]][j] as i64));
                total += m.det().abs();
            }
        }
        assert!(total.is_integer());
        Ok(u64::try_from(total.numer()).expect("Milnor number overflow"))
    }

    /// Pulling triangulation of a face given by its vertex indices.
    fn triangulate_face(&self, verts: &[usize], dim: usize, _facet: usize) -> Vec<Vec<usize>> {
        if dim == 0 {
            return vec![vec![verts[0]]];
        }
        let v0 = verts[0];
        let mut subfaces: BTreeSet<Vec<usize>> = BTreeSet::new();
        for f in &self.facets {
            let sub: Vec<usize> = verts
                .iter()
                .copied()
                .filter(|i| f.points.contains(i))
                .collect();
            if sub.contains(&v0) || sub.len() < dim {
                continue;
            }
            let refs: Vec<&Exp> = sub.iter().map(|&i| &self.points[i]).collect();
            if affine_dim(&refs) == dim - 1 {
                subfaces.insert(sub);
            }
        }
        let mut out = Vec::new();
        for sub in subfaces {
            for mut s in self.triangulate_face(&sub, dim - 1, 0) {
                s.insert(0, v0);
                out.push(s);
            }
        }
        out
    }

    /// All boundary faces (as sorted index sets), of every dimension below n.
    pub fn boundary_faces(&self) -> Vec<Vec<usize>> {
        let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
        let m = self.facets.len();
        for k in 1..=m.min(self.n) {
            for combo in combinations(m, k) {
                let mut inter: Vec<usize> = self.facets[combo[0]].points.clone();
                for &c in &combo[1..] {
                    inter.retain(|i| self.facets[c].points.contains(i));
                }
                if !inter.is_empty() {
                    faces.insert(inter);
                }
            }
        }
        faces.into_iter().collect()
    }
}

/// Piecewise linear Newton degree `nu`.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonDegree {
    forms: Vec<Vec<Q>>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl NewtonDegree {
    pub fn nu(&self, a: &[i32]) -> Q {
        self.forms
            .iter()
            .map(|f| dot(f, a))
            .max()
            .unwrap_or_else(Q::zero)
    }

    pub fn forms(&self) -> &[Vec<Q>] {
        &self.forms
    }

    pub fn n(&self) -> usize {
        self.lo.len()
    }

    /// Every lattice point with `nu <= alpha`.
    pub fn points_up_to(&self, alpha: &Q) -> Vec<Exp> {
        let n = self.n();
        let lo: Vec<i64> = self
            .lo
            .iter()
            .map(|&l| floor_i64(&(alpha * q(l))))
            .collect();
        let hi: Vec<i64> = self.hi.iter().map(|&h| ceil_i64(&(alpha * q(h)))).collect();
        let mut out = Vec::new();
        let mut cur: Vec<i64> = lo.clone();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return out;
        }
        loop {
            let e: Exp = cur.iter().map(|&c| c as i32).collect();
            if self.nu(&e) <= *alpha {
                out.push(e);
            }
            let mut k = 0;
            loop {
                if k == n {
                    return out;
                }
                cur[k] += 1;
                if cur[k] <= hi[k] {
                    break;
                }
                cur[k] = lo[k];
                k += 1;
            }
        }
    }

    /// Lattice points with `nu` exactly `alpha`.
    pub fn level(&self, alpha: &Q) -> Vec<Exp> {
        self.points_up_to(alpha)
            .into_iter()
            .filter(|e| self.nu(e) == *alpha)
            .collect()
    }

    /// Distinct Newton degrees of lattice points up to `bound`, ascending.
    pub fn levels_up_to(&self, bound: &Q) -> Vec<Q> {
        let set: BTreeSet<Q> = self
            .points_up_to(bound)
            .iter()
            .map(|e| self.nu(e))
            .collect();
        set.into_iter().collect()
    }
}

/// Lattice points of Newton degree `< 1`, ordered by degree and then by
/// descending lexicographic order.
pub fn subdiagram_monomials(nd: &NewtonDegree) -> Vec<Exp> {
    let mut pts: Vec<Exp> = nd
        .points_up_to(&Q::one())
        .into_iter()
        .filter(|e| nd.nu(e) < Q::one())
        .collect();
    pts.sort_by(|a, b| nd.nu(a).cmp(&nd.nu(b)).then_with(|| b.cmp(a)));
    pts
}

pub fn newton_polyhedron(f: &LaurentPoly) -> Result<NewtonPolyhedron> {
    NewtonPolyhedron::of(f)
}

pub fn is_convenient(f: &LaurentPoly) -> bool {
    !f.is_zero()
        && NewtonPolyhedron::of(f)
            .map(|p| p.is_convenient())
            .unwrap_or(false)
}

pub fn milnor_number(p: &NewtonPolyhedron) -> Result<u64> {
    p.milnor_number()
}

// ---------------------------------------------------------------------------
// Nondegeneracy
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegenerateWitness {
    /// Lattice points of the offending face.
    pub face: Vec<Exp>,
    /// A torus point killing all log-derivatives of the face part, when one
    /// with rational coordinates exists.
    pub point: Option<Vec<String>>,
    /// Univariate polynomial (in `t = u^e` along the edge) whose nonzero
    /// roots give the critical points.
    pub certificate: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum NondegeneracyReport {
    NondegenerateExact,
    NondegenerateProbabilistic { trials: u32, prime: u64 },
    Degenerate(DegenerateWitness),
    Unknown,
}

impl NondegeneracyReport {
    pub fn is_nondegenerate(&self) -> bool {
        matches!(
            self,
            NondegeneracyReport::NondegenerateExact
                | NondegeneracyReport::NondegenerateProbabilistic { .. }
        )
    }
}

/// Options for the randomized test in dimension >= 3.
#[derive(Clone, Copy, Debug)]
pub struct NondegOptions {
    pub trials: u32,
    pub seed: u64,
}

impl Default for NondegOptions {
    fn default() -> Self {
        NondegOptions {
            trials: 32,
            seed: 0,
        }
    }
}

pub fn is_nondegenerate(f: &LaurentPoly) -> Result<NondegeneracyReport> {
    is_nondegenerate_with(f, NondegOptions::default())
}

pub fn is_nondegenerate_with(f: &LaurentPoly, opts: NondegOptions) -> Result<NondegeneracyReport> {
    let p = NewtonPolyhedron::of(f)?;
    p.require_convenient()?;
    // Vertex faces are monomials and never critical on the torus; edges are
    // settled exactly via repeated roots along the edge.
    for face in p.boundary_faces() {
        let pts: Vec<&Exp> = face.iter().map(|&i| &p.points[i]).collect();
        if affine_dim(&pts) != 1 {
            continue;
        }
        let mut fs = LaurentPoly::zero(f.n(), f.r());
        for e in &pts {
            fs.add_term((*e).clone(), f.coeff(e));
        }
        if let Some(w) = face_critical_point(&fs) {
            return Ok(NondegeneracyReport::Degenerate(w));
        }
    }
    if p.n <= 2 {
        return Ok(NondegeneracyReport::NondegenerateExact);
    }
    if opts.trials == 0 {
        return Ok(NondegeneracyReport::Unknown);
    }
    randomized_check(f, &p, opts)
}

/// Critical points on the torus of a face part supported on a lattice
/// segment. Returns `None` when there are none (or when `fs` is not
/// supported on a segment).
pub fn face_critical_point(fs: &LaurentPoly) -> Option<DegenerateWitness> {
    let pts: Vec<Exp> = fs.support().cloned().collect();
    if pts.len() < 2 {
        return None;
    }
    let refs: Vec<&Exp> = pts.iter().collect();
    if affine_dim(&refs) != 1 {
        return None;
    }
    let n = fs.n();
    let base = pts[0].clone();
    let diff: Vec<i64> = (0..n).map(|k| (pts[1][k] - base[k]) as i64).collect();
    let g = diff.iter().fold(0i64, |acc, &d| num_integer::gcd(acc, d));
    let dir: Vec<i64> = diff.iter().map(|d| d / g).collect();
    // position of each support point along the edge
    let step = |e: &Exp| -> i64 {
        let k = dir.iter().position(|&d| d != 0).unwrap();
        (e[k] as i64 - base[k] as i64) / dir[k]
    };
    let kmin = pts.iter().map(step).min().unwrap();
    let kmax = pts.iter().map(step).max().unwrap();
    let mut coeffs = vec![Q::zero(); (kmax - kmin + 1) as usize];
    for e in &pts {
        let c = fs.coeff(e);
        coeffs[(step(e) - kmin) as usize] = c.constant_term();
    }
    let poly = UPoly::new(coeffs);
    let gcd = UPoly::gcd(&poly, &poly.derivative());
    if gcd.degree() < 1 {
        return None;
    }
    let point = gcd
        .rational_roots()
        .into_iter()
        .find(|t| !t.is_zero())
        .map(|t| {
            // pick u with u^dir = t via a Bezout combination of the direction
            let (coef, _) = bezout(&dir);
            coef.iter()
                .map(|&c| crate::rational::fmt_q(&crate::poly::pow_q(&t, c as i32)))
                .collect()
        });
    Some(DegenerateWitness {
        face: pts,
        point,
        certificate: gcd.to_string(),
    })
}

/// Coefficients `c` with `sum c_i d_i = gcd(d)`.
fn bezout(d: &[i64]) -> (Vec<i64>, i64) {
    let mut coef = vec![0i64; d.len()];
    let mut g = 0i64;
    for (i, &di) in d.iter().enumerate() {
        // extended gcd of (g, di)
        let (mut r0, mut r1) = (g, di);
        let (mut s0, mut s1) = (1i64, 0i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let qt = r0.div_euclid(r1);
            (r0, r1) = (r1, r0 - qt * r1);
            (s0, s1) = (s1, s0 - qt * s1);
            (t0, t1) = (t1, t0 - qt * t1);
        }
        if r0 < 0 {
            r0 = -r0;
            s0 = -s0;
            t0 = -t0;
        }
        for c in coef.iter_mut().take(i) {
            *c *= s0;
        }
        coef[i] = t0;
        g = r0;
    }
    (coef, g)
}

/// Dense univariate polynomial over `Q`, low degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct UPoly(Vec<Q>);

impl UPoly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn degree(&self) -> i64 {
        self.0.len() as i64 - 1
    }

    pub fn derivative(&self) -> Self {
        UPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * q(k as i64))
                .collect(),
        )
    }

    fn rem(a: &UPoly, b: &UPoly) -> UPoly {
        let mut r = a.0.clone();
        let db = b.0.len() - 1;
        let lead = b.0[db].clone();
        while r.len() > db && !r.is_empty() {
            let k = r.len() - 1 - db;
            let f = r.last().unwrap() / &lead;
            for (i, bc) in b.0.iter().enumerate() {
                r[k + i] -= &f * bc;
            }
            r.pop();
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        UPoly::new(r)
    }

    pub fn gcd(a: &UPoly, b: &UPoly) -> UPoly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.0.is_empty() {
            let r = UPoly::rem(&x, &y);
            x = y;
            y = r;
        }
        if let Some(l) = x.0.last().cloned() {
            x = UPoly(x.0.iter().map(|c| c / &l).collect());
        }
        x
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * t + c)
    }

    /// Rational roots via the rational root theorem (small coefficients only).
    pub fn rational_roots(&self) -> Vec<Q> {
        if self.0.is_empty() {
            return vec![];
        }
        let lcm = self.0.iter().fold(num_bigint::BigInt::one(), |acc, c| {
            num_integer::lcm(acc, c.denom().clone())
        });
        let ints: Vec<i64> = self
            .0
            .iter()
            .map(|c| i64::try_from((c * Q::from_integer(lcm.clone())).numer()).unwrap_or(i64::MAX))
            .collect();
        let mut roots = Vec::new();
        if ints[0] == 0 {
            roots.push(Q::zero());
        }
        let lo = ints.iter().position(|&c| c != 0).unwrap();
        let a0 = ints[lo].abs();
        let an = ints.last().unwrap().abs();
        if a0 > 1_000_000 || an > 1_000_000 {
            return roots;
        }
        let divs = |m: i64| (1..=m).filter(move |d| m % d == 0);
        for p in divs(a0) {
            for qd in divs(an) {
                for s in [1, -1] {
                    let t = Q::new((s * p).into(), qd.into());
                    if self.eval(&t).is_zero() && !roots.contains(&t) {
                        roots.push(t);
                    }
                }
            }
        }
        roots.sort();
        roots
    }
}

impl std::fmt::Display for UPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms = self
            .0
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let m = match k {
                    0 => String::new(),
                    1 => "t".to_string(),
                    _ => format!("t^{k}"),
                };
                (m, c.clone())
            });
        f.write_str(&crate::poly::fmt_terms(terms))
    }
}

// Randomized test for n >= 3: graded quotient dimensions of the Newton ring
// modulo the principal parts, computed modulo random primes. Matching the
// Kouchnirenko number at some prime certifies the expected Hilbert function
// at that prime; failures at every prime are reported as unknown.
fn randomized_check(
    f: &LaurentPoly,
    p: &NewtonPolyhedron,
    opts: NondegOptions,
) -> Result<NondegeneracyReport> {
    let nd = p.degree_fn()?;
    let mu = p.milnor_number()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let principal: Vec<(Exp, Q)> = f
        .terms()
        .filter(|(e, _)| nd.nu(e) == Q::one())
        .map(|(e, c)| (e.clone(), c.constant_term()))
        .collect();
    let n = f.n();
    let bound = q(n as i64 + 1);
    let levels = nd.levels_up_to(&bound);
    for trial in 1..=opts.trials {
        let prime = random_prime(&mut rng);
        let Some(coeffs) = principal
            .iter()
            .map(|(e, c)| mod_p(c, prime).map(|v| (e.clone(), v)))
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        let mut low = 0u64;
        let mut high = 0u64;
        for alpha in &levels {
            let d = graded_quotient_mod_p(&nd, &coeffs, n, alpha, prime);
            if *alpha <= q(n as i64) {
                low += d;
            } else {
                high += d;
            }
        }
        if low == mu && high == 0 {
            return Ok(NondegeneracyReport::NondegenerateProbabilistic {
                trials: trial,
                prime,
            });
        }
    }
    Ok(NondegeneracyReport::Unknown)
}

fn random_prime(rng: &mut ChaCha8Rng) -> u64 {
    loop {
        let c: u64 = rng.gen_range((1u64 << 30)..(1u64 << 31));
        if is_prime(c) {
            return c;
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_p(c: &Q, p: u64) -> Option<u64> {
    let pm = num_bigint::BigInt::from(p);
    let num = ((c.numer() % &pm) + &pm) % &pm;
    let den = ((c.denom() % &pm) + &pm) % &pm;
    let den = u64::try_from(den).ok()?;
    if den == 0 {
        return None;
    }
    let num = u64::try_from(num).ok()?;
    Some(num * pow_mod(den, p - 2, p) % p)
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn graded_quotient_mod_p(
    nd: &NewtonDegree,
    coeffs: &[(Exp, u64)],
    n: usize,
    alpha: &Q,
    p: u64,
) -> u64 {
    let monos = nd.level(alpha);
    let below = alpha - Q::one();
    let qs = if below.is_negative() {
        vec![]
    } else {
        nd.level(&below)
    };
    let index = |e: &Exp| monos.iter().position(|m| m == e);
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for qv in &qs {
        for k in 0..n {
            let mut row = vec![0u64; monos.len()];
            for (e, c) in coeffs {
                let s: Exp = qv.iter().zip(e).map(|(a, b)| a + b).collect();
                if let Some(i) = index(&s) {
                    let w = ((e[k] as i64).rem_euclid(p as i64)) as u64;
                    row[i] = (row[i] + c * w % p) % p;
                }
            }
            rows.push(row);
        }
    }
    monos.len() as u64 - rank_mod_p(rows, monos.len(), p) as u64
}

fn rank_mod_p(mut rows: Vec<Vec<u64>>, cols: usize, p: u64) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(rank, pr);
        let inv = pow_mod(rows[rank][c], p - 2, p);
        for j in 0..cols {
            rows[rank][j] = rows[rank][j] * inv % p;
        }
        for i in 0..rows.len() {
            if i != rank && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..cols {
                    rows[i][j] = (rows[i][j] + p - f * rows[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}
