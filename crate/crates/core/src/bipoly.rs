//! Bivariate complex polynomials and sampled classification of their zero
//! sets against the bidisc and the symmetrized bidisc.
//!
//! Variety verdicts are numerical certificates: they record the grid and
//! tolerance they were computed with and are not symbolic proofs.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma_geom::{symmetrize, GammaPoint};
use crate::numlin::{c, eigenvalues, ensure_square, identity, CMat, C64};
use crate::par;

const PRUNE_REL: f64 = 1e-14;

/// Sparse polynomial `Σ c_ij z1^i z2^j` in canonical form: terms sorted by
/// `(i, j)`, no coefficient below `1e-14·max|c|`. The empty map is zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawPoly", into = "RawPoly")]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), C64>,
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    i: i64,
    j: i64,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPoly {
    terms: Vec<RawTerm>,
}

impl TryFrom<RawPoly> for BiPoly {
    type Error = String;

    fn try_from(raw: RawPoly) -> std::result::Result<Self, String> {
        let mut terms = Vec::with_capacity(raw.terms.len());
        for (k, t) in raw.terms.into_iter().enumerate() {
            if t.i < 0 || t.j < 0 {
                return Err(format!("term {k}: negative exponent ({}, {})", t.i, t.j));
            }
            if t.i > u32::MAX as i64 || t.j > u32::MAX as i64 {
                return Err(format!("term {k}: exponent too large"));
            }
            if !t.re.is_finite() || !t.im.is_finite() {
                return Err(format!("term {k}: non-finite coefficient"));
            }
            terms.push((t.i as u32, t.j as u32, c(t.re, t.im)));
        }
        Ok(BiPoly::from_terms(terms))
    }
}

impl From<BiPoly> for RawPoly {
    fn from(p: BiPoly) -> Self {
        RawPoly {
            terms: p
                .terms
                .iter()
                .map(|(&(i, j), z)| RawTerm { i: i as i64, j: j as i64, re: z.re, im: z.im })
                .collect(),
        }
    }
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(v: C64) -> Self {
        Self::monomial(0, 0, v)
    }

    pub fn one() -> Self {
        Self::constant(c(1.0, 0.0))
    }

    pub fn z1() -> Self {
        Self::monomial(1, 0, c(1.0, 0.0))
    }

    pub fn z2() -> Self {
        Self::monomial(0, 1, c(1.0, 0.0))
    }

    pub fn monomial(i: u32, j: u32, v: C64) -> Self {
        Self::from_terms([(i, j, v)])
    }

    /// Sums duplicate exponents and prunes negligible coefficients.
    pub fn from_terms<I: IntoIterator<Item = (u32, u32, C64)>>(terms: I) -> Self {
        let mut map: BTreeMap<(u32, u32), C64> = BTreeMap::new();
        for (i, j, v) in terms {
            *map.entry((i, j)).or_insert(c(0.0, 0.0)) += v;
        }
        Self::from_map(map)
    }

    /// Real coefficients, convenient for literals.
    pub fn from_real(terms: &[(u32, u32, f64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(i, j, v)| (i, j, c(v, 0.0))))
    }

    fn from_map(mut map: BTreeMap<(u32, u32), C64>) -> Self {
        let max = map.values().map(|z| z.norm()).fold(0.0, f64::max);
        map.retain(|_, z| z.norm() > PRUNE_REL * max && z.norm() > 0.0);
        Self { terms: map }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, C64)> + '_ {
        self.terms.iter().map(|(&(i, j), &z)| (i, j, z))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, i: u32, j: u32) -> C64 {
        self.terms.get(&(i, j)).copied().unwrap_or(c(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn deg_z1(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn deg_z2(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.0 + k.1).max().unwrap_or(0)
    }

    /// Sum of coefficient moduli.
    pub fn norm1(&self) -> f64 {
        self.terms.values().map(|z| z.norm()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, v: C64) -> Self {
        Self::from_terms(self.terms().map(|(i, j, z)| (i, j, z * v)))
    }

    /// Conjugated coefficients: the zero set is reflected by `(z1,z2) ↦ (z̄1,z̄2)`.
    pub fn conj(&self) -> Self {
        Self::from_terms(self.terms().map(|(i, j, z)| (i, j, z.conj())))
    }

    /// `q(z2, z1)`.
    pub fn swap(&self) -> Self {
        Self::from_terms(self.terms().map(|(i, j, z)| (j, i, z)))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn derivative_z1(&self) -> Self {
        Self::from_terms(self.terms().filter(|t| t.0 > 0).map(|(i, j, z)| (i - 1, j, z * i as f64)))
    }

    pub fn eval(&self, z1: C64, z2: C64) -> C64 {
        let d1 = self.deg_z1() as usize;
        let d2 = self.deg_z2() as usize;
        let mut p1 = vec![c(1.0, 0.0); d1 + 1];
        let mut p2 = vec![c(1.0, 0.0); d2 + 1];
        for k in 1..=d1 {
            p1[k] = p1[k - 1] * z1;
        }
        for k in 1..=d2 {
            p2[k] = p2[k - 1] * z2;
        }
        self.terms().map(|(i, j, z)| z * p1[i as usize] * p2[j as usize]).sum()
    }

    pub fn eval_gamma(&self, pt: GammaPoint) -> C64 {
        self.eval(pt.s, pt.p)
    }

    /// `Σ_ij |c_ij| |z1|^i |z2|^j`, the natural rounding scale of [`eval`](Self::eval).
    pub fn eval_scale(&self, z1: C64, z2: C64) -> f64 {
        let (a, b) = (z1.norm(), z2.norm());
        self.terms().map(|(i, j, z)| z.norm() * a.powi(i as i32) * b.powi(j as i32)).sum()
    }

    /// Largest coefficient difference.
    pub fn max_coeff_diff(&self, other: &BiPoly) -> f64 {
        (self - other).max_abs()
    }

    /// Coefficient difference allowing `other` to be a constant multiple of `self`.
    pub fn projective_distance(&self, other: &BiPoly) -> f64 {
        let (i, j, lead) = match self.terms.iter().next_back() {
            Some((&(i, j), &z)) => (i, j, z),
            None => return other.max_abs(),
        };
        let o = other.coeff(i, j);
        if o.norm() == 0.0 {
            return f64::INFINITY;
        }
        let a = self.scale(c(1.0, 0.0) / lead);
        let b = other.scale(c(1.0, 0.0) / o);
        a.max_coeff_diff(&b)
    }

    /// Coefficient of `z1^k` as a polynomial in `z2` (dense, ascending).
    fn z1_slice_coeffs(&self, value_z1: C64) -> Vec<C64> {
        let mut out = vec![c(0.0, 0.0); self.deg_z2() as usize + 1];
        for (i, j, z) in self.terms() {
            out[j as usize] += z * value_z1.powu(i);
        }
        out
    }

    fn z2_slice_coeffs(&self, value_z2: C64) -> Vec<C64> {
        let mut out = vec![c(0.0, 0.0); self.deg_z1() as usize + 1];
        for (i, j, z) in self.terms() {
            out[i as usize] += z * value_z2.powu(j);
        }
        out
    }

    fn slice_scale(&self, axis: Axis, value: C64) -> f64 {
        let r = value.norm();
        self.terms()
            .map(|(i, j, z)| z.norm() * r.powi(if axis == Axis::Z1 { i } else { j } as i32))
            .fold(0.0, f64::max)
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        BiPoly::from_terms(self.terms().chain(rhs.terms()))
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        BiPoly::from_terms(self.terms().chain(rhs.terms().map(|(i, j, z)| (i, j, -z))))
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        self.scale(c(-1.0, 0.0))
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut map: BTreeMap<(u32, u32), C64> = BTreeMap::new();
        for (i, j, a) in self.terms() {
            for (k, l, b) in rhs.terms() {
                *map.entry((i + k, j + l)).or_insert(c(0.0, 0.0)) += a * b;
            }
        }
        BiPoly::from_map(map)
    }
}

impl Add for BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: BiPoly) -> BiPoly {
        &self + &rhs
    }
}

impl Sub for BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: BiPoly) -> BiPoly {
        &self - &rhs
    }
}

impl Mul for BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: BiPoly) -> BiPoly {
        &self * &rhs
    }
}

impl std::fmt::Display for BiPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, j, z) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if z.im == 0.0 {
                write!(f, "{}", z.re)?;
            } else {
                write!(f, "({}{:+}i)", z.re, z.im)?;
            }
            match i {
                0 => {}
                1 => write!(f, "·z1")?,
                _ => write!(f, "·z1^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "·z2")?,
                _ => write!(f, "·z2^{j}")?,
            }
        }
        Ok(())
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for t in 0..k {
        acc = acc * (n - t) as f64 / (t + 1) as f64;
    }
    acc
}

/// `q(z1, z2) = p(z1 + z2, z1·z2)`.
pub fn compose_pi(p: &BiPoly) -> BiPoly {
    let mut terms = Vec::new();
    for (i, j, z) in p.terms() {
        for k in 0..=i {
            terms.push((k + j, i - k + j, z * binomial(i, k)));
        }
    }
    BiPoly::from_terms(terms)
}

/// Largest `|c_ij − c_ji|`.
pub fn symmetry_defect(q: &BiPoly) -> f64 {
    q.max_coeff_diff(&q.swap())
}

/// Inverse of [`compose_pi`] on symmetric polynomials, by repeatedly removing
/// the lex-leading monomial with a product of elementary symmetric polynomials.
pub fn desymmetrize(q: &BiPoly) -> Result<BiPoly> {
    let scale = q.max_abs().max(1e-300);
    let defect = symmetry_defect(q);
    if defect > 1e-12 * scale.max(1.0) {
        return Err(Error::Symmetry(defect));
    }
    let mut rest: BTreeMap<(u32, u32), C64> =
        (&(q + &q.swap())).scale(c(0.5, 0.0)).terms().map(|(i, j, z)| ((i, j), z)).collect();
    let mut out = Vec::new();
    while let Some((&(a, b), &lead)) = rest.iter().next_back() {
        rest.remove(&(a, b));
        if a < b {
            // only reachable through rounding residue of the symmetric part
            continue;
        }
        out.push((a - b, b, lead));
        for k in 0..(a - b) {
            let key = (k + b, a - b - k + b);
            *rest.entry(key).or_insert(c(0.0, 0.0)) -= lead * binomial(a - b, k);
        }
    }
    let p = BiPoly::from_terms(out);
    let back = compose_pi(&p);
    let err = back.max_coeff_diff(q);
    if err > 1e-10 * scale.max(1.0) {
        return Err(Error::Numerical(format!("desymmetrization round trip error {err:.3e}")));
    }
    Ok(p)
}

/// `q(z1, z2)·q(z2, z1)`.
pub fn swap_symmetrize(q: &BiPoly) -> BiPoly {
    q * &q.swap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// Fix `z1`, solve for `z2`.
    Z1,
    /// Fix `z2`, solve for `z1`.
    Z2,
}

/// Roots of a one-variable slice of a bivariate polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberRoots {
    pub roots: Vec<C64>,
    /// The slice vanishes identically or its degree drops below the generic
    /// fiber degree.
    pub degenerate: bool,
    pub identically_zero: bool,
}

/// Roots of `p(value, ·)` (axis `Z1`) or `p(·, value)` (axis `Z2`) from
/// companion-matrix eigenvalues, with multiple roots merged to cluster means.
pub fn fiber_roots(p: &BiPoly, axis: Axis, value: C64) -> FiberRoots {
    let (coefs, generic) = match axis {
        Axis::Z1 => (p.z1_slice_coeffs(value), p.deg_z2() as usize),
        Axis::Z2 => (p.z2_slice_coeffs(value), p.deg_z1() as usize),
    };
    let scale = p.slice_scale(axis, value);
    let thresh = 1e-12 * scale;
    let mut deg = coefs.len() - 1;
    while deg > 0 && coefs[deg].norm() <= thresh {
        deg -= 1;
    }
    if coefs[deg].norm() <= thresh {
        return FiberRoots { roots: vec![], degenerate: true, identically_zero: true };
    }
    let roots = univariate_roots(&coefs[..=deg]);
    FiberRoots { roots, degenerate: deg < generic, identically_zero: false }
}

fn horner(coefs: &[C64], z: C64) -> C64 {
    coefs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * z + a)
}

fn horner_scale(coefs: &[C64], z: C64) -> f64 {
    let r = z.norm();
    coefs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

/// Roots of `Σ a_k z^k` (ascending coefficients, nonzero leading term),
/// repeated according to multiplicity.
pub fn univariate_roots(coefs: &[C64]) -> Vec<C64> {
    let deg = coefs.len().saturating_sub(1);
    if deg == 0 {
        return vec![];
    }
    let zero_roots = coefs.iter().take_while(|z| z.norm() == 0.0).count();
    let reduced = &coefs[zero_roots..];
    let n = reduced.len() - 1;
    let lead = reduced[n];
    let mut raw: Vec<C64> = match n {
        0 => vec![],
        1 => vec![-reduced[0] / lead],
        2 => {
            let (a, b, cc) = (lead, reduced[1], reduced[0]);
            let disc = (b * b - a * cc * 4.0).sqrt();
            let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) * 0.5 } else { -(b - disc) * 0.5 };
            if q.norm() == 0.0 {
                vec![c(0.0, 0.0), c(0.0, 0.0)]
            } else {
                vec![q / a, cc / q]
            }
        }
        _ => {
            let mut comp = CMat::zeros(n, n);
            for k in 1..n {
                comp[(k, k - 1)] = c(1.0, 0.0);
            }
            for k in 0..n {
                comp[(k, n - 1)] = -reduced[k] / lead;
            }
            eigenvalues(&comp).unwrap_or_default()
        }
    };
    raw = refine_roots(reduced, raw);
    raw.extend(std::iter::repeat(c(0.0, 0.0)).take(zero_roots));
    raw
}

/// Groups nearly coincident roots: a cluster is replaced by its mean when the
/// mean is as good a root as the members (a genuine multiple root), otherwise
/// the members are kept and isolated roots get a Newton correction.
fn refine_roots(coefs: &[C64], roots: Vec<C64>) -> Vec<C64> {
    let n = roots.len();
    if n == 0 {
        return roots;
    }
    let deriv: Vec<C64> = coefs.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while label[r] != r {
            r = label[r];
        }
        label[x] = r;
        r
    }
    for a in 0..n {
        for b in (a + 1)..n {
            let gap = (roots[a] - roots[b]).norm();
            if gap <= 1e-3 * roots[a].norm().max(1.0) {
                let (ra, rb) = (find(&mut label, a), find(&mut label, b));
                label[ra] = rb;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..n {
        let r = find(&mut label, k);
        groups.entry(r).or_default().push(k);
    }
    let mut out = roots.clone();
    for members in groups.values() {
        if members.len() == 1 {
            let k = members[0];
            let mut z = roots[k];
            for _ in 0..3 {
                let f = horner(coefs, z);
                let d = horner(&deriv, z);
                if d.norm() == 0.0 {
                    break;
                }
                let next = z - f / d;
                if horner(coefs, next).norm() < f.norm() {
                    z = next;
                } else {
                    break;
                }
            }
            out[k] = z;
            continue;
        }
        let mean = members.iter().map(|&k| roots[k]).sum::<C64>() / members.len() as f64;
        let worst = members.iter().map(|&k| horner(coefs, roots[k]).norm()).fold(0.0, f64::max);
        let at_mean = horner(coefs, mean).norm();
        if at_mean <= (100.0 * worst).max(1e-13 * horner_scale(coefs, mean)) {
            for &k in members {
                out[k] = mean;
            }
        }
    }
    out
}

/// Distinct roots with multiplicities.
pub fn grouped_roots(coefs: &[C64]) -> Vec<(C64, usize)> {
    let mut out: Vec<(C64, usize)> = Vec::new();
    for z in univariate_roots(coefs) {
        match out.iter_mut().find(|(w, _)| *w == z) {
            Some(entry) => entry.1 += 1,
            None => out.push((z, 1)),
        }
    }
    out
}

/// Sampling parameters recorded in a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub grid: usize,
    pub tol: f64,
    pub interior_radii: usize,
    pub interior_angles: usize,
    pub fibers_checked: usize,
    pub degenerate_fibers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarietyFlags {
    pub nonempty_interior: bool,
    pub boundary_escape_ok: bool,
    pub toral: bool,
    pub inner_toral: bool,
}

/// A bidisc point on the variety, tagged with what it witnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: String,
    pub z1: C64,
    pub z2: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarietyVerdict {
    pub flags: VarietyFlags,
    pub witnesses: Vec<Witness>,
    pub confidence: SamplingConfig,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum FiberKind {
    Interior,
    Torus,
    Exterior,
}

#[derive(Default)]
struct FiberOutcome {
    /// Some root lies in the open bidisc.
    interior_point: Option<(C64, C64)>,
    /// A root on the topological boundary away from the torus.
    boundary_violation: Option<(C64, C64)>,
    /// A root contradicting `Z ⊆ D² ∪ T² ∪ E²`.
    inner_violation: Option<(C64, C64)>,
    degenerate: bool,
    disagreement: bool,
}

fn orient(axis: Axis, fixed: C64, free: C64) -> (C64, C64) {
    match axis {
        Axis::Z1 => (fixed, free),
        Axis::Z2 => (free, fixed),
    }
}

fn judge_fiber(roots: &[C64], axis: Axis, value: C64, kind: FiberKind, tol: f64) -> FiberOutcome {
    let mut out = FiberOutcome::default();
    let fixed_mod = value.norm();
    for &z in roots {
        let m = z.norm();
        let pt = orient(axis, value, z);
        match kind {
            FiberKind::Interior => {
                if fixed_mod < 1.0 - tol && m < 1.0 - tol && out.interior_point.is_none() {
                    out.interior_point = Some(pt);
                }
                if m > 1.0 + tol && out.inner_violation.is_none() {
                    out.inner_violation = Some(pt);
                }
            }
            FiberKind::Torus => {
                if m < 1.0 - tol && out.boundary_violation.is_none() {
                    out.boundary_violation = Some(pt);
                }
                if (m - 1.0).abs() > tol && out.inner_violation.is_none() {
                    out.inner_violation = Some(pt);
                }
            }
            FiberKind::Exterior => {
                if m < 1.0 - tol && out.inner_violation.is_none() {
                    out.inner_violation = Some(pt);
                }
            }
        }
    }
    out
}

fn check_fiber(p: &BiPoly, axis: Axis, value: C64, kind: FiberKind, tol: f64) -> FiberOutcome {
    let fr = fiber_roots(p, axis, value);
    if !fr.degenerate {
        return judge_fiber(&fr.roots, axis, value, kind, tol);
    }
    // Perturb the fiber value in two directions that keep its kind.
    let shifts = if value.norm() > 0.0 {
        [value * C64::from_polar(1.0, 1e-7), value * C64::from_polar(1.0, -1e-7)]
    } else {
        [c(1e-7, 0.0), c(-1e-7, 0.0)]
    };
    let a = judge_fiber(&fiber_roots(p, axis, shifts[0]).roots, axis, shifts[0], kind, tol);
    let b = judge_fiber(&fiber_roots(p, axis, shifts[1]).roots, axis, shifts[1], kind, tol);
    let agree = a.boundary_violation.is_some() == b.boundary_violation.is_some()
        && a.inner_violation.is_some() == b.inner_violation.is_some();
    FiberOutcome {
        interior_point: a.interior_point.or(b.interior_point),
        boundary_violation: a.boundary_violation.or(b.boundary_violation),
        inner_violation: a.inner_violation.or(b.inner_violation),
        degenerate: true,
        disagreement: !agree,
    }
}

/// Sampled test of whether `Z(p) ∩ D²` is a distinguished variety (toral)
/// and whether `Z(p) ⊆ D² ∪ T² ∪ E²` (inner toral).
pub fn classify_bidisc(p: &BiPoly, grid: usize, tol: f64) -> VarietyVerdict {
    let grid = grid.max(64);
    let radii_n = (grid / 32).max(8);
    let angles_n = (grid / 8).max(16);
    let mut fibers: Vec<(Axis, C64, FiberKind)> = Vec::new();
    for axis in [Axis::Z1, Axis::Z2] {
        for k in 0..grid {
            fibers.push((axis, C64::from_polar(1.0, TAU * k as f64 / grid as f64), FiberKind::Torus));
        }
        fibers.push((axis, c(0.0, 0.0), FiberKind::Interior));
        for r in 1..radii_n {
            let rad = r as f64 / radii_n as f64;
            // offset the angles per ring so that rings do not align with axes
            let phase = 0.5 * r as f64 / radii_n as f64;
            for a in 0..angles_n {
                let z = C64::from_polar(rad, TAU * (a as f64 + phase) / angles_n as f64);
                fibers.push((axis, z, FiberKind::Interior));
                fibers.push((axis, c(1.0, 0.0) / z.conj(), FiberKind::Exterior));
            }
        }
    }
    let outcomes = par::map_indexed(fibers.len(), |k| {
        let (axis, v, kind) = fibers[k];
        check_fiber(p, axis, v, kind, tol)
    });

    let mut witnesses = Vec::new();
    let mut notes = Vec::new();
    let mut interior = None;
    let mut boundary_bad = None;
    let mut inner_bad = None;
    let mut degenerate = 0;
    let mut disagreements = 0;
    for o in &outcomes {
        interior = interior.or(o.interior_point);
        boundary_bad = boundary_bad.or(o.boundary_violation);
        inner_bad = inner_bad.or(o.inner_violation);
        degenerate += o.degenerate as usize;
        disagreements += o.disagreement as usize;
    }
    if let Some((z1, z2)) = interior {
        witnesses.push(Witness { kind: "interior".into(), z1, z2 });
    }
    if let Some((z1, z2)) = boundary_bad {
        witnesses.push(Witness { kind: "boundary_off_torus".into(), z1, z2 });
    }
    if let Some((z1, z2)) = inner_bad {
        witnesses.push(Witness { kind: "outside_inner_toral_set".into(), z1, z2 });
    }
    if disagreements > 0 {
        notes.push(format!("{disagreements} degenerate fibers gave disagreeing perturbed verdicts"));
    }
    let nonempty_interior = interior.is_some();
    let boundary_escape_ok = boundary_bad.is_none() && disagreements == 0;
    let toral = nonempty_interior && boundary_escape_ok;
    let inner_toral = toral && inner_bad.is_none();
    VarietyVerdict {
        flags: VarietyFlags { nonempty_interior, boundary_escape_ok, toral, inner_toral },
        witnesses,
        confidence: SamplingConfig {
            grid,
            tol,
            interior_radii: radii_n,
            interior_angles: angles_n,
            fibers_checked: fibers.len(),
            degenerate_fibers: degenerate,
        },
        notes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaVerdict {
    pub gamma_distinguished: bool,
    pub distinguished: bool,
    /// Verdict for the pullback `p∘π` on the bidisc.
    pub verdict: VarietyVerdict,
    /// Witnesses pushed forward to `Γ` coordinates.
    pub gamma_witnesses: Vec<(String, GammaPoint)>,
}

/// Classification in the symmetrized bidisc through the pullback `p∘π`,
/// using `G₂ = π(D²)`, `bΓ = π(T²)` and `∂Γ = π(∂D̄²)`.
pub fn classify_gamma(p: &BiPoly, grid: usize, tol: f64) -> GammaVerdict {
    let verdict = classify_bidisc(&compose_pi(p), grid, tol);
    let gamma_witnesses =
        verdict.witnesses.iter().map(|w| (w.kind.clone(), symmetrize(w.z1, w.z2))).collect();
    GammaVerdict {
        gamma_distinguished: verdict.flags.toral,
        distinguished: verdict.flags.inner_toral,
        verdict,
        gamma_witnesses,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PencilOrientation {
    /// `det(F* + z2·F − z1·I)`
    AdjointFirst,
    /// `det(F + z2·F* − z1·I)`
    MatrixFirst,
}

/// The polynomial `det(F* + z2·F − z1·I)` (or with `F`, `F*` exchanged),
/// recovered exactly from determinants on a grid of roots of unity.
pub fn det_pencil(f: &CMat, orientation: PencilOrientation) -> Result<BiPoly> {
    ensure_square(f, "F")?;
    let n = f.nrows();
    if n == 0 {
        return Ok(BiPoly::one());
    }
    let (g, h) = match orientation {
        PencilOrientation::AdjointFirst => (f.adjoint(), f.clone()),
        PencilOrientation::MatrixFirst => (f.clone(), f.adjoint()),
    };
    let nodes = n + 1;
    let omega: Vec<C64> = (0..nodes).map(|k| C64::from_polar(1.0, TAU * k as f64 / nodes as f64)).collect();
    let id = identity(n);
    let values = DMatrix::from_fn(nodes, nodes, |a, b| {
        let m = &g + &h * omega[b] - &id * omega[a];
        m.lu().determinant()
    });
    let mut terms = Vec::new();
    for i in 0..nodes {
        for j in 0..nodes {
            let mut acc = c(0.0, 0.0);
            for a in 0..nodes {
                for b in 0..nodes {
                    acc += values[(a, b)] * omega[(i * a) % nodes].conj() * omega[(j * b) % nodes].conj();
                }
            }
            terms.push((i as u32, j as u32, acc / (nodes * nodes) as f64));
        }
    }
    let max = terms.iter().map(|t| t.2.norm()).fold(0.0, f64::max);
    Ok(BiPoly::from_terms(terms.into_iter().filter(|t| t.2.norm() >= 1e-10 * max)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Division {
    pub divides: bool,
    pub quotient: Option<BiPoly>,
    pub remainder: BiPoly,
}

/// Leading `z1`-coefficient of `d` when it is a nonzero constant.
fn z1_monic_lead(d: &BiPoly) -> Result<C64> {
    if d.is_zero() {
        return Err(Error::UnsupportedDivisor("zero polynomial".into()));
    }
    let top = d.deg_z1();
    let lead: Vec<_> = d.terms().filter(|t| t.0 == top).collect();
    if lead.len() != 1 || lead[0].1 != 0 {
        return Err(Error::UnsupportedDivisor(format!(
            "leading z1 coefficient of {d} is not a constant"
        )));
    }
    Ok(lead[0].2)
}

/// Division by a divisor monic in `z1` up to a constant, lex order `z1 > z2`.
pub fn divides(d: &BiPoly, p: &BiPoly) -> Result<Division> {
    let lead = z1_monic_lead(d)?;
    let dz = d.deg_z1();
    let mut rest: BTreeMap<(u32, u32), C64> = p.terms().map(|(i, j, z)| ((i, j), z)).collect();
    let mut quotient = Vec::new();
    loop {
        let top = match rest.keys().map(|k| k.0).max() {
            Some(t) if t >= dz => t,
            _ => break,
        };
        let row: Vec<(u32, C64)> =
            rest.iter().filter(|(k, _)| k.0 == top).map(|(k, &z)| (k.1, z)).collect();
        for (j, z) in row {
            let q = z / lead;
            quotient.push((top - dz, j, q));
            for (a, b, dv) in d.terms() {
                *rest.entry((a + top - dz, b + j)).or_insert(c(0.0, 0.0)) -= q * dv;
            }
            rest.remove(&(top, j));
        }
        rest.retain(|k, _| k.0 != top);
    }
    let remainder = BiPoly::from_terms(rest.into_iter().map(|((i, j), z)| (i, j, z)));
    let scale = p.max_abs().max(1.0);
    let ok = remainder.terms().all(|t| t.2.norm() <= 1e-9 * scale);
    let quotient = BiPoly::from_terms(quotient);
    Ok(Division { divides: ok, quotient: ok.then_some(quotient), remainder })
}

/// Square-free part `p / gcd(p, ∂p/∂z1)` for `p` monic in `z1`.
///
/// The gcd is assembled from univariate gcds on slices `z2 = ζ` placed on a
/// rotated circle of roots of unity and interpolated coefficientwise.
pub fn square_free(p: &BiPoly) -> Result<BiPoly> {
    let lead = z1_monic_lead(p)?;
    let n1 = p.deg_z1() as usize;
    if n1 == 0 {
        return Ok(BiPoly::one());
    }
    let m = p.deg_z2() as usize;
    let nodes = m + 1;
    for attempt in 0..4 {
        let offset = 0.3711 + 1.1 * attempt as f64;
        let zeta: Vec<C64> =
            (0..nodes).map(|l| C64::from_polar(1.0, offset + TAU * l as f64 / nodes as f64)).collect();
        let mut slices = Vec::with_capacity(nodes);
        for &z in &zeta {
            let coefs = p.z2_slice_coeffs(z);
            let groups = grouped_roots(&coefs);
            // gcd(u, u') = Π (z − r)^(k−1) as a monic coefficient vector
            let mut g = vec![c(1.0, 0.0)];
            for (r, k) in groups {
                for _ in 1..k {
                    let mut next = vec![c(0.0, 0.0); g.len() + 1];
                    for (t, &a) in g.iter().enumerate() {
                        next[t + 1] += a;
                        next[t] -= a * r;
                    }
                    g = next;
                }
            }
            slices.push(g);
        }
        let gdeg = slices[0].len() - 1;
        if slices.iter().any(|g| g.len() - 1 != gdeg) {
            continue;
        }
        let mut terms = vec![(gdeg as u32, 0, c(1.0, 0.0))];
        for t in 0..gdeg {
            for j in 0..nodes {
                let acc: C64 = (0..nodes).map(|l| slices[l][t] * zeta[l].powu(j as u32).conj()).sum();
                terms.push((t as u32, j as u32, acc / nodes as f64));
            }
        }
        let max = terms.iter().map(|t| t.2.norm()).fold(0.0, f64::max);
        let gcd = BiPoly::from_terms(terms.into_iter().filter(|t| t.2.norm() > 1e-11 * max));
        let div = divides(&gcd, p)?;
        if let Some(q) = div.quotient {
            let ql = z1_monic_lead(&q)?;
            let _ = lead;
            return Ok(q.scale(c(1.0, 0.0) / ql));
        }
    }
    Err(Error::Numerical("slice gcds were inconsistent".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Bidisc,
    Gamma,
}

/// A sampled variety point. For `Gamma` the coordinates are `(s, p)`.
pub type SamplePoint = (C64, C64);

fn disc_grid(grid: usize) -> Vec<C64> {
    let radii = (grid / 32).max(4);
    let mut pts = vec![c(0.0, 0.0)];
    for r in 1..=radii {
        let rad = r as f64 / radii as f64;
        for a in 0..grid {
            pts.push(C64::from_polar(rad, TAU * a as f64 / grid as f64));
        }
    }
    pts
}

fn circle_grid(grid: usize) -> Vec<C64> {
    (0..grid).map(|a| C64::from_polar(1.0, TAU * a as f64 / grid as f64)).collect()
}

fn sample_fibers(q: &BiPoly, values: &[C64], keep: impl Fn(C64) -> bool + Sync, fill: &[C64]) -> Vec<(C64, C64)> {
    let per_fiber = par::map_indexed(values.len() * 2, |k| {
        let axis = if k % 2 == 0 { Axis::Z1 } else { Axis::Z2 };
        let v = values[k / 2];
        let fr = fiber_roots(q, axis, v);
        let mut pts = Vec::new();
        if fr.identically_zero {
            for &w in fill {
                pts.push(orient(axis, v, w));
            }
        } else {
            for z in fr.roots {
                if keep(z) {
                    pts.push(orient(axis, v, z));
                }
            }
        }
        pts
    });
    per_fiber.into_iter().flatten().filter(|&(a, b)| q.eval(a, b).norm() <= 1e-8).collect()
}

/// Points of `Z(p) ∩ D̄²` (or `Z(p) ∩ Γ`) over a radial × angular grid of the
/// closed disc in both coordinate directions. For `Gamma` the pullback
/// `p∘π` is sampled and pushed forward by `π`.
pub fn sample_variety(p: &BiPoly, region: Region, grid: usize) -> Vec<SamplePoint> {
    if p.is_zero() {
        return vec![];
    }
    let q = match region {
        Region::Bidisc => p.clone(),
        Region::Gamma => compose_pi(p),
    };
    let values = disc_grid(grid);
    let pts = sample_fibers(&q, &values, |z| z.norm() <= 1.0 + 1e-9, &values);
    push_forward(pts, region)
}

/// Points of `Z(p) ∩ T²` (or `Z(p) ∩ bΓ`) from fibers over the unit circle.
pub fn sample_distinguished_boundary(p: &BiPoly, region: Region, grid: usize) -> Vec<SamplePoint> {
    if p.is_zero() {
        return vec![];
    }
    let q = match region {
        Region::Bidisc => p.clone(),
        Region::Gamma => compose_pi(p),
    };
    let values = circle_grid(grid);
    let pts = sample_fibers(&q, &values, |z| (z.norm() - 1.0).abs() <= 1e-6, &values);
    push_forward(pts, region)
}

fn push_forward(pts: Vec<(C64, C64)>, region: Region) -> Vec<SamplePoint> {
    match region {
        Region::Bidisc => pts,
        Region::Gamma => pts
            .into_iter()
            .map(|(a, b)| {
                let g = symmetrize(a, b);
                (g.s, g.p)
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(u32, u32, f64)]) -> BiPoly {
        BiPoly::from_real(terms)
    }

    #[test]
    fn eval_examples() {
        let royal = p(&[(0, 1, 4.0), (2, 0, -1.0)]);
        assert!(royal.eval(c(2.0, 0.0), c(1.0, 0.0)).norm() < 1e-15);
        let diag = p(&[(1, 0, 1.0), (0, 1, -1.0)]);
        assert!(diag.eval(c(0.0, 1.0), c(0.0, 1.0)).norm() < 1e-15);
        let anti = p(&[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!((anti.eval(c(0.5, 0.0), c(0.5, 0.0)) - c(0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn compose_and_desymmetrize_royal() {
        let royal = p(&[(0, 1, 4.0), (2, 0, -1.0)]);
        let q = compose_pi(&royal);
        assert_eq!(q, p(&[(2, 0, -1.0), (1, 1, 2.0), (0, 2, -1.0)]));
        assert_eq!(desymmetrize(&q).unwrap(), royal);
        assert_eq!(desymmetrize(&p(&[(1, 0, 1.0), (0, 1, 1.0)])).unwrap(), BiPoly::z1());
        assert_eq!(desymmetrize(&p(&[(1, 1, 1.0)])).unwrap(), BiPoly::z2());
        assert!(matches!(desymmetrize(&BiPoly::z1()), Err(Error::Symmetry(_))));
    }

    #[test]
    fn swap_symmetrize_examples() {
        let diag = p(&[(1, 0, 1.0), (0, 1, -1.0)]);
        assert_eq!(swap_symmetrize(&diag), p(&[(2, 0, -1.0), (1, 1, 2.0), (0, 2, -1.0)]));
        assert_eq!(swap_symmetrize(&BiPoly::z1()), p(&[(1, 1, 1.0)]));
    }

    #[test]
    fn fiber_root_examples() {
        let royal = p(&[(0, 1, 4.0), (2, 0, -1.0)]);
        let fr = fiber_roots(&royal, Axis::Z1, c(1.0, 0.0));
        assert_eq!(fr.roots.len(), 1);
        assert!((fr.roots[0] - c(0.25, 0.0)).norm() < 1e-15);
        let degenerate = fiber_roots(&p(&[(1, 0, 1.0), (0, 0, -1.0)]), Axis::Z1, c(1.0, 0.0));
        assert!(degenerate.degenerate && degenerate.identically_zero);
    }

    #[test]
    fn fourfold_root_is_merged() {
        let q = p(&[(1, 0, 1.0), (0, 1, -1.0)]).pow(4);
        let v = C64::from_polar(0.7, 1.1);
        let fr = fiber_roots(&q, Axis::Z1, v);
        assert_eq!(fr.roots.len(), 4);
        for r in fr.roots {
            assert!((r - v).norm() < 1e-7, "{r}");
        }
    }

    #[test]
    fn det_pencil_scalar() {
        let f = CMat::from_element(1, 1, c(0.8, 0.0));
        let d = det_pencil(&f, PencilOrientation::AdjointFirst).unwrap();
        assert!(d.max_coeff_diff(&p(&[(0, 0, 0.8), (0, 1, 0.8), (1, 0, -1.0)])) < 1e-13);
        let z = det_pencil(&CMat::zeros(1, 1), PencilOrientation::AdjointFirst).unwrap();
        assert_eq!(z, p(&[(1, 0, -1.0)]));
    }

    #[test]
    fn division_examples() {
        let d = p(&[(1, 0, 1.0), (0, 1, -1.0)]);
        let r = divides(&d, &d.pow(3)).unwrap();
        assert!(r.divides);
        assert!(r.quotient.unwrap().max_coeff_diff(&d.pow(2)) < 1e-12);
        assert!(!divides(&d, &p(&[(0, 0, 1.0), (1, 1, -1.0)])).unwrap().divides);
        let royal = p(&[(2, 0, 1.0), (0, 1, -4.0)]);
        assert!(divides(&royal, &royal.pow(2)).unwrap().divides);
        assert!(matches!(divides(&p(&[(1, 1, 1.0)]), &d), Err(Error::UnsupportedDivisor(_))));
    }

    #[test]
    fn square_free_examples() {
        let d = p(&[(1, 0, 1.0), (0, 1, -1.0)]);
        assert!(square_free(&d.pow(3)).unwrap().projective_distance(&d) < 1e-9);
        let royal = p(&[(2, 0, 1.0), (0, 1, -4.0)]);
        assert!(square_free(&royal.pow(2)).unwrap().projective_distance(&royal) < 1e-9);
        let prod = &d * &royal;
        assert!(square_free(&prod).unwrap().projective_distance(&prod) < 1e-9);
    }

    #[test]
    fn sample_variety_examples() {
        let royal = p(&[(2, 0, 1.0), (0, 1, -4.0)]);
        let pts = sample_variety(&royal, Region::Gamma, 64);
        assert!(!pts.is_empty());
        for (s, q) in pts {
            assert!((s * s / 4.0 - q).norm() < 1e-10);
            assert!(s.norm() <= 2.0 + 1e-9);
        }
        let diag = p(&[(1, 0, 1.0), (0, 1, -1.0)]);
        for (a, b) in sample_variety(&diag, Region::Bidisc, 64) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(sample_variety(&BiPoly::one(), Region::Bidisc, 64).is_empty());
    }

    #[test]
    fn negative_exponent_rejected() {
        let bad = r#"{"terms":[{"i":-1,"j":0,"re":1.0,"im":0.0}]}"#;
        assert!(serde_json::from_str::<BiPoly>(bad).is_err());
        let empty: BiPoly = serde_json::from_str(r#"{"terms":[]}"#).unwrap();
        assert!(empty.is_zero());
    }
}
