//! Scalar geometry of the bidisc and the symmetrized bidisc
//! `Γ = {(z1 + z2, z1·z2) : |z1|, |z2| ≤ 1}`.
//!
//! Regions are decided from the root pair of `λ² − sλ + p`; the classical
//! inequality tests are reported alongside as margins.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::{c, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPoint {
    pub s: C64,
    pub p: C64,
}

impl GammaPoint {
    pub fn new(s: C64, p: C64) -> Self {
        Self { s, p }
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.p.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Region {
    OpenG2,
    BoundaryNotBgamma,
    Bgamma,
    SymExterior,
    OtherOutside,
}

impl Region {
    /// Inside the closed set `Γ`.
    pub fn in_gamma(self) -> bool {
        matches!(self, Region::OpenG2 | Region::BoundaryNotBgamma | Region::Bgamma)
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::OpenG2 => "OPEN_G2",
            Region::BoundaryNotBgamma => "BOUNDARY_NOT_BGAMMA",
            Region::Bgamma => "BGAMMA",
            Region::SymExterior => "SYM_EXTERIOR",
            Region::OtherOutside => "OTHER_OUTSIDE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub region: Region,
    pub root_pair: (C64, C64),
    /// Signed "left side minus right side" of each membership test; a
    /// negative value means the test passes strictly.
    pub margins: BTreeMap<String, f64>,
}

pub fn symmetrize(z1: C64, z2: C64) -> GammaPoint {
    GammaPoint { s: z1 + z2, p: z1 * z2 }
}

/// Roots of `λ² − sλ + p`, larger modulus first.
pub fn unsymmetrize_point(pt: GammaPoint) -> (C64, C64) {
    let disc = (pt.s * pt.s - pt.p * 4.0).sqrt();
    let plus = (pt.s + disc) * 0.5;
    let minus = (pt.s - disc) * 0.5;
    let r1 = if plus.norm() >= minus.norm() { plus } else { minus };
    if r1.norm() == 0.0 {
        return (c(0.0, 0.0), c(0.0, 0.0));
    }
    let r2 = pt.p / r1;
    if r2.norm() > r1.norm() {
        (r2, r1)
    } else {
        (r1, r2)
    }
}

/// Left sides minus right sides of the classical tests for `(s, p) ∈ Γ`.
pub fn membership_margins(pt: GammaPoint) -> BTreeMap<String, f64> {
    let GammaPoint { s, p } = pt;
    let skew = (s - s.conj() * p).norm();
    let mut m = BTreeMap::new();
    m.insert("b_mod".to_string(), skew + p.norm_sqr() - 1.0);
    m.insert("b_s".to_string(), s.norm() - 2.0);
    m.insert("c".to_string(), 2.0 * skew + (s * s - p * 4.0).norm() + s.norm_sqr() - 4.0);
    m.insert("p".to_string(), p.norm() - 1.0);
    m
}

/// Distinguished boundary test: `s = s̄p`, `|s| ≤ 2`, `|p| = 1`.
pub fn bgamma_test(pt: GammaPoint, tol: f64) -> bool {
    (pt.s - pt.s.conj() * pt.p).norm() <= tol && pt.s.norm() <= 2.0 + tol && (pt.p.norm() - 1.0).abs() <= tol
}

/// How far rounding in `(s, p)` can move the roots: `δ` with
/// `δ(d + δ) = 4ε·(1 + |s| + |p|)`, so `ε/d` for separated roots and `√ε`
/// for a double root.
fn root_slack(pt: GammaPoint, d: f64) -> f64 {
    let k = 4.0 * f64::EPSILON * (1.0 + pt.s.norm() + pt.p.norm());
    2.0 * k / (d + (d * d + 4.0 * k).sqrt())
}

pub fn classify_point(pt: GammaPoint, tol: f64) -> RegionVerdict {
    let (z1, z2) = unsymmetrize_point(pt);
    let (hi, lo) = (z1.norm(), z2.norm());
    let tol = tol + root_slack(pt, (z1 - z2).norm());
    let near = |m: f64| (1.0 - tol..=1.0 + tol).contains(&m);
    let region = if hi < 1.0 - tol {
        Region::OpenG2
    } else if near(hi) && near(lo) {
        Region::Bgamma
    } else if near(hi) && lo < 1.0 - tol {
        Region::BoundaryNotBgamma
    } else if lo > 1.0 + tol {
        Region::SymExterior
    } else {
        Region::OtherOutside
    };
    let mut margins = membership_margins(pt);
    margins.insert("root_max".to_string(), hi - 1.0);
    margins.insert("root_min".to_string(), lo - 1.0);
    RegionVerdict { region, root_pair: (z1, z2), margins }
}

/// `β` with `s = β + β̄p` and `|β| ≤ 1`.
///
/// For `|p| < 1` the solution is unique; on `|p| = 1` the solutions form a
/// segment and the one of least modulus, `s/2`, is returned.
pub fn beta_of(pt: GammaPoint) -> Result<C64> {
    if !pt.is_finite() {
        return Err(Error::Domain("non-finite point".into()));
    }
    let verdict = classify_point(pt, 1e-9);
    if !verdict.region.in_gamma() {
        return Err(Error::Domain(format!("({}, {}) lies outside Γ", pt.s, pt.p)));
    }
    let gap = 1.0 - pt.p.norm_sqr();
    let beta = if gap > 1e-9 {
        (pt.s - pt.s.conj() * pt.p) / gap
    } else {
        pt.s * 0.5
    };
    let residual = (pt.s - beta - beta.conj() * pt.p).norm();
    if residual > 1e-9 || beta.norm() > 1.0 + 1e-9 {
        return Err(Error::Numerical(format!(
            "β representation failed (|β| = {:.3e}, residual {residual:.3e})",
            beta.norm()
        )));
    }
    Ok(beta)
}

/// A function on `Γ` attaining modulus one only at a chosen point of `bΓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GammaPeak {
    /// `½(1 + s/s0)` for a point with equal roots.
    EqualRoots { s0: C64 },
    /// `g∘T_v` with `g(s,p) = ½(1 + (s² − 4p)/4)` and `T_v` the
    /// symmetrization of the Möbius map `z ↦ (az + b)/(cz + d)`.
    Conjugated { a: C64, b: C64, c: C64, d: C64 },
}

impl GammaPeak {
    pub fn evaluate(&self, pt: GammaPoint) -> C64 {
        match *self {
            GammaPeak::EqualRoots { s0 } => (c(1.0, 0.0) + pt.s / s0) * 0.5,
            GammaPeak::Conjugated { a, b, c: g, d } => {
                let GammaPoint { s, p } = pt;
                let den = g * g * p + g * d * s + d * d;
                let sum = (a * g * p * 2.0 + (a * d + b * g) * s + b * d * 2.0) / den;
                let prod = (a * a * p + a * b * s + b * b) / den;
                (c(1.0, 0.0) + (sum * sum - prod * 4.0) / 4.0) * 0.5
            }
        }
    }

    /// The disc automorphism underlying the conjugated case.
    pub fn mobius(&self, z: C64) -> Option<C64> {
        match *self {
            GammaPeak::Conjugated { a, b, c: g, d } => Some((a * z + b) / (g * z + d)),
            GammaPeak::EqualRoots { .. } => None,
        }
    }
}

/// Root separation below which `peak_bgamma` treats the roots as equal.
pub const EQUAL_ROOT_SEPARATION: f64 = 2e-4;

/// Peaking function for a point of `bΓ`.
///
/// For distinct roots `z1 ≠ z2` on the circle the automorphism is
/// `v(z) = −i·m_t(z·e^{−iψ})` with `m_t(w) = (w − t)/(1 − tw)`, where `ψ`
/// rotates the pair symmetric about the real axis and real `t` spreads them
/// to `±i`; then `v(z1) = 1` and `v(z2) = −1`.
pub fn peak_bgamma(pt: GammaPoint) -> Result<GammaPeak> {
    if !bgamma_test(pt, 1e-9) || classify_point(pt, 1e-9).region != Region::Bgamma {
        return Err(Error::Domain(format!("({}, {}) is not in bΓ", pt.s, pt.p)));
    }
    let (z1, z2) = unsymmetrize_point(pt);
    let (z1, z2) = (z1 / z1.norm(), z2 / z2.norm());
    // The conjugated form loses about ε/|z1 − z2|² at the peak, while the
    // equal-roots form is off by |z1 − z2|²/16; switch where they cross.
    if (z1 - z2).norm() < EQUAL_ROOT_SEPARATION {
        return Ok(GammaPeak::EqualRoots { s0: pt.s / pt.s.norm() * 2.0 });
    }
    let d = (z1 / z2).arg().rem_euclid(TAU);
    let delta = d / 2.0;
    let psi = z1.arg() - delta;
    let t = (FRAC_PI_4 - delta / 2.0).tan();
    let rot = C64::from_polar(1.0, -psi);
    Ok(GammaPeak::Conjugated { a: c(0.0, -1.0) * rot, b: c(0.0, t), c: -rot * t, d: c(1.0, 0.0) })
}

/// `(e^{ix}/(2e^{ix} − z1))·(e^{iy}/(2e^{iy} − z2))`, peaking at `(e^{ix}, e^{iy})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPeak {
    pub x: f64,
    pub y: f64,
}

impl TorusPeak {
    pub fn evaluate(&self, z1: C64, z2: C64) -> C64 {
        let a = C64::from_polar(1.0, self.x);
        let b = C64::from_polar(1.0, self.y);
        a / (a * 2.0 - z1) * (b / (b * 2.0 - z2))
    }

    pub fn peak_point(&self) -> (C64, C64) {
        (C64::from_polar(1.0, self.x), C64::from_polar(1.0, self.y))
    }
}

pub fn peak_torus(x: f64, y: f64) -> TorusPeak {
    TorusPeak { x, y }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(s: (f64, f64), p: (f64, f64)) -> GammaPoint {
        GammaPoint::new(c(s.0, s.1), c(p.0, p.1))
    }

    #[test]
    fn symmetrize_examples() {
        assert_eq!(symmetrize(c(1.0, 0.0), c(1.0, 0.0)), gp((2.0, 0.0), (1.0, 0.0)));
        assert_eq!(symmetrize(c(0.0, 1.0), c(0.0, -1.0)), gp((0.0, 0.0), (1.0, 0.0)));
        assert_eq!(symmetrize(c(0.5, 0.0), c(0.5, 0.0)), gp((1.0, 0.0), (0.25, 0.0)));
    }

    #[test]
    fn unsymmetrize_examples() {
        let (a, b) = unsymmetrize_point(gp((2.0, 0.0), (1.0, 0.0)));
        assert!((a - c(1.0, 0.0)).norm() < 1e-12 && (b - c(1.0, 0.0)).norm() < 1e-12);
        let (a, b) = unsymmetrize_point(gp((0.0, 0.0), (-1.0, 0.0)));
        assert!((a - c(1.0, 0.0)).norm() < 1e-12 && (b + c(1.0, 0.0)).norm() < 1e-12);
        let (a, b) = unsymmetrize_point(gp((1.0, 0.0), (0.0, 0.0)));
        assert_eq!((a, b), (c(1.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_point(gp((2.0, 0.0), (1.0, 0.0)), 1e-9).region, Region::Bgamma);
        assert_eq!(classify_point(gp((1.0, 0.0), (0.0, 0.0)), 1e-9).region, Region::BoundaryNotBgamma);
        assert_eq!(classify_point(gp((0.0, 0.0), (0.0, 0.0)), 1e-9).region, Region::OpenG2);
        assert_eq!(classify_point(gp((6.0, 0.0), (9.0, 0.0)), 1e-9).region, Region::SymExterior);
        assert_eq!(classify_point(gp((3.0, 0.0), (2.0, 0.0)), 1e-9).region, Region::OtherOutside);
    }

    #[test]
    fn beta_examples() {
        assert!((beta_of(gp((2.0, 0.0), (1.0, 0.0))).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(beta_of(gp((0.0, 0.0), (0.0, 0.0))).unwrap(), c(0.0, 0.0));
        assert_eq!(beta_of(gp((1.0, 0.0), (0.0, 0.0))).unwrap(), c(1.0, 0.0));
        assert!(matches!(beta_of(gp((3.0, 0.0), (2.0, 0.0))), Err(Error::Domain(_))));
    }

    #[test]
    fn peak_examples() {
        let f = peak_bgamma(gp((0.0, 0.0), (-1.0, 0.0))).unwrap();
        assert!((f.evaluate(gp((0.0, 0.0), (-1.0, 0.0))) - c(1.0, 0.0)).norm() < 1e-12);
        let f = peak_bgamma(gp((2.0, 0.0), (1.0, 0.0))).unwrap();
        assert!((f.evaluate(gp((2.0, 0.0), (1.0, 0.0))) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((f.evaluate(gp((0.0, 0.0), (0.0, 0.0))).norm() - 0.5).abs() < 1e-12);
        assert!(peak_bgamma(gp((1.0, 0.0), (0.0, 0.0))).is_err());
        let g = peak_torus(0.0, 0.0);
        assert!((g.evaluate(c(1.0, 0.0), c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((g.evaluate(c(0.0, 0.0), c(0.0, 0.0)) - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn conjugated_peak_sends_roots_to_plus_minus_one() {
        let (z1, z2) = (C64::from_polar(1.0, 2.3), C64::from_polar(1.0, -0.4));
        let f = peak_bgamma(symmetrize(z1, z2)).unwrap();
        let (a, b) = unsymmetrize_point(symmetrize(z1, z2));
        let images = [f.mobius(a).unwrap(), f.mobius(b).unwrap()];
        assert!(images.iter().any(|w| (w - c(1.0, 0.0)).norm() < 1e-12));
        assert!(images.iter().any(|w| (w + c(1.0, 0.0)).norm() < 1e-12));
    }
}
