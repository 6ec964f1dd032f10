//! Commuting matrix pairs `(S, P)` measured against the Γ hierarchy:
//! Γ-contraction, Γ-isometry, Γ-unitary, purity and strictness.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::bipoly::{classify_gamma, det_pencil, BiPoly, PencilOrientation};
use crate::error::{Error, Result};
use crate::gamma_geom::{classify_point, GammaPoint, Region};
use crate::numlin::{
    apply_bipoly, diag, ensure_commuting, ensure_square, identity, joint_triangularize, lambda_min, matrix_json,
    numerical_radius, operator_norm, psd_sqrt, range_kernel, spectral_radius, CMat, SubspaceBasis, C64,
};

/// Default tolerance for the norm and isometry tests.
pub const PAIR_TOL: f64 = 1e-8;
const JOINT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorPair {
    #[serde(rename = "S", with = "matrix_json")]
    pub s: CMat,
    #[serde(rename = "P", with = "matrix_json")]
    pub p: CMat,
}

impl OperatorPair {
    /// Checks shapes and commutation.
    pub fn new(s: CMat, p: CMat) -> Result<Self> {
        let pair = Self { s, p };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_square(&self.s, "S")?;
        ensure_square(&self.p, "P")?;
        if self.s.nrows() != self.p.nrows() {
            return Err(Error::Dimension(format!("S is {0}x{0} but P is {1}x{1}", self.s.nrows(), self.p.nrows())));
        }
        ensure_commuting(&self.s, &self.p)
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { s: self.s.adjoint(), p: self.p.adjoint() }
    }

    /// `(αS, α²P)`.
    pub fn scaled(&self, alpha: C64) -> Self {
        Self { s: &self.s * alpha, p: &self.p * (alpha * alpha) }
    }
}

/// Solution of `S − S*P = D_P A D_P` on the defect space of `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fundamental {
    /// `A` in the coordinates of `defect_basis`.
    #[serde(with = "matrix_json")]
    pub a: CMat,
    pub defect_basis: SubspaceBasis,
    /// `D_P = (I − P*P)^{1/2}` on the whole space.
    #[serde(with = "matrix_json")]
    pub defect: CMat,
    pub residual: f64,
}

impl Fundamental {
    /// `Q A Q*` on the whole space.
    pub fn a_full(&self) -> CMat {
        let q = &self.defect_basis.columns;
        q * &self.a * q.adjoint()
    }

    /// `Q* D_P`: the defect operator as a map into defect coordinates.
    pub fn defect_coords(&self) -> CMat {
        self.defect_basis.columns.adjoint() * &self.defect
    }
}

/// Tolerance deciding the defect space of `P`. Eigenvalues of `D_P` below
/// it are rounding noise from `I − P*P` on (near) isometric directions.
pub fn defect_rank_tol(n: usize) -> f64 {
    1e-7 * (n as f64).max(1.0)
}

pub fn fundamental_operator(pair: &OperatorPair) -> Result<Fundamental> {
    let n = pair.dim();
    let pn = operator_norm(&pair.p);
    if pn > 1.0 + 1e-9 {
        return Err(Error::Domain(format!("‖P‖ = {pn:.6} exceeds 1")));
    }
    let gram = identity(n) - pair.p.adjoint() * &pair.p;
    let d = psd_sqrt(&gram)?;
    let (range, _) = range_kernel(&d, Some(defect_rank_tol(n)));
    let q = &range.columns;
    let sigma = q.adjoint() * &d * q;
    let sigma_inv = sigma
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("defect operator singular on its range".into()))?;
    let lhs = &pair.s - pair.s.adjoint() * &pair.p;
    let a = &sigma_inv * q.adjoint() * &lhs * q * &sigma_inv;
    let a_full = q * &a * q.adjoint();
    let residual = operator_norm(&(&lhs - &d * a_full * &d));
    Ok(Fundamental { a, defect_basis: range, defect: d, residual })
}

/// `ρ(S,P) = 2(I − P*P) − (S − S*P) − (S* − P*S)`.
pub fn rho(pair: &OperatorPair) -> CMat {
    let n = pair.dim();
    let (s, p) = (&pair.s, &pair.p);
    let sp = s.adjoint() * p;
    (identity(n) - p.adjoint() * p) * C64::from(2.0) - (s - &sp) - (s.adjoint() - sp.adjoint())
}

/// `λ_min ρ(αS, α²P)`.
pub fn rho_min_eig(pair: &OperatorPair, alpha: C64) -> f64 {
    lambda_min(&rho(&pair.scaled(alpha)))
}

/// Sampling grid for `α ∈ D̄` in the ρ test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub radial: usize,
    pub angular: usize,
    pub outer_radius: f64,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        Self { radial: 16, angular: 64, outer_radius: 1.0 - 1e-3 }
    }
}

impl AlphaGrid {
    /// Nodes from the origin out to `outer_radius`.
    pub fn nodes(&self) -> Vec<C64> {
        let mut out = vec![C64::from(0.0)];
        for r in 1..self.radial {
            let rad = self.outer_radius * r as f64 / (self.radial - 1) as f64;
            for a in 0..self.angular {
                out.push(C64::from_polar(rad, TAU * a as f64 / self.angular as f64));
            }
        }
        out
    }

    pub fn unit_circle(&self) -> Vec<C64> {
        (0..self.angular).map(|a| C64::from_polar(1.0, TAU * a as f64 / self.angular as f64)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFlags {
    pub commuting: bool,
    pub gamma_contraction: bool,
    pub pure: bool,
    pub gamma_isometry: bool,
    pub gamma_unitary: bool,
    pub strict: bool,
    /// ρ-grid and joint spectrum route, reported next to the primary verdict.
    pub rho_cross_check: bool,
    pub joint_spectrum_in_gamma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairClass {
    pub flags: PairFlags,
    pub residuals: BTreeMap<String, f64>,
    #[serde(with = "matrix_json::option")]
    pub fundamental: Option<CMat>,
    pub defect_basis: Option<SubspaceBasis>,
    pub joint_spectrum: Vec<GammaPoint>,
    pub warnings: Vec<String>,
}

/// Classification at the default grid and tolerance.
pub fn classify_pair_default(pair: &OperatorPair) -> Result<PairClass> {
    classify_pair(pair, AlphaGrid::default(), PAIR_TOL)
}

pub fn classify_pair(pair: &OperatorPair, grid: AlphaGrid, tol: f64) -> Result<PairClass> {
    pair.validate()?;
    let n = pair.dim();
    let mut residuals = BTreeMap::new();
    let mut warnings = Vec::new();
    let ns = operator_norm(&pair.s);
    let np = operator_norm(&pair.p);
    residuals.insert("norm_s".to_string(), ns);
    residuals.insert("norm_p".to_string(), np);
    residuals.insert("commutator".to_string(), crate::numlin::commutator_norm(&pair.s, &pair.p));

    let scale = ns.max(1.0);
    let mut fundamental = None;
    let mut defect_basis = None;
    let mut primary = ns <= 2.0 + tol && np <= 1.0 + tol;
    if np <= 1.0 + 1e-9 {
        let f = fundamental_operator(pair)?;
        let w = numerical_radius(&f.a)?;
        residuals.insert("fundamental_residual".to_string(), f.residual);
        residuals.insert("fundamental_numerical_radius".to_string(), w);
        primary &= f.residual <= (1e-7 * scale).max(tol) && w <= 1.0 + 1e-6;
        fundamental = Some(f.a);
        defect_basis = Some(f.defect_basis);
    } else {
        primary = false;
    }

    let rho_inner = grid.nodes().into_iter().map(|a| rho_min_eig(pair, a)).fold(f64::INFINITY, f64::min);
    let rho_circle =
        grid.unit_circle().into_iter().map(|a| rho_min_eig(pair, a)).fold(f64::INFINITY, f64::min);
    residuals.insert("rho_min".to_string(), rho_inner);
    residuals.insert("rho_min_closed".to_string(), rho_inner.min(rho_circle));

    let joint = joint_triangularize(&pair.s, &pair.p, JOINT_SEED)?;
    let joint_spectrum: Vec<GammaPoint> = joint.spectrum.iter().map(|&(s, p)| GammaPoint::new(s, p)).collect();
    let in_gamma = joint_spectrum.iter().all(|&pt| classify_point(pt, 1e-6).region.in_gamma());
    let rho_ok = rho_inner >= -1e-8 && in_gamma;
    if rho_ok != primary {
        warnings.push(format!(
            "fundamental-equation route says {primary}, ρ/joint-spectrum route says {rho_ok}"
        ));
    }

    let iso_a = operator_norm(&(pair.s.adjoint() * &pair.p - &pair.s));
    let iso_b = operator_norm(&(pair.p.adjoint() * &pair.p - identity(n)));
    let uni = operator_norm(&(&pair.p * pair.p.adjoint() - identity(n)));
    residuals.insert("isometry_sp".to_string(), iso_a);
    residuals.insert("isometry_pp".to_string(), iso_b);
    residuals.insert("unitary_pp".to_string(), uni);
    let gamma_isometry = iso_a <= tol && iso_b <= tol && ns <= 2.0 + tol;
    let gamma_unitary = gamma_isometry && uni <= tol;
    let r = spectral_radius(&pair.p)?;
    residuals.insert("spectral_radius_p".to_string(), r);

    Ok(PairClass {
        flags: PairFlags {
            commuting: true,
            gamma_contraction: primary || gamma_isometry,
            pure: r < 1.0 - 1e-9,
            gamma_isometry,
            gamma_unitary,
            strict: rho_inner.min(rho_circle) >= 1e-6,
            rho_cross_check: rho_ok,
            joint_spectrum_in_gamma: in_gamma,
        },
        residuals,
        fundamental,
        defect_basis,
        joint_spectrum,
        warnings,
    })
}

/// `‖p(S,P)‖ / (1 + ‖p‖₁·max(1,‖S‖,‖P‖)^deg)`.
pub fn annihilation_residual(pair: &OperatorPair, p: &BiPoly) -> Result<f64> {
    let value = apply_bipoly(p, &pair.s, &pair.p)?;
    let m = operator_norm(&pair.s).max(operator_norm(&pair.p)).max(1.0);
    Ok(operator_norm(&value) / (1.0 + p.norm1() * m.powi(p.total_degree() as i32)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryRoots {
    #[serde(with = "matrix_json")]
    pub u1: CMat,
    #[serde(with = "matrix_json")]
    pub u2: CMat,
}

/// Commuting unitaries with `U1 + U2 = S`, `U1·U2 = P`.
///
/// At each joint eigenvalue the two roots of `λ² − sλ + p` are ordered by
/// argument in `[0, 2π)`, the smaller going to `U1`.
pub fn symmetrization_root(pair: &OperatorPair) -> Result<UnitaryRoots> {
    let class = classify_pair_default(pair)?;
    if !class.flags.gamma_unitary {
        return Err(Error::Domain("pair is not a Γ-unitary".into()));
    }
    let jt = joint_triangularize(&pair.s, &pair.p, JOINT_SEED)?;
    let mut r1 = Vec::with_capacity(pair.dim());
    let mut r2 = Vec::with_capacity(pair.dim());
    for &(s, p) in &jt.spectrum {
        let (a, b) = crate::gamma_geom::unsymmetrize_point(GammaPoint::new(s, p));
        let (a, b) = (a / a.norm(), b / b.norm());
        let key = |z: C64| z.arg().rem_euclid(TAU);
        if key(a) <= key(b) {
            r1.push(a);
            r2.push(b);
        } else {
            r1.push(b);
            r2.push(a);
        }
    }
    let q = &jt.q;
    let u1 = q * diag(&r1) * q.adjoint();
    let u2 = q * diag(&r2) * q.adjoint();
    let err_s = operator_norm(&(&u1 + &u2 - &pair.s));
    let err_p = operator_norm(&(&u1 * &u2 - &pair.p));
    if err_s > 1e-8 || err_p > 1e-8 {
        return Err(Error::Convergence(format!(
            "joint diagonalization not accurate enough (residuals {err_s:.2e}, {err_p:.2e})"
        )));
    }
    Ok(UnitaryRoots { u1, u2 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutingSqrt {
    #[serde(with = "matrix_json")]
    pub delta: CMat,
    #[serde(with = "matrix_json")]
    pub v1: CMat,
    #[serde(with = "matrix_json")]
    pub v2: CMat,
}

/// `Δ` with `Δ² = S² − 4P` and `(S ± Δ)/2` unitary, as `Δ = U1 − U2`.
pub fn commuting_sqrt(pair: &OperatorPair) -> Result<CommutingSqrt> {
    let UnitaryRoots { u1, u2 } = symmetrization_root(pair)?;
    Ok(CommutingSqrt { delta: &u1 - &u2, v1: u1, v2: u2 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCheck {
    pub polynomial: BiPoly,
    pub gamma_distinguished: bool,
    pub annihilation_residual: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinguishedCertificate {
    pub certified: bool,
    pub polynomial: Option<BiPoly>,
    pub route: String,
    pub checks: Vec<CandidateCheck>,
}

fn fmt_c(z: C64) -> String {
    let round = |x: f64| {
        let r = (x * 1e6).round() / 1e6;
        if r == 0.0 {
            0.0
        } else {
            r
        }
    };
    let (re, im) = (round(z.re), round(z.im));
    if im == 0.0 {
        format!("{re}")
    } else {
        format!("{re}{im:+}i")
    }
}

/// Looks for a Γ-distinguished polynomial annihilating the pair.
///
/// Supplied candidates are tried first. For a pure Γ-contraction the
/// polynomial `z1·det(F*^* + z2·F* − z1·I)` is added, `F*` being the
/// fundamental operator of `(S*, P*)`; when `r(F*) = 1` or a joint
/// eigenvalue sits on `∂Γ ∖ bΓ` the obstruction is recorded instead.
pub fn gamma_distinguished_certificate(
    pair: &OperatorPair,
    candidates: &[BiPoly],
    grid: usize,
    tol: f64,
) -> Result<DistinguishedCertificate> {
    pair.validate()?;
    let mut checks = Vec::new();
    let try_candidate = |p: &BiPoly, source: String, checks: &mut Vec<CandidateCheck>| -> Result<bool> {
        let residual = annihilation_residual(pair, p)?;
        // the sampled classifier is the expensive part; skip it for non-annihilators
        let distinguished = residual <= 1e-8 && classify_gamma(p, grid, tol).gamma_distinguished;
        checks.push(CandidateCheck {
            polynomial: p.clone(),
            gamma_distinguished: distinguished,
            annihilation_residual: residual,
            source,
        });
        Ok(distinguished && residual <= 1e-8)
    };
    for (k, p) in candidates.iter().enumerate() {
        if try_candidate(p, format!("candidate {k}"), &mut checks)? {
            return Ok(DistinguishedCertificate {
                certified: true,
                polynomial: Some(p.clone()),
                route: format!("candidate {k} is Γ-distinguished and annihilates the pair"),
                checks,
            });
        }
    }

    let mut obstructions = Vec::new();
    let jt = joint_triangularize(&pair.s, &pair.p, JOINT_SEED)?;
    for &(s, p) in &jt.spectrum {
        let pt = GammaPoint::new(s, p);
        if classify_point(pt, 1e-9).region == Region::BoundaryNotBgamma {
            obstructions.push(format!(
                "joint eigenvalue ({},{}) lies in ∂Γ but ({},{}) ∉ bΓ",
                fmt_c(s),
                fmt_c(p),
                fmt_c(s),
                fmt_c(p)
            ));
            break;
        }
    }

    let class = classify_pair_default(pair)?;
    if class.flags.gamma_contraction && class.flags.pure {
        let f_star = fundamental_operator(&pair.adjoint())?;
        let fs = f_star.a;
        let r = spectral_radius(&fs)?;
        if r >= 1.0 - 1e-9 {
            let lam = crate::numlin::eigenvalues(&fs)?
                .into_iter()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap_or_default();
            obstructions.insert(
                0,
                format!(
                    "r(F*) = {} ≥ 1 for the fundamental operator F* of (S*,P*): {} ∈ σ(F*) ∩ T and ({},0) ∉ bΓ",
                    fmt_c(C64::from(r)),
                    fmt_c(lam),
                    fmt_c(lam)
                ),
            );
        } else if obstructions.is_empty() {
            let pencil = det_pencil(&fs, PencilOrientation::AdjointFirst)?;
            let auto = &BiPoly::z1() * &pencil;
            if try_candidate(&auto, format!("z1·det pencil of F* (r(F*) = {r:.6})"), &mut checks)? {
                return Ok(DistinguishedCertificate {
                    certified: true,
                    polynomial: Some(auto),
                    route: format!("pure Γ-contraction with r(F*) = {r:.6} < 1: z1·det(F*^* + z2F* − z1I)"),
                    checks,
                });
            }
        }
    }
    let route = if obstructions.is_empty() {
        "no candidate certified".to_string()
    } else {
        format!("obstruction: {}", obstructions.join("; "))
    };
    Ok(DistinguishedCertificate { certified: false, polynomial: None, route, checks })
}
