//! Regression cases with known answers, runnable by id from the CLI.

use serde::{Deserialize, Serialize};

use crate::band::BlockBandOperator;
use crate::bipoly::{classify_bidisc, classify_gamma, det_pencil, BiPoly, PencilOrientation, Region};
use crate::dilation::{
    appendix_identities, band_annihilation_residual, build_ta_v0, build_tn_vn, build_toeplitz_model,
    gamma_isometry_residuals, norm_certificate, shift_model, verify_compression,
};
use crate::error::{Error, Result};
use crate::gamma_geom::{classify_point, GammaPoint, Region as PointRegion};
use crate::io::{Check, Report};
use crate::numlin::{c, diag, eigenvalues, identity, numerical_radius, operator_norm, rmat, CMat};
use crate::pairs::{classify_pair_default, fundamental_operator, gamma_distinguished_certificate, OperatorPair};
use crate::spectra_sets::{complete_vn_check, vn_check, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegistryConfig {
    pub grid: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for RegistryConfig {
    fn default() -> Self {
        Self { grid: 512, tol: 1e-6, seed: 0 }
    }
}

pub struct ExampleCase {
    pub id: &'static str,
    pub description: &'static str,
    run: fn(&RegistryConfig) -> Result<Report>,
}

pub const CASES: &[ExampleCase] = &[
    ExampleCase {
        id: "ex-3.14",
        description: "pure Γ-isometry T_{A+A*z} with ω(A) = 1 that no Γ-distinguished polynomial annihilates",
        run: ex_3_14,
    },
    ExampleCase {
        id: "ex-3.2-toral",
        description: "toral and inner-toral verdicts for z1 − z2, 1 − z1z2 and (z1 + z2)(z1z2 − 1)",
        run: ex_3_2_toral,
    },
    ExampleCase { id: "ex-7.4", description: "(2rI, r²I) with fundamental operator 2r/(1 + r²)·I at r = 0.5", run: ex_7_4 },
    ExampleCase { id: "ex-delta", description: "square root Δ = T_{E−Ez} of S² − 4P on the band model", run: ex_delta },
    ExampleCase {
        id: "ex-counter-toral",
        description: "3×3 commuting contractions killed by (z1 − z2)³ violating von Neumann on the variety",
        run: ex_counter_toral,
    },
    ExampleCase {
        id: "ex-counter-gamma",
        description: "4×4 Γ-contraction killed by (4z2 − z1²)² violating von Neumann on the variety",
        run: ex_counter_gamma,
    },
    ExampleCase { id: "ex-shift", description: "(2rW, r²W²) on ℓ² with A = 2r/(1 + r²)·W", run: ex_shift },
    ExampleCase { id: "ex-royal", description: "matricial von Neumann on the royal variety for P = S²/4", run: ex_royal },
];

pub fn case_ids() -> Vec<&'static str> {
    CASES.iter().map(|c| c.id).collect()
}

/// Runs one case, or every case for `all`.
pub fn run_example(id: &str, config: &RegistryConfig) -> Result<Report> {
    if id == "all" {
        let mut report = Report::new("paper-examples all");
        report.config("grid", config.grid).config("tol", config.tol).config("seed", config.seed);
        for case in CASES {
            report.absorb(case.id, (case.run)(config)?);
        }
        return Ok(report);
    }
    let case = CASES
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::Usage(format!("unknown example '{id}'; known ids: {}, all", case_ids().join(", "))))?;
    let mut report = (case.run)(config)?;
    report.config("grid", config.grid).config("tol", config.tol).config("seed", config.seed);
    report.result("description", case.description);
    Ok(report)
}

pub fn omega_one_matrix() -> CMat {
    rmat(3, 3, &[0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
}

pub fn royal() -> BiPoly {
    BiPoly::from_real(&[(0, 1, 4.0), (2, 0, -1.0)])
}

/// `(T1, T2)` on `C³` with `(T1 − T2)³ = 0` but `T1 ≠ T2`.
pub fn counter_toral_pair() -> OperatorPair {
    let t1 = rmat(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let t2 = rmat(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
    OperatorPair { s: t1, p: t2 }
}

/// The commuting nilpotents `A1`, `A2` on `C⁴`.
pub fn counter_gamma_factors() -> (CMat, CMat) {
    let a1 = rmat(4, 4, &[0., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0., 1., 0., 1., 0.]);
    let a2 = rmat(4, 4, &[0., 0., 0., 0., 0., 0., 0., 0., -1., 0., 0., 0., 0., -1., 0., 0.]);
    (a1, a2)
}

/// `(rA1 + rA2, r²A1A2)` with `r = 1/max(‖A1‖, ‖A2‖)`, and `r`.
pub fn counter_gamma_pair() -> (OperatorPair, f64) {
    let (a1, a2) = counter_gamma_factors();
    let r = 1.0 / operator_norm(&a1).max(operator_norm(&a2));
    let (t1, t2) = (&a1 * c(r, 0.0), &a2 * c(r, 0.0));
    (OperatorPair { s: &t1 + &t2, p: t1 * t2 }, r)
}

fn ex_3_14(cfg: &RegistryConfig) -> Result<Report> {
    let mut rep = Report::new("paper-examples ex-3.14");
    let a = omega_one_matrix();
    rep.check(Check::close("numerical radius of A", numerical_radius(&a)?, 1.0, 1e-6));

    let eig = eigenvalues(&a)?;
    let dist = |t: f64| eig.iter().map(|z| (z - c(t, 0.0)).norm()).fold(f64::INFINITY, f64::min);
    let stray = eig.iter().map(|z| z.norm().min((z - c(1.0, 0.0)).norm())).fold(0.0, f64::max);
    rep.check(Check::at_most("spectrum is {0, 1}", dist(0.0).max(dist(1.0)).max(stray), 1e-8));

    let verdict = classify_point(GammaPoint::new(c(1.0, 0.0), c(0.0, 0.0)), 1e-9);
    rep.result("point_1_0", &verdict);
    rep.check(Check::is_true("(1,0) is in ∂Γ but not bΓ", verdict.region == PointRegion::BoundaryNotBgamma));

    let pencil = det_pencil(&a, PencilOrientation::MatrixFirst)?;
    let model = build_toeplitz_model(&a.adjoint())?;
    rep.result("pencil", &pencil);
    rep.check(Check::at_most(
        "det(A + A*z2 − z1I) on the band model",
        band_annihilation_residual(&pencil, &model.tphi, &model.tz)?,
        1e-12,
    ));
    let q_a0 = crate::numlin::apply_bipoly(&pencil, &a, &CMat::zeros(3, 3))?;
    rep.check(Check::at_most("pencil(A, 0)", operator_norm(&q_a0), 1e-12));

    let pair = OperatorPair::new(a, CMat::zeros(3, 3))?;
    let cert = gamma_distinguished_certificate(&pair, &[pencil], cfg.grid.min(256), cfg.tol)?;
    rep.result("certificate", &cert);
    rep.check(Check::is_true("(A, 0) is not certified", !cert.certified));
    rep.check(Check::is_true("obstruction (1,0) ∉ bΓ recorded", cert.route.contains("(1,0) ∉ bΓ")));
    Ok(rep)
}

fn ex_3_2_toral(cfg: &RegistryConfig) -> Result<Report> {
    let mut rep = Report::new("paper-examples ex-3.2-toral");
    let diag_line = BiPoly::from_real(&[(1, 0, 1.0), (0, 1, -1.0)]);
    let anti = BiPoly::from_real(&[(0, 0, 1.0), (1, 1, -1.0)]);
    let q0 = &BiPoly::from_real(&[(1, 0, 1.0), (0, 1, 1.0)]) * &BiPoly::from_real(&[(1, 1, 1.0), (0, 0, -1.0)]);
    let v1 = classify_bidisc(&diag_line, cfg.grid, cfg.tol);
    let v2 = classify_bidisc(&anti, cfg.grid, cfg.tol);
    let v3 = classify_bidisc(&q0, cfg.grid, cfg.tol);
    rep.check(Check::is_true("z1 − z2 is toral", v1.flags.toral));
    rep.check(Check::is_true("1 − z1z2 is not toral", !v2.flags.toral));
    rep.check(Check::is_true("(z1 + z2)(z1z2 − 1) is toral", v3.flags.toral));
    rep.check(Check::is_true("(z1 + z2)(z1z2 − 1) is not inner toral", !v3.flags.inner_toral));
    rep.check(Check::at_most("(2, 1/2) lies on (z1 + z2)(z1z2 − 1)", q0.eval(c(2.0, 0.0), c(0.5, 0.0)).norm(), 1e-15));
    rep.result("z1_minus_z2", &v1).result("one_minus_z1z2", &v2).result("q0", &v3);
    Ok(rep)
}

fn ex_7_4(cfg: &RegistryConfig) -> Result<Report> {
    let mut rep = Report::new("paper-examples ex-7.4");
    let r = 0.5;
    let a_expected = 2.0 * r / (1.0 + r * r);
    let pair = OperatorPair::new(identity(2) * c(2.0 * r, 0.0), identity(2) * c(r * r, 0.0))?;
    let f = fundamental_operator(&pair)?;
    rep.check(Check::at_most("fundamental operator − 0.8·I", operator_norm(&(f.a_full() - identity(2) * c(a_expected, 0.0))), 1e-10));
    rep.check(Check::close("defect D_P = sqrt(1 − r⁴)", operator_norm(&f.defect), (1.0 - r.powi(4)).sqrt(), 1e-12));

    let line = BiPoly::from_real(&[(1, 0, 1.0), (0, 1, -a_expected), (0, 0, -a_expected)]);
    let bundle = build_ta_v0(&pair)?;
    // (D, E) is the tail of (T_A, V_0): T_{A + A*z} and the shift
    let (d, e) = (build_toeplitz_model(&bundle.fundamental.adjoint())?.tphi, BlockBandOperator::shift(2));
    rep.check(Check::at_most("z1 − 0.8z2 − 0.8 on (D, E)", band_annihilation_residual(&line, &d, &e)?, 1e-12));
    let gv = classify_gamma(&line, cfg.grid, cfg.tol);
    rep.check(Check::is_true("z1 − 0.8z2 − 0.8 is Γ-distinguished", gv.gamma_distinguished));

    let iso = gamma_isometry_residuals(&bundle.ta, &bundle.v0)?;
    rep.check(Check::at_most("V0*V0 − I", iso.v_isometry, 1e-10));
    rep.check(Check::at_most("T_A*V0 − T_A", iso.t_star_v, 1e-10));
    rep.check(Check::at_most("T_AV0 − V0T_A", iso.commutator, 1e-10));
    rep.check(Check::at_most("compression up to degree 8", verify_compression(&bundle, 8)?, 1e-9));
    let cert = norm_certificate(&bundle.ta, 2.0, 1024, &[2, 4, 8, 16, 32]);
    rep.check(Check::is_true("‖T_A‖ ≤ 2 certified", cert.certified));
    rep.result("norm_certificate", &cert).result("classify_gamma", &gv);
    Ok(rep)
}

fn ex_delta(_cfg: &RegistryConfig) -> Result<Report> {
    let mut rep = Report::new("paper-examples ex-delta");
    let a = omega_one_matrix();
    let e = diag(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let res = appendix_identities(&a, &e)?;
    for (k, v) in &res.prerequisites {
        rep.check(Check::at_most(format!("prerequisite {k}"), *v, 1e-12));
    }
    rep.check(Check::at_most("S² − 4P − Δ²", res.square_identity, 1e-12));
    rep.check(Check::at_most("SΔ − ΔS", res.commutation, 1e-12));
    rep.check(Check::at_most("(S + Δ)*(S + Δ) − 4I", res.plus_isometry, 1e-12));
    rep.check(Check::at_most("(S − Δ)*(S − Δ) − 4I", res.minus_isometry, 1e-12));
    let control = appendix_identities(&CMat::zeros(3, 3), &CMat::zeros(3, 3))?;
    rep.check(Check::close("control A = E = 0", control.square_identity, 4.0, 1e-12));
    for n in 1..=3 {
        let t = build_tn_vn(&OperatorPair::new(identity(2), identity(2) * c(0.25, 0.0))?, n)?;
        rep.check(Check::at_most(format!("Y_{n} supported on block {n}"), t.yn_check, 1e-12));
    }
    rep.result("residuals", &res);
    Ok(rep)
}

fn ex_counter_toral(cfg: &RegistryConfig) -> Result<Report> {
    let mut rep = Report::new("paper-examples ex-counter-toral");
    let pair = counter_toral_pair();
    pair.validate()?;
    let g = BiPoly::from_real(&[(1, 0, 1.0), (0, 1, -1.0)]);
    let p = g.pow(3);
    rep.check(Check::at_most("‖T1‖", operator_norm(&pair.s), 1.0 + 1e-12));
    rep.check(Check::at_most("‖T2‖", operator_norm(&pair.p), 1.0 + 1e-12));
    rep.check(Check::at_most("(T1 − T2)³", operator_norm(&crate::numlin::apply_bipoly(&p, &pair.s, &pair.p)?), 1e-14));
    let toral = classify_bidisc(&p, cfg.grid.min(256), cfg.tol);
    rep.check(Check::is_true("(z1 − z2)³ is toral", toral.flags.toral));
    let vn = vn_check(&pair, &g, &p, Region::Bidisc, cfg.grid)?;
    rep.check(Check::is_true("verdict violated", vn.verdict == Verdict::Violated));
    rep.check(Check::at_least("‖T1 − T2‖", vn.lhs, 0.1));
    rep.check(Check::at_most("sampled sup of z1 − z2", vn.sup_estimate, 1e-10));
    rep.result("vn_check", &vn);
    Ok(rep)
}

fn ex_counter_gamma(cfg: &RegistryConfig) -> Result<Report> {
    let mut rep = Report::new("paper-examples ex-counter-gamma");
    let (pair, r) = counter_gamma_pair();
    pair.validate()?;
    let (a1, a2) = counter_gamma_factors();
    rep.check(Check::at_most("A1A2 − A2A1", operator_norm(&(&a1 * &a2 - &a2 * &a1)), 0.0));
    let class = classify_pair_default(&pair)?;
    rep.check(Check::is_true("(S, P) is a Γ-contraction", class.flags.gamma_contraction));
    let f = royal();
    let p = f.pow(2);
    rep.check(Check::at_most(
        "(4P − S²)²",
        operator_norm(&crate::numlin::apply_bipoly(&p, &pair.s, &pair.p)?),
        1e-14,
    ));
    let vn = vn_check(&pair, &f, &p, Region::Gamma, cfg.grid)?;
    rep.check(Check::is_true("verdict violated", vn.verdict == Verdict::Violated));
    rep.check(Check::at_least("‖4P − S²‖", vn.lhs, 0.1 * r * r));
    rep.check(Check::at_most("sampled sup of 4z2 − z1²", vn.sup_estimate, 1e-10));
    let seeded = vec![vec![vec![f.clone()]]];
    let cvn = complete_vn_check(&pair, &p, Region::Gamma, cfg.grid.min(256), 2, 10, cfg.seed, &seeded)?;
    rep.check(Check::is_true("matricial check finds the seeded witness", cvn.verdict == Verdict::Violated));
    rep.result("r", r).result("vn_check", &vn);
    Ok(rep)
}

fn ex_shift(_cfg: &RegistryConfig) -> Result<Report> {
    let mut rep = Report::new("paper-examples ex-shift");
    let r = 0.5;
    let res = shift_model(r)?;
    rep.check(Check::at_most("4P − S²", res.royal_annihilation, 0.0));
    rep.check(Check::at_most("S − S*P − D_P A D_P", res.fundamental_residual, 1e-12));
    rep.check(Check::at_most("P*P − r⁴I", res.defect_scalar_check, 0.0));
    let s = BlockBandOperator::shift(1).scale(c(2.0 * r, 0.0));
    let cert = norm_certificate(&s, 2.0, 1024, &[4, 8, 16]);
    rep.check(Check::is_true("‖S‖ ≤ 2 certified", cert.certified));
    rep.result("residuals", &res);
    Ok(rep)
}

/// `(2T, T²)` with `‖T‖ = 0.9` drawn from the seed.
pub fn royal_pair(n: usize, seed: u64) -> OperatorPair {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let t = crate::random::random_contraction(n, 0.9, &mut rng);
    OperatorPair { s: &t * c(2.0, 0.0), p: &t * &t }
}

fn ex_royal(cfg: &RegistryConfig) -> Result<Report> {
    let mut rep = Report::new("paper-examples ex-royal");
    let pair = royal_pair(3, cfg.seed);
    rep.check(Check::at_most("‖S‖", operator_norm(&pair.s), 1.8 + 1e-12));
    rep.check(Check::at_most("S² − 4P", operator_norm(&(&pair.s * &pair.s - &pair.p * c(4.0, 0.0))), 1e-12));
    let cvn = complete_vn_check(&pair, &royal(), Region::Gamma, cfg.grid.min(256), 2, 50, cfg.seed, &[])?;
    rep.check(Check::is_true("no violation in 50 matricial trials", cvn.verdict == Verdict::Consistent));
    rep.result("complete_vn_check", &cvn);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_id_is_usage_error() {
        assert!(matches!(run_example("ex-nope", &RegistryConfig::default()), Err(Error::Usage(_))));
    }

    #[test]
    fn counter_gamma_radius() {
        let (_, r) = counter_gamma_pair();
        assert!(r > 0.0 && r < 1.0);
    }
}
