mod common;

use std::collections::BTreeMap;

use common::{line, rng, with_numerical_radius};
use rand::Rng;

use symbidisc::band::BlockBandOperator;
use symbidisc::bipoly::BiPoly;
use symbidisc::dilation::{
    appendix_identities, band_annihilation_residual, build_ta_v0, build_tn_vn, build_toeplitz_model,
    check_gamma_dilation_eqs, check_toral_dilation_eqs, dilation_blocks, gamma_isometry_residuals, norm_certificate,
    shift_model, verify_compression, TailOperator,
};
use symbidisc::numlin::{c, diag, identity, operator_norm, rmat, CMat};
use symbidisc::pairs::OperatorPair;
use symbidisc::random::{ginibre, random_gamma_unitary, random_symmetrized_pair, random_unitary};
use symbidisc::registry::omega_one_matrix;

fn random_band(head: usize, d: usize, r: &mut impl Rng) -> BlockBandOperator {
    let mut diags = BTreeMap::new();
    for k in [-1i64, 0, 1] {
        diags.insert(k, ginibre(d, d, r));
    }
    let size = head + 2 * d;
    BlockBandOperator::new(head, d, 3, ginibre(size, size, r), diags).unwrap()
}

/// `x` extended by zeros to at least `len` rows.
fn padded(x: &CMat, len: usize) -> CMat {
    let mut out = CMat::zeros(x.nrows().max(len), 1);
    out.view_mut((0, 0), (x.nrows(), 1)).copy_from(x);
    out
}

fn pair_of(s: CMat, p: CMat) -> OperatorPair {
    OperatorPair::new(s, p).unwrap()
}

#[test]
fn band_algebra_agrees_with_dense_sections() {
    let mut r = rng(51);
    for _ in 0..50 {
        let (head, d) = (r.random_range(1..3), r.random_range(1..3));
        let (a, b) = (random_band(head, d, &mut r), random_band(head, d, &mut r));
        let n = 8;
        let prod = a.mul(&b).unwrap();
        // bandwidth one on each side: rows of the n-section only see n + 1 blocks
        let dense = a.section(n + 1) * b.section(n + 1);
        let m = a.section_dim(n);
        let want = dense.view((0, 0), (m, m)).into_owned();
        assert!((prod.section(n) - want).norm() <= 1e-11 * (1.0 + prod.max_block_norm()));
        assert!((a.add(&b).unwrap().section(n) - (a.section(n) + b.section(n))).norm() <= 1e-12);
        assert!((a.adjoint().section(n) - a.section(n).adjoint()).norm() == 0.0);
        assert!(a.adjoint().adjoint().approx_eq(&a));
        assert!(a.add(&b).unwrap().sub(&b).unwrap().approx_eq(&a));
        assert!(prod.width() <= a.width() + b.width());
    }
    let e = BlockBandOperator::shift(2);
    assert!(e.adjoint().mul(&e).unwrap().approx_eq(&BlockBandOperator::identity(2, 2)));
    assert!(random_band(1, 2, &mut r).add(&random_band(2, 2, &mut r)).is_err());
}

#[test]
fn dilation_of_scalar_example() {
    let pair = pair_of(identity(2), identity(2) * c(0.25, 0.0));
    let b = build_ta_v0(&pair).unwrap();
    let tail = b.ta.diagonals();
    assert_eq!(tail.len(), 2);
    assert!((&tail[&0] - identity(2) * c(0.8, 0.0)).norm() <= 1e-12);
    assert!((&tail[&-1] - identity(2) * c(0.8, 0.0)).norm() <= 1e-12);

    let t1 = build_tn_vn(&pair, 1).unwrap();
    let y = t1.tn.sub(&t1.tn.adjoint().mul(&t1.vn).unwrap()).unwrap();
    assert!((y.block(1, 1) - identity(2) * c(0.8, 0.0)).norm() <= 1e-12);
    assert!(t1.yn_check <= 1e-12 && t1.fund_eq_residual <= 1e-12);
    assert!(build_tn_vn(&pair, 0).is_err());
}

#[test]
fn unitary_input_has_trivial_dilation() {
    let (s, p, _, _) = random_gamma_unitary(3, &mut rng(52));
    let b = build_ta_v0(&pair_of(s.clone(), p.clone())).unwrap();
    assert_eq!(b.fundamental.nrows(), 0);
    assert!((b.ta.head_block() - &s).norm() <= 1e-12 && (b.v0.head_block() - &p).norm() <= 1e-12);
    assert_eq!(verify_compression(&b, 4).unwrap(), 0.0);
}

#[test]
fn dilation_identities_on_random_pairs() {
    let mut r = rng(53);
    for k in 0..40 {
        let n = 1 + k % 3;
        let (s, p) = random_symmetrized_pair(n, &mut r);
        let b = build_ta_v0(&pair_of(s.clone(), p)).unwrap();
        let iso = gamma_isometry_residuals(&b.ta, &b.v0).unwrap();
        assert!(iso.v_isometry <= 1e-12, "instance {k}: {iso:?}");
        assert!(iso.t_star_v <= 1e-10 && iso.commutator <= 1e-10, "instance {k}: {iso:?}");
        assert!((b.ta.head_block() - &s).norm() == 0.0);
        assert!(verify_compression(&b, 1).unwrap() == 0.0);
        assert!(verify_compression(&b, 6).unwrap() <= 1e-9);
        let cert = norm_certificate(&b.ta, 2.0, 1024, &[1, 2, 4, 8, 16]);
        assert!(cert.certified && cert.monotone, "instance {k}: {cert:?}");
    }
    let big = pair_of(identity(1) * c(2.5, 0.0), CMat::zeros(1, 1));
    assert!(build_ta_v0(&big).is_err());
}

#[test]
fn truncations_converge_strongly() {
    let mut r = rng(54);
    for k in 0..10 {
        let (s, p) = random_symmetrized_pair(2, &mut r);
        let pair = pair_of(s, p);
        let ta = build_ta_v0(&pair).unwrap().ta;
        for _ in 0..20 {
            let blocks = r.random_range(1..5);
            let x = ginibre(ta.section_dim(blocks), 1, &mut r);
            let target = ta.apply(&x).unwrap();
            let mut last = f64::INFINITY;
            for n in 1..=8 {
                let tn = build_tn_vn(&pair, n).unwrap();
                assert!(tn.yn_check <= 1e-12 && tn.defect_projection_check <= 1e-12 && tn.fund_eq_residual <= 1e-12);
                let y = tn.tn.apply(&x).unwrap();
                let err = (padded(&target, y.nrows()) - padded(&y, target.nrows())).norm();
                assert!(err <= last + 1e-12, "pair {k}, n = {n}: {err} after {last}");
                if n > blocks + 1 {
                    assert!(err <= 1e-12);
                }
                last = err;
            }
        }
    }
}

#[test]
fn hat_pair_commutes() {
    let mut r = rng(55);
    for n in 1..=5 {
        let a = with_numerical_radius(2, 0.9, &mut r);
        let (an, inn) = symbidisc::dilation::hat_pair(&a, n);
        assert!((&an * &inn - &inn * &an).norm() <= 1e-14);
    }
}

#[test]
fn toeplitz_model_examples() {
    let m = build_toeplitz_model(&CMat::zeros(1, 1)).unwrap();
    assert_eq!(band_annihilation_residual(&BiPoly::z1(), &m.tphi, &m.tz).unwrap(), 0.0);

    let m = build_toeplitz_model(&(identity(2) * c(0.8, 0.0))).unwrap();
    assert!(band_annihilation_residual(&line(c(0.8, 0.0)), &m.tphi, &m.tz).unwrap() <= 1e-15);

    let a = omega_one_matrix();
    let m = build_toeplitz_model(&a.adjoint()).unwrap();
    let q = &BiPoly::from_real(&[(0, 0, 1.0), (0, 1, 1.0), (1, 0, -1.0)])
        * &BiPoly::from_real(&[(2, 0, 1.0), (0, 1, -4.0)]);
    assert!(band_annihilation_residual(&q, &m.tphi, &m.tz).unwrap() <= 1e-12);

    let mut r = rng(56);
    for _ in 0..10 {
        let f = with_numerical_radius(3, 1.0, &mut r);
        let m = build_toeplitz_model(&f).unwrap();
        let iso = gamma_isometry_residuals(&m.tphi, &m.tz).unwrap();
        assert!(iso.v_isometry == 0.0 && iso.t_star_v <= 1e-15 && iso.commutator <= 1e-15, "{iso:?}");
    }
    assert!(build_toeplitz_model(&(identity(1) * c(1.1, 0.0))).is_err());
}

#[test]
fn shift_model_is_exact() {
    for r in [0.2, 0.5, 0.9] {
        let res = shift_model(r).unwrap();
        assert!(res.royal_annihilation <= 1e-14 && res.fundamental_residual <= 1e-12 && res.defect_scalar_check <= 1e-14);
    }
}

#[test]
fn gamma_dilation_equations() {
    let mut r = rng(57);
    for _ in 0..20 {
        let (s, p) = random_symmetrized_pair(2, &mut r);
        let b = build_ta_v0(&pair_of(s.clone(), p.clone())).unwrap();
        let (c1, c2, d1, d2) = dilation_blocks(&b).unwrap();
        let res = check_gamma_dilation_eqs(&s, &p, &c1, &c2, &d1, &d2).unwrap();
        assert!(res.max() <= 1e-9, "{res:?}");

        let mut bumped = c2.clone();
        bumped[(0, 0)] += c(1e-3, 0.0);
        let res = check_gamma_dilation_eqs(&s, &p, &c1, &bumped, &d1, &d2).unwrap();
        assert!(res.equations["eq4"] > 1e-4, "{res:?}");
    }

    let (s, p, _, _) = random_gamma_unitary(2, &mut r);
    let f = with_numerical_radius(2, 0.7, &mut r);
    let m = build_toeplitz_model(&f).unwrap();
    let zero = CMat::zeros(2, 2);
    let res =
        check_gamma_dilation_eqs(&s, &p, &zero, &zero, &TailOperator::Band(m.tphi), &TailOperator::Band(m.tz)).unwrap();
    assert!(res.max() <= 1e-12, "{res:?}");
}

#[test]
fn toral_dilation_equations() {
    // Minimal isometric dilation of (0, 0) on C¹.
    let e = CMat::from_element(1, 1, c(1.0, 0.0));
    let zero = CMat::zeros(1, 1);
    let sh = TailOperator::Band(BlockBandOperator::shift(1));
    let res = check_toral_dilation_eqs(&zero, &zero, &e, &e, &sh, &sh).unwrap();
    assert!(res.max() <= 1e-15, "{res:?}");

    // (T_z, T_z·W) cut at block 0, for a unitary W.
    let mut r = rng(58);
    for _ in 0..10 {
        let w = random_unitary(2, &mut r);
        let mut dw = BTreeMap::new();
        dw.insert(-1, w.clone());
        let d2 = TailOperator::Band(BlockBandOperator::toeplitz(2, dw).unwrap());
        let d1 = TailOperator::Band(BlockBandOperator::shift(2));
        let zero = CMat::zeros(2, 2);
        let res = check_toral_dilation_eqs(&zero, &zero, &identity(2), &w, &d1, &d2).unwrap();
        assert!(res.max() <= 1e-9, "{res:?}");
    }

    let q = random_unitary(2, &mut r);
    let conj = |d: &[(f64, f64)]| &q * diag(&d.iter().map(|&(x, y)| c(x, y)).collect::<Vec<_>>()) * q.adjoint();
    let t1 = conj(&[(0.6, 0.8), (0.0, 1.0)]);
    let t2 = conj(&[(-1.0, 0.0), (0.8, -0.6)]);
    let u1 = rmat(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let u2 = rmat(2, 2, &[0.0, -1.0, -1.0, 0.0]);
    let zero = CMat::zeros(2, 2);
    let res =
        check_toral_dilation_eqs(&t1, &t2, &zero, &zero, &TailOperator::Dense(u1), &TailOperator::Dense(u2)).unwrap();
    assert!(res.max() <= 1e-14, "{res:?}");
}

#[test]
fn appendix_examples() {
    let a = omega_one_matrix();
    let e = rmat(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let res = appendix_identities(&a, &e).unwrap();
    assert!(res.square_identity <= 1e-12 && res.commutation <= 1e-12);
    assert!(res.plus_isometry <= 1e-12 && res.minus_isometry <= 1e-12);
    assert!(res.prerequisites.values().all(|&v| v <= 1e-12));

    let zero = CMat::zeros(1, 1);
    let res = appendix_identities(&zero, &zero).unwrap();
    assert!((res.square_identity - 4.0).abs() <= 1e-15);

    let one = identity(1);
    let res = appendix_identities(&one, &one).unwrap();
    assert!(res.square_identity == 0.0 && res.commutation == 0.0);
    assert!(res.plus_isometry == 0.0 && res.minus_isometry == 0.0);
    assert!(appendix_identities(&one, &identity(2)).is_err());
    assert!(operator_norm(&a) > 1.0);
}
