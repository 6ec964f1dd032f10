mod common;

use common::{line, line_point, pencil, pencil_point, rng, with_numerical_radius};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use symbidisc::bipoly::BiPoly;
use symbidisc::decomp::{
    factor_decompose_pure_truncated, factor_decompose_unitary, orthogonality_check, reflection_identity,
    wold_split_finite,
};
use symbidisc::numlin::{apply_bipoly, block_diag, c, diag, identity, operator_norm, CMat, C64};
use symbidisc::pairs::{classify_pair_default, OperatorPair};
use symbidisc::random::random_unitary;
use symbidisc::Error;

/// `count` points of `Z(q) ∩ bΓ` drawn by `draw`, keeping those off every `avoid` variety.
fn points_on(
    count: usize,
    avoid: &[&BiPoly],
    r: &mut ChaCha8Rng,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> (C64, C64),
) -> Vec<(C64, C64)> {
    let mut out = Vec::new();
    while out.len() < count {
        let (s, p) = draw(r);
        if avoid.iter().all(|q| q.eval(s, p).norm() > 1e-3) {
            out.push((s, p));
        }
    }
    out
}

/// Γ-unitary `U·diag(blocks)·U*` and the projectors onto the blocks.
fn blocked_unitary(blocks: &[Vec<(C64, C64)>], r: &mut ChaCha8Rng) -> (OperatorPair, Vec<CMat>) {
    let pts: Vec<(C64, C64)> = blocks.concat();
    let n = pts.len();
    let u = random_unitary(n, r);
    let s: Vec<C64> = pts.iter().map(|t| t.0).collect();
    let p: Vec<C64> = pts.iter().map(|t| t.1).collect();
    let pair = OperatorPair::new(&u * diag(&s) * u.adjoint(), &u * diag(&p) * u.adjoint()).unwrap();
    let mut projectors = Vec::new();
    let mut start = 0;
    for b in blocks {
        let mut d = vec![c(0.0, 0.0); n];
        for slot in d.iter_mut().skip(start).take(b.len()) {
            *slot = c(1.0, 0.0);
        }
        projectors.push(&u * diag(&d) * u.adjoint());
        start += b.len();
    }
    (pair, projectors)
}

fn two_pencils(r: &mut ChaCha8Rng) -> (CMat, CMat, BiPoly, BiPoly) {
    let f1 = with_numerical_radius(2, 0.8, r);
    let f2 = with_numerical_radius(2, 0.8, r);
    let (q1, q2) = (pencil(&f1), pencil(&f2));
    (f1, f2, q1, q2)
}

#[test]
fn pencil_blocks_are_orthogonal() {
    let mut r = rng(71);
    for _ in 0..20 {
        let (f1, f2, q1, q2) = two_pencils(&mut r);
        let k1 = r.random_range(1..4);
        let k2 = r.random_range(1..4);
        let b1 = points_on(k1, &[&q2], &mut r, |r| pencil_point(&f1, r));
        let b2 = points_on(k2, &[&q1], &mut r, |r| pencil_point(&f2, r));
        let (pair, proj) = blocked_unitary(&[b1, b2], &mut r);
        let rep = orthogonality_check(&pair, &q1, &q2).unwrap();
        assert!(rep.value <= 1e-9, "{}", rep.value);
        assert!(rep.warnings.is_empty(), "{:?}", rep.warnings);

        let same = orthogonality_check(&pair, &q1, &q1).unwrap();
        let norm = operator_norm(&apply_bipoly(&q1, &pair.s, &pair.p).unwrap());
        assert!((same.value - norm * norm).abs() <= 1e-10 * norm * norm);

        let dec = factor_decompose_unitary(&pair, &[q1.clone(), q2.clone()]).unwrap();
        assert_eq!(dec.subspaces.iter().map(|b| b.dim()).collect::<Vec<_>>(), vec![k1, k2]);
        for (b, want) in dec.subspaces.iter().zip(&proj) {
            assert!((b.projector() - want).norm() <= 1e-8);
        }
        assert!(dec.orthogonality <= 1e-8 && dec.span_defect <= 1e-8);
        for res in &dec.residuals {
            assert!(res.annihilation <= 1e-7 && res.invariance <= 1e-8, "{res:?}");
        }
    }
}

#[test]
fn annihilated_by_one_factor() {
    let mut r = rng(72);
    let (f1, _, q1, q2) = two_pencils(&mut r);
    let b1 = points_on(3, &[&q2], &mut r, |r| pencil_point(&f1, r));
    let (pair, _) = blocked_unitary(&[b1], &mut r);
    assert!(orthogonality_check(&pair, &q1, &q2).unwrap().value <= 1e-12);

    let dec = factor_decompose_unitary(&pair, &[q1.clone()]).unwrap();
    assert_eq!(dec.subspaces.len(), 1);
    assert_eq!(dec.subspaces[0].dim(), 3);
    assert!(dec.span_defect <= 1e-12);
}

#[test]
fn three_lines_give_three_reducing_subspaces() {
    let mut r = rng(73);
    for _ in 0..10 {
        let a = [c(0.3, 0.0), c(-0.2, 0.4), c(0.1, -0.6)];
        let qs: Vec<BiPoly> = a.iter().map(|&x| line(x)).collect();
        let blocks: Vec<Vec<(C64, C64)>> = (0..3)
            .map(|j| {
                let avoid: Vec<&BiPoly> = qs.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, q)| q).collect();
                let n = r.random_range(1..3);
                points_on(n, &avoid, &mut r, |r| line_point(a[j], symbidisc::random::circle_point(r)))
            })
            .collect();
        let dims: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
        let (pair, proj) = blocked_unitary(&blocks, &mut r);
        let dec = factor_decompose_unitary(&pair, &qs).unwrap();
        assert_eq!(dec.subspaces.iter().map(|b| b.dim()).collect::<Vec<_>>(), dims);
        assert!(dec.orthogonality <= 1e-8 && dec.span_defect <= 1e-8);
        for (j, b) in dec.subspaces.iter().enumerate() {
            assert!((b.projector() - &proj[j]).norm() <= 1e-8);
            let q = &b.columns;
            let sub = OperatorPair::new(q.adjoint() * &pair.s * q, q.adjoint() * &pair.p * q).unwrap();
            assert!(classify_pair_default(&sub).unwrap().flags.gamma_unitary);
        }
        assert!(dec.warnings.is_empty(), "{:?}", dec.warnings);
    }
}

#[test]
fn hypotheses_are_enforced() {
    let contraction = OperatorPair::new(identity(1), identity(1) * c(0.25, 0.0)).unwrap();
    assert!(matches!(factor_decompose_unitary(&contraction, &[line(c(0.3, 0.0))]), Err(Error::Hypothesis(_))));
    assert!(orthogonality_check(&contraction, &BiPoly::z1(), &BiPoly::z2()).is_err());

    let pts = [line_point(c(0.3, 0.0), c(0.0, 1.0))];
    let (pair, _) = blocked_unitary(&[pts.to_vec()], &mut rng(74));
    assert!(matches!(factor_decompose_unitary(&pair, &[BiPoly::z1()]), Err(Error::Hypothesis(_))));
    assert!(factor_decompose_unitary(&pair, &[]).is_err());
    let (unitary, pure, note) = wold_split_finite(&pair).unwrap();
    assert_eq!((unitary.dim(), pure.dim()), (1, 0));
    assert!(!note.is_empty());
}

#[test]
fn non_reflecting_factor_warns() {
    // (2I, I) is annihilated by z1 − 2, whose pullback has no reflection symmetry
    let pair = OperatorPair::new(identity(2) * c(2.0, 0.0), identity(2)).unwrap();
    let q = BiPoly::from_real(&[(1, 0, 1.0), (0, 0, -2.0)]);
    assert!(reflection_identity(&q).residual > 1e-3);
    let dec = factor_decompose_unitary(&pair, &[q]).unwrap();
    assert!(dec.warnings.iter().any(|w| w.contains("reflection identity fails")), "{:?}", dec.warnings);

    let scaled = line(c(0.3, 0.0)).scale(c(0.0, 2.0));
    let refl = reflection_identity(&scaled);
    assert!(refl.residual <= 1e-12 && (refl.alpha.norm() - 1.0).abs() <= 1e-12);
}

#[test]
fn pure_model_splits_along_blocks() {
    let mut r = rng(75);
    for _ in 0..5 {
        let (f1, f2, q1, q2) = two_pencils(&mut r);
        let f = block_diag(&[f1, f2]);
        let level = 10;
        let dec = factor_decompose_pure_truncated(&f, &[q1, q2], level).unwrap();
        assert_eq!(dec.subspaces.len(), 2);
        for (j, b) in dec.subspaces.iter().enumerate() {
            assert!(b.dim() > 0);
            // coordinates 2j, 2j+1 of each 4-dimensional block belong to component j
            let other = 1 - j;
            let mut leak: f64 = 0.0;
            for blk in 0..level {
                for k in 0..2 {
                    leak = leak.max(b.columns.row(blk * 4 + 2 * other + k).norm());
                }
            }
            assert!(leak <= 1e-8, "factor {j}: leak {leak:e}");
            let res = &dec.residuals[j];
            assert!(res.annihilation <= 1e-9, "{res:?}");
            assert!(res.interior_invariance.unwrap() <= 1e-6, "{res:?}");
        }
        assert!(dec.warnings.iter().any(|w| w.contains("invariant, not reducing")));
    }
}

#[test]
fn pure_model_single_factor() {
    let f = identity(2) * c(0.8, 0.0);
    let dec = factor_decompose_pure_truncated(&f, &[line(c(0.8, 0.0))], 6).unwrap();
    assert_eq!(dec.subspaces[0].dim(), 12);
    assert!(dec.span_defect <= 1e-12);
    let res = &dec.residuals[0];
    // the shift pushes the last kept block across the cut; away from it nothing leaks
    assert!(res.annihilation <= 1e-14 && res.interior_invariance == Some(0.0), "{res:?}");
    assert!((res.invariance - 1.0).abs() <= 1e-12);

    let mut r = rng(76);
    let g = with_numerical_radius(2, 0.6, &mut r);
    let dec = factor_decompose_pure_truncated(&g, &[pencil(&g)], 8).unwrap();
    assert_eq!(dec.subspaces[0].dim(), 16);
    assert!(dec.residuals[0].annihilation <= 1e-10);

    assert!(matches!(factor_decompose_pure_truncated(&g, &[BiPoly::z1()], 8), Err(Error::Hypothesis(_))));
    assert!(factor_decompose_pure_truncated(&g, &[pencil(&g)], 2).is_err());
}
