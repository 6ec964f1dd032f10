mod common;

use std::f64::consts::TAU;

use common::{line, rng, unitary_with_spectrum};
use rand::Rng;

use symbidisc::bipoly::{sample_variety, BiPoly, Region};
use symbidisc::gamma_geom::{classify_point, symmetrize, GammaPoint, Region as PointRegion};
use symbidisc::numlin::{c, identity, operator_norm, C64};
use symbidisc::pairs::OperatorPair;
use symbidisc::random::{random_bipoly, random_bipoly_total};
use symbidisc::registry::{counter_gamma_pair, counter_toral_pair, royal, royal_pair};
use symbidisc::spectra_sets::{complete_vn_check, sup_on_samples, vn_check, vn_check_rational, Verdict};

#[test]
fn sup_is_monotone_under_grid_refinement() {
    let mut r = rng(61);
    for _ in 0..10 {
        let variety = random_bipoly(1, 1, &mut r);
        let f = random_bipoly_total(3, &mut r);
        let mut last = 0.0;
        for grid in [64, 128, 256, 512] {
            let pts = sample_variety(&variety, Region::Gamma, grid);
            let sup = sup_on_samples(&f, &pts).map_or(0.0, |e| e.value);
            assert!(sup >= last, "grid {grid}: {sup} < {last}");
            last = sup;
        }
    }
}

#[test]
fn sup_of_s_over_the_distinguished_boundary_tends_to_two() {
    let mut last = 0.0;
    for g in [8, 32, 128, 512] {
        // the two angle grids are offset, so z1 = z2 is never sampled
        let pts: Vec<(C64, C64)> = (0..g)
            .flat_map(|a| (0..g).map(move |b| (a, b)))
            .map(|(a, b)| {
                let pt = symmetrize(
                    C64::from_polar(1.0, TAU * a as f64 / g as f64),
                    C64::from_polar(1.0, TAU * (b as f64 + 0.5) / g as f64),
                );
                (pt.s, pt.p)
            })
            .collect();
        let sup = sup_on_samples(&BiPoly::z1(), &pts).unwrap().value;
        let exact = 2.0 * (std::f64::consts::PI / (2.0 * g as f64)).cos();
        assert!((sup - exact).abs() <= 1e-12 && sup > last && sup < 2.0);
        last = sup;
    }
    assert!(2.0 - last < 1e-4);
}

/// Γ-unitaries whose joint eigenvalues are sampled points of `Z(p) ∩ bΓ`.
/// The sampled supremum then dominates `max |f|` over the spectrum, which
/// is `‖f(S, P)‖` for a normal pair.
#[test]
fn unitaries_on_the_variety_are_consistent() {
    let mut r = rng(62);
    for variety in [line(c(0.3, 0.0)), line(c(-0.2, 0.5)), royal()] {
        let grid = 256;
        let on_boundary: Vec<(C64, C64)> = sample_variety(&variety, Region::Gamma, grid)
            .into_iter()
            .filter(|&(s, p)| classify_point(GammaPoint::new(s, p), 1e-9).region == PointRegion::Bgamma)
            .collect();
        assert!(on_boundary.len() > grid);
        for _ in 0..34 {
            let pts: Vec<(C64, C64)> =
                (0..3).map(|_| on_boundary[r.random_range(0..on_boundary.len())]).collect();
            let pair = unitary_with_spectrum(&pts, &mut r);
            let f = random_bipoly(2, 2, &mut r);
            let rep = vn_check(&pair, &f, &variety, Region::Gamma, grid).unwrap();
            assert_eq!(rep.verdict, Verdict::Consistent, "{variety}: {rep:?}");
            assert!(rep.lhs <= rep.sup_estimate + rep.margin);
        }
    }
}

#[test]
fn royal_pairs_are_consistent() {
    let mut r = rng(63);
    for k in 0..30 {
        let pair = royal_pair(3, 600 + k);
        assert!(operator_norm(&pair.s) <= 1.8 + 1e-12);
        let f = random_bipoly(2, 2, &mut r);
        let rep = vn_check(&pair, &f, &royal(), Region::Gamma, 512).unwrap();
        assert_eq!(rep.verdict, Verdict::Consistent, "{rep:?}");
    }
}

#[test]
fn counterexamples_are_violated() {
    let (pair, _) = counter_gamma_pair();
    let rep = vn_check(&pair, &royal(), &royal().pow(2), Region::Gamma, 256).unwrap();
    assert_eq!(rep.verdict, Verdict::Violated);
    assert!(rep.lhs > 0.1 && rep.sup_estimate <= 1e-10);

    let pair = counter_toral_pair();
    let g = BiPoly::from_real(&[(1, 0, 1.0), (0, 1, -1.0)]);
    let rep = vn_check(&pair, &g, &g.pow(3), Region::Bidisc, 256).unwrap();
    assert_eq!(rep.verdict, Verdict::Violated);

    let rep = vn_check(&pair, &g, &BiPoly::one(), Region::Bidisc, 64).unwrap();
    assert_eq!(rep.verdict, Verdict::Inconclusive);
    assert_eq!(rep.sample_count, 0);
}

#[test]
fn complete_check_on_royal_pair() {
    let pair = royal_pair(3, 64);
    let rep = complete_vn_check(&pair, &royal(), Region::Gamma, 256, 2, 200, 7, &[]).unwrap();
    assert_eq!(rep.verdict, Verdict::Consistent, "{rep:?}");
    assert_eq!(rep.trials, 200);
    let again = complete_vn_check(&pair, &royal(), Region::Gamma, 256, 2, 200, 7, &[]).unwrap();
    assert_eq!(rep, again);
}

#[test]
fn scalar_trials_reproduce_vn_check() {
    let mut r = rng(64);
    let (counter, _) = counter_gamma_pair();
    let cases = [(counter, royal().pow(2)), (royal_pair(2, 5), royal())];
    for (pair, variety) in cases {
        for _ in 0..5 {
            let f = random_bipoly(2, 2, &mut r);
            let scalar = vn_check(&pair, &f, &variety, Region::Gamma, 128).unwrap();
            let seeded = vec![vec![vec![f.clone()]]];
            let full = complete_vn_check(&pair, &variety, Region::Gamma, 128, 1, 0, 0, &seeded).unwrap();
            assert_eq!(full.verdict, scalar.verdict);
            assert!((full.lhs - scalar.lhs).abs() <= 1e-12 * scalar.lhs.max(1.0));
            assert!((full.sup_estimate - scalar.sup_estimate).abs() <= 1e-12 * scalar.sup_estimate.max(1.0));
        }
    }
}

#[test]
fn seeded_witness_is_found() {
    let (pair, _) = counter_gamma_pair();
    let seeded = vec![vec![vec![royal()]]];
    let rep = complete_vn_check(&pair, &royal().pow(2), Region::Gamma, 128, 1, 20, 3, &seeded).unwrap();
    assert_eq!(rep.verdict, Verdict::Violated);
    assert_eq!(rep.trials, 1);
    assert_eq!(rep.witness_poly.as_ref(), seeded.first());
}

#[test]
fn rational_functions() {
    let pair = OperatorPair::new(identity(2) * c(0.5, 0.0), identity(2) * c(0.0625, 0.0)).unwrap();
    let num = BiPoly::z1();
    let den = BiPoly::from_real(&[(0, 0, 3.0), (1, 0, -1.0)]);
    let rep = vn_check_rational(&pair, &num, &den, &royal(), Region::Gamma, 256).unwrap();
    // a scalar pair sits on the royal variety at a grid point
    assert!((rep.lhs - 0.2).abs() <= 1e-14);
    assert_eq!(rep.verdict, Verdict::Consistent);

    let singular = BiPoly::from_real(&[(0, 0, 0.5), (1, 0, -1.0)]);
    assert!(vn_check_rational(&pair, &num, &singular, &royal(), Region::Gamma, 64).is_err());
}
