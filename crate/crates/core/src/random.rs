//! Seeded generators for test matrices, pairs and polynomials.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bipoly::BiPoly;
use crate::numlin::{c, diag, identity, operator_norm, CMat, C64};

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Uniform point of the closed unit disc.
pub fn disc_point<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let r = rng.random::<f64>().sqrt();
    C64::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU)
}

pub fn circle_point<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let qr = ginibre(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Random matrix rescaled to the given operator norm.
pub fn random_contraction<R: Rng + ?Sized>(n: usize, norm: f64, rng: &mut R) -> CMat {
    let g = ginibre(n, n, rng);
    let gn = operator_norm(&g);
    if gn == 0.0 {
        return g;
    }
    g * c(norm / gn, 0.0)
}

/// A commuting pair of contractions.
///
/// Either a polynomial pair `(X, q(X))` with `‖X‖ ≤ 1` and `‖q‖₁ ≤ 1`, or a
/// normal pair diagonal in a random unitary basis.
pub fn random_commuting_contractions<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (CMat, CMat) {
    if rng.random::<f64>() < 0.6 {
        let x = random_contraction(n, 0.3 + 0.69 * rng.random::<f64>(), rng);
        let mut coefs: Vec<C64> = (0..3).map(|_| complex_normal(rng)).collect();
        let l1: f64 = coefs.iter().map(|z| z.norm()).sum();
        let target = 0.2 + 0.79 * rng.random::<f64>();
        for z in coefs.iter_mut() {
            *z *= target / l1;
        }
        let y = identity(n) * coefs[0] + &x * coefs[1] + &x * &x * coefs[2];
        if rng.random::<bool>() {
            (x, y)
        } else {
            (y, x)
        }
    } else {
        let u = random_unitary(n, rng);
        let a: Vec<C64> = (0..n).map(|_| disc_point(rng)).collect();
        let b: Vec<C64> = (0..n).map(|_| disc_point(rng)).collect();
        (&u * diag(&a) * u.adjoint(), &u * diag(&b) * u.adjoint())
    }
}

/// `π(T1, T2) = (T1 + T2, T1·T2)` for a random commuting contractive pair.
pub fn random_symmetrized_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (CMat, CMat) {
    let (t1, t2) = random_commuting_contractions(n, rng);
    (&t1 + &t2, &t1 * &t2)
}

/// Symmetrization of commuting unitaries diagonal in a random basis.
/// Also returns the unitary roots.
pub fn random_gamma_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (CMat, CMat, CMat, CMat) {
    let q = random_unitary(n, rng);
    let u1: Vec<C64> = (0..n).map(|_| circle_point(rng)).collect();
    let u2: Vec<C64> = (0..n).map(|_| circle_point(rng)).collect();
    let s: Vec<C64> = u1.iter().zip(&u2).map(|(a, b)| a + b).collect();
    let p: Vec<C64> = u1.iter().zip(&u2).map(|(a, b)| a * b).collect();
    let conj = |d: &[C64]| &q * diag(d) * q.adjoint();
    (conj(&s), conj(&p), conj(&u1), conj(&u2))
}

/// Dense random polynomial with `deg_z1 ≤ d1`, `deg_z2 ≤ d2`.
pub fn random_bipoly<R: Rng + ?Sized>(d1: u32, d2: u32, rng: &mut R) -> BiPoly {
    let mut terms = Vec::new();
    for i in 0..=d1 {
        for j in 0..=d2 {
            terms.push((i, j, complex_normal(rng)));
        }
    }
    BiPoly::from_terms(terms)
}

/// Random polynomial of total degree at most `deg`.
pub fn random_bipoly_total<R: Rng + ?Sized>(deg: u32, rng: &mut R) -> BiPoly {
    let mut terms = Vec::new();
    for i in 0..=deg {
        for j in 0..=(deg - i) {
            terms.push((i, j, complex_normal(rng)));
        }
    }
    BiPoly::from_terms(terms)
}
