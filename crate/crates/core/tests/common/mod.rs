#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symbidisc::bipoly::{det_pencil, BiPoly, PencilOrientation};
use symbidisc::numlin::{c, diag, eigenvalues, numerical_radius, CMat, C64};
use symbidisc::pairs::OperatorPair;
use symbidisc::random::{circle_point, ginibre, random_unitary};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `z1 − ā z2 − a`.
pub fn line(a: C64) -> BiPoly {
    BiPoly::from_terms([(1, 0, c(1.0, 0.0)), (0, 1, -a.conj()), (0, 0, -a)])
}

/// Random `n × n` matrix scaled to numerical radius `w`.
pub fn with_numerical_radius(n: usize, w: f64, r: &mut ChaCha8Rng) -> CMat {
    let g = ginibre(n, n, r);
    let scale = numerical_radius(&g).unwrap();
    g * c(w / scale, 0.0)
}

/// A point of `Z(det(F* + z2F − z1)) ∩ bΓ`: `p` on the circle and `s` an
/// eigenvalue of `F* + pF`, which is `p^{1/2}` times a Hermitian matrix.
pub fn pencil_point(f: &CMat, r: &mut ChaCha8Rng) -> (C64, C64) {
    let p = circle_point(r);
    let eig = eigenvalues(&(f.adjoint() + f * p)).unwrap();
    (eig[r.random_range(0..eig.len())], p)
}

/// Point of `Z(line(a)) ∩ bΓ` over `p`.
pub fn line_point(a: C64, p: C64) -> (C64, C64) {
    (a.conj() * p + a, p)
}

/// The Γ-unitary with the given joint eigenvalues in a random orthonormal basis.
pub fn unitary_with_spectrum(pts: &[(C64, C64)], r: &mut ChaCha8Rng) -> OperatorPair {
    let u = random_unitary(pts.len(), r);
    let s: Vec<C64> = pts.iter().map(|t| t.0).collect();
    let p: Vec<C64> = pts.iter().map(|t| t.1).collect();
    OperatorPair::new(&u * diag(&s) * u.adjoint(), &u * diag(&p) * u.adjoint()).unwrap()
}

pub fn pencil(f: &CMat) -> BiPoly {
    det_pencil(f, PencilOrientation::AdjointFirst).unwrap()
}
