//! Dense complex linear algebra used by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Eigen and Schur kernels
//! come from nalgebra, the SVD from faer (nalgebra's complex SVD returns
//! wrong factors on some rank-deficient inputs); this module adds the operator-theoretic
//! quantities on top (numerical radius, defect square roots, joint spectra).

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bipoly::BiPoly;
use crate::error::{Error, Result};
use crate::random::complex_normal;

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

/// Default number of angular nodes for the numerical radius search.
pub const NUMRAD_GRID: usize = 4096;
const SCHUR_MAX_ITER: usize = 10_000;
const JOINT_RETRIES: usize = 8;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cmat(rows: usize, cols: usize, data: &[(f64, f64)]) -> CMat {
    assert_eq!(data.len(), rows * cols, "row-major data length");
    CMat::from_row_iterator(rows, cols, data.iter().map(|&(re, im)| c(re, im)))
}

/// Real row-major matrix promoted to complex.
pub fn rmat(rows: usize, cols: usize, data: &[f64]) -> CMat {
    assert_eq!(data.len(), rows * cols, "row-major data length");
    CMat::from_row_iterator(rows, cols, data.iter().map(|&re| c(re, 0.0)))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn diag(entries: &[C64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

/// Serde adapter for `{"rows": m, "cols": n, "data": [[re, im], ...]}`,
/// row-major.
pub mod matrix_json {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{c, CMat};

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct MatrixJson {
        pub rows: usize,
        pub cols: usize,
        pub data: Vec<[f64; 2]>,
    }

    impl From<&CMat> for MatrixJson {
        fn from(m: &CMat) -> Self {
            let mut data = Vec::with_capacity(m.len());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    data.push([m[(i, j)].re, m[(i, j)].im]);
                }
            }
            MatrixJson { rows: m.nrows(), cols: m.ncols(), data }
        }
    }

    impl MatrixJson {
        /// Validates length and finiteness; the error names the offending entry.
        pub fn to_matrix(&self) -> Result<CMat, String> {
            if self.data.len() != self.rows * self.cols {
                return Err(format!(
                    "data has {} entries, expected rows*cols = {}",
                    self.data.len(),
                    self.rows * self.cols
                ));
            }
            if let Some(k) = self.data.iter().position(|z| !z[0].is_finite() || !z[1].is_finite()) {
                return Err(format!("non-finite entry at data[{k}] (row {}, col {})", k / self.cols, k % self.cols));
            }
            Ok(CMat::from_row_iterator(self.rows, self.cols, self.data.iter().map(|z| c(z[0], z[1]))))
        }
    }

    pub fn serialize<S: Serializer>(m: &CMat, ser: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<CMat, D::Error> {
        MatrixJson::deserialize(de)?.to_matrix().map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Option<CMat>, ser: S) -> Result<S::Ok, S::Error> {
            m.as_ref().map(MatrixJson::from).serialize(ser)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<CMat>, D::Error> {
            Option::<MatrixJson>::deserialize(de)?
                .map(|m| m.to_matrix().map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

/// Orthonormal columns spanning a subspace of `C^ambient_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    pub ambient_dim: usize,
    #[serde(with = "matrix_json")]
    pub columns: CMat,
}

impl SubspaceBasis {
    pub fn empty(ambient_dim: usize) -> Self {
        Self { ambient_dim, columns: CMat::zeros(ambient_dim, 0) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { ambient_dim, columns: identity(ambient_dim) }
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn projector(&self) -> CMat {
        &self.columns * self.columns.adjoint()
    }

    /// `‖Q*Q − I‖`, zero for an exactly orthonormal basis.
    pub fn orthonormality_defect(&self) -> f64 {
        operator_norm(&(self.columns.adjoint() * &self.columns - identity(self.dim())))
    }

    /// Orthonormal basis of the direct sum, assuming the inputs are orthogonal.
    pub fn concat(&self, other: &SubspaceBasis) -> SubspaceBasis {
        let n = self.ambient_dim;
        let mut cols = CMat::zeros(n, self.dim() + other.dim());
        cols.columns_mut(0, self.dim()).copy_from(&self.columns);
        cols.columns_mut(self.dim(), other.dim()).copy_from(&other.columns);
        SubspaceBasis { ambient_dim: n, columns: cols }
    }
}

pub fn ensure_square(m: &CMat, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("{what} is {}x{}, expected square", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// Largest singular value.
pub fn operator_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

fn to_faer(m: &CMat) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    })
}

fn from_faer(m: faer::MatRef<'_, faer::c64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        c(z.re, z.im)
    })
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv = to_faer(m).singular_values().expect("SVD of a finite matrix converges");
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn commutator_norm(a: &CMat, b: &CMat) -> f64 {
    operator_norm(&(a * b - b * a))
}

/// Commutation tolerance `1e-10·(‖S‖‖P‖+1)`.
pub fn commute_tolerance(s: &CMat, p: &CMat) -> f64 {
    1e-10 * (operator_norm(s) * operator_norm(p) + 1.0)
}

pub fn ensure_commuting(s: &CMat, p: &CMat) -> Result<()> {
    ensure_square(s, "S")?;
    ensure_square(p, "P")?;
    if s.nrows() != p.nrows() {
        return Err(Error::Dimension(format!("pair sizes {} and {} differ", s.nrows(), p.nrows())));
    }
    let residual = commutator_norm(s, p);
    if residual > commute_tolerance(s, p) {
        return Err(Error::Commutation { residual });
    }
    Ok(())
}

fn schur(m: &CMat) -> Option<(CMat, CMat)> {
    Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER).map(|s| s.unpack())
}

/// Eigenvalues of a square matrix, read off the complex Schur form.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    ensure_square(m, "matrix")?;
    let n = m.nrows();
    match n {
        0 => return Ok(vec![]),
        1 => return Ok(vec![m[(0, 0)]]),
        _ => {}
    }
    let (_, t) = schur(m).ok_or_else(|| Error::Convergence("Schur iteration".into()))?;
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

pub fn spectral_radius(m: &CMat) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Hermitian part `(M + M*)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    if n == 0 {
        return (vec![], CMat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn lambda_min(h: &CMat) -> f64 {
    if h.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(hermitian_part(h)).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn lambda_max(h: &CMat) -> f64 {
    if h.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    SymmetricEigen::new(hermitian_part(h)).eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn rotated_real_part_max(m: &CMat, theta: f64) -> f64 {
    lambda_max(&(m * C64::from_polar(1.0, theta)))
}

/// Numerical radius with the default angular grid.
pub fn numerical_radius(m: &CMat) -> Result<f64> {
    numerical_radius_with_grid(m, NUMRAD_GRID)
}

/// `ω(M) = max_θ λ_max(Re(e^{iθ}M))`: grid search followed by golden-section
/// refinement around the best few nodes.
pub fn numerical_radius_with_grid(m: &CMat, grid: usize) -> Result<f64> {
    ensure_square(m, "matrix")?;
    match m.nrows() {
        0 => return Ok(0.0),
        1 => return Ok(m[(0, 0)].norm()),
        _ => {}
    }
    let grid = grid.max(16);
    let h = std::f64::consts::TAU / grid as f64;
    let values: Vec<f64> = (0..grid).map(|k| rotated_real_part_max(m, k as f64 * h)).collect();
    // local maxima of the periodic sampled profile, best first
    let mut peaks: Vec<usize> = (0..grid)
        .filter(|&k| {
            let prev = values[(k + grid - 1) % grid];
            let next = values[(k + 1) % grid];
            values[k] >= prev && values[k] >= next
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for &k in peaks.iter().take(4) {
        let centre = k as f64 * h;
        best = best.max(golden_max(|t| rotated_real_part_max(m, t), centre - h, centre + h, 1e-10));
    }
    Ok(best.max(0.0))
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// Positive square root of a Hermitian positive semidefinite matrix.
/// Eigenvalues in `[-1e-10·scale, 0)` are clamped to zero.
pub fn psd_sqrt(m: &CMat) -> Result<CMat> {
    ensure_square(m, "matrix")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let scale = operator_norm(m).max(1.0);
    let skew = operator_norm(&(m - m.adjoint()));
    if skew > 1e-10 * scale {
        return Err(Error::Domain(format!("matrix is not Hermitian (skew part {skew:.3e})")));
    }
    let (values, vectors) = hermitian_eigen(m);
    if values[0] < -1e-10 * scale {
        return Err(Error::Domain(format!("negative eigenvalue {:.3e}", values[0])));
    }
    let roots: Vec<C64> = values.iter().map(|&v| c(v.max(0.0).sqrt(), 0.0)).collect();
    let r = &vectors * diag(&roots) * vectors.adjoint();
    Ok(hermitian_part(&r))
}

/// Default rank threshold `‖M‖·max(m,n)·1e-13`.
pub fn default_rank_tol(m: &CMat) -> f64 {
    operator_norm(m) * (m.nrows().max(m.ncols()) as f64) * 1e-13
}

struct SortedSvd {
    u: CMat,
    sigma: Vec<f64>,
    v: CMat,
}

/// Full SVD: `u` is `rows × rows`, `v` is `cols × cols`, `sigma` has
/// `min(rows, cols)` entries in nonincreasing order.
fn sorted_svd(m: &CMat) -> SortedSvd {
    let svd = to_faer(m).svd().expect("SVD of a finite matrix converges");
    let s = svd.S().column_vector();
    let sigma: Vec<f64> = (0..s.nrows()).map(|k| s[k].re).collect();
    debug_assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
    SortedSvd { u: from_faer(svd.U()), sigma, v: from_faer(svd.V()) }
}

/// Orthonormal bases of `range(M)` and `ker(M)` by singular-value threshold.
pub fn range_kernel(m: &CMat, tol: Option<f64>) -> (SubspaceBasis, SubspaceBasis) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (SubspaceBasis::empty(rows), SubspaceBasis::full(cols));
    }
    let tol = tol.unwrap_or_else(|| default_rank_tol(m));
    let svd = sorted_svd(m);
    let rank = svd.sigma.iter().filter(|&&s| s > tol).count();
    let kernel = svd.v.columns(rank, cols - rank).into_owned();
    let range = svd.u.columns(0, rank).into_owned();
    (
        SubspaceBasis { ambient_dim: rows, columns: range },
        SubspaceBasis { ambient_dim: cols, columns: kernel },
    )
}

pub fn rank(m: &CMat, tol: Option<f64>) -> usize {
    range_kernel(m, tol).0.dim()
}

/// Moore-Penrose pseudo-inverse with the given singular-value cutoff.
pub fn pseudo_inverse(m: &CMat, tol: Option<f64>) -> CMat {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return CMat::zeros(cols, rows);
    }
    let tol = tol.unwrap_or_else(|| default_rank_tol(m));
    let svd = sorted_svd(m);
    let mut out = CMat::zeros(cols, rows);
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s > tol {
            out += svd.v.column(k) * svd.u.column(k).adjoint() * c(1.0 / s, 0.0);
        }
    }
    out
}

/// Unitary `Q` with `Q*SQ`, `Q*PQ` upper triangular.
#[derive(Debug, Clone)]
pub struct JointTriangular {
    pub q: CMat,
    pub s_upper: CMat,
    pub p_upper: CMat,
    /// Diagonal pairs `(s_kk, p_kk)`: the joint spectrum with multiplicity.
    pub spectrum: Vec<(C64, C64)>,
    pub attempts: usize,
}

fn strictly_lower_norm(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in (j + 1)..n {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// Simultaneous Schur triangularization of a commuting pair via the Schur
/// form of a seeded random combination `αS + βP`.
pub fn joint_triangularize(s: &CMat, p: &CMat, seed: u64) -> Result<JointTriangular> {
    ensure_commuting(s, p)?;
    let n = s.nrows();
    let scale = operator_norm(s).max(operator_norm(p));
    let tol = 1e-8 * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=JOINT_RETRIES {
        let alpha = complex_normal(&mut rng);
        let beta = complex_normal(&mut rng);
        let combo = s * alpha + p * beta;
        let Some((q, _)) = (if n <= 1 { Some((identity(n), combo.clone())) } else { schur(&combo) }) else {
            continue;
        };
        let su = q.adjoint() * s * &q;
        let pu = q.adjoint() * p * &q;
        if strictly_lower_norm(&su) <= tol && strictly_lower_norm(&pu) <= tol {
            let spectrum = (0..n).map(|k| (su[(k, k)], pu[(k, k)])).collect();
            return Ok(JointTriangular { q, s_upper: su, p_upper: pu, spectrum, attempts: attempt });
        }
    }
    Err(Error::Convergence(format!("joint triangularization failed after {JOINT_RETRIES} combinations")))
}

/// `Σ c_ij S^i P^j` for a commuting pair, Horner in `S` inside Horner in `P`.
pub fn apply_bipoly(poly: &BiPoly, s: &CMat, p: &CMat) -> Result<CMat> {
    ensure_commuting(s, p)?;
    Ok(apply_bipoly_unchecked(poly, s, p))
}

/// As [`apply_bipoly`] without the commutation check.
pub fn apply_bipoly_unchecked(poly: &BiPoly, s: &CMat, p: &CMat) -> CMat {
    let n = s.nrows();
    let deg2 = poly.deg_z2();
    let deg1 = poly.deg_z1();
    let mut acc = CMat::zeros(n, n);
    if poly.is_zero() {
        return acc;
    }
    for j in (0..=deg2).rev() {
        let mut inner = CMat::zeros(n, n);
        for i in (0..=deg1).rev() {
            inner = inner * s;
            let coef = poly.coeff(i, j);
            if coef != C64::new(0.0, 0.0) {
                for k in 0..n {
                    inner[(k, k)] += coef;
                }
            }
        }
        acc = acc * p + inner;
    }
    acc
}

/// Direct sum of square blocks.
pub fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        out.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
        off += b.nrows();
    }
    out
}

/// Nilpotent forward shift on `C^n`: ones on the subdiagonal.
pub fn nilpotent_shift(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j + 1 { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
