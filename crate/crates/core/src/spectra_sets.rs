//! Sampled von Neumann checks. A sampled supremum is a lower bound for the
//! true one, so a `Violated` verdict is a genuine falsification while
//! `Consistent` is evidence at the recorded grid only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bipoly::{sample_variety, BiPoly, Region, SamplePoint};
use crate::error::{Error, Result};
use crate::numlin::{apply_bipoly, ensure_commuting, operator_norm, pseudo_inverse, CMat, C64};
use crate::pairs::OperatorPair;
use crate::par;
use crate::random::random_bipoly;

/// Relative margin separating a violation from sampling noise.
pub const VN_MARGIN: f64 = 1e-6;
/// Largest accepted condition number of a rational denominator `q(S, P)`.
pub const MAX_DENOMINATOR_COND: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

/// Square matrix of polynomials `[f_ij]`.
pub type MatrixPoly = Vec<Vec<BiPoly>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VNReport {
    /// `‖f(S, P)‖`, or the largest block norm over the matricial trials.
    pub lhs: f64,
    /// Sampled supremum; a lower bound for the true supremum.
    pub sup_estimate: f64,
    pub sample_count: usize,
    pub verdict: Verdict,
    /// Sample point where the supremum estimate is attained.
    pub witness: Option<SamplePoint>,
    /// The violating matricial polynomial, for complete checks.
    pub witness_poly: Option<MatrixPoly>,
    pub margin: f64,
    pub grid: usize,
    pub region: Region,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: SamplePoint,
}

/// `max |f|` over the points, `None` for an empty list.
pub fn sup_on_samples(f: &BiPoly, points: &[SamplePoint]) -> Option<SupEstimate> {
    points
        .iter()
        .map(|&(a, b)| SupEstimate { value: f.eval(a, b).norm(), argmax: (a, b) })
        .fold(None, |best: Option<SupEstimate>, e| match best {
            Some(b) if b.value >= e.value => Some(b),
            _ => Some(e),
        })
}

fn verdict(lhs: f64, sup: Option<f64>) -> (Verdict, f64) {
    match sup {
        None => (Verdict::Inconclusive, VN_MARGIN),
        Some(sup) => {
            let margin = VN_MARGIN * lhs.max(sup).max(1.0);
            let v = if lhs > sup + margin { Verdict::Violated } else { Verdict::Consistent };
            (v, margin)
        }
    }
}

fn report_from(lhs: f64, est: Option<SupEstimate>, count: usize, grid: usize, region: Region) -> VNReport {
    let (v, margin) = verdict(lhs, est.map(|e| e.value));
    VNReport {
        lhs,
        sup_estimate: est.map_or(0.0, |e| e.value),
        sample_count: count,
        verdict: v,
        witness: est.map(|e| e.argmax),
        witness_poly: None,
        margin,
        grid,
        region,
        trials: 1,
    }
}

/// Compares `‖f(S, P)‖` with `max |f|` over sampled points of the variety.
/// For `Bidisc` the pair is read as `(T1, T2)`.
pub fn vn_check(pair: &OperatorPair, f: &BiPoly, variety: &BiPoly, region: Region, grid: usize) -> Result<VNReport> {
    let lhs = operator_norm(&apply_bipoly(f, &pair.s, &pair.p)?);
    let samples = sample_variety(variety, region, grid);
    Ok(report_from(lhs, sup_on_samples(f, &samples), samples.len(), grid, region))
}

/// As [`vn_check`] for `f = num / den`. Rejects the input when `den(S, P)`
/// is singular or has condition number above [`MAX_DENOMINATOR_COND`];
/// samples where `den` nearly vanishes are dropped.
pub fn vn_check_rational(
    pair: &OperatorPair,
    num: &BiPoly,
    den: &BiPoly,
    variety: &BiPoly,
    region: Region,
    grid: usize,
) -> Result<VNReport> {
    let q = apply_bipoly(den, &pair.s, &pair.p)?;
    let sv = crate::numlin::singular_values(&q);
    let (smax, smin) = (sv.first().copied().unwrap_or(0.0), sv.last().copied().unwrap_or(0.0));
    if smin <= 0.0 || smax / smin >= MAX_DENOMINATOR_COND {
        return Err(Error::Domain(format!("denominator is ill conditioned on the pair (σ_max/σ_min = {:.3e})", smax / smin)));
    }
    let lhs = operator_norm(&(apply_bipoly(num, &pair.s, &pair.p)? * pseudo_inverse(&q, None)));
    let scale = den.max_abs();
    let samples: Vec<SamplePoint> = sample_variety(variety, region, grid)
        .into_iter()
        .filter(|&(a, b)| den.eval(a, b).norm() > 1e-8 * scale)
        .collect();
    let est = samples
        .iter()
        .map(|&(a, b)| SupEstimate { value: (num.eval(a, b) / den.eval(a, b)).norm(), argmax: (a, b) })
        .fold(None, |best: Option<SupEstimate>, e| match best {
            Some(b) if b.value >= e.value => Some(b),
            _ => Some(e),
        });
    Ok(report_from(lhs, est, samples.len(), grid, region))
}

/// Block operator `[f_ij(S, P)]`.
pub fn apply_matrix_poly(fs: &MatrixPoly, s: &CMat, p: &CMat) -> Result<CMat> {
    let k = fs.len();
    if fs.iter().any(|row| row.len() != k) {
        return Err(Error::Dimension("matricial polynomial must be square".into()));
    }
    let n = s.nrows();
    let mut out = CMat::zeros(k * n, k * n);
    for (i, row) in fs.iter().enumerate() {
        for (j, f) in row.iter().enumerate() {
            out.view_mut((i * n, j * n), (n, n)).copy_from(&apply_bipoly(f, s, p)?);
        }
    }
    Ok(out)
}

/// `‖[f_ij(a, b)]‖` at a scalar point.
pub fn eval_matrix_poly(fs: &MatrixPoly, a: C64, b: C64) -> f64 {
    let k = fs.len();
    let m = CMat::from_fn(k, k, |i, j| fs[i][j].eval(a, b));
    operator_norm(&m)
}

fn random_matrix_poly(degree: u32, rng: &mut ChaCha8Rng) -> MatrixPoly {
    let k = rng.random_range(1..=3usize);
    (0..k).map(|_| (0..k).map(|_| random_bipoly(degree, degree, rng)).collect()).collect()
}

/// Matricial version of [`vn_check`]: `seeded` trials run first, then
/// `trials` random `k × k` polynomials (`k ≤ 3`, bidegree `≤ matrix_degree`).
/// Stops at the first violation and returns it as the witness.
#[allow(clippy::too_many_arguments)]
pub fn complete_vn_check(
    pair: &OperatorPair,
    variety: &BiPoly,
    region: Region,
    grid: usize,
    matrix_degree: u32,
    trials: usize,
    seed: u64,
    seeded: &[MatrixPoly],
) -> Result<VNReport> {
    ensure_commuting(&pair.s, &pair.p)?;
    let samples = sample_variety(variety, region, grid);
    let mut polys: Vec<MatrixPoly> = seeded.to_vec();
    polys.extend((0..trials).map(|t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        random_matrix_poly(matrix_degree, &mut rng)
    }));

    let reports = par::map_indexed(polys.len(), |t| -> Result<(f64, Option<SupEstimate>)> {
        let fs = &polys[t];
        let lhs = operator_norm(&apply_matrix_poly(fs, &pair.s, &pair.p)?);
        let est = samples
            .iter()
            .map(|&(a, b)| SupEstimate { value: eval_matrix_poly(fs, a, b), argmax: (a, b) })
            .fold(None, |best: Option<SupEstimate>, e| match best {
                Some(b) if b.value >= e.value => Some(b),
                _ => Some(e),
            });
        Ok((lhs, est))
    });

    let mut worst: Option<(usize, f64, Option<SupEstimate>)> = None;
    for (t, r) in reports.into_iter().enumerate() {
        let (lhs, est) = r?;
        let (v, _) = verdict(lhs, est.map(|e| e.value));
        if v == Verdict::Violated {
            let mut rep = report_from(lhs, est, samples.len(), grid, region);
            rep.witness_poly = Some(polys[t].clone());
            rep.trials = t + 1;
            return Ok(rep);
        }
        // keep the trial closest to violating
        let gap = lhs - est.map_or(f64::INFINITY, |e| e.value);
        if worst.as_ref().is_none_or(|w| gap > w.1) {
            worst = Some((t, gap, est));
        }
    }
    match worst {
        None => Ok(report_from(0.0, None, samples.len(), grid, region)),
        Some((t, _, est)) => {
            let lhs = operator_norm(&apply_matrix_poly(&polys[t], &pair.s, &pair.p)?);
            let mut rep = report_from(lhs, est, samples.len(), grid, region);
            rep.trials = polys.len();
            Ok(rep)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::rmat;

    #[test]
    fn sup_examples() {
        assert!(sup_on_samples(&BiPoly::one(), &[]).is_none());
        let royal = BiPoly::from_real(&[(0, 1, 4.0), (2, 0, -1.0)]);
        let pts = sample_variety(&royal, Region::Gamma, 64);
        assert!(sup_on_samples(&royal, &pts).unwrap().value < 1e-12);
        assert!((sup_on_samples(&BiPoly::one(), &pts).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn toral_counterexample_is_violated() {
        let t1 = rmat(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let t2 = rmat(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
        let pair = OperatorPair::new(t1, t2).unwrap();
        let g = BiPoly::from_real(&[(1, 0, 1.0), (0, 1, -1.0)]);
        let rep = vn_check(&pair, &g, &g.pow(3), Region::Bidisc, 256).unwrap();
        assert_eq!(rep.verdict, Verdict::Violated);
        assert!(rep.sup_estimate < 1e-10);
    }
}
