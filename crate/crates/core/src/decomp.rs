//! Orthogonal splittings of Γ-unitaries along the factors of an annihilating
//! polynomial, and the truncated analogue for pure Toeplitz models.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::band::BlockBandOperator;
use crate::bipoly::{classify_gamma, compose_pi, BiPoly};
use crate::dilation::build_toeplitz_model;
use crate::error::{Error, Result};
use crate::numlin::{apply_bipoly, identity, operator_norm, range_kernel, CMat, SubspaceBasis, C64};
use crate::pairs::{annihilation_residual, OperatorPair, PAIR_TOL};
use crate::par;

/// Grid used when checking that a product of factors is Γ-distinguished.
pub const DISTINGUISHED_GRID: usize = 128;
const REFLECTION_POINTS: usize = 100;
const REFLECTION_SEED: u64 = 0x7ef1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceResiduals {
    /// `‖q_j(Σ)Π_j‖`
    pub annihilation: f64,
    /// `max ‖(I − Π)XΠ‖` over `X ∈ {S, S*, P, P*}`; for truncated models
    /// only `S` and `P`, on the whole truncated subspace.
    pub invariance: f64,
    /// Invariance on the part of a truncated subspace away from the cut.
    pub interior_invariance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub subspaces: Vec<SubspaceBasis>,
    pub annihilators: Vec<BiPoly>,
    pub residuals: Vec<SubspaceResiduals>,
    /// `max ‖B_i*B_j‖` over distinct subspaces.
    pub orthogonality: f64,
    /// `‖Σ Π_j − I‖`.
    pub span_defect: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    /// `‖q1(Σ)* q2(Σ)‖`
    pub value: f64,
    pub warnings: Vec<String>,
}

fn rank_tol(m: &CMat) -> f64 {
    1e-9 * operator_norm(m).max(1.0)
}

fn require_gamma_unitary(pair: &OperatorPair) -> Result<()> {
    pair.validate()?;
    let n = pair.dim();
    let scale = operator_norm(&pair.s).max(1.0);
    let res = [
        operator_norm(&(pair.s.adjoint() * &pair.p - &pair.s)) / scale,
        operator_norm(&(pair.p.adjoint() * &pair.p - identity(n))),
        operator_norm(&(&pair.p * pair.p.adjoint() - identity(n))),
        (operator_norm(&pair.s) - 2.0).max(0.0),
    ];
    let worst = res.iter().cloned().fold(0.0, f64::max);
    if worst > PAIR_TOL {
        return Err(Error::Domain(format!("pair is not a Γ-unitary (residual {worst:.3e})")));
    }
    Ok(())
}

fn product(factors: &[BiPoly]) -> BiPoly {
    factors.iter().fold(BiPoly::one(), |acc, f| &acc * f)
}

/// `‖q1(Σ)* q2(Σ)‖` for a Γ-unitary `Σ`. Warns when `q1·q2` does not
/// annihilate the pair or is not Γ-distinguished, since no orthogonality is
/// then expected.
pub fn orthogonality_check(pair: &OperatorPair, q1: &BiPoly, q2: &BiPoly) -> Result<OrthogonalityReport> {
    require_gamma_unitary(pair)?;
    let mut warnings = Vec::new();
    let q = q1 * q2;
    let ann = annihilation_residual(pair, &q)?;
    if ann > 1e-8 {
        warnings.push(format!("q1·q2 does not annihilate the pair (residual {ann:.3e})"));
    }
    if !classify_gamma(&q, DISTINGUISHED_GRID, 1e-6).distinguished {
        warnings.push("q1·q2 is not flagged distinguished".to_string());
    }
    let a = apply_bipoly(q1, &pair.s, &pair.p)?;
    let b = apply_bipoly(q2, &pair.s, &pair.p)?;
    Ok(OrthogonalityReport { value: operator_norm(&(a.adjoint() * b)), warnings })
}

/// Reflection data of a factor's pullback `Q = q∘π` of bidegree `(n, m)`:
/// `z1^n z2^m conj(Q(1/z̄1, 1/z̄2)) = α Q(z1, z2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reflection {
    pub alpha: C64,
    /// Largest `|reflected − αQ|` relative to the coefficient scale.
    pub residual: f64,
}

pub fn reflection_identity(q: &BiPoly) -> Reflection {
    let pull = compose_pi(q);
    let (n, m) = (pull.deg_z1(), pull.deg_z2());
    let reflected = BiPoly::from_terms(pull.terms().map(|(i, j, v)| (n - i, m - j, v.conj())));
    let mut rng = ChaCha8Rng::seed_from_u64(REFLECTION_SEED);
    let pts: Vec<(C64, C64)> = (0..REFLECTION_POINTS)
        .map(|_| {
            let mut z = || C64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU));
            (z(), z())
        })
        .collect();
    let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
    for &(a, b) in &pts {
        let v = pull.eval(a, b);
        num += v.conj() * reflected.eval(a, b);
        den += v.norm_sqr();
    }
    let alpha = if den > 0.0 { num / den } else { C64::new(1.0, 0.0) };
    let residual = pts
        .iter()
        .map(|&(a, b)| (reflected.eval(a, b) - alpha * pull.eval(a, b)).norm() / pull.eval_scale(a, b).max(1e-300))
        .fold(0.0, f64::max);
    Reflection { alpha, residual }
}

/// Checks the reflection identity on each factor and rescales it so that
/// `α = 1`. Failures only produce warnings.
fn normalize_factors(factors: &[BiPoly], warnings: &mut Vec<String>) -> Vec<BiPoly> {
    factors
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let r = reflection_identity(q);
            if r.residual > 1e-8 {
                warnings.push(format!("factor {k}: reflection identity fails (residual {:.3e})", r.residual));
                return q.clone();
            }
            if (r.alpha.norm() - 1.0).abs() > 1e-6 {
                warnings.push(format!("factor {k}: reflection constant has modulus {:.9}", r.alpha.norm()));
            }
            q.scale(r.alpha.sqrt() / r.alpha.norm().sqrt())
        })
        .collect()
}

fn restrict(pair: &OperatorPair, b: &CMat) -> OperatorPair {
    OperatorPair { s: b.adjoint() * &pair.s * b, p: b.adjoint() * &pair.p * b }
}

fn embed(b: &CMat, sub: &SubspaceBasis) -> SubspaceBasis {
    SubspaceBasis { ambient_dim: b.nrows(), columns: b * &sub.columns }
}

/// Splits into the part annihilated by `q1` and the part annihilated by `q2`.
fn split_two(pair: &OperatorPair, q1: &BiPoly, q2: &BiPoly) -> Result<(SubspaceBasis, SubspaceBasis)> {
    let a1 = apply_bipoly(q1, &pair.s, &pair.p)?;
    let a2 = apply_bipoly(q2, &pair.s, &pair.p)?;
    let (k2, _) = range_kernel(&a1, Some(rank_tol(&a1)));
    let (l1, _) = range_kernel(&a2, Some(rank_tol(&a2)));
    let n = pair.dim();
    let mut stacked = CMat::zeros(2 * n, n);
    stacked.rows_mut(0, n).copy_from(&a1.adjoint());
    stacked.rows_mut(n, n).copy_from(&a2.adjoint());
    let (_, lprime) = range_kernel(&stacked, Some(rank_tol(&stacked)));
    Ok((l1.concat(&lprime), k2))
}

fn decompose_rec(pair: &OperatorPair, factors: &[BiPoly]) -> Result<Vec<SubspaceBasis>> {
    let n = pair.dim();
    if factors.len() == 1 || n == 0 {
        let mut out = vec![SubspaceBasis::full(n)];
        out.extend((1..factors.len()).map(|_| SubspaceBasis::empty(n)));
        return Ok(out);
    }
    let rest = product(&factors[1..]);
    let (k1, k2) = split_two(pair, &factors[0], &rest)?;
    let mut out = vec![k1];
    if k2.dim() == 0 {
        out.extend((1..factors.len()).map(|_| SubspaceBasis::empty(n)));
        return Ok(out);
    }
    let sub = restrict(pair, &k2.columns);
    for s in decompose_rec(&sub, &factors[1..])? {
        out.push(embed(&k2.columns, &s));
    }
    Ok(out)
}

fn invariance(x: &CMat, pi: &CMat) -> f64 {
    operator_norm(&((identity(x.nrows()) - pi) * x * pi))
}

fn pairwise_orthogonality(subspaces: &[SubspaceBasis]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..subspaces.len() {
        for j in (i + 1)..subspaces.len() {
            if subspaces[i].dim() > 0 && subspaces[j].dim() > 0 {
                worst = worst.max(operator_norm(&(subspaces[i].columns.adjoint() * &subspaces[j].columns)));
            }
        }
    }
    worst
}

/// Reducing subspaces `K_j` of a Γ-unitary annihilated by `Π q_j`, with
/// `q_j` annihilating `Σ|K_j`. Two factors give `K2 = range q1(Σ)` and
/// `K1 = range q2(Σ) ⊕ (ker q1(Σ)* ∩ ker q2(Σ)*)`; more factors recurse
/// on `K2`.
pub fn factor_decompose_unitary(pair: &OperatorPair, factors: &[BiPoly]) -> Result<DecompositionResult> {
    if factors.is_empty() {
        return Err(Error::Domain("at least one factor is required".into()));
    }
    require_gamma_unitary(pair).map_err(|e| Error::Hypothesis(e.to_string()))?;
    let ann = annihilation_residual(pair, &product(factors))?;
    if ann > 1e-8 {
        return Err(Error::Hypothesis(format!("product of factors leaves residual {ann:.3e} on the pair")));
    }
    let mut warnings = Vec::new();
    let factors = normalize_factors(factors, &mut warnings);
    let subspaces = decompose_rec(pair, &factors)?;

    let n = pair.dim();
    let residuals = par::map_indexed(subspaces.len(), |j| -> Result<SubspaceResiduals> {
        let b = &subspaces[j];
        let pi = b.projector();
        let q = apply_bipoly(&factors[j], &pair.s, &pair.p)?;
        let inv = [&pair.s, &pair.p]
            .iter()
            .flat_map(|x| [invariance(x, &pi), invariance(&x.adjoint(), &pi)])
            .fold(0.0, f64::max);
        Ok(SubspaceResiduals { annihilation: operator_norm(&(q * &b.columns)), invariance: inv, interior_invariance: None })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let total = subspaces.iter().fold(CMat::zeros(n, n), |acc, b| acc + b.projector());
    Ok(DecompositionResult {
        orthogonality: pairwise_orthogonality(&subspaces),
        span_defect: operator_norm(&(total - identity(n))),
        subspaces,
        annihilators: factors,
        residuals,
        warnings,
    })
}

/// Truncated version for the pure model `(T_{F*+Fz}, T_z)` annihilated by
/// `q = Π q_j`: `H_j` is the image under `r_j(Σ) = (q/q_j)(Σ)` of the blocks
/// that `r_j(Σ)` keeps inside the first `level` blocks. These subspaces are
/// invariant rather than reducing; the residual near the cut is reported
/// separately from the interior one.
pub fn factor_decompose_pure_truncated(f: &CMat, factors: &[BiPoly], level: usize) -> Result<DecompositionResult> {
    if factors.is_empty() {
        return Err(Error::Domain("at least one factor is required".into()));
    }
    let model = build_toeplitz_model(f)?;
    let q = product(factors);
    let d = f.nrows();
    let deg = q.total_degree() as usize;
    if level < 2 * deg.max(1) {
        return Err(Error::Domain(format!("level {level} is below twice the total degree {deg}")));
    }
    let q_band = BlockBandOperator::eval_poly(&q, &model.tphi, &model.tz)?;
    let ann = q_band.max_block_norm() / q.max_abs().max(1.0);
    if ann > 1e-10 {
        return Err(Error::Hypothesis(format!("product of factors leaves residual {ann:.3e} on the model")));
    }
    let mut warnings = Vec::new();
    let factors = normalize_factors(factors, &mut warnings);
    let n = level * d;
    let s_sec = model.tphi.section(level + 1);
    let p_sec = model.tz.section(level + 1);

    let work = par::map_indexed(factors.len(), |j| -> Result<(SubspaceBasis, SubspaceResiduals)> {
        let others: Vec<BiPoly> =
            factors.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, f)| f.clone()).collect();
        let r = product(&others);
        let r_deg = r.total_degree() as usize;
        let r_band = BlockBandOperator::eval_poly(&r, &model.tphi, &model.tz)?;
        let r_sec = r_band.section(level);
        let image = |blocks: usize| -> SubspaceBasis {
            let cols = r_sec.columns(0, blocks * d).into_owned();
            range_kernel(&cols, Some(rank_tol(&cols))).0
        };
        let keep = level - r_deg;
        let h = image(keep);
        let h_int = image(keep.saturating_sub(1));

        // Pad to level + 1 blocks so that one application of S or P is exact.
        let pad = |b: &SubspaceBasis| {
            let mut m = CMat::zeros(n + d, b.dim());
            m.rows_mut(0, n).copy_from(&b.columns);
            m
        };
        let (hp, hip) = (pad(&h), pad(&h_int));
        let pi = &hp * hp.adjoint();
        let proj_out = identity(n + d) - &pi;
        let inv = |x: &CMat, b: &CMat| operator_norm(&(&proj_out * x * b));
        let invariance = inv(&s_sec, &hp).max(inv(&p_sec, &hp));
        let interior = inv(&s_sec, &hip).max(inv(&p_sec, &hip));

        let qj = &factors[j];
        let qj_deg = qj.total_degree() as usize;
        let qj_sec = BlockBandOperator::eval_poly(qj, &model.tphi, &model.tz)?.section(level + qj_deg);
        let mut hb = CMat::zeros((level + qj_deg) * d, h.dim());
        hb.rows_mut(0, n).copy_from(&h.columns);
        let annihilation = operator_norm(&(qj_sec * hb));
        Ok((
            h,
            SubspaceResiduals { annihilation, invariance, interior_invariance: Some(interior) },
        ))
    });
    let mut subspaces = Vec::new();
    let mut residuals = Vec::new();
    for w in work {
        let (h, r) = w?;
        subspaces.push(h);
        residuals.push(r);
    }
    let total = subspaces.iter().fold(CMat::zeros(n, n), |acc, b| acc + b.projector());
    if factors.len() > 1 {
        warnings.push("truncated subspaces are invariant, not reducing; orthogonality is not expected".into());
    }
    let mut result = DecompositionResult {
        orthogonality: pairwise_orthogonality(&subspaces),
        span_defect: operator_norm(&(total - identity(n))),
        subspaces,
        annihilators: factors,
        residuals,
        warnings,
    };
    result.warnings.dedup();
    Ok(result)
}

/// Wold-type split of a finite Γ-isometry: every finite-dimensional
/// Γ-isometry is a Γ-unitary, so the unitary part is the whole space.
pub fn wold_split_finite(pair: &OperatorPair) -> Result<(SubspaceBasis, SubspaceBasis, String)> {
    require_gamma_unitary(pair)?;
    Ok((
        SubspaceBasis::full(pair.dim()),
        SubspaceBasis::empty(pair.dim()),
        "finite Γ-isometries are Γ-unitaries; the pure part only appears in band models".to_string(),
    ))
}

/// Per-factor diagnostics keyed by factor index, for reports.
pub fn summary(result: &DecompositionResult) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (j, (b, r)) in result.subspaces.iter().zip(&result.residuals).enumerate() {
        out.insert(format!("dim_{j}"), b.dim() as f64);
        out.insert(format!("annihilation_{j}"), r.annihilation);
        out.insert(format!("invariance_{j}"), r.invariance);
    }
    out.insert("orthogonality".into(), result.orthogonality);
    out.insert("span_defect".into(), result.span_defect);
    out
}
