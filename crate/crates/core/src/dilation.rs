//! Γ-isometric dilations built as exact block band operators: the minimal
//! dilation `(T_A, V_0)`, its truncations `(T_n, V_n)`, Toeplitz models
//! `(T_{F*+Fz}, T_z)`, and residual checks for the block dilation equations.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::band::BlockBandOperator;
use crate::bipoly::BiPoly;
use crate::error::{Error, Result};
use crate::numlin::{identity, matrix_json, numerical_radius, operator_norm, CMat, C64};
use crate::pairs::{classify_pair_default, fundamental_operator, OperatorPair};

/// Minimal Γ-isometric dilation of a Γ-contraction on `H ⊕ ℓ²(D_P)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationBundle {
    pub base: OperatorPair,
    /// Fundamental operator on the defect space, in defect coordinates.
    #[serde(with = "matrix_json")]
    pub fundamental: CMat,
    /// `D_P` as a map from `H` into defect coordinates.
    #[serde(with = "matrix_json")]
    pub defect_map: CMat,
    #[serde(rename = "TA")]
    pub ta: BlockBandOperator,
    #[serde(rename = "V0")]
    pub v0: BlockBandOperator,
}

fn require_contraction(pair: &OperatorPair) -> Result<()> {
    let class = classify_pair_default(pair)?;
    if !class.flags.gamma_contraction {
        return Err(Error::Domain("pair is not a Γ-contraction".into()));
    }
    Ok(())
}

/// `T_A(x0, x1, …) = (Sx0, A*D_Px0 + Ax1, A*x1 + Ax2, …)` and
/// `V_0(x0, x1, …) = (Px0, D_Px0, x1, x2, …)`.
pub fn build_ta_v0(pair: &OperatorPair) -> Result<DilationBundle> {
    require_contraction(pair)?;
    let f = fundamental_operator(pair)?;
    let n = pair.dim();
    let r = f.a.nrows();
    let dp = f.defect_coords();
    let a = f.a.clone();
    let size = n + r;

    let mut t_corner = CMat::zeros(size, size);
    t_corner.view_mut((0, 0), (n, n)).copy_from(&pair.s);
    t_corner.view_mut((n, 0), (r, n)).copy_from(&(a.adjoint() * &dp));
    t_corner.view_mut((n, n), (r, r)).copy_from(&a);
    let mut t_diag = BTreeMap::new();
    t_diag.insert(0, a.clone());
    t_diag.insert(-1, a.adjoint());

    let mut v_corner = CMat::zeros(size, size);
    v_corner.view_mut((0, 0), (n, n)).copy_from(&pair.p);
    v_corner.view_mut((n, 0), (r, n)).copy_from(&dp);
    let mut v_diag = BTreeMap::new();
    v_diag.insert(-1, identity(r));

    Ok(DilationBundle {
        base: pair.clone(),
        fundamental: a,
        defect_map: dp,
        ta: BlockBandOperator::new(n, r, 2, t_corner, t_diag)?,
        v0: BlockBandOperator::new(n, r, 2, v_corner, v_diag)?,
    })
}

/// Residuals of the Γ-isometry identities for a dilation pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryResiduals {
    /// `V*V − I`
    pub v_isometry: f64,
    /// `T*V − T`
    pub t_star_v: f64,
    /// `TV − VT`
    pub commutator: f64,
}

pub fn gamma_isometry_residuals(t: &BlockBandOperator, v: &BlockBandOperator) -> Result<IsometryResiduals> {
    let id = BlockBandOperator::identity(v.head_dim(), v.block_dim());
    Ok(IsometryResiduals {
        v_isometry: v.adjoint().mul(v)?.sub(&id)?.max_block_norm(),
        t_star_v: t.adjoint().mul(v)?.sub(t)?.max_block_norm(),
        commutator: t.mul(v)?.sub(&v.mul(t)?)?.max_block_norm(),
    })
}

/// `max ‖P_H T^i V^j |_H − S^i P^j‖` over `i + j ≤ max_total_degree`.
pub fn verify_compression(bundle: &DilationBundle, max_total_degree: u32) -> Result<f64> {
    let (s, p) = (&bundle.base.s, &bundle.base.p);
    let n = s.nrows();
    let mut t_pows = vec![BlockBandOperator::identity(n, bundle.ta.block_dim())];
    let mut s_pows = vec![identity(n)];
    for i in 1..=max_total_degree as usize {
        t_pows.push(t_pows[i - 1].mul(&bundle.ta)?);
        s_pows.push(&s_pows[i - 1] * s);
    }
    let mut worst: f64 = 0.0;
    let mut vj = BlockBandOperator::identity(n, bundle.v0.block_dim());
    let mut pj = identity(n);
    for j in 0..=max_total_degree as usize {
        for i in 0..=(max_total_degree as usize - j) {
            let head = t_pows[i].mul(&vj)?.head_block();
            worst = worst.max(operator_norm(&(head - &s_pows[i] * &pj)));
        }
        vj = vj.mul(&bundle.v0)?;
        pj = &pj * p;
    }
    Ok(worst)
}

/// The truncated pair `(T_n, V_n)` and the exact checks that come with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub n: usize,
    pub tn: BlockBandOperator,
    pub vn: BlockBandOperator,
    /// Deviation of `T_n − T_n*V_n` from the pattern "zero except `A` at block `(n, n)`".
    pub yn_check: f64,
    /// Deviation of `I − V_n*V_n` from the projection onto blocks `≥ n`.
    pub defect_projection_check: f64,
    /// `‖(T_n − T_n*V_n) − D_{V_n} Y_n D_{V_n}‖` with `Y_n = T_n − T_n*V_n`.
    pub fund_eq_residual: f64,
    /// `‖Â_nÎ_n − Î_nÂ_n‖`.
    pub an_in_commutator: f64,
    /// Deviation of `Â_nÎ_n` from `A` on the subdiagonal and `A*` two below.
    pub an_in_pattern: f64,
}

/// `Â_n` (`A` on the diagonal, `A*` below it) and the `n`-block nilpotent shift `Î_n`.
pub fn hat_pair(a: &CMat, n: usize) -> (CMat, CMat) {
    let r = a.nrows();
    let mut an = CMat::zeros(n * r, n * r);
    let mut inn = CMat::zeros(n * r, n * r);
    for k in 0..n {
        an.view_mut((k * r, k * r), (r, r)).copy_from(a);
        if k + 1 < n {
            an.view_mut(((k + 1) * r, k * r), (r, r)).copy_from(&a.adjoint());
            inn.view_mut(((k + 1) * r, k * r), (r, r)).copy_from(&identity(r));
        }
    }
    (an, inn)
}

pub fn build_tn_vn(pair: &OperatorPair, n: usize) -> Result<Truncation> {
    if n == 0 {
        return Err(Error::Domain("truncation level must be at least 1".into()));
    }
    let bundle = build_ta_v0(pair)?;
    let (a, dp) = (&bundle.fundamental, &bundle.defect_map);
    let h = pair.dim();
    let r = a.nrows();
    let c = n + 1;
    let size = h + n * r;
    let at = |k: usize| if k == 0 { 0 } else { h + (k - 1) * r };

    let mut t = CMat::zeros(size, size);
    let mut v = CMat::zeros(size, size);
    t.view_mut((0, 0), (h, h)).copy_from(&pair.s);
    v.view_mut((0, 0), (h, h)).copy_from(&pair.p);
    t.view_mut((at(1), 0), (r, h)).copy_from(&(a.adjoint() * dp));
    v.view_mut((at(1), 0), (r, h)).copy_from(dp);
    for k in 1..=n {
        t.view_mut((at(k), at(k)), (r, r)).copy_from(a);
        if k >= 2 {
            t.view_mut((at(k), at(k - 1)), (r, r)).copy_from(&a.adjoint());
            v.view_mut((at(k), at(k - 1)), (r, r)).copy_from(&identity(r));
        }
    }
    let tn = BlockBandOperator::new(h, r, c, t, BTreeMap::new())?;
    let vn = BlockBandOperator::new(h, r, c, v, BTreeMap::new())?;

    let yn = tn.sub(&tn.adjoint().mul(&vn)?)?;
    let mut expected = CMat::zeros(size, size);
    expected.view_mut((at(n), at(n)), (r, r)).copy_from(a);
    let yn_exp = BlockBandOperator::new(h, r, c, expected, BTreeMap::new())?;
    let yn_check = yn.sub(&yn_exp)?.max_block_norm();

    let id = BlockBandOperator::identity(h, r);
    let defect = id.sub(&vn.adjoint().mul(&vn)?)?;
    let mut proj = CMat::zeros(size, size);
    proj.view_mut((at(n), at(n)), (r, r)).copy_from(&identity(r));
    let mut tail = BTreeMap::new();
    tail.insert(0, identity(r));
    let proj = BlockBandOperator::new(h, r, c, proj, tail)?;
    let defect_projection_check = defect.sub(&proj)?.max_block_norm();
    let fund_eq_residual = yn.sub(&proj.mul(&yn)?.mul(&proj)?)?.max_block_norm();

    let (an, inn) = hat_pair(a, n);
    let prod = &an * &inn;
    let an_in_commutator = operator_norm(&(&prod - &inn * &an));
    let mut pattern = CMat::zeros(n * r, n * r);
    for k in 0..n {
        if k + 1 < n {
            pattern.view_mut(((k + 1) * r, k * r), (r, r)).copy_from(a);
        }
        if k + 2 < n {
            pattern.view_mut(((k + 2) * r, k * r), (r, r)).copy_from(&a.adjoint());
        }
    }
    let an_in_pattern = operator_norm(&(prod - pattern));

    Ok(Truncation { n, tn, vn, yn_check, defect_projection_check, fund_eq_residual, an_in_commutator, an_in_pattern })
}

/// The pure Γ-isometry `(T_{F*+Fz}, T_z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzModel {
    pub tphi: BlockBandOperator,
    pub tz: BlockBandOperator,
}

/// `T_{F* + Fz}`: `F*` on the diagonal, `F` below it, paired with the shift.
/// Its natural annihilator is `det(F* + z2·F − z1·I)`.
pub fn build_toeplitz_model(f: &CMat) -> Result<ToeplitzModel> {
    crate::numlin::ensure_square(f, "F")?;
    let w = numerical_radius(f)?;
    if w > 1.0 + 1e-8 {
        return Err(Error::Domain(format!("ω(F) = {w:.6} exceeds 1")));
    }
    let d = f.nrows();
    let mut diags = BTreeMap::new();
    diags.insert(0, f.adjoint());
    diags.insert(-1, f.clone());
    Ok(ToeplitzModel { tphi: BlockBandOperator::toeplitz(d, diags)?, tz: BlockBandOperator::shift(d) })
}

/// Largest block of `p(X, Y)`, zero when `p` annihilates the band pair.
pub fn band_annihilation_residual(p: &BiPoly, x: &BlockBandOperator, y: &BlockBandOperator) -> Result<f64> {
    Ok(BlockBandOperator::eval_poly(p, x, y)?.max_block_norm())
}

/// Head-space operator `[[S, 0], [C, D]]` with `D` given as a band operator
/// or a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum TailOperator {
    Band(BlockBandOperator),
    Dense(CMat),
}

impl TailOperator {
    fn as_band(&self) -> Result<BlockBandOperator> {
        match self {
            TailOperator::Band(b) => Ok(b.clone()),
            TailOperator::Dense(m) => BlockBandOperator::from_dense(m.clone(), 0),
        }
    }
}

/// `[[X, 0], [C, D]]` on `H ⊕ K`, merging `H` with the first block of `K`.
fn assemble(x: &CMat, c: &CMat, d: &TailOperator) -> Result<BlockBandOperator> {
    let d = d.as_band()?;
    let h = x.nrows();
    if c.ncols() != h {
        return Err(Error::Dimension(format!("C has {} columns, head space has dimension {h}", c.ncols())));
    }
    let mut blocks = d.corner_blocks();
    while d.section_dim(blocks) < c.nrows() {
        if d.block_dim() == 0 {
            return Err(Error::Dimension(format!("C has {} rows, tail space has dimension {}", c.nrows(), d.head_dim())));
        }
        blocks += 1;
    }
    let d = d.expanded(blocks);
    let m = d.corner().nrows();
    let mut corner = CMat::zeros(h + m, h + m);
    corner.view_mut((0, 0), (h, h)).copy_from(x);
    corner.view_mut((h, 0), (c.nrows(), h)).copy_from(c);
    corner.view_mut((h, h), (m, m)).copy_from(d.corner());
    BlockBandOperator::new(h + d.head_dim(), d.block_dim(), blocks, corner, d.diagonals().clone())
}

/// Head–head, tail–head and head–tail parts of an assembled operator.
fn split_parts(op: &BlockBandOperator, h: usize) -> (CMat, CMat, CMat) {
    let corner = op.corner();
    let m = corner.nrows() - h;
    (
        corner.view((0, 0), (h, h)).into_owned(),
        corner.view((h, 0), (m, h)).into_owned(),
        corner.view((0, h), (h, m)).into_owned(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationEquationResiduals {
    /// Residual of each numbered equation, keyed `eq1` … `eq5`.
    pub equations: BTreeMap<String, f64>,
    /// Checks on the assembled pair.
    pub assembled: BTreeMap<String, f64>,
}

impl DilationEquationResiduals {
    pub fn max(&self) -> f64 {
        self.equations.values().chain(self.assembled.values()).fold(0.0, |a, &b| a.max(b))
    }
}

/// Residuals of
/// (1) `C1P + D1C2 = C2S + D2C1`, (2) `S − S*P = C1*C2`, (3) `C2*D2 = 0`,
/// (4) `C2*C2 = D_P²`, (5) `C1 = D1*C2`, read off the assembled
/// `T = [[S,0],[C1,D1]]`, `V = [[P,0],[C2,D2]]`, together with the
/// Γ-isometry identities of the assembled pair.
pub fn check_gamma_dilation_eqs(
    s: &CMat,
    p: &CMat,
    c1: &CMat,
    c2: &CMat,
    d1: &TailOperator,
    d2: &TailOperator,
) -> Result<DilationEquationResiduals> {
    let h = s.nrows();
    if p.nrows() != h || c1.nrows() != c2.nrows() {
        return Err(Error::Dimension("incompatible block shapes".into()));
    }
    let t = assemble(s, c1, d1)?;
    let v = assemble(p, c2, d2)?;
    if t.head_dim() != v.head_dim() || t.block_dim() != v.block_dim() {
        return Err(Error::Dimension("D1 and D2 act on different spaces".into()));
    }
    let c = t.corner_blocks().max(v.corner_blocks());
    let (t, v) = (t.expanded(c), v.expanded(c));
    let id = BlockBandOperator::identity(t.head_dim(), t.block_dim());

    let comm = t.mul(&v)?.sub(&v.mul(&t)?)?;
    let tsv = t.sub(&t.adjoint().mul(&v)?)?;
    let vv = v.adjoint().mul(&v)?.sub(&id)?;
    let mut equations = BTreeMap::new();
    equations.insert("eq1".to_string(), operator_norm(&split_parts(&comm, h).1));
    equations.insert("eq2".to_string(), operator_norm(&split_parts(&tsv, h).0));
    equations.insert("eq3".to_string(), operator_norm(&split_parts(&vv, h).2));
    equations.insert("eq4".to_string(), operator_norm(&split_parts(&vv, h).0));
    equations.insert("eq5".to_string(), operator_norm(&split_parts(&tsv, h).1));
    let mut assembled = BTreeMap::new();
    assembled.insert("t_star_v_minus_t".to_string(), tsv.max_block_norm());
    assembled.insert("v_star_v_minus_i".to_string(), vv.max_block_norm());
    assembled.insert("tv_minus_vt".to_string(), comm.max_block_norm());
    Ok(DilationEquationResiduals { equations, assembled })
}

/// Residuals of (1) `C1T2 + D1C2 = C2T1 + D2C1`, (2) `C1*D1 = C2*D2 = 0`,
/// (3) `Ci*Ci = D_{Ti}²`, with the commuting-isometry checks on
/// `Vi = [[Ti,0],[Ci,Di]]`.
pub fn check_toral_dilation_eqs(
    t1: &CMat,
    t2: &CMat,
    c1: &CMat,
    c2: &CMat,
    d1: &TailOperator,
    d2: &TailOperator,
) -> Result<DilationEquationResiduals> {
    let h = t1.nrows();
    if t2.nrows() != h || c1.nrows() != c2.nrows() {
        return Err(Error::Dimension("incompatible block shapes".into()));
    }
    let v1 = assemble(t1, c1, d1)?;
    let v2 = assemble(t2, c2, d2)?;
    if v1.head_dim() != v2.head_dim() || v1.block_dim() != v2.block_dim() {
        return Err(Error::Dimension("D1 and D2 act on different spaces".into()));
    }
    let c = v1.corner_blocks().max(v2.corner_blocks());
    let (v1, v2) = (v1.expanded(c), v2.expanded(c));
    let id = BlockBandOperator::identity(v1.head_dim(), v1.block_dim());
    let comm = v1.mul(&v2)?.sub(&v2.mul(&v1)?)?;
    let g1 = v1.adjoint().mul(&v1)?.sub(&id)?;
    let g2 = v2.adjoint().mul(&v2)?.sub(&id)?;
    let mut equations = BTreeMap::new();
    equations.insert("eq1".to_string(), operator_norm(&split_parts(&comm, h).1));
    equations.insert(
        "eq2".to_string(),
        operator_norm(&split_parts(&g1, h).2).max(operator_norm(&split_parts(&g2, h).2)),
    );
    equations.insert(
        "eq3".to_string(),
        operator_norm(&split_parts(&g1, h).0).max(operator_norm(&split_parts(&g2, h).0)),
    );
    let mut assembled = BTreeMap::new();
    assembled.insert("v1v2_minus_v2v1".to_string(), comm.max_block_norm());
    assembled.insert("v1_star_v1_minus_i".to_string(), g1.max_block_norm());
    assembled.insert("v2_star_v2_minus_i".to_string(), g2.max_block_norm());
    Ok(DilationEquationResiduals { equations, assembled })
}

/// Blocks `(C1, C2, D1, D2)` of `(T_A, V_0)` relative to `H ⊕ ℓ²(D_P)`.
pub fn dilation_blocks(bundle: &DilationBundle) -> Result<(CMat, CMat, TailOperator, TailOperator)> {
    let a = &bundle.fundamental;
    let r = a.nrows();
    let c1 = a.adjoint() * &bundle.defect_map;
    let c2 = bundle.defect_map.clone();
    let mut d1 = BTreeMap::new();
    d1.insert(0, a.clone());
    d1.insert(-1, a.adjoint());
    let d1 = BlockBandOperator::toeplitz(r, d1)?;
    let d2 = BlockBandOperator::shift(r);
    Ok((c1, c2, TailOperator::Band(d1), TailOperator::Band(d2)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixResiduals {
    /// `S² − 4P − Δ²`
    pub square_identity: f64,
    /// `SΔ − ΔS`
    pub commutation: f64,
    /// `(S + Δ)*(S + Δ) − 4I`
    pub plus_isometry: f64,
    /// `(S − Δ)*(S − Δ) − 4I`
    pub minus_isometry: f64,
    /// `A² − E`, `A*² − E`, `A*A + AA* + 2E − 4I`
    pub prerequisites: BTreeMap<String, f64>,
}

/// With `S = T_{A + A*z}`, `P = T_z` and `Δ = T_{E − Ez}`, the residuals of
/// `S² − 4P = Δ²`, `SΔ = ΔS` and `(S ± Δ)*(S ± Δ) = 4I`.
pub fn appendix_identities(a: &CMat, e: &CMat) -> Result<AppendixResiduals> {
    crate::numlin::ensure_square(a, "A")?;
    if e.shape() != a.shape() {
        return Err(Error::Dimension("A and E differ in size".into()));
    }
    let d = a.nrows();
    let mut sd = BTreeMap::new();
    sd.insert(0, a.clone());
    sd.insert(-1, a.adjoint());
    let s = BlockBandOperator::toeplitz(d, sd)?;
    let p = BlockBandOperator::shift(d);
    let mut dd = BTreeMap::new();
    dd.insert(0, e.clone());
    dd.insert(-1, -e);
    let delta = BlockBandOperator::toeplitz(d, dd)?;
    let four = BlockBandOperator::identity(d, d).scale(C64::from(4.0));

    let lhs = s.mul(&s)?.sub(&p.scale(C64::from(4.0)))?;
    let square_identity = lhs.sub(&delta.mul(&delta)?)?.max_block_norm();
    let commutation = s.mul(&delta)?.sub(&delta.mul(&s)?)?.max_block_norm();
    let plus = s.add(&delta)?;
    let minus = s.sub(&delta)?;
    let plus_isometry = plus.adjoint().mul(&plus)?.sub(&four)?.max_block_norm();
    let minus_isometry = minus.adjoint().mul(&minus)?.sub(&four)?.max_block_norm();

    let mut prerequisites = BTreeMap::new();
    prerequisites.insert("a_squared_minus_e".to_string(), operator_norm(&(a * a - e)));
    prerequisites.insert("a_star_squared_minus_e".to_string(), operator_norm(&(a.adjoint() * a.adjoint() - e)));
    prerequisites.insert(
        "gram_identity".to_string(),
        operator_norm(&(a.adjoint() * a + a * a.adjoint() + e * C64::from(2.0) - identity(d) * C64::from(4.0))),
    );
    Ok(AppendixResiduals { square_identity, commutation, plus_isometry, minus_isometry, prerequisites })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCertificate {
    /// `max ‖symbol‖` of the Toeplitz tail over the sampled circle.
    pub symbol_bound: f64,
    /// Norms of finite sections; each is a lower bound for the operator norm.
    pub section_norms: Vec<f64>,
    pub monotone: bool,
    pub certified: bool,
}

/// Certifies `‖op‖ ≤ bound` from the tail symbol and finite sections.
pub fn norm_certificate(op: &BlockBandOperator, bound: f64, grid: usize, sections: &[usize]) -> NormCertificate {
    let symbol_bound = (0..grid)
        .map(|k| operator_norm(&op.symbol(C64::from_polar(1.0, TAU * k as f64 / grid as f64))))
        .fold(0.0, f64::max);
    let section_norms: Vec<f64> = sections.iter().map(|&n| operator_norm(&op.section(n))).collect();
    let monotone = section_norms.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let certified =
        symbol_bound <= bound + 1e-6 && monotone && section_norms.iter().all(|&x| x <= bound + 1e-6);
    NormCertificate { symbol_bound, section_norms, monotone, certified }
}

/// Checks on the shift model `(S, P) = (2rW, r²W²)` with `A = (2r/(1 + r²))W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftModelResiduals {
    /// `4P − S²`
    pub royal_annihilation: f64,
    /// `S − S*P − D_P A D_P` with `D_P = (1 − r⁴)^{1/2}`.
    pub fundamental_residual: f64,
    /// `P*P − r⁴I`, which justifies the scalar defect operator.
    pub defect_scalar_check: f64,
}

pub fn shift_model(r: f64) -> Result<ShiftModelResiduals> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("r = {r} must lie in [0, 1)")));
    }
    let w = BlockBandOperator::shift(1);
    let s = w.scale(C64::from(2.0 * r));
    let p = w.mul(&w)?.scale(C64::from(r * r));
    let id = BlockBandOperator::identity(1, 1);
    let royal = BiPoly::from_real(&[(0, 1, 4.0), (2, 0, -1.0)]);
    let royal_annihilation = band_annihilation_residual(&royal, &s, &p)?;
    let defect_scalar_check = p.adjoint().mul(&p)?.sub(&id.scale(C64::from(r.powi(4))))?.max_block_norm();
    let dp = (1.0 - r.powi(4)).sqrt();
    let a = w.scale(C64::from(2.0 * r / (1.0 + r * r)));
    let lhs = s.sub(&s.adjoint().mul(&p)?)?;
    let fundamental_residual = lhs.sub(&a.scale(C64::from(dp * dp)))?.max_block_norm();
    Ok(ShiftModelResiduals { royal_annihilation, fundamental_residual, defect_scalar_check })
}
