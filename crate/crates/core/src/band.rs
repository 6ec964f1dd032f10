//! Eventually-Toeplitz block band operators on `H ⊕ ℓ²(D)`.
//!
//! Block `(i, j)` comes from the dense corner when both indices are below
//! `corner_blocks`, otherwise from the constant diagonal `B_{j−i}`. Block 0
//! has dimension `head_dim`, every later block `block_dim`. Sums, products
//! and adjoints stay in this form, so identities between such operators are
//! finite checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bipoly::BiPoly;
use crate::error::{Error, Result};
use crate::numlin::{identity, matrix_json::MatrixJson, operator_norm, CMat, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct BlockBandOperator {
    head_dim: usize,
    block_dim: usize,
    corner_blocks: usize,
    corner: CMat,
    /// Offset `k` holds the block at position `(i, i + k)`; `−1` is the subdiagonal.
    diagonals: BTreeMap<i64, CMat>,
}

fn corner_size(head: usize, d: usize, c: usize) -> usize {
    head + c.saturating_sub(1) * d
}

impl BlockBandOperator {
    pub fn new(
        head_dim: usize,
        block_dim: usize,
        corner_blocks: usize,
        corner: CMat,
        diagonals: BTreeMap<i64, CMat>,
    ) -> Result<Self> {
        if corner_blocks == 0 {
            return Err(Error::Dimension("corner must hold at least the head block".into()));
        }
        let size = corner_size(head_dim, block_dim, corner_blocks);
        if corner.nrows() != size || corner.ncols() != size {
            return Err(Error::Dimension(format!(
                "corner is {}x{}, expected {size}x{size}",
                corner.nrows(),
                corner.ncols()
            )));
        }
        for (k, b) in &diagonals {
            if b.nrows() != block_dim || b.ncols() != block_dim {
                return Err(Error::Dimension(format!("diagonal {k} is not {block_dim}x{block_dim}")));
            }
        }
        let op = Self { head_dim, block_dim, corner_blocks, corner, diagonals };
        if corner_blocks < 1 + op.width() {
            return Err(Error::Dimension(format!(
                "corner of {corner_blocks} blocks is too small for bandwidth {}",
                op.width()
            )));
        }
        Ok(op)
    }

    /// A finite operator on the head space alone.
    pub fn from_dense(m: CMat, block_dim: usize) -> Result<Self> {
        crate::numlin::ensure_square(&m, "dense block")?;
        Self::new(m.nrows(), block_dim, 1, m, BTreeMap::new())
    }

    /// Pure block Toeplitz operator (`head_dim = block_dim`).
    pub fn toeplitz(block_dim: usize, diagonals: BTreeMap<i64, CMat>) -> Result<Self> {
        let w = diagonals.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
        let probe = Self {
            head_dim: block_dim,
            block_dim,
            corner_blocks: 1,
            corner: CMat::zeros(block_dim, block_dim),
            diagonals,
        };
        let c = 1 + w;
        let mut corner = CMat::zeros(c * block_dim, c * block_dim);
        for i in 0..c {
            for j in 0..c {
                if let Some(b) = probe.diagonals.get(&(j as i64 - i as i64)) {
                    corner.view_mut((i * block_dim, j * block_dim), (block_dim, block_dim)).copy_from(b);
                }
            }
        }
        Self::new(block_dim, block_dim, c, corner, probe.diagonals)
    }

    pub fn identity(head_dim: usize, block_dim: usize) -> Self {
        let mut diagonals = BTreeMap::new();
        diagonals.insert(0, identity(block_dim));
        Self { head_dim, block_dim, corner_blocks: 1, corner: identity(head_dim), diagonals }
    }

    pub fn zero(head_dim: usize, block_dim: usize) -> Self {
        Self { head_dim, block_dim, corner_blocks: 1, corner: CMat::zeros(head_dim, head_dim), diagonals: BTreeMap::new() }
    }

    /// The unilateral block shift `(x0, x1, …) ↦ (0, x0, x1, …)`.
    pub fn shift(block_dim: usize) -> Self {
        let mut diagonals = BTreeMap::new();
        diagonals.insert(-1, identity(block_dim));
        Self::toeplitz(block_dim, diagonals).expect("shift is well formed")
    }

    pub fn head_dim(&self) -> usize {
        self.head_dim
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn corner_blocks(&self) -> usize {
        self.corner_blocks
    }

    pub fn corner(&self) -> &CMat {
        &self.corner
    }

    pub fn diagonals(&self) -> &BTreeMap<i64, CMat> {
        &self.diagonals
    }

    pub fn width(&self) -> usize {
        self.diagonals.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    fn block_range(&self, i: usize) -> (usize, usize) {
        if i == 0 {
            (0, self.head_dim)
        } else {
            (self.head_dim + (i - 1) * self.block_dim, self.block_dim)
        }
    }

    /// Dimension of the first `n` blocks.
    pub fn section_dim(&self, n: usize) -> usize {
        if n == 0 {
            0
        } else {
            corner_size(self.head_dim, self.block_dim, n)
        }
    }

    pub fn block(&self, i: usize, j: usize) -> CMat {
        let (r0, rn) = self.block_range(i);
        let (c0, cn) = self.block_range(j);
        if i < self.corner_blocks && j < self.corner_blocks {
            return self.corner.view((r0, c0), (rn, cn)).into_owned();
        }
        match self.diagonals.get(&(j as i64 - i as i64)) {
            Some(b) => b.clone(),
            None => CMat::zeros(rn, cn),
        }
    }

    pub fn head_block(&self) -> CMat {
        self.block(0, 0)
    }

    /// Same operator with a larger dense corner.
    pub fn expanded(&self, c: usize) -> Self {
        if c <= self.corner_blocks {
            return self.clone();
        }
        let size = corner_size(self.head_dim, self.block_dim, c);
        let mut corner = CMat::zeros(size, size);
        let old = self.corner.nrows();
        corner.view_mut((0, 0), (old, old)).copy_from(&self.corner);
        let d = self.block_dim;
        for i in 0..c {
            for j in 0..c {
                if i < self.corner_blocks && j < self.corner_blocks {
                    continue;
                }
                if let Some(b) = self.diagonals.get(&(j as i64 - i as i64)) {
                    let (r0, _) = self.block_range(i);
                    let (c0, _) = self.block_range(j);
                    corner.view_mut((r0, c0), (d, d)).copy_from(b);
                }
            }
        }
        Self { corner_blocks: c, corner, ..self.clone() }
    }

    /// Dense top-left section of `n` blocks.
    pub fn section(&self, n: usize) -> CMat {
        let size = self.section_dim(n);
        if n <= self.corner_blocks {
            self.corner.view((0, 0), (size, size)).into_owned()
        } else {
            self.expanded(n).corner
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.head_dim != other.head_dim || self.block_dim != other.block_dim {
            return Err(Error::Dimension(format!(
                "band operators on different spaces: ({}, {}) vs ({}, {})",
                self.head_dim, self.block_dim, other.head_dim, other.block_dim
            )));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        self.check_compatible(other)?;
        let c = self.corner_blocks.max(other.corner_blocks);
        let a = self.expanded(c);
        let b = other.expanded(c);
        let corner = &a.corner + &b.corner * C64::from(sign);
        let mut diagonals = a.diagonals.clone();
        for (k, blk) in &b.diagonals {
            let entry = diagonals.entry(*k).or_insert_with(|| CMat::zeros(self.block_dim, self.block_dim));
            *entry += blk * C64::from(sign);
        }
        Ok(Self { corner_blocks: c, corner, diagonals, ..a })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            corner: &self.corner * z,
            diagonals: self.diagonals.iter().map(|(k, b)| (*k, b * z)).collect(),
            ..self.clone()
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            corner: self.corner.adjoint(),
            diagonals: self.diagonals.iter().map(|(k, b)| (-k, b.adjoint())).collect(),
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let (wa, wb) = (self.width(), other.width());
        let c = (self.corner_blocks + wb).max(other.corner_blocks + wa);
        let n = c + wa + wb;
        let prod = self.section(n) * other.section(n);
        let size = corner_size(self.head_dim, self.block_dim, c);
        let corner = prod.view((0, 0), (size, size)).into_owned();
        let mut diagonals: BTreeMap<i64, CMat> = BTreeMap::new();
        for (ka, a) in &self.diagonals {
            for (kb, b) in &other.diagonals {
                let entry =
                    diagonals.entry(ka + kb).or_insert_with(|| CMat::zeros(self.block_dim, self.block_dim));
                *entry += a * b;
            }
        }
        Ok(Self { head_dim: self.head_dim, block_dim: self.block_dim, corner_blocks: c, corner, diagonals })
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.head_dim, self.block_dim);
        for _ in 0..k {
            out = out.mul(self).expect("same space");
        }
        out
    }

    /// Drops diagonals whose entries are all below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let diagonals = self
            .diagonals
            .iter()
            .filter(|(_, b)| b.iter().any(|z| z.norm() > tol))
            .map(|(k, b)| (*k, b.clone()))
            .collect();
        Self { diagonals, ..self.clone() }
    }

    /// Largest operator norm over stored blocks: the corner blocks and the
    /// diagonal blocks. Zero exactly when the operator is zero.
    pub fn max_block_norm(&self) -> f64 {
        let mut out: f64 = 0.0;
        for i in 0..self.corner_blocks {
            for j in 0..self.corner_blocks {
                out = out.max(operator_norm(&self.block(i, j)));
            }
        }
        for b in self.diagonals.values() {
            out = out.max(operator_norm(b));
        }
        out
    }

    /// Equality within `1e-11` relative to the operands' block norms.
    pub fn approx_eq(&self, other: &Self) -> bool {
        match self.sub(other) {
            Ok(d) => d.max_block_norm() <= 1e-11 * self.max_block_norm().max(other.max_block_norm()).max(1.0),
            Err(_) => false,
        }
    }

    /// Image of a finitely supported vector given on the first blocks; the
    /// result covers the blocks it can reach.
    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        let mut m = 1;
        while self.section_dim(m) < x.nrows() {
            m += 1;
        }
        if self.section_dim(m) != x.nrows() {
            return Err(Error::Dimension("vector does not end on a block boundary".into()));
        }
        let n = m.max(self.corner_blocks) + self.width();
        let mut padded = CMat::zeros(self.section_dim(n), x.ncols());
        padded.view_mut((0, 0), (x.nrows(), x.ncols())).copy_from(x);
        Ok(self.section(n) * padded)
    }

    /// `Σ c_ij X^i Y^j` for commuting band operators.
    pub fn eval_poly(p: &BiPoly, x: &Self, y: &Self) -> Result<Self> {
        x.check_compatible(y)?;
        let mut xp = vec![Self::identity(x.head_dim, x.block_dim)];
        for i in 1..=p.deg_z1() as usize {
            xp.push(xp[i - 1].mul(x)?);
        }
        let mut yp = vec![Self::identity(x.head_dim, x.block_dim)];
        for j in 1..=p.deg_z2() as usize {
            yp.push(yp[j - 1].mul(y)?);
        }
        let mut acc = Self::zero(x.head_dim, x.block_dim);
        for (i, j, z) in p.terms() {
            acc = acc.add(&xp[i as usize].mul(&yp[j as usize])?.scale(z))?;
        }
        Ok(acc)
    }

    /// Symbol `Σ_k B_k z^{−k}` of the Toeplitz tail at a point of the circle.
    pub fn symbol(&self, z: C64) -> CMat {
        let mut out = CMat::zeros(self.block_dim, self.block_dim);
        for (k, b) in &self.diagonals {
            out += b * z.powi(-*k as i32);
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct DiagonalJson {
    offset: i64,
    block: MatrixJson,
}

#[derive(Serialize, Deserialize)]
struct BandJson {
    head_dim: usize,
    block_dim: usize,
    corner_blocks: usize,
    corner: MatrixJson,
    diagonals: Vec<DiagonalJson>,
}

impl Serialize for BlockBandOperator {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        BandJson {
            head_dim: self.head_dim,
            block_dim: self.block_dim,
            corner_blocks: self.corner_blocks,
            corner: MatrixJson::from(&self.corner),
            diagonals: self
                .diagonals
                .iter()
                .map(|(k, b)| DiagonalJson { offset: *k, block: MatrixJson::from(b) })
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for BlockBandOperator {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = BandJson::deserialize(de)?;
        let corner = raw.corner.to_matrix().map_err(D::Error::custom)?;
        let mut diagonals = BTreeMap::new();
        for d in raw.diagonals {
            let b = d.block.to_matrix().map_err(D::Error::custom)?;
            if let Some(prev) = diagonals.insert(d.offset, b) {
                let _ = prev;
                return Err(D::Error::custom(format!("duplicate diagonal offset {}", d.offset)));
            }
        }
        Self::new(raw.head_dim, raw.block_dim, raw.corner_blocks, corner, diagonals)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::{c, rmat};

    fn sample() -> BlockBandOperator {
        let mut diags = BTreeMap::new();
        diags.insert(0, rmat(2, 2, &[1.0, 2.0, 0.0, 1.0]));
        diags.insert(-1, rmat(2, 2, &[0.0, 1.0, 3.0, 0.0]));
        let t = BlockBandOperator::toeplitz(2, diags).unwrap();
        let mut corner = t.corner().clone();
        corner[(0, 1)] = c(5.0, 1.0);
        BlockBandOperator::new(2, 2, t.corner_blocks(), corner, t.diagonals().clone()).unwrap()
    }

    #[test]
    fn shift_is_an_isometry() {
        let e = BlockBandOperator::shift(3);
        let ee = e.adjoint().mul(&e).unwrap();
        assert!(ee.approx_eq(&BlockBandOperator::identity(3, 3)));
        let e_e = e.mul(&e.adjoint()).unwrap();
        assert!(!e_e.approx_eq(&BlockBandOperator::identity(3, 3)));
    }

    #[test]
    fn algebra_laws() {
        let a = sample();
        let b = BlockBandOperator::shift(2).scale(c(0.0, 2.0));
        assert_eq!(a.adjoint().adjoint(), a);
        assert!(a.add(&b).unwrap().sub(&b).unwrap().approx_eq(&a));
        // products agree with dense sections away from the truncation edge
        let ab = a.mul(&b).unwrap();
        let dense = a.section(8) * b.section(8);
        assert!((ab.section(6) - dense.view((0, 0), (12, 12))).norm() < 1e-12);
    }

    #[test]
    fn mismatched_spaces_rejected() {
        assert!(BlockBandOperator::shift(2).mul(&BlockBandOperator::shift(3)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let a = sample();
        let s = serde_json::to_string(&a).unwrap();
        let back: BlockBandOperator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
    }
}
