//! Sparse complex matrices over Fock bases.
//!
//! Row-major storage with ordered column maps keeps assembly deterministic:
//! identical inputs produce identical entry iteration order, which the CLI
//! relies on for byte-reproducible reports. Dimensions here are desk scale
//! (≤ a few 10⁴), so the representation favours clarity over peak speed.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Sparse matrix of a second-quantized operator.
///
/// Entry `(r, c)` is the matrix element ⟨r|A|c⟩ in the ordered basis the
/// operator was assembled over. Most operators are square; the excitation
/// unitary U_N is the one rectangular citizen.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    rows: Vec<BTreeMap<usize, C64>>,
    hermitian_hint: bool,
}

impl SparseOperator {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: vec![BTreeMap::new(); nrows],
            hermitian_hint: false,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim, dim);
        for i in 0..dim {
            op.rows[i].insert(i, C64::new(1.0, 0.0));
        }
        op.hermitian_hint = true;
        op
    }

    /// Diagonal operator from real values.
    pub fn diagonal(values: &[f64]) -> Self {
        let mut op = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            if v != 0.0 {
                op.rows[i].insert(i, C64::new(v, 0.0));
            }
        }
        op.hermitian_hint = true;
        op
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn set_hermitian_hint(&mut self, hint: bool) {
        self.hermitian_hint = hint;
    }

    /// Accumulate `value` into entry (r, c).
    pub fn add_entry(&mut self, r: usize, c: usize, value: C64) {
        assert!(r < self.nrows && c < self.ncols, "entry out of bounds");
        if value == C64::new(0.0, 0.0) {
            return;
        }
        let slot = self.rows[r].entry(c).or_insert(C64::new(0.0, 0.0));
        *slot += value;
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.rows[r]
            .get(&c)
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Drop entries with |z| below `tol` (exact zeros accumulate during
    /// assembly cancellation).
    pub fn prune(&mut self, tol: f64) {
        for row in &mut self.rows {
            row.retain(|_, v| v.norm() > tol);
        }
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(&c, &v)| (r, c, v)))
    }

    pub fn matvec(&self, v: &DVector<C64>) -> DVector<C64> {
        assert_eq!(v.len(), self.ncols, "matvec dimension mismatch");
        let mut out = DVector::from_element(self.nrows, C64::new(0.0, 0.0));
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (&c, &a) in row {
                acc += a * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.ncols, self.nrows);
        for (r, c, v) in self.iter_entries() {
            out.add_entry(c, r, v.conj());
        }
        out.hermitian_hint = self.hermitian_hint;
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            for v in row.values_mut() {
                *v *= s;
            }
        }
        out.hermitian_hint = self.hermitian_hint && s.im == 0.0;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(
            (self.nrows, self.ncols),
            (other.nrows, other.ncols),
            "add dimension mismatch"
        );
        let mut out = self.clone();
        for (r, c, v) in other.iter_entries() {
            out.add_entry(r, c, v);
        }
        out.hermitian_hint = self.hermitian_hint && other.hermitian_hint;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "mul dimension mismatch");
        let mut out = Self::zeros(self.nrows, other.ncols);
        for (r, row) in self.rows.iter().enumerate() {
            for (&k, &a) in row {
                for (&c, &b) in &other.rows[k] {
                    out.add_entry(r, c, a * b);
                }
            }
        }
        out
    }

    /// A·B − B·A.
    pub fn commutator(a: &Self, b: &Self) -> Self {
        a.mul(b).sub(&b.mul(a))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, C64::new(0.0, 0.0));
        for (r, c, v) in self.iter_entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn from_dense(m: &DMatrix<C64>, drop_tol: f64) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)].norm() > drop_tol {
                    out.rows[r].insert(c, m[(r, c)]);
                }
            }
        }
        out
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.iter_entries()
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.iter_entries()
            .map(|(_, _, v)| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Max-entry norm of A − A†. Zero for an exactly Hermitian assembly.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let adj = self.adjoint();
        self.sub(&adj).max_abs_entry()
    }

    /// Principal submatrix over the given (strictly increasing) index set.
    /// Used to restrict number-conserving operators to a particle sector.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let pos: BTreeMap<usize, usize> = indices.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut out = Self::zeros(indices.len(), indices.len());
        for (p, &i) in indices.iter().enumerate() {
            for (&c, &v) in &self.rows[i] {
                if let Some(&q) = pos.get(&c) {
                    out.rows[p].insert(q, v);
                }
            }
        }
        out.hermitian_hint = self.hermitian_hint;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let mut a = SparseOperator::zeros(2, 3);
        a.add_entry(0, 2, z(1.0, 2.0));
        a.add_entry(1, 0, z(-3.0, 0.5));
        let adj = a.adjoint();
        assert_eq!(adj.nrows(), 3);
        assert_eq!(adj.get(2, 0), z(1.0, -2.0));
        assert_eq!(adj.get(0, 1), z(-3.0, -0.5));
    }

    #[test]
    fn mul_matches_dense() {
        let mut a = SparseOperator::zeros(3, 3);
        a.add_entry(0, 1, z(1.0, 0.0));
        a.add_entry(1, 2, z(0.0, 1.0));
        a.add_entry(2, 0, z(2.0, -1.0));
        let mut b = SparseOperator::zeros(3, 3);
        b.add_entry(1, 1, z(4.0, 0.0));
        b.add_entry(2, 0, z(1.0, 1.0));
        let prod = a.mul(&b).to_dense();
        let dense = a.to_dense() * b.to_dense();
        assert!((prod - dense).norm() < 1e-14);
    }

    #[test]
    fn restrict_takes_principal_block() {
        let mut a = SparseOperator::zeros(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                a.add_entry(r, c, z((10 * r + c) as f64, 0.0));
            }
        }
        let sub = a.restrict(&[1, 3]);
        assert_eq!(sub.get(0, 0), z(11.0, 0.0));
        assert_eq!(sub.get(0, 1), z(13.0, 0.0));
        assert_eq!(sub.get(1, 0), z(31.0, 0.0));
        assert_eq!(sub.get(1, 1), z(33.0, 0.0));
    }

    #[test]
    fn hermiticity_defect_detects_asymmetry() {
        let mut a = SparseOperator::zeros(2, 2);
        a.add_entry(0, 1, z(1.0, 1.0));
        a.add_entry(1, 0, z(1.0, -1.0));
        assert!(a.hermiticity_defect() < 1e-15);
        a.add_entry(0, 1, z(0.5, 0.0));
        assert!((a.hermiticity_defect() - 0.5).abs() < 1e-15);
    }
}
