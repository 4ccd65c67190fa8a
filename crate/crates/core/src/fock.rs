//! Truncated bosonic Fock spaces in occupation-number representation.
//!
//! A [`FockBasis`] enumerates all occupation vectors (m₀, …, m_{M−1}) with
//! Σmᵢ ≤ n in lexicographic order. Mode 0 is the condensate mode by
//! convention; `restrict_to_excitations` pins m₀ = 0 and models the
//! excitation space F^{≤n}_{⊥φ}.
//!
//! Operators:
//! - `creation`/`annihilation`: standard a†, a with √(m+1) elements;
//!   transitions leaving the truncation are dropped (projection P·A·P).
//! - `modified_b`: b = √((N−𝒩)/N)·a with 𝒩 evaluated after annihilation,
//!   so that b† transitions vanish smoothly at the truncation edge when the
//!   basis cap equals N. The CCR pick up the exact 1/N corrections
//!   [b_p, b†_q] = δ_pq(1 − 𝒩/N) − a†_q a_p/N on all of F^{≤N}.
//! - `excitation_unitary`: the map U_N sending an n-particle vector to its
//!   fluctuation vector (ξ₀, …, ξ_n) around the pure condensate; on
//!   occupation states it is the relabeling |m₀, m_⊥⟩ ↦ |m_⊥⟩.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::linalg;
use crate::sparse::SparseOperator;
use crate::{C64, CoreError};

pub const DEFAULT_DIMENSION_CAP: u128 = 1_000_000;

/// Enumerated occupation-number basis of a truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockBasis {
    num_modes: usize,
    max_particles: usize,
    restrict_to_excitations: bool,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

/// Stars-and-bars count of occupation vectors over `modes` with total ≤ n.
/// Equals C(modes + n, n).
pub fn basis_dimension(modes: usize, max_particles: usize) -> u128 {
    let (a, b) = (modes as u128, max_particles as u128);
    let k = a.min(b);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (a + b - k + i) / i;
    }
    acc
}

pub fn build_basis(
    num_modes: usize,
    max_particles: usize,
    restrict_to_excitations: bool,
) -> Result<FockBasis, CoreError> {
    build_basis_with_cap(
        num_modes,
        max_particles,
        restrict_to_excitations,
        DEFAULT_DIMENSION_CAP,
    )
}

pub fn build_basis_with_cap(
    num_modes: usize,
    max_particles: usize,
    restrict_to_excitations: bool,
    cap: u128,
) -> Result<FockBasis, CoreError> {
    assert!(num_modes >= 1, "need at least one mode");
    let free_modes = if restrict_to_excitations {
        num_modes - 1
    } else {
        num_modes
    };
    let dim = basis_dimension(free_modes, max_particles);
    if dim > cap {
        return Err(CoreError::DimensionOverflow { dim, cap });
    }

    let mut states = Vec::with_capacity(dim as usize);
    let mut current = vec![0u32; num_modes];
    let first_mode = usize::from(restrict_to_excitations);
    enumerate(&mut current, first_mode, max_particles as u32, &mut states);
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(FockBasis {
        num_modes,
        max_particles,
        restrict_to_excitations,
        states,
        index,
    })
}

fn enumerate(current: &mut Vec<u32>, mode: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
    if mode == current.len() {
        out.push(current.clone());
        return;
    }
    for m in 0..=budget {
        current[mode] = m;
        enumerate(current, mode + 1, budget - m, out);
    }
    current[mode] = 0;
}

impl FockBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn max_particles(&self) -> usize {
        self.max_particles
    }

    pub fn restricts_to_excitations(&self) -> bool {
        self.restrict_to_excitations
    }

    pub fn state(&self, k: usize) -> &[u32] {
        &self.states[k]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u32]> {
        self.states.iter().map(|s| s.as_slice())
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn total_occupation(&self, k: usize) -> u32 {
        self.states[k].iter().sum()
    }

    /// Indices of the states with total occupation exactly `total`,
    /// in basis order.
    pub fn sector_indices(&self, total: usize) -> Vec<usize> {
        (0..self.dim())
            .filter(|&k| self.total_occupation(k) as usize == total)
            .collect()
    }

    fn check_mode(&self, mode: usize) -> Result<(), CoreError> {
        if mode >= self.num_modes {
            return Err(CoreError::InvalidMode {
                mode,
                num_modes: self.num_modes,
            });
        }
        Ok(())
    }
}

/// a†(mode): matrix elements √(m+1); transitions that would exceed the
/// particle cap (or repopulate the condensate slot of a restricted basis)
/// are dropped.
pub fn creation(basis: &FockBasis, mode: usize) -> Result<SparseOperator, CoreError> {
    basis.check_mode(mode)?;
    let mut op = SparseOperator::zeros(basis.dim(), basis.dim());
    for (col, state) in basis.states.iter().enumerate() {
        let total: u32 = state.iter().sum();
        if total as usize + 1 > basis.max_particles {
            continue;
        }
        let mut target = state.clone();
        target[mode] += 1;
        if let Some(row) = basis.index_of(&target) {
            let m = state[mode] as f64;
            op.add_entry(row, col, C64::new((m + 1.0).sqrt(), 0.0));
        }
    }
    Ok(op)
}

/// a(mode) = a†(mode)†.
pub fn annihilation(basis: &FockBasis, mode: usize) -> Result<SparseOperator, CoreError> {
    Ok(creation(basis, mode)?.adjoint())
}

/// Modified creation operator b†(mode) = a†(mode)·√((N−𝒩)/N) on F^{≤n}.
/// Requires total_N ≥ n so the weight stays real; when total_N = n the
/// weight vanishes exactly at the truncation edge and the modified CCR hold
/// as matrix identities everywhere.
pub fn modified_bdag(
    basis: &FockBasis,
    mode: usize,
    total_n: usize,
) -> Result<SparseOperator, CoreError> {
    basis.check_mode(mode)?;
    if total_n < basis.max_particles {
        return Err(CoreError::TotalBelowCap {
            total_n,
            cap: basis.max_particles,
        });
    }
    let n = total_n as f64;
    let mut op = SparseOperator::zeros(basis.dim(), basis.dim());
    for (col, state) in basis.states.iter().enumerate() {
        let total: u32 = state.iter().sum();
        if total as usize + 1 > basis.max_particles {
            continue;
        }
        let mut target = state.clone();
        target[mode] += 1;
        if let Some(row) = basis.index_of(&target) {
            let m = state[mode] as f64;
            let weight = ((n - total as f64) / n).sqrt();
            op.add_entry(row, col, C64::new((m + 1.0).sqrt() * weight, 0.0));
        }
    }
    Ok(op)
}

/// b(mode) = √((N−𝒩)/N)·a(mode), the adjoint of `modified_bdag`.
pub fn modified_b(
    basis: &FockBasis,
    mode: usize,
    total_n: usize,
) -> Result<SparseOperator, CoreError> {
    Ok(modified_bdag(basis, mode, total_n)?.adjoint())
}

/// Diagonal operator counting occupation over `modes`
/// (default: every non-condensate mode, i.e. modes 1..M).
pub fn number_operator(basis: &FockBasis, modes: Option<&[usize]>) -> SparseOperator {
    let default: Vec<usize> = (1..basis.num_modes).collect();
    let selected = modes.unwrap_or(&default);
    let values: Vec<f64> = basis
        .states
        .iter()
        .map(|s| selected.iter().map(|&m| s[m] as f64).sum())
        .collect();
    SparseOperator::diagonal(&values)
}

/// Diagonal of the number operator as plain counts, convenient for building
/// e^{κ𝒩} without matrix machinery.
pub fn number_diagonal(basis: &FockBasis, modes: Option<&[usize]>) -> Vec<f64> {
    let default: Vec<usize> = (1..basis.num_modes).collect();
    let selected = modes.unwrap_or(&default);
    basis
        .states
        .iter()
        .map(|s| selected.iter().map(|&m| s[m] as f64).sum())
        .collect()
}

/// e^{κ𝒩} over the given mode subset, assembled exactly as a diagonal.
pub fn exp_kappa_number(basis: &FockBasis, kappa: f64, modes: Option<&[usize]>) -> SparseOperator {
    let values: Vec<f64> = number_diagonal(basis, modes)
        .iter()
        .map(|&n| (kappa * n).exp())
        .collect();
    SparseOperator::diagonal(&values)
}

/// Linear combination Σ_p coeff_p · op_p of per-mode ladder operators.
/// For b(f) pass annihilators and conjugated coefficients f̄_p.
pub fn mode_combination(ops: &[SparseOperator], coeffs: &[C64]) -> SparseOperator {
    assert_eq!(ops.len(), coeffs.len());
    assert!(!ops.is_empty());
    let mut out = SparseOperator::zeros(ops[0].nrows(), ops[0].ncols());
    for (op, &c) in ops.iter().zip(coeffs) {
        if c != C64::new(0.0, 0.0) {
            out = out.add(&op.scale(c));
        }
    }
    out
}

/// Excitation vector (ξ₀, …, ξ_n): `components[j]` holds the coefficients of
/// the j-excitation sector, ordered by the lexicographic restricted basis.
#[derive(Debug, Clone)]
pub struct ExcitationVector {
    pub components: Vec<Vec<C64>>,
    pub normalized_input: bool,
}

impl ExcitationVector {
    pub fn sector_norms(&self) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Total index of a first-quantized tensor entry: particle slots are base-M
/// digits, slot 0 most significant.
fn tensor_index(modes: &[usize], num_modes: usize) -> usize {
    modes.iter().fold(0, |acc, &m| acc * num_modes + m)
}

/// U_N applied to a symmetric n-particle wave function given as a full
/// first-quantized tensor ψ ∈ (C^M)^{⊗n} (length M^n, slot 0 most
/// significant). Rejects tensors that are not exchange-symmetric; warns on
/// non-normalized input and proceeds.
pub fn excitation_map(
    psi: &[C64],
    num_modes: usize,
    n_particles: usize,
    condensate_mode: usize,
) -> Result<ExcitationVector, CoreError> {
    let expected = num_modes.pow(n_particles as u32);
    if psi.len() != expected {
        return Err(CoreError::DimensionMismatch {
            context: format!(
                "tensor length {} but M^n = {}^{} = {}",
                psi.len(),
                num_modes,
                n_particles,
                expected
            ),
        });
    }
    if condensate_mode >= num_modes {
        return Err(CoreError::InvalidMode {
            mode: condensate_mode,
            num_modes,
        });
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    // symmetry check: adjacent transpositions generate S_n
    let mut deviation: f64 = 0.0;
    let mut slots = vec![0usize; n_particles];
    for flat in 0..expected {
        let mut rem = flat;
        for s in (0..n_particles).rev() {
            slots[s] = rem % num_modes;
            rem /= num_modes;
        }
        for s in 0..n_particles.saturating_sub(1) {
            if slots[s] == slots[s + 1] {
                continue;
            }
            slots.swap(s, s + 1);
            let swapped = tensor_index(&slots, num_modes);
            slots.swap(s, s + 1);
            deviation = deviation.max((psi[flat] - psi[swapped]).norm());
        }
    }
    if deviation > 1e-8 * norm.max(1.0) {
        return Err(CoreError::AsymmetricInput { deviation });
    }

    let normalized = (norm - 1.0).abs() <= 1e-10;
    if !normalized {
        eprintln!(
            "warning: excitation_map input has norm {norm:.6e}, proceeding without renormalizing"
        );
    }

    // occupation coefficient: c_m = √(n!/∏m_i!) · ψ(representative sequence),
    // computed as the sum over distinct arrangements divided by the √ count
    // for robustness against the tiny residual asymmetry tolerated above.
    let full = build_basis(num_modes, n_particles, false)?;
    let sector = full.sector_indices(n_particles);
    let mut occ_coeff: HashMap<Vec<u32>, C64> = HashMap::new();
    for &k in &sector {
        occ_coeff.insert(full.state(k).to_vec(), C64::new(0.0, 0.0));
    }
    let mut slots = vec![0usize; n_particles];
    for (flat, &amplitude) in psi.iter().enumerate() {
        let mut rem = flat;
        for s in (0..n_particles).rev() {
            slots[s] = rem % num_modes;
            rem /= num_modes;
        }
        let mut occ = vec![0u32; num_modes];
        for &s in &slots {
            occ[s] += 1;
        }
        *occ_coeff.get_mut(&occ).unwrap() += amplitude;
    }

    // per-sector output on the restricted basis ordering, relabeling the
    // condensate occupation away: |m_c = n−j, m_⊥⟩ ↦ |m_⊥⟩
    let restricted = build_basis(num_modes, n_particles, true)?;
    let mut components: Vec<Vec<C64>> = Vec::with_capacity(n_particles + 1);
    for j in 0..=n_particles {
        let sector_j = restricted.sector_indices(j);
        let mut comp = vec![C64::new(0.0, 0.0); sector_j.len()];
        for (pos, &k) in sector_j.iter().enumerate() {
            let mut occ = restricted.state(k).to_vec();
            // map back: condensate slot carries n−j particles; if the caller
            // placed the condensate on a mode other than 0, swap labels
            if condensate_mode == 0 {
                occ[0] = (n_particles - j) as u32;
            } else {
                occ[0] = occ[condensate_mode];
                occ[condensate_mode] = (n_particles - j) as u32;
            }
            let raw = occ_coeff[&occ];
            let arrangements = multinomial(n_particles as u32, &occ);
            comp[pos] = raw / C64::new(arrangements.sqrt(), 0.0);
        }
        components.push(comp);
    }
    Ok(ExcitationVector {
        components,
        normalized_input: normalized,
    })
}

/// n!/∏ mᵢ! as f64 (number of distinct arrangements of an occupation vector).
fn multinomial(n: u32, occ: &[u32]) -> f64 {
    let mut value = 1.0f64;
    let mut used = 0u32;
    for &m in occ {
        for k in 1..=m {
            used += 1;
            value *= used as f64 / k as f64;
        }
    }
    debug_assert_eq!(used, n);
    value
}

/// The excitation map as an explicit sparse matrix from the n-particle
/// sector of `full` (columns, in sector order) onto the restricted basis
/// (rows). On occupation states it is a relabeling, hence a 0/1 matrix; the
/// conjugation rules U a†(φ)a(φ) U† = N − 𝒩 etc. become exact matrix
/// identities.
pub fn excitation_unitary(
    full: &FockBasis,
    restricted: &FockBasis,
    n_particles: usize,
) -> Result<SparseOperator, CoreError> {
    if full.num_modes() != restricted.num_modes()
        || full.restricts_to_excitations()
        || !restricted.restricts_to_excitations()
    {
        return Err(CoreError::DimensionMismatch {
            context: "excitation_unitary needs matching unrestricted/restricted bases".into(),
        });
    }
    if n_particles > full.max_particles() || n_particles > restricted.max_particles() {
        return Err(CoreError::DimensionMismatch {
            context: "particle number exceeds basis caps".into(),
        });
    }
    let sector = full.sector_indices(n_particles);
    let mut u = SparseOperator::zeros(restricted.dim(), sector.len());
    for (col, &k) in sector.iter().enumerate() {
        let mut occ = full.state(k).to_vec();
        occ[0] = 0;
        let row = restricted
            .index_of(&occ)
            .expect("relabeled state must exist in the restricted basis");
        u.add_entry(row, col, C64::new(1.0, 0.0));
    }
    Ok(u)
}

/// Scalar functions applicable through `apply_matrix_function`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarFunction {
    /// f(A)v = e^A v in one Krylov projection (dense below the threshold).
    Exp,
    /// e^A v by substepping e^{A/s} s times, for operators with large norm.
    ExpScaled,
}

pub const DENSE_THRESHOLD: usize = 500;

/// f(A)·v with an a-posteriori accuracy guarantee: exact dense evaluation for
/// dim ≤ 500, Krylov iteration with residual estimate below `tolerance`
/// otherwise.
pub fn apply_matrix_function(
    a: &SparseOperator,
    f: ScalarFunction,
    v: &DVector<C64>,
    tolerance: f64,
) -> Result<DVector<C64>, CoreError> {
    assert!(a.is_square(), "matrix function needs a square operator");
    assert!(tolerance > 0.0, "tolerance must be positive");
    if a.nrows() != v.len() {
        return Err(CoreError::DimensionMismatch {
            context: format!("operator dim {} vs vector dim {}", a.nrows(), v.len()),
        });
    }
    let dim = a.nrows();
    if dim <= DENSE_THRESHOLD {
        let e = linalg::expm_dense(&a.to_dense());
        return Ok(&e * v);
    }
    let max_dim = 400.min(dim);
    match f {
        ScalarFunction::Exp => linalg::krylov_expm_multiply(|x| a.matvec(x), v, tolerance, max_dim),
        ScalarFunction::ExpScaled => {
            // substep so each factor has modest norm
            let scale = a.max_abs_entry().max(1.0);
            let steps = scale.ceil() as usize;
            let factor = C64::new(1.0 / steps as f64, 0.0);
            let scaled = a.scale(factor);
            let mut current = v.clone();
            for _ in 0..steps {
                current = linalg::krylov_expm_multiply(
                    |x| scaled.matvec(x),
                    &current,
                    tolerance / steps as f64,
                    max_dim,
                )?;
            }
            Ok(current)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dimension_matches_brute_force_enumeration() {
        // brute-force oracle: count occupation vectors directly
        fn rec(mode: usize, used: u32, modes: usize, n: u32, count: &mut usize) {
            if mode == modes {
                *count += 1;
                return;
            }
            for m in 0..=(n - used) {
                rec(mode + 1, used + m, modes, n, count);
            }
        }
        let brute = |modes: usize, n: u32| -> usize {
            let mut count = 0usize;
            rec(0, 0, modes, n, &mut count);
            count
        };
        for (modes, n) in [(3usize, 3u32), (1, 0), (5, 2), (4, 6)] {
            let b = build_basis(modes, n as usize, false).unwrap();
            assert_eq!(b.dim(), brute(modes, n));
            assert_eq!(b.dim() as u128, basis_dimension(modes, n as usize));
        }
    }

    #[test]
    fn frozen_dimensions_from_enumeration() {
        assert_eq!(build_basis(3, 3, false).unwrap().dim(), 20);
        assert_eq!(build_basis(1, 0, false).unwrap().dim(), 1);
        assert_eq!(build_basis(5, 2, false).unwrap().dim(), 21);
    }

    #[test]
    fn index_round_trips_and_lexicographic_order() {
        let b = build_basis(3, 4, false).unwrap();
        for k in 0..b.dim() {
            assert_eq!(b.index_of(b.state(k)), Some(k));
        }
        for k in 1..b.dim() {
            assert!(b.state(k - 1) < b.state(k), "states must be lexicographic");
        }
    }

    #[test]
    fn restricted_basis_pins_condensate() {
        let b = build_basis(3, 3, true).unwrap();
        assert_eq!(b.dim(), 10); // C(2+3, 3)
        assert!(b.states().all(|s| s[0] == 0));
    }

    #[test]
    fn dimension_cap_refuses_large_bases() {
        let err = build_basis_with_cap(10, 10, false, 1000).unwrap_err();
        match err {
            CoreError::DimensionOverflow { dim, cap } => {
                assert_eq!(dim, 184_756);
                assert_eq!(cap, 1000);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn annihilation_kills_vacuum() {
        let b = build_basis(3, 2, false).unwrap();
        let vacuum_idx = b.index_of(&[0, 0, 0]).unwrap();
        for mode in 0..3 {
            let a = annihilation(&b, mode).unwrap();
            let mut v = DVector::from_element(b.dim(), C64::new(0.0, 0.0));
            v[vacuum_idx] = C64::new(1.0, 0.0);
            assert_eq!(a.matvec(&v).norm(), 0.0);
        }
    }

    #[test]
    fn number_expectation_from_ladder_product() {
        // ⟨(0,2)| a†ₚaₚ |(0,2)⟩ = 2 for the second mode of M = 2
        let b = build_basis(2, 2, false).unwrap();
        let k = b.index_of(&[0, 2]).unwrap();
        let adag = creation(&b, 1).unwrap();
        let a = annihilation(&b, 1).unwrap();
        let n_op = adag.mul(&a);
        assert_relative_eq!(n_op.get(k, k).re, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn ccr_hold_in_the_interior() {
        let b = build_basis(3, 4, false).unwrap();
        for p in 0..3 {
            for q in 0..3 {
                let ap = annihilation(&b, p).unwrap();
                let adq = creation(&b, q).unwrap();
                let comm = SparseOperator::commutator(&ap, &adq);
                let delta = if p == q { 1.0 } else { 0.0 };
                for (col, _) in b.states().enumerate() {
                    if b.total_occupation(col) as usize + 2 <= b.max_particles() {
                        for row in 0..b.dim() {
                            let expect = if row == col { delta } else { 0.0 };
                            let v = comm.get(row, col);
                            assert!(
                                (v - C64::new(expect, 0.0)).norm() < 1e-13,
                                "CCR violated at ({row},{col}) for (p,q)=({p},{q})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn number_operator_counts_selected_modes() {
        let b = build_basis(3, 3, false).unwrap();
        let k = b.index_of(&[0, 1, 2]).unwrap();
        let n = number_operator(&b, Some(&[1, 2]));
        assert_relative_eq!(n.get(k, k).re, 3.0, epsilon = 1e-14);
        let n_default = number_operator(&b, None);
        assert_relative_eq!(n_default.get(k, k).re, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn exp_number_at_zero_kappa_is_identity() {
        let b = build_basis(2, 3, false).unwrap();
        let e = exp_kappa_number(&b, 0.0, None);
        assert_eq!(e, SparseOperator::identity(b.dim()));
    }

    #[test]
    fn modified_b_converges_to_a_for_large_n() {
        let b = build_basis(2, 3, false).unwrap();
        let a_op = annihilation(&b, 1).unwrap();
        let total_n = 100_000;
        let b_op = modified_b(&b, 1, total_n).unwrap();
        let bound = 2.0 * b.max_particles() as f64 / total_n as f64;
        for (r, c, v) in a_op.iter_entries() {
            let w = b_op.get(r, c);
            let rel = (w - v).norm() / v.norm();
            assert!(rel <= bound, "relative deviation {rel} exceeds {bound}");
        }
    }

    #[test]
    fn pull_through_is_exact() {
        // 𝒩 b† = b†(𝒩+1) and 𝒩 b = b(𝒩−1) as matrix identities
        let b = build_basis(3, 3, true).unwrap();
        let n_op = number_operator(&b, None);
        let id = SparseOperator::identity(b.dim());
        for mode in 1..3 {
            let bdag = modified_bdag(&b, mode, 3).unwrap();
            let bop = modified_b(&b, mode, 3).unwrap();
            let lhs1 = n_op.mul(&bdag);
            let rhs1 = bdag.mul(&n_op.add(&id));
            assert!(lhs1.sub(&rhs1).max_abs_entry() < 1e-13);
            let lhs2 = n_op.mul(&bop);
            let rhs2 = bop.mul(&n_op.sub(&id));
            assert!(lhs2.sub(&rhs2).max_abs_entry() < 1e-13);
        }
    }

    #[test]
    fn excitation_map_pure_condensate() {
        // ψ = φ^{⊗n} with φ the condensate mode ⇒ (1, 0, …, 0)
        let m = 3usize;
        let n = 3usize;
        let mut psi = vec![C64::new(0.0, 0.0); m.pow(n as u32)];
        psi[0] = C64::new(1.0, 0.0); // all slots in mode 0
        let xi = excitation_map(&psi, m, n, 0).unwrap();
        assert_relative_eq!(xi.components[0][0].re, 1.0, epsilon = 1e-12);
        for j in 1..=n {
            for z in &xi.components[j] {
                assert!(z.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn excitation_map_rejects_asymmetric_input() {
        let m = 2;
        let n = 2;
        let mut psi = vec![C64::new(0.0, 0.0); 4];
        psi[1] = C64::new(1.0, 0.0); // |0,1⟩ without its mirror |1,0⟩
        let err = excitation_map(&psi, m, n, 0).unwrap_err();
        matches!(err, CoreError::AsymmetricInput { .. })
            .then_some(())
            .expect("expected asymmetry rejection");
    }

    #[test]
    fn matrix_function_dense_path_identity() {
        let b = build_basis(2, 2, false).unwrap();
        let zero = SparseOperator::zeros(b.dim(), b.dim());
        let v = DVector::from_fn(b.dim(), |i, _| C64::new(i as f64, -0.5));
        let out = apply_matrix_function(&zero, ScalarFunction::Exp, &v, 1e-12).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn scaled_exponential_matches_plain_path() {
        let b = build_basis(3, 4, false).unwrap();
        let n_op = number_operator(&b, None).scale(C64::new(0.8, 0.0));
        let v = DVector::from_fn(b.dim(), |i, _| C64::new((i as f64 * 0.21).cos(), 0.05));
        let plain = apply_matrix_function(&n_op, ScalarFunction::Exp, &v, 1e-11).unwrap();
        let scaled = apply_matrix_function(&n_op, ScalarFunction::ExpScaled, &v, 1e-11).unwrap();
        assert!((plain - scaled).norm() < 1e-9);
    }

    #[test]
    fn matrix_function_diagonal_exponential() {
        let b = build_basis(3, 3, false).unwrap();
        let kappa = 0.37;
        let n_op = number_operator(&b, None);
        let v = DVector::from_fn(b.dim(), |i, _| C64::new(1.0 / (i as f64 + 1.0), 0.3));
        let out =
            apply_matrix_function(&n_op.scale(C64::new(kappa, 0.0)), ScalarFunction::Exp, &v, 1e-12)
                .unwrap();
        let diag = number_diagonal(&b, None);
        for i in 0..b.dim() {
            let expect = v[i] * C64::new((kappa * diag[i]).exp(), 0.0);
            assert!((out[i] - expect).norm() < 1e-12);
        }
    }
}
