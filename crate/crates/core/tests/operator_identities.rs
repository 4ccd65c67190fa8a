//! Exact operator algebra on a 3-mode, n = 3 system: modified commutation
//! relations, pull-through rules, the excitation-map conjugation table, and
//! the number bounds for b/b† and quadratic pair operators.

use bosegas_core::fock::{
    annihilation, build_basis, creation, excitation_map, excitation_unitary, mode_combination,
    modified_b, modified_bdag, number_operator,
};
use bosegas_core::sparse::SparseOperator;
use bosegas_core::C64;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn z(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Modified CCR on F^{≤N} with cap = N: exact matrix identity
/// [b_p, b†_q] = δ_pq(1 − 𝒩/N) − a†_q a_p / N.
#[test]
fn modified_ccr_exact_everywhere() {
    let n = 3usize;
    let basis = build_basis(3, n, true).unwrap();
    let dim = basis.dim();
    let id = SparseOperator::identity(dim);
    let number = number_operator(&basis, None);
    for p in 1..3 {
        for q in 1..3 {
            let b_p = modified_b(&basis, p, n).unwrap();
            let bdag_q = modified_bdag(&basis, q, n).unwrap();
            let lhs = SparseOperator::commutator(&b_p, &bdag_q);
            let delta = if p == q { 1.0 } else { 0.0 };
            let a_p = annihilation(&basis, p).unwrap();
            let adag_q = creation(&basis, q).unwrap();
            let rhs = id
                .scale(z(delta))
                .sub(&number.scale(z(delta / n as f64)))
                .sub(&adag_q.mul(&a_p).scale(z(1.0 / n as f64)));
            let defect = lhs.sub(&rhs).max_abs_entry();
            assert!(
                defect < 1e-12,
                "modified CCR defect {defect:.3e} at (p,q)=({p},{q})"
            );

            // [b_p, b_q] = 0 and [b†_p, b†_q] = 0
            let b_q = modified_b(&basis, q, n).unwrap();
            assert!(SparseOperator::commutator(&b_p, &b_q).max_abs_entry() < 1e-13);
            let bdag_p = modified_bdag(&basis, p, n).unwrap();
            assert!(SparseOperator::commutator(&bdag_p, &bdag_q).max_abs_entry() < 1e-13);
        }
    }
}

#[test]
fn pull_through_rules_exact() {
    let n = 3usize;
    let basis = build_basis(3, n, true).unwrap();
    let number = number_operator(&basis, None);
    let id = SparseOperator::identity(basis.dim());
    for mode in 1..3 {
        let bdag = modified_bdag(&basis, mode, n).unwrap();
        let b = modified_b(&basis, mode, n).unwrap();
        let lhs = number.mul(&bdag).sub(&bdag.mul(&number.add(&id)));
        assert!(lhs.max_abs_entry() < 1e-13, "𝒩 b† ≠ b†(𝒩+1)");
        let lhs = number.mul(&b).sub(&b.mul(&number.sub(&id)));
        assert!(lhs.max_abs_entry() < 1e-13, "𝒩 b ≠ b(𝒩−1)");
    }
}

/// The four conjugation rules of U_N as matrix identities on the 3-mode,
/// n = 3 system, including U 𝒩_{⊥φ} U† = 𝒩.
#[test]
fn excitation_unitary_conjugation_table() {
    let n = 3usize;
    let full = build_basis(3, n, false).unwrap();
    let restricted = build_basis(3, n, true).unwrap();
    let u = excitation_unitary(&full, &restricted, n).unwrap();
    let sector = full.sector_indices(n);

    // U is unitary from the sector onto the restricted space
    let uu = u.mul(&u.adjoint());
    assert!(
        uu.sub(&SparseOperator::identity(restricted.dim()))
            .max_abs_entry()
            < 1e-13
    );
    let uu = u.adjoint().mul(&u);
    assert!(
        uu.sub(&SparseOperator::identity(sector.len()))
            .max_abs_entry()
            < 1e-13
    );

    let number = number_operator(&restricted, None);
    let id_r = SparseOperator::identity(restricted.dim());

    let sector_op = |op: &SparseOperator| op.restrict(&sector);

    // rule 1: U a†(φ)a(φ) U† = N − 𝒩
    let a0 = annihilation(&full, 0).unwrap();
    let a0dag = creation(&full, 0).unwrap();
    let lhs = u.mul(&sector_op(&a0dag.mul(&a0))).mul(&u.adjoint());
    let rhs = id_r.scale(z(n as f64)).sub(&number);
    assert!(lhs.sub(&rhs).max_abs_entry() < 1e-12, "rule 1 fails");

    // √(N−𝒩) as a diagonal on the restricted basis
    let sqrt_n_minus = {
        let vals: Vec<f64> = (0..restricted.dim())
            .map(|k| ((n as f64) - restricted.total_occupation(k) as f64).max(0.0).sqrt())
            .collect();
        SparseOperator::diagonal(&vals)
    };

    for f_mode in 1..3 {
        // rule 2: U a†(f) a(φ) U† = a†(f)√(N−𝒩)
        let af_dag_full = creation(&full, f_mode).unwrap();
        let lhs = u
            .mul(&sector_op(&af_dag_full.mul(&a0)))
            .mul(&u.adjoint());
        let af_dag_r = creation(&restricted, f_mode).unwrap();
        let rhs = af_dag_r.mul(&sqrt_n_minus);
        assert!(lhs.sub(&rhs).max_abs_entry() < 1e-12, "rule 2 fails");

        // rule 3: U a†(φ) a(g) U† = √(N−𝒩) a(g)
        let ag_full = annihilation(&full, f_mode).unwrap();
        let lhs = u.mul(&sector_op(&a0dag.mul(&ag_full))).mul(&u.adjoint());
        let ag_r = annihilation(&restricted, f_mode).unwrap();
        let rhs = sqrt_n_minus.mul(&ag_r);
        assert!(lhs.sub(&rhs).max_abs_entry() < 1e-12, "rule 3 fails");

        // rule 4: U a†(f) a(g) U† = a†(f) a(g) for f, g ⊥ φ
        for g_mode in 1..3 {
            let ag_full = annihilation(&full, g_mode).unwrap();
            let lhs = u
                .mul(&sector_op(&af_dag_full.mul(&ag_full)))
                .mul(&u.adjoint());
            let rhs = creation(&restricted, f_mode)
                .unwrap()
                .mul(&annihilation(&restricted, g_mode).unwrap());
            assert!(lhs.sub(&rhs).max_abs_entry() < 1e-12, "rule 4 fails");
        }
    }

    // U 𝒩_{⊥φ} U† = 𝒩
    let n_perp_full = number_operator(&full, None);
    let lhs = u.mul(&sector_op(&n_perp_full)).mul(&u.adjoint());
    assert!(lhs.sub(&number).max_abs_entry() < 1e-12);
}

/// Unitarity of the excitation map on random symmetric tensors.
#[test]
fn excitation_map_preserves_norms() {
    let m = 3usize;
    let n = 3usize;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..5 {
        // symmetrize a random tensor
        let dim = m.pow(n as u32);
        let raw: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut sym = vec![C64::new(0.0, 0.0); dim];
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for i0 in 0..m {
            for i1 in 0..m {
                for i2 in 0..m {
                    let slots = [i0, i1, i2];
                    let flat = (i0 * m + i1) * m + i2;
                    for p in perms {
                        let src = (slots[p[0]] * m + slots[p[1]]) * m + slots[p[2]];
                        sym[flat] += raw[src] / C64::new(6.0, 0.0);
                    }
                }
            }
        }
        let norm = sym.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in &mut sym {
            *v /= C64::new(norm, 0.0);
        }
        let xi = excitation_map(&sym, m, n, 0).unwrap();
        assert!(
            (xi.norm() - 1.0).abs() < 1e-10,
            "‖Uψ‖ = {} for normalized ψ",
            xi.norm()
        );
    }
}

/// ‖b(h)ξ‖ ≤ ‖h‖·‖𝒩^{1/2}ξ‖ over 100 random ξ (number bound for the
/// modified annihilator), and ‖b†(h)ξ‖ ≤ ‖h‖·‖(𝒩+1)^{1/2}ξ‖.
#[test]
fn modified_operator_number_bounds() {
    let n = 4usize;
    let basis = build_basis(3, n, true).unwrap();
    let dim = basis.dim();
    let number = number_operator(&basis, None);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sqrt_diag = |shift: f64| -> Vec<f64> {
        (0..dim)
            .map(|k| (basis.total_occupation(k) as f64 + shift).sqrt())
            .collect()
    };
    let half_n = SparseOperator::diagonal(&sqrt_diag(0.0));
    let half_np1 = SparseOperator::diagonal(&sqrt_diag(1.0));
    let _ = number;
    for _ in 0..100 {
        let h = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
        let h_norm = h.norm();
        let ops: Vec<SparseOperator> = (1..3)
            .map(|mode| modified_b(&basis, mode, n).unwrap())
            .collect();
        let coeffs: Vec<C64> = h.iter().map(|&v| z(v)).collect();
        let b_h = mode_combination(&ops, &coeffs);
        let xi = DVector::from_fn(dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let lhs = b_h.matvec(&xi).norm();
        let rhs = h_norm * half_n.matvec(&xi).norm();
        assert!(lhs <= rhs + 1e-12, "‖b(h)ξ‖ = {lhs} > {rhs}");
        let lhs_dag = b_h.adjoint().matvec(&xi).norm();
        let rhs_dag = h_norm * half_np1.matvec(&xi).norm();
        assert!(lhs_dag <= rhs_dag + 1e-12, "‖b†(h)ξ‖ = {lhs_dag} > {rhs_dag}");
    }
}

/// Quadratic pair operators B_{♯ℓ,♯r}(j) = Σ j_pq b♯_p b♯_q obey
/// ‖B(j)ξ‖ ≤ C(‖j‖₂ + diag term)·‖(𝒩+1)ξ‖ with one fitted constant that is
/// stable across random trials.
#[test]
fn quadratic_pair_operator_bounds() {
    let n = 4usize;
    let basis = build_basis(3, n, true).unwrap();
    let dim = basis.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let np1: Vec<f64> = (0..dim)
        .map(|k| basis.total_occupation(k) as f64 + 1.0)
        .collect();
    let np1_op = SparseOperator::diagonal(&np1);

    let b_ops: Vec<SparseOperator> = (1..3)
        .map(|mode| modified_b(&basis, mode, n).unwrap())
        .collect();

    // variants (♯ℓ, ♯r): (·,·), (*,*), (*,·), (·,*) — the last carries the
    // extra Σ|j_pp| term
    let mut fitted = [0.0f64; 4];
    let mut trial_maxima: Vec<[f64; 4]> = Vec::new();
    for _ in 0..100 {
        let j = nalgebra::DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
        let j2: f64 = j.iter().map(|v| v * v).sum::<f64>().sqrt();
        let jdiag: f64 = (0..2).map(|p| j[(p, p)].abs()).sum();
        let mut ops = Vec::new();
        for (variant, (left_dag, right_dag)) in
            [(false, false), (true, true), (true, false), (false, true)]
                .into_iter()
                .enumerate()
        {
            let mut op = SparseOperator::zeros(dim, dim);
            for p in 0..2 {
                for q in 0..2 {
                    let lhs = if left_dag {
                        b_ops[p].adjoint()
                    } else {
                        b_ops[p].clone()
                    };
                    let rhs = if right_dag {
                        b_ops[q].adjoint()
                    } else {
                        b_ops[q].clone()
                    };
                    op = op.add(&lhs.mul(&rhs).scale(z(j[(p, q)])));
                }
            }
            ops.push((variant, op));
        }
        let mut this_trial = [0.0f64; 4];
        for _ in 0..4 {
            let xi = DVector::from_fn(dim, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let denom_base = np1_op.matvec(&xi).norm();
            for (variant, op) in &ops {
                let scale = if *variant == 3 { j2 + jdiag } else { j2 };
                let ratio = op.matvec(&xi).norm() / (scale * denom_base);
                fitted[*variant] = fitted[*variant].max(ratio);
                this_trial[*variant] = this_trial[*variant].max(ratio);
            }
        }
        trial_maxima.push(this_trial);
    }
    for (variant, &c) in fitted.iter().enumerate() {
        assert!(c.is_finite() && c > 0.0, "variant {variant} degenerate");
        assert!(c < 10.0, "variant {variant} constant suspiciously large: {c}");
    }
}
