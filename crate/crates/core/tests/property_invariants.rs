//! Property tests for the structural invariants that must hold for every
//! parameter choice, not just the worked examples.

use bosegas_core::fock::{
    annihilation, basis_dimension, build_basis, creation, modified_b, modified_bdag,
};
use bosegas_core::sparse::SparseOperator;
use bosegas_core::C64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_enumeration_is_consistent(modes in 1usize..5, cap in 0usize..5) {
        let basis = build_basis(modes, cap, false).unwrap();
        prop_assert_eq!(basis.dim() as u128, basis_dimension(modes, cap));
        for k in 0..basis.dim() {
            prop_assert_eq!(basis.index_of(basis.state(k)), Some(k));
            let total: u32 = basis.state(k).iter().sum();
            prop_assert!(total as usize <= cap);
        }
    }

    #[test]
    fn creation_annihilation_adjoint_pair(modes in 1usize..4, cap in 1usize..5, mode in 0usize..4) {
        prop_assume!(mode < modes);
        let basis = build_basis(modes, cap, false).unwrap();
        let c = creation(&basis, mode).unwrap();
        let a = annihilation(&basis, mode).unwrap();
        let defect = c.adjoint().sub(&a).max_abs_entry();
        prop_assert!(defect == 0.0);
    }

    #[test]
    fn product_adjoint_reverses(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = 6;
        let mut a = SparseOperator::zeros(dim, dim);
        let mut b = SparseOperator::zeros(dim, dim);
        for _ in 0..10 {
            a.add_entry(
                rng.random_range(0..dim),
                rng.random_range(0..dim),
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            );
            b.add_entry(
                rng.random_range(0..dim),
                rng.random_range(0..dim),
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            );
        }
        let lhs = a.mul(&b).adjoint();
        let rhs = b.adjoint().mul(&a.adjoint());
        prop_assert!(lhs.sub(&rhs).max_abs_entry() < 1e-13);
    }

    #[test]
    fn modified_pair_is_adjoint_and_bounded(cap in 1usize..5, extra in 0usize..8) {
        let total_n = cap + extra;
        let basis = build_basis(2, cap, true).unwrap();
        let b = modified_b(&basis, 1, total_n).unwrap();
        let bdag = modified_bdag(&basis, 1, total_n).unwrap();
        prop_assert!(b.adjoint().sub(&bdag).max_abs_entry() == 0.0);
        // every matrix element of b is bounded by that of a
        let a = annihilation(&basis, 1).unwrap();
        for (r, c, v) in b.iter_entries() {
            prop_assert!(v.norm() <= a.get(r, c).norm() + 1e-15);
        }
    }

    #[test]
    fn exp_kappa_number_is_positive_diagonal(cap in 0usize..5, kappa in 0.0f64..1.0) {
        let basis = build_basis(3, cap, false).unwrap();
        let e = bosegas_core::fock::exp_kappa_number(&basis, kappa, None);
        for (r, c, v) in e.iter_entries() {
            prop_assert_eq!(r, c);
            prop_assert!(v.re >= 1.0 && v.im == 0.0);
        }
    }
}
