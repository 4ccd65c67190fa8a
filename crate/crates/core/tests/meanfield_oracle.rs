//! Independent oracles for the mean-field module: a brute-force
//! first-quantized construction of H^mf on symmetrized tensors, a dense
//! projector route to the exponential moment, and window/Markov checks.

use bosegas_core::fock::{build_basis, number_operator};
use bosegas_core::linalg;
use bosegas_core::meanfield::{
    assemble_mf_hamiltonian, bootstrap_verification, commutator_identity_check,
    commutator_sandwich_constant, exp_moment, moment_report, spectral_window, tail_probability,
    verify_coercivity, TorusModel, VHat,
};
use bosegas_core::C64;
use nalgebra::DMatrix;

/// First-quantized oracle: build H on (C^M)^{⊗n} with explicit two-body
/// momentum transfer, symmetrize, and diagonalize on the symmetric subspace.
/// Independent of the Fock-side assembly.
fn first_quantized_spectrum(model: &TorusModel, n_particles: usize) -> Vec<f64> {
    let m = model.num_modes();
    let dim = m.pow(n_particles as u32);
    let idx = |slots: &[usize]| slots.iter().fold(0usize, |acc, &s| acc * m + s);
    let de_idx = |flat: usize| {
        let mut slots = vec![0usize; n_particles];
        let mut rem = flat;
        for s in (0..n_particles).rev() {
            slots[s] = rem % m;
            rem /= m;
        }
        slots
    };
    let lookup: std::collections::HashMap<[i64; 3], usize> = model
        .modes
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    // kinetic: Σ_i |p_i|²
    for flat in 0..dim {
        let slots = de_idx(flat);
        let e: f64 = slots.iter().map(|&s| model.kinetic_energy(s)).sum();
        h[(flat, flat)] += e;
    }
    // pair interaction (1/N)Σ_{i<j} v(x_i−x_j): matrix elements
    // ⟨p+r, q−r| v |p, q⟩ = v̂(r)
    let nf = model.num_particles as f64;
    for flat in 0..dim {
        let slots = de_idx(flat);
        for i in 0..n_particles {
            for j in (i + 1)..n_particles {
                for r in &model.modes {
                    let vr = model.v_hat.eval(r);
                    if vr == 0.0 {
                        continue;
                    }
                    let pi = model.modes[slots[i]];
                    let pj = model.modes[slots[j]];
                    let out_i = [pi[0] + r[0], pi[1] + r[1], pi[2] + r[2]];
                    let out_j = [pj[0] - r[0], pj[1] - r[1], pj[2] - r[2]];
                    let (Some(&oi), Some(&oj)) = (lookup.get(&out_i), lookup.get(&out_j)) else {
                        continue;
                    };
                    let mut target = slots.clone();
                    target[i] = oi;
                    target[j] = oj;
                    h[(idx(&target), flat)] += vr / nf;
                }
            }
        }
    }

    // symmetrizer
    let mut perms: Vec<Vec<usize>> = Vec::new();
    fn heap_permutations(k: usize, arr: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            out.push(arr.clone());
            return;
        }
        for i in 0..k {
            heap_permutations(k - 1, arr, out);
            if k.is_multiple_of(2) {
                arr.swap(i, k - 1);
            } else {
                arr.swap(0, k - 1);
            }
        }
    }
    let mut base: Vec<usize> = (0..n_particles).collect();
    heap_permutations(n_particles, &mut base, &mut perms);
    let mut sym = DMatrix::<f64>::zeros(dim, dim);
    for flat in 0..dim {
        let slots = de_idx(flat);
        for p in &perms {
            let permuted: Vec<usize> = p.iter().map(|&k| slots[k]).collect();
            sym[(idx(&permuted), flat)] += 1.0 / perms.len() as f64;
        }
    }

    // orthonormal basis of the symmetric subspace from the symmetrizer's
    // spectral projector
    let sym_c = sym.map(|v| C64::new(v, 0.0));
    let (vals, vecs) = linalg::hermitian_eigen(&sym_c).unwrap();
    let cols: Vec<usize> = (0..dim).filter(|&k| vals[k] > 0.5).collect();
    let mut basis = DMatrix::<C64>::zeros(dim, cols.len());
    for (out, &k) in cols.iter().enumerate() {
        basis.set_column(out, &vecs.column(k));
    }
    let h_c = h.map(|v| C64::new(v, 0.0));
    let h_sym = basis.adjoint() * h_c * &basis;
    linalg::hermitian_eigen(&h_sym).unwrap().0
}

#[test]
fn fock_spectrum_matches_first_quantized_oracle() {
    // d = 1, modes {0, ±2π}, N = 3, v̂ ≡ 1
    let model = TorusModel::new(1, 1, VHat::Constant(1.0), 3).unwrap();
    let basis = build_basis(model.num_modes(), 3, false).unwrap();
    let h = assemble_mf_hamiltonian(&model, &basis).unwrap();
    let sector = basis.sector_indices(3);
    let fock_vals = linalg::hermitian_eigen(&h.restrict(&sector).to_dense())
        .unwrap()
        .0;
    let oracle_vals = first_quantized_spectrum(&model, 3);
    assert_eq!(fock_vals.len(), oracle_vals.len());
    for (a, b) in fock_vals.iter().zip(&oracle_vals) {
        assert!(
            (a - b).abs() < 1e-9,
            "spectra differ: fock {a} vs oracle {b}"
        );
    }
}

#[test]
fn window_dimension_matches_dense_count() {
    // interacting N = 4 example: window population counted two ways
    let model = TorusModel::new(1, 1, VHat::Constant(1.0), 4).unwrap();
    let basis = build_basis(model.num_modes(), 4, false).unwrap();
    let h = assemble_mf_hamiltonian(&model, &basis)
        .unwrap()
        .restrict(&basis.sector_indices(4));
    let zeta = 45.0; // wide enough to catch excited levels
    let window = spectral_window(&h, zeta).unwrap();
    let all = linalg::hermitian_eigen(&h.to_dense()).unwrap().0;
    let count = all.iter().filter(|&&v| v <= all[0] + zeta).count();
    assert_eq!(window.dim(), count);
}

#[test]
fn exp_moment_matches_dense_projector_oracle() {
    // N = 6 interacting case at κ = 0.2: compare the window-compressed
    // moment against the full-dimension P·e^{κ𝒩₊}·P route
    let model = TorusModel::new(1, 1, VHat::Constant(1.0), 6).unwrap();
    let basis = build_basis(model.num_modes(), 6, false).unwrap();
    let sector = basis.sector_indices(6);
    let h = assemble_mf_hamiltonian(&model, &basis).unwrap().restrict(&sector);
    let counting = number_operator(&basis, None).restrict(&sector);
    let window = spectral_window(&h, 1.0).unwrap();
    let kappa = 0.2;
    let value = exp_moment(&window, kappa, &counting).unwrap();
    assert!(value.is_finite() && value >= 1.0);

    // dense oracle: assemble P as Σ|w⟩⟨w| over the window, act with the
    // diagonal exponential on the whole sector space
    let dim = counting.nrows();
    let mut projector = DMatrix::<C64>::zeros(dim, dim);
    for w in &window.vectors {
        projector += w * w.adjoint();
    }
    let diag = DMatrix::<C64>::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new((kappa * counting.get(i, i).re).exp(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let compressed = &projector * diag * &projector;
    let oracle = linalg::hermitian_eigen(&compressed).unwrap().0.last().copied().unwrap();
    assert!(
        (value - oracle).abs() < 1e-8,
        "moment {value} vs dense oracle {oracle}"
    );
}

#[test]
fn markov_tail_bound_every_window_vector() {
    let model = TorusModel::new(1, 1, VHat::Constant(1.0), 6).unwrap();
    let basis = build_basis(model.num_modes(), 6, false).unwrap();
    let sector = basis.sector_indices(6);
    let h = assemble_mf_hamiltonian(&model, &basis).unwrap().restrict(&sector);
    let counting = number_operator(&basis, None).restrict(&sector);
    let window = spectral_window(&h, 1.0).unwrap();
    for kappa in [0.1, 0.2, 0.5] {
        for psi in &window.vectors {
            let weights: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
            let moment: f64 = weights
                .iter()
                .enumerate()
                .map(|(i, w)| w * (kappa * counting.get(i, i).re).exp())
                .sum();
            for n in 0..=6 {
                let tail = tail_probability(psi, &counting, n);
                let bound = (-kappa * n as f64).exp() * moment;
                assert!(
                    tail <= bound + 1e-15,
                    "Markov violated at n = {n}: {tail} > {bound}"
                );
            }
        }
    }
}

#[test]
fn moment_report_shape_and_monotonicity() {
    let model = TorusModel::new(1, 1, VHat::Constant(1.0), 5).unwrap();
    let basis = build_basis(model.num_modes(), 5, false).unwrap();
    let sector = basis.sector_indices(5);
    let h = assemble_mf_hamiltonian(&model, &basis).unwrap().restrict(&sector);
    let counting = number_operator(&basis, None).restrict(&sector);
    let window = spectral_window(&h, 1.0).unwrap();
    let grid = [0.0, 0.1, 0.2, 0.4];
    let report = moment_report(&window, &grid, &counting).unwrap();
    assert_eq!(report.sup_moments.len(), 4);
    assert_eq!(report.sup_moments[0], 1.0);
    for w in report.sup_moments.windows(2) {
        assert!(w[1] >= w[0] - 1e-14, "moment must be κ-monotone");
    }
    for w in report.tail.windows(2) {
        assert!(w[1] <= w[0] + 1e-15, "tail must be n-non-increasing");
    }
    assert!(report.tail[0] <= 1.0 + 1e-12);
    assert!(report.fitted_rate < 0.0, "log-tail slope must be negative");
}

#[test]
fn coercivity_constant_uniform_over_n_sweep() {
    let mut constants = Vec::new();
    for n in [4usize, 6, 8, 10] {
        let model = TorusModel::new(1, 1, VHat::Constant(1.0), n).unwrap();
        let basis = build_basis(model.num_modes(), n, false).unwrap();
        let sector = basis.sector_indices(n);
        let h = assemble_mf_hamiltonian(&model, &basis).unwrap().restrict(&sector);
        let counting = number_operator(&basis, None).restrict(&sector);
        constants.push(verify_coercivity(&model, &h, &counting).unwrap());
    }
    let max = constants.iter().cloned().fold(f64::MIN, f64::max);
    let min = constants.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        max / min.max(1e-12) < 2.0,
        "fitted C spread too wide: {constants:?}"
    );
}

#[test]
fn sandwich_constant_stable_across_n() {
    // the fitted constant saturates from below toward its N-uniform value:
    // bounded spread over the sweep, small drift between the last two N
    let kappa = 0.3;
    let mut constants = Vec::new();
    for n in [4usize, 6, 8, 10] {
        let model = TorusModel::new(1, 1, VHat::Constant(1.0), n).unwrap();
        let basis = build_basis(model.num_modes(), n, false).unwrap();
        let h = assemble_mf_hamiltonian(&model, &basis).unwrap();
        let check = commutator_identity_check(&model, &basis, &h, kappa).unwrap();
        assert!(check.residual < 1e-10);
        let sector = basis.sector_indices(n);
        let h_sector = h.restrict(&sector);
        let counting = number_operator(&basis, None).restrict(&sector);
        // a window wide enough to span the first few levels
        let window = spectral_window(&h_sector, 45.0).unwrap();
        constants.push(commutator_sandwich_constant(
            &window,
            &check.direct.restrict(&sector),
            &counting,
            kappa,
            100,
            99,
        ));
    }
    let max = constants.iter().cloned().fold(f64::MIN, f64::max);
    let min = constants.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        max / min <= 2.0,
        "sandwich constant spread too wide: {constants:?}"
    );
    let last_drift = (constants[3] - constants[2]).abs() / constants[2];
    assert!(
        last_drift <= 0.2,
        "no saturation: drift {last_drift:.2} between last two N ({constants:?})"
    );
}

#[test]
fn bootstrap_inequality_interacting_case() {
    let model = TorusModel::new(1, 1, VHat::Constant(1.0), 6).unwrap();
    let basis = build_basis(model.num_modes(), 6, false).unwrap();
    let sector = basis.sector_indices(6);
    let h = assemble_mf_hamiltonian(&model, &basis).unwrap().restrict(&sector);
    let counting = number_operator(&basis, None).restrict(&sector);
    let window = spectral_window(&h, 1.0).unwrap();
    let grid: Vec<f64> = (1..=6).map(|k| 0.05 * k as f64).collect();
    let table = bootstrap_verification(&window, &counting, &grid).unwrap();
    assert!(table.fitted_c.is_finite());
    for row in &table.rows {
        assert!(
            row.lhs <= row.rhs + 1e-10,
            "bootstrap inequality violated at κ = {}",
            row.kappa
        );
    }
    assert!(
        table.integral_identity_residual < 1e-6,
        "integral identity residual {}",
        table.integral_identity_residual
    );
}

#[test]
fn moments_stable_under_mode_set_enlargement() {
    // no truncation-convergence rate is available; empirically the sup moment moves
    // by well under 1% when ±4π modes join the set
    let kappa = 0.2;
    let moment_for = |max_wavenumber: i64| -> f64 {
        let model = TorusModel::new(1, max_wavenumber, VHat::Constant(1.0), 6).unwrap();
        let basis = build_basis(model.num_modes(), 6, false).unwrap();
        let sector = basis.sector_indices(6);
        let h = assemble_mf_hamiltonian(&model, &basis)
            .unwrap()
            .restrict(&sector);
        let counting = number_operator(&basis, None).restrict(&sector);
        let window = spectral_window(&h, 1.0).unwrap();
        exp_moment(&window, kappa, &counting).unwrap()
    };
    let small = moment_for(1);
    let large = moment_for(2);
    let rel = ((large - small) / small).abs();
    assert!(
        rel < 0.01,
        "moment moved {rel:.4} under mode enlargement ({small} vs {large})"
    );
}
