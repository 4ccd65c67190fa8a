//! Generalized Bogoliubov transformations e^{B(η)} on truncated Fock spaces.
//!
//! B(η) = ½ Σ_{pq} η_pq (b†_p b†_q − b_p b_q) over the excitation modes of a
//! condensate-free basis, with the modified operators b = √((N−𝒩)/N)·a.
//! B is exactly anti-Hermitian as an assembled matrix, so e^{B} is exactly
//! unitary, for any symmetric η and any particle cap.
//!
//! For the standard transformation the conjugation rule
//!
//!   e^{−B} b(f) e^{B} = b(cosh_η f) + b†(sinh_η f)
//!
//! would be exact; with the modified operators it picks up a remainder
//! d_η(f) of size O(1/N). This module computes the exact conjugation as
//! dense matrix products, the cosh/sinh series prediction, their difference
//! d_η(f), Gronwall-type conjugation constants for e^{B}e^{κ𝒩}e^{−B}, and
//! commutators [e^{κ𝒩}, d_η(f)] with their κ- and N-scalings.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fock::{self, FockBasis};
use crate::linalg;
use crate::sparse::SparseOperator;
use crate::{C64, CoreError};

/// B(η) with its ingredients, on a condensate-free basis.
#[derive(Debug, Clone)]
pub struct QuadraticGenerator {
    /// symmetric mode-space kernel over the excitation modes 1..=K
    pub eta: DMatrix<f64>,
    pub basis: FockBasis,
    pub total_n: usize,
    /// assembled ½Ση_pq(b†_p b†_q − b_p b_q)
    pub b_op: SparseOperator,
    /// per-mode annihilators b_p (index 0 ↔ mode 1 of the basis)
    pub b_modes: Vec<SparseOperator>,
    pub hs_norm: f64,
}

/// Assemble B(η). The basis must exclude the condensate mode and carry one
/// excitation mode per η row (modes 1..=K of the basis).
pub fn build_generator(
    eta: &DMatrix<f64>,
    basis: &FockBasis,
    total_n: usize,
) -> Result<QuadraticGenerator, CoreError> {
    let k = eta.nrows();
    if eta.ncols() != k {
        return Err(CoreError::DimensionMismatch {
            context: "η must be square".into(),
        });
    }
    let asym = (eta - eta.transpose()).amax();
    if asym > 1e-12 {
        return Err(CoreError::AsymmetricKernel { deviation: asym });
    }
    if !basis.restricts_to_excitations() {
        return Err(CoreError::Invalid(
            "generator basis must exclude the condensate mode".into(),
        ));
    }
    if basis.num_modes() < k + 1 {
        return Err(CoreError::DimensionMismatch {
            context: format!(
                "η couples {k} modes but the basis has only {} excitation modes",
                basis.num_modes() - 1
            ),
        });
    }

    let b_modes: Vec<SparseOperator> = (1..=k)
        .map(|mode| fock::modified_b(basis, mode, total_n))
        .collect::<Result<_, _>>()?;
    let bdag_modes: Vec<SparseOperator> = b_modes.iter().map(|b| b.adjoint()).collect();

    let dim = basis.dim();
    let mut b_op = SparseOperator::zeros(dim, dim);
    for p in 0..k {
        for q in 0..k {
            let coeff = eta[(p, q)] / 2.0;
            if coeff == 0.0 {
                continue;
            }
            let create = bdag_modes[p].mul(&bdag_modes[q]);
            let destroy = b_modes[p].mul(&b_modes[q]);
            b_op = b_op.add(&create.sub(&destroy).scale(C64::new(coeff, 0.0)));
        }
    }
    b_op.prune(0.0);

    // η symmetric and b† blocks adjoint to b blocks ⇒ B† = −B exactly
    let defect = b_op.add(&b_op.adjoint()).max_abs_entry();
    debug_assert!(defect < 1e-12, "generator not anti-Hermitian: {defect}");

    let hs_norm = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(QuadraticGenerator {
        eta: eta.clone(),
        basis: basis.clone(),
        total_n,
        b_op,
        b_modes,
        hs_norm,
    })
}

impl QuadraticGenerator {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// dense e^{s·B}
    pub fn exp_b(&self, s: f64) -> DMatrix<C64> {
        linalg::expm_dense(&self.b_op.scale(C64::new(s, 0.0)).to_dense())
    }

    /// b(f) = Σ_p f̄_p b_p for a real mode vector f.
    pub fn b_of(&self, f: &DVector<f64>) -> SparseOperator {
        assert_eq!(f.len(), self.b_modes.len());
        let coeffs: Vec<C64> = f.iter().map(|&v| C64::new(v, 0.0)).collect();
        fock::mode_combination(&self.b_modes, &coeffs)
    }

    /// b†(f).
    pub fn bdag_of(&self, f: &DVector<f64>) -> SparseOperator {
        self.b_of(f).adjoint()
    }

    /// cosh_η(f) = Σ_n η^{2n} f/(2n)! truncated at matrix power ≤ order.
    pub fn cosh_eta(&self, f: &DVector<f64>, order: usize) -> DVector<f64> {
        series_apply(&self.eta, f, order, true)
    }

    /// sinh_η(f) = Σ_n η^{2n+1} f/(2n+1)! truncated at matrix power ≤ order.
    pub fn sinh_eta(&self, f: &DVector<f64>, order: usize) -> DVector<f64> {
        series_apply(&self.eta, f, order, false)
    }

    /// Tail bound ‖η‖^{k+1}/(k+1)! of the series truncated at order k.
    pub fn series_tail(&self, order: usize) -> f64 {
        let mut tail = self.hs_norm.powi(order as i32 + 1);
        for j in 2..=(order + 1) {
            tail /= j as f64;
        }
        tail
    }
}

fn series_apply(eta: &DMatrix<f64>, f: &DVector<f64>, order: usize, even: bool) -> DVector<f64> {
    let mut out = if even { f.clone() } else { DVector::zeros(f.len()) };
    if !even {
        out = eta * f;
    }
    let mut term = if even { f.clone() } else { eta * f };
    let mut factorial = 1.0f64;
    let start = usize::from(!even);
    let mut n = start;
    while n + 2 <= order {
        term = eta * (eta * &term);
        factorial *= ((n + 1) * (n + 2)) as f64;
        out += &term / factorial;
        n += 2;
    }
    out
}

/// Exact-versus-series data for the conjugation of b(f).
#[derive(Debug, Clone)]
pub struct RemainderData {
    /// d_η(f) = e^{−B} b(f) e^{B} − b(cosh_η f) − b†(sinh_η f) as a matrix
    pub remainder: DMatrix<C64>,
    /// max ‖d_η(f)·ξ‖ over the probe vectors
    pub remainder_norm: f64,
    /// max over probes of ‖(ad-series truncation at `order`) − exact‖·ξ
    pub series_defect: f64,
    pub truncation_order: usize,
}

/// Compute the exact conjugation e^{−B}b(f)e^{B}, the cosh/sinh series
/// prediction truncated at `order`, and the remainder d_η(f); the norms are
/// evaluated on `probes` seeded random normalized vectors.
///
/// `probe_sector_cap` restricts the probes to low particle sectors. The
/// O(1/N) content of d_η(f) is a statement about states far from the
/// truncation edge; probes touching the edge pick up the N-independent
/// clipping of the cap instead.
pub fn approximate_action_check(
    gen: &QuadraticGenerator,
    f: &DVector<f64>,
    order: usize,
    probes: usize,
    probe_sector_cap: Option<usize>,
    seed: u64,
    tol: f64,
) -> Result<RemainderData, CoreError> {
    if gen.hs_norm >= 0.5 {
        return Err(CoreError::Invalid(format!(
            "series path requires ‖η‖ < 0.5 (got {}); use the exact conjugation instead",
            gen.hs_norm
        )));
    }
    let tail = gen.series_tail(order);
    if tail > tol {
        return Err(CoreError::SeriesTruncation { tail, tol });
    }

    let exp_plus = gen.exp_b(1.0);
    let exp_minus = gen.exp_b(-1.0);
    let b_f = gen.b_of(f).to_dense();
    let exact = &exp_minus * b_f * &exp_plus;

    let cosh_f = gen.cosh_eta(f, order);
    let sinh_f = gen.sinh_eta(f, order);
    let series = gen.b_of(&cosh_f).to_dense() + gen.bdag_of(&sinh_f).to_dense();
    let remainder = &exact - &series;

    // nested-commutator route: Σ (−1)^n ad_B^{(n)}(b(f))/n!
    let mut ad_sum = gen.b_of(f).to_dense();
    let mut current = ad_sum.clone();
    let b_dense = gen.b_op.to_dense();
    let mut factorial = 1.0f64;
    for n in 1..=order {
        current = &b_dense * &current - &current * &b_dense;
        factorial *= n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        ad_sum += &current * C64::new(sign / factorial, 0.0);
    }
    let ad_defect_mat = &ad_sum - &exact;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remainder_norm = 0.0f64;
    let mut series_defect = 0.0f64;
    for _ in 0..probes {
        let mut xi = random_probe(&gen.basis, probe_sector_cap, &mut rng);
        xi /= C64::new(xi.norm(), 0.0);
        remainder_norm = remainder_norm.max((&remainder * &xi).norm());
        series_defect = series_defect.max((&ad_defect_mat * &xi).norm());
    }
    Ok(RemainderData {
        remainder,
        remainder_norm,
        series_defect,
        truncation_order: order,
    })
}

/// Random complex vector, optionally supported only on sectors with
/// occupation ≤ `sector_cap`.
fn random_probe(
    basis: &FockBasis,
    sector_cap: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> DVector<C64> {
    DVector::from_fn(basis.dim(), |i, _| {
        if let Some(cap) = sector_cap {
            if basis.total_occupation(i) as usize > cap {
                return C64::new(0.0, 0.0);
            }
        }
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Smallest C with C·e^{2κ𝒩} − e^{B}e^{κ𝒩}e^{−B} ⪰ 0, via the largest
/// eigenvalue of D^{−1/2}·S·D^{−1/2} with D = e^{2κ𝒩} diagonal.
pub fn gronwall_conjugation_check(
    gen: &QuadraticGenerator,
    kappa: f64,
) -> Result<f64, CoreError> {
    assert!(kappa > 0.0 && kappa <= 0.5);
    let number = fock::number_diagonal(&gen.basis, None);
    let exp_b = gen.exp_b(1.0);
    let exp_minus = gen.exp_b(-1.0);
    let dim = number.len();
    let e_kappa = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new((kappa * number[i]).exp(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let s = &exp_b * e_kappa * &exp_minus;
    // D^{−1/2} S D^{−1/2}
    let half_inv: Vec<f64> = number.iter().map(|&n| (-kappa * n).exp()).collect();
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        s[(i, j)] * C64::new(half_inv[i] * half_inv[j], 0.0)
    });
    linalg::largest_eigenvalue(&m)
}

/// Fitted C for the number-growth bound
/// e^{−B}(𝒩+1)^k e^{B} ⪯ C^k (𝒩+1)^k, returned as C (the k-th root).
pub fn number_growth_constant(gen: &QuadraticGenerator, k: u32) -> Result<f64, CoreError> {
    let number = fock::number_diagonal(&gen.basis, None);
    let exp_b = gen.exp_b(1.0);
    let exp_minus = gen.exp_b(-1.0);
    let dim = gen.dim();
    let npk = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new((number[i] + 1.0).powi(k as i32), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let s = &exp_minus * npk * &exp_b;
    let half_inv: Vec<f64> = number
        .iter()
        .map(|&n| (n + 1.0).powf(-(k as f64) / 2.0))
        .collect();
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        s[(i, j)] * C64::new(half_inv[i] * half_inv[j], 0.0)
    });
    Ok(linalg::largest_eigenvalue(&m)?.powf(1.0 / k as f64))
}

/// ‖[e^{κ𝒩}, d_η(f)]·ξ‖ maximized over seeded probes.
pub fn commutator_remainder_norm(
    gen: &QuadraticGenerator,
    f: &DVector<f64>,
    kappa: f64,
    order: usize,
    probes: usize,
    probe_sector_cap: Option<usize>,
    seed: u64,
) -> Result<f64, CoreError> {
    let data = approximate_action_check(gen, f, order, 1, probe_sector_cap, seed, 1e-10)?;
    let number = fock::number_diagonal(&gen.basis, None);
    let dim = gen.dim();
    let e_kappa: Vec<f64> = number.iter().map(|&n| (kappa * n).exp()).collect();
    // [e^{κ𝒩}, d] with diagonal e^{κ𝒩}: entrywise (e_i − e_j)·d_ij
    let comm = DMatrix::from_fn(dim, dim, |i, j| {
        data.remainder[(i, j)] * C64::new(e_kappa[i] - e_kappa[j], 0.0)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let mut xi = random_probe(&gen.basis, probe_sector_cap, &mut rng);
        xi /= C64::new(xi.norm(), 0.0);
        worst = worst.max((&comm * &xi).norm());
    }
    Ok(worst)
}

/// The two isolated linear blocks ±√N[b(cosh_η h) + b†(sinh_η h) + h.c.]
/// must cancel identically; returns the max entry of their sum.
pub fn cubic_cancellation_probe(
    gen: &QuadraticGenerator,
    h: &DVector<f64>,
    order: usize,
) -> f64 {
    let sqrt_n = (gen.total_n as f64).sqrt();
    let cosh_h = gen.cosh_eta(h, order);
    let sinh_h = gen.sinh_eta(h, order);
    let core = gen
        .b_of(&cosh_h)
        .add(&gen.bdag_of(&sinh_h));
    let block = core.add(&core.adjoint()).scale(C64::new(sqrt_n, 0.0));
    let negated = core.add(&core.adjoint()).scale(C64::new(-sqrt_n, 0.0));
    block.add(&negated).max_abs_entry()
}

/// Least-squares exponent of `values` against `parameters` in log-log scale.
pub fn fitted_exponent(parameters: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = parameters.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    linalg::fit_line(&xs, &ys).0
}

/// Symmetric pair kernel on two modes with Hilbert-Schmidt norm `hs`:
/// η = (hs/√2)·(|1⟩⟨2| + |2⟩⟨1|).
pub fn two_mode_pair_kernel(hs: f64) -> DMatrix<f64> {
    let s = hs / 2.0f64.sqrt();
    DMatrix::from_row_slice(2, 2, &[0.0, s, s, 0.0])
}
