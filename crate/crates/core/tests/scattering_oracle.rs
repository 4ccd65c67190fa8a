//! Independent oracles for the Neumann eigenproblem.
//!
//! The shooting solver is checked against (i) a dense finite-difference
//! discretization of −u″ + (V/2)u = λu with u(0) = 0 and the mixed boundary
//! condition u′(R)·R = u(R), solved by inverse iteration with a
//! summation-by-parts Rayleigh quotient (all-positive terms, so the tiny
//! eigenvalue survives in f64), and (ii) a fully analytic transcendental
//! equation for the soft-sphere ground state. Richardson extrapolation over
//! a mesh pair removes the h² term of the FD route.

use bosegas_core::linalg::solve_tridiagonal;
use bosegas_core::scattering::{solve_neumann, solve_zero_energy, RadialPotential};

/// Symmetrized FD matrix of the Neumann problem on n intervals:
/// interior rows (−u_{i−1} + 2u_i − u_{i+1})/h² + (V_i/2)u_i, boundary row
/// via centered ghost elimination of u′(R)·R = u(R), last dof scaled by
/// 1/√2 to restore symmetry. The potential is half-weighted through
/// one-sided limits so the jump at the support radius keeps a clean h²
/// error expansion.
fn fd_matrix(pot: &RadialPotential, radius: f64, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let h = radius / n as f64;
    let v_half = |r: f64| (pot.eval(r - 1e-9) + pot.eval(r + 1e-9)) / 4.0;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n - 1);
    for i in 1..n {
        diag.push(2.0 / (h * h) + v_half(i as f64 * h));
        off.push(-1.0 / (h * h));
    }
    diag.push(2.0 / (h * h) - 2.0 / (h * radius) + v_half(radius));
    let m = off.len() - 1;
    off[m] = -(2.0f64).sqrt() / (h * h);
    (diag, off, h)
}

/// Smallest FD eigenvalue by inverse iteration; the Rayleigh quotient is
/// evaluated in the summation-by-parts form
///   ⟨u, Au⟩ = (1/h²)[u₁² + Σ(Δu)² + (u_{n−1} − √2·u_n)²]
///             − (2/(hR))u_n² + Σ Ṽ_i u_i²,
/// which avoids the 1/h²-scale cancellation of the naive bilinear form.
fn fd_neumann_lowest(pot: &RadialPotential, radius: f64, n: usize) -> (f64, Vec<f64>) {
    let (diag, off, h) = fd_matrix(pot, radius, n);
    let v_half = |r: f64| (pot.eval(r - 1e-9) + pot.eval(r + 1e-9)) / 4.0;
    let mut u = vec![1.0f64; n];
    let mut lambda = 0.0;
    for _ in 0..60 {
        u = solve_tridiagonal(&off, &diag, &off, &u);
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut u {
            *v /= norm;
        }
        let mut q = u[0] * u[0] / (h * h);
        for i in 0..n - 2 {
            let d = u[i + 1] - u[i];
            q += d * d / (h * h);
        }
        let d = u[n - 2] - (2.0f64).sqrt() * u[n - 1];
        q += d * d / (h * h);
        q -= 2.0 / (h * radius) * u[n - 1] * u[n - 1];
        for (i, ui) in u.iter().enumerate().take(n - 1) {
            q += v_half((i + 1) as f64 * h) * ui * ui;
        }
        q += v_half(radius) * u[n - 1] * u[n - 1];
        lambda = q;
    }
    (lambda, u)
}

/// Fully analytic soft-sphere oracle: with k₁ = √(V₀/2 − λ), k₂ = √λ the
/// ground state is sinh(k₁r) inside the sphere and B·sin(k₂r + φ) outside;
/// matching the logarithmic derivative at the sphere edge and imposing
/// u′(R)·R = u(R) leaves one transcendental equation in λ.
fn soft_sphere_neumann_analytic(v0: f64, r0: f64, radius: f64) -> f64 {
    let mismatch = |lambda: f64| -> f64 {
        let k1 = (v0 / 2.0 - lambda).sqrt();
        let k2 = lambda.sqrt();
        let d1 = k1 * (k1 * r0).cosh() / (k1 * r0).sinh();
        let phi = (k2 / d1).atan() - k2 * r0;
        let u = (k2 * radius + phi).sin();
        let du = k2 * (k2 * radius + phi).cos();
        du * radius - u
    };
    let steps = 20_000;
    let hi = v0 / 2.0 - 1e-12;
    let mut prev = mismatch(1e-12);
    let mut bracket = None;
    for k in 1..=steps {
        let lambda = 1e-12 + (hi - 1e-12) * k as f64 / steps as f64;
        let val = mismatch(lambda);
        if prev.signum() != val.signum() {
            bracket = Some((
                1e-12 + (hi - 1e-12) * (k - 1) as f64 / steps as f64,
                lambda,
            ));
            break;
        }
        prev = val;
    }
    let (mut a, mut b) = bracket.expect("no root in (0, V0/2)");
    let fa = mismatch(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mismatch(mid).signum() == fa.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[test]
fn shooting_matches_fd_oracle_to_one_ppm() {
    // soft sphere, N = 50, ℓ = 0.5
    let pot = RadialPotential::soft_sphere(2.0, 1.0).unwrap();
    let radius = 25.0;
    let shooting = solve_neumann(&pot, 50, 0.5, 12_000).unwrap();

    // Richardson pair removes the h² term of the FD eigenvalue
    let (coarse, _) = fd_neumann_lowest(&pot, radius, 6_250);
    let (fine, _) = fd_neumann_lowest(&pot, radius, 12_500);
    let oracle = (4.0 * fine - coarse) / 3.0;

    let rel = ((shooting.lambda - oracle) / oracle).abs();
    assert!(
        rel < 1e-6,
        "λ shooting {} vs FD oracle {} (rel {rel:.2e})",
        shooting.lambda,
        oracle
    );
}

#[test]
fn shooting_matches_analytic_soft_sphere_eigenvalue() {
    let pot = RadialPotential::soft_sphere(2.0, 1.0).unwrap();
    let shooting = solve_neumann(&pot, 50, 0.5, 12_000).unwrap();
    let analytic = soft_sphere_neumann_analytic(2.0, 1.0, 25.0);
    let rel = ((shooting.lambda - analytic) / analytic).abs();
    assert!(
        rel < 1e-8,
        "λ shooting {} vs analytic {} (rel {rel:.2e})",
        shooting.lambda,
        analytic
    );
}

#[test]
fn fd_oracle_free_problem_has_zero_eigenvalue() {
    let pot = RadialPotential::zero();
    let (lambda, _) = fd_neumann_lowest(&pot, 10.0, 4000);
    assert!(lambda.abs() < 1e-9, "free Neumann λ = {lambda}");
}

#[test]
fn ground_profile_matches_fd_eigenvector() {
    let pot = RadialPotential::soft_sphere(2.0, 1.0).unwrap();
    let radius = 25.0;
    let n = 12_500usize;
    let shooting = solve_neumann(&pot, 50, 0.5, 12_000).unwrap();
    let (_, mut u) = fd_neumann_lowest(&pot, radius, n);
    // undo the √2 scaling of the boundary dof and normalize to f(R) = 1
    let h = radius / n as f64;
    let last = u.len() - 1;
    u[last] *= (2.0f64).sqrt();
    let scale = radius / u[last];
    let mut worst = 0.0f64;
    for i in (n / 10..n).step_by(n / 20) {
        let r = i as f64 * h;
        let f_fd = scale * u[i - 1] / r;
        let f_shoot = interp(&shooting.mesh.r, &shooting.f, r);
        worst = worst.max((f_fd - f_shoot).abs());
    }
    assert!(worst < 1e-4, "profiles disagree by {worst}");
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut lo = 0usize;
    let mut hi = xs.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] * (1.0 - w) + ys[hi] * w
}

#[test]
fn both_scattering_length_routes_stay_consistent_under_refinement() {
    let pot = RadialPotential::soft_sphere(2.0, 1.0).unwrap();
    for n in [2000usize, 4000, 8000] {
        let sol = solve_zero_energy(&pot, 5.0, n, 1e-2).unwrap();
        assert!(
            (sol.a_fit - sol.a_integral).abs() < 1e-6,
            "extraction mismatch at n = {n}: {} vs {}",
            sol.a_fit,
            sol.a_integral
        );
    }
}
