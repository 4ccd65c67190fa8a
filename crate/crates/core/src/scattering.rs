//! Radial solvers for the zero-energy scattering problem and the Neumann
//! ground state that defines f_ℓ and w_ℓ = 1 − f_ℓ.
//!
//! Both problems reduce through u = r·f to 1D two-point problems:
//!
//!   zero energy:  u″ = (V/2)·u,       u(0) = 0, exterior u = A(r − 𝔞)
//!   Neumann:      u″ = (V/2 − λ)·u,   u(0) = 0, u′(R)·R = u(R) at R = Nℓ
//!
//! The scattering length comes out twice — from the exterior asymptote and
//! from 8π𝔞 = ∫V f dx — and the two extractions must agree to solver
//! tolerance. V ≥ 0 and compact support are enforced on input.
//!
//! Integration is classical RK4 on a uniform mesh per smooth segment, with
//! the support radius pinned to a mesh node so piecewise-constant potentials
//! lose no accuracy at the jump.

use crate::{linalg, CoreError};

/// Shape catalogue for compactly supported, nonnegative radial potentials.
#[derive(Debug, Clone)]
pub enum PotentialShape {
    Zero,
    /// V(r) = height · 1_{r ≤ radius}
    SoftSphere { height: f64, radius: f64 },
    /// Constant on each shell [radii[k−1], radii[k]) (radii ascending).
    PiecewiseConstant { radii: Vec<f64>, heights: Vec<f64> },
    /// Polynomial in r on each shell: value = Σ_j coeffs[k][j]·r^j.
    PiecewisePolynomial {
        breakpoints: Vec<f64>,
        coeffs: Vec<Vec<f64>>,
    },
    /// Linear interpolation of samples; zero beyond the last point.
    Tabulated { r: Vec<f64>, v: Vec<f64> },
}

/// Radial potential V(r) ≥ 0 supported in [0, support_radius], optionally
/// carrying the Gross-Pitaevskii rescaling V ↦ amp·V(arg·r).
#[derive(Debug, Clone)]
pub struct RadialPotential {
    shape: PotentialShape,
    arg_scale: f64,
    amp_scale: f64,
}

impl RadialPotential {
    pub fn new(shape: PotentialShape) -> Result<Self, CoreError> {
        let pot = Self {
            shape,
            arg_scale: 1.0,
            amp_scale: 1.0,
        };
        pot.validate()?;
        Ok(pot)
    }

    pub fn zero() -> Self {
        Self {
            shape: PotentialShape::Zero,
            arg_scale: 1.0,
            amp_scale: 1.0,
        }
    }

    pub fn soft_sphere(height: f64, radius: f64) -> Result<Self, CoreError> {
        Self::new(PotentialShape::SoftSphere { height, radius })
    }

    /// The scaled potential N²V(N·) whose scattering length is 𝔞/N.
    pub fn gp_scaled(&self, n: usize) -> Self {
        let nf = n as f64;
        Self {
            shape: self.shape.clone(),
            arg_scale: self.arg_scale * nf,
            amp_scale: self.amp_scale * nf * nf,
        }
    }

    pub fn support_radius(&self) -> f64 {
        let base = match &self.shape {
            PotentialShape::Zero => 0.0,
            PotentialShape::SoftSphere { radius, .. } => *radius,
            PotentialShape::PiecewiseConstant { radii, .. } => {
                radii.last().copied().unwrap_or(0.0)
            }
            PotentialShape::PiecewisePolynomial { breakpoints, .. } => {
                breakpoints.last().copied().unwrap_or(0.0)
            }
            PotentialShape::Tabulated { r, .. } => r.last().copied().unwrap_or(0.0),
        };
        base / self.arg_scale
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.amp_scale * self.shape_eval(self.arg_scale * r)
    }

    fn shape_eval(&self, r: f64) -> f64 {
        match &self.shape {
            PotentialShape::Zero => 0.0,
            PotentialShape::SoftSphere { height, radius } => {
                if r <= *radius {
                    *height
                } else {
                    0.0
                }
            }
            PotentialShape::PiecewiseConstant { radii, heights } => {
                for (edge, h) in radii.iter().zip(heights) {
                    if r <= *edge {
                        return *h;
                    }
                }
                0.0
            }
            PotentialShape::PiecewisePolynomial {
                breakpoints,
                coeffs,
            } => {
                for (edge, c) in breakpoints.iter().zip(coeffs) {
                    if r <= *edge {
                        return c.iter().rev().fold(0.0, |acc, &a| acc * r + a);
                    }
                }
                0.0
            }
            PotentialShape::Tabulated { r: rs, v } => {
                if rs.is_empty() || r > *rs.last().unwrap() {
                    return 0.0;
                }
                match rs.iter().position(|&x| x >= r) {
                    Some(0) => v[0],
                    Some(k) => {
                        let t = (r - rs[k - 1]) / (rs[k] - rs[k - 1]);
                        v[k - 1] * (1.0 - t) + v[k] * t
                    }
                    None => 0.0,
                }
            }
        }
    }

    fn validate(&self) -> Result<(), CoreError> {
        let support = self.support_radius();
        if support == 0.0 {
            return Ok(());
        }
        let samples = 4096;
        for i in 0..=samples {
            let r = support * i as f64 / samples as f64;
            let v = self.eval(r);
            if v < 0.0 {
                return Err(CoreError::NegativePotential { r, value: v });
            }
            if !v.is_finite() {
                return Err(CoreError::Invalid(format!("V({r}) is not finite")));
            }
        }
        Ok(())
    }

    pub fn max_value(&self, r_max: f64) -> f64 {
        let samples = 4096;
        (0..=samples)
            .map(|i| self.eval(r_max * i as f64 / samples as f64))
            .fold(0.0, f64::max)
    }
}

/// Uniform-per-segment radial mesh with the potential support pinned to a
/// node. Segments: [0, R₀] and [R₀, r_max] (single segment when R₀ = 0).
#[derive(Debug, Clone)]
pub struct RadialMesh {
    pub r: Vec<f64>,
    /// index of the support radius node (0 when the potential vanishes)
    pub support_node: usize,
}

fn build_mesh(support: f64, r_max: f64, n_points: usize) -> RadialMesh {
    assert!(r_max > 0.0 && n_points >= 16);
    if support <= 0.0 || support >= r_max {
        let h = r_max / n_points as f64;
        let r = (0..=n_points).map(|i| i as f64 * h).collect();
        return RadialMesh { r, support_node: 0 };
    }
    let n_inner = ((n_points as f64 * support / r_max).round() as usize).clamp(8, n_points - 8);
    let n_inner = n_inner + n_inner % 2; // even interval counts for Simpson
    let n_outer = n_points.saturating_sub(n_inner).max(8);
    let n_outer = n_outer + n_outer % 2;
    let mut r = Vec::with_capacity(n_inner + n_outer + 1);
    for i in 0..=n_inner {
        r.push(support * i as f64 / n_inner as f64);
    }
    for i in 1..=n_outer {
        r.push(support + (r_max - support) * i as f64 / n_outer as f64);
    }
    RadialMesh {
        r,
        support_node: n_inner,
    }
}

/// RK4 sweep of u″ = q(r)·u from u(0) = 0, u′(0) = 1 over the mesh.
/// Steps beyond the support node use `q_outer` (the one-sided exterior
/// limit), so a potential jump at the support radius costs no accuracy.
fn integrate_radial(
    mesh: &RadialMesh,
    q_inner: impl Fn(f64) -> f64,
    q_outer: impl Fn(f64) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = mesh.r.len();
    let mut u = vec![0.0; n];
    let mut du = vec![0.0; n];
    du[0] = 1.0;
    for i in 1..n {
        let r0 = mesh.r[i - 1];
        let h = mesh.r[i] - r0;
        let (y0, v0) = (u[i - 1], du[i - 1]);
        let outer = mesh.support_node > 0 && i > mesh.support_node;
        let f = |r: f64, y: f64, v: f64| {
            let q = if outer { q_outer(r) } else { q_inner(r) };
            (v, q * y)
        };
        let (k1y, k1v) = f(r0, y0, v0);
        let (k2y, k2v) = f(r0 + h / 2.0, y0 + h / 2.0 * k1y, v0 + h / 2.0 * k1v);
        let (k3y, k3v) = f(r0 + h / 2.0, y0 + h / 2.0 * k2y, v0 + h / 2.0 * k2v);
        let (k4y, k4v) = f(r0 + h, y0 + h * k3y, v0 + h * k3v);
        u[i] = y0 + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        du[i] = v0 + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (u, du)
}

/// Composite Simpson over one uniform mesh segment [i0, i1] (even count).
fn simpson_segment(mesh: &RadialMesh, values: &[f64], i0: usize, i1: usize) -> f64 {
    if i1 <= i0 {
        return 0.0;
    }
    let h = mesh.r[i0 + 1] - mesh.r[i0];
    linalg::simpson_uniform(&values[i0..=i1], h)
}

/// Zero-energy scattering solution with both 𝔞 extractions.
#[derive(Debug, Clone)]
pub struct ZeroEnergySolution {
    pub mesh: RadialMesh,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// f = u/(A·r) normalized so the exterior is 1 − 𝔞/r
    pub f: Vec<f64>,
    /// 𝔞 from the least-squares exterior fit u = A(r − 𝔞)
    pub a_fit: f64,
    /// 𝔞 from (1/8π)∫V f dx = (1/2)∫V f r² dr
    pub a_integral: f64,
    /// max |u″_FD − (V/2)u| over interior uniform nodes
    pub ode_residual: f64,
}

pub fn solve_zero_energy(
    potential: &RadialPotential,
    r_max: f64,
    n_points: usize,
    residual_tol: f64,
) -> Result<ZeroEnergySolution, CoreError> {
    let support = potential.support_radius();
    if r_max <= support {
        return Err(CoreError::Invalid(format!(
            "r_max = {r_max} must exceed the support radius {support}"
        )));
    }
    let mesh = build_mesh(support, r_max, n_points);
    let (u, du) = integrate_radial(&mesh, |r| potential.eval(r) / 2.0, |_| 0.0);

    // least-squares fit u = A·r + B over the outer 20% of the exterior
    let n = mesh.r.len();
    let ext_start = mesh.support_node;
    let fit_from = ext_start + (n - 1 - ext_start) * 4 / 5;
    let xs = &mesh.r[fit_from..];
    let ys = &u[fit_from..];
    let (slope, intercept) = linalg::fit_line(xs, ys);
    if slope.abs() < 1e-300 {
        return Err(CoreError::Invalid("degenerate exterior solution".into()));
    }
    let a_fit = -intercept / slope;

    // normalize f to the exterior form 1 − 𝔞/r
    let mut f = vec![0.0; n];
    f[0] = du[0] / slope;
    for i in 1..n {
        f[i] = u[i] / (slope * mesh.r[i]);
    }

    // (1/2)∫ V f r² dr over the support, Simpson on the inner segment
    let integrand: Vec<f64> = (0..n)
        .map(|i| potential.eval(mesh.r[i]) * f[i] * mesh.r[i] * mesh.r[i])
        .collect();
    let a_integral = 0.5 * simpson_segment(&mesh, &integrand, 0, mesh.support_node);

    // FD residual of the ODE on each uniform segment interior
    let mut ode_residual = 0.0f64;
    for i in 1..n - 1 {
        if i == mesh.support_node {
            continue; // V jumps here; the stencil spans the kink
        }
        let h1 = mesh.r[i] - mesh.r[i - 1];
        let h2 = mesh.r[i + 1] - mesh.r[i];
        if (h1 - h2).abs() > 1e-12 * h1 {
            continue;
        }
        let upp = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h1 * h1);
        ode_residual = ode_residual.max((upp - potential.eval(mesh.r[i]) / 2.0 * u[i]).abs());
    }
    // scale-free residual gate: the FD stencil itself carries O(h²) error
    let scale = u.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if ode_residual > residual_tol * scale.max(1.0) {
        return Err(CoreError::MeshTooCoarse {
            context: format!(
                "ODE residual {ode_residual:.3e} exceeds {residual_tol:.3e}·{scale:.3e}; refine the mesh"
            ),
        });
    }

    Ok(ZeroEnergySolution {
        mesh,
        u,
        du,
        f,
        a_fit,
        a_integral,
        ode_residual,
    })
}

/// Lowest Neumann eigenpair of −Δ + V/2 on the ball of radius Nℓ.
#[derive(Debug, Clone)]
pub struct NeumannSolution {
    pub mesh: RadialMesh,
    pub lambda: f64,
    /// f_ℓ normalized to f_ℓ(Nℓ) = 1; the extension beyond the ball is 1
    pub f: Vec<f64>,
    /// w_ℓ = 1 − f_ℓ, supported in [0, Nℓ]
    pub w: Vec<f64>,
    /// radial derivative of f_ℓ on the mesh
    pub df: Vec<f64>,
    pub n_particles: usize,
    pub ell: f64,
}

pub fn solve_neumann(
    potential: &RadialPotential,
    n_particles: usize,
    ell: f64,
    n_points: usize,
) -> Result<NeumannSolution, CoreError> {
    let radius = n_particles as f64 * ell;
    let support = potential.support_radius();
    if radius <= support {
        return Err(CoreError::Invalid(format!(
            "Neumann ball radius Nℓ = {radius} must exceed the support radius {support}"
        )));
    }
    let mesh = build_mesh(support, radius, n_points);
    let vmax = potential.max_value(radius);

    if vmax == 0.0 {
        // free problem: λ = 0 and f ≡ 1 exactly
        let n = mesh.r.len();
        return Ok(NeumannSolution {
            lambda: 0.0,
            f: vec![1.0; n],
            w: vec![0.0; n],
            df: vec![0.0; n],
            mesh,
            n_particles,
            ell,
        });
    }

    // Neumann mismatch g(λ) = u′(R)·R − u(R); ground state is the first root
    let shoot = |lambda: f64| -> (Vec<f64>, Vec<f64>, f64) {
        let (u, du) =
            integrate_radial(&mesh, |r| potential.eval(r) / 2.0 - lambda, |_| -lambda);
        let n = u.len() - 1;
        let g = du[n] * radius - u[n];
        (u, du, g)
    };

    let upper = vmax / 2.0;
    let scan = 256;
    let mut bracket = None;
    let mut g_prev = shoot(0.0).2;
    for k in 1..=scan {
        let lambda = upper * k as f64 / scan as f64;
        let g = shoot(lambda).2;
        if g_prev.signum() != g.signum() || g == 0.0 {
            bracket = Some((upper * (k - 1) as f64 / scan as f64, lambda));
            break;
        }
        g_prev = g;
    }
    let (mut lo, mut hi) = bracket.ok_or(CoreError::ShootingBracketFailure { upper })?;
    let g_lo = shoot(lo).2;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g_mid = shoot(mid).2;
        if g_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if g_lo.signum() == g_mid.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON * upper {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let (u, du, _) = shoot(lambda);

    // ground state must be nodeless
    let mut nodes = 0usize;
    for i in 2..u.len() {
        if u[i - 1] != 0.0 && u[i].signum() != u[i - 1].signum() {
            nodes += 1;
        }
    }
    if nodes > 0 {
        return Err(CoreError::EigenvalueCollision { nodes });
    }

    // normalize f(R) = 1, i.e. u(R) = R
    let n = u.len() - 1;
    let scale = radius / u[n];
    let mut f = vec![0.0; u.len()];
    let mut df = vec![0.0; u.len()];
    f[0] = du[0] * scale;
    for i in 1..u.len() {
        let r = mesh.r[i];
        f[i] = scale * u[i] / r;
        df[i] = scale * (du[i] * r - u[i]) / (r * r);
    }
    let w: Vec<f64> = f.iter().map(|&v| 1.0 - v).collect();
    Ok(NeumannSolution {
        mesh,
        lambda,
        f,
        w,
        df,
        n_particles,
        ell,
    })
}

impl NeumannSolution {
    /// Pointwise FD residual ‖(−Δ + V/2 − λ)f‖_∞ on interior uniform nodes,
    /// evaluated through u = r·f.
    pub fn ode_residual(&self, potential: &RadialPotential) -> f64 {
        let r = &self.mesh.r;
        let u: Vec<f64> = r.iter().zip(&self.f).map(|(&ri, &fi)| ri * fi).collect();
        let mut res = 0.0f64;
        for i in 1..r.len() - 1 {
            if i == self.mesh.support_node {
                continue;
            }
            let h1 = r[i] - r[i - 1];
            let h2 = r[i + 1] - r[i];
            if (h1 - h2).abs() > 1e-12 * h1 {
                continue;
            }
            let upp = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h1 * h1);
            res = res.max((-upp + (potential.eval(r[i]) / 2.0 - self.lambda) * u[i]).abs());
        }
        res
    }
}

/// 3D radial Fourier transform ŵ(p) = 4π ∫ w(r)·sinc(pr)·r² dr on the mesh
/// (angular convention e^{−ip·x}).
pub fn radial_fourier(r: &[f64], values: &[f64], p: f64) -> f64 {
    let integrand: Vec<f64> = r
        .iter()
        .zip(values)
        .map(|(&ri, &wi)| wi * sinc(p * ri) * ri * ri)
        .collect();
    4.0 * std::f64::consts::PI * linalg::trapezoid(r, &integrand)
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Smallest constants for the w_ℓ decay bounds
/// w ≤ C/(r+1), |w′| ≤ C/(r²+1), |ŵ(p)| ≤ C/p².
#[derive(Debug, Clone)]
pub struct WEllBounds {
    pub c_decay: f64,
    pub c_gradient: f64,
    pub c_fourier: f64,
}

pub fn w_ell_bounds_check(sol: &NeumannSolution, p_grid: &[f64]) -> WEllBounds {
    let c_decay = sol
        .mesh
        .r
        .iter()
        .zip(&sol.w)
        .map(|(&r, &w)| w.abs() * (r + 1.0))
        .fold(0.0, f64::max);
    let c_gradient = sol
        .mesh
        .r
        .iter()
        .zip(&sol.df)
        .map(|(&r, &df)| df.abs() * (r * r + 1.0))
        .fold(0.0, f64::max);
    let c_fourier = p_grid
        .iter()
        .map(|&p| radial_fourier(&sol.mesh.r, &sol.w, p).abs() * p * p)
        .fold(0.0, f64::max);
    WEllBounds {
        c_decay,
        c_gradient,
        c_fourier,
    }
}

/// Consistency check of the scaling law 𝔞(N²V(N·)) = 𝔞(V)/N by re-solving
/// at scale N.
#[derive(Debug, Clone)]
pub struct GpCouplingCheck {
    pub scaled_a: f64,
    pub reference: f64,
    pub relative_error: f64,
}

pub fn gp_coupling(
    potential: &RadialPotential,
    base: &ZeroEnergySolution,
    n_particles: usize,
    n_points: usize,
) -> Result<GpCouplingCheck, CoreError> {
    let nf = n_particles as f64;
    let scaled = potential.gp_scaled(n_particles);
    let r_max = base.mesh.r.last().unwrap() / nf;
    let sol = solve_zero_energy(&scaled, r_max, n_points, 1e-3)?;
    let reference = base.a_fit / nf;
    let relative_error = if reference == 0.0 {
        sol.a_fit.abs()
    } else {
        ((sol.a_fit - reference) / reference).abs()
    };
    Ok(GpCouplingCheck {
        scaled_a: sol.a_fit,
        reference,
        relative_error,
    })
}

/// Analytic soft-sphere scattering length 𝔞 = R − tanh(kR)/k, k = √(V₀/2).
pub fn soft_sphere_reference(height: f64, radius: f64) -> f64 {
    let k = (height / 2.0).sqrt();
    radius - (k * radius).tanh() / k
}
