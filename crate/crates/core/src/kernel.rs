//! The correlation kernel η built from w_ℓ, a high-pass filter and the
//! condensate profile:
//!
//!   η = Q⊗Q [ −(N·w_ℓ(N·) ∗ χ̌_H)(x−y) · φ(x)φ(y) ],   Q = 1 − |φ⟩⟨φ|.
//!
//! Because the trapped profile φ and the pair function w_ℓ are radial, the
//! rank-one projections collapse analytically: with g the filtered pair
//! profile, c = g ∗ φ² and μ₀ = ⟨φ², c⟩,
//!
//!   η(x, y) = φ(|x|) φ(|y|) · [ −g(|x−y|) + c(|x|) + c(|y|) − μ₀ ].
//!
//! Every Hilbert-Schmidt quantity then reduces to one-dimensional radial
//! quadratures: convolutions of radial functions use the prefix integrals
//! T(u) = ∫₀ᵘ t·q(t) dt through (q ∗ ρ)(r) = (2π/r)∫ s ρ(s) [T(r+s) −
//! T(|r−s|)] ds, and the angular factor x̂·(x−y)/|x−y| in ∇₁η reduces the
//! same way with the t⁰ and t² prefixes.
//!
//! The high-pass filter acts in Fourier space. For radial functions the 3D
//! transform is the sine transform of t·g(t), so the filter is a discrete
//! sine-transform projection on a uniform t-grid: coefficients with
//! |p| < ℓ^{−α} are zeroed. A projection in an orthogonal basis is exactly
//! idempotent on the grid.
//!
//! Two representations exist, matching how the kernel is consumed:
//! - [`RadialKernel`]: the quadrature-backed trapped kernel used for the
//!   norm and scaling sweeps;
//! - [`BoxKernel`]: a materialized kernel matrix on a small periodic box
//!   mesh, used for iterated kernel powers and the mode-space export.

use nalgebra::{DMatrix, DVector};

use crate::gp::{GPState, GpGeometry};
use crate::scattering::NeumannSolution;
use crate::CoreError;

const PI: f64 = std::f64::consts::PI;

/// Build parameters of one kernel.
#[derive(Debug, Clone, Copy)]
pub struct KernelParams {
    pub n_particles: usize,
    pub ell: f64,
    pub alpha: f64,
    /// disable the high-pass filter entirely (χ_H ≡ 1 test mode)
    pub filter_enabled: bool,
}

impl KernelParams {
    pub fn cutoff(&self) -> f64 {
        if self.filter_enabled {
            self.ell.powf(-self.alpha)
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy)]
pub enum GKernel {
    G = 0,
    GSquared = 1,
    DgSquared = 2,
    Dg = 3,
    GDg = 4,
}

/// Filtered pair profile g(t) on a uniform t-grid with the prefix integrals
/// needed by the radial reductions.
#[derive(Debug, Clone)]
pub struct GTab {
    pub t: Vec<f64>,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    step: f64,
    // prefix[q][a](u) = ∫₀ᵘ t^a·q(t) dt, q ∈ {g, g², g′², g′, g·g′}
    prefix: [[Vec<f64>; 3]; 5],
}

impl GTab {
    /// Sample N·w_ℓ(N·), apply the sine-transform high-pass projection,
    /// tabulate the derivative and the prefix integrals.
    pub fn build(
        w: &NeumannSolution,
        params: &KernelParams,
        t_max: f64,
        n_t: usize,
    ) -> Result<Self, CoreError> {
        assert_eq!(w.n_particles, params.n_particles, "w_ℓ built at another N");
        let nf = w.n_particles as f64;
        let step = t_max / n_t as f64;
        let cutoff = params.cutoff();
        // sine modes on the grid: q_k = πk/t_max, k ≤ n_t − 1
        let q_max = PI * (n_t as f64 - 1.0) / t_max;
        if params.filter_enabled && cutoff >= q_max {
            return Err(CoreError::FilterUnresolved {
                context: format!(
                    "cutoff ℓ^(−α) = {cutoff:.3} exceeds the largest grid frequency {q_max:.3}; \
                     need at least {} t-points",
                    (cutoff * t_max / PI).ceil() as usize + 1
                ),
            });
        }

        let t: Vec<f64> = (0..=n_t).map(|j| j as f64 * step).collect();
        // u = t·g₀(t), g₀ = N·w_ℓ(N t); w_ℓ interpolated from the solver mesh
        let mut u: Vec<f64> = t
            .iter()
            .map(|&tj| tj * nf * interp(&w.mesh.r, &w.w, nf * tj))
            .collect();

        if params.filter_enabled {
            let filtered = highpass_project(&u[1..n_t], t_max, cutoff);
            u[1..n_t].copy_from_slice(&filtered);
            u[0] = 0.0;
            u[n_t] = 0.0;
        }

        // g = u/t with the even-function limit at t = 0
        let mut g = vec![0.0; n_t + 1];
        for j in 1..=n_t {
            g[j] = u[j] / t[j];
        }
        g[0] = 2.0 * g[1] - g[2];

        // g′ by centered differences; g is even so g′(0) = 0
        let mut dg = vec![0.0; n_t + 1];
        for j in 1..n_t {
            dg[j] = (g[j + 1] - g[j - 1]) / (2.0 * step);
        }
        dg[n_t] = (g[n_t] - g[n_t - 1]) / step;

        let kernels: [Vec<f64>; 5] = [
            g.clone(),
            g.iter().map(|&v| v * v).collect(),
            dg.iter().map(|&v| v * v).collect(),
            dg.clone(),
            g.iter().zip(&dg).map(|(&a, &b)| a * b).collect(),
        ];
        let mut prefix: [[Vec<f64>; 3]; 5] = Default::default();
        for (q_idx, q) in kernels.iter().enumerate() {
            for (a, slot) in prefix[q_idx].iter_mut().enumerate() {
                let mut acc = vec![0.0; n_t + 1];
                for j in 1..=n_t {
                    let f0 = t[j - 1].powi(a as i32) * q[j - 1];
                    let f1 = t[j].powi(a as i32) * q[j];
                    acc[j] = acc[j - 1] + 0.5 * (f0 + f1) * step;
                }
                *slot = acc;
            }
        }

        Ok(Self {
            t,
            g,
            dg,
            step,
            prefix,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        interp(&self.t, &self.g, t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        interp(&self.t, &self.dg, t)
    }

    /// ∫₀ᵘ t^a·q(t) dt, linearly interpolated between grid prefixes.
    fn prefix_at(&self, q: GKernel, a: usize, u: f64) -> f64 {
        let table = &self.prefix[q as usize][a];
        if u <= 0.0 {
            return 0.0;
        }
        let end = *self.t.last().unwrap();
        if u >= end {
            return *table.last().unwrap();
        }
        let x = u / self.step;
        let j = x.floor() as usize;
        let frac = x - j as f64;
        table[j] * (1.0 - frac) + table[j + 1] * frac
    }

    /// ∫_{t₁}^{t₂} t·q dt
    fn band(&self, q: GKernel, t1: f64, t2: f64) -> f64 {
        self.prefix_at(q, 1, t2) - self.prefix_at(q, 1, t1)
    }

    /// ((r²−s²)·∫t⁰q + ∫t²q) / (2r²s) over [t₁, t₂] — the reduced angular
    /// weight ∫ q(t)·(x̂·û) dμ.
    fn angular_band(&self, q: GKernel, r: f64, s: f64) -> f64 {
        let t1 = (r - s).abs();
        let t2 = r + s;
        let p0 = self.prefix_at(q, 0, t2) - self.prefix_at(q, 0, t1);
        let p2 = self.prefix_at(q, 2, t2) - self.prefix_at(q, 2, t1);
        ((r * r - s * s) * p0 + p2) / (2.0 * r * r * s)
    }
}

/// High-pass projection of interior samples u_1..u_{n−1} on a uniform grid
/// over [0, t_max]: expand in the discrete sine basis, zero every mode with
/// frequency πk/t_max below `cutoff`, transform back. Zeroing coefficients
/// in an orthogonal basis is exactly idempotent on the grid.
pub fn highpass_project(u: &[f64], t_max: f64, cutoff: f64) -> Vec<f64> {
    let n = u.len() + 1;
    let coeffs = dst(u, n);
    let mut kept = vec![0.0; n - 1];
    for (k, &a) in coeffs.iter().enumerate() {
        let q = PI * (k + 1) as f64 / t_max;
        if q >= cutoff {
            kept[k] = a;
        }
    }
    let back = dst(&kept, n);
    back.iter().map(|&v| v * 2.0 / n as f64).collect()
}

/// Discrete sine transform U_k = Σ_{j=1}^{n−1} u_j sin(πjk/n), k = 1..n−1,
/// through a period-2n lookup table. Applying it twice returns n/2 times the
/// input.
fn dst(u: &[f64], n: usize) -> Vec<f64> {
    let table: Vec<f64> = (0..2 * n)
        .map(|m| (PI * m as f64 / n as f64).sin())
        .collect();
    let mut out = vec![0.0; n - 1];
    for (k, slot) in out.iter_mut().enumerate() {
        let kk = k + 1;
        let mut acc = 0.0;
        for (j, &uj) in u.iter().enumerate() {
            let idx = ((j + 1) * kk) % (2 * n);
            acc += uj * table[idx];
        }
        *slot = acc;
    }
    out
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= *xs.last().unwrap() {
        return *ys.last().unwrap();
    }
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

/// Quadrature-backed trapped correlation kernel in the radial representation.
#[derive(Debug, Clone)]
pub struct RadialKernel {
    pub params: KernelParams,
    /// radial grid shared by φ, ρ = φ², c (uniform)
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    rho: Vec<f64>,
    pub c: Vec<f64>,
    pub mu0: f64,
    pub gtab: GTab,
    h: f64,
    g2_rho: Vec<f64>,
    g_rho_c: Vec<f64>,
    /// ∫ ρ c² dx
    m2: f64,
    hs_norm_cached: f64,
}

/// Build the kernel from a Neumann pair solution and a 3D-radial condensate
/// profile. `t_points` sets the filter grid (spanning twice the φ domain).
pub fn build_kernel(
    w: &NeumannSolution,
    phi_state: &GPState,
    params: KernelParams,
    t_points: usize,
) -> Result<RadialKernel, CoreError> {
    let GpGeometry::Radial3d { radius, .. } = phi_state.geometry else {
        return Err(CoreError::Invalid(
            "kernel construction needs a 3D-radial condensate profile".into(),
        ));
    };
    let t_max = 2.0 * radius + 1.0;
    let gtab = GTab::build(w, &params, t_max, t_points)?;

    let r = phi_state.grid.clone();
    let h = r[1] - r[0];
    // renormalize on this grid so 4π Σ r²φ² h = 1 exactly
    let raw: f64 = r
        .iter()
        .zip(&phi_state.phi)
        .map(|(&ri, &p)| ri * ri * p * p)
        .sum::<f64>()
        * 4.0
        * PI
        * h;
    let phi: Vec<f64> = phi_state.phi.iter().map(|&p| p / raw.sqrt()).collect();
    let rho: Vec<f64> = phi.iter().map(|&p| p * p).collect();

    let c = radial_convolution(&gtab, GKernel::G, &r, &rho, h);
    let mu0 = volume_integral(&r, h, |i| rho[i] * c[i]);
    let g2_rho = radial_convolution(&gtab, GKernel::GSquared, &r, &rho, h);
    let rho_c: Vec<f64> = rho.iter().zip(&c).map(|(&a, &b)| a * b).collect();
    let g_rho_c = radial_convolution(&gtab, GKernel::G, &r, &rho_c, h);
    let m2 = volume_integral(&r, h, |i| rho[i] * c[i] * c[i]);

    // ‖η‖² = ⟨ρ, g²∗ρ⟩ − 2∫ρc² + μ₀² (rank-one projection algebra)
    let hs_sq = volume_integral(&r, h, |i| rho[i] * g2_rho[i]) - 2.0 * m2 + mu0 * mu0;

    Ok(RadialKernel {
        params,
        phi,
        rho,
        c,
        mu0,
        gtab,
        h,
        g2_rho,
        g_rho_c,
        m2,
        hs_norm_cached: hs_sq.max(0.0).sqrt(),
        r,
    })
}

fn volume_integral(r: &[f64], h: f64, f: impl Fn(usize) -> f64) -> f64 {
    r.iter()
        .enumerate()
        .map(|(i, &ri)| ri * ri * f(i))
        .sum::<f64>()
        * 4.0
        * PI
        * h
}

/// (q ∗ ρ)(r) on the radial grid via prefix integrals;
/// the r = 0 limit is 4π ∫ s² ρ(s) q(s) ds.
fn radial_convolution(gtab: &GTab, q: GKernel, r: &[f64], rho: &[f64], h: f64) -> Vec<f64> {
    let n = r.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let ri = r[i];
        if ri == 0.0 {
            out[i] = r
                .iter()
                .zip(rho)
                .map(|(&s, &rs)| {
                    let qv = match q {
                        GKernel::G => gtab.value(s),
                        GKernel::GSquared => gtab.value(s).powi(2),
                        GKernel::DgSquared => gtab.derivative(s).powi(2),
                        GKernel::Dg => gtab.derivative(s),
                        GKernel::GDg => gtab.value(s) * gtab.derivative(s),
                    };
                    s * s * rs * qv
                })
                .sum::<f64>()
                * 4.0
                * PI
                * h;
            continue;
        }
        let mut acc = 0.0;
        for (&s, &rs) in r.iter().zip(rho) {
            if s == 0.0 {
                continue;
            }
            acc += s * rs * gtab.band(q, (ri - s).abs(), ri + s);
        }
        out[i] = 2.0 * PI / ri * acc * h;
    }
    out
}

impl RadialKernel {
    /// Interior profile G(r, s, t) with η = φ(r)φ(s)·G.
    pub fn profile(&self, r: f64, s: f64, t: f64) -> f64 {
        -self.gtab.value(t) + interp(&self.r, &self.c, r) + interp(&self.r, &self.c, s) - self.mu0
    }

    /// η(x, y) at explicit 3D points.
    pub fn eval_xy(&self, x: [f64; 3], y: [f64; 3]) -> f64 {
        let r = norm3(x);
        let s = norm3(y);
        let t = norm3([x[0] - y[0], x[1] - y[1], x[2] - y[2]]);
        let phi_r = interp(&self.r, &self.phi, r);
        let phi_s = interp(&self.r, &self.phi, s);
        phi_r * phi_s * self.profile(r, s, t)
    }

    pub fn phi_at(&self, r: f64) -> f64 {
        interp(&self.r, &self.phi, r)
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_cached
    }

    /// ‖η_x‖ at |x| = r.
    pub fn eta_x_norm(&self, r: f64) -> f64 {
        let phi_r = interp(&self.r, &self.phi, r);
        let b = interp(&self.r, &self.c, r) - self.mu0;
        let g2 = interp(&self.r, &self.g2_rho, r);
        let gc = interp(&self.r, &self.g_rho_c, r);
        let c_r = interp(&self.r, &self.c, r);
        // ∫ρ(s)(−g + b + c(s))² ds expanded in the cached convolutions
        let inner = g2 - 2.0 * b * c_r - 2.0 * gc + b * b + 2.0 * b * self.mu0 + self.m2;
        (phi_r * phi_r * inner.max(0.0)).sqrt()
    }

    /// Hilbert-Schmidt norm of ∇₁η via the radial reduction.
    pub fn grad1_hs_norm(&self) -> f64 {
        let n = self.r.len();
        let h = self.h;
        let diff = |vals: &[f64]| -> Vec<f64> {
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                d[i] = (vals[i + 1] - vals[i - 1]) / (2.0 * h);
            }
            d[n - 1] = (vals[n - 1] - vals[n - 2]) / h;
            d
        };
        let dphi = diff(&self.phi);
        let dc = diff(&self.c);
        let dg2_rho = radial_convolution(&self.gtab, GKernel::DgSquared, &self.r, &self.rho, h);

        // A² block: ∫dx [a²(g²∗ρ) − 2aD(g∗ρ) − 2a²(g∗ρc) + D² + 2aDμ₀ + a²m₂]
        // with a = φ′, D = a(c−μ₀) + φc′; B² block: ⟨ρ, g′²∗ρ⟩
        let mut total = 0.0;
        for i in 0..n {
            let a = dphi[i];
            let d = a * (self.c[i] - self.mu0) + self.phi[i] * dc[i];
            let a_sq_terms = a * a * self.g2_rho[i] - 2.0 * a * d * self.c[i]
                - 2.0 * a * a * self.g_rho_c[i]
                + d * d
                + 2.0 * a * d * self.mu0
                + a * a * self.m2;
            let b_sq = self.rho[i] * dg2_rho[i];
            total += self.r[i] * self.r[i] * (a_sq_terms + b_sq);
        }
        total *= 4.0 * PI * h;

        // cross block: −2 ∫dx φ(r)·[ −a·Y(ρ, g·g′) + (a(c−μ₀)+φc′)·Y(ρ, g′)
        //                            + a·Y(ρc, g′) ](r)
        // with Y(dens, q; r) = 2π h Σ_s s² dens(s)·angular_band(q, r, s)
        let y_int = |dens: &dyn Fn(usize) -> f64, q: GKernel, ri: f64| -> f64 {
            if ri == 0.0 {
                return 0.0; // x̂ undefined at the origin; measure-zero node
            }
            let mut acc = 0.0;
            for (j, &s) in self.r.iter().enumerate() {
                if s == 0.0 {
                    continue;
                }
                acc += s * s * dens(j) * self.gtab.angular_band(q, ri, s);
            }
            2.0 * PI * h * acc
        };
        let rho_fn = |j: usize| self.rho[j];
        let rho_c_fn = |j: usize| self.rho[j] * self.c[j];
        let mut cross = 0.0;
        for i in 0..n {
            let ri = self.r[i];
            let a = dphi[i];
            let coeff = a * (self.c[i] - self.mu0) + self.phi[i] * dc[i];
            let y = -a * y_int(&rho_fn, GKernel::GDg, ri)
                + coeff * y_int(&rho_fn, GKernel::Dg, ri)
                + a * y_int(&rho_c_fn, GKernel::Dg, ri);
            cross += ri * ri * self.phi[i] * y;
        }
        cross *= -2.0 * 4.0 * PI * h;

        (total + cross).max(0.0).sqrt()
    }

    /// max over (r, s, t ∈ [|r−s|, r+s]) of |η| / (N φ(r) φ(s)) =
    /// max |G| / N.
    pub fn max_ratio_to_n_phi_phi(&self) -> f64 {
        let nf = self.params.n_particles as f64;
        let samples = 160;
        let r_max = *self.r.last().unwrap();
        let mut best = 0.0f64;
        for i in 0..=samples {
            let r = r_max * i as f64 / samples as f64;
            for j in i..=samples {
                let s = r_max * j as f64 / samples as f64;
                for k in 0..=16 {
                    let t = (s - r) + 2.0 * r * k as f64 / 16.0;
                    best = best.max(self.profile(r, s, t).abs() / nf);
                }
            }
        }
        best
    }

    /// Materialize the kernel on a small periodic box lattice.
    pub fn to_box(&self, points_per_axis: usize, box_len: f64) -> Result<BoxKernel, CoreError> {
        build_box_kernel(&self.gtab, &self.r, &self.phi, points_per_axis, box_len)
    }
}

fn norm3(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Log-log fitted exponents and stability data over an (ℓ, N) kernel sweep.
#[derive(Debug, Clone)]
pub struct KernelBoundsReport {
    /// per-N slope of ln‖η‖ against ln ℓ
    pub norm_slopes: Vec<(usize, f64)>,
    /// per-ℓ slope of ln‖∇₁η‖ against ln N
    pub grad_slopes: Vec<(f64, f64)>,
    /// per-(ℓ, N) fitted constant max|η|/(N|φφ|)
    pub max_ratio: Vec<((f64, usize), f64)>,
    /// per-(ℓ, N) fitted constant sup_x ‖η_x‖/(ℓ^{α/2}|φ(x)|)
    pub eta_x_constant: Vec<((f64, usize), f64)>,
}

/// Fit the bound exponents over kernels built on an (ℓ, N) grid;
/// `kernels[i][j]` corresponds to `(ells[i], ns[j])`.
pub fn verify_kernel_bounds(
    ells: &[f64],
    ns: &[usize],
    kernels: &[Vec<RadialKernel>],
) -> KernelBoundsReport {
    let mut norm_slopes = Vec::new();
    for (j, &n) in ns.iter().enumerate() {
        let xs: Vec<f64> = ells.iter().map(|&l| l.ln()).collect();
        let ys: Vec<f64> = (0..ells.len())
            .map(|i| kernels[i][j].hs_norm().ln())
            .collect();
        norm_slopes.push((n, crate::linalg::fit_line(&xs, &ys).0));
    }
    let mut grad_slopes = Vec::new();
    for (i, &ell) in ells.iter().enumerate() {
        let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = (0..ns.len())
            .map(|j| kernels[i][j].grad1_hs_norm().ln())
            .collect();
        grad_slopes.push((ell, crate::linalg::fit_line(&xs, &ys).0));
    }
    let mut max_ratio = Vec::new();
    let mut eta_x_constant = Vec::new();
    for (i, &ell) in ells.iter().enumerate() {
        for (j, &n) in ns.iter().enumerate() {
            let k = &kernels[i][j];
            max_ratio.push(((ell, n), k.max_ratio_to_n_phi_phi()));
            let scale = ell.powf(k.params.alpha / 2.0);
            let mut best = 0.0f64;
            for step in 1..=24 {
                let r = *k.r.last().unwrap() * step as f64 / 32.0;
                let phi_r = k.phi_at(r);
                if phi_r.abs() > 1e-8 {
                    best = best.max(k.eta_x_norm(r) / (scale * phi_r.abs()));
                }
            }
            eta_x_constant.push(((ell, n), best));
        }
    }
    KernelBoundsReport {
        norm_slopes,
        grad_slopes,
        max_ratio,
        eta_x_constant,
    }
}

/// Materialized kernel matrix on a small periodic box mesh.
#[derive(Debug, Clone)]
pub struct BoxKernel {
    pub points_per_axis: usize,
    pub box_len: f64,
    /// lattice volume element
    pub weight: f64,
    pub phi: DVector<f64>,
    pub eta: DMatrix<f64>,
}

/// Sample a pair profile and a radial condensate onto an m³ periodic lattice
/// and apply the lattice projection Q⊗Q exactly, so ⟨φ, η_x⟩ = 0 holds at
/// machine precision on the lattice.
pub fn build_box_kernel(
    gtab: &GTab,
    phi_r: &[f64],
    phi_vals: &[f64],
    m: usize,
    box_len: f64,
) -> Result<BoxKernel, CoreError> {
    if m < 4 {
        return Err(CoreError::Invalid(
            "box mesh needs at least 4 points per axis".into(),
        ));
    }
    let dim = m * m * m;
    if dim > 4096 {
        return Err(CoreError::DimensionOverflow {
            dim: dim as u128,
            cap: 4096,
        });
    }
    let h = box_len / m as f64;
    let weight = h * h * h;
    let coord = |k: usize| (k as f64 - m as f64 / 2.0) * h;
    let mut positions = Vec::with_capacity(dim);
    for ix in 0..m {
        for iy in 0..m {
            for iz in 0..m {
                positions.push([coord(ix), coord(iy), coord(iz)]);
            }
        }
    }
    let mut phi = DVector::from_iterator(
        dim,
        positions.iter().map(|&p| interp(phi_r, phi_vals, norm3(p))),
    );
    let norm = (phi.iter().map(|&v| v * v).sum::<f64>() * weight).sqrt();
    phi /= norm;

    let min_image = |d: f64| -> f64 {
        let mut v = d % box_len;
        if v > box_len / 2.0 {
            v -= box_len;
        }
        if v < -box_len / 2.0 {
            v += box_len;
        }
        v
    };
    let mut k_mat = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let d = [
                min_image(positions[i][0] - positions[j][0]),
                min_image(positions[i][1] - positions[j][1]),
                min_image(positions[i][2] - positions[j][2]),
            ];
            let val = -gtab.value(norm3(d)) * phi[i] * phi[j];
            k_mat[(i, j)] = val;
            k_mat[(j, i)] = val;
        }
    }
    // lattice projection: η = K − PK − KP + PKP with P = |φ⟩⟨φ|·w
    let k_phi = &k_mat * &phi * weight;
    let mu = phi.dot(&k_phi) * weight;
    let mut eta = k_mat;
    for i in 0..dim {
        for j in 0..dim {
            eta[(i, j)] += -phi[i] * k_phi[j] - k_phi[i] * phi[j] + phi[i] * mu * phi[j];
        }
    }
    Ok(BoxKernel {
        points_per_axis: m,
        box_len,
        weight,
        phi,
        eta,
    })
}

impl BoxKernel {
    pub fn dim(&self) -> usize {
        self.eta.nrows()
    }

    /// discrete ‖η‖_HS
    pub fn hs_norm(&self) -> f64 {
        (self.eta.iter().map(|&v| v * v).sum::<f64>() * self.weight * self.weight).sqrt()
    }

    /// discrete ‖η_x‖ at lattice site x
    pub fn eta_x_norm(&self, x: usize) -> f64 {
        (self.eta.row(x).iter().map(|&v| v * v).sum::<f64>() * self.weight).sqrt()
    }

    /// n-th kernel power η^{(n)} by quadrature composition
    /// (matrix power with the lattice measure).
    pub fn kernel_power(&self, n: usize) -> DMatrix<f64> {
        assert!(n >= 1);
        let mut out = self.eta.clone();
        for _ in 1..n {
            out = &out * &self.eta * self.weight;
        }
        out
    }

    /// HS norm of a kernel power matrix produced by `kernel_power`.
    pub fn power_hs_norm(&self, power: &DMatrix<f64>) -> f64 {
        (power.iter().map(|&v| v * v).sum::<f64>() * self.weight * self.weight).sqrt()
    }

    /// max over lattice sites of |⟨φ, η_x⟩| / ‖η_x‖ (projection residual).
    pub fn orthogonality_residual(&self) -> f64 {
        let overlaps = &self.eta * &self.phi * self.weight;
        let mut worst = 0.0f64;
        for x in 0..self.dim() {
            let nx = self.eta_x_norm(x);
            if nx > 1e-14 {
                worst = worst.max(overlaps[x].abs() / nx);
            }
        }
        worst
    }

    /// Eigenvalues of the kernel as an operator (lattice-weighted),
    /// descending by magnitude.
    pub fn operator_eigenvalues(&self) -> Result<Vec<f64>, CoreError> {
        let op = self.eta.scale(self.weight);
        let eig = op
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(CoreError::EigenFailure)?;
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
        Ok(vals)
    }

    /// Mode-space export: leading eigenvalues of η with at most `hs_loss`
    /// of the squared HS mass discarded, capped at `max_modes`. The exported
    /// symmetric matrix is diagonal in the kernel eigenbasis.
    pub fn mode_export(&self, max_modes: usize, hs_loss: f64) -> Result<ModeKernel, CoreError> {
        let vals = self.operator_eigenvalues()?;
        let total: f64 = vals.iter().map(|v| v * v).sum();
        let mut kept = Vec::new();
        let mut kept_mass = 0.0;
        for &v in &vals {
            if kept.len() >= max_modes {
                break;
            }
            kept.push(v);
            kept_mass += v * v;
            if total > 0.0 && 1.0 - kept_mass / total <= hs_loss {
                break;
            }
        }
        let discarded = if total > 0.0 {
            1.0 - kept_mass / total
        } else {
            0.0
        };
        Ok(ModeKernel {
            eigenvalues: kept,
            discarded_hs_fraction: discarded,
        })
    }
}

/// Kernel compressed onto its leading eigenmodes: η_pq = δ_pq·λ_p.
#[derive(Debug, Clone)]
pub struct ModeKernel {
    pub eigenvalues: Vec<f64>,
    pub discarded_hs_fraction: f64,
}

impl ModeKernel {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues.clone()))
    }

    pub fn hs_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dst_is_involutive_up_to_scale() {
        let n = 64;
        let u: Vec<f64> = (1..n).map(|j| ((j * j) as f64 * 0.01).sin()).collect();
        let forward = dst(&u, n);
        let back = dst(&forward, n);
        for (j, &uj) in u.iter().enumerate() {
            let rec = back[j] * 2.0 / n as f64;
            assert!((rec - uj).abs() < 1e-12, "DST inversion failed at {j}");
        }
    }

    #[test]
    fn interp_endpoints_and_midpoint() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [1.0, 3.0, 2.0];
        assert_eq!(interp(&xs, &ys, -1.0), 1.0);
        assert_eq!(interp(&xs, &ys, 5.0), 2.0);
        assert!((interp(&xs, &ys, 0.5) - 2.0).abs() < 1e-15);
    }
}
