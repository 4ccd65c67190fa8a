//! Experiment execution: one function per experiment kind, each returning a
//! [`Report`] with machine-readable detail, CSV sweep tables and PASS/FAIL
//! checks. Sweep points run on a rayon pool; results are collected in grid
//! order and all randomness is seeded per point, so reports are
//! byte-reproducible at any thread count.

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use std::path::Path;

use bosegas_core::bogoliubov::{
    approximate_action_check, build_generator, commutator_remainder_norm, cubic_cancellation_probe,
    fitted_exponent, gronwall_conjugation_check, two_mode_pair_kernel,
};
use bosegas_core::fock::{build_basis, number_operator};
use bosegas_core::gp::{decay_check, minimize_gp, GPState, GpGeometry};
use bosegas_core::kernel::{build_kernel, KernelParams, ModeKernel, RadialKernel};
use bosegas_core::meanfield::{
    assemble_mf_hamiltonian, bootstrap_verification, commutator_identity_check, moment_report,
    spectral_window, tail_probability, verify_coercivity, TorusModel,
};
use bosegas_core::scattering::{
    gp_coupling, solve_neumann, solve_zero_energy, w_ell_bounds_check, NeumannSolution,
    RadialMesh,
};
use nalgebra::DVector;

use crate::config::{
    BogoliubovSection, ExperimentConfig, ExperimentKind, GeometrySpec, GpSection, KernelSection,
    MeanfieldSection, ScatteringSection, TrapSpec,
};
use crate::report::{Cell, Check, CsvTable, Json, Report};

pub fn run(config: &ExperimentConfig, out_dir: &Path, seed: u64) -> Result<Report> {
    match config.kind {
        ExperimentKind::MeanfieldMoments => {
            let section = config.meanfield.as_ref().ok_or_else(missing("meanfield"))?;
            run_meanfield(section, seed)
        }
        ExperimentKind::Scattering => {
            let section = config.scattering.as_ref().ok_or_else(missing("scattering"))?;
            run_scattering(section, seed)
        }
        ExperimentKind::Gp => {
            let section = config.gp.as_ref().ok_or_else(missing("gp"))?;
            run_gp(section, seed)
        }
        ExperimentKind::KernelBounds => {
            let section = config.kernel.as_ref().ok_or_else(missing("kernel"))?;
            run_kernel_bounds(section, seed)
        }
        ExperimentKind::BogoliubovChecks => {
            let section = config.bogoliubov.as_ref().ok_or_else(missing("bogoliubov"))?;
            run_bogoliubov(section, seed)
        }
        ExperimentKind::FullPipeline => run_pipeline(config, out_dir, seed),
    }
}

fn missing(section: &'static str) -> impl Fn() -> anyhow::Error {
    move || anyhow!("config section `{section}` is required for this experiment kind")
}

// ---------------------------------------------------------------- meanfield

struct MeanfieldPoint {
    n: usize,
    moments: Vec<f64>,
    coercivity: f64,
    markov_excess: f64,
    tails: Vec<f64>,
    fitted_rate: f64,
    bootstrap_margin: f64,
    integral_residual: f64,
}

fn run_meanfield(section: &MeanfieldSection, seed: u64) -> Result<Report> {
    let v_hat = section.v_hat.to_core().map_err(|e| anyhow!(e))?;
    let kappas = &section.kappa_grid;

    let points: Vec<MeanfieldPoint> = section
        .n_sweep
        .par_iter()
        .map(|&n| -> Result<MeanfieldPoint> {
            let model = TorusModel::new(section.dimension, section.max_wavenumber, v_hat.clone(), n)
                .map_err(|e| anyhow!(e.to_string()))?;
            let basis = build_basis(model.num_modes(), n, false).map_err(to_anyhow)?;
            let sector = basis.sector_indices(n);
            let h = assemble_mf_hamiltonian(&model, &basis)
                .map_err(to_anyhow)?
                .restrict(&sector);
            let counting = number_operator(&basis, None).restrict(&sector);
            let window = spectral_window(&h, section.zeta).map_err(to_anyhow)?;

            let report = moment_report(&window, kappas, &counting).map_err(to_anyhow)?;
            let coercivity = verify_coercivity(&model, &h, &counting).map_err(to_anyhow)?;

            // Markov bound for every window vector, every κ, every tail index
            let mut markov_excess = f64::NEG_INFINITY;
            let max_count = counting
                .iter_entries()
                .map(|(_, _, v)| v.re)
                .fold(0.0f64, f64::max) as usize;
            for psi in &window.vectors {
                for &kappa in kappas {
                    let moment: f64 = (0..counting.nrows())
                        .map(|i| psi[i].norm_sqr() * (kappa * counting.get(i, i).re).exp())
                        .sum();
                    for tail_n in 0..=max_count + 1 {
                        let tail = tail_probability(psi, &counting, tail_n);
                        let bound = (-kappa * tail_n as f64).exp() * moment;
                        markov_excess = markov_excess.max(tail - bound);
                    }
                }
            }

            let bootstrap =
                bootstrap_verification(&window, &counting, kappas).map_err(to_anyhow)?;
            let min_margin = bootstrap
                .rows
                .iter()
                .map(|r| r.margin)
                .fold(f64::INFINITY, f64::min);

            Ok(MeanfieldPoint {
                n,
                moments: report.sup_moments,
                coercivity,
                markov_excess,
                tails: report.tail,
                fitted_rate: report.fitted_rate,
                bootstrap_margin: min_margin,
                integral_residual: bootstrap.integral_identity_residual,
            })
        })
        .collect::<Result<_>>()?;

    // commutator identity at the smallest sweep point
    let n0 = *section.n_sweep.iter().min().unwrap();
    let model = TorusModel::new(section.dimension, section.max_wavenumber, v_hat.clone(), n0)
        .map_err(to_anyhow)?;
    let basis = build_basis(model.num_modes(), n0, false).map_err(to_anyhow)?;
    let h_full = assemble_mf_hamiltonian(&model, &basis).map_err(to_anyhow)?;
    let commutator =
        commutator_identity_check(&model, &basis, &h_full, section.commutator_kappa)
            .map_err(to_anyhow)?;

    let mut checks = Vec::new();
    for (ki, &kappa) in kappas.iter().enumerate() {
        let values: Vec<f64> = points.iter().map(|p| p.moments[ki]).collect();
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        checks.push(Check::upper(
            &format!("moment-spread-kappa-{kappa}"),
            (max - min) / min,
            section.moment_spread_tolerance,
        ));
        checks.push(Check::upper(
            &format!("moment-growth-kappa-{kappa}"),
            max / values[0],
            2.0,
        ));
        checks.push(Check::lower(
            &format!("moment-floor-kappa-{kappa}"),
            min,
            1.0 - 1e-12,
        ));
    }
    let coercs: Vec<f64> = points.iter().map(|p| p.coercivity).collect();
    let cmax = coercs.iter().cloned().fold(f64::MIN, f64::max);
    let cmin = coercs.iter().cloned().fold(f64::MAX, f64::min).max(1e-12);
    checks.push(Check::upper(
        "coercivity-constant-ratio",
        cmax / cmin,
        section.coercivity_ratio_tolerance,
    ));
    let markov_worst = points
        .iter()
        .map(|p| p.markov_excess)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::upper("markov-tail-excess", markov_worst, 0.0));
    checks.push(Check::upper(
        "commutator-identity-residual",
        commutator.residual,
        section.commutator_tolerance,
    ));
    let integral_worst = points
        .iter()
        .map(|p| p.integral_residual)
        .fold(0.0f64, f64::max);
    checks.push(Check::upper(
        "bootstrap-integral-identity",
        integral_worst,
        1e-6,
    ));
    let margin_worst = points
        .iter()
        .map(|p| p.bootstrap_margin)
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::lower("bootstrap-inequality-margin", margin_worst, 0.0));

    let mut moments_csv = CsvTable::new("moments", &["n_particles", "kappa", "sup_moment"]);
    for p in &points {
        for (ki, &kappa) in kappas.iter().enumerate() {
            moments_csv.push_row(vec![
                Cell::Int(p.n as i64),
                Cell::F64(kappa),
                Cell::F64(p.moments[ki]),
            ]);
        }
    }
    let mut tails_csv = CsvTable::new("tails", &["n_particles", "n", "tail_probability"]);
    for p in &points {
        for (i, &t) in p.tails.iter().enumerate() {
            tails_csv.push_row(vec![
                Cell::Int(p.n as i64),
                Cell::Int(i as i64),
                Cell::F64(t),
            ]);
        }
    }
    let mut coercivity_csv = CsvTable::new("coercivity", &["n_particles", "fitted_c"]);
    for p in &points {
        coercivity_csv.push_row(vec![Cell::Int(p.n as i64), Cell::F64(p.coercivity)]);
    }

    let mut detail = Json::object();
    detail.push("kappa_grid", Json::floats(kappas));
    let mut per_n = Vec::new();
    for p in &points {
        let mut obj = Json::object();
        obj.push("n_particles", Json::Int(p.n as i64));
        obj.push("sup_moments", Json::floats(&p.moments));
        obj.push("coercivity_c", Json::F64(p.coercivity));
        obj.push("markov_excess", Json::F64(p.markov_excess));
        obj.push("tail_fitted_rate", Json::F64(p.fitted_rate));
        obj.push("bootstrap_margin", Json::F64(p.bootstrap_margin));
        per_n.push(obj);
    }
    detail.push("sweep", Json::Array(per_n));
    detail.push("commutator_residual", Json::F64(commutator.residual));

    Ok(Report {
        kind: "meanfield-moments".into(),
        seed,
        detail,
        tables: vec![moments_csv, tails_csv, coercivity_csv],
        checks,
    })
}

// --------------------------------------------------------------- scattering

fn run_scattering(section: &ScatteringSection, seed: u64) -> Result<Report> {
    let potential = section.potential.to_core().map_err(|e| anyhow!(e))?;
    let zero = solve_zero_energy(
        &potential,
        section.r_max,
        section.mesh_points,
        section.residual_tolerance,
    )
    .map_err(to_anyhow)?;

    let neumann = solve_neumann(
        &potential,
        section.neumann_n_particles,
        section.neumann_ell,
        section.neumann_mesh_points,
    )
    .map_err(to_anyhow)?;

    let p_grid: Vec<f64> = (1..=section.p_grid_points)
        .map(|k| section.p_grid_max * k as f64 / section.p_grid_points as f64)
        .collect();
    let bounds = w_ell_bounds_check(&neumann, &p_grid);

    let mut checks = vec![Check::upper(
        "scattering-length-extraction-agreement",
        (zero.a_fit - zero.a_integral).abs(),
        section.extraction_tolerance,
    )];
    if let crate::config::PotentialSpec::SoftSphere { height, radius } = section.potential {
        let exact = bosegas_core::scattering::soft_sphere_reference(height, radius);
        checks.push(Check::upper(
            "scattering-length-vs-analytic",
            ((zero.a_fit - exact) / exact).abs(),
            1e-6,
        ));
    }
    for (name, value) in [
        ("w-decay-constant", bounds.c_decay),
        ("w-gradient-constant", bounds.c_gradient),
        ("w-fourier-constant", bounds.c_fourier),
    ] {
        checks.push(Check::upper(name, value, f64::MAX));
    }
    let mut scaling_rows = Vec::new();
    for &n in &section.gp_scaling_n {
        let check = gp_coupling(&potential, &zero, n, section.mesh_points).map_err(to_anyhow)?;
        checks.push(Check::upper(
            &format!("gp-scaling-rel-err-n-{n}"),
            check.relative_error,
            1e-4,
        ));
        scaling_rows.push((n, check));
    }

    let mut zero_csv = CsvTable::new("zero_energy", &["r", "f"]);
    for (r, f) in zero.mesh.r.iter().zip(&zero.f) {
        zero_csv.push_row(vec![Cell::F64(*r), Cell::F64(*f)]);
    }
    let mut w_csv = CsvTable::new("w_ell", &["r", "f_ell", "w_ell", "df_ell"]);
    for i in 0..neumann.mesh.r.len() {
        w_csv.push_row(vec![
            Cell::F64(neumann.mesh.r[i]),
            Cell::F64(neumann.f[i]),
            Cell::F64(neumann.w[i]),
            Cell::F64(neumann.df[i]),
        ]);
    }

    let mut detail = Json::object();
    detail.push("a_fit", Json::F64(zero.a_fit));
    detail.push("a_integral", Json::F64(zero.a_integral));
    detail.push("ode_residual", Json::F64(zero.ode_residual));
    detail.push("neumann_lambda", Json::F64(neumann.lambda));
    detail.push("neumann_n_particles", Json::Int(neumann.n_particles as i64));
    detail.push("neumann_ell", Json::F64(neumann.ell));
    detail.push("w_decay_constant", Json::F64(bounds.c_decay));
    detail.push("w_gradient_constant", Json::F64(bounds.c_gradient));
    detail.push("w_fourier_constant", Json::F64(bounds.c_fourier));
    let mut scaling = Vec::new();
    for (n, check) in &scaling_rows {
        let mut obj = Json::object();
        obj.push("n", Json::Int(*n as i64));
        obj.push("scaled_a", Json::F64(check.scaled_a));
        obj.push("reference", Json::F64(check.reference));
        obj.push("relative_error", Json::F64(check.relative_error));
        scaling.push(obj);
    }
    detail.push("gp_scaling", Json::Array(scaling));

    Ok(Report {
        kind: "scattering".into(),
        seed,
        detail,
        tables: vec![zero_csv, w_csv],
        checks,
    })
}

// ----------------------------------------------------------------------- gp

fn run_gp(section: &GpSection, seed: u64) -> Result<Report> {
    let geometry = section.geometry.to_core();
    let trap = section.trap.to_core();
    let state = minimize_gp(
        geometry,
        &trap,
        section.scattering_length,
        section.tolerance,
        section.max_iterations,
    )
    .map_err(to_anyhow)?;

    let mut checks = vec![
        Check::upper("gp-equation-residual", state.residual, section.tolerance),
        Check::upper(
            "eps-gp-extraction-agreement",
            (state.eps_gp - state.eps_gp_identity).abs(),
            section.eps_agreement_tolerance,
        ),
    ];
    // the noninteracting harmonic 3D case has the exact chemical potential 3
    if section.scattering_length == 0.0 {
        if let (GeometrySpec::Radial3d { .. }, TrapSpec::Harmonic { strength }) =
            (&section.geometry, &section.trap)
        {
            if (strength - 1.0).abs() < 1e-14 {
                checks.push(Check::upper(
                    "harmonic-radial-eps-relative-error",
                    ((state.eps_gp - 3.0) / 3.0).abs(),
                    1e-4,
                ));
            }
        }
    }
    let mut decay_rows = Vec::new();
    for &nu in &section.decay_nu {
        let constants = decay_check(&state, nu);
        checks.push(Check::upper(
            &format!("decay-constant-finite-nu-{nu}"),
            constants.max(),
            f64::MAX,
        ));
        decay_rows.push((nu, constants));
    }
    // positivity of the converged profile on the interior
    let interior_min = state.phi[1..state.phi.len() - 1]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::lower("minimizer-positivity", interior_min, 0.0));

    let mut phi_csv = CsvTable::new("phi", &["x", "phi"]);
    for (x, p) in state.grid.iter().zip(&state.phi) {
        phi_csv.push_row(vec![Cell::F64(*x), Cell::F64(*p)]);
    }

    let mut detail = Json::object();
    detail.push("energy", Json::F64(state.energy));
    detail.push("eps_gp", Json::F64(state.eps_gp));
    detail.push("eps_gp_identity", Json::F64(state.eps_gp_identity));
    detail.push("residual", Json::F64(state.residual));
    detail.push("iterations", Json::Int(state.iterations as i64));
    detail.push("coupling_a", Json::F64(state.coupling_a));
    let mut decay = Vec::new();
    for (nu, constants) in &decay_rows {
        let mut obj = Json::object();
        obj.push("nu", Json::F64(*nu));
        obj.push("c_phi", Json::F64(constants.c_phi));
        obj.push("c_grad", Json::F64(constants.c_grad));
        obj.push("c_lap", Json::F64(constants.c_lap));
        decay.push(obj);
    }
    detail.push("decay_constants", Json::Array(decay));

    Ok(Report {
        kind: "gp".into(),
        seed,
        detail,
        tables: vec![phi_csv],
        checks,
    })
}

// ------------------------------------------------------------ kernel bounds

fn run_kernel_bounds(section: &KernelSection, seed: u64) -> Result<Report> {
    let (kernels, state) = build_kernel_grid(section)?;
    let report =
        bosegas_core::kernel::verify_kernel_bounds(&section.ell_grid, &section.n_grid, &kernels);

    let mut checks = Vec::new();
    for &(n, slope) in &report.norm_slopes {
        checks.push(Check::lower(
            &format!("hs-norm-ell-exponent-n-{n}"),
            slope,
            section.norm_slope_floor,
        ));
    }
    for &(ell, slope) in &report.grad_slopes {
        checks.push(Check::upper(
            &format!("grad-norm-n-exponent-ell-{ell}"),
            slope,
            section.grad_slope_cap,
        ));
    }
    // max|η|/(N φφ) within ±stability of its mean across N, for each ℓ
    for &ell in &section.ell_grid {
        let values: Vec<f64> = report
            .max_ratio
            .iter()
            .filter(|((l, _), _)| *l == ell)
            .map(|&(_, v)| v)
            .collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let worst = values
            .iter()
            .map(|v| (v - mean).abs() / mean)
            .fold(0.0f64, f64::max);
        checks.push(Check::upper(
            &format!("max-ratio-stability-ell-{ell}"),
            worst,
            section.max_ratio_stability,
        ));
    }

    // ‖η_x‖ ≤ C·ℓ^(α/2)·|φ(x)| with one constant across the whole sweep
    let eta_x: Vec<f64> = report.eta_x_constant.iter().map(|&(_, v)| v).collect();
    let cmax = eta_x.iter().cloned().fold(f64::MIN, f64::max);
    let cmin = eta_x.iter().cloned().fold(f64::MAX, f64::min).max(1e-300);
    checks.push(Check::upper("eta-x-constant-uniformity", cmax / cmin, 1.5));

    // mode export from the mid-grid kernel
    let mid_kernel = &kernels[section.ell_grid.len() / 2][0];
    let boxed = mid_kernel
        .to_box(section.box_points, section.box_len)
        .map_err(to_anyhow)?;
    let export = boxed
        .mode_export(boxed.dim(), section.export_hs_loss)
        .map_err(to_anyhow)?;
    checks.push(Check::upper(
        "mode-export-discarded-hs-fraction",
        export.discarded_hs_fraction,
        section.export_hs_loss,
    ));

    let mut table = CsvTable::new(
        "kernel_bounds",
        &["ell", "n_particles", "hs_norm", "grad_hs_norm", "max_ratio", "eta_x_constant"],
    );
    for (i, &ell) in section.ell_grid.iter().enumerate() {
        for (j, &n) in section.n_grid.iter().enumerate() {
            let k = &kernels[i][j];
            let max_ratio = report
                .max_ratio
                .iter()
                .find(|((l, m), _)| *l == ell && *m == n)
                .map(|&(_, v)| v)
                .unwrap();
            let eta_x = report
                .eta_x_constant
                .iter()
                .find(|((l, m), _)| *l == ell && *m == n)
                .map(|&(_, v)| v)
                .unwrap();
            table.push_row(vec![
                Cell::F64(ell),
                Cell::Int(n as i64),
                Cell::F64(k.hs_norm()),
                Cell::F64(k.grad1_hs_norm()),
                Cell::F64(max_ratio),
                Cell::F64(eta_x),
            ]);
        }
    }

    let mut detail = Json::object();
    detail.push("gp_energy", Json::F64(state.energy));
    let mut slopes = Vec::new();
    for &(n, slope) in &report.norm_slopes {
        let mut obj = Json::object();
        obj.push("n_particles", Json::Int(n as i64));
        obj.push("hs_norm_ell_exponent", Json::F64(slope));
        slopes.push(obj);
    }
    detail.push("norm_slopes", Json::Array(slopes));
    let mut gslopes = Vec::new();
    for &(ell, slope) in &report.grad_slopes {
        let mut obj = Json::object();
        obj.push("ell", Json::F64(ell));
        obj.push("grad_norm_n_exponent", Json::F64(slope));
        gslopes.push(obj);
    }
    detail.push("grad_slopes", Json::Array(gslopes));
    detail.push("export", mode_kernel_json(&export));

    Ok(Report {
        kind: "kernel-bounds".into(),
        seed,
        detail,
        tables: vec![table],
        checks,
    })
}

fn build_kernel_grid(section: &KernelSection) -> Result<(Vec<Vec<RadialKernel>>, GPState)> {
    let potential = section.potential.to_core().map_err(|e| anyhow!(e))?;
    let geometry = section.geometry.to_core();
    let trap = section.trap.to_core();
    let state = minimize_gp(
        geometry,
        &trap,
        section.scattering_length,
        section.gp_tolerance,
        400_000,
    )
    .map_err(to_anyhow)?;

    let grid: Vec<(usize, usize)> = (0..section.ell_grid.len())
        .flat_map(|i| (0..section.n_grid.len()).map(move |j| (i, j)))
        .collect();
    let flat: Vec<RadialKernel> = grid
        .par_iter()
        .map(|&(i, j)| -> Result<RadialKernel> {
            let ell = section.ell_grid[i];
            let n = section.n_grid[j];
            let w = solve_neumann(&potential, n, ell, section.neumann_mesh_points)
                .map_err(to_anyhow)?;
            build_kernel(
                &w,
                &state,
                KernelParams {
                    n_particles: n,
                    ell,
                    alpha: section.alpha,
                    filter_enabled: true,
                },
                section.t_points,
            )
            .map_err(to_anyhow)
        })
        .collect::<Result<_>>()?;
    let mut kernels: Vec<Vec<RadialKernel>> = Vec::new();
    let mut iter = flat.into_iter();
    for _ in 0..section.ell_grid.len() {
        let mut row = Vec::new();
        for _ in 0..section.n_grid.len() {
            row.push(iter.next().unwrap());
        }
        kernels.push(row);
    }
    Ok((kernels, state))
}

fn mode_kernel_json(export: &ModeKernel) -> Json {
    let mut obj = Json::object();
    obj.push("eigenvalues", Json::floats(&export.eigenvalues));
    obj.push(
        "discarded_hs_fraction",
        Json::F64(export.discarded_hs_fraction),
    );
    obj.push("hs_norm", Json::F64(export.hs_norm()));
    obj
}

// ----------------------------------------------------------- bogoliubov

fn run_bogoliubov(section: &BogoliubovSection, seed: u64) -> Result<Report> {
    let eta = two_mode_pair_kernel(section.eta_hs);
    run_bogoliubov_with_eta(section, &eta, "bogoliubov-checks", seed)
}

fn run_bogoliubov_with_eta(
    section: &BogoliubovSection,
    eta: &nalgebra::DMatrix<f64>,
    kind: &str,
    seed: u64,
) -> Result<Report> {
    let modes = eta.nrows();
    let basis = build_basis(modes + 1, section.particle_cap, true).map_err(to_anyhow)?;
    let f = DVector::from_iterator(modes, (0..modes).map(|k| 1.0 / (k as f64 + 1.0)));

    // remainder norms across the N sweep
    let remainder: Vec<(usize, f64)> = section
        .total_n_sweep
        .par_iter()
        .map(|&n| -> Result<(usize, f64)> {
            let gen = build_generator(eta, &basis, n).map_err(to_anyhow)?;
            let data = approximate_action_check(
                &gen,
                &f,
                section.series_order,
                section.probes,
                Some(section.probe_sector_cap),
                seed ^ n as u64,
                1e-9,
            )
            .map_err(to_anyhow)?;
            Ok((n, data.remainder_norm))
        })
        .collect::<Result<_>>()?;
    let ns: Vec<f64> = remainder.iter().map(|&(n, _)| n as f64).collect();
    let norms: Vec<f64> = remainder.iter().map(|&(_, v)| v).collect();
    let n_exponent = fitted_exponent(&ns, &norms);

    // Gronwall constant and its stability under cap doubling
    let n_ref = *section.total_n_sweep.iter().max().unwrap();
    let gen = build_generator(eta, &basis, n_ref).map_err(to_anyhow)?;
    let gronwall = gronwall_conjugation_check(&gen, section.kappa).map_err(to_anyhow)?;
    let doubled_basis =
        build_basis(modes + 1, 2 * section.particle_cap, true).map_err(to_anyhow)?;
    let gen_doubled = build_generator(eta, &doubled_basis, 2 * n_ref).map_err(to_anyhow)?;
    let gronwall_doubled =
        gronwall_conjugation_check(&gen_doubled, section.kappa).map_err(to_anyhow)?;
    let gronwall_drift = ((gronwall_doubled - gronwall) / gronwall).abs();

    // cubic cancellation on a seeded probe vector
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xc0ffee);
    let h_vec = DVector::from_fn(modes, |_, _| rng.random_range(-1.0..1.0));
    let cancellation = cubic_cancellation_probe(&gen, &h_vec, section.series_order);

    // [e^{κ𝒩}, d] scaling in κ (fixed mid-sweep N) and in N (fixed κ)
    let kappa_norms: Vec<f64> = section
        .kappa_grid
        .par_iter()
        .map(|&kappa| -> Result<f64> {
            commutator_remainder_norm(
                &gen,
                &f,
                kappa,
                section.series_order,
                section.probes,
                Some(section.probe_sector_cap),
                seed ^ 0x5eed,
            )
            .map_err(to_anyhow)
        })
        .collect::<Result<_>>()?;
    let kappa_exponent = fitted_exponent(&section.kappa_grid, &kappa_norms);
    let comm_norms: Vec<f64> = section
        .total_n_sweep
        .par_iter()
        .map(|&n| -> Result<f64> {
            let gen = build_generator(eta, &basis, n).map_err(to_anyhow)?;
            commutator_remainder_norm(
                &gen,
                &f,
                section.kappa,
                section.series_order,
                section.probes,
                Some(section.probe_sector_cap),
                seed ^ 0x7ab1e ^ n as u64,
            )
            .map_err(to_anyhow)
        })
        .collect::<Result<_>>()?;
    let comm_n_exponent = fitted_exponent(&ns, &comm_norms);

    let checks = vec![
        Check::upper(
            "remainder-n-exponent-deviation",
            (n_exponent + 1.0).abs(),
            section.exponent_window,
        ),
        Check::upper("gronwall-constant", gronwall, section.gronwall_cap),
        Check::lower("gronwall-constant-floor", gronwall, 1.0 - 1e-9),
        Check::upper(
            "gronwall-cap-doubling-drift",
            gronwall_drift,
            section.gronwall_stability,
        ),
        Check::upper("cubic-cancellation-residual", cancellation, 1e-12),
        Check::upper(
            "commutator-kappa-exponent-deviation",
            (kappa_exponent - 1.0).abs(),
            section.exponent_window,
        ),
        Check::upper(
            "commutator-n-exponent-deviation",
            (comm_n_exponent + 1.0).abs(),
            section.exponent_window,
        ),
    ];

    let mut remainder_csv = CsvTable::new("remainder", &["total_n", "remainder_norm"]);
    for &(n, v) in &remainder {
        remainder_csv.push_row(vec![Cell::Int(n as i64), Cell::F64(v)]);
    }
    let mut comm_csv = CsvTable::new("commutator_remainder", &["kappa", "norm"]);
    for (&k, &v) in section.kappa_grid.iter().zip(&kappa_norms) {
        comm_csv.push_row(vec![Cell::F64(k), Cell::F64(v)]);
    }

    let mut detail = Json::object();
    detail.push("eta_hs_norm", Json::F64(gen.hs_norm));
    detail.push("remainder_n_exponent", Json::F64(n_exponent));
    detail.push("gronwall_constant", Json::F64(gronwall));
    detail.push("gronwall_constant_doubled_cap", Json::F64(gronwall_doubled));
    detail.push("cubic_cancellation_residual", Json::F64(cancellation));
    detail.push("commutator_kappa_exponent", Json::F64(kappa_exponent));
    detail.push("commutator_n_exponent", Json::F64(comm_n_exponent));

    Ok(Report {
        kind: kind.into(),
        seed,
        detail,
        tables: vec![remainder_csv, comm_csv],
        checks,
    })
}

// ------------------------------------------------------------ full pipeline

/// scattering → gp → kernel → bogoliubov with intermediate artifacts on
/// disk; every stage reads its input back from the artifact files, so each
/// stage is independently re-runnable from a previous stage's output.
fn run_pipeline(config: &ExperimentConfig, out_dir: &Path, seed: u64) -> Result<Report> {
    let scattering = config.scattering.as_ref().ok_or_else(missing("scattering"))?;
    let gp = config.gp.as_ref().ok_or_else(missing("gp"))?;
    let kernel = config.kernel.as_ref().ok_or_else(missing("kernel"))?;
    let bogoliubov = config.bogoliubov.as_ref().ok_or_else(missing("bogoliubov"))?;
    std::fs::create_dir_all(out_dir)?;

    // stage 1: scattering, artifact w_ell.csv
    let stage1 = run_scattering(scattering, seed)?;
    for table in &stage1.tables {
        std::fs::write(out_dir.join(format!("{}.csv", table.name)), table.render())?;
    }
    let lambda = json_f64(&stage1.detail, "neumann_lambda")?;

    // stage 2: gp, artifact phi.csv
    let stage2 = run_gp(gp, seed)?;
    for table in &stage2.tables {
        std::fs::write(out_dir.join(format!("{}.csv", table.name)), table.render())?;
    }

    // stage 3: kernel from the on-disk artifacts
    let w_art = read_csv(&out_dir.join("w_ell.csv"), 4)?;
    let neumann = NeumannSolution {
        mesh: RadialMesh {
            r: w_art[0].clone(),
            support_node: 0,
        },
        lambda,
        f: w_art[1].clone(),
        w: w_art[2].clone(),
        df: w_art[3].clone(),
        n_particles: scattering.neumann_n_particles,
        ell: scattering.neumann_ell,
    };
    let phi_art = read_csv(&out_dir.join("phi.csv"), 2)?;
    let GeometrySpec::Radial3d { radius, n } = gp.geometry else {
        bail!("full-pipeline requires the radial3d gp geometry");
    };
    let state = GPState {
        geometry: GpGeometry::Radial3d { radius, n },
        grid: phi_art[0].clone(),
        phi: phi_art[1].clone(),
        dof: Vec::new(),
        energy: json_f64(&stage2.detail, "energy")?,
        eps_gp: json_f64(&stage2.detail, "eps_gp")?,
        eps_gp_identity: json_f64(&stage2.detail, "eps_gp_identity")?,
        coupling_a: gp.scattering_length,
        residual: json_f64(&stage2.detail, "residual")?,
        iterations: 0,
    };
    let built = build_kernel(
        &neumann,
        &state,
        KernelParams {
            n_particles: scattering.neumann_n_particles,
            ell: scattering.neumann_ell,
            alpha: kernel.alpha,
            filter_enabled: true,
        },
        kernel.t_points,
    )
    .map_err(to_anyhow)?;
    let boxed = built
        .to_box(kernel.box_points, kernel.box_len)
        .map_err(to_anyhow)?;
    let export = boxed
        .mode_export(boxed.dim(), kernel.export_hs_loss)
        .map_err(to_anyhow)?;
    std::fs::write(
        out_dir.join("eta_modes.json"),
        mode_kernel_json(&export).render(),
    )?;

    // stage 4: bogoliubov from the exported kernel, compressed to the
    // leading modes the Fock side can carry
    let text = std::fs::read_to_string(out_dir.join("eta_modes.json"))?;
    let parsed: serde_json::Value = serde_json::from_str(&text)?;
    let all_values: Vec<f64> = parsed["eigenvalues"]
        .as_array()
        .context("eigenvalues array")?
        .iter()
        .map(|v| v.as_f64().unwrap_or(0.0))
        .collect();
    let keep = kernel.export_max_modes.min(all_values.len()).max(1);
    let fock_mass: f64 = all_values[..keep].iter().map(|v| v * v).sum();
    let total_mass: f64 = all_values.iter().map(|v| v * v).sum();
    let mut eta_modes = nalgebra::DMatrix::zeros(keep, keep);
    for (k, &v) in all_values[..keep].iter().enumerate() {
        eta_modes[(k, k)] = v;
    }
    // the conjugation laws are scale-generic in η; pin the exported modes to
    // the configured reference norm so the 1/N remainder dominates the
    // truncation leak of the finite particle cap
    let hs = eta_modes.iter().map(|v| v * v).sum::<f64>().sqrt();
    if hs > 0.0 {
        eta_modes.scale_mut(bogoliubov.eta_hs / hs);
    }
    let stage4 = run_bogoliubov_with_eta(bogoliubov, &eta_modes, "full-pipeline", seed)?;

    let mut checks = Vec::new();
    checks.extend(prefix_checks("scattering", stage1.checks));
    checks.extend(prefix_checks("gp", stage2.checks));
    checks.push(Check::upper(
        "kernel/export-discarded-hs-fraction",
        export.discarded_hs_fraction,
        kernel.export_hs_loss,
    ));
    checks.extend(prefix_checks("bogoliubov", stage4.checks));

    let mut detail = Json::object();
    detail.push("scattering", stage1.detail);
    detail.push("gp", stage2.detail);
    let mut kernel_detail = Json::object();
    kernel_detail.push("hs_norm", Json::F64(built.hs_norm()));
    kernel_detail.push("export", mode_kernel_json(&export));
    kernel_detail.push(
        "fock_side_hs_fraction",
        Json::F64(if total_mass > 0.0 {
            fock_mass / total_mass
        } else {
            0.0
        }),
    );
    detail.push("kernel", kernel_detail);
    detail.push("bogoliubov", stage4.detail);

    let mut tables = stage1.tables;
    tables.extend(stage2.tables);
    tables.extend(stage4.tables);

    Ok(Report {
        kind: "full-pipeline".into(),
        seed,
        detail,
        tables,
        checks,
    })
}

fn prefix_checks(prefix: &str, checks: Vec<Check>) -> Vec<Check> {
    checks
        .into_iter()
        .map(|mut c| {
            c.name = format!("{prefix}/{}", c.name);
            c
        })
        .collect()
}

fn json_f64(value: &Json, key: &str) -> Result<f64> {
    if let Json::Object(entries) = value {
        for (k, v) in entries {
            if k == key {
                if let Json::F64(x) = v {
                    return Ok(*x);
                }
            }
        }
    }
    bail!("report detail missing float field {key}")
}

fn read_csv(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading artifact {}", path.display()))?;
    let mut out = vec![Vec::new(); columns];
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue; // header
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != columns {
            bail!("{}: expected {columns} columns, got {}", path.display(), parts.len());
        }
        for (c, part) in parts.iter().enumerate() {
            out[c].push(part.parse::<f64>().with_context(|| {
                format!("{}: bad float {part:?} on line {}", path.display(), i + 1)
            })?);
        }
    }
    Ok(out)
}

fn to_anyhow(e: bosegas_core::CoreError) -> anyhow::Error {
    anyhow!(e.to_string())
}
