//! Experiment configuration: JSON on disk, strict parsing, semantic
//! validation with field paths, and feasibility prechecks that refuse
//! oversized bases or unresolvable filter cutoffs before any work starts.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const CONFIG_VERSION: u32 = 1;
pub const BASIS_DIMENSION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub meanfield: Option<MeanfieldSection>,
    #[serde(default)]
    pub scattering: Option<ScatteringSection>,
    #[serde(default)]
    pub gp: Option<GpSection>,
    #[serde(default)]
    pub kernel: Option<KernelSection>,
    #[serde(default)]
    pub bogoliubov: Option<BogoliubovSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MeanfieldMoments,
    Scattering,
    Gp,
    KernelBounds,
    BogoliubovChecks,
    FullPipeline,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::MeanfieldMoments => "meanfield-moments",
            ExperimentKind::Scattering => "scattering",
            ExperimentKind::Gp => "gp",
            ExperimentKind::KernelBounds => "kernel-bounds",
            ExperimentKind::BogoliubovChecks => "bogoliubov-checks",
            ExperimentKind::FullPipeline => "full-pipeline",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanfieldSection {
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_wavenumber")]
    pub max_wavenumber: i64,
    pub v_hat: VHatSpec,
    pub n_sweep: Vec<usize>,
    pub kappa_grid: Vec<f64>,
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    /// κ used for the commutator identity check
    #[serde(default = "default_commutator_kappa")]
    pub commutator_kappa: f64,
    #[serde(default = "default_commutator_tol")]
    pub commutator_tolerance: f64,
    /// allowed relative spread of the sup moment across the N sweep
    #[serde(default = "default_moment_spread")]
    pub moment_spread_tolerance: f64,
    /// allowed max/min ratio of the fitted coercivity constant
    #[serde(default = "default_coercivity_ratio")]
    pub coercivity_ratio_tolerance: f64,
}

fn default_dimension() -> usize {
    1
}
fn default_wavenumber() -> i64 {
    1
}
fn default_zeta() -> f64 {
    1.0
}
fn default_commutator_kappa() -> f64 {
    0.3
}
fn default_commutator_tol() -> f64 {
    1e-10
}
fn default_moment_spread() -> f64 {
    0.25
}
fn default_coercivity_ratio() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VHatSpec {
    Zero,
    Constant { value: f64 },
    ZeroModeOnly { value: f64 },
    Table { entries: BTreeMap<String, f64> },
}

impl VHatSpec {
    pub fn to_core(&self) -> Result<bosegas_core::meanfield::VHat, String> {
        use bosegas_core::meanfield::VHat;
        Ok(match self {
            VHatSpec::Zero => VHat::Zero,
            VHatSpec::Constant { value } => VHat::Constant(*value),
            VHatSpec::ZeroModeOnly { value } => VHat::ZeroModeOnly(*value),
            VHatSpec::Table { entries } => {
                let mut map = BTreeMap::new();
                for (key, &value) in entries {
                    let parts: Vec<i64> = key
                        .split(',')
                        .map(|p| p.trim().parse::<i64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| format!("bad wave number key {key:?}: {e}"))?;
                    let mut n = [0i64; 3];
                    for (slot, v) in n.iter_mut().zip(&parts) {
                        *slot = *v;
                    }
                    map.insert(n, value);
                }
                VHat::Table(map)
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    SoftSphere { height: f64, radius: f64 },
    PiecewiseConstant { radii: Vec<f64>, heights: Vec<f64> },
    Tabulated { r: Vec<f64>, v: Vec<f64> },
}

impl PotentialSpec {
    pub fn to_core(&self) -> Result<bosegas_core::scattering::RadialPotential, String> {
        use bosegas_core::scattering::{PotentialShape, RadialPotential};
        let shape = match self {
            PotentialSpec::Zero => PotentialShape::Zero,
            PotentialSpec::SoftSphere { height, radius } => PotentialShape::SoftSphere {
                height: *height,
                radius: *radius,
            },
            PotentialSpec::PiecewiseConstant { radii, heights } => {
                PotentialShape::PiecewiseConstant {
                    radii: radii.clone(),
                    heights: heights.clone(),
                }
            }
            PotentialSpec::Tabulated { r, v } => PotentialShape::Tabulated {
                r: r.clone(),
                v: v.clone(),
            },
        };
        RadialPotential::new(shape).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringSection {
    pub potential: PotentialSpec,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_mesh_points")]
    pub mesh_points: usize,
    #[serde(default = "default_residual_tol")]
    pub residual_tolerance: f64,
    #[serde(default = "default_neumann_n")]
    pub neumann_n_particles: usize,
    #[serde(default = "default_neumann_ell")]
    pub neumann_ell: f64,
    #[serde(default = "default_neumann_points")]
    pub neumann_mesh_points: usize,
    #[serde(default = "default_p_grid_max")]
    pub p_grid_max: f64,
    #[serde(default = "default_p_grid_points")]
    pub p_grid_points: usize,
    #[serde(default = "default_scaling_sweep")]
    pub gp_scaling_n: Vec<usize>,
    /// allowed |a_fit − a_integral|
    #[serde(default = "default_extraction_tol")]
    pub extraction_tolerance: f64,
}

fn default_r_max() -> f64 {
    5.0
}
fn default_mesh_points() -> usize {
    4000
}
fn default_residual_tol() -> f64 {
    1e-3
}
fn default_neumann_n() -> usize {
    50
}
fn default_neumann_ell() -> f64 {
    0.5
}
fn default_neumann_points() -> usize {
    8000
}
fn default_p_grid_max() -> f64 {
    20.0
}
fn default_p_grid_points() -> usize {
    40
}
fn default_scaling_sweep() -> Vec<usize> {
    vec![10, 100]
}
fn default_extraction_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometrySpec {
    Line { half_length: f64, n: usize },
    Radial3d { radius: f64, n: usize },
}

impl GeometrySpec {
    pub fn to_core(&self) -> bosegas_core::gp::GpGeometry {
        match self {
            GeometrySpec::Line { half_length, n } => bosegas_core::gp::GpGeometry::Line {
                half_length: *half_length,
                n: *n,
            },
            GeometrySpec::Radial3d { radius, n } => bosegas_core::gp::GpGeometry::Radial3d {
                radius: *radius,
                n: *n,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TrapSpec {
    Harmonic { strength: f64 },
    Quartic { strength: f64 },
    SoftBox { half_width: f64, strength: f64 },
    Free,
}

impl TrapSpec {
    pub fn to_core(&self) -> bosegas_core::gp::Trap {
        use bosegas_core::gp::Trap;
        match self {
            TrapSpec::Harmonic { strength } => Trap::Harmonic {
                strength: *strength,
            },
            TrapSpec::Quartic { strength } => Trap::Quartic {
                strength: *strength,
            },
            TrapSpec::SoftBox {
                half_width,
                strength,
            } => Trap::SoftBox {
                half_width: *half_width,
                strength: *strength,
            },
            TrapSpec::Free => Trap::Free,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpSection {
    pub geometry: GeometrySpec,
    pub trap: TrapSpec,
    #[serde(default)]
    pub scattering_length: f64,
    #[serde(default = "default_gp_tol")]
    pub tolerance: f64,
    #[serde(default = "default_gp_iters")]
    pub max_iterations: usize,
    #[serde(default = "default_decay_nu")]
    pub decay_nu: Vec<f64>,
    /// allowed |ε_GP(eigenvalue) − ε_GP(identity)|
    #[serde(default = "default_eps_agreement")]
    pub eps_agreement_tolerance: f64,
}

fn default_gp_tol() -> f64 {
    1e-7
}
fn default_gp_iters() -> usize {
    400_000
}
fn default_decay_nu() -> Vec<f64> {
    vec![0.5, 1.0]
}
fn default_eps_agreement() -> f64 {
    1e-5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub potential: PotentialSpec,
    pub trap: TrapSpec,
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub scattering_length: f64,
    pub ell_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_t_points")]
    pub t_points: usize,
    #[serde(default = "default_neumann_points")]
    pub neumann_mesh_points: usize,
    #[serde(default = "default_gp_tol")]
    pub gp_tolerance: f64,
    #[serde(default = "default_box_points")]
    pub box_points: usize,
    #[serde(default = "default_box_len")]
    pub box_len: f64,
    #[serde(default = "default_export_modes")]
    pub export_max_modes: usize,
    #[serde(default = "default_export_loss")]
    pub export_hs_loss: f64,
    /// lower gate on the fitted ℓ-exponent of ‖η‖
    #[serde(default = "default_norm_slope_floor")]
    pub norm_slope_floor: f64,
    /// upper gate on the fitted N-exponent of ‖∇₁η‖
    #[serde(default = "default_grad_slope_cap")]
    pub grad_slope_cap: f64,
    /// allowed deviation of max|η|/(N|φφ|) from its sweep mean
    #[serde(default = "default_ratio_stability")]
    pub max_ratio_stability: f64,
}

fn default_alpha() -> f64 {
    1.0
}
fn default_t_points() -> usize {
    3072
}
fn default_box_points() -> usize {
    8
}
fn default_box_len() -> f64 {
    4.0
}
fn default_export_modes() -> usize {
    6
}
fn default_export_loss() -> f64 {
    0.01
}
fn default_norm_slope_floor() -> f64 {
    0.4
}
fn default_grad_slope_cap() -> f64 {
    0.6
}
fn default_ratio_stability() -> f64 {
    0.15
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BogoliubovSection {
    #[serde(default = "default_eta_hs")]
    pub eta_hs: f64,
    #[serde(default = "default_cap")]
    pub particle_cap: usize,
    pub total_n_sweep: Vec<usize>,
    #[serde(default = "default_bogo_kappa")]
    pub kappa: f64,
    #[serde(default = "default_bogo_kappa_grid")]
    pub kappa_grid: Vec<f64>,
    #[serde(default = "default_probe_cap")]
    pub probe_sector_cap: usize,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_series_order")]
    pub series_order: usize,
    /// |fitted N-exponent − (−1)| gate for the remainder norm
    #[serde(default = "default_exponent_window")]
    pub exponent_window: f64,
    /// Gronwall constant upper gate
    #[serde(default = "default_gronwall_cap")]
    pub gronwall_cap: f64,
    /// allowed relative drift of C under doubling the particle cap
    #[serde(default = "default_gronwall_stability")]
    pub gronwall_stability: f64,
}

fn default_eta_hs() -> f64 {
    0.1
}
fn default_cap() -> usize {
    10
}
fn default_bogo_kappa() -> f64 {
    0.2
}
fn default_bogo_kappa_grid() -> Vec<f64> {
    vec![0.01, 0.02, 0.04, 0.08]
}
fn default_probe_cap() -> usize {
    3
}
fn default_probes() -> usize {
    16
}
fn default_series_order() -> usize {
    10
}
fn default_exponent_window() -> f64 {
    0.2
}
fn default_gronwall_cap() -> f64 {
    2.0
}
fn default_gronwall_stability() -> f64 {
    0.25
}

/// One validation finding with the config path it refers to.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
    pub fatal: bool,
}

impl Diagnostic {
    fn error(path: &str, message: impl Into<String>) -> Self {
        Self {
            path: path.to_string(),
            message: message.into(),
            fatal: true,
        }
    }

    fn info(path: &str, message: impl Into<String>) -> Self {
        Self {
            path: path.to_string(),
            message: message.into(),
            fatal: false,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Schema-level and feasibility diagnostics; never panics, never runs the
/// experiment.
pub fn validate(config: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if config.version != CONFIG_VERSION {
        out.push(Diagnostic::error(
            "version",
            format!("unsupported version {} (expected {CONFIG_VERSION})", config.version),
        ));
    }

    let needs_mf = matches!(config.kind, ExperimentKind::MeanfieldMoments);
    let needs_scatter = matches!(
        config.kind,
        ExperimentKind::Scattering | ExperimentKind::FullPipeline
    );
    let needs_gp = matches!(config.kind, ExperimentKind::Gp | ExperimentKind::FullPipeline);
    let needs_kernel = matches!(
        config.kind,
        ExperimentKind::KernelBounds | ExperimentKind::FullPipeline
    );
    let needs_bogo = matches!(
        config.kind,
        ExperimentKind::BogoliubovChecks | ExperimentKind::FullPipeline
    );

    if needs_mf {
        match &config.meanfield {
            None => out.push(Diagnostic::error("meanfield", "section required for this kind")),
            Some(mf) => validate_meanfield(mf, &mut out),
        }
    }
    if needs_scatter {
        match &config.scattering {
            None => out.push(Diagnostic::error("scattering", "section required for this kind")),
            Some(sc) => validate_scattering(sc, &mut out),
        }
    }
    if needs_gp {
        match &config.gp {
            None => out.push(Diagnostic::error("gp", "section required for this kind")),
            Some(gp) => validate_gp(gp, &mut out),
        }
    }
    if needs_kernel {
        match &config.kernel {
            None => out.push(Diagnostic::error("kernel", "section required for this kind")),
            Some(k) => validate_kernel(k, &mut out),
        }
    }
    if needs_bogo {
        match &config.bogoliubov {
            None => out.push(Diagnostic::error("bogoliubov", "section required for this kind")),
            Some(b) => validate_bogoliubov(b, &mut out),
        }
    }
    out
}

fn validate_meanfield(mf: &MeanfieldSection, out: &mut Vec<Diagnostic>) {
    if !(1..=3).contains(&mf.dimension) {
        out.push(Diagnostic::error("meanfield.dimension", "must be 1, 2 or 3"));
    }
    if mf.n_sweep.is_empty() {
        out.push(Diagnostic::error("meanfield.n_sweep", "grid non-empty"));
    }
    if mf.kappa_grid.is_empty() {
        out.push(Diagnostic::error("meanfield.kappa_grid", "grid non-empty"));
    }
    if mf.kappa_grid.iter().any(|&k| k < 0.0) {
        out.push(Diagnostic::error("meanfield.kappa_grid", "κ values must be ≥ 0"));
    }
    if mf.zeta <= 0.0 {
        out.push(Diagnostic::error("meanfield.zeta", "tolerances > 0"));
    }
    if mf.commutator_tolerance <= 0.0 {
        out.push(Diagnostic::error("meanfield.commutator_tolerance", "tolerances > 0"));
    }
    // feasibility: basis dimension of the largest sweep point
    if let Some(&n_max) = mf.n_sweep.iter().max() {
        let modes = match mf.dimension {
            1 => (2 * mf.max_wavenumber + 1) as usize,
            2 => ((2 * mf.max_wavenumber + 1) * (2 * mf.max_wavenumber + 1)) as usize,
            _ => ((2 * mf.max_wavenumber + 1).pow(3)) as usize,
        };
        let dim = bosegas_core::fock::basis_dimension(modes, n_max);
        if dim > BASIS_DIMENSION_CAP {
            out.push(Diagnostic::error(
                "meanfield.n_sweep",
                format!("basis dimension {dim} exceeds the cap {BASIS_DIMENSION_CAP}"),
            ));
        } else {
            out.push(Diagnostic::info(
                "meanfield.n_sweep",
                format!("largest basis dimension {dim} < cap {BASIS_DIMENSION_CAP}, accepted"),
            ));
        }
    }
}

fn validate_scattering(sc: &ScatteringSection, out: &mut Vec<Diagnostic>) {
    if let Err(e) = sc.potential.to_core() {
        out.push(Diagnostic::error("scattering.potential", e));
    }
    if sc.mesh_points < 16 {
        out.push(Diagnostic::error("scattering.mesh_points", "need at least 16 points"));
    }
    if sc.residual_tolerance <= 0.0 || sc.extraction_tolerance <= 0.0 {
        out.push(Diagnostic::error("scattering", "tolerances > 0"));
    }
    if let Ok(pot) = sc.potential.to_core() {
        if sc.r_max <= pot.support_radius() {
            out.push(Diagnostic::error(
                "scattering.r_max",
                format!("must exceed the support radius {}", pot.support_radius()),
            ));
        }
        let ball = sc.neumann_n_particles as f64 * sc.neumann_ell;
        if ball <= pot.support_radius() {
            out.push(Diagnostic::error(
                "scattering.neumann_ell",
                format!("Nℓ = {ball} must exceed the support radius {}", pot.support_radius()),
            ));
        }
    }
    if sc.gp_scaling_n.is_empty() {
        out.push(Diagnostic::error("scattering.gp_scaling_n", "grid non-empty"));
    }
}

fn validate_gp(gp: &GpSection, out: &mut Vec<Diagnostic>) {
    if gp.tolerance <= 0.0 || gp.eps_agreement_tolerance <= 0.0 {
        out.push(Diagnostic::error("gp", "tolerances > 0"));
    }
    if gp.scattering_length < 0.0 {
        out.push(Diagnostic::error("gp.scattering_length", "must be ≥ 0"));
    }
    if matches!(gp.trap, TrapSpec::Free) {
        out.push(Diagnostic::error(
            "gp.trap",
            "minimization needs a confining trap",
        ));
    }
    match &gp.geometry {
        GeometrySpec::Line { n, .. } | GeometrySpec::Radial3d { n, .. } => {
            if *n < 16 {
                out.push(Diagnostic::error("gp.geometry.n", "need at least 16 intervals"));
            }
        }
    }
    if gp.decay_nu.is_empty() {
        out.push(Diagnostic::error("gp.decay_nu", "grid non-empty"));
    }
}

fn validate_kernel(k: &KernelSection, out: &mut Vec<Diagnostic>) {
    if k.ell_grid.is_empty() {
        out.push(Diagnostic::error("kernel.ell_grid", "grid non-empty"));
    }
    if k.n_grid.is_empty() {
        out.push(Diagnostic::error("kernel.n_grid", "grid non-empty"));
    }
    if k.ell_grid.iter().any(|&l| l <= 0.0 || l >= 1.0) {
        out.push(Diagnostic::error("kernel.ell_grid", "ℓ must lie in (0, 1)"));
    }
    if let Err(e) = k.potential.to_core() {
        out.push(Diagnostic::error("kernel.potential", e));
    }
    let GeometrySpec::Radial3d { radius, .. } = k.geometry else {
        out.push(Diagnostic::error(
            "kernel.geometry",
            "kernel construction needs the radial3d geometry",
        ));
        return;
    };
    // Nyquist-style precheck: the sine-transform grid must resolve ℓ^(−α)
    let t_max = 2.0 * radius + 1.0;
    let q_max = std::f64::consts::PI * (k.t_points as f64 - 1.0) / t_max;
    for &ell in &k.ell_grid {
        let cutoff = ell.powf(-k.alpha);
        if cutoff >= q_max {
            out.push(Diagnostic::error(
                "kernel.t_points",
                format!(
                    "mesh of {} points resolves frequencies up to {q_max:.2} but the \
                     cutoff ℓ^(−α) = {cutoff:.2} at ℓ = {ell} requires at least {} points",
                    k.t_points,
                    (cutoff * t_max / std::f64::consts::PI).ceil() as usize + 1
                ),
            ));
        }
    }
    // the Neumann ball must contain the pair potential support for every
    // sweep point
    if let Ok(pot) = k.potential.to_core() {
        for &n in &k.n_grid {
            for &ell in &k.ell_grid {
                if n as f64 * ell <= pot.support_radius() {
                    out.push(Diagnostic::error(
                        "kernel.n_grid",
                        format!(
                            "Nℓ = {} at (N = {n}, ℓ = {ell}) does not exceed the support \
                             radius {}",
                            n as f64 * ell,
                            pot.support_radius()
                        ),
                    ));
                }
            }
        }
    }
    if k.box_points < 4 || k.box_points.pow(3) > 4096 {
        out.push(Diagnostic::error(
            "kernel.box_points",
            "lattice must have 4..=16 points per axis",
        ));
    }
}

fn validate_bogoliubov(b: &BogoliubovSection, out: &mut Vec<Diagnostic>) {
    if b.total_n_sweep.is_empty() {
        out.push(Diagnostic::error("bogoliubov.total_n_sweep", "grid non-empty"));
    }
    if b.kappa_grid.is_empty() {
        out.push(Diagnostic::error("bogoliubov.kappa_grid", "grid non-empty"));
    }
    if !(0.0..0.5).contains(&b.eta_hs) {
        out.push(Diagnostic::error(
            "bogoliubov.eta_hs",
            "series paths require ‖η‖ < 0.5",
        ));
    }
    if let Some(&n_min) = b.total_n_sweep.iter().min() {
        if n_min < b.particle_cap {
            out.push(Diagnostic::error(
                "bogoliubov.total_n_sweep",
                format!(
                    "total N = {n_min} below the particle cap {}; modified operators \
                     need N ≥ cap",
                    b.particle_cap
                ),
            ));
        }
    }
    if b.probe_sector_cap >= b.particle_cap {
        out.push(Diagnostic::error(
            "bogoliubov.probe_sector_cap",
            "probes must stay below the particle cap",
        ));
    }
    if !(0.0 < b.kappa && b.kappa <= 0.5) {
        out.push(Diagnostic::error("bogoliubov.kappa", "κ must lie in (0, 0.5]"));
    }
}
