//! Batch driver: configuration, data simulation, reconstruction, metrics and
//! output files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use web_time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{build_basis, ConductivityField, ForwardModel, NdMatrix};
use crate::geometry::{build_fitted_disk_mesh, mark_gamma, pixelize, GammaArc, PixelGrid};
use crate::io::fmt_g17;
use crate::monotonicity::Priors;
use crate::phantoms::{
    add_noise, annulus_nd_reference, rasterize, validate_pclc, ComponentSpec, PhantomSpec,
};
use crate::reconstruct::{
    reconstruct, DecompositionJson, LayerDecomposition, LevelReport, ReconstructOptions,
    ReconstructionReport, StageTiming, Termination,
};

fn default_radius() -> f64 {
    1.0
}
fn default_refinement() -> usize {
    2
}
fn default_basis_size() -> usize {
    16
}
fn default_max_layers() -> usize {
    8
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    #[serde(default = "default_radius")]
    pub radius: f64,
    pub target_h: f64,
    /// Data mesh spacing is `target_h / data_mesh_refinement`; 1 reuses the reconstruction mesh.
    #[serde(default = "default_refinement")]
    pub data_mesh_refinement: usize,
}

/// `"full"` or a list of `[start, end]` angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Named(String),
    Arcs(Vec<[f64; 2]>),
}

impl Default for GammaSpec {
    fn default() -> Self {
        GammaSpec::Named("full".into())
    }
}

impl GammaSpec {
    pub fn arcs(&self) -> Result<Vec<GammaArc>> {
        match self {
            GammaSpec::Named(s) if s == "full" => Ok(vec![GammaArc::full_circle()]),
            GammaSpec::Named(s) => Err(Error::Config(vec![format!(
                "gamma_arcs must be \"full\" or a list of [start, end] pairs, got \"{s}\""
            )])),
            GammaSpec::Arcs(list) => list.iter().map(|a| GammaArc::new(a[0], a[1])).collect(),
        }
    }
}

/// `"auto"` or a fixed absolute tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsSetting {
    Fixed(f64),
    Named(String),
}

impl Default for EpsSetting {
    fn default() -> Self {
        EpsSetting::Named("auto".into())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default)]
    pub eps: EpsSetting,
    /// Defaults to `1e-3 (β_U − β_L)`.
    #[serde(default)]
    pub delta_c: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    #[serde(default)]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhantomLayers {
    #[serde(default)]
    pub layers: Vec<Vec<ComponentSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: DomainConfig,
    #[serde(default)]
    pub gamma_arcs: GammaSpec,
    #[serde(default = "default_basis_size")]
    pub basis_size: usize,
    pub h_px: f64,
    #[serde(default)]
    pub phantom: PhantomLayers,
    pub priors: Priors,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default = "default_max_layers")]
    pub max_layers: usize,
    /// Subtract the data-mesh/reconstruction-mesh discrepancy of the known background `c0`.
    #[serde(default = "default_true")]
    pub background_correction: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let d = &self.domain;
        if !(d.radius.is_finite() && d.radius > 0.0) {
            problems.push(format!("domain.radius = {} must be positive", d.radius));
        }
        if !(d.target_h.is_finite() && d.target_h > 0.0) {
            problems.push(format!("domain.target_h = {} must be positive", d.target_h));
        }
        if d.data_mesh_refinement == 0 {
            problems.push("domain.data_mesh_refinement must be at least 1".into());
        }
        if !(self.h_px.is_finite() && self.h_px > 0.0) {
            problems.push(format!("h_px = {} must be positive", self.h_px));
        }
        if self.h_px.is_finite() && d.target_h.is_finite() && d.target_h > self.h_px {
            problems.push(format!(
                "domain.target_h = {} must not exceed h_px = {}",
                d.target_h, self.h_px
            ));
        }
        if self.basis_size < 2 {
            problems.push(format!(
                "basis_size = {} must be at least 2",
                self.basis_size
            ));
        }
        if let Err(Error::Config(p)) = self.priors.validate() {
            problems.extend(p.into_iter().map(|s| format!("priors.{s}")));
        }
        if self.priors.tau < 2.0 * self.h_px {
            problems.push(format!(
                "priors.tau = {} must be at least 2 * h_px = {}",
                self.priors.tau,
                2.0 * self.h_px
            ));
        }
        match &self.tolerances.eps {
            EpsSetting::Fixed(e) if !(e.is_finite() && *e >= 0.0) => {
                problems.push(format!("tolerances.eps = {e} must be non-negative"))
            }
            EpsSetting::Named(s) if s != "auto" => problems.push(format!(
                "tolerances.eps must be a number or \"auto\", got \"{s}\""
            )),
            _ => {}
        }
        if let Some(dc) = self.tolerances.delta_c {
            if !(dc.is_finite() && dc > 0.0) {
                problems.push(format!("tolerances.delta_c = {dc} must be positive"));
            }
        }
        if !(self.noise.level.is_finite() && self.noise.level >= 0.0) {
            problems.push(format!(
                "noise.level = {} must be non-negative",
                self.noise.level
            ));
        }
        if let Err(e) = self.gamma_arcs.arcs() {
            problems.push(format!("gamma_arcs: {e}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn phantom_spec(&self) -> PhantomSpec {
        PhantomSpec {
            c0: self.priors.c0,
            tau: self.priors.tau,
            beta_l: self.priors.beta_l,
            beta_u: self.priors.beta_u,
            layers: self.phantom.layers.clone(),
        }
    }

    pub fn options(&self, eps: f64) -> ReconstructOptions {
        let mut o = ReconstructOptions::with_defaults(&self.priors, self.h_px, eps);
        if let Some(dc) = self.tolerances.delta_c {
            o.delta_c = dc;
        }
        o.max_layers = self.max_layers;
        o
    }
}

/// Parse and validate a configuration; unknown fields are logged and ignored.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_ignored::deserialize(&mut de, |path| {
        log::warn!("ignoring unknown configuration field `{path}`");
    })?;
    de.end()?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    parse_config_str(&fs::read_to_string(path)?)
}

/// Meshes, models and grids of a run.
pub struct Setup {
    pub model: ForwardModel,
    pub grid: PixelGrid,
    /// Data mesh model, its grid, and the transfer `P` with `Λ = P Λ_fine Pᵀ`.
    pub data: Option<(ForwardModel, PixelGrid, DMatrix<f64>)>,
}

pub fn build_setup(config: &RunConfig) -> Result<Setup> {
    let d = &config.domain;
    let arcs = config.gamma_arcs.arcs()?;
    let mesh = mark_gamma(
        &build_fitted_disk_mesh(d.radius, d.target_h, config.h_px)?,
        &arcs,
    )?;
    let grid = pixelize(&mesh, config.h_px)?;
    let data = if d.data_mesh_refinement > 1 {
        let fine = build_fitted_disk_mesh(
            d.radius,
            d.target_h / d.data_mesh_refinement as f64,
            config.h_px,
        )?;
        let fine = mark_gamma(&fine, &mesh.gamma_extent())?;
        let fine_grid = pixelize(&fine, config.h_px)?;
        if !fine_grid.same_geometry(&grid) {
            return Err(Error::GridMismatch(
                "data and reconstruction grids differ".into(),
            ));
        }
        let fine_basis = build_basis(&fine, config.basis_size)?;
        let fine_model = ForwardModel::with_basis(fine, fine_basis)?;
        let model = ForwardModel::new(mesh, config.basis_size)?;
        let p = model.basis().transfer_from(fine_model.basis());
        return Ok(Setup {
            model,
            grid,
            data: Some((fine_model, fine_grid, p)),
        });
    } else {
        None
    };
    Ok(Setup {
        model: ForwardModel::new(mesh, config.basis_size)?,
        grid,
        data,
    })
}

/// Contributions to the PSD tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsReport {
    pub mode: &'static str,
    pub eps_disc: f64,
    pub delta_noise: f64,
    pub eps: f64,
}

pub struct Simulation {
    pub measured: NdMatrix,
    pub delta_noise: f64,
    pub eps: EpsReport,
}

impl Setup {
    /// `Λ(σ)` as the reconstruction sees it: on the data mesh, projected, and
    /// corrected by the background discrepancy when `correction` is given.
    pub fn data_nd(
        &self,
        truth: &LayerDecomposition,
        priors: &Priors,
        correction: Option<&NdMatrix>,
    ) -> Result<NdMatrix> {
        let nd = match &self.data {
            Some((fine, fine_grid, p)) => {
                let field = rasterize(truth, fine_grid, priors.beta_l, priors.beta_u)?;
                fine.assemble_nd(&field)?.congruence(p)?
            }
            None => {
                let field = rasterize(truth, &self.grid, priors.beta_l, priors.beta_u)?;
                self.model.assemble_nd(&field)?
            }
        };
        Ok(match correction {
            Some(c) => (&nd - c).symmetrized(),
            None => nd.symmetrized(),
        })
    }

    /// `P Λ_fine(c0) Pᵀ − Λ(c0)`, zero without a data mesh.
    pub fn background_gap(&self, priors: &Priors) -> Result<NdMatrix> {
        let empty = LayerDecomposition::empty(priors.c0, priors.tau);
        let projected = self.data_nd(&empty, priors, None)?;
        let coarse = self.model.assemble_nd(&ConductivityField::constant(
            self.model.mesh().n_triangles(),
            priors.c0,
        )?)?;
        Ok(&projected - &coarse)
    }

    /// Largest residual mismatch `‖Λ_data(σ) − Λ(σ)‖₂` over the calibration
    /// fields `c0 + (β − c0) χ_{H_τ}` for `β ∈ {β_L, β_U}`, `H_τ` the τ-thinned disk.
    pub fn discretization_gap(
        &self,
        priors: &Priors,
        correction: Option<&NdMatrix>,
    ) -> Result<f64> {
        if self.data.is_none() {
            return Ok(0.0);
        }
        let core = self.grid.thin_tau(&self.grid.inside_set(), priors.tau);
        let mut worst: f64 = 0.0;
        for beta in [priors.beta_l, priors.beta_u] {
            if beta == priors.c0 || core.is_empty() {
                continue;
            }
            let probe = LayerDecomposition {
                c0: priors.c0,
                tau: priors.tau,
                layers: vec![vec![crate::reconstruct::LayerComponent {
                    pixels: core.clone(),
                    constant: beta - priors.c0,
                    parent: 0,
                }]],
            };
            let data = self.data_nd(&probe, priors, correction)?;
            let field = rasterize(&probe, &self.grid, priors.beta_l, priors.beta_u)?;
            let coarse = self.model.assemble_nd(&field)?;
            worst = worst.max((&data - &coarse).norm2()?);
        }
        Ok(worst)
    }
}

/// Measured data for `truth`, with noise and the tolerance.
pub fn simulate(
    config: &RunConfig,
    setup: &Setup,
    truth: &LayerDecomposition,
) -> Result<Simulation> {
    let priors = &config.priors;
    let correction = if config.background_correction && setup.data.is_some() {
        Some(setup.background_gap(priors)?)
    } else {
        None
    };
    let clean = setup.data_nd(truth, priors, correction.as_ref())?;
    let (measured, delta_noise) = add_noise(&clean, config.noise.level, config.noise.seed)?;
    let eps = match &config.tolerances.eps {
        EpsSetting::Fixed(e) => EpsReport {
            mode: "fixed",
            eps_disc: 0.0,
            delta_noise,
            eps: *e,
        },
        EpsSetting::Named(_) => {
            let eps_disc = setup.discretization_gap(priors, correction.as_ref())?;
            EpsReport {
                mode: "auto",
                eps_disc,
                delta_noise,
                eps: eps_disc + 2.0 * delta_noise,
            }
        }
    };
    Ok(Simulation {
        measured,
        delta_noise,
        eps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentMetrics {
    pub layer: usize,
    pub component: usize,
    pub matched: Option<usize>,
    pub jaccard: f64,
    pub constant_truth: f64,
    pub constant_recovered: Option<f64>,
    pub constant_rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    /// Jaccard index of `D_j` per truth layer.
    pub layer_jaccard: Vec<f64>,
    pub components: Vec<ComponentMetrics>,
    pub field_rel_l2: f64,
    pub layers_truth: usize,
    pub layers_recovered: usize,
    pub layer_count_match: bool,
}

impl Metrics {
    pub fn max_constant_error(&self) -> Option<f64> {
        self.components
            .iter()
            .map(|c| c.constant_rel_error)
            .try_fold(0.0f64, |acc, e| e.map(|e| acc.max(e)))
    }

    pub fn min_jaccard(&self) -> f64 {
        self.layer_jaccard.iter().copied().fold(1.0, f64::min)
    }
}

/// Compare layer by layer; each truth component is matched to the recovered
/// component of the same layer with the largest overlap.
pub fn compute_metrics(
    truth: &LayerDecomposition,
    recovered: &LayerDecomposition,
    grid: &PixelGrid,
) -> Metrics {
    let mut layer_jaccard = Vec::new();
    let mut components = Vec::new();
    for (j, layer) in truth.layers.iter().enumerate() {
        let level = j + 1;
        layer_jaccard.push(
            truth
                .layer_union(level, grid)
                .jaccard(&recovered.layer_union(level, grid)),
        );
        let candidates = recovered.layers.get(j).map_or(&[][..], |l| &l[..]);
        for (n, c) in layer.iter().enumerate() {
            let best = candidates
                .iter()
                .enumerate()
                .map(|(m, r)| (m, r.pixels.intersection(&c.pixels).len()))
                .filter(|&(_, overlap)| overlap > 0)
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .map(|(m, _)| m);
            let (jaccard, recovered_c) = match best {
                Some(m) => (
                    candidates[m].pixels.jaccard(&c.pixels),
                    Some(candidates[m].constant),
                ),
                None => (0.0, None),
            };
            components.push(ComponentMetrics {
                layer: level,
                component: n,
                matched: best,
                jaccard,
                constant_truth: c.constant,
                constant_recovered: recovered_c,
                constant_rel_error: recovered_c.map(|r| (r - c.constant).abs() / c.constant.abs()),
            });
        }
    }
    let t = truth.pixel_values(grid);
    let r = recovered.pixel_values(grid);
    let (mut num, mut den) = (0.0, 0.0);
    for p in grid.inside_set().iter() {
        num += (r[p] - t[p]).powi(2);
        den += t[p].powi(2);
    }
    Metrics {
        layer_jaccard,
        components,
        field_rel_l2: (num / den).sqrt(),
        layers_truth: truth.n_layers(),
        layers_recovered: recovered.n_layers(),
        layer_count_match: truth.n_layers() == recovered.n_layers(),
    }
}

/// CSV `x,y,value` over inside pixel centres in row-major order, values taken
/// from the triangle containing each centre.
pub fn write_field(field: &ConductivityField, grid: &PixelGrid, mut out: impl Write) -> Result<()> {
    writeln!(out, "x,y,value")?;
    for p in grid.inside_set().iter() {
        let t = grid
            .pixel_triangle(p)
            .ok_or_else(|| Error::GridMismatch(format!("inside pixel {p} has no triangle")))?;
        let c = grid.center(p);
        writeln!(
            out,
            "{},{},{}",
            fmt_g17(c[0]),
            fmt_g17(c[1]),
            fmt_g17(field.value(t))
        )?;
    }
    Ok(())
}

pub fn export_field(field: &ConductivityField, grid: &PixelGrid, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_field(field, grid, &mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct ReportJson<'a> {
    termination: Termination,
    abort: &'a Option<String>,
    layers_recovered: usize,
    priors: &'a Priors,
    options: &'a ReconstructOptions,
    eps: &'a EpsReport,
    background_correction: bool,
    recovered: DecompositionJson,
    unresolved: Vec<UnresolvedJson>,
    truth: DecompositionJson,
    levels: &'a [LevelReport],
    fields: Vec<String>,
    masks: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
struct UnresolvedJson {
    parent: usize,
    pixels: usize,
    runs: Vec<[usize; 2]>,
}

/// Everything a run produces in memory.
#[derive(Debug)]
pub struct RunOutcome {
    pub grid: PixelGrid,
    pub truth: LayerDecomposition,
    /// The data handed to the reconstruction.
    pub measured: NdMatrix,
    pub report: ReconstructionReport,
    pub metrics: Metrics,
    pub eps: EpsReport,
    pub timings: Vec<StageTiming>,
}

impl RunOutcome {
    /// Process exit status: 0 success, 2 ambiguity abort.
    pub fn exit_code(&self) -> i32 {
        match self.report.termination {
            Termination::AmbiguityAbort => 2,
            _ => 0,
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn staged<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(stage))
}

/// Simulate, reconstruct and score without touching the file system.
pub fn execute(config: &RunConfig) -> Result<RunOutcome> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |stage: &str, timings: &mut Vec<StageTiming>| {
        timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: clock.elapsed().as_secs_f64(),
        });
        clock = Instant::now();
    };
    staged("config", config.validate())?;
    let setup = staged("mesh", build_setup(config))?;
    lap("mesh", &mut timings);
    let truth = staged(
        "phantom",
        validate_pclc(&config.phantom_spec(), &setup.grid),
    )?;
    let sim = staged("simulate", simulate(config, &setup, &truth))?;
    lap("simulate", &mut timings);
    let options = config.options(sim.eps.eps);
    let report = staged(
        "reconstruct",
        reconstruct(
            &sim.measured,
            &config.priors,
            &setup.model,
            &setup.grid,
            &options,
        ),
    )?;
    lap("reconstruct", &mut timings);
    timings.extend(report.timings.iter().cloned());
    let metrics = compute_metrics(&truth, &report.decomposition, &setup.grid);
    Ok(RunOutcome {
        grid: setup.grid,
        truth,
        measured: sim.measured,
        report,
        metrics,
        eps: sim.eps,
        timings,
    })
}

/// Run and write the output directory: `config.json`, `report.json`,
/// `metrics.json`, `timings.json`, `psd_log.csv`, `data.csv`, `fields/*.csv`,
/// `masks/*.pgm`.
pub fn run_pipeline(config: &RunConfig, config_text: &str, out: &Path) -> Result<RunOutcome> {
    fs::create_dir_all(out.join("fields"))?;
    fs::create_dir_all(out.join("masks"))?;
    fs::write(out.join("config.json"), config_text)?;
    let outcome = match execute(config) {
        Ok(o) => o,
        Err(e) => {
            let stage = match &e {
                Error::Stage { stage, .. } => *stage,
                _ => "pipeline",
            };
            write_json(
                &out.join("report.json"),
                &serde_json::json!({ "error": { "stage": stage, "message": e.root().to_string() } }),
            )?;
            return Err(e);
        }
    };
    let grid = &outcome.grid;
    let priors = &config.priors;
    let rec = &outcome.report.decomposition;

    let mut fields = Vec::new();
    for k in 0..=rec.n_layers() {
        let partial = LayerDecomposition {
            c0: rec.c0,
            tau: rec.tau,
            layers: rec.layers[..k].to_vec(),
        };
        let name = format!("fields/gamma_{k}.csv");
        let field = partial.field(
            grid,
            priors.beta_l.min(priors.c0),
            priors.beta_u.max(priors.c0),
        )?;
        export_field(&field, grid, &out.join(&name))?;
        fields.push(name);
    }
    let truth_field = rasterize(&outcome.truth, grid, priors.beta_l, priors.beta_u)?;
    export_field(&truth_field, grid, &out.join("fields/truth.csv"))?;
    fields.push("fields/truth.csv".into());

    let mut masks = Vec::new();
    for (tag, d) in [("layer", rec), ("truth", &outcome.truth)] {
        for j in 1..=d.n_layers() {
            let name = format!("masks/{tag}_{j}.pgm");
            let mut w = BufWriter::new(fs::File::create(out.join(&name))?);
            grid.write_pgm(&d.layer_union(j, grid), &mut w)?;
            w.flush()?;
            masks.push(name);
        }
    }

    for (m, d) in outcome.report.unresolved.iter().enumerate() {
        let name = format!("masks/unresolved_{m}.pgm");
        let mut w = BufWriter::new(fs::File::create(out.join(&name))?);
        grid.write_pgm(&d.pixels, &mut w)?;
        w.flush()?;
        masks.push(name);
    }

    let report = ReportJson {
        termination: outcome.report.termination,
        abort: &outcome.report.abort,
        layers_recovered: rec.n_layers(),
        priors,
        options: &outcome.report.options,
        eps: &outcome.eps,
        background_correction: config.background_correction,
        recovered: rec.to_json(grid),
        unresolved: outcome
            .report
            .unresolved
            .iter()
            .map(|d| UnresolvedJson {
                parent: d.parent,
                pixels: d.pixels.len(),
                runs: d.pixels.to_runs(),
            })
            .collect(),
        truth: outcome.truth.to_json(grid),
        levels: &outcome.report.levels,
        fields,
        masks,
    };
    write_json(&out.join("report.json"), &report)?;
    write_json(&out.join("metrics.json"), &outcome.metrics)?;
    write_json(&out.join("timings.json"), &outcome.timings)?;
    let mut w = BufWriter::new(fs::File::create(out.join("data.csv"))?);
    outcome.measured.write_csv(&mut w)?;
    w.flush()?;

    let mut w = BufWriter::new(fs::File::create(out.join("psd_log.csv"))?);
    writeln!(w, "level,component,candidate,sign,min_eig,verdict")?;
    for r in &outcome.report.psd_log {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.level,
            r.component,
            r.candidate,
            r.sign,
            fmt_g17(r.min_eig),
            r.verdict
        )?;
    }
    w.flush()?;
    Ok(outcome)
}

/// One row of the solver oracle table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub sigma1: f64,
    pub mode: usize,
    pub reference: f64,
    pub computed: f64,
    pub rel_error: f64,
}

/// ND eigenvalues of the unit disk (full boundary, `M` modes) for a homogeneous
/// unit conductivity and for a concentric disk of radius `r` with `sigma1`,
/// against the separation-of-variables values. Mode `n` appears twice in the
/// spectrum (cosine and sine); both are compared.
pub fn oracle_table(target_h: f64, m: usize, sigma1: f64, r: f64) -> Result<Vec<OracleRow>> {
    let mesh = crate::geometry::build_disk_mesh(1.0, target_h)?;
    let model = ForwardModel::new(mesh, m)?;
    let mut rows = Vec::new();
    for s1 in [1.0, sigma1] {
        let values: Vec<f64> = model
            .mesh()
            .triangles
            .iter()
            .enumerate()
            .map(|(t, _)| {
                let c = model.mesh().centroid(t);
                if c[0].hypot(c[1]) < r {
                    s1
                } else {
                    1.0
                }
            })
            .collect();
        let field = ConductivityField::from_values(values)?;
        let mut eig = model.assemble_nd(&field)?.eigenvalues()?;
        eig.reverse();
        for (i, &computed) in eig.iter().enumerate() {
            let mode = i / 2 + 1;
            let reference = annulus_nd_reference(1.0, s1, r, mode)?;
            rows.push(OracleRow {
                sigma1: s1,
                mode,
                reference,
                computed,
                rel_error: (computed - reference).abs() / reference,
            });
        }
    }
    Ok(rows)
}
