//! The layered reconstruction: peel each component of `D_k`, split the result
//! into components of `D_{k+1}`, classify and recover their constants, and
//! repeat until a layer comes out empty.

mod constants;
mod layers;
mod peel;

use web_time::Instant;

use serde::{Deserialize, Serialize};

pub use constants::{
    classify_component, classify_component_detailed, default_delta_c, recover_constant,
    recover_constant_detailed, Classification, ConstantEstimate, Probe,
};
pub use layers::{ComponentJson, DecompositionJson, LayerComponent, LayerDecomposition};
pub use peel::{
    detect_layer_component, detect_layer_component_detailed, Detection, DetectionSummary,
};

use crate::error::{Error, Result};
use crate::forward::{ConductivityField, ForwardModel, NdMatrix};
use crate::geometry::PixelGrid;
use crate::monotonicity::{DetectedComponent, Priors, PsdRecord, ReconstructionState, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    /// Absolute tolerance on smallest eigenvalues.
    pub eps: f64,
    /// Bisection bracket width.
    pub delta_c: f64,
    pub max_layers: usize,
    /// Detected components with fewer pixels are dropped.
    pub min_component_pixels: usize,
}

impl ReconstructOptions {
    /// `δ_c = 1e-3 (β_U − β_L)`, at most 8 layers, minimum size `⌈(τ/h_px)²⌉`.
    pub fn with_defaults(priors: &Priors, h_px: f64, eps: f64) -> Self {
        Self {
            eps,
            delta_c: default_delta_c(priors.beta_l, priors.beta_u),
            max_layers: 8,
            min_component_pixels: ((priors.tau / h_px).powi(2) - 1e-9).ceil().max(1.0) as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    #[serde(rename = "empty-layer")]
    EmptyLayer,
    #[serde(rename = "max-layers")]
    MaxLayers,
    #[serde(rename = "ambiguity-abort")]
    AmbiguityAbort,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSummary {
    pub parent: usize,
    pub pixels: usize,
    pub sign: Sign,
    pub constant: f64,
    pub alpha: f64,
    pub classification: Classification,
    pub bisection_iterations: usize,
    pub probes: Vec<Probe>,
}

/// Diagnostics of one call to [`advance`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub detections: Vec<DetectionSummary>,
    /// Sizes of detected components dropped as too small.
    pub discarded: Vec<usize>,
    pub components: Vec<ComponentSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub decomposition: LayerDecomposition,
    pub levels: Vec<LevelReport>,
    pub termination: Termination,
    /// The error that stopped the iteration, for [`Termination::AmbiguityAbort`].
    pub abort: Option<String>,
    /// Supports detected at the aborted level whose constants were not recovered.
    pub unresolved: Vec<DetectedComponent>,
    pub options: ReconstructOptions,
    pub field: ConductivityField,
    pub pixel_values: Vec<f64>,
    pub psd_log: Vec<PsdRecord>,
    pub timings: Vec<StageTiming>,
}

/// One step of the method. Returns `None` when every component peels to the
/// empty set, otherwise the state at level `k + 1`.
pub fn advance<'a>(
    state: &mut ReconstructionState<'a>,
    options: &ReconstructOptions,
) -> Result<Option<ReconstructionState<'a>>> {
    let mut report = LevelReport::default();
    let mut timings = Vec::new();
    advance_detailed(state, options, &mut report, &mut timings)
}

pub fn advance_detailed<'a>(
    state: &mut ReconstructionState<'a>,
    options: &ReconstructOptions,
    report: &mut LevelReport,
    timings: &mut Vec<StageTiming>,
) -> Result<Option<ReconstructionState<'a>>> {
    let level = state.level();
    report.level = level;
    let grid = state.grid();

    let clock = Instant::now();
    let mut union = grid.empty_set();
    for n0 in 0..state.components().len() {
        let det = detect_layer_component_detailed(state, n0)?;
        report.detections.push(det.summary(n0));
        union = union.union(&det.pixels);
    }
    timings.push(StageTiming {
        stage: format!("detect:{level}"),
        seconds: clock.elapsed().as_secs_f64(),
    });

    let mut detected = Vec::new();
    for (m, pixels) in grid.connected_components(&union).into_iter().enumerate() {
        if pixels.len() < options.min_component_pixels {
            log::info!(
                "level {level}: dropping component of {} pixels",
                pixels.len()
            );
            report.discarded.push(pixels.len());
            continue;
        }
        let parents: Vec<usize> = state
            .components()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.pixels.is_disjoint(&pixels))
            .map(|(n, _)| n)
            .collect();
        if parents.len() != 1 {
            return Err(Error::StraddlingComponent {
                component: m,
                parents,
            });
        }
        let parent = parents[0];
        detected.push(DetectedComponent {
            pixels,
            parent,
            alpha_hat: state.components()[parent].alpha,
        });
    }
    if detected.is_empty() {
        return Ok(None);
    }
    state.set_detected(detected)?;

    let clock = Instant::now();
    let mut constants = Vec::new();
    for m0 in 0..state.detected().len() {
        let class = classify_component_detailed(state, m0)?;
        let est = recover_constant_detailed(state, m0, class.sign, options.delta_c)?;
        let d = &state.detected()[m0];
        log::info!(
            "level {level}: component {m0} ({} pixels) sign {} constant {}",
            d.pixels.len(),
            class.sign,
            est.value
        );
        report.components.push(ComponentSummary {
            parent: d.parent,
            pixels: d.pixels.len(),
            sign: class.sign,
            constant: est.value,
            alpha: d.alpha_hat + est.value,
            classification: class,
            bisection_iterations: est.iterations,
            probes: est.probes,
        });
        constants.push(est.value);
    }
    timings.push(StageTiming {
        stage: format!("constants:{level}"),
        seconds: clock.elapsed().as_secs_f64(),
    });

    let clock = Instant::now();
    let next = state.advanced(&constants)?;
    timings.push(StageTiming {
        stage: format!("update:{level}"),
        seconds: clock.elapsed().as_secs_f64(),
    });
    Ok(Some(next))
}

/// Errors that mean the data and priors do not support another layer.
fn is_data_inconsistency(e: &Error) -> bool {
    matches!(
        e.root(),
        Error::InitNotPsd { .. }
            | Error::SignAmbiguous { .. }
            | Error::PriorBoundsViolated { .. }
            | Error::BracketFailed { .. }
            | Error::StraddlingComponent { .. }
    )
}

/// Run the method from `γ_0 ≡ c0`, `D_0 = Ω̄` until a layer is empty,
/// `max_layers` layers are found, or the tests become inconsistent.
pub fn reconstruct(
    measured: &NdMatrix,
    priors: &Priors,
    model: &ForwardModel,
    grid: &PixelGrid,
    options: &ReconstructOptions,
) -> Result<ReconstructionReport> {
    let clock = Instant::now();
    let mut state = ReconstructionState::new(model, grid, measured.clone(), *priors, options.eps)?;
    let mut timings = vec![StageTiming {
        stage: "init".into(),
        seconds: clock.elapsed().as_secs_f64(),
    }];
    let mut decomposition = LayerDecomposition::empty(priors.c0, priors.tau);
    let mut levels = Vec::new();
    let mut abort = None;
    let mut unresolved = Vec::new();
    let termination = loop {
        if state.level() >= options.max_layers {
            break Termination::MaxLayers;
        }
        let mut level = LevelReport::default();
        let step = advance_detailed(&mut state, options, &mut level, &mut timings);
        levels.push(level);
        match step {
            Ok(None) => break Termination::EmptyLayer,
            Ok(Some(next)) => {
                decomposition.layers.push(
                    state
                        .detected()
                        .iter()
                        .zip(&levels.last().expect("just pushed").components)
                        .map(|(d, s)| LayerComponent {
                            pixels: d.pixels.clone(),
                            constant: s.constant,
                            parent: d.parent,
                        })
                        .collect(),
                );
                state = next;
            }
            Err(e) if is_data_inconsistency(&e) => {
                log::warn!("level {}: {e}", state.level());
                abort = Some(format!("level {}: {e}", state.level()));
                unresolved = state.detected().to_vec();
                break Termination::AmbiguityAbort;
            }
            Err(e) => return Err(e),
        }
    };
    Ok(ReconstructionReport {
        decomposition,
        levels,
        termination,
        abort,
        unresolved,
        options: *options,
        field: state.gamma().clone(),
        pixel_values: state.pixel_values().to_vec(),
        psd_log: state.psd_log(),
        timings,
    })
}
