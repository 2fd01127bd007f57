//! Browser bindings: paint a one-layer phantom on a coarse pixel grid, probe the
//! support tests with a painted test set, peel, or run the full reconstruction.

use layered_eit::forward::{ConductivityField, ForwardModel, NdMatrix};
use layered_eit::geometry::{build_fitted_disk_mesh, pixelize, PixelGrid, PixelSet};
use layered_eit::monotonicity::{Priors, ReconstructionState, Sign};
use layered_eit::reconstruct::{
    detect_layer_component, reconstruct, ReconstructOptions, Termination,
};
use layered_eit::{Error, Result};
use wasm_bindgen::prelude::*;

const C0: f64 = 1.0;
const EPS: f64 = 1e-10;

#[wasm_bindgen]
pub struct Demo {
    model: ForwardModel,
    grid: PixelGrid,
    tau: f64,
    priors: Priors,
    measured: Option<NdMatrix>,
}

/// Result of a full reconstruction.
#[wasm_bindgen(getter_with_clone)]
pub struct Outcome {
    /// Recovered conductivity per grid pixel, row-major from the bottom row.
    pub values: Vec<f64>,
    pub layers: usize,
    pub termination: String,
    pub message: String,
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(h_px: f64, basis_size: usize) -> std::result::Result<Demo, JsError> {
        Demo::build(h_px, basis_size).map_err(js)
    }

    /// Pixels per grid row (the grid is square).
    pub fn side(&self) -> usize {
        self.grid.nx
    }

    /// 1 for pixels inside the disk.
    pub fn inside(&self) -> Vec<u8> {
        (0..self.grid.len())
            .map(|p| self.grid.is_inside(p) as u8)
            .collect()
    }

    /// Simulate data for `c0 + constant` on the painted pixels.
    #[wasm_bindgen(js_name = setTruth)]
    pub fn set_truth(&mut self, mask: &[u8], constant: f64) -> std::result::Result<(), JsError> {
        self.simulate(mask, constant).map_err(js)
    }

    /// Smallest eigenvalues of `T+(C)` and `T−(C)` at level 0; `[plus, minus, eps]`.
    pub fn margins(&self, mask: &[u8]) -> std::result::Result<Vec<f64>, JsError> {
        self.test_margins(mask).map_err(js)
    }

    /// The greedy layer-0 support.
    pub fn peel(&self) -> std::result::Result<Vec<u8>, JsError> {
        self.peel_support().map_err(js)
    }

    pub fn reconstruct(&self) -> std::result::Result<Outcome, JsError> {
        self.run().map_err(js)
    }
}

impl Demo {
    pub fn build(h_px: f64, basis_size: usize) -> Result<Demo> {
        let mesh = build_fitted_disk_mesh(1.0, 0.5 * h_px, h_px)?;
        let grid = pixelize(&mesh, h_px)?;
        let model = ForwardModel::new(mesh, basis_size)?;
        let tau = 2.0 * h_px;
        Ok(Demo {
            model,
            grid,
            tau,
            priors: Priors {
                c0: C0,
                beta_l: 0.5,
                beta_u: 2.0,
                tau,
            },
            measured: None,
        })
    }

    fn set_of(&self, mask: &[u8]) -> Result<PixelSet> {
        if mask.len() != self.grid.len() {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                got: mask.len(),
            });
        }
        self.grid
            .set_from_indices((0..mask.len()).filter(|&p| mask[p] != 0 && self.grid.is_inside(p)))
    }

    fn mask_of(&self, set: &PixelSet) -> Vec<u8> {
        (0..self.grid.len())
            .map(|p| set.contains(p) as u8)
            .collect()
    }

    /// Same-mesh data; the priors are set tight around the painted contrast.
    pub fn simulate(&mut self, mask: &[u8], constant: f64) -> Result<()> {
        let set = self.set_of(mask)?;
        if !(constant.is_finite() && constant > -C0) {
            return Err(Error::Config(vec![format!(
                "contrast {constant} must exceed {}",
                -C0
            )]));
        }
        let values = (0..self.model.mesh().n_triangles())
            .map(|t| match self.grid.triangle_pixel(t) {
                Some(p) if set.contains(p) => C0 + constant,
                _ => C0,
            })
            .collect();
        self.measured = Some(
            self.model
                .assemble_nd(&ConductivityField::from_values(values)?)?,
        );
        let spread = constant.abs().max(1e-3);
        self.priors = Priors {
            c0: C0,
            beta_l: C0.min(C0 + constant).min(C0 - 1e-3 * spread),
            beta_u: C0.max(C0 + constant).max(C0 + 1e-3 * spread),
            tau: self.tau,
        };
        Ok(())
    }

    fn state(&self) -> Result<ReconstructionState<'_>> {
        let measured = self
            .measured
            .clone()
            .ok_or_else(|| Error::Config(vec!["paint a phantom first".into()]))?;
        ReconstructionState::new(&self.model, &self.grid, measured, self.priors, EPS)
    }

    pub fn test_margins(&self, mask: &[u8]) -> Result<Vec<f64>> {
        let st = self.state()?;
        let set = self.set_of(mask)?;
        let plus = st.build_t(0, &set, Sign::Plus)?.min_eig()?;
        let minus = st.build_t(0, &set, Sign::Minus)?.min_eig()?;
        Ok(vec![plus, minus, EPS])
    }

    pub fn peel_support(&self) -> Result<Vec<u8>> {
        Ok(self.mask_of(&detect_layer_component(&self.state()?, 0)?))
    }

    pub fn run(&self) -> Result<Outcome> {
        let measured = self.state()?.measured().clone();
        let mut options = ReconstructOptions::with_defaults(&self.priors, self.grid.h, EPS);
        options.max_layers = 3;
        let report = reconstruct(&measured, &self.priors, &self.model, &self.grid, &options)?;
        let termination = match report.termination {
            Termination::EmptyLayer => "empty-layer",
            Termination::MaxLayers => "max-layers",
            Termination::AmbiguityAbort => "ambiguity-abort",
        };
        let mut values = report.pixel_values.clone();
        for d in &report.unresolved {
            for p in d.pixels.iter() {
                values[p] = f64::NAN;
            }
        }
        Ok(Outcome {
            values,
            layers: report.decomposition.n_layers(),
            termination: termination.into(),
            message: report.abort.unwrap_or_default(),
        })
    }
}
