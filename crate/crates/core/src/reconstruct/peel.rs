use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PixelSet;
use crate::monotonicity::{ReconstructionState, Sign};

/// Outcome of peeling one component of `D_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub pixels: PixelSet,
    /// Margins of `T±(∅)`.
    pub empty_margins: (f64, f64),
    /// Margins of `T±` at the returned set (equal to `empty_margins` when it is empty).
    pub final_margins: (f64, f64),
    pub initial_size: usize,
    pub scans: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionSummary {
    pub parent: usize,
    pub pixels: usize,
    pub initial_size: usize,
    pub scans: usize,
    pub empty_margins: [f64; 2],
    pub final_margins: [f64; 2],
}

impl Detection {
    pub fn summary(&self, parent: usize) -> DetectionSummary {
        DetectionSummary {
            parent,
            pixels: self.pixels.len(),
            initial_size: self.initial_size,
            scans: self.scans,
            empty_margins: [self.empty_margins.0, self.empty_margins.1],
            final_margins: [self.final_margins.0, self.final_margins.1],
        }
    }
}

/// `D_{k+1} ∩ D_{k,n0}` by greedy layer peeling.
pub fn detect_layer_component(state: &ReconstructionState, n0: usize) -> Result<PixelSet> {
    Ok(detect_layer_component_detailed(state, n0)?.pixels)
}

pub fn detect_layer_component_detailed(
    state: &ReconstructionState,
    n0: usize,
) -> Result<Detection> {
    let grid = state.grid();
    let cache = state.frechet_cache();
    let pair = state.t_pair(n0)?;
    let empty = grid.empty_set();
    let zero = cache.sum(&empty)?;
    let (plus_ok, plus) = state.test_psd(&pair.plus(&zero), n0, "empty", Sign::Plus)?;
    let (minus_ok, minus) = state.test_psd(&pair.minus(&zero), n0, "empty", Sign::Minus)?;
    if plus_ok && minus_ok {
        return Ok(Detection {
            pixels: empty,
            empty_margins: (plus, minus),
            final_margins: (plus, minus),
            initial_size: 0,
            scans: 0,
        });
    }

    let parent = &state.components()[n0].pixels;
    let mut c = if state.level() == 0 {
        parent.clone()
    } else {
        grid.thin_tau(parent, state.priors().tau)
    };
    let initial_size = c.len();
    let mut d = cache.sum(&c)?;
    let (p_ok, mut p_margin) = state.test_psd(&pair.plus(&d), n0, "init", Sign::Plus)?;
    let (m_ok, mut m_margin) = state.test_psd(&pair.minus(&d), n0, "init", Sign::Minus)?;
    if !(p_ok && m_ok) || c.is_empty() {
        return Err(Error::InitNotPsd {
            component: n0,
            plus: p_margin,
            minus: m_margin,
            eps: state.eps(),
        });
    }

    // Each scan visits the boundary of the scan's starting set in row-major order.
    let mut scans = 0;
    loop {
        scans += 1;
        let mut removed = false;
        for p in grid.peelable_pixels(&c) {
            let dp = cache.pixel(p).expect("pixel of D_k is cached");
            let candidate_d = &d - dp;
            let label = format!("peel:{p}");
            let (ok_plus, mp) = state.test_psd(&pair.plus(&candidate_d), n0, &label, Sign::Plus)?;
            if !ok_plus {
                continue;
            }
            let (ok_minus, mm) =
                state.test_psd(&pair.minus(&candidate_d), n0, &label, Sign::Minus)?;
            if !ok_minus {
                continue;
            }
            c.remove(p);
            d = candidate_d;
            p_margin = mp;
            m_margin = mm;
            removed = true;
        }
        if !removed {
            break;
        }
    }
    Ok(Detection {
        pixels: c,
        empty_margins: (plus, minus),
        final_margins: (p_margin, m_margin),
        initial_size,
        scans,
    })
}
