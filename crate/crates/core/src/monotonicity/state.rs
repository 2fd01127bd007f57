use std::cell::RefCell;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{ConductivityField, ForwardModel, FrechetCache, NdMatrix};
use crate::geometry::{PixelGrid, PixelSet};
use crate::io::fmt_g17;

/// Known a priori: background `c0`, bounds `beta_l ≤ γ ≤ beta_u`, layer separation `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    pub c0: f64,
    pub beta_l: f64,
    pub beta_u: f64,
    pub tau: f64,
}

impl Priors {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.beta_l.is_finite() && self.beta_l > 0.0) {
            problems.push(format!("beta_l = {} must be positive", self.beta_l));
        }
        if !(self.beta_u.is_finite() && self.beta_u > self.beta_l) {
            problems.push(format!(
                "beta_u = {} must exceed beta_l = {}",
                self.beta_u, self.beta_l
            ));
        }
        if !(self.c0.is_finite() && self.c0 >= self.beta_l && self.c0 <= self.beta_u) {
            problems.push(format!("c0 = {} must lie in [beta_l, beta_u]", self.c0));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            problems.push(format!("tau = {} must be positive", self.tau));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A connected component `D_{k,n}` with the value `α_{k,n}` of `γ_k` on it.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRecord {
    pub pixels: PixelSet,
    pub alpha: f64,
    pub parent: Option<usize>,
}

/// A component `D_{k+1,m}` found by peeling, before its constant is known.
/// `alpha_hat` is the value of `γ_k` on the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedComponent {
    pub pixels: PixelSet,
    pub parent: usize,
    pub alpha_hat: f64,
}

/// One semidefiniteness test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdRecord {
    pub level: usize,
    pub component: usize,
    pub candidate: String,
    pub sign: Sign,
    pub min_eig: f64,
    pub verdict: bool,
}

/// `T±(C) = base ± coef · DΛ(γ_k; χ_C)` for a fixed component.
#[derive(Debug, Clone)]
pub struct TPair {
    pub plus_base: NdMatrix,
    pub plus_coef: f64,
    pub minus_base: NdMatrix,
    pub minus_coef: f64,
}

impl TPair {
    pub fn plus(&self, d: &NdMatrix) -> NdMatrix {
        let mut t = self.plus_base.clone();
        t.axpy(-self.plus_coef, d);
        t.symmetrized()
    }

    pub fn minus(&self, d: &NdMatrix) -> NdMatrix {
        let mut t = self.minus_base.clone();
        t.axpy(self.minus_coef, d);
        t.symmetrized()
    }
}

/// Reconstruction at level `k`: `γ_k`, its components, and cached derivatives.
pub struct ReconstructionState<'a> {
    model: &'a ForwardModel,
    grid: &'a PixelGrid,
    measured: NdMatrix,
    priors: Priors,
    eps: f64,
    level: usize,
    pixel_values: Vec<f64>,
    gamma: ConductivityField,
    components: Vec<ComponentRecord>,
    history: Vec<Vec<ComponentRecord>>,
    next: Vec<DetectedComponent>,
    nd_gamma: NdMatrix,
    cache: FrechetCache,
    component_frechet: Vec<NdMatrix>,
    log: RefCell<Vec<PsdRecord>>,
}

impl<'a> ReconstructionState<'a> {
    /// Level 0: `γ_0 ≡ c0` on the single component made of all inside pixels.
    pub fn new(
        model: &'a ForwardModel,
        grid: &'a PixelGrid,
        measured: NdMatrix,
        priors: Priors,
        eps: f64,
    ) -> Result<Self> {
        priors.validate()?;
        model.check_grid(grid)?;
        if measured.dim() != model.basis_size() {
            return Err(Error::Dimension {
                expected: model.basis_size(),
                got: measured.dim(),
            });
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::Config(vec![format!(
                "eps = {eps} must be non-negative"
            )]));
        }
        let components = vec![ComponentRecord {
            pixels: grid.inside_set(),
            alpha: priors.c0,
            parent: None,
        }];
        let pixel_values = vec![priors.c0; grid.len()];
        Self::assemble(
            model,
            grid,
            measured.symmetrized(),
            priors,
            eps,
            0,
            pixel_values,
            components,
            Vec::new(),
            Vec::new(),
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        model: &'a ForwardModel,
        grid: &'a PixelGrid,
        measured: NdMatrix,
        priors: Priors,
        eps: f64,
        level: usize,
        pixel_values: Vec<f64>,
        components: Vec<ComponentRecord>,
        history: Vec<Vec<ComponentRecord>>,
        log: Vec<PsdRecord>,
    ) -> Result<Self> {
        let gamma = field_from_pixels(model, grid, &pixel_values, &priors)?;
        let (nd_gamma, potentials) = model.assemble_nd_with_potentials(&gamma)?;
        let region = components
            .iter()
            .fold(grid.empty_set(), |acc, c| acc.union(&c.pixels));
        let cache = potentials.pixel_frechet(grid, &region);
        let component_frechet = components
            .iter()
            .map(|c| cache.sum(&c.pixels))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            grid,
            measured,
            priors,
            eps,
            level,
            pixel_values,
            gamma,
            components,
            history,
            next: Vec::new(),
            nd_gamma: nd_gamma.symmetrized(),
            cache,
            component_frechet,
            log: RefCell::new(log),
        })
    }

    /// The state at level `k + 1` given the constants of the detected components.
    pub fn advanced(&self, constants: &[f64]) -> Result<ReconstructionState<'a>> {
        if constants.len() != self.next.len() || self.next.is_empty() {
            return Err(Error::Dimension {
                expected: self.next.len(),
                got: constants.len(),
            });
        }
        let mut pixel_values = self.pixel_values.clone();
        let mut components = Vec::with_capacity(self.next.len());
        for (d, &c) in self.next.iter().zip(constants) {
            for p in d.pixels.iter() {
                pixel_values[p] += c;
            }
            components.push(ComponentRecord {
                pixels: d.pixels.clone(),
                alpha: d.alpha_hat + c,
                parent: Some(d.parent),
            });
        }
        let mut history = self.history.clone();
        history.push(self.components.clone());
        Self::assemble(
            self.model,
            self.grid,
            self.measured.clone(),
            self.priors,
            self.eps,
            self.level + 1,
            pixel_values,
            components,
            history,
            self.log.borrow().clone(),
        )
    }

    pub fn model(&self) -> &'a ForwardModel {
        self.model
    }

    pub fn grid(&self) -> &'a PixelGrid {
        self.grid
    }

    pub fn measured(&self) -> &NdMatrix {
        &self.measured
    }

    pub fn priors(&self) -> &Priors {
        &self.priors
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `γ_k` on the triangles.
    pub fn gamma(&self) -> &ConductivityField {
        &self.gamma
    }

    /// `γ_k` on the pixels (`c0` outside the disk).
    pub fn pixel_values(&self) -> &[f64] {
        &self.pixel_values
    }

    pub fn nd_gamma(&self) -> &NdMatrix {
        &self.nd_gamma
    }

    pub fn components(&self) -> &[ComponentRecord] {
        &self.components
    }

    pub fn history(&self) -> &[Vec<ComponentRecord>] {
        &self.history
    }

    pub fn frechet_cache(&self) -> &FrechetCache {
        &self.cache
    }

    /// `DΛ(γ_k; χ_{D_{k,n}})`.
    pub fn component_frechet(&self, n: usize) -> Result<&NdMatrix> {
        self.component_frechet.get(n).ok_or(Error::IndexOutOfRange {
            index: n,
            len: self.components.len(),
        })
    }

    pub fn detected(&self) -> &[DetectedComponent] {
        &self.next
    }

    /// Record the components of `D_{k+1}`. Each must lie in its parent.
    pub fn set_detected(&mut self, next: Vec<DetectedComponent>) -> Result<()> {
        for (m, d) in next.iter().enumerate() {
            let parent = self
                .components
                .get(d.parent)
                .ok_or(Error::IndexOutOfRange {
                    index: d.parent,
                    len: self.components.len(),
                })?;
            self.grid.check_compatible(&d.pixels)?;
            if !d.pixels.is_subset(&parent.pixels) {
                return Err(Error::NotSubset { component: m });
            }
            if d.pixels.is_empty() {
                return Err(Error::Assumption {
                    item: "(i)",
                    layer: self.level + 1,
                    component: m,
                    detail: "empty component".into(),
                });
            }
            if next[..m].iter().any(|o| !o.pixels.is_disjoint(&d.pixels)) {
                return Err(Error::Assumption {
                    item: "(i)",
                    layer: self.level + 1,
                    component: m,
                    detail: "overlaps another component".into(),
                });
            }
        }
        self.next = next;
        Ok(())
    }

    pub fn psd_log(&self) -> Vec<PsdRecord> {
        self.log.borrow().clone()
    }

    /// Write the log as `level,component,candidate,sign,min_eig,verdict`.
    pub fn write_psd_log(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "level,component,candidate,sign,min_eig,verdict")?;
        for r in self.log.borrow().iter() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.level,
                r.component,
                r.candidate,
                r.sign,
                fmt_g17(r.min_eig),
                r.verdict
            )?;
        }
        Ok(())
    }

    /// Smallest eigenvalue of `a` and whether it is at least `−ε`; logged.
    pub fn test_psd(
        &self,
        a: &NdMatrix,
        component: usize,
        candidate: &str,
        sign: Sign,
    ) -> Result<(bool, f64)> {
        let min_eig = a.min_eig()?;
        let verdict = min_eig >= -self.eps;
        self.log.borrow_mut().push(PsdRecord {
            level: self.level,
            component,
            candidate: candidate.to_string(),
            sign,
            min_eig,
            verdict,
        });
        Ok((verdict, min_eig))
    }

    fn component(&self, n: usize) -> Result<&ComponentRecord> {
        self.components.get(n).ok_or(Error::IndexOutOfRange {
            index: n,
            len: self.components.len(),
        })
    }

    fn detected_component(&self, m: usize) -> Result<&DetectedComponent> {
        self.next.get(m).ok_or(Error::IndexOutOfRange {
            index: m,
            len: self.next.len(),
        })
    }

    /// The parts of `T±_{k,n0}` that do not depend on the test inclusion.
    pub fn t_pair(&self, n0: usize) -> Result<TPair> {
        let (bl, bu) = (self.priors.beta_l, self.priors.beta_u);
        let mut plus_base = &self.measured - &self.nd_gamma;
        let mut minus_base = &self.nd_gamma - &self.measured;
        for (n, c) in self.components.iter().enumerate() {
            if n == n0 {
                continue;
            }
            plus_base.axpy(-(bu - c.alpha), &self.component_frechet[n]);
            minus_base.axpy(c.alpha / bl * (bl - c.alpha), &self.component_frechet[n]);
        }
        let a0 = self.component(n0)?.alpha;
        Ok(TPair {
            plus_base,
            plus_coef: bu - a0,
            minus_base,
            minus_coef: a0 / bl * (bl - a0),
        })
    }

    /// `T±_{k,n0}(C)`.
    pub fn build_t(&self, n0: usize, c: &PixelSet, sign: Sign) -> Result<NdMatrix> {
        let comp = self.component(n0)?;
        self.grid.check_compatible(c)?;
        if !c.is_subset(&comp.pixels) {
            return Err(Error::NotSubset { component: n0 });
        }
        let pair = self.t_pair(n0)?;
        let d = self.cache.sum(c)?;
        Ok(match sign {
            Sign::Plus => pair.plus(&d),
            Sign::Minus => pair.minus(&d),
        })
    }

    fn beta(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Plus => self.priors.beta_u,
            Sign::Minus => self.priors.beta_l,
        }
    }

    /// Admissible range of the outer-layer perturbation: `[0, β_U − α̂]` or `[β_L − α̂, 0]`.
    pub fn value_range(&self, m0: usize, sign: Sign) -> Result<(f64, f64)> {
        let a = self.detected_component(m0)?.alpha_hat;
        Ok(match sign {
            Sign::Plus => (0.0, self.priors.beta_u - a),
            Sign::Minus => (self.priors.beta_l - a, 0.0),
        })
    }

    /// `γ_{k,m0,β} + value · χ_{F_τ(D_{k+1,m0})}` with `β = β_U` for `Plus`, `β_L` for `Minus`.
    pub fn build_gamma_test(&self, m0: usize, beta: Sign, value: f64) -> Result<ConductivityField> {
        let (lower, upper) = self.value_range(m0, beta)?;
        let slack = 1e-12 * self.priors.beta_u;
        if !(value.is_finite() && value >= lower - slack && value <= upper + slack) {
            return Err(Error::ValueOutOfRange {
                value,
                lower,
                upper,
            });
        }
        let b = self.beta(beta);
        let mut values = self.pixel_values.clone();
        for (m, d) in self.next.iter().enumerate() {
            if m == m0 {
                let core = self.grid.thin_tau(&d.pixels, self.priors.tau);
                for p in d.pixels.iter() {
                    values[p] += if core.contains(p) {
                        b - d.alpha_hat
                    } else {
                        value
                    };
                }
            } else {
                for p in d.pixels.iter() {
                    values[p] += b - d.alpha_hat;
                }
            }
        }
        field_from_pixels(self.model, self.grid, &values, &self.priors)
    }

    /// `S+(value) = Λ_meas − Λ(γ_{k,m0,β_U} + value χ_F)` or
    /// `S−(value) = Λ(γ_{k,m0,β_L} + value χ_F) − Λ_meas`.
    pub fn build_s(&self, m0: usize, value: f64, sign: Sign) -> Result<NdMatrix> {
        let field = self.build_gamma_test(m0, sign, value)?;
        let nd = self.model.assemble_nd(&field)?;
        Ok(match sign {
            Sign::Plus => &self.measured - &nd,
            Sign::Minus => &nd - &self.measured,
        }
        .symmetrized())
    }

    /// `S̃±_{k,m0}`, the linearised sign test with `D̃ = H_τ(D_{k+1,m0})`.
    pub fn build_s_tilde(&self, m0: usize, sign: Sign) -> Result<NdMatrix> {
        self.detected_component(m0)?;
        let (bl, bu) = (self.priors.beta_l, self.priors.beta_u);
        let mut s = match sign {
            Sign::Plus => &self.measured - &self.nd_gamma,
            Sign::Minus => &self.nd_gamma - &self.measured,
        };
        for (m, d) in self.next.iter().enumerate() {
            let region = if m == m0 {
                self.grid.thin_tau(&d.pixels, self.priors.tau)
            } else {
                d.pixels.clone()
            };
            let dl = self.cache.sum(&region)?;
            let a = d.alpha_hat;
            match sign {
                Sign::Plus => s.axpy(-(bu - a), &dl),
                Sign::Minus => s.axpy(a / bl * (bl - a), &dl),
            }
        }
        Ok(s.symmetrized())
    }
}

/// Triangle field from pixel values; triangles off the inside pixels get `c0`.
pub(crate) fn field_from_pixels(
    model: &ForwardModel,
    grid: &PixelGrid,
    pixel_values: &[f64],
    priors: &Priors,
) -> Result<ConductivityField> {
    let values: Vec<f64> = grid
        .triangle_pixels()
        .iter()
        .map(|p| p.map_or(priors.c0, |p| pixel_values[p]))
        .collect();
    debug_assert_eq!(values.len(), model.mesh().n_triangles());
    if let Some(v) = values.iter().find(|v| **v <= 0.0 || !v.is_finite()) {
        return Err(Error::InvalidField(format!(
            "non-positive conductivity {v}"
        )));
    }
    let lower = values.iter().copied().fold(priors.beta_l, f64::min);
    let upper = values.iter().copied().fold(priors.beta_u, f64::max);
    ConductivityField::new(values, lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_fitted_disk_mesh, pixelize};
    use proptest::prelude::*;
    use std::sync::OnceLock;

    const H_PX: f64 = 0.2;

    fn desk() -> &'static (ForwardModel, PixelGrid) {
        static DESK: OnceLock<(ForwardModel, PixelGrid)> = OnceLock::new();
        DESK.get_or_init(|| {
            let mesh = build_fitted_disk_mesh(1.0, 0.1, H_PX).unwrap();
            let grid = pixelize(&mesh, H_PX).unwrap();
            (ForwardModel::new(mesh, 10).unwrap(), grid)
        })
    }

    fn priors(beta_l: f64, beta_u: f64) -> Priors {
        Priors {
            c0: 1.0,
            beta_l,
            beta_u,
            tau: 1.5 * H_PX,
        }
    }

    fn blob(grid: &PixelGrid) -> PixelSet {
        grid.set_where(|p| (p[0] - 0.1).hypot(p[1] + 0.05) <= 0.45)
    }

    /// Same-mesh data for `c0 + c χ_D`.
    fn data(d: &PixelSet, c: f64, p: &Priors) -> NdMatrix {
        let (model, grid) = desk();
        let mut values = vec![p.c0; grid.len()];
        for i in d.iter() {
            values[i] += c;
        }
        model
            .assemble_nd(&field_from_pixels(model, grid, &values, p).unwrap())
            .unwrap()
    }

    fn state_for(c: f64, p: Priors) -> (ReconstructionState<'static>, PixelSet) {
        let (model, grid) = desk();
        let d = blob(grid);
        let measured = data(&d, c, &p);
        (
            ReconstructionState::new(model, grid, measured, p, 1e-10).unwrap(),
            d,
        )
    }

    fn with_truth(c: f64, p: Priors) -> ReconstructionState<'static> {
        let (mut st, d) = state_for(c, p);
        st.set_detected(vec![DetectedComponent {
            pixels: d,
            parent: 0,
            alpha_hat: p.c0,
        }])
        .unwrap();
        st
    }

    #[test]
    fn t_is_psd_without_remaining_layers() {
        let p = priors(0.5, 2.0);
        let (model, grid) = desk();
        let measured = model
            .assemble_nd(&ConductivityField::constant(model.mesh().n_triangles(), 1.0).unwrap())
            .unwrap();
        let st = ReconstructionState::new(model, grid, measured, p, 1e-10).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let t = st.build_t(0, &grid.empty_set(), sign).unwrap();
            assert!(t.min_eig().unwrap() >= -1e-10, "{sign}");
            assert_eq!(t.asymmetry(), 0.0);
        }
    }

    #[test]
    fn t_separates_truth_from_a_missing_pixel() {
        let p = priors(1.0, 1.2);
        let (st, d) = state_for(0.2, p);
        assert!(st.build_t(0, &d, Sign::Plus).unwrap().min_eig().unwrap() >= -st.eps());
        assert!(st.build_t(0, &d, Sign::Minus).unwrap().min_eig().unwrap() >= -st.eps());
        for q in st.grid().peelable_pixels(&d) {
            let plus = st
                .build_t(0, &d.without(q), Sign::Plus)
                .unwrap()
                .min_eig()
                .unwrap();
            let minus = st
                .build_t(0, &d.without(q), Sign::Minus)
                .unwrap()
                .min_eig()
                .unwrap();
            assert!(plus.min(minus) < -st.eps(), "pixel {q}: {plus:e} {minus:e}");
        }
    }

    #[test]
    fn t_rejects_sets_outside_the_component() {
        let (mut st, d) = state_for(0.5, priors(0.5, 2.0));
        st.set_detected(vec![DetectedComponent {
            pixels: d.clone(),
            parent: 0,
            alpha_hat: 1.0,
        }])
        .unwrap();
        let next = st.advanced(&[0.5]).unwrap();
        let outside = st.grid().inside_set().difference(&d);
        assert!(matches!(
            next.build_t(0, &outside, Sign::Plus),
            Err(Error::NotSubset { component: 0 })
        ));
    }

    #[test]
    fn gamma_test_at_the_cap_is_flat_on_the_component() {
        let p = priors(0.5, 2.0);
        let st = with_truth(0.7, p);
        let d = &st.detected()[0].pixels;
        for (sign, beta) in [(Sign::Plus, 2.0), (Sign::Minus, 0.5)] {
            let (lo, hi) = st.value_range(0, sign).unwrap();
            let cap = if sign == Sign::Plus { hi } else { lo };
            let f = st.build_gamma_test(0, sign, cap).unwrap();
            for t in 0..f.len() {
                let expect = match st.grid().triangle_pixel(t) {
                    Some(q) if d.contains(q) => beta,
                    _ => 1.0,
                };
                assert!((f.value(t) - expect).abs() < 1e-14, "triangle {t}");
            }
            assert!(f.min() >= 0.5);
        }
        assert!(matches!(
            st.build_gamma_test(0, Sign::Plus, 1.5),
            Err(Error::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn s_plus_switches_between_zero_and_the_cap() {
        let c = 0.7;
        let st = with_truth(c, priors(0.5, 1.0 + c));
        let at = |v: f64| st.build_s(0, v, Sign::Plus).unwrap().min_eig().unwrap();
        assert!(at(c) >= -st.eps());
        assert!(at(0.5 * c) < -st.eps());
        assert!(at(0.0) < -st.eps());
        assert_eq!(st.build_s(0, c, Sign::Plus).unwrap().asymmetry(), 0.0);
    }

    #[test]
    fn s_tilde_follows_the_sign() {
        for (c, psd, not_psd) in [
            (0.7, Sign::Minus, Sign::Plus),
            (-0.4, Sign::Plus, Sign::Minus),
        ] {
            let st = with_truth(c, priors(1.0f64.min(1.0 + c), 1.0f64.max(1.0 + c)));
            let good = st.build_s_tilde(0, psd).unwrap().min_eig().unwrap();
            let bad = st.build_s_tilde(0, not_psd).unwrap().min_eig().unwrap();
            assert!(good >= -st.eps(), "c = {c}: {good:e}");
            assert!(bad < -st.eps(), "c = {c}: {bad:e}");
        }
    }

    #[test]
    fn psd_log_records_each_test() {
        let st = with_truth(0.7, priors(0.5, 2.0));
        let a = NdMatrix::from_diagonal(&[1.0, -1.0]);
        assert_eq!(st.test_psd(&a, 0, "x", Sign::Plus).unwrap(), (false, -1.0));
        let mut out = Vec::new();
        st.write_psd_log(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "level,component,candidate,sign,min_eig,verdict\n0,0,x,+,-1,false\n"
        );
    }

    #[test]
    fn set_detected_checks_components() {
        let (mut st, d) = state_for(0.7, priors(0.5, 2.0));
        let comp = |pixels: PixelSet| DetectedComponent {
            pixels,
            parent: 0,
            alpha_hat: 1.0,
        };
        assert!(st.set_detected(vec![comp(st.grid().empty_set())]).is_err());
        assert!(st
            .set_detected(vec![comp(d.clone()), comp(d.clone())])
            .is_err());
        assert!(st
            .set_detected(vec![DetectedComponent {
                parent: 3,
                ..comp(d)
            }])
            .is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn t_is_monotone_in_c(bits in proptest::collection::vec(0u8..3, 128)) {
            let st = with_truth(0.6, priors(0.5, 2.0));
            let inside: Vec<usize> = st.grid().inside_set().iter().collect();
            let mut small = st.grid().empty_set();
            let mut large = st.grid().empty_set();
            for (i, &p) in inside.iter().enumerate() {
                match bits[i % bits.len()] {
                    0 => {}
                    1 => large.insert(p),
                    _ => {
                        small.insert(p);
                        large.insert(p);
                    }
                }
            }
            for sign in [Sign::Plus, Sign::Minus] {
                let a = st.build_t(0, &small, sign).unwrap();
                let b = st.build_t(0, &large, sign).unwrap();
                let tol = 1e-10 * b.norm2().unwrap().max(1.0);
                prop_assert!((&b - &a).min_eig().unwrap() >= -tol);
                prop_assert!(b.min_eig().unwrap() >= a.min_eig().unwrap() - tol);
            }
        }
    }
}
