use layered_eit::forward::{ConductivityField, ForwardModel, NdMatrix};
use layered_eit::geometry::{build_fitted_disk_mesh, pixelize, PixelGrid, PixelSet};
use layered_eit::monotonicity::{DetectedComponent, Priors, ReconstructionState, Sign};
use layered_eit::phantoms::validate_pclc;
use layered_eit::pipeline::{build_setup, parse_config_str, simulate, Setup};
use layered_eit::reconstruct::*;
use proptest::prelude::*;
use std::sync::OnceLock;

struct Desk {
    setup: Setup,
    priors: Priors,
    measured: NdMatrix,
    truth: PixelSet,
}

fn one_layer(constant: f64, beta_l: f64, beta_u: f64) -> Desk {
    let text = format!(
        r#"{{
        "domain": {{"radius": 1.0, "target_h": 0.05, "data_mesh_refinement": 1}},
        "h_px": 0.1, "basis_size": 16,
        "priors": {{"c0": 1.0, "beta_l": {beta_l}, "beta_u": {beta_u}, "tau": 0.2}},
        "tolerances": {{"eps": 1e-10}},
        "phantom": {{"layers": [[{{"shapes": [{{"type": "disk", "center": [0.1, 0.0], "radius": 0.55}}], "constant": {constant}}}]]}}
    }}"#
    );
    let cfg = parse_config_str(&text).unwrap();
    let setup = build_setup(&cfg).unwrap();
    let truth = validate_pclc(&cfg.phantom_spec(), &setup.grid).unwrap();
    let measured = simulate(&cfg, &setup, &truth).unwrap().measured;
    Desk {
        priors: cfg.priors,
        measured,
        truth: truth.layers[0][0].pixels.clone(),
        setup,
    }
}

impl Desk {
    fn state(&self) -> ReconstructionState<'_> {
        ReconstructionState::new(
            &self.setup.model,
            &self.setup.grid,
            self.measured.clone(),
            self.priors,
            1e-10,
        )
        .unwrap()
    }
}

fn margins(st: &ReconstructionState, c: &PixelSet) -> f64 {
    let plus = st.build_t(0, c, Sign::Plus).unwrap().min_eig().unwrap();
    let minus = st.build_t(0, c, Sign::Minus).unwrap().min_eig().unwrap();
    plus.min(minus)
}

/// Pixels within `rings` pixel steps of the boundary of `set`, on either side.
fn boundary_band(grid: &PixelGrid, set: &PixelSet, rings: f64) -> PixelSet {
    let tau = rings * grid.h + 1e-9;
    let outside = grid.inside_set().difference(set);
    let inner = set.difference(&grid.thin_tau(set, tau));
    let outer = outside.difference(&grid.thin_tau(&outside, tau));
    inner.union(&outer)
}

#[test]
fn homogeneous_truth_has_no_layers() {
    let h = 0.2;
    let mesh = build_fitted_disk_mesh(1.0, 0.1, h).unwrap();
    let grid = pixelize(&mesh, h).unwrap();
    let model = ForwardModel::new(mesh, 10).unwrap();
    let measured = model
        .assemble_nd(&ConductivityField::constant(model.mesh().n_triangles(), 1.5).unwrap())
        .unwrap();
    let priors = Priors {
        c0: 1.5,
        beta_l: 1.0,
        beta_u: 2.0,
        tau: 0.4,
    };
    let options = ReconstructOptions::with_defaults(&priors, h, 1e-10);
    let report = reconstruct(&measured, &priors, &model, &grid, &options).unwrap();
    assert_eq!(report.termination, Termination::EmptyLayer);
    assert_eq!(report.decomposition.n_layers(), 0);
    assert_eq!(report.levels.len(), 1);
    assert!(report.field.values().iter().all(|&v| v == 1.5));

    let mut state = ReconstructionState::new(&model, &grid, measured, priors, 1e-10).unwrap();
    assert!(advance(&mut state, &options).unwrap().is_none());
    let gamma = state.gamma().clone();
    assert!(advance(&mut state, &options).unwrap().is_none());
    assert_eq!(state.gamma(), &gamma);
    assert_eq!(state.level(), 0);
}

#[test]
fn peeling_ends_at_an_admissible_fixed_point() {
    let desk = one_layer(0.3, 1.0, 1.3);
    let st = desk.state();
    let det = detect_layer_component_detailed(&st, 0).unwrap();
    let grid = &desk.setup.grid;
    assert!(grid.is_admissible(&det.pixels, &grid.inside_set()).unwrap());
    assert!(margins(&st, &det.pixels) >= -st.eps());
    for p in grid.peelable_pixels(&det.pixels) {
        assert!(
            margins(&st, &det.pixels.without(p)) < -st.eps(),
            "pixel {p} is still removable"
        );
    }
    assert_eq!(det.initial_size, grid.inside_count());
    assert!(det.empty_margins.0 < 0.0);
}

#[test]
fn one_layer_support_is_found_up_to_the_boundary_band() {
    let desk = one_layer(0.3, 1.0, 1.3);
    let st = desk.state();
    let det = detect_layer_component(&st, 0).unwrap();
    let grid = &desk.setup.grid;
    let wrong = det
        .difference(&desk.truth)
        .union(&desk.truth.difference(&det));
    let band = boundary_band(grid, &desk.truth, 2.0);
    assert!(
        wrong.is_subset(&band),
        "{} misplaced pixels",
        wrong.difference(&band).len()
    );
    assert!(
        det.jaccard(&desk.truth) >= 0.75,
        "jaccard {}",
        det.jaccard(&desk.truth)
    );
}

#[test]
fn constants_from_the_true_support() {
    for (c, beta_l, beta_u, sign) in [(0.3, 1.0, 1.3, Sign::Plus), (-0.35, 0.6, 1.0, Sign::Minus)] {
        let desk = one_layer(c, beta_l, beta_u);
        let mut st = desk.state();
        st.set_detected(vec![DetectedComponent {
            pixels: desk.truth.clone(),
            parent: 0,
            alpha_hat: 1.0,
        }])
        .unwrap();
        let class = classify_component_detailed(&st, 0).unwrap();
        assert_eq!(class.sign, sign);
        assert!(class.linearised);
        let delta_c = default_delta_c(beta_l, beta_u);
        let est = recover_constant_detailed(&st, 0, sign, delta_c).unwrap();
        let tol = delta_c.max(0.05 * c.abs());
        assert!((est.value - c).abs() <= tol, "c = {c}: got {}", est.value);
        let first = &est.probes[..2];
        assert!(first[0].psd && !first[1].psd);
        assert!(est
            .probes
            .iter()
            .all(|p| p.psd == (p.value.abs() >= est.value.abs() - 1e-15)));
    }
}

#[test]
fn no_remaining_perturbation_is_ambiguous() {
    let desk = one_layer(0.3, 1.0, 1.3);
    let mut st = ReconstructionState::new(
        &desk.setup.model,
        &desk.setup.grid,
        desk.setup
            .model
            .assemble_nd(
                &ConductivityField::constant(desk.setup.model.mesh().n_triangles(), 1.0).unwrap(),
            )
            .unwrap(),
        desk.priors,
        1e-10,
    )
    .unwrap();
    st.set_detected(vec![DetectedComponent {
        pixels: desk.truth.clone(),
        parent: 0,
        alpha_hat: 1.0,
    }])
    .unwrap();
    assert!(matches!(
        classify_component(&st, 0),
        Err(layered_eit::Error::SignAmbiguous { .. })
    ));
}

#[test]
fn bisection_rejects_bad_tolerance() {
    let desk = one_layer(0.3, 1.0, 1.3);
    let mut st = desk.state();
    st.set_detected(vec![DetectedComponent {
        pixels: desk.truth.clone(),
        parent: 0,
        alpha_hat: 1.0,
    }])
    .unwrap();
    assert!(recover_constant(&st, 0, Sign::Plus, 0.0).is_err());
    assert!(recover_constant(&st, 0, Sign::Plus, f64::NAN).is_err());
}

fn fill_holes(grid: &PixelGrid, c: &PixelSet) -> PixelSet {
    let mut all = PixelSet::empty(grid.nx, grid.ny);
    for p in 0..grid.len() {
        all.insert(p);
    }
    let mut out = c.clone();
    for comp in grid.connected_components(&all.difference(c)) {
        let touches_frame = comp.iter().any(|p| {
            let (ix, iy) = grid.coords(p);
            ix == 0 || iy == 0 || ix + 1 == grid.nx || iy + 1 == grid.ny
        });
        if !touches_frame {
            out = out.union(&comp);
        }
    }
    out
}

fn shared_desk() -> &'static (Desk, PixelSet) {
    static DESK: OnceLock<(Desk, PixelSet)> = OnceLock::new();
    DESK.get_or_init(|| {
        let desk = one_layer(0.3, 1.0, 1.3);
        let det = detect_layer_component(&desk.state(), 0).unwrap();
        (desk, det)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn supersets_of_the_detection_pass(extra in proptest::collection::vec(0u8..4, 400)) {
        let (desk, det) = shared_desk();
        let st = desk.state();
        let grid = &desk.setup.grid;
        let mut c = det.clone();
        for (i, p) in grid.inside_set().difference(det).iter().enumerate() {
            if extra[i % extra.len()] == 0 {
                c.insert(p);
            }
        }
        let c = fill_holes(grid, &c);
        prop_assert!(grid.is_admissible(&c, &grid.inside_set()).unwrap());
        prop_assert!(margins(&st, &c) >= -(st.eps() + 1e-10));
    }
}
