use std::fs;
use std::path::Path;

use layered_eit::pipeline::{parse_config_str, run_pipeline};
use layered_eit::reconstruct::Termination;

fn config(layers: &str) -> String {
    format!(
        r#"{{
        "domain": {{"radius": 1.0, "target_h": 0.1, "data_mesh_refinement": 2}},
        "h_px": 0.1, "basis_size": 12,
        "priors": {{"c0": 1.0, "beta_l": 0.5, "beta_u": 2.0, "tau": 0.2}},
        "noise": {{"level": 1e-4, "seed": 11}},
        "phantom": {{"layers": {layers}}}
    }}"#
    )
}

const ONE: &str = r#"[[{"shapes": [{"type": "rect", "center": [0.2, 0.0], "size": [0.8, 0.6]}], "constant": 0.5}]]"#;

fn files(dir: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for sub in ["", "fields", "masks"] {
        for e in fs::read_dir(dir.join(sub)).unwrap() {
            let e = e.unwrap();
            if e.file_type().unwrap().is_file() {
                out.push(
                    Path::new(sub)
                        .join(e.file_name())
                        .to_string_lossy()
                        .into_owned(),
                );
            }
        }
    }
    out.sort();
    out
}

#[test]
fn homogeneous_run_writes_a_complete_directory() {
    let text = config("[]");
    let dir = tempfile::tempdir().unwrap();
    let o = run_pipeline(&parse_config_str(&text).unwrap(), &text, dir.path()).unwrap();
    assert_eq!(o.report.termination, Termination::EmptyLayer);
    assert_eq!(o.exit_code(), 0);
    assert!(o.metrics.layer_count_match);
    assert_eq!(o.metrics.field_rel_l2, 0.0);
    assert_eq!(
        files(dir.path()),
        [
            "config.json",
            "data.csv",
            "fields/gamma_0.csv",
            "fields/truth.csv",
            "metrics.json",
            "psd_log.csv",
            "report.json",
            "timings.json"
        ]
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("config.json")).unwrap(),
        text
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["termination"], "empty-layer");
    assert_eq!(report["eps"]["mode"], "auto");
    assert!(report["eps"]["eps_disc"].as_f64().unwrap() > 0.0);
    assert!(report["eps"]["delta_noise"].as_f64().unwrap() > 0.0);
    let data = fs::read_to_string(dir.path().join("data.csv")).unwrap();
    assert_eq!(data.lines().count(), 12);
}

#[test]
fn reruns_are_byte_identical() {
    let text = config(ONE);
    let cfg = parse_config_str(&text).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(&cfg, &text, a.path()).unwrap();
    run_pipeline(&cfg, &text, b.path()).unwrap();
    let names = files(a.path());
    assert_eq!(names, files(b.path()));
    assert!(names.len() > 8);
    for name in names.iter().filter(|n| n.as_str() != "timings.json") {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn stage_errors_land_in_the_report() {
    let bad = r#"[[{"shapes": [{"type": "disk", "center": [5.0, 5.0], "radius": 0.1}], "constant": 0.5}]]"#;
    let text = config(bad);
    let dir = tempfile::tempdir().unwrap();
    let err = run_pipeline(&parse_config_str(&text).unwrap(), &text, dir.path()).unwrap_err();
    assert!(err.is_config());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["error"]["stage"], "phantom");
    assert!(report["error"]["message"]
        .as_str()
        .unwrap()
        .contains("no pixel"));
}
