use layered_eit_web::Demo;

fn demo() -> Demo {
    Demo::build(0.2, 10).unwrap()
}

fn disk_mask(d: &Demo, cx: f64, cy: f64, r: f64) -> Vec<u8> {
    let n = d.side();
    let h = 2.0 / n as f64;
    let inside = d.inside();
    (0..n * n)
        .map(|p| {
            let (ix, iy) = (p % n, p / n);
            let x = -1.0 + (ix as f64 + 0.5) * h;
            let y = -1.0 + (iy as f64 + 0.5) * h;
            (inside[p] == 1 && (x - cx).hypot(y - cy) < r) as u8
        })
        .collect()
}

fn count(mask: &[u8]) -> usize {
    mask.iter().filter(|&&b| b != 0).count()
}

#[test]
fn operations_need_data() {
    let d = demo();
    let empty = vec![0; d.side() * d.side()];
    assert!(d.test_margins(&empty).is_err());
    assert!(d.peel_support().is_err());
    assert!(d.run().is_err());
}

#[test]
fn masks_must_match_the_grid() {
    let mut d = demo();
    assert!(d.simulate(&[1, 0, 1], 0.3).is_err());
    let mask = disk_mask(&d, 0.0, 0.0, 0.4);
    assert!(d.simulate(&mask, -1.5).is_err());
    d.simulate(&mask, 0.3).unwrap();
    assert!(d.test_margins(&mask[1..]).is_err());
}

#[test]
fn homogeneous_data_has_nothing_to_peel() {
    let mut d = demo();
    let empty = vec![0; d.side() * d.side()];
    d.simulate(&empty, 0.0).unwrap();
    assert_eq!(count(&d.peel_support().unwrap()), 0);
    let out = d.run().unwrap();
    assert_eq!(out.termination, "empty-layer");
    assert_eq!(out.layers, 0);
    let inside = d.inside();
    for (p, v) in out.values.iter().enumerate() {
        if inside[p] == 1 {
            assert_eq!(*v, 1.0);
        }
    }
}

#[test]
fn support_tests_separate_truth_from_empty() {
    let mut d = demo();
    let truth = disk_mask(&d, 0.1, 0.0, 0.55);
    d.simulate(&truth, 0.4).unwrap();
    let m = d.test_margins(&truth).unwrap();
    assert!(m[0] >= -m[2] && m[1] >= -m[2], "{m:?}");
    let empty = vec![0; truth.len()];
    let m = d.test_margins(&empty).unwrap();
    assert!(m[0] < -m[2], "{m:?}");
}

#[test]
fn peeled_support_overlaps_the_painted_one() {
    let mut d = demo();
    let truth = disk_mask(&d, 0.1, 0.0, 0.55);
    d.simulate(&truth, 0.4).unwrap();
    let peeled = d.peel_support().unwrap();
    let m = d.test_margins(&peeled).unwrap();
    assert!(m[0] >= -m[2] && m[1] >= -m[2]);
    let both = truth
        .iter()
        .zip(&peeled)
        .filter(|(a, b)| **a == 1 && **b == 1)
        .count();
    let either = truth
        .iter()
        .zip(&peeled)
        .filter(|(a, b)| **a == 1 || **b == 1)
        .count();
    assert!(both as f64 / either as f64 >= 0.6, "{both}/{either}");
}
