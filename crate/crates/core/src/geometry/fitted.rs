use std::collections::HashMap;
use std::f64::consts::TAU;

use super::mesh::{signed_area, BoundaryEdge, Mesh};
use super::pixels::{pixel_is_inside, pixel_layout};
use crate::error::{Error, Result};

/// Disk triangulation whose edges contain every inside-pixel edge of the grid
/// with spacing `h_px`, so pixel unions are represented exactly.
///
/// Each inside pixel is cut into `s × s` squares (`s = ceil(h_px / target_h)`),
/// each square into two triangles. The band between the resulting staircase
/// and the circle is filled with layers along rays from the origin.
pub fn build_fitted_disk_mesh(radius: f64, target_h: f64, h_px: f64) -> Result<Mesh> {
    let fail = |reason: String| Error::Mesh {
        radius,
        target_h,
        reason,
    };
    if !(radius.is_finite() && radius > 0.0) {
        return Err(fail("radius must be positive".into()));
    }
    if !(target_h.is_finite() && target_h > 0.0 && target_h < radius) {
        return Err(fail("target_h must lie in (0, radius)".into()));
    }
    if !(h_px.is_finite() && h_px > 0.0 && h_px < radius) {
        return Err(fail(format!("pixel size {h_px} must lie in (0, radius)")));
    }
    let (n, origin) = pixel_layout(radius, h_px);
    let s = (h_px / target_h).ceil() as usize;
    let hs = h_px / s as f64;
    let side = n * s + 1;
    if side * side > 50_000_000 {
        return Err(fail("resolution too fine".into()));
    }

    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut lattice: HashMap<usize, usize> = HashMap::new();
    let mut vertex = |i: usize, j: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
        *lattice.entry(j * side + i).or_insert_with(|| {
            vertices.push([origin[0] + i as f64 * hs, origin[1] + j as f64 * hs]);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::new();
    for py in 0..n {
        for px in 0..n {
            if !pixel_is_inside(radius, h_px, origin, px, py) {
                continue;
            }
            for b in 0..s {
                for a in 0..s {
                    let (gi, gj) = (px * s + a, py * s + b);
                    let v00 = vertex(gi, gj, &mut vertices);
                    let v10 = vertex(gi + 1, gj, &mut vertices);
                    let v01 = vertex(gi, gj + 1, &mut vertices);
                    let v11 = vertex(gi + 1, gj + 1, &mut vertices);
                    if (gi + gj) % 2 == 0 {
                        triangles.push([v00, v10, v11]);
                        triangles.push([v00, v11, v01]);
                    } else {
                        triangles.push([v00, v10, v01]);
                        triangles.push([v10, v11, v01]);
                    }
                }
            }
        }
    }
    if triangles.is_empty() {
        return Err(fail("no inside pixels".into()));
    }

    // Staircase boundary: directed edges of counter-clockwise triangles
    // whose reverse is absent.
    let mut directed: HashMap<(usize, usize), ()> = HashMap::new();
    for t in &triangles {
        for k in 0..3 {
            directed.insert((t[k], t[(k + 1) % 3]), ());
        }
    }
    let mut next: HashMap<usize, usize> = HashMap::new();
    for &(a, b) in directed.keys() {
        if !directed.contains_key(&(b, a)) && next.insert(a, b).is_some() {
            return Err(fail("pixel core boundary is not a simple curve".into()));
        }
    }
    let angle = |p: [f64; 2]| p[1].atan2(p[0]).rem_euclid(TAU);
    let start = *next
        .keys()
        .min_by(|&&a, &&b| angle(vertices[a]).total_cmp(&angle(vertices[b])))
        .expect("nonempty boundary");
    let mut ring = vec![start];
    let mut v = next[&start];
    while v != start {
        ring.push(v);
        v = *next
            .get(&v)
            .ok_or_else(|| fail("pixel core boundary is open".into()))?;
        if ring.len() > next.len() {
            return Err(fail("pixel core boundary has several loops".into()));
        }
    }
    if ring.len() != next.len() {
        return Err(fail("pixel core has holes or several components".into()));
    }
    let phis: Vec<f64> = ring.iter().map(|&v| angle(vertices[v])).collect();
    if phis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(fail(
            "pixel core is not star-shaped about the origin".into(),
        ));
    }

    let gap = ring
        .iter()
        .map(|&v| radius - vertices[v][0].hypot(vertices[v][1]))
        .fold(0.0f64, f64::max);
    let layers = ((gap / target_h).ceil() as usize).max(1);
    let k = ring.len();
    let mut grid_ids = vec![ring.clone()];
    for l in 1..=layers {
        let frac = l as f64 / layers as f64;
        let ids = ring
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let p = vertices[v];
                let r = p[0].hypot(p[1]);
                let q = if l == layers {
                    [radius * phis[j].cos(), radius * phis[j].sin()]
                } else {
                    let scale = 1.0 + frac * (radius / r - 1.0);
                    [p[0] * scale, p[1] * scale]
                };
                vertices.push(q);
                vertices.len() - 1
            })
            .collect();
        grid_ids.push(ids);
    }
    let dist =
        |a: usize, b: usize, vs: &Vec<[f64; 2]>| (vs[a][0] - vs[b][0]).hypot(vs[a][1] - vs[b][1]);
    for l in 0..layers {
        for j in 0..k {
            let j1 = (j + 1) % k;
            let (a, b) = (grid_ids[l][j], grid_ids[l][j1]);
            let (c, d) = (grid_ids[l + 1][j1], grid_ids[l + 1][j]);
            if dist(a, c, &vertices) <= dist(b, d, &vertices) {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    for t in triangles.iter_mut() {
        let area = signed_area(&vertices, t);
        if area < 0.0 {
            t.swap(1, 2);
        }
        if area.abs() < 1e-14 * hs * hs {
            return Err(fail("degenerate triangle in boundary band".into()));
        }
    }

    let outer = &grid_ids[layers];
    let boundary_edges = (0..k)
        .map(|j| {
            let j1 = (j + 1) % k;
            BoundaryEdge {
                a: outer[j],
                b: outer[j1],
                theta_a: phis[j],
                theta_b: if j1 == 0 { phis[0] + TAU } else { phis[j1] },
            }
        })
        .collect::<Vec<_>>();
    let gamma_flags = vec![true; k];
    Ok(Mesh {
        radius,
        vertices,
        triangles,
        boundary_edges,
        gamma_flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pixelize;

    #[test]
    fn fitted_mesh_represents_pixels_exactly() {
        let mesh = build_fitted_disk_mesh(1.0, 0.05, 0.1).unwrap();
        for t in 0..mesh.n_triangles() {
            assert!(mesh.area(t) > 0.0);
        }
        for e in &mesh.boundary_edges {
            let p = mesh.vertices[e.a];
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-10);
            assert!(e.theta_b > e.theta_a);
        }
        let grid = pixelize(&mesh, 0.1).unwrap();
        let mut area = vec![0.0; grid.len()];
        for t in 0..mesh.n_triangles() {
            if let Some(p) = grid.triangle_pixel(t) {
                area[p] += mesh.area(t);
            }
        }
        for p in 0..grid.len() {
            if grid.is_inside(p) {
                assert!((area[p] - 0.01).abs() < 1e-12, "pixel {p} area {}", area[p]);
            } else {
                assert_eq!(area[p], 0.0);
            }
        }
        let total: f64 = (0..mesh.n_triangles()).map(|t| mesh.area(t)).sum();
        assert!(total < std::f64::consts::PI && total > 0.98 * std::f64::consts::PI);
    }

    #[test]
    fn fitted_mesh_is_conforming() {
        let mesh = build_fitted_disk_mesh(1.0, 0.025, 0.05).unwrap();
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &mesh.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let boundary: std::collections::HashSet<(usize, usize)> = mesh
            .boundary_edges
            .iter()
            .map(|e| (e.a.min(e.b), e.a.max(e.b)))
            .collect();
        for (e, c) in count {
            assert_eq!(c, if boundary.contains(&e) { 1 } else { 2 }, "{e:?}");
        }
    }

    #[test]
    fn refined_fitted_mesh_contains_coarse_boundary_angles() {
        let a = build_fitted_disk_mesh(1.0, 0.05, 0.1).unwrap();
        let b = build_fitted_disk_mesh(1.0, 0.025, 0.1).unwrap();
        let fine: Vec<f64> = b.boundary_edges.iter().map(|e| e.theta_a).collect();
        for e in &a.boundary_edges {
            assert!(fine.iter().any(|&t| (t - e.theta_a).abs() < 1e-12));
        }
        let ratio = b.n_triangles() as f64 / a.n_triangles() as f64;
        assert!((3.0..=5.0).contains(&ratio), "{ratio}");
    }
}
