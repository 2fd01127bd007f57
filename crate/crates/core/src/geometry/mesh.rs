use std::f64::consts::TAU;
use std::io::Write;

use crate::error::{Error, Result};

/// An edge on the outer circle, stored with the angles of its endpoints.
///
/// `theta_b` is unwrapped, so `theta_b > theta_a` even for the edge that
/// closes the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub theta_a: f64,
    pub theta_b: f64,
}

impl BoundaryEdge {
    pub fn mid_angle(&self) -> f64 {
        0.5 * (self.theta_a + self.theta_b)
    }
}

/// A half-open angular interval `[start, end)` on the boundary circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaArc {
    pub start: f64,
    pub end: f64,
}

impl GammaArc {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) {
            return Err(Error::InvalidArc {
                start,
                end,
                reason: "non-finite endpoint".into(),
            });
        }
        if end <= start {
            return Err(Error::InvalidArc {
                start,
                end,
                reason: "end must exceed start".into(),
            });
        }
        Ok(Self { start, end })
    }

    pub fn full_circle() -> Self {
        Self {
            start: 0.0,
            end: TAU,
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        let len = self.end - self.start;
        if len >= TAU {
            return true;
        }
        (theta - self.start).rem_euclid(TAU) < len
    }
}

/// Conforming triangulation of a disk centred at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub radius: f64,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary edges in counter-clockwise order starting at angle zero.
    pub boundary_edges: Vec<BoundaryEdge>,
    /// One flag per boundary edge: true when the edge belongs to Γ.
    pub gamma_flags: Vec<bool>,
}

/// Structured annular triangulation of the disk of the given radius.
///
/// Ring `i` carries `6 i` equally spaced vertices at radius `i R / n`, with
/// `n = ceil(R / target_h)`, so edge lengths stay close to `target_h`
/// everywhere. The whole boundary is flagged as Γ.
pub fn build_disk_mesh(radius: f64, target_h: f64) -> Result<Mesh> {
    let fail = |reason: &str| Error::Mesh {
        radius,
        target_h,
        reason: reason.to_string(),
    };
    if !(radius.is_finite() && radius > 0.0) {
        return Err(fail("radius must be positive"));
    }
    if !(target_h.is_finite() && target_h > 0.0 && target_h < radius) {
        return Err(fail("target_h must lie in (0, radius)"));
    }
    let rings = (radius / target_h).ceil() as usize;
    if rings > 4000 {
        return Err(fail("resolution too fine (more than 4000 rings)"));
    }
    build_disk_mesh_rings(radius, rings).map_err(|_| fail("ring construction failed"))
}

/// Same triangulation with an explicit ring count. Meshes with ring counts
/// `n` and `k n` share every boundary vertex of the coarser one.
pub fn build_disk_mesh_rings(radius: f64, rings: usize) -> Result<Mesh> {
    if !(radius.is_finite() && radius > 0.0) || rings == 0 || rings > 4000 {
        return Err(Error::Mesh {
            radius,
            target_h: radius / rings.max(1) as f64,
            reason: "ring count must lie in 1..=4000".into(),
        });
    }

    let ring_offset = |i: usize| if i == 0 { 0 } else { 1 + 3 * i * (i - 1) };
    let n_vertices = ring_offset(rings + 1);
    let mut vertices = Vec::with_capacity(n_vertices);
    vertices.push([0.0, 0.0]);
    for i in 1..=rings {
        let r = radius * i as f64 / rings as f64;
        let count = 6 * i;
        for j in 0..count {
            let theta = TAU * j as f64 / count as f64;
            vertices.push([r * theta.cos(), r * theta.sin()]);
        }
    }

    let mut triangles = Vec::with_capacity(6 * rings * rings);
    for j in 0..6 {
        triangles.push([0, 1 + j, 1 + (j + 1) % 6]);
    }
    for i in 2..=rings {
        let inner_n = 6 * (i - 1);
        let outer_n = 6 * i;
        let inner = |p: usize| ring_offset(i - 1) + p % inner_n;
        let outer = |q: usize| ring_offset(i) + q % outer_n;
        let (mut p, mut q) = (0usize, 0usize);
        let dist = |a: usize, b: usize| {
            let (u, v) = (vertices[a], vertices[b]);
            (u[0] - v[0]).hypot(u[1] - v[1])
        };
        while p < inner_n || q < outer_n {
            let advance_outer = p == inner_n
                || (q < outer_n && dist(inner(p), outer(q + 1)) <= dist(inner(p + 1), outer(q)));
            if advance_outer {
                triangles.push([inner(p), outer(q), outer(q + 1)]);
                q += 1;
            } else {
                triangles.push([inner(p), outer(q), inner(p + 1)]);
                p += 1;
            }
        }
    }
    for t in triangles.iter_mut() {
        if signed_area(&vertices, t) < 0.0 {
            t.swap(1, 2);
        }
    }

    let nb = 6 * rings;
    let off = ring_offset(rings);
    let boundary_edges = (0..nb)
        .map(|j| BoundaryEdge {
            a: off + j,
            b: off + (j + 1) % nb,
            theta_a: TAU * j as f64 / nb as f64,
            theta_b: TAU * (j + 1) as f64 / nb as f64,
        })
        .collect::<Vec<_>>();
    let gamma_flags = vec![true; nb];

    Ok(Mesh {
        radius,
        vertices,
        triangles,
        boundary_edges,
        gamma_flags,
    })
}

/// Flag the boundary edges whose midpoint angle falls inside one of `arcs`.
pub fn mark_gamma(mesh: &Mesh, arcs: &[GammaArc]) -> Result<Mesh> {
    if arcs.is_empty() {
        return Err(Error::GammaEmpty);
    }
    let flags: Vec<bool> = mesh
        .boundary_edges
        .iter()
        .map(|e| arcs.iter().any(|arc| arc.contains(e.mid_angle())))
        .collect();
    if !flags.iter().any(|&f| f) {
        return Err(Error::GammaEmpty);
    }
    let mut out = mesh.clone();
    out.gamma_flags = flags;
    Ok(out)
}

pub(crate) fn signed_area(vertices: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let [a, b, c] = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Number of Γ edges.
    pub fn gamma_edge_count(&self) -> usize {
        self.gamma_flags.iter().filter(|&&f| f).count()
    }

    /// Number of vertex rings (boundary has `6 n` edges).
    pub fn rings(&self) -> usize {
        self.boundary_edges.len() / 6
    }

    /// Angular extent of each Γ run as arcs, for marking a refined mesh
    /// with exactly the same Γ.
    pub fn gamma_extent(&self) -> Vec<GammaArc> {
        if self.gamma_is_full() {
            return vec![GammaArc::full_circle()];
        }
        self.gamma_runs()
            .iter()
            .map(|run| {
                let first = self.boundary_edges[run[0]];
                let last = self.boundary_edges[*run.last().expect("nonempty run")];
                let mut end = last.theta_b;
                while end <= first.theta_a {
                    end += TAU;
                }
                GammaArc {
                    start: first.theta_a,
                    end,
                }
            })
            .collect()
    }

    pub fn gamma_is_full(&self) -> bool {
        self.gamma_flags.iter().all(|&f| f)
    }

    /// Maximal runs of consecutive Γ edges, cyclically. Each run is a list of
    /// boundary-edge indices in counter-clockwise order.
    pub fn gamma_runs(&self) -> Vec<Vec<usize>> {
        let n = self.boundary_edges.len();
        if self.gamma_is_full() {
            return vec![(0..n).collect()];
        }
        let start = (0..n)
            .find(|&j| self.gamma_flags[j] && !self.gamma_flags[(j + n - 1) % n])
            .unwrap_or(0);
        let mut runs = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        for step in 0..n {
            let j = (start + step) % n;
            if self.gamma_flags[j] {
                current.push(j);
            } else if !current.is_empty() {
                runs.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            runs.push(current);
        }
        runs
    }

    /// Length of the longest edge in the triangulation.
    pub fn max_edge_length(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                let p = self.vertices[t[k]];
                let q = self.vertices[t[(k + 1) % 3]];
                worst = worst.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        worst
    }

    /// Index of a triangle containing `p`, if any. Ties on shared edges go to
    /// the lowest triangle index.
    pub fn locate(&self, p: [f64; 2]) -> Option<usize> {
        (0..self.triangles.len()).find(|&t| self.contains_point(t, p))
    }

    pub(crate) fn contains_point(&self, t: usize, p: [f64; 2]) -> bool {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let tol = -1e-12;
        let d1 = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
        let d2 = (c[0] - b[0]) * (p[1] - b[1]) - (p[0] - b[0]) * (c[1] - b[1]);
        let d3 = (a[0] - c[0]) * (p[1] - c[1]) - (p[0] - c[0]) * (a[1] - c[1]);
        d1 >= tol && d2 >= tol && d3 >= tol
    }

    /// Plain-text listing: one vertex per line (`x y`) to `nodes`, one
    /// triangle per line (`i j k`, zero based) to `elements`.
    pub fn write_listing(&self, mut nodes: impl Write, mut elements: impl Write) -> Result<()> {
        for v in &self.vertices {
            writeln!(
                nodes,
                "{} {}",
                crate::io::fmt_g17(v[0]),
                crate::io::fmt_g17(v[1])
            )?;
        }
        for t in &self.triangles {
            writeln!(elements, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;
    use std::f64::consts::PI;

    fn edge_counts(mesh: &Mesh) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for t in &mesh.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    fn check_invariants(mesh: &Mesh) {
        let counts = edge_counts(mesh);
        let boundary: std::collections::HashSet<(usize, usize)> = mesh
            .boundary_edges
            .iter()
            .map(|e| (e.a.min(e.b), e.a.max(e.b)))
            .collect();
        for (edge, &c) in &counts {
            if boundary.contains(edge) {
                assert_eq!(c, 1, "boundary edge {edge:?}");
            } else {
                assert_eq!(c, 2, "interior edge {edge:?}");
            }
        }
        assert_eq!(boundary.len(), mesh.boundary_edges.len());
        for t in 0..mesh.n_triangles() {
            assert!(mesh.area(t) > 0.0);
        }
        for e in &mesh.boundary_edges {
            let v = mesh.vertices[e.a];
            assert!(((v[0].hypot(v[1])) - mesh.radius).abs() < 1e-10);
        }
        let total: f64 = (0..mesh.n_triangles()).map(|t| mesh.area(t)).sum();
        assert!(total < PI * mesh.radius * mesh.radius);
    }

    #[test]
    fn coarse_mesh_is_valid() {
        let mesh = build_disk_mesh(1.0, 0.5).unwrap();
        check_invariants(&mesh);
        assert!(mesh.n_triangles() >= 8);
        assert!(mesh.max_edge_length() <= 1.5 * 0.5);
    }

    #[test]
    fn refinement_quadruples_triangles() {
        for h in [0.2, 0.1, 0.05] {
            let a = build_disk_mesh(1.0, h).unwrap();
            let b = build_disk_mesh(1.0, h / 2.0).unwrap();
            check_invariants(&b);
            let ratio = b.n_triangles() as f64 / a.n_triangles() as f64;
            assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
            assert!(b.max_edge_length() <= 1.5 * h / 2.0);
        }
    }

    #[test]
    fn fine_boundary_on_circle() {
        let mesh = build_disk_mesh(1.0, 0.02).unwrap();
        for e in &mesh.boundary_edges {
            for v in [e.a, e.b] {
                let p = mesh.vertices[v];
                assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-10);
            }
        }
        assert!(mesh.max_edge_length() <= 1.5 * 0.02);
    }

    #[test]
    fn degenerate_parameters_rejected() {
        assert!(build_disk_mesh(1.0, 0.0).is_err());
        assert!(build_disk_mesh(1.0, 1.0).is_err());
        assert!(build_disk_mesh(-1.0, 0.1).is_err());
        let msg = build_disk_mesh(1.0, 2.0).unwrap_err().to_string();
        assert!(msg.contains("target_h 2"), "{msg}");
    }

    #[test]
    fn gamma_full_and_half() {
        let mesh = build_disk_mesh(1.0, 0.1).unwrap();
        let full = mark_gamma(&mesh, &[GammaArc::full_circle()]).unwrap();
        assert_eq!(full.gamma_edge_count(), full.boundary_edges.len());
        let half = mark_gamma(&mesh, &[GammaArc::new(0.0, PI).unwrap()]).unwrap();
        let n = half.boundary_edges.len();
        assert!((half.gamma_edge_count() as i64 - (n / 2) as i64).abs() <= 1);
        assert_eq!(half.gamma_runs().len(), 1);
    }

    #[test]
    fn gamma_two_arcs_two_runs() {
        let mesh = build_disk_mesh(1.0, 0.1).unwrap();
        let arcs = [
            GammaArc::new(-0.5, 0.5).unwrap(),
            GammaArc::new(2.0, 3.0).unwrap(),
        ];
        let m = mark_gamma(&mesh, &arcs).unwrap();
        let runs = m.gamma_runs();
        assert_eq!(runs.len(), 2);
        let flagged: usize = runs.iter().map(|r| r.len()).sum();
        assert_eq!(flagged, m.gamma_edge_count());
    }

    #[test]
    fn gamma_too_small_is_empty() {
        let mesh = build_disk_mesh(1.0, 0.5).unwrap();
        let err = mark_gamma(&mesh, &[GammaArc::new(0.01, 0.02).unwrap()]).unwrap_err();
        assert_eq!(err.to_string(), "gamma empty at this resolution");
        assert!(GammaArc::new(1.0, 1.0).is_err());
    }

    #[test]
    fn listing_has_one_line_per_item() {
        let mesh = build_disk_mesh(1.0, 0.5).unwrap();
        let (mut nodes, mut elems) = (Vec::new(), Vec::new());
        mesh.write_listing(&mut nodes, &mut elems).unwrap();
        let nodes = String::from_utf8(nodes).unwrap();
        let elems = String::from_utf8(elems).unwrap();
        assert_eq!(nodes.lines().count(), mesh.n_vertices());
        assert_eq!(elems.lines().count(), mesh.n_triangles());
        let first: Vec<usize> = elems
            .lines()
            .next()
            .unwrap()
            .split(' ')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(first, mesh.triangles[0].to_vec());
    }
}
