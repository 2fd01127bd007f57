use std::collections::VecDeque;
use std::io::Write;

use fixedbitset::FixedBitSet;

use super::mesh::Mesh;
use crate::error::{Error, Result};

/// Axis-aligned pixel grid over the bounding box of the disk, tied to a mesh
/// through a triangle→pixel map (by centroid) and a pixel→triangle map (by
/// pixel centre).
#[derive(Debug, Clone)]
pub struct PixelGrid {
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub radius: f64,
    inside: FixedBitSet,
    tri_pixel: Vec<Option<usize>>,
    pixel_tri: Vec<Option<usize>>,
}

/// Set of pixels of a grid, stored as a bitmask over row-major indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PixelSet {
    nx: usize,
    ny: usize,
    bits: FixedBitSet,
}

/// Build the pixel grid of spacing `h_px` over `mesh`.
///
/// Inside pixels are those whose centre lies at distance at least `h_px` from
/// the boundary circle, which keeps every region strictly interior.
pub fn pixelize(mesh: &Mesh, h_px: f64) -> Result<PixelGrid> {
    let radius = mesh.radius;
    if !(h_px.is_finite() && h_px > 0.0 && h_px < radius) {
        return Err(Error::InvalidPixelSize { h_px, radius });
    }
    let (n, origin) = pixel_layout(radius, h_px);
    let mut grid = PixelGrid {
        origin,
        h: h_px,
        nx: n,
        ny: n,
        radius,
        inside: FixedBitSet::with_capacity(n * n),
        tri_pixel: Vec::new(),
        pixel_tri: vec![None; n * n],
    };
    for idx in 0..n * n {
        let (ix, iy) = grid.coords(idx);
        if pixel_is_inside(radius, h_px, origin, ix, iy) {
            grid.inside.insert(idx);
        }
    }

    for t in 0..mesh.n_triangles() {
        let verts = mesh.triangles[t].map(|i| mesh.vertices[i]);
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in verts {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let range = |k: usize| {
            let a = ((lo[k] - origin[k]) / h_px - 0.5).floor().max(0.0) as usize;
            let b = (((hi[k] - origin[k]) / h_px - 0.5).ceil().max(0.0) as usize).min(n - 1);
            a..=b
        };
        for iy in range(1) {
            for ix in range(0) {
                let idx = iy * n + ix;
                if grid.pixel_tri[idx].is_none()
                    && grid.inside.contains(idx)
                    && mesh.contains_point(t, grid.center(idx))
                {
                    grid.pixel_tri[idx] = Some(t);
                }
            }
        }
    }
    if let Some(idx) = grid.inside.ones().find(|&i| grid.pixel_tri[i].is_none()) {
        return Err(Error::GridMismatch(format!(
            "inside pixel {idx} has no containing triangle"
        )));
    }

    grid.tri_pixel = (0..mesh.n_triangles())
        .map(|t| {
            grid.pixel_at(mesh.centroid(t))
                .filter(|&p| grid.inside.contains(p))
        })
        .collect();
    Ok(grid)
}

/// Pixel count per side and lower-left corner of the grid over the disk.
pub(crate) fn pixel_layout(radius: f64, h_px: f64) -> (usize, [f64; 2]) {
    let n = (2.0 * radius / h_px).ceil() as usize;
    (n, [-0.5 * n as f64 * h_px, -0.5 * n as f64 * h_px])
}

pub(crate) fn pixel_is_inside(
    radius: f64,
    h_px: f64,
    origin: [f64; 2],
    ix: usize,
    iy: usize,
) -> bool {
    let cx = origin[0] + (ix as f64 + 0.5) * h_px;
    let cy = origin[1] + (iy as f64 + 0.5) * h_px;
    cx.hypot(cy) <= radius - h_px
}

impl PixelGrid {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (ix, iy) = self.coords(idx);
        [
            self.origin[0] + (ix as f64 + 0.5) * self.h,
            self.origin[1] + (iy as f64 + 0.5) * self.h,
        ]
    }

    /// Grid pixel whose closed-open cell contains `p`.
    pub fn pixel_at(&self, p: [f64; 2]) -> Option<usize> {
        let fx = ((p[0] - self.origin[0]) / self.h).floor();
        let fy = ((p[1] - self.origin[1]) / self.h).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some(self.index(fx as usize, fy as usize))
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside.contains(idx)
    }

    pub fn inside_count(&self) -> usize {
        self.inside.count_ones(..)
    }

    /// Pixel of the triangle's centroid, `None` when it falls in the margin.
    pub fn triangle_pixel(&self, t: usize) -> Option<usize> {
        self.tri_pixel[t]
    }

    pub fn triangle_pixels(&self) -> &[Option<usize>] {
        &self.tri_pixel
    }

    /// Triangle containing the pixel centre (inside pixels only).
    pub fn pixel_triangle(&self, idx: usize) -> Option<usize> {
        self.pixel_tri[idx]
    }

    pub fn empty_set(&self) -> PixelSet {
        PixelSet::empty(self.nx, self.ny)
    }

    pub fn inside_set(&self) -> PixelSet {
        PixelSet {
            nx: self.nx,
            ny: self.ny,
            bits: self.inside.clone(),
        }
    }

    /// Inside pixels whose centre satisfies `pred`.
    pub fn set_where(&self, pred: impl Fn([f64; 2]) -> bool) -> PixelSet {
        let mut s = self.empty_set();
        for idx in self.inside.ones() {
            if pred(self.center(idx)) {
                s.bits.insert(idx);
            }
        }
        s
    }

    /// Build a set from explicit indices; every index must be an inside pixel.
    pub fn set_from_indices(&self, indices: impl IntoIterator<Item = usize>) -> Result<PixelSet> {
        let mut s = self.empty_set();
        for idx in indices {
            if idx >= self.len() || !self.inside.contains(idx) {
                return Err(Error::GridMismatch(format!(
                    "pixel {idx} is not an inside pixel"
                )));
            }
            s.bits.insert(idx);
        }
        Ok(s)
    }

    pub fn check_compatible(&self, set: &PixelSet) -> Result<()> {
        if set.nx != self.nx || set.ny != self.ny {
            return Err(Error::GridMismatch(format!(
                "set is {}x{}, grid is {}x{}",
                set.nx, set.ny, self.nx, self.ny
            )));
        }
        if !set.bits.is_subset(&self.inside) {
            return Err(Error::GridMismatch(
                "set contains pixels outside the inside mask".into(),
            ));
        }
        Ok(())
    }

    /// Same pixel geometry (spacing, extent, origin) as `other`.
    pub fn same_geometry(&self, other: &PixelGrid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.h == other.h
            && self.origin == other.origin
            && self.inside == other.inside
    }

    /// H_τ: pixels of `region` whose centre is at distance ≥ `tau` from every
    /// centre outside `region`. Positions beyond the grid frame count as outside.
    pub fn thin_tau(&self, region: &PixelSet, tau: f64) -> PixelSet {
        if tau <= 0.0 || region.is_empty() {
            return region.clone();
        }
        let w = (tau / self.h).ceil() as i64;
        let mut out = region.clone();
        for idx in region.iter() {
            let (ix, iy) = self.coords(idx);
            'scan: for dy in -w..=w {
                for dx in -w..=w {
                    if !center_distance_below(self.h, dx, dy, tau) {
                        continue;
                    }
                    let (qx, qy) = (ix as i64 + dx, iy as i64 + dy);
                    let outside = qx < 0
                        || qy < 0
                        || qx >= self.nx as i64
                        || qy >= self.ny as i64
                        || !region.contains(self.index(qx as usize, qy as usize));
                    if outside {
                        out.bits.set(idx, false);
                        break 'scan;
                    }
                }
            }
        }
        out
    }

    /// F_τ: `region` minus its τ-thinning.
    pub fn outer_layer_tau(&self, region: &PixelSet, tau: f64) -> PixelSet {
        region.difference(&self.thin_tau(region, tau))
    }

    /// Maximal 4-connected components, ordered by their smallest row-major index.
    pub fn connected_components(&self, region: &PixelSet) -> Vec<PixelSet> {
        let mut seen = FixedBitSet::with_capacity(self.len());
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in region.iter() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = self.empty_set();
            seen.insert(start);
            queue.push_back(start);
            while let Some(p) = queue.pop_front() {
                comp.bits.insert(p);
                for q in self.neighbors4(p).into_iter().flatten() {
                    if region.contains(q) && !seen.contains(q) {
                        seen.insert(q);
                        queue.push_back(q);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Membership in the admissible family of `parent`: a subset of `parent`
    /// whose complement (grid pixels outside it plus a virtual exterior node
    /// touching the grid frame) is 4-connected.
    pub fn is_admissible(&self, candidate: &PixelSet, parent: &PixelSet) -> Result<bool> {
        if candidate.nx != parent.nx || candidate.ny != parent.ny {
            return Err(Error::GridMismatch(format!(
                "candidate is {}x{}, parent is {}x{}",
                candidate.nx, candidate.ny, parent.nx, parent.ny
            )));
        }
        if candidate.nx != self.nx || candidate.ny != self.ny {
            return Err(Error::GridMismatch(
                "candidate does not belong to this grid".into(),
            ));
        }
        if !candidate.is_subset(parent) {
            return Ok(false);
        }
        Ok(self.complement_connected(candidate))
    }

    pub(crate) fn complement_connected(&self, set: &PixelSet) -> bool {
        let complement_count = self.len() - set.len();
        if complement_count == 0 {
            return true;
        }
        let mut seen = FixedBitSet::with_capacity(self.len());
        let mut queue = VecDeque::new();
        for idx in 0..self.len() {
            let (ix, iy) = self.coords(idx);
            let frame = ix == 0 || iy == 0 || ix + 1 == self.nx || iy + 1 == self.ny;
            if frame && !set.contains(idx) {
                seen.insert(idx);
                queue.push_back(idx);
            }
        }
        let mut reached = 0;
        while let Some(p) = queue.pop_front() {
            reached += 1;
            for q in self.neighbors4(p).into_iter().flatten() {
                if !set.contains(q) && !seen.contains(q) {
                    seen.insert(q);
                    queue.push_back(q);
                }
            }
        }
        reached == complement_count
    }

    /// Pixels of `candidate` that touch its complement (or the grid frame);
    /// removing any one keeps the complement connected.
    pub fn peelable_pixels(&self, candidate: &PixelSet) -> Vec<usize> {
        candidate
            .iter()
            .filter(|&p| self.is_peelable(candidate, p))
            .collect()
    }

    pub fn is_peelable(&self, candidate: &PixelSet, idx: usize) -> bool {
        candidate.contains(idx)
            && self
                .neighbors4(idx)
                .iter()
                .any(|q| q.is_none_or(|q| !candidate.contains(q)))
    }

    fn neighbors4(&self, idx: usize) -> [Option<usize>; 4] {
        let (ix, iy) = self.coords(idx);
        [
            (ix > 0).then(|| idx - 1),
            (ix + 1 < self.nx).then(|| idx + 1),
            (iy > 0).then(|| idx - self.nx),
            (iy + 1 < self.ny).then(|| idx + self.nx),
        ]
    }

    /// Binary PGM (P5, 8 bit): 255 for members, 0 otherwise, top row first.
    pub fn write_pgm(&self, set: &PixelSet, mut out: impl Write) -> Result<()> {
        self.check_compatible(set)?;
        write!(out, "P5\n{} {}\n255\n", self.nx, self.ny)?;
        let mut row = vec![0u8; self.nx];
        for iy in (0..self.ny).rev() {
            for (ix, byte) in row.iter_mut().enumerate() {
                *byte = if set.contains(self.index(ix, iy)) {
                    255
                } else {
                    0
                };
            }
            out.write_all(&row)?;
        }
        Ok(())
    }
}

/// Whether the distance between two pixel centres offset by `(dx, dy)` is
/// strictly below `tau`, with a relative tolerance so exact ties count as
/// "not below".
pub(crate) fn center_distance_below(h: f64, dx: i64, dy: i64, tau: f64) -> bool {
    let d = h * ((dx * dx + dy * dy) as f64).sqrt();
    d < tau * (1.0 - 1e-12)
}

impl PixelSet {
    pub fn empty(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            bits: FixedBitSet::with_capacity(nx * ny),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.bits.contains(idx)
    }

    /// Row-major ascending member indices.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn insert(&mut self, idx: usize) {
        self.bits.insert(idx);
    }

    pub fn remove(&mut self, idx: usize) {
        self.bits.set(idx, false);
    }

    pub fn without(&self, idx: usize) -> PixelSet {
        let mut s = self.clone();
        s.remove(idx);
        s
    }

    pub fn union(&self, other: &PixelSet) -> PixelSet {
        let mut s = self.clone();
        s.bits.union_with(&other.bits);
        s
    }

    pub fn intersection(&self, other: &PixelSet) -> PixelSet {
        let mut s = self.clone();
        s.bits.intersect_with(&other.bits);
        s
    }

    pub fn difference(&self, other: &PixelSet) -> PixelSet {
        let mut s = self.clone();
        s.bits.difference_with(&other.bits);
        s
    }

    pub fn is_subset(&self, other: &PixelSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &PixelSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn symmetric_difference_len(&self, other: &PixelSet) -> usize {
        self.bits.symmetric_difference(&other.bits).count()
    }

    /// |A ∩ B| / |A ∪ B|, with the convention J(∅, ∅) = 1.
    pub fn jaccard(&self, other: &PixelSet) -> f64 {
        let inter = self.bits.intersection(&other.bits).count();
        let union = self.bits.union(&other.bits).count();
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Run-length encoding over row-major indices as `[start, length]` pairs.
    pub fn to_runs(&self) -> Vec<[usize; 2]> {
        let mut runs: Vec<[usize; 2]> = Vec::new();
        for idx in self.iter() {
            match runs.last_mut() {
                Some(run) if run[0] + run[1] == idx => run[1] += 1,
                _ => runs.push([idx, 1]),
            }
        }
        runs
    }

    pub fn from_runs(nx: usize, ny: usize, runs: &[[usize; 2]]) -> Result<PixelSet> {
        let mut s = PixelSet::empty(nx, ny);
        for &[start, len] in runs {
            if start + len > nx * ny {
                return Err(Error::GridMismatch(format!(
                    "run [{start}, {len}] exceeds {nx}x{ny} grid"
                )));
            }
            s.bits.insert_range(start..start + len);
        }
        Ok(s)
    }
}
