use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::{Mat, Side};
use nalgebra::DMatrix;

use super::basis::{build_basis, BoundaryBasis};
use super::field::ConductivityField;
use super::nd::NdMatrix;
use crate::error::{Error, Result};
use crate::geometry::{Mesh, PixelGrid, PixelSet};

const RESIDUAL_TOL: f64 = 1e-10;

/// P1 finite elements for the Neumann problem on a fixed mesh and Γ basis.
///
/// The stiffness pattern and its symbolic Cholesky factorization are built
/// once; every conductivity needs only a numeric factorization.
pub struct ForwardModel {
    mesh: Mesh,
    basis: BoundaryBasis,
    areas: Vec<f64>,
    /// Gradients of the three barycentric functions per triangle.
    grads: Vec<[[f64; 2]; 3]>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    /// Position in the value array for each local pair `(a, b)`, or `usize::MAX`.
    scatter: Vec<[usize; 9]>,
    symbolic: SymbolicLlt<usize>,
    /// Load vectors of the basis functions, one column each.
    loads: DMatrix<f64>,
}

/// Potential of a single Neumann datum.
#[derive(Debug, Clone)]
pub struct Potential {
    pub values: Vec<f64>,
    pub gamma_mean: f64,
}

/// Potentials `u_i` of all basis functions for one conductivity, with their
/// per-triangle gradients.
#[derive(Debug, Clone)]
pub struct Potentials {
    /// Nodal values, one column per basis function.
    pub values: DMatrix<f64>,
    /// `2 T × M`: rows `2t` and `2t + 1` hold `∂x u_i` and `∂y u_i` on triangle `t`.
    gradients: DMatrix<f64>,
    areas: Vec<f64>,
}

impl ForwardModel {
    /// Model with a freshly built basis of size `m`.
    pub fn new(mesh: Mesh, m: usize) -> Result<Self> {
        let basis = build_basis(&mesh, m)?;
        Self::with_basis(mesh, basis)
    }

    pub fn with_basis(mesh: Mesh, basis: BoundaryBasis) -> Result<Self> {
        let nv = mesh.n_vertices();
        let mut areas = Vec::with_capacity(mesh.n_triangles());
        let mut grads = Vec::with_capacity(mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            let area = mesh.area(t);
            let p = mesh.triangles[t].map(|i| mesh.vertices[i]);
            let mut g = [[0.0; 2]; 3];
            for k in 0..3 {
                let (b, c) = (p[(k + 1) % 3], p[(k + 2) % 3]);
                g[k] = [(b[1] - c[1]) / (2.0 * area), (c[0] - b[0]) / (2.0 * area)];
            }
            areas.push(area);
            grads.push(g);
        }

        // Lower-triangular pattern of the stiffness matrix with vertex 0
        // pinned: unknown `v - 1` for vertex `v ≥ 1`.
        let n = nv - 1;
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(mesh.n_triangles() * 6);
        for t in &mesh.triangles {
            for &a in t {
                for &b in t {
                    if a > 0 && b > 0 && a >= b {
                        pairs.push((b - 1, a - 1));
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut col_ptr = vec![0usize; n + 1];
        for &(c, _) in &pairs {
            col_ptr[c + 1] += 1;
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let row_idx: Vec<usize> = pairs.iter().map(|&(_, r)| r).collect();
        let scatter = mesh
            .triangles
            .iter()
            .map(|t| {
                let mut s = [usize::MAX; 9];
                for (ka, &a) in t.iter().enumerate() {
                    for (kb, &b) in t.iter().enumerate() {
                        if a > 0 && b > 0 && a >= b {
                            let (c, r) = (b - 1, a - 1);
                            let range = col_ptr[c]..col_ptr[c + 1];
                            let pos = row_idx[range.clone()]
                                .binary_search(&r)
                                .expect("pattern entry");
                            s[3 * ka + kb] = range.start + pos;
                        }
                    }
                }
                s
            })
            .collect();
        let sym = SymbolicSparseColMat::new_checked(n, n, col_ptr.clone(), None, row_idx.clone());
        let symbolic =
            SymbolicLlt::try_new(sym.as_ref(), Side::Lower).map_err(|e| Error::Solver {
                reason: format!("symbolic factorization failed: {e:?}"),
                diagnostic: f64::NAN,
            })?;
        let loads = basis.loads(nv, &DMatrix::identity(basis.len(), basis.len()));

        Ok(Self {
            mesh,
            basis,
            areas,
            grads,
            col_ptr,
            row_idx,
            scatter,
            symbolic,
            loads,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn basis(&self) -> &BoundaryBasis {
        &self.basis
    }

    pub fn basis_size(&self) -> usize {
        self.basis.len()
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    fn check_field(&self, field: &ConductivityField) -> Result<()> {
        if field.len() != self.mesh.n_triangles() {
            return Err(Error::Dimension {
                expected: self.mesh.n_triangles(),
                got: field.len(),
            });
        }
        Ok(())
    }

    fn factorize(&self, field: &ConductivityField) -> Result<Llt<usize, f64>> {
        let mut values = vec![0.0; self.row_idx.len()];
        for (t, g) in self.grads.iter().enumerate() {
            let w = field.value(t) * self.areas[t];
            for ka in 0..3 {
                for kb in 0..3 {
                    let pos = self.scatter[t][3 * ka + kb];
                    if pos != usize::MAX {
                        values[pos] += w * (g[ka][0] * g[kb][0] + g[ka][1] * g[kb][1]);
                    }
                }
            }
        }
        let sym = unsafe {
            faer::sparse::SymbolicSparseColMatRef::new_unchecked(
                self.col_ptr.len() - 1,
                self.col_ptr.len() - 1,
                &self.col_ptr,
                None,
                &self.row_idx,
            )
        };
        let mat = SparseColMatRef::new(sym, &values);
        Llt::try_new_with_symbolic(self.symbolic.clone(), mat, Side::Lower).map_err(|e| {
            Error::Solver {
                reason: format!("stiffness matrix is not positive definite: {e:?}"),
                diagnostic: field.min() / field.max(),
            }
        })
    }

    /// `K u` for the full (unpinned) stiffness matrix.
    fn apply_stiffness(&self, field: &ConductivityField, u: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(u.nrows(), u.ncols());
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let g = &self.grads[t];
            let w = field.value(t) * self.areas[t];
            for ka in 0..3 {
                for kb in 0..3 {
                    let k = w * (g[ka][0] * g[kb][0] + g[ka][1] * g[kb][1]);
                    for c in 0..u.ncols() {
                        out[(tri[ka], c)] += k * u[(tri[kb], c)];
                    }
                }
            }
        }
        out
    }

    /// Solve for the load columns `rhs` (length `n_vertices` each) and
    /// normalize each solution to zero Γ-mean.
    fn solve_loads(&self, field: &ConductivityField, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_field(field)?;
        let llt = self.factorize(field)?;
        let nv = self.mesh.n_vertices();
        let k = rhs.ncols();
        let mut x = Mat::<f64>::from_fn(nv - 1, k, |i, j| rhs[(i + 1, j)]);
        llt.solve_in_place(x.as_mut());
        let mut u = DMatrix::zeros(nv, k);
        for j in 0..k {
            for i in 0..nv - 1 {
                u[(i + 1, j)] = x[(i, j)];
            }
        }
        for j in 0..k {
            let col: Vec<f64> = u.column(j).iter().copied().collect();
            let mean = self.basis.gamma_mean(&col);
            u.column_mut(j).add_scalar_mut(-mean);
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver {
                reason: "non-finite potential".into(),
                diagnostic: f64::NAN,
            });
        }
        let residual = (self.apply_stiffness(field, &u) - rhs).norm();
        let scale = rhs.norm();
        let rel = if scale > 0.0 {
            residual / scale
        } else {
            residual
        };
        if rel > RESIDUAL_TOL {
            return Err(Error::Solver {
                reason: "linear system residual above tolerance".into(),
                diagnostic: rel,
            });
        }
        Ok(u)
    }

    /// Potential for the boundary current `Σ_i f[i] f_i`.
    pub fn solve(&self, field: &ConductivityField, f: &[f64]) -> Result<Potential> {
        if f.len() != self.basis.len() {
            return Err(Error::Dimension {
                expected: self.basis.len(),
                got: f.len(),
            });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let coeffs = DMatrix::from_column_slice(f.len(), 1, f);
        let rhs = &self.loads * coeffs;
        let u = self.solve_loads(field, &rhs)?;
        let values: Vec<f64> = u.column(0).iter().copied().collect();
        let gamma_mean = self.basis.gamma_mean(&values);
        Ok(Potential { values, gamma_mean })
    }

    /// Potentials of all basis functions, sharing one factorization.
    pub fn potentials(&self, field: &ConductivityField) -> Result<Potentials> {
        let values = self.solve_loads(field, &self.loads)?;
        let m = values.ncols();
        let mut gradients = DMatrix::zeros(2 * self.mesh.n_triangles(), m);
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let g = &self.grads[t];
            for i in 0..m {
                let (mut gx, mut gy) = (0.0, 0.0);
                for k in 0..3 {
                    let u = values[(tri[k], i)];
                    gx += g[k][0] * u;
                    gy += g[k][1] * u;
                }
                gradients[(2 * t, i)] = gx;
                gradients[(2 * t + 1, i)] = gy;
            }
        }
        Ok(Potentials {
            values,
            gradients,
            areas: self.areas.clone(),
        })
    }

    /// Galerkin ND matrix `A_ij = ∫ σ ∇u_i·∇u_j`.
    pub fn assemble_nd(&self, field: &ConductivityField) -> Result<NdMatrix> {
        let pot = self.potentials(field)?;
        Ok(pot.weighted_gram(field.values()))
    }

    /// ND matrix together with the potentials it was built from.
    pub fn assemble_nd_with_potentials(
        &self,
        field: &ConductivityField,
    ) -> Result<(NdMatrix, Potentials)> {
        let pot = self.potentials(field)?;
        Ok((pot.weighted_gram(field.values()), pot))
    }

    /// Fréchet derivative `A_ij = −∫_region ∇u_i·∇u_j`, the region given as
    /// pixels (triangles assigned by centroid).
    pub fn assemble_frechet(
        &self,
        field: &ConductivityField,
        grid: &PixelGrid,
        region: &PixelSet,
    ) -> Result<NdMatrix> {
        grid.check_compatible(region)?;
        self.check_grid(grid)?;
        let pot = self.potentials(field)?;
        Ok(pot.frechet(|t| grid.triangle_pixel(t).is_some_and(|p| region.contains(p))))
    }

    pub(crate) fn check_grid(&self, grid: &PixelGrid) -> Result<()> {
        if grid.triangle_pixels().len() != self.mesh.n_triangles() {
            return Err(Error::GridMismatch(
                "grid was built for a different mesh".into(),
            ));
        }
        Ok(())
    }
}

impl Potentials {
    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Σ_t w_t |t| ∇u_i·∇u_j` over all triangles.
    pub fn weighted_gram(&self, weights: &[f64]) -> NdMatrix {
        let m = self.len();
        let mut a = DMatrix::zeros(m, m);
        for (t, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            self.accumulate(t, w, &mut a);
        }
        NdMatrix::new(symmetric_from_upper(a)).expect("square")
    }

    /// `−Σ_{t : mask(t)} |t| ∇u_i·∇u_j`.
    pub fn frechet(&self, mask: impl Fn(usize) -> bool) -> NdMatrix {
        let m = self.len();
        let mut a = DMatrix::zeros(m, m);
        for t in 0..self.areas.len() {
            if mask(t) {
                self.accumulate(t, -1.0, &mut a);
            }
        }
        NdMatrix::new(symmetric_from_upper(a)).expect("square")
    }

    fn accumulate(&self, t: usize, w: f64, a: &mut DMatrix<f64>) {
        let m = self.len();
        let c = w * self.areas[t];
        let gx = self.gradients.row(2 * t);
        let gy = self.gradients.row(2 * t + 1);
        for j in 0..m {
            let (xj, yj) = (c * gx[j], c * gy[j]);
            for i in 0..=j {
                a[(i, j)] += gx[i] * xj + gy[i] * yj;
            }
        }
    }

    /// Per-pixel Fréchet matrices for every pixel of `region`.
    pub fn pixel_frechet(&self, grid: &PixelGrid, region: &PixelSet) -> FrechetCache {
        let m = self.len();
        let mut slots = vec![usize::MAX; grid.len()];
        let mut mats: Vec<DMatrix<f64>> = Vec::new();
        let mut pixels = Vec::new();
        for p in region.iter() {
            slots[p] = mats.len();
            mats.push(DMatrix::zeros(m, m));
            pixels.push(p);
        }
        for t in 0..self.areas.len() {
            if let Some(p) = grid.triangle_pixel(t) {
                if slots[p] != usize::MAX {
                    self.accumulate(t, -1.0, &mut mats[slots[p]]);
                }
            }
        }
        FrechetCache {
            slots,
            mats: mats
                .into_iter()
                .map(|a| NdMatrix::new(symmetric_from_upper(a)).expect("square"))
                .collect(),
            m,
        }
    }
}

fn symmetric_from_upper(mut a: DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    for j in 0..m {
        for i in 0..j {
            a[(j, i)] = a[(i, j)];
        }
    }
    a
}

/// Fréchet matrices `DΛ(σ; χ_p)` per pixel; sums give `DΛ(σ; χ_C)` for any
/// pixel union `C` by additivity.
#[derive(Debug, Clone)]
pub struct FrechetCache {
    slots: Vec<usize>,
    mats: Vec<NdMatrix>,
    m: usize,
}

impl FrechetCache {
    pub fn contains(&self, pixel: usize) -> bool {
        self.slots.get(pixel).is_some_and(|&s| s != usize::MAX)
    }

    pub fn pixel(&self, pixel: usize) -> Option<&NdMatrix> {
        self.slots
            .get(pixel)
            .and_then(|&s| (s != usize::MAX).then(|| &self.mats[s]))
    }

    /// `DΛ(σ; χ_C)`; pixels of `set` outside the cached region are an error.
    pub fn sum(&self, set: &PixelSet) -> Result<NdMatrix> {
        let mut out = NdMatrix::zeros(self.m);
        for p in set.iter() {
            let a = self.pixel(p).ok_or_else(|| {
                Error::GridMismatch(format!("pixel {p} is outside the cached region"))
            })?;
            out += a;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_disk_mesh, mark_gamma, pixelize, GammaArc};

    fn model(h: f64, m: usize) -> ForwardModel {
        ForwardModel::new(build_disk_mesh(1.0, h).unwrap(), m).unwrap()
    }

    #[test]
    fn zero_current_gives_zero_potential() {
        let fm = model(0.2, 4);
        let field = ConductivityField::constant(fm.mesh().n_triangles(), 1.0).unwrap();
        let u = fm.solve(&field, &[0.0; 4]).unwrap();
        assert!(u.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cosine_current_gives_linear_potential() {
        let err = |h: f64| {
            let fm = model(h, 2);
            let field = ConductivityField::constant(fm.mesh().n_triangles(), 1.0).unwrap();
            let c = fm.basis().coefficients_of(|_, th| th.cos(), fm.mesh());
            let u = fm.solve(&field, &c).unwrap();
            let mut worst: f64 = 0.0;
            for (v, p) in fm.mesh().vertices.iter().enumerate() {
                if p[0].hypot(p[1]) < 0.8 {
                    worst = worst.max((u.values[v] - p[0]).abs());
                }
            }
            worst
        };
        let (a, b) = (err(0.1), err(0.05));
        assert!(b < a && b < 5e-3, "{a} {b}");
    }

    #[test]
    fn scaling_identity() {
        let fm = model(0.1, 6);
        let n = fm.mesh().n_triangles();
        let values: Vec<f64> = (0..n).map(|t| 1.0 + (t % 7) as f64 * 0.3).collect();
        let field = ConductivityField::from_values(values).unwrap();
        let f: Vec<f64> = (0..6).map(|i| (i as f64 + 1.0).sin()).collect();
        let u1 = fm.solve(&field, &f).unwrap();
        let u3 = fm.solve(&field.scaled(3.0).unwrap(), &f).unwrap();
        for (a, b) in u1.values.iter().zip(&u3.values) {
            assert!((a / 3.0 - b).abs() < 1e-10 * (1.0 + a.abs()));
        }
        assert!(u1.gamma_mean.abs() < 1e-12);
        let a1 = fm.assemble_nd(&field).unwrap();
        let a3 = fm.assemble_nd(&field.scaled(3.0).unwrap()).unwrap();
        let diff = (&a1.scaled(1.0 / 3.0) - &a3).matrix().abs().max();
        assert!(diff < 1e-10 * a1.matrix().abs().max());
    }

    #[test]
    fn nd_is_spd_and_decays() {
        let fm = model(0.05, 8);
        let field = ConductivityField::constant(fm.mesh().n_triangles(), 1.0).unwrap();
        let a = fm.assemble_nd(&field).unwrap();
        assert!(a.asymmetry() == 0.0);
        let ev = a.eigenvalues().unwrap();
        assert!(ev[0] > 0.0);
        for n in 1..=4 {
            for e in &ev[8 - 2 * n..10 - 2 * n] {
                assert!((e - 1.0 / n as f64).abs() < 0.02 / n as f64, "{ev:?}");
            }
        }
    }

    #[test]
    fn frechet_examples() {
        let mesh = build_disk_mesh(1.0, 0.05).unwrap();
        let grid = pixelize(&mesh, 0.1).unwrap();
        let fm = ForwardModel::new(mesh, 6).unwrap();
        let field = ConductivityField::constant(fm.mesh().n_triangles(), 1.0).unwrap();
        let zero = fm
            .assemble_frechet(&field, &grid, &grid.empty_set())
            .unwrap();
        assert!(zero.matrix().iter().all(|&v| v == 0.0));

        let pot = fm.potentials(&field).unwrap();
        let whole = pot.frechet(|_| true);
        let nd = fm.assemble_nd(&field).unwrap();
        assert!((&whole + &nd).matrix().abs().max() < 1e-10 * nd.norm2().unwrap());

        let a = grid.set_where(|p| p[0] < 0.0 && p[0].hypot(p[1]) < 0.5);
        let b = grid.set_where(|p| p[0] >= 0.0 && p[0].hypot(p[1]) < 0.5);
        let da = fm.assemble_frechet(&field, &grid, &a).unwrap();
        let db = fm.assemble_frechet(&field, &grid, &b).unwrap();
        let dab = fm.assemble_frechet(&field, &grid, &a.union(&b)).unwrap();
        assert!((&(&da + &db) - &dab).matrix().abs().max() < 1e-10 * dab.norm2().unwrap());
        assert!(dab.max_eig().unwrap() <= 1e-14);

        let cache = pot.pixel_frechet(&grid, &a.union(&b));
        let summed = cache.sum(&a).unwrap();
        assert!((&summed - &da).matrix().abs().max() < 1e-12 * da.norm2().unwrap());
        assert!(cache.sum(&grid.inside_set()).is_err());
    }

    #[test]
    fn partial_gamma_solves() {
        let mesh = build_disk_mesh(1.0, 0.1).unwrap();
        let half = mark_gamma(&mesh, &[GammaArc::new(0.0, std::f64::consts::PI).unwrap()]).unwrap();
        let fm = ForwardModel::new(half, 8).unwrap();
        let field = ConductivityField::constant(fm.mesh().n_triangles(), 2.0).unwrap();
        let a = fm.assemble_nd(&field).unwrap();
        assert!(a.min_eig().unwrap() > 0.0);
    }
}
