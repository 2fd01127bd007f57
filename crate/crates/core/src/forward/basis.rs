use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryEdge, Mesh};

/// Exact L²(Γ) inner product of piecewise linear functions on the Γ edges.
#[derive(Debug, Clone)]
pub(crate) struct GammaMass {
    /// `(a, b, length)` per Γ edge, endpoints as local Γ-vertex slots.
    edges: Vec<(usize, usize, f64)>,
    n: usize,
}

impl GammaMass {
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for &(a, b, len) in &self.edges {
            out[a] += len / 3.0 * v[a] + len / 6.0 * v[b];
            out[b] += len / 6.0 * v[a] + len / 3.0 * v[b];
        }
        out
    }

    fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        self.apply(u).dot(v)
    }

    fn length(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }
}

/// Orthonormal, mean-free, piecewise linear current patterns on Γ.
///
/// Built from smooth modes (`cos kθ, sin kθ` on the full circle, cosines of
/// arclength on partial Γ) interpolated at the Γ vertices, then
/// Gram–Schmidt orthonormalized in the exact L²(Γ) inner product.
#[derive(Debug, Clone)]
pub struct BoundaryBasis {
    /// Mesh vertex id of each Γ-vertex slot.
    gamma_vertices: Vec<usize>,
    /// Slot of each mesh vertex (`usize::MAX` off Γ).
    slot: Vec<usize>,
    /// Polar angle of each slot.
    angles: Vec<f64>,
    /// Nodal values, one column per basis function.
    values: DMatrix<f64>,
    mass: GammaMass,
    boundary_edges: Vec<BoundaryEdge>,
}

/// Build `m` orthonormal mean-free functions on the Γ of `mesh`.
pub fn build_basis(mesh: &Mesh, m: usize) -> Result<BoundaryBasis> {
    let edges = mesh.gamma_edge_count();
    if m == 0 {
        return Err(Error::Basis("basis size must be at least 1".into()));
    }
    if edges < m + 1 {
        return Err(Error::BasisTooLarge {
            requested: m,
            edges,
        });
    }

    let mut gamma_vertices = Vec::new();
    let mut slot = vec![usize::MAX; mesh.n_vertices()];
    let mut arclength = Vec::new();
    let mut mass_edges = Vec::new();
    let mut s = 0.0;
    let mut add_vertex = |v: usize, s: f64, gv: &mut Vec<usize>| {
        if slot[v] == usize::MAX {
            slot[v] = gv.len();
            gv.push(v);
            arclength.push(s);
        }
        slot[v]
    };
    for run in mesh.gamma_runs() {
        for &j in &run {
            let e = mesh.boundary_edges[j];
            let (pa, pb) = (mesh.vertices[e.a], mesh.vertices[e.b]);
            let len = (pa[0] - pb[0]).hypot(pa[1] - pb[1]);
            let a = add_vertex(e.a, s, &mut gamma_vertices);
            s += len;
            let b = add_vertex(e.b, s, &mut gamma_vertices);
            mass_edges.push((a, b, len));
        }
    }
    let n = gamma_vertices.len();
    let mass = GammaMass {
        edges: mass_edges,
        n,
    };
    let total = mass.length();
    let angles: Vec<f64> = gamma_vertices
        .iter()
        .map(|&v| {
            mesh.vertices[v][1]
                .atan2(mesh.vertices[v][0])
                .rem_euclid(TAU)
        })
        .collect();

    let full = mesh.gamma_is_full();
    let candidate = |k: usize| -> DVector<f64> {
        DVector::from_fn(n, |i, _| {
            if full {
                let order = (k / 2 + 1) as f64;
                if k.is_multiple_of(2) {
                    (order * angles[i]).cos()
                } else {
                    (order * angles[i]).sin()
                }
            } else {
                ((k + 1) as f64 * PI * arclength[i] / total).cos()
            }
        })
    };

    let ones = DVector::from_element(n, 1.0);
    let mut accepted: Vec<DVector<f64>> = vec![&ones / mass.inner(&ones, &ones).sqrt()];
    let mut k = 0;
    while accepted.len() < m + 1 {
        if k > 4 * m + 8 {
            return Err(Error::Basis(format!(
                "only {} independent functions found on {edges} Γ edges",
                accepted.len() - 1
            )));
        }
        let mut c = candidate(k);
        k += 1;
        let start = mass.inner(&c, &c).sqrt();
        for _ in 0..2 {
            for q in &accepted {
                let proj = mass.inner(q, &c);
                c.axpy(-proj, q, 1.0);
            }
        }
        let norm = mass.inner(&c, &c).sqrt();
        if norm > 1e-8 * start {
            accepted.push(c / norm);
        }
    }
    let values = DMatrix::from_columns(&accepted[1..]);

    Ok(BoundaryBasis {
        gamma_vertices,
        slot,
        angles,
        values,
        mass,
        boundary_edges: mesh.boundary_edges.clone(),
    })
}

impl BoundaryBasis {
    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn gamma_length(&self) -> f64 {
        self.mass.length()
    }

    /// Mesh vertex ids on Γ, in slot order.
    pub fn gamma_vertices(&self) -> &[usize] {
        &self.gamma_vertices
    }

    /// Nodal values on Γ, one column per function, rows in slot order.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Gram matrix `<f_i, f_j>_{L²(Γ)}`.
    pub fn gram(&self) -> DMatrix<f64> {
        let m = self.len();
        DMatrix::from_fn(m, m, |i, j| {
            self.mass.inner(
                &self.values.column(i).into_owned(),
                &self.values.column(j).into_owned(),
            )
        })
    }

    /// `∫_Γ f_i dS` for each basis function.
    pub fn integrals(&self) -> Vec<f64> {
        let ones = DVector::from_element(self.gamma_vertices.len(), 1.0);
        let w = self.mass.apply(&ones);
        (0..self.len())
            .map(|i| w.dot(&self.values.column(i)))
            .collect()
    }

    /// Load vectors `b_v = ∫_Γ g φ_v dS` over all mesh vertices for the
    /// boundary functions `g = Σ_i coeffs[(i, c)] f_i`, one column per `c`.
    pub fn loads(&self, n_vertices: usize, coeffs: &DMatrix<f64>) -> DMatrix<f64> {
        let nodal = &self.values * coeffs;
        let mut out = DMatrix::zeros(n_vertices, coeffs.ncols());
        for c in 0..coeffs.ncols() {
            let w = self.mass.apply(&nodal.column(c).into_owned());
            for (s, &v) in self.gamma_vertices.iter().enumerate() {
                out[(v, c)] = w[s];
            }
        }
        out
    }

    /// Γ-mean of a nodal vector over all mesh vertices.
    pub fn gamma_mean(&self, u: &[f64]) -> f64 {
        let trace = DVector::from_iterator(
            self.gamma_vertices.len(),
            self.gamma_vertices.iter().map(|&v| u[v]),
        );
        let ones = DVector::from_element(self.gamma_vertices.len(), 1.0);
        self.mass.inner(&ones, &trace) / self.mass.length()
    }

    /// `<g, f_i>_{L²(Γ)}` for a function given by its values at the Γ vertices.
    pub fn coefficients_of(&self, g: impl Fn([f64; 2], f64) -> f64, mesh: &Mesh) -> Vec<f64> {
        let trace = DVector::from_iterator(
            self.gamma_vertices.len(),
            self.gamma_vertices
                .iter()
                .zip(&self.angles)
                .map(|(&v, &th)| g(mesh.vertices[v], th)),
        );
        let w = self.mass.apply(&trace);
        (0..self.len())
            .map(|i| w.dot(&self.values.column(i)))
            .collect()
    }

    /// Values of every basis function at polar angle `theta`, interpolating
    /// linearly in angle along the boundary edge that contains it.
    pub fn evaluate_at_angle(&self, theta: f64) -> DVector<f64> {
        let nb = self.boundary_edges.len();
        let mut theta = theta.rem_euclid(TAU);
        let j = match self.boundary_edges.partition_point(|e| e.theta_a <= theta) {
            0 => {
                theta += TAU;
                nb - 1
            }
            j => j - 1,
        };
        let e = self.boundary_edges[j];
        let frac = ((theta - e.theta_a) / (e.theta_b - e.theta_a)).clamp(0.0, 1.0);
        let row = |v: usize| -> DVector<f64> {
            match self.slot[v] {
                usize::MAX => DVector::zeros(self.len()),
                s => self.values.row(s).transpose(),
            }
        };
        row(e.a) * (1.0 - frac) + row(e.b) * frac
    }

    /// Transfer matrix `P[(i, j)] = <f_i, g_j>_{L²(Γ_fine)}` from the basis
    /// `fine` (built on a refined mesh sharing this Γ) to this one, so that an
    /// operator matrix `A` in the fine basis maps to `P A Pᵀ`.
    pub fn transfer_from(&self, fine: &BoundaryBasis) -> DMatrix<f64> {
        let n = fine.gamma_vertices.len();
        let mut here = DMatrix::zeros(n, self.len());
        for (s, &th) in fine.angles.iter().enumerate() {
            here.set_row(s, &self.evaluate_at_angle(th).transpose());
        }
        let mut p = DMatrix::zeros(self.len(), fine.len());
        for j in 0..fine.len() {
            let w = fine.mass.apply(&fine.values.column(j).into_owned());
            for i in 0..self.len() {
                p[(i, j)] = w.dot(&here.column(i));
            }
        }
        p
    }
}
