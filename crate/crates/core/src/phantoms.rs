//! Ground-truth layered phantoms, the concentric-inclusion oracle, and noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{ConductivityField, NdMatrix};
use crate::geometry::{PixelGrid, PixelSet};
use crate::reconstruct::{LayerComponent, LayerDecomposition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Disk { center: [f64; 2], radius: f64 },
    Rect { center: [f64; 2], size: [f64; 2] },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Shape {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Shape::Disk { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) <= *radius,
            Shape::Rect { center, size } => {
                (p[0] - center[0]).abs() <= 0.5 * size[0]
                    && (p[1] - center[1]).abs() <= 0.5 * size[1]
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut inside = false;
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    if (a[1] > p[1]) != (b[1] > p[1]) {
                        let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                        if p[0] < x {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Shape::Disk { center, radius }
                if finite(center) && radius.is_finite() && *radius > 0.0 =>
            {
                Ok(())
            }
            Shape::Rect { center, size }
                if finite(center) && finite(size) && size[0] > 0.0 && size[1] > 0.0 =>
            {
                Ok(())
            }
            Shape::Polygon { vertices }
                if vertices.len() >= 3 && vertices.iter().all(|v| finite(v)) =>
            {
                Ok(())
            }
            other => Err(format!("malformed shape {other:?}")),
        }
    }
}

/// A component: the union of its shapes, carrying the constant `c_{j,n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub shapes: Vec<Shape>,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub c0: f64,
    pub tau: f64,
    pub beta_l: f64,
    pub beta_u: f64,
    #[serde(default)]
    pub layers: Vec<Vec<ComponentSpec>>,
}

impl PhantomSpec {
    fn check(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.beta_l > 0.0 && self.beta_u >= self.beta_l && self.beta_u.is_finite()) {
            problems.push(format!(
                "bounds [{}, {}] are not valid",
                self.beta_l, self.beta_u
            ));
        }
        if !(self.c0 >= self.beta_l && self.c0 <= self.beta_u) {
            problems.push(format!(
                "c0 = {} lies outside [{}, {}]",
                self.c0, self.beta_l, self.beta_u
            ));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            problems.push(format!("tau = {} must be positive", self.tau));
        }
        for (j, layer) in self.layers.iter().enumerate() {
            if layer.is_empty() {
                problems.push(format!("layer {} has no components", j + 1));
            }
            for (n, c) in layer.iter().enumerate() {
                if !(c.constant.is_finite() && c.constant != 0.0) {
                    problems.push(format!(
                        "layer {} component {n}: constant must be nonzero",
                        j + 1
                    ));
                }
                if c.shapes.is_empty() {
                    problems.push(format!("layer {} component {n}: no shapes", j + 1));
                }
                for s in &c.shapes {
                    if let Err(e) = s.check() {
                        problems.push(format!("layer {} component {n}: {e}", j + 1));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Phantom(problems.join("; ")))
        }
    }
}

/// Pixels of `grid` whose centre lies in one of `shapes`.
pub fn rasterize_shapes(shapes: &[Shape], grid: &PixelGrid) -> PixelSet {
    grid.set_where(|p| shapes.iter().any(|s| s.contains(p)))
}

/// Rasterize the phantom and check the layer assumptions on the grid.
pub fn validate_pclc(spec: &PhantomSpec, grid: &PixelGrid) -> Result<LayerDecomposition> {
    spec.check()?;
    let mut decomposition = LayerDecomposition::empty(spec.c0, spec.tau);
    for (j, layer) in spec.layers.iter().enumerate() {
        let level = j + 1;
        let mut components = Vec::with_capacity(layer.len());
        for (n, c) in layer.iter().enumerate() {
            let pixels = rasterize_shapes(&c.shapes, grid);
            if pixels.is_empty() {
                return Err(Error::Assumption {
                    item: "(i)",
                    layer: level,
                    component: n,
                    detail: "no pixel centre falls inside the shapes".into(),
                });
            }
            let parent = if level == 1 {
                0
            } else {
                let prev = &decomposition.layers[j - 1];
                let hits: Vec<usize> = (0..prev.len())
                    .filter(|&q| !prev[q].pixels.is_disjoint(&pixels))
                    .collect();
                match hits[..] {
                    [q] => q,
                    [] => {
                        return Err(Error::Assumption {
                            item: "(iii)",
                            layer: level,
                            component: n,
                            detail: "component lies outside the previous layer".into(),
                        })
                    }
                    _ => {
                        return Err(Error::Assumption {
                            item: "(iii)",
                            layer: level,
                            component: n,
                            detail: format!("component meets several parents {hits:?}"),
                        })
                    }
                }
            };
            components.push(LayerComponent {
                pixels,
                constant: c.constant,
                parent,
            });
        }
        decomposition.layers.push(components);
    }
    decomposition.check(grid)?;
    let values = decomposition.pixel_values(grid);
    for p in grid.inside_set().iter() {
        let v = values[p];
        if v < spec.beta_l || v > spec.beta_u {
            return Err(Error::Phantom(format!(
                "conductivity {v} at pixel {p} lies outside [{}, {}]",
                spec.beta_l, spec.beta_u
            )));
        }
    }
    Ok(decomposition)
}

/// Trianglewise field of `decomp` on the mesh that `grid` was built over.
pub fn rasterize(
    decomp: &LayerDecomposition,
    grid: &PixelGrid,
    beta_l: f64,
    beta_u: f64,
) -> Result<ConductivityField> {
    decomp.field(grid, beta_l, beta_u)
}

/// ND eigenvalue of mode `n` on the unit disk with a concentric disk of radius
/// `r` and conductivity `sigma1` in a background `sigma0`.
pub fn annulus_nd_reference(sigma0: f64, sigma1: f64, r: f64, n: usize) -> Result<f64> {
    if !(sigma0 > 0.0 && sigma1 > 0.0 && sigma0.is_finite() && sigma1.is_finite()) {
        return Err(Error::Config(vec![format!(
            "conductivities {sigma0}, {sigma1} must be positive"
        )]));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Config(vec![format!(
            "radius {r} must lie in (0, 1)"
        )]));
    }
    if n == 0 {
        return Err(Error::Config(vec!["mode must be at least 1".into()]));
    }
    let mu = (sigma1 - sigma0) / (sigma1 + sigma0);
    let q = mu * r.powi(2 * n as i32);
    Ok((1.0 - q) / ((1.0 + q) * n as f64 * sigma0))
}

/// `A + E` with `E` a symmetrized Gaussian matrix scaled to `‖E‖₂ = level ‖A‖₂`.
/// Returns the perturbed matrix and `‖E‖₂`.
pub fn add_noise(a: &NdMatrix, level: f64, seed: u64) -> Result<(NdMatrix, f64)> {
    if !(level.is_finite() && level >= 0.0) {
        return Err(Error::Config(vec![format!(
            "noise level {level} must be non-negative"
        )]));
    }
    if level == 0.0 {
        return Ok((a.clone(), 0.0));
    }
    let m = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = nalgebra::DMatrix::<f64>::from_fn(m, m, |_, _| StandardNormal.sample(&mut rng));
    let e = NdMatrix::new((&g + g.transpose()) * 0.5)?;
    let target = level * a.norm2()?;
    let e = e.scaled(target / e.norm2()?);
    let bound = e.norm2()?;
    Ok((a + &e, bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_containment() {
        let square = Shape::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        };
        assert!(square.contains([0.5, 0.5]));
        assert!(!square.contains([1.5, 0.5]));
        let rect = Shape::Rect {
            center: [0.5, 0.5],
            size: [1.0, 1.0],
        };
        for p in [[0.1, 0.2], [0.9, 0.7], [0.3, 0.95]] {
            assert_eq!(square.contains(p), rect.contains(p));
        }
    }

    #[test]
    fn oracle_limits() {
        assert_eq!(annulus_nd_reference(1.0, 1.0, 0.3, 4).unwrap(), 0.25);
        assert!((annulus_nd_reference(1.0, 2.0, 0.5, 1).unwrap() - 11.0 / 13.0).abs() < 1e-15);
        assert!((annulus_nd_reference(1.0, 1e6, 0.5, 1).unwrap() - 0.6).abs() < 1e-5);
        assert!(annulus_nd_reference(1.0, 1.0, 1.0, 1).is_err());
        assert!(annulus_nd_reference(1.0, 1.0, 0.5, 0).is_err());
    }

    #[test]
    fn noise_contract() {
        let a = NdMatrix::from_diagonal(&[1.0, 0.5, 0.25, 0.125]);
        let (b, bound) = add_noise(&a, 0.0, 7).unwrap();
        assert_eq!(b, a);
        assert_eq!(bound, 0.0);
        let (b1, d1) = add_noise(&a, 1e-3, 7).unwrap();
        let (b2, d2) = add_noise(&a, 1e-3, 7).unwrap();
        assert_eq!(b1, b2);
        assert_eq!(d1.to_bits(), d2.to_bits());
        assert!(b1.asymmetry() <= 1e-15);
        let e = &b1 - &a;
        assert!((e.norm2().unwrap() - d1).abs() <= 1e-12 * d1.max(1e-300) + 1e-15);
        assert!((d1 - 1e-3).abs() < 1e-15);
        let (b3, _) = add_noise(&a, 1e-3, 8).unwrap();
        assert_ne!(b1, b3);
    }
}
