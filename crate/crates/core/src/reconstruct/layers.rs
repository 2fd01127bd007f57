use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::ConductivityField;
use crate::geometry::{PixelGrid, PixelSet};

/// Component `D_{j,n}` of a layer with its constant `c_{j,n}`. `parent` indexes
/// the previous layer; first-layer components have parent 0 (the whole domain).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerComponent {
    pub pixels: PixelSet,
    pub constant: f64,
    pub parent: usize,
}

/// `γ = c0 + Σ_j Σ_n c_{j,n} χ_{D_{j,n}}` on a pixel grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerDecomposition {
    pub c0: f64,
    pub tau: f64,
    pub layers: Vec<Vec<LayerComponent>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub runs: Vec<[usize; 2]>,
    pub pixels: usize,
    pub constant: f64,
    pub parent: usize,
}

/// Serialized form shared by truth and reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub c0: f64,
    pub tau: f64,
    pub grid: [usize; 2],
    pub layers: Vec<Vec<ComponentJson>>,
}

impl LayerDecomposition {
    pub fn empty(c0: f64, tau: f64) -> Self {
        Self {
            c0,
            tau,
            layers: Vec::new(),
        }
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// `D_j` for `j` counted from 1.
    pub fn layer_union(&self, j: usize, grid: &PixelGrid) -> PixelSet {
        self.layers
            .get(j.wrapping_sub(1))
            .map(|l| {
                l.iter()
                    .fold(grid.empty_set(), |acc, c| acc.union(&c.pixels))
            })
            .unwrap_or_else(|| grid.empty_set())
    }

    /// Indices of the positive and negative components of layer `j ≥ 1`.
    pub fn index_sets(&self, j: usize) -> (Vec<usize>, Vec<usize>) {
        let layer = self
            .layers
            .get(j.wrapping_sub(1))
            .map_or(&[][..], |l| &l[..]);
        let plus = (0..layer.len())
            .filter(|&n| layer[n].constant > 0.0)
            .collect();
        let minus = (0..layer.len())
            .filter(|&n| layer[n].constant < 0.0)
            .collect();
        (plus, minus)
    }

    /// `γ` per pixel; `c0` off the layers.
    pub fn pixel_values(&self, grid: &PixelGrid) -> Vec<f64> {
        let mut values = vec![self.c0; grid.len()];
        for layer in &self.layers {
            for c in layer {
                for p in c.pixels.iter() {
                    values[p] += c.constant;
                }
            }
        }
        values
    }

    /// Trianglewise field through the triangle-to-pixel map, checked against `[lower, upper]`.
    pub fn field(&self, grid: &PixelGrid, lower: f64, upper: f64) -> Result<ConductivityField> {
        let pv = self.pixel_values(grid);
        let values = grid
            .triangle_pixels()
            .iter()
            .map(|p| p.map_or(self.c0, |p| pv[p]))
            .collect();
        ConductivityField::new(values, lower, upper)
    }

    pub fn to_json(&self, grid: &PixelGrid) -> DecompositionJson {
        DecompositionJson {
            c0: self.c0,
            tau: self.tau,
            grid: [grid.nx, grid.ny],
            layers: self
                .layers
                .iter()
                .map(|l| {
                    l.iter()
                        .map(|c| ComponentJson {
                            runs: c.pixels.to_runs(),
                            pixels: c.pixels.len(),
                            constant: c.constant,
                            parent: c.parent,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(json: &DecompositionJson, grid: &PixelGrid) -> Result<Self> {
        if json.grid != [grid.nx, grid.ny] {
            return Err(Error::GridMismatch(format!(
                "decomposition grid {:?} differs from {}x{}",
                json.grid, grid.nx, grid.ny
            )));
        }
        let layers = json
            .layers
            .iter()
            .map(|l| {
                l.iter()
                    .map(|c| {
                        Ok(LayerComponent {
                            pixels: PixelSet::from_runs(grid.nx, grid.ny, &c.runs)?,
                            constant: c.constant,
                            parent: c.parent,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            c0: json.c0,
            tau: json.tau,
            layers,
        })
    }

    /// Check nesting, connectivity, admissibility and nonzero constants.
    pub fn check(&self, grid: &PixelGrid) -> Result<()> {
        let inside = grid.inside_set();
        let mut parents: Vec<PixelSet> = vec![inside.clone()];
        for (j, layer) in self.layers.iter().enumerate() {
            let level = j + 1;
            if layer.is_empty() {
                return Err(Error::Assumption {
                    item: "(i)",
                    layer: level,
                    component: 0,
                    detail: "layer has no components".into(),
                });
            }
            let fail = |item: &'static str, n: usize, detail: String| Error::Assumption {
                item,
                layer: level,
                component: n,
                detail,
            };
            let mut union = grid.empty_set();
            for (n, c) in layer.iter().enumerate() {
                grid.check_compatible(&c.pixels)?;
                if c.pixels.is_empty() {
                    return Err(fail("(i)", n, "empty component".into()));
                }
                if !(c.constant != 0.0 && c.constant.is_finite()) {
                    return Err(fail(
                        "(i)",
                        n,
                        format!("constant {} is not a nonzero number", c.constant),
                    ));
                }
                if grid.connected_components(&c.pixels).len() != 1 {
                    return Err(fail("(iv)", n, "component is not 4-connected".into()));
                }
                if !c.pixels.is_disjoint(&union) {
                    return Err(fail("(i)", n, "component overlaps another one".into()));
                }
                union = union.union(&c.pixels);
                let parent = parents.get(c.parent).ok_or_else(|| {
                    fail("(iii)", n, format!("parent {} does not exist", c.parent))
                })?;
                let allowed = if level == 1 {
                    inside.clone()
                } else {
                    grid.thin_tau(parent, self.tau)
                };
                if !c.pixels.is_subset(&allowed) {
                    let detail = if level == 1 {
                        "component leaves the domain".to_string()
                    } else {
                        format!(
                            "component is not inside the tau-thinning of parent {}",
                            c.parent
                        )
                    };
                    return Err(fail("(iii)", n, detail));
                }
            }
            for (n, c) in layer.iter().enumerate() {
                if !grid.complement_connected(&c.pixels) {
                    return Err(fail("(ii)", n, "complement is not connected".into()));
                }
            }
            if !grid.complement_connected(&union) {
                return Err(fail("(ii)", 0, "layer complement is not connected".into()));
            }
            if grid.connected_components(&union).len() != layer.len() {
                return Err(fail("(iii)", 0, "components touch each other".into()));
            }
            parents = layer.iter().map(|c| c.pixels.clone()).collect();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_fitted_disk_mesh, pixelize};

    fn grid() -> PixelGrid {
        pixelize(&build_fitted_disk_mesh(1.0, 0.1, 0.1).unwrap(), 0.1).unwrap()
    }

    fn disk(g: &PixelGrid, r: f64) -> PixelSet {
        g.set_where(|p| p[0].hypot(p[1]) <= r)
    }

    fn nested(g: &PixelGrid, inner: PixelSet) -> LayerDecomposition {
        LayerDecomposition {
            c0: 1.0,
            tau: 0.2,
            layers: vec![
                vec![LayerComponent {
                    pixels: disk(g, 0.7),
                    constant: 1.0,
                    parent: 0,
                }],
                vec![LayerComponent {
                    pixels: inner,
                    constant: -0.5,
                    parent: 0,
                }],
            ],
        }
    }

    #[test]
    fn nested_disks_pass_and_sum() {
        let g = grid();
        let d = nested(&g, disk(&g, 0.4));
        d.check(&g).unwrap();
        let v = d.pixel_values(&g);
        let centre = g.pixel_at([0.05, 0.05]).unwrap();
        let ring = g.pixel_at([0.55, 0.05]).unwrap();
        let out = g.pixel_at([0.85, 0.05]).unwrap();
        assert_eq!((v[centre], v[ring], v[out]), (1.5, 2.0, 1.0));
        assert_eq!(d.index_sets(2), (vec![], vec![0]));
        assert_eq!(d.index_sets(1), (vec![0], vec![]));
    }

    #[test]
    fn json_round_trip() {
        let g = grid();
        let d = nested(&g, disk(&g, 0.4));
        let json = d.to_json(&g);
        let text = serde_json::to_string(&json).unwrap();
        let back: DecompositionJson = serde_json::from_str(&text).unwrap();
        assert_eq!(LayerDecomposition::from_json(&back, &g).unwrap(), d);
        assert_eq!(json.layers[1][0].pixels, disk(&g, 0.4).len());
    }

    #[test]
    fn violations_are_named() {
        let g = grid();
        let item = |d: LayerDecomposition| match d.check(&g) {
            Err(Error::Assumption { item, layer, .. }) => (item, layer),
            other => panic!("{other:?}"),
        };
        // touches the parent's boundary layer
        assert_eq!(item(nested(&g, disk(&g, 0.6))), ("(iii)", 2));
        // two pieces in one component
        let split = g
            .set_where(|p| (p[0] - 0.25).abs() <= 0.1 && p[1].abs() <= 0.1)
            .union(&g.set_where(|p| (p[0] + 0.25).abs() <= 0.1 && p[1].abs() <= 0.1));
        assert_eq!(item(nested(&g, split)), ("(iv)", 2));
        // an annulus has a hole
        let annulus = g.set_where(|p| (0.2..=0.45).contains(&p[0].hypot(p[1])));
        assert_eq!(item(nested(&g, annulus)), ("(ii)", 2));
        let mut zero = nested(&g, disk(&g, 0.4));
        zero.layers[1][0].constant = 0.0;
        assert_eq!(item(zero), ("(i)", 2));
        let mut orphan = nested(&g, disk(&g, 0.4));
        orphan.layers[1][0].parent = 1;
        assert_eq!(item(orphan), ("(iii)", 2));
    }

    #[test]
    fn field_matches_pixel_values() {
        let g = grid();
        let d = nested(&g, disk(&g, 0.4));
        let f = d.field(&g, 0.5, 2.5).unwrap();
        let v = d.pixel_values(&g);
        for p in g.inside_set().iter() {
            assert_eq!(f.value(g.pixel_triangle(p).unwrap()), v[p]);
        }
        assert!(d.field(&g, 1.6, 2.5).is_err());
    }
}
