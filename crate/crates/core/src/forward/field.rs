use crate::error::{Error, Result};

/// Piecewise constant conductivity, one value per mesh triangle, with the
/// declared bounds `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductivityField {
    values: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl ConductivityField {
    pub fn new(values: Vec<f64>, lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower > 0.0 && lower <= upper) {
            return Err(Error::InvalidField(format!(
                "bounds [{lower}, {upper}] are not valid"
            )));
        }
        let slack = 1e-12 * upper;
        if let Some((t, v)) = values
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v.is_finite() && v >= lower - slack && v <= upper + slack))
        {
            return Err(Error::InvalidField(format!(
                "triangle {t} has value {v} outside [{lower}, {upper}]"
            )));
        }
        Ok(Self {
            values,
            lower,
            upper,
        })
    }

    /// Field with value `c` on all `n` triangles and bounds `[c, c]`.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n], c, c)
    }

    /// Field with the tightest bounds enclosing its values.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if values.is_empty() {
            return Err(Error::InvalidField("no triangles".into()));
        }
        Self::new(values, lower, upper)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, t: usize) -> f64 {
        self.values[t]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `c · σ`, bounds scaled alike.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.values.iter().map(|v| v * c).collect(),
            self.lower * c,
            self.upper * c,
        )
    }

    /// Add `delta` on the triangles where `mask` is true.
    pub fn perturbed(&self, mask: impl Fn(usize) -> bool, delta: f64) -> Result<Self> {
        let values: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(t, &v)| if mask(t) { v + delta } else { v })
            .collect();
        let lower = values.iter().copied().fold(self.lower, f64::min);
        let upper = values.iter().copied().fold(self.upper, f64::max);
        if lower <= 0.0 {
            return Err(Error::InvalidField(format!(
                "perturbation by {delta} leaves a non-positive value"
            )));
        }
        Self::new(values, lower, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_bounds() {
        assert!(ConductivityField::new(vec![1.0, 2.0], 0.5, 1.5).is_err());
        assert!(ConductivityField::new(vec![1.0, -1.0], -2.0, 2.0).is_err());
        assert!(ConductivityField::new(vec![1.0, f64::NAN], 0.5, 1.5).is_err());
        assert!(ConductivityField::new(vec![1.0, 1.5], 0.5, 1.5).is_ok());
    }

    #[test]
    fn perturbation_and_scaling() {
        let f = ConductivityField::constant(4, 1.0).unwrap();
        let g = f.perturbed(|t| t % 2 == 0, 0.5).unwrap();
        assert_eq!(g.values(), &[1.5, 1.0, 1.5, 1.0]);
        assert_eq!(g.bounds(), (1.0, 1.5));
        assert!(f.perturbed(|_| true, -1.0).is_err());
        assert_eq!(g.scaled(2.0).unwrap().values(), &[3.0, 2.0, 3.0, 2.0]);
    }
}
