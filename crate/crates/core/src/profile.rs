//! Grid functions pinned to zero at the origin.

use std::sync::Arc;

use crate::error::ProfileError;
use crate::grid::RadialGrid;
use crate::scalar::Scalar;

/// Nodal values of a radial function `v` with `v(0) = 0`.
///
/// The profile shares its grid through an `Arc`, so copies of a profile (or
/// many profiles on one grid) never duplicate the mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    grid: Arc<RadialGrid<T>>,
    values: Vec<T>,
}

impl<T: Scalar> Profile<T> {
    pub fn new(grid: Arc<RadialGrid<T>>, values: Vec<T>) -> Result<Self, ProfileError> {
        if values.len() != grid.len() {
            return Err(crate::error::GridError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            }
            .into());
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(ProfileError::NonFinite(k));
        }
        if values[0] != T::zero() {
            return Err(ProfileError::OriginNotPinned(
                values[0].to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid<T>>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Self { grid, values }
    }

    /// Samples `f` at the nodes; the value at `r = 0` is forced to zero.
    pub fn from_fn(grid: Arc<RadialGrid<T>>, f: impl Fn(T) -> T) -> Result<Self, ProfileError> {
        let mut values = grid.sample(f);
        values[0] = T::zero();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// Applies `f` nodewise away from the origin.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let mut values: Vec<T> = self.values.iter().map(|&v| f(v)).collect();
        values[0] = T::zero();
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn scaled(&self, t: T) -> Self {
        self.map(|v| t * v)
    }

    pub fn negated(&self) -> Self {
        self.map(|v| -v)
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: T, other: &Self) -> Result<Self, ProfileError> {
        if !self.same_grid(other) {
            return Err(ProfileError::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + t * b)
            .collect();
        Self::new(self.grid.clone(), values)
    }

    /// `⟨self, other⟩` in `L²(r dr)`.
    pub fn inner(&self, other: &Self) -> Result<T, ProfileError> {
        if !self.same_grid(other) {
            return Err(ProfileError::GridMismatch);
        }
        Ok(self.grid.inner_unchecked(&self.values, &other.values))
    }

    /// `L²(r dr)` norm.
    pub fn l2_norm(&self) -> T {
        self.grid.inner_unchecked(&self.values, &self.values).sqrt()
    }

    /// Squared V-norm `∫ (v_r² + v²/r²) r dr` of the piecewise-linear
    /// interpolant, the `v²/r²` part by nodal quadrature.
    pub fn v_norm_squared(&self) -> T {
        let g = &*self.grid;
        let r = g.nodes();
        let w = g.weights();
        let mut acc = T::zero();
        for k in 0..g.cells() {
            let jump = self.values[k + 1] - self.values[k];
            acc = acc + g.cell_stiffness(k) * jump * jump;
        }
        for k in 1..g.len() {
            let q = self.values[k] / r[k];
            acc = acc + w[k] * q * q;
        }
        acc
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Nodal first derivative (second-order stencils of the grid).
    pub fn derivative(&self) -> Vec<T> {
        self.grid.derivative_unchecked(&self.values)
    }

    #[allow(dead_code)]
    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<RadialGrid<f64>> {
        Arc::new(RadialGrid::new(32, 2.0).unwrap())
    }

    #[test]
    fn rejects_unpinned_and_nan() {
        let g = grid();
        let mut v = vec![0.0; 33];
        v[0] = 0.1;
        assert!(matches!(
            Profile::new(g.clone(), v.clone()),
            Err(ProfileError::OriginNotPinned(_))
        ));
        v[0] = 0.0;
        v[5] = f64::NAN;
        assert_eq!(Profile::new(g.clone(), v), Err(ProfileError::NonFinite(5)));
        assert!(Profile::new(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn from_fn_pins_origin() {
        let p = Profile::from_fn(grid(), |r| r.cos()).unwrap();
        assert_eq!(p.values()[0], 0.0);
        assert!((p.values()[32] - 1f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn norms_of_linear_profile() {
        // v = r: ∫ (1 + 1) r dr = 1, ∫ r² r dr = 1/4
        let g = Arc::new(RadialGrid::<f64>::new(256, 2.0).unwrap());
        let p = Profile::from_fn(g, |r| r).unwrap();
        assert!((p.v_norm_squared() - 1.0).abs() < 1e-12);
        assert!((p.l2_norm() - 0.5).abs() < 1e-4);
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = Profile::zeros(grid());
        let b = Profile::zeros(Arc::new(RadialGrid::new(16, 2.0).unwrap()));
        assert_eq!(a.inner(&b), Err(ProfileError::GridMismatch));
        assert!(a.axpy(1.0, &b).is_err());
    }
}
