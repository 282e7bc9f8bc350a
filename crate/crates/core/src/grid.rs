//! Graded radial mesh on `[0, 1]` with quadrature for the measure `r dr`.
//!
//! Nodes follow `r_k = (k/N)^g`. The quadrature weight of node `k` is the
//! integral of its hat function against `r dr`, so integrals of functions that
//! are linear on each cell are exact. The single exception is the innermost
//! cell `[0, r_1]`, where the integrand is taken constant at its `r_1` value:
//! this keeps the weight at `r = 0` exactly zero, so limit values of ratios
//! such as `sin h / r` at the origin never enter an integral.

use crate::error::GridError;
use crate::scalar::Scalar;

/// Graded radial mesh with `r dr` quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    grading: T,
}

impl<T: Scalar> RadialGrid<T> {
    /// Smallest accepted number of cells (three nodes are needed for the
    /// second-order derivative stencils).
    pub const MIN_CELLS: usize = 2;

    /// Builds a grid with `cells` cells (`cells + 1` nodes).
    pub fn new(cells: usize, grading: T) -> Result<Self, GridError> {
        if cells < Self::MIN_CELLS {
            return Err(GridError::TooFewCells {
                cells,
                min: Self::MIN_CELLS,
            });
        }
        if !grading.is_finite() || grading < T::one() {
            return Err(GridError::Grading(grading.to_f64().unwrap_or(f64::NAN)));
        }
        let n = T::from_usize_lossy(cells);
        let mut nodes: Vec<T> = (0..=cells)
            .map(|k| (T::from_usize_lossy(k) / n).powf(grading))
            .collect();
        nodes[0] = T::zero();
        nodes[cells] = T::one();
        for k in 1..=cells {
            if nodes[k] <= nodes[k - 1] {
                return Err(GridError::Degenerate { index: k });
            }
        }

        let six = T::lit(6.0);
        let two = T::lit(2.0);
        let mut weights = vec![T::zero(); cells + 1];
        // innermost cell: integrand frozen at r_1
        weights[1] = weights[1] + nodes[1] * nodes[1] / two;
        for k in 1..cells {
            let (a, b) = (nodes[k], nodes[k + 1]);
            let len = b - a;
            weights[k] = weights[k] + len * (two * a + b) / six;
            weights[k + 1] = weights[k + 1] + len * (a + two * b) / six;
        }
        Ok(Self {
            nodes,
            weights,
            grading,
        })
    }

    /// Uniform grid (`grading = 1`).
    pub fn uniform(cells: usize) -> Result<Self, GridError> {
        Self::new(cells, T::one())
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn grading(&self) -> T {
        self.grading
    }

    /// Number of cells `N`.
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of nodes `N + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Length of cell `k`, i.e. `r_{k+1} - r_k`.
    pub fn cell_width(&self, k: usize) -> T {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn max_cell_width(&self) -> T {
        (0..self.cells())
            .map(|k| self.cell_width(k))
            .fold(T::zero(), T::max)
    }

    /// `∫_{cell k} r dr / width²`: the coefficient multiplying the squared
    /// jump of a piecewise-linear function in `∫ v_r² r dr`.
    pub fn cell_stiffness(&self, k: usize) -> T {
        let (a, b) = (self.nodes[k], self.nodes[k + 1]);
        (a + b) / (T::lit(2.0) * (b - a))
    }

    /// Weighted sum `Σ w_k f_k`, approximating `∫₀¹ f(r) r dr`.
    pub fn integrate(&self, f: &[T]) -> Result<T, GridError> {
        self.check_len(f.len())?;
        Ok(self.integrate_unchecked(f))
    }

    pub(crate) fn integrate_unchecked(&self, f: &[T]) -> T {
        self.weights
            .iter()
            .zip(f)
            .fold(T::zero(), |acc, (&w, &v)| acc + w * v)
    }

    /// `⟨a, b⟩ = Σ w_k a_k b_k`.
    pub fn inner(&self, a: &[T], b: &[T]) -> Result<T, GridError> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        Ok(self.inner_unchecked(a, b))
    }

    pub(crate) fn inner_unchecked(&self, a: &[T], b: &[T]) -> T {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .fold(T::zero(), |acc, (&w, (&x, &y))| acc + w * x * y)
    }

    /// Second-order derivative on the nonuniform mesh: centred three-point
    /// stencils inside, one-sided three-point stencils at both ends.
    pub fn derivative(&self, f: &[T]) -> Result<Vec<T>, GridError> {
        self.check_len(f.len())?;
        Ok(self.derivative_unchecked(f))
    }

    pub(crate) fn derivative_unchecked(&self, f: &[T]) -> Vec<T> {
        let r = &self.nodes;
        let n = r.len();
        let mut out = vec![T::zero(); n];

        let (h1, h2) = (r[1] - r[0], r[2] - r[1]);
        out[0] = -(h1 + h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1]
            - h1 / (h2 * (h1 + h2)) * f[2];

        for k in 1..n - 1 {
            let h1 = r[k] - r[k - 1];
            let h2 = r[k + 1] - r[k];
            out[k] = -h2 / (h1 * (h1 + h2)) * f[k - 1]
                + (h2 - h1) / (h1 * h2) * f[k]
                + h1 / (h2 * (h1 + h2)) * f[k + 1];
        }

        let m = n - 1;
        let (h1, h2) = (r[m - 1] - r[m - 2], r[m] - r[m - 1]);
        out[m] = h2 / (h1 * (h1 + h2)) * f[m - 2] - (h1 + h2) / (h1 * h2) * f[m - 1]
            + (h1 + h2 + h2) / (h2 * (h1 + h2)) * f[m];
        out
    }

    /// Evaluates `f` at every node.
    pub fn sample(&self, f: impl Fn(T) -> T) -> Vec<T> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }

    fn check_len(&self, got: usize) -> Result<(), GridError> {
        if got != self.nodes.len() {
            Err(GridError::LengthMismatch {
                expected: self.nodes.len(),
                got,
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cell_uniform_grid() {
        let g = RadialGrid::<f64>::new(2, 1.0).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.5, 1.0]);
        let s: f64 = g.weights().iter().sum();
        assert!((s - 0.5).abs() < 1e-15);
        assert_eq!(g.weights()[0], 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            RadialGrid::<f64>::new(1, 2.0),
            Err(GridError::TooFewCells { .. })
        ));
        assert!(matches!(
            RadialGrid::<f64>::new(16, 0.5),
            Err(GridError::Grading(_))
        ));
        assert!(RadialGrid::<f64>::new(16, f64::NAN).is_err());
    }

    #[test]
    fn weight_sum_and_endpoints() {
        for &(n, g) in &[(8usize, 1.0f64), (64, 2.0), (513, 1.7), (2048, 3.0)] {
            let grid = RadialGrid::new(n, g).unwrap();
            let s: f64 = grid.weights().iter().sum();
            assert!((s - 0.5).abs() < 1e-12, "n={n} g={g} sum={s}");
            assert_eq!(grid.nodes()[0], 0.0);
            assert_eq!(*grid.nodes().last().unwrap(), 1.0);
            assert!(grid.weights().iter().all(|&w| w >= 0.0));
            assert_eq!(grid.weights()[0], 0.0);
        }
    }

    #[test]
    fn integrates_r_squared() {
        let grid = RadialGrid::<f64>::new(512, 2.0).unwrap();
        let f = grid.sample(|r| r);
        let v = grid.integrate(&f).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn integrate_constants_and_mismatch() {
        let grid = RadialGrid::<f64>::new(37, 2.0).unwrap();
        assert_eq!(grid.integrate(&vec![0.0; 38]).unwrap(), 0.0);
        assert!((grid.integrate(&vec![2.0; 38]).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            grid.integrate(&[1.0, 2.0]),
            Err(GridError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn derivative_exact_for_quadratics() {
        let grid = RadialGrid::<f64>::new(33, 2.0).unwrap();
        let d = grid.derivative(&grid.sample(|r| r * r)).unwrap();
        for (k, &r) in grid.nodes().iter().enumerate() {
            assert!((d[k] - 2.0 * r).abs() < 1e-10);
        }
        let c = grid.derivative(&vec![3.5; 34]).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn derivative_of_sine() {
        let grid = RadialGrid::<f64>::new(512, 2.0).unwrap();
        let d = grid.derivative(&grid.sample(f64::sin)).unwrap();
        let err = grid
            .nodes()
            .iter()
            .zip(&d)
            .map(|(r, v)| (v - r.cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "err={err}");
    }

    #[test]
    fn integration_converges_at_second_order() {
        let exact = 2.0 / std::f64::consts::PI; // ∫ sin(πr) dr
        let err = |n| {
            let g = RadialGrid::<f64>::new(n, 2.0).unwrap();
            let f = g.sample(|r| if r == 0.0 { std::f64::consts::PI } else { (std::f64::consts::PI * r).sin() / r });
            (g.integrate(&f).unwrap() - exact).abs()
        };
        let (e1, e2, e3) = (err(64), err(128), err(256));
        assert!(e1 / e2 > 3.5 && e2 / e3 > 3.5, "{e1} {e2} {e3}");
    }

    #[test]
    fn single_precision_grid() {
        let g = RadialGrid::<f32>::new(64, 2.0).unwrap();
        let s: f32 = g.weights().iter().sum();
        assert!((s - 0.5).abs() < 1e-6);
    }
}
