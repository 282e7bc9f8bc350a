//! Smallest eigenpair of `−φ_rr − φ_r/r + φ/r² = γ φ`, `φ(0) = 0`,
//! `φ_r(1) = 0`.
//!
//! The weak form `∫ (φ_r v_r + φ v / r²) r dr = γ ∫ φ v r dr` is discretized
//! with piecewise-linear elements and a lumped mass, giving the tridiagonal
//! pencil `A φ = γ M φ` over the free nodes `1..=N`.

use std::sync::Arc;

use crate::error::EigenError;
use crate::grid::RadialGrid;
use crate::linalg::Tridiagonal;
use crate::operators::add_stiffness;
use crate::profile::Profile;
use crate::scalar::Scalar;

/// Generalized problem `A φ = γ M φ` on the free nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil<T> {
    pub stiffness: Tridiagonal<T>,
    /// Diagonal of the lumped mass (the quadrature weights of nodes `1..=N`).
    pub mass: Vec<T>,
}

impl<T: Scalar> Pencil<T> {
    /// `vᵀ A v / vᵀ M v` for free-node values `v`.
    pub fn rayleigh_quotient(&self, v: &[T]) -> T {
        let av = self.stiffness.mul_vec(v);
        let num = dot(v, &av);
        let den = self
            .mass
            .iter()
            .zip(v)
            .fold(T::zero(), |acc, (&m, &x)| acc + m * x * x);
        num / den
    }
}

pub fn assemble_pencil<T: Scalar>(grid: &RadialGrid<T>) -> Pencil<T> {
    let n = grid.cells();
    let (r, w) = (grid.nodes(), grid.weights());
    let mut a = Tridiagonal::zeros(n);
    add_stiffness(grid, &mut a);
    for k in 1..=n {
        a.add(k - 1, k - 1, w[k] / (r[k] * r[k]));
    }
    Pencil {
        stiffness: a,
        mass: w[1..].to_vec(),
    }
}

/// Smallest eigenvalue and its eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub gamma0: T,
    /// Nonnegative, `∫ (φ⁰)² r dr = 1`.
    pub phi0: Profile<T>,
    /// `‖A φ − γ M φ‖` measured in the `M⁻¹` norm.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Scalar> EigenPair<T> {
    /// Bifurcation threshold `μ⁰ = γ₀ / 2`.
    pub fn threshold(&self) -> T {
        self.gamma0 / T::lit(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions<T> {
    pub max_iterations: usize,
    /// Relative change of the Rayleigh quotient that stops the iteration.
    pub tolerance: T,
}

impl<T: Scalar> Default for EigenOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            tolerance: T::epsilon() * T::lit(64.0),
        }
    }
}

/// Smallest eigenpair by inverse iteration with zero shift.
pub fn smallest_eigenpair<T: Scalar>(grid: &Arc<RadialGrid<T>>) -> Result<EigenPair<T>, EigenError> {
    smallest_eigenpair_with(grid, EigenOptions::default())
}

pub fn smallest_eigenpair_with<T: Scalar>(
    grid: &Arc<RadialGrid<T>>,
    opts: EigenOptions<T>,
) -> Result<EigenPair<T>, EigenError> {
    let mut pairs = lowest_eigenpairs_with(grid, 1, opts)?;
    Ok(pairs.remove(0))
}

/// The `count` lowest eigenpairs, by inverse iteration with `M`-orthogonal
/// deflation against the pairs already found. Each eigenfunction is
/// normalized in `L²(r dr)` and signed so that `∫ φ r dr > 0`.
pub fn lowest_eigenpairs<T: Scalar>(
    grid: &Arc<RadialGrid<T>>,
    count: usize,
) -> Result<Vec<EigenPair<T>>, EigenError> {
    lowest_eigenpairs_with(grid, count, EigenOptions::default())
}

pub fn lowest_eigenpairs_with<T: Scalar>(
    grid: &Arc<RadialGrid<T>>,
    count: usize,
    opts: EigenOptions<T>,
) -> Result<Vec<EigenPair<T>>, EigenError> {
    let pencil = assemble_pencil(grid);
    let n = pencil.mass.len();
    if count > n {
        return Err(EigenError::TooManyPairs {
            requested: count,
            available: n,
        });
    }
    let factor = pencil
        .stiffness
        .ldlt()
        .ok_or(EigenError::NotPositiveDefinite)?;
    let m = &pencil.mass;
    let nodes = &grid.nodes()[1..];

    let mut found: Vec<Vec<T>> = Vec::new();
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        // r·cos(jπr/2) has j sign changes, a reasonable start for mode j
        let mut x: Vec<T> = nodes
            .iter()
            .map(|&r| {
                r * (T::from_usize_lossy(j) * T::PI() * r / T::lit(2.0)).cos() + T::lit(1e-3) * r * r
            })
            .collect();
        deflate(&mut x, &found, m);
        m_normalize(&mut x, m);
        let mut gamma = pencil.rayleigh_quotient(&x);
        let mut converged = false;
        let mut iterations = 0;
        let mut last_change = T::infinity();
        while iterations < opts.max_iterations {
            iterations += 1;
            let mx: Vec<T> = x.iter().zip(m).map(|(&a, &b)| a * b).collect();
            let mut y = factor.solve(&mx);
            deflate(&mut y, &found, m);
            m_normalize(&mut y, m);
            let next = pencil.rayleigh_quotient(&y);
            x = y;
            let change = (next - gamma).abs();
            gamma = next;
            // once the contraction stalls at round-off level, further
            // iterations cannot improve the quotient
            let stalled = change >= last_change && change <= T::epsilon().sqrt() * gamma.abs();
            if change <= opts.tolerance * gamma.abs() || stalled {
                converged = true;
                break;
            }
            last_change = change;
        }
        if !converged {
            return Err(EigenError::NotConverged {
                iterations,
                rayleigh: gamma.to_f64().unwrap_or(f64::NAN),
            });
        }

        let sum = x.iter().zip(m).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        if sum < T::zero() {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        let ax = pencil.stiffness.mul_vec(&x);
        let residual = ax
            .iter()
            .zip(&x)
            .zip(m)
            .fold(T::zero(), |acc, ((&a, &v), &w)| {
                let d = a - gamma * w * v;
                acc + d * d / w
            })
            .sqrt();
        let mut values = Vec::with_capacity(n + 1);
        values.push(T::zero());
        values.extend_from_slice(&x);
        if j == 0 {
            // first mode has no sign change; clear round-off negatives
            values.iter_mut().for_each(|v| *v = v.max(T::zero()));
        }
        let phi = Profile::new(grid.clone(), values).expect("finite eigenvector");
        found.push(x);
        out.push(EigenPair {
            gamma0: gamma,
            phi0: phi,
            residual,
            iterations,
        });
    }
    Ok(out)
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn m_dot<T: Scalar>(a: &[T], b: &[T], m: &[T]) -> T {
    a.iter()
        .zip(b)
        .zip(m)
        .fold(T::zero(), |acc, ((&x, &y), &w)| acc + w * x * y)
}

fn m_normalize<T: Scalar>(x: &mut [T], m: &[T]) {
    let norm = m_dot(x, x, m).sqrt();
    x.iter_mut().for_each(|v| *v = *v / norm);
}

fn deflate<T: Scalar>(x: &mut [T], basis: &[Vec<T>], m: &[T]) {
    for b in basis {
        let c = m_dot(x, b, m);
        x.iter_mut().zip(b).for_each(|(v, &e)| *v = *v - c * e);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<RadialGrid<f64>> {
        Arc::new(RadialGrid::new(n, 2.0).unwrap())
    }

    #[test]
    fn pencil_is_symmetric_with_lumped_mass() {
        let g = grid(100);
        let p = assemble_pencil(&*g);
        assert!(p.stiffness.asymmetry() <= 1e-12);
        assert_eq!(p.mass, g.weights()[1..].to_vec());
    }

    #[test]
    fn rayleigh_quotient_of_linear_function() {
        // v = r: ∫ (1 + 1) r dr / ∫ r³ dr = 4
        let g = grid(1024);
        let p = assemble_pencil(&*g);
        let v: Vec<f64> = g.nodes()[1..].to_vec();
        assert!((p.rayleigh_quotient(&v) - 4.0).abs() < 1e-5);
    }

    #[test]
    fn eigenpair_invariants() {
        let g = grid(256);
        let e = smallest_eigenpair(&g).unwrap();
        assert!(e.gamma0 > 1.0);
        assert!(e.phi0.values().iter().all(|&v| v >= 0.0));
        assert_eq!(e.phi0.values()[0], 0.0);
        assert!((e.phi0.l2_norm() - 1.0).abs() < 1e-10);
        assert!(e.residual < 1e-6, "residual {}", e.residual);
    }

    #[test]
    fn second_pair_is_orthogonal() {
        let g = grid(256);
        let pairs = lowest_eigenpairs(&g, 2).unwrap();
        assert!(pairs[1].gamma0 > pairs[0].gamma0);
        let ip = pairs[0].phi0.inner(&pairs[1].phi0).unwrap();
        assert!(ip.abs() <= 1e-8, "inner {ip}");
        // (j'_{1,2})² ≈ 28.42
        assert!((pairs[1].gamma0 - 28.4243).abs() < 0.05, "{}", pairs[1].gamma0);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let g = grid(64);
        let opts = EigenOptions {
            max_iterations: 1,
            tolerance: 0.0,
        };
        assert!(matches!(
            smallest_eigenpair_with(&g, opts),
            Err(EigenError::NotConverged { iterations: 1, .. })
        ));
        assert!(matches!(
            lowest_eigenpairs(&g, 65),
            Err(EigenError::TooManyPairs { .. })
        ));
    }

    #[test]
    fn single_precision_eigenvalue() {
        let g = Arc::new(RadialGrid::<f32>::new(128, 2.0).unwrap());
        let e = smallest_eigenpair(&g).unwrap();
        assert!((e.gamma0 - 3.38996).abs() < 2e-3, "{}", e.gamma0);
    }
}
