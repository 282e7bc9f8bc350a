//! Discrete energy, its gradient and Hessian, the Euler residual, the
//! linear/cubic/remainder split of the Euler operator, and the fold map.
//!
//! The energy is
//!
//! ```text
//! E(h) = π ∫₀¹ [ h_r² + (sin h / r)² − (μ/2) sin²(2h) ] r dr
//! ```
//!
//! discretized with the exact `∫ h_r² r dr` of the piecewise-linear
//! interpolant and nodal (lumped) quadrature for the other two terms. With
//! this choice the nodal gradient in the `r dr` inner product *is* the
//! strong-form Euler operator
//!
//! ```text
//! F(h) = −h_rr − h_r/r + sin(2h)/(2r²) − μ sin(2h) cos(2h)
//! ```
//!
//! in flux form, and the Hessian at `h = 0` is `2π (A − 2μ M)` where `A, M`
//! is the pencil assembled by [`crate::eigen::assemble_pencil`].

use crate::error::ParamsError;
use crate::linalg::Tridiagonal;
use crate::profile::Profile;
use crate::scalar::{sine_remainder, Scalar};

/// Coupling and solver tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    mu: T,
    lambda: Option<T>,
    residual_tol: T,
    max_iterations: usize,
}

impl<T: Scalar> ModelParams<T> {
    pub const DEFAULT_MAX_ITERATIONS: usize = 500;

    pub fn default_residual_tol() -> T {
        T::lit(1e-8)
    }

    /// Parameters from the coupling `μ`; `λ = √(2μ)` when `μ ≥ 0`.
    pub fn from_mu(mu: T) -> Result<Self, ParamsError> {
        if !mu.is_finite() {
            return Err(ParamsError::Mu(mu.to_f64().unwrap_or(f64::NAN)));
        }
        let lambda = (mu >= T::zero()).then(|| (T::lit(2.0) * mu).sqrt());
        Ok(Self {
            mu,
            lambda,
            residual_tol: Self::default_residual_tol(),
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
        })
    }

    /// Parameters from the magneto-elastic constant, `μ = λ²/2`.
    pub fn from_lambda(lambda: T) -> Result<Self, ParamsError> {
        if !lambda.is_finite() {
            return Err(ParamsError::Lambda(lambda.to_f64().unwrap_or(f64::NAN)));
        }
        let mut p = Self::from_mu(lambda * lambda / T::lit(2.0))?;
        p.lambda = Some(lambda);
        Ok(p)
    }

    /// Both constants given; they must satisfy `μ = λ²/2` to within
    /// `1e-12 · max(1, |μ|)`.
    pub fn new(mu: T, lambda: T) -> Result<Self, ParamsError> {
        let mut p = Self::from_mu(mu)?;
        if !lambda.is_finite() {
            return Err(ParamsError::Lambda(lambda.to_f64().unwrap_or(f64::NAN)));
        }
        let tie = lambda * lambda / T::lit(2.0);
        if (mu - tie).abs() > T::lit(1e-12) * T::one().max(mu.abs()) {
            return Err(ParamsError::Inconsistent {
                mu: mu.to_f64().unwrap_or(f64::NAN),
                lambda: lambda.to_f64().unwrap_or(f64::NAN),
            });
        }
        p.lambda = Some(lambda);
        Ok(p)
    }

    pub fn with_residual_tol(mut self, tol: T) -> Result<Self, ParamsError> {
        if !(tol > T::zero()) || !tol.is_finite() {
            return Err(ParamsError::Tolerance(tol.to_f64().unwrap_or(f64::NAN)));
        }
        self.residual_tol = tol;
        Ok(self)
    }

    pub fn with_max_iterations(mut self, n: usize) -> Result<Self, ParamsError> {
        if n == 0 {
            return Err(ParamsError::MaxIterations);
        }
        self.max_iterations = n;
        Ok(self)
    }

    /// Same tolerances, different coupling.
    pub fn with_mu(&self, mu: T) -> Result<Self, ParamsError> {
        Ok(Self {
            residual_tol: self.residual_tol,
            max_iterations: self.max_iterations,
            ..Self::from_mu(mu)?
        })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn lambda(&self) -> Option<T> {
        self.lambda
    }

    pub fn residual_tol(&self) -> T {
        self.residual_tol
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }
}

/// Discrete reduced energy `E(h)`.
pub fn energy<T: Scalar>(h: &Profile<T>, p: &ModelParams<T>) -> T {
    let g = h.grid();
    let (r, w, v) = (g.nodes(), g.weights(), h.values());
    let half_mu = p.mu() / T::lit(2.0);
    let mut acc = T::zero();
    for k in 0..g.cells() {
        let jump = v[k + 1] - v[k];
        acc = acc + g.cell_stiffness(k) * jump * jump;
    }
    for k in 1..g.len() {
        let s = v[k].sin() / r[k];
        let s2 = (v[k] + v[k]).sin();
        acc = acc + w[k] * (s * s - half_mu * s2 * s2);
    }
    T::PI() * acc
}

/// `E(b) − E(a)` evaluated from factored differences, so that it keeps full
/// relative precision when the two profiles are close.
pub fn energy_difference<T: Scalar>(a: &Profile<T>, b: &Profile<T>, p: &ModelParams<T>) -> T {
    let g = a.grid();
    let (r, w) = (g.nodes(), g.weights());
    let (x, y) = (a.values(), b.values());
    let half_mu = p.mu() / T::lit(2.0);
    let two = T::lit(2.0);
    let mut acc = T::zero();
    for k in 0..g.cells() {
        let ja = x[k + 1] - x[k];
        let jb = y[k + 1] - y[k];
        acc = acc + g.cell_stiffness(k) * (jb - ja) * (jb + ja);
    }
    for k in 1..g.len() {
        let (s, d) = (y[k] + x[k], y[k] - x[k]);
        // sin²b − sin²a = sin(b+a) sin(b−a)
        let exch = s.sin() * d.sin() / (r[k] * r[k]);
        let elas = (two * s).sin() * (two * d).sin();
        acc = acc + w[k] * (exch - half_mu * elas);
    }
    T::PI() * acc
}

/// `(K h)_k`: action of the stiffness of `∫ v_r² r dr` (natural condition at
/// `r = 1`), for all nodes including the origin.
fn stiffness_action<T: Scalar>(h: &Profile<T>) -> Vec<T> {
    let g = h.grid();
    let v = h.values();
    let mut out = vec![T::zero(); g.len()];
    for k in 0..g.cells() {
        let f = g.cell_stiffness(k) * (v[k + 1] - v[k]);
        out[k] = out[k] - f;
        out[k + 1] = out[k + 1] + f;
    }
    out
}

/// Nodal strong-form Euler operator `F(h)`; entry 0 is 0 (Dirichlet row).
///
/// The last entry carries the natural condition weakly: it is the flux
/// balance over the half cell adjacent to `r = 1`.
pub fn euler_operator<T: Scalar>(h: &Profile<T>, p: &ModelParams<T>) -> Vec<T> {
    let g = h.grid();
    let (r, w, v) = (g.nodes(), g.weights(), h.values());
    let kh = stiffness_action(h);
    let two = T::lit(2.0);
    let half_mu = p.mu() / two;
    let mut out = vec![T::zero(); g.len()];
    for k in 1..g.len() {
        out[k] = kh[k] / w[k] + (two * v[k]).sin() / (two * r[k] * r[k])
            - half_mu * (T::lit(4.0) * v[k]).sin();
    }
    out
}

/// Gradient `g` of the energy in the `r dr` inner product:
/// `dE(h + t v)/dt |₀ = 2π ⟨g, v⟩` for every `v` with `v(0) = 0`.
pub fn gradient<T: Scalar>(h: &Profile<T>, p: &ModelParams<T>) -> Profile<T> {
    Profile::new(h.grid().clone(), euler_operator(h, p))
        .expect("euler operator of a finite profile is finite")
}

/// Approximation of `r h_r` at `r = 1` from the flux balance of the last
/// half cell; zero at a discrete critical point.
pub fn boundary_flux<T: Scalar>(h: &Profile<T>, p: &ModelParams<T>) -> T {
    let f = euler_operator(h, p);
    let n = h.grid().cells();
    h.grid().weights()[n] * f[n]
}

/// Convergence certificate: `L²(r dr)` norm of `F(h)` over the interior nodes
/// plus the natural boundary defect `|h_r(1)|` (see [`boundary_flux`]).
pub fn euler_residual<T: Scalar>(h: &Profile<T>, p: &ModelParams<T>) -> T {
    let f = euler_operator(h, p);
    residual_from_operator(h, &f)
}

pub(crate) fn residual_from_operator<T: Scalar>(h: &Profile<T>, f: &[T]) -> T {
    let g = h.grid();
    let w = g.weights();
    let n = g.cells();
    let interior = (1..n).fold(T::zero(), |acc, k| acc + w[k] * f[k] * f[k]);
    interior.sqrt() + (w[n] * f[n]).abs()
}

/// Hessian of `E / 2π` with respect to the free nodes `1..=N`.
pub fn hessian<T: Scalar>(h: &Profile<T>, p: &ModelParams<T>) -> Tridiagonal<T> {
    let g = h.grid();
    let (r, w, v) = (g.nodes(), g.weights(), h.values());
    let n = g.cells();
    let mut a = Tridiagonal::zeros(n);
    add_stiffness(g, &mut a);
    let two = T::lit(2.0);
    for k in 1..=n {
        let c = (two * v[k]).cos() / (r[k] * r[k]) - two * p.mu() * (T::lit(4.0) * v[k]).cos();
        a.add(k - 1, k - 1, w[k] * c);
    }
    a
}

/// Adds the `∫ v_r w_r r dr` stiffness over the free nodes `1..=N`.
pub(crate) fn add_stiffness<T: Scalar>(g: &crate::grid::RadialGrid<T>, a: &mut Tridiagonal<T>) {
    for k in 0..g.cells() {
        let s = g.cell_stiffness(k);
        // cell k couples nodes k and k+1; node 0 is eliminated
        if k == 0 {
            a.add(0, 0, s);
        } else {
            a.add(k - 1, k - 1, s);
            a.add(k, k, s);
            a.add(k - 1, k, -s);
            a.add(k, k - 1, -s);
        }
    }
}

/// Folds a value into `[0, π/2]`: absolute value, then reflections
/// `x ↦ π − x` until the value lands in range.
pub fn fold_value<T: Scalar>(x: T) -> T {
    let pi = T::PI();
    let y = x.abs() % pi;
    if y > pi / T::lit(2.0) {
        pi - y
    } else {
        y
    }
}

/// Nodewise fold of a profile into `[0, π/2]`.
pub fn fold<T: Scalar>(h: &Profile<T>) -> Profile<T> {
    h.map(fold_value)
}

/// Moves each crossing of a fold level `kπ/2` onto the nearer node of the
/// cell it falls in, so that no cell straddles a level. On such profiles the
/// discrete energy is exactly fold invariant; elsewhere the fold changes the
/// gradient term by O(Δr) in the cells that contain a crossing.
pub fn align_to_fold_levels<T: Scalar>(h: &Profile<T>) -> Profile<T> {
    let half_pi = T::FRAC_PI_2();
    let mut v = h.values().to_vec();
    for k in 0..v.len() - 1 {
        let (a, b) = (v[k] / half_pi, v[k + 1] / half_pi);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let level = lo.floor() + T::one();
        if level < hi {
            let snapped = level * half_pi;
            if (level - a).abs() <= (level - b).abs() && k > 0 {
                v[k] = snapped;
            } else {
                v[k + 1] = snapped;
            }
        }
    }
    Profile::new(h.grid().clone(), v).expect("snapping keeps values finite")
}

/// Whether every cell lies within one interval `[kπ/2, (k+1)π/2]`.
pub fn is_fold_aligned<T: Scalar>(h: &Profile<T>) -> bool {
    let half_pi = T::FRAC_PI_2();
    h.values().windows(2).all(|c| {
        let (a, b) = (c[0] / half_pi, c[1] / half_pi);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        lo.floor() + T::one() >= hi
    })
}

/// The three parts of `2μ h = L(h) + C(h) + D(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearSplit<T> {
    /// `L(h) = −h_rr − h_r/r + h/r²`.
    pub linear: Vec<T>,
    /// `C(h) = −(2/3) h³/r² + (16/3) μ h³`.
    pub cubic: Vec<T>,
    /// Everything of order five and higher.
    pub remainder: Vec<T>,
}

/// Discrete `L(h)`, the operator of the linear eigenproblem.
pub fn linear_operator<T: Scalar>(h: &Profile<T>) -> Vec<T> {
    let g = h.grid();
    let (r, w, v) = (g.nodes(), g.weights(), h.values());
    let kh = stiffness_action(h);
    let mut out = vec![T::zero(); g.len()];
    for k in 1..g.len() {
        out[k] = kh[k] / w[k] + v[k] / (r[k] * r[k]);
    }
    out
}

/// Cubic part `C(h)` at each node.
pub fn cubic_term<T: Scalar>(h: &Profile<T>, mu: T) -> Vec<T> {
    let r = h.grid().nodes();
    let mut out = vec![T::zero(); h.len()];
    for (k, &v) in h.values().iter().enumerate().skip(1) {
        let v3 = v * v * v;
        out[k] = -T::lit(2.0 / 3.0) * v3 / (r[k] * r[k]) + T::lit(16.0 / 3.0) * mu * v3;
    }
    out
}

/// Splits the Euler operator into linear, cubic and higher-order parts such
/// that `L + C + D − 2μh = F(h)` at every node.
pub fn nonlinear_split<T: Scalar>(h: &Profile<T>, p: &ModelParams<T>) -> NonlinearSplit<T> {
    let r = h.grid().nodes();
    let two = T::lit(2.0);
    let mut remainder = vec![T::zero(); h.len()];
    for (k, &v) in h.values().iter().enumerate().skip(1) {
        remainder[k] = -sine_remainder(two * v) / (two * r[k] * r[k])
            + p.mu() / two * sine_remainder(T::lit(4.0) * v);
    }
    NonlinearSplit {
        linear: linear_operator(h),
        cubic: cubic_term(h, p.mu()),
        remainder,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use std::f64::consts::{FRAC_PI_2, PI};
    use std::sync::Arc;

    fn grid(n: usize) -> Arc<RadialGrid<f64>> {
        Arc::new(RadialGrid::new(n, 2.0).unwrap())
    }

    fn params(mu: f64) -> ModelParams<f64> {
        ModelParams::from_mu(mu).unwrap()
    }

    #[test]
    fn params_tie() {
        let p = ModelParams::<f64>::from_lambda(2.0).unwrap();
        assert_eq!(p.mu(), 2.0);
        assert!(ModelParams::new(2.0, 2.0).is_ok());
        assert!(matches!(
            ModelParams::new(2.0, 1.9),
            Err(ParamsError::Inconsistent { .. })
        ));
        assert!(ModelParams::from_mu(f64::INFINITY).is_err());
        assert!(params(1.0).with_residual_tol(0.0).is_err());
        assert!(params(1.0).with_max_iterations(0).is_err());
        assert_eq!(params(-1.0).lambda(), None);
        assert!((params(0.5).lambda().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_profile_is_critical() {
        let h = Profile::zeros(grid(64));
        let p = params(3.0);
        assert_eq!(energy(&h, &p), 0.0);
        assert!(gradient(&h, &p).values().iter().all(|&v| v == 0.0));
        assert_eq!(euler_residual(&h, &p), 0.0);
    }

    #[test]
    fn fold_examples() {
        assert!((fold_value(2.0f64) - (PI - 2.0)).abs() < 1e-15);
        assert_eq!(fold_value(1.0f64), 1.0);
        assert_eq!(fold_value(-0.5f64), 0.5);
        assert!((fold_value(4.0f64) - (4.0 - PI)).abs() < 1e-15);
        assert!((fold_value(5.0f64) - (2.0 * PI - 5.0)).abs() < 1e-14);
        let h = Profile::from_fn(grid(16), |r| r * FRAC_PI_2).unwrap();
        assert_eq!(fold(&h), h);
    }

    #[test]
    fn odd_symmetry_is_exact() {
        let h = Profile::from_fn(grid(128), |r| 2.5 * (3.0 * r).sin()).unwrap();
        let p = params(1.7);
        assert_eq!(energy(&h, &p), energy(&h.negated(), &p));
        let g = gradient(&h, &p);
        let gn = gradient(&h.negated(), &p);
        for (a, b) in g.values().iter().zip(gn.values()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn energy_difference_matches_direct() {
        let g = grid(100);
        let a = Profile::from_fn(g.clone(), |r| (2.0 * r).sin()).unwrap();
        let b = Profile::from_fn(g, |r| (2.0 * r).sin() + 0.3 * r * r).unwrap();
        let p = params(2.2);
        let direct = energy(&b, &p) - energy(&a, &p);
        assert!((energy_difference(&a, &b, &p) - direct).abs() < 1e-12);
    }

    #[test]
    fn gradient_is_directional_derivative() {
        let g = grid(200);
        let h = Profile::from_fn(g.clone(), |r| 1.2 * r * (1.0 - 0.4 * r)).unwrap();
        let v = Profile::from_fn(g, |r| (4.0 * r).sin()).unwrap();
        let p = params(2.0);
        let t = 1e-5;
        let fd = (energy(&h.axpy(t, &v).unwrap(), &p) - energy(&h.axpy(-t, &v).unwrap(), &p))
            / (2.0 * t);
        let an = 2.0 * PI * gradient(&h, &p).inner(&v).unwrap();
        assert!(((fd - an) / an).abs() < 1e-7, "fd={fd} an={an}");
    }

    #[test]
    fn hessian_matches_gradient_difference() {
        let g = grid(60);
        let h = Profile::from_fn(g.clone(), |r| 0.8 * r).unwrap();
        let v = Profile::from_fn(g.clone(), |r| r * r).unwrap();
        let p = params(2.5);
        let hess = hessian(&h, &p);
        let hv = hess.mul_vec(&v.values()[1..]);
        let t = 1e-6;
        let gp = euler_operator(&h.axpy(t, &v).unwrap(), &p);
        let gm = euler_operator(&h.axpy(-t, &v).unwrap(), &p);
        let w = g.weights();
        for k in 1..g.len() {
            let fd = w[k] * (gp[k] - gm[k]) / (2.0 * t);
            assert!((fd - hv[k - 1]).abs() < 1e-6 * (1.0 + fd.abs()), "k={k}");
        }
        assert_eq!(hess.asymmetry(), 0.0);
    }

    #[test]
    fn split_reassembles_euler_operator() {
        let h = Profile::from_fn(grid(128), |r| 1.3 * (2.0 * r).sin()).unwrap();
        let p = params(1.9);
        let s = nonlinear_split(&h, &p);
        let f = euler_operator(&h, &p);
        for k in 1..h.len() {
            let lhs = s.linear[k] + s.cubic[k] + s.remainder[k] - 2.0 * p.mu() * h.values()[k];
            let scale = s.linear[k].abs() + s.cubic[k].abs() + s.remainder[k].abs() + 1.0;
            assert!((lhs - f[k]).abs() <= 1e-12 * scale, "k={k}");
        }
    }

    #[test]
    fn cubic_homogeneity() {
        let h = Profile::from_fn(grid(64), |r| r.sin()).unwrap();
        let c = cubic_term(&h, 1.5);
        for t in [-2.0, 0.5] {
            let ct = cubic_term(&h.scaled(t), 1.5);
            for (a, b) in ct.iter().zip(&c) {
                assert!((a - t * t * t * b).abs() <= 1e-13 * b.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn lower_bound_holds() {
        let h = Profile::from_fn(grid(64), |r| 3.0 * (7.0 * r).sin()).unwrap();
        for mu in [0.0, 1.0, 4.0] {
            assert!(energy(&h, &params(mu)) >= -PI * mu / 4.0 - 1e-12);
        }
    }
}
