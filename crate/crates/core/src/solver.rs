//! Minimization of the discrete energy for a fixed coupling.
//!
//! Iterates start with a few descent steps along the gradient taken in the
//! V inner product `∫ (v_r w_r + v w / r²) r dr` (the Riesz representer of
//! `dE` in V, well conditioned despite the `1/r²` coefficient), then switch to
//! damped Newton on the tridiagonal Hessian. Every step goes through a
//! backtracking line search with a sufficient-decrease test, and the accepted
//! point is folded into `[0, π/2]` unless folding is disabled.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::{assemble_pencil, smallest_eigenpair, EigenPair};
use crate::error::Error;
use crate::grid::RadialGrid;
use crate::linalg::Ldlt;
use crate::operators::{
    energy, energy_difference, euler_operator, fold, hessian, residual_from_operator, ModelParams,
};
use crate::profile::Profile;
use crate::scalar::Scalar;

/// Starting point of a minimization.
#[derive(Debug, Clone)]
pub enum Seed<T> {
    Profile(Profile<T>),
    /// `ε φ⁰` with `φ⁰` the first eigenfunction on `grid`.
    ScaledEigenfunction { grid: Arc<RadialGrid<T>>, epsilon: T },
}

impl<T: Scalar> Seed<T> {
    /// `ε φ⁰` from an eigenpair that is already known.
    pub fn along(pair: &EigenPair<T>, epsilon: T) -> Self {
        Seed::Profile(pair.phi0.scaled(epsilon))
    }

    /// Default seed `0.1 φ⁰`.
    pub fn default_on(grid: Arc<RadialGrid<T>>) -> Self {
        Seed::ScaledEigenfunction {
            grid,
            epsilon: T::lit(0.1),
        }
    }

    fn resolve(self) -> Result<Profile<T>, Error> {
        match self {
            Seed::Profile(p) => Ok(p),
            Seed::ScaledEigenfunction { grid, epsilon } => {
                Ok(smallest_eigenpair(&grid)?.phi0.scaled(epsilon))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions<T> {
    /// Fold every accepted iterate into `[0, π/2]`.
    pub fold: bool,
    /// Maximum number of V-gradient steps before switching to Newton.
    pub gradient_steps: usize,
    /// Residual below which Newton takes over early.
    pub newton_switch: T,
    pub armijo: T,
    pub backtrack: T,
    /// Relative energy change that counts as stationary.
    pub energy_rtol: T,
    /// Number of consecutive accepted steps the energy test must hold for.
    pub energy_window: usize,
    /// Return `h ≡ 0` (an exact critical point with `E = 0`) whenever the
    /// iterate found has no lower energy.
    pub select_trivial: bool,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            fold: true,
            gradient_steps: 20,
            newton_switch: T::lit(1e-2),
            armijo: T::lit(1e-4),
            backtrack: T::lit(0.5),
            energy_rtol: T::lit(1e-12),
            energy_window: 3,
            select_trivial: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// Iteration cap reached; the report holds the best iterate.
    MaxIterations,
    /// Line search could not make progress.
    Stalled,
    /// Non-finite energy encountered.
    Diverged,
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub minimizer: Profile<T>,
    pub energy: T,
    pub residual: T,
    /// Discrete `h_r(1)` (see [`crate::operators::boundary_flux`]).
    pub boundary_flux: T,
    pub iterations: usize,
    pub mu: T,
    pub converged: bool,
    pub status: SolveStatus,
    /// Number of accepted steps in which the fold changed the iterate.
    pub fold_applied: usize,
    /// Energy after each accepted step, accumulated from exact differences.
    pub energy_history: Vec<T>,
    pub trivial_selected: bool,
}

/// Minimizes the energy with default options.
pub fn minimize<T: Scalar>(p: &ModelParams<T>, seed: Seed<T>) -> Result<SolveReport<T>, Error> {
    minimize_with(p, seed, &SolveOptions::default())
}

pub fn minimize_with<T: Scalar>(
    p: &ModelParams<T>,
    seed: Seed<T>,
    opts: &SolveOptions<T>,
) -> Result<SolveReport<T>, Error> {
    let init = seed.resolve()?;
    let grid = init.grid().clone();
    let metric = assemble_pencil(&*grid)
        .stiffness
        .ldlt()
        .ok_or(crate::error::EigenError::NotPositiveDefinite)?;
    let weights = &grid.weights()[1..];
    let two_pi = T::lit(2.0) * T::PI();

    let mut h = if opts.fold { fold(&init) } else { init };
    let mut e = energy(&h, p);
    let mut history = vec![e];
    let mut fold_applied = 0;
    let mut newton = false;
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;

    if !e.is_finite() {
        status = SolveStatus::Diverged;
    }

    while status == SolveStatus::MaxIterations && iterations < p.max_iterations() {
        let f = euler_operator(&h, p);
        let res = residual_from_operator(&h, &f);
        if !res.is_finite() {
            status = SolveStatus::Diverged;
            break;
        }
        if res <= p.residual_tol() && energy_settled(&history, opts) {
            status = SolveStatus::Converged;
            break;
        }
        iterations += 1;

        // gradient of E/2π over the free nodes
        let grad: Vec<T> = f[1..].iter().zip(weights).map(|(&a, &w)| a * w).collect();
        if !newton && (iterations > opts.gradient_steps || res <= opts.newton_switch) {
            newton = true;
        }
        let mut dir = if newton {
            newton_direction(&h, p, &grad, weights)
        } else {
            v_gradient_direction(&metric, &grad)
        };
        let mut slope = dot(&grad, &dir);
        if !(slope < T::zero()) {
            dir = v_gradient_direction(&metric, &grad);
            slope = dot(&grad, &dir);
        }
        if !(slope < T::zero()) {
            // zero gradient: nothing left to do but record the step
            slope = T::zero();
            dir.iter_mut().for_each(|d| *d = T::zero());
        }

        let mut alpha = T::one();
        let mut accepted = None;
        let mut saw_nan = false;
        for _ in 0..80 {
            let mut values = Vec::with_capacity(h.len());
            values.push(T::zero());
            values.extend(h.values()[1..].iter().zip(&dir).map(|(&v, &d)| v + alpha * d));
            if values.iter().any(|v| !v.is_finite()) {
                saw_nan = true;
                alpha = alpha * opts.backtrack;
                continue;
            }
            let raw = Profile::new(grid.clone(), values).expect("finite trial point");
            let cand = if opts.fold { fold(&raw) } else { raw.clone() };
            let de = energy_difference(&h, &cand, p);
            if !de.is_finite() {
                saw_nan = true;
                alpha = alpha * opts.backtrack;
                continue;
            }
            let sufficient = de <= opts.armijo * alpha * two_pi * slope;
            let tiny_descent = de <= T::zero() && {
                let fc = euler_operator(&cand, p);
                residual_from_operator(&cand, &fc) < res
            };
            if sufficient || tiny_descent {
                let folded = opts.fold && cand != raw;
                accepted = Some((cand, de, folded));
                break;
            }
            alpha = alpha * opts.backtrack;
        }
        match accepted {
            Some((cand, de, folded)) => {
                if folded {
                    fold_applied += 1;
                }
                h = cand;
                e = e + de;
                history.push(e);
            }
            None => {
                status = if saw_nan {
                    SolveStatus::Diverged
                } else if res <= p.residual_tol() {
                    SolveStatus::Converged
                } else {
                    SolveStatus::Stalled
                };
            }
        }
    }

    if status == SolveStatus::MaxIterations {
        // the loop may have exited right after a successful final step
        let f = euler_operator(&h, p);
        if residual_from_operator(&h, &f) <= p.residual_tol() && energy_settled(&history, opts) {
            status = SolveStatus::Converged;
        }
    }

    let mut energy_now = energy(&h, p);
    let mut trivial_selected = false;
    if opts.select_trivial
        && status != SolveStatus::Diverged
        && energy_now >= T::zero()
        && h.max_abs() > T::zero()
    {
        h = Profile::zeros(grid.clone());
        energy_now = T::zero();
        history.push(T::zero().min(*history.last().expect("nonempty history")));
        trivial_selected = true;
        status = SolveStatus::Converged;
    }

    let f = euler_operator(&h, p);
    let residual = residual_from_operator(&h, &f);
    let boundary_flux = grid.weights()[grid.cells()] * f[grid.cells()];
    Ok(SolveReport {
        minimizer: h,
        energy: energy_now,
        residual,
        boundary_flux,
        iterations,
        mu: p.mu(),
        converged: status == SolveStatus::Converged,
        status,
        fold_applied,
        energy_history: history,
        trivial_selected,
    })
}

fn energy_settled<T: Scalar>(history: &[T], opts: &SolveOptions<T>) -> bool {
    let n = history.len();
    if n <= opts.energy_window {
        return false;
    }
    let last = history[n - 1];
    let bound = opts.energy_rtol * (T::one() + last.abs());
    history[n - 1 - opts.energy_window..]
        .windows(2)
        .all(|w| (w[1] - w[0]).abs() <= bound)
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn v_gradient_direction<T: Scalar>(metric: &Ldlt<T>, grad: &[T]) -> Vec<T> {
    metric.solve(grad).into_iter().map(|v| -v).collect()
}

/// Newton step on `H + τ M`, with the smallest shift `τ ≥ 0` (from a
/// geometric ladder) that makes the matrix positive definite.
fn newton_direction<T: Scalar>(
    h: &Profile<T>,
    p: &ModelParams<T>,
    grad: &[T],
    mass: &[T],
) -> Vec<T> {
    let hess = hessian(h, p);
    let mut shift = T::zero();
    let base = T::lit(1e-4) * (T::one() + T::lit(4.0) * p.mu().abs());
    for _ in 0..40 {
        let m = if shift == T::zero() {
            hess.clone()
        } else {
            hess.shifted(shift, mass)
        };
        if let Some(fac) = m.ldlt() {
            return fac.solve(grad).into_iter().map(|v| -v).collect();
        }
        shift = if shift == T::zero() {
            base
        } else {
            shift * T::lit(10.0)
        };
    }
    grad.iter().map(|&g| -g).collect()
}

/// Smooth random profile with `max |h| ≤ amplitude`, built from a few
/// quarter-wave sines so that `h(0) = 0`.
pub fn random_profile<T: Scalar, R: Rng>(
    grid: &Arc<RadialGrid<T>>,
    amplitude: T,
    rng: &mut R,
) -> Profile<T> {
    let coeffs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let raw = Profile::from_fn(grid.clone(), |r| {
        let r = r.to_f64().unwrap_or(0.0);
        let v: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * ((j as f64 + 0.5) * std::f64::consts::PI * r).sin())
            .sum();
        T::lit(v)
    })
    .expect("finite random profile");
    let peak = raw.max_abs();
    let scale = rng.gen_range(0.05..=1.0);
    if peak > T::zero() {
        raw.scaled(amplitude * T::lit(scale) / peak)
    } else {
        raw
    }
}

/// Runs `trials` minimizations from random smooth starts in
/// `[−π/2, π/2]`, deterministically in `rng_seed`.
pub fn minimize_multistart<T: Scalar>(
    grid: &Arc<RadialGrid<T>>,
    p: &ModelParams<T>,
    trials: usize,
    rng_seed: u64,
    opts: &SolveOptions<T>,
) -> Result<Vec<SolveReport<T>>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let starts: Vec<Profile<T>> = (0..trials)
        .map(|_| random_profile(grid, T::FRAC_PI_2(), &mut rng))
        .collect();
    starts
        .into_iter()
        .map(|s| minimize_with(p, Seed::Profile(s), opts))
        .collect()
}

/// Lowest-energy report of a multistart run.
pub fn best_of<T: Scalar>(reports: &[SolveReport<T>]) -> Option<&SolveReport<T>> {
    reports
        .iter()
        .min_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap_or(std::cmp::Ordering::Equal))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniquenessMode {
    /// Every run must land on `h ≡ 0`.
    ExpectTrivial,
    /// At least one run must find a nontrivial minimizer.
    ExpectNontrivial,
}

#[derive(Debug, Clone)]
pub struct UniquenessReport<T> {
    pub mode: UniquenessMode,
    pub passed: bool,
    /// Largest `L²(r dr)` norm among the converged minimizers.
    pub worst_norm: T,
    pub norms: Vec<T>,
    pub energies: Vec<T>,
    pub all_converged: bool,
}

/// Multistart check that `h ≡ 0` is the only minimizer (or, in
/// [`UniquenessMode::ExpectNontrivial`], that it is not).
pub fn verify_trivial_uniqueness<T: Scalar>(
    grid: &Arc<RadialGrid<T>>,
    p: &ModelParams<T>,
    trials: usize,
    rng_seed: u64,
    mode: UniquenessMode,
    trivial_tol: T,
) -> Result<UniquenessReport<T>, Error> {
    let reports = minimize_multistart(grid, p, trials, rng_seed, &SolveOptions::default())?;
    let norms: Vec<T> = reports.iter().map(|r| r.minimizer.l2_norm()).collect();
    let energies = reports.iter().map(|r| r.energy).collect();
    let all_converged = reports.iter().all(|r| r.converged);
    let worst_norm = reports
        .iter()
        .zip(&norms)
        .filter(|(r, _)| r.converged)
        .fold(T::zero(), |m, (_, &n)| m.max(n));
    let passed = match mode {
        UniquenessMode::ExpectTrivial => {
            all_converged && norms.iter().all(|&n| n <= trivial_tol)
        }
        UniquenessMode::ExpectNontrivial => reports
            .iter()
            .zip(&norms)
            .any(|(r, &n)| r.converged && n > trivial_tol),
    };
    Ok(UniquenessReport {
        mode,
        passed,
        worst_norm,
        norms,
        energies,
        all_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn setup(n: usize) -> (Arc<RadialGrid<f64>>, EigenPair<f64>) {
        let g = Arc::new(RadialGrid::new(n, 2.0).unwrap());
        let e = smallest_eigenpair(&g).unwrap();
        (g, e)
    }

    #[test]
    fn below_threshold_goes_to_zero() {
        let (g, _) = setup(256);
        let p = ModelParams::from_mu(1.0).unwrap();
        let init = Profile::from_fn(g, |r| FRAC_PI_2 * r * (2.0 - r)).unwrap();
        let rep = minimize(&p, Seed::Profile(init)).unwrap();
        assert!(rep.converged, "{:?}", rep.status);
        assert!(rep.minimizer.max_abs() < 1e-6);
        assert!(rep.energy >= -1e-9);
    }

    #[test]
    fn above_threshold_is_negative_and_positive() {
        let (g, e) = setup(256);
        let p = ModelParams::from_mu(e.threshold() + 0.2).unwrap();
        let rep = minimize(&p, Seed::default_on(g)).unwrap();
        assert!(rep.converged, "{:?}", rep.status);
        assert!(!rep.trivial_selected);
        assert!(rep.energy < 0.0);
        assert!(rep.residual <= 1e-8);
        assert!(rep.boundary_flux.abs() <= 1e-8);
        let v = rep.minimizer.values();
        assert!(v[1..].iter().all(|&x| x > 0.0 && x <= FRAC_PI_2));
        for w in rep.energy_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!((rep.energy_history.last().unwrap() - rep.energy).abs() < 1e-12);
    }

    #[test]
    fn negated_seed_without_fold() {
        let (_, e) = setup(256);
        let p = ModelParams::from_mu(e.threshold() + 0.2).unwrap();
        let plus = minimize(&p, Seed::along(&e, 0.1)).unwrap();
        let opts = SolveOptions {
            fold: false,
            ..SolveOptions::default()
        };
        let minus = minimize_with(&p, Seed::along(&e, -0.1), &opts).unwrap();
        assert!(minus.converged);
        assert!((plus.energy - minus.energy).abs() < 1e-10);
        let diff = plus.minimizer.axpy(1.0, &minus.minimizer).unwrap().l2_norm();
        assert!(diff < 1e-7, "diff {diff}");
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let (g, e) = setup(128);
        let p = ModelParams::from_mu(e.threshold() + 0.5)
            .unwrap()
            .with_max_iterations(1)
            .unwrap();
        let rep = minimize(&p, Seed::default_on(g)).unwrap();
        assert_eq!(rep.status, SolveStatus::MaxIterations);
        assert!(!rep.converged);
    }

    #[test]
    fn uniqueness_modes() {
        let (g, e) = setup(128);
        let zero = ModelParams::from_mu(0.0).unwrap();
        let r = verify_trivial_uniqueness(&g, &zero, 8, 7, UniquenessMode::ExpectTrivial, 1e-6)
            .unwrap();
        assert!(r.passed, "{:?}", r.norms);
        let below = ModelParams::from_mu(e.threshold() - 0.05).unwrap();
        let r = verify_trivial_uniqueness(&g, &below, 8, 7, UniquenessMode::ExpectTrivial, 1e-6)
            .unwrap();
        assert!(r.passed, "{:?}", r.norms);
        let above = ModelParams::from_mu(e.threshold() + 0.1).unwrap();
        let r =
            verify_trivial_uniqueness(&g, &above, 8, 7, UniquenessMode::ExpectNontrivial, 1e-6)
                .unwrap();
        assert!(r.passed);
        assert!(r.worst_norm > 1e-3);
    }
}
