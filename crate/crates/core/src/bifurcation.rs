//! Branches of minimizers near `μ⁰ = γ₀/2` and the lowest-order
//! bifurcation equation `−δβ + C̄β³ = 0`, with `2μ = γ₀ + δ` and
//! `β = ⟨h, φ⁰⟩` in `L²(r dr)`.

use std::sync::Arc;

use crate::eigen::{smallest_eigenpair, EigenPair};
use crate::error::{BifurcationError, Error};
use crate::grid::RadialGrid;
use crate::operators::{cubic_term, energy, ModelParams};
use crate::profile::Profile;
use crate::scalar::Scalar;
use crate::solver::{minimize_with, Seed, SolveOptions, SolveReport};

/// `C̄ = (C(φ⁰, μ), φ⁰) = ∫ [−(2/3)(φ⁰)⁴/r + (16/3) μ (φ⁰)⁴ r] dr`.
pub fn cbar<T: Scalar>(phi0: &Profile<T>, p: &ModelParams<T>) -> T {
    let c = cubic_term(phi0, p.mu());
    phi0.grid().inner_unchecked(&c, phi0.values())
}

/// One root of the lowest-order equation with its stability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeRoot<T> {
    pub beta: T,
    /// `−δ + 3C̄β² > 0`, or `δ ≤ 0` for the trivial root.
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePrediction<T> {
    pub delta: T,
    pub roots: Vec<AmplitudeRoot<T>>,
}

/// Roots of `−δβ + C̄β³ = 0`: `{0}` for `δ ≤ 0`, otherwise
/// `{+√(δ/C̄), −√(δ/C̄), 0}` with the trivial root unstable.
pub fn predicted_amplitude<T: Scalar>(
    mu: T,
    gamma0: T,
    cbar: T,
) -> Result<AmplitudePrediction<T>, BifurcationError> {
    if !(cbar > T::zero()) {
        return Err(BifurcationError::NonPositiveCubic(
            cbar.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let delta = T::lit(2.0) * mu - gamma0;
    let roots = if delta <= T::zero() {
        vec![AmplitudeRoot {
            beta: T::zero(),
            stable: true,
        }]
    } else {
        let b = (delta / cbar).sqrt();
        vec![
            AmplitudeRoot { beta: b, stable: true },
            AmplitudeRoot { beta: -b, stable: true },
            AmplitudeRoot {
                beta: T::zero(),
                stable: false,
            },
        ]
    };
    Ok(AmplitudePrediction { delta, roots })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Trivial,
    Plus,
    Minus,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Trivial => "trivial",
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint<T> {
    pub mu: T,
    pub branch: Branch,
    pub beta: T,
    pub energy: T,
    /// Index into [`BifurcationDiagram::profiles`]; `None` on the trivial
    /// branch.
    pub profile_id: Option<usize>,
}

impl<T: Scalar> BranchPoint<T> {
    pub fn delta(&self, gamma0: T) -> T {
        T::lit(2.0) * self.mu - gamma0
    }
}

/// Margins gating the diagram's structural assertions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramConfig<T> {
    /// No nontrivial point may appear at `μ ≤ γ₀/2 − δ₀`.
    pub delta0: T,
    /// Nontrivial points with `μ < γ₀/2 + δ₀` must satisfy `‖h‖ ≤ ρ₀`.
    pub rho0: T,
    /// Amplitude of the `εφ⁰` seed used when no branch is being followed.
    pub seed_epsilon: T,
    /// `L²(r dr)` norm below which a minimizer counts as trivial.
    pub trivial_tol: T,
    pub solve: SolveOptions<T>,
}

impl<T: Scalar> Default for DiagramConfig<T> {
    fn default() -> Self {
        Self {
            delta0: T::lit(0.5),
            rho0: T::one(),
            seed_epsilon: T::lit(0.1),
            trivial_tol: T::lit(1e-6),
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BifurcationDiagram<T> {
    pub gamma0: T,
    /// `C̄` at `μ⁰ = γ₀/2`.
    pub cbar: T,
    /// Sorted by `μ`, then branch.
    pub points: Vec<BranchPoint<T>>,
    pub profiles: Vec<Profile<T>>,
    pub eigen: EigenPair<T>,
}

/// Result of [`trace_branches`]: the diagram plus the reason it stopped
/// early, if it did.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    pub diagram: BifurcationDiagram<T>,
    pub failure: Option<String>,
}

impl<T: Scalar> BifurcationDiagram<T> {
    pub fn threshold(&self) -> T {
        self.gamma0 / T::lit(2.0)
    }

    pub fn branch(&self, b: Branch) -> impl Iterator<Item = &BranchPoint<T>> {
        self.points.iter().filter(move |p| p.branch == b)
    }

    /// `(largest μ with only the trivial solution, smallest μ with a
    /// nontrivial one)`, when the sweep crosses the threshold.
    pub fn detected_threshold(&self) -> Option<(Option<T>, T)> {
        let first = self.branch(Branch::Plus).map(|p| p.mu).next()?;
        let below = self
            .branch(Branch::Trivial)
            .map(|p| p.mu)
            .filter(|&m| m < first)
            .fold(None, |acc: Option<T>, m| Some(acc.map_or(m, |a| a.max(m))));
        Some((below, first))
    }

    /// `(δ, β)` for the plus branch with `δ > 0`.
    pub fn amplitude_samples(&self) -> Vec<(T, T)> {
        self.branch(Branch::Plus)
            .map(|p| (p.delta(self.gamma0), p.beta))
            .filter(|&(d, b)| d > T::zero() && b > T::zero())
            .collect()
    }

    /// Lists violated structural invariants (empty when all hold).
    pub fn check_invariants(&self, cfg: &DiagramConfig<T>, tol: T) -> Vec<String> {
        let mut out = Vec::new();
        let mu0 = self.threshold();
        for w in self.points.windows(2) {
            if (w[1].mu, w[1].branch) < (w[0].mu, w[0].branch) {
                out.push("points not sorted by (mu, branch)".into());
                break;
            }
        }
        for p in &self.points {
            match p.branch {
                Branch::Trivial => {
                    if p.beta.abs() > tol {
                        out.push(format!("trivial point at mu={} has beta={}", p.mu, p.beta));
                    }
                }
                _ => {
                    if p.mu <= mu0 - cfg.delta0 {
                        out.push(format!("nontrivial point at mu={} below the margin", p.mu));
                    }
                    if p.mu < mu0 + cfg.delta0 {
                        if let Some(id) = p.profile_id {
                            let n = self.profiles[id].l2_norm();
                            if n > cfg.rho0 {
                                out.push(format!("branch norm {n} exceeds rho0 at mu={}", p.mu));
                            }
                        }
                    }
                }
            }
        }
        for plus in self.branch(Branch::Plus) {
            match self.branch(Branch::Minus).find(|m| m.mu == plus.mu) {
                Some(minus) => {
                    if (plus.beta + minus.beta).abs() > tol || plus.beta * minus.beta > T::zero() {
                        out.push(format!("beta not antisymmetric at mu={}", plus.mu));
                    }
                    if (plus.energy - minus.energy).abs() > tol {
                        out.push(format!("branch energies differ at mu={}", plus.mu));
                    }
                }
                None => out.push(format!("plus point without minus partner at mu={}", plus.mu)),
            }
        }
        out
    }
}

/// Least-squares slope and intercept of `log β` against `log δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeFit<T> {
    pub slope: T,
    pub intercept: T,
}

pub fn fit_amplitude_law<T: Scalar>(samples: &[(T, T)]) -> Option<AmplitudeFit<T>> {
    if samples.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(samples.len());
    let xs: Vec<T> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<T> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    if sxx == T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    Some(AmplitudeFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Evenly spaced couplings `lo, …, hi` (`steps ≥ 2` values).
pub fn mu_grid<T: Scalar>(lo: T, hi: T, steps: usize) -> Result<Vec<T>, BifurcationError> {
    if !(lo < hi) || steps < 2 || !lo.is_finite() || !hi.is_finite() {
        return Err(BifurcationError::Range {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
            steps,
        });
    }
    let last = T::from_usize_lossy(steps - 1);
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                hi
            } else {
                lo + (hi - lo) * T::from_usize_lossy(i) / last
            }
        })
        .collect())
}

/// Natural-parameter continuation over `[lo, hi]`.
///
/// Each step minimizes from the previous plus-branch profile (or from
/// `εφ⁰` when no nontrivial branch is being followed). The minus branch is
/// the negation of the plus branch; the trivial branch is recorded at every
/// `μ`. A solver failure truncates the diagram and is reported in
/// [`Trace::failure`].
pub fn trace_branches<T: Scalar>(
    grid: &Arc<RadialGrid<T>>,
    lo: T,
    hi: T,
    steps: usize,
    p: &ModelParams<T>,
    cfg: &DiagramConfig<T>,
) -> Result<Trace<T>, Error> {
    let mus = mu_grid(lo, hi, steps)?;
    let eigen = smallest_eigenpair(grid)?;
    trace_with_eigen(&eigen, &mus, p, cfg)
}

/// Continuation over explicit couplings (sorted ascending) using a known
/// eigenpair.
pub fn trace_with_eigen<T: Scalar>(
    eigen: &EigenPair<T>,
    mus: &[T],
    p: &ModelParams<T>,
    cfg: &DiagramConfig<T>,
) -> Result<Trace<T>, Error> {
    let phi0 = &eigen.phi0;
    let gamma0 = eigen.gamma0;
    let cbar0 = cbar(phi0, &p.with_mu(gamma0 / T::lit(2.0))?);
    let mut points = Vec::new();
    let mut profiles = Vec::new();
    let mut previous: Option<Profile<T>> = None;
    let mut failure = None;

    for &mu in mus {
        let params = p.with_mu(mu)?;
        let seed = match &previous {
            Some(prev) => Seed::Profile(prev.clone()),
            None => Seed::along(eigen, cfg.seed_epsilon),
        };
        let report: SolveReport<T> = minimize_with(&params, seed, &cfg.solve)?;
        if !report.converged {
            failure = Some(format!(
                "solver {:?} at mu={} (residual {})",
                report.status, mu, report.residual
            ));
            break;
        }
        points.push(BranchPoint {
            mu,
            branch: Branch::Trivial,
            beta: T::zero(),
            energy: T::zero(),
            profile_id: None,
        });
        let h = report.minimizer;
        if h.l2_norm() > cfg.trivial_tol {
            let beta = h.inner(phi0).expect("same grid");
            let minus = h.negated();
            let e_minus = energy(&minus, &params);
            profiles.push(h.clone());
            points.push(BranchPoint {
                mu,
                branch: Branch::Plus,
                beta,
                energy: report.energy,
                profile_id: Some(profiles.len() - 1),
            });
            profiles.push(minus);
            points.push(BranchPoint {
                mu,
                branch: Branch::Minus,
                beta: -beta,
                energy: e_minus,
                profile_id: Some(profiles.len() - 1),
            });
            previous = Some(h);
        } else {
            previous = None;
        }
    }
    points.sort_by(|a, b| {
        a.mu.partial_cmp(&b.mu)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.branch.cmp(&b.branch))
    });
    Ok(Trace {
        diagram: BifurcationDiagram {
            gamma0,
            cbar: cbar0,
            points,
            profiles,
            eigen: eigen.clone(),
        },
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prediction_cases() {
        let z = predicted_amplitude(1.0f64, 2.0, 1.0).unwrap();
        assert_eq!(z.roots, vec![AmplitudeRoot { beta: 0.0, stable: true }]);
        let p = predicted_amplitude(1.02f64, 2.0, 1.0).unwrap();
        assert!((p.delta - 0.04).abs() < 1e-15);
        assert!((p.roots[0].beta - 0.2).abs() < 1e-12);
        assert!((p.roots[1].beta + 0.2).abs() < 1e-12);
        assert!(p.roots[0].stable && p.roots[1].stable && !p.roots[2].stable);
        let neg = predicted_amplitude(0.5f64, 2.0, 3.0).unwrap();
        assert_eq!(neg.roots.len(), 1);
        assert!(neg.roots[0].stable);
        assert!(predicted_amplitude(1.0f64, 2.0, 0.0).is_err());
    }

    #[test]
    fn mu_grid_endpoints() {
        let m = mu_grid(1.0f64, 2.0, 5).unwrap();
        assert_eq!(m, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!(mu_grid(2.0f64, 1.0, 5).is_err());
        assert!(mu_grid(1.0f64, 2.0, 1).is_err());
    }

    #[test]
    fn fit_recovers_power() {
        let s: Vec<(f64, f64)> = [0.01, 0.1, 1.0].iter().map(|&d: &f64| (d, 3.0 * d.sqrt())).collect();
        let f = fit_amplitude_law(&s).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit_amplitude_law(&s[..1]).is_none());
    }

    #[test]
    fn cbar_quartic_scaling() {
        let g = Arc::new(RadialGrid::<f64>::new(128, 2.0).unwrap());
        let e = smallest_eigenpair(&g).unwrap();
        let p = ModelParams::from_mu(e.threshold()).unwrap();
        let c = cbar(&e.phi0, &p);
        assert!(c > 0.0);
        let c2 = cbar(&e.phi0.scaled(2.0), &p);
        assert!((c2 - 16.0 * c).abs() < 1e-10 * c);
    }

    #[test]
    fn sweep_below_threshold_is_trivial() {
        let g = Arc::new(RadialGrid::<f64>::new(128, 2.0).unwrap());
        let p = ModelParams::from_mu(1.0).unwrap();
        let t = trace_branches(&g, 0.5, 1.5, 5, &p, &DiagramConfig::default()).unwrap();
        assert!(t.failure.is_none());
        assert_eq!(t.diagram.points.len(), 5);
        assert!(t.diagram.points.iter().all(|p| p.branch == Branch::Trivial));
        assert!(t.diagram.detected_threshold().is_none());
    }
}
