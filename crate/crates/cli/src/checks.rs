//! Property checks run by `magnetodisk verify`.

use std::f64::consts::PI;
use std::sync::Arc;

use magnetodisk_core::fields::{
    check_displacement, check_reduction_identity, coupled_energy, coupling_lambda,
};
use magnetodisk_core::operators::{
    align_to_fold_levels, cubic_term, is_fold_aligned, energy_difference, euler_operator, nonlinear_split,
};
use magnetodisk_core::solver::{minimize_multistart, random_profile};
use magnetodisk_core::{
    cbar, energy, fold, gradient, reconstruct_w, smallest_eigenpair, EigenPair, ModelParams,
    Profile, RadialGrid, SolveOptions, SolveReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Deliberate defects for exercising the checks themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Fault {
    #[default]
    None,
    /// Negate the analytic gradient.
    GradientSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl Check {
    fn at_most(name: &'static str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self::judge(name, value <= threshold, Some(value), Some(threshold), detail)
    }

    fn judge(
        name: &'static str,
        ok: bool,
        value: Option<f64>,
        threshold: Option<f64>,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name,
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            threshold,
            detail: detail.into(),
        }
    }

    fn skipped(name: &'static str, why: impl Into<String>) -> Self {
        Self {
            name,
            status: Status::Skipped,
            value: None,
            threshold: None,
            detail: why.into(),
        }
    }
}

pub struct Context {
    pub grid: Arc<RadialGrid<f64>>,
    pub eigen: EigenPair<f64>,
    pub params: ModelParams<f64>,
    pub minimizer: SolveReport<f64>,
    pub seed: u64,
    pub trivial_tol: f64,
    pub reduction_samples: usize,
    pub stencil: f64,
    pub fault: Fault,
}

/// Grids coarser than this cannot show asymptotic refinement ratios.
pub const MIN_REFINEMENT_CELLS: usize = 32;

pub fn run_all(cx: &Context) -> Vec<Check> {
    vec![
        eigen_lower_bound(cx),
        eigen_refinement(cx),
        gradient_consistency(cx),
        energy_lower_bound(cx),
        fold_and_odd_symmetry(cx),
        operator_split(cx),
        cubic_homogeneity(cx),
        remainder_order(cx),
        cubic_coefficient(cx),
        threshold_dichotomy(cx),
        minimizer_converged(cx),
        reduction_identity(cx),
        displacement(cx),
        energy_consistency(cx),
    ]
}

fn eigen_lower_bound(cx: &Context) -> Check {
    Check::judge(
        "eigenvalue_above_one",
        cx.eigen.gamma0 > 1.0,
        Some(cx.eigen.gamma0),
        Some(1.0),
        "smallest eigenvalue must exceed 1",
    )
}

/// Richardson ratio of successive differences on `n`, `2n`, `4n` cells.
fn eigen_refinement(cx: &Context) -> Check {
    let name = "eigenvalue_refinement_order";
    let n = cx.grid.cells();
    if n < MIN_REFINEMENT_CELLS {
        return Check::skipped(name, format!("insufficient resolution (n={n} < {MIN_REFINEMENT_CELLS})"));
    }
    let g = cx.grid.grading();
    let gamma = |m: usize| {
        RadialGrid::new(m, g)
            .map(Arc::new)
            .ok()
            .and_then(|gr| smallest_eigenpair(&gr).ok())
            .map(|e| e.gamma0)
    };
    match (gamma(2 * n), gamma(4 * n)) {
        (Some(g2), Some(g4)) => {
            let ratio = (cx.eigen.gamma0 - g2) / (g2 - g4);
            Check::judge(
                name,
                (3.0..=5.0).contains(&ratio),
                Some(ratio),
                None,
                "ratio of successive refinement differences, expected about 4",
            )
        }
        _ => Check::judge(name, false, None, None, "eigensolve failed on a refined grid"),
    }
}

fn gradient_consistency(cx: &Context) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(cx.seed ^ 0x6772_6164);
    let t = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let h = random_profile(&cx.grid, 1.5, &mut rng);
        let v = random_profile(&cx.grid, 1.0, &mut rng);
        let mu = rng.gen_range(0.0..4.0);
        let p = ModelParams::from_mu(mu).expect("finite mu");
        let mut g = gradient(&h, &p);
        if cx.fault == Fault::GradientSign {
            g = g.negated();
        }
        let analytic = 2.0 * PI * g.inner(&v).expect("same grid");
        let plus = h.axpy(t, &v).expect("same grid");
        let minus = h.axpy(-t, &v).expect("same grid");
        let fd = energy_difference(&minus, &plus, &p) / (2.0 * t);
        let scale = fd.abs().max(1e-3);
        worst = worst.max((analytic - fd).abs() / scale);
    }
    Check::at_most(
        "gradient_consistency",
        worst,
        1e-6,
        "max relative error of directional derivatives over 20 random profiles",
    )
}

fn energy_lower_bound(cx: &Context) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(cx.seed ^ 0x6c6f_7762);
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let mu = rng.gen_range(0.0..=4.0);
        let h = if i % 2 == 0 {
            random_profile(&cx.grid, PI, &mut rng)
        } else {
            let mut v: Vec<f64> = (0..cx.grid.len()).map(|_| rng.gen_range(-PI..=PI)).collect();
            v[0] = 0.0;
            Profile::new(cx.grid.clone(), v).expect("finite values")
        };
        let p = ModelParams::from_mu(mu).expect("finite mu");
        worst = worst.min(energy(&h, &p) + PI * mu / 4.0);
    }
    Check::judge(
        "energy_lower_bound",
        worst >= -1e-6,
        Some(worst),
        Some(-1e-6),
        "min over 100 random profiles of E(h) + pi mu / 4",
    )
}

fn fold_and_odd_symmetry(cx: &Context) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(cx.seed ^ 0x666f_6c64);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let raw = random_profile(&cx.grid, 3.0 * PI / 2.0, &mut rng);
        // coarse grids need gentler profiles for every cell to fit one fold interval
        let mut h = align_to_fold_levels(&raw);
        let mut t = 1.0;
        while !is_fold_aligned(&h) {
            t *= 0.5;
            h = align_to_fold_levels(&raw.scaled(t));
        }
        let p = ModelParams::from_mu(rng.gen_range(0.0..4.0)).expect("finite mu");
        let e = energy(&h, &p);
        worst = worst
            .max((energy(&fold(&h), &p) - e).abs())
            .max((energy(&h.negated(), &p) - e).abs());
    }
    Check::at_most(
        "fold_and_odd_symmetry",
        worst,
        1e-10,
        "max |E(fold h) - E(h)|, |E(-h) - E(h)| on profiles with level crossings at nodes",
    )
}

fn operator_split(cx: &Context) -> Check {
    let p = &cx.params;
    let mut worst: f64 = 0.0;
    for eps in [0.05, 0.5, 1.2] {
        let h = cx.eigen.phi0.scaled(eps);
        let s = nonlinear_split(&h, p);
        let f = euler_operator(&h, p);
        let r = cx.grid.nodes();
        for k in 1..h.len() {
            let v = h.values()[k];
            let two_mu_h = 2.0 * p.mu() * v;
            let lhs = s.linear[k] + s.cubic[k] + s.remainder[k] - two_mu_h;
            // L, C and D each carry terms of size |h|/r² that cancel in the sum
            let scale = v.abs() / (r[k] * r[k]) + s.linear[k].abs() + s.cubic[k].abs() + two_mu_h.abs() + 1.0;
            worst = worst.max((lhs - f[k]).abs() / scale);
        }
    }
    Check::at_most(
        "operator_split",
        worst,
        1e-12,
        "max nodewise |L + C + D - 2 mu h - F| relative to the size of the terms",
    )
}

fn cubic_homogeneity(cx: &Context) -> Check {
    let h = &cx.eigen.phi0;
    let base = cubic_term(h, cx.params.mu());
    let mut exact = true;
    for t in [0.5, 2.0, -4.0] {
        let scaled = cubic_term(&h.scaled(t), cx.params.mu());
        exact &= scaled.iter().zip(&base).all(|(a, b)| *a == t * t * t * b);
    }
    Check::judge(
        "cubic_homogeneity",
        exact,
        None,
        None,
        "C(t h) == t^3 C(h) bitwise for t in {0.5, 2, -4}",
    )
}

fn remainder_order(cx: &Context) -> Check {
    let p = ModelParams::from_mu(cx.eigen.threshold()).expect("finite mu");
    let ratios: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| {
            let s = nonlinear_split(&cx.eigen.phi0.scaled(eps), &p);
            cx.grid.inner(&s.remainder, &s.remainder).expect("length").sqrt() / (eps * eps * eps)
        })
        .collect();
    let worst = ratios
        .windows(2)
        .map(|w| w[0] / w[1])
        .fold(f64::INFINITY, f64::min);
    Check::judge(
        "remainder_order",
        worst >= 3.0,
        Some(worst),
        Some(3.0),
        "min decrease of ||D(eps phi0)|| / eps^3 per halving of eps",
    )
}

fn cubic_coefficient(cx: &Context) -> Check {
    let p = ModelParams::from_mu(cx.eigen.threshold()).expect("finite mu");
    let c = cbar(&cx.eigen.phi0, &p);
    Check::judge("cubic_coefficient_positive", c > 0.0, Some(c), Some(0.0), "C-bar at the threshold")
}

fn threshold_dichotomy(cx: &Context) -> Check {
    let mu0 = cx.eigen.threshold();
    let opts = SolveOptions::default();
    let run = |mu: f64| {
        let p = cx.params.with_mu(mu).expect("finite mu");
        minimize_multistart(&cx.grid, &p, 4, cx.seed, &opts)
    };
    let (below, above) = match (run(0.9 * mu0), run(mu0 + 0.2)) {
        (Ok(b), Ok(a)) => (b, a),
        (Err(e), _) | (_, Err(e)) => {
            return Check::judge("threshold_dichotomy", false, None, None, e.to_string())
        }
    };
    let below_ok = below
        .iter()
        .all(|r| r.converged && r.minimizer.l2_norm() < cx.trivial_tol && r.energy.abs() < 1e-9);
    let best_above = above.iter().map(|r| r.energy).fold(f64::INFINITY, f64::min);
    Check::judge(
        "threshold_dichotomy",
        below_ok && best_above < -1e-6,
        Some(best_above),
        Some(-1e-6),
        "only h = 0 at 0.9 mu0; negative minimum at mu0 + 0.2",
    )
}

fn minimizer_converged(cx: &Context) -> Check {
    let r = &cx.minimizer;
    Check::judge(
        "minimizer_converged",
        r.converged,
        Some(r.residual),
        Some(cx.params.residual_tol()),
        format!("status {:?} after {} iterations", r.status, r.iterations),
    )
}

fn reduction_identity(cx: &Context) -> Check {
    let c = check_reduction_identity(&cx.minimizer.minimizer, cx.reduction_samples, cx.stencil, cx.seed);
    Check::at_most(
        "reduction_identity",
        c.max_error,
        1e-4,
        format!("max ||grad m|^2 - (sin h/r)^2 - h_r^2| over {} points", c.samples),
    )
}

fn displacement(cx: &Context) -> Check {
    let h = &cx.minimizer.minimizer;
    let w = reconstruct_w(h, coupling_lambda(&cx.params));
    let c = check_displacement(h, &w);
    Check::judge(
        "displacement_reconstruction",
        c.passes(),
        Some(c.residual_l2),
        Some(c.truncation),
        format!("w(1) = {:e}, w_r(0) = {:e}", c.w_at_one, c.wr_at_zero),
    )
}

fn energy_consistency(cx: &Context) -> Check {
    let h = &cx.minimizer.minimizer;
    let w = reconstruct_w(h, coupling_lambda(&cx.params));
    let diff = (coupled_energy(h, &w) - cx.minimizer.energy).abs();
    let dr = cx.grid.max_cell_width();
    Check::at_most(
        "coupled_energy_consistency",
        diff,
        dr * dr,
        "|coupled energy with reconstructed w - reduced energy|",
    )
}
