use magnetodisk_core::bifurcation::{fit_amplitude_law, trace_branches, DiagramConfig};
use magnetodisk_core::fields::{
    check_displacement, check_reduction_identity, coupled_energy, coupling_lambda, sample_lattice,
};
use magnetodisk_core::solver::{minimize_multistart, minimize_with, Seed, SolveOptions, SolveReport};
use magnetodisk_core::{reconstruct_w, smallest_eigenpair, EigenPair};
use serde_json::json;

use crate::checks::{self, Context, Fault, Status};
use crate::config::{CouplingNeed, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Meta, Writer};

pub fn eigen(cfg: &RunConfig) -> Result<Writer, CliError> {
    cfg.validate(CouplingNeed::Nothing)?;
    let grid = cfg.grid()?;
    let e = smallest_eigenpair(&grid).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut out = Writer::create(cfg, Meta::new("eigen", cfg))?;
    out.json(
        "eigen",
        json!({
            "gamma0": e.gamma0,
            "threshold_mu0": e.threshold(),
            "n": cfg.n,
            "grading": cfg.grading,
            "residual": e.residual,
            "iterations": e.iterations,
        }),
    )?;
    let rows: Vec<Vec<Cell>> = grid
        .nodes()
        .iter()
        .zip(e.phi0.values())
        .map(|(&r, &v)| vec![Cell::Num(r), Cell::Num(v)])
        .collect();
    out.table("phi0", &["r", "phi0"], &rows)?;
    Ok(out)
}

/// Best of `ε φ⁰` and `starts − 1` random starts: lowest energy among the
/// converged runs, else lowest residual.
fn solve(cfg: &RunConfig) -> Result<(EigenPair<f64>, SolveReport<f64>, usize), CliError> {
    let grid = cfg.grid()?;
    let p = cfg.params()?;
    let e = smallest_eigenpair(&grid).map_err(|e| CliError::Numerical(e.to_string()))?;
    let opts = SolveOptions::default();
    let mut runs = vec![minimize_with(&p, Seed::along(&e, cfg.seed_epsilon), &opts)?];
    runs.extend(minimize_multistart(&grid, &p, cfg.starts - 1, cfg.seed, &opts)?);
    let converged = runs.iter().filter(|r| r.converged).count();
    let best = if converged > 0 {
        runs.into_iter()
            .filter(|r| r.converged)
            .min_by(|a, b| a.energy.total_cmp(&b.energy))
    } else {
        runs.into_iter().min_by(|a, b| a.residual.total_cmp(&b.residual))
    }
    .expect("at least one start");
    Ok((e, best, converged))
}

fn report_json(r: &SolveReport<f64>, lambda: f64, starts: usize, converged: usize) -> serde_json::Value {
    json!({
        "mu": r.mu,
        "lambda": lambda,
        "energy": r.energy,
        "residual": r.residual,
        "boundary_flux": r.boundary_flux,
        "iterations": r.iterations,
        "converged": r.converged,
        "status": format!("{:?}", r.status),
        "fold_applied": r.fold_applied,
        "trivial_selected": r.trivial_selected,
        "norm_l2": r.minimizer.l2_norm(),
        "max_h": r.minimizer.max_abs(),
        "starts": starts,
        "starts_converged": converged,
    })
}

pub fn minimize(cfg: &RunConfig) -> Result<Writer, CliError> {
    cfg.validate(CouplingNeed::Mu)?;
    let p = cfg.params()?;
    let (_, r, converged) = solve(cfg)?;
    let lambda = coupling_lambda(&p);
    let w = reconstruct_w(&r.minimizer, lambda);
    let mut out = Writer::create(cfg, Meta::new("minimize", cfg))?;
    out.json("report", report_json(&r, lambda, cfg.starts, converged))?;
    let rows: Vec<Vec<Cell>> = r
        .minimizer
        .grid()
        .nodes()
        .iter()
        .zip(r.minimizer.values())
        .zip(w.values())
        .map(|((&x, &h), &wv)| vec![Cell::Num(x), Cell::Num(h), Cell::Num(wv)])
        .collect();
    out.table("profile", &["r", "h", "w"], &rows)?;
    if !r.converged {
        return Err(CliError::Numerical(format!(
            "no start converged ({:?}, residual {:e}); best iterate written to {}",
            r.status,
            r.residual,
            out.dir().display()
        )));
    }
    Ok(out)
}

pub fn sweep(cfg: &RunConfig) -> Result<Writer, CliError> {
    cfg.validate(CouplingNeed::Range)?;
    let range = cfg.mu_range.expect("validated");
    let grid = cfg.grid()?;
    let p = cfg.params_for(range.lo)?;
    let dcfg = DiagramConfig {
        delta0: cfg.delta0,
        rho0: cfg.rho0,
        seed_epsilon: cfg.seed_epsilon,
        trivial_tol: cfg.trivial_tol,
        solve: SolveOptions::default(),
    };
    let trace = trace_branches(&grid, range.lo, range.hi, range.steps, &p, &dcfg)?;
    let d = &trace.diagram;

    let samples = d.amplitude_samples();
    // the square-root law is asymptotic: fit over the last decade of δ
    let dmin = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let mut window: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.0 <= 10.0 * dmin).collect();
    if window.len() < 2 {
        window = samples.clone();
    }
    let fit = fit_amplitude_law(&window);
    let detected = d.detected_threshold();
    let step = (range.hi - range.lo) / (range.steps - 1) as f64;

    let mut out = Writer::create(cfg, Meta::new("sweep", cfg))?;
    let rows: Vec<Vec<Cell>> = d
        .points
        .iter()
        .map(|pt| {
            vec![
                Cell::Num(pt.mu),
                Cell::Text(pt.branch.as_str()),
                Cell::Num(pt.beta),
                Cell::Num(pt.energy),
            ]
        })
        .collect();
    out.table("diagram", &["mu", "branch", "beta", "energy"], &rows)?;
    out.json(
        "summary",
        json!({
            "gamma0": d.gamma0,
            "threshold_mu0": d.threshold(),
            "cbar": d.cbar,
            "mu_range": { "lo": range.lo, "hi": range.hi, "steps": range.steps, "step": step },
            "detected_threshold": detected.map(|(below, above)| json!({
                "last_trivial_mu": below,
                "first_nontrivial_mu": above,
            })),
            "amplitude_fit": fit.map(|f| json!({
                "slope": f.slope,
                "intercept": f.intercept,
                "samples": window.len(),
                "delta_min": window.first().map(|s| s.0),
                "delta_max": window.last().map(|s| s.0),
            })),
            "invariant_violations": d.check_invariants(&dcfg, 1e-10),
            "completed_steps": d.points.iter().filter(|p| p.branch == magnetodisk_core::Branch::Trivial).count(),
            "failure": trace.failure,
        }),
    )?;
    if let Some(f) = &trace.failure {
        return Err(CliError::Numerical(format!("continuation stopped: {f}")));
    }
    Ok(out)
}

pub fn fields(cfg: &RunConfig) -> Result<Writer, CliError> {
    cfg.validate(CouplingNeed::Mu)?;
    let p = cfg.params()?;
    let (_, r, converged) = solve(cfg)?;
    let h = &r.minimizer;
    let lambda = coupling_lambda(&p);
    let w = reconstruct_w(h, lambda);
    let samples = sample_lattice(h, &w, cfg.lattice);
    let modulus_defect = samples
        .iter()
        .map(|s| (s.modulus() - 1.0).abs())
        .fold(0.0, f64::max);
    let red = check_reduction_identity(h, cfg.reduction_samples, cfg.stencil, cfg.seed);
    let disp = check_displacement(h, &w);

    let mut out = Writer::create(cfg, Meta::new("fields", cfg))?;
    let rows: Vec<Vec<Cell>> = samples
        .iter()
        .map(|s| {
            vec![
                Cell::Num(s.x),
                Cell::Num(s.y),
                Cell::Num(s.m[0]),
                Cell::Num(s.m[1]),
                Cell::Num(s.m[2]),
                Cell::Num(s.w),
            ]
        })
        .collect();
    out.table("fields", &["x", "y", "m1", "m2", "m3", "w"], &rows)?;
    out.json(
        "fields",
        json!({
            "solve": report_json(&r, lambda, cfg.starts, converged),
            "lattice": cfg.lattice,
            "samples": samples.len(),
            "max_modulus_defect": modulus_defect,
            "reduction_identity": {
                "max_error": red.max_error,
                "max_density": red.max_density,
                "samples": red.samples,
                "stencil": cfg.stencil,
            },
            "displacement": {
                "w_at_one": disp.w_at_one,
                "wr_at_zero": disp.wr_at_zero,
                "residual_l2": disp.residual_l2,
                "truncation": disp.truncation,
                "passes": disp.passes(),
            },
            "coupled_energy": coupled_energy(h, &w),
            "reduced_energy": r.energy,
        }),
    )
    .map_err(CliError::from)?;
    if !r.converged {
        return Err(CliError::Numerical(format!(
            "minimization did not converge ({:?}, residual {:e})",
            r.status, r.residual
        )));
    }
    Ok(out)
}

pub fn verify(cfg: &RunConfig, fault: Fault) -> Result<Writer, CliError> {
    cfg.validate(CouplingNeed::Mu)?;
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let eigen = smallest_eigenpair(&grid).map_err(|e| CliError::Numerical(e.to_string()))?;
    let minimizer = minimize_with(
        &params,
        Seed::along(&eigen, cfg.seed_epsilon),
        &SolveOptions::default(),
    )?;
    let cx = Context {
        grid,
        eigen,
        params,
        minimizer,
        seed: cfg.seed,
        trivial_tol: cfg.trivial_tol,
        reduction_samples: cfg.reduction_samples,
        stencil: cfg.stencil,
        fault,
    };
    let results = checks::run_all(&cx);
    let failures: Vec<&str> = results
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| c.name)
        .collect();
    let mut out = Writer::create(cfg, Meta::new("verify", cfg))?;
    out.json(
        "verify",
        json!({
            "passed": failures.is_empty(),
            "failures": failures,
            "checks": results,
        }),
    )?;
    if !failures.is_empty() {
        return Err(CliError::Numerical(format!("failed checks: {}", failures.join(", "))));
    }
    Ok(out)
}
