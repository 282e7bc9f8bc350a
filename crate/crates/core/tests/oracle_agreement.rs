use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use magnetodisk_core::{cbar, energy, smallest_eigenpair, ModelParams, Profile, RadialGrid};
use magnetodisk_oracles as oracle;

fn grid(n: usize, grading: f64) -> Arc<RadialGrid<f64>> {
    Arc::new(RadialGrid::new(n, grading).unwrap())
}

#[test]
fn eigenvalue_matches_bessel_root() {
    let exact = oracle::gamma0();
    let e = smallest_eigenpair(&grid(2048, 2.0)).unwrap();
    let rel = (e.gamma0 - exact).abs() / exact;
    assert!(rel < 1e-5, "relative error {rel:e}");
    assert!(e.gamma0 > 1.0);
}

#[test]
fn eigenvalue_converges_at_second_order() {
    let exact = oracle::gamma0();
    let errs: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&n| (smallest_eigenpair(&grid(n, 2.0)).unwrap().gamma0 - exact).abs())
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn eigenfunction_matches_bessel_mode() {
    let g = grid(1024, 2.0);
    let e = smallest_eigenpair(&g).unwrap();
    let mode = oracle::BesselMode::first();
    let worst = g
        .nodes()
        .iter()
        .zip(e.phi0.values())
        .fold(0.0f64, |m, (&r, &v)| m.max((v - mode.eval(r)).abs()));
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn cubic_coefficient_matches_quadrature() {
    let g = grid(2048, 2.0);
    let e = smallest_eigenpair(&g).unwrap();
    let exact = oracle::cbar(oracle::gamma0() / 2.0);
    let p = ModelParams::from_mu(e.threshold()).unwrap();
    let c = cbar(&e.phi0, &p);
    assert!(c > 0.0);
    assert!((c - exact).abs() < 1e-4, "{c} vs {exact}");
}

#[test]
fn quadrature_of_sine_over_r() {
    // ∫ sin(πr)/r · r dr = 2/π
    for grading in [1.0, 2.0] {
        let g = grid(2048, grading);
        let v = g.integrate(&g.sample(|r| if r > 0.0 { (PI * r).sin() / r } else { PI })).unwrap();
        let ref_ = oracle::adaptive_simpson(&|r| (PI * r).sin(), 0.0, 1.0, 1e-14);
        assert!((v - ref_).abs() < 1e-6, "grading {grading}: {v} vs {ref_}");
    }
}

#[test]
fn energy_of_linear_profile() {
    let (a, mu) = (FRAC_PI_2, 1.0);
    let exact = oracle::energy(&|r| a * r, &|_| a, mu);
    let p = ModelParams::from_mu(mu).unwrap();
    for grading in [1.0, 2.0] {
        let h = Profile::from_fn(grid(2048, grading), |r| a * r).unwrap();
        let e = energy(&h, &p);
        assert!((e - exact).abs() < 1e-6, "grading {grading}: {e} vs {exact}");
    }
}

#[test]
fn energy_of_bessel_mode_near_threshold() {
    // E(εφ⁰) ≈ π ε² (γ₀ − 2μ) for small ε
    let mode = oracle::BesselMode::first();
    let eps = 1e-3;
    let mu = 1.0;
    let exact = oracle::energy(&|r| eps * mode.eval(r), &|r| eps * mode.derivative(r), mu);
    let h = Profile::from_fn(grid(2048, 2.0), |r| eps * mode.eval(r)).unwrap();
    let e = energy(&h, &ModelParams::from_mu(mu).unwrap());
    assert!((e - exact).abs() < 1e-6 * exact.abs().max(1e-6), "{e} vs {exact}");
    assert!((exact - PI * eps * eps * (oracle::gamma0() - 2.0 * mu)).abs() < 1e-8);
}
