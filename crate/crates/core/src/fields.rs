//! Physical fields on the disk: the out-of-plane displacement `w(r)` and the
//! magnetization `m = (x/r sin h, y/r sin h, cos h)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::FieldsError;
use crate::grid::RadialGrid;
use crate::operators::ModelParams;
use crate::profile::Profile;
use crate::scalar::Scalar;

/// Displacement `w` at the grid nodes. Unlike a [`Profile`] it is pinned at
/// `r = 1` rather than at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Displacement<T> {
    grid: Arc<RadialGrid<T>>,
    values: Vec<T>,
    lambda: T,
}

impl<T: Scalar> Displacement<T> {
    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Nodal `w_r` (second-order stencils of the grid).
    pub fn derivative(&self) -> Vec<T> {
        self.grid.derivative_unchecked(&self.values)
    }
}

/// `λ` of the parameters, or `√(2μ)` when only `μ ≥ 0` was given.
pub fn coupling_lambda<T: Scalar>(p: &ModelParams<T>) -> T {
    p.lambda()
        .unwrap_or_else(|| (T::lit(2.0) * p.mu().max(T::zero())).sqrt())
}

/// Integrates `w_r = −(λ/2) sin 2h` inward from `w(1) = 0` with the
/// trapezoidal rule on each cell.
pub fn reconstruct_w<T: Scalar>(h: &Profile<T>, lambda: T) -> Displacement<T> {
    let g = h.grid();
    let r = g.nodes();
    let v = h.values();
    let half = lambda / T::lit(2.0);
    let slope: Vec<T> = v.iter().map(|&x| -half * (x + x).sin()).collect();
    let n = g.cells();
    let mut w = vec![T::zero(); n + 1];
    for k in (0..n).rev() {
        let dr = r[k + 1] - r[k];
        w[k] = w[k + 1] - dr * (slope[k] + slope[k + 1]) / T::lit(2.0);
    }
    Displacement {
        grid: g.clone(),
        values: w,
        lambda,
    }
}

/// Nodal residual of `w_rr + w_r/r + (λ/2)[(sin 2h)_r + sin 2h / r] = 0`
/// at the interior nodes, by finite differences.
pub fn displacement_equation_residual<T: Scalar>(h: &Profile<T>, w: &Displacement<T>) -> Vec<T> {
    let g = h.grid();
    let r = g.nodes();
    let wr = w.derivative();
    let wrr = second_derivative(r, w.values());
    let s: Vec<T> = h.values().iter().map(|&x| (x + x).sin()).collect();
    let sr = g.derivative_unchecked(&s);
    let half = w.lambda / T::lit(2.0);
    (1..g.cells())
        .map(|k| wrr[k] + wr[k] / r[k] + half * (sr[k] + s[k] / r[k]))
        .collect()
}

/// Boundary data and equation residual of a reconstructed displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementCheck<T> {
    pub w_at_one: T,
    pub wr_at_zero: T,
    /// `L²(r dr)` norm of [`displacement_equation_residual`].
    pub residual_l2: T,
    /// Second-order truncation scale of the mesh, `(max Δr)²`.
    pub truncation: T,
}

impl<T: Scalar> DisplacementCheck<T> {
    pub fn passes(&self) -> bool {
        self.w_at_one == T::zero()
            && self.wr_at_zero.abs() <= self.truncation
            && self.residual_l2 <= self.truncation
    }
}

/// The nodal residual is measured in `L²(r dr)`: near the origin the `1/r`
/// terms amplify the O(Δr²) nodal error of `h` into an O(1) pointwise
/// defect on a set of vanishing measure.
pub fn check_displacement<T: Scalar>(h: &Profile<T>, w: &Displacement<T>) -> DisplacementCheck<T> {
    let g = h.grid();
    let res = displacement_equation_residual(h, w);
    let wt = &g.weights()[1..g.cells()];
    let l2 = res
        .iter()
        .zip(wt)
        .fold(T::zero(), |acc, (&e, &q)| acc + q * e * e)
        .sqrt();
    let dr = g.max_cell_width();
    DisplacementCheck {
        w_at_one: w.values[g.cells()],
        wr_at_zero: w.derivative()[0],
        residual_l2: l2,
        truncation: dr * dr,
    }
}

/// Three-point second derivative at the interior nodes (zero at the ends).
fn second_derivative<T: Scalar>(r: &[T], f: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); r.len()];
    for k in 1..r.len() - 1 {
        let h1 = r[k] - r[k - 1];
        let h2 = r[k + 1] - r[k];
        out[k] = T::lit(2.0)
            * (f[k - 1] / (h1 * (h1 + h2)) - f[k] / (h1 * h2) + f[k + 1] / (h2 * (h1 + h2)));
    }
    out
}

/// Coupled energy `π ∫ [h_r² + (sin h/r)² + λ sin 2h w_r + w_r²] r dr`,
/// with the gradient term treated as in [`crate::operators::energy`] and
/// `w_r` taken from finite differences of `w`.
pub fn coupled_energy<T: Scalar>(h: &Profile<T>, w: &Displacement<T>) -> T {
    let g = h.grid();
    let (r, wt, v) = (g.nodes(), g.weights(), h.values());
    let wr = w.derivative();
    let mut acc = T::zero();
    for k in 0..g.cells() {
        let jump = v[k + 1] - v[k];
        acc = acc + g.cell_stiffness(k) * jump * jump;
    }
    for k in 1..g.len() {
        let s = v[k].sin() / r[k];
        acc = acc + wt[k] * (s * s + w.lambda * (v[k] + v[k]).sin() * wr[k] + wr[k] * wr[k]);
    }
    T::PI() * acc
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes with
/// the three-point end conditions). Never overshoots the data between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip<T> {
    x: Vec<T>,
    y: Vec<T>,
    d: Vec<T>,
}

impl<T: Scalar> Pchip<T> {
    /// `x` strictly increasing with at least two points.
    pub fn new(x: &[T], y: &[T]) -> Self {
        assert!(x.len() == y.len() && x.len() >= 2);
        let n = x.len();
        let h: Vec<T> = x.windows(2).map(|p| p[1] - p[0]).collect();
        let del: Vec<T> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![T::zero(); n];
        if n == 2 {
            d[0] = del[0];
            d[1] = del[0];
        } else {
            for k in 1..n - 1 {
                if del[k - 1] * del[k] > T::zero() {
                    let w1 = T::lit(2.0) * h[k] + h[k - 1];
                    let w2 = h[k] + T::lit(2.0) * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], del[0], del[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
        }
    }

    fn locate(&self, t: T) -> usize {
        let k = self.x.partition_point(|&xi| xi <= t);
        k.clamp(1, self.x.len() - 1) - 1
    }

    /// Value and first derivative at `t` (extrapolates the end cubics).
    pub fn eval_with_derivative(&self, t: T) -> (T, T) {
        let k = self.locate(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (d0, d1) = (self.d[k] * h, self.d[k + 1] * h);
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + one;
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        let value = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
        let six = T::lit(6.0);
        let dh00 = six * s2 - six * s;
        let dh10 = three * s2 - T::lit(4.0) * s + one;
        let dh01 = -dh00;
        let dh11 = three * s2 - two * s;
        let deriv = (dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1) / h;
        (value, deriv)
    }

    pub fn eval(&self, t: T) -> T {
        self.eval_with_derivative(t).0
    }
}

fn end_slope<T: Scalar>(h0: T, h1: T, del0: T, del1: T) -> T {
    let d = ((T::lit(2.0) * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= T::zero() {
        T::zero()
    } else if del0 * del1 <= T::zero() && d.abs() > (T::lit(3.0) * del0).abs() {
        T::lit(3.0) * del0
    } else {
        d
    }
}

/// Magnetization of a radial profile, sampled off-grid through a monotone
/// interpolant of `h`.
#[derive(Debug, Clone)]
pub struct MagnetizationField<T> {
    interp: Pchip<T>,
}

impl<T: Scalar> MagnetizationField<T> {
    pub fn new(h: &Profile<T>) -> Self {
        Self {
            interp: Pchip::new(h.grid().nodes(), h.values()),
        }
    }

    /// `h(r)` and `h_r(r)` of the interpolant.
    pub fn profile_at(&self, r: T) -> (T, T) {
        self.interp.eval_with_derivative(r)
    }

    /// `m(x, y)`; `(0, 0, 1)` at the centre.
    pub fn at(&self, x: T, y: T) -> Result<[T; 3], FieldsError> {
        let r2 = x * x + y * y;
        if !(r2 <= T::one()) {
            return Err(FieldsError::OutsideDisk {
                x: x.to_f64().unwrap_or(f64::NAN),
                y: y.to_f64().unwrap_or(f64::NAN),
            });
        }
        if r2 == T::zero() {
            return Ok([T::zero(), T::zero(), T::one()]);
        }
        let r = r2.sqrt();
        let h = self.interp.eval(r);
        let s = h.sin() / r;
        Ok([x * s, y * s, h.cos()])
    }
}

pub fn magnetization_at<T: Scalar>(h: &Profile<T>, x: T, y: T) -> Result<[T; 3], FieldsError> {
    MagnetizationField::new(h).at(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample<T> {
    pub x: T,
    pub y: T,
    pub m: [T; 3],
    pub w: T,
}

impl<T: Scalar> FieldSample<T> {
    pub fn modulus(&self) -> T {
        self.m.iter().map(|&c| c * c).sum::<T>().sqrt()
    }
}

/// Samples on the points of a `per_axis × per_axis` lattice over
/// `[−1, 1]²` that lie in the closed disk, row by row in `y` then `x`.
pub fn sample_lattice<T: Scalar>(
    h: &Profile<T>,
    w: &Displacement<T>,
    per_axis: usize,
) -> Vec<FieldSample<T>> {
    let field = MagnetizationField::new(h);
    let wi = Pchip::new(w.grid.nodes(), &w.values);
    let k = per_axis.max(2);
    let coord = |i: usize| -T::one() + T::lit(2.0) * T::from_usize_lossy(i) / T::from_usize_lossy(k - 1);
    let mut out = Vec::new();
    for j in 0..k {
        for i in 0..k {
            let (x, y) = (coord(i), coord(j));
            if let Ok(m) = field.at(x, y) {
                let r = (x * x + y * y).sqrt();
                out.push(FieldSample { x, y, m, w: wi.eval(r) });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionCheck<T> {
    pub max_error: T,
    /// Largest `|∇m|²` seen, for scale.
    pub max_density: T,
    pub samples: usize,
}

/// Compares `|∇m|²` from central differences of `m` (step `stencil`, both
/// directions, all components) with `(sin h/r)² + h_r²` at `samples` random
/// points with `r ∈ [0.02, 0.98]`.
pub fn check_reduction_identity<T: Scalar>(
    h: &Profile<T>,
    samples: usize,
    stencil: T,
    rng_seed: u64,
) -> ReductionCheck<T> {
    let field = MagnetizationField::new(h);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut max_error = T::zero();
    let mut max_density = T::zero();
    let two_s = stencil + stencil;
    for _ in 0..samples {
        let r = T::lit(rng.gen_range(0.02..0.98));
        let theta = T::lit(rng.gen_range(0.0..std::f64::consts::TAU));
        let (x, y) = (r * theta.cos(), r * theta.sin());
        let m = |a: T, b: T| field.at(a, b).expect("stencil stays inside the disk");
        let (xp, xm) = (m(x + stencil, y), m(x - stencil, y));
        let (yp, ym) = (m(x, y + stencil), m(x, y - stencil));
        let mut fd = T::zero();
        for c in 0..3 {
            let dx = (xp[c] - xm[c]) / two_s;
            let dy = (yp[c] - ym[c]) / two_s;
            fd = fd + dx * dx + dy * dy;
        }
        let rr = (x * x + y * y).sqrt();
        let (hv, hr) = field.profile_at(rr);
        let s = hv.sin() / rr;
        let exact = s * s + hr * hr;
        max_error = max_error.max((fd - exact).abs());
        max_density = max_density.max(exact);
    }
    ReductionCheck {
        max_error,
        max_density,
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<RadialGrid<f64>> {
        Arc::new(RadialGrid::new(n, 2.0).unwrap())
    }

    #[test]
    fn zero_profile_gives_zero_fields() {
        let h = Profile::zeros(grid(64));
        let w = reconstruct_w(&h, 1.5);
        assert!(w.values().iter().all(|&v| v == 0.0));
        assert_eq!(magnetization_at(&h, 0.3, -0.4).unwrap(), [0.0, 0.0, 1.0]);
        let c = check_reduction_identity(&h, 20, 1e-4, 1);
        assert_eq!(c.max_error, 0.0);
    }

    #[test]
    fn displacement_boundary_conditions() {
        let g = grid(512);
        let h = Profile::from_fn(g, |r| 0.8 * (std::f64::consts::FRAC_PI_2 * r).sin()).unwrap();
        let w = reconstruct_w(&h, 2.0);
        assert_eq!(*w.values().last().unwrap(), 0.0);
        let c = check_displacement(&h, &w);
        assert!(c.passes(), "{c:?}");
    }

    #[test]
    fn magnetization_outside_disk() {
        let h = Profile::zeros(grid(16));
        assert!(magnetization_at(&h, 0.8, 0.7).is_err());
        assert!(magnetization_at(&h, f64::NAN, 0.0).is_err());
        assert!(magnetization_at(&h, 1.0, 0.0).is_ok());
    }

    #[test]
    fn origin_points_up() {
        let h = Profile::from_fn(grid(32), |r| r).unwrap();
        assert_eq!(magnetization_at(&h, 0.0, 0.0).unwrap(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn pchip_reproduces_nodes_and_stays_monotone() {
        let x = [0.0f64, 0.1, 0.5, 0.6, 1.0];
        let y = [0.0f64, 0.0, 1.0, 1.0, 1.5];
        let p = Pchip::new(&x, &y);
        for (&a, &b) in x.iter().zip(&y) {
            assert!((p.eval(a) - b).abs() < 1e-15);
        }
        let mut prev = p.eval(0.0);
        for i in 1..=1000 {
            let v = p.eval(i as f64 / 1000.0);
            assert!(v >= prev - 1e-15);
            assert!((0.0..=1.5).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn pchip_derivative_matches_difference() {
        let x: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        let p = Pchip::new(&x, &y);
        let t = 0.433;
        let e = 1e-6;
        let fd = (p.eval(t + e) - p.eval(t - e)) / (2.0 * e);
        assert!((p.eval_with_derivative(t).1 - fd).abs() < 1e-8);
    }

    #[test]
    fn rotation_equivariance() {
        let h = Profile::from_fn(grid(256), |r| 1.2 * r * (1.0 - 0.3 * r)).unwrap();
        let f = MagnetizationField::new(&h);
        let (x, y) = (0.31, -0.52);
        for th in [0.3f64, 1.7, 4.0] {
            let (c, s) = (th.cos(), th.sin());
            let m = f.at(x, y).unwrap();
            let mr = f.at(c * x - s * y, s * x + c * y).unwrap();
            assert!((mr[0] - (c * m[0] - s * m[1])).abs() < 1e-12);
            assert!((mr[1] - (s * m[0] + c * m[1])).abs() < 1e-12);
            assert!((mr[2] - m[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn coupled_energy_matches_reduced() {
        let g = grid(1024);
        let p = ModelParams::from_mu(2.0).unwrap();
        let h = Profile::from_fn(g, |r| 0.6 * (std::f64::consts::FRAC_PI_2 * r).sin()).unwrap();
        let w = reconstruct_w(&h, coupling_lambda(&p));
        let e = crate::operators::energy(&h, &p);
        let c = coupled_energy(&h, &w);
        assert!((e - c).abs() < 1e-5, "{e} vs {c}");
    }
}
