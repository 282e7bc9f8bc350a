//! Reference values computed without any of the library's discretization:
//! Bessel power series, bisection and adaptive Simpson quadrature.

/// `J₁(x)` by its power series. Accurate to round-off for `|x| ≲ 10`.
pub fn bessel_j1(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = x / 2.0;
    let mut sum = term;
    for m in 1..80 {
        term *= q / (m as f64 * (m + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `J₁′(x)`, differentiating the series term by term.
pub fn bessel_j1_prime(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    // (x/2)^{2m} / (m! (m+1)!) * (2m+1)/2
    let mut base = 1.0;
    let mut sum = 0.5;
    for m in 1..80 {
        base *= q / (m as f64 * (m + 1) as f64);
        let t = base * (2 * m + 1) as f64 / 2.0;
        sum += t;
        if t.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Root of `f` in `[a, b]` by bisection; `f(a)` and `f(b)` must differ in
/// sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) < 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// First positive zero of `J₁′`, `j′₁,₁ ≈ 1.8412`.
pub fn j1_prime_first_zero() -> f64 {
    bisect(bessel_j1_prime, 1.0, 3.0)
}

/// `(j′₁,₁)²`, the smallest eigenvalue of `−φ″ − φ′/r + φ/r²` with
/// `φ(0) = 0`, `φ′(1) = 0`.
pub fn gamma0() -> f64 {
    let j = j1_prime_first_zero();
    j * j
}

/// `∫_a^b f` by adaptive Simpson with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Normalized first eigenfunction `φ⁰(r) = J₁(j′₁,₁ r) / c` with
/// `∫₀¹ (φ⁰)² r dr = 1`.
#[derive(Debug, Clone, Copy)]
pub struct BesselMode {
    pub k: f64,
    pub scale: f64,
}

impl BesselMode {
    pub fn first() -> Self {
        let k = j1_prime_first_zero();
        let norm2 = adaptive_simpson(
            &|r| {
                let v = bessel_j1(k * r);
                v * v * r
            },
            0.0,
            1.0,
            1e-15,
        );
        Self {
            k,
            scale: 1.0 / norm2.sqrt(),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.scale * bessel_j1(self.k * r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.scale * self.k * bessel_j1_prime(self.k * r)
    }
}

/// `∫₀¹ [−(2/3) φ⁴/r + (16/3) μ φ⁴ r] dr` for the normalized Bessel mode.
pub fn cbar(mu: f64) -> f64 {
    let mode = BesselMode::first();
    adaptive_simpson(
        &|r| {
            if r == 0.0 {
                return 0.0;
            }
            let p4 = mode.eval(r).powi(4);
            -(2.0 / 3.0) * p4 / r + (16.0 / 3.0) * mu * p4 * r
        },
        0.0,
        1.0,
        1e-14,
    )
}

/// `π ∫₀¹ [h′² + (sin h / r)² − (μ/2) sin² 2h] r dr` for smooth `h` with
/// `h(0) = 0`.
pub fn energy(h: &dyn Fn(f64) -> f64, dh: &dyn Fn(f64) -> f64, mu: f64) -> f64 {
    let integrand = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        let v = h(r);
        let s = v.sin() / r;
        let s2 = (2.0 * v).sin();
        (dh(r).powi(2) + s * s - 0.5 * mu * s2 * s2) * r
    };
    std::f64::consts::PI * adaptive_simpson(&integrand, 0.0, 1.0, 1e-13)
}
