//! Shared helpers for the integration tests: an independent adaptive
//! quadrature oracle and assertion utilities.
//!
//! The oracles here deliberately avoid the code paths of the library they
//! check: tails are integrated from the raw densities with adaptive
//! Simpson quadrature instead of using `erfc`-based closed forms.

#![allow(dead_code)]

/// Standard normal density.
pub fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn simpson(a: f64, fa: f64, fm: f64, b: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, fa, flm, m, fm);
    let right = simpson(m, fm, frm, b, fb);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= 15.0 * tol {
        return refined + (refined - whole) / 15.0;
    }
    adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

fn adaptive_simpson_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fb = f(b);
    let fm = f(m);
    let whole = simpson(a, fa, fm, b, fb);
    adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute
/// tolerance `tol`. The interval is pre-split into panels no wider than
/// `max_panel` so a smooth stretch far from the mass cannot fool the
/// error estimate into stopping early.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, max_panel: f64, tol: f64) -> f64 {
    assert!(b >= a && max_panel > 0.0);
    if a == b {
        return 0.0;
    }
    let panels = ((b - a) / max_panel).ceil() as usize;
    let width = (b - a) / panels as f64;
    let per_panel_tol = tol / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * width;
            let hi = if k + 1 == panels { b } else { lo + width };
            adaptive_simpson_panel(&f, lo, hi, per_panel_tol)
        })
        .sum()
}

/// Beyond this many standard deviations the normal mass is far below
/// every tolerance in use.
const Z_MAX: f64 = 40.0;

/// P(M > t) for lognormal M, integrated from the density.
pub fn lognormal_survival_oracle(mu: f64, sigma: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let z_t = (t.ln() - mu) / sigma;
    if z_t >= Z_MAX {
        return 0.0;
    }
    adaptive_simpson(phi, z_t, Z_MAX, 1.0, 1e-13)
}

/// E[M; M > t] for lognormal M, integrated from the density.
pub fn lognormal_tail_mean_oracle(mu: f64, sigma: f64, t: f64) -> f64 {
    let z_t = if t <= 0.0 {
        -Z_MAX
    } else {
        ((t.ln() - mu) / sigma).max(-Z_MAX)
    };
    if z_t >= Z_MAX {
        return 0.0;
    }
    let mean = (mu + 0.5 * sigma * sigma).exp();
    // Integrand e^{mu + sigma z} phi(z), normalized by the mean so the
    // quadrature tolerance is relative to the full integral's scale.
    let f = |z: f64| (mu + sigma * z).exp() * phi(z) / mean;
    mean * adaptive_simpson(f, z_t, Z_MAX, 1.0, 1e-13)
}

/// E[M] for a positive variable via the layer-cake identity
/// `E[M] = integral of P(M > t) dt`, survival supplied by the caller.
/// `upper` must sit beyond all relevant mass.
pub fn layer_cake_mean(survival: impl Fn(f64) -> f64, upper: f64) -> f64 {
    adaptive_simpson(survival, 0.0, upper, upper / 64.0, 1e-12 * upper)
}

pub fn assert_rel(actual: f64, expected: f64, tol: f64, label: &str) {
    let scale = expected.abs().max(f64::MIN_POSITIVE);
    assert!(
        (actual - expected).abs() <= tol * scale,
        "{label}: got {actual}, want {expected} (rel err {:.3e} > {tol:.3e})",
        (actual - expected).abs() / scale
    );
}

pub fn assert_abs(actual: f64, expected: f64, tol: f64, label: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{label}: got {actual}, want {expected} (abs err {:.3e} > {tol:.3e})",
        (actual - expected).abs()
    );
}
