//! Quadrature of `integral r theta dmu` for the Husimi distribution of a number
//! state, with `r = |alpha|^2` (so that the radial first moment is `N + I`)
//! and `theta = arg alpha` in `[0, 2 pi)`.
//!
//! The quadrature reproduces `(n + 1) pi`, the diagonal of the symmetrized
//! product of the first-moment operators. The value `n! pi` agrees with it
//! only at `n = 0`.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

/// Husimi density of `|n>` with respect to `d^2 alpha`.
fn husimi(n: u32, rho: f64) -> f64 {
    let r = rho * rho;
    if r == 0.0 {
        return if n == 0 { 1.0 / PI } else { 0.0 };
    }
    (-r + f64::from(n) * r.ln() - ln_gamma(f64::from(n) + 1.0)).exp() / PI
}

/// Composite Simpson on `[0, 12]`.
fn radial(f: impl Fn(f64) -> f64) -> f64 {
    let (rho_max, steps) = (12.0, 6000);
    let h = rho_max / steps as f64;
    let mut sum = 0.0;
    for k in 0..=steps {
        let w = if k == 0 || k == steps { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(k as f64 * h);
    }
    sum * h / 3.0
}

/// Simpson in `rho` and midpoint rule in `theta`.
fn r_theta_moment(n: u32) -> f64 {
    let n_theta = 64;
    let radial = radial(|rho| husimi(n, rho) * rho.powi(3));
    let dt = 2.0 * PI / n_theta as f64;
    let angular: f64 = (0..n_theta).map(|j| (j as f64 + 0.5) * dt * dt).sum();
    radial * angular
}

#[test]
fn husimi_normalization() {
    for n in 0..6 {
        let total = 2.0 * PI * radial(|rho| husimi(n, rho) * rho);
        assert!((total - 1.0).abs() < 1e-8, "n = {n}: {total}");
    }
}

#[test]
fn r_theta_moment_is_n_plus_one_pi() {
    for n in 0..8u32 {
        let value = r_theta_moment(n);
        let factorial_claim = (1..=n).map(f64::from).product::<f64>() * PI;
        println!("n = {n}: quadrature {value:.10}, (n+1) pi {:.10}, n! pi {factorial_claim:.10}", (n + 1) as f64 * PI);
        assert!((value - f64::from(n + 1) * PI).abs() < 1e-8, "n = {n}: {value}");
        if n >= 1 {
            assert!((value - factorial_claim).abs() > 0.5);
        }
    }
}
