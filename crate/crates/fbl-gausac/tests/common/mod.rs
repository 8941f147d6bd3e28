//! Shared oracles and statistical helpers for the integration suites.
//!
//! Everything here reaches its target quantity by an independent route —
//! a different library (statrs), a different quadrature rule, or a
//! different search algorithm — so agreement with the crate is evidence,
//! not tautology.
#![allow(dead_code)] // each test target uses its own subset

use statrs::distribution::{Beta, ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

/// Standard normal upper tail via statrs, as `Φ(−x)` so deep tails keep
/// full precision instead of cancelling against 1.
pub fn oracle_q(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(-x)
}

/// Standard normal upper-tail quantile via statrs: `Q(oracle_q_inv(p)) = p`.
pub fn oracle_q_inv(p: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(1.0 - p)
}

/// CDF of the normalized sphere coordinate `T = √n · x₁ / ‖x‖` through
/// the Beta law `T²/n ~ Beta(1/2, (n−1)/2)`, using statrs' incomplete
/// beta rather than the crate's.
pub fn oracle_sphere_coord_cdf(t: f64, n: usize) -> f64 {
    let root_n = (n as f64).sqrt();
    if t <= -root_n {
        return 0.0;
    }
    if t >= root_n {
        return 1.0;
    }
    let beta = Beta::new(0.5, (n as f64 - 1.0) / 2.0).unwrap();
    let half_mass = 0.5 * beta.cdf(t * t / n as f64);
    if t >= 0.0 {
        0.5 + half_mass
    } else {
        0.5 - half_mass
    }
}

/// Density of the normalized sphere coordinate,
/// `Γ(n/2) / (√(nπ) Γ((n−1)/2)) · (1 − t²/n)^{(n−3)/2}`,
/// built on statrs' log-gamma.
pub fn oracle_sphere_coord_pdf(t: f64, n: usize) -> f64 {
    let nf = n as f64;
    if t * t >= nf {
        return 0.0;
    }
    let ln_c = ln_gamma(nf / 2.0) - ln_gamma((nf - 1.0) / 2.0) - 0.5 * (nf * std::f64::consts::PI).ln();
    (ln_c + (nf - 3.0) / 2.0 * (1.0 - t * t / nf).ln()).exp()
}

/// Composite trapezoid rule — deliberately a different quadrature family
/// than the crate's Simpson panels.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 1 && b > a);
    let h = (b - a) / panels as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..panels {
        sum += f(a + i as f64 * h);
    }
    sum * h
}

/// Total variation between two 1-d Gaussian densities by quadrature:
/// `½∫|φ₁ − φ₂|` over ±12 combined standard deviations.
pub fn oracle_tv_normal_1d(mu1: f64, var1: f64, mu2: f64, var2: f64) -> f64 {
    let (s1, s2) = (var1.sqrt(), var2.sqrt());
    let lo = (mu1 - 12.0 * s1).min(mu2 - 12.0 * s2);
    let hi = (mu1 + 12.0 * s1).max(mu2 + 12.0 * s2);
    let pdf = |x: f64, mu: f64, s: f64| {
        (-((x - mu) / s).powi(2) / 2.0).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    };
    0.5 * trapezoid(
        |x| (pdf(x, mu1, s1) - pdf(x, mu2, s2)).abs(),
        lo,
        hi,
        200_000,
    )
}

/// Total variation between the normalized sphere-coordinate law and the
/// standard normal, by trapezoid quadrature on the density difference
/// plus the normal mass outside the sphere's support.
pub fn oracle_tv_sphere_vs_normal(n: usize) -> f64 {
    let root_n = (n as f64).sqrt();
    let phi = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let inner = 0.5
        * trapezoid(
            |t| (oracle_sphere_coord_pdf(t, n) - phi(t)).abs(),
            -root_n,
            root_n,
            400_000,
        );
    inner + oracle_q(root_n)
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` (any order)
/// against a continuous CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let count = samples.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        ks = ks
            .max((f - i as f64 / count).abs())
            .max(((i + 1) as f64 / count - f).abs());
    }
    ks
}

/// Asymptotic two-sided KS critical value at significance `alpha`
/// (`c(α)/√N` with `c(α) = √(−ln(α/2)/2)`; 1.628 at α = 0.01).
pub fn ks_critical(samples: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (samples as f64).sqrt()
}

/// Earliest blocklength at which `k` symmetric users reach `target`
/// nats each, by plain linear scan from `n = 2` — an intentionally
/// different search than the crate's doubling/bisection — using the
/// statrs quantile rather than the crate's.
pub fn oracle_earliest_time(k: usize, p: f64, eps: f64, c0: f64, target: f64) -> u64 {
    let mut n = 2u64;
    loop {
        if oracle_symmetric_logm(n, k, p, eps, c0) >= target {
            return n;
        }
        n += 1;
        assert!(n < 1 << 22, "oracle scan ran away");
    }
}

/// The symmetric per-user rate expansion recomputed from scratch:
/// `[n·C(kP) − √(n(V(kP) + V_cr(k, P)))·Q⁻¹(ε) + ½ln n + c₀] / k`.
pub fn oracle_symmetric_logm(n: u64, k: usize, p: f64, eps: f64, c0: f64) -> f64 {
    let kf = k as f64;
    let kp = kf * p;
    let c = 0.5 * kp.ln_1p();
    let v = kp * (kp + 2.0) / (2.0 * (1.0 + kp) * (1.0 + kp))
        + kf * (kf - 1.0) * p * p / (2.0 * (1.0 + kp) * (1.0 + kp));
    let nf = n as f64;
    (nf * c - (nf * v).sqrt() * oracle_q_inv(eps) + 0.5 * nf.ln() + c0) / kf
}

/// Wilson score interval recomputed from first principles with the
/// statrs quantile.
pub fn oracle_wilson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    let z = oracle_q_inv((1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
