//! Normal-approximation rate region for K transmitters: Monte Carlo
//! membership tests against the multivariate Gaussian orthant condition,
//! the closed-form symmetric expansion, the minimum start time of the
//! activity gate, and total-variation bounds used to justify replacing
//! spherical codeword statistics with Gaussian ones.
//!
//! A message-size vector `(ln M₁, …, ln M_K)` is declared achievable at
//! blocklength `n` and error `ε` when
//!
//! ```text
//! P[ Z_𝒮 ≤ z_𝒮 for every nonempty 𝒮 ] ≥ 1 − ε,
//! z_𝒮 = (n C(P_⟨𝒮⟩) + ½ ln n + c₀ − Σ_{i∈𝒮} ln Mᵢ) / √n,
//! ```
//!
//! with `Z ~ N(0, V)` for the subset dispersion matrix `V`. The orthant
//! probability has no closed form for K ≥ 2, so membership is estimated by
//! Monte Carlo with a Wilson confidence interval and an explicit
//! "uncertain" verdict when the target sits inside the interval.

use crate::dispersion::{
    capacity, cross_dispersion, dispersion_matrix, dispersion_v, kappa1, PowerAllocation,
    SubsetIndex, MAX_USERS,
};
use crate::error::{Error, Result};
use crate::linalg::factor_covariance;
use crate::rng::unit_rng;
use crate::specfun::gaussian_q_inv;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default confidence level for Monte Carlo intervals.
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Samples drawn per deterministic work unit in Monte Carlo loops. Chunk
/// boundaries are part of the output contract: estimates are bit-identical
/// for any worker count because every chunk owns a derived RNG stream.
const CHUNK: u64 = 1 << 16;

/// A point estimate with a symmetric confidence interval.
///
/// `point ± half_width` covers the underlying interval (Wilson for
/// binomial proportions, normal-theory for sample means) at the stated
/// confidence level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub point: f64,
    pub half_width: f64,
    pub confidence: f64,
    pub samples: u64,
}

impl EstimateWithCI {
    /// Wilson score interval for `successes` out of `trials`.
    pub fn from_binomial(successes: u64, trials: u64, confidence: f64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Size("from_binomial: zero trials".into()));
        }
        if successes > trials {
            return Err(Error::Size(format!(
                "from_binomial: {successes} successes out of {trials} trials"
            )));
        }
        let z = confidence_z(confidence)?;
        let n = trials as f64;
        let p_hat = successes as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p_hat + z2 / (2.0 * n)) / denom;
        let spread = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        let lo = (center - spread).max(0.0);
        let hi = (center + spread).min(1.0);
        Ok(Self {
            point: p_hat,
            half_width: (p_hat - lo).max(hi - p_hat),
            confidence,
            samples: trials,
        })
    }

    /// Normal-theory interval for a sample mean, given the unbiased sample
    /// variance of the individual observations.
    pub fn from_mean(mean: f64, sample_variance: f64, samples: u64, confidence: f64) -> Result<Self> {
        if samples < 2 {
            return Err(Error::Size("from_mean: need at least two samples".into()));
        }
        if sample_variance.is_nan() || sample_variance < 0.0 {
            return Err(Error::Domain(format!(
                "from_mean: negative sample variance {sample_variance}"
            )));
        }
        let z = confidence_z(confidence)?;
        Ok(Self {
            point: mean,
            half_width: z * (sample_variance / samples as f64).sqrt(),
            confidence,
            samples,
        })
    }

    pub fn lower(&self) -> f64 {
        self.point - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.point + self.half_width
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("EstimateWithCI serializes infallibly")
    }
}

/// Normal quantile for a two-sided confidence level.
fn confidence_z(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Domain(format!(
            "confidence level {confidence} outside (0, 1)"
        )));
    }
    gaussian_q_inv((1.0 - confidence) / 2.0)
}

/// Outcome of a Monte Carlo membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// The confidence interval lies entirely at or above the target.
    Achievable,
    /// The confidence interval lies entirely below the target.
    NotAchievable,
    /// The target sits inside the confidence interval; more samples would
    /// be needed to resolve the comparison.
    Uncertain,
}

impl Verdict {
    /// Compare an estimated probability against `target = 1 − ε`.
    pub fn from_estimate(est: &EstimateWithCI, target: f64) -> Self {
        if est.lower() >= target {
            Verdict::Achievable
        } else if est.upper() < target {
            Verdict::NotAchievable
        } else {
            Verdict::Uncertain
        }
    }
}

/// Per-user message sizes `ln Mᵢ` (nats) under test for membership.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTuple {
    log_m: Vec<f64>,
}

impl RateTuple {
    /// From per-user `ln Mᵢ` values; each must be finite and nonnegative.
    pub fn from_per_user_log_m(log_m: Vec<f64>) -> Result<Self> {
        if log_m.is_empty() {
            return Err(Error::Size("RateTuple: at least one user".into()));
        }
        if log_m.len() > MAX_USERS {
            return Err(Error::Size(format!(
                "RateTuple: {} users exceeds the cap of {MAX_USERS}",
                log_m.len()
            )));
        }
        if let Some(x) = log_m.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::Domain(format!(
                "RateTuple: ln M = {x} must be finite and nonnegative"
            )));
        }
        Ok(Self { log_m })
    }

    /// Equal `ln M` for each of `k` users.
    pub fn symmetric(k: usize, log_m: f64) -> Result<Self> {
        Self::from_per_user_log_m(vec![log_m; k])
    }

    pub fn k(&self) -> usize {
        self.log_m.len()
    }

    pub fn log_m(&self) -> &[f64] {
        &self.log_m
    }

    /// `Σ_{i∈𝒮} ln Mᵢ`.
    pub fn subset_sum(&self, s: SubsetIndex) -> f64 {
        self.log_m
            .iter()
            .enumerate()
            .filter(|(i, _)| s.contains(*i))
            .map(|(_, &x)| x)
            .sum()
    }
}

/// Draw `count` samples of `N(0, Σ)` for a `dim × dim` covariance `Σ`,
/// returned as a row-major `count × dim` matrix.
pub fn mvn_sample(
    cov: &[f64],
    dim: usize,
    count: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Vec<f64>> {
    let l = factor_covariance(cov, dim)?;
    let mut out = vec![0.0; count * dim];
    let mut z = vec![0.0; dim];
    for row in 0..count {
        mvn_sample_into(&l, dim, rng, &mut z, &mut out[row * dim..(row + 1) * dim]);
    }
    Ok(out)
}

/// One sample `x = L z` with `z` i.i.d. standard normal, written into `x`.
fn mvn_sample_into(
    l: &[f64],
    dim: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
    z: &mut [f64],
    x: &mut [f64],
) {
    for zi in z.iter_mut() {
        *zi = StandardNormal.sample(rng);
    }
    for i in 0..dim {
        let mut s = 0.0;
        for k in 0..=i {
            s += l[i * dim + k] * z[k];
        }
        x[i] = s;
    }
}

/// Monte Carlo estimate of the lower-orthant probability
/// `P[Zᵢ ≤ zᵢ for all i]` for `Z ~ N(0, Σ)`.
///
/// Work is split into fixed-size chunks, each with an RNG stream derived
/// from `(seed, chunk index)`, so the estimate is identical for any worker
/// count.
pub fn lower_orthant_prob(
    cov: &[f64],
    dim: usize,
    z: &[f64],
    samples: u64,
    seed: u64,
    confidence: f64,
) -> Result<EstimateWithCI> {
    if z.len() != dim {
        return Err(Error::Size(format!(
            "lower_orthant_prob: threshold length {} ≠ dimension {dim}",
            z.len()
        )));
    }
    if samples == 0 {
        return Err(Error::Size("lower_orthant_prob: zero samples".into()));
    }
    let l = factor_covariance(cov, dim)?;
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = unit_rng(seed, c);
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(samples);
            let mut zbuf = vec![0.0; dim];
            let mut x = vec![0.0; dim];
            let mut count = 0u64;
            for _ in lo..hi {
                mvn_sample_into(&l, dim, &mut rng, &mut zbuf, &mut x);
                if x.iter().zip(z).all(|(xi, zi)| xi <= zi) {
                    count += 1;
                }
            }
            count
        })
        .sum();
    EstimateWithCI::from_binomial(hits, samples, confidence)
}

/// Result of a rate-tuple membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCheck {
    pub verdict: Verdict,
    /// Estimated orthant probability, to compare against `1 − ε`.
    pub probability: EstimateWithCI,
    /// Per-subset thresholds `z_𝒮` in increasing bitmask order.
    pub thresholds: Vec<f64>,
}

/// Monte Carlo membership test of a rate tuple in the normal-approximation
/// region at blocklength `n`, error budget `eps`, and third-order constant
/// `c0`.
#[allow(clippy::too_many_arguments)] // every knob is independently meaningful
pub fn rate_tuple_achievable(
    pa: &PowerAllocation,
    n: u64,
    rates: &RateTuple,
    eps: f64,
    c0: f64,
    samples: u64,
    seed: u64,
    confidence: f64,
) -> Result<RegionCheck> {
    if rates.k() != pa.k() {
        return Err(Error::Size(format!(
            "rate_tuple_achievable: {} rates for {} users",
            rates.k(),
            pa.k()
        )));
    }
    if n == 0 {
        return Err(Error::Domain("rate_tuple_achievable: n ≥ 1 required".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!(
            "rate_tuple_achievable: eps = {eps} outside (0, 1)"
        )));
    }
    let k = pa.k();
    let nf = n as f64;
    let sqrt_n = nf.sqrt();
    let third_order = 0.5 * nf.ln() + c0;
    let thresholds: Vec<f64> = SubsetIndex::all(k)
        .map(|s| {
            let c = capacity(pa.subset_power(s))?;
            Ok((nf * c + third_order - rates.subset_sum(s)) / sqrt_n)
        })
        .collect::<Result<Vec<_>>>()?;
    let v = dispersion_matrix(pa)?;
    let probability = lower_orthant_prob(v.dense(), v.dim(), &thresholds, samples, seed, confidence)?;
    Ok(RegionCheck {
        verdict: Verdict::from_estimate(&probability, 1.0 - eps),
        probability,
        thresholds,
    })
}

/// Closed-form symmetric per-user message size (nats): the largest `ln M`
/// such that `k` equal-power, equal-rate users meet the sum constraint of
/// the normal approximation,
///
/// ```text
/// ln M = (1/k) [ n C(kP) − √(n (V(kP) + V_cr(k, P))) Q⁻¹(ε) + ½ ln n + c₀ ].
/// ```
///
/// The sum-rate constraint is the binding one at the symmetric point: every
/// strict-subset constraint holds with slack that grows linearly in `n` by
/// strict concavity of `C`.
pub fn achievable_logm_symmetric(n: u64, k: usize, p: f64, eps: f64, c0: f64) -> Result<f64> {
    if n == 0 || k == 0 {
        return Err(Error::Domain(
            "achievable_logm_symmetric: n ≥ 1 and k ≥ 1 required".into(),
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!(
            "achievable_logm_symmetric: eps = {eps} outside (0, 1)"
        )));
    }
    let nf = n as f64;
    let kf = k as f64;
    let kp = kf * p;
    let var = dispersion_v(kp)? + cross_dispersion(k, p)?;
    let q_inv = gaussian_q_inv(eps)?;
    Ok((nf * capacity(kp)? - (nf * var).sqrt() * q_inv + 0.5 * nf.ln() + c0) / kf)
}

/// Start time and width of the transmitter-activity gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateStart {
    /// Smallest admissible first decode time `n₀`.
    pub n0: u64,
    /// Gate half-width `λ₀ = √(8 ln(2κ₁(P)/ε₀) / n₀)` at that time.
    pub lambda0: f64,
}

/// Minimum first decode time `n₀` given the final-constraint time `n₁`.
///
/// Two floors apply: `n₀ ≥ ⌈4(1+P²)/P² · ln n₁⌉` keeps the silence test
/// reliable against the later decode times, and `n₀ > 8 ln(2κ₁(P)/ε₀)`
/// keeps the gate width `λ₀` below 1 so the gate interval stays inside the
/// positive axis.
pub fn min_n0(n1: u64, p: f64, eps0: f64) -> Result<GateStart> {
    if n1 < 2 {
        return Err(Error::Schedule(format!(
            "min_n0: final-constraint time n₁ = {n1} too small"
        )));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("min_n0: P = {p} must be positive")));
    }
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::Domain(format!(
            "min_n0: eps0 = {eps0} outside (0, 1)"
        )));
    }
    let silence_floor = (4.0 * (1.0 + p * p) / (p * p) * (n1 as f64).ln()).ceil() as u64;
    // κ₁ ≥ 27√(π/8)/√2 > 2 for every P, so the log is always positive.
    let gate_arg = 8.0 * (2.0 * kappa1(p)? / eps0).ln();
    let width_floor = gate_arg.floor() as u64 + 1;
    let n0 = silence_floor.max(width_floor).max(2);
    let lambda0 = (gate_arg / n0 as f64).sqrt();
    debug_assert!(lambda0 < 1.0);
    Ok(GateStart { n0, lambda0 })
}

// ---- total-variation bounds --------------------------------------------

/// Upper bound on the total variation distance between `N(µ₁, Σ₁)` and
/// `N(µ₂, Σ₂)`:
///
/// ```text
/// TV ≤ (2 + √6)/4 · ‖Σ₁^{−1/2} Σ₂ Σ₁^{−1/2} − I‖_F + ½ √((µ₁−µ₂)ᵀ Σ₁⁻¹ (µ₁−µ₂)).
/// ```
pub fn tv_gaussian_bound(
    mu1: &[f64],
    cov1: &[f64],
    mu2: &[f64],
    cov2: &[f64],
    dim: usize,
) -> Result<f64> {
    if mu1.len() != dim || mu2.len() != dim || cov1.len() != dim * dim || cov2.len() != dim * dim {
        return Err(Error::Size("tv_gaussian_bound: dimension mismatch".into()));
    }
    let inv_sqrt = crate::linalg::sym_inv_sqrt(cov1, dim)?;
    let mut m = crate::linalg::mat_mul(
        &crate::linalg::mat_mul(&inv_sqrt, cov2, dim),
        &inv_sqrt,
        dim,
    );
    for i in 0..dim {
        m[i * dim + i] -= 1.0;
    }
    let shape_term = (2.0 + 6f64.sqrt()) / 4.0 * crate::linalg::frobenius(&m);
    let dmu: Vec<f64> = mu1.iter().zip(mu2).map(|(a, b)| a - b).collect();
    let solved = crate::linalg::solve_spd(cov1, dim, &dmu)?;
    let quad: f64 = dmu.iter().zip(&solved).map(|(a, b)| a * b).sum();
    Ok(shape_term + 0.5 * quad.max(0.0).sqrt())
}

/// Total variation between the joint law of `k` coordinates of a uniform
/// point on the radius-`√n` sphere and `k` i.i.d. standard normals:
///
/// ```text
/// TV ≤ 2 [ (n / (n − k − 2))^{k/2} − 1 ],
/// ```
///
/// which is at most `8/n` for `k = 1` and `n ≥ 6`.
pub fn stam_bound(n: u64, k: usize) -> Result<f64> {
    if n as usize <= k + 2 {
        return Err(Error::Domain(format!(
            "stam_bound: need n > k + 2, got n = {n}, k = {k}"
        )));
    }
    let nf = n as f64;
    let ratio = nf / (nf - k as f64 - 2.0);
    Ok(2.0 * (ratio.powf(k as f64 / 2.0) - 1.0))
}

/// Exact total variation between two one-dimensional normals, via the
/// crossing points of their densities (no quadrature).
pub fn tv_normal_1d(mu1: f64, sigma1: f64, mu2: f64, sigma2: f64) -> Result<f64> {
    if !(sigma1 > 0.0 && sigma2 > 0.0) {
        return Err(Error::Domain(
            "tv_normal_1d: standard deviations must be positive".into(),
        ));
    }
    if mu1 == mu2 && sigma1 == sigma2 {
        return Ok(0.0);
    }
    let q = crate::specfun::gaussian_q;
    // F₁ − F₂ evaluated stably through the Q function
    let diff = |x: f64| -> Result<f64> {
        Ok(q((x - mu2) / sigma2)? - q((x - mu1) / sigma1)?)
    };
    // density crossings: ln φ₁ = ln φ₂ is a quadratic a x² + b x + c = 0
    let a = 0.5 / (sigma2 * sigma2) - 0.5 / (sigma1 * sigma1);
    let b = mu1 / (sigma1 * sigma1) - mu2 / (sigma2 * sigma2);
    let c = 0.5 * (mu2 * mu2) / (sigma2 * sigma2) - 0.5 * (mu1 * mu1) / (sigma1 * sigma1)
        + (sigma2 / sigma1).ln();
    let mut crossings: Vec<f64> = if a.abs() < 1e-300 {
        // equal variances: single crossing
        vec![-c / b]
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            // one density dominates everywhere except a tangency point
            vec![]
        } else {
            let r = disc.sqrt();
            // numerically stable quadratic roots
            let q_root = -0.5 * (b + b.signum() * r);
            let mut roots = vec![q_root / a, c / q_root];
            roots.sort_by(f64::total_cmp);
            roots
        }
    };
    crossings.retain(|x| x.is_finite());
    // ∫|φ₁−φ₂| = Σ |Δ(F₁−F₂)| over the intervals cut by the crossings;
    // F₁−F₂ vanishes at ±∞.
    let mut total = 0.0;
    let mut prev = 0.0;
    for &x in &crossings {
        let d = diff(x)?;
        total += (d - prev).abs();
        prev = d;
    }
    total += prev.abs();
    Ok(0.5 * total)
}

/// Numerical total variation between a single sphere coordinate (radius
/// `√n`) and a standard normal, by composite Simpson quadrature on
/// `[−√n, √n]` plus the exact normal tail mass outside the support.
pub fn tv_sphere_vs_normal(n: u64) -> Result<f64> {
    use crate::specfun::{gaussian_pdf, gaussian_q, sphere_coord_pdf};
    if n < 3 {
        return Err(Error::Domain("tv_sphere_vs_normal: n ≥ 3 required".into()));
    }
    let limit = (n as f64).sqrt();
    // enough panels that the |·| kinks cost less than the bound's slack
    let panels = 1usize << 14;
    let h = 2.0 * limit / panels as f64;
    let f =
        |x: f64| -> Result<f64> { Ok((sphere_coord_pdf(x, n as usize)? - gaussian_pdf(x)).abs()) };
    let mut sum = f(-limit)? + f(limit)?;
    for i in 1..panels {
        let x = -limit + i as f64 * h;
        sum += f(x)? * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let integral = sum * h / 3.0;
    Ok(0.5 * (integral + 2.0 * gaussian_q(limit)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wilson_interval_symmetric_case() {
        let e = EstimateWithCI::from_binomial(50, 100, 0.95).unwrap();
        assert_eq!(e.point, 0.5);
        assert!(e.half_width > 0.09 && e.half_width < 0.11);
        assert_eq!(e.samples, 100);
        // extremes: point is the raw proportion, and the symmetric cover
        // still has positive width (the Wilson interval is one-sided there)
        let zero = EstimateWithCI::from_binomial(0, 50, 0.95).unwrap();
        assert_eq!(zero.point, 0.0);
        assert!(zero.half_width > 0.0 && zero.half_width < 0.1);
        let all = EstimateWithCI::from_binomial(50, 50, 0.95).unwrap();
        assert_eq!(all.point, 1.0);
        assert!(all.half_width > 0.0 && all.half_width < 0.1);
    }

    #[test]
    fn binomial_guards() {
        assert!(EstimateWithCI::from_binomial(1, 0, 0.95).is_err());
        assert!(EstimateWithCI::from_binomial(5, 4, 0.95).is_err());
        assert!(EstimateWithCI::from_binomial(1, 2, 1.5).is_err());
    }

    #[test]
    fn mean_interval() {
        let e = EstimateWithCI::from_mean(2.0, 4.0, 400, 0.95).unwrap();
        // z · √(4/400) = 1.96 · 0.1
        assert_abs_diff_eq!(e.half_width, 0.195_996_398_454, epsilon = 1e-9);
    }

    #[test]
    fn verdict_thresholds() {
        let est = EstimateWithCI {
            point: 0.95,
            half_width: 0.01,
            confidence: 0.95,
            samples: 1000,
        };
        assert_eq!(Verdict::from_estimate(&est, 0.90), Verdict::Achievable);
        assert_eq!(Verdict::from_estimate(&est, 0.97), Verdict::NotAchievable);
        assert_eq!(Verdict::from_estimate(&est, 0.95), Verdict::Uncertain);
        assert_eq!(Verdict::from_estimate(&est, 0.94), Verdict::Achievable);
    }

    #[test]
    fn estimate_json_round_trip() {
        let e = EstimateWithCI::from_binomial(3, 10, 0.95).unwrap();
        let v = e.to_json();
        let back: EstimateWithCI = serde_json::from_value(v).unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn rate_tuple_subset_sums() {
        let r = RateTuple::from_per_user_log_m(vec![1.0, 2.0, 4.0]).unwrap();
        let s = SubsetIndex::new(0b101, 3).unwrap();
        assert_eq!(r.subset_sum(s), 5.0);
        assert!(RateTuple::from_per_user_log_m(vec![]).is_err());
        assert!(RateTuple::from_per_user_log_m(vec![-1.0]).is_err());
        assert!(RateTuple::from_per_user_log_m(vec![f64::NAN]).is_err());
    }

    #[test]
    fn mvn_identity_moments() {
        let cov = [1.0, 0.0, 0.0, 1.0];
        let mut rng = unit_rng(7, 0);
        let n = 100_000;
        let xs = mvn_sample(&cov, 2, n, &mut rng).unwrap();
        let mean0: f64 = xs.iter().step_by(2).sum::<f64>() / n as f64;
        let var0: f64 = xs.iter().step_by(2).map(|x| x * x).sum::<f64>() / n as f64;
        assert!(mean0.abs() < 0.02, "mean {mean0}");
        assert!((var0 - 1.0).abs() < 0.03, "var {var0}");
    }

    #[test]
    fn mvn_correlated_moments() {
        let cov = [1.0, 0.8, 0.8, 1.0];
        let mut rng = unit_rng(11, 0);
        let n = 100_000;
        let xs = mvn_sample(&cov, 2, n, &mut rng).unwrap();
        let cross: f64 = xs.chunks_exact(2).map(|p| p[0] * p[1]).sum::<f64>() / n as f64;
        assert!((cross - 0.8).abs() < 0.02, "covariance {cross}");
    }

    #[test]
    fn orthant_quadrant_probability() {
        let cov = [1.0, 0.0, 0.0, 1.0];
        let e = lower_orthant_prob(&cov, 2, &[0.0, 0.0], 200_000, 3, 0.95).unwrap();
        assert!((e.point - 0.25).abs() < 0.005, "got {}", e.point);
        // deterministic for a fixed seed
        let e2 = lower_orthant_prob(&cov, 2, &[0.0, 0.0], 200_000, 3, 0.95).unwrap();
        assert_eq!(e.point, e2.point);
    }

    #[test]
    fn orthant_matches_univariate_quantile() {
        let cov = [1.0];
        // Q⁻¹(0.1) ≈ 1.2816: P[Z ≤ 1.2816] = 0.9
        let z = gaussian_q_inv(0.1).unwrap();
        let e = lower_orthant_prob(&cov, 1, &[z], 400_000, 5, 0.95).unwrap();
        assert!((e.point - 0.9).abs() < 0.003, "got {}", e.point);
    }

    #[test]
    fn membership_interior_and_exterior() {
        let pa = PowerAllocation::symmetric(2, 1.0).unwrap();
        let n = 500;
        // symmetric boundary point, then scale down / up
        let boundary = achievable_logm_symmetric(n, 2, 1.0, 0.1, 0.0).unwrap();
        let deep = RateTuple::symmetric(2, 0.8 * boundary).unwrap();
        let check = rate_tuple_achievable(&pa, n, &deep, 0.1, 0.0, 100_000, 1, 0.95).unwrap();
        assert_eq!(check.verdict, Verdict::Achievable);
        let outside = RateTuple::symmetric(2, 1.2 * boundary).unwrap();
        let check = rate_tuple_achievable(&pa, n, &outside, 0.1, 0.0, 100_000, 1, 0.95).unwrap();
        assert_eq!(check.verdict, Verdict::NotAchievable);
    }

    #[test]
    fn symmetric_expansion_single_user_formula() {
        // compose the same quantities independently of the helper
        let (n, p, eps) = (2000u64, 1.0, 1e-3);
        let nf = n as f64;
        let by_hand = nf * capacity(p).unwrap()
            - (nf * dispersion_v(p).unwrap()).sqrt() * gaussian_q_inv(eps).unwrap()
            + 0.5 * nf.ln();
        let got = achievable_logm_symmetric(n, 1, p, eps, 0.0).unwrap();
        assert_abs_diff_eq!(got, by_hand, epsilon = 1e-9);
        // c₀ shifts by exactly c₀/k
        let shifted = achievable_logm_symmetric(n, 2, p, eps, 3.0).unwrap();
        let base = achievable_logm_symmetric(n, 2, p, eps, 0.0).unwrap();
        assert_abs_diff_eq!(shifted - base, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn gate_start_values() {
        // silence floor binds: 8 ln 22026 ≈ 79.9998 → 80
        let g = min_n0(22026, 1.0, 0.1).unwrap();
        assert_eq!(g.n0, 80);
        assert!((g.lambda0 - 0.772_531_834).abs() < 1e-6);
        assert!(g.lambda0 < 1.0);
        // width floor binds for small n₁: 8 ln(2κ₁(1)/0.1) ≈ 47.74 → 48
        let g = min_n0(50, 1.0, 0.1).unwrap();
        assert_eq!(g.n0, 48);
        assert!(g.lambda0 < 1.0);
        assert!(min_n0(1, 1.0, 0.1).is_err());
        assert!(min_n0(100, -1.0, 0.1).is_err());
        assert!(min_n0(100, 1.0, 0.0).is_err());
    }

    #[test]
    fn tv_bound_zero_at_equal_laws() {
        let mu = [0.0, 0.0];
        let cov = [1.0, 0.3, 0.3, 1.0];
        let tv = tv_gaussian_bound(&mu, &cov, &mu, &cov, 2).unwrap();
        assert!(tv.abs() < 1e-12);
    }

    #[test]
    fn tv_bound_dominates_exact_1d() {
        for (m1, s1, m2, s2) in [
            (0.0, 1.0, 0.5, 1.0),
            (0.0, 1.0, 0.0, 1.3),
            (1.0, 2.0, 0.0, 1.0),
        ] {
            let exact = tv_normal_1d(m1, s1, m2, s2).unwrap();
            let bound =
                tv_gaussian_bound(&[m1], &[s1 * s1], &[m2], &[s2 * s2], 1).unwrap();
            assert!(
                bound >= exact,
                "bound {bound} < exact {exact} for ({m1},{s1}) vs ({m2},{s2})"
            );
            assert!(exact > 0.0 && exact < 1.0);
        }
    }

    #[test]
    fn tv_exact_mean_shift_closed_form() {
        // equal variances: TV = 1 − 2Q(|Δµ|/2σ)
        let tv = tv_normal_1d(0.0, 1.0, 1.0, 1.0).unwrap();
        let expect = 1.0 - 2.0 * crate::specfun::gaussian_q(0.5).unwrap();
        assert_abs_diff_eq!(tv, expect, epsilon = 1e-12);
        // symmetry in the arguments
        let a = tv_normal_1d(0.3, 1.1, -0.2, 0.7).unwrap();
        let b = tv_normal_1d(-0.2, 0.7, 0.3, 1.1).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn stam_bound_values() {
        // 2(√(100/97) − 1)
        assert_abs_diff_eq!(stam_bound(100, 1).unwrap(), 0.030_692_330_267, epsilon = 1e-9);
        assert!(stam_bound(5, 3).is_err());
        for n in [10u64, 50, 100, 1000] {
            assert!(stam_bound(n, 1).unwrap() <= 8.0 / n as f64);
        }
    }

    #[test]
    fn sphere_tv_below_stam_bound() {
        for n in [10u64, 30, 100] {
            let tv = tv_sphere_vs_normal(n).unwrap();
            let bound = stam_bound(n, 1).unwrap();
            assert!(tv < bound, "n = {n}: quadrature {tv} ≥ bound {bound}");
            assert!(tv > 0.0);
        }
    }
}
