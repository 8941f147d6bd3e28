//! Deterministic rate and variance formulas: point-to-point capacity and
//! dispersion, the cross-dispersion of symmetric spherical ensembles, the
//! subset-indexed capacity vector and dispersion matrix for K transmitters,
//! and the analysis constants κ, L, G used by the decode-time bounds.
//!
//! All rates are in nats per channel use; powers are linear SNRs against
//! unit noise variance.

use crate::error::{Error, Result};
use serde_json::{json, Map, Value};
use std::f64::consts::PI;

/// Hard cap on the number of transmitters: subset-indexed structures grow
/// as 4^K, so anything beyond this is outside desk scale.
pub const MAX_USERS: usize = 16;

/// Per-transmitter power budgets `P₁..P_K` (linear SNR units).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    powers: Vec<f64>,
}

impl PowerAllocation {
    /// Validates `K ≥ 1`, `K ≤ 16`, and every `Pᵢ > 0` finite.
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(Error::Size("PowerAllocation: at least one user".into()));
        }
        if powers.len() > MAX_USERS {
            return Err(Error::Size(format!(
                "PowerAllocation: {} users exceeds the cap of {MAX_USERS}",
                powers.len()
            )));
        }
        if let Some(p) = powers.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::Domain(format!(
                "PowerAllocation: power {p} must be positive and finite"
            )));
        }
        Ok(Self { powers })
    }

    /// Equal power `p` for each of `k` users.
    pub fn symmetric(k: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; k])
    }

    /// Number of users K.
    pub fn k(&self) -> usize {
        self.powers.len()
    }

    /// The per-user budgets.
    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    /// `P_⟨𝒮⟩ = Σ_{s∈𝒮} P_s` (0 for the empty mask).
    pub fn subset_power(&self, s: SubsetIndex) -> f64 {
        self.sum_over(s.bits(), |p| p)
    }

    /// `Σ_{s∈𝒮} P_s²` (0 for the empty mask).
    fn subset_power_sq(&self, bits: u32) -> f64 {
        self.sum_over(bits, |p| p * p)
    }

    fn sum_over(&self, bits: u32, f: impl Fn(f64) -> f64) -> f64 {
        self.powers
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, &p)| f(p))
            .sum()
    }
}

/// A nonempty subset of the user set `[K]`, as a bitmask (user i ↔ bit i).
///
/// Subset-indexed vectors and matrices are always laid out in increasing
/// bitmask order `1, 2, 3, …, 2^K − 1`, which fixes serialization and
/// matrix element order unambiguously.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex(u32);

impl SubsetIndex {
    /// From a bitmask; must be nonzero and within `[K]`.
    pub fn new(bits: u32, k: usize) -> Result<Self> {
        if bits == 0 {
            return Err(Error::Domain("SubsetIndex: empty subset".into()));
        }
        if k > 32 || bits >= 1u32 << k {
            return Err(Error::Domain(format!(
                "SubsetIndex: mask {bits:#b} outside a {k}-user system"
            )));
        }
        Ok(Self(bits))
    }

    /// All nonempty subsets of `[k]` in increasing bitmask order.
    pub fn all(k: usize) -> impl Iterator<Item = SubsetIndex> {
        (1..1u32 << k).map(SubsetIndex)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn intersection(self, other: SubsetIndex) -> u32 {
        self.0 & other.0
    }

    pub fn contains(self, user: usize) -> bool {
        self.0 >> user & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        false // invariant: nonzero
    }

    /// Position of this subset in the increasing-bitmask layout.
    pub fn dense_index(self) -> usize {
        self.0 as usize - 1
    }
}

/// Capacity vector: entry `𝒮 ↦ C(P_⟨𝒮⟩)` for every nonempty subset.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityVector {
    k: usize,
    entries: Vec<f64>, // increasing bitmask order
}

impl CapacityVector {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false // 2^K − 1 ≥ 1
    }

    pub fn entry(&self, s: SubsetIndex) -> f64 {
        self.entries[s.dense_index()]
    }

    /// Entries in increasing bitmask order.
    pub fn dense(&self) -> &[f64] {
        &self.entries
    }

    /// JSON with explicit subset-bitmask keys:
    /// `{"users": K, "entries": {"1": …, "2": …, "3": …}}`.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for s in SubsetIndex::all(self.k) {
            map.insert(s.bits().to_string(), json!(self.entry(s)));
        }
        json!({ "users": self.k, "entries": Value::Object(map) })
    }
}

/// Dispersion matrix: the `(2^K−1)×(2^K−1)` covariance of the subset
/// information densities, indexed by nonempty subsets in increasing
/// bitmask order.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionMatrix {
    k: usize,
    data: Vec<f64>, // row-major, dim = 2^K − 1
}

impl DispersionMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Matrix dimension `2^K − 1`.
    pub fn dim(&self) -> usize {
        (1usize << self.k) - 1
    }

    pub fn entry(&self, s1: SubsetIndex, s2: SubsetIndex) -> f64 {
        self.data[s1.dense_index() * self.dim() + s2.dense_index()]
    }

    /// Row-major dense storage in increasing-bitmask order.
    pub fn dense(&self) -> &[f64] {
        &self.data
    }

    /// JSON with explicit subset-bitmask keys:
    /// `{"users": K, "entries": {"1": {"1": …, "2": …}, …}}`.
    pub fn to_json(&self) -> Value {
        let mut rows = Map::new();
        for s1 in SubsetIndex::all(self.k) {
            let mut row = Map::new();
            for s2 in SubsetIndex::all(self.k) {
                row.insert(s2.bits().to_string(), json!(self.entry(s1, s2)));
            }
            rows.insert(s1.bits().to_string(), Value::Object(row));
        }
        json!({ "users": self.k, "entries": Value::Object(rows) })
    }
}

/// Gaussian channel capacity `C(P) = ½ ln(1 + P)` in nats.
///
/// # Example
///
/// ```
/// let c = fbl_gausac::dispersion::capacity(1.0).unwrap();
/// assert!((c - 0.5 * 2f64.ln()).abs() < 1e-15);
/// ```
pub fn capacity(p: f64) -> Result<f64> {
    if p.is_nan() || p < 0.0 {
        return Err(Error::Domain(format!("capacity: P = {p} is negative")));
    }
    Ok(0.5 * p.ln_1p())
}

/// Point-to-point Gaussian dispersion `V(P) = P(P+2) / (2(1+P)²)`.
pub fn dispersion_v(p: f64) -> Result<f64> {
    if p.is_nan() || p < 0.0 {
        return Err(Error::Domain(format!("dispersion_v: P = {p} is negative")));
    }
    Ok(p * (p + 2.0) / (2.0 * (1.0 + p) * (1.0 + p)))
}

/// Cross dispersion of the symmetric K-user spherical ensemble:
/// `V_cr(K, P) = K(K−1)P² / (2(1+KP)²)`.
pub fn cross_dispersion(k: usize, p: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain("cross_dispersion: K ≥ 1 required".into()));
    }
    if p.is_nan() || p <= 0.0 {
        return Err(Error::Domain(format!(
            "cross_dispersion: P = {p} must be positive"
        )));
    }
    let kf = k as f64;
    Ok(kf * (kf - 1.0) * p * p / (2.0 * (1.0 + kf * p) * (1.0 + kf * p)))
}

/// Capacity vector of an allocation: entry `𝒮 ↦ C(Σ_{s∈𝒮} P_s)`.
pub fn capacity_vector(pa: &PowerAllocation) -> Result<CapacityVector> {
    let k = pa.k();
    let entries = SubsetIndex::all(k)
        .map(|s| capacity(pa.subset_power(s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CapacityVector { k, entries })
}

/// Dispersion matrix of an allocation. Entry for subsets `𝒮₁, 𝒮₂`:
///
/// ```text
///               P_⟨𝒮₁⟩ P_⟨𝒮₂⟩ + 2 P_⟨𝒮₁∩𝒮₂⟩ + (P_⟨𝒮₁∩𝒮₂⟩)² − Σ_{s∈𝒮₁∩𝒮₂} P_s²
/// V_{𝒮₁,𝒮₂} = ──────────────────────────────────────────────────────────────
///                              2 (1 + P_⟨𝒮₁⟩)(1 + P_⟨𝒮₂⟩)
/// ```
///
/// with `P_⟨∅⟩ = 0`. `(P_⟨𝒮⟩)²` squares the subset sum while the trailing
/// term sums squared powers — the unique reading under which the general
/// formula reproduces the explicit two-user matrix (verified entrywise in
/// the tests).
pub fn dispersion_matrix(pa: &PowerAllocation) -> Result<DispersionMatrix> {
    let k = pa.k();
    let dim = (1usize << k) - 1;
    let mut data = vec![0.0; dim * dim];
    for s1 in SubsetIndex::all(k) {
        let p1 = pa.subset_power(s1);
        for s2 in SubsetIndex::all(k) {
            let p2 = pa.subset_power(s2);
            let inter = s1.intersection(s2);
            let pi = pa.sum_over(inter, |p| p);
            let pi_sq_of_sum = pi * pi;
            let pi_sum_of_sq = pa.subset_power_sq(inter);
            let num = p1 * p2 + 2.0 * pi + pi_sq_of_sum - pi_sum_of_sq;
            let den = 2.0 * (1.0 + p1) * (1.0 + p2);
            data[s1.dense_index() * dim + s2.dense_index()] = num / den;
        }
    }
    Ok(DispersionMatrix { k, data })
}

/// Analysis constants of an allocation: the κ constants controlling the
/// power-gate tail bounds and the L/G constants controlling the quality of
/// the spherical-to-Gaussian approximation.
///
/// `kappa2` and `g12` are only defined for two-user allocations (the
/// general-K versions are existence-only) and are `None` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConstants {
    /// κ₁(Pᵢ), one per user.
    pub kappa1: Vec<f64>,
    /// L(Pᵢ, 1+Pᵢ), one per user.
    pub l_values: Vec<f64>,
    /// Gᵢ = (3 ln 2) · L(Pᵢ, 1+Pᵢ), one per user.
    pub g: Vec<f64>,
    /// κ₂(P₁, P₂) for two users.
    pub kappa2: Option<f64>,
    /// G₁,₂ = (2 ln 2) · K₂ for two users.
    pub g12: Option<f64>,
}

/// `κ₁(P) = 27 √(π/8) (1+P) / √(1+2P)`.
pub fn kappa1(p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::Domain(format!("kappa1: P = {p} must be positive")));
    }
    Ok(27.0 * (PI / 8.0).sqrt() * (1.0 + p) / (1.0 + 2.0 * p).sqrt())
}

/// `κ₂(P₁, P₂) = 9/(2π√2) · (P₁+P₂) / √(P₁P₂)`.
pub fn kappa2(p1: f64, p2: f64) -> Result<f64> {
    if !(p1 > 0.0 && p2 > 0.0) {
        return Err(Error::Domain(format!(
            "kappa2: P₁ = {p1}, P₂ = {p2} must be positive"
        )));
    }
    Ok(9.0 / (2.0 * PI * 2f64.sqrt()) * (p1 + p2) / (p1 * p2).sqrt())
}

/// `L(P, s) = 8(Ps)^{3/2}/√(2π) · √((1 + 4Ps − √(1+4Ps)) / (√(1+4Ps) − 1)^5)`.
pub fn l_function(p: f64, s: f64) -> Result<f64> {
    if !(p > 0.0 && s > 0.0) {
        return Err(Error::Domain(format!(
            "l_function: P = {p}, s = {s} must be positive"
        )));
    }
    let ps = p * s;
    let r = (1.0 + 4.0 * ps).sqrt();
    let num = 1.0 + 4.0 * ps - r;
    let den = (r - 1.0).powi(5);
    Ok(8.0 * ps.powf(1.5) / (2.0 * PI).sqrt() * (num / den).sqrt())
}

/// `K₂(P₁,P₂) = max (3/2)·L(u, 1+P₁+P₂)` over
/// `u ∈ [P₁+P₂−√(P₁P₂), (√P₁+√P₂)²]`, by dense grid plus golden-section
/// refinement around the best grid point.
pub fn k2_constant(p1: f64, p2: f64) -> Result<f64> {
    if !(p1 > 0.0 && p2 > 0.0) {
        return Err(Error::Domain(format!(
            "k2_constant: P₁ = {p1}, P₂ = {p2} must be positive"
        )));
    }
    let s = 1.0 + p1 + p2;
    let lo = p1 + p2 - (p1 * p2).sqrt();
    let hi = (p1.sqrt() + p2.sqrt()).powi(2);
    debug_assert!(lo > 0.0 && hi > lo);
    let f = |u: f64| -> Result<f64> { Ok(1.5 * l_function(u, s)?) };

    const GRID: usize = 10_000;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=GRID {
        let u = lo + (hi - lo) * i as f64 / GRID as f64;
        let v = f(u)?;
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // Golden-section refinement on the bracket around the best grid point.
    let step = (hi - lo) / GRID as f64;
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(best.max(f1).max(f2))
}

/// All analysis constants for an allocation. See [`AnalysisConstants`].
pub fn analysis_constants(pa: &PowerAllocation) -> Result<AnalysisConstants> {
    let three_ln2 = 3.0 * 2f64.ln();
    let kappa1_v = pa
        .powers()
        .iter()
        .map(|&p| kappa1(p))
        .collect::<Result<Vec<_>>>()?;
    let l_values = pa
        .powers()
        .iter()
        .map(|&p| l_function(p, 1.0 + p))
        .collect::<Result<Vec<_>>>()?;
    let g = l_values.iter().map(|l| three_ln2 * l).collect();
    let (kappa2_v, g12) = if pa.k() == 2 {
        let (p1, p2) = (pa.powers()[0], pa.powers()[1]);
        (
            Some(kappa2(p1, p2)?),
            Some(2.0 * 2f64.ln() * k2_constant(p1, p2)?),
        )
    } else {
        (None, None)
    };
    Ok(AnalysisConstants {
        kappa1: kappa1_v,
        l_values,
        g,
        kappa2: kappa2_v,
        g12,
    })
}

/// Explicit two-user dispersion matrix, kept as an independent reference
/// for the general subset formula (ordering: `{1}, {2}, {1,2}`):
///
/// ```text
/// ⎡ V(P₁)      V₁₂ᶜ       V₁,₁₂ ⎤         V₁₂ᶜ  = ½P₁P₂/((1+P₁)(1+P₂))
/// ⎢ V₁₂ᶜ       V(P₂)      V₂,₁₂ ⎥         Vᵢ,₁₂ = ½Pᵢ(2+P₁+P₂)/((1+Pᵢ)(1+P₁+P₂))
/// ⎣ V₁,₁₂      V₂,₁₂      V(P₁+P₂)+V₁₂ ⎦   V₁₂   = P₁P₂/(1+P₁+P₂)²
/// ```
pub fn dispersion_matrix_two_user_explicit(p1: f64, p2: f64) -> Result<[[f64; 3]; 3]> {
    if !(p1 > 0.0 && p2 > 0.0) {
        return Err(Error::Domain("two-user matrix: powers must be positive".into()));
    }
    let ps = p1 + p2;
    let v1 = dispersion_v(p1)?;
    let v2 = dispersion_v(p2)?;
    let v12c = 0.5 * p1 * p2 / ((1.0 + p1) * (1.0 + p2));
    let v1_12 = 0.5 * p1 * (2.0 + ps) / ((1.0 + p1) * (1.0 + ps));
    let v2_12 = 0.5 * p2 * (2.0 + ps) / ((1.0 + p2) * (1.0 + ps));
    let v12 = p1 * p2 / ((1.0 + ps) * (1.0 + ps));
    let v_joint = dispersion_v(ps)? + v12;
    Ok([
        [v1, v12c, v1_12],
        [v12c, v2, v2_12],
        [v1_12, v2_12, v_joint],
    ])
}
