//! Rateless random-access protocol: an unknown number of transmitters
//! share one spherical codebook, the receiver tests received power against
//! a gate at each scheduled decode time, and the first accepted gate fixes
//! the transmitter-count hypothesis and triggers list decoding (a single
//! feedback bit then tells everyone to stop).
//!
//! Decode times `n₀ < n₁ < … < n_K` come from inverting the symmetric
//! normal approximation: `n_k` is the earliest time at which `k`
//! transmitters can carry `ln M` nats each. The first time `n₀` only hosts
//! the silence test and is floored by [`crate::region::min_n0`]; at desk
//! scale that floor routinely exceeds the rate-derived `n₁`, in which case
//! every later time is bumped to keep the schedule strictly increasing
//! (and `n₀` is then re-derived until the schedule stabilizes).
//!
//! Error events per epoch, in classification precedence:
//!
//! 1. **repetition** — two transmitters chose the same message; the list
//!    decoder outputs strictly increasing tuples and cannot represent it;
//! 2. **wrong time** — the first accepted gate is not the true
//!    transmitter count (or no gate accepts at all);
//! 3. **wrong message** — right time, wrong message set.
//!
//! Power violations cannot occur: codewords sit exactly on the power
//! sphere at every decode time by construction.

use crate::dispersion::{kappa1, kappa2};
use crate::error::{Error, Result};
use crate::region::{achievable_logm_symmetric, min_n0, EstimateWithCI};
use crate::rng::{derive_seed, unit_rng};
use crate::sphere::{sample_concat_sphere, Codebook};
use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Cap on the list-decoding enumeration `Σ_{t≤K} C(M, t)`.
pub const MAX_ENUMERATION: u64 = 1 << 24;

/// Epochs per deterministic work unit in the protocol simulator.
const EPOCH_CHUNK: u64 = 32;

// seed scopes within one epoch
const SCOPE_CODEBOOK: u64 = 0;
const SCOPE_MESSAGES: u64 = 1;
const SCOPE_NOISE: u64 = 2;

/// What the schedule builder should hit: a per-user message count, or a
/// hard final decode time (the builder then finds the largest message
/// count whose schedule still ends by that time).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleTarget {
    Messages(u64),
    FinalTime(u64),
}

/// A decode schedule: times `n₀ < … < n_K`, gate half-widths `λ₀ … λ_K`,
/// and the code parameters they were built for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RacSchedule {
    times: Vec<usize>,
    lambdas: Vec<f64>,
    message_count: u64,
    power: f64,
    eps: f64,
    c0: f64,
}

impl RacSchedule {
    /// Validates all schedule invariants: strictly increasing positive
    /// times, one gate width per time, `λ₀ ∈ (0, 1)`, positive later
    /// widths, `M ≥ 2`, `ε ∈ (0, 1)`, positive finite power.
    pub fn new(
        times: Vec<usize>,
        lambdas: Vec<f64>,
        message_count: u64,
        power: f64,
        eps: f64,
        c0: f64,
    ) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::Schedule(
                "RacSchedule: need the silence time n₀ and at least one decode time".into(),
            ));
        }
        if times[0] == 0 || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Schedule(format!(
                "RacSchedule: times {times:?} must be positive and strictly increasing"
            )));
        }
        if lambdas.len() != times.len() {
            return Err(Error::Schedule(format!(
                "RacSchedule: {} gate widths for {} times",
                lambdas.len(),
                times.len()
            )));
        }
        if !(lambdas[0] > 0.0 && lambdas[0] < 1.0) {
            return Err(Error::Schedule(format!(
                "RacSchedule: silence gate width λ₀ = {} outside (0, 1)",
                lambdas[0]
            )));
        }
        if lambdas[1..].iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Schedule(
                "RacSchedule: every gate width must be positive and finite".into(),
            ));
        }
        if message_count < 2 {
            return Err(Error::Schedule(format!(
                "RacSchedule: M = {message_count} but at least 2 messages are required"
            )));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::Domain(format!(
                "RacSchedule: power {power} must be positive and finite"
            )));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!(
                "RacSchedule: eps = {eps} outside (0, 1)"
            )));
        }
        Ok(Self {
            times,
            lambdas,
            message_count,
            power,
            eps,
            c0,
        })
    }

    /// Decode times `n₀, n₁, …, n_K`.
    pub fn times(&self) -> &[usize] {
        &self.times
    }

    /// Gate half-widths `λ₀, λ₁, …, λ_K`.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Largest transmitter count the schedule can decode.
    pub fn k_max(&self) -> usize {
        self.times.len() - 1
    }

    /// Final decode time `n_K`.
    pub fn n_final(&self) -> usize {
        *self.times.last().expect("validated nonempty")
    }

    pub fn message_count(&self) -> u64 {
        self.message_count
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("RacSchedule serializes infallibly")
    }

    /// Total list-decoding enumeration `Σ_{t=1}^{K} C(M, t)`, or an error
    /// beyond the cap — checked before simulating, not at construction,
    /// so large-`M` schedules can still be *analyzed*.
    fn enumeration_size(&self) -> Result<u64> {
        let m = self.message_count;
        let mut total = 0u64;
        for t in 1..=self.k_max() as u64 {
            let mut c = 1u64;
            for i in 0..t {
                c = c
                    .checked_mul(m - i)
                    .ok_or_else(|| {
                        Error::Size("RacSchedule: list enumeration overflows".into())
                    })?
                    / (i + 1);
                if c > MAX_ENUMERATION {
                    return Err(Error::Size(format!(
                        "RacSchedule: list enumeration C({m}, {t}) exceeds 2^24"
                    )));
                }
            }
            total += c;
            if total > MAX_ENUMERATION {
                return Err(Error::Size(format!(
                    "RacSchedule: total list enumeration for M = {m} exceeds 2^24"
                )));
            }
        }
        Ok(total)
    }
}

/// Build a decode schedule for up to `k_max` transmitters.
///
/// Rate-derived times come from inverting the symmetric expansion (round
/// up to the earliest time whose achievable per-user `ln M` reaches the
/// target). The silence time `n₀` is then floored by [`min_n0`], later
/// times are bumped to stay strictly increasing, and the floor is
/// re-derived until the schedule reaches a fixpoint.
pub fn build_rac_schedule(
    k_max: usize,
    p: f64,
    eps: f64,
    target: ScheduleTarget,
    c0: f64,
) -> Result<RacSchedule> {
    if k_max == 0 {
        return Err(Error::Schedule("build_rac_schedule: k_max ≥ 1".into()));
    }
    match target {
        ScheduleTarget::Messages(m) => build_for_messages(k_max, p, eps, m, c0),
        ScheduleTarget::FinalTime(n_final) => {
            if n_final < 3 {
                return Err(Error::Schedule(format!(
                    "build_rac_schedule: final time {n_final} too small"
                )));
            }
            // the final time is nondecreasing in M: binary-search the
            // largest message count that still fits
            let fits = |m: u64| -> Result<bool> {
                match build_for_messages(k_max, p, eps, m, c0) {
                    Ok(s) => Ok(s.n_final() as u64 <= n_final),
                    Err(Error::Schedule(_)) => Ok(false),
                    Err(e) => Err(e),
                }
            };
            if !fits(2)? {
                return Err(Error::Schedule(format!(
                    "build_rac_schedule: no schedule with M ≥ 2 ends by time {n_final}"
                )));
            }
            let (mut lo, mut hi) = (2u64, 4u64);
            while fits(hi)? {
                lo = hi;
                hi = hi.saturating_mul(2);
                if hi >= 1 << 60 {
                    return Err(Error::Schedule(
                        "build_rac_schedule: message count exceeds 2^60".into(),
                    ));
                }
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if fits(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            build_for_messages(k_max, p, eps, lo, c0)
        }
    }
}

fn build_for_messages(k_max: usize, p: f64, eps: f64, m: u64, c0: f64) -> Result<RacSchedule> {
    if m < 2 {
        return Err(Error::Schedule(format!(
            "build_rac_schedule: M = {m} but at least 2 messages are required"
        )));
    }
    let target = (m as f64).ln();
    let rate_times: Vec<usize> = (1..=k_max)
        .map(|k| earliest_time(k, p, eps, c0, target))
        .collect::<Result<_>>()?;
    // impose the n₀ floor and strict monotonicity, re-deriving n₀ until
    // stable (the floor depends on n₁ only through a log, so this settles
    // in a couple of rounds)
    let mut times = rate_times.clone();
    let mut gate = min_n0(times[0] as u64, p, eps)?;
    for _ in 0..64 {
        let mut new_times = Vec::with_capacity(k_max);
        let mut prev = gate.n0 as usize;
        for (k, &rate_nk) in rate_times.iter().enumerate() {
            let nk = rate_nk.max(prev + 1);
            new_times.push(nk);
            prev = nk;
            let _ = k;
        }
        let new_gate = min_n0(new_times[0] as u64, p, eps)?;
        if new_times == times && new_gate == gate {
            break;
        }
        times = new_times;
        gate = new_gate;
    }
    let mut all_times = Vec::with_capacity(k_max + 1);
    all_times.push(gate.n0 as usize);
    all_times.extend_from_slice(&times);
    let mut lambdas = vec![p / 2.0; k_max + 1];
    lambdas[0] = gate.lambda0;
    RacSchedule::new(all_times, lambdas, m, p, eps, c0)
}

/// Earliest `n` at which `k` users reach per-user `ln M ≥ target`:
/// doubling to bracket, bisection, then a downward walk to guarantee
/// minimality.
fn earliest_time(k: usize, p: f64, eps: f64, c0: f64, target: f64) -> Result<usize> {
    let ok = |n: usize| -> Result<bool> {
        Ok(achievable_logm_symmetric(n as u64, k, p, eps, c0)? >= target)
    };
    let mut hi = 2usize;
    while !ok(hi)? {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::Schedule("earliest_time: no feasible time".into()))?;
        if hi > 1 << 40 {
            return Err(Error::Schedule(format!(
                "earliest_time: {k} users cannot reach ln M = {target} at any sane time"
            )));
        }
    }
    let mut lo = hi / 2; // ok(lo) unknown/false, ok(hi) true
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // the expansion is not monotone at very small n; walk down past any
    // dip so the result is the true minimum
    while hi > 2 && ok(hi - 1)? {
        hi -= 1;
    }
    Ok(hi)
}

/// Does the received prefix at schedule slot `t` pass the power gate
/// `|‖y‖²/n_t − (1 + tP)| ≤ λ_t`?
pub fn power_typical(y_prefix: &[f64], t: usize, schedule: &RacSchedule) -> Result<bool> {
    if t >= schedule.times.len() {
        return Err(Error::Schedule(format!(
            "power_typical: slot {t} outside the schedule"
        )));
    }
    let nt = schedule.times[t];
    if y_prefix.len() != nt {
        return Err(Error::Size(format!(
            "power_typical: prefix length {} but n_{t} = {nt}",
            y_prefix.len()
        )));
    }
    let power: f64 = crate::linalg::kahan_dot(y_prefix, y_prefix) / nt as f64;
    let center = 1.0 + t as f64 * schedule.power;
    Ok((power - center).abs() <= schedule.lambdas[t])
}

/// Sample the shared rateless codebook: `M` concatenated-sphere codewords
/// over the full schedule, each row from its own derived stream.
pub fn generate_rac_codebook(schedule: &RacSchedule, seed: u64) -> Result<Codebook> {
    let m = schedule.message_count as usize;
    let mut data = Vec::with_capacity(m * schedule.n_final());
    for row in 0..m {
        let mut rng = unit_rng(seed, row as u64);
        let cw = sample_concat_sphere(schedule.times(), schedule.power, &mut rng)?;
        data.extend_from_slice(cw.coords());
    }
    Codebook::from_flat(schedule.n_final(), schedule.power, data)
}

/// Maximum-likelihood list decoding at schedule slot `t`: the strictly
/// increasing `t`-tuple of messages maximizing
/// `Σ_m ⟨y, x_m⟩ − Σ_{m<m'} ⟨x_m, x_m'⟩` over the time-`n_t` prefixes.
/// Prefix norms are equal by construction, so they drop out of the
/// comparison. Ties break toward the lexicographically smallest tuple;
/// `t = 0` returns the empty tuple.
pub fn ml_list_decode(
    codebook: &Codebook,
    y: &[f64],
    t: usize,
    schedule: &RacSchedule,
) -> Result<Vec<usize>> {
    if t == 0 {
        return Ok(Vec::new());
    }
    if t >= schedule.times.len() {
        return Err(Error::Schedule(format!(
            "ml_list_decode: slot {t} outside the schedule"
        )));
    }
    let nt = schedule.times[t];
    if y.len() != nt {
        return Err(Error::Size(format!(
            "ml_list_decode: received length {} but n_{t} = {nt}",
            y.len()
        )));
    }
    let m = codebook.m();
    if t > m {
        return Err(Error::Size(format!(
            "ml_list_decode: {t} distinct messages from a codebook of {m}"
        )));
    }
    schedule.enumeration_size()?;
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let a: Vec<f64> = (0..m).map(|i| dot(y, &codebook.row(i)[..nt])).collect();
    // pairwise prefix interactions, upper triangle, only needed for t ≥ 2
    let g: Vec<f64> = if t >= 2 {
        let mut g = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in (i + 1)..m {
                g.push(dot(&codebook.row(i)[..nt], &codebook.row(j)[..nt]));
            }
        }
        g
    } else {
        Vec::new()
    };
    let pair = |i: usize, j: usize| -> f64 {
        debug_assert!(i < j);
        g[i * (2 * m - i - 1) / 2 + (j - i - 1)]
    };

    let mut best = Vec::new();
    let mut best_score = f64::NEG_INFINITY;
    let mut chosen = vec![0usize; t];
    // depth-first over strictly increasing tuples in lexicographic order;
    // strict improvement keeps the first (smallest) maximizer
    #[allow(clippy::too_many_arguments)] // recursion state, not an API
    fn scan(
        level: usize,
        start: usize,
        partial: f64,
        t: usize,
        m: usize,
        a: &[f64],
        pair: &dyn Fn(usize, usize) -> f64,
        chosen: &mut Vec<usize>,
        best: &mut Vec<usize>,
        best_score: &mut f64,
    ) {
        if level == t {
            if partial > *best_score {
                *best_score = partial;
                best.clear();
                best.extend_from_slice(chosen);
            }
            return;
        }
        // leave room for the remaining t − level − 1 strictly larger picks
        for next in start..=(m - (t - level)) {
            chosen[level] = next;
            let mut s = partial + a[next];
            for &c in chosen[..level].iter() {
                s -= pair(c, next);
            }
            scan(level + 1, next + 1, s, t, m, a, pair, chosen, best, best_score);
        }
    }
    scan(0, 0, 0.0, t, m, &a, &pair, &mut chosen, &mut best, &mut best_score);
    Ok(best)
}

/// How one protocol epoch ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorClass {
    /// Two transmitters chose the same message (classified first: the
    /// decoder cannot represent multisets, so the epoch is lost whatever
    /// the gates do).
    Repetition,
    /// The first accepted gate was not the true transmitter count, or no
    /// gate accepted.
    WrongTime,
    /// Decoded at the right time but with the wrong message set.
    WrongMessage,
}

/// Full record of one protocol epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Schedule slot of the first accepted gate; `None` if every gate
    /// rejected.
    pub stopped_at: Option<usize>,
    /// Decoded message list (empty for the silence hypothesis).
    pub decoded: Vec<usize>,
    /// `None` on success.
    pub error: Option<ErrorClass>,
}

/// Run one epoch with explicit messages and a full-length noise vector —
/// the deterministic core of [`run_epoch`], also usable directly to probe
/// specific receiver inputs.
pub fn run_epoch_with(
    schedule: &RacSchedule,
    codebook: &Codebook,
    messages: &[usize],
    noise: &[f64],
) -> Result<TrialOutcome> {
    let k = messages.len();
    if k > schedule.k_max() {
        return Err(Error::Size(format!(
            "run_epoch_with: {k} transmitters exceed the schedule maximum {}",
            schedule.k_max()
        )));
    }
    if noise.len() != schedule.n_final() {
        return Err(Error::Size(format!(
            "run_epoch_with: noise length {} but n_K = {}",
            noise.len(),
            schedule.n_final()
        )));
    }
    if codebook.n() != schedule.n_final() || codebook.m() != schedule.message_count as usize {
        return Err(Error::Size(
            "run_epoch_with: codebook shape does not match the schedule".into(),
        ));
    }
    let mut y = noise.to_vec();
    for &w in messages {
        if w >= codebook.m() {
            return Err(Error::Size(format!(
                "run_epoch_with: message {w} outside the codebook"
            )));
        }
        for (yi, xi) in y.iter_mut().zip(codebook.row(w)) {
            *yi += xi;
        }
    }

    let mut sent = messages.to_vec();
    sent.sort_unstable();
    let repeated = sent.windows(2).any(|w| w[0] == w[1]);

    let mut stopped_at = None;
    let mut decoded = Vec::new();
    for t in 0..schedule.times.len() {
        let prefix = &y[..schedule.times[t]];
        if power_typical(prefix, t, schedule)? {
            decoded = ml_list_decode(codebook, prefix, t, schedule)?;
            stopped_at = Some(t);
            break;
        }
    }

    // precedence: repetition, then wrong time, then wrong message
    let error = if repeated {
        Some(ErrorClass::Repetition)
    } else if stopped_at != Some(k) {
        Some(ErrorClass::WrongTime)
    } else if decoded != sent {
        Some(ErrorClass::WrongMessage)
    } else {
        None
    };
    Ok(TrialOutcome {
        stopped_at,
        decoded,
        error,
    })
}

/// Run one epoch with `k_actual` transmitters: fresh codebook, uniform
/// independent message choices, white Gaussian noise — all from streams
/// derived from `epoch_seed`.
pub fn run_epoch(schedule: &RacSchedule, k_actual: usize, epoch_seed: u64) -> Result<TrialOutcome> {
    let codebook = generate_rac_codebook(schedule, derive_seed(epoch_seed, SCOPE_CODEBOOK))?;
    let mut msg_rng = unit_rng(epoch_seed, SCOPE_MESSAGES);
    let m = schedule.message_count;
    let messages: Vec<usize> = (0..k_actual)
        .map(|_| msg_rng.random_range(0..m) as usize)
        .collect();
    let mut noise_rng = unit_rng(epoch_seed, SCOPE_NOISE);
    let noise: Vec<f64> = (0..schedule.n_final())
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut noise_rng);
            z
        })
        .collect();
    run_epoch_with(schedule, &codebook, &messages, &noise)
}

/// Error counts by class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub repetition: u64,
    pub wrong_time: u64,
    pub wrong_message: u64,
}

impl ErrorBreakdown {
    pub fn total(&self) -> u64 {
        self.repetition + self.wrong_time + self.wrong_message
    }

    pub fn record(&mut self, class: ErrorClass) {
        match class {
            ErrorClass::Repetition => self.repetition += 1,
            ErrorClass::WrongTime => self.wrong_time += 1,
            ErrorClass::WrongMessage => self.wrong_message += 1,
        }
    }

    pub fn merge(&mut self, other: &ErrorBreakdown) {
        self.repetition += other.repetition;
        self.wrong_time += other.wrong_time;
        self.wrong_message += other.wrong_message;
    }

    pub fn count(&self, class: ErrorClass) -> u64 {
        match class {
            ErrorClass::Repetition => self.repetition,
            ErrorClass::WrongTime => self.wrong_time,
            ErrorClass::WrongMessage => self.wrong_message,
        }
    }
}

/// Outcome of a protocol simulation at one true transmitter count.
#[derive(Debug, Clone, PartialEq)]
pub struct RacSimReport {
    pub k_actual: usize,
    pub epochs: u64,
    pub breakdown: ErrorBreakdown,
    /// Total error probability across all classes.
    pub error_prob: EstimateWithCI,
}

impl RacSimReport {
    /// Wilson interval for one error class.
    pub fn class_estimate(&self, class: ErrorClass, confidence: f64) -> Result<EstimateWithCI> {
        EstimateWithCI::from_binomial(self.breakdown.count(class), self.epochs, confidence)
    }
}

/// Simulate the protocol for `epochs` independent epochs with `k_actual`
/// transmitters. Every epoch owns a derived RNG stream, so counts are
/// identical for any worker count.
pub fn simulate_rac(
    schedule: &RacSchedule,
    k_actual: usize,
    epochs: u64,
    seed: u64,
    confidence: f64,
) -> Result<RacSimReport> {
    if epochs == 0 {
        return Err(Error::Size("simulate_rac: zero epochs".into()));
    }
    if k_actual > schedule.k_max() {
        return Err(Error::Size(format!(
            "simulate_rac: {k_actual} transmitters exceed the schedule maximum {}",
            schedule.k_max()
        )));
    }
    schedule.enumeration_size()?;
    let chunks = epochs.div_ceil(EPOCH_CHUNK);
    let breakdown = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<ErrorBreakdown> {
            let mut bd = ErrorBreakdown::default();
            for epoch in chunk * EPOCH_CHUNK..((chunk + 1) * EPOCH_CHUNK).min(epochs) {
                let outcome = run_epoch(schedule, k_actual, derive_seed(seed, epoch))?;
                if let Some(class) = outcome.error {
                    bd.record(class);
                }
            }
            Ok(bd)
        })
        .try_reduce(ErrorBreakdown::default, |mut a, b| {
            a.merge(&b);
            Ok(a)
        })?;
    Ok(RacSimReport {
        k_actual,
        epochs,
        breakdown,
        error_prob: EstimateWithCI::from_binomial(breakdown.total(), epochs, confidence)?,
    })
}

/// Exact probability that `k` independent uniform choices from `m`
/// messages contain a repeat: `1 − Π_{i<k} (m − i)/m`.
pub fn repetition_probability(k: usize, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("repetition_probability: m ≥ 1".into()));
    }
    if k as u64 > m {
        return Ok(1.0); // pigeonhole
    }
    let mut no_repeat = 1.0;
    for i in 0..k as u64 {
        no_repeat *= (m - i) as f64 / m as f64;
    }
    Ok(1.0 - no_repeat)
}

/// Analytical upper bound on the wrong-time probability with `k` active
/// transmitters:
///
/// ```text
/// B(k) = 2 κ(1,P) e^{ −n₀ (kP − λ₀)² / (8(1+kP)²) }
///      + 2 Σ_{t=1}^{k} ( Π_{j≤t} κ(j,P) ) e^{ −n_t ((k−t−½)P)² / (8(1+kP)²) }.
/// ```
///
/// `κ(1,P)` and `κ(2,P)` have closed forms; `κ(j,P)` for `j ≥ 3` must be
/// supplied through `extra_kappas` (index 0 ↦ `κ(3,P)` and so on). The
/// `k = 0` case reduces to the first term, which the gate design pins to
/// exactly `ε₀`. At desk-scale blocklengths the bound routinely exceeds 1
/// — it is honest but vacuous there, and tightens exponentially as the
/// schedule grows.
pub fn wrong_time_bound(schedule: &RacSchedule, k: usize, extra_kappas: &[f64]) -> Result<f64> {
    if k > schedule.k_max() {
        return Err(Error::Schedule(format!(
            "wrong_time_bound: k = {k} exceeds the schedule maximum {}",
            schedule.k_max()
        )));
    }
    let p = schedule.power;
    let kappa = |j: usize| -> Result<f64> {
        match j {
            1 => kappa1(p),
            2 => kappa2(p, p),
            _ => extra_kappas.get(j - 3).copied().ok_or_else(|| {
                Error::Domain(format!(
                    "wrong_time_bound: κ({j}, P) has no closed form here; supply it explicitly \
                     or use wrong_time_bound_conservative"
                ))
            }),
        }
    };
    let kp = k as f64 * p;
    let denom = 8.0 * (1.0 + kp) * (1.0 + kp);
    let n0 = schedule.times[0] as f64;
    let lambda0 = schedule.lambdas[0];
    let mut bound = 2.0 * kappa(1)? * (-n0 * (kp - lambda0).powi(2) / denom).exp();
    let mut kappa_product = 1.0;
    for t in 1..=k {
        kappa_product *= kappa(t)?;
        let nt = schedule.times[t] as f64;
        let gap = (k as f64 - t as f64 - 0.5) * p;
        bound += 2.0 * kappa_product * (-nt * gap * gap / denom).exp();
    }
    Ok(bound)
}

/// [`wrong_time_bound`] with every missing `κ(j≥3, P)` replaced by
/// `κ(2, P)`. Returns `(bound, substituted)`; when `substituted` is true
/// the value is a placeholder extrapolation, not a proved bound, and is
/// flagged as such wherever it is reported.
pub fn wrong_time_bound_conservative(schedule: &RacSchedule, k: usize) -> Result<(f64, bool)> {
    let substituted = k >= 3;
    if !substituted {
        return Ok((wrong_time_bound(schedule, k, &[])?, false));
    }
    let filler = vec![kappa2(schedule.power, schedule.power)?; k - 2];
    Ok((wrong_time_bound(schedule, k, &filler)?, true))
}
