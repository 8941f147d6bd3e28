//! Multiple-access link simulation: K transmitters with spherical
//! codebooks, an additive white Gaussian channel, joint maximum-likelihood
//! decoding, and a Monte Carlo estimator of the random-coding union bound
//! that the achievability analysis rests on.
//!
//! Two decoders are kept deliberately: [`decode_mac_ml`] expands the
//! squared distance into per-user correlation and pairwise interaction
//! tables (fast), while [`decode_mac_brute_likelihood`] materializes every
//! superposition and measures distances directly (slow, obviously
//! correct). Cross-checking them on random instances is part of the
//! verification suite.

use crate::dispersion::PowerAllocation;
use crate::error::{Error, Result};
use crate::region::EstimateWithCI;
use crate::rng::{derive_seed, unit_rng};
use crate::specfun::sphere_coord_cdf;
use crate::sphere::Codebook;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Cap on the joint message enumeration `Π Mᵢ` of the ML decoder.
pub const MAX_ENUMERATION: u64 = 1 << 24;

/// Inner-loop Monte Carlo in the union-bound estimator redraws whole
/// codeword tuples per subset; beyond three users the cost is out of desk
/// scale.
pub const MAX_RCU_USERS: usize = 3;

/// Trials per deterministic work unit in the link simulator.
const TRIAL_CHUNK: u64 = 64;

// seed scopes within one trial / one outer sample
const SCOPE_CODEBOOK: u64 = 0;
const SCOPE_MESSAGES: u64 = 1;
const SCOPE_NOISE: u64 = 2;
const SCOPE_INNER: u64 = 3;

/// Whether codebooks are redrawn every trial (ensemble average, the
/// quantity the union bound controls) or drawn once and reused (the error
/// rate of one concrete code).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookMode {
    Ensemble,
    Fixed,
}

/// Static description of a multiple-access link.
#[derive(Debug, Clone, PartialEq)]
pub struct MacConfig {
    n: usize,
    powers: PowerAllocation,
    message_counts: Vec<u64>,
    codebook_mode: CodebookMode,
}

impl MacConfig {
    /// Validates the blocklength, one message count per user, and the
    /// joint enumeration cap `Π Mᵢ ≤ 2²⁴`.
    pub fn new(
        n: usize,
        powers: PowerAllocation,
        message_counts: Vec<u64>,
        codebook_mode: CodebookMode,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Size("MacConfig: n ≥ 1 required".into()));
        }
        if message_counts.len() != powers.k() {
            return Err(Error::Size(format!(
                "MacConfig: {} message counts for {} users",
                message_counts.len(),
                powers.k()
            )));
        }
        if message_counts.contains(&0) {
            return Err(Error::Size("MacConfig: every Mᵢ must be at least 1".into()));
        }
        let mut product = 1u64;
        for &m in &message_counts {
            product = product
                .checked_mul(m)
                .filter(|&p| p <= MAX_ENUMERATION)
                .ok_or_else(|| {
                    Error::Size(format!(
                        "MacConfig: joint enumeration {:?} exceeds 2^24",
                        message_counts
                    ))
                })?;
        }
        Ok(Self {
            n,
            powers,
            message_counts,
            codebook_mode,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.powers.k()
    }

    pub fn powers(&self) -> &PowerAllocation {
        &self.powers
    }

    pub fn message_counts(&self) -> &[u64] {
        &self.message_counts
    }

    pub fn codebook_mode(&self) -> CodebookMode {
        self.codebook_mode
    }
}

/// One codebook per user, each row drawn from its own derived RNG stream
/// (`seed → user → row`), so any single codeword can be regenerated
/// without drawing its predecessors.
pub fn generate_codebooks(cfg: &MacConfig, seed: u64) -> Result<Vec<Codebook>> {
    (0..cfg.k())
        .map(|u| {
            let user_seed = derive_seed(seed, u as u64);
            let m = cfg.message_counts[u] as usize;
            let p = cfg.powers.powers()[u];
            let mut data = Vec::with_capacity(m * cfg.n);
            for row in 0..m {
                let mut rng = unit_rng(user_seed, row as u64);
                data.extend_from_slice(
                    crate::sphere::sample_sphere(cfg.n, p, &mut rng)?.coords(),
                );
            }
            Codebook::from_flat(cfg.n, p, data)
        })
        .collect()
}

/// Superposition `Σᵢ xᵢ(mᵢ)` of the selected codewords.
pub fn superpose(books: &[Codebook], messages: &[usize]) -> Result<Vec<f64>> {
    if books.is_empty() || books.len() != messages.len() {
        return Err(Error::Size(format!(
            "superpose: {} codebooks, {} messages",
            books.len(),
            messages.len()
        )));
    }
    let n = books[0].n();
    let mut x = vec![0.0; n];
    for (book, &m) in books.iter().zip(messages) {
        if book.n() != n {
            return Err(Error::Size("superpose: codeword length mismatch".into()));
        }
        if m >= book.m() {
            return Err(Error::Size(format!(
                "superpose: message {m} outside codebook of size {}",
                book.m()
            )));
        }
        for (xi, ci) in x.iter_mut().zip(book.row(m)) {
            *xi += ci;
        }
    }
    Ok(x)
}

/// Pass a superposition through the unit-variance AWGN channel.
pub fn apply_channel(x: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    x.iter()
        .map(|xi| {
            let z: f64 = StandardNormal.sample(rng);
            xi + z
        })
        .collect()
}

/// Joint maximum-likelihood decoding: the message tuple minimizing
/// `‖y − Σᵢ xᵢ(mᵢ)‖²`, ties broken toward the lexicographically smallest
/// tuple.
///
/// Codeword norms are fixed by the power spheres, so minimizing distance
/// is equivalent to maximizing `Σᵢ⟨y, xᵢ(mᵢ)⟩ − Σ_{i<j}⟨xᵢ(mᵢ), xⱼ(mⱼ)⟩`;
/// the decoder tabulates both kinds of inner product once and then scans
/// the tuple space.
pub fn decode_mac_ml(books: &[Codebook], y: &[f64]) -> Result<Vec<usize>> {
    let (k, counts) = check_decode_inputs(books, y)?;
    // a[i][m] = ⟨y, xᵢ(m)⟩
    let a: Vec<Vec<f64>> = books
        .iter()
        .map(|b| b.rows().map(|row| dot(y, row)).collect())
        .collect();
    // g[i][j − i − 1][m·Mⱼ + m'] = ⟨xᵢ(m), xⱼ(m')⟩ for i < j
    let g: Vec<Vec<Vec<f64>>> = (0..k)
        .map(|i| {
            ((i + 1)..k)
                .map(|j| {
                    let mut t = Vec::with_capacity(counts[i] * counts[j]);
                    for mi in 0..counts[i] {
                        for mj in 0..counts[j] {
                            t.push(dot(books[i].row(mi), books[j].row(mj)));
                        }
                    }
                    t
                })
                .collect()
        })
        .collect();

    let mut best_score = f64::NEG_INFINITY;
    let mut best = vec![0usize; k];
    let mut current = vec![0usize; k];
    // depth-first lexicographic scan; ties keep the first (smallest) tuple
    #[allow(clippy::too_many_arguments)] // recursion state, not an API
    fn scan(
        level: usize,
        partial: f64,
        current: &mut [usize],
        best: &mut [usize],
        best_score: &mut f64,
        a: &[Vec<f64>],
        g: &[Vec<Vec<f64>>],
        counts: &[usize],
    ) {
        if level == current.len() {
            if partial > *best_score {
                *best_score = partial;
                best.copy_from_slice(current);
            }
            return;
        }
        for m in 0..counts[level] {
            current[level] = m;
            let mut s = partial + a[level][m];
            for i in 0..level {
                s -= g[i][level - i - 1][current[i] * counts[level] + m];
            }
            scan(level + 1, s, current, best, best_score, a, g, counts);
        }
    }
    scan(0, 0.0, &mut current, &mut best, &mut best_score, &a, &g, &counts);
    Ok(best)
}

/// Reference maximum-likelihood decoder: materializes every superposition
/// and compares squared distances directly. Same tie rule as
/// [`decode_mac_ml`]; exponentially slower, structurally independent.
pub fn decode_mac_brute_likelihood(books: &[Codebook], y: &[f64]) -> Result<Vec<usize>> {
    let (k, counts) = check_decode_inputs(books, y)?;
    let mut best_dist = f64::INFINITY;
    let mut best = vec![0usize; k];
    let mut current = vec![0usize; k];
    loop {
        let s = superpose(books, &current)?;
        let dist: f64 = y
            .iter()
            .zip(&s)
            .map(|(yi, si)| (yi - si) * (yi - si))
            .sum();
        if dist < best_dist {
            best_dist = dist;
            best.copy_from_slice(&current);
        }
        // lexicographic odometer
        let mut level = k;
        loop {
            if level == 0 {
                return Ok(best);
            }
            level -= 1;
            current[level] += 1;
            if current[level] < counts[level] {
                break;
            }
            current[level] = 0;
        }
    }
}

fn check_decode_inputs(books: &[Codebook], y: &[f64]) -> Result<(usize, Vec<usize>)> {
    if books.is_empty() {
        return Err(Error::Size("decode: no codebooks".into()));
    }
    if books.iter().any(|b| b.n() != y.len()) {
        return Err(Error::Size(format!(
            "decode: received length {} does not match the codebooks",
            y.len()
        )));
    }
    let mut product = 1u64;
    for b in books {
        product = product
            .checked_mul(b.m() as u64)
            .filter(|&p| p <= MAX_ENUMERATION)
            .ok_or_else(|| Error::Size("decode: joint enumeration exceeds 2^24".into()))?;
    }
    Ok((books.len(), books.iter().map(|b| b.m()).collect()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a link simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct MacSimReport {
    /// Probability that the decoded tuple differs from the sent one.
    pub error_prob: EstimateWithCI,
    pub errors: u64,
    pub trials: u64,
}

/// Simulate the full link for `trials` independent transmissions and
/// estimate the joint error probability.
///
/// Each trial owns an RNG stream derived from `(seed, trial index)`, with
/// sub-streams for codebook, messages, and noise, so results are identical
/// for any worker count. In [`CodebookMode::Fixed`] the codebooks are
/// drawn once from the seed's codebook scope and shared across trials.
pub fn simulate_mac(
    cfg: &MacConfig,
    trials: u64,
    seed: u64,
    confidence: f64,
) -> Result<MacSimReport> {
    if trials == 0 {
        return Err(Error::Size("simulate_mac: zero trials".into()));
    }
    let fixed_books = match cfg.codebook_mode {
        CodebookMode::Fixed => Some(generate_codebooks(cfg, derive_seed(seed, SCOPE_CODEBOOK))?),
        CodebookMode::Ensemble => None,
    };
    let trial_scope = derive_seed(seed, SCOPE_MESSAGES); // root of all per-trial streams
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let errors = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<u64> {
            let mut errs = 0u64;
            for trial in chunk * TRIAL_CHUNK..((chunk + 1) * TRIAL_CHUNK).min(trials) {
                let trial_seed = derive_seed(trial_scope, trial);
                let books_storage;
                let books = match &fixed_books {
                    Some(b) => b,
                    None => {
                        books_storage =
                            generate_codebooks(cfg, derive_seed(trial_seed, SCOPE_CODEBOOK))?;
                        &books_storage
                    }
                };
                let mut msg_rng = unit_rng(trial_seed, SCOPE_MESSAGES);
                let sent: Vec<usize> = cfg
                    .message_counts
                    .iter()
                    .map(|&m| msg_rng.random_range(0..m) as usize)
                    .collect();
                let x = superpose(books, &sent)?;
                let mut noise_rng = unit_rng(trial_seed, SCOPE_NOISE);
                let y = apply_channel(&x, &mut noise_rng);
                if decode_mac_ml(books, &y)? != sent {
                    errs += 1;
                }
            }
            Ok(errs)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(MacSimReport {
        error_prob: EstimateWithCI::from_binomial(errors, trials, confidence)?,
        errors,
        trials,
    })
}

/// Monte Carlo estimate of the random-coding union bound on the ensemble
/// error probability,
///
/// ```text
/// ε ≤ E[ min{1, Σ_{∅≠𝒮⊆[K]} Π_{s∈𝒮}(M_s − 1) · P_𝒮(Y, X) } ],
/// ```
///
/// where `P_𝒮` is the probability that redrawing the users in `𝒮` produces
/// a tuple the decoder likes at least as much as the transmitted one.
/// Singleton subsets use the exact single-coordinate sphere law;
/// `|𝒮| ≥ 2` uses `inner_samples` nested Monte Carlo draws. The nested
/// estimate sits inside the concave `min{1, ·}`, so the result is biased
/// slightly low wherever the union sum hovers near 1; at operating points
/// worth reading, the sum is far below 1 and the bias vanishes.
pub fn rcu_mc_estimate(
    cfg: &MacConfig,
    outer_samples: u64,
    inner_samples: u64,
    seed: u64,
    confidence: f64,
) -> Result<EstimateWithCI> {
    if cfg.k() > MAX_RCU_USERS {
        return Err(Error::Size(format!(
            "rcu_mc_estimate: {} users exceeds the cap of {MAX_RCU_USERS}",
            cfg.k()
        )));
    }
    if outer_samples < 2 || inner_samples == 0 {
        return Err(Error::Size(
            "rcu_mc_estimate: need at least 2 outer and 1 inner samples".into(),
        ));
    }
    let n = cfg.n;
    let k = cfg.k();
    let powers = cfg.powers.powers();
    let values: Vec<f64> = (0..outer_samples)
        .into_par_iter()
        .map(|outer| -> Result<f64> {
            let outer_seed = derive_seed(seed, outer);
            // true codewords (message identity is irrelevant by symmetry)
            let mut cw_rng = unit_rng(outer_seed, SCOPE_CODEBOOK);
            let xs: Vec<Vec<f64>> = powers
                .iter()
                .map(|&p| Ok(crate::sphere::sample_sphere(n, p, &mut cw_rng)?.into_coords()))
                .collect::<Result<_>>()?;
            let mut noise_rng = unit_rng(outer_seed, SCOPE_NOISE);
            let mut y = vec![0.0; n];
            for yi in &mut y {
                *yi = StandardNormal.sample(&mut noise_rng);
            }
            for x in &xs {
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi += xi;
                }
            }
            let inner_scope = derive_seed(outer_seed, SCOPE_INNER);

            let mut union_sum = 0.0;
            for bits in 1u32..1 << k {
                let members: Vec<usize> = (0..k).filter(|i| bits >> i & 1 == 1).collect();
                let mut weight = 1.0;
                for &s in &members {
                    weight *= (cfg.message_counts[s] - 1) as f64;
                }
                if weight == 0.0 {
                    continue;
                }
                // w = y − Σ_{j∉𝒮} xⱼ;  t = ⟨w, Σ_𝒮 xₛ⟩ − Σ_{s<s'∈𝒮} ⟨xₛ, xₛ'⟩
                let mut w = y.clone();
                for (j, x) in xs.iter().enumerate() {
                    if bits >> j & 1 == 0 {
                        for (wi, xi) in w.iter_mut().zip(x) {
                            *wi -= xi;
                        }
                    }
                }
                let mut t = 0.0;
                for (a_idx, &s) in members.iter().enumerate() {
                    t += dot(&w, &xs[s]);
                    for &s2 in &members[a_idx + 1..] {
                        t -= dot(&xs[s], &xs[s2]);
                    }
                }
                let p_s = if members.len() == 1 {
                    // exact: ⟨w, X̄⟩/(‖w‖√P) follows the sphere coordinate law
                    let p = powers[members[0]];
                    let nw = dot(&w, &w).sqrt();
                    if nw == 0.0 {
                        1.0
                    } else {
                        1.0 - sphere_coord_cdf(t / (nw * p.sqrt()), n)?
                    }
                } else {
                    let mut rng = unit_rng(inner_scope, u64::from(bits));
                    let mut hits = 0u64;
                    for _ in 0..inner_samples {
                        let redraws: Vec<Vec<f64>> = members
                            .iter()
                            .map(|&s| {
                                Ok(crate::sphere::sample_sphere(n, powers[s], &mut rng)?
                                    .into_coords())
                            })
                            .collect::<Result<_>>()?;
                        let mut score = 0.0;
                        for (a_idx, xbar) in redraws.iter().enumerate() {
                            score += dot(&w, xbar);
                            for xbar2 in &redraws[a_idx + 1..] {
                                score -= dot(xbar, xbar2);
                            }
                        }
                        if score >= t {
                            hits += 1;
                        }
                    }
                    hits as f64 / inner_samples as f64
                };
                union_sum += weight * p_s;
            }
            Ok(union_sum.min(1.0))
        })
        .collect::<Result<_>>()?;
    // two-pass mean and variance in fixed order
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (values.len() - 1) as f64;
    EstimateWithCI::from_mean(mean, var, outer_samples, confidence)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(mode: CodebookMode) -> MacConfig {
        MacConfig::new(
            40,
            PowerAllocation::symmetric(2, 1.0).unwrap(),
            vec![4, 4],
            mode,
        )
        .unwrap()
    }

    #[test]
    fn config_guards() {
        let pa = PowerAllocation::symmetric(2, 1.0).unwrap();
        assert!(MacConfig::new(0, pa.clone(), vec![4, 4], CodebookMode::Fixed).is_err());
        assert!(MacConfig::new(8, pa.clone(), vec![4], CodebookMode::Fixed).is_err());
        assert!(MacConfig::new(8, pa.clone(), vec![4, 0], CodebookMode::Fixed).is_err());
        assert!(MacConfig::new(8, pa.clone(), vec![1 << 13, 1 << 13], CodebookMode::Fixed).is_err());
        assert!(MacConfig::new(8, pa, vec![1 << 12, 1 << 12], CodebookMode::Fixed).is_ok());
    }

    #[test]
    fn codebooks_have_declared_shape() {
        let cfg = small_cfg(CodebookMode::Fixed);
        let books = generate_codebooks(&cfg, 1).unwrap();
        assert_eq!(books.len(), 2);
        for b in &books {
            assert_eq!((b.n(), b.m()), (40, 4));
        }
        // row-level reproducibility: regenerating gives identical books
        let again = generate_codebooks(&cfg, 1).unwrap();
        assert_eq!(books, again);
        assert_ne!(books, generate_codebooks(&cfg, 2).unwrap());
    }

    #[test]
    fn superpose_adds_selected_rows() {
        let cfg = small_cfg(CodebookMode::Fixed);
        let books = generate_codebooks(&cfg, 3).unwrap();
        let s = superpose(&books, &[1, 2]).unwrap();
        for (i, &si) in s.iter().enumerate() {
            let expect = books[0].row(1)[i] + books[1].row(2)[i];
            assert!((si - expect).abs() < 1e-15);
        }
        assert!(superpose(&books, &[4, 0]).is_err());
        assert!(superpose(&books, &[0]).is_err());
    }

    #[test]
    fn decoder_recovers_clean_transmission() {
        let cfg = small_cfg(CodebookMode::Fixed);
        let books = generate_codebooks(&cfg, 5).unwrap();
        for sent in [[0usize, 0], [3, 1], [2, 3]] {
            let y = superpose(&books, &sent).unwrap(); // no noise
            assert_eq!(decode_mac_ml(&books, &y).unwrap(), sent);
            assert_eq!(decode_mac_brute_likelihood(&books, &y).unwrap(), sent);
        }
    }

    #[test]
    fn decoders_agree_under_noise() {
        let cfg = MacConfig::new(
            16,
            PowerAllocation::new(vec![1.0, 0.6, 2.0]).unwrap(),
            vec![3, 4, 2],
            CodebookMode::Fixed,
        )
        .unwrap();
        for round in 0..50u64 {
            let books = generate_codebooks(&cfg, derive_seed(100, round)).unwrap();
            let mut rng = unit_rng(200, round);
            let sent: Vec<usize> = vec![
                rng.random_range(0..3),
                rng.random_range(0..4),
                rng.random_range(0..2),
            ];
            let x = superpose(&books, &sent).unwrap();
            let y = apply_channel(&x, &mut rng);
            assert_eq!(
                decode_mac_ml(&books, &y).unwrap(),
                decode_mac_brute_likelihood(&books, &y).unwrap(),
                "round {round}"
            );
        }
    }

    #[test]
    fn tie_break_prefers_lexicographic_smallest() {
        // two identical codebooks per user → every pair (m, m) has an
        // exact twin; the decoder must return the smallest indices
        let mut rng = unit_rng(9, 0);
        let row = crate::sphere::sample_sphere(8, 1.0, &mut rng).unwrap();
        let mut data = row.coords().to_vec();
        data.extend_from_slice(row.coords()); // duplicate codeword
        let book = Codebook::from_flat(8, 1.0, data).unwrap();
        let books = vec![book.clone(), book];
        let y = superpose(&books, &[1, 1]).unwrap();
        assert_eq!(decode_mac_ml(&books, &y).unwrap(), vec![0, 0]);
        assert_eq!(decode_mac_brute_likelihood(&books, &y).unwrap(), vec![0, 0]);
    }

    #[test]
    fn simulation_is_deterministic_and_sane() {
        let cfg = small_cfg(CodebookMode::Ensemble);
        let r1 = simulate_mac(&cfg, 400, 11, 0.95).unwrap();
        let r2 = simulate_mac(&cfg, 400, 11, 0.95).unwrap();
        assert_eq!(r1.errors, r2.errors);
        assert_eq!(r1.trials, 400);
        // n = 40 at these rates decodes almost always; just check sanity
        assert!(r1.error_prob.point < 0.5);
    }

    #[test]
    fn worker_count_does_not_change_counts() {
        let cfg = small_cfg(CodebookMode::Ensemble);
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool3 = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = pool1.install(|| simulate_mac(&cfg, 300, 17, 0.95)).unwrap();
        let b = pool3.install(|| simulate_mac(&cfg, 300, 17, 0.95)).unwrap();
        assert_eq!(a.errors, b.errors);
    }

    #[test]
    fn fixed_mode_reuses_codebooks() {
        // with a fixed codebook and fixed messages the only randomness is
        // noise; two different seeds share the codebook scope only if the
        // master seed matches
        let cfg = small_cfg(CodebookMode::Fixed);
        let r1 = simulate_mac(&cfg, 200, 21, 0.95).unwrap();
        let r2 = simulate_mac(&cfg, 200, 22, 0.95).unwrap();
        assert_eq!(r1.trials, r2.trials);
    }

    #[test]
    fn rcu_estimate_basic_behavior() {
        // single user: no inner Monte Carlo at all, fully closed-form
        let cfg1 = MacConfig::new(
            60,
            PowerAllocation::symmetric(1, 1.0).unwrap(),
            vec![4],
            CodebookMode::Ensemble,
        )
        .unwrap();
        let e = rcu_mc_estimate(&cfg1, 2_000, 1, 31, 0.95).unwrap();
        assert!(e.point > 0.0 && e.point < 0.2, "single-user bound {}", e.point);

        // deterministic
        let e2 = rcu_mc_estimate(&cfg1, 2_000, 1, 31, 0.95).unwrap();
        assert_eq!(e.point, e2.point);

        // more messages → larger bound
        let cfg_big = MacConfig::new(
            60,
            PowerAllocation::symmetric(1, 1.0).unwrap(),
            vec![64],
            CodebookMode::Ensemble,
        )
        .unwrap();
        let big = rcu_mc_estimate(&cfg_big, 2_000, 1, 31, 0.95).unwrap();
        assert!(big.point > e.point);
    }

    #[test]
    fn rcu_rejects_too_many_users() {
        let cfg = MacConfig::new(
            8,
            PowerAllocation::symmetric(4, 1.0).unwrap(),
            vec![2, 2, 2, 2],
            CodebookMode::Ensemble,
        )
        .unwrap();
        assert!(rcu_mc_estimate(&cfg, 10, 10, 1, 0.95).is_err());
    }
}
