//! Spherical codewords and codebooks.
//!
//! Every codeword lies exactly on the power sphere: a length-`n` codeword
//! at power `P` has `‖x‖² = nP`, so the per-block power constraint holds
//! with equality and deterministically — there is no power-violation event
//! to account for. Rateless codewords extend this to a whole decode
//! schedule: each segment between consecutive decode times is drawn on its
//! own sphere, which makes *every prefix* at a decode time sit on the
//! corresponding sphere.
//!
//! Codebooks serialize to a small binary format (little-endian throughout):
//!
//! ```text
//! magic  b"FBLC" | version u32 = 1 | n u64 | m u64 | P f64 | m·n f64 codewords
//! ```
//!
//! rows concatenated in message order, no padding, no trailing bytes.

use crate::error::{Error, Result};
use crate::linalg::kahan_sum;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::io::{Read, Write};
use std::path::Path;

/// Relative tolerance for the on-sphere invariant `‖x‖² = nP`.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// File magic for serialized codebooks.
pub const CODEBOOK_MAGIC: [u8; 4] = *b"FBLC";

/// Serialized codebook format version.
pub const CODEBOOK_VERSION: u32 = 1;

/// Sanity cap on `m · n` when reading a codebook, so a corrupt header
/// cannot request an absurd allocation.
const MAX_READ_ELEMENTS: u64 = 1 << 31;

fn norm_sq(coords: &[f64]) -> f64 {
    // compensated: the invariant check must not drown in rounding at
    // blocklengths in the millions
    let squares: Vec<f64> = coords.iter().map(|x| x * x).collect();
    kahan_sum(&squares)
}

fn check_norm(coords: &[f64], power: f64, what: &str) -> Result<()> {
    let target = coords.len() as f64 * power;
    let got = norm_sq(coords);
    if (got - target).abs() > NORM_TOLERANCE * target {
        return Err(Error::Domain(format!(
            "{what}: ‖x‖² = {got} but n·P = {target} (length {}, power {power})",
            coords.len()
        )));
    }
    Ok(())
}

/// A codeword on the radius-`√(nP)` sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCodeword {
    coords: Vec<f64>,
    power: f64,
}

impl SphericalCodeword {
    /// Validates the on-sphere invariant (relative tolerance
    /// [`NORM_TOLERANCE`]).
    pub fn new(coords: Vec<f64>, power: f64) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Size("SphericalCodeword: empty".into()));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::Domain(format!(
                "SphericalCodeword: power {power} must be positive and finite"
            )));
        }
        check_norm(&coords, power, "SphericalCodeword")?;
        Ok(Self { coords, power })
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// Uniform sample from the radius-`√(nP)` sphere: normalize an i.i.d.
/// Gaussian vector (rotation invariance gives uniformity on the shell).
pub fn sample_sphere(n: usize, power: f64, rng: &mut ChaCha8Rng) -> Result<SphericalCodeword> {
    if n == 0 {
        return Err(Error::Size("sample_sphere: n ≥ 1 required".into()));
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Domain(format!(
            "sample_sphere: power {power} must be positive and finite"
        )));
    }
    let target = (n as f64 * power).sqrt();
    loop {
        let mut coords: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = norm_sq(&coords).sqrt();
        // a zero draw has probability zero; redraw rather than divide by it
        if norm > 0.0 {
            let scale = target / norm;
            for x in &mut coords {
                *x *= scale;
            }
            return SphericalCodeword::new(coords, power);
        }
    }
}

/// The statistic `√n · ⟨w, x⟩ / (‖w‖ ‖x‖)`.
///
/// When `x` is uniform on any origin-centered sphere and `w` is fixed (or
/// independent of `x`), this follows the single-coordinate law of a
/// radius-`√n` sphere — the bridge between decoder inner products and
/// [`crate::specfun::sphere_coord_cdf`].
pub fn inner_product_q(w: &[f64], x: &[f64]) -> Result<f64> {
    if w.len() != x.len() || w.is_empty() {
        return Err(Error::Size(format!(
            "inner_product_q: lengths {} and {}",
            w.len(),
            x.len()
        )));
    }
    let nw = norm_sq(w).sqrt();
    let nx = norm_sq(x).sqrt();
    if nw == 0.0 || nx == 0.0 {
        return Err(Error::Domain("inner_product_q: zero vector".into()));
    }
    Ok((w.len() as f64).sqrt() * crate::linalg::kahan_dot(w, x) / (nw * nx))
}

/// A rateless codeword: independent spherical segments between consecutive
/// decode times, so the prefix at every decode time is itself on-sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcatCodeword {
    coords: Vec<f64>,
    times: Vec<usize>,
    power: f64,
}

impl ConcatCodeword {
    /// Validates strictly increasing decode times, total length, and the
    /// on-sphere invariant of every prefix at a decode time.
    pub fn new(coords: Vec<f64>, times: Vec<usize>, power: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Schedule("ConcatCodeword: no decode times".into()));
        }
        if times[0] == 0 || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Schedule(format!(
                "ConcatCodeword: decode times {times:?} must be strictly increasing and positive"
            )));
        }
        if coords.len() != *times.last().expect("nonempty") {
            return Err(Error::Size(format!(
                "ConcatCodeword: {} coordinates for final decode time {}",
                coords.len(),
                times.last().expect("nonempty")
            )));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::Domain(format!(
                "ConcatCodeword: power {power} must be positive and finite"
            )));
        }
        for &t in &times {
            check_norm(&coords[..t], power, "ConcatCodeword prefix")?;
        }
        Ok(Self { coords, times, power })
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// Full coordinates out to the last decode time.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The codeword as seen at decode time `times[t]`.
    pub fn prefix(&self, t: usize) -> &[f64] {
        &self.coords[..self.times[t]]
    }
}

/// Sample a rateless codeword for the decode schedule `times`: segment
/// `(times[t−1], times[t]]` is an independent uniform sample from the
/// radius-`√((times[t]−times[t−1]) P)` sphere.
pub fn sample_concat_sphere(
    times: &[usize],
    power: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ConcatCodeword> {
    if times.is_empty() {
        return Err(Error::Schedule("sample_concat_sphere: no decode times".into()));
    }
    let mut coords = Vec::with_capacity(*times.last().expect("nonempty"));
    let mut prev = 0usize;
    for &t in times {
        if t <= prev {
            return Err(Error::Schedule(format!(
                "sample_concat_sphere: decode times {times:?} must be strictly increasing"
            )));
        }
        let segment = sample_sphere(t - prev, power, rng)?;
        coords.extend_from_slice(segment.coords());
        prev = t;
    }
    ConcatCodeword::new(coords, times.to_vec(), power)
}

/// A codebook: `m` codewords of length `n` at power `P`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n: usize,
    power: f64,
    data: Vec<f64>,
}

impl Codebook {
    /// From row-major coordinates; every row must satisfy the on-sphere
    /// invariant.
    pub fn from_flat(n: usize, power: f64, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.is_empty() || !data.len().is_multiple_of(n) {
            return Err(Error::Size(format!(
                "Codebook: {} coordinates do not form rows of length {n}",
                data.len()
            )));
        }
        for (i, row) in data.chunks_exact(n).enumerate() {
            check_norm(row, power, &format!("Codebook row {i}"))?;
        }
        Ok(Self { n, power, data })
    }

    /// Draw `m` independent uniform codewords.
    pub fn sample(n: usize, m: usize, power: f64, rng: &mut ChaCha8Rng) -> Result<Self> {
        if m == 0 {
            return Err(Error::Size("Codebook::sample: m ≥ 1 required".into()));
        }
        let mut data = Vec::with_capacity(m * n);
        for _ in 0..m {
            data.extend_from_slice(sample_sphere(n, power, rng)?.coords());
        }
        Ok(Self { n, power, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    // ---- binary serialization ------------------------------------------

    /// Write the binary codebook format to `w`.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&CODEBOOK_MAGIC)?;
        w.write_all(&CODEBOOK_VERSION.to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.m() as u64).to_le_bytes())?;
        w.write_all(&self.power.to_le_bytes())?;
        for x in &self.data {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    /// Read a binary codebook from `r`, validating magic, version, layout,
    /// trailing bytes, and the on-sphere invariant of every row.
    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != CODEBOOK_MAGIC {
            return Err(Error::Format(format!(
                "codebook: bad magic {magic:02x?}, expected {CODEBOOK_MAGIC:02x?}"
            )));
        }
        let mut buf4 = [0u8; 4];
        r.read_exact(&mut buf4)?;
        let version = u32::from_le_bytes(buf4);
        if version != CODEBOOK_VERSION {
            return Err(Error::Format(format!(
                "codebook: unsupported version {version}"
            )));
        }
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf8)?;
        let n = u64::from_le_bytes(buf8);
        r.read_exact(&mut buf8)?;
        let m = u64::from_le_bytes(buf8);
        r.read_exact(&mut buf8)?;
        let power = f64::from_le_bytes(buf8);
        if n == 0 || m == 0 {
            return Err(Error::Format(format!("codebook: empty shape {m}×{n}")));
        }
        if n.checked_mul(m).is_none_or(|e| e > MAX_READ_ELEMENTS) {
            return Err(Error::Format(format!(
                "codebook: declared shape {m}×{n} exceeds the read cap"
            )));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::Format(format!("codebook: bad power {power}")));
        }
        let count = (n * m) as usize;
        let mut data = vec![0.0f64; count];
        for x in &mut data {
            r.read_exact(&mut buf8)?;
            *x = f64::from_le_bytes(buf8);
        }
        let mut trailing = [0u8; 1];
        match r.read(&mut trailing)? {
            0 => {}
            _ => {
                return Err(Error::Format(
                    "codebook: trailing bytes after codeword data".into(),
                ))
            }
        }
        Self::from_flat(n as usize, power, data)
    }

    /// Write the codebook to a file.
    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        use std::io::Write as _;
        f.flush()?;
        Ok(())
    }

    /// Read a codebook from a file.
    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::unit_rng;
    use std::io::Cursor;

    #[test]
    fn sampled_codeword_is_on_sphere() {
        let mut rng = unit_rng(1, 0);
        for &(n, p) in &[(3usize, 1.0), (100, 0.5), (10_000, 2.5)] {
            let c = sample_sphere(n, p, &mut rng).unwrap();
            let target = n as f64 * p;
            assert!((norm_sq(c.coords()) - target).abs() <= NORM_TOLERANCE * target);
        }
    }

    #[test]
    fn codeword_guards() {
        assert!(SphericalCodeword::new(vec![], 1.0).is_err());
        assert!(SphericalCodeword::new(vec![1.0], 0.0).is_err());
        // off-sphere by 1%
        assert!(SphericalCodeword::new(vec![1.01], 1.0).is_err());
        assert!(SphericalCodeword::new(vec![1.0], 1.0).is_ok());
    }

    #[test]
    fn q_statistic_matches_sphere_law_moments() {
        // probability integral transform: F(Q) should look Uniform(0, 1)
        let n = 8;
        let mut rng = unit_rng(2, 0);
        let w: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0).sin()).collect();
        let trials = 20_000;
        let mut us = Vec::with_capacity(trials);
        for _ in 0..trials {
            let x = sample_sphere(n, 1.3, &mut rng).unwrap();
            let q = inner_product_q(&w, x.coords()).unwrap();
            us.push(crate::specfun::sphere_coord_cdf(q, n).unwrap());
        }
        let mean: f64 = us.iter().sum::<f64>() / trials as f64;
        let var: f64 = us.iter().map(|u| (u - mean) * (u - mean)).sum::<f64>() / trials as f64;
        // mean sd ≈ (1/√12)/√trials ≈ 0.002
        assert!((mean - 0.5).abs() < 0.01, "PIT mean {mean}");
        assert!((var - 1.0 / 12.0).abs() < 0.005, "PIT variance {var}");
    }

    #[test]
    fn concat_prefixes_are_on_sphere() {
        let mut rng = unit_rng(3, 0);
        let times = [3usize, 5, 9, 20];
        let c = sample_concat_sphere(&times, 0.7, &mut rng).unwrap();
        for (t, &nt) in times.iter().enumerate() {
            assert_eq!(c.prefix(t).len(), nt);
            let target = nt as f64 * 0.7;
            assert!((norm_sq(c.prefix(t)) - target).abs() <= NORM_TOLERANCE * target);
        }
    }

    #[test]
    fn concat_guards() {
        let mut rng = unit_rng(4, 0);
        assert!(sample_concat_sphere(&[], 1.0, &mut rng).is_err());
        assert!(sample_concat_sphere(&[5, 5], 1.0, &mut rng).is_err());
        assert!(sample_concat_sphere(&[5, 3], 1.0, &mut rng).is_err());
        // a plain spherical vector is NOT prefix-valid for two decode times
        let full = sample_sphere(10, 1.0, &mut rng).unwrap();
        assert!(ConcatCodeword::new(full.coords().to_vec(), vec![5, 10], 1.0).is_err());
    }

    #[test]
    fn codebook_round_trip_is_exact() {
        let mut rng = unit_rng(5, 0);
        let cb = Codebook::sample(17, 9, 1.25, &mut rng).unwrap();
        let mut bytes = Vec::new();
        cb.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 4 + 4 + 8 + 8 + 8 + 17 * 9 * 8);
        let back = Codebook::read_from(&mut Cursor::new(&bytes)).unwrap();
        assert_eq!(cb, back); // bit-exact: f64 round-trips through LE bytes
    }

    #[test]
    fn codebook_rejects_malformed_input() {
        let mut rng = unit_rng(6, 0);
        let cb = Codebook::sample(4, 3, 1.0, &mut rng).unwrap();
        let mut bytes = Vec::new();
        cb.write_to(&mut bytes).unwrap();

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            Codebook::read_from(&mut Cursor::new(&bad_magic)),
            Err(Error::Format(_))
        ));

        let mut bad_version = bytes.clone();
        bad_version[4] = 9;
        assert!(Codebook::read_from(&mut Cursor::new(&bad_version)).is_err());

        let truncated = &bytes[..bytes.len() - 3];
        assert!(Codebook::read_from(&mut Cursor::new(truncated)).is_err());

        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(matches!(
            Codebook::read_from(&mut Cursor::new(&trailing)),
            Err(Error::Format(_))
        ));

        // corrupt one coordinate: the on-sphere check catches it
        let mut corrupt = bytes.clone();
        let off = bytes.len() - 5;
        corrupt[off] ^= 0x40;
        assert!(Codebook::read_from(&mut Cursor::new(&corrupt)).is_err());
    }

    #[test]
    fn codebook_file_round_trip() {
        let mut rng = unit_rng(7, 0);
        let cb = Codebook::sample(8, 4, 2.0, &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("book.fblc");
        cb.write_file(&path).unwrap();
        assert_eq!(Codebook::read_file(&path).unwrap(), cb);
    }

    #[test]
    fn identical_seeds_reproduce_codebooks() {
        let a = Codebook::sample(32, 5, 1.0, &mut unit_rng(42, 7)).unwrap();
        let b = Codebook::sample(32, 5, 1.0, &mut unit_rng(42, 7)).unwrap();
        assert_eq!(a, b);
        let c = Codebook::sample(32, 5, 1.0, &mut unit_rng(42, 8)).unwrap();
        assert_ne!(a, c);
    }
}
