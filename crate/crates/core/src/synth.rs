//! Synthetic series with analytically known scaling, plus shuffled surrogates.
//!
//! All generators are deterministic per seed. The RNG is pinned to ChaCha12
//! so that a `(spec, seed)` pair replays to the same bytes on every run.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What to synthesize. Parameters live on the variant that needs them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Fractional Gaussian noise with exponent `hurst`, length `n`.
    Fgn { hurst: f64, n: usize },
    /// Binomial multiplicative cascade; length is `2^levels`.
    /// `randomized` permutes the (p, 1-p) split per interval.
    Cascade {
        p: f64,
        levels: u32,
        randomized: bool,
    },
    /// Independent standard Gaussian samples.
    White { n: usize },
    /// White noise plus `amplitude`-scaled fGn(`hurst`): a two-regime
    /// series whose fluctuation curve crosses over where the two
    /// component curves intersect.
    Composite {
        hurst: f64,
        amplitude: f64,
        n: usize,
    },
}

/// A fully specified, replayable generator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Vec<f64>> {
        match self.kind {
            GeneratorKind::Fgn { hurst, n } => gen_fgn(hurst, n, self.seed),
            GeneratorKind::Cascade {
                p,
                levels,
                randomized,
            } => gen_cascade(p, levels, if randomized { Some(self.seed) } else { None }),
            GeneratorKind::White { n } => gen_white(n, self.seed),
            GeneratorKind::Composite {
                hurst,
                amplitude,
                n,
            } => gen_composite(hurst, amplitude, n, self.seed),
        }
    }
}

/// Autocovariance of unit-variance fGn at integer lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let k = k as f64;
    let h2 = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).powf(h2))
}

/// Exact fractional Gaussian noise via circulant embedding.
///
/// The covariance sequence is embedded in a circulant of power-of-two size
/// `m >= 2n`; its eigenvalues are the FFT of the first row, and one FFT of
/// Hermitian-symmetric Gaussian weights yields a sample with exactly the
/// target autocovariance. Deterministic per seed.
pub fn gen_fgn(hurst: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::InvalidGenerator(format!(
            "fgn requires 0 < H < 1, got {hurst}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidGenerator("fgn requires n >= 1".into()));
    }
    if n == 1 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        return Ok(vec![rng.sample(StandardNormal)]);
    }

    let m = (2 * n).next_power_of_two();
    let half = m / 2;

    // First row of the circulant: gamma(0..=half) mirrored.
    let mut row: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); m];
    for (j, slot) in row.iter_mut().enumerate().take(half + 1) {
        *slot = Complex64::new(fgn_autocovariance(hurst, j), 0.0);
    }
    for j in 1..half {
        row[m - j] = row[j];
    }

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);

    let max_eig = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
    let mut eigen = Vec::with_capacity(m);
    for c in &row {
        if c.re < -1e-8 * max_eig {
            return Err(Error::InvalidGenerator(format!(
                "circulant embedding not positive semidefinite (eigenvalue {})",
                c.re
            )));
        }
        eigen.push(c.re.max(0.0));
    }

    // Hermitian-symmetric Gaussian weights: real at indices 0 and m/2,
    // conjugate pairs elsewhere.
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut spectrum: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); m];
    let z0: f64 = rng.sample(StandardNormal);
    spectrum[0] = Complex64::new(eigen[0].sqrt() * z0, 0.0);
    for k in 1..half {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let w = (eigen[k] / 2.0).sqrt();
        spectrum[k] = Complex64::new(w * a, w * b);
        spectrum[m - k] = spectrum[k].conj();
    }
    let zh: f64 = rng.sample(StandardNormal);
    spectrum[half] = Complex64::new(eigen[half].sqrt() * zh, 0.0);

    fft.process(&mut spectrum);

    let scale = 1.0 / (m as f64).sqrt();
    Ok(spectrum[..n].iter().map(|c| c.re * scale).collect())
}

/// Binomial multiplicative cascade measure of length `2^levels`.
///
/// Splits every interval's mass into fractions `p` (left) and `1-p`
/// (right); with a seed the two fractions are swapped per interval with
/// probability 1/2.
pub fn gen_cascade(p: f64, levels: u32, seed: Option<u64>) -> Result<Vec<f64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidGenerator(format!(
            "cascade requires 0 < p < 1, got {p}"
        )));
    }
    if levels > 30 {
        return Err(Error::InvalidGenerator(format!(
            "cascade levels {levels} exceeds 30 (2^30 points)"
        )));
    }
    let mut rng = seed.map(ChaCha12Rng::seed_from_u64);
    let mut mass = vec![1.0_f64];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(mass.len() * 2);
        for &x in &mass {
            let swap = rng.as_mut().map(|r| r.random::<bool>()).unwrap_or(false);
            let (left, right) = if swap { (1.0 - p, p) } else { (p, 1.0 - p) };
            next.push(x * left);
            next.push(x * right);
        }
        mass = next;
    }
    Ok(mass)
}

/// Analytic mass exponents of the binomial cascade: -log2(p^q + (1-p)^q).
pub fn analytic_cascade_tau(p: f64, q: f64) -> f64 {
    -(p.powf(q) + (1.0 - p).powf(q)).log2()
}

/// Independent standard Gaussian samples.
pub fn gen_white(n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidGenerator("white requires n >= 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| rng.sample(StandardNormal)).collect())
}

/// White noise plus `amplitude * fgn(hurst)` for crossover studies.
///
/// The white component uses `seed`, the fGn component a fixed offset of it,
/// so the two streams are independent but the pair replays per seed.
pub fn gen_composite(hurst: f64, amplitude: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if amplitude <= 0.0 {
        return Err(Error::InvalidGenerator(format!(
            "composite requires amplitude > 0, got {amplitude}"
        )));
    }
    let white = gen_white(n, seed)?;
    let slow = gen_fgn(hurst, n, seed.wrapping_add(0x9e37_79b9_7f4a_7c15))?;
    Ok(white
        .iter()
        .zip(&slow)
        .map(|(w, s)| w + amplitude * s)
        .collect())
}

/// Fisher-Yates shuffle of a copy of `series`; multiset of values is
/// preserved exactly. Deterministic per seed.
pub fn shuffle(series: &[f64], seed: u64) -> Vec<f64> {
    let mut out = series.to_vec();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    out.shuffle(&mut rng);
    out
}
