//! Detrending moving average analysis: profile construction, moving-average
//! detrending, segment fluctuations, and the overall fluctuation curve F2(s).
//!
//! The moving window is placed by the position parameter theta: 0 uses only
//! past values (backward), 0.5 centres the window, 1 uses only future values
//! (forward). All functions here are pure; identical inputs give bit-identical
//! outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cumulative sums of the mean-removed series.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    /// y(t) = sum_{j<=t} (a(j) - mean), t = 0..N-1. The endpoint is zero up
    /// to floating tolerance because the mean is removed.
    pub y: Vec<f64>,
    /// The sample mean that was removed.
    pub mean: f64,
}

/// Moving average restricted to positions whose full window fits inside the
/// profile. `values[i]` belongs to profile index `offset + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingAverage {
    pub offset: usize,
    pub values: Vec<f64>,
}

/// Scale grid and window placement for a DMA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmaConfig {
    /// Window position parameter in [0, 1].
    pub theta: f64,
    /// Strictly increasing scales, each >= 3.
    pub scales: Vec<usize>,
}

impl DmaConfig {
    pub fn new(theta: f64, scales: Vec<usize>) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidConfig(format!(
                "theta must lie in [0,1], got {theta}"
            )));
        }
        if scales.is_empty() {
            return Err(Error::InvalidConfig("scale grid is empty".into()));
        }
        if scales[0] < 3 {
            return Err(Error::InvalidConfig(format!(
                "smallest scale {} is below the minimum of 3",
                scales[0]
            )));
        }
        if !scales.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "scale grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { theta, scales })
    }

    /// Default grid for a series of length `n`: `n_scales` log-spaced
    /// integers from s_min to ⌊n/10⌋, duplicates removed.
    pub fn default_for_len(n: usize, theta: f64) -> Result<Self> {
        Self::with_grid(n, theta, 10, n / 10, 40)
    }

    pub fn with_grid(
        n: usize,
        theta: f64,
        s_min: usize,
        s_max: usize,
        n_scales: usize,
    ) -> Result<Self> {
        if s_max > n / 10 {
            return Err(Error::InvalidConfig(format!(
                "s_max {s_max} exceeds N/10 = {} (need >= 10 segments per scale)",
                n / 10
            )));
        }
        Self::new(theta, log_grid(s_min, s_max, n_scales)?)
    }

    /// Like [`with_grid`](Self::with_grid), but every scale is rounded up to
    /// an odd integer. Odd windows keep θ=0.5 placement exactly symmetric,
    /// so the moving average annihilates linear profile trends instead of
    /// leaving the half-sample offset of even windows; this matters for
    /// measure-like series whose negative-q moments are dominated by near-
    /// empty windows.
    pub fn with_odd_grid(
        n: usize,
        theta: f64,
        s_min: usize,
        s_max: usize,
        n_scales: usize,
    ) -> Result<Self> {
        if s_max > n / 10 {
            return Err(Error::InvalidConfig(format!(
                "s_max {s_max} exceeds N/10 = {} (need >= 10 segments per scale)",
                n / 10
            )));
        }
        let mut scales = log_grid(s_min, s_max, n_scales)?;
        for s in &mut scales {
            if *s % 2 == 0 {
                *s += 1;
            }
        }
        if *scales.last().unwrap() > n / 10 {
            *scales.last_mut().unwrap() -= 2;
        }
        scales.dedup();
        Self::new(theta, scales)
    }

    /// Checks the grid against a concrete series length.
    pub fn validate_for_len(&self, n: usize) -> Result<()> {
        let s_max = *self.scales.last().expect("validated non-empty");
        if s_max > n / 10 {
            return Err(Error::InvalidConfig(format!(
                "largest scale {s_max} exceeds N/10 = {} for N = {n}",
                n / 10
            )));
        }
        Ok(())
    }
}

/// Log-spaced integer grid from `s_min` to `s_max` with up to `n_scales`
/// points; collisions after rounding are deduplicated.
pub fn log_grid(s_min: usize, s_max: usize, n_scales: usize) -> Result<Vec<usize>> {
    if s_min < 3 || s_max < s_min || n_scales == 0 {
        return Err(Error::InvalidConfig(format!(
            "bad grid request s_min={s_min}, s_max={s_max}, n_scales={n_scales}"
        )));
    }
    if n_scales == 1 || s_min == s_max {
        return Ok(vec![s_min]);
    }
    let (lo, hi) = ((s_min as f64).ln(), (s_max as f64).ln());
    let step = (hi - lo) / (n_scales - 1) as f64;
    let mut grid: Vec<usize> = (0..n_scales)
        .map(|i| (lo + step * i as f64).exp().round() as usize)
        .collect();
    grid.dedup();
    grid[0] = s_min;
    *grid.last_mut().unwrap() = s_max;
    grid.dedup();
    Ok(grid)
}

/// Cumulative sums of the mean-removed series (compensated summation keeps
/// the forced-zero endpoint at machine-precision scale).
pub fn profile(series: &[f64]) -> Result<Profile> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let mut y = Vec::with_capacity(series.len());
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for &a in series {
        let term = a - mean;
        let t = sum + term;
        // Neumaier correction: recover the bits lost in whichever operand
        // was smaller.
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
        y.push(sum + comp);
    }
    Ok(Profile { y, mean })
}

/// Extents of an s-point window at position parameter theta: `back` past
/// points and `fwd` future points around t, with back + fwd = s - 1.
pub fn window_extents(scale: usize, theta: f64) -> (usize, usize) {
    let span = (scale - 1) as f64;
    let fwd = (span * theta).floor() as usize;
    (scale - 1 - fwd, fwd)
}

/// Moving average over windows of `scale` points placed by `theta`,
/// evaluated wherever the whole window lies inside the profile.
pub fn moving_average(y: &[f64], scale: usize, theta: f64) -> Result<MovingAverage> {
    let n = y.len();
    if scale == 0 || scale > n {
        return Err(Error::ScaleExceedsLength { scale, len: n });
    }
    let (back, fwd) = window_extents(scale, theta);

    // Window sums via prefix sums: sum y[t-back ..= t+fwd].
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in y {
        acc += v;
        prefix.push(acc);
    }

    let inv = 1.0 / scale as f64;
    let values = (back..n - fwd)
        .map(|t| (prefix[t + fwd + 1] - prefix[t - back]) * inv)
        .collect();
    Ok(MovingAverage {
        offset: back,
        values,
    })
}

/// Residuals y(t) - ỹ(t) on the valid range; length N - s + 1.
pub fn residuals(y: &[f64], scale: usize, theta: f64) -> Result<Vec<f64>> {
    let ma = moving_average(y, scale, theta)?;
    Ok(ma
        .values
        .iter()
        .enumerate()
        .map(|(i, &m)| y[ma.offset + i] - m)
        .collect())
}

/// Root-mean-square of each disjoint `scale`-length block of the residual
/// sequence; the trailing remainder is discarded.
pub fn segment_fluctuations(eps: &[f64], scale: usize) -> Result<Vec<f64>> {
    if scale == 0 || eps.len() < scale {
        return Err(Error::InsufficientData {
            scale,
            len: eps.len(),
        });
    }
    Ok(eps
        .chunks_exact(scale)
        .map(|block| {
            let ss: f64 = block.iter().map(|e| e * e).sum();
            (ss / scale as f64).sqrt()
        })
        .collect())
}

/// Segment fluctuations of a profile at one scale: detrend, then block RMS.
pub fn scale_fluctuations(y: &[f64], scale: usize, theta: f64) -> Result<Vec<f64>> {
    segment_fluctuations(&residuals(y, scale, theta)?, scale)
}

/// q-generalized aggregation of the segment fluctuations at one scale.
///
/// q = 2 is the plain root mean square of Eq-style F2; q = 0 takes the
/// log-mean limit. Zero segments are excluded from the sum: for q > 0 the
/// divisor stays N_s (a zero contributes nothing anyway), while for q <= 0
/// the divisor shrinks to the surviving count, and more than 1% zeros is
/// fatal because negative moments diverge on them.
pub fn aggregate_moment(fv: &[f64], q: f64, scale: usize) -> Result<f64> {
    let segments = fv.len();
    let zeros = fv.iter().filter(|&&v| v == 0.0).count();
    if zeros == segments {
        return Err(Error::DegenerateSeries);
    }
    if q <= 0.0 && zeros > 0 {
        if 100 * zeros > segments {
            return Err(Error::NegativeMomentUnstable {
                q,
                scale,
                zeros,
                segments,
            });
        }
        log::warn!("scale {scale}: excluding {zeros}/{segments} zero segments from q = {q} moment");
    }
    let live = fv.iter().copied().filter(|&v| v > 0.0);
    if q == 0.0 {
        let log_sum: f64 = live.map(f64::ln).sum();
        Ok((log_sum / (segments - zeros) as f64).exp())
    } else {
        let sum: f64 = live.map(|v| v.powf(q)).sum();
        let divisor = if q > 0.0 { segments } else { segments - zeros };
        Ok((sum / divisor as f64).powf(1.0 / q))
    }
}

/// One (s, F) point per scale at fixed moment order q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationCurve {
    pub q: f64,
    pub theta: f64,
    /// (scale, fluctuation) pairs; scales strictly increasing, F > 0.
    pub points: Vec<(usize, f64)>,
}

impl FluctuationCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points as (ln s, ln F) pairs for log-log fitting.
    pub fn log_points(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|&(s, f)| ((s as f64).ln(), f.ln()))
            .collect()
    }

    /// Copy restricted to scales in [s_lo, s_hi].
    pub fn restrict(&self, s_lo: f64, s_hi: f64) -> FluctuationCurve {
        FluctuationCurve {
            q: self.q,
            theta: self.theta,
            points: self
                .points
                .iter()
                .copied()
                .filter(|&(s, _)| (s as f64) >= s_lo && (s as f64) <= s_hi)
                .collect(),
        }
    }
}

/// Shared implementation of the overall fluctuation curve for any moment
/// order; `f2_curve` and the q-generalized front end both call this, so the
/// q = 2 outputs agree bit for bit.
pub(crate) fn moment_curve(series: &[f64], cfg: &DmaConfig, q: f64) -> Result<FluctuationCurve> {
    let prof = profile(series)?;
    cfg.validate_for_len(series.len())?;
    let mut points = Vec::with_capacity(cfg.scales.len());
    for &s in &cfg.scales {
        let fv = scale_fluctuations(&prof.y, s, cfg.theta)?;
        let f = aggregate_moment(&fv, q, s)?;
        if f > 0.0 && f.is_finite() {
            points.push((s, f));
        } else {
            log::warn!("dropping scale {s}: aggregated fluctuation {f} at q = {q}");
        }
    }
    if points.is_empty() {
        return Err(Error::DegenerateSeries);
    }
    Ok(FluctuationCurve {
        q,
        theta: cfg.theta,
        points,
    })
}

/// Second-order overall fluctuation curve F2(s) over the configured grid.
pub fn f2_curve(series: &[f64], cfg: &DmaConfig) -> Result<FluctuationCurve> {
    moment_curve(series, cfg, 2.0)
}
