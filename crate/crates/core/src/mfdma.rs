//! Multifractal generalization of the DMA fluctuation analysis: q-order
//! fluctuation curves, generalized Hurst exponents h(q), mass exponents
//! τ(q), and the singularity spectrum f(α) via a numerical Legendre
//! transform.

use serde::{Deserialize, Serialize};

use crate::dma::{self, DmaConfig, FluctuationCurve};
use crate::error::{Error, Result};
use crate::scalingfit;

/// Strictly increasing grid of moment orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub values: Vec<f64>,
}

impl QGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidConfig(
                "q grid needs at least 3 values".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "q grid contains non-finite value".into(),
            ));
        }
        if !values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "q grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { values })
    }

    /// Uniform grid from `lo` to `hi` in steps of `step` (exact arithmetic
    /// on the integer multiples, so 0 lands exactly on 0.0).
    pub fn uniform(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if step <= 0.0 || hi <= lo {
            return Err(Error::InvalidConfig(format!(
                "bad q grid request lo={lo}, hi={hi}, step={step}"
            )));
        }
        let n = ((hi - lo) / step).round() as i64;
        Self::new((0..=n).map(|i| lo + i as f64 * step).collect())
    }
}

impl Default for QGrid {
    /// −10 to 10 in steps of 0.5, including 0.
    fn default() -> Self {
        Self::uniform(-10.0, 10.0, 0.5).expect("static grid is valid")
    }
}

/// Segment fluctuations per scale, computed once and shared across all q.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFluctuations {
    pub scale: usize,
    pub fv: Vec<f64>,
}

/// Detrend the profile at every configured scale.
pub fn all_scale_fluctuations(series: &[f64], cfg: &DmaConfig) -> Result<Vec<ScaleFluctuations>> {
    cfg.validate_for_len(series.len())?;
    let prof = dma::profile(series)?;
    cfg.scales
        .iter()
        .map(|&s| {
            Ok(ScaleFluctuations {
                scale: s,
                fv: dma::scale_fluctuations(&prof.y, s, cfg.theta)?,
            })
        })
        .collect()
}

fn curve_from_fluctuations(
    fvs: &[ScaleFluctuations],
    q: f64,
    theta: f64,
) -> Result<FluctuationCurve> {
    let mut points = Vec::with_capacity(fvs.len());
    for sf in fvs {
        let f = dma::aggregate_moment(&sf.fv, q, sf.scale)?;
        if f > 0.0 && f.is_finite() {
            points.push((sf.scale, f));
        } else {
            log::warn!(
                "dropping scale {}: aggregated fluctuation {f} at q = {q}",
                sf.scale
            );
        }
    }
    if points.is_empty() {
        return Err(Error::DegenerateSeries);
    }
    Ok(FluctuationCurve { q, theta, points })
}

/// q-order overall fluctuation curve. At q = 2 this is the same code path
/// as `dma::f2_curve`, so the two agree bit for bit.
pub fn fq_curve(series: &[f64], cfg: &DmaConfig, q: f64) -> Result<FluctuationCurve> {
    dma::moment_curve(series, cfg, q)
}

/// Per-q scaling exponents from log-log fits over `fit_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstTable {
    pub q: Vec<f64>,
    pub h: Vec<f64>,
    pub r2: Vec<f64>,
    pub theta: f64,
    /// Scale range the per-q fits used.
    pub fit_range: (f64, f64),
}

/// Picks the scale range for the per-q fits when the caller leaves it open:
/// backward and forward variants scale cleanly over the whole grid, while
/// the centred variant shows a crossover, so there the fit is restricted to
/// the post-crossover regime found on the q = 2 curve.
fn resolve_fit_range(
    fvs: &[ScaleFluctuations],
    theta: f64,
    fit_range: Option<(f64, f64)>,
) -> (f64, f64) {
    if let Some(r) = fit_range {
        return r;
    }
    let full = (
        fvs.first().map(|sf| sf.scale as f64).unwrap_or(0.0),
        fvs.last().map(|sf| sf.scale as f64).unwrap_or(f64::MAX),
    );
    if theta != 0.5 {
        return full;
    }
    let curve = match curve_from_fluctuations(fvs, 2.0, theta) {
        Ok(c) => c,
        Err(_) => return full,
    };
    match scalingfit::fit_crossover(&curve) {
        Ok(fit) if !scalingfit::detect_outlier_no_crossover(&fit) => {
            let kept = curve
                .points
                .iter()
                .filter(|&&(s, _)| s as f64 >= fit.s_cross)
                .count();
            if kept >= 3 {
                (fit.s_cross, full.1)
            } else {
                full
            }
        }
        _ => full,
    }
}

/// Generalized Hurst exponents h(q) over the grid; one OLS log-log fit per
/// q, all sharing the per-scale segment fluctuations.
pub fn generalized_hurst(
    series: &[f64],
    cfg: &DmaConfig,
    qgrid: &QGrid,
    fit_range: Option<(f64, f64)>,
) -> Result<HurstTable> {
    let fvs = all_scale_fluctuations(series, cfg)?;
    let range = resolve_fit_range(&fvs, cfg.theta, fit_range);
    let mut h = Vec::with_capacity(qgrid.values.len());
    let mut r2 = Vec::with_capacity(qgrid.values.len());
    for &q in &qgrid.values {
        let curve = curve_from_fluctuations(&fvs, q, cfg.theta)?;
        let fit = scalingfit::fit_single_powerlaw(&curve, range.0, range.1)?;
        h.push(fit.h);
        r2.push(fit.r2);
    }
    Ok(HurstTable {
        q: qgrid.values.clone(),
        h,
        r2,
        theta: cfg.theta,
        fit_range: range,
    })
}

/// Mass exponents τ(q) = q·h(q) − 1 (fractal support dimension 1).
pub fn mass_exponents(table: &HurstTable) -> Vec<f64> {
    table
        .q
        .iter()
        .zip(&table.h)
        .map(|(q, h)| q * h - 1.0)
        .collect()
}

/// Singularity strengths α = dτ/dq (central differences, one-sided at the
/// ends) and spectrum values f = q·α − τ. Requires a uniform q grid.
pub fn legendre_spectrum(q: &[f64], tau: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = q.len();
    if n != tau.len() {
        return Err(Error::InvalidConfig(format!(
            "q and tau length mismatch: {n} vs {}",
            tau.len()
        )));
    }
    if n < 3 {
        return Err(Error::InsufficientPoints {
            found: n,
            needed: 3,
        });
    }
    let step = q[1] - q[0];
    for w in q.windows(2) {
        let dev = (w[1] - w[0] - step).abs();
        if dev > 1e-9 * step.abs().max(1.0) {
            return Err(Error::GridNotUniform(dev));
        }
    }
    let mut alpha = Vec::with_capacity(n);
    alpha.push((tau[1] - tau[0]) / step);
    for i in 1..n - 1 {
        alpha.push((tau[i + 1] - tau[i - 1]) / (2.0 * step));
    }
    alpha.push((tau[n - 1] - tau[n - 2]) / step);
    let f = (0..n).map(|i| q[i] * alpha[i] - tau[i]).collect();
    Ok((alpha, f))
}

/// Everything the multifractal pipeline produces for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultifractalResult {
    pub q: Vec<f64>,
    pub h: Vec<f64>,
    pub tau: Vec<f64>,
    pub alpha: Vec<f64>,
    pub f: Vec<f64>,
    pub per_q_r2: Vec<f64>,
    pub theta: f64,
    /// Fractal dimension of the support; 1 for time series.
    pub df: f64,
    pub fit_range: (f64, f64),
}

/// Full MF-DMA run: h(q), τ(q), α(q), f(α) over the grid.
pub fn multifractal(
    series: &[f64],
    cfg: &DmaConfig,
    qgrid: &QGrid,
    fit_range: Option<(f64, f64)>,
) -> Result<MultifractalResult> {
    let table = generalized_hurst(series, cfg, qgrid, fit_range)?;
    let tau = mass_exponents(&table);
    let (alpha, f) = legendre_spectrum(&table.q, &tau)?;
    Ok(MultifractalResult {
        q: table.q,
        h: table.h,
        tau,
        alpha,
        f,
        per_q_r2: table.r2,
        theta: table.theta,
        df: 1.0,
        fit_range: table.fit_range,
    })
}

/// Width, skew, and shape diagnostics of a singularity spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    /// max α − min α.
    pub delta_alpha: f64,
    /// (right extent − left extent) of α about α(q=0), over Δα; positive
    /// means the spectrum reaches further toward large α (weak
    /// singularities) than toward small.
    pub asymmetry: f64,
    /// False when f is not unimodal in α (non-bell-shaped spectrum).
    pub unimodal: bool,
}

/// Summary statistics of the spectrum in `res`.
pub fn spectrum_summary(res: &MultifractalResult) -> SpectrumSummary {
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for &a in &res.alpha {
        lo = lo.min(a);
        hi = hi.max(a);
    }
    let delta = hi - lo;

    // α at the q closest to 0 (exactly 0 on the default grid).
    let i0 = res
        .q
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let alpha0 = res.alpha[i0];
    let asymmetry = if delta > 0.0 {
        ((hi - alpha0) - (alpha0 - lo)) / delta
    } else {
        0.0
    };

    // f traversed in q order sweeps α monotonically when τ is concave; the
    // spectrum is bell-shaped iff f rises to a single peak and falls.
    let slack = 1e-9;
    let peak = res
        .f
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let unimodal = res.f[..=peak].windows(2).all(|w| w[1] >= w[0] - slack)
        && res.f[peak..].windows(2).all(|w| w[1] <= w[0] + slack);

    SpectrumSummary {
        delta_alpha: delta,
        asymmetry,
        unimodal,
    }
}
