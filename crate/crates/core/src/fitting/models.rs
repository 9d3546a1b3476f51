//! Lorentzian cavity line, detuning trace and spectroscopy linewidth fits.
//!
//! Each fit runs in internal units chosen so parameters are of order one
//! (MHz offsets from a reference sample, GHz for the qubit gap) and converts
//! the result back to the crate conventions before returning.

use crate::qubit_cavity::{single_qubit_transmission, CavityParams, QubitParams};
use crate::units::MHZ;

use super::lm::{levenberg_marquardt, FitOptions, FitProblem, FitResult};
use super::FitError;

/// |A/A₀|² of a bare cavity: `a (κ/2)² / ((f − f_c)² + (κ/2)²)`. Any
/// consistent frequency unit.
pub fn lorentzian_power(f: f64, f_c: f64, kappa: f64, amplitude: f64) -> f64 {
    let hk = 0.5 * kappa;
    amplitude * hk * hk / ((f - f_c) * (f - f_c) + hk * hk)
}

/// Copies `x`, `y` sorted by `x` so that initial guesses do not depend on
/// sample order.
fn sorted(x: &[f64], y: &[f64], min_len: usize) -> Result<(Vec<f64>, Vec<f64>), FitError> {
    if x.len() != y.len() {
        return Err(FitError::InvalidProblem(format!(
            "{} sweep points but {} values",
            x.len(),
            y.len()
        )));
    }
    if x.len() < min_len {
        return Err(FitError::InvalidProblem(format!(
            "need at least {min_len} points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(FitError::InvalidProblem(
            "data contain non-finite values".into(),
        ));
    }
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    Ok((
        idx.iter().map(|&i| x[i]).collect(),
        idx.iter().map(|&i| y[i]).collect(),
    ))
}

/// Full width where `|y − base|` first drops below half of `|y[peak] − base|`
/// on either side, linearly interpolated. One-sided crossings are doubled.
fn half_max_width(x: &[f64], y: &[f64], peak: usize, base: f64) -> Option<f64> {
    let half = 0.5 * (y[peak] - base).abs();
    let dev = |i: usize| (y[i] - base).abs();
    let cross = |i: usize, j: usize| {
        // dev(i) ≥ half > dev(j)
        let t = (dev(i) - half) / (dev(i) - dev(j));
        x[i] + t * (x[j] - x[i])
    };
    let left = (1..=peak)
        .rev()
        .find(|&j| dev(j - 1) < half)
        .map(|j| cross(j, j - 1));
    let right = (peak..x.len() - 1)
        .find(|&j| dev(j + 1) < half)
        .map(|j| cross(j, j + 1));
    match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        (Some(l), None) => Some(2.0 * (x[peak] - l)),
        (None, Some(r)) => Some(2.0 * (r - x[peak])),
        (None, None) => None,
    }
    .filter(|w| *w > 0.0)
}

/// Rewrites an internal-unit fit as `offset + scale · p` per parameter.
fn to_physical(mut fit: FitResult, names: &[&str], offset: &[f64], scale: &[f64]) -> FitResult {
    fit.names = names.iter().map(|s| s.to_string()).collect();
    for i in 0..fit.params.len() {
        fit.params[i] = offset[i] + scale[i] * fit.params[i];
        fit.stderr[i] *= scale[i].abs();
    }
    fit
}

fn argmax_by(y: &[f64], key: impl Fn(f64) -> f64) -> usize {
    let mut best = 0;
    for i in 1..y.len() {
        if key(y[i]) > key(y[best]) {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct CavityFit {
    /// Hz.
    pub f_c: f64,
    /// κ/2π, Hz.
    pub kappa: f64,
    pub amplitude: f64,
    pub warnings: Vec<String>,
    /// Parameters `f_c`, `kappa` (Hz) and `amplitude`.
    pub fit: FitResult,
}

/// Fits a Lorentzian to |A/A₀|² sampled at frequencies `f_hz`.
pub fn fit_cavity_lorentzian(f_hz: &[f64], power: &[f64]) -> Result<CavityFit, FitError> {
    fit_cavity_lorentzian_with(f_hz, power, FitOptions::default())
}

pub fn fit_cavity_lorentzian_with(
    f_hz: &[f64],
    power: &[f64],
    options: FitOptions,
) -> Result<CavityFit, FitError> {
    let (x, y) = sorted(f_hz, power, 4)?;
    let (lo, hi) = (x[0], x[x.len() - 1]);
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(FitError::Degenerate("frequency span is zero".into()));
    }
    if !(ymax > ymin) {
        return Err(FitError::Degenerate("trace has no variation".into()));
    }
    let peak = argmax_by(&y, |v| v);
    if peak == 0 || peak == x.len() - 1 {
        return Err(FitError::NoPeak(format!(
            "maximum sits at the edge of the scan ({} Hz)",
            x[peak]
        )));
    }
    let f_ref = x[peak];
    let xm: Vec<f64> = x.iter().map(|f| (f - f_ref) / MHZ).collect();
    let width = half_max_width(&xm, &y, peak, 0.0).unwrap_or((hi - lo) / MHZ / 10.0);
    let model = |p: &[f64], f: f64| lorentzian_power(f, p[0], p[1], p[2]);
    let problem = FitProblem {
        names: vec!["df".into(), "kappa".into(), "amplitude".into()],
        model: &model,
        x: &xm,
        y: &y,
        initial: vec![0.0, width, ymax],
        lower: vec![xm[0], 1e-12, 0.0],
        upper: vec![xm[xm.len() - 1], f64::INFINITY, f64::INFINITY],
        options,
    };
    let fit = to_physical(
        levenberg_marquardt(&problem)?,
        &["f_c", "kappa", "amplitude"],
        &[f_ref, 0.0, 0.0],
        &[MHZ, MHZ, 1.0],
    );
    let (f_c, kappa, amplitude) = (fit.params[0], fit.params[1], fit.params[2]);
    let mut warnings = fit.diagnostics.clone();
    if hi - lo < 3.0 * kappa {
        warnings.push(format!(
            "scan covers {:.2} linewidths; at least 3 are needed for a reliable width",
            (hi - lo) / kappa
        ));
    }
    Ok(CavityFit {
        f_c,
        kappa,
        amplitude,
        warnings,
        fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DetuningFitConfig {
    /// Holds γ_c/2π (Hz) fixed instead of floating it.
    pub gamma_c: Option<f64>,
    pub options: FitOptions,
}

#[derive(Debug, Clone)]
pub struct DetuningFit {
    /// 2t_c/h, GHz.
    pub tc: f64,
    /// g_c/2π, Hz.
    pub g_c: f64,
    /// γ_c/2π, Hz.
    pub gamma_c: f64,
    /// Parameters `tc` (GHz), `g_c` and `gamma_c` (Hz).
    pub fit: FitResult,
}

/// Geometric grid from `lo` to `hi` with `n` points.
fn geomspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(move |i| lo * (r * i as f64).exp())
}

/// Fits |A/A₀| at the cavity frequency vs detuning ε (μeV) for (tc, g_c,
/// γ_c), with the cavity fixed. Starts from the best point of a coarse grid.
pub fn fit_detuning_trace(
    epsilon_uev: &[f64],
    magnitude: &[f64],
    cavity: &CavityParams,
    config: &DetuningFitConfig,
) -> Result<DetuningFit, FitError> {
    cavity
        .validate()
        .map_err(|e| FitError::InvalidProblem(e.to_string()))?;
    let (x, y) = sorted(epsilon_uev, magnitude, 4)?;
    if !(x[0] <= 0.0 && x[x.len() - 1] >= 0.0) {
        return Err(FitError::InvalidProblem("trace must cover ε = 0".into()));
    }
    if let Some(g) = config.gamma_c {
        if !(g > 0.0 && g.is_finite()) {
            return Err(FitError::InvalidProblem(format!(
                "fixed gamma_c must be positive, got {g}"
            )));
        }
    }
    let cav = *cavity;
    // (tc GHz, g MHz, γ MHz)
    let model = move |p: &[f64], eps: f64| {
        let q = QubitParams {
            epsilon: eps,
            tc: p[0],
            gamma_c: p[2] * MHZ,
            g_c: p[1] * MHZ,
        };
        single_qubit_transmission(cav.f_c, &cav, &q).norm()
    };

    let stride = x.len().div_ceil(101).max(1);
    let coarse: Vec<(f64, f64)> = x
        .iter()
        .zip(&y)
        .step_by(stride)
        .map(|(&a, &b)| (a, b))
        .collect();
    let gammas: Vec<f64> = match config.gamma_c {
        Some(g) => vec![g / MHZ],
        None => geomspace(2.0, 1000.0, 14).collect(),
    };
    let mut best = (f64::INFINITY, [0.0; 3]);
    for tc in geomspace(0.5, 50.0, 60) {
        for g in (1..=40).map(|k| 5.0 * k as f64) {
            for &gamma in &gammas {
                let p = [tc, g, gamma];
                let rss: f64 = coarse
                    .iter()
                    .map(|&(e, v)| (v - model(&p, e)).powi(2))
                    .sum();
                if rss < best.0 {
                    best = (rss, p);
                }
            }
        }
    }

    let (g_lo, g_hi) = match config.gamma_c {
        Some(g) => (g / MHZ, g / MHZ),
        None => (1e-3, 1e5),
    };
    let problem = FitProblem {
        names: vec!["tc".into(), "g_c".into(), "gamma_c".into()],
        model: &model,
        x: &x,
        y: &y,
        initial: best.1.to_vec(),
        lower: vec![1e-2, 0.0, g_lo],
        upper: vec![500.0, 1e4, g_hi],
        options: config.options,
    };
    let fit = to_physical(
        levenberg_marquardt(&problem)?,
        &["tc", "g_c", "gamma_c"],
        &[0.0; 3],
        &[1.0, MHZ, MHZ],
    );
    Ok(DetuningFit {
        tc: fit.params[0],
        g_c: fit.params[1],
        gamma_c: fit.params[2],
        fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectroscopyFitConfig {
    /// Peak saturation P_e above which the width is flagged as power
    /// broadened. At P_e = 0.01 the FWHM exceeds γ_c by about 1%.
    pub broadening_threshold: f64,
    pub options: FitOptions,
}

impl Default for SpectroscopyFitConfig {
    fn default() -> Self {
        Self {
            broadening_threshold: 0.01,
            options: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectroscopyFit {
    /// Line center, Hz.
    pub center: f64,
    /// Fitted FWHM, Hz. Equals γ_c/2π only in the weak-drive limit; check
    /// `power_broadened`.
    pub gamma_c: f64,
    /// Baseline phase (the undriven dispersive phase), rad.
    pub offset: f64,
    /// Peak phase change, rad.
    pub amplitude: f64,
    /// Peak excited population implied by `amplitude / offset`.
    pub p_max: f64,
    /// FWHM with the saturation broadening removed, √(1 − 2P_max)·FWHM.
    pub corrected_gamma: f64,
    pub power_broadened: bool,
    pub warnings: Vec<String>,
    /// Parameters `center`, `fwhm` (Hz), `offset` and `amplitude` (rad).
    pub fit: FitResult,
}

/// Fits `offset + amplitude · L(f_s)` to a two-tone phase linecut, with `L`
/// a unit-height Lorentzian.
pub fn fit_spectroscopy_linewidth(
    fs_hz: &[f64],
    phase: &[f64],
    config: &SpectroscopyFitConfig,
) -> Result<SpectroscopyFit, FitError> {
    let (x, y) = sorted(fs_hz, phase, 5)?;
    let n = x.len();
    let mut s = y.clone();
    s.sort_by(f64::total_cmp);
    let base = if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    };
    let peak = argmax_by(&y, |v| (v - base).abs());
    let amp = y[peak] - base;

    // point-to-point scatter as a noise scale
    let mut diffs: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    diffs.sort_by(f64::total_cmp);
    let noise = 1.4826 * diffs[diffs.len() / 2] / 2f64.sqrt();
    if !(amp.abs() > 5.0 * noise) || amp == 0.0 {
        return Err(FitError::NoPeak(
            "no resonance stands out of the linecut".into(),
        ));
    }
    if peak == 0 || peak == n - 1 {
        return Err(FitError::NoPeak(
            "the linecut does not bracket the resonance".into(),
        ));
    }

    let f_ref = x[peak];
    let xm: Vec<f64> = x.iter().map(|f| (f - f_ref) / MHZ).collect();
    let width = half_max_width(&xm, &y, peak, base).unwrap_or((xm[n - 1] - xm[0]) / 10.0);
    // (offset, amplitude, center MHz, fwhm MHz)
    let model = |p: &[f64], f: f64| p[0] + lorentzian_power(f, p[2], p[3], p[1]);
    let problem = FitProblem {
        names: vec![
            "offset".into(),
            "amplitude".into(),
            "center".into(),
            "fwhm".into(),
        ],
        model: &model,
        x: &xm,
        y: &y,
        initial: vec![base, amp, 0.0, width],
        lower: vec![f64::NEG_INFINITY, f64::NEG_INFINITY, xm[0], 1e-12],
        upper: vec![f64::INFINITY, f64::INFINITY, xm[n - 1], f64::INFINITY],
        options: config.options,
    };
    let raw = levenberg_marquardt(&problem)?;
    let (offset, amplitude) = (raw.params[0], raw.params[1]);
    let mut fit = to_physical(
        raw,
        &["offset", "amplitude", "center", "fwhm"],
        &[0.0, 0.0, f_ref, 0.0],
        &[1.0, 1.0, MHZ, MHZ],
    );
    // report in the order users care about
    let order = [2, 3, 0, 1];
    fit.names = order.iter().map(|&i| fit.names[i].clone()).collect();
    fit.params = order.iter().map(|&i| fit.params[i]).collect();
    fit.stderr = order.iter().map(|&i| fit.stderr[i]).collect();
    let (center, fwhm) = (fit.params[0], fit.params[1]);

    let mut warnings = fit.diagnostics.clone();
    let p_max = if offset != 0.0 {
        amplitude.abs() / (2.0 * offset.abs())
    } else {
        f64::NAN
    };
    let power_broadened = p_max > config.broadening_threshold;
    let corrected_gamma = fwhm * (1.0 - 2.0 * p_max).max(0.0).sqrt();
    if power_broadened {
        warnings.push(format!(
            "power broadened: peak saturation {p_max:.3} exceeds {}; FWHM {:.3} MHz overstates γ_c/2π (saturation-corrected {:.3} MHz)",
            config.broadening_threshold,
            fwhm / MHZ,
            corrected_gamma / MHZ
        ));
    } else if p_max.is_nan() {
        warnings.push("zero baseline phase; saturation level unknown".into());
    }
    Ok(SpectroscopyFit {
        center,
        gamma_c: fwhm,
        offset,
        amplitude,
        p_max,
        corrected_gamma,
        power_broadened,
        warnings,
        fit,
    })
}
