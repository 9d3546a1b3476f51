//! Charge qubit coupled to a single cavity mode, steady-state response.
//!
//! Units: detuning ε in μeV, the qubit gap `tc` (= 2t_c/h) and Ω/h in GHz,
//! everything else in hertz. Rates are stored as rate/2π.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::units::{energy_to_frequency, frequency_to_energy, GHZ};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum QubitCavityError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(
        "no resonance: qubit gap {tc_ghz} GHz is not below the cavity frequency {f_c_ghz} GHz"
    )]
    NoResonance { tc_ghz: f64, f_c_ghz: f64 },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    /// Detuning ε, μeV.
    pub epsilon: f64,
    /// Gap at zero detuning 2t_c/h, GHz.
    pub tc: f64,
    /// γ_c/2π, Hz.
    pub gamma_c: f64,
    /// g_c/2π at ε = 0, Hz.
    pub g_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Resonance frequency, Hz.
    pub f_c: f64,
    /// Total linewidth κ/2π, Hz.
    pub kappa: f64,
    /// Characteristic impedance, Ω.
    #[serde(alias = "Z0")]
    pub z0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub cavity: CavityParams,
    pub qubits: Vec<QubitParams>,
}

impl QubitParams {
    pub fn validate(&self) -> Result<(), QubitCavityError> {
        let bad = |msg: String| Err(QubitCavityError::InvalidParams(msg));
        if !self.epsilon.is_finite() {
            return bad(format!("epsilon must be finite, got {}", self.epsilon));
        }
        if !(self.tc > 0.0 && self.tc.is_finite()) {
            return bad(format!("tc must be positive, got {}", self.tc));
        }
        if !(self.gamma_c >= 0.0 && self.gamma_c.is_finite()) {
            return bad(format!(
                "gamma_c must be non-negative, got {}",
                self.gamma_c
            ));
        }
        if !(self.g_c >= 0.0 && self.g_c.is_finite()) {
            return bad(format!("g_c must be non-negative, got {}", self.g_c));
        }
        Ok(())
    }

    /// Ω/h in GHz.
    pub fn frequency_ghz(&self) -> f64 {
        dispersion(self.epsilon, self.tc)
    }
}

impl CavityParams {
    pub fn validate(&self) -> Result<(), QubitCavityError> {
        let bad = |msg: String| Err(QubitCavityError::InvalidParams(msg));
        if !(self.f_c > 0.0 && self.f_c.is_finite()) {
            return bad(format!("f_c must be positive, got {}", self.f_c));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if !(self.z0 > 0.0 && self.z0.is_finite()) {
            return bad(format!("z0 must be positive, got {}", self.z0));
        }
        Ok(())
    }

    /// Soft checks that do not make the model invalid.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.kappa > self.f_c / 100.0 {
            out.push(format!(
                "kappa = {} Hz exceeds f_c/100; the single-mode Lorentzian picture is marginal",
                self.kappa
            ));
        }
        out
    }
}

impl SystemParams {
    pub fn new(cavity: CavityParams, qubits: Vec<QubitParams>) -> Result<Self, QubitCavityError> {
        let sys = Self { cavity, qubits };
        sys.validate()?;
        Ok(sys)
    }

    pub fn single(cavity: CavityParams, qubit: QubitParams) -> Result<Self, QubitCavityError> {
        Self::new(cavity, vec![qubit])
    }

    pub fn validate(&self) -> Result<(), QubitCavityError> {
        self.cavity.validate()?;
        if self.qubits.is_empty() {
            return Err(QubitCavityError::InvalidParams(
                "at least one qubit is required".into(),
            ));
        }
        self.qubits.iter().try_for_each(QubitParams::validate)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.cavity.warnings()
    }

    /// Copy with every qubit moved to detuning `epsilon`.
    pub fn with_detuning(&self, epsilon: f64) -> Self {
        let mut out = self.clone();
        for q in &mut out.qubits {
            q.epsilon = epsilon;
        }
        out
    }
}

/// Ω/h = √((ε/h)² + tc²), GHz.
pub fn dispersion(epsilon_uev: f64, tc_ghz: f64) -> f64 {
    energy_to_frequency(epsilon_uev).hypot(tc_ghz)
}

/// The two detunings ±ε (μeV) where Ω/h equals the cavity frequency.
pub fn resonant_detuning(tc_ghz: f64, f_c_hz: f64) -> Result<(f64, f64), QubitCavityError> {
    let f_c = f_c_hz / GHZ;
    if !(tc_ghz < f_c) {
        return Err(QubitCavityError::NoResonance {
            tc_ghz,
            f_c_ghz: f_c,
        });
    }
    let eps = frequency_to_energy(((f_c - tc_ghz) * (f_c + tc_ghz)).sqrt());
    Ok((-eps, eps))
}

/// g_eff/2π = g_c · tc / Ω, Hz.
pub fn effective_coupling(q: &QubitParams) -> f64 {
    q.g_c * q.tc / q.frequency_ghz()
}

/// Complex transmission A/A₀ at probe frequency `f_hz`, normalized to 1 on
/// the bare cavity resonance.
pub fn transmission(f_hz: f64, sys: &SystemParams) -> Complex64 {
    let half_kappa = PI * sys.cavity.kappa;
    let mut denom = Complex64::new(half_kappa, 2.0 * PI * (sys.cavity.f_c - f_hz));
    for q in &sys.qubits {
        denom += qubit_self_energy(f_hz, q);
    }
    half_kappa / denom
}

/// Same as [`transmission`] for one qubit, without building a
/// [`SystemParams`].
pub fn single_qubit_transmission(f_hz: f64, cavity: &CavityParams, q: &QubitParams) -> Complex64 {
    let half_kappa = PI * cavity.kappa;
    half_kappa
        / (Complex64::new(half_kappa, 2.0 * PI * (cavity.f_c - f_hz)) + qubit_self_energy(f_hz, q))
}

/// The term (2π g_eff)² / (i 2π(Ω/h − f) + γ_ang/2) a qubit adds to the
/// cavity denominator.
fn qubit_self_energy(f_hz: f64, q: &QubitParams) -> Complex64 {
    let two_pi = 2.0 * PI;
    let g = two_pi * effective_coupling(q);
    if g == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let chi = Complex64::new(PI * q.gamma_c, two_pi * (q.frequency_ghz() * GHZ - f_hz));
    g * g / chi
}

/// Strictly monotonic, finite, non-empty.
fn check_sweep(name: &str, xs: &[f64]) -> Result<(), QubitCavityError> {
    if xs.is_empty() {
        return Err(QubitCavityError::InvalidSweep(format!("{name} is empty")));
    }
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(QubitCavityError::InvalidSweep(format!(
            "{name} contains {x}"
        )));
    }
    let up = xs.windows(2).all(|w| w[1] > w[0]);
    let down = xs.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(QubitCavityError::InvalidSweep(format!(
            "{name} is not strictly monotonic"
        )));
    }
    Ok(())
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Complex response sampled along one swept variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTrace {
    pub variable: String,
    pub units: String,
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl ComplexTrace {
    pub fn new(
        variable: &str,
        units: &str,
        points: Vec<f64>,
        values: Vec<Complex64>,
    ) -> Result<Self, QubitCavityError> {
        check_sweep(variable, &points)?;
        if points.len() != values.len() {
            return Err(QubitCavityError::InvalidSweep(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(QubitCavityError::InvalidSweep(
                "non-finite response value".into(),
            ));
        }
        Ok(Self {
            variable: variable.into(),
            units: units.into(),
            points,
            values,
        })
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// `sweep_value,re,im,abs,phase`, one row per sample. The sweep variable
    /// and its units go in a leading `#` comment.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# sweep: {} [{}]\nsweep_value,re,im,abs,phase\n",
            self.variable, self.units
        );
        for (x, v) in self.points.iter().zip(&self.values) {
            s.push_str(&format!(
                "{x:e},{:e},{:e},{:e},{:e}\n",
                v.re,
                v.im,
                v.norm(),
                v.arg()
            ));
        }
        s
    }
}

/// A/A₀ on an (f, ε) grid, ε outer and f inner.
#[derive(Debug, Clone)]
pub struct TransmissionMap {
    pub f_hz: Vec<f64>,
    pub epsilon_uev: Vec<f64>,
    /// `values[e * f_hz.len() + i]` is the response at `(f_hz[i], epsilon_uev[e])`.
    pub values: Vec<Complex64>,
}

impl TransmissionMap {
    pub fn at(&self, f_index: usize, eps_index: usize) -> Complex64 {
        self.values[eps_index * self.f_hz.len() + f_index]
    }

    /// Long form `f_hz,epsilon_ueV,abs,phase`, ε outer, f inner.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("f_hz,epsilon_ueV,abs,phase\n");
        for (e, eps) in self.epsilon_uev.iter().enumerate() {
            for (i, f) in self.f_hz.iter().enumerate() {
                let v = self.at(i, e);
                s.push_str(&format!("{f:e},{eps:e},{:e},{:e}\n", v.norm(), v.arg()));
            }
        }
        s
    }
}

/// Transmission over a frequency × detuning grid. The detuning is applied to
/// every qubit of `sys`.
pub fn transmission_map(
    f_hz: &[f64],
    epsilon_uev: &[f64],
    sys: &SystemParams,
) -> Result<TransmissionMap, QubitCavityError> {
    sys.validate()?;
    check_sweep("f", f_hz)?;
    check_sweep("epsilon", epsilon_uev)?;
    let mut values = Vec::with_capacity(f_hz.len() * epsilon_uev.len());
    for &eps in epsilon_uev {
        let s = sys.with_detuning(eps);
        values.extend(f_hz.iter().map(|&f| transmission(f, &s)));
    }
    Ok(TransmissionMap {
        f_hz: f_hz.to_vec(),
        epsilon_uev: epsilon_uev.to_vec(),
        values,
    })
}

/// Transmission vs detuning at fixed probe frequency (the cavity frequency
/// when `f_hz` is `None`).
pub fn detuning_trace(
    epsilon_uev: &[f64],
    sys: &SystemParams,
    f_hz: Option<f64>,
) -> Result<ComplexTrace, QubitCavityError> {
    sys.validate()?;
    check_sweep("epsilon", epsilon_uev)?;
    let f = f_hz.unwrap_or(sys.cavity.f_c);
    let values = epsilon_uev
        .iter()
        .map(|&e| transmission(f, &sys.with_detuning(e)))
        .collect();
    ComplexTrace::new("epsilon", "ueV", epsilon_uev.to_vec(), values)
}

/// Steady-state excited population of a driven two-level system. Drive
/// `rabi` = Ω_R/2π, linewidth `gamma` = γ/2π and detuning all in Hz; the 2π
/// factors cancel.
pub fn excited_population(detuning_hz: f64, gamma_hz: f64, rabi_hz: f64) -> f64 {
    let r2 = rabi_hz * rabi_hz;
    if r2 == 0.0 {
        return 0.0;
    }
    0.25 * r2 / (detuning_hz * detuning_hz + 0.25 * gamma_hz * gamma_hz + 0.5 * r2)
}

/// FWHM in Hz of the saturated line, √(γ² + 2Ω_R²).
pub fn saturated_linewidth(gamma_hz: f64, rabi_hz: f64) -> f64 {
    (gamma_hz * gamma_hz + 2.0 * rabi_hz * rabi_hz).sqrt()
}

/// Two-tone phase response Δφ(ε, f_s), ε outer and f_s inner.
#[derive(Debug, Clone)]
pub struct SpectroscopyMap {
    pub epsilon_uev: Vec<f64>,
    pub fs_hz: Vec<f64>,
    pub phase: Vec<f64>,
}

impl SpectroscopyMap {
    pub fn at(&self, fs_index: usize, eps_index: usize) -> f64 {
        self.phase[eps_index * self.fs_hz.len() + fs_index]
    }

    pub fn linecut(&self, eps_index: usize) -> &[f64] {
        let n = self.fs_hz.len();
        &self.phase[eps_index * n..(eps_index + 1) * n]
    }

    /// Long form `fs_hz,epsilon_ueV,phase`, ε outer.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("fs_hz,epsilon_ueV,phase\n");
        for (e, eps) in self.epsilon_uev.iter().enumerate() {
            for (i, f) in self.fs_hz.iter().enumerate() {
                s.push_str(&format!("{f:e},{eps:e},{:e}\n", self.at(i, e)));
            }
        }
        s
    }
}

fn check_drive(drive_hz: f64) -> Result<(), QubitCavityError> {
    if !(drive_hz >= 0.0 && drive_hz.is_finite()) {
        return Err(QubitCavityError::InvalidParams(format!(
            "drive must be non-negative, got {drive_hz}"
        )));
    }
    Ok(())
}

/// Cavity phase at f_c while a second tone at each `fs_hz` drives the first
/// qubit. Saturation scales the dispersive phase by (1 − 2P_e).
pub fn spectroscopy_linecut(
    fs_hz: &[f64],
    sys: &SystemParams,
    drive_hz: f64,
) -> Result<Vec<f64>, QubitCavityError> {
    sys.validate()?;
    check_drive(drive_hz)?;
    check_sweep("fs", fs_hz)?;
    let phi0 = transmission(sys.cavity.f_c, sys).arg();
    let q = &sys.qubits[0];
    let omega = q.frequency_ghz() * GHZ;
    Ok(fs_hz
        .iter()
        .map(|&fs| phi0 * (1.0 - 2.0 * excited_population(fs - omega, q.gamma_c, drive_hz)))
        .collect())
}

pub fn spectroscopy_map(
    epsilon_uev: &[f64],
    fs_hz: &[f64],
    sys: &SystemParams,
    drive_hz: f64,
) -> Result<SpectroscopyMap, QubitCavityError> {
    check_sweep("epsilon", epsilon_uev)?;
    let mut phase = Vec::with_capacity(epsilon_uev.len() * fs_hz.len());
    for &eps in epsilon_uev {
        phase.extend(spectroscopy_linecut(
            fs_hz,
            &sys.with_detuning(eps),
            drive_hz,
        )?);
    }
    Ok(SpectroscopyMap {
        epsilon_uev: epsilon_uev.to_vec(),
        fs_hz: fs_hz.to_vec(),
        phase,
    })
}
