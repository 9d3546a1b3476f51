//! The JSON configuration shared by every CLI verb.
//!
//! Physical inputs are optional at parse time; each pipeline lists the
//! entries it needs and reports all missing ones together. Sweep ranges and
//! other per-figure knobs have defaults.

use serde::{Deserialize, Serialize};

use crate::electrostatics::{GateLayout, SolverOptions, EXAMPLE_DOT_1, EXAMPLE_DOT_2};
use crate::qubit_cavity::{linspace, CavityParams, QubitParams, SystemParams};

use super::voltage::{BarrierCalibration, LeverArmMatrix, SweepSpec};
use super::ScenarioError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityParams>,
    /// Qubits coupled to the cavity. Figures that sweep ε or t_c apply the
    /// sweep to every qubit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<QubitParams>>,
    /// Spectroscopy drive Ω_R/2π, Hz.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier: Option<BarrierCalibration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lever_arms: Option<LeverArmMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<GateLayout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub noise: NoiseSettings,
    /// Seed for synthetic noise; the command line may override it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub figures: FigureSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub tol: f64,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: None,
        }
    }
}

impl SolverSettings {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            omega: None,
        }
    }
}

/// Standard deviations of the additive Gaussian noise put on synthetic data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSettings {
    /// On |A/A₀|² of the bare cavity line.
    pub cavity_power: f64,
    /// On |A/A₀| of detuning traces.
    pub detuning: f64,
    /// On the spectroscopy phase, rad.
    pub spectroscopy: f64,
    /// On |A/A₀| of transmission and stability maps.
    pub map: f64,
}

impl Default for NoiseSettings {
    fn default() -> Self {
        Self {
            cavity_power: 0.005,
            detuning: 0.01,
            spectroscopy: 0.0,
            map: 0.0,
        }
    }
}

/// Inclusive evenly spaced range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Range {
    pub const fn new(start: f64, end: f64, points: usize) -> Self {
        Self { start, end, points }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.end, self.points)
    }

    pub fn validate(&self, what: &str) -> Result<(), ScenarioError> {
        if self.points < 2
            || !(self.start.is_finite() && self.end.is_finite())
            || self.start == self.end
        {
            return Err(ScenarioError::InvalidSweep(format!(
                "{what}: need a finite non-empty range with at least 2 points"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig1c {
    pub gate: String,
    /// The two dot positions (nm) that define β.
    pub dots: [[f64; 2]; 2],
    /// Slices as [x0, y0, x1, y1] in nm.
    pub slices: Vec<[f64; 4]>,
    pub slice_points: usize,
    /// Orientations of the dot axis scanned from 0° to 180°.
    pub angles: usize,
}

impl Default for Fig1c {
    fn default() -> Self {
        Self {
            gate: "CP".into(),
            dots: [EXAMPLE_DOT_1, EXAMPLE_DOT_2],
            slices: vec![[100.0, 140.0, 300.0, 140.0], [200.0, 60.0, 200.0, 220.0]],
            slice_points: 101,
            angles: 37,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig2b {
    /// CP change applied to the fig2a sweep, mV.
    pub cp_shift_mv: f64,
}

impl Default for Fig2b {
    fn default() -> Self {
        Self { cp_shift_mv: 15.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig2c {
    pub barrier_mv: Range,
    pub epsilon_uev: Range,
    /// Overrides g_c/2π (Hz) of the configured qubits.
    pub g_c_hz: Option<f64>,
}

impl Default for Fig2c {
    fn default() -> Self {
        Self {
            barrier_mv: Range::new(330.0, 350.0, 41),
            epsilon_uev: Range::new(-60.0, 60.0, 241),
            g_c_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig2d {
    pub barrier_mv: Vec<f64>,
    pub epsilon_uev: Range,
    pub g_c_hz: Option<f64>,
    /// Holds γ_c/2π (Hz) fixed in the fits instead of floating it.
    pub fixed_gamma_c_hz: Option<f64>,
}

impl Default for Fig2d {
    fn default() -> Self {
        Self {
            barrier_mv: vec![335.0, 340.0],
            epsilon_uev: Range::new(-60.0, 60.0, 481),
            g_c_hz: None,
            fixed_gamma_c_hz: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3a {
    /// Full scan width around f_c, Hz.
    pub span_hz: f64,
    pub points: usize,
}

impl Default for Fig3a {
    fn default() -> Self {
        Self {
            span_hz: 12e6,
            points: 401,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3b {
    pub epsilon_uev: Range,
    pub fs_hz: Range,
    /// Detuning of the linecut used for the linewidth fit, μeV.
    pub linecut_epsilon_uev: f64,
}

impl Default for Fig3b {
    fn default() -> Self {
        Self {
            epsilon_uev: Range::new(-40.0, 40.0, 81),
            fs_hz: Range::new(5.5e9, 11.5e9, 1201),
            linecut_epsilon_uev: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3c {
    pub f_hz: Range,
    pub epsilon_uev: Range,
    pub g_c_hz: Option<f64>,
}

impl Default for Fig3c {
    fn default() -> Self {
        Self {
            f_hz: Range::new(6.7e9, 6.9e9, 401),
            epsilon_uev: Range::new(-30.0, 30.0, 241),
            g_c_hz: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FigureSettings {
    pub fig1c: Fig1c,
    pub fig2b: Fig2b,
    pub fig2c: Fig2c,
    pub fig2d: Fig2d,
    pub fig3a: Fig3a,
    pub fig3b: Fig3b,
    pub fig3c: Fig3c,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Fails with every name in `keys` whose entry is absent.
    pub fn require(&self, keys: &[&str]) -> Result<(), ScenarioError> {
        let missing: Vec<String> = keys
            .iter()
            .filter(|k| match **k {
                "cavity" => self.cavity.is_none(),
                "qubits" => self.qubits.as_ref().is_none_or(|q| q.is_empty()),
                "drive_hz" => self.drive_hz.is_none(),
                "barrier" => self.barrier.is_none(),
                "lever_arms" => self.lever_arms.is_none(),
                "layout" => self.layout.is_none(),
                "sweep" => self.sweep.is_none(),
                other => panic!("unknown config key {other}"),
            })
            .map(|k| k.to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::MissingEntries(missing))
        }
    }

    pub fn cavity(&self) -> Result<CavityParams, ScenarioError> {
        self.require(&["cavity"])?;
        let c = self.cavity.expect("checked");
        c.validate()?;
        Ok(c)
    }

    pub fn system(&self) -> Result<SystemParams, ScenarioError> {
        self.require(&["cavity", "qubits"])?;
        Ok(SystemParams::new(
            self.cavity.expect("checked"),
            self.qubits.clone().expect("checked"),
        )?)
    }

    pub fn barrier(&self) -> Result<BarrierCalibration, ScenarioError> {
        self.require(&["barrier"])?;
        let b = self.barrier.expect("checked");
        b.validate()?;
        Ok(b)
    }

    pub fn lever_arms(&self) -> Result<LeverArmMatrix, ScenarioError> {
        self.require(&["lever_arms"])?;
        let m = self.lever_arms.clone().expect("checked");
        m.validate()?;
        Ok(m)
    }

    pub fn drive_hz(&self) -> Result<f64, ScenarioError> {
        self.require(&["drive_hz"])?;
        let d = self.drive_hz.expect("checked");
        if !(d >= 0.0 && d.is_finite()) {
            return Err(ScenarioError::Config(format!(
                "drive_hz must be non-negative, got {d}"
            )));
        }
        Ok(d)
    }

    pub fn layout(&self) -> Result<GateLayout, ScenarioError> {
        self.require(&["layout"])?;
        let l = self.layout.clone().expect("checked");
        l.validate()?;
        Ok(l)
    }

    /// Parameters used by the bundled reproduction config.
    pub fn reference() -> Self {
        use crate::electrostatics::split_gate_example;
        use std::collections::BTreeMap;

        let mut reference = BTreeMap::new();
        reference.insert("P1".to_string(), 400.0);
        reference.insert("P2".to_string(), 410.0);
        reference.insert("CP".to_string(), 150.0);
        let mut fixed = BTreeMap::new();
        fixed.insert("CP".to_string(), 150.0);
        let mut figures = FigureSettings::default();
        figures.fig2d.g_c_hz = Some(58e6);
        figures.fig2c.g_c_hz = Some(58e6);
        Self {
            cavity: Some(CavityParams {
                f_c: 6.8e9,
                kappa: 1.2e6,
                z0: 133.0,
            }),
            qubits: Some(vec![QubitParams {
                epsilon: 0.0,
                tc: 6.2,
                gamma_c: 36e6,
                g_c: 50e6,
            }]),
            drive_hz: Some(2e6),
            barrier: Some(BarrierCalibration::default()),
            lever_arms: Some(LeverArmMatrix::example()),
            layout: Some(split_gate_example(5.0)),
            sweep: Some(SweepSpec {
                x: super::SweepAxis {
                    gate: "P1".into(),
                    start_mv: 390.0,
                    end_mv: 410.0,
                    points: 201,
                },
                y: super::SweepAxis {
                    gate: "P2".into(),
                    start_mv: 400.0,
                    end_mv: 420.0,
                    points: 201,
                },
                reference_mv: reference,
                fixed_mv: fixed,
                compensate_cp: false,
                barrier_mv: Some(337.5),
            }),
            solver: SolverSettings::default(),
            noise: NoiseSettings {
                map: 0.01,
                ..NoiseSettings::default()
            },
            seed: 0,
            figures,
        }
    }
}
