//! Gate-voltage space: barrier calibration, lever-arm algebra and
//! stability maps around the single interdot transition.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::electrostatics::{
    solve_lever_arm, ElectrostaticsError, GateLayout, SolverOptions, EXAMPLE_DOT_1, EXAMPLE_DOT_2,
};
use crate::qubit_cavity::{linspace, transmission, SystemParams};

use super::ScenarioError;

/// μeV per (lever arm × mV).
const UEV_PER_MV: f64 = 1000.0;

/// Exponential barrier dependence 2t_c/h = gap · exp((V − V_ref) / V_s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierCalibration {
    pub v_ref_mv: f64,
    pub gap_ghz: f64,
    pub v_scale_mv: f64,
}

impl BarrierCalibration {
    /// Calibration through two (V_B2 in mV, 2t_c/h in GHz) points; the first
    /// becomes the reference.
    pub fn from_anchors(a: (f64, f64), b: (f64, f64)) -> Result<Self, ScenarioError> {
        let cal = Self {
            v_ref_mv: a.0,
            gap_ghz: a.1,
            v_scale_mv: (b.0 - a.0) / (b.1 / a.1).ln(),
        };
        cal.validate()?;
        Ok(cal)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.gap_ghz > 0.0 && self.gap_ghz.is_finite()) {
            return Err(ScenarioError::Config(format!(
                "barrier gap must be positive, got {}",
                self.gap_ghz
            )));
        }
        if !(self.v_scale_mv.is_finite() && self.v_scale_mv != 0.0) || !self.v_ref_mv.is_finite() {
            return Err(ScenarioError::Config(format!(
                "barrier scale must be finite and nonzero, got {}",
                self.v_scale_mv
            )));
        }
        Ok(())
    }

    /// 2t_c/h in GHz at barrier voltage `v_mv`.
    pub fn tc_from_barrier(&self, v_mv: f64) -> f64 {
        self.gap_ghz * ((v_mv - self.v_ref_mv) / self.v_scale_mv).exp()
    }

    /// Inverse of [`Self::tc_from_barrier`].
    pub fn barrier_for_tc(&self, tc_ghz: f64) -> f64 {
        self.v_ref_mv + self.v_scale_mv * (tc_ghz / self.gap_ghz).ln()
    }
}

impl Default for BarrierCalibration {
    /// 335 mV → 5.275 GHz and 340 mV → 7.432 GHz.
    fn default() -> Self {
        Self::from_anchors((335.0, 5.275), (340.0, 7.432)).expect("valid anchors")
    }
}

pub fn tc_from_barrier(v_mv: f64, cal: &BarrierCalibration) -> f64 {
    cal.tc_from_barrier(v_mv)
}

/// Lever arms α_{dot,gate} of both dots for a set of gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeverArmMatrix {
    pub gates: Vec<String>,
    pub dot1: Vec<f64>,
    pub dot2: Vec<f64>,
}

impl LeverArmMatrix {
    pub fn new(gates: &[&str], dot1: &[f64], dot2: &[f64]) -> Result<Self, ScenarioError> {
        let m = Self {
            gates: gates.iter().map(|g| g.to_string()).collect(),
            dot1: dot1.to_vec(),
            dot2: dot2.to_vec(),
        };
        m.validate()?;
        Ok(m)
    }

    /// P1, P2 and CP of the split-gate example layout at its two dot
    /// positions, solved on a 5 nm grid. Illustrative only.
    pub fn example() -> Self {
        Self::new(
            &["P1", "P2", "CP"],
            &[0.072620, 0.016992, 0.059810],
            &[0.017044, 0.072411, 0.136191],
        )
        .expect("valid example")
    }

    /// Solves the lever arms of `gates` at two positions of a layout.
    pub fn from_layout(
        layout: &GateLayout,
        gates: &[&str],
        dots: [[f64; 2]; 2],
        opts: &SolverOptions,
    ) -> Result<Self, ScenarioError> {
        let mut d1 = Vec::new();
        let mut d2 = Vec::new();
        for g in gates {
            let map = solve_lever_arm(layout, g, opts)?;
            d1.push(map.interpolate(dots[0])?);
            d2.push(map.interpolate(dots[1])?);
        }
        Self::new(gates, &d1, &d2)
    }

    /// The example matrix recomputed from the example layout.
    pub fn example_from_layout(spacing: f64, opts: &SolverOptions) -> Result<Self, ScenarioError> {
        Self::from_layout(
            &crate::electrostatics::split_gate_example(spacing),
            &["P1", "P2", "CP"],
            [EXAMPLE_DOT_1, EXAMPLE_DOT_2],
            opts,
        )
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.gates.len();
        if self.dot1.len() != n || self.dot2.len() != n {
            return Err(ScenarioError::Config(
                "lever-arm rows must match the gate list".into(),
            ));
        }
        for (i, g) in self.gates.iter().enumerate() {
            if self.gates[..i].contains(g) {
                return Err(ScenarioError::Config(format!(
                    "duplicate gate {g} in lever-arm matrix"
                )));
            }
        }
        if let Some(a) = self
            .dot1
            .iter()
            .chain(&self.dot2)
            .find(|a| !(0.0..=1.0).contains(*a))
        {
            return Err(ScenarioError::Config(format!(
                "lever arm {a} outside [0, 1]"
            )));
        }
        for g in ["P1", "P2"] {
            if !self.gates.iter().any(|x| x == g) {
                return Err(ScenarioError::Config(format!(
                    "lever-arm matrix lacks gate {g}"
                )));
            }
        }
        Ok(())
    }

    fn column(&self, gate: &str) -> Result<(f64, f64), ScenarioError> {
        self.gates
            .iter()
            .position(|g| g == gate)
            .map(|i| (self.dot1[i], self.dot2[i]))
            .ok_or_else(|| {
                ScenarioError::Config(format!("gate {gate} is not in the lever-arm matrix"))
            })
    }

    pub fn alpha(&self, dot: usize, gate: &str) -> Result<f64, ScenarioError> {
        let (a1, a2) = self.column(gate)?;
        match dot {
            1 => Ok(a1),
            2 => Ok(a2),
            _ => Err(ScenarioError::Config(format!(
                "dot index must be 1 or 2, got {dot}"
            ))),
        }
    }

    /// Level shifts (μeV) of both dots for gate voltage changes in mV.
    pub fn dot_shifts(&self, dv: &[(&str, f64)]) -> Result<[f64; 2], ScenarioError> {
        let mut out = [0.0; 2];
        for &(g, v) in dv {
            let (a1, a2) = self.column(g)?;
            out[0] += UEV_PER_MV * a1 * v;
            out[1] += UEV_PER_MV * a2 * v;
        }
        Ok(out)
    }

    /// ε = level(dot 1) − level(dot 2), μeV.
    pub fn detuning(&self, dv: &[(&str, f64)]) -> Result<f64, ScenarioError> {
        let [a, b] = self.dot_shifts(dv)?;
        Ok(a - b)
    }

    /// Mean of the two dot levels, μeV.
    pub fn mean_shift(&self, dv: &[(&str, f64)]) -> Result<f64, ScenarioError> {
        let [a, b] = self.dot_shifts(dv)?;
        Ok(0.5 * (a + b))
    }

    /// Slope dV_y/dV_x of the ε = 0 line in the (x, y) gate plane.
    pub fn transition_slope(&self, x_gate: &str, y_gate: &str) -> Result<f64, ScenarioError> {
        let (x1, x2) = self.column(x_gate)?;
        let (y1, y2) = self.column(y_gate)?;
        Ok(-(x1 - x2) / (y1 - y2))
    }
}

/// ε in μeV for plunger changes in mV.
pub fn detuning_from_voltages(
    dv_p1: f64,
    dv_p2: f64,
    m: &LeverArmMatrix,
) -> Result<f64, ScenarioError> {
    m.detuning(&[("P1", dv_p1), ("P2", dv_p2)])
}

/// Plunger shifts (mV) that hold both dot levels fixed when CP moves by
/// `dv_cp` mV.
pub fn cp_compensation(dv_cp: f64, m: &LeverArmMatrix) -> Result<(f64, f64), ScenarioError> {
    let (a11, a21) = m.column("P1")?;
    let (a12, a22) = m.column("P2")?;
    let (c1, c2) = m.column("CP")?;
    let det = a11 * a22 - a12 * a21;
    let scale = a11.abs().max(a12.abs()).max(a21.abs()).max(a22.abs());
    if !(det.abs() > 1e-12 * scale * scale) {
        return Err(ScenarioError::Singular(format!(
            "plunger lever-arm sub-matrix is singular (det = {det:e})"
        )));
    }
    let (r1, r2) = (-c1 * dv_cp, -c2 * dv_cp);
    Ok(((r1 * a22 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub gate: String,
    pub start_mv: f64,
    pub end_mv: f64,
    pub points: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start_mv, self.end_mv, self.points)
    }
}

/// A two-gate raster around the interdot transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub x: SweepAxis,
    pub y: SweepAxis,
    /// Gate voltages (mV) at which ε = 0. Gates absent here are taken at 0.
    #[serde(default)]
    pub reference_mv: BTreeMap<String, f64>,
    /// Voltages (mV) of gates held fixed during the sweep.
    #[serde(default)]
    pub fixed_mv: BTreeMap<String, f64>,
    /// Offset the plungers to cancel any CP change from its reference.
    #[serde(default)]
    pub compensate_cp: bool,
    /// Barrier voltage (mV); sets 2t_c/h through the calibration.
    #[serde(default)]
    pub barrier_mv: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self, m: &LeverArmMatrix) -> Result<(), ScenarioError> {
        for axis in [&self.x, &self.y] {
            if axis.points < 2 {
                return Err(ScenarioError::InvalidSweep(format!(
                    "{} needs at least 2 points",
                    axis.gate
                )));
            }
            if !(axis.start_mv.is_finite()
                && axis.end_mv.is_finite()
                && axis.start_mv != axis.end_mv)
            {
                return Err(ScenarioError::InvalidSweep(format!(
                    "{} range must be finite and non-empty",
                    axis.gate
                )));
            }
            m.column(&axis.gate)?;
        }
        if self.x.gate == self.y.gate {
            return Err(ScenarioError::InvalidSweep(
                "x and y sweep the same gate".into(),
            ));
        }
        for g in self.fixed_mv.keys().chain(self.reference_mv.keys()) {
            m.column(g)?;
        }
        if self.fixed_mv.contains_key(&self.x.gate) || self.fixed_mv.contains_key(&self.y.gate) {
            return Err(ScenarioError::InvalidSweep(
                "a swept gate is also listed as fixed".into(),
            ));
        }
        if self.compensate_cp {
            m.column("CP")?;
        }
        Ok(())
    }

    fn reference(&self, gate: &str) -> f64 {
        self.reference_mv.get(gate).copied().unwrap_or(0.0)
    }

    /// Voltage changes from the reference at raster point (vx, vy), including
    /// fixed gates and any CP compensation.
    pub fn shifts(
        &self,
        m: &LeverArmMatrix,
        vx: f64,
        vy: f64,
    ) -> Result<Vec<(String, f64)>, ScenarioError> {
        let mut dv: BTreeMap<String, f64> = BTreeMap::new();
        dv.insert(self.x.gate.clone(), vx - self.reference(&self.x.gate));
        dv.insert(self.y.gate.clone(), vy - self.reference(&self.y.gate));
        for (g, v) in &self.fixed_mv {
            dv.insert(g.clone(), v - self.reference(g));
        }
        if self.compensate_cp {
            let d_cp = dv.get("CP").copied().unwrap_or(0.0);
            let (p1, p2) = cp_compensation(d_cp, m)?;
            *dv.entry("P1".into()).or_default() += p1;
            *dv.entry("P2".into()).or_default() += p2;
        }
        Ok(dv.into_iter().collect())
    }
}

/// |A/A₀| at f_c over a voltage raster, x inner and y outer.
#[derive(Debug, Clone)]
pub struct StabilityMap {
    pub x_gate: String,
    pub y_gate: String,
    pub x_mv: Vec<f64>,
    pub y_mv: Vec<f64>,
    pub epsilon_uev: Vec<f64>,
    pub values: Vec<Complex64>,
    /// 2t_c/h used for every point, GHz.
    pub tc_ghz: f64,
}

impl StabilityMap {
    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.x_mv.len() + ix]
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "v_{}_mV,v_{}_mV,epsilon_ueV,abs,phase\n",
            self.x_gate, self.y_gate
        );
        for (iy, y) in self.y_mv.iter().enumerate() {
            for (ix, x) in self.x_mv.iter().enumerate() {
                let k = iy * self.x_mv.len() + ix;
                let v = self.values[k];
                s.push_str(&format!(
                    "{x:e},{y:e},{:e},{:e},{:e}\n",
                    self.epsilon_uev[k],
                    v.norm(),
                    v.arg()
                ));
            }
        }
        s
    }
}

pub fn stability_map(
    spec: &SweepSpec,
    m: &LeverArmMatrix,
    cal: &BarrierCalibration,
    sys: &SystemParams,
) -> Result<StabilityMap, ScenarioError> {
    m.validate()?;
    cal.validate()?;
    spec.validate(m)?;
    sys.validate()?;
    let mut sys = sys.clone();
    if let Some(vb) = spec.barrier_mv {
        let tc = cal.tc_from_barrier(vb);
        for q in &mut sys.qubits {
            q.tc = tc;
        }
    }
    let xs = spec.x.values();
    let ys = spec.y.values();
    let mut eps = Vec::with_capacity(xs.len() * ys.len());
    let mut values = Vec::with_capacity(xs.len() * ys.len());
    for &vy in &ys {
        for &vx in &xs {
            let dv = spec.shifts(m, vx, vy)?;
            let dv: Vec<(&str, f64)> = dv.iter().map(|(g, v)| (g.as_str(), *v)).collect();
            let e = m.detuning(&dv)?;
            eps.push(e);
            values.push(transmission(sys.cavity.f_c, &sys.with_detuning(e)));
        }
    }
    Ok(StabilityMap {
        x_gate: spec.x.gate.clone(),
        y_gate: spec.y.gate.clone(),
        x_mv: xs,
        y_mv: ys,
        epsilon_uev: eps,
        values,
        tc_ghz: sys.qubits[0].tc,
    })
}

impl From<ElectrostaticsError> for ScenarioError {
    fn from(e: ElectrostaticsError) -> Self {
        match e {
            ElectrostaticsError::NotConverged { .. } => ScenarioError::NotConverged(e.to_string()),
            ElectrostaticsError::InvalidLayout(_)
            | ElectrostaticsError::UnknownGate(_)
            | ElectrostaticsError::InvalidArgument(_) => ScenarioError::Config(e.to_string()),
            ElectrostaticsError::OutsidePlane { .. } => ScenarioError::Config(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit_cavity::{CavityParams, QubitParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sys(gamma_mhz: f64) -> SystemParams {
        SystemParams::single(
            CavityParams {
                f_c: 6.8e9,
                kappa: 1.2e6,
                z0: 133.0,
            },
            QubitParams {
                epsilon: 0.0,
                tc: 6.2,
                gamma_c: gamma_mhz * 1e6,
                g_c: 50e6,
            },
        )
        .unwrap()
    }

    fn spec() -> SweepSpec {
        SweepSpec {
            x: SweepAxis {
                gate: "P1".into(),
                start_mv: -2.0,
                end_mv: 2.0,
                points: 81,
            },
            y: SweepAxis {
                gate: "P2".into(),
                start_mv: -2.0,
                end_mv: 2.0,
                points: 81,
            },
            reference_mv: BTreeMap::new(),
            fixed_mv: BTreeMap::new(),
            compensate_cp: false,
            barrier_mv: None,
        }
    }

    #[test]
    fn calibration_anchors() {
        let cal = BarrierCalibration::default();
        assert_relative_eq!(cal.tc_from_barrier(335.0), 5.275, max_relative = 1e-14);
        assert_relative_eq!(cal.tc_from_barrier(340.0), 7.432, max_relative = 1e-14);
        assert_relative_eq!(
            cal.v_scale_mv,
            5.0 / (7.432f64 / 5.275).ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(cal.v_scale_mv, 14.58, max_relative = 1e-3);
        // geometric mean of the anchors
        assert_relative_eq!(
            cal.tc_from_barrier(337.5),
            (5.275f64 * 7.432).sqrt(),
            max_relative = 1e-14
        );
        assert!((cal.tc_from_barrier(337.5) / 6.2 - 1.0).abs() < 0.015);
        assert_relative_eq!(
            cal.barrier_for_tc(6.8),
            335.0 + cal.v_scale_mv * (6.8f64 / 5.275).ln()
        );
        assert!(BarrierCalibration::from_anchors((335.0, 5.0), (340.0, 5.0)).is_err());
    }

    #[test]
    fn detuning_examples() {
        let m = LeverArmMatrix::new(&["P1", "P2"], &[0.1, 0.03], &[0.03, 0.1]).unwrap();
        assert_eq!(detuning_from_voltages(0.0, 0.0, &m).unwrap(), 0.0);
        assert_relative_eq!(
            detuning_from_voltages(1.0, -1.0, &m).unwrap(),
            140.0,
            max_relative = 1e-12
        );
        // antisymmetric sweep leaves the mean level alone
        assert!(m.mean_shift(&[("P1", 1.0), ("P2", -1.0)]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn compensation_examples() {
        let m = LeverArmMatrix::example();
        assert_eq!(cp_compensation(0.0, &m).unwrap(), (0.0, 0.0));
        let (p1, p2) = cp_compensation(10.0, &m).unwrap();
        assert!(p1 < 0.0 && p2 < 0.0 && p2.abs() > p1.abs(), "{p1} {p2}");

        let diag = LeverArmMatrix::new(&["P1", "P2", "CP"], &[0.1, 0.0, 0.02], &[0.0, 0.08, 0.05])
            .unwrap();
        let (p1, p2) = cp_compensation(10.0, &diag).unwrap();
        assert_relative_eq!(p1, -0.02 / 0.1 * 10.0, max_relative = 1e-14);
        assert_relative_eq!(p2, -0.05 / 0.08 * 10.0, max_relative = 1e-14);

        let singular =
            LeverArmMatrix::new(&["P1", "P2", "CP"], &[0.1, 0.1, 0.02], &[0.05, 0.05, 0.05])
                .unwrap();
        assert!(matches!(
            cp_compensation(1.0, &singular),
            Err(ScenarioError::Singular(_))
        ));
    }

    #[test]
    fn example_matrix_orders_cp_lever_arms() {
        let m = LeverArmMatrix::example();
        assert!(m.alpha(2, "CP").unwrap() > m.alpha(1, "CP").unwrap());
    }

    #[test]
    fn symmetric_dots_give_unit_slope() {
        let m = LeverArmMatrix::new(&["P1", "P2"], &[0.1, 0.0], &[0.0, 0.1]).unwrap();
        assert_relative_eq!(m.transition_slope("P1", "P2").unwrap(), 1.0);
        // the ε = 0 locus of the map lies on that line
        let map = stability_map(&spec(), &m, &BarrierCalibration::default(), &sys(36.0)).unwrap();
        for iy in 0..map.y_mv.len() {
            // both axes share one grid, so the diagonal is the ε = 0 line
            let k = iy * map.x_mv.len() + iy;
            assert!(map.epsilon_uev[k].abs() < 1e-9);
            assert!((map.at(iy, iy) - transmission(6.8e9, &sys(36.0))).norm() < 1e-12);
        }
    }

    #[test]
    fn compensated_cp_shift_restores_transition_line() {
        let m = LeverArmMatrix::example();
        let cal = BarrierCalibration::default();
        let base = stability_map(&spec(), &m, &cal, &sys(36.0)).unwrap();
        let mut shifted = spec();
        shifted.fixed_mv.insert("CP".into(), 10.0);
        let moved = stability_map(&shifted, &m, &cal, &sys(36.0)).unwrap();
        shifted.compensate_cp = true;
        let fixed = stability_map(&shifted, &m, &cal, &sys(36.0)).unwrap();
        let max_diff = |a: &StabilityMap| {
            a.epsilon_uev
                .iter()
                .zip(&base.epsilon_uev)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        assert!(max_diff(&moved) > 100.0);
        assert!(max_diff(&fixed) < 1e-9);
    }

    #[test]
    fn transition_width_grows_with_dephasing() {
        // ε extent where |A| < 0.5 along a line crossing the transition
        let m = LeverArmMatrix::example();
        let width = |gamma: f64| {
            let mut s = spec();
            s.x.start_mv = -1.0;
            s.x.end_mv = 1.0;
            s.x.points = 4001;
            s.y.start_mv = 0.0;
            s.y.end_mv = 0.01;
            s.y.points = 2;
            let map = stability_map(&s, &m, &BarrierCalibration::default(), &sys(gamma)).unwrap();
            let inside: Vec<f64> = (0..map.x_mv.len())
                .filter(|&ix| map.at(ix, 0).norm() < 0.5)
                .map(|ix| map.epsilon_uev[ix])
                .collect();
            inside.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - inside.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let w: Vec<f64> = [10.0, 36.0, 100.0, 200.0]
            .iter()
            .map(|&g| width(g))
            .collect();
        for p in w.windows(2) {
            assert!(p[1] > p[0], "{w:?}");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let m = LeverArmMatrix::example();
        let mut s = spec();
        s.y.gate = "P1".into();
        assert!(s.validate(&m).is_err());
        let mut s = spec();
        s.x.gate = "B9".into();
        assert!(s.validate(&m).is_err());
        let mut s = spec();
        s.x.points = 1;
        assert!(s.validate(&m).is_err());
        assert!(LeverArmMatrix::new(&["P1", "P2"], &[1.2, 0.0], &[0.0, 0.1]).is_err());
        assert!(LeverArmMatrix::new(&["P1"], &[0.1], &[0.1]).is_err());
    }

    proptest! {
        #[test]
        fn barrier_monotone(a in 300.0f64..380.0, b in 300.0f64..380.0) {
            prop_assume!(a < b);
            let cal = BarrierCalibration::default();
            prop_assert!(cal.tc_from_barrier(a) < cal.tc_from_barrier(b));
        }

        #[test]
        fn detuning_is_linear(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0, d in -10.0f64..10.0, k in -5.0f64..5.0) {
            let m = LeverArmMatrix::example();
            let e = |x: f64, y: f64| detuning_from_voltages(x, y, &m).unwrap();
            prop_assert!((e(a + c, b + d) - e(a, b) - e(c, d)).abs() < 1e-9);
            prop_assert!((e(k * a, k * b) - k * e(a, b)).abs() < 1e-9);
        }

        #[test]
        fn compensation_holds_both_levels(dv in -50.0f64..50.0) {
            let m = LeverArmMatrix::example();
            let (p1, p2) = cp_compensation(dv, &m).unwrap();
            let [u1, u2] = m.dot_shifts(&[("CP", dv), ("P1", p1), ("P2", p2)]).unwrap();
            prop_assert!(u1.abs() < 1e-12 * 1e3 * dv.abs().max(1.0));
            prop_assert!(u2.abs() < 1e-12 * 1e3 * dv.abs().max(1.0));
        }
    }

    #[test]
    fn example_matrix_matches_example_layout() {
        let solved = LeverArmMatrix::example_from_layout(5.0, &SolverOptions::default()).unwrap();
        let frozen = LeverArmMatrix::example();
        for (a, b) in solved
            .dot1
            .iter()
            .chain(&solved.dot2)
            .zip(frozen.dot1.iter().chain(&frozen.dot2))
        {
            assert!((a - b).abs() < 5e-6, "{a} vs {b}");
        }
        // CP sits nearer dot 2
        assert!(frozen.alpha(2, "CP").unwrap() > frozen.alpha(1, "CP").unwrap());
    }
}
