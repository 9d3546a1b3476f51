//! One pipeline per figure. Every run writes CSV data plus a JSON sidecar
//! holding the configuration, unit conventions and derived numbers.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::electrostatics::{
    coupling_from_beta, differential_lever_arm, lever_arm_slice, solve_lever_arm,
};
use crate::fitting::{
    fit_cavity_lorentzian, fit_detuning_trace, fit_spectroscopy_linewidth, lorentzian_power,
    DetuningFitConfig, SpectroscopyFitConfig,
};
use crate::noise;
use crate::qubit_cavity::{
    detuning_trace, dispersion, effective_coupling, linspace, resonant_detuning,
    spectroscopy_linecut, spectroscopy_map, transmission, transmission_map,
};
use crate::units::GHZ;

use super::config::Config;
use super::io::write_atomic;
use super::voltage::{cp_compensation, stability_map};
use super::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1c,
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    Fig3a,
    Fig3b,
    Fig3c,
}

impl Figure {
    pub const ALL: [Figure; 8] = [
        Figure::Fig1c,
        Figure::Fig2a,
        Figure::Fig2b,
        Figure::Fig2c,
        Figure::Fig2d,
        Figure::Fig3a,
        Figure::Fig3b,
        Figure::Fig3c,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Figure::Fig1c => "fig1c",
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig2c => "fig2c",
            Figure::Fig2d => "fig2d",
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig3c => "fig3c",
        }
    }

    /// Config entries the pipeline cannot run without.
    pub fn requirements(self) -> &'static [&'static str] {
        match self {
            Figure::Fig1c => &["layout", "cavity"],
            Figure::Fig2a | Figure::Fig2b => {
                &["cavity", "qubits", "lever_arms", "sweep", "barrier"]
            }
            Figure::Fig2c | Figure::Fig2d => &["cavity", "qubits", "barrier"],
            Figure::Fig3a => &["cavity"],
            Figure::Fig3b => &["cavity", "qubits", "drive_hz"],
            Figure::Fig3c => &["cavity", "qubits"],
        }
    }
}

impl FromStr for Figure {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Figure::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| ScenarioError::Config(format!("unknown figure {s:?}")))
    }
}

impl std::fmt::Display for Figure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub sidecar: PathBuf,
    /// False when any fit in the pipeline failed to converge.
    pub converged: bool,
    pub warnings: Vec<String>,
    pub derived: Value,
}

/// Unit conventions recorded in every sidecar.
pub fn conventions() -> Value {
    json!({
        "frequency": "Hz unless a column name says otherwise",
        "tc": "2t_c/h in GHz",
        "epsilon": "detuning in ueV",
        "rates": "kappa, gamma_c, g_c and drive are rate/2pi in Hz",
        "voltage": "mV",
        "length": "nm",
        "transmission": "A/A0 normalized to 1 at the bare cavity resonance",
        "phase": "rad",
        "noise": "additive Gaussian, seeded ChaCha8 stream per dataset",
    })
}

/// Independent noise stream `k` for a run seed.
fn stream(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k)
}

/// Adds N(0, σ²) to |v| of each value, keeping its phase.
fn noisy_magnitudes(values: &mut [Complex64], sigma: f64, seed: u64) {
    if sigma == 0.0 {
        return;
    }
    let n = noise::gaussian(values.len(), sigma, seed);
    for (v, e) in values.iter_mut().zip(n) {
        *v = Complex64::from_polar((v.norm() + e).max(0.0), v.arg());
    }
}

/// Positions of strict local maxima of `y` over `x`.
fn local_maxima(x: &[f64], y: &[f64]) -> Vec<f64> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .map(|i| x[i])
        .collect()
}

fn local_minima(x: &[f64], y: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    local_maxima(x, &neg)
}

struct Writer<'a> {
    out: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), ScenarioError> {
        let path = self.out.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.files.push(path);
        Ok(())
    }
}

fn file_names(files: &[PathBuf]) -> Vec<String> {
    files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect()
}

/// Runs one figure pipeline into `out`. `seed` overrides the config seed.
pub fn reproduce(
    figure: Figure,
    config: &Config,
    out: &Path,
    seed: Option<u64>,
) -> Result<RunReport, ScenarioError> {
    config.require(figure.requirements())?;
    let seed = seed.unwrap_or(config.seed);
    let mut w = Writer {
        out,
        files: Vec::new(),
    };
    let mut warnings = Vec::new();
    let mut converged = true;
    if let Some(c) = &config.cavity {
        warnings.extend(c.warnings());
    }
    let derived = match figure {
        Figure::Fig1c => fig1c(config, &mut w)?,
        Figure::Fig2a => fig2a(config, seed, &mut w)?,
        Figure::Fig2b => fig2b(config, seed, &mut w)?,
        Figure::Fig2c => fig2c(config, seed, &mut w)?,
        Figure::Fig2d => fig2d(config, seed, &mut w, &mut converged, &mut warnings)?,
        Figure::Fig3a => fig3a(config, seed, &mut w, &mut converged, &mut warnings)?,
        Figure::Fig3b => fig3b(config, seed, &mut w, &mut converged, &mut warnings)?,
        Figure::Fig3c => fig3c(config, seed, &mut w)?,
    };
    let sidecar = out.join(format!("{figure}.json"));
    let doc = json!({
        "figure": figure.as_str(),
        "seed": seed,
        "conventions": conventions(),
        "config": serde_json::to_value(config).expect("config serializes"),
        "derived": derived,
        "files": file_names(&w.files),
        "converged": converged,
        "warnings": warnings,
    });
    let text = serde_json::to_string_pretty(&doc).expect("sidecar serializes") + "\n";
    write_atomic(&sidecar, text.as_bytes())?;
    Ok(RunReport {
        files: w.files,
        sidecar,
        converged,
        warnings,
        derived,
    })
}

fn fig1c(config: &Config, w: &mut Writer) -> Result<Value, ScenarioError> {
    let layout = config.layout()?;
    let cav = config.cavity()?;
    let s = &config.figures.fig1c;
    let map = solve_lever_arm(&layout, &s.gate, &config.solver.options())?;
    w.write("fig1c_levermap.csv", &map.to_csv())?;

    let mut csv = String::from("slice,distance_nm,x_nm,y_nm,alpha\n");
    for (k, sl) in s.slices.iter().enumerate() {
        let prof = lever_arm_slice(&map, [sl[0], sl[1]], [sl[2], sl[3]], s.slice_points)?;
        for i in 0..prof.alpha.len() {
            let [x, y] = prof.points[i];
            csv.push_str(&format!(
                "{k},{:e},{x:e},{y:e},{:e}\n",
                prof.distance[i], prof.alpha[i]
            ));
        }
    }
    w.write("fig1c_slices.csv", &csv)?;

    // rotate the dot pair about its midpoint
    let [d1, d2] = s.dots;
    let c = [(d1[0] + d2[0]) / 2.0, (d1[1] + d2[1]) / 2.0];
    let half = ((d2[0] - d1[0]).powi(2) + (d2[1] - d1[1]).powi(2)).sqrt() / 2.0;
    let mut csv = String::from("angle_deg,beta,g_c_hz\n");
    let mut best = (0.0f64, 0.0f64);
    for k in 0..s.angles.max(2) {
        let deg = 180.0 * k as f64 / (s.angles.max(2) - 1) as f64;
        let (sn, cs) = deg.to_radians().sin_cos();
        let r1 = [c[0] - half * cs, c[1] - half * sn];
        let r2 = [c[0] + half * cs, c[1] + half * sn];
        let beta = differential_lever_arm(&map, r1, r2)?;
        let g = coupling_from_beta(beta.abs(), cav.f_c, cav.z0)?;
        csv.push_str(&format!("{deg:e},{beta:e},{g:e}\n"));
        if beta.abs() > best.1.abs() {
            best = (deg, beta);
        }
    }
    w.write("fig1c_orientation.csv", &csv)?;

    let h = map.spacing;
    let gx = (map.interpolate([c[0] + h, c[1]])? - map.interpolate([c[0] - h, c[1]])?) / (2.0 * h);
    let gy = (map.interpolate([c[0], c[1] + h])? - map.interpolate([c[0], c[1] - h])?) / (2.0 * h);
    let beta = differential_lever_arm(&map, d1, d2)?;
    Ok(json!({
        "gate": s.gate,
        "alpha_dot1": map.interpolate(d1)?,
        "alpha_dot2": map.interpolate(d2)?,
        "beta": beta,
        "g_c_hz": coupling_from_beta(beta.abs(), cav.f_c, cav.z0)?,
        "max_abs_beta": best.1.abs(),
        "max_beta_angle_deg": best.0,
        "gradient_angle_deg": gy.atan2(gx).to_degrees(),
        "solver_residual": map.residual,
        "solver_iterations": map.iterations,
        "note": "geometry is illustrative; the measured device's dimensions are not available",
    }))
}

fn fig2a(config: &Config, seed: u64, w: &mut Writer) -> Result<Value, ScenarioError> {
    let spec = config.sweep.clone().expect("required");
    let m = config.lever_arms()?;
    let cal = config.barrier()?;
    let mut map = stability_map(&spec, &m, &cal, &config.system()?)?;
    noisy_magnitudes(&mut map.values, config.noise.map, stream(seed, 0));
    w.write("fig2a.csv", &map.to_csv())?;
    Ok(json!({
        "transition_slope": m.transition_slope(&spec.x.gate, &spec.y.gate)?,
        "tc_ghz": map.tc_ghz,
        "lever_arms_illustrative": true,
    }))
}

fn fig2b(config: &Config, seed: u64, w: &mut Writer) -> Result<Value, ScenarioError> {
    let base = config.sweep.clone().expect("required");
    let m = config.lever_arms()?;
    let cal = config.barrier()?;
    let sys = config.system()?;
    let shift = config.figures.fig2b.cp_shift_mv;
    let cp0 = base
        .fixed_mv
        .get("CP")
        .or(base.reference_mv.get("CP"))
        .copied()
        .unwrap_or(0.0);

    let mut moved = base.clone();
    moved.fixed_mv.insert("CP".into(), cp0 + shift);
    moved.compensate_cp = false;
    let mut raw = stability_map(&moved, &m, &cal, &sys)?;
    moved.compensate_cp = true;
    let mut comp = stability_map(&moved, &m, &cal, &sys)?;
    let reference = stability_map(&base, &m, &cal, &sys)?;

    let shift_eps = raw.epsilon_uev[0] - reference.epsilon_uev[0];
    let residual_eps = comp
        .epsilon_uev
        .iter()
        .zip(&reference.epsilon_uev)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let (x1, x2) = (m.alpha(1, &base.x.gate)?, m.alpha(2, &base.x.gate)?);
    let cp_ref = base.reference_mv.get("CP").copied().unwrap_or(0.0);
    let (p1, p2) = cp_compensation(cp0 + shift - cp_ref, &m)?;

    noisy_magnitudes(&mut raw.values, config.noise.map, stream(seed, 0));
    noisy_magnitudes(&mut comp.values, config.noise.map, stream(seed, 1));
    w.write("fig2b_uncompensated.csv", &raw.to_csv())?;
    w.write("fig2b.csv", &comp.to_csv())?;
    Ok(json!({
        "cp_mv": cp0 + shift,
        "compensation_mv": {"P1": p1, "P2": p2},
        "uncompensated_epsilon_shift_ueV": shift_eps,
        "uncompensated_line_shift_mv": -shift_eps / (1000.0 * (x1 - x2)),
        "compensated_max_epsilon_change_ueV": residual_eps,
        "lever_arms_illustrative": true,
    }))
}

fn fig2c(config: &Config, seed: u64, w: &mut Writer) -> Result<Value, ScenarioError> {
    let s = &config.figures.fig2c;
    s.barrier_mv.validate("fig2c.barrier_mv")?;
    s.epsilon_uev.validate("fig2c.epsilon_uev")?;
    let cal = config.barrier()?;
    let mut sys = config.system()?;
    if let Some(g) = s.g_c_hz {
        sys.qubits.iter_mut().for_each(|q| q.g_c = g);
    }
    let eps = s.epsilon_uev.values();
    let mut csv = String::from("v_b2_mV,tc_ghz,epsilon_ueV,abs,phase\n");
    let mut rows = Vec::new();
    for (k, vb) in s.barrier_mv.values().into_iter().enumerate() {
        let tc = cal.tc_from_barrier(vb);
        sys.qubits.iter_mut().for_each(|q| q.tc = tc);
        let trace = detuning_trace(&eps, &sys, None)?;
        let mags = trace.magnitudes();
        let dips: Vec<[f64; 2]> = local_minima(&eps, &mags)
            .into_iter()
            .map(|e| {
                [
                    e,
                    mags[eps.iter().position(|&x| x == e).expect("grid point")],
                ]
            })
            .collect();
        let mut values = trace.values.clone();
        noisy_magnitudes(&mut values, config.noise.map, stream(seed, k as u64));
        for (e, v) in eps.iter().zip(&values) {
            csv.push_str(&format!(
                "{vb:e},{tc:e},{e:e},{:e},{:e}\n",
                v.norm(),
                v.arg()
            ));
        }
        rows.push(json!({"v_b2_mV": vb, "tc_ghz": tc, "dips_ueV_abs": dips}));
    }
    w.write("fig2c.csv", &csv)?;
    let f_c = sys.cavity.f_c / GHZ;
    Ok(json!({
        "v_b2_at_tc_equal_f_c_mV": cal.barrier_for_tc(f_c),
        "rows": rows,
    }))
}

fn fig2d(
    config: &Config,
    seed: u64,
    w: &mut Writer,
    converged: &mut bool,
    warnings: &mut Vec<String>,
) -> Result<Value, ScenarioError> {
    let s = &config.figures.fig2d;
    s.epsilon_uev.validate("fig2d.epsilon_uev")?;
    let cal = config.barrier()?;
    let mut sys = config.system()?;
    if let Some(g) = s.g_c_hz {
        sys.qubits.iter_mut().for_each(|q| q.g_c = g);
    }
    let eps = s.epsilon_uev.values();
    let cfg = DetuningFitConfig {
        gamma_c: s.fixed_gamma_c_hz,
        ..Default::default()
    };
    let mut traces = Vec::new();
    for (k, &vb) in s.barrier_mv.iter().enumerate() {
        let tc = cal.tc_from_barrier(vb);
        sys.qubits.iter_mut().for_each(|q| q.tc = tc);
        let mut trace = detuning_trace(&eps, &sys, None)?;
        noisy_magnitudes(
            &mut trace.values,
            config.noise.detuning,
            stream(seed, k as u64),
        );
        w.write(&format!("fig2d_{vb}mV.csv"), &trace.to_csv())?;
        let fit = fit_detuning_trace(&trace.points, &trace.magnitudes(), &sys.cavity, &cfg)?;
        *converged &= fit.fit.converged;
        warnings.extend(fit.fit.diagnostics.iter().map(|d| format!("{vb} mV: {d}")));
        let q = sys.qubits[0];
        traces.push(json!({
            "v_b2_mV": vb,
            "truth": {"tc": tc, "g_c": q.g_c, "gamma_c": q.gamma_c},
            "fit": fit.fit.to_json(),
            "resonant_detuning_ueV": resonant_detuning(tc, sys.cavity.f_c).ok().map(|r| r.1),
        }));
    }
    Ok(json!({
        "gamma_c_floated": s.fixed_gamma_c_hz.is_none(),
        "traces": traces,
    }))
}

fn fig3a(
    config: &Config,
    seed: u64,
    w: &mut Writer,
    converged: &mut bool,
    warnings: &mut Vec<String>,
) -> Result<Value, ScenarioError> {
    let cav = config.cavity()?;
    let s = &config.figures.fig3a;
    let f = linspace(
        cav.f_c - s.span_hz / 2.0,
        cav.f_c + s.span_hz / 2.0,
        s.points,
    );
    let mut p: Vec<f64> = f
        .iter()
        .map(|&x| lorentzian_power(x, cav.f_c, cav.kappa, 1.0))
        .collect();
    noise::add_gaussian(&mut p, config.noise.cavity_power, stream(seed, 0));
    let fit = fit_cavity_lorentzian(&f, &p)?;
    *converged &= fit.fit.converged;
    warnings.extend(fit.warnings.iter().cloned());
    let mut csv = String::from("f_hz,power,fit\n");
    for (x, y) in f.iter().zip(&p) {
        csv.push_str(&format!(
            "{x:e},{y:e},{:e}\n",
            lorentzian_power(*x, fit.f_c, fit.kappa, fit.amplitude)
        ));
    }
    w.write("fig3a.csv", &csv)?;
    Ok(json!({
        "fit": fit.fit.to_json(),
        "kappa_hz": fit.kappa,
        "kappa_relative_error": fit.kappa / cav.kappa - 1.0,
    }))
}

fn fig3b(
    config: &Config,
    seed: u64,
    w: &mut Writer,
    converged: &mut bool,
    warnings: &mut Vec<String>,
) -> Result<Value, ScenarioError> {
    let s = &config.figures.fig3b;
    s.epsilon_uev.validate("fig3b.epsilon_uev")?;
    s.fs_hz.validate("fig3b.fs_hz")?;
    let sys = config.system()?;
    let drive = config.drive_hz()?;
    let eps = s.epsilon_uev.values();
    let fs = s.fs_hz.values();
    let map = spectroscopy_map(&eps, &fs, &sys, drive)?;

    // ridge of each noiseless row against the dispersion relation
    let mut ridge_dev = 0.0f64;
    for (k, &e) in eps.iter().enumerate() {
        let cut = map.linecut(k);
        let base = cut[0];
        let (i, dev) = cut
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p - base).abs()))
            .fold((0, 0.0), |b, c| if c.1 > b.1 { c } else { b });
        if dev > 0.0 {
            ridge_dev = ridge_dev.max((fs[i] - dispersion(e, sys.qubits[0].tc) * GHZ).abs());
        }
    }

    let mut noisy = map.clone();
    noise::add_gaussian(&mut noisy.phase, config.noise.spectroscopy, stream(seed, 0));
    w.write("fig3b.csv", &noisy.to_csv())?;

    let lc_sys = sys.with_detuning(s.linecut_epsilon_uev);
    let mut cut = spectroscopy_linecut(&fs, &lc_sys, drive)?;
    noise::add_gaussian(&mut cut, config.noise.spectroscopy, stream(seed, 1));
    let mut csv = String::from("fs_hz,phase\n");
    for (f, p) in fs.iter().zip(&cut) {
        csv.push_str(&format!("{f:e},{p:e}\n"));
    }
    w.write("fig3b_linecut.csv", &csv)?;
    let fit = fit_spectroscopy_linewidth(&fs, &cut, &SpectroscopyFitConfig::default())?;
    *converged &= fit.fit.converged;
    warnings.extend(fit.warnings.iter().cloned());
    Ok(json!({
        "drive_hz": drive,
        "linecut_epsilon_ueV": s.linecut_epsilon_uev,
        "fit": fit.fit.to_json(),
        "gamma_c_hz": fit.gamma_c,
        "saturation_corrected_gamma_c_hz": fit.corrected_gamma,
        "peak_saturation": fit.p_max,
        "power_broadened": fit.power_broadened,
        "ridge_max_deviation_hz": ridge_dev,
        "ridge_grid_step_hz": (fs[1] - fs[0]).abs(),
    }))
}

fn fig3c(config: &Config, seed: u64, w: &mut Writer) -> Result<Value, ScenarioError> {
    let s = &config.figures.fig3c;
    s.f_hz.validate("fig3c.f_hz")?;
    s.epsilon_uev.validate("fig3c.epsilon_uev")?;
    let mut sys = config.system()?;
    if let Some(g) = s.g_c_hz {
        sys.qubits.iter_mut().for_each(|q| q.g_c = g);
    }
    let f = s.f_hz.values();
    let eps = s.epsilon_uev.values();
    let mut map = transmission_map(&f, &eps, &sys)?;

    // minima along ε closest to the cavity frequency, before noise
    let fi = (0..f.len())
        .min_by(|&a, &b| {
            (f[a] - sys.cavity.f_c)
                .abs()
                .total_cmp(&(f[b] - sys.cavity.f_c).abs())
        })
        .expect("non-empty");
    let column: Vec<f64> = (0..eps.len()).map(|e| map.at(fi, e).norm()).collect();
    let minima = local_minima(&eps, &column);

    let q = sys.qubits[0];
    let resonance = resonant_detuning(q.tc, sys.cavity.f_c).ok();
    let rabi = resonance.map(|(_, e)| {
        let at = sys.with_detuning(e);
        let g_eff = effective_coupling(&at.qubits[0]);
        let span = 4.0 * g_eff + 10.0 * sys.cavity.kappa;
        let n = (2.0 * span / 10e3).round() as usize + 1;
        let scan = linspace(sys.cavity.f_c - span, sys.cavity.f_c + span, n);
        let mag: Vec<f64> = scan.iter().map(|&x| transmission(x, &at).norm()).collect();
        let peaks = local_maxima(&scan, &mag);
        let split = if peaks.len() == 2 {
            Some(peaks[1] - peaks[0])
        } else {
            None
        };
        json!({"g_eff_hz": g_eff, "peaks_hz": peaks, "splitting_hz": split, "scan_step_hz": 10e3})
    });

    let mut values = std::mem::take(&mut map.values);
    noisy_magnitudes(&mut values, config.noise.map, stream(seed, 0));
    map.values = values;
    w.write("fig3c.csv", &map.to_csv())?;
    Ok(json!({
        "resonant_detuning_ueV": resonance.map(|r| [r.0, r.1]),
        "resonant_detuning_vs_11_7_ueV": resonance.map(|r| r.1 / 11.7 - 1.0),
        "map_minima_at_f_c_ueV": minima,
        "map_minima_frequency_hz": f[fi],
        "vacuum_rabi": rabi,
    }))
}
