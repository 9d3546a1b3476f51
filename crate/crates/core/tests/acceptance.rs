//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints a PASS/FAIL line even when an earlier one fails.

use std::path::Path;
use std::process::{Command, Stdio};

use cqed::electrostatics::{
    coupling_from_beta, solve_boundary_map, solve_lever_arm, solve_potential, split_gate_example,
    Electrode, Excitation, GateLayout, SolverOptions,
};
use cqed::fitting::{
    fit_cavity_lorentzian, fit_detuning_trace, fit_spectroscopy_linewidth, levenberg_marquardt,
    lorentzian_power, DetuningFitConfig, FitOptions, FitProblem, SpectroscopyFitConfig,
};
use cqed::noise;
use cqed::qubit_cavity::{
    detuning_trace, effective_coupling, resonant_detuning, spectroscopy_linecut, transmission,
    CavityParams, QubitParams, SystemParams,
};
use cqed::scenarios::{tc_from_barrier, BarrierCalibration};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// Oracle constants written out independently of the crate's units module.
const E: f64 = 1.602_176_634e-19;
const H: f64 = 6.626_070_15e-34;

fn cavity() -> CavityParams {
    CavityParams {
        f_c: 6.8e9,
        kappa: 1.2e6,
        z0: 133.0,
    }
}

fn system(tc: f64, g: f64, gamma: f64, eps: f64) -> SystemParams {
    SystemParams::single(
        cavity(),
        QubitParams {
            epsilon: eps,
            tc,
            gamma_c: gamma,
            g_c: g,
        },
    )
    .unwrap()
}

fn c1_coupling() -> Outcome {
    let hbar = H / (2.0 * std::f64::consts::PI);
    let oracle = |b: f64| E * b / 2.0 * 6.8e9 * (133.0 / (std::f64::consts::PI * hbar)).sqrt();
    let g = |b: f64| coupling_from_beta(b, 6.8e9, 133.0).unwrap();
    let (g11, g13, g20) = (g(0.11), g(0.13), g(0.2));
    let ok = (g11 / 38.0e6 - 1.0).abs() <= 0.005
        && (g13 - 44.9e6).abs() <= 1e6
        && (g20 - 69.0e6).abs() <= 1e6
        && [0.11, 0.13, 0.2]
            .iter()
            .all(|&b| (g(b) / oracle(b) - 1.0).abs() < 1e-12);
    check(
        ok,
        format!(
            "g(0.11) = {:.2} MHz, g(0.13) = {:.2} MHz, g(0.2) = {:.2} MHz",
            g11 / 1e6,
            g13 / 1e6,
            g20 / 1e6
        ),
    )
}

fn c2_resonance() -> Outcome {
    let h_uev_ghz = H / E * 1e15;
    let oracle = h_uev_ghz * (6.8f64.powi(2) - 6.2f64.powi(2)).sqrt();
    let (lo, hi) = resonant_detuning(6.2, 6.8e9).unwrap();
    let ok =
        (hi - oracle).abs() < 1e-9 && (lo + oracle).abs() < 1e-9 && (hi / 11.7 - 1.0).abs() <= 0.02;
    check(
        ok,
        format!(
            "±{hi:.4} ueV ({:+.2}% from 11.7)",
            100.0 * (hi / 11.7 - 1.0)
        ),
    )
}

fn c3_kappa() -> Outcome {
    let f: Vec<f64> = (0..401)
        .map(|i| 6.794e9 + 12e6 * i as f64 / 400.0)
        .collect();
    let mut p: Vec<f64> = f
        .iter()
        .map(|&x| lorentzian_power(x, 6.8e9, 1.2e6, 1.0))
        .collect();
    noise::add_gaussian(&mut p, 0.005, 2024);
    let fit = fit_cavity_lorentzian(&f, &p).map_err(|e| e.to_string())?;
    let rel = fit.kappa / 1.2e6 - 1.0;
    check(
        rel.abs() <= 0.01 && fit.fit.converged,
        format!("kappa = {:.4} MHz ({:+.3}%)", fit.kappa / 1e6, 100.0 * rel),
    )
}

fn c4_detuning_round_trip() -> Outcome {
    let eps: Vec<f64> = (0..481).map(|i| -60.0 + 120.0 * i as f64 / 480.0).collect();
    let mut lines = Vec::new();
    let mut ok = true;
    for (k, tc) in [5.275, 7.432].into_iter().enumerate() {
        let sys = system(tc, 58e6, 36e6, 0.0);
        let clean = detuning_trace(&eps, &sys, None).unwrap().magnitudes();
        let truth = [tc, 58e6, 36e6];
        let names = ["tc", "g_c", "gamma_c"];
        let cfg = DetuningFitConfig::default();

        let fit = fit_detuning_trace(&eps, &clean, &cavity(), &cfg).map_err(|e| e.to_string())?;
        let worst = names
            .iter()
            .zip(truth)
            .map(|(n, t)| (fit.fit.param(n).unwrap() / t - 1.0).abs())
            .fold(0.0, f64::max);
        ok &= worst <= 1e-4;

        let mut noisy = clean.clone();
        noise::add_gaussian(&mut noisy, 0.01, 100 + k as u64);
        let fit = fit_detuning_trace(&eps, &noisy, &cavity(), &cfg).map_err(|e| e.to_string())?;
        let z = names
            .iter()
            .zip(truth)
            .map(|(n, t)| (fit.fit.param(n).unwrap() - t).abs() / fit.fit.stderr_of(n).unwrap())
            .fold(0.0, f64::max);
        ok &= z <= 3.0 && fit.fit.converged;
        lines.push(format!(
            "tc {tc}: noiseless worst rel {worst:.1e}, noisy max |z| {z:.2}"
        ));
    }
    check(ok, lines.join("; "))
}

fn c5_linewidth() -> Outcome {
    let fs: Vec<f64> = (0..1201)
        .map(|i| 5.9e9 + 0.6e9 * i as f64 / 1200.0)
        .collect();
    let phase =
        spectroscopy_linecut(&fs, &system(6.2, 50e6, 36e6, 0.0), 2e6).map_err(|e| e.to_string())?;
    let fit = fit_spectroscopy_linewidth(&fs, &phase, &SpectroscopyFitConfig::default())
        .map_err(|e| e.to_string())?;
    let rel = fit.gamma_c / 36e6 - 1.0;
    check(
        rel.abs() <= 0.02,
        format!("FWHM = {:.3} MHz ({:+.2}%)", fit.gamma_c / 1e6, 100.0 * rel),
    )
}

/// Peak positions at a fixed 10 kHz grid over f_c ± 150 MHz.
fn rabi_peaks(g: f64) -> (Vec<f64>, f64) {
    let (_, eps) = resonant_detuning(6.2, 6.8e9).unwrap();
    let sys = system(6.2, g, 36e6, eps);
    let f: Vec<f64> = (0..=30_000).map(|i| 6.65e9 + 10e3 * i as f64).collect();
    let mag: Vec<f64> = f.iter().map(|&x| transmission(x, &sys).norm()).collect();
    let peaks = (1..f.len() - 1)
        .filter(|&i| mag[i] > mag[i - 1] && mag[i] > mag[i + 1])
        .map(|i| f[i])
        .collect();
    (peaks, effective_coupling(&sys.qubits[0]))
}

fn c6_vacuum_rabi() -> Outcome {
    let (peaks, g_eff) = rabi_peaks(50e6);
    if peaks.len() != 2 {
        return Err(format!("{} peaks at g_c = 50 MHz", peaks.len()));
    }
    let split = peaks[1] - peaks[0];
    let in_band = split >= 2.0 * g_eff * 0.85 && split <= 2.0 * g_eff;
    let splits: Vec<f64> = [30e6, 40e6, 50e6, 60e6]
        .iter()
        .map(|&g| {
            let (p, _) = rabi_peaks(g);
            if p.len() == 2 {
                p[1] - p[0]
            } else {
                f64::NAN
            }
        })
        .collect();
    let monotone = splits.windows(2).all(|w| w[1] > w[0]);
    check(
        in_band && monotone,
        format!(
            "splitting {:.2} MHz = {:.3} x 2g_eff; over g_c 30..60 MHz: {:?} MHz",
            split / 1e6,
            split / (2.0 * g_eff),
            splits
                .iter()
                .map(|s| (s / 1e4).round() / 100.0)
                .collect::<Vec<_>>()
        ),
    )
}

fn c7_electrostatics() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // maximum principle and superposition on the split-gate layout
    let tol = 1e-7;
    let opts = SolverOptions {
        tol,
        ..Default::default()
    };
    let layout = split_gate_example(5.0);
    let mut sum: Option<Vec<f64>> = None;
    let mut excitations: Vec<Excitation> = layout
        .electrodes
        .iter()
        .map(|e| Excitation::Electrode(e.name.clone()))
        .collect();
    excitations.push(Excitation::OuterBoundary);
    let mut bound_violation = 0.0f64;
    for ex in &excitations {
        let (grid, _) = solve_potential(&layout, ex, &opts).map_err(|e| e.to_string())?;
        for &v in &grid.values {
            bound_violation = bound_violation.max(-v).max(v - 1.0);
        }
        let s = sum.get_or_insert_with(|| vec![0.0; grid.values.len()]);
        s.iter_mut().zip(&grid.values).for_each(|(a, b)| *a += b);
    }
    let sup = sum
        .unwrap()
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max);
    ok &= bound_violation <= tol && sup <= 10.0 * tol;
    notes.push(format!(
        "max-principle overshoot {bound_violation:.1e}, superposition error {sup:.1e}"
    ));
    // the plane maps used downstream obey the same bounds after sampling
    let b = solve_boundary_map(&layout, &opts).map_err(|e| e.to_string())?;
    ok &= b.alpha.iter().all(|a| (0.0..=1.0).contains(a));

    // parallel plate: unit plate at z = 0, ground at z = 20, plane at 10
    let plate = GateLayout {
        domain: [0.0, 0.0, 20.0],
        spacing: 1.0,
        well_depth: 10.0,
        electrodes: vec![Electrode::gate("hot", [0.0, 0.0, 0.0, 0.0, 0.0, 0.0])],
    };
    let fine = SolverOptions {
        tol: 1e-9,
        ..Default::default()
    };
    let mid = solve_lever_arm(&plate, "hot", &fine)
        .map_err(|e| e.to_string())?
        .interpolate([0.0, 0.0])
        .unwrap();
    ok &= (mid - 0.5).abs() <= 1e-3;

    // square box with one energized side
    let n = 40.0;
    let square = GateLayout {
        domain: [n, 0.0, n],
        spacing: 1.0,
        well_depth: n / 2.0,
        electrodes: vec![Electrode::gate("west", [0.0, 0.0, 1.0, 0.0, 0.0, n - 1.0])],
    };
    let centre = solve_lever_arm(&square, "west", &fine)
        .map_err(|e| e.to_string())?
        .interpolate([n / 2.0, 0.0])
        .unwrap();
    ok &= (centre - 0.25).abs() <= 1e-3;
    notes.push(format!("plate midpoint {mid:.6}, box centre {centre:.6}"));

    // grid refinement on the cavity-gate map
    let d = SolverOptions::default();
    let coarse = solve_lever_arm(&split_gate_example(5.0), "CP", &d).map_err(|e| e.to_string())?;
    let finer = solve_lever_arm(&split_gate_example(2.5), "CP", &d).map_err(|e| e.to_string())?;
    let scale = coarse.alpha.iter().cloned().fold(0.0, f64::max);
    let (mut worst, mut worst_rel) = (0.0f64, 0.0f64);
    for j in 0..coarse.ny {
        for i in 0..coarse.nx {
            let (a, b) = (coarse.at_node(i, j), finer.at_node(2 * i, 2 * j));
            worst = worst.max((a - b).abs());
            if b > 0.01 {
                worst_rel = worst_rel.max((a / b - 1.0).abs());
            }
        }
    }
    ok &= worst <= 0.05 * scale;
    notes.push(format!(
        "5 nm vs 2.5 nm: max |dα| {:.2}% of map max (node-relative {:.1}% where α > 0.01)",
        100.0 * worst / scale,
        100.0 * worst_rel
    ));
    check(ok, notes.join("; "))
}

fn c8_calibration() -> Outcome {
    let cal = BarrierCalibration::default();
    let (a, b, c) = (
        cal.tc_from_barrier(335.0),
        cal.tc_from_barrier(340.0),
        tc_from_barrier(337.5, &cal),
    );
    let ok =
        (a - 5.275).abs() <= 1e-12 && (b - 7.432).abs() <= 1e-12 && (c / 6.2 - 1.0).abs() <= 0.015;
    check(
        ok,
        format!("335 mV -> {a} GHz, 340 mV -> {b} GHz, 337.5 mV -> {c:.4} GHz"),
    )
}

fn c9_lm() -> Outcome {
    let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
    let y: Vec<f64> = x.iter().map(|&t| 1.5 - 0.75 * t).collect();
    let model = |p: &[f64], t: f64| p[0] + p[1] * t;
    let problem = FitProblem {
        names: vec!["a".into(), "b".into()],
        model: &model,
        x: &x,
        y: &y,
        initial: vec![0.0, 0.0],
        lower: vec![f64::NEG_INFINITY; 2],
        upper: vec![f64::INFINITY; 2],
        options: FitOptions::default(),
    };
    let lin = levenberg_marquardt(&problem).map_err(|e| e.to_string())?;

    let f: Vec<f64> = (0..401)
        .map(|i| 6.794e9 + 12e6 * i as f64 / 400.0)
        .collect();
    let clean: Vec<f64> = f
        .iter()
        .map(|&v| lorentzian_power(v, 6.8e9, 1.2e6, 1.0))
        .collect();
    let truth = [6.8e9, 1.2e6, 1.0];
    let mut covered = [0usize; 3];
    for seed in 0..100 {
        let mut p = clean.clone();
        noise::add_gaussian(&mut p, 0.005, seed);
        let fit = fit_cavity_lorentzian(&f, &p).map_err(|e| e.to_string())?;
        for k in 0..3 {
            if (fit.fit.params[k] - truth[k]).abs() <= 3.0 * fit.fit.stderr[k] {
                covered[k] += 1;
            }
        }
    }
    let ok = lin.rss < 1e-20 && covered.iter().all(|&c| c >= 95);
    check(
        ok,
        format!(
            "linear rss {:.1e}; 3σ coverage (f_c, κ, A) = {covered:?} / 100",
            lin.rss
        ),
    )
}

fn run_fig3c(out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_cqed"))
        .args(["reproduce", "fig3c", "--seed", "7", "--out"])
        .arg(out)
        .stdout(Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("cqed exited with {status}"))
    }
}

fn c10_determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_fig3c(a.path())?;
    run_fig3c(b.path())?;
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for n in &names {
        let (x, y) = (
            std::fs::read(a.path().join(n)).unwrap(),
            std::fs::read(b.path().join(n)).map_err(|e| e.to_string())?,
        );
        if x != y {
            return Err(format!("{} differs between runs", n.to_string_lossy()));
        }
    }
    check(
        names.len() >= 2,
        format!("{} files byte-identical", names.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("coupling formula", c1_coupling),
        ("resonance condition", c2_resonance),
        ("kappa extraction", c3_kappa),
        ("detuning-trace round trip", c4_detuning_round_trip),
        ("gamma_c extraction", c5_linewidth),
        ("vacuum Rabi splitting", c6_vacuum_rabi),
        ("electrostatics properties", c7_electrostatics),
        ("barrier calibration", c8_calibration),
        ("LM engine", c9_lm),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} {:>2} {name}: {detail} [{:.1} s]",
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
