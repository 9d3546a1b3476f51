use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cqed::electrostatics::{
    coupling_from_beta, differential_lever_arm, solve_lever_arm, ElectrodeRole,
};
use cqed::fitting::{
    fit_cavity_lorentzian, fit_detuning_trace, fit_spectroscopy_linewidth, DetuningFitConfig,
    SpectroscopyFitConfig,
};
use cqed::noise;
use cqed::qubit_cavity::{detuning_trace, spectroscopy_map, transmission, ComplexTrace};
use cqed::scenarios::{
    conventions, read_csv_columns, reproduce, stability_map, write_atomic, Config, Figure, Range,
    ScenarioError,
};

/// Lever-arm electrostatics, charge-qubit/cavity response and fitting.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// JSON configuration file; omit to use the built-in reference defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for synthetic noise; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve lever-arm maps for layout gates.
    Levermap {
        /// Gates to solve; defaults to every gate in the layout.
        #[arg(long)]
        gate: Vec<String>,
    },
    /// Cavity transmission versus probe frequency at one detuning.
    Transmit {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        epsilon: f64,
        /// Probe frequencies as START:END:POINTS in Hz; defaults to f_c ± 200 MHz.
        #[arg(long, value_parser = parse_range)]
        f_hz: Option<Range>,
    },
    /// Stability map over the configured plunger sweep, or a detuning trace.
    Sweep {
        /// Detuning trace at f_c as START:END:POINTS in ueV instead of a voltage map.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        epsilon: Option<Range>,
    },
    /// Two-tone phase response over detuning and drive frequency.
    Spectroscopy {
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        epsilon: Option<Range>,
        #[arg(long, value_parser = parse_range)]
        fs_hz: Option<Range>,
    },
    /// Fit a CSV trace.
    Fit {
        #[arg(long, value_enum)]
        kind: FitKind,
        #[arg(long)]
        input: PathBuf,
    },
    /// Regenerate one figure dataset, or all of them.
    Reproduce {
        /// fig1c, fig2a, fig2b, fig2c, fig2d, fig3a, fig3b, fig3c or all.
        figure: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FitKind {
    /// Columns f_hz and power.
    Lorentzian,
    /// Columns sweep_value (ueV) and abs.
    Detuning,
    /// Columns fs_hz and phase.
    Spectroscopy,
}

fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err("expected START:END:POINTS".into());
    };
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(Range::new(
        num(a)?,
        num(b)?,
        n.parse().map_err(|e| format!("{n:?}: {e}"))?,
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: a fit did not converge; outputs were written");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn sidecar(
    cli: &Cli,
    name: &str,
    config: &Config,
    seed: u64,
    derived: Value,
) -> Result<(), ScenarioError> {
    let doc = json!({
        "command": name,
        "seed": seed,
        "conventions": conventions(),
        "config": serde_json::to_value(config).expect("config serializes"),
        "derived": derived,
    });
    let text = serde_json::to_string_pretty(&doc).expect("sidecar serializes") + "\n";
    write_atomic(&cli.out.join(format!("{name}.json")), text.as_bytes())
}

/// Returns false when every output was written but a fit failed to converge.
fn run(cli: &Cli) -> Result<bool, ScenarioError> {
    let config = match &cli.config {
        Some(p) => Config::from_path(p)?,
        None => Config::reference(),
    };
    std::fs::create_dir_all(&cli.out).map_err(io_err(&cli.out))?;
    let seed = cli.seed.unwrap_or(config.seed);
    let out = |name: &str| cli.out.join(name);

    match &cli.command {
        Command::Levermap { gate } => {
            let layout = config.layout()?;
            let cav = config.cavity.as_ref();
            let gates: Vec<String> = if gate.is_empty() {
                layout
                    .electrodes
                    .iter()
                    .filter(|e| e.role == ElectrodeRole::Gate)
                    .map(|e| e.name.clone())
                    .collect()
            } else {
                gate.clone()
            };
            let [d1, d2] = config.figures.fig1c.dots;
            let mut derived = serde_json::Map::new();
            for g in &gates {
                let map = solve_lever_arm(&layout, g, &config.solver.options())?;
                write_atomic(&out(&format!("levermap_{g}.csv")), map.to_csv().as_bytes())?;
                let beta = differential_lever_arm(&map, d1, d2)?;
                let g_c = cav
                    .map(|c| coupling_from_beta(beta.abs(), c.f_c, c.z0))
                    .transpose()?;
                derived.insert(
                    g.clone(),
                    json!({
                        "alpha_dot1": map.interpolate(d1)?,
                        "alpha_dot2": map.interpolate(d2)?,
                        "beta": beta,
                        "g_c_hz": g_c,
                        "residual": map.residual,
                        "iterations": map.iterations,
                    }),
                );
            }
            sidecar(cli, "levermap", &config, seed, Value::Object(derived))?;
        }
        Command::Transmit { epsilon, f_hz } => {
            let sys = config.system()?.with_detuning(*epsilon);
            let f = f_hz.unwrap_or(Range::new(
                sys.cavity.f_c - 200e6,
                sys.cavity.f_c + 200e6,
                4001,
            ));
            f.validate("--f-hz")?;
            let points = f.values();
            let values = points.iter().map(|&x| transmission(x, &sys)).collect();
            let trace = ComplexTrace::new("f", "Hz", points, values)?;
            write_atomic(&out("transmit.csv"), trace.to_csv().as_bytes())?;
            sidecar(
                cli,
                "transmit",
                &config,
                seed,
                json!({"epsilon_ueV": epsilon}),
            )?;
        }
        Command::Sweep { epsilon } => match epsilon {
            Some(r) => {
                r.validate("--epsilon")?;
                let mut trace = detuning_trace(&r.values(), &config.system()?, None)?;
                let n = noise::gaussian(trace.values.len(), config.noise.detuning, seed);
                for (v, e) in trace.values.iter_mut().zip(n) {
                    *v = num_complex::Complex64::from_polar((v.norm() + e).max(0.0), v.arg());
                }
                write_atomic(&out("sweep.csv"), trace.to_csv().as_bytes())?;
                sidecar(cli, "sweep", &config, seed, json!({"kind": "detuning"}))?;
            }
            None => {
                config.require(&["cavity", "qubits", "lever_arms", "sweep", "barrier"])?;
                let spec = config.sweep.clone().expect("required");
                let map = stability_map(
                    &spec,
                    &config.lever_arms()?,
                    &config.barrier()?,
                    &config.system()?,
                )?;
                write_atomic(&out("sweep.csv"), map.to_csv().as_bytes())?;
                sidecar(
                    cli,
                    "sweep",
                    &config,
                    seed,
                    json!({"kind": "stability", "tc_ghz": map.tc_ghz}),
                )?;
            }
        },
        Command::Spectroscopy { epsilon, fs_hz } => {
            let s = &config.figures.fig3b;
            let eps = epsilon.unwrap_or(s.epsilon_uev);
            let fs = fs_hz.unwrap_or(s.fs_hz);
            eps.validate("--epsilon")?;
            fs.validate("--fs-hz")?;
            let drive = config.drive_hz()?;
            let mut map = spectroscopy_map(&eps.values(), &fs.values(), &config.system()?, drive)?;
            noise::add_gaussian(&mut map.phase, config.noise.spectroscopy, seed);
            write_atomic(&out("spectroscopy.csv"), map.to_csv().as_bytes())?;
            sidecar(
                cli,
                "spectroscopy",
                &config,
                seed,
                json!({"drive_hz": drive}),
            )?;
        }
        Command::Fit { kind, input } => {
            let text = std::fs::read_to_string(input).map_err(io_err(input))?;
            let (header, cols) = read_csv_columns(&text)?;
            let col = |name: &str| {
                header
                    .iter()
                    .position(|h| h == name)
                    .map(|i| cols[i].clone())
                    .ok_or_else(|| {
                        ScenarioError::Data(format!("{} has no {name:?} column", input.display()))
                    })
            };
            let (fit, extra) = match kind {
                FitKind::Lorentzian => {
                    let r = fit_cavity_lorentzian(&col("f_hz")?, &col("power")?)?;
                    (r.fit, json!({"warnings": r.warnings}))
                }
                FitKind::Detuning => {
                    let cfg = DetuningFitConfig::default();
                    let r = fit_detuning_trace(
                        &col("sweep_value")?,
                        &col("abs")?,
                        &config.cavity()?,
                        &cfg,
                    )?;
                    (r.fit, Value::Null)
                }
                FitKind::Spectroscopy => {
                    let cfg = SpectroscopyFitConfig::default();
                    let r = fit_spectroscopy_linewidth(&col("fs_hz")?, &col("phase")?, &cfg)?;
                    let extra = json!({
                        "saturation_corrected_gamma_c_hz": r.corrected_gamma,
                        "peak_saturation": r.p_max,
                        "power_broadened": r.power_broadened,
                        "warnings": r.warnings,
                    });
                    (r.fit, extra)
                }
            };
            let doc =
                json!({"input": input.display().to_string(), "fit": fit.to_json(), "extra": extra});
            let text = serde_json::to_string_pretty(&doc).expect("fit serializes") + "\n";
            write_atomic(&out("fit.json"), text.as_bytes())?;
            println!("{text}");
            return Ok(fit.converged);
        }
        Command::Reproduce { figure } => {
            let figures = if figure == "all" {
                Figure::ALL.to_vec()
            } else {
                vec![figure.parse()?]
            };
            let mut ok = true;
            for f in figures {
                let report = reproduce(f, &config, &cli.out, cli.seed)?;
                for w in &report.warnings {
                    eprintln!("{f}: {w}");
                }
                println!(
                    "{f}: wrote {} files and {}",
                    report.files.len(),
                    report.sidecar.display()
                );
                ok &= report.converged;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}
