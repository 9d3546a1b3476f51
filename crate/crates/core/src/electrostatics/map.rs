use std::fmt::Write as _;

use super::layout::GateLayout;
use super::solver::{solve_potential, Excitation, SolveStats, SolverOptions};
use super::ElectrostaticsError;
use crate::units::{ELEMENTARY_CHARGE, HBAR};

/// Dimensionless lever arm α_g(x, y) on the quantum-well plane.
#[derive(Debug, Clone)]
pub struct LeverArmMap {
    pub gate: String,
    /// Node counts along x and y (either may be 1).
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    /// Row-major, x fastest.
    pub alpha: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

const EDGE_TOL: f64 = 1e-9;

impl LeverArmMap {
    pub fn at_node(&self, i: usize, j: usize) -> f64 {
        self.alpha[j * self.nx + i]
    }

    pub fn x_extent(&self) -> f64 {
        (self.nx - 1) as f64 * self.spacing
    }

    pub fn y_extent(&self) -> f64 {
        (self.ny - 1) as f64 * self.spacing
    }

    /// Bilinear interpolation at `(x, y)` nm.
    pub fn interpolate(&self, r: [f64; 2]) -> Result<f64, ElectrostaticsError> {
        let (i0, tx) = locate(r[0], self.nx, self.spacing)
            .ok_or(ElectrostaticsError::OutsidePlane { x: r[0], y: r[1] })?;
        let (j0, ty) = locate(r[1], self.ny, self.spacing)
            .ok_or(ElectrostaticsError::OutsidePlane { x: r[0], y: r[1] })?;
        let i1 = (i0 + 1).min(self.nx - 1);
        let j1 = (j0 + 1).min(self.ny - 1);
        let a00 = self.at_node(i0, j0);
        let a10 = self.at_node(i1, j0);
        let a01 = self.at_node(i0, j1);
        let a11 = self.at_node(i1, j1);
        Ok((1.0 - ty) * ((1.0 - tx) * a00 + tx * a10) + ty * ((1.0 - tx) * a01 + tx * a11))
    }

    /// Writes `x_nm,y_nm,alpha` rows, y outer, x inner.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_nm,y_nm,alpha\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    i as f64 * self.spacing,
                    j as f64 * self.spacing,
                    self.at_node(i, j)
                );
            }
        }
        out
    }
}

/// Cell index and fractional offset along one axis.
fn locate(x: f64, n: usize, h: f64) -> Option<(usize, f64)> {
    if n == 1 {
        return (x.abs() <= EDGE_TOL).then_some((0, 0.0));
    }
    let ext = (n - 1) as f64 * h;
    if !(x >= -EDGE_TOL && x <= ext + EDGE_TOL) {
        return None;
    }
    let s = (x / h).clamp(0.0, (n - 1) as f64);
    let i = (s.floor() as usize).min(n - 2);
    Some((i, s - i as f64))
}

/// Solves for the unit-voltage potential of `gate` and samples it on the
/// well plane. The map values are clipped to `[0, 1]`; the clip never moves
/// a value by more than the solver tolerance.
pub fn solve_lever_arm(
    layout: &GateLayout,
    gate: &str,
    opts: &SolverOptions,
) -> Result<LeverArmMap, ElectrostaticsError> {
    let (grid, stats) = solve_potential(layout, &Excitation::Electrode(gate.to_string()), opts)?;
    Ok(plane_map(layout, gate, &grid, &stats))
}

pub(crate) fn plane_map(
    layout: &GateLayout,
    name: &str,
    grid: &super::solver::PotentialGrid,
    stats: &SolveStats,
) -> LeverArmMap {
    let [nx, ny, _] = grid.shape;
    let k = layout.well_index();
    let mut alpha = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            alpha.push(grid.get(i, j, k).clamp(0.0, 1.0));
        }
    }
    LeverArmMap {
        gate: name.to_string(),
        nx,
        ny,
        spacing: grid.spacing,
        alpha,
        residual: stats.residual,
        iterations: stats.iterations,
    }
}

/// Lever-arm map of the grounded outer boundary held at 1 with every
/// electrode grounded; completes the superposition Σ_g α_g + α_boundary = 1.
pub fn solve_boundary_map(
    layout: &GateLayout,
    opts: &SolverOptions,
) -> Result<LeverArmMap, ElectrostaticsError> {
    let (grid, stats) = solve_potential(layout, &Excitation::OuterBoundary, opts)?;
    Ok(plane_map(layout, "<boundary>", &grid, &stats))
}

/// β = α(r1) − α(r2), dimensionless. The factor e is applied in
/// [`coupling_from_beta`].
pub fn differential_lever_arm(
    map: &LeverArmMap,
    r1: [f64; 2],
    r2: [f64; 2],
) -> Result<f64, ElectrostaticsError> {
    Ok(map.interpolate(r1)? - map.interpolate(r2)?)
}

/// Zero-detuning charge-cavity coupling g_c/2π in Hz:
/// `(e β / 2) f_c sqrt(Z0 / (π ħ))`, with `f_c` in Hz and `z0` in ohms.
pub fn coupling_from_beta(beta: f64, f_c: f64, z0: f64) -> Result<f64, ElectrostaticsError> {
    if !(f_c > 0.0) || !(z0 > 0.0) {
        return Err(ElectrostaticsError::InvalidArgument(format!(
            "f_c and Z0 must be positive (got {f_c}, {z0})"
        )));
    }
    Ok(ELEMENTARY_CHARGE * beta / 2.0 * f_c * (z0 / (std::f64::consts::PI * HBAR)).sqrt())
}

/// One sampled lever-arm profile.
#[derive(Debug, Clone)]
pub struct SliceProfile {
    pub points: Vec<[f64; 2]>,
    /// Distance from `start`, nm.
    pub distance: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// `n` equally spaced interpolated samples from `start` to `end`.
pub fn lever_arm_slice(
    map: &LeverArmMap,
    start: [f64; 2],
    end: [f64; 2],
    n: usize,
) -> Result<SliceProfile, ElectrostaticsError> {
    if n < 2 {
        return Err(ElectrostaticsError::InvalidArgument(format!(
            "a slice needs at least 2 samples, got {n}"
        )));
    }
    let length = ((end[0] - start[0]).powi(2) + (end[1] - start[1]).powi(2)).sqrt();
    let mut profile = SliceProfile {
        points: Vec::with_capacity(n),
        distance: Vec::with_capacity(n),
        alpha: Vec::with_capacity(n),
    };
    for s in 0..n {
        let t = s as f64 / (n - 1) as f64;
        let p = [
            start[0] + t * (end[0] - start[0]),
            start[1] + t * (end[1] - start[1]),
        ];
        profile.alpha.push(map.interpolate(p)?);
        profile.points.push(p);
        profile.distance.push(t * length);
    }
    Ok(profile)
}
