use std::f64::consts::PI;

use super::layout::GateLayout;
use super::ElectrostaticsError;

/// Which conductor is held at unit potential; everything else is grounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Excitation {
    Electrode(String),
    /// The outer domain boundary at 1 with every electrode grounded. Together
    /// with the per-electrode solutions this completes the superposition.
    OuterBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stopping threshold on [`PotentialGrid::residual`], roughly the max
    /// potential error left in units of the excitation.
    pub tol: f64,
    /// Defaults to `200 * max(nx, ny, nz)` when `None`.
    pub max_iter: Option<usize>,
    /// Over-relaxation factor. `None` uses the optimum for the estimated
    /// Jacobi spectral radius.
    pub omega: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: None,
            omega: None,
        }
    }
}

/// Scalar potential on the node grid, in units of the excitation voltage.
#[derive(Debug, Clone)]
pub struct PotentialGrid {
    pub shape: [usize; 3],
    pub spacing: f64,
    /// x fastest, then y, then z.
    pub values: Vec<f64>,
    /// `true` on Dirichlet nodes; their entry in `values` is the boundary value.
    pub fixed: Vec<bool>,
}

/// Convergence record of one solve.
#[derive(Debug, Clone)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub omega: f64,
    /// Jacobi spectral radius used for ω and the residual scaling.
    pub rho: f64,
    /// Relative max-norm residual after every sweep.
    pub history: Vec<f64>,
    /// Dirichlet energy `½ Σ (φ_p − φ_q)²` over grid edges touching a free
    /// node, after every sweep. Its excess over the minimum is the squared
    /// energy norm of the residual.
    pub energy_history: Vec<f64>,
}

/// Index ranges and neighbor strides of the free-node stencil.
#[derive(Clone, Copy)]
struct Stencil {
    shape: [usize; 3],
    /// Strides of the active (non-collapsed) axes.
    offsets: [usize; 3],
    active: usize,
}

impl Stencil {
    fn new(shape: [usize; 3]) -> Self {
        let strides = [1, shape[0], shape[0] * shape[1]];
        let mut offsets = [0; 3];
        let mut active = 0;
        for a in 0..3 {
            if shape[a] > 1 {
                offsets[active] = strides[a];
                active += 1;
            }
        }
        Self {
            shape,
            offsets,
            active,
        }
    }

    fn range(&self, axis: usize) -> std::ops::Range<usize> {
        let n = self.shape[axis];
        if n > 1 {
            1..n - 1
        } else {
            0..1
        }
    }

    #[inline(always)]
    fn mean(&self, v: &[f64], p: usize) -> f64 {
        let o = &self.offsets;
        match self.active {
            3 => {
                (v[p - o[0]] + v[p + o[0]] + v[p - o[1]] + v[p + o[1]] + v[p - o[2]] + v[p + o[2]])
                    / 6.0
            }
            2 => (v[p - o[0]] + v[p + o[0]] + v[p - o[1]] + v[p + o[1]]) / 4.0,
            _ => (v[p - o[0]] + v[p + o[0]]) / 2.0,
        }
    }

    /// Calls `f(p)` for every free node of `color` (0 = red, 1 = black),
    /// in ascending index order.
    #[inline(always)]
    fn for_color(&self, fixed: &[bool], color: usize, mut f: impl FnMut(usize)) {
        let [nx, ny, _] = self.shape;
        let xr = self.range(0);
        for k in self.range(2) {
            for j in self.range(1) {
                let base = (k * ny + j) * nx;
                let mut i = xr.start;
                if (i + j + k) % 2 != color {
                    i += 1;
                }
                while i < xr.end {
                    let p = base + i;
                    if !fixed[p] {
                        f(p);
                    }
                    i += 2;
                }
            }
        }
    }

    fn for_free(&self, fixed: &[bool], mut f: impl FnMut(usize)) {
        let [nx, ny, _] = self.shape;
        for k in self.range(2) {
            for j in self.range(1) {
                let base = (k * ny + j) * nx;
                for i in self.range(0) {
                    let p = base + i;
                    if !fixed[p] {
                        f(p);
                    }
                }
            }
        }
    }
}

impl PotentialGrid {
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.shape[1] + j) * self.shape[0] + i
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    /// Builds the Dirichlet data for one excitation.
    pub fn for_excitation(
        layout: &GateLayout,
        excitation: &Excitation,
    ) -> Result<Self, ElectrostaticsError> {
        if let Excitation::Electrode(name) = excitation {
            if layout.electrode(name).is_none() {
                return Err(ElectrostaticsError::UnknownGate(name.clone()));
            }
        }
        let shape = layout.shape();
        let total = shape.iter().product();
        let mut grid = PotentialGrid {
            shape,
            spacing: layout.spacing,
            values: vec![0.0; total],
            fixed: vec![false; total],
        };
        let boundary_value = match excitation {
            Excitation::OuterBoundary => 1.0,
            Excitation::Electrode(_) => 0.0,
        };
        let [nx, ny, nz] = shape;
        let on_face = |idx: usize, n: usize| n > 1 && (idx == 0 || idx == n - 1);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    if on_face(i, nx) || on_face(j, ny) || on_face(k, nz) {
                        let p = grid.index(i, j, k);
                        grid.fixed[p] = true;
                        grid.values[p] = boundary_value;
                    }
                }
            }
        }
        for e in &layout.electrodes {
            let nb = layout.rasterize(e).ok_or_else(|| {
                ElectrostaticsError::InvalidLayout(format!("{} is empty", e.name))
            })?;
            let v = match excitation {
                Excitation::Electrode(name) if *name == e.name => 1.0,
                _ => 0.0,
            };
            for k in nb.lo[2]..=nb.hi[2] {
                for j in nb.lo[1]..=nb.hi[1] {
                    for i in nb.lo[0]..=nb.hi[0] {
                        let p = grid.index(i, j, k);
                        grid.fixed[p] = true;
                        grid.values[p] = v;
                    }
                }
            }
        }
        Ok(grid)
    }

    fn stencil(&self) -> Stencil {
        Stencil::new(self.shape)
    }

    /// Spectral radius of the Jacobi averaging operator on the bounding box.
    /// Dirichlet nodes inside the box only shrink the true radius, so this is
    /// an upper bound for the actual geometry.
    pub fn box_jacobi_radius(&self) -> f64 {
        let axes: Vec<usize> = (0..3).filter(|&a| self.shape[a] > 1).collect();
        if axes.is_empty() {
            return 0.0;
        }
        let sum: f64 = axes
            .iter()
            .map(|&a| (PI / (self.shape[a] - 1) as f64).cos())
            .sum();
        sum / axes.len() as f64
    }

    /// Spectral radius of the Jacobi operator on the actual free-node set,
    /// estimated with a short Lanczos run (capped by the box bound).
    pub fn jacobi_radius(&self) -> f64 {
        lanczos_radius(self, LANCZOS_STEPS).min(self.box_jacobi_radius())
    }

    /// `2 / (1 + sqrt(1 - ρ²))`.
    pub fn optimal_omega(rho: f64) -> f64 {
        2.0 / (1.0 + (1.0 - rho * rho).max(0.0).sqrt())
    }

    /// Max-norm stencil defect `|mean(neighbors) - φ|` over free nodes.
    pub fn defect(&self) -> f64 {
        self.defect_and_energy().0
    }

    /// Dirichlet energy over edges with at least one free endpoint.
    pub fn energy(&self) -> f64 {
        self.defect_and_energy().1
    }

    fn defect_and_energy(&self) -> (f64, f64) {
        let st = self.stencil();
        let v = &self.values;
        let fixed = &self.fixed;
        let mut worst = 0.0f64;
        let mut energy = 0.0;
        st.for_free(fixed, |p| {
            worst = worst.max((st.mean(v, p) - v[p]).abs());
            for &o in &st.offsets[..st.active] {
                let up = v[p] - v[p + o];
                energy += up * up;
                // a lower edge is counted here only when its other end is
                // fixed; otherwise that node counts it as its upper edge
                if fixed[p - o] {
                    let dn = v[p] - v[p - o];
                    energy += dn * dn;
                }
            }
        });
        (worst, 0.5 * energy)
    }

    /// Relative residual: the max-norm defect divided by the spectral gap
    /// `1 - ρ`, which puts it on the scale of the remaining potential error
    /// (boundary values are at most 1).
    pub fn residual(&self, rho: f64) -> f64 {
        self.defect() / (1.0 - rho).max(f64::EPSILON)
    }

    /// Red-black SOR until the residual drops to `opts.tol`.
    pub fn relax(&mut self, opts: &SolverOptions) -> Result<SolveStats, ElectrostaticsError> {
        if !(opts.tol > 0.0) {
            return Err(ElectrostaticsError::InvalidArgument(format!(
                "tol must be positive, got {}",
                opts.tol
            )));
        }
        let rho = self.jacobi_radius();
        let omega = opts.omega.unwrap_or_else(|| Self::optimal_omega(rho));
        if !(omega > 0.0 && omega < 2.0) {
            return Err(ElectrostaticsError::InvalidArgument(format!(
                "omega must lie in (0, 2), got {omega}"
            )));
        }
        let max_iter = opts
            .max_iter
            .unwrap_or(200 * self.shape.iter().copied().max().unwrap_or(1));
        let st = self.stencil();
        let gap = (1.0 - rho).max(f64::EPSILON);

        let mut stats = SolveStats {
            iterations: 0,
            residual: self.residual(rho),
            omega,
            rho,
            history: Vec::new(),
            energy_history: Vec::new(),
        };
        if stats.residual <= opts.tol {
            return Ok(stats);
        }
        for iter in 1..=max_iter {
            for color in 0..2 {
                let fixed = &self.fixed;
                let v = &mut self.values;
                st.for_color(fixed, color, |p| {
                    let mean = st.mean(v, p);
                    v[p] += omega * (mean - v[p]);
                });
            }
            let (defect, energy) = self.defect_and_energy();
            stats.iterations = iter;
            stats.residual = defect / gap;
            stats.history.push(stats.residual);
            stats.energy_history.push(energy);
            if stats.residual <= opts.tol {
                return Ok(stats);
            }
        }
        Err(ElectrostaticsError::NotConverged {
            residual: stats.residual,
            iterations: max_iter,
        })
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

const LANCZOS_STEPS: usize = 80;

/// Largest eigenvalue of the Jacobi averaging operator restricted to the
/// free nodes (Dirichlet nodes read as zero). The operator is symmetric
/// because every free node averages over the same neighbor count.
fn lanczos_radius(grid: &PotentialGrid, steps: usize) -> f64 {
    let st = grid.stencil();
    let fixed = &grid.fixed;
    let n = fixed.iter().filter(|f| !**f).count();
    if n == 0 {
        return 0.0;
    }
    let len = fixed.len();
    let apply = |x: &[f64], y: &mut [f64]| {
        st.for_free(fixed, |p| y[p] = st.mean(x, p));
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let steps = steps.min(n);
    let start = 1.0 / (n as f64).sqrt();
    let mut v: Vec<f64> = fixed.iter().map(|&f| if f { 0.0 } else { start }).collect();
    let mut v_prev = vec![0.0; len];
    let mut w = vec![0.0; len];
    let mut alphas = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps);
    for _ in 0..steps {
        apply(&v, &mut w);
        let alpha = dot(&w, &v);
        let beta_prev = betas.last().copied().unwrap_or(0.0);
        for i in 0..len {
            w[i] -= alpha * v[i] + beta_prev * v_prev[i];
        }
        alphas.push(alpha);
        let beta = dot(&w, &w).sqrt();
        if beta < 1e-12 {
            break;
        }
        betas.push(beta);
        std::mem::swap(&mut v_prev, &mut v);
        for i in 0..len {
            v[i] = w[i] / beta;
        }
    }
    let k = alphas.len();
    let mut t = nalgebra::DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    t.symmetric_eigenvalues().max()
}

/// Solves Laplace's equation for one excitation and returns the full grid.
pub fn solve_potential(
    layout: &GateLayout,
    excitation: &Excitation,
    opts: &SolverOptions,
) -> Result<(PotentialGrid, SolveStats), ElectrostaticsError> {
    layout.validate()?;
    let mut grid = PotentialGrid::for_excitation(layout, excitation)?;
    let stats = grid.relax(opts)?;
    Ok((grid, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electrostatics::layout::Electrode;

    fn box_2d(n: usize) -> GateLayout {
        let l = n as f64;
        GateLayout {
            domain: [l, 0.0, l],
            spacing: 1.0,
            well_depth: l / 2.0,
            electrodes: vec![Electrode::gate("west", [0.0, 0.0, 1.0, 0.0, 0.0, l - 1.0])],
        }
    }

    fn plate() -> GateLayout {
        GateLayout {
            domain: [0.0, 0.0, 20.0],
            spacing: 1.0,
            well_depth: 10.0,
            electrodes: vec![Electrode::gate("hot", [0.0, 0.0, 0.0, 0.0, 0.0, 0.0])],
        }
    }

    #[test]
    fn parallel_plate_is_linear() {
        let opts = SolverOptions {
            tol: 1e-10,
            ..Default::default()
        };
        let (grid, _) =
            solve_potential(&plate(), &Excitation::Electrode("hot".into()), &opts).unwrap();
        for k in 0..=20 {
            let exact = 1.0 - k as f64 / 20.0;
            assert!((grid.get(0, 0, k) - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn energy_decreases_every_sweep() {
        let (_, stats) = solve_potential(
            &box_2d(40),
            &Excitation::Electrode("west".into()),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(stats.residual <= 1e-6);
        for w in stats.energy_history.windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-12),
                "energy rose: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn energy_matches_plate_capacitance() {
        // unit drop over 20 cells: ½ · 20 · (1/20)² = 1/40
        let opts = SolverOptions {
            tol: 1e-12,
            ..Default::default()
        };
        let (grid, _) =
            solve_potential(&plate(), &Excitation::Electrode("hot".into()), &opts).unwrap();
        assert!((grid.energy() - 1.0 / 40.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_gate() {
        let err = solve_potential(
            &box_2d(10),
            &Excitation::Electrode("nope".into()),
            &SolverOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ElectrostaticsError::UnknownGate(_)));
    }

    #[test]
    fn reports_non_convergence() {
        let opts = SolverOptions {
            tol: 1e-12,
            max_iter: Some(3),
            omega: None,
        };
        match solve_potential(&box_2d(30), &Excitation::Electrode("west".into()), &opts) {
            Err(ElectrostaticsError::NotConverged {
                residual,
                iterations,
            }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-12);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_options() {
        let layout = box_2d(10);
        let ex = Excitation::Electrode("west".into());
        let bad_tol = SolverOptions {
            tol: 0.0,
            ..Default::default()
        };
        assert!(solve_potential(&layout, &ex, &bad_tol).is_err());
        let bad_omega = SolverOptions {
            omega: Some(2.0),
            ..Default::default()
        };
        assert!(solve_potential(&layout, &ex, &bad_omega).is_err());
    }

    #[test]
    fn lanczos_matches_box_radius_on_empty_box() {
        // no interior electrodes: the box formula is exact
        let layout = GateLayout {
            domain: [30.0, 20.0, 10.0],
            spacing: 1.0,
            well_depth: 5.0,
            electrodes: vec![],
        };
        let grid = PotentialGrid::for_excitation(&layout, &Excitation::OuterBoundary).unwrap();
        assert!((grid.jacobi_radius() - grid.box_jacobi_radius()).abs() < 1e-6);
    }

    #[test]
    fn interior_electrodes_shrink_radius() {
        let grid = PotentialGrid::for_excitation(
            &crate::electrostatics::split_gate_example(10.0),
            &Excitation::OuterBoundary,
        )
        .unwrap();
        let rho = grid.jacobi_radius();
        assert!(rho < grid.box_jacobi_radius());
        assert!(rho > 0.9);
    }
}
