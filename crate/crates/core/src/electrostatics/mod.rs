//! Laplace electrostatics for gate lever arms.
//!
//! Each gate's lever arm α_g(r) is the potential on the quantum-well plane
//! when that gate sits at 1 V and every other conductor (other gates,
//! grounded 2DEG screens, outer boundary) is grounded. With a uniform
//! dielectric and only Dirichlet conductors the permittivity drops out.

mod layout;
mod map;
mod solver;

pub use layout::{
    split_gate_example, Electrode, ElectrodeRole, GateLayout, EXAMPLE_DOT_1, EXAMPLE_DOT_2,
};
pub use map::{
    coupling_from_beta, differential_lever_arm, lever_arm_slice, solve_boundary_map,
    solve_lever_arm, LeverArmMap, SliceProfile,
};
pub use solver::{solve_potential, Excitation, PotentialGrid, SolveStats, SolverOptions};

#[derive(Debug, thiserror::Error)]
pub enum ElectrostaticsError {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("unknown gate {0:?}")]
    UnknownGate(String),
    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },
    #[error("position ({x}, {y}) nm lies outside the evaluation plane")]
    OutsidePlane { x: f64, y: f64 },
    #[error("{0}")]
    InvalidArgument(String),
}
