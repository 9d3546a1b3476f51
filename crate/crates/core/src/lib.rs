//! Device modeling for split-gate silicon circuit QED: lever arms from
//! electrostatics, charge-qubit/cavity response from steady-state
//! input-output theory, and least-squares extraction of κ, γ_c, g_c and t_c.

// `!(x > 0.0)` is the NaN-rejecting form used for argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod electrostatics;
pub mod fitting;
pub mod noise;
pub mod qubit_cavity;
pub mod scenarios;
pub mod units;
