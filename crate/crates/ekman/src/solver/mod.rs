//! Direct axisymmetric Stokes–Coriolis solver on the disk shore, in
//! terrain-following coordinates.
//!
//! Each step is `R(Δt/2) D(Δt) R(Δt/2)`: `R` projects and then applies a
//! Crank–Nicolson rotation coupled to the pressure (energy conserving),
//! `D` is backward-Euler diffusion with bilinear finite elements (energy
//! dissipating). All linear operators are factored once per run.

pub mod advect;
pub mod band;
pub mod fem;
pub mod grid;
pub mod projection;
pub mod run;
pub mod step;

pub use grid::{Grid2D, GridSpec};
pub use run::{compare, decay_rate, is_monotone_decreasing, Run, Sample, SolverConfig, Trajectory};
pub use step::{SolverState, StepReport, Stepper};
