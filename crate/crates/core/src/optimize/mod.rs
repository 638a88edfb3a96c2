//! Estimates of the sharp supercritical constant, the trial-function gap
//! certificate, the weight sweep, and a mountain-pass solver for the
//! polyharmonic equation with supercritical exponent.

mod ascent;
mod krylov;
mod mountain;

pub use ascent::{
    alpha_sweep, maximize_supercritical, strict_gap_trial, AscentConfig, OptimReport,
    StrictGapReport, SweepReport, SweepRow, GAP_FLOOR, MONOTONE_SLACK, TAIL_FRACTION,
};
pub use mountain::{
    choose_r, mountain_pass_solve, pde_residual, ps_diagnostics, MountainPassConfig, PathState,
    PdeResidual, PdeSolution, PsDiagnostics,
};
