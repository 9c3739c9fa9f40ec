//! Bright solitons of the one-dimensional attractive nonlinear Schrödinger
//! equation, `i ψ̇ = [-d²/dx² - |ψ|²] ψ` (scaled units, g = -1).
//!
//! Two engines solve the same equation:
//!
//! * [`variational`] — time-dependent variational principle over a
//!   superposition of complex Gaussians `exp(-αx² + βx + γ)`; the dynamics of
//!   the parameters follows from a small linear system per time step.
//! * [`grid`] — explicit finite-difference time stepping of the discretized
//!   wave function, used as the numerically exact reference.
//!
//! [`scenarios`] builds single-soliton and collision initial conditions for
//! both engines and quantifies their agreement; [`cli`] exposes everything as
//! the `solitonlab` command-line tool with deterministic CSV output.

pub mod cli;
pub mod config;
pub mod gaussian;
pub mod grid;
pub mod linalg;
pub mod ode;
pub mod output;
pub mod scenarios;
pub mod variational;
