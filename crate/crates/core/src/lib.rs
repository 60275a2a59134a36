//! Numerical toolkit for the two-center (Euler) problem: integrals of
//! motion, bifurcation sets, modified actions, scattering monodromy and
//! scattering-level invariants.

pub mod actions;
pub mod bifurcation;
pub mod dynamics;
pub mod kepler;
pub mod knauf;
pub mod error;
pub mod monodromy;
pub mod ode;
pub mod poly;
pub mod quad;
pub mod scattering;
pub mod trajectory;

pub use dynamics::{
    cartesian_to_prolate, equations_of_motion, eval_integrals, prolate_to_cartesian,
    separated_momentum_sq, Coord, InvariantPoint, Params, PhaseState, ProlateState, Strengths,
};
pub use error::{Error, Result};
pub use trajectory::{integrate, StopConditions, Termination, Trajectory};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
