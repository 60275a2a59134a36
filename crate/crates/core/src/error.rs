use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("state within {dist:e} of a center (threshold {eps:e})")]
    Collision { dist: f64, eps: f64 },
    #[error("prolate momenta undefined on the symmetry axis")]
    AxisDegeneracy,
    #[error("pole of the separated momentum at {coord} = {value}")]
    Pole { coord: &'static str, value: f64 },
    #[error("coordinate {coord} = {value} outside its range")]
    OutOfRange { coord: &'static str, value: f64 },
    #[error("invariant point is not physical: {0}")]
    NonPhysical(String),
    #[error("invariant point lies on the critical set: {0}")]
    Critical(String),
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("quadrature did not reach tolerance: estimate {estimate:e} > {tol:e}")]
    Quadrature { estimate: f64, tol: f64 },
    #[error("extrapolation did not converge: {0:?}")]
    Extrapolation(Vec<f64>),
    #[error("invalid loop: {0}")]
    Loop(String),
    #[error("cutoff R = {r} too small (needs > {min})")]
    Cutoff { r: f64, min: f64 },
    #[error("Kepler solver did not converge after {0} iterations")]
    Kepler(usize),
    #[error("trajectory did not escape: {0}")]
    Trapped(String),
    #[error("energy {0} is trapping for this potential")]
    TrappingEnergy(f64),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("potential table: {0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;
