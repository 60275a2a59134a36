//! Cartesian trajectory integration of the two-center flow.

use crate::dynamics::{eval_integrals, force, InvariantPoint, Params, PhaseState};
use crate::error::{Error, Result};
use crate::ode::{self, Control, Finish, OdeFailure, OdeOptions, OdeSystem};
use nalgebra::Vector3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopConditions {
    pub t_max: f64,
    pub r_max: f64,
    pub tol: f64,
}

impl Default for StopConditions {
    fn default() -> Self {
        Self { t_max: 1e4, r_max: 1e3, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TimeLimit,
    RadiusReached,
    Collision,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::TimeLimit => "time-limit",
            Termination::RadiusReached => "radius-reached",
            Termination::Collision => "collision",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, PhaseState)>,
    pub tol: f64,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn first(&self) -> &PhaseState {
        &self.samples[0].1
    }

    pub fn last(&self) -> &PhaseState {
        &self.samples[self.samples.len() - 1].1
    }

    /// Largest componentwise drift of `(h, l, g)` from the initial sample,
    /// each scaled by `max(|F_0|, 1)`.
    pub fn max_relative_drift(&self, p: &Params) -> Result<[f64; 3]> {
        let f0 = eval_integrals(self.first(), p)?.as_array();
        let mut worst = [0.0f64; 3];
        for (_, s) in &self.samples {
            let f = eval_integrals(s, p)?.as_array();
            for i in 0..3 {
                worst[i] = worst[i].max((f[i] - f0[i]).abs() / f0[i].abs().max(1.0));
            }
        }
        Ok(worst)
    }

    pub fn initial_integrals(&self, p: &Params) -> Result<InvariantPoint> {
        eval_integrals(self.first(), p)
    }
}

struct TwoCenter<'a>(&'a Params);

impl OdeSystem<6> for TwoCenter<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 6]) -> [f64; 6] {
        let f = force(&Vector3::new(y[0], y[1], y[2]), self.0);
        [y[3], y[4], y[5], f.x, f.y, f.z]
    }
}

/// Integrates Hamilton's equations from `s0` until `t_max`, until `|q|`
/// reaches `r_max`, or until the orbit comes within `1e-6 a` of a center.
/// A state already beyond `r_max` is integrated until it next crosses it.
pub fn integrate(s0: &PhaseState, p: &Params, stop: &StopConditions) -> Result<Trajectory> {
    eval_integrals(s0, p)?;
    let eps = p.collision_radius();
    let mut samples = vec![(0.0, *s0)];
    let opts = OdeOptions::with_tol(stop.tol);
    let r_max = stop.r_max;
    let run = ode::integrate(
        &TwoCenter(p),
        0.0,
        s0.to_array(),
        stop.t_max,
        &opts,
        |_, y| (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt() - r_max,
        |t, y| {
            let s = PhaseState::from_array(y);
            samples.push((t, s));
            let (r1, r2) = p.distances(&s.q);
            if r1.min(r2) < eps {
                Control::Stop(())
            } else {
                Control::Continue
            }
        },
    );
    match run {
        Ok(run) => {
            let termination = match run.finish {
                Finish::End => Termination::TimeLimit,
                Finish::Event => {
                    samples.push((run.t, PhaseState::from_array(&run.y)));
                    Termination::RadiusReached
                }
                Finish::Observer(()) => Termination::Collision,
            };
            Ok(Trajectory {
                samples,
                tol: stop.tol,
                termination,
                accepted_steps: run.accepted,
                rejected_steps: run.rejected,
            })
        }
        Err(OdeFailure::StepUnderflow { .. }) => Ok(Trajectory {
            samples,
            tol: stop.tol,
            termination: Termination::Collision,
            accepted_steps: 0,
            rejected_steps: 0,
        }),
        Err(e) => Err(Error::Integration(format!("{e:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_flow_is_straight() {
        let p = Params::unit(0.0, 0.0);
        let s0 = PhaseState::new([1.0, -2.0, 0.5], [0.3, 0.4, -0.1]);
        let tr = integrate(&s0, &p, &StopConditions { t_max: 50.0, r_max: 1e6, tol: 1e-10 }).unwrap();
        assert_eq!(tr.termination, Termination::TimeLimit);
        for (t, s) in &tr.samples {
            let want = s0.q + s0.p * *t;
            assert!((s.q - want).norm() < 1e-9);
            assert!((s.p - s0.p).norm() < 1e-12);
        }
        assert!(tr.samples.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn head_on_collision_terminates() {
        let p = Params::unit(1.0, 0.0);
        let s0 = PhaseState::new([0.0, 0.0, 5.0], [0.0, 0.0, -1.0]);
        let tr = integrate(&s0, &p, &StopConditions::default()).unwrap();
        assert_eq!(tr.termination, Termination::Collision);
    }

    #[test]
    fn radius_event_is_exact() {
        let p = Params::unit(2.0, 1.0);
        let s0 = PhaseState::new([-20.0, 1.5, 0.3], [2.0, 0.0, 0.1]);
        let tr = integrate(&s0, &p, &StopConditions { t_max: 1e4, r_max: 100.0, tol: 1e-10 }).unwrap();
        assert_eq!(tr.termination, Termination::RadiusReached);
        assert!((tr.last().q.norm() - 100.0).abs() < 1e-9);
    }
}
