//! Chaotic-system trajectory sampling: Lorenz and Rossler systems integrated
//! with fixed-step classic Runge-Kutta (RK4), emitting one event per sample
//! interval projected onto two chosen coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{Event, EventSet};

/// Dynamical system with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "lowercase")]
pub enum OdeSystem {
    Lorenz { sigma: f64, beta: f64, rho: f64 },
    Rossler { a: f64, b: f64, c: f64 },
}

impl OdeSystem {
    fn derivative(&self, s: [f64; 3]) -> [f64; 3] {
        match *self {
            OdeSystem::Lorenz { sigma, beta, rho } => [
                sigma * (s[1] - s[0]),
                s[0] * (rho - s[2]) - s[1],
                s[0] * s[1] - beta * s[2],
            ],
            OdeSystem::Rossler { a, b, c } => {
                [-s[1] - s[2], s[0] + a * s[1], b + s[2] * (s[0] - c)]
            }
        }
    }
}

/// State coordinate used for the spatial projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn pick(self, s: [f64; 3]) -> f64 {
        match self {
            Axis::X => s[0],
            Axis::Y => s[1],
            Axis::Z => s[2],
        }
    }
}

/// Trajectory sampling specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSpec {
    #[serde(flatten)]
    pub system: OdeSystem,
    pub initial: [f64; 3],
    /// Total simulated time.
    pub total_time: f64,
    /// Interval between emitted events.
    pub sample_dt: f64,
    /// Integrator step upper bound; shrunk to divide `sample_dt` evenly.
    pub step: f64,
    pub projection: (Axis, Axis),
}

impl OdeSpec {
    fn validate(&self) -> Result<()> {
        let ok = self.total_time > 0.0
            && self.sample_dt > 0.0
            && self.step > 0.0
            && self.step <= self.sample_dt
            && self.initial.iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid trajectory spec: {self:?}"
            )))
        }
    }
}

fn rk4_step(system: &OdeSystem, s: [f64; 3], h: f64) -> [f64; 3] {
    let k1 = system.derivative(s);
    let k2 = system.derivative(add(s, scale(k1, h / 2.0)));
    let k3 = system.derivative(add(s, scale(k2, h / 2.0)));
    let k4 = system.derivative(add(s, scale(k3, h)));
    let mut out = s;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: [f64; 3], f: f64) -> [f64; 3] {
    [a[0] * f, a[1] * f, a[2] * f]
}

/// Integrates the full state trajectory, returning the state after every
/// sample interval (the initial state is not included).
pub fn integrate(spec: &OdeSpec) -> Result<Vec<[f64; 3]>> {
    spec.validate()?;
    let n_samples = (spec.total_time / spec.sample_dt).round() as usize;
    let substeps = (spec.sample_dt / spec.step).ceil() as usize;
    let h = spec.sample_dt / substeps as f64;

    let mut state = spec.initial;
    let mut out = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        for sub in 0..substeps {
            state = rk4_step(&spec.system, state, h);
            if state.iter().any(|v| !v.is_finite()) {
                let time = k as f64 * spec.sample_dt + (sub + 1) as f64 * h;
                return Err(Error::Divergence { time });
            }
        }
        out.push(state);
    }
    Ok(out)
}

/// Samples the trajectory into an event set: tick `k` (1-based) carries the
/// projected coordinates of the state at time `k * sample_dt`. Events are
/// strictly time-ordered by construction.
pub fn sample_trajectory(spec: &OdeSpec) -> Result<EventSet> {
    let states = integrate(spec)?;
    let events = states
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            Event::new(
                (k + 1) as f64,
                spec.projection.0.pick(s),
                spec.projection.1.pick(s),
            )
        })
        .collect();
    Ok(EventSet::new(events))
}
