//! Interface between the closed-loop harness and the controllers.

use std::time::Duration;

use crate::error::Result;
use crate::linalg::Vector;

/// What a controller sees at sample `k`.
#[derive(Clone, Copy, Debug)]
pub struct StepContext<'a> {
    pub k: usize,
    /// Measured outputs y(k).
    pub y: &'a Vector,
    /// Reference r(k), r(k+1), …, r(k+P).
    pub reference: &'a [Vector],
    /// Disturbance forecast d(k), …, d(k+P−1).
    pub forecast: &'a [Vector],
    /// Disturbance applied over the previous sample.
    pub d_prev: &'a Vector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    pub u: Vector,
    /// Optimization time. For distributed controllers the critical path of a
    /// parallel deployment: per round, the slowest local solve.
    pub solve_time: Duration,
    /// Coordination rounds (1 for a centralized solve).
    pub iterations: usize,
    pub converged: bool,
}

pub trait Controller: Send {
    fn name(&self) -> &str;

    /// Prediction horizon P in samples.
    fn horizon(&self) -> usize;

    /// Clears internal state; `u0` is the input held before the first sample.
    fn reset(&mut self, u0: &Vector);

    fn step(&mut self, ctx: &StepContext<'_>) -> Result<StepOutput>;
}
