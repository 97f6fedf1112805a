use alloc::vec::Vec;

/// Why an iterative solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    /// Relative change of the objective fell below the configured tolerance.
    RelativeTolerance,
}

/// Objective values recorded once per (outer) iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub objective: Vec<f64>,
    pub stop: StopReason,
}

impl SolverTrace {
    pub(crate) fn new() -> Self {
        SolverTrace {
            objective: Vec::new(),
            stop: StopReason::MaxIterations,
        }
    }

    pub fn iterations(&self) -> usize {
        self.objective.len()
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::RelativeTolerance
    }

    pub fn last(&self) -> Option<f64> {
        self.objective.last().copied()
    }

    /// Largest drop between consecutive entries (0 for a non-decreasing trace).
    pub fn max_decrease(&self) -> f64 {
        self.objective
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }

    /// Largest rise between consecutive entries (0 for a non-increasing trace).
    pub fn max_increase(&self) -> f64 {
        self.objective
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}
