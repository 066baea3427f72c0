//! Work budgets for long sampling loops.

use std::time::{Duration, Instant};

/// Caps a loop by evaluation count and/or wall-clock time. Count limits keep
/// results deterministic; time limits do not.
#[derive(Debug, Clone)]
pub struct Budget {
    max_evals: Option<u64>,
    deadline: Option<Instant>,
    used: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self::unlimited()
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Self { max_evals: None, deadline: None, used: 0 }
    }

    pub fn evals(n: u64) -> Self {
        Self { max_evals: Some(n), ..Self::unlimited() }
    }

    pub fn time(limit: Duration) -> Self {
        Self { deadline: Some(Instant::now() + limit), ..Self::unlimited() }
    }

    /// Spends one unit; false once the budget is gone.
    pub fn spend(&mut self) -> bool {
        if self.is_exhausted() {
            return false;
        }
        self.used += 1;
        true
    }

    pub fn is_exhausted(&self) -> bool {
        self.max_evals.is_some_and(|n| self.used >= n) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}
