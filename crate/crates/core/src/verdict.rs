use std::fmt;

use crate::machine::Trace;

/// Result of a bounded check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Exploration stopped early because a budget was exhausted.
    Budget,
}

/// A failing input: the trace plus, for nondeterministic checks, the output
/// chosen for each branching machine at every step. `choices[0]` is the
/// choice made at Λ and `choices[i]` the one made after sample `i`; entries
/// are empty for deterministic checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub trace: Trace,
    pub choices: Vec<Vec<u32>>,
}

impl Counterexample {
    /// Counterexample of a deterministic check: just the trace.
    pub fn plain(trace: Trace) -> Counterexample {
        Counterexample {
            trace,
            choices: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub counterexample: Option<Counterexample>,
    /// Traces checked. For branching checks each explored (trace, choice)
    /// combination counts once.
    pub traces_explored: u64,
}

impl Verdict {
    pub fn pass(traces_explored: u64) -> Verdict {
        Verdict {
            status: Status::Pass,
            counterexample: None,
            traces_explored,
        }
    }

    pub fn fail(counterexample: Counterexample, traces_explored: u64) -> Verdict {
        Verdict {
            status: Status::Fail,
            counterexample: Some(counterexample),
            traces_explored,
        }
    }

    /// Failure of a structural check that has no input trace to report.
    pub fn fail_without_trace(traces_explored: u64) -> Verdict {
        Verdict {
            status: Status::Fail,
            counterexample: None,
            traces_explored,
        }
    }

    pub fn budget(traces_explored: u64) -> Verdict {
        Verdict {
            status: Status::Budget,
            counterexample: None,
            traces_explored,
        }
    }

    pub fn is_pass(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn is_fail(&self) -> bool {
        self.status == Status::Fail
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Pass => write!(f, "PASS"),
            Status::Fail => write!(f, "FAIL"),
            Status::Budget => write!(f, "BUDGET"),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (traces explored: {})", self.status, self.traces_explored)?;
        if let Some(ce) = &self.counterexample {
            write!(f, " counterexample: {}", ce.trace)?;
        }
        Ok(())
    }
}
