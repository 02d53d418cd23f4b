//! Transducer representation and the core analyses: evaluation, reachable
//! states, minimization, and equivalence.

mod analysis;
mod pins;
mod trace;
mod transducer;

pub use analysis::{
    distinguishing_trace, equivalent, equivalent_exact, minimize, reachable_states,
};
pub(crate) use analysis::tabulate;
pub use pins::{Level, OutputVector, PinId, PinSet, Sample, MAX_PINS};
pub use trace::Trace;
pub use transducer::{PinRun, State, Transducer};
