//! Gate-level circuits as Moore machines (transducers) over sampled binary
//! signals.
//!
//! A circuit is a state machine whose input alphabet is the set of *samples*
//! (one time-step assignment of levels to input pins) and whose output is a
//! level per output pin. The crate provides:
//!
//! * [`Transducer`] evaluation over finite [`Trace`]s, reachable-state
//!   enumeration, minimization, and bounded equivalence ([`machine`]),
//! * recursive trace counters such as hold times and stability ([`observers`]),
//! * NAND/OR gates with propagation delay and a single-bit adder ([`gates`]),
//! * a wire-only feedback product of machines ([`product`]) and the circuits
//!   built from it: SR latch, three-gate seven-input NAND, ripple-carry adder
//!   ([`circuits`]),
//! * transformation-monoid extraction and a combinational/sequential
//!   classifier ([`algebra`]),
//! * bounded exhaustive verification of the timing claims, including an
//!   adversarial mode that branches over every output a gate constraint
//!   permits ([`checker`]).

pub mod algebra;
pub mod checker;
pub mod circuits;
mod error;
mod exhaustive;
pub mod gates;
pub mod machine;
pub mod observers;
pub mod product;
mod verdict;

pub use error::{Error, Result};
pub use machine::{Level, OutputVector, PinId, PinSet, Sample, State, Trace, Transducer};
pub use verdict::{Counterexample, Status, Verdict};
