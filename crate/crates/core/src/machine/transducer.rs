use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::Result;
use crate::machine::pins::{Level, OutputVector, PinSet, Sample};
use crate::machine::trace::Trace;

/// One pin's recent history in a gate-style state: the current level and how
/// many consecutive steps it has been held (possibly capped).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PinRun {
    pub level: Level,
    pub run: u32,
}

impl PinRun {
    pub fn fresh() -> PinRun {
        PinRun {
            level: Level::Low,
            run: 0,
        }
    }

    /// Advance on the next observed level, capping the run length at `cap`.
    pub fn advance(self, level: Level, cap: u32) -> PinRun {
        let run = if self.run > 0 && self.level == level {
            self.run.saturating_add(1).min(cap)
        } else {
            1
        };
        PinRun { level, run }
    }

    /// Hold time of `level`: the run length if the pin currently sits at that
    /// level, otherwise 0.
    pub fn hold(self, level: Level) -> u32 {
        if self.run > 0 && self.level == level {
            self.run
        } else {
            0
        }
    }
}

/// Opaque state token. Machine constructors pick whichever shape fits; the
/// analyses only ever clone, compare, and hash tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum State {
    Unit,
    /// Unbounded counter (useful for specification machines).
    Count(u64),
    /// State of a table machine, e.g. the result of minimization.
    Index(u32),
    /// Gate-style state: per-pin runs plus the currently held output bits.
    Runs {
        runs: SmallVec<[PinRun; 4]>,
        held: u32,
    },
    /// Product state: one component per factor.
    Tuple(Vec<State>),
}

type StepFn = dyn Fn(&State, &Sample) -> State + Send + Sync;
type OutFn = dyn Fn(&State) -> OutputVector + Send + Sync;

/// A Moore machine with explicit initial output: a deterministic, total step
/// function over opaque states and a per-state output vector.
#[derive(Clone)]
pub struct Transducer {
    inputs: PinSet,
    outputs: PinSet,
    initial: State,
    step_fn: Arc<StepFn>,
    out_fn: Arc<OutFn>,
}

impl Transducer {
    pub fn new(
        inputs: PinSet,
        outputs: PinSet,
        initial: State,
        step: impl Fn(&State, &Sample) -> State + Send + Sync + 'static,
        out: impl Fn(&State) -> OutputVector + Send + Sync + 'static,
    ) -> Transducer {
        Transducer {
            inputs,
            outputs,
            initial,
            step_fn: Arc::new(step),
            out_fn: Arc::new(out),
        }
    }

    /// A one-state machine that ignores input and always emits `output`.
    pub fn constant(inputs: PinSet, output: OutputVector) -> Transducer {
        let pins = output.pins().clone();
        let bits = output.bits();
        Transducer::new(
            inputs,
            pins.clone(),
            State::Unit,
            |_, _| State::Unit,
            move |_| OutputVector::from_bits(&pins, bits),
        )
    }

    pub fn input_pins(&self) -> &PinSet {
        &self.inputs
    }

    pub fn output_pins(&self) -> &PinSet {
        &self.outputs
    }

    pub fn initial_state(&self) -> State {
        self.initial.clone()
    }

    pub fn step(&self, state: &State, sample: &Sample) -> State {
        debug_assert!(sample.pins() == &self.inputs, "sample over foreign pins");
        (self.step_fn)(state, sample)
    }

    pub fn output(&self, state: &State) -> OutputVector {
        (self.out_fn)(state)
    }

    pub fn output_bits(&self, state: &State) -> u32 {
        (self.out_fn)(state).bits()
    }

    /// State reached from the initial state by following `w`.
    pub fn final_state(&self, w: &Trace) -> Result<State> {
        if w.pins() != &self.inputs {
            return Err(self.inputs.mismatch(w.pins()));
        }
        let mut state = self.initial.clone();
        for sample in w.samples() {
            state = self.step(&state, &sample);
        }
        Ok(state)
    }

    /// Output in the state reached by `w`; the representing function of the
    /// machine. `eval(Λ)` is the explicit initial output.
    pub fn eval(&self, w: &Trace) -> Result<OutputVector> {
        Ok(self.output(&self.final_state(w)?))
    }

    /// Outputs for every prefix of `w` including Λ; `|w| + 1` entries.
    pub fn run(&self, w: &Trace) -> Result<Vec<OutputVector>> {
        if w.pins() != &self.inputs {
            return Err(self.inputs.mismatch(w.pins()));
        }
        let mut outputs = Vec::with_capacity(w.len() + 1);
        let mut state = self.initial.clone();
        outputs.push(self.output(&state));
        for sample in w.samples() {
            state = self.step(&state, &sample);
            outputs.push(self.output(&state));
        }
        Ok(outputs)
    }
}

impl fmt::Debug for Transducer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transducer")
            .field("inputs", &self.inputs)
            .field("outputs", &self.outputs)
            .field("initial", &self.initial)
            .finish_non_exhaustive()
    }
}
