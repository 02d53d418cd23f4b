//! Nondeterministic machines for adversarial checking: a deterministic state
//! core whose output is chosen each step from the set the gate constraints
//! allow. Composites resolve feedback against the chosen outputs, so each
//! choice spawns its own branch.

use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::Result;
use crate::gates::{advance_runs, allowed_for_runs, fresh_runs};
use crate::machine::{OutputVector, PinSet, Sample, State};
use crate::product::{self, Lowered, ProductSpec};

type StepFn = dyn Fn(&State, &Sample) -> State + Send + Sync;
type OutsFn = dyn Fn(&State) -> SmallVec<[u32; 2]> + Send + Sync;

/// Machine with a deterministic transition core and a non-empty set of
/// permitted outputs per state, listed in ascending bit order.
pub struct NondetMachine {
    inputs: PinSet,
    outputs: PinSet,
    initial: State,
    step_fn: Arc<StepFn>,
    outs_fn: Arc<OutsFn>,
}

impl NondetMachine {
    pub fn new(
        inputs: PinSet,
        outputs: PinSet,
        initial: State,
        step: impl Fn(&State, &Sample) -> State + Send + Sync + 'static,
        outs: impl Fn(&State) -> SmallVec<[u32; 2]> + Send + Sync + 'static,
    ) -> NondetMachine {
        NondetMachine {
            inputs,
            outputs,
            initial,
            step_fn: Arc::new(step),
            outs_fn: Arc::new(outs),
        }
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
        (self.step_fn)(state, sample)
    }

    /// Permitted output bit patterns in `state`, ascending.
    pub fn allowed_bits(&self, state: &State) -> SmallVec<[u32; 2]> {
        let outs = (self.outs_fn)(state);
        debug_assert!(!outs.is_empty(), "output sets are never empty");
        outs
    }

    pub fn allowed_outputs(&self, state: &State) -> Vec<OutputVector> {
        self.allowed_bits(state)
            .iter()
            .map(|bits| OutputVector::from_bits(&self.outputs, *bits))
            .collect()
    }
}

/// The whole family of machines satisfying the NAND constraints for delay
/// `t`: output forced only while a constraint fires, free otherwise.
pub fn adversarial_nand(pins: &PinSet, t: u32) -> NondetMachine {
    let n = pins.len();
    let outputs = PinSet::of(&["out"]);
    NondetMachine::new(
        pins.clone(),
        outputs,
        State::Runs {
            runs: fresh_runs(n),
            held: 0,
        },
        move |state, sample| {
            let State::Runs { runs, .. } = state else {
                unreachable!("gate state")
            };
            State::Runs {
                runs: advance_runs(runs, sample, t),
                held: 0,
            }
        },
        move |state| {
            let State::Runs { runs, .. } = state else {
                unreachable!("gate state")
            };
            allowed_for_runs(runs, t)
                .levels()
                .map(|l| l.bit())
                .collect()
        },
    )
}

/// Wire-only product over nondeterministic factors. The wiring and output
/// selection come from a deterministic [`ProductSpec`] with the same shape;
/// feedback wires read the outputs *chosen* for the current state.
pub struct NondetProduct {
    pub(crate) lowered: Lowered,
    pub(crate) parts: Vec<NondetMachine>,
}

/// Product state: the factor cores plus the output chosen for each factor.
#[derive(Clone)]
pub struct NondetNode {
    pub cores: Vec<State>,
    pub chosen: SmallVec<[u32; 4]>,
}

impl NondetProduct {
    pub fn from_spec_shape(spec: &ProductSpec, parts: Vec<NondetMachine>) -> Result<NondetProduct> {
        let lowered = product::lower(spec)?;
        assert_eq!(
            lowered.factors.len(),
            parts.len(),
            "one nondeterministic machine per factor"
        );
        for (factor, part) in lowered.factors.iter().zip(&parts) {
            assert_eq!(factor.input_pins(), part.input_pins());
            assert_eq!(factor.output_pins(), part.output_pins());
        }
        Ok(NondetProduct { lowered, parts })
    }

    /// All initial nodes: one per combination of permitted initial outputs,
    /// earlier factors varying slowest.
    pub fn roots(&self) -> Vec<NondetNode> {
        let cores: Vec<State> = self.parts.iter().map(|p| p.initial_state()).collect();
        let options: Vec<SmallVec<[u32; 2]>> = self
            .parts
            .iter()
            .zip(&cores)
            .map(|(p, c)| p.allowed_bits(c))
            .collect();
        cartesian(&options)
            .into_iter()
            .map(|chosen| NondetNode {
                cores: cores.clone(),
                chosen,
            })
            .collect()
    }

    /// All successors of `node` under `sample`, one per output combination.
    pub fn expand(&self, node: &NondetNode, sample: &Sample) -> Vec<NondetNode> {
        let mut cores = Vec::with_capacity(self.parts.len());
        for (i, part) in self.parts.iter().enumerate() {
            let c = self.lowered.assemble(i, sample, &node.chosen);
            cores.push(part.step(&node.cores[i], &c));
        }
        let options: Vec<SmallVec<[u32; 2]>> = self
            .parts
            .iter()
            .zip(&cores)
            .map(|(p, c)| p.allowed_bits(c))
            .collect();
        cartesian(&options)
            .into_iter()
            .map(|chosen| NondetNode {
                cores: cores.clone(),
                chosen,
            })
            .collect()
    }

    /// Composite output bits exposed for `node`.
    pub fn output_bits(&self, node: &NondetNode) -> u32 {
        self.lowered.exposure_bits(&node.chosen)
    }

    pub fn output_pins(&self) -> &PinSet {
        &self.lowered.outputs
    }

    pub fn input_pins(&self) -> &PinSet {
        &self.lowered.inputs
    }
}

fn cartesian(options: &[SmallVec<[u32; 2]>]) -> Vec<SmallVec<[u32; 4]>> {
    let mut combos: Vec<SmallVec<[u32; 4]>> = vec![SmallVec::new()];
    for opts in options {
        let mut next = Vec::with_capacity(combos.len() * opts.len());
        for combo in &combos {
            for o in opts {
                let mut extended = combo.clone();
                extended.push(*o);
                next.push(extended);
            }
        }
        combos = next;
    }
    combos
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::make_sr_latch;
    use crate::machine::Level;

    #[test]
    fn fresh_adversarial_gate_offers_both_outputs() {
        let pins = PinSet::of(&["1", "2"]);
        let gate = adversarial_nand(&pins, 2);
        let outs = gate.allowed_outputs(&gate.initial_state());
        assert_eq!(outs.len(), 2);
    }

    #[test]
    fn constrained_adversarial_gate_is_forced() {
        let pins = PinSet::of(&["1", "2"]);
        let gate = adversarial_nand(&pins, 1);
        let low = Sample::build(&pins, |_| Level::Low);
        let state = gate.step(&gate.initial_state(), &low);
        assert_eq!(gate.allowed_bits(&state).as_slice(), &[1]);
        let high = Sample::build(&pins, |_| Level::High);
        let state = gate.step(&gate.initial_state(), &high);
        assert_eq!(gate.allowed_bits(&state).as_slice(), &[0]);
    }

    #[test]
    fn adversarial_latch_branches_at_the_start() {
        let latch = make_sr_latch(1, (Level::High, Level::Low));
        let pins = PinSet::of(&["1", "2"]);
        let parts = vec![adversarial_nand(&pins, 1), adversarial_nand(&pins, 1)];
        let product = NondetProduct::from_spec_shape(&latch.spec, parts).unwrap();
        let roots = product.roots();
        assert_eq!(roots.len(), 4);
        let chosens: Vec<&[u32]> = roots.iter().map(|r| r.chosen.as_slice()).collect();
        assert_eq!(
            chosens,
            vec![&[0, 0][..], &[0, 1], &[1, 0], &[1, 1]],
            "earlier factors vary slowest, low before high"
        );
    }
}
