//! Implication-shaped properties over traces and a bounded universal checker
//! for them: an observer condition on the inputs must force an output
//! condition, at every prefix of every trace up to the depth.

use smallvec::SmallVec;

use crate::circuits::star_equality;
use crate::error::{Error, Result};
use crate::exhaustive::{self, Branches, Choice, Walk};
use crate::machine::{Level, OutputVector, PinId, PinRun, Sample, State, Transducer};
use crate::observers::{LatchedTracker, OutputStabilityTracker, StableTracker};
use crate::verdict::{Counterexample, Verdict};

/// Antecedent over the input trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    /// One pin has held `level` for at least `bound` steps.
    HoldAtLeast {
        pin: PinId,
        level: Level,
        bound: u64,
    },
    /// Every input pin has held `level` for at least `bound` steps.
    AllHoldAtLeast { level: Level, bound: u64 },
    /// The whole input sample has been unchanged for at least `bound` steps.
    StableAtLeast { bound: u64 },
    /// The latch condition for bit `b` with delay `t_latch` evaluates to 1.
    LatchedEquals { b: Level, t_latch: u64 },
}

/// Consequent over the machine output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Consequent {
    OutputEquals { pin: PinId, level: Level },
    /// Output stability (whole vector, or one pin) of at least `bound`.
    StableOutputAtLeast { pin: Option<PinId>, bound: u64 },
    /// The settled-adder integer identity for an `n_bits` ripple adder.
    StarEquality { n_bits: usize },
}

/// A named implication with its parameters, checkable by
/// [`check_universal`].
#[derive(Debug, Clone)]
pub struct Property {
    pub name: String,
    pub antecedent: Condition,
    pub consequent: Consequent,
    pub params: Vec<(String, u64)>,
}

impl Property {
    /// A pin held low for `t` forces a NAND's output high.
    pub fn nand_forces_high(pin: &PinId, t: u32) -> Property {
        Property {
            name: format!("nand_low_hold_forces_high[{pin}]"),
            antecedent: Condition::HoldAtLeast {
                pin: pin.clone(),
                level: Level::Low,
                bound: t as u64,
            },
            consequent: Consequent::OutputEquals {
                pin: PinId::new("out"),
                level: Level::High,
            },
            params: vec![("t".into(), t as u64)],
        }
    }

    /// Every pin held high for `t` forces a NAND's output low.
    pub fn nand_forces_low(t: u32) -> Property {
        Property {
            name: "nand_high_hold_forces_low".into(),
            antecedent: Condition::AllHoldAtLeast {
                level: Level::High,
                bound: t as u64,
            },
            consequent: Consequent::OutputEquals {
                pin: PinId::new("out"),
                level: Level::Low,
            },
            params: vec![("t".into(), t as u64)],
        }
    }
}

/// Checks `prop` on every trace of length at most `depth`, in canonical
/// order; the first violation is the shortest one. Property pins must
/// belong to the machine.
pub fn check_universal(m: &Transducer, prop: &Property, depth: usize) -> Verdict {
    let walk = UniversalWalk::new(m, prop).expect("property pins must belong to the machine");
    exhaustive::explore(&walk, m.input_pins(), depth, u64::MAX)
}

/// Replays a counterexample from [`check_universal`].
pub fn replay_universal(m: &Transducer, prop: &Property, ce: &Counterexample) -> bool {
    let walk = UniversalWalk::new(m, prop).expect("property pins must belong to the machine");
    exhaustive::replay_counterexample(&walk, ce).unwrap_or(false)
}

struct UniversalWalk<'a> {
    machine: &'a Transducer,
    prop: &'a Property,
    /// Pin index for `HoldAtLeast`, output index for pinned stability.
    antecedent_pin: usize,
    consequent_pin: usize,
}

#[derive(Clone)]
struct UniversalNode {
    state: State,
    holds: SmallVec<[PinRun; 8]>,
    stable: StableTracker,
    latched: Option<LatchedTracker>,
    out_stab: OutputStabilityTracker,
    last_bits: Option<u32>,
}

impl<'a> UniversalWalk<'a> {
    fn new(m: &'a Transducer, prop: &'a Property) -> Result<UniversalWalk<'a>> {
        let antecedent_pin = match &prop.antecedent {
            Condition::HoldAtLeast { pin, .. } => m
                .input_pins()
                .position(pin)
                .ok_or_else(|| Error::UnknownPin(pin.clone()))?,
            Condition::LatchedEquals { .. } => {
                // Validated by the tracker constructor below.
                0
            }
            _ => 0,
        };
        let consequent_pin = match &prop.consequent {
            Consequent::OutputEquals { pin, .. } => m
                .output_pins()
                .position(pin)
                .ok_or_else(|| Error::UnknownPin(pin.clone()))?,
            Consequent::StableOutputAtLeast { pin: Some(pin), .. } => m
                .output_pins()
                .position(pin)
                .ok_or_else(|| Error::UnknownPin(pin.clone()))?,
            _ => 0,
        };
        if let Condition::LatchedEquals { b, t_latch } = &prop.antecedent {
            LatchedTracker::new(m.input_pins(), *b, *t_latch)?;
        }
        Ok(UniversalWalk {
            machine: m,
            prop,
            antecedent_pin,
            consequent_pin,
        })
    }

    fn root(&self) -> UniversalNode {
        let state = self.machine.initial_state();
        let latched = match &self.prop.antecedent {
            Condition::LatchedEquals { b, t_latch } => {
                Some(LatchedTracker::new(self.machine.input_pins(), *b, *t_latch).unwrap())
            }
            _ => None,
        };
        let mut out_stab = OutputStabilityTracker::new();
        out_stab.update(self.observed_output_bits(&state));
        UniversalNode {
            state,
            holds: (0..self.machine.input_pins().len())
                .map(|_| PinRun::fresh())
                .collect(),
            stable: StableTracker::new(),
            latched,
            out_stab,
            last_bits: None,
        }
    }

    fn observed_output_bits(&self, state: &State) -> u32 {
        let bits = self.machine.output_bits(state);
        match &self.prop.consequent {
            Consequent::StableOutputAtLeast { pin: Some(_), .. } => {
                (bits >> self.consequent_pin) & 1
            }
            _ => bits,
        }
    }

    fn antecedent_holds(&self, node: &UniversalNode) -> bool {
        match &self.prop.antecedent {
            Condition::HoldAtLeast { level, bound, .. } => {
                node.holds[self.antecedent_pin].hold(*level) as u64 >= *bound
            }
            Condition::AllHoldAtLeast { level, bound } => node
                .holds
                .iter()
                .all(|r| r.hold(*level) as u64 >= *bound),
            Condition::StableAtLeast { bound } => node.stable.stable() >= *bound,
            Condition::LatchedEquals { .. } => {
                node.latched.as_ref().map(|t| t.is_latched()).unwrap_or(false)
            }
        }
    }

    fn consequent_holds(&self, node: &UniversalNode) -> bool {
        match &self.prop.consequent {
            Consequent::OutputEquals { level, .. } => {
                let bits = self.machine.output_bits(&node.state);
                (bits >> self.consequent_pin) & 1 == level.bit()
            }
            Consequent::StableOutputAtLeast { bound, .. } => node.out_stab.stable() >= *bound,
            Consequent::StarEquality { n_bits } => match node.last_bits {
                None => false,
                Some(bits) => {
                    let last = Sample::from_bits(self.machine.input_pins(), bits);
                    let out = OutputVector::from_bits(
                        self.machine.output_pins(),
                        self.machine.output_bits(&node.state),
                    );
                    star_equality(*n_bits, &last, &out).unwrap_or(false)
                }
            },
        }
    }
}

impl Walk for UniversalWalk<'_> {
    type Node = UniversalNode;

    fn roots(&self) -> Vec<(Self::Node, Choice)> {
        vec![(self.root(), Choice::new())]
    }

    fn expand(&self, node: &Self::Node, sample: &Sample) -> Branches<Self::Node> {
        let state = self.machine.step(&node.state, sample);
        let mut holds = node.holds.clone();
        for (i, r) in holds.iter_mut().enumerate() {
            *r = r.advance(sample.level_at(i), u32::MAX);
        }
        let mut stable = node.stable;
        stable.update(sample);
        let mut latched = node.latched;
        if let Some(t) = latched.as_mut() {
            t.update(sample);
        }
        let mut out_stab = node.out_stab;
        out_stab.update(self.observed_output_bits(&state));
        let mut out = Branches::new();
        out.push((
            UniversalNode {
                state,
                holds,
                stable,
                latched,
                out_stab,
                last_bits: Some(sample.bits()),
            },
            Choice::new(),
        ));
        out
    }

    fn violated(&self, node: &Self::Node) -> bool {
        self.antecedent_holds(node) && !self.consequent_holds(node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{make_nand, make_or, GateParams};

    #[test]
    fn nand_satisfies_its_defining_properties() {
        let m = make_nand(&GateParams::canonical(1, Level::High));
        for pin in ["1", "2"] {
            let prop = Property::nand_forces_high(&PinId::new(pin), 1);
            let verdict = check_universal(&m, &prop, 6);
            assert!(verdict.is_pass(), "{}: {verdict}", prop.name);
            // Deterministic exhaustive run: Σ_{d=0..6} 4^d.
            assert_eq!(verdict.traces_explored, 5461);
        }
        let verdict = check_universal(&m, &Property::nand_forces_low(1), 6);
        assert!(verdict.is_pass());
    }

    #[test]
    fn or_gate_fails_the_nand_property() {
        let m = make_or(&GateParams::canonical(1, Level::Low));
        let prop = Property::nand_forces_low(1);
        let verdict = check_universal(&m, &prop, 3);
        assert!(verdict.is_fail());
        let ce = verdict.counterexample.unwrap();
        assert!(replay_universal(&m, &prop, &ce));
    }

    #[test]
    fn vacuous_antecedents_pass() {
        let m = make_or(&GateParams::canonical(1, Level::Low));
        let prop = Property {
            name: "vacuous".into(),
            antecedent: Condition::StableAtLeast { bound: 50 },
            consequent: Consequent::OutputEquals {
                pin: PinId::new("out"),
                level: Level::High,
            },
            params: Vec::new(),
        };
        assert!(check_universal(&m, &prop, 1).is_pass());
    }
}
