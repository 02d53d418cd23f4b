//! Component machines: NAND and OR gates with propagation delay, and the
//! single-bit adder.
//!
//! A gate with delay `t` is only *constrained* once an input condition has
//! persisted for `t` steps; between constraints the executable gates here
//! hold their last output. The full family of constraint-satisfying machines
//! (free output whenever no constraint fires) is modelled separately by the
//! checker's adversarial mode, which branches over [`nand_allowed`].

use smallvec::SmallVec;

use crate::exhaustive::{self, Branches, Choice, Walk};
use crate::machine::{Level, OutputVector, PinId, PinRun, PinSet, Sample, State, Transducer};
use crate::verdict::{Counterexample, Verdict};

/// How a gate behaves while no constraint fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransientPolicy {
    /// Keep the previous output; the canonical executable gate.
    HoldLast,
    /// Any output allowed by the constraints; a nondeterministic
    /// specification consumed by the checker, not an executable machine.
    Adversarial,
}

#[derive(Debug, Clone)]
pub struct GateParams {
    pub pins: PinSet,
    pub delay_t: u32,
    pub initial_output: Level,
    pub transient_policy: TransientPolicy,
}

impl GateParams {
    pub fn new(pins: PinSet, delay_t: u32, initial_output: Level) -> GateParams {
        assert!(delay_t >= 1, "propagation delay must be positive");
        assert!(!pins.is_empty(), "gates have at least one input pin");
        GateParams {
            pins,
            delay_t,
            initial_output,
            transient_policy: TransientPolicy::HoldLast,
        }
    }

    /// The two-pin gate used throughout: pins `1` and `2`.
    pub fn canonical(delay_t: u32, initial_output: Level) -> GateParams {
        GateParams::new(PinSet::of(&["1", "2"]), delay_t, initial_output)
    }
}

#[derive(Debug, Clone)]
pub struct AdderParams {
    pub delay_t: u32,
    pub initial_sum: Level,
    pub initial_carry: Level,
}

impl AdderParams {
    pub fn new(delay_t: u32, initial_sum: Level, initial_carry: Level) -> AdderParams {
        assert!(delay_t >= 1, "propagation delay must be positive");
        AdderParams {
            delay_t,
            initial_sum,
            initial_carry,
        }
    }
}

/// The set of outputs a gate constraint permits in some state; never empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllowedOutputs {
    zero: bool,
    one: bool,
}

impl AllowedOutputs {
    fn new(zero: bool, one: bool) -> AllowedOutputs {
        assert!(zero || one, "gate constraints never exclude every output");
        AllowedOutputs { zero, one }
    }

    pub fn contains(&self, level: Level) -> bool {
        match level {
            Level::Low => self.zero,
            Level::High => self.one,
        }
    }

    /// The forced output when exactly one is allowed.
    pub fn singleton(&self) -> Option<Level> {
        match (self.zero, self.one) {
            (true, false) => Some(Level::Low),
            (false, true) => Some(Level::High),
            _ => None,
        }
    }

    /// Allowed levels, low before high.
    pub fn levels(&self) -> impl Iterator<Item = Level> {
        let zero = self.zero;
        let one = self.one;
        [Level::Low, Level::High]
            .into_iter()
            .filter(move |l| match l {
                Level::Low => zero,
                Level::High => one,
            })
    }
}

pub(crate) fn fresh_runs(n: usize) -> SmallVec<[PinRun; 4]> {
    (0..n).map(|_| PinRun::fresh()).collect()
}

pub(crate) fn advance_runs(
    runs: &[PinRun],
    sample: &Sample,
    cap: u32,
) -> SmallVec<[PinRun; 4]> {
    runs.iter()
        .enumerate()
        .map(|(i, r)| r.advance(sample.level_at(i), cap))
        .collect()
}

/// NAND output permitted by the two hold constraints: forced high when any
/// pin has held low for `t`, forced low when every pin has held high for
/// `t`, otherwise free. The antecedents are mutually exclusive, so the set
/// is never empty.
pub fn nand_allowed(state: &State, t: u32) -> AllowedOutputs {
    let State::Runs { runs, .. } = state else {
        panic!("nand_allowed expects a gate state with per-pin runs")
    };
    allowed_for_runs(runs, t)
}

pub(crate) fn allowed_for_runs(runs: &[PinRun], t: u32) -> AllowedOutputs {
    let any_low = runs.iter().any(|r| r.hold(Level::Low) >= t);
    let all_high = runs.iter().all(|r| r.hold(Level::High) >= t);
    if any_low {
        AllowedOutputs::new(false, true)
    } else if all_high {
        AllowedOutputs::new(true, false)
    } else {
        AllowedOutputs::new(true, true)
    }
}

fn or_allowed(runs: &[PinRun], t: u32) -> AllowedOutputs {
    let any_high = runs.iter().any(|r| r.hold(Level::High) >= t);
    let all_low = runs.iter().all(|r| r.hold(Level::Low) >= t);
    if any_high {
        AllowedOutputs::new(false, true)
    } else if all_low {
        AllowedOutputs::new(true, false)
    } else {
        AllowedOutputs::new(true, true)
    }
}

/// Executable NAND gate under the hold-last policy. Runs are capped at `t`
/// in the state token; longer runs are behaviorally indistinguishable.
pub fn make_nand(params: &GateParams) -> Transducer {
    make_nand_capped(params, params.delay_t)
}

pub(crate) fn make_nand_capped(params: &GateParams, cap: u32) -> Transducer {
    assert_eq!(
        params.transient_policy,
        TransientPolicy::HoldLast,
        "only hold-last gates are executable machines"
    );
    gate_machine(params, cap, allowed_for_runs)
}

/// Executable OR gate. The high side mirrors the defining constraint; the low
/// side is completed symmetrically so the gate settles on all-low input.
pub fn make_or(params: &GateParams) -> Transducer {
    assert_eq!(
        params.transient_policy,
        TransientPolicy::HoldLast,
        "only hold-last gates are executable machines"
    );
    gate_machine(params, params.delay_t, or_allowed)
}

fn gate_machine(
    params: &GateParams,
    cap: u32,
    allowed: fn(&[PinRun], u32) -> AllowedOutputs,
) -> Transducer {
    let t = params.delay_t;
    let cap = cap.max(t);
    let n = params.pins.len();
    let out_pin = PinId::new("out");
    let outputs = PinSet::new([out_pin]).unwrap();
    let out_pins = outputs.clone();
    let initial = State::Runs {
        runs: fresh_runs(n),
        held: params.initial_output.bit(),
    };
    Transducer::new(
        params.pins.clone(),
        outputs,
        initial,
        move |state, sample| {
            let State::Runs { runs, held } = state else {
                unreachable!("gate state")
            };
            let runs = advance_runs(runs, sample, cap);
            let held = match allowed(&runs, t).singleton() {
                Some(level) => level.bit(),
                None => *held,
            };
            State::Runs { runs, held }
        },
        move |state| {
            let State::Runs { held, .. } = state else {
                unreachable!("gate state")
            };
            OutputVector::from_bits(&out_pins, *held)
        },
    )
}

/// Single-bit adder over pins `carry_in`, `v1`, `v2` with outputs `sum` and
/// `carry_out`. Once all three inputs have held for `t` steps the outputs
/// are the mod-2 sum and the carry of the held values; until then both hold
/// their previous levels.
pub fn make_adder_bit(params: &AdderParams) -> Transducer {
    let t = params.delay_t;
    let inputs = adder_input_pins();
    let outputs = adder_output_pins();
    let out_pins = outputs.clone();
    let initial = State::Runs {
        runs: fresh_runs(3),
        held: adder_held_bits(params.initial_sum, params.initial_carry),
    };
    Transducer::new(
        inputs,
        outputs,
        initial,
        move |state, sample| {
            let State::Runs { runs, held } = state else {
                unreachable!("adder state")
            };
            let runs = advance_runs(runs, sample, t);
            let held = if runs.iter().all(|r| r.run >= t) {
                let total: u32 = runs.iter().map(|r| r.level.bit()).sum();
                adder_total_bits(total)
            } else {
                *held
            };
            State::Runs { runs, held }
        },
        move |state| {
            let State::Runs { held, .. } = state else {
                unreachable!("adder state")
            };
            OutputVector::from_bits(&out_pins, *held)
        },
    )
}

pub fn adder_input_pins() -> PinSet {
    PinSet::of(&["carry_in", "v1", "v2"])
}

pub fn adder_output_pins() -> PinSet {
    // Sorted order: carry_out at bit 0, sum at bit 1.
    PinSet::of(&["carry_out", "sum"])
}

fn adder_held_bits(sum: Level, carry: Level) -> u32 {
    carry.bit() | (sum.bit() << 1)
}

fn adder_total_bits(total: u32) -> u32 {
    (total >> 1) | ((total & 1) << 1)
}

/// Checks that `m` never contradicts the NAND constraints for delay `t` on
/// any trace of length at most `depth`: whenever a constraint fires, the
/// machine's output must equal the forced level.
pub fn check_gate_constraints(m: &Transducer, t: u32, depth: usize) -> Verdict {
    assert_eq!(
        m.output_pins().len(),
        1,
        "gate constraint checks expect a single-output machine"
    );
    let walk = GateConstraintWalk {
        machine: m,
        t,
        n_pins: m.input_pins().len(),
    };
    exhaustive::explore(&walk, m.input_pins(), depth, u64::MAX)
}

/// Replays a counterexample from [`check_gate_constraints`].
pub fn replay_gate_constraints(m: &Transducer, t: u32, ce: &Counterexample) -> bool {
    let walk = GateConstraintWalk {
        machine: m,
        t,
        n_pins: m.input_pins().len(),
    };
    exhaustive::replay_counterexample(&walk, ce).unwrap_or(false)
}

struct GateConstraintWalk<'a> {
    machine: &'a Transducer,
    t: u32,
    n_pins: usize,
}

#[derive(Clone)]
struct GateConstraintNode {
    state: State,
    holds: SmallVec<[PinRun; 4]>,
}

impl Walk for GateConstraintWalk<'_> {
    type Node = GateConstraintNode;

    fn roots(&self) -> Vec<(Self::Node, Choice)> {
        vec![(
            GateConstraintNode {
                state: self.machine.initial_state(),
                holds: fresh_runs(self.n_pins),
            },
            Choice::new(),
        )]
    }

    fn expand(&self, node: &Self::Node, sample: &Sample) -> Branches<Self::Node> {
        let mut out = Branches::new();
        out.push((
            GateConstraintNode {
                state: self.machine.step(&node.state, sample),
                holds: advance_runs(&node.holds, sample, u32::MAX),
            },
            Choice::new(),
        ));
        out
    }

    fn violated(&self, node: &Self::Node) -> bool {
        match allowed_for_runs(&node.holds, self.t).singleton() {
            Some(forced) => self.machine.output_bits(&node.state) != forced.bit(),
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Trace;

    fn two_pin_sample(a: u32, b: u32) -> Sample {
        Sample::from_pairs(
            &PinSet::of(&["1", "2"]),
            &[
                ("1", Level::from_bool(a != 0)),
                ("2", Level::from_bool(b != 0)),
            ],
        )
        .unwrap()
    }

    fn held_trace(samples: &[(u32, u32)]) -> Trace {
        let pins = PinSet::of(&["1", "2"]);
        let mut w = Trace::empty(&pins);
        for (a, b) in samples {
            w.push(&two_pin_sample(*a, *b)).unwrap();
        }
        w
    }

    #[test]
    fn nand_forces_low_after_all_pins_high_for_t() {
        let m = make_nand(&GateParams::canonical(2, Level::High));
        let w = held_trace(&[(1, 1), (1, 1)]);
        assert_eq!(m.eval(&w).unwrap().sole(), Level::Low);
        // Three high samples per the eval example.
        let w = held_trace(&[(1, 1), (1, 1), (1, 1)]);
        assert_eq!(m.eval(&w).unwrap().sole(), Level::Low);
    }

    #[test]
    fn nand_forces_high_after_any_pin_low_for_t() {
        let m = make_nand(&GateParams::canonical(2, Level::Low));
        let w = held_trace(&[(0, 1), (0, 0)]);
        assert_eq!(m.eval(&w).unwrap().sole(), Level::High);
    }

    #[test]
    fn nand_holds_last_output_while_unconstrained() {
        let m = make_nand(&GateParams::canonical(2, Level::High));
        let w = held_trace(&[(1, 1)]);
        assert_eq!(m.eval(&w).unwrap().sole(), Level::High);
    }

    #[test]
    fn nand_run_unfolds_step_by_step() {
        let m = make_nand(&GateParams::canonical(1, Level::High));
        let w = held_trace(&[(1, 1), (1, 1)]);
        let outs: Vec<u32> = m.run(&w).unwrap().iter().map(|o| o.bits()).collect();
        assert_eq!(outs, vec![1, 0, 0]);
    }

    #[test]
    fn or_follows_high_constraint_and_symmetric_low() {
        let m = make_or(&GateParams::canonical(1, Level::Low));
        let w = held_trace(&[(1, 0)]);
        assert_eq!(m.eval(&w).unwrap().sole(), Level::High);

        let m = make_or(&GateParams::canonical(2, Level::High));
        let w = held_trace(&[(0, 0), (0, 0)]);
        assert_eq!(m.eval(&w).unwrap().sole(), Level::Low);
        assert_eq!(
            m.eval(&Trace::empty(m.input_pins())).unwrap().sole(),
            Level::High
        );
    }

    fn adder_sample(c: u32, v1: u32, v2: u32) -> Sample {
        Sample::from_pairs(
            &adder_input_pins(),
            &[
                ("carry_in", Level::from_bool(c != 0)),
                ("v1", Level::from_bool(v1 != 0)),
                ("v2", Level::from_bool(v2 != 0)),
            ],
        )
        .unwrap()
    }

    fn eval_adder(m: &Transducer, sample: &Sample, steps: usize) -> (Level, Level) {
        let mut w = Trace::empty(m.input_pins());
        w.extend_held(sample, steps).unwrap();
        let out = m.eval(&w).unwrap();
        (
            out.level(&PinId::new("sum")).unwrap(),
            out.level(&PinId::new("carry_out")).unwrap(),
        )
    }

    #[test]
    fn adder_outputs_sum_and_carry_after_settling() {
        let m = make_adder_bit(&AdderParams::new(1, Level::Low, Level::Low));
        assert_eq!(
            eval_adder(&m, &adder_sample(0, 1, 1), 1),
            (Level::Low, Level::High)
        );
        assert_eq!(
            eval_adder(&m, &adder_sample(0, 0, 0), 1),
            (Level::Low, Level::Low)
        );
        let m = make_adder_bit(&AdderParams::new(2, Level::Low, Level::Low));
        assert_eq!(
            eval_adder(&m, &adder_sample(1, 1, 1), 2),
            (Level::High, Level::High)
        );
    }

    #[test]
    fn adder_holds_output_before_settling() {
        let m = make_adder_bit(&AdderParams::new(2, Level::High, Level::Low));
        assert_eq!(
            eval_adder(&m, &adder_sample(0, 0, 0), 1),
            (Level::High, Level::Low)
        );
    }

    #[test]
    fn allowed_outputs_follow_the_constraints() {
        let t = 2;
        let fresh = State::Runs {
            runs: fresh_runs(2),
            held: 1,
        };
        assert_eq!(nand_allowed(&fresh, t).singleton(), None);

        let m = make_nand(&GateParams::canonical(t, Level::High));
        let low_held = m.final_state(&held_trace(&[(0, 1), (0, 1)])).unwrap();
        assert_eq!(nand_allowed(&low_held, t).singleton(), Some(Level::High));
        let high_held = m.final_state(&held_trace(&[(1, 1), (1, 1)])).unwrap();
        assert_eq!(nand_allowed(&high_held, t).singleton(), Some(Level::Low));
    }

    #[test]
    fn nand_satisfies_its_own_constraints_exhaustively() {
        for t in [1, 2] {
            let m = make_nand(&GateParams::canonical(t, Level::High));
            let verdict = check_gate_constraints(&m, t, 5);
            assert!(verdict.is_pass(), "t={t}: {verdict}");
        }
    }

    #[test]
    fn or_gate_violates_nand_constraints() {
        let m = make_or(&GateParams::canonical(1, Level::Low));
        let verdict = check_gate_constraints(&m, 1, 2);
        assert!(verdict.is_fail());
        let ce = verdict.counterexample.unwrap();
        assert!(replay_gate_constraints(&m, 1, &ce));
    }

    #[test]
    fn slower_gate_violates_faster_constraints() {
        // Frozen from the exhaustive search: one all-high sample already
        // forces a t=1 output low, while the t=2 gate still holds its
        // initial high.
        let m = make_nand(&GateParams::canonical(2, Level::High));
        let verdict = check_gate_constraints(&m, 1, 4);
        assert!(verdict.is_fail());
        let ce = verdict.counterexample.unwrap();
        assert_eq!(ce.trace.len(), 1);
        assert_eq!(ce.trace.sample(0).bits(), 0b11);
        assert!(replay_gate_constraints(&m, 1, &ce));
    }

    #[test]
    fn gate_state_space_regression_values() {
        // Frozen from the breadth-first oracle.
        use crate::machine::{minimize, reachable_states};
        let m = make_nand(&GateParams::canonical(1, Level::High));
        assert_eq!(reachable_states(&m, 1000).unwrap().len(), 5);
        let min = minimize(&m, 1000).unwrap();
        assert_eq!(reachable_states(&min, 1000).unwrap().len(), 2);

        let m = make_nand(&GateParams::canonical(2, Level::High));
        assert_eq!(reachable_states(&m, 1000).unwrap().len(), 25);
        let min = minimize(&m, 1000).unwrap();
        assert_eq!(reachable_states(&min, 1000).unwrap().len(), 6);
    }

    #[test]
    fn capped_runs_match_an_uncapped_reference() {
        for t in [1, 2] {
            let params = GateParams::canonical(t, Level::High);
            let capped = make_nand(&params);
            let reference = make_nand_capped(&params, 64);
            let verdict = crate::machine::equivalent(&capped, &reference, 8).unwrap();
            assert!(verdict.is_pass(), "t={t}: {verdict}");
        }
    }
}
