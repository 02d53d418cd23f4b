//! Property tests for the recursion laws of evaluation and the trace
//! counters, plus minimization soundness on random machines.

use proptest::prelude::*;

use moorekit::machine::{
    distinguishing_trace, equivalent, equivalent_exact, minimize, reachable_states,
};
use moorekit::observers::{
    self, HoldQuery, HoldTracker, LatchedTracker, OutputStabilityTracker, StableTracker,
};
use moorekit::{Level, OutputVector, PinId, PinSet, Sample, State, Trace, Transducer};

fn sr_pins() -> PinSet {
    PinSet::of(&["set", "reset"])
}

fn trace_from_indices(pins: &PinSet, indices: &[usize]) -> Trace {
    let samples = pins.all_samples();
    let mut w = Trace::empty(pins);
    for i in indices {
        w.push(&samples[i % samples.len()]).unwrap();
    }
    w
}

/// A random table machine over `n` states, 2 input pins, 1 output pin.
fn table_machine(next: Vec<Vec<u32>>, outs: Vec<u32>) -> Transducer {
    let pins = PinSet::of(&["a", "b"]);
    let out_pin = PinSet::of(&["y"]);
    let step_pins = pins.clone();
    let out_pins = out_pin.clone();
    Transducer::new(
        pins,
        out_pin,
        State::Index(0),
        move |state, sample| {
            let State::Index(i) = state else { unreachable!() };
            let a = step_pins.sample_index(sample) as usize;
            State::Index(next[*i as usize][a])
        },
        move |state| {
            let State::Index(i) = state else { unreachable!() };
            OutputVector::from_bits(&out_pins, outs[*i as usize])
        },
    )
}

fn arb_table_machine() -> impl Strategy<Value = Transducer> {
    (2usize..=6).prop_flat_map(|n| {
        (
            proptest::collection::vec(proptest::collection::vec(0..n as u32, 4), n),
            proptest::collection::vec(0u32..=1, n),
        )
            .prop_map(|(next, outs)| table_machine(next, outs))
    })
}

proptest! {
    #[test]
    fn run_ends_with_eval_and_respects_prefixes(indices in proptest::collection::vec(0usize..4, 0..12)) {
        let pins = sr_pins();
        let m = moorekit::gates::make_nand(&moorekit::gates::GateParams::new(pins.clone(), 2, Level::High));
        let w = trace_from_indices(&pins, &indices);
        let outs = m.run(&w).unwrap();
        prop_assert_eq!(outs.len(), w.len() + 1);
        prop_assert_eq!(&outs[w.len()], &m.eval(&w).unwrap());
        // Every prefix agrees with a fresh evaluation (δ* recursion).
        for k in 0..=w.len() {
            prop_assert_eq!(&outs[k], &m.eval(&w.prefix(k)).unwrap());
        }
    }

    #[test]
    fn counters_step_by_their_recursions(indices in proptest::collection::vec(0usize..4, 1..14)) {
        let pins = sr_pins();
        let w = trace_from_indices(&pins, &indices);
        let shorter = w.prefix(w.len() - 1);
        for pin in pins.iter() {
            for level in [Level::Low, Level::High] {
                let q = HoldQuery { pin: pin.clone(), level };
                let now = observers::hold(&w, &q).unwrap();
                let before = observers::hold(&shorter, &q).unwrap();
                prop_assert!(now == 0 || now == before + 1);
            }
            // High is the level-1 hold.
            prop_assert_eq!(
                observers::high(&w, pin).unwrap(),
                observers::hold(&w, &HoldQuery { pin: pin.clone(), level: Level::High }).unwrap()
            );
        }
        let s_now = observers::stable(&w);
        let s_before = observers::stable(&shorter);
        prop_assert!(s_now == 0 || s_now == s_before + 1);

        // A stable suffix pins every individual pin.
        let last = observers::last(&w).unwrap();
        for (i, pin) in pins.iter().enumerate() {
            let q = HoldQuery { pin: pin.clone(), level: last.level_at(i) };
            prop_assert!(observers::hold(&w, &q).unwrap() >= observers::stable(&w));
        }

        prop_assert_eq!(observers::time(&w), w.len() as u64);
    }

    #[test]
    fn incremental_trackers_agree_with_the_pure_forms(indices in proptest::collection::vec(0usize..4, 0..14)) {
        let pins = sr_pins();
        let w = trace_from_indices(&pins, &indices);
        let set = PinId::new("set");

        let mut hold = HoldTracker::new(&pins, &set).unwrap();
        let mut stable = StableTracker::new();
        let mut latched = [
            LatchedTracker::new(&pins, Level::Low, 2).unwrap(),
            LatchedTracker::new(&pins, Level::High, 2).unwrap(),
        ];
        for sample in w.samples() {
            hold.update(&sample);
            stable.update(&sample);
            latched[0].update(&sample);
            latched[1].update(&sample);
        }
        for level in [Level::Low, Level::High] {
            prop_assert_eq!(
                hold.hold(level),
                observers::hold(&w, &HoldQuery { pin: set.clone(), level }).unwrap()
            );
        }
        prop_assert_eq!(stable.stable(), observers::stable(&w));
        prop_assert_eq!(latched[0].value(), observers::latched(&w, Level::Low, 2).unwrap());
        prop_assert_eq!(latched[1].value(), observers::latched(&w, Level::High, 2).unwrap());

        // Output stability tracker against the pure form over run outputs.
        let m = moorekit::gates::make_nand(&moorekit::gates::GateParams::new(pins.clone(), 1, Level::High));
        let outs = m.run(&w).unwrap();
        let mut tracker = OutputStabilityTracker::new();
        for o in &outs {
            tracker.update(o.bits());
        }
        prop_assert_eq!(tracker.stable(), observers::stable_output(&outs));
    }

    #[test]
    fn latched_traces_stay_latched_when_extended_in_place(indices in proptest::collection::vec(0usize..4, 0..8)) {
        let pins = sr_pins();
        let mut w = trace_from_indices(&pins, &indices);
        let hold = Sample::from_pairs(&pins, &[("set", Level::High), ("reset", Level::Low)]).unwrap();
        w.extend_held(&hold, 3).unwrap();
        prop_assert_eq!(observers::latched(&w, Level::High, 3).unwrap(), Level::High);
        let mut extended = w.clone();
        extended.push(&observers::last(&w).unwrap()).unwrap();
        prop_assert_eq!(observers::latched(&extended, Level::High, 3).unwrap(), Level::High);
    }

    #[test]
    fn minimization_is_sound_and_minimal(m in arb_table_machine()) {
        let min = minimize(&m, 1000).unwrap();
        // Independent oracle: exhaustive trace enumeration to depth 5.
        let pins = m.input_pins().clone();
        let samples = pins.all_samples();
        let mut stack = vec![Trace::empty(&pins)];
        while let Some(w) = stack.pop() {
            prop_assert_eq!(m.eval(&w).unwrap().bits(), min.eval(&w).unwrap().bits());
            if w.len() < 5 {
                for s in &samples {
                    let mut next = w.clone();
                    next.push(s).unwrap();
                    stack.push(next);
                }
            }
        }
        prop_assert!(equivalent(&m, &min, 5).unwrap().is_pass());
        prop_assert!(equivalent_exact(&m, &min, 1000).unwrap());

        // No two minimized states are equivalent: each pair has a
        // distinguishing trace shorter than the state count.
        let states = reachable_states(&min, 1000).unwrap();
        for (i, s1) in states.iter().enumerate() {
            for s2 in states.iter().skip(i + 1) {
                let witness = distinguishing_trace(&min, s1, s2, states.len());
                prop_assert!(witness.is_some());
                prop_assert!(witness.unwrap().len() < states.len());
            }
        }
    }

    #[test]
    fn equivalence_verdicts_replay(m1 in arb_table_machine(), m2 in arb_table_machine()) {
        let verdict = equivalent(&m1, &m2, 4).unwrap();
        if let Some(ce) = &verdict.counterexample {
            prop_assert_ne!(
                m1.eval(&ce.trace).unwrap().bits(),
                m2.eval(&ce.trace).unwrap().bits()
            );
            // Shortest: every strictly shorter prefix agrees everywhere up
            // to that length is implied by minimality of the search; check
            // at least that the immediate prefix agrees.
            if !ce.trace.is_empty() {
                let p = ce.trace.prefix(ce.trace.len() - 1);
                prop_assert_eq!(m1.eval(&p).unwrap().bits(), m2.eval(&p).unwrap().bits());
            }
        }
    }
}
