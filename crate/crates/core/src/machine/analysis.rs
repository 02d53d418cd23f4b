use std::collections::HashMap;
use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::machine::pins::{OutputVector, Sample};
use crate::machine::trace::Trace;
use crate::machine::transducer::{State, Transducer};
use crate::verdict::{Counterexample, Verdict};

/// Breadth-first closure of the initial state under all samples, in canonical
/// sample order. Fails with `StateBudgetExceeded` once more than `max_states`
/// states have been discovered, signalling a possibly infinite machine.
pub fn reachable_states(m: &Transducer, max_states: usize) -> Result<Vec<State>> {
    assert!(max_states > 0, "state budget must be positive");
    let samples = m.input_pins().all_samples();
    let mut order = Vec::new();
    let mut seen: HashMap<State, usize> = HashMap::new();
    let mut queue = VecDeque::new();

    let initial = m.initial_state();
    seen.insert(initial.clone(), 0);
    order.push(initial.clone());
    queue.push_back(initial);

    while let Some(state) = queue.pop_front() {
        for sample in &samples {
            let next = m.step(&state, sample);
            if !seen.contains_key(&next) {
                if order.len() >= max_states {
                    return Err(Error::StateBudgetExceeded(max_states));
                }
                seen.insert(next.clone(), order.len());
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(order)
}

/// Explicit transition table over the reachable states of a machine.
pub(crate) struct Table {
    /// Reachable states in BFS discovery order.
    pub(crate) states: Vec<State>,
    /// `next[s][a]` = index of the successor of state `s` on sample `a`.
    pub(crate) next: Vec<Vec<usize>>,
    /// Output bits per state.
    pub(crate) out: Vec<u32>,
}

pub(crate) fn tabulate(m: &Transducer, samples: &[Sample], max_states: usize) -> Result<Table> {
    let states = reachable_states(m, max_states)?;
    let index: HashMap<&State, usize> = states.iter().zip(0..).collect();
    let mut next = Vec::with_capacity(states.len());
    let mut out = Vec::with_capacity(states.len());
    for state in &states {
        let row: Vec<usize> = samples
            .iter()
            .map(|a| index[&m.step(state, a)])
            .collect();
        next.push(row);
        out.push(m.output_bits(state));
    }
    Ok(Table { states, next, out })
}

/// Moore-style partition refinement: states start grouped by output and are
/// split until successors respect the partition. Returns one class id per
/// state, numbered by first occurrence in state order.
fn refine(next: &[Vec<usize>], keys: &[u32]) -> Vec<usize> {
    let mut class = canonical_classes_by_key(keys);
    loop {
        let signatures: Vec<(usize, Vec<usize>)> = next
            .iter()
            .enumerate()
            .map(|(s, row)| (class[s], row.iter().map(|t| class[*t]).collect()))
            .collect();
        let mut ids: HashMap<&(usize, Vec<usize>), usize> = HashMap::new();
        let mut new_class = vec![0usize; next.len()];
        for (s, sig) in signatures.iter().enumerate() {
            let id = ids.len();
            let entry = *ids.entry(sig).or_insert(id);
            new_class[s] = entry;
        }
        if new_class == class {
            return class;
        }
        class = new_class;
    }
}

fn canonical_classes_by_key(keys: &[u32]) -> Vec<usize> {
    let mut ids: HashMap<u32, usize> = HashMap::new();
    keys.iter()
        .map(|k| {
            let id = ids.len();
            *ids.entry(*k).or_insert(id)
        })
        .collect()
}

/// The machine over equivalence classes of reachable states: same
/// input/output behavior on every trace, with no two distinct states
/// equivalent. States of the result are `State::Index` class ids.
pub fn minimize(m: &Transducer, max_states: usize) -> Result<Transducer> {
    let samples = m.input_pins().all_samples();
    let table = tabulate(m, &samples, max_states)?;
    let class = refine(&table.next, &table.out);
    let n_classes = class.iter().copied().max().unwrap_or(0) + 1;

    // One representative row per class.
    let mut next = vec![Vec::new(); n_classes];
    let mut out = vec![0u32; n_classes];
    for (s, c) in class.iter().enumerate() {
        if next[*c].is_empty() {
            next[*c] = table.next[s].iter().map(|t| class[*t] as u32).collect();
            out[*c] = table.out[s];
        }
    }

    let inputs = m.input_pins().clone();
    let outputs = m.output_pins().clone();
    let next = Arc::new(next);
    let out_bits = Arc::new(out);
    let step_inputs = inputs.clone();
    let out_pins = outputs.clone();
    Ok(Transducer::new(
        inputs,
        outputs,
        State::Index(class[0] as u32),
        move |state, sample| {
            let State::Index(i) = state else {
                unreachable!("minimized machine state")
            };
            let a = step_inputs.sample_index(sample) as usize;
            State::Index(next[*i as usize][a])
        },
        move |state| {
            let State::Index(i) = state else {
                unreachable!("minimized machine state")
            };
            OutputVector::from_bits(&out_pins, out_bits[*i as usize])
        },
    ))
}

/// Decides whether `m1` and `m2` agree on every trace of length at most
/// `depth`. `FAIL` carries the shortest (then lexicographically first)
/// disagreeing trace.
pub fn equivalent(m1: &Transducer, m2: &Transducer, depth: usize) -> Result<Verdict> {
    if m1.input_pins() != m2.input_pins() {
        return Err(m1.input_pins().mismatch(m2.input_pins()));
    }
    if m1.output_pins() != m2.output_pins() {
        return Err(m1.output_pins().mismatch(m2.output_pins()));
    }
    let pins = m1.input_pins().clone();
    let samples = pins.all_samples();
    let mut explored = 0u64;

    // Iterative deepening keeps the first violation shortest-lexicographic.
    for d in 0..=depth {
        let mut stack = vec![(m1.initial_state(), m2.initial_state())];
        let mut path: Vec<u32> = Vec::new();
        if let Some(ce) = search_pair(
            m1,
            m2,
            &samples,
            &mut stack,
            &mut path,
            d,
            &mut explored,
        ) {
            let trace = Trace::from_bits(&pins, ce);
            return Ok(Verdict::fail(
                Counterexample::plain(trace),
                explored,
            ));
        }
    }
    Ok(Verdict::pass(explored))
}

fn search_pair(
    m1: &Transducer,
    m2: &Transducer,
    samples: &[Sample],
    stack: &mut Vec<(State, State)>,
    path: &mut Vec<u32>,
    target: usize,
    explored: &mut u64,
) -> Option<Vec<u32>> {
    let (s1, s2) = stack.last().unwrap().clone();
    if path.len() == target {
        *explored += 1;
        if m1.output_bits(&s1) != m2.output_bits(&s2) {
            return Some(path.clone());
        }
        return None;
    }
    for sample in samples {
        stack.push((m1.step(&s1, sample), m2.step(&s2, sample)));
        path.push(sample.bits());
        let found = search_pair(m1, m2, samples, stack, path, target, explored);
        stack.pop();
        path.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Exact equivalence for machines that are finite within `max_states`:
/// partition-refines the disjoint union of both reachable state sets and
/// compares the blocks of the two initial states.
pub fn equivalent_exact(m1: &Transducer, m2: &Transducer, max_states: usize) -> Result<bool> {
    if m1.input_pins() != m2.input_pins() {
        return Err(m1.input_pins().mismatch(m2.input_pins()));
    }
    if m1.output_pins() != m2.output_pins() {
        return Err(m1.output_pins().mismatch(m2.output_pins()));
    }
    let samples = m1.input_pins().all_samples();
    let t1 = tabulate(m1, &samples, max_states)?;
    let t2 = tabulate(m2, &samples, max_states)?;

    let offset = t1.states.len();
    let mut next = t1.next;
    next.extend(
        t2.next
            .iter()
            .map(|row| row.iter().map(|t| t + offset).collect()),
    );
    let mut keys = t1.out;
    keys.extend_from_slice(&t2.out);
    let class = refine(&next, &keys);
    Ok(class[0] == class[offset])
}

/// Shortest trace distinguishing two states of `m`, or `None` if they are
/// equivalent up to `max_len`. Used to witness minimality.
pub fn distinguishing_trace(
    m: &Transducer,
    s1: &State,
    s2: &State,
    max_len: usize,
) -> Option<Trace> {
    let pins = m.input_pins().clone();
    let samples = pins.all_samples();
    let mut queue = VecDeque::new();
    queue.push_back((s1.clone(), s2.clone(), Vec::new()));
    while let Some((a, b, path)) = queue.pop_front() {
        if m.output_bits(&a) != m.output_bits(&b) {
            return Some(Trace::from_bits(&pins, path));
        }
        if path.len() == max_len {
            continue;
        }
        for sample in &samples {
            let mut next_path = path.clone();
            next_path.push(sample.bits());
            queue.push_back((m.step(&a, sample), m.step(&b, sample), next_path));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::pins::{Level, PinId, PinSet};

    fn pins1() -> PinSet {
        PinSet::of(&["x"])
    }

    /// Two-state machine with identical behavior in both states.
    fn duplicated_machine() -> Transducer {
        let out = PinId::new("y");
        Transducer::new(
            pins1(),
            PinSet::of(&["y"]),
            State::Index(0),
            |state, _| match state {
                State::Index(0) => State::Index(1),
                _ => State::Index(0),
            },
            move |_| OutputVector::single(&out, Level::High),
        )
    }

    fn unbounded_counter() -> Transducer {
        let out = PinId::new("y");
        Transducer::new(
            pins1(),
            PinSet::of(&["y"]),
            State::Count(0),
            |state, _| match state {
                State::Count(n) => State::Count(n + 1),
                _ => unreachable!(),
            },
            move |_| OutputVector::single(&out, Level::Low),
        )
    }

    #[test]
    fn constant_machine_has_one_reachable_state() {
        let m = Transducer::constant(pins1(), OutputVector::single(&PinId::new("y"), Level::Low));
        assert_eq!(reachable_states(&m, 10).unwrap().len(), 1);
    }

    #[test]
    fn unbounded_counter_exceeds_budget() {
        let err = reachable_states(&unbounded_counter(), 100).unwrap_err();
        assert_eq!(err, Error::StateBudgetExceeded(100));
    }

    #[test]
    fn duplicate_states_collapse() {
        let m = duplicated_machine();
        assert_eq!(reachable_states(&m, 10).unwrap().len(), 2);
        let min = minimize(&m, 10).unwrap();
        assert_eq!(reachable_states(&min, 10).unwrap().len(), 1);
        assert!(equivalent(&m, &min, 6).unwrap().is_pass());
        assert!(equivalent_exact(&m, &min, 100).unwrap());
    }

    #[test]
    fn minimizing_a_minimal_machine_keeps_the_state_count() {
        let m = duplicated_machine();
        let min = minimize(&m, 10).unwrap();
        let min2 = minimize(&min, 10).unwrap();
        assert_eq!(
            reachable_states(&min, 10).unwrap().len(),
            reachable_states(&min2, 10).unwrap().len()
        );
    }

    #[test]
    fn equivalence_is_reflexive() {
        let m = duplicated_machine();
        let verdict = equivalent(&m, &m, 4).unwrap();
        assert!(verdict.is_pass());
        // Σ_{d=0..4} 2^d over a one-pin alphabet.
        assert_eq!(verdict.traces_explored, 31);
    }

    #[test]
    fn differing_machines_yield_shortest_counterexample() {
        let m1 = duplicated_machine();
        let m2 = Transducer::constant(pins1(), OutputVector::single(&PinId::new("y"), Level::Low));
        let verdict = equivalent(&m1, &m2, 4).unwrap();
        let ce = verdict.counterexample.expect("must disagree");
        assert_eq!(ce.trace.len(), 0, "machines already differ at Λ");
    }
}
