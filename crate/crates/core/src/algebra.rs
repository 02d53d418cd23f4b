//! Transformation monoids of finite machines and the algebraic
//! combinational/sequential classifier.
//!
//! Every trace `w` acts on the state set as the map `σ_w : s ↦ δ*(s, w)`;
//! the monoid collects all such maps under composition. Extraction always
//! minimizes first, since unreachable or duplicated states only inflate the
//! monoid.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::machine::{minimize, tabulate, State, Transducer};
use crate::verdict::Verdict;

/// An element is canonicalized as its full image vector over the state
/// universe, so equality is structural.
pub type ElementId = usize;

/// The monoid of state maps `σ_w` of a finite machine, generated by the
/// per-sample maps and closed under composition.
#[derive(Debug, Clone)]
pub struct TransformationMonoid {
    /// Minimized reachable states, in discovery order.
    state_universe: Vec<State>,
    /// Image vectors: `elements[e][s]` is where element `e` sends state `s`.
    elements: Vec<Vec<u32>>,
    /// Element of each input sample, indexed by canonical sample order.
    generators: Vec<ElementId>,
    /// Index map for structural lookup.
    index: HashMap<Vec<u32>, ElementId>,
}

impl TransformationMonoid {
    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn state_count(&self) -> usize {
        self.state_universe.len()
    }

    pub fn state_universe(&self) -> &[State] {
        &self.state_universe
    }

    /// σ_Λ.
    pub fn identity(&self) -> ElementId {
        0
    }

    pub fn image(&self, e: ElementId) -> &[u32] {
        &self.elements[e]
    }

    pub fn generators(&self) -> &[ElementId] {
        &self.generators
    }

    /// `a` then `b`: the element of `u ∘ z` given the elements of `u` and
    /// `z`. The monoid is closed, so the result always exists.
    pub fn compose(&self, a: ElementId, b: ElementId) -> ElementId {
        let image = compose_images(&self.elements[a], &self.elements[b]);
        self.index[&image]
    }

    pub fn lookup(&self, image: &[u32]) -> Option<ElementId> {
        self.index.get(image).copied()
    }
}

fn compose_images(first: &[u32], then: &[u32]) -> Vec<u32> {
    first.iter().map(|s| then[*s as usize]).collect()
}

/// Computes the transformation monoid of `m` after minimization.
/// `max_elements` bounds both the reachable state count and the closure.
pub fn monoid(m: &Transducer, max_elements: usize) -> Result<TransformationMonoid> {
    let min = minimize(m, max_elements)?;
    let samples = min.input_pins().all_samples();
    let table = tabulate(&min, &samples, max_elements)?;
    let n = table.states.len();

    let identity: Vec<u32> = (0..n as u32).collect();
    let generator_images: Vec<Vec<u32>> = (0..samples.len())
        .map(|a| table.next.iter().map(|row| row[a] as u32).collect())
        .collect();

    let mut elements = vec![identity.clone()];
    let mut index = HashMap::new();
    index.insert(identity, 0);
    let mut frontier = vec![0usize];
    while let Some(e) = frontier.pop() {
        for gen in &generator_images {
            let image = compose_images(&elements[e], gen);
            if !index.contains_key(&image) {
                if elements.len() >= max_elements {
                    return Err(Error::ElementBudgetExceeded(max_elements));
                }
                let id = elements.len();
                index.insert(image.clone(), id);
                elements.push(image);
                frontier.push(id);
            }
        }
    }

    let generators = generator_images
        .iter()
        .map(|image| index[image])
        .collect();
    Ok(TransformationMonoid {
        state_universe: table.states,
        elements,
        generators,
        index,
    })
}

/// Whether `m` behaves combinationally in the algebraic sense: no constant
/// input can oscillate the minimized machine. For every sample, iterating
/// its transition map from any reachable state must reach a fixed point, so
/// the only cycles of each per-sample map are self-loops. Feedback products
/// like the latch fail this: holding both inputs high cycles the gate pair.
pub fn is_combinational(m: &Transducer, max_states: usize) -> Result<bool> {
    let min = minimize(m, max_states)?;
    let samples = min.input_pins().all_samples();
    let table = tabulate(&min, &samples, max_states)?;
    let n = table.states.len();
    for a in 0..samples.len() {
        for start in 0..n {
            // Functional graph: walk until a repeat; n steps suffice.
            let mut s = start;
            for _ in 0..n {
                s = table.next[s][a];
            }
            if table.next[s][a] != s {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Checks the monoid laws on a computed monoid: the identity is neutral,
/// composition is closed, and associativity holds on `trials` random
/// triples. Guards the extraction code; the laws hold by construction.
pub fn monoid_laws(mon: &TransformationMonoid, trials: usize) -> Verdict {
    let mut checks = 0u64;
    let id = mon.identity();
    for e in 0..mon.size() {
        checks += 1;
        if mon.compose(id, e) != e || mon.compose(e, id) != e {
            return Verdict::fail_without_trace(checks);
        }
    }
    for a in 0..mon.size() {
        for b in 0..mon.size() {
            checks += 1;
            let image = compose_images(mon.image(a), mon.image(b));
            if mon.lookup(&image).is_none() {
                return Verdict::fail_without_trace(checks);
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(0);
    for _ in 0..trials {
        checks += 1;
        let (a, b, c) = (
            rng.gen_range(0..mon.size()),
            rng.gen_range(0..mon.size()),
            rng.gen_range(0..mon.size()),
        );
        if mon.compose(mon.compose(a, b), c) != mon.compose(a, mon.compose(b, c)) {
            return Verdict::fail_without_trace(checks);
        }
    }
    Verdict::pass(checks)
}

/// Descriptive statistics reported alongside a monoid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoidStats {
    pub size: usize,
    pub state_count: usize,
    pub generator_count: usize,
    pub idempotents: usize,
    /// Whether any non-identity element has a two-sided inverse.
    pub has_nontrivial_unit: bool,
}

pub fn monoid_stats(mon: &TransformationMonoid) -> MonoidStats {
    let distinct_generators: std::collections::BTreeSet<ElementId> =
        mon.generators().iter().copied().collect();
    let idempotents = (0..mon.size()).filter(|e| mon.compose(*e, *e) == *e).count();
    let id = mon.identity();
    let has_nontrivial_unit = (0..mon.size()).any(|e| {
        e != id
            && (0..mon.size()).any(|f| mon.compose(e, f) == id && mon.compose(f, e) == id)
    });
    MonoidStats {
        size: mon.size(),
        state_count: mon.state_count(),
        generator_count: distinct_generators.len(),
        idempotents,
        has_nontrivial_unit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{make_nand7, make_sr_latch};
    use crate::machine::{Level, OutputVector, PinId, PinSet};
    use crate::product::compose;

    fn one_state_machine() -> Transducer {
        Transducer::constant(
            PinSet::of(&["x"]),
            OutputVector::single(&PinId::new("y"), Level::Low),
        )
    }

    /// Every sample swaps two states with distinct outputs.
    fn swap_machine() -> Transducer {
        let out = PinId::new("y");
        Transducer::new(
            PinSet::of(&["x"]),
            PinSet::of(&["y"]),
            State::Index(0),
            |state, _| match state {
                State::Index(0) => State::Index(1),
                _ => State::Index(0),
            },
            move |state| {
                OutputVector::single(&out, Level::from_bool(matches!(state, State::Index(1))))
            },
        )
    }

    #[test]
    fn one_state_machine_has_the_trivial_monoid() {
        let mon = monoid(&one_state_machine(), 100).unwrap();
        assert_eq!(mon.size(), 1);
        assert!(monoid_laws(&mon, 10).is_pass());
    }

    #[test]
    fn swap_machine_generates_the_two_element_group() {
        let mon = monoid(&swap_machine(), 100).unwrap();
        assert_eq!(mon.size(), 2);
        let stats = monoid_stats(&mon);
        assert!(stats.has_nontrivial_unit, "the swap is invertible");
        assert_eq!(stats.idempotents, 1);
        assert!(monoid_laws(&mon, 100).is_pass());
    }

    #[test]
    fn element_budget_is_enforced() {
        let err = monoid(&swap_machine(), 1).unwrap_err();
        assert!(matches!(
            err,
            Error::ElementBudgetExceeded(1) | Error::StateBudgetExceeded(1)
        ));
    }

    #[test]
    fn generator_folding_matches_direct_walks() {
        let latch = make_sr_latch(1, (Level::High, Level::Low));
        let m = latch.composite().unwrap();
        let min = minimize(&m, 10_000).unwrap();
        let mon = monoid(&m, 100_000).unwrap();
        let samples = min.input_pins().all_samples();
        let states = mon.state_universe().to_vec();
        let index: HashMap<&State, u32> = states.iter().zip(0..).collect();

        let mut rng_state = 0xD1B54A32D192ED03u64;
        let mut next_rand = move || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            rng_state
        };
        for _ in 0..50 {
            let len = (next_rand() % 21) as usize;
            let word: Vec<usize> =
                (0..len).map(|_| (next_rand() as usize) % samples.len()).collect();
            let mut element = mon.identity();
            for &a in &word {
                element = mon.compose(element, mon.generators()[a]);
            }
            for (s, state) in states.iter().enumerate() {
                let mut cur = state.clone();
                for &a in &word {
                    cur = min.step(&cur, &samples[a]);
                }
                assert_eq!(mon.image(element)[s], index[&cur]);
            }
        }
    }

    #[test]
    fn latch_monoid_is_finite_and_lawful() {
        let latch = make_sr_latch(1, (Level::High, Level::Low));
        let m = latch.composite().unwrap();
        let mon = monoid(&m, 100_000).unwrap();
        // Frozen from the closure oracle: 4 minimized states, 14 maps.
        assert_eq!(mon.state_count(), 4);
        assert_eq!(mon.size(), 14);
        assert!(monoid_laws(&mon, 1000).is_pass());
        let stats = monoid_stats(&mon);
        assert_eq!(stats.idempotents, 9);
        assert!(stats.has_nontrivial_unit, "holding both inputs high swaps states");
    }

    #[test]
    fn monoid_size_regression_values() {
        // Frozen from the closure oracle.
        let adder = crate::gates::make_adder_bit(&crate::gates::AdderParams::new(
            1,
            Level::Low,
            Level::Low,
        ));
        let mon = monoid(&adder, 100_000).unwrap();
        assert_eq!((mon.state_count(), mon.size()), (4, 5));

        let nand7 = compose(&make_nand7(1, (Level::High, Level::High, Level::High))).unwrap();
        let mon = monoid(&nand7, 1_000_000).unwrap();
        assert_eq!((mon.state_count(), mon.size()), (4, 7));
    }

    #[test]
    fn combinational_classification_matches_the_circuits() {
        let nand7 = compose(&make_nand7(1, (Level::High, Level::High, Level::High))).unwrap();
        assert!(is_combinational(&nand7, 1_000_000).unwrap());

        let latch = make_sr_latch(1, (Level::High, Level::Low));
        let m = latch.composite().unwrap();
        assert!(!is_combinational(&m, 10_000).unwrap());

        assert!(is_combinational(&one_state_machine(), 100).unwrap());
    }

    #[test]
    fn feedback_free_specs_compose_combinationally() {
        use crate::product::is_feedback_free;
        let spec = make_nand7(1, (Level::Low, Level::Low, Level::Low));
        assert!(is_feedback_free(&spec).unwrap());
        assert!(is_combinational(&compose(&spec).unwrap(), 1_000_000).unwrap());

        let ripple = crate::circuits::make_ripple_adder(2, 1, &[(Level::Low, Level::Low); 2]);
        assert!(is_feedback_free(&ripple.spec).unwrap());
        assert!(is_combinational(&ripple.composite().unwrap(), 1_000_000).unwrap());
    }
}
