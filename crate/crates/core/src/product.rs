//! Wire-only product of machines: each factor's next input sample is
//! assembled from the composite input and the factors' *current* outputs, so
//! every feedback path carries one step of interconnect delay.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::exhaustive::{self, Branches, Choice, Walk};
use crate::machine::{OutputVector, PinId, PinSet, Sample, State, Trace, Transducer};
use crate::verdict::{Counterexample, Verdict};

/// Where one factor input pin is driven from. Connections are wires only:
/// either a composite input pin or another factor's output pin, never a
/// computed function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireSource {
    External(PinId),
    Factor { index: usize, pin: PinId },
}

/// Total wiring: one source per (factor, factor input pin).
#[derive(Debug, Clone, Default)]
pub struct ConnectionMap {
    wires: BTreeMap<(usize, PinId), WireSource>,
}

impl ConnectionMap {
    pub fn new() -> ConnectionMap {
        ConnectionMap::default()
    }

    pub fn wire(&mut self, factor: usize, pin: PinId, source: WireSource) -> Result<()> {
        if self
            .wires
            .insert((factor, pin.clone()), source)
            .is_some()
        {
            return Err(Error::SpecInvalid(format!(
                "factor {factor} input pin `{pin}` is driven more than once"
            )));
        }
        Ok(())
    }

    pub fn source(&self, factor: usize, pin: &PinId) -> Option<&WireSource> {
        self.wires.get(&(factor, pin.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, PinId), &WireSource)> {
        self.wires.iter()
    }
}

/// Which factor outputs the composite exposes, and under which names.
#[derive(Debug, Clone, Default)]
pub struct OutputSelection {
    exposure: BTreeMap<PinId, (usize, PinId)>,
}

impl OutputSelection {
    pub fn new() -> OutputSelection {
        OutputSelection::default()
    }

    pub fn expose(&mut self, out: PinId, factor: usize, pin: PinId) -> Result<()> {
        if self.exposure.insert(out.clone(), (factor, pin)).is_some() {
            return Err(Error::SpecInvalid(format!(
                "composite output pin `{out}` is exposed more than once"
            )));
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PinId, &(usize, PinId))> {
        self.exposure.iter()
    }

    pub fn len(&self) -> usize {
        self.exposure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exposure.is_empty()
    }
}

/// A composite machine description: factors, wiring, output selection, and
/// the composite input pin set.
#[derive(Debug, Clone)]
pub struct ProductSpec {
    pub factors: Vec<Transducer>,
    pub wiring: ConnectionMap,
    pub exposure: OutputSelection,
    pub input_pins: PinSet,
}

impl ProductSpec {
    pub fn validate(&self) -> Result<()> {
        lower(self).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum LoweredSource {
    Input(usize),
    Factor { factor: usize, bit: usize },
}

/// Index-resolved form of a [`ProductSpec`]; shared by composition, induced
/// input computation, and the nondeterministic product in the checker.
pub(crate) struct Lowered {
    pub factors: Vec<Transducer>,
    pub inputs: PinSet,
    pub outputs: PinSet,
    pub factor_inputs: Vec<PinSet>,
    /// Per factor, per factor-input-pin index: where the level comes from.
    pub wiring: Vec<Vec<LoweredSource>>,
    /// Per composite output pin index: (factor, factor output bit).
    pub exposure: Vec<(usize, usize)>,
}

impl Lowered {
    /// Assemble factor `i`'s next sample from the composite sample and the
    /// factors' current output bits.
    pub fn assemble(&self, i: usize, sample: &Sample, outs: &[u32]) -> Sample {
        let mut bits = 0u32;
        for (p, source) in self.wiring[i].iter().enumerate() {
            let bit = match source {
                LoweredSource::Input(idx) => (sample.bits() >> idx) & 1,
                LoweredSource::Factor { factor, bit } => (outs[*factor] >> bit) & 1,
            };
            bits |= bit << p;
        }
        Sample::from_bits(&self.factor_inputs[i], bits)
    }

    pub fn current_outputs(&self, states: &[State]) -> SmallVec<[u32; 8]> {
        self.factors
            .iter()
            .zip(states)
            .map(|(f, s)| f.output_bits(s))
            .collect()
    }

    pub fn exposure_bits(&self, outs: &[u32]) -> u32 {
        let mut bits = 0u32;
        for (o, (factor, bit)) in self.exposure.iter().enumerate() {
            bits |= ((outs[*factor] >> bit) & 1) << o;
        }
        bits
    }

    pub fn initial_states(&self) -> Vec<State> {
        self.factors.iter().map(|f| f.initial_state()).collect()
    }

    /// One synchronous step of all factors.
    pub fn step_states(&self, states: &[State], sample: &Sample) -> Vec<State> {
        let outs = self.current_outputs(states);
        self.factors
            .iter()
            .zip(states)
            .enumerate()
            .map(|(i, (f, s))| f.step(s, &self.assemble(i, sample, &outs)))
            .collect()
    }
}

pub(crate) fn lower(spec: &ProductSpec) -> Result<Lowered> {
    if spec.factors.is_empty() {
        return Err(Error::SpecInvalid("product has no factors".into()));
    }
    if spec.exposure.is_empty() {
        return Err(Error::SpecInvalid("product exposes no output pins".into()));
    }
    let n = spec.factors.len();

    // Every wire must reference a real factor input pin and a real source.
    for ((factor, pin), source) in spec.wiring.iter() {
        if *factor >= n {
            return Err(Error::SpecInvalid(format!(
                "wire targets factor {factor} but the product has {n} factors"
            )));
        }
        if !spec.factors[*factor].input_pins().contains(pin) {
            return Err(Error::SpecInvalid(format!(
                "factor {factor} has no input pin `{pin}`"
            )));
        }
        match source {
            WireSource::External(p) => {
                if !spec.input_pins.contains(p) {
                    return Err(Error::SpecInvalid(format!(
                        "wire source references unknown composite input `{p}`"
                    )));
                }
            }
            WireSource::Factor { index, pin: p } => {
                if *index >= n {
                    return Err(Error::SpecInvalid(format!(
                        "wire source references factor {index} but the product has {n} factors"
                    )));
                }
                if !spec.factors[*index].output_pins().contains(p) {
                    return Err(Error::SpecInvalid(format!(
                        "factor {index} has no output pin `{p}`"
                    )));
                }
            }
        }
    }

    // Totality: every factor input pin driven.
    let mut wiring = Vec::with_capacity(n);
    let mut factor_inputs = Vec::with_capacity(n);
    for (i, factor) in spec.factors.iter().enumerate() {
        let pins = factor.input_pins().clone();
        let mut row = Vec::with_capacity(pins.len());
        for pin in pins.iter() {
            let source = spec.wiring.source(i, pin).ok_or_else(|| {
                Error::SpecInvalid(format!("factor {i} input pin `{pin}` is undriven"))
            })?;
            row.push(match source {
                WireSource::External(p) => {
                    LoweredSource::Input(spec.input_pins.position(p).unwrap())
                }
                WireSource::Factor { index, pin: p } => LoweredSource::Factor {
                    factor: *index,
                    bit: spec.factors[*index].output_pins().position(p).unwrap(),
                },
            });
        }
        wiring.push(row);
        factor_inputs.push(pins);
    }

    let mut out_pins = Vec::new();
    for (out, (factor, pin)) in spec.exposure.iter() {
        if *factor >= n {
            return Err(Error::SpecInvalid(format!(
                "output `{out}` references factor {factor} but the product has {n} factors"
            )));
        }
        if !spec.factors[*factor].output_pins().contains(pin) {
            return Err(Error::SpecInvalid(format!(
                "output `{out}` references missing factor output `{pin}`"
            )));
        }
        out_pins.push(out.clone());
    }
    let outputs = PinSet::new(out_pins).map_err(|e| Error::SpecInvalid(e.to_string()))?;
    let exposure = outputs
        .iter()
        .map(|out| {
            let (factor, pin) = spec
                .exposure
                .iter()
                .find(|(o, _)| *o == out)
                .map(|(_, v)| v)
                .unwrap();
            (
                *factor,
                spec.factors[*factor].output_pins().position(pin).unwrap(),
            )
        })
        .collect();

    Ok(Lowered {
        factors: spec.factors.clone(),
        inputs: spec.input_pins.clone(),
        outputs,
        factor_inputs,
        wiring,
        exposure,
    })
}

/// Builds the composite machine. The composite state is the tuple of factor
/// states; on each input the factors step simultaneously, feedback wires
/// reading the outputs of the *pre-step* states.
pub fn compose(spec: &ProductSpec) -> Result<Transducer> {
    let lowered = Arc::new(lower(spec)?);
    let initial = State::Tuple(lowered.initial_states());
    let step_l = Arc::clone(&lowered);
    let out_l = Arc::clone(&lowered);
    Ok(Transducer::new(
        lowered.inputs.clone(),
        lowered.outputs.clone(),
        initial,
        move |state, sample| {
            let State::Tuple(states) = state else {
                unreachable!("product state")
            };
            State::Tuple(step_l.step_states(states, sample))
        },
        move |state| {
            let State::Tuple(states) = state else {
                unreachable!("product state")
            };
            let outs = out_l.current_outputs(states);
            OutputVector::from_bits(&out_l.outputs, out_l.exposure_bits(&outs))
        },
    ))
}

/// The input sequences the composite induces for its factors: one sample per
/// composite sample, assembled from the recursion that defines the product.
pub fn induced_inputs(spec: &ProductSpec, w: &Trace) -> Result<Vec<Trace>> {
    let lowered = lower(spec)?;
    if w.pins() != &lowered.inputs {
        return Err(lowered.inputs.mismatch(w.pins()));
    }
    let mut states = lowered.initial_states();
    let mut induced: Vec<Vec<u32>> = vec![Vec::with_capacity(w.len()); lowered.factors.len()];
    for sample in w.samples() {
        let outs = lowered.current_outputs(&states);
        let mut next = Vec::with_capacity(states.len());
        for (i, (factor, state)) in lowered.factors.iter().zip(&states).enumerate() {
            let c = lowered.assemble(i, &sample, &outs);
            induced[i].push(c.bits());
            next.push(factor.step(state, &c));
        }
        states = next;
    }
    Ok(lowered
        .factor_inputs
        .iter()
        .zip(induced)
        .map(|(pins, bits)| Trace::from_bits(pins, bits))
        .collect())
}

/// Verifies that the composed machine and the recursive factor evaluation
/// agree: for every trace, the composite output equals the output selection
/// applied to each factor evaluated on its induced input sequence.
/// Exhaustive to `depth`, then `random_trials` random traces of length
/// `random_len` drawn from `seed`.
pub fn theorem1_check(
    spec: &ProductSpec,
    depth: usize,
    random_trials: usize,
    random_len: usize,
    seed: u64,
) -> Result<Verdict> {
    let lowered = Arc::new(lower(spec)?);
    let composite = compose(spec)?;
    let walk = AgreementWalk {
        lowered: Arc::clone(&lowered),
        composite: composite.clone(),
    };
    let verdict = exhaustive::explore(&walk, &lowered.inputs, depth, u64::MAX);
    if !verdict.is_pass() {
        return Ok(verdict);
    }
    let mut explored = verdict.traces_explored;

    let samples = lowered.inputs.all_samples();
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..random_trials {
        let mut node = walk.root();
        let mut bits = Vec::with_capacity(random_len);
        explored += 1;
        for _ in 0..random_len {
            let sample = &samples[rng.gen_range(0..samples.len())];
            bits.push(sample.bits());
            node = walk.step(&node, sample);
            if walk.disagrees(&node) {
                let trace = Trace::from_bits(&lowered.inputs, bits);
                return Ok(Verdict::fail(Counterexample::plain(trace), explored));
            }
        }
    }
    Ok(Verdict::pass(explored))
}

#[derive(Clone)]
struct AgreementNode {
    composite: State,
    parts: Vec<State>,
}

struct AgreementWalk {
    lowered: Arc<Lowered>,
    composite: Transducer,
}

impl AgreementWalk {
    fn root(&self) -> AgreementNode {
        AgreementNode {
            composite: self.composite.initial_state(),
            parts: self.lowered.initial_states(),
        }
    }

    fn step(&self, node: &AgreementNode, sample: &Sample) -> AgreementNode {
        AgreementNode {
            composite: self.composite.step(&node.composite, sample),
            parts: self.lowered.step_states(&node.parts, sample),
        }
    }

    fn disagrees(&self, node: &AgreementNode) -> bool {
        let outs = self.lowered.current_outputs(&node.parts);
        self.composite.output_bits(&node.composite) != self.lowered.exposure_bits(&outs)
    }
}

impl Walk for AgreementWalk {
    type Node = AgreementNode;

    fn roots(&self) -> Vec<(Self::Node, Choice)> {
        vec![(self.root(), Choice::new())]
    }

    fn expand(&self, node: &Self::Node, sample: &Sample) -> Branches<Self::Node> {
        let mut out = Branches::new();
        out.push((self.step(node, sample), Choice::new()));
        out
    }

    fn violated(&self, node: &Self::Node) -> bool {
        self.disagrees(node)
    }
}

/// True when no factor's input depends on another factor's output through a
/// cycle: the factor dependency digraph is acyclic.
pub fn is_feedback_free(spec: &ProductSpec) -> Result<bool> {
    let lowered = lower(spec)?;
    let n = lowered.factors.len();
    let mut edges = vec![Vec::new(); n];
    for (i, row) in lowered.wiring.iter().enumerate() {
        for source in row {
            if let LoweredSource::Factor { factor, .. } = source {
                edges[*factor].push(i);
            }
        }
    }

    // Depth-first cycle detection.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Gray,
        Black,
    }
    fn visit(v: usize, edges: &[Vec<usize>], marks: &mut [Mark]) -> bool {
        marks[v] = Mark::Gray;
        for &w in &edges[v] {
            match marks[w] {
                Mark::Gray => return false,
                Mark::White => {
                    if !visit(w, edges, marks) {
                        return false;
                    }
                }
                Mark::Black => {}
            }
        }
        marks[v] = Mark::Black;
        true
    }
    let mut marks = vec![Mark::White; n];
    for v in 0..n {
        if marks[v] == Mark::White && !visit(v, &edges, &mut marks) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{make_nand, GateParams};
    use crate::machine::Level;

    /// Single NAND wrapped in a product with identity wiring.
    fn identity_product() -> ProductSpec {
        let gate = make_nand(&GateParams::canonical(1, Level::High));
        let inputs = gate.input_pins().clone();
        let mut wiring = ConnectionMap::new();
        for pin in inputs.iter() {
            wiring
                .wire(0, pin.clone(), WireSource::External(pin.clone()))
                .unwrap();
        }
        let mut exposure = OutputSelection::new();
        exposure
            .expose(PinId::new("out"), 0, PinId::new("out"))
            .unwrap();
        ProductSpec {
            factors: vec![gate],
            wiring,
            exposure,
            input_pins: inputs,
        }
    }

    /// Two cross-coupled NANDs; the product unit tests only need the shape.
    fn crossed_product() -> ProductSpec {
        let gate = || make_nand(&GateParams::canonical(1, Level::High));
        let mut wiring = ConnectionMap::new();
        wiring
            .wire(0, PinId::new("1"), WireSource::External(PinId::new("a")))
            .unwrap();
        wiring
            .wire(
                0,
                PinId::new("2"),
                WireSource::Factor {
                    index: 1,
                    pin: PinId::new("out"),
                },
            )
            .unwrap();
        wiring
            .wire(1, PinId::new("1"), WireSource::External(PinId::new("b")))
            .unwrap();
        wiring
            .wire(
                1,
                PinId::new("2"),
                WireSource::Factor {
                    index: 0,
                    pin: PinId::new("out"),
                },
            )
            .unwrap();
        let mut exposure = OutputSelection::new();
        exposure
            .expose(PinId::new("x"), 0, PinId::new("out"))
            .unwrap();
        exposure
            .expose(PinId::new("y"), 1, PinId::new("out"))
            .unwrap();
        ProductSpec {
            factors: vec![gate(), gate()],
            wiring,
            exposure,
            input_pins: PinSet::of(&["a", "b"]),
        }
    }

    #[test]
    fn degenerate_product_equals_its_factor() {
        let spec = identity_product();
        let composite = compose(&spec).unwrap();
        let gate = make_nand(&GateParams::canonical(1, Level::High));
        let verdict = crate::machine::equivalent(&composite, &gate, 5).unwrap();
        assert!(verdict.is_pass(), "{verdict}");
    }

    #[test]
    fn empty_trace_induces_empty_factor_inputs() {
        let spec = crossed_product();
        let w = Trace::empty(&spec.input_pins);
        let induced = induced_inputs(&spec, &w).unwrap();
        assert!(induced.iter().all(|u| u.is_empty()));
    }

    #[test]
    fn induced_inputs_have_one_sample_per_composite_sample() {
        let spec = crossed_product();
        let samples = spec.input_pins.all_samples();
        let mut w = Trace::empty(&spec.input_pins);
        for s in [0, 3, 1, 2, 0] {
            w.push(&samples[s]).unwrap();
        }
        for u in induced_inputs(&spec, &w).unwrap() {
            assert_eq!(u.len(), w.len());
        }
    }

    #[test]
    fn feedback_wires_read_the_pre_step_output() {
        let spec = crossed_product();
        let samples = spec.input_pins.all_samples();
        let w = Trace::from_samples(&spec.input_pins, &[samples[0].clone()]).unwrap();
        let induced = induced_inputs(&spec, &w).unwrap();
        // Factor 0 pin 2 must carry factor 1's initial output (high).
        let c0 = induced[0].sample(0);
        assert_eq!(c0.level(&PinId::new("2")).unwrap(), Level::High);
    }

    #[test]
    fn theorem1_holds_on_the_crossed_pair() {
        let spec = crossed_product();
        let verdict = theorem1_check(&spec, 5, 50, 20, 0).unwrap();
        assert!(verdict.is_pass(), "{verdict}");
    }

    #[test]
    fn feedback_detection() {
        assert!(is_feedback_free(&identity_product()).unwrap());
        assert!(!is_feedback_free(&crossed_product()).unwrap());
    }

    #[test]
    fn undriven_pins_are_rejected() {
        let mut spec = crossed_product();
        spec.wiring = ConnectionMap::new();
        let err = compose(&spec).unwrap_err();
        assert!(matches!(err, Error::SpecInvalid(msg) if msg.contains("undriven")));
    }

    #[test]
    fn double_driving_is_rejected() {
        let mut wiring = ConnectionMap::new();
        wiring
            .wire(0, PinId::new("1"), WireSource::External(PinId::new("a")))
            .unwrap();
        let err = wiring
            .wire(0, PinId::new("1"), WireSource::External(PinId::new("b")))
            .unwrap_err();
        assert!(matches!(err, Error::SpecInvalid(msg) if msg.contains("more than once")));
    }

    #[test]
    fn bad_factor_references_are_rejected() {
        let mut spec = identity_product();
        spec.wiring
            .wire(
                0,
                PinId::new("2"),
                WireSource::Factor {
                    index: 7,
                    pin: PinId::new("out"),
                },
            )
            .unwrap_err();
        // A fresh map with an out-of-range factor index.
        let mut wiring = ConnectionMap::new();
        wiring
            .wire(
                5,
                PinId::new("1"),
                WireSource::External(PinId::new("1")),
            )
            .unwrap();
        spec.wiring = wiring;
        assert!(compose(&spec).is_err());
    }
}
