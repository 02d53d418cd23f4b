//! The bounded decision procedures for the timing claims: the gate stability
//! lemma, the latch delay claim, the adder stability lemma, and the settled
//! ripple-adder identity.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use smallvec::SmallVec;

use crate::checker::nondet::{adversarial_nand, NondetNode, NondetProduct};
use crate::circuits::{make_ripple_adder, make_sr_latch, star_equality};
use crate::exhaustive::{self, Branches, Choice, Walk};
use crate::gates::{
    allowed_for_runs, fresh_runs, make_adder_bit, make_nand, AdderParams, GateParams,
    TransientPolicy,
};
use crate::machine::{Level, PinId, PinRun, PinSet, Sample, State, Trace, Transducer};
use crate::observers::{LatchedTracker, OutputStabilityTracker, StableTracker};
use crate::verdict::{Counterexample, Verdict};

/// Default ceiling on explored (trace, choice) leaves for branching checks.
pub const DEFAULT_BUDGET: u64 = 500_000_000;

const GATE_INITIALS: [Level; 2] = [Level::Low, Level::High];

/// Checks the hold-to-stability lemma on a two-pin NAND with delay `t`:
/// holding any pin low for `t + k + j` steps keeps the output stable for at
/// least `j` steps, stated as `#N(w) ≥ H(w,p,0) − (t+k)` for every pin and
/// every trace up to `depth`. Under the adversarial policy every permitted
/// output choice is explored; under hold-last both initial outputs are.
pub fn check_stability_lemma(t: u32, k: u64, depth: usize, policy: TransientPolicy) -> Verdict {
    let pins = PinSet::of(&["1", "2"]);
    match policy {
        TransientPolicy::HoldLast => {
            let walk = StabilityHoldLastWalk::new(&pins, t, k);
            exhaustive::explore(&walk, &pins, depth, u64::MAX)
        }
        TransientPolicy::Adversarial => {
            let walk = StabilityAdversarialWalk { t, k, pins: pins.clone() };
            exhaustive::explore(&walk, &pins, depth, DEFAULT_BUDGET)
        }
    }
}

/// Replays a counterexample from [`check_stability_lemma`].
pub fn replay_stability_lemma(
    t: u32,
    k: u64,
    policy: TransientPolicy,
    ce: &Counterexample,
) -> bool {
    let pins = PinSet::of(&["1", "2"]);
    match policy {
        TransientPolicy::HoldLast => {
            let walk = StabilityHoldLastWalk::new(&pins, t, k);
            exhaustive::replay_counterexample(&walk, ce).unwrap_or(false)
        }
        TransientPolicy::Adversarial => {
            let walk = StabilityAdversarialWalk { t, k, pins };
            exhaustive::replay_counterexample(&walk, ce).unwrap_or(false)
        }
    }
}

#[derive(Clone)]
struct StabilityNode {
    state: State,
    holds: SmallVec<[PinRun; 4]>,
    out_stab: OutputStabilityTracker,
}

struct StabilityHoldLastWalk {
    machines: Vec<Transducer>,
    t: u32,
    k: u64,
}

impl StabilityHoldLastWalk {
    fn new(pins: &PinSet, t: u32, k: u64) -> StabilityHoldLastWalk {
        let machines = GATE_INITIALS
            .iter()
            .map(|init| make_nand(&GateParams::new(pins.clone(), t, *init)))
            .collect();
        StabilityHoldLastWalk { machines, t, k }
    }
}

fn stability_violated(node: &StabilityNode, t: u32, k: u64) -> bool {
    let slack = t as u64 + k;
    node.holds
        .iter()
        .any(|r| (r.hold(Level::Low) as u64).saturating_sub(slack) > node.out_stab.stable())
}

impl Walk for StabilityHoldLastWalk {
    type Node = (usize, StabilityNode);

    fn roots(&self) -> Vec<(Self::Node, Choice)> {
        self.machines
            .iter()
            .enumerate()
            .map(|(which, m)| {
                let state = m.initial_state();
                let mut out_stab = OutputStabilityTracker::new();
                out_stab.update(m.output_bits(&state));
                (
                    (
                        which,
                        StabilityNode {
                            state,
                            holds: fresh_runs(m.input_pins().len()),
                            out_stab,
                        },
                    ),
                    Choice::from_slice(&[which as u32]),
                )
            })
            .collect()
    }

    fn expand(&self, node: &Self::Node, sample: &Sample) -> Branches<Self::Node> {
        let (which, node) = node;
        let m = &self.machines[*which];
        let state = m.step(&node.state, sample);
        let mut holds = node.holds.clone();
        for (i, r) in holds.iter_mut().enumerate() {
            *r = r.advance(sample.level_at(i), u32::MAX);
        }
        let mut out_stab = node.out_stab;
        out_stab.update(m.output_bits(&state));
        let mut out = Branches::new();
        out.push((
            (
                *which,
                StabilityNode {
                    state,
                    holds,
                    out_stab,
                },
            ),
            Choice::new(),
        ));
        out
    }

    fn violated(&self, node: &Self::Node) -> bool {
        stability_violated(&node.1, self.t, self.k)
    }
}

struct StabilityAdversarialWalk {
    t: u32,
    k: u64,
    pins: PinSet,
}

#[derive(Clone)]
struct StabilityAdvNode {
    holds: SmallVec<[PinRun; 4]>,
    out_stab: OutputStabilityTracker,
}

impl Walk for StabilityAdversarialWalk {
    type Node = StabilityAdvNode;

    fn roots(&self) -> Vec<(Self::Node, Choice)> {
        GATE_INITIALS
            .iter()
            .map(|init| {
                let mut out_stab = OutputStabilityTracker::new();
                out_stab.update(init.bit());
                (
                    StabilityAdvNode {
                        holds: fresh_runs(self.pins.len()),
                        out_stab,
                    },
                    Choice::from_slice(&[init.bit()]),
                )
            })
            .collect()
    }

    fn expand(&self, node: &Self::Node, sample: &Sample) -> Branches<Self::Node> {
        let mut holds = node.holds.clone();
        for (i, r) in holds.iter_mut().enumerate() {
            *r = r.advance(sample.level_at(i), u32::MAX);
        }
        allowed_for_runs(&holds, self.t)
            .levels()
            .map(|level| {
                let mut out_stab = node.out_stab;
                out_stab.update(level.bit());
                (
                    StabilityAdvNode {
                        holds: holds.clone(),
                        out_stab,
                    },
                    Choice::from_slice(&[level.bit()]),
                )
            })
            .collect()
    }

    fn violated(&self, node: &Self::Node) -> bool {
        let slack = self.t as u64 + self.k;
        node.holds
            .iter()
            .any(|r| (r.hold(Level::Low) as u64).saturating_sub(slack) > node.out_stab.stable())
    }
}

/// Verdicts for the latch delay claim: the claim itself (latched for
/// `3t + 2` steps forces the stored bit) and the probe one step tighter.
#[derive(Debug, Clone)]
pub struct LatchClaimOutcome {
    pub claim: Verdict,
    pub tightness: Verdict,
}

/// Decides the latch delay claim for gate delay `t` over all traces of
/// length `3t + 2 + slack`. Under hold-last every gate initialization pair
/// is covered; under the adversarial policy both gates may emit any
/// permitted output, with feedback carrying the chosen values.
pub fn check_latch_claim(
    t: u32,
    slack: usize,
    policy: TransientPolicy,
    budget: u64,
) -> LatchClaimOutcome {
    let t_latch = 3 * t as u64 + 2;
    let depth = t_latch as usize + slack;
    LatchClaimOutcome {
        claim: check_latch_claim_at(t, t_latch, depth, policy, budget),
        tightness: check_latch_claim_at(t, t_latch - 1, depth, policy, budget),
    }
}

/// The generalized latch check: latched(w, b, `t_latch`) = 1 must force the
/// q output to `b`, for every trace up to `depth`.
pub fn check_latch_claim_at(
    t: u32,
    t_latch: u64,
    depth: usize,
    policy: TransientPolicy,
    budget: u64,
) -> Verdict {
    let pins = PinSet::of(&["set", "reset"]);
    match policy {
        TransientPolicy::HoldLast => {
            let walk = LatchHoldLastWalk::new(t, t_latch, &pins);
            exhaustive::explore(&walk, &pins, depth, budget)
        }
        TransientPolicy::Adversarial => {
            let walk = LatchAdversarialWalk::new(t, t_latch, &pins);
            exhaustive::explore(&walk, &pins, depth, budget)
        }
    }
}

/// Replays a counterexample from [`check_latch_claim_at`].
pub fn replay_latch_claim(
    t: u32,
    t_latch: u64,
    policy: TransientPolicy,
    ce: &Counterexample,
) -> bool {
    let pins = PinSet::of(&["set", "reset"]);
    match policy {
        TransientPolicy::HoldLast => {
            let walk = LatchHoldLastWalk::new(t, t_latch, &pins);
            exhaustive::replay_counterexample(&walk, ce).unwrap_or(false)
        }
        TransientPolicy::Adversarial => {
            let walk = LatchAdversarialWalk::new(t, t_latch, &pins);
            exhaustive::replay_counterexample(&walk, ce).unwrap_or(false)
        }
    }
}

const INITIAL_PAIRS: [(Level, Level); 4] = [
    (Level::Low, Level::Low),
    (Level::Low, Level::High),
    (Level::High, Level::Low),
    (Level::High, Level::High),
];

struct LatchHoldLastWalk {
    machines: Vec<Transducer>,
    t_latch: u64,
    pins: PinSet,
}

#[derive(Clone)]
struct LatchNode<S> {
    state: S,
    latched: [LatchedTracker; 2],
}

impl LatchHoldLastWalk {
    fn new(t: u32, t_latch: u64, pins: &PinSet) -> LatchHoldLastWalk {
        let machines = INITIAL_PAIRS
            .iter()
            .map(|inits| {
                make_sr_latch(t, *inits)
                    .composite()
                    .expect("latch spec is valid")
            })
            .collect();
        LatchHoldLastWalk {
            machines,
            t_latch,
            pins: pins.clone(),
        }
    }

    fn trackers(&self) -> [LatchedTracker; 2] {
        [
            LatchedTracker::new(&self.pins, Level::Low, self.t_latch).unwrap(),
            LatchedTracker::new(&self.pins, Level::High, self.t_latch).unwrap(),
        ]
    }
}

/// The q output sits at bit 0 of the latch composite (pins sorted q, qbar).
fn latch_violated(latched: &[LatchedTracker; 2], q_bit: u32) -> bool {
    (latched[0].is_latched() && q_bit != 0) || (latched[1].is_latched() && q_bit != 1)
}

impl Walk for LatchHoldLastWalk {
    type Node = (usize, LatchNode<State>);

    fn roots(&self) -> Vec<(Self::Node, Choice)> {
        self.machines
            .iter()
            .enumerate()
            .map(|(which, m)| {
                (
                    (
                        which,
                        LatchNode {
                            state: m.initial_state(),
                            latched: self.trackers(),
                        },
                    ),
                    Choice::from_slice(&[
                        INITIAL_PAIRS[which].0.bit(),
                        INITIAL_PAIRS[which].1.bit(),
                    ]),
                )
            })
            .collect()
    }

    fn expand(&self, node: &Self::Node, sample: &Sample) -> Branches<Self::Node> {
        let (which, node) = node;
        let m = &self.machines[*which];
        let state = m.step(&node.state, sample);
        let mut latched = node.latched;
        latched[0].update(sample);
        latched[1].update(sample);
        let mut out = Branches::new();
        out.push(((*which, LatchNode { state, latched }), Choice::new()));
        out
    }

    fn violated(&self, node: &Self::Node) -> bool {
        let (which, node) = node;
        let q_bit = self.machines[*which].output_bits(&node.state) & 1;
        latch_violated(&node.latched, q_bit)
    }
}

struct LatchAdversarialWalk {
    product: NondetProduct,
    t_latch: u64,
    pins: PinSet,
}

impl LatchAdversarialWalk {
    fn new(t: u32, t_latch: u64, pins: &PinSet) -> LatchAdversarialWalk {
        let shape = make_sr_latch(t, (Level::High, Level::Low));
        let gate_pins = PinSet::of(&["1", "2"]);
        let parts = vec![
            adversarial_nand(&gate_pins, t),
            adversarial_nand(&gate_pins, t),
        ];
        let product =
            NondetProduct::from_spec_shape(&shape.spec, parts).expect("latch spec is valid");
        LatchAdversarialWalk {
            product,
            t_latch,
            pins: pins.clone(),
        }
    }

    fn trackers(&self) -> [LatchedTracker; 2] {
        [
            LatchedTracker::new(&self.pins, Level::Low, self.t_latch).unwrap(),
            LatchedTracker::new(&self.pins, Level::High, self.t_latch).unwrap(),
        ]
    }
}

impl Walk for LatchAdversarialWalk {
    type Node = LatchNode<NondetNode>;

    fn roots(&self) -> Vec<(Self::Node, Choice)> {
        self.product
            .roots()
            .into_iter()
            .map(|state| {
                let choice = Choice::from_slice(&state.chosen);
                (
                    LatchNode {
                        state,
                        latched: self.trackers(),
                    },
                    choice,
                )
            })
            .collect()
    }

    fn expand(&self, node: &Self::Node, sample: &Sample) -> Branches<Self::Node> {
        let mut latched = node.latched;
        latched[0].update(sample);
        latched[1].update(sample);
        self.product
            .expand(&node.state, sample)
            .into_iter()
            .map(|state| {
                let choice = Choice::from_slice(&state.chosen);
                (LatchNode { state, latched }, choice)
            })
            .collect()
    }

    fn violated(&self, node: &Self::Node) -> bool {
        let q_bit = self.product.output_bits(&node.state) & 1;
        latch_violated(&node.latched, q_bit)
    }
}

/// Checks the adder stability lemma on a delay-`t` single-bit adder: inputs
/// stable for `t + k` steps force both outputs stable for `k` steps, on
/// every trace up to `depth` and from every initial output pair.
pub fn check_adder_lemma(t: u32, k: u64, depth: usize) -> Verdict {
    let walk = AdderLemmaWalk::new(t, k);
    let pins = walk.machines[0].input_pins().clone();
    exhaustive::explore(&walk, &pins, depth, u64::MAX)
}

/// Replays a counterexample from [`check_adder_lemma`].
pub fn replay_adder_lemma(t: u32, k: u64, ce: &Counterexample) -> bool {
    let walk = AdderLemmaWalk::new(t, k);
    exhaustive::replay_counterexample(&walk, ce).unwrap_or(false)
}

struct AdderLemmaWalk {
    machines: Vec<Transducer>,
    t: u32,
    k: u64,
}

#[derive(Clone)]
struct AdderNode {
    state: State,
    stable: StableTracker,
    // Output pins sorted: carry_out at bit 0, sum at bit 1.
    carry_stab: OutputStabilityTracker,
    sum_stab: OutputStabilityTracker,
}

impl AdderLemmaWalk {
    fn new(t: u32, k: u64) -> AdderLemmaWalk {
        let machines = INITIAL_PAIRS
            .iter()
            .map(|(sum, carry)| make_adder_bit(&AdderParams::new(t, *sum, *carry)))
            .collect();
        AdderLemmaWalk { machines, t, k }
    }
}

impl Walk for AdderLemmaWalk {
    type Node = (usize, AdderNode);

    fn roots(&self) -> Vec<(Self::Node, Choice)> {
        self.machines
            .iter()
            .enumerate()
            .map(|(which, m)| {
                let state = m.initial_state();
                let bits = m.output_bits(&state);
                let mut carry_stab = OutputStabilityTracker::new();
                carry_stab.update(bits & 1);
                let mut sum_stab = OutputStabilityTracker::new();
                sum_stab.update((bits >> 1) & 1);
                (
                    (
                        which,
                        AdderNode {
                            state,
                            stable: StableTracker::new(),
                            carry_stab,
                            sum_stab,
                        },
                    ),
                    Choice::from_slice(&[
                        INITIAL_PAIRS[which].0.bit(),
                        INITIAL_PAIRS[which].1.bit(),
                    ]),
                )
            })
            .collect()
    }

    fn expand(&self, node: &Self::Node, sample: &Sample) -> Branches<Self::Node> {
        let (which, node) = node;
        let m = &self.machines[*which];
        let state = m.step(&node.state, sample);
        let bits = m.output_bits(&state);
        let mut stable = node.stable;
        stable.update(sample);
        let mut carry_stab = node.carry_stab;
        carry_stab.update(bits & 1);
        let mut sum_stab = node.sum_stab;
        sum_stab.update((bits >> 1) & 1);
        let mut out = Branches::new();
        out.push((
            (
                *which,
                AdderNode {
                    state,
                    stable,
                    carry_stab,
                    sum_stab,
                },
            ),
            Choice::new(),
        ));
        out
    }

    fn violated(&self, node: &Self::Node) -> bool {
        let node = &node.1;
        node.stable.stable() >= self.t as u64 + self.k
            && (node.sum_stab.stable() < self.k || node.carry_stab.stable() < self.k)
    }
}

/// Exhausts every input assignment of an `n`-bit delay-`t` ripple adder:
/// after a random prefix of length up to `prefix_len`, holding the
/// assignment `n·t + n` steps must satisfy the settled-adder identity.
/// One prefix per trial, drawn deterministically from `seed`.
pub fn check_ripple_star(
    n: usize,
    t: u32,
    prefix_len: usize,
    trials: usize,
    seed: u64,
) -> Verdict {
    let ripple = make_ripple_adder(n, t, &vec![(Level::Low, Level::Low); n]);
    let machine = ripple.composite().expect("ripple spec is valid");
    let pins = ripple.input_pins().clone();
    let samples = pins.all_samples();
    let hold_steps = n * t as usize + n;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut explored = 0u64;

    for assignment in &samples {
        for _ in 0..trials.max(1) {
            let prefix = if prefix_len == 0 {
                0
            } else {
                rng.gen_range(0..=prefix_len)
            };
            let mut bits = Vec::with_capacity(prefix + hold_steps);
            let mut state = machine.initial_state();
            for _ in 0..prefix {
                let s = &samples[rng.gen_range(0..samples.len())];
                bits.push(s.bits());
                state = machine.step(&state, s);
            }
            for _ in 0..hold_steps {
                bits.push(assignment.bits());
                state = machine.step(&state, assignment);
            }
            explored += 1;
            let out = machine.output(&state);
            if !star_equality(n, assignment, &out).unwrap_or(false) {
                let trace = Trace::from_bits(&pins, bits);
                return Verdict::fail(Counterexample::plain(trace), explored);
            }
        }
    }
    Verdict::pass(explored)
}

/// Replays a counterexample from [`check_ripple_star`]: re-evaluates the
/// trace and reports whether the identity still fails at its end.
pub fn replay_ripple_star(n: usize, t: u32, ce: &Counterexample) -> bool {
    let ripple = make_ripple_adder(n, t, &vec![(Level::Low, Level::Low); n]);
    let Ok(machine) = ripple.composite() else {
        return false;
    };
    let Some(last) = ce.trace.last() else {
        return false;
    };
    let Ok(out) = machine.eval(&ce.trace) else {
        return false;
    };
    !star_equality(n, &last, &out).unwrap_or(true)
}

/// Probe for the one-step interconnect offset on a two-bit chain: the first
/// adder's settled carry shows up at the second adder's input exactly one
/// step later.
pub fn carry_offset_probe(t: u32) -> bool {
    let ripple = make_ripple_adder(2, t, &[(Level::Low, Level::Low); 2]);
    let pins = ripple.input_pins().clone();
    // v1 = 1, v2 = 1: bit 1 produces a carry once settled.
    let sample = Sample::build(&pins, |p| {
        Level::from_bool(matches!(p.as_str(), "v1_1" | "v2_1"))
    });
    let t = t as usize;
    let mut w = Trace::empty(&pins);
    let induced_at = |w: &Trace| {
        crate::product::induced_inputs(&ripple.spec, w)
            .unwrap()
            .remove(1)
    };
    // After t steps the first adder's carry settles high; the second factor
    // still sees the old level for exactly one more step.
    w.extend_held(&sample, t).unwrap();
    let u2 = induced_at(&w);
    let carry_pin = PinId::new("carry_in");
    if u2.sample(t - 1).level(&carry_pin).unwrap() != Level::Low {
        return false;
    }
    w.extend_held(&sample, 1).unwrap();
    let u2 = induced_at(&w);
    u2.sample(t).level(&carry_pin).unwrap() == Level::High
}
