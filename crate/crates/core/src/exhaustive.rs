//! Depth-bounded exhaustive exploration of trace trees.
//!
//! Traces are enumerated shortest first and, within one length, in canonical
//! sample order, so the first violation reported is the minimal one.
//! Exploration of one length is partitioned by (root, first sample) across
//! workers; workers own their evaluation state and results merge in unit
//! order, which keeps verdicts deterministic.

use rayon::prelude::*;
use smallvec::SmallVec;

use crate::machine::{PinSet, Sample, Trace};
use crate::verdict::{Counterexample, Verdict};

/// Output bits chosen for each branching machine at one step; empty for
/// deterministic steps.
pub(crate) type Choice = SmallVec<[u32; 2]>;

pub(crate) type Branches<N> = SmallVec<[(N, Choice); 4]>;

/// One bounded property check over a trace tree.
pub(crate) trait Walk: Sync {
    type Node: Clone + Send + Sync;

    /// The nodes reached by Λ, labeled with the choice that selects each.
    /// Deterministic checks have exactly one root with an empty choice.
    fn roots(&self) -> Vec<(Self::Node, Choice)>;

    /// All successors of `node` under `sample`, one per permitted output
    /// choice.
    fn expand(&self, node: &Self::Node, sample: &Sample) -> Branches<Self::Node>;

    /// Whether the checked property is violated at `node`.
    fn violated(&self, node: &Self::Node) -> bool;
}

struct Found {
    path: Vec<u32>,
    choices: Vec<Choice>,
}

enum UnitOutcome {
    Clean,
    Violation(Found),
    BudgetHit,
}

/// Explores all traces of length ≤ `depth` over `pins`. `budget` caps the
/// number of leaf (trace, choice) combinations visited.
pub(crate) fn explore<W: Walk>(walk: &W, pins: &PinSet, depth: usize, budget: u64) -> Verdict {
    let samples = pins.all_samples();
    let roots = walk.roots();
    let mut explored = 0u64;

    // Length 0: the roots themselves.
    for (root, choice) in &roots {
        explored += 1;
        if walk.violated(root) {
            return Verdict::fail(
                Counterexample {
                    trace: Trace::empty(pins),
                    choices: vec![choice.to_vec()],
                },
                explored,
            );
        }
    }
    if explored > budget {
        return Verdict::budget(explored);
    }

    for target in 1..=depth {
        let units: Vec<(usize, usize)> = (0..roots.len())
            .flat_map(|r| (0..samples.len()).map(move |a| (r, a)))
            .collect();
        let outcomes: Vec<(u64, UnitOutcome)> = units
            .par_iter()
            .map(|(r, a)| {
                let (root, root_choice) = &roots[*r];
                let mut count = 0u64;
                let mut path = vec![samples[*a].bits()];
                let mut choices = vec![root_choice.clone()];
                let mut outcome = UnitOutcome::Clean;
                for (child, choice) in walk.expand(root, &samples[*a]) {
                    choices.push(choice);
                    let found = dfs(
                        walk,
                        &samples,
                        &child,
                        target - 1,
                        &mut path,
                        &mut choices,
                        &mut count,
                        budget,
                    );
                    choices.pop();
                    match found {
                        Dfs::Clean => {}
                        Dfs::Violation(f) => {
                            outcome = UnitOutcome::Violation(f);
                            break;
                        }
                        Dfs::BudgetHit => {
                            outcome = UnitOutcome::BudgetHit;
                            break;
                        }
                    }
                }
                let _ = path.pop();
                (count, outcome)
            })
            .collect();

        let mut level_found: Option<Found> = None;
        let mut budget_hit = false;
        for (count, outcome) in outcomes {
            explored += count;
            match outcome {
                UnitOutcome::Clean => {}
                UnitOutcome::Violation(f) => {
                    if level_found.is_none() && !budget_hit {
                        level_found = Some(f);
                    }
                }
                UnitOutcome::BudgetHit => {
                    if level_found.is_none() {
                        budget_hit = true;
                    }
                }
            }
        }
        if budget_hit {
            return Verdict::budget(explored);
        }
        if let Some(found) = level_found {
            return Verdict::fail(
                Counterexample {
                    trace: Trace::from_bits(pins, found.path),
                    choices: found.choices.iter().map(|c| c.to_vec()).collect(),
                },
                explored,
            );
        }
        if explored > budget {
            return Verdict::budget(explored);
        }
    }
    Verdict::pass(explored)
}

enum Dfs {
    Clean,
    Violation(Found),
    BudgetHit,
}

#[allow(clippy::too_many_arguments)]
fn dfs<W: Walk>(
    walk: &W,
    samples: &[Sample],
    node: &W::Node,
    remaining: usize,
    path: &mut Vec<u32>,
    choices: &mut Vec<Choice>,
    count: &mut u64,
    budget: u64,
) -> Dfs {
    if remaining == 0 {
        *count += 1;
        if *count > budget {
            return Dfs::BudgetHit;
        }
        if walk.violated(node) {
            return Dfs::Violation(Found {
                path: path.clone(),
                choices: choices.clone(),
            });
        }
        return Dfs::Clean;
    }
    for sample in samples {
        path.push(sample.bits());
        for (child, choice) in walk.expand(node, sample) {
            choices.push(choice);
            let result = dfs(walk, samples, &child, remaining - 1, path, choices, count, budget);
            choices.pop();
            if !matches!(result, Dfs::Clean) {
                path.pop();
                return result;
            }
        }
        path.pop();
    }
    Dfs::Clean
}

/// Re-runs a recorded counterexample: follows the trace picking the recorded
/// choice at each step and reports whether the final node still violates the
/// property. `None` means the record does not match the walk.
pub(crate) fn replay<W: Walk>(
    walk: &W,
    trace: &Trace,
    choices: &[Choice],
) -> Option<bool> {
    if choices.len() != trace.len() + 1 {
        return None;
    }
    let mut node = walk
        .roots()
        .into_iter()
        .find(|(_, c)| *c == choices[0])
        .map(|(n, _)| n)?;
    for (i, sample) in trace.samples().enumerate() {
        node = walk
            .expand(&node, &sample)
            .into_iter()
            .find(|(_, c)| *c == choices[i + 1])
            .map(|(n, _)| n)?;
    }
    Some(walk.violated(&node))
}

/// Replay for verdicts produced by [`explore`].
pub(crate) fn replay_counterexample<W: Walk>(walk: &W, ce: &Counterexample) -> Option<bool> {
    let choices: Vec<Choice> = ce.choices.iter().map(|c| Choice::from_slice(c)).collect();
    replay(walk, &ce.trace, &choices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Level;

    /// Fails exactly on the trace [1, 0] (pin `p` high then low).
    struct TwoStepWalk;

    impl Walk for TwoStepWalk {
        type Node = (u32, u32, usize);

        fn roots(&self) -> Vec<(Self::Node, Choice)> {
            vec![((9, 9, 0), Choice::new())]
        }

        fn expand(&self, node: &Self::Node, sample: &Sample) -> Branches<Self::Node> {
            let mut out = Branches::new();
            out.push(((node.1, sample.bits(), node.2 + 1), Choice::new()));
            out
        }

        fn violated(&self, node: &Self::Node) -> bool {
            node.0 == 1 && node.1 == 0
        }
    }

    #[test]
    fn finds_the_shortest_lexicographic_violation() {
        let pins = PinSet::of(&["p"]);
        let verdict = explore(&TwoStepWalk, &pins, 4, u64::MAX);
        let ce = verdict.counterexample.expect("violation exists");
        let bits: Vec<u32> = ce.trace.samples().map(|s| s.bits()).collect();
        assert_eq!(bits, vec![1, 0]);
        assert_eq!(ce.choices.len(), 3);
        assert_eq!(
            replay_counterexample(&TwoStepWalk, &ce),
            Some(true),
            "replay reproduces the violation"
        );
    }

    #[test]
    fn pass_counts_every_trace() {
        struct Clean;
        impl Walk for Clean {
            type Node = ();
            fn roots(&self) -> Vec<((), Choice)> {
                vec![((), Choice::new())]
            }
            fn expand(&self, _: &(), _: &Sample) -> Branches<()> {
                let mut out = Branches::new();
                out.push(((), Choice::new()));
                out
            }
            fn violated(&self, _: &()) -> bool {
                false
            }
        }
        let pins = PinSet::of(&["a", "b"]);
        let verdict = explore(&Clean, &pins, 3, u64::MAX);
        assert!(verdict.is_pass());
        // Σ_{d=0..3} 4^d
        assert_eq!(verdict.traces_explored, 1 + 4 + 16 + 64);
    }

    #[test]
    fn budget_is_reported() {
        struct Branchy;
        impl Walk for Branchy {
            type Node = ();
            fn roots(&self) -> Vec<((), Choice)> {
                vec![((), Choice::new())]
            }
            fn expand(&self, _: &(), _: &Sample) -> Branches<()> {
                let mut out = Branches::new();
                out.push(((), Choice::from_slice(&[0])));
                out.push(((), Choice::from_slice(&[1])));
                out
            }
            fn violated(&self, _: &()) -> bool {
                false
            }
        }
        let pins = PinSet::of(&["a"]);
        let verdict = explore(&Branchy, &pins, 20, 1000);
        assert_eq!(verdict.status, crate::verdict::Status::Budget);
    }

    #[test]
    fn violations_use_level_order_before_lexicographic_order() {
        // Violations exist at length 2 ([1,0]) and also at [0,0,...]? No —
        // make a walk violating only at the longer [0, 0, 0] and at [1].
        struct Mixed;
        impl Walk for Mixed {
            type Node = Vec<u32>;
            fn roots(&self) -> Vec<(Vec<u32>, Choice)> {
                vec![(Vec::new(), Choice::new())]
            }
            fn expand(&self, node: &Vec<u32>, sample: &Sample) -> Branches<Vec<u32>> {
                let mut next = node.clone();
                next.push(sample.bits());
                let mut out = Branches::new();
                out.push((next, Choice::new()));
                out
            }
            fn violated(&self, node: &Vec<u32>) -> bool {
                node.as_slice() == [0, 0, 0] || node.as_slice() == [1]
            }
        }
        let pins = PinSet::of(&["a"]);
        let verdict = explore(&Mixed, &pins, 5, u64::MAX);
        let ce = verdict.counterexample.unwrap();
        assert_eq!(ce.trace.len(), 1, "the length-1 violation wins");
    }
}
