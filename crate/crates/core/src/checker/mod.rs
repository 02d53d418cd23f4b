//! Bounded universal verification: exhaustive trace enumeration with minimal
//! counterexamples, and adversarial branching over every machine the gate
//! constraints permit.

mod nondet;
mod ops;
mod property;

pub use nondet::{adversarial_nand, NondetMachine, NondetNode, NondetProduct};
pub use ops::{
    carry_offset_probe, check_adder_lemma, check_latch_claim, check_latch_claim_at,
    check_ripple_star, check_stability_lemma, replay_adder_lemma, replay_latch_claim,
    replay_ripple_star, replay_stability_lemma, LatchClaimOutcome, DEFAULT_BUDGET,
};
pub use property::{check_universal, replay_universal, Condition, Consequent, Property};
