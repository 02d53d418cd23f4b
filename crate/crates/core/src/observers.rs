//! Recursive counters and predicates over traces and output sequences: step
//! counts, per-pin hold times, input/output stability, the latch condition,
//! and the unsigned decoder for bit vectors.
//!
//! Every counter exists in two forms that must agree: a pure function over a
//! whole trace, and an incremental tracker carrying one value per step so
//! exhaustive checks run in constant memory per step.

use crate::error::{Error, Result};
use crate::machine::{Level, OutputVector, PinId, PinRun, PinSet, Sample, Trace};

/// Which pin and level a hold count refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoldQuery {
    pub pin: PinId,
    pub level: Level,
}

/// Fixed-width vector of levels; index 1 is the lowest-order bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVector {
    bits: Vec<Level>,
}

impl BitVector {
    pub fn new(bits: Vec<Level>) -> BitVector {
        assert!(!bits.is_empty(), "bit vectors have length at least 1");
        BitVector { bits }
    }

    pub fn from_bits(bits: &[u32]) -> BitVector {
        BitVector::new(bits.iter().map(|b| Level::from_bool(*b != 0)).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 1-based projection.
    pub fn get(&self, index: usize) -> Level {
        self.bits[index - 1]
    }
}

/// Number of samples in `w`.
pub fn time(w: &Trace) -> u64 {
    w.len() as u64
}

/// How many consecutive trailing samples keep `pin` high.
pub fn high(w: &Trace, pin: &PinId) -> Result<u64> {
    hold(
        w,
        &HoldQuery {
            pin: pin.clone(),
            level: Level::High,
        },
    )
}

/// How many consecutive trailing samples hold `q.pin` at `q.level`.
pub fn hold(w: &Trace, q: &HoldQuery) -> Result<u64> {
    let idx = w
        .pins()
        .position(&q.pin)
        .ok_or_else(|| Error::UnknownPin(q.pin.clone()))?;
    let mut count = 0;
    for bits in w.step_bits().iter().rev() {
        if Level::from_bool((bits >> idx) & 1 == 1) == q.level {
            count += 1;
        } else {
            break;
        }
    }
    Ok(count)
}

/// How many trailing adjacent pairs of `outputs` are equal. Index 0 of the
/// sequence is the output at Λ, so a singleton sequence yields 0.
pub fn stable_output(outputs: &[OutputVector]) -> u64 {
    assert!(!outputs.is_empty(), "output sequences include the Λ output");
    let mut count = 0;
    for pair in outputs.windows(2).rev() {
        if pair[0] == pair[1] {
            count += 1;
        } else {
            break;
        }
    }
    count
}

/// Per-pin form of [`stable_output`]: stability of one projected output pin.
pub fn stable_output_pin(outputs: &[OutputVector], pin: &PinId) -> Result<u64> {
    assert!(!outputs.is_empty(), "output sequences include the Λ output");
    let idx = outputs[0]
        .pins()
        .position(pin)
        .ok_or_else(|| Error::UnknownPin(pin.clone()))?;
    let mut count = 0;
    for pair in outputs.windows(2).rev() {
        if pair[0].level_at(idx) == pair[1].level_at(idx) {
            count += 1;
        } else {
            break;
        }
    }
    Ok(count)
}

/// The final sample of a non-empty trace.
pub fn last(w: &Trace) -> Result<Sample> {
    w.last().ok_or(Error::EmptyTrace)
}

/// How many trailing adjacent pairs of samples are equal; both Λ and
/// one-sample traces yield 0.
pub fn stable(w: &Trace) -> u64 {
    let mut count = 0;
    for pair in w.step_bits().windows(2).rev() {
        if pair[0] == pair[1] {
            count += 1;
        } else {
            break;
        }
    }
    count
}

/// The stored-bit condition for an SR latch over pins `set`/`reset`:
/// 1 when the inputs have demanded bit `b` for `t_latch` steps, or when both
/// inputs are high and the condition held for the prefix; else 0.
pub fn latched(w: &Trace, b: Level, t_latch: u64) -> Result<Level> {
    let set = PinId::new("set");
    let reset = PinId::new("reset");
    if !w.pins().contains(&set) {
        return Err(Error::UnknownPin(set));
    }
    if !w.pins().contains(&reset) {
        return Err(Error::UnknownPin(reset));
    }
    let mut tracker = LatchedTracker::new(w.pins(), b, t_latch)?;
    let mut value = Level::Low;
    for sample in w.samples() {
        value = tracker.update(&sample);
    }
    Ok(value)
}

/// `Σ bits[i] · 2^(i-1)`: index 1 is least significant.
pub fn unsigned(v: &BitVector) -> u64 {
    v.bits
        .iter()
        .enumerate()
        .map(|(i, b)| (b.bit() as u64) << i)
        .sum()
}

/// Incremental hold counter for one pin: one `(level, run)` pair per step.
#[derive(Debug, Clone, Copy)]
pub struct HoldTracker {
    pin_index: usize,
    run: PinRun,
}

impl HoldTracker {
    pub fn new(pins: &PinSet, pin: &PinId) -> Result<HoldTracker> {
        let pin_index = pins
            .position(pin)
            .ok_or_else(|| Error::UnknownPin(pin.clone()))?;
        Ok(HoldTracker {
            pin_index,
            run: PinRun::fresh(),
        })
    }

    pub fn update(&mut self, sample: &Sample) {
        self.run = self.run.advance(sample.level_at(self.pin_index), u32::MAX);
    }

    pub fn hold(&self, level: Level) -> u64 {
        self.run.hold(level) as u64
    }
}

/// Incremental input-stability counter.
#[derive(Debug, Clone, Copy, Default)]
pub struct StableTracker {
    last_bits: Option<u32>,
    count: u64,
}

impl StableTracker {
    pub fn new() -> StableTracker {
        StableTracker::default()
    }

    pub fn update(&mut self, sample: &Sample) {
        let bits = sample.bits();
        self.count = match self.last_bits {
            Some(prev) if prev == bits => self.count + 1,
            _ => 0,
        };
        self.last_bits = Some(bits);
    }

    pub fn stable(&self) -> u64 {
        self.count
    }
}

/// Incremental output-stability counter over packed output bits; feed it the
/// Λ output first.
#[derive(Debug, Clone, Copy, Default)]
pub struct OutputStabilityTracker {
    last_bits: Option<u32>,
    count: u64,
}

impl OutputStabilityTracker {
    pub fn new() -> OutputStabilityTracker {
        OutputStabilityTracker::default()
    }

    pub fn update(&mut self, bits: u32) {
        self.count = match self.last_bits {
            Some(prev) if prev == bits => self.count + 1,
            _ => 0,
        };
        self.last_bits = Some(bits);
    }

    pub fn stable(&self) -> u64 {
        self.count
    }
}

/// Incremental form of [`latched`].
#[derive(Debug, Clone, Copy)]
pub struct LatchedTracker {
    b: Level,
    t_latch: u64,
    set_index: usize,
    reset_index: usize,
    set: PinRun,
    reset: PinRun,
    latched: bool,
}

impl LatchedTracker {
    pub fn new(pins: &PinSet, b: Level, t_latch: u64) -> Result<LatchedTracker> {
        assert!(t_latch >= 1, "latch delays are at least 1");
        let set_pin = PinId::new("set");
        let reset_pin = PinId::new("reset");
        let set_index = pins
            .position(&set_pin)
            .ok_or(Error::UnknownPin(set_pin))?;
        let reset_index = pins
            .position(&reset_pin)
            .ok_or(Error::UnknownPin(reset_pin))?;
        Ok(LatchedTracker {
            b,
            t_latch,
            set_index,
            reset_index,
            set: PinRun::fresh(),
            reset: PinRun::fresh(),
            latched: false,
        })
    }

    pub fn update(&mut self, sample: &Sample) -> Level {
        let set_level = sample.level_at(self.set_index);
        let reset_level = sample.level_at(self.reset_index);
        let cap = u32::MAX;
        self.set = self.set.advance(set_level, cap);
        self.reset = self.reset.advance(reset_level, cap);

        let t = self.t_latch;
        let driven = match self.b {
            Level::High => {
                self.reset.hold(Level::Low) as u64 >= t && self.set.hold(Level::High) as u64 >= t
            }
            Level::Low => {
                self.reset.hold(Level::High) as u64 >= t && self.set.hold(Level::Low) as u64 >= t
            }
        };
        let held_through = set_level.is_high() && reset_level.is_high() && self.latched;
        self.latched = driven || held_through;
        self.value()
    }

    pub fn value(&self) -> Level {
        Level::from_bool(self.latched)
    }

    pub fn is_latched(&self) -> bool {
        self.latched
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sr_pins() -> PinSet {
        PinSet::of(&["set", "reset"])
    }

    fn sr_sample(set: u32, reset: u32) -> Sample {
        Sample::from_pairs(
            &sr_pins(),
            &[
                ("set", Level::from_bool(set != 0)),
                ("reset", Level::from_bool(reset != 0)),
            ],
        )
        .unwrap()
    }

    fn one_pin_trace(levels: &[u32]) -> Trace {
        let pins = PinSet::of(&["p"]);
        let mut w = Trace::empty(&pins);
        for l in levels {
            w.push(&Sample::build(&pins, |_| Level::from_bool(*l != 0)))
                .unwrap();
        }
        w
    }

    #[test]
    fn time_counts_samples() {
        let w = one_pin_trace(&[1, 0, 1, 1, 0]);
        assert_eq!(time(&w), 5);
        assert_eq!(time(&Trace::empty(&PinSet::of(&["p"]))), 0);
    }

    #[test]
    fn high_counts_trailing_ones() {
        let p = PinId::new("p");
        assert_eq!(high(&one_pin_trace(&[]), &p).unwrap(), 0);
        assert_eq!(high(&one_pin_trace(&[1, 1, 0]), &p).unwrap(), 0);
        assert_eq!(high(&one_pin_trace(&[0, 1, 1]), &p).unwrap(), 2);
    }

    #[test]
    fn hold_counts_either_level() {
        let q0 = HoldQuery {
            pin: PinId::new("p"),
            level: Level::Low,
        };
        assert_eq!(hold(&one_pin_trace(&[]), &q0).unwrap(), 0);
        assert_eq!(hold(&one_pin_trace(&[1, 1, 0]), &q0).unwrap(), 1);
        let unknown = HoldQuery {
            pin: PinId::new("zz"),
            level: Level::Low,
        };
        assert!(matches!(
            hold(&one_pin_trace(&[1]), &unknown),
            Err(Error::UnknownPin(_))
        ));
    }

    fn out(level: u32) -> OutputVector {
        OutputVector::single(&PinId::new("y"), Level::from_bool(level != 0))
    }

    #[test]
    fn output_stability_counts_trailing_equal_pairs() {
        assert_eq!(stable_output(&[out(1)]), 0);
        assert_eq!(stable_output(&[out(1), out(1), out(1)]), 2);
        assert_eq!(stable_output(&[out(1), out(0), out(0)]), 1);
    }

    #[test]
    fn last_of_empty_trace_is_an_error() {
        let w = one_pin_trace(&[]);
        assert_eq!(last(&w), Err(Error::EmptyTrace));
        let w = one_pin_trace(&[0, 1]);
        assert_eq!(last(&w).unwrap().level_at(0), Level::High);
    }

    #[test]
    fn stable_counts_trailing_equal_samples() {
        assert_eq!(stable(&one_pin_trace(&[])), 0);
        assert_eq!(stable(&one_pin_trace(&[1])), 0);
        assert_eq!(stable(&one_pin_trace(&[1, 1, 1])), 2);
        assert_eq!(stable(&one_pin_trace(&[0, 1])), 0);
    }

    #[test]
    fn latched_fires_after_a_full_hold() {
        let pins = sr_pins();
        let mut w = Trace::empty(&pins);
        assert_eq!(latched(&w, Level::High, 3).unwrap(), Level::Low);
        w.extend_held(&sr_sample(1, 0), 3).unwrap();
        assert_eq!(latched(&w, Level::High, 3).unwrap(), Level::High);
        assert_eq!(latched(&w, Level::Low, 3).unwrap(), Level::Low);
        // Both inputs high keep the stored bit latched.
        w.push(&sr_sample(1, 1)).unwrap();
        assert_eq!(latched(&w, Level::High, 3).unwrap(), Level::High);
        // Dropping set releases the condition.
        w.push(&sr_sample(0, 0)).unwrap();
        assert_eq!(latched(&w, Level::High, 3).unwrap(), Level::Low);
    }

    #[test]
    fn unsigned_decodes_low_index_first() {
        assert_eq!(unsigned(&BitVector::from_bits(&[0, 0, 0])), 0);
        assert_eq!(unsigned(&BitVector::from_bits(&[1, 0, 1])), 5);
        assert_eq!(unsigned(&BitVector::from_bits(&[1, 1])), 3);
    }
}
