use std::fmt;

use crate::error::Result;
use crate::machine::pins::{PinSet, Sample};

/// A finite sequence of samples over one pin set; the empty trace is the
/// distinguished Λ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trace {
    pins: PinSet,
    steps: Vec<u32>,
}

impl Trace {
    /// The empty trace Λ over `pins`.
    pub fn empty(pins: &PinSet) -> Trace {
        Trace {
            pins: pins.clone(),
            steps: Vec::new(),
        }
    }

    pub fn from_samples(pins: &PinSet, samples: &[Sample]) -> Result<Trace> {
        let mut trace = Trace::empty(pins);
        for sample in samples {
            trace.push(sample)?;
        }
        Ok(trace)
    }

    pub(crate) fn from_bits(pins: &PinSet, steps: Vec<u32>) -> Trace {
        Trace {
            pins: pins.clone(),
            steps,
        }
    }

    pub fn push(&mut self, sample: &Sample) -> Result<()> {
        if sample.pins() != &self.pins {
            return Err(self.pins.mismatch(sample.pins()));
        }
        self.steps.push(sample.bits());
        Ok(())
    }

    /// Appends `sample` held for `count` steps.
    pub fn extend_held(&mut self, sample: &Sample, count: usize) -> Result<()> {
        for _ in 0..count {
            self.push(sample)?;
        }
        Ok(())
    }

    pub fn pins(&self) -> &PinSet {
        &self.pins
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn sample(&self, index: usize) -> Sample {
        Sample::from_bits(&self.pins, self.steps[index])
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        self.steps.iter().map(|b| Sample::from_bits(&self.pins, *b))
    }

    pub fn last(&self) -> Option<Sample> {
        self.steps.last().map(|b| Sample::from_bits(&self.pins, *b))
    }

    /// The prefix containing the first `len` samples.
    pub fn prefix(&self, len: usize) -> Trace {
        Trace {
            pins: self.pins.clone(),
            steps: self.steps[..len].to_vec(),
        }
    }

    /// Concatenation `self ∘ other`.
    pub fn concat(&self, other: &Trace) -> Result<Trace> {
        if other.pins != self.pins {
            return Err(self.pins.mismatch(&other.pins));
        }
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Ok(Trace {
            pins: self.pins.clone(),
            steps,
        })
    }

    pub(crate) fn step_bits(&self) -> &[u32] {
        &self.steps
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "Λ");
        }
        for (i, sample) in self.samples().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}", sample)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::pins::Level;

    #[test]
    fn push_rejects_foreign_pin_sets() {
        let pins = PinSet::of(&["a", "b"]);
        let other = PinSet::of(&["a", "c"]);
        let mut trace = Trace::empty(&pins);
        let sample = Sample::build(&other, |_| Level::Low);
        assert!(trace.push(&sample).is_err());
    }

    #[test]
    fn concat_adds_lengths() {
        let pins = PinSet::of(&["a"]);
        let s = Sample::build(&pins, |_| Level::High);
        let mut w = Trace::empty(&pins);
        w.extend_held(&s, 2).unwrap();
        let mut z = Trace::empty(&pins);
        z.extend_held(&s, 3).unwrap();
        assert_eq!(w.concat(&z).unwrap().len(), 5);
    }
}
