use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest pin set a single machine may declare. Levels of one sample are
/// packed into a `u32` bit per pin.
pub const MAX_PINS: usize = 32;

/// A binary signal level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Low,
    High,
}

impl Level {
    pub fn bit(self) -> u32 {
        match self {
            Level::Low => 0,
            Level::High => 1,
        }
    }

    pub fn from_bool(high: bool) -> Level {
        if high {
            Level::High
        } else {
            Level::Low
        }
    }

    pub fn is_high(self) -> bool {
        self == Level::High
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// Name of an input or output pin. Names are non-empty `[A-Za-z0-9_]+` tokens
/// and are unique within one machine's input set and output set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PinId(Arc<str>);

impl PinId {
    /// Validating constructor for externally supplied names.
    pub fn try_new(name: &str) -> Result<PinId> {
        if name.is_empty() || !name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
            return Err(Error::InvalidPinName(name.to_string()));
        }
        Ok(PinId(Arc::from(name)))
    }

    /// Constructor for names known to be valid tokens; panics otherwise.
    pub fn new(name: &str) -> PinId {
        PinId::try_new(name).expect("invalid pin name")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An immutable, lexicographically sorted set of pins. Cheap to clone; the
/// sorted order fixes the canonical enumeration order of samples and the bit
/// layout of [`Sample`] and [`OutputVector`].
#[derive(Debug, Clone)]
pub struct PinSet(Arc<Vec<PinId>>);

impl PinSet {
    pub fn new(pins: impl IntoIterator<Item = PinId>) -> Result<PinSet> {
        let mut names: Vec<PinId> = pins.into_iter().collect();
        names.sort();
        for pair in names.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicatePin(pair[0].clone()));
            }
        }
        if names.len() > MAX_PINS {
            return Err(Error::TooManyPins(MAX_PINS));
        }
        Ok(PinSet(Arc::new(names)))
    }

    /// Convenience constructor from name literals.
    pub fn of(names: &[&str]) -> PinSet {
        PinSet::new(names.iter().map(|n| PinId::new(n))).expect("invalid pin set")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PinId> {
        self.0.iter()
    }

    pub fn get(&self, index: usize) -> &PinId {
        &self.0[index]
    }

    /// Index of `pin` in sorted order, if present.
    pub fn position(&self, pin: &PinId) -> Option<usize> {
        self.0.binary_search(pin).ok()
    }

    pub fn contains(&self, pin: &PinId) -> bool {
        self.position(pin).is_some()
    }

    /// All `2^n` samples over this pin set in canonical order: the first pin
    /// in sorted order varies slowest, and level 0 precedes level 1.
    pub fn all_samples(&self) -> Vec<Sample> {
        let n = self.len();
        (0..(1u64 << n))
            .map(|index| Sample {
                pins: self.clone(),
                bits: Self::index_to_bits(index as u32, n),
            })
            .collect()
    }

    /// Position of `sample` in the canonical enumeration.
    pub fn sample_index(&self, sample: &Sample) -> u32 {
        let n = self.len();
        let mut index = 0;
        for i in 0..n {
            index = (index << 1) | ((sample.bits >> i) & 1);
        }
        index
    }

    fn index_to_bits(index: u32, n: usize) -> u32 {
        let mut bits = 0;
        for i in 0..n {
            if (index >> (n - 1 - i)) & 1 == 1 {
                bits |= 1 << i;
            }
        }
        bits
    }

    fn describe(&self) -> String {
        let names: Vec<&str> = self.0.iter().map(|p| p.as_str()).collect();
        names.join(",")
    }

    /// Error helper: `PinMismatch` describing both sets.
    pub(crate) fn mismatch(&self, other: &PinSet) -> Error {
        Error::PinMismatch {
            expected: self.describe(),
            got: other.describe(),
        }
    }
}

impl PartialEq for PinSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for PinSet {}

impl std::hash::Hash for PinSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

/// One time step's total assignment of levels to a pin set. Levels are packed
/// one bit per pin in sorted pin order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sample {
    pins: PinSet,
    bits: u32,
}

impl Sample {
    /// Build a sample by assigning a level to every pin.
    pub fn build(pins: &PinSet, mut level_of: impl FnMut(&PinId) -> Level) -> Sample {
        let mut bits = 0;
        for (i, pin) in pins.iter().enumerate() {
            bits |= level_of(pin).bit() << i;
        }
        Sample {
            pins: pins.clone(),
            bits,
        }
    }

    /// Build a sample from `(name, level)` pairs covering the pin set exactly.
    pub fn from_pairs(pins: &PinSet, pairs: &[(&str, Level)]) -> Result<Sample> {
        let mut bits = 0u32;
        let mut seen = 0u32;
        for (name, level) in pairs {
            let pin = PinId::try_new(name)?;
            let idx = pins
                .position(&pin)
                .ok_or_else(|| Error::UnknownPin(pin.clone()))?;
            seen |= 1 << idx;
            bits |= level.bit() << idx;
        }
        if seen != Sample::full_mask(pins.len()) {
            let given = PinSet::new(pairs.iter().map(|(n, _)| PinId::new(n)))?;
            return Err(pins.mismatch(&given));
        }
        Ok(Sample {
            pins: pins.clone(),
            bits,
        })
    }

    pub(crate) fn from_bits(pins: &PinSet, bits: u32) -> Sample {
        debug_assert_eq!(bits & !Sample::full_mask(pins.len()), 0);
        Sample {
            pins: pins.clone(),
            bits,
        }
    }

    fn full_mask(n: usize) -> u32 {
        ((1u64 << n) - 1) as u32
    }

    pub fn pins(&self) -> &PinSet {
        &self.pins
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn level(&self, pin: &PinId) -> Result<Level> {
        let idx = self
            .pins
            .position(pin)
            .ok_or_else(|| Error::UnknownPin(pin.clone()))?;
        Ok(self.level_at(idx))
    }

    pub fn level_at(&self, index: usize) -> Level {
        Level::from_bool((self.bits >> index) & 1 == 1)
    }
}

impl fmt::Display for Sample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, pin) in self.pins.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}={}", pin, self.level_at(i))?;
        }
        Ok(())
    }
}

/// Total assignment of levels to a machine's output pins; same layout rules
/// as [`Sample`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutputVector {
    pins: PinSet,
    bits: u32,
}

impl OutputVector {
    pub fn build(pins: &PinSet, mut level_of: impl FnMut(&PinId) -> Level) -> OutputVector {
        let mut bits = 0;
        for (i, pin) in pins.iter().enumerate() {
            bits |= level_of(pin).bit() << i;
        }
        OutputVector {
            pins: pins.clone(),
            bits,
        }
    }

    pub fn from_bits(pins: &PinSet, bits: u32) -> OutputVector {
        debug_assert_eq!(bits & !Sample::full_mask(pins.len()), 0);
        OutputVector {
            pins: pins.clone(),
            bits,
        }
    }

    /// Single-pin vector; the common case for gates.
    pub fn single(pin: &PinId, level: Level) -> OutputVector {
        let pins = PinSet::new([pin.clone()]).expect("single pin");
        OutputVector {
            pins,
            bits: level.bit(),
        }
    }

    pub fn pins(&self) -> &PinSet {
        &self.pins
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn level(&self, pin: &PinId) -> Result<Level> {
        let idx = self
            .pins
            .position(pin)
            .ok_or_else(|| Error::UnknownPin(pin.clone()))?;
        Ok(self.level_at(idx))
    }

    pub fn level_at(&self, index: usize) -> Level {
        Level::from_bool((self.bits >> index) & 1 == 1)
    }

    /// The level of the only pin; panics unless the vector has exactly one.
    pub fn sole(&self) -> Level {
        assert_eq!(self.pins.len(), 1, "output vector has more than one pin");
        self.level_at(0)
    }
}

impl fmt::Display for OutputVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, pin) in self.pins.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}={}", pin, self.level_at(i))?;
        }
        Ok(())
    }
}
