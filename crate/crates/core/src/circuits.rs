//! Constructed devices: the cross-coupled SR latch, a seven-input NAND built
//! from three gates, and the n-bit ripple-carry adder, each as a wire-only
//! product of the component machines.

use crate::error::{Error, Result};
use crate::gates::{make_adder_bit, make_nand, AdderParams, GateParams};
use crate::machine::{Level, OutputVector, PinId, PinSet, Sample, Trace, Transducer};
use crate::observers;
use crate::product::{compose, ConnectionMap, OutputSelection, ProductSpec, WireSource};

/// Cross-coupled NAND latch over pins `set`/`reset` with outputs `q`/`qbar`.
#[derive(Debug, Clone)]
pub struct LatchSpec {
    pub base_delay_t: u32,
    pub gate_initials: (Level, Level),
    pub spec: ProductSpec,
}

/// Builds the SR latch: gate 0 drives `q` from (`reset`, feedback of gate 1),
/// gate 1 drives `qbar` from (`set`, feedback of gate 0).
pub fn make_sr_latch(t: u32, gate_initials: (Level, Level)) -> LatchSpec {
    assert!(t >= 1, "propagation delay must be positive");
    let n1 = make_nand(&GateParams::canonical(t, gate_initials.0));
    let n2 = make_nand(&GateParams::canonical(t, gate_initials.1));
    let out = PinId::new("out");

    let mut wiring = ConnectionMap::new();
    wiring
        .wire(0, PinId::new("1"), WireSource::External(PinId::new("reset")))
        .unwrap();
    wiring
        .wire(
            0,
            PinId::new("2"),
            WireSource::Factor {
                index: 1,
                pin: out.clone(),
            },
        )
        .unwrap();
    wiring
        .wire(1, PinId::new("1"), WireSource::External(PinId::new("set")))
        .unwrap();
    wiring
        .wire(
            1,
            PinId::new("2"),
            WireSource::Factor {
                index: 0,
                pin: out.clone(),
            },
        )
        .unwrap();

    let mut exposure = OutputSelection::new();
    exposure.expose(PinId::new("q"), 0, out.clone()).unwrap();
    exposure.expose(PinId::new("qbar"), 1, out).unwrap();

    LatchSpec {
        base_delay_t: t,
        gate_initials,
        spec: ProductSpec {
            factors: vec![n1, n2],
            wiring,
            exposure,
            input_pins: PinSet::of(&["set", "reset"]),
        },
    }
}

impl LatchSpec {
    pub fn composite(&self) -> Result<Transducer> {
        compose(&self.spec)
    }
}

/// Single-output machine projecting the latch's `q` pin.
pub fn latch_q(latch: &LatchSpec) -> Result<Transducer> {
    let mut spec = latch.spec.clone();
    let mut exposure = OutputSelection::new();
    exposure.expose(PinId::new("q"), 0, PinId::new("out"))?;
    spec.exposure = exposure;
    compose(&spec)
}

/// A seven-input gate from three NANDs with delay `t`: two first-level gates
/// cover input pins 1–3 and 4–6, and the third combines pin 7 with both
/// first-level outputs. Feedback-free by construction.
pub fn make_nand7(t: u32, initials: (Level, Level, Level)) -> ProductSpec {
    assert!(t >= 1, "propagation delay must be positive");
    let pins3 = PinSet::of(&["1", "2", "3"]);
    let factors = vec![
        make_nand(&GateParams::new(pins3.clone(), t, initials.0)),
        make_nand(&GateParams::new(pins3.clone(), t, initials.1)),
        make_nand(&GateParams::new(pins3, t, initials.2)),
    ];
    let out = PinId::new("out");

    let mut wiring = ConnectionMap::new();
    for (pin, ext) in [("1", "1"), ("2", "2"), ("3", "3")] {
        wiring
            .wire(0, PinId::new(pin), WireSource::External(PinId::new(ext)))
            .unwrap();
    }
    for (pin, ext) in [("1", "4"), ("2", "5"), ("3", "6")] {
        wiring
            .wire(1, PinId::new(pin), WireSource::External(PinId::new(ext)))
            .unwrap();
    }
    wiring
        .wire(2, PinId::new("1"), WireSource::External(PinId::new("7")))
        .unwrap();
    wiring
        .wire(
            2,
            PinId::new("2"),
            WireSource::Factor {
                index: 0,
                pin: out.clone(),
            },
        )
        .unwrap();
    wiring
        .wire(
            2,
            PinId::new("3"),
            WireSource::Factor {
                index: 1,
                pin: out.clone(),
            },
        )
        .unwrap();

    let mut exposure = OutputSelection::new();
    exposure.expose(out.clone(), 2, out).unwrap();

    ProductSpec {
        factors,
        wiring,
        exposure,
        input_pins: PinSet::of(&["1", "2", "3", "4", "5", "6", "7"]),
    }
}

/// Chain of single-bit adders: carries ripple forward, value bits arrive
/// externally, outputs are the per-bit sums plus the final carry.
#[derive(Debug, Clone)]
pub struct RippleSpec {
    pub n_bits: usize,
    pub bit_delay_t: u32,
    pub spec: ProductSpec,
}

impl RippleSpec {
    pub fn composite(&self) -> Result<Transducer> {
        compose(&self.spec)
    }

    pub fn input_pins(&self) -> &PinSet {
        &self.spec.input_pins
    }
}

/// Builds the n-bit ripple-carry adder from delay-`t` single-bit adders with
/// the given per-bit initial (sum, carry) outputs.
pub fn make_ripple_adder(n: usize, t: u32, initials: &[(Level, Level)]) -> RippleSpec {
    assert!(n >= 1, "adders have at least one bit");
    assert_eq!(initials.len(), n, "one initial output pair per bit");
    let factors: Vec<Transducer> = initials
        .iter()
        .map(|(sum, carry)| make_adder_bit(&AdderParams::new(t, *sum, *carry)))
        .collect();

    let mut input_names = vec![PinId::new("carry_in")];
    for i in 1..=n {
        input_names.push(PinId::new(&format!("v1_{i}")));
        input_names.push(PinId::new(&format!("v2_{i}")));
    }
    let inputs = PinSet::new(input_names).unwrap();

    let mut wiring = ConnectionMap::new();
    wiring
        .wire(
            0,
            PinId::new("carry_in"),
            WireSource::External(PinId::new("carry_in")),
        )
        .unwrap();
    for i in 1..n {
        wiring
            .wire(
                i,
                PinId::new("carry_in"),
                WireSource::Factor {
                    index: i - 1,
                    pin: PinId::new("carry_out"),
                },
            )
            .unwrap();
    }
    for i in 0..n {
        wiring
            .wire(
                i,
                PinId::new("v1"),
                WireSource::External(PinId::new(&format!("v1_{}", i + 1))),
            )
            .unwrap();
        wiring
            .wire(
                i,
                PinId::new("v2"),
                WireSource::External(PinId::new(&format!("v2_{}", i + 1))),
            )
            .unwrap();
    }

    let mut exposure = OutputSelection::new();
    for i in 0..n {
        exposure
            .expose(PinId::new(&format!("r_{}", i + 1)), i, PinId::new("sum"))
            .unwrap();
    }
    exposure
        .expose(PinId::new("carry_out"), n - 1, PinId::new("carry_out"))
        .unwrap();

    RippleSpec {
        n_bits: n,
        bit_delay_t: t,
        spec: ProductSpec {
            factors,
            wiring,
            exposure,
            input_pins: inputs,
        },
    }
}

/// The integer identity an n-bit adder must satisfy once settled: the carry
/// input plus both decoded addends equals the decoded result plus the
/// weighted carry output. `last` is the most recent input sample, `out` the
/// composite output vector.
pub fn star_equality(n: usize, last: &Sample, out: &OutputVector) -> Result<bool> {
    let carry = last.level(&PinId::new("carry_in"))?.bit() as u64;
    let mut in1 = carry;
    let mut in2 = 0u64;
    for i in 1..=n {
        let v1 = last.level(&PinId::new(&format!("v1_{i}")))?.bit() as u64;
        let v2 = last.level(&PinId::new(&format!("v2_{i}")))?.bit() as u64;
        in1 += v1 << (i - 1);
        in2 += v2 << (i - 1);
    }
    let mut result = 0u64;
    for i in 1..=n {
        let r = out.level(&PinId::new(&format!("r_{i}")))?.bit() as u64;
        result += r << (i - 1);
    }
    result += (out.level(&PinId::new("carry_out"))?.bit() as u64) << n;
    Ok(in1 + in2 == result)
}

/// Evaluates the settled-adder identity on `w`: decodes the last sample and
/// the composite's output after `w`. Callers are responsible for having held
/// the inputs long enough; on shorter traces the identity may simply be
/// false.
pub fn adder_star_property(ripple: &RippleSpec, w: &Trace) -> Result<bool> {
    if w.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let last = observers::last(w)?;
    let out = ripple.composite()?.eval(w)?;
    star_equality(ripple.n_bits, &last, &out)
}
