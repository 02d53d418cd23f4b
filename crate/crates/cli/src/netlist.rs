//! JSON netlist ingestion: schema, validation, and elaboration down to a
//! wire-only product of primitive machines.
//!
//! A document has top-level keys `name`, `inputs`, `outputs`, `instances`,
//! and `wires` (plus an optional `library` of sub-netlists). Wire sinks are
//! either `instance.pin` or a bare netlist output name; wire sources are a
//! bare netlist input name or `instance.pin`. Composite builtin kinds and
//! sub-netlist references are flattened during elaboration, so structure
//! queries (feedback, minimization, monoids) see the primitive gates.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use serde_json::Value;

use moorekit::circuits::{make_nand7, make_ripple_adder, make_sr_latch};
use moorekit::gates::{make_adder_bit, make_nand, make_or, AdderParams, GateParams};
use moorekit::product::{ConnectionMap, OutputSelection, ProductSpec, WireSource};
use moorekit::{Level, PinId, PinSet, Transducer};

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetlistDoc {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub instances: Vec<InstanceDoc>,
    pub wires: Vec<WireDoc>,
    #[serde(default)]
    pub library: Vec<NetlistDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub name: String,
    pub kind: String,
    #[serde(default)]
    pub params: serde_json::Map<String, Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireDoc {
    pub to: String,
    pub from: String,
}

/// A validated netlist with its elaborated product.
pub struct Netlist {
    pub name: String,
    /// Input pins in declaration order, used for stimulus and report
    /// columns.
    pub inputs: Vec<PinId>,
    /// Output pins in declaration order, used for waveform id assignment.
    pub outputs: Vec<PinId>,
    pub instance_count: usize,
    pub spec: ProductSpec,
}

impl Netlist {
    pub fn composite(&self) -> Result<Transducer, CliError> {
        Ok(moorekit::product::compose(&self.spec)?)
    }
}

/// Parses and validates a netlist document.
pub fn parse_netlist(text: &str) -> Result<Netlist, CliError> {
    let doc: NetlistDoc = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    elaborate(&doc)
}

fn pin(name: &str, context: &str) -> Result<PinId, CliError> {
    PinId::try_new(name)
        .map_err(|_| CliError::Validation(format!("{context}: invalid name `{name}`")))
}

/// One instance's expansion: primitive factors plus how its pins map onto
/// them.
struct Fragment {
    factors: Vec<Transducer>,
    /// Internal wires between the fragment's own factors.
    internal: Vec<((usize, PinId), (usize, PinId))>,
    /// Instance input pin → all factor inputs it drives.
    inputs: BTreeMap<PinId, Vec<(usize, PinId)>>,
    /// Instance output pin → producing factor output.
    outputs: BTreeMap<PinId, (usize, PinId)>,
}

fn fragment_from_spec(spec: &ProductSpec) -> Fragment {
    let mut fragment = Fragment {
        factors: spec.factors.clone(),
        internal: Vec::new(),
        inputs: spec
            .input_pins
            .iter()
            .map(|p| (p.clone(), Vec::new()))
            .collect(),
        outputs: BTreeMap::new(),
    };
    for ((factor, pin), source) in spec.wiring.iter() {
        match source {
            WireSource::External(ext) => fragment
                .inputs
                .get_mut(ext)
                .expect("spec inputs are total")
                .push((*factor, pin.clone())),
            WireSource::Factor { index, pin: from } => fragment
                .internal
                .push(((*factor, pin.clone()), (*index, from.clone()))),
        }
    }
    for (out, (factor, pin)) in spec.exposure.iter() {
        fragment.outputs.insert(out.clone(), (*factor, pin.clone()));
    }
    fragment
}

fn single_gate_fragment(gate: Transducer) -> Fragment {
    Fragment {
        inputs: gate
            .input_pins()
            .iter()
            .map(|p| (p.clone(), vec![(0, p.clone())]))
            .collect(),
        outputs: gate
            .output_pins()
            .iter()
            .map(|p| (p.clone(), (0, p.clone())))
            .collect(),
        internal: Vec::new(),
        factors: vec![gate],
    }
}

struct Params<'a> {
    instance: &'a str,
    map: &'a serde_json::Map<String, Value>,
}

impl Params<'_> {
    fn count(&self, key: &str, default: u64, min: u64, max: u64) -> Result<u64, CliError> {
        let value = match self.map.get(key) {
            None => default,
            Some(Value::Number(n)) => n.as_u64().ok_or_else(|| self.bad(key))?,
            Some(_) => return Err(self.bad(key)),
        };
        if value < min || value > max {
            return Err(CliError::Validation(format!(
                "instance `{}`: parameter `{key}` must be in {min}..={max}",
                self.instance
            )));
        }
        Ok(value)
    }

    fn level(&self, key: &str, default: Level) -> Result<Level, CliError> {
        match self.map.get(key) {
            None => Ok(default),
            Some(Value::Number(n)) => match n.as_u64() {
                Some(0) => Ok(Level::Low),
                Some(1) => Ok(Level::High),
                _ => Err(self.bad(key)),
            },
            Some(_) => Err(self.bad(key)),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>, CliError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.bad(key)),
        }
    }

    fn known(&self, keys: &[&str]) -> Result<(), CliError> {
        for key in self.map.keys() {
            if !keys.contains(&key.as_str()) {
                return Err(CliError::Validation(format!(
                    "instance `{}`: unknown parameter `{key}`",
                    self.instance
                )));
            }
        }
        Ok(())
    }

    fn bad(&self, key: &str) -> CliError {
        CliError::Validation(format!(
            "instance `{}`: invalid value for parameter `{key}`",
            self.instance
        ))
    }
}

fn level_list(params: &Params, key: &str, len: usize) -> Result<Option<Vec<Level>>, CliError> {
    match params.map.get(key) {
        None => Ok(None),
        Some(Value::Array(items)) if items.len() == len => items
            .iter()
            .map(|v| match v.as_u64() {
                Some(0) => Ok(Level::Low),
                Some(1) => Ok(Level::High),
                _ => Err(params.bad(key)),
            })
            .collect::<Result<Vec<Level>, CliError>>()
            .map(Some),
        Some(_) => Err(params.bad(key)),
    }
}

fn expand_instance(inst: &InstanceDoc, library: &BTreeMap<String, Netlist>) -> Result<Fragment, CliError> {
    let params = Params {
        instance: &inst.name,
        map: &inst.params,
    };
    match inst.kind.as_str() {
        "nand" | "or" => {
            params.known(&["t", "pins", "initial"])?;
            let t = params.count("t", 1, 1, 64)? as u32;
            let n_pins = params.count("pins", 2, 1, 16)?;
            let names: Vec<PinId> = (1..=n_pins).map(|i| PinId::new(&i.to_string())).collect();
            let pins = PinSet::new(names).map_err(|e| CliError::Validation(e.to_string()))?;
            let gate = if inst.kind == "nand" {
                let initial = params.level("initial", Level::High)?;
                make_nand(&GateParams::new(pins, t, initial))
            } else {
                let initial = params.level("initial", Level::Low)?;
                make_or(&GateParams::new(pins, t, initial))
            };
            Ok(single_gate_fragment(gate))
        }
        "adder_bit" => {
            params.known(&["t", "initial_sum", "initial_carry"])?;
            let t = params.count("t", 1, 1, 64)? as u32;
            let sum = params.level("initial_sum", Level::Low)?;
            let carry = params.level("initial_carry", Level::Low)?;
            Ok(single_gate_fragment(make_adder_bit(&AdderParams::new(
                t, sum, carry,
            ))))
        }
        "sr_latch" => {
            params.known(&["t", "q0", "qbar0"])?;
            let t = params.count("t", 1, 1, 64)? as u32;
            let q0 = params.level("q0", Level::High)?;
            let qbar0 = params.level("qbar0", Level::Low)?;
            Ok(fragment_from_spec(&make_sr_latch(t, (q0, qbar0)).spec))
        }
        "nand7" => {
            params.known(&["t", "initials"])?;
            let t = params.count("t", 1, 1, 64)? as u32;
            let initials = level_list(&params, "initials", 3)?
                .unwrap_or(vec![Level::High; 3]);
            Ok(fragment_from_spec(&make_nand7(
                t,
                (initials[0], initials[1], initials[2]),
            )))
        }
        "ripple_adder" => {
            params.known(&["n", "t", "initials"])?;
            let n = params.count("n", 1, 1, 15)? as usize;
            let t = params.count("t", 1, 1, 64)? as u32;
            let flat = level_list(&params, "initials", 2 * n)?;
            let initials: Vec<(Level, Level)> = match flat {
                None => vec![(Level::Low, Level::Low); n],
                Some(levels) => levels.chunks(2).map(|c| (c[0], c[1])).collect(),
            };
            Ok(fragment_from_spec(&make_ripple_adder(n, t, &initials).spec))
        }
        "netlist" => {
            let name = params.string("ref")?.ok_or_else(|| {
                CliError::Validation(format!(
                    "instance `{}`: sub-netlist instances need a `ref` parameter",
                    inst.name
                ))
            })?;
            params.known(&["ref"])?;
            let sub = library.get(name).ok_or_else(|| {
                CliError::Validation(format!(
                    "instance `{}`: unknown sub-netlist `{name}`",
                    inst.name
                ))
            })?;
            Ok(fragment_from_spec(&sub.spec))
        }
        other => Err(CliError::Validation(format!(
            "instance `{}`: unknown component kind `{other}`",
            inst.name
        ))),
    }
}

fn elaborate(doc: &NetlistDoc) -> Result<Netlist, CliError> {
    // Library entries may reference only earlier entries; this rules out
    // reference cycles.
    let mut library: BTreeMap<String, Netlist> = BTreeMap::new();
    for entry in &doc.library {
        if !entry.library.is_empty() {
            return Err(CliError::Validation(format!(
                "sub-netlist `{}`: nested libraries are not supported",
                entry.name
            )));
        }
        let netlist = elaborate_with(entry, &library)?;
        if library.insert(entry.name.clone(), netlist).is_some() {
            return Err(CliError::Validation(format!(
                "duplicate library netlist `{}`",
                entry.name
            )));
        }
    }
    elaborate_with(doc, &library)
}

fn elaborate_with(
    doc: &NetlistDoc,
    library: &BTreeMap<String, Netlist>,
) -> Result<Netlist, CliError> {
    pin(&doc.name, "netlist name")?;
    let inputs: Vec<PinId> = doc
        .inputs
        .iter()
        .map(|n| pin(n, "inputs"))
        .collect::<Result<_, _>>()?;
    let outputs: Vec<PinId> = doc
        .outputs
        .iter()
        .map(|n| pin(n, "outputs"))
        .collect::<Result<_, _>>()?;
    let input_pins = PinSet::new(inputs.iter().cloned())
        .map_err(|e| CliError::Validation(format!("inputs: {e}")))?;
    let output_set: BTreeSet<&PinId> = outputs.iter().collect();
    if output_set.len() != outputs.len() {
        return Err(CliError::Validation("duplicate output pin".into()));
    }
    for out in &outputs {
        if input_pins.contains(out) {
            return Err(CliError::Validation(format!(
                "pin `{out}` is declared both input and output"
            )));
        }
    }

    // Expand instances.
    let mut fragments = Vec::new();
    let mut instance_index: BTreeMap<String, usize> = BTreeMap::new();
    for inst in &doc.instances {
        pin(&inst.name, "instance name")?;
        if instance_index.contains_key(&inst.name) {
            return Err(CliError::Validation(format!(
                "duplicate instance name `{}`",
                inst.name
            )));
        }
        instance_index.insert(inst.name.clone(), fragments.len());
        fragments.push(expand_instance(inst, library)?);
    }

    // Global factor numbering.
    let mut offsets = Vec::with_capacity(fragments.len());
    let mut factors = Vec::new();
    for fragment in &fragments {
        offsets.push(factors.len());
        factors.extend(fragment.factors.iter().cloned());
    }

    let mut wiring = ConnectionMap::new();
    for (f, fragment) in fragments.iter().enumerate() {
        for ((to_factor, to_pin), (from_factor, from_pin)) in &fragment.internal {
            wiring
                .wire(
                    offsets[f] + to_factor,
                    to_pin.clone(),
                    WireSource::Factor {
                        index: offsets[f] + from_factor,
                        pin: from_pin.clone(),
                    },
                )
                .map_err(|e| CliError::Validation(e.to_string()))?;
        }
    }

    // Resolve document wires.
    let mut exposure = OutputSelection::new();
    let mut driven_outputs: BTreeSet<PinId> = BTreeSet::new();
    let resolve_source = |from: &str| -> Result<WireSource, CliError> {
        match from.split_once('.') {
            None => {
                let p = pin(from, "wire source")?;
                if !input_pins.contains(&p) {
                    return Err(CliError::Validation(format!(
                        "wire source `{from}` is not a netlist input"
                    )));
                }
                Ok(WireSource::External(p))
            }
            Some((inst, out_pin)) => {
                let f = *instance_index.get(inst).ok_or_else(|| {
                    CliError::Validation(format!("wire source references unknown instance `{inst}`"))
                })?;
                let p = pin(out_pin, "wire source")?;
                let (factor, factor_pin) = fragments[f].outputs.get(&p).ok_or_else(|| {
                    CliError::Validation(format!(
                        "instance `{inst}` has no output pin `{out_pin}`"
                    ))
                })?;
                Ok(WireSource::Factor {
                    index: offsets[f] + factor,
                    pin: factor_pin.clone(),
                })
            }
        }
    };

    for wire in &doc.wires {
        let source = resolve_source(&wire.from)?;
        match wire.to.split_once('.') {
            None => {
                // Netlist output pin.
                let p = pin(&wire.to, "wire sink")?;
                if !output_set.contains(&p) {
                    return Err(CliError::Validation(format!(
                        "wire sink `{}` is neither an instance pin nor a netlist output",
                        wire.to
                    )));
                }
                if !driven_outputs.insert(p.clone()) {
                    return Err(CliError::Validation(format!(
                        "netlist output `{p}` is driven more than once"
                    )));
                }
                match source {
                    WireSource::Factor { index, pin } => {
                        exposure
                            .expose(p, index, pin)
                            .map_err(|e| CliError::Validation(e.to_string()))?;
                    }
                    WireSource::External(_) => {
                        return Err(CliError::Validation(format!(
                            "netlist output `{p}` must be driven by an instance output"
                        )));
                    }
                }
            }
            Some((inst, in_pin)) => {
                let f = *instance_index.get(inst).ok_or_else(|| {
                    CliError::Validation(format!("wire sink references unknown instance `{inst}`"))
                })?;
                let p = pin(in_pin, "wire sink")?;
                let consumers = fragments[f].inputs.get(&p).ok_or_else(|| {
                    CliError::Validation(format!("instance `{inst}` has no input pin `{in_pin}`"))
                })?;
                for (factor, factor_pin) in consumers {
                    wiring
                        .wire(offsets[f] + factor, factor_pin.clone(), source.clone())
                        .map_err(|_| {
                            CliError::Validation(format!(
                                "instance pin `{inst}.{in_pin}` is driven more than once"
                            ))
                        })?;
                }
            }
        }
    }

    for out in &outputs {
        if !driven_outputs.contains(out) {
            return Err(CliError::Validation(format!(
                "netlist output `{out}` is undriven"
            )));
        }
    }

    let spec = ProductSpec {
        factors,
        wiring,
        exposure,
        input_pins,
    };
    // Totality over factor pins and all remaining invariants.
    spec.validate().map_err(|e| {
        CliError::Validation(format!("{e} (check that every instance input is wired)"))
    })?;

    Ok(Netlist {
        name: doc.name.clone(),
        inputs,
        outputs,
        instance_count: doc.instances.len(),
        spec,
    })
}
