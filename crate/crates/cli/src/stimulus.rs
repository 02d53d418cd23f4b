//! Stimulus files: CSV with a 0-based contiguous `tick` column followed by
//! one column per input pin, cells restricted to 0/1.

use moorekit::{Level, PinId, PinSet, Sample, Trace};

use crate::error::CliError;

/// Parses a stimulus document against the machine's input pins. The header
/// must cover exactly that pin set; column order is free.
pub fn parse_stimulus(text: &str, pins: &PinSet) -> Result<Trace, CliError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Validation("stimulus is empty; a header row is required".into()))?;
    let mut columns = header.split(',').map(str::trim);
    if columns.next() != Some("tick") {
        return Err(CliError::Validation(
            "stimulus header must start with a `tick` column".into(),
        ));
    }
    let names: Vec<&str> = columns.collect();
    let header_pins: Vec<PinId> = names
        .iter()
        .map(|n| {
            PinId::try_new(n)
                .map_err(|_| CliError::Validation(format!("stimulus header: invalid pin `{n}`")))
        })
        .collect::<Result<_, _>>()?;
    let header_set = PinSet::new(header_pins.iter().cloned())
        .map_err(|e| CliError::Validation(format!("stimulus header: {e}")))?;
    if &header_set != pins {
        return Err(CliError::PinMismatch(format!(
            "stimulus columns [{}] do not match the netlist inputs",
            names.join(",")
        )));
    }
    let column_of_pin: Vec<usize> = pins
        .iter()
        .map(|p| header_pins.iter().position(|h| h == p).unwrap())
        .collect();

    let mut trace = Trace::empty(pins);
    let mut expected_tick = 0u64;
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != names.len() + 1 {
            return Err(CliError::Validation(format!(
                "stimulus line {}: expected {} cells, found {}",
                lineno + 1,
                names.len() + 1,
                cells.len()
            )));
        }
        let tick: u64 = cells[0].parse().map_err(|_| {
            CliError::Validation(format!("stimulus line {}: invalid tick", lineno + 1))
        })?;
        if tick != expected_tick {
            return Err(CliError::Validation(format!(
                "stimulus line {}: ticks must be contiguous from 0 (expected {expected_tick})",
                lineno + 1
            )));
        }
        expected_tick += 1;
        let mut levels = Vec::with_capacity(names.len());
        for cell in &cells[1..] {
            levels.push(match *cell {
                "0" => Level::Low,
                "1" => Level::High,
                other => {
                    return Err(CliError::Validation(format!(
                        "stimulus line {}: cell `{other}` is not 0 or 1",
                        lineno + 1
                    )))
                }
            });
        }
        let sample = Sample::build(pins, |p| {
            let idx = pins.position(p).unwrap();
            levels[column_of_pin[idx]]
        });
        trace.push(&sample).map_err(CliError::from)?;
    }
    Ok(trace)
}

/// Renders a trace as a stimulus document with pins in `order`.
pub fn format_stimulus(trace: &Trace, order: &[PinId]) -> String {
    let mut out = String::from("tick");
    for p in order {
        out.push(',');
        out.push_str(p.as_str());
    }
    out.push('\n');
    for (tick, sample) in trace.samples().enumerate() {
        out.push_str(&tick.to_string());
        for p in order {
            out.push(',');
            out.push_str(&sample.level(p).expect("ordered pins").bit().to_string());
        }
        out.push('\n');
    }
    out
}

/// Renders per-tick outputs as CSV: tick 0 carries the initial outputs,
/// tick i the outputs after sample i.
pub fn format_run_csv(outputs: &[moorekit::OutputVector], order: &[PinId]) -> String {
    let mut out = String::from("tick");
    for p in order {
        out.push(',');
        out.push_str(p.as_str());
    }
    out.push('\n');
    for (tick, vector) in outputs.iter().enumerate() {
        out.push_str(&tick.to_string());
        for p in order {
            out.push(',');
            out.push_str(&vector.level(p).expect("ordered pins").bit().to_string());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let pins = PinSet::of(&["set", "reset"]);
        let text = "tick,set,reset\n0,1,0\n1,0,1\n";
        let trace = parse_stimulus(text, &pins).unwrap();
        assert_eq!(trace.len(), 2);
        let order = vec![PinId::new("set"), PinId::new("reset")];
        assert_eq!(format_stimulus(&trace, &order), text);
    }

    #[test]
    fn column_order_is_free() {
        let pins = PinSet::of(&["set", "reset"]);
        let trace = parse_stimulus("tick,reset,set\n0,0,1\n", &pins).unwrap();
        let sample = trace.sample(0);
        assert_eq!(sample.level(&PinId::new("set")).unwrap(), Level::High);
        assert_eq!(sample.level(&PinId::new("reset")).unwrap(), Level::Low);
    }

    #[test]
    fn rejects_gaps_and_foreign_pins() {
        let pins = PinSet::of(&["set", "reset"]);
        assert!(parse_stimulus("tick,set,reset\n1,0,0\n", &pins).is_err());
        assert!(parse_stimulus("tick,set\n0,0\n", &pins).is_err());
        assert!(parse_stimulus("tick,set,reset\n0,2,0\n", &pins).is_err());
    }
}
