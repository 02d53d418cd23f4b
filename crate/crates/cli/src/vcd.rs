//! Minimal value-change-dump writer: one single-bit wire per output pin,
//! ids assigned `!`, `"`, `#`, … in declaration order, one `#tick` block per
//! change. Output is byte-deterministic for a given netlist and stimulus.

use moorekit::{OutputVector, PinId};

/// Renders per-tick outputs as a VCD document. Tick 0 dumps every value;
/// later ticks appear only when some pin changed.
pub fn format_vcd(outputs: &[moorekit::OutputVector], order: &[PinId]) -> String {
    let mut out = String::from("$timescale 1 ns $end\n");
    for (i, pin) in order.iter().enumerate() {
        out.push_str(&format!("$var wire 1 {} {} $end\n", id_code(i), pin));
    }
    out.push_str("$enddefinitions $end\n");

    let mut last: Vec<Option<u32>> = vec![None; order.len()];
    for (tick, vector) in outputs.iter().enumerate() {
        let changes = changed_levels(vector, order, &last);
        if changes.is_empty() {
            continue;
        }
        out.push_str(&format!("#{tick}\n"));
        for (i, level) in changes {
            out.push_str(&format!("{}{}\n", level, id_code(i)));
            last[i] = Some(level);
        }
    }
    out
}

fn changed_levels(
    vector: &OutputVector,
    order: &[PinId],
    last: &[Option<u32>],
) -> Vec<(usize, u32)> {
    order
        .iter()
        .enumerate()
        .filter_map(|(i, pin)| {
            let level = vector.level(pin).expect("ordered pins").bit();
            if last[i] == Some(level) {
                None
            } else {
                Some((i, level))
            }
        })
        .collect()
}

fn id_code(index: usize) -> char {
    char::from(b'!' + u8::try_from(index).expect("at most 93 output pins"))
}
