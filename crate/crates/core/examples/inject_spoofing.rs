//! Draw a seeded attack plan against a clean ΔSoC stream and inspect the
//! tampering up close.
//!
//! Run with `cargo run --example inject_spoofing`.

use evci_guard::sim::{schedule_sessions, simulate, SimConfig};
use evci_guard::spoof::{generate_plan, inject, PlanSpec, SpoofKind};
use evci_guard::telemetry::{compute_delta_soc, PortId};

fn main() -> Result<(), evci_guard::Error> {
    let config = SimConfig {
        seed: 5,
        duration_s: 3600,
        ..SimConfig::default()
    };
    let series = simulate(&config, &schedule_sessions(&config)?)?;

    // Attack the port that charged the most this hour.
    let port = PortId::ALL
        .into_iter()
        .max_by_key(|p| series.records().iter().filter(|r| r.port(*p).cs).count())
        .unwrap();
    let delta = compute_delta_soc(&series, port)?;
    let boundaries = delta.transition_mask.iter().filter(|m| **m).count();
    println!(
        "clean ΔSoC stream for {port}: {} samples, {} session-boundary marks",
        delta.len(),
        boundaries
    );

    let spec = PlanSpec {
        decimal_count: 2,
        incremental_count: 2,
        random_count: 2,
        length: 10,
        guard: 5,
        seed: 9,
    };
    let plan = generate_plan(&delta, &spec, "injection demo".into())?;
    let (spoofed, labels) = inject(&delta, &plan)?;

    println!("\ninjected {} attack windows:", plan.events().len());
    for event in plan.events() {
        let kind = match event.kind {
            SpoofKind::DecimalShift { offset } => format!("decimal shift, offset {offset:+.6}"),
            SpoofKind::IncrementalArray { start, step } => {
                format!("incremental ramp, start {start:+.6}, step {step:+.6}")
            }
            SpoofKind::Random { lo, hi } => format!("random tampering on [{lo}, {hi}]"),
        };
        println!("\n  [{}, {}) — {kind}", event.start_index, event.start_index + event.length);
        println!("    sample   clean ΔSoC     reported ΔSoC");
        for j in event.start_index..event.start_index + 4 {
            println!(
                "    {:>6}   {:>12.6}   {:>13.6}",
                j, delta.values[j], spoofed.values[j]
            );
        }
    }

    let tampered = labels.iter().filter(|l| l.is_some()).count();
    let untouched = delta
        .values
        .iter()
        .zip(&spoofed.values)
        .filter(|(a, b)| a.to_bits() == b.to_bits())
        .count();
    println!(
        "\n{} of {} samples tampered; {} carried through bit-for-bit",
        tampered,
        delta.len(),
        untouched
    );
    Ok(())
}
