//! Simulate a few hours of depot telemetry and inspect its physics.
//!
//! Run with `cargo run --example generate_telemetry`.

use evci_guard::sim::{schedule_sessions, simulate, SimConfig};
use evci_guard::telemetry::PortId;

fn main() -> Result<(), evci_guard::Error> {
    let config = SimConfig {
        seed: 7,
        duration_s: 4 * 3600,
        ..SimConfig::default()
    };
    let sessions = schedule_sessions(&config)?;
    let series = simulate(&config, &sessions)?;

    println!(
        "simulated {} seconds of telemetry ({} records, seed {})",
        config.duration_s,
        series.len(),
        config.seed
    );
    println!("\nscheduled sessions per port:");
    for port in PortId::ALL {
        let mine: Vec<_> = sessions.iter().filter(|s| s.port == port).collect();
        let charged: u64 = mine.iter().map(|s| s.departure_t - s.arrival_t).sum();
        println!(
            "  {:<15} {:>2} sessions, {:>5} plugged-in seconds",
            port.label(),
            mine.len(),
            charged
        );
    }

    // Physics spot-checks over every record.
    let records = series.records();
    let worst_imbalance = records
        .iter()
        .map(|r| r.current_balance_residual().abs())
        .fold(0.0f64, f64::max);
    println!("\nworst coupling-bus current imbalance: {worst_imbalance:.3e} A");

    let peak = records
        .iter()
        .max_by(|a, b| a.i_pcc.partial_cmp(&b.i_pcc).unwrap())
        .expect("non-empty series");
    let active = peak.ports.iter().filter(|p| p.cs).count();
    println!(
        "peak grid draw: {:.1} A at t = {} ({} ports charging, storage current {:.1} A)",
        peak.i_pcc, peak.t, active, peak.i_bess
    );

    // Show one charging second per active port.
    println!("\nsample read-outs (first active second per port):");
    for port in PortId::ALL {
        if let Some(rec) = records.iter().find(|r| r.port(port).cs) {
            let p = rec.port(port);
            println!(
                "  {:<15} t={:>5}  i={:>7.2} A  p={:>6.1} kW  soc={:>6.3} %",
                port.label(),
                rec.t,
                p.i_ev,
                p.p_ev,
                p.soc_ev
            );
        } else {
            println!("  {:<15} idle for the whole run", port.label());
        }
    }
    Ok(())
}
