//! End-to-end in memory: train predictors, inject attacks, calibrate,
//! detect, and score the verdicts against ground truth.
//!
//! Run with `cargo run --example detect_anomalies`.

use evci_guard::detect::{
    calibrate_threshold, compute_residuals, detect, evaluate, DetectorConfig, ResidualSeries,
    ThresholdPolicy,
};
use evci_guard::pipeline::split_for_training;
use evci_guard::ridge::{build_design, fit_ridge, DesignOptions};
use evci_guard::sim::{schedule_sessions, simulate, SimConfig};
use evci_guard::spoof::{generate_plan, inject, PlanSpec, SpoofPlan};
use evci_guard::telemetry::{compute_delta_soc, PortId};

fn main() -> Result<(), evci_guard::Error> {
    let config = SimConfig {
        seed: 13,
        duration_s: 2 * 3600,
        ..SimConfig::default()
    };
    let series = simulate(&config, &schedule_sessions(&config)?)?;
    let (train, test) = split_for_training(&series)?;
    println!(
        "train: {} records, test: {} records",
        train.len(),
        test.len()
    );

    let mut all_events = Vec::new();
    let mut all_verdicts = Vec::new();

    for port in PortId::ALL {
        // 1. Fit the charge-rate predictor on clean training data.
        let (design, mask) = build_design(&train, port, DesignOptions::default())?;
        let model = fit_ridge(&design.drop_rows(&mask)?, 1e-3)?;

        // 2. Calibrate this port's threshold from its clean residuals.
        let predictions = model.predict(design.features())?;
        let clean_values: Vec<f64> = design
            .targets()
            .iter()
            .zip(&predictions)
            .map(|(y, p)| (y - p).abs())
            .collect();
        let clean = ResidualSeries::new(port, clean_values)?.drop_masked(&mask)?;
        let threshold = calibrate_threshold(&clean, ThresholdPolicy::MeanPlusSixSigma)?;

        // 3. Tamper with the reported ΔSoC on the test split.
        let delta = compute_delta_soc(&test, port)?;
        let spec = PlanSpec {
            decimal_count: 3,
            incremental_count: 3,
            random_count: 3,
            length: 10,
            guard: 5,
            seed: 100 + port.index() as u64,
        };
        let plan = generate_plan(&delta, &spec, "demo".into())?;
        let (spoofed, _) = inject(&delta, &plan)?;
        all_events.extend(plan.events().iter().copied());

        // 4. Detect: predicted-vs-reported residual, windowed scan.
        let (test_design, _) = build_design(&test, port, DesignOptions::default())?;
        let test_predictions = model.predict(test_design.features())?;
        let residuals = compute_residuals(&spoofed, &test_predictions)?;
        let verdicts = detect(
            &residuals,
            &DetectorConfig::with_threshold(threshold),
            &spoofed.transition_mask,
        )?;
        println!(
            "  {:<15} threshold {:.1e}, {} attacks injected, {} anomalies confirmed",
            port.label(),
            threshold,
            plan.events().len(),
            verdicts.len()
        );
        all_verdicts.extend(verdicts);
    }

    // 5. Score against ground truth.
    let truth = SpoofPlan::new("demo".into(), all_events)?;
    let report = evaluate(&all_verdicts, &truth);
    println!("\n{}", report.render_text());
    Ok(())
}
