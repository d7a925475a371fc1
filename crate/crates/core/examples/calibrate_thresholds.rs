//! Calibrate per-port detection thresholds from clean residuals and compare
//! the two calibration policies.
//!
//! Run with `cargo run --example calibrate_thresholds`.

use evci_guard::detect::{
    calibrate_threshold, ResidualSeries, ThresholdPolicy, THRESHOLD_FLOOR,
};
use evci_guard::ridge::{build_design, fit_ridge, DesignOptions};
use evci_guard::sim::{schedule_sessions, simulate, SimConfig};
use evci_guard::telemetry::PortId;

fn main() -> Result<(), evci_guard::Error> {
    let config = SimConfig {
        seed: 21,
        duration_s: 3600,
        ..SimConfig::default()
    };
    let series = simulate(&config, &schedule_sessions(&config)?)?;
    println!(
        "calibrating on {} seconds of spoof-free telemetry (floor {THRESHOLD_FLOOR:e})\n",
        series.len()
    );
    println!(
        "{:<15} {:>14} {:>16} {:>16}",
        "port", "max residual", "mean+6·sigma", "upper quantile"
    );

    for port in PortId::ALL {
        let (design, mask) = build_design(&series, port, DesignOptions::default())?;
        let kept = design.drop_rows(&mask)?;
        let model = fit_ridge(&kept, 1e-3)?;

        // Residuals over everything the model will police, boundaries out.
        let predictions = model.predict(design.features())?;
        let values: Vec<f64> = design
            .targets()
            .iter()
            .zip(&predictions)
            .map(|(y, p)| (y - p).abs())
            .collect();
        let clean = ResidualSeries::new(port, values)?.drop_masked(&mask)?;

        let worst = clean.values().iter().copied().fold(0.0f64, f64::max);
        let sigma = calibrate_threshold(&clean, ThresholdPolicy::MeanPlusSixSigma)?;
        let quantile = calibrate_threshold(&clean, ThresholdPolicy::UpperQuantile)?;
        println!("{:<15} {worst:>14.3e} {sigma:>16.3e} {quantile:>16.3e}", port.label());
    }

    println!(
        "\nClean residuals here come from the ridge penalty's small bias, \
         not plant noise,\nso they sit two to three orders below the \
         smallest legal spoof magnitude (4e-3)\nand every calibrated \
         threshold separates cleanly. A port that stayed idle has\nexactly \
         zero residual everywhere — the 1e-6 floor is what keeps such a \
         port's\ndetector from becoming a hair trigger."
    );
    Ok(())
}
