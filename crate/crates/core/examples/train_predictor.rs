//! Train the ΔSoC predictor for one port with cross-validated ridge
//! regression and read its diagnostics.
//!
//! Run with `cargo run --example train_predictor`.

use evci_guard::pipeline::split_for_training;
use evci_guard::ridge::{
    build_design, grid_search_cv, mean_predictor_mse, mse, CvConfig, DesignOptions,
};
use evci_guard::sim::{schedule_sessions, simulate, SimConfig};
use evci_guard::telemetry::PortId;

fn main() -> Result<(), evci_guard::Error> {
    let config = SimConfig {
        seed: 3,
        duration_s: 2 * 3600,
        ..SimConfig::default()
    };
    let series = simulate(&config, &schedule_sessions(&config)?)?;
    let (train, test) = split_for_training(&series)?;
    let port = PortId::Ev1TerraHpA;
    println!(
        "training on {} records, testing on {} (port {})",
        train.len(),
        test.len(),
        port
    );

    // Rows at session boundaries are dropped: the SoC jump there is plant
    // behavior, not charge rate.
    let (design, mask) = build_design(&train, port, DesignOptions::default())?;
    let kept = design.drop_rows(&mask)?;
    println!(
        "design: {} rows × {} features ({} boundary rows dropped)",
        kept.n_samples(),
        kept.n_features(),
        design.n_samples() - kept.n_samples()
    );

    let (model, report) = grid_search_cv(&kept, &CvConfig::default())?;
    println!("\ncross-validation (k = {} folds):", report.fold_mse[0].len());
    let means = report.mean_fold_mse();
    for idx in [0, report.alpha_grid.len() / 2, report.alpha_grid.len() - 1] {
        println!(
            "  alpha {:>10.4}  mean validation MSE {:.3e}",
            report.alpha_grid[idx], means[idx]
        );
    }
    println!("  chosen alpha: {}", report.chosen_alpha);
    println!("  refit train MSE: {:.3e}", report.train_mse);

    // Held-out evaluation against the do-nothing baseline.
    let (test_design, test_mask) = build_design(&test, port, DesignOptions::default())?;
    let test_kept = test_design.drop_rows(&test_mask)?;
    let predictions = model.predict(test_kept.features())?;
    let test_mse = mse(test_kept.targets(), &predictions)?;
    let baseline = mean_predictor_mse(kept.targets(), test_kept.targets())?;
    println!("\nheld-out test MSE: {test_mse:.3e}");
    println!("mean-predictor baseline MSE: {baseline:.3e}");
    if test_mse > 0.0 {
        println!("improvement: {:.1e}×", baseline / test_mse);
    }

    println!("\nstandardized coefficients:");
    for (name, beta) in model.feature_names().iter().zip(model.coefficients()) {
        println!("  {name:<15} {beta:>12.6}");
    }
    Ok(())
}
