//! The file-based pipeline end to end: gen → train → spoof → detect →
//! eval → report, staged through CSV artifacts exactly like the
//! `evci-guard` binary's subcommands.
//!
//! Run with `cargo run --example full_pipeline`. Outputs land in
//! `target/example-pipeline/` for inspection.

use std::path::PathBuf;

use evci_guard::pipeline::{
    run_detect, run_eval, run_gen, run_report, run_spoof, run_train, DetectArgs, EvalArgs,
    GenArgs, ReportArgs, SpoofArgs, TrainArgs,
};

fn main() -> Result<(), evci_guard::Error> {
    let out_root = PathBuf::from("target/example-pipeline");
    std::fs::create_dir_all(&out_root).map_err(|e| evci_guard::Error::io(&out_root, e))?;
    let config_path = out_root.join("sim.toml");
    std::fs::write(&config_path, "seed = 11\nduration_s = 3600\n")
        .map_err(|e| evci_guard::Error::io(&config_path, e))?;

    println!("staging into {}", out_root.display());

    let manifest = run_gen(&GenArgs {
        out_root: out_root.clone(),
        config: Some(config_path),
        seed: None,
        days: None,
    })?;
    println!("[gen]    {} outputs in {} ms", manifest.outputs.len(), manifest.duration_ms);

    let manifest = run_train(&TrainArgs {
        out_root: out_root.clone(),
        seed: None,
        port: None,
    })?;
    println!("[train]  {} outputs in {} ms", manifest.outputs.len(), manifest.duration_ms);

    let (manifest, plan) = run_spoof(&SpoofArgs {
        out_root: out_root.clone(),
        seed: None,
        port: None,
        window: None,
        per_class: Some(3),
    })?;
    println!(
        "[spoof]  {} attack windows planned, {} outputs in {} ms",
        plan.events().len(),
        manifest.outputs.len(),
        manifest.duration_ms
    );

    let (manifest, verdicts) = run_detect(&DetectArgs {
        out_root: out_root.clone(),
        port: None,
        threshold: None,
        window: None,
    })?;
    println!(
        "[detect] {} anomalies confirmed in {} ms",
        verdicts.len(),
        manifest.duration_ms
    );

    let (_, report) = run_eval(&EvalArgs {
        out_root: out_root.clone(),
    })?;
    println!(
        "[eval]   detection rate {:.1}%, false positives {}",
        100.0 * report.overall_detection_rate().unwrap_or(0.0),
        report.false_positives
    );

    let manifest = run_report(&ReportArgs {
        out_root: out_root.clone(),
    })?;
    let summary_path = &manifest.outputs[0];
    println!("[report] wrote {}\n", summary_path.display());

    let summary =
        std::fs::read_to_string(summary_path).map_err(|e| evci_guard::Error::io(summary_path, e))?;
    println!("{summary}");
    Ok(())
}
