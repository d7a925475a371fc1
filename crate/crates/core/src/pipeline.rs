//! End-to-end pipeline stages with file-based handoff.
//!
//! Each stage reads its inputs from disk, writes its outputs into its own
//! subdirectory of the output root, and records exactly one `manifest.txt`
//! there (command, config, seed, inputs, outputs, tool version, wall-clock
//! duration). Stages are re-runnable from their on-disk inputs alone, and
//! everything except the manifest's wall-clock line is a pure function of
//! seed + config, so repeated runs are byte-identical.
//!
//! Stage layout under the output root:
//!
//! ```text
//! gen/     telemetry.csv, sessions.csv
//! train/   model_<port>.txt, fit_<port>.txt, thresholds.csv
//! spoof/   plan.csv, spoofed_<port>.csv, labels_<port>.csv
//! detect/  verdicts.csv
//! eval/    report.txt, confusion.csv
//! report/  summary.txt
//! ```
//!
//! The default split hands the first 4/5 of the records to training and
//! the final 1/5 to held-out testing (4 + 1 days at the default duration);
//! spoofing, detection, and evaluation all operate on the test split.

use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::detect::{
    calibrate_threshold, compute_residuals, detect, evaluate, read_verdicts_csv,
    write_verdicts_csv, DetectionReport, DetectorConfig, ResidualSeries, ThresholdPolicy, Verdict,
};
use crate::error::{Error, Result};
use crate::reference::{
    reference_accuracy_pct, REFERENCE_ALPHA, REFERENCE_MODEL_MSE, REFERENCE_PORT_MSE,
};
use crate::ridge::{
    build_design, grid_search_cv, load_fit_report, load_model, mse, save_fit_report, save_model,
    CvConfig, DesignOptions, FitReport,
};
use crate::sim::{schedule_sessions, simulate, write_sessions_csv, SimConfig};
use crate::spoof::{
    generate_plan, inject, read_plan_csv, write_labels_csv, write_plan_csv, PlanSpec, SpoofPlan,
};
use crate::telemetry::{
    compute_delta_soc, split_dataset, DeltaSocSeries, PortId, TelemetrySeries,
};
use crate::textio::fmt_f64;

/// Environment variable naming the default output root.
pub const OUT_ENV_VAR: &str = "EVCI_GUARD_OUT";

/// `--out` default: `$EVCI_GUARD_OUT`, falling back to `./out`.
pub fn default_out_root() -> PathBuf {
    std::env::var_os(OUT_ENV_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Crate version stamped into manifests.
pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Record of one stage run; every stage directory holds exactly one.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Config file the stage used, if any.
    pub config: Option<PathBuf>,
    /// Seed that, with the config, determines every output byte.
    pub seed: u64,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// Wall-clock duration; informational only and deliberately excluded
    /// from any determinism guarantee.
    pub duration_ms: u128,
}

impl RunManifest {
    /// Write `manifest.txt` into `dir` and return its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.txt");
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        let io_err = |e| Error::io(&path, e);
        writeln!(w, "command = {}", self.command).map_err(io_err)?;
        writeln!(w, "version = {}", self.version).map_err(io_err)?;
        match &self.config {
            Some(p) => writeln!(w, "config = {}", p.display()).map_err(io_err)?,
            None => writeln!(w, "config = defaults").map_err(io_err)?,
        }
        writeln!(w, "seed = {}", self.seed).map_err(io_err)?;
        writeln!(w, "duration_ms = {}", self.duration_ms).map_err(io_err)?;
        for p in &self.inputs {
            writeln!(w, "input = {}", p.display()).map_err(io_err)?;
        }
        for p in &self.outputs {
            writeln!(w, "output = {}", p.display()).map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
        Ok(path)
    }
}

fn new_manifest(command: &str, config: Option<PathBuf>, seed: u64) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        version: tool_version().to_string(),
        config,
        seed,
        inputs: Vec::new(),
        outputs: Vec::new(),
        duration_ms: 0,
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn ports_to_run(only: Option<PortId>) -> Vec<PortId> {
    match only {
        Some(p) => vec![p],
        None => PortId::ALL.to_vec(),
    }
}

// --- canonical artifact names -------------------------------------------

pub fn gen_dir(root: &Path) -> PathBuf {
    root.join("gen")
}
pub fn train_dir(root: &Path) -> PathBuf {
    root.join("train")
}
pub fn spoof_dir(root: &Path) -> PathBuf {
    root.join("spoof")
}
pub fn detect_dir(root: &Path) -> PathBuf {
    root.join("detect")
}
pub fn eval_dir(root: &Path) -> PathBuf {
    root.join("eval")
}
pub fn report_dir(root: &Path) -> PathBuf {
    root.join("report")
}

pub fn telemetry_path(root: &Path) -> PathBuf {
    gen_dir(root).join("telemetry.csv")
}
pub fn sessions_path(root: &Path) -> PathBuf {
    gen_dir(root).join("sessions.csv")
}
pub fn model_path(root: &Path, port: PortId) -> PathBuf {
    train_dir(root).join(format!("model_{}.txt", port.label()))
}
pub fn fit_report_path(root: &Path, port: PortId) -> PathBuf {
    train_dir(root).join(format!("fit_{}.txt", port.label()))
}
pub fn thresholds_path(root: &Path) -> PathBuf {
    train_dir(root).join("thresholds.csv")
}
pub fn plan_path(root: &Path) -> PathBuf {
    spoof_dir(root).join("plan.csv")
}
pub fn spoofed_delta_path(root: &Path, port: PortId) -> PathBuf {
    spoof_dir(root).join(format!("spoofed_{}.csv", port.label()))
}
pub fn labels_path(root: &Path, port: PortId) -> PathBuf {
    spoof_dir(root).join(format!("labels_{}.csv", port.label()))
}
pub fn verdicts_path(root: &Path) -> PathBuf {
    detect_dir(root).join("verdicts.csv")
}
pub fn eval_report_path(root: &Path) -> PathBuf {
    eval_dir(root).join("report.txt")
}
pub fn confusion_path(root: &Path) -> PathBuf {
    eval_dir(root).join("confusion.csv")
}

/// 4-fifths / 1-fifth record split (4 train days + 1 test day at the
/// default 5-day duration).
pub fn split_for_training(
    series: &TelemetrySeries,
) -> Result<(TelemetrySeries, TelemetrySeries)> {
    let n = series.len();
    let train_len = n * 4 / 5;
    split_dataset(series, train_len, n - train_len)
}

// --- thresholds.csv -------------------------------------------------------

const THRESHOLDS_HEADER: &str = "port,threshold";

pub fn write_thresholds_csv(path: &Path, entries: &[(PortId, f64)]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{THRESHOLDS_HEADER}").map_err(io_err)?;
    for (port, threshold) in entries {
        writeln!(w, "{},{}", port.label(), fmt_f64(*threshold)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_thresholds_csv(path: &Path) -> Result<Vec<(PortId, f64)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut entries = Vec::new();
    let mut saw_header = false;
    let mut line_no = 0usize;
    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != THRESHOLDS_HEADER {
                return Err(Error::parse(path, line_no, format!("unexpected header '{line}'")));
            }
            saw_header = true;
            continue;
        }
        let (port_raw, value_raw) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path, line_no, "expected port,threshold"))?;
        let port: PortId = port_raw
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad port '{port_raw}'")))?;
        let threshold: f64 = value_raw
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad threshold '{value_raw}'")))?;
        entries.push((port, threshold));
    }
    if !saw_header {
        return Err(Error::EmptyInput(format!(
            "{}: empty thresholds file",
            path.display()
        )));
    }
    Ok(entries)
}

// --- gen -------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct GenArgs {
    pub out_root: PathBuf,
    /// TOML simulation config; builtin defaults when absent.
    pub config: Option<PathBuf>,
    /// Overrides the config's seed.
    pub seed: Option<u64>,
    /// Overrides the config's duration with whole days.
    pub days: Option<u32>,
}

/// Simulate telemetry and write `gen/telemetry.csv` + `gen/sessions.csv`.
pub fn run_gen(args: &GenArgs) -> Result<RunManifest> {
    let started = Instant::now();
    let mut config = match &args.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(days) = args.days {
        if days == 0 {
            return Err(Error::Config("--days must be at least 1".into()));
        }
        config.duration_s = u64::from(days) * 86_400;
    }
    config.validate()?;

    let sessions = schedule_sessions(&config)?;
    let series = simulate(&config, &sessions)?;

    let dir = gen_dir(&args.out_root);
    ensure_dir(&dir)?;
    let telemetry = telemetry_path(&args.out_root);
    let sessions_file = sessions_path(&args.out_root);
    series.write_csv(&telemetry)?;
    write_sessions_csv(&sessions_file, &sessions)?;

    let mut manifest = new_manifest("gen", args.config.clone(), config.seed);
    manifest.outputs = vec![telemetry, sessions_file];
    manifest.duration_ms = started.elapsed().as_millis();
    manifest.write(&dir)?;
    Ok(manifest)
}

// --- train -----------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct TrainArgs {
    pub out_root: PathBuf,
    /// Cross-validation shuffle seed (default 0).
    pub seed: Option<u64>,
    /// Train a single port instead of all six.
    pub port: Option<PortId>,
}

/// Fit one ridge model per port on the train split, evaluate it on the
/// test split, and calibrate a per-port detection threshold from the
/// train-split residuals (spoof-free by construction).
pub fn run_train(args: &TrainArgs) -> Result<RunManifest> {
    let started = Instant::now();
    let telemetry_file = telemetry_path(&args.out_root);
    let series = TelemetrySeries::read_csv(&telemetry_file)?;
    let (train_series, test_series) = split_for_training(&series)?;

    let dir = train_dir(&args.out_root);
    ensure_dir(&dir)?;
    let seed = args.seed.unwrap_or(0);
    let cv = CvConfig {
        seed,
        ..CvConfig::default()
    };

    let mut manifest = new_manifest("train", None, seed);
    manifest.inputs.push(telemetry_file);
    let mut thresholds = Vec::new();

    for port in ports_to_run(args.port) {
        let (train_design, train_mask) =
            build_design(&train_series, port, DesignOptions::default())?;
        let kept = train_design.drop_rows(&train_mask)?;
        let (model, mut report) = grid_search_cv(&kept, &cv)?;

        let (test_design, test_mask) =
            build_design(&test_series, port, DesignOptions::default())?;
        let test_kept = test_design.drop_rows(&test_mask)?;
        let predictions = model.predict(test_kept.features())?;
        report.test_mse = Some(mse(test_kept.targets(), &predictions)?);

        // Clean residuals over the full train split; boundary samples out.
        let train_predictions = model.predict(train_design.features())?;
        let residual_values: Vec<f64> = train_design
            .targets()
            .iter()
            .zip(&train_predictions)
            .map(|(y, p)| (y - p).abs())
            .collect();
        let clean = ResidualSeries::new(port, residual_values)?.drop_masked(&train_mask)?;
        let threshold = calibrate_threshold(&clean, ThresholdPolicy::MeanPlusSixSigma)?;
        thresholds.push((port, threshold));

        let model_file = model_path(&args.out_root, port);
        let fit_file = fit_report_path(&args.out_root, port);
        save_model(&model_file, &model)?;
        save_fit_report(&fit_file, port.label(), &report)?;
        manifest.outputs.push(model_file);
        manifest.outputs.push(fit_file);
    }

    let thresholds_file = thresholds_path(&args.out_root);
    write_thresholds_csv(&thresholds_file, &thresholds)?;
    manifest.outputs.push(thresholds_file);
    manifest.duration_ms = started.elapsed().as_millis();
    manifest.write(&dir)?;
    Ok(manifest)
}

// --- spoof -----------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct SpoofArgs {
    pub out_root: PathBuf,
    /// Base seed for window placement and parameter draws (default 0);
    /// each port perturbs it by its index so ports get independent plans.
    pub seed: Option<u64>,
    /// Spoof a single port instead of all six.
    pub port: Option<PortId>,
    /// Window length in samples (default 10).
    pub window: Option<usize>,
    /// Events per class per port (default 10).
    pub per_class: Option<usize>,
}

/// Inject seeded attacks into the test-split ΔSoC of each port and write
/// the tampered series, per-sample labels, and the combined plan.
pub fn run_spoof(args: &SpoofArgs) -> Result<(RunManifest, SpoofPlan)> {
    let started = Instant::now();
    let telemetry_file = telemetry_path(&args.out_root);
    let series = TelemetrySeries::read_csv(&telemetry_file)?;
    let (_, test_series) = split_for_training(&series)?;

    let dir = spoof_dir(&args.out_root);
    ensure_dir(&dir)?;
    let base_seed = args.seed.unwrap_or(0);
    let per_class = args.per_class.unwrap_or(10);
    // Identify the input by its stage-relative name: plans must be
    // byte-reproducible across output roots, so no absolute paths here.
    let source = format!("seed {base_seed} test split of gen/telemetry.csv");

    let mut manifest = new_manifest("spoof", None, base_seed);
    manifest.inputs.push(telemetry_file.clone());
    let mut all_events = Vec::new();

    for port in ports_to_run(args.port) {
        let delta = compute_delta_soc(&test_series, port)?;
        let spec = PlanSpec {
            decimal_count: per_class,
            incremental_count: per_class,
            random_count: per_class,
            length: args.window.unwrap_or(10),
            guard: 5,
            seed: base_seed.wrapping_add(port.index() as u64),
        };
        let plan = generate_plan(&delta, &spec, source.clone())?;
        let (spoofed, labels) = inject(&delta, &plan)?;

        let spoofed_file = spoofed_delta_path(&args.out_root, port);
        let labels_file = labels_path(&args.out_root, port);
        spoofed.write_csv(&spoofed_file)?;
        write_labels_csv(&labels_file, &labels)?;
        manifest.outputs.push(spoofed_file);
        manifest.outputs.push(labels_file);
        all_events.extend(plan.events().iter().copied());
    }

    let combined = SpoofPlan::new(source, all_events)?;
    let plan_file = plan_path(&args.out_root);
    write_plan_csv(&plan_file, &combined)?;
    manifest.outputs.push(plan_file);
    manifest.duration_ms = started.elapsed().as_millis();
    manifest.write(&dir)?;
    Ok((manifest, combined))
}

// --- detect ----------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct DetectArgs {
    pub out_root: PathBuf,
    /// Detect on a single port instead of all six.
    pub port: Option<PortId>,
    /// Overrides the calibrated per-port thresholds.
    pub threshold: Option<f64>,
    /// Confirmation window length (default 10).
    pub window: Option<usize>,
}

/// Predict clean ΔSoC from the (untampered) current telemetry, compare
/// with the reported — possibly spoofed — ΔSoC, and write every confirmed
/// anomaly to `detect/verdicts.csv`.
pub fn run_detect(args: &DetectArgs) -> Result<(RunManifest, Vec<Verdict>)> {
    let started = Instant::now();
    let telemetry_file = telemetry_path(&args.out_root);
    let series = TelemetrySeries::read_csv(&telemetry_file)?;
    let (_, test_series) = split_for_training(&series)?;

    let thresholds = match args.threshold {
        Some(_) => Vec::new(),
        None => read_thresholds_csv(&thresholds_path(&args.out_root))?,
    };

    let dir = detect_dir(&args.out_root);
    ensure_dir(&dir)?;
    let mut manifest = new_manifest("detect", None, 0);
    manifest.inputs.push(telemetry_file);
    let mut verdicts = Vec::new();

    for port in ports_to_run(args.port) {
        let spoofed_file = spoofed_delta_path(&args.out_root, port);
        let spoofed = DeltaSocSeries::read_csv(&spoofed_file)?;
        if spoofed.port != port {
            return Err(Error::Config(format!(
                "{} holds data for {}, expected {port}",
                spoofed_file.display(),
                spoofed.port
            )));
        }
        let model_file = model_path(&args.out_root, port);
        let model = load_model(&model_file)?;

        let (design, _) = build_design(&test_series, port, DesignOptions::default())?;
        if design.n_samples() != spoofed.len() {
            return Err(Error::ShapeMismatch {
                what: format!("reported ΔSoC for {port} vs telemetry test split"),
                expected: design.n_samples(),
                actual: spoofed.len(),
            });
        }
        let predictions = model.predict(design.features())?;
        let residuals = compute_residuals(&spoofed, &predictions)?;

        let threshold = match args.threshold {
            Some(t) => t,
            None => {
                thresholds
                    .iter()
                    .find(|(p, _)| *p == port)
                    .map(|(_, t)| *t)
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "no calibrated threshold for {port} in thresholds.csv; \
                             re-run train for it or pass an explicit threshold"
                        ))
                    })?
            }
        };
        let cfg = DetectorConfig {
            threshold,
            max_iter: args.window.unwrap_or(10),
            ..DetectorConfig::default()
        };
        verdicts.extend(detect(&residuals, &cfg, &spoofed.transition_mask)?);

        manifest.inputs.push(spoofed_file);
        manifest.inputs.push(model_file);
    }

    let verdicts_file = verdicts_path(&args.out_root);
    write_verdicts_csv(&verdicts_file, &verdicts)?;
    manifest.outputs.push(verdicts_file);
    manifest.duration_ms = started.elapsed().as_millis();
    manifest.write(&dir)?;
    Ok((manifest, verdicts))
}

// --- eval ------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct EvalArgs {
    pub out_root: PathBuf,
}

/// Score the verdicts against the injection plan and write the report
/// (text) plus the confusion matrix (CSV).
pub fn run_eval(args: &EvalArgs) -> Result<(RunManifest, DetectionReport)> {
    let started = Instant::now();
    let plan_file = plan_path(&args.out_root);
    let verdicts_file = verdicts_path(&args.out_root);
    let plan = read_plan_csv(&plan_file)?;
    let verdicts = read_verdicts_csv(&verdicts_file)?;
    let report = evaluate(&verdicts, &plan);

    let dir = eval_dir(&args.out_root);
    ensure_dir(&dir)?;
    let report_file = eval_report_path(&args.out_root);
    let confusion_file = confusion_path(&args.out_root);
    std::fs::write(&report_file, report.render_text())
        .map_err(|e| Error::io(&report_file, e))?;
    std::fs::write(&confusion_file, report.confusion_csv())
        .map_err(|e| Error::io(&confusion_file, e))?;

    let mut manifest = new_manifest("eval", None, 0);
    manifest.inputs = vec![plan_file, verdicts_file];
    manifest.outputs = vec![report_file, confusion_file];
    manifest.duration_ms = started.elapsed().as_millis();
    manifest.write(&dir)?;
    Ok((manifest, report))
}

// --- report ----------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct ReportArgs {
    pub out_root: PathBuf,
}

/// Combined human-readable summary: this run's per-port fits and detection
/// quality next to the reference values from the original testbed study.
pub fn run_report(args: &ReportArgs) -> Result<RunManifest> {
    let started = Instant::now();
    let mut manifest = new_manifest("report", None, 0);
    let mut text = String::new();
    text.push_str("charge-rate anomaly detection — run summary\n");
    text.push_str("===========================================\n\n");

    // Per-port fit table from whichever fit reports exist.
    let mut fits: Vec<(PortId, FitReport)> = Vec::new();
    for port in PortId::ALL {
        let path = fit_report_path(&args.out_root, port);
        if path.exists() {
            let (label, report) = load_fit_report(&path)?;
            if label != port.label() {
                return Err(Error::Config(format!(
                    "{} holds a fit for {label}, expected {port}",
                    path.display()
                )));
            }
            manifest.inputs.push(path);
            fits.push((port, report));
        }
    }
    if fits.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no fit reports under {}; run train first",
            train_dir(&args.out_root).display()
        )));
    }

    text.push_str("predictor (per port; study MSE from the original testbed)\n");
    text.push_str(&format!(
        "{:<15} {:>12} {:>13} {:>13} {:>11}\n",
        "port", "chosen_alpha", "train_mse", "test_mse", "study_mse"
    ));
    for (port, report) in &fits {
        let test = report
            .test_mse
            .map_or_else(|| "n/a".to_string(), |v| format!("{v:.3e}"));
        text.push_str(&format!(
            "{:<15} {:>12} {:>13.3e} {:>13} {:>11}\n",
            port.label(),
            report.chosen_alpha,
            report.train_mse,
            test,
            REFERENCE_PORT_MSE[port.index()]
        ));
    }
    text.push_str(&format!(
        "\nstudy's chosen penalty: {REFERENCE_ALPHA} (always present in the default grid)\n"
    ));

    text.push_str("\npredictor families compared in the study (first port, held-out MSE)\n");
    for (name, value) in REFERENCE_MODEL_MSE {
        text.push_str(&format!("  {name:<26} {value}\n"));
    }

    // Detection section only when spoof + detect have both run.
    let plan_file = plan_path(&args.out_root);
    let verdicts_file = verdicts_path(&args.out_root);
    if plan_file.exists() && verdicts_file.exists() {
        let plan = read_plan_csv(&plan_file)?;
        let verdicts = read_verdicts_csv(&verdicts_file)?;
        let report = evaluate(&verdicts, &plan);
        manifest.inputs.push(plan_file);
        manifest.inputs.push(verdicts_file);

        text.push_str("\ndetection\n");
        text.push_str(&report.render_text());
        text.push_str("\nclass accuracy vs study\n");
        for class in crate::spoof::SpoofClass::ALL {
            let measured = report
                .outcome(class)
                .accuracy()
                .map_or_else(|| "n/a".to_string(), |a| format!("{:.2}%", 100.0 * a));
            text.push_str(&format!(
                "  {:<15} {:>8}  (study {:.2}%)\n",
                class.label(),
                measured,
                reference_accuracy_pct(class)
            ));
        }
    } else {
        text.push_str("\ndetection: no spoof/detect artifacts found — skipped\n");
    }

    let dir = report_dir(&args.out_root);
    ensure_dir(&dir)?;
    let summary_file = dir.join("summary.txt");
    std::fs::write(&summary_file, &text).map_err(|e| Error::io(&summary_file, e))?;
    manifest.outputs.push(summary_file);
    manifest.duration_ms = started.elapsed().as_millis();
    manifest.write(&dir)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spoof::SpoofClass;

    /// Small but fully featured run: one simulated hour, every stage.
    fn small_config_toml() -> &'static str {
        "seed = 11\nduration_s = 3600\n"
    }

    fn run_all(root: &Path) -> (Vec<Verdict>, DetectionReport) {
        let config_path = root.join("sim.toml");
        std::fs::write(&config_path, small_config_toml()).unwrap();
        run_gen(&GenArgs {
            out_root: root.to_path_buf(),
            config: Some(config_path),
            seed: None,
            days: None,
        })
        .unwrap();
        run_train(&TrainArgs {
            out_root: root.to_path_buf(),
            seed: None,
            port: None,
        })
        .unwrap();
        run_spoof(&SpoofArgs {
            out_root: root.to_path_buf(),
            seed: None,
            port: None,
            window: None,
            per_class: Some(3),
        })
        .unwrap();
        let (_, verdicts) = run_detect(&DetectArgs {
            out_root: root.to_path_buf(),
            port: None,
            threshold: None,
            window: None,
        })
        .unwrap();
        let (_, report) = run_eval(&EvalArgs {
            out_root: root.to_path_buf(),
        })
        .unwrap();
        run_report(&ReportArgs {
            out_root: root.to_path_buf(),
        })
        .unwrap();
        (verdicts, report)
    }

    #[test]
    fn full_pipeline_round_trips_and_detects() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        let (verdicts, report) = run_all(root);

        // Every stage directory holds its artifacts plus exactly one manifest.
        for (stage, expected) in [
            ("gen", vec!["telemetry.csv", "sessions.csv"]),
            ("detect", vec!["verdicts.csv"]),
            ("eval", vec!["report.txt", "confusion.csv"]),
            ("report", vec!["summary.txt"]),
        ] {
            let stage_dir = root.join(stage);
            for name in expected {
                assert!(stage_dir.join(name).exists(), "{stage}/{name} missing");
            }
            let manifests = std::fs::read_dir(&stage_dir)
                .unwrap()
                .filter(|e| e.as_ref().unwrap().file_name() == "manifest.txt")
                .count();
            assert_eq!(manifests, 1, "{stage} must hold exactly one manifest");
        }
        for port in PortId::ALL {
            assert!(model_path(root, port).exists());
            assert!(fit_report_path(root, port).exists());
            assert!(spoofed_delta_path(root, port).exists());
            assert!(labels_path(root, port).exists());
        }

        // 3 events per class per port were injected; the plant is exact, so
        // detection should be essentially perfect on this clean setup.
        assert_eq!(report.injected_total(), 3 * 3 * 6);
        assert!(
            report.overall_detection_rate().unwrap() > 0.9,
            "detection collapsed: {report:?}"
        );
        assert!(report.overall_accuracy().unwrap() > 0.8);
        assert_eq!(report.false_positives, 0, "clean windows must stay silent");
        assert!(!verdicts.is_empty());

        let summary = std::fs::read_to_string(root.join("report/summary.txt")).unwrap();
        assert!(summary.contains("0.000194"), "study reference MSE missing");
        assert!(summary.contains("99.31"), "study reference accuracy missing");
        assert!(summary.contains("decimal_shift"));
    }

    #[test]
    fn gen_is_byte_identical_under_a_seed() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        for root in [dir_a.path(), dir_b.path()] {
            let config_path = root.join("sim.toml");
            std::fs::write(&config_path, small_config_toml()).unwrap();
            run_gen(&GenArgs {
                out_root: root.to_path_buf(),
                config: Some(config_path),
                seed: Some(123),
                days: None,
            })
            .unwrap();
        }
        let a = std::fs::read(telemetry_path(dir_a.path())).unwrap();
        let b = std::fs::read(telemetry_path(dir_b.path())).unwrap();
        assert_eq!(a, b, "telemetry must be a pure function of seed + config");
        let sa = std::fs::read(sessions_path(dir_a.path())).unwrap();
        let sb = std::fs::read(sessions_path(dir_b.path())).unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn detect_honors_threshold_override() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        let _ = run_all(root);
        // An absurdly high threshold silences every verdict.
        let (_, verdicts) = run_detect(&DetectArgs {
            out_root: root.to_path_buf(),
            port: None,
            threshold: Some(1e6),
            window: None,
        })
        .unwrap();
        assert!(verdicts.is_empty());
    }

    #[test]
    fn single_port_stages_produce_only_that_port() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        let config_path = root.join("sim.toml");
        std::fs::write(&config_path, small_config_toml()).unwrap();
        run_gen(&GenArgs {
            out_root: root.to_path_buf(),
            config: Some(config_path),
            seed: None,
            days: None,
        })
        .unwrap();
        let port = PortId::Ev3TerraHp;
        run_train(&TrainArgs {
            out_root: root.to_path_buf(),
            seed: None,
            port: Some(port),
        })
        .unwrap();
        assert!(model_path(root, port).exists());
        assert!(!model_path(root, PortId::Ev0Terra53).exists());

        run_spoof(&SpoofArgs {
            out_root: root.to_path_buf(),
            seed: None,
            port: Some(port),
            window: None,
            per_class: Some(2),
        })
        .unwrap();
        let (_, verdicts) = run_detect(&DetectArgs {
            out_root: root.to_path_buf(),
            port: Some(port),
            threshold: None,
            window: None,
        })
        .unwrap();
        assert!(verdicts.iter().all(|v| v.port == port));
        assert!(!verdicts.is_empty());
        let report = evaluate(&verdicts, &read_plan_csv(&plan_path(root)).unwrap());
        assert!(report.overall_detection_rate().unwrap() > 0.9);
    }

    #[test]
    fn stages_name_missing_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let err = run_train(&TrainArgs {
            out_root: root.clone(),
            seed: None,
            port: None,
        })
        .unwrap_err();
        assert!(
            err.to_string().contains("telemetry.csv"),
            "train must name the missing artifact, said: {err}"
        );
        let err = run_eval(&EvalArgs { out_root: root }).unwrap_err();
        assert!(
            err.to_string().contains("plan.csv"),
            "eval must name the missing artifact, said: {err}"
        );
    }

    #[test]
    fn thresholds_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("thresholds.csv");
        let entries: Vec<(PortId, f64)> = PortId::ALL
            .into_iter()
            .enumerate()
            .map(|(i, p)| (p, 1e-6 * (i + 1) as f64))
            .collect();
        write_thresholds_csv(&path, &entries).unwrap();
        let loaded = read_thresholds_csv(&path).unwrap();
        assert_eq!(loaded.len(), entries.len());
        for ((p1, t1), (p2, t2)) in entries.iter().zip(&loaded) {
            assert_eq!(p1, p2);
            assert_eq!(t1.to_bits(), t2.to_bits());
        }
    }

    #[test]
    fn eval_matches_labels_to_classes() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        let (_, report) = run_all(root);
        // Per class: all 18 injected (3 per class × 6 ports) accounted for
        // in the confusion matrix row sums.
        for (i, class) in SpoofClass::ALL.iter().enumerate() {
            let row_sum: usize = report.confusion[i].iter().sum();
            assert_eq!(
                row_sum,
                report.outcome(*class).injected,
                "confusion row for {class} must cover every injected window"
            );
        }
    }
}
