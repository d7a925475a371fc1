//! Residual-threshold anomaly detection and attack classification.
//!
//! The detector watches `D(t) = |ΔSoC_reported(t) − ΔSoC_predicted(t)|`.
//! A candidate anomaly opens when an unmasked residual reaches the
//! threshold; it is confirmed only if the next `max_iter` samples *all*
//! stay at or above the threshold with no session-boundary sample inside
//! the window. Confirmed windows are classified by their shape:
//!
//! * flat residuals → a constant additive offset (**decimal shift**);
//! * constant first differences → a linear ramp (**incremental** array);
//! * anything else → **random** tampering.
//!
//! Thresholds are calibrated on spoof-free residuals (boundary samples
//! excluded) and never drop below a fixed floor, so numerically exact
//! predictions don't produce a hair-trigger detector.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spoof::{SpoofClass, SpoofPlan};
use crate::telemetry::{DeltaSocSeries, PortId};

/// Calibrated thresholds never fall below this, whatever the residual scale.
pub const THRESHOLD_FLOOR: f64 = 1e-6;
/// Level used by the quantile calibration policy.
pub const QUANTILE_LEVEL: f64 = 1.0 - 1e-4;

/// Detector tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Residual magnitude that opens (and sustains) a candidate anomaly.
    pub threshold: f64,
    /// Confirmation window length: a candidate must hold for this many
    /// consecutive samples to become a verdict.
    pub max_iter: usize,
    /// Residual variation tolerated within a window that is still "flat".
    pub eps_eq: f64,
    /// First-difference variation tolerated in a window that is still a
    /// "constant-step ramp".
    pub eps_prog: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            threshold: THRESHOLD_FLOOR,
            max_iter: 10,
            eps_eq: 1e-4,
            eps_prog: 1e-4,
        }
    }
}

impl DetectorConfig {
    /// Default window and tolerances with a calibrated threshold.
    pub fn with_threshold(threshold: f64) -> Self {
        DetectorConfig {
            threshold,
            ..DetectorConfig::default()
        }
    }

    /// # Errors
    /// Non-positive threshold or tolerances, or a window shorter than 2.
    pub fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() || self.threshold <= 0.0 {
            return Err(Error::Config(format!(
                "detector threshold must be positive and finite, got {}",
                self.threshold
            )));
        }
        if self.max_iter < 2 {
            return Err(Error::Config(format!(
                "confirmation window needs at least 2 samples, got {}",
                self.max_iter
            )));
        }
        if !self.eps_eq.is_finite() || self.eps_eq <= 0.0 {
            return Err(Error::Config(format!(
                "eps_eq must be positive and finite, got {}",
                self.eps_eq
            )));
        }
        if !self.eps_prog.is_finite() || self.eps_prog <= 0.0 {
            return Err(Error::Config(format!(
                "eps_prog must be positive and finite, got {}",
                self.eps_prog
            )));
        }
        Ok(())
    }
}

/// Absolute prediction errors for one port, aligned with its ΔSoC samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub port: PortId,
    values: Vec<f64>,
}

impl ResidualSeries {
    /// # Errors
    /// Any negative or non-finite value.
    pub fn new(port: PortId, values: Vec<f64>) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Domain(format!(
                    "residual {i} is {v}; residuals are absolute errors and \
                     must be finite and non-negative"
                )));
            }
        }
        Ok(ResidualSeries { port, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Keep only samples whose mask entry is false (used to strip
    /// session-boundary samples before calibration).
    ///
    /// # Errors
    /// Mask length differing from the series length.
    pub fn drop_masked(&self, mask: &[bool]) -> Result<ResidualSeries> {
        if mask.len() != self.values.len() {
            return Err(Error::ShapeMismatch {
                what: "residual mask".into(),
                expected: self.values.len(),
                actual: mask.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(mask)
            .filter(|(_, m)| !**m)
            .map(|(v, _)| *v)
            .collect();
        Ok(ResidualSeries {
            port: self.port,
            values,
        })
    }
}

/// `|actual − predicted|` per sample.
///
/// # Errors
/// Length mismatch, or non-finite inputs.
pub fn compute_residuals(actual: &DeltaSocSeries, predicted: &[f64]) -> Result<ResidualSeries> {
    if predicted.len() != actual.len() {
        return Err(Error::ShapeMismatch {
            what: "predicted ΔSoC".into(),
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    let values: Vec<f64> = actual
        .values
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs())
        .collect();
    ResidualSeries::new(actual.port, values)
}

/// How to turn clean residuals into a detection threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdPolicy {
    /// mean + 6·stddev of the clean residuals (default).
    MeanPlusSixSigma,
    /// The empirical `1 − 10⁻⁴` quantile of the clean residuals.
    UpperQuantile,
}

/// Calibrate a threshold from spoof-free residuals.
///
/// Pass residuals with session-boundary samples already removed (see
/// [`ResidualSeries::drop_masked`]). The result never falls below
/// [`THRESHOLD_FLOOR`].
///
/// # Errors
/// Empty input.
pub fn calibrate_threshold(clean: &ResidualSeries, policy: ThresholdPolicy) -> Result<f64> {
    let values = clean.values();
    if values.is_empty() {
        return Err(Error::EmptyInput(
            "cannot calibrate a threshold from zero residuals".into(),
        ));
    }
    let n = values.len() as f64;
    let raw = match policy {
        ThresholdPolicy::MeanPlusSixSigma => {
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            mean + 6.0 * var.sqrt()
        }
        ThresholdPolicy::UpperQuantile => {
            let mut sorted = values.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("residuals are finite"));
            let rank = (QUANTILE_LEVEL * n).ceil() as usize;
            sorted[rank.clamp(1, sorted.len()) - 1]
        }
    };
    Ok(raw.max(THRESHOLD_FLOOR))
}

/// A confirmed anomaly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub port: PortId,
    pub start_index: usize,
    pub length: usize,
    pub class: SpoofClass,
}

impl Verdict {
    fn end_index(&self) -> usize {
        self.start_index + self.length
    }

    fn overlaps(&self, port: PortId, start: usize, length: usize) -> bool {
        self.port == port && self.start_index < start + length && start < self.end_index()
    }
}

/// Classify one confirmed residual window.
///
/// Precedence: a flat window is a decimal shift even though it is also a
/// zero-step ramp; a constant-step ramp is incremental; anything else is
/// random.
///
/// # Errors
/// Window length differing from `cfg.max_iter` — confirmation must
/// deliver exactly the configured number of samples.
pub fn classify_window(window: &[f64], cfg: &DetectorConfig) -> Result<SpoofClass> {
    cfg.validate()?;
    if window.len() != cfg.max_iter {
        return Err(Error::ShapeMismatch {
            what: "classification window".into(),
            expected: cfg.max_iter,
            actual: window.len(),
        });
    }
    if window.iter().all(|v| (v - window[0]).abs() <= cfg.eps_eq) {
        return Ok(SpoofClass::DecimalShift);
    }
    let first_diff = window[1] - window[0];
    let ramp = window
        .windows(2)
        .all(|pair| ((pair[1] - pair[0]) - first_diff).abs() <= cfg.eps_prog);
    if ramp {
        return Ok(SpoofClass::Incremental);
    }
    Ok(SpoofClass::Random)
}

/// Scan a residual series for confirmed anomalies.
///
/// A candidate opens at the first unmasked sample at or above the
/// threshold. It is confirmed only when `max_iter` consecutive samples all
/// hold at or above the threshold with no masked sample inside; a masked or
/// below-threshold sample at position `j` abandons the candidate and the
/// scan resumes at `j + 1`. Confirmed windows never overlap: the scan
/// continues after the window it just reported.
///
/// # Errors
/// Invalid config, or mask length differing from the series.
pub fn detect(
    residuals: &ResidualSeries,
    cfg: &DetectorConfig,
    transition_mask: &[bool],
) -> Result<Vec<Verdict>> {
    cfg.validate()?;
    let values = residuals.values();
    if transition_mask.len() != values.len() {
        return Err(Error::ShapeMismatch {
            what: "transition mask".into(),
            expected: values.len(),
            actual: transition_mask.len(),
        });
    }
    let n = values.len();
    let w = cfg.max_iter;
    let mut verdicts = Vec::new();
    let mut i = 0usize;
    'scan: while i + w <= n {
        if transition_mask[i] || values[i] < cfg.threshold {
            i += 1;
            continue;
        }
        for j in i..i + w {
            if transition_mask[j] || values[j] < cfg.threshold {
                i = j + 1;
                continue 'scan;
            }
        }
        let class = classify_window(&values[i..i + w], cfg)?;
        verdicts.push(Verdict {
            port: residuals.port,
            start_index: i,
            length: w,
            class,
        });
        i += w;
    }
    Ok(verdicts)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Tallies for one injected attack class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassOutcome {
    /// Windows of this class in the ground-truth plan.
    pub injected: usize,
    /// Injected windows overlapped by at least one verdict on their port.
    pub detected: usize,
    /// Detected windows whose *first* overlapping verdict carries the
    /// correct class.
    pub correct: usize,
}

impl ClassOutcome {
    /// detected / injected; `None` when nothing of this class was injected.
    pub fn detection_rate(&self) -> Option<f64> {
        (self.injected > 0).then(|| self.detected as f64 / self.injected as f64)
    }

    /// correct / injected; `None` when nothing of this class was injected.
    pub fn accuracy(&self) -> Option<f64> {
        (self.injected > 0).then(|| self.correct as f64 / self.injected as f64)
    }
}

/// Detection quality against a ground-truth plan.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    /// Outcomes indexed like [`SpoofClass::ALL`].
    pub per_class: [ClassOutcome; 3],
    /// `confusion[t][p]`: injected windows of true class `t` (order of
    /// [`SpoofClass::ALL`]) whose first verdict was class `p`; column 3
    /// counts windows no verdict overlapped.
    pub confusion: [[usize; 4]; 3],
    /// Verdicts overlapping no injected window on their port.
    pub false_positives: usize,
    /// Total verdicts evaluated.
    pub verdict_count: usize,
}

impl DetectionReport {
    pub fn outcome(&self, class: SpoofClass) -> ClassOutcome {
        let idx = SpoofClass::ALL.iter().position(|c| *c == class).unwrap();
        self.per_class[idx]
    }

    pub fn injected_total(&self) -> usize {
        self.per_class.iter().map(|o| o.injected).sum()
    }

    /// Correctly classified / injected, all classes pooled.
    pub fn overall_accuracy(&self) -> Option<f64> {
        let injected = self.injected_total();
        (injected > 0).then(|| {
            let correct: usize = self.per_class.iter().map(|o| o.correct).sum();
            correct as f64 / injected as f64
        })
    }

    /// Detected / injected, all classes pooled.
    pub fn overall_detection_rate(&self) -> Option<f64> {
        let injected = self.injected_total();
        (injected > 0).then(|| {
            let detected: usize = self.per_class.iter().map(|o| o.detected).sum();
            detected as f64 / injected as f64
        })
    }

    /// Human-readable summary table.
    pub fn render_text(&self) -> String {
        fn pct(v: Option<f64>) -> String {
            v.map_or_else(|| "n/a".to_string(), |x| format!("{:.2}%", 100.0 * x))
        }
        let mut out = String::new();
        out.push_str(&format!(
            "injected windows: {}\nverdicts: {}\nfalse positives: {}\n\n",
            self.injected_total(),
            self.verdict_count,
            self.false_positives
        ));
        out.push_str(&format!(
            "{:<15} {:>8} {:>8} {:>8} {:>15} {:>10}\n",
            "class", "injected", "detected", "correct", "detection_rate", "accuracy"
        ));
        for (class, o) in SpoofClass::ALL.iter().zip(&self.per_class) {
            out.push_str(&format!(
                "{:<15} {:>8} {:>8} {:>8} {:>15} {:>10}\n",
                class.label(),
                o.injected,
                o.detected,
                o.correct,
                pct(o.detection_rate()),
                pct(o.accuracy())
            ));
        }
        out.push_str(&format!(
            "{:<15} {:>8} {:>8} {:>8} {:>15} {:>10}\n",
            "overall",
            self.injected_total(),
            self.per_class.iter().map(|o| o.detected).sum::<usize>(),
            self.per_class.iter().map(|o| o.correct).sum::<usize>(),
            pct(self.overall_detection_rate()),
            pct(self.overall_accuracy())
        ));
        out.push_str("\nconfusion (rows: injected class; columns: first verdict)\n");
        out.push_str(&format!(
            "{:<15} {:>14} {:>12} {:>8} {:>8}\n",
            "true\\verdict", "decimal_shift", "incremental", "random", "missed"
        ));
        for (class, row) in SpoofClass::ALL.iter().zip(&self.confusion) {
            out.push_str(&format!(
                "{:<15} {:>14} {:>12} {:>8} {:>8}\n",
                class.label(),
                row[0],
                row[1],
                row[2],
                row[3]
            ));
        }
        out
    }

    /// Confusion matrix as CSV (`true_class,decimal_shift,incremental,random,missed`).
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true_class,decimal_shift,incremental,random,missed\n");
        for (class, row) in SpoofClass::ALL.iter().zip(&self.confusion) {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                class.label(),
                row[0],
                row[1],
                row[2],
                row[3]
            ));
        }
        out
    }
}

/// Score verdicts against the plan that produced the tampered series.
///
/// An injected window counts as detected when any verdict on its port
/// overlaps it, and as correctly classified when the *first* such verdict
/// (smallest start index) carries its class. A verdict overlapping no
/// injected window is a false positive. With an empty plan every accuracy
/// is `None` and all verdicts are false positives.
pub fn evaluate(verdicts: &[Verdict], plan: &SpoofPlan) -> DetectionReport {
    let class_idx = |c: SpoofClass| SpoofClass::ALL.iter().position(|x| *x == c).unwrap();
    let mut per_class = [ClassOutcome::default(); 3];
    let mut confusion = [[0usize; 4]; 3];

    for event in plan.events() {
        let t = class_idx(event.kind.class());
        per_class[t].injected += 1;
        let first = verdicts
            .iter()
            .filter(|v| v.overlaps(event.port, event.start_index, event.length))
            .min_by_key(|v| v.start_index);
        match first {
            Some(v) => {
                per_class[t].detected += 1;
                confusion[t][class_idx(v.class)] += 1;
                if v.class == event.kind.class() {
                    per_class[t].correct += 1;
                }
            }
            None => confusion[t][3] += 1,
        }
    }

    let false_positives = verdicts
        .iter()
        .filter(|v| {
            !plan
                .events()
                .iter()
                .any(|e| v.overlaps(e.port, e.start_index, e.length))
        })
        .count();

    DetectionReport {
        per_class,
        confusion,
        false_positives,
        verdict_count: verdicts.len(),
    }
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

const VERDICTS_HEADER: &str = "port,start_index,length,class";

/// Write verdicts as CSV.
pub fn write_verdicts_csv(path: &Path, verdicts: &[Verdict]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{VERDICTS_HEADER}").map_err(io_err)?;
    for v in verdicts {
        writeln!(
            w,
            "{},{},{},{}",
            v.port.label(),
            v.start_index,
            v.length,
            v.class.label()
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Read verdicts written by [`write_verdicts_csv`].
pub fn read_verdicts_csv(path: &Path) -> Result<Vec<Verdict>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut verdicts = Vec::new();
    let mut saw_header = false;
    let mut line_no = 0usize;
    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != VERDICTS_HEADER {
                return Err(Error::parse(path, line_no, format!("unexpected header '{line}'")));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let bad = |what: &str, raw: &str| Error::parse(path, line_no, format!("bad {what} '{raw}'"));
        verdicts.push(Verdict {
            port: fields[0].parse().map_err(|_| bad("port", fields[0]))?,
            start_index: fields[1].parse().map_err(|_| bad("start_index", fields[1]))?,
            length: fields[2].parse().map_err(|_| bad("length", fields[2]))?,
            class: fields[3].parse().map_err(|_| bad("class", fields[3]))?,
        });
    }
    if !saw_header {
        return Err(Error::EmptyInput(format!(
            "{}: empty verdicts file",
            path.display()
        )));
    }
    Ok(verdicts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spoof::{SpoofEvent, SpoofKind};

    fn series(values: Vec<f64>) -> ResidualSeries {
        ResidualSeries::new(PortId::Ev0Terra53, values).unwrap()
    }

    fn cfg(threshold: f64) -> DetectorConfig {
        DetectorConfig::with_threshold(threshold)
    }

    #[test]
    fn residuals_are_absolute_errors() {
        let delta = DeltaSocSeries {
            port: PortId::Ev0Terra53,
            values: vec![0.059, 0.05, 0.05],
            transition_mask: vec![false; 3],
        };
        let r = compute_residuals(&delta, &[0.05, 0.05, 0.06]).unwrap();
        assert!((r.values()[0] - 0.009).abs() < 1e-15);
        assert_eq!(r.values()[1], 0.0);
        assert!((r.values()[2] - 0.01).abs() < 1e-15);

        assert!(matches!(
            compute_residuals(&delta, &[0.0; 2]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(ResidualSeries::new(PortId::Ev0Terra53, vec![-0.1]).is_err());
        assert!(ResidualSeries::new(PortId::Ev0Terra53, vec![f64::NAN]).is_err());
    }

    #[test]
    fn quiet_series_yields_no_verdicts() {
        let r = series(vec![1e-9; 100]);
        let verdicts = detect(&r, &cfg(1e-6), &vec![false; 100]).unwrap();
        assert!(verdicts.is_empty());
    }

    #[test]
    fn window_at_threshold_confirms_once() {
        // Exactly at the threshold counts (≥, not >).
        let mut values = vec![0.0; 30];
        for v in values.iter_mut().skip(8).take(10) {
            *v = 1e-3;
        }
        let r = series(values);
        let verdicts = detect(&r, &cfg(1e-3), &vec![false; 30]).unwrap();
        assert_eq!(verdicts.len(), 1);
        assert_eq!(verdicts[0].start_index, 8);
        assert_eq!(verdicts[0].length, 10);
        assert_eq!(verdicts[0].class, SpoofClass::DecimalShift);
    }

    #[test]
    fn short_excursions_never_confirm() {
        // 5 hot samples, then quiet: candidate dies at sample 5.
        let mut values = vec![0.0; 40];
        for v in values.iter_mut().skip(10).take(5) {
            *v = 0.02;
        }
        let r = series(values);
        assert!(detect(&r, &cfg(1e-3), &vec![false; 40]).unwrap().is_empty());
    }

    #[test]
    fn masked_sample_aborts_candidate() {
        let values = vec![0.01; 17];
        let mut mask = vec![false; 17];
        mask[7] = true;
        // Hot everywhere, but the boundary at 7 kills [0..10); restart at 8
        // leaves only 9 samples — nothing confirms.
        let r = series(values.clone());
        assert!(detect(&r, &cfg(1e-3), &mask).unwrap().is_empty());

        // One more sample and the post-boundary window fits.
        let r18 = series(vec![0.01; 18]);
        let mut mask18 = vec![false; 18];
        mask18[7] = true;
        let verdicts = detect(&r18, &cfg(1e-3), &mask18).unwrap();
        assert_eq!(verdicts.len(), 1);
        assert_eq!(verdicts[0].start_index, 8);
    }

    #[test]
    fn scan_resumes_after_confirmed_window() {
        let r = series(vec![0.01; 25]);
        let verdicts = detect(&r, &cfg(1e-3), &vec![false; 25]).unwrap();
        assert_eq!(verdicts.len(), 2);
        assert_eq!(
            (verdicts[0].start_index, verdicts[1].start_index),
            (0, 10),
            "confirmed windows must tile without overlap"
        );
    }

    #[test]
    fn flat_window_reads_as_decimal_shift() {
        let c = cfg(1e-3);
        let window = vec![0.009; 10];
        assert_eq!(classify_window(&window, &c).unwrap(), SpoofClass::DecimalShift);
    }

    #[test]
    fn ramp_window_reads_as_incremental() {
        let c = cfg(1e-3);
        let window: Vec<f64> = (1..=10).map(|j| j as f64 * 0.01).collect();
        assert_eq!(classify_window(&window, &c).unwrap(), SpoofClass::Incremental);
    }

    #[test]
    fn structureless_window_reads_as_random() {
        let c = cfg(1e-3);
        let window = vec![
            0.004, 0.009, 0.002, 0.007, 0.005, 0.008, 0.003, 0.006, 0.009, 0.002,
        ];
        assert_eq!(classify_window(&window, &c).unwrap(), SpoofClass::Random);
    }

    #[test]
    fn classification_precedence_prefers_flat_over_zero_step_ramp() {
        // A perfectly flat window is also a zero-step ramp; flat wins.
        let c = cfg(1e-4);
        let window = vec![0.005; 10];
        assert_eq!(classify_window(&window, &c).unwrap(), SpoofClass::DecimalShift);

        // Just past eps_eq but with constant steps: a ramp.
        let mut ramp = vec![0.005; 10];
        for (j, v) in ramp.iter_mut().enumerate() {
            *v += j as f64 * 2e-4;
        }
        assert_eq!(classify_window(&ramp, &c).unwrap(), SpoofClass::Incremental);
    }

    #[test]
    fn classify_rejects_wrong_window_length() {
        let c = cfg(1e-3);
        assert!(matches!(
            classify_window(&[0.01; 9], &c),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn detector_config_is_validated() {
        assert!(cfg(0.0).validate().is_err());
        assert!(cfg(-1.0).validate().is_err());
        assert!(cfg(f64::NAN).validate().is_err());
        let mut c = cfg(1e-3);
        c.max_iter = 1;
        assert!(c.validate().is_err());
        c = cfg(1e-3);
        c.eps_eq = 0.0;
        assert!(c.validate().is_err());
        assert!(cfg(1e-3).validate().is_ok());
    }

    #[test]
    fn calibration_applies_floor_and_policies() {
        // Numerically exact predictor: all-zero residuals hit the floor.
        let zeros = series(vec![0.0; 1000]);
        assert_eq!(
            calibrate_threshold(&zeros, ThresholdPolicy::MeanPlusSixSigma).unwrap(),
            THRESHOLD_FLOOR
        );

        // Constant 1e-4 residuals: σ ≈ 0 so mean+6σ ≈ 1e-4 (up to the
        // rounding the 500-term mean accumulates).
        let flat = series(vec![1e-4; 500]);
        let t = calibrate_threshold(&flat, ThresholdPolicy::MeanPlusSixSigma).unwrap();
        assert!((t - 1e-4).abs() < 1e-15, "got {t}");

        // Linear 1/n … 1: the 1−1e-4 quantile picks the 9999th of 10000.
        let linear = series((1..=10_000).map(|i| i as f64 / 10_000.0).collect());
        let q = calibrate_threshold(&linear, ThresholdPolicy::UpperQuantile).unwrap();
        assert!((q - 0.9999).abs() < 1e-12, "got {q}");

        assert!(matches!(
            calibrate_threshold(&series(vec![]), ThresholdPolicy::MeanPlusSixSigma),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn calibration_tracks_residual_scale() {
        let small = series(vec![1e-5, 2e-5, 1.5e-5, 1.2e-5]);
        let large = series(vec![1e-2, 2e-2, 1.5e-2, 1.2e-2]);
        let ts = calibrate_threshold(&small, ThresholdPolicy::MeanPlusSixSigma).unwrap();
        let tl = calibrate_threshold(&large, ThresholdPolicy::MeanPlusSixSigma).unwrap();
        assert!(tl > ts * 100.0, "threshold must scale with the noise floor");
    }

    fn plan_of(events: Vec<SpoofEvent>) -> SpoofPlan {
        SpoofPlan::new("eval-test".into(), events).unwrap()
    }

    fn event(port: PortId, start: usize, kind: SpoofKind) -> SpoofEvent {
        SpoofEvent {
            port,
            start_index: start,
            length: 10,
            kind,
            seed: 0,
        }
    }

    fn verdict(port: PortId, start: usize, class: SpoofClass) -> Verdict {
        Verdict {
            port,
            start_index: start,
            length: 10,
            class,
        }
    }

    #[test]
    fn evaluate_scores_hits_misses_and_false_positives() {
        let plan = plan_of(vec![
            event(PortId::Ev0Terra53, 100, SpoofKind::DecimalShift { offset: 0.005 }),
            event(PortId::Ev0Terra53, 200, SpoofKind::IncrementalArray { start: 0.01, step: 0.01 }),
            event(PortId::Ev0Terra53, 300, SpoofKind::Random { lo: -0.01, hi: 0.01 }),
            event(PortId::Ev3TerraHp, 100, SpoofKind::DecimalShift { offset: -0.004 }),
        ]);
        let verdicts = vec![
            // Exact hit.
            verdict(PortId::Ev0Terra53, 100, SpoofClass::DecimalShift),
            // Overlapping but misclassified.
            verdict(PortId::Ev0Terra53, 205, SpoofClass::Random),
            // Random event at 300: missed (no verdict).
            // Wrong port for the Ev3 event — same indices as its window.
            verdict(PortId::Ev2TerraHpA, 100, SpoofClass::DecimalShift),
        ];
        let report = evaluate(&verdicts, &plan);

        let decimal = report.outcome(SpoofClass::DecimalShift);
        assert_eq!((decimal.injected, decimal.detected, decimal.correct), (2, 1, 1));
        let incr = report.outcome(SpoofClass::Incremental);
        assert_eq!((incr.injected, incr.detected, incr.correct), (1, 1, 0));
        let random = report.outcome(SpoofClass::Random);
        assert_eq!((random.injected, random.detected, random.correct), (1, 0, 0));

        assert_eq!(report.false_positives, 1); // the Ev2 verdict matches nothing
        assert_eq!(report.verdict_count, 3);
        assert_eq!(report.overall_accuracy(), Some(0.25));
        assert_eq!(report.overall_detection_rate(), Some(0.5));

        // Confusion: decimal row = [1 correct, 0, 0, 1 missed];
        // incremental row = [0, 0, 1 (called random), 0 missed].
        assert_eq!(report.confusion[0], [1, 0, 0, 1]);
        assert_eq!(report.confusion[1], [0, 0, 1, 0]);
        assert_eq!(report.confusion[2], [0, 0, 0, 1]);
    }

    #[test]
    fn evaluate_uses_first_overlapping_verdict_for_class() {
        let plan = plan_of(vec![event(
            PortId::Ev0Terra53,
            100,
            SpoofKind::DecimalShift { offset: 0.005 },
        )]);
        let verdicts = vec![
            verdict(PortId::Ev0Terra53, 105, SpoofClass::DecimalShift),
            verdict(PortId::Ev0Terra53, 95, SpoofClass::Random),
        ];
        let report = evaluate(&verdicts, &plan);
        let o = report.outcome(SpoofClass::DecimalShift);
        assert_eq!((o.detected, o.correct), (1, 0), "earliest verdict (random) decides");
    }

    #[test]
    fn evaluate_with_empty_plan_reports_not_applicable() {
        let plan = plan_of(vec![]);
        let verdicts = vec![verdict(PortId::Ev0Terra53, 5, SpoofClass::Random)];
        let report = evaluate(&verdicts, &plan);
        assert_eq!(report.overall_accuracy(), None);
        assert_eq!(report.overall_detection_rate(), None);
        for class in SpoofClass::ALL {
            assert_eq!(report.outcome(class).accuracy(), None);
        }
        assert_eq!(report.false_positives, 1);
        let text = report.render_text();
        assert!(text.contains("n/a"), "report must spell out n/a:\n{text}");
    }

    #[test]
    fn report_text_and_confusion_csv_are_complete() {
        let plan = plan_of(vec![event(
            PortId::Ev0Terra53,
            50,
            SpoofKind::DecimalShift { offset: 0.005 },
        )]);
        let verdicts = vec![verdict(PortId::Ev0Terra53, 50, SpoofClass::DecimalShift)];
        let report = evaluate(&verdicts, &plan);
        let text = report.render_text();
        assert!(text.contains("false positives: 0"));
        assert!(text.contains("100.00%"));
        let csv = report.confusion_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("true_class,decimal_shift,incremental,random,missed"));
        assert!(csv.contains("decimal_shift,1,0,0,0"));
    }

    #[test]
    fn verdicts_csv_round_trips() {
        let verdicts = vec![
            verdict(PortId::Ev0Terra53, 123, SpoofClass::DecimalShift),
            verdict(PortId::Ev2TerraHpB, 4567, SpoofClass::Incremental),
            verdict(PortId::Ev3TerraHp, 89, SpoofClass::Random),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("verdicts.csv");
        write_verdicts_csv(&path, &verdicts).unwrap();
        assert_eq!(read_verdicts_csv(&path).unwrap(), verdicts);

        std::fs::write(&path, "port,start_index,length,class\nev0_terra53,1,10,bogus\n").unwrap();
        assert!(matches!(read_verdicts_csv(&path), Err(Error::Parse { .. })));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            /// Raising the threshold never yields more verdicts.
            #[test]
            fn verdict_count_is_monotone_in_threshold(
                values in proptest::collection::vec(0.0f64..0.02, 20..120),
                t_lo in 1e-4f64..5e-3,
                bump in 1e-4f64..1e-2,
            ) {
                let n = values.len();
                let r = ResidualSeries::new(PortId::Ev0Terra53, values).unwrap();
                let mask = vec![false; n];
                let low = detect(&r, &cfg(t_lo), &mask).unwrap();
                let high = detect(&r, &cfg(t_lo + bump), &mask).unwrap();
                prop_assert!(high.len() <= low.len());
            }

            /// No verdict window ever covers a masked sample, and every
            /// covered residual is at or above the threshold.
            #[test]
            fn verdicts_cover_only_hot_unmasked_samples(
                values in proptest::collection::vec(0.0f64..0.02, 30..150),
                mask_bits in proptest::collection::vec(proptest::bool::weighted(0.1), 30..150),
                threshold in 1e-4f64..5e-3,
            ) {
                let n = values.len().min(mask_bits.len());
                let values = values[..n].to_vec();
                let mask = mask_bits[..n].to_vec();
                let r = ResidualSeries::new(PortId::Ev0Terra53, values.clone()).unwrap();
                for v in detect(&r, &cfg(threshold), &mask).unwrap() {
                    for j in v.start_index..v.start_index + v.length {
                        prop_assert!(!mask[j], "verdict covers masked sample {j}");
                        prop_assert!(values[j] >= threshold);
                    }
                }
            }
        }
    }
}
