//! Per-port charge-rate regression.
//!
//! Predicts one port's per-second SoC movement (ΔSoC) from the station's
//! current measurements. The feature set is deliberately the *raw* bus
//! telemetry — utility current, storage current, and all six port currents —
//! which is exactly collinear by the bus current balance. That collinearity
//! is the point: plain least squares on these features is numerically
//! ill-posed, while a small ridge penalty makes the solve stable without
//! dropping any measurement.
//!
//! The closed form is solved on standardized features and a centered target:
//! `(ZᵀZ + αI)β = Zᵀy`, with `α > 0` via Cholesky (the penalized Gram matrix
//! is then positive definite by construction) and `α = 0` via Gaussian
//! elimination — the honest least-squares baseline, which is allowed to fail
//! on an exactly singular system.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{solve_partial_pivot, solve_spd, Matrix};
use crate::scaling::{standardize, Standardizer};
use crate::telemetry::{compute_delta_soc, PortId, TelemetrySeries};
use crate::textio::fmt_f64;

/// Two mean-fold-MSE values closer than this are treated as a tie, resolved
/// toward the smaller (more weakly regularized) penalty.
pub const CV_TIE_TOL: f64 = 1e-15;

// ---------------------------------------------------------------------------
// Design matrix
// ---------------------------------------------------------------------------

/// A regression dataset: named feature columns plus the aligned target.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    feature_names: Vec<String>,
    x: Matrix,
    y: Vec<f64>,
}

impl DesignMatrix {
    /// # Errors
    /// Row/target counts and name/column counts must agree; every entry must
    /// be finite.
    pub fn new(feature_names: Vec<String>, x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.cols() != feature_names.len() {
            return Err(Error::ShapeMismatch {
                what: "feature names vs matrix columns".into(),
                expected: x.cols(),
                actual: feature_names.len(),
            });
        }
        if x.rows() != y.len() {
            return Err(Error::ShapeMismatch {
                what: "target length vs matrix rows".into(),
                expected: x.rows(),
                actual: y.len(),
            });
        }
        for r in 0..x.rows() {
            if x.row(r).iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("non-finite feature in row {r}")));
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite target value".into()));
        }
        Ok(DesignMatrix {
            feature_names,
            x,
            y,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &Matrix {
        &self.x
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn n_samples(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Copy with the rows where `drop[r]` is true removed (used to exclude
    /// session-boundary samples from training).
    pub fn drop_rows(&self, drop: &[bool]) -> Result<DesignMatrix> {
        if drop.len() != self.n_samples() {
            return Err(Error::ShapeMismatch {
                what: "drop mask vs rows".into(),
                expected: self.n_samples(),
                actual: drop.len(),
            });
        }
        let keep: Vec<usize> = (0..self.n_samples()).filter(|r| !drop[*r]).collect();
        let mut x = Matrix::zeros(keep.len(), self.x.cols());
        let mut y = Vec::with_capacity(keep.len());
        for (out_r, src_r) in keep.iter().enumerate() {
            for c in 0..self.x.cols() {
                x.set(out_r, c, self.x.get(*src_r, c));
            }
            y.push(self.y[*src_r]);
        }
        DesignMatrix::new(self.feature_names.clone(), x, y)
    }
}

/// Feature-set options for [`build_design`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignOptions {
    /// Include the target port's charging-status flag as a 0/1 feature so the
    /// model can learn the idle-port regime explicitly. On by default;
    /// disable to train on currents alone.
    pub include_status: bool,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            include_status: true,
        }
    }
}

/// Build the regression dataset for one port from a telemetry series.
///
/// Row `t` holds the measurements of record `t` — `[i_pcc, i_bess]`, the six
/// port currents, and optionally the port's status flag — and its target is
/// `ΔSoC(t) = soc(t+1) − soc(t)`. The returned mask flags rows whose sample
/// spans a session boundary (arrival/departure); training should drop those
/// via [`DesignMatrix::drop_rows`], while residual scans keep them aligned.
pub fn build_design(
    series: &TelemetrySeries,
    port: PortId,
    options: DesignOptions,
) -> Result<(DesignMatrix, Vec<bool>)> {
    let delta = compute_delta_soc(series, port)?;
    let records = series.records();
    let mut names: Vec<String> = vec!["i_pcc".into(), "i_bess".into()];
    names.extend(PortId::ALL.iter().map(|p| format!("i_{}", p.label())));
    if options.include_status {
        names.push(format!("cs_{}", port.label()));
    }
    let p = names.len();
    let n = delta.len();
    let mut x = Matrix::zeros(n, p);
    for t in 0..n {
        let rec = &records[t];
        x.set(t, 0, rec.i_pcc);
        x.set(t, 1, rec.i_bess);
        for (k, reading) in rec.ports.iter().enumerate() {
            x.set(t, 2 + k, reading.i_ev);
        }
        if options.include_status {
            x.set(t, 8, if rec.port(port).cs { 1.0 } else { 0.0 });
        }
    }
    let design = DesignMatrix::new(names, x, delta.values)?;
    Ok((design, delta.transition_mask))
}

// ---------------------------------------------------------------------------
// Closed-form solve and model
// ---------------------------------------------------------------------------

/// Solve the penalized normal equations `(ZᵀZ + αI)β = Zᵀy` on data that is
/// *already* standardized/centered.
///
/// This is the raw closed form; [`fit_ridge`] wraps it with standardization.
/// With a single feature it reduces to `β = Σzy / (Σz² + α)`.
///
/// # Errors
/// * `alpha < 0` or non-finite → domain error.
/// * Row/length mismatch → shape error.
/// * Singular system (possible only at `alpha = 0`) → solver error advising
///   a positive penalty.
pub fn solve_ridge(z: &Matrix, y_centered: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("penalty alpha must be >= 0, got {alpha}")));
    }
    if z.rows() != y_centered.len() {
        return Err(Error::ShapeMismatch {
            what: "target length vs feature rows".into(),
            expected: z.rows(),
            actual: y_centered.len(),
        });
    }
    if z.rows() == 0 {
        return Err(Error::EmptyInput("cannot fit on zero samples".into()));
    }
    let gram = z.gram();
    let rhs = z.transpose_vec_mul(y_centered)?;
    solve_penalized_gram(gram, &rhs, alpha)
}

/// Shared solver core: adds `alpha` to the Gram diagonal and dispatches on
/// the penalty (`alpha > 0` → Cholesky on the then-SPD system; `alpha = 0` →
/// partial-pivot elimination, the plain least-squares path).
fn solve_penalized_gram(mut gram: Matrix, rhs: &[f64], alpha: f64) -> Result<Vec<f64>> {
    for j in 0..gram.cols() {
        gram.set(j, j, gram.get(j, j) + alpha);
    }
    if alpha > 0.0 {
        solve_spd(&gram, rhs)
    } else {
        solve_partial_pivot(&gram, rhs)
    }
}

/// A fitted per-port charge-rate model.
///
/// Immutable once fitted; prediction standardizes incoming features with the
/// training statistics, applies the coefficients, and adds the training
/// target mean back.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    feature_names: Vec<String>,
    standardizer: Standardizer,
    coefficients: Vec<f64>,
    alpha: f64,
    target_mean: f64,
}

impl RidgeModel {
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    /// Coefficients in standardized feature space, one per feature.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    /// Predict targets for a feature matrix (same column layout as training).
    ///
    /// # Errors
    /// Column count must match the model's feature count.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.coefficients.len() {
            return Err(Error::ShapeMismatch {
                what: "prediction features vs model coefficients".into(),
                expected: self.coefficients.len(),
                actual: x.cols(),
            });
        }
        let z = self.standardizer.transform(x)?;
        let mut out = z.vec_mul(&self.coefficients)?;
        for v in &mut out {
            *v += self.target_mean;
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("prediction produced non-finite value".into()));
        }
        Ok(out)
    }
}

/// Fit the closed-form model at a fixed penalty.
///
/// Features are standardized internally (statistics fitted on this data) and
/// the target is centered; the intercept is carried by `target_mean` rather
/// than an unpenalized column — equivalent on standardized data and keeps
/// the closed form literal.
pub fn fit_ridge(design: &DesignMatrix, alpha: f64) -> Result<RidgeModel> {
    let (standardizer, z) = standardize(design.features(), design.features())?;
    let y = design.targets();
    let target_mean = y.iter().sum::<f64>() / y.len() as f64;
    let y_centered: Vec<f64> = y.iter().map(|v| v - target_mean).collect();
    let coefficients = solve_ridge(&z, &y_centered, alpha)?;
    Ok(RidgeModel {
        feature_names: design.feature_names().to_vec(),
        standardizer,
        coefficients,
        alpha,
        target_mean,
    })
}

// ---------------------------------------------------------------------------
// Scores
// ---------------------------------------------------------------------------

/// Mean squared error.
///
/// # Errors
/// Lengths must match and be at least 1.
pub fn mse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::ShapeMismatch {
            what: "mse operands".into(),
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput("mse of zero samples".into()));
    }
    let sum: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / y_true.len() as f64)
}

/// MSE of the constant predictor that always answers the training-target
/// mean — the weakest sensible baseline for the report.
pub fn mean_predictor_mse(train_targets: &[f64], test_targets: &[f64]) -> Result<f64> {
    if train_targets.is_empty() {
        return Err(Error::EmptyInput("mean baseline needs training targets".into()));
    }
    let mean = train_targets.iter().sum::<f64>() / train_targets.len() as f64;
    let constant = vec![mean; test_targets.len()];
    mse(test_targets, &constant)
}

// ---------------------------------------------------------------------------
// Grid-search cross-validation
// ---------------------------------------------------------------------------

/// Cross-validation settings for the penalty search.
#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    /// Candidate penalties, strictly ascending.
    pub alpha_grid: Vec<f64>,
    /// Fold count; every fold is used as validation exactly once.
    pub folds: usize,
    /// Seed for the single shuffle that precedes fold assignment.
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            alpha_grid: default_alpha_grid(),
            folds: 20,
            seed: 0,
        }
    }
}

/// Default penalty grid: 30 logarithmically spaced points spanning
/// [1e-3, 1e3], plus 10.05 — a value of historical interest for this plant
/// class — inserted in order.
pub fn default_alpha_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..30)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 29.0))
        .collect();
    grid.push(10.05);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}

/// Outcome of a [`grid_search_cv`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// The grid that was searched, ascending.
    pub alpha_grid: Vec<f64>,
    /// `fold_mse[a][f]`: validation MSE of grid point `a` on fold `f`.
    pub fold_mse: Vec<Vec<f64>>,
    /// Winning penalty (minimum mean fold MSE; ties to the smaller value).
    pub chosen_alpha: f64,
    /// MSE of the final refit model on all supplied data.
    pub train_mse: f64,
    /// Held-out MSE, filled in by callers that evaluate on separate data.
    pub test_mse: Option<f64>,
}

impl FitReport {
    /// Mean validation MSE per grid point, in grid order.
    pub fn mean_fold_mse(&self) -> Vec<f64> {
        self.fold_mse
            .iter()
            .map(|f| f.iter().sum::<f64>() / f.len() as f64)
            .collect()
    }
}

/// Grid-search the penalty by k-fold cross-validation, then refit on all
/// data at the winner.
///
/// Folds are contiguous blocks of one seeded shuffle of the sample indices;
/// within each fold, standardization statistics and the target mean come
/// from that fold's training part only. The expensive per-fold quantities
/// (standardized Gram matrix and moment vector) are built once and shared by
/// every grid point, so the grid adds only tiny `p × p` solves.
///
/// # Errors
/// Config errors: empty/unsorted grid, negative penalties, fewer than 2
/// folds, or more folds than samples.
pub fn grid_search_cv(design: &DesignMatrix, cv: &CvConfig) -> Result<(RidgeModel, FitReport)> {
    validate_cv(design, cv)?;
    let n = design.n_samples();
    let p = design.n_features();
    let x = design.features();
    let y = design.targets();

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cv.seed);
    order.shuffle(&mut rng);

    let k = cv.folds;
    let mut fold_mse = vec![Vec::with_capacity(k); cv.alpha_grid.len()];
    for fold in 0..k {
        let lo = fold * n / k;
        let hi = (fold + 1) * n / k;
        let val_idx = &order[lo..hi];

        // Materialize this fold's training rows.
        let train_count = n - val_idx.len();
        let mut train_x = Matrix::zeros(train_count, p);
        let mut train_y = Vec::with_capacity(train_count);
        let mut out_r = 0usize;
        for (pos, src) in order.iter().enumerate() {
            if pos >= lo && pos < hi {
                continue;
            }
            for c in 0..p {
                train_x.set(out_r, c, x.get(*src, c));
            }
            train_y.push(y[*src]);
            out_r += 1;
        }

        let (scaler, z) = standardize(&train_x, &train_x)?;
        let y_mean = train_y.iter().sum::<f64>() / train_y.len() as f64;
        let y_centered: Vec<f64> = train_y.iter().map(|v| v - y_mean).collect();
        let gram = z.gram();
        let rhs = z.transpose_vec_mul(&y_centered)?;

        let means = scaler.means().to_vec();
        let scales = scaler.scales().to_vec();
        for (a, alpha) in cv.alpha_grid.iter().enumerate() {
            let beta = solve_penalized_gram(gram.clone(), &rhs, *alpha)?;
            // Validation MSE, transforming each held-out row on the fly.
            let mut sum = 0.0f64;
            for src in val_idx {
                let mut pred = y_mean;
                for c in 0..p {
                    pred += (x.get(*src, c) - means[c]) / scales[c] * beta[c];
                }
                let err = pred - y[*src];
                sum += err * err;
            }
            fold_mse[a].push(sum / val_idx.len() as f64);
        }
    }

    // Winner: minimum mean fold MSE; ties (within CV_TIE_TOL) keep the
    // earlier — smaller — penalty.
    let mut chosen = 0usize;
    let mut best = f64::INFINITY;
    for (a, scores) in fold_mse.iter().enumerate() {
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        if mean < best - CV_TIE_TOL {
            best = mean;
            chosen = a;
        }
    }
    let chosen_alpha = cv.alpha_grid[chosen];

    let model = fit_ridge(design, chosen_alpha)?;
    let train_pred = model.predict(design.features())?;
    let train_mse = mse(design.targets(), &train_pred)?;
    Ok((
        model,
        FitReport {
            alpha_grid: cv.alpha_grid.clone(),
            fold_mse,
            chosen_alpha,
            train_mse,
            test_mse: None,
        },
    ))
}

fn validate_cv(design: &DesignMatrix, cv: &CvConfig) -> Result<()> {
    if cv.alpha_grid.is_empty() {
        return Err(Error::Config("penalty grid is empty".into()));
    }
    for a in &cv.alpha_grid {
        if !(a.is_finite() && *a >= 0.0) {
            return Err(Error::Config(format!("penalty {a} outside [0, ∞)")));
        }
    }
    for w in cv.alpha_grid.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Config("penalty grid must be strictly ascending".into()));
        }
    }
    if cv.folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {}", cv.folds)));
    }
    if cv.folds > design.n_samples() {
        return Err(Error::Config(format!(
            "{} folds exceed {} samples",
            cv.folds,
            design.n_samples()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

const MODEL_FORMAT: &str = "charge-rate-model-v1";

/// Write a fitted model as a small text file: one `key = value` line per
/// scalar, comma-joined lists for the per-feature vectors, every float at
/// 17 significant digits (bit-exact round trip).
pub fn save_model(path: &Path, model: &RidgeModel) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    let join = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",");
    writeln!(w, "format = {MODEL_FORMAT}").map_err(io_err)?;
    writeln!(w, "alpha = {}", fmt_f64(model.alpha)).map_err(io_err)?;
    writeln!(w, "target_mean = {}", fmt_f64(model.target_mean)).map_err(io_err)?;
    writeln!(w, "features = {}", model.feature_names.join(",")).map_err(io_err)?;
    writeln!(w, "means = {}", join(model.standardizer.means())).map_err(io_err)?;
    writeln!(w, "scales = {}", join(model.standardizer.scales())).map_err(io_err)?;
    writeln!(w, "coefficients = {}", join(&model.coefficients)).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Read a model written by [`save_model`], re-validating all invariants.
pub fn load_model(path: &Path) -> Result<RidgeModel> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = Vec::new();
    for line in reader.lines() {
        lines.push(line.map_err(|e| Error::io(path, e))?);
    }
    let take = |line_no: usize, key: &str| -> Result<String> {
        let line = lines
            .get(line_no)
            .ok_or_else(|| Error::parse(path, line_no + 1, format!("missing '{key}' line")))?;
        line.strip_prefix(&format!("{key} = "))
            .map(str::to_owned)
            .ok_or_else(|| {
                Error::parse(path, line_no + 1, format!("expected '{key} = ...', got '{line}'"))
            })
    };
    let format = take(0, "format")?;
    if format != MODEL_FORMAT {
        return Err(Error::parse(path, 1, format!("unsupported model format '{format}'")));
    }
    let parse_f64 = |line_no: usize, raw: &str| -> Result<f64> {
        raw.parse::<f64>()
            .map_err(|_| Error::parse(path, line_no + 1, format!("bad float '{raw}'")))
    };
    let alpha = parse_f64(1, &take(1, "alpha")?)?;
    let target_mean = parse_f64(2, &take(2, "target_mean")?)?;
    let feature_names: Vec<String> = take(3, "features")?.split(',').map(str::to_owned).collect();
    let parse_vec = |line_no: usize, raw: String| -> Result<Vec<f64>> {
        raw.split(',').map(|f| parse_f64(line_no, f)).collect()
    };
    let means = parse_vec(4, take(4, "means")?)?;
    let scales = parse_vec(5, take(5, "scales")?)?;
    let coefficients = parse_vec(6, take(6, "coefficients")?)?;
    if !(alpha >= 0.0) {
        return Err(Error::parse(path, 2, "alpha must be >= 0"));
    }
    if feature_names.len() != coefficients.len() {
        return Err(Error::parse(
            path,
            7,
            format!(
                "{} coefficients for {} features",
                coefficients.len(),
                feature_names.len()
            ),
        ));
    }
    if !target_mean.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::parse(path, 7, "non-finite model parameter"));
    }
    let standardizer = Standardizer::from_parts(means, scales)?;
    if standardizer.means().len() != feature_names.len() {
        return Err(Error::parse(path, 5, "means/features length mismatch"));
    }
    Ok(RidgeModel {
        feature_names,
        standardizer,
        coefficients,
        alpha,
        target_mean,
    })
}

/// Write a [`FitReport`] as text: `key = value` header, then one
/// `alpha,fold,mse` row per grid point × fold.
pub fn save_fit_report(path: &Path, port_label: &str, report: &FitReport) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "port = {port_label}").map_err(io_err)?;
    writeln!(w, "folds = {}", report.fold_mse.first().map_or(0, Vec::len)).map_err(io_err)?;
    writeln!(w, "chosen_alpha = {}", fmt_f64(report.chosen_alpha)).map_err(io_err)?;
    writeln!(w, "train_mse = {}", fmt_f64(report.train_mse)).map_err(io_err)?;
    match report.test_mse {
        Some(v) => writeln!(w, "test_mse = {}", fmt_f64(v)).map_err(io_err)?,
        None => writeln!(w, "test_mse = none").map_err(io_err)?,
    }
    writeln!(w, "alpha,fold,mse").map_err(io_err)?;
    for (alpha, scores) in report.alpha_grid.iter().zip(&report.fold_mse) {
        for (fold, score) in scores.iter().enumerate() {
            writeln!(w, "{},{fold},{}", fmt_f64(*alpha), fmt_f64(*score)).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// Read a report written by [`save_fit_report`]; returns the port label too.
pub fn load_fit_report(path: &Path) -> Result<(String, FitReport)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let lines: Vec<String> = reader
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;
    let take = |line_no: usize, key: &str| -> Result<String> {
        let line = lines
            .get(line_no)
            .ok_or_else(|| Error::parse(path, line_no + 1, format!("missing '{key}' line")))?;
        line.strip_prefix(&format!("{key} = "))
            .map(str::to_owned)
            .ok_or_else(|| {
                Error::parse(path, line_no + 1, format!("expected '{key} = ...', got '{line}'"))
            })
    };
    let port = take(0, "port")?;
    let folds: usize = take(1, "folds")?
        .parse()
        .map_err(|_| Error::parse(path, 2, "bad fold count"))?;
    let parse_f64 = |line_no: usize, raw: &str| -> Result<f64> {
        raw.parse::<f64>()
            .map_err(|_| Error::parse(path, line_no + 1, format!("bad float '{raw}'")))
    };
    let chosen_alpha = parse_f64(2, &take(2, "chosen_alpha")?)?;
    let train_mse = parse_f64(3, &take(3, "train_mse")?)?;
    let test_raw = take(4, "test_mse")?;
    let test_mse = if test_raw == "none" {
        None
    } else {
        Some(parse_f64(4, &test_raw)?)
    };
    if lines.get(5).map(String::as_str) != Some("alpha,fold,mse") {
        return Err(Error::parse(path, 6, "expected 'alpha,fold,mse' table header"));
    }
    let mut alpha_grid = Vec::new();
    let mut fold_mse: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in lines.iter().enumerate().skip(6) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, line_no + 1, "expected alpha,fold,mse"));
        }
        let alpha = parse_f64(line_no, fields[0])?;
        let fold: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(path, line_no + 1, "bad fold index"))?;
        let score = parse_f64(line_no, fields[2])?;
        if alpha_grid.last() != Some(&alpha) {
            alpha_grid.push(alpha);
            fold_mse.push(Vec::with_capacity(folds));
        }
        let row = fold_mse.last_mut().unwrap();
        if row.len() != fold {
            return Err(Error::parse(path, line_no + 1, "fold rows out of order"));
        }
        row.push(score);
    }
    if fold_mse.iter().any(|row| row.len() != folds) {
        return Err(Error::parse(path, lines.len(), "incomplete fold table"));
    }
    Ok((
        port,
        FitReport {
            alpha_grid,
            fold_mse,
            chosen_alpha,
            train_mse,
            test_mse,
        },
    ))
}
