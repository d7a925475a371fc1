//! SoC-spoofing attack injection.
//!
//! Three tampering styles are modeled on a port's ΔSoC stream, each with a
//! distinct fingerprint for the detector to recognize:
//!
//! * **Decimal shift** — a constant offset is *added* to every sample in the
//!   window; the residual trace is flat.
//! * **Incremental array** — the window is *replaced* by an arithmetic
//!   progression; the residual trace has constant first differences.
//! * **Random** — the window is *replaced* by i.i.d. uniform draws on a
//!   10⁻² scale; the residual trace is structureless.
//!
//! Injection windows are chosen away from session boundaries (arrival and
//! departure spikes) so that attack evidence is never conflated with the
//! plant's own discontinuities; a guard band keeps a configurable distance
//! from every boundary sample.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::telemetry::{DeltaSocSeries, PortId};
use crate::textio::fmt_f64;

/// Largest legal decimal-shift offset magnitude, percent.
pub const MAX_DECIMAL_OFFSET: f64 = 0.009;
/// Random spoofing draws must stay inside ±this bound, percent.
pub const MAX_RANDOM_BOUND: f64 = 0.01;

/// Attack taxonomy (the classes the detector reports).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpoofClass {
    DecimalShift,
    Incremental,
    Random,
}

impl SpoofClass {
    pub const ALL: [SpoofClass; 3] = [
        SpoofClass::DecimalShift,
        SpoofClass::Incremental,
        SpoofClass::Random,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SpoofClass::DecimalShift => "decimal_shift",
            SpoofClass::Incremental => "incremental",
            SpoofClass::Random => "random",
        }
    }
}

impl std::fmt::Display for SpoofClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SpoofClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpoofClass::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown spoof class '{s}'")))
    }
}

/// A fully parameterized attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpoofKind {
    /// Adds `offset` to every window sample; |offset| ≤ 0.009.
    DecimalShift { offset: f64 },
    /// Replaces the window with `start, start+step, start+2·step, …`;
    /// `step` must be nonzero (a zero step is a decimal shift in disguise).
    IncrementalArray { start: f64, step: f64 },
    /// Replaces the window with uniform draws on `[lo, hi] ⊆ [−0.01, 0.01]`.
    Random { lo: f64, hi: f64 },
}

impl SpoofKind {
    pub fn class(&self) -> SpoofClass {
        match self {
            SpoofKind::DecimalShift { .. } => SpoofClass::DecimalShift,
            SpoofKind::IncrementalArray { .. } => SpoofClass::Incremental,
            SpoofKind::Random { .. } => SpoofClass::Random,
        }
    }

    /// # Errors
    /// Parameters outside the class's legal range.
    pub fn validate(&self) -> Result<()> {
        match *self {
            SpoofKind::DecimalShift { offset } => {
                if !offset.is_finite() || offset.abs() > MAX_DECIMAL_OFFSET {
                    return Err(Error::Domain(format!(
                        "decimal-shift offset {offset} outside ±{MAX_DECIMAL_OFFSET}"
                    )));
                }
            }
            SpoofKind::IncrementalArray { start, step } => {
                if !start.is_finite() || !step.is_finite() || step == 0.0 {
                    return Err(Error::Domain(format!(
                        "incremental progression needs finite start and nonzero step \
                         (got start {start}, step {step})"
                    )));
                }
            }
            SpoofKind::Random { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite())
                    || lo >= hi
                    || lo < -MAX_RANDOM_BOUND
                    || hi > MAX_RANDOM_BOUND
                {
                    return Err(Error::Domain(format!(
                        "random spoof range [{lo}, {hi}] must be ordered and lie \
                         within ±{MAX_RANDOM_BOUND}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One attack placed on one port's ΔSoC stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpoofEvent {
    pub port: PortId,
    pub start_index: usize,
    pub length: usize,
    pub kind: SpoofKind,
    /// Per-event RNG seed; consumed by `Random` events, carried (and
    /// persisted) for the others so every plan row has the same shape.
    pub seed: u64,
}

impl SpoofEvent {
    fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::Plan(format!(
                "event at index {} has length {}, need at least 2",
                self.start_index, self.length
            )));
        }
        self.kind.validate()
    }

    fn end_index(&self) -> usize {
        self.start_index + self.length
    }
}

/// A set of attacks against one series, with ground truth for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpoofPlan {
    /// Identifier of the series the plan was built against (free text,
    /// e.g. "seed 7 test day"); informational.
    pub source: String,
    events: Vec<SpoofEvent>,
}

impl SpoofPlan {
    /// # Errors
    /// Any invalid event, or two events overlapping on the same port.
    pub fn new(source: String, events: Vec<SpoofEvent>) -> Result<Self> {
        for event in &events {
            event.validate()?;
        }
        let mut per_port: HashMap<PortId, Vec<&SpoofEvent>> = HashMap::new();
        for event in &events {
            per_port.entry(event.port).or_default().push(event);
        }
        for (port, mut list) in per_port {
            list.sort_by_key(|e| e.start_index);
            for pair in list.windows(2) {
                if pair[1].start_index < pair[0].end_index() {
                    return Err(Error::Plan(format!(
                        "events on {port} overlap: [{}, {}) and [{}, {})",
                        pair[0].start_index,
                        pair[0].end_index(),
                        pair[1].start_index,
                        pair[1].end_index()
                    )));
                }
            }
        }
        Ok(SpoofPlan { source, events })
    }

    pub fn events(&self) -> &[SpoofEvent] {
        &self.events
    }

    /// Events targeting one port, in start order.
    pub fn events_for(&self, port: PortId) -> Vec<&SpoofEvent> {
        let mut list: Vec<&SpoofEvent> =
            self.events.iter().filter(|e| e.port == port).collect();
        list.sort_by_key(|e| e.start_index);
        list
    }
}

// ---------------------------------------------------------------------------
// Window selection
// ---------------------------------------------------------------------------

/// Pick `count` non-overlapping windows of `length` samples, every index of
/// which is at least `guard` samples away from any session-boundary sample.
///
/// Each window is drawn uniformly from the starts still available, so the
/// placement is unbiased given feasibility; the same seed reproduces the
/// same list.
///
/// # Errors
/// * `guard` < 1, `length` < 2 → domain error.
/// * More windows requested than can be packed → capacity error carrying the
///   achievable maximum (greedy packing bound).
pub fn select_windows(
    delta: &DeltaSocSeries,
    count: usize,
    length: usize,
    guard: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    if guard < 1 {
        return Err(Error::Domain("guard band must be at least 1 sample".into()));
    }
    if length < 2 {
        return Err(Error::Domain("spoof windows need at least 2 samples".into()));
    }
    let n = delta.len();

    // Poison every index within guard−1 of a transition sample.
    let mut poisoned = vec![false; n];
    for (m, flag) in delta.transition_mask.iter().enumerate() {
        if *flag {
            let lo = m.saturating_sub(guard - 1);
            let hi = (m + guard).min(n);
            for p in poisoned.iter_mut().take(hi).skip(lo) {
                *p = true;
            }
        }
    }
    // Eligible starts: window fits and touches no poisoned index.
    let mut bad_prefix = vec![0usize; n + 1];
    for (i, p) in poisoned.iter().enumerate() {
        bad_prefix[i + 1] = bad_prefix[i] + usize::from(*p);
    }
    let window_clean = |start: usize| bad_prefix[start + length] == bad_prefix[start];
    let eligible: Vec<usize> = (0..n.saturating_sub(length - 1))
        .filter(|s| window_clean(*s))
        .collect();

    // Capacity: leftmost greedy packing is maximal for equal-length windows.
    let mut achievable = 0usize;
    let mut cursor = 0usize;
    for s in &eligible {
        if *s >= cursor {
            achievable += 1;
            cursor = s + length;
        }
    }
    if count > achievable {
        return Err(Error::Capacity {
            requested: count,
            achievable,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(count);
    for _ in 0..count {
        // Starts whose window avoids everything chosen so far.
        let free: Vec<usize> = eligible
            .iter()
            .copied()
            .filter(|s| {
                chosen
                    .iter()
                    .all(|(cs, cl)| s + length <= *cs || *s >= cs + cl)
            })
            .collect();
        if free.is_empty() {
            // The request fits a fresh series, but this random packing
            // fragmented the space; report how far it got.
            return Err(Error::Capacity {
                requested: count,
                achievable: chosen.len(),
            });
        }
        let pick = free[rng.gen_range(0..free.len())];
        chosen.push((pick, length));
    }
    Ok(chosen)
}

// ---------------------------------------------------------------------------
// Injection
// ---------------------------------------------------------------------------

/// Apply a plan's events for `delta.port` and return the tampered series
/// plus a per-sample ground-truth label (`None` = untouched).
///
/// Samples outside event windows are preserved bit-for-bit.
///
/// # Errors
/// An event extending past the series end → plan error (overlap is already
/// rejected by [`SpoofPlan::new`]).
pub fn inject(
    delta: &DeltaSocSeries,
    plan: &SpoofPlan,
) -> Result<(DeltaSocSeries, Vec<Option<SpoofClass>>)> {
    let n = delta.len();
    let mut values = delta.values.clone();
    let mut labels: Vec<Option<SpoofClass>> = vec![None; n];
    for event in plan.events_for(delta.port) {
        if event.end_index() > n {
            return Err(Error::Plan(format!(
                "event [{}, {}) exceeds series length {n}",
                event.start_index,
                event.end_index()
            )));
        }
        match event.kind {
            SpoofKind::DecimalShift { offset } => {
                for v in &mut values[event.start_index..event.end_index()] {
                    *v += offset;
                }
            }
            SpoofKind::IncrementalArray { start, step } => {
                for (j, v) in values[event.start_index..event.end_index()]
                    .iter_mut()
                    .enumerate()
                {
                    *v = start + j as f64 * step;
                }
            }
            SpoofKind::Random { lo, hi } => {
                let mut rng = ChaCha8Rng::seed_from_u64(event.seed);
                for v in &mut values[event.start_index..event.end_index()] {
                    *v = rng.gen_range(lo..=hi);
                }
            }
        }
        for label in &mut labels[event.start_index..event.end_index()] {
            *label = Some(event.kind.class());
        }
    }
    Ok((
        DeltaSocSeries {
            port: delta.port,
            values,
            transition_mask: delta.transition_mask.clone(),
        },
        labels,
    ))
}

// ---------------------------------------------------------------------------
// Plan generation
// ---------------------------------------------------------------------------

/// How many events of each class to place, and where they may go.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanSpec {
    pub decimal_count: usize,
    pub incremental_count: usize,
    pub random_count: usize,
    /// Window length in samples.
    pub length: usize,
    /// Minimum distance from any session-boundary sample.
    pub guard: usize,
    pub seed: u64,
}

impl Default for PlanSpec {
    fn default() -> Self {
        PlanSpec {
            decimal_count: 10,
            incremental_count: 10,
            random_count: 10,
            length: 10,
            guard: 5,
            seed: 0,
        }
    }
}

/// Draw a plan against one port's clean ΔSoC stream.
///
/// Default parameter draws per class:
/// * decimal shift: offset magnitude uniform on [0.004, 0.009], random sign —
///   large enough to clear any sane threshold, inside the legal ±0.009;
/// * incremental: step magnitude uniform on [0.005, 0.01], random sign, and
///   `start` anchored at the window's clean value plus one step, so the
///   fake ramps *away* from the truth from the first sample;
/// * random: the full legal range [−0.01, 0.01] with a fresh per-event seed.
pub fn generate_plan(delta: &DeltaSocSeries, spec: &PlanSpec, source: String) -> Result<SpoofPlan> {
    let total = spec.decimal_count + spec.incremental_count + spec.random_count;
    let windows = select_windows(delta, total, spec.length, spec.guard, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(3); // independent of the window sampler's draws
    let mut events = Vec::with_capacity(total);
    for (i, (start_index, length)) in windows.into_iter().enumerate() {
        let kind = if i < spec.decimal_count {
            let magnitude = rng.gen_range(0.004..=0.009);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            SpoofKind::DecimalShift {
                offset: sign * magnitude,
            }
        } else if i < spec.decimal_count + spec.incremental_count {
            let magnitude = rng.gen_range(0.005..=0.01);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let step = sign * magnitude;
            SpoofKind::IncrementalArray {
                start: delta.values[start_index] + step,
                step,
            }
        } else {
            SpoofKind::Random {
                lo: -MAX_RANDOM_BOUND,
                hi: MAX_RANDOM_BOUND,
            }
        };
        events.push(SpoofEvent {
            port: delta.port,
            start_index,
            length,
            kind,
            seed: rng.gen::<u64>(),
        });
    }
    SpoofPlan::new(source, events)
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

const PLAN_HEADER: &str = "port,start_index,length,kind,param1,param2,seed";
const LABELS_HEADER: &str = "index,label";

/// Write a plan as CSV (`param1`/`param2` are offset/0, start/step, or
/// lo/hi depending on the kind); the source identifier rides in a leading
/// comment.
pub fn write_plan_csv(path: &Path, plan: &SpoofPlan) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "# source = {}", plan.source).map_err(io_err)?;
    writeln!(w, "{PLAN_HEADER}").map_err(io_err)?;
    for e in plan.events() {
        let (p1, p2) = match e.kind {
            SpoofKind::DecimalShift { offset } => (offset, 0.0),
            SpoofKind::IncrementalArray { start, step } => (start, step),
            SpoofKind::Random { lo, hi } => (lo, hi),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            e.port.label(),
            e.start_index,
            e.length,
            e.kind.class().label(),
            fmt_f64(p1),
            fmt_f64(p2),
            e.seed
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Read a plan written by [`write_plan_csv`], re-validating all invariants.
pub fn read_plan_csv(path: &Path) -> Result<SpoofPlan> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut source = String::new();
    let mut events = Vec::new();
    let mut seen_header = false;
    let mut line_no = 0usize;
    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# source = ") {
            source = rest.to_string();
            continue;
        }
        if !seen_header {
            if line != PLAN_HEADER {
                return Err(Error::parse(path, line_no, format!("unexpected header '{line}'")));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 7 fields, found {}", fields.len()),
            ));
        }
        let bad = |what: &str, raw: &str| Error::parse(path, line_no, format!("bad {what} '{raw}'"));
        let port: PortId = fields[0].parse().map_err(|_| bad("port", fields[0]))?;
        let start_index: usize = fields[1].parse().map_err(|_| bad("start_index", fields[1]))?;
        let length: usize = fields[2].parse().map_err(|_| bad("length", fields[2]))?;
        let class: SpoofClass = fields[3].parse().map_err(|_| bad("kind", fields[3]))?;
        let p1: f64 = fields[4].parse().map_err(|_| bad("param1", fields[4]))?;
        let p2: f64 = fields[5].parse().map_err(|_| bad("param2", fields[5]))?;
        let seed: u64 = fields[6].parse().map_err(|_| bad("seed", fields[6]))?;
        let kind = match class {
            SpoofClass::DecimalShift => SpoofKind::DecimalShift { offset: p1 },
            SpoofClass::Incremental => SpoofKind::IncrementalArray { start: p1, step: p2 },
            SpoofClass::Random => SpoofKind::Random { lo: p1, hi: p2 },
        };
        events.push(SpoofEvent {
            port,
            start_index,
            length,
            kind,
            seed,
        });
    }
    if !seen_header {
        return Err(Error::EmptyInput(format!("{}: empty plan file", path.display())));
    }
    SpoofPlan::new(source, events)
}

/// Write per-sample ground-truth labels (`clean` or the spoof class).
pub fn write_labels_csv(path: &Path, labels: &[Option<SpoofClass>]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::with_capacity(1 << 20, file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{LABELS_HEADER}").map_err(io_err)?;
    for (i, label) in labels.iter().enumerate() {
        let text = label.map_or("clean", SpoofClass::label);
        writeln!(w, "{i},{text}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Read labels written by [`write_labels_csv`].
pub fn read_labels_csv(path: &Path) -> Result<Vec<Option<SpoofClass>>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut labels = Vec::new();
    let mut line_no = 0usize;
    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        if line_no == 1 {
            if line != LABELS_HEADER {
                return Err(Error::parse(path, line_no, format!("unexpected header '{line}'")));
            }
            continue;
        }
        let (idx_raw, label_raw) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path, line_no, "expected index,label"))?;
        let idx: usize = idx_raw
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad index '{idx_raw}'")))?;
        if idx != labels.len() {
            return Err(Error::parse(
                path,
                line_no,
                format!("index {idx} out of order (expected {})", labels.len()),
            ));
        }
        let label = if label_raw == "clean" {
            None
        } else {
            Some(label_raw.parse::<SpoofClass>().map_err(|_| {
                Error::parse(path, line_no, format!("bad label '{label_raw}'"))
            })?)
        };
        labels.push(label);
    }
    if line_no == 0 {
        return Err(Error::EmptyInput(format!("{}: empty labels file", path.display())));
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_series(n: usize, value: f64) -> DeltaSocSeries {
        DeltaSocSeries {
            port: PortId::Ev0Terra53,
            values: vec![value; n],
            transition_mask: vec![false; n],
        }
    }

    #[test]
    fn kind_parameter_ranges_are_enforced() {
        assert!(SpoofKind::DecimalShift { offset: 0.009 }.validate().is_ok());
        assert!(SpoofKind::DecimalShift { offset: -0.009 }.validate().is_ok());
        assert!(SpoofKind::DecimalShift { offset: 0.0091 }.validate().is_err());
        assert!(SpoofKind::IncrementalArray { start: 0.0, step: 0.01 }.validate().is_ok());
        assert!(SpoofKind::IncrementalArray { start: 0.0, step: 0.0 }.validate().is_err());
        assert!(SpoofKind::Random { lo: -0.01, hi: 0.01 }.validate().is_ok());
        assert!(SpoofKind::Random { lo: -0.02, hi: 0.01 }.validate().is_err());
        assert!(SpoofKind::Random { lo: 0.01, hi: -0.01 }.validate().is_err());
    }

    #[test]
    fn plan_rejects_overlapping_events_on_one_port() {
        let mk = |start| SpoofEvent {
            port: PortId::Ev0Terra53,
            start_index: start,
            length: 10,
            kind: SpoofKind::DecimalShift { offset: 0.005 },
            seed: 0,
        };
        assert!(SpoofPlan::new("t".into(), vec![mk(0), mk(9)]).is_err());
        assert!(SpoofPlan::new("t".into(), vec![mk(0), mk(10)]).is_ok());
        // Same indices on different ports are fine.
        let other = SpoofEvent {
            port: PortId::Ev3TerraHp,
            ..mk(0)
        };
        assert!(SpoofPlan::new("t".into(), vec![mk(0), other]).is_ok());
    }

    #[test]
    fn select_windows_is_deterministic_and_disjoint() {
        let delta = flat_series(500, 0.0);
        let a = select_windows(&delta, 3, 10, 5, 42).unwrap();
        let b = select_windows(&delta, 3, 10, 5, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        let mut sorted = a.clone();
        sorted.sort();
        for pair in sorted.windows(2) {
            assert!(pair[0].0 + pair[0].1 <= pair[1].0, "windows overlap: {sorted:?}");
        }
        let c = select_windows(&delta, 3, 10, 5, 43).unwrap();
        assert_ne!(a, c, "different seeds should move the windows");
    }

    #[test]
    fn select_windows_respects_guard_band() {
        let mut delta = flat_series(100, 0.0);
        delta.transition_mask[50] = true;
        let guard = 5;
        let windows = select_windows(&delta, 4, 10, guard, 7).unwrap();
        for (start, len) in windows {
            for idx in start..start + len {
                assert!(
                    idx.abs_diff(50) >= guard,
                    "window index {idx} within guard of the transition at 50"
                );
            }
        }
    }

    #[test]
    fn select_windows_reports_achievable_capacity() {
        let delta = flat_series(25, 0.0);
        // 25 samples fit two disjoint 10-windows.
        match select_windows(&delta, 3, 10, 5, 0) {
            Err(Error::Capacity {
                requested,
                achievable,
            }) => {
                assert_eq!(requested, 3);
                assert_eq!(achievable, 2);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
        assert_eq!(select_windows(&delta, 2, 10, 5, 0).unwrap().len(), 2);

        let mut all_masked = flat_series(50, 0.0);
        all_masked.transition_mask.iter_mut().for_each(|m| *m = true);
        assert!(matches!(
            select_windows(&all_masked, 1, 10, 5, 0),
            Err(Error::Capacity { achievable: 0, .. })
        ));
    }

    #[test]
    fn decimal_shift_adds_constant_offset() {
        let delta = flat_series(30, 0.05);
        let plan = SpoofPlan::new(
            "t".into(),
            vec![SpoofEvent {
                port: PortId::Ev0Terra53,
                start_index: 10,
                length: 10,
                kind: SpoofKind::DecimalShift { offset: 0.009 },
                seed: 0,
            }],
        )
        .unwrap();
        let (spoofed, labels) = inject(&delta, &plan).unwrap();
        for j in 10..20 {
            assert!((spoofed.values[j] - 0.059).abs() < 1e-15);
            assert_eq!(labels[j], Some(SpoofClass::DecimalShift));
            // Additive fingerprint: difference recovers the offset to 1 ulp.
            assert!((spoofed.values[j] - delta.values[j] - 0.009).abs() < 1e-17);
        }
        for j in (0..10).chain(20..30) {
            assert_eq!(spoofed.values[j].to_bits(), delta.values[j].to_bits());
            assert_eq!(labels[j], None);
        }
    }

    #[test]
    fn incremental_array_replaces_with_progression() {
        let delta = flat_series(20, 0.5);
        let plan = SpoofPlan::new(
            "t".into(),
            vec![SpoofEvent {
                port: PortId::Ev0Terra53,
                start_index: 5,
                length: 10,
                kind: SpoofKind::IncrementalArray {
                    start: 0.01,
                    step: 0.01,
                },
                seed: 0,
            }],
        )
        .unwrap();
        let (spoofed, _) = inject(&delta, &plan).unwrap();
        for j in 0..10 {
            let expected = 0.01 + j as f64 * 0.01;
            assert!(
                (spoofed.values[5 + j] - expected).abs() < 1e-15,
                "sample {j}: {} vs {expected}",
                spoofed.values[5 + j]
            );
        }
        // First differences are exactly constant.
        for j in 0..9 {
            let d = spoofed.values[6 + j] - spoofed.values[5 + j];
            let d0 = spoofed.values[6] - spoofed.values[5];
            assert!((d - d0).abs() < 1e-15);
        }
    }

    #[test]
    fn random_spoof_is_bounded_reproducible_and_centered() {
        let delta = flat_series(12_000, 0.3);
        let event = SpoofEvent {
            port: PortId::Ev0Terra53,
            start_index: 100,
            length: 10_000,
            kind: SpoofKind::Random { lo: -0.01, hi: 0.01 },
            seed: 99,
        };
        let plan = SpoofPlan::new("t".into(), vec![event]).unwrap();
        let (a, _) = inject(&delta, &plan).unwrap();
        let (b, _) = inject(&delta, &plan).unwrap();
        assert_eq!(a.values, b.values, "same event seed must reproduce draws");

        let draws = &a.values[100..10_100];
        assert!(draws.iter().all(|v| (-0.01..=0.01).contains(v)));
        // Mean of 10⁴ uniform draws: σ_mean = (hi−lo)/√12/100 ≈ 5.8e-5.
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 3.0 * 5.8e-5, "sample mean {mean} too far from 0");

        let mut different = event;
        different.seed = 100;
        let plan2 = SpoofPlan::new("t".into(), vec![different]).unwrap();
        let (c, _) = inject(&delta, &plan2).unwrap();
        assert_ne!(a.values[100], c.values[100]);
    }

    #[test]
    fn inject_rejects_window_past_series_end() {
        let delta = flat_series(15, 0.0);
        let plan = SpoofPlan::new(
            "t".into(),
            vec![SpoofEvent {
                port: PortId::Ev0Terra53,
                start_index: 10,
                length: 10,
                kind: SpoofKind::DecimalShift { offset: 0.005 },
                seed: 0,
            }],
        )
        .unwrap();
        assert!(matches!(inject(&delta, &plan), Err(Error::Plan(_))));
    }

    #[test]
    fn inject_ignores_events_for_other_ports() {
        let delta = flat_series(30, 0.1);
        let plan = SpoofPlan::new(
            "t".into(),
            vec![SpoofEvent {
                port: PortId::Ev2TerraHpA,
                start_index: 0,
                length: 10,
                kind: SpoofKind::DecimalShift { offset: 0.005 },
                seed: 0,
            }],
        )
        .unwrap();
        let (spoofed, labels) = inject(&delta, &plan).unwrap();
        assert_eq!(spoofed.values, delta.values);
        assert!(labels.iter().all(Option::is_none));
    }

    #[test]
    fn generated_plan_covers_requested_mix_and_anchors_progressions() {
        let mut delta = flat_series(2000, 0.0);
        // Give the stream a nonzero regime so anchoring is visible.
        for v in delta.values.iter_mut().skip(1000) {
            *v = 0.05;
        }
        let spec = PlanSpec {
            decimal_count: 4,
            incremental_count: 4,
            random_count: 4,
            length: 10,
            guard: 5,
            seed: 11,
        };
        let plan = generate_plan(&delta, &spec, "unit".into()).unwrap();
        assert_eq!(plan.events().len(), 12);
        let mut by_class = HashMap::new();
        for event in plan.events() {
            *by_class.entry(event.kind.class()).or_insert(0usize) += 1;
            match event.kind {
                SpoofKind::DecimalShift { offset } => {
                    assert!((0.004..=0.009).contains(&offset.abs()));
                }
                SpoofKind::IncrementalArray { start, step } => {
                    assert!((0.005..=0.01).contains(&step.abs()));
                    let clean = delta.values[event.start_index];
                    assert!(
                        (start - (clean + step)).abs() < 1e-15,
                        "progression must anchor at the local clean value"
                    );
                }
                SpoofKind::Random { lo, hi } => {
                    assert_eq!((lo, hi), (-MAX_RANDOM_BOUND, MAX_RANDOM_BOUND));
                }
            }
        }
        assert_eq!(by_class[&SpoofClass::DecimalShift], 4);
        assert_eq!(by_class[&SpoofClass::Incremental], 4);
        assert_eq!(by_class[&SpoofClass::Random], 4);

        let again = generate_plan(&delta, &spec, "unit".into()).unwrap();
        assert_eq!(plan, again);
    }

    #[test]
    fn plan_csv_round_trips() {
        let delta = flat_series(1000, 0.02);
        let plan = generate_plan(&delta, &PlanSpec::default(), "round trip".into()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plan.csv");
        write_plan_csv(&path, &plan).unwrap();
        let loaded = read_plan_csv(&path).unwrap();
        assert_eq!(loaded.source, "round trip");
        assert_eq!(loaded.events().len(), plan.events().len());
        for (a, b) in plan.events().iter().zip(loaded.events()) {
            assert_eq!(a.port, b.port);
            assert_eq!(a.start_index, b.start_index);
            assert_eq!(a.length, b.length);
            assert_eq!(a.seed, b.seed);
            match (a.kind, b.kind) {
                (
                    SpoofKind::DecimalShift { offset: x },
                    SpoofKind::DecimalShift { offset: y },
                ) => assert_eq!(x.to_bits(), y.to_bits()),
                (
                    SpoofKind::IncrementalArray { start: s1, step: d1 },
                    SpoofKind::IncrementalArray { start: s2, step: d2 },
                ) => {
                    assert_eq!(s1.to_bits(), s2.to_bits());
                    assert_eq!(d1.to_bits(), d2.to_bits());
                }
                (SpoofKind::Random { lo: l1, hi: h1 }, SpoofKind::Random { lo: l2, hi: h2 }) => {
                    assert_eq!(l1.to_bits(), l2.to_bits());
                    assert_eq!(h1.to_bits(), h2.to_bits());
                }
                other => panic!("kind changed across round trip: {other:?}"),
            }
        }
    }

    #[test]
    fn labels_csv_round_trips_and_validates() {
        let labels = vec![
            None,
            Some(SpoofClass::DecimalShift),
            Some(SpoofClass::Incremental),
            Some(SpoofClass::Random),
            None,
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        write_labels_csv(&path, &labels).unwrap();
        assert_eq!(read_labels_csv(&path).unwrap(), labels);

        std::fs::write(&path, "index,label\n1,clean\n").unwrap();
        assert!(matches!(read_labels_csv(&path), Err(Error::Parse { .. })));
        std::fs::write(&path, "index,label\n0,sneaky\n").unwrap();
        assert!(matches!(read_labels_csv(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn labels_agree_with_plan_geometry() {
        let delta = flat_series(600, 0.0);
        let plan = generate_plan(
            &delta,
            &PlanSpec {
                decimal_count: 3,
                incremental_count: 3,
                random_count: 3,
                ..PlanSpec::default()
            },
            "geometry".into(),
        )
        .unwrap();
        let (_, labels) = inject(&delta, &plan).unwrap();
        let mut expected: Vec<Option<SpoofClass>> = vec![None; delta.len()];
        for event in plan.events() {
            for slot in expected
                .iter_mut()
                .take(event.end_index())
                .skip(event.start_index)
            {
                *slot = Some(event.kind.class());
            }
        }
        assert_eq!(labels, expected);
    }
}
