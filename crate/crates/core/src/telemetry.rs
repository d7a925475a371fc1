//! Core telemetry types for the charging-station plant.
//!
//! A [`TelemetrySeries`] is a 1 Hz record stream of the station's electrical
//! state: current at the point of common coupling (PCC), battery-storage
//! current, and per-port current / power / reactive power / charging-status /
//! state-of-charge readings for the six charging ports.
//!
//! The per-second SoC difference series ([`DeltaSocSeries`]) derived from a
//! port's SoC column is the quantity the regressor predicts and the spoofing
//! detector monitors. Samples adjacent to a charging-status flip carry a
//! transition mark so that the large SoC jumps at session boundaries (idle
//! ports report SoC 0) are never mistaken for attacks.

use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::textio::fmt_f64;

/// Reconciliation bound for the current-balance invariant, in amperes.
///
/// `i_pcc` is produced as the exact floating-point sum `i_bess + Σ i_ev`
/// (storage first, then ports in declaration order); re-summing in the same
/// order reproduces it bit-for-bit, so the bound only needs to absorb
/// associativity noise from callers that sum differently.
pub const CURRENT_BALANCE_TOL_A: f64 = 1e-9;

/// The six charging ports, in canonical column order.
///
/// Ports `Ev1*`/`Ev2*` are paired cords sharing a charging board; boards are
/// numbered 0–3 and each board hangs off the station bus through its own
/// breaker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PortId {
    Ev0Terra53,
    Ev1TerraHpA,
    Ev1TerraHpB,
    Ev2TerraHpA,
    Ev2TerraHpB,
    Ev3TerraHp,
}

impl PortId {
    /// All ports in canonical order (the CSV column order).
    pub const ALL: [PortId; 6] = [
        PortId::Ev0Terra53,
        PortId::Ev1TerraHpA,
        PortId::Ev1TerraHpB,
        PortId::Ev2TerraHpA,
        PortId::Ev2TerraHpB,
        PortId::Ev3TerraHp,
    ];

    /// Position of this port in [`PortId::ALL`] and in every per-port array.
    pub fn index(self) -> usize {
        match self {
            PortId::Ev0Terra53 => 0,
            PortId::Ev1TerraHpA => 1,
            PortId::Ev1TerraHpB => 2,
            PortId::Ev2TerraHpA => 3,
            PortId::Ev2TerraHpB => 4,
            PortId::Ev3TerraHp => 5,
        }
    }

    /// Stable snake-case label used in CSV headers, file names and CLI flags.
    pub fn label(self) -> &'static str {
        match self {
            PortId::Ev0Terra53 => "ev0_terra53",
            PortId::Ev1TerraHpA => "ev1_terrahp_a",
            PortId::Ev1TerraHpB => "ev1_terrahp_b",
            PortId::Ev2TerraHpA => "ev2_terrahp_a",
            PortId::Ev2TerraHpB => "ev2_terrahp_b",
            PortId::Ev3TerraHp => "ev3_terrahp",
        }
    }

    /// Charging board (0–3) this port is wired to. Paired cords share one.
    pub fn board(self) -> u8 {
        match self {
            PortId::Ev0Terra53 => 0,
            PortId::Ev1TerraHpA | PortId::Ev1TerraHpB => 1,
            PortId::Ev2TerraHpA | PortId::Ev2TerraHpB => 2,
            PortId::Ev3TerraHp => 3,
        }
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PortId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let needle = s.to_ascii_lowercase();
        PortId::ALL
            .into_iter()
            .find(|p| p.label() == needle)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown port '{s}' (expected one of: {})",
                    PortId::ALL.map(|p| p.label()).join(", ")
                ))
            })
    }
}

/// Transport a telemetry column arrives on in the modeled plant.
///
/// Station-bus quantities (PCC and storage currents) travel on the substation
/// GOOSE bus; per-port quantities ride the charger-management protocol
/// (OCPP). The distinction is informational — it documents which measurements
/// an attacker on a given channel could tamper with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Goose,
    Ocpp,
}

/// Channel tag for a CSV column name; `None` for the timestamp column or
/// unknown names.
pub fn column_channel(column: &str) -> Option<Channel> {
    match column {
        "t" => None,
        "i_pcc" | "i_bess" => Some(Channel::Goose),
        _ => {
            let per_port = ["i_", "p_", "q_", "cs_", "soc_"]
                .iter()
                .any(|prefix| match column.strip_prefix(prefix) {
                    Some(rest) => rest.parse::<PortId>().is_ok(),
                    None => false,
                });
            per_port.then_some(Channel::Ocpp)
        }
    }
}

/// One port's readings within a single record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortReading {
    /// Port charging current at the DC bus, A. Zero whenever `cs` is false.
    pub i_ev: f64,
    /// Port active power, kW.
    pub p_ev: f64,
    /// Port reactive power, kvar.
    pub q_ev: f64,
    /// Charging status: true while a session is actively charging.
    pub cs: bool,
    /// Connected vehicle's state of charge, percent in [0, 100].
    /// Reads 0 whenever the port is not actively charging.
    pub soc_ev: f64,
}

impl PortReading {
    /// An idle port: no vehicle drawing current, SoC reported as 0.
    pub const IDLE: PortReading = PortReading {
        i_ev: 0.0,
        p_ev: 0.0,
        q_ev: 0.0,
        cs: false,
        soc_ev: 0.0,
    };
}

/// One 1 Hz sample of the full station state.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRecord {
    /// Run-relative timestamp, seconds.
    pub t: u64,
    /// Current at the point of common coupling, A.
    pub i_pcc: f64,
    /// Battery-storage current, A. Positive while the storage charges (it is
    /// a load on the bus), negative while it discharges toward port demand.
    pub i_bess: f64,
    /// Per-port readings in [`PortId::ALL`] order.
    pub ports: [PortReading; 6],
}

impl TelemetryRecord {
    /// Readings for one port.
    pub fn port(&self, id: PortId) -> &PortReading {
        &self.ports[id.index()]
    }

    /// `i_pcc − (i_bess + Σ i_ev)`, summed in the canonical order the
    /// simulator uses. Zero (to [`CURRENT_BALANCE_TOL_A`]) on valid records.
    pub fn current_balance_residual(&self) -> f64 {
        let mut sum = self.i_bess;
        for reading in &self.ports {
            sum += reading.i_ev;
        }
        self.i_pcc - sum
    }
}

/// Provenance recorded alongside a series so a data file is self-describing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesMeta {
    /// Seed the generating run used.
    pub seed: u64,
    /// Length of the generating run, seconds.
    pub duration_s: u64,
    /// Name/version of the producing tool.
    pub generator: String,
}

impl Default for SeriesMeta {
    fn default() -> Self {
        SeriesMeta {
            seed: 0,
            duration_s: 0,
            generator: String::from("unknown"),
        }
    }
}

/// A validated 1 Hz telemetry stream.
///
/// Construction enforces the record-level invariants, so any held value is
/// safe to feed downstream:
/// * timestamps increase by exactly 1 (no gaps, no duplicates);
/// * `cs = 0` implies `i_ev = 0`;
/// * every SoC lies in [0, 100];
/// * the current balance `i_pcc = i_bess + Σ i_ev` holds within
///   [`CURRENT_BALANCE_TOL_A`].
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetrySeries {
    pub meta: SeriesMeta,
    records: Vec<TelemetryRecord>,
}

impl TelemetrySeries {
    /// Validate `records` and wrap them as a series.
    pub fn new(meta: SeriesMeta, records: Vec<TelemetryRecord>) -> Result<Self> {
        for (i, rec) in records.iter().enumerate() {
            if i > 0 {
                let prev = records[i - 1].t;
                if rec.t != prev + 1 {
                    return Err(Error::Domain(format!(
                        "record {i}: timestamp {} does not follow {} by exactly 1 s",
                        rec.t, prev
                    )));
                }
            }
            for port in PortId::ALL {
                let r = rec.port(port);
                if !r.cs && r.i_ev != 0.0 {
                    return Err(Error::Domain(format!(
                        "record {i} port {port}: i_ev = {} while cs = 0",
                        r.i_ev
                    )));
                }
                if !(0.0..=100.0).contains(&r.soc_ev) {
                    return Err(Error::Domain(format!(
                        "record {i} port {port}: soc_ev = {} outside [0, 100]",
                        r.soc_ev
                    )));
                }
            }
            let residual = rec.current_balance_residual();
            if residual.abs() >= CURRENT_BALANCE_TOL_A {
                return Err(Error::Domain(format!(
                    "record {i}: current balance residual {residual:e} A exceeds \
                     {CURRENT_BALANCE_TOL_A:e} A"
                )));
            }
        }
        Ok(TelemetrySeries { meta, records })
    }

    pub fn records(&self) -> &[TelemetryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// CSV header row: `t,i_pcc,i_bess` then, per port in canonical order,
    /// `i_<port>,p_<port>,q_<port>,cs_<port>,soc_<port>`.
    pub fn csv_header() -> String {
        let mut header = String::from("t,i_pcc,i_bess");
        for port in PortId::ALL {
            let l = port.label();
            header.push_str(&format!(",i_{l},p_{l},q_{l},cs_{l},soc_{l}"));
        }
        header
    }

    /// Write the series as CSV.
    ///
    /// Floats are written as decimal text with 17 significant digits (exact
    /// zero abbreviates to `0`), which round-trips every f64 bit pattern.
    /// Metadata rides in leading `# key = value` comment lines.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::with_capacity(1 << 20, file);
        let io_err = |e| Error::io(path, e);

        writeln!(w, "# generator = {}", self.meta.generator).map_err(io_err)?;
        writeln!(w, "# seed = {}", self.meta.seed).map_err(io_err)?;
        writeln!(w, "# duration_s = {}", self.meta.duration_s).map_err(io_err)?;
        writeln!(w, "{}", Self::csv_header()).map_err(io_err)?;

        let mut line = String::with_capacity(1024);
        for rec in &self.records {
            line.clear();
            line.push_str(&rec.t.to_string());
            line.push(',');
            line.push_str(&fmt_f64(rec.i_pcc));
            line.push(',');
            line.push_str(&fmt_f64(rec.i_bess));
            for reading in &rec.ports {
                line.push(',');
                line.push_str(&fmt_f64(reading.i_ev));
                line.push(',');
                line.push_str(&fmt_f64(reading.p_ev));
                line.push(',');
                line.push_str(&fmt_f64(reading.q_ev));
                line.push(',');
                line.push_str(if reading.cs { "1" } else { "0" });
                line.push(',');
                line.push_str(&fmt_f64(reading.soc_ev));
            }
            writeln!(w, "{line}").map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }

    /// Read a series written by [`TelemetrySeries::write_csv`].
    ///
    /// Validation re-runs on load, and malformed rows report their 1-based
    /// line number.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::with_capacity(1 << 20, file);

        let mut meta = SeriesMeta::default();
        let mut records = Vec::new();
        let mut saw_header = false;
        let mut line_no = 0usize;

        for line in reader.lines() {
            line_no += 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once('=') {
                    let (key, value) = (key.trim(), value.trim());
                    match key {
                        "generator" => meta.generator = value.to_string(),
                        "seed" => {
                            meta.seed = value.parse().map_err(|_| {
                                Error::parse(path, line_no, format!("bad seed '{value}'"))
                            })?;
                        }
                        "duration_s" => {
                            meta.duration_s = value.parse().map_err(|_| {
                                Error::parse(path, line_no, format!("bad duration_s '{value}'"))
                            })?;
                        }
                        _ => {} // unknown comment keys are ignored
                    }
                }
                continue;
            }
            if !saw_header {
                if line != Self::csv_header() {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("unexpected header '{line}'"),
                    ));
                }
                saw_header = true;
                continue;
            }

            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 33 {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected 33 fields, found {}", fields.len()),
                ));
            }
            let f64_at = |idx: usize| -> Result<f64> {
                fields[idx].parse::<f64>().map_err(|_| {
                    Error::parse(
                        path,
                        line_no,
                        format!("field {}: bad float '{}'", idx + 1, fields[idx]),
                    )
                })
            };
            let t = fields[0].parse::<u64>().map_err(|_| {
                Error::parse(path, line_no, format!("bad timestamp '{}'", fields[0]))
            })?;
            let i_pcc = f64_at(1)?;
            let i_bess = f64_at(2)?;
            let mut ports = [PortReading::IDLE; 6];
            for (slot, reading) in ports.iter_mut().enumerate() {
                let base = 3 + slot * 5;
                let cs = match fields[base + 3] {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(Error::parse(
                            path,
                            line_no,
                            format!("field {}: bad cs flag '{other}'", base + 4),
                        ))
                    }
                };
                *reading = PortReading {
                    i_ev: f64_at(base)?,
                    p_ev: f64_at(base + 1)?,
                    q_ev: f64_at(base + 2)?,
                    cs,
                    soc_ev: f64_at(base + 4)?,
                };
            }
            records.push(TelemetryRecord {
                t,
                i_pcc,
                i_bess,
                ports,
            });
        }

        if !saw_header {
            return Err(Error::EmptyInput(format!(
                "{}: no header row found",
                path.display()
            )));
        }
        TelemetrySeries::new(meta, records)
    }
}

/// Per-second SoC differences for one port, with transition marks.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSocSeries {
    pub port: PortId,
    /// `values[t] = soc(t+1) − soc(t)`; length is one less than the source
    /// series.
    pub values: Vec<f64>,
    /// `transition_mask[t]` is true when the charging status flips between
    /// records `t` and `t+1` — the sample spans a session boundary and its
    /// SoC jump is expected, not anomalous.
    pub transition_mask: Vec<bool>,
}

impl DeltaSocSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Write the series as CSV (`index,delta,transition`), the port riding
    /// in a leading comment. Floats use the same 17-significant-digit text
    /// as telemetry CSV, so values round-trip bit-for-bit.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::with_capacity(1 << 20, file);
        let io_err = |e| Error::io(path, e);
        writeln!(w, "# port = {}", self.port.label()).map_err(io_err)?;
        writeln!(w, "index,delta,transition").map_err(io_err)?;
        for (i, (v, m)) in self.values.iter().zip(&self.transition_mask).enumerate() {
            writeln!(w, "{i},{},{}", fmt_f64(*v), u8::from(*m)).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }

    /// Read a series written by [`DeltaSocSeries::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let mut port: Option<PortId> = None;
        let mut values = Vec::new();
        let mut transition_mask = Vec::new();
        let mut saw_header = false;
        let mut line_no = 0usize;
        for line in reader.lines() {
            line_no += 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# port = ") {
                port = Some(rest.parse().map_err(|_| {
                    Error::parse(path, line_no, format!("bad port '{rest}'"))
                })?);
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != "index,delta,transition" {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("unexpected header '{line}'"),
                    ));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected 3 fields, found {}", fields.len()),
                ));
            }
            let idx: usize = fields[0].parse().map_err(|_| {
                Error::parse(path, line_no, format!("bad index '{}'", fields[0]))
            })?;
            if idx != values.len() {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("index {idx} out of order (expected {})", values.len()),
                ));
            }
            let delta: f64 = fields[1].parse().map_err(|_| {
                Error::parse(path, line_no, format!("bad delta '{}'", fields[1]))
            })?;
            let transition = match fields[2] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("bad transition flag '{other}'"),
                    ))
                }
            };
            values.push(delta);
            transition_mask.push(transition);
        }
        let port = port.ok_or_else(|| {
            Error::parse(path, 1, "missing '# port = <label>' comment".to_string())
        })?;
        if !saw_header {
            return Err(Error::EmptyInput(format!(
                "{}: no header row found",
                path.display()
            )));
        }
        Ok(DeltaSocSeries {
            port,
            values,
            transition_mask,
        })
    }
}

/// Differentiate one port's SoC column.
///
/// `values[t] = soc(t+1) − soc(t)`: the sample at index `t` is the SoC
/// movement produced by the current flowing during `[t, t+1)`, so it aligns
/// with the measurements in record `t`.
///
/// # Errors
/// Fewer than 2 records leave nothing to differentiate.
pub fn compute_delta_soc(series: &TelemetrySeries, port: PortId) -> Result<DeltaSocSeries> {
    let records = series.records();
    if records.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "need at least 2 records to differentiate SoC, got {}",
            records.len()
        )));
    }
    let n = records.len() - 1;
    let mut values = Vec::with_capacity(n);
    let mut transition_mask = Vec::with_capacity(n);
    for t in 0..n {
        let cur = records[t].port(port);
        let next = records[t + 1].port(port);
        values.push(next.soc_ev - cur.soc_ev);
        transition_mask.push(cur.cs != next.cs);
    }
    Ok(DeltaSocSeries {
        port,
        values,
        transition_mask,
    })
}

/// Split a series into a training prefix and the test window that follows it.
///
/// `train` takes records `[0, train_seconds)`, `test` takes
/// `[train_seconds, train_seconds + test_seconds)`. A zero-length train split
/// is allowed (the test window then starts at the head of the series).
///
/// # Errors
/// The two windows must fit inside the series.
pub fn split_dataset(
    series: &TelemetrySeries,
    train_seconds: usize,
    test_seconds: usize,
) -> Result<(TelemetrySeries, TelemetrySeries)> {
    let n = series.len();
    let Some(needed) = train_seconds.checked_add(test_seconds) else {
        return Err(Error::Range("train_seconds + test_seconds overflows".into()));
    };
    if needed > n {
        return Err(Error::Range(format!(
            "train ({train_seconds} s) + test ({test_seconds} s) exceeds series length {n}"
        )));
    }
    let records = series.records();
    let train = TelemetrySeries {
        meta: series.meta.clone(),
        records: records[..train_seconds].to_vec(),
    };
    let test = TelemetrySeries {
        meta: series.meta.clone(),
        records: records[train_seconds..train_seconds + test_seconds].to_vec(),
    };
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Record with every port idle and a balanced bus.
    fn idle_record(t: u64) -> TelemetryRecord {
        TelemetryRecord {
            t,
            i_pcc: 0.0,
            i_bess: 0.0,
            ports: [PortReading::IDLE; 6],
        }
    }

    /// Record with one port charging at `i_ev` amps and SoC `soc`.
    fn charging_record(t: u64, port: PortId, i_ev: f64, soc: f64) -> TelemetryRecord {
        let mut rec = idle_record(t);
        rec.ports[port.index()] = PortReading {
            i_ev,
            p_ev: i_ev * 0.48,
            q_ev: i_ev * 0.48 * 0.02,
            cs: true,
            soc_ev: soc,
        };
        rec.i_pcc = rec.i_bess + rec.ports.iter().map(|p| p.i_ev).sum::<f64>();
        rec
    }

    fn series_of(records: Vec<TelemetryRecord>) -> TelemetrySeries {
        TelemetrySeries::new(SeriesMeta::default(), records).unwrap()
    }

    #[test]
    fn port_labels_round_trip() {
        for port in PortId::ALL {
            assert_eq!(port.label().parse::<PortId>().unwrap(), port);
        }
        assert!("EV0_TERRA53".parse::<PortId>().is_ok(), "case-insensitive");
        assert!("ev9_nope".parse::<PortId>().is_err());
    }

    #[test]
    fn board_wiring_pairs_cords() {
        assert_eq!(PortId::Ev0Terra53.board(), 0);
        assert_eq!(PortId::Ev1TerraHpA.board(), PortId::Ev1TerraHpB.board());
        assert_eq!(PortId::Ev2TerraHpA.board(), PortId::Ev2TerraHpB.board());
        assert_eq!(PortId::Ev3TerraHp.board(), 3);
    }

    #[test]
    fn channel_tags_station_bus_vs_port_protocol() {
        assert_eq!(column_channel("i_pcc"), Some(Channel::Goose));
        assert_eq!(column_channel("i_bess"), Some(Channel::Goose));
        assert_eq!(column_channel("soc_ev0_terra53"), Some(Channel::Ocpp));
        assert_eq!(column_channel("cs_ev3_terrahp"), Some(Channel::Ocpp));
        assert_eq!(column_channel("t"), None);
        assert_eq!(column_channel("soc_unknown_port"), None);
    }

    #[test]
    fn delta_soc_flat_series_is_zero() {
        let recs = (0..4)
            .map(|t| charging_record(t, PortId::Ev0Terra53, 100.0, 50.0))
            .collect();
        let delta = compute_delta_soc(&series_of(recs), PortId::Ev0Terra53).unwrap();
        assert_eq!(delta.values, vec![0.0; 3]);
        assert_eq!(delta.transition_mask, vec![false; 3]);
    }

    #[test]
    fn delta_soc_marks_arrival_spike() {
        // Idle port, then a session appears at 45% and charges to 45.1%:
        // the 0→45 jump is a transition sample, the 0.1 step is not.
        let recs = vec![
            idle_record(0),
            charging_record(1, PortId::Ev0Terra53, 100.0, 45.0),
            charging_record(2, PortId::Ev0Terra53, 100.0, 45.1),
        ];
        let delta = compute_delta_soc(&series_of(recs), PortId::Ev0Terra53).unwrap();
        assert_eq!(delta.values.len(), 2);
        assert!((delta.values[0] - 45.0).abs() < 1e-12);
        assert!((delta.values[1] - 0.1).abs() < 1e-12);
        assert_eq!(delta.transition_mask, vec![true, false]);
    }

    #[test]
    fn delta_soc_needs_two_records() {
        let series = series_of(vec![idle_record(0)]);
        assert!(matches!(
            compute_delta_soc(&series, PortId::Ev0Terra53),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn series_rejects_timestamp_gap() {
        let mut second = idle_record(2); // gap: 0 then 2
        second.t = 2;
        let err = TelemetrySeries::new(SeriesMeta::default(), vec![idle_record(0), second]);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn series_rejects_current_on_idle_port() {
        let mut rec = idle_record(0);
        rec.ports[0].i_ev = 5.0; // cs stays 0
        rec.i_pcc = 5.0;
        let err = TelemetrySeries::new(SeriesMeta::default(), vec![rec]);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn series_rejects_unbalanced_bus() {
        let mut rec = idle_record(0);
        rec.i_pcc = 1.0; // nothing drawing, PCC should be 0
        let err = TelemetrySeries::new(SeriesMeta::default(), vec![rec]);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn split_takes_prefix_and_following_window() {
        let recs = (0..10)
            .map(|t| charging_record(t, PortId::Ev3TerraHp, 625.0, 30.0))
            .collect();
        let series = series_of(recs);
        let (train, test) = split_dataset(&series, 6, 4).unwrap();
        assert_eq!(train.len(), 6);
        assert_eq!(test.len(), 4);
        assert_eq!(train.records()[0].t, 0);
        assert_eq!(test.records()[0].t, 6);

        // Zero-length train is allowed: the test window starts at the head.
        let (train, test) = split_dataset(&series, 0, 5).unwrap();
        assert!(train.is_empty());
        assert_eq!(test.records()[0].t, 0);

        assert!(matches!(
            split_dataset(&series, 8, 4),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("telemetry.csv");
        let recs = vec![
            idle_record(0),
            charging_record(1, PortId::Ev0Terra53, 104.16666666666667, 45.0),
            charging_record(2, PortId::Ev0Terra53, 104.2333333331, 45.028935185185184),
        ];
        let meta = SeriesMeta {
            seed: 7,
            duration_s: 3,
            generator: "test 0.0".into(),
        };
        let series = TelemetrySeries::new(meta, recs).unwrap();
        series.write_csv(&path).unwrap();
        let loaded = TelemetrySeries::read_csv(&path).unwrap();
        assert_eq!(loaded.meta, series.meta);
        assert_eq!(loaded.len(), series.len());
        for (a, b) in loaded.records().iter().zip(series.records()) {
            assert_eq!(a.t, b.t);
            assert_eq!(a.i_pcc.to_bits(), b.i_pcc.to_bits());
            assert_eq!(a.i_bess.to_bits(), b.i_bess.to_bits());
            for (ra, rb) in a.ports.iter().zip(&b.ports) {
                assert_eq!(ra.i_ev.to_bits(), rb.i_ev.to_bits());
                assert_eq!(ra.p_ev.to_bits(), rb.p_ev.to_bits());
                assert_eq!(ra.q_ev.to_bits(), rb.q_ev.to_bits());
                assert_eq!(ra.cs, rb.cs);
                assert_eq!(ra.soc_ev.to_bits(), rb.soc_ev.to_bits());
            }
        }
    }

    #[test]
    fn csv_parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let body = format!(
            "# seed = 1\n{}\n0,0,0{}\n",
            TelemetrySeries::csv_header(),
            ",0,0,0,0,0".repeat(6),
        );
        // Corrupt the single data row (line 3) by dropping a field.
        let truncated = body.trim_end().rsplit_once(',').unwrap().0.to_string();
        std::fs::write(&path, truncated).unwrap();
        match TelemetrySeries::read_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error with line number, got {other:?}"),
        }
    }

    #[test]
    fn csv_empty_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            TelemetrySeries::read_csv(&path),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn delta_csv_round_trip_is_lossless() {
        let delta = DeltaSocSeries {
            port: PortId::Ev1TerraHpB,
            values: vec![0.0, 0.1 + 0.2, -45.3, 1.0 / 3.0],
            transition_mask: vec![false, false, true, false],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("delta.csv");
        delta.write_csv(&path).unwrap();
        let loaded = DeltaSocSeries::read_csv(&path).unwrap();
        assert_eq!(loaded.port, delta.port);
        assert_eq!(loaded.transition_mask, delta.transition_mask);
        for (a, b) in loaded.values.iter().zip(&delta.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }

        std::fs::write(&path, "index,delta,transition\n0,0,0\n").unwrap();
        assert!(
            matches!(DeltaSocSeries::read_csv(&path), Err(Error::Parse { .. })),
            "missing port comment must be rejected"
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            /// Cumulative-summing the delta series back onto soc(0)
            /// reproduces the SoC column.
            #[test]
            fn delta_reconstructs_soc(socs in proptest::collection::vec(0.0f64..100.0, 2..200)) {
                let recs: Vec<TelemetryRecord> = socs
                    .iter()
                    .enumerate()
                    .map(|(t, &soc)| charging_record(t as u64, PortId::Ev0Terra53, 10.0, soc))
                    .collect();
                let series = series_of(recs);
                let delta = compute_delta_soc(&series, PortId::Ev0Terra53).unwrap();
                let mut acc = socs[0];
                for (i, d) in delta.values.iter().enumerate() {
                    acc += d;
                    prop_assert!(
                        (acc - socs[i + 1]).abs() < 1e-9,
                        "drift at {}: {} vs {}", i, acc, socs[i + 1]
                    );
                }
            }

            /// Splits partition the records without overlap or loss.
            #[test]
            fn split_partitions_records(
                n in 2usize..60,
                cut in 0usize..60,
            ) {
                prop_assume!(cut <= n);
                let recs: Vec<TelemetryRecord> =
                    (0..n).map(|t| idle_record(t as u64)).collect();
                let series = series_of(recs);
                let (train, test) = split_dataset(&series, cut, n - cut).unwrap();
                prop_assert_eq!(train.len() + test.len(), n);
                let rejoined: Vec<u64> = train
                    .records()
                    .iter()
                    .chain(test.records())
                    .map(|r| r.t)
                    .collect();
                let expected: Vec<u64> = (0..n as u64).collect();
                prop_assert_eq!(rejoined, expected);
            }
        }
    }
}
