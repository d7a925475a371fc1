//! Charging-station plant simulator.
//!
//! The modeled site has six DC fast-charging ports on four charging boards,
//! a grid tie with a fixed import cap, and a battery energy storage system
//! (BESS) that shaves demand peaks: the grid serves port demand up to its
//! cap, the BESS discharges to cover the remainder, and the BESS recharges
//! at the maximum allowed power whenever grid headroom exists.
//!
//! Vehicles arrive per port as a Poisson process, park for a uniformly drawn
//! dwell, and charge at constant current (the lesser of charger and vehicle
//! power limits, converted through the fixed DC bus voltage) until they hit
//! their target state of charge or depart — whichever comes first. A small
//! uniform per-second current ripple models charger regulation texture; the
//! rippled current is both recorded and integrated, so current-balance and
//! per-session energy bookkeeping stay exact.
//!
//! Everything is driven by one seed: identical `(SimConfig, seed)` produce
//! byte-identical telemetry.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::telemetry::{PortId, PortReading, SeriesMeta, TelemetryRecord, TelemetrySeries};
use crate::textio::fmt_f64;

/// RNG stream ids, so scheduling draws never shift when the simulator's own
/// draw pattern changes (and vice versa).
const STREAM_SCHEDULE: u64 = 0;
const STREAM_PLANT: u64 = 1;

// ---------------------------------------------------------------------------
// Equipment
// ---------------------------------------------------------------------------

/// Charger families installed at the site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargerKind {
    /// 50 kW-class charger (port EV0).
    Terra53,
    /// 175–350 kW high-power charger (all other ports).
    TerraHp,
}

/// A charger's rating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargerSpec {
    pub kind: ChargerKind,
    pub max_power_kw: f64,
}

impl ChargerSpec {
    /// Validated constructor: Terra53 units rate at most 50 kW, TerraHP
    /// units between 175 and 350 kW.
    pub fn new(kind: ChargerKind, max_power_kw: f64) -> Result<Self> {
        let ok = match kind {
            ChargerKind::Terra53 => max_power_kw > 0.0 && max_power_kw <= 50.0,
            ChargerKind::TerraHp => (175.0..=350.0).contains(&max_power_kw),
        };
        if !ok {
            return Err(Error::Domain(format!(
                "{kind:?} cannot be rated {max_power_kw} kW"
            )));
        }
        Ok(ChargerSpec { kind, max_power_kw })
    }

    /// The charger installed at `port`: EV0 carries the 50 kW unit, every
    /// other port a 350 kW high-power unit.
    pub fn for_port(port: PortId) -> ChargerSpec {
        match port {
            PortId::Ev0Terra53 => ChargerSpec {
                kind: ChargerKind::Terra53,
                max_power_kw: 50.0,
            },
            _ => ChargerSpec {
                kind: ChargerKind::TerraHp,
                max_power_kw: 350.0,
            },
        }
    }
}

/// Vehicle battery families that visit the site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BatteryKind {
    /// Long-range pack; charges on the high-power ports.
    Bev300,
    /// Mid-range pack; charges on the 50 kW port.
    Bev150,
    /// Anything else (fleet vans, older models); 50 kW port, 50 kW cap.
    Other,
}

impl BatteryKind {
    pub fn label(self) -> &'static str {
        match self {
            BatteryKind::Bev300 => "bev300",
            BatteryKind::Bev150 => "bev150",
            BatteryKind::Other => "other",
        }
    }

    /// Whether this pack may charge on the given charger family: long-range
    /// packs pair with high-power chargers, everything else with the 50 kW
    /// unit.
    pub fn pairs_with(self, charger: ChargerKind) -> bool {
        match self {
            BatteryKind::Bev300 => charger == ChargerKind::TerraHp,
            BatteryKind::Bev150 | BatteryKind::Other => charger == ChargerKind::Terra53,
        }
    }
}

impl std::fmt::Display for BatteryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BatteryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bev300" => Ok(BatteryKind::Bev300),
            "bev150" => Ok(BatteryKind::Bev150),
            "other" => Ok(BatteryKind::Other),
            _ => Err(Error::Config(format!("unknown battery kind '{s}'"))),
        }
    }
}

/// Electrical parameters of a battery family.
///
/// Capacities are expressed in ampere-hours at the DC bus voltage so that the
/// SoC update works directly on measured bus current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatterySpec {
    pub kind: BatteryKind,
    pub capacity_ah: f64,
    pub max_charge_kw: f64,
}

impl BatterySpec {
    pub fn of(kind: BatteryKind) -> BatterySpec {
        match kind {
            BatteryKind::Bev300 => BatterySpec {
                kind,
                capacity_ah: 200.0,
                max_charge_kw: 300.0,
            },
            BatteryKind::Bev150 => BatterySpec {
                kind,
                capacity_ah: 100.0,
                max_charge_kw: 50.0,
            },
            BatteryKind::Other => BatterySpec {
                kind,
                capacity_ah: 120.0,
                max_charge_kw: 50.0,
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Stationary storage parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BessConfig {
    /// Maximum charging power drawn from the bus, kW.
    pub max_charge_kw: f64,
    /// Maximum discharging power delivered to the bus, kW.
    pub max_discharge_kw: f64,
    /// Usable energy capacity, kWh.
    pub capacity_kwh: f64,
    /// Charge efficiency (stored / drawn), in (0, 1].
    pub charge_efficiency: f64,
    /// Discharge efficiency (delivered / drained), in (0, 1].
    pub discharge_efficiency: f64,
    /// Operating SoC ceiling, percent.
    pub soc_max: f64,
    /// Operating SoC floor, percent.
    pub soc_min: f64,
    /// SoC at t = 0, percent.
    pub initial_soc: f64,
}

impl Default for BessConfig {
    fn default() -> Self {
        BessConfig {
            max_charge_kw: 500.0,
            max_discharge_kw: 500.0,
            capacity_kwh: 250.0,
            charge_efficiency: 0.95,
            discharge_efficiency: 0.95,
            soc_max: 90.0,
            soc_min: 20.0,
            initial_soc: 50.0,
        }
    }
}

impl BessConfig {
    fn validate(&self) -> Result<()> {
        if self.capacity_kwh <= 0.0 {
            return Err(Error::Config("bess capacity_kwh must be positive".into()));
        }
        if self.max_charge_kw < 0.0 || self.max_discharge_kw < 0.0 {
            return Err(Error::Config("bess power limits must be >= 0".into()));
        }
        for (name, eff) in [
            ("charge_efficiency", self.charge_efficiency),
            ("discharge_efficiency", self.discharge_efficiency),
        ] {
            if !(eff > 0.0 && eff <= 1.0) {
                return Err(Error::Config(format!("bess {name} must be in (0, 1]")));
            }
        }
        if !(0.0..=100.0).contains(&self.soc_min)
            || !(0.0..=100.0).contains(&self.soc_max)
            || self.soc_min >= self.soc_max
        {
            return Err(Error::Config(
                "bess soc_min/soc_max must satisfy 0 <= min < max <= 100".into(),
            ));
        }
        if !(self.soc_min..=self.soc_max).contains(&self.initial_soc) {
            return Err(Error::Config(
                "bess initial_soc must lie within [soc_min, soc_max]".into(),
            ));
        }
        Ok(())
    }
}

/// Full run configuration.
///
/// Serializes to/from TOML; every key is optional and falls back to the
/// default shown by [`SimConfig::default`]. See `SimConfig::load` for the
/// file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Master seed; drives scheduling and plant ripple on separate streams.
    pub seed: u64,
    /// Run length in seconds (1 Hz sampling → also the record count).
    pub duration_s: u64,
    /// Poisson arrival rate per port, sessions/hour, in canonical port order.
    pub arrival_rates_per_hour: [f64; 6],
    /// Dwell (park) time bounds, seconds, inclusive.
    pub dwell_min_s: u64,
    pub dwell_max_s: u64,
    /// Arriving vehicles draw initial SoC uniformly from this range, percent.
    pub initial_soc_range: (f64, f64),
    /// ... and a charge target uniformly from this range, percent.
    pub target_soc_range: (f64, f64),
    /// Probability that a 50 kW-port vehicle is an `Other` pack instead of a
    /// mid-range pack. Defaults to 0: a heterogeneous pack mix on one port
    /// makes the port's current→ΔSoC map multi-valued, which is a stressor
    /// scenario rather than baseline behavior.
    pub other_battery_share: f64,
    /// Grid import cap at the point of common coupling, kW.
    pub grid_cap_kw: f64,
    /// Half-width of the uniform per-second charger current ripple, A.
    pub current_ripple_a: f64,
    /// DC bus voltage, V (currents are powers divided by this).
    pub dc_bus_voltage: f64,
    /// Stationary storage parameters.
    pub bess: BessConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 7,
            // Four days of training data plus one test day.
            duration_s: 5 * 86_400,
            arrival_rates_per_hour: [2.0; 6],
            dwell_min_s: 900,
            dwell_max_s: 7200,
            initial_soc_range: (10.0, 60.0),
            target_soc_range: (70.0, 100.0),
            other_battery_share: 0.0,
            // Peak port demand is 50 + 5×300 = 1550 kW; the cap must leave a
            // deficit the 500 kW storage can cover, or busy moments would
            // halt the run as infeasible.
            grid_cap_kw: 1100.0,
            current_ripple_a: 0.1,
            dc_bus_voltage: 480.0,
            bess: BessConfig::default(),
        }
    }
}

impl SimConfig {
    /// Read a TOML config file. Unknown keys are rejected so typos surface
    /// instead of silently falling back to defaults.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: SimConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arrival_rates_per_hour.iter().any(|r| *r < 0.0) {
            return Err(Error::Config("arrival rates must be >= 0".into()));
        }
        if self.dwell_min_s == 0 || self.dwell_min_s > self.dwell_max_s {
            return Err(Error::Config(
                "dwell bounds must satisfy 1 <= dwell_min_s <= dwell_max_s".into(),
            ));
        }
        let (ilo, ihi) = self.initial_soc_range;
        let (tlo, thi) = self.target_soc_range;
        if !(0.0 <= ilo && ilo <= ihi && ihi <= 100.0) {
            return Err(Error::Config("initial_soc_range must be ordered within [0, 100]".into()));
        }
        if !(0.0 <= tlo && tlo <= thi && thi <= 100.0) {
            return Err(Error::Config("target_soc_range must be ordered within [0, 100]".into()));
        }
        if ihi >= tlo {
            return Err(Error::Config(
                "initial_soc_range must lie strictly below target_soc_range \
                 (every session needs initial < target)"
                    .into(),
            ));
        }
        if self.grid_cap_kw <= 0.0 {
            return Err(Error::Config("grid_cap_kw must be positive".into()));
        }
        if self.current_ripple_a < 0.0 || self.current_ripple_a >= 10.0 {
            return Err(Error::Config(
                "current_ripple_a must be in [0, 10) — ripple is regulation \
                 texture, not load"
                    .into(),
            ));
        }
        if self.dc_bus_voltage <= 0.0 {
            return Err(Error::Config("dc_bus_voltage must be positive".into()));
        }
        self.bess.validate()
    }
}

// ---------------------------------------------------------------------------
// Sessions
// ---------------------------------------------------------------------------

/// One vehicle's visit to one port.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargingSession {
    pub port: PortId,
    /// Second the vehicle plugs in.
    pub arrival_t: u64,
    /// Second the vehicle leaves, whether or not charging finished.
    pub departure_t: u64,
    /// SoC at arrival, percent.
    pub initial_soc: f64,
    /// Charging stops once SoC reaches this, percent.
    pub target_soc: f64,
    pub battery: BatteryKind,
}

/// Draw a session schedule for every port.
///
/// Arrivals follow a per-port Poisson process thinned by rejection: a
/// candidate arriving before the previous session has cleared the port (plus
/// one idle second, so session boundaries always appear as status flips) is
/// discarded. Dwell, initial SoC and target SoC are uniform draws; vehicles
/// on high-power ports are long-range packs, vehicles on the 50 kW port are
/// mid-range packs (or `Other`, with configured probability).
///
/// Deterministic: the schedule is a pure function of the config.
pub fn schedule_sessions(config: &SimConfig) -> Result<Vec<ChargingSession>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(STREAM_SCHEDULE);

    let mut sessions = Vec::new();
    for port in PortId::ALL {
        let rate_per_s = config.arrival_rates_per_hour[port.index()] / 3600.0;
        if rate_per_s <= 0.0 {
            continue;
        }
        let charger = ChargerSpec::for_port(port);
        let mut clock = 0.0f64;
        // Next admissible arrival second (previous departure + 1 idle s).
        let mut next_free_t = 0u64;
        loop {
            // Exponential inter-arrival gap via inverse transform.
            let u: f64 = rng.gen();
            clock += -(1.0 - u).ln() / rate_per_s;
            let arrival_t = clock.ceil() as u64;
            if arrival_t >= config.duration_s {
                break;
            }
            if arrival_t < next_free_t {
                continue; // port still occupied: reject this candidate
            }
            let dwell = rng.gen_range(config.dwell_min_s..=config.dwell_max_s);
            let initial_soc =
                rng.gen_range(config.initial_soc_range.0..=config.initial_soc_range.1);
            let target_soc =
                rng.gen_range(config.target_soc_range.0..=config.target_soc_range.1);
            let battery = match charger.kind {
                ChargerKind::TerraHp => BatteryKind::Bev300,
                ChargerKind::Terra53 => {
                    if rng.gen::<f64>() < config.other_battery_share {
                        BatteryKind::Other
                    } else {
                        BatteryKind::Bev150
                    }
                }
            };
            let departure_t = (arrival_t + dwell).min(config.duration_s);
            sessions.push(ChargingSession {
                port,
                arrival_t,
                departure_t,
                initial_soc,
                target_soc,
                battery,
            });
            next_free_t = departure_t + 1;
        }
    }
    Ok(sessions)
}

// ---------------------------------------------------------------------------
// SoC update
// ---------------------------------------------------------------------------

/// Result of one SoC integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocStep {
    /// New SoC, percent, clamped into [0, 100].
    pub soc: f64,
    /// True when the raw update left [0, 100] and was clamped.
    pub clamped: bool,
}

/// Coulomb-counting SoC update:
/// `soc' = soc + 100 · I · dt / (Q · 3600)` with `I` in amperes, `Q` in
/// ampere-hours and `dt` in seconds.
///
/// # Errors
/// `capacity_ah` and `dt_s` must be positive.
pub fn step_soc(soc_prev: f64, current_a: f64, capacity_ah: f64, dt_s: f64) -> Result<SocStep> {
    if capacity_ah <= 0.0 || !capacity_ah.is_finite() {
        return Err(Error::Domain(format!(
            "battery capacity must be positive, got {capacity_ah} Ah"
        )));
    }
    if dt_s <= 0.0 || !dt_s.is_finite() {
        return Err(Error::Domain(format!(
            "time step must be positive, got {dt_s} s"
        )));
    }
    let raw = soc_prev + 100.0 * current_a * dt_s / (capacity_ah * 3600.0);
    let soc = raw.clamp(0.0, 100.0);
    Ok(SocStep {
        soc,
        clamped: soc != raw,
    })
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct ActivePort {
    session_idx: usize,
    soc: f64,
    battery: BatterySpec,
    /// Base charging power before ripple, kW.
    power_kw: f64,
}

/// Run the plant for `config.duration_s` seconds against a session schedule
/// (normally the output of [`schedule_sessions`]).
///
/// Every emitted record satisfies the telemetry invariants; in particular
/// `i_pcc = i_bess + Σ i_ev` holds exactly because `i_pcc` is produced as
/// that sum. Port SoC reads 0 while a port is not actively charging, so the
/// per-port SoC column jumps exactly when the charging status flips.
///
/// # Errors
/// * Sessions overlapping on one port, out-of-range SoCs, or a battery on
///   the wrong charger family are rejected up front.
/// * If port demand ever exceeds the grid cap plus what the storage can
///   discharge, the run halts with [`Error::InfeasibleDispatch`] — the plant
///   as configured cannot serve the schedule, and fabricating data would
///   hide it.
pub fn simulate(config: &SimConfig, sessions: &[ChargingSession]) -> Result<TelemetrySeries> {
    config.validate()?;
    let per_port = validate_sessions(config, sessions)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(STREAM_PLANT);

    let volts = config.dc_bus_voltage;
    let bess = &config.bess;
    let mut bess_soc = bess.initial_soc;

    // Per-port cursor into its session list + active charging state.
    let mut next_session = [0usize; 6];
    let mut active: [Option<ActivePort>; 6] = Default::default();

    let mut records = Vec::with_capacity(config.duration_s as usize);
    for t in 0..config.duration_s {
        // Departures first, arrivals second: a port freed at t can host a
        // session that starts at t (the scheduler never does this, but
        // hand-written schedules may).
        for port in PortId::ALL {
            let slot = port.index();
            if let Some(state) = &active[slot] {
                if t >= per_port[slot][state.session_idx].departure_t {
                    active[slot] = None;
                }
            }
            if active[slot].is_none() {
                let queue = &per_port[slot];
                let mut idx = next_session[slot];
                // Skip sessions whose window already passed (possible only
                // with hand-written schedules); activate on an arrival match.
                while idx < queue.len() && queue[idx].departure_t <= t {
                    idx += 1;
                }
                next_session[slot] = idx;
                if idx < queue.len() && queue[idx].arrival_t == t {
                    let session = &queue[idx];
                    let battery = BatterySpec::of(session.battery);
                    let charger = ChargerSpec::for_port(port);
                    active[slot] = Some(ActivePort {
                        session_idx: idx,
                        soc: session.initial_soc,
                        battery,
                        power_kw: charger.max_power_kw.min(battery.max_charge_kw),
                    });
                    next_session[slot] = idx + 1;
                }
            }
        }

        // Port draws (constant current plus regulation ripple).
        let mut readings = [PortReading::IDLE; 6];
        let mut demand_kw = 0.0f64;
        for port in PortId::ALL {
            let slot = port.index();
            if let Some(state) = &active[slot] {
                let base_current = state.power_kw * 1000.0 / volts;
                let ripple = if config.current_ripple_a > 0.0 {
                    rng.gen_range(-config.current_ripple_a..=config.current_ripple_a)
                } else {
                    0.0
                };
                let i_ev = base_current + ripple;
                let p_ev = i_ev * volts / 1000.0;
                readings[slot] = PortReading {
                    i_ev,
                    p_ev,
                    q_ev: 0.02 * p_ev,
                    cs: true,
                    soc_ev: state.soc,
                };
                demand_kw += p_ev;
            }
        }

        // Storage dispatch: grid first up to its cap, storage covers the
        // remainder; grid headroom recharges the storage at max power.
        let (p_in_kw, p_out_kw) = if demand_kw <= config.grid_cap_kw {
            let headroom = config.grid_cap_kw - demand_kw;
            let room_kwh = ((bess.soc_max - bess_soc) / 100.0 * bess.capacity_kwh).max(0.0);
            let energy_cap = room_kwh * 3600.0 / bess.charge_efficiency;
            (bess.max_charge_kw.min(headroom).min(energy_cap), 0.0)
        } else {
            let deficit = demand_kw - config.grid_cap_kw;
            let avail_kwh = ((bess_soc - bess.soc_min) / 100.0 * bess.capacity_kwh).max(0.0);
            let energy_cap = avail_kwh * bess.discharge_efficiency * 3600.0;
            let max_out = bess.max_discharge_kw.min(energy_cap);
            if deficit > max_out + 1e-9 {
                return Err(Error::InfeasibleDispatch {
                    t,
                    demand_kw,
                    available_kw: config.grid_cap_kw + max_out,
                });
            }
            (0.0, deficit)
        };

        let i_bess = (p_in_kw - p_out_kw) * 1000.0 / volts;
        // Canonical summation order; the balance invariant re-sums this way.
        let mut i_pcc = i_bess;
        for reading in &readings {
            i_pcc += reading.i_ev;
        }

        records.push(TelemetryRecord {
            t,
            i_pcc,
            i_bess,
            ports: readings,
        });

        // Advance state to t+1.
        bess_soc += 100.0 * (p_in_kw * bess.charge_efficiency - p_out_kw / bess.discharge_efficiency)
            / 3600.0
            / bess.capacity_kwh;
        for port in PortId::ALL {
            let slot = port.index();
            if let Some(state) = &mut active[slot] {
                let i_ev = readings[slot].i_ev;
                let step = step_soc(state.soc, i_ev, state.battery.capacity_ah, 1.0)?;
                let target = per_port[slot][state.session_idx].target_soc;
                if step.soc >= target {
                    // Charging complete; the vehicle may stay parked but the
                    // port stops reporting it.
                    active[slot] = None;
                } else {
                    state.soc = step.soc;
                }
            }
        }
    }

    TelemetrySeries::new(
        SeriesMeta {
            seed: config.seed,
            duration_s: config.duration_s,
            generator: format!("evci-guard {}", env!("CARGO_PKG_VERSION")),
        },
        records,
    )
}

/// Group sessions per port and enforce schedule invariants.
fn validate_sessions(
    config: &SimConfig,
    sessions: &[ChargingSession],
) -> Result<[Vec<ChargingSession>; 6]> {
    let mut per_port: [Vec<ChargingSession>; 6] = Default::default();
    for session in sessions {
        if session.arrival_t >= session.departure_t {
            return Err(Error::Plan(format!(
                "session on {} arrives at {} but departs at {}",
                session.port, session.arrival_t, session.departure_t
            )));
        }
        if !(0.0..=100.0).contains(&session.initial_soc)
            || session.target_soc <= session.initial_soc
            || session.target_soc > 100.0
        {
            return Err(Error::Plan(format!(
                "session on {}: SoC bounds violated (initial {}, target {})",
                session.port, session.initial_soc, session.target_soc
            )));
        }
        let charger = ChargerSpec::for_port(session.port);
        if !session.battery.pairs_with(charger.kind) {
            return Err(Error::Plan(format!(
                "session on {}: {} pack cannot charge on a {:?}",
                session.port, session.battery, charger.kind
            )));
        }
        per_port[session.port.index()].push(session.clone());
    }
    for (slot, queue) in per_port.iter_mut().enumerate() {
        queue.sort_by_key(|s| s.arrival_t);
        for pair in queue.windows(2) {
            // Strict gap: one idle second so the status flip is observable.
            if pair[1].arrival_t <= pair[0].departure_t {
                return Err(Error::Plan(format!(
                    "sessions on {} overlap: [{}, {}) then [{}, {})",
                    PortId::ALL[slot],
                    pair[0].arrival_t,
                    pair[0].departure_t,
                    pair[1].arrival_t,
                    pair[1].departure_t
                )));
            }
        }
    }
    let _ = config;
    Ok(per_port)
}

// ---------------------------------------------------------------------------
// Session ground-truth persistence
// ---------------------------------------------------------------------------

const SESSIONS_HEADER: &str = "port,arrival_t,departure_t,initial_soc,target_soc,battery_kind";

/// Write the session schedule (ground truth for evaluation) as CSV.
pub fn write_sessions_csv(path: &Path, sessions: &[ChargingSession]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{SESSIONS_HEADER}").map_err(io_err)?;
    for s in sessions {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.port.label(),
            s.arrival_t,
            s.departure_t,
            fmt_f64(s.initial_soc),
            fmt_f64(s.target_soc),
            s.battery.label()
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Read a schedule written by [`write_sessions_csv`].
pub fn read_sessions_csv(path: &Path) -> Result<Vec<ChargingSession>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut sessions = Vec::new();
    let mut line_no = 0usize;
    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        if line_no == 1 {
            if line != SESSIONS_HEADER {
                return Err(Error::parse(path, line_no, format!("unexpected header '{line}'")));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        }
        let parse_err = |what: &str, raw: &str| {
            Error::parse(path, line_no, format!("bad {what} '{raw}'"))
        };
        sessions.push(ChargingSession {
            port: fields[0].parse().map_err(|_| parse_err("port", fields[0]))?,
            arrival_t: fields[1].parse().map_err(|_| parse_err("arrival_t", fields[1]))?,
            departure_t: fields[2].parse().map_err(|_| parse_err("departure_t", fields[2]))?,
            initial_soc: fields[3].parse().map_err(|_| parse_err("initial_soc", fields[3]))?,
            target_soc: fields[4].parse().map_err(|_| parse_err("target_soc", fields[4]))?,
            battery: fields[5].parse().map_err(|_| parse_err("battery_kind", fields[5]))?,
        });
    }
    if line_no == 0 {
        return Err(Error::EmptyInput(format!("{}: empty sessions file", path.display())));
    }
    Ok(sessions)
}
