//! Depot-scale EV charging telemetry: simulation, charge-rate prediction,
//! SoC-spoofing injection, and residual-threshold anomaly detection.
//!
//! The crate models a six-port charging depot (two 350 kW dual-cord fast
//! boards, one 350 kW single-cord board, one 50 kW board) behind a grid
//! connection with a battery storage system. From its per-second current
//! telemetry it:
//!
//! 1. **simulates** physically consistent telemetry — per-port currents,
//!    powers, charging status, and battery SoC obeying Kirchhoff's current
//!    law at the coupling bus and coulomb-counting SoC dynamics
//!    ([`sim`], [`telemetry`]);
//! 2. **learns** each port's per-second SoC change (ΔSoC) from current
//!    measurements with closed-form ridge regression, the penalty chosen
//!    by seeded k-fold grid-search cross-validation ([`ridge`],
//!    [`linalg`], [`scaling`]);
//! 3. **injects** three classes of SoC-spoofing attacks — constant decimal
//!    shifts, incremental ramps, and bounded random tampering — into the
//!    reported ΔSoC stream with exact ground-truth labels ([`spoof`]);
//! 4. **detects and classifies** the tampering by scanning the prediction
//!    residual for sustained threshold violations, immune to the plant's
//!    own session-boundary discontinuities ([`detect`]).
//!
//! [`pipeline`] wires the stages together through CSV artifacts (the same
//! layout the `evci-guard` binary exposes as subcommands), and
//! [`reference`] carries benchmark numbers from the original hardware
//! testbed study for side-by-side reporting.
//!
//! # Quick taste
//!
//! ```
//! use evci_guard::sim::{schedule_sessions, simulate, SimConfig};
//! use evci_guard::telemetry::{compute_delta_soc, PortId};
//!
//! let config = SimConfig {
//!     duration_s: 600,
//!     ..SimConfig::default()
//! };
//! let sessions = schedule_sessions(&config)?;
//! let series = simulate(&config, &sessions)?;
//! assert_eq!(series.len(), 600);
//!
//! // Per-second SoC change for the 50 kW port, boundary samples marked.
//! let delta = compute_delta_soc(&series, PortId::Ev0Terra53)?;
//! assert_eq!(delta.len(), 599);
//! # Ok::<(), evci_guard::Error>(())
//! ```
//!
//! The `examples/` directory walks through every capability end to end:
//! telemetry generation, predictor training, attack injection, threshold
//! calibration, detection, and the full file-based pipeline.

pub mod detect;
pub mod error;
pub mod linalg;
pub mod pipeline;
pub mod reference;
pub mod ridge;
pub mod scaling;
pub mod sim;
pub mod spoof;
pub mod telemetry;
mod textio;

pub use error::{Error, Result};
