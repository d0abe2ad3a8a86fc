//! Tick-based microscopic simulation of vehicles driving through a
//! signalised network.
//!
//! Each tick runs four phases in order: lights are set from the programme,
//! every driver refreshes its perception, vehicles move (lanes in id order,
//! front to back), then finished vehicles leave and new ones enter.
//!
//! Vehicles are points. Queues keep at least `s_min` metres between
//! successive vehicles. Crossing a junction is instantaneous: a vehicle past
//! the stop line jumps to the start of its outgoing lane, carrying the
//! overshoot.

mod layout;
mod stats;
mod world;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lights::{LightColor, ProgrammeViolation};
use crate::netmodel::Violation;

pub use layout::Layout;
pub use stats::{
    aggregate_fitness, FitnessWeights, SimulationStats, StopEvent, TraceSample, VehicleRecord,
};
pub use world::{init_world, run, Crossing, StepReport, Vehicle, VehicleId, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Tick length in milliseconds.
    pub tick_ms: u32,
    pub total_ticks: u64,
    /// m/s
    pub v_max: f64,
    /// m/s²
    pub a_max: f64,
    /// m/s²
    pub b_max: f64,
    /// Standstill gap, m.
    pub s_min: f64,
    /// Speeds below this count as stopped, m/s.
    pub stop_speed_eps: f64,
    pub seed: u64,
    /// Keep a (tick, lane, position) sample per vehicle and tick.
    #[serde(default)]
    pub record_traces: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            tick_ms: 200,
            total_ticks: 1000,
            v_max: 13.9,
            a_max: 2.0,
            b_max: 4.5,
            s_min: 7.5,
            stop_speed_eps: 0.1,
            seed: 0,
            record_traces: false,
        }
    }
}

impl SimConfig {
    /// Tick length in seconds.
    pub fn dt(&self) -> f64 {
        f64::from(self.tick_ms) / 1000.0
    }

    pub fn check(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidConfig(msg.to_string()));
        if self.tick_ms == 0 {
            return bad("tick_ms must be positive");
        }
        let physical = [
            ("v_max", self.v_max),
            ("a_max", self.a_max),
            ("b_max", self.b_max),
            ("s_min", self.s_min),
            ("stop_speed_eps", self.stop_speed_eps),
        ];
        for (name, v) in physical {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::InvalidConfig(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if self.stop_speed_eps >= self.v_max {
            return bad("stop_speed_eps must be below v_max");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("invalid network: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidNetwork(Vec<Violation>),
    #[error("infeasible programme: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InfeasibleProgramme(Vec<ProgrammeViolation>),
}

/// What a driver knows at the start of a tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perception {
    /// Distance to the next obstacle along the route: the predecessor's
    /// position, or through the junction to the tail of the outgoing lane.
    /// `f64::INFINITY` when nothing is ahead.
    pub gap_ahead: f64,
    pub predecessor_speed: Option<f64>,
    /// Distance to the stop line; infinite on exit roads.
    pub distance_to_junction: f64,
    /// Light of the vehicle's next track; Green on exit roads.
    pub light: LightColor,
}

impl Default for Perception {
    fn default() -> Self {
        Self {
            gap_ahead: f64::INFINITY,
            predecessor_speed: None,
            distance_to_junction: f64::INFINITY,
            light: LightColor::Green,
        }
    }
}

/// Distance covered when driving at `v` for one tick and then braking at
/// `b_max` every following tick until standstill.
pub fn stopping_distance(v: f64, cfg: &SimConfig) -> f64 {
    let dt = cfg.dt();
    let h = cfg.b_max * dt;
    let mut d = 0.0;
    let mut u = v;
    while u > 0.0 {
        d += u * dt;
        u -= h;
    }
    d
}

/// Largest speed whose [`stopping_distance`] fits in `room`.
fn max_safe_speed(room: f64, cfg: &SimConfig) -> f64 {
    if room.is_infinite() {
        return f64::INFINITY;
    }
    if room <= 0.0 {
        return 0.0;
    }
    let dt = cfg.dt();
    let h = cfg.b_max * dt;
    // S(m·h) = dt·h·m(m+1)/2; S is linear in v between those knots.
    let knot = |m: u64| dt * h * (m * (m + 1)) as f64 / 2.0;
    let mut m = 0u64;
    while knot(m + 1) <= room {
        m += 1;
        if m as f64 * h > cfg.v_max {
            return f64::INFINITY;
        }
    }
    (room / dt + h * (m * (m + 1)) as f64 / 2.0) / (m + 1) as f64
}

/// New speed for one tick.
///
/// The target is the fastest speed from which the vehicle can still stop
/// within the free room ahead: the gap minus `s_min`, and the stop line
/// unless the light is green. On yellow the stop line is ignored when even
/// the hardest braking would overrun it. The target is then clamped to what
/// the acceleration and braking bounds allow from `v`.
pub fn drive_decision(p: &Perception, v: f64, cfg: &SimConfig) -> f64 {
    let dt = cfg.dt();
    let lo = (v - cfg.b_max * dt).max(0.0);
    let hi = (v + cfg.a_max * dt).min(cfg.v_max);
    let mut room = p.gap_ahead - cfg.s_min;
    if p.light != LightColor::Green {
        let line = p.distance_to_junction;
        // Braking at the bound lands exactly on the line; rounding must not flip that.
        let committed = p.light == LightColor::Yellow && stopping_distance(lo, cfg) > line + 1e-6;
        if !committed {
            room = room.min(line);
        }
    }
    max_safe_speed(room, cfg).clamp(lo, hi)
}
