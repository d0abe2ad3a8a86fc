//! Traffic-lights programmes: per-track green windows over a discrete cycle,
//! their binary chromosome encoding, feasibility rules and conflict repair.
//!
//! Every track cycles Green -> Yellow -> Red -> RedYellow. A window is the
//! pair `(start, green)`; yellow follows the green and red+yellow precedes
//! it, both with fixed durations. Two conflicting tracks must keep their
//! *extended* windows `[start - red_yellow, start + green + yellow)` apart.

mod baseline;
mod check;
mod codec;
mod io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::TrackId;

pub use baseline::even_split_programme;
pub(crate) use check::validate_with_degrees;
pub use check::{repair_conflicts, validate_programme, ProgrammeViolation, RepairOutcome};
pub use codec::{decode, random_chromosome, Chromosome, ProgrammeCodec};

/// Fixed encoding parameters shared by every track. All durations are in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodingParams {
    /// Ticks per cycle (cycle length divided by tick length).
    pub cycle_ticks: u32,
    /// Minimal green duration.
    pub t_min: u32,
    pub yellow_ticks: u32,
    pub red_yellow_ticks: u32,
    /// Extra spacing inserted between conflicting extended windows by repair.
    pub repair_gap: u32,
}

impl EncodingParams {
    pub fn new(
        cycle_ticks: u32,
        t_min: u32,
        yellow_ticks: u32,
        red_yellow_ticks: u32,
        repair_gap: u32,
    ) -> Result<Self, LightsError> {
        let p = Self {
            cycle_ticks,
            t_min,
            yellow_ticks,
            red_yellow_ticks,
            repair_gap,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<(), LightsError> {
        let bad = |msg: String| Err(LightsError::InvalidParams(msg));
        if self.cycle_ticks == 0 {
            return bad("cycle_ticks must be at least 1".into());
        }
        if self.t_min == 0 {
            return bad("t_min must be at least 1".into());
        }
        if self.yellow_ticks == 0 || self.red_yellow_ticks == 0 {
            return bad("transient durations must be at least 1 tick".into());
        }
        let n = self.bits_per_field();
        if u64::from(self.t_min) > 1u64 << n {
            return bad(format!("t_min {} exceeds 2^{n}", self.t_min));
        }
        Ok(())
    }

    /// Ticks reserved for the transient lights (yellow plus red+yellow).
    pub fn transient_reserve(&self) -> u32 {
        self.yellow_ticks + self.red_yellow_ticks
    }

    pub fn bits_per_field(&self) -> u32 {
        bits_per_field(self.cycle_ticks)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LightsError {
    #[error("invalid encoding parameters: {0}")]
    InvalidParams(String),
    #[error("{}maximal green {t_max} is below t_min {t_min}", track.map(|t| format!("track {t}: ")).unwrap_or_default())]
    InfeasibleTrack {
        track: Option<TrackId>,
        t_max: i64,
        t_min: u32,
    },
    #[error("chromosome has {found} bits, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("unknown track {0}")]
    UnknownTrack(TrackId),
}

/// Smallest `n` with `cycle_ticks <= 2^n`.
pub fn bits_per_field(cycle_ticks: u32) -> u32 {
    let mut n = 0;
    while u64::from(cycle_ticks) > 1u64 << n {
        n += 1;
    }
    n
}

/// Longest feasible green for a track that collides with `k` others:
/// the cycle minus `k` minimal greens minus the transient reserve.
pub fn compute_t_max(params: &EncodingParams, k: usize) -> Result<u32, LightsError> {
    let t_max = max_green(
        params.cycle_ticks,
        k,
        params.t_min,
        params.transient_reserve(),
    );
    if t_max < i64::from(params.t_min) {
        return Err(LightsError::InfeasibleTrack {
            track: None,
            t_max,
            t_min: params.t_min,
        });
    }
    Ok(t_max as u32)
}

pub(crate) fn max_green(cycle_ticks: u32, k: usize, t_min: u32, reserve: u32) -> i64 {
    i64::from(cycle_ticks) - k as i64 * i64::from(t_min) - i64::from(reserve)
}

/// Green window of one track: green from `start` for `green` ticks, cyclically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseWindow {
    pub track: TrackId,
    pub start: u32,
    pub green: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LightsProgramme {
    pub params: EncodingParams,
    /// One window per track, in track order.
    pub windows: Vec<PhaseWindow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LightColor {
    Green,
    Yellow,
    Red,
    RedYellow,
}

impl LightColor {
    /// Vehicles may enter the junction on green, and on yellow when too close to stop.
    pub fn permits_crossing(self) -> bool {
        matches!(self, LightColor::Green | LightColor::Yellow)
    }
}

impl LightsProgramme {
    pub fn window(&self, track: TrackId) -> Option<&PhaseWindow> {
        match self.windows.get(track.wrapping_sub(1)) {
            Some(w) if w.track == track => Some(w),
            _ => self.windows.iter().find(|w| w.track == track),
        }
    }

    /// Colour of `window` at `tick`, given the programme's transient durations.
    pub fn color_of(&self, window: &PhaseWindow, tick: u64) -> LightColor {
        let cycle = u64::from(self.params.cycle_ticks);
        let c = tick % cycle;
        let offset = (c + cycle - u64::from(window.start) % cycle) % cycle;
        let green = u64::from(window.green);
        if offset < green {
            LightColor::Green
        } else if offset < green + u64::from(self.params.yellow_ticks) {
            LightColor::Yellow
        } else if offset >= cycle.saturating_sub(u64::from(self.params.red_yellow_ticks)) {
            LightColor::RedYellow
        } else {
            LightColor::Red
        }
    }

    /// Red duration implied by a window: cycle minus green minus transients.
    pub fn red_ticks(&self, window: &PhaseWindow) -> i64 {
        i64::from(self.params.cycle_ticks)
            - i64::from(window.green)
            - i64::from(self.params.transient_reserve())
    }
}

/// Colour of a track's light at an absolute tick.
pub fn light_state_at(
    prog: &LightsProgramme,
    track: TrackId,
    tick: u64,
) -> Result<LightColor, LightsError> {
    let w = prog.window(track).ok_or(LightsError::UnknownTrack(track))?;
    Ok(prog.color_of(w, tick))
}
