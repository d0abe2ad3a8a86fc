//! Road-network model: junctions, one-way roads, FIFO lanes, junction
//! trajectories, conflict pairs between trajectories, and tracks.
//!
//! A [`RoadNetwork`] is plain data. It can hold structurally invalid content
//! (see [`validate_network`]); [`parse_network`] only ever returns networks
//! that validate cleanly.

mod route;
mod validate;
mod xml;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub use route::{shortest_route, Route, RouteError, RouteTable};
pub use validate::{validate_network, Violation};
pub use xml::{parse_network, serialize_network, ParseError, ParseErrorKind};

/// Reserved junction id marking the frontier of the model.
pub const EXTERNAL: &str = "EXTERNAL";

/// 1-based track index. Tracks are dense `1..=M` and define chromosome field order.
pub type TrackId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    External,
    Junction(String),
}

impl Endpoint {
    pub fn parse(s: &str) -> Self {
        if s == EXTERNAL {
            Endpoint::External
        } else {
            Endpoint::Junction(s.to_string())
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Endpoint::External => EXTERNAL,
            Endpoint::Junction(id) => id,
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self, Endpoint::External)
    }

    pub fn junction(&self) -> Option<&str> {
        match self {
            Endpoint::External => None,
            Endpoint::Junction(id) => Some(id),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub id: String,
    /// Metadata only; the simulation never looks at coordinates.
    pub x: f64,
    pub y: f64,
}

/// One-way part of a street between two junctions (or the model frontier).
#[derive(Debug, Clone, PartialEq)]
pub struct Road {
    pub id: String,
    pub from: Endpoint,
    pub to: Endpoint,
    /// Meters.
    pub length: f64,
    /// Per-tick spawn probability; only entry roads may carry a non-zero rate.
    pub spawn_rate: f64,
}

impl Road {
    pub fn is_entry(&self) -> bool {
        self.from.is_external()
    }

    pub fn is_exit(&self) -> bool {
        self.to.is_external()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lane {
    pub id: String,
    pub road: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: String,
    pub junction: String,
    pub in_lane: String,
    pub out_lane: String,
    /// Crossing length in meters. Used for routing only.
    pub length: f64,
}

/// Unordered pair of trajectories that may collide. Stored once per pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictPair {
    pub a: String,
    pub b: String,
}

/// Binds an ingoing lane, a trajectory and an outgoing lane. Each track has its own light.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Track {
    pub id: TrackId,
    pub in_lane: String,
    pub trajectory: String,
    pub out_lane: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoadNetwork {
    pub junctions: Vec<Junction>,
    pub roads: Vec<Road>,
    pub lanes: Vec<Lane>,
    pub trajectories: Vec<Trajectory>,
    pub conflicts: Vec<ConflictPair>,
    pub tracks: Vec<Track>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown track {0}")]
    UnknownTrack(TrackId),
}

impl RoadNetwork {
    /// Number of tracks, i.e. the number of independently programmed lights.
    pub fn track_count(&self) -> usize {
        self.tracks.len()
    }

    pub fn road(&self, id: &str) -> Option<&Road> {
        self.roads.iter().find(|r| r.id == id)
    }

    pub fn lane(&self, id: &str) -> Option<&Lane> {
        self.lanes.iter().find(|l| l.id == id)
    }

    pub fn trajectory(&self, id: &str) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.id == id)
    }

    pub fn track(&self, id: TrackId) -> Option<&Track> {
        self.tracks.iter().find(|t| t.id == id)
    }

    /// Road a lane belongs to.
    pub fn lane_road(&self, lane: &str) -> Option<&Road> {
        self.lane(lane).and_then(|l| self.road(&l.road))
    }

    fn track_of_trajectory(&self) -> HashMap<&str, TrackId> {
        self.tracks
            .iter()
            .map(|t| (t.trajectory.as_str(), t.id))
            .collect()
    }

    /// Every conflicting pair of tracks as `(a, b)` with `a < b`, ascending.
    ///
    /// Conflict pairs whose trajectories are not bound to a track are skipped.
    pub fn conflicting_track_pairs(&self) -> Vec<(TrackId, TrackId)> {
        let by_traj = self.track_of_trajectory();
        let mut pairs: BTreeSet<(TrackId, TrackId)> = BTreeSet::new();
        for c in &self.conflicts {
            if let (Some(&a), Some(&b)) = (by_traj.get(c.a.as_str()), by_traj.get(c.b.as_str())) {
                if a != b {
                    pairs.insert((a.min(b), a.max(b)));
                }
            }
        }
        pairs.into_iter().collect()
    }
}

/// Tracks whose trajectory is in a conflict pair with the trajectory of `track`.
pub fn conflicting_tracks(
    net: &RoadNetwork,
    track: TrackId,
) -> Result<BTreeSet<TrackId>, NetError> {
    let own = net.track(track).ok_or(NetError::UnknownTrack(track))?;
    let by_traj = net.track_of_trajectory();
    let mut out = BTreeSet::new();
    for c in &net.conflicts {
        let other = if c.a == own.trajectory {
            &c.b
        } else if c.b == own.trajectory {
            &c.a
        } else {
            continue;
        };
        if let Some(&t) = by_traj.get(other.as_str()) {
            if t != track {
                out.insert(t);
            }
        }
    }
    Ok(out)
}
