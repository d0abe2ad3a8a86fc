use std::collections::HashMap;

use super::SimError;
use crate::lights::{validate_with_degrees, LightsProgramme, ProgrammeViolation};
use crate::netmodel::{
    conflicting_tracks, validate_network, RoadNetwork, Route, RouteTable, TrackId,
};

#[derive(Debug, Clone)]
pub(crate) struct LaneInfo {
    pub id: String,
    pub length: f64,
    /// Lane of an exit road: vehicles leave at its end.
    pub exit: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TrackInfo {
    pub in_lane: usize,
    pub out_lane: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct EntryInfo {
    pub spawn_rate: f64,
    /// Reachable exits with their routes, ascending by exit id.
    pub routes: Vec<(String, Route)>,
}

/// A validated network compiled for simulation: lanes indexed in id order,
/// track endpoints resolved, routes precomputed. Build once, share between
/// worlds.
#[derive(Debug, Clone)]
pub struct Layout {
    pub(crate) lanes: Vec<LaneInfo>,
    lane_index: HashMap<String, usize>,
    pub(crate) tracks: Vec<TrackInfo>,
    pub(crate) entries: Vec<(String, EntryInfo)>,
    degrees: Vec<usize>,
    conflicts: Vec<(TrackId, TrackId)>,
}

impl Layout {
    pub fn new(net: &RoadNetwork) -> Result<Self, SimError> {
        let violations = validate_network(net);
        if !violations.is_empty() {
            return Err(SimError::InvalidNetwork(violations));
        }
        let mut lanes: Vec<LaneInfo> = net
            .lanes
            .iter()
            .map(|l| {
                let road = net.road(&l.road).expect("validated");
                LaneInfo {
                    id: l.id.clone(),
                    length: road.length,
                    exit: road.is_exit(),
                }
            })
            .collect();
        lanes.sort_by(|a, b| a.id.cmp(&b.id));
        let lane_index: HashMap<String, usize> = lanes
            .iter()
            .enumerate()
            .map(|(i, l)| (l.id.clone(), i))
            .collect();

        let mut tracks = net.tracks.clone();
        tracks.sort_by_key(|t| t.id);
        let tracks = tracks
            .iter()
            .map(|t| TrackInfo {
                in_lane: lane_index[&t.in_lane],
                out_lane: lane_index[&t.out_lane],
            })
            .collect();

        let table = RouteTable::build(net);
        let mut entries: Vec<(String, EntryInfo)> = net
            .roads
            .iter()
            .filter(|r| r.is_entry())
            .map(|r| {
                let routes = table
                    .exits(&r.id)
                    .iter()
                    .filter(|(_, route)| !route.is_empty())
                    .cloned()
                    .collect();
                (
                    r.id.clone(),
                    EntryInfo {
                        spawn_rate: r.spawn_rate,
                        routes,
                    },
                )
            })
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));

        let degrees = (1..=net.track_count())
            .map(|t| conflicting_tracks(net, t).map_or(0, |s| s.len()))
            .collect();
        Ok(Self {
            lanes,
            lane_index,
            tracks,
            entries,
            degrees,
            conflicts: net.conflicting_track_pairs(),
        })
    }

    pub fn lane_count(&self) -> usize {
        self.lanes.len()
    }

    /// Lane ids in processing order.
    pub fn lane_ids(&self) -> impl Iterator<Item = &str> {
        self.lanes.iter().map(|l| l.id.as_str())
    }

    pub fn lane_id(&self, lane: usize) -> &str {
        &self.lanes[lane].id
    }

    pub fn lane_length(&self, lane: usize) -> f64 {
        self.lanes[lane].length
    }

    pub fn lane_of(&self, id: &str) -> Option<usize> {
        self.lane_index.get(id).copied()
    }

    pub fn track_count(&self) -> usize {
        self.tracks.len()
    }

    /// `(in_lane, out_lane)` indices of a track.
    pub fn track_lanes(&self, track: TrackId) -> Option<(usize, usize)> {
        let t = self.tracks.get(track.checked_sub(1)?)?;
        Some((t.in_lane, t.out_lane))
    }

    /// Route from an entry road to an exit road, if both exist and connect.
    pub fn route(&self, entry: &str, exit: &str) -> Option<&Route> {
        let (_, info) = self.entries.iter().find(|(id, _)| id == entry)?;
        info.routes.iter().find(|(e, _)| e == exit).map(|(_, r)| r)
    }

    pub fn validate(&self, prog: &LightsProgramme) -> Vec<ProgrammeViolation> {
        validate_with_degrees(prog, &self.degrees, &self.conflicts)
    }
}
