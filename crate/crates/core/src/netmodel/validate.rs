use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::{Endpoint, RoadNetwork, EXTERNAL};

/// A broken structural rule. Violations are data: validation never fails.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("junction id `{EXTERNAL}` is reserved for the model frontier")]
    ReservedId,
    #[error("{kind} `{id}` references unknown {target} `{reference}`")]
    UnknownReference {
        kind: &'static str,
        id: String,
        target: &'static str,
        reference: String,
    },
    #[error("{kind} `{id}`: invalid {attribute}: {reason}")]
    InvalidAttribute {
        kind: &'static str,
        id: String,
        attribute: &'static str,
        reason: String,
    },
    #[error("road `{road}` has both endpoints external")]
    BothEndpointsExternal { road: String },
    #[error("road `{road}` is not an entry road but has a non-zero spawn rate")]
    SpawnOnInternalRoad { road: String },
    #[error("road `{road}` has no lane")]
    MissingLane { road: String },
    #[error("trajectory `{trajectory}`: lane `{lane}` does not {side} junction `{junction}`")]
    TrajectoryEndpoint {
        trajectory: String,
        lane: String,
        side: &'static str,
        junction: String,
    },
    #[error("trajectory `{trajectory}` conflicts with itself")]
    SelfConflict { trajectory: String },
    #[error("conflict between `{a}` and `{b}` is stored more than once")]
    DuplicateConflict { a: String, b: String },
    #[error("conflict between `{a}` and `{b}` spans different junctions")]
    CrossJunctionConflict { a: String, b: String },
    #[error("track {track}: lanes do not match trajectory `{trajectory}`")]
    TrackMismatch { track: usize, trajectory: String },
    #[error("track at position {position} has index {found}; indices must be 1..M in order")]
    TrackIndexNotDense { position: usize, found: usize },
    #[error("trajectory `{trajectory}` is not bound to any track")]
    UntrackedTrajectory { trajectory: String },
    #[error("trajectory `{trajectory}` is bound to more than one track")]
    TrajectoryInManyTracks { trajectory: String },
}

impl Violation {
    /// Short rule name, stable across releases.
    pub fn rule(&self) -> &'static str {
        match self {
            Violation::DuplicateId { .. } => "DuplicateId",
            Violation::ReservedId => "ReservedId",
            Violation::UnknownReference { .. } => "UnknownReference",
            Violation::InvalidAttribute { .. } => "InvalidAttribute",
            Violation::BothEndpointsExternal { .. } => "BothEndpointsExternal",
            Violation::SpawnOnInternalRoad { .. } => "SpawnOnInternalRoad",
            Violation::MissingLane { .. } => "MissingLane",
            Violation::TrajectoryEndpoint { .. } => "TrajectoryEndpoint",
            Violation::SelfConflict { .. } => "SelfConflict",
            Violation::DuplicateConflict { .. } => "DuplicateConflict",
            Violation::CrossJunctionConflict { .. } => "CrossJunctionConflict",
            Violation::TrackMismatch { .. } => "TrackMismatch",
            Violation::TrackIndexNotDense { .. } => "TrackIndexNotDense",
            Violation::UntrackedTrajectory { .. } => "UntrackedTrajectory",
            Violation::TrajectoryInManyTracks { .. } => "TrajectoryInManyTracks",
        }
    }

    /// Element kind and key of the offending element, used to locate it in a document.
    pub(crate) fn subject(&self) -> (&'static str, String) {
        match self {
            Violation::DuplicateId { kind, id } => (kind, id.clone()),
            Violation::ReservedId => ("junction", EXTERNAL.to_string()),
            Violation::UnknownReference { kind, id, .. } => (kind, id.clone()),
            Violation::InvalidAttribute { kind, id, .. } => (kind, id.clone()),
            Violation::BothEndpointsExternal { road }
            | Violation::SpawnOnInternalRoad { road }
            | Violation::MissingLane { road } => ("road", road.clone()),
            Violation::TrajectoryEndpoint { trajectory, .. }
            | Violation::UntrackedTrajectory { trajectory }
            | Violation::TrajectoryInManyTracks { trajectory } => {
                ("trajectory", trajectory.clone())
            }
            Violation::SelfConflict { trajectory } => {
                ("conflict", conflict_key(trajectory, trajectory))
            }
            Violation::DuplicateConflict { a, b } | Violation::CrossJunctionConflict { a, b } => {
                ("conflict", conflict_key(a, b))
            }
            Violation::TrackMismatch { track, .. } => ("track", track.to_string()),
            Violation::TrackIndexNotDense { found, .. } => ("track", found.to_string()),
        }
    }
}

pub(crate) fn conflict_key(a: &str, b: &str) -> String {
    format!("{a}\u{0}{b}")
}

fn check_length(out: &mut Vec<Violation>, kind: &'static str, id: &str, value: f64) {
    if !(value.is_finite() && value > 0.0) {
        out.push(Violation::InvalidAttribute {
            kind,
            id: id.to_string(),
            attribute: "length",
            reason: format!("{value} is not a positive finite number"),
        });
    }
}

fn find_duplicates<'a>(
    out: &mut Vec<Violation>,
    kind: &'static str,
    ids: impl Iterator<Item = &'a str>,
) -> HashSet<&'a str> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            out.push(Violation::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    seen
}

/// Checks every structural invariant of a network. Empty iff the network is valid.
pub fn validate_network(net: &RoadNetwork) -> Vec<Violation> {
    let mut out = Vec::new();

    let junctions = find_duplicates(
        &mut out,
        "junction",
        net.junctions.iter().map(|j| j.id.as_str()),
    );
    if junctions.contains(EXTERNAL) {
        out.push(Violation::ReservedId);
    }
    for j in &net.junctions {
        for (name, v) in [("x", j.x), ("y", j.y)] {
            if !v.is_finite() {
                out.push(Violation::InvalidAttribute {
                    kind: "junction",
                    id: j.id.clone(),
                    attribute: name,
                    reason: "not a finite number".into(),
                });
            }
        }
    }

    find_duplicates(&mut out, "road", net.roads.iter().map(|r| r.id.as_str()));
    let roads: HashMap<&str, _> = net.roads.iter().map(|r| (r.id.as_str(), r)).collect();
    for r in &net.roads {
        for (attr, ep) in [("from", &r.from), ("to", &r.to)] {
            if let Endpoint::Junction(j) = ep {
                if !junctions.contains(j.as_str()) {
                    out.push(Violation::UnknownReference {
                        kind: "road",
                        id: r.id.clone(),
                        target: if attr == "from" {
                            "junction (from)"
                        } else {
                            "junction (to)"
                        },
                        reference: j.clone(),
                    });
                }
            }
        }
        if r.from.is_external() && r.to.is_external() {
            out.push(Violation::BothEndpointsExternal { road: r.id.clone() });
        }
        check_length(&mut out, "road", &r.id, r.length);
        if !(0.0..=1.0).contains(&r.spawn_rate) {
            out.push(Violation::InvalidAttribute {
                kind: "road",
                id: r.id.clone(),
                attribute: "spawn_rate",
                reason: format!("{} is outside [0, 1]", r.spawn_rate),
            });
        } else if r.spawn_rate != 0.0 && !r.from.is_external() {
            out.push(Violation::SpawnOnInternalRoad { road: r.id.clone() });
        }
    }

    find_duplicates(&mut out, "lane", net.lanes.iter().map(|l| l.id.as_str()));
    let lanes: HashMap<&str, _> = net.lanes.iter().map(|l| (l.id.as_str(), l)).collect();
    let mut laned_roads = HashSet::new();
    for l in &net.lanes {
        if roads.contains_key(l.road.as_str()) {
            laned_roads.insert(l.road.as_str());
        } else {
            out.push(Violation::UnknownReference {
                kind: "lane",
                id: l.id.clone(),
                target: "road",
                reference: l.road.clone(),
            });
        }
    }

    let lane_road = |lane: &str| lanes.get(lane).and_then(|l| roads.get(l.road.as_str()));

    find_duplicates(
        &mut out,
        "trajectory",
        net.trajectories.iter().map(|t| t.id.as_str()),
    );
    let trajectories: HashMap<&str, _> = net
        .trajectories
        .iter()
        .map(|t| (t.id.as_str(), t))
        .collect();
    for t in &net.trajectories {
        if !junctions.contains(t.junction.as_str()) {
            out.push(Violation::UnknownReference {
                kind: "trajectory",
                id: t.id.clone(),
                target: "junction",
                reference: t.junction.clone(),
            });
        }
        check_length(&mut out, "trajectory", &t.id, t.length);
        for (side, lane) in [("end at", &t.in_lane), ("start at", &t.out_lane)] {
            if !lanes.contains_key(lane.as_str()) {
                out.push(Violation::UnknownReference {
                    kind: "trajectory",
                    id: t.id.clone(),
                    target: "lane",
                    reference: lane.clone(),
                });
                continue;
            }
            let Some(road) = lane_road(lane) else {
                continue;
            };
            let ep = if side == "end at" {
                &road.to
            } else {
                &road.from
            };
            if ep.junction() != Some(t.junction.as_str()) {
                out.push(Violation::TrajectoryEndpoint {
                    trajectory: t.id.clone(),
                    lane: lane.clone(),
                    side,
                    junction: t.junction.clone(),
                });
            }
        }
    }

    let mut seen_pairs = HashSet::new();
    for c in &net.conflicts {
        if c.a == c.b {
            out.push(Violation::SelfConflict {
                trajectory: c.a.clone(),
            });
            continue;
        }
        let key = if c.a < c.b {
            (c.a.as_str(), c.b.as_str())
        } else {
            (c.b.as_str(), c.a.as_str())
        };
        if !seen_pairs.insert(key) {
            out.push(Violation::DuplicateConflict {
                a: c.a.clone(),
                b: c.b.clone(),
            });
        }
        let mut known = true;
        for id in [&c.a, &c.b] {
            if !trajectories.contains_key(id.as_str()) {
                known = false;
                out.push(Violation::UnknownReference {
                    kind: "conflict",
                    id: conflict_key(&c.a, &c.b),
                    target: "trajectory",
                    reference: id.clone(),
                });
            }
        }
        if known && trajectories[c.a.as_str()].junction != trajectories[c.b.as_str()].junction {
            out.push(Violation::CrossJunctionConflict {
                a: c.a.clone(),
                b: c.b.clone(),
            });
        }
    }

    let mut bound: HashMap<&str, usize> = HashMap::new();
    for (pos, tr) in net.tracks.iter().enumerate() {
        if tr.id != pos + 1 {
            out.push(Violation::TrackIndexNotDense {
                position: pos + 1,
                found: tr.id,
            });
        }
        for lane in [&tr.in_lane, &tr.out_lane] {
            if !lanes.contains_key(lane.as_str()) {
                out.push(Violation::UnknownReference {
                    kind: "track",
                    id: tr.id.to_string(),
                    target: "lane",
                    reference: lane.clone(),
                });
            }
        }
        match trajectories.get(tr.trajectory.as_str()) {
            None => out.push(Violation::UnknownReference {
                kind: "track",
                id: tr.id.to_string(),
                target: "trajectory",
                reference: tr.trajectory.clone(),
            }),
            Some(t) => {
                *bound.entry(t.id.as_str()).or_default() += 1;
                if t.in_lane != tr.in_lane || t.out_lane != tr.out_lane {
                    out.push(Violation::TrackMismatch {
                        track: tr.id,
                        trajectory: tr.trajectory.clone(),
                    });
                }
            }
        }
    }
    for t in &net.trajectories {
        match bound.get(t.id.as_str()).copied().unwrap_or(0) {
            0 => out.push(Violation::UntrackedTrajectory {
                trajectory: t.id.clone(),
            }),
            1 => {}
            _ => out.push(Violation::TrajectoryInManyTracks {
                trajectory: t.id.clone(),
            }),
        }
    }

    // Reported last so that a deleted lane surfaces as the dangling reference first.
    for r in &net.roads {
        if !laned_roads.contains(r.id.as_str()) {
            out.push(Violation::MissingLane { road: r.id.clone() });
        }
    }

    out
}
