//! Bundled sample networks and matching encoding parameters.
//!
//! * `crossing`: one junction, two crossing one-way streets (two tracks in conflict).
//! * `grid`: 2x2 grid of four signalised junctions, twelve tracks.
//! * `four_way`: one junction with straight and left-turn tracks from four approaches.
//! * `triangle`: three mutually conflicting tracks; with [`triangle_params`]
//!   no programme can satisfy all conflicts.

use crate::lights::EncodingParams;
use crate::netmodel::{
    parse_network, Endpoint, Junction, Lane, Road, RoadNetwork, Track, Trajectory,
};

pub const MINIMAL_XML: &str = include_str!("../fixtures/minimal.xml");
pub const CROSSING_XML: &str = include_str!("../fixtures/crossing.xml");
pub const GRID_XML: &str = include_str!("../fixtures/grid.xml");
pub const FOUR_WAY_XML: &str = include_str!("../fixtures/four_way.xml");
pub const TRIANGLE_XML: &str = include_str!("../fixtures/triangle.xml");

fn parse(doc: &str) -> RoadNetwork {
    parse_network(doc).expect("bundled fixture parses")
}

/// One junction, one entry road, one exit road, one track.
pub fn minimal_network() -> RoadNetwork {
    minimal_network_with_prefix("")
}

/// [`minimal_network`] with every id prefixed by `prefix_`, for composing networks.
pub fn minimal_network_with_prefix(prefix: &str) -> RoadNetwork {
    let id = |s: &str| {
        if prefix.is_empty() {
            s.to_string()
        } else {
            format!("{prefix}_{s}")
        }
    };
    RoadNetwork {
        junctions: vec![Junction {
            id: id("J1"),
            x: 0.0,
            y: 0.0,
        }],
        roads: vec![
            Road {
                id: id("in"),
                from: Endpoint::External,
                to: Endpoint::Junction(id("J1")),
                length: 100.0,
                spawn_rate: 0.1,
            },
            Road {
                id: id("out"),
                from: Endpoint::Junction(id("J1")),
                to: Endpoint::External,
                length: 100.0,
                spawn_rate: 0.0,
            },
        ],
        lanes: vec![
            Lane {
                id: id("in_0"),
                road: id("in"),
            },
            Lane {
                id: id("out_0"),
                road: id("out"),
            },
        ],
        trajectories: vec![Trajectory {
            id: id("t1"),
            junction: id("J1"),
            in_lane: id("in_0"),
            out_lane: id("out_0"),
            length: 10.0,
        }],
        conflicts: vec![],
        tracks: vec![Track {
            id: 1,
            in_lane: id("in_0"),
            trajectory: id("t1"),
            out_lane: id("out_0"),
        }],
    }
}

pub fn crossing_network() -> RoadNetwork {
    parse(CROSSING_XML)
}

pub fn grid_network() -> RoadNetwork {
    parse(GRID_XML)
}

pub fn four_way_network() -> RoadNetwork {
    parse(FOUR_WAY_XML)
}

pub fn triangle_network() -> RoadNetwork {
    parse(TRIANGLE_XML)
}

/// 16-tick cycle, `t_min` 2, one tick each of yellow and red+yellow: 4-bit
/// fields, so the two-track crossing encodes into 16 bits. Meant for 1 s ticks.
pub fn crossing_params() -> EncodingParams {
    EncodingParams::new(16, 2, 1, 1, 1).expect("valid")
}

/// 60 s cycle at 200 ms ticks: 5 s minimal green, 3 s yellow, 2 s red+yellow.
pub fn grid_params() -> EncodingParams {
    EncodingParams::new(300, 25, 15, 10, 5).expect("valid")
}

/// Cycle shorter than three extended minimal windows.
pub fn triangle_params() -> EncodingParams {
    EncodingParams::new(20, 4, 2, 2, 1).expect("valid")
}
