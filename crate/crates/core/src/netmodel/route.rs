//! Static shortest-path routing over the track graph.
//!
//! Route length counts the entry road, then for each track its crossing
//! length and its outgoing road. Equal lengths are broken by the
//! lexicographically smallest sequence of track ids.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use thiserror::Error;

use super::{RoadNetwork, TrackId};

/// Ordered track ids from an entry road to an exit road.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Route {
    pub tracks: Vec<TrackId>,
}

impl Route {
    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("unknown road `{0}`")]
    UnknownRoad(String),
    #[error("road `{0}` does not start at the model frontier")]
    NotAnEntry(String),
    #[error("road `{0}` does not end at the model frontier")]
    NotAnExit(String),
    #[error("no route from `{entry}` to `{exit}`")]
    NoRoute { entry: String, exit: String },
}

#[derive(Debug, Clone)]
struct Key {
    dist: f64,
    path: Vec<TrackId>,
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| self.path.cmp(&other.path))
    }
}

/// Track adjacency with per-track cost, indexed by track id.
struct TrackGraph<'a> {
    net: &'a RoadNetwork,
    /// Crossing length plus outgoing road length.
    cost: HashMap<TrackId, f64>,
    /// Tracks leaving each lane, ascending by id.
    from_lane: HashMap<&'a str, Vec<TrackId>>,
    out_lane: HashMap<TrackId, &'a str>,
}

impl<'a> TrackGraph<'a> {
    fn new(net: &'a RoadNetwork) -> Self {
        let mut cost = HashMap::new();
        let mut from_lane: HashMap<&str, Vec<TrackId>> = HashMap::new();
        let mut out_lane = HashMap::new();
        for t in &net.tracks {
            let crossing = net.trajectory(&t.trajectory).map_or(0.0, |tr| tr.length);
            let road = net.lane_road(&t.out_lane).map_or(0.0, |r| r.length);
            cost.insert(t.id, crossing + road);
            from_lane.entry(t.in_lane.as_str()).or_default().push(t.id);
            out_lane.insert(t.id, t.out_lane.as_str());
        }
        for v in from_lane.values_mut() {
            v.sort_unstable();
        }
        Self {
            net,
            cost,
            from_lane,
            out_lane,
        }
    }

    /// Best key to every track reachable from `entry`.
    fn settle_from(&self, entry: &str) -> BTreeMap<TrackId, Key> {
        let entry_len = self.net.road(entry).map_or(0.0, |r| r.length);
        let mut heap = BinaryHeap::new();
        for lane in self.net.lanes.iter().filter(|l| l.road == entry) {
            for &t in self.from_lane.get(lane.id.as_str()).into_iter().flatten() {
                heap.push(Reverse(Key {
                    dist: entry_len + self.cost[&t],
                    path: vec![t],
                }));
            }
        }
        let mut settled: BTreeMap<TrackId, Key> = BTreeMap::new();
        while let Some(Reverse(key)) = heap.pop() {
            let last = *key.path.last().expect("paths are never empty");
            if settled.contains_key(&last) {
                continue;
            }
            for &next in self
                .from_lane
                .get(self.out_lane[&last])
                .into_iter()
                .flatten()
            {
                if settled.contains_key(&next) {
                    continue;
                }
                let mut path = key.path.clone();
                path.push(next);
                heap.push(Reverse(Key {
                    dist: key.dist + self.cost[&next],
                    path,
                }));
            }
            settled.insert(last, key);
        }
        settled
    }

    fn exit_road_of(&self, track: TrackId) -> Option<&'a str> {
        let road = self.net.lane_road(self.out_lane[&track])?;
        road.is_exit().then_some(road.id.as_str())
    }
}

fn check_endpoints(net: &RoadNetwork, entry: &str, exit: &str) -> Result<(), RouteError> {
    let e = net
        .road(entry)
        .ok_or_else(|| RouteError::UnknownRoad(entry.into()))?;
    let x = net
        .road(exit)
        .ok_or_else(|| RouteError::UnknownRoad(exit.into()))?;
    if !e.is_entry() {
        return Err(RouteError::NotAnEntry(entry.into()));
    }
    if !x.is_exit() {
        return Err(RouteError::NotAnExit(exit.into()));
    }
    Ok(())
}

/// Minimum-length route from an entry road to an exit road. Lanes must chain:
/// each track leaves from the lane the previous one arrived on.
pub fn shortest_route(net: &RoadNetwork, entry: &str, exit: &str) -> Result<Route, RouteError> {
    check_endpoints(net, entry, exit)?;
    let graph = TrackGraph::new(net);
    graph
        .settle_from(entry)
        .into_iter()
        .filter(|(t, _)| graph.exit_road_of(*t) == Some(exit))
        .map(|(_, k)| k)
        .min()
        .map(|k| Route { tracks: k.path })
        .ok_or_else(|| RouteError::NoRoute {
            entry: entry.into(),
            exit: exit.into(),
        })
}

/// Routes for every (entry, reachable exit) pair, computed once per network.
#[derive(Debug, Clone, Default)]
pub struct RouteTable {
    /// Entry road id -> reachable exits in road-id order with their routes.
    routes: BTreeMap<String, Vec<(String, Route)>>,
}

impl RouteTable {
    pub fn build(net: &RoadNetwork) -> Self {
        let graph = TrackGraph::new(net);
        let mut routes = BTreeMap::new();
        for entry in net.roads.iter().filter(|r| r.is_entry()) {
            let mut best: BTreeMap<&str, Key> = BTreeMap::new();
            for (t, key) in graph.settle_from(&entry.id) {
                if let Some(exit) = graph.exit_road_of(t) {
                    match best.get(exit) {
                        Some(b) if *b <= key => {}
                        _ => {
                            best.insert(exit, key);
                        }
                    }
                }
            }
            let list = best
                .into_iter()
                .map(|(exit, k)| (exit.to_string(), Route { tracks: k.path }))
                .collect();
            routes.insert(entry.id.clone(), list);
        }
        Self { routes }
    }

    /// Reachable exits of an entry road, ascending by exit road id.
    pub fn exits(&self, entry: &str) -> &[(String, Route)] {
        self.routes.get(entry).map_or(&[], Vec::as_slice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::netmodel::{Endpoint, Lane, Road, Track, Trajectory};

    #[test]
    fn single_track_route() {
        let net = fixtures::minimal_network();
        assert_eq!(shortest_route(&net, "in", "out").unwrap().tracks, vec![1]);
    }

    #[test]
    fn disconnected_exit() {
        let mut net = fixtures::minimal_network();
        net.roads.push(Road {
            id: "island".into(),
            from: Endpoint::Junction("J1".into()),
            to: Endpoint::External,
            length: 10.0,
            spawn_rate: 0.0,
        });
        net.lanes.push(Lane {
            id: "island_0".into(),
            road: "island".into(),
        });
        assert!(matches!(
            shortest_route(&net, "in", "island"),
            Err(RouteError::NoRoute { .. })
        ));
    }

    #[test]
    fn endpoint_checks() {
        let net = fixtures::minimal_network();
        assert_eq!(
            shortest_route(&net, "out", "out"),
            Err(RouteError::NotAnEntry("out".into()))
        );
        assert_eq!(
            shortest_route(&net, "in", "in"),
            Err(RouteError::NotAnExit("in".into()))
        );
        assert_eq!(
            shortest_route(&net, "x", "out"),
            Err(RouteError::UnknownRoad("x".into()))
        );
    }

    /// Brute-force: every simple lane-chained path, minimum by (length, ids).
    fn enumerate(net: &RoadNetwork, entry: &str, exit: &str) -> Option<(f64, Vec<TrackId>)> {
        fn dfs(
            net: &RoadNetwork,
            path: &mut Vec<TrackId>,
            dist: f64,
            exit: &str,
            best: &mut Option<(f64, Vec<TrackId>)>,
        ) {
            let last = net.track(*path.last().unwrap()).unwrap();
            let out_road = net.lane_road(&last.out_lane).unwrap();
            if out_road.id == exit {
                let cand = (dist, path.clone());
                let better = match best {
                    None => true,
                    Some(b) => cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1),
                };
                if better {
                    *best = Some(cand);
                }
            }
            for t in &net.tracks {
                if t.in_lane == last.out_lane && !path.contains(&t.id) {
                    let step = net.trajectory(&t.trajectory).unwrap().length
                        + net.lane_road(&t.out_lane).unwrap().length;
                    path.push(t.id);
                    dfs(net, path, dist + step, exit, best);
                    path.pop();
                }
            }
        }
        let entry_len = net.road(entry).unwrap().length;
        let mut best = None;
        for t in net
            .tracks
            .iter()
            .filter(|t| net.lane_road(&t.in_lane).unwrap().id == entry)
        {
            let step = net.trajectory(&t.trajectory).unwrap().length
                + net.lane_road(&t.out_lane).unwrap().length;
            dfs(net, &mut vec![t.id], entry_len + step, exit, &mut best);
        }
        best
    }

    /// Diamond: entry -> J1 -> {upper, lower} -> J2 -> exit, upper 100 m, lower 150 m.
    fn diamond(upper: f64, lower: f64) -> RoadNetwork {
        let mut net = RoadNetwork::default();
        for j in ["J1", "J2"] {
            net.junctions.push(crate::netmodel::Junction {
                id: j.into(),
                x: 0.0,
                y: 0.0,
            });
        }
        let road = |id: &str, from: &str, to: &str, length: f64| Road {
            id: id.into(),
            from: Endpoint::parse(from),
            to: Endpoint::parse(to),
            length,
            spawn_rate: 0.0,
        };
        net.roads = vec![
            road("entry", "EXTERNAL", "J1", 50.0),
            road("upper", "J1", "J2", upper),
            road("lower", "J1", "J2", lower),
            road("exit", "J2", "EXTERNAL", 50.0),
        ];
        for r in ["entry", "upper", "lower", "exit"] {
            net.lanes.push(Lane {
                id: format!("{r}_0"),
                road: r.into(),
            });
        }
        let hops = [
            ("J1", "entry_0", "lower_0"),
            ("J1", "entry_0", "upper_0"),
            ("J2", "lower_0", "exit_0"),
            ("J2", "upper_0", "exit_0"),
        ];
        for (i, (j, a, b)) in hops.iter().enumerate() {
            let id = format!("t{}", i + 1);
            net.trajectories.push(Trajectory {
                id: id.clone(),
                junction: (*j).into(),
                in_lane: (*a).into(),
                out_lane: (*b).into(),
                length: 10.0,
            });
            net.tracks.push(Track {
                id: i + 1,
                in_lane: (*a).into(),
                trajectory: id,
                out_lane: (*b).into(),
            });
        }
        net
    }

    #[test]
    fn shorter_of_two_paths_matches_enumeration() {
        let net = diamond(100.0, 150.0);
        assert!(crate::netmodel::validate_network(&net).is_empty());
        let route = shortest_route(&net, "entry", "exit").unwrap();
        let (_, best) = enumerate(&net, "entry", "exit").unwrap();
        assert_eq!(route.tracks, best);
        assert_eq!(route.tracks, vec![2, 4]);
    }

    #[test]
    fn equal_lengths_prefer_smallest_ids() {
        let net = diamond(120.0, 120.0);
        assert_eq!(
            shortest_route(&net, "entry", "exit").unwrap().tracks,
            vec![1, 3]
        );
    }

    #[test]
    fn grid_routes_match_enumeration() {
        let net = fixtures::grid_network();
        let table = RouteTable::build(&net);
        for entry in net.roads.iter().filter(|r| r.is_entry()) {
            for exit in net.roads.iter().filter(|r| r.is_exit()) {
                let brute = enumerate(&net, &entry.id, &exit.id);
                let fast = shortest_route(&net, &entry.id, &exit.id).ok();
                assert_eq!(fast.as_ref().map(|r| r.tracks.clone()), brute.map(|b| b.1));
                let tabled = table
                    .exits(&entry.id)
                    .iter()
                    .find(|(x, _)| *x == exit.id)
                    .map(|(_, r)| r);
                assert_eq!(tabled, fast.as_ref());
            }
        }
    }
}
