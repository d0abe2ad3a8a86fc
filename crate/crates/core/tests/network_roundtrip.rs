use proptest::prelude::*;

use sigevo::fixtures::minimal_network_with_prefix;
use sigevo::netmodel::{parse_network, serialize_network, validate_network, RoadNetwork};

fn network(parts: &[(f64, f64, f64, f64, f64)]) -> RoadNetwork {
    let mut net = RoadNetwork::default();
    for (i, &(x, y, entry, exit, rate)) in parts.iter().enumerate() {
        let mut part = minimal_network_with_prefix(&format!("p{i}"));
        part.junctions[0].x = x;
        part.junctions[0].y = y;
        part.roads[0].length = entry;
        part.roads[0].spawn_rate = rate;
        part.roads[1].length = exit;
        part.tracks[0].id = i + 1;
        net.junctions.extend(part.junctions);
        net.roads.extend(part.roads);
        net.lanes.extend(part.lanes);
        net.trajectories.extend(part.trajectories);
        net.tracks.extend(part.tracks);
    }
    net
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(
        parts in prop::collection::vec((-1e4f64..1e4, -1e4f64..1e4, 1.0f64..500.0, 1.0f64..500.0, 0.0f64..1.0), 1..6),
    ) {
        let net = network(&parts);
        prop_assert!(validate_network(&net).is_empty());
        let text = serialize_network(&net);
        let back = parse_network(&text).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(serialize_network(&back), text);
    }
}
