use std::collections::BTreeMap;

use super::{LightsError, LightsProgramme, PhaseWindow, ProgrammeCodec};
use crate::netmodel::{RoadNetwork, TrackId};

/// Designer-style programme: at each junction the conflict graph is coloured
/// greedily in track order, and the cycle is split into equal slots, one per
/// colour. Each slot holds red+yellow, green and yellow back to back.
pub fn even_split_programme(
    codec: &ProgrammeCodec,
    net: &RoadNetwork,
) -> Result<LightsProgramme, LightsError> {
    let p = *codec.params();
    let mut by_junction: BTreeMap<&str, Vec<TrackId>> = BTreeMap::new();
    for t in &net.tracks {
        let junction = net
            .trajectory(&t.trajectory)
            .map(|tr| tr.junction.as_str())
            .ok_or(LightsError::UnknownTrack(t.id))?;
        by_junction.entry(junction).or_default().push(t.id);
    }

    let mut windows: Vec<Option<PhaseWindow>> = vec![None; codec.track_count()];
    for tracks in by_junction.values() {
        let mut colour: BTreeMap<TrackId, usize> = BTreeMap::new();
        for &t in tracks {
            let taken: Vec<usize> = codec
                .conflicts()
                .iter()
                .filter_map(|&(a, b)| match (a == t, b == t) {
                    (true, _) => colour.get(&b).copied(),
                    (_, true) => colour.get(&a).copied(),
                    _ => None,
                })
                .collect();
            let c = (0..).find(|c| !taken.contains(c)).expect("unbounded range");
            colour.insert(t, c);
        }
        let phases = colour.values().max().map_or(1, |m| m + 1) as u32;
        let slot = p.cycle_ticks / phases;
        let green = i64::from(slot) - i64::from(p.transient_reserve());
        if green < i64::from(p.t_min) {
            return Err(LightsError::InfeasibleTrack {
                track: tracks.first().copied(),
                t_max: green,
                t_min: p.t_min,
            });
        }
        for (&t, &c) in &colour {
            let t_max = codec.t_max(t).ok_or(LightsError::UnknownTrack(t))?;
            windows[t - 1] = Some(PhaseWindow {
                track: t,
                start: c as u32 * slot + p.red_yellow_ticks,
                green: (green as u32).min(t_max),
            });
        }
    }
    let windows = windows
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.ok_or(LightsError::UnknownTrack(i + 1)))
        .collect::<Result<_, _>>()?;
    Ok(LightsProgramme { params: p, windows })
}
