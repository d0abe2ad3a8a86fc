//! Feasibility rules for programmes and the single-pass conflict repair.

use thiserror::Error;

use super::{max_green, LightsProgramme, PhaseWindow, ProgrammeCodec};
use crate::netmodel::{conflicting_tracks, RoadNetwork, TrackId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgrammeViolation {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("programme has {found} windows, network has {expected} tracks")]
    WindowCount { expected: usize, found: usize },
    #[error("window at position {position} belongs to track {found}")]
    TrackOrder { position: usize, found: TrackId },
    #[error("track {track}: start {start} outside cycle of {cycle} ticks")]
    StartOutOfRange {
        track: TrackId,
        start: u32,
        cycle: u32,
    },
    #[error("track {track}: green {green} shorter than minimum {t_min}")]
    GreenTooShort {
        track: TrackId,
        green: u32,
        t_min: u32,
    },
    #[error("track {track}: green {green} longer than maximum {t_max}")]
    GreenTooLong {
        track: TrackId,
        green: u32,
        t_max: i64,
    },
    #[error("tracks {a} and {b} conflict and their lights overlap")]
    CollisionOverlap { a: TrackId, b: TrackId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepairOutcome {
    Repaired(LightsProgramme),
    /// Conflicts survived the repair pass; the caller should draw a fresh individual.
    Irreparable,
}

impl RepairOutcome {
    pub fn repaired(self) -> Option<LightsProgramme> {
        match self {
            RepairOutcome::Repaired(p) => Some(p),
            RepairOutcome::Irreparable => None,
        }
    }
}

/// Extended window `[start - red_yellow, start + green + yellow)` as (start, length), cyclic.
fn extended(prog: &LightsProgramme, w: &PhaseWindow) -> (i64, i64) {
    let p = &prog.params;
    let cycle = i64::from(p.cycle_ticks);
    let start = (i64::from(w.start) - i64::from(p.red_yellow_ticks)).rem_euclid(cycle);
    (start, i64::from(w.green) + i64::from(p.transient_reserve()))
}

/// Whether `point` lies inside the cyclic interval `(start, len)`.
fn contains(cycle: i64, (start, len): (i64, i64), point: i64) -> bool {
    (point - start).rem_euclid(cycle) < len
}

fn overlaps(cycle: i64, a: (i64, i64), b: (i64, i64)) -> bool {
    a.1 + b.1 > cycle || contains(cycle, a, b.0) || contains(cycle, b, a.0)
}

fn check_windows(
    prog: &LightsProgramme,
    t_max: &[i64],
    conflicts: &[(TrackId, TrackId)],
) -> Vec<ProgrammeViolation> {
    let mut out = Vec::new();
    let p = &prog.params;
    if let Err(e) = p.check() {
        out.push(ProgrammeViolation::InvalidParams(e.to_string()));
        return out;
    }
    if prog.windows.len() != t_max.len() {
        out.push(ProgrammeViolation::WindowCount {
            expected: t_max.len(),
            found: prog.windows.len(),
        });
        return out;
    }
    for (i, w) in prog.windows.iter().enumerate() {
        if w.track != i + 1 {
            out.push(ProgrammeViolation::TrackOrder {
                position: i + 1,
                found: w.track,
            });
            return out;
        }
    }
    for (w, &tm) in prog.windows.iter().zip(t_max) {
        if w.start >= p.cycle_ticks {
            out.push(ProgrammeViolation::StartOutOfRange {
                track: w.track,
                start: w.start,
                cycle: p.cycle_ticks,
            });
        }
        if w.green < p.t_min {
            out.push(ProgrammeViolation::GreenTooShort {
                track: w.track,
                green: w.green,
                t_min: p.t_min,
            });
        }
        if i64::from(w.green) > tm {
            out.push(ProgrammeViolation::GreenTooLong {
                track: w.track,
                green: w.green,
                t_max: tm,
            });
        }
    }
    let cycle = i64::from(p.cycle_ticks);
    for &(a, b) in conflicts {
        let wa = extended(prog, &prog.windows[a - 1]);
        let wb = extended(prog, &prog.windows[b - 1]);
        if overlaps(cycle, wa, wb) {
            out.push(ProgrammeViolation::CollisionOverlap { a, b });
        }
    }
    out
}

impl ProgrammeCodec {
    /// Minimum/maximum green per track and pairwise disjointness of the
    /// extended windows of conflicting tracks. Empty iff feasible.
    pub fn validate(&self, prog: &LightsProgramme) -> Vec<ProgrammeViolation> {
        let t_max: Vec<i64> = if prog.params == *self.params() {
            (1..=self.track_count())
                .map(|t| i64::from(self.t_max(t).unwrap_or(0)))
                .collect()
        } else {
            // Limits depend on the parameters; recompute them from the programme's own.
            let p = &prog.params;
            (1..=self.track_count())
                .map(|t| {
                    let k = self
                        .conflicts()
                        .iter()
                        .filter(|(a, b)| *a == t || *b == t)
                        .count();
                    max_green(p.cycle_ticks, k, p.t_min, p.transient_reserve())
                })
                .collect()
        };
        check_windows(prog, &t_max, self.conflicts())
    }

    /// One pass over conflicting pairs in ascending order. For an overlapping
    /// pair, the window whose extended start falls inside the other's extended
    /// window is pushed to begin `repair_gap` ticks after the other one ends,
    /// keeping its original green end; a green shrunk below `t_min` is widened
    /// to `t_min` from the new start. Anything still infeasible afterwards is
    /// reported as irreparable.
    pub fn repair(&self, prog: &LightsProgramme) -> RepairOutcome {
        let mut prog = prog.clone();
        let p = prog.params;
        let cycle = i64::from(p.cycle_ticks);
        let structural_ok = prog.windows.len() == self.track_count()
            && prog
                .windows
                .iter()
                .enumerate()
                .all(|(i, w)| w.track == i + 1);
        if !structural_ok || p.check().is_err() {
            return RepairOutcome::Irreparable;
        }
        for &(a, b) in self.conflicts() {
            let wa = prog.windows[a - 1];
            let wb = prog.windows[b - 1];
            let ea = extended(&prog, &wa);
            let eb = extended(&prog, &wb);
            if !overlaps(cycle, ea, eb) {
                continue;
            }
            let a_inside_b = contains(cycle, eb, ea.0);
            let b_inside_a = contains(cycle, ea, eb.0);
            let (fixed, mover) = match (a_inside_b, b_inside_a) {
                (false, true) => (wa, wb),
                (true, false) => (wb, wa),
                // Mutual containment: the later raw start moves, ties move the higher track.
                _ if wa.start > wb.start => (wb, wa),
                _ => (wa, wb),
            };
            let fixed_start = i64::from(fixed.start);
            let offset = (i64::from(mover.start) - fixed_start).rem_euclid(cycle);
            let mover_end = fixed_start + offset + i64::from(mover.green);
            let new_start = fixed_start
                + i64::from(fixed.green)
                + i64::from(p.yellow_ticks)
                + i64::from(p.repair_gap)
                + i64::from(p.red_yellow_ticks);
            let green = (mover_end - new_start).max(i64::from(p.t_min));
            let slot = &mut prog.windows[mover.track - 1];
            slot.start = new_start.rem_euclid(cycle) as u32;
            slot.green = green as u32;
        }
        if self.validate(&prog).is_empty() {
            RepairOutcome::Repaired(prog)
        } else {
            RepairOutcome::Irreparable
        }
    }
}

/// Validates a programme against a network's tracks and conflicts.
pub fn validate_programme(prog: &LightsProgramme, net: &RoadNetwork) -> Vec<ProgrammeViolation> {
    let degrees: Vec<usize> = (1..=net.track_count())
        .map(|t| conflicting_tracks(net, t).map_or(0, |s| s.len()))
        .collect();
    validate_with_degrees(prog, &degrees, &net.conflicting_track_pairs())
}

/// Same as [`validate_programme`] with the conflict structure precomputed:
/// `degrees[t - 1]` is the number of tracks conflicting with `t`.
pub(crate) fn validate_with_degrees(
    prog: &LightsProgramme,
    degrees: &[usize],
    conflicts: &[(TrackId, TrackId)],
) -> Vec<ProgrammeViolation> {
    let p = &prog.params;
    if let Err(e) = p.check() {
        return vec![ProgrammeViolation::InvalidParams(e.to_string())];
    }
    let t_max: Vec<i64> = degrees
        .iter()
        .map(|&k| max_green(p.cycle_ticks, k, p.t_min, p.transient_reserve()))
        .collect();
    check_windows(prog, &t_max, conflicts)
}

/// Repairs a programme against a network. Networks with an infeasible track
/// are irreparable by definition.
pub fn repair_conflicts(prog: &LightsProgramme, net: &RoadNetwork) -> RepairOutcome {
    match ProgrammeCodec::new(prog.params, net) {
        Ok(codec) => codec.repair(prog),
        Err(_) => RepairOutcome::Irreparable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lights::{random_chromosome, EncodingParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair_codec(cycle: u32, t_min: u32, y: u32, ry: u32, gap: u32) -> ProgrammeCodec {
        let params = EncodingParams::new(cycle, t_min, y, ry, gap).unwrap();
        let t_max = crate::lights::compute_t_max(&params, 1).unwrap();
        ProgrammeCodec::from_parts(params, vec![t_max, t_max], vec![(1, 2)]).unwrap()
    }

    fn prog(codec: &ProgrammeCodec, windows: &[(u32, u32)]) -> LightsProgramme {
        LightsProgramme {
            params: *codec.params(),
            windows: windows
                .iter()
                .enumerate()
                .map(|(i, &(start, green))| PhaseWindow {
                    track: i + 1,
                    start,
                    green,
                })
                .collect(),
        }
    }

    #[test]
    fn separated_windows_are_feasible() {
        let codec = pair_codec(300, 25, 15, 10, 5);
        // Extended windows [0,75) and [90,165).
        assert_eq!(
            codec.validate(&prog(&codec, &[(10, 50), (100, 50)])),
            vec![]
        );
    }

    #[test]
    fn overlapping_windows_are_reported() {
        let codec = pair_codec(300, 25, 15, 10, 5);
        assert_eq!(
            codec.validate(&prog(&codec, &[(10, 50), (50, 50)])),
            vec![ProgrammeViolation::CollisionOverlap { a: 1, b: 2 }]
        );
    }

    #[test]
    fn wrap_around_overlap_is_reported() {
        let codec = pair_codec(300, 25, 15, 10, 5);
        // Track 2 extended window [270, 345) wraps into track 1's [0, 75)... starting at -10.
        assert!(!codec
            .validate(&prog(&codec, &[(10, 50), (280, 50)]))
            .is_empty());
        // [80, 165) and [190, 275) leave room on both sides.
        assert!(codec
            .validate(&prog(&codec, &[(90, 60), (200, 60)]))
            .is_empty());
    }

    #[test]
    fn non_conflicting_tracks_may_overlap() {
        let params = EncodingParams::new(300, 25, 15, 10, 5).unwrap();
        let codec = ProgrammeCodec::from_parts(params, vec![275, 275], vec![]).unwrap();
        assert_eq!(codec.validate(&prog(&codec, &[(10, 50), (10, 50)])), vec![]);
    }

    #[test]
    fn green_limits() {
        let codec = pair_codec(300, 25, 15, 10, 5);
        let v = codec.validate(&prog(&codec, &[(0, 24), (100, 251)]));
        assert!(v.contains(&ProgrammeViolation::GreenTooShort {
            track: 1,
            green: 24,
            t_min: 25
        }));
        assert!(v.contains(&ProgrammeViolation::GreenTooLong {
            track: 2,
            green: 251,
            t_max: 250
        }));
    }

    #[test]
    fn feasible_programme_is_a_fixed_point() {
        let codec = pair_codec(300, 25, 15, 10, 5);
        let p = prog(&codec, &[(10, 50), (100, 50)]);
        assert_eq!(codec.repair(&p), RepairOutcome::Repaired(p));
    }

    #[test]
    fn hand_walked_repair() {
        // Greens [0,50) and [40,90). Later window moves to 0+50+15+5+10 = 80,
        // keeps its end 90 (green 10), then widens to t_min: [80,105).
        let codec = pair_codec(300, 25, 15, 10, 5);
        let out = codec.repair(&prog(&codec, &[(0, 50), (40, 50)]));
        assert_eq!(
            out,
            RepairOutcome::Repaired(prog(&codec, &[(0, 50), (80, 25)]))
        );
    }

    #[test]
    fn repair_keeps_end_when_long_enough() {
        let codec = pair_codec(300, 25, 15, 10, 5);
        // Later green [40,200): new start 80, end stays 200 -> green 120.
        let out = codec.repair(&prog(&codec, &[(0, 50), (40, 160)]));
        assert_eq!(
            out,
            RepairOutcome::Repaired(prog(&codec, &[(0, 50), (80, 120)]))
        );
    }

    #[test]
    fn lower_track_moves_when_it_starts_inside() {
        let codec = pair_codec(300, 25, 15, 10, 5);
        // Track 1 starts inside track 2's extended window, so track 1 moves.
        let out = codec.repair(&prog(&codec, &[(40, 50), (0, 50)]));
        assert_eq!(
            out,
            RepairOutcome::Repaired(prog(&codec, &[(80, 25), (0, 50)]))
        );
    }

    #[test]
    fn tied_starts_move_the_higher_track() {
        let codec = pair_codec(300, 25, 15, 10, 5);
        let out = codec
            .repair(&prog(&codec, &[(0, 50), (0, 50)]))
            .repaired()
            .unwrap();
        assert_eq!(
            out.windows[0],
            PhaseWindow {
                track: 1,
                start: 0,
                green: 50
            }
        );
        assert_eq!(out.windows[1].start, 80);
    }

    #[test]
    fn three_way_conflict_on_short_cycle_is_irreparable() {
        // cycle 20 < 3 * (t_min 4 + C 4): three disjoint extended windows cannot fit.
        let net = fixtures::triangle_network();
        let params = fixtures::triangle_params();
        let codec = ProgrammeCodec::new(params, &net).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let c = random_chromosome(3, codec.bits_per_field(), &mut rng);
            let p = codec.decode(&c).unwrap();
            assert_eq!(codec.repair(&p), RepairOutcome::Irreparable);
            assert_eq!(repair_conflicts(&p, &net), RepairOutcome::Irreparable);
        }
    }

    #[test]
    fn free_functions_agree_with_codec() {
        let net = fixtures::grid_network();
        let codec = ProgrammeCodec::new(fixtures::grid_params(), &net).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let c = random_chromosome(net.track_count(), codec.bits_per_field(), &mut rng);
            let p = codec.decode(&c).unwrap();
            assert_eq!(validate_programme(&p, &net), codec.validate(&p));
            assert_eq!(repair_conflicts(&p, &net), codec.repair(&p));
        }
    }

    #[test]
    fn wrong_window_count() {
        let net = fixtures::crossing_network();
        let p = LightsProgramme {
            params: fixtures::crossing_params(),
            windows: vec![PhaseWindow {
                track: 1,
                start: 0,
                green: 2,
            }],
        };
        assert_eq!(
            validate_programme(&p, &net),
            vec![ProgrammeViolation::WindowCount {
                expected: 2,
                found: 1
            }]
        );
        assert_eq!(repair_conflicts(&p, &net), RepairOutcome::Irreparable);
    }
}
