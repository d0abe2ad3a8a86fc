//! Programme file: a JSON object with the encoding parameters followed by the
//! windows, integers only, fields in fixed order.

use serde::{Deserialize, Serialize};

use super::{EncodingParams, LightsProgramme, PhaseWindow};
use crate::netmodel::TrackId;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgrammeFile {
    cycle_ticks: u32,
    t_min: u32,
    yellow_ticks: u32,
    red_yellow_ticks: u32,
    repair_gap: u32,
    windows: Vec<WindowEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowEntry {
    track: TrackId,
    start: u32,
    green: u32,
}

impl LightsProgramme {
    /// Canonical pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let file = ProgrammeFile {
            cycle_ticks: self.params.cycle_ticks,
            t_min: self.params.t_min,
            yellow_ticks: self.params.yellow_ticks,
            red_yellow_ticks: self.params.red_yellow_ticks,
            repair_gap: self.params.repair_gap,
            windows: self
                .windows
                .iter()
                .map(|w| WindowEntry {
                    track: w.track,
                    start: w.start,
                    green: w.green,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("plain integers always serialize");
        s.push('\n');
        s
    }

    /// Reads a programme file. Parameter sanity is left to validation.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let f: ProgrammeFile = serde_json::from_str(text)?;
        Ok(Self {
            params: EncodingParams {
                cycle_ticks: f.cycle_ticks,
                t_min: f.t_min,
                yellow_ticks: f.yellow_ticks,
                red_yellow_ticks: f.red_yellow_ticks,
                repair_gap: f.repair_gap,
            },
            windows: f
                .windows
                .into_iter()
                .map(|w| PhaseWindow {
                    track: w.track,
                    start: w.start,
                    green: w.green,
                })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_order_is_canonical() {
        let p = LightsProgramme {
            params: EncodingParams::new(300, 25, 15, 10, 5).unwrap(),
            windows: vec![PhaseWindow {
                track: 1,
                start: 3,
                green: 40,
            }],
        };
        let json = p.to_json();
        let keys = [
            "cycle_ticks",
            "t_min",
            "yellow_ticks",
            "red_yellow_ticks",
            "repair_gap",
            "windows",
            "track",
            "start",
            "green",
        ];
        let pos: Vec<usize> = keys
            .iter()
            .map(|k| json.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{json}");
    }

    #[test]
    fn non_integers_and_unknown_fields_are_rejected() {
        let ok = r#"{"cycle_ticks":16,"t_min":2,"yellow_ticks":1,"red_yellow_ticks":1,"repair_gap":0,"windows":[]}"#;
        assert!(LightsProgramme::from_json(ok).is_ok());
        assert!(LightsProgramme::from_json(&ok.replace("16", "16.5")).is_err());
        assert!(
            LightsProgramme::from_json(&ok.replace("\"windows\"", "\"extra\":1,\"windows\""))
                .is_err()
        );
        assert!(LightsProgramme::from_json(&ok.replace("2,", "-2,")).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(
            params in (1u32..1000, 1u32..50, 1u32..50, 1u32..50, 0u32..50),
            windows in prop::collection::vec((0u32..1000, 0u32..1000), 0..20),
        ) {
            let p = LightsProgramme {
                params: EncodingParams {
                    cycle_ticks: params.0,
                    t_min: params.1,
                    yellow_ticks: params.2,
                    red_yellow_ticks: params.3,
                    repair_gap: params.4,
                },
                windows: windows
                    .into_iter()
                    .enumerate()
                    .map(|(i, (start, green))| PhaseWindow { track: i + 1, start, green })
                    .collect(),
            };
            prop_assert_eq!(LightsProgramme::from_json(&p.to_json()).unwrap(), p);
        }
    }
}
