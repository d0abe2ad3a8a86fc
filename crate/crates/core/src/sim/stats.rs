use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::VehicleId;

/// A period during which a vehicle stayed below the stop speed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StopEvent {
    pub lane: String,
    /// Position where the stop began.
    pub position: f64,
    pub start_tick: u64,
    /// Ticks spent below the stop speed; still growing if the stop is open.
    pub duration: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSample {
    pub tick: u64,
    pub lane: String,
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VehicleRecord {
    pub id: VehicleId,
    /// First tick in which the vehicle moved.
    pub spawn_tick: u64,
    /// Ticks from `spawn_tick` to leaving the network; `None` if still live.
    pub travel_ticks: Option<u64>,
    pub mean_speed: f64,
    pub stops: Vec<StopEvent>,
    pub trace: Vec<TraceSample>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SimulationStats {
    pub ticks: u64,
    pub v_max: f64,
    pub spawned: u64,
    pub completed: u64,
    pub live: u64,
    /// Spawn draws dropped because the entry lane was full.
    pub rejected_spawns: u64,
    /// Mean over completed vehicles; 0 when none completed.
    pub mean_travel_ticks: f64,
    /// Mean over all vehicle-ticks; 0 when no vehicle was ever live.
    pub mean_speed: f64,
    pub total_stops: u64,
    /// Forced standstills that exceeded the braking bound.
    pub emergency_stops: u64,
    pub vehicles: Vec<VehicleRecord>,
}

impl SimulationStats {
    /// Scalar metrics as `metric,value` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        let rows: [(&str, String); 10] = [
            ("ticks", self.ticks.to_string()),
            ("spawned", self.spawned.to_string()),
            ("completed", self.completed.to_string()),
            ("live", self.live.to_string()),
            ("rejected_spawns", self.rejected_spawns.to_string()),
            ("mean_travel_ticks", self.mean_travel_ticks.to_string()),
            ("mean_speed", self.mean_speed.to_string()),
            ("total_stops", self.total_stops.to_string()),
            ("emergency_stops", self.emergency_stops.to_string()),
            ("v_max", self.v_max.to_string()),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }

    /// One row per vehicle; `travel_ticks` is empty for vehicles still live.
    pub fn vehicles_csv(&self) -> String {
        let mut out = String::from("vehicle,spawn_tick,travel_ticks,stops,mean_speed\n");
        for v in &self.vehicles {
            let travel = v.travel_ticks.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                v.id,
                v.spawn_tick,
                travel,
                v.stops.len(),
                v.mean_speed
            );
        }
        out
    }

    /// Trace samples as JSON lines, vehicles in id order.
    pub fn traces_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            vehicle: VehicleId,
            tick: u64,
            lane: &'a str,
            position: f64,
        }
        let mut out = String::new();
        for v in &self.vehicles {
            for s in &v.trace {
                let line = Line {
                    vehicle: v.id,
                    tick: s.tick,
                    lane: &s.lane,
                    position: s.position,
                };
                out.push_str(&serde_json::to_string(&line).expect("plain struct"));
                out.push('\n');
            }
        }
        out
    }
}

/// Weights of the completion ratio and the normalised mean speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights {
    pub completion: f64,
    pub speed: f64,
}

impl FitnessWeights {
    pub fn new(completion: f64, speed: f64) -> Result<Self, String> {
        if !(completion >= 0.0 && speed >= 0.0) {
            return Err(format!(
                "weights must be non-negative, got {completion},{speed}"
            ));
        }
        if ((completion + speed) - 1.0).abs() > 1e-9 {
            return Err(format!("weights must sum to 1, got {completion},{speed}"));
        }
        Ok(Self { completion, speed })
    }
}

impl Default for FitnessWeights {
    fn default() -> Self {
        Self {
            completion: 0.5,
            speed: 0.5,
        }
    }
}

impl FromStr for FitnessWeights {
    type Err = String;

    /// `"w_c,w_s"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (c, v) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `w_c,w_s`, got `{s}`"))?;
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        Self::new(num(c)?, num(v)?)
    }
}

/// `w_c · completed / max(spawned, 1) + w_s · mean_speed / v_max`.
pub fn aggregate_fitness(stats: &SimulationStats, weights: FitnessWeights) -> f64 {
    let completion = stats.completed as f64 / stats.spawned.max(1) as f64;
    let speed = if stats.v_max > 0.0 {
        stats.mean_speed / stats.v_max
    } else {
        0.0
    };
    weights.completion * completion + weights.speed * speed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(spawned: u64, completed: u64, mean_speed: f64, v_max: f64) -> SimulationStats {
        SimulationStats {
            spawned,
            completed,
            mean_speed,
            v_max,
            ..SimulationStats::default()
        }
    }

    #[test]
    fn fitness_arithmetic() {
        let w = FitnessWeights::new(0.5, 0.5).unwrap();
        assert_eq!(aggregate_fitness(&stats(20, 10, 7.0, 14.0), w), 0.5);
        assert_eq!(aggregate_fitness(&stats(0, 0, 0.0, 14.0), w), 0.0);
        assert_eq!(aggregate_fitness(&stats(5, 5, 14.0, 14.0), w), 1.0);
        let only_speed = FitnessWeights::new(0.0, 1.0).unwrap();
        assert_eq!(aggregate_fitness(&stats(4, 1, 3.5, 14.0), only_speed), 0.25);
    }

    #[test]
    fn weights_parse_and_check() {
        assert_eq!(
            "0.3, 0.7".parse::<FitnessWeights>().unwrap(),
            FitnessWeights::new(0.3, 0.7).unwrap()
        );
        assert!("0.5".parse::<FitnessWeights>().is_err());
        assert!("0.6,0.6".parse::<FitnessWeights>().is_err());
        assert!("-0.5,1.5".parse::<FitnessWeights>().is_err());
        assert!("a,b".parse::<FitnessWeights>().is_err());
    }

    #[test]
    fn csv_layout() {
        let mut s = stats(2, 1, 3.25, 13.9);
        s.vehicles = vec![
            VehicleRecord {
                id: 0,
                spawn_tick: 1,
                travel_ticks: Some(40),
                mean_speed: 5.5,
                stops: vec![],
                trace: vec![],
            },
            VehicleRecord {
                id: 1,
                spawn_tick: 7,
                travel_ticks: None,
                mean_speed: 1.0,
                stops: vec![StopEvent {
                    lane: "in_0".into(),
                    position: 92.5,
                    start_tick: 20,
                    duration: 3,
                }],
                trace: vec![TraceSample {
                    tick: 7,
                    lane: "in_0".into(),
                    position: 0.5,
                }],
            },
        ];
        let csv = s.to_csv();
        assert!(csv.starts_with("metric,value\nticks,0\nspawned,2\ncompleted,1\n"));
        assert!(csv.contains("\nmean_speed,3.25\n"));
        assert_eq!(
            s.vehicles_csv(),
            "vehicle,spawn_tick,travel_ticks,stops,mean_speed\n0,1,40,0,5.5\n1,7,,1,1\n"
        );
        assert_eq!(
            s.traces_jsonl(),
            "{\"vehicle\":1,\"tick\":7,\"lane\":\"in_0\",\"position\":0.5}\n"
        );
    }
}
