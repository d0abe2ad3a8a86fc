use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::stats::{SimulationStats, StopEvent, TraceSample, VehicleRecord};
use super::{drive_decision, Layout, Perception, SimConfig, SimError};
use crate::lights::{LightColor, LightsProgramme};
use crate::netmodel::{RoadNetwork, Route, TrackId};

pub type VehicleId = usize;

/// Positions closer than this are treated as equal when clamping.
const EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Vehicle {
    pub id: VehicleId,
    /// Lane index in the layout.
    pub lane: usize,
    /// Metres from the start of the lane's road.
    pub position: f64,
    pub speed: f64,
    pub route: Route,
    /// Index of the next track in `route`; equal to its length on the exit road.
    pub route_index: usize,
    pub spawn_tick: u64,
    pub finished_tick: Option<u64>,
    pub stops: Vec<StopEvent>,
    pub trace: Vec<TraceSample>,
    perception: Perception,
    moved_at: Option<u64>,
    stopped: bool,
    speed_sum: f64,
    live_ticks: u64,
}

impl Vehicle {
    pub fn next_track(&self) -> Option<TrackId> {
        self.route.tracks.get(self.route_index).copied()
    }

    pub fn perception(&self) -> &Perception {
        &self.perception
    }
}

/// A vehicle moving from one lane to the next through a junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub vehicle: VehicleId,
    pub track: TrackId,
    /// Light of the track during the crossing tick.
    pub color: LightColor,
}

/// What happened during one [`WorldState::step`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    /// Tick that was executed.
    pub tick: u64,
    pub crossings: Vec<Crossing>,
    pub completed: Vec<VehicleId>,
    pub spawned: Vec<VehicleId>,
}

/// Full state of one simulation run. Confined to a single thread.
#[derive(Debug, Clone)]
pub struct WorldState {
    layout: Arc<Layout>,
    programme: LightsProgramme,
    config: SimConfig,
    tick: u64,
    /// Light of each track during the current tick, indexed by track id - 1.
    lights: Vec<LightColor>,
    /// Vehicle ids per lane, front (largest position) first.
    queues: Vec<VecDeque<VehicleId>>,
    /// Every vehicle ever spawned, indexed by id.
    vehicles: Vec<Vehicle>,
    rng: ChaCha8Rng,
    spawned: u64,
    completed: u64,
    rejected_spawns: u64,
    emergency_stops: u64,
    speed_sum: f64,
    vehicle_ticks: u64,
}

/// Compiles the network and starts an empty world at tick 0.
pub fn init_world(
    net: &RoadNetwork,
    programme: &LightsProgramme,
    config: &SimConfig,
) -> Result<WorldState, SimError> {
    WorldState::new(Arc::new(Layout::new(net)?), programme.clone(), *config)
}

/// Steps until `until_tick` (capped at the configured total) and returns the statistics.
pub fn run(world: &mut WorldState, until_tick: u64) -> SimulationStats {
    let end = until_tick.min(world.config.total_ticks);
    while world.tick < end {
        world.step();
    }
    world.stats()
}

impl WorldState {
    pub fn new(
        layout: Arc<Layout>,
        programme: LightsProgramme,
        config: SimConfig,
    ) -> Result<Self, SimError> {
        config.check()?;
        let violations = layout.validate(&programme);
        if !violations.is_empty() {
            return Err(SimError::InfeasibleProgramme(violations));
        }
        let lanes = layout.lane_count();
        let tracks = layout.track_count();
        Ok(Self {
            layout,
            programme,
            config,
            tick: 0,
            lights: vec![LightColor::Red; tracks],
            queues: vec![VecDeque::new(); lanes],
            vehicles: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            spawned: 0,
            completed: 0,
            rejected_spawns: 0,
            emergency_stops: 0,
            speed_sum: 0.0,
            vehicle_ticks: 0,
        })
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn programme(&self) -> &LightsProgramme {
        &self.programme
    }

    pub fn spawned(&self) -> u64 {
        self.spawned
    }

    pub fn completed(&self) -> u64 {
        self.completed
    }

    pub fn live_count(&self) -> u64 {
        self.queues.iter().map(|q| q.len() as u64).sum()
    }

    pub fn vehicle(&self, id: VehicleId) -> Option<&Vehicle> {
        self.vehicles.get(id)
    }

    /// Live vehicles on a lane, front first.
    pub fn queue(&self, lane: usize) -> impl Iterator<Item = &Vehicle> {
        self.queues[lane].iter().map(|&id| &self.vehicles[id])
    }

    /// Light colours as of the last executed tick, indexed by track id - 1.
    pub fn lights(&self) -> &[LightColor] {
        &self.lights
    }

    /// Places a vehicle at the start of `entry` bound for `exit`, outside
    /// the random spawn process. It first moves in the next step. `None` if
    /// the exit is unreachable or the entry lane has no room.
    pub fn insert_vehicle(&mut self, entry: &str, exit: &str) -> Option<VehicleId> {
        let route = self.layout.route(entry, exit)?.clone();
        self.try_spawn(route, self.tick)
    }

    fn try_spawn(&mut self, route: Route, spawn_tick: u64) -> Option<VehicleId> {
        let (lane, _) = self.layout.track_lanes(*route.tracks.first()?)?;
        if let Some(&tail) = self.queues[lane].back() {
            if self.vehicles[tail].position < self.config.s_min {
                return None;
            }
        }
        let id = self.vehicles.len();
        self.vehicles.push(Vehicle {
            id,
            lane,
            position: 0.0,
            speed: 0.0,
            route,
            route_index: 0,
            spawn_tick,
            finished_tick: None,
            stops: Vec::new(),
            trace: Vec::new(),
            perception: Perception::default(),
            moved_at: None,
            stopped: false,
            speed_sum: 0.0,
            live_ticks: 0,
        });
        self.queues[lane].push_back(id);
        self.spawned += 1;
        Some(id)
    }

    /// Executes one tick. Does nothing once `total_ticks` is reached.
    pub fn step(&mut self) -> StepReport {
        let mut report = StepReport {
            tick: self.tick,
            ..StepReport::default()
        };
        if self.tick >= self.config.total_ticks {
            return report;
        }
        self.update_lights();
        self.perceive();
        self.advance(&mut report);
        self.record();
        self.despawn(&mut report);
        self.spawn(&mut report);
        self.tick += 1;
        report
    }

    fn update_lights(&mut self) {
        for (i, w) in self.programme.windows.iter().enumerate() {
            self.lights[i] = self.programme.color_of(w, self.tick);
        }
    }

    fn perceive(&mut self) {
        let s_min = self.config.s_min;
        for lane in 0..self.queues.len() {
            let info = &self.layout.lanes[lane];
            let mut ahead: Option<VehicleId> = None;
            for &id in &self.queues[lane] {
                let v = &self.vehicles[id];
                let mut p = Perception::default();
                if !info.exit {
                    let track = v
                        .next_track()
                        .expect("vehicles off exit roads have a next track");
                    p.distance_to_junction = info.length - v.position;
                    p.light = self.lights[track - 1];
                }
                match ahead {
                    Some(pred) => {
                        let pred = &self.vehicles[pred];
                        p.gap_ahead = pred.position - v.position;
                        p.predecessor_speed = Some(pred.speed);
                    }
                    None if !info.exit => {
                        let track = v.next_track().expect("checked above");
                        let out = self.layout.tracks[track - 1].out_lane;
                        let out_info = &self.layout.lanes[out];
                        if let Some(&tail) = self.queues[out].back() {
                            let tail = &self.vehicles[tail];
                            p.gap_ahead = p.distance_to_junction + tail.position;
                            p.predecessor_speed = Some(tail.speed);
                        } else if !out_info.exit {
                            // The next stop line behaves like a standing vehicle.
                            p.gap_ahead = p.distance_to_junction + out_info.length + s_min;
                        }
                    }
                    None => {}
                }
                self.vehicles[id].perception = p;
                ahead = Some(id);
            }
        }
    }

    fn advance(&mut self, report: &mut StepReport) {
        let cfg = self.config;
        let dt = cfg.dt();
        let mut ids = Vec::new();
        for lane in 0..self.queues.len() {
            ids.clear();
            ids.extend(self.queues[lane].iter().copied());
            let length = self.layout.lanes[lane].length;
            let exit = self.layout.lanes[lane].exit;
            let mut ahead: Option<VehicleId> = None;
            for &id in &ids {
                if self.vehicles[id].moved_at == Some(self.tick) {
                    // Entered from an earlier lane during this tick.
                    continue;
                }
                let v = &self.vehicles[id];
                let mut speed = drive_decision(&v.perception, v.speed, &cfg);
                let target = v.position + speed * dt;
                let mut position = target;
                let mut crossed = None;
                if let Some(pred) = ahead {
                    let limit = self.vehicles[pred].position - cfg.s_min;
                    if target > limit {
                        if target > limit + EPS {
                            self.emergency_stops += 1;
                            speed = 0.0;
                        }
                        position = limit.max(v.position);
                    }
                } else if exit {
                    position = target.min(length);
                } else if target > length {
                    let track = v
                        .next_track()
                        .expect("vehicles off exit roads have a next track");
                    let color = self.lights[track - 1];
                    let out = self.layout.tracks[track - 1].out_lane;
                    let room = match self.queues[out].back() {
                        Some(&tail) => self.vehicles[tail].position - cfg.s_min,
                        None => self.layout.lanes[out].length,
                    };
                    if color.permits_crossing() && room >= 0.0 {
                        let overshoot = target - length;
                        if overshoot > room + EPS {
                            self.emergency_stops += 1;
                            speed = 0.0;
                        }
                        position = overshoot.min(room);
                        crossed = Some((track, color, out));
                    } else {
                        if target > length + EPS {
                            self.emergency_stops += 1;
                            speed = 0.0;
                        }
                        position = length;
                    }
                }
                let v = &mut self.vehicles[id];
                v.speed = speed;
                v.position = position;
                v.moved_at = Some(self.tick);
                match crossed {
                    Some((track, color, out)) => {
                        let front = self.queues[lane].pop_front();
                        debug_assert_eq!(front, Some(id));
                        self.queues[out].push_back(id);
                        v.lane = out;
                        v.route_index += 1;
                        report.crossings.push(Crossing {
                            vehicle: id,
                            track,
                            color,
                        });
                    }
                    None => ahead = Some(id),
                }
            }
        }
    }

    fn record(&mut self) {
        let eps = self.config.stop_speed_eps;
        let traces = self.config.record_traces;
        for (lane, queue) in self.queues.iter().enumerate() {
            for &id in queue {
                let v = &mut self.vehicles[id];
                self.speed_sum += v.speed;
                self.vehicle_ticks += 1;
                v.speed_sum += v.speed;
                v.live_ticks += 1;
                if v.speed < eps {
                    if v.stopped {
                        v.stops.last_mut().expect("open stop").duration += 1;
                    } else {
                        v.stopped = true;
                        v.stops.push(StopEvent {
                            lane: self.layout.lanes[lane].id.clone(),
                            position: v.position,
                            start_tick: self.tick,
                            duration: 1,
                        });
                    }
                } else {
                    v.stopped = false;
                }
                if traces {
                    v.trace.push(TraceSample {
                        tick: self.tick,
                        lane: self.layout.lanes[lane].id.clone(),
                        position: v.position,
                    });
                }
            }
        }
    }

    fn despawn(&mut self, report: &mut StepReport) {
        for lane in 0..self.queues.len() {
            let info = &self.layout.lanes[lane];
            if !info.exit {
                continue;
            }
            while let Some(&id) = self.queues[lane].front() {
                if self.vehicles[id].position < info.length - EPS {
                    break;
                }
                self.queues[lane].pop_front();
                self.vehicles[id].finished_tick = Some(self.tick + 1);
                self.completed += 1;
                report.completed.push(id);
            }
        }
    }

    /// One Bernoulli draw per entry road in road-id order, then a uniform
    /// choice among its reachable exits. The draws do not depend on the
    /// traffic state, so every programme sees the same demand for a seed.
    fn spawn(&mut self, report: &mut StepReport) {
        let layout = Arc::clone(&self.layout);
        for (_, entry) in &layout.entries {
            if !self.rng.gen_bool(entry.spawn_rate) || entry.routes.is_empty() {
                continue;
            }
            let pick = self.rng.gen_range(0..entry.routes.len());
            match self.try_spawn(entry.routes[pick].1.clone(), self.tick + 1) {
                Some(id) => report.spawned.push(id),
                None => self.rejected_spawns += 1,
            }
        }
    }

    pub fn stats(&self) -> SimulationStats {
        let mut travel_sum = 0u64;
        let vehicles: Vec<VehicleRecord> = self
            .vehicles
            .iter()
            .map(|v| {
                let travel_ticks = v.finished_tick.map(|f| f - v.spawn_tick);
                travel_sum += travel_ticks.unwrap_or(0);
                VehicleRecord {
                    id: v.id,
                    spawn_tick: v.spawn_tick,
                    travel_ticks,
                    mean_speed: if v.live_ticks == 0 {
                        0.0
                    } else {
                        v.speed_sum / v.live_ticks as f64
                    },
                    stops: v.stops.clone(),
                    trace: v.trace.clone(),
                }
            })
            .collect();
        SimulationStats {
            ticks: self.tick,
            v_max: self.config.v_max,
            spawned: self.spawned,
            completed: self.completed,
            live: self.live_count(),
            rejected_spawns: self.rejected_spawns,
            mean_travel_ticks: if self.completed == 0 {
                0.0
            } else {
                travel_sum as f64 / self.completed as f64
            },
            mean_speed: if self.vehicle_ticks == 0 {
                0.0
            } else {
                self.speed_sum / self.vehicle_ticks as f64
            },
            total_stops: self.vehicles.iter().map(|v| v.stops.len() as u64).sum(),
            emergency_stops: self.emergency_stops,
            vehicles,
        }
    }
}
