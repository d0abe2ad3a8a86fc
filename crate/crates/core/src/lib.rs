//! Microscopic traffic simulation used as the fitness function of a
//! population-based incremental learning (PBIL) optimiser for traffic-lights
//! programmes.
//!
//! * [`netmodel`] : road network model, XML format, validation, routing.
//! * [`lights`] : programmes, chromosome codec, feasibility checks, repair.
//! * [`sim`] : tick-based simulation of driver agents and statistics.
//! * [`evo`] : PBIL over chromosomes with simulation-backed evaluation.

pub mod cli;
pub mod evo;
pub mod fixtures;
pub mod lights;
pub mod netmodel;
pub mod sim;
