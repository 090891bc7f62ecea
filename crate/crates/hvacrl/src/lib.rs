//! Benchmark suite for setpoint-based HVAC control with reinforcement learning.
//!
//! Two agents — tabular Q-learning over a tile-coded state space and a
//! from-scratch deep Q-network — are trained to pick thermostat setpoints for
//! a multi-zone building and compared against a fixed-setpoint baseline on
//! total electric energy and comfort-band violations.
//!
//! The crate is organised along the data flow of an experiment:
//!
//! * [`weather`] — EPW file ingestion, synthetic climate profiles, and the
//!   chronological train/eval split.
//! * [`thermal`] — the lumped-capacitance (RC) multi-zone building simulator
//!   with a proportional setpoint thermostat and an electric energy meter.
//! * [`env`] — the MDP layer: observation vectors, the 10-row setpoint action
//!   tables, and the energy/comfort reward.
//! * [`tabular`] — Q-learning with uniform tile coding.
//! * [`dqn`] — replay buffer, target network, and a hand-rolled MLP with
//!   backpropagation and an Adam-style optimizer.
//! * [`harness`] — the train/evaluate protocol, the three ablation suites,
//!   and result/curve file output.
//! * [`config`] — the JSON experiment config consumed by the `hvacrl` CLI.
//!
//! See the `book/` directory for a guided tour; its code snippets are
//! compiled and run as doc-tests via the [`guide`] module.

pub mod config;
pub mod dqn;
pub mod env;
pub mod guide;
pub mod harness;
pub mod tabular;
pub mod thermal;
pub mod weather;

mod rngutil;
