//! Packet delay in OpenFlow networks from queueing models.
//!
//! Switches are M/H2/1 queues solved by the matrix-geometric method
//! ([`switch_queue`]), the controller is an M/M/1 queue of packet-in messages
//! ([`controller`]), and [`network`] composes them over a scenario of `n`
//! switches sharing one controller. [`sim`] is a seeded discrete-event
//! simulator of the same system, and [`scenario`], [`sweep`] and [`report`]
//! back the `ofdelay` command line tool.

pub mod controller;
pub mod error;
pub mod matrix;
pub mod network;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod sweep;
pub mod switch_queue;

pub use controller::{controller_mean_queue, controller_mean_sojourn, ControllerParams};
pub use error::{Error, Result};
pub use network::{
    aggregate_packet_in_rate, analyze_scenario, expected_total_delay_per_switch,
    total_delay_per_switch, validate_scenario, weighted_switch_delay, NetworkScenario,
    ScenarioReport, SwitchParams, Violation,
};
pub use sim::{run_simulation, SimConfig, SimResult, SimVariant};
pub use switch_queue::{
    build_qbd_blocks, pollaczek_khinchine_mean, solve_rate_matrix, solve_switch_queue,
    HyperExpService, QbdBlocks, QueueMetrics, StationaryDistribution,
};
