//! Seeded packet-level discrete-event simulation of the switch/controller
//! network.
//!
//! Every switch is a FIFO single server fed by its own arrival stream; each
//! packet independently picks the packet-in class with probability `ρ_i`.
//! Packet-in messages queue FIFO at one exponential controller.
//!
//! Two routings of packet-in messages are available:
//!
//! * [`SimVariant::Additive`]: the message joins the controller when the
//!   packet arrives at its switch, so the controller sees the thinned Poisson
//!   stream of rate `λ_c`. A switch's total delay is scored as its mean
//!   sojourn plus the controller's mean sojourn.
//! * [`SimVariant::Feedback`]: the message leaves for the controller once the
//!   packet finishes switch service; the packet is done when the controller
//!   has handled it. Totals are measured per packet end to end.
//!
//! Runs are single-threaded and bit-reproducible for a fixed config. Each
//! switch draws from its own ChaCha8 stream, the controller from stream 0.

mod stats;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use stats::{batch_means, BatchAccumulator, Estimate, BATCHES};

use crate::error::{Error, Result};
use crate::network::{validate_scenario, NetworkScenario};
use crate::switch_queue::HyperExpService;

pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64, stream per queue)";

/// Fraction of the horizon discarded as warmup by [`SimConfig::new`].
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SimVariant {
    #[default]
    Additive,
    Feedback,
}

/// Service phase of a packet at its switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    PacketIn,
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: NetworkScenario,
    /// Packets generated (and completed) per switch.
    pub horizon_packets: u64,
    /// Leading packets per switch excluded from the statistics.
    pub warmup_packets: u64,
    pub seed: u64,
    pub variant: SimVariant,
}

impl SimConfig {
    pub fn new(scenario: NetworkScenario, horizon_packets: u64, seed: u64) -> Self {
        Self {
            scenario,
            horizon_packets,
            warmup_packets: (horizon_packets as f64 * DEFAULT_WARMUP_FRACTION) as u64,
            seed,
            variant: SimVariant::default(),
        }
    }

    pub fn with_variant(mut self, variant: SimVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_warmup(mut self, warmup_packets: u64) -> Self {
        self.warmup_packets = warmup_packets;
        self
    }

    fn check(&self) -> Result<()> {
        if self.horizon_packets == 0 {
            return Err(Error::Config("horizon_packets must be > 0".into()));
        }
        if self.warmup_packets >= self.horizon_packets {
            return Err(Error::Config(format!(
                "warmup_packets ({}) must be below horizon_packets ({})",
                self.warmup_packets, self.horizon_packets
            )));
        }
        if self.horizon_packets - self.warmup_packets < BATCHES as u64 {
            return Err(Error::Config(format!(
                "at least {BATCHES} measured packets per switch are needed for batch means"
            )));
        }
        if self.scenario.is_empty() {
            return Err(Error::Config("scenario has no switches".into()));
        }
        for (i, sw) in self.scenario.switches.iter().enumerate() {
            if !(sw.lambda > 0.0 && sw.lambda.is_finite()) {
                return Err(Error::Config(format!("switch {i}: arrival rate must be > 0")));
            }
            sw.service.check()?;
        }
        self.scenario.controller.check()
    }
}

/// Inverse-transform sampler for inter-arrival gaps.
pub trait ArrivalProcess: Sync {
    /// Gap to the next arrival for a stream of mean rate `rate`, from a
    /// uniform variate in (0, 1).
    fn gap(&self, rate: f64, uniform: f64) -> f64;
}

/// Poisson arrivals.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExponentialArrivals;

impl ArrivalProcess for ExponentialArrivals {
    fn gap(&self, rate: f64, uniform: f64) -> f64 {
        -uniform.ln() / rate
    }
}

/// Exponential service time `-ln(u)/μ` of the given phase.
pub fn sample_service(phase: Phase, svc: &HyperExpService, uniform: f64) -> Result<f64> {
    if !(uniform > 0.0 && uniform < 1.0) {
        return Err(Error::UniformDomain(uniform));
    }
    let mu = match phase {
        Phase::PacketIn => svc.mu1,
        Phase::Direct => svc.mu2,
    };
    Ok(-uniform.ln() / mu)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchStats {
    pub mean_sojourn: Estimate,
    /// Mean total delay of this switch's packets; see [`SimVariant`]. `None`
    /// when no packet-in message was measured.
    pub mean_total: Option<Estimate>,
    /// Time-average number of packets in the switch.
    pub mean_queue_len: f64,
    /// Average number of packets found by measured arrivals.
    pub arrival_avg_queue_len: f64,
    pub completed: u64,
    pub generated: u64,
    pub packet_in_generated: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub per_switch: Vec<SwitchStats>,
    /// `None` when fewer than [`BATCHES`] packet-in messages were measured.
    pub controller_mean_sojourn: Option<Estimate>,
    pub controller_completed: u64,
    pub variant: SimVariant,
    pub seed: u64,
    pub rng_algorithm: &'static str,
    /// Stability problems found before the run; queues may grow without bound.
    pub warnings: Vec<String>,
}

pub fn run_simulation(config: &SimConfig) -> Result<SimResult> {
    run_simulation_with(config, &ExponentialArrivals)
}

pub fn run_simulation_with(config: &SimConfig, arrivals: &dyn ArrivalProcess) -> Result<SimResult> {
    config.check()?;
    let warnings = validate_scenario(&config.scenario)
        .iter()
        .map(ToString::to_string)
        .collect();
    let mut sim = Sim::new(config, arrivals);
    sim.run();
    Ok(sim.finish(warnings))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Arrival(usize),
    SwitchDeparture(usize),
    ControllerDeparture,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

// Min-heap on (time, seq).
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

#[derive(Debug, Clone, Copy)]
struct Packet {
    index: u64,
    arrival: f64,
    phase: Phase,
}

#[derive(Debug, Clone, Copy)]
struct Message {
    arrival: f64,
    switch: usize,
    packet: Packet,
}

struct SwitchState {
    rng: ChaCha8Rng,
    queue: VecDeque<Packet>,
    generated: u64,
    packet_in_generated: u64,
    sojourn: BatchAccumulator,
    total: BatchAccumulator,
    measuring: bool,
    last_change: f64,
    window_start: f64,
    window_end: f64,
    area: f64,
    seen_sum: u64,
    seen_count: u64,
}

impl SwitchState {
    fn advance(&mut self, now: f64) {
        if self.measuring {
            self.area += self.queue.len() as f64 * (now - self.last_change);
        }
        self.last_change = now;
    }

    fn uniform(&mut self) -> f64 {
        self.rng.sample(Open01)
    }
}

struct Sim<'a> {
    config: &'a SimConfig,
    arrivals: &'a dyn ArrivalProcess,
    events: BinaryHeap<Event>,
    seq: u64,
    switches: Vec<SwitchState>,
    controller_rng: ChaCha8Rng,
    controller_queue: VecDeque<Message>,
    controller_samples: Vec<f64>,
}

impl<'a> Sim<'a> {
    fn new(config: &'a SimConfig, arrivals: &'a dyn ArrivalProcess) -> Self {
        let measured = config.horizon_packets - config.warmup_packets;
        let switches = (0..config.scenario.len())
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(i as u64 + 1);
                SwitchState {
                    rng,
                    queue: VecDeque::new(),
                    generated: 0,
                    packet_in_generated: 0,
                    sojourn: BatchAccumulator::new(measured),
                    total: BatchAccumulator::new(measured),
                    measuring: false,
                    last_change: 0.0,
                    window_start: 0.0,
                    window_end: 0.0,
                    area: 0.0,
                    seen_sum: 0,
                    seen_count: 0,
                }
            })
            .collect();
        let mut controller_rng = ChaCha8Rng::seed_from_u64(config.seed);
        controller_rng.set_stream(0);
        Self {
            config,
            arrivals,
            events: BinaryHeap::new(),
            seq: 0,
            switches,
            controller_rng,
            controller_queue: VecDeque::new(),
            controller_samples: Vec::new(),
        }
    }

    fn schedule(&mut self, time: f64, kind: EventKind) {
        self.events.push(Event {
            time,
            seq: self.seq,
            kind,
        });
        self.seq += 1;
    }

    fn schedule_arrival(&mut self, i: usize, now: f64) {
        let rate = self.config.scenario.switches[i].lambda;
        let u = self.switches[i].uniform();
        let gap = self.arrivals.gap(rate, u);
        self.schedule(now + gap, EventKind::Arrival(i));
    }

    fn start_service(&mut self, i: usize, now: f64, phase: Phase) {
        let svc = self.config.scenario.switches[i].service;
        let u = self.switches[i].uniform();
        let s = sample_service(phase, &svc, u).expect("Open01 variate");
        self.schedule(now + s, EventKind::SwitchDeparture(i));
    }

    fn run(&mut self) {
        for i in 0..self.switches.len() {
            self.schedule_arrival(i, 0.0);
        }
        while let Some(ev) = self.events.pop() {
            match ev.kind {
                EventKind::Arrival(i) => self.on_arrival(i, ev.time),
                EventKind::SwitchDeparture(i) => self.on_switch_departure(i, ev.time),
                EventKind::ControllerDeparture => self.on_controller_departure(ev.time),
            }
        }
    }

    fn on_arrival(&mut self, i: usize, now: f64) {
        let warmup = self.config.warmup_packets;
        let horizon = self.config.horizon_packets;
        let rho = self.config.scenario.switches[i].service.p_packet_in;

        let sw = &mut self.switches[i];
        let index = sw.generated;
        sw.generated += 1;
        let phase = if sw.uniform() < rho {
            sw.packet_in_generated += 1;
            Phase::PacketIn
        } else {
            Phase::Direct
        };

        sw.advance(now);
        if index == warmup {
            sw.measuring = true;
            sw.window_start = now;
        }
        if index >= warmup {
            sw.seen_sum += sw.queue.len() as u64;
            sw.seen_count += 1;
        }
        let packet = Packet {
            index,
            arrival: now,
            phase,
        };
        sw.queue.push_back(packet);
        let idle = sw.queue.len() == 1;
        let last = index + 1 == horizon;
        if last {
            sw.measuring = false;
            sw.window_end = now;
        }

        if idle {
            self.start_service(i, now, phase);
        }
        if phase == Phase::PacketIn && self.config.variant == SimVariant::Additive {
            self.controller_arrival(now, i, packet);
        }
        if !last {
            self.schedule_arrival(i, now);
        }
    }

    fn on_switch_departure(&mut self, i: usize, now: f64) {
        let warmup = self.config.warmup_packets;
        let variant = self.config.variant;
        let sw = &mut self.switches[i];
        sw.advance(now);
        let packet = sw.queue.pop_front().expect("departure from empty switch");
        let sojourn = now - packet.arrival;
        if packet.index >= warmup {
            sw.sojourn.add(packet.index - warmup, sojourn);
            if variant == SimVariant::Feedback && packet.phase == Phase::Direct {
                sw.total.add(packet.index - warmup, sojourn);
            }
        }
        let next = sw.queue.front().map(|p| p.phase);

        if let Some(phase) = next {
            self.start_service(i, now, phase);
        }
        if variant == SimVariant::Feedback && packet.phase == Phase::PacketIn {
            self.controller_arrival(now, i, packet);
        }
    }

    fn controller_arrival(&mut self, now: f64, switch: usize, packet: Packet) {
        self.controller_queue.push_back(Message {
            arrival: now,
            switch,
            packet,
        });
        if self.controller_queue.len() == 1 {
            self.start_controller(now);
        }
    }

    fn start_controller(&mut self, now: f64) {
        let u: f64 = self.controller_rng.sample(Open01);
        let s = -u.ln() / self.config.scenario.controller.mu_c;
        self.schedule(now + s, EventKind::ControllerDeparture);
    }

    fn on_controller_departure(&mut self, now: f64) {
        let warmup = self.config.warmup_packets;
        let msg = self
            .controller_queue
            .pop_front()
            .expect("departure from empty controller");
        if msg.packet.index >= warmup {
            self.controller_samples.push(now - msg.arrival);
            if self.config.variant == SimVariant::Feedback {
                let ordinal = msg.packet.index - warmup;
                self.switches[msg.switch]
                    .total
                    .add(ordinal, now - msg.packet.arrival);
            }
        }
        if !self.controller_queue.is_empty() {
            self.start_controller(now);
        }
    }

    fn finish(self, warnings: Vec<String>) -> SimResult {
        let controller = batch_means(&self.controller_samples);
        let variant = self.config.variant;
        let per_switch = self
            .switches
            .iter()
            .map(|sw| {
                let mean_sojourn = sw.sojourn.estimate().expect("measured count >= BATCHES");
                let mean_total = match variant {
                    SimVariant::Additive => controller.map(|c| mean_sojourn.plus(&c)),
                    SimVariant::Feedback => sw.total.estimate(),
                };
                let window = sw.window_end - sw.window_start;
                SwitchStats {
                    mean_sojourn,
                    mean_total,
                    mean_queue_len: if window > 0.0 { sw.area / window } else { 0.0 },
                    arrival_avg_queue_len: sw.seen_sum as f64 / sw.seen_count as f64,
                    completed: sw.sojourn.count(),
                    generated: sw.generated,
                    packet_in_generated: sw.packet_in_generated,
                }
            })
            .collect();
        SimResult {
            per_switch,
            controller_mean_sojourn: controller,
            controller_completed: self.controller_samples.len() as u64,
            variant,
            seed: self.config.seed,
            rng_algorithm: RNG_ALGORITHM,
            warnings,
        }
    }
}
