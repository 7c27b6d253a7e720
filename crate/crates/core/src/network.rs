//! Composition of switch and controller queues over a whole network.
//!
//! All switches share a single controller. The controller sees the superposed
//! packet-in stream `λ_c = Σ λ_i·ρ_i`, and a packet at switch `i` is charged
//! `E[T_si] + E[T_c]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::controller::{controller_mean_sojourn, controller_metrics, ControllerParams};
use crate::error::{Error, Result};
use crate::switch_queue::{solve_switch_queue, HyperExpService, QueueMetrics, STABILITY_GUARD};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchParams {
    /// Packet arrival rate at this switch (packets/s).
    pub lambda: f64,
    pub service: HyperExpService,
}

impl SwitchParams {
    pub fn new(lambda: f64, p_packet_in: f64, mu1: f64, mu2: f64) -> Self {
        Self {
            lambda,
            service: HyperExpService {
                p_packet_in,
                mu1,
                mu2,
            },
        }
    }

    pub fn utilization(&self) -> f64 {
        self.service.utilization(self.lambda)
    }

    pub fn packet_in_rate(&self) -> f64 {
        self.lambda * self.service.p_packet_in
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkScenario {
    pub switches: Vec<SwitchParams>,
    pub controller: ControllerParams,
}

impl NetworkScenario {
    /// `n` switches with identical traffic and service.
    pub fn uniform(n: usize, switch: SwitchParams, controller: ControllerParams) -> Self {
        Self {
            switches: vec![switch; n],
            controller,
        }
    }

    pub fn len(&self) -> usize {
        self.switches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.switches.is_empty()
    }
}

/// The part of a scenario an invariant violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Entity {
    Scenario,
    Switch(usize),
    Controller,
    /// A sweep definition rather than a concrete scenario.
    Sweep,
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entity::Scenario => f.write_str("scenario"),
            Entity::Switch(i) => write!(f, "switch {i}"),
            Entity::Controller => f.write_str("controller"),
            Entity::Sweep => f.write_str("sweep"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub entity: Entity,
    pub invariant: &'static str,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.invariant)?;
        if !self.value.is_nan() {
            write!(f, " (got {})", self.value)?;
        }
        Ok(())
    }
}

/// Lists every scenario invariant that does not hold. Stability is only
/// checked for entities whose parameters are otherwise valid.
pub fn validate_scenario(scenario: &NetworkScenario) -> Vec<Violation> {
    let mut out = Vec::new();
    if scenario.switches.is_empty() {
        out.push(Violation {
            entity: Entity::Scenario,
            invariant: "at least one switch is required",
            value: 0.0,
        });
    }

    let mut rates_valid = true;
    for (i, sw) in scenario.switches.iter().enumerate() {
        let entity = Entity::Switch(i);
        let before = out.len();
        if !(sw.lambda > 0.0 && sw.lambda.is_finite()) {
            out.push(Violation {
                entity,
                invariant: "arrival rate lambda must be > 0",
                value: sw.lambda,
            });
        }
        let p = sw.service.p_packet_in;
        if !(0.0..=1.0).contains(&p) {
            out.push(Violation {
                entity,
                invariant: "probability out of range [0, 1]",
                value: p,
            });
        }
        for (invariant, value) in [
            ("service rate mu1 must be > 0", sw.service.mu1),
            ("service rate mu2 must be > 0", sw.service.mu2),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                out.push(Violation {
                    entity,
                    invariant,
                    value,
                });
            }
        }
        if out.len() > before {
            rates_valid = false;
            continue;
        }
        let u = sw.utilization();
        if u >= 1.0 - STABILITY_GUARD {
            out.push(Violation {
                entity,
                invariant: "utilization must be < 1",
                value: u,
            });
        }
    }

    let mu_c = scenario.controller.mu_c;
    if !(mu_c > 0.0 && mu_c.is_finite()) {
        out.push(Violation {
            entity: Entity::Controller,
            invariant: "service rate mu_c must be > 0",
            value: mu_c,
        });
    } else if rates_valid {
        let lambda_c = aggregate_packet_in_rate(scenario);
        if lambda_c >= mu_c {
            out.push(Violation {
                entity: Entity::Controller,
                invariant: "packet-in rate lambda_c must be < mu_c",
                value: lambda_c,
            });
        }
    }
    out
}

/// `λ_c = Σ λ_i·ρ_i`.
pub fn aggregate_packet_in_rate(scenario: &NetworkScenario) -> f64 {
    scenario.switches.iter().map(SwitchParams::packet_in_rate).sum()
}

fn solve_switch(scenario: &NetworkScenario, index: usize) -> Result<QueueMetrics> {
    let sw = scenario.switches.get(index).ok_or(Error::IndexOutOfRange {
        index,
        len: scenario.len(),
    })?;
    solve_switch_queue(&sw.service, sw.lambda)
        .map(|s| s.metrics)
        .map_err(|e| match e {
            Error::UnstableSwitch { utilization, .. } => Error::UnstableSwitch {
                index: Some(index),
                utilization,
            },
            other => other,
        })
}

fn solve_all_switches(scenario: &NetworkScenario) -> Result<Vec<QueueMetrics>> {
    if scenario.is_empty() {
        return Err(Error::Validation(validate_scenario(scenario)));
    }
    (0..scenario.len()).map(|i| solve_switch(scenario, i)).collect()
}

fn weighted_delay(scenario: &NetworkScenario, metrics: &[QueueMetrics]) -> f64 {
    let total: f64 = scenario.switches.iter().map(|s| s.lambda).sum();
    scenario
        .switches
        .iter()
        .zip(metrics)
        .map(|(s, m)| s.lambda / total * m.mean_sojourn_s)
        .sum()
}

/// Traffic-weighted mean switch sojourn `E[T_s] = Σ (λ_i/Σλ_j)·E[T_si]`.
pub fn weighted_switch_delay(scenario: &NetworkScenario) -> Result<f64> {
    let metrics = solve_all_switches(scenario)?;
    Ok(weighted_delay(scenario, &metrics))
}

fn controller_delay(scenario: &NetworkScenario) -> Result<f64> {
    controller_mean_sojourn(&scenario.controller, aggregate_packet_in_rate(scenario))
}

/// `E[T_sum] = E[T_c] + E[T_si]`, charging the controller delay to every
/// packet of switch `index`.
pub fn total_delay_per_switch(scenario: &NetworkScenario, index: usize) -> Result<f64> {
    let switch = solve_switch(scenario, index)?;
    Ok(controller_delay(scenario)? + switch.mean_sojourn_s)
}

/// `ρ_i·E[T_c] + E[T_si]`: charges the controller only to the fraction of
/// packets that actually trigger a packet-in. This is an extension; the
/// additive form of [`total_delay_per_switch`] is the model's own.
pub fn expected_total_delay_per_switch(scenario: &NetworkScenario, index: usize) -> Result<f64> {
    let switch = solve_switch(scenario, index)?;
    let rho = scenario.switches[index].service.p_packet_in;
    Ok(rho * controller_delay(scenario)? + switch.mean_sojourn_s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub per_switch: Vec<QueueMetrics>,
    pub controller: QueueMetrics,
    /// Aggregate packet-in rate at the controller.
    pub lambda_c: f64,
    pub weighted_switch_delay: f64,
    pub per_switch_total: Vec<f64>,
    /// `ρ_i·E[T_c] + E[T_si]` per switch (extension).
    pub per_switch_expected_total: Vec<f64>,
}

/// Solves every queue in the scenario.
pub fn analyze_scenario(scenario: &NetworkScenario) -> Result<ScenarioReport> {
    let per_switch = solve_all_switches(scenario)?;
    let lambda_c = aggregate_packet_in_rate(scenario);
    let controller = controller_metrics(&scenario.controller, lambda_c)?;
    let t_c = controller.mean_sojourn_s;
    let per_switch_total = per_switch.iter().map(|m| t_c + m.mean_sojourn_s).collect();
    let per_switch_expected_total = per_switch
        .iter()
        .zip(&scenario.switches)
        .map(|(m, s)| s.service.p_packet_in * t_c + m.mean_sojourn_s)
        .collect();
    Ok(ScenarioReport {
        weighted_switch_delay: weighted_delay(scenario, &per_switch),
        per_switch,
        controller,
        lambda_c,
        per_switch_total,
        per_switch_expected_total,
    })
}
