//! Scenario and sweep files.
//!
//! Files are JSON documents holding exactly one of two top-level keys:
//!
//! ```json
//! { "scenario": {
//!     "switches": [ { "lambda": 20000,
//!                     "service": { "p_packet_in": 0.1, "mu1": 32000, "mu2": 64000 } } ],
//!     "controller": { "mu_c": 256000 } } }
//! ```
//!
//! ```json
//! { "sweep": { "preset": "fig8", "series_lambda": [20000] } }
//! ```
//!
//! A sweep naming a built-in preset only needs the fields it overrides; a
//! `custom` sweep must give every field except `outputs`, `sim_packets`,
//! `seed` and `variant`. Rates are packets (or messages) per second.
//! Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::network::{validate_scenario, Entity, NetworkScenario, Violation};
use crate::sim::SimVariant;
use crate::sweep::{
    FixedParams, Outputs, Preset, SweepRange, SweepSpec, SweptVariable, DEFAULT_SEED,
    DEFAULT_SIM_PACKETS,
};

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioFile {
    Scenario(NetworkScenario),
    Sweep(SweepSpec),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    scenario: Option<NetworkScenario>,
    sweep: Option<SweepDocument>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDocument {
    preset: Preset,
    swept_variable: Option<SweptVariable>,
    range: Option<SweepRange>,
    series_lambda: Option<Vec<f64>>,
    fixed: Option<FixedOverrides>,
    outputs: Option<Outputs>,
    sim_packets: Option<u64>,
    seed: Option<u64>,
    variant: Option<SimVariant>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FixedOverrides {
    n_switches: Option<usize>,
    lambda: Option<f64>,
    p_packet_in: Option<f64>,
    mu1: Option<f64>,
    mu2: Option<f64>,
    mu_c: Option<f64>,
}

pub fn parse_scenario_file(path: impl AsRef<Path>) -> Result<ScenarioFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario_str(&text, path)
}

/// Parses file contents; `path` is only used in diagnostics.
pub fn parse_scenario_str(text: &str, path: impl AsRef<Path>) -> Result<ScenarioFile> {
    let path = path.as_ref();
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    let shape_error = |message: &str| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        column: 1,
        message: message.to_string(),
    };
    match (doc.scenario, doc.sweep) {
        (Some(scenario), None) => {
            let violations = validate_scenario(&scenario);
            if violations.is_empty() {
                Ok(ScenarioFile::Scenario(scenario))
            } else {
                Err(Error::Validation(violations))
            }
        }
        (None, Some(sweep)) => {
            let spec = sweep.resolve()?;
            let violations = spec.violations();
            if violations.is_empty() {
                Ok(ScenarioFile::Sweep(spec))
            } else {
                Err(Error::Validation(violations))
            }
        }
        (Some(_), Some(_)) => Err(shape_error(
            "a file holds either `scenario` or `sweep`, not both",
        )),
        (None, None) => Err(shape_error("expected a top-level `scenario` or `sweep` key")),
    }
}

// serde_json appends " at line L column C"; we report position separately.
fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

impl SweepDocument {
    fn resolve(self) -> Result<SweepSpec> {
        let base = SweepSpec::preset(self.preset);
        let mut missing = Vec::new();
        let mut need = |name: &'static str| {
            missing.push(Violation {
                entity: Entity::Sweep,
                invariant: name,
                value: f64::NAN,
            })
        };

        let swept_variable = self
            .swept_variable
            .or(base.as_ref().map(|b| b.swept_variable));
        let range = self.range.or(base.as_ref().map(|b| b.range));
        let base_fixed = base.as_ref().map(|b| b.fixed);
        let f = self.fixed.unwrap_or_default();
        let pick = |over: Option<f64>, from: fn(&FixedParams) -> f64| {
            over.or(base_fixed.as_ref().map(from))
        };
        let n_switches = f.n_switches.or(base_fixed.map(|b| b.n_switches));
        let lambda = pick(f.lambda, |b| b.lambda);
        let p_packet_in = pick(f.p_packet_in, |b| b.p_packet_in);
        let mu1 = pick(f.mu1, |b| b.mu1);
        let mu2 = pick(f.mu2, |b| b.mu2);
        let mu_c = pick(f.mu_c, |b| b.mu_c);
        let series_lambda = self
            .series_lambda
            .or(base.as_ref().map(|b| b.series_lambda.clone()))
            .or(lambda.map(|l| vec![l]));

        if swept_variable.is_none() {
            need("missing field swept_variable");
        }
        if range.is_none() {
            need("missing field range");
        }
        for (name, present) in [
            ("missing field fixed.n_switches", n_switches.is_some()),
            ("missing field fixed.lambda", lambda.is_some()),
            ("missing field fixed.p_packet_in", p_packet_in.is_some()),
            ("missing field fixed.mu1", mu1.is_some()),
            ("missing field fixed.mu2", mu2.is_some()),
            ("missing field fixed.mu_c", mu_c.is_some()),
        ] {
            if !present {
                need(name);
            }
        }
        if !missing.is_empty() {
            return Err(Error::Validation(missing));
        }

        Ok(SweepSpec {
            preset: self.preset,
            swept_variable: swept_variable.unwrap(),
            range: range.unwrap(),
            series_lambda: series_lambda.unwrap_or_default(),
            fixed: FixedParams {
                n_switches: n_switches.unwrap(),
                lambda: lambda.unwrap(),
                p_packet_in: p_packet_in.unwrap(),
                mu1: mu1.unwrap(),
                mu2: mu2.unwrap(),
                mu_c: mu_c.unwrap(),
            },
            outputs: self.outputs.unwrap_or(Outputs::Analytic),
            sim_packets: self.sim_packets.unwrap_or(DEFAULT_SIM_PACKETS),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            variant: self.variant.unwrap_or_default(),
        })
    }
}

/// Serializes a scenario in the file format.
pub fn scenario_to_string(scenario: &NetworkScenario) -> String {
    let doc = serde_json::json!({ "scenario": scenario });
    serde_json::to_string_pretty(&doc).expect("scenario serializes") + "\n"
}

/// Serializes a sweep with every field spelled out.
pub fn sweep_to_string(spec: &SweepSpec) -> String {
    let doc = serde_json::json!({ "sweep": spec });
    serde_json::to_string_pretty(&doc).expect("sweep serializes") + "\n"
}
