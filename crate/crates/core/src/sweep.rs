//! Parameter sweeps over uniform scenarios, including the built-in presets
//! for the switch delay, controller-vs-switch-count and
//! controller-vs-packet-in-probability studies.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::ControllerParams;
use crate::error::{Error, Result};
use crate::network::{analyze_scenario, validate_scenario, Entity, NetworkScenario, SwitchParams, Violation};
use crate::sim::{run_simulation, Estimate, SimConfig, SimVariant, BATCHES};

pub const MU1_PACKET_IN: f64 = 32000.0;
pub const MU2_DIRECT: f64 = 64000.0;
pub const MU_CONTROLLER: f64 = 256000.0;

pub const DEFAULT_SIM_PACKETS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Switch sojourn time against packet-in probability.
    Fig5,
    /// Controller sojourn time against the number of switches.
    Fig6,
    /// Controller sojourn time against packet-in probability, 10 switches.
    Fig8,
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig8 => "fig8",
            Preset::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptVariable {
    PPacketIn,
    NSwitches,
    Lambda,
}

impl SweptVariable {
    /// Column label of the swept value.
    pub fn label(self) -> &'static str {
        match self {
            SweptVariable::PPacketIn => "p",
            SweptVariable::NSwitches => "n",
            SweptVariable::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    /// Points `start + k·step` up to `stop` inclusive, rounded to 12 decimals
    /// so that e.g. `0.05·3` is reported as `0.15`.
    pub fn points(&self) -> Vec<f64> {
        let span = (self.stop - self.start) / self.step;
        let count = (span + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| {
                let x = self.start + k as f64 * self.step;
                (x * 1e12).round() / 1e12
            })
            .collect()
    }
}

/// Parameters held fixed across a sweep; the swept one is overridden per point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    pub n_switches: usize,
    pub lambda: f64,
    pub p_packet_in: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outputs {
    Analytic,
    Simulate,
    Both,
}

impl Outputs {
    pub fn analytic(self) -> bool {
        matches!(self, Outputs::Analytic | Outputs::Both)
    }

    pub fn simulate(self) -> bool {
        matches!(self, Outputs::Simulate | Outputs::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub preset: Preset,
    pub swept_variable: SweptVariable,
    pub range: SweepRange,
    /// One curve per arrival rate. Ignored when `lambda` is swept.
    pub series_lambda: Vec<f64>,
    pub fixed: FixedParams,
    pub outputs: Outputs,
    /// Packets per switch for each simulated point.
    pub sim_packets: u64,
    pub seed: u64,
    pub variant: SimVariant,
}

impl SweepSpec {
    pub fn preset(preset: Preset) -> Option<SweepSpec> {
        let probability = SweepRange {
            start: 0.0,
            stop: 1.0,
            step: 0.05,
        };
        let base = FixedParams {
            n_switches: 1,
            lambda: 30000.0,
            p_packet_in: 0.1,
            mu1: MU1_PACKET_IN,
            mu2: MU2_DIRECT,
            mu_c: MU_CONTROLLER,
        };
        let (swept_variable, range, series_lambda, fixed) = match preset {
            Preset::Fig5 => (
                SweptVariable::PPacketIn,
                probability,
                vec![20000.0, 25000.0, 30000.0],
                base,
            ),
            Preset::Fig6 => (
                SweptVariable::NSwitches,
                SweepRange {
                    start: 1.0,
                    stop: 50.0,
                    step: 1.0,
                },
                vec![20000.0, 25000.0, 30000.0],
                base,
            ),
            Preset::Fig8 => (
                SweptVariable::PPacketIn,
                probability,
                vec![10000.0, 15000.0, 20000.0],
                FixedParams {
                    n_switches: 10,
                    lambda: 20000.0,
                    ..base
                },
            ),
            Preset::Custom => return None,
        };
        Some(SweepSpec {
            preset,
            swept_variable,
            range,
            series_lambda,
            fixed,
            outputs: Outputs::Analytic,
            sim_packets: DEFAULT_SIM_PACKETS,
            seed: DEFAULT_SEED,
            variant: SimVariant::Additive,
        })
    }

    /// Structural problems with the sweep description itself. Points that turn out
    /// unstable are not errors; they are marked in the table.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |invariant: &'static str, value: f64| {
            out.push(Violation {
                entity: Entity::Sweep,
                invariant,
                value,
            })
        };
        let r = self.range;
        if !(r.step > 0.0 && r.step.is_finite()) {
            bad("range step must be > 0", r.step);
        }
        if !(r.start.is_finite() && r.stop.is_finite() && r.start <= r.stop) {
            bad("range must be non-empty (start <= stop)", r.stop);
        }
        let f = self.fixed;
        if f.n_switches == 0 {
            bad("n_switches must be >= 1", 0.0);
        }
        for (invariant, v) in [
            ("lambda must be > 0", f.lambda),
            ("mu1 must be > 0", f.mu1),
            ("mu2 must be > 0", f.mu2),
            ("mu_c must be > 0", f.mu_c),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bad(invariant, v);
            }
        }
        if !(0.0..=1.0).contains(&f.p_packet_in) {
            bad("probability out of range [0, 1]", f.p_packet_in);
        }
        if self.swept_variable != SweptVariable::Lambda {
            if self.series_lambda.is_empty() {
                bad("series_lambda must list at least one arrival rate", 0.0);
            }
            for &l in &self.series_lambda {
                if !(l > 0.0 && l.is_finite()) {
                    bad("series_lambda entries must be > 0", l);
                }
            }
        }
        match self.swept_variable {
            SweptVariable::PPacketIn => {
                if r.start < 0.0 || r.stop > 1.0 {
                    bad("probability out of range [0, 1]", if r.start < 0.0 { r.start } else { r.stop });
                }
            }
            SweptVariable::NSwitches => {
                if r.start < 1.0 || r.start.fract() != 0.0 || r.step.fract() != 0.0 {
                    bad("n_switches range must use integers >= 1", r.start);
                }
            }
            SweptVariable::Lambda => {
                if !(r.start > 0.0) {
                    bad("lambda must be > 0", r.start);
                }
            }
        }
        let min_packets = (BATCHES as u64) * 2;
        if self.outputs.simulate() && self.sim_packets < min_packets {
            bad("sim_packets too small for batch means", self.sim_packets as f64);
        }
        out
    }

    fn point(&self, x: f64, series: f64) -> SweepPoint {
        let mut p = SweepPoint {
            x,
            lambda: series,
            n_switches: self.fixed.n_switches,
            p_packet_in: self.fixed.p_packet_in,
        };
        match self.swept_variable {
            SweptVariable::PPacketIn => p.p_packet_in = x,
            SweptVariable::NSwitches => p.n_switches = x as usize,
            SweptVariable::Lambda => p.lambda = x,
        }
        p
    }

    /// Every (swept value, series) pair, ascending in the swept value.
    pub fn points(&self) -> Vec<SweepPoint> {
        let series = match self.swept_variable {
            SweptVariable::Lambda => vec![self.fixed.lambda],
            _ => self.series_lambda.clone(),
        };
        self.range
            .points()
            .into_iter()
            .flat_map(|x| series.iter().map(move |&l| (x, l)))
            .map(|(x, l)| self.point(x, l))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Swept value.
    pub x: f64,
    /// Per-switch arrival rate.
    pub lambda: f64,
    pub n_switches: usize,
    pub p_packet_in: f64,
}

impl SweepPoint {
    pub fn scenario(&self, fixed: &FixedParams) -> NetworkScenario {
        NetworkScenario::uniform(
            self.n_switches,
            SwitchParams::new(self.lambda, self.p_packet_in, fixed.mu1, fixed.mu2),
            ControllerParams { mu_c: fixed.mu_c },
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticValues {
    pub e_t_si: f64,
    pub e_t_s: f64,
    pub e_t_c: f64,
    pub e_t_sum: f64,
    pub switch_utilization: f64,
    pub controller_utilization: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimValues {
    /// Pooled over the (identical) switches.
    pub e_t_si: Estimate,
    pub e_t_c: Option<Estimate>,
    pub e_t_sum: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PointOutcome {
    Stable {
        analytic: AnalyticValues,
        sim: Option<SimValues>,
    },
    /// Violated invariants; no values are reported for the point.
    Unstable(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub outcome: PointOutcome,
}

impl SweepRow {
    pub fn analytic(&self) -> Option<&AnalyticValues> {
        match &self.outcome {
            PointOutcome::Stable { analytic, .. } => Some(analytic),
            PointOutcome::Unstable(_) => None,
        }
    }

    pub fn sim(&self) -> Option<&SimValues> {
        match &self.outcome {
            PointOutcome::Stable { sim, .. } => sim.as_ref(),
            PointOutcome::Unstable(_) => None,
        }
    }

    pub fn is_stable(&self) -> bool {
        self.analytic().is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Distinct series rates in first-seen order.
    pub fn series(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.point.lambda) {
                out.push(r.point.lambda);
            }
        }
        out
    }
}

/// Evaluates every sweep point. Points are independent and computed in
/// parallel; rows come back in sweep order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    let violations = spec.violations();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let rows = spec
        .points()
        .into_par_iter()
        .map(|point| SweepRow {
            point,
            outcome: evaluate(spec, &point),
        })
        .collect();
    Ok(SweepTable {
        spec: spec.clone(),
        rows,
    })
}

fn evaluate(spec: &SweepSpec, point: &SweepPoint) -> PointOutcome {
    let scenario = point.scenario(&spec.fixed);
    let violations = validate_scenario(&scenario);
    if !violations.is_empty() {
        return PointOutcome::Unstable(violations.iter().map(ToString::to_string).collect());
    }
    let report = match analyze_scenario(&scenario) {
        Ok(r) => r,
        Err(e) => return PointOutcome::Unstable(vec![e.to_string()]),
    };
    let analytic = AnalyticValues {
        e_t_si: report.per_switch[0].mean_sojourn_s,
        e_t_s: report.weighted_switch_delay,
        e_t_c: report.controller.mean_sojourn_s,
        e_t_sum: report.per_switch_total[0],
        switch_utilization: report.per_switch[0].utilization,
        controller_utilization: report.controller.utilization,
    };
    let sim = if spec.outputs.simulate() {
        let config = SimConfig::new(scenario, spec.sim_packets, spec.seed).with_variant(spec.variant);
        match run_simulation(&config) {
            Ok(result) => Some(pool(&result, spec.variant)),
            Err(e) => return PointOutcome::Unstable(vec![e.to_string()]),
        }
    } else {
        None
    };
    PointOutcome::Stable { analytic, sim }
}

/// Pools independent per-switch estimates into one mean.
fn pool_estimates(estimates: &[Estimate]) -> Estimate {
    let n = estimates.len() as f64;
    Estimate {
        mean: estimates.iter().map(|e| e.mean).sum::<f64>() / n,
        half_width: estimates.iter().map(|e| e.half_width.powi(2)).sum::<f64>().sqrt() / n,
        samples: estimates.iter().map(|e| e.samples).sum(),
    }
}

fn pool(result: &crate::sim::SimResult, variant: SimVariant) -> SimValues {
    let switches: Vec<Estimate> = result.per_switch.iter().map(|s| s.mean_sojourn).collect();
    let e_t_si = pool_estimates(&switches);
    let e_t_c = result.controller_mean_sojourn;
    let e_t_sum = match variant {
        SimVariant::Additive => e_t_c.map(|c| e_t_si.plus(&c)),
        SimVariant::Feedback => {
            let totals: Option<Vec<Estimate>> =
                result.per_switch.iter().map(|s| s.mean_total).collect();
            totals.map(|t| pool_estimates(&t))
        }
    };
    SimValues {
        e_t_si,
        e_t_c,
        e_t_sum,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_range_has_21_clean_points() {
        let pts = SweepSpec::preset(Preset::Fig5).unwrap().range.points();
        assert_eq!(pts.len(), 21);
        assert_eq!(pts[3], 0.15);
        assert_eq!(pts[20], 1.0);
    }

    #[test]
    fn presets_carry_published_parameters() {
        for p in [Preset::Fig5, Preset::Fig6, Preset::Fig8] {
            let s = SweepSpec::preset(p).unwrap();
            assert_eq!(s.fixed.mu1, 32000.0);
            assert_eq!(s.fixed.mu2, 64000.0);
            assert_eq!(s.fixed.mu_c, 256000.0);
            assert!(s.violations().is_empty());
        }
        let f6 = SweepSpec::preset(Preset::Fig6).unwrap();
        assert_eq!(f6.fixed.p_packet_in, 0.1);
        assert_eq!(f6.range.points().len(), 50);
        let f8 = SweepSpec::preset(Preset::Fig8).unwrap();
        assert_eq!(f8.fixed.n_switches, 10);
        assert_eq!(f8.fixed.lambda, 20000.0);
        assert_eq!(f8.series_lambda, vec![10000.0, 15000.0, 20000.0]);
        assert!(SweepSpec::preset(Preset::Custom).is_none());
    }

    #[test]
    fn degenerate_endpoints_of_switch_sweep() {
        let t = run_sweep(&SweepSpec::preset(Preset::Fig5).unwrap()).unwrap();
        let at = |p: f64| {
            t.rows
                .iter()
                .find(|r| r.point.x == p && r.point.lambda == 30000.0)
                .and_then(SweepRow::analytic)
                .unwrap()
                .e_t_si
        };
        assert!((at(0.0) - 1.0 / 34000.0).abs() < 1e-15);
        assert!((at(1.0) - 5.0e-4).abs() < 1e-15);
    }

    #[test]
    fn every_probability_point_of_controller_sweep_is_stable() {
        let t = run_sweep(&SweepSpec::preset(Preset::Fig8).unwrap()).unwrap();
        assert_eq!(t.rows.len(), 63);
        assert!(t.rows.iter().all(SweepRow::is_stable));
    }

    #[test]
    fn overloaded_points_are_marked() {
        let mut spec = SweepSpec::preset(Preset::Fig6).unwrap();
        spec.series_lambda = vec![60000.0];
        spec.fixed.mu1 = 128000.0;
        spec.fixed.mu2 = 128000.0;
        let t = run_sweep(&spec).unwrap();
        // λ_c = 6000·n crosses 256000 beyond n = 42.
        for row in &t.rows {
            assert_eq!(row.is_stable(), row.point.n_switches <= 42, "n={}", row.point.n_switches);
        }
    }

    #[test]
    fn rows_are_ascending_in_swept_value() {
        let t = run_sweep(&SweepSpec::preset(Preset::Fig6).unwrap()).unwrap();
        assert!(t.rows.windows(2).all(|w| w[0].point.x <= w[1].point.x));
        assert_eq!(t.series(), vec![20000.0, 25000.0, 30000.0]);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = SweepSpec::preset(Preset::Fig5).unwrap();
        s.range.step = 0.0;
        assert!(matches!(run_sweep(&s), Err(Error::Validation(_))));
        let mut s = SweepSpec::preset(Preset::Fig5).unwrap();
        s.range.stop = 1.2;
        assert!(run_sweep(&s).is_err());
        let mut s = SweepSpec::preset(Preset::Fig6).unwrap();
        s.range.start = 0.0;
        assert!(run_sweep(&s).is_err());
        let mut s = SweepSpec::preset(Preset::Fig5).unwrap();
        s.range.start = 0.8;
        s.range.stop = 0.2;
        assert!(run_sweep(&s).is_err());
    }

    #[test]
    fn simulated_sweep_attaches_estimates() {
        let mut s = SweepSpec::preset(Preset::Fig8).unwrap();
        s.range = SweepRange {
            start: 0.5,
            stop: 0.5,
            step: 0.1,
        };
        s.series_lambda = vec![10000.0];
        s.outputs = Outputs::Both;
        s.sim_packets = 20_000;
        let t = run_sweep(&s).unwrap();
        let sim = t.rows[0].sim().unwrap();
        let a = t.rows[0].analytic().unwrap();
        assert!(sim.e_t_c.unwrap().relative_error(a.e_t_c) < 0.05);
        assert!(sim.e_t_si.relative_error(a.e_t_si) < 0.05);
        assert!(sim.e_t_sum.is_some());
    }
}
