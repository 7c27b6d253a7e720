//! CSV and plot-data rendering of sweep tables.
//!
//! CSV is long format, one line per sweep row:
//!
//! ```text
//! <x>,lambda,<metric columns>,[sim columns],stable
//! ```
//!
//! where `<x>` is `p`, `n` or `lambda` and the metric columns depend on the
//! preset (`fig5`: `E_T_si_s,utilization`; `fig6`/`fig8`:
//! `E_T_c_s,controller_utilization`; `custom`: all delays and both
//! utilizations). Simulated sweeps add `sim_<delay>` and `sim_<delay>_ci`
//! (95% half-width) for every delay column. Delays are in seconds unless
//! millisecond output is requested, in which case the `_s` suffix becomes
//! `_ms`. Unstable rows have empty value cells and `stable=false`. Numbers
//! use `.` as radix and lines end in `\n`.
//!
//! Plot data is wide format: the swept value followed by one column per
//! arrival-rate series for the preset's headline delay.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sim::Estimate;
use crate::sweep::{AnalyticValues, Preset, SimValues, SweepRow, SweepTable, SweptVariable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    PlotData,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "plot-data" => Ok(ReportFormat::PlotData),
            other => Err(format!("unknown format `{other}` (expected csv or plot-data)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeUnit {
    #[default]
    Seconds,
    Milliseconds,
}

impl TimeUnit {
    fn suffix(self) -> &'static str {
        match self {
            TimeUnit::Seconds => "s",
            TimeUnit::Milliseconds => "ms",
        }
    }

    fn scale(self) -> f64 {
        match self {
            TimeUnit::Seconds => 1.0,
            TimeUnit::Milliseconds => 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    SwitchDelay,
    WeightedSwitchDelay,
    ControllerDelay,
    TotalDelay,
    SwitchUtilization,
    ControllerUtilization,
}

impl Metric {
    fn is_delay(self) -> bool {
        !matches!(self, Metric::SwitchUtilization | Metric::ControllerUtilization)
    }

    fn name(self, unit: TimeUnit) -> String {
        let stem = match self {
            Metric::SwitchDelay => "E_T_si",
            Metric::WeightedSwitchDelay => "E_T_s",
            Metric::ControllerDelay => "E_T_c",
            Metric::TotalDelay => "E_T_sum",
            Metric::SwitchUtilization => return "utilization".into(),
            Metric::ControllerUtilization => return "controller_utilization".into(),
        };
        format!("{stem}_{}", unit.suffix())
    }

    fn sim_names(self, unit: TimeUnit) -> (String, String) {
        let name = self.name(unit);
        let (stem, suffix) = name.rsplit_once('_').expect("delay names carry a unit");
        (format!("sim_{name}"), format!("sim_{stem}_ci_{suffix}"))
    }

    fn analytic(self, v: &AnalyticValues, unit: TimeUnit) -> f64 {
        let s = unit.scale();
        match self {
            Metric::SwitchDelay => v.e_t_si * s,
            Metric::WeightedSwitchDelay => v.e_t_s * s,
            Metric::ControllerDelay => v.e_t_c * s,
            Metric::TotalDelay => v.e_t_sum * s,
            Metric::SwitchUtilization => v.switch_utilization,
            Metric::ControllerUtilization => v.controller_utilization,
        }
    }

    fn sim(self, v: &SimValues) -> Option<Estimate> {
        match self {
            Metric::SwitchDelay | Metric::WeightedSwitchDelay => Some(v.e_t_si),
            Metric::ControllerDelay => v.e_t_c,
            Metric::TotalDelay => v.e_t_sum,
            _ => None,
        }
    }
}

fn layout(preset: Preset) -> Vec<Metric> {
    match preset {
        Preset::Fig5 => vec![Metric::SwitchDelay, Metric::SwitchUtilization],
        Preset::Fig6 | Preset::Fig8 => {
            vec![Metric::ControllerDelay, Metric::ControllerUtilization]
        }
        Preset::Custom => vec![
            Metric::SwitchDelay,
            Metric::WeightedSwitchDelay,
            Metric::ControllerDelay,
            Metric::TotalDelay,
            Metric::SwitchUtilization,
            Metric::ControllerUtilization,
        ],
    }
}

fn headline(preset: Preset) -> Metric {
    match preset {
        Preset::Fig5 => Metric::SwitchDelay,
        Preset::Fig6 | Preset::Fig8 => Metric::ControllerDelay,
        Preset::Custom => Metric::TotalDelay,
    }
}

fn num(x: f64) -> String {
    debug_assert!(x.is_finite());
    format!("{x}")
}

fn swept_value(row: &SweepRow, swept: SweptVariable) -> String {
    match swept {
        SweptVariable::NSwitches => row.point.n_switches.to_string(),
        _ => num(row.point.x),
    }
}

pub fn emit_report(table: &SweepTable, format: ReportFormat, unit: TimeUnit) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::EmptySweep);
    }
    Ok(match format {
        ReportFormat::Csv => csv(table, unit),
        ReportFormat::PlotData => plot_data(table, unit),
    })
}

pub fn write_report(
    table: &SweepTable,
    format: ReportFormat,
    unit: TimeUnit,
    path: impl AsRef<Path>,
) -> Result<()> {
    let text = emit_report(table, format, unit)?;
    std::fs::write(path.as_ref(), text).map_err(|source| Error::Io {
        path: path.as_ref().to_path_buf(),
        source,
    })
}

fn csv(table: &SweepTable, unit: TimeUnit) -> String {
    let spec = &table.spec;
    let metrics = layout(spec.preset);
    let analytic = spec.outputs.analytic();
    let simulate = spec.outputs.simulate();
    let with_lambda = spec.swept_variable != SweptVariable::Lambda;

    let mut header = vec![spec.swept_variable.label().to_string()];
    if with_lambda {
        header.push("lambda".into());
    }
    for m in &metrics {
        if analytic || !m.is_delay() {
            header.push(m.name(unit));
        }
    }
    if simulate {
        for m in metrics.iter().filter(|m| m.is_delay()) {
            let (mean, ci) = m.sim_names(unit);
            header.extend([mean, ci]);
        }
    }
    header.push("stable".into());

    let mut out = header.join(",");
    out.push('\n');
    for row in &table.rows {
        let mut cells = vec![swept_value(row, spec.swept_variable)];
        if with_lambda {
            cells.push(num(row.point.lambda));
        }
        let values = row.analytic();
        for m in &metrics {
            if analytic || !m.is_delay() {
                cells.push(values.map(|v| num(m.analytic(v, unit))).unwrap_or_default());
            }
        }
        if simulate {
            for m in metrics.iter().filter(|m| m.is_delay()) {
                let est = row.sim().and_then(|s| m.sim(s));
                cells.push(est.map(|e| num(e.mean * unit.scale())).unwrap_or_default());
                cells.push(est.map(|e| num(e.half_width * unit.scale())).unwrap_or_default());
            }
        }
        cells.push(row.is_stable().to_string());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn plot_data(table: &SweepTable, unit: TimeUnit) -> String {
    let spec = &table.spec;
    let metric = headline(spec.preset);
    let single = spec.swept_variable == SweptVariable::Lambda;
    let series = if single {
        vec![table.rows[0].point.lambda]
    } else {
        table.series()
    };
    let label = |name: String, lambda: f64| {
        if single {
            name
        } else {
            format!("{name}@lambda={}", num(lambda))
        }
    };

    let mut header = vec![spec.swept_variable.label().to_string()];
    for &l in &series {
        if spec.outputs.analytic() {
            header.push(label(metric.name(unit), l));
        }
        if spec.outputs.simulate() {
            let (mean, ci) = metric.sim_names(unit);
            header.push(label(mean, l));
            header.push(label(ci, l));
        }
    }

    let mut out = header.join(",");
    out.push('\n');
    let mut i = 0;
    while i < table.rows.len() {
        let x = table.rows[i].point.x;
        let group: Vec<&SweepRow> = table.rows[i..]
            .iter()
            .take_while(|r| r.point.x == x)
            .collect();
        i += group.len();

        let mut line = swept_value(group[0], spec.swept_variable);
        for &l in &series {
            let row = group.iter().find(|r| single || r.point.lambda == l);
            if spec.outputs.analytic() {
                let v = row.and_then(|r| r.analytic()).map(|v| num(metric.analytic(v, unit)));
                let _ = write!(line, ",{}", v.unwrap_or_default());
            }
            if spec.outputs.simulate() {
                let est = row.and_then(|r| r.sim()).and_then(|s| metric.sim(s));
                let mean = est.map(|e| num(e.mean * unit.scale())).unwrap_or_default();
                let ci = est.map(|e| num(e.half_width * unit.scale())).unwrap_or_default();
                let _ = write!(line, ",{mean},{ci}");
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{run_sweep, SweepSpec};

    fn table(p: Preset) -> SweepTable {
        run_sweep(&SweepSpec::preset(p).unwrap()).unwrap()
    }

    #[test]
    fn switch_sweep_header() {
        let csv = emit_report(&table(Preset::Fig5), ReportFormat::Csv, TimeUnit::Seconds).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("p,lambda,E_T_si_s,utilization,stable"));
        assert_eq!(lines.next(), Some("0,20000,0.000022727272727272726,0.3125,true"));
        assert_eq!(csv.lines().count(), 1 + 63);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn milliseconds_rename_and_scale() {
        let csv =
            emit_report(&table(Preset::Fig6), ReportFormat::Csv, TimeUnit::Milliseconds).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,lambda,E_T_c_ms,controller_utilization,stable"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "1");
        let t: f64 = first[2].parse().unwrap();
        assert!((t - 1e3 / 254000.0).abs() < 1e-15);
    }

    #[test]
    fn controller_plot_data_has_three_series() {
        let text =
            emit_report(&table(Preset::Fig6), ReportFormat::PlotData, TimeUnit::Seconds).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(
            header,
            "n,E_T_c_s@lambda=20000,E_T_c_s@lambda=25000,E_T_c_s@lambda=30000"
        );
        assert_eq!(text.lines().count(), 51);
        assert!(text.lines().skip(1).all(|l| l.split(',').count() == 4));
    }

    #[test]
    fn empty_table_is_an_error() {
        let mut t = table(Preset::Fig8);
        t.rows.clear();
        assert!(matches!(
            emit_report(&t, ReportFormat::Csv, TimeUnit::Seconds),
            Err(Error::EmptySweep)
        ));
    }

    #[test]
    fn unstable_rows_have_no_values() {
        let mut spec = SweepSpec::preset(Preset::Fig5).unwrap();
        spec.series_lambda = vec![40000.0];
        let t = run_sweep(&spec).unwrap();
        let csv = emit_report(&t, ReportFormat::Csv, TimeUnit::Seconds).unwrap();
        // u = 40000·(p/32000 + (1-p)/64000) reaches 1 at p = 0.6.
        for line in csv.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            let p: f64 = cells[0].parse().unwrap();
            if p >= 0.6 - 1e-12 {
                assert_eq!(&cells[2..], ["", "", "false"], "{line}");
            } else {
                assert_eq!(cells[4], "true");
            }
        }
        assert!(!csv.contains("NaN") && !csv.contains("inf"));
    }

    #[test]
    fn custom_layout_lists_every_delay() {
        let mut spec = SweepSpec::preset(Preset::Fig8).unwrap();
        spec.preset = Preset::Custom;
        spec.swept_variable = SweptVariable::Lambda;
        spec.range = crate::sweep::SweepRange {
            start: 10000.0,
            stop: 20000.0,
            step: 5000.0,
        };
        let t = run_sweep(&spec).unwrap();
        let csv = emit_report(&t, ReportFormat::Csv, TimeUnit::Seconds).unwrap();
        assert_eq!(
            csv.lines().next().unwrap(),
            "lambda,E_T_si_s,E_T_s_s,E_T_c_s,E_T_sum_s,utilization,controller_utilization,stable"
        );
        let plot = emit_report(&t, ReportFormat::PlotData, TimeUnit::Seconds).unwrap();
        assert_eq!(plot.lines().next().unwrap(), "lambda,E_T_sum_s");
    }

    #[test]
    fn format_names_parse() {
        assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert_eq!("plot-data".parse::<ReportFormat>().unwrap(), ReportFormat::PlotData);
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
