use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ofdelay::report::{emit_report, write_report, ReportFormat, TimeUnit};
use ofdelay::scenario::{parse_scenario_file, sweep_to_string, ScenarioFile};
use ofdelay::sweep::{run_sweep, Outputs, Preset, SweepSpec};
use ofdelay::{analyze_scenario, Error, NetworkScenario, SimVariant};

/// Packet delay of OpenFlow switches and controllers from queueing models.
#[derive(Parser)]
#[command(name = "ofdelay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every queue of a scenario file (or run a sweep file).
    Analyze {
        file: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Check a scenario or sweep file without solving it.
    Validate { file: PathBuf },
    /// Run a parameter sweep and print it.
    Sweep {
        #[command(flatten)]
        source: SweepArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep and write it to a file.
    Emit {
        #[command(flatten)]
        source: SweepArgs,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a built-in preset as a sweep file.
    ShowPreset {
        #[arg(value_enum)]
        preset: PresetArg,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Built-in sweep.
    #[arg(long, value_enum, conflicts_with = "spec", required_unless_present = "spec")]
    preset: Option<PresetArg>,
    /// Sweep file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Add simulated means and confidence intervals.
    #[arg(long)]
    simulate: bool,
    /// Packets per switch for each simulated point.
    #[arg(long)]
    packets: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Report delays in milliseconds.
    #[arg(long)]
    ms: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Fig5,
    Fig6,
    Fig8,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Fig5 => Preset::Fig5,
            PresetArg::Fig6 => Preset::Fig6,
            PresetArg::Fig8 => Preset::Fig8,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    PlotData,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::PlotData => ReportFormat::PlotData,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Additive,
    Feedback,
}

impl From<VariantArg> for SimVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Additive => SimVariant::Additive,
            VariantArg::Feedback => SimVariant::Feedback,
        }
    }
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Validation(_)
        | Error::InvalidParameter { .. }
        | Error::UnstableSwitch { .. }
        | Error::UnstableController { .. }
        | Error::IndexOutOfRange { .. } => EXIT_VALIDATION,
        _ => EXIT_IO,
    }
}

impl SweepArgs {
    fn spec(&self) -> Result<SweepSpec, Error> {
        let mut spec = match (&self.preset, &self.spec) {
            (Some(p), _) => SweepSpec::preset((*p).into()).expect("built-in preset"),
            (None, Some(path)) => match parse_scenario_file(path)? {
                ScenarioFile::Sweep(spec) => spec,
                ScenarioFile::Scenario(_) => {
                    return Err(Error::Config(format!(
                        "{} holds a scenario, not a sweep",
                        path.display()
                    )))
                }
            },
            (None, None) => unreachable!("clap requires --preset or --spec"),
        };
        if self.simulate {
            spec.outputs = Outputs::Both;
        }
        if let Some(n) = self.packets {
            spec.sim_packets = n;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(v) = self.variant {
            spec.variant = v.into();
        }
        Ok(spec)
    }

    fn unit(&self) -> TimeUnit {
        if self.ms {
            TimeUnit::Milliseconds
        } else {
            TimeUnit::Seconds
        }
    }
}

fn print_report(scenario: &NetworkScenario, json: bool) -> Result<(), Error> {
    let report = analyze_scenario(scenario)?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
        return Ok(());
    }
    println!("switch  lambda      rho     util      E[N_i]        E[T_si] s       E[T_sum] s");
    for (i, (sw, m)) in scenario.switches.iter().zip(&report.per_switch).enumerate() {
        println!(
            "{i:<7} {:<11} {:<7} {:<9.6} {:<13.6} {:<15.6e} {:.6e}",
            sw.lambda,
            sw.service.p_packet_in,
            m.utilization,
            m.mean_queue_len,
            m.mean_sojourn_s,
            report.per_switch_total[i]
        );
    }
    println!();
    println!("controller  lambda_c = {}  util = {:.6}", report.lambda_c, report.controller.utilization);
    println!("            E[N_c] = {:.6}", report.controller.mean_queue_len);
    println!("            E[T_c] = {:.6e} s", report.controller.mean_sojourn_s);
    println!("weighted switch delay E[T_s] = {:.6e} s", report.weighted_switch_delay);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze { file, json } => match parse_scenario_file(&file)? {
            ScenarioFile::Scenario(s) => print_report(&s, json),
            ScenarioFile::Sweep(spec) => {
                let table = run_sweep(&spec)?;
                print!("{}", emit_report(&table, ReportFormat::Csv, TimeUnit::Seconds)?);
                Ok(())
            }
        },
        Command::Validate { file } => {
            match parse_scenario_file(&file)? {
                ScenarioFile::Scenario(s) => println!("ok: scenario with {} switch(es)", s.len()),
                ScenarioFile::Sweep(spec) => {
                    println!("ok: {} sweep with {} point(s)", spec.preset, spec.points().len())
                }
            }
            Ok(())
        }
        Command::Sweep {
            source,
            format,
            out,
        } => {
            let table = run_sweep(&source.spec()?)?;
            match out {
                Some(path) => write_report(&table, format.into(), source.unit(), path),
                None => {
                    print!("{}", emit_report(&table, format.into(), source.unit())?);
                    Ok(())
                }
            }
        }
        Command::Emit {
            source,
            format,
            out,
        } => {
            let table = run_sweep(&source.spec()?)?;
            write_report(&table, format.into(), source.unit(), out)
        }
        Command::ShowPreset { preset } => {
            let spec = SweepSpec::preset(preset.into()).expect("built-in preset");
            print!("{}", sweep_to_string(&spec));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
