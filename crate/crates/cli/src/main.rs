//! `coopmitl`: the command-line front end for cooperative transport missions.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coopmitl::control::EnvelopeMode;
use coopmitl::executive::{execute_plan, verify_trace, Report, Scenario, Setup, Trace};
use coopmitl::planner::{find_accepting_run, fragment_violation, Plan};

#[derive(Parser)]
#[command(
    name = "coopmitl",
    version,
    about = "Timed mission planning and execution for cooperative object transport"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a timed run satisfying the scenario formula.
    Plan {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Write the plan here instead of stdout.
        #[arg(long, value_name = "PATH")]
        plan: Option<PathBuf>,
    },
    /// Execute a plan and write the trace.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_name = "PATH")]
        plan: PathBuf,
        #[arg(long, value_name = "PATH")]
        trace: PathBuf,
    },
    /// Check a trace against its plan, the partition and the formula.
    Verify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_name = "PATH")]
        plan: PathBuf,
        #[arg(long, value_name = "PATH")]
        trace: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Plan, simulate and verify, writing plan.json, trace.csv and report.json.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Parse a formula and report whether it can be planned for.
    Check { formula: String },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file; the built-in transport scenario when omitted.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Replace the scenario formula.
    #[arg(long, value_name = "TEXT")]
    formula: Option<String>,
    /// Integration step in seconds.
    #[arg(long, value_name = "S")]
    dt: Option<f64>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Use the per-axis position bound l0 instead of l0/sqrt(3).
    #[arg(long)]
    paper_faithful_envelopes: bool,
}

enum Failure {
    Violation(String),
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

impl ScenarioArgs {
    fn setup(&self) -> Result<Setup, Failure> {
        let mut sc = match &self.scenario {
            Some(path) => Scenario::load(path).map_err(usage)?,
            None => Scenario::transport(),
        };
        if let Some(f) = &self.formula {
            sc.formula = f.clone();
        }
        if let Some(dt) = self.dt {
            sc.dt = dt;
        }
        if let Some(seed) = self.seed {
            sc.seed = seed;
        }
        if self.paper_faithful_envelopes {
            sc.control.envelope_mode = EnvelopeMode::PerAxis;
        }
        Setup::new(sc).map_err(usage)
    }
}

fn plan_for(setup: &Setup) -> Result<Plan, Failure> {
    match find_accepting_run(&setup.wts, &setup.formula, setup.initial_region) {
        Ok(Some(plan)) => Ok(plan),
        Ok(None) => Err(Failure::Violation(format!(
            "no accepting run for `{}` from region {}",
            setup.formula, setup.initial_region.0
        ))),
        Err(e) => Err(usage(e)),
    }
}

fn simulate(setup: &Setup, plan: &Plan) -> Result<Trace, Failure> {
    execute_plan(setup, plan).map_err(|e| Failure::Violation(format!("execution aborted: {e}")))
}

fn read_plan(path: &Path) -> Result<Plan, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Plan::from_json(&text).map_err(|e| io_error(path, e))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn write_trace(path: &Path, trace: &Trace) -> Outcome {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    trace
        .write_csv(BufWriter::new(file))
        .map_err(|e| io_error(path, e))
}

fn read_trace(path: &Path) -> Result<Trace, Failure> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    Trace::read_csv(BufReader::new(file)).map_err(|e| io_error(path, e))
}

fn judge(report: &Report) -> Outcome {
    if report.ok {
        return Ok(());
    }
    let mut reasons = Vec::new();
    if !report.complete {
        reasons.push("trace does not cover the plan".to_string());
    }
    if !report.satisfied {
        reasons.push("observed run violates the formula".to_string());
    }
    for (count, what) in [
        (report.fidelity_errors.len(), "late region entries"),
        (report.containment_violation_count, "containment violations"),
        (report.tube_violation_count, "tube violations"),
        (report.envelope_violation_count, "envelope violations"),
        (report.non_finite_rows, "non-finite rows"),
    ] {
        if count > 0 {
            reasons.push(format!("{count} {what}"));
        }
    }
    if report.saturated {
        reasons.push(format!(
            "control norm {:.3e} above {:.3e}",
            report.max_control_norm, report.saturation_threshold
        ));
    }
    Err(Failure::Violation(reasons.join("; ")))
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Plan { scenario, plan } => {
            let setup = scenario.setup()?;
            let found = plan_for(&setup)?;
            match plan {
                Some(path) => write_text(&path, &found.to_json()),
                None => {
                    println!("{}", found.to_json());
                    Ok(())
                }
            }
        }
        Command::Simulate {
            scenario,
            plan,
            trace,
        } => {
            let setup = scenario.setup()?;
            let p = read_plan(&plan)?;
            write_trace(&trace, &simulate(&setup, &p)?)
        }
        Command::Verify {
            scenario,
            plan,
            trace,
            report,
        } => {
            let setup = scenario.setup()?;
            let p = read_plan(&plan)?;
            let r = verify_trace(&read_trace(&trace)?, &p, &setup);
            match report {
                Some(path) => write_text(&path, &r.to_json())?,
                None => println!("{}", r.to_json()),
            }
            judge(&r)
        }
        Command::Run { scenario, out } => {
            let setup = scenario.setup()?;
            fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
            let plan = plan_for(&setup)?;
            write_text(&out.join("plan.json"), &plan.to_json())?;
            let trace = simulate(&setup, &plan)?;
            write_trace(&out.join("trace.csv"), &trace)?;
            let report = verify_trace(&trace, &plan, &setup);
            write_text(&out.join("report.json"), &report.to_json())?;
            eprintln!(
                "{} steps over {} s, report in {}",
                trace.rows.len(),
                trace.end_time().unwrap_or(0.0),
                out.join("report.json").display()
            );
            judge(&report)
        }
        Command::Check { formula } => {
            let phi = mitl::parse(&formula).map_err(usage)?;
            println!("formula: {phi}");
            match fragment_violation(&phi) {
                None => println!("plannable: yes"),
                Some(why) => println!("plannable: no ({why})"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
