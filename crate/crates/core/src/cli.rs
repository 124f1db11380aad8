//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 integration
//! diverged (partial output is still written), 3 non-convergence or step limit.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::analysis::{find_equilibria, sweep, Axis, AnalysisError, Region, SweepMap};
use crate::calibration::{fit, FitSpec, FreeParam, X0Policy};
use crate::integrator::{integrate, Method, Status};
use crate::io::report::{check_report, equilibria_json, equilibria_text, fit_json};
use crate::io::svg::{sweep_svg, trajectory_svg};
use crate::io::{
    fmt_num,    parse_scenario, read_observations, serialize_scenario, thin, write_sweep_csv, write_trajectory_csv, Preset,
    MAX_ROWS,
};
use crate::model::{ParamName, RatePolicy};
use crate::scenario::Scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "borrower-dynamics", version, about = "Solvent/insolvent borrower dynamics: simulate, analyse, calibrate")]
struct Cli {
    /// Allow exit rates mu1, mu2 above 1
    #[arg(long, global = true)]
    unchecked_rates: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a scenario file and write trajectory.csv
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write trajectory.svg
        #[arg(long)]
        svg: bool,
        /// Use a fixed RK4 step of (t1 - t0) / n
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Locate and classify equilibria
    Equilibria {
        #[arg(long)]
        scenario: PathBuf,
        /// Directory for equilibria.json
        #[arg(long)]
        out: Option<PathBuf>,
        /// Newton seeds per axis
        #[arg(long, default_value_t = 21)]
        grid: usize,
    },
    /// Map long-run outcomes over two parameters
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// name:lo:hi:count
        #[arg(long)]
        axis1: Axis,
        #[arg(long)]
        axis2: Axis,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
    /// Fit free parameters to observations
    Calibrate {
        #[arg(long)]
        scenario: PathBuf,
        /// CSV with columns t,s,i[,w]
        #[arg(long)]
        observations: PathBuf,
        /// Comma-separated parameter names to estimate
        #[arg(long, value_delimiter = ',', required = true)]
        free: Vec<ParamName>,
        /// name=value overrides for fixed parameters
        #[arg(long, value_delimiter = ',')]
        frozen: Vec<String>,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        /// Estimate the initial state too
        #[arg(long)]
        free_x0: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in scenario (D runs its sweep)
    Scenario {
        preset: Preset,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Print the consistency report
    Check,
}

struct Failure(i32, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_USAGE, e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let policy = if cli.unchecked_rates {
        RatePolicy::Unchecked
    } else {
        RatePolicy::Strict
    };
    match dispatch(cli.command, policy, stdout, stderr) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

fn dispatch(cmd: Command, policy: RatePolicy, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Simulate {
            scenario,
            out,
            svg,
            steps,
        } => {
            let sc = with_steps(load(&scenario, policy)?, steps)?;
            simulate(&sc, &out, svg, stdout, stderr)
        }
        Command::Equilibria { scenario, out, grid } => {
            let sc = load(&scenario, policy)?;
            let eqs = match find_equilibria(&sc.params, &Region::default(), grid) {
                Ok(eqs) => eqs,
                Err(e @ AnalysisError::NonConvergence) => return Err(Failure(EXIT_NO_CONVERGENCE, e.to_string())),
                Err(e) => return Err(e.into()),
            };
            stdout.write_all(equilibria_text(&sc, &eqs).as_bytes())?;
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("equilibria.json"), equilibria_json(&sc, &eqs))?;
            }
            Ok(EXIT_OK)
        }
        Command::Sweep {
            scenario,
            axis1,
            axis2,
            out,
            svg,
        } => {
            let sc = load(&scenario, policy)?;
            let map = sweep(&sc, &axis1, &axis2)?;
            write_sweep(&map, &out, svg, stdout)
        }
        Command::Calibrate {
            scenario,
            observations,
            free,
            frozen,
            budget,
            free_x0,
            out,
        } => {
            let sc = load(&scenario, policy)?;
            calibrate(&sc, &observations, &free, &frozen, budget, free_x0, &out, stdout)
        }
        Command::Scenario { preset, out, svg, steps } => {
            let sc = with_steps(preset.scenario(), steps)?;
            match preset.sweep_axes() {
                Some((a1, a2)) => {
                    fs::create_dir_all(&out)?;
                    fs::write(out.join("scenario.json"), serialize_scenario(&sc))?;
                    let map = sweep(&sc, &a1, &a2)?;
                    write_sweep(&map, &out, svg, stdout)
                }
                None => simulate(&sc, &out, svg, stdout, stderr),
            }
        }
        Command::Check => {
            stdout.write_all(check_report().as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

fn load(path: &Path, policy: RatePolicy) -> Result<Scenario, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    parse_scenario(&bytes, policy).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn with_steps(sc: Scenario, steps: Option<u64>) -> Result<Scenario, Failure> {
    let Some(n) = steps else { return Ok(sc) };
    if n == 0 {
        return Err(Failure(EXIT_USAGE, "--steps must be positive".into()));
    }
    let mut solver = sc.solver;
    solver.method = Method::Rk4Fixed;
    solver.step = (sc.t1 - sc.t0) / n as f64;
    solver.max_step_count = solver.max_step_count.max(n);
    Ok(sc.with_solver(solver))
}

fn simulate(sc: &Scenario, out: &Path, svg: bool, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let traj = integrate(&sc.params, sc.x0, sc.t0, sc.t1, &sc.solver)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("scenario.json"), serialize_scenario(sc))?;
    let rows = thin(&traj.samples, MAX_ROWS);
    let mut csv = Vec::new();
    write_trajectory_csv(&mut csv, &sc.params, &rows)?;
    fs::write(out.join("trajectory.csv"), csv)?;
    if svg {
        let title = if sc.label.is_empty() { "trajectory" } else { sc.label.as_str() };
        fs::write(out.join("trajectory.svg"), trajectory_svg(&rows, title))?;
    }
    let last = traj.last();
    writeln!(
        stdout,
        "{}: t={} s={} i={} ({} samples, {} written)",
        traj.status.as_str(),
        fmt_num(last.t),
        fmt_num(last.state.s),
        fmt_num(last.state.i),
        traj.samples.len(),
        rows.len()
    )?;
    for ev in &traj.events {
        writeln!(stdout, "event {:?} at t={}", ev.kind, fmt_num(ev.t))?;
    }
    Ok(match traj.status {
        Status::Completed => EXIT_OK,
        Status::Diverged => {
            writeln!(stderr, "integration diverged at t={}", fmt_num(last.t))?;
            let p = &sc.params;
            if p.mu1() == p.mu2() && p.k() > p.mu1() {
                writeln!(
                    stderr,
                    "note: with mu1 = mu2 = {} the total obeys d(S+I)/dt = (k - mu)(S+I) = {}(S+I) exactly, so S+I grows as e^({}t) for any beta1, beta2",
                    p.mu1(),
                    p.k() - p.mu1(),
                    p.k() - p.mu1()
                )?;
            }
            EXIT_DIVERGED
        }
        Status::StepLimit => {
            writeln!(stderr, "step limit reached at t={}", fmt_num(last.t))?;
            EXIT_NO_CONVERGENCE
        }
    })
}

fn write_sweep(map: &SweepMap, out: &Path, svg: bool, stdout: &mut dyn Write) -> CmdResult {
    fs::create_dir_all(out)?;
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, map)?;
    fs::write(out.join("sweep.csv"), csv)?;
    if svg {
        let title = format!("outcomes over {} and {}", map.axis1.param, map.axis2.param);
        fs::write(out.join("sweep.svg"), sweep_svg(map, &title))?;
    }
    for tag in crate::analysis::OutcomeTag::ALL {
        let n = map.count(tag);
        if n > 0 {
            writeln!(stdout, "{tag}: {n}")?;
        }
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn calibrate(
    sc: &Scenario,
    observations: &Path,
    free: &[ParamName],
    frozen: &[String],
    budget: usize,
    free_x0: bool,
    out: &Path,
    stdout: &mut dyn Write,
) -> CmdResult {
    let mut template = sc.params;
    for item in frozen {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Failure(EXIT_USAGE, format!("--frozen expects name=value, got `{item}`")))?;
        let name: ParamName = name.trim().parse()?;
        if free.contains(&name) {
            return Err(Failure(EXIT_USAGE, format!("{name} is both free and frozen")));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| Failure(EXIT_USAGE, format!("--frozen {name}: {e}")))?;
        template = template.with(name, value)?;
    }
    let file = fs::File::open(observations)
        .map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", observations.display())))?;
    let obs = read_observations(file).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", observations.display())))?;
    let free_params: Vec<FreeParam> = free
        .iter()
        .map(|&name| FreeParam::full_range(name, template.get(name)))
        .collect();
    let policy = if free_x0 { X0Policy::Free } else { X0Policy::FirstObservation };
    let spec = FitSpec::new(template, free_params, policy)?;
    let result = fit(&spec, &obs, &sc.solver, budget).map_err(|e| match e {
        crate::calibration::FitError::AllDiverged => Failure(EXIT_NO_CONVERGENCE, e.to_string()),
        e => Failure(EXIT_USAGE, e.to_string()),
    })?;
    fs::create_dir_all(out)?;
    fs::write(out.join("fit.json"), fit_json(sc, free, &result))?;
    for name in free {
        writeln!(stdout, "{name} = {}", result.params.get(*name))?;
    }
    writeln!(
        stdout,
        "residual {} after {} evaluations ({})",
        result.residual,
        result.evaluations,
        if result.converged { "converged" } else { "budget exhausted" }
    )?;
    Ok(if result.converged { EXIT_OK } else { EXIT_NO_CONVERGENCE })
}
