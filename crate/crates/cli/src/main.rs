use std::fs::{self, File};
use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use evplatoon::energy::compare_models;
use evplatoon::scenario_file::{dump_scenario, load_scenario};
use evplatoon::sim::{equilibrium, sweep_kappa, SweepOptions};
use evplatoon::verify::{self, DEFAULT_SEED, DEFAULT_TRIALS};
use evplatoon::{integrate_platoon, Error, FollowerModel, Scenario, Trajectory};

mod plot;

use plot::Figure;

const EXIT_SIMULATION: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_PROPERTY: u8 = 3;

const SHOWN_EVENTS: usize = 5;

/// Energy-aware car-following simulator for electric vehicle platoons.
#[derive(Debug, Parser)]
#[command(name = "evplatoon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one scenario and write its trajectory.
    Run {
        #[command(flatten)]
        input: ScenarioArgs,
        /// Write SVG phase portraits and time series.
        #[arg(long)]
        plot: bool,
        /// Keep every N-th sample in trajectory.csv (the last one is always kept).
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        every: u64,
    },
    /// Run the baseline and proposed models on the same scenario and compare energy.
    Compare {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Sweep the energy weight kappa.
    Sweep {
        #[command(flatten)]
        input: ScenarioArgs,
        /// Comma-separated kappa values, e.g. 0,0.01,0.03.
        #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
        kappa: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Run the property suite.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Built-in name (fig1a, fig1b, table1) or path to a scenario file.
    scenario: String,
    /// Override the integration step.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Print the resolved scenario as a scenario file and exit.
    #[arg(long)]
    dump_scenario: bool,
}

impl ScenarioArgs {
    fn load(&self) -> anyhow::Result<Scenario> {
        let sc = load_scenario(&self.scenario)?;
        let sc = match self.dt {
            Some(dt) => sc.with_dt(dt),
            None => sc,
        };
        sc.validate()?;
        Ok(sc)
    }
}

#[derive(Debug, Clone, Copy)]
struct Style {
    on: bool,
}

impl Style {
    fn new(tty: bool) -> Self {
        Self {
            on: tty && std::env::var_os("EVPLATOON_NO_COLOR").is_none(),
        }
    }

    fn paint(self, code: &str, s: &str) -> String {
        if self.on {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }

    fn pass(self, s: &str) -> String {
        self.paint("32", s)
    }

    fn fail(self, s: &str) -> String {
        self.paint("1;31", s)
    }

    fn dim(self, s: &str) -> String {
        self.paint("2", s)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = Style::new(io::stdout().is_terminal());
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let err = Style::new(io::stderr().is_terminal());
            eprintln!("{} {e:#}", err.fail("error:"));
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Input and validation problems map to 2, everything else to 1.
fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(err) = e.downcast_ref::<Error>() {
        return match err.root() {
            Error::Invalid(_)
            | Error::InvalidParams(_)
            | Error::Parse { .. }
            | Error::NonFinite { .. }
            | Error::OutOfDomain { .. } => EXIT_INPUT,
            _ => EXIT_SIMULATION,
        };
    }
    if e.downcast_ref::<io::Error>().is_some() {
        return EXIT_INPUT;
    }
    EXIT_SIMULATION
}

fn dispatch(command: Command, style: Style) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run { input, plot, every } => {
            let sc = input.load()?;
            if input.dump_scenario {
                return dump(&sc);
            }
            cmd_run(&input, &sc, plot, every as usize, style)
        }
        Command::Compare { input, jobs } => {
            let sc = input.load()?;
            if input.dump_scenario {
                return dump(&sc);
            }
            cmd_compare(&input, &sc, jobs, style)
        }
        Command::Sweep { input, kappa, jobs } => {
            let sc = input.load()?;
            if input.dump_scenario {
                return dump(&sc);
            }
            cmd_sweep(&input, &sc, &kappa, jobs, style)
        }
        Command::Verify { seed, trials, jobs } => cmd_verify(seed, trials, jobs, style),
    }
}

fn dump(sc: &Scenario) -> anyhow::Result<ExitCode> {
    print!("{}", dump_scenario(sc)?);
    Ok(ExitCode::SUCCESS)
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn prepare_out(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn notes(input: &ScenarioArgs) -> Vec<&'static str> {
    let mut notes = vec!["follower velocities are not clamped to [0, v_max]; excursions are logged as events"];
    if input.scenario == "table1" && !Path::new(&input.scenario).exists() {
        notes.push("alpha = 2, beta = 3, kappa = 0.03 are assumed for the platoon run (taken from the single-follower setup)");
    }
    notes
}

fn metadata(input: &ScenarioArgs, sc: &Scenario, command: &str) -> serde_json::Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": input.scenario,
        "params": sc.params,
        "models": sc.models.iter().map(|m| m.label()).collect::<Vec<_>>(),
        "t0": sc.t0,
        "tf": sc.tf,
        "dt": sc.dt,
        "eta": sc.eta,
        "battery": sc.battery.is_some(),
        "velocity_clamped": false,
        "notes": notes(input),
    })
}

fn write_json(dir: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut w = create(dir, "metadata.json")?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_run(input: &ScenarioArgs, sc: &Scenario, plot: bool, every: usize, style: Style) -> anyhow::Result<ExitCode> {
    let traj = integrate_platoon(sc)?;
    let dir = &input.out;
    prepare_out(dir)?;

    let mut w = create(dir, "trajectory.csv")?;
    traj.write_csv(&mut w, every)?;
    w.flush()?;
    let mut w = create(dir, "events.log")?;
    traj.write_events(&mut w)?;
    w.flush()?;

    let omegas = traj.follower_omegas(sc.eta)?;
    let mut meta = metadata(input, sc, "run");
    meta["samples"] = json!(traj.len());
    meta["events"] = json!(traj.events.len());
    meta["omega"] = json!(omegas);
    write_json(dir, &meta)?;

    if plot {
        write_plots(dir, &traj)?;
    }

    println!(
        "{} vehicles, t in [{}, {}], {} samples, {} events",
        traj.vehicles.len(),
        sc.t0,
        sc.tf,
        traj.len(),
        traj.events.len()
    );
    for (n, w) in omegas.iter().enumerate() {
        println!("  vehicle {}: omega = {w:.6}", n + 1);
    }
    for e in traj.events.iter().take(SHOWN_EVENTS) {
        println!("  {} {e}", style.fail("event:"));
    }
    if traj.events.len() > SHOWN_EVENTS {
        println!("  ... {} more in events.log", traj.events.len() - SHOWN_EVENTS);
    }
    println!("{}", style.dim(&format!("wrote {}", dir.display())));
    Ok(ExitCode::SUCCESS)
}

fn write_plots(dir: &Path, traj: &Trajectory) -> anyhow::Result<()> {
    let v_bar = traj.vehicles[0].velocity.last().copied().unwrap_or(f64::NAN);
    // The equilibrium is only defined when the lead ends inside V's range.
    let z_eq = equilibrium(v_bar).ok().map(|(z, _)| z);
    let t = &traj.times;

    for n in 1..=traj.followers() {
        let z: Vec<f64> = (0..traj.len()).map(|k| traj.spacing(n, k)).collect();
        let y: Vec<f64> = (0..traj.len()).map(|k| traj.relative_velocity(n, k)).collect();
        let mut fig = Figure::new(format!("Vehicle {n}: phase portrait"), "spacing", "relative velocity")
            .line(format!("vehicle {n}"), &z, &y)
            .hline(0.0)
            .dot(z[0], y[0]);
        if let Some(z_eq) = z_eq {
            fig = fig.vline(z_eq).cross(z_eq, 0.0);
        }
        fs::write(dir.join(format!("phase_{n}.svg")), fig.to_svg())?;
    }

    let mut spacing = Figure::new("Spacing", "t", "spacing");
    for n in 1..=traj.followers() {
        let z: Vec<f64> = (0..traj.len()).map(|k| traj.spacing(n, k)).collect();
        spacing = spacing.line(format!("vehicle {n}"), t, &z);
    }
    if let Some(z_eq) = z_eq {
        spacing = spacing.hline(z_eq);
    }
    fs::write(dir.join("spacing.svg"), spacing.to_svg())?;

    let mut velocity = Figure::new("Velocity", "t", "velocity");
    for (n, veh) in traj.vehicles.iter().enumerate() {
        velocity = velocity.line(format!("vehicle {n}"), t, &veh.velocity);
    }
    if v_bar.is_finite() {
        velocity = velocity.hline(v_bar);
    }
    fs::write(dir.join("velocity.svg"), velocity.to_svg())?;
    Ok(())
}

fn cmd_compare(input: &ScenarioArgs, sc: &Scenario, jobs: usize, style: Style) -> anyhow::Result<ExitCode> {
    let table = compare_models(sc, &[FollowerModel::Ovfl, FollowerModel::Proposed], jobs)?;
    let dir = &input.out;
    prepare_out(dir)?;
    let mut w = create(dir, "comparison.csv")?;
    table.write_csv(&mut w)?;
    w.flush()?;
    write_json(dir, &metadata(input, sc, "compare"))?;

    println!("{:>7}  {:>12}  {:>12}  {:>9}", "vehicle", "ovfl", "proposed", "% change");
    for n in 1..=sc.followers() {
        let o = table.omega(n, FollowerModel::Ovfl).unwrap_or(f64::NAN);
        let p = table.omega(n, FollowerModel::Proposed).unwrap_or(f64::NAN);
        let pct = table.pct_change(n, FollowerModel::Proposed).unwrap_or(f64::NAN);
        let pct = format!("{pct:>9.3}");
        let pct = if pct.trim_start().starts_with('-') { style.pass(&pct) } else { style.fail(&pct) };
        println!("{n:>7}  {o:>12.6}  {p:>12.6}  {pct}");
    }
    for note in notes(input).iter().skip(1) {
        println!("{}", style.dim(&format!("note: {note}")));
    }
    println!("{}", style.dim(&format!("wrote {}", dir.display())));
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(input: &ScenarioArgs, sc: &Scenario, kappas: &[f64], jobs: usize, style: Style) -> anyhow::Result<ExitCode> {
    if kappas.is_empty() {
        bail!(Error::Invalid("empty kappa list".into()));
    }
    let opts = SweepOptions {
        jobs,
        ..SweepOptions::default()
    };
    let table = sweep_kappa(sc, kappas, opts)?;
    let dir = &input.out;
    prepare_out(dir)?;
    let mut w = create(dir, "sweep.csv")?;
    table.write_csv(&mut w)?;
    w.flush()?;
    let mut meta = metadata(input, sc, "sweep");
    meta["kappa"] = json!(kappas);
    write_json(dir, &meta)?;

    for row in table.rows() {
        let ct = row.convergence_time.map_or("-".to_string(), |t| format!("{t:.3}"));
        let stall = if row.stall { style.fail("stall") } else { String::new() };
        println!(
            "kappa {:<8} vehicle {}  omega {:.6}  converged at {ct} {stall}",
            row.kappa, row.vehicle, row.omega
        );
    }
    let mut failed = false;
    for (k, e) in table.errors() {
        failed = true;
        eprintln!("{} kappa {k}: {e}", style.fail("failed:"));
    }
    println!("{}", style.dim(&format!("wrote {}", dir.display())));
    Ok(if failed {
        ExitCode::from(EXIT_SIMULATION)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_verify(seed: u64, trials: usize, jobs: usize, style: Style) -> anyhow::Result<ExitCode> {
    let outcomes = verify::run_all(seed, trials, jobs)?;
    let mut all = true;
    for o in &outcomes {
        let tag = if o.passed { style.pass("PASS") } else { style.fail("FAIL") };
        println!("{tag} {}: {}", o.name, o.summary);
        for c in &o.counterexamples {
            println!("    {c}");
        }
        all &= o.passed;
    }
    Ok(if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PROPERTY)
    })
}
