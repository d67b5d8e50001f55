use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gossipsub_model::attacks::scenario::{run_scenario, Scenario};
use gossipsub_model::attacks::{establish_gadget, multi_schedule};
use gossipsub_model::engine::drive;
use gossipsub_model::event::parse_events;
use gossipsub_model::propcheck::{format_report, search_counterexamples, shrink, Property, ReportHeader};
use gossipsub_model::topology::{build_network, load_topology};
use gossipsub_model::trace::{Probe, TraceLevel, TraceWriter};
use gossipsub_model::{Event, Network, PeerId, Profile, RunBudget, ScoringConfig, TopicId};

/// Exit codes.
const UNEXPECTED: u8 = 1;
const BAD_INPUT: u8 = 2;
const BAD_EVENTS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gossipsub-sim",
    version,
    about = "Simulate GossipSub peer scoring, check score properties and run score attacks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run events through a network and write the trace.
    Simulate(SimulateArgs),
    /// Search for counterexamples to a score property.
    CheckProps(CheckArgs),
    /// Run an attack scenario and report the verdict.
    Attack(AttackArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Built-in profile name (eth2, filecoin).
    #[arg(long, conflicts_with = "config")]
    profile: Option<String>,
    /// Scoring config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, required_unless_present = "scenario")]
    topology: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Event script, one event per line.
    #[arg(long, required_unless_present = "scenario", conflicts_with = "scenario")]
    events: Option<PathBuf>,
    /// Attack scenario supplying topology, config and events.
    #[arg(long, conflicts_with_all = ["topology", "profile", "config"])]
    scenario: Option<PathBuf>,
    #[arg(long)]
    max_events: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// full, digest or violations. Defaults to full, or to the scenario's level.
    #[arg(long)]
    trace_level: Option<TraceLevel>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Victim whose heartbeats the violations level reports.
    #[arg(long, requires = "attacker")]
    victim: Option<PeerId>,
    #[arg(long, requires = "victim")]
    attacker: Option<PeerId>,
    #[arg(long, value_delimiter = ',')]
    attacked: Vec<TopicId>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// prop1, prop2, prop3, prop4 or maxbound.
    #[arg(long)]
    property: Property,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minimize each counterexample before reporting it.
    #[arg(long)]
    shrink: bool,
    /// Override the expected outcome: `found` or `none`.
    #[arg(long)]
    expect: Option<Expectation>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Expectation {
    Found,
    None,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario's round count.
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, e: impl Display) -> Failure {
    Failure {
        code,
        message: e.to_string(),
    }
}

fn bad_input(e: impl Display) -> Failure {
    fail(BAD_INPUT, e)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| bad_input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_config(args: &ConfigArgs) -> Result<(String, ScoringConfig), Failure> {
    match (&args.profile, &args.config) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| bad_input(format!("{}: {e}", path.display())))?;
            let p = Profile::from_toml(path.display().to_string(), &text).map_err(bad_input)?;
            Ok((p.name, p.cfg))
        }
        (name, None) => {
            let p = Profile::builtin(name.as_deref().unwrap_or("eth2")).map_err(bad_input)?;
            Ok((p.name, p.cfg))
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let (net, events, cfg, level, probe, max_events): (
        Network,
        Vec<Event>,
        ScoringConfig,
        TraceLevel,
        Option<Probe>,
        Option<usize>,
    ) = if let Some(path) = &a.scenario {
        let sc = Scenario::load(path).map_err(bad_input)?;
        let start = sc.start_network().map_err(bad_input)?;
        let gadgets = sc.resolve_gadgets(&start).map_err(bad_input)?;
        let mut net = start;
        for g in &gadgets {
            net = establish_gadget(net, g, &sc.cfg).map_err(bad_input)?;
        }
        let e = sc.cfg.global().map_err(bad_input)?.params.hbm_interval.clone();
        let events = multi_schedule(&net, &gadgets, sc.m, sc.n, &e, sc.rounds, &sc.options);
        let probe = gadgets.first().map(|g| Probe {
            victim: g.victim.clone(),
            attacker: g.attacker.clone(),
            attacked: g.attacked_list(),
        });
        let max = (sc.max_events != usize::MAX).then_some(sc.max_events);
        (
            net,
            events,
            sc.cfg,
            a.trace_level.unwrap_or(sc.trace_level),
            probe,
            a.max_events.or(max),
        )
    } else {
        let (_, cfg) = load_config(&a.cfg)?;
        let topo = load_topology(a.topology.as_deref().expect("required by clap")).map_err(bad_input)?;
        let net = build_network(&topo, &cfg, a.seed).map_err(bad_input)?;
        let path = a.events.as_deref().expect("required by clap");
        let text = std::fs::read_to_string(path).map_err(|e| bad_input(format!("{}: {e}", path.display())))?;
        let events = parse_events(&text).map_err(|e| fail(BAD_EVENTS, format!("{}: {e}", path.display())))?;
        let probe = match (&a.victim, &a.attacker) {
            (Some(v), Some(at)) => Some(Probe {
                victim: v.clone(),
                attacker: at.clone(),
                attacked: a.attacked.clone(),
            }),
            _ => None,
        };
        (net, events, cfg, a.trace_level.unwrap_or_default(), probe, a.max_events)
    };

    let budget = RunBudget::new(max_events.unwrap_or(usize::MAX), a.seed);
    let out = open_out(a.out.as_deref())?;
    let mut writer = TraceWriter::new(out, level, probe.as_ref(), &cfg).map_err(bad_input)?;
    let mut processed = 0usize;
    drive(net, &events, &budget, &cfg, |ev, n| {
        processed += 1;
        writer.observe(ev, n);
    })
    .map_err(bad_input)?;
    let lines = writer.finish().map_err(bad_input)?;
    eprintln!("processed {processed} events, wrote {lines} trace lines ({level})");
    Ok(())
}

fn check_props(a: CheckArgs) -> Result<(), Failure> {
    let (profile, cfg) = load_config(&a.cfg)?;
    if a.trials == 0 {
        return Err(bad_input("--trials must be at least 1"));
    }
    let mut found = search_counterexamples(a.property, &cfg, a.trials, a.seed).map_err(bad_input)?;
    if a.shrink {
        found = found
            .iter()
            .map(|cx| shrink(cx, &cfg))
            .collect::<Result<_, _>>()
            .map_err(bad_input)?;
    }
    let header = ReportHeader {
        property: a.property,
        profile,
        trials: a.trials,
        seed: a.seed,
        counterexamples: found.len(),
    };
    let mut out = open_out(a.out.as_deref())?;
    out.write_all(format_report(&header, &found).as_bytes())
        .and_then(|_| out.flush())
        .map_err(bad_input)?;

    let expect = a.expect.unwrap_or(if a.property.expected_to_hold() {
        Expectation::None
    } else {
        Expectation::Found
    });
    let ok = (expect == Expectation::Found) == !found.is_empty();
    let wanted = if expect == Expectation::Found { "some" } else { "none" };
    eprintln!(
        "{}: {} counterexamples in {} trials (expected {wanted})",
        a.property,
        found.len(),
        a.trials
    );
    if ok {
        Ok(())
    } else {
        Err(fail(UNEXPECTED, format!("{}: unexpected result", a.property)))
    }
}

fn attack(a: AttackArgs) -> Result<(), Failure> {
    let mut sc = Scenario::load(&a.scenario).map_err(bad_input)?;
    if let Some(r) = a.rounds {
        sc.rounds = r;
    }
    let report = run_scenario(&sc).map_err(bad_input)?;
    let mut out = open_out(a.out.as_deref())?;
    out.write_all(report.to_text().as_bytes())
        .and_then(|_| out.flush())
        .map_err(bad_input)?;
    if report.matches_expectation() {
        eprintln!("verdict {}", report.verdict);
        Ok(())
    } else {
        Err(fail(
            UNEXPECTED,
            format!(
                "verdict {} does not match expected {}",
                report.verdict,
                report.expect.expect("mismatch implies an expectation")
            ),
        ))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::CheckProps(a) => check_props(a),
        Cmd::Attack(a) => attack(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
