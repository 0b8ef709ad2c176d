use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pfsa_core::adversary::{scheme_hypergraph_violation, validate_timeline, CorruptionTimeline};
use pfsa_core::field::MERSENNE_61;
use pfsa_core::harness::{
    replay_check, run_privacy_test, run_simulation, PrivacySpec, SimulationConfig,
};
use pfsa_core::prg::golden_vectors;
use pfsa_core::protocol::{parse_tick_trace, reconstruct, DealerRecord};
use pfsa_core::{AgentState, Automaton, Deployment, FieldSpec, Scheme, SchemeParams, StateIndex};

const AUTOMATON_FILE: &str = "automaton.fsa";
const DEALER_FILE: &str = "dealer.state";

#[derive(Parser)]
#[command(
    name = "pfsa",
    version,
    about = "Private distributed evaluation of finite-state automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct DeployArgs {
    /// Automaton file, or `builtin:four_state`.
    automaton: String,
    #[arg(long)]
    scheme: Scheme,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    t: usize,
    /// Field modulus; defaults to 2 for nn and tn-naive, 2^61-1 for tn.
    #[arg(long)]
    modulus: Option<u64>,
    /// Initial state, 1-based.
    #[arg(long)]
    init: usize,
    /// Seed for all dealer randomness.
    #[arg(long)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Deal initial agent states into a directory.
    Init {
        #[command(flatten)]
        deploy: DeployArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also write the dealer's omniscient record (testing only).
        #[arg(long)]
        keep_dealer: bool,
    },
    /// Apply a tick trace (one symbol or `-` per line) to every agent.
    Run { dir: PathBuf, trace: PathBuf },
    /// Dump one agent's memory as the adversary would read it now.
    Corrupt {
        dir: PathBuf,
        agent: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the current state from submitted agent files.
    Reconstruct {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Replay a trace from the dealer record and check the directory against it.
    Verify {
        dir: PathBuf,
        dealer: PathBuf,
        trace: PathBuf,
    },
    /// Run a statistical privacy experiment.
    Privacy {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check a corruption timeline against the scheme's seed groups.
    CheckGroups {
        #[arg(long)]
        scheme: Scheme,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        t: usize,
        #[arg(long)]
        timeline: PathBuf,
    },
    /// Simulate a run in memory and print the omniscient trace.
    Simulate {
        #[command(flatten)]
        deploy: DeployArgs,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        timeline: Option<PathBuf>,
        /// Write the captured view here.
        #[arg(long)]
        view: Option<PathBuf>,
    },
    /// Print the reference generator's test vectors.
    PrgVectors,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Ok(false) means a check ran and failed.
fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Init {
            deploy,
            out,
            keep_dealer,
        } => init(&deploy, &out, keep_dealer),
        Command::Run { dir, trace } => run(&dir, &trace),
        Command::Corrupt { dir, agent, out } => corrupt(&dir, agent, out.as_deref()),
        Command::Reconstruct { files } => {
            let states = files
                .iter()
                .map(|f| read_state(f))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&AgentState> = states.iter().collect();
            println!("state {}", reconstruct(&refs)?);
            Ok(true)
        }
        Command::Verify { dir, dealer, trace } => verify(&dir, &dealer, &trace),
        Command::Privacy { spec, format } => privacy(&spec, format),
        Command::CheckGroups {
            scheme,
            n,
            t,
            timeline,
        } => check_groups(scheme, n, t, &timeline),
        Command::Simulate {
            deploy,
            trace,
            timeline,
            view,
        } => simulate(&deploy, &trace, timeline.as_deref(), view.as_deref()),
        Command::PrgVectors => {
            print!("{}", golden_vectors());
            Ok(true)
        }
    }
}

fn load_automaton(spec: &str, base: &Path) -> Result<Automaton> {
    match spec.strip_prefix("builtin:") {
        Some("four_state") => Ok(Automaton::four_state_example()),
        Some(other) => bail!("unknown built-in automaton `{other}`"),
        None => {
            let path = base.join(spec);
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            text.parse()
                .with_context(|| format!("parsing {}", path.display()))
        }
    }
}

fn params(d: &DeployArgs) -> Result<SchemeParams> {
    let modulus = d.modulus.unwrap_or(match d.scheme {
        Scheme::Tn => MERSENNE_61,
        Scheme::Nn | Scheme::TnNaive => 2,
    });
    Ok(SchemeParams::new(
        d.scheme,
        d.n,
        d.t,
        FieldSpec::new(modulus)?,
    )?)
}

fn deploy(d: &DeployArgs) -> Result<(Automaton, Deployment)> {
    let automaton = load_automaton(&d.automaton, Path::new("."))?;
    let cfg = SimulationConfig {
        params: params(d)?,
        init: StateIndex::new(d.init)?,
        schedule: Vec::new(),
        timeline: CorruptionTimeline::default(),
        dealer_seed: d.seed,
        automaton,
    };
    let deployment = cfg.deploy()?;
    Ok((cfg.automaton, deployment))
}

/// Replaces `path` by writing a sibling temporary file and renaming it.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

fn agent_path(dir: &Path, i: usize) -> PathBuf {
    dir.join(format!("agent_{i}.state"))
}

fn read_state(path: &Path) -> Result<AgentState> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    AgentState::parse_state_file(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_dir_states(dir: &Path) -> Result<(Automaton, Vec<AgentState>)> {
    let automaton = load_automaton(AUTOMATON_FILE, dir)?;
    let first = read_state(&agent_path(dir, 1))?;
    let mut states = vec![first];
    for i in 2..=states[0].params.n {
        let s = read_state(&agent_path(dir, i))?;
        if s.params != states[0].params || s.index != i {
            bail!(
                "{} does not belong to this deployment",
                agent_path(dir, i).display()
            );
        }
        states.push(s);
    }
    if states[0].index != 1 {
        bail!(
            "{} holds agent {}",
            agent_path(dir, 1).display(),
            states[0].index
        );
    }
    Ok((automaton, states))
}

fn init(d: &DeployArgs, out: &Path, keep_dealer: bool) -> Result<bool> {
    let (automaton, deployment) = deploy(d)?;
    fs::create_dir_all(out)?;
    write_atomic(&out.join(AUTOMATON_FILE), &automaton.to_string())?;
    for a in &deployment.agents {
        write_atomic(&agent_path(out, a.index), &a.to_state_file())?;
    }
    if keep_dealer {
        write_atomic(&out.join(DEALER_FILE), &deployment.dealer.to_file())?;
    }
    Ok(true)
}

fn run(dir: &Path, trace: &Path) -> Result<bool> {
    let (automaton, mut states) = read_dir_states(dir)?;
    let ticks = parse_tick_trace(
        &fs::read_to_string(trace).with_context(|| format!("reading {}", trace.display()))?,
    );
    // Every tick is validated before anything is written.
    for input in &ticks {
        for s in &mut states {
            s.tick(&automaton, input)?;
        }
    }
    for s in &states {
        write_atomic(&agent_path(dir, s.index), &s.to_state_file())?;
    }
    Ok(true)
}

fn corrupt(dir: &Path, agent: usize, out: Option<&Path>) -> Result<bool> {
    let state = read_state(&agent_path(dir, agent))?;
    let dump = state.snapshot().to_dump();
    match out {
        Some(path) => write_atomic(path, &dump)?,
        None => print!("{dump}"),
    }
    Ok(true)
}

fn verify(dir: &Path, dealer: &Path, trace: &Path) -> Result<bool> {
    let (automaton, states) = read_dir_states(dir)?;
    let record = DealerRecord::parse(
        &fs::read_to_string(dealer).with_context(|| format!("reading {}", dealer.display()))?,
    )?;
    let ticks = parse_tick_trace(
        &fs::read_to_string(trace).with_context(|| format!("reading {}", trace.display()))?,
    );
    let (replayed, problem) = replay_check(&automaton, &record, &ticks)?;
    if let Some(p) = problem {
        println!("FAIL: {p}");
        return Ok(false);
    }
    if let Some(s) = states.iter().zip(&replayed.agents).find(|(a, b)| a != b) {
        println!("FAIL: agent {} differs from the replayed state", s.0.index);
        return Ok(false);
    }
    println!(
        "ok: state {} after {} ticks",
        replayed.reconstruct()?,
        ticks.len()
    );
    Ok(true)
}

fn privacy(path: &Path, format: Format) -> Result<bool> {
    let base = path.parent().unwrap_or(Path::new("."));
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut load_err = None;
    let parsed = PrivacySpec::parse(&text, |name| {
        load_automaton(name, base).map_err(|e| {
            let msg = format!("{e:#}");
            load_err = Some(e);
            pfsa_core::Error::InvalidParameters(msg)
        })
    });
    let spec = match (parsed, load_err) {
        (Ok(s), _) => s,
        (Err(_), Some(e)) => return Err(e),
        (Err(e), None) => return Err(e.into()),
    };
    let out = run_privacy_test(&spec)?;
    let r = &out.report;
    let verdict = if out.passed { "PASS" } else { "FAIL" };
    match format {
        Format::Json => println!(
            "{}",
            json!({
                "test": out.name,
                "mode": spec.mode.to_string(),
                "method": r.test,
                "samples": r.samples,
                "coordinates": r.coordinates,
                "statistic": r.statistic,
                "df": r.df,
                "p_value": r.p_value,
                "alpha": out.alpha,
                "expect": out.expect.to_string(),
                "result": verdict,
            })
        ),
        Format::Text => {
            println!("test {}", out.name);
            println!("mode {} ({})", spec.mode, r.test);
            println!("samples {}", r.samples);
            println!("coordinates {}", r.coordinates);
            println!("statistic {:.4} (df {})", r.statistic, r.df);
            println!("p-value {:.6e}", r.p_value);
            println!("expect {} at alpha {}", out.expect, out.alpha);
            println!("result {verdict}");
        }
    }
    Ok(out.passed)
}

fn check_groups(scheme: Scheme, n: usize, t: usize, timeline: &Path) -> Result<bool> {
    let field = match scheme {
        Scheme::Tn => FieldSpec::mersenne61(),
        Scheme::Nn | Scheme::TnNaive => FieldSpec::gf2(),
    };
    let p = SchemeParams::new(scheme, n, t, field)?;
    let tl: CorruptionTimeline = fs::read_to_string(timeline)
        .with_context(|| format!("reading {}", timeline.display()))?
        .parse()?;
    if !tl.is_well_formed(n) {
        bail!("timeline must have non-decreasing ticks and distinct agents in 1..={n}");
    }
    if !validate_timeline(&tl, &p) {
        println!(
            "note: {} corruptions exceed the bound of {}",
            tl.len(),
            p.corruption_bound()
        );
    }
    match scheme_hypergraph_violation(&p, &tl) {
        None => {
            println!("ok: every corrupted agent keeps a seed group free of earlier corruptions");
            Ok(true)
        }
        Some((members, step)) => {
            if scheme == Scheme::TnNaive {
                println!("violation: instance {members}, corruption {step} of that instance");
            } else {
                println!("violation: corruption {step}");
            }
            Ok(false)
        }
    }
}

fn simulate(
    d: &DeployArgs,
    trace: &Path,
    timeline: Option<&Path>,
    view: Option<&Path>,
) -> Result<bool> {
    let automaton = load_automaton(&d.automaton, Path::new("."))?;
    let timeline = match timeline {
        Some(p) => fs::read_to_string(p)
            .with_context(|| format!("reading {}", p.display()))?
            .parse()?,
        None => CorruptionTimeline::default(),
    };
    let cfg = SimulationConfig {
        params: params(d)?,
        init: StateIndex::new(d.init)?,
        schedule: parse_tick_trace(
            &fs::read_to_string(trace).with_context(|| format!("reading {}", trace.display()))?,
        ),
        timeline,
        dealer_seed: d.seed,
        automaton,
    };
    let out = run_simulation(&cfg)?;
    print!("{}", out.trace.to_lines());
    if let Some(path) = view {
        write_atomic(path, &out.view.to_dump())?;
    }
    if let Some(v) = out.violation {
        eprintln!("invariant violated: {v}");
        return Ok(false);
    }
    Ok(true)
}
