use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use liarwalk::chipfield::{self, ChipConfiguration, Parity, DEFAULT_MAX_WINDOW};
use liarwalk::discrepancy::{
    self, default_grid, interval_bound, measure_intervals, within_scaled_bound, DiscrepancyReport, DiscrepancyTracker,
    IntervalMeasurement, IntervalSpec, PointwiseBound,
};
use liarwalk::liargame::{
    alternating_question, apply_question, machine_window_sum, odd_strategy_run, solve_game, Answer, SolverCaps,
    StateVector,
};
use liarwalk::numerics::{bounds_row, BOUNDS_HEADER};
use liarwalk::parityforge::{adversarial_config, force_parity, parity_mismatches, ParityGrid, Target};
use liarwalk::{certified, Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "liarwalk", version, about = "Liar machine simulation, discrepancy sweeps, parity forcing and liar game solving")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the liar machine and print one JSON line per step.
    Simulate(SimulateArgs),
    /// Pointwise or interval discrepancy against the linear machine, as CSV.
    Discrepancy(DiscrepancyArgs),
    /// Build an initial configuration realizing a parity grid.
    ForceParity(ForceParityArgs),
    /// Solve or play the pathological liar game.
    Game(GameArgs),
    /// Stage split, sphere bound and M thresholds, as CSV.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct Source {
    /// Configuration file, or an inline spec such as `{0:1, 2:11}`.
    #[arg(long)]
    config: Option<String>,
    /// Generate a random configuration from this seed when no config is given.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 0)]
    steps: u64,
    /// Also report the game window `f_t(-t + 2i)` for `i = 0..=e`.
    #[arg(long)]
    e: Option<usize>,
    /// Print every k-th step only.
    #[arg(long, default_value_t = 1)]
    every: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_WINDOW)]
    max_window: usize,
}

#[derive(Args)]
struct DiscrepancyArgs {
    #[command(flatten)]
    source: Source,
    /// Last time step; rows are written at powers of two and at this step.
    #[arg(long)]
    steps: u64,
    /// First reported step.
    #[arg(long, default_value_t = 2)]
    t_min: u64,
    /// Measure `|f_t(I) - g_t(I)|` on `a:b` instead of the pointwise maximum.
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
    /// Use the default (t, B) grid with intervals `[at, at + B]`.
    #[arg(long)]
    grid: bool,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    at: i64,
    /// Start from the adversarial configuration for the interval (or site 0) at `--steps`.
    #[arg(long)]
    adversarial: bool,
    /// Constant for the interval pass column.
    #[arg(long)]
    cprime: Option<String>,
}

#[derive(Args)]
struct ForceParityArgs {
    /// Parity grid file.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct GameArgs {
    #[command(subcommand)]
    mode: GameMode,
}

#[derive(Args)]
struct StateArgs {
    /// Initial state vector such as `1,11`.
    #[arg(long)]
    x0: Option<String>,
    /// Alternatively `M` elements with no lies and `--e` lies allowed.
    #[arg(long)]
    m: Option<BigUint>,
    #[arg(long)]
    e: Option<usize>,
    /// Rounds.
    #[arg(long)]
    n: u64,
}

#[derive(Subcommand)]
enum GameMode {
    /// Exhaustive minimax.
    Solve {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = SolverCaps::default().max_nodes)]
        max_nodes: u64,
        #[arg(long, default_value_t = SolverCaps::default().max_questions)]
        max_questions: u64,
    },
    /// Alternating questions answered so that odd positions take the lie.
    OddRun {
        #[command(flatten)]
        state: StateArgs,
    },
    /// Paul asks alternating questions; Carole's answers are read from stdin.
    Interactive {
        #[command(flatten)]
        state: StateArgs,
    },
    /// Liar machine readout of the game window after `n` steps.
    Machine {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = DEFAULT_MAX_WINDOW)]
        max_window: usize,
    },
}

#[derive(Args)]
struct BoundsArgs {
    /// Rounds; comma separated for several rows.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    /// Lie fraction as `a/b` or a decimal.
    #[arg(long)]
    f: String,
    #[arg(long, default_value = "1")]
    cprime: String,
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Input(format!("expected a rational such as 1/4 or 0.25, got {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok(BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32)))
}

fn load_config(src: &Source) -> Result<ChipConfiguration> {
    match (&src.config, src.seed) {
        (Some(c), _) if Path::new(c).is_file() => {
            let text = fs::read_to_string(c).map_err(|e| Error::Input(format!("cannot read {c}: {e}")))?;
            if text.trim_start().starts_with('#') {
                Ok(ChipConfiguration::parse_text(&text)?.0)
            } else {
                ChipConfiguration::parse_inline(&text)
            }
        }
        (Some(c), _) if c.contains(':') || c.trim() == "{}" => ChipConfiguration::parse_inline(c),
        (Some(c), _) => Err(Error::Input(format!("{c} is neither a file nor an inline configuration"))),
        (None, Some(seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(ChipConfiguration::random(&mut rng, 64, 48, 20, Parity::Even))
        }
        (None, None) => Err(Error::Input("give --config or --seed".into())),
    }
}

fn big(v: &BigUint) -> Value {
    Value::Number(v.to_string().parse().expect("decimal digits form a JSON number"))
}

fn big_list(v: &[BigUint]) -> Value {
    Value::Array(v.iter().map(big).collect())
}

fn emit(out: &mut dyn Write, line: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::Resource(format!("write failed: {e}")))
}

fn config_json(f: &ChipConfiguration, t: u64, e: Option<usize>) -> Value {
    let chips: Vec<Value> = f.occupied().map(|(s, c)| json!([s, big(c)])).collect();
    let mut v = json!({ "t": t, "parity": f.parity().to_string(), "chips": chips });
    if let Some(e) = e {
        let window: Vec<BigUint> = (0..=e as i64).map(|i| f.get(-(t as i64) + 2 * i)).collect();
        v["window"] = big_list(&window);
    }
    v
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let f0 = load_config(&a.source)?;
    chipfield::check_window(&f0, a.steps, a.max_window)?;
    if a.every == 0 {
        return Err(Error::Input("--every must be positive".into()));
    }
    let mut f = f0;
    for t in 0..=a.steps {
        if t > 0 {
            f = chipfield::liar_step(&f);
        }
        if t % a.every == 0 || t == a.steps {
            emit(out, config_json(&f, t, a.e))?;
        }
    }
    Ok(())
}

fn report_times(t_min: u64, steps: u64) -> Vec<u64> {
    let mut ts: Vec<u64> = (0..64).map(|k| 1u64 << k).take_while(|&t| t <= steps).filter(|&t| t >= t_min).collect();
    if steps >= t_min && ts.last() != Some(&steps) {
        ts.push(steps);
    }
    ts
}

fn interval_row(m: &IntervalMeasurement, c: Option<&BigRational>) -> Result<String> {
    let bound = interval_bound(m.t, m.interval.width(), certified::default_precision())?.midpoint_f64();
    let d = &m.discrepancy;
    let ratio = num_traits::ToPrimitive::to_f64(d).unwrap_or(f64::NAN) / bound;
    let rep = DiscrepancyReport {
        t: m.t,
        width: Some(m.interval.width()),
        max_abs: d.clone(),
        argmax_site: m.interval.a,
        bound_value: bound,
        ratio,
        within_bound: None,
    };
    let pass = match c {
        Some(c) => within_scaled_bound(m, c)?.to_string(),
        None => String::new(),
    };
    Ok(format!("{},{pass}", rep.csv()))
}

fn discrepancy_cmd(a: &DiscrepancyArgs, out: &mut dyn Write) -> Result<()> {
    let interval = a.interval.as_deref().map(IntervalSpec::parse).transpose()?;
    let f0 = if a.adversarial {
        if a.steps == 0 {
            return Err(Error::Input("--adversarial needs --steps >= 1".into()));
        }
        let target = interval.map_or(Target::Site(0), Target::Interval);
        adversarial_config(a.steps, target)?
    } else {
        load_config(&a.source)?
    };
    let c = a.cprime.as_deref().map(parse_rational).transpose()?;
    emit(out, format!("{},pass", discrepancy::CSV_HEADER))?;
    if a.grid || interval.is_some() {
        let requests: Vec<(u64, IntervalSpec)> = if a.grid {
            default_grid()
                .into_iter()
                .filter(|&(t, _)| t <= a.steps)
                .map(|(t, b)| Ok((t, IntervalSpec::new(a.at, a.at + b as i64)?)))
                .collect::<Result<_>>()?
        } else {
            let iv = interval.unwrap();
            report_times(a.t_min.max(1), a.steps).into_iter().map(|t| (t, iv)).collect()
        };
        for m in measure_intervals(&f0, &requests) {
            emit(out, interval_row(&m, c.as_ref())?)?;
        }
        return Ok(());
    }
    let times = report_times(a.t_min.max(2), a.steps);
    let bound = PointwiseBound::new(a.steps)?;
    let mut tr = DiscrepancyTracker::new(&f0, a.steps);
    for t in times {
        tr.run_to(t);
        let (mag, site) = tr.max_abs_scaled();
        let holds = bound.holds(t, &mag)?;
        let b = PointwiseBound::value_f64(t);
        let rep = DiscrepancyReport {
            t,
            width: None,
            ratio: discrepancy::dyadic_to_f64(&mag, t) / b,
            max_abs: BigRational::new(mag.into(), BigInt::one() << t),
            argmax_site: site,
            bound_value: b,
            within_bound: Some(holds),
        };
        emit(out, format!("{},{holds}", rep.csv()))?;
    }
    Ok(())
}

fn force_parity_cmd(a: &ForceParityArgs, out: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&a.config)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", a.config.display())))?;
    let g = ParityGrid::parse(&text)?;
    let f0 = force_parity(&g)?;
    let bad = parity_mismatches(&g, &f0)?;
    if !bad.is_empty() {
        return Err(Error::Invariant(format!("{} cells differ from the grid", bad.len())));
    }
    out.write_all(f0.to_text(0).as_bytes())
        .map_err(|e| Error::Resource(format!("write failed: {e}")))
}

fn state_of(s: &StateArgs) -> Result<StateVector> {
    match (&s.x0, &s.m) {
        (Some(x), None) => {
            let v = StateVector::parse(x)?;
            match s.e {
                Some(e) if e != v.max_lies() => {
                    Err(Error::Input(format!("--e {e} does not match the {} entries of --x0", v.entries().len())))
                }
                _ => Ok(v),
            }
        }
        (None, Some(m)) => Ok(StateVector::initial(m.clone(), s.e.unwrap_or(0))),
        _ => Err(Error::Input("give exactly one of --x0 or --m".into())),
    }
}

fn round_json(round: u64, q: &[BigUint], answer: Answer, x: &StateVector) -> Value {
    json!({ "round": round, "question": big_list(q), "answer": answer.to_string(), "state": big_list(x.entries()) })
}

fn game_cmd(mode: &GameMode, out: &mut dyn Write) -> Result<()> {
    match mode {
        GameMode::Solve {
            state,
            max_nodes,
            max_questions,
        } => {
            let caps = SolverCaps {
                max_nodes: *max_nodes,
                max_questions: *max_questions,
            };
            let s = solve_game(&state_of(state)?, state.n, caps)?;
            let first = s.first_question.map_or(Value::Null, |q| big_list(q.entries()));
            emit(
                out,
                json!({ "paul_wins": s.paul_wins, "first_question": first, "nodes_expanded": s.nodes_expanded }),
            )
        }
        GameMode::OddRun { state } => {
            let run = odd_strategy_run(&state_of(state)?, state.n);
            for (i, w) in run.windows(2).enumerate() {
                let q = alternating_question(&w[0]);
                emit(out, round_json(i as u64 + 1, q.entries(), Answer::Yes, &w[1]))?;
            }
            Ok(())
        }
        GameMode::Interactive { state } => {
            let mut x = state_of(state)?;
            let stdin = io::stdin();
            let mut lines = stdin.lock().lines();
            for round in 1..=state.n {
                let q = alternating_question(&x);
                let shown: Vec<String> = q.entries().iter().map(|v| v.to_string()).collect();
                eprint!("round {round}: state {x}, question ({})? [yes/no] ", shown.join(","));
                let line = lines
                    .next()
                    .ok_or_else(|| Error::Input("standard input ended before the game did".into()))?
                    .map_err(|e| Error::Input(format!("cannot read answer: {e}")))?;
                let answer: Answer = line.parse()?;
                x = apply_question(&x, &q, answer)?;
                emit(out, round_json(round, q.entries(), answer, &x))?;
            }
            let wins = !x.total().is_zero();
            emit(out, json!({ "paul_wins": wins, "state": big_list(x.entries()) }))
        }
        GameMode::Machine { state, max_window } => {
            let x0 = state_of(state)?;
            let sum = machine_window_sum(&x0, state.n, 0, x0.max_lies() as u64, *max_window)?;
            emit(out, json!({ "machine_wins": !sum.is_zero(), "window_sum": big(&sum) }))
        }
    }
}

fn bounds_cmd(a: &BoundsArgs, out: &mut dyn Write) -> Result<()> {
    let f = parse_rational(&a.f)?;
    let c = parse_rational(&a.cprime)?;
    emit(out, BOUNDS_HEADER)?;
    for &n in &a.n {
        emit(out, bounds_row(n, &f, &c)?.csv())?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let mut out: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| Error::Input(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    };
    match &cli.command {
        Command::Simulate(a) => simulate(a, &mut out)?,
        Command::Discrepancy(a) => discrepancy_cmd(a, &mut out)?,
        Command::ForceParity(a) => force_parity_cmd(a, &mut out)?,
        Command::Game(a) => game_cmd(&a.mode, &mut out)?,
        Command::Bounds(a) => bounds_cmd(a, &mut out)?,
    }
    out.flush().map_err(|e| Error::Resource(format!("write failed: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("liarwalk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
