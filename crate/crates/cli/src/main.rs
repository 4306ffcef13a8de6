//! `rotorlab`: run the lattice experiments from the command line.

mod verify;

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rotorlab::discrepancy::{
    max_discrepancy, standard_loads, trace_csv, Dim, RotorField, RotorInit,
};
use rotorlab::goldbug::{GoldbugReport, GoldbugSystem};
use rotorlab::idla::{roundness, run_coupled, run_idla};
use rotorlab::render::{render_rotor, render_sandpile};
use rotorlab::rotor::{certify, flow_check, run, run_swarm, BlobStats, CardStacks};
use rotorlab::sandpile::{stabilize, Order, SandVariant};
use rotorlab::Error;

#[derive(Parser, Debug)]
#[command(
    name = "rotorlab",
    version,
    about = "Rotor walks, goldbugs, sandpiles and IDLA on the lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Drop bugs into the goldbug line and report the cup split.
    Goldbug {
        #[arg(long)]
        bugs: u64,
        /// JSON report, or CSV when the path ends in `.csv`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Rotor-router aggregation from the origin.
    Rotor {
        #[arg(long)]
        bugs: u64,
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        cards: Option<PathBuf>,
        /// Release the bugs as a swarm, moving them in this seeded order.
        #[arg(long)]
        swarm_seed: Option<u64>,
        /// Re-check the final state (certificate and flow) and exit 1 on failure.
        #[arg(long)]
        check_invariants: bool,
    },
    /// Stabilize a pile of grains placed at the origin.
    Sandpile {
        #[arg(long)]
        grains: u64,
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        image: Option<PathBuf>,
        /// `systematic` or `random:SEED`.
        #[arg(long, default_value = "systematic", value_parser = parse_order)]
        order: Order,
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Internal diffusion limited aggregation.
    Idla {
        #[arg(long)]
        bugs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Card stacks from a rotor run; every step must spend a matching card.
        #[arg(long)]
        cards: Option<PathBuf>,
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Rotor walk of a bug load against its expected random-walk spread.
    Discrepancy {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        dim: u8,
        #[arg(long)]
        steps: u32,
        /// `random:SEED` or `constant:K`.
        #[arg(long, default_value = "random:0", value_parser = parse_init)]
        rotor_init: RotorInit,
        #[arg(long, value_enum, default_value_t = LoadArg::Single)]
        load: LoadArg,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the invariant suites.
    Verify {
        #[arg(long, value_enum, default_value_t = verify::Level::Quick)]
        level: verify::Level,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Greedy,
    Standard,
}

impl From<VariantArg> for SandVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Greedy => SandVariant::Greedy,
            VariantArg::Standard => SandVariant::Standard,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LoadArg {
    Single,
    Pile64,
    Spread16,
}

impl LoadArg {
    fn name(self) -> &'static str {
        match self {
            LoadArg::Single => "single",
            LoadArg::Pile64 => "pile64",
            LoadArg::Spread16 => "spread16",
        }
    }
}

fn parse_order(s: &str) -> Result<Order, String> {
    match s.split_once(':') {
        None if s == "systematic" => Ok(Order::Systematic),
        Some(("random", seed)) => u64::from_str(seed)
            .map(Order::Random)
            .map_err(|e| e.to_string()),
        _ => Err("expected `systematic` or `random:SEED`".into()),
    }
}

fn parse_init(s: &str) -> Result<RotorInit, String> {
    match s.split_once(':') {
        Some(("random", seed)) => u64::from_str(seed)
            .map(RotorInit::Random)
            .map_err(|e| e.to_string()),
        Some(("constant", k)) => u8::from_str(k)
            .map(RotorInit::Constant)
            .map_err(|e| e.to_string()),
        _ => Err("expected `random:SEED` or `constant:K`".into()),
    }
}

/// Why a command stopped early.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::PreconditionViolated(_)
            | Error::OutOfRange(_)
            | Error::RefusesNonCheckered
            | Error::Parse { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Invariant(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Invariant(e.to_string())
    }
}

/// Writes to the file at `path`, or to standard output for `-`.
fn emit(path: &PathBuf, bytes: &[u8]) -> io::Result<()> {
    if path.as_os_str() == "-" {
        let mut out = io::stdout().lock();
        out.write_all(bytes)?;
        out.flush()
    } else {
        File::create(path)?.write_all(bytes)
    }
}

fn emit_json(path: &PathBuf, value: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json values always serialize");
    text.push('\n');
    emit(path, text.as_bytes())
}

/// `extra` merged into the fields of `record`.
fn with_fields(record: impl serde::Serialize, extra: Value) -> Value {
    let mut v = serde_json::to_value(record).expect("records serialize");
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

fn order_text(o: Order) -> String {
    match o {
        Order::Systematic => "systematic".into(),
        Order::Random(s) => format!("random:{s}"),
    }
}

fn init_text(i: RotorInit) -> String {
    match i {
        RotorInit::Random(s) => format!("random:{s}"),
        RotorInit::Constant(k) => format!("constant:{k}"),
    }
}

fn goldbug(bugs: u64, report: Option<PathBuf>) -> Result<(), Failure> {
    let mut g = GoldbugSystem::new();
    g.run_bugs(bugs)?;
    let r = g.report()?;
    if r.fib0 != bugs || (r.fib1, r.fib2) != (r.cup_left, r.cup_right) {
        return Err(Failure::Invariant(format!(
            "arrow digits disagree with the cups: {r:?}"
        )));
    }
    match report {
        Some(p) if p.extension().is_some_and(|e| e == "csv") => emit(
            &p,
            format!("{}\n{}\n", GoldbugReport::CSV_HEADER, r.csv_row()).as_bytes(),
        )?,
        Some(p) => emit_json(
            &p,
            &with_fields(
                &r,
                json!({ "config": { "command": "goldbug", "bugs": bugs } }),
            ),
        )?,
        None => println!("{} bugs: {}:{}", bugs, r.cup_left, r.cup_right),
    }
    Ok(())
}

struct RotorArgs {
    bugs: u64,
    image: Option<PathBuf>,
    stats: Option<PathBuf>,
    cards: Option<PathBuf>,
    swarm_seed: Option<u64>,
    check_invariants: bool,
}

fn rotor(a: RotorArgs) -> Result<(), Failure> {
    let blob = match a.swarm_seed {
        Some(seed) => run_swarm(a.bugs, seed)?,
        None => run(a.bugs)?.0,
    };
    let stats = BlobStats::of(&blob);
    if a.check_invariants {
        if !certify(&blob) {
            return Err(Failure::Invariant(
                "final state failed its certificate".into(),
            ));
        }
        if let Some(v) = flow_check(&blob).first() {
            return Err(Failure::Invariant(format!("flow check failed: {v:?}")));
        }
    }
    if let Some(p) = &a.image {
        emit(p, &render_rotor(&blob).to_ppm())?;
    }
    if let Some(p) = &a.cards {
        emit(p, CardStacks::from_blob(&blob).to_text().as_bytes())?;
    }
    let config = json!({
        "command": "rotor",
        "bugs": a.bugs,
        "swarm_seed": a.swarm_seed,
        "check_invariants": a.check_invariants,
    });
    match &a.stats {
        Some(p) => emit_json(
            p,
            &with_fields(&stats, json!({ "gap": stats.gap(), "config": config })),
        )?,
        None if a.image.as_ref().is_some_and(|p| p.as_os_str() == "-") => {}
        None => println!(
            "{} bugs, {} sites, max dist2 {}, min vacant dist2 {}",
            stats.n,
            stats.site_count,
            stats
                .max_occupied_dist2
                .map_or("none".into(), |d| d.to_string()),
            stats.min_vacant_dist2
        ),
    }
    Ok(())
}

fn sandpile(
    grains: u64,
    variant: SandVariant,
    image: Option<PathBuf>,
    order: Order,
    stats: Option<PathBuf>,
) -> Result<(), Failure> {
    let pile = stabilize(grains, variant, order)?;
    if let Some(p) = &image {
        emit(p, &render_sandpile(&pile).to_ppm())?;
    }
    let sites = pile.ever_occupied_sites().len();
    let (x, y, w, h) = pile.bounding_box();
    let record = json!({
        "n": grains,
        "variant": format!("{variant:?}").to_lowercase(),
        "topplings": pile.topplings(),
        "ever_occupied_sites": sites,
        "nonempty_sites": pile.nonempty().len(),
        "interior_holes": pile.interior_holes().len(),
        "dihedral_symmetric": pile.is_dihedral_symmetric(),
        "bounding_box": { "x": x, "y": y, "width": w, "height": h },
        "config": {
            "command": "sandpile",
            "grains": grains,
            "variant": format!("{variant:?}").to_lowercase(),
            "order": order_text(order),
        },
    });
    match &stats {
        Some(p) => emit_json(p, &record)?,
        None if image.as_ref().is_some_and(|p| p.as_os_str() == "-") => {}
        None => println!(
            "{grains} grains, {sites} sites reached, {} topplings",
            pile.topplings()
        ),
    }
    Ok(())
}

fn idla(
    bugs: u64,
    seed: u64,
    cards: Option<PathBuf>,
    stats: Option<PathBuf>,
) -> Result<(), Failure> {
    let config = json!({
        "command": "idla",
        "bugs": bugs,
        "seed": seed,
        "cards": cards.as_ref().map(|p| p.display().to_string()),
    });
    let record = match &cards {
        Some(path) => {
            let stacks = CardStacks::read_from(BufReader::new(File::open(path)?))?;
            let c = run_coupled(&stacks, bugs, seed);
            with_fields(&c, json!({ "config": config }))
        }
        None => {
            let blob = run_idla(bugs, seed)?;
            let report = roundness(&blob);
            let s = blob.stats();
            with_fields(
                &report,
                json!({
                    "site_count": s.site_count,
                    "max_occupied_dist2": s.max_occupied_dist2,
                    "min_vacant_dist2": s.min_vacant_dist2,
                    "config": config,
                }),
            )
        }
    };
    match &stats {
        Some(p) => emit_json(p, &record)?,
        None => println!(
            "{}",
            serde_json::to_string(&record).expect("json values always serialize")
        ),
    }
    Ok(())
}

fn discrepancy(
    dim: u8,
    steps: u32,
    init: RotorInit,
    load: LoadArg,
    trace: Option<PathBuf>,
) -> Result<(), Failure> {
    let d = Dim::from_u8(dim)?;
    let field = RotorField::new(d, init)?;
    let (_, bugs) = standard_loads(d)
        .into_iter()
        .find(|(name, _)| *name == load.name())
        .expect("every load is listed");
    let t = max_discrepancy(&bugs, &field, steps)?;
    let config = json!({
        "command": "discrepancy",
        "dim": dim,
        "steps": steps,
        "rotor_init": init_text(init),
        "load": load.name(),
    });
    match &trace {
        Some(p) => emit(p, trace_csv(&config.to_string(), &t).as_bytes())?,
        None => {
            let peak = t.iter().copied().fold(0.0, f64::max);
            println!("max discrepancy over {steps} steps: {peak}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Goldbug { bugs, report } => goldbug(bugs, report),
        Command::Rotor {
            bugs,
            image,
            stats,
            cards,
            swarm_seed,
            check_invariants,
        } => rotor(RotorArgs {
            bugs,
            image,
            stats,
            cards,
            swarm_seed,
            check_invariants,
        }),
        Command::Sandpile {
            grains,
            variant,
            image,
            order,
            stats,
        } => sandpile(grains, variant.into(), image, order, stats),
        Command::Idla {
            bugs,
            seed,
            cards,
            stats,
        } => idla(bugs, seed, cards, stats),
        Command::Discrepancy {
            dim,
            steps,
            rotor_init,
            load,
            trace,
        } => discrepancy(dim, steps, rotor_init, load, trace),
        Command::Verify { level } => verify::run_suites(level),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: rotorlab <goldbug|rotor|sandpile|idla|discrepancy|verify> [OPTIONS]; see --help");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
