//! Command-line front end for secnet.
//!
//! Every command renders to a string and an exit code so the binary stays a
//! thin wrapper and tests can drive commands in-process.
//!
//! Exit codes: 0 perfectly secure (or success), 1 imperfectly secure (or a
//! failed reproduction row), 2 insecure, 3 error.

pub mod reproduce;

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use secnet_core::attack::AttackClass;
use secnet_core::capacity::{
    max_prime_power, multicast_region, multimulticast_region, relay_capacity, to_f64, wiretap_mincut_capacity,
    MulticastParams, Randomness, RateRegion, Rational, RelayParams,
};
use secnet_core::codegen::{multicast_code, onehop_code, relay_code, verify_code, BuiltCode, RelayMode};
use secnet_core::netmodel::{build_fixture, mincuts, NetworkCode, NetworkSpec};
use secnet_core::secrecy::{classify_security, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IMPERFECT: i32 = 1;
pub const EXIT_INSECURE: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

/// Hard ceiling on the enumeration cap accepted from the command line.
const MAX_WORLDS_CEILING: u64 = 1 << 24;

#[derive(Parser, Debug)]
#[command(name = "secnet", version, about = "Exact secrecy analysis and secure code construction for layered networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for world enumeration (a hint; results do not depend on it).
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    /// Enumeration cap in worlds (at most 2^24); overrides SECNET_MAX_WORLDS.
    #[arg(long, global = true)]
    pub max_worlds: Option<u64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Leakage report of a code under an attack class.
    Analyze(AnalyzeArgs),
    /// Relay capacities or multicast capacity regions.
    Capacity(CapacityArgs),
    /// Construct a code, optionally verifying it exhaustively.
    Build(BuildArgs),
    /// Rerun one of the reference tables.
    Reproduce(ReproduceArgs),
    /// Min-cuts of a unicast network, with wiretap capacities when --r is given.
    Mincut(MincutArgs),
    /// Largest prime power not exceeding d^n.
    Primepower(PrimepowerArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["fixture", "network"])))]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long, requires = "code")]
    pub network: Option<PathBuf>,
    #[arg(long)]
    pub code: Option<PathBuf>,
    #[arg(long, default_value = "A0")]
    pub class: AttackClass,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("kind").required(true).args(["relay", "multicast", "multimulticast"])))]
pub struct CapacityArgs {
    #[arg(long)]
    pub relay: bool,
    #[arg(long)]
    pub multicast: bool,
    #[arg(long)]
    pub multimulticast: bool,
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<u64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<u64>,
    #[arg(long, default_value_t = 2)]
    pub d: u64,
    /// Fresh random symbols per use at each relay (relay only).
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<u64>,
    /// Number of sources (multimulticast).
    #[arg(long, default_value_t = 1)]
    pub a: u64,
    /// Number of terminals.
    #[arg(long, default_value_t = 1)]
    pub b: u64,
    /// Intermediate group sizes b_1..b_{c-1}.
    #[arg(long, value_delimiter = ',')]
    pub groups: Vec<u64>,
    #[arg(long, value_enum, default_value_t = RandomnessArg::None)]
    pub randomness: RandomnessArg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum RandomnessArg {
    None,
    Full,
}

impl From<RandomnessArg> for Randomness {
    fn from(r: RandomnessArg) -> Randomness {
        match r {
            RandomnessArg::None => Randomness::None,
            RandomnessArg::Full => Randomness::Full,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    Onehop,
    Relay,
    Multicast,
    Fixture,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    FullRandom,
    NoRandom,
    Limited,
}

impl From<ModeArg> for RelayMode {
    fn from(m: ModeArg) -> RelayMode {
        match m {
            ModeArg::FullRandom => RelayMode::FullRandom,
            ModeArg::NoRandom => RelayMode::NoRandom,
            ModeArg::Limited => RelayMode::Limited,
        }
    }
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub construction: Construction,
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<u64>,
    /// Alphabet size (prime power for exact rates).
    #[arg(long, alias = "d", default_value_t = 2)]
    pub q: u64,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<u64>,
    #[arg(long, value_enum, default_value_t = ModeArg::FullRandom)]
    pub mode: ModeArg,
    /// Symbols per edge for the one-hop code.
    #[arg(long, default_value_t = 1)]
    pub n_prime: usize,
    #[arg(long, default_value_t = 1)]
    pub b: u64,
    #[arg(long, value_delimiter = ',')]
    pub groups: Vec<u64>,
    /// Requested multicast rates, e.g. 1/4,1/4 (default: equal split).
    #[arg(long, value_delimiter = ',')]
    pub rates: Vec<String>,
    /// Fixture name for --construction fixture.
    #[arg(long)]
    pub name: Option<String>,
    /// Run the exhaustive A0/A2/A3 check; exits nonzero on any leak.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Table {
    NonlinearSummary,
    ScalarImpossibility,
    LemmaEntropy,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    pub table: Table,
    /// Seed for randomized tables.
    #[arg(long, default_value_t = reproduce::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["fixture", "network"])))]
pub struct MincutArgs {
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Eavesdropper edge count for the wiretap capacity bracket.
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Args, Debug)]
pub struct PrimepowerArgs {
    #[arg(long)]
    pub d: u64,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Also list log2(q)/n for every block length up to this one.
    #[arg(long)]
    pub scan: Option<u32>,
}

/// Rendered command result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub body: String,
    pub exit: i32,
}

/// Applies global options, runs the command and writes `--output` if given.
pub fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(cap) = cli.max_worlds {
        if cap == 0 || cap > MAX_WORLDS_CEILING {
            bail!("--max-worlds must lie in 1..=2^24");
        }
        std::env::set_var("SECNET_MAX_WORLDS", cap.to_string());
    }
    if let Some(threads) = cli.parallelism {
        // A pool may already exist when run twice in one process; the hint is then moot.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    let (value, exit) = match &cli.command {
        Command::Analyze(a) => return finish(cli, analyze(a, cli.format)?),
        Command::Capacity(a) => (capacity(a)?, EXIT_OK),
        Command::Build(a) => build(a)?,
        Command::Reproduce(a) => {
            let report = reproduce::run_table(a.table, a.seed)?;
            let exit = if report.pass { EXIT_OK } else { EXIT_IMPERFECT };
            if cli.format == Format::Csv {
                return finish(cli, Outcome { body: report.to_csv(), exit });
            }
            (report.to_json(), exit)
        }
        Command::Mincut(a) => (mincut(a)?, EXIT_OK),
        Command::Primepower(a) => (primepower(a)?, EXIT_OK),
    };
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(&value)? + "\n",
        Format::Pretty => pretty(&value, 0),
        Format::Csv => bail!("csv output is available for analyze and reproduce only"),
    };
    finish(cli, Outcome { body, exit })
}

fn finish(cli: &Cli, outcome: Outcome) -> Result<Outcome> {
    if let Some(path) = &cli.output {
        fs::write(path, &outcome.body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(outcome)
}

/// Indented `key: value` rendering of a JSON value.
fn pretty(v: &Value, depth: usize) -> String {
    let pad = "  ".repeat(depth);
    let mut out = String::new();
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) | Value::Array(_) => {
                        out += &format!("{pad}{k}:\n{}", pretty(x, depth + 1));
                    }
                    _ => out += &format!("{pad}{k}: {}\n", scalar(x)),
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                match x {
                    Value::Object(_) | Value::Array(_) => out += &format!("{pad}-\n{}", pretty(x, depth + 1)),
                    _ => out += &format!("{pad}- {}\n", scalar(x)),
                }
            }
        }
        x => out += &format!("{pad}{}\n", scalar(x)),
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        x => x.to_string(),
    }
}

pub fn exit_for(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::PerfectlySecure => EXIT_OK,
        Verdict::ImperfectlySecure => EXIT_IMPERFECT,
        Verdict::Insecure => EXIT_INSECURE,
    }
}

fn load_inputs(fixture: &Option<String>, network: &Option<PathBuf>, code: &Option<PathBuf>) -> Result<(NetworkSpec, Option<NetworkCode>)> {
    if let Some(name) = fixture {
        let (spec, code) = build_fixture(name)?;
        return Ok((spec, Some(code)));
    }
    let path = network.as_ref().ok_or_else(|| anyhow!("need --fixture or --network"))?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = NetworkSpec::from_json(&text)?;
    let code = match code {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(NetworkCode::from_json(&text)?)
        }
        None => None,
    };
    Ok((spec, code))
}

pub fn analyze(args: &AnalyzeArgs, format: Format) -> Result<Outcome> {
    let (spec, code) = load_inputs(&args.fixture, &args.network, &args.code)?;
    let code = code.ok_or_else(|| anyhow!("analyze needs a code"))?;
    let report = classify_security(&spec, &code, args.class)?;
    let exit = exit_for(report.verdict);
    let body = match format {
        Format::Json => serde_json::to_string_pretty(&report.to_json())? + "\n",
        Format::Csv => report.to_csv(),
        Format::Pretty => pretty(&report.to_json(), 0),
    };
    Ok(Outcome { body, exit })
}

fn rational_json(r: &Rational) -> Value {
    json!(r.to_string())
}

fn bits(r: &Rational, d: u64) -> f64 {
    to_f64(r) * (d as f64).log2()
}

fn region_json(region: &RateRegion, d: u64) -> Value {
    let mut v = region.to_json();
    let per_use: serde_json::Map<String, Value> =
        region.constants.iter().map(|(k, c)| (k.clone(), json!(bits(c, d)))).collect();
    v["bits_per_use"] = Value::Object(per_use);
    v["units"] = json!("log_d");
    v["schema_version"] = json!(1);
    v
}

pub fn capacity(args: &CapacityArgs) -> Result<Value> {
    if args.relay {
        let params = RelayParams::new(&args.k, &args.r, args.d, &args.gamma)?;
        let caps = relay_capacity(&params)?;
        return Ok(json!({
            "schema_version": 1,
            "params": params,
            "C1": rational_json(&caps.c1),
            "C2": rational_json(&caps.c2),
            "C_gamma": rational_json(&caps.c_gamma),
            "h": caps.h.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
            "units": "log_d",
            "bits_per_use": {
                "C1": bits(&caps.c1, args.d),
                "C2": bits(&caps.c2, args.d),
                "C_gamma": bits(&caps.c_gamma, args.d),
            },
        }));
    }
    let params = MulticastParams::new(args.a, args.b, &args.groups, &args.k, &args.r, args.d)?;
    let region = if args.multicast {
        multicast_region(&params, args.randomness.into())?
    } else {
        multimulticast_region(&params, args.randomness.into())?
    };
    let mut v = region_json(&region, args.d);
    v["params"] = serde_json::to_value(&params)?;
    Ok(v)
}

fn parse_rates(items: &[String]) -> Result<Vec<Rational>> {
    items
        .iter()
        .map(|s| s.trim().parse::<Rational>().map_err(|e| anyhow!("bad rate {s:?}: {e}")))
        .collect()
}

/// Builds the requested code; the exit code reflects the verification.
pub fn build(args: &BuildArgs) -> Result<(Value, i32)> {
    let built: Option<BuiltCode> = match args.construction {
        Construction::Onehop => {
            let (k, r) = match (args.k.as_slice(), args.r.as_slice()) {
                ([k], [r]) => (*k as usize, *r as usize),
                _ => bail!("onehop takes a single --k and --r"),
            };
            Some(onehop_code(k, r, args.q, args.n_prime)?)
        }
        Construction::Relay => {
            let params = RelayParams::new(&args.k, &args.r, args.q, &args.gamma)?;
            Some(relay_code(&params, args.mode.into())?)
        }
        Construction::Multicast => {
            let params = MulticastParams::new(1, args.b, &args.groups, &args.k, &args.r, args.q)?;
            let rates = parse_rates(&args.rates)?;
            Some(multicast_code(&params, if rates.is_empty() { None } else { Some(&rates) })?)
        }
        Construction::Fixture => None,
    };
    let (spec, code, mut value) = match built {
        Some(b) => {
            let v = b.to_json();
            (b.spec, b.code, v)
        }
        None => {
            let name = args.name.as_deref().ok_or_else(|| anyhow!("--construction fixture needs --name"))?;
            let (spec, code) = build_fixture(name)?;
            let mut v = code.to_json();
            v["network"] = spec.to_json();
            v["construction"] = json!(format!("fixture/{name}"));
            (spec, code, v)
        }
    };
    value["schema_version"] = json!(1);
    let mut exit = EXIT_OK;
    if args.verify {
        let report = verify_code(&spec, &code)?;
        exit = [report.a0, report.a2, report.a3].into_iter().map(exit_for).max().unwrap_or(EXIT_OK);
        if !report.decodable {
            exit = exit.max(EXIT_IMPERFECT);
        }
        value["verification"] = serde_json::to_value(&report)?;
    }
    Ok((value, exit))
}

pub fn mincut(args: &MincutArgs) -> Result<Value> {
    let (spec, _) = load_inputs(&args.fixture, &args.network, &None)?;
    let (m1, m2) = mincuts(&spec)?;
    let mut v = json!({ "schema_version": 1, "mincut1": m1, "mincut2": m2 });
    if let Some(r) = args.r {
        let w = wiretap_mincut_capacity(&spec, r)?;
        v["wiretap"] = serde_json::to_value(&w)?;
    }
    Ok(v)
}

pub fn primepower(args: &PrimepowerArgs) -> Result<Value> {
    let q = max_prime_power(args.d, args.n)?;
    let mut v = json!({
        "schema_version": 1,
        "d": args.d,
        "n": args.n,
        "q": q,
        "log2_q_per_use": (q as f64).log2() / args.n as f64,
        "log2_d": (args.d as f64).log2(),
    });
    if let Some(top) = args.scan {
        let rows: Vec<Value> = (1..=top)
            .map(|n| -> Result<Value> {
                let q = max_prime_power(args.d, n)?;
                Ok(json!({ "n": n, "q": q, "log2_q_per_use": (q as f64).log2() / n as f64 }))
            })
            .collect::<Result<_>>()?;
        v["scan"] = json!(rows);
    }
    Ok(v)
}
