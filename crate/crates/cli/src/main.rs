//! `melon-rsk`: command-line adapter over the library. Exit code 0 on
//! success, 1 on a domain error (reported as JSON on stderr) or a failed
//! statistical check, 2 on a usage error.

use std::fmt::Debug;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use melon_rsk::env::EnvClass;
use melon_rsk::figure::{render_svg, FigureDims};
use melon_rsk::gibbs::{sample_nu, sample_walks, DriftVector, GibbsError};
use melon_rsk::json::{
    self, env_from_json, env_to_json, lemon_report_to_value, matrix_from_json, pair_from_json, pair_to_json,
    pair_to_value, parse_point, parse_rational, parse_rational_list, pretty, tableau_to_value, tuple_to_value,
    JsonError,
};
use melon_rsk::lattice::{embed_binary, embed_matrix, greene_tableaux, lattice_rsk_pair, LatticeError};
use melon_rsk::lemon::{lemon, LemonError, ProbeSchedule};
use melon_rsk::lpp::{lpp_multi, optimizer, EndpointSpec, LppError, LppValue, OptimizerSide};
use melon_rsk::pitman::{is_pitman_ordered, melon_direct, melon_iterated, PitmanError};
use melon_rsk::rsk::{rsk_inverse, rsk_t, RskError};
use melon_rsk::suite::{run_suite, Criterion, StatTest, StatTestConfig, SuiteConfig, SuiteError};
use melon_rsk::{EnvError, PathEnv};

const SEED_VAR: &str = "MELON_RSK_SEED";

#[derive(Parser)]
#[command(name = "melon-rsk", version, about = "Melon, lemon and RSK maps on path environments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an env and describe it.
    Env(EnvArgs),
    /// Last passage value between endpoint tuples.
    Lpp(LppArgs),
    /// The melon map.
    Melon(MelonArgs),
    /// The lemon map with a probe schedule.
    Lemon(LemonArgs),
    /// Finite-time RSK: env to (melon, pattern) pair.
    Rsk(RskArgs),
    /// Inverse of finite-time RSK.
    RskInverse(RskInverseArgs),
    /// Matrix RSK via multi-path values.
    #[command(subcommand)]
    Lattice(LatticeCommand),
    /// Random walks and uniform ordered tuples.
    #[command(subcommand)]
    Sample(SampleCommand),
    /// A statistical test.
    Test(TestArgs),
    /// SVG figure of an env, optionally beside its melon.
    Plot(PlotArgs),
    /// Run acceptance criteria.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct EnvArgs {
    #[arg(long)]
    env: PathBuf,
    /// Rewrite the env in canonical form.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Args)]
struct LppArgs {
    #[arg(long)]
    env: PathBuf,
    /// Start point "x,n".
    #[arg(long)]
    from: String,
    /// End point "y,m".
    #[arg(long)]
    to: String,
    /// Number of paths, all sharing the endpoints.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    side: SideArg,
    /// Write the chosen optimizer's jump times here.
    #[arg(long)]
    emit_optimizer: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Iterated,
    Both,
}

#[derive(Args)]
struct MelonArgs {
    #[arg(long)]
    env: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Iterated)]
    method: MethodArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare all grid multi-path values of the input and its melon.
    #[arg(long)]
    check_isometry: bool,
}

#[derive(Args)]
struct LemonArgs {
    #[arg(long)]
    env: PathBuf,
    /// Probe horizons "t1,t2,..."; defaults to a quarter, half and all of the horizon.
    #[arg(long)]
    probes: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct RskArgs {
    #[arg(long)]
    env: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RskInverseArgs {
    #[arg(long)]
    pair: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum LatticeCommand {
    /// Tableaux and the pair of the embedded env.
    Rsk {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        dual: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The embedded env (`--dual` for the piecewise-linear one).
    Embed {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        dual: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SampleCommand {
    /// Independent Bernoulli walks.
    Walks {
        #[arg(long)]
        n: usize,
        /// Step means "d1,d2,...".
        #[arg(long)]
        drifts: String,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A uniform ordered tuple of walks with a given endpoint.
    Nu {
        /// Endpoint "x1,x2,..." (nonincreasing integers).
        #[arg(long)]
        endpoint: String,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TestKind {
    Gibbs,
    Burke,
    Lln,
}

#[derive(Args)]
struct TestArgs {
    #[arg(value_enum)]
    which: TestKind,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    env: PathBuf,
    /// Draw the melon in a second panel.
    #[arg(long)]
    melon: bool,
    #[arg(long)]
    out: PathBuf,
    /// Panel width in pixels.
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated criterion names; replaces the config's list.
    #[arg(long)]
    criteria: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Json(#[from] JsonError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Lpp(#[from] LppError),
    #[error(transparent)]
    Pitman(#[from] PitmanError),
    #[error(transparent)]
    Lemon(#[from] LemonError),
    #[error(transparent)]
    Rsk(#[from] RskError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Gibbs(#[from] GibbsError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("{message}")]
    Domain { kind: &'static str, message: String },
}

/// Variants that only forward another module's error.
const WRAPPERS: [&str; 4] = ["Env", "Lemon", "Lpp", "Rsk"];

/// The enum variant named by a `Debug` rendering, looking through
/// forwarding variants.
fn variant_name(e: &impl Debug) -> String {
    let text = format!("{e:?}");
    let mut rest = text.as_str();
    loop {
        let name: String = rest.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
        match rest[name.len()..].strip_prefix('(') {
            Some(inner) if WRAPPERS.contains(&name.as_str()) => rest = inner,
            _ => return name,
        }
    }
}

impl CliError {
    fn kind(&self) -> String {
        match self {
            CliError::Io { .. } => "IoError".into(),
            CliError::Json(JsonError::Parse(_)) => "ParseError".into(),
            CliError::Json(JsonError::Version(_)) => "UnsupportedFormat".into(),
            CliError::Json(JsonError::Invalid(_)) => "InvalidDocument".into(),
            CliError::Json(JsonError::Env(e)) | CliError::Env(e) => variant_name(e),
            CliError::Json(JsonError::Pattern(e)) | CliError::Rsk(e) => variant_name(e),
            CliError::Json(JsonError::Matrix(e)) | CliError::Lattice(e) => variant_name(e),
            CliError::Lpp(e) => variant_name(e),
            CliError::Pitman(e) => variant_name(e),
            CliError::Lemon(e) => variant_name(e),
            CliError::Gibbs(e) => variant_name(e),
            CliError::Suite(_) => "ConfigError".into(),
            CliError::Domain { kind, .. } => (*kind).into(),
        }
    }
}

type Outcome = Result<bool, CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.into(), message: e.to_string() })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io { path: path.into(), message: e.to_string() })
}

/// Writes to `out`, or to stdout when absent.
fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_env(path: &Path) -> Result<PathEnv, CliError> {
    Ok(env_from_json(&read(path)?)?)
}

/// Command-line seed, else `MELON_RSK_SEED`, else the config's seed.
fn resolve_seed(flag: Option<u64>, config: u64) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_VAR) {
        Ok(text) => text.trim().parse().map_err(|_| CliError::Domain {
            kind: "BadSeed",
            message: format!("{SEED_VAR} must be an unsigned integer, got {text:?}"),
        }),
        Err(_) => Ok(config),
    }
}

fn describe_env(args: &EnvArgs) -> Outcome {
    let env = load_env(&args.env)?;
    if let Some(out) = &args.out {
        write(out, &env_to_json(&env))?;
    }
    let classes: Vec<&str> = EnvClass::ALL.into_iter().filter(|&c| env.class_check(c)).map(EnvClass::name).collect();
    let summary = json!({
        "format": json::FORMAT,
        "n": env.n(),
        "horizon": env.horizon(),
        "grid": env.grid(),
        "classes": classes,
        "pitman_ordered": is_pitman_ordered(&env),
    });
    print!("{}", pretty(&summary));
    Ok(true)
}

fn value_text(v: &LppValue) -> String {
    match v {
        LppValue::Finite(r) => r.to_string(),
        LppValue::NegInf => "-inf".into(),
    }
}

fn run_lpp(args: &LppArgs) -> Outcome {
    let env = load_env(&args.env)?;
    let (from, to) = (parse_point(&args.from)?, parse_point(&args.to)?);
    let spec = EndpointSpec::repeated(from, to, args.k);
    let value = lpp_multi(&env, &spec)?;
    println!("{}", value_text(&value));
    if let Some(out) = &args.emit_optimizer {
        let side = match args.side {
            SideArg::Left => OptimizerSide::Leftmost,
            SideArg::Right => OptimizerSide::Rightmost,
        };
        write(out, &pretty(&tuple_to_value(&optimizer(&env, &spec, side)?)))?;
    }
    Ok(true)
}

/// Every `(x, n)^k → (y, 1)^k` value over the merged grids agrees.
fn isometric(env: &PathEnv, w: &PathEnv) -> Result<bool, CliError> {
    let mut grid = env.grid();
    grid.extend(w.grid());
    grid.sort();
    grid.dedup();
    let n = env.n();
    for (i, x) in grid.iter().enumerate() {
        for y in &grid[i..] {
            for k in 1..=n {
                let spec = EndpointSpec::points(x, n, y, 1, k);
                if lpp_multi(env, &spec)? != lpp_multi(w, &spec)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn run_melon(args: &MelonArgs) -> Outcome {
    let env = load_env(&args.env)?;
    let w = match args.method {
        MethodArg::Direct => melon_direct(&env).env,
        MethodArg::Iterated => melon_iterated(&env).env,
        MethodArg::Both => {
            let (direct, iterated) = (melon_direct(&env).env, melon_iterated(&env).env);
            if direct != iterated {
                return Err(CliError::Domain {
                    kind: "MethodMismatch",
                    message: "direct and iterated melons differ".into(),
                });
            }
            iterated
        }
    };
    emit(args.out.as_deref(), &env_to_json(&w))?;
    if args.check_isometry {
        let ok = isometric(&env, &w)?;
        eprintln!("isometry: {}", if ok { "pass" } else { "fail" });
        return Ok(ok);
    }
    Ok(true)
}

fn run_lemon(args: &LemonArgs) -> Outcome {
    let env = load_env(&args.env)?;
    let schedule = match &args.probes {
        Some(text) => ProbeSchedule::Explicit(parse_rational_list(text)?),
        None => ProbeSchedule::default_for(env.horizon()),
    };
    let result = match lemon(&env, &schedule) {
        Ok(result) => result,
        Err(LemonError::NoStabilization(partial)) => {
            if let Some(report) = &args.report {
                write(report, &pretty(&lemon_report_to_value(&partial)))?;
            }
            return Err(LemonError::NoStabilization(partial).into());
        }
        Err(e) => return Err(e.into()),
    };
    emit(args.out.as_deref(), &env_to_json(&result.env))?;
    if let Some(report) = &args.report {
        write(report, &pretty(&lemon_report_to_value(&result)))?;
    }
    Ok(true)
}

fn run_lattice(command: &LatticeCommand) -> Outcome {
    match command {
        LatticeCommand::Rsk { matrix, dual, out } => {
            let a = matrix_from_json(&read(matrix)?)?;
            let (q, p) = greene_tableaux(&a, *dual)?;
            let pair = lattice_rsk_pair(&a, *dual)?;
            let doc = json!({
                "format": json::FORMAT,
                "Q": tableau_to_value(&q),
                "P": tableau_to_value(&p),
                "pair": pair_to_value(&pair),
            });
            emit(out.as_deref(), &pretty(&doc))?;
        }
        LatticeCommand::Embed { matrix, dual, out } => {
            let a = matrix_from_json(&read(matrix)?)?;
            let env = if *dual { embed_binary(&a)? } else { embed_matrix(&a) };
            emit(out.as_deref(), &env_to_json(&env))?;
        }
    }
    Ok(true)
}

fn run_sample(command: &SampleCommand) -> Outcome {
    match command {
        SampleCommand::Walks { n, drifts, t, seed, out } => {
            let d = DriftVector::new(parse_rational_list(drifts)?)?;
            if d.n() != *n {
                return Err(CliError::Domain {
                    kind: "DimensionMismatch",
                    message: format!("--n {n} but {} drifts", d.n()),
                });
            }
            let env = sample_walks(&d, *t, resolve_seed(*seed, 1)?)?;
            emit(out.as_deref(), &env_to_json(&env))?;
        }
        SampleCommand::Nu { endpoint, t, seed, out } => {
            let x = endpoint
                .split(',')
                .map(|v| {
                    let r = parse_rational(v)?;
                    r.to_i64().filter(|_| r.is_integer()).ok_or_else(|| {
                        JsonError::Invalid(format!("endpoint entries must be integers, got {v:?}"))
                    })
                })
                .collect::<Result<Vec<i64>, JsonError>>()?;
            let env = sample_nu(&x, *t, resolve_seed(*seed, 1)?)?;
            emit(out.as_deref(), &env_to_json(&env))?;
        }
    }
    Ok(true)
}

fn run_test(args: &TestArgs) -> Outcome {
    let config = match &args.config {
        Some(path) => StatTestConfig::from_json(&read(path)?)?,
        None => StatTestConfig::default(),
    };
    let seed = resolve_seed(args.seed, config.seed)?;
    let which = match args.which {
        TestKind::Gibbs => StatTest::Gibbs,
        TestKind::Burke => StatTest::Burke,
        TestKind::Lln => StatTest::Lln,
    };
    let report = config.run(which, seed)?;
    let mut doc = serde_json::to_value(&report).expect("reports serialize");
    doc["format"] = json!(json::FORMAT);
    emit(args.report.as_deref(), &pretty(&doc))?;
    Ok(report.pass)
}

fn run_plot(args: &PlotArgs) -> Outcome {
    let env = load_env(&args.env)?;
    let defaults = FigureDims::default();
    let dims = FigureDims {
        panel_width: args.width.unwrap_or(defaults.panel_width),
        height: args.height.unwrap_or(defaults.height),
        ..defaults
    };
    let svg = if args.melon {
        let w = melon_iterated(&env).env;
        render_svg(&[("f", &env), ("Wf", &w)], dims)
    } else {
        render_svg(&[("f", &env)], dims)
    };
    write(&args.out, &svg)?;
    Ok(true)
}

fn run_suite_command(args: &SuiteArgs) -> Outcome {
    let mut config = match &args.config {
        Some(path) => SuiteConfig::from_json(&read(path)?)?,
        None => SuiteConfig::default(),
    };
    if let Some(list) = &args.criteria {
        config.criteria =
            list.split(',').filter(|s| !s.is_empty()).map(str::parse).collect::<Result<Vec<Criterion>, _>>()?;
    }
    config.seed = resolve_seed(args.seed, config.seed)?;
    let report = run_suite(&config)?;
    let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    emit(args.report.as_deref(), &text)?;
    for c in &report.criteria {
        eprintln!("{:<12} {} ({} cases, {} failures)", c.criterion.name(), if c.pass { "PASS" } else { "FAIL" }, c.cases, c.failures);
    }
    Ok(report.pass)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Env(args) => describe_env(args),
        Command::Lpp(args) => run_lpp(args),
        Command::Melon(args) => run_melon(args),
        Command::Lemon(args) => run_lemon(args),
        Command::Rsk(args) => {
            let env = load_env(&args.env)?;
            emit(args.out.as_deref(), &pair_to_json(&rsk_t(&env)))?;
            Ok(true)
        }
        Command::RskInverse(args) => {
            let pair = pair_from_json(&read(&args.pair)?)?;
            emit(args.out.as_deref(), &env_to_json(&rsk_inverse(&pair)?))?;
            Ok(true)
        }
        Command::Lattice(command) => run_lattice(command),
        Command::Sample(command) => run_sample(command),
        Command::Test(args) => run_test(args),
        Command::Plot(args) => run_plot(args),
        Command::Suite(args) => run_suite_command(args),
    }
}

fn error_value(e: &CliError) -> Value {
    json!({ "format": json::FORMAT, "error": { "kind": e.kind(), "message": e.to_string() } })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", error_value(&e));
            ExitCode::from(1)
        }
    }
}
