mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use polylab::caps::{macbeath, make_cap, u_value, v_at};
use polylab::covering::{cap_covering, s0, saturate, verify_covering, DEFAULT_PATIENCE};
use polylab::stats::{plot_tsv, run_experiment, summary_json, write_records_csv, write_text, ExperimentConfig};
use polylab::{Error, ErrorKind, PolytopeSpec};

use manifest::RunManifest;

const EXIT_PARSE: u8 = 2;
const EXIT_GEOMETRY: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;
const EXIT_RUNTIME: u8 = 5;

#[derive(Parser)]
#[command(name = "polylab", version, about = "Caps, cap coverings and Poisson polytope experiments")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate v, u, Macbeath regions, caps and face counts.
    Geometry(GeometryArgs),
    /// Build and verify an economic cap covering at level s.
    Cover(CoverArgs),
    /// Run a Monte Carlo experiment from a JSON config.
    Clt(CltArgs),
    /// Check a run manifest against its embedded config.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Args)]
struct GeometryArgs {
    /// `cube:2`, `simplex:3`, `cross-polytope:3` or inline JSON {"dim":..,"vertices":[..]}.
    #[arg(long)]
    polytope: String,
    /// v at a point, comma separated.
    #[arg(long, value_name = "X")]
    v_at: Option<String>,
    /// u = V(M(z, 1)) at a point.
    #[arg(long, value_name = "Z")]
    u_at: Option<String>,
    /// Macbeath region M(z, λ) at a point; see --lambda.
    #[arg(long, value_name = "Z")]
    macbeath: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Cap direction; see --depth.
    #[arg(long, value_name = "U")]
    cap: Option<String>,
    #[arg(long)]
    depth: Option<f64>,
    /// Flag count F(P).
    #[arg(long)]
    flags: bool,
    #[arg(long)]
    f_vector: bool,
    #[arg(long)]
    volume: bool,
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long)]
    polytope: String,
    /// Level s of the saturated system.
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Uniform samples for the sampled checks.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    /// Dilation check at P(v ≤ λs).
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[arg(long, default_value_t = DEFAULT_PATIENCE)]
    patience: usize,
    /// Accept s above s₀ = (2d)^(−2d)·V(P).
    #[arg(long)]
    allow_above_s0: bool,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CltArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory for outputs without an explicit path in the config.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Write the manifest only.
    #[arg(long)]
    dry_run: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Parse => EXIT_PARSE,
            ErrorKind::Geometry => EXIT_GEOMETRY,
            ErrorKind::Precondition => EXIT_PRECONDITION,
            ErrorKind::Runtime => EXIT_RUNTIME,
        };
        Failure { code, message: e.to_string() }
    }
}

fn parse_vector(s: &str, d: usize, what: &str) -> Result<Vec<f64>, Failure> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == d => Ok(v),
        Ok(v) => Err(Error::Parse(format!("{what}: expected {d} coordinates, got {}", v.len())).into()),
        Err(e) => Err(Error::Parse(format!("{what}: {e}")).into()),
    }
}

fn seed_override(seed: u64) -> Result<u64, Failure> {
    match std::env::var("POLYLAB_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| Error::Parse(format!("POLYLAB_SEED: not an integer: {s:?}")).into()),
        Err(_) => Ok(seed),
    }
}

fn geometry(a: &GeometryArgs) -> Result<Value, Failure> {
    let p = PolytopeSpec::parse(&a.polytope)?.build()?;
    let d = p.dim;
    let mut out = Map::new();
    if let Some(x) = &a.v_at {
        let x = parse_vector(x, d, "--v-at")?;
        if !p.contains(&x) {
            return Err(Error::PreconditionViolated("point lies outside the polytope".into()).into());
        }
        out.insert("v".into(), json!(v_at(&p, &x)?));
    }
    if let Some(z) = &a.u_at {
        let z = parse_vector(z, d, "--u-at")?;
        out.insert("u".into(), json!(u_value(&p, &z)?));
    }
    if let Some(z) = &a.macbeath {
        let z = parse_vector(z, d, "--macbeath")?;
        let m = macbeath(&p, &z, a.lambda)?;
        out.insert("macbeath".into(), json!({"lambda": a.lambda, "volume": m.volume, "vertices": m.vertices}));
    }
    if let Some(u) = &a.cap {
        let u = parse_vector(u, d, "--cap")?;
        let t = a.depth.ok_or_else(|| Failure::from(Error::Parse("--cap needs --depth".into())))?;
        let c = make_cap(&p, &u, t)?;
        out.insert("cap".into(), json!({"direction": c.direction, "depth": c.depth, "support": c.support, "volume": c.volume}));
    }
    if a.flags {
        out.insert("F".into(), json!(p.flag_count()));
    }
    if a.f_vector {
        out.insert("f_vector".into(), json!(p.f_vector()));
    }
    if a.volume || out.is_empty() {
        out.insert("volume".into(), json!(p.volume));
    }
    Ok(Value::Object(out))
}

fn cover(a: &CoverArgs) -> Result<(), Failure> {
    let p = PolytopeSpec::parse(&a.polytope)?.build()?;
    let seed = seed_override(a.seed)?;
    let bound = s0(p.dim) * p.volume;
    if a.s > bound && !a.allow_above_s0 {
        return Err(Failure {
            code: EXIT_PRECONDITION,
            message: format!(
                "s = {} exceeds s0 = (2d)^(-2d)·V(P) = {bound} for d = {}; pass --allow-above-s0 to run anyway",
                a.s, p.dim
            ),
        });
    }
    let system = saturate(&p, a.s, seed, a.patience)?;
    let cov = cap_covering(&p, system)?;
    let report = verify_covering(&p, &cov, a.budget, a.lambda, seed);
    let mut text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    text.push('\n');
    match &a.out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn resolve(out_dir: &Path, configured: &Option<String>, default: &str) -> PathBuf {
    match configured {
        Some(p) => PathBuf::from(p),
        None => out_dir.join(default),
    }
}

fn clt(a: &CltArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Failure { code: EXIT_PARSE, message: format!("{}: {e}", a.config.display()) })?;
    let mut config = ExperimentConfig::from_json(&text)
        .map_err(|e| Failure { code: EXIT_PARSE, message: format!("{}: {e}", a.config.display()) })?;
    config.seed = seed_override(config.seed)?;
    let d = PolytopeSpec::parse(&config.polytope)?.build()?.dim;
    let constants = config.constants.resolve(d)?;
    let records = resolve(&a.out_dir, &config.outputs.records_csv, "records.csv");
    let summary = resolve(&a.out_dir, &config.outputs.summary_json, "summary.json");
    let plot = resolve(&a.out_dir, &config.outputs.plot_tsv, "plot.tsv");
    let manifest_path = resolve(&a.out_dir, &config.outputs.manifest_json, "manifest.json");
    std::fs::create_dir_all(&a.out_dir).map_err(Error::from)?;
    let outputs = [&records, &summary, &plot].iter().map(|p| p.display().to_string()).collect();
    let cfg_value = serde_json::to_value(&config).map_err(Error::from)?;
    let manifest = RunManifest::new(cfg_value, config.seed, constants, outputs);
    write_text(&manifest_path, &manifest.to_json())?;
    if a.dry_run {
        return Ok(());
    }
    let out = run_experiment(&config)?;
    write_records_csv(&records, d, &out.records)?;
    write_text(&summary, &summary_json(&out.summary))?;
    write_text(&plot, &plot_tsv(&out.summary))?;
    if let Some(e) = out.error {
        return Err(Failure { code: EXIT_RUNTIME, message: format!("run stopped early, partial outputs kept: {e}") });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Failure { code: EXIT_RUNTIME, message: e.to_string() })?;
    }
    match &cli.command {
        Command::Geometry(a) => {
            println!("{}", geometry(a)?);
            Ok(())
        }
        Command::Cover(a) => cover(a),
        Command::Clt(a) => clt(a),
        Command::Verify { manifest } => {
            let text = std::fs::read_to_string(manifest).map_err(Error::from)?;
            let m = RunManifest::load(&text)?;
            println!("{}", json!({"ok": true, "config_hash": m.config_hash}));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("polylab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
