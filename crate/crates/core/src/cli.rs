//! Command-line front end.
//!
//! Exit codes: 0 success or pass, 1 test failure, 2 usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::canon::canonical_code;
use crate::embed::{
    degree_profile, direction_marks, rho_sampler, strip_closed, IidMarkedSampler, MarkLaw, PercolationBall,
    RhoPrimeSampler,
};
use crate::error::{Result, UrtError};
use crate::format::write_network;
use crate::generators::{
    canopy_sampler, chain_cover_sampler, point_mass_sampler, regular_tree_ball, sierpinski_graph, star_graph,
    OffspringLaw, PointMass, RayFromEndpoint, UniformRootSampler,
};
use crate::hyperbolic::{build_horoforest, random_isometry, ray_metrics, Horoball, IdealPoint, MobiusMap};
use crate::network::RootedNetwork;
use crate::rng::SeedStream;
use crate::sampler::{RootedLawSampler, SharedSampler};
use crate::stats::{
    class_table_csv, convergence_check, involution_test, mtp_test, sampler_consistency, tightness_report, ConstantMass,
    DegreeIndicator, MassFunction, Source, TestReport, MTP_Z_THRESHOLD,
};

#[derive(Debug, Parser)]
#[command(name = "urtlab", version, about = "Unimodular random rooted trees: samplers, embeddings and tests")]
pub struct Cli {
    /// Master seed; every random stream is derived from it by name
    #[arg(long, global = true, env = "URTLAB_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw rooted balls and print them in the edge-list format
    Sample(SampleArgs),
    /// Draw labeled percolation balls on the d-regular tree
    Embed(EmbedArgs),
    /// Run a statistical test and print a JSON report
    #[command(subcommand)]
    Test(TestCommand),
    /// Same as `test converge`
    Converge(ConvergeArgs),
    /// Same as `test tightness`
    Tightness(TightnessArgs),
    /// Horoball forest ray traces
    Hyperbolic(HyperbolicArgs),
}

#[derive(Debug, Subcommand)]
enum TestCommand {
    /// Involution invariance at the root edge
    Involution(InvolutionArgs),
    /// Mass-transport principle for a built-in mass function
    Mtp(MtpArgs),
    /// Tightness of a family of finite graphs
    Tightness(TightnessArgs),
    /// Local convergence of finite graphs to a target law
    Converge(ConvergeArgs),
    /// Agreement of ball statistics drawn at two radii
    Consistency(ConsistencyArgs),
}

/// Fixture selection shared by sampling subcommands.
#[derive(Debug, Args, Serialize)]
struct LawArgs {
    /// canopy, single_vertex, line, regular:K, ray_from_endpoint,
    /// chain_cover:W1,..,WK, or a finite graph (sierpinski:N, star:N,
    /// regular_ball:D,N) with a uniform root
    #[arg(long)]
    mu: String,
    /// Replace mu by its direction-marked embedding in the d-regular tree
    #[arg(long)]
    d: Option<usize>,
    /// Add an iid uniform[0,1] coordinate to every vertex mark
    #[arg(long)]
    iid_marks: bool,
}

#[derive(Debug, Args, Serialize)]
struct SampleArgs {
    #[command(flatten)]
    law: LawArgs,
    #[arg(long, default_value_t = 3)]
    radius: u32,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Print one canonical code per line instead of the networks
    #[arg(long)]
    codes: bool,
    #[arg(long, default_value_t = 0.0)]
    quantization: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EmbedArgs {
    #[arg(long)]
    mu: String,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    radius: u32,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Add direction labels to closed edges
    #[arg(long)]
    directions: bool,
    /// Print the open cluster of the root instead of the whole ball
    #[arg(long)]
    strip: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the root degree profile and alpha as JSON
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ReportArgs {
    /// JSON report destination (stdout when absent)
    #[arg(long)]
    json: Option<PathBuf>,
    /// Per-class frequency table
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct InvolutionArgs {
    #[command(flatten)]
    law: LawArgs,
    /// Depth of the compared balls
    #[arg(long, default_value_t = 2)]
    radius: u32,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    quantization: f64,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Debug, Args, Serialize)]
struct MtpArgs {
    #[command(flatten)]
    law: LawArgs,
    /// const:C or deg:K (mass 1 when the sender has degree K)
    #[arg(long, default_value = "deg:1")]
    mass: String,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = MTP_Z_THRESHOLD)]
    threshold: f64,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Debug, Args, Serialize)]
struct TightnessArgs {
    /// Finite graph, repeatable (star:N, sierpinski:N, regular_ball:D,N)
    #[arg(long = "graph", required = true)]
    graphs: Vec<String>,
    #[arg(long, default_value_t = 1)]
    r: u32,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Debug, Args, Serialize)]
struct ConvergeArgs {
    /// Finite graph, repeatable, in sequence order
    #[arg(long = "graph", required = true)]
    graphs: Vec<String>,
    /// Target law; consecutive members are compared when absent
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = 2)]
    radius: u32,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Enumerate every root of the finite graphs instead of sampling
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ConsistencyArgs {
    #[command(flatten)]
    law: LawArgs,
    #[arg(long, default_value_t = 2)]
    radius: u32,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    quantization: f64,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Debug, Args, Serialize)]
struct HyperbolicArgs {
    #[arg(long, default_value_t = 3)]
    qmax: i64,
    #[arg(long, default_value_t = crate::hyperbolic::DEFAULT_DELTA)]
    delta: f64,
    /// Probability of keeping each lattice edge
    #[arg(long, default_value_t = 1.0)]
    keep: f64,
    /// Ray length
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    window_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    window_hi: f64,
    /// Move the configuration by a random isometry
    #[arg(long)]
    isometry: bool,
    /// CSV trace destination
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Provenance block embedded in every JSON output.
#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    subcommand: &'a str,
    seed: u64,
    streams: Vec<String>,
    config: &'a C,
    result: R,
}

enum Outcome {
    Done,
    Verdict(bool),
}

fn usage(msg: impl Into<String>) -> UrtError {
    UrtError::Domain(msg.into())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| usage(format!("bad {what} '{x}'")))).collect()
}

/// Finite graph fixtures.
pub fn finite_fixture(name: &str) -> Result<RootedNetwork> {
    let (head, arg) = name.split_once(':').unwrap_or((name, ""));
    match head {
        "sierpinski" => sierpinski_graph(parse_list::<u32>(arg, "level")?[0]),
        "star" => star_graph(parse_list::<usize>(arg, "size")?[0]),
        "regular_ball" => match parse_list::<u32>(arg, "parameter")?[..] {
            [d, n] => regular_tree_ball(d as usize, n),
            _ => Err(usage("regular_ball needs D,N")),
        },
        _ => Err(usage(format!("unknown finite graph '{name}'"))),
    }
}

/// Sampler fixtures by name.
pub fn fixture(name: &str) -> Result<SharedSampler> {
    let (head, arg) = name.split_once(':').unwrap_or((name, ""));
    Ok(match head {
        "canopy" => Arc::new(canopy_sampler()),
        "single_vertex" => Arc::new(point_mass_sampler(PointMass::SingleVertex)?),
        "line" => Arc::new(point_mass_sampler(PointMass::Line)?),
        "regular" => Arc::new(point_mass_sampler(PointMass::Regular(parse_list::<usize>(arg, "degree")?[0]))?),
        "ray_from_endpoint" => Arc::new(RayFromEndpoint),
        "chain_cover" => {
            let mut w = vec![0.0];
            w.extend(parse_list::<f64>(arg, "weight")?);
            Arc::new(chain_cover_sampler(OffspringLaw::new(&w)?)?)
        }
        "sierpinski" | "star" | "regular_ball" => Arc::new(UniformRootSampler::new(finite_fixture(name)?, name)),
        _ => return Err(usage(format!("unknown fixture '{name}'"))),
    })
}

fn build_law(a: &LawArgs) -> Result<SharedSampler> {
    let mut s = fixture(&a.mu)?;
    if a.iid_marks {
        s = Arc::new(IidMarkedSampler::new(s, MarkLaw::Uniform { lo: 0.0, hi: 1.0 }));
    }
    if let Some(d) = a.d {
        s = Arc::new(RhoPrimeSampler::new(rho_sampler(s, d)?));
    }
    Ok(s)
}

fn parse_mass(s: &str) -> Result<Box<dyn MassFunction>> {
    match s.split_once(':') {
        Some(("const", c)) => Ok(Box::new(ConstantMass(c.parse().map_err(|_| usage(format!("bad constant '{c}'")))?))),
        Some(("deg", k)) => Ok(Box::new(DegreeIndicator(k.parse().map_err(|_| usage(format!("bad degree '{k}'")))?))),
        _ => Err(usage(format!("unknown mass function '{s}'"))),
    }
}

fn write_target(path: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit<C: Serialize, R: Serialize>(
    sub: &str,
    seed: u64,
    streams: &[&str],
    config: &C,
    result: R,
    json: &Option<PathBuf>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let env =
        Envelope { subcommand: sub, seed, streams: streams.iter().map(|s| s.to_string()).collect(), config, result };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| UrtError::Io(e.to_string()))?;
    text.push('\n');
    write_target(json, &text, stdout)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    Ok(())
}

fn report_outcome<C: Serialize>(
    sub: &str,
    seed: u64,
    stream: &str,
    config: &C,
    rep: TestReport,
    out: &ReportArgs,
    stdout: &mut dyn Write,
) -> Result<Outcome> {
    if let Some(p) = &out.csv {
        std::fs::write(p, class_table_csv(&rep.diagnostics))?;
    }
    let passed = rep.passed();
    let mut rep = rep;
    rep.diagnostics.truncate(crate::stats::MAX_DIAGNOSTICS);
    emit(sub, seed, &[stream], config, &rep, &out.json, stdout)?;
    Ok(Outcome::Verdict(passed))
}

fn family(graphs: &[String]) -> Result<Vec<(String, RootedNetwork)>> {
    graphs.iter().map(|g| Ok((g.clone(), finite_fixture(g)?))).collect()
}

fn run_converge(seed: u64, a: &ConvergeArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    check_n(a.n)?;
    let graphs = family(&a.graphs)?;
    let seq: Vec<Source> = graphs.iter().map(|(_, g)| Source::Finite(g)).collect();
    let target = a.target.as_deref().map(fixture).transpose()?;
    let target = target.as_ref().map(|t| Source::Sampler(&**t));
    let rep = convergence_check(&seq, target, a.radius, 0.0, a.n, a.exhaustive, SeedStream::new(seed, "converge"))?;
    emit("converge", seed, &["converge"], a, &rep, &a.json, stdout)?;
    Ok(Outcome::Done)
}

fn run_tightness(seed: u64, a: &TightnessArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    let (rep, rows) = tightness_report(&family(&a.graphs)?, a.r, a.m, a.eps)?;
    #[derive(Serialize)]
    struct Out<'a> {
        report: &'a TestReport,
        rows: &'a [crate::stats::TightnessRow],
    }
    emit("tightness", seed, &[], a, Out { report: &rep, rows: &rows }, &a.report.json, stdout)?;
    // tight families pass; a non-tight flag is a finding, not an error
    Ok(Outcome::Verdict(rep.passed()))
}

#[derive(Serialize)]
struct RaySummary {
    horoball: usize,
    tangency: IdealPoint,
    points: usize,
    final_distance: f64,
    final_speed: f64,
    final_limit_error: f64,
}

fn run_hyperbolic(seed: u64, a: &HyperbolicArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    let stream = SeedStream::new(seed, "hyperbolic");
    let mut rng = stream.child("forest").rng(0);
    let half = i64::try_from(a.n).map_err(|_| usage("--n too large"))?;
    let forest = build_horoforest(a.qmax, (a.window_lo, a.window_hi), a.delta, a.keep, half, &mut rng)?;
    let m = if a.isometry { random_isometry(&mut stream.child("isometry").rng(0))? } else { MobiusMap::identity() };
    let mut csv = String::from("horoball,n,distance,speed,disc_x,disc_y\n");
    let mut summaries = Vec::new();
    for path in &forest.paths {
        // rays start at lattice index 0 when the component contains it
        let skip = (-path.start).max(0) as usize;
        if skip >= path.points.len() || path.points.len() - skip < 2 {
            continue;
        }
        let pts: Vec<_> = path.points[skip..].iter().map(|&p| m.apply(p)).collect();
        let h: &Horoball = &forest.horoballs[path.horoball];
        let limit = m.apply_ideal(h.tangency());
        let t = ray_metrics(&pts, pts.len() - 1, limit)?;
        for line in t.to_csv().lines().skip(1) {
            csv.push_str(&format!("{},{line}\n", path.horoball));
        }
        let last = pts.len() - 1;
        summaries.push(RaySummary {
            horoball: path.horoball,
            tangency: limit,
            points: pts.len(),
            final_distance: t.distances[last],
            final_speed: t.speeds[last],
            final_limit_error: t.limit_error[last],
        });
    }
    #[derive(Serialize)]
    struct Out {
        horoballs: usize,
        components: usize,
        min_separation: f64,
        isometry: MobiusMap,
        rays: Vec<RaySummary>,
    }
    let out = Out {
        horoballs: forest.horoballs.len(),
        components: forest.paths.len(),
        min_separation: forest.min_separation(),
        isometry: m,
        rays: summaries,
    };
    match &a.out {
        Some(p) => {
            std::fs::write(p, &csv)?;
            emit("hyperbolic", seed, &["hyperbolic/forest", "hyperbolic/isometry"], a, &out, &a.json, stdout)?;
        }
        None if a.json.is_some() => {
            emit("hyperbolic", seed, &["hyperbolic/forest", "hyperbolic/isometry"], a, &out, &a.json, stdout)?;
            stdout.write_all(csv.as_bytes())?;
        }
        None => stdout.write_all(csv.as_bytes())?,
    }
    Ok(Outcome::Done)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<Outcome> {
    let seed = cli.seed;
    match &cli.command {
        Command::Sample(a) => {
            check_n(a.n)?;
            let s = build_law(&a.law)?;
            let nets = crate::rng::par_draws(a.n, SeedStream::new(seed, "sample"), |rng, _| s.sample(a.radius, rng))?;
            let mut text = String::new();
            for (i, g) in nets.iter().enumerate() {
                if a.codes {
                    text.push_str(&canonical_code(g, a.radius, a.quantization)?.to_hex());
                    text.push('\n');
                } else {
                    write_network(&mut text, g, Some(&i.to_string()));
                }
            }
            write_target(&a.out, &text, stdout)?;
            Ok(Outcome::Done)
        }
        Command::Embed(a) => {
            check_n(a.n)?;
            let mu = fixture(&a.mu)?;
            let rho = rho_sampler(mu.clone(), a.d)?;
            let stream = SeedStream::new(seed, "embed");
            let nets = crate::rng::par_draws(a.n, stream, |rng, _| {
                let radius = if a.directions { a.radius + 1 } else { a.radius };
                let mut ball = PercolationBall::new(rho.sample(radius, rng)?, a.d)?;
                if a.directions {
                    let marked = direction_marks(&ball, rng);
                    let g = crate::network::ball(marked.network(), marked.network().root(), a.radius)?;
                    ball = PercolationBall::new(g, a.d)?;
                }
                Ok(if a.strip { strip_closed(&ball) } else { ball.into_network() })
            })?;
            let mut text = String::new();
            for (i, g) in nets.iter().enumerate() {
                write_network(&mut text, g, Some(&i.to_string()));
            }
            write_target(&a.out, &text, stdout)?;
            if a.json.is_some() {
                let p = degree_profile(&*mu, a.d, 10_000, SeedStream::new(seed, "embed/profile"))?;
                emit("embed", seed, &["embed", "embed/profile"], a, &p, &a.json, stdout)?;
            }
            Ok(Outcome::Done)
        }
        Command::Test(TestCommand::Involution(a)) => {
            check_n(a.n)?;
            let s = build_law(&a.law)?;
            let rep = involution_test(&*s, a.radius, a.quantization, a.n, SeedStream::new(seed, "involution"))?;
            report_outcome("test involution", seed, "involution", a, rep, &a.report, stdout)
        }
        Command::Test(TestCommand::Mtp(a)) => {
            check_n(a.n)?;
            let s = build_law(&a.law)?;
            let f = parse_mass(&a.mass)?;
            let rep = mtp_test(&*s, &*f, a.n, a.threshold, SeedStream::new(seed, "mtp"))?;
            report_outcome("test mtp", seed, "mtp", a, rep, &a.report, stdout)
        }
        Command::Test(TestCommand::Consistency(a)) => {
            check_n(a.n)?;
            let s = build_law(&a.law)?;
            let rep = sampler_consistency(&*s, a.radius, a.quantization, a.n, SeedStream::new(seed, "consistency"))?;
            report_outcome("test consistency", seed, "consistency", a, rep, &a.report, stdout)
        }
        Command::Test(TestCommand::Tightness(a)) | Command::Tightness(a) => run_tightness(seed, a, stdout),
        Command::Test(TestCommand::Converge(a)) | Command::Converge(a) => run_converge(seed, a, stdout),
        Command::Hyperbolic(a) => run_hyperbolic(seed, a, stdout),
    }
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    match dispatch(&cli, stdout) {
        Ok(Outcome::Done) | Ok(Outcome::Verdict(true)) => 0,
        Ok(Outcome::Verdict(false)) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
