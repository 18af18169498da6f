//! The `caidgeo` command line.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::capacity::{solve_capacity, SolverOptions};
use crate::certify::{
    appendix_b_counterexample, certify_theorem1, check_linear, check_quadratic_cubic, converse_curve,
    example1_fourth_power, sample_neighborhood, vertex_samples, Branch, DecayCurve, SampleRecord,
};
use crate::constants::{a_coefficient, fisher_matrix, pushover_of, theorem1_constants, theorem2_constants};
use crate::corpus::{self, AnyModel, CorpusParams};
use crate::error::Error;
use crate::model::InformationModel;
use crate::quantum::CQChannel;
use crate::report::{
    CapacityBlock, CertificationBlock, ConstantsBlock, DescribeOutput, Extras, OutputState, Provenance, Report, Source,
    REPORT_VERSION,
};
use crate::spec_file::{self, ChannelSpecFile, Kind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;
pub const EXIT_VIOLATIONS: i32 = 5;

/// Growth of `A` between the truncation and ten times it beyond which `A` counts as a lower bound.
const A_GROWTH_TOL: f64 = 1e-3;

/// Vector entries printed in the text summary; the JSON report has all of them.
const SHOWN_ENTRIES: usize = 12;

/// Points along each converse curve.
const CURVE_POINTS: usize = 21;

#[derive(Debug, Parser)]
#[command(
    name = "caidgeo",
    version,
    about = "Capacity-achieving input distributions, cone constants and decay certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity, output state, optimal input set and its support.
    Capacity(RunArgs),
    /// Decay constants for one theorem.
    Constants(RunArgs),
    /// Constants plus sampled certification.
    Certify(RunArgs),
    /// List the built-in channels.
    Corpus(CorpusArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Channel file (JSON).
    #[arg(long, conflicts_with = "corpus")]
    pub file: Option<PathBuf>,
    /// Built-in channel name.
    #[arg(long)]
    pub corpus: Option<String>,
    /// Input count for identity-n and zeta.
    #[arg(long)]
    pub n: Option<usize>,
    /// Crossover probability for bsc-p.
    #[arg(long)]
    pub p: Option<f64>,
    /// Output truncation for example-2 and zeta.
    #[arg(long)]
    pub trunc: Option<usize>,
    /// Polygon side count for example-1.
    #[arg(long)]
    pub sides: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// 1 and 2 for classical channels, 3 and 4 for classical-quantum ones.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub theorem: u8,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Duality-gap tolerance of the capacity solver.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Worker threads for certification shards.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Directory for report.json and the CSV tables.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the report as JSON instead of a summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Only classical-quantum entries.
    #[arg(long)]
    pub quantum: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence { .. } | Error::TooLarge(_) | Error::Degenerate(_) => EXIT_SOLVER,
            _ => EXIT_INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// What a command produced: text for standard output and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
    pub report: Option<Report>,
}

#[derive(Debug, PartialEq, Eq, Clone, Copy)]
pub enum Stage {
    Capacity,
    Constants,
    Certify,
}

/// The numeric settings of a run, independent of where the channel came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub stage: Stage,
    pub theorem: u8,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Request {
    pub fn new(stage: Stage, args: &RunArgs) -> Self {
        Request {
            stage,
            theorem: args.theorem,
            samples: args.samples,
            seed: args.seed,
            tol: args.tol,
        }
    }
}

/// Per-sample rows and converse curves behind a certification block.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub samples: Vec<SampleRecord>,
    pub curves: Vec<DecayCurve>,
}

pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CAIDGEO_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            let _ = std::io::stdout().flush();
            out.code
        }
        Err(e) => {
            eprintln!("caidgeo: {}", e.message);
            e.code
        }
    }
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    let (args, stage) = match command {
        Command::Corpus(a) => return Ok(list_corpus(a)),
        Command::Capacity(a) => (a, Stage::Capacity),
        Command::Constants(a) => (a, Stage::Constants),
        Command::Certify(a) => (a, Stage::Certify),
    };
    let spec = load_source(&args.source)?;
    let req = Request::new(stage, args);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::input(format!("cannot start {} worker threads: {e}", args.jobs.unwrap_or(0))))?;
    let (report, artifacts) = pool.install(|| build_report(&spec, &req))?;
    if let Some(dir) = &args.out {
        write_outputs(dir, &report, &artifacts)?;
    }
    let code = exit_code(&report);
    let stdout = if args.json { report.to_json() } else { render(&report) };
    Ok(Outcome {
        stdout,
        code,
        report: Some(report),
    })
}

/// Exit status for a finished report: violations first, then a withheld branch.
pub fn exit_code(r: &Report) -> i32 {
    if r.certification.as_ref().is_some_and(|c| c.violations > 0) {
        EXIT_VIOLATIONS
    } else if r.constants.as_ref().is_some_and(|c| c.partial) {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    }
}

fn list_corpus(a: &CorpusArgs) -> Outcome {
    let entries = corpus::list(a.quantum);
    let stdout = if a.json {
        let v: Vec<_> = entries
            .iter()
            .map(|c| serde_json::json!({"name": c.name, "description": c.description, "quantum": c.quantum}))
            .collect();
        serde_json::to_string_pretty(&v).expect("listing serializes") + "\n"
    } else {
        let width = entries.iter().map(|c| c.name.len()).max().unwrap_or(0);
        entries
            .iter()
            .map(|c| format!("{:width$}  {}\n", c.name, c.description))
            .collect()
    };
    Outcome {
        stdout,
        code: EXIT_OK,
        report: None,
    }
}

fn load_source(s: &SourceArgs) -> Result<ChannelSpecFile, CliError> {
    let params = CorpusParams {
        n: s.n,
        p: s.p,
        truncation: s.trunc,
        sides: s.sides,
    };
    match (&s.file, &s.corpus) {
        (Some(path), None) => {
            if params != CorpusParams::default() {
                return Err(CliError::input("--n, --p, --trunc and --sides only apply with --corpus"));
            }
            spec_file::load(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
        }
        (None, Some(name)) => {
            let e = corpus::build(name, params)?;
            let n = e.model.inputs();
            Ok(ChannelSpecFile {
                kind: if e.model.is_quantum() { Kind::ClassicalQuantum } else { Kind::Classical },
                model: e.model,
                constraint: e.constraint,
                labels: (0..n).map(|x| x.to_string()).collect(),
                corpus: Some(e.name),
                params: Some(params),
                output_truncation: e.output_truncation,
            })
        }
        _ => Err(CliError::input("give exactly one of --file or --corpus")),
    }
}

/// Runs the pipeline up to `req.stage` on an already loaded channel.
pub fn build_report(spec: &ChannelSpecFile, req: &Request) -> Result<(Report, Artifacts), CliError> {
    if !(req.tol > 0.0 && req.tol.is_finite()) {
        return Err(CliError::input(format!("tol must be positive, got {}", req.tol)));
    }
    if !(1..=4).contains(&req.theorem) {
        return Err(CliError::input(format!("theorem must be 1 to 4, got {}", req.theorem)));
    }
    let quantum_theorem = req.theorem >= 3;
    let mut source = Source {
        kind: spec.kind,
        corpus: spec.corpus.clone(),
        params: spec.params,
        labels: spec.labels.clone(),
        embedded: false,
    };
    let truncated = match (req.stage, req.theorem % 2, &spec.model) {
        (Stage::Capacity, _, _) | (_, 1, _) => false,
        (_, _, AnyModel::Classical(_)) => a_keeps_growing(spec, req)?,
        _ => false,
    };
    match &spec.model {
        AnyModel::Classical(w) if quantum_theorem => {
            source.embedded = true;
            run(&CQChannel::from_classical(w), spec, source, req, truncated)
        }
        AnyModel::Classical(w) => run(w, spec, source, req, truncated),
        AnyModel::Quantum(_) if !quantum_theorem && req.stage != Stage::Capacity => Err(CliError::input(format!(
            "theorem {} is for classical channels; use --theorem {} for a classical-quantum channel",
            req.theorem,
            req.theorem + 2
        ))),
        AnyModel::Quantum(q) => run(q, spec, source, req, truncated),
    }
}

/// Whether `A` for a truncated countable-output channel grows when the truncation is
/// multiplied by ten, in which case the computed value is only a lower bound.
fn a_keeps_growing(spec: &ChannelSpecFile, args: &Request) -> Result<bool, CliError> {
    let (Some(t), Some(name)) = (spec.output_truncation, &spec.corpus) else {
        return Ok(false);
    };
    let a_at = |trunc: usize| -> Result<f64, CliError> {
        let params = CorpusParams {
            truncation: Some(trunc),
            ..spec.params.unwrap_or_default()
        };
        let e = corpus::build(name, params)?;
        let AnyModel::Classical(w) = &e.model else {
            return Ok(f64::NAN);
        };
        let sol = solve_capacity(w, &e.constraint, &solver_options(args))?;
        let f = fisher_matrix(&sol.model, &sol.center);
        Ok(a_coefficient(&sol.model, &sol.center, &f).value)
    };
    let (a0, a1) = (a_at(t)?, a_at(t.saturating_mul(10))?);
    let growth = (a1 - a0) / a0.abs();
    info!("A at truncation {t}: {a0}; at {}: {a1}; relative growth {growth:.3e}", t * 10);
    Ok(!(growth.abs() <= A_GROWTH_TOL))
}

fn solver_options(args: &Request) -> SolverOptions {
    SolverOptions {
        tol: args.tol,
        ..SolverOptions::default()
    }
}

fn run<M>(
    model: &M,
    spec: &ChannelSpecFile,
    source: Source,
    args: &Request,
    a_truncated: bool,
) -> Result<(Report, Artifacts), CliError>
where
    M: InformationModel,
    M::Output: DescribeOutput,
{
    let stage = args.stage;
    let sol = solve_capacity(model, &spec.constraint, &solver_options(args))?;
    info!("capacity {} after {} iterations", sol.capacity, sol.iterations);
    let mut report = Report {
        version: REPORT_VERSION,
        command: match stage {
            Stage::Capacity => "capacity",
            Stage::Constants => "constants",
            Stage::Certify => "certify",
        }
        .to_string(),
        capacity: CapacityBlock::of(&sol, &source.labels),
        source,
        constants: None,
        certification: None,
        extras: None,
        provenance: Provenance {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: args.seed,
            tol: args.tol,
            samples: if stage == Stage::Certify { args.samples } else { 0 },
            solver_iterations: sol.iterations,
        },
    };
    let mut artifacts = Artifacts::default();
    if stage == Stage::Capacity {
        return Ok((report, artifacts));
    }
    let union = pushover_of(&sol)?;
    if args.theorem % 2 == 1 {
        let t1 = theorem1_constants(&sol, &union, args.seed)?;
        if stage == Stage::Certify {
            let s = sample_neighborhood(&sol, &union, t1.delta, args.samples, args.seed)?;
            let (cert, records) = certify_theorem1(&sol, &t1, &s);
            artifacts.samples = records;
            report.certification = Some(CertificationBlock::new(args.samples, vec![cert], Vec::new()));
        }
        report.constants = Some(ConstantsBlock {
            theorem: args.theorem,
            quadratic: Some(t1),
            decay: None,
            a_coefficient: None,
            partial: false,
        });
    } else {
        let fisher = fisher_matrix(&sol.model, &sol.center);
        let mut a = a_coefficient(&sol.model, &sol.center, &fisher);
        if a_truncated {
            warn!("A keeps growing with the output truncation; reporting it as a lower bound");
            a.lower_bound_only = true;
        }
        let t2 = theorem2_constants(&sol, &union, &fisher, &a, args.seed)?;
        let linear = t2.gamma1.value > 0.0;
        let partial = !linear && t2.partial;
        if stage == Stage::Certify {
            let taus: Vec<f64> = (0..CURVE_POINTS).map(|k| k as f64 / (CURVE_POINTS - 1) as f64).collect();
            let mut certs = Vec::new();
            if linear {
                let mut s = sample_neighborhood(&sol, &union, f64::INFINITY, args.samples, args.seed)?;
                s.extend(vertex_samples(&sol)?);
                let (cert, records) = check_linear(&sol, t2.gamma1.value, &s);
                certs.push(cert);
                artifacts.samples = records;
                artifacts.curves.push(converse_curve(&sol, &union, &t2, &fisher, Branch::Linear, &taus)?);
            } else if let (Some(g2), Some(delta), false) = (&t2.gamma2, t2.delta, partial) {
                let s = sample_neighborhood(&sol, &union, delta, args.samples, args.seed)?;
                let (cert, records) = check_quadratic_cubic(&sol, g2.value, a.cubed, delta, &s);
                certs.push(cert);
                artifacts.samples = records;
                match converse_curve(&sol, &union, &t2, &fisher, Branch::Quadratic, &taus) {
                    Ok(c) => artifacts.curves.push(c),
                    Err(e) => warn!("no converse curve: {e}"),
                }
            } else {
                warn!("quadratic-branch constants are unavailable; certification skipped");
            }
            report.certification = Some(CertificationBlock::new(args.samples, certs, artifacts.curves.clone()));
        }
        report.constants = Some(ConstantsBlock {
            theorem: args.theorem,
            quadratic: None,
            a_coefficient: Some(a),
            decay: Some(t2),
            partial,
        });
    }
    if stage == Stage::Certify {
        report.extras = extras_for(spec)?;
    }
    Ok((report, artifacts))
}

fn extras_for(spec: &ChannelSpecFile) -> Result<Option<Extras>, CliError> {
    Ok(match spec.corpus.as_deref() {
        Some("example-1") => Some(Extras::FourthPower(example1_fourth_power())),
        Some("appendix-b") => Some(Extras::Counterexample(appendix_b_counterexample()?)),
        _ => None,
    })
}

fn write_outputs(dir: &Path, report: &Report, artifacts: &Artifacts) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::input(format!("cannot write to {}: {e}", dir.display()));
    let csv_err = |e: csv::Error| CliError::input(format!("cannot write CSV to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("report.json"), report.to_json()).map_err(io)?;
    if report.certification.is_none() {
        return Ok(());
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(dir.join("samples.csv"))
        .map_err(csv_err)?;
    w.write_record(["distance", "I", "bound", "margin"]).map_err(csv_err)?;
    for r in &artifacts.samples {
        w.write_record([r.distance, r.info, r.bound, r.margin].map(|x| x.to_string()))
            .map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    for (k, c) in artifacts.curves.iter().enumerate() {
        let name = if artifacts.curves.len() == 1 { "curve.csv".to_string() } else { format!("curve-{k}.csv") };
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(dir.join(name))
            .map_err(csv_err)?;
        w.write_record(["tau", "I", "lower", "upper"]).map_err(csv_err)?;
        for i in 0..c.tau.len() {
            let upper = c.upper[i].map(|u| u.to_string()).unwrap_or_default();
            w.write_record([c.tau[i].to_string(), c.info[i].to_string(), c.lower[i].to_string(), upper])
                .map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
    }
    Ok(())
}

fn fmt_vec(v: &[f64]) -> String {
    // Tiny negative solver residue would otherwise print as -0.000000.
    let parts: Vec<String> = v
        .iter()
        .take(SHOWN_ENTRIES)
        .map(|x| format!("{:.6}", if x.abs() < 5e-7 { 0.0 } else { *x }))
        .collect();
    if v.len() > SHOWN_ENTRIES {
        format!("[{}, ... ({} entries)]", parts.join(", "), v.len())
    } else {
        format!("[{}]", parts.join(", "))
    }
}

fn render(r: &Report) -> String {
    let mut s = String::new();
    let c = &r.capacity;
    let name = r.source.corpus.as_deref().unwrap_or("file");
    s += &format!("channel      {name} ({:?})\n", r.source.kind);
    s += &format!("capacity     {:.12} nats\n", c.capacity);
    s += &format!("maximizer    {}\n", fmt_vec(&c.maximizer));
    match &c.output {
        OutputState::Distribution { probabilities } => s += &format!("output       {}\n", fmt_vec(probabilities)),
        OutputState::Density { eigenvalues, .. } => s += &format!("output spec  {}\n", fmt_vec(eigenvalues)),
    }
    let letters: Vec<&str> = c.support_labels.iter().take(SHOWN_ENTRIES).map(String::as_str).collect();
    let more = if c.support_labels.len() > SHOWN_ENTRIES { format!(" ... ({} letters)", c.support_labels.len()) } else { String::new() };
    s += &format!("letters of Λ {}{more}\n", letters.join(" "));
    s += &format!("optimal set  {} vertices, affine dimension {}\n", c.optimal_vertices.len(), c.caid_dimension);
    for v in &c.optimal_vertices {
        s += &format!("  {}\n", fmt_vec(v));
    }
    if let Some(k) = &r.constants {
        s += &format!("theorem      {}\n", k.theorem);
        if let Some(t) = &k.quadratic {
            s += &format!("  beta       {:.9}\n", t.beta.value);
            s += &format!(
                "  r          {:.9}{}\n",
                t.min_output_norm.value,
                if t.min_output_norm_exact { "" } else { " (local search)" }
            );
            s += &format!("  Gamma      {:.9e}\n", t.gamma);
            s += &format!("  delta      {:.9e}\n", t.delta);
        }
        if let Some(t) = &k.decay {
            s += &format!("  Gamma1     {:.9e}\n", t.gamma1.value);
            if let Some(g) = &t.gamma2 {
                s += &format!("  Gamma2     {:.9e}\n", g.value);
            }
            if let Some(d) = t.delta {
                s += &format!("  delta      {d:.9e}\n");
            }
            s += &format!("  tr Sigma   {:.9e}\n", t.trace_sigma);
        }
        if let Some(a) = &k.a_coefficient {
            s += &format!("  A          {:.9e}{}\n", a.value, if a.lower_bound_only { " (lower bound only)" } else { "" });
        }
        if k.partial {
            s += "  partial: quadratic-branch constants withheld\n";
        }
    }
    if let Some(cb) = &r.certification {
        for cert in cb.certificates.iter().chain(cb.curves.iter().map(|c| &c.certificate)) {
            s += &format!(
                "certificate  {}: {} checks, {} violations ({} warnings), worst margin {}\n",
                cert.theorem,
                cert.samples,
                cert.severe_violations(),
                cert.warnings,
                cert.worst_margin.map_or("n/a".to_string(), |m| format!("{m:.3e}"))
            );
        }
    }
    match &r.extras {
        Some(Extras::FourthPower(e)) => {
            s += &format!("fourth power ratio {:.6}, fitted exponent {:.4}\n", e.extrapolated_ratio, e.fitted_exponent);
        }
        Some(Extras::Counterexample(e)) => {
            s += &format!("counterexample eps {:.10}, refuted {}\n", e.epsilon, e.refuted);
            s += &format!("  P   {}\n", fmt_vec(&e.refuting_point));
            s += &format!("  v0  {}\n", fmt_vec(&e.v0));
        }
        Some(Extras::Zeta(z)) => {
            s += &format!("zeta Sigma(0,0) growth {}\n", fmt_vec(&z.growth_ratios));
        }
        None => {}
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("caidgeo").chain(args.iter().copied()))
            .unwrap()
            .command
    }

    #[test]
    fn corpus_listing_counts() {
        let all = execute(&parse(&["corpus"])).unwrap();
        assert_eq!(all.stdout.lines().count(), 8);
        let q = execute(&parse(&["corpus", "--quantum"])).unwrap();
        assert_eq!(q.stdout.lines().count(), 2);
    }

    #[test]
    fn unknown_corpus_lists_names() {
        let e = execute(&parse(&["capacity", "--corpus", "nope"])).unwrap_err();
        assert_eq!(e.code, EXIT_INPUT);
        assert!(e.message.contains("appendix-b"));
    }

    #[test]
    fn exit_code_ladder() {
        let out = execute(&parse(&["certify", "--corpus", "bsc-p", "--theorem", "2", "--samples", "300"])).unwrap();
        assert_eq!(out.code, EXIT_OK);
        let mut r = out.report.unwrap();
        r.constants.as_mut().unwrap().partial = true;
        assert_eq!(exit_code(&r), EXIT_PARTIAL);
        r.certification.as_mut().unwrap().violations = 1;
        assert_eq!(exit_code(&r), EXIT_VIOLATIONS);
    }

    #[test]
    fn quantum_needs_quantum_theorem() {
        let e = execute(&parse(&["constants", "--corpus", "cq-pure-pair", "--theorem", "1"])).unwrap_err();
        assert_eq!(e.code, EXIT_INPUT);
    }
}
