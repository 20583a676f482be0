use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::Value;
use sha2::{Digest, Sha256};

use distlab_core::discrimination::{
    check_perfect, check_unambiguous, global_distinguishable, kind_preservation_fuzz, local_global_fuzz,
    ppt_distinguishability, random_of_kind, theorem1_ppt_invariance, Mode,
};
use distlab_core::linalg::{hermitian_eigen, DimVector};
use distlab_core::povm::{
    counterexample_c4, counterexample_c4_product, is_projective, random_orthonormal_states, restrict_povm, verify_kind,
    verify_povm, verify_sep, Cuts, Povm, PovmKind, DEFAULT_TOL,
};
use distlab_core::sdp::{solve, SdpOptions, SdpProblem};
use distlab_core::states::{bell_states, domino_states, extended_domino_basis, generalized_bell_states, StateSet};

use crate::report::{summarize, Counterexample, Payload, Report, RunManifest, SCHEMA_VERSION};

/// Environment variable overriding the default verification tolerance.
pub const TOL_ENV: &str = "DISTLAB_TOL";

#[derive(Parser, Debug)]
#[command(
    name = "distlab",
    version,
    about = "Distinguishability of multipartite quantum states"
)]
struct Cli {
    /// Print a human-readable summary instead of the JSON report.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Record wall-clock start and end times in the manifest.
    #[arg(long, global = true)]
    timestamps: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Summary,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit a state family or a random POVM.
    Gen(GenArgs),
    /// Check that a POVM is valid and belongs to a class.
    Verify(VerifyArgs),
    /// Check whether a POVM discriminates a set of states.
    Discriminate(DiscriminateArgs),
    /// Solve an SDP, or the PPT discrimination program of a state set.
    Sdp(SdpArgs),
    /// Compare the PPT optimum of a set with that of its embedding.
    Theorem1(Theorem1Args),
    /// Restrict random measurements to a smaller system and check them.
    Fuzz(FuzzArgs),
    /// The four-outcome projective measurement whose restriction is not projective.
    Counterexample,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Bell,
    Gbell,
    Domino,
    DominoExt,
    Orthonormal,
    Povm,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Local dimensions, e.g. `4,4`.
    #[arg(long)]
    dims: Option<DimVector>,
    /// Number of states (`orthonormal`) or outcomes (`povm`).
    #[arg(long)]
    count: Option<usize>,
    /// Measurement class for `povm`.
    #[arg(long)]
    kind: Option<PovmKind>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    povm: PathBuf,
    #[arg(long, default_value = "general")]
    kind: PovmKind,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct DiscriminateArgs {
    #[arg(long)]
    states: PathBuf,
    /// Without a POVM, decides global distinguishability.
    #[arg(long)]
    povm: Option<PathBuf>,
    #[arg(long, default_value = "perfect")]
    mode: Mode,
    /// Outcomes treated as inconclusive in unambiguous mode.
    #[arg(long, value_delimiter = ',')]
    inconclusive: Vec<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Residual tolerance of the solver.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn options(&self) -> SdpOptions {
        SdpOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            ..SdpOptions::default()
        }
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct SdpInput {
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long)]
    states: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SdpArgs {
    #[command(flatten)]
    input: SdpInput,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct Theorem1Args {
    #[arg(long)]
    states: PathBuf,
    #[arg(long)]
    new_dims: DimVector,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[arg(long, value_delimiter = ',', default_value = "general,ppt,sep,locc1")]
    kinds: Vec<PovmKind>,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// State set to test; three Bell states by default.
    #[arg(long, conflicts_with = "sub_dims")]
    states: Option<PathBuf>,
    /// System the random measurements are drawn in.
    #[arg(long, default_value = "3,3")]
    new_dims: DimVector,
    /// Check only that restriction to these dimensions preserves each kind.
    #[arg(long)]
    sub_dims: Option<DimVector>,
    /// Tolerance of the kind checks.
    #[arg(long)]
    tol: Option<f64>,
}

/// Result of one invocation: the process exit code and both output streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(message: impl std::fmt::Display) -> Self {
        Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

struct Context {
    digests: BTreeMap<String, String>,
    env_tol: Option<f64>,
}

impl Context {
    /// Reads `T` from a JSON file holding either `T` itself or a report
    /// whose payload is a `T`.
    fn read<T: DeserializeOwned>(&mut self, path: &PathBuf) -> Result<T, String> {
        let shown = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|e| format!("cannot read {shown}: {e}"))?;
        self.digests.insert(shown.clone(), hex::encode(Sha256::digest(&bytes)));
        let mut value: Value = serde_json::from_slice(&bytes).map_err(|e| format!("{shown}: {e}"))?;
        let mut prefix = "";
        if let Some(version) = value.get("schema_version") {
            if version != SCHEMA_VERSION {
                return Err(format!("{shown}: at `schema_version`: unsupported version {version}"));
            }
            value = value
                .get_mut("payload")
                .and_then(|p| p.get_mut("data"))
                .map(Value::take)
                .ok_or_else(|| format!("{shown}: at `payload.data`: missing report payload"))?;
            prefix = "payload.data.";
        }
        serde_path_to_error::deserialize(value).map_err(|e| {
            let at = e.path().to_string();
            format!("{shown}: at `{prefix}{at}`: {}", e.inner())
        })
    }

    fn tol(&self, flag: Option<f64>) -> f64 {
        flag.or(self.env_tol).unwrap_or(DEFAULT_TOL)
    }
}

/// Runs the CLI on `argv` (including the program name), reading the
/// verification tolerance override from the environment.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    run_with_tol(argv, std::env::var(TOL_ENV).ok())
}

/// Like [`run`] with an explicit value for the tolerance override.
pub fn run_with_tol<I, S>(argv: I, env_tol: Option<String>) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let env_tol = match env_tol.map(|s| s.trim().parse::<f64>().map_err(|_| s)) {
        None => None,
        Some(Ok(t)) if t.is_finite() && t >= 0.0 => Some(t),
        Some(Ok(t)) => return Outcome::usage(format!("{TOL_ENV}={t} is not a non-negative tolerance")),
        Some(Err(s)) => return Outcome::usage(format!("{TOL_ENV}={s:?} is not a number")),
    };
    let started_at = cli.timestamps.then(now);
    let mut ctx = Context {
        digests: BTreeMap::new(),
        env_tol,
    };
    let (name, seed, result) = dispatch(&cli.command, &mut ctx);
    let payload = match result {
        Ok(p) => p,
        Err(message) => return Outcome::usage(message),
    };
    let report = Report {
        schema_version: SCHEMA_VERSION.to_string(),
        manifest: RunManifest {
            command: name.to_string(),
            arguments: argv.iter().skip(1).cloned().collect(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digests: ctx.digests,
            started_at,
            finished_at: cli.timestamps.then(now),
        },
        payload,
    };
    let code = if report.payload.passes() { 0 } else { 1 };
    let stdout = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Summary => summarize(&report).expect("current schema"),
    };
    Outcome {
        code,
        stdout,
        stderr: String::new(),
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn dispatch(cmd: &Command, ctx: &mut Context) -> (&'static str, Option<u64>, Result<Payload, String>) {
    match cmd {
        Command::Gen(a) => ("gen", a.seed, gen(a)),
        Command::Verify(a) => ("verify", None, verify(a, ctx)),
        Command::Discriminate(a) => ("discriminate", None, discriminate(a, ctx)),
        Command::Sdp(a) => ("sdp", Some(a.solver.seed), sdp(a, ctx)),
        Command::Theorem1(a) => ("theorem1", Some(a.solver.seed), theorem1(a, ctx)),
        Command::Fuzz(a) => ("fuzz", Some(a.seed), fuzz(a, ctx)),
        Command::Counterexample => ("counterexample", None, counterexample()),
    }
}

fn err(e: distlab_core::Error) -> String {
    e.to_string()
}

fn require<T: Copy>(value: Option<T>, flag: &str, family: &str) -> Result<T, String> {
    value.ok_or_else(|| format!("--family {family} requires --{flag}"))
}

fn square_dims(dims: Option<&DimVector>, family: &str) -> Result<(usize, usize), String> {
    let d = dims.ok_or_else(|| format!("--family {family} requires --dims"))?;
    match d.as_slice() {
        &[m, n] => Ok((m, n)),
        _ => Err(format!("--family {family} needs two local dimensions, got {d}")),
    }
}

fn fixed_dims(dims: Option<&DimVector>, expected: &[usize], family: &str) -> Result<(), String> {
    match dims {
        Some(d) if d.as_slice() != expected => Err(format!("--family {family} is defined on {expected:?} only")),
        _ => Ok(()),
    }
}

fn gen(a: &GenArgs) -> Result<Payload, String> {
    let set = match a.family {
        Family::Bell => {
            fixed_dims(a.dims.as_ref(), &[2, 2], "bell")?;
            bell_states()
        }
        Family::Domino => {
            fixed_dims(a.dims.as_ref(), &[3, 3], "domino")?;
            domino_states()
        }
        Family::Gbell => {
            let (m, n) = square_dims(a.dims.as_ref(), "gbell")?;
            if m != n {
                return Err(format!("--family gbell needs equal dimensions, got {m},{n}"));
            }
            generalized_bell_states(m).map_err(err)?
        }
        Family::DominoExt => {
            let (m, n) = square_dims(a.dims.as_ref(), "domino-ext")?;
            extended_domino_basis(m, n).map_err(err)?
        }
        Family::Orthonormal => {
            let dims = a.dims.as_ref().ok_or("--family orthonormal requires --dims")?;
            let count = require(a.count, "count", "orthonormal")?;
            let seed = require(a.seed, "seed", "orthonormal")?;
            random_orthonormal_states(dims, count, seed).map_err(err)?
        }
        Family::Povm => {
            let dims = a.dims.as_ref().ok_or("--family povm requires --dims")?;
            let seed = require(a.seed, "seed", "povm")?;
            let kind = a.kind.unwrap_or_default();
            let p = match a.count {
                Some(n) if kind == PovmKind::General => distlab_core::povm::random_povm(dims, n, seed),
                Some(_) => return Err("--count applies to general POVMs only".into()),
                None => random_of_kind(kind, dims, seed),
            };
            return p.map(Payload::Povm).map_err(err);
        }
    };
    Ok(Payload::StateSet(set))
}

fn verify(a: &VerifyArgs, ctx: &mut Context) -> Result<Payload, String> {
    let p: Povm = ctx.read(&a.povm)?;
    let report = verify_kind(&p, a.kind, ctx.tol(a.tol)).map_err(err)?;
    Ok(Payload::KindReport(report))
}

fn discriminate(a: &DiscriminateArgs, ctx: &mut Context) -> Result<Payload, String> {
    let set: StateSet = ctx.read(&a.states)?;
    let tol = ctx.tol(a.tol);
    let Some(path) = &a.povm else {
        return global_distinguishable(&set, tol)
            .map(Payload::GlobalVerdict)
            .map_err(err);
    };
    let p: Povm = ctx.read(path)?;
    let verdict = match a.mode {
        Mode::Perfect if !a.inconclusive.is_empty() => {
            return Err("--inconclusive applies to --mode unambiguous only".into())
        }
        Mode::Perfect => check_perfect(&p, &set, tol),
        Mode::Unambiguous => check_unambiguous(&p, &set, &a.inconclusive, tol),
    };
    verdict.map(Payload::Verdict).map_err(err)
}

fn sdp(a: &SdpArgs, ctx: &mut Context) -> Result<Payload, String> {
    let opts = a.solver.options();
    if let Some(path) = &a.input.problem {
        let problem: SdpProblem = ctx.read(path)?;
        return solve(&problem, &opts).map(Payload::SdpSolution).map_err(err);
    }
    let path = a.input.states.as_ref().expect("clap enforces one input");
    let set: StateSet = ctx.read(path)?;
    ppt_distinguishability(&set, &Cuts::AllOneVsRest, &opts)
        .map(Payload::PptReport)
        .map_err(err)
}

fn theorem1(a: &Theorem1Args, ctx: &mut Context) -> Result<Payload, String> {
    let set: StateSet = ctx.read(&a.states)?;
    theorem1_ppt_invariance(&set, &a.new_dims, &Cuts::AllOneVsRest, &a.solver.options())
        .map(Payload::Invariance)
        .map_err(err)
}

fn fuzz(a: &FuzzArgs, ctx: &mut Context) -> Result<Payload, String> {
    if let Some(sub) = &a.sub_dims {
        let tol = ctx.tol(a.tol);
        return kind_preservation_fuzz(&a.kinds, &a.new_dims, sub, a.trials, a.seed, tol)
            .map(Payload::Harness)
            .map_err(err);
    }
    if a.tol.is_some() {
        return Err("--tol applies to kind preservation runs (--sub-dims) only".into());
    }
    let set = match &a.states {
        Some(path) => ctx.read(path)?,
        None => bell_states().take(3).map_err(err)?,
    };
    local_global_fuzz(&set, &a.kinds, &a.new_dims, a.trials, a.seed)
        .map(Payload::Harness)
        .map_err(err)
}

fn counterexample() -> Result<Payload, String> {
    let povm = counterexample_c4();
    let product_form = counterexample_c4_product();
    let restriction = restrict_povm(&povm, &DimVector::single(3).map_err(err)?).map_err(err)?;
    let valid = verify_povm(&povm, 1e-12).map_err(err)?.passes;
    let projective = is_projective(&povm, 1e-12).map_err(err)?;
    let restriction_valid = verify_povm(&restriction, 1e-12).map_err(err)?.passes;
    let restriction_projective = is_projective(&restriction, 1e-12).map_err(err)?;
    let restricted_spectrum = hermitian_eigen(&restriction.elements()[0]).map_err(err)?.values;
    let product_form_separable = verify_sep(&product_form, 1e-12).map_err(err)?;
    let passes = valid && projective && product_form_separable && restriction_valid && !restriction_projective;
    Ok(Payload::Counterexample(Box::new(Counterexample {
        povm,
        valid,
        projective,
        product_form,
        product_form_separable,
        restriction,
        restriction_valid,
        restriction_projective,
        restricted_spectrum,
        passes,
    })))
}
