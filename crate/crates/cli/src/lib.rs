//! Front end for `ranklab`: parses arguments and spec files, runs one
//! operation, and produces a deterministic JSON [`Report`].

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use ranklab::certificates::{
    asymmetry_statistic, conservativity_fraction, ergodic_matching, mixing_decay,
    non_ergodic_check, npc_certificate, partner_stage, pattern_measure, pwm_witness, Budget,
    Certificate, MixingQuery, NpcQuery, PatternQuery, SpacerGrowthQuery, Verdict,
};
use ranklab::sumsets::{
    ap_search, coverage_checks, descendants_in, difference_multiset, gamma_search, gap_count,
    partner_set_with, positive_differences, sumset_membership, DigitAlphabet, PartnerSide,
};
use ranklab::{Fraction, LevelRef, Measure, RankOneSpec};
use serde::Serialize;
use serde_json::{json, Value};

mod report;
pub mod schema;
mod spec_file;

pub use report::{fingerprint, Report};
pub use schema::{validate_report, REPORT_SCHEMA};
pub use spec_file::{LoadedSpec, SpecFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILS: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const COMMANDS: [&str; 18] = [
    "heights",
    "descendants",
    "diffset",
    "ap",
    "partners",
    "membership",
    "gaps",
    "coverage",
    "gamma",
    "conservativity",
    "ergodic-match",
    "pattern",
    "mixing",
    "npc",
    "pwm",
    "non-ergodic",
    "asymmetry",
    "validate",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Io(String),
    Spec(String),
    Core(ranklab::Error),
}

impl CliError {
    fn kind(&self) -> String {
        match self {
            CliError::Usage(_) => "UsageError".into(),
            CliError::Io(_) => "IoError".into(),
            CliError::Spec(_) => "SpecError".into(),
            CliError::Core(e) => {
                let debug = format!("{e:?}");
                debug
                    .split(|c: char| !c.is_alphanumeric())
                    .next()
                    .unwrap_or("Error")
                    .to_string()
            }
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Spec(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

impl From<ranklab::Error> for CliError {
    fn from(e: ranklab::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "ranklab",
    version,
    about = "Exact combinatorics and certificates for rank-one transformations"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Spec file (JSON).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Add non-authoritative decimal renderings of every rational result.
    #[arg(long, global = true)]
    approx: bool,
    /// Worker threads for parallel operations.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Cap on enumerated tuples.
    #[arg(long, global = true, env = "RANKLAB_BUDGET")]
    budget: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Column heights h_0..=h_N.
    Heights(HeightsArgs),
    /// Descendant set D(I, j).
    Descendants(LevelArgs),
    /// Difference multiset of D(I, j).
    Diffset(LevelArgs),
    /// Longest progression {x, 2x, ...} in D(I, j) - D(I, j).
    Ap(ApArgs),
    /// Partner set S(z) of a height set.
    Partners(PartnersArgs),
    /// Membership of a target in the truncated digit sumset.
    Membership(MembershipArgs),
    /// Gap counts of the digit sumset against the recursion.
    Gaps(DigitStageArgs),
    /// Coverage checks of the digit sumset.
    Coverage(DigitStageArgs),
    /// Least (n, m, γ) for a multiplier set.
    Gamma(GammaArgs),
    /// Matched-tuple fraction for a power product.
    Conservativity(ConservativityArgs),
    /// Symmetric matching by exhaustive enumeration.
    ErgodicMatch(MatchArgs),
    /// Pattern-set measure bound across partner stages.
    Pattern(PatternArgs),
    /// Decay of self-intersections over one window.
    Mixing(MixingArgs),
    /// Progression-free certificate with ratio growth conditions.
    Npc(NpcArgs),
    /// Power weak mixing witness for a (t,q) family.
    Pwm(PwmArgs),
    /// Necessary-condition failures for ergodicity of a power product.
    NonErgodic(NonErgodicArgs),
    /// Zero-side versus forward-side intersection statistic.
    Asymmetry(AsymmetryArgs),
    /// Validate a spec file or a report.
    Validate(ValidateArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Heights(_) => "heights",
            Command::Descendants(_) => "descendants",
            Command::Diffset(_) => "diffset",
            Command::Ap(_) => "ap",
            Command::Partners(_) => "partners",
            Command::Membership(_) => "membership",
            Command::Gaps(_) => "gaps",
            Command::Coverage(_) => "coverage",
            Command::Gamma(_) => "gamma",
            Command::Conservativity(_) => "conservativity",
            Command::ErgodicMatch(_) => "ergodic-match",
            Command::Pattern(_) => "pattern",
            Command::Mixing(_) => "mixing",
            Command::Npc(_) => "npc",
            Command::Pwm(_) => "pwm",
            Command::NonErgodic(_) => "non-ergodic",
            Command::Asymmetry(_) => "asymmetry",
            Command::Validate(_) => "validate",
        }
    }
}

fn parse_level(s: &str) -> Result<LevelRef, String> {
    let (stage, height) = s.split_once(':').ok_or("expected STAGE:HEIGHT")?;
    let stage = stage.trim().parse().map_err(|e| format!("stage: {e}"))?;
    let height = height.trim().parse().map_err(|e| format!("height: {e}"))?;
    Ok(LevelRef::new(stage, height))
}

fn parse_ratio(s: &str) -> Result<(i64, i64), String> {
    let (num, den) = s.split_once('/').unwrap_or((s, "1"));
    let num: i64 = num.trim().parse().map_err(|e| format!("numerator: {e}"))?;
    let den: i64 = den
        .trim()
        .parse()
        .map_err(|e| format!("denominator: {e}"))?;
    if den <= 0 {
        return Err("denominator must be positive".into());
    }
    Ok((num, den))
}

fn parse_measure(s: &str) -> Result<Measure, String> {
    let (num, den) = parse_ratio(s)?;
    if num < 0 {
        return Err("measure must be nonnegative".into());
    }
    Ok(Measure::ratio(num as u64, den as u64))
}

fn parse_fraction(s: &str) -> Result<Fraction, String> {
    parse_ratio(s).map(|(n, d)| Fraction::new(n, d))
}

#[derive(Args, Debug, Serialize)]
struct HeightsArgs {
    /// Last stage N.
    #[arg(long)]
    stages: usize,
}

#[derive(Args, Debug, Serialize)]
struct LevelArgs {
    /// Level as STAGE:HEIGHT.
    #[arg(long, value_parser = parse_level)]
    base: LevelRef,
    /// Evaluation stage j.
    #[arg(long)]
    to: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct ApArgs {
    #[command(flatten)]
    #[serde(flatten)]
    level: LevelArgs,
    #[arg(long, default_value_t = 14)]
    max_len: u32,
    /// Also report the run starting at this difference.
    #[arg(long)]
    x: Option<i64>,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum Side {
    Lower,
    Upper,
}

#[derive(Args, Debug, Serialize)]
struct PartnersArgs {
    /// Height set H_n.
    #[arg(long)]
    stage: usize,
    /// Shift z; defaults to the smallest partner stage shift.
    #[arg(long)]
    z: Option<i64>,
    #[arg(long, value_enum, default_value_t = Side::Lower)]
    side: Side,
}

#[derive(Args, Debug, Serialize)]
struct AlphabetArgs {
    /// Base k; with --digits overrides a (t,q) spec.
    #[arg(long, requires = "digits")]
    k: Option<i64>,
    #[arg(long, value_delimiter = ',', requires = "k")]
    digits: Option<Vec<i64>>,
}

#[derive(Args, Debug, Serialize)]
struct MembershipArgs {
    #[command(flatten)]
    #[serde(flatten)]
    alphabet: AlphabetArgs,
    #[arg(long)]
    n: u32,
    #[arg(long, allow_negative_numbers = true)]
    target: i64,
}

#[derive(Args, Debug, Serialize)]
struct DigitStageArgs {
    #[command(flatten)]
    #[serde(flatten)]
    alphabet: AlphabetArgs,
    #[arg(long)]
    n: u32,
}

#[derive(Args, Debug, Serialize)]
struct GammaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    alphabet: AlphabetArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    betas: Vec<i64>,
    #[arg(long, default_value_t = 8)]
    horizon: u32,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct ConservativityArgs {
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    alpha: Vec<i64>,
    #[arg(long, default_value_t = 0)]
    base_stage: usize,
    #[arg(long)]
    from: Option<usize>,
    #[arg(long)]
    to: usize,
    #[arg(long, value_parser = parse_measure, default_value = "1/10")]
    epsilon: Measure,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct MatchArgs {
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    signature: Vec<i64>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    b: Vec<i64>,
    #[arg(long, default_value_t = 1)]
    base_stage: usize,
    #[arg(long)]
    to: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct PatternArgs {
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    signature: Vec<i64>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    b: Vec<i64>,
    #[arg(long, default_value_t = 1)]
    base_stage: usize,
    #[arg(long)]
    cutoff: usize,
    /// Ratio constant D; defaults to 4^k.
    #[arg(long, value_parser = parse_measure)]
    dconst: Option<Measure>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct MixingArgs {
    /// Levels of F as STAGE:HEIGHT, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_level, required = true)]
    levels: Vec<LevelRef>,
    #[arg(long)]
    n: usize,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    samples: Option<Vec<i64>>,
    #[arg(long, default_value_t = 4096)]
    max_samples: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct NpcArgs {
    #[arg(long, default_value_t = 13)]
    kappa: u32,
    /// Base stage N of the level I_N.
    #[arg(long, default_value_t = 1)]
    base: usize,
    #[arg(long)]
    jmax: usize,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    growth_k: i64,
    #[arg(long, value_parser = parse_fraction, default_value = "1/13")]
    growth_b: Fraction,
    #[arg(long, default_value_t = 1)]
    growth_start: usize,
}

#[derive(Args, Debug, Serialize)]
struct PwmArgs {
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    alpha: Vec<i64>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    b: Vec<i64>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    horizon: u32,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct NonErgodicArgs {
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    alpha: Vec<i64>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    b: Vec<i64>,
    #[arg(long, default_value_t = 0)]
    base_stage: usize,
    #[arg(long)]
    from: Option<usize>,
    #[arg(long)]
    to: usize,
    #[arg(long, default_value_t = 12)]
    growth: usize,
}

#[derive(Args, Debug, Serialize)]
struct AsymmetryArgs {
    #[arg(long, value_parser = parse_level)]
    level: LevelRef,
    #[arg(long)]
    n: usize,
    /// Evaluation stage.
    #[arg(long)]
    eval: usize,
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    /// Report file to check against the schema.
    #[arg(long)]
    #[serde(skip)]
    report: Option<PathBuf>,
}

/// What a run produced: the report, the exit code, and where to write it.
#[derive(Debug)]
pub struct Outcome {
    pub report: Option<Report>,
    pub exit: i32,
    pub json: Option<PathBuf>,
    /// Text for help and version requests, printed instead of a report.
    pub text: Option<String>,
}

struct Computed {
    inputs: Value,
    result: Value,
    evidence: Value,
    spec_fingerprint: Option<String>,
    exit: i32,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    report: None,
                    exit: EXIT_OK,
                    json: None,
                    text: Some(e.to_string()),
                },
                _ => {
                    let text = e.to_string();
                    let message = text.trim().trim_start_matches("error: ");
                    Outcome {
                        report: Some(Report::failure("usage", "UsageError", message)),
                        exit: EXIT_USAGE,
                        json: None,
                        text: None,
                    }
                }
            };
        }
    };
    let name = cli.command.name();
    let json_path = cli.global.json.clone();
    let start = Instant::now();
    let computed = match cli.global.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(&cli))),
        None => dispatch(&cli),
    };
    let (mut report, exit) = match computed {
        Ok(c) => {
            let mut r = Report::new(name, c.spec_fingerprint, c.inputs, c.result, c.evidence);
            if cli.global.approx {
                r = r.with_approx();
            }
            (r, c.exit)
        }
        Err(e) => {
            let exit = if matches!(e, CliError::Usage(_)) {
                EXIT_USAGE
            } else {
                EXIT_ERROR
            };
            (Report::failure(name, &e.kind(), &e.message()), exit)
        }
    };
    report.duration_ms = start.elapsed().as_millis() as u64;
    Outcome {
        report: Some(report),
        exit,
        json: json_path,
        text: None,
    }
}

/// Writes the canonical report to `path`, or stdout when `None`.
pub fn emit_report(report: &Report, path: Option<&Path>) -> std::io::Result<()> {
    let text = report.to_canonical();
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())
        }
    }
}

fn load_spec(global: &Global) -> CliResult<LoadedSpec> {
    let path = global
        .spec
        .as_deref()
        .ok_or_else(|| CliError::Usage("this command needs --spec".into()))?;
    SpecFile::load(path)?.build()
}

fn alphabet(global: &Global, args: &AlphabetArgs) -> CliResult<DigitAlphabet> {
    if let (Some(k), Some(digits)) = (args.k, &args.digits) {
        return Ok(DigitAlphabet::new(k, digits.clone())?);
    }
    let loaded = load_spec(global)?;
    let tq = loaded
        .tq
        .ok_or_else(|| CliError::Usage("need --k and --digits, or a tq spec".into()))?;
    Ok(DigitAlphabet::new(tq.k(), tq.phi())?)
}

fn verdict_exit(v: Verdict) -> i32 {
    if v == Verdict::Fails {
        EXIT_FAILS
    } else {
        EXIT_OK
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("value serializes")
}

fn check_budget(budget: Budget, required: u128) -> CliResult<()> {
    Ok(budget.check(required)?)
}

fn with_spec(spec: &RankOneSpec, args: impl Serialize) -> Value {
    json!({ "args": to_value(args), "spec": to_value(spec) })
}

fn certified(spec: Option<&RankOneSpec>, args: impl Serialize, cert: Certificate) -> Computed {
    Computed {
        inputs: match spec {
            Some(s) => with_spec(s, args),
            None => json!({ "args": to_value(args) }),
        },
        result: json!({
            "kind": cert.kind,
            "parameters": cert.parameters,
            "verdict": cert.verdict,
        }),
        evidence: cert.evidence,
        spec_fingerprint: cert.spec_fingerprint,
        exit: verdict_exit(cert.verdict),
    }
}

fn plain(
    spec: Option<&RankOneSpec>,
    args: impl Serialize,
    result: Value,
    evidence: Value,
    exit: i32,
) -> Computed {
    Computed {
        inputs: match spec {
            Some(s) => with_spec(s, args),
            None => json!({ "args": to_value(args) }),
        },
        result,
        evidence,
        spec_fingerprint: spec.map(RankOneSpec::fingerprint),
        exit,
    }
}

fn dispatch(cli: &Cli) -> CliResult<Computed> {
    let g = &cli.global;
    let budget = g.budget.map(Budget).unwrap_or_default();
    match &cli.command {
        Command::Heights(a) => {
            let spec = load_spec(g)?.spec;
            let tower = spec.tower(a.stages)?;
            let sets: Vec<&[i64]> = (0..a.stages).map(|q| tower.height_set(q)).collect();
            let cuts: Vec<usize> = (0..a.stages).map(|q| tower.stage(q).cuts()).collect();
            let result = json!({
                "heights": tower.heights(),
                "levelWidth": tower.level_width(a.stages),
            });
            Ok(plain(
                Some(&spec),
                a,
                result,
                json!({ "heightSets": sets, "cuts": cuts }),
                EXIT_OK,
            ))
        }
        Command::Descendants(a) => {
            let spec = load_spec(g)?.spec;
            let tower = ranklab::construction::tower_for(&spec, a.base, a.to)?;
            check_budget(budget, tower.descendant_count(a.base.stage, a.to))?;
            let d = descendants_in(&tower, a.base, a.to)?;
            let result = json!({
                "count": d.len(),
                "max": d.last(),
                "measure": &tower.level_width(a.to) * d.len() as u64,
                "heights": d,
            });
            let evidence = json!({ "heightSets": (a.base.stage..a.to).map(|q| tower.height_set(q)).collect::<Vec<_>>() });
            Ok(plain(Some(&spec), a, result, evidence, EXIT_OK))
        }
        Command::Diffset(a) => {
            let spec = load_spec(g)?.spec;
            let tower = ranklab::construction::tower_for(&spec, a.base, a.to)?;
            let count = tower.descendant_count(a.base.stage, a.to);
            check_budget(budget, count.saturating_mul(count))?;
            let d = descendants_in(&tower, a.base, a.to)?;
            let multiset = difference_multiset(&d);
            let positive = positive_differences(&d);
            let result = json!({
                "total": multiset.total(),
                "distinct": multiset.counts.len(),
                "positive": positive,
            });
            let pairs: Vec<(i64, u64)> = multiset.counts.into_iter().collect();
            Ok(plain(
                Some(&spec),
                a,
                result,
                json!({ "multiset": pairs }),
                EXIT_OK,
            ))
        }
        Command::Ap(a) => {
            let spec = load_spec(g)?.spec;
            let tower = ranklab::construction::tower_for(&spec, a.level.base, a.level.to)?;
            let count = tower.descendant_count(a.level.base.stage, a.level.to);
            check_budget(budget, count.saturating_mul(count))?;
            let d = descendants_in(&tower, a.level.base, a.level.to)?;
            let search = ap_search(&d, a.max_len);
            let probe = a.x.map(|x| {
                let length = search.length_at(x);
                json!({
                    "x": x,
                    "length": length,
                    "progression": (1..=length as i64).map(|i| i * x).collect::<Vec<_>>(),
                })
            });
            let result = json!({
                "maxLen": a.max_len,
                "longest": search.longest,
                "witness": search.witness,
                "progression": search.witness_progression(),
                "probe": probe,
            });
            let runs: Vec<_> = search.table.iter().filter(|r| r.length >= 2).collect();
            Ok(plain(
                Some(&spec),
                a,
                result,
                json!({ "runs": runs }),
                EXIT_OK,
            ))
        }
        Command::Partners(a) => {
            let spec = load_spec(g)?.spec;
            let tower = spec.tower(a.stage + 1)?;
            let hs = tower.height_set(a.stage);
            let result = match a.z {
                Some(z) => {
                    let side = match a.side {
                        Side::Lower => PartnerSide::Lower,
                        Side::Upper => PartnerSide::Upper,
                    };
                    to_value(partner_set_with(hs, z, side))
                }
                None => to_value(partner_stage(hs, a.stage)),
            };
            Ok(plain(
                Some(&spec),
                a,
                result,
                json!({ "heightSet": hs }),
                EXIT_OK,
            ))
        }
        Command::Membership(a) => {
            let alpha = alphabet(g, &a.alphabet)?;
            let m = sumset_membership(&alpha, a.n, a.target as i128)?;
            let result = json!({ "member": m.member, "digits": m.digits });
            Ok(plain(
                None,
                a,
                result,
                json!({ "alphabet": alpha }),
                EXIT_OK,
            ))
        }
        Command::Gaps(a) => {
            let alpha = alphabet(g, &a.alphabet)?;
            let gaps = gap_count(&alpha, a.n)?;
            let exit = if gaps.agree { EXIT_OK } else { EXIT_FAILS };
            let result = json!({
                "verdict": if gaps.agree { Verdict::Holds } else { Verdict::Fails },
                "g": gaps.g,
                "recursion": gaps.recursion,
                "bruteForce": gaps.brute_force,
            });
            Ok(plain(
                None,
                a,
                result,
                json!({ "alphabet": alpha, "missing": gaps.missing }),
                exit,
            ))
        }
        Command::Coverage(a) => {
            let alpha = alphabet(g, &a.alphabet)?;
            let report = coverage_checks(&alpha, a.n)?;
            let holds = report.all_hold();
            let result = json!({
                "verdict": if holds { Verdict::Holds } else { Verdict::Fails },
                "checks": report,
            });
            let exit = if holds { EXIT_OK } else { EXIT_FAILS };
            Ok(plain(None, a, result, json!({ "alphabet": alpha }), exit))
        }
        Command::Gamma(a) => {
            let alpha = alphabet(g, &a.alphabet)?;
            let w = gamma_search(&alpha, &a.betas, a.horizon)?;
            let result = json!({ "n": w.n, "m": w.m, "gamma": w.gamma });
            let evidence = json!({
                "alphabet": alpha,
                "baseCheck": (w.base_check.0.to_string(), &w.base_check.1),
                "betaChecks": w.beta_checks.iter().map(|(b, v, d)| (b, v.to_string(), d)).collect::<Vec<_>>(),
            });
            Ok(plain(None, a, result, evidence, EXIT_OK))
        }
        Command::Conservativity(a) => {
            let spec = load_spec(g)?.spec;
            let from = a.from.unwrap_or(a.to);
            let out = conservativity_fraction(
                &spec,
                &a.alpha,
                a.base_stage,
                from..=a.to,
                &a.epsilon,
                budget,
            )?;
            Ok(certified(Some(&spec), a, out.certificate()))
        }
        Command::ErgodicMatch(a) => {
            let spec = load_spec(g)?.spec;
            let out = ergodic_matching(&spec, &a.signature, &a.b, a.base_stage, a.to, budget)?;
            Ok(certified(Some(&spec), a, out.certificate()))
        }
        Command::Pattern(a) => {
            let spec = load_spec(g)?.spec;
            let query = PatternQuery {
                signature: a.signature.clone(),
                b: a.b.clone(),
                base_stage: a.base_stage,
                cutoff: a.cutoff,
                dconst: a.dconst.clone(),
            };
            let out = pattern_measure(&spec, query)?;
            Ok(certified(Some(&spec), a, out.certificate()))
        }
        Command::Mixing(a) => {
            let spec = load_spec(g)?.spec;
            let query = MixingQuery {
                levels: a.levels.clone(),
                n: a.n,
                samples: a.samples.clone(),
                max_samples: a.max_samples,
            };
            let out = mixing_decay(&spec, query)?;
            Ok(certified(Some(&spec), a, out.certificate()))
        }
        Command::Npc(a) => {
            let spec = load_spec(g)?.spec;
            let query = NpcQuery {
                kappa: a.kappa,
                n_base: a.base,
                jmax: a.jmax,
                growth: SpacerGrowthQuery {
                    k: a.growth_k,
                    b: a.growth_b.clone(),
                    start: a.growth_start,
                },
            };
            let out = npc_certificate(&spec, query)?;
            Ok(certified(Some(&spec), a, out.certificate()))
        }
        Command::Pwm(a) => {
            let loaded = load_spec(g)?;
            let tq = loaded
                .tq
                .ok_or_else(|| CliError::Usage("pwm needs a tq spec".into()))?;
            let out = pwm_witness(&tq, &a.alpha, &a.b, a.n, a.horizon)?;
            Ok(certified(Some(&loaded.spec), a, out.certificate()))
        }
        Command::NonErgodic(a) => {
            let spec = load_spec(g)?.spec;
            let from = a.from.unwrap_or(a.base_stage);
            let out = non_ergodic_check(
                &spec,
                &a.alpha,
                &a.b,
                a.base_stage,
                from..=a.to,
                a.growth,
                budget,
            )?;
            Ok(certified(Some(&spec), a, out.certificate()))
        }
        Command::Asymmetry(a) => {
            let spec = load_spec(g)?.spec;
            let out = asymmetry_statistic(&spec, a.level, a.n, a.eval)?;
            Ok(certified(Some(&spec), a, out.certificate()))
        }
        Command::Validate(a) => validate(g, a),
    }
}

fn validate(g: &Global, a: &ValidateArgs) -> CliResult<Computed> {
    match (&g.spec, &a.report) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let value: Value =
                serde_json::from_str(&text).map_err(|e| CliError::Spec(e.to_string()))?;
            let errors = validate_report(&value).err().unwrap_or_default();
            let valid = errors.is_empty();
            let result = json!({
                "verdict": if valid { Verdict::Holds } else { Verdict::Fails },
                "reportFingerprint": value.get("reportFingerprint"),
            });
            let exit = if valid { EXIT_OK } else { EXIT_FAILS };
            Ok(plain(
                None,
                json!({ "report": "file" }),
                result,
                json!({ "errors": errors }),
                exit,
            ))
        }
        (Some(_), None) => {
            let loaded = load_spec(g)?;
            let spec = loaded.spec;
            let tower = spec.tower(spec.prefix().len().max(1))?;
            let result = json!({
                "verdict": Verdict::Holds,
                "fingerprint": spec.fingerprint(),
                "family": spec.family(),
            });
            let evidence = json!({ "heights": tower.heights(), "tq": loaded.tq });
            Ok(plain(Some(&spec), a, result, evidence, EXIT_OK))
        }
        (None, None) => Err(CliError::Usage("validate needs --spec or --report".into())),
    }
}
