//! `rankmrd`: batch front-end for the rank-metric code checks and the curve
//! singularity pipeline. Every subcommand reads a strict JSON spec (unknown
//! keys rejected), writes a byte-stable report (JSON or CSV), and exits with
//! 0 when the verdict is true, 1 when it is false, and 2 on any error.

use std::fs;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use rankmrd::codes::{
    is_scattered, make_gabidulin, make_lp, make_twisted, probe_exceptional, CodeError, RankCode,
    DEFAULT_BUDGET,
};
use rankmrd::curves::criterion::{cafure_matera_threshold, failing_pairs, theorem_table};
use rankmrd::curves::report::curve_report;
use rankmrd::curves::{CaseTag, CurveInstance};
use rankmrd::gf::{Felt, FieldCtx};
use rankmrd::linpoly::LinPoly;

/// Name of the environment variable supplying the default enumeration budget.
const BUDGET_ENV: &str = "RANKMRD_BUDGET";

#[derive(Parser)]
#[command(name = "rankmrd", version, about = "rank-metric MRD code and curve analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputOpts {
    /// report format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// write the report here instead of stdout
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct BudgetOpt {
    /// enumeration budget (default: $RANKMRD_BUDGET or 10^7)
    #[arg(long)]
    budget: Option<u64>,
}

impl BudgetOpt {
    fn resolve(&self) -> Result<u64, CliError> {
        if let Some(b) = self.budget {
            if b == 0 {
                return Err(CliError::new("spec_parse", "budget must be positive"));
            }
            return Ok(b);
        }
        match std::env::var(BUDGET_ENV) {
            Ok(v) => v
                .parse::<u64>()
                .ok()
                .filter(|&b| b > 0)
                .ok_or_else(|| CliError::new("spec_parse", "invalid budget in environment")),
            Err(_) => Ok(DEFAULT_BUDGET),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Minimum distance and MRD verdict for a code spanned by linearized polynomials
    CheckMrd {
        /// path to a code spec JSON file, or inline JSON
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        budget: BudgetOpt,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Scatteredness of a single linearized polynomial for a given index
    CheckScattered {
        /// path to a polynomial spec JSON file, or inline JSON
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Moore-set property of a code's generating tuple
    CheckMoore {
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        budget: BudgetOpt,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Re-run the scatteredness check over extension fields F_{q^{nm}}
    ProbeExceptional {
        #[arg(long)]
        spec: String,
        /// comma-separated extension indices m
        #[arg(long, default_value = "1,2")]
        extensions: String,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Construct a known family and verify its defining property
    Families {
        /// gabidulin | twisted | lp
        #[arg(long)]
        family: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value = "1")]
        e: u32,
        #[arg(long)]
        n: u32,
        /// dimension r (gabidulin, twisted)
        #[arg(long, default_value = "3")]
        r: u32,
        /// Frobenius stride s (gabidulin, twisted) or index t (lp)
        #[arg(long, default_value = "1")]
        s: u32,
        /// element literal of F_{q^n} (twisted, lp)
        #[arg(long)]
        delta: Option<String>,
        #[command(flatten)]
        budget: BudgetOpt,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Full curve pipeline: build 𝒞 and 𝒜, classify singularities, evaluate the 2/9 criterion
    CurveAnalyze {
        /// path to a curve instance JSON file, or inline JSON
        #[arg(long)]
        spec: String,
        /// skip the per-point blowup chain verification
        #[arg(long)]
        skip_branch_verify: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Proof-level inequality table over a (q, t, k) range
    CriterionTable {
        /// 2t | t/2
        #[arg(long)]
        case: String,
        #[arg(long, default_value = "13")]
        q_max: u64,
        #[arg(long, default_value = "6")]
        t_max: u32,
        #[arg(long, default_value = "30")]
        k_max: u32,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Least prime power above the point-counting threshold 2(dim+1)deg²
    CmThreshold {
        #[arg(long)]
        dim: u64,
        #[arg(long)]
        deg: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
}

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct CliError {
    code: &'static str,
    message: String,
}

impl CliError {
    fn new(code: &'static str, message: impl Into<String>) -> CliError {
        CliError { code, message: message.into() }
    }
}

impl From<CodeError> for CliError {
    fn from(e: CodeError) -> CliError {
        let code = match &e {
            CodeError::BudgetExceeded { .. } => "budget_exceeded",
            CodeError::DependentGenerators => "dependent_generators",
            CodeError::RankTooLarge(..) => "rank_too_large",
            CodeError::GcdViolation(..) => "gcd_violation",
            CodeError::NormConditionViolation => "norm_condition",
            CodeError::Field(_) => "field",
        };
        CliError::new(code, e.to_string())
    }
}

impl From<rankmrd::gf::GfError> for CliError {
    fn from(e: rankmrd::gf::GfError) -> CliError {
        CliError::new("field", e.to_string())
    }
}

impl From<rankmrd::curves::CurveError> for CliError {
    fn from(e: rankmrd::curves::CurveError) -> CliError {
        use rankmrd::curves::CurveError as CE;
        let code = match &e {
            CE::Instance(_) => "instance",
            CE::NoLambdaFound => "no_lambda",
            CE::NonExactDivision => "non_exact_division",
            CE::ClosedFormMismatch(_) => "closed_form_mismatch",
            CE::PointNotOnCurve => "point_not_on_curve",
            CE::UnclassifiedCone => "unclassified_cone",
            CE::AxisIsTangent => "axis_is_tangent",
            CE::ChainBudgetExceeded(_) => "budget_exceeded",
            CE::UnresolvedSingularity(_) => "unresolved_singularity",
            CE::Field(_) => "field",
        };
        CliError::new(code, e.to_string())
    }
}

// ---------------------------------------------------------------------------
// spec formats (strict)
// ---------------------------------------------------------------------------

/// A linearized polynomial: pairs [q-degree, element literal].
type TermList = Vec<(u32, String)>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeSpec {
    p: u64,
    #[serde(default = "one_u32")]
    e: u32,
    n: u32,
    #[serde(default)]
    t: u32,
    generators: Vec<TermList>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolySpec {
    p: u64,
    #[serde(default = "one_u32")]
    e: u32,
    n: u32,
    #[serde(default)]
    t: u32,
    f: TermList,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceSpec {
    p: u64,
    #[serde(default = "one_u32")]
    e: u32,
    n: u32,
    t: u32,
    k: u32,
    case: String,
    delta: String,
    #[serde(rename = "G_coeffs")]
    g_coeffs: TermList,
    #[serde(default)]
    lambda: Option<String>,
}

fn one_u32() -> u32 {
    1
}

/// `--spec` accepts inline JSON (leading '{') or a file path.
fn read_spec(spec: &str) -> Result<String, CliError> {
    if spec.trim_start().starts_with('{') {
        return Ok(spec.to_string());
    }
    fs::read_to_string(spec).map_err(|e| CliError::new("io", format!("{spec}: {e}")))
}

fn parse_spec<T: serde::de::DeserializeOwned>(spec: &str) -> Result<T, CliError> {
    let raw = read_spec(spec)?;
    serde_json::from_str(&raw).map_err(|e| CliError::new("spec_parse", e.to_string()))
}

fn build_poly(ctx: &Arc<FieldCtx>, terms: &TermList) -> Result<LinPoly, CliError> {
    let mut pairs: Vec<(u32, Felt)> = Vec::new();
    for (i, lit) in terms {
        pairs.push((*i, ctx.parse_element(lit)?));
    }
    Ok(LinPoly::from_terms(ctx, &pairs)?)
}

fn build_code(spec: &CodeSpec) -> Result<(Arc<FieldCtx>, RankCode), CliError> {
    let ctx = FieldCtx::new(spec.p, spec.e, spec.n, None)?;
    let gens = spec
        .generators
        .iter()
        .map(|g| build_poly(&ctx, g))
        .collect::<Result<Vec<_>, _>>()?;
    let code = RankCode::new(gens, spec.t)?;
    Ok((ctx, code))
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MrdReport {
    code: &'static str,
    q: u64,
    n: u32,
    r: usize,
    t: u32,
    d: u32,
    is_mrd: bool,
    codewords_examined: u64,
    witness: Vec<String>,
    spectrum: Vec<u64>,
}

#[derive(Serialize)]
struct ScatteredReport {
    code: &'static str,
    q: u64,
    n: u32,
    t: u32,
    f: String,
    is_scattered: bool,
    witness: Option<String>,
}

#[derive(Serialize)]
struct MooreReport {
    code: &'static str,
    q: u64,
    n: u32,
    r: usize,
    is_moore_set: bool,
    witness: Option<Vec<String>>,
}

#[derive(Serialize)]
struct ProbeReport {
    code: &'static str,
    q: u64,
    n: u32,
    t: u32,
    f: String,
    probes: Vec<ProbeEntry>,
    scattered_everywhere: bool,
}

#[derive(Serialize)]
struct ProbeEntry {
    m: u32,
    scattered: bool,
    witness: Option<u64>,
}

#[derive(Serialize)]
struct FamilyReport {
    code: &'static str,
    family: String,
    q: u64,
    n: u32,
    verified: bool,
    detail: serde_json::Value,
}

#[derive(Serialize)]
struct TableReport {
    code: &'static str,
    case: String,
    q_max: u64,
    t_max: u32,
    k_max: u32,
    rows: Vec<rankmrd::curves::criterion::TheoremRow>,
    failing_pairs: Vec<(u32, u64)>,
    all_pass: bool,
}

#[derive(Serialize)]
struct CmReport {
    code: &'static str,
    dim: u64,
    deg: u64,
    bound: u64,
    least_prime_power_above: u64,
}

fn emit(report: &impl Serialize, csv: Option<String>, opts: &OutputOpts) -> Result<(), CliError> {
    let body = match opts.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)
                .map_err(|e| CliError::new("io", e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => csv.ok_or_else(|| {
            CliError::new("spec_parse", "this subcommand has no CSV form")
        })?,
    };
    match &opts.out {
        Some(path) => fs::write(path, body).map_err(|e| CliError::new("io", e.to_string())),
        None => {
            use std::io::Write;
            match std::io::stdout().write_all(body.as_bytes()) {
                Ok(()) => Ok(()),
                // a closed pipe (e.g. | head) is not a report failure
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => Err(CliError::new("io", e.to_string())),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// subcommand bodies: return the verdict for the exit status
// ---------------------------------------------------------------------------

fn run_check_mrd(spec: &str, budget: &BudgetOpt, output: &OutputOpts) -> Result<bool, CliError> {
    let spec: CodeSpec = parse_spec(spec)?;
    let (ctx, code) = build_code(&spec)?;
    let v = code.min_distance(budget.resolve()?)?;
    let report = MrdReport {
        code: "mrd",
        q: ctx.q(),
        n: ctx.ext_degree(),
        r: code.dimension(),
        t: code.index(),
        d: v.d,
        is_mrd: v.is_mrd,
        codewords_examined: v.codewords_examined,
        witness: v.witness.iter().map(|w| w.to_literal()).collect(),
        spectrum: v.spectrum.clone(),
    };
    // CSV form: the rank-spectrum histogram
    let mut csv = String::from("rank,count\n");
    for (rank, count) in v.spectrum.iter().enumerate() {
        csv.push_str(&format!("{rank},{count}\n"));
    }
    emit(&report, Some(csv), output)?;
    Ok(v.is_mrd)
}

fn run_check_scattered(spec: &str, output: &OutputOpts) -> Result<bool, CliError> {
    let spec: PolySpec = parse_spec(spec)?;
    let ctx = FieldCtx::new(spec.p, spec.e, spec.n, None)?;
    let f = build_poly(&ctx, &spec.f)?;
    let (ok, wit) = is_scattered(&f, spec.t);
    let report = ScatteredReport {
        code: "scattered",
        q: ctx.q(),
        n: ctx.ext_degree(),
        t: spec.t,
        f: f.to_literal(),
        is_scattered: ok,
        witness: wit.map(|w| w.to_literal()),
    };
    emit(&report, None, output)?;
    Ok(ok)
}

fn run_check_moore(spec: &str, budget: &BudgetOpt, output: &OutputOpts) -> Result<bool, CliError> {
    let spec: CodeSpec = parse_spec(spec)?;
    let (ctx, code) = build_code(&spec)?;
    let (ok, wit) = code.is_moore_set(budget.resolve()?)?;
    let report = MooreReport {
        code: "moore",
        q: ctx.q(),
        n: ctx.ext_degree(),
        r: code.dimension(),
        is_moore_set: ok,
        witness: wit.map(|t| t.iter().map(|a| a.to_literal()).collect()),
    };
    emit(&report, None, output)?;
    Ok(ok)
}

fn run_probe(spec: &str, extensions: &str, output: &OutputOpts) -> Result<bool, CliError> {
    let spec: PolySpec = parse_spec(spec)?;
    let ctx = FieldCtx::new(spec.p, spec.e, spec.n, None)?;
    let f = build_poly(&ctx, &spec.f)?;
    let exts: Vec<u32> = extensions
        .split(',')
        .map(|s| s.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::new("spec_parse", "extensions must be positive integers"))?;
    if exts.is_empty() || exts.contains(&0) {
        return Err(CliError::new("spec_parse", "extensions must be positive integers"));
    }
    let probes = probe_exceptional(&f, spec.t, &exts)?;
    let everywhere = probes.iter().all(|(_, ok, _)| *ok);
    let report = ProbeReport {
        code: "probe_exceptional",
        q: ctx.q(),
        n: ctx.ext_degree(),
        t: spec.t,
        f: f.to_literal(),
        probes: probes
            .into_iter()
            .map(|(m, scattered, witness)| ProbeEntry { m, scattered, witness })
            .collect(),
        scattered_everywhere: everywhere,
    };
    emit(&report, None, output)?;
    Ok(everywhere)
}

#[allow(clippy::too_many_arguments)]
fn run_families(
    family: &str,
    p: u64,
    e: u32,
    n: u32,
    r: u32,
    s: u32,
    delta: Option<&str>,
    budget: &BudgetOpt,
    output: &OutputOpts,
) -> Result<bool, CliError> {
    let ctx = FieldCtx::new(p, e, n, None)?;
    let budget = budget.resolve()?;
    let need_delta = || {
        delta
            .ok_or_else(|| CliError::new("spec_parse", "this family requires --delta"))
            .and_then(|d| Ok(ctx.parse_element(d)?))
    };
    let (verified, detail) = match family {
        "gabidulin" => {
            let code = make_gabidulin(&ctx, r, s)?;
            let v = code.min_distance(budget)?;
            (v.is_mrd, serde_json::json!({ "d": v.d, "codewords": v.codewords_examined }))
        }
        "twisted" => {
            let code = make_twisted(&ctx, r, s, &need_delta()?)?;
            let v = code.min_distance(budget)?;
            (v.is_mrd, serde_json::json!({ "d": v.d, "codewords": v.codewords_examined }))
        }
        "lp" => {
            let f = make_lp(&ctx, s, &need_delta()?)?;
            let (ok, wit) = is_scattered(&f, s);
            (ok, serde_json::json!({ "f": f.to_literal(), "witness": wit.map(|w| w.to_literal()) }))
        }
        other => {
            return Err(CliError::new(
                "spec_parse",
                format!("unknown family '{other}' (expected gabidulin, twisted or lp)"),
            ))
        }
    };
    let report = FamilyReport {
        code: "family",
        family: family.to_string(),
        q: ctx.q(),
        n: ctx.ext_degree(),
        verified,
        detail,
    };
    emit(&report, None, output)?;
    Ok(verified)
}

fn run_curve_analyze(
    spec: &str,
    skip_branch_verify: bool,
    output: &OutputOpts,
) -> Result<bool, CliError> {
    let spec: InstanceSpec = parse_spec(spec)?;
    let case = CaseTag::parse(&spec.case)
        .ok_or_else(|| CliError::new("spec_parse", "case must be \"2t\" or \"t/2\""))?;
    let inst = CurveInstance::new(
        spec.p,
        spec.e,
        spec.n,
        spec.t,
        spec.k,
        case,
        &spec.delta,
        &spec.g_coeffs,
        spec.lambda.as_deref(),
    )?;
    let report = curve_report(&inst, !skip_branch_verify)?;
    emit(&report, None, output)?;
    Ok(report.criterion.holds)
}

fn run_criterion_table(
    case: &str,
    q_max: u64,
    t_max: u32,
    k_max: u32,
    output: &OutputOpts,
) -> Result<bool, CliError> {
    let tag = CaseTag::parse(case)
        .ok_or_else(|| CliError::new("spec_parse", "case must be \"2t\" or \"t/2\""))?;
    let rows = theorem_table(tag, q_max, t_max, k_max);
    let failing = failing_pairs(&rows);
    let all_pass = failing.is_empty();
    // fixed CSV header: case,q,t,k,s,lhs,rhs,pass
    let mut csv = String::from("case,q,t,k,s,lhs,rhs,pass\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.case, row.q, row.t, row.k, row.s, row.lhs, row.rhs, row.pass
        ));
    }
    let report = TableReport {
        code: "criterion_table",
        case: tag.as_str().to_string(),
        q_max,
        t_max,
        k_max,
        rows,
        failing_pairs: failing,
        all_pass,
    };
    emit(&report, Some(csv), output)?;
    Ok(all_pass)
}

fn run_cm_threshold(dim: u64, deg: u64, output: &OutputOpts) -> Result<bool, CliError> {
    let report = CmReport {
        code: "cm_threshold",
        dim,
        deg,
        bound: 2 * (dim + 1) * deg * deg,
        least_prime_power_above: cafure_matera_threshold(dim, deg),
    };
    emit(&report, None, output)?;
    Ok(true)
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::CheckMrd { spec, budget, output } => run_check_mrd(spec, budget, output),
        Command::CheckScattered { spec, output } => run_check_scattered(spec, output),
        Command::CheckMoore { spec, budget, output } => run_check_moore(spec, budget, output),
        Command::ProbeExceptional { spec, extensions, output } => {
            run_probe(spec, extensions, output)
        }
        Command::Families { family, p, e, n, r, s, delta, budget, output } => run_families(
            family,
            *p,
            *e,
            *n,
            *r,
            *s,
            delta.as_deref(),
            budget,
            output,
        ),
        Command::CurveAnalyze { spec, skip_branch_verify, output } => {
            run_curve_analyze(spec, *skip_branch_verify, output)
        }
        Command::CriterionTable { case, q_max, t_max, k_max, output } => {
            run_criterion_table(case, *q_max, *t_max, *k_max, output)
        }
        Command::CmThreshold { dim, deg, output } => run_cm_threshold(*dim, *deg, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let payload = serde_json::json!({ "error": { "code": e.code, "message": e.message } });
            eprintln!("{payload}");
            ExitCode::from(2)
        }
    }
}
