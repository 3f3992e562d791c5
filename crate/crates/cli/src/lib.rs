//! Subcommands of the `entroscope` binary. Each command writes its artifact
//! to the given writer; errors carry the documented exit code.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use entroscope::ae::{certify_target, minimal_certifying_q, AeError, CertifiedBase, Target};
use entroscope::catalog::{
    check_conditional, check_conditional_profile, lookup, CheckError, ConditionalInequality,
    DEFAULT_TOLERANCE,
};
use entroscope::dist::{DistError, DEFAULT_SUPPORT_BUDGET};
use entroscope::fq::{construct_example, verify_distribution, FqError};
use entroscope::lang::{parse_inferred, parse_terms};
use entroscope::lp::{is_shannon_type, LpError};
use entroscope::profile::ProfileError;
use entroscope::swsim::{sw_report, SwConfig, SwError, CSV_HEADER, DEFAULT_DELTA};
use entroscope::{Budget, EntropyProfile, JointDistribution};

/// Environment variable overriding the support-size budget.
pub const BUDGET_ENV: &str = "ENTROSCOPE_BUDGET";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    Budget(String),
    #[error("unknown inequality `{0}`")]
    UnknownInequality(String),
    #[error("{0}")]
    GapNotPositive(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Budget(_) => 4,
            CliError::UnknownInequality(_) => 5,
            CliError::GapNotPositive(_) => 6,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        match e {
            DistError::Json(_) | DistError::Rational(_) => CliError::Parse(e.to_string()),
            DistError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::Json(_) | ProfileError::UnknownKey(_) | ProfileError::MissingKey(_) => {
                CliError::Parse(e.to_string())
            }
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<FqError> for CliError {
    fn from(e: FqError) -> Self {
        match e {
            FqError::Dist(d) => d.into(),
            other => CliError::Budget(other.to_string()),
        }
    }
}

impl From<CheckError> for CliError {
    fn from(e: CheckError) -> Self {
        match e {
            CheckError::Dist(d) => d.into(),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl From<SwError> for CliError {
    fn from(e: SwError) -> Self {
        match e {
            SwError::Dist(d) => d.into(),
            SwError::InvalidParameter(m) => CliError::Parse(m),
        }
    }
}

impl From<AeError> for CliError {
    fn from(e: AeError) -> Self {
        match e {
            AeError::GapNotPositive { .. } => CliError::GapNotPositive(e.to_string()),
            AeError::Fq(f) => f.into(),
            AeError::Dist(d) => d.into(),
            AeError::UnknownTarget(_) => CliError::Parse(e.to_string()),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "entroscope", version, about = "Exact laboratory for information inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy profile of a distribution file, with a polymatroid check.
    Profile {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Builds the line/parabola quadruple over F_q and verifies its closed forms.
    Example {
        #[arg(long)]
        q: u64,
        /// Write the distribution here; stdout then carries only the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluates a catalog inequality or an expression.
    Check(CheckArgs),
    /// Decides whether `expr >= 0` is a Shannon-type inequality.
    ShannonType {
        #[arg(long)]
        expr: String,
        /// Comma-separated variable order; defaults to the sorted names.
        #[arg(long, value_delimiter = ',')]
        vars: Option<Vec<String>>,
    },
    /// Certifies failure of cond1, cond3 or both on limits of the quadruple.
    AeCert {
        #[arg(long)]
        target: String,
        /// Certify at this prime instead of scanning.
        #[arg(long)]
        q: Option<u64>,
        /// Build the base by enumeration (q <= 31) instead of closed forms.
        #[arg(long, requires = "q")]
        exact: bool,
    },
    /// Random-binning simulation; CSV on stdout.
    SwSim {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long = "N", value_delimiter = ',', default_values_t = vec![2u32, 4, 6, 8])]
        copies: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        /// Number of seeds, run as `seed, seed+1, ...`.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed bin count instead of the rate-derived one.
        #[arg(long)]
        bins: Option<u32>,
    },
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, conflicts_with = "expr", required_unless_present = "expr")]
    pub ineq: Option<String>,
    #[arg(long)]
    pub expr: Option<String>,
    #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
    pub dist: Option<PathBuf>,
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
}

/// Support budget from the environment value, if any.
pub fn budget_from(value: Option<&str>) -> Result<Budget, CliError> {
    match value {
        None => Ok(Budget::new(DEFAULT_SUPPORT_BUDGET)),
        Some(v) => v
            .trim()
            .parse::<u64>()
            .map(Budget::new)
            .map_err(|_| CliError::Parse(format!("{BUDGET_ENV} must be a positive integer, got `{v}`"))),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_dist(path: &Path) -> Result<JointDistribution, CliError> {
    Ok(JointDistribution::from_json_str(&read(path)?)?)
}

/// Reads a profile file, or the `profile` member of a `profile` command's
/// output.
fn read_profile(path: &Path) -> Result<EntropyProfile, CliError> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    let inner = match v.get("profile") {
        Some(p) => p.to_string(),
        None => text,
    };
    Ok(EntropyProfile::from_json_str(&inner)?)
}

fn emit(out: &mut dyn Write, v: &Value) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}

pub fn run(cli: Cli, budget: Budget, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Profile { dist, tol } => cmd_profile(&dist, tol, out),
        Command::Example { q, out: path } => cmd_example(q, path.as_deref(), budget, out),
        Command::Check(args) => cmd_check(&args, out),
        Command::ShannonType { expr, vars } => cmd_shannon_type(&expr, vars, out),
        Command::AeCert { target, q, exact } => cmd_ae_cert(&target, q, exact, budget, out, err),
        Command::SwSim {
            dist,
            copies,
            delta,
            seeds,
            seed,
            bins,
        } => {
            let cfg = SwConfig {
                copies,
                delta,
                bins,
                budget,
            };
            cmd_sw_sim(&dist, &cfg, seed, seeds, out)
        }
    }
}

pub fn cmd_profile(dist: &Path, tol: f64, out: &mut dyn Write) -> Result<(), CliError> {
    let d = read_dist(dist)?;
    let p = EntropyProfile::of(&d)?;
    let verdict = p.is_polymatroid(tol);
    emit(
        out,
        &json!({
            "profile": to_value(&p.to_json()),
            "polymatroid": to_value(&verdict),
        }),
    )
}

pub fn cmd_example(q: u64, path: Option<&Path>, budget: Budget, out: &mut dyn Write) -> Result<(), CliError> {
    let d = construct_example(q, budget)?;
    let report = to_value(&verify_distribution(q, &d)?);
    match path {
        Some(p) => {
            let f = fs::File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            let mut w = io::BufWriter::new(f);
            d.write_json(&mut w)?;
            w.flush()?;
            emit(out, &json!({ "report": report }))
        }
        None => {
            let mut w = io::BufWriter::new(out);
            w.write_all(b"{\"distribution\":")?;
            d.write_json(&mut w)?;
            let r = serde_json::to_string(&report).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(w, ",\"report\":{r}}}")?;
            w.flush()?;
            Ok(())
        }
    }
}

enum Subject {
    Dist(JointDistribution),
    Profile(EntropyProfile),
}

impl Subject {
    fn names(&self) -> Vec<String> {
        match self {
            Subject::Dist(d) => d.names(),
            Subject::Profile(p) => p.names().to_vec(),
        }
    }

    fn check(&self, ineq: &ConditionalInequality, tol: f64) -> Result<Value, CliError> {
        let v = match self {
            Subject::Dist(d) => check_conditional(ineq, d, tol)?,
            Subject::Profile(p) => check_conditional_profile(ineq, p, tol)?,
        };
        Ok(to_value(&v))
    }
}

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let subject = match (&args.dist, &args.profile) {
        (Some(d), _) => Subject::Dist(read_dist(d)?),
        (None, Some(p)) => Subject::Profile(read_profile(p)?),
        (None, None) => return Err(CliError::Parse("one of --dist or --profile is required".into())),
    };
    let ineqs = match (&args.ineq, &args.expr) {
        (Some(name), _) => lookup(name).ok_or_else(|| CliError::UnknownInequality(name.clone()))?,
        (None, Some(text)) => {
            let names = subject.names();
            let terms = parse_terms(text, &names).map_err(|e| CliError::Parse(e.to_string()))?;
            let ineq = ConditionalInequality::new("expr", names, Vec::new(), terms)
                .map_err(|e| CliError::Parse(e.to_string()))?;
            vec![ineq]
        }
        (None, None) => return Err(CliError::Parse("one of --ineq or --expr is required".into())),
    };
    let mut results = ineqs
        .iter()
        .map(|i| subject.check(i, args.tol))
        .collect::<Result<Vec<_>, _>>()?;
    if results.len() == 1 {
        emit(out, &results.remove(0))
    } else {
        let holds = results.iter().all(|r| r["holds"] != json!(false));
        emit(
            out,
            &json!({
                "inequality": args.ineq,
                "holds": holds,
                "results": results,
            }),
        )
    }
}

pub fn cmd_shannon_type(expr: &str, vars: Option<Vec<String>>, out: &mut dyn Write) -> Result<(), CliError> {
    let (names, terms) = match vars {
        Some(v) => {
            let t = parse_terms(expr, &v).map_err(|e| CliError::Parse(e.to_string()))?;
            (v, t)
        }
        None => parse_inferred(expr).map_err(|e| CliError::Parse(e.to_string()))?,
    };
    let e = terms
        .canonical(names.len())
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let verdict = is_shannon_type(&e).map_err(|e| match e {
        LpError::UnsupportedArity(_) => CliError::Parse(e.to_string()),
        LpError::CertificateRejected => CliError::Invariant(e.to_string()),
    })?;
    let mut v = verdict.to_json(&names);
    v["variables"] = json!(names);
    emit(out, &v)
}

pub fn cmd_ae_cert(
    target: &str,
    q: Option<u64>,
    exact: bool,
    budget: Budget,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let target: Target = target.parse()?;
    let cert = match q {
        None => minimal_certifying_q(target),
        Some(q) => {
            let base = if exact {
                CertifiedBase::enumerated(q, budget)?
            } else {
                CertifiedBase::closed_form(q)?
            };
            match certify_target(&base, target) {
                Ok(c) => c,
                Err(AeError::GapNotPositive {
                    target: t,
                    gap,
                    deficit,
                    ..
                }) => {
                    writeln!(err, "deficit: {deficit}")?;
                    return Err(CliError::GapNotPositive(format!(
                        "{t} at q = {q}: guaranteed gap {gap} is not positive, deficit {deficit}"
                    )));
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    if !cert.verify() {
        return Err(CliError::Invariant("certificate failed re-verification".into()));
    }
    emit(out, &to_value(&cert))
}

pub fn cmd_sw_sim(dist: &Path, cfg: &SwConfig, seed: u64, seeds: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let d = read_dist(dist)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let csv_err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for s in seed..seed + seeds {
        for row in sw_report(&d, cfg, s)? {
            w.serialize(&row).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}
