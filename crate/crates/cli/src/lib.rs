//! Argument parsing and dispatch for the `cfstat` binary.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage or I/O error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use cfstat::matchstats::{matching_stat_totals, Matching};
use cfstat::mpoly::{MultiPoly, Substitution};
use cfstat::paths::{decode, encode, Bijection, LabeledMotzkinPath, PathError, PathObject};
use cfstat::permstats::{perm_stat_totals, PermFamily, Permutation, StatsError};
use cfstat::setpartstats::{sp_stat_totals, SPFamily, SetPartition};
use cfstat::theorems::{
    self, enumerate_object, expand_case, find_theorem, Object, TheoremError, VerificationReport,
    VerifyOptions, DEFAULT_SEED,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

pub const WORKERS_ENV: &str = "CFSTAT_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// `--help` or `--version`; the text goes to stdout and the exit code is 0.
    #[error("{0}")]
    Info(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Theorem(#[from] TheoremError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectKind {
    Perm,
    Setpart,
    Matching,
}

#[derive(Debug, Parser)]
#[command(
    name = "cfstat",
    version,
    about = "Continued fractions for permutation, set-partition and matching statistics"
)]
struct Cli {
    /// Worker threads for enumeration.
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Seed for randomized checks; recorded in every report.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// JSON file mapping indeterminates (or family patterns) to polynomial text.
    #[arg(long, global = true)]
    subst: Option<PathBuf>,
    /// Include wall-clock timings (output is then no longer byte-stable).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// List registered theorem and identity ids.
    List,
    /// Verify one registered theorem or identity.
    Verify {
        id: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Verify everything at default sizes.
    VerifyAll {
        /// Seconds after which remaining entries are skipped.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Forward check of the conjectured λ^cyc J-fraction.
    Conjecture {
        #[arg(long, default_value_t = 7)]
        n: usize,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Expand a registered fraction to a given order.
    Expand {
        #[arg(long)]
        theorem: String,
        #[arg(long, default_value_t = 8)]
        order: usize,
    },
    /// Enumerate a weighted generating polynomial.
    Enumerate {
        #[arg(long, value_enum)]
        object: ObjectKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "one")]
        weight: String,
        #[arg(long, default_value = "all")]
        family: String,
    },
    /// Statistics of a single object.
    Stats {
        #[arg(long, value_enum)]
        object: ObjectKind,
        /// Permutation in one-line notation, e.g. 2,1.
        #[arg(long)]
        oneline: Option<String>,
        /// Set partition or matching as blocks, e.g. 1,3/2,4.
        #[arg(long)]
        blocks: Option<String>,
    },
    /// Encode an object as a labeled Motzkin path.
    Encode {
        #[arg(long)]
        bijection: String,
        #[arg(long)]
        oneline: Option<String>,
        #[arg(long)]
        blocks: Option<String>,
    },
    /// Decode a labeled Motzkin path (JSON text, or @file).
    Decode {
        #[arg(long)]
        bijection: String,
        #[arg(long)]
        path: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub workers: usize,
    pub format: Format,
    pub seed: u64,
    pub subst: Option<PathBuf>,
    pub timing: bool,
}

/// Parses `argv` (without the program name).
pub fn parse_args<I, S>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args =
        std::iter::once(std::ffi::OsString::from("cfstat")).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Info(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })?;
    let workers = match cli.workers {
        Some(0) => return Err(CliError::Usage("worker count must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
    };
    Ok(RunConfig {
        command: cli.command,
        workers,
        format: cli.format,
        seed: cli.seed,
        subst: cli.subst,
        timing: cli.timing,
    })
}

/// Runs the command, writing the report to `out`; returns the exit code.
pub fn dispatch<W: Write>(cfg: &RunConfig, out: &mut W) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
    {
        Ok(p) => p,
        Err(e) => return report_error(cfg, out, &CliError::Usage(e.to_string())),
    };
    match pool.install(|| run(cfg)) {
        Ok((text, code)) => match out.write_all(text.as_bytes()) {
            Ok(()) => code,
            Err(_) => 2,
        },
        Err(e) => report_error(cfg, out, &e),
    }
}

fn report_error<W: Write>(cfg: &RunConfig, out: &mut W, e: &CliError) -> i32 {
    let text = match cfg.format {
        Format::Json => format!("{}\n", json!({ "error": e.to_string(), "seed": cfg.seed })),
        _ => format!("error\t{e}\n"),
    };
    let _ = out.write_all(text.as_bytes());
    e.exit_code()
}

fn load_subst(cfg: &RunConfig) -> Result<Option<Substitution>, CliError> {
    let Some(path) = &cfg.subst else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text)?;
    Substitution::from_json(&v)
        .map(Some)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn run(cfg: &RunConfig) -> Result<(String, i32), CliError> {
    let extra = load_subst(cfg)?;
    match &cfg.command {
        Command::List => Ok((render_list(cfg.format), 0)),
        Command::Verify { id, n, order } => {
            let opts = VerifyOptions {
                n_max: *n,
                order: *order,
                seed: cfg.seed,
                extra,
            };
            let rep = theorems::verify_theorem_with(id, &opts)?;
            let code = if rep.passed { 0 } else { 1 };
            Ok((render_reports(cfg, &[rep]), code))
        }
        Command::Conjecture { n, order } => {
            let opts = VerifyOptions {
                n_max: Some(*n),
                order: Some(order.unwrap_or(*n)),
                seed: cfg.seed,
                extra,
            };
            let rep = theorems::verify_theorem_with("conj.v2.full", &opts)?;
            let code = if rep.passed { 0 } else { 1 };
            Ok((render_reports(cfg, &[rep]), code))
        }
        Command::VerifyAll { budget } => {
            let results = theorems::verify_all(*budget, cfg.seed);
            let mut reports = Vec::new();
            let mut skipped = Vec::new();
            for r in results {
                match r {
                    Ok(rep) => reports.push(rep),
                    Err(s) => skipped.push(s),
                }
            }
            let ok = skipped.is_empty() && reports.iter().all(|r| r.passed);
            let mut text = render_reports(cfg, &reports);
            for (id, why) in &skipped {
                match cfg.format {
                    Format::Json => {
                        text.push_str(&format!("{}\n", json!({ "id": id, "error": why })))
                    }
                    _ => text.push_str(&format!("{id}\tskipped\t{why}\n")),
                }
            }
            Ok((text, if ok { 0 } else { 1 }))
        }
        Command::Expand { theorem, order } => {
            let case = find_theorem(theorem)?;
            let fc = case
                .fraction_case()
                .ok_or_else(|| CliError::Usage(format!("{theorem} is not a continued fraction")))?;
            let s = expand_case(fc, *order)?;
            let coeffs: Vec<MultiPoly> = (0..=*order)
                .map(|k| apply(s.coeff(k).clone(), &extra))
                .collect();
            Ok((render_polys(cfg, case.id, *order, &coeffs), 0))
        }
        Command::Enumerate {
            object,
            n,
            weight,
            family,
        } => {
            let obj = parse_object(*object, family)?;
            let p = enumerate_object(obj, *n, weight, extra.as_ref())?;
            Ok((
                render_poly(
                    cfg,
                    &json!({ "object": family_label(*object, family), "n": n, "weight": weight }),
                    &p,
                ),
                0,
            ))
        }
        Command::Stats {
            object,
            oneline,
            blocks,
        } => {
            let v = stats_json(*object, oneline.as_deref(), blocks.as_deref())?;
            Ok((render_flat(cfg.format, &v), 0))
        }
        Command::Encode {
            bijection,
            oneline,
            blocks,
        } => {
            let b: Bijection = bijection.parse()?;
            let obj = match (oneline, blocks) {
                (Some(w), None) => PathObject::Perm(Permutation::from_oneline(&parse_list(w)?)?),
                (None, Some(b)) => {
                    PathObject::SetPart(SetPartition::from_blocks(&parse_blocks(b)?)?)
                }
                _ => {
                    return Err(CliError::Usage(
                        "give exactly one of --oneline or --blocks".into(),
                    ))
                }
            };
            let path = encode(&obj, b)?;
            let text = match cfg.format {
                Format::Json => format!("{}\n", serde_json::to_string(&path.to_json())?),
                _ => format!("{}\n", path.to_json()),
            };
            Ok((text, 0))
        }
        Command::Decode { bijection, path } => {
            let b: Bijection = bijection.parse()?;
            let raw = match path.strip_prefix('@') {
                Some(file) => std::fs::read_to_string(file)?,
                None => path.clone(),
            };
            let p = LabeledMotzkinPath::from_json(&serde_json::from_str(&raw)?)?;
            let v = match decode(&p, b)? {
                PathObject::Perm(s) => json!({ "object": "perm", "oneline": s.oneline() }),
                PathObject::SetPart(sp) => json!({ "object": "setpart", "blocks": sp.blocks() }),
            };
            Ok((render_flat(cfg.format, &v), 0))
        }
    }
}

fn apply(p: MultiPoly, s: &Option<Substitution>) -> MultiPoly {
    match s {
        Some(s) => p.substitute(s),
        None => p,
    }
}

fn parse_object(kind: ObjectKind, family: &str) -> Result<Object, CliError> {
    Ok(match kind {
        ObjectKind::Perm => Object::Perm(family.parse::<PermFamily>()?),
        ObjectKind::Setpart => Object::SetPart(family.parse::<SPFamily>()?),
        ObjectKind::Matching => match family {
            "all" => Object::Matching,
            "indecomposable" => Object::IndecomposableMatching,
            other => return Err(StatsError::UnknownFamily(other.to_string()).into()),
        },
    })
}

fn family_label(kind: ObjectKind, family: &str) -> String {
    let k = match kind {
        ObjectKind::Perm => "perm",
        ObjectKind::Setpart => "setpart",
        ObjectKind::Matching => "matching",
    };
    format!("{k}:{family}")
}

fn parse_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("not a positive integer: {t:?}")))
        })
        .collect()
}

/// `1,3/2,4` → [[1,3],[2,4]]
fn parse_blocks(s: &str) -> Result<Vec<Vec<usize>>, CliError> {
    s.split('/')
        .filter(|b| !b.trim().is_empty())
        .map(parse_list)
        .collect()
}

fn stats_json(
    kind: ObjectKind,
    oneline: Option<&str>,
    blocks: Option<&str>,
) -> Result<Value, CliError> {
    let v = match (kind, oneline, blocks) {
        (ObjectKind::Perm, Some(w), None) => {
            let s = Permutation::from_oneline(&parse_list(w)?)?;
            let mut v = serde_json::to_value(perm_stat_totals(&s))?;
            v["object"] = json!("perm");
            v["oneline"] = json!(s.oneline());
            v
        }
        (ObjectKind::Setpart, None, Some(b)) => {
            let p = SetPartition::from_blocks(&parse_blocks(b)?)?;
            let mut v = serde_json::to_value(sp_stat_totals(&p))?;
            v["object"] = json!("setpart");
            v["blocks"] = json!(p.blocks());
            v
        }
        (ObjectKind::Matching, None, Some(b)) => {
            let pairs = parse_blocks(b)?
                .into_iter()
                .map(|blk| match blk[..] {
                    [i, j] => Ok((i, j)),
                    _ => Err(CliError::Usage("matching blocks must be pairs".into())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let m = Matching::from_pairs(&pairs)?;
            let mut v = serde_json::to_value(matching_stat_totals(&m))?;
            v["object"] = json!("matching");
            v["pairs"] = json!(m.pairs());
            v
        }
        (ObjectKind::Perm, _, _) => {
            return Err(CliError::Usage("perm stats need --oneline".into()))
        }
        _ => {
            return Err(CliError::Usage(
                "set partition and matching stats need --blocks".into(),
            ))
        }
    };
    Ok(v)
}

fn render_list(format: Format) -> String {
    let reg = theorems::registry();
    match format {
        Format::Json => {
            let items: Vec<Value> = reg
                .iter()
                .map(|c| json!({ "id": c.id, "kind": c.kind, "default_n": c.default_n, "summary": c.summary }))
                .collect();
            format!("{}\n", Value::Array(items))
        }
        Format::Tsv => {
            let mut s = String::from("id\tkind\tdefault_n\tsummary\n");
            for c in reg {
                let _ = writeln!(s, "{}\t{:?}\t{}\t{}", c.id, c.kind, c.default_n, c.summary);
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for c in reg {
                let _ = writeln!(
                    s,
                    "{:<28} {:<18} n<={:<3} {}",
                    c.id,
                    format!("{:?}", c.kind),
                    c.default_n,
                    c.summary
                );
            }
            s
        }
    }
}

fn render_reports(cfg: &RunConfig, reports: &[VerificationReport]) -> String {
    let reports: Vec<VerificationReport> = reports
        .iter()
        .cloned()
        .map(|r| if cfg.timing { r } else { r.without_timing() })
        .collect();
    let mut s = String::new();
    match cfg.format {
        Format::Json => {
            for r in &reports {
                let _ = writeln!(s, "{}", r.to_json());
            }
        }
        Format::Tsv => {
            s.push_str("id\tn\tpassed\tversion\tseed\torder\n");
            for r in &reports {
                for p in &r.per_n {
                    let _ = writeln!(
                        s,
                        "{}\t{}\t{}\t{}\t{}\t{}",
                        r.id, p.n, p.passed, r.artifact_version, r.seed, r.order
                    );
                }
                if let Some(c) = &r.coherence {
                    let _ = writeln!(
                        s,
                        "{}\tcoherence:{}\t{}\t{}\t{}\t{}",
                        r.id, c.master, c.passed, r.artifact_version, r.seed, r.order
                    );
                }
            }
        }
        Format::Text => {
            for r in &reports {
                let verdict = if r.passed { "PASS" } else { "FAIL" };
                let _ = write!(
                    s,
                    "{verdict} {} (n {}..={}, order {}, seed {}, v{})",
                    r.id, r.n_min, r.n_max, r.order, r.seed, r.artifact_version
                );
                if let Some(c) = &r.coherence {
                    let _ = write!(
                        s,
                        " coherence with {}: {}",
                        c.master,
                        if c.passed { "ok" } else { "broken" }
                    );
                }
                if let Some(ms) = r.wall_time_ms {
                    let _ = write!(s, " {ms} ms");
                }
                s.push('\n');
                if let Some(d) = &r.discrepancy {
                    let _ = writeln!(s, "  n = {}: {}", d.n, d.detail);
                    if let (Some(m), Some(e), Some(f)) = (&d.monomial, &d.expected, &d.found) {
                        let _ = writeln!(s, "  monomial {m}: expected {e}, found {f}");
                    }
                }
            }
        }
    }
    s
}

fn render_polys(cfg: &RunConfig, id: &str, order: usize, coeffs: &[MultiPoly]) -> String {
    match cfg.format {
        Format::Json => {
            let cs: Vec<Value> = coeffs.iter().map(MultiPoly::to_json).collect();
            let text: Vec<String> = coeffs.iter().map(|p| p.to_string()).collect();
            format!(
                "{}\n",
                json!({ "artifact_version": theorems::ARTIFACT_VERSION, "id": id, "order": order, "seed": cfg.seed, "coefficients": cs, "text": text })
            )
        }
        Format::Tsv => {
            let mut s = String::from("k\tcoefficient\n");
            for (k, p) in coeffs.iter().enumerate() {
                let _ = writeln!(s, "{k}\t{p}");
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for (k, p) in coeffs.iter().enumerate() {
                let _ = writeln!(s, "t^{k}: {p}");
            }
            s
        }
    }
}

fn render_poly(cfg: &RunConfig, head: &Value, p: &MultiPoly) -> String {
    match cfg.format {
        Format::Json => {
            let mut v = head.clone();
            v["artifact_version"] = json!(theorems::ARTIFACT_VERSION);
            v["seed"] = json!(cfg.seed);
            v["polynomial"] = p.to_json();
            v["text"] = json!(p.to_string());
            format!("{v}\n")
        }
        Format::Tsv => {
            let mut s = String::from("monomial\tcoefficient\n");
            for (m, c) in p.terms() {
                let _ = writeln!(s, "{m}\t{c}");
            }
            s
        }
        Format::Text => format!("{p}\n"),
    }
}

fn render_flat(format: Format, v: &Value) -> String {
    match format {
        Format::Json => format!("{v}\n"),
        _ => {
            let mut s = String::new();
            if let Value::Object(m) = v {
                for (k, x) in m {
                    let sep = if format == Format::Tsv { "\t" } else { ": " };
                    let _ = writeln!(s, "{k}{sep}{x}");
                }
            }
            s
        }
    }
}
