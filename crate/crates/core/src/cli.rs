//! Command-line front end.
//!
//! `run` takes the argument list and two output streams and returns the
//! process exit code, so the binary is a thin wrapper and tests can drive
//! commands in-process.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::carnot::{free_group, CarnotPresentation, GroupSpec};
use crate::checks::{self, CheckConfig};
use crate::gallery::{self, Field, GalleryEntry};
use crate::haffine::{
    bilinear_witness, classify, dim_affine, dim_affine_via_forms, dim_haffine, find_f3_subgroup, haffine_basis,
    lambda_dims, BasisEntry, Verdict,
};
use crate::rational::{serde_mat, serde_vec};
use crate::sampling::DEFAULT_SEED;
use crate::{Error, Rational, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID_SPEC: i32 = 3;

/// Free ranks above this print a warning: `Λᵏ` grows like `2ⁿ`.
const LARGE_FREE_RANK: usize = 10;

#[derive(Parser, Debug)]
#[command(name = "carnot-affine", version, about = "Horizontally affine maps on step-two Carnot groups")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Number of random trials per randomized check.
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Copy, Default)]
pub struct ReportFlags {
    /// Include a basis of the h-affine maps.
    #[arg(long)]
    pub basis: bool,
    /// Include a bilinear witness when maps are not all affine.
    #[arg(long)]
    pub witness: bool,
    /// Include three generators of an F_3 subgroup when one is forced.
    #[arg(long)]
    pub f3: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Analyze a group given as a JSON spec file.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        flags: ReportFlags,
    },
    /// Analyze the free step-two group of rank n.
    Free {
        n: usize,
        #[command(flatten)]
        flags: ReportFlags,
    },
    /// Run gallery examples and compare with their expected results.
    Examples {
        /// Example name (see --list).
        name: Option<String>,
        /// Run every example.
        #[arg(long, conflicts_with = "name")]
        all: bool,
        /// List example names.
        #[arg(long)]
        list: bool,
        /// Write the JSON spec of the selected examples into this directory.
        #[arg(long, value_name = "DIR")]
        emit_specs: Option<PathBuf>,
    },
    /// Run the randomized invariant suites.
    Check {
        /// Only run suites whose name contains this text.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaDim {
    pub k: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormReport {
    pub grade: usize,
    #[serde(with = "serde_vec")]
    pub coeffs: Vec<Rational>,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    #[serde(with = "serde_mat")]
    pub matrix: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleReport {
    #[serde(with = "serde_mat")]
    pub vectors: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisMapReport {
    pub text: String,
    pub terms: Vec<BasisEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// `sha256:` digest of the canonical JSON of the group spec.
    pub digest: String,
    pub n: usize,
    pub rank: usize,
    pub dim_v2: usize,
    pub dim_affine: usize,
    pub dim_haffine: usize,
    /// `dim Λᵏ(π)` for `k = n, n-1, …, n-r`.
    pub lambda_dims: Vec<LambdaDim>,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<FormReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f3_triple: Option<TripleReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<BasisMapReport>>,
}

pub fn spec_digest(spec: &GroupSpec) -> String {
    let canonical = serde_json::to_string(spec).expect("group specs always serialize");
    format!("sha256:{}", hex::encode(Sha256::digest(canonical.as_bytes())))
}

pub fn analyze(spec: &GroupSpec, flags: ReportFlags) -> Result<AnalysisReport> {
    let pres = spec.presentation()?;
    analyze_presentation(spec_digest(spec), pres, flags)
}

pub fn analyze_presentation(digest: String, pres: CarnotPresentation, flags: ReportFlags) -> Result<AnalysisReport> {
    let dims = lambda_dims(&pres)?;
    let dim_h = dim_haffine(&pres)?;
    let dim_a = dim_affine(&pres);
    let cross = dim_affine_via_forms(&pres)?;
    if cross != dim_a {
        return Err(Error::InvalidStructure(format!(
            "affine dimension {dim_a} disagrees with the top-grade form count {cross}"
        )));
    }
    let verdict = classify(&pres)?;
    let evidence = match &verdict {
        Verdict::Affine => None,
        Verdict::NonAffine { evidence } => Some(FormReport {
            grade: evidence.grade(),
            coeffs: evidence.coords(),
            text: evidence.to_string(),
        }),
    };
    let witness = if flags.witness {
        bilinear_witness(&pres)?.map(|w| WitnessReport { matrix: w.matrix.to_rows() })
    } else {
        None
    };
    let f3_triple = if flags.f3 {
        find_f3_subgroup(&pres)?.map(|t| TripleReport { vectors: t.to_vec() })
    } else {
        None
    };
    let (n, rank, dim_v2) = (pres.n(), pres.rank(), pres.dim_v2());
    let basis = if flags.basis {
        let maps = haffine_basis(&Arc::new(pres))?;
        Some(maps.iter().map(|m| BasisMapReport { text: m.to_string(), terms: m.entries() }).collect())
    } else {
        None
    };
    Ok(AnalysisReport {
        digest,
        n,
        rank,
        dim_v2,
        dim_affine: dim_a,
        dim_haffine: dim_h,
        lambda_dims: dims.into_iter().map(|(k, dim)| LambdaDim { k, dim }).collect(),
        verdict: verdict.label().to_string(),
        evidence,
        witness,
        f3_triple,
        basis,
    })
}

fn render_vec(v: &[Rational]) -> String {
    format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

pub fn render_report(report: &AnalysisReport) -> String {
    let mut s = String::new();
    let mut line = |label: &str, value: String| s.push_str(&format!("{label:<14}{value}\n"));
    line("group", report.digest.clone());
    line("n", report.n.to_string());
    line("rank", report.rank.to_string());
    line("dim V2", report.dim_v2.to_string());
    line("dim A", report.dim_affine.to_string());
    line("dim A_h", report.dim_haffine.to_string());
    let dims: Vec<String> = report.lambda_dims.iter().map(|d| format!("k={}:{}", d.k, d.dim)).collect();
    line("dim Lambda^k", dims.join(" "));
    line("verdict", report.verdict.clone());
    if let Some(e) = &report.evidence {
        line("evidence", format!("{} (grade {})", e.text, e.grade));
    }
    if let Some(w) = &report.witness {
        line("witness B", String::new());
        for row in &w.matrix {
            s.push_str(&format!("  {}\n", render_vec(row)));
        }
    }
    if let Some(t) = &report.f3_triple {
        let vs: Vec<String> = t.vectors.iter().map(|v| render_vec(v)).collect();
        s.push_str(&format!("{:<14}{}\n", "F_3 triple", vs.join(" ")));
    }
    if let Some(b) = &report.basis {
        s.push_str(&format!("{:<14}{} maps\n", "basis", b.len()));
        for m in b {
            s.push_str(&format!("  {}\n", m.text));
        }
    }
    s
}

fn error_exit(err: &Error) -> i32 {
    match err {
        Error::Parse(_) => EXIT_USAGE,
        _ => EXIT_INVALID_SPEC,
    }
}

fn emit_report(report: &AnalysisReport, json: bool, out: &mut dyn Write) -> std::io::Result<()> {
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(report).expect("reports serialize"))
    } else {
        write!(out, "{}", render_report(report))
    }
}

/// Outcome of one gallery entry.
#[derive(Clone, Debug, Serialize)]
pub struct ExampleOutcome {
    pub name: String,
    pub matched: bool,
    pub lines: Vec<String>,
}

pub fn run_example(entry: &GalleryEntry, seed: u64, trials: u64) -> Result<(AnalysisReport, ExampleOutcome)> {
    let spec = (entry.build)()?;
    let report = analyze(&spec, ReportFlags::default())?;
    let pres = spec.presentation()?;
    let mut lines = Vec::new();
    let mut matched = true;
    for exp in &entry.expectations {
        let actual = match &exp.field {
            Field::Rank(_) => report.rank.to_string(),
            Field::DimV2(_) => report.dim_v2.to_string(),
            Field::DimAffine(_) => report.dim_affine.to_string(),
            Field::DimHAffine(_) => report.dim_haffine.to_string(),
            Field::LambdaDim { grade, .. } => report
                .lambda_dims
                .iter()
                .find(|d| d.k == *grade)
                .map_or(0, |d| d.dim)
                .to_string(),
            Field::Verdict(_) => report.verdict.clone(),
            Field::Evidence(_) => report.evidence.as_ref().map_or("none".into(), |e| e.text.clone()),
        };
        let ok = actual == exp.field.expected();
        matched &= ok;
        lines.push(format!(
            "{} {} = {} (expected {}) [{}]",
            if ok { "ok  " } else { "FAIL" },
            exp.field.name(),
            actual,
            exp.field.expected(),
            exp.provenance.tag()
        ));
    }
    for extra in &entry.extras {
        match extra.run(&pres, seed, trials)? {
            Ok(()) => lines.push(format!("ok   {}", extra.describe())),
            Err(why) => {
                matched = false;
                lines.push(format!("FAIL {}: {why}", extra.describe()));
            }
        }
    }
    Ok((report, ExampleOutcome { name: entry.name.to_string(), matched, lines }))
}

fn write_spec(dir: &Path, entry: &GalleryEntry) -> Result<PathBuf> {
    let spec = (entry.build)()?;
    let path = dir.join(format!("{}.json", entry.name));
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(&path, spec.to_json() + "\n"))
        .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "io error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    match &cli.command {
        Command::Analyze { file, flags } => {
            let text = match std::fs::read_to_string(file) {
                Ok(t) => t,
                Err(e) => {
                    writeln!(err, "cannot read {}: {e}", file.display())?;
                    return Ok(EXIT_USAGE);
                }
            };
            let outcome = GroupSpec::from_json(&text).and_then(|spec| analyze(&spec, *flags));
            match outcome {
                Ok(report) => {
                    emit_report(&report, cli.json, out)?;
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    writeln!(err, "{}: {e}", file.display())?;
                    Ok(error_exit(&e))
                }
            }
        }
        Command::Free { n, flags } => {
            if !(2..=crate::exterior::MAX_DIM).contains(n) {
                writeln!(err, "free rank must be between 2 and {}, got {n}", crate::exterior::MAX_DIM)?;
                return Ok(EXIT_USAGE);
            }
            if *n > LARGE_FREE_RANK {
                writeln!(err, "warning: rank {n} is large; the basis alone has 2^{n} maps")?;
            }
            let pres = free_group(*n).expect("rank checked above");
            let spec = GroupSpec::from_structure(&crate::carnot::free_structure(*n));
            match analyze_presentation(spec_digest(&spec), pres, *flags) {
                Ok(report) => {
                    emit_report(&report, cli.json, out)?;
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    writeln!(err, "{e}")?;
                    Ok(error_exit(&e))
                }
            }
        }
        Command::Examples { name, all, list, emit_specs } => {
            if *list {
                for e in gallery::entries() {
                    writeln!(out, "{:<18}{}", e.name, e.summary)?;
                }
                return Ok(EXIT_OK);
            }
            let selected: Vec<GalleryEntry> = match (name, all) {
                (_, true) => gallery::entries(),
                (Some(n), false) => match gallery::find(n) {
                    Some(e) => vec![e],
                    None => {
                        writeln!(err, "unknown example {n:?}; try --list")?;
                        return Ok(EXIT_USAGE);
                    }
                },
                (None, false) => {
                    writeln!(err, "give an example name or --all")?;
                    return Ok(EXIT_USAGE);
                }
            };
            if let Some(dir) = emit_specs {
                for entry in &selected {
                    match write_spec(dir, entry) {
                        Ok(path) => writeln!(out, "wrote {}", path.display())?,
                        Err(e) => {
                            writeln!(err, "{e}")?;
                            return Ok(EXIT_USAGE);
                        }
                    }
                }
                return Ok(EXIT_OK);
            }
            let mut all_matched = true;
            let mut outcomes = Vec::new();
            for entry in &selected {
                match run_example(entry, cli.seed, cli.trials) {
                    Ok((_, outcome)) => {
                        all_matched &= outcome.matched;
                        if !cli.json {
                            writeln!(out, "{} [{}]", entry.name, if outcome.matched { "match" } else { "MISMATCH" })?;
                            for l in &outcome.lines {
                                writeln!(out, "  {l}")?;
                            }
                        }
                        outcomes.push(outcome);
                    }
                    Err(e) => {
                        writeln!(err, "{}: {e}", entry.name)?;
                        return Ok(EXIT_INVALID_SPEC);
                    }
                }
            }
            if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&outcomes).expect("outcomes serialize"))?;
            }
            Ok(if all_matched { EXIT_OK } else { EXIT_MISMATCH })
        }
        Command::Check { only } => {
            let cfg = CheckConfig::new(cli.seed, cli.trials);
            let results = match only {
                Some(filter) => checks::run_selected(&cfg, |name| name.contains(filter.as_str())),
                None => checks::run_all(&cfg),
            };
            if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&results).expect("results serialize"))?;
            } else {
                for r in &results {
                    match &r.witness {
                        None => writeln!(out, "PASS {}", r.name)?,
                        Some(w) => writeln!(out, "FAIL {}: {w}", r.name)?,
                    }
                }
            }
            Ok(if results.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_MISMATCH })
        }
    }
}
