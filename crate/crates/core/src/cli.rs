//! Command-line front end: read a system file, run the semi-algebraic or the
//! exponential pipeline, print a [`ResultDocument`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::format::{parse_system, SystemFile, SystemKind};
use crate::homotopy::{StartKind, TrackStats};
use crate::interval::IntervalBox;
use crate::semialg::{real_root_semi, FilterStage, RemovalReason};
use crate::transcend::{solve_transcendental, TranscendError};
use crate::verify::IsolateConfig;

pub const EXIT_BOXES: i32 = 0;
pub const EXIT_NO_SOLUTIONS: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;
pub const EXIT_SOLVER_FAILURE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Semialg,
    Transcend,
}

/// Certified real root isolation for semi-algebraic systems.
#[derive(Debug, Clone, Parser)]
#[command(name = "semiroot", version)]
pub struct Args {
    /// System file.
    pub file: PathBuf,
    /// Target box width.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Seed for the random homotopy parameters.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Significant digits in printed interval endpoints.
    #[arg(long, default_value_t = 15, value_parser = clap::value_parser!(u32).range(1..=40))]
    pub digits: u32,
    /// Print the result as JSON.
    #[arg(long)]
    pub json: bool,
    /// Pipeline; defaults to `transcend` for files with exp terms.
    #[arg(long, value_enum)]
    pub pipeline: Option<Pipeline>,
}

impl Args {
    /// Defaults for `file`, as if no flags were given.
    pub fn for_file(file: impl Into<PathBuf>) -> Self {
        Args {
            file: file.into(),
            tau: None,
            seed: None,
            digits: 15,
            json: false,
            pipeline: None,
        }
    }
}

/// Kind of guarantee attached to an output box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    /// Krawczyk proved exactly one root in the box.
    KrawczykUnique,
    /// Newton-refined approximation, not certified.
    RefinedPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputBox {
    /// `[lo, hi]` decimal strings per variable, rounded outward.
    pub intervals: Vec<[String; 2]>,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovedBox {
    pub intervals: Vec<[String; 2]>,
    pub stage: FilterStage,
    pub constraint: String,
    pub reason: RemovalReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub parse_ms: f64,
    pub solve_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub pipeline: Pipeline,
    pub seed: u64,
    pub tau: f64,
    pub paths: TrackStats,
    /// Boxes isolated before constraint filtering.
    pub isolated: usize,
    pub sign_solves: usize,
    /// Regions that could not be decided, as decimal boxes.
    pub undecided: Vec<Vec<[String; 2]>>,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultDocument {
    pub variables: Vec<String>,
    pub boxes: Vec<OutputBox>,
    pub removed: Vec<RemovedBox>,
    pub metadata: RunMetadata,
}

impl ResultDocument {
    /// Plain-text rendering; every field of the JSON form appears.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        let _ = writeln!(
            out,
            "pipeline: {}",
            m.pipeline.to_possible_value().expect("no skipped variants").get_name()
        );
        let _ = writeln!(out, "seed: {}  tau: {:e}", m.seed, m.tau);
        let p = &m.paths;
        let _ = writeln!(
            out,
            "paths: {} (converged {}, inaccurate {}, failed {}, diverged {}, deduplicated {}, retracked {})",
            p.paths, p.converged, p.inaccurate, p.failed, p.diverged, p.deduplicated, p.retracked
        );
        let _ = writeln!(out, "isolated: {}  sign solves: {}", m.isolated, m.sign_solves);
        let _ = writeln!(out, "boxes: {}", self.boxes.len());
        for (i, b) in self.boxes.iter().enumerate() {
            let _ = writeln!(out, "  #{} {:?}", i + 1, b.certificate);
            for (name, [lo, hi]) in self.variables.iter().zip(&b.intervals) {
                let _ = writeln!(out, "    {name} in [{lo}, {hi}]");
            }
        }
        let _ = writeln!(out, "removed: {}", self.removed.len());
        for r in &self.removed {
            let iv: Vec<String> = r.intervals.iter().map(|[a, b]| format!("[{a}, {b}]")).collect();
            let _ = writeln!(
                out,
                "  {:?} {:?} by {}: {}",
                r.stage,
                r.reason,
                r.constraint,
                iv.join(" x ")
            );
        }
        if !m.undecided.is_empty() {
            let _ = writeln!(out, "undecided: {}", m.undecided.len());
            for u in &m.undecided {
                let iv: Vec<String> = u.iter().map(|[a, b]| format!("[{a}, {b}]")).collect();
                let _ = writeln!(out, "  {}", iv.join(" x "));
            }
        }
        let _ = writeln!(
            out,
            "time: parse {:.3} ms, solve {:.3} ms",
            m.timings.parse_ms, m.timings.solve_ms
        );
        out
    }
}

/// `x` rounded to `digits` significant decimal digits, towards `+∞` when
/// `up` and towards `−∞` otherwise, in scientific notation.
pub fn directed_decimal(x: f64, digits: u32, up: bool) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1) as usize;
    // 800 fractional digits print any f64 exactly.
    let exact = format!("{:.800e}", x.abs());
    let (mant, exp) = exact.split_once('e').expect("scientific format");
    let mut exp: i32 = exp.parse().expect("exponent");
    let all: Vec<u8> = mant.bytes().filter(|b| b.is_ascii_digit()).map(|b| b - b'0').collect();
    let mut kept = all[..digits.min(all.len())].to_vec();
    let dropped_nonzero = all[kept.len()..].iter().any(|&d| d != 0);
    let away_from_zero = up == (x > 0.0);
    if dropped_nonzero && away_from_zero {
        let mut i = kept.len();
        loop {
            if i == 0 {
                kept.insert(0, 1);
                kept.pop();
                exp += 1;
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    while kept.len() > 1 && *kept.last().expect("non-empty") == 0 {
        kept.pop();
    }
    let mut s = String::new();
    if x < 0.0 {
        s.push('-');
    }
    s.push((b'0' + kept[0]) as char);
    if kept.len() > 1 {
        s.push('.');
        s.extend(kept[1..].iter().map(|&d| (b'0' + d) as char));
    }
    let _ = write!(s, "e{exp}");
    s
}

fn decimal_box(b: &IntervalBox, digits: u32) -> Vec<[String; 2]> {
    b.iter()
        .map(|c| {
            [
                directed_decimal(c.lo(), digits, false),
                directed_decimal(c.hi(), digits, true),
            ]
        })
        .collect()
}

/// A run that ended without a document.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub code: i32,
    pub message: String,
}

fn input_error(message: impl Into<String>) -> RunError {
    RunError {
        code: EXIT_INPUT_ERROR,
        message: message.into(),
    }
}

fn solver_error(message: impl Into<String>) -> RunError {
    RunError {
        code: EXIT_SOLVER_FAILURE,
        message: message.into(),
    }
}

/// Runs the pipeline on already-read file text. The exit code is
/// [`EXIT_BOXES`], [`EXIT_NO_SOLUTIONS`] or [`EXIT_SOLVER_FAILURE`] (the last
/// when undecided regions remain).
pub fn run_text(text: &str, args: &Args) -> Result<(i32, ResultDocument), RunError> {
    let t0 = Instant::now();
    let file = parse_system(text).map_err(|e| input_error(e.to_string()))?;
    let parse_ms = t0.elapsed().as_secs_f64() * 1e3;
    let pipeline = args.pipeline.unwrap_or(match file.kind() {
        SystemKind::SemiAlgebraic => Pipeline::Semialg,
        SystemKind::Exponential => Pipeline::Transcend,
    });
    let t1 = Instant::now();
    let (code, mut doc) = match pipeline {
        Pipeline::Semialg => run_semialg(&file, args)?,
        Pipeline::Transcend => run_transcend(&file, args)?,
    };
    doc.metadata.timings = Timings {
        parse_ms,
        solve_ms: t1.elapsed().as_secs_f64() * 1e3,
    };
    Ok((code, doc))
}

fn isolate_config(file: &SystemFile, args: &Args) -> Result<IsolateConfig, RunError> {
    let mut cfg = IsolateConfig::default();
    if let Some(t) = args.tau.or(file.opts.tau) {
        if !(t > 0.0 && t.is_finite()) {
            return Err(input_error("--tau must be positive"));
        }
        cfg.tau = t;
    }
    if let Some(s) = args.seed.or(file.opts.seed) {
        cfg.tracker.rng_seed = s;
    }
    if let Some(s) = &file.opts.start {
        cfg.tracker.start = if s == "linear-product" {
            StartKind::LinearProduct
        } else {
            StartKind::TotalDegree
        };
    }
    Ok(cfg)
}

fn run_semialg(file: &SystemFile, args: &Args) -> Result<(i32, ResultDocument), RunError> {
    let sas = file.to_semialg().map_err(|e| input_error(e.to_string()))?;
    let cfg = isolate_config(file, args)?;
    let res = real_root_semi(&sas, &cfg).map_err(|e| solver_error(e.to_string()))?;
    let names = &file.vars;
    let constraint_text = |stage: FilterStage, i: usize| -> String {
        let p = match stage {
            FilterStage::Inequation => &sas.inequations[i],
            FilterStage::Nonnegative => &sas.nonnegatives[i],
            FilterStage::Positive => &sas.positives[i],
        };
        let rel = match stage {
            FilterStage::Inequation => "!= 0",
            FilterStage::Nonnegative => ">= 0",
            FilterStage::Positive => "> 0",
        };
        format!("{} {rel}", p.display_with(names))
    };
    let boxes: Vec<OutputBox> = res
        .kept()
        .iter()
        .map(|c| OutputBox {
            intervals: decimal_box(&c.bx, args.digits),
            certificate: Certificate::KrawczykUnique,
        })
        .collect();
    let removed = res
        .report
        .removed
        .iter()
        .map(|r| RemovedBox {
            intervals: decimal_box(&r.cert.bx, args.digits),
            stage: r.stage,
            constraint: constraint_text(r.stage, r.constraint),
            reason: r.reason,
        })
        .collect();
    let undecided: Vec<_> = res
        .isolation
        .undecided
        .iter()
        .map(|u| decimal_box(&u.bx, args.digits))
        .collect();
    let code = if !undecided.is_empty() {
        EXIT_SOLVER_FAILURE
    } else if boxes.is_empty() {
        EXIT_NO_SOLUTIONS
    } else {
        EXIT_BOXES
    };
    let doc = ResultDocument {
        variables: names.clone(),
        boxes,
        removed,
        metadata: RunMetadata {
            pipeline: Pipeline::Semialg,
            seed: cfg.tracker.rng_seed,
            tau: cfg.tau,
            paths: res.isolation.paths.clone(),
            isolated: res.isolation.boxes.len(),
            sign_solves: res.report.sign_solves,
            undecided,
            timings: Timings::default(),
        },
    };
    Ok((code, doc))
}

fn run_transcend(file: &SystemFile, args: &Args) -> Result<(i32, ResultDocument), RunError> {
    let sys = file.to_exp_system().map_err(|e| input_error(e.to_string()))?;
    let mut cfg = file.transcend_config();
    if let Some(s) = args.seed {
        cfg.tracker.rng_seed = s;
    }
    let tau = args.tau.or(file.opts.tau).unwrap_or(IsolateConfig::default().tau);
    let empty = |paths: TrackStats| ResultDocument {
        variables: file.vars.clone(),
        boxes: Vec::new(),
        removed: Vec::new(),
        metadata: RunMetadata {
            pipeline: Pipeline::Transcend,
            seed: cfg.tracker.rng_seed,
            tau,
            paths,
            isolated: 0,
            sign_solves: 0,
            undecided: Vec::new(),
            timings: Timings::default(),
        },
    };
    let res = match solve_transcendental(&sys, &cfg) {
        Ok(r) => r,
        Err(TranscendError::AllBoxesExcluded) => return Ok((EXIT_NO_SOLUTIONS, empty(TrackStats::default()))),
        Err(e) => return Err(solver_error(e.to_string())),
    };
    let mut doc = empty(res.paths.clone());
    doc.metadata.isolated = res.points.len();
    doc.boxes = res
        .points
        .iter()
        .map(|p| OutputBox {
            intervals: decimal_box(&IntervalBox::from_point(p), args.digits),
            certificate: Certificate::RefinedPoint,
        })
        .collect();
    Ok((EXIT_BOXES, doc))
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT_ERROR } else { 0 };
        }
    };
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.file.display());
            return EXIT_INPUT_ERROR;
        }
    };
    match run_text(&text, &args) {
        Ok((code, doc)) => {
            let out = if args.json {
                serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
            } else {
                doc.to_text()
            };
            // a closed pipe (`| head`) is not an error worth a panic
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            code
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
