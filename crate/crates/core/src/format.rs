//! The line-oriented system file format.
//!
//! ```text
//! # comments run to end of line
//! vars: x, y
//! eq:
//!   x^2 + y - 2
//!   x + 2*y = 3          # `lhs = rhs` means lhs - rhs
//! pos:
//!   x - 0.3
//! nonneg:
//! neq:
//!   3*x + y - 4
//! exp:                   # only for systems with exp(...) terms
//!   narrow = x, y
//!   iters = 10
//!   budget = 0.01
//!   x in [0, 10]
//! opts:
//!   tau = 1e-9
//!   seed = 7
//! ```
//!
//! Expressions use `+ - * / ^` with the usual precedence, parentheses,
//! decimal literals, and `exp(...)` (exponential pipeline only). Division is
//! only by constants and `^` takes non-negative integer exponents.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::interval::{Interval, IntervalBox};
use crate::poly::{format_coefficient, MultiPoly, PolySystem, SemiAlgebraicSystem};
use crate::transcend::{ExpSystem, Expr, TranscendConfig};

/// Name of the augmentation variable; not allowed in user input.
pub const RESERVED_VARIABLE: &str = "_y";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    SyntaxError(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("system is not square: {equations} equations in {variables} variables")]
    NonSquareSystem { equations: usize, variables: usize },
    #[error("variable name `{0}` is reserved")]
    ReservedVariableName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

fn err<T>(line: usize, column: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { line, column, kind })
}

fn syntax<T>(line: usize, column: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    err(line, column, ParseErrorKind::SyntaxError(msg.into()))
}

/// Which pipeline a file asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    SemiAlgebraic,
    Exponential,
}

/// Options given in the `opts:` section.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileOptions {
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub start: Option<String>,
}

/// Settings from the `exp:` section.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpSection {
    pub narrow: Vec<usize>,
    pub iters: Option<usize>,
    pub budget: Option<f64>,
    pub bounds: BTreeMap<usize, (f64, f64)>,
}

/// A parsed system file.
///
/// Polynomial files fill `equations`; files with `exp(...)` terms or an
/// `exp:` section keep their equations as trees in `exp_equations` and may
/// not carry constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemFile {
    pub vars: Vec<String>,
    pub equations: Vec<MultiPoly>,
    pub exp_equations: Vec<Expr>,
    pub positives: Vec<MultiPoly>,
    pub nonnegatives: Vec<MultiPoly>,
    pub inequations: Vec<MultiPoly>,
    pub exp: Option<ExpSection>,
    pub opts: FileOptions,
}

fn plain_error(kind: ParseErrorKind) -> ParseError {
    ParseError {
        line: 0,
        column: 0,
        kind,
    }
}

impl SystemFile {
    pub fn kind(&self) -> SystemKind {
        if self.exp_equations.is_empty() {
            SystemKind::SemiAlgebraic
        } else {
            SystemKind::Exponential
        }
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// The semi-algebraic system; fails for exponential files.
    pub fn to_semialg(&self) -> Result<SemiAlgebraicSystem, ParseError> {
        if self.kind() == SystemKind::Exponential {
            return Err(plain_error(ParseErrorKind::SyntaxError(
                "exp systems need the transcendental pipeline".into(),
            )));
        }
        let eqs = PolySystem::new(self.equations.clone()).expect("uniform arity");
        SemiAlgebraicSystem::new(
            eqs,
            self.positives.clone(),
            self.nonnegatives.clone(),
            self.inequations.clone(),
        )
        .map_err(|_| {
            plain_error(ParseErrorKind::NonSquareSystem {
                equations: self.equations.len(),
                variables: self.nvars(),
            })
        })
    }

    /// The exponential system; every variable needs bounds.
    pub fn to_exp_system(&self) -> Result<ExpSystem, ParseError> {
        let n = self.nvars();
        let sec = self.exp.clone().unwrap_or_default();
        let residues = if self.exp_equations.is_empty() {
            self.equations.iter().map(Expr::from_poly).collect()
        } else {
            self.exp_equations.clone()
        };
        let mut bounds = Vec::with_capacity(n);
        for i in 0..n {
            let Some(&(lo, hi)) = sec.bounds.get(&i) else {
                return Err(plain_error(ParseErrorKind::SyntaxError(format!(
                    "missing bounds for `{}` in exp: section",
                    self.vars[i]
                ))));
            };
            bounds.push(Interval::new(lo, hi).expect("bounds checked at parse time"));
        }
        ExpSystem::new(n, residues, IntervalBox::new(bounds), sec.narrow.clone())
            .map_err(|e| plain_error(ParseErrorKind::SyntaxError(e.to_string())))
    }

    /// Transcendental-pipeline settings from the file, over defaults.
    pub fn transcend_config(&self) -> TranscendConfig {
        let mut cfg = TranscendConfig::default();
        if let Some(sec) = &self.exp {
            if let Some(i) = sec.iters {
                cfg.narrow_iters = i;
            }
            if let Some(b) = sec.budget {
                cfg.err_budget = b;
            }
        }
        if let Some(seed) = self.opts.seed {
            cfg.tracker.rng_seed = seed;
        }
        cfg
    }

    /// Canonical text form; parsing it gives back an identical system.
    pub fn serialize(&self) -> String {
        let names = &self.vars;
        let mut out = String::new();
        let _ = writeln!(out, "vars: {}", self.vars.join(", "));
        if !self.exp_equations.is_empty() {
            let _ = writeln!(out, "eq:");
            for e in &self.exp_equations {
                let _ = writeln!(out, "  {}", e.display_with(names));
            }
        }
        let blocks: [(&str, &[MultiPoly]); 4] = [
            ("eq", &self.equations),
            ("pos", &self.positives),
            ("nonneg", &self.nonnegatives),
            ("neq", &self.inequations),
        ];
        for (name, polys) in blocks {
            if polys.is_empty() && (name != "eq" || !self.exp_equations.is_empty()) {
                continue;
            }
            let _ = writeln!(out, "{name}:");
            for p in polys {
                let _ = writeln!(out, "  {}", p.display_with(names));
            }
        }
        if let Some(sec) = &self.exp {
            let _ = writeln!(out, "exp:");
            if !sec.narrow.is_empty() {
                let vs: Vec<&str> = sec.narrow.iter().map(|&i| self.vars[i].as_str()).collect();
                let _ = writeln!(out, "  narrow = {}", vs.join(", "));
            }
            if let Some(i) = sec.iters {
                let _ = writeln!(out, "  iters = {i}");
            }
            if let Some(b) = sec.budget {
                let _ = writeln!(out, "  budget = {}", format_coefficient(b));
            }
            for (&i, &(lo, hi)) in &sec.bounds {
                let _ = writeln!(
                    out,
                    "  {} in [{}, {}]",
                    self.vars[i],
                    format_coefficient(lo),
                    format_coefficient(hi)
                );
            }
        }
        let o = &self.opts;
        if o.tau.is_some() || o.seed.is_some() || o.start.is_some() {
            let _ = writeln!(out, "opts:");
            if let Some(t) = o.tau {
                let _ = writeln!(out, "  tau = {}", format_coefficient(t));
            }
            if let Some(s) = o.seed {
                let _ = writeln!(out, "  seed = {s}");
            }
            if let Some(s) = &o.start {
                let _ = writeln!(out, "  start = {s}");
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

/// Tokens with their 1-based columns.
fn tokenize(s: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            match text.parse::<f64>() {
                Ok(v) => out.push((Tok::Num(v), col)),
                Err(_) => return syntax(line, col, format!("bad number `{text}`")),
            }
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^()=".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return syntax(line, col, format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    end_col: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek() == Some(&Tok::Op('/')) {
                let col = self.col();
                self.pos += 1;
                let den = self.unary()?;
                lhs = match den.constant_value() {
                    Some(c) if c != 0.0 && c.is_finite() => lhs.div_const(c),
                    Some(_) => return syntax(self.line, col, "division by zero"),
                    None => return syntax(self.line, col, "division by a non-constant expression"),
                };
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let col = self.col();
            match self.peek() {
                Some(&Tok::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                    self.pos += 1;
                    Ok(base.powi(v as u32))
                }
                _ => syntax(self.line, col, "exponent must be a non-negative integer"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::c(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "exp" && self.peek() == Some(&Tok::Op('(')) {
                    self.pos += 1;
                    let inner = self.sum()?;
                    if !self.eat(')') {
                        return syntax(self.line, self.col(), "expected `)`");
                    }
                    if inner.contains_exp() {
                        return syntax(self.line, col, "nested exp(...) is not supported");
                    }
                    return Ok(inner.exp());
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => err(self.line, col, ParseErrorKind::UnknownVariable(name)),
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return syntax(self.line, self.col(), "expected `)`");
                }
                Ok(e)
            }
            Some(Tok::Op(c)) => syntax(self.line, col, format!("unexpected `{c}`")),
            None => syntax(self.line, col, "unexpected end of expression"),
        }
    }
}

/// An expression line before lowering.
struct RawExpr {
    expr: Expr,
    line: usize,
}

fn parse_expr_line(text: &str, line: usize, col0: usize, vars: &[String]) -> Result<Expr, ParseError> {
    let toks = tokenize(text, line, col0)?;
    let end_col = col0 + text.chars().count();
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        line,
        end_col,
        vars,
    };
    let lhs = p.sum()?;
    let e = if p.eat('=') { lhs - p.sum()? } else { lhs };
    if p.pos != toks.len() {
        return syntax(line, p.col(), "unexpected trailing input");
    }
    Ok(e)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    Eq,
    Pos,
    Nonneg,
    Neq,
    Exp,
    Opts,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_') && cs.all(|c| c.is_alphanumeric() || c == '_')
}

fn parse_number(text: &str, line: usize, col: usize) -> Result<f64, ParseError> {
    let t = text.trim();
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() || v.is_infinite() => Ok(v),
        _ => syntax(line, col, format!("expected a number, found `{t}`")),
    }
}

fn column_of(full: &str, part: &str) -> usize {
    // `part` is a subslice of `full`
    let offset = part.as_ptr() as usize - full.as_ptr() as usize;
    full[..offset].chars().count() + 1
}

/// Parses a system file.
pub fn parse_system(text: &str) -> Result<SystemFile, ParseError> {
    let mut vars: Option<Vec<String>> = None;
    let mut section = Section::None;
    let mut raw: BTreeMap<u8, Vec<RawExpr>> = BTreeMap::new();
    let mut eq_header_line = 0;
    let mut exp: Option<ExpSection> = None;
    let mut opts = FileOptions::default();
    let mut pending_exp: Vec<(String, usize, usize)> = Vec::new();

    for (li, full) in text.lines().enumerate() {
        let line = li + 1;
        let body = strip_comment(full);
        if body.trim().is_empty() {
            continue;
        }
        // section header?
        let trimmed = body.trim_start();
        if let Some(colon) = trimmed.find(':') {
            let head = trimmed[..colon].trim();
            let rest = &trimmed[colon + 1..];
            let sec = match head {
                "vars" => Some(Section::None),
                "eq" => Some(Section::Eq),
                "pos" => Some(Section::Pos),
                "nonneg" => Some(Section::Nonneg),
                "neq" => Some(Section::Neq),
                "exp" => Some(Section::Exp),
                "opts" => Some(Section::Opts),
                _ => None,
            };
            match sec {
                Some(_) if head == "vars" => {
                    if vars.is_some() {
                        return syntax(line, column_of(full, trimmed), "duplicate vars: section");
                    }
                    let mut vs = Vec::new();
                    for part in rest.split(',') {
                        let name = part.trim();
                        let col = column_of(full, part) + (part.len() - part.trim_start().len());
                        if name.is_empty() {
                            return syntax(line, col, "empty variable name");
                        }
                        if !is_identifier(name) {
                            return syntax(line, col, format!("bad variable name `{name}`"));
                        }
                        if name == RESERVED_VARIABLE || name == "exp" {
                            return err(line, col, ParseErrorKind::ReservedVariableName(name.into()));
                        }
                        if vs.iter().any(|v| v == name) {
                            return syntax(line, col, format!("duplicate variable `{name}`"));
                        }
                        vs.push(name.to_string());
                    }
                    vars = Some(vs);
                    section = Section::None;
                    continue;
                }
                Some(s) => {
                    section = s;
                    if s == Section::Eq {
                        eq_header_line = line;
                    }
                    if s == Section::Exp && exp.is_none() {
                        exp = Some(ExpSection::default());
                    }
                    if !rest.trim().is_empty() {
                        return syntax(line, column_of(full, rest), "section header takes no inline content");
                    }
                    continue;
                }
                None => {}
            }
        }
        let col0 = column_of(full, trimmed);
        match section {
            Section::None => return syntax(line, col0, "content outside any section"),
            Section::Eq | Section::Pos | Section::Nonneg | Section::Neq => {
                let Some(vs) = vars.as_ref() else {
                    return syntax(line, col0, "expressions before vars: declaration");
                };
                let expr = parse_expr_line(trimmed.trim_end(), line, col0, vs)?;
                let idx = match section {
                    Section::Eq => 0,
                    Section::Pos => 1,
                    Section::Nonneg => 2,
                    _ => 3,
                };
                raw.entry(idx).or_default().push(RawExpr { expr, line });
            }
            Section::Exp => pending_exp.push((trimmed.trim_end().to_string(), line, col0)),
            Section::Opts => {
                let Some((k, v)) = trimmed.split_once('=') else {
                    return syntax(line, col0, "expected `key = value`");
                };
                let vcol = column_of(full, v);
                match k.trim() {
                    "tau" => {
                        let t = parse_number(v, line, vcol)?;
                        if !(t > 0.0 && t.is_finite()) {
                            return syntax(line, vcol, "tau must be positive");
                        }
                        opts.tau = Some(t);
                    }
                    "seed" => match v.trim().parse::<u64>() {
                        Ok(s) => opts.seed = Some(s),
                        Err(_) => return syntax(line, vcol, "seed must be a non-negative integer"),
                    },
                    "start" => match v.trim() {
                        s @ ("total-degree" | "linear-product") => opts.start = Some(s.to_string()),
                        _ => return syntax(line, vcol, "start must be total-degree or linear-product"),
                    },
                    other => return syntax(line, col0, format!("unknown option `{other}`")),
                }
            }
        }
    }

    let Some(vars) = vars else {
        return syntax(1, 1, "missing vars: declaration");
    };
    let n = vars.len();
    if let Some(sec) = exp.as_mut() {
        for (text, line, col0) in pending_exp {
            parse_exp_line(&text, line, col0, &vars, sec)?;
        }
    }

    if let Some(r) = raw
        .iter()
        .filter(|(k, _)| **k != 0)
        .flat_map(|(_, v)| v.iter())
        .find(|r| r.expr.contains_exp())
    {
        return syntax(r.line, 1, "exp(...) is only supported in equations");
    }
    let eq_exprs: Vec<Expr> = raw.remove(&0).unwrap_or_default().into_iter().map(|r| r.expr).collect();
    if eq_exprs.len() != n {
        return err(
            eq_header_line.max(1),
            1,
            ParseErrorKind::NonSquareSystem {
                equations: eq_exprs.len(),
                variables: n,
            },
        );
    }
    let exponential = exp.is_some() || eq_exprs.iter().any(Expr::contains_exp);
    let mut polys = |idx: u8| -> Vec<MultiPoly> {
        raw.remove(&idx)
            .unwrap_or_default()
            .iter()
            .map(|r| r.expr.to_poly(n, &mut |_| Err(())).expect("no exp outside equations"))
            .collect()
    };
    let (positives, nonnegatives, inequations) = (polys(1), polys(2), polys(3));
    if exponential && !(positives.is_empty() && nonnegatives.is_empty() && inequations.is_empty()) {
        return syntax(1, 1, "constraints cannot be combined with the exp pipeline");
    }
    let (equations, exp_equations) = if exponential {
        (Vec::new(), eq_exprs)
    } else {
        let eqs = eq_exprs
            .iter()
            .map(|e| e.to_poly(n, &mut |_| Err(())).expect("checked above"))
            .collect();
        (eqs, Vec::new())
    };
    Ok(SystemFile {
        vars,
        equations,
        exp_equations,
        positives,
        nonnegatives,
        inequations,
        exp,
        opts,
    })
}

fn parse_exp_line(
    text: &str,
    line: usize,
    col0: usize,
    vars: &[String],
    sec: &mut ExpSection,
) -> Result<(), ParseError> {
    let var_index = |name: &str, col: usize| -> Result<usize, ParseError> {
        vars.iter()
            .position(|v| v == name)
            .map_or_else(|| err(line, col, ParseErrorKind::UnknownVariable(name.to_string())), Ok)
    };
    if let Some((k, v)) = text.split_once('=') {
        let vcol = col0 + text[..text.len() - v.len()].chars().count();
        match k.trim() {
            "narrow" => {
                for part in v.split(',') {
                    let name = part.trim();
                    let i = var_index(name, vcol)?;
                    if !sec.narrow.contains(&i) {
                        sec.narrow.push(i);
                    }
                }
            }
            "iters" => match v.trim().parse::<usize>() {
                Ok(i) => sec.iters = Some(i),
                Err(_) => return syntax(line, vcol, "iters must be a non-negative integer"),
            },
            "budget" => {
                let b = parse_number(v, line, vcol)?;
                if !(b > 0.0) {
                    return syntax(line, vcol, "budget must be positive");
                }
                sec.budget = Some(b);
            }
            other => return syntax(line, col0, format!("unknown exp setting `{other}`")),
        }
        return Ok(());
    }
    // `x in [lo, hi]`
    let Some((name, range)) = text.split_once(" in ") else {
        return syntax(line, col0, "expected `key = value` or `var in [lo, hi]`");
    };
    let i = var_index(name.trim(), col0)?;
    let rcol = col0 + text.len() - range.len();
    let r = range.trim();
    let inner = r
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .map_or_else(|| syntax(line, rcol, "expected `[lo, hi]`"), Ok)?;
    let Some((lo, hi)) = inner.split_once(',') else {
        return syntax(line, rcol, "expected `[lo, hi]`");
    };
    let (lo, hi) = (parse_number(lo, line, rcol)?, parse_number(hi, line, rcol)?);
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return syntax(line, rcol, "bounds must be finite with lo <= hi");
    }
    sec.bounds.insert(i, (lo, hi));
    Ok(())
}
