//! Square systems with `exp` terms.
//!
//! The pipeline narrows the designated variables with a sound branch-and-prune
//! cover, replaces each `exp(L(x))` by a Taylor polynomial whose remainder is
//! bounded over the narrowed box, solves the resulting polynomial system by
//! homotopy continuation, and polishes the real candidates with damped Newton
//! on the original transcendental system.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;
use thiserror::Error;

use crate::homotopy::{track_all, HomotopyError, StartKind, TrackStats, TrackerConfig};
use crate::interval::{Interval, IntervalBox, IntervalMatrix};
use crate::linalg::Matrix;
use crate::poly::{format_coefficient, MultiPoly, PolySystem};
use crate::verify::krawczyk_image;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranscendError {
    #[error("system is not square: {equations} equations in {variables} variables")]
    NonSquare { equations: usize, variables: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variable {var} occurs in an exp argument but is not designated for narrowing")]
    ArgumentOutsideNarrowing { var: usize },
    #[error("nested exp is not supported")]
    NestedExp,
    #[error("no root in the starting bounds")]
    AllBoxesExcluded,
    #[error("exp term {term} needs a Taylor order above {cap} (remainder bound {bound:e})")]
    OrderCapExceeded { term: usize, cap: u32, bound: f64 },
    #[error("no candidate converged on the original system")]
    NoConvergedRoots,
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
}

/// Expression tree over variables `x_0 .. x_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// Division by a nonzero constant.
    Div(Box<Expr>, f64),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn powi(self, k: u32) -> Expr {
        Expr::Pow(Box::new(self), k)
    }

    pub fn div_const(self, c: f64) -> Expr {
        Expr::Div(Box::new(self), c)
    }

    /// Sum of monomials of `p`.
    pub fn from_poly(p: &MultiPoly) -> Expr {
        let mut out: Option<Expr> = None;
        for (m, c) in p.terms().rev() {
            let mut t = Expr::Const(c);
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    let v = if e == 1 { Expr::Var(i) } else { Expr::Var(i).powi(e) };
                    t = t * v;
                }
            }
            out = Some(match out {
                None => t,
                Some(acc) => acc + t,
            });
        }
        out.unwrap_or(Expr::Const(0.0))
    }

    fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Var(_) => vec![],
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => vec![a, b],
            Expr::Div(a, _) | Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) => vec![a],
        }
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            _ => self.children().into_iter().filter_map(Expr::max_var).max(),
        }
    }

    pub fn uses_var(&self, v: usize) -> bool {
        match self {
            Expr::Var(i) => *i == v,
            _ => self.children().into_iter().any(|c| c.uses_var(v)),
        }
    }

    pub fn contains_exp(&self) -> bool {
        matches!(self, Expr::Exp(_)) || self.children().into_iter().any(Expr::contains_exp)
    }

    /// Value when the expression has no variables.
    pub fn constant_value(&self) -> Option<f64> {
        match self.max_var() {
            None => Some(self.eval(&[])),
            Some(_) => None,
        }
    }

    /// Arguments of the `exp` nodes in first-occurrence order, without
    /// duplicates.
    pub fn exp_arguments<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        if let Expr::Exp(a) = self {
            if !out.contains(&&**a) {
                out.push(a);
            }
        }
        for c in self.children() {
            c.exp_arguments(out);
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, c) => a.eval(x) / c,
            Expr::Neg(a) => -a.eval(x),
            Expr::Pow(a, k) => a.eval(x).powi(*k as i32),
            Expr::Exp(a) => a.eval(x).exp(),
        }
    }

    /// Expands into a polynomial in `n` variables; `exp` nodes are replaced
    /// by whatever `on_exp` returns for their argument.
    pub fn to_poly<E>(&self, n: usize, on_exp: &mut impl FnMut(&Expr) -> Result<MultiPoly, E>) -> Result<MultiPoly, E> {
        Ok(match self {
            Expr::Const(c) => MultiPoly::constant(n, *c),
            Expr::Var(i) => MultiPoly::var(n, *i),
            Expr::Add(a, b) => &a.to_poly(n, on_exp)? + &b.to_poly(n, on_exp)?,
            Expr::Sub(a, b) => &a.to_poly(n, on_exp)? - &b.to_poly(n, on_exp)?,
            Expr::Mul(a, b) => &a.to_poly(n, on_exp)? * &b.to_poly(n, on_exp)?,
            Expr::Div(a, c) => a.to_poly(n, on_exp)?.scale(1.0 / c),
            Expr::Neg(a) => -&a.to_poly(n, on_exp)?,
            Expr::Pow(a, k) => a.to_poly(n, on_exp)?.pow(*k),
            Expr::Exp(a) => on_exp(a)?,
        })
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    /// Text form using `names`; the file parser reads it back to the same
    /// tree.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        ExprDisplay { e: self, names }
    }
}

struct ExprDisplay<'a> {
    e: &'a Expr,
    names: &'a [String],
}

impl ExprDisplay<'_> {
    fn child(&self, e: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = ExprDisplay { e, names: self.names };
        if e.prec() < min_prec {
            write!(f, "({d})")
        } else {
            write!(f, "{d}")
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.e {
            Expr::Const(c) if c.is_sign_negative() => write!(f, "-{}", format_coefficient(-c)),
            Expr::Const(c) => write!(f, "{}", format_coefficient(*c)),
            Expr::Var(i) => match self.names.get(*i) {
                Some(s) => write!(f, "{s}"),
                None => write!(f, "x{i}"),
            },
            Expr::Add(a, b) => {
                self.child(a, 1, f)?;
                write!(f, " + ")?;
                self.child(b, 2, f)
            }
            Expr::Sub(a, b) => {
                self.child(a, 1, f)?;
                write!(f, " - ")?;
                self.child(b, 2, f)
            }
            Expr::Mul(a, b) => {
                self.child(a, 2, f)?;
                write!(f, "*")?;
                self.child(b, 3, f)
            }
            Expr::Div(a, c) => {
                self.child(a, 2, f)?;
                if c.is_sign_negative() {
                    write!(f, "/(-{})", format_coefficient(-c))
                } else {
                    write!(f, "/{}", format_coefficient(*c))
                }
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                self.child(a, 3, f)
            }
            Expr::Pow(a, k) => {
                self.child(a, 5, f)?;
                write!(f, "^{k}")
            }
            Expr::Exp(a) => write!(
                f,
                "exp({})",
                ExprDisplay {
                    e: a,
                    names: self.names
                }
            ),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

// ---------------------------------------------------------------------------
// Compiled form

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, f64),
    Neg(usize),
    Pow(usize, u32),
    Exp(usize),
}

/// Post-order tape of an expression tree; the root is the last entry and
/// every node has exactly one parent.
#[derive(Debug, Clone)]
struct Tape {
    ops: Vec<Op>,
}

trait Num: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn lift(c: f64) -> Self;
    fn div_c(self, c: f64) -> Self;
    fn pow(self, k: u32) -> Self;
    fn exp_(self) -> Self;
}

impl Num for f64 {
    fn lift(c: f64) -> Self {
        c
    }
    fn div_c(self, c: f64) -> Self {
        self / c
    }
    fn pow(self, k: u32) -> Self {
        self.powi(k as i32)
    }
    fn exp_(self) -> Self {
        self.exp()
    }
}

impl Num for Interval {
    fn lift(c: f64) -> Self {
        Interval::point(c)
    }
    fn div_c(self, c: f64) -> Self {
        self.checked_div(&Interval::point(c)).expect("nonzero divisor")
    }
    fn pow(self, k: u32) -> Self {
        self.powi(k)
    }
    fn exp_(self) -> Self {
        self.exp()
    }
}

impl Tape {
    fn compile(e: &Expr) -> Tape {
        fn go(e: &Expr, ops: &mut Vec<Op>) -> usize {
            let op = match e {
                Expr::Const(c) => Op::Const(*c),
                Expr::Var(i) => Op::Var(*i),
                Expr::Add(a, b) => Op::Add(go(a, ops), go(b, ops)),
                Expr::Sub(a, b) => Op::Sub(go(a, ops), go(b, ops)),
                Expr::Mul(a, b) => Op::Mul(go(a, ops), go(b, ops)),
                Expr::Div(a, c) => Op::Div(go(a, ops), *c),
                Expr::Neg(a) => Op::Neg(go(a, ops)),
                Expr::Pow(a, k) => Op::Pow(go(a, ops), *k),
                Expr::Exp(a) => Op::Exp(go(a, ops)),
            };
            ops.push(op);
            ops.len() - 1
        }
        let mut ops = Vec::new();
        go(e, &mut ops);
        Tape { ops }
    }

    fn forward<T: Num>(&self, x: &[T], vals: &mut Vec<T>) {
        vals.clear();
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => T::lift(c),
                Op::Var(i) => x[i],
                Op::Add(a, b) => vals[a] + vals[b],
                Op::Sub(a, b) => vals[a] - vals[b],
                Op::Mul(a, b) => vals[a] * vals[b],
                Op::Div(a, c) => vals[a].div_c(c),
                Op::Neg(a) => -vals[a],
                Op::Pow(a, k) => vals[a].pow(k),
                Op::Exp(a) => vals[a].exp_(),
            };
            vals.push(v);
        }
    }

    fn eval<T: Num>(&self, x: &[T]) -> T {
        let mut vals = Vec::with_capacity(self.ops.len());
        self.forward(x, &mut vals);
        *vals.last().expect("non-empty tape")
    }

    /// Value and gradient (forward mode) with respect to `x`.
    fn eval_grad<T: Num>(&self, x: &[T]) -> (T, Vec<T>) {
        let n = x.len();
        let zero = T::lift(0.0);
        let mut vals: Vec<T> = Vec::with_capacity(self.ops.len());
        let mut grads: Vec<T> = Vec::with_capacity(self.ops.len() * n);
        for op in &self.ops {
            let base = grads.len();
            let v = match *op {
                Op::Const(c) => {
                    grads.extend(std::iter::repeat_n(zero, n));
                    T::lift(c)
                }
                Op::Var(i) => {
                    grads.extend((0..n).map(|j| if j == i { T::lift(1.0) } else { zero }));
                    x[i]
                }
                Op::Add(a, b) | Op::Sub(a, b) => {
                    let sub = matches!(op, Op::Sub(..));
                    for j in 0..n {
                        let (ga, gb) = (grads[a * n + j], grads[b * n + j]);
                        grads.push(if sub { ga - gb } else { ga + gb });
                    }
                    if sub {
                        vals[a] - vals[b]
                    } else {
                        vals[a] + vals[b]
                    }
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (vals[a], vals[b]);
                    for j in 0..n {
                        grads.push(grads[a * n + j] * vb + va * grads[b * n + j]);
                    }
                    va * vb
                }
                Op::Div(a, c) => {
                    for j in 0..n {
                        grads.push(grads[a * n + j].div_c(c));
                    }
                    vals[a].div_c(c)
                }
                Op::Neg(a) => {
                    for j in 0..n {
                        grads.push(-grads[a * n + j]);
                    }
                    -vals[a]
                }
                Op::Pow(a, k) => {
                    let d = if k == 0 {
                        zero
                    } else {
                        T::lift(k as f64) * vals[a].pow(k - 1)
                    };
                    for j in 0..n {
                        grads.push(d * grads[a * n + j]);
                    }
                    vals[a].pow(k)
                }
                Op::Exp(a) => {
                    let e = vals[a].exp_();
                    for j in 0..n {
                        grads.push(e * grads[a * n + j]);
                    }
                    e
                }
            };
            debug_assert_eq!(grads.len(), base + n);
            vals.push(v);
        }
        let last = self.ops.len() - 1;
        (vals[last], grads[last * n..].to_vec())
    }

    /// Forward-backward constraint propagation of `expr = 0` on `x`.
    /// Returns `false` when the box is proved empty.
    fn revise(&self, x: &mut [Interval], vals: &mut Vec<Interval>) -> bool {
        self.forward(x, vals);
        let last = vals.len() - 1;
        match vals[last].intersect(&Interval::ZERO) {
            Some(z) => vals[last] = z,
            None => return false,
        }
        for i in (0..self.ops.len()).rev() {
            let d = vals[i];
            match self.ops[i] {
                Op::Const(c) => {
                    if !d.contains(c) {
                        return false;
                    }
                }
                Op::Var(j) => match x[j].intersect(&d) {
                    Some(v) => x[j] = v,
                    None => return false,
                },
                Op::Add(a, b) => {
                    let Some(na) = vals[a].intersect(&(d - vals[b])) else {
                        return false;
                    };
                    vals[a] = na;
                    let Some(nb) = vals[b].intersect(&(d - na)) else {
                        return false;
                    };
                    vals[b] = nb;
                }
                Op::Sub(a, b) => {
                    let Some(na) = vals[a].intersect(&(d + vals[b])) else {
                        return false;
                    };
                    vals[a] = na;
                    let Some(nb) = vals[b].intersect(&(na - d)) else {
                        return false;
                    };
                    vals[b] = nb;
                }
                Op::Mul(a, b) => {
                    let Some(na) = d.div_within(&vals[b], &vals[a]) else {
                        return false;
                    };
                    vals[a] = na;
                    let Some(nb) = d.div_within(&na, &vals[b]) else {
                        return false;
                    };
                    vals[b] = nb;
                }
                Op::Div(a, c) => {
                    let Some(na) = vals[a].intersect(&(d * c)) else {
                        return false;
                    };
                    vals[a] = na;
                }
                Op::Neg(a) => {
                    let Some(na) = vals[a].intersect(&(-d)) else {
                        return false;
                    };
                    vals[a] = na;
                }
                Op::Pow(a, k) => {
                    if k == 0 {
                        continue;
                    }
                    let pre = if k % 2 == 1 {
                        odd_root(&d, k)
                    } else {
                        let Some(r) = d.nonneg_root(k) else { return false };
                        let neg = Interval::new(-r.hi(), -r.lo()).expect("ordered");
                        match (vals[a].intersect(&r), vals[a].intersect(&neg)) {
                            (Some(p), Some(q)) => Some(p.hull(&q)),
                            (p, q) => p.or(q),
                        }
                    };
                    let Some(na) = pre.and_then(|p| vals[a].intersect(&p)) else {
                        return false;
                    };
                    vals[a] = na;
                }
                Op::Exp(a) => {
                    let Some(na) = d.ln().and_then(|l| vals[a].intersect(&l)) else {
                        return false;
                    };
                    vals[a] = na;
                }
            }
        }
        true
    }
}

/// Preimage of `d` under `t ↦ t^k` for odd `k`.
fn odd_root(d: &Interval, k: u32) -> Option<Interval> {
    let lo = if d.lo() >= 0.0 {
        Interval::point(d.lo()).nonneg_root(k)?.lo()
    } else {
        -Interval::point(-d.lo()).nonneg_root(k)?.hi()
    };
    let hi = if d.hi() >= 0.0 {
        Interval::point(d.hi()).nonneg_root(k)?.hi()
    } else {
        -Interval::point(-d.hi()).nonneg_root(k)?.lo()
    };
    Interval::new(lo, hi).ok()
}

// ---------------------------------------------------------------------------
// Systems

/// A square system of expressions with `exp` terms, the starting bounds and
/// the variables that narrowing may bisect.
#[derive(Debug, Clone)]
pub struct ExpSystem {
    nvars: usize,
    residues: Vec<Expr>,
    bounds: IntervalBox,
    narrow_vars: Vec<usize>,
    tapes: Vec<Tape>,
}

impl ExpSystem {
    /// Checks squareness, that `exp` is not nested, and that every variable
    /// inside an `exp` argument is designated for narrowing.
    pub fn new(
        nvars: usize,
        residues: Vec<Expr>,
        bounds: IntervalBox,
        narrow_vars: Vec<usize>,
    ) -> Result<Self, TranscendError> {
        if residues.len() != nvars {
            return Err(TranscendError::NonSquare {
                equations: residues.len(),
                variables: nvars,
            });
        }
        if bounds.dim() != nvars {
            return Err(TranscendError::DimensionMismatch {
                expected: nvars,
                found: bounds.dim(),
            });
        }
        for r in &residues {
            if let Some(v) = r.max_var() {
                if v >= nvars {
                    return Err(TranscendError::DimensionMismatch {
                        expected: nvars,
                        found: v + 1,
                    });
                }
            }
            let mut args = Vec::new();
            r.exp_arguments(&mut args);
            for a in args {
                if a.contains_exp() {
                    return Err(TranscendError::NestedExp);
                }
                if let Some(v) = (0..nvars).find(|&v| a.uses_var(v) && !narrow_vars.contains(&v)) {
                    return Err(TranscendError::ArgumentOutsideNarrowing { var: v });
                }
            }
        }
        if let Some(&v) = narrow_vars.iter().find(|&&v| v >= nvars) {
            return Err(TranscendError::DimensionMismatch {
                expected: nvars,
                found: v + 1,
            });
        }
        let tapes = residues.iter().map(Tape::compile).collect();
        Ok(ExpSystem {
            nvars,
            residues,
            bounds,
            narrow_vars,
            tapes,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn residues(&self) -> &[Expr] {
        &self.residues
    }

    pub fn bounds(&self) -> &IntervalBox {
        &self.bounds
    }

    pub fn narrow_vars(&self) -> &[usize] {
        &self.narrow_vars
    }

    /// Distinct `exp` arguments in order of first occurrence.
    pub fn exp_terms(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        for r in &self.residues {
            r.exp_arguments(&mut out);
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.tapes.iter().map(|t| t.eval(x)).collect()
    }

    pub fn eval_interval(&self, x: &IntervalBox) -> IntervalBox {
        self.tapes.iter().map(|t| t.eval(x.components())).collect()
    }

    /// Residues and Jacobian at a point.
    pub fn eval_with_jacobian(&self, x: &[f64]) -> (Vec<f64>, Matrix<f64>) {
        let n = self.nvars;
        let mut f = Vec::with_capacity(n);
        let mut jac = Vec::with_capacity(n * n);
        for t in &self.tapes {
            let (v, g) = t.eval_grad(x);
            f.push(v);
            jac.extend(g);
        }
        (f, Matrix::from_vec(n, jac))
    }

    fn jacobian_interval(&self, x: &IntervalBox) -> IntervalMatrix {
        let n = self.nvars;
        let mut jac = Vec::with_capacity(n * n);
        for t in &self.tapes {
            jac.extend(t.eval_grad(x.components()).1);
        }
        IntervalMatrix::from_flat(n, jac)
    }

    /// Krawczyk image of `x`, or `None` when the midpoint Jacobian is
    /// singular or the box is unbounded.
    fn krawczyk(&self, x: &IntervalBox) -> Option<IntervalBox> {
        if !x.iter().all(Interval::is_finite) {
            return None;
        }
        let m = x.mid();
        let fm = self.eval_interval(&IntervalBox::from_point(&m));
        let jx = self.jacobian_interval(x);
        let y = jx.midpoint().ok()?.inverse().ok()?;
        let k = krawczyk_image(&m, &fm, &jx, &y, x);
        k.iter().all(Interval::is_finite).then_some(k)
    }
}

// ---------------------------------------------------------------------------
// Narrowing

/// Outcome of pruning one box.
enum Pruned {
    Empty,
    /// Krawczyk certified a unique root in the (contracted) box.
    Unique,
    Open,
}

/// A finite set of boxes whose union contains every root in the bounds.
#[derive(Debug, Clone, Serialize)]
pub struct RootCover {
    #[serde(serialize_with = "serialize_boxes")]
    pub boxes: Vec<IntervalBox>,
    /// How many of `boxes` carry a unique-root certificate.
    pub certified: usize,
    pub nodes: usize,
    /// The node budget ran out; unexplored boxes are part of `boxes`.
    pub exhausted: bool,
}

fn serialize_boxes<S: serde::Serializer>(boxes: &[IntervalBox], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(boxes.len()))?;
    for b in boxes {
        let v: Vec<[f64; 2]> = b.iter().map(|c| [c.lo(), c.hi()]).collect();
        seq.serialize_element(&v)?;
    }
    seq.end()
}

struct Pruner<'a> {
    sys: &'a ExpSystem,
    vals: Vec<Interval>,
    /// Krawczyk is tried once every relative width is below this.
    newton_width: f64,
    shave_fraction: f64,
    shave_steps: usize,
}

impl Pruner<'_> {
    /// Propagation on every residue until the box stops shrinking.
    fn propagate(&mut self, comps: &mut [Interval]) -> bool {
        for _round in 0..64 {
            let before: Vec<f64> = comps.iter().map(|c| c.wid()).collect();
            for t in &self.sys.tapes {
                if !t.revise(comps, &mut self.vals) {
                    return false;
                }
            }
            if !comps.iter().zip(&before).any(|(c, &w)| c.wid() < 0.95 * w) {
                break;
            }
        }
        true
    }

    /// Shaving: refutes thin slices at each face of each coordinate with
    /// propagation, moving the face inward while that succeeds.
    fn shave(&mut self, comps: &mut [Interval]) -> bool {
        let frac = self.shave_fraction;
        for j in 0..comps.len() {
            for side in [false, true] {
                for _ in 0..self.shave_steps {
                    let c = comps[j];
                    let w = c.wid();
                    if w <= 0.0 {
                        break;
                    }
                    let (slice, rest) = if side {
                        let (l, r) = c.split_at_fraction(1.0 - frac);
                        (r, l)
                    } else {
                        c.split_at_fraction(frac)
                    };
                    let mut trial = comps.to_vec();
                    trial[j] = slice;
                    if self.propagate(&mut trial) {
                        // keep whatever the slice's contraction proves
                        comps[j] = trial[j].hull(&rest);
                        break;
                    }
                    comps[j] = rest;
                    if rest.wid() == 0.0 {
                        let mut last = comps.to_vec();
                        if !self.propagate(&mut last) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn prune(&mut self, x: &mut IntervalBox, scale: &[f64]) -> Pruned {
        let mut comps = x.components().to_vec();
        loop {
            if !self.propagate(&mut comps) {
                return Pruned::Empty;
            }
            if self.shave_fraction > 0.0 {
                let before: Vec<f64> = comps.iter().map(|c| c.wid()).collect();
                if !self.shave(&mut comps) || !self.propagate(&mut comps) {
                    return Pruned::Empty;
                }
                if comps.iter().zip(&before).any(|(c, &w)| c.wid() < 0.7 * w) {
                    continue;
                }
            }
            let rel = comps.iter().zip(scale).map(|(c, s)| c.wid() / s).fold(0.0, f64::max);
            if rel > self.newton_width {
                break;
            }
            let cur = IntervalBox::new(comps.clone());
            let Some(k) = self.sys.krawczyk(&cur) else { break };
            if k.interior_subset(&cur) {
                *x = k;
                return Pruned::Unique;
            }
            let Some(kx) = k.intersect(&cur) else {
                return Pruned::Empty;
            };
            let progress = kx.iter().zip(cur.iter()).any(|(a, b)| a.wid() < 0.9 * b.wid());
            comps = kx.into_components();
            if !progress {
                break;
            }
        }
        *x = IntervalBox::new(comps);
        Pruned::Open
    }

    /// Coordinate with the largest smear `Σ_i mag(∂f_i/∂x_j) · wid(x_j)`,
    /// falling back to the relatively widest one.
    fn split_coordinate(&self, x: &IntervalBox, scale: &[f64]) -> usize {
        let n = x.dim();
        let jac = self.sys.jacobian_interval(x);
        let smear: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|i| jac.get(i, j).mag()).sum::<f64>() * x[j].wid())
            .collect();
        let widest = (0..n)
            .max_by(|&a, &b| (x[a].wid() / scale[a]).total_cmp(&(x[b].wid() / scale[b])))
            .expect("non-empty box");
        if smear.iter().all(|v| v.is_finite()) {
            let best = (0..n)
                .max_by(|&a, &b| smear[a].total_cmp(&smear[b]))
                .expect("non-empty");
            if smear[best] > 0.0 && x[best].wid() > 0.0 {
                return best;
            }
        }
        widest
    }

    /// Contracts a certified box with Krawczyk iterations.
    fn tighten(&self, x: &mut IntervalBox) {
        for _ in 0..60 {
            let Some(k) = self.sys.krawczyk(x) else { return };
            let Some(kx) = k.intersect(x) else { return };
            if kx.max_width() >= 0.9 * x.max_width() {
                *x = kx;
                return;
            }
            *x = kx;
        }
    }
}

/// Knobs of [`root_cover`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverConfig {
    pub max_nodes: usize,
    /// Boxes narrower than this are kept undecided.
    pub min_width: f64,
    /// Krawczyk is tried once every relative width is at most this.
    pub newton_width: f64,
    /// Width fraction of each shaving slice.
    pub shave_fraction: f64,
    /// Slices tried per face.
    pub shave_steps: usize,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig {
            max_nodes: 200_000,
            min_width: 1e-9,
            newton_width: 0.2,
            shave_fraction: 0.1,
            shave_steps: 4,
        }
    }
}

/// Branch-and-prune over `bounds`: constraint propagation and face shaving
/// on every residue, Krawczyk contraction on small boxes, smear-based
/// bisection. The result covers every root in `bounds`.
pub fn root_cover(sys: &ExpSystem, bounds: &IntervalBox, cfg: &CoverConfig) -> RootCover {
    let scale: Vec<f64> = sys.bounds.iter().map(|c| c.wid().max(1e-300)).collect();
    let (max_nodes, min_width) = (cfg.max_nodes, cfg.min_width);
    let mut pruner = Pruner {
        sys,
        vals: Vec::new(),
        newton_width: cfg.newton_width,
        shave_fraction: cfg.shave_fraction,
        shave_steps: cfg.shave_steps,
    };
    let mut stack = vec![bounds.clone()];
    let mut boxes = Vec::new();
    let mut certified = 0;
    let mut nodes = 0;
    let mut exhausted = false;
    while let Some(mut x) = stack.pop() {
        if nodes >= max_nodes {
            exhausted = true;
            boxes.push(x);
            boxes.append(&mut stack);
            break;
        }
        nodes += 1;
        match pruner.prune(&mut x, &scale) {
            Pruned::Empty => {}
            Pruned::Unique => {
                pruner.tighten(&mut x);
                certified += 1;
                boxes.insert(certified - 1, x);
            }
            Pruned::Open => {
                if x.max_width() <= min_width {
                    boxes.push(x);
                    continue;
                }
                let k = pruner.split_coordinate(&x, &scale);
                let (l, r) = x.bisect(k);
                stack.push(r);
                stack.push(l);
            }
        }
    }
    RootCover {
        boxes,
        certified,
        nodes,
        exhausted,
    }
}

/// Result of [`narrow`].
#[derive(Debug, Clone, Serialize)]
pub struct Narrowing {
    #[serde(serialize_with = "crate::verify::serialize_box")]
    pub bx: IntervalBox,
    /// Halvings performed per designated variable.
    pub halvings: Vec<usize>,
    pub cover: RootCover,
}

/// Halves each designated variable `iters` times, round-robin, discarding a
/// half when it provably holds no root; the proof is that the half misses
/// every box of a [`root_cover`]. When both halves survive, the coordinate
/// shrinks to the hull of the cover instead, and halving stops for a
/// variable once that no longer helps.
pub fn narrow(sys: &ExpSystem, iters: usize, cfg: &TranscendConfig) -> Result<Narrowing, TranscendError> {
    let cover = root_cover(sys, &sys.bounds, &cfg.cover);
    if cover.boxes.is_empty() {
        return Err(TranscendError::AllBoxesExcluded);
    }
    let mut bx = sys.bounds.clone();
    let mut halvings = vec![0; sys.narrow_vars.len()];
    let mut stuck = vec![false; sys.narrow_vars.len()];
    let alive = |b: &IntervalBox| cover.boxes.iter().any(|c| c.intersects(b));
    for _ in 0..iters {
        for (slot, &v) in sys.narrow_vars.iter().enumerate() {
            if stuck[slot] {
                continue;
            }
            let (l, r) = bx.bisect(v);
            match (alive(&l), alive(&r)) {
                (true, true) => {
                    // Both halves meet the cover: fall back to the hull of
                    // the cover on this coordinate.
                    let hull = cover
                        .boxes
                        .iter()
                        .filter_map(|c| c.intersect(&bx))
                        .map(|c| c[v])
                        .reduce(|a, b| a.hull(&b))
                        .expect("some cover box meets bx");
                    if hull == bx[v] {
                        stuck[slot] = true;
                        continue;
                    }
                    bx = bx.with_component(v, hull);
                }
                (true, false) => bx = l,
                (false, true) => bx = r,
                (false, false) => return Err(TranscendError::AllBoxesExcluded),
            }
            halvings[slot] += 1;
        }
    }
    Ok(Narrowing { bx, halvings, cover })
}

// ---------------------------------------------------------------------------
// Taylor substitution

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorTerm {
    /// Printed argument of the `exp`.
    pub argument: String,
    pub center: f64,
    pub order: u32,
    /// Bound on `|exp(t) − taylor(t)|` over the argument's range.
    pub remainder: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorPlan {
    pub terms: Vec<TaylorTerm>,
}

/// Picks, for each `exp` term, the smallest order whose Lagrange remainder
/// over the interval extension of its argument on `bx` is within `budget`.
/// The expansion is centred at the midpoint of that extension. Orders start
/// at 1 unless the argument is a point.
pub fn plan_taylor(
    sys: &ExpSystem,
    bx: &IntervalBox,
    budget: f64,
    order_cap: u32,
) -> Result<TaylorPlan, TranscendError> {
    let names: Vec<String> = (1..=sys.nvars).map(|i| format!("x{i}")).collect();
    let mut terms = Vec::new();
    for (idx, arg) in sys.exp_terms().into_iter().enumerate() {
        let range = Tape::compile(arg).eval(bx.components());
        let c = range.mid();
        let r = (Interval::point(range.hi()) - Interval::point(c))
            .hi()
            .max((Interval::point(c) - Interval::point(range.lo())).hi());
        let m = range.exp().hi();
        let first = if range.wid() == 0.0 { 0 } else { 1 };
        let mut chosen = None;
        let mut bound = f64::INFINITY;
        for k in first..=order_cap {
            // M r^(k+1) / (k+1)!, rounded up
            let mut b = Interval::point(r).powi(k + 1) * Interval::point(m);
            for j in 2..=k + 1 {
                b = b.checked_div(&Interval::point(j as f64)).expect("nonzero");
            }
            bound = b.hi();
            if bound <= budget {
                chosen = Some(k);
                break;
            }
        }
        let Some(order) = chosen else {
            return Err(TranscendError::OrderCapExceeded {
                term: idx,
                cap: order_cap,
                bound,
            });
        };
        terms.push(TaylorTerm {
            argument: arg.display_with(&names).to_string(),
            center: c,
            order,
            remainder: bound,
        });
    }
    Ok(TaylorPlan { terms })
}

/// Polynomial surrogate: every `exp(L)` becomes
/// `e^c Σ_{j ≤ order} (L − c)^j / j!` per the plan.
pub fn substitute(sys: &ExpSystem, plan: &TaylorPlan) -> PolySystem {
    let n = sys.nvars;
    let args = sys.exp_terms();
    let mut polys = Vec::with_capacity(n);
    for r in &sys.residues {
        let p = r
            .to_poly(n, &mut |arg: &Expr| -> Result<MultiPoly, std::convert::Infallible> {
                let idx = args.iter().position(|a| *a == arg).expect("argument collected");
                let t = &plan.terms[idx];
                let l = arg.to_poly(n, &mut |_: &Expr| -> Result<MultiPoly, std::convert::Infallible> {
                    unreachable!("no nested exp")
                })?;
                let shifted = &l - &MultiPoly::constant(n, t.center);
                let mut acc = MultiPoly::constant(n, 1.0);
                let mut power = MultiPoly::constant(n, 1.0);
                let mut fact = 1.0;
                for j in 1..=t.order {
                    power = &power * &shifted;
                    fact *= j as f64;
                    acc = &acc + &power.scale(1.0 / fact);
                }
                Ok(acc.scale(t.center.exp()))
            })
            .unwrap_or_else(|e| match e {});
        polys.push(p);
    }
    PolySystem::new(polys).expect("uniform arity")
}

// ---------------------------------------------------------------------------
// Full pipeline

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscendConfig {
    /// Halvings per designated variable.
    pub narrow_iters: usize,
    /// Allowed Taylor remainder per `exp` term.
    pub err_budget: f64,
    pub order_cap: u32,
    pub cover: CoverConfig,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub newton_max_halvings: usize,
    /// Accepted residual on the original system.
    pub residual_tol: f64,
    /// Candidates with relative imaginary part above this are skipped.
    pub imag_tol: f64,
    pub dedup_tol: f64,
    pub tracker: TrackerConfig,
}

impl Default for TranscendConfig {
    fn default() -> Self {
        TranscendConfig {
            narrow_iters: 10,
            err_budget: 1e-2,
            order_cap: 12,
            cover: CoverConfig::default(),
            newton_tol: 1e-12,
            newton_max_iters: 50,
            newton_max_halvings: 20,
            residual_tol: 1e-8,
            imag_tol: 1e-4,
            dedup_tol: 1e-8,
            // paths only seed Newton on the original system, so a failed
            // path is not worth a whole second homotopy
            tracker: TrackerConfig {
                start: StartKind::LinearProduct,
                restarts: 0,
                ..TrackerConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TranscendResult {
    pub points: Vec<Vec<f64>>,
    /// Residual ∞-norm of each point on the original system.
    pub residuals: Vec<f64>,
    pub narrowing: Narrowing,
    pub plan: TaylorPlan,
    pub paths: TrackStats,
    /// Real candidates handed to Newton refinement.
    pub refined: usize,
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton on the original system; `None` if it does not reach the
/// tolerance.
pub fn refine(sys: &ExpSystem, x0: &[f64], cfg: &TranscendConfig) -> Option<Vec<f64>> {
    let mut x = x0.to_vec();
    let (mut f, mut jac) = sys.eval_with_jacobian(&x);
    let mut fn0 = norm_inf(&f);
    for _ in 0..cfg.newton_max_iters {
        if !fn0.is_finite() {
            return None;
        }
        let dx = jac.solve(&f).ok()?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=cfg.newton_max_halvings {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - t * d).collect();
            let ft = sys.eval(&trial);
            let nt = norm_inf(&ft);
            if nt.is_finite() && nt < fn0 || (nt <= fn0 && nt <= cfg.residual_tol) {
                x = trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        let step = t * norm_inf(&dx);
        if !accepted {
            break;
        }
        (f, jac) = sys.eval_with_jacobian(&x);
        fn0 = norm_inf(&f);
        if step <= cfg.newton_tol * norm_inf(&x).max(1.0) || fn0 <= cfg.newton_tol {
            break;
        }
    }
    (fn0 <= cfg.residual_tol).then_some(x)
}

/// Narrow, plan, substitute, track, refine, deduplicate. Points outside the
/// starting bounds are dropped.
pub fn solve_transcendental(sys: &ExpSystem, cfg: &TranscendConfig) -> Result<TranscendResult, TranscendError> {
    let narrowing = narrow(sys, cfg.narrow_iters, cfg)?;
    let plan = plan_taylor(sys, &narrowing.bx, cfg.err_budget, cfg.order_cap)?;
    let surrogate = substitute(sys, &plan);
    let tracked = track_all(&surrogate, &cfg.tracker)?;
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut residuals = Vec::new();
    let mut refined = 0;
    for cand in &tracked.candidates {
        if !cand.is_finite() {
            continue;
        }
        let re = cand.real_part();
        if cand.max_imag() > cfg.imag_tol * norm_inf(&re).max(1.0) {
            continue;
        }
        refined += 1;
        let Some(x) = refine(sys, &re, cfg) else { continue };
        let inside = x
            .iter()
            .zip(sys.bounds.iter())
            .all(|(v, b)| *v >= b.lo() && *v <= b.hi());
        if !inside {
            continue;
        }
        let tol = cfg.dedup_tol * norm_inf(&x).max(1.0);
        if points
            .iter()
            .any(|p| p.iter().zip(&x).all(|(a, b)| (a - b).abs() <= tol))
        {
            continue;
        }
        residuals.push(norm_inf(&sys.eval(&x)));
        points.push(x);
    }
    if points.is_empty() {
        return Err(TranscendError::NoConvergedRoots);
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .iter()
            .zip(&points[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(TranscendResult {
        points: order.iter().map(|&i| points[i].clone()).collect(),
        residuals: order.iter().map(|&i| residuals[i]).collect(),
        narrowing,
        plan,
        paths: tracked.stats,
        refined,
    })
}
