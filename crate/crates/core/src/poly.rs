//! Sparse multivariate polynomials with real coefficients.
//!
//! Terms are kept in a map keyed by exponent vectors ordered graded
//! lexicographically, so iteration (and therefore printing) is canonical.
//! Evaluation is generic over [`PolyScalar`]: reals, complex numbers, and
//! intervals (the natural interval extension, with tight integer powers).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::interval::{Interval, IntervalBox, IntervalMatrix};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected} variables, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("system is not square: {equations} equations in {variables} variables")]
    NonSquare { equations: usize, variables: usize },
}

/// Exponent vector, ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Numbers a polynomial can be evaluated at.
pub trait PolyScalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn zero() -> Self;
    fn from_coef(c: f64) -> Self;
    fn powi(self, e: u32) -> Self;
}

impl PolyScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_coef(c: f64) -> Self {
        c
    }
    fn powi(self, e: u32) -> Self {
        f64::powi(self, e as i32)
    }
}

impl PolyScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_coef(c: f64) -> Self {
        Complex64::new(c, 0.0)
    }
    fn powi(self, e: u32) -> Self {
        match e {
            0 => Complex64::new(1.0, 0.0),
            1 => self,
            2 => self * self,
            _ => Complex64::powu(&self, e),
        }
    }
}

impl PolyScalar for Interval {
    fn zero() -> Self {
        Interval::ZERO
    }
    fn from_coef(c: f64) -> Self {
        Interval::point(c)
    }
    fn powi(self, e: u32) -> Self {
        Interval::powi(&self, e)
    }
}

/// Sparse polynomial in `nvars` variables. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    /// The polynomial `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, i), 1.0);
        p
    }

    /// Builds from `(coefficient, exponents)` pairs; like terms are summed.
    pub fn from_terms(nvars: usize, terms: &[(f64, Vec<u32>)]) -> Self {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(Monomial(e.clone()), *c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: f64) {
        debug_assert_eq!(m.0.len(), self.nvars);
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> f64 {
        self.terms.get(&Monomial(exps.to_vec())).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&vec![0; self.nvars])
    }

    /// Constant value if the polynomial has no non-constant terms.
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => {
                let (m, &c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then_some(c)
            }
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Highest power of variable `i` appearing in any term.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.0[i] > 0)
    }

    pub fn scale(&self, c: f64) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars);
        for (m, &v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut out = MultiPoly::constant(self.nvars, 1.0);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Exact symbolic partial derivative with respect to `x_i`.
    pub fn derivative(&self, i: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars);
        for (m, &c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut exps = m.0.clone();
                exps[i] -= 1;
                out.add_term(Monomial(exps), c * e as f64);
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }

    /// Matrix of second partial derivatives, `H[i][j] = ∂²p/∂x_i∂x_j`.
    pub fn hessian(&self) -> Vec<Vec<MultiPoly>> {
        self.gradient()
            .iter()
            .map(|g| (0..self.nvars).map(|j| g.derivative(j)).collect())
            .collect()
    }

    /// Re-embeds into `nvars + extra` variables (new variables last).
    pub fn lift(&self, extra: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars + extra);
        for (m, &c) in &self.terms {
            let mut e = m.0.clone();
            e.extend(std::iter::repeat_n(0, extra));
            out.add_term(Monomial(e), c);
        }
        out
    }

    /// Homogenizes to degree `d ≥ total_degree` with a new last variable.
    pub fn homogenize(&self, d: u32) -> MultiPoly {
        assert!(d >= self.total_degree(), "homogenizing degree below total degree");
        let mut out = MultiPoly::zero(self.nvars + 1);
        for (m, &c) in &self.terms {
            let mut e = m.0.clone();
            e.push(d - m.degree());
            out.add_term(Monomial(e), c);
        }
        out
    }

    /// Keeps only the first `nvars` variables; panics if a dropped variable
    /// is in use.
    pub fn restrict(&self, nvars: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(nvars);
        for (m, &c) in &self.terms {
            assert!(m.0[nvars..].iter().all(|&e| e == 0), "dropped variable in use");
            out.add_term(Monomial(m.0[..nvars].to_vec()), c);
        }
        out
    }

    fn check_dim(&self, found: usize) -> Result<(), PolyError> {
        if found != self.nvars {
            Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                found,
            })
        } else {
            Ok(())
        }
    }

    /// Evaluates at a point of any [`PolyScalar`] type.
    pub fn eval<T: PolyScalar>(&self, x: &[T]) -> Result<T, PolyError> {
        self.check_dim(x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked<T: PolyScalar>(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for (m, &c) in &self.terms {
            let mut t = T::from_coef(c);
            for (v, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t = t * v.powi(e);
                }
            }
            acc = acc + t;
        }
        acc
    }

    pub fn eval_real(&self, x: &[f64]) -> Result<f64, PolyError> {
        self.eval(x)
    }

    pub fn eval_complex(&self, z: &[Complex64]) -> Result<Complex64, PolyError> {
        self.eval(z)
    }

    /// Natural interval extension on a box.
    pub fn eval_interval(&self, x: &IntervalBox) -> Result<Interval, PolyError> {
        self.eval(x.components())
    }

    /// Writes the polynomial with the given variable names, highest
    /// graded-lex term first.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a MultiPoly,
    names: &'a [String],
}

pub(crate) fn format_coefficient(c: f64) -> String {
    let a = c.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{c}")
    } else {
        format!("{c:e}")
    }
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.poly.terms().rev().enumerate() {
            let neg = c < 0.0;
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let a = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if a != 1.0 || m.degree() == 0 {
                factors.push(format_coefficient(a));
            }
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.names[i].clone()),
                    _ => factors.push(format!("{}^{}", self.names[i], e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = MultiPoly::zero(self.nvars);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(-1.0)
    }
}

/// An ordered list of polynomials over the same variables.
#[derive(Clone, PartialEq, Debug)]
pub struct PolySystem {
    nvars: usize,
    polys: Vec<MultiPoly>,
}

impl PolySystem {
    pub fn new(polys: Vec<MultiPoly>) -> Result<Self, PolyError> {
        let nvars = polys.first().map(MultiPoly::nvars).unwrap_or(0);
        for p in &polys {
            p.check_dim(nvars)?;
        }
        Ok(PolySystem { nvars, polys })
    }

    /// Like [`PolySystem::new`], additionally requiring as many equations as
    /// variables.
    pub fn square(polys: Vec<MultiPoly>) -> Result<Self, PolyError> {
        let s = Self::new(polys)?;
        if s.polys.len() != s.nvars {
            return Err(PolyError::NonSquare {
                equations: s.polys.len(),
                variables: s.nvars,
            });
        }
        Ok(s)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.polys.len() == self.nvars
    }

    pub fn polys(&self) -> &[MultiPoly] {
        &self.polys
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.polys.iter().map(MultiPoly::total_degree).collect()
    }

    /// Product of total degrees.
    pub fn bezout_number(&self) -> u128 {
        self.polys.iter().map(|p| p.total_degree() as u128).product()
    }

    /// `J[i][j] = ∂f_i/∂x_j`.
    pub fn jacobian(&self) -> Vec<Vec<MultiPoly>> {
        self.polys.iter().map(MultiPoly::gradient).collect()
    }

    pub fn eval<T: PolyScalar>(&self, x: &[T]) -> Result<Vec<T>, PolyError> {
        if x.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                found: x.len(),
            });
        }
        Ok(self.polys.iter().map(|p| p.eval_unchecked(x)).collect())
    }

    pub fn eval_interval(&self, x: &IntervalBox) -> Result<IntervalBox, PolyError> {
        Ok(IntervalBox::new(self.eval(x.components())?))
    }

    pub fn push(&mut self, p: MultiPoly) -> Result<(), PolyError> {
        p.check_dim(self.nvars)?;
        self.polys.push(p);
        Ok(())
    }
}

/// Flattened polynomial for fast repeated evaluation against a power table.
#[derive(Clone, Debug)]
struct CompiledPoly {
    coefs: Vec<f64>,
    starts: Vec<usize>,
    factors: Vec<(usize, u32)>,
}

impl CompiledPoly {
    fn new(p: &MultiPoly) -> Self {
        let mut coefs = Vec::with_capacity(p.num_terms());
        let mut starts = vec![0];
        let mut factors = Vec::new();
        for (m, c) in p.terms() {
            coefs.push(c);
            for (v, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    factors.push((v, e));
                }
            }
            starts.push(factors.len());
        }
        CompiledPoly { coefs, starts, factors }
    }

    fn eval<T: PolyScalar>(&self, pows: &PowTable<T>) -> T {
        let mut acc = T::zero();
        for (k, &c) in self.coefs.iter().enumerate() {
            let mut t = T::from_coef(c);
            for &(v, e) in &self.factors[self.starts[k]..self.starts[k + 1]] {
                t = t * pows.get(v, e);
            }
            acc = acc + t;
        }
        acc
    }
}

/// `x_v^e` for every variable and every exponent up to the maximum used.
struct PowTable<T> {
    offsets: Vec<usize>,
    data: Vec<T>,
}

impl<T: PolyScalar> PowTable<T> {
    fn new(x: &[T], max_deg: &[u32]) -> Self {
        let mut offsets = Vec::with_capacity(x.len());
        let mut data = Vec::new();
        for (v, &d) in x.iter().zip(max_deg) {
            offsets.push(data.len());
            for e in 1..=d {
                data.push(v.powi(e));
            }
        }
        PowTable { offsets, data }
    }

    #[inline]
    fn get(&self, v: usize, e: u32) -> T {
        self.data[self.offsets[v] + e as usize - 1]
    }
}

/// A square system together with its symbolic Jacobian, compiled for
/// repeated evaluation.
#[derive(Clone, Debug)]
pub struct DiffSystem {
    system: PolySystem,
    jacobian: Vec<Vec<MultiPoly>>,
    max_deg: Vec<u32>,
    f: Vec<CompiledPoly>,
    jac: Vec<CompiledPoly>,
}

impl DiffSystem {
    pub fn new(system: PolySystem) -> Self {
        let jacobian = system.jacobian();
        let max_deg = (0..system.nvars())
            .map(|v| system.polys().iter().map(|p| p.degree_in(v)).max().unwrap_or(0))
            .collect();
        let f = system.polys().iter().map(CompiledPoly::new).collect();
        let jac = jacobian.iter().flatten().map(CompiledPoly::new).collect();
        DiffSystem {
            system,
            jacobian,
            max_deg,
            f,
            jac,
        }
    }

    pub fn system(&self) -> &PolySystem {
        &self.system
    }

    pub fn n(&self) -> usize {
        self.system.nvars()
    }

    pub fn jacobian_polys(&self) -> &[Vec<MultiPoly>] {
        &self.jacobian
    }

    pub fn eval<T: PolyScalar>(&self, x: &[T]) -> Vec<T> {
        let pows = PowTable::new(x, &self.max_deg);
        self.f.iter().map(|p| p.eval(&pows)).collect()
    }

    /// Values and the row-major `len × nvars` Jacobian; works for
    /// non-square systems.
    pub fn eval_rect<T: PolyScalar>(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let pows = PowTable::new(x, &self.max_deg);
        let f = self.f.iter().map(|p| p.eval(&pows)).collect();
        let j = self.jac.iter().map(|p| p.eval(&pows)).collect();
        (f, j)
    }

    /// Values and Jacobian at one point, sharing the power table.
    pub fn eval_with_jacobian<T: PolyScalar + crate::linalg::Scalar>(&self, x: &[T]) -> (Vec<T>, Matrix<T>) {
        let pows = PowTable::new(x, &self.max_deg);
        let f = self.f.iter().map(|p| p.eval(&pows)).collect();
        let j = self.jac.iter().map(|p| p.eval(&pows)).collect();
        (f, Matrix::from_vec(self.system.len(), j))
    }

    pub fn jacobian_at<T: PolyScalar + crate::linalg::Scalar>(&self, x: &[T]) -> Matrix<T> {
        let pows = PowTable::new(x, &self.max_deg);
        let j = self.jac.iter().map(|p| p.eval(&pows)).collect();
        Matrix::from_vec(self.system.len(), j)
    }

    /// Interval extension of the Jacobian over a box.
    pub fn jacobian_interval(&self, x: &IntervalBox) -> IntervalMatrix {
        let pows = PowTable::new(x.components(), &self.max_deg);
        let j = self.jac.iter().map(|p| p.eval(&pows)).collect();
        IntervalMatrix::from_flat(self.system.len(), j)
    }

    pub fn eval_interval(&self, x: &IntervalBox) -> IntervalBox {
        IntervalBox::new(self.eval(x.components()))
    }
}

/// Equations `f = 0` together with constraints `p > 0`, `n ≥ 0`, `h ≠ 0`.
#[derive(Clone, PartialEq, Debug)]
pub struct SemiAlgebraicSystem {
    pub equations: PolySystem,
    pub positives: Vec<MultiPoly>,
    pub nonnegatives: Vec<MultiPoly>,
    pub inequations: Vec<MultiPoly>,
}

impl SemiAlgebraicSystem {
    pub fn new(
        equations: PolySystem,
        positives: Vec<MultiPoly>,
        nonnegatives: Vec<MultiPoly>,
        inequations: Vec<MultiPoly>,
    ) -> Result<Self, PolyError> {
        if !equations.is_square() {
            return Err(PolyError::NonSquare {
                equations: equations.len(),
                variables: equations.nvars(),
            });
        }
        let n = equations.nvars();
        for p in positives.iter().chain(&nonnegatives).chain(&inequations) {
            p.check_dim(n)?;
        }
        Ok(SemiAlgebraicSystem {
            equations,
            positives,
            nonnegatives,
            inequations,
        })
    }

    /// A system with no constraints.
    pub fn equations_only(equations: PolySystem) -> Result<Self, PolyError> {
        Self::new(equations, vec![], vec![], vec![])
    }

    pub fn nvars(&self) -> usize {
        self.equations.nvars()
    }
}

/// Which side of zero an augmented sign test probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum SignIndex {
    /// `y² f + 1`: decides `f ≥ 0`.
    Plus,
    /// `y² f − 1`: decides `f ≤ 0`.
    Minus,
}

impl SignIndex {
    pub fn as_i32(self) -> i32 {
        match self {
            SignIndex::Plus => 1,
            SignIndex::Minus => -1,
        }
    }
}

/// Appends `y² f ± 1` to `F`, with the new variable `y` last.
pub fn augment_sign_system(system: &PolySystem, f: &MultiPoly, sign: SignIndex) -> Result<PolySystem, PolyError> {
    let n = system.nvars();
    f.check_dim(n)?;
    let mut polys: Vec<MultiPoly> = system.polys().iter().map(|p| p.lift(1)).collect();
    let y2 = MultiPoly::var(n + 1, n).pow(2);
    let g = &(&y2 * &f.lift(1)) + &MultiPoly::constant(n + 1, sign.as_i32() as f64);
    polys.push(g);
    PolySystem::new(polys)
}
