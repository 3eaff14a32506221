//! Exact-rational oracles shared by the integration tests.
//!
//! Everything here works over `BigRational`, independently of the
//! floating-point code under test. Inputs are kept dyadic so that every
//! `f64` coefficient converts exactly.
#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use semiroot::format::{parse_system, SystemFile};
use semiroot::poly::{MultiPoly, PolySystem};

pub type Q = BigRational;

pub fn q(x: f64) -> Q {
    BigRational::from_float(x).expect("finite float")
}

pub fn qi(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn fixture(name: &str) -> SystemFile {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", &format!("{name}.sys")]
        .iter()
        .collect();
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_system(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

// ---------------------------------------------------------------------------
// rational intervals

#[derive(Clone, Debug, PartialEq)]
pub struct QI {
    pub lo: Q,
    pub hi: Q,
}

impl QI {
    pub fn new(lo: Q, hi: Q) -> QI {
        debug_assert!(lo <= hi);
        QI { lo, hi }
    }

    pub fn point(x: Q) -> QI {
        QI { lo: x.clone(), hi: x }
    }

    pub fn mid(&self) -> Q {
        (&self.lo + &self.hi) / qi(2, 1)
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Q::zero())
    }

    pub fn add(&self, o: &QI) -> QI {
        QI::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn sub(&self, o: &QI) -> QI {
        QI::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }

    pub fn mul(&self, o: &QI) -> QI {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        QI::new(lo, hi)
    }

    pub fn scale(&self, c: &Q) -> QI {
        self.mul(&QI::point(c.clone()))
    }

    pub fn pow(&self, k: u32) -> QI {
        if k == 0 {
            return QI::point(Q::one());
        }
        let pl = num_traits::pow(self.lo.clone(), k as usize);
        let ph = num_traits::pow(self.hi.clone(), k as usize);
        if k % 2 == 1 {
            QI::new(pl, ph)
        } else if self.contains_zero() {
            QI::new(Q::zero(), pl.max(ph))
        } else {
            QI::new(pl.clone().min(ph.clone()), pl.max(ph))
        }
    }

    pub fn intersects(&self, o: &QI) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    pub fn interior_subset(&self, o: &QI) -> bool {
        o.lo < self.lo && self.hi < o.hi
    }

    pub fn hull(&self, o: &QI) -> QI {
        QI::new(self.lo.clone().min(o.lo.clone()), self.hi.clone().max(o.hi.clone()))
    }
}

// ---------------------------------------------------------------------------
// exact polynomials

#[derive(Clone, Debug)]
pub struct QPoly {
    pub terms: Vec<(Q, Vec<u32>)>,
}

impl QPoly {
    pub fn from_multi(p: &MultiPoly) -> QPoly {
        QPoly {
            terms: p.terms().map(|(m, c)| (q(c), m.exponents().to_vec())).collect(),
        }
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        let mut s = Q::zero();
        for (c, e) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                t *= num_traits::pow(xi.clone(), k as usize);
            }
            s += t;
        }
        s
    }

    pub fn eval_interval(&self, x: &[QI]) -> QI {
        let mut s = QI::point(Q::zero());
        for (c, e) in &self.terms {
            let mut t = QI::point(c.clone());
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t = t.mul(&xi.pow(k));
                }
            }
            s = s.add(&t);
        }
        s
    }

    pub fn derivative(&self, i: usize) -> QPoly {
        let mut terms = Vec::new();
        for (c, e) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                terms.push((c * qi(e[i] as i64, 1), e2));
            }
        }
        QPoly { terms }
    }
}

// ---------------------------------------------------------------------------
// exact Krawczyk and the subdivision oracle

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QStatus {
    Unique,
    NoRoot,
    Undecided,
}

pub struct QSystem {
    pub f: Vec<QPoly>,
    pub jac: Vec<Vec<QPoly>>,
}

impl QSystem {
    pub fn new(sys: &PolySystem) -> QSystem {
        let n = sys.nvars();
        let f: Vec<QPoly> = sys.polys().iter().map(QPoly::from_multi).collect();
        let jac = f.iter().map(|p| (0..n).map(|j| p.derivative(j)).collect()).collect();
        QSystem { f, jac }
    }

    fn n(&self) -> usize {
        self.f.len()
    }

    pub fn excludes(&self, x: &[QI]) -> bool {
        self.f.iter().any(|p| !p.eval_interval(x).contains_zero())
    }

    /// Inverse of the point Jacobian, for n ≤ 2.
    fn inverse(&self, m: &[Q]) -> Option<Vec<Vec<Q>>> {
        let a: Vec<Vec<Q>> = self.jac.iter().map(|r| r.iter().map(|p| p.eval(m)).collect()).collect();
        match self.n() {
            1 => (!a[0][0].is_zero()).then(|| vec![vec![a[0][0].recip()]]),
            2 => {
                let det = &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0];
                if det.is_zero() {
                    return None;
                }
                Some(vec![
                    vec![&a[1][1] / &det, -&a[0][1] / &det],
                    vec![-&a[1][0] / &det, &a[0][0] / &det],
                ])
            }
            _ => unimplemented!("oracle handles one or two variables"),
        }
    }

    /// Krawczyk test in exact arithmetic.
    pub fn krawczyk(&self, x: &[QI]) -> QStatus {
        let n = self.n();
        let m: Vec<Q> = x.iter().map(QI::mid).collect();
        let Some(y) = self.inverse(&m) else {
            return QStatus::Undecided;
        };
        let fm: Vec<Q> = self.f.iter().map(|p| p.eval(&m)).collect();
        let jx: Vec<Vec<QI>> = self
            .jac
            .iter()
            .map(|r| r.iter().map(|p| p.eval_interval(x)).collect())
            .collect();
        let d: Vec<QI> = x
            .iter()
            .zip(&m)
            .map(|(xi, mi)| xi.sub(&QI::point(mi.clone())))
            .collect();
        let mut inside = true;
        for i in 0..n {
            let mut ki = m[i].clone();
            for j in 0..n {
                ki -= &y[i][j] * &fm[j];
            }
            let mut k = QI::point(ki);
            for j in 0..n {
                let mut c = QI::point(if i == j { Q::one() } else { Q::zero() });
                for l in 0..n {
                    c = c.sub(&jx[l][j].scale(&y[i][l]));
                }
                k = k.add(&c.mul(&d[j]));
            }
            if !k.intersects(&x[i]) {
                return QStatus::NoRoot;
            }
            inside &= k.interior_subset(&x[i]);
        }
        if inside {
            QStatus::Unique
        } else {
            QStatus::Undecided
        }
    }

    fn discard(&self, x: &[QI]) -> bool {
        self.excludes(x) || self.krawczyk(x) == QStatus::NoRoot
    }
}

fn widest(x: &[QI]) -> usize {
    let mut k = 0;
    for i in 1..x.len() {
        if x[i].width() > x[k].width() {
            k = i;
        }
    }
    k
}

fn bisect(x: &[QI]) -> (Vec<QI>, Vec<QI>) {
    let k = widest(x);
    let m = x[k].mid();
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[k] = QI::new(x[k].lo.clone(), m.clone());
    b[k] = QI::new(m, x[k].hi.clone());
    (a, b)
}

fn max_width(x: &[QI]) -> Q {
    x.iter().map(QI::width).max().unwrap()
}

/// Shrinks a box holding exactly one root to the hull of the sub-boxes of
/// width ≤ `target` that could still hold it.
fn refine(sys: &QSystem, x: Vec<QI>, target: &Q) -> Vec<QI> {
    let mut live = vec![x];
    while max_width(&live[0]) > *target {
        let mut next = Vec::new();
        for b in &live {
            let (l, r) = bisect(b);
            for c in [l, r] {
                if !sys.discard(&c) {
                    next.push(c);
                }
            }
        }
        if next.is_empty() || next.len() > 256 {
            break;
        }
        live = next;
    }
    live.iter().skip(1).fold(live[0].clone(), |h, b| {
        h.iter().zip(b).map(|(p, q)| p.hull(q)).collect()
    })
}

/// All real roots of a square system with one or two variables inside
/// `[-r, r]ⁿ`, each as an exact box of width about `target`.
///
/// Boxes are discarded by exact interval evaluation or a disjoint Krawczyk
/// image, accepted when the Krawczyk image lands in the interior, and
/// bisected otherwise. `None` if some box narrower than `min_width` stays
/// undecided or the budget runs out.
pub fn subdivision_oracle(sys: &PolySystem, r: i64, min_width: f64, target: f64) -> Option<Vec<Vec<QI>>> {
    let qs = QSystem::new(sys);
    let n = sys.nvars();
    let min_width = q(min_width);
    let target = q(target);
    let mut stack = vec![vec![QI::new(qi(-r, 1), qi(r, 1)); n]];
    let mut found: Vec<Vec<QI>> = Vec::new();
    let mut visited = 0usize;
    while let Some(x) = stack.pop() {
        visited += 1;
        if visited > 200_000 {
            return None;
        }
        if qs.excludes(&x) {
            continue;
        }
        match qs.krawczyk(&x) {
            QStatus::NoRoot => continue,
            QStatus::Unique => found.push(refine(&qs, x, &target)),
            QStatus::Undecided => {
                if max_width(&x) < min_width {
                    return None;
                }
                let (a, b) = bisect(&x);
                stack.push(a);
                stack.push(b);
            }
        }
    }
    // a root on a shared face is found from both sides
    let mut roots: Vec<Vec<QI>> = Vec::new();
    for b in found {
        if let Some(h) = roots
            .iter_mut()
            .find(|h| h.iter().zip(&b).all(|(p, q)| p.intersects(q)))
        {
            *h = h.iter().zip(&b).map(|(p, q)| p.hull(q)).collect();
        } else {
            roots.push(b);
        }
    }
    Some(roots)
}

// ---------------------------------------------------------------------------
// random systems

pub fn dyadic(rng: &mut ChaCha8Rng, k: i64, den: i64) -> f64 {
    rng.gen_range(-k..=k) as f64 / den as f64
}

/// A dense polynomial of total degree `d` in `n` variables with coefficients
/// in `{-2, -1.75, …, 2}` and a nonzero leading part.
pub fn random_dense(rng: &mut ChaCha8Rng, n: usize, d: u32) -> MultiPoly {
    let mut terms = Vec::new();
    let mut exps = vec![0u32; n];
    fn rec(n: usize, i: usize, left: u32, exps: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == n {
            out.push(exps.clone());
            return;
        }
        for e in 0..=left {
            exps[i] = e;
            rec(n, i + 1, left - e, exps, out);
        }
        exps[i] = 0;
    }
    let mut monos = Vec::new();
    rec(n, 0, d, &mut exps, &mut monos);
    for e in monos {
        let top = e.iter().sum::<u32>() == d;
        let mut c = dyadic(rng, 8, 4);
        if top && c == 0.0 {
            c = 1.0;
        }
        terms.push((c, e));
    }
    MultiPoly::from_terms(n, &terms)
}

/// A square system on two lines-by-lines pencils with known rational roots:
/// `(x + a y − r₁)(x + a y − r₂)` and `(y − s₁)(y − b x − s₂)`.
pub struct RationalFixture {
    pub system: PolySystem,
    pub roots: Vec<[Q; 2]>,
    /// Roots whose coordinates are dyadic (exactly representable).
    pub dyadic_roots: Vec<[f64; 2]>,
}

pub fn rational_fixture(rng: &mut ChaCha8Rng) -> RationalFixture {
    loop {
        let a = dyadic(rng, 4, 4);
        let b = dyadic(rng, 4, 4);
        if (1.0 + a * b).abs() < 0.25 {
            continue;
        }
        let r = [dyadic(rng, 12, 4), dyadic(rng, 12, 4)];
        let s = [dyadic(rng, 12, 4), dyadic(rng, 12, 4)];
        if (r[0] - r[1]).abs() < 0.5 {
            continue;
        }
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let c = |v: f64| MultiPoly::constant(2, v);
        let l1 = |ri: f64| &(&x + &y.scale(a)) - &c(ri);
        let f1 = &l1(r[0]) * &l1(r[1]);
        let f2 = &(&y - &c(s[0])) * &(&(&y - &x.scale(b)) - &c(s[1]));
        let (qa, qb) = (q(a), q(b));
        let mut roots = Vec::new();
        let mut dyadic_roots = Vec::new();
        for ri in r {
            let qr = q(ri);
            // on y = s₁
            let y1 = q(s[0]);
            let x1 = &qr - &qa * &y1;
            dyadic_roots.push([to_f64(&x1), s[0]]);
            roots.push([x1, y1]);
            // on y = b x + s₂:  x (1 + a b) = r − a s₂
            let x2 = (&qr - &qa * q(s[1])) / (Q::one() + &qa * &qb);
            let y2 = &qb * &x2 + q(s[1]);
            roots.push([x2, y2]);
        }
        let sep = roots.iter().enumerate().all(|(i, p)| {
            roots[i + 1..]
                .iter()
                .all(|o| (&p[0] - &o[0]).abs() + (&p[1] - &o[1]).abs() > qi(1, 4))
        });
        if !sep {
            continue;
        }
        let system = PolySystem::new(vec![f1, f2]).expect("square");
        let qs = QSystem::new(&system);
        assert!(roots.iter().all(|p| qs.f.iter().all(|f| f.eval(p).is_zero())));
        return RationalFixture {
            system,
            roots,
            dyadic_roots,
        };
    }
}

// ---------------------------------------------------------------------------
// decimals

/// Exact value of a decimal string such as `-1.25e-3`.
pub fn parse_decimal(s: &str) -> Q {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().expect("exponent")),
        None => (s, 0),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches(['-', '+']);
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("digits");
    let e = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let v = if e >= 0 {
        Q::from_integer(digits * num_traits::pow(ten, e as usize))
    } else {
        Q::new(digits, num_traits::pow(ten, (-e) as usize))
    };
    if neg {
        -v
    } else {
        v
    }
}

// ---------------------------------------------------------------------------
// interval arithmetic cases

/// Endpoints spread over many binades, with exact zeros and small integers.
pub fn endpoint() -> impl proptest::strategy::Strategy<Value = f64> {
    use proptest::prelude::*;
    prop_oneof![
        1 => Just(0.0),
        2 => (-8i32..=8).prop_map(|k| k as f64),
        6 => (-1.0..1.0f64, -30i32..=30).prop_map(|(m, e)| m * 2f64.powi(e)),
    ]
}

fn ival(a: f64, b: f64) -> semiroot::interval::Interval {
    semiroot::interval::Interval::new(a.min(b), a.max(b)).expect("ordered")
}

/// The float at fraction `s` of `x`, clamped inside.
fn pick(x: &semiroot::interval::Interval, s: f64) -> f64 {
    (x.lo() + s * (x.hi() - x.lo())).clamp(x.lo(), x.hi())
}

fn encloses(x: &semiroot::interval::Interval, v: &Q) -> bool {
    (x.lo() == f64::NEG_INFINITY || q(x.lo()) <= *v) && (x.hi() == f64::INFINITY || *v <= q(x.hi()))
}

/// Containment (exact for the field operations and powers, against libm for
/// `exp`/`ln`) at sample points, and inclusion monotonicity on a
/// sub-interval of the first argument.
pub fn check_interval_case(a: (f64, f64), b: (f64, f64), s: f64, t: f64) -> Result<(), String> {
    let (x, y) = (ival(a.0, a.1), ival(b.0, b.1));
    let (xa, yb) = (pick(&x, s), pick(&y, t));
    let (qa, qb) = (q(xa), q(yb));
    let fail = |op: &str| Err(format!("{op}: x = {x:?} ∋ {xa:e}, y = {y:?} ∋ {yb:e}"));
    if !encloses(&(x + y), &(&qa + &qb)) {
        return fail("add");
    }
    if !encloses(&(x - y), &(&qa - &qb)) {
        return fail("sub");
    }
    if !encloses(&(x * y), &(&qa * &qb)) {
        return fail("mul");
    }
    if !encloses(&(-x), &(-&qa)) {
        return fail("neg");
    }
    if !y.contains_zero() {
        let d = x.checked_div(&y).map_err(|e| e.to_string())?;
        if !encloses(&d, &(&qa / &qb)) {
            return fail("div");
        }
    }
    for k in 0..=5u32 {
        if !encloses(&x.powi(k), &num_traits::pow(qa.clone(), k as usize)) {
            return fail(&format!("powi {k}"));
        }
    }
    if !encloses(&x.sqr(), &(&qa * &qa)) {
        return fail("sqr");
    }
    if xa.abs() < 700.0 && !x.exp().contains(xa.exp()) {
        return fail("exp");
    }
    if xa > 0.0 {
        match x.ln() {
            Some(l) if l.contains(xa.ln()) => {}
            _ => return fail("ln"),
        }
    }
    // inclusion monotonicity
    let sub = ival(pick(&x, s.min(t)), pick(&x, s.max(t)));
    let mono = |op: &str, small: semiroot::interval::Interval, big: semiroot::interval::Interval| {
        if small.subset(&big) {
            Ok(())
        } else {
            Err(format!("{op} not monotone: {sub:?} ⊆ {x:?} gave {small:?} ⊄ {big:?}"))
        }
    };
    mono("add", sub + y, x + y)?;
    mono("sub", sub - y, x - y)?;
    mono("mul", sub * y, x * y)?;
    mono("sqr", sub.sqr(), x.sqr())?;
    for k in 2..=5 {
        mono("powi", sub.powi(k), x.powi(k))?;
    }
    mono("exp", sub.exp(), x.exp())?;
    if !y.contains_zero() {
        let (p, r) = (sub.checked_div(&y), x.checked_div(&y));
        mono("div", p.map_err(|e| e.to_string())?, r.map_err(|e| e.to_string())?)?;
    }
    if let (Some(p), Some(r)) = (sub.ln(), x.ln()) {
        mono("ln", p, r)?;
    }
    Ok(())
}
