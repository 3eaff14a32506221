//! Closed-interval arithmetic with outward rounding.
//!
//! Every operation returns an interval that encloses the exact real result
//! for all points of its operands. Rounding is done by nudging an endpoint to
//! the adjacent representable value whenever the floating-point result is
//! inexact in the unsafe direction; exactness is detected with error-free
//! transformations (two-sum, fused multiply-add), so exact endpoint
//! arithmetic such as `[1,2] + [3,4]` stays exactly `[4,6]`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("invalid interval bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("division by an interval containing zero")]
    DivisionByZeroInterval,
    #[error("interval has an infinite bound")]
    NonFiniteInterval,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

// Rounding helpers: each returns a bound on the exact result of the
// operation in the named direction.

fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s == f64::INFINITY && a.is_finite() && b.is_finite() {
            f64::MAX
        } else {
            s
        };
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err < 0.0 {
        s.next_down()
    } else {
        s
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s == f64::NEG_INFINITY && a.is_finite() && b.is_finite() {
            f64::MIN
        } else {
            s
        };
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err > 0.0 {
        s.next_up()
    } else {
        s
    }
}

fn mul_exact_err(a: f64, b: f64) -> (f64, f64) {
    // 0 * inf is taken as 0, the interval convention.
    if a == 0.0 || b == 0.0 {
        return (0.0, 0.0);
    }
    let p = a * b;
    if !p.is_finite() || p == 0.0 {
        // Overflow or underflow: the error term is unusable.
        return (p, f64::NAN);
    }
    (p, a.mul_add(b, -p))
}

fn mul_down(a: f64, b: f64) -> f64 {
    let (p, e) = mul_exact_err(a, b);
    if e.is_nan() {
        if p == f64::INFINITY && a.is_finite() && b.is_finite() {
            f64::MAX
        } else if p == 0.0 {
            // Underflowed: the sign of a*b decides.
            if (a < 0.0) != (b < 0.0) {
                -f64::from_bits(1)
            } else {
                0.0
            }
        } else {
            p
        }
    } else if e < 0.0 {
        p.next_down()
    } else {
        p
    }
}

fn mul_up(a: f64, b: f64) -> f64 {
    let (p, e) = mul_exact_err(a, b);
    if e.is_nan() {
        if p == f64::NEG_INFINITY && a.is_finite() && b.is_finite() {
            f64::MIN
        } else if p == 0.0 {
            if (a < 0.0) != (b < 0.0) {
                -0.0
            } else {
                f64::from_bits(1)
            }
        } else {
            p
        }
    } else if e > 0.0 {
        p.next_up()
    } else {
        p
    }
}

fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() || q == 0.0 || !a.is_finite() || !b.is_finite() {
        return if q.is_finite() { q.next_down() } else { q };
    }
    // r = a - q*b exactly; sign(r/b) tells where the true quotient lies.
    let r = (-q).mul_add(b, a);
    if (r < 0.0) != (b < 0.0) && r != 0.0 {
        q.next_down()
    } else {
        q
    }
}

fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() || q == 0.0 || !a.is_finite() || !b.is_finite() {
        return if q.is_finite() { q.next_up() } else { q };
    }
    let r = (-q).mul_add(b, a);
    if (r > 0.0) == (b > 0.0) && r != 0.0 {
        q.next_up()
    } else {
        q
    }
}

/// A closed interval `[lo, hi]` of reals with `lo <= hi`.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Builds `[lo, hi]`; rejects NaN bounds and `lo > hi`.
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(IntervalError::InvalidBounds { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// The degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "point interval needs a finite value, got {x}");
        Interval { lo: x, hi: x }
    }

    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// `center ± radius`, rounded outward.
    pub fn centered(center: f64, radius: f64) -> Self {
        let r = radius.abs();
        Interval {
            lo: add_down(center, -r),
            hi: add_up(center, r),
        }
    }

    // Crate-internal constructor for bounds already known to be ordered.
    pub(crate) fn from_sorted(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "unordered bounds {lo} {hi}");
        Interval { lo, hi }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// `(lo + hi) / 2`, rounded to nearest.
    pub fn midpoint(&self) -> Result<f64, IntervalError> {
        if !self.is_finite() {
            return Err(IntervalError::NonFiniteInterval);
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        Ok(m.clamp(self.lo, self.hi))
    }

    /// `hi - lo`, rounded up.
    pub fn width(&self) -> Result<f64, IntervalError> {
        if !self.is_finite() {
            return Err(IntervalError::NonFiniteInterval);
        }
        Ok(add_up(self.hi, -self.lo))
    }

    /// Half the width, rounded up.
    pub fn radius(&self) -> Result<f64, IntervalError> {
        Ok(self.width()? * 0.5)
    }

    // Infallible versions for intervals the caller knows to be finite.
    pub(crate) fn mid(&self) -> f64 {
        self.midpoint().expect("finite interval")
    }

    pub(crate) fn wid(&self) -> f64 {
        if self.is_finite() {
            add_up(self.hi, -self.lo)
        } else {
            f64::INFINITY
        }
    }

    /// Magnitude: `max |x|` over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mignitude: `min |x|` over the interval.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`.
    pub fn subset(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `self ⊂ int(other)`: strict containment at both ends.
    pub fn interior_subset(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    /// Exact overlap, or `None` when the intervals are disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        if self.hi < other.lo || other.hi < self.lo {
            None
        } else {
            Some(Interval {
                lo: self.lo.max(other.lo),
                hi: self.hi.min(other.hi),
            })
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Splits at the midpoint.
    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval::from_sorted(self.lo, m), Interval::from_sorted(m, self.hi))
    }

    /// Splits at `lo + frac * width` (clamped inside the interval).
    pub fn split_at_fraction(&self, frac: f64) -> (Interval, Interval) {
        let m = (self.lo + frac * (self.hi - self.lo)).clamp(self.lo, self.hi);
        (Interval::from_sorted(self.lo, m), Interval::from_sorted(m, self.hi))
    }

    /// Fallible division; errors when `0 ∈ rhs`.
    pub fn checked_div(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::DivisionByZeroInterval);
        }
        let cands_lo = [
            div_down(self.lo, rhs.lo),
            div_down(self.lo, rhs.hi),
            div_down(self.hi, rhs.lo),
            div_down(self.hi, rhs.hi),
        ];
        let cands_hi = [
            div_up(self.lo, rhs.lo),
            div_up(self.lo, rhs.hi),
            div_up(self.hi, rhs.lo),
            div_up(self.hi, rhs.hi),
        ];
        Ok(Interval {
            lo: nan_min(&cands_lo),
            hi: nan_max(&cands_hi),
        })
    }

    /// Multiplication by a scalar.
    pub fn scale(&self, c: f64) -> Interval {
        *self * Interval::point(c)
    }

    /// Square, tight for intervals straddling zero.
    pub fn sqr(&self) -> Interval {
        self.powi(2)
    }

    /// Integer power `self^n`, tight: even powers of intervals containing
    /// zero start at zero, and monotone branches use endpoint powers.
    pub fn powi(&self, n: u32) -> Interval {
        match n {
            0 => Interval::ONE,
            1 => *self,
            _ => {
                let (plo, phi) = (pow_bounds(self.lo, n), pow_bounds(self.hi, n));
                if n % 2 == 1 {
                    // Odd powers are monotone increasing.
                    Interval { lo: plo.0, hi: phi.1 }
                } else if self.lo >= 0.0 {
                    Interval { lo: plo.0, hi: phi.1 }
                } else if self.hi <= 0.0 {
                    Interval { lo: phi.0, hi: plo.1 }
                } else {
                    Interval {
                        lo: 0.0,
                        hi: plo.1.max(phi.1),
                    }
                }
            }
        }
    }

    /// Monotone exponential: `[exp(lo)↓, exp(hi)↑]`.
    pub fn exp(&self) -> Interval {
        // libm's exp is faithfully rounded (error below one ulp), so one
        // nudge in each direction encloses the exact value.
        let lo = if self.lo == f64::NEG_INFINITY {
            0.0
        } else {
            self.lo.exp().next_down().max(0.0)
        };
        let hi = if self.hi == f64::INFINITY {
            f64::INFINITY
        } else {
            let e = self.hi.exp();
            if e.is_finite() {
                e.next_up()
            } else {
                f64::INFINITY
            }
        };
        Interval { lo, hi }
    }

    /// Natural log of the positive part; `None` when `hi <= 0`.
    pub fn ln(&self) -> Option<Interval> {
        if self.hi <= 0.0 {
            return None;
        }
        let lo = if self.lo <= 0.0 {
            f64::NEG_INFINITY
        } else {
            self.lo.ln().next_down()
        };
        let hi = if self.hi == f64::INFINITY {
            f64::INFINITY
        } else {
            self.hi.ln().next_up()
        };
        Some(Interval { lo, hi })
    }

    /// Real `n`-th root of `self ∩ [0, ∞)`; `None` if that part is empty.
    pub(crate) fn nonneg_root(&self, n: u32) -> Option<Interval> {
        if self.hi < 0.0 {
            return None;
        }
        let a = self.lo.max(0.0);
        let lo = if a == 0.0 {
            0.0
        } else {
            let mut r = a.powf(1.0 / n as f64);
            for _ in 0..64 {
                if pow_bounds(r, n).1 <= a {
                    break;
                }
                r = r.next_down();
            }
            r.max(0.0)
        };
        let hi = if self.hi == f64::INFINITY {
            f64::INFINITY
        } else {
            let mut r = self.hi.powf(1.0 / n as f64);
            for _ in 0..64 {
                if pow_bounds(r, n).0 >= self.hi {
                    break;
                }
                r = r.next_up();
            }
            r
        };
        Some(Interval { lo, hi })
    }

    /// Hull of `{ x ∈ within : x·den ∈ self for some den }`, i.e. the
    /// relational quotient `self / den` clipped to `within`, allowing
    /// `0 ∈ den`. `None` when that set is empty.
    pub(crate) fn div_within(&self, den: &Interval, within: &Interval) -> Option<Interval> {
        if !den.contains_zero() {
            return self.checked_div(den).ok()?.intersect(within);
        }
        if self.contains_zero() {
            return Some(*within);
        }
        let mut pieces: Vec<Interval> = Vec::with_capacity(2);
        let (c, d) = (den.lo, den.hi);
        if self.lo > 0.0 {
            if d > 0.0 {
                pieces.push(Interval {
                    lo: div_down(self.lo, d),
                    hi: f64::INFINITY,
                });
            }
            if c < 0.0 {
                pieces.push(Interval {
                    lo: f64::NEG_INFINITY,
                    hi: div_up(self.lo, c),
                });
            }
        } else {
            if c < 0.0 {
                pieces.push(Interval {
                    lo: div_down(self.hi, c),
                    hi: f64::INFINITY,
                });
            }
            if d > 0.0 {
                pieces.push(Interval {
                    lo: f64::NEG_INFINITY,
                    hi: div_up(self.hi, d),
                });
            }
        }
        pieces
            .iter()
            .filter_map(|p| p.intersect(within))
            .reduce(|a, b| a.hull(&b))
    }

    /// Widens by `delta` on each side (rounded outward).
    pub fn inflate(&self, delta: f64) -> Interval {
        Interval {
            lo: add_down(self.lo, -delta.abs()),
            hi: add_up(self.hi, delta.abs()),
        }
    }
}

fn nan_min(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

fn nan_max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Lower and upper bounds on `x^n` for a point `x`.
fn pow_bounds(x: f64, n: u32) -> (f64, f64) {
    // Repeated squaring with directed rounding on magnitudes; the sign is
    // reattached afterwards.
    let neg = x < 0.0 && n % 2 == 1;
    let a = x.abs();
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    let (mut blo, mut bhi) = (a, a);
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            lo = mul_down(lo, blo);
            hi = mul_up(hi, bhi);
        }
        e >>= 1;
        if e > 0 {
            blo = mul_down(blo, blo);
            bhi = mul_up(bhi, bhi);
        }
    }
    if neg {
        (-hi, -lo)
    } else {
        (lo, hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, -rhs.hi),
            hi: add_up(self.hi, -rhs.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = nan_min(&[mul_down(a, c), mul_down(a, d), mul_down(b, c), mul_down(b, d)]);
        let hi = nan_max(&[mul_up(a, c), mul_up(a, d), mul_up(b, c), mul_up(b, d)]);
        Interval { lo, hi }
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, rhs: f64) -> Interval {
        self + Interval::point(rhs)
    }
}

impl Sub<f64> for Interval {
    type Output = Interval;
    fn sub(self, rhs: f64) -> Interval {
        self - Interval::point(rhs)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, rhs: f64) -> Interval {
        self.scale(rhs)
    }
}

/// An interval vector; midpoint, width and radius are componentwise.
#[derive(Clone, PartialEq)]
pub struct IntervalBox(Vec<Interval>);

impl IntervalBox {
    pub fn new(components: Vec<Interval>) -> Self {
        IntervalBox(components)
    }

    /// Degenerate box `[x_i, x_i]`.
    pub fn from_point(x: &[f64]) -> Self {
        IntervalBox(x.iter().map(|&v| Interval::point(v)).collect())
    }

    /// `center_i ± radius_i`, rounded outward.
    pub fn centered(center: &[f64], radius: &[f64]) -> Self {
        IntervalBox(
            center
                .iter()
                .zip(radius)
                .map(|(&c, &r)| Interval::centered(c, r))
                .collect(),
        )
    }

    /// Builds a box from `(lo, hi)` pairs.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self, IntervalError> {
        bounds
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>, _>>()
            .map(IntervalBox)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Interval] {
        &self.0
    }

    pub fn into_components(self) -> Vec<Interval> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    /// Componentwise midpoint.
    pub fn midpoint(&self) -> Result<Vec<f64>, IntervalError> {
        self.0.iter().map(Interval::midpoint).collect()
    }

    /// Componentwise widths.
    pub fn widths(&self) -> Result<Vec<f64>, IntervalError> {
        self.0.iter().map(Interval::width).collect()
    }

    /// Componentwise radii.
    pub fn radii(&self) -> Result<Vec<f64>, IntervalError> {
        self.0.iter().map(Interval::radius).collect()
    }

    /// Largest component width.
    pub fn max_width(&self) -> f64 {
        self.0.iter().map(Interval::wid).fold(0.0, f64::max)
    }

    pub(crate) fn mid(&self) -> Vec<f64> {
        self.0.iter().map(Interval::mid).collect()
    }

    /// Index of the widest component; ties go to the lowest index.
    pub fn widest_component(&self) -> usize {
        let mut best = 0;
        let mut best_w = f64::NEG_INFINITY;
        for (i, c) in self.0.iter().enumerate() {
            let w = c.wid();
            if w > best_w {
                best = i;
                best_w = w;
            }
        }
        best
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.0.len() == x.len() && self.0.iter().zip(x).all(|(c, &v)| c.contains(v))
    }

    pub fn subset(&self, other: &IntervalBox) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.subset(b))
    }

    /// `self ⊂ int(other)` in every component.
    pub fn interior_subset(&self, other: &IntervalBox) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.interior_subset(b))
    }

    /// Componentwise intersection; `None` if any component is disjoint.
    pub fn intersect(&self, other: &IntervalBox) -> Option<IntervalBox> {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()
            .map(IntervalBox)
    }

    pub fn intersects(&self, other: &IntervalBox) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| !(a.hi < b.lo || b.hi < a.lo))
    }

    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        IntervalBox(self.0.iter().zip(&other.0).map(|(a, b)| a.hull(b)).collect())
    }

    /// Bisects component `k` at its midpoint.
    pub fn bisect(&self, k: usize) -> (IntervalBox, IntervalBox) {
        let (a, b) = self.0[k].bisect();
        let mut left = self.clone();
        let mut right = self.clone();
        left.0[k] = a;
        right.0[k] = b;
        (left, right)
    }

    /// Bisects the widest component.
    pub fn bisect_widest(&self) -> (IntervalBox, IntervalBox) {
        self.bisect(self.widest_component())
    }

    pub fn inflate(&self, delta: &[f64]) -> IntervalBox {
        IntervalBox(self.0.iter().zip(delta).map(|(c, &d)| c.inflate(d)).collect())
    }

    pub fn with_component(&self, k: usize, value: Interval) -> IntervalBox {
        let mut out = self.clone();
        out.0[k] = value;
        out
    }

    /// `X - m` for a point `m`.
    pub fn sub_point(&self, m: &[f64]) -> IntervalBox {
        IntervalBox(self.0.iter().zip(m).map(|(&c, &v)| c - Interval::point(v)).collect())
    }

    /// Drops the last component.
    pub fn truncate_last(&self) -> IntervalBox {
        IntervalBox(self.0[..self.0.len() - 1].to_vec())
    }
}

impl std::ops::Index<usize> for IntervalBox {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl fmt::Debug for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl FromIterator<Interval> for IntervalBox {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        IntervalBox(iter.into_iter().collect())
    }
}

impl Add for &IntervalBox {
    type Output = IntervalBox;
    fn add(self, rhs: &IntervalBox) -> IntervalBox {
        IntervalBox(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a + b).collect())
    }
}

impl Sub for &IntervalBox {
    type Output = IntervalBox;
    fn sub(self, rhs: &IntervalBox) -> IntervalBox {
        IntervalBox(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a - b).collect())
    }
}

/// Square matrix of intervals, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct IntervalMatrix {
    n: usize,
    entries: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn from_rows(rows: Vec<Vec<Interval>>) -> Result<Self, IntervalError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(IntervalError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(IntervalMatrix { n, entries })
    }

    pub(crate) fn from_flat(n: usize, entries: Vec<Interval>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        IntervalMatrix { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Interval::ZERO; n * n];
        for i in 0..n {
            entries[i * n + i] = Interval::ONE;
        }
        IntervalMatrix { n, entries }
    }

    /// Degenerate interval matrix from a point matrix.
    pub fn from_point(m: &Matrix<f64>) -> Self {
        IntervalMatrix {
            n: m.n(),
            entries: m.as_slice().iter().map(|&v| Interval::point(v)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.entries[i * self.n + j]
    }

    /// Midpoint matrix (rounded to nearest).
    pub fn midpoint(&self) -> Result<Matrix<f64>, IntervalError> {
        let data = self
            .entries
            .iter()
            .map(Interval::midpoint)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Matrix::from_vec(self.n, data))
    }

    /// `M v`, enclosing every pointwise product.
    pub fn matvec(&self, v: &IntervalBox) -> Result<IntervalBox, IntervalError> {
        if v.dim() != self.n {
            return Err(IntervalError::DimensionMismatch {
                expected: self.n,
                found: v.dim(),
            });
        }
        Ok((0..self.n)
            .map(|i| (0..self.n).fold(Interval::ZERO, |acc, j| acc + self.get(i, j) * v[j]))
            .collect())
    }

    /// `self · rhs`.
    pub fn matmul(&self, rhs: &IntervalMatrix) -> Result<IntervalMatrix, IntervalError> {
        if rhs.n != self.n {
            return Err(IntervalError::DimensionMismatch {
                expected: self.n,
                found: rhs.n,
            });
        }
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push((0..n).fold(Interval::ZERO, |acc, k| acc + self.get(i, k) * rhs.get(k, j)));
            }
        }
        Ok(IntervalMatrix { n, entries })
    }

    /// Point matrix times interval matrix, `A · self`.
    pub fn left_mul_point(&self, a: &Matrix<f64>) -> IntervalMatrix {
        IntervalMatrix::from_point(a)
            .matmul(self)
            .expect("dimensions checked by caller")
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> IntervalMatrix {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { Interval::ONE } else { Interval::ZERO };
                entries.push(id - self.get(i, j));
            }
        }
        IntervalMatrix { n, entries }
    }

    /// Upper bound on the ∞-norm, `max_i Σ_j mag(M_ij)`.
    pub fn norm_inf_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).mag()).fold(0.0, add_up))
            .fold(0.0, f64::max)
    }
}

/// Inverse of a point matrix; fails with `SingularMatrix` when LU finds no
/// usable pivot.
pub fn point_matrix_inverse(a: &Matrix<f64>) -> Result<Matrix<f64>, crate::linalg::SingularMatrix> {
    a.inverse()
}
