//! Filtering isolated roots through inequality constraints.
//!
//! The sign of a polynomial `f` at an isolated root `x̂ ∈ X` of `F` is read
//! off the real roots of the augmented system `[F, y²f + 1]`: it has a real
//! root projecting onto `x̂` exactly when `f(x̂) < 0`. So if no isolating box
//! of the augmented system projects into `X`, then `f(x̂) ≥ 0`. Swapping the
//! sign (`y²f − 1`) decides `f(x̂) ≤ 0`; both together certify `f(x̂) = 0`.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::interval::IntervalBox;
use crate::poly::{augment_sign_system, MultiPoly, PolyError, PolySystem, SemiAlgebraicSystem, SignIndex};
use crate::verify::{real_root_isolate, BoxStatus, CertifiedBox, IsolateConfig, Isolation, Verifier, VerifyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemiError {
    #[error("cannot project a box of dimension {0}")]
    DimensionTooSmall(usize),
    #[error("sign of constraint {constraint} undecidable on box {box_index}")]
    SignUndecidable { box_index: usize, constraint: usize },
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Outcome of a sign test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignResult {
    /// `1`: the tested side holds (`f ≥ 0` for `+`, `f ≤ 0` for `−`).
    NonNegativeCertified,
    /// `−1`: the tested side fails.
    NegativeSomewhereCertified,
}

impl SignResult {
    pub fn as_i32(self) -> i32 {
        match self {
            SignResult::NonNegativeCertified => 1,
            SignResult::NegativeSomewhereCertified => -1,
        }
    }
}

/// Drops the last coordinate.
pub fn project(z: &IntervalBox) -> Result<IntervalBox, SemiError> {
    if z.dim() < 2 {
        return Err(SemiError::DimensionTooSmall(z.dim()));
    }
    Ok(z.truncate_last())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FilterStage {
    /// `h ≠ 0` constraints.
    Inequation,
    /// `n ≥ 0` constraints.
    Nonnegative,
    /// `p > 0` constraints.
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RemovalReason {
    /// Both sign tests returned 1: the constraint vanishes at the root.
    CertifiedZero,
    /// The interval value of the constraint on the box is negative.
    IntervalNegative,
    /// The `+` sign test returned −1.
    CertifiedNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Removal {
    #[serde(rename = "box")]
    pub cert: CertifiedBox,
    pub stage: FilterStage,
    /// Index of the constraint within its block.
    pub constraint: usize,
    pub reason: RemovalReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FilterReport {
    pub kept: Vec<CertifiedBox>,
    pub removed: Vec<Removal>,
    /// Augmented systems solved along the way.
    pub sign_solves: usize,
}

impl FilterReport {
    fn absorb(&mut self, other: FilterReport) {
        self.kept = other.kept;
        self.removed.extend(other.removed);
        self.sign_solves += other.sign_solves;
    }
}

/// Sign tests for one base system, caching the augmented isolation per
/// `(constraint, sign)` so each is solved once however many boxes ask.
pub struct SignOracle<'a> {
    base: &'a PolySystem,
    verifier: Verifier,
    cfg: &'a IsolateConfig,
    cache: HashMap<(String, SignIndex), (Isolation, Verifier)>,
    solves: usize,
}

fn key(f: &MultiPoly) -> String {
    format!("{:?}", f.terms().collect::<Vec<_>>())
}

impl<'a> SignOracle<'a> {
    pub fn new(base: &'a PolySystem, cfg: &'a IsolateConfig) -> Result<Self, SemiError> {
        Ok(SignOracle {
            base,
            verifier: Verifier::new(base)?,
            cfg,
            cache: HashMap::new(),
            solves: 0,
        })
    }

    pub fn solves(&self) -> usize {
        self.solves
    }

    /// Sign test for `f` at the root isolated by `x`; `Ok(None)` when an
    /// augmented region that could not be certified meets `x`.
    pub fn deter_sign(
        &mut self,
        x: &CertifiedBox,
        f: &MultiPoly,
        index: SignIndex,
    ) -> Result<Option<SignResult>, SemiError> {
        let k = (key(f), index);
        if !self.cache.contains_key(&k) {
            let aug = augment_sign_system(self.base, f, index)?;
            let iso = real_root_isolate(&aug, self.cfg)?;
            self.solves += 1;
            self.cache.insert(k.clone(), (iso, Verifier::new(&aug)?));
        }
        let (iso, aug_v) = &self.cache[&k];
        for z in &iso.boxes {
            if meets(&self.verifier, x, aug_v, z)? {
                return Ok(Some(SignResult::NegativeSomewhereCertified));
            }
        }
        for u in &iso.undecided {
            if project(&u.bx)?.intersects(&x.bx) {
                return Ok(None);
            }
        }
        Ok(Some(SignResult::NonNegativeCertified))
    }
}

/// Whether the root isolated by `z` projects onto the root isolated by `x`.
/// Partial overlaps are resolved by tightening both boxes; an overlap that
/// survives is reported as a meeting (the conservative answer).
fn meets(base: &Verifier, x: &CertifiedBox, aug: &Verifier, z: &CertifiedBox) -> Result<bool, SemiError> {
    let mut x = x.clone();
    let mut z = z.clone();
    for _ in 0..12 {
        let pz = project(&z.bx)?;
        if !pz.intersects(&x.bx) {
            return Ok(false);
        }
        // x holds exactly one root of F, and π(z) holds a root of F
        if pz.subset(&x.bx) {
            return Ok(true);
        }
        let (wx, wz) = (x.bx.max_width(), z.bx.max_width());
        let nx = base.tighten(&x, wx / 16.0).unwrap_or_else(|| x.clone());
        let nz = aug.tighten(&z, wz / 16.0).unwrap_or_else(|| z.clone());
        if nx.bx.max_width() >= wx && nz.bx.max_width() >= wz {
            break;
        }
        x = nx;
        z = nz;
    }
    Ok(true)
}

/// Sign test without caching: isolates `[F, y²f ± 1]` and checks whether any
/// isolating box projects onto `x`.
pub fn deter_sign(
    f_sys: &PolySystem,
    x: &CertifiedBox,
    f: &MultiPoly,
    index: SignIndex,
    cfg: &IsolateConfig,
) -> Result<SignResult, SemiError> {
    SignOracle::new(f_sys, cfg)?
        .deter_sign(x, f, index)?
        .ok_or(SemiError::SignUndecidable {
            box_index: 0,
            constraint: 0,
        })
}

fn check_boxes(boxes: &[CertifiedBox]) {
    debug_assert!(boxes.iter().all(|b| b.status == BoxStatus::UniqueRoot));
}

fn undecidable(box_index: usize, constraint: usize) -> SemiError {
    SemiError::SignUndecidable { box_index, constraint }
}

fn inequ_stage(
    oracle: &mut SignOracle<'_>,
    boxes: &[CertifiedBox],
    hs: &[MultiPoly],
    stage: FilterStage,
) -> Result<FilterReport, SemiError> {
    check_boxes(boxes);
    let before = oracle.solves();
    let mut report = FilterReport::default();
    'boxes: for (bi, x) in boxes.iter().enumerate() {
        for (t, h) in hs.iter().enumerate() {
            let ev = h.eval_interval(&x.bx)?;
            if !ev.contains_zero() {
                continue;
            }
            let plus = oracle.deter_sign(x, h, SignIndex::Plus)?.ok_or(undecidable(bi, t))?;
            if plus == SignResult::NegativeSomewhereCertified {
                continue;
            }
            let minus = oracle.deter_sign(x, h, SignIndex::Minus)?.ok_or(undecidable(bi, t))?;
            if minus == SignResult::NonNegativeCertified {
                report.removed.push(Removal {
                    cert: x.clone(),
                    stage,
                    constraint: t,
                    reason: RemovalReason::CertifiedZero,
                });
                continue 'boxes;
            }
        }
        report.kept.push(x.clone());
    }
    report.sign_solves = oracle.solves() - before;
    Ok(report)
}

fn nonnega_stage(
    oracle: &mut SignOracle<'_>,
    boxes: &[CertifiedBox],
    ns: &[MultiPoly],
    stage: FilterStage,
) -> Result<FilterReport, SemiError> {
    check_boxes(boxes);
    let before = oracle.solves();
    let mut report = FilterReport::default();
    'boxes: for (bi, x) in boxes.iter().enumerate() {
        let evs = ns
            .iter()
            .map(|n| n.eval_interval(&x.bx))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(t) = evs.iter().position(|e| e.hi() < 0.0) {
            report.removed.push(Removal {
                cert: x.clone(),
                stage,
                constraint: t,
                reason: RemovalReason::IntervalNegative,
            });
            continue;
        }
        for (t, (n, ev)) in ns.iter().zip(&evs).enumerate() {
            if !ev.contains_zero() {
                continue;
            }
            let s = oracle.deter_sign(x, n, SignIndex::Plus)?.ok_or(undecidable(bi, t))?;
            if s == SignResult::NegativeSomewhereCertified {
                report.removed.push(Removal {
                    cert: x.clone(),
                    stage,
                    constraint: t,
                    reason: RemovalReason::CertifiedNegative,
                });
                continue 'boxes;
            }
        }
        report.kept.push(x.clone());
    }
    report.sign_solves = oracle.solves() - before;
    Ok(report)
}

/// Removes boxes whose root makes some `h` vanish.
pub fn dele_inequ(
    f: &PolySystem,
    boxes: &[CertifiedBox],
    hs: &[MultiPoly],
    cfg: &IsolateConfig,
) -> Result<FilterReport, SemiError> {
    inequ_stage(&mut SignOracle::new(f, cfg)?, boxes, hs, FilterStage::Inequation)
}

/// Removes boxes whose root makes some `n` negative.
pub fn dele_nonnega(
    f: &PolySystem,
    boxes: &[CertifiedBox],
    ns: &[MultiPoly],
    cfg: &IsolateConfig,
) -> Result<FilterReport, SemiError> {
    nonnega_stage(&mut SignOracle::new(f, cfg)?, boxes, ns, FilterStage::Nonnegative)
}

fn posi_stage(
    oracle: &mut SignOracle<'_>,
    boxes: &[CertifiedBox],
    ps: &[MultiPoly],
) -> Result<FilterReport, SemiError> {
    let mut report = inequ_stage(oracle, boxes, ps, FilterStage::Positive)?;
    let kept = std::mem::take(&mut report.kept);
    let second = nonnega_stage(oracle, &kept, ps, FilterStage::Positive)?;
    report.absorb(second);
    Ok(report)
}

/// Keeps boxes whose root makes every `p` strictly positive: first drops
/// `p = 0`, then `p < 0`.
pub fn dele_posi(
    f: &PolySystem,
    boxes: &[CertifiedBox],
    ps: &[MultiPoly],
    cfg: &IsolateConfig,
) -> Result<FilterReport, SemiError> {
    posi_stage(&mut SignOracle::new(f, cfg)?, boxes, ps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiResult {
    /// Isolation of the equations alone, before any filtering.
    pub isolation: Isolation,
    pub report: FilterReport,
}

impl SemiResult {
    pub fn kept(&self) -> &[CertifiedBox] {
        &self.report.kept
    }
}

/// Which filters to run, in order.
pub const DEFAULT_ORDER: [FilterStage; 3] = [FilterStage::Inequation, FilterStage::Nonnegative, FilterStage::Positive];

/// Full pipeline: isolate the equations, then filter by `h ≠ 0`, `n ≥ 0`,
/// `p > 0`, stopping early once nothing is left.
pub fn real_root_semi(s: &SemiAlgebraicSystem, cfg: &IsolateConfig) -> Result<SemiResult, SemiError> {
    real_root_semi_ordered(s, cfg, &DEFAULT_ORDER)
}

/// [`real_root_semi`] with an explicit filter order.
pub fn real_root_semi_ordered(
    s: &SemiAlgebraicSystem,
    cfg: &IsolateConfig,
    order: &[FilterStage],
) -> Result<SemiResult, SemiError> {
    let isolation = real_root_isolate(&s.equations, cfg)?;
    let report = filter_boxes(s, &isolation.boxes, cfg, order)?;
    Ok(SemiResult { isolation, report })
}

/// Applies the constraint filters of `s` to already-isolated boxes.
pub fn filter_boxes(
    s: &SemiAlgebraicSystem,
    boxes: &[CertifiedBox],
    cfg: &IsolateConfig,
    order: &[FilterStage],
) -> Result<FilterReport, SemiError> {
    let mut oracle = SignOracle::new(&s.equations, cfg)?;
    let mut report = FilterReport {
        kept: boxes.to_vec(),
        ..FilterReport::default()
    };
    for stage in order {
        if report.kept.is_empty() {
            break;
        }
        let cur = report.kept.clone();
        let next = match stage {
            FilterStage::Inequation => inequ_stage(&mut oracle, &cur, &s.inequations, *stage)?,
            FilterStage::Nonnegative => nonnega_stage(&mut oracle, &cur, &s.nonnegatives, *stage)?,
            FilterStage::Positive => posi_stage(&mut oracle, &cur, &s.positives)?,
        };
        report.absorb(next);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    fn poly(n: usize, ts: &[(f64, &[u32])]) -> MultiPoly {
        MultiPoly::from_terms(n, &ts.iter().map(|(c, e)| (*c, e.to_vec())).collect::<Vec<_>>())
    }

    // x^2 + y - 2, 2x^2 - x - 1 ... use the parabola/line pair
    fn base() -> PolySystem {
        PolySystem::new(vec![
            poly(2, &[(1.0, &[2, 0]), (1.0, &[0, 1]), (-2.0, &[0, 0])]),
            poly(2, &[(1.0, &[1, 0]), (2.0, &[0, 1]), (-3.0, &[0, 0])]),
        ])
        .unwrap()
    }

    #[test]
    fn projection() {
        let z = IntervalBox::from_bounds(&[(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)]).unwrap();
        let p = project(&z).unwrap();
        assert_eq!(
            p.components(),
            &[Interval::new(1.0, 2.0).unwrap(), Interval::new(3.0, 4.0).unwrap()]
        );
        assert_eq!(project(&p).unwrap().dim(), 1);
        assert!(project(&project(&p).unwrap()).is_err());
    }

    #[test]
    fn sign_of_vanishing_and_constant() {
        let f = base();
        let cfg = IsolateConfig::default();
        let iso = real_root_isolate(&f, &cfg).unwrap();
        let x1 = iso.boxes.iter().find(|b| b.bx.contains_point(&[1.0, 1.0])).unwrap();
        let h = poly(2, &[(3.0, &[1, 0]), (1.0, &[0, 1]), (-4.0, &[0, 0])]);
        assert_eq!(deter_sign(&f, x1, &h, SignIndex::Plus, &cfg).unwrap().as_i32(), 1);
        assert_eq!(deter_sign(&f, x1, &h, SignIndex::Minus, &cfg).unwrap().as_i32(), 1);
        let one = MultiPoly::constant(2, 1.0);
        assert_eq!(deter_sign(&f, x1, &one, SignIndex::Plus, &cfg).unwrap().as_i32(), 1);
        // at (-1/2, 7/4), 3x + y - 4 = -3.75 < 0
        let x2 = iso.boxes.iter().find(|b| b.bx.contains_point(&[-0.5, 1.75])).unwrap();
        assert_eq!(deter_sign(&f, x2, &h, SignIndex::Plus, &cfg).unwrap().as_i32(), -1);
        assert_eq!(deter_sign(&f, x2, &h, SignIndex::Minus, &cfg).unwrap().as_i32(), 1);
    }

    #[test]
    fn trivial_filters() {
        let f = base();
        let cfg = IsolateConfig::default();
        let boxes = real_root_isolate(&f, &cfg).unwrap().boxes;
        assert_eq!(dele_inequ(&f, &boxes, &[], &cfg).unwrap().kept.len(), 2);
        let one = MultiPoly::constant(2, 1.0);
        let r = dele_inequ(&f, &boxes, std::slice::from_ref(&one), &cfg).unwrap();
        assert_eq!((r.kept.len(), r.sign_solves), (2, 0));
        assert_eq!(dele_posi(&f, &boxes, &[one], &cfg).unwrap().kept.len(), 2);
        assert_eq!(dele_posi(&f, &boxes, &[], &cfg).unwrap().kept.len(), 2);
        let r = dele_nonnega(&f, &boxes, &[MultiPoly::constant(2, -1.0)], &cfg).unwrap();
        assert!(r.kept.is_empty());
        assert_eq!(r.removed.len(), 2);
    }

    #[test]
    fn pipeline_filters_by_sign() {
        let h = poly(2, &[(3.0, &[1, 0]), (1.0, &[0, 1]), (-4.0, &[0, 0])]);
        let s = SemiAlgebraicSystem::new(base(), vec![], vec![], vec![h.clone()]).unwrap();
        let r = real_root_semi(&s, &IsolateConfig::default()).unwrap();
        assert_eq!(r.kept().len(), 1);
        assert!(r.kept()[0].bx.contains_point(&[-0.5, 1.75]));
        assert_eq!(r.report.removed[0].reason, RemovalReason::CertifiedZero);
        // x > 0 keeps only (1, 1)
        let s = SemiAlgebraicSystem::new(base(), vec![poly(2, &[(1.0, &[1, 0])])], vec![], vec![]).unwrap();
        let r = real_root_semi(&s, &IsolateConfig::default()).unwrap();
        assert_eq!(r.kept().len(), 1);
        assert!(r.kept()[0].bx.contains_point(&[1.0, 1.0]));
    }
}
