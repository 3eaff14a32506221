//! Certification of approximate roots.
//!
//! Homotopy candidates are screened with a cheap complex-rejection radius,
//! boxed with a Kantorovich-style radius, and certified with the Krawczyk
//! operator in its Moore form
//!
//! ```text
//! K(X) = m − Y f(m) + (I − Y F'(X)) (X − m),   Y = mid(F'(X))⁻¹
//! ```
//!
//! `K(X) ⊂ int X` proves a unique root in `X`; `K(X) ∩ X = ∅` proves there is
//! none. Every box this module reports as isolating carries its own
//! certificate.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::homotopy::{track_all, CandidateRoot, HomotopyError, TrackStats, TrackerConfig};
use crate::interval::{IntervalBox, IntervalMatrix};
use crate::linalg::Matrix;
use crate::poly::{DiffSystem, MultiPoly, PolySystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("Jacobian is numerically singular at the evaluation point")]
    SingularJacobian,
    #[error("rejection radius denominator {0} is not positive")]
    NegativeDenominator(f64),
    #[error("Kantorovich condition failed (h = {h})")]
    KantorovichFailed { h: f64 },
    #[error("midpoint Jacobian of the box is numerically singular")]
    SingularMidpointJacobian,
    #[error("system is not square: {equations} equations in {variables} variables")]
    NonSquare { equations: usize, variables: usize },
    #[error("point has {found} coordinates, system has {expected} variables")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoxStatus {
    UniqueRoot,
    NoRoot,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedBox {
    #[serde(rename = "box", serialize_with = "serialize_box")]
    pub bx: IntervalBox,
    #[serde(serialize_with = "serialize_box")]
    pub krawczyk_image: IntervalBox,
    pub status: BoxStatus,
}

pub(crate) fn serialize_box<S: serde::Serializer>(b: &IntervalBox, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(b.dim()))?;
    for c in b.iter() {
        seq.serialize_element(&[c.lo(), c.hi()])?;
    }
    seq.end()
}

impl CertifiedBox {
    pub fn midpoint(&self) -> Vec<f64> {
        self.bx.mid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RejectionRadius {
    pub lambda: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KantorovichData {
    pub b: f64,
    pub eta: f64,
    pub k: f64,
    pub h: f64,
    pub omega: f64,
}

/// A square system with derivatives prepared for certification work.
#[derive(Debug, Clone)]
pub struct Verifier {
    diff: DiffSystem,
    /// `hessians[j][k][i] = ∂²f_j/∂x_k∂x_i`.
    hessians: Vec<Vec<Vec<MultiPoly>>>,
}

impl Verifier {
    pub fn new(f: &PolySystem) -> Result<Self, VerifyError> {
        if !f.is_square() {
            return Err(VerifyError::NonSquare {
                equations: f.len(),
                variables: f.nvars(),
            });
        }
        Ok(Verifier {
            diff: DiffSystem::new(f.clone()),
            hessians: f.polys().iter().map(MultiPoly::hessian).collect(),
        })
    }

    pub fn system(&self) -> &PolySystem {
        self.diff.system()
    }

    pub fn n(&self) -> usize {
        self.diff.n()
    }

    fn check_dim(&self, found: usize) -> Result<(), VerifyError> {
        if found != self.n() {
            return Err(VerifyError::DimensionMismatch {
                expected: self.n(),
                found,
            });
        }
        Ok(())
    }

    /// Complex-root rejection radius at `xbar`:
    /// `λ = max_i Σ_j max_k |∂²f_j/∂x_k∂x_i (x̄)|` and
    /// `r = ‖J⁻¹‖‖J‖² / (1 − nλ‖J⁻¹‖‖J‖)`, all ∞-norms.
    pub fn rejection_radius(&self, xbar: &[Complex64]) -> Result<RejectionRadius, VerifyError> {
        self.check_dim(xbar.len())?;
        let n = self.n();
        let j = self.diff.jacobian_at(xbar);
        let jinv = j.inverse().map_err(|_| VerifyError::SingularJacobian)?;
        let lambda = (0..n)
            .map(|i| {
                self.hessians
                    .iter()
                    .map(|h| (0..n).map(|k| h[k][i].eval_unchecked(xbar).norm()).fold(0.0, f64::max))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let (a, b) = (jinv.norm_inf(), j.norm_inf());
        let denom = 1.0 - n as f64 * lambda * a * b;
        if denom <= 0.0 || !denom.is_finite() {
            return Err(VerifyError::NegativeDenominator(denom));
        }
        Ok(RejectionRadius {
            lambda,
            r: a * b * b / denom,
        })
    }

    /// Lipschitz bound for `F'` on `ball` in the ∞-norm:
    /// `max_j Σ_{k,i} mag(H_j[k][i](ball))`.
    fn lipschitz(&self, ball: &IntervalBox) -> f64 {
        self.hessians
            .iter()
            .map(|h| {
                h.iter()
                    .flatten()
                    .map(|p| p.eval_unchecked(ball.components()).mag())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Kantorovich box around a real approximate root: `x̄ ± max(ω, floor)`
    /// where `ω = (1 − √(1−2h))/h · η` and the floor is
    /// `min_radius · max(1, |x̄_i|)`.
    pub fn initial_box(&self, xbar: &[f64], min_radius: f64) -> Result<(IntervalBox, KantorovichData), VerifyError> {
        self.check_dim(xbar.len())?;
        let (fx, j) = self.diff.eval_with_jacobian(xbar);
        let jinv = j.inverse().map_err(|_| VerifyError::SingularJacobian)?;
        let b = jinv.norm_inf();
        let eta = jinv.mul_vec(&fx).iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut rho = (10.0 * eta).max(1e-8);
        let mut last_h = f64::INFINITY;
        for _ in 0..=8 {
            let ball = IntervalBox::centered(xbar, &vec![rho; xbar.len()]);
            let k = self.lipschitz(&ball);
            let h = b * k * eta;
            last_h = h;
            if h.is_finite() && h <= 0.5 {
                let omega = if h == 0.0 {
                    eta
                } else {
                    (1.0 - (1.0 - 2.0 * h).sqrt()) / h * eta
                };
                if omega <= rho {
                    let radii: Vec<f64> = xbar.iter().map(|x| omega.max(min_radius * x.abs().max(1.0))).collect();
                    return Ok((
                        IntervalBox::centered(xbar, &radii),
                        KantorovichData { b, eta, k, h, omega },
                    ));
                }
            }
            rho *= 0.5;
        }
        Err(VerifyError::KantorovichFailed { h: last_h })
    }

    /// One Krawczyk evaluation on `x`.
    pub fn krawczyk(&self, x: &IntervalBox) -> Result<CertifiedBox, VerifyError> {
        self.check_dim(x.dim())?;
        let m = x.mid();
        let fm = self.diff.eval_interval(&IntervalBox::from_point(&m));
        let jx = self.diff.jacobian_interval(x);
        let ymat = jx
            .midpoint()
            .ok()
            .and_then(|mj| mj.inverse().ok())
            .ok_or(VerifyError::SingularMidpointJacobian)?;
        let image = krawczyk_image(&m, &fm, &jx, &ymat, x);
        let status = if image.interior_subset(x) {
            BoxStatus::UniqueRoot
        } else if !image.intersects(x) {
            BoxStatus::NoRoot
        } else {
            BoxStatus::Undecided
        };
        Ok(CertifiedBox {
            bx: x.clone(),
            krawczyk_image: image,
            status,
        })
    }

    /// Natural interval extension test: some `F_i(X)` misses zero.
    pub fn excludes(&self, x: &IntervalBox) -> bool {
        self.diff.eval_interval(x).iter().any(|c| !c.contains_zero())
    }

    /// `‖I − Y F'(X)‖∞` upper bound: below 1 means `K` contracts on `x`.
    pub fn contraction(&self, x: &IntervalBox) -> Option<f64> {
        let jx = self.diff.jacobian_interval(x);
        let y = jx.midpoint().ok()?.inverse().ok()?;
        Some(jx.left_mul_point(&y).identity_minus().norm_inf_bound())
    }

    /// Shrinks a certified box until every width is at most `target`, keeping
    /// a certificate for each intermediate box. Returns the narrowest box
    /// reached; `None` only if `cert` is not a `UniqueRoot` box.
    pub fn tighten(&self, cert: &CertifiedBox, target: f64) -> Option<CertifiedBox> {
        if cert.status != BoxStatus::UniqueRoot {
            return None;
        }
        let mut cur = cert.clone();
        for _ in 0..64 {
            if cur.bx.max_width() <= target {
                return Some(cur);
            }
            let prev = cur.bx.max_width();
            // the image is inside int(X) and holds the root
            if let Ok(c) = self.krawczyk(&cur.krawczyk_image) {
                if c.status == BoxStatus::UniqueRoot && c.bx.max_width() < 0.9 * prev {
                    cur = c;
                    continue;
                }
            }
            // recentre a small box on the image
            let center = cur.krawczyk_image.mid();
            let radius = target / 4.0;
            let small = IntervalBox::centered(&center, &vec![radius; center.len()]);
            if let Some(small) = small.intersect(&cur.bx) {
                if let Ok(c) = self.krawczyk(&small) {
                    if c.status == BoxStatus::UniqueRoot && c.bx.max_width() < prev {
                        cur = c;
                        continue;
                    }
                }
            }
            // bisect, keeping the half that certifies
            let (l, r) = cur.bx.bisect_widest();
            let mut moved = false;
            for half in [l, r] {
                if let Ok(c) = self.krawczyk(&half) {
                    if c.status == BoxStatus::UniqueRoot {
                        cur = c;
                        moved = true;
                        break;
                    }
                }
            }
            if !moved {
                return Some(cur);
            }
        }
        Some(cur)
    }
}

pub(crate) fn krawczyk_image(
    m: &[f64],
    fm: &IntervalBox,
    jx: &IntervalMatrix,
    y: &Matrix<f64>,
    x: &IntervalBox,
) -> IntervalBox {
    let yf = IntervalMatrix::from_point(y).matvec(fm).expect("square");
    let c = jx.left_mul_point(y).identity_minus();
    let d = c.matvec(&x.sub_point(m)).expect("square");
    let mpt = IntervalBox::from_point(m);
    &(&mpt - &yf) + &d
}

/// Free-function form of [`Verifier::rejection_radius`].
pub fn rejection_radius(f: &PolySystem, xbar: &[Complex64]) -> Result<RejectionRadius, VerifyError> {
    Verifier::new(f)?.rejection_radius(xbar)
}

/// Free-function form of [`Verifier::initial_box`] with the default radius
/// floor.
pub fn initial_box(f: &PolySystem, xbar: &[f64]) -> Result<(IntervalBox, KantorovichData), VerifyError> {
    Verifier::new(f)?.initial_box(xbar, IsolateConfig::default().min_radius)
}

/// Free-function form of [`Verifier::krawczyk`].
pub fn krawczyk(f: &PolySystem, x: &IntervalBox) -> Result<CertifiedBox, VerifyError> {
    Verifier::new(f)?.krawczyk(x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsolateConfig {
    /// Upper bound on every output box width.
    pub tau: f64,
    /// Bisection budget per candidate.
    pub max_bisections: usize,
    /// Relative floor on initial box radii.
    pub min_radius: f64,
    pub tracker: TrackerConfig,
}

impl Default for IsolateConfig {
    fn default() -> Self {
        IsolateConfig {
            tau: 1e-8,
            max_bisections: 200,
            min_radius: 1e-13,
            tracker: TrackerConfig::default(),
        }
    }
}

impl IsolateConfig {
    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.tracker.rng_seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UndecidedReason {
    MaxBisectionsExceeded,
    /// Two certified boxes overlap and could not be separated or merged.
    UnresolvedOverlap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UndecidedRegion {
    pub path_id: Option<usize>,
    #[serde(serialize_with = "serialize_box")]
    pub bx: IntervalBox,
    pub reason: UndecidedReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IsolationStats {
    pub candidates: usize,
    pub rejected_complex: usize,
    pub kantorovich_boxes: usize,
    pub heuristic_boxes: usize,
    pub excluded: usize,
    pub bisections: usize,
    pub merged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Isolation {
    /// Pairwise disjoint `UniqueRoot` boxes, sorted lexicographically by
    /// midpoint.
    pub boxes: Vec<CertifiedBox>,
    pub undecided: Vec<UndecidedRegion>,
    pub paths: TrackStats,
    pub stats: IsolationStats,
}

enum Outcome {
    Certified(Vec<CertifiedBox>),
    Undecided(IntervalBox),
}

/// Runs the Krawczyk loop from one starting box. Undecided boxes are
/// contracted with `K(X) ∩ X` when that shrinks them, inflated when the
/// operator contracts but the box is too tight to contain its image, and
/// otherwise bisected along the widest coordinate.
fn certify_from(v: &Verifier, x0: IntervalBox, budget: usize, stats: &mut IsolationStats) -> Outcome {
    let mut stack = vec![(x0, 0usize)];
    let mut found = Vec::new();
    let mut bisections = 0;
    let mut steps = 0;
    while let Some((x, inflations)) = stack.pop() {
        steps += 1;
        if steps > 20 * budget.max(10) {
            return Outcome::Undecided(x);
        }
        if v.excludes(&x) {
            stats.excluded += 1;
            continue;
        }
        let c = match v.krawczyk(&x) {
            Ok(c) => c,
            Err(_) => {
                bisections += 1;
                stats.bisections += 1;
                if bisections > budget {
                    return Outcome::Undecided(x);
                }
                let (l, r) = x.bisect_widest();
                stack.push((r, inflations));
                stack.push((l, inflations));
                continue;
            }
        };
        match c.status {
            BoxStatus::UniqueRoot => found.push(c),
            BoxStatus::NoRoot => stats.excluded += 1,
            BoxStatus::Undecided => {
                let k = c.krawczyk_image;
                let q = v.contraction(&x).unwrap_or(f64::INFINITY);
                if q < 0.5 && inflations < 12 && !k.subset(&x) && k.max_width() <= 2.0 * x.max_width() {
                    // K maps X close to itself but overshoots the boundary:
                    // grow X to cover the image instead of splitting.
                    let grown = x.hull(&k);
                    let delta: Vec<f64> = grown.iter().map(|c| 0.1 * c.wid() + f64::MIN_POSITIVE).collect();
                    stack.push((grown.inflate(&delta), inflations + 1));
                    continue;
                }
                let kx = k.intersect(&x).expect("undecided implies overlap");
                if kx.max_width() < 0.5 * x.max_width() {
                    stack.push((kx, inflations));
                    continue;
                }
                bisections += 1;
                stats.bisections += 1;
                if bisections > budget {
                    return Outcome::Undecided(x);
                }
                let (l, r) = kx.bisect_widest();
                stack.push((r, inflations));
                stack.push((l, inflations));
            }
        }
    }
    Outcome::Certified(found)
}

/// Real Newton from `x0`; returns the best point found and its residual.
fn real_newton(v: &Verifier, x0: &[f64]) -> (Vec<f64>, f64) {
    let norm = |f: &[f64]| f.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let mut x = x0.to_vec();
    let mut best = (x.clone(), norm(&v.diff.eval(&x)));
    for _ in 0..10 {
        let (f, j) = v.diff.eval_with_jacobian(&x);
        let Ok(dx) = j.solve(&f) else { break };
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi -= d;
        }
        let r = norm(&v.diff.eval(&x));
        if !r.is_finite() {
            break;
        }
        if r < best.1 {
            best = (x.clone(), r);
        }
    }
    best
}

fn certify_candidate(v: &Verifier, cand: &CandidateRoot, cfg: &IsolateConfig, stats: &mut IsolationStats) -> Outcome {
    let (xbar, _) = real_newton(v, &cand.real_part());
    let scale = xbar.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
    let likely_real = cand.converged && cand.max_imag() <= 1e-6 * scale;
    let mut x0 = match v.initial_box(&xbar, cfg.min_radius) {
        Ok((b, _)) => {
            stats.kantorovich_boxes += 1;
            b
        }
        Err(_) => {
            stats.heuristic_boxes += 1;
            // a box much wider than the point's own scale is hopeless
            let r = (100.0 * cand.residual).clamp(1e-6, 0.1 * scale);
            let r = if r.is_finite() { r } else { 1e-6 };
            IntervalBox::centered(&xbar, &vec![r; xbar.len()])
        }
    };
    let mut attempts = 0;
    loop {
        match certify_from(v, x0.clone(), cfg.max_bisections, stats) {
            // too tight for rounding errors, or nothing certified: widen
            Outcome::Undecided(_) if likely_real && attempts < 3 => {
                attempts += 1;
                let r: Vec<f64> = x0.iter().map(|c| 10.0 * c.wid().max(1e-12)).collect();
                x0 = x0.inflate(&r);
            }
            Outcome::Certified(found) if found.is_empty() && likely_real && attempts < 3 => {
                attempts += 1;
                let r: Vec<f64> = x0.iter().map(|c| 10.0 * c.wid().max(1e-12)).collect();
                x0 = x0.inflate(&r);
            }
            other => return other,
        }
    }
}

/// Merges or separates overlapping certified boxes. Two overlapping boxes
/// whose intersection certifies a unique root hold the same root and are
/// merged; otherwise both are tightened until they separate.
fn resolve_overlaps(
    v: &Verifier,
    mut boxes: Vec<CertifiedBox>,
    undecided: &mut Vec<UndecidedRegion>,
    stats: &mut IsolationStats,
) -> Vec<CertifiedBox> {
    let mut i = 0;
    'outer: while i < boxes.len() {
        let mut j = i + 1;
        while j < boxes.len() {
            if !boxes[i].bx.intersects(&boxes[j].bx) {
                j += 1;
                continue;
            }
            let mut a = boxes[i].clone();
            let mut b = boxes[j].clone();
            let mut resolved = false;
            for _ in 0..40 {
                let Some(ix) = a.bx.intersect(&b.bx) else {
                    resolved = true;
                    break;
                };
                if let Ok(c) = v.krawczyk(&ix) {
                    if c.status == BoxStatus::UniqueRoot {
                        stats.merged += 1;
                        boxes[i] = c;
                        boxes.remove(j);
                        // the merged box may now meet an earlier one
                        i = 0;
                        continue 'outer;
                    }
                }
                let (wa, wb) = (a.bx.max_width(), b.bx.max_width());
                let na = v.tighten(&a, wa / 4.0).unwrap_or(a.clone());
                let nb = v.tighten(&b, wb / 4.0).unwrap_or(b.clone());
                if na.bx.max_width() >= wa && nb.bx.max_width() >= wb {
                    break;
                }
                a = na;
                b = nb;
            }
            if resolved || !a.bx.intersects(&b.bx) {
                boxes[i] = a;
                boxes[j] = b;
                j += 1;
            } else {
                undecided.push(UndecidedRegion {
                    path_id: None,
                    bx: a.bx.hull(&b.bx),
                    reason: UndecidedReason::UnresolvedOverlap,
                });
                boxes.remove(j);
                boxes.remove(i);
                continue 'outer;
            }
        }
        i += 1;
    }
    boxes
}

/// Certifies the real roots among already-computed homotopy candidates.
pub fn isolate_candidates(
    v: &Verifier,
    candidates: &[CandidateRoot],
    cfg: &IsolateConfig,
) -> (Vec<CertifiedBox>, Vec<UndecidedRegion>, IsolationStats) {
    let mut stats = IsolationStats::default();
    let mut undecided = Vec::new();
    let mut certified = Vec::new();
    for cand in candidates.iter().filter(|c| c.is_finite()) {
        stats.candidates += 1;
        if cand.converged {
            if let Ok(rr) = v.rejection_radius(&cand.point) {
                if cand.point.iter().any(|z| z.im.abs() > rr.r) {
                    stats.rejected_complex += 1;
                    continue;
                }
            }
        }
        match certify_candidate(v, cand, cfg, &mut stats) {
            Outcome::Certified(found) => certified.extend(found),
            Outcome::Undecided(bx) => undecided.push(UndecidedRegion {
                path_id: Some(cand.path_id),
                bx,
                reason: UndecidedReason::MaxBisectionsExceeded,
            }),
        }
    }
    let boxes = resolve_overlaps(v, certified, &mut undecided, &mut stats);
    let mut boxes: Vec<CertifiedBox> = boxes
        .into_iter()
        .map(|b| v.tighten(&b, cfg.tau).expect("certified input"))
        .collect();
    boxes.sort_by(|a, b| {
        a.midpoint()
            .iter()
            .zip(&b.midpoint())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    (boxes, undecided, stats)
}

/// Isolates all real roots of a square polynomial system: homotopy solve,
/// complex rejection, Kantorovich boxing, Krawczyk certification with
/// bisection, overlap resolution, and width enforcement to `cfg.tau`.
pub fn real_root_isolate(f: &PolySystem, cfg: &IsolateConfig) -> Result<Isolation, VerifyError> {
    let v = Verifier::new(f)?;
    let tracked = track_all(f, &cfg.tracker)?;
    let (boxes, undecided, stats) = isolate_candidates(&v, &tracked.candidates, cfg);
    Ok(Isolation {
        boxes,
        undecided,
        paths: tracked.stats,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    fn poly(n: usize, ts: &[(f64, &[u32])]) -> MultiPoly {
        MultiPoly::from_terms(n, &ts.iter().map(|(c, e)| (*c, e.to_vec())).collect::<Vec<_>>())
    }

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn rejection_radius_linear_and_fallback() {
        let f = PolySystem::new(vec![poly(1, &[(2.0, &[1]), (-2.0, &[0])])]).unwrap();
        let rr = rejection_radius(&f, &[Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(rr.lambda, 0.0);
        assert_eq!(rr.r, 0.5 * 2.0 * 2.0);
        let g = PolySystem::new(vec![poly(1, &[(1.0, &[2]), (-1.0, &[0])])]).unwrap();
        match rejection_radius(&g, &[Complex64::new(1.0, 0.0)]) {
            Err(VerifyError::NegativeDenominator(d)) => assert_eq!(d, -1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn krawczyk_linear_and_exclusion() {
        let f = PolySystem::new(vec![poly(1, &[(2.0, &[1]), (-2.0, &[0])])]).unwrap();
        let c = krawczyk(&f, &IntervalBox::new(vec![iv(0.5, 1.5)])).unwrap();
        assert_eq!(c.status, BoxStatus::UniqueRoot);
        assert_eq!(c.krawczyk_image[0], iv(1.0, 1.0));
        let g = PolySystem::new(vec![poly(1, &[(1.0, &[2]), (-2.0, &[0])])]).unwrap();
        let c = krawczyk(&g, &IntervalBox::new(vec![iv(2.0, 3.0)])).unwrap();
        assert_eq!(c.status, BoxStatus::NoRoot);
    }

    #[test]
    fn exact_root_gets_floor_radius() {
        let f = PolySystem::new(vec![poly(1, &[(1.0, &[1]), (-1.0, &[0])])]).unwrap();
        let (b, k) = initial_box(&f, &[1.0]).unwrap();
        assert_eq!((k.eta, k.h), (0.0, 0.0));
        assert!(b[0].contains(1.0) && b[0].width().unwrap() > 0.0 && b[0].width().unwrap() < 1e-11);
    }

    #[test]
    fn isolates_parabola_line() {
        // x^2 + y - 2, x + 2y - 3
        let f = PolySystem::new(vec![
            poly(2, &[(1.0, &[2, 0]), (1.0, &[0, 1]), (-2.0, &[0, 0])]),
            poly(2, &[(1.0, &[1, 0]), (2.0, &[0, 1]), (-3.0, &[0, 0])]),
        ])
        .unwrap();
        let iso = real_root_isolate(&f, &IsolateConfig::default()).unwrap();
        assert_eq!(iso.boxes.len(), 2);
        assert!(iso.boxes[0].bx.contains_point(&[-0.5, 1.75]));
        assert!(iso.boxes[1].bx.contains_point(&[1.0, 1.0]));
        for b in &iso.boxes {
            assert!(b.bx.max_width() <= 1e-8);
            assert_eq!(b.status, BoxStatus::UniqueRoot);
        }
    }

    #[test]
    fn no_real_roots() {
        let f = PolySystem::new(vec![
            poly(2, &[(1.0, &[2, 0]), (1.0, &[0, 0])]),
            poly(2, &[(1.0, &[0, 1]), (-1.0, &[0, 0])]),
        ])
        .unwrap();
        let iso = real_root_isolate(&f, &IsolateConfig::default()).unwrap();
        assert!(iso.boxes.is_empty());
        assert!(iso.undecided.is_empty());
    }
}
