//! Homotopy continuation for square polynomial systems.
//!
//! Tracks `H(x,t) = γ(1−t)G(x) + tF(x)` from the roots of an easy start
//! system `G` at `t = 0` to `t = 1` with an Euler predictor and a Newton
//! corrector. Two start systems are available: the total-degree system
//! `x_i^{d_i} − 1`, and a variable-wise linear-product system whose path
//! count is the permanent of the degree matrix (much smaller for systems that
//! are sparse in the degrees of individual variables).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::poly::{DiffSystem, MultiPoly, PolySystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomotopyError {
    #[error("system is not square: {equations} equations in {variables} variables")]
    NonSquare { equations: usize, variables: usize },
    #[error("equation {index} is the zero polynomial")]
    ZeroPolynomial { index: usize },
    #[error("start system would need {paths} paths, above the limit of {limit}")]
    TooManyPaths { paths: u128, limit: u128 },
}

/// Which start system to deform from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum StartKind {
    #[default]
    TotalDegree,
    /// `G_i = Π_j Π_k (x_j − c_ijk)` with `deg_{x_j} F_i` factors per variable.
    LinearProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackerConfig {
    pub initial_step: f64,
    pub min_step: f64,
    /// Largest step taken before `endgame_start`.
    pub max_step: f64,
    /// Largest step taken from `endgame_start` on.
    pub endgame_max_step: f64,
    pub corrector_tol: f64,
    pub max_corrector_iters: usize,
    pub endgame_start: f64,
    pub residual_tol: f64,
    pub rng_seed: u64,
    /// Endpoints with `|x_0| / ‖x‖∞` below this are at infinity.
    pub infinity_tol: f64,
    /// Converged endpoints closer than this (∞-norm) are merged.
    pub dedup_tol: f64,
    pub max_steps_per_path: usize,
    /// Rounds of re-tracking for failed or colliding paths.
    pub retries: usize,
    /// Whole-homotopy reruns with a new seed while paths still fail.
    pub restarts: usize,
    pub start: StartKind,
    pub max_paths: u128,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            initial_step: 0.05,
            min_step: 1e-10,
            max_step: 0.1,
            endgame_max_step: 0.01,
            corrector_tol: 1e-10,
            max_corrector_iters: 5,
            endgame_start: 0.9,
            residual_tol: 1e-8,
            rng_seed: 0,
            infinity_tol: 1e-8,
            dedup_tol: 1e-8,
            max_steps_per_path: 50_000,
            retries: 2,
            restarts: 1,
            start: StartKind::TotalDegree,
            max_paths: 200_000,
        }
    }
}

impl TrackerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    fn tightened(&self, round: usize) -> TrackerConfig {
        let f = 0.25_f64.powi(round as i32);
        TrackerConfig {
            initial_step: self.initial_step * f,
            max_step: self.max_step * f,
            endgame_max_step: self.endgame_max_step * f,
            min_step: self.min_step * f,
            max_steps_per_path: self.max_steps_per_path * (1 << (2 * round)),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PathOutcome {
    Converged,
    /// Reached `t = 1` but the final residual is above tolerance.
    Inaccurate,
    /// Step size underflow or step budget exhausted.
    Failed,
    /// Ran off towards infinity.
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateRoot {
    #[serde(serialize_with = "serialize_complex_vec")]
    pub point: Vec<Complex64>,
    /// ∞-norm of `F` at `point`.
    pub residual: f64,
    pub converged: bool,
    pub path_id: usize,
    pub outcome: PathOutcome,
}

fn serialize_complex_vec<S: serde::Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl CandidateRoot {
    pub fn real_part(&self) -> Vec<f64> {
        self.point.iter().map(|z| z.re).collect()
    }

    /// Largest imaginary-part magnitude.
    pub fn max_imag(&self) -> f64 {
        self.point.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Finite endpoint worth handing to verification.
    pub fn is_finite(&self) -> bool {
        self.outcome != PathOutcome::Diverged && self.point.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TrackStats {
    pub paths: usize,
    pub converged: usize,
    pub inaccurate: usize,
    pub failed: usize,
    pub diverged: usize,
    pub deduplicated: usize,
    pub retracked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackResult {
    /// Distinct converged roots plus every non-converged endpoint, by path id.
    pub candidates: Vec<CandidateRoot>,
    pub stats: TrackStats,
    pub gamma: [f64; 2],
}

impl TrackResult {
    pub fn converged(&self) -> impl Iterator<Item = &CandidateRoot> {
        self.candidates.iter().filter(|c| c.converged)
    }
}

/// A start system and its roots.
#[derive(Debug, Clone)]
pub struct StartSystem {
    pub system: PolySystem,
    pub roots: Vec<Vec<Complex64>>,
    /// Linear factors per equation when the system is a product of them;
    /// evaluated in factored form.
    pub(crate) factors: Option<Vec<Vec<LinearForm>>>,
}

fn check_input(f: &PolySystem) -> Result<(), HomotopyError> {
    if !f.is_square() {
        return Err(HomotopyError::NonSquare {
            equations: f.len(),
            variables: f.nvars(),
        });
    }
    if let Some(index) = f.polys().iter().position(MultiPoly::is_zero) {
        return Err(HomotopyError::ZeroPolynomial { index });
    }
    Ok(())
}

/// Total-degree start system `G_i = x_i^{d_i} − 1` and its `Π d_i` roots,
/// enumerated in lexicographic order of root-of-unity indices.
pub fn start_system(f: &PolySystem) -> Result<StartSystem, HomotopyError> {
    check_input(f)?;
    let n = f.nvars();
    let degs = f.degrees();
    let polys = degs
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let mut e = vec![0; n];
            e[i] = d;
            MultiPoly::from_terms(n, &[(1.0, e), (-1.0, vec![0; n])])
        })
        .collect();
    let system = PolySystem::new(polys).expect("uniform arity");
    let count: u128 = degs.iter().map(|&d| d as u128).product();
    if degs.contains(&0) {
        // a nonzero constant equation: no roots at all
        return Ok(StartSystem {
            system,
            roots: vec![],
            factors: None,
        });
    }
    let mut roots = Vec::with_capacity(count as usize);
    let mut idx = vec![0u32; n];
    loop {
        roots.push(
            idx.iter()
                .zip(&degs)
                .map(|(&k, &d)| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64))
                .collect(),
        );
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(StartSystem {
                    system,
                    roots,
                    factors: None,
                });
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < degs[i] {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Degree of `p` in the variables of `group` jointly.
fn group_degree(p: &MultiPoly, group: &[usize]) -> u32 {
    p.terms()
        .map(|(m, _)| group.iter().map(|&v| m.exponents()[v]).sum::<u32>())
        .max()
        .unwrap_or(0)
}

/// Multi-homogeneous Bézout number of `f` for a partition of its variables:
/// the number of ways to give each equation one linear factor of some group,
/// every group `g` receiving exactly `|g|` equations, weighted by degrees.
fn multihom_count(f: &PolySystem, part: &[Vec<usize>]) -> u128 {
    let d: Vec<Vec<u32>> = f
        .polys()
        .iter()
        .map(|p| part.iter().map(|g| group_degree(p, g)).collect())
        .collect();
    // DP over the remaining capacity of every group, mixed-radix encoded
    let radix: Vec<usize> = part.iter().map(|g| g.len() + 1).collect();
    let states: usize = radix.iter().product();
    let mut place = vec![1usize; part.len()];
    for k in 1..part.len() {
        place[k] = place[k - 1] * radix[k - 1];
    }
    let full: usize = part.iter().zip(&place).map(|(g, p)| g.len() * p).sum();
    let mut dp = vec![0u128; states];
    dp[full] = 1;
    for row in &d {
        let mut next = vec![0u128; states];
        for (st, &ways) in dp.iter().enumerate() {
            if ways == 0 {
                continue;
            }
            for (k, &dk) in row.iter().enumerate() {
                if dk > 0 && !(st / place[k]).is_multiple_of(radix[k]) {
                    next[st - place[k]] += ways * dk as u128;
                }
            }
        }
        dp = next;
    }
    dp[0]
}

/// Variable partition for [`linear_product_start`]: start from singletons
/// and greedily merge the pair of groups that lowers the count most.
pub fn linear_product_partition(f: &PolySystem) -> Vec<Vec<usize>> {
    let mut part: Vec<Vec<usize>> = (0..f.nvars()).map(|v| vec![v]).collect();
    let mut best = multihom_count(f, &part);
    loop {
        let mut improved: Option<(u128, Vec<Vec<usize>>)> = None;
        for a in 0..part.len() {
            for b in a + 1..part.len() {
                let mut cand: Vec<Vec<usize>> = part
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != a && k != b)
                    .map(|(_, g)| g.clone())
                    .collect();
                let mut merged = [part[a].clone(), part[b].clone()].concat();
                merged.sort_unstable();
                cand.push(merged);
                let c = multihom_count(f, &cand);
                if c < improved.as_ref().map_or(best, |x| x.0) {
                    improved = Some((c, cand));
                }
            }
        }
        match improved {
            Some((c, p)) => {
                best = c;
                part = p;
            }
            None => break,
        }
    }
    part.sort();
    part
}

/// Path count of [`linear_product_start`].
pub fn linear_product_count(f: &PolySystem) -> u128 {
    multihom_count(f, &linear_product_partition(f))
}

/// Per variable group, the linear factors `(coefficients, constant)`.
type GroupFactors = Vec<Vec<(Vec<f64>, f64)>>;

/// Linear-product start system over the groups of
/// [`linear_product_partition`]: `G_i` is a product of `d_ig` random real
/// linear forms in the variables of each group `g`, `d_ig` the degree of
/// `F_i` in that group. Singleton groups give factors `x_j − c`. Each root
/// comes from choosing one factor per equation such that every group gets
/// as many factors as it has variables, then solving the resulting linear
/// systems group by group.
pub fn linear_product_start(f: &PolySystem, seed: u64) -> Result<StartSystem, HomotopyError> {
    check_input(f)?;
    let n = f.nvars();
    let part = linear_product_partition(f);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_11ea_u64);
    let mut coef = || rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    // factors[i][g][k] = (coefficients over part[g], constant)
    let factors: Vec<GroupFactors> = f
        .polys()
        .iter()
        .map(|p| {
            part.iter()
                .map(|g| {
                    (0..group_degree(p, g))
                        .map(|_| {
                            let a = if g.len() == 1 {
                                vec![1.0]
                            } else {
                                g.iter().map(|_| coef()).collect()
                            };
                            (a, coef())
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let polys: Vec<MultiPoly> = factors
        .iter()
        .map(|row| {
            let mut prod = MultiPoly::constant(n, 1.0);
            for (g, fs) in part.iter().zip(row) {
                for (a, b) in fs {
                    let mut lin = MultiPoly::constant(n, -b);
                    for (&v, &av) in g.iter().zip(a) {
                        lin = &lin + &(&MultiPoly::var(n, v) * &MultiPoly::constant(n, av));
                    }
                    prod = &prod * &lin;
                }
            }
            prod
        })
        .collect();
    let system = PolySystem::new(polys).expect("uniform arity");

    struct Search<'a> {
        part: &'a [Vec<usize>],
        factors: &'a [GroupFactors],
        // chosen (group, factor) per equation
        choice: Vec<(usize, usize)>,
        room: Vec<usize>,
        roots: Vec<Vec<Complex64>>,
    }
    impl Search<'_> {
        fn rec(&mut self, i: usize) {
            if i == self.factors.len() {
                self.emit();
                return;
            }
            for g in 0..self.part.len() {
                if self.room[g] == 0 {
                    continue;
                }
                self.room[g] -= 1;
                for k in 0..self.factors[i][g].len() {
                    self.choice[i] = (g, k);
                    self.rec(i + 1);
                }
                self.room[g] += 1;
            }
        }
        fn emit(&mut self) {
            let n = self.choice.len();
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            for (g, vars) in self.part.iter().enumerate() {
                let rows: Vec<&(Vec<f64>, f64)> = self
                    .choice
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.0 == g)
                    .map(|(i, &(_, k))| &self.factors[i][g][k])
                    .collect();
                let m = vars.len();
                let a = Matrix::from_vec(m, rows.iter().flat_map(|r| r.0.iter().copied()).collect());
                let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
                // random forms: singular only with probability zero
                let Ok(sol) = a.solve(&b) else { return };
                for (&v, s) in vars.iter().zip(sol) {
                    x[v] = Complex64::new(s, 0.0);
                }
            }
            self.roots.push(x);
        }
    }
    let mut search = Search {
        part: &part,
        factors: &factors,
        choice: vec![(0, 0); n],
        room: part.iter().map(Vec::len).collect(),
        roots: Vec::new(),
    };
    search.rec(0);
    let roots = search.roots;
    let forms = factors
        .iter()
        .map(|row| {
            part.iter()
                .zip(row)
                .flat_map(|(g, fs)| {
                    fs.iter().map(move |(a, b)| LinearForm {
                        coefs: g.iter().copied().zip(a.iter().copied()).collect(),
                        constant: *b,
                    })
                })
                .collect()
        })
        .collect();
    Ok(StartSystem {
        system,
        roots,
        factors: Some(forms),
    })
}

/// `Σ a_j x_j − b`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LinearForm {
    coefs: Vec<(usize, f64)>,
    constant: f64,
}

fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The homotopy in projective coordinates `(x_1, …, x_n, x_0)` on the
/// affine chart `a·x = 1`, so paths heading to infinity stay bounded.
struct Homotopy<'a> {
    f: &'a DiffSystem,
    g: &'a StartEval,
    gamma: Complex64,
    patch: Vec<f64>,
}

/// Homogenized start system.
enum StartEval {
    Poly(DiffSystem),
    /// `x_0^e Π_k (a_k·x − b_k x_0)` per equation.
    Product(Vec<(u32, Vec<LinearForm>)>),
}

impl StartEval {
    /// Values and row-major Jacobian.
    fn eval_rect(&self, x: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let rows = match self {
            StartEval::Poly(d) => return d.eval_rect(x),
            StartEval::Product(rows) => rows,
        };
        let m = x.len();
        let x0 = x[m - 1];
        let one = Complex64::new(1.0, 0.0);
        let mut vals = Vec::with_capacity(rows.len());
        let mut jac = vec![Complex64::new(0.0, 0.0); rows.len() * m];
        let mut suffix: Vec<Complex64> = Vec::new();
        for (i, (e, fs)) in rows.iter().enumerate() {
            let lin: Vec<Complex64> = fs
                .iter()
                .map(|f| f.coefs.iter().fold(-x0 * f.constant, |acc, &(j, a)| acc + x[j] * a))
                .collect();
            suffix.clear();
            suffix.resize(lin.len() + 1, one);
            for k in (0..lin.len()).rev() {
                suffix[k] = suffix[k + 1] * lin[k];
            }
            let x0e = x0.powu(*e);
            let row = &mut jac[i * m..(i + 1) * m];
            let mut prefix = one;
            for (k, f) in fs.iter().enumerate() {
                let d = x0e * prefix * suffix[k + 1];
                for &(j, a) in &f.coefs {
                    row[j] += d * a;
                }
                row[m - 1] -= d * f.constant;
                prefix *= lin[k];
            }
            if *e > 0 {
                row[m - 1] += x0.powu(e - 1) * (*e as f64) * suffix[0];
            }
            vals.push(x0e * suffix[0]);
        }
        (vals, jac)
    }
}

impl Homotopy<'_> {
    /// `H`, `∂H/∂x`, and `∂H/∂t` at `(x, t)`, the patch equation last.
    fn eval(&self, x: &[Complex64], t: f64) -> (Vec<Complex64>, Matrix<Complex64>, Vec<Complex64>) {
        let (fv, fj) = self.f.eval_rect(x);
        let (gv, gj) = self.g.eval_rect(x);
        let m = x.len();
        let a = self.gamma * (1.0 - t);
        let mut h: Vec<Complex64> = fv.iter().zip(&gv).map(|(&fi, &gi)| a * gi + t * fi).collect();
        let mut ht: Vec<Complex64> = fv.iter().zip(&gv).map(|(&fi, &gi)| fi - self.gamma * gi).collect();
        let mut jd: Vec<Complex64> = fj.iter().zip(&gj).map(|(&fjk, &gjk)| a * gjk + t * fjk).collect();
        // Equilibrate rows: far from the patch's dominant coordinate the
        // entries of high-degree rows can sink to ~1e-15 and would look
        // singular next to the patch row. Newton steps are unaffected.
        for i in 0..m - 1 {
            let s = jd[i * m..(i + 1) * m].iter().map(|z| z.norm()).fold(0.0, f64::max);
            if s > 0.0 && s.is_finite() {
                let r = 1.0 / s;
                h[i] *= r;
                ht[i] *= r;
                jd[i * m..(i + 1) * m].iter_mut().for_each(|z| *z *= r);
            }
        }
        let dot = x
            .iter()
            .zip(&self.patch)
            .fold(Complex64::new(-1.0, 0.0), |acc, (&xi, &ai)| acc + xi * ai);
        h.push(dot);
        ht.push(Complex64::new(0.0, 0.0));
        jd.extend(self.patch.iter().map(|&ai| Complex64::new(ai, 0.0)));
        (h, Matrix::from_vec(m, jd), ht)
    }

    /// Newton on `H(·, t)`; `Some(x)` when the update falls below `tol`
    /// (relative) within `iters` contracting steps.
    fn correct(&self, x0: &[Complex64], t: f64, tol: f64, iters: usize) -> Option<Vec<Complex64>> {
        let mut x = x0.to_vec();
        let mut prev = f64::INFINITY;
        for _ in 0..iters {
            let (h, j, _) = self.eval(&x, t);
            let dx = j.solve(&h).ok()?;
            let step = norm_inf(&dx);
            let scale = norm_inf(&x).max(1.0);
            if !step.is_finite() || step > 0.1 * scale {
                return None;
            }
            // demand contraction; a stalling corrector hints at a nearby path
            if prev.is_finite() && step > 0.5 * prev && step > tol * scale {
                return None;
            }
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi -= di;
            }
            if step <= tol * norm_inf(&x).max(1.0) {
                return Some(x);
            }
            prev = step;
        }
        None
    }

    fn to_projective(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut x = z.to_vec();
        x.push(Complex64::new(1.0, 0.0));
        let s = x
            .iter()
            .zip(&self.patch)
            .fold(Complex64::new(0.0, 0.0), |acc, (&xi, &ai)| acc + xi * ai);
        x.iter().map(|&xi| xi / s).collect()
    }
}

/// `|x_0| / ‖x‖∞`: how far a projective point is from the hyperplane at
/// infinity.
fn finiteness(x: &[Complex64]) -> f64 {
    x[x.len() - 1].norm() / norm_inf(x)
}

/// Newton polish on `F` alone; returns the point and its residual.
fn polish(f: &DiffSystem, x0: &[Complex64]) -> (Vec<Complex64>, f64) {
    let mut x = x0.to_vec();
    let mut best = (x.clone(), norm_inf(&f.eval(&x)));
    for _ in 0..8 {
        let (fv, j) = f.eval_with_jacobian(&x);
        let Ok(dx) = j.solve(&fv) else { break };
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi -= di;
        }
        let r = norm_inf(&f.eval(&x));
        if !(r.is_finite()) {
            break;
        }
        if r < best.1 {
            best = (x.clone(), r);
        }
        if norm_inf(&dx) <= 1e-15 * norm_inf(&x).max(1.0) {
            break;
        }
    }
    best
}

/// Endpoint of one tracked path.
struct PathEnd {
    x: Vec<Complex64>,
    reached: bool,
    /// `|x_0|/‖x‖` was shrinking like a positive power of `1 − t`.
    heading_to_infinity: bool,
}

/// Estimated exponent `w` in `ρ ~ (1−t)^w` from the tail of the history.
fn decay_exponent(hist: &[(f64, f64)]) -> Option<f64> {
    let &(sa, ra) = hist.last()?;
    if sa > 0.05 || ra <= 0.0 {
        return None;
    }
    let &(sb, rb) = hist.iter().rev().find(|(s, _)| *s >= 8.0 * sa.max(1e-300))?;
    Some((rb / ra).ln() / (sb / sa).ln())
}

/// Tracks one path in projective coordinates.
fn track_path(h: &Homotopy<'_>, start: &[Complex64], cfg: &TrackerConfig) -> PathEnd {
    let mut x = h.to_projective(start);
    let mut t = 0.0_f64;
    let mut step = cfg.initial_step;
    let mut successes = 0;
    let mut hist: Vec<(f64, f64)> = Vec::new();
    let end = |x: Vec<Complex64>, reached: bool, hist: &[(f64, f64)]| {
        let heading_to_infinity = decay_exponent(hist).is_some_and(|w| w > 0.1);
        PathEnd {
            x,
            reached,
            heading_to_infinity,
        }
    };
    for _ in 0..cfg.max_steps_per_path {
        if t >= 1.0 {
            return end(x, true, &hist);
        }
        let endgame = t >= cfg.endgame_start;
        let (cap, tol) = if endgame {
            (cfg.endgame_max_step, cfg.corrector_tol * 0.1)
        } else {
            (cfg.max_step, cfg.corrector_tol)
        };
        step = step.min(cap);
        let t1 = if t + step >= 1.0 - 1e-14 { 1.0 } else { t + step };
        let dt = t1 - t;
        // Euler predictor on the Davidenko equation
        let (_, j, ht) = h.eval(&x, t);
        let corrected = j.solve(&ht).ok().and_then(|v| {
            let pred: Vec<Complex64> = x.iter().zip(&v).map(|(&xi, &vi)| xi - vi * dt).collect();
            h.correct(&pred, t1, tol, cfg.max_corrector_iters)
        });
        match corrected {
            Some(xn) => {
                x = xn;
                t = t1;
                if t < 1.0 {
                    let rho = finiteness(&x);
                    hist.push((1.0 - t, rho));
                    // already far out and still decaying: no need to creep
                    // the rest of the way to t = 1
                    if rho < cfg.infinity_tol.sqrt() && decay_exponent(&hist).is_some_and(|w| w > 0.1) {
                        return end(x, false, &hist);
                    }
                }
                successes += 1;
                if successes >= 2 {
                    step *= 1.5;
                    successes = 0;
                }
            }
            None => {
                successes = 0;
                step *= 0.5;
                if step < cfg.min_step {
                    return end(x, false, &hist);
                }
            }
        }
    }
    let reached = t >= 1.0;
    end(x, reached, &hist)
}

fn finish(f: &DiffSystem, path_id: usize, pe: PathEnd, cfg: &TrackerConfig) -> CandidateRoot {
    let PathEnd {
        x: xp,
        reached,
        heading_to_infinity,
    } = pe;
    let n = xp.len() - 1;
    let rho = finiteness(&xp);
    let affine: Vec<Complex64> = xp[..n].iter().map(|&xi| xi / xp[n]).collect();
    // A path stalling on its way to a singular point at infinity is
    // recognized by the decay of |x_0|; finite singular endpoints keep it
    // roughly constant. A stalled path that is already far out counts as
    // diverged too.
    let far = rho < cfg.infinity_tol.sqrt();
    let at_infinity =
        rho < cfg.infinity_tol || (heading_to_infinity && far) || (!reached && (heading_to_infinity || far));
    if at_infinity || !affine.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return CandidateRoot {
            residual: f64::INFINITY,
            point: affine,
            converged: false,
            path_id,
            outcome: PathOutcome::Diverged,
        };
    }
    if !reached {
        let residual = norm_inf(&f.eval(&affine));
        return CandidateRoot {
            point: affine,
            residual: if residual.is_finite() { residual } else { f64::INFINITY },
            converged: false,
            path_id,
            outcome: PathOutcome::Failed,
        };
    }
    let (x, residual) = polish(f, &affine);
    let converged = residual <= cfg.residual_tol;
    CandidateRoot {
        point: x,
        residual,
        converged,
        path_id,
        outcome: if converged {
            PathOutcome::Converged
        } else {
            PathOutcome::Inaccurate
        },
    }
}

fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x.re - y.re).abs() <= tol && (x.im - y.im).abs() <= tol)
}

/// Indices (into `cands`) of converged roots that coincide with another
/// converged root, grouped.
fn collisions(cands: &[CandidateRoot], tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..cands.len()).filter(|&i| cands[i].converged).collect();
    order.sort_by(|&a, &b| cands[a].point[0].re.total_cmp(&cands[b].point[0].re));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut assigned = vec![false; cands.len()];
    for (k, &i) in order.iter().enumerate() {
        if assigned[i] {
            continue;
        }
        let mut g = vec![i];
        for &j in &order[k + 1..] {
            if cands[j].point[0].re - cands[i].point[0].re > tol {
                break;
            }
            if !assigned[j] && close(&cands[i].point, &cands[j].point, tol) {
                assigned[j] = true;
                g.push(j);
            }
        }
        if g.len() > 1 {
            g.sort_unstable();
            groups.push(g);
        }
    }
    groups
}

fn random_gamma_and_patch(seed: u64, m: usize) -> (Complex64, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
    let patch = (0..m).map(|_| rng.gen_range(0.5..1.5)).collect();
    (gamma, patch)
}

/// Tracks every path of the configured start system to `t = 1`.
///
/// Paths that fail, and converged paths landing on the same nonsingular
/// root (a sign of path jumping), are re-tracked with smaller steps up to
/// `cfg.retries` times before the final de-duplication.
///
/// If paths still fail after that, the whole homotopy is redone with fresh
/// random constants (up to `cfg.restarts` times) and the run with the fewest
/// failures wins. Mixing paths from different `γ` would be unsound.
pub fn track_all(f: &PolySystem, cfg: &TrackerConfig) -> Result<TrackResult, HomotopyError> {
    let mut best = track_once(f, cfg)?;
    let mut seed = cfg.rng_seed;
    for _ in 0..cfg.restarts {
        if best.stats.failed == 0 {
            break;
        }
        seed = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let r = track_once(f, &cfg.clone().with_seed(seed))?;
        if r.stats.failed < best.stats.failed {
            best = r;
        }
    }
    Ok(best)
}

fn track_once(f: &PolySystem, cfg: &TrackerConfig) -> Result<TrackResult, HomotopyError> {
    check_input(f)?;
    let count = match cfg.start {
        StartKind::TotalDegree => f.bezout_number(),
        StartKind::LinearProduct => linear_product_count(f),
    };
    if count > cfg.max_paths {
        return Err(HomotopyError::TooManyPaths {
            paths: count,
            limit: cfg.max_paths,
        });
    }
    let start = match cfg.start {
        StartKind::TotalDegree => start_system(f)?,
        StartKind::LinearProduct => linear_product_start(f, cfg.rng_seed)?,
    };
    let fd = DiffSystem::new(f.clone());
    // homogenize both systems to common per-equation degrees
    let degs: Vec<u32> = f
        .polys()
        .iter()
        .zip(start.system.polys())
        .map(|(fi, gi)| fi.total_degree().max(gi.total_degree()))
        .collect();
    let fh: Vec<MultiPoly> = f.polys().iter().zip(&degs).map(|(fi, &d)| fi.homogenize(d)).collect();
    let fhd = DiffSystem::new(PolySystem::new(fh).expect("uniform arity"));
    let ghd = match &start.factors {
        Some(rows) => StartEval::Product(
            rows.iter()
                .zip(&degs)
                .map(|(fs, &d)| (d - fs.len() as u32, fs.clone()))
                .collect(),
        ),
        None => {
            let gh = start
                .system
                .polys()
                .iter()
                .zip(&degs)
                .map(|(gi, &d)| gi.homogenize(d))
                .collect();
            StartEval::Poly(DiffSystem::new(PolySystem::new(gh).expect("uniform arity")))
        }
    };
    let (gamma, patch) = random_gamma_and_patch(cfg.rng_seed, f.nvars() + 1);
    let h = Homotopy {
        f: &fhd,
        g: &ghd,
        gamma,
        patch,
    };
    let mut cands: Vec<CandidateRoot> = start
        .roots
        .iter()
        .enumerate()
        .map(|(id, s)| finish(&fd, id, track_path(&h, s, cfg), cfg))
        .collect();

    let mut retracked = 0;
    for round in 1..=cfg.retries {
        let mut redo: Vec<usize> = cands
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c.outcome, PathOutcome::Failed | PathOutcome::Inaccurate))
            .map(|(i, _)| i)
            .collect();
        for g in collisions(&cands, cfg.dedup_tol.max(1e-6)) {
            let singular = fd
                .jacobian_at(&cands[g[0]].point)
                .lu()
                .map(|lu| lu.pivot_ratio() < 1e-10)
                .unwrap_or(true);
            if !singular {
                redo.extend(g);
            }
        }
        if redo.is_empty() {
            break;
        }
        redo.sort_unstable();
        redo.dedup();
        let tight = cfg.tightened(round);
        for i in redo {
            retracked += 1;
            let c = finish(&fd, i, track_path(&h, &start.roots[i], &tight), cfg);
            // keep whichever attempt is better
            let better = matches!(
                (c.outcome, cands[i].outcome),
                (PathOutcome::Converged, _) | (PathOutcome::Diverged | PathOutcome::Inaccurate, PathOutcome::Failed)
            );
            if better {
                cands[i] = c;
            }
        }
    }

    let mut stats = TrackStats {
        paths: cands.len(),
        retracked,
        ..TrackStats::default()
    };
    let mut dropped = vec![false; cands.len()];
    for g in collisions(&cands, cfg.dedup_tol) {
        for &i in &g[1..] {
            dropped[i] = true;
        }
    }
    let mut out = Vec::new();
    for (c, d) in cands.into_iter().zip(dropped) {
        if d {
            stats.deduplicated += 1;
            continue;
        }
        match c.outcome {
            PathOutcome::Converged => stats.converged += 1,
            PathOutcome::Inaccurate => stats.inaccurate += 1,
            PathOutcome::Failed => stats.failed += 1,
            PathOutcome::Diverged => stats.diverged += 1,
        }
        out.push(c);
    }
    Ok(TrackResult {
        candidates: out,
        stats,
        gamma: [gamma.re, gamma.im],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(n: usize, polys: &[&[(f64, &[u32])]]) -> PolySystem {
        PolySystem::new(
            polys
                .iter()
                .map(|ts| MultiPoly::from_terms(n, &ts.iter().map(|(c, e)| (*c, e.to_vec())).collect::<Vec<_>>()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn start_system_degrees() {
        let f = sys(
            2,
            &[
                &[(1.0, &[2, 0]), (1.0, &[0, 1]), (-2.0, &[0, 0])],
                &[(1.0, &[1, 0]), (2.0, &[0, 1]), (-3.0, &[0, 0])],
            ],
        );
        let s = start_system(&f).unwrap();
        assert_eq!(s.roots.len(), 2);
        assert_eq!(s.system.degrees(), vec![2, 1]);
        for r in &s.roots {
            let v = s.system.eval(r).unwrap();
            assert!(norm_inf(&v) < 1e-14);
        }
    }

    #[test]
    fn zero_polynomial_rejected() {
        let f = PolySystem::new(vec![MultiPoly::var(2, 0), MultiPoly::zero(2)]).unwrap();
        assert_eq!(
            start_system(&f).unwrap_err(),
            HomotopyError::ZeroPolynomial { index: 1 }
        );
    }

    #[test]
    fn linear_system_single_root() {
        let f = sys(
            2,
            &[&[(1.0, &[1, 0]), (-1.0, &[0, 0])], &[(1.0, &[0, 1]), (-2.0, &[0, 0])]],
        );
        let r = track_all(&f, &TrackerConfig::default()).unwrap();
        let roots: Vec<_> = r.converged().collect();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].residual <= 1e-12);
        assert!((roots[0].point[0].re - 1.0).abs() < 1e-12 && (roots[0].point[1].re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_pair_and_accounting() {
        // x^2 + y - 2, x + 2y - 3: roots (1,1) and (-1/2, 7/4)
        let f = sys(
            2,
            &[
                &[(1.0, &[2, 0]), (1.0, &[0, 1]), (-2.0, &[0, 0])],
                &[(1.0, &[1, 0]), (2.0, &[0, 1]), (-3.0, &[0, 0])],
            ],
        );
        let r = track_all(&f, &TrackerConfig::default()).unwrap();
        let s = &r.stats;
        assert_eq!(
            s.converged + s.inaccurate + s.failed + s.diverged + s.deduplicated,
            s.paths
        );
        let mut xs: Vec<f64> = r.converged().map(|c| c.point[0].re).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs.len(), 2);
        assert!((xs[0] + 0.5).abs() < 1e-10 && (xs[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn linear_product_matches_total_degree_roots() {
        // x*y - 1, x^2 - 4: degree matrix [[1,1],[2,0]] → permanent 2
        let f = sys(
            2,
            &[&[(1.0, &[1, 1]), (-1.0, &[0, 0])], &[(1.0, &[2, 0]), (-4.0, &[0, 0])]],
        );
        assert_eq!(linear_product_count(&f), 2);
        let s = linear_product_start(&f, 3).unwrap();
        assert_eq!(s.roots.len(), 2);
        for r in &s.roots {
            assert!(norm_inf(&s.system.eval(r).unwrap()) < 1e-12);
        }
        let cfg = TrackerConfig {
            start: StartKind::LinearProduct,
            ..TrackerConfig::default()
        };
        let r = track_all(&f, &cfg).unwrap();
        let mut xs: Vec<f64> = r.converged().map(|c| c.point[0].re).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs.len(), 2);
        assert!((xs[0] + 2.0).abs() < 1e-10 && (xs[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn grouped_linear_product() {
        // x*(y + z) - 1, x - y*z, y + z - 2: {y, z} appear jointly
        let f = sys(
            3,
            &[
                &[(1.0, &[1, 1, 0]), (1.0, &[1, 0, 1]), (-1.0, &[0, 0, 0])],
                &[(1.0, &[1, 0, 0]), (-1.0, &[0, 1, 1])],
                &[(1.0, &[0, 1, 0]), (1.0, &[0, 0, 1]), (-2.0, &[0, 0, 0])],
            ],
        );
        let part = linear_product_partition(&f);
        assert_eq!(part, vec![vec![0], vec![1, 2]]);
        let count = linear_product_count(&f);
        assert!(count < multihom_count(&f, &[vec![0], vec![1], vec![2]]));
        let s = linear_product_start(&f, 7).unwrap();
        assert_eq!(s.roots.len() as u128, count);
        for r in &s.roots {
            assert!(norm_inf(&s.system.eval(r).unwrap()) < 1e-12);
        }
        // factored evaluation agrees with the expanded start system
        let forms = s.factors.clone().unwrap();
        let prod = StartEval::Product(forms.into_iter().map(|fs| (1, fs)).collect());
        let gh: Vec<MultiPoly> = s
            .system
            .polys()
            .iter()
            .map(|g| g.homogenize(g.total_degree() + 1))
            .collect();
        let poly = StartEval::Poly(DiffSystem::new(PolySystem::new(gh).unwrap()));
        let x: Vec<Complex64> = (0..4)
            .map(|k| Complex64::new(0.3 * k as f64 - 0.4, 0.1 + 0.2 * k as f64))
            .collect();
        let (va, ja) = prod.eval_rect(&x);
        let (vb, jb) = poly.eval_rect(&x);
        for (a, b) in va.iter().chain(&ja).zip(vb.iter().chain(&jb)) {
            assert!((a - b).norm() < 1e-12);
        }
        let cfg = TrackerConfig {
            start: StartKind::LinearProduct,
            ..TrackerConfig::default()
        };
        let r = track_all(&f, &cfg).unwrap();
        // y + z = 2 gives x = 1/2 and y*z = 1/2: two real roots
        assert_eq!(r.converged().count(), 2);
        for c in r.converged() {
            assert!((c.point[0].re - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let f = sys(
            2,
            &[
                &[(1.0, &[3, 0]), (-1.0, &[0, 1]), (0.5, &[0, 0])],
                &[(1.0, &[0, 2]), (1.0, &[1, 0]), (-3.0, &[0, 0])],
            ],
        );
        let cfg = TrackerConfig::default().with_seed(42);
        assert_eq!(track_all(&f, &cfg).unwrap(), track_all(&f, &cfg).unwrap());
    }
}
