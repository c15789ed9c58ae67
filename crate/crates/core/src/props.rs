//! Structural checks on solved fields: total positivity of order two, shape
//! in `x`, the value envelopes, and a randomized suite exercising the
//! preservation lemmas those properties rest on.
//!
//! Every check reports a signed margin `worst`; negative values are
//! violations and the check holds when `worst >= -tol`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::ModelKind;
use crate::error::{Error, Result};
use crate::grid::{Scaling, ValueField};

/// Default tolerance for structural checks.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Absolute slack on the value envelopes.
pub const BOUNDS_SLACK: f64 = 1e-9;
/// Floor on the normalizer of a 2x2 minor.
pub const TINY: f64 = 1e-300;
/// Largest grid side used by the randomized suite.
pub const SUITE_MAX_SIDE: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub holds: bool,
    /// Smallest signed margin found; negative values are violations.
    pub worst: f64,
    /// Node where `worst` was found, lowest `(i, j)` first on ties.
    pub location: Option<(usize, usize)>,
    pub tol: f64,
}

pub type Tp2Report = CheckReport;

impl CheckReport {
    fn new(check: &str, worst: Option<(f64, (usize, usize))>, tol: f64) -> Self {
        let (worst, location) = match worst {
            Some((w, loc)) => (w, Some(loc)),
            None => (0.0, None),
        };
        Self {
            check: check.to_string(),
            holds: worst >= -tol,
            worst,
            location,
            tol,
        }
    }
}

/// Running minimum that keeps the first location reaching it.
#[derive(Default)]
struct Worst(Option<(f64, (usize, usize))>);

impl Worst {
    fn offer(&mut self, m: f64, loc: (usize, usize)) {
        let better = match self.0 {
            None => true,
            Some((w, l)) => m < w || (m == w && loc < l),
        };
        if better {
            self.0 = Some((m, loc));
        }
    }
}

#[inline]
fn normalized_minor(lo_lo: f64, lo_hi: f64, hi_lo: f64, hi_hi: f64) -> f64 {
    let p1 = hi_hi * lo_lo;
    let p2 = hi_lo * lo_hi;
    (p1 - p2) / p1.abs().max(p2.abs()).max(TINY)
}

/// Row-major matrix view restricted to a subset of rows and columns.
struct Sub<'a> {
    q: &'a [f64],
    nt: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl Sub<'_> {
    fn at(&self, a: usize, b: usize) -> f64 {
        self.q[self.rows[a] * self.nt + self.cols[b]]
    }

    fn origin(&self, a: usize, b: usize) -> (usize, usize) {
        (self.rows[a], self.cols[b])
    }
}

fn all_pairs(s: &Sub<'_>) -> Option<(f64, (usize, usize))> {
    let mut worst = Worst::default();
    for a in 0..s.rows.len() {
        for a2 in a + 1..s.rows.len() {
            for b in 0..s.cols.len() {
                for b2 in b + 1..s.cols.len() {
                    let m = normalized_minor(s.at(a, b), s.at(a, b2), s.at(a2, b), s.at(a2, b2));
                    worst.offer(m, s.origin(a, b));
                }
            }
        }
    }
    worst.0
}

fn adjacent(s: &Sub<'_>) -> Option<(f64, (usize, usize))> {
    let mut worst = Worst::default();
    for a in 0..s.rows.len().saturating_sub(1) {
        for b in 0..s.cols.len().saturating_sub(1) {
            let m = normalized_minor(s.at(a, b), s.at(a, b + 1), s.at(a + 1, b), s.at(a + 1, b + 1));
            worst.offer(m, s.origin(a, b));
        }
    }
    worst.0
}

fn nonzero_support(q: &[f64], nx: usize, nt: usize) -> Sub<'_> {
    let rows = (0..nx).filter(|&i| q[i * nt..(i + 1) * nt].iter().any(|&v| v != 0.0)).collect();
    let cols = (0..nt).filter(|&j| (0..nx).any(|i| q[i * nt + j] != 0.0)).collect();
    Sub { q, nt, rows, cols }
}

/// TP2 check of a nonnegative row-major `nx x nt` grid.
///
/// Rows and columns that vanish identically only contribute zero minors and
/// are dropped. On the remaining strictly positive block, nonnegative
/// adjacent minors imply nonnegative minors of every order-two pair, so only
/// adjacent ones are evaluated; if zeros remain inside the block every pair
/// is checked instead.
pub fn tp2_of_grid(q: &[f64], nx: usize, nt: usize, tol: f64) -> Tp2Report {
    assert_eq!(q.len(), nx * nt);
    let sub = nonzero_support(q, nx, nt);
    let interior_zero = sub
        .rows
        .iter()
        .any(|&i| sub.cols.iter().any(|&j| q[i * nt + j] == 0.0));
    let worst = if interior_zero { all_pairs(&sub) } else { adjacent(&sub) };
    CheckReport::new("tp2", worst, tol)
}

/// Brute-force TP2 check over every pair of rows and columns.
pub fn tp2_all_pairs_of_grid(q: &[f64], nx: usize, nt: usize, tol: f64) -> Tp2Report {
    assert_eq!(q.len(), nx * nt);
    let sub = Sub {
        q,
        nt,
        rows: (0..nx).collect(),
        cols: (0..nt).collect(),
    };
    CheckReport::new("tp2_all_pairs", all_pairs(&sub), tol)
}

pub fn check_tp2(field: &ValueField, tol: f64) -> Tp2Report {
    let s = field.spec();
    tp2_of_grid(field.values(), s.nx(), s.nt(), tol)
}

pub fn check_tp2_all_pairs(field: &ValueField, tol: f64) -> Tp2Report {
    let s = field.spec();
    tp2_all_pairs_of_grid(field.values(), s.nx(), s.nt(), tol)
}

/// Smallest `-(second difference) / scale` along `col`, with its index.
fn concavity_margin(col: &[f64], scale: f64) -> Option<(f64, usize)> {
    let scale = scale.max(TINY);
    let mut worst: Option<(f64, usize)> = None;
    for i in 1..col.len().saturating_sub(1) {
        // adding 0.0 folds -0.0 into 0.0
        let m = -(col[i + 1] - 2.0 * col[i] + col[i - 1]) / scale + 0.0;
        if worst.is_none_or(|(w, _)| m < w) {
            worst = Some((m, i));
        }
    }
    worst
}

/// Concavity margin of a sequence, with scale taken from its largest magnitude.
pub fn concavity_of_slice(col: &[f64], tol: f64) -> CheckReport {
    let scale = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = concavity_margin(col, scale).map(|(m, i)| (m, (i, 0)));
    CheckReport::new("concave", worst, tol)
}

/// Brute-force concavity check: every point lies above every chord through
/// points on either side of it.
pub fn concavity_all_triples(col: &[f64], tol: f64) -> CheckReport {
    let scale = col.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(TINY);
    let mut worst = Worst::default();
    let n = col.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let chord = ((k - j) as f64 * col[i] + (j - i) as f64 * col[k]) / (k - i) as f64;
                // chord gaps are rescaled to second-difference units
                let w = ((j - i) * (k - j)) as f64 / (k - i) as f64;
                worst.offer((col[j] - chord) / (w * scale), (j, 0));
            }
        }
    }
    CheckReport::new("concave_all_triples", worst.0, tol)
}

/// Log-concavity in `x` of every `t`-column, assessed on the positive
/// support. A zero strictly inside the support is a violation of unbounded
/// size.
pub fn check_logconcave_in_x(field: &ValueField, tol: f64) -> CheckReport {
    let s = field.spec();
    let mut worst = Worst::default();
    for j in 0..s.nt() {
        let col = field.column(j);
        let first = col.iter().position(|&v| v > 0.0);
        let last = col.iter().rposition(|&v| v > 0.0);
        let (Some(lo), Some(hi)) = (first, last) else {
            continue;
        };
        if let Some(z) = (lo..=hi).find(|&i| col[i] == 0.0) {
            worst.offer(f64::NEG_INFINITY, (z, j));
            continue;
        }
        let logs: Vec<f64> = col[lo..=hi].iter().map(|v| v.ln()).collect();
        let scale = logs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if let Some((m, i)) = concavity_margin(&logs, scale) {
            worst.offer(m, (lo + i, j));
        }
    }
    CheckReport::new("logconcave_in_x", worst.0, tol)
}

/// Concavity in `x` of every `t`-column, relative to the column's largest value.
pub fn check_concave_in_x(field: &ValueField, tol: f64) -> CheckReport {
    let s = field.spec();
    let mut worst = Worst::default();
    for j in 0..s.nt() {
        let col = field.column(j);
        let scale = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some((m, i)) = concavity_margin(&col, scale) {
            worst.offer(m, (i, j));
        }
    }
    CheckReport::new("concave_in_x", worst.0, tol)
}

/// Envelope of a raw value field: `e^{-t} <= P <= 1` for the Bomber and
/// `0 <= N <= t` for the Fighters.
pub fn check_bounds(field: &ValueField, kind: ModelKind) -> Result<CheckReport> {
    if field.scaling() != Scaling::Raw {
        return Err(Error::Scaling {
            expected: Scaling::Raw,
            found: field.scaling(),
        });
    }
    let s = field.spec();
    let mut worst = Worst::default();
    for i in 0..s.nx() {
        for j in 0..s.nt() {
            let v = field.get(i, j);
            let t = s.t(j);
            let m = if kind.is_bomber() {
                (v - (-t).exp()).min(1.0 - v)
            } else {
                v.min(t - v)
            };
            worst.offer(m, (i, j));
        }
    }
    Ok(CheckReport::new("bounds", worst.0, BOUNDS_SLACK))
}

/// Preservation lemmas exercised by [`property_suite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    /// The pointwise product of TP2 grids is TP2.
    ProductClosure,
    /// A nonnegative, coordinate-increasing TP2 grid stays TP2 after adding 1.
    PlusOne,
    /// Sup-convolving a TP2 grid with a log-concave vector keeps it TP2.
    SupConvolutionTp2,
    /// The additive sup-convolution of concave vectors is concave.
    AdditiveSupConvolution,
}

impl Lemma {
    pub const ALL: [Lemma; 4] = [
        Lemma::ProductClosure,
        Lemma::PlusOne,
        Lemma::SupConvolutionTp2,
        Lemma::AdditiveSupConvolution,
    ];

    fn stream(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Lemma::ProductClosure => "product_closure",
            Lemma::PlusOne => "plus_one",
            Lemma::SupConvolutionTp2 => "sup_convolution_tp2",
            Lemma::AdditiveSupConvolution => "additive_sup_convolution",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialOutcome {
    pub lemma: Lemma,
    pub seed: u64,
    pub trial: u64,
    pub holds: bool,
    /// Verdict of the brute-force oracle matches the fast check.
    pub oracle_agrees: bool,
    pub worst: f64,
    /// Row-major instance that was checked, with its shape.
    pub shape: (usize, usize),
    pub instance: Vec<f64>,
}

impl TrialOutcome {
    pub fn passed(&self) -> bool {
        self.holds && self.oracle_agrees
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaSummary {
    pub lemma: Lemma,
    pub trials: u64,
    pub failures: u64,
    pub oracle_disagreements: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: u64,
    pub passed: bool,
    pub lemmas: Vec<LemmaSummary>,
    /// Every trial that failed, reproducible with [`run_trial`].
    pub failures: Vec<TrialOutcome>,
}

/// Nonnegative nondecreasing vector: random start then random increments.
fn increasing_vec(rng: &mut ChaCha8Rng, n: usize, step: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(n);
    let mut acc = rng.gen_range(0.0..1.0);
    for _ in 0..n {
        v.push(acc);
        acc += rng.gen_range(0.0..step);
    }
    v
}

/// Vector with nonincreasing increments, starting anywhere in `[lo, hi)`.
fn concave_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(n);
    let mut acc = rng.gen_range(lo..hi);
    let mut slope = rng.gen_range(-0.5..1.0);
    for _ in 0..n {
        v.push(acc);
        acc += slope;
        slope -= rng.gen_range(0.0..0.5);
    }
    v
}

/// `exp` of a random supermodular grid: modular part plus a few products of
/// nondecreasing factors. With `increasing`, the grid is also nondecreasing
/// in both coordinates.
fn random_tp2(rng: &mut ChaCha8Rng, nx: usize, nt: usize, increasing: bool) -> Vec<f64> {
    let (rows, cols) = if increasing {
        (increasing_vec(rng, nx, 0.3), increasing_vec(rng, nt, 0.3))
    } else {
        (
            (0..nx).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            (0..nt).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
    };
    let mut s: Vec<f64> = (0..nx * nt).map(|c| rows[c / nt] + cols[c % nt]).collect();
    for _ in 0..rng.gen_range(1..=3) {
        let f = increasing_vec(rng, nx, 0.3);
        let g = increasing_vec(rng, nt, 0.3);
        for (c, v) in s.iter_mut().enumerate() {
            *v += f[c / nt] * g[c % nt];
        }
    }
    s.into_iter().map(f64::exp).collect()
}

fn side(rng: &mut ChaCha8Rng, min: usize) -> usize {
    rng.gen_range(min..=SUITE_MAX_SIDE)
}

/// Grid sup-convolution `R[i][j] = max_{k <= i} a[k] * Q[i-k][j]`.
pub fn sup_convolve(a: &[f64], q: &[f64], nx: usize, nt: usize) -> Vec<f64> {
    let mut r = vec![0.0; nx * nt];
    for i in 0..nx {
        for j in 0..nt {
            r[i * nt + j] = (0..=i).map(|k| a[k] * q[(i - k) * nt + j]).fold(0.0, f64::max);
        }
    }
    r
}

/// Additive sup-convolution `h[i] = max_{k <= i} f[k] + g[i-k]`.
pub fn additive_sup_convolve(f: &[f64], g: &[f64]) -> Vec<f64> {
    (0..f.len().min(g.len()))
        .map(|i| (0..=i).map(|k| f[k] + g[i - k]).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

fn tp2_outcome(lemma: Lemma, seed: u64, trial: u64, q: Vec<f64>, nx: usize, nt: usize) -> TrialOutcome {
    let fast = tp2_of_grid(&q, nx, nt, DEFAULT_TOL);
    let oracle = tp2_all_pairs_of_grid(&q, nx, nt, DEFAULT_TOL);
    TrialOutcome {
        lemma,
        seed,
        trial,
        holds: fast.holds,
        oracle_agrees: fast.holds == oracle.holds,
        worst: fast.worst,
        shape: (nx, nt),
        instance: q,
    }
}

/// Runs one randomized trial. `(lemma, seed, trial)` fully determines the
/// instance.
pub fn run_trial(lemma: Lemma, seed: u64, trial: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((lemma.stream() << 32) | (trial & 0xffff_ffff));
    match lemma {
        Lemma::ProductClosure => {
            let (nx, nt) = (side(&mut rng, 2), side(&mut rng, 2));
            let j = random_tp2(&mut rng, nx, nt, false);
            let l = random_tp2(&mut rng, nx, nt, false);
            let q = j.iter().zip(&l).map(|(a, b)| a * b).collect();
            tp2_outcome(lemma, seed, trial, q, nx, nt)
        }
        Lemma::PlusOne => {
            let (nx, nt) = (side(&mut rng, 2), side(&mut rng, 2));
            let q = random_tp2(&mut rng, nx, nt, true).into_iter().map(|v| v + 1.0).collect();
            tp2_outcome(lemma, seed, trial, q, nx, nt)
        }
        Lemma::SupConvolutionTp2 => {
            let (nx, nt) = (side(&mut rng, 2), side(&mut rng, 2));
            let q = random_tp2(&mut rng, nx, nt, false);
            let mut a: Vec<f64> = concave_vec(&mut rng, nx, -2.0, 0.0).into_iter().map(f64::exp).collect();
            if rng.gen_bool(0.25) {
                a[0] = 0.0;
            }
            let r = sup_convolve(&a, &q, nx, nt);
            tp2_outcome(lemma, seed, trial, r, nx, nt)
        }
        Lemma::AdditiveSupConvolution => {
            let n = side(&mut rng, 3);
            let f = concave_vec(&mut rng, n, -1.0, 1.0);
            let g = concave_vec(&mut rng, n, -1.0, 1.0);
            let h = additive_sup_convolve(&f, &g);
            let fast = concavity_of_slice(&h, DEFAULT_TOL);
            let oracle = concavity_all_triples(&h, DEFAULT_TOL);
            TrialOutcome {
                lemma,
                seed,
                trial,
                holds: fast.holds,
                oracle_agrees: fast.holds == oracle.holds,
                worst: fast.worst,
                shape: (n, 1),
                instance: h,
            }
        }
    }
}

/// Runs `trials` randomized trials of every lemma.
pub fn property_suite(seed: u64, trials: u64) -> Result<SuiteReport> {
    if trials == 0 {
        return Err(Error::Config("property suite needs at least one trial".into()));
    }
    let mut lemmas = Vec::new();
    let mut failures = Vec::new();
    for lemma in Lemma::ALL {
        let mut summary = LemmaSummary {
            lemma,
            trials,
            failures: 0,
            oracle_disagreements: 0,
        };
        for trial in 0..trials {
            let out = run_trial(lemma, seed, trial);
            if !out.oracle_agrees {
                summary.oracle_disagreements += 1;
            }
            if !out.passed() {
                summary.failures += 1;
                failures.push(out);
            }
        }
        lemmas.push(summary);
    }
    Ok(SuiteReport {
        seed,
        trials,
        passed: failures.is_empty(),
        lemmas,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{solve, SolveOpts};
    use crate::grid::{sample_ammo, GridSpec};
    use crate::model::AmmoFunction;
    use proptest::prelude::*;
    use rand::Rng;

    fn unit(nx: usize, nt: usize) -> GridSpec {
        GridSpec::new(1.0, 1.0, nx, nt).unwrap()
    }

    fn exp_xt(nx: usize, nt: usize) -> ValueField {
        let s = unit(nx, nt);
        ValueField::from_fn(s, Scaling::Raw, |i, j| (s.x(i) * s.t(j)).exp()).unwrap()
    }

    #[test]
    fn exp_xt_is_strictly_tp2() {
        let r = check_tp2(&exp_xt(6, 5), DEFAULT_TOL);
        assert!(r.holds);
        assert!(r.worst > 0.0);
        assert_eq!(r.location.map(|l| l.0), Some(0));
    }

    #[test]
    fn rank_one_minors_vanish() {
        let s = unit(5, 4);
        let q = ValueField::from_fn(s, Scaling::Raw, |i, j| (1.0 + i as f64) * (2.0 + (j * j) as f64)).unwrap();
        let r = check_tp2(&q, DEFAULT_TOL);
        assert!(r.holds);
        assert!(r.worst.abs() < 1e-15);
    }

    #[test]
    fn perturbed_entry_is_located() {
        let base = exp_xt(5, 5);
        let mut v = base.values().to_vec();
        v[2 * 5 + 2] *= 0.9;
        let q = ValueField::new(*base.spec(), Scaling::Raw, v.clone()).unwrap();
        let r = check_tp2(&q, DEFAULT_TOL);
        assert!(!r.holds);
        // of the four minors touching (2,2), those at (1,1) and (2,2) lose
        let minor = |i: usize, j: usize| {
            normalized_minor(v[i * 5 + j], v[i * 5 + j + 1], v[(i + 1) * 5 + j], v[(i + 1) * 5 + j + 1])
        };
        let (a, b) = (minor(1, 1), minor(2, 2));
        assert!(a < 0.0 && b < 0.0);
        assert!(minor(1, 2) > 0.0 && minor(2, 1) > 0.0);
        let expect = if a <= b { (1, 1) } else { (2, 2) };
        assert_eq!(r.location, Some(expect));
        assert_eq!(r.worst, a.min(b));
    }

    #[test]
    fn zero_field_holds_with_equality() {
        let q = ValueField::constant(unit(4, 4), Scaling::Raw, 0.0).unwrap();
        let r = check_tp2(&q, DEFAULT_TOL);
        assert!(r.holds);
        assert_eq!(r.worst, 0.0);
        let one = ValueField::constant(unit(4, 4), Scaling::Raw, 1.0).unwrap();
        assert!(check_tp2(&one, 0.0).holds);
    }

    #[test]
    fn interior_zeros_fall_back_to_all_pairs() {
        // every adjacent minor is nonnegative, but rows 0 and 2 over
        // columns 0 and 1 give 0*1 - 1*1 < 0
        let q = vec![1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let sub = nonzero_support(&q, 3, 3);
        assert!(adjacent(&sub).unwrap().0 >= 0.0);
        let fast = tp2_of_grid(&q, 3, 3, DEFAULT_TOL);
        let slow = tp2_all_pairs_of_grid(&q, 3, 3, DEFAULT_TOL);
        assert_eq!(fast.holds, slow.holds);
        assert!(!fast.holds);
    }

    #[test]
    fn plus_one_on_exp_xt() {
        let q = exp_xt(7, 7);
        let p = ValueField::from_fn(*q.spec(), Scaling::Raw, |i, j| q.get(i, j) + 1.0).unwrap();
        let fast = check_tp2(&p, DEFAULT_TOL);
        assert!(fast.holds);
        assert!(check_tp2_all_pairs(&p, DEFAULT_TOL).holds);
    }

    #[test]
    fn logconcave_second_iterate() {
        let s = GridSpec::new(10.0, 10.0, 101, 11).unwrap();
        let a = sample_ammo(&AmmoFunction::canonical_bomber(0.0).unwrap(), &s);
        let p2 = ValueField::from_fn(s, Scaling::ExpRescaled, |i, j| s.t(j) * a[i] + 1.0).unwrap();
        let r = check_logconcave_in_x(&p2, DEFAULT_TOL);
        assert!(r.holds, "{r:?}");
        let c = ValueField::constant(s, Scaling::Raw, 3.0).unwrap();
        assert_eq!(check_logconcave_in_x(&c, 0.0).worst, 0.0);
        let sq = ValueField::from_fn(unit(11, 2), Scaling::Raw, |i, _| ((i * i) as f64 / 10.0).exp()).unwrap();
        assert!(!check_logconcave_in_x(&sq, DEFAULT_TOL).holds);
    }

    #[test]
    fn logconcave_rejects_gap_in_support() {
        let q = ValueField::new(unit(4, 2), Scaling::Raw, vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 2.0, 1.0]).unwrap();
        let r = check_logconcave_in_x(&q, DEFAULT_TOL);
        assert!(!r.holds);
        assert_eq!(r.location, Some((2, 0)));
    }

    #[test]
    fn concave_columns() {
        let s = unit(9, 3);
        let root = ValueField::from_fn(s, Scaling::Raw, |i, j| (i as f64).sqrt() * (1 + j) as f64).unwrap();
        assert!(check_concave_in_x(&root, DEFAULT_TOL).holds);
        let lin = ValueField::from_fn(s, Scaling::Raw, |i, _| 2.0 * i as f64 + 1.0).unwrap();
        let r = check_concave_in_x(&lin, 0.0);
        assert!(r.holds && r.worst == 0.0);
        let convex = ValueField::from_fn(s, Scaling::Raw, |i, _| (i * i) as f64).unwrap();
        assert!(!check_concave_in_x(&convex, DEFAULT_TOL).holds);
    }

    #[test]
    fn invincible_value_is_concave() {
        let s = GridSpec::new(4.0, 4.0, 41, 41).unwrap();
        let f = AmmoFunction::canonical_fighter();
        let (q, _) = solve(ModelKind::F1, &f, &s, &SolveOpts::default()).unwrap();
        let r = check_concave_in_x(&q.rescale(Scaling::Raw), DEFAULT_TOL);
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn bounds_on_solutions_and_counterexample() {
        let s = GridSpec::new(4.0, 4.0, 41, 41).unwrap();
        let f = AmmoFunction::canonical_bomber(0.3).unwrap();
        let (p, _) = solve(ModelKind::Bo, &f, &s, &SolveOpts::default()).unwrap();
        assert!(check_bounds(&p.rescale(Scaling::Raw), ModelKind::Bo).unwrap().holds);
        assert!(check_bounds(&p, ModelKind::Bo).is_err());

        let g = AmmoFunction::canonical_fighter();
        let (n, _) = solve(ModelKind::F0, &g, &s, &SolveOpts::default()).unwrap();
        let raw = n.rescale(Scaling::Raw);
        assert!(check_bounds(&raw, ModelKind::F0).unwrap().holds);
        assert!(raw.column(0).iter().all(|&v| v == 0.0));

        let bad = ValueField::from_fn(s, Scaling::Raw, |i, j| if (i, j) == (7, 9) { s.t(j) + 0.1 } else { 0.0 }).unwrap();
        let r = check_bounds(&bad, ModelKind::F1).unwrap();
        assert!(!r.holds);
        assert_eq!(r.location, Some((7, 9)));
        assert!((r.worst + 0.1).abs() < 1e-12);
    }

    #[test]
    fn shifted_ammo_kernel_bridge() {
        // a is log-concave iff a(x_i - x_k), zero for negative arguments, is TP2
        let s = GridSpec::new(5.0, 5.0, 21, 21).unwrap();
        let kernel = |a: &[f64]| {
            let n = a.len();
            let mut q = vec![0.0; n * n];
            for i in 0..n {
                for k in 0..=i {
                    q[i * n + k] = a[i - k];
                }
            }
            tp2_of_grid(&q, n, n, DEFAULT_TOL)
        };
        for f in [
            AmmoFunction::canonical_bomber(0.0).unwrap(),
            AmmoFunction::canonical_bomber(0.6).unwrap(),
            AmmoFunction::canonical_fighter(),
            AmmoFunction::piecewise_linear(vec![(0.0, 0.2), (1.0, 0.7), (3.0, 0.9)]).unwrap(),
        ] {
            assert!(kernel(&sample_ammo(&f, &s)).holds, "{f:?}");
        }
        let convex: Vec<f64> = (0..21).map(|i| ((i * i) as f64 / 40.0).exp()).collect();
        assert!(!kernel(&convex).holds);
    }

    #[test]
    fn additive_convolution_of_fighter_samples() {
        let s = GridSpec::new(5.0, 1.0, 31, 2).unwrap();
        let a = sample_ammo(&AmmoFunction::canonical_fighter(), &s);
        let h = additive_sup_convolve(&a, &a);
        assert!(concavity_of_slice(&h, DEFAULT_TOL).holds);
        assert!(concavity_all_triples(&h, DEFAULT_TOL).holds);
        let bumpy = [0.0, 1.0, 0.5, 2.0];
        assert!(!concavity_of_slice(&bumpy, DEFAULT_TOL).holds);
        assert!(!concavity_all_triples(&bumpy, DEFAULT_TOL).holds);
    }

    #[test]
    fn suite_passes_and_is_reproducible() {
        let r = property_suite(7, 25).unwrap();
        assert!(r.passed, "{:?}", r.failures.first());
        let again = run_trial(Lemma::SupConvolutionTp2, 7, 3);
        let once = run_trial(Lemma::SupConvolutionTp2, 7, 3);
        assert_eq!(again.instance, once.instance);
        assert!(property_suite(7, 0).is_err());
    }

    #[test]
    fn suite_json_shape() {
        let r = property_suite(1, 2).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["lemmas"].as_array().unwrap().len(), 4);
        assert_eq!(v["lemmas"][2]["lemma"], "sup_convolution_tp2");
        let c = serde_json::to_value(check_tp2(&exp_xt(3, 3), DEFAULT_TOL)).unwrap();
        for key in ["check", "holds", "worst", "location", "tol"] {
            assert!(c.get(key).is_some(), "{key}");
        }
    }

    proptest! {
        #[test]
        fn adjacent_check_matches_all_pairs(
            nx in 2usize..=8,
            nt in 2usize..=8,
            seed in any::<u64>(),
            tp2 in any::<bool>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q: Vec<f64> = if tp2 {
                random_tp2(&mut rng, nx, nt, false)
            } else {
                (0..nx * nt).map(|_| rng.gen_range(0.01..2.0)).collect()
            };
            let fast = tp2_of_grid(&q, nx, nt, DEFAULT_TOL);
            let slow = tp2_all_pairs_of_grid(&q, nx, nt, DEFAULT_TOL);
            prop_assert_eq!(fast.holds, slow.holds);
        }

        #[test]
        fn tp2_is_scale_invariant(nx in 2usize..=8, nt in 2usize..=8, seed in any::<u64>(), c in 1e-3f64..1e3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q: Vec<f64> = (0..nx * nt).map(|_| rng.gen_range(0.01..2.0)).collect();
            let scaled: Vec<f64> = q.iter().map(|v| v * c).collect();
            let (a, b) = (tp2_of_grid(&q, nx, nt, 0.0), tp2_of_grid(&scaled, nx, nt, 0.0));
            prop_assert!((a.worst - b.worst).abs() < 1e-12);
            prop_assert_eq!(a.location, b.location);
        }
    }
}
