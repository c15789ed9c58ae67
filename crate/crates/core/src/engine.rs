//! Sup-convolution operators and the fixed-point iteration that solves the
//! exp-rescaled value equations.
//!
//! Every operator works on [`Scaling::ExpRescaled`] fields. For a field `Q`
//! the operator `G` is
//!
//! ```text
//! G(Q)(x_i, t_j) = base + trap_{s in [0, t_j]} (a (x) Q)(x_i, s)
//! ```
//!
//! where `base` is 1 for the Bomber and 0 for the Fighter variants, `trap` is
//! the cumulative composite trapezoid rule over t-nodes, and `(a (x) Q)` is the
//! grid sup over spends `y = x_k <= x_i` of the kind-specific candidate. The
//! sup only visits x-nodes, so `x_i - y` is always a node itself.
//!
//! [`solve`] iterates `G` from zero, from a grid-exact ceiling, or from both at
//! once. In the last case the two monotone sequences bracket the discrete fixed
//! point, and their final distance is reported as the sandwich gap. The gap
//! certifies iteration error only; it says nothing about the distance between
//! the grid solution and the continuum solution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sample_ammo, GridSpec, Scaling, ValueField};
use crate::model::AmmoFunction;

/// Relative slack for deciding that two candidate spends tie.
pub const TIE_SLACK: f64 = 1e-12;
/// Relative slack allowed before `lower <= upper` counts as violated.
pub const ORDER_SLACK: f64 = 1e-12;
/// Ratios of the first few deltas are ignored by the rate estimate.
pub const RATE_BURN_IN: usize = 3;

/// Which recursion governs the value surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// Bomber: maximise survival probability.
    Bo,
    /// Frail Fighter: a miss is fatal.
    F0,
    /// Invincible Fighter: a miss costs nothing.
    F1,
    /// General Fighter: a miss is survived with probability `u`.
    Fu { u: f64 },
}

impl ModelKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelKind::Fu { u } if !(0.0..=1.0).contains(&u) => {
                Err(Error::Domain(format!("fighter survival parameter u must lie in [0, 1], got {u}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_bomber(&self) -> bool {
        matches!(self, ModelKind::Bo)
    }

    /// The constant term of `G`: 1 for the Bomber, 0 otherwise.
    pub fn base(&self) -> f64 {
        if self.is_bomber() {
            1.0
        } else {
            0.0
        }
    }

    /// Miss-survival probability for the Fighter variants.
    pub fn fighter_u(&self) -> Option<f64> {
        match *self {
            ModelKind::Bo => None,
            ModelKind::F0 => Some(0.0),
            ModelKind::F1 => Some(1.0),
            ModelKind::Fu { u } => Some(u),
        }
    }

    /// Candidate value of spending `x_k` in the rescaled frame, with
    /// `ak = a(x_k)`, `et = e^{t}` and `q = Q(x_i - x_k, t)`.
    #[inline]
    pub fn candidate(&self, ak: f64, et: f64, q: f64) -> f64 {
        match *self {
            ModelKind::Bo => ak * q,
            ModelKind::F0 => ak * (et + q),
            ModelKind::F1 => ak * et + q,
            ModelKind::Fu { u } => ak * et + (ak + u * (1.0 - ak)) * q,
        }
    }
}

/// How the fixed-point iteration is started.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Zero,
    Bound,
    Sandwich,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOpts {
    /// Stop once the sup-norm change between iterates drops below this.
    pub tol: f64,
    pub max_iter: usize,
    pub init: Init,
}

impl Default for SolveOpts {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            init: Init::Sandwich,
        }
    }
}

impl SolveOpts {
    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Iteration trace of a [`solve`] run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Sup-norm change per iteration (the larger of the two sequences for a
    /// sandwich run).
    pub deltas: Vec<f64>,
    /// Median ratio of consecutive deltas after the burn-in.
    pub empirical_rate: f64,
    /// Final `||upper - lower||_inf`, for sandwich runs.
    pub sandwich_gap: Option<f64>,
    /// Smallest `min(upper - lower)` seen over all iterations, for sandwich runs.
    pub min_order_margin: Option<f64>,
    pub converged: bool,
}

/// One column of the sup-convolution together with the minimal maximisers.
#[derive(Clone, Debug, PartialEq)]
pub struct OtimesColumn {
    pub values: Vec<f64>,
    pub argmax: Vec<usize>,
}

fn check_inputs(kind: &ModelKind, a: &[f64], q: &ValueField) -> Result<()> {
    kind.validate()?;
    if a.len() != q.spec().nx() {
        return Err(Error::Dimension {
            expected: q.spec().nx(),
            got: a.len(),
        });
    }
    if q.scaling() != Scaling::ExpRescaled {
        return Err(Error::Scaling {
            expected: Scaling::ExpRescaled,
            found: q.scaling(),
        });
    }
    Ok(())
}

/// Smallest index whose candidate lies within the tie slack of the maximum.
pub(crate) fn minimal_argmax(cands: &[f64]) -> (f64, usize) {
    let max = cands.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = max - TIE_SLACK * (1.0 + max.abs());
    let k = cands.iter().position(|&c| c >= floor).unwrap_or(0);
    (max, k)
}

/// `(a (x) Q)(x_i, t_j)` for every x-node, with the minimal maximising spend
/// index per node.
pub fn apply_otimes(kind: ModelKind, a: &[f64], q: &ValueField, j: usize) -> Result<OtimesColumn> {
    check_inputs(&kind, a, q)?;
    let spec = q.spec();
    if j >= spec.nt() {
        return Err(Error::Domain(format!("t-node {j} outside grid with {} nodes", spec.nt())));
    }
    let et = spec.t(j).exp();
    let col = q.column(j);
    let mut cands = Vec::with_capacity(spec.nx());
    let (values, argmax) = (0..spec.nx())
        .map(|i| {
            cands.clear();
            cands.extend((0..=i).map(|k| kind.candidate(a[k], et, col[i - k])));
            minimal_argmax(&cands)
        })
        .unzip();
    Ok(OtimesColumn { values, argmax })
}

/// One application of `G`. Rows are independent and computed in parallel;
/// the per-node sup scans spends in ascending order, so results do not depend
/// on scheduling.
pub fn apply_g(kind: ModelKind, a: &[f64], q: &ValueField) -> Result<ValueField> {
    check_inputs(&kind, a, q)?;
    Ok(apply_g_unchecked(kind, a, q, &q.spec().exp_t()))
}

fn apply_g_unchecked(kind: ModelKind, a: &[f64], q: &ValueField, exp_t: &[f64]) -> ValueField {
    let spec = *q.spec();
    let nt = spec.nt();
    let half_dt = 0.5 * spec.dt();
    let base = kind.base();
    let mut out = vec![0.0; spec.len()];
    out.par_chunks_mut(nt).enumerate().for_each(|(i, row)| {
        row.fill(f64::NEG_INFINITY);
        for (k, &ak) in a.iter().enumerate().take(i + 1) {
            let src = q.row(i - k);
            for ((best, &qv), &et) in row.iter_mut().zip(src).zip(exp_t) {
                *best = best.max(kind.candidate(ak, et, qv));
            }
        }
        let mut prev = row[0];
        let mut acc = 0.0;
        row[0] = base;
        for v in row.iter_mut().skip(1) {
            let cur = *v;
            acc += half_dt * (prev + cur);
            prev = cur;
            *v = base + acc;
        }
    });
    ValueField::from_vec_unchecked(spec, Scaling::ExpRescaled, out)
}

/// Lazily applies `G` repeatedly, starting from `q0`.
pub struct Iterates<'a> {
    kind: ModelKind,
    a: &'a [f64],
    exp_t: Vec<f64>,
    current: ValueField,
}

impl Iterator for Iterates<'_> {
    type Item = ValueField;

    fn next(&mut self) -> Option<ValueField> {
        let next = apply_g_unchecked(self.kind, self.a, &self.current, &self.exp_t);
        self.current = next.clone();
        Some(next)
    }
}

/// Iterates `G` from `q0`; the first item is `G(q0)`.
pub fn iterates(kind: ModelKind, a: &[f64], q0: ValueField) -> Result<Iterates<'_>> {
    check_inputs(&kind, a, &q0)?;
    Ok(Iterates {
        kind,
        a,
        exp_t: q0.spec().exp_t(),
        current: q0,
    })
}

/// Continuum ceiling `B(t)` with `Q <= B => G(Q) <= B`.
///
/// Bomber: `e^{kappa t}`. Fighter with `alpha = (1-u) kappa + u`:
/// `kappa t e^t` when `alpha = 1`, otherwise
/// `kappa / (1 - alpha) (e^t - e^{alpha t})`.
pub fn b_bound(kind: ModelKind, kappa: f64, t: f64) -> f64 {
    match kind.fighter_u() {
        None => (kappa * t).exp(),
        Some(u) => {
            let alpha = (1.0 - u) * kappa + u;
            let gap = 1.0 - alpha;
            if gap == 0.0 {
                kappa * t * t.exp()
            } else {
                // e^t - e^{alpha t} = -e^t expm1(-(1-alpha) t)
                kappa * t.exp() * (-(-gap * t).exp_m1()) / gap
            }
        }
    }
}

/// Grid analogue of [`b_bound`]: the x-independent profile `c(t_j)` that the
/// trapezoid operator maps to itself when every `a` equals `kappa`. It
/// dominates every `G`-image of a field below it, so iterating from it gives
/// a monotone upper sequence for the discrete fixed point. It exceeds the
/// continuum bound by `O(dt^2)`.
pub fn grid_ceiling(kind: ModelKind, kappa: f64, spec: &GridSpec) -> Result<Vec<f64>> {
    kind.validate()?;
    let h = spec.dt();
    let exp_t = spec.exp_t();
    let (alpha, forcing) = match kind.fighter_u() {
        None => (kappa, 0.0),
        Some(u) => ((1.0 - u) * kappa + u, kappa),
    };
    let denom = 1.0 - 0.5 * h * alpha;
    if denom <= 0.0 {
        return Err(Error::InvalidGrid(format!(
            "time step {h} too coarse for a ceiling with growth rate {alpha}"
        )));
    }
    let base = kind.base();
    let mut c = vec![base; spec.nt()];
    let mut acc = 0.0;
    let mut prev_integrand = forcing * exp_t[0] + alpha * c[0];
    for j in 1..spec.nt() {
        c[j] = (base + acc + 0.5 * h * (prev_integrand + forcing * exp_t[j])) / denom;
        let integrand = forcing * exp_t[j] + alpha * c[j];
        acc += 0.5 * h * (prev_integrand + integrand);
        prev_integrand = integrand;
    }
    Ok(c)
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn empirical_rate(deltas: &[f64]) -> f64 {
    let ratios: Vec<f64> = deltas
        .windows(2)
        .skip(RATE_BURN_IN)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    median(ratios)
}

/// Solves `G(Q) = Q` on `spec` and returns the exp-rescaled solution.
///
/// With [`Init::Sandwich`] the result is the midpoint of the lower and upper
/// sequences; `lower <= upper` is checked after every iteration.
pub fn solve(
    kind: ModelKind,
    f: &AmmoFunction,
    spec: &GridSpec,
    opts: &SolveOpts,
) -> Result<(ValueField, SolveReport)> {
    kind.validate()?;
    opts.validate()?;
    if !f.is_probability() {
        log::warn!(
            "ammunition sup kappa = {} exceeds 1; values lose their probabilistic reading",
            f.kappa()
        );
    }
    let a = sample_ammo(f, spec);
    let exp_t = spec.exp_t();
    let zero = || ValueField::from_vec_unchecked(*spec, Scaling::ExpRescaled, vec![0.0; spec.len()]);
    let ceiling = || -> Result<ValueField> {
        let c = grid_ceiling(kind, f.kappa(), spec)?;
        let nt = spec.nt();
        let v = (0..spec.len()).map(|k| c[k % nt]).collect();
        Ok(ValueField::from_vec_unchecked(*spec, Scaling::ExpRescaled, v))
    };

    let mut deltas = Vec::new();
    let mut converged = false;
    match opts.init {
        Init::Zero | Init::Bound => {
            let mut q = if opts.init == Init::Zero { zero() } else { ceiling()? };
            for _ in 0..opts.max_iter {
                let next = apply_g_unchecked(kind, &a, &q, &exp_t);
                let delta = next.sup_distance(&q)?;
                deltas.push(delta);
                q = next;
                if delta < opts.tol {
                    converged = true;
                    break;
                }
            }
            let report = SolveReport {
                iterations: deltas.len(),
                empirical_rate: empirical_rate(&deltas),
                deltas,
                sandwich_gap: None,
                min_order_margin: None,
                converged,
            };
            Ok((q, report))
        }
        Init::Sandwich => {
            let mut lower = zero();
            let mut upper = ceiling()?;
            let mut min_margin = f64::INFINITY;
            for iteration in 1..=opts.max_iter {
                let next_lower = apply_g_unchecked(kind, &a, &lower, &exp_t);
                let next_upper = apply_g_unchecked(kind, &a, &upper, &exp_t);
                let delta = next_lower.sup_distance(&lower)?.max(next_upper.sup_distance(&upper)?);
                lower = next_lower;
                upper = next_upper;
                min_margin = min_margin.min(check_order(&lower, &upper, iteration)?);
                deltas.push(delta);
                if delta < opts.tol {
                    converged = true;
                    break;
                }
            }
            let gap = upper.sup_distance(&lower)?;
            let mid: Vec<f64> = lower
                .values()
                .iter()
                .zip(upper.values())
                .map(|(l, u)| 0.5 * (l + u))
                .collect();
            let report = SolveReport {
                iterations: deltas.len(),
                empirical_rate: empirical_rate(&deltas),
                deltas,
                sandwich_gap: Some(gap),
                min_order_margin: Some(min_margin),
                converged,
            };
            Ok((ValueField::from_vec_unchecked(*spec, Scaling::ExpRescaled, mid), report))
        }
    }
}

/// Returns `min(upper - lower)`, or an error when `lower` pokes above `upper`
/// by more than the order slack.
fn check_order(lower: &ValueField, upper: &ValueField, iteration: usize) -> Result<f64> {
    let scale = upper.max_abs().max(1.0);
    let nt = lower.spec().nt();
    let mut min_margin = f64::INFINITY;
    for (k, (l, u)) in lower.values().iter().zip(upper.values()).enumerate() {
        let margin = u - l;
        if margin < -ORDER_SLACK * scale {
            return Err(Error::SandwichOrder {
                iteration,
                i: k / nt,
                j: k % nt,
                excess: -margin,
            });
        }
        min_margin = min_margin.min(margin);
    }
    Ok(min_margin)
}
