//! Ammunition functions `a(y)`: the per-encounter success probability as a
//! function of the amount `y` spent, plus shape diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Relative slack applied to second differences when judging concavity.
pub const SHAPE_REL_SLACK: f64 = 1e-9;
/// Second differences must sit below `-STRICT_MARGIN` to count as strict.
pub const STRICT_MARGIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AmmoFamily {
    /// `1 - (1-u) e^{-y}`.
    CanonicalBomber { u: f64 },
    /// `1 - e^{-y}`.
    CanonicalFighter,
    /// Linear between knots, flat outside them.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

/// A nondecreasing, bounded ammunition function together with its supremum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmmoFunction {
    family: AmmoFamily,
    kappa: f64,
}

impl AmmoFunction {
    pub fn canonical_bomber(u: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidAmmo(format!("u must lie in [0, 1], got {u}")));
        }
        Ok(Self {
            family: AmmoFamily::CanonicalBomber { u },
            kappa: 1.0,
        })
    }

    pub fn canonical_fighter() -> Self {
        Self {
            family: AmmoFamily::CanonicalFighter,
            kappa: 1.0,
        }
    }

    /// Knots must have strictly increasing, nonnegative abscissae and
    /// nondecreasing, nonnegative values.
    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidAmmo("at least one knot is required".into()));
        }
        for &(y, v) in &knots {
            if !y.is_finite() || y < 0.0 {
                return Err(Error::InvalidAmmo(format!("knot position {y} is not a finite resource >= 0")));
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidAmmo(format!("knot value {v} is not finite and >= 0")));
            }
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidAmmo(format!(
                    "knot positions must increase strictly ({} then {})",
                    w[0].0, w[1].0
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidAmmo(format!(
                    "knot values must not decrease ({} at y={} then {} at y={})",
                    w[0].1, w[0].0, w[1].1, w[1].0
                )));
            }
        }
        let kappa = knots[knots.len() - 1].1;
        Ok(Self {
            family: AmmoFamily::PiecewiseLinear { knots },
            kappa,
        })
    }

    /// `a(y) = value` for every `y`.
    pub fn constant(value: f64) -> Result<Self> {
        Self::piecewise_linear(vec![(0.0, value)])
    }

    pub fn family(&self) -> &AmmoFamily {
        &self.family
    }

    /// Supremum of `a` over the nonnegative half-line.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Whether `a` can be read as a probability (`kappa <= 1`).
    pub fn is_probability(&self) -> bool {
        self.kappa <= 1.0
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 0.0 {
            return Err(Error::Domain(format!("ammunition amount must be >= 0, got {y}")));
        }
        Ok(self.eval_unchecked(y).clamp(0.0, self.kappa))
    }

    fn eval_unchecked(&self, y: f64) -> f64 {
        match &self.family {
            AmmoFamily::CanonicalBomber { u } => u - (1.0 - u) * (-y).exp_m1(),
            AmmoFamily::CanonicalFighter => -(-y).exp_m1(),
            AmmoFamily::PiecewiseLinear { knots } => interpolate(knots, y),
        }
    }

    /// `log a(y)`, evaluated without cancellation for the canonical families.
    pub fn log_eval(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 0.0 {
            return Err(Error::Domain(format!("ammunition amount must be >= 0, got {y}")));
        }
        Ok(match &self.family {
            AmmoFamily::CanonicalBomber { u } => (-(1.0 - u) * (-y).exp()).ln_1p(),
            AmmoFamily::CanonicalFighter => (-(-y).exp()).ln_1p(),
            AmmoFamily::PiecewiseLinear { .. } => self.eval(y)?.ln(),
        })
    }
}

fn interpolate(knots: &[(f64, f64)], y: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if y <= first.0 {
        return first.1;
    }
    if y >= last.0 {
        return last.1;
    }
    // first index whose position exceeds y; guaranteed in 1..len
    let hi = knots.partition_point(|&(ky, _)| ky <= y);
    let (y0, v0) = knots[hi - 1];
    let (y1, v1) = knots[hi];
    let w = (y - y0) / (y1 - y0);
    v0 + w * (v1 - v0)
}

/// Outcome of sampling second differences of `a` and `log a` on a probe grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapeReport {
    pub log_concave: bool,
    pub strictly_log_concave: bool,
    pub concave: bool,
    pub strictly_concave: bool,
    /// Largest second difference of `log a` among assessable triples.
    pub worst_log_second_diff: f64,
    /// Largest second difference of `a`.
    pub worst_second_diff: f64,
    /// Probe nodes with `y > 0` where `a(y) = 0`, so `log a` is undefined.
    pub not_assessable: Vec<usize>,
}

/// Probes `a` on the x-nodes of `probe` (restricted to `y > 0`).
pub fn check_shape(f: &AmmoFunction, probe: &GridSpec) -> Result<ShapeReport> {
    let xs: Vec<f64> = (0..probe.nx()).map(|i| probe.x(i)).collect();
    let values = xs.iter().map(|&y| f.eval(y)).collect::<Result<Vec<_>>>()?;
    let logs = xs.iter().map(|&y| f.log_eval(y)).collect::<Result<Vec<_>>>()?;

    let not_assessable: Vec<usize> = (1..xs.len()).filter(|&i| values[i] <= 0.0).collect();

    let mut worst = f64::NEG_INFINITY;
    let mut worst_log = f64::NEG_INFINITY;
    let mut scale: f64 = 0.0;
    let mut log_scale: f64 = 0.0;
    let mut any_log = false;
    for i in 2..xs.len().saturating_sub(1) {
        let d2 = values[i + 1] - 2.0 * values[i] + values[i - 1];
        worst = worst.max(d2);
        scale = scale.max(values[i - 1].abs()).max(values[i].abs()).max(values[i + 1].abs());
        if values[i - 1] > 0.0 && values[i] > 0.0 && values[i + 1] > 0.0 {
            let l2 = logs[i + 1] - 2.0 * logs[i] + logs[i - 1];
            worst_log = worst_log.max(l2);
            log_scale = log_scale
                .max(logs[i - 1].abs())
                .max(logs[i].abs())
                .max(logs[i + 1].abs());
            any_log = true;
        }
    }
    let any = worst.is_finite();
    let concave = !any || worst <= SHAPE_REL_SLACK * scale;
    let log_concave = !any_log || worst_log <= SHAPE_REL_SLACK * log_scale;
    Ok(ShapeReport {
        log_concave,
        strictly_log_concave: any_log && worst_log <= -STRICT_MARGIN,
        concave,
        strictly_concave: any && worst <= -STRICT_MARGIN,
        worst_log_second_diff: if any_log { worst_log } else { 0.0 },
        worst_second_diff: if any { worst } else { 0.0 },
        not_assessable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe(x_max: f64, nx: usize) -> GridSpec {
        GridSpec::new(x_max, 1.0, nx, 2).unwrap()
    }

    #[test]
    fn canonical_values() {
        let b = AmmoFunction::canonical_bomber(0.3).unwrap();
        assert_eq!(b.eval(0.0).unwrap(), 0.3);
        let f = AmmoFunction::canonical_fighter();
        assert!((f.eval(std::f64::consts::LN_2).unwrap() - 0.5).abs() < 1e-15);
        // 1 - e^{-2}, from a 30-digit evaluation
        let b0 = AmmoFunction::canonical_bomber(0.0).unwrap();
        assert!((b0.eval(2.0).unwrap() - 0.864_664_716_763_387_308_1).abs() < 1e-15);
    }

    #[test]
    fn negative_amount_is_domain_error() {
        let f = AmmoFunction::canonical_fighter();
        assert!(matches!(f.eval(-0.1), Err(Error::Domain(_))));
        assert!(matches!(f.eval(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(AmmoFunction::canonical_bomber(1.5).is_err());
        assert!(AmmoFunction::canonical_bomber(-0.1).is_err());
        assert!(AmmoFunction::piecewise_linear(vec![]).is_err());
        assert!(AmmoFunction::piecewise_linear(vec![(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(AmmoFunction::piecewise_linear(vec![(1.0, 0.1), (1.0, 0.4)]).is_err());
        assert!(AmmoFunction::piecewise_linear(vec![(-1.0, 0.1)]).is_err());
    }

    #[test]
    fn piecewise_interpolates_and_extends_flat() {
        let f = AmmoFunction::piecewise_linear(vec![(0.0, 0.1), (1.0, 0.9), (2.0, 0.95)]).unwrap();
        assert_eq!(f.eval(0.0).unwrap(), 0.1);
        assert!((f.eval(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((f.eval(1.5).unwrap() - 0.925).abs() < 1e-15);
        assert_eq!(f.eval(7.0).unwrap(), 0.95);
        assert_eq!(f.kappa(), 0.95);
    }

    #[test]
    fn bomber_tends_to_one() {
        let f = AmmoFunction::canonical_bomber(0.0).unwrap();
        assert!(1.0 - f.eval(50.0).unwrap() < 1e-20);
        assert!(f.eval(50.0).unwrap() <= f.kappa());
    }

    #[test]
    fn canonical_bomber_strictly_log_concave() {
        for u in [0.0, 0.25, 0.5, 0.9] {
            let f = AmmoFunction::canonical_bomber(u).unwrap();
            let r = check_shape(&f, &probe(10.0, 101)).unwrap();
            assert!(r.log_concave && r.strictly_log_concave, "u={u}: {r:?}");
        }
    }

    #[test]
    fn canonical_fighter_concave() {
        let r = check_shape(&AmmoFunction::canonical_fighter(), &probe(10.0, 101)).unwrap();
        assert!(r.concave && r.strictly_concave);
        assert!(r.not_assessable.is_empty());
    }

    #[test]
    fn piecewise_concave_but_not_strictly() {
        let f = AmmoFunction::piecewise_linear(vec![(0.0, 0.1), (1.0, 0.9), (2.0, 0.95)]).unwrap();
        let r = check_shape(&f, &probe(3.0, 31)).unwrap();
        assert!(r.concave);
        assert!(!r.strictly_concave);
    }

    #[test]
    fn zero_values_are_not_assessable() {
        let f = AmmoFunction::piecewise_linear(vec![(0.0, 0.0), (2.0, 0.0), (3.0, 1.0)]).unwrap();
        let r = check_shape(&f, &probe(4.0, 9)).unwrap();
        assert_eq!(r.not_assessable, vec![1, 2, 3, 4]);
    }

    #[test]
    fn convex_function_fails_concavity() {
        let f = AmmoFunction::piecewise_linear(vec![(0.0, 0.1), (1.0, 0.2), (2.0, 0.9)]).unwrap();
        let r = check_shape(&f, &probe(2.0, 21)).unwrap();
        assert!(!r.concave);
        assert!(r.worst_second_diff > 0.0);
    }
}
