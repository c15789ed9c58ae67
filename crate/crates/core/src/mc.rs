//! Monte-Carlo rollouts of a grid policy against unit-rate Poisson encounters.
//!
//! Each path owns a ChaCha stream selected by its index, so paths run in
//! parallel and the aggregate is still bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::sample_ammo;
use crate::model::AmmoFunction;
use crate::policy::PolicyField;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_paths: u64,
    pub seed: u64,
    /// Initial stock, on an x-node of the policy grid.
    pub x0: f64,
    /// Horizon, on a t-node of the policy grid.
    pub t0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub estimate: f64,
    pub std_err: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub x0: f64,
    pub t0: f64,
}

/// One encounter along a simulated path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Encounter {
    /// Time left when the enemy arrives.
    pub remaining: f64,
    pub stock_index: usize,
    pub spend_index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Rules {
    Bomber,
    Fighter { u: f64 },
}

struct Sim<'a> {
    policy: &'a PolicyField,
    a: Vec<f64>,
    rules: Rules,
    i0: usize,
    t0: f64,
    seed: u64,
}

impl Sim<'_> {
    fn new<'a>(f: &AmmoFunction, policy: &'a PolicyField, rules: Rules, cfg: &SimConfig) -> Result<Sim<'a>> {
        let spec = policy.spec();
        if cfg.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if let Rules::Fighter { u } = rules {
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::Domain(format!("u must lie in [0, 1], got {u}")));
            }
        }
        let i0 = spec
            .x_node(cfg.x0)
            .ok_or_else(|| Error::Config(format!("x0 = {} is not an x-node of the policy grid", cfg.x0)))?;
        spec.t_node(cfg.t0)
            .ok_or_else(|| Error::Config(format!("t0 = {} is not a t-node of the policy grid", cfg.t0)))?;
        Ok(Sim {
            policy,
            a: sample_ammo(f, spec),
            rules,
            i0,
            t0: cfg.t0.max(0.0),
            seed: cfg.seed,
        })
    }

    fn nearest_t(&self, tau: f64) -> usize {
        let spec = self.policy.spec();
        ((tau / spec.dt()).round() as usize).min(spec.nt() - 1)
    }

    /// Payoff of path `index`: 1/0 survival for the Bomber, kills for the
    /// Fighter. Encounters are handed to `record`.
    fn path(&self, index: u64, mut record: impl FnMut(Encounter)) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let mut stock = self.i0;
        let mut tau = self.t0;
        let mut kills = 0.0;
        loop {
            let gap: f64 = rng.sample(Exp1);
            tau -= gap;
            if tau < 0.0 {
                return match self.rules {
                    Rules::Bomber => 1.0,
                    Rules::Fighter { .. } => kills,
                };
            }
            let spend = self.policy.k_index(stock, self.nearest_t(tau)).min(stock);
            record(Encounter {
                remaining: tau,
                stock_index: stock,
                spend_index: spend,
            });
            let hit = self.a[spend];
            stock -= spend;
            let draw: f64 = rng.gen();
            match self.rules {
                Rules::Bomber => {
                    if draw >= hit {
                        return 0.0;
                    }
                }
                Rules::Fighter { u } => {
                    if draw < hit {
                        kills += 1.0;
                    } else if draw >= hit + u * (1.0 - hit) {
                        return kills;
                    }
                }
            }
        }
    }

    fn run(&self, n_paths: u64) -> Vec<f64> {
        (0..n_paths).into_par_iter().map(|k| self.path(k, |_| {})).collect()
    }
}

/// Sum by recursive halving; the fixed split keeps totals independent of
/// thread scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if v.len() <= LEAF {
        return v.iter().sum();
    }
    let (l, r) = v.split_at(v.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

fn result(cfg: &SimConfig, estimate: f64, std_err: f64) -> SimResult {
    SimResult {
        estimate,
        std_err,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        x0: cfg.x0,
        t0: cfg.t0,
    }
}

/// Survival probability of the Bomber following `policy`, with its binomial
/// standard error.
pub fn simulate_bomber(f: &AmmoFunction, policy: &PolicyField, cfg: &SimConfig) -> Result<SimResult> {
    let sim = Sim::new(f, policy, Rules::Bomber, cfg)?;
    let outcomes = sim.run(cfg.n_paths);
    let n = cfg.n_paths as f64;
    let p = pairwise_sum(&outcomes) / n;
    Ok(result(cfg, p, (p * (1.0 - p) / n).max(0.0).sqrt()))
}

/// Expected kills of a Fighter following `policy` that survives a miss with
/// probability `u`, with the sample standard error.
pub fn simulate_fighter(f: &AmmoFunction, u: f64, policy: &PolicyField, cfg: &SimConfig) -> Result<SimResult> {
    let sim = Sim::new(f, policy, Rules::Fighter { u }, cfg)?;
    let outcomes = sim.run(cfg.n_paths);
    let n = cfg.n_paths as f64;
    let mean = pairwise_sum(&outcomes) / n;
    let std_err = if cfg.n_paths > 1 {
        let sq: Vec<f64> = outcomes.iter().map(|v| (v - mean) * (v - mean)).collect();
        (pairwise_sum(&sq) / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(result(cfg, mean, std_err))
}

/// Encounters met along path `index`, for inspection. `u` selects the Fighter
/// rules; `None` plays the Bomber.
pub fn trace_path(
    f: &AmmoFunction,
    u: Option<f64>,
    policy: &PolicyField,
    cfg: &SimConfig,
    index: u64,
) -> Result<(f64, Vec<Encounter>)> {
    let rules = u.map_or(Rules::Bomber, |u| Rules::Fighter { u });
    let sim = Sim::new(f, policy, rules, cfg)?;
    let mut seen = Vec::new();
    let payoff = sim.path(index, |e| seen.push(e));
    Ok((payoff, seen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{solve, ModelKind, SolveOpts};
    use crate::grid::{GridSpec, Scaling};
    use crate::policy::extract_policy;

    fn cfg(n: u64, x0: f64, t0: f64) -> SimConfig {
        SimConfig {
            n_paths: n,
            seed: 42,
            x0,
            t0,
        }
    }

    fn hold_all(spec: GridSpec) -> PolicyField {
        PolicyField::from_indices(spec, |_, _| 0).unwrap()
    }

    #[test]
    fn zero_horizon() {
        let s = GridSpec::new(2.0, 2.0, 11, 11).unwrap();
        let f = AmmoFunction::canonical_bomber(0.2).unwrap();
        let r = simulate_bomber(&f, &hold_all(s), &cfg(1000, 1.0, 0.0)).unwrap();
        assert_eq!((r.estimate, r.std_err), (1.0, 0.0));
        let r = simulate_fighter(&f, 0.5, &hold_all(s), &cfg(1000, 1.0, 0.0)).unwrap();
        assert_eq!((r.estimate, r.std_err), (0.0, 0.0));
    }

    #[test]
    fn sure_kill_ammunition() {
        let s = GridSpec::new(2.0, 2.0, 11, 11).unwrap();
        let one = AmmoFunction::constant(1.0).unwrap();
        let r = simulate_bomber(&one, &hold_all(s), &cfg(2000, 1.0, 2.0)).unwrap();
        assert_eq!(r.estimate, 1.0);
        let r = simulate_fighter(&one, 1.0, &hold_all(s), &cfg(40_000, 1.0, 2.0)).unwrap();
        assert!((r.estimate - 2.0).abs() < 3.0 * r.std_err, "{r:?}");
    }

    #[test]
    fn empty_stock_bomber_closed_form() {
        let s = GridSpec::new(2.0, 3.0, 11, 31).unwrap();
        for u in [0.0, 0.4, 0.8] {
            let f = AmmoFunction::canonical_bomber(u).unwrap();
            let r = simulate_bomber(&f, &hold_all(s), &cfg(50_000, 0.0, 3.0)).unwrap();
            let exact = (-(1.0 - u) * 3.0f64).exp();
            assert!((r.estimate - exact).abs() <= 3.0 * r.std_err.max(1e-12), "u={u}: {r:?}");
        }
    }

    #[test]
    fn frail_without_stock_scores_nothing() {
        let s = GridSpec::new(2.0, 3.0, 11, 31).unwrap();
        let f = AmmoFunction::canonical_fighter();
        let r = simulate_fighter(&f, 0.0, &hold_all(s), &cfg(5000, 0.0, 3.0)).unwrap();
        assert_eq!((r.estimate, r.std_err), (0.0, 0.0));
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let s = GridSpec::new(3.0, 3.0, 31, 31).unwrap();
        let f = AmmoFunction::canonical_bomber(0.0).unwrap();
        let (q, _) = solve(ModelKind::Bo, &f, &s, &SolveOpts::default()).unwrap();
        let p = extract_policy(ModelKind::Bo, &f, &q.rescale(Scaling::Raw)).unwrap();
        let c = cfg(20_000, 3.0, 3.0);
        let a = simulate_bomber(&f, &p, &c).unwrap();
        let b = simulate_bomber(&f, &p, &c).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        let other = simulate_bomber(&f, &p, &SimConfig { seed: 43, ..c }).unwrap();
        assert_ne!(a.estimate, other.estimate);
    }

    #[test]
    fn spends_never_exceed_stock() {
        let s = GridSpec::new(3.0, 3.0, 31, 31).unwrap();
        let f = AmmoFunction::canonical_fighter();
        let greedy = PolicyField::from_indices(s, |i, j| (i + j) / 2 % (i + 1)).unwrap();
        for index in 0..200 {
            let (_, path) = trace_path(&f, Some(1.0), &greedy, &cfg(1, 3.0, 3.0), index).unwrap();
            let mut stock = 30usize;
            for e in path {
                assert_eq!(e.stock_index, stock);
                assert!(e.spend_index <= e.stock_index);
                stock -= e.spend_index;
            }
        }
    }

    #[test]
    fn rejects_off_grid_start() {
        let s = GridSpec::new(2.0, 2.0, 11, 11).unwrap();
        let f = AmmoFunction::canonical_fighter();
        assert!(simulate_bomber(&f, &hold_all(s), &cfg(10, 0.15, 1.0)).is_err());
        assert!(simulate_bomber(&f, &hold_all(s), &cfg(10, 1.0, 2.5)).is_err());
        assert!(simulate_bomber(&f, &hold_all(s), &cfg(0, 1.0, 1.0)).is_err());
        assert!(simulate_fighter(&f, 1.5, &hold_all(s), &cfg(10, 1.0, 1.0)).is_err());
    }

    #[test]
    fn pairwise_sum_matches_exact_small_sums() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn result_json_fields() {
        let s = GridSpec::new(1.0, 1.0, 3, 3).unwrap();
        let f = AmmoFunction::canonical_fighter();
        let r = simulate_bomber(&f, &hold_all(s), &cfg(10, 0.5, 1.0)).unwrap();
        let v = serde_json::to_value(r).unwrap();
        for key in ["estimate", "std_err", "n_paths", "seed", "x0", "t0"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
