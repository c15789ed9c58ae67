//! Roll out the optimal grid policy with simulated Poisson encounters and
//! compare against the dynamic-programming value.

use bomber_dp::mc::{simulate_bomber, simulate_fighter, trace_path, SimConfig};
use bomber_dp::policy::extract_policy;
use bomber_dp::{solve, AmmoFunction, GridSpec, ModelKind, Scaling, SolveOpts};

fn main() -> bomber_dp::Result<()> {
    let spec = GridSpec::new(3.0, 3.0, 201, 201)?;
    let cfg = SimConfig {
        n_paths: 100_000,
        seed: 7,
        x0: 3.0,
        t0: 3.0,
    };
    let cases = [
        ("bomber u=0", ModelKind::Bo, AmmoFunction::canonical_bomber(0.0)?),
        ("invincible", ModelKind::F1, AmmoFunction::canonical_fighter()),
    ];

    for (name, kind, ammo) in cases {
        let (q, _) = solve(kind, &ammo, &spec, &SolveOpts::default())?;
        let raw = q.rescale(Scaling::Raw);
        let policy = extract_policy(kind, &ammo, &raw)?;
        let sim = match kind.fighter_u() {
            None => simulate_bomber(&ammo, &policy, &cfg)?,
            Some(u) => simulate_fighter(&ammo, u, &policy, &cfg)?,
        };
        println!(
            "{name:<11} dp {:.5}  mc {:.5} +/- {:.5}",
            raw.get(200, 200),
            sim.estimate,
            sim.std_err
        );

        let (payoff, path) = trace_path(&ammo, kind.fighter_u(), &policy, &cfg, 0)?;
        for e in &path {
            println!(
                "    t left {:.3}: stock {:.3}, spend {:.3}",
                e.remaining,
                spec.x(e.stock_index),
                spec.x(e.spend_index)
            );
        }
        println!("    path 0 payoff {payoff}");
    }
    Ok(())
}
