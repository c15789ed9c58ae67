//! Run the two-sided iteration for every model and show how the gap between
//! the lower and upper iterates closes. The gap certifies the iteration
//! error only; it says nothing about the grid error.

use bomber_dp::{solve, AmmoFunction, GridSpec, ModelKind, SolveOpts};

fn main() -> bomber_dp::Result<()> {
    let spec = GridSpec::new(5.0, 5.0, 101, 101)?;
    let opts = SolveOpts::default();
    let models = [
        ("bomber u=0.5", ModelKind::Bo, AmmoFunction::canonical_bomber(0.5)?),
        ("frail", ModelKind::F0, AmmoFunction::canonical_fighter()),
        ("invincible", ModelKind::F1, AmmoFunction::canonical_fighter()),
        ("fu u=0.5", ModelKind::Fu { u: 0.5 }, AmmoFunction::canonical_fighter()),
    ];

    for (name, kind, ammo) in models {
        let (_, r) = solve(kind, &ammo, &spec, &opts)?;
        println!(
            "{name:<13} iterations {:>3}  gap {:.2e}  rate {:.3}  order margin {:.1e}",
            r.iterations,
            r.sandwich_gap.unwrap(),
            r.empirical_rate,
            r.min_order_margin.unwrap()
        );
        let shown: Vec<String> = r.deltas.iter().take(8).map(|d| format!("{d:.1e}")).collect();
        println!("              first deltas: {}", shown.join(" "));
    }
    Ok(())
}
