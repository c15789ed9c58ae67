//! TP2 checks on solved value surfaces, plus a deliberately broken field to
//! show what a located failure looks like.

use bomber_dp::props::{check_tp2, DEFAULT_TOL};
use bomber_dp::{solve, AmmoFunction, GridSpec, ModelKind, Scaling, SolveOpts, ValueField};

fn main() -> bomber_dp::Result<()> {
    let spec = GridSpec::new(6.0, 6.0, 121, 121)?;
    let cases = [
        ("bomber u=0", ModelKind::Bo, AmmoFunction::canonical_bomber(0.0)?),
        ("bomber u=0.5", ModelKind::Bo, AmmoFunction::canonical_bomber(0.5)?),
        ("frail", ModelKind::F0, AmmoFunction::canonical_fighter()),
    ];
    for (name, kind, ammo) in cases {
        let (q, _) = solve(kind, &ammo, &spec, &SolveOpts::default())?;
        for field in [q.clone(), q.rescale(Scaling::Raw)] {
            let r = check_tp2(&field, DEFAULT_TOL);
            println!(
                "{name:<13} {:?}: holds {} (worst normalized minor {:.2e})",
                field.scaling(),
                r.holds,
                r.worst
            );
        }
    }

    let small = GridSpec::new(1.0, 1.0, 6, 6)?;
    let mut v: Vec<f64> = (0..36).map(|k| (small.x(k / 6) * small.t(k % 6) * 4.0).exp()).collect();
    v[3 * 6 + 2] *= 0.8;
    let bent = ValueField::new(small, Scaling::Raw, v)?;
    println!("perturbed e^(4xt): {}", serde_json::to_string(&check_tp2(&bent, DEFAULT_TOL))?);
    Ok(())
}
