//! Extract the optimal spend for the Frail and Invincible Fighters and run
//! the monotonicity checks on it.

use bomber_dp::policy::{check_a, check_b, check_c, extract_policy};
use bomber_dp::{solve, AmmoFunction, GridSpec, ModelKind, Scaling, SolveOpts};

fn main() -> bomber_dp::Result<()> {
    let spec = GridSpec::new(6.0, 6.0, 121, 121)?;
    let ammo = AmmoFunction::canonical_fighter();

    for (name, kind) in [("frail", ModelKind::F0), ("invincible", ModelKind::F1)] {
        let (q, _) = solve(kind, &ammo, &spec, &SolveOpts::default())?;
        let policy = extract_policy(kind, &ammo, &q.rescale(Scaling::Raw))?;

        println!("{name}: optimal spend K(x, t)");
        for i in (20..spec.nx()).step_by(20) {
            let row: Vec<String> = (20..spec.nt())
                .step_by(20)
                .map(|j| format!("{:5.2}", policy.k_value(i, j)))
                .collect();
            println!("  x = {:4.1}: {}", spec.x(i), row.join(" "));
        }
        for report in [check_a(&policy), check_b(&policy), check_c(&policy)] {
            println!(
                "  {} holds: {:5}  worst {} cells, {} forgiven near ties",
                report.conjecture, report.holds, report.worst_cells, report.excused
            );
        }
    }
    Ok(())
}
