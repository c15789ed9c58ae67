//! Solve the Bomber problem and print the survival probability on a coarse
//! sub-grid, next to the closed form available when no ammunition is left.
//!
//! ```text
//! cargo run --release --example bomber_value -- 0.3
//! ```

use bomber_dp::{solve, AmmoFunction, GridSpec, ModelKind, Scaling, SolveOpts};

fn main() -> bomber_dp::Result<()> {
    let u: f64 = std::env::args().nth(1).map_or(0.0, |s| s.parse().expect("u must be a number"));
    let ammo = AmmoFunction::canonical_bomber(u)?;
    let spec = GridSpec::new(5.0, 5.0, 201, 201)?;

    let (rescaled, report) = solve(ModelKind::Bo, &ammo, &spec, &SolveOpts::default())?;
    let p = rescaled.rescale(Scaling::Raw);
    println!(
        "u = {u}: {} iterations, sandwich gap {:.1e}",
        report.iterations,
        report.sandwich_gap.unwrap_or(f64::NAN)
    );

    print!("{:>6}", "x \\ t");
    for j in (0..spec.nt()).step_by(40) {
        print!("{:>9.2}", spec.t(j));
    }
    println!();
    for i in (0..spec.nx()).step_by(40) {
        print!("{:>6.2}", spec.x(i));
        for j in (0..spec.nt()).step_by(40) {
            print!("{:>9.5}", p.get(i, j));
        }
        println!();
    }

    let t = spec.t_max();
    let exact = (-(1.0 - u) * t).exp();
    println!(
        "P(0, {t}) = {:.8}, closed form {exact:.8}",
        p.get(0, spec.nt() - 1)
    );
    Ok(())
}
