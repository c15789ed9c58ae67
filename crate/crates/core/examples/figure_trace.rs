//! Iterate the Bomber operator from zero and print `log P_m(x, 10)` for the
//! first ten iterates, with a log-concavity verdict per iterate. The `trace`
//! subcommand of the binary writes the same data, plus full surfaces, as CSV.

use bomber_dp::engine::iterates;
use bomber_dp::grid::sample_ammo;
use bomber_dp::props::{check_logconcave_in_x, DEFAULT_TOL};
use bomber_dp::{AmmoFunction, GridSpec, ModelKind, Scaling, ValueField};

fn main() -> bomber_dp::Result<()> {
    let spec = GridSpec::new(10.0, 10.0, 201, 201)?;
    let a = sample_ammo(&AmmoFunction::canonical_bomber(0.0)?, &spec);
    let zero = ValueField::constant(spec, Scaling::ExpRescaled, 0.0)?;
    let last = spec.nt() - 1;

    print!(" m  log-concave ");
    for i in (0..spec.nx()).step_by(40) {
        print!("{:>9}", format!("x={}", spec.x(i)));
    }
    println!();
    for (m, p) in (1..=10).zip(iterates(ModelKind::Bo, &a, zero)?) {
        let verdict = check_logconcave_in_x(&p, DEFAULT_TOL).holds;
        print!("{m:>2}  {verdict:<11} ");
        for i in (0..spec.nx()).step_by(40) {
            print!("{:>9.4}", p.get(i, last).ln());
        }
        println!();
    }
    Ok(())
}
