//! Shape diagnostics for the built-in ammunition families and a piecewise
//! linear one read from the command line, using the same grammar as the
//! binary's `--ammo` flag.
//!
//! ```text
//! cargo run --example ammo_shapes -- piecewise:knots=0:0.1,1:0.9,2:0.95
//! ```

use bomber_dp::cli::parse_ammo;
use bomber_dp::model::check_shape;
use bomber_dp::{AmmoFunction, GridSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let probe = GridSpec::new(10.0, 1.0, 101, 2)?;
    let mut family = vec![
        ("bomber u=0", AmmoFunction::canonical_bomber(0.0)?),
        ("bomber u=0.5", AmmoFunction::canonical_bomber(0.5)?),
        ("fighter", AmmoFunction::canonical_fighter()),
    ];
    if let Some(arg) = std::env::args().nth(1) {
        family.push(("custom", parse_ammo(&arg)?));
    }

    for (name, f) in family {
        let r = check_shape(&f, &probe)?;
        let samples: Vec<String> = [0.0, 0.5, 1.0, 2.0, 5.0]
            .iter()
            .map(|&y| f.eval(y).map(|v| format!("{v:.4}")))
            .collect::<Result<_, _>>()?;
        println!("{name:<13} a(0, .5, 1, 2, 5) = {}", samples.join(", "));
        println!(
            "              concave {} (strict {}), log-concave {} (strict {}), kappa {}",
            r.concave, r.strictly_concave, r.log_concave, r.strictly_log_concave, f.kappa()
        );
    }
    Ok(())
}
