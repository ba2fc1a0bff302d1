//! Systole along `Φ(x)g_t` for a field point and a rational point of
//! `Q(√2)`: both decay, the field point through `τ(ω)` itself.

use badk::ball::RBall;
use badk::diophantine::{diagonal_point, field_point};
use badk::latticeflow::{trajectory_profile, unipotent, Enumeration, FlowSpec};
use badk::numberfield::NumberField;
use rug::Rational;

fn main() -> badk::Result<()> {
    let k = NumberField::q_sqrt2();
    let spec = FlowSpec::equal(2);
    let grid: Vec<f64> = (0..=16).map(|i| i as f64 * 0.5).collect();
    let omega = k.element(&[1, 1])?;
    let points = [
        ("tau(1 + sqrt 2)", field_point(&k, &omega, 128)),
        ("(1/3, 1/3)", diagonal_point(&k, &RBall::from_rational(128, &Rational::from((1, 3))))),
    ];
    for (name, x) in points {
        println!("{name}");
        let prof = trajectory_profile(&k, &unipotent(&x), &spec, &grid, Enumeration::Reduced)?;
        for p in prof.iter().step_by(2) {
            println!("  t = {:4.1}  systole {:.6e}  via ({}, {})", p.t, p.systole.to_f64(), p.a, p.b);
        }
    }
    Ok(())
}
