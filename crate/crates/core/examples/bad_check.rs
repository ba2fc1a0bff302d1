//! Approximation constants over `Q(√2)`: a point built from the golden
//! ratio stays bounded away from zero, a field point does not.

use badk::ball::{CBall, RBall};
use badk::diophantine::{bad_constant_estimate, dani_check, field_point, PSearch};
use badk::latticeflow::{Enumeration, FlowSpec};
use badk::numberfield::NumberField;
use rug::Float;

fn main() -> badk::Result<()> {
    let prec = 128;
    let k = NumberField::q_sqrt2();
    let golden = RBall::from_float(prec, &(Float::with_val(prec, 5).sqrt() / 2u32 - 0.5f64));
    let conj = golden.neg();
    let bad = vec![CBall::real(golden), CBall::real(conj)];
    let near = field_point(&k, &k.element(&[1, 1])?, prec);
    let spec = FlowSpec::equal(2);
    for (name, x) in [("golden pair", bad), ("tau(1 + sqrt 2)", near)] {
        let est = bad_constant_estimate(&k, &x, 100.0, PSearch::Neighborhood)?;
        let flow = dani_check(&k, &x, &spec, 6.0, 0.25, Enumeration::Reduced, 1e-3)?;
        println!(
            "{name}: c(Q<=100) = {:.4e} at q = {:?}, trajectory floor {:.4e} at t = {:?}",
            est.c_estimate.unwrap_or(f64::NAN),
            est.best_q,
            flow.trajectory_floor.unwrap_or(f64::NAN),
            flow.floor_time,
        );
    }
    Ok(())
}
