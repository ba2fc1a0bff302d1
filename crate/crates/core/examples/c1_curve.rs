//! A parabola `(x², x)` over `Q(√2)`: the first rounds steer away from the
//! critical point at 0 before the ratio bounds hold.

use badk::game::{play_game, Adversary, Curve, GameParams, GameSetup, Polynomial, StrategyKind};
use badk::latticeflow::FlowSpec;
use badk::numberfield::NumberField;

fn main() -> badk::Result<()> {
    let k = NumberField::q_sqrt2();
    let curve = Curve::new(vec![Polynomial::from_i64s(&[0, 0, 1]), Polynomial::from_i64s(&[0, 1])], None)?;
    let spec = FlowSpec::equal(2);
    let params = GameParams { x0: 0.0, rho: 1.0, rounds: 16, ..GameParams::default() };
    let setup = GameSetup { field: &k, curve: &curve, spec: &spec, params: &params, prec: 128 };
    let t = play_game(&setup, Adversary::Random { seed: Some(2) }, StrategyKind::Tracking)?;
    println!("critical points {:?}", curve.critical_points(0, -1.0, 1.0));
    println!("preprocessing rounds {}  derivative bounds {:?}", t.preprocessing_rounds, t.derivative_bounds);
    for r in &t.rounds {
        println!(
            "  n = {:2}  B = [{:.6}, {:.6}]  {:?}  ratio floor {:?}",
            r.n,
            r.b.lo().to_f64(),
            r.b.hi().to_f64(),
            r.phase,
            r.ratio_floor
        );
    }
    Ok(())
}
