//! Weighted flows on `Q(√2)`. The zero weight breaks the hypothesis and is
//! only flagged.

use badk::game::{play_game, verify_outcome, Adversary, Curve, GameParams, GameSetup, StrategyKind, VerifyOptions};
use badk::latticeflow::{Enumeration, FlowSpec};
use badk::numberfield::NumberField;

fn main() -> badk::Result<()> {
    let k = NumberField::q_sqrt2();
    let curve = Curve::linear(&[1, 1]);
    let verify = VerifyOptions { mode: Enumeration::Box(4), ..VerifyOptions::default() };
    for w in [[0.5, 0.5], [0.6, 0.4], [0.75, 0.25], [0.9, 0.1], [1.0, 0.0]] {
        let spec = FlowSpec::weighted(&w)?;
        let flag = curve.hypothesis(&k, &spec)?;
        let params = GameParams { rounds: 20, allow_violations: flag.is_some(), ..GameParams::default() };
        let setup = GameSetup { field: &k, curve: &curve, spec: &spec, params: &params, prec: 128 };
        let t = play_game(&setup, Adversary::Random { seed: Some(5) }, StrategyKind::Tracking)?;
        let r = verify_outcome(&k, &t, &spec, &verify)?;
        println!(
            "weights {w:?}: x = {:.10}  floor {:.4e}{}",
            t.x_inf.center().to_f64(),
            r.trajectory_floor.unwrap_or(f64::NAN),
            flag.map_or(String::new(), |f| format!("  [{f}]"))
        );
    }
    Ok(())
}
