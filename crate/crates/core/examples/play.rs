//! The strategy against each adversary on the diagonal of `Q(√2)`, next to
//! a player who always takes the middle.

use badk::game::{play_game, verify_outcome, Adversary, Curve, GameParams, GameSetup, StrategyKind, VerifyOptions};
use badk::latticeflow::{Enumeration, FlowSpec};
use badk::numberfield::NumberField;

fn main() -> badk::Result<()> {
    let k = NumberField::q_sqrt2();
    let curve = Curve::linear(&[1, 1]);
    let spec = FlowSpec::equal(2);
    let params = GameParams { rounds: 24, ..GameParams::default() };
    let setup = GameSetup { field: &k, curve: &curve, spec: &spec, params: &params, prec: 128 };
    let verify = VerifyOptions { mode: Enumeration::Box(4), ..VerifyOptions::default() };
    let adversaries = [Adversary::Random { seed: Some(1) }, Adversary::CenterHugging, Adversary::ShortVectorSeeker];
    for b in [StrategyKind::Tracking, StrategyKind::Heedless] {
        for a in adversaries {
            let t = play_game(&setup, a, b)?;
            let r = verify_outcome(&k, &t, &spec, &verify)?;
            println!(
                "{:<8} vs {:<20} x = {:.12}  floor {:.4e}  episodes {}  illegal moves {}",
                format!("{b:?}"),
                a.label(),
                t.x_inf.center().to_f64(),
                r.trajectory_floor.unwrap_or(f64::NAN),
                t.episodes,
                t.legality_violations().len(),
            );
        }
    }
    Ok(())
}
