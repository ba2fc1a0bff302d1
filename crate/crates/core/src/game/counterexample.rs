//! The totally real cubic where the curve moves at one place only: `τ(1, 0)`
//! decays along every trajectory, so Player B cannot win.

use serde::{Deserialize, Serialize};

use crate::ball::RBall;
use crate::error::Result;
use crate::latticeflow::{flow_element, systole, unipotent, Enumeration, FlowSpec, ModuleVector};
use crate::numberfield::NumberField;

use super::curve::Curve;
use super::strategy::{side_interval, Side};
use super::{schedule_time, GameParams, Interval};

/// Place carrying the slope.
pub const SLOPE_PLACE: usize = 2;
pub const THRESHOLD: f64 = 1e-3;

/// `H(τ(1,0)Φ(x)g_t) = e^{−2t} max(e^{−t}, e^t |x|)`.
pub fn closed_form_height(x: f64, t: f64) -> f64 {
    (-2.0 * t).exp() * (-t).exp().max(t.exp() * x.abs())
}

/// `φ = (0, 0, x)`.
pub fn counterexample_curve() -> Curve {
    Curve::linear(&[0, 0, 1])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    /// Largest certified height of `τ(1,0)Φ(x)g_t` over the grid.
    pub max_height: f64,
    pub max_closed_form: f64,
    pub max_abs_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeResult {
    pub depth: usize,
    pub alpha: f64,
    pub beta: f64,
    pub systole_t0: f64,
    pub t_final: f64,
    /// Max over B, min over A of the systole at `t_depth`.
    pub best_case: f64,
    /// Largest leaf value, as if A cooperated.
    pub max_max: f64,
    pub leaves: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub field: String,
    pub slope_place: usize,
    pub grid: Vec<f64>,
    pub threshold: f64,
    pub rows: Vec<DecayRow>,
    /// First grid time from which every row stays below the threshold.
    pub below_threshold_from: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeResult>,
}

fn height_of_e1(field: &NumberField, curve: &Curve, spec: &FlowSpec, x: f64, t: f64, prec: u32) -> RBall {
    let g = unipotent(&curve.point(&RBall::from_f64(prec, x))).mul(&flow_element(spec, t, prec));
    ModuleVector::new(field, field.one(), field.zero(), &g).height().clone()
}

/// Systole of `ΛΦ(φ(x))g_t`.
fn systole_at(field: &NumberField, curve: &Curve, spec: &FlowSpec, x: &RBall, t: f64) -> Result<f64> {
    let g = unipotent(&curve.point(x)).mul(&flow_element(spec, t, x.prec()));
    Ok(systole(field, &g, Enumeration::Reduced)?.height.to_f64())
}

/// Exhaustive max-min over a game tree with three B-moves (left, center,
/// right) and three A-moves (left edge, center, right edge) per round.
pub fn game_tree(field: &NumberField, curve: &Curve, params: &GameParams, depth: usize, prec: u32) -> Result<TreeResult> {
    let spec = FlowSpec::equal(field.places().len());
    let t_final = schedule_time(params, depth, &spec);
    let mut leaves = 0;
    let mut max_max = f64::NEG_INFINITY;
    fn value(
        a: &Interval,
        k: usize,
        ctx: (&NumberField, &Curve, &FlowSpec, &GameParams, usize, f64),
        leaves: &mut usize,
        max_max: &mut f64,
    ) -> Result<f64> {
        let (field, curve, spec, params, depth, t_final) = ctx;
        if k == depth {
            *leaves += 1;
            let v = systole_at(field, curve, spec, &RBall::from_float(a.prec(), a.center()), t_final)?;
            *max_max = max_max.max(v);
            return Ok(v);
        }
        let mut best = f64::NEG_INFINITY;
        for side in [Side::Left, Side::Center, Side::Right] {
            let b = side_interval(a, side, params.alpha);
            let mut worst = f64::INFINITY;
            for u in [-1.0, 0.0, 1.0] {
                let next = Interval::new(b.offset(u * (1.0 - params.beta)), b.radius_f() * params.beta);
                worst = worst.min(value(&next, k + 1, ctx, leaves, max_max)?);
            }
            best = best.max(worst);
        }
        Ok(best)
    }
    let start = Interval::from_f64(params.x0, params.rho, prec);
    let ctx = (field, curve, &spec, params, depth, t_final);
    let best_case = value(&start, 0, ctx, &mut leaves, &mut max_max)?;
    let systole_t0 = systole_at(
        field,
        curve,
        &spec,
        &RBall::from_f64(prec, params.x0),
        schedule_time(params, 0, &spec),
    )?;
    Ok(TreeResult {
        depth,
        alpha: params.alpha,
        beta: params.beta,
        systole_t0,
        t_final,
        best_case,
        max_max,
        leaves,
    })
}

/// Decay table for `τ(1,0)` on `x ∈ {0, 1/(grid−1), …, 1}` and
/// `t ∈ {0, step, …, t_max}`, plus the optional game tree.
pub fn counterexample_demo(
    t_max: f64,
    step: f64,
    grid: usize,
    tree_depth: Option<usize>,
    prec: u32,
) -> Result<CounterexampleReport> {
    if !(step > 0.0) || grid < 2 || !(t_max >= 0.0) {
        return Err(crate::Error::InvalidInput("need step > 0, grid >= 2, t_max >= 0".into()));
    }
    let field = NumberField::cyclic_cubic();
    let curve = counterexample_curve();
    let spec = FlowSpec::equal(3);
    let xs: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    let steps = (t_max / step).round() as usize;
    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = (i as f64 * step).min(t_max);
        let mut row = DecayRow {
            t,
            max_height: 0.0,
            max_closed_form: 0.0,
            max_abs_error: 0.0,
        };
        for &x in &xs {
            let h = height_of_e1(&field, &curve, &spec, x, t, prec);
            let c = closed_form_height(x, t);
            row.max_height = row.max_height.max(h.hi_f64());
            row.max_closed_form = row.max_closed_form.max(c);
            row.max_abs_error = row.max_abs_error.max((h.to_f64() - c).abs());
        }
        rows.push(row);
    }
    let below_threshold_from = match rows.iter().rposition(|r| r.max_height >= THRESHOLD) {
        None => Some(0.0),
        Some(i) => rows.get(i + 1).map(|r| r.t),
    };
    let tree = tree_depth
        .map(|d| {
            let params = GameParams {
                rounds: d.max(1),
                allow_violations: true,
                ..GameParams::default()
            };
            game_tree(&field, &curve, &params, d, prec)
        })
        .transpose()?;
    Ok(CounterexampleReport {
        field: field.label().to_string(),
        slope_place: SLOPE_PLACE,
        grid: xs,
        threshold: THRESHOLD,
        rows,
        below_threshold_from,
        tree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert!((closed_form_height(0.5, 3.0) - 0.5 * (-3f64).exp()).abs() < 1e-15);
        for t in [0.0, 1.0, 2.5] {
            assert!((closed_form_height(0.0, t) - (-3.0 * t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn ball_height_matches_closed_form() {
        let field = NumberField::cyclic_cubic();
        let curve = counterexample_curve();
        let spec = FlowSpec::equal(3);
        for (x, t) in [(0.5, 3.0), (0.0, 1.0), (1.0, 8.0), (0.37, 0.0)] {
            let h = height_of_e1(&field, &curve, &spec, x, t, 128);
            assert!((h.to_f64() - closed_form_height(x, t)).abs() < 1e-15);
        }
    }

    #[test]
    fn decay_table_drops_below_threshold() {
        let r = counterexample_demo(8.0, 1.0, 11, None, 128).unwrap();
        assert!(r.rows.last().unwrap().max_height < THRESHOLD);
        assert!(r.below_threshold_from.unwrap() <= 8.0);
        assert!(r.rows.iter().all(|row| row.max_abs_error < 1e-12));
    }

    #[test]
    fn shallow_tree_decays() {
        let field = NumberField::cyclic_cubic();
        let params = GameParams { rounds: 2, allow_violations: true, ..GameParams::default() };
        let t = game_tree(&field, &counterexample_curve(), &params, 2, 128).unwrap();
        assert_eq!(t.leaves, 81);
        assert!(t.best_case <= t.max_max);
        assert!(t.max_max < t.systole_t0);
    }
}
