//! When the curve moves at one place of a cubic field only, `τ(1, 0)`
//! decays like `e^{-2t}` whatever B does.

use badk::game::counterexample_demo;

fn main() -> badk::Result<()> {
    let r = counterexample_demo(8.0, 1.0, 51, Some(3), 128)?;
    println!("{}  slope at place {}", r.field, r.slope_place);
    for row in &r.rows {
        println!("  t = {:3.0}  max H = {:.4e}  closed form {:.4e}", row.t, row.max_height, row.max_closed_form);
    }
    println!("below {} from t = {:?}", r.threshold, r.below_threshold_from);
    if let Some(tree) = r.tree {
        println!(
            "depth {} tree ({} leaves): systole {:.4} at t = 0, best B can force {:.4} at t = {:.3}",
            tree.depth, tree.leaves, tree.systole_t0, tree.best_case, tree.t_final
        );
    }
    Ok(())
}
