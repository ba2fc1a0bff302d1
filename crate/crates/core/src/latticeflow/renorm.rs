//! Unit renormalization: rebalancing a module vector across places by a unit
//! so that its sup norm is comparable to `H^{1/d}`.

use crate::error::{Error, Result};
use crate::numberfield::{AlgebraicInteger, NumberField, Place};

use super::{GroupElement, ModuleVector};

const EXPONENT_RANGE: i64 = 8;

/// `max_σ (δ_σ + Σ k_i L_iσ)`.
fn spread(delta: &[f64], logs: &[Vec<f64>], k: &[i64]) -> f64 {
    (0..delta.len())
        .map(|s| {
            delta[s]
                + logs
                    .iter()
                    .zip(k)
                    .map(|(l, &ki)| ki as f64 * l[s])
                    .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn for_each_exponent(rank: usize, lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    if rank == 0 {
        f(&[]);
        return;
    }
    let mut k: Vec<i64> = lo.to_vec();
    loop {
        f(&k);
        let mut i = 0;
        loop {
            if i == rank {
                return;
            }
            if k[i] < hi[i] {
                k[i] += 1;
                break;
            }
            k[i] = lo[i];
            i += 1;
        }
    }
}

/// `log C`, where `C` bounds `‖ξv‖ / H(v)^{1/d}` from above (and, trivially,
/// its inverse from below) for a best unit `ξ`.
///
/// For deviations `δ` in the trace-zero hyperplane, the quantity
/// `min_k max_σ (δ + Σ k_i L_i)_σ` is evaluated on a grid over the fundamental
/// parallelepiped of the unit log-lattice, with exponents `k ∈ [-8, 8]^rank`,
/// and a Lipschitz slack covers the gaps between grid points.
pub(crate) fn log_renormalization_constant(unit_logs: &[Vec<f64>], places: &[Place]) -> f64 {
    let rank = unit_logs.len();
    let margin = 1e-9;
    if rank == 0 {
        return margin;
    }
    let n = places.len();
    let steps: usize = match rank {
        1 => 1000,
        2 => 40,
        3 => 12,
        _ => 6,
    };
    let range = if rank <= 2 { EXPONENT_RANGE } else { 3 };
    let lo = vec![-range; rank];
    let hi = vec![range; rank];
    let h = 1.0 / steps as f64;
    let mut worst = f64::NEG_INFINITY;
    let mut grid = vec![0usize; rank];
    loop {
        let x: Vec<f64> = grid.iter().map(|&g| (g as f64 + 0.5) * h).collect();
        let delta: Vec<f64> = (0..n)
            .map(|s| (0..rank).map(|i| x[i] * unit_logs[i][s]).sum())
            .collect();
        let mut best = f64::INFINITY;
        for_each_exponent(rank, &lo, &hi, |k| {
            best = best.min(spread(&delta, unit_logs, k));
        });
        worst = worst.max(best);
        let mut i = 0;
        loop {
            if i == rank {
                let slack: f64 = unit_logs
                    .iter()
                    .map(|l| l.iter().fold(0.0f64, |m, v| m.max(v.abs())))
                    .sum::<f64>()
                    * h
                    / 2.0;
                return worst + slack + margin;
            }
            grid[i] += 1;
            if grid[i] < steps {
                break;
            }
            grid[i] = 0;
            i += 1;
        }
    }
}

/// Per-place log norms and the trace-zero deviation from `log H / d`.
fn deviations(field: &NumberField, v: &ModuleVector) -> Result<Vec<f64>> {
    let logs: Vec<f64> = (0..field.places().len())
        .map(|i| v.place_norm(i).to_f64().ln())
        .collect();
    if logs.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidInput(
            "unit renormalization needs a vector with nonzero component at every place".into(),
        ));
    }
    let d = field.degree() as f64;
    let lambda: f64 = logs
        .iter()
        .zip(field.places())
        .map(|(l, p)| l * p.exponent() as f64)
        .sum::<f64>()
        / d;
    Ok(logs.iter().map(|l| l - lambda).collect())
}

/// Least-squares real exponents `x` with `δ + Σ x_i L_i ≈ 0`.
fn least_squares(delta: &[f64], logs: &[Vec<f64>]) -> Vec<f64> {
    let rank = logs.len();
    let mut a = vec![vec![0.0; rank + 1]; rank];
    for i in 0..rank {
        for j in 0..rank {
            a[i][j] = logs[i].iter().zip(&logs[j]).map(|(x, y)| x * y).sum();
        }
        a[i][rank] = -logs[i].iter().zip(delta).map(|(x, y)| x * y).sum::<f64>();
    }
    for k in 0..rank {
        let p = (k..rank)
            .max_by(|&x, &y| a[x][k].abs().partial_cmp(&a[y][k].abs()).unwrap())
            .unwrap();
        a.swap(k, p);
        for i in 0..rank {
            if i != k && a[k][k] != 0.0 {
                let f = a[i][k] / a[k][k];
                for j in k..=rank {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
    }
    (0..rank)
        .map(|i| if a[i][i] != 0.0 { a[i][rank] / a[i][i] } else { 0.0 })
        .collect()
}

/// Unit exponents minimizing the sup norm of `ξv`, searched around the
/// least-squares solution.
pub fn best_unit_exponents(field: &NumberField, v: &ModuleVector) -> Result<Vec<i64>> {
    let logs = field.unit_logs();
    let rank = logs.len();
    if rank == 0 {
        return Ok(Vec::new());
    }
    let delta = deviations(field, v)?;
    let x = least_squares(&delta, logs);
    let center: Vec<i64> = x.iter().map(|v| v.round() as i64).collect();
    let bound = field.log_renormalization_constant();
    for radius in [2i64, 4, 8] {
        let lo: Vec<i64> = center.iter().map(|c| c - radius).collect();
        let hi: Vec<i64> = center.iter().map(|c| c + radius).collect();
        let mut best: Option<(f64, Vec<i64>)> = None;
        for_each_exponent(rank, &lo, &hi, |k| {
            let s = spread(&delta, logs, k);
            if best.as_ref().is_none_or(|(b, _)| s < *b) {
                best = Some((s, k.to_vec()));
            }
        });
        let (s, k) = best.expect("nonempty search box");
        if s <= bound {
            return Ok(k);
        }
    }
    Err(Error::UnitSearchExhausted(format!(
        "no unit brings the log spread below log C = {bound:.6} for a = {}, b = {}",
        v.a(),
        v.b()
    )))
}

/// Returns `(ξ, ξv)` with `C⁻¹H(v)^{1/d} <= ‖ξv‖ <= C·H(v)^{1/d}`.
pub fn unit_renormalize(
    field: &NumberField,
    v: &ModuleVector,
    g: &GroupElement,
) -> Result<(AlgebraicInteger, ModuleVector)> {
    let k = best_unit_exponents(field, v)?;
    let unit = field.unit_power(&k);
    let a = field.mul(&unit, v.a());
    let b = field.mul(&unit, v.b());
    let w = ModuleVector::new(field, a, b, g);
    Ok((unit, w))
}
