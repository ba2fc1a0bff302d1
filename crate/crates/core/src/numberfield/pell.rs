//! Fundamental unit of `Z[ξ]` for a real quadratic `ξ` via the continued
//! fraction of the conjugate.

use rug::ops::DivRounding;
use rug::Integer;

use crate::error::{Error, Result};

const MAX_PARTIAL_QUOTIENTS: usize = 100_000;

/// Norm of `u + v ξ` where `ξ` is a root of `x^2 + c1 x + c0`.
pub fn quadratic_norm(c0: &Integer, c1: &Integer, u: &Integer, v: &Integer) -> Integer {
    // (u + vξ)(u + vξ') = u^2 + uv(ξ+ξ') + v^2 ξξ' = u^2 - c1 uv + c0 v^2
    Integer::from(u * u) - Integer::from(c1 * u) * v + Integer::from(c0 * v) * v
}

/// Smallest solution `(u, v)`, `v >= 1`, of `N(u + vξ) = ±1`.
///
/// The convergents `p/q` of `θ = (c1 + √D)/2 = -ξ'` enumerate every unit
/// `p + qξ` with small conjugate once `D > 4`, which holds for every
/// irreducible real quadratic.
pub fn fundamental_unit(c0: i64, c1: i64) -> Result<(Integer, Integer)> {
    let c0i = Integer::from(c0);
    let c1i = Integer::from(c1);
    let disc = Integer::from(&c1i * &c1i) - Integer::from(4 * c0);
    if disc <= 0 {
        return Err(Error::UnsupportedField(
            "Pell solver needs a real quadratic field".into(),
        ));
    }
    let root = disc.clone().sqrt();
    if Integer::from(&root * &root) == disc {
        return Err(Error::UnsupportedField(
            "discriminant is a perfect square".into(),
        ));
    }

    // θ_k = (P + √D) / Q
    let mut p_state = c1i.clone();
    let mut q_state = Integer::from(2);
    let (mut p_prev, mut p_cur) = (Integer::from(0), Integer::from(1));
    let (mut q_prev, mut q_cur) = (Integer::from(1), Integer::from(0));
    for _ in 0..MAX_PARTIAL_QUOTIENTS {
        let a = floor_surd(&p_state, &root, &q_state);
        let p_next = Integer::from(&a * &p_cur) + &p_prev;
        let q_next = Integer::from(&a * &q_cur) + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);
        if q_cur >= 1 {
            let n = quadratic_norm(&c0i, &c1i, &p_cur, &q_cur);
            if n == 1 || n == -1 {
                return Ok((p_cur, q_cur));
            }
        }
        let p_new = Integer::from(&a * &q_state) - &p_state;
        let q_new = (disc.clone() - Integer::from(&p_new * &p_new)) / &q_state;
        p_state = p_new;
        q_state = q_new;
        if q_state == 0 {
            break;
        }
    }
    Err(Error::UnitSearchExhausted(
        "continued fraction did not produce a unit".into(),
    ))
}

/// `floor((p + √D)/q)` given `root = floor(√D)` and non-square `D`.
fn floor_surd(p: &Integer, root: &Integer, q: &Integer) -> Integer {
    if *q > 0 {
        Integer::from(p + root).div_floor(q.clone())
    } else {
        // (p + √D)/q = -(p + √D)/|q|; √D irrational so ceil = floor + 1
        let qa = Integer::from(-q);
        let fl: Integer = Integer::from(p + root).div_floor(qa);
        -(fl + 1u32)
    }
}
