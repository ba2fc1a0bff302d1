//! LLL reduction over MPFR floats with an exact integer transform, and
//! Fincke–Pohst enumeration on the reduced basis.

use rug::{Float, Integer};

const DELTA: f64 = 0.99;
const MAX_LLL_STEPS: usize = 200_000;

pub(crate) struct Reduced {
    /// `transform · input = basis`.
    pub transform: Vec<Vec<Integer>>,
    /// Gram–Schmidt coefficients `μ_{ij}`, `j < i`.
    pub mu: Vec<Vec<f64>>,
    /// Squared Gram–Schmidt norms.
    pub bstar: Vec<f64>,
}

fn dot(a: &[Float], b: &[Float], prec: u32) -> Float {
    let mut s = Float::new(prec);
    for (x, y) in a.iter().zip(b) {
        s += Float::with_val(prec, x * y);
    }
    s
}

fn gram_schmidt(b: &[Vec<Float>], prec: u32) -> (Vec<Vec<Float>>, Vec<Float>) {
    let n = b.len();
    let mut mu = vec![vec![Float::new(prec); n]; n];
    let mut bs: Vec<Vec<Float>> = Vec::with_capacity(n);
    let mut norms: Vec<Float> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            let m = if norms[j].is_zero() {
                Float::new(prec)
            } else {
                Float::with_val(prec, dot(&b[i], &bs[j], prec) / &norms[j])
            };
            for (vk, bk) in v.iter_mut().zip(&bs[j]) {
                *vk -= Float::with_val(prec, &m * bk);
            }
            mu[i][j] = m;
        }
        norms.push(dot(&v, &v, prec));
        bs.push(v);
    }
    (mu, norms)
}

/// LLL-reduces the rows of `rows` (linearly independent).
pub(crate) fn lll(rows: &[Vec<Float>], prec: u32) -> Reduced {
    let n = rows.len();
    let mut b: Vec<Vec<Float>> = rows
        .iter()
        .map(|r| r.iter().map(|x| Float::with_val(prec, x)).collect())
        .collect();
    let mut u: Vec<Vec<Integer>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Integer::from(u8::from(i == j)))
                .collect()
        })
        .collect();
    let (mut mu, mut norms) = gram_schmidt(&b, prec);
    let mut k = 1;
    let mut steps = 0;
    while k < n && steps < MAX_LLL_STEPS {
        steps += 1;
        for j in (0..k).rev() {
            let m = &mu[k][j];
            if Float::with_val(prec, m.abs_ref()) > 0.5 {
                let r = m.clone().round().to_integer().unwrap_or_default();
                let rf = Float::with_val(prec, &r);
                for c in 0..b[k].len() {
                    let t = Float::with_val(prec, &rf * &b[j][c]);
                    b[k][c] -= t;
                }
                for c in 0..n {
                    let t = Integer::from(&r * &u[j][c]);
                    u[k][c] -= t;
                }
                // update μ_k without a full recomputation
                for l in 0..j {
                    let t = Float::with_val(prec, &rf * &mu[j][l]);
                    mu[k][l] -= t;
                }
                mu[k][j] -= &rf;
            }
        }
        let lhs = norms[k].clone();
        let m2 = Float::with_val(prec, mu[k][k - 1].square_ref());
        let rhs = Float::with_val(prec, DELTA - m2) * &norms[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            let gs = gram_schmidt(&b, prec);
            mu = gs.0;
            norms = gs.1;
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
    Reduced {
        transform: u,
        mu: mu
            .iter()
            .map(|row| row.iter().map(|x| x.to_f64()).collect())
            .collect(),
        bstar: norms.iter().map(|x| x.to_f64()).collect(),
    }
}

/// Outcome of an enumeration run.
pub(crate) struct EnumStats {
    pub nodes: usize,
    pub truncated: bool,
}

/// Calls `visit` for every nonzero integer vector `x` (up to sign) with
/// `‖Σ x_i b_i‖² <= radius2`, given the Gram–Schmidt data of `b`. `visit`
/// returns `false` to stop early.
pub(crate) fn enumerate(
    mu: &[Vec<f64>],
    bstar: &[f64],
    radius2: f64,
    max_nodes: usize,
    mut visit: impl FnMut(&[i64]) -> bool,
) -> EnumStats {
    let n = bstar.len();
    let mut x = vec![0i64; n];
    let mut stats = EnumStats {
        nodes: 0,
        truncated: false,
    };
    let mut stop = false;
    recurse(
        n,
        mu,
        bstar,
        radius2,
        0.0,
        &mut x,
        true,
        max_nodes,
        &mut stats,
        &mut stop,
        &mut visit,
    );
    stats
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    level: usize,
    mu: &[Vec<f64>],
    bstar: &[f64],
    radius2: f64,
    partial: f64,
    x: &mut Vec<i64>,
    all_zero_above: bool,
    max_nodes: usize,
    stats: &mut EnumStats,
    stop: &mut bool,
    visit: &mut impl FnMut(&[i64]) -> bool,
) {
    if *stop {
        return;
    }
    if level == 0 {
        if !all_zero_above && !visit(x) {
            *stop = true;
        }
        return;
    }
    let i = level - 1;
    let n = bstar.len();
    let c: f64 = -(i + 1..n).map(|j| mu[j][i] * x[j] as f64).sum::<f64>();
    let rem = radius2 - partial;
    if rem < 0.0 || bstar[i] <= 0.0 {
        return;
    }
    let w = (rem / bstar[i]).sqrt();
    let mut lo = (c - w).ceil() as i64;
    let hi = (c + w).floor() as i64;
    if all_zero_above {
        lo = lo.max(0);
    }
    for xi in lo..=hi {
        stats.nodes += 1;
        if stats.nodes > max_nodes {
            stats.truncated = true;
            *stop = true;
            return;
        }
        let diff = xi as f64 - c;
        let p = partial + bstar[i] * diff * diff;
        if p > radius2 {
            continue;
        }
        x[i] = xi;
        recurse(
            i,
            mu,
            bstar,
            radius2,
            p,
            x,
            all_zero_above && xi == 0,
            max_nodes,
            stats,
            stop,
            visit,
        );
        if *stop {
            x[i] = 0;
            return;
        }
    }
    x[i] = 0;
}
