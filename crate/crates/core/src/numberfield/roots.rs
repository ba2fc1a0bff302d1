//! Root finding for monic integer polynomials: floating-point simultaneous
//! iteration for starting values, Newton refinement in multiprecision, and
//! certification by disjoint inclusion discs.

use num_complex::Complex64;
use rug::float::Round;
use rug::{Float, Integer};

use crate::ball::{CBall, RBall};
use crate::error::{Error, Result};

/// Evaluates a polynomial with ascending integer coefficients at a complex ball.
pub(crate) fn horner(coeffs: &[Integer], z: &CBall) -> CBall {
    let prec = z.prec();
    let mut acc = CBall::zero(prec);
    for c in coeffs.iter().rev() {
        acc = acc.mul(z).add(&CBall::from_integer(prec, c));
    }
    acc
}

pub(crate) fn derivative(coeffs: &[Integer]) -> Vec<Integer> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| Integer::from(c * i as u32))
        .collect()
}

fn eval_c64(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Aberth–Ehrlich iteration in double precision. `coeffs` is ascending and monic.
pub(crate) fn approximate_roots(coeffs: &[Integer]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    let cf: Vec<f64> = coeffs.iter().map(|c| c.to_f64()).collect();
    let dcf: Vec<f64> = cf
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect();
    // Cauchy bound for the starting circle
    let bound = 1.0 + cf[..d].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let radius = bound.clamp(0.5, 1e6);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64 + 0.4;
            Complex64::from_polar(radius * 0.7, angle)
        })
        .collect();
    for _ in 0..2000 {
        let mut max_step: f64 = 0.0;
        for i in 0..d {
            let p = eval_c64(&cf, z[i]);
            let dp = eval_c64(&dcf, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z[i] - z[j];
                    if diff.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(1.0, 0.0) / diff
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * sum;
            let step = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

/// Checks for monic integer factors of degree `1..=d/2` by testing products of
/// subsets of approximate roots, confirming candidates by exact division.
pub(crate) fn find_factor(coeffs: &[Integer]) -> Option<Vec<Integer>> {
    let d = coeffs.len() - 1;
    if d < 2 {
        return None;
    }
    let roots = approximate_roots(coeffs);
    for k in 1..=d / 2 {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            if let Some(f) = subset_factor(coeffs, &roots, &idx) {
                return Some(f);
            }
            // next combination
            let mut i = k;
            let mut advanced = false;
            while i > 0 {
                i -= 1;
                if idx[i] < d - k + i {
                    idx[i] += 1;
                    for j in i + 1..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    None
}

fn subset_factor(coeffs: &[Integer], roots: &[Complex64], idx: &[usize]) -> Option<Vec<Integer>> {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for &i in idx {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= c * roots[i];
        }
        poly = next;
    }
    let mut candidate = Vec::with_capacity(poly.len());
    for c in &poly {
        let scale = 1.0 + c.norm();
        if c.im.abs() > 1e-6 * scale || (c.re - c.re.round()).abs() > 1e-6 * scale {
            return None;
        }
        candidate.push(Integer::from(c.re.round() as i64));
    }
    if divides(&candidate, coeffs) {
        Some(candidate)
    } else {
        None
    }
}

/// Exact division test by a monic divisor.
fn divides(divisor: &[Integer], dividend: &[Integer]) -> bool {
    let m = divisor.len() - 1;
    let mut rem: Vec<Integer> = dividend.to_vec();
    let n = rem.len() - 1;
    if m > n {
        return false;
    }
    for k in (m..=n).rev() {
        let c = rem[k].clone();
        if c == 0 {
            continue;
        }
        for (i, dc) in divisor.iter().enumerate() {
            rem[k - m + i] -= Integer::from(&c * dc);
        }
    }
    rem[..m].iter().all(|c| *c == 0)
}

/// A certified root: midpoint at high precision plus an inclusion radius.
#[derive(Clone, Debug)]
pub(crate) struct IsolatedRoot {
    pub re: Float,
    pub im: Float,
    pub radius: f64,
    pub real: bool,
}

/// Isolates all roots of a squarefree monic polynomial at `prec` bits.
pub(crate) fn isolate_roots(coeffs: &[Integer], prec: u32) -> Result<Vec<IsolatedRoot>> {
    let d = coeffs.len() - 1;
    let approx = approximate_roots(coeffs);
    let dcoeffs = derivative(coeffs);
    let mut refined: Vec<CBall> = Vec::with_capacity(d);
    for z0 in approx {
        let mut z = CBall::new(RBall::from_f64(prec, z0.re), RBall::from_f64(prec, z0.im));
        for _ in 0..200 {
            let p = horner(coeffs, &z);
            let dp = horner(&dcoeffs, &z);
            let step = p.div(&dp);
            if !step.is_finite() {
                break;
            }
            let next = z.sub(&step);
            // drop radii: Newton only needs midpoints
            z = CBall::new(
                RBall::with_radius(next.re.mid().clone(), 0.0),
                RBall::with_radius(next.im.mid().clone(), 0.0),
            );
            let step_size = step.re.mid().to_f64().abs() + step.im.mid().to_f64().abs();
            let scale = 1.0 + z.re.mid().to_f64().abs() + z.im.mid().to_f64().abs();
            if step_size <= scale * 2f64.powi(-(prec as i32) + 4) {
                break;
            }
        }
        refined.push(z);
    }

    let mut roots = Vec::with_capacity(d);
    for z in &refined {
        let p = horner(coeffs, z);
        let dp = horner(&dcoeffs, z);
        let num = p.abs().mag();
        let den = dp.abs().mig();
        if den <= 0.0 {
            return Err(Error::precision(prec, "isolating roots (vanishing derivative)"));
        }
        let radius = (d as f64 * num / den * (1.0 + 1e-12)).next_up();
        let im_abs = z.im.mid().to_f64_round(Round::Up).abs();
        let real = im_abs <= radius;
        let (im, radius) = if real {
            (Float::new(prec), (radius + im_abs).next_up())
        } else {
            (z.im.mid().clone(), radius)
        };
        roots.push(IsolatedRoot {
            re: z.re.mid().clone(),
            im,
            radius,
            real,
        });
    }

    // inclusion discs must be pairwise disjoint to count one root each
    for i in 0..d {
        for j in i + 1..d {
            let dre = Float::with_val(prec, &roots[i].re - &roots[j].re);
            let dim = Float::with_val(prec, &roots[i].im - &roots[j].im);
            let dist = Float::with_val(prec, dre.hypot(&dim)).to_f64_round(Round::Down);
            if dist <= roots[i].radius + roots[j].radius {
                return Err(Error::precision(prec, "isolating roots (overlapping discs)"));
            }
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&c| Integer::from(c)).collect()
    }

    #[test]
    fn detects_linear_and_quadratic_factors() {
        // x^2 - 1
        assert!(find_factor(&ints(&[-1, 0, 1])).is_some());
        // (x^2 + 1)(x^2 - 3) = x^4 - 2x^2 - 3
        let f = find_factor(&ints(&[-3, 0, -2, 0, 1])).unwrap();
        assert_eq!(f.len(), 3);
        // (x - 2)^2
        assert!(find_factor(&ints(&[4, -4, 1])).is_some());
        assert!(find_factor(&ints(&[-2, 0, 1])).is_none());
        assert!(find_factor(&ints(&[-1, -3, 0, 1])).is_none());
        assert!(find_factor(&ints(&[1, 1, 1, 1, 1])).is_none());
    }

    #[test]
    fn isolates_cubic_roots() {
        let roots = isolate_roots(&ints(&[-1, -3, 0, 1]), 256).unwrap();
        assert!(roots.iter().all(|r| r.real));
        assert!(roots.iter().all(|r| r.radius < 1e-60));
    }

    #[test]
    fn isolates_complex_pair() {
        let roots = isolate_roots(&ints(&[1, 0, 1]), 128).unwrap();
        assert!(roots.iter().all(|r| !r.real));
    }
}
