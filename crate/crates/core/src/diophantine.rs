//! Approximation quality `max_σ|σ(p) + x^σ σ(q)| · max_σ|σ(q)|`, estimates of
//! the badly-approximable constant, and the trajectory side of the Dani
//! correspondence.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ball::{CBall, RBall};
use crate::error::{Error, Result};
use crate::latticeflow::{systole, unipotent, Enumeration, FlowSpec, GroupElement, PointKS};
use crate::numberfield::{AlgebraicInteger, NumberField};

/// A pair `(p, q)`, `q ≠ 0`, with its approximation quality.
#[derive(Clone, Debug)]
pub struct ApproximationWitness {
    pub p: AlgebraicInteger,
    pub q: AlgebraicInteger,
    pub quality: RBall,
    pub sup_error: RBall,
    pub sup_denominator: RBall,
}

fn max_ball(values: impl Iterator<Item = RBall>) -> RBall {
    values
        .reduce(|m, v| m.max(&v))
        .expect("at least one place")
}

/// Quality of `(p, q)` at `x`. Absolute values are not squared at complex
/// places here, unlike in the height.
pub fn approx_quality(
    field: &NumberField,
    x: &[CBall],
    p: &AlgebraicInteger,
    q: &AlgebraicInteger,
) -> Result<ApproximationWitness> {
    if q.is_zero() {
        return Err(Error::InvalidInput("denominator q must be nonzero".into()));
    }
    check_arity(field, x)?;
    let prec = x[0].prec();
    let sq = field.tau(q, prec);
    let sp = field.tau(p, prec);
    let err = max_ball(
        sp.iter()
            .zip(&sq)
            .zip(x)
            .map(|((p, q), x)| p.add(&x.mul(q)).abs()),
    );
    let den = max_ball(sq.iter().map(|q| q.abs()));
    Ok(ApproximationWitness {
        p: p.clone(),
        q: q.clone(),
        quality: err.mul(&den),
        sup_error: err,
        sup_denominator: den,
    })
}

fn check_arity(field: &NumberField, x: &[CBall]) -> Result<()> {
    if x.len() != field.places().len() {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates, field has {} places",
            x.len(),
            field.places().len()
        )));
    }
    Ok(())
}

/// `t = -½ log c + log max_σ|σ(q)|`.
pub fn dani_time(field: &NumberField, c: f64, q: &AlgebraicInteger) -> Result<f64> {
    if !(c > 0.0) || q.is_zero() {
        return Err(Error::InvalidInput("need c > 0 and q ≠ 0".into()));
    }
    let m = field
        .tau(q, 128)
        .iter()
        .map(|z| z.abs().to_f64())
        .fold(0.0, f64::max);
    Ok(-0.5 * c.ln() + m.ln())
}

/// How the best `p` is searched for each `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PSearch {
    /// Round the inverse Minkowski image of `-x q`, then a ±1 neighborhood.
    Neighborhood,
    /// Every coefficient vector within the given distance of the rounding.
    Exhaustive(i64),
}

/// Report for `bad-check`, `trajectory` and end-of-game verification.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct BadReport {
    /// Per-place midpoints as decimal strings.
    pub x: Vec<String>,
    /// Largest enclosure radius of `x`.
    pub x_radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_q: Option<AlgebraicInteger>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_p: Option<AlgebraicInteger>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_candidates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floor_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounded_proxy: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bridge_checks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bridge_violations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
}

impl BadReport {
    fn for_point(x: &[CBall]) -> Self {
        BadReport {
            x: x
                .iter()
                .map(|z| {
                    if z.is_real() {
                        z.re.mid_string(17)
                    } else {
                        format!("{}{:+}i", z.re.mid_string(17), z.im.to_f64())
                    }
                })
                .collect(),
            x_radius: x.iter().map(|z| z.max_rad()).fold(0.0, f64::max),
            ..Default::default()
        }
    }

    /// Fills the trajectory fields of `self` from another report.
    pub fn merge(mut self, other: BadReport) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            q_bound, c_estimate, best_q, best_p, q_candidates, trajectory_floor, floor_time,
            t_max, step, bounded_proxy, bridge_checks, bridge_violations, certified
        );
        self
    }
}

/// Every coefficient vector in the box `Π [-b_i, b_i]` except zero, with the
/// first nonzero coefficient positive.
fn signed_box(bounds: &[i64]) -> Vec<Vec<i64>> {
    let d = bounds.len();
    let mut out = Vec::new();
    let mut cur: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        if cur.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0) {
            out.push(cur.clone());
        }
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            if cur[i] < bounds[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = -bounds[i];
            i += 1;
        }
    }
}

/// Minimizes the approximation quality over `q ≠ 0` with
/// `max_σ|σ(q)| <= q_bound`.
pub fn bad_constant_estimate(
    field: &NumberField,
    x: &[CBall],
    q_bound: f64,
    search: PSearch,
) -> Result<BadReport> {
    check_arity(field, x)?;
    if !(q_bound >= 1.0) {
        return Err(Error::InvalidInput(format!("q bound must be at least 1, got {q_bound}")));
    }
    let prec = x[0].prec();
    let d = field.degree();
    let vinv = field.vandermonde_inverse(prec)?;
    // |coordinate_i(q)| <= Σ_j |V⁻¹_ij| |ρ_j(q)| <= q_bound · rowsum_i
    let bounds: Vec<i64> = vinv
        .iter()
        .map(|row| {
            let s: f64 = row.iter().map(|z| z.abs().mag()).sum();
            (q_bound * s * (1.0 + 1e-12)).floor() as i64
        })
        .collect();
    let vinv64: Vec<Vec<Complex64>> = vinv
        .iter()
        .map(|row| row.iter().map(|z| z.to_c64()).collect())
        .collect();
    // x at every embedding, conjugated for the second root of a complex pair
    let mut x_all: Vec<Complex64> = Vec::with_capacity(d);
    for (z, p) in x.iter().zip(field.places()) {
        x_all.push(z.to_c64());
        if !p.is_real() {
            x_all.push(z.to_c64().conj());
        }
    }
    let roots64: Vec<Complex64> = field.all_roots(prec).iter().map(|r| r.to_c64()).collect();
    let q_ball = RBall::from_f64(prec, q_bound);

    let mut best: Option<ApproximationWitness> = None;
    let mut count = 0usize;
    for qc in signed_box(&bounds) {
        let q = AlgebraicInteger::from_i64s(&qc);
        let den = max_ball(field.tau(&q, prec).iter().map(|z| z.abs()));
        if den.cmp_certain(&q_ball) == Some(std::cmp::Ordering::Greater) {
            continue;
        }
        count += 1;
        // target embeddings -x ρ_j(q), pulled back to coefficients
        let qe: Vec<Complex64> = roots64
            .iter()
            .map(|r| {
                qc.iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * r + c as f64)
            })
            .collect();
        let target: Vec<Complex64> = qe.iter().zip(&x_all).map(|(q, x)| -(x * q)).collect();
        let center: Vec<i64> = vinv64
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&target)
                    .map(|(a, b)| a * b)
                    .sum::<Complex64>()
                    .re
                    .round() as i64
            })
            .collect();
        let reach = match search {
            PSearch::Neighborhood => 1,
            PSearch::Exhaustive(k) => k.max(1),
        };
        let mut offset = vec![-reach; d];
        loop {
            let pc: Vec<i64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
            let p = AlgebraicInteger::from_i64s(&pc);
            let w = approx_quality(field, x, &p, &q)?;
            let better = match &best {
                None => true,
                Some(b) => match w.quality.mid().partial_cmp(b.quality.mid()) {
                    Some(std::cmp::Ordering::Less) => true,
                    Some(std::cmp::Ordering::Equal) => (&w.q, &w.p) < (&b.q, &b.p),
                    _ => false,
                },
            };
            if better {
                best = Some(w);
            }
            let mut i = 0;
            loop {
                if i == d {
                    break;
                }
                if offset[i] < reach {
                    offset[i] += 1;
                    break;
                }
                offset[i] = -reach;
                i += 1;
            }
            if i == d {
                break;
            }
        }
    }
    let best = best.ok_or_else(|| Error::InvalidInput("no q within the bound".into()))?;
    let mut report = BadReport::for_point(x);
    report.q_bound = Some(q_bound);
    report.c_estimate = Some(best.quality.to_f64());
    report.best_q = Some(best.q);
    report.best_p = Some(best.p);
    report.q_candidates = Some(count);
    Ok(report)
}

/// Trajectory floor of `τ(O_K²)Φ(x)g_t` on the grid `0, step, …, t_max`,
/// together with the quantitative bridge to approximation quality: a vector
/// of sup norm `c'` at some time with `q ≠ 0` has quality at most `c'²`.
/// The bridge only holds for the equal-weight flow and is skipped otherwise.
pub fn dani_check(
    field: &NumberField,
    x: &[CBall],
    spec: &FlowSpec,
    t_max: f64,
    step: f64,
    mode: Enumeration,
    floor_threshold: f64,
) -> Result<BadReport> {
    check_arity(field, x)?;
    if !(step > 0.0 && step <= 0.25) || !(t_max >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need 0 < step <= 0.25 and t_max >= 0, got step {step}, t_max {t_max}"
        )));
    }
    let prec = x[0].prec();
    let base: GroupElement = unipotent(x);
    let steps = (t_max / step).round() as usize;
    let mut floor = f64::INFINITY;
    let mut floor_time = 0.0;
    let mut certified = true;
    let mut checks = 0;
    let mut violations = 0;
    for i in 0..=steps {
        let t = (i as f64 * step).min(t_max);
        let g = base.mul(&crate::latticeflow::flow_element(spec, t, prec));
        let s = systole(field, &g, mode)?;
        certified &= s.certified;
        let h = s.height.to_f64();
        if h < floor {
            floor = h;
            floor_time = t;
        }
        for v in [&s.norm_vector, &s.vector] {
            if v.a().is_zero() || spec.is_weighted() {
                continue;
            }
            checks += 1;
            let c = v.sup_norm().hi_f64();
            let w = approx_quality(field, x, v.b(), v.a())?;
            if w.quality.lo_f64() > c * c * (1.0 + 1e-9) {
                violations += 1;
            }
        }
    }
    let mut report = BadReport::for_point(x);
    report.trajectory_floor = Some(floor);
    report.floor_time = Some(floor_time);
    report.t_max = Some(t_max);
    report.step = Some(step);
    report.bounded_proxy = Some(floor >= floor_threshold);
    if !spec.is_weighted() {
        report.bridge_checks = Some(checks);
        report.bridge_violations = Some(violations);
    }
    report.certified = Some(certified);
    Ok(report)
}

/// `τ(ω)` as a point of `K_S`.
pub fn field_point(field: &NumberField, omega: &AlgebraicInteger, prec: u32) -> PointKS {
    field.tau(omega, prec)
}

/// A real point with the same coordinate at every place.
pub fn diagonal_point(field: &NumberField, x: &RBall) -> PointKS {
    vec![CBall::real(x.clone()); field.places().len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::DEFAULT_PRECISION as P;

    fn real(v: f64) -> CBall {
        CBall::real(RBall::from_f64(P, v))
    }

    #[test]
    fn quality_examples() {
        let q = NumberField::rationals();
        let w = approx_quality(
            &q,
            &[real(1.5)],
            &AlgebraicInteger::from_i64s(&[-3]),
            &AlgebraicInteger::from_i64s(&[2]),
        )
        .unwrap();
        assert!(w.quality.contains_f64(0.0));
        let k = NumberField::q_sqrt2();
        let x = field_point(&k, &k.element(&[0, 1]).unwrap(), P);
        let w = approx_quality(&k, &x, &k.element(&[0, -1]).unwrap(), &k.one()).unwrap();
        assert!(w.sup_error.contains_f64(0.0));
        let w = approx_quality(&k, &[real(0.5), real(0.5)], &k.zero(), &k.one()).unwrap();
        assert!(w.quality.contains_f64(0.5));
        assert!(approx_quality(&k, &[real(0.5), real(0.5)], &k.one(), &k.zero()).is_err());
    }

    #[test]
    fn dani_time_examples() {
        let k = NumberField::q_sqrt2();
        let t = dani_time(&k, 0.01, &k.element(&[1, 1]).unwrap()).unwrap();
        assert!((t - 3.18396).abs() < 1e-4);
        assert!(dani_time(&k, 1.0, &k.one()).unwrap().abs() < 1e-15);
        assert!((dani_time(&k, (-2f64).exp(), &k.one()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rational_third_is_hit_exactly() {
        let q = NumberField::rationals();
        let x = [CBall::real(RBall::from_ratio(P, 1, 3))];
        let r = bad_constant_estimate(&q, &x, 10.0, PSearch::Neighborhood).unwrap();
        assert!(r.c_estimate.unwrap() < 1e-30);
        assert_eq!(r.best_q.unwrap(), AlgebraicInteger::from_i64s(&[3]));
    }

    #[test]
    fn field_points_have_zero_constant() {
        let k = NumberField::q_sqrt2();
        let x = field_point(&k, &k.element(&[2, -3]).unwrap(), P);
        let r = bad_constant_estimate(&k, &x, 3.0, PSearch::Neighborhood).unwrap();
        assert!(r.c_estimate.unwrap() < 1e-30);
    }

    #[test]
    fn field_point_trajectory_decays() {
        let k = NumberField::q_sqrt2();
        let x = field_point(&k, &k.element(&[0, 1]).unwrap(), P);
        let r = dani_check(&k, &x, &FlowSpec::equal(2), 6.0, 0.25, Enumeration::Reduced, 0.01)
            .unwrap();
        assert!(r.trajectory_floor.unwrap() < 0.01);
        assert_eq!(r.bounded_proxy, Some(false));
        assert_eq!(r.bridge_violations, Some(0));
    }
}
