//! Short vectors of `τ(O_K²)g`: an exhaustive coefficient box, or LLL plus
//! Fincke–Pohst inside a radius that unit renormalization makes complete.

use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::ball::{RBall, MAX_PRECISION};
use crate::error::{Error, Result};
use crate::numberfield::{AlgebraicInteger, NumberField, PlaceKind};

use super::{lll, restriction_matrix, GroupElement, ModuleVector};

const MAX_NODES: usize = 3_000_000;
const MAX_RESULTS: usize = 200_000;
/// Relative slack for the `f64` prefilter in front of the ball computations.
const PREFILTER: f64 = 1e-6;

/// How candidate vectors are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Enumeration {
    /// Every `(a, b)` with all coefficients in `[-n, n]`.
    Box(i64),
    /// LLL on the restriction of scalars, then enumeration in a ball large
    /// enough to hold a unit multiple of every vector below the bound.
    Reduced,
}

/// Vectors below a height bound, sorted by height then integral part.
#[derive(Clone, Debug)]
pub struct ShortVectors {
    pub vectors: Vec<ModuleVector>,
    /// Exact threshold ties left undecided at the precision cap (counted as
    /// not below).
    pub unresolved_ties: usize,
    /// Complete up to units and sign (reduced mode, no truncation).
    pub certified: bool,
    pub truncated: bool,
}

/// Minimal height over nonzero module vectors, and minimal sup norm.
#[derive(Clone, Debug)]
pub struct Systole {
    pub vector: ModuleVector,
    pub height: RBall,
    pub norm_vector: ModuleVector,
    pub min_norm: f64,
    pub certified: bool,
    pub truncated: bool,
    pub enumerated: usize,
}

/// A candidate found by the floating-point pass.
struct Candidate {
    coeffs: Vec<Integer>,
    height: f64,
    norm: f64,
}

fn f64_height_and_norm(field: &NumberField, coords: &[f64]) -> (f64, f64) {
    let mut h = 1.0;
    let mut n: f64 = 0.0;
    let mut k = 0;
    for p in field.places() {
        let m = match p.kind() {
            PlaceKind::Real => {
                let m = coords[k].abs().max(coords[k + 1].abs());
                k += 2;
                m
            }
            PlaceKind::Complex => {
                let m = coords[k].hypot(coords[k + 1]).max(coords[k + 2].hypot(coords[k + 3]));
                k += 4;
                m
            }
        };
        n = n.max(m);
        h *= m.powi(p.exponent() as i32);
    }
    (h, n)
}

fn split(field: &NumberField, c: &[Integer]) -> (AlgebraicInteger, AlgebraicInteger) {
    let d = field.degree();
    (
        AlgebraicInteger::new(c[..d].to_vec()),
        AlgebraicInteger::new(c[d..].to_vec()),
    )
}

fn sort_vectors(v: &mut [ModuleVector]) {
    v.sort_by(|x, y| {
        x.height()
            .mid()
            .partial_cmp(y.height().mid())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| (x.a(), x.b()).cmp(&(y.a(), y.b())))
    });
}

/// Certified `H(v) < bound`, with the tie policy at the precision cap.
fn below(v: &ModuleVector, bound: &RBall, unresolved: &mut usize) -> Result<bool> {
    match v.height().lt(bound) {
        Some(x) => Ok(x),
        None if v.height().prec() >= MAX_PRECISION => {
            *unresolved += 1;
            Ok(false)
        }
        None => Err(Error::precision(
            v.height().prec(),
            "comparing a height with its threshold",
        )),
    }
}

/// Every element of the coefficient box `[-n, n]^d`.
fn box_elements(d: usize, n: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![-n; d];
    loop {
        out.push(cur.clone());
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            if cur[i] < n {
                cur[i] += 1;
                break;
            }
            cur[i] = -n;
            i += 1;
        }
    }
}

/// First nonzero coefficient of `(a, b)` is positive.
fn canonical_sign(a: &[i64], b: &[i64]) -> bool {
    a.iter().chain(b).find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Runs the box enumeration, calling `keep` on the `f64` height and norm to
/// select which pairs get a certified ball evaluation.
fn box_pass(
    field: &NumberField,
    g: &GroupElement,
    n: i64,
    mut keep: impl FnMut(f64, f64) -> bool,
) -> Vec<Candidate> {
    let d = field.degree();
    let elems = box_elements(d, n);
    let prec = g.prec();
    // per element and place: (σ(a)g11, σ(a)g12) and (σ(b)g21, σ(b)g22)
    let places = field.places();
    let mut first = Vec::with_capacity(elems.len());
    let mut second = Vec::with_capacity(elems.len());
    for coeffs in &elems {
        let x = AlgebraicInteger::from_i64s(coeffs);
        let mut f = Vec::with_capacity(places.len());
        let mut s2 = Vec::with_capacity(places.len());
        for (i, p) in places.iter().enumerate() {
            let s = field.embed(&x, p, prec);
            let m = g.block(i);
            f.push([s.mul(&m[0][0]), s.mul(&m[0][1])]);
            s2.push([s.mul(&m[1][0]), s.mul(&m[1][1])]);
        }
        first.push(f);
        second.push(s2);
    }
    let mut out = Vec::new();
    for (ia, a) in elems.iter().enumerate() {
        for (ib, b) in elems.iter().enumerate() {
            if !canonical_sign(a, b) {
                continue;
            }
            let mut h = 1.0;
            let mut nrm: f64 = 0.0;
            for (i, p) in places.iter().enumerate() {
                // summing the balls first keeps cancellation exact enough
                let v1 = first[ia][i][0].add(&second[ib][i][0]).to_c64();
                let v2 = first[ia][i][1].add(&second[ib][i][1]).to_c64();
                let m = v1.norm().max(v2.norm());
                nrm = nrm.max(m);
                h *= m.powi(p.exponent() as i32);
            }
            if keep(h, nrm) {
                out.push(Candidate {
                    coeffs: a.iter().chain(b).map(|&c| Integer::from(c)).collect(),
                    height: h,
                    norm: nrm,
                });
            }
        }
    }
    out
}

/// LLL data for the reduced mode: integer transform and the reduced basis
/// in `f64`.
struct ReducedBasis {
    transform: Vec<Vec<Integer>>,
    rows: Vec<Vec<Float>>,
    mu: Vec<Vec<f64>>,
    bstar: Vec<f64>,
    prec: u32,
}

fn reduce(field: &NumberField, g: &GroupElement) -> ReducedBasis {
    let prec = g.prec() + 128;
    let m = restriction_matrix(field, g);
    let rows: Vec<Vec<Float>> = m
        .iter()
        .map(|r| r.iter().map(|x| Float::with_val(prec, x.mid())).collect())
        .collect();
    let red = lll::lll(&rows, prec);
    let n = rows.len();
    let reduced_rows: Vec<Vec<Float>> = red
        .transform
        .iter()
        .map(|u| {
            (0..n)
                .map(|c| {
                    let mut s = Float::new(prec);
                    for (k, uk) in u.iter().enumerate() {
                        if *uk != 0 {
                            s += Float::with_val(prec, uk * &rows[k][c]);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    ReducedBasis {
        transform: red.transform,
        rows: reduced_rows,
        mu: red.mu,
        bstar: red.bstar,
        prec,
    }
}

/// Enumerates lattice points of Euclidean norm at most `radius`, passing
/// integral coordinates, `f64` height and norm to `keep`.
fn reduced_pass(
    field: &NumberField,
    basis: &ReducedBasis,
    radius: f64,
    mut keep: impl FnMut(&[Integer], f64, f64) -> bool,
) -> (Vec<Candidate>, usize, bool) {
    let n = basis.rows.len();
    let mut out = Vec::new();
    let mut count = 0usize;
    let mut overflow = false;
    let stats = lll::enumerate(&basis.mu, &basis.bstar, radius * radius, MAX_NODES, |x| {
        count += 1;
        let coords: Vec<f64> = (0..n)
            .map(|c| {
                let mut s = Float::new(basis.prec);
                for (i, &xi) in x.iter().enumerate() {
                    if xi != 0 {
                        s += Float::with_val(basis.prec, &basis.rows[i][c] * xi);
                    }
                }
                s.to_f64()
            })
            .collect();
        let (h, nrm) = f64_height_and_norm(field, &coords);
        let mut coeffs = vec![Integer::new(); n];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0 {
                for (c, u) in coeffs.iter_mut().zip(&basis.transform[i]) {
                    *c += Integer::from(u * xi);
                }
            }
        }
        if keep(&coeffs, h, nrm) {
            out.push(Candidate {
                coeffs,
                height: h,
                norm: nrm,
            });
            if out.len() > MAX_RESULTS {
                overflow = true;
                return false;
            }
        }
        true
    });
    (out, count, stats.truncated || overflow)
}

/// Radius in `R^{2d}` containing a unit multiple of every vector of height
/// below `bound`.
fn completeness_radius(field: &NumberField, bound: f64) -> f64 {
    let places = field.places().len() as f64;
    let d = field.degree() as f64;
    (2.0 * places).sqrt() * field.renormalization_constant() * bound.powf(1.0 / d) * (1.0 + PREFILTER)
}

/// All nonzero `v = τ(a, b)g` (up to sign) with `H(v) < bound`.
///
/// In box mode the list is exhaustive inside the coefficient box. In reduced
/// mode it is complete up to units: every `O_K`-line direction with a vector
/// below the bound is represented.
pub fn shortest_vectors(
    field: &NumberField,
    g: &GroupElement,
    bound: f64,
    mode: Enumeration,
) -> Result<ShortVectors> {
    if !(bound > 0.0) {
        return Err(Error::InvalidInput(format!("height bound must be positive, got {bound}")));
    }
    let prec = g.prec();
    let cutoff = bound * (1.0 + PREFILTER) + f64::MIN_POSITIVE;
    let (cands, certified, truncated) = match mode {
        Enumeration::Box(n) => {
            if n < 1 {
                return Err(Error::InvalidInput("coefficient box must be at least 1".into()));
            }
            let c = box_pass(field, g, n, |h, _| h < cutoff);
            let t = c.len() > MAX_RESULTS;
            (c, false, t)
        }
        Enumeration::Reduced => {
            let basis = reduce(field, g);
            let r = completeness_radius(field, bound);
            let (c, _, t) = reduced_pass(field, &basis, r, |_, h, _| h < cutoff);
            (c, !t, t)
        }
    };
    let bound_ball = RBall::from_f64(prec, bound);
    let mut unresolved = 0;
    let mut vectors = Vec::new();
    for c in cands {
        let (a, b) = split(field, &c.coeffs);
        let v = ModuleVector::new(field, a, b, g);
        if below(&v, &bound_ball, &mut unresolved)? {
            vectors.push(v);
        }
    }
    sort_vectors(&mut vectors);
    Ok(ShortVectors {
        vectors,
        unresolved_ties: unresolved,
        certified,
        truncated,
    })
}

/// Minimal height and minimal sup norm over nonzero vectors.
pub fn systole(field: &NumberField, g: &GroupElement, mode: Enumeration) -> Result<Systole> {
    let mut best_h = f64::INFINITY;
    let mut best_n = f64::INFINITY;
    let (cands, enumerated, certified, truncated) = match mode {
        Enumeration::Box(n) => {
            if n < 1 {
                return Err(Error::InvalidInput("coefficient box must be at least 1".into()));
            }
            let mut count = 0;
            let c = box_pass(field, g, n, |h, nrm| {
                count += 1;
                let keep = h <= best_h * (1.0 + PREFILTER) || nrm <= best_n * (1.0 + PREFILTER);
                best_h = best_h.min(h);
                best_n = best_n.min(nrm);
                keep
            });
            (c, count, false, false)
        }
        Enumeration::Reduced => {
            let basis = reduce(field, g);
            // upper bound from the reduced basis itself
            for row in &basis.rows {
                let row: Vec<f64> = row.iter().map(|x| x.to_f64()).collect();
                let (h, nrm) = f64_height_and_norm(field, &row);
                best_h = best_h.min(h);
                best_n = best_n.min(nrm);
            }
            let places = field.places().len() as f64;
            let r_height = completeness_radius(field, best_h * (1.0 + PREFILTER));
            let r_norm = (2.0 * places).sqrt() * best_n * (1.0 + PREFILTER);
            let r = r_height.max(r_norm);
            let (c, count, t) = reduced_pass(field, &basis, r, |_, h, nrm| {
                let keep = h <= best_h * (1.0 + PREFILTER) || nrm <= best_n * (1.0 + PREFILTER);
                best_h = best_h.min(h);
                best_n = best_n.min(nrm);
                keep
            });
            (c, count, !t, t)
        }
    };
    let mut by_height: Vec<ModuleVector> = Vec::new();
    let mut by_norm: Vec<ModuleVector> = Vec::new();
    for c in cands {
        let close_h = c.height <= best_h * (1.0 + PREFILTER);
        let close_n = c.norm <= best_n * (1.0 + PREFILTER);
        if !close_h && !close_n {
            continue;
        }
        let (a, b) = split(field, &c.coeffs);
        let v = ModuleVector::new(field, a, b, g);
        if close_h {
            by_height.push(v.clone());
        }
        if close_n {
            by_norm.push(v);
        }
    }
    if by_height.is_empty() {
        return Err(Error::InvalidInput(
            "enumeration produced no nonzero vector".into(),
        ));
    }
    sort_vectors(&mut by_height);
    by_norm.sort_by(|x, y| {
        x.sup_norm()
            .mid()
            .partial_cmp(y.sup_norm().mid())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| (x.a(), x.b()).cmp(&(y.a(), y.b())))
    });
    let vector = by_height.swap_remove(0);
    let norm_vector = by_norm.swap_remove(0);
    Ok(Systole {
        height: vector.height().clone(),
        min_norm: norm_vector.sup_norm().to_f64(),
        vector,
        norm_vector,
        certified,
        truncated,
        enumerated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::{CBall, DEFAULT_PRECISION as P};
    use crate::latticeflow::{flow_element, unipotent, FlowSpec};

    #[test]
    fn identity_module_has_nothing_below_one() {
        let k = NumberField::q_sqrt2();
        let id = GroupElement::identity(2, P);
        let s = shortest_vectors(&k, &id, 0.99, Enumeration::Box(3)).unwrap();
        assert!(s.vectors.is_empty());
        let s = shortest_vectors(&k, &id, 0.99, Enumeration::Reduced).unwrap();
        assert!(s.vectors.is_empty());
        assert!(s.certified);
    }

    #[test]
    fn flowed_module_contains_quarter() {
        let k = NumberField::q_sqrt2();
        let g = flow_element(&FlowSpec::equal(2), std::f64::consts::LN_2, P);
        let s = shortest_vectors(&k, &g, 0.5, Enumeration::Box(2)).unwrap();
        let v = s
            .vectors
            .iter()
            .find(|v| v.a() == &k.one() && v.b().is_zero())
            .unwrap();
        assert!((v.height().to_f64() - 0.25).abs() < 1e-15);
        // unit multiples such as 1 - √2 tie with it
        assert!((s.vectors[0].height().to_f64() - 0.25).abs() < 1e-15);
        let sys = systole(&k, &g, Enumeration::Reduced).unwrap();
        assert!((sys.height.to_f64() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identity_systole_is_one() {
        let k = NumberField::q_sqrt2();
        let id = GroupElement::identity(2, P);
        for mode in [Enumeration::Box(3), Enumeration::Reduced] {
            let s = systole(&k, &id, mode).unwrap();
            assert!((s.height.to_f64() - 1.0).abs() < 1e-30);
        }
    }

    #[test]
    fn counterexample_vector_matches_closed_form() {
        let k = NumberField::cyclic_cubic();
        let x = 0.5;
        let t = 3.0;
        let phi = vec![CBall::zero(P), CBall::zero(P), CBall::real(RBall::from_f64(P, x))];
        let g = unipotent(&phi).mul(&flow_element(&FlowSpec::equal(3), t, P));
        let s = shortest_vectors(&k, &g, 0.03, Enumeration::Box(1)).unwrap();
        let expected = (-2.0 * t).exp() * (-t).exp().max(t.exp() * x);
        assert!(s
            .vectors
            .iter()
            .any(|v| (v.height().to_f64() - expected).abs() < 1e-12));
        assert!((expected - 0.5 * (-3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn reduced_agrees_with_box_on_moderate_elements() {
        let k = NumberField::q_sqrt2();
        let phi = vec![CBall::real(RBall::from_f64(P, 0.3)); 2];
        for t in [0.0, 1.0, 2.5] {
            let g = unipotent(&phi).mul(&flow_element(&FlowSpec::equal(2), t, P));
            let a = systole(&k, &g, Enumeration::Box(5)).unwrap();
            let b = systole(&k, &g, Enumeration::Reduced).unwrap();
            // reduced mode is complete, so never larger than any box value
            assert!(b.height.to_f64() <= a.height.to_f64() * (1.0 + 1e-12), "t={t}");
        }
    }
}
