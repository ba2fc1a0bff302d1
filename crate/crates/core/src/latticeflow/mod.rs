//! Rank-2 `O_K`-modules `τ(O_K²)g` inside `K_S²`, their heights, the diagonal
//! flows acting on them and short-vector search.

mod enumerate;
mod lll;
pub(crate) mod renorm;

use std::io::Write;

use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::ball::{CBall, RBall};
use crate::error::{Error, Result};
use crate::numberfield::{AlgebraicInteger, NumberField};

pub use enumerate::{shortest_vectors, systole, Enumeration, ShortVectors, Systole};
pub use renorm::{best_unit_exponents, unit_renormalize};

/// A point of `K_S`: one (possibly complex) value per place.
pub type PointKS = Vec<CBall>;

/// Per-place 2x2 matrices; an element of `SL_2(K_S)` when every block has
/// determinant one.
#[derive(Clone, Debug)]
pub struct GroupElement {
    blocks: Vec<[[CBall; 2]; 2]>,
}

impl GroupElement {
    pub fn identity(places: usize, prec: u32) -> Self {
        let id = [
            [CBall::one(prec), CBall::zero(prec)],
            [CBall::zero(prec), CBall::one(prec)],
        ];
        GroupElement {
            blocks: vec![id; places],
        }
    }

    pub fn from_blocks(blocks: Vec<[[CBall; 2]; 2]>) -> Self {
        GroupElement { blocks }
    }

    /// Real blocks from `f64` entries, one `[[a, b], [c, d]]` per place.
    pub fn from_f64(blocks: &[[[f64; 2]; 2]], prec: u32) -> Self {
        GroupElement {
            blocks: blocks
                .iter()
                .map(|m| {
                    [
                        [
                            CBall::real(RBall::from_f64(prec, m[0][0])),
                            CBall::real(RBall::from_f64(prec, m[0][1])),
                        ],
                        [
                            CBall::real(RBall::from_f64(prec, m[1][0])),
                            CBall::real(RBall::from_f64(prec, m[1][1])),
                        ],
                    ]
                })
                .collect(),
        }
    }

    pub fn places(&self) -> usize {
        self.blocks.len()
    }

    pub fn prec(&self) -> u32 {
        self.blocks[0][0][0].prec()
    }

    pub fn block(&self, i: usize) -> &[[CBall; 2]; 2] {
        &self.blocks[i]
    }

    /// Right multiplication `self · other`.
    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(x, y)| {
                    let e = |i: usize, j: usize| x[i][0].mul(&y[0][j]).add(&x[i][1].mul(&y[1][j]));
                    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
                })
                .collect(),
        }
    }

    /// Inverse of a determinant-one element (the adjugate).
    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            blocks: self
                .blocks
                .iter()
                .map(|m| {
                    [
                        [m[1][1].clone(), m[0][1].neg()],
                        [m[1][0].neg(), m[0][0].clone()],
                    ]
                })
                .collect(),
        }
    }

    pub fn det(&self, i: usize) -> CBall {
        let m = &self.blocks[i];
        m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0]))
    }

    /// Upper bound on `max_σ |det g^σ - 1|`.
    pub fn det_residual(&self) -> f64 {
        let prec = self.prec();
        (0..self.places())
            .map(|i| self.det(i).sub(&CBall::one(prec)).abs().mag())
            .fold(0.0, f64::max)
    }

    /// Upper bound on the largest per-place operator norm (Frobenius bound).
    pub fn operator_norm_bound(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| {
                m.iter()
                    .flatten()
                    .map(|z| z.abs().mag().powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Row vector times block: `(v_1, v_2) g^σ`.
    pub fn apply(&self, i: usize, v: &[CBall; 2]) -> [CBall; 2] {
        let m = &self.blocks[i];
        [
            v[0].mul(&m[0][0]).add(&v[1].mul(&m[1][0])),
            v[0].mul(&m[0][1]).add(&v[1].mul(&m[1][1])),
        ]
    }
}

/// Weights `r_σ` of the flow `g(r)_t = diag(e^{-r_σ t}, e^{r_σ t})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    weights: Vec<f64>,
    weighted: bool,
}

impl FlowSpec {
    /// The unnormalized flow with exponent `t` at every place.
    pub fn equal(places: usize) -> Self {
        FlowSpec {
            weights: vec![1.0; places],
            weighted: false,
        }
    }

    /// Weighted flow; weights must be nonnegative and sum to one.
    pub fn weighted(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput(format!(
                "weights must be nonnegative: {weights:?}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        Ok(FlowSpec {
            weights: weights.to_vec(),
            weighted: true,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn r_max(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }

    /// First place of maximal weight.
    pub fn fastest_place(&self) -> usize {
        let r = self.r_max();
        self.weights.iter().position(|&w| w == r).unwrap_or(0)
    }

    /// Some weight vanishes, so at least one place does not move.
    pub fn has_zero_weight(&self) -> bool {
        self.weights.contains(&0.0)
    }
}

/// `g(r)_t` at the given working precision.
pub fn flow_element(spec: &FlowSpec, t: f64, prec: u32) -> GroupElement {
    let t = RBall::from_f64(prec, t);
    flow_element_ball(spec, &t)
}

pub fn flow_element_ball(spec: &FlowSpec, t: &RBall) -> GroupElement {
    let prec = t.prec();
    GroupElement {
        blocks: spec
            .weights
            .iter()
            .map(|&r| {
                let e = t.mul(&RBall::from_f64(prec, r)).exp();
                let einv = t.mul(&RBall::from_f64(prec, -r)).exp();
                [
                    [CBall::real(einv), CBall::zero(prec)],
                    [CBall::zero(prec), CBall::real(e)],
                ]
            })
            .collect(),
    }
}

/// `Φ = [[1, φ_σ], [0, 1]]` per place.
pub fn unipotent(values: &[CBall]) -> GroupElement {
    GroupElement {
        blocks: values
            .iter()
            .map(|phi| {
                let prec = phi.prec();
                [
                    [CBall::one(prec), phi.clone()],
                    [CBall::zero(prec), CBall::one(prec)],
                ]
            })
            .collect(),
    }
}

/// `g_t^{-1} Φ g_t = [[1, φ_σ e^{2 r_σ t}], [0, 1]]`.
pub fn conjugated_unipotent(spec: &FlowSpec, t: f64, delta: &[CBall]) -> GroupElement {
    let scaled: Vec<CBall> = delta
        .iter()
        .zip(&spec.weights)
        .map(|(phi, &r)| {
            let prec = phi.prec();
            let s = RBall::from_f64(prec, 2.0 * r)
                .mul(&RBall::from_f64(prec, t))
                .exp();
            phi.mul_real(&s)
        })
        .collect();
    unipotent(&scaled)
}

/// `(a, b) ∈ O_K²` with its embedding `τ(a, b)g` and height.
#[derive(Clone, Debug)]
pub struct ModuleVector {
    a: AlgebraicInteger,
    b: AlgebraicInteger,
    embedded: Vec<[CBall; 2]>,
    height: RBall,
}

impl ModuleVector {
    pub fn new(field: &NumberField, a: AlgebraicInteger, b: AlgebraicInteger, g: &GroupElement) -> Self {
        let prec = g.prec();
        let embedded: Vec<[CBall; 2]> = field
            .places()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let v = [field.embed(&a, p, prec), field.embed(&b, p, prec)];
                g.apply(i, &v)
            })
            .collect();
        Self::from_parts(field, a, b, embedded)
    }

    pub(crate) fn from_parts(
        field: &NumberField,
        a: AlgebraicInteger,
        b: AlgebraicInteger,
        embedded: Vec<[CBall; 2]>,
    ) -> Self {
        let prec = embedded[0][0].prec();
        let mut height = RBall::one(prec);
        for (v, p) in embedded.iter().zip(field.places()) {
            let n = v[0].abs().max(&v[1].abs());
            height = height.mul(&n.powi(p.exponent()));
        }
        ModuleVector {
            a,
            b,
            embedded,
            height,
        }
    }

    pub fn a(&self) -> &AlgebraicInteger {
        &self.a
    }

    pub fn b(&self) -> &AlgebraicInteger {
        &self.b
    }

    pub fn embedded(&self) -> &[[CBall; 2]] {
        &self.embedded
    }

    pub fn component(&self, place: usize) -> &[CBall; 2] {
        &self.embedded[place]
    }

    /// `H(v) = Π_σ ‖v^σ‖^{e_σ}` with the sup norm at each place.
    pub fn height(&self) -> &RBall {
        &self.height
    }

    /// `‖v^σ‖ = max(|v_1^σ|, |v_2^σ|)`.
    pub fn place_norm(&self, place: usize) -> RBall {
        let v = &self.embedded[place];
        v[0].abs().max(&v[1].abs())
    }

    /// `‖v‖ = max_σ ‖v^σ‖`.
    pub fn sup_norm(&self) -> RBall {
        (1..self.embedded.len()).fold(self.place_norm(0), |m, i| m.max(&self.place_norm(i)))
    }

    /// Same integral part, embedded under another group element.
    pub fn reembed(&self, field: &NumberField, g: &GroupElement) -> Self {
        Self::new(field, self.a.clone(), self.b.clone(), g)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

/// Certified enclosure of `H(v)`.
pub fn height(v: &ModuleVector) -> RBall {
    v.height.clone()
}

/// `Kv = Kw`, decided exactly by `a_1 b_2 - b_1 a_2 = 0`.
pub fn kspan_equal(field: &NumberField, v: &ModuleVector, w: &ModuleVector) -> bool {
    let x = field.mul(&v.a, &w.b);
    let y = field.mul(&v.b, &w.a);
    x.sub(&y).is_zero()
}

/// `Π_σ |det(v^σ; w^σ)|^{e_σ}`, which equals `|N(a_1 b_2 - b_1 a_2)|`.
pub fn determinant_product(field: &NumberField, v: &ModuleVector, w: &ModuleVector) -> RBall {
    let prec = v.height.prec();
    let mut acc = RBall::one(prec);
    for (i, p) in field.places().iter().enumerate() {
        let x = &v.embedded[i];
        let y = &w.embedded[i];
        let det = x[0].mul(&y[1]).sub(&x[1].mul(&y[0])).abs();
        acc = acc.mul(&det.powi(p.exponent()));
    }
    acc
}

/// Real coordinates of a vector in `R^{2d}`: `(v_1, v_2)` at a real place,
/// `(Re v_1, Im v_1, Re v_2, Im v_2)` at a complex place.
pub(crate) fn real_coordinates(field: &NumberField, embedded: &[[CBall; 2]]) -> Vec<RBall> {
    let mut out = Vec::with_capacity(2 * field.degree());
    for (v, p) in embedded.iter().zip(field.places()) {
        if p.is_real() {
            out.push(v[0].re.clone());
            out.push(v[1].re.clone());
        } else {
            out.push(v[0].re.clone());
            out.push(v[0].im.clone());
            out.push(v[1].re.clone());
            out.push(v[1].im.clone());
        }
    }
    out
}

/// The `2d x 2d` real basis of `τ(O_K²)g`: rows are the images of
/// `(ξ^i, 0)` for `i < d` followed by `(0, ξ^i)`.
pub fn restriction_matrix(field: &NumberField, g: &GroupElement) -> Vec<Vec<RBall>> {
    let d = field.degree();
    let mut rows = Vec::with_capacity(2 * d);
    for slot in 0..2 {
        for i in 0..d {
            let mut e = vec![Integer::new(); d];
            e[i] = Integer::from(1);
            let unit = AlgebraicInteger::new(e);
            let zero = field.zero();
            let (a, b) = if slot == 0 { (unit, zero) } else { (zero, unit) };
            let v = ModuleVector::new(field, a, b, g);
            rows.push(real_coordinates(field, &v.embedded));
        }
    }
    rows
}

/// Determinant of [`restriction_matrix`] by Gaussian elimination on the
/// midpoints.
pub fn restriction_determinant(field: &NumberField, g: &GroupElement) -> f64 {
    let m = restriction_matrix(field, g);
    let prec = g.prec() + 64;
    let mut a: Vec<Vec<Float>> = m
        .iter()
        .map(|row| row.iter().map(|x| Float::with_val(prec, x.mid())).collect())
        .collect();
    let n = a.len();
    let mut det = Float::with_val(prec, 1);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| {
                a[x][k]
                    .clone()
                    .abs()
                    .partial_cmp(&a[y][k].clone().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[p][k].is_zero() {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= &a[k][k];
        for i in k + 1..n {
            let f = Float::with_val(prec, &a[i][k] / &a[k][k]);
            for j in k..n {
                let t = Float::with_val(prec, &f * &a[k][j]);
                a[i][j] -= t;
            }
        }
    }
    det.to_f64()
}

/// One row of a trajectory profile.
#[derive(Clone, Debug)]
pub struct ProfilePoint {
    pub t: f64,
    pub systole: RBall,
    pub min_norm: f64,
    pub a: AlgebraicInteger,
    pub b: AlgebraicInteger,
    pub certified: bool,
}

/// Systole of `g · g(r)_t` along a time grid.
pub fn trajectory_profile(
    field: &NumberField,
    g: &GroupElement,
    spec: &FlowSpec,
    t_grid: &[f64],
    mode: Enumeration,
) -> Result<Vec<ProfilePoint>> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("time grid must be increasing".into()));
    }
    let prec = g.prec();
    t_grid
        .iter()
        .map(|&t| {
            let gt = g.mul(&flow_element(spec, t, prec));
            let s = systole(field, &gt, mode)?;
            Ok(ProfilePoint {
                t,
                systole: s.height.clone(),
                min_norm: s.min_norm,
                a: s.vector.a().clone(),
                b: s.vector.b().clone(),
                certified: s.certified,
            })
        })
        .collect()
}

fn join_coeffs(x: &AlgebraicInteger) -> String {
    x.coeffs()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// CSV with columns `t, systole, achieving_a, achieving_b`.
pub fn write_trajectory_csv(mut out: impl Write, points: &[ProfilePoint]) -> Result<()> {
    writeln!(out, "t,systole,achieving_a,achieving_b")?;
    for p in points {
        writeln!(
            out,
            "{:.17e},{:.17e},{},{}",
            p.t,
            p.systole.to_f64(),
            join_coeffs(&p.a),
            join_coeffs(&p.b)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::DEFAULT_PRECISION as P;

    fn sqrt2() -> NumberField {
        NumberField::q_sqrt2()
    }

    #[test]
    fn height_examples() {
        let k = sqrt2();
        let id = GroupElement::identity(2, P);
        let v = ModuleVector::new(&k, k.one(), k.one(), &id);
        assert!(v.height().contains_f64(1.0));
        let w = ModuleVector::new(&k, k.element(&[0, 1]).unwrap(), k.zero(), &id);
        assert!((w.height().to_f64() - 2.0).abs() < 1e-30);
        let g = flow_element(&FlowSpec::equal(2), std::f64::consts::LN_2, P);
        let u = ModuleVector::new(&k, k.one(), k.zero(), &g);
        assert!((u.height().to_f64() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn flow_examples() {
        let g = flow_element(&FlowSpec::equal(2), 0.0, P);
        assert!(g.block(0)[0][0].re.is_exact());
        assert_eq!(g.block(1)[1][1].re.to_f64(), 1.0);
        let spec = FlowSpec::weighted(&[0.5, 0.5]).unwrap();
        let g = flow_element(&spec, 2.0 * std::f64::consts::LN_2, P);
        for i in 0..2 {
            assert!((g.block(i)[0][0].re.to_f64() - 0.5).abs() < 1e-15);
            assert!((g.block(i)[1][1].re.to_f64() - 2.0).abs() < 1e-15);
        }
        let spec = FlowSpec::weighted(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let g = flow_element(&spec, 3.0, P);
        assert!((g.block(0)[1][1].re.to_f64() - 2f64.exp()).abs() < 1e-12);
        assert!((g.block(1)[0][0].re.to_f64() - (-1f64).exp()).abs() < 1e-12);
        assert!(g.det_residual() < 1e-30);
    }

    #[test]
    fn weights_are_validated() {
        assert!(FlowSpec::weighted(&[0.5, 0.6]).is_err());
        assert!(FlowSpec::weighted(&[-0.5, 1.5]).is_err());
        let s = FlowSpec::weighted(&[1.0, 0.0]).unwrap();
        assert!(s.has_zero_weight());
        assert_eq!(FlowSpec::weighted(&[1.0 / 3.0, 2.0 / 3.0]).unwrap().fastest_place(), 1);
    }

    #[test]
    fn unipotent_examples() {
        let zero = vec![CBall::zero(P); 2];
        let u = unipotent(&zero);
        assert!(u.block(0)[0][1].contains_zero());
        let x = CBall::from_i64(P, 3);
        let y = CBall::from_i64(P, 4);
        let prod = unipotent(&[x.clone(), x.clone()]).mul(&unipotent(&[y.clone(), y.clone()]));
        assert_eq!(prod.block(1)[0][1].re.to_f64(), 7.0);
        let c = conjugated_unipotent(&FlowSpec::equal(2), 0.0, &[x.clone(), x]);
        assert_eq!(c.block(0)[0][1].re.to_f64(), 3.0);
    }

    #[test]
    fn conjugation_matches_formula() {
        let spec = FlowSpec::equal(2);
        let t = 1.3;
        let phi = vec![CBall::real(RBall::from_f64(P, 0.25)); 2];
        let g = flow_element(&spec, t, P);
        let lhs = g.inverse().mul(&unipotent(&phi)).mul(&g);
        let rhs = conjugated_unipotent(&spec, t, &phi);
        for i in 0..2 {
            for r in 0..2 {
                for c in 0..2 {
                    let d = lhs.block(i)[r][c].sub(&rhs.block(i)[r][c]).abs().mag();
                    assert!(d < 1e-30);
                }
            }
        }
    }

    #[test]
    fn kspan_examples() {
        let k = sqrt2();
        let id = GroupElement::identity(2, P);
        let mk = |a: &[i64], b: &[i64]| {
            ModuleVector::new(&k, k.element(a).unwrap(), k.element(b).unwrap(), &id)
        };
        assert!(kspan_equal(&k, &mk(&[1, 0], &[2, 0]), &mk(&[2, 0], &[4, 0])));
        assert!(!kspan_equal(&k, &mk(&[1, 0], &[0, 0]), &mk(&[0, 0], &[1, 0])));
        assert!(kspan_equal(&k, &mk(&[1, 0], &[0, 1]), &mk(&[0, 1], &[2, 0])));
    }

    #[test]
    fn restriction_matrix_identity_and_invariance() {
        let k = sqrt2();
        let id = GroupElement::identity(2, P);
        let m = restriction_matrix(&k, &id);
        assert_eq!(m.len(), 4);
        // row of (1, 0): (1, 0) at both real places
        assert_eq!(m[0][0].to_f64(), 1.0);
        assert_eq!(m[0][1].to_f64(), 0.0);
        assert_eq!(m[0][2].to_f64(), 1.0);
        let d0 = restriction_determinant(&k, &id);
        // |det| = disc(x^2-2) = 8
        assert!((d0.abs() - 8.0).abs() < 1e-20);
        let g = flow_element(&FlowSpec::equal(2), 2.7, P);
        let d1 = restriction_determinant(&k, &id.mul(&g));
        assert!((d1 - d0).abs() < 1e-20);
        let q = NumberField::rationals();
        let m = restriction_matrix(&q, &GroupElement::identity(1, P));
        assert_eq!(m.len(), 2);
        assert!((restriction_determinant(&q, &GroupElement::identity(1, P)) - 1.0).abs() < 1e-30);
    }

    #[test]
    fn csv_has_header_and_semicolon_coefficients() {
        let k = sqrt2();
        let g = GroupElement::identity(2, P);
        let pts =
            trajectory_profile(&k, &g, &FlowSpec::equal(2), &[0.0, 1.0], Enumeration::Box(2)).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &pts).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "t,systole,achieving_a,achieving_b");
        assert!(lines.next().unwrap().contains(';'));
    }
}
