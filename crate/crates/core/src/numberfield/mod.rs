//! Number fields `K = Q(ξ)` with `O_K = Z[ξ]`: exact element arithmetic in
//! the power basis, certified Galois embeddings, units and the matrices of
//! the multiplication representation.

mod pell;
mod roots;

use std::fmt;
use std::path::Path;

use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::ball::{CBall, RBall, DEFAULT_PRECISION, MAX_PRECISION};
use crate::error::{Error, Result};

pub use pell::{fundamental_unit, quadratic_norm};

/// Precision at which root midpoints are stored. Every working precision up
/// to [`MAX_PRECISION`] is served by rounding these.
const ROOT_PRECISION: u32 = MAX_PRECISION + 128;

/// Monic irreducible integer polynomial `x^d + c_{d-1}x^{d-1} + ... + c_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalPolynomial {
    /// `c_0 .. c_{d-1}`; the leading 1 is implicit.
    coeffs: Vec<Integer>,
}

impl MinimalPolynomial {
    /// Validates irreducibility by trial factorization.
    pub fn new(coeffs: &[i64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPolynomial("degree must be at least 1".into()));
        }
        let poly = MinimalPolynomial {
            coeffs: coeffs.iter().map(|&c| Integer::from(c)).collect(),
        };
        if let Some(f) = roots::find_factor(&poly.full()) {
            return Err(Error::Reducible {
                factor: f.iter().map(|c| c.to_i64().unwrap_or(i64::MAX)).collect(),
            });
        }
        Ok(poly)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    /// Ascending coefficients including the leading 1.
    pub fn full(&self) -> Vec<Integer> {
        let mut v = self.coeffs.clone();
        v.push(Integer::from(1));
        v
    }

    /// Discriminant via the resultant with the derivative (small degree).
    pub fn discriminant(&self) -> Integer {
        let d = self.degree();
        let full = self.full();
        let deriv = roots::derivative(&full);
        let res = resultant(&full, &deriv);
        // disc = (-1)^{d(d-1)/2} res(p, p')
        if (d * (d - 1) / 2) % 2 == 1 {
            -res
        } else {
            res
        }
    }
}

/// Sylvester-matrix resultant via fraction-free elimination.
fn resultant(p: &[Integer], q: &[Integer]) -> Integer {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    if size == 0 {
        return Integer::from(1);
    }
    let mut s = vec![vec![Integer::new(); size]; size];
    for i in 0..n {
        for (j, c) in p.iter().rev().enumerate() {
            s[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in q.iter().rev().enumerate() {
            s[n + i][i + j] = c.clone();
        }
    }
    det_bareiss(s)
}

/// Exact determinant of an integer matrix (Bareiss).
pub fn det_bareiss(mut m: Vec<Vec<Integer>>) -> Integer {
    let n = m.len();
    if n == 0 {
        return Integer::from(1);
    }
    let mut sign = 1;
    let mut prev = Integer::from(1);
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Integer::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = Integer::from(&m[i][j] * &m[k][k]) - Integer::from(&m[i][k] * &m[k][j]);
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Element of `Z[ξ]` in the power basis `1, ξ, …, ξ^{d-1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraicInteger {
    coeffs: Vec<Integer>,
}

impl fmt::Debug for AlgebraicInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>())
    }
}

impl fmt::Display for AlgebraicInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl AlgebraicInteger {
    pub fn new(coeffs: Vec<Integer>) -> Self {
        AlgebraicInteger { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        AlgebraicInteger {
            coeffs: coeffs.iter().map(|&c| Integer::from(c)).collect(),
        }
    }

    pub fn zero(d: usize) -> Self {
        AlgebraicInteger {
            coeffs: vec![Integer::new(); d],
        }
    }

    pub fn one(d: usize) -> Self {
        Self::constant(d, 1)
    }

    pub fn constant(d: usize, c: i64) -> Self {
        let mut z = Self::zero(d);
        z.coeffs[0] = Integer::from(c);
        z
    }

    /// The generator `ξ` (requires `d >= 2`; for `d = 1` this is `-c_0`).
    pub fn generator(field: &NumberField) -> Self {
        let d = field.degree();
        if d == 1 {
            return Self::new(vec![Integer::from(-&field.minpoly.coeffs[0])]);
        }
        let mut z = Self::zero(d);
        z.coeffs[1] = Integer::from(1);
        z
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        AlgebraicInteger {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| Integer::from(a + b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        AlgebraicInteger {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| Integer::from(a - b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        AlgebraicInteger {
            coeffs: self.coeffs.iter().map(|a| Integer::from(-a)).collect(),
        }
    }

    pub fn scale(&self, k: &Integer) -> Self {
        AlgebraicInteger {
            coeffs: self.coeffs.iter().map(|a| Integer::from(a * k)).collect(),
        }
    }

    /// Coefficients as `i64` when they all fit.
    pub fn to_i64s(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(|c| c.to_i64()).collect()
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> Integer {
        self.coeffs
            .iter()
            .map(|c| Integer::from(c.abs_ref()))
            .max()
            .unwrap_or_default()
    }
}

impl Serialize for AlgebraicInteger {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nums: Vec<serde_json::Number> = self
            .coeffs
            .iter()
            .map(|c| c.to_string().parse::<serde_json::Number>().expect("integer literal"))
            .collect();
        nums.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraicInteger {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let nums: Vec<serde_json::Number> = Vec::deserialize(d)?;
        let coeffs = nums
            .iter()
            .map(|n| {
                Integer::from_str_radix(&n.to_string(), 10)
                    .map_err(|e| serde::de::Error::custom(format!("bad integer {n}: {e}")))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(AlgebraicInteger { coeffs })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaceKind {
    Real,
    Complex,
}

/// An archimedean place: a real embedding, or one representative (upper
/// half-plane root) of a conjugate pair of complex embeddings.
#[derive(Clone, Debug)]
pub struct Place {
    index: usize,
    kind: PlaceKind,
    root_re: Float,
    root_im: Float,
    radius: f64,
}

impl Place {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn kind(&self) -> PlaceKind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        self.kind == PlaceKind::Real
    }

    /// `e_σ`: 1 for real places, 2 for complex places.
    pub fn exponent(&self) -> u32 {
        match self.kind {
            PlaceKind::Real => 1,
            PlaceKind::Complex => 2,
        }
    }

    /// Radius of the certified enclosure at storage precision.
    pub fn enclosure_radius(&self) -> f64 {
        self.radius
    }

    /// Enclosure of `σ(ξ)` at the requested precision.
    pub fn root(&self, prec: u32) -> CBall {
        let re = RBall::with_radius(self.root_re.clone(), self.radius).set_prec(prec);
        match self.kind {
            PlaceKind::Real => CBall::real(re),
            PlaceKind::Complex => CBall::new(
                re,
                RBall::with_radius(self.root_im.clone(), self.radius).set_prec(prec),
            ),
        }
    }

    pub fn root_f64(&self) -> (f64, f64) {
        (self.root_re.to_f64(), self.root_im.to_f64())
    }
}

/// JSON field description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldConfig {
    #[serde(default)]
    pub label: String,
    /// `[c_0, …, c_{d-1}]` of the monic minimal polynomial.
    pub minpoly: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Vec<Vec<i64>>>,
    /// Set to `false` when `Z[ξ]` is known not to be the maximal order; such
    /// fields are rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_basis_is_maximal: Option<bool>,
}

impl FieldConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        serde_json::from_str(&text).map_err(|e| {
            Error::Config(format!("{}: {e}", path.as_ref().display()))
        })
    }

    pub fn build(&self) -> Result<NumberField> {
        if self.power_basis_is_maximal == Some(false) {
            return Err(Error::UnsupportedField(
                "Z[ξ] is not the ring of integers; only power-basis orders are supported".into(),
            ));
        }
        let units = self
            .units
            .as_ref()
            .map(|us| us.iter().map(|u| AlgebraicInteger::from_i64s(u)).collect());
        NumberField::new(&self.label, &self.minpoly, units)
    }
}

/// `K = Q(ξ)` with `O_K` taken to be `Z[ξ]`.
#[derive(Clone, Debug)]
pub struct NumberField {
    label: String,
    minpoly: MinimalPolynomial,
    places: Vec<Place>,
    units: Vec<AlgebraicInteger>,
    unit_inverses: Vec<AlgebraicInteger>,
    /// `log|σ(u_i)|` per unit and place.
    unit_logs: Vec<Vec<f64>>,
    /// `log C` for unit renormalization.
    log_renorm_constant: f64,
}

impl NumberField {
    /// Builds the field, isolating roots and computing or validating units.
    pub fn new(label: &str, minpoly: &[i64], units: Option<Vec<AlgebraicInteger>>) -> Result<Self> {
        let minpoly = MinimalPolynomial::new(minpoly)?;
        let d = minpoly.degree();
        let places = compute_places(&minpoly)?;
        let r = places.iter().filter(|p| p.is_real()).count();
        let s = places.len() - r;
        debug_assert_eq!(r + 2 * s, d);
        let rank = r + s - 1;

        let mut field = NumberField {
            label: if label.is_empty() {
                format!("minpoly {:?}", minpoly_i64(&minpoly))
            } else {
                label.to_string()
            },
            minpoly,
            places,
            units: Vec::new(),
            unit_inverses: Vec::new(),
            unit_logs: Vec::new(),
            log_renorm_constant: 0.0,
        };

        let units = match units {
            Some(us) => us,
            None if rank == 0 => Vec::new(),
            None if d == 2 && r == 2 => {
                let c = &field.minpoly.coeffs;
                let (u, v) = pell::fundamental_unit(
                    c[0].to_i64().ok_or(Error::UnitsRequired)?,
                    c[1].to_i64().ok_or(Error::UnitsRequired)?,
                )?;
                vec![AlgebraicInteger::new(vec![u, v])]
            }
            None => return Err(Error::UnitsRequired),
        };
        field.install_units(units)?;
        Ok(field)
    }

    /// `Q(√2)` with unit `1 + √2`.
    pub fn q_sqrt2() -> Self {
        Self::new("Q(sqrt 2)", &[-2, 0], None).expect("x^2 - 2 is valid")
    }

    /// The rationals, as `Q(ξ)` with `ξ` a root of `x`.
    pub fn rationals() -> Self {
        Self::new("Q", &[0], None).expect("x is valid")
    }

    /// Totally real cubic `x^3 - 3x - 1` with units `ξ`, `1 + ξ`.
    pub fn cyclic_cubic() -> Self {
        Self::new(
            "Q(2cos(2pi/9))",
            &[-1, -3, 0],
            Some(vec![
                AlgebraicInteger::from_i64s(&[0, 1, 0]),
                AlgebraicInteger::from_i64s(&[1, 1, 0]),
            ]),
        )
        .expect("x^3 - 3x - 1 with units is valid")
    }

    /// `Q(i)`.
    pub fn gaussian() -> Self {
        Self::new("Q(i)", &[1, 0], None).expect("x^2 + 1 is valid")
    }

    fn install_units(&mut self, units: Vec<AlgebraicInteger>) -> Result<()> {
        let d = self.degree();
        let rank = self.unit_rank();
        if units.len() != rank {
            return Err(Error::InvalidUnits(format!(
                "expected {rank} fundamental units, got {}",
                units.len()
            )));
        }
        let mut inverses = Vec::with_capacity(rank);
        let mut logs = Vec::with_capacity(rank);
        for u in &units {
            if u.degree() != d {
                return Err(Error::InvalidUnits(format!(
                    "unit {u} has {} coordinates, field degree is {d}",
                    u.degree()
                )));
            }
            let n = self.norm(u);
            if Integer::from(n.abs_ref()) != 1 {
                return Err(Error::NotAUnit { norm: n.to_string() });
            }
            inverses.push(self.unit_inverse(u)?);
            let mut row = Vec::with_capacity(self.places.len());
            for place in &self.places {
                let v = self.embed(u, place, DEFAULT_PRECISION).abs().ln();
                row.push(v.to_f64());
            }
            logs.push(row);
        }
        if rank >= 1 {
            // regulator: |det| of the log matrix with one place dropped
            let m: Vec<Vec<f64>> = logs
                .iter()
                .map(|row| {
                    row[..rank]
                        .iter()
                        .zip(&self.places)
                        .map(|(l, p)| l * p.exponent() as f64)
                        .collect()
                })
                .collect();
            let reg = det_f64(m).abs();
            if reg < 1e-9 {
                return Err(Error::InvalidUnits(
                    "units are multiplicatively dependent (regulator vanishes)".into(),
                ));
            }
        }
        self.units = units;
        self.unit_inverses = inverses;
        self.unit_logs = logs;
        self.log_renorm_constant = crate::latticeflow::renorm::log_renormalization_constant(
            &self.unit_logs,
            &self.places,
        );
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn minpoly(&self) -> &MinimalPolynomial {
        &self.minpoly
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree()
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn place(&self, i: usize) -> &Place {
        &self.places[i]
    }

    pub fn real_places(&self) -> usize {
        self.places.iter().filter(|p| p.is_real()).count()
    }

    pub fn complex_places(&self) -> usize {
        self.places.len() - self.real_places()
    }

    pub fn unit_rank(&self) -> usize {
        self.places.len() - 1
    }

    pub fn units(&self) -> &[AlgebraicInteger] {
        &self.units
    }

    pub fn unit_logs(&self) -> &[Vec<f64>] {
        &self.unit_logs
    }

    /// The constant `C` of the unit renormalization bound.
    pub fn renormalization_constant(&self) -> f64 {
        self.log_renorm_constant.exp()
    }

    pub fn log_renormalization_constant(&self) -> f64 {
        self.log_renorm_constant
    }

    pub fn is_real_quadratic(&self) -> bool {
        self.degree() == 2 && self.real_places() == 2
    }

    pub fn zero(&self) -> AlgebraicInteger {
        AlgebraicInteger::zero(self.degree())
    }

    pub fn one(&self) -> AlgebraicInteger {
        AlgebraicInteger::one(self.degree())
    }

    pub fn element(&self, coeffs: &[i64]) -> Result<AlgebraicInteger> {
        if coeffs.len() != self.degree() {
            return Err(Error::InvalidInput(format!(
                "element needs {} coordinates, got {}",
                self.degree(),
                coeffs.len()
            )));
        }
        Ok(AlgebraicInteger::from_i64s(coeffs))
    }

    pub fn add(&self, a: &AlgebraicInteger, b: &AlgebraicInteger) -> AlgebraicInteger {
        a.add(b)
    }

    /// Product reduced modulo the minimal polynomial.
    pub fn mul(&self, a: &AlgebraicInteger, b: &AlgebraicInteger) -> AlgebraicInteger {
        let d = self.degree();
        let mut prod = vec![Integer::new(); 2 * d - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                prod[i + j] += Integer::from(x * y);
            }
        }
        self.reduce(prod)
    }

    fn reduce(&self, mut poly: Vec<Integer>) -> AlgebraicInteger {
        let d = self.degree();
        for k in (d..poly.len()).rev() {
            let c = std::mem::take(&mut poly[k]);
            if c == 0 {
                continue;
            }
            // x^k = x^{k-d} * x^d = -x^{k-d} Σ c_i x^i
            for (i, ci) in self.minpoly.coeffs.iter().enumerate() {
                poly[k - d + i] -= Integer::from(&c * ci);
            }
        }
        poly.truncate(d);
        AlgebraicInteger::new(poly)
    }

    pub fn pow(&self, a: &AlgebraicInteger, k: u32) -> AlgebraicInteger {
        let mut acc = self.one();
        let mut base = a.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Matrix of `x ↦ a·x` in the power basis; column `j` holds `a·ξ^j`.
    pub fn multiplication_matrix(&self, a: &AlgebraicInteger) -> Vec<Vec<Integer>> {
        let d = self.degree();
        let xi = AlgebraicInteger::generator(self);
        let mut cols = Vec::with_capacity(d);
        let mut cur = a.clone();
        for j in 0..d {
            cols.push(cur.clone());
            if j + 1 < d {
                cur = self.mul(&cur, &xi);
            }
        }
        (0..d)
            .map(|i| (0..d).map(|j| cols[j].coeffs[i].clone()).collect())
            .collect()
    }

    /// Characteristic polynomial of `multiplication_matrix(a)`, ascending,
    /// including the leading 1 (Faddeev–LeVerrier, exact).
    pub fn characteristic_polynomial(&self, a: &AlgebraicInteger) -> Vec<Integer> {
        let m = self.multiplication_matrix(a);
        charpoly(&m)
    }

    /// `N_{K/Q}(a)`, exact.
    pub fn norm(&self, a: &AlgebraicInteger) -> Integer {
        let cp = self.characteristic_polynomial(a);
        let d = self.degree();
        if d.is_multiple_of(2) {
            cp[0].clone()
        } else {
            -cp[0].clone()
        }
    }

    /// Trace of `a`.
    pub fn trace(&self, a: &AlgebraicInteger) -> Integer {
        let cp = self.characteristic_polynomial(a);
        -cp[self.degree() - 1].clone()
    }

    fn unit_inverse(&self, u: &AlgebraicInteger) -> Result<AlgebraicInteger> {
        // u^d + c_{d-1}u^{d-1} + … + c_0 = 0 with c_0 = ±1
        let cp = self.characteristic_polynomial(u);
        let c0 = &cp[0];
        if Integer::from(c0.abs_ref()) != 1 {
            return Err(Error::NotAUnit {
                norm: c0.to_string(),
            });
        }
        let d = self.degree();
        let mut acc = self.zero();
        // Horner on u^{d-1} + c_{d-1}u^{d-2} + … + c_1
        for k in (1..=d).rev() {
            acc = self.mul(&acc, u);
            acc = acc.add(&AlgebraicInteger::constant(d, 0).add(&{
                let mut z = self.zero();
                z.coeffs[0] = cp[k].clone();
                z
            }));
        }
        // acc = Σ_{k=1..d} cp[k] u^{k-1}; u * acc = -c_0
        let neg_c0 = Integer::from(-c0);
        // divide by -c_0 = ±1
        Ok(acc.scale(&neg_c0))
    }

    /// `Π u_i^{k_i}` over the fundamental units.
    pub fn unit_power(&self, exponents: &[i64]) -> AlgebraicInteger {
        let mut acc = self.one();
        for (i, &k) in exponents.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let base = if k > 0 {
                &self.units[i]
            } else {
                &self.unit_inverses[i]
            };
            acc = self.mul(&acc, &self.pow(base, k.unsigned_abs() as u32));
        }
        acc
    }

    /// Enclosure of `σ(a)` at the given place.
    pub fn embed(&self, a: &AlgebraicInteger, place: &Place, prec: u32) -> CBall {
        embed_with_root(a, &place.root(prec))
    }

    /// `τ(a) = (σ(a))_σ`.
    pub fn tau(&self, a: &AlgebraicInteger, prec: u32) -> Vec<CBall> {
        self.places.iter().map(|p| self.embed(a, p, prec)).collect()
    }

    /// `τ` applied componentwise to a pair.
    pub fn tau_pair(
        &self,
        a: &AlgebraicInteger,
        b: &AlgebraicInteger,
        prec: u32,
    ) -> Vec<[CBall; 2]> {
        self.places
            .iter()
            .map(|p| [self.embed(a, p, prec), self.embed(b, p, prec)])
            .collect()
    }

    /// All `d` complex embeddings: real places, then each complex place
    /// followed by its conjugate.
    pub fn all_roots(&self, prec: u32) -> Vec<CBall> {
        let mut out = Vec::with_capacity(self.degree());
        for p in &self.places {
            let r = p.root(prec);
            out.push(r.clone());
            if !p.is_real() {
                out.push(r.conj());
            }
        }
        out
    }

    /// `Π_σ |σ(a)|^{e_σ}` in ball arithmetic.
    pub fn norm_from_places(&self, a: &AlgebraicInteger, prec: u32) -> RBall {
        let mut acc = RBall::one(prec);
        for p in &self.places {
            let v = self.embed(a, p, prec).abs();
            acc = acc.mul(&v.powi(p.exponent()));
        }
        acc
    }

    /// `(log|σ(u)|)_σ` for a unit.
    pub fn unit_log_embedding(&self, u: &AlgebraicInteger, prec: u32) -> Result<Vec<RBall>> {
        let n = self.norm(u);
        if Integer::from(n.abs_ref()) != 1 {
            return Err(Error::NotAUnit { norm: n.to_string() });
        }
        Ok(self
            .places
            .iter()
            .map(|p| self.embed(u, p, prec).abs().ln())
            .collect())
    }

    /// Evaluation Vandermonde matrix: row `j` is `(1, ρ_j, …, ρ_j^{d-1})` for
    /// the `j`-th root in [`all_roots`](Self::all_roots) order, so it maps
    /// power-basis coordinates to the vector of all embeddings.
    pub fn vandermonde(&self, prec: u32) -> Vec<Vec<CBall>> {
        let d = self.degree();
        self.all_roots(prec)
            .into_iter()
            .map(|r| {
                let mut row = Vec::with_capacity(d);
                let mut pw = CBall::one(prec);
                for _ in 0..d {
                    row.push(pw.clone());
                    pw = pw.mul(&r);
                }
                row
            })
            .collect()
    }

    /// Inverse of the evaluation Vandermonde matrix (embeddings back to
    /// power-basis coordinates).
    pub fn vandermonde_inverse(&self, prec: u32) -> Result<Vec<Vec<CBall>>> {
        invert_complex(&self.vandermonde(prec), prec)
    }

    /// Max entrywise deviation of `V·T_a·V⁻¹` from `diag(σ(a))` over all `d`
    /// embeddings, as an upper bound.
    pub fn diagonalization_residual(&self, a: &AlgebraicInteger, prec: u32) -> Result<f64> {
        let d = self.degree();
        let v = self.vandermonde(prec);
        let vinv = self.vandermonde_inverse(prec)?;
        let t: Vec<Vec<CBall>> = self
            .multiplication_matrix(a)
            .iter()
            .map(|row| row.iter().map(|c| CBall::from_integer(prec, c)).collect())
            .collect();
        let vt = mat_mul(&v, &t, prec);
        let conj = mat_mul(&vt, &vinv, prec);
        let roots = self.all_roots(prec);
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j {
                    embed_with_root(a, &roots[i])
                } else {
                    CBall::zero(prec)
                };
                let diff = conj[i][j].sub(&target);
                worst = worst.max(diff.abs().mag());
            }
        }
        Ok(worst)
    }

    pub fn to_config(&self) -> FieldConfig {
        FieldConfig {
            label: self.label.clone(),
            minpoly: minpoly_i64(&self.minpoly),
            units: Some(
                self.units
                    .iter()
                    .map(|u| u.to_i64s().unwrap_or_default())
                    .collect(),
            ),
            power_basis_is_maximal: None,
        }
    }
}

fn minpoly_i64(p: &MinimalPolynomial) -> Vec<i64> {
    p.coeffs.iter().map(|c| c.to_i64().unwrap_or(i64::MAX)).collect()
}

pub(crate) fn embed_with_root(a: &AlgebraicInteger, root: &CBall) -> CBall {
    let prec = root.prec();
    let mut acc = CBall::zero(prec);
    for c in a.coeffs.iter().rev() {
        acc = acc.mul(root).add(&CBall::from_integer(prec, c));
    }
    acc
}

fn compute_places(minpoly: &MinimalPolynomial) -> Result<Vec<Place>> {
    let full = minpoly.full();
    let isolated = roots::isolate_roots(&full, ROOT_PRECISION)?;
    let mut reals: Vec<_> = isolated.iter().filter(|r| r.real).cloned().collect();
    let mut complexes: Vec<_> = isolated
        .iter()
        .filter(|r| !r.real && r.im > 0)
        .cloned()
        .collect();
    let lower = isolated.iter().filter(|r| !r.real && r.im < 0).count();
    if lower != complexes.len() || reals.len() + 2 * complexes.len() != minpoly.degree() {
        return Err(Error::precision(
            ROOT_PRECISION,
            "classifying roots into real places and conjugate pairs",
        ));
    }
    reals.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
    complexes.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    let mut places = Vec::new();
    for r in reals {
        places.push(Place {
            index: places.len(),
            kind: PlaceKind::Real,
            root_re: r.re,
            root_im: Float::new(ROOT_PRECISION),
            radius: r.radius,
        });
    }
    for c in complexes {
        places.push(Place {
            index: places.len(),
            kind: PlaceKind::Complex,
            root_re: c.re,
            root_im: c.im,
            radius: c.radius,
        });
    }
    Ok(places)
}

fn charpoly(m: &[Vec<Integer>]) -> Vec<Integer> {
    let n = m.len();
    let mut coeffs = vec![Integer::new(); n + 1];
    coeffs[n] = Integer::from(1);
    let mut mk: Vec<Vec<Integer>> = vec![vec![Integer::new(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![Integer::new(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Integer::new();
                for l in 0..n {
                    s += Integer::from(&m[i][l] * &mk[l][j]);
                }
                next[i][j] = s;
            }
            next[i][i] += &coeffs[n - k + 1];
        }
        mk = next;
        // c_{n-k} = -tr(A M_k) / k
        let mut tr = Integer::new();
        for i in 0..n {
            for l in 0..n {
                tr += Integer::from(&m[i][l] * &mk[l][i]);
            }
        }
        coeffs[n - k] = -(tr / k as u32);
    }
    coeffs
}

fn det_f64(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&a, &b| m[a][k].abs().partial_cmp(&m[b][k].abs()).unwrap())
            .unwrap();
        if m[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

pub(crate) fn mat_mul(a: &[Vec<CBall>], b: &[Vec<CBall>], prec: u32) -> Vec<Vec<CBall>> {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = CBall::zero(prec);
                    for l in 0..inner {
                        s = s.add(&a[i][l].mul(&b[l][j]));
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Gauss–Jordan inverse in complex ball arithmetic.
pub(crate) fn invert_complex(m: &[Vec<CBall>], prec: u32) -> Result<Vec<Vec<CBall>>> {
    let n = m.len();
    let mut a: Vec<Vec<CBall>> = m.to_vec();
    let mut inv: Vec<Vec<CBall>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        CBall::one(prec)
                    } else {
                        CBall::zero(prec)
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| {
                a[x][k]
                    .abs()
                    .to_f64()
                    .partial_cmp(&a[y][k].abs().to_f64())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        a.swap(p, k);
        inv.swap(p, k);
        let pivot = a[k][k].clone();
        if pivot.contains_zero() {
            return Err(Error::precision(prec, "inverting a matrix (singular pivot)"));
        }
        for j in 0..n {
            a[k][j] = a[k][j].div(&pivot);
            inv[k][j] = inv[k][j].div(&pivot);
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[i][k].clone();
            for j in 0..n {
                let t = a[k][j].mul(&f);
                a[i][j] = a[i][j].sub(&t);
                let t = inv[k][j].mul(&f);
                inv[i][j] = inv[i][j].sub(&t);
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_field_has_two_real_places_and_pell_unit() {
        let k = NumberField::q_sqrt2();
        assert_eq!(k.real_places(), 2);
        assert_eq!(k.complex_places(), 0);
        assert_eq!(k.units()[0], AlgebraicInteger::from_i64s(&[1, 1]));
        let r0 = k.place(0).root(128);
        let r1 = k.place(1).root(128);
        assert!((r0.re.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!((r1.re.to_f64() + std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(r0.re.rad() < 1e-30);
    }

    #[test]
    fn gaussian_field_has_one_complex_place() {
        let k = NumberField::gaussian();
        assert_eq!(k.places().len(), 1);
        assert_eq!(k.place(0).kind(), PlaceKind::Complex);
        let r = k.place(0).root(128);
        assert!(r.re.contains_f64(0.0));
        assert!(r.im.contains_f64(1.0));
        assert!(k.units().is_empty());
        assert_eq!(k.unit_rank(), 0);
    }

    #[test]
    fn cubic_roots_match_bisection_oracle() {
        // oracle: bisection on p(x) = x^3 - 3x - 1 in f64
        fn bisect(mut lo: f64, mut hi: f64) -> f64 {
            let p = |x: f64| x * x * x - 3.0 * x - 1.0;
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if p(lo) * p(m) <= 0.0 {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            0.5 * (lo + hi)
        }
        let expected = [bisect(1.0, 2.0), bisect(-1.0, 0.0), bisect(-2.0, -1.0)];
        let k = NumberField::cyclic_cubic();
        assert_eq!(k.real_places(), 3);
        for (p, e) in k.places().iter().zip(expected) {
            assert!((p.root(128).re.to_f64() - e).abs() < 1e-4);
        }
        assert!((expected[0] - 1.8794).abs() < 1e-4);
        assert!((expected[1] + 0.3473).abs() < 1e-4);
        assert!((expected[2] + 1.5321).abs() < 1e-4);
        assert_eq!(k.minpoly().discriminant(), 81);
    }

    #[test]
    fn reducible_polynomials_are_rejected() {
        assert!(matches!(
            NumberField::new("", &[-4, 0], None),
            Err(Error::Reducible { .. })
        ));
        assert!(matches!(
            MinimalPolynomial::new(&[]),
            Err(Error::InvalidPolynomial(_))
        ));
    }

    #[test]
    fn cubic_without_units_needs_config() {
        assert!(matches!(
            NumberField::new("", &[-1, -3, 0], None),
            Err(Error::UnitsRequired)
        ));
    }

    #[test]
    fn non_unit_is_rejected() {
        let r = NumberField::new("", &[-2, 0], Some(vec![AlgebraicInteger::from_i64s(&[3, 1])]));
        assert!(matches!(r, Err(Error::NotAUnit { .. })));
    }

    #[test]
    fn arithmetic_examples() {
        let k = NumberField::q_sqrt2();
        let s = k.element(&[0, 1]).unwrap();
        assert_eq!(k.mul(&s, &s), k.element(&[2, 0]).unwrap());
        let u = k.element(&[1, 1]).unwrap();
        let ui = k.element(&[-1, 1]).unwrap();
        assert_eq!(k.mul(&u, &ui), k.one());
        assert_eq!(k.mul(&u, &k.one()), u);
        assert_eq!(k.norm(&u), -1);
        assert_eq!(k.norm(&k.element(&[3, 1]).unwrap()), 7);
        let c = NumberField::cyclic_cubic();
        assert_eq!(c.norm(&c.element(&[2, 0, 0]).unwrap()), 8);
    }

    #[test]
    fn multiplication_matrix_column_convention() {
        let k = NumberField::q_sqrt2();
        let t = k.multiplication_matrix(&k.element(&[0, 1]).unwrap());
        // (1,0) -> (0,1), (0,1) -> (2,0)
        assert_eq!(t[0][0], 0);
        assert_eq!(t[1][0], 1);
        assert_eq!(t[0][1], 2);
        assert_eq!(t[1][1], 0);
        let id = k.multiplication_matrix(&k.one());
        assert_eq!(id[0][0], 1);
        assert_eq!(id[1][1], 1);
        assert_eq!(id[0][1], 0);
        let ti = k.multiplication_matrix(&k.element(&[1, 1]).unwrap());
        assert_eq!(ti[0][1], 2);
        assert_eq!(ti[0][0], 1);
    }

    #[test]
    fn charpoly_of_generator_is_minpoly() {
        for k in [NumberField::q_sqrt2(), NumberField::cyclic_cubic(), NumberField::gaussian()] {
            let xi = AlgebraicInteger::generator(&k);
            assert_eq!(k.characteristic_polynomial(&xi), k.minpoly().full());
        }
    }

    #[test]
    fn unit_inverse_and_powers() {
        let k = NumberField::q_sqrt2();
        let u3 = k.unit_power(&[3]);
        assert_eq!(u3, k.element(&[7, 5]).unwrap());
        let um3 = k.unit_power(&[-3]);
        assert_eq!(k.mul(&u3, &um3), k.one());
        let c = NumberField::cyclic_cubic();
        let x = c.unit_power(&[2, -1]);
        let y = c.unit_power(&[-2, 1]);
        assert_eq!(c.mul(&x, &y), c.one());
    }

    #[test]
    fn embed_examples() {
        let k = NumberField::q_sqrt2();
        let a = k.element(&[1, 1]).unwrap();
        let t = k.tau(&a, 128);
        assert!((t[0].re.to_f64() - 2.41421356).abs() < 1e-8);
        assert!((t[1].re.to_f64() + 0.41421356).abs() < 1e-8);
        let one = k.tau(&k.one(), 128);
        assert!(one.iter().all(|z| z.re.is_exact() && z.re.to_f64() == 1.0));
    }

    #[test]
    fn unit_log_embedding_examples() {
        let k = NumberField::q_sqrt2();
        let l = k.unit_log_embedding(&k.element(&[1, 1]).unwrap(), 128).unwrap();
        assert!((l[0].to_f64() - 0.88137).abs() < 1e-5);
        assert!((l[1].to_f64() + 0.88137).abs() < 1e-5);
        let z = k.unit_log_embedding(&k.element(&[-1, 0]).unwrap(), 128).unwrap();
        assert!(z.iter().all(|v| v.contains_f64(0.0)));
        assert!(k.unit_log_embedding(&k.element(&[2, 0]).unwrap(), 128).is_err());
    }

    #[test]
    fn diagonalization_residual_is_tiny() {
        let k = NumberField::cyclic_cubic();
        let r = k
            .diagonalization_residual(&k.element(&[3, -2, 5]).unwrap(), 128)
            .unwrap();
        assert!(r < 1e-25, "{r}");
        let g = NumberField::gaussian();
        let r = g.diagonalization_residual(&g.element(&[2, 7]).unwrap(), 128).unwrap();
        assert!(r < 1e-25, "{r}");
    }

    #[test]
    fn field_config_round_trip() {
        let cfg: FieldConfig =
            serde_json::from_str(r#"{"label":"cubic","minpoly":[-1,-3,0],"units":[[0,1,0],[1,1,0]]}"#)
                .unwrap();
        let k = cfg.build().unwrap();
        assert_eq!(k.real_places(), 3);
        let bad: FieldConfig =
            serde_json::from_str(r#"{"minpoly":[-5,0],"power_basis_is_maximal":false}"#).unwrap();
        assert!(matches!(bad.build(), Err(Error::UnsupportedField(_))));
    }

    #[test]
    fn algebraic_integer_json() {
        let a = AlgebraicInteger::new(vec![Integer::from(3), Integer::from(-1) << 80u32]);
        let s = serde_json::to_string(&a).unwrap();
        let b: AlgebraicInteger = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
