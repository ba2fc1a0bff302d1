//! Curves `x ↦ (φ_σ(x))_σ` in `K_S`, one real polynomial with rational
//! coefficients per place.

use std::str::FromStr;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::ball::{CBall, RBall};
use crate::error::{Error, Result};
use crate::latticeflow::{FlowSpec, PointKS};
use crate::numberfield::NumberField;

const ROOT_SAMPLES: usize = 4096;

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let num = rug::Integer::from_str(if digits.is_empty() { "0" } else { &digits })
            .map_err(|e| Error::Config(format!("bad coefficient {s:?}: {e}")))?;
        let den: rug::Integer = rug::Integer::u_pow_u(10, frac.len() as u32).into();
        let r = Rational::from((num, den));
        return Ok(if neg { -r } else { r });
    }
    Rational::from_str(s).map_err(|e| Error::Config(format!("bad coefficient {s:?}: {e}")))
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    /// Parses coefficients written as integers, fractions `p/q` or decimals.
    pub fn parse(coeffs: &[impl AsRef<str>]) -> Result<Self> {
        Ok(Self::new(
            coeffs
                .iter()
                .map(|c| parse_rational(c.as_ref()))
                .collect::<Result<_>>()?,
        ))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn derivative(&self) -> Polynomial {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Rational::from(c * i as u32))
                .collect(),
        )
    }

    pub fn eval(&self, x: &RBall) -> RBall {
        let prec = x.prec();
        let mut acc = RBall::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&RBall::from_rational(prec, c));
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    /// Enclosure of `{p(x) : lo <= x <= hi}`.
    pub fn range(&self, lo: &Float, hi: &Float, prec: u32) -> RBall {
        const PIECES: u32 = 8;
        let width = Float::with_val(prec, hi - lo);
        let mut out: Option<RBall> = None;
        for k in 0..PIECES {
            let a = Float::with_val(prec, lo + Float::with_val(prec, &width * k) / PIECES);
            let b = if k + 1 == PIECES {
                hi.clone()
            } else {
                Float::with_val(prec, lo + Float::with_val(prec, &width * (k + 1)) / PIECES)
            };
            let piece = self.eval(&RBall::from_bounds(prec, &a, &b));
            out = Some(match out {
                None => piece,
                Some(o) => o.union(&piece),
            });
        }
        out.expect("at least one piece")
    }

    /// Approximate real roots in `[lo, hi]`, including tangential ones.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.coeffs.is_empty() {
            return vec![lo];
        }
        if self.is_constant() {
            return Vec::new();
        }
        let n = ROOT_SAMPLES;
        let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| self.eval_f64(x)).collect();
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max);
        let mut roots = Vec::new();
        for i in 0..n {
            let (mut a, mut b) = (xs[i], xs[i + 1]);
            let (fa, fb) = (ys[i], ys[i + 1]);
            if fa == 0.0 {
                roots.push(a);
            } else if fa * fb < 0.0 {
                let mut fa = fa;
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let fm = self.eval_f64(m);
                    if fa * fm <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                        fa = fm;
                    }
                }
                roots.push(0.5 * (a + b));
            } else if i > 0
                && ys[i].abs() < ys[i - 1].abs()
                && ys[i].abs() <= ys[i + 1].abs()
                && ys[i].abs() < 1e-9 * scale.max(1.0)
            {
                roots.push(xs[i]);
            }
        }
        if ys[n] == 0.0 {
            roots.push(xs[n]);
        }
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        roots
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<serde_json::Value>::deserialize(d)?;
        let text = raw
            .into_iter()
            .map(|c| match c {
                serde_json::Value::Number(n) => Ok(n.to_string()),
                serde_json::Value::String(s) => Ok(s),
                other => Err(serde::de::Error::custom(format!("bad coefficient {other}"))),
            })
            .collect::<std::result::Result<Vec<String>, D::Error>>()?;
        Polynomial::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Serialized form of a [`Curve`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveConfig {
    pub components: Vec<Polynomial>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active: Option<Vec<usize>>,
}

/// Per-place component functions and the active set `S'`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CurveConfig", into = "CurveConfig")]
pub struct Curve {
    components: Vec<Polynomial>,
    derivatives: Vec<Polynomial>,
    active: Vec<usize>,
}

impl TryFrom<CurveConfig> for Curve {
    type Error = Error;
    fn try_from(c: CurveConfig) -> Result<Self> {
        Curve::new(c.components, c.active)
    }
}

impl From<Curve> for CurveConfig {
    fn from(c: Curve) -> Self {
        CurveConfig {
            components: c.components,
            active: Some(c.active),
        }
    }
}

impl Curve {
    /// The active set defaults to the places with a nonconstant component.
    pub fn new(components: Vec<Polynomial>, active: Option<Vec<usize>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("curve needs at least one component".into()));
        }
        let active = match active {
            Some(mut a) => {
                a.sort_unstable();
                a.dedup();
                if let Some(&i) = a.iter().find(|&&i| i >= components.len()) {
                    return Err(Error::InvalidInput(format!("active place {i} out of range")));
                }
                if let Some(&i) = a.iter().find(|&&i| components[i].is_constant()) {
                    return Err(Error::InvalidInput(format!(
                        "active place {i} has a constant component"
                    )));
                }
                a
            }
            None => (0..components.len())
                .filter(|&i| !components[i].is_constant())
                .collect(),
        };
        let derivatives = components.iter().map(|p| p.derivative()).collect();
        Ok(Curve {
            components,
            derivatives,
            active,
        })
    }

    /// `φ_σ(x) = a_σ x`.
    pub fn linear(slopes: &[i64]) -> Self {
        Self::new(
            slopes.iter().map(|&a| Polynomial::from_i64s(&[0, a])).collect(),
            None,
        )
        .expect("nonempty slopes")
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn derivative(&self, place: usize) -> &Polynomial {
        &self.derivatives[place]
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, place: usize) -> bool {
        self.active.contains(&place)
    }

    pub fn is_linear(&self) -> bool {
        self.components.iter().all(|p| p.degree() <= 1)
    }

    /// `φ(x)` as a point of `K_S`.
    pub fn point(&self, x: &RBall) -> PointKS {
        self.components
            .iter()
            .map(|p| CBall::real(p.eval(x)))
            .collect()
    }

    /// Enclosure of `φ'_σ` over `[lo, hi]`.
    pub fn derivative_range(&self, place: usize, lo: &Float, hi: &Float, prec: u32) -> RBall {
        self.derivatives[place].range(lo, hi, prec)
    }

    /// Approximate critical points of `φ_σ` in `[lo, hi]`.
    pub fn critical_points(&self, place: usize, lo: f64, hi: f64) -> Vec<f64> {
        self.derivatives[place].real_roots_in(lo, hi)
    }

    /// `Σ_{σ ∈ S'} e_σ`.
    pub fn active_weight(&self, field: &NumberField) -> u32 {
        self.active
            .iter()
            .map(|&i| field.place(i).exponent())
            .sum()
    }

    /// Checks the arity against `field` and returns the reason the winning
    /// hypothesis fails, if it does.
    pub fn hypothesis(&self, field: &NumberField, spec: &FlowSpec) -> Result<Option<String>> {
        let n = field.places().len();
        if self.components.len() != n || spec.weights().len() != n {
            return Err(Error::InvalidInput(format!(
                "curve has {} components and flow {} weights, field has {n} places",
                self.components.len(),
                spec.weights().len()
            )));
        }
        if spec.is_weighted() {
            if !field.is_real_quadratic() {
                return Ok(Some("weighted flows are supported for real quadratic fields".into()));
            }
            if spec.has_zero_weight() {
                return Ok(Some("a weight is zero".into()));
            }
            if self.active.len() != n {
                return Ok(Some("every place must be active for a weighted flow".into()));
            }
            return Ok(None);
        }
        let need = field.degree() as u32 / 2;
        let have = self.active_weight(field);
        Ok((have <= need).then(|| {
            format!("active places weigh {have}, need more than {need}")
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::DEFAULT_PRECISION as P;

    #[test]
    fn parsing_and_evaluation() {
        let p = Polynomial::parse(&["1/2", "-0.25", "3"]).unwrap();
        assert_eq!(p.degree(), 2);
        let y = p.eval(&RBall::from_f64(P, 2.0));
        assert!(y.contains_f64(0.5 - 0.5 + 12.0));
        assert_eq!(p.derivative(), Polynomial::parse(&["-1/4", "6"]).unwrap());
        let json: Polynomial = serde_json::from_str(r#"[0, "1/3", 0.5]"#).unwrap();
        assert_eq!(json.coeffs()[1], Rational::from((1, 3)));
        assert!(Polynomial::parse(&["x"]).is_err());
    }

    #[test]
    fn range_encloses_samples() {
        let p = Polynomial::from_i64s(&[0, -1, 0, 1]);
        let lo = Float::with_val(P, -1.0);
        let hi = Float::with_val(P, 1.5);
        let r = p.range(&lo, &hi, P);
        for i in 0..=100 {
            let x = -1.0 + 2.5 * i as f64 / 100.0;
            assert!(r.contains_f64(p.eval_f64(x)));
        }
    }

    #[test]
    fn critical_points_of_cubic() {
        let c = Curve::new(vec![Polynomial::from_i64s(&[0, -1, 0, 1])], None).unwrap();
        let cp = c.critical_points(0, -1.0, 1.0);
        let r = 1.0 / 3f64.sqrt();
        assert_eq!(cp.len(), 2);
        assert!((cp[0] + r).abs() < 1e-12 && (cp[1] - r).abs() < 1e-12);
        let sq = Curve::new(vec![Polynomial::from_i64s(&[0, 0, 1])], None).unwrap();
        assert_eq!(sq.critical_points(0, 0.0, 1.0), vec![0.0]);
        assert!(Curve::linear(&[1]).critical_points(0, 0.0, 1.0).is_empty());
    }

    #[test]
    fn hypothesis_checks() {
        let k = NumberField::q_sqrt2();
        let eq = FlowSpec::equal(2);
        assert!(Curve::linear(&[1, 1]).hypothesis(&k, &eq).unwrap().is_none());
        assert!(Curve::linear(&[1, 0]).hypothesis(&k, &eq).unwrap().is_some());
        let cubic = NumberField::cyclic_cubic();
        assert!(Curve::linear(&[0, 0, 1])
            .hypothesis(&cubic, &FlowSpec::equal(3))
            .unwrap()
            .is_some());
        assert!(Curve::linear(&[1, 1, 0])
            .hypothesis(&cubic, &FlowSpec::equal(3))
            .unwrap()
            .is_none());
        let w = FlowSpec::weighted(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!(Curve::linear(&[1, 1]).hypothesis(&k, &w).unwrap().is_none());
        assert!(Curve::linear(&[1]).hypothesis(&k, &eq).is_err());
        let g = NumberField::gaussian();
        assert!(Curve::linear(&[1]).hypothesis(&g, &FlowSpec::equal(1)).unwrap().is_none());
    }

    #[test]
    fn serde_round_trip() {
        let c = Curve::linear(&[1, 2]);
        let s = serde_json::to_string(&c).unwrap();
        let back: Curve = serde_json::from_str(&s).unwrap();
        assert_eq!(back.components(), c.components());
        assert_eq!(back.active(), &[0, 1]);
        assert!(serde_json::from_str::<Curve>(r#"{"components":[["1"]],"active":[0]}"#).is_err());
    }
}
