//! Midpoint-radius ball arithmetic over MPFR floats.
//!
//! A [`RBall`] is a multiprecision midpoint together with an `f64` radius that
//! is always rounded upwards, so the set `[mid - rad, mid + rad]` is a rigorous
//! enclosure of the exact value. Operations never fail: a division by a ball
//! containing zero (or a logarithm of a non-positive ball) yields an
//! indeterminate ball with infinite radius, and every comparison that cannot
//! be decided from the enclosures reports so instead of guessing. Callers turn
//! undecided comparisons into [`crate::Error::PrecisionExhausted`] and retry at a
//! higher working precision via [`escalate`].

use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::{Float, Integer};

use crate::error::Result;

/// Working precision used when nothing else is requested.
pub const DEFAULT_PRECISION: u32 = 128;
/// Escalation stops here.
pub const MAX_PRECISION: u32 = 1024;

#[inline]
fn up(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else if x == 0.0 {
        0.0
    } else {
        x.next_up()
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    up(a + b)
}

#[inline]
fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        up(a * b)
    }
}

#[inline]
fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b <= 0.0 {
        f64::INFINITY
    } else {
        up(a / b)
    }
}

/// Upper bound for `|x|` as an `f64`.
#[inline]
fn abs_up(x: &Float) -> f64 {
    x.as_abs().to_f64_round(Round::Up)
}

/// Lower bound for `|x|` as an `f64`.
#[inline]
fn abs_down(x: &Float) -> f64 {
    x.as_abs().to_f64_round(Round::Down)
}

/// Bound on the rounding error of a round-to-nearest result.
#[inline]
fn rounding_error(value: &Float, ord: Ordering) -> f64 {
    if ord == Ordering::Equal {
        0.0
    } else {
        let ulp = 2f64.powi(1 - value.prec() as i32);
        mul_up(abs_up(value), ulp).max(f64::from_bits(1))
    }
}

/// Runs `f` at `start` bits and doubles the precision on
/// [`crate::Error::PrecisionExhausted`] until [`MAX_PRECISION`] has been tried.
pub fn escalate<T>(start: u32, mut f: impl FnMut(u32) -> Result<T>) -> Result<T> {
    let mut prec = start.clamp(53, MAX_PRECISION);
    loop {
        match f(prec) {
            Err(e) if e.is_precision() && prec < MAX_PRECISION => {
                prec = (prec * 2).min(MAX_PRECISION);
            }
            other => return other,
        }
    }
}

/// Real ball `mid ± rad`.
#[derive(Clone)]
pub struct RBall {
    mid: Float,
    rad: f64,
}

impl fmt::Debug for RBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} +/- {:.3e}]", self.mid.to_f64(), self.rad)
    }
}

impl fmt::Display for RBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.17e} +/- {:.3e}", self.mid.to_f64(), self.rad)
    }
}

impl RBall {
    fn rounded<T>(prec: u32, val: T) -> (Float, f64)
    where
        Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
    {
        let (mid, ord) = Float::with_val_round(prec, val, Round::Nearest);
        let err = rounding_error(&mid, ord);
        (mid, err)
    }

    pub fn zero(prec: u32) -> Self {
        RBall {
            mid: Float::new(prec),
            rad: 0.0,
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(prec, 1)
    }

    pub fn from_i64(prec: u32, v: i64) -> Self {
        let (mid, rad) = Self::rounded(prec, v);
        RBall { mid, rad }
    }

    pub fn from_f64(prec: u32, v: f64) -> Self {
        let (mid, rad) = Self::rounded(prec, v);
        RBall { mid, rad }
    }

    pub fn from_integer(prec: u32, v: &Integer) -> Self {
        let (mid, rad) = Self::rounded(prec, v);
        RBall { mid, rad }
    }

    /// Ball enclosing `num / den`.
    pub fn from_ratio(prec: u32, num: i64, den: i64) -> Self {
        Self::from_i64(prec, num).div(&Self::from_i64(prec, den))
    }

    pub fn from_rational(prec: u32, v: &rug::Rational) -> Self {
        let (mid, rad) = Self::rounded(prec, v);
        RBall { mid, rad }
    }

    /// Ball around a float, rounding it to `prec` bits.
    pub fn from_float(prec: u32, v: &Float) -> Self {
        let (mid, rad) = Self::rounded(prec, v);
        RBall { mid, rad }
    }

    pub fn with_radius(mid: Float, rad: f64) -> Self {
        RBall {
            mid,
            rad: if rad.is_nan() { f64::INFINITY } else { rad.abs() },
        }
    }

    /// Smallest convenient ball containing `[lo, hi]`.
    pub fn from_bounds(prec: u32, lo: &Float, hi: &Float) -> Self {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let (sum, ord) = Float::with_val_round(prec + 2, lo + hi, Round::Nearest);
        let sum_err = rounding_error(&sum, ord);
        let (mid, ord2) = Float::with_val_round(prec, &sum / 2u32, Round::Nearest);
        let mid_err = rounding_error(&mid, ord2);
        let half_width = Float::with_val(prec + 2, hi - lo) / 2u32;
        let hw = half_width.to_f64_round(Round::Up);
        RBall {
            mid,
            rad: add_up(add_up(hw, mid_err), sum_err / 2.0 * 1.0000001),
        }
    }

    /// The indeterminate ball, used for undefined results.
    pub fn indeterminate(prec: u32) -> Self {
        RBall {
            mid: Float::new(prec),
            rad: f64::INFINITY,
        }
    }

    pub fn prec(&self) -> u32 {
        self.mid.prec()
    }

    pub fn mid(&self) -> &Float {
        &self.mid
    }

    pub fn rad(&self) -> f64 {
        self.rad
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn is_exact(&self) -> bool {
        self.rad == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.rad.is_finite() && self.mid.is_finite()
    }

    /// Same ball at a different midpoint precision.
    pub fn set_prec(&self, prec: u32) -> Self {
        let (mid, err) = Self::rounded(prec, &self.mid);
        RBall {
            mid,
            rad: add_up(self.rad, err),
        }
    }

    /// Lower endpoint, rounded down.
    pub fn lo(&self) -> Float {
        Float::with_val_round(self.prec() + 8, &self.mid - self.rad, Round::Down).0
    }

    /// Upper endpoint, rounded up.
    pub fn hi(&self) -> Float {
        Float::with_val_round(self.prec() + 8, &self.mid + self.rad, Round::Up).0
    }

    pub fn lo_f64(&self) -> f64 {
        if !self.rad.is_finite() {
            return f64::NEG_INFINITY;
        }
        self.lo().to_f64_round(Round::Down)
    }

    pub fn hi_f64(&self) -> f64 {
        if !self.rad.is_finite() {
            return f64::INFINITY;
        }
        self.hi().to_f64_round(Round::Up)
    }

    /// Upper bound of `|x|` over the ball.
    pub fn mag(&self) -> f64 {
        add_up(abs_up(&self.mid), self.rad)
    }

    /// Lower bound of `|x|` over the ball (zero when the ball meets zero).
    pub fn mig(&self) -> f64 {
        let m = abs_down(&self.mid);
        if m > self.rad {
            let d = m - self.rad;
            // `m - rad` may round up; step down once to stay a lower bound.
            d.next_down().max(0.0)
        } else {
            0.0
        }
    }

    pub fn is_positive(&self) -> bool {
        self.rad.is_finite() && self.lo() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.rad.is_finite() && self.hi() < 0
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    /// Is the exact value certainly `< other`? `None` if undecided.
    pub fn lt(&self, other: &RBall) -> Option<bool> {
        match self.cmp_certain(other) {
            Some(Ordering::Less) => Some(true),
            Some(_) => Some(false),
            None => None,
        }
    }

    /// Certified comparison: `Some(ord)` only if the enclosures decide it.
    pub fn cmp_certain(&self, other: &RBall) -> Option<Ordering> {
        if !self.is_finite() || !other.is_finite() {
            return None;
        }
        if self.rad == 0.0 && other.rad == 0.0 {
            return self.mid.partial_cmp(&other.mid);
        }
        if self.hi() < other.lo() {
            Some(Ordering::Less)
        } else if self.lo() > other.hi() {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// Does the ball contain `x`?
    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo() <= x && self.hi() >= x
    }

    /// Do the two balls intersect?
    pub fn overlaps(&self, other: &RBall) -> bool {
        !(self.hi() < other.lo() || other.hi() < self.lo())
    }

    pub fn neg(&self) -> RBall {
        RBall {
            mid: Float::with_val(self.prec(), -&self.mid),
            rad: self.rad,
        }
    }

    pub fn add(&self, other: &RBall) -> RBall {
        let prec = self.prec().max(other.prec());
        let (mid, err) = Self::rounded(prec, &self.mid + &other.mid);
        RBall {
            mid,
            rad: add_up(add_up(self.rad, other.rad), err),
        }
    }

    pub fn sub(&self, other: &RBall) -> RBall {
        let prec = self.prec().max(other.prec());
        let (mid, err) = Self::rounded(prec, &self.mid - &other.mid);
        RBall {
            mid,
            rad: add_up(add_up(self.rad, other.rad), err),
        }
    }

    pub fn mul(&self, other: &RBall) -> RBall {
        let prec = self.prec().max(other.prec());
        let (mid, err) = Self::rounded(prec, &self.mid * &other.mid);
        let rad = add_up(
            add_up(
                mul_up(abs_up(&self.mid), other.rad),
                mul_up(abs_up(&other.mid), self.rad),
            ),
            add_up(mul_up(self.rad, other.rad), err),
        );
        RBall { mid, rad }
    }

    pub fn mul_i64(&self, k: i64) -> RBall {
        let (mid, err) = Self::rounded(self.prec(), &self.mid * k);
        RBall {
            mid,
            rad: add_up(mul_up(self.rad, (k as f64).abs()), err),
        }
    }

    pub fn sqr(&self) -> RBall {
        self.mul(self)
    }

    pub fn div(&self, other: &RBall) -> RBall {
        let prec = self.prec().max(other.prec());
        let denom_low = other.mig();
        if denom_low <= 0.0 || !self.is_finite() {
            return RBall::indeterminate(prec);
        }
        let (mid, err) = Self::rounded(prec, &self.mid / &other.mid);
        // |a/b - a'/b'| <= (ra + |q| rb) / (|b| - rb)
        let num = add_up(self.rad, mul_up(abs_up(&mid), other.rad));
        RBall {
            mid,
            rad: add_up(div_up(num, denom_low), err),
        }
    }

    pub fn abs(&self) -> RBall {
        if self.contains_zero() && self.rad > 0.0 {
            let m = self.mag();
            let prec = self.prec();
            let half = Float::with_val(prec, m) / 2u32;
            let r = up(m / 2.0);
            return RBall {
                mid: half,
                rad: r,
            };
        }
        RBall {
            mid: self.mid.clone().abs(),
            rad: self.rad,
        }
    }

    pub fn max(&self, other: &RBall) -> RBall {
        match self.cmp_certain(other) {
            Some(Ordering::Less) => other.clone(),
            Some(_) => self.clone(),
            None => {
                let prec = self.prec().max(other.prec());
                let lo = self.lo().max(&other.lo()).clone();
                let hi = self.hi().max(&other.hi()).clone();
                RBall::from_bounds(prec, &lo, &hi)
            }
        }
    }

    pub fn min(&self, other: &RBall) -> RBall {
        match self.cmp_certain(other) {
            Some(Ordering::Greater) => other.clone(),
            Some(_) => self.clone(),
            None => {
                let prec = self.prec().max(other.prec());
                let lo = self.lo().min(&other.lo()).clone();
                let hi = self.hi().min(&other.hi()).clone();
                RBall::from_bounds(prec, &lo, &hi)
            }
        }
    }

    /// Convex hull of two balls.
    pub fn union(&self, other: &RBall) -> RBall {
        let prec = self.prec().max(other.prec());
        let lo = self.lo().min(&other.lo()).clone();
        let hi = self.hi().max(&other.hi()).clone();
        RBall::from_bounds(prec, &lo, &hi)
    }

    pub fn sqrt(&self) -> RBall {
        let prec = self.prec();
        if !self.is_finite() || self.is_negative() {
            return RBall::indeterminate(prec);
        }
        if !self.is_positive() {
            // straddles zero: [0, sqrt(hi)]
            let top = Float::with_val_round(prec, self.hi().sqrt(), Round::Up).0;
            return RBall::from_bounds(prec, &Float::new(prec), &top);
        }
        let (mid, err) = Self::rounded(prec, self.mid.sqrt_ref());
        let root_low = abs_down(&mid) * (1.0 - 1e-15);
        RBall {
            mid,
            rad: add_up(div_up(self.rad, root_low), err),
        }
    }

    pub fn exp(&self) -> RBall {
        let prec = self.prec();
        if !self.is_finite() {
            return RBall::indeterminate(prec);
        }
        let (mid, err) = Self::rounded(prec, self.mid.exp_ref());
        let grow = up(self.rad.exp_m1() * (1.0 + 1e-15));
        RBall {
            rad: add_up(mul_up(up(abs_up(&mid) * (1.0 + 1e-15)), grow), err),
            mid,
        }
    }

    pub fn ln(&self) -> RBall {
        let prec = self.prec();
        if !self.is_positive() {
            return RBall::indeterminate(prec);
        }
        let low = self.lo().to_f64_round(Round::Down);
        let (mid, err) = Self::rounded(prec, self.mid.ln_ref());
        let rad = if low > 0.0 {
            div_up(self.rad, low)
        } else {
            // lower endpoint below f64 range; bound via log of the ratio
            f64::INFINITY
        };
        RBall {
            mid,
            rad: add_up(rad, err),
        }
    }

    /// `self^k` for a non-negative integer exponent.
    pub fn powi(&self, k: u32) -> RBall {
        let mut acc = RBall::one(self.prec());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        acc
    }

    pub fn ln2(prec: u32) -> RBall {
        let (mid, err) = Self::rounded(prec, rug::float::Constant::Log2);
        RBall { mid, rad: err }
    }

    pub fn pi(prec: u32) -> RBall {
        let (mid, err) = Self::rounded(prec, rug::float::Constant::Pi);
        RBall { mid, rad: err }
    }

    /// Nearest integer to the midpoint.
    pub fn round_mid(&self) -> Option<Integer> {
        self.mid.to_integer()
    }

    /// Decimal rendering of the midpoint with `digits` significant digits.
    pub fn mid_string(&self, digits: usize) -> String {
        float_to_decimal(&self.mid, digits)
    }
}

/// Scientific decimal rendering of a float, usable as a JSON number.
pub fn float_to_decimal(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return "null".to_string();
    }
    let s = x.to_string_radix(10, Some(digits.max(1)));
    // rug renders exponents as "e-5"; JSON accepts that form.
    s
}

/// Complex ball stored as a rectangle of two real balls.
#[derive(Clone)]
pub struct CBall {
    pub re: RBall,
    pub im: RBall,
}

impl fmt::Debug for CBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}i)", self.re, self.im)
    }
}

impl CBall {
    pub fn new(re: RBall, im: RBall) -> Self {
        CBall { re, im }
    }

    pub fn real(re: RBall) -> Self {
        let prec = re.prec();
        CBall {
            re,
            im: RBall::zero(prec),
        }
    }

    pub fn zero(prec: u32) -> Self {
        CBall::real(RBall::zero(prec))
    }

    pub fn one(prec: u32) -> Self {
        CBall::real(RBall::one(prec))
    }

    pub fn from_i64(prec: u32, v: i64) -> Self {
        CBall::real(RBall::from_i64(prec, v))
    }

    pub fn from_integer(prec: u32, v: &Integer) -> Self {
        CBall::real(RBall::from_integer(prec, v))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn set_prec(&self, prec: u32) -> Self {
        CBall {
            re: self.re.set_prec(prec),
            im: self.im.set_prec(prec),
        }
    }

    /// Imaginary part is exactly zero (not merely small).
    pub fn is_real(&self) -> bool {
        self.im.is_exact() && self.im.mid().is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn max_rad(&self) -> f64 {
        self.re.rad().max(self.im.rad())
    }

    pub fn neg(&self) -> CBall {
        CBall {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn conj(&self) -> CBall {
        CBall {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn add(&self, o: &CBall) -> CBall {
        CBall {
            re: self.re.add(&o.re),
            im: if self.is_real() && o.is_real() {
                RBall::zero(self.prec().max(o.prec()))
            } else {
                self.im.add(&o.im)
            },
        }
    }

    pub fn sub(&self, o: &CBall) -> CBall {
        CBall {
            re: self.re.sub(&o.re),
            im: if self.is_real() && o.is_real() {
                RBall::zero(self.prec().max(o.prec()))
            } else {
                self.im.sub(&o.im)
            },
        }
    }

    pub fn mul(&self, o: &CBall) -> CBall {
        match (self.is_real(), o.is_real()) {
            (true, true) => CBall::real(self.re.mul(&o.re)),
            (true, false) => CBall {
                re: o.re.mul(&self.re),
                im: o.im.mul(&self.re),
            },
            (false, true) => CBall {
                re: self.re.mul(&o.re),
                im: self.im.mul(&o.re),
            },
            (false, false) => CBall {
                re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
                im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
            },
        }
    }

    pub fn mul_real(&self, r: &RBall) -> CBall {
        if self.is_real() {
            CBall::real(self.re.mul(r))
        } else {
            CBall {
                re: self.re.mul(r),
                im: self.im.mul(r),
            }
        }
    }

    pub fn mul_i64(&self, k: i64) -> CBall {
        if self.is_real() {
            CBall::real(self.re.mul_i64(k))
        } else {
            CBall {
                re: self.re.mul_i64(k),
                im: self.im.mul_i64(k),
            }
        }
    }

    /// `|z|^2`.
    pub fn norm_sqr(&self) -> RBall {
        if self.is_real() {
            self.re.sqr()
        } else {
            self.re.sqr().add(&self.im.sqr())
        }
    }

    pub fn abs(&self) -> RBall {
        if self.is_real() {
            self.re.abs()
        } else {
            self.norm_sqr().sqrt()
        }
    }

    pub fn div(&self, o: &CBall) -> CBall {
        if o.is_real() {
            if self.is_real() {
                return CBall::real(self.re.div(&o.re));
            }
            return CBall {
                re: self.re.div(&o.re),
                im: self.im.div(&o.re),
            };
        }
        let d = o.norm_sqr();
        let num = self.mul(&o.conj());
        CBall {
            re: num.re.div(&d),
            im: num.im.div(&d),
        }
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}
