//! Player B: the tracking-and-voting strategy, its C¹ preprocessing, and the
//! heedless control.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ball::{CBall, RBall};
use crate::error::{Error, Result};
use crate::latticeflow::{kspan_equal, FlowSpec, GroupElement, ModuleVector};
use crate::numberfield::NumberField;

use super::curve::Curve;
use super::{GameParams, Interval};

/// Rounds after which preprocessing gives up.
pub const MAX_PREPROCESSING_ROUNDS: usize = 60;
/// Pieces of the chosen sub-range used for the certified ratio check.
const RATIO_PIECES: u32 = 16;
/// A new K-independent vector must undercut the tracked one by this factor
/// to restart the episode.
const RESTART_FACTOR: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Tracking,
    Heedless,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Preprocessing,
    Tracking,
    Idle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Vote {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
    #[serde(rename = "abstain")]
    Abstain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
    #[serde(rename = "center")]
    Center,
}

/// `|slope · u · v₁/‖v‖ + v₂/‖v‖|` with `‖v‖ = max(|v₁|, |v₂|)`.
///
/// For a curve that is not linear, `slope` is an enclosure of `φ'_σ` between
/// `x_n` and `x_n + u R_n`.
pub fn expanding_ratio(v: &[CBall; 2], slope: &RBall, u: &RBall) -> Result<RBall> {
    let norm = v[0].abs().max(&v[1].abs());
    if !norm.is_positive() {
        return Err(Error::precision(
            norm.prec(),
            "expanding ratio of a vector whose norm is not certified positive",
        ));
    }
    let shifted = v[0].mul_real(&slope.mul(u)).add(&v[1]);
    Ok(shifted.abs().div(&norm))
}

/// Right iff `sign(φ'_σ) · Re(v₂/v₁) >= 0`; abstains when `v₁` may vanish.
pub fn place_vote(v: &[CBall; 2], derivative_sign: i32) -> Vote {
    if v[0].contains_zero() {
        return Vote::Abstain;
    }
    let q = v[1].div(&v[0]).re;
    let q = if derivative_sign < 0 { q.neg() } else { q };
    if q.is_negative() {
        Vote::Left
    } else {
        Vote::Right
    }
}

/// Weighted majority of the votes at `places` (complex places count twice,
/// ties go right).
pub fn choose_side(
    field: &NumberField,
    v: &ModuleVector,
    places: &[usize],
    signs: &[i32],
) -> (Side, BTreeMap<usize, Vote>) {
    let mut votes = BTreeMap::new();
    let (mut right, mut left) = (0u32, 0u32);
    for &p in places {
        let vote = place_vote(v.component(p), signs[p]);
        let w = field.place(p).exponent();
        match vote {
            Vote::Right => right += w,
            Vote::Left => left += w,
            Vote::Abstain => {}
        }
        votes.insert(p, vote);
    }
    let side = if right >= left { Side::Right } else { Side::Left };
    (side, votes)
}

/// The B-interval of normalized offsets `(1−2α, 1)` on the right, mirrored on
/// the left, and the centered one otherwise.
pub fn side_interval(a: &Interval, side: Side, alpha: f64) -> Interval {
    let prec = a.prec();
    let radius = a.radius_f() * alpha;
    let shift = rug::Float::with_val(prec, a.radius_f() * (1.0 - alpha));
    let center = match side {
        Side::Right => rug::Float::with_val(prec, a.center() + &shift),
        Side::Left => rug::Float::with_val(prec, a.center() - &shift),
        Side::Center => a.center().clone(),
    };
    Interval::new(center, radius)
}

/// Certified lower bound of the expanding ratio at `place` over the chosen
/// side, from a subdivision of the normalized offsets.
pub fn ratio_lower_bound(
    v: &[CBall; 2],
    curve: &Curve,
    place: usize,
    a: &Interval,
    side: Side,
    alpha: f64,
) -> Result<f64> {
    let prec = a.prec();
    let (lo_u, hi_u) = match side {
        Side::Right => (1.0 - 2.0 * alpha, 1.0),
        Side::Left => (-1.0, -(1.0 - 2.0 * alpha)),
        Side::Center => (-alpha, alpha),
    };
    let mut worst = f64::INFINITY;
    for k in 0..RATIO_PIECES {
        let u0 = lo_u + (hi_u - lo_u) * k as f64 / RATIO_PIECES as f64;
        let u1 = lo_u + (hi_u - lo_u) * (k + 1) as f64 / RATIO_PIECES as f64;
        let u = RBall::from_bounds(
            prec,
            &rug::Float::with_val(prec, u0),
            &rug::Float::with_val(prec, u1),
        );
        // mean value theorem: the slope lies in φ' over [x_n, x_n + u R]
        let near = u0.min(0.0).min(u1);
        let far = u1.max(0.0).max(u0);
        let x_lo = a.offset(near);
        let x_hi = a.offset(far);
        let slope = curve.derivative_range(place, &x_lo, &x_hi, prec);
        let r = expanding_ratio(v, &slope, &u)?;
        worst = worst.min(r.lo_f64().max(0.0));
    }
    Ok(worst)
}

/// Everything Player B decided in one round.
#[derive(Clone, Debug)]
pub struct BMove {
    pub interval: Interval,
    pub side: Side,
    pub votes: BTreeMap<usize, Vote>,
    pub phase: Phase,
    pub consulted: Vec<usize>,
    /// Minimal certified ratio over the places that voted with the side.
    pub ratio_floor: Option<f64>,
    pub ratio_violations: usize,
}

/// The state of the tracked vector's current episode.
#[derive(Clone, Debug)]
pub struct Tracked {
    pub vector: ModuleVector,
    pub detected_round: usize,
    pub detected_height: f64,
}

/// Player B's bookkeeping; one fresh value per game.
#[derive(Clone, Debug)]
pub struct StrategyState {
    phase: Phase,
    tracked: Option<Tracked>,
    last_span: Option<ModuleVector>,
    pending: BTreeSet<usize>,
    m: usize,
    vote_cap: usize,
    overrun: bool,
    epsilon: Option<f64>,
    bounds: Vec<Option<[f64; 2]>>,
    signs: Vec<i32>,
    critical: Vec<Vec<f64>>,
    preprocessing_rounds: usize,
    episodes: usize,
    consulted: Vec<usize>,
}

/// The round-`n` data Player B sees.
pub struct Position<'a> {
    pub field: &'a NumberField,
    pub curve: &'a Curve,
    pub spec: &'a FlowSpec,
    pub params: &'a GameParams,
    pub n: usize,
    pub a: &'a Interval,
    /// `ΛΦ(φ(x_n))g_{t_n}`.
    pub lattice: &'a GroupElement,
    /// Vectors of height below one in `lattice`, sorted by height.
    pub short: &'a [ModuleVector],
}

impl StrategyState {
    pub fn new(field: &NumberField, curve: &Curve, spec: &FlowSpec, params: &GameParams) -> Self {
        let n = field.places().len();
        let (lo, hi) = (params.x0 - params.rho, params.x0 + params.rho);
        let critical = (0..n)
            .map(|i| {
                if curve.is_active(i) {
                    curve.critical_points(i, lo, hi)
                } else {
                    Vec::new()
                }
            })
            .collect();
        let consulted = if spec.is_weighted() {
            vec![spec.fastest_place()]
        } else {
            curve.active().to_vec()
        };
        StrategyState {
            phase: Phase::Preprocessing,
            tracked: None,
            last_span: None,
            pending: BTreeSet::new(),
            m: 0,
            vote_cap: params.vote_cap.unwrap_or(2 * n),
            overrun: false,
            epsilon: None,
            bounds: vec![None; n],
            signs: vec![0; n],
            critical,
            preprocessing_rounds: 0,
            episodes: 0,
            consulted,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn tracked(&self) -> Option<&Tracked> {
        self.tracked.as_ref()
    }

    /// Places still waiting for a vote in their favor.
    pub fn pending(&self) -> &BTreeSet<usize> {
        &self.pending
    }

    pub fn vote_rounds(&self) -> usize {
        self.m
    }

    pub fn overrun(&self) -> bool {
        self.overrun
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    /// `[m_σ, M_σ]` per place, available after preprocessing.
    pub fn derivative_bounds(&self) -> &[Option<[f64; 2]>] {
        &self.bounds
    }

    pub fn critical_points(&self) -> &[Vec<f64>] {
        &self.critical
    }

    pub fn preprocessing_rounds(&self) -> usize {
        self.preprocessing_rounds
    }

    pub fn episodes(&self) -> usize {
        self.episodes
    }

    /// `ε_σ = min(m_σ(1−2α), 1)`.
    pub fn epsilon_at(&self, place: usize, alpha: f64) -> Option<f64> {
        self.bounds[place].map(|[m, _]| (m * (1.0 - 2.0 * alpha)).min(1.0))
    }

    fn start_episode(&mut self, v: &ModuleVector, round: usize) {
        self.tracked = Some(Tracked {
            vector: v.clone(),
            detected_round: round,
            detected_height: v.height().to_f64(),
        });
        self.pending = self.consulted.iter().copied().collect();
        self.m = 0;
        self.episodes += 1;
        self.phase = Phase::Tracking;
    }
}

/// Enclosure of `φ'_σ` on the closure of `a` excludes zero at every active
/// place.
fn derivative_ranges(curve: &Curve, a: &Interval) -> Vec<(usize, RBall)> {
    let prec = a.prec();
    let (lo, hi) = (a.lo(), a.hi());
    curve
        .active()
        .iter()
        .map(|&i| (i, curve.derivative_range(i, &lo, &hi, prec)))
        .collect()
}

/// One preprocessing step: `None` once the closure of the current interval
/// avoids every critical point of the active components (the derivative
/// bounds are then recorded), otherwise the B-interval steering away from
/// them.
pub fn c1_preprocess(state: &mut StrategyState, curve: &Curve, a: &Interval, alpha: f64) -> Result<Option<Interval>> {
    let ranges = derivative_ranges(curve, a);
    if ranges.iter().all(|(_, r)| !r.contains_zero()) {
        for (i, r) in ranges {
            state.bounds[i] = Some([r.mig(), r.mag()]);
            state.signs[i] = if r.is_positive() { 1 } else { -1 };
        }
        state.epsilon = state
            .consulted
            .iter()
            .filter_map(|&i| state.epsilon_at(i, alpha))
            .reduce(f64::min);
        state.phase = Phase::Idle;
        return Ok(None);
    }
    if state.preprocessing_rounds >= MAX_PREPROCESSING_ROUNDS {
        return Err(Error::CriticalPointsDense(format!(
            "derivative still vanishes near the interval after {} rounds",
            state.preprocessing_rounds
        )));
    }
    let mut best: Option<((bool, f64, i64), Interval)> = None;
    for k in -8i64..=8 {
        let offset = k as f64 / 8.0 * (1.0 - alpha);
        let b = Interval::new(a.offset(offset), a.radius_f() * alpha);
        let certified = derivative_ranges(curve, &b)
            .iter()
            .all(|(_, r)| !r.contains_zero());
        let c = b.center().to_f64();
        let dist = state
            .critical
            .iter()
            .flatten()
            .map(|&z| ((z - c).abs() - b.radius_f()).max(0.0))
            .fold(f64::INFINITY, f64::min);
        let key = (certified, dist, -k.abs());
        let better = best.as_ref().is_none_or(|(bk, _)| {
            (key.0, key.1) > (bk.0, bk.1) || ((key.0, key.1) == (bk.0, bk.1) && key.2 > bk.2)
        });
        if better {
            best = Some((key, b));
        }
    }
    state.preprocessing_rounds += 1;
    Ok(best.map(|(_, b)| b))
}

fn geometric_side(a: &Interval, b: &Interval) -> Side {
    match b.center().partial_cmp(a.center()) {
        Some(std::cmp::Ordering::Greater) => Side::Right,
        Some(std::cmp::Ordering::Less) => Side::Left,
        _ => Side::Center,
    }
}

/// Player B's move for the given strategy.
pub fn player_b_move(
    kind: StrategyKind,
    state: &mut StrategyState,
    pos: &Position<'_>,
) -> Result<BMove> {
    let alpha = pos.params.alpha;
    let heedless = BMove {
        interval: side_interval(pos.a, Side::Center, alpha),
        side: Side::Center,
        votes: BTreeMap::new(),
        phase: state.phase,
        consulted: Vec::new(),
        ratio_floor: None,
        ratio_violations: 0,
    };
    if kind == StrategyKind::Heedless {
        return Ok(heedless);
    }
    if state.phase == Phase::Preprocessing {
        if let Some(b) = c1_preprocess(state, pos.curve, pos.a, alpha)? {
            return Ok(BMove {
                side: geometric_side(pos.a, &b),
                interval: b,
                phase: Phase::Preprocessing,
                ..heedless
            });
        }
    }
    let field = pos.field;
    match state.phase {
        Phase::Tracking => {
            let current = state
                .tracked
                .as_ref()
                .expect("tracking has a vector")
                .vector
                .reembed(field, pos.lattice);
            let h = current.height().to_f64();
            if let Some(w) = pos
                .short
                .iter()
                .find(|w| !kspan_equal(field, &current, w) && w.height().to_f64() < RESTART_FACTOR * h)
            {
                state.start_episode(w, pos.n);
            }
        }
        Phase::Idle => {
            let fresh = pos.short.iter().find(|w| {
                state
                    .last_span
                    .as_ref()
                    .is_none_or(|l| !kspan_equal(field, l, w))
            });
            if let Some(w) = fresh {
                state.start_episode(w, pos.n);
            }
        }
        Phase::Preprocessing => unreachable!("preprocessing finished above"),
    }
    if state.phase != Phase::Tracking {
        return Ok(BMove {
            phase: state.phase,
            ..heedless
        });
    }
    let v = state
        .tracked
        .as_ref()
        .expect("tracking has a vector")
        .vector
        .reembed(field, pos.lattice);
    let consulted: Vec<usize> = state.pending.iter().copied().collect();
    let (side, votes) = choose_side(field, &v, &consulted, &state.signs);
    let interval = side_interval(pos.a, side, alpha);
    let mut floor: Option<f64> = None;
    let mut violations = 0;
    for (&p, &vote) in &votes {
        let agrees = matches!(
            (vote, side),
            (Vote::Right, Side::Right) | (Vote::Left, Side::Left)
        );
        if agrees {
            let r = ratio_lower_bound(v.component(p), pos.curve, p, pos.a, side, alpha)?;
            floor = Some(floor.map_or(r, |f: f64| f.min(r)));
            let eps = state.epsilon_at(p, alpha).unwrap_or(0.0);
            if r < eps * (1.0 - 1e-9) {
                violations += 1;
            }
        }
        if agrees || vote == Vote::Abstain {
            state.pending.remove(&p);
        }
    }
    state.m += 1;
    if state.m > state.vote_cap {
        state.overrun = true;
    }
    if state.pending.is_empty() {
        state.phase = Phase::Idle;
        state.last_span = Some(v);
    }
    Ok(BMove {
        interval,
        side,
        votes,
        phase: Phase::Tracking,
        consulted,
        ratio_floor: floor,
        ratio_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::DEFAULT_PRECISION as P;
    use crate::game::curve::Polynomial;

    fn cb(x: f64) -> CBall {
        CBall::real(RBall::from_f64(P, x))
    }

    fn rb(x: f64) -> RBall {
        RBall::from_f64(P, x)
    }

    #[test]
    fn ratio_examples() {
        let r = expanding_ratio(&[cb(0.6), cb(0.8)], &rb(1.0), &rb(1.0)).unwrap();
        assert!((r.to_f64() - 1.75).abs() < 1e-15);
        let r = expanding_ratio(&[cb(1.0), cb(0.0)], &rb(1.0), &rb(0.5)).unwrap();
        assert!((r.to_f64() - 0.5).abs() < 1e-15);
        for u in [-1.0, 0.0, 0.3, 1.0] {
            let r = expanding_ratio(&[cb(0.0), cb(-2.0)], &rb(3.0), &rb(u)).unwrap();
            assert!((r.to_f64() - 1.0).abs() < 1e-15);
        }
        assert!(expanding_ratio(&[cb(0.0), cb(0.0)], &rb(1.0), &rb(1.0)).is_err());
    }

    #[test]
    fn side_intervals() {
        let a = Interval::from_f64(0.0, 0.125, P);
        let r = side_interval(&a, Side::Right, 0.25);
        assert_eq!((r.lo().to_f64(), r.hi().to_f64()), (0.0625, 0.125));
        let l = side_interval(&a, Side::Left, 0.25);
        assert_eq!((l.lo().to_f64(), l.hi().to_f64()), (-0.125, -0.0625));
        let c = side_interval(&a, Side::Center, 0.25);
        assert_eq!(c.center().to_f64(), 0.0);
    }

    #[test]
    fn votes_and_majority() {
        assert_eq!(place_vote(&[cb(1.0), cb(2.0)], 1), Vote::Right);
        assert_eq!(place_vote(&[cb(1.0), cb(-2.0)], 1), Vote::Left);
        assert_eq!(place_vote(&[cb(1.0), cb(-2.0)], -1), Vote::Right);
        assert_eq!(place_vote(&[cb(0.0), cb(1.0)], 1), Vote::Abstain);
        assert_eq!(place_vote(&[cb(-1.0), cb(0.0)], 1), Vote::Right);

        let k = NumberField::cyclic_cubic();
        let id = GroupElement::identity(3, P);
        // σ(a) has mixed signs across the three real places for a = ξ
        let v = ModuleVector::new(&k, k.one(), k.element(&[0, 1, 0]).unwrap(), &id);
        let signs: Vec<f64> = (0..3).map(|i| v.component(i)[1].re.to_f64()).collect();
        let (side, votes) = choose_side(&k, &v, &[0, 1, 2], &[1, 1, 1]);
        let rights = signs.iter().filter(|s| **s >= 0.0).count();
        assert_eq!(votes.values().filter(|v| **v == Vote::Right).count(), rights);
        assert_eq!(side, if rights >= 2 { Side::Right } else { Side::Left });
        assert!(rights == 1 || rights == 2);
    }

    #[test]
    fn preprocessing_moves_away_from_critical_point() {
        let k = NumberField::q_sqrt2();
        let sq = Polynomial::from_i64s(&[0, 0, 1]);
        let curve = Curve::new(vec![sq.clone(), sq], None).unwrap();
        let params = GameParams::default();
        let mut st = StrategyState::new(&k, &curve, &FlowSpec::equal(2), &params);
        let a = Interval::from_f64(0.5, 0.5, P);
        let b = c1_preprocess(&mut st, &curve, &a, 0.25).unwrap().unwrap();
        assert_eq!((b.lo().to_f64(), b.hi().to_f64()), (0.75, 1.0));
        let a1 = Interval::from_f64(0.8125, 0.0625, P);
        assert!(c1_preprocess(&mut st, &curve, &a1, 0.25).unwrap().is_none());
        let [m, big_m] = st.derivative_bounds()[0].unwrap();
        assert!((m - 1.5).abs() < 1e-12 && (big_m - 1.75).abs() < 1e-12);
        assert_eq!(st.preprocessing_rounds(), 1);
        assert_eq!(st.phase(), Phase::Idle);
    }

    #[test]
    fn linear_curve_needs_no_preprocessing() {
        let k = NumberField::q_sqrt2();
        let curve = Curve::linear(&[1, 1]);
        let mut st = StrategyState::new(&k, &curve, &FlowSpec::equal(2), &GameParams::default());
        let a = Interval::from_f64(0.5, 0.5, P);
        assert!(c1_preprocess(&mut st, &curve, &a, 0.25).unwrap().is_none());
        assert!((st.epsilon().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cubic_preprocessing_lands_between_critical_points() {
        let k = NumberField::rationals();
        let curve = Curve::new(vec![Polynomial::from_i64s(&[0, -1, 0, 1])], None).unwrap();
        let params = GameParams::default();
        let mut st = StrategyState::new(&k, &curve, &FlowSpec::equal(1), &params);
        let mut a = Interval::from_f64(0.5, 0.5, P);
        while let Some(b) = c1_preprocess(&mut st, &curve, &a, 0.25).unwrap() {
            a = Interval::new(b.center().clone(), b.radius_f() * 0.5);
        }
        let r = curve.derivative_range(0, &a.lo(), &a.hi(), P);
        assert!(!r.contains_zero());
    }
}
