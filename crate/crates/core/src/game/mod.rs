//! Schmidt games on curves in `K_S`. Player B plays the short-vector
//! tracking strategy (or a heedless control) against programmatic Player A
//! adversaries; transcripts record every move and the strategy's bookkeeping.

mod adversary;
pub mod counterexample;
pub mod curve;
mod strategy;

use std::collections::BTreeMap;
use std::str::FromStr;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::ball::{escalate, float_to_decimal, RBall};
use crate::diophantine::{bad_constant_estimate, dani_check, BadReport, PSearch};
use crate::error::{Error, Result};
use crate::latticeflow::{
    flow_element, kspan_equal, shortest_vectors, systole, unipotent, Enumeration, FlowSpec,
    ModuleVector, ShortVectors,
};
use crate::numberfield::{AlgebraicInteger, NumberField};

pub use adversary::{AContext, Adversary, AdversaryState};
pub use counterexample::{counterexample_demo, CounterexampleReport};
pub use curve::{Curve, CurveConfig, Polynomial};
pub use strategy::{
    c1_preprocess, choose_side, expanding_ratio, place_vote, player_b_move, ratio_lower_bound,
    side_interval, BMove, Phase, Position, Side, StrategyKind, StrategyState, Tracked, Vote,
    MAX_PREPROCESSING_ROUNDS,
};

/// Short vectors listed per round in a transcript.
const LISTED_SHORT_VECTORS: usize = 16;

fn default_x0() -> f64 {
    0.5
}

/// Game parameters. The playing field is `A_0 = [x0 − ρ, x0 + ρ]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameParams {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_x0")]
    pub x0: f64,
    /// Voting repetitions before an overrun is flagged; `2|S|` by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vote_cap: Option<usize>,
    /// Play even when the curve or weights violate the winning hypothesis.
    #[serde(default)]
    pub allow_violations: bool,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            alpha: 0.25,
            beta: 0.5,
            rho: 0.5,
            rounds: 30,
            seed: 0,
            x0: 0.5,
            vote_cap: None,
            allow_violations: false,
        }
    }
}

impl GameParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1/2), got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidInput(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) || !self.x0.is_finite() {
            return Err(Error::InvalidInput("rho must be positive and x0 finite".into()));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidInput("a game needs at least one round".into()));
        }
        Ok(())
    }

    /// `ρ(αβ)^n`.
    pub fn a_radius(&self, n: usize) -> f64 {
        self.rho * (self.alpha * self.beta).powi(n as i32)
    }

    /// Bits needed to resolve the final interval with room to spare.
    pub fn working_precision(&self, prec: u32) -> u32 {
        let last = self.alpha * self.a_radius(self.rounds - 1);
        let bits = (-last.log2()).ceil().max(0.0) as u32 + 96;
        prec.max(bits.div_ceil(64) * 64)
    }
}

/// `t_n = log(1/(ρ(αβ)^n)) / (2r)` with `r = 1` for the equal-weight flow and
/// `r = max_σ r_σ` otherwise.
pub fn schedule_time(params: &GameParams, n: usize, spec: &FlowSpec) -> f64 {
    let r = if spec.is_weighted() { spec.r_max() } else { 1.0 };
    let log_inv = -(params.rho.ln() + n as f64 * (params.alpha * params.beta).ln());
    log_inv / (2.0 * r)
}

/// `[center − radius, center + radius]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    center: Float,
    radius: f64,
}

impl Interval {
    pub fn new(center: Float, radius: f64) -> Self {
        Interval { center, radius }
    }

    pub fn from_f64(center: f64, radius: f64, prec: u32) -> Self {
        Interval {
            center: Float::with_val(prec, center),
            radius,
        }
    }

    pub fn center(&self) -> &Float {
        &self.center
    }

    pub fn radius_f(&self) -> f64 {
        self.radius
    }

    pub fn prec(&self) -> u32 {
        self.center.prec()
    }

    /// `center + u · radius`.
    pub fn offset(&self, u: f64) -> Float {
        let prec = self.prec();
        let shift = Float::with_val(prec, self.radius) * u;
        Float::with_val(prec, &self.center + &shift)
    }

    pub fn lo(&self) -> Float {
        self.offset(-1.0)
    }

    pub fn hi(&self) -> Float {
        self.offset(1.0)
    }

    /// The interval as a ball.
    pub fn ball(&self) -> RBall {
        RBall::with_radius(self.center.clone(), self.radius * (1.0 + 1e-15))
    }

    /// `other ⊆ self` up to an absolute tolerance.
    pub fn contains(&self, other: &Interval, tol: f64) -> bool {
        let prec = self.prec().max(other.prec());
        let gap = Float::with_val(prec, &other.center - &self.center).abs();
        let need = Float::with_val(prec, gap + other.radius);
        need <= self.radius + tol
    }
}

fn decimal_digits(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let c = serde_json::Number::from_str(&float_to_decimal(&self.center, decimal_digits(self.prec())))
            .map_err(S::Error::custom)?;
        let r = serde_json::Number::from_str(&format!("{:e}", self.radius)).map_err(S::Error::custom)?;
        (c, r).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let (c, r) = <(serde_json::Number, f64)>::deserialize(d)?;
        let text = c.to_string();
        let prec = ((text.len() as f64 / std::f64::consts::LOG10_2) as u32 + 16).max(128);
        let parsed = Float::parse(&text).map_err(D::Error::custom)?;
        Ok(Interval {
            center: Float::with_val(prec, parsed),
            radius: r,
        })
    }
}

/// A detected vector as listed in a transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortVectorRecord {
    pub a: AlgebraicInteger,
    pub b: AlgebraicInteger,
    #[serde(rename = "H")]
    pub height: f64,
}

impl ShortVectorRecord {
    fn of(v: &ModuleVector) -> Self {
        ShortVectorRecord {
            a: v.a().clone(),
            b: v.b().clone(),
            height: v.height().to_f64(),
        }
    }
}

/// One round: A's interval, B's answer, and what B saw.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundRecord {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Interval,
    #[serde(rename = "B")]
    pub b: Interval,
    pub t_n: f64,
    /// Vectors of height below one, one per K-span when a span is very short.
    pub short_vectors: Vec<ShortVectorRecord>,
    pub short_count: usize,
    pub votes: BTreeMap<usize, Vote>,
    pub side: Side,
    pub phase: Phase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tracked: Option<ShortVectorRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub vote_rounds: usize,
    pub vote_overrun: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_floor: Option<f64>,
    pub ratio_violations: usize,
    /// Pairs of K-independent listed vectors, both of height below one.
    pub independent_pairs: usize,
    pub certified: bool,
}

/// A recorded illegal move.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forfeit {
    pub round: usize,
    pub player: String,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transcript {
    pub params: GameParams,
    pub field: String,
    pub curve: Curve,
    pub weights: Vec<f64>,
    pub weighted: bool,
    pub player_a: Adversary,
    pub player_b: StrategyKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis_violated: Option<String>,
    pub preprocessing_rounds: usize,
    pub derivative_bounds: Vec<Option<[f64; 2]>>,
    pub episodes: usize,
    pub rounds: Vec<RoundRecord>,
    pub x_inf: Interval,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forfeit: Option<Forfeit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<BadReport>,
}

fn tolerance(prec: u32, radius: f64) -> f64 {
    2f64.powi(8 - prec as i32) * radius
}

fn b_move_problem(a: &Interval, b: &Interval, alpha: f64) -> Option<String> {
    let tol = tolerance(a.prec(), a.radius_f());
    if (b.radius_f() - alpha * a.radius_f()).abs() > 1e-12 * a.radius_f() {
        return Some(format!("B radius {} is not α times {}", b.radius_f(), a.radius_f()));
    }
    (!a.contains(b, tol)).then(|| "B interval leaves A".to_string())
}

fn a_move_problem(b: &Interval, a: &Interval, beta: f64) -> Option<String> {
    let tol = tolerance(b.prec(), b.radius_f());
    if (a.radius_f() - beta * b.radius_f()).abs() > 1e-12 * b.radius_f() {
        return Some(format!("A radius {} is not β times {}", a.radius_f(), b.radius_f()));
    }
    (!b.contains(a, tol)).then(|| "A interval leaves B".to_string())
}

impl Transcript {
    /// Every violation of the radius and nesting laws.
    pub fn legality_violations(&self) -> Vec<String> {
        let p = &self.params;
        let mut out = Vec::new();
        for (i, r) in self.rounds.iter().enumerate() {
            let want = p.a_radius(r.n);
            if r.n != i {
                out.push(format!("round {i} is numbered {}", r.n));
            }
            if (r.a.radius_f() - want).abs() > 1e-12 * want {
                out.push(format!("round {i}: A radius {} should be {want}", r.a.radius_f()));
            }
            if let Some(e) = b_move_problem(&r.a, &r.b, p.alpha) {
                out.push(format!("round {i}: {e}"));
            }
            if let Some(next) = self.rounds.get(i + 1) {
                if let Some(e) = a_move_problem(&r.b, &next.a, p.beta) {
                    out.push(format!("round {}: {e}", i + 1));
                }
            }
        }
        if let (Some(first), false) = (self.rounds.first(), self.rounds.is_empty()) {
            let start = Interval::from_f64(p.x0, p.rho, first.a.prec());
            if !start.contains(&first.a, tolerance(first.a.prec(), p.rho)) {
                out.push("round 0: A differs from the playing field".into());
            }
        }
        out
    }

    /// Final B-radius.
    pub fn final_radius(&self) -> f64 {
        self.x_inf.radius_f()
    }

    /// Pairs of K-independent vectors of height below one, over all rounds.
    pub fn independent_pairs(&self) -> usize {
        self.rounds.iter().map(|r| r.independent_pairs).sum()
    }

    pub fn ratio_violations(&self) -> usize {
        self.rounds.iter().map(|r| r.ratio_violations).sum()
    }
}

/// Everything needed to set up one game.
pub struct GameSetup<'a> {
    pub field: &'a NumberField,
    pub curve: &'a Curve,
    pub spec: &'a FlowSpec,
    pub params: &'a GameParams,
    pub prec: u32,
}

fn count_independent(field: &NumberField, vs: &[ModuleVector]) -> usize {
    let mut n = 0;
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            if !kspan_equal(field, &vs[i], &vs[j]) {
                n += 1;
            }
        }
    }
    n
}

/// Representatives of the K-spans with a vector of height below one.
///
/// `|N(det)| >= 1` and `|det_σ| <= 2‖v^σ‖‖w^σ‖` give `H(v)H(w) >= 2^{-d}`
/// for K-independent `v, w`, so a vector below `2^{-d}` is the only span
/// and the (possibly enormous) list of its multiples is not enumerated.
pub fn short_spans(field: &NumberField, g: &crate::latticeflow::GroupElement) -> Result<ShortVectors> {
    let s = systole(field, g, Enumeration::Reduced)?;
    let lone = 0.5f64.powi(field.degree() as i32);
    if s.height.lt(&RBall::from_f64(g.prec(), lone)) == Some(true) {
        return Ok(ShortVectors {
            vectors: vec![s.vector],
            unresolved_ties: 0,
            certified: s.certified,
            truncated: s.truncated,
        });
    }
    shortest_vectors(field, g, 1.0, Enumeration::Reduced)
}

/// Plays `params.rounds` rounds. Player A opens with the playing field; the
/// transcript ends with B's last interval as `x_∞ ± radius`.
pub fn play_game(
    setup: &GameSetup<'_>,
    player_a: Adversary,
    player_b: StrategyKind,
) -> Result<Transcript> {
    let GameSetup {
        field,
        curve,
        spec,
        params,
        prec,
    } = *setup;
    params.validate()?;
    let violated = curve.hypothesis(field, spec)?;
    if let Some(reason) = &violated {
        if !params.allow_violations {
            return Err(Error::InvalidInput(format!(
                "hypothesis violated: {reason} (set allow_violations to play anyway)"
            )));
        }
    }
    let prec = params.working_precision(prec);
    let mut state = StrategyState::new(field, curve, spec, params);
    let mut adversary = AdversaryState::new(player_a, params.seed);
    let mut a = Interval::from_f64(params.x0, params.rho, prec);
    let mut rounds = Vec::with_capacity(params.rounds);
    let mut forfeit = None;
    for n in 0..params.rounds {
        let t = schedule_time(params, n, spec);
        let (lattice, short) = escalate(prec, |p| {
            let x = RBall::from_float(p, a.center());
            let g = unipotent(&curve.point(&x)).mul(&flow_element(spec, t, p));
            let s = short_spans(field, &g)?;
            Ok((g, s))
        })?;
        let pos = Position {
            field,
            curve,
            spec,
            params,
            n,
            a: &a,
            lattice: &lattice,
            short: &short.vectors,
        };
        let mv = player_b_move(player_b, &mut state, &pos)?;
        let record = RoundRecord {
            n,
            a: a.clone(),
            b: mv.interval.clone(),
            t_n: t,
            short_vectors: short
                .vectors
                .iter()
                .take(LISTED_SHORT_VECTORS)
                .map(ShortVectorRecord::of)
                .collect(),
            short_count: short.vectors.len(),
            votes: mv.votes.clone(),
            side: mv.side,
            phase: mv.phase,
            tracked: state.tracked().map(|t| ShortVectorRecord::of(&t.vector.reembed(field, &lattice))),
            epsilon: state.epsilon(),
            vote_rounds: state.vote_rounds(),
            vote_overrun: state.overrun(),
            ratio_floor: mv.ratio_floor,
            ratio_violations: mv.ratio_violations,
            independent_pairs: count_independent(field, &short.vectors),
            certified: short.certified && short.unresolved_ties == 0,
        };
        rounds.push(record);
        if let Some(reason) = b_move_problem(&a, &mv.interval, params.alpha) {
            forfeit = Some(Forfeit {
                round: n,
                player: "B".into(),
                reason,
            });
            break;
        }
        if n + 1 == params.rounds {
            break;
        }
        let ctx = AContext {
            field,
            curve,
            spec,
            beta: params.beta,
            x0: params.x0,
            next_t: schedule_time(params, n + 1, spec),
        };
        let next = adversary.respond(&ctx, &mv.interval)?;
        if let Some(reason) = a_move_problem(&mv.interval, &next, params.beta) {
            forfeit = Some(Forfeit {
                round: n + 1,
                player: "A".into(),
                reason,
            });
            break;
        }
        a = next;
    }
    let x_inf = rounds.last().map(|r| r.b.clone()).expect("at least one round");
    Ok(Transcript {
        params: params.clone(),
        field: field.label().to_string(),
        curve: curve.clone(),
        weights: spec.weights().to_vec(),
        weighted: spec.is_weighted(),
        player_a,
        player_b,
        hypothesis_violated: violated,
        preprocessing_rounds: state.preprocessing_rounds(),
        derivative_bounds: state.derivative_bounds().to_vec(),
        episodes: state.episodes(),
        rounds,
        x_inf,
        forfeit,
        verification: None,
    })
}

/// What [`verify_outcome`] computes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    /// Bound on `max_σ|σ(q)|`; the Diophantine search is skipped when absent.
    pub q_bound: Option<f64>,
    /// Trajectory horizon; defaults to `t_{rounds−4}`.
    pub t_max: Option<f64>,
    pub step: f64,
    pub mode: Enumeration,
    pub floor_threshold: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            q_bound: None,
            t_max: None,
            step: 0.25,
            mode: Enumeration::Reduced,
            floor_threshold: 1e-3,
        }
    }
}

/// Trajectory floor and approximation constant at `φ(x_∞)`, with the
/// uncertainty of `x_∞` carried along as a ball.
pub fn verify_outcome(
    field: &NumberField,
    transcript: &Transcript,
    spec: &FlowSpec,
    opts: &VerifyOptions,
) -> Result<BadReport> {
    let curve = &transcript.curve;
    let x = curve.point(&transcript.x_inf.ball());
    let t_max = opts.t_max.unwrap_or_else(|| {
        let n = transcript.params.rounds.saturating_sub(4);
        schedule_time(&transcript.params, n, spec)
    });
    let mut report = dani_check(field, &x, spec, t_max, opts.step, opts.mode, opts.floor_threshold)?;
    if let Some(q) = opts.q_bound {
        report = report.merge(bad_constant_estimate(field, &x, q, PSearch::Neighborhood)?);
    }
    Ok(report)
}
