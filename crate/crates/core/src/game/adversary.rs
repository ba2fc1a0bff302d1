//! Programmatic Player A strategies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::ball::RBall;
use crate::error::Result;
use crate::latticeflow::{flow_element, systole, unipotent, Enumeration, FlowSpec};
use crate::numberfield::NumberField;

use super::curve::Curve;
use super::Interval;

/// Candidate offsets tried by the short-vector seeker, as fractions of the
/// available slack.
const SEEKER_OFFSETS: [f64; 9] = [0.0, -0.25, 0.25, -0.5, 0.5, -0.75, 0.75, -1.0, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Adversary {
    /// Uniform offsets from a ChaCha stream; the game seed is used when
    /// `seed` is absent.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Stays as close to the starting center as the rules allow.
    CenterHugging,
    /// Greedily minimizes the next round's systole over a few candidates.
    ShortVectorSeeker,
}

impl Adversary {
    pub fn label(&self) -> String {
        match self {
            Adversary::Random { seed: Some(s) } => format!("random-{s}"),
            Adversary::Random { seed: None } => "random".into(),
            Adversary::CenterHugging => "center-hugging".into(),
            Adversary::ShortVectorSeeker => "short-vector-seeker".into(),
        }
    }
}

/// What Player A sees when answering `b`.
pub struct AContext<'a> {
    pub field: &'a NumberField,
    pub curve: &'a Curve,
    pub spec: &'a FlowSpec,
    pub beta: f64,
    pub x0: f64,
    /// Flow time of the round A is opening.
    pub next_t: f64,
}

/// Per-game state of an adversary.
pub struct AdversaryState {
    kind: Adversary,
    rng: ChaCha8Rng,
}

impl AdversaryState {
    pub fn new(kind: Adversary, game_seed: u64) -> Self {
        let seed = match kind {
            Adversary::Random { seed: Some(s) } => s,
            _ => game_seed,
        };
        AdversaryState {
            kind,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The next A-interval inside `b`.
    pub fn respond(&mut self, ctx: &AContext<'_>, b: &Interval) -> Result<Interval> {
        let radius = b.radius_f() * ctx.beta;
        let slack = b.radius_f() * (1.0 - ctx.beta);
        let prec = b.prec();
        let at = |frac: f64| Interval::new(b.offset(frac * (1.0 - ctx.beta)), radius);
        Ok(match self.kind {
            Adversary::Random { .. } => {
                let u: f64 = self.rng.random_range(-1.0..=1.0);
                at(u)
            }
            Adversary::CenterHugging => {
                let lo = Float::with_val(prec, b.center() - slack);
                let hi = Float::with_val(prec, b.center() + slack);
                let x0 = Float::with_val(prec, ctx.x0);
                let c = if x0 < lo {
                    lo
                } else if x0 > hi {
                    hi
                } else {
                    x0
                };
                Interval::new(c, radius)
            }
            Adversary::ShortVectorSeeker => {
                let mut best: Option<(f64, Interval)> = None;
                for frac in SEEKER_OFFSETS {
                    let cand = at(frac);
                    let x = RBall::from_float(prec, cand.center());
                    let g = unipotent(&ctx.curve.point(&x))
                        .mul(&flow_element(ctx.spec, ctx.next_t, prec));
                    let h = systole(ctx.field, &g, Enumeration::Reduced)?.height.to_f64();
                    if best.as_ref().is_none_or(|(bh, _)| h < *bh) {
                        best = Some((h, cand));
                    }
                }
                best.expect("nonempty candidate list").1
            }
        })
    }
}
