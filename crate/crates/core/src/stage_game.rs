//! One-shot election: campaign, vote, office.
//!
//! The outcome of a single election is given by explicit per-region strategy
//! tables over the candidates' ideal-point draws. Each table covers one
//! combination of voter regime and reputation pair, written from the left
//! candidate's perspective (`x_L` in `[-1, 0]`, `x_R` in `[0, 1]`). Region
//! boundaries are measure-zero; the listed precedence order (first match wins)
//! resolves them.

use std::num::NonZeroU32;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A position on the policy line `[-1, 1]`. The median voter sits at 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PolicyPoint<R: Real>(R);

impl<R: Real> PolicyPoint<R> {
    pub fn new(value: R) -> Result<Self> {
        if value >= -R::one() && value <= R::one() {
            Ok(PolicyPoint(value))
        } else {
            Err(Error::domain(format!("policy point {value} outside [-1, 1]")))
        }
    }

    pub fn value(self) -> R {
        self.0
    }

    /// Distance to the median voter's ideal point.
    pub fn distance_to_median(self) -> R {
        self.0.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opponent(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// A candidate's ideal point, constrained to their side of the median.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealPoint<R: Real> {
    side: Side,
    value: PolicyPoint<R>,
}

impl<R: Real> IdealPoint<R> {
    pub fn new(side: Side, value: R) -> Result<Self> {
        let value = PolicyPoint::new(value)?;
        let ok = match side {
            Side::Left => value.value() <= R::zero(),
            Side::Right => value.value() >= R::zero(),
        };
        if ok {
            Ok(IdealPoint { side, value })
        } else {
            Err(Error::domain(format!(
                "ideal point {} on the wrong side of the median for {side:?}",
                value.value()
            )))
        }
    }

    pub fn left(value: R) -> Result<Self> {
        Self::new(Side::Left, value)
    }

    pub fn right(value: R) -> Result<Self> {
        Self::new(Side::Right, value)
    }

    pub fn side(self) -> Side {
        self.side
    }

    pub fn value(self) -> R {
        self.value.value()
    }
}

/// Maximal credible promise distance `d` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Reach<R: Real>(R);

impl<R: Real> Reach<R> {
    pub fn new(d: R) -> Result<Self> {
        if d >= R::zero() && d <= R::one() {
            Ok(Reach(d))
        } else {
            Err(Error::domain(format!("reach {d} outside [0, 1]")))
        }
    }

    pub fn get(self) -> R {
        self.0
    }
}

/// Reputation as tracked by the voters. `BadFor(n)` means `n` more periods of
/// disbelief (including the upcoming one); `BadForever` is the unlimited
/// punishment of the infinite regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reputation {
    Good,
    BadForever,
    BadFor(NonZeroU32),
}

impl Reputation {
    pub fn is_good(self) -> bool {
        matches!(self, Reputation::Good)
    }

    pub fn bad_for(periods: u32) -> Result<Self> {
        NonZeroU32::new(periods)
            .map(Reputation::BadFor)
            .ok_or_else(|| Error::domain("a bad reputation must last at least one period"))
    }

    /// Remaining punishment periods; `None` means unlimited.
    pub fn punishment_remaining(self) -> Option<u32> {
        match self {
            Reputation::Good => Some(0),
            Reputation::BadFor(n) => Some(n.get()),
            Reputation::BadForever => None,
        }
    }

    /// Advances the punishment clock by one period.
    pub fn tick(self) -> Reputation {
        match self {
            Reputation::Good => Reputation::Good,
            Reputation::BadForever => Reputation::BadForever,
            Reputation::BadFor(n) => match NonZeroU32::new(n.get() - 1) {
                Some(m) => Reputation::BadFor(m),
                None => Reputation::Good,
            },
        }
    }
}

/// Which strategy tables the voters play, and for limited punishment, the
/// label `k` of the punishment scheme (punishment lasts `k + 1` periods).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VoterRegime {
    Naive,
    NonNaive,
    LimitedPunishment(NonZeroU32),
}

impl VoterRegime {
    pub fn limited(k: u32) -> Result<Self> {
        NonZeroU32::new(k)
            .map(VoterRegime::LimitedPunishment)
            .ok_or_else(|| Error::domain("limited punishment requires k >= 1"))
    }

    /// Limited punishment plays the benchmark (naive) stage tables.
    fn uses_naive_tables(self) -> bool {
        !matches!(self, VoterRegime::NonNaive)
    }
}

/// Whether a credible promise may overshoot the median.
///
/// `Uncapped` applies the promise displacement verbatim, so a pushed
/// platform `x_L + d` may cross 0. `CappedAtMedian` clamps it at the median.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PromiseMode {
    #[default]
    Uncapped,
    CappedAtMedian,
}

/// Linear loss around the agent's ideal point.
pub fn utility<R: Real>(x: PolicyPoint<R>, ideal: PolicyPoint<R>) -> R {
    -(x.value() - ideal.value()).abs()
}

///// The farthest platform a good candidate can credibly promise: `d` toward
/// the median from the ideal point, optionally capped at the median.
pub fn max_credible_promise<R: Real>(
    ideal: IdealPoint<R>,
    d: Reach<R>,
    mode: PromiseMode,
) -> PolicyPoint<R> {
    let raw = match ideal.side() {
        Side::Left => ideal.value() + d.get(),
        Side::Right => ideal.value() - d.get(),
    };
    let v = match mode {
        PromiseMode::Uncapped => raw,
        PromiseMode::CappedAtMedian => match ideal.side() {
            Side::Left => raw.min(R::zero()),
            Side::Right => raw.max(R::zero()),
        },
    };
    PolicyPoint::new(v).expect("credible promise stays inside the policy line")
}

/// Result of one election.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOutcome<R: Real> {
    /// Platform announced by L, absent when L's promises are disbelieved.
    pub promise_l: Option<PolicyPoint<R>>,
    pub promise_r: Option<PolicyPoint<R>>,
    pub winner: Side,
    pub implemented: PolicyPoint<R>,
    pub utility_l: R,
    pub utility_r: R,
    /// Set by the repeated game when the winner deviates; always false here.
    pub reneged: bool,
    /// Label of the matched strategy-table region, for diagnostics.
    pub region: &'static str,
}

impl<R: Real> StageOutcome<R> {
    pub fn winner_utility(&self) -> R {
        match self.winner {
            Side::Left => self.utility_l,
            Side::Right => self.utility_r,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct RegionPick<R> {
    region: &'static str,
    winner: Side,
    policy: R,
}

/// Plays one election and returns the table-assigned outcome.
///
/// `tie_seed` resolves the measure-zero exact ties (equidistant platforms and
/// equidistant ideal points) with a reproducible coin flip.
pub fn play_stage<R: Real>(
    regime: VoterRegime,
    rep_l: Reputation,
    rep_r: Reputation,
    x_l: IdealPoint<R>,
    x_r: IdealPoint<R>,
    d: Reach<R>,
    mode: PromiseMode,
    tie_seed: u64,
) -> Result<StageOutcome<R>> {
    if x_l.side() != Side::Left {
        return Err(Error::domain("x_l must be a left-side ideal point"));
    }
    if x_r.side() != Side::Right {
        return Err(Error::domain("x_r must be a right-side ideal point"));
    }

    let xl = x_l.value();
    let xr = x_r.value();
    let naive = regime.uses_naive_tables();

    let pick = match (rep_l.is_good(), rep_r.is_good()) {
        (false, false) => bad_bad(xl, xr, tie_seed),
        (true, true) if naive => naive_good_good(xl, xr, d.get(), tie_seed),
        (true, true) => non_naive_good_good(xl, xr, d.get(), tie_seed),
        (true, false) if naive => good_bad(xl, xr, d.get(), false),
        (true, false) => good_bad(xl, xr, d.get(), true),
        // The benchmark never prints this table separately; the bad-vs-good
        // regions are the same under both regimes.
        (false, true) => bad_good(xl, xr, d.get()),
    };

    let policy = match mode {
        PromiseMode::Uncapped => pick.policy,
        PromiseMode::CappedAtMedian => match pick.winner {
            Side::Left => pick.policy.min(R::zero()),
            Side::Right => pick.policy.max(R::zero()),
        },
    };
    let implemented = PolicyPoint::new(policy)?;

    let promise_for = |side: Side, rep: Reputation, ideal: IdealPoint<R>| {
        if !rep.is_good() {
            None
        } else if pick.winner == side {
            Some(implemented)
        } else {
            Some(max_credible_promise(ideal, d, mode))
        }
    };

    Ok(StageOutcome {
        promise_l: promise_for(Side::Left, rep_l, x_l),
        promise_r: promise_for(Side::Right, rep_r, x_r),
        winner: pick.winner,
        implemented,
        utility_l: utility(implemented, x_l.value),
        utility_r: utility(implemented, x_r.value),
        reneged: false,
        region: pick.region,
    })
}

fn coin(tie_seed: u64) -> Side {
    if ChaCha8Rng::seed_from_u64(tie_seed).gen_bool(0.5) {
        Side::Left
    } else {
        Side::Right
    }
}

/// Winner when both effective platforms sit on the median: the candidate
/// whose ideal point is closer to it; exact ties go to a coin flip.
fn closer_ideal<R: Real>(xl: R, xr: R, tie_seed: u64) -> Side {
    if -xl < xr {
        Side::Left
    } else if xr < -xl {
        Side::Right
    } else {
        coin(tie_seed)
    }
}

/// Benchmark regions, both candidates good.
fn naive_good_good<R: Real>(xl: R, xr: R, d: R, tie_seed: u64) -> RegionPick<R> {
    if xr <= R::one() - d && xl <= -xr - d {
        RegionPick { region: "N1", winner: Side::Right, policy: xr }
    } else if xl <= -d && -xl - d <= xr && xr <= -xl {
        RegionPick { region: "N5", winner: Side::Right, policy: -xl - d }
    } else if xr <= d && xl >= -d {
        RegionPick { region: "N3", winner: closer_ideal(xl, xr, tie_seed), policy: R::zero() }
    } else if xr >= d && -xr <= xl && xl <= -xr + d {
        RegionPick { region: "N4", winner: Side::Left, policy: -xr + d }
    } else if xr >= d && xl >= -xr + d {
        RegionPick { region: "N2", winner: Side::Left, policy: xl }
    } else {
        unreachable!("good/good regions cover the ideal-point square")
    }
}

/// Same regions as the benchmark good/good table; the winning candidate is
/// pushed to their maximal credible platform where the voters can demand it.
fn non_naive_good_good<R: Real>(xl: R, xr: R, d: R, tie_seed: u64) -> RegionPick<R> {
    let pick = naive_good_good(xl, xr, d, tie_seed);
    match pick.region {
        "N4" | "N2" => RegionPick { policy: xl + d, ..pick },
        "N5" => RegionPick { policy: xr - d, ..pick },
        _ => pick,
    }
}

/// Good L against bad R. With non-naive voters every L-winning platform is
/// pushed to `x_L + d`.
fn good_bad<R: Real>(xl: R, xr: R, d: R, pushed: bool) -> RegionPick<R> {
    if xr <= R::one() - d && xl <= -xr - d {
        RegionPick { region: "GB1", winner: Side::Right, policy: xr }
    } else if xl <= -xr {
        let policy = if pushed { xl + d } else { -xr };
        RegionPick { region: "GB2", winner: Side::Left, policy }
    } else {
        let policy = if pushed { xl + d } else { xl };
        RegionPick { region: "GB4", winner: Side::Left, policy }
    }
}

/// Bad L against good R; identical under naive and non-naive voters.
fn bad_good<R: Real>(xl: R, xr: R, d: R) -> RegionPick<R> {
    if xl <= -xr {
        RegionPick { region: "BG1", winner: Side::Right, policy: xr }
    } else if xr >= d && xl <= -xr + d {
        RegionPick { region: "BG2", winner: Side::Right, policy: -xl }
    } else if xr <= d {
        RegionPick { region: "BG3", winner: Side::Right, policy: -xl }
    } else {
        RegionPick { region: "BG4", winner: Side::Left, policy: xl }
    }
}

/// Both candidates bad: promises are disbelieved, the closer ideal point wins
/// and is implemented.
fn bad_bad<R: Real>(xl: R, xr: R, tie_seed: u64) -> RegionPick<R> {
    let winner = closer_ideal(xl, xr, tie_seed);
    let policy = match winner {
        Side::Left => xl,
        Side::Right => xr,
    };
    RegionPick { region: "BB", winner, policy }
}
