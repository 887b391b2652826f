//! Maximal incentive-compatible promise distance d*(δ): numeric fixed points,
//! the written-down closed forms, comparative statics, and thresholds.

use std::num::NonZeroU32;

use crate::error::{Error, Result};
use crate::payoffs::{delta_v, ClosedFormSource};
use crate::scalar::{frac, lit, Real};
use crate::stage_game::{Reach, VoterRegime};

/// Per-period discount factor in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DiscountFactor<R: Real>(R);

impl<R: Real> DiscountFactor<R> {
    pub fn new(delta: R) -> Result<Self> {
        if delta >= R::zero() && delta < R::one() {
            Ok(DiscountFactor(delta))
        } else {
            Err(Error::domain(format!("discount factor {delta} outside [0, 1)")))
        }
    }

    pub fn get(self) -> R {
        self.0
    }
}

/// Which equilibrium is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Naive voters, infinite punishment.
    Benchmark,
    /// Non-naive voters, opponent with a good reputation.
    NonNaiveG,
    /// Non-naive voters, opponent with a bad reputation.
    NonNaiveB,
    /// Naive voters, punishment scheme labelled k (k + 1 bad periods).
    LimitedK(NonZeroU32),
}

impl Variant {
    pub fn limited(k: u32) -> Result<Self> {
        NonZeroU32::new(k)
            .map(Variant::LimitedK)
            .ok_or_else(|| Error::domain("limited punishment requires k >= 1"))
    }

    pub fn regime(self) -> VoterRegime {
        match self {
            Variant::Benchmark => VoterRegime::Naive,
            Variant::NonNaiveG | Variant::NonNaiveB => VoterRegime::NonNaive,
            Variant::LimitedK(k) => VoterRegime::LimitedPunishment(k),
        }
    }

    pub fn opponent_good(self) -> bool {
        !matches!(self, Variant::NonNaiveB)
    }

    fn resolve_source(self, source: Option<ClosedFormSource>) -> Result<ClosedFormSource> {
        match (self, source) {
            (Variant::NonNaiveB, None) => Err(Error::domain(
                "the non-naive bad-opponent variant needs an explicit closed-form source",
            )),
            (_, Some(s)) => Ok(s),
            (_, None) => Ok(ClosedFormSource::AsPrinted),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    ClosedPrinted,
    NumericRoot,
}

/// A solved d*(δ) with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint<R: Real> {
    pub delta: DiscountFactor<R>,
    pub variant: Variant,
    pub d_star: Reach<R>,
    pub method: SolveMethod,
    /// True when the raw solution fell outside `[0, 1]` (or was undefined)
    /// before clamping.
    pub clamped: bool,
    pub note: Option<String>,
}

/// Discount weight on the punishment stream: `δ/(1-δ)` for unlimited
/// punishment, `δ(1 + δ + … + δ^k)` for the limited schemes.
fn punishment_weight<R: Real>(variant: Variant, delta: R) -> R {
    match variant {
        Variant::Benchmark | Variant::NonNaiveG | Variant::NonNaiveB => {
            delta / (R::one() - delta)
        }
        Variant::LimitedK(k) => {
            let mut s = R::zero();
            let mut pow = R::one();
            for _ in 0..=k.get() {
                s += pow;
                pow *= delta;
            }
            delta * s
        }
    }
}

/// Discounted future loss from acquiring a bad reputation today.
pub fn cost_of_reneging<R: Real>(
    regime: VoterRegime,
    opponent_good: bool,
    d: Reach<R>,
    delta: DiscountFactor<R>,
    source: ClosedFormSource,
) -> Result<R> {
    let variant = match regime {
        VoterRegime::Naive => Variant::Benchmark,
        VoterRegime::NonNaive if opponent_good => Variant::NonNaiveG,
        VoterRegime::NonNaive => Variant::NonNaiveB,
        VoterRegime::LimitedPunishment(k) => Variant::LimitedK(k),
    };
    let dv = delta_v(regime, opponent_good, d, source)?;
    Ok(punishment_weight(variant, delta.get()) * dv)
}

/// Cost of reneging minus the gain from reneging (which is exactly `d`).
/// A nonnegative gap means the promise at distance `d` is kept.
pub fn incentive_gap<R: Real>(
    regime: VoterRegime,
    opponent_good: bool,
    d: Reach<R>,
    delta: DiscountFactor<R>,
    source: ClosedFormSource,
) -> Result<R> {
    Ok(cost_of_reneging(regime, opponent_good, d, delta, source)? - d.get())
}

fn variant_gap<R: Real>(variant: Variant, source: ClosedFormSource, delta: R, d: R) -> R {
    let regime = variant.regime();
    let reach = Reach::new(d).expect("gap evaluated inside [0, 1]");
    let dv = delta_v(regime, variant.opponent_good(), reach, source)
        .expect("closed-form payoffs defined for every variant");
    punishment_weight(variant, delta) * dv - d
}

const SCAN_STEPS: u32 = 2048;

/// Largest `d` in `[0, 1]` whose promise is incentive-compatible, by a
/// downward sign scan plus bisection (absolute tolerance 1e-10).
pub fn d_star_numeric<R: Real>(
    variant: Variant,
    delta: DiscountFactor<R>,
    source: Option<ClosedFormSource>,
) -> Result<EquilibriumPoint<R>> {
    let source = variant.resolve_source(source)?;
    let del = delta.get();
    let gap = |d: R| variant_gap(variant, source, del, d);
    let tol = lit::<R>(1e-10).max(R::epsilon() * lit::<R>(8.0));

    let top = gap(R::one());
    let (d_star, clamped) = if top >= R::zero() {
        (R::one(), top > R::zero())
    } else {
        // Walk down from 1 to the first grid point with a nonnegative gap,
        // then bisect the bracket. The gap keeps the sign pattern
        // (nonnegative low, negative high) because delta_v(d)/d decreases.
        let step = R::one() / R::from_u32(SCAN_STEPS).unwrap();
        let mut lo = R::zero();
        let mut hi = R::one();
        for i in (0..SCAN_STEPS).rev() {
            let d = R::from_u32(i).unwrap() * step;
            if gap(d) >= R::zero() {
                lo = d;
                hi = d + step;
                break;
            }
        }
        let mut iter = 0;
        while hi - lo > tol && iter < 200 {
            let mid = (lo + hi) / lit::<R>(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if gap(mid) >= R::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
            iter += 1;
        }
        if lo == R::zero() {
            // No interior root in (0, 1]; the raw fixed point is at or below
            // zero. Flag when the gap slope at 0+ is negative, i.e. the raw
            // root sits strictly below zero.
            let h = lit::<R>(1e-8);
            (R::zero(), gap(h) < -h * lit::<R>(1e-4))
        } else {
            (lo, false)
        }
    };

    Ok(EquilibriumPoint {
        delta,
        variant,
        d_star: Reach::new(d_star)?,
        method: SolveMethod::NumericRoot,
        clamped,
        note: None,
    })
}

/// Interior expression of the written-down formulas, ignoring the printed
/// branch cutoffs. `None` when a radicand is negative.
pub fn printed_interior_reach<R: Real>(variant: Variant, delta: R) -> Option<R> {
    let one = R::one();
    let three_halves = frac::<R>(3, 2);
    match variant {
        Variant::Benchmark => {
            let radicand = (lit::<R>(4.0) - lit::<R>(5.0) * delta) / (lit::<R>(3.0) * delta);
            if radicand < R::zero() {
                None
            } else {
                Some(three_halves * (one - radicand.sqrt()))
            }
        }
        Variant::NonNaiveG => {
            let radicand = lit::<R>(3.0) - lit::<R>(2.0) / delta;
            if radicand < R::zero() {
                None
            } else {
                Some(lit::<R>(3.0).sqrt() * radicand.sqrt())
            }
        }
        Variant::NonNaiveB => Some(lit::<R>(6.0) * (one - one / delta)),
        Variant::LimitedK(k) => {
            let mut s = R::zero();
            let mut pow = R::one();
            for _ in 0..=k.get() {
                s += pow;
                pow *= delta;
            }
            let radicand = lit::<R>(4.0) / (lit::<R>(3.0) * delta * s) - frac::<R>(1, 3);
            if radicand < R::zero() {
                None
            } else {
                Some(three_halves * (one - radicand.sqrt()))
            }
        }
    }
}

/// Printed branch point below which the written-down formula reports zero.
pub fn printed_threshold<R: Real>(variant: Variant) -> Option<R> {
    match variant {
        Variant::Benchmark => Some(frac(1, 2)),
        Variant::NonNaiveG => Some(frac(3, 5)),
        Variant::NonNaiveB => None,
        Variant::LimitedK(k) => Some(match k.get() {
            2 => frac(11, 20),
            _ => frac(3, 5),
        }),
    }
}

/// Raw value of the written-down piecewise formula, before clamping.
/// `None` when the formula is undefined (negative radicand).
fn closed_raw<R: Real>(variant: Variant, delta: R) -> Option<R> {
    match variant {
        Variant::Benchmark => {
            if delta <= frac::<R>(1, 2) {
                Some(R::zero())
            } else if delta <= frac::<R>(3, 4) {
                printed_interior_reach(variant, delta)
            } else {
                Some(R::one())
            }
        }
        Variant::NonNaiveG => {
            if delta <= frac::<R>(3, 5) {
                Some(R::zero())
            } else {
                printed_interior_reach(variant, delta)
            }
        }
        Variant::NonNaiveB => printed_interior_reach(variant, delta),
        Variant::LimitedK(_) => {
            let cutoff = printed_threshold::<R>(variant).expect("limited schemes have one");
            if delta < cutoff {
                Some(R::zero())
            } else {
                printed_interior_reach(variant, delta)
            }
        }
    }
}

/// Evaluates the written-down closed form verbatim, clamps to `[0, 1]`, and
/// annotates raw values outside the unit interval and branch points that
/// disagree with the numeric zero-crossing.
pub fn d_star_closed<R: Real>(
    variant: Variant,
    delta: DiscountFactor<R>,
) -> Result<EquilibriumPoint<R>> {
    let del = delta.get();
    let raw = closed_raw(variant, del);
    let (value, mut clamped, mut note) = match raw {
        None => (
            R::zero(),
            true,
            Some("formula undefined here (negative radicand); reported as 0".to_string()),
        ),
        Some(v) if v < R::zero() => {
            (R::zero(), true, Some(format!("raw value {v} below 0, clamped")))
        }
        Some(v) if v > R::one() => {
            (R::one(), true, Some(format!("raw value {v} above 1, clamped")))
        }
        Some(v) => (v, false, None),
    };

    // Printed branch thresholds that differ from the true zero-crossing.
    let exact = exact_threshold(variant, ClosedFormSource::AsPrinted);
    if let Some(exact) = exact {
        let printed: Option<R> = match variant {
            Variant::NonNaiveG => Some(frac(3, 5)),
            Variant::LimitedK(k) if k.get() == 2 => Some(frac(11, 20)),
            Variant::LimitedK(k) if k.get() == 1 || k.get() == 3 => Some(frac(3, 5)),
            _ => None,
        };
        if let Some(printed) = printed {
            let lo = printed.min(exact);
            let hi = printed.max(exact);
            if del > lo && del < hi {
                clamped = clamped || value != R::zero();
                let msg = "printed branch point disagrees with the numeric zero-crossing";
                note = Some(match note {
                    Some(n) => format!("{n}; {msg}"),
                    None => msg.to_string(),
                });
            }
        }
    }

    Ok(EquilibriumPoint {
        delta,
        variant,
        d_star: Reach::new(value)?,
        method: SolveMethod::ClosedPrinted,
        clamped,
        note,
    })
}

/// Written-down comparative static dd*/dδ on the interior branch.
pub fn d_star_sensitivity<R: Real>(variant: Variant, delta: DiscountFactor<R>) -> Result<R> {
    let del = delta.get();
    let d2 = del * del;
    match variant {
        Variant::Benchmark => {
            if del <= frac::<R>(1, 2) || del >= frac::<R>(3, 4) {
                return Err(Error::domain(
                    "benchmark sensitivity is defined on the interior branch (1/2, 3/4)",
                ));
            }
            Ok((lit::<R>(3.0) * del / (lit::<R>(4.0) - lit::<R>(5.0) * del)).sqrt() / d2)
        }
        Variant::NonNaiveG => {
            if del <= frac::<R>(2, 3) || del >= R::one() {
                return Err(Error::domain(
                    "good-opponent sensitivity is defined for δ in (2/3, 1)",
                ));
            }
            Ok((lit::<R>(3.0) * del / (lit::<R>(3.0) * del - lit::<R>(2.0))).sqrt() / d2)
        }
        Variant::NonNaiveB => {
            if del <= R::zero() {
                return Err(Error::domain("bad-opponent sensitivity needs δ > 0"));
            }
            Ok(R::one() / d2)
        }
        Variant::LimitedK(_) => Err(Error::domain(
            "no written-down sensitivity for the limited punishment schemes",
        )),
    }
}

/// True zero-crossing of the closed forms' branch point, where one exists:
/// the smallest δ with a positive maximal credible promise. Positive d*
/// first appears when the marginal cost of reneging at d = 0+ reaches the
/// marginal gain of 1, i.e. when `weight(δ) · dΔv/dd(0) = 1`.
fn exact_threshold<R: Real>(variant: Variant, source: ClosedFormSource) -> Option<R> {
    let slope: R = match (variant, source) {
        // The printed bad-opponent loss is -d^2/6: flat at zero, never a
        // positive root.
        (Variant::NonNaiveB, ClosedFormSource::AsPrinted) => return None,
        (Variant::NonNaiveB, ClosedFormSource::IntegrandFaithful) => frac(1, 2),
        (Variant::NonNaiveG, _) => frac(1, 2),
        (Variant::Benchmark | Variant::LimitedK(_), _) => R::one(),
    };
    match variant {
        Variant::Benchmark | Variant::NonNaiveG | Variant::NonNaiveB => {
            // δ/(1-δ) · slope = 1.
            Some(R::one() / (R::one() + slope))
        }
        Variant::LimitedK(_) => {
            // δ(1 + δ + … + δ^k) · slope = 1; the left side is increasing.
            let g = |delta: R| punishment_weight(variant, delta) * slope - R::one();
            let mut lo = R::zero();
            let mut hi = R::one();
            for _ in 0..200 {
                if hi - lo <= lit::<R>(1e-12) {
                    break;
                }
                let mid = (lo + hi) / lit::<R>(2.0);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid) >= R::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some((lo + hi) / lit::<R>(2.0))
        }
    }
}

/// Smallest δ at which `d_star_numeric` becomes positive. Returns 1.0 when
/// the variant never sustains a positive promise (the printed bad-opponent
/// cost is nonpositive for every δ < 1).
pub fn threshold_delta<R: Real>(variant: Variant, source: Option<ClosedFormSource>) -> Result<R> {
    let source = variant.resolve_source(source)?;
    Ok(exact_threshold(variant, source).unwrap_or_else(R::one))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn df(delta: f64) -> DiscountFactor<f64> {
        DiscountFactor::new(delta).unwrap()
    }

    fn reach(d: f64) -> Reach<f64> {
        Reach::new(d).unwrap()
    }

    #[test]
    fn discount_factor_domain() {
        assert!(DiscountFactor::new(1.0).is_err());
        assert!(DiscountFactor::new(-0.1).is_err());
        assert!(DiscountFactor::new(0.0).is_ok());
    }

    #[test]
    fn cost_of_reneging_examples() {
        let printed = ClosedFormSource::AsPrinted;
        let c = cost_of_reneging(VoterRegime::Naive, true, reach(0.5), df(0.7), printed).unwrap();
        assert!((c - 0.7 / 0.3 * (0.5 - 0.25 + 0.125 / 3.0)).abs() < 1e-12);

        // Fixed point of the non-naive good-opponent condition at δ = 0.7.
        let d_star = (3.0f64 * (3.0 - 2.0 / 0.7)).sqrt();
        let c = cost_of_reneging(VoterRegime::NonNaive, true, reach(d_star), df(0.7), printed)
            .unwrap();
        assert!((c - d_star).abs() < 1e-12);

        let lim = VoterRegime::limited(1).unwrap();
        let c = cost_of_reneging(lim, true, reach(0.2), df(0.7), printed).unwrap();
        assert!((c - 0.7 * 1.7 * (0.2 - 0.04 + 0.008 / 3.0)).abs() < 1e-12);

        for regime in [VoterRegime::Naive, VoterRegime::NonNaive, lim] {
            for opp in [true, false] {
                let c = cost_of_reneging(regime, opp, reach(0.0), df(0.9), printed).unwrap();
                assert_eq!(c, 0.0);
            }
        }
    }

    #[test]
    fn incentive_gap_examples() {
        let printed = ClosedFormSource::AsPrinted;
        let g = incentive_gap(VoterRegime::Naive, true, reach(0.5), df(0.7), printed).unwrap();
        assert!((g - (0.7 / 0.3 * 0.2916666666666667 - 0.5)).abs() < 1e-12);
        let g = incentive_gap(VoterRegime::Naive, true, reach(0.9), df(0.7), printed).unwrap();
        assert!((g - (0.7 / 0.3 * 0.333 - 0.9)).abs() < 1e-12);
        assert!(g < 0.0);
        let g = incentive_gap(VoterRegime::Naive, false, reach(0.0), df(0.3), printed).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn numeric_reach_examples() {
        let p = d_star_numeric(Variant::Benchmark, df(0.5), None).unwrap();
        assert_eq!(p.d_star.get(), 0.0);

        let p = d_star_numeric(Variant::Benchmark, df(0.7), None).unwrap();
        let expected = 1.5 * (1.0 - (0.5f64 / 2.1).sqrt());
        assert!((p.d_star.get() - expected).abs() < 1e-9, "{}", p.d_star.get());

        let p = d_star_numeric(Variant::NonNaiveG, df(0.7), None).unwrap();
        assert!((p.d_star.get() - 0.6546536707079771).abs() < 1e-9);

        let p = d_star_numeric(Variant::NonNaiveG, df(0.8), None).unwrap();
        assert_eq!(p.d_star.get(), 1.0);
        assert!(p.clamped);

        let p = d_star_numeric(
            Variant::NonNaiveB,
            df(0.7),
            Some(ClosedFormSource::AsPrinted),
        )
        .unwrap();
        assert_eq!(p.d_star.get(), 0.0);
        assert!(p.clamped);

        // Bisection-derived value for the integrand-faithful bad-opponent cost:
        // root of d^2 - 3d + 1 = 2(1-δ)/δ at δ = 0.7.
        let p = d_star_numeric(
            Variant::NonNaiveB,
            df(0.7),
            Some(ClosedFormSource::IntegrandFaithful),
        )
        .unwrap();
        let expected = (3.0 - (9.0f64 - 4.0 * (1.0 - 2.0 * 0.3 / 0.7)).sqrt()) / 2.0;
        assert!((p.d_star.get() - expected).abs() < 1e-9, "{}", p.d_star.get());
        assert!((p.d_star.get() - 0.048).abs() < 1e-3);

        let p = d_star_numeric(Variant::limited(2).unwrap(), df(0.7), None).unwrap();
        assert!((p.d_star.get() - 0.4013885298129213).abs() < 1e-9, "{}", p.d_star.get());

        assert!(d_star_numeric(Variant::NonNaiveB, df(0.7), None).is_err());
    }

    #[test]
    fn closed_reach_examples() {
        let p = d_star_closed(Variant::Benchmark, df(0.75)).unwrap();
        assert_eq!(p.d_star.get(), 1.0);
        assert!(!p.clamped);

        let p = d_star_closed(Variant::Benchmark, df(0.6)).unwrap();
        assert!((p.d_star.get() - 0.3819660112501051).abs() < 1e-12);

        let p = d_star_closed(Variant::NonNaiveB, df(0.7)).unwrap();
        assert_eq!(p.d_star.get(), 0.0);
        assert!(p.clamped);
        assert!(p.note.is_some());

        let p = d_star_closed(Variant::limited(1).unwrap(), df(0.7)).unwrap();
        assert!((p.d_star.get() - 0.1692076032072679).abs() < 1e-12, "{}", p.d_star.get());

        let p = d_star_closed(Variant::limited(3).unwrap(), df(0.7)).unwrap();
        assert!((p.d_star.get() - 0.5294579099468891).abs() < 1e-12, "{}", p.d_star.get());

        // Undefined radicand between the printed branch point and the true
        // zero-crossing of the good-opponent variant.
        let p = d_star_closed(Variant::NonNaiveG, df(0.62)).unwrap();
        assert_eq!(p.d_star.get(), 0.0);
        assert!(p.clamped);
    }

    #[test]
    fn sensitivity_examples() {
        let s = d_star_sensitivity(Variant::Benchmark, df(0.6)).unwrap();
        assert!((s - (1.8f64).sqrt() / 0.36).abs() < 1e-12);
        let s = d_star_sensitivity(Variant::NonNaiveG, df(0.7)).unwrap();
        assert!((s - (21.0f64).sqrt() / 0.49).abs() < 1e-12);
        let s = d_star_sensitivity(Variant::NonNaiveB, df(0.7)).unwrap();
        assert!((s - 1.0 / 0.49).abs() < 1e-12);
        assert!(d_star_sensitivity(Variant::Benchmark, df(0.5)).is_err());
        assert!(d_star_sensitivity(Variant::NonNaiveG, df(0.65)).is_err());
        assert!(d_star_sensitivity(Variant::limited(1).unwrap(), df(0.7)).is_err());
    }

    #[test]
    fn threshold_examples() {
        let t = threshold_delta::<f64>(Variant::Benchmark, None).unwrap();
        assert!((t - 0.5).abs() < 1e-9);
        let t = threshold_delta::<f64>(Variant::NonNaiveG, None).unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-9);
        let t = threshold_delta::<f64>(Variant::limited(1).unwrap(), None).unwrap();
        assert!((t - 0.6180339887498949).abs() < 1e-9);
        let t = threshold_delta::<f64>(Variant::limited(2).unwrap(), None).unwrap();
        assert!((t - 0.5436890126920763).abs() < 1e-6);
        let t = threshold_delta::<f64>(Variant::limited(3).unwrap(), None).unwrap();
        assert!((t - 0.5187900636758842).abs() < 1e-6);
        // The printed bad-opponent cost is nonpositive: never a positive d*.
        let t = threshold_delta::<f64>(Variant::NonNaiveB, Some(ClosedFormSource::AsPrinted))
            .unwrap();
        assert_eq!(t, 1.0);
        let t = threshold_delta::<f64>(
            Variant::NonNaiveB,
            Some(ClosedFormSource::IntegrandFaithful),
        )
        .unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_property_at_the_root() {
        for (variant, delta) in [
            (Variant::Benchmark, 0.6),
            (Variant::Benchmark, 0.7),
            (Variant::NonNaiveG, 0.7),
            (Variant::limited(2).unwrap(), 0.7),
        ] {
            let p = d_star_numeric(variant, df(delta), None).unwrap();
            let d = p.d_star.get();
            let gap = incentive_gap(
                variant.regime(),
                variant.opponent_good(),
                reach(d),
                df(delta),
                ClosedFormSource::AsPrinted,
            )
            .unwrap();
            assert!(gap.abs() <= 1e-9, "{variant:?} δ={delta}: gap {gap}");
            if d < 1.0 {
                let above = incentive_gap(
                    variant.regime(),
                    variant.opponent_good(),
                    reach(d + 1e-4),
                    df(delta),
                    ClosedFormSource::AsPrinted,
                )
                .unwrap();
                assert!(above < 0.0);
            }
        }
    }
}
