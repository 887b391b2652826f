//! Repeated-game trajectories: simulated histories with reputation updates,
//! empirical discounted values, and deviation profitability checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::{incentive_gap, DiscountFactor};
use crate::error::{Error, Result};
use crate::payoffs::{delta_v, ClosedFormSource, ReputationPair};
use crate::scalar::{lit, Real};
use crate::stage_game::{
    play_stage, utility, IdealPoint, PolicyPoint, PromiseMode, Reputation, Side, VoterRegime,
};

/// When a candidate deviates from the promise-keeping strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationPolicy {
    /// Keep every promise.
    Never,
    /// Renege whenever elected on a promise away from the ideal point.
    Always,
    /// Renege exactly once, at the given period (0-based), if elected on a
    /// promise away from the ideal point then.
    OneShotAtPeriod(u64),
}

impl DeviationPolicy {
    fn wants_to_renege(self, period: u64) -> bool {
        match self {
            DeviationPolicy::Never => false,
            DeviationPolicy::Always => true,
            DeviationPolicy::OneShotAtPeriod(t) => period == t,
        }
    }
}

/// One period of a simulated history.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord<R: Real> {
    pub period: u64,
    pub x_l: R,
    pub x_r: R,
    /// Reputations entering the period, before any reneging this period.
    pub rep_l: Reputation,
    pub rep_r: Reputation,
    pub winner: Side,
    pub implemented: PolicyPoint<R>,
    pub utility_l: R,
    pub utility_r: R,
    pub reneged: bool,
    pub region: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<R: Real> {
    pub periods: Vec<PeriodRecord<R>>,
    /// Σ δ^t · u_t for t = 0 .. horizon-1.
    pub discounted_l: R,
    pub discounted_r: R,
}

fn punishment_length(regime: VoterRegime) -> Reputation {
    match regime {
        VoterRegime::Naive | VoterRegime::NonNaive => Reputation::BadForever,
        VoterRegime::LimitedPunishment(k) => {
            Reputation::bad_for(k.get() + 1).expect("k + 1 >= 2")
        }
    }
}

/// Plays `horizon` elections with freshly drawn ideal points each period,
/// applying the deviation policies and the reputation clock.
#[allow(clippy::too_many_arguments)]
pub fn simulate_history<R: Real>(
    regime: VoterRegime,
    delta: DiscountFactor<R>,
    d: crate::stage_game::Reach<R>,
    horizon: u64,
    seed: u64,
    policy_l: DeviationPolicy,
    policy_r: DeviationPolicy,
    initial_reps: (Reputation, Reputation),
) -> Result<Trajectory<R>> {
    if horizon == 0 {
        return Err(Error::domain("simulation horizon must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut rep_l, mut rep_r) = initial_reps;
    let del = delta.get();

    let mut periods = Vec::with_capacity(horizon.min(1 << 20) as usize);
    let mut discounted_l = R::zero();
    let mut discounted_r = R::zero();
    let mut weight = R::one();

    for t in 0..horizon {
        let xr: f64 = rng.gen();
        let xl: f64 = rng.gen::<f64>() - 1.0;
        let tie: u64 = rng.gen();
        let x_l = IdealPoint::left(lit::<R>(xl))?;
        let x_r = IdealPoint::right(lit::<R>(xr))?;
        let mut out = play_stage(
            regime,
            rep_l,
            rep_r,
            x_l,
            x_r,
            d,
            PromiseMode::Uncapped,
            tie,
        )?;

        // A winner with a good reputation who was elected on a promise away
        // from their ideal point may renege and implement the ideal instead.
        let (winner_rep, winner_policy, winner_ideal) = match out.winner {
            Side::Left => (rep_l, policy_l, x_l),
            Side::Right => (rep_r, policy_r, x_r),
        };
        let away_from_ideal = out.implemented.value() != winner_ideal.value();
        if winner_rep.is_good() && away_from_ideal && winner_policy.wants_to_renege(t) {
            let ideal = PolicyPoint::new(winner_ideal.value())?;
            out.implemented = ideal;
            out.utility_l = utility(ideal, PolicyPoint::new(x_l.value())?);
            out.utility_r = utility(ideal, PolicyPoint::new(x_r.value())?);
            out.reneged = true;
        }

        periods.push(PeriodRecord {
            period: t,
            x_l: x_l.value(),
            x_r: x_r.value(),
            rep_l,
            rep_r,
            winner: out.winner,
            implemented: out.implemented,
            utility_l: out.utility_l,
            utility_r: out.utility_r,
            reneged: out.reneged,
            region: out.region,
        });
        discounted_l += weight * out.utility_l;
        discounted_r += weight * out.utility_r;
        weight *= del;

        // Reputation update at the end of the period: reneging restarts the
        // punishment clock, everyone else's clock ticks down.
        let (new_l, new_r) = match (out.reneged, out.winner) {
            (true, Side::Left) => (punishment_length(regime), rep_r.tick()),
            (true, Side::Right) => (rep_l.tick(), punishment_length(regime)),
            (false, _) => (rep_l.tick(), rep_r.tick()),
        };
        rep_l = new_l;
        rep_r = new_r;
    }

    Ok(Trajectory {
        periods,
        discounted_l,
        discounted_r,
    })
}

/// Monte Carlo estimate of Σ_{t=1..horizon} δ^t E[u] with both reputations
/// held fixed, averaged over `reps` independent streams. L's perspective.
/// Returns the mean and its standard error.
pub fn empirical_discounted_value<R: Real>(
    regime: VoterRegime,
    pair: ReputationPair,
    delta: DiscountFactor<R>,
    d: crate::stage_game::Reach<R>,
    horizon: u64,
    reps: u64,
    seed: u64,
) -> Result<(R, R)> {
    if horizon == 0 || reps == 0 {
        return Err(Error::domain("horizon and repetition count must be at least 1"));
    }
    let (rep_l, rep_r) = pair.reputations();
    let del = delta.get();
    let mut total = R::zero();
    let mut total_sq = R::zero();
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rep);
        let mut sum = R::zero();
        let mut weight = del;
        for _ in 0..horizon {
            let xr: f64 = rng.gen();
            let xl: f64 = rng.gen::<f64>() - 1.0;
            let tie: u64 = rng.gen();
            let out = play_stage(
                regime,
                rep_l,
                rep_r,
                IdealPoint::left(lit::<R>(xl))?,
                IdealPoint::right(lit::<R>(xr))?,
                d,
                PromiseMode::Uncapped,
                tie,
            )?;
            sum += weight * out.utility_l;
            weight *= del;
        }
        total += sum;
        total_sq += sum * sum;
    }
    let n = R::from_u64(reps).unwrap();
    let mean = total / n;
    let stderr = if reps > 1 {
        let var = (total_sq - n * mean * mean) / (n - R::one());
        (var.max(R::zero()) / n).sqrt()
    } else {
        R::zero()
    };
    Ok((mean, stderr))
}

/// Upper bound on the discounted tail truncated after `horizon` periods:
/// per-period utilities lie in [-2, 0].
pub fn truncation_bound<R: Real>(delta: DiscountFactor<R>, horizon: u64) -> R {
    let del = delta.get();
    del.powi(horizon as i32 + 1) * lit::<R>(2.0) / (R::one() - del)
}

/// Expected net value of a one-shot deviation at the given offset into the
/// opponent's punishment window, relative to keeping the promise: discounted
/// punishment stream minus the immediate gain `d`. Nonnegative means the
/// promise is kept. For the unlimited-punishment regimes only offset 0 is
/// meaningful; for punishment scheme `k` the opponent entered the window
/// `offset` periods ago, so offsets run over `0..=k`.
pub fn deviation_profitability<R: Real>(
    regime: VoterRegime,
    opponent_bad_remaining: u32,
    delta: DiscountFactor<R>,
    d: crate::stage_game::Reach<R>,
    source: ClosedFormSource,
) -> Result<R> {
    match regime {
        VoterRegime::Naive | VoterRegime::NonNaive => {
            if opponent_bad_remaining != 0 {
                return Err(Error::domain(
                    "unlimited punishment tracks no opponent window; remaining must be 0",
                ));
            }
            incentive_gap(regime, true, d, delta, source)
        }
        VoterRegime::LimitedPunishment(k) => {
            let own = k.get() + 1;
            if opponent_bad_remaining > own {
                return Err(Error::domain(format!(
                    "opponent punishment remaining {opponent_bad_remaining} exceeds the \
                     window length {own}"
                )));
            }
            // Own punishment runs for periods s = 1..=k+1 after the deviation.
            // The opponent is bad for the first `opponent_bad_remaining` of
            // them — but the one-period payoff loss is the same against either
            // opponent type, so the stream collapses to the symmetric one.
            let del = delta.get();
            let mut stream = R::zero();
            let mut pow = del;
            for s in 1..=own {
                let opp_good = s > opponent_bad_remaining;
                let dv = delta_v(regime, opp_good, d, source)?;
                stream += pow * dv;
                pow *= del;
            }
            Ok(stream - d.get())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stage_game::Reach;

    fn df(delta: f64) -> DiscountFactor<f64> {
        DiscountFactor::new(delta).unwrap()
    }

    fn reach(d: f64) -> Reach<f64> {
        Reach::new(d).unwrap()
    }

    #[test]
    fn rejects_zero_horizon() {
        assert!(simulate_history(
            VoterRegime::Naive,
            df(0.7),
            reach(0.3),
            0,
            1,
            DeviationPolicy::Never,
            DeviationPolicy::Never,
            (Reputation::Good, Reputation::Good),
        )
        .is_err());
    }

    #[test]
    fn never_policy_keeps_everyone_good() {
        let traj = simulate_history(
            VoterRegime::Naive,
            df(0.7),
            reach(0.4),
            200,
            42,
            DeviationPolicy::Never,
            DeviationPolicy::Never,
            (Reputation::Good, Reputation::Good),
        )
        .unwrap();
        assert_eq!(traj.periods.len(), 200);
        for p in &traj.periods {
            assert!(!p.reneged);
            assert!(p.rep_l.is_good() && p.rep_r.is_good());
        }
    }

    #[test]
    fn limited_punishment_clock_restores_reputation() {
        // Scheme k = 1: a renege at period t means bad at t+1 and t+2, good
        // again from t+3 on.
        let regime = VoterRegime::limited(1).unwrap();
        let traj = simulate_history(
            regime,
            df(0.7),
            reach(0.9),
            400,
            7,
            DeviationPolicy::Always,
            DeviationPolicy::Never,
            (Reputation::Good, Reputation::Good),
        )
        .unwrap();
        let first = traj
            .periods
            .iter()
            .position(|p| p.reneged && p.winner == Side::Left)
            .expect("a wide promise against an eager deviator reneges eventually");
        let t = traj.periods[first].period as usize;
        assert_eq!(
            traj.periods[t + 1].rep_l,
            Reputation::bad_for(2).unwrap()
        );
        assert_eq!(
            traj.periods[t + 2].rep_l,
            Reputation::bad_for(1).unwrap()
        );
        // If L reneged again while still bad that would be impossible (bad
        // candidates implement their ideal), so t+3 must be good.
        assert!(traj.periods[t + 3].rep_l.is_good());
    }

    #[test]
    fn reneging_is_impossible_at_zero_reach() {
        // With d = 0 every promise is the ideal point, so Always never fires.
        let traj = simulate_history(
            VoterRegime::Naive,
            df(0.7),
            reach(0.0),
            300,
            3,
            DeviationPolicy::Always,
            DeviationPolicy::Always,
            (Reputation::Good, Reputation::Good),
        )
        .unwrap();
        assert!(traj.periods.iter().all(|p| !p.reneged));
    }

    #[test]
    fn one_shot_deviation_fires_once() {
        let regime = VoterRegime::limited(2).unwrap();
        let traj = simulate_history(
            regime,
            df(0.7),
            reach(0.9),
            500,
            11,
            DeviationPolicy::Always,
            DeviationPolicy::Always,
            (Reputation::Good, Reputation::Good),
        )
        .unwrap();
        // Sanity on the update rule: only winners renege, and a reneging
        // winner is always good entering the period.
        for p in &traj.periods {
            if p.reneged {
                let rep = match p.winner {
                    Side::Left => p.rep_l,
                    Side::Right => p.rep_r,
                };
                assert!(rep.is_good());
            }
        }
        let one_shot = simulate_history(
            VoterRegime::Naive,
            df(0.7),
            reach(0.9),
            500,
            11,
            DeviationPolicy::OneShotAtPeriod(0),
            DeviationPolicy::Never,
            (Reputation::Good, Reputation::Good),
        )
        .unwrap();
        assert!(one_shot.periods.iter().filter(|p| p.reneged).count() <= 1);
    }

    #[test]
    fn discounted_sum_matches_records() {
        let traj = simulate_history(
            VoterRegime::NonNaive,
            df(0.6),
            reach(0.3),
            50,
            9,
            DeviationPolicy::Never,
            DeviationPolicy::Never,
            (Reputation::Good, Reputation::BadForever),
        )
        .unwrap();
        let mut acc = 0.0;
        for (t, p) in traj.periods.iter().enumerate() {
            acc += 0.6f64.powi(t as i32) * p.utility_l;
        }
        assert!((acc - traj.discounted_l).abs() < 1e-12);
    }

    #[test]
    fn empirical_value_approaches_closed_form() {
        // E[Σ_{t>=1} δ^t u] = δ/(1-δ) · v. Horizon chosen so the truncated
        // tail is far below the Monte Carlo noise floor.
        let delta = df(0.7);
        let d = reach(0.5);
        let (v, se) = empirical_discounted_value(
            VoterRegime::Naive,
            ReputationPair::GoodBad,
            delta,
            d,
            80,
            4000,
            5,
        )
        .unwrap();
        let closed = 0.7 / 0.3 * (-0.5 + 0.5 - 0.25 + 0.125 / 3.0);
        let bound = truncation_bound(delta, 80);
        assert!(bound < 1e-10);
        assert!(se > 0.0 && se < 0.05);
        assert!((v - closed).abs() < 4.0 * se, "empirical {v} vs closed {closed}, se {se}");
    }

    #[test]
    fn empirical_value_is_seed_deterministic() {
        let args = (
            VoterRegime::Naive,
            ReputationPair::GoodGood,
            df(0.6),
            reach(0.2),
        );
        let a = empirical_discounted_value(args.0, args.1, args.2, args.3, 30, 50, 77).unwrap();
        let b = empirical_discounted_value(args.0, args.1, args.2, args.3, 30, 50, 77).unwrap();
        let c = empirical_discounted_value(args.0, args.1, args.2, args.3, 30, 50, 78).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn deviation_profitability_examples() {
        let printed = ClosedFormSource::AsPrinted;
        // Benchmark at δ = 0.7, d = 0.5: stream 0.7/0.3 · 0.2916667 ≈ 0.6806,
        // gain 0.5 — keeping the promise nets about +0.18.
        let g = deviation_profitability(VoterRegime::Naive, 0, df(0.7), reach(0.5), printed)
            .unwrap();
        assert!((g - (0.7 / 0.3 * 0.29166666666666663 - 0.5)).abs() < 1e-12);
        assert!((g - 0.180555).abs() < 1e-4);

        // Scheme k = 1 at δ = 0.7, d = 0.5: weight 0.7·1.7 = 1.19 gives a
        // stream of ≈ 0.347, below the gain — deviation profitable.
        let regime = VoterRegime::limited(1).unwrap();
        let g = deviation_profitability(regime, 0, df(0.7), reach(0.5), printed).unwrap();
        assert!((g - (1.19 * 0.29166666666666663 - 0.5)).abs() < 1e-12);
        assert!(g < 0.0);

        assert!(
            deviation_profitability(VoterRegime::Naive, 1, df(0.7), reach(0.5), printed).is_err()
        );
        assert!(deviation_profitability(regime, 3, df(0.7), reach(0.5), printed).is_err());
    }

    #[test]
    fn deviation_timing_is_irrelevant() {
        // The one-period loss from a bad reputation is the same against a
        // good or bad opponent, so the offset into the opponent's punishment
        // window must not matter.
        let printed = ClosedFormSource::AsPrinted;
        for k in 1..=3u32 {
            let regime = VoterRegime::limited(k).unwrap();
            let base =
                deviation_profitability(regime, 0, df(0.7), reach(0.3), printed).unwrap();
            for rem in 1..=k + 1 {
                let g =
                    deviation_profitability(regime, rem, df(0.7), reach(0.3), printed).unwrap();
                assert!((g - base).abs() < 1e-12, "k={k} rem={rem}");
            }
        }
    }

    #[test]
    fn profitability_sign_matches_the_fixed_point() {
        use crate::equilibrium::{d_star_numeric, Variant};
        let p = d_star_numeric(Variant::limited(2).unwrap(), df(0.7), None).unwrap();
        let d = p.d_star.get();
        let regime = VoterRegime::limited(2).unwrap();
        let printed = ClosedFormSource::AsPrinted;
        let below =
            deviation_profitability(regime, 0, df(0.7), reach(d - 1e-3), printed).unwrap();
        let above =
            deviation_profitability(regime, 0, df(0.7), reach(d + 1e-3), printed).unwrap();
        assert!(below > 0.0 && above < 0.0);
    }
}
