//! Adjudication of the written-down closed forms against the independent
//! numeric oracles. Each check compares a claimed value with a computed one;
//! known inconsistencies in the source material are listed in a static
//! ledger so they classify as documented discrepancies, not bugs.

use crate::equilibrium::{
    d_star_closed, d_star_numeric, d_star_sensitivity, incentive_gap, printed_interior_reach,
    threshold_delta, DiscountFactor, Variant,
};
use crate::dynamics::deviation_profitability;
use crate::payoffs::{delta_v, v_closed, v_quadrature, ClosedFormSource, ReputationPair};
use crate::stage_game::{Reach, VoterRegime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Match,
    DocumentedDiscrepancy,
    UnexpectedMismatch,
}

impl CheckStatus {
    fn label(self) -> &'static str {
        match self {
            CheckStatus::Match => "match",
            CheckStatus::DocumentedDiscrepancy => "documented-discrepancy",
            CheckStatus::UnexpectedMismatch => "unexpected-mismatch",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub id: String,
    pub claim: String,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

/// Claim ids whose expected-vs-computed mismatch is a known inconsistency in
/// the source formulas, with a one-line reason. Machine-readable so the
/// report can separate "documented" from "implementation bug".
pub const DOCUMENTED_DISCREPANCIES: &[(&str, &str)] = &[
    (
        "printed-value-nonnaive-gb-d0.30",
        "printed non-naive good-vs-bad value drops the pushed-platform correction",
    ),
    (
        "printed-value-nonnaive-gb-d0.50",
        "printed non-naive good-vs-bad value drops the pushed-platform correction",
    ),
    (
        "printed-value-nonnaive-gb-d0.75",
        "printed non-naive good-vs-bad value drops the pushed-platform correction",
    ),
    (
        "printed-reach-bad-opponent-0.70",
        "printed bad-opponent reach formula is negative for every discount below 1",
    ),
    (
        "printed-derivative-bad-opponent-0.80",
        "printed derivative 1/delta^2 disagrees with the printed formula's slope 6/delta^2",
    ),
    (
        "printed-threshold-nonnaive-g",
        "printed branch point 3/5 precedes the true zero-crossing 2/3",
    ),
    (
        "printed-threshold-limited-k1",
        "printed branch point 3/5 precedes the true zero-crossing 0.618034",
    ),
    (
        "printed-threshold-limited-k2",
        "printed branch point 11/20 follows the true zero-crossing 0.543689",
    ),
    (
        "printed-threshold-limited-k3",
        "printed branch point 3/5 follows the true zero-crossing 0.518790",
    ),
    (
        "printed-branch-window-limited-k2",
        "between the true zero-crossing and the printed branch point the formula reports 0",
    ),
    (
        "printed-branch-window-limited-k3",
        "between the true zero-crossing and the printed branch point the formula reports 0",
    ),
    (
        "ordering-limited-0.60-strict",
        "the k=1 reach is exactly 0 at discount 0.6, so the ascending chain's first link is weak",
    ),
    (
        "printed-decimal-benchmark-0.70",
        "quoted decimal 0.7676 rounds to 0.7681 when recomputed",
    ),
    (
        "printed-decimal-limited-k2-0.70",
        "quoted decimal 0.4015 rounds to 0.4014 when recomputed",
    ),
    (
        "printed-decimal-limited-k2-0.60",
        "quoted decimal 0.1581 rounds to 0.1580 when recomputed",
    ),
    (
        "printed-decimal-limited-k3-0.60",
        "quoted decimal 0.2561 rounds to 0.2559 when recomputed",
    ),
];

fn is_documented(id: &str) -> bool {
    DOCUMENTED_DISCREPANCIES.iter().any(|(d, _)| *d == id)
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn unexpected_mismatches(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::UnexpectedMismatch)
            .count()
    }

    pub fn documented_discrepancies(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::DocumentedDiscrepancy)
            .count()
    }

    pub fn passed(&self) -> bool {
        self.unexpected_mismatches() == 0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<22} {:<42} expected {:>14.10} computed {:>14.10} |diff| {:.3e} tol {:.1e}  {}\n",
                c.status.label(),
                c.id,
                c.expected,
                c.computed,
                (c.expected - c.computed).abs(),
                c.tolerance,
                c.claim,
            ));
        }
        out.push_str(&format!(
            "checks: {} total, {} match, {} documented-discrepancy, {} unexpected-mismatch\n",
            self.checks.len(),
            self.checks
                .iter()
                .filter(|c| c.status == CheckStatus::Match)
                .count(),
            self.documented_discrepancies(),
            self.unexpected_mismatches(),
        ));
        out
    }
}

struct Builder {
    checks: Vec<Check>,
    tol_override: Option<f64>,
}

impl Builder {
    fn push(&mut self, id: &str, claim: &str, expected: f64, computed: f64, tolerance: f64) {
        let tol = self.tol_override.unwrap_or(tolerance);
        let status = if (expected - computed).abs() <= tol {
            CheckStatus::Match
        } else if is_documented(id) {
            CheckStatus::DocumentedDiscrepancy
        } else {
            CheckStatus::UnexpectedMismatch
        };
        self.checks.push(Check {
            id: id.to_string(),
            claim: claim.to_string(),
            expected,
            computed,
            tolerance: tol,
            status,
        });
    }
}

fn df(delta: f64) -> DiscountFactor<f64> {
    DiscountFactor::new(delta).unwrap()
}

fn reach(d: f64) -> Reach<f64> {
    Reach::new(d).unwrap()
}

fn numeric(variant: Variant, delta: f64, source: Option<ClosedFormSource>) -> f64 {
    d_star_numeric(variant, df(delta), source)
        .expect("numeric solve on a valid grid")
        .d_star
        .get()
}

fn chain_holds(values: &[f64], strict: bool) -> f64 {
    let ok = values.windows(2).all(|w| if strict { w[0] < w[1] } else { w[0] <= w[1] });
    if ok {
        1.0
    } else {
        0.0
    }
}

/// Runs the full adjudication suite. `tol_override` replaces every check's
/// default tolerance when given.
pub fn verify_consistency(tol_override: Option<f64>) -> VerificationReport {
    let mut b = Builder {
        checks: Vec::new(),
        tol_override,
    };
    let printed = ClosedFormSource::AsPrinted;
    let faithful = ClosedFormSource::IntegrandFaithful;

    // Closed forms against the quadrature oracle.
    for (regime, name) in [(VoterRegime::Naive, "naive"), (VoterRegime::NonNaive, "nonnaive")] {
        for (pair, pname) in [
            (ReputationPair::GoodGood, "gg"),
            (ReputationPair::GoodBad, "gb"),
            (ReputationPair::BadGood, "bg"),
            (ReputationPair::BadBad, "bb"),
        ] {
            for d in [0.25, 0.5, 0.9] {
                // The table-faithful closed form is the one the quadrature
                // oracle must reproduce; for every case but the non-naive
                // good-vs-bad value the two sources coincide.
                let expected = v_closed(regime, pair, reach(d), faithful).unwrap().value;
                let computed = v_quadrature(regime, pair, reach(d), 1e-9).unwrap().value;
                b.push(
                    &format!("quadrature-{name}-{pname}-d{d:.2}"),
                    "closed-form expected payoff equals the quadrature oracle",
                    expected,
                    computed,
                    1e-6,
                );
            }
        }
    }
    for d in [0.3, 0.5, 0.75] {
        let expected = v_closed(VoterRegime::NonNaive, ReputationPair::GoodBad, reach(d), printed)
            .unwrap()
            .value;
        let computed =
            v_quadrature(VoterRegime::NonNaive, ReputationPair::GoodBad, reach(d), 1e-9)
                .unwrap()
                .value;
        b.push(
            &format!("printed-value-nonnaive-gb-d{d:.2}"),
            "printed non-naive good-vs-bad value equals the quadrature oracle",
            expected,
            computed,
            1e-6,
        );
    }

    // The per-period value of a good reputation is opponent-independent
    // under naive voters.
    for d in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let vs_good = delta_v(VoterRegime::Naive, true, reach(d), printed).unwrap();
        let vs_bad = delta_v(VoterRegime::Naive, false, reach(d), printed).unwrap();
        b.push(
            &format!("reputation-value-symmetry-d{d:.2}"),
            "naive reputation value is the same against either opponent",
            vs_good,
            vs_bad,
            1e-12,
        );
    }

    // Numeric fixed points really are fixed points.
    let fixed_cases = [
        (Variant::Benchmark, 0.55),
        (Variant::Benchmark, 0.6),
        (Variant::Benchmark, 0.7),
        (Variant::NonNaiveG, 0.68),
        (Variant::NonNaiveG, 0.7),
        (Variant::NonNaiveG, 0.74),
        (Variant::limited(1).unwrap(), 0.7),
        (Variant::limited(2).unwrap(), 0.7),
        (Variant::limited(3).unwrap(), 0.7),
    ];
    for (variant, delta) in fixed_cases {
        let d = numeric(variant, delta, None);
        let gap = incentive_gap(
            variant.regime(),
            variant.opponent_good(),
            reach(d),
            df(delta),
            printed,
        )
        .unwrap();
        b.push(
            &format!("fixed-point-{}-{delta:.2}", variant_slug(variant)),
            "incentive gap vanishes at the numeric reach",
            0.0,
            gap,
            1e-9,
        );
    }

    // Closed formulas against the numeric roots, on their valid ranges.
    let mut max_diff = 0.0f64;
    for i in 0..100 {
        let delta = 0.5 + 0.49 * i as f64 / 99.0;
        let c = d_star_closed(Variant::Benchmark, df(delta)).unwrap().d_star.get();
        let n = numeric(Variant::Benchmark, delta, None);
        max_diff = max_diff.max((c - n).abs());
    }
    b.push(
        "closed-vs-numeric-benchmark",
        "benchmark formula equals the numeric root on [0.5, 0.99]",
        0.0,
        max_diff,
        1e-8,
    );
    let mut max_diff = 0.0f64;
    for i in 0..=50 {
        let delta = 2.0 / 3.0 + 1e-9 + (0.75 - 2.0 / 3.0 - 1e-9) * i as f64 / 50.0;
        let c = d_star_closed(Variant::NonNaiveG, df(delta)).unwrap().d_star.get();
        let n = numeric(Variant::NonNaiveG, delta, None);
        max_diff = max_diff.max((c - n).abs());
    }
    b.push(
        "closed-vs-numeric-nonnaive-g",
        "good-opponent formula equals the numeric root on [2/3, 3/4]",
        0.0,
        max_diff,
        1e-8,
    );
    let mut min_val = 1.0f64;
    for i in 0..=24 {
        let delta = 0.75 + 0.24 * i as f64 / 24.0;
        min_val = min_val.min(numeric(Variant::Benchmark, delta, None));
        min_val = min_val.min(numeric(Variant::NonNaiveG, delta, None));
    }
    b.push(
        "unit-reach-above-0.75",
        "benchmark and good-opponent reach both saturate at 1 on [0.75, 0.99]",
        1.0,
        min_val,
        1e-9,
    );
    for k in 1..=3u32 {
        let variant = Variant::limited(k).unwrap();
        let thr = threshold_delta::<f64>(variant, None).unwrap();
        let mut max_diff = 0.0f64;
        for i in 0..=50 {
            let delta = (thr + 1e-6) + (0.99 - thr - 1e-6) * i as f64 / 50.0;
            let interior = printed_interior_reach(variant, delta)
                .expect("interior formula defined above the zero-crossing")
                .clamp(0.0, 1.0);
            let n = numeric(variant, delta, None);
            max_diff = max_diff.max((interior - n).abs());
        }
        b.push(
            &format!("closed-vs-numeric-limited-k{k}"),
            "limited-scheme formula equals the numeric root above its zero-crossing",
            0.0,
            max_diff,
            1e-8,
        );
    }
    // Between the true zero-crossing and the (late) printed branch point the
    // written-down piecewise formula reports 0 while the root is positive.
    for (k, delta) in [(2u32, 0.547), (3u32, 0.57)] {
        let variant = Variant::limited(k).unwrap();
        let c = d_star_closed(variant, df(delta)).unwrap().d_star.get();
        let n = numeric(variant, delta, None);
        b.push(
            &format!("printed-branch-window-limited-k{k}"),
            "piecewise formula equals the numeric root just below the printed branch point",
            c,
            n,
            1e-8,
        );
    }

    // Thresholds: first discount with a positive reach.
    let threshold_cases = [
        (Variant::Benchmark, 0.5, "benchmark"),
        (Variant::NonNaiveG, 2.0 / 3.0, "nonnaive-g"),
        (Variant::limited(1).unwrap(), 0.6180339887498949, "limited-k1"),
        (Variant::limited(2).unwrap(), 0.5436890126920763, "limited-k2"),
        (Variant::limited(3).unwrap(), 0.5187900636758842, "limited-k3"),
    ];
    for (variant, literal, slug) in threshold_cases {
        let t = threshold_delta::<f64>(variant, None).unwrap();
        b.push(
            &format!("threshold-{slug}"),
            "first discount with a positive reach",
            literal,
            t,
            1e-6,
        );
    }
    let printed_thresholds = [
        (Variant::NonNaiveG, 0.6, "nonnaive-g"),
        (Variant::limited(1).unwrap(), 0.6, "limited-k1"),
        (Variant::limited(2).unwrap(), 0.55, "limited-k2"),
        (Variant::limited(3).unwrap(), 0.6, "limited-k3"),
    ];
    for (variant, quoted, slug) in printed_thresholds {
        let t = threshold_delta::<f64>(variant, None).unwrap();
        b.push(
            &format!("printed-threshold-{slug}"),
            "printed branch point equals the zero-crossing",
            quoted,
            t,
            1e-6,
        );
    }

    // Derivatives: analytic sensitivities against central finite differences
    // of the closed formulas.
    let h = 1e-5;
    let fd_bench = (d_star_closed(Variant::Benchmark, df(0.6 + h)).unwrap().d_star.get()
        - d_star_closed(Variant::Benchmark, df(0.6 - h)).unwrap().d_star.get())
        / (2.0 * h);
    let s = d_star_sensitivity(Variant::Benchmark, df(0.6)).unwrap();
    b.push(
        "sensitivity-benchmark-0.60",
        "analytic slope matches a finite difference of the formula",
        s,
        fd_bench,
        1e-5 * s.abs(),
    );
    let fd_g = (d_star_closed(Variant::NonNaiveG, df(0.7 + h)).unwrap().d_star.get()
        - d_star_closed(Variant::NonNaiveG, df(0.7 - h)).unwrap().d_star.get())
        / (2.0 * h);
    let s = d_star_sensitivity(Variant::NonNaiveG, df(0.7)).unwrap();
    b.push(
        "sensitivity-nonnaive-g-0.70",
        "analytic slope matches a finite difference of the formula",
        s,
        fd_g,
        1e-5 * s.abs(),
    );
    // The printed bad-opponent formula 6(1 - 1/δ) has slope 6/δ², not the
    // printed 1/δ².
    let fd_b = (printed_interior_reach(Variant::NonNaiveB, 0.8 + h).unwrap()
        - printed_interior_reach(Variant::NonNaiveB, 0.8 - h).unwrap())
        / (2.0 * h);
    let s = d_star_sensitivity(Variant::NonNaiveB, df(0.8)).unwrap();
    b.push(
        "printed-derivative-bad-opponent-0.80",
        "printed slope matches a finite difference of the printed formula",
        s,
        fd_b,
        1e-5 * fd_b.abs(),
    );

    // The printed bad-opponent reach is clamped at 0 while the
    // table-faithful one is positive.
    b.push(
        "printed-reach-bad-opponent-0.70",
        "printed bad-opponent reach equals the table-faithful numeric root",
        numeric(Variant::NonNaiveB, 0.7, Some(printed)),
        numeric(Variant::NonNaiveB, 0.7, Some(faithful)),
        1e-8,
    );

    // Orderings across variants.
    let bench_07 = numeric(Variant::Benchmark, 0.7, None);
    let g_07 = numeric(Variant::NonNaiveG, 0.7, None);
    let b_07 = numeric(Variant::NonNaiveB, 0.7, Some(faithful));
    b.push(
        "ordering-variants-0.70",
        "bad-opponent < good-opponent < benchmark reach at discount 0.7",
        1.0,
        chain_holds(&[b_07, g_07, bench_07], true),
        0.5,
    );
    let k_chain_07: Vec<f64> = (1..=3)
        .map(|k| numeric(Variant::limited(k).unwrap(), 0.7, None))
        .chain([bench_07])
        .collect();
    b.push(
        "ordering-limited-0.70",
        "k=1 < k=2 < k=3 < benchmark reach at discount 0.7",
        1.0,
        chain_holds(&k_chain_07, true),
        0.5,
    );
    let k_chain_06: Vec<f64> = std::iter::once(0.0)
        .chain((1..=3).map(|k| numeric(Variant::limited(k).unwrap(), 0.6, None)))
        .chain([numeric(Variant::Benchmark, 0.6, None)])
        .collect();
    b.push(
        "ordering-limited-0.60-weak",
        "0 ≤ k=1 ≤ k=2 ≤ k=3 ≤ benchmark reach at discount 0.6",
        1.0,
        chain_holds(&k_chain_06, false),
        0.5,
    );
    b.push(
        "ordering-limited-0.60-strict",
        "0 < k=1 < k=2 < k=3 < benchmark reach at discount 0.6",
        1.0,
        chain_holds(&k_chain_06, true),
        0.5,
    );

    // Deviation timing inside the opponent's punishment window is irrelevant.
    for k in 1..=3u32 {
        let regime = VoterRegime::limited(k).unwrap();
        let base = deviation_profitability(regime, 0, df(0.7), reach(0.3), printed).unwrap();
        let mut spread = 0.0f64;
        for rem in 1..=k + 1 {
            let g = deviation_profitability(regime, rem, df(0.7), reach(0.3), printed).unwrap();
            spread = spread.max((g - base).abs());
        }
        b.push(
            &format!("deviation-timing-k{k}"),
            "one-shot deviation value is offset-independent",
            0.0,
            spread,
            1e-12,
        );
    }

    // Quoted decimals that do not round-trip.
    let decimal_cases = [
        ("printed-decimal-benchmark-0.70", 0.7676, Variant::Benchmark, 0.7),
        ("printed-decimal-limited-k1-0.70", 0.1692, Variant::limited(1).unwrap(), 0.7),
        ("printed-decimal-limited-k2-0.70", 0.4015, Variant::limited(2).unwrap(), 0.7),
        ("printed-decimal-limited-k3-0.70", 0.5295, Variant::limited(3).unwrap(), 0.7),
        ("printed-decimal-benchmark-0.60", 0.3820, Variant::Benchmark, 0.6),
        ("printed-decimal-limited-k2-0.60", 0.1581, Variant::limited(2).unwrap(), 0.6),
        ("printed-decimal-limited-k3-0.60", 0.2561, Variant::limited(3).unwrap(), 0.6),
    ];
    for (id, quoted, variant, delta) in decimal_cases {
        b.push(
            id,
            "quoted 4-decimal value rounds from the numeric root",
            quoted,
            numeric(variant, delta, None),
            5e-5,
        );
    }

    VerificationReport { checks: b.checks }
}

fn variant_slug(variant: Variant) -> String {
    match variant {
        Variant::Benchmark => "benchmark".to_string(),
        Variant::NonNaiveG => "nonnaive-g".to_string(),
        Variant::NonNaiveB => "nonnaive-b".to_string(),
        Variant::LimitedK(k) => format!("limited-k{}", k.get()),
    }
}
