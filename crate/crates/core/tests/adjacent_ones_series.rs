use devlab_core::adjacent_ones::{
    self, decode_bits, expected_weighted_sum, miss_probability, miss_probability_partial, rounds_for_tolerance,
    weighted_sum,
};
use devlab_core::oracle::{enumerate_measure, exact_miss_probability, KahanSum, DEFAULT_BUDGET};
use statrs::function::gamma::{gamma, ln_gamma};

// (2i+1)(2i+2) - mu^2 = (2i + a)(2i + b) with a, b = 3/2 -+ sqrt(1/4 + mu^2),
// so the survival product telescopes into Gamma ratios.
fn roots(mu: f64) -> (f64, f64) {
    let r = (0.25 + mu * mu).sqrt();
    ((1.5 - r) / 2.0, (1.5 + r) / 2.0)
}

fn survival_closed_form(mu: f64, rounds: usize) -> f64 {
    let (a, b) = roots(mu);
    let k = rounds as f64;
    let ln = ln_gamma(k + a) + ln_gamma(k + b) - ln_gamma(k + 0.5) - ln_gamma(k + 1.0) + ln_gamma(0.5)
        - ln_gamma(a)
        - ln_gamma(b);
    ln.exp()
}

fn epsilon_closed_form(mu: f64) -> f64 {
    let (a, b) = roots(mu);
    1.0 - std::f64::consts::PI.sqrt() / (gamma(a) * gamma(b))
}

#[test]
fn partial_sums_match_gamma_closed_form() {
    for mu in [0.05, 0.1, 0.2, 0.5, 1.0] {
        for rounds in [1, 2, 5, 10, 50] {
            let series = miss_probability_partial(mu, rounds);
            let closed = 1.0 - survival_closed_form(mu, rounds);
            assert!((series - closed).abs() < 1e-12, "mu {mu} rounds {rounds}: {series} vs {closed}");
        }
    }
}

#[test]
fn truncated_series_within_tolerance_of_limit() {
    let tol = 1e-8;
    for mu in [0.05, 0.1, 0.2] {
        let eps = miss_probability(mu, tol).unwrap();
        let exact = epsilon_closed_form(mu);
        assert!(eps <= exact + 1e-14, "partial sums increase to the limit");
        assert!(exact - eps < tol, "mu {mu}: {eps} vs {exact}");
    }
    assert_eq!(miss_probability(0.0, tol).unwrap(), 0.0);
}

#[test]
fn epsilon_scales_like_mu_squared() {
    let ratios: Vec<f64> = [0.05, 0.1, 0.2].iter().map(|&mu| epsilon_closed_form(mu) / (mu * mu)).collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, f64::MIN), |(l, h), &r| (l.min(r), h.max(r)));
    assert!(hi / lo < 1.10, "{ratios:?}");
    assert!(ratios.iter().all(|r| (r - std::f64::consts::LN_2).abs() < 0.02), "{ratios:?}");
}

#[test]
fn oracle_matches_partial_sums() {
    for mu in [0.05, 0.1, 0.2] {
        let goal = adjacent_ones::goal(mu).unwrap();
        for horizon in [2, 4, 10, 20] {
            let exact = exact_miss_probability(&goal, &goal.profile, horizon, DEFAULT_BUDGET).unwrap();
            let series = miss_probability_partial(mu, horizon / 2);
            assert!((exact - series).abs() < 1e-12, "mu {mu} horizon {horizon}: {exact} vs {series}");
        }
    }
}

#[test]
fn expectation_of_weighted_sum() {
    let mu = 0.1;
    let horizon = 20;
    let goal = adjacent_ones::goal(mu).unwrap();
    let measure = enumerate_measure(&goal.space, &goal.profile, horizon, DEFAULT_BUDGET).unwrap();
    let total: f64 = measure.iter().map(|(_, p)| *p).sum::<KahanSum>().value();
    assert!((total - 1.0).abs() < 1e-12, "{total}");
    let expectation =
        measure.iter().map(|(h, p)| p * weighted_sum(&decode_bits(h), mu, horizon)).sum::<KahanSum>().value();
    let analytic = expected_weighted_sum(mu, horizon / 2);
    assert!((expectation - analytic).abs() < 1e-12, "{expectation} vs {analytic}");
    assert!(analytic < mu * mu);
}

#[test]
fn tail_bound_round_count() {
    let k = rounds_for_tolerance(0.1, 1e-6);
    assert!(0.01 / (4.0 * k as f64) < 1e-6);
}
