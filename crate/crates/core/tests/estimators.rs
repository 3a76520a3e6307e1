use std::path::Path;

use dymo::controller::{GroupInstruction, McsTable};
use dymo::estimation::sampling::{one_step_estimate, two_step_estimate, Population};
use dymo::estimation::{
    empirical_quantile, estimate_subpopulation_fraction, iterative_bound, optimal_two_step_plan,
    order_statistics_bound, two_step_bound, two_step_error_expression, SampleSet,
};
use dymo::snr::{merge_smoothed, HistogramRange, SnrBin, SnrHistogram};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

// Reference values computed independently in double precision.
#[test]
fn bounds_match_reference_values() {
    let cases = [
        (0.001, 400.0, 0.0023477861462030745, 0.004741044188783732),
        (0.01, 400.0, 0.012727922061357857, 0.0149248115565993),
        (1e-4, 1000.0, 0.0002669831455354439, 0.0009486358626996979),
    ];
    for (p, r, two, one) in cases {
        assert!(close(two_step_bound(p, r).unwrap(), two, 1e-12));
        assert!(close(order_statistics_bound(p, r).unwrap(), one, 1e-12));
    }
    assert!(close(
        two_step_error_expression(0.1, 100.0, 0.001, 400.0).unwrap(),
        0.0026233687939614084,
        1e-12
    ));
    assert!(close(iterative_bound(0.02, 400.0, 0.001).unwrap(), 0.005, 1e-12));
}

#[test]
fn bound_is_expression_at_optimal_plan() {
    for p in [1e-4, 1e-3, 1e-2, 0.1] {
        for r in [50.0, 400.0, 5000.0] {
            let plan = optimal_two_step_plan(p, r).unwrap();
            let expr = two_step_error_expression(plan.p1, plan.r1, p, r).unwrap();
            assert!(close(expr, two_step_bound(p, r).unwrap(), 1e-12));
        }
    }
}

#[test]
fn crossover_at_one_over_49() {
    let p = 1.0 / 49.0;
    for r in [100.0, 400.0, 1000.0] {
        let two = two_step_bound(p, r).unwrap();
        let one = order_statistics_bound(p, r).unwrap();
        assert!(close(two, one, 0.02));
        assert!(two_step_bound(0.9 * p, r).unwrap() < order_statistics_bound(0.9 * p, r).unwrap());
        assert!(two_step_bound(1.1 * p, r).unwrap() > order_statistics_bound(1.1 * p, r).unwrap());
    }
}

#[test]
fn one_step_error_follows_asymptotic_variance() {
    let (p, r, runs) = (0.05, 400.0, 2000);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pop = Population::uniform(200_000, &mut rng);
    let mut sq = 0.0;
    for _ in 0..runs {
        let e = one_step_estimate(&pop, p, r, &mut rng).unwrap().true_quantile - p;
        sq += e * e;
    }
    let se = (sq / runs as f64).sqrt();
    let theory = (p * (1.0 - p) / r).sqrt();
    assert!(close(se, theory, 0.1), "se {se} theory {theory}");
}

#[test]
fn two_step_reports_stay_near_budget() {
    let (p, r, runs) = (0.001, 400.0, 300);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pop = Population::uniform(1_000_000, &mut rng);
    let plan = optimal_two_step_plan(p, r).unwrap();
    let total: usize = (0..runs)
        .map(|_| two_step_estimate(&pop, &plan, &mut rng).unwrap().reports)
        .sum();
    let mean = total as f64 / runs as f64;
    // The first-step quantile rounds up, so the tail holds slightly more
    // than p1 * n members and the second step overshoots r2 a little.
    assert!(mean > r - 3.0 * (r / runs as f64).sqrt() && mean < 1.1 * r, "{mean}");
}

#[test]
fn horvitz_thompson_is_unbiased() {
    let (m, q, true_count) = (20_000.0, 0.05, 400u32);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let runs = 4000;
    let mut sum = 0.0;
    for _ in 0..runs {
        let y = (0..true_count).filter(|_| rand::Rng::random::<f64>(&mut rng) < q).count();
        sum += estimate_subpopulation_fraction(y as f64, m, q).unwrap().fraction;
    }
    let mean = sum / runs as f64;
    let truth = true_count as f64 / m;
    let sd = estimate_subpopulation_fraction(truth * m * q, m, q)
        .unwrap()
        .variance
        .sqrt();
    assert!((mean - truth).abs() < 4.0 * sd / (runs as f64).sqrt(), "{mean} vs {truth}");
}

#[test]
fn mcs_table_rejects_malformed_rows_with_line() {
    let err = McsTable::parse("0,-5,0.2\n1,oops,0.5\n", Path::new("t.csv")).unwrap_err();
    assert!(err.to_string().starts_with("t.csv:2:"), "{err}");
}

fn histogram(bins: &[i32]) -> SnrHistogram {
    SnrHistogram::from_bins(HistogramRange::default(), bins.iter().map(|&b| SnrBin(b)))
}

proptest! {
    #[test]
    fn mcs_selection_is_monotone(a in -30.0f64..50.0, b in -30.0f64..50.0) {
        let table = McsTable::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (x, y) = (table.select(lo), table.select(hi));
        prop_assert!(x.index <= y.index);
        prop_assert!(x.spectral_efficiency <= y.spectral_efficiency);
    }

    #[test]
    fn two_group_instructions_cover_every_snr(
        boundary in -200i32..500,
        q_low in 0.0f64..=1.0,
        q_high in 0.0f64..=1.0,
        h in -1000.0f64..1000.0,
    ) {
        let instr = GroupInstruction::two_groups(3, SnrBin(boundary), q_low, q_high).unwrap();
        let q = instr.probability_for(h).unwrap();
        let expected = if h < SnrBin(boundary).lower_edge_db() { q_low } else { q_high };
        prop_assert_eq!(q, expected);
    }

    #[test]
    fn quantile_shifts_with_the_population(
        bins in prop::collection::vec(-50i32..300, 1..300),
        shift in -40i32..80,
        p in 0.001f64..1.0,
    ) {
        let a = histogram(&bins).quantile(p).unwrap();
        let moved: Vec<i32> = bins.iter().map(|b| b + shift).collect();
        let b = histogram(&moved).quantile(p).unwrap();
        prop_assert_eq!(b, a.offset(shift));
    }

    #[test]
    fn quantile_is_monotone_in_p(
        bins in prop::collection::vec(-100i32..400, 1..200),
        p in 0.001f64..1.0,
        q in 0.001f64..1.0,
    ) {
        let h = histogram(&bins);
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(h.quantile(lo).unwrap() <= h.quantile(hi).unwrap());
    }

    #[test]
    fn merging_a_histogram_with_itself_is_identity(
        bins in prop::collection::vec(-100i32..400, 1..200),
        alpha in 0.01f64..=1.0,
    ) {
        let h = histogram(&bins);
        let m = merge_smoothed(&h, &h, alpha).unwrap();
        for ((b1, w1), (b2, w2)) in h.iter().zip(m.iter()) {
            prop_assert_eq!(b1, b2);
            prop_assert!((w1 - w2).abs() <= 1e-9 * w1.max(1.0));
        }
    }

    #[test]
    fn sample_quantile_is_an_order_statistic(
        values in prop::collection::vec(-50.0f64..50.0, 1..100),
        p in 0.001f64..=1.0,
    ) {
        let s = SampleSet::new(values.clone()).unwrap();
        let x = empirical_quantile(&s, p).unwrap();
        prop_assert!(values.contains(&x));
        let below = values.iter().filter(|&&v| v <= x).count() as f64;
        prop_assert!(below >= p * values.len() as f64 * (1.0 - 1e-12));
    }
}
