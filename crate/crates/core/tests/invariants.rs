//! Monte Carlo invariants shared by every built-in martingale-difference field.

use mdfield::fields::{Sampler, Window};
use mdfield::limitlaw::{cf_eta_mixture, CfGrid};
use mdfield::stats::{ecf, ks_two_sample, replicate_stats, EmpiricalDist, StatisticKind};
use mdfield::{CoeffTensor, Driver, FieldSpec};

fn builtins() -> Vec<(&'static str, FieldSpec)> {
    let tensor = CoeffTensor::new(2, vec![(vec![1, 2], 0.6), (vec![2, 1], 0.8)]).unwrap();
    vec![
        ("product", FieldSpec::product_iid()),
        ("product-rademacher", FieldSpec::ProductIid { driver: Driver::Rademacher, stream: 0 }),
        ("sign-flip", FieldSpec::sign_flip()),
        ("chaos", FieldSpec::chaos(tensor)),
        ("iid", FieldSpec::iid(Driver::Gaussian)),
        (
            "composite",
            FieldSpec::composite(FieldSpec::product_iid(), FieldSpec::iid(Driver::Rademacher).on_stream(7)),
        ),
    ]
}

/// Normalized sums of the left and right halves (columns) and the top and
/// bottom halves (rows) of each replicate.
fn half_sums(spec: &FieldSpec, side: usize, reps: u64, seed: u64) -> [Vec<f64>; 4] {
    let sampler = Sampler::new(spec, &Window::square(side), seed).unwrap();
    let half = side / 2;
    let norm = ((side * half) as f64).sqrt();
    let mut out: [Vec<f64>; 4] = Default::default();
    for r in 0..reps {
        let real = sampler.replicate(r).realize();
        let mut s = [0.0; 4];
        for i in 1..=side {
            for j in 1..=side {
                let v = real.at(&[i, j]);
                s[usize::from(j > half)] += v;
                s[2 + usize::from(i > half)] += v;
            }
        }
        for k in 0..4 {
            out[k].push(s[k] / norm);
        }
    }
    out
}

#[test]
fn increments_over_disjoint_windows_are_orthogonal() {
    let reps = 2000;
    let bound = 3.0 / (reps as f64).sqrt();
    for (name, spec) in builtins() {
        let [left, right, top, bottom] = half_sums(&spec, 16, reps, 41);
        for (a, b) in [(&left, &right), (&top, &bottom)] {
            let cov = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / reps as f64;
            assert!(cov.abs() <= bound, "{name}: covariance {cov}");
        }
    }
}

#[test]
fn disjoint_blocks_share_a_law() {
    // Stationarity: the top and bottom halves of a window have the same law.
    let reps = 2000;
    let crit = 1.5 * 1.36 * (2.0 / reps as f64).sqrt();
    for (name, spec) in builtins() {
        let [_, _, top, bottom] = half_sums(&spec, 16, reps, 43);
        let d = ks_two_sample(
            &EmpiricalDist::new(top, "top").unwrap(),
            &EmpiricalDist::new(bottom, "bottom").unwrap(),
        );
        assert!(d <= crit, "{name}: KS {d}");
    }
}

#[test]
fn sum_variance_matches_cell_variance() {
    let w = Window::square(64);
    for (name, spec) in builtins() {
        let rep = replicate_stats(&spec, &w, StatisticKind::PartialSum, 20_000, 5).unwrap();
        let target = spec.cell_variance();
        let v = rep.moments.variance;
        assert!((v / target - 1.0).abs() <= 0.05, "{name}: variance {v} vs {target}");
    }
}

#[test]
fn partial_sum_cf_matches_eta_mixture() {
    let w = Window::square(128);
    let t = CfGrid::linspace(0.0, 3.0, 13);
    for spec in [FieldSpec::product_iid(), FieldSpec::sign_flip()] {
        let sums = replicate_stats(&spec, &w, StatisticKind::PartialSum, 10_000, 8).unwrap();
        let v = replicate_stats(&spec, &w, StatisticKind::VStatistic, 10_000, 8).unwrap();
        let from_sums = ecf(&sums.dist, &t);
        let mixture =
            CfGrid::tabulate(&t, |t| cf_eta_mixture(v.dist.samples(), t)).unwrap();
        let gap = from_sums.max_gap(&mixture);
        assert!(gap <= 0.02, "{spec:?}: gap {gap}");
    }
}

#[test]
fn iid_v_statistic_concentrates_near_one() {
    let rep = replicate_stats(
        &FieldSpec::iid(Driver::Gaussian),
        &Window::square(256),
        StatisticKind::VStatistic,
        1000,
        12,
    )
    .unwrap();
    assert!((rep.moments.mean - 1.0).abs() <= 0.05);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let w = Window::square(32);
    let spec = FieldSpec::iid(Driver::Gaussian);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| replicate_stats(&spec, &w, StatisticKind::PartialSum, 64, 3).unwrap())
    };
    assert_eq!(run(1), run(4));
}
