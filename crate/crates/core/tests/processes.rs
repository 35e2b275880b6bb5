//! Statistical checks of the samplers against exact laws.

use bclab_core::harness::{run_experiment_with, ExperimentConfig};
use bclab_core::intervals::{IntervalFamily, Measure};
use bclab_core::processes::{sample_path, simulate_hits, stationary_measure, ProcessSpec, GOLDEN};
use bclab_core::seqcore::RealSeq;
use bclab_core::stats::{ks_one_sample, mean, variance};

/// 1% critical value of the one-sample Kolmogorov-Smirnov statistic.
fn ks_critical(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

#[test]
fn marginals_stay_invariant() {
    let specs = [
        ProcessSpec::dmr(1.0),
        ProcessSpec::dmr(2.5),
        ProcessSpec::circle(GOLDEN, 0.0),
        serde_json::from_str(r#"{"kind": "ar_half"}"#).unwrap(),
    ];
    let paths = 2000;
    for spec in &specs {
        let mu = stationary_measure(spec).unwrap();
        let ends: Vec<f64> = (0..paths)
            .map(|t| {
                *sample_path(spec, 300, 31, t)
                    .unwrap()
                    .states
                    .last()
                    .unwrap()
            })
            .collect();
        let d = ks_one_sample(&ends, |x| mu.cdf(x));
        assert!(
            d < ks_critical(paths as usize),
            "{:?}: D = {d}",
            spec.process
        );
    }
}

#[test]
fn circle_displacement_is_binomial() {
    let n = 6u32;
    let paths = 20_000;
    let spec = ProcessSpec::circle(GOLDEN, 0.0);
    let mut counts = vec![0usize; n as usize + 1];
    for t in 0..paths {
        let s = sample_path(&spec, n as usize, 8, t).unwrap();
        let shift = (s.states[n as usize] - s.states[0]).rem_euclid(1.0);
        // X_n - X_0 = (2 j - n) a mod 1 with j ~ Binomial(n, 1/2)
        let j = (0..=n)
            .min_by(|&a, &b| {
                let dist = |j: u32| {
                    let d = ((2.0 * j as f64 - n as f64) * GOLDEN - shift).rem_euclid(1.0);
                    d.min(1.0 - d)
                };
                dist(a).total_cmp(&dist(b))
            })
            .unwrap();
        counts[j as usize] += 1;
    }
    let mut chi2 = 0.0;
    for (j, &obs) in counts.iter().enumerate() {
        let choose = (0..j).fold(1.0, |acc, i| acc * (n as f64 - i as f64) / (i as f64 + 1.0));
        let expected = paths as f64 * choose / 2f64.powi(n as i32);
        chi2 += (obs as f64 - expected).powi(2) / expected;
    }
    // 0.1% critical value with 6 degrees of freedom
    assert!(chi2 < 22.46, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn dmr_renewal_rate_is_half() {
    // renewal probability x averaged over the uniform invariant law
    let spec = ProcessSpec::dmr(1.0);
    let n = 200_000;
    let rec = simulate_hits(
        &spec,
        &IntervalFamily::nested_left(RealSeq::constant(0.5)),
        n,
        3,
    )
    .unwrap();
    let rate = rec.renewal_times.unwrap().len() as f64 / n as f64;
    assert!((rate - 0.5).abs() < 0.01, "{rate}");
}

/// Mean count within `4 SD / sqrt(N)` of `E_n` at every checkpoint.
fn assert_counts_track_mass(cfg: &ExperimentConfig) {
    let r = run_experiment_with(cfg, Some(4)).unwrap();
    for c in &r.checkpoints {
        let s: Vec<f64> = r
            .records
            .iter()
            .map(|rec| rec.count_to(c.n) as f64)
            .collect();
        let tol = 4.0 * variance(&s).sqrt() / (s.len() as f64).sqrt();
        let m = mean(&s);
        assert!(
            (m - c.e_n).abs() <= tol.max(1e-9),
            "{:?} at n = {}: mean {m} vs E_n {}",
            cfg.process.process,
            c.n,
            c.e_n
        );
    }
}

#[test]
fn counts_track_mass() {
    let family = IntervalFamily::nested_left(RealSeq::power(1.0, -0.5));
    for spec in [
        ProcessSpec::iid_uniform(),
        ProcessSpec::dmr(1.0),
        ProcessSpec::circle(GOLDEN, 0.3),
    ] {
        assert_counts_track_mass(&ExperimentConfig::new(
            spec,
            family.clone(),
            20_000,
            200,
            12,
        ));
    }
    let window = IntervalFamily::nested_window(RealSeq::constant(0.25), RealSeq::constant(0.75));
    assert_counts_track_mass(&ExperimentConfig::new(
        ProcessSpec::dmr(2.0),
        window,
        5_000,
        200,
        13,
    ));
}
