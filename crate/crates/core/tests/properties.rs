use proptest::prelude::*;

use bclab_core::criteria::rules::{tail_rule, trend_rule, Summability, Trend};
use bclab_core::criteria::{
    check_alpha, sparsify_psi, AlphaMode, AlphaParams, TracePoint, Verdict,
};
use bclab_core::intervals::{disjointify, normalize, Interval, Measure, MeasureSpec};
use bclab_core::mixing::{MixingProfile, ProfileKind, Provenance};
use bclab_core::seqcore::{inverse_sequence, partial_sums, RealSeq, SeqIndex};

fn harmonic_inverse(u: f64) -> bclab_core::Result<SeqIndex> {
    Ok(SeqIndex::Finite((1.0 / u).ceil() as usize))
}

fn line_interval() -> impl Strategy<Value = Interval> {
    (0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b)| Interval::line(a.min(b), a.max(b)))
}

fn torus_interval() -> impl Strategy<Value = Interval> {
    (0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b)| Interval::torus(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sparse_plan_shape(eps in 0.01f64..1.0, rate in 0.3f64..0.99, l_max in 0u32..14) {
        let plan = sparsify_psi(&RealSeq::constant(eps), &RealSeq::geometric(1.0, rate), &harmonic_inverse, l_max).unwrap();
        let idx = plan.indices();
        prop_assert_eq!(idx.len() as u64, plan.len());
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        for lv in &plan.levels {
            prop_assert!(lv.k <= lv.level);
            prop_assert_eq!(plan.psi(lv.start), Some(1u64 << lv.level));
            let last = plan.psi(lv.start + lv.len() - 1).unwrap();
            prop_assert!(last < 1u64 << (lv.level + 1));
        }
        // eps mu_L decreases, so the gaps can only widen
        prop_assert!(plan.levels.windows(2).all(|w| w[0].k <= w[1].k));
    }

    #[test]
    fn trend_rule_ignores_scale(vals in prop::collection::vec(0.001f64..10.0, 20..60), c in 0.01f64..100.0) {
        let trace: Vec<TracePoint> = vals.iter().enumerate().map(|(i, v)| TracePoint::new((i + 1) * 50, *v)).collect();
        let scaled: Vec<TracePoint> = trace.iter().map(|p| TracePoint::new(p.n, p.value * c)).collect();
        let (a, b) = (trend_rule(&trace), trend_rule(&scaled));
        prop_assert_eq!(a.trend, b.trend);
        prop_assert_eq!(trend_rule(&trace), a);
        prop_assert_eq!(tail_rule(&trace).verdict, tail_rule(&scaled).verdict);
    }

    #[test]
    fn power_laws_are_classified(p in -3.0f64..-1.3) {
        let trace: Vec<TracePoint> = (1..=100).map(|i| TracePoint::new(i * 1000, ((i * 1000) as f64).powf(p))).collect();
        prop_assert_eq!(trend_rule(&trace).trend, Trend::ToZero);
        prop_assert_eq!(tail_rule(&trace).verdict, Summability::Convergent);
    }

    #[test]
    fn inverse_is_least_index(c in 0.1f64..1.0, p in -2.0f64..-0.1, u in 0.0001f64..0.5) {
        let v = RealSeq::power(c, p);
        match inverse_sequence(&v, u).unwrap() {
            SeqIndex::Finite(n) => {
                prop_assert!(v.get(n).unwrap() <= u);
                if n > 1 {
                    prop_assert!(v.get(n - 1).unwrap() > u);
                }
            }
            SeqIndex::Infinite => prop_assert!(false, "power law reaches every positive level"),
        }
    }

    #[test]
    fn partial_sums_add_up(vals in prop::collection::vec(0.0f64..1.0, 1..200)) {
        let s = partial_sums(&RealSeq::tabulated(1, vals.clone()), vals.len()).unwrap();
        let total: f64 = vals.iter().sum();
        prop_assert!((s.get(vals.len()).unwrap() - total).abs() < 1e-9);
    }

    #[test]
    fn disjointify_keeps_union_and_mass(family in prop::collection::vec(line_interval(), 1..12)) {
        let cover = disjointify(&family).unwrap();
        let leb = MeasureSpec::Lebesgue;
        let sum: f64 = cover.gammas.iter().map(|g| leb.interval(g)).sum();
        prop_assert!((sum - leb.union(&family)).abs() < 1e-12);
        for (g, &k) in cover.gammas.iter().zip(&cover.source) {
            prop_assert!(g.is_empty() || g.is_subset_of(&family[k]));
        }
    }

    #[test]
    fn torus_disjointify_keeps_mass(family in prop::collection::vec(torus_interval(), 1..12)) {
        let cover = disjointify(&family).unwrap();
        let leb = MeasureSpec::Lebesgue;
        let sum: f64 = cover.gammas.iter().map(|g| leb.interval(g)).sum();
        let union: f64 = normalize(family.iter().flat_map(|j| j.pieces()).collect())
            .iter()
            .map(|(a, b)| b - a)
            .sum();
        prop_assert!((sum - union).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// The polynomial strong criterion is a special case of the general one.
    /// Near the polynomial boundary the witness grid is too coarse to follow,
    /// so that band is skipped.
    #[test]
    fn polynomial_strong_implies_general(a in 0.5f64..3.0, p in 0.05f64..0.95) {
        let boundary = a / (a + 1.0);
        prop_assume!(!(p >= (a - 0.05) / (a + 1.0) && p < boundary));
        let alpha = MixingProfile::new(ProfileKind::AlphaInf1, RealSeq::power(1.0, -a), Provenance::AnalyticBound).unwrap();
        let mu = RealSeq::power(1.0, -p);
        let params = AlphaParams { a: Some(a), ..Default::default() };
        let poly = check_alpha(&alpha, &mu, AlphaMode::Poly3, &params, 10_000).unwrap();
        prop_assert_eq!(poly.verdict == Verdict::Satisfied, p < boundary);
        if poly.verdict == Verdict::Satisfied {
            let general = check_alpha(&alpha, &mu, AlphaMode::Strong, &params, 10_000).unwrap();
            prop_assert_eq!(general.verdict, Verdict::Satisfied, "{:#?}", general.diagnostics.clauses);
        }
    }
}
