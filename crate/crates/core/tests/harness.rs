use bclab_core::harness::{
    render, run_experiment_with, CriterionSpec, ExperimentConfig, ExperimentReport, Prediction,
    ReportFormat, HITS_JSONL,
};
use bclab_core::intervals::IntervalFamily;
use bclab_core::processes::{Law, ProcessSpec};
use bclab_core::seqcore::RealSeq;

fn golden_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        ProcessSpec::dmr(1.0),
        IntervalFamily::nested_left(RealSeq::power(1.0, -0.5)),
        2000,
        6,
        99,
    );
    cfg.criteria = vec![
        CriterionSpec::HarrisNested {
            nu: Law::Power { a: 2.0 },
            family: None,
            horizon: None,
        },
        CriterionSpec::L2 {
            e: RealSeq::power(1.0, 1.0),
            var: RealSeq::power(1.0, 1.5),
            horizon: Some(10_000),
        },
    ];
    cfg.prediction = Some(Prediction::Bc);
    cfg
}

#[test]
fn markdown_summary_matches_golden_file() {
    let r = run_experiment_with(&golden_config(), Some(3)).unwrap();
    let md = render(&r, ReportFormat::Md).unwrap();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/summary.md");
    if std::env::var_os("BCLAB_BLESS").is_some() {
        std::fs::write(path, &md).unwrap();
    }
    assert_eq!(md, std::fs::read_to_string(path).unwrap());
}

#[test]
fn persisted_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (name, threads) in [("one", 1), ("many", 4)] {
        let mut cfg = golden_config();
        cfg.out_dir = Some(dir.path().join(name));
        let r = run_experiment_with(&cfg, Some(threads)).unwrap();
        outputs.push((
            std::fs::read(dir.path().join(name).join(HITS_JSONL)).unwrap(),
            r.digest().unwrap(),
        ));
        let loaded = ExperimentReport::load(&dir.path().join(name)).unwrap();
        assert_eq!(loaded.digest().unwrap(), r.digest().unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
