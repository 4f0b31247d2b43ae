use std::sync::OnceLock;

use proptest::prelude::*;
use qrelax::harness::{aggregate, load_records, run_experiment, verify_record, ExperimentConfig, Method};
use qrelax::simulator::NoiseParams;
use qrelax::vqe::VqeConfig;

fn config(dir: &std::path::Path, name: &str) -> ExperimentConfig {
    ExperimentConfig {
        node_sizes: vec![4, 6],
        graphs_per_size: 2,
        methods: Method::ALL.to_vec(),
        vqe: VqeConfig::exact(1, 1, 0),
        noise: NoiseParams::cnot_depolarizing(0.01),
        magic_rounds: 8,
        readout_shots: 8,
        master_seed: 11,
        output_path: dir.join(name),
        ..ExperimentConfig::default()
    }
}

/// Output of one uninterrupted run, shared by every case.
fn reference() -> &'static Vec<u8> {
    static REF: OnceLock<Vec<u8>> = OnceLock::new();
    REF.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path(), "ref.jsonl");
        run_experiment(&cfg).unwrap();
        std::fs::read(&cfg.output_path).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn interrupted_runs_resume_to_the_same_bytes(cut in 0.0f64..1.0) {
        let full = reference();
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path(), "partial.jsonl");
        let at = (cut * full.len() as f64) as usize;
        std::fs::write(&cfg.output_path, &full[..at]).unwrap();
        run_experiment(&cfg).unwrap();
        prop_assert_eq!(&std::fs::read(&cfg.output_path).unwrap(), full);
    }
}

#[test]
fn recorded_rows_reverify_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "out.jsonl");
    let records = run_experiment(&cfg).unwrap();
    assert_eq!(records, load_records(&cfg.output_path).unwrap());
    for r in &records {
        assert!(r.is_ok(), "{:?}", r.error);
        verify_record(r).unwrap();
        let t = r.vqe_energy_trace.as_ref().unwrap();
        assert!(t.windows(2).all(|w| w[1] >= w[0]));
    }
    let summary = aggregate(&records).unwrap();
    assert_eq!(summary.rows.len(), 6);
    for row in &summary.rows {
        assert_eq!((row.count, row.failed), (2, 0));
        assert!(row.mean_ratio > 0.0 && row.mean_ratio <= 1.0);
    }
}

#[test]
fn timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        record_timing: true,
        node_sizes: vec![4],
        methods: vec![Method::QracPauli],
        ..config(dir.path(), "timed.jsonl")
    };
    let records = run_experiment(&cfg).unwrap();
    assert!(records.iter().all(|r| r.wall_time.is_some_and(|t| t >= 0.0)));
}
