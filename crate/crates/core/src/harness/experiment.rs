use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, HarnessError, Method};
use crate::encoding::{assign_qrac, build_ising_hamiltonian, build_qrac_hamiltonian};
use crate::graph::{
    approximation_ratio, cut_value, generate_random_regular, max_cut_bruteforce, BitAssignment,
    Graph,
};
use crate::rounding::{
    computational_rounding, magic_rounding, pauli_rounding, CutScorer, PauliMode,
    RoundingOutcome,
};
use crate::seed::{label_hash, mix_seed};
use crate::simulator::{SimError, DENSITY_QUBIT_CAP, PURE_QUBIT_CAP};
use crate::vqe::{run_vqe, Evaluation, VqeConfig};

const STAGE_GRAPH: u64 = 0;
const STAGE_VQE: u64 = 1;
const STAGE_ROUND: u64 = 2;

/// Identity of one job. Runs skip keys already present in their output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JobKey {
    pub num_nodes: usize,
    pub graph_index: usize,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Ok,
    Failed,
}

/// One line of experiment output. The graph is re-derivable from
/// `(num_nodes, degree, graph_seed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub num_nodes: usize,
    pub graph_index: usize,
    pub method: Method,
    pub status: RecordStatus,
    pub degree: usize,
    pub graph_seed: u64,
    pub num_edges: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_cut: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vqe_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<BitAssignment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots_used: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds_used: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vqe_energy_trace: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ExperimentRecord {
    pub fn key(&self) -> JobKey {
        JobKey {
            num_nodes: self.num_nodes,
            graph_index: self.graph_index,
            method: self.method,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

fn jobs(cfg: &ExperimentConfig) -> Vec<JobKey> {
    let mut out = Vec::new();
    for &num_nodes in &cfg.node_sizes {
        for graph_index in 0..cfg.graphs_per_size {
            for &method in &cfg.methods {
                out.push(JobKey {
                    num_nodes,
                    graph_index,
                    method,
                });
            }
        }
    }
    out
}

fn graph_seed(cfg: &ExperimentConfig, key: &JobKey) -> u64 {
    mix_seed(&[
        cfg.master_seed,
        key.num_nodes as u64,
        key.graph_index as u64,
        label_hash("graph"),
        STAGE_GRAPH,
    ])
}

fn child_seed(cfg: &ExperimentConfig, key: &JobKey, label: &str, stage: u64) -> u64 {
    mix_seed(&[
        cfg.master_seed,
        key.num_nodes as u64,
        key.graph_index as u64,
        label_hash(label),
        stage,
    ])
}

struct Completed {
    opt_cut: usize,
    num_qubits: usize,
    vqe_energy: f64,
    energy_ratio: Option<f64>,
    trace: Vec<f64>,
    outcome: RoundingOutcome,
}

fn pipeline(cfg: &ExperimentConfig, key: &JobKey, g: &Graph) -> Result<Completed, String> {
    let text = |e: &dyn std::fmt::Display| e.to_string();
    let (h, assignment) = match key.method {
        Method::Ising => (build_ising_hamiltonian(g), None),
        Method::QracPauli | Method::QracMagic => {
            let a = assign_qrac(g);
            (build_qrac_hamiltonian(g, &a).map_err(|e| text(&e))?, Some(a))
        }
    };
    let qubits = h.num_qubits();
    let (backend, cap) = if cfg.noise.is_noiseless() {
        ("pure", PURE_QUBIT_CAP)
    } else {
        ("density", DENSITY_QUBIT_CAP)
    };
    if qubits > cap {
        return Err(SimError::CapExceeded {
            backend,
            qubits,
            cap,
        }
        .to_string());
    }
    let (_, opt_cut) = max_cut_bruteforce(g).map_err(|e| text(&e))?;

    let vqe_cfg = VqeConfig {
        seed: child_seed(cfg, key, key.method.hamiltonian_label(), STAGE_VQE),
        ..cfg.vqe.clone()
    };
    let result = run_vqe(&h, &vqe_cfg, &cfg.noise).map_err(|e| text(&e))?;

    let scorer = CutScorer::with_optimum(g, opt_cut).map_err(|e| text(&e))?;
    let seed = child_seed(cfg, key, key.method.label(), STAGE_ROUND);
    let state = &result.candidate_state;
    let outcome = match (key.method, &assignment) {
        (Method::Ising, _) => computational_rounding(state, &scorer, cfg.readout_shots, seed),
        (Method::QracPauli, Some(a)) => {
            let mode = match cfg.pauli_rounding {
                Evaluation::Exact => PauliMode::Exact,
                Evaluation::Shots(s) => PauliMode::Shots(s),
            };
            pauli_rounding(state, a, &scorer, mode, seed)
        }
        (Method::QracMagic, Some(a)) => magic_rounding(state, a, cfg.magic_rounds, &scorer, seed),
        _ => unreachable!("QRAC methods carry an assignment"),
    }
    .map_err(|e| text(&e))?;
    Ok(Completed {
        opt_cut,
        num_qubits: qubits,
        vqe_energy: result.energy,
        energy_ratio: result.energy_ratio,
        trace: result.energy_trace,
        outcome,
    })
}

/// Runs a single job. Failures become a record with `status = failed`.
pub fn run_job(cfg: &ExperimentConfig, key: JobKey) -> ExperimentRecord {
    let start = Instant::now();
    let seed = graph_seed(cfg, &key);
    let mut rec = ExperimentRecord {
        num_nodes: key.num_nodes,
        graph_index: key.graph_index,
        method: key.method,
        status: RecordStatus::Failed,
        degree: cfg.degree,
        graph_seed: seed,
        num_edges: key.num_nodes * cfg.degree / 2,
        opt_cut: None,
        num_qubits: None,
        vqe_energy: None,
        energy_ratio: None,
        bits: None,
        cut: None,
        ratio: None,
        shots_used: None,
        rounds_used: None,
        vqe_energy_trace: None,
        wall_time: None,
        error: None,
    };
    let result = generate_random_regular(key.num_nodes, cfg.degree, seed)
        .map_err(|e| e.to_string())
        .and_then(|g| {
            rec.num_edges = g.num_edges();
            pipeline(cfg, &key, &g)
        });
    match result {
        Ok(c) => {
            rec.status = RecordStatus::Ok;
            rec.opt_cut = Some(c.opt_cut);
            rec.num_qubits = Some(c.num_qubits);
            rec.vqe_energy = Some(c.vqe_energy);
            rec.energy_ratio = c.energy_ratio;
            rec.cut = Some(c.outcome.cut);
            rec.ratio = Some(c.outcome.ratio);
            rec.bits = Some(c.outcome.bits);
            rec.shots_used = c.outcome.shots_used;
            rec.rounds_used = c.outcome.rounds_used;
            rec.vqe_energy_trace = Some(c.trace);
        }
        Err(e) => {
            eprintln!(
                "record ({}, {}, {}) failed: {e}",
                key.num_nodes, key.graph_index, key.method
            );
            rec.error = Some(e);
        }
    }
    if cfg.record_timing {
        rec.wall_time = Some(start.elapsed().as_secs_f64());
    }
    rec
}

/// Parses JSON Lines. A final line without its newline is treated as an
/// interrupted write and dropped; returns the records and the byte length of
/// the intact prefix.
fn parse_lines(text: &str) -> Result<(Vec<ExperimentRecord>, usize), HarnessError> {
    let mut records = Vec::new();
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if !line.ends_with('\n') {
            break;
        }
        let body = line.trim();
        if !body.is_empty() {
            let rec = serde_json::from_str(body).map_err(|e| HarnessError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            records.push(rec);
        }
        offset += line.len();
    }
    Ok((records, offset))
}

/// Reads every complete record of a JSON Lines file.
pub fn load_records(path: &Path) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    Ok(parse_lines(&text)?.0)
}

/// Rebuilds the graph and checks the stored cut, ratio and optimum.
pub fn verify_record(rec: &ExperimentRecord) -> Result<(), HarnessError> {
    let fail = |m: String| Err(HarnessError::Verify(m));
    let g = generate_random_regular(rec.num_nodes, rec.degree, rec.graph_seed)
        .map_err(|e| HarnessError::Verify(e.to_string()))?;
    if g.num_edges() != rec.num_edges {
        return fail(format!("edge count {} != {}", rec.num_edges, g.num_edges()));
    }
    if !rec.is_ok() {
        return Ok(());
    }
    let (Some(bits), Some(cut), Some(ratio), Some(opt)) = (&rec.bits, rec.cut, rec.ratio, rec.opt_cut)
    else {
        return fail("successful record is missing result fields".into());
    };
    let v = |e: crate::graph::GraphError| HarnessError::Verify(e.to_string());
    if cut_value(&g, bits).map_err(v)? != cut {
        return fail(format!("stored cut {cut} does not match bits {bits}"));
    }
    if max_cut_bruteforce(&g).map_err(v)?.1 != opt {
        return fail(format!("stored optimum {opt} is wrong"));
    }
    if (approximation_ratio(cut, opt).map_err(v)? - ratio).abs() > 1e-12 {
        return fail(format!("stored ratio {ratio} != {cut}/{opt}"));
    }
    Ok(())
}

/// Runs every job of `cfg` not yet present in `cfg.output_path` and returns
/// all records in job order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, HarnessError> {
    run_experiment_with(cfg, |_| {})
}

/// As [`run_experiment`], calling `on_record` for each new record as it is
/// written.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    mut on_record: impl FnMut(&ExperimentRecord),
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    cfg.validate()?;
    let all = jobs(cfg);
    let path = &cfg.output_path;

    let mut done: Vec<ExperimentRecord> = Vec::new();
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        let (records, intact) = parse_lines(&text)?;
        let wanted: HashSet<JobKey> = all.iter().copied().collect();
        for r in &records {
            if !wanted.contains(&r.key()) || r.graph_seed != graph_seed(cfg, &r.key()) {
                return Err(HarnessError::Config(format!(
                    "{} holds records from a different configuration",
                    path.display()
                )));
            }
        }
        if intact < text.len() {
            OpenOptions::new().write(true).open(path)?.set_len(intact as u64)?;
        }
        done = records;
    } else if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }

    let finished: HashSet<JobKey> = done.iter().map(|r| r.key()).collect();
    let pending: Vec<JobKey> = all.iter().copied().filter(|k| !finished.contains(k)).collect();
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut writer = BufWriter::new(file);
    let mut fresh = Vec::with_capacity(pending.len());
    let mut emit = |rec: ExperimentRecord, w: &mut BufWriter<File>| -> Result<(), HarnessError> {
        writeln!(w, "{}", rec.to_json_line())?;
        w.flush()?;
        on_record(&rec);
        fresh.push(rec);
        Ok(())
    };

    if cfg.workers == 1 {
        for &key in &pending {
            emit(run_job(cfg, key), &mut writer)?;
        }
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let (tx, rx) = mpsc::channel::<(usize, ExperimentRecord)>();
        std::thread::scope(|s| -> Result<(), HarnessError> {
            let pending = &pending;
            s.spawn(move || {
                pool.install(|| {
                    pending.par_iter().enumerate().for_each_with(tx, |tx, (i, &key)| {
                        // the receiver only disappears after a write error
                        let _ = tx.send((i, run_job(cfg, key)));
                    })
                })
            });
            // Results arrive in any order and leave in job order.
            let mut buffer = BTreeMap::new();
            let mut next = 0;
            for (i, rec) in rx {
                buffer.insert(i, rec);
                while let Some(rec) = buffer.remove(&next) {
                    emit(rec, &mut writer)?;
                    next += 1;
                }
            }
            Ok(())
        })?;
    }
    drop(writer);

    let mut by_key: BTreeMap<usize, ExperimentRecord> = BTreeMap::new();
    let position: std::collections::HashMap<JobKey, usize> =
        all.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    for r in done.into_iter().chain(fresh) {
        by_key.insert(position[&r.key()], r);
    }
    Ok(by_key.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::NoiseParams;

    fn small(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            node_sizes: vec![4, 6],
            graphs_per_size: 2,
            vqe: VqeConfig::exact(1, 1, 0),
            magic_rounds: 16,
            readout_shots: 16,
            output_path: dir.join("out.jsonl"),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn schema_of_a_single_record() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            node_sizes: vec![4],
            graphs_per_size: 1,
            methods: vec![Method::Ising],
            ..small(dir.path())
        };
        let recs = run_experiment(&cfg).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert!(r.is_ok(), "{:?}", r.error);
        let ratio = r.ratio.unwrap();
        assert!((0.0..=1.0).contains(&ratio));
        assert_eq!(r.num_edges, 6);
        assert!(r.wall_time.is_none());
        verify_record(r).unwrap();
        let line = std::fs::read_to_string(&cfg.output_path).unwrap();
        let js: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(js["method"], "ising");
        assert_eq!(js["status"], "ok");
    }

    #[test]
    fn seeds_are_shared_per_hamiltonian() {
        let cfg = ExperimentConfig::default();
        let k = |method| JobKey {
            num_nodes: 8,
            graph_index: 3,
            method,
        };
        let vqe = |m: Method| child_seed(&cfg, &k(m), m.hamiltonian_label(), STAGE_VQE);
        assert_eq!(vqe(Method::QracPauli), vqe(Method::QracMagic));
        assert_ne!(vqe(Method::Ising), vqe(Method::QracMagic));
        assert_eq!(graph_seed(&cfg, &k(Method::Ising)), graph_seed(&cfg, &k(Method::QracPauli)));
    }

    #[test]
    fn oversized_density_arm_is_a_failed_row() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            node_sizes: vec![30],
            graphs_per_size: 1,
            methods: vec![Method::Ising],
            noise: NoiseParams::cnot_depolarizing(0.01),
            ..small(dir.path())
        };
        let recs = run_experiment(&cfg).unwrap();
        assert_eq!(recs[0].status, RecordStatus::Failed);
        let msg = recs[0].error.as_deref().unwrap();
        assert!(msg.contains("density") && msg.contains("14"), "{msg}");
        verify_record(&recs[0]).unwrap();
    }

    #[test]
    fn parallel_output_matches_sequential() {
        let dir = tempfile::tempdir().unwrap();
        let seq = small(dir.path());
        let par = ExperimentConfig {
            workers: 3,
            output_path: dir.path().join("par.jsonl"),
            ..seq.clone()
        };
        let a = run_experiment(&seq).unwrap();
        let b = run_experiment(&par).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            std::fs::read(&seq.output_path).unwrap(),
            std::fs::read(&par.output_path).unwrap()
        );
        for r in &a {
            verify_record(r).unwrap();
        }
    }

    #[test]
    fn resume_skips_finished_jobs_and_drops_torn_lines() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path());
        let full = run_experiment(&cfg).unwrap();
        let bytes = std::fs::read(&cfg.output_path).unwrap();

        let partial = ExperimentConfig {
            output_path: dir.path().join("partial.jsonl"),
            ..cfg.clone()
        };
        let lines: Vec<&[u8]> = bytes.split_inclusive(|&b| b == b'\n').collect();
        let mut torn = lines[..5].concat();
        torn.extend_from_slice(&lines[5][..lines[5].len() / 2]);
        std::fs::write(&partial.output_path, &torn).unwrap();

        let mut new = 0;
        let resumed = run_experiment_with(&partial, |_| new += 1).unwrap();
        assert_eq!(new, full.len() - 5);
        assert_eq!(resumed, full);
        assert_eq!(std::fs::read(&partial.output_path).unwrap(), bytes);

        // a finished file is left alone
        let mut none = 0;
        run_experiment_with(&partial, |_| none += 1).unwrap();
        assert_eq!(none, 0);
    }

    #[test]
    fn refuses_foreign_output() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path());
        run_experiment(&cfg).unwrap();
        let other = ExperimentConfig {
            master_seed: 99,
            ..cfg
        };
        assert!(matches!(run_experiment(&other), Err(HarnessError::Config(_))));
    }

    #[test]
    fn tampered_records_fail_verification() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            node_sizes: vec![6],
            graphs_per_size: 1,
            methods: vec![Method::QracPauli],
            ..small(dir.path())
        };
        let rec = run_experiment(&cfg).unwrap().remove(0);
        let mut flipped = rec.clone();
        flipped.bits = Some(rec.bits.as_ref().unwrap().complement());
        verify_record(&flipped).unwrap();
        // moving one node of a 3-regular graph changes the cut by an odd amount
        let mut bits = rec.bits.as_ref().unwrap().bits().to_vec();
        bits[0] ^= 1;
        let mut bad = rec.clone();
        bad.bits = Some(BitAssignment::new(bits).unwrap());
        assert!(verify_record(&bad).is_err());
        let mut bad = rec;
        bad.ratio = Some(bad.ratio.unwrap() * 0.5);
        assert!(verify_record(&bad).is_err());
    }
}
