//! The nine acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the report. The experiment behind criteria 8 and 9 takes several minutes.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;

use qrelax::analysis::{
    expected_ratio_ising, expected_ratio_qrac_lower, find_crossover_n1, min_shots,
};
use qrelax::encoding::{
    assign_qrac, build_ising_hamiltonian, build_qrac_hamiltonian, max_eigenvalue,
    qrac_product_state,
};
use qrelax::graph::{cut_value, generate_random_regular, max_cut_bruteforce, BitAssignment, Graph};
use qrelax::harness::{
    aggregate, compare_noise_impact, overall_drops, run_experiment, ExperimentConfig,
    ExperimentRecord, Method,
};
use qrelax::rounding::{
    expected_magic_ratio_exact, magic_round_once, pauli_rounding, CutScorer, PauliMode,
};
use qrelax::seed::rng_from;
use qrelax::simulator::{
    build_hea, expectation_exact, global_depolarize, run_pure, DensityMatrix, Entanglement,
    NoiseParams, QuantumState,
};

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_graph(rng: &mut impl Rng, sizes: &[usize]) -> Graph {
    let n = sizes[rng.gen_range(0..sizes.len())];
    generate_random_regular(n, 3, rng.gen()).expect("3-regular graph")
}

fn relaxation_identity() -> Verdict {
    let mut rng = rng_from(101);
    let mut worst = 0.0f64;
    for _ in 0..120 {
        let g = random_graph(&mut rng, &[4, 6, 8, 10, 12]);
        let a = assign_qrac(&g);
        let h = build_qrac_hamiltonian(&g, &a).unwrap();
        let bits: Vec<u8> = (0..g.num_nodes()).map(|_| rng.gen_range(0..2)).collect();
        let m = BitAssignment::new(bits).unwrap();
        let f = QuantumState::Mixed(qrac_product_state(&m, &a).unwrap().into_density());
        let e = expectation_exact(&f, &h).unwrap();
        worst = worst.max((e - cut_value(&g, &m).unwrap() as f64).abs());
    }
    check(worst <= 1e-9, format!("120 pairs, max |Tr(F(m)H) - cut(m)| = {worst:.2e}"))
}

fn ising_eigenvalue() -> Verdict {
    let mut rng = rng_from(202);
    for i in 0..50 {
        let g = random_graph(&mut rng, &[4, 6, 8, 10, 12]);
        let top = max_eigenvalue(&build_ising_hamiltonian(&g)).unwrap();
        let (_, opt) = max_cut_bruteforce(&g).unwrap();
        if top != opt as f64 {
            return Err(format!("graph {i}: eigenvalue {top} vs max cut {opt}"));
        }
    }
    Ok("50 graphs, max eigenvalue equals brute-force max cut exactly".into())
}

fn sign_invariance() -> Verdict {
    let mut rng = rng_from(303);
    let mut worst = 0.0f64;
    let mut differing = 0;
    for s in 0..100 {
        let g = random_graph(&mut rng, &[6, 8, 10, 12]);
        let a = assign_qrac(&g);
        let scorer = CutScorer::new(&g).unwrap();
        let c = build_hea(a.num_qubits(), 2, Entanglement::Linear).unwrap();
        let params: Vec<f64> = (0..c.num_params()).map(|_| rng.gen_range(0.0..6.3)).collect();
        let rho = DensityMatrix::from_pure(&run_pure(&c, &params).unwrap());
        let clean = QuantumState::Mixed(rho.clone());
        let reference = pauli_rounding(&clean, &a, &scorer, PauliMode::Exact, s).unwrap();
        for p in [0.9f64, 0.99] {
            for n in [1u32, 10, 100] {
                let f = p.powi(n as i32);
                let noisy = QuantumState::Mixed(global_depolarize(rho.clone(), p, n));
                for j in 0..g.num_nodes() {
                    let pj = a.pauli_of(j);
                    let d = (noisy.pauli_expectation(&pj) - f * clean.pauli_expectation(&pj)).abs();
                    worst = worst.max(d);
                }
                let out = pauli_rounding(&noisy, &a, &scorer, PauliMode::Exact, s).unwrap();
                if out.bits != reference.bits {
                    differing += 1;
                }
            }
        }
    }
    check(
        worst <= 1e-9 && differing == 0,
        format!("100 states x 6 (p, N): max scaling error {worst:.2e}, {differing} rounding mismatches"),
    )
}

fn cube() -> Graph {
    let edges = (0..8usize).flat_map(|v| (0..3).map(move |b| (v, v ^ (1 << b)))).filter(|(a, b)| a < b);
    Graph::new(8, edges).unwrap()
}

fn magic_bound() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, g) in [("K3,3", Graph::complete_bipartite(3, 3).unwrap()), ("cube", cube())] {
        let a = assign_qrac(&g);
        let scorer = CutScorer::new(&g).unwrap();
        let (m, _) = max_cut_bruteforce(&g).unwrap();
        let f = QuantumState::Mixed(qrac_product_state(&m, &a).unwrap().into_density());
        let exact = expected_magic_ratio_exact(&f, &a, &scorer).unwrap();
        let rounds = 10_000u64;
        let mean = (0..rounds)
            .map(|s| magic_round_once(&f, &a, &scorer, s).unwrap().ratio)
            .sum::<f64>()
            / rounds as f64;
        ok &= (exact - 5.0 / 9.0).abs() <= 1e-9 && (mean - 5.0 / 9.0).abs() <= 0.01;
        lines.push(format!("{name}: analytic {exact:.12}, Monte Carlo {mean:.4}"));
    }
    check(ok, lines.join("; "))
}

fn hoeffding() -> Verdict {
    let (eps, delta) = (0.1, 0.05);
    let s = min_shots(delta, eps).unwrap();
    let trials = 2000;
    let mut rng = rng_from(505);
    let errors = (0..trials)
        .filter(|_| {
            let ones = (0..s).filter(|_| rng.gen_bool(0.5 + eps)).count() as u64;
            2 * ones <= s
        })
        .count();
    let rate = errors as f64 / trials as f64;
    let se = (delta * (1.0 - delta) / trials as f64).sqrt();
    check(
        s == 150 && rate <= delta + 3.0 * se,
        format!("S = {s}, sign-error rate {rate:.4} vs bound {:.4}", delta + 3.0 * se),
    )
}

fn crossover() -> Verdict {
    let p = 0.99f64;
    let c = find_crossover_n1(p, 1.0 / 3.0, 12, 12).map_err(|e| e.to_string())?;
    let oracle = 3.0 * 9f64.ln() / (2.0 * -p.ln());
    check(
        c.n1.abs_diff(328) <= 1 && (c.n1 as f64 - oracle).abs() <= 1.0,
        format!("N1 = {} (continuous {:.4}, closed form {oracle:.4})", c.n1, c.n1_continuous),
    )
}

fn spot_values() -> Verdict {
    let i = expected_ratio_ising(0.99, 100.0, 12, 12).unwrap();
    let q = expected_ratio_qrac_lower(0.99, 33.0, 12, 12).unwrap();
    check(
        (i - 0.6830).abs() <= 1e-4 && (q - 0.5399).abs() <= 1e-4,
        format!("Ising {i:.6}, QRAC lower {q:.6}"),
    )
}

fn desk_experiment(dir: &Path) -> (Vec<ExperimentRecord>, Vec<ExperimentRecord>) {
    let clean = ExperimentConfig {
        node_sizes: vec![8, 12],
        graphs_per_size: 10,
        methods: vec![Method::Ising, Method::QracPauli],
        output_path: dir.join("noiseless.jsonl"),
        ..ExperimentConfig::default()
    };
    let noisy = ExperimentConfig {
        noise: NoiseParams::cnot_depolarizing(0.01),
        output_path: dir.join("noisy.jsonl"),
        ..clean.clone()
    };
    (run_experiment(&clean).unwrap(), run_experiment(&noisy).unwrap())
}

fn noise_trend(clean: &[ExperimentRecord], noisy: &[ExperimentRecord]) -> Verdict {
    let impacts = compare_noise_impact(
        &aggregate(clean).map_err(|e| e.to_string())?,
        &aggregate(noisy).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let mut parts: Vec<String> = impacts
        .iter()
        .map(|i| {
            format!(
                "{} n={}: {:.4} -> {:.4}",
                i.method, i.num_nodes, i.noiseless_mean, i.noisy_mean
            )
        })
        .collect();
    let drops: BTreeMap<Method, f64> = overall_drops(&impacts);
    let (ising, pauli) = (drops[&Method::Ising], drops[&Method::QracPauli]);
    parts.push(format!("drop ising {ising:.4} vs qrac-pauli {pauli:.4}"));
    check(ising > pauli, parts.join("; "))
}

fn monotone_traces(clean: &[ExperimentRecord]) -> Verdict {
    let mut traces = 0;
    for r in clean {
        let t = r.vqe_energy_trace.as_ref().ok_or("record without trace")?;
        if let Some(w) = t.windows(2).position(|w| w[1] < w[0]) {
            return Err(format!(
                "{} n={} graph {}: step {} lowers {} to {}",
                r.method, r.num_nodes, r.graph_index, w + 1, t[w], t[w + 1]
            ));
        }
        traces += 1;
    }
    Ok(format!("{traces} noiseless exact traces, all non-decreasing"))
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let mut report: Vec<(u32, &str, Verdict)> = vec![
        (1, "relaxation identity", relaxation_identity()),
        (2, "Ising eigenvalue", ising_eigenvalue()),
        (3, "sign invariance", sign_invariance()),
        (4, "magic rounding bound", magic_bound()),
        (5, "Hoeffding shot bound", hoeffding()),
        (6, "crossover", crossover()),
        (7, "expected-ratio spot values", spot_values()),
    ];
    let (clean, noisy) = desk_experiment(dir.path());
    report.push((8, "noise trend at desk scale", noise_trend(&clean, &noisy)));
    report.push((9, "NFT monotonicity", monotone_traces(&clean)));

    for (n, name, v) in &report {
        match v {
            Ok(d) => println!("PASS {n} {name}: {d}"),
            Err(d) => println!("FAIL {n} {name}: {d}"),
        }
    }
    let failed: Vec<u32> = report.iter().filter(|(_, _, v)| v.is_err()).map(|(n, _, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
