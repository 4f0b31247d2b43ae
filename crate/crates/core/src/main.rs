use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qrelax::analysis::{self, NoisyRatioModel, ShotPlan};
use qrelax::encoding::{assign_qrac, build_ising_hamiltonian, build_qrac_hamiltonian, QracAssignment};
use qrelax::graph::{generate_random_regular, Graph};
use qrelax::harness::{
    aggregate, compare_noise_impact, load_records, overall_drops, run_experiment_with,
    verify_record, ExperimentConfig,
};
use qrelax::pauli::Hamiltonian;
use qrelax::rounding::{
    computational_rounding, magic_rounding, pauli_rounding, CutScorer, PauliMode,
};
use qrelax::simulator::NoiseParams;
use qrelax::vqe::{prepare_candidate, run_vqe, Evaluation, VqeConfig};

#[derive(Parser)]
#[command(name = "qrelax", version, about = "MaxCut through Ising and QRAC relaxations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// RNG seed (experiment: overrides master_seed)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted (experiment: overrides output_path)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for experiment
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Random d-regular graph as an edge list
    GenGraph {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Hamiltonian (and QRAC assignment) of a graph as JSON
    Encode {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        encoding: Encoding,
    },
    /// Optimize a candidate state and print the result as JSON
    Vqe(VqeArgs),
    /// Round the candidate state of a `vqe` result
    Round {
        #[arg(long)]
        graph: PathBuf,
        /// JSON written by `vqe`
        #[arg(long)]
        vqe: PathBuf,
        #[arg(long, value_enum)]
        method: Rounding,
        /// Magic rounds
        #[arg(long, default_value_t = 1024)]
        rounds: u64,
        /// Samples for computational rounding; for Pauli rounding, shots per
        /// node (exact traces when omitted)
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Closed-form shot and noise quantities as JSON, or a crossover sweep as CSV
    Bounds(BoundsArgs),
    /// Run a batch experiment into JSON Lines
    Experiment,
    /// Summarize experiment output as CSV
    Summarize {
        /// JSON Lines written by `experiment`
        input: PathBuf,
        /// Noisy run to compare against; prints per-group drops instead
        #[arg(long)]
        compare: Option<PathBuf>,
        /// Re-check every record against a rebuilt graph
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Ising,
    Qrac,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rounding {
    Pauli,
    Magic,
    Computational,
}

#[derive(Args)]
struct VqeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    encoding: Encoding,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long, default_value_t = 2)]
    sweeps: usize,
    /// Shots per Pauli term, or `exact`
    #[arg(long, default_value = "exact", value_parser = parse_evaluation)]
    shots: Evaluation,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Also write the energy trace as CSV
    #[arg(long)]
    trace_csv: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseArgs {
    /// Depolarizing probability after each CNOT
    #[arg(long, default_value_t = 0.0)]
    cnot_error: f64,
    /// Survival probability of the global channel
    #[arg(long, default_value_t = 1.0)]
    global_p: f64,
    /// Applications of the global channel
    #[arg(long, default_value_t = 0)]
    global_n: u32,
}

impl NoiseArgs {
    fn params(&self) -> NoiseParams {
        NoiseParams {
            global_p: self.global_p,
            global_n: self.global_n,
            cnot_error: self.cnot_error,
        }
    }
}

#[derive(Args)]
struct BoundsArgs {
    /// Survival probability p of one depolarizing application
    #[arg(long)]
    p: f64,
    /// Noisy operations N (N₁ for the Ising arm)
    #[arg(long)]
    n: u32,
    /// Noisy operations of the QRAC arm; defaults to round(N/3)
    #[arg(long)]
    n3: Option<u32>,
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    edges: usize,
    #[arg(long)]
    opt_cut: usize,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Tr(P_j ρ) of a node, for the noisy bias
    #[arg(long, allow_hyphen_values = true)]
    trace: Option<f64>,
    /// Emit the crossover sweep CSV up to this N₁ instead
    #[arg(long)]
    sweep: Option<u64>,
    #[arg(long, default_value_t = 10)]
    step: u64,
}

fn parse_evaluation(s: &str) -> Result<Evaluation, String> {
    if s == "exact" {
        return Ok(Evaluation::Exact);
    }
    s.parse::<u64>()
        .map(Evaluation::Shots)
        .map_err(|_| format!("expected a shot count or `exact`, got `{s}`"))
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    Graph::from_edge_list(&read(path)?).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

fn encode(g: &Graph, enc: Encoding) -> Result<(Hamiltonian, Option<QracAssignment>), Failure> {
    Ok(match enc {
        Encoding::Ising => (build_ising_hamiltonian(g), None),
        Encoding::Qrac => {
            let a = assign_qrac(g);
            (build_qrac_hamiltonian(g, &a).map_err(runtime)?, Some(a))
        }
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::GenGraph { nodes, degree } => {
            let g = generate_random_regular(nodes, degree, cli.seed.unwrap_or(0))
                .map_err(|e| Failure::Usage(e.to_string()))?;
            emit(out, &g.to_edge_list())
        }
        Command::Encode { graph, encoding } => {
            let g = load_graph(&graph)?;
            let (h, a) = encode(&g, encoding)?;
            let mut v = json!({ "num_qubits": h.num_qubits(), "hamiltonian": h.to_json() });
            if let Some(a) = a {
                v["assignment"] = a.to_json();
            }
            emit(out, &pretty(&v))
        }
        Command::Vqe(args) => {
            let g = load_graph(&args.graph)?;
            let (h, _) = encode(&g, args.encoding)?;
            let cfg = VqeConfig {
                layers: args.layers,
                sweeps: args.sweeps,
                shots_per_term: args.shots,
                seed: cli.seed.unwrap_or(0),
            };
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let noise = args.noise.params();
            noise.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let result = run_vqe(&h, &cfg, &noise).map_err(runtime)?;
            if let Some(p) = &args.trace_csv {
                std::fs::write(p, result.trace_csv()).map_err(runtime)?;
            }
            let v = json!({
                "encoding": match args.encoding { Encoding::Ising => "ising", Encoding::Qrac => "qrac" },
                "config": cfg,
                "noise": noise,
                "result": result.to_json(),
            });
            emit(out, &pretty(&v))
        }
        Command::Round {
            graph,
            vqe,
            method,
            rounds,
            shots,
        } => {
            let g = load_graph(&graph)?;
            let saved: serde_json::Value =
                serde_json::from_str(&read(&vqe)?).map_err(|e| Failure::Runtime(format!("{}: {e}", vqe.display())))?;
            let field = |k: &str| saved.get(k).cloned().ok_or_else(|| Failure::Runtime(format!("vqe file lacks `{k}`")));
            let cfg: VqeConfig = serde_json::from_value(field("config")?).map_err(runtime)?;
            let noise: NoiseParams = serde_json::from_value(field("noise")?).map_err(runtime)?;
            let params: Vec<f64> =
                serde_json::from_value(field("result")?["final_params"].clone()).map_err(runtime)?;
            let encoding = match field("encoding")?.as_str() {
                Some("ising") => Encoding::Ising,
                Some("qrac") => Encoding::Qrac,
                other => return Err(Failure::Runtime(format!("unknown encoding {other:?}"))),
            };
            let (h, a) = encode(&g, encoding)?;
            let state = prepare_candidate(h.num_qubits(), cfg.layers, &params, &noise).map_err(runtime)?;
            let scorer = CutScorer::new(&g).map_err(runtime)?;
            let seed = cli.seed.unwrap_or(0);
            let outcome = match (method, &a) {
                (Rounding::Computational, _) => {
                    computational_rounding(&state, &scorer, shots.unwrap_or(1024), seed)
                }
                (Rounding::Pauli, Some(a)) => {
                    let mode = shots.map_or(PauliMode::Exact, PauliMode::Shots);
                    pauli_rounding(&state, a, &scorer, mode, seed)
                }
                (Rounding::Magic, Some(a)) => magic_rounding(&state, a, rounds, &scorer, seed),
                (_, None) => {
                    return Err(Failure::Usage(
                        "pauli and magic rounding need a qrac-encoded vqe result".into(),
                    ))
                }
            }
            .map_err(runtime)?;
            emit(out, &pretty(&outcome.to_json()))
        }
        Command::Bounds(b) => bounds(b, out),
        Command::Experiment => {
            let path = cli
                .config
                .ok_or_else(|| Failure::Usage("experiment needs --config <file>".into()))?;
            let mut cfg = ExperimentConfig::load(&path).map_err(|e| Failure::Usage(e.to_string()))?;
            if let Some(s) = cli.seed {
                cfg.master_seed = s;
            }
            if let Some(o) = cli.out {
                cfg.output_path = o;
            }
            if let Some(w) = cli.workers {
                cfg.workers = w;
            }
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let records = run_experiment_with(&cfg, |r| {
                eprintln!(
                    "{} nodes, graph {}, {}: {}",
                    r.num_nodes,
                    r.graph_index,
                    r.method,
                    match (r.ratio, &r.error) {
                        (Some(x), _) => format!("ratio {x:.4}"),
                        (None, e) => format!("failed: {}", e.as_deref().unwrap_or("?")),
                    }
                )
            })
            .map_err(runtime)?;
            let failed = records.iter().filter(|r| !r.is_ok()).count();
            eprintln!(
                "{} records ({failed} failed) in {}",
                records.len(),
                cfg.output_path.display()
            );
            Ok(())
        }
        Command::Summarize {
            input,
            compare,
            verify,
        } => {
            let records = load_records(&input).map_err(runtime)?;
            if verify {
                for r in &records {
                    verify_record(r).map_err(runtime)?;
                }
            }
            let summary = aggregate(&records).map_err(runtime)?;
            let Some(noisy_path) = compare else {
                return emit(out, &summary.to_csv());
            };
            let noisy = aggregate(&load_records(&noisy_path).map_err(runtime)?).map_err(runtime)?;
            let impacts = compare_noise_impact(&summary, &noisy).map_err(runtime)?;
            let mut csv = String::from("num_nodes,method,count,noiseless_mean,noisy_mean,drop,significant\n");
            for i in &impacts {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    i.num_nodes, i.method, i.count, i.noiseless_mean, i.noisy_mean, i.drop, i.significant
                ));
            }
            for (m, d) in overall_drops(&impacts) {
                csv.push_str(&format!("all,{m},,,,{d},\n"));
            }
            emit(out, &csv)
        }
    }
}

fn bounds(b: BoundsArgs, out: Option<&Path>) -> Result<(), Failure> {
    let usage = |e: analysis::AnalysisError| Failure::Usage(e.to_string());
    if let Some(n_max) = b.sweep {
        let csv = analysis::crossover_sweep_csv(b.p, 1.0 / 3.0, b.edges, b.opt_cut, n_max, b.step)
            .map_err(usage)?;
        return emit(out, &csv);
    }
    let n3 = b.n3.unwrap_or(((b.n as f64) / 3.0).round() as u32);
    let model = NoisyRatioModel {
        p: b.p,
        n1: b.n as f64,
        n3: n3 as f64,
        edges: b.edges,
        opt_cut: b.opt_cut,
        layers: b.layers,
        num_nodes: b.nodes,
    };
    model.validate().map_err(usage)?;
    let plan = ShotPlan::new(b.delta, b.epsilon).map_err(usage)?;
    let crossover = match analysis::find_crossover_n1(b.p, 1.0 / 3.0, b.edges, b.opt_cut) {
        Ok(c) => json!(c),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let mut v = json!({
        "inputs": {
            "p": b.p, "n1": b.n, "n3": n3, "nodes": b.nodes, "edges": b.edges,
            "opt_cut": b.opt_cut, "layers": b.layers, "delta": b.delta, "epsilon": b.epsilon,
        },
        "min_shots": plan.min_shots,
        "shots_order": analysis::shots_order(b.nodes, b.epsilon).map_err(usage)?,
        "shot_ratio_qrac_vs_ising": model.shot_ratio().map_err(usage)?,
        "expected_ratio_ising": model.ising().map_err(usage)?,
        "expected_ratio_qrac_lower": model.qrac_lower().map_err(usage)?,
        "validity_condition": analysis::validity_condition(b.edges, b.opt_cut),
        "crossover": crossover,
    });
    if let Some(t) = b.trace {
        let eps = analysis::epsilon_under_noise(b.p, b.n, t).map_err(usage)?;
        v["epsilon_under_noise"] = json!(eps);
        v["min_shots_under_noise"] = json!(analysis::min_shots(b.delta, eps).map_err(usage)?);
    }
    emit(out, &pretty(&v))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
