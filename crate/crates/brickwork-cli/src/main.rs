//! Command-line front end: build and serialize ensembles, run verification
//! suites, compile circuits onto geometries, collect and evaluate classical
//! shadows, and emit distribution statistics.
//!
//! stdout carries exactly one primary JSON result per invocation; logs go to
//! stderr. Exit codes: 0 success, 2 usage/parse, 3 cap or regime violation,
//! 4 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use brickwork::circuit::Circuit;
use brickwork::diststats as ds;
use brickwork::ensemble::{
    BrickworkSpec, CircuitSampler, FixedCircuit, GlobalCliffordEnsemble, HaarEnsemble, LocalKind,
    RandomCircuit1d, TwoQubitKind,
};
use brickwork::error::Error as CoreError;
use brickwork::geometry::{compile_1d_to_geometry, hamiltonian_path_g4, Geometry};
use brickwork::rng::RngStream;
use brickwork::serialize as ser;
use brickwork::shadows as sh;
use brickwork::verifier as vf;

mod exit_codes {
    pub const USAGE: i32 = 2;
    pub const CAP: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

struct CliError {
    code: i32,
    message: String,
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::SizeCap(_) | CoreError::Regime(_) => exit_codes::CAP,
            CoreError::Numerical(_) => exit_codes::NUMERICAL,
            _ => exit_codes::USAGE,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: exit_codes::USAGE, message: format!("io error: {e}") }
    }
}

fn usage_err(msg: impl Into<String>) -> CliError {
    CliError { code: exit_codes::USAGE, message: msg.into() }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "brickwork",
    about = "Low-depth random unitary ensembles: construction, verification, compilation, shadows, statistics",
    version
)]
struct Cli {
    /// JSON config file; flags take precedence over its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for Monte Carlo commands (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one sample of an ensemble and write its circuit JSON.
    Build(BuildArgs),
    /// Quantitative design diagnostics.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Transpile a 1D nearest-neighbor circuit onto a geometry.
    Compile(CompileArgs),
    /// Classical shadows: collect snapshots and estimate observables.
    #[command(subcommand)]
    Shadows(ShadowsCmd),
    /// Output-distribution statistics.
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Protocol demonstrations.
    #[command(subcommand)]
    Protocol(ProtocolCmd),
}

#[derive(Args, Clone)]
struct EnsembleArgs {
    /// Qubit count.
    #[arg(long)]
    n: Option<usize>,
    /// Ensemble family: brickwork | haar | clifford | circuit1d | identity.
    #[arg(long, default_value = "brickwork")]
    ensemble: String,
    /// Patch size ξ (brickwork).
    #[arg(long)]
    xi: Option<usize>,
    /// Patch kind: haar | clifford | lrc | pfc (brickwork).
    #[arg(long)]
    kind: Option<String>,
    /// Depth (circuit1d ensembles and lrc patches).
    #[arg(long)]
    depth: Option<usize>,
    /// Two-qubit gate kind for circuit1d: haar | clifford.
    #[arg(long, default_value = "haar")]
    gate_kind: String,
    /// Key seed for pfc patches.
    #[arg(long)]
    pfc_key: Option<u64>,
    /// Geometry edge-list file; brickwork patches follow its Hamiltonian path.
    #[arg(long)]
    geometry: Option<PathBuf>,
}

impl EnsembleArgs {
    fn merge_config(&mut self, cfg: &Value) {
        merge_usize(&mut self.n, cfg, "n");
        merge_usize(&mut self.xi, cfg, "xi");
        merge_usize(&mut self.depth, cfg, "depth");
        if self.kind.is_none() {
            if let Some(s) = cfg["kind"].as_str() {
                self.kind = Some(s.to_string());
            }
        }
        if self.pfc_key.is_none() {
            self.pfc_key = cfg["pfc_key"].as_u64();
        }
    }

    fn build(&self, inputs: &mut Vec<PathBuf>) -> CliResult<Box<dyn CircuitSampler>> {
        let n = self.n.ok_or_else(|| usage_err("missing --n"))?;
        Ok(match self.ensemble.as_str() {
            "haar" => Box::new(HaarEnsemble { n }),
            "clifford" => Box::new(GlobalCliffordEnsemble { n }),
            "identity" => Box::new(FixedCircuit(Circuit::new(n))),
            "circuit1d" => {
                let depth = self.depth.ok_or_else(|| usage_err("circuit1d needs --depth"))?;
                let kind = match self.gate_kind.as_str() {
                    "haar" => TwoQubitKind::Haar,
                    "clifford" => TwoQubitKind::Clifford,
                    other => return Err(usage_err(format!("unknown --gate-kind {other}"))),
                };
                Box::new(RandomCircuit1d { n, depth, kind })
            }
            "brickwork" => {
                let xi = self.xi.ok_or_else(|| usage_err("brickwork needs --xi"))?;
                // a bare --depth means local-random-circuit patches
                let default_kind = if self.depth.is_some() { "lrc" } else { "clifford" };
                let local_kind = match self.kind.as_deref().unwrap_or(default_kind) {
                    "haar" => LocalKind::Haar,
                    "clifford" => LocalKind::Clifford,
                    "lrc" => LocalKind::LocalRandomCircuit {
                        depth: self.depth.ok_or_else(|| usage_err("lrc patches need --depth"))?,
                    },
                    "pfc" => LocalKind::Pfc {
                        key_seed: self.pfc_key.ok_or_else(|| usage_err("pfc patches need --pfc-key"))?,
                    },
                    other => return Err(usage_err(format!("unknown --kind {other}"))),
                };
                let geometry = match &self.geometry {
                    None => None,
                    Some(path) => {
                        inputs.push(path.clone());
                        Some(load_geometry(path)?)
                    }
                };
                Box::new(BrickworkSpec { n, xi, local_kind, geometry })
            }
            other => return Err(usage_err(format!("unknown --ensemble {other}"))),
        })
    }

    fn snapshot(&self) -> Value {
        json!({
            "n": self.n,
            "ensemble": self.ensemble,
            "xi": self.xi,
            "kind": self.kind,
            "depth": self.depth,
            "gate_kind": self.gate_kind,
            "pfc_key": self.pfc_key,
            "geometry": self.geometry.as_ref().map(|p| p.display().to_string()),
        })
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Output circuit JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Collision probability Z with the light-cone lower bound.
    Collision(CollisionArgs),
    /// Frame potential against the Haar value k!.
    Frame(FrameArgs),
    /// Monte Carlo moment channel vs the exact Haar twirl.
    Moments(MomentsArgs),
    /// SWAP-test purity of the scrambled-stabilizer state on a light cone.
    Swaptest(SwaptestArgs),
    /// Per-pair EPR fidelity profile for unitary vs orthogonal ensembles.
    Eprtest(EprtestArgs),
    /// Unitary equivalence of an original and a compiled circuit.
    Equivalence(EquivalenceArgs),
}

#[derive(Args)]
struct CollisionArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random product basis: haar | clifford.
    #[arg(long, default_value = "haar")]
    basis: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FrameArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    pairs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    batches: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SwaptestArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Comma-separated light-cone qubits, e.g. `0,1`.
    #[arg(long)]
    lightcone: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EprtestArgs {
    #[arg(long)]
    n: Option<usize>,
    /// identity | orthogonal | unitary.
    #[arg(long)]
    op: Option<String>,
    /// Comma-separated support qubits (defaults to all).
    #[arg(long)]
    support: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquivalenceArgs {
    /// Original circuit JSON.
    #[arg(long)]
    original: PathBuf,
    /// Output of `compile` (JSON with circuit + relabeling).
    #[arg(long)]
    compiled: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct CompileArgs {
    /// Geometry edge-list file.
    #[arg(long)]
    geometry: PathBuf,
    /// 1D nearest-neighbor circuit JSON.
    #[arg(long)]
    circuit: PathBuf,
    /// Unused; accepted so stochastic pipelines can pass one seed everywhere.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ShadowsCmd {
    /// Sample snapshots and persist them as NDJSON.
    Collect(ShadowCollectArgs),
    /// Estimate an observable from persisted snapshots.
    Estimate(ShadowEstimateArgs),
    /// Measured estimator bias against the dense truth.
    Bias(ShadowBiasArgs),
}

#[derive(Args)]
struct ShadowCollectArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// State preparation: zero | ghz | a circuit JSON path.
    #[arg(long, default_value = "zero")]
    prep: String,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShadowEstimateArgs {
    /// Snapshot NDJSON file from `shadows collect`.
    #[arg(long)]
    snapshots: PathBuf,
    /// Observable: identity, ghz, zero, or `pauli:<string like ZIX>`.
    #[arg(long)]
    observable: Option<String>,
    /// mean or `median:<K>`.
    #[arg(long, default_value = "mean")]
    method: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShadowBiasArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, default_value = "ghz")]
    prep: String,
    #[arg(long, default_value = "ghz")]
    observable: String,
    #[arg(long)]
    count: Option<usize>,
    /// Design error ε for the reported bound 2ε·tr(O).
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum StatsCmd {
    /// Exact TV between N Haar-output samples and N uniform samples.
    Tvbound(TvboundArgs),
    /// Per-circuit TV, Berger bound, and k-norms, with CSV export.
    Farfrom(FarfromArgs),
    /// k-norm concentration tail frequency.
    Knorm(KnormArgs),
}

#[derive(Args)]
struct TvboundArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Number of samples N.
    #[arg(long = "N")]
    count: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FarfromArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long)]
    circuits: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV export path (circuit_seed, tv, berger, knorm_2, knorm_3).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KnormArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long)]
    k: Option<u32>,
    /// Relative deviation threshold a.
    #[arg(long)]
    a: Option<f64>,
    /// Design error ε entering the reported bound.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long)]
    circuits: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ProtocolCmd {
    /// Time-reversal detector for long-range couplings on a square grid.
    Timereversal(TimeReversalArgs),
    /// SWAP-test purity distinguisher.
    Purity(PurityArgs),
}

#[derive(Args)]
struct TimeReversalArgs {
    /// Grid side length (n = side²).
    #[arg(long)]
    side: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    /// Coupling angle θ in radians.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run the null (no long-range coupling) experiment instead.
    #[arg(long)]
    no_long_range: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PurityArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// pure | mixed.
    #[arg(long, default_value = "pure")]
    source: String,
    #[arg(long)]
    pairs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn merge_usize(slot: &mut Option<usize>, cfg: &Value, key: &str) {
    if slot.is_none() {
        *slot = cfg[key].as_u64().map(|v| v as usize);
    }
}

fn merge_u64(slot: &mut Option<u64>, cfg: &Value, key: &str) {
    if slot.is_none() {
        *slot = cfg[key].as_u64();
    }
}

fn load_geometry(path: &Path) -> CliResult<Geometry> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        let v: Value = serde_json::from_str(&text).map_err(|e| usage_err(format!("bad geometry JSON: {e}")))?;
        Ok(serde_json::from_value(v).map_err(|e| usage_err(format!("bad geometry JSON: {e}")))?)
    } else {
        Ok(Geometry::from_edge_list_text(&text)?)
    }
}

fn need<T: Copy>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| usage_err(format!("missing --{name}")))
}

fn parse_qubit_list(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| usage_err(format!("bad qubit list entry {p:?}"))))
        .collect()
}

/// Writes the primary result to stdout (and optionally a file) plus a run
/// manifest next to the file.
struct Emitter {
    command: String,
    config_snapshot: Value,
    seed: Option<u64>,
    input_hashes: Vec<(String, String)>,
}

impl Emitter {
    fn new(command: &str, config_snapshot: Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            config_snapshot,
            seed,
            input_hashes: Vec::new(),
        }
    }

    fn hash_input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        self.input_hashes.push((path.display().to_string(), format!("{:x}", hasher.finalize())));
        Ok(())
    }

    fn emit(&self, primary: &Value, out: Option<&Path>, extra_outputs: &[&Path]) -> CliResult<()> {
        let text = serde_json::to_string_pretty(primary).expect("serializable");
        if let Some(path) = out {
            std::fs::write(path, &text)?;
            self.write_manifest(path, extra_outputs)?;
            println!("{}", json!({ "written": path.display().to_string() }));
        } else {
            if let Some(first) = extra_outputs.first() {
                self.write_manifest(first, extra_outputs)?;
            }
            println!("{text}");
        }
        Ok(())
    }

    fn write_manifest(&self, primary_out: &Path, extra: &[&Path]) -> CliResult<()> {
        let mut outputs: Vec<String> = vec![primary_out.display().to_string()];
        outputs.extend(extra.iter().map(|p| p.display().to_string()));
        let manifest = json!({
            "command": self.command,
            "config": self.config_snapshot,
            "seed": self.seed,
            "input_hashes": self.input_hashes.iter().map(|(p, h)| json!({"path": p, "sha256": h})).collect::<Vec<_>>(),
            "created_unix": std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            "outputs": outputs,
        });
        let path = PathBuf::from(format!("{}.manifest.json", primary_out.display()));
        std::fs::write(path, serde_json::to_string_pretty(&manifest).expect("serializable"))?;
        Ok(())
    }
}

fn load_config(path: &Option<PathBuf>) -> CliResult<Value> {
    match path {
        None => Ok(Value::Null),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| usage_err(format!("bad config JSON: {e}")))
        }
    }
}

fn prep_circuit(spec: &str, n: usize, inputs: &mut Vec<PathBuf>) -> CliResult<Circuit> {
    match spec {
        "zero" => Ok(Circuit::new(n)),
        "ghz" => Ok(sh::ghz_circuit(n)?),
        path => {
            let p = PathBuf::from(path);
            inputs.push(p.clone());
            let text = std::fs::read_to_string(&p)?;
            Ok(ser::circuit_from_str(&text)?)
        }
    }
}

fn observable_from_spec(spec: &str, n: usize, inputs: &mut Vec<PathBuf>) -> CliResult<sh::Observable> {
    Ok(match spec {
        "identity" => sh::Observable::Identity,
        "ghz" => sh::Observable::StabilizerProjector(sh::ghz_circuit(n)?),
        "zero" => sh::Observable::StabilizerProjector(Circuit::new(n)),
        other => {
            if let Some(pauli) = other.strip_prefix("pauli:") {
                let chars: Vec<char> = pauli.chars().collect();
                if chars.len() != n {
                    return Err(usage_err(format!("pauli string must have length {n}")));
                }
                let mut p = brickwork::clifford::PauliBits::identity();
                for (q, c) in chars.iter().enumerate() {
                    match c.to_ascii_uppercase() {
                        'I' => {}
                        'X' => p.x |= 1 << q,
                        'Y' => {
                            p.x |= 1 << q;
                            p.z |= 1 << q;
                        }
                        'Z' => p.z |= 1 << q,
                        _ => return Err(usage_err(format!("bad pauli character {c}"))),
                    }
                }
                sh::Observable::Pauli(p)
            } else {
                // a circuit JSON path preparing a stabilizer target
                let p = PathBuf::from(other);
                inputs.push(p.clone());
                let text = std::fs::read_to_string(&p)?;
                sh::Observable::StabilizerProjector(ser::circuit_from_str(&text)?)
            }
        }
    })
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = load_config(&cli.config)?;
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage_err(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Build(mut args) => {
            args.ensemble.merge_config(&cfg);
            merge_u64(&mut args.seed, &cfg, "seed");
            let seed = need(args.seed, "seed")?;
            let mut inputs = Vec::new();
            let sampler = args.ensemble.build(&mut inputs)?;
            let circuit = sampler.sample_indexed(RngStream::new(seed), 0)?;
            let mut emitter = Emitter::new("build", args.ensemble.snapshot(), Some(seed));
            for p in &inputs {
                emitter.hash_input(p)?;
            }
            let clifford_depths: Vec<usize> = circuit
                .gates()
                .filter_map(|g| match &g.payload {
                    brickwork::gates::GatePayload::Clifford(c) => Some(c.synthesized_depth()),
                    _ => None,
                })
                .collect();
            eprintln!(
                "built {}-qubit circuit: depth {}, {} gates{}",
                circuit.n(),
                circuit.depth(),
                circuit.gate_count(),
                if clifford_depths.is_empty() {
                    String::new()
                } else {
                    format!(", per-gate Clifford compile depths {clifford_depths:?}")
                }
            );
            emitter.emit(&ser::circuit_to_json(&circuit), args.out.as_deref(), &[])?;
        }
        Command::Verify(v) => run_verify(v, &cfg)?,
        Command::Compile(args) => {
            let mut emitter = Emitter::new("compile", json!({}), args.seed);
            emitter.hash_input(&args.geometry)?;
            emitter.hash_input(&args.circuit)?;
            let geometry = load_geometry(&args.geometry)?;
            let circuit = ser::circuit_from_str(&std::fs::read_to_string(&args.circuit)?)?;
            let compiled = compile_1d_to_geometry(&circuit, &geometry)?;
            let path = hamiltonian_path_g4(&geometry, 0)?;
            let result = json!({
                "circuit": ser::circuit_to_json(&compiled.circuit),
                "relabeling": compiled.relabeling,
                "depth_ratio": compiled.depth_ratio,
                "hamiltonian_path": serde_json::to_value(&path).expect("serializable"),
            });
            eprintln!(
                "compiled: depth {} → {} (ratio {:.2})",
                circuit.depth(),
                compiled.circuit.depth(),
                compiled.depth_ratio
            );
            emitter.emit(&result, args.out.as_deref(), &[])?;
        }
        Command::Shadows(s) => run_shadows(s, &cfg)?,
        Command::Stats(s) => run_stats(s, &cfg)?,
        Command::Protocol(p) => run_protocol(p, &cfg)?,
    }
    Ok(())
}

fn run_verify(cmd: VerifyCmd, cfg: &Value) -> CliResult<()> {
    match cmd {
        VerifyCmd::Collision(mut args) => {
            args.ensemble.merge_config(cfg);
            merge_u64(&mut args.samples, cfg, "samples");
            merge_u64(&mut args.seed, cfg, "seed");
            let samples = need(args.samples, "samples")?;
            let seed = need(args.seed, "seed")?;
            let basis = match args.basis.as_str() {
                "haar" => vf::ProductBasis::Haar,
                "clifford" => vf::ProductBasis::Clifford,
                other => return Err(usage_err(format!("unknown --basis {other}"))),
            };
            let mut inputs = Vec::new();
            let sampler = args.ensemble.build(&mut inputs)?;
            let stream = RngStream::new(seed);
            let acc = parallel_scalar(samples, |range_start, count| {
                vf::collision_probability_batch(sampler.as_ref(), basis, count, stream, range_start)
            })?;
            let report = vf::collision_report_from_acc(sampler.as_ref(), acc, stream)?;
            let mut emitter = Emitter::new("verify collision", args.ensemble.snapshot(), Some(seed));
            for p in &inputs {
                emitter.hash_input(p)?;
            }
            emitter.emit(&with_seed(&report, seed), args.out.as_deref(), &[])?;
        }
        VerifyCmd::Frame(mut args) => {
            args.ensemble.merge_config(cfg);
            merge_usize(&mut args.k, cfg, "k");
            merge_u64(&mut args.pairs, cfg, "pairs");
            merge_u64(&mut args.seed, cfg, "seed");
            let k = need(args.k, "k")?;
            let pairs = need(args.pairs, "pairs")?;
            let seed = need(args.seed, "seed")?;
            let mut inputs = Vec::new();
            let sampler = args.ensemble.build(&mut inputs)?;
            let stream = RngStream::new(seed);
            let acc = parallel_scalar(pairs, |start, count| {
                vf::frame_potential_batch(sampler.as_ref(), k, count, stream, start)
            })?;
            let report = vf::FramePotentialReport {
                k,
                estimate: acc.mean(),
                std_error: acc.std_error(),
                haar_value: brickwork::perm::factorial(k) as f64,
                pair_samples: pairs,
            };
            let emitter = Emitter::new("verify frame", args.ensemble.snapshot(), Some(seed));
            emitter.emit(&with_seed(&report, seed), args.out.as_deref(), &[])?;
        }
        VerifyCmd::Moments(mut args) => {
            args.ensemble.merge_config(cfg);
            merge_usize(&mut args.k, cfg, "k");
            merge_u64(&mut args.samples, cfg, "samples");
            merge_u64(&mut args.seed, cfg, "seed");
            let k = need(args.k, "k")?;
            let samples = need(args.samples, "samples")?;
            let seed = need(args.seed, "seed")?;
            let mut inputs = Vec::new();
            let sampler = args.ensemble.build(&mut inputs)?;
            let n = sampler.n();
            let probe = vf::Probe::zero_state_power(n);
            let est = vf::moment_channel_mc(sampler.as_ref(), k, &probe, samples, args.batches, RngStream::new(seed))?;
            let exact = brickwork::perm::haar_twirl_exact(&probe.to_moment_operator(k, n)?)?;
            let (distance, jackknife) = est.trace_distance_to(&exact);
            let result = json!({
                "k": k,
                "n": n,
                "samples": est.sample_count,
                "standard_error": est.standard_error,
                "trace_distance_to_haar": distance,
                "trace_distance_jackknife_sigma": jackknife,
            });
            let emitter = Emitter::new("verify moments", args.ensemble.snapshot(), Some(seed));
            emitter.emit(&result, args.out.as_deref(), &[])?;
        }
        VerifyCmd::Swaptest(mut args) => {
            args.ensemble.merge_config(cfg);
            merge_u64(&mut args.samples, cfg, "samples");
            merge_u64(&mut args.seed, cfg, "seed");
            let samples = need(args.samples, "samples")?;
            let seed = need(args.seed, "seed")?;
            let mut inputs = Vec::new();
            let sampler = args.ensemble.build(&mut inputs)?;
            let lightcone = match &args.lightcone {
                Some(s) => parse_qubit_list(s)?,
                None => {
                    // light cone of qubit 0 under one sampled circuit
                    let c = sampler.sample_indexed(RngStream::new(seed), u64::MAX / 2)?;
                    c.lightcone(&std::collections::BTreeSet::from([0])).into_iter().collect()
                }
            };
            let report = vf::swap_test_lower_bound(sampler.as_ref(), &lightcone, samples, RngStream::new(seed))?;
            let emitter = Emitter::new("verify swaptest", args.ensemble.snapshot(), Some(seed));
            emitter.emit(&with_seed(&report, seed), args.out.as_deref(), &[])?;
        }
        VerifyCmd::Eprtest(mut args) => {
            merge_usize(&mut args.n, cfg, "n");
            merge_u64(&mut args.samples, cfg, "samples");
            merge_u64(&mut args.seed, cfg, "seed");
            let n = need(args.n, "n")?;
            let samples = need(args.samples, "samples")?;
            let seed = need(args.seed, "seed")?;
            let support = match &args.support {
                Some(s) => parse_qubit_list(s)?,
                None => (0..n).collect(),
            };
            let op = match args.op.as_deref().unwrap_or("unitary") {
                "identity" => vf::EprTestOp::Identity,
                "orthogonal" => vf::EprTestOp::Orthogonal { support },
                "unitary" => vf::EprTestOp::Unitary { support },
                other => return Err(usage_err(format!("unknown --op {other}"))),
            };
            let profile = vf::orthogonal_epr_test(n, &op, samples, RngStream::new(seed))?;
            let emitter = Emitter::new("verify eprtest", json!({"n": n, "op": args.op}), Some(seed));
            emitter.emit(&with_seed(&profile, seed), args.out.as_deref(), &[])?;
        }
        VerifyCmd::Equivalence(args) => {
            let mut emitter = Emitter::new("verify equivalence", json!({}), None);
            emitter.hash_input(&args.original)?;
            emitter.hash_input(&args.compiled)?;
            let original = ser::circuit_from_str(&std::fs::read_to_string(&args.original)?)?;
            let compiled_doc: Value =
                serde_json::from_str(&std::fs::read_to_string(&args.compiled)?)
                    .map_err(|e| usage_err(format!("bad compiled JSON: {e}")))?;
            let compiled = ser::circuit_from_json(&compiled_doc["circuit"])?;
            let relabeling: Vec<usize> = compiled_doc["relabeling"]
                .as_array()
                .ok_or_else(|| usage_err("compiled JSON lacks relabeling"))?
                .iter()
                .map(|v| v.as_u64().unwrap_or(0) as usize)
                .collect();
            let report =
                brickwork::geometry::verify_compilation(&original, &compiled, &relabeling, args.tol)?;
            emitter.emit(
                &json!({ "equal": report.equal, "max_dev": report.max_dev, "tol": args.tol }),
                None,
                &[],
            )?;
        }
    }
    Ok(())
}

fn run_shadows(cmd: ShadowsCmd, cfg: &Value) -> CliResult<()> {
    match cmd {
        ShadowsCmd::Collect(mut args) => {
            args.ensemble.merge_config(cfg);
            merge_usize(&mut args.count, cfg, "count");
            merge_u64(&mut args.seed, cfg, "seed");
            let count = need(args.count, "count")?;
            let seed = need(args.seed, "seed")?;
            let out = args.out.clone().ok_or_else(|| usage_err("shadows collect needs --out"))?;
            let mut inputs = Vec::new();
            let sampler = args.ensemble.build(&mut inputs)?;
            let prep = prep_circuit(&args.prep, sampler.n(), &mut inputs)?;
            let snaps = sh::collect_shadows(&prep, sampler.as_ref(), count, RngStream::new(seed))?;
            std::fs::write(&out, ser::snapshots_to_ndjson(&snaps))?;
            let mut emitter = Emitter::new("shadows collect", args.ensemble.snapshot(), Some(seed));
            for p in &inputs {
                emitter.hash_input(p)?;
            }
            emitter.write_manifest(&out, &[])?;
            println!(
                "{}",
                json!({ "written": out.display().to_string(), "snapshots": snaps.len() })
            );
        }
        ShadowsCmd::Estimate(args) => {
            let mut emitter = Emitter::new("shadows estimate", json!({"method": args.method}), None);
            emitter.hash_input(&args.snapshots)?;
            let snaps = ser::snapshots_from_ndjson(&std::fs::read_to_string(&args.snapshots)?)?;
            if snaps.is_empty() {
                return Err(usage_err("no snapshots in file"));
            }
            let n = snaps[0].circuit.n();
            let mut inputs = Vec::new();
            let spec = args.observable.as_deref().ok_or_else(|| usage_err("missing --observable"))?;
            let observable = observable_from_spec(spec, n, &mut inputs)?;
            let method = parse_method(&args.method, snaps.len())?;
            let est = sh::estimate_observable(&snaps, &observable, method)?;
            emitter.emit(&to_value(&est), args.out.as_deref(), &[])?;
        }
        ShadowsCmd::Bias(mut args) => {
            args.ensemble.merge_config(cfg);
            merge_usize(&mut args.count, cfg, "count");
            merge_u64(&mut args.seed, cfg, "seed");
            let count = need(args.count, "count")?;
            let seed = need(args.seed, "seed")?;
            let mut inputs = Vec::new();
            let sampler = args.ensemble.build(&mut inputs)?;
            let prep = prep_circuit(&args.prep, sampler.n(), &mut inputs)?;
            let observable = observable_from_spec(&args.observable, sampler.n(), &mut inputs)?;
            let report = sh::bias_probe(sampler.as_ref(), &prep, &observable, count, args.epsilon, RngStream::new(seed))?;
            let emitter = Emitter::new("shadows bias", args.ensemble.snapshot(), Some(seed));
            emitter.emit(&with_seed(&report, seed), args.out.as_deref(), &[])?;
        }
    }
    Ok(())
}

fn parse_method(spec: &str, n_snapshots: usize) -> CliResult<sh::Method> {
    if spec == "mean" {
        Ok(sh::Method::Mean)
    } else if spec == "median" {
        Ok(sh::Method::MedianOfMeans { batches: sh::default_median_batches().min(n_snapshots) })
    } else if let Some(k) = spec.strip_prefix("median:") {
        let batches: usize = k.parse().map_err(|_| usage_err("bad median batch count"))?;
        Ok(sh::Method::MedianOfMeans { batches })
    } else {
        Err(usage_err(format!("unknown --method {spec}")))
    }
}

fn run_stats(cmd: StatsCmd, cfg: &Value) -> CliResult<()> {
    match cmd {
        StatsCmd::Tvbound(mut args) => {
            merge_usize(&mut args.n, cfg, "n");
            merge_usize(&mut args.count, cfg, "N");
            let n = need(args.n, "n")?;
            let count = need(args.count, "N")?;
            let report = ds::tv_haar_vs_uniform(n, count)?;
            let emitter = Emitter::new("stats tvbound", json!({"n": n, "N": count}), None);
            emitter.emit(&to_value(&report), args.out.as_deref(), &[])?;
        }
        StatsCmd::Farfrom(mut args) => {
            args.ensemble.merge_config(cfg);
            merge_u64(&mut args.circuits, cfg, "circuits");
            merge_u64(&mut args.seed, cfg, "seed");
            let circuits = need(args.circuits, "circuits")?;
            let seed = need(args.seed, "seed")?;
            let mut inputs = Vec::new();
            let sampler = args.ensemble.build(&mut inputs)?;
            let report = ds::far_from_uniform_report(sampler.as_ref(), circuits, RngStream::new(seed))?;
            if let Some(csv_path) = &args.csv {
                let mut text = String::from("circuit_seed,tv,berger,knorm_2,knorm_3\n");
                for row in &report.rows {
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        row.circuit_index, row.tv, row.berger_bound, row.knorm_2, row.knorm_3
                    ));
                }
                std::fs::write(csv_path, text)?;
            }
            let emitter = Emitter::new("stats farfrom", args.ensemble.snapshot(), Some(seed));
            let extra: Vec<&Path> = args.csv.iter().map(|p| p.as_path()).collect();
            emitter.emit(&with_seed(&report, seed), args.out.as_deref(), &extra)?;
        }
        StatsCmd::Knorm(mut args) => {
            args.ensemble.merge_config(cfg);
            merge_u64(&mut args.circuits, cfg, "circuits");
            merge_u64(&mut args.seed, cfg, "seed");
            let k = need(args.k, "k")?;
            let a = need(args.a, "a")?;
            let circuits = need(args.circuits, "circuits")?;
            let seed = need(args.seed, "seed")?;
            let mut inputs = Vec::new();
            let sampler = args.ensemble.build(&mut inputs)?;
            let report = ds::knorm_concentration_probe(sampler.as_ref(), k, a, args.epsilon, circuits, RngStream::new(seed))?;
            let emitter = Emitter::new("stats knorm", args.ensemble.snapshot(), Some(seed));
            emitter.emit(&with_seed(&report, seed), args.out.as_deref(), &[])?;
        }
    }
    Ok(())
}

fn run_protocol(cmd: ProtocolCmd, cfg: &Value) -> CliResult<()> {
    match cmd {
        ProtocolCmd::Timereversal(mut args) => {
            merge_usize(&mut args.side, cfg, "side");
            merge_usize(&mut args.depth, cfg, "depth");
            merge_u64(&mut args.runs, cfg, "runs");
            merge_u64(&mut args.seed, cfg, "seed");
            if args.theta.is_none() {
                args.theta = cfg["theta"].as_f64();
            }
            let side = need(args.side, "side")?;
            let depth = need(args.depth, "depth")?;
            let theta = need(args.theta, "theta")?;
            let runs = need(args.runs, "runs")?;
            let seed = need(args.seed, "seed")?;
            let config = brickwork::protocols::TimeReversalConfig::square(side, depth, theta, runs)?;
            let report = brickwork::protocols::time_reversal_experiment(
                &config,
                !args.no_long_range,
                RngStream::new(seed),
            )?;
            let emitter = Emitter::new(
                "protocol timereversal",
                json!({"side": side, "depth": depth, "theta": theta, "runs": runs}),
                Some(seed),
            );
            emitter.emit(
                &json!({
                    "config": to_value(&config),
                    "frequency": report.faraway_one_frequency,
                    "threshold": report.threshold,
                    "n_runs": report.n_runs,
                    "with_long_range": report.with_long_range,
                    "seed": seed,
                }),
                args.out.as_deref(),
                &[],
            )?;
        }
        ProtocolCmd::Purity(mut args) => {
            args.ensemble.merge_config(cfg);
            merge_u64(&mut args.pairs, cfg, "pairs");
            merge_u64(&mut args.seed, cfg, "seed");
            let pairs = need(args.pairs, "pairs")?;
            let seed = need(args.seed, "seed")?;
            let mut inputs = Vec::new();
            let report = match args.source.as_str() {
                "pure" => {
                    let sampler = args.ensemble.build(&mut inputs)?;
                    brickwork::protocols::purity_distinguisher(
                        &brickwork::protocols::PuritySource::PureEnsemble(sampler.as_ref()),
                        pairs,
                        RngStream::new(seed),
                    )?
                }
                "mixed" => {
                    let n = need(args.ensemble.n, "n")?;
                    brickwork::protocols::purity_distinguisher(
                        &brickwork::protocols::PuritySource::MaximallyMixed { n },
                        pairs,
                        RngStream::new(seed),
                    )?
                }
                other => return Err(usage_err(format!("unknown --source {other}"))),
            };
            let emitter = Emitter::new("protocol purity", args.ensemble.snapshot(), Some(seed));
            emitter.emit(&with_seed(&report, seed), args.out.as_deref(), &[])?;
        }
    }
    Ok(())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Attach the seed to a JSON report object.
fn with_seed<T: serde::Serialize>(v: &T, seed: u64) -> Value {
    let mut value = to_value(v);
    if let Value::Object(map) = &mut value {
        map.insert("seed".into(), json!(seed));
    }
    value
}

/// Deterministic parallel Monte Carlo: fixed batch boundaries, one substream
/// range per batch, merged in batch order regardless of thread schedule.
fn parallel_scalar<F>(total: u64, f: F) -> CliResult<vf::ScalarAccumulator>
where
    F: Fn(u64, u64) -> brickwork::Result<vf::ScalarAccumulator> + Sync,
{
    use rayon::prelude::*;
    let batches = 64u64.min(total.max(1));
    let results: Vec<brickwork::Result<vf::ScalarAccumulator>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = total / batches + u64::from(b < total % batches);
            let start = (total / batches) * b + b.min(total % batches);
            f(start, count)
        })
        .collect();
    let mut acc = vf::ScalarAccumulator::default();
    for r in results {
        acc.merge(&r?);
    }
    Ok(acc)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        let mut stderr = std::io::stderr();
        let _ = writeln!(stderr, "error: {}", e.message);
        std::process::exit(e.code);
    }
}
