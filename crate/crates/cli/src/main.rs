//! `marginalscope` — command-line front end over the library: spectra,
//! polytope membership, SLOCC classification, orbit dimensions, the
//! gradient flow, fiber sampling, and local-unitary equivalence checks.
//!
//! JSON goes to standard output; errors are JSON objects on standard
//! error. Exit status: 0 success, 1 domain error, 2 malformed input.

use clap::{Parser, Subcommand};
use marginalscope::fibers::{
    boundary_shell_histogram, fiber_dimension, lu_invariants, lu_overlap_max, sample_fiber,
    FiberSample,
};
use marginalscope::orbits::{orbit_report, w_sphericality_certificate};
use marginalscope::polytope::{face_classify, higuchi_check, three_qubit_vertices};
use marginalscope::qstate::{haar_random_state, LocalSpectra, PureState};
use marginalscope::slocc::{
    classify, default_det_tol, default_rank_tol, hyperdeterminant, kirwan_flow, local_ranks,
    SloccClass,
};
use marginalscope::Error;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "marginalscope", version, about = "Local-spectra geometry of N-qubit pure states")]
struct Cli {
    /// Print a human-readable summary on standard error.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Local spectra λ of a state.
    Spectra {
        /// Preset (ghz, w, b1, b2, b3, sep, w4, w5, random) or path to a state file.
        #[arg(long)]
        state: String,
        /// Seed (required for the `random` preset).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// SLOCC class of a three-qubit state.
    Classify {
        #[arg(long)]
        state: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Polytope membership and active faces of a λ-vector.
    PolytopeCheck {
        /// λ values, comma separated.
        #[arg(long, conflicts_with_all = ["min_eigenvalues", "state"])]
        lambdas: Option<String>,
        /// Minimal marginal eigenvalues p (the other λ-convention),
        /// comma separated.
        #[arg(long = "min-eigenvalues", conflicts_with = "state")]
        min_eigenvalues: Option<String>,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Vertices of the three-qubit Kirwan polytope.
    Vertices {
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Sample states whose spectra match a target λ-vector.
    FiberSample {
        /// Target λ values, comma separated.
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// JSON-lines output path for accepted samples; the (I4, I5)
        /// cloud goes next to it with extension .csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Dimension estimate of a sampled fiber's invariant cloud.
    FiberDim {
        /// JSON-lines file written by fiber-sample.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Best local-unitary overlap of two states and an equivalence verdict.
    LuCheck {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
    /// Orbit dimensions and sphericality data of a state.
    OrbitDims {
        #[arg(long)]
        state: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sphericality certificate for the L-qubit W class.
    Spherical {
        /// Number of qubits L.
        #[arg(long = "w")]
        num_qubits: usize,
    },
    /// Gradient flow on the momentum-map norm square, one iterate per line.
    Flow {
        #[arg(long)]
        state: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long = "max-iter", default_value_t = 20000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Histogram of Haar samples by distance to the polytope boundary.
    HaarDensity {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "json")]
        format: String,
    },
}

struct CliError {
    code: u8,
    kind: String,
    message: String,
}

impl CliError {
    fn malformed(message: impl Into<String>) -> Self {
        CliError { code: 2, kind: "malformed_input".into(), message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::MalformedStateFile(_) => 2,
            _ => 1,
        };
        CliError { code, kind: "domain_error".into(), message: err.to_string() }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MARGINALSCOPE_THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let obj = json!({"error": {"kind": e.kind, "message": e.message}});
            eprintln!("{obj}");
            ExitCode::from(e.code)
        }
    }
}

fn resolve_state(spec: &str, seed: Option<u64>) -> Result<PureState<f64>, CliError> {
    let state = match spec {
        "ghz" => SloccClass::Ghz.representative(),
        "w" => SloccClass::W.representative(),
        "b1" => SloccClass::B1.representative(),
        "b2" => SloccClass::B2.representative(),
        "b3" => SloccClass::B3.representative(),
        "sep" => PureState::basis_state(3, 0),
        "w4" => PureState::w_state(4),
        "w5" => PureState::w_state(5),
        "random" => {
            let seed =
                seed.ok_or_else(|| CliError::malformed("--seed is required with --state random"))?;
            haar_random_state(3, seed)
        }
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::malformed(format!("cannot read state file {path}: {e}"))
            })?;
            PureState::from_json(&text)?
        }
    };
    Ok(state)
}

fn parse_lambdas(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::malformed(format!("cannot parse λ value {t:?}")))
        })
        .collect()
}

fn emit(value: &serde_json::Value) {
    println!("{value}");
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Spectra { state, seed } => {
            let x = resolve_state(state, *seed)?;
            let psi = x.psi();
            emit(&json!({"lambdas": psi.lambdas, "min_eigenvalues": psi.min_eigenvalues()}));
            if cli.verbose {
                eprintln!("spectra of {} qubits: {:?}", x.num_qubits(), psi.lambdas);
            }
        }
        Command::Classify { state, seed } => {
            let x = resolve_state(state, *seed)?;
            let label = classify(&x, default_det_tol(), default_rank_tol())?;
            let det = hyperdeterminant(&x)?;
            let ranks = local_ranks(&x, default_rank_tol())?;
            emit(&json!({"class": label.label(), "abs_det": det.norm(), "local_ranks": ranks}));
        }
        Command::PolytopeCheck { lambdas, min_eigenvalues, state, seed, tol } => {
            let spectra = if let Some(text) = lambdas {
                LocalSpectra::new(parse_lambdas(text)?)
            } else if let Some(text) = min_eigenvalues {
                LocalSpectra::from_min_eigenvalues(&parse_lambdas(text)?)
            } else if let Some(spec) = state {
                resolve_state(spec, *seed)?.psi()
            } else {
                return Err(CliError::malformed(
                    "one of --lambdas, --min-eigenvalues, --state is required",
                ));
            };
            let report = higuchi_check(&spectra, *tol)?;
            let mut value = serde_json::to_value(&report).expect("serializable");
            if report.inside {
                let faces = face_classify(&spectra, *tol)?;
                value["faces"] = serde_json::to_value(&faces).expect("serializable");
            }
            emit(&value);
        }
        Command::Vertices { format } => {
            let vertices = three_qubit_vertices::<f64>();
            match format.as_str() {
                "json" => {
                    let map: serde_json::Map<String, serde_json::Value> = vertices
                        .iter()
                        .map(|(name, v)| (name.to_string(), json!(v)))
                        .collect();
                    emit(&serde_json::Value::Object(map));
                }
                "csv" => {
                    println!("name,lambda1,lambda2,lambda3");
                    for (name, v) in &vertices {
                        println!("{name},{},{},{}", v[0], v[1], v[2]);
                    }
                }
                other => {
                    return Err(CliError::malformed(format!("unknown format {other:?}")));
                }
            }
        }
        Command::FiberSample { target, count, seed, tol, out } => {
            let lambdas = parse_lambdas(target)?;
            if lambdas.len() != 3 {
                return Err(CliError::malformed("--target takes exactly three λ values"));
            }
            let spectra = LocalSpectra::new(lambdas);
            let batch = sample_fiber(&spectra, *count, *seed, *tol)?;
            let mut jsonl = String::new();
            let mut csv = String::from("i4,i5\n");
            for sample in &batch.samples {
                let inv = lu_invariants(&sample.state)?;
                let line = json!({
                    "state": sample.state.to_json(),
                    "residual": sample.residual,
                    "restart": sample.restart,
                    "invariants": serde_json::to_value(&inv).expect("serializable"),
                });
                jsonl.push_str(&line.to_string());
                jsonl.push('\n');
                csv.push_str(&format!("{},{}\n", inv.i4, inv.i5));
            }
            let csv_path = out.with_extension("csv");
            write_file(out, &jsonl)?;
            write_file(&csv_path, &csv)?;
            emit(&json!({
                "accepted": batch.samples.len(),
                "attempts": batch.attempts,
                "acceptance_rate": batch.acceptance_rate,
                "complete": batch.complete,
                "out": out.display().to_string(),
                "cloud_csv": csv_path.display().to_string(),
            }));
            if cli.verbose {
                eprintln!(
                    "accepted {} of {} restarts into {}",
                    batch.samples.len(),
                    batch.attempts,
                    out.display()
                );
            }
        }
        Command::FiberDim { input, format } => {
            let text = std::fs::read_to_string(input).map_err(|e| {
                CliError::malformed(format!("cannot read {}: {e}", input.display()))
            })?;
            let mut samples: Vec<FiberSample<f64>> = Vec::new();
            for (k, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let value: serde_json::Value = serde_json::from_str(line).map_err(|e| {
                    CliError::malformed(format!("line {}: {e}", k + 1))
                })?;
                let state = PureState::from_json(&value["state"].to_string())?;
                let residual = value["residual"].as_f64().unwrap_or(f64::NAN);
                let restart = value["restart"].as_u64().unwrap_or(0);
                samples.push(FiberSample { state, residual, restart });
            }
            let target = samples
                .first()
                .map(|s| s.state.psi())
                .ok_or_else(|| CliError::malformed("no samples in input"))?;
            let report = fiber_dimension(&target, &samples)?;
            match format.as_str() {
                "json" => emit(&serde_json::to_value(&report).expect("serializable")),
                "csv" => {
                    println!("i4,i5");
                    for (a, b) in &report.coordinates {
                        println!("{a},{b}");
                    }
                }
                other => return Err(CliError::malformed(format!("unknown format {other:?}"))),
            }
        }
        Command::LuCheck { a, b, seed, restarts, iters } => {
            let xa = resolve_state(a, Some(*seed))?;
            let xb = resolve_state(b, Some(seed.wrapping_add(1)))?;
            if xa.num_qubits() != xb.num_qubits() {
                return Err(CliError::malformed("states must have equal qubit counts"));
            }
            let best = lu_overlap_max(&xa, &xb, *restarts, *iters, *seed);
            let threshold = 1.0 - 1e-6;
            emit(&json!({
                "best_overlap_sq": best,
                "threshold": threshold,
                "equivalent": best >= threshold,
            }));
        }
        Command::OrbitDims { state, seed } => {
            let x = resolve_state(state, *seed)?;
            let report = orbit_report(&x);
            emit(&serde_json::to_value(&report).expect("serializable"));
        }
        Command::Spherical { num_qubits } => {
            if *num_qubits < 3 {
                return Err(CliError::malformed("--w must be at least 3"));
            }
            let report = w_sphericality_certificate::<f64>(*num_qubits);
            let mut value = serde_json::to_value(&report).expect("serializable");
            value["num_qubits"] = json!(num_qubits);
            emit(&value);
        }
        Command::Flow { state, seed, step, max_iter, tol } => {
            let x = resolve_state(state, *seed)?;
            let trace = kirwan_flow(&x, *step, *max_iter, *tol)?;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for it in &trace.iterates {
                let line = serde_json::to_string(it).expect("serializable");
                writeln!(lock, "{line}").map_err(|e| CliError::malformed(e.to_string()))?;
            }
            let tail = json!({"converged": trace.converged, "limit_spectra": trace.limit_spectra});
            writeln!(lock, "{tail}").map_err(|e| CliError::malformed(e.to_string()))?;
        }
        Command::HaarDensity { samples, bins, seed, format } => {
            if *samples < 10_000 {
                return Err(CliError::malformed("--samples must be at least 10000"));
            }
            let hist = boundary_shell_histogram::<f64>(*samples, *bins, *seed);
            match format.as_str() {
                "json" => emit(&serde_json::to_value(&hist).expect("serializable")),
                "csv" => {
                    println!("bin,count,density");
                    for (k, (c, d)) in hist.counts.iter().zip(&hist.densities).enumerate() {
                        println!("{k},{c},{d}");
                    }
                }
                other => return Err(CliError::malformed(format!("unknown format {other:?}"))),
            }
        }
    }
    Ok(())
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::malformed(format!("cannot write {}: {e}", path.display())))
}
