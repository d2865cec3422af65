use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wirecut::clifford::{
    synthesize_with, verify_diagonalizes, verify_diagonalizes_symplectic, SynthOptions,
};
use wirecut::cost::{self, TimeModelParams};
use wirecut::decomp::{self, build, Decomposition, DecompositionJson, Method};
use wirecut::estimator::{self, CircuitJson, CutSpec, EstimateReport, LayeredCircuit, PostProcess};
use wirecut::families::generate_partition;
use wirecut::{Execution, WirecutError};

/// Largest n for which synthesized circuits are checked densely.
const DENSE_VERIFY_MAX: usize = 6;
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "wirecut",
    version,
    about = "Quasiprobability wire cutting toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the commuting-family partition for n qubits as JSON.
    Families {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize and verify the diagonalizing circuits for n qubits.
    Synth {
        #[arg(long)]
        n: usize,
        /// Directory receiving U<i>.txt files and stats.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// One CZ per layer instead of the edge-coloured schedule.
        #[arg(long)]
        no_depth_opt: bool,
    },
    /// Build a decomposition and check it against the identity channel.
    Verify {
        #[arg(long)]
        method: Method,
        #[arg(long)]
        n: usize,
        /// Also write the decomposition as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Monte-Carlo estimate of a cut circuit.
    Estimate(EstimateArgs),
    /// Exact expectation value of a circuit by state-vector simulation.
    Exact {
        #[command(flatten)]
        input: CircuitInput,
    },
    /// Cost-model tables.
    Bench {
        #[command(subcommand)]
        which: Bench,
    },
}

#[derive(Args)]
struct CircuitInput {
    /// Circuit JSON file.
    #[arg(long, required_unless_present = "demo")]
    circuit: Option<PathBuf>,
    /// Use the built-in 3-qubit demo circuit and cut.
    #[arg(long, conflicts_with = "circuit")]
    demo: bool,
    /// Override the circuit's post-processing: parity or bit:k.
    #[arg(long)]
    f: Option<String>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: CircuitInput,
    /// Cut-location JSON file; required unless --demo.
    #[arg(long)]
    cuts: Option<PathBuf>,
    #[arg(long, default_value = "optimal1q")]
    method: Method,
    /// Decomposition JSON used at every cut instead of --method.
    #[arg(long)]
    decomposition: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Bench {
    /// Maximum S†, CZ and total gate counts per n.
    Gatecount {
        #[arg(long)]
        nmax: usize,
        /// Enable the CZ depth optimization.
        #[arg(long)]
        optimize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Predicted execution time T = T_C + T_Q.
    Timemodel {
        #[arg(long)]
        m: u64,
        #[arg(long = "N")]
        shots: u64,
        #[arg(long, default_value_t = 1.0)]
        tc: f64,
        #[arg(long, default_value_t = 0.01)]
        tq: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Closed-form sampling overhead and channel count per method.
    Overhead {
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn load_circuit(input: &CircuitInput) -> anyhow::Result<(LayeredCircuit, PostProcess)> {
    let (circuit, mut f) = match &input.circuit {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            CircuitJson::parse(&text)?
        }
        None => (LayeredCircuit::demo(), PostProcess::Parity),
    };
    if let Some(name) = &input.f {
        f = name.parse()?;
        f.validate(circuit.width)?;
    }
    Ok((circuit, f))
}

fn cmd_families(n: usize, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let partition = generate_partition(n)?;
    if let Err(e) = partition.validate() {
        eprintln!("partition failed validation: {e}");
        return Ok(ExitCode::from(1));
    }
    emit(out, &to_json(&partition)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(n: usize, out: Option<&Path>, optimize_depth: bool) -> anyhow::Result<ExitCode> {
    let partition = generate_partition(n)?;
    let mut csv = String::from("index,n_h,n_s,n_cz,depth,verified\n");
    let mut ok = true;
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    for (i, family) in partition.families[..1 << n].iter().enumerate() {
        let u = synthesize_with(family, SynthOptions { optimize_depth })?;
        let verified = if n <= DENSE_VERIFY_MAX {
            verify_diagonalizes(&u, family)
        } else {
            verify_diagonalizes_symplectic(&u, family)
        };
        let s = u.stats();
        let depth_ok = !optimize_depth || s.depth <= n + 2;
        if !verified || !depth_ok {
            eprintln!("U{}: verified = {verified}, depth = {}", i + 1, s.depth);
            ok = false;
        }
        csv += &format!(
            "{},{},{},{},{},{}\n",
            i + 1,
            s.n_h,
            s.n_s,
            s.n_cz,
            s.depth,
            verified
        );
        if let Some(dir) = out {
            fs::write(dir.join(format!("U{}.txt", i + 1)), u.to_text())?;
        }
    }
    match out {
        Some(dir) => fs::write(dir.join("stats.csv"), &csv)?,
        None => emit(None, &csv)?,
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[derive(Serialize)]
struct VerifyOutput {
    method: &'static str,
    n: usize,
    gamma: f64,
    gamma_exact: String,
    m: usize,
    residual: f64,
    imag_residue: f64,
    gamma_matches: bool,
    m_matches: bool,
    passed: bool,
}

fn cmd_verify(
    method: Method,
    n: usize,
    out: Option<&Path>,
    format: Format,
) -> anyhow::Result<ExitCode> {
    let d = build(method, n)?;
    let report = decomp::verify_report(&d, Execution::default())?;
    let gamma_matches = d.gamma() == method.gamma(n);
    let m_matches = method.channel_count(n) == Some(d.m() as u64);
    let passed = report.residual < RESIDUAL_TOL && gamma_matches && m_matches;
    let v = VerifyOutput {
        method: method.label(),
        n,
        gamma: d.gamma_f64(),
        gamma_exact: d.gamma().to_string(),
        m: d.m(),
        residual: report.residual,
        imag_residue: report.imag_residue,
        gamma_matches,
        m_matches,
        passed,
    };
    let text = match format {
        Format::Json => to_json(&v)?,
        Format::Csv => format!(
            "method,n,gamma,m,residual,passed\n{},{},{},{},{:e},{}\n",
            v.method, v.n, v.gamma_exact, v.m, v.residual, v.passed
        ),
    };
    emit(None, &text)?;
    if let Some(p) = out {
        emit(Some(p), &to_json(&d.to_json())?)?;
    }
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[derive(Serialize)]
struct EstimateOutput {
    method: String,
    #[serde(flatten)]
    report: EstimateReport,
}

fn cmd_estimate(args: &EstimateArgs) -> anyhow::Result<ExitCode> {
    let (circuit, f) = load_circuit(&args.input)?;
    let cuts: CutSpec = match (&args.cuts, args.input.demo) {
        (Some(p), _) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).map_err(WirecutError::from)?
        }
        (None, true) => estimator::demo_cuts(),
        (None, false) => bail!(WirecutError::InvalidInput(
            "--cuts is required unless --demo is given".into()
        )),
    };
    let (label, decomps): (String, Vec<Decomposition>) = match &args.decomposition {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let doc: DecompositionJson = serde_json::from_str(&text).map_err(WirecutError::from)?;
            let d = Decomposition::from_json(&doc)?;
            (d.label.clone(), vec![d])
        }
        None => {
            let ds = cuts
                .locations
                .iter()
                .map(|loc| build(args.method, loc.wires.len()))
                .collect::<wirecut::Result<Vec<_>>>()?;
            (args.method.label().to_string(), ds)
        }
    };
    let report = estimator::run_monte_carlo(&circuit, &cuts, &decomps, &f, args.shots, args.seed)?;
    emit(
        args.out.as_deref(),
        &to_json(&EstimateOutput {
            method: label,
            report,
        })?,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_exact(input: &CircuitInput) -> anyhow::Result<ExitCode> {
    let (circuit, f) = load_circuit(input)?;
    let v = estimator::exact_expectation(&circuit, &f)?;
    println!("{v:.12}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(which: &Bench) -> anyhow::Result<ExitCode> {
    match which {
        Bench::Gatecount {
            nmax,
            optimize,
            out,
            format,
        } => {
            let rows = cost::gate_count_bench(*nmax, *optimize, Execution::default())?;
            let text = match format {
                Format::Csv => cost::gate_count_csv(&rows),
                Format::Json => to_json(&rows)?,
            };
            emit(out.as_deref(), &text)?;
            Ok(if rows.iter().all(cost::GateCountRow::within_bounds) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Bench::Timemodel {
            m,
            shots,
            tc,
            tq,
            out,
            format,
        } => {
            let p = TimeModelParams {
                m: *m,
                shots: *shots,
                t_c: *tc,
                t_q: *tq,
            };
            let t = cost::predict_time(&p)?;
            let text = match format {
                Format::Csv => format!(
                    "m,N,t_c,t_q,T\n{},{},{},{},{}\n",
                    p.m, p.shots, p.t_c, p.t_q, t
                ),
                Format::Json => to_json(&serde_json::json!({ "params": p, "T": t }))?,
            };
            emit(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Bench::Overhead { nmax, out } => {
            emit(
                out.as_deref(),
                &cost::overhead_csv(&cost::overhead_table(*nmax)?),
            )?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("WIRECUT_THREADS") {
        let k: usize = v.parse().ok().filter(|&k| k > 0).ok_or_else(|| {
            WirecutError::InvalidInput(format!(
                "WIRECUT_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::Families { n, out } => cmd_families(n, out.as_deref()),
        Command::Synth {
            n,
            out,
            no_depth_opt,
        } => cmd_synth(n, out.as_deref(), !no_depth_opt),
        Command::Verify {
            method,
            n,
            out,
            format,
        } => cmd_verify(method, n, out.as_deref(), format),
        Command::Estimate(args) => cmd_estimate(&args),
        Command::Exact { input } => cmd_exact(&input),
        Command::Bench { which } => cmd_bench(&which),
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<WirecutError>() {
        Some(
            WirecutError::SynthesisFailure(_)
            | WirecutError::DesignViolation { .. }
            | WirecutError::NumericFailure(_),
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
