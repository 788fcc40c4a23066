//! Command handlers for the `qring` binary.
//!
//! Every successful command prints one JSON envelope
//! `{"command", "params", "version", "result"}` (or CSV when asked for).
//! Exit codes: 0 success, 1 verification failure, 2 usage error. Usage
//! errors print nothing on stdout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::qsim::{self, Distribution, ShotCounts};
use crate::ring::{self, DemonPolicy, RingConfig};
use crate::synth::{self, ScheduleSpec};
use crate::verify::{self, FaultSpec};

pub const FORMAT_VERSION: &str = "1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qring", version, about = "Two-state token ring: model checking, circuit synthesis and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CircuitKind {
    Ghz,
    W,
    Schedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MarginalKind {
    /// The measured x register.
    X,
    /// Every qubit including ancillas.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    RoundRobin,
    Random,
    Adversarial,
    Fixed,
}

/// `a:b` pair of indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexPair(pub usize, pub usize);

impl FromStr for IndexPair {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected <a>:<b>, got {s:?}"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid index {t:?} in {s:?}"))
        };
        Ok(IndexPair(parse(a)?, parse(b)?))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a circuit in the canonical text format.
    Synth {
        #[arg(long, value_enum)]
        kind: CircuitKind,
        #[arg(long)]
        n: usize,
        /// Rule schedule for --kind schedule, e.g. 0,1,2.
        #[arg(long, value_delimiter = ',')]
        order: Vec<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Simulate a circuit file: exact distribution, or seeded shot counts.
    Simulate {
        circuit: PathBuf,
        #[arg(long, value_enum, default_value = "x")]
        marginal: MarginalKind,
        #[arg(long, requires = "seed")]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        /// Write the distribution/counts here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare a simulated schedule against the classical oracle, or
    /// check one of the built-in reference distributions.
    Verify {
        #[arg(long, required_unless_present = "paper_figure")]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',', required_unless_present = "paper_figure")]
        order: Vec<usize>,
        /// Fault as <position>:<x-target>.
        #[arg(long)]
        fault: Option<IndexPair>,
        #[arg(long, default_value_t = verify::EXACT_TOL)]
        tol: f64,
        /// Reference distribution to check: 1 (GHZ), 2 (W), 4 (rule 0), 7 (rules 0,1,2).
        #[arg(long, conflicts_with_all = ["n", "order", "fault"])]
        paper_figure: Option<u8>,
    },
    /// Exhaustive closure and convergence checks.
    Modelcheck {
        #[arg(long)]
        n: usize,
    },
    /// Run the central demon from a start configuration.
    Trace {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        start: String,
        #[arg(long, value_enum)]
        policy: PolicyKind,
        #[arg(long)]
        steps: usize,
        /// Seed for --policy random.
        #[arg(long)]
        seed: Option<u64>,
        /// Node list for --policy fixed.
        #[arg(long, value_delimiter = ',')]
        schedule: Vec<usize>,
        /// Transient fault as <step>:<node>; repeatable.
        #[arg(long)]
        fault: Vec<IndexPair>,
    },
    /// Entropies and purity of the schedule circuit's final state.
    EntangleReport {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        order: Vec<usize>,
    },
}

/// What a command produced: text for stdout and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub exit_code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            exit_code: EXIT_OK,
        }
    }
}

/// Probability printed with 12 decimals.
#[derive(Debug, Clone, Copy)]
struct Prob(f64);

impl Serialize for Prob {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(format!("{:.12}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    params: &'a BTreeMap<String, String>,
    version: &'a str,
    result: T,
}

fn envelope<T: Serialize>(command: &str, params: &BTreeMap<String, String>, result: T) -> String {
    let env = Envelope {
        command,
        params,
        version: FORMAT_VERSION,
        result,
    };
    let mut s = serde_json::to_string(&env).expect("envelope serializes");
    s.push('\n');
    s
}

fn list(items: &[usize]) -> String {
    items.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn probs_json(d: &Distribution) -> BTreeMap<&str, Prob> {
    d.probs.iter().map(|(k, &v)| (k.as_str(), Prob(v))).collect()
}

fn distribution_csv(d: &Distribution) -> String {
    let mut out = String::from("outcome,probability\n");
    for (k, v) in &d.probs {
        writeln!(out, "{k},{v:.12}").unwrap();
    }
    out
}

fn counts_csv(c: &ShotCounts) -> String {
    let mut out = String::from("outcome,count\n");
    for (k, v) in &c.counts {
        writeln!(out, "{k},{v}").unwrap();
    }
    out
}

fn io_error(path: &std::path::Path, e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

pub fn execute(cli: Cli) -> Result<Output> {
    match cli.command {
        Command::Synth {
            kind,
            n,
            order,
            output,
        } => cmd_synth(kind, n, order, output),
        Command::Simulate {
            circuit,
            marginal,
            shots,
            seed,
            format,
            output,
        } => cmd_simulate(circuit, marginal, shots, seed, format, output),
        Command::Verify {
            n,
            order,
            fault,
            tol,
            paper_figure,
        } => match paper_figure {
            Some(fig) => cmd_verify_figure(fig, tol),
            None => cmd_verify(n.expect("required by clap"), order, fault, tol),
        },
        Command::Modelcheck { n } => cmd_modelcheck(n),
        Command::Trace {
            n,
            start,
            policy,
            steps,
            seed,
            schedule,
            fault,
        } => cmd_trace(n, &start, policy, steps, seed, schedule, fault),
        Command::EntangleReport { n, order } => cmd_entangle_report(n, order),
    }
}

fn cmd_synth(kind: CircuitKind, n: usize, order: Vec<usize>, output: PathBuf) -> Result<Output> {
    let circuit = match kind {
        CircuitKind::Ghz => synth::ghz_circuit(n)?,
        CircuitKind::W => synth::w_circuit(n)?,
        CircuitKind::Schedule => synth::schedule_circuit(&ScheduleSpec::new(n, order.clone())?)?,
    };
    if kind != CircuitKind::Schedule && !order.is_empty() {
        return Err(Error::InvalidArgument("--order only applies to --kind schedule".into()));
    }
    std::fs::write(&output, synth::emit(&circuit)).map_err(|e| io_error(&output, e))?;

    let mut params = BTreeMap::new();
    params.insert("kind".into(), format!("{kind:?}").to_lowercase());
    params.insert("n".into(), n.to_string());
    if kind == CircuitKind::Schedule {
        params.insert("order".into(), list(&order));
    }
    params.insert("output".into(), output.display().to_string());

    #[derive(Serialize)]
    struct SynthResult {
        path: String,
        qubits: usize,
        x: Vec<usize>,
        anc: Vec<usize>,
        gates: usize,
    }
    let layout = circuit.layout();
    Ok(Output::ok(envelope(
        "synth",
        &params,
        SynthResult {
            path: output.display().to_string(),
            qubits: circuit.num_qubits(),
            x: layout.x_qubits(),
            anc: layout.anc_qubits(),
            gates: circuit.gates().len(),
        },
    )))
}

fn cmd_simulate(
    path: PathBuf,
    marginal: MarginalKind,
    shots: Option<u64>,
    seed: Option<u64>,
    format: OutputFormat,
    output: Option<PathBuf>,
) -> Result<Output> {
    let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
    let circuit = synth::parse(&text)?;
    let state = qsim::run(&circuit)?;
    let keep: Vec<usize> = match marginal {
        MarginalKind::X => circuit.layout().measured(),
        MarginalKind::All => (0..circuit.num_qubits()).collect(),
    };

    let mut params = BTreeMap::new();
    params.insert("circuit".into(), path.display().to_string());
    params.insert("marginal".into(), format!("{marginal:?}").to_lowercase());
    params.insert("format".into(), format!("{format:?}").to_lowercase());
    if let Some(o) = &output {
        params.insert("output".into(), o.display().to_string());
    }

    let body = match shots {
        None => {
            let dist = state.marginal(&keep)?;
            match format {
                OutputFormat::Csv => distribution_csv(&dist),
                OutputFormat::Json => {
                    #[derive(Serialize)]
                    struct Exact<'a> {
                        kind: &'static str,
                        qubits: Vec<usize>,
                        distribution: BTreeMap<&'a str, Prob>,
                    }
                    envelope(
                        "simulate",
                        &params,
                        Exact {
                            kind: "exact",
                            qubits: keep,
                            distribution: probs_json(&dist),
                        },
                    )
                }
            }
        }
        Some(shots) => {
            let seed = seed.ok_or_else(|| Error::InvalidArgument("--shots requires --seed".into()))?;
            params.insert("shots".into(), shots.to_string());
            params.insert("seed".into(), seed.to_string());
            let counts = state.sample(&keep, shots, seed)?;
            match format {
                OutputFormat::Csv => counts_csv(&counts),
                OutputFormat::Json => {
                    #[derive(Serialize)]
                    struct Shots {
                        kind: &'static str,
                        qubits: Vec<usize>,
                        #[serde(flatten)]
                        counts: ShotCounts,
                    }
                    envelope(
                        "simulate",
                        &params,
                        Shots {
                            kind: "shots",
                            qubits: keep,
                            counts,
                        },
                    )
                }
            }
        }
    };

    match output {
        None => Ok(Output::ok(body)),
        Some(o) => {
            std::fs::write(&o, &body).map_err(|e| io_error(&o, e))?;
            #[derive(Serialize)]
            struct Written {
                path: String,
                bytes: usize,
            }
            Ok(Output::ok(envelope(
                "simulate",
                &params,
                Written {
                    path: o.display().to_string(),
                    bytes: body.len(),
                },
            )))
        }
    }
}

#[derive(Serialize)]
struct VerifyResult<'a> {
    expected_source: &'a str,
    #[serde(flatten)]
    report: verify::ComparisonReport,
}

fn verify_output(params: &BTreeMap<String, String>, source: &str, report: verify::ComparisonReport) -> Output {
    let exit_code = if report.pass { EXIT_OK } else { EXIT_VERIFY_FAILED };
    Output {
        stdout: envelope(
            "verify",
            params,
            VerifyResult {
                expected_source: source,
                report,
            },
        ),
        exit_code,
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be a finite nonnegative number, got {tol}")))
    }
}

fn cmd_verify(n: usize, order: Vec<usize>, fault: Option<IndexPair>, tol: f64) -> Result<Output> {
    check_tol(tol)?;
    if order.is_empty() {
        return Err(Error::InvalidArgument("--order must be nonempty".into()));
    }
    let spec = ScheduleSpec::new(n, order)?;
    let fault = fault.map(|IndexPair(position, target)| FaultSpec { position, target });

    let mut params = BTreeMap::new();
    params.insert("n".into(), n.to_string());
    params.insert("order".into(), list(&spec.order));
    params.insert("tol".into(), format!("{tol:e}"));
    if let Some(f) = &fault {
        params.insert("fault".into(), format!("{}:{}", f.position, f.target));
    }
    let report = verify::schedule_experiment(&spec, fault.as_ref(), tol)?;
    Ok(verify_output(&params, "oracle", report))
}

/// Built-in reference distributions, keyed by figure number.
pub fn reference_distribution(figure: u8) -> Result<Distribution> {
    let third = 1.0 / 3.0;
    let pairs: &[(&str, f64)] = match figure {
        1 => &[("000", 0.5), ("111", 0.5)],
        2 => &[("001", third), ("010", third), ("100", third)],
        4 => &[("001", 0.25), ("011", 0.25), ("100", 0.25), ("110", 0.25)],
        7 => &[("000", 0.5), ("111", 0.5)],
        other => {
            return Err(Error::InvalidArgument(format!(
                "no reproducible figure {other}; choose 1, 2, 4 or 7"
            )))
        }
    };
    Distribution::new(3, pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
}

fn cmd_verify_figure(figure: u8, tol: f64) -> Result<Output> {
    check_tol(tol)?;
    let expected = reference_distribution(figure)?;
    let circuit = match figure {
        1 => synth::ghz_circuit(3)?,
        2 => synth::w_circuit(3)?,
        4 => synth::schedule_circuit(&ScheduleSpec::new(3, vec![0])?)?,
        _ => synth::schedule_circuit(&ScheduleSpec::new(3, vec![0, 1, 2])?)?,
    };
    let actual = qsim::run(&circuit)?.marginal(&circuit.layout().measured())?;
    let report = verify::compare_distributions(&expected, &actual, tol)?;

    let mut params = BTreeMap::new();
    params.insert("paper_figure".into(), figure.to_string());
    params.insert("tol".into(), format!("{tol:e}"));
    Ok(verify_output(&params, "published", report))
}

fn cmd_modelcheck(n: usize) -> Result<Output> {
    let closure = ring::check_closure(n)?;
    let convergence = ring::check_convergence(n)?;
    let params = BTreeMap::from([("n".to_string(), n.to_string())]);

    #[derive(Serialize)]
    struct ModelcheckResult {
        closure: ring::ClosureReport,
        convergence: ring::ConvergenceReport,
    }
    Ok(Output::ok(envelope(
        "modelcheck",
        &params,
        ModelcheckResult {
            closure,
            convergence,
        },
    )))
}

fn cmd_trace(
    n: usize,
    start: &str,
    policy: PolicyKind,
    steps: usize,
    seed: Option<u64>,
    schedule: Vec<usize>,
    faults: Vec<IndexPair>,
) -> Result<Output> {
    let start_cfg: RingConfig = start.parse()?;
    if start_cfg.n() != n {
        return Err(Error::InvalidArgument(format!(
            "--start has {} bits but --n is {n}",
            start_cfg.n()
        )));
    }
    let demon = match policy {
        PolicyKind::RoundRobin => DemonPolicy::RoundRobin,
        PolicyKind::Adversarial => DemonPolicy::Adversarial,
        PolicyKind::Random => DemonPolicy::Random {
            seed: seed.ok_or_else(|| Error::InvalidArgument("--policy random requires --seed".into()))?,
        },
        PolicyKind::Fixed => DemonPolicy::Fixed {
            schedule: schedule.clone(),
        },
    };
    if policy != PolicyKind::Fixed && !schedule.is_empty() {
        return Err(Error::InvalidArgument("--schedule only applies to --policy fixed".into()));
    }
    let fault_list: Vec<(usize, usize)> = faults.iter().map(|f| (f.0, f.1)).collect();
    let trace = ring::run_demon_with_faults(start_cfg, &demon, steps, &fault_list)?;

    let mut params = BTreeMap::new();
    params.insert("n".into(), n.to_string());
    params.insert("start".into(), start.to_string());
    params.insert("policy".into(), format!("{policy:?}"));
    params.insert("steps".into(), steps.to_string());
    if let Some(s) = seed {
        params.insert("seed".into(), s.to_string());
    }
    if !schedule.is_empty() {
        params.insert("schedule".into(), list(&schedule));
    }
    if !faults.is_empty() {
        let f: Vec<String> = faults.iter().map(|f| format!("{}:{}", f.0, f.1)).collect();
        params.insert("fault".into(), f.join(","));
    }

    // One event per line inside an otherwise compact envelope.
    let head = serde_json::to_string(&Envelope {
        command: "trace",
        params: &params,
        version: FORMAT_VERSION,
        result: (),
    })
    .expect("serializes");
    let head = head.strip_suffix("null}").expect("unit result serializes as null");
    let final_cfg = trace.final_config();
    let mut out = String::from(head);
    write!(
        out,
        "{{\"start\":{},\"status\":{},\"final\":{},\"final_legitimate\":{},\"events\":[",
        serde_json::to_string(&trace.start).unwrap(),
        serde_json::to_string(&trace.status).unwrap(),
        serde_json::to_string(&final_cfg).unwrap(),
        final_cfg.is_legitimate(),
    )
    .unwrap();
    for (k, event) in trace.events.iter().enumerate() {
        out.push_str(if k == 0 { "\n" } else { ",\n" });
        out.push_str(&serde_json::to_string(event).unwrap());
    }
    out.push_str("\n]}}\n");
    Ok(Output::ok(out))
}

fn cmd_entangle_report(n: usize, order: Vec<usize>) -> Result<Output> {
    let spec = ScheduleSpec::new(n, order)?;
    let report = verify::entanglement_report(&spec)?;
    let mut params = BTreeMap::new();
    params.insert("n".into(), n.to_string());
    params.insert("order".into(), list(&spec.order));
    Ok(Output::ok(envelope("entangle-report", &params, report)))
}
