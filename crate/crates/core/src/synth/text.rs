//! Line-based circuit text format.
//!
//! ```text
//! qubits 6
//! x 0,1,2
//! anc 3,4,5
//! # schedule 0,1,2
//! h 0
//! cx 2 3
//! ry 1 1.9106332362490186
//! mcx 0:+ 1:- 2
//! measure 0,1,2
//! ```
//!
//! `#` starts a comment. The `x` and `anc` lines may be omitted when parsing,
//! in which case every qubit belongs to the x register; an `x` statement
//! directly after `qubits` is always read as the register declaration. The
//! `# schedule` directive carries the circuit's rule schedule.
//!
//! Canonical output uses single spaces, lowercase keywords, no trailing
//! whitespace and angles with 17 significant digits.

use std::fmt::Write as _;

use super::{Circuit, RegisterLayout};
use crate::error::{Error, Result};
use crate::qsim::{Control, Gate, Polarity};

const SCHEDULE_DIRECTIVE: &str = "# schedule";

fn join(items: &[usize]) -> String {
    if items.is_empty() {
        return "-".into();
    }
    items
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Positional decimal with 17 significant digits; parses back to the same f64.
fn format_angle(theta: f64) -> String {
    if theta == 0.0 {
        return format!("{:.16}", theta);
    }
    let magnitude = theta.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).clamp(0, 400) as usize;
    format!("{theta:.decimals$}")
}

pub fn emit(circuit: &Circuit) -> String {
    let layout = circuit.layout();
    let mut out = String::new();
    writeln!(out, "qubits {}", layout.num_qubits()).unwrap();
    writeln!(out, "x {}", join(&layout.x_qubits())).unwrap();
    writeln!(out, "anc {}", join(&layout.anc_qubits())).unwrap();
    if !circuit.schedule().is_empty() {
        writeln!(out, "{SCHEDULE_DIRECTIVE} {}", join(circuit.schedule())).unwrap();
    }
    for gate in circuit.gates() {
        match gate {
            Gate::H(q) => writeln!(out, "h {q}"),
            Gate::X(q) => writeln!(out, "x {q}"),
            Gate::Ry(q, theta) => writeln!(out, "ry {q} {}", format_angle(*theta)),
            Gate::Cx(c, t) => writeln!(out, "cx {c} {t}"),
            Gate::Ccx(a, b, t) => writeln!(out, "ccx {a} {b} {t}"),
            Gate::Mcx { controls, target } => {
                out.push_str("mcx");
                for c in controls {
                    let sign = match c.polarity {
                        Polarity::Positive => '+',
                        Polarity::Negative => '-',
                    };
                    write!(out, " {}:{sign}", c.qubit).unwrap();
                }
                writeln!(out, " {target}")
            }
        }
        .unwrap();
    }
    writeln!(out, "measure {}", join(&layout.measured())).unwrap();
    out
}

fn parse_index(line: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("invalid qubit index {tok:?}")))
}

fn parse_list(line: usize, tok: &str) -> Result<Vec<usize>> {
    if tok == "-" {
        return Ok(Vec::new());
    }
    tok.split(',').map(|t| parse_index(line, t)).collect()
}

fn expect_args<'a>(line: usize, kw: &str, args: &'a [&'a str], n: usize) -> Result<&'a [&'a str]> {
    if args.len() == n {
        Ok(args)
    } else {
        Err(Error::parse(
            line,
            format!("`{kw}` takes {n} operand(s), found {}", args.len()),
        ))
    }
}

fn parse_gate(line: usize, kw: &str, args: &[&str]) -> Result<Gate> {
    let idx = |k: usize| parse_index(line, args[k]);
    Ok(match kw {
        "h" => {
            expect_args(line, kw, args, 1)?;
            Gate::H(idx(0)?)
        }
        "x" => {
            expect_args(line, kw, args, 1)?;
            Gate::X(idx(0)?)
        }
        "ry" => {
            expect_args(line, kw, args, 2)?;
            let theta: f64 = args[1]
                .parse()
                .map_err(|_| Error::parse(line, format!("invalid angle {:?}", args[1])))?;
            Gate::Ry(idx(0)?, theta)
        }
        "cx" => {
            expect_args(line, kw, args, 2)?;
            Gate::Cx(idx(0)?, idx(1)?)
        }
        "ccx" => {
            expect_args(line, kw, args, 3)?;
            Gate::Ccx(idx(0)?, idx(1)?, idx(2)?)
        }
        "mcx" => {
            let Some((target, controls)) = args.split_last() else {
                return Err(Error::parse(line, "`mcx` needs a target"));
            };
            let controls = controls
                .iter()
                .map(|tok| {
                    let (q, sign) = tok
                        .split_once(':')
                        .ok_or_else(|| Error::parse(line, format!("control {tok:?} lacks :+ or :-")))?;
                    let polarity = match sign {
                        "+" => Polarity::Positive,
                        "-" => Polarity::Negative,
                        _ => return Err(Error::parse(line, format!("bad polarity in {tok:?}"))),
                    };
                    Ok(Control {
                        qubit: parse_index(line, q)?,
                        polarity,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Gate::Mcx {
                controls,
                target: parse_index(line, target)?,
            }
        }
        other => return Err(Error::parse(line, format!("unknown statement `{other}`"))),
    })
}

#[derive(PartialEq)]
enum Stage {
    Qubits,
    XDecl,
    AncDecl,
    Body,
    Done,
}

pub fn parse(text: &str) -> Result<Circuit> {
    let mut stage = Stage::Qubits;
    let mut m = 0usize;
    let mut x_decl: Option<Vec<usize>> = None;
    let mut anc_decl: Option<Vec<usize>> = None;
    let mut schedule: Vec<usize> = Vec::new();
    let mut body: Vec<(usize, Gate)> = Vec::new();
    let mut measure: Option<(usize, Vec<usize>)> = None;
    let mut last_line = 0;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix(SCHEDULE_DIRECTIVE) {
            if stage == Stage::Qubits {
                return Err(Error::parse(line, "schedule directive before `qubits`"));
            }
            schedule = parse_list(line, rest.trim())?;
            continue;
        }
        let content = trimmed.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if stage == Stage::Done {
            return Err(Error::parse(line, "statement after `measure`"));
        }
        let mut toks = content.split_whitespace();
        let kw = toks.next().expect("nonempty");
        let args: Vec<&str> = toks.collect();

        match (&stage, kw) {
            (Stage::Qubits, "qubits") => {
                expect_args(line, kw, &args, 1)?;
                m = args[0]
                    .parse()
                    .map_err(|_| Error::parse(line, format!("invalid qubit count {:?}", args[0])))?;
                if m == 0 || m > crate::qsim::MAX_QUBITS {
                    return Err(Error::parse(
                        line,
                        format!("qubit count {m} outside 1..={}", crate::qsim::MAX_QUBITS),
                    ));
                }
                stage = Stage::XDecl;
            }
            (Stage::Qubits, _) => return Err(Error::parse(line, "expected `qubits <m>`")),
            (Stage::XDecl, "x") => {
                expect_args(line, kw, &args, 1)?;
                x_decl = Some(parse_list(line, args[0])?);
                stage = Stage::AncDecl;
            }
            (Stage::XDecl | Stage::AncDecl, "anc") => {
                expect_args(line, kw, &args, 1)?;
                anc_decl = Some(parse_list(line, args[0])?);
                stage = Stage::Body;
            }
            (_, "measure") => {
                expect_args(line, kw, &args, 1)?;
                measure = Some((line, parse_list(line, args[0])?));
                stage = Stage::Done;
            }
            (_, "qubits") => return Err(Error::parse(line, "duplicate `qubits`")),
            (_, "anc") => return Err(Error::parse(line, "`anc` must follow the header")),
            _ => {
                let gate = parse_gate(line, kw, &args)?;
                gate.validate(m).map_err(|e| Error::parse(line, e.to_string()))?;
                body.push((line, gate));
                stage = Stage::Body;
            }
        }
    }

    if m == 0 {
        return Err(Error::parse(last_line.max(1), "missing `qubits` header"));
    }
    let n_x = match &x_decl {
        Some(xs) => {
            if xs.is_empty() || *xs != (0..xs.len()).collect::<Vec<_>>() {
                return Err(Error::parse(2, "x register must be 0,1,..,n_x-1"));
            }
            if xs.len() > m {
                return Err(Error::parse(2, format!("x register larger than {m} qubits")));
            }
            xs.len()
        }
        None => m,
    };
    if let Some(anc) = &anc_decl {
        if *anc != (n_x..m).collect::<Vec<_>>() {
            return Err(Error::parse(
                3,
                format!("ancilla register must be {}", join(&(n_x..m).collect::<Vec<_>>())),
            ));
        }
    }
    let layout = RegisterLayout::new(n_x, m - n_x)?;
    let Some((mline, measured)) = measure else {
        return Err(Error::parse(last_line.max(1), "missing `measure` line"));
    };
    if measured != layout.measured() {
        return Err(Error::parse(
            mline,
            format!("measure must list the x register {}", join(&layout.measured())),
        ));
    }
    if let Some(&bad) = schedule.iter().find(|&&i| i >= n_x) {
        return Err(Error::parse(
            1,
            format!("schedule node {bad} outside ring of size {n_x}"),
        ));
    }

    let mut circuit = Circuit::new(layout);
    for (line, gate) in body {
        circuit.push(gate).map_err(|e| Error::parse(line, e.to_string()))?;
    }
    circuit.set_schedule(schedule);
    Ok(circuit)
}
