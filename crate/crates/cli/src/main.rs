//! `tori`: command-line front end.
//!
//! Every subcommand reads one input file (`-` for stdin) and emits either a
//! short text rendering or a JSON report. Exit status: 0 on success, 1 on a
//! domain error (or a failed vanishing check), 2 on malformed input.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use tori::gammageo::{chi_prime_detailed, formula_from_json, normalize, parse_formula};
use tori::glnz::{in_fundamental_domain, reduce_with, ActionConvention};
use tori::lattice::{
    format_polynomial, hilbert_polynomial, is_polarization, polarization_rank, rigidification_dimension, smith_of,
    symmetry_check, theta_coset_reps, HilbertVariant, IntVec, LatticeMatrix, PolarizationType, TropMatrix,
};
use tori::linalg::{is_positive_definite, is_symmetric};
use tori::rational::{format_rational, serde_rational, Rational};
use tori::volume::{motivic_volume_direct, motivic_volume_fubini, validate_family, verify_vanishing, TorusFamily};
use tori::{Error, Integer};

#[derive(Parser, Debug)]
#[command(name = "tori", version, about = "Exact tropical computations for polarized analytic tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Use the transposed monomial action `Ē ↦ Ω^T Ē` when reporting Ω.
    #[arg(long, global = true)]
    transpose_action: bool,
    /// Leading coefficient convention for the Hilbert polynomial.
    #[arg(long, global = true, value_enum, default_value_t = Variant::Paper)]
    hilbert_variant: Variant,
    /// Add wall-clock timing to the report (makes output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// χ' of a formula file.
    Chi { input: String },
    /// Rank |det Λ| of a polarization type.
    Rank { input: String },
    /// Smith normal form U·Λ·V = D.
    Smith { input: String },
    /// Reduce a polarized lattice into the fundamental domain.
    Reduce { input: String },
    /// Symmetry and positivity of ΛĒ.
    CheckPolarization { input: String },
    /// Coset representatives of M'/(m·λ(M)).
    ThetaReps {
        input: String,
        #[arg(long, default_value_t = 1)]
        m: u64,
    },
    /// Direct and fibrewise motivic volume of a family.
    Volume { input: String },
    /// Validate a family and check that its volume vanishes both ways.
    Verify { input: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Chi { .. } => "chi",
            Command::Rank { .. } => "rank",
            Command::Smith { .. } => "smith",
            Command::Reduce { .. } => "reduce",
            Command::CheckPolarization { .. } => "check-polarization",
            Command::ThetaReps { .. } => "theta-reps",
            Command::Volume { .. } => "volume",
            Command::Verify { .. } => "verify",
        }
    }

    fn input(&self) -> &str {
        match self {
            Command::Chi { input }
            | Command::Rank { input }
            | Command::Smith { input }
            | Command::Reduce { input }
            | Command::CheckPolarization { input }
            | Command::ThetaReps { input, .. }
            | Command::Volume { input }
            | Command::Verify { input } => input,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Variant {
    Paper,
    Rigidified,
}

impl Variant {
    fn core(self) -> HilbertVariant {
        match self {
            Variant::Paper => HilbertVariant::Paper,
            Variant::Rigidified => HilbertVariant::Rigidified,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Variant::Paper => "paper",
            Variant::Rigidified => "rigidified",
        }
    }
}

#[derive(Serialize)]
struct Echo {
    name: &'static str,
    input: String,
    options: BTreeMap<&'static str, Value>,
}

#[derive(Serialize)]
struct ErrorEntry {
    name: String,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<usize>,
}

impl ErrorEntry {
    fn from_error(e: &Error) -> Self {
        let (line, column) = match e {
            Error::MalformedInput { line, column, .. } => (Some(*line), Some(*column)),
            _ => (None, None),
        };
        ErrorEntry {
            name: e.name().into(),
            message: e.to_string(),
            stage: None,
            line,
            column,
        }
    }
}

#[derive(Serialize)]
struct Report {
    command: Echo,
    inputs_digest: String,
    results: Value,
    errors: Vec<ErrorEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<Value>,
}

/// What a subcommand produced: JSON results, their text rendering, and any
/// errors that did not prevent producing results.
struct Output {
    results: Value,
    text: String,
    errors: Vec<ErrorEntry>,
    failed: bool,
}

impl Output {
    fn ok(results: Value, text: String) -> Self {
        Output {
            results,
            text,
            errors: Vec::new(),
            failed: false,
        }
    }
}

enum Failure {
    Domain(Error),
    Malformed(ErrorEntry),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::MalformedInput { .. } => Failure::Malformed(ErrorEntry::from_error(&e)),
            e => Failure::Domain(e),
        }
    }
}

fn json_error(e: &serde_json::Error) -> Failure {
    let msg = e.to_string();
    // serde_json appends " at line L column C"; keep only the description
    let message = msg.split(" at line ").next().unwrap_or(&msg).to_string();
    Error::malformed(e.line(), e.column(), message).into()
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| json_error(&e))
}

#[derive(Deserialize)]
struct Q(#[serde(with = "serde_rational")] Rational);

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolarizedInput {
    lattice: Option<LatticeMatrix>,
    trop: Option<Vec<Vec<Q>>>,
    pol: Option<PolarizationType>,
}

impl PolarizedInput {
    fn parse(text: &str) -> Result<(LatticeMatrix, PolarizationType), Failure> {
        let p: PolarizedInput = parse_json(text)?;
        let lattice = match (p.lattice, p.trop) {
            (Some(l), None) => l,
            (None, Some(t)) => {
                let rows = t.into_iter().map(|r| r.into_iter().map(|q| q.0).collect()).collect();
                LatticeMatrix::from_trop(&TropMatrix::new(rows)?)
            }
            _ => {
                return Err(Error::malformed(0, 0, "give exactly one of \"lattice\" and \"trop\"").into());
            }
        };
        let pol = p.pol.unwrap_or_else(|| PolarizationType::identity(lattice.g()));
        if pol.g() != lattice.g() {
            return Err(Error::DimensionMismatch {
                expected: lattice.g(),
                found: pol.g(),
            }
            .into());
        }
        Ok((lattice, pol))
    }
}

fn q_matrix(m: &[Vec<Rational>]) -> Value {
    Value::from(m.iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn z_matrix(m: &[Vec<Integer>]) -> Value {
    serde_json::to_value(m.iter().map(|r| IntVec(r.clone())).collect::<Vec<_>>()).expect("serializable")
}

fn z_value(z: &Integer) -> Value {
    serde_json::to_value(IntVec(vec![z.clone()])).expect("serializable")[0].take()
}

fn render_rows<T: ToString>(m: &[Vec<T>]) -> String {
    m.iter()
        .map(|r| format!("[{}]", r.iter().map(T::to_string).collect::<Vec<_>>().join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn rational_text(m: &[Vec<Rational>]) -> String {
    render_rows(&m.iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn cmd_chi(text: &str) -> Result<Output, Failure> {
    let parsed = if text.trim_start().starts_with(['{', '[']) || matches!(text.trim(), "true" | "false") {
        let v: Value = parse_json(text)?;
        formula_from_json(&v, None)?
    } else {
        parse_formula(text)?
    };
    let set = normalize(&parsed.formula, parsed.dim)?;
    let ev = chi_prime_detailed(&set)?;
    let results = json!({
        "dim": parsed.dim,
        "cells": set.cells().len(),
        "normalized": set.to_string(),
        "chi_prime": z_value(&ev.value),
        "truncation": {"l_small": z_value(&ev.l_small), "l_large": z_value(&ev.l_large)},
    });
    Ok(Output::ok(results, ev.value.to_string()))
}

fn cmd_rank(text: &str, variant: Variant) -> Result<Output, Failure> {
    let pol: PolarizationType = parse_json(text)?;
    let rank = polarization_rank(&pol)?;
    let g = pol.g();
    let hilbert = hilbert_polynomial(g, &rank, variant.core());
    let hilbert_text = format_polynomial(&hilbert, "x");
    let results = json!({
        "g": g,
        "rank": z_value(&rank),
        "smith_invariants": IntVec(smith_of(&pol).diagonal()),
        "hilbert_polynomial": {"variant": variant.name(), "coeffs": IntVec(hilbert), "text": hilbert_text},
        "rigidification_dimension": z_value(&rigidification_dimension(g, &rank)),
    });
    Ok(Output::ok(results, rank.to_string()))
}

fn cmd_smith(text: &str) -> Result<Output, Failure> {
    let pol: PolarizationType = parse_json(text)?;
    let s = smith_of(&pol);
    let diag = s.diagonal();
    let results = json!({
        "u": z_matrix(&s.u),
        "v": z_matrix(&s.v),
        "d": z_matrix(&s.d),
        "invariants": IntVec(diag.clone()),
    });
    let text = format!(
        "invariants: {}\nU: {}\nV: {}\nD: {}",
        diag.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
        render_rows(&s.u),
        render_rows(&s.v),
        render_rows(&s.d)
    );
    Ok(Output::ok(results, text))
}

fn cmd_reduce(text: &str, transpose: bool) -> Result<Output, Failure> {
    let (lattice, pol) = PolarizedInput::parse(text)?;
    let conv = if transpose { ActionConvention::Transposed } else { ActionConvention::Standard };
    let r = reduce_with(&lattice, &pol, conv)?;
    let trop = r.lattice.tropicalize();
    let results = json!({
        "convention": if transpose { "transposed" } else { "standard" },
        "e_red": r.lattice,
        "trop_red": q_matrix(trop.entries()),
        "omega": r.transform,
        "pol_red": r.pol,
        "form": q_matrix(&r.form),
        "steps": r.steps,
    });
    let text = format!(
        "E_red (trop): {}\nOmega: {}\nLambda_red: {}\nform: {}\nsteps: {}",
        rational_text(trop.entries()),
        render_rows(r.transform.entries()),
        render_rows(r.pol.entries()),
        rational_text(&r.form),
        r.steps.len()
    );
    Ok(Output::ok(results, text))
}

fn cmd_check_polarization(text: &str) -> Result<Output, Failure> {
    let (lattice, pol) = PolarizedInput::parse(text)?;
    let trop = lattice.tropicalize();
    let form = pol.apply_trop(&trop);
    let det = pol.det();
    let symmetric = symmetry_check(&lattice, &pol);
    let positive = is_symmetric(&form) && is_positive_definite(&form);
    let valid = is_polarization(&lattice, &pol).unwrap_or(false);
    let reduced = if valid { Some(in_fundamental_domain(&trop, &pol)?) } else { None };
    let results = json!({
        "symmetric": symmetric,
        "det": z_value(&det),
        "positive_definite": positive,
        "is_polarization": valid,
        "form": q_matrix(&form),
        "in_fundamental_domain": reduced,
    });
    let text = format!(
        "polarization: {valid}\nsymmetric: {symmetric}\ndet: {det}\npositive definite: {positive}\nreduced: {}",
        reduced.map_or("n/a".to_string(), |b| b.to_string())
    );
    Ok(Output::ok(results, text))
}

fn cmd_theta_reps(text: &str, m: u64) -> Result<Output, Failure> {
    let pol: PolarizationType = parse_json(text)?;
    if m == 0 {
        return Err(Error::malformed(0, 0, "--m must be positive").into());
    }
    let reps = theta_coset_reps(&pol, m)?;
    let rank = polarization_rank(&pol)?;
    let results = json!({
        "m": m,
        "count": reps.len(),
        "expected": z_value(&(rank * Integer::from(m).pow(pol.g() as u32))),
        "reps": reps.iter().map(|r| IntVec(r.clone())).collect::<Vec<_>>(),
    });
    let mut lines = vec![format!("{} representatives", reps.len())];
    lines.extend(reps.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")));
    Ok(Output::ok(results, lines.join("\n")))
}

fn parse_family(text: &str) -> Result<TorusFamily, Failure> {
    let v: Value = parse_json(text)?;
    Ok(TorusFamily::from_json(&v)?)
}

fn cmd_volume(text: &str) -> Result<Output, Failure> {
    let f = parse_family(text)?;
    let validation = validate_family(&f)?;
    let mut errors = Vec::new();
    let mut stage = |name: &str, e: &Error| {
        let mut entry = ErrorEntry::from_error(e);
        entry.stage = Some(name.into());
        errors.push(entry);
    };
    let direct = motivic_volume_direct(&f).map_err(|e| stage("direct", &e)).ok();
    let fubini = motivic_volume_fubini(&f).map_err(|e| stage("fubini", &e)).ok();
    let show = |c: Option<&tori::motclass::MotClass>| c.map_or("error".to_string(), ToString::to_string);
    let text = format!(
        "direct: {}\nfubini: {}",
        show(direct.as_ref()),
        show(fubini.as_ref().map(|(c, _)| c))
    );
    let results = json!({
        "validation": validation,
        "direct": direct,
        "direct_text": direct.as_ref().map(ToString::to_string),
        "fubini": fubini.as_ref().map(|(c, _)| c),
        "fubini_text": fubini.as_ref().map(|(c, _)| c.to_string()),
        "decomposition": fubini.as_ref().map(|(_, d)| d),
    });
    let failed = !errors.is_empty();
    Ok(Output {
        results,
        text,
        errors,
        failed,
    })
}

fn cmd_verify(text: &str) -> Result<Output, Failure> {
    let f = parse_family(text)?;
    let report = verify_vanishing(&f);
    let errors = report
        .errors
        .iter()
        .map(|e| ErrorEntry {
            name: e.error.clone(),
            message: e.message.clone(),
            stage: Some(e.stage.clone()),
            line: None,
            column: None,
        })
        .collect();
    let show = |c: &Option<tori::motclass::MotClass>| c.as_ref().map_or("error".to_string(), ToString::to_string);
    let text = format!(
        "direct: {}\nfubini: {}\nagree: {}\nvanishes: {}",
        show(&report.direct),
        show(&report.fubini),
        report.agree,
        report.vanishes
    );
    let failed = !report.succeeded();
    let mut results = serde_json::to_value(&report).expect("serializable");
    if let Value::Object(map) = &mut results {
        map.remove("errors");
        map.insert("succeeded".into(), Value::Bool(report.succeeded()));
    }
    Ok(Output {
        results,
        text,
        errors,
        failed,
    })
}

fn read_input(path: &str) -> std::io::Result<Vec<u8>> {
    if path == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf)?;
        Ok(buf)
    } else {
        std::fs::read(path)
    }
}

fn execute(cli: &Cli, text: &str) -> Result<Output, Failure> {
    match &cli.command {
        Command::Chi { .. } => cmd_chi(text),
        Command::Rank { .. } => cmd_rank(text, cli.hilbert_variant),
        Command::Smith { .. } => cmd_smith(text),
        Command::Reduce { .. } => cmd_reduce(text, cli.transpose_action),
        Command::CheckPolarization { .. } => cmd_check_polarization(text),
        Command::ThetaReps { m, .. } => cmd_theta_reps(text, *m),
        Command::Volume { .. } => cmd_volume(text),
        Command::Verify { .. } => cmd_verify(text),
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|()| out.flush());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();

    let mut options = BTreeMap::new();
    options.insert("format", json!(match cli.format { Format::Json => "json", Format::Text => "text" }));
    options.insert("hilbert_variant", json!(cli.hilbert_variant.name()));
    options.insert("transpose_action", json!(cli.transpose_action));
    if let Command::ThetaReps { m, .. } = &cli.command {
        options.insert("m", json!(m));
    }
    let echo = Echo {
        name: cli.command.name(),
        input: cli.command.input().to_string(),
        options,
    };

    let (digest, outcome) = match read_input(cli.command.input()) {
        Ok(bytes) => {
            let digest = format!("sha256:{}", hex::encode(Sha256::digest(&bytes)));
            let outcome = match String::from_utf8(bytes) {
                Ok(text) => execute(&cli, &text),
                Err(e) => Err(Error::malformed(0, 0, format!("input is not UTF-8: {e}")).into()),
            };
            (digest, outcome)
        }
        Err(e) => (
            String::new(),
            Err(Failure::Malformed(ErrorEntry {
                name: "InputUnreadable".into(),
                message: format!("cannot read {}: {e}", cli.command.input()),
                stage: None,
                line: None,
                column: None,
            })),
        ),
    };

    let (results, text, errors, code) = match outcome {
        Ok(out) => {
            let code = if out.failed { 1 } else { 0 };
            (out.results, Some(out.text), out.errors, code)
        }
        Err(Failure::Domain(e)) => (Value::Null, None, vec![ErrorEntry::from_error(&e)], 1),
        Err(Failure::Malformed(entry)) => (Value::Null, None, vec![entry], 2),
    };

    match cli.format {
        Format::Json => {
            let report = Report {
                command: echo,
                inputs_digest: digest,
                results,
                errors,
                timing: cli
                    .timing
                    .then(|| json!({"elapsed_ms": start.elapsed().as_secs_f64() * 1000.0})),
            };
            emit(&serde_json::to_string_pretty(&report).expect("serializable"));
        }
        Format::Text => {
            if let Some(text) = text {
                emit(&text);
            }
            for e in &errors {
                let stage = e.stage.as_ref().map_or(String::new(), |s| format!(" ({s})"));
                eprintln!("error[{}]{stage}: {}", e.name, e.message);
            }
            if cli.timing {
                eprintln!("elapsed: {:.3} ms", start.elapsed().as_secs_f64() * 1000.0);
            }
        }
    }
    ExitCode::from(code)
}
