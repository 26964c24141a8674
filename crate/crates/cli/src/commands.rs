//! Command-line parsing and dispatch.
//!
//! Exit codes: 0 when every verdict is PASS or UNKNOWN, 1 when any verdict
//! is FAIL, 2 for invalid input (usage, model file or parameters).

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use evoset_core::axioms::Verdict;
use evoset_core::element::ElementId;
use evoset_core::genealogy::{ancestry_check, Couple};
use evoset_core::measure::{
    construct_convergent_evolution, decay_check, stage_integral, Integrand, MeasureError,
    StageIntegrand,
};
use evoset_core::reduce::find_reducing_subsequence;

use crate::error::CliError;
use crate::format::{trace_csv, TraceRow};
use crate::model::{build, load_model, Built, ModelFile, Stages};
use crate::report::{AxiomSummary, ModelInfo, RunReport};

pub const MAX_HORIZON: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "evoset",
    version,
    about = "Check, trace and construct evolutions of sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the four stage conditions on stages 1..H-1.
    Check {
        /// Model file or built-in name.
        model: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=MAX_HORIZON))]
        horizon: u64,
    },
    /// Per-stage cardinality, measure and integral as CSV.
    Trace {
        /// Model file or built-in name.
        model: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=MAX_HORIZON))]
        horizon: u64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generations, families, placement and ancestry of a genealogy model.
    Genealogy {
        /// Model file or built-in name.
        model: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=MAX_HORIZON))]
        horizon: u64,
        /// Also list the children of MALE,FEMALE.
        #[arg(long)]
        couple: Option<String>,
    },
    /// Stage measures, decay threshold and optional stage integrals.
    Measure {
        /// Model file or built-in name.
        model: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=MAX_HORIZON))]
        horizon: u64,
        /// Report the first stage whose measure is below this.
        #[arg(long)]
        epsilon: f64,
        /// Integrand descriptor; overrides the model's integrand block.
        #[arg(long)]
        integrand: Option<String>,
        /// Declared bound on the integrand.
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Build interval stages on [0, 1) whose integrals approach the integral of phi.
    ConstructConvergent {
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long)]
        tol: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(3..=crate::model::MAX_CONVERGENT_HORIZON))]
        horizon: u64,
        /// Where to write the explicit-stages model.
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for a subsequence of stages that is itself an evolution.
    Reduce {
        /// Model file or built-in name.
        model: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=MAX_HORIZON))]
        horizon: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Trace { .. } => "trace",
            Command::Genealogy { .. } => "genealogy",
            Command::Measure { .. } => "measure",
            Command::ConstructConvergent { .. } => "construct-convergent",
            Command::Reduce { .. } => "reduce",
        }
    }
}

/// What a finished command produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub model: Option<ModelInfo>,
    pub report: Value,
    pub failed: bool,
    /// CSV text for `trace` without `--csv`.
    pub stdout_csv: Option<String>,
}

impl Outcome {
    fn new(model: &ModelFile, report: impl Serialize, failed: bool) -> Self {
        Outcome {
            model: Some(model.into()),
            report: serde_json::to_value(report).expect("reports serialize"),
            failed,
            stdout_csv: None,
        }
    }
}

/// Captured result of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (program name first), runs the command and renders its output.
pub fn run_command<I, T>(argv: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            return if code == 0 {
                Execution {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Execution {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let echo: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let name = cli.command.name();
    let started = Instant::now();
    match execute(cli.command) {
        Ok(outcome) => {
            let stdout = match outcome.stdout_csv {
                Some(csv) => csv,
                None => RunReport {
                    command: echo,
                    version: env!("CARGO_PKG_VERSION"),
                    model: outcome.model,
                    report: outcome.report,
                }
                .render(),
            };
            let stderr = format!("evoset {name}: {:.3} s\n", started.elapsed().as_secs_f64());
            Execution {
                code: if outcome.failed { 1 } else { 0 },
                stdout,
                stderr,
            }
        }
        Err(e) => Execution {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

pub fn execute(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Check { model, horizon } => check(&load_model(&model)?, horizon),
        Command::Trace {
            model,
            horizon,
            csv,
        } => {
            let model = load_model(&model)?;
            let rows = trace(&model, horizon)?;
            let text = trace_csv(&rows);
            match csv {
                Some(path) => {
                    std::fs::write(&path, &text).map_err(|e| CliError::io(&path, e))?;
                    let report = json!({"rows": rows.len(), "csv": path.display().to_string()});
                    Ok(Outcome::new(&model, report, false))
                }
                None => {
                    let mut outcome = Outcome::new(&model, Value::Null, false);
                    outcome.stdout_csv = Some(text);
                    Ok(outcome)
                }
            }
        }
        Command::Genealogy {
            model,
            horizon,
            couple,
        } => {
            let couple = couple.map(|c| parse_couple(&c)).transpose()?;
            genealogy(&load_model(&model)?, horizon, couple)
        }
        Command::Measure {
            model,
            horizon,
            epsilon,
            integrand,
            bound,
        } => {
            let phi = integrand.map(|d| d.parse::<Integrand>()).transpose()?;
            measure(&load_model(&model)?, horizon, epsilon, phi, bound)
        }
        Command::ConstructConvergent {
            phi,
            tol,
            horizon,
            out,
        } => {
            let phi: Integrand = phi.parse()?;
            let (doc, outcome) = construct_convergent(&phi, tol, horizon)?;
            if let Some(doc) = doc {
                let mut text = serde_json::to_string_pretty(&doc).expect("models serialize");
                text.push('\n');
                std::fs::write(&out, text).map_err(|e| CliError::io(&out, e))?;
            }
            Ok(outcome)
        }
        Command::Reduce { model, horizon } => reduce(&load_model(&model)?, horizon),
    }
}

fn parse_couple(text: &str) -> Result<Couple, CliError> {
    let id = |s: &str| match s.trim().parse::<i64>() {
        Ok(n) => ElementId::Num(n),
        Err(_) => ElementId::name(s.trim()),
    };
    match text.split_once(',') {
        Some((m, f)) => Ok(Couple {
            male: id(m),
            female: id(f),
        }),
        None => Err(CliError::Invalid(format!(
            "--couple expects MALE,FEMALE, got `{text}`"
        ))),
    }
}

pub fn axioms(stages: &Stages, horizon: u64) -> AxiomSummary {
    match stages {
        Stages::Discrete(evo) => AxiomSummary::new(&evo.check_axioms(horizon)),
        Stages::Real(real) => AxiomSummary::new(&real.check_axioms(horizon)),
        Stages::Scalar(scalar) => AxiomSummary::new(&scalar.check_axioms(horizon)),
        Stages::Span(span) => AxiomSummary::new(&span.check_axioms(horizon)),
    }
}

pub fn check(model: &ModelFile, horizon: u64) -> Result<Outcome, CliError> {
    let built = build(model, horizon)?;
    let summary = axioms(&built.stages, horizon);
    let failed = summary.has_failure();
    Ok(Outcome::new(model, json!({ "axioms": summary }), failed))
}

fn integrand_of(built: &Built) -> Option<(StageIntegrand, Integrand)> {
    built
        .integrand
        .as_ref()
        .map(|b| (StageIntegrand::fixed(b.phi.clone(), b.bound), b.phi.clone()))
}

/// Rows for `k = 1, ..., horizon - 1`.
pub fn trace(model: &ModelFile, horizon: u64) -> Result<Vec<TraceRow>, CliError> {
    let built = build(model, horizon)?;
    let mut rows: Vec<TraceRow> = (1..horizon)
        .map(|k| TraceRow {
            k,
            cardinality: None,
            measure: None,
            integral: None,
        })
        .collect();
    match &built.stages {
        Stages::Discrete(evo) => {
            for (row, stage) in rows.iter_mut().zip(evo.prefix(horizon)) {
                row.cardinality = Some(stage.len());
            }
            if let Some(mu) = built.discrete_measure() {
                for (row, stage) in rows.iter_mut().zip(evo.prefix(horizon)) {
                    row.measure = Some(mu.measure(&stage)?);
                }
                if let Some((phi, _)) = integrand_of(&built) {
                    let integrals = stage_integral(evo, mu, &phi, horizon)?;
                    for (row, v) in rows.iter_mut().zip(integrals.integrals) {
                        row.integral = Some(v);
                    }
                }
            }
        }
        Stages::Real(_) => {
            if let Some(lebesgue) = built.lebesgue()? {
                for (row, m) in rows.iter_mut().zip(lebesgue.mu_trace(horizon)) {
                    row.measure = Some(m);
                }
                if let Some((_, phi)) = integrand_of(&built) {
                    for (row, v) in rows.iter_mut().zip(lebesgue.integral_trace(&phi, horizon)?) {
                        row.integral = Some(v);
                    }
                }
            }
        }
        Stages::Scalar(_) | Stages::Span(_) => {}
    }
    Ok(rows)
}

pub fn genealogy(
    model: &ModelFile,
    horizon: u64,
    couple: Option<Couple>,
) -> Result<Outcome, CliError> {
    let built = build(model, horizon)?;
    let Some(run) = &built.genealogy else {
        return Err(CliError::Unsupported {
            kind: model.kind().into(),
            command: "genealogy",
        });
    };
    let ancestry = ancestry_check(&run.trace);
    let summary = axioms(&built.stages, horizon);
    let placement = run.trace.placement_verdict();
    let failed = summary.has_failure() || placement == Verdict::Fail || !ancestry.passes();
    let mut report = json!({
        "trace": run.trace,
        "placement": placement,
        "ancestry": ancestry,
        "axioms": summary,
    });
    if let Some(couple) = couple {
        let children = run.model.children_of(&couple);
        report["couple"] = json!({ "couple": couple, "children": children });
    }
    Ok(Outcome::new(model, report, failed))
}

fn first_below(measures: &[f64], epsilon: f64) -> Option<u64> {
    let run = measures.iter().rev().take_while(|m| **m < epsilon).count();
    (run > 0).then(|| (measures.len() - run) as u64 + 1)
}

pub fn measure(
    model: &ModelFile,
    horizon: u64,
    epsilon: f64,
    phi: Option<Integrand>,
    bound: Option<f64>,
) -> Result<Outcome, CliError> {
    if !(epsilon > 0.0) {
        return Err(CliError::Invalid(format!(
            "--epsilon must be positive, got {epsilon}"
        )));
    }
    let mut built = build(model, horizon)?;
    if let Some(phi) = phi {
        built.integrand = Some(crate::model::IntegrandBlock { phi, bound: None });
    }
    if let (Some(c), Some(block)) = (bound, built.integrand.as_mut()) {
        block.bound = Some(c);
    }
    if let (Stages::Discrete(evo), Some(mu)) = (&built.stages, built.discrete_measure()) {
        let decay = decay_check(evo, mu, horizon, epsilon)?;
        let integral = integrand_of(&built)
            .map(|(phi, _)| stage_integral(evo, mu, &phi, horizon))
            .transpose()?;
        let failed = decay.premise == Verdict::Fail
            || decay.decay == Verdict::Fail
            || integral
                .as_ref()
                .is_some_and(|t| t.bound_holds == Some(Verdict::Fail));
        let mut report = json!({ "decay": decay });
        if let Some(trace) = integral {
            report["integral"] = serde_json::to_value(trace).expect("traces serialize");
        }
        return Ok(Outcome::new(model, report, failed));
    }
    if let Some(lebesgue) = built.lebesgue()? {
        let measures = lebesgue.mu_trace(horizon);
        let below = first_below(&measures, epsilon);
        let mut report = json!({
            "decay": {
                "horizon": horizon,
                "epsilon": epsilon,
                "measures": measures,
                "first_below": below,
                "decay": if below.is_some() { Verdict::Pass } else { Verdict::Unknown },
            }
        });
        if let Some((_, phi)) = integrand_of(&built) {
            report["integral"] = json!({ "integrals": lebesgue.integral_trace(&phi, horizon)? });
        }
        return Ok(Outcome::new(model, report, false));
    }
    Err(CliError::Unsupported {
        kind: model.kind().into(),
        command: "measure (add a measure block)",
    })
}

/// The explicit-stages document listing stages `1..=horizon`, and the run outcome.
///
/// A single-signed integrand whose stage integrals miss the tolerance gives no
/// document and a failed outcome.
pub fn construct_convergent(
    phi: &Integrand,
    tol: f64,
    horizon: u64,
) -> Result<(Option<Value>, Outcome), CliError> {
    let construction = match construct_convergent_evolution(phi, tol, horizon) {
        Ok(c) => c,
        Err(MeasureError::SignObstruction { total }) => {
            let report = json!({
                "outcome": "sign-obstruction",
                "total": total,
                "message": MeasureError::SignObstruction { total }.to_string(),
            });
            return Ok((
                None,
                Outcome {
                    model: None,
                    report,
                    failed: true,
                    stdout_csv: None,
                },
            ));
        }
        Err(e) => return Err(e.into()),
    };
    let stages: Vec<Vec<[f64; 2]>> = (1..=horizon)
        .map(|k| construction.model.stage(k).parts().to_vec())
        .collect();
    let carrier: Vec<[f64; 2]> = construction.model.carrier().parts().to_vec();
    let doc = json!({
        "kind": "explicit-stages",
        "ground": carrier,
        "intervals": stages,
        "measure": { "carrier": carrier },
        "integrand": { "phi": phi.to_string() },
    });
    let report = &construction.report;
    let summary = AxiomSummary::new(&report.axioms);
    let failed = summary.has_failure();
    let out = json!({
        "outcome": "constructed",
        "total": report.total,
        "tolerance": report.tolerance,
        "horizon": report.horizon,
        "cells": report.cells,
        "first_within": report.first_within,
        "sup_error_after": report.sup_error_after,
        "sup_error": report.sup_error,
        "telescoping_error": report.telescoping_error,
        "integrals": report.integrals,
        "axioms": summary,
    });
    Ok((
        Some(doc),
        Outcome {
            model: None,
            report: out,
            failed,
            stdout_csv: None,
        },
    ))
}

pub fn reduce(model: &ModelFile, horizon: u64) -> Result<Outcome, CliError> {
    let built = build(model, horizon)?;
    let Stages::Discrete(evo) = &built.stages else {
        return Err(CliError::Unsupported {
            kind: model.kind().into(),
            command: "reduce",
        });
    };
    let reduction = find_reducing_subsequence(evo, horizon);
    Ok(Outcome::new(
        model,
        json!({ "reduction": reduction }),
        false,
    ))
}
