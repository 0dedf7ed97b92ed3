//! One function per subcommand, each producing a report, a table and a verdict.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use tropical_torus::complex::standard_complex;
use tropical_torus::equidist::{collapse_experiment, run_equidistribution, run_obstruction};
use tropical_torus::paf::{
    build_model_function, check_strongly_convex, search_epsilon, sup_distance_to_quadratic, tate_iterate, Cocycle,
    CocycleFunction, ConvexityCertificate, PiecewiseAffine,
};
use tropical_torus::{Error, Rational};

use crate::problem::{EpsilonChoice, Problem, ProblemError};

/// Largest ε-search depth.
pub const MAX_HALVINGS: u32 = 20;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("{0}")]
    Exhausted(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Parse(_) => 2,
            Self::Invariant(_) => 3,
            Self::Exhausted(_) => 4,
        }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        Self::Parse(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::EpsilonSearchExhausted { .. } => Self::Exhausted(e.to_string()),
            Error::Parse(_) | Error::DimensionMismatch { .. } | Error::InvalidArgument(_) => Self::Parse(e.to_string()),
            _ => Self::Invariant(e.to_string()),
        }
    }
}

/// Command-line overrides of problem-file values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub level: Option<u32>,
    pub epsilon: Option<EpsilonChoice>,
    pub iterations: Option<u32>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

pub struct Outcome {
    pub report: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub pass: bool,
}

fn to_value<T: Serialize>(command: &str, report: &T) -> Result<Value, CliError> {
    let mut v = serde_json::to_value(report).map_err(|e| CliError::Invariant(e.to_string()))?;
    if let Value::Object(map) = &mut v {
        map.insert("command".into(), Value::String(command.into()));
    }
    Ok(v)
}

fn opt(r: &Option<Rational>) -> String {
    r.as_ref().map(Rational::to_string).unwrap_or_default()
}

pub fn triangulate(p: &Problem, o: &Overrides) -> Result<Outcome, CliError> {
    let level = o.level.unwrap_or(p.level);
    let (index, c0) = standard_complex(&p.lattice, &p.gram)?;
    let c = c0.dyadic_refine(level);
    c.check_invariants()?;
    let rows = c.local_cells().iter().enumerate().map(|(i, cell)| vec![i.to_string(), format!("{cell:?}")]).collect();
    let report = json!({
        "command": "triangulate",
        "superlattice_index": index,
        "complex": c,
    });
    Ok(Outcome { report, header: vec!["cell", "vertices"], rows, pass: true })
}

struct Certified {
    epsilon: Rational,
    halvings: Option<u32>,
    function: CocycleFunction,
    certificate: ConvexityCertificate,
}

fn certify_model(p: &Problem, o: &Overrides) -> Result<Certified, CliError> {
    let (_, c0) = standard_complex(&p.lattice, &p.gram)?;
    let complex = Arc::new(c0);
    let cocycle = Cocycle::new(p.gram.clone(), p.linear())?;
    let choice = o.epsilon.clone().or_else(|| p.epsilon.clone()).unwrap_or(EpsilonChoice::Auto);
    match choice {
        EpsilonChoice::Auto => {
            let m = search_epsilon(complex, &cocycle, MAX_HALVINGS)?;
            Ok(Certified {
                epsilon: m.epsilon,
                halvings: Some(m.halvings),
                function: m.function,
                certificate: m.certificate,
            })
        }
        EpsilonChoice::Fixed(epsilon) => {
            let function = build_model_function(complex, &cocycle, &epsilon)?;
            let certificate = check_strongly_convex(&function);
            Ok(Certified { epsilon, halvings: None, function, certificate })
        }
    }
}

pub fn certify(p: &Problem, o: &Overrides) -> Result<Outcome, CliError> {
    let c = certify_model(p, o)?;
    let cert = &c.certificate;
    let rows = cert
        .slacks
        .iter()
        .map(|s| {
            vec![
                s.delta.to_string(),
                s.sigma.to_string(),
                format!("{:?}", s.sigma_shift),
                format!("{:?}", s.normal),
                s.slack.to_string(),
            ]
        })
        .collect();
    let report = json!({
        "command": "certify",
        "epsilon": c.epsilon,
        "halvings": c.halvings,
        "cells": c.function.complex().len(),
        "pass": cert.pass,
        "min_slack": cert.min_slack().map(|s| &s.slack),
        "witness": cert.witness,
        "slacks": cert.slacks,
    });
    Ok(Outcome { report, header: vec!["delta", "sigma", "sigma_shift", "normal", "slack"], rows, pass: cert.pass })
}

#[derive(Serialize)]
struct TateRow {
    i: u32,
    cells: usize,
    sup_distance: Rational,
    ratio: Option<Rational>,
    certified: bool,
}

pub fn tate(p: &Problem, o: &Overrides) -> Result<Outcome, CliError> {
    let c = certify_model(p, o)?;
    let iterations = o.iterations.unwrap_or(p.iterations);
    let quarter = Rational::new(1, 4);
    let mut rows: Vec<TateRow> = Vec::new();
    for i in 0..=iterations {
        let f = tate_iterate(&c.function, i)?;
        let d = sup_distance_to_quadratic(&f)?;
        let ratio = rows.last().filter(|r| !r.sup_distance.is_zero()).map(|r| &d / &r.sup_distance);
        let exact = match (&ratio, rows.last()) {
            (Some(r), _) => *r == quarter,
            (None, Some(prev)) => prev.sup_distance.is_zero() && d.is_zero(),
            (None, None) => true,
        };
        if !exact {
            return Err(CliError::Invariant(format!(
                "sup distance at iteration {i} is {d}, not a quarter of the last"
            )));
        }
        let certified = check_strongly_convex(&f).pass;
        rows.push(TateRow { i, cells: f.complex().len(), sup_distance: d, ratio, certified });
    }
    let pass = rows.iter().all(|r| r.certified);
    let table = rows
        .iter()
        .map(|r| vec![r.i.to_string(), r.sup_distance.to_string(), opt(&r.ratio), r.certified.to_string()])
        .collect();
    let report = json!({
        "command": "tate",
        "epsilon": c.epsilon,
        "base_certified": c.certificate.pass,
        "rows": rows,
        "pass": pass,
    });
    Ok(Outcome { report, header: vec!["i", "sup_distance", "ratio", "certified"], rows: table, pass })
}

pub fn equidist(p: &Problem, o: &Overrides) -> Result<Outcome, CliError> {
    let mut cfg = p.equidist_config();
    if let Some(l) = o.level {
        cfg.level = l;
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    let r = run_equidistribution(&cfg)?;
    let rows = r
        .rows
        .iter()
        .map(|row| {
            let status = serde_json::to_value(row.status).expect("unit enum").as_str().unwrap_or_default().to_owned();
            vec![row.m.to_string(), row.discrepancy.to_string(), opt(&row.ratio), status]
        })
        .collect();
    Ok(Outcome {
        report: to_value("equidist", &r)?,
        header: vec!["m", "discrepancy", "ratio", "status"],
        rows,
        pass: r.pass,
    })
}

pub fn collapse(p: &Problem, o: &Overrides) -> Result<Outcome, CliError> {
    let mut cfg = p.collapse_config();
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(n) = o.samples {
        cfg.samples = n;
    }
    let r = collapse_experiment(&cfg)?;
    let rows = r.rows.iter().map(|row| vec![row.delta.to_string(), row.mass.to_string(), opt(&row.ratio)]).collect();
    Ok(Outcome { report: to_value("collapse", &r)?, header: vec!["delta", "mass", "ratio"], rows, pass: r.pass })
}

pub fn obstruction(p: &Problem, o: &Overrides) -> Result<Outcome, CliError> {
    let (e, level, trials, seed) = p.obstruction_params();
    let r = run_obstruction(&p.lattice, e, o.level.unwrap_or(level), trials, o.seed.unwrap_or(seed))?;
    let rows = vec![vec![
        r.denominator.to_string(),
        r.level.to_string(),
        r.integral.to_string(),
        r.lower_bound.to_string(),
        r.min_discrepancy.to_string(),
    ]];
    Ok(Outcome {
        report: to_value("obstruction", &r)?,
        header: vec!["denominator", "level", "integral", "lower_bound", "min_discrepancy"],
        rows,
        pass: r.pass,
    })
}
