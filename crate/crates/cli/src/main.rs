// SPDX-License-Identifier: Apache-2.0

//! `doob-ap`: builds spaces, runs the verifiers and writes their tables.
//!
//! Exit status: 0 when every checked inequality holds, 1 when one fails (the
//! first counterexample is part of the JSON on stdout), 2 on bad input.

mod args;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command, SpaceArgs, WeightArgs};
use doob_ap_core::bounds::sharpness_experiment;
use doob_ap_core::constants::{figure1_data, profile};
use doob_ap_core::emit::{figure1_csv, figure1_svg};
use doob_ap_core::principal::{base_scales, lemma_domination_check, verify_properties};
use doob_ap_core::sample::SpaceSource;
use doob_ap_core::suite::bracket_suite;
use doob_ap_core::{
    ap_characteristic, build_decomposition, build_principal_forest, doob_maximal, power_weight,
    tailed_maximal, verify_chain, verify_partition, weighted_maximal, FilteredSpace, LeafSet,
    SimpleFunction, Weight,
};

enum Failure {
    /// Bad flags or inputs.
    Usage(String),
    /// An output could not be written.
    Io(String),
}

impl From<doob_ap_core::Error> for Failure {
    fn from(e: doob_ap_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<Option<String>, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(violation)) => {
            eprintln!("verification failed: {violation}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit_line(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print(value: &Value) {
    emit_line(&serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("reports serialize")
}

fn load_space(args: &SpaceArgs) -> Result<Option<FilteredSpace>, Failure> {
    match (&args.dyadic, &args.space) {
        (Some(depth), _) => Ok(Some(FilteredSpace::dyadic(*depth, None)?)),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            Ok(Some(FilteredSpace::from_json(&text)?))
        }
        (None, None) => Ok(None),
    }
}

fn require_space(args: &SpaceArgs) -> Result<FilteredSpace, Failure> {
    load_space(args)?.ok_or_else(|| Failure::Usage("one of --dyadic or --space is required".into()))
}

/// Comma-separated numbers, or `@path` to a JSON array.
fn parse_values(text: &str) -> Result<Vec<f64>, Failure> {
    if let Some(path) = text.strip_prefix('@') {
        let body = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
        return serde_json::from_str(&body).map_err(|e| Failure::Usage(format!("{path}: {e}")));
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("`{s}` is not a number")))
        })
        .collect()
}

fn function(space: &FilteredSpace, text: &str) -> Result<SimpleFunction, Failure> {
    let f = SimpleFunction::new(parse_values(text)?)?;
    space.check_function(&f)?;
    Ok(f)
}

fn weight(space: &FilteredSpace, args: &WeightArgs) -> Result<Option<Weight>, Failure> {
    if let Some(text) = &args.v {
        let v = Weight::new(parse_values(text)?)?;
        space.check_function(v.as_function())?;
        return Ok(Some(v));
    }
    match args.alpha {
        Some(alpha) => Ok(Some(power_weight(space, alpha)?)),
        None => Ok(None),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// `x` rounded to 15 significant digits, printed without trailing noise.
fn short(x: f64) -> String {
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Ap {
            space,
            weight: w,
            p,
        } => {
            let space = require_space(&space)?;
            let v = weight(&space, &w)?.unwrap_or_else(|| Weight::unit(space.leaf_count()));
            print(&to_json(&ap_characteristic(&space, &v, p)?));
            Ok(None)
        }
        Command::Maximal {
            space,
            f,
            level,
            weight: w,
        } => {
            let space = require_space(&space)?;
            let f = function(&space, &f)?;
            let values = match (weight(&space, &w)?, level) {
                (Some(_), Some(_)) => {
                    return Err(Failure::Usage(
                        "--level cannot be combined with a weight".into(),
                    ))
                }
                (Some(v), None) => weighted_maximal(&space, &f, &v)?,
                (None, Some(level)) => tailed_maximal(&space, &f, level)?,
                (None, None) => doob_maximal(&space, &f)?,
            };
            print(&json!({ "maximal": values.values() }));
            Ok(None)
        }
        Command::Principal {
            space,
            f,
            a,
            level,
            scale,
        } => {
            let space = require_space(&space)?;
            let h = function(&space, &f)?;
            let omega0 = LeafSet::full(space.leaf_count());
            let scales = match scale {
                Some(k) => vec![k],
                None => base_scales(&space, &h, a, level, &omega0)?,
            };
            let mut forests = Vec::new();
            let mut violation = None;
            for k in scales {
                let Some(forest) = build_principal_forest(&space, &h, a, level, k, &omega0)? else {
                    forests.push(json!({ "scale": k, "empty": true }));
                    continue;
                };
                let properties = verify_properties(&space, &forest)?;
                let domination = lemma_domination_check(&space, &forest)?;
                if violation.is_none() {
                    if let Some(c) = properties.first_failure() {
                        violation = Some(format!("principal: {} (scale {k})", c.name));
                    } else if !domination.passed() {
                        violation = Some(format!("principal: pointwise domination (scale {k})"));
                    }
                }
                forests.push(json!({
                    "scale": k,
                    "sets": forest.sets.len(),
                    "generations": forest.generations(),
                    "forest": to_json(&forest),
                    "properties": to_json(&properties),
                    "domination": to_json(&domination),
                }));
            }
            print(&json!({ "a": a, "level": level, "forests": forests }));
            Ok(violation)
        }
        Command::Stopping {
            space,
            f,
            weight: w,
            p,
            b,
            out,
        } => {
            let space = require_space(&space)?;
            let f = function(&space, &f)?;
            let v = weight(&space, &w)?.unwrap_or_else(|| Weight::unit(space.leaf_count()));
            let dec = build_decomposition(&space, &f, &v, p, b)?;
            let partition = verify_partition(&dec, &space, &f)?;
            let chain = verify_chain(&dec, &space, &f, &v, p)?;
            let csv = match out.dir() {
                Some(dir) => Some(write(&dir, "stopping.csv", &dec.to_csv())?),
                None => None,
            };
            print(&json!({
                "b": b,
                "p": p,
                "ap": dec.ap,
                "scales": dec.scales,
                "cells": dec.cells.len(),
                "partition": to_json(&partition),
                "chain": to_json(&chain),
                "csv": csv,
            }));
            let violation = match partition.first_failure() {
                Some(c) => Some(format!("stopping: {}", c.name)),
                None => chain.first_failure().map(|c| format!("stopping: {c}")),
            };
            Ok(violation)
        }
        Command::Verify {
            space,
            p,
            trials,
            seed,
            out,
        } => {
            let source = match load_space(&space)? {
                Some(space) => SpaceSource::Fixed(space),
                None => SpaceSource::Mixed { max_depth: 8 },
            };
            let report = bracket_suite(seed, trials, &source, p)?;
            let csv = match out.dir() {
                Some(dir) => Some(write(&dir, "verify.csv", &report.to_csv())?),
                None => None,
            };
            print(&json!({
                "suite": report.name,
                "seed": seed,
                "trials": trials,
                "failures": report.failures,
                "first_failure": to_json(&report.first_failure),
                "csv": csv,
            }));
            Ok(report
                .first_failure
                .map(|f| format!("{} (instance {})", f.check, f.instance)))
        }
        Command::Sharpness {
            p,
            alpha,
            dyadic,
            budget,
            seed,
            out,
        } => {
            let report = sharpness_experiment(p, &alpha, dyadic, budget, seed)?;
            let csv = match out.dir() {
                Some(dir) => Some(write(&dir, "sharpness.csv", &report.to_csv())?),
                None => None,
            };
            let mut value = to_json(&report);
            value["band_holds"] = json!(report.band_holds());
            value["csv"] = json!(csv);
            print(&value);
            let violation = if !report.ap_increasing {
                Some("bounds: [v]_{A_p} not increasing as alpha decreases")
            } else if !report.brackets_hold {
                Some("bounds: [v]^(1/p) <= best_ratio <= upper constant")
            } else if !report.band_holds() {
                Some("bounds: normalized ratio outside the factor-4 band")
            } else {
                None
            };
            Ok(violation.map(String::from))
        }
        Command::Constants { p } => {
            let header = [
                "p",
                "p'",
                "psi",
                "phi",
                "phi1",
                "phi2",
                "a0",
                "eta(a0)",
                "lerner",
                "principal(a0)",
                "unweighted",
            ];
            let mut rows = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
            for p in p {
                let c = profile(p)?;
                rows.push(
                    [
                        c.p,
                        c.p_conj,
                        c.psi,
                        c.phi,
                        c.phi1,
                        c.phi2,
                        c.a0,
                        c.eta_a0,
                        c.bound_lerner,
                        c.bound_principal_a0,
                        c.unweighted,
                    ]
                    .iter()
                    .map(|&x| short(x))
                    .collect(),
                );
            }
            let widths: Vec<usize> = (0..header.len())
                .map(|k| rows.iter().map(|r| r[k].len()).max().unwrap_or(0))
                .collect();
            for row in rows {
                let cells: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:<w$}"))
                    .collect();
                emit_line(cells.join("  ").trim_end());
            }
            Ok(None)
        }
        Command::Figure1 {
            pmin,
            pmax,
            samples,
            out,
        } => {
            let rows = figure1_data(pmin, pmax, samples)?;
            let dir = out.dir().unwrap_or_else(|| PathBuf::from("."));
            let csv = write(&dir, "figure1.csv", &figure1_csv(&rows))?;
            let svg = write(&dir, "figure1.svg", &figure1_svg(&rows))?;
            print(&json!({ "rows": rows.len(), "csv": csv, "svg": svg }));
            let ordered = rows.iter().all(|r| r.phi >= r.psi);
            let decreasing = rows
                .windows(2)
                .all(|w| w[1].phi < w[0].phi && w[1].psi < w[0].psi);
            Ok(if !ordered {
                Some("constants: phi >= psi".into())
            } else if !decreasing {
                Some("constants: phi and psi strictly decreasing".into())
            } else {
                None
            })
        }
    }
}
