// SPDX-License-Identifier: Apache-2.0

//! Randomized verification suites.
//!
//! Instances run in parallel, each on its own generator from
//! [`instance_rng`], and results are collected in instance order, so a
//! suite's CSV depends only on its parameters and seed.

use rand::RngExt;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{ap_lower_test_family, verify_upper, weighted_norm, BRACKET_TOLERANCE};
use crate::constants::{a0, conjugate};
use crate::emit;
use crate::error::Result;
use crate::filtration::{FilteredSpace, SimpleFunction, SpaceDocument};
use crate::operators::doob_maximal;
use crate::principal::{
    base_scales, build_principal_forest, lemma_domination_check, principal_weighted_estimate,
    verify_properties,
};
use crate::sample::{
    instance_rng, pick, random_measurable_set, random_nonnegative, random_signed, random_weight,
    SpaceSource,
};
use crate::scale::{le_rel, relative_margin};
use crate::stopping::{build_decomposition, verify_chain, verify_partition};
use crate::weights::{Exponent, Weight};

/// The instance behind a failed check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub instance: usize,
    pub check: String,
    pub space: SpaceDocument,
    pub f: Vec<f64>,
    pub v: Option<Vec<f64>>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub failures: usize,
    pub first_failure: Option<Failure>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn to_csv(&self) -> String {
        emit::csv(&self.columns, &self.rows)
    }
}

struct Outcome {
    rows: Vec<Vec<f64>>,
    failure: Option<Failure>,
}

fn failure(
    instance: usize,
    check: impl Into<String>,
    space: &FilteredSpace,
    f: &SimpleFunction,
    v: Option<&Weight>,
    p: f64,
) -> Failure {
    Failure {
        instance,
        check: check.into(),
        space: space.to_document(),
        f: f.values().to_vec(),
        v: v.map(|v| v.values().to_vec()),
        p,
    }
}

fn run<F>(
    name: &'static str,
    columns: &[&'static str],
    seed: u64,
    trials: usize,
    job: F,
) -> Result<SuiteReport>
where
    F: Fn(usize, &mut rand_xoshiro::Xoshiro256PlusPlus) -> Result<Outcome> + Sync,
{
    let outcomes: Vec<Result<Outcome>> = (0..trials)
        .into_par_iter()
        .map(|i| job(i, &mut instance_rng(seed, i as u64)))
        .collect();
    let mut rows = Vec::new();
    let mut failures = 0;
    let mut first_failure = None;
    for outcome in outcomes {
        let outcome = outcome?;
        rows.extend(outcome.rows);
        if let Some(f) = outcome.failure {
            failures += 1;
            first_failure.get_or_insert(f);
        }
    }
    Ok(SuiteReport {
        name,
        seed,
        trials,
        failures,
        first_failure,
        columns: columns.to_vec(),
        rows,
    })
}

/// `‖Mf‖_p ≤ p′‖f‖_p` for signed `f`, unweighted, at each `p`.
pub fn doob_suite(
    seed: u64,
    trials: usize,
    source: &SpaceSource,
    ps: &[f64],
) -> Result<SuiteReport> {
    run(
        "doob",
        &["instance", "p", "maximal_norm", "bound", "margin"],
        seed,
        trials,
        |i, rng| {
            let space = source.draw(rng)?;
            let f = random_signed(rng, space.leaf_count());
            let one = Weight::unit(space.leaf_count());
            let mf = doob_maximal(&space, &f)?;
            let mut rows = Vec::new();
            let mut fail = None;
            for &p in ps {
                let lhs = weighted_norm(&space, &mf, &one, p)?;
                let rhs = conjugate(p)? * weighted_norm(&space, &f, &one, p)?;
                if !le_rel(lhs, rhs, BRACKET_TOLERANCE) && fail.is_none() {
                    fail = Some(failure(
                        i,
                        format!("operators: ||Mf||_p <= p'||f||_p at p = {p}"),
                        &space,
                        &f,
                        None,
                        p,
                    ));
                }
                rows.push(vec![i as f64, p, lhs, rhs, relative_margin(lhs, rhs)]);
            }
            Ok(Outcome {
                rows,
                failure: fail,
            })
        },
    )
}

/// The two-sided bracket on random `(f ≥ 0, v)`: the test family reaches
/// `[v]^{1/p}` (exactly, at node level) and `‖Mf‖_{L^p(v)}` obeys the upper
/// constant. `p` is drawn from `[1.2, 6)` unless fixed.
pub fn bracket_suite(
    seed: u64,
    trials: usize,
    source: &SpaceSource,
    p: Option<f64>,
) -> Result<SuiteReport> {
    if let Some(p) = p {
        Exponent::new(p)?;
    }
    let columns = [
        "instance",
        "p",
        "ap",
        "lower_bound",
        "node_ratio",
        "family_ratio",
        "upper_constant",
        "maximal_norm",
        "bound",
    ];
    run("bracket", &columns, seed, trials, |i, rng| {
        let space = source.draw(rng)?;
        let f = random_nonnegative(rng, space.leaf_count());
        let v = random_weight(rng, &space);
        let p = p.unwrap_or_else(|| rng.random_range(1.2..6.0));
        let family = ap_lower_test_family(&space, &v, p)?;
        let upper = verify_upper(&space, &f, &v, p)?;
        let check = if !family.matches_characteristic() {
            Some("bounds: test family node maximum equals [v]^(1/p)")
        } else if !le_rel(family.lower_bound, family.operator_ratio, BRACKET_TOLERANCE) {
            Some("bounds: [v]^(1/p) <= test family ratio")
        } else if !le_rel(family.operator_ratio, upper.constant, BRACKET_TOLERANCE) {
            Some("bounds: test family ratio <= upper constant")
        } else if !upper.passed {
            Some("bounds: ||Mf||_{L^p(v)} <= C ||f||_{L^p(v)}")
        } else {
            None
        };
        Ok(Outcome {
            rows: vec![vec![
                i as f64,
                p,
                family.ap,
                family.lower_bound,
                family.node_ratio,
                family.operator_ratio,
                upper.constant,
                upper.lhs,
                upper.rhs,
            ]],
            failure: check.map(|c| failure(i, c, &space, &f, Some(&v), p)),
        })
    })
}

/// Principal-set forests for `a ∈ {1.5, 2, a₀(p)}` at a random base level,
/// scale and `Ω₀`: the six properties, the mass bound and the pointwise
/// domination.
pub fn principal_suite(seed: u64, trials: usize, source: &SpaceSource) -> Result<SuiteReport> {
    let columns = [
        "instance",
        "p",
        "a",
        "level",
        "scale",
        "sets",
        "generations",
        "max_ratio",
    ];
    run("principal", &columns, seed, trials, |i, rng| {
        let space = source.draw(rng)?;
        let h = random_nonnegative(rng, space.leaf_count());
        let p = pick(rng, &[1.5, 2.0, 3.0]);
        let mut rows = Vec::new();
        let mut fail = None;
        for a in [1.5, 2.0, a0(p)?] {
            let level = rng.random_range(0..=space.depth());
            let omega0 = random_measurable_set(rng, &space, level);
            let scales = base_scales(&space, &h, a, level, &omega0)?;
            if scales.is_empty() {
                continue;
            }
            let scale = pick(rng, &scales);
            let forest = build_principal_forest(&space, &h, a, level, scale, &omega0)?
                .expect("scale comes from a nonempty slice");
            let properties = verify_properties(&space, &forest)?;
            let domination = lemma_domination_check(&space, &forest)?;
            if fail.is_none() {
                let check = if let Some(c) = properties.first_failure() {
                    Some(format!("principal: {} (a = {a})", c.name))
                } else if !domination.passed() {
                    Some(format!("principal: pointwise domination (a = {a})"))
                } else {
                    None
                };
                fail = check.map(|c| failure(i, c, &space, &h, None, p));
            }
            rows.push(vec![
                i as f64,
                p,
                a,
                level as f64,
                scale as f64,
                forest.sets.len() as f64,
                forest.generations() as f64,
                domination.max_ratio,
            ]);
        }
        Ok(Outcome {
            rows,
            failure: fail,
        })
    })
}

/// The principal-set weighted estimate on random `(f ≥ 0, v)`.
pub fn estimate_suite(seed: u64, trials: usize, source: &SpaceSource) -> Result<SuiteReport> {
    let columns = [
        "instance", "p", "a", "ap", "constant", "lhs", "rhs", "margin",
    ];
    run("estimate", &columns, seed, trials, |i, rng| {
        let space = source.draw(rng)?;
        let f = random_nonnegative(rng, space.leaf_count());
        let v = random_weight(rng, &space);
        let p = pick(rng, &[1.5, 2.0, 3.0]);
        let a = pick(rng, &[1.5, 2.0, a0(p)?]);
        let r = principal_weighted_estimate(&space, &f, &v, p, a)?;
        let fail = (!r.passed())
            .then(|| failure(i, "principal: weighted estimate", &space, &f, Some(&v), p));
        Ok(Outcome {
            rows: vec![vec![
                i as f64,
                p,
                a,
                r.ap,
                r.constant,
                r.global_lhs,
                r.global_rhs,
                r.global_margin(),
            ]],
            failure: fail,
        })
    })
}

/// Stopping-time decomposition at each `b`: partition and chain.
pub fn stopping_suite(
    seed: u64,
    trials: usize,
    source: &SpaceSource,
    bs: &[f64],
) -> Result<SuiteReport> {
    let columns = [
        "instance",
        "p",
        "b",
        "cells",
        "maximal_mass",
        "sparse_bound",
        "final_bound",
        "ratio",
        "limit_constant",
    ];
    run("stopping", &columns, seed, trials, |i, rng| {
        let space = source.draw(rng)?;
        let f = random_signed(rng, space.leaf_count());
        let v = random_weight(rng, &space);
        let p = pick(rng, &[1.5, 2.0, 3.0]);
        let mut rows = Vec::new();
        let mut fail = None;
        for &b in bs {
            let dec = build_decomposition(&space, &f, &v, p, b)?;
            let partition = verify_partition(&dec, &space, &f)?;
            let chain = verify_chain(&dec, &space, &f, &v, p)?;
            if fail.is_none() {
                let check = if let Some(c) = partition.first_failure() {
                    Some(format!("stopping: {} (b = {b})", c.name))
                } else {
                    chain
                        .first_failure()
                        .map(|c| format!("stopping: {c} (b = {b})"))
                };
                fail = check.map(|c| failure(i, c, &space, &f, Some(&v), p));
            }
            rows.push(vec![
                i as f64,
                p,
                b,
                dec.cells.len() as f64,
                chain.chain[0].lhs,
                chain.chain[0].rhs,
                chain.chain[2].rhs,
                chain.ratio.unwrap_or(0.0),
                chain.limit_constant,
            ]);
        }
        Ok(Outcome {
            rows,
            failure: fail,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_are_reproducible() {
        let source = SpaceSource::Mixed { max_depth: 5 };
        let a = doob_suite(3, 40, &source, &[1.5, 2.0]).unwrap();
        assert!(a.passed(), "{:?}", a.first_failure);
        assert_eq!(a.rows.len(), 80);
        assert_eq!(
            a.to_csv(),
            doob_suite(3, 40, &source, &[1.5, 2.0]).unwrap().to_csv()
        );
        assert_ne!(
            a.to_csv(),
            doob_suite(4, 40, &source, &[1.5, 2.0]).unwrap().to_csv()
        );

        for report in [
            bracket_suite(3, 30, &source, None).unwrap(),
            principal_suite(3, 20, &source).unwrap(),
            estimate_suite(3, 10, &source).unwrap(),
            stopping_suite(3, 10, &source, &[1.2, 2.0]).unwrap(),
        ] {
            assert!(
                report.passed(),
                "{}: {:?}",
                report.name,
                report.first_failure
            );
        }
    }
}
