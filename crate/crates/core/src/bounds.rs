// SPDX-License-Identifier: Apache-2.0

//! Weighted norms, the two directions of the `A_p` characterization, and
//! numerical lower bounds on `‖M‖_{L^p(v)}`.
//!
//! Nothing here claims an exact operator norm: the test family and the
//! extremal search give lower bounds, and the proven constant gives the
//! upper one.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::weighted_upper_constant;
use crate::emit;
use crate::error::{Error, Result};
use crate::filtration::{FilteredSpace, NodeId, SimpleFunction};
use crate::operators::{doob_maximal, level_averages};
use crate::scale::{le_rel, relative_margin};
use crate::weights::{ap_characteristic, dual_weight, power_weight, ApReport, Exponent, Weight};

/// Relative tolerance for the bracket `[v]^{1/p} ≤ ratio ≤ C`.
pub const BRACKET_TOLERANCE: f64 = 1e-9;

/// Relative improvement a search step must exceed to be accepted.
pub const STEP_THRESHOLD: f64 = 1e-12;

/// `(Σ |f|^p w μ)^{1/p}`.
pub fn weighted_norm(space: &FilteredSpace, f: &SimpleFunction, w: &Weight, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    space.check_function(f)?;
    space.check_function(w.as_function())?;
    Ok(norm_pow(space.leaf_measures(), f.values(), w.values(), p).powf(1.0 / p))
}

fn norm_pow(mu: &[f64], f: &[f64], w: &[f64], p: f64) -> f64 {
    f.iter()
        .zip(w)
        .zip(mu)
        .map(|((f, w), m)| f.abs().powf(p) * w * m)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperReport {
    pub p: f64,
    pub ap: f64,
    /// `p^{1/(p−1)}p′[v]^{1/(p−1)}`.
    pub constant: f64,
    /// `‖Mf‖_{L^p(v)}`.
    pub lhs: f64,
    /// `constant·‖f‖_{L^p(v)}`.
    pub rhs: f64,
    pub passed: bool,
}

impl UpperReport {
    pub fn slack(&self) -> f64 {
        relative_margin(self.lhs, self.rhs)
    }
}

/// Checks `‖Mf‖_{L^p(v)} ≤ p^{1/(p−1)}p′[v]^{1/(p−1)}‖f‖_{L^p(v)}`.
pub fn verify_upper(
    space: &FilteredSpace,
    f: &SimpleFunction,
    v: &Weight,
    p: f64,
) -> Result<UpperReport> {
    Exponent::new(p)?;
    let ap = ap_characteristic(space, v, p)?.characteristic;
    let constant = weighted_upper_constant(p, ap)?;
    let lhs = weighted_norm(space, &doob_maximal(space, f)?, v, p)?;
    let rhs = constant * weighted_norm(space, f, v, p)?;
    Ok(UpperReport {
        p,
        ap,
        constant,
        lhs,
        rhs,
        passed: le_rel(lhs, rhs, BRACKET_TOLERANCE),
    })
}

/// One member `χ_B σ` of the test family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFamilyEntry {
    pub node: NodeId,
    /// `(∫_B 𝔼_i(σ)^p v dμ / ∫_B σ dμ)^{1/p}`.
    pub node_ratio: f64,
    /// `‖M(χ_Bσ)‖_{L^p(v)}/‖χ_Bσ‖_{L^p(v)}`.
    pub operator_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFamilyReport {
    pub p: f64,
    pub ap: f64,
    /// `[v]_{A_p}^{1/p}`.
    pub lower_bound: f64,
    pub node_ratio: f64,
    pub node_argmax: NodeId,
    pub operator_ratio: f64,
    pub operator_argmax: NodeId,
    pub entries: Vec<TestFamilyEntry>,
}

impl TestFamilyReport {
    /// The node ratio maximum agrees with `[v]^{1/p}`.
    pub fn matches_characteristic(&self) -> bool {
        (self.node_ratio - self.lower_bound).abs() <= BRACKET_TOLERANCE * self.lower_bound
    }
}

/// Per-level node sums of `values·μ`.
fn level_sums(space: &FilteredSpace, values: &[f64]) -> Vec<Vec<f64>> {
    let depth = space.depth();
    let mut sums = vec![Vec::new(); depth + 1];
    sums[depth] = values
        .iter()
        .zip(space.leaf_measures())
        .map(|(v, m)| v * m)
        .collect();
    for level in (0..depth).rev() {
        let mut s = vec![0.0; space.node_count(level)];
        for (child, &parent) in space.parents(level + 1).iter().enumerate() {
            s[parent] += sums[level + 1][child];
        }
        sums[level] = s;
    }
    sums
}

/// Evaluates `f = χ_B σ` for every node `B`.
///
/// Inside `B` (at level `i`), `M(χ_Bσ) = *M_i σ`. Outside `B`, on `A_j \ A_{j+1}`
/// for the ancestors `A_j ⊃ B`, it equals `σ(B)/μ(A_j)`. Both pieces are
/// accumulated for all nodes in one pass, so the whole family costs `O(n·L)`.
pub fn ap_lower_test_family(space: &FilteredSpace, v: &Weight, p: f64) -> Result<TestFamilyReport> {
    let report: ApReport = ap_characteristic(space, v, p)?;
    let sigma = dual_weight(v, p)?;
    let depth = space.depth();
    let mu = space.leaf_measures();
    let s_avg = level_averages(space, sigma.values(), None);
    let s_mass = level_sums(space, sigma.values());
    let v_mass = level_sums(space, v.values());
    let sp_v: Vec<f64> = sigma
        .values()
        .iter()
        .zip(v.values())
        .map(|(s, v)| s.powf(p) * v)
        .collect();
    let f_norm = level_sums(space, &sp_v);

    // inner[i][B] = ∫_B (*M_i σ)^p v dμ
    let mut inner: Vec<Vec<f64>> = (0..=depth)
        .map(|l| vec![0.0; space.node_count(l)])
        .collect();
    for (leaf, (&vl, &m)) in v.values().iter().zip(mu).enumerate() {
        let w = vl * m;
        let mut tail: f64 = 0.0;
        for level in (0..=depth).rev() {
            let node = space.node_of_leaf(level, leaf).index;
            tail = tail.max(s_avg[level][node]);
            inner[level][node] += tail.powf(p) * w;
        }
    }

    let mut entries = Vec::with_capacity(space.all_nodes().count());
    let mut path = Vec::with_capacity(depth + 1);
    for node in space.all_nodes() {
        path.clear();
        let mut cur = Some(node);
        while let Some(c) = cur {
            path.push(c);
            cur = space.parent(c);
        }
        // path[0] = B, path[k] = its k-th ancestor.
        let sigma_b = s_mass[node.level][node.index];
        let mut outer = 0.0;
        for k in 1..path.len() {
            let a = path[k];
            let ring = v_mass[a.level][a.index] - v_mass[path[k - 1].level][path[k - 1].index];
            outer += (sigma_b / space.node_measure(a)).powf(p) * ring.max(0.0);
        }
        let e = s_avg[node.level][node.index];
        let node_ratio = (e.powf(p) * v_mass[node.level][node.index] / sigma_b).powf(1.0 / p);
        let operator_ratio = ((inner[node.level][node.index] + outer)
            / f_norm[node.level][node.index])
            .powf(1.0 / p);
        entries.push(TestFamilyEntry {
            node,
            node_ratio,
            operator_ratio,
        });
    }
    let best = |key: fn(&TestFamilyEntry) -> f64| {
        entries
            .iter()
            .fold(None::<&TestFamilyEntry>, |acc, e| match acc {
                Some(b) if key(b) >= key(e) => Some(b),
                _ => Some(e),
            })
            .copied()
            .expect("a space has at least one node")
    };
    let by_node = best(|e| e.node_ratio);
    let by_operator = best(|e| e.operator_ratio);
    Ok(TestFamilyReport {
        p,
        ap: report.characteristic,
        lower_bound: report.characteristic.powf(1.0 / p),
        node_ratio: by_node.node_ratio,
        node_argmax: by_node.node,
        operator_ratio: by_operator.operator_ratio,
        operator_argmax: by_operator.node,
        entries,
    })
}

/// Incremental evaluator of `‖Mf‖_{L^p(v)}/‖f‖_{L^p(v)}` under single-leaf edits.
struct RatioState<'a> {
    space: &'a FilteredSpace,
    v: &'a [f64],
    p: f64,
    f: Vec<f64>,
    sums: Vec<Vec<f64>>,
    norm_pow: f64,
    maxima: Vec<Vec<f64>>,
}

impl<'a> RatioState<'a> {
    fn new(space: &'a FilteredSpace, v: &'a [f64], p: f64, f: Vec<f64>) -> Self {
        let sums = level_sums(space, &f);
        let norm_pow = norm_pow(space.leaf_measures(), &f, v, p);
        let maxima = (0..=space.depth())
            .map(|l| vec![0.0; space.node_count(l)])
            .collect();
        Self {
            space,
            v,
            p,
            f,
            sums,
            norm_pow,
            maxima,
        }
    }

    fn ratio(&mut self) -> f64 {
        if self.norm_pow <= 0.0 {
            return 0.0;
        }
        let depth = self.space.depth();
        for level in 0..=depth {
            let measures = self.space.level_measures(level);
            for (k, (&s, &m)) in self.sums[level].iter().zip(measures).enumerate() {
                let avg = (s / m).abs();
                self.maxima[level][k] = if level == 0 {
                    avg
                } else {
                    avg.max(self.maxima[level - 1][self.space.parents(level)[k]])
                };
            }
        }
        let mu = self.space.leaf_measures();
        let top: f64 = self.maxima[depth]
            .iter()
            .zip(self.v)
            .zip(mu)
            .map(|((m, v), w)| m.powf(self.p) * v * w)
            .sum();
        (top / self.norm_pow).powf(1.0 / self.p)
    }

    /// Sets `f(leaf) = value`, returning what is needed to undo it.
    fn set(&mut self, leaf: usize, value: f64) -> (f64, Vec<f64>, f64) {
        let old = self.f[leaf];
        let mu = self.space.leaf_measures()[leaf];
        let delta = (value - old) * mu;
        let mut saved = Vec::with_capacity(self.sums.len());
        for level in 0..self.sums.len() {
            let k = self.space.node_of_leaf(level, leaf).index;
            saved.push(self.sums[level][k]);
            self.sums[level][k] += delta;
        }
        let depth = self.space.depth();
        self.sums[depth][leaf] = value * mu;
        let saved_norm = self.norm_pow;
        self.norm_pow += (value.abs().powf(self.p) - old.abs().powf(self.p)) * self.v[leaf] * mu;
        self.f[leaf] = value;
        (old, saved, saved_norm)
    }

    fn undo(&mut self, leaf: usize, (old, saved, norm): (f64, Vec<f64>, f64)) {
        for (level, s) in saved.into_iter().enumerate() {
            let k = self.space.node_of_leaf(level, leaf).index;
            self.sums[level][k] = s;
        }
        self.norm_pow = norm;
        self.f[leaf] = old;
    }
}

/// Bracketed estimate of `‖M‖_{L^p(v)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    pub p: f64,
    /// `p^{1/(p−1)}p′[v]^{1/(p−1)}`.
    pub upper_constant: f64,
    /// `[v]_{A_p}^{1/p}`.
    pub lower_bound: f64,
    pub best_ratio: f64,
    /// Best ratio among the seeds, before any search step.
    pub seed_ratio: f64,
    pub witness: SimpleFunction,
    pub evaluations: usize,
    pub ap: ApReport,
}

impl NormEstimate {
    pub fn bracket_holds(&self) -> bool {
        le_rel(self.lower_bound, self.best_ratio, BRACKET_TOLERANCE)
            && le_rel(self.best_ratio, self.upper_constant, BRACKET_TOLERANCE)
    }
}

/// Coordinate ascent on `‖Mf‖_{L^p(v)}/‖f‖_{L^p(v)}` over `f ≥ 0`.
///
/// Seeds are `σ` and every `χ_Bσ`; the ascent starts from the best one. Each
/// sweep visits leaves in an order drawn from `seed` and tries `f(x)·2`, then
/// `f(x)/2`, keeping a move when the ratio improves by more than
/// [`STEP_THRESHOLD`]. Zero entries of the start are first lifted to a small
/// floor so that they can move. `budget` counts ratio evaluations; the
/// reported ratio is the best seen, so it never decreases with `budget`.
pub fn extremal_search(
    space: &FilteredSpace,
    v: &Weight,
    p: f64,
    budget: usize,
    seed: u64,
) -> Result<NormEstimate> {
    let family = ap_lower_test_family(space, v, p)?;
    let ap = ap_characteristic(space, v, p)?;
    let sigma = dual_weight(v, p)?;
    let upper_constant = weighted_upper_constant(p, ap.characteristic)?;

    let seed_fn = |node: NodeId| {
        let range = space.node_range(node);
        sigma
            .values()
            .iter()
            .enumerate()
            .map(|(l, &s)| if range.contains(&l) { s } else { 0.0 })
            .collect::<Vec<f64>>()
    };
    let mut state = RatioState::new(space, v.values(), p, sigma.values().to_vec());
    let sigma_ratio = state.ratio();
    let (mut best_ratio, start) = if family.operator_ratio >= sigma_ratio {
        (family.operator_ratio, seed_fn(family.operator_argmax))
    } else {
        (sigma_ratio, sigma.values().to_vec())
    };
    let seed_ratio = best_ratio;
    let mut witness = start.clone();

    let mut evaluations = 0;
    if budget > 0 {
        let floor = 1e-3
            * start
                .iter()
                .copied()
                .filter(|&x| x > 0.0)
                .fold(f64::INFINITY, f64::min);
        let lifted: Vec<f64> = start
            .iter()
            .map(|&x| if x > 0.0 { x } else { floor })
            .collect();
        state = RatioState::new(space, v.values(), p, lifted);
        let mut current = state.ratio();
        evaluations += 1;
        if current > best_ratio {
            best_ratio = current;
            witness = state.f.clone();
        }
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..space.leaf_count()).collect();
        'sweeps: loop {
            order.shuffle(&mut rng);
            let mut moved = false;
            for &leaf in &order {
                for factor in [2.0, 0.5] {
                    if evaluations >= budget {
                        break 'sweeps;
                    }
                    let undo = state.set(leaf, state.f[leaf] * factor);
                    let candidate = state.ratio();
                    evaluations += 1;
                    if candidate > current * (1.0 + STEP_THRESHOLD) {
                        current = candidate;
                        moved = true;
                        if current > best_ratio {
                            best_ratio = current;
                            witness = state.f.clone();
                        }
                        break;
                    }
                    state.undo(leaf, undo);
                }
            }
            if !moved {
                break;
            }
        }
    }

    Ok(NormEstimate {
        p,
        upper_constant,
        lower_bound: family.lower_bound,
        best_ratio,
        seed_ratio,
        witness: SimpleFunction::new(witness)?,
        evaluations,
        ap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub alpha: f64,
    pub ap_char: f64,
    pub best_ratio: f64,
    /// `best_ratio/[v]^{1/(p−1)}`.
    pub normalized_ratio: f64,
    pub upper_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub p: f64,
    pub depth: usize,
    pub rows: Vec<SharpnessRow>,
    /// `[v]_{A_p}` strictly increases as `α` decreases.
    pub ap_increasing: bool,
    /// `max [v] / min [v]` over the rows.
    pub ap_span: f64,
    /// `max/min` of the normalized column.
    pub band: f64,
    pub brackets_hold: bool,
}

/// The normalized column must stay within this factor.
pub const SHARPNESS_BAND: f64 = 4.0;

impl SharpnessReport {
    pub fn band_holds(&self) -> bool {
        self.band < SHARPNESS_BAND
    }

    pub fn passed(&self) -> bool {
        self.ap_increasing && self.band_holds() && self.brackets_hold
    }

    pub fn to_csv(&self) -> String {
        emit::csv(
            &[
                "alpha",
                "ap_char",
                "best_ratio",
                "normalized_ratio",
                "upper_bound",
            ],
            self.rows.iter().map(|r| {
                [
                    r.alpha,
                    r.ap_char,
                    r.best_ratio,
                    r.normalized_ratio,
                    r.upper_bound,
                ]
            }),
        )
    }
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Power weights `x^α` on the uniform dyadic space of depth `depth`: for each
/// `α`, `[v]_{A_p}`, the searched ratio, and the ratio over `[v]^{1/(p−1)}`.
pub fn sharpness_experiment(
    p: f64,
    alphas: &[f64],
    depth: usize,
    budget: usize,
    seed: u64,
) -> Result<SharpnessReport> {
    Exponent::new(p)?;
    if alphas.is_empty() {
        return Err(Error::InvalidRange("no alpha values".into()));
    }
    if let Some(&a) = alphas.iter().find(|&&a| !(a > -1.0 && a <= 0.0)) {
        return Err(Error::InvalidAlpha(a));
    }
    let space = FilteredSpace::dyadic(depth, None)?;
    let estimates: Vec<Result<(f64, NormEstimate)>> = alphas
        .par_iter()
        .map(|&alpha| {
            let v = power_weight(&space, alpha)?;
            Ok((alpha, extremal_search(&space, &v, p, budget, seed)?))
        })
        .collect();
    let mut rows = Vec::with_capacity(alphas.len());
    let mut brackets_hold = true;
    for estimate in estimates {
        let (alpha, est) = estimate?;
        brackets_hold &= est.bracket_holds();
        let ap = est.ap.characteristic;
        rows.push(SharpnessRow {
            alpha,
            ap_char: ap,
            best_ratio: est.best_ratio,
            normalized_ratio: est.best_ratio / ap.powf(1.0 / (p - 1.0)),
            upper_bound: est.upper_constant,
        });
    }
    let mut by_alpha = rows.clone();
    by_alpha.sort_by(|a, b| b.alpha.total_cmp(&a.alpha));
    let ap_increasing = by_alpha.windows(2).all(|w| w[1].ap_char > w[0].ap_char);
    Ok(SharpnessReport {
        p,
        depth,
        ap_span: spread(rows.iter().map(|r| r.ap_char)),
        band: spread(rows.iter().map(|r| r.normalized_ratio)),
        rows,
        ap_increasing,
        brackets_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(values: &[f64]) -> SimpleFunction {
        SimpleFunction::new(values.to_vec()).unwrap()
    }

    fn w(values: &[f64]) -> Weight {
        Weight::new(values.to_vec()).unwrap()
    }

    #[test]
    fn weighted_norm_examples() {
        let space = FilteredSpace::dyadic(2, None).unwrap();
        let one = Weight::unit(4);
        assert_eq!(
            weighted_norm(&space, &f(&[1.0; 4]), &one, 3.0).unwrap(),
            1.0
        );
        assert_eq!(
            weighted_norm(&space, &f(&[4.0, 0.0, 0.0, 0.0]), &one, 2.0).unwrap(),
            2.0
        );
        let g = f(&[1.0, -2.0, 0.5, 3.0]);
        let a = weighted_norm(&space, &g, &one, 2.5).unwrap();
        let b = weighted_norm(&space, &g, &one.scale(7.0).unwrap(), 2.5).unwrap();
        assert!((b - 7f64.powf(1.0 / 2.5) * a).abs() < 1e-12 * b);
        assert!(matches!(
            weighted_norm(&space, &g, &one, 0.5),
            Err(Error::InvalidExponent(_))
        ));
    }

    #[test]
    fn upper_bound_examples() {
        let space = FilteredSpace::dyadic(2, None).unwrap();
        let g = f(&[4.0, 0.0, 0.0, 0.0]);
        let r = verify_upper(&space, &g, &Weight::unit(4), 2.0).unwrap();
        assert!(r.passed && (r.constant - 4.0).abs() < 1e-12);
        let r = verify_upper(&space, &g, &w(&[1.0, 1.0, 1.0, 16.0]), 2.0).unwrap();
        assert!(r.passed && r.slack() >= 0.0, "{r:?}");
    }

    #[test]
    fn test_family_examples() {
        let space = FilteredSpace::dyadic(3, None).unwrap();
        let r = ap_lower_test_family(&space, &Weight::unit(8), 2.0).unwrap();
        assert!((r.node_ratio - 1.0).abs() < 1e-15 && r.matches_characteristic());

        let two = FilteredSpace::dyadic(1, None).unwrap();
        let r = ap_lower_test_family(&two, &w(&[1.0, 4.0]), 2.0).unwrap();
        assert!((r.node_ratio - 1.25).abs() < 1e-12);
        assert!(r.operator_ratio >= r.node_ratio);
    }

    #[test]
    fn family_operator_ratio_matches_direct_evaluation() {
        let space = FilteredSpace::from_json(
            r#"{"depth":3,"leaf_measures":[0.5,1,2,0.25,1,3],"levels":[[6],[3,3],[1,2,2,1],[1,1,1,1,1,1]]}"#,
        )
        .unwrap();
        let v = w(&[0.2, 3.0, 1.0, 7.0, 0.5, 2.0]);
        let p = 2.7;
        let sigma = dual_weight(&v, p).unwrap();
        let r = ap_lower_test_family(&space, &v, p).unwrap();
        for e in &r.entries {
            let g = SimpleFunction::indicator(&space.node_set(e.node)).mul(sigma.as_function());
            let direct = weighted_norm(&space, &doob_maximal(&space, &g).unwrap(), &v, p).unwrap()
                / weighted_norm(&space, &g, &v, p).unwrap();
            assert!(
                (direct - e.operator_ratio).abs() < 1e-12 * direct,
                "{e:?} vs {direct}"
            );
        }
    }

    #[test]
    fn search_brackets_unweighted_norm() {
        let space = FilteredSpace::dyadic(5, None).unwrap();
        let est = extremal_search(&space, &Weight::unit(32), 2.0, 400, 1).unwrap();
        assert!(
            est.best_ratio >= 1.0 && est.best_ratio <= 2.0,
            "{}",
            est.best_ratio
        );
        assert!(est.bracket_holds());
    }

    #[test]
    fn search_is_monotone_in_budget_and_deterministic() {
        let space = FilteredSpace::dyadic(4, None).unwrap();
        let v = power_weight(&space, -0.6).unwrap();
        let mut last = 0.0;
        for budget in [0, 1, 10, 50, 200] {
            let est = extremal_search(&space, &v, 2.0, budget, 9).unwrap();
            assert!(est.best_ratio >= last);
            assert!(est.best_ratio >= est.lower_bound * (1.0 - 1e-12));
            last = est.best_ratio;
        }
        let a = extremal_search(&space, &v, 2.0, 100, 3).unwrap();
        let b = extremal_search(&space, &v, 2.0, 100, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn search_respects_the_upper_constant() {
        let space = FilteredSpace::dyadic(12, None).unwrap();
        let v = power_weight(&space, -0.5).unwrap();
        let est = extremal_search(&space, &v, 2.0, 300, 0).unwrap();
        assert!(est.best_ratio <= 2.0 * 2.0 * est.ap.characteristic);
        assert!(est.bracket_holds());
    }

    #[test]
    fn sharpness_table() {
        let r = sharpness_experiment(2.0, &[0.0, -0.5], 6, 50, 0).unwrap();
        assert_eq!(r.rows[0].ap_char, 1.0);
        assert!(r.rows[0].best_ratio >= 1.0 && r.rows[0].best_ratio <= 4.0);
        assert!(r.ap_increasing && r.brackets_hold);
        let csv = r.to_csv();
        assert!(csv.starts_with("alpha,ap_char,best_ratio,normalized_ratio,upper_bound\n"));
        assert!(matches!(
            sharpness_experiment(2.0, &[0.5], 4, 0, 0),
            Err(Error::InvalidAlpha(_))
        ));
    }
}
