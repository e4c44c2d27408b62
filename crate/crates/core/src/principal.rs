// SPDX-License-Identifier: Apache-2.0

//! Principal sets: a stopping-time family of nested sets on which the
//! martingale of a nonnegative `h` is trapped between consecutive powers of
//! `a`, with conditional sparsity constant `η = a/(a−1)`.
//!
//! Starting from `P₀ = {a^{k−1} < 𝔼_i h ≤ a^k} ∩ Ω₀`, each principal set `P`
//! (level `K₁`, scale `K₂`) stops at `τ_P = inf{j ≥ K₁ : 𝔼_j h > a^{K₂+1}}` on
//! `P`. The stopped part is sliced by level and scale into the children of
//! `P`; the unstopped part is the exceptional set `E(P)`.
//!
//! A child's scale satisfies `a^{l−1} < 𝔼_j h` with `𝔼_j h > a^{K₂+1}`, so
//! scales increase by at least two per generation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::constants;
use crate::error::{Error, Result};
use crate::filtration::{integrate, FilteredSpace, LeafSet, NodeId, SimpleFunction};
use crate::operators::{tailed_maximal, weighted_maximal, Martingale, StoppingTime};
use crate::scale::{le_rel, power, relative_margin, scale_index};
use crate::weights::{ap_characteristic, dual_weight, Exponent, Weight};

/// Relative slack for the inequality checks.
pub const TOLERANCE: f64 = 1e-12;

/// One principal set of the forest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipalSet {
    /// `K₁(P)`: the level at which `P` is measurable.
    pub k1: usize,
    /// `K₂(P)`: `a^{K₂−1} < 𝔼_{K₁} h ≤ a^{K₂}` on `P`.
    pub k2: i32,
    pub generation: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub support: LeafSet,
    /// `E(P) = P ∩ {τ_P = ∞}`.
    pub exceptional: LeafSet,
    /// `τ_P`, infinite off `P`.
    #[serde(skip)]
    pub tau: StoppingTime,
}

/// The principal sets generated from `P₀`, stored in generation order
/// (`sets[0]` is `P₀`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipalForest {
    pub a: f64,
    pub eta: f64,
    pub base_level: usize,
    pub base_scale: i32,
    pub omega0: LeafSet,
    pub sets: Vec<PrincipalSet>,
    /// Whether `{τ_P = j} ∩ P = {τ = j} ∩ P` held for every set, with `τ`
    /// computed on the whole space and `τ_P` by descending inside `P`.
    pub stopping_forms_agree: bool,
    #[serde(skip)]
    pub h: SimpleFunction,
}

impl PrincipalForest {
    pub fn root(&self) -> &PrincipalSet {
        &self.sets[0]
    }

    pub fn generations(&self) -> usize {
        self.sets.iter().map(|s| s.generation).max().unwrap_or(0) + 1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("forest serializes")
    }
}

fn check_base(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidBase { name, value })
    }
}

fn check_nonnegative(f: &SimpleFunction) -> Result<()> {
    match f.values().iter().position(|&v| v < 0.0) {
        Some(index) => Err(Error::NegativeFunction {
            index,
            value: f.values()[index],
        }),
        None => Ok(()),
    }
}

/// `P₀ = {a^{k−1} < 𝔼_i h ≤ a^k} ∩ Ω₀`.
fn base_set(
    space: &FilteredSpace,
    martingale: &Martingale,
    a: f64,
    level: usize,
    scale: i32,
    omega0: &LeafSet,
) -> LeafSet {
    let (lo, hi) = (power(a, scale - 1), power(a, scale));
    let mut set = LeafSet::empty(space.leaf_count());
    for node in space.nodes(level) {
        let value = martingale.at_node(node);
        if lo < value && value <= hi {
            for leaf in space.node_range(node).filter(|&l| omega0.contains(l)) {
                set.insert(leaf);
            }
        }
    }
    set
}

/// Scales `k` for which `P₀` is nonempty at base level `level`.
pub fn base_scales(
    space: &FilteredSpace,
    h: &SimpleFunction,
    a: f64,
    level: usize,
    omega0: &LeafSet,
) -> Result<Vec<i32>> {
    check_base("a", a)?;
    space.check_level(level)?;
    space.check_set(omega0)?;
    let martingale = Martingale::new(space, h)?;
    let mut scales: Vec<i32> = space
        .nodes(level)
        .filter(|&node| space.node_range(node).any(|l| omega0.contains(l)))
        .map(|node| martingale.at_node(node))
        .filter(|&v| v > 0.0)
        .map(|v| scale_index(v, a))
        .collect();
    scales.sort_unstable();
    scales.dedup();
    Ok(scales)
}

/// `τ_P` by descending the subtrees of the level-`k1` atoms inside `support`.
fn stop_inside(
    space: &FilteredSpace,
    martingale: &Martingale,
    support: &LeafSet,
    k1: usize,
    threshold: f64,
) -> StoppingTime {
    let mut levels = vec![None; space.leaf_count()];
    let mut stack: Vec<NodeId> = space
        .nodes(k1)
        .filter(|&node| support.contains(space.node_range(node).start))
        .collect();
    while let Some(node) = stack.pop() {
        if martingale.at_node(node) > threshold {
            for leaf in space.node_range(node) {
                levels[leaf] = Some(node.level);
            }
        } else {
            stack.extend(space.children(node).map(|index| NodeId {
                level: node.level + 1,
                index,
            }));
        }
    }
    StoppingTime::from_levels(levels)
}

/// `τ = inf{j ≥ k1 : 𝔼_j h > threshold}` evaluated leaf by leaf on the
/// whole space.
fn stop_global(
    space: &FilteredSpace,
    martingale: &Martingale,
    k1: usize,
    threshold: f64,
    leaf: usize,
) -> Option<usize> {
    (k1..=space.depth()).find(|&j| martingale.at_leaf(space, j, leaf) > threshold)
}

/// Builds the principal sets generated by `P₀ = {a^{k−1} < 𝔼_i h ≤ a^k} ∩ Ω₀`.
///
/// Returns `Ok(None)` when `P₀` is empty.
pub fn build_principal_forest(
    space: &FilteredSpace,
    h: &SimpleFunction,
    a: f64,
    level: usize,
    scale: i32,
    omega0: &LeafSet,
) -> Result<Option<PrincipalForest>> {
    check_base("a", a)?;
    space.check_function(h)?;
    check_nonnegative(h)?;
    space.check_level(level)?;
    space.check_set(omega0)?;
    if !space.is_measurable(omega0, level) {
        return Err(Error::NotMeasurable { level });
    }

    let martingale = Martingale::new(space, h)?;
    let p0 = base_set(space, &martingale, a, level, scale, omega0);
    if p0.is_empty() {
        return Ok(None);
    }

    let n = space.leaf_count();
    let mut sets = vec![PrincipalSet {
        k1: level,
        k2: scale,
        generation: 0,
        parent: None,
        children: Vec::new(),
        support: p0,
        exceptional: LeafSet::empty(n),
        tau: StoppingTime::never(n),
    }];
    let mut agree = true;
    let mut next = 0;
    while next < sets.len() {
        let (k1, k2) = (sets[next].k1, sets[next].k2);
        let threshold = power(a, k2 + 1);
        let tau = stop_inside(space, &martingale, &sets[next].support, k1, threshold);

        let mut exceptional = LeafSet::empty(n);
        let mut slices: BTreeMap<(usize, i32), LeafSet> = BTreeMap::new();
        for leaf in sets[next].support.iter() {
            agree &= stop_global(space, &martingale, k1, threshold, leaf) == tau.at(leaf);
            match tau.at(leaf) {
                None => exceptional.insert(leaf),
                Some(j) => {
                    let l = scale_index(martingale.at_leaf(space, j, leaf), a);
                    slices
                        .entry((j, l))
                        .or_insert_with(|| LeafSet::empty(n))
                        .insert(leaf);
                }
            }
        }

        let generation = sets[next].generation + 1;
        for ((j, l), support) in slices {
            let child = sets.len();
            sets[next].children.push(child);
            sets.push(PrincipalSet {
                k1: j,
                k2: l,
                generation,
                parent: Some(next),
                children: Vec::new(),
                support,
                exceptional: LeafSet::empty(n),
                tau: StoppingTime::never(n),
            });
        }
        sets[next].exceptional = exceptional;
        sets[next].tau = tau;
        next += 1;
    }

    Ok(Some(PrincipalForest {
        a,
        eta: a / (a - 1.0),
        base_level: level,
        base_scale: scale,
        omega0: omega0.clone(),
        sets,
        stopping_forms_agree: agree,
        h: h.clone(),
    }))
}

/// Pass/fail of one structural property with the first offending leaf.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    /// `(set index, leaf)` of the first failure.
    pub counterexample: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

struct Tracker {
    name: &'static str,
    counterexample: Option<(usize, usize)>,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            counterexample: None,
        }
    }

    fn require(&mut self, ok: bool, set: usize, leaf: usize) {
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some((set, leaf));
        }
    }

    fn finish(self) -> PropertyCheck {
        PropertyCheck {
            name: self.name,
            passed: self.counterexample.is_none(),
            counterexample: self.counterexample,
        }
    }
}

/// Checks the six structural properties of the forest, the mass bound
/// `μ(P) ≤ η·μ(E(P))`, and the bookkeeping invariants of the construction.
pub fn verify_properties(
    space: &FilteredSpace,
    forest: &PrincipalForest,
) -> Result<PropertyReport> {
    space.check_function(&forest.h)?;
    let a = forest.a;
    let eta = forest.eta;
    let h = &forest.h;
    let martingale = Martingale::new(space, h)?;
    let p0 = &forest.root().support;

    // (1) The exceptional sets are disjoint and tile P₀.
    let mut partition = Tracker::new("(1) exceptional sets partition P0");
    let mut owner: Vec<Option<usize>> = vec![None; space.leaf_count()];
    for (idx, set) in forest.sets.iter().enumerate() {
        for leaf in set.exceptional.iter() {
            partition.require(owner[leaf].is_none() && p0.contains(leaf), idx, leaf);
            owner[leaf] = Some(idx);
        }
    }
    for leaf in p0.iter() {
        partition.require(owner[leaf].is_some(), 0, leaf);
    }

    let mut measurable = Tracker::new("(2) P is F_K1-measurable");
    let mut sparsity = Tracker::new("(3) conditional sparsity");
    let mut trapped = Tracker::new("(4) a^(K2-1) < E_K1 h <= a^K2 on P");
    let mut exceptional_max = Tracker::new("(5) sup_j E_j(h 1_P) <= a^(K2+1) on E(P)");
    let mut pre_stop = Tracker::new("(6) E_j h <= a^(K2+1) for K1 <= j < tau_P");
    let mut mass = Tracker::new("mass bound mu(P) <= eta mu(E(P))");
    let mut nesting = Tracker::new("children nested with increasing level and scale");
    let mut structure = Tracker::new("E(P) = P minus children");

    for (idx, set) in forest.sets.iter().enumerate() {
        let first = set.support.iter().next().unwrap_or(0);

        if !space.is_measurable(&set.support, set.k1) {
            measurable.require(false, idx, first);
        }

        // Conditional sparsity on each level-K1 atom of P.
        for node in space.nodes(set.k1) {
            let range = space.node_range(node);
            if !set.support.contains(range.start) {
                continue;
            }
            let kept: f64 = range
                .clone()
                .filter(|&l| set.exceptional.contains(l))
                .map(|l| space.leaf_measures()[l])
                .sum();
            let ratio = kept / space.node_measure(node);
            sparsity.require(le_rel(1.0, eta * ratio, TOLERANCE), idx, range.start);
        }

        let (lo, hi) = (power(a, set.k2 - 1), power(a, set.k2));
        for leaf in set.support.iter() {
            let value = martingale.at_leaf(space, set.k1, leaf);
            trapped.require(lo < value && le_rel(value, hi, TOLERANCE), idx, leaf);
        }

        let cap = power(a, set.k2 + 1);
        let local = tailed_maximal(space, &h.restrict(&set.support), forest.base_level)?;
        for leaf in set.exceptional.iter() {
            exceptional_max.require(le_rel(local.values()[leaf], cap, TOLERANCE), idx, leaf);
        }

        for leaf in set.support.iter() {
            let stop = set.tau.at(leaf).unwrap_or(space.depth() + 1);
            for j in set.k1..stop {
                pre_stop.require(
                    le_rel(martingale.at_leaf(space, j, leaf), cap, TOLERANCE),
                    idx,
                    leaf,
                );
            }
        }

        let mu_p = space.measure_of(&set.support);
        let mu_e = space.measure_of(&set.exceptional);
        mass.require(le_rel(mu_p, eta * mu_e, TOLERANCE), idx, first);

        let mut covered = set.exceptional.clone();
        for &c in &set.children {
            let child = &forest.sets[c];
            let leaf = child.support.iter().next().unwrap_or(first);
            nesting.require(
                child.support.is_subset(&set.support)
                    && child.k1 > set.k1
                    && child.k2 >= set.k2 + 2
                    && child.generation == set.generation + 1,
                c,
                leaf,
            );
            structure.require(covered.is_disjoint(&child.support), c, leaf);
            covered = covered.union(&child.support);
        }
        structure.require(covered == set.support, idx, first);
    }

    let mut stopping = Tracker::new("tau_P and tau agree on P");
    stopping.require(forest.stopping_forms_agree, 0, 0);

    Ok(PropertyReport {
        checks: vec![
            partition.finish(),
            measurable.finish(),
            sparsity.finish(),
            trapped.finish(),
            exceptional_max.finish(),
            pre_stop.finish(),
            mass.finish(),
            nesting.finish(),
            structure.finish(),
            stopping.finish(),
        ],
    })
}

/// Result of the pointwise domination of the tailed maximal function by the
/// principal-set sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    /// `*M_i(h)χ_{P₀} = *M_i(hχ_{P₀})χ_{P₀}`.
    pub localization_holds: bool,
    /// `*M_i(hχ_{P₀}) ≤ a²·a^{K₂(P)−1}` on every `E(P)`.
    pub domination_holds: bool,
    /// Largest `*M_i(hχ_{P₀}) / (a²·a^{K₂(P)−1})` seen on `P₀`.
    pub max_ratio: f64,
    pub counterexample: Option<usize>,
}

impl DominationReport {
    pub fn passed(&self) -> bool {
        self.localization_holds && self.domination_holds
    }
}

pub fn lemma_domination_check(
    space: &FilteredSpace,
    forest: &PrincipalForest,
) -> Result<DominationReport> {
    let i = forest.base_level;
    let p0 = &forest.root().support;
    let full = tailed_maximal(space, &forest.h, i)?;
    let local = tailed_maximal(space, &forest.h.restrict(p0), i)?;

    let mut counterexample = None;
    let mut localization_holds = true;
    for leaf in p0.iter() {
        let (x, y) = (full.values()[leaf], local.values()[leaf]);
        if (x - y).abs() > TOLERANCE * x.abs().max(y.abs()) {
            localization_holds = false;
            counterexample.get_or_insert(leaf);
        }
    }

    let a = forest.a;
    let mut domination_holds = true;
    let mut max_ratio = 0.0f64;
    for set in &forest.sets {
        let bound = a * a * power(a, set.k2 - 1);
        for leaf in set.exceptional.iter() {
            let value = local.values()[leaf];
            max_ratio = max_ratio.max(value / bound);
            if !le_rel(value, bound, TOLERANCE) {
                domination_holds = false;
                counterexample.get_or_insert(leaf);
            }
        }
    }
    Ok(DominationReport {
        localization_holds,
        domination_holds,
        max_ratio,
        counterexample,
    })
}

/// Both sides of the slice estimate for one `(i, k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceEstimate {
    pub level: usize,
    pub scale: i32,
    /// `(∫_{P₀} *M_i(fσχ_{P₀})^p v)^{1/p}`.
    pub lhs: f64,
    /// `a²η^{p′−1}p′[v]^{p′/p}(∫_{P₀} f^pσ)^{1/p}`.
    pub rhs: f64,
    /// `∫_{P₀} *M_i(fσ)^p v ≤ a^{2p} Σ_P a^{p(K₂−1)} v(E(P))` held.
    pub principal_sum_holds: bool,
    /// Every per-set estimate
    /// `a^{p(K₂−1)} v(E(P)) ≤ η^{p(p′−1)}[v]^{p′} ∫_{E(P)} 𝔼^σ_{K₁}(f)^p σ
    ///  ≤ η^{p(p′−1)}[v]^{p′} ∫_{E(P)} M^σ(fχ_{P₀})^p σ` held.
    pub per_set_holds: bool,
    pub forest_properties_hold: bool,
}

impl SliceEstimate {
    pub fn margin(&self) -> f64 {
        relative_margin(self.lhs, self.rhs)
    }

    pub fn passed(&self) -> bool {
        le_rel(self.lhs, self.rhs, TOLERANCE)
            && self.principal_sum_holds
            && self.per_set_holds
            && self.forest_properties_hold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedEstimateReport {
    pub p: f64,
    pub a: f64,
    pub eta: f64,
    pub ap: f64,
    /// `a²η^{p′−1}p′[v]^{p′/p}`.
    pub constant: f64,
    pub slices: Vec<SliceEstimate>,
    /// Per base level: `Σ_k lhs_k^p ≤ constant^p ∫ f^pσ` held.
    pub level_sums_hold: bool,
    /// `‖M(fσ)‖_{L^p(v)}`.
    pub global_lhs: f64,
    /// `constant·(∫ f^pσ)^{1/p}`.
    pub global_rhs: f64,
}

impl WeightedEstimateReport {
    pub fn global_margin(&self) -> f64 {
        relative_margin(self.global_lhs, self.global_rhs)
    }

    pub fn passed(&self) -> bool {
        self.level_sums_hold
            && le_rel(self.global_lhs, self.global_rhs, TOLERANCE)
            && self.slices.iter().all(SliceEstimate::passed)
    }
}

/// Evaluates the principal-set route to the weighted bound:
/// per slice `(i, k)`,
/// `(∫_{P₀} *M_i(fσχ_{P₀})^p v)^{1/p} ≤ a²η^{p′−1}p′[v]^{p′/p}(∫_{P₀} f^pσ)^{1/p}`,
/// and globally `‖M(fσ)‖_{L^p(v)} ≤ a²η^{p′−1}p′[v]^{p′/p}‖f‖_{L^p(σ)}`.
pub fn principal_weighted_estimate(
    space: &FilteredSpace,
    f: &SimpleFunction,
    v: &Weight,
    p: f64,
    a: f64,
) -> Result<WeightedEstimateReport> {
    let exponent = Exponent::new(p)?;
    check_base("a", a)?;
    space.check_function(f)?;
    check_nonnegative(f)?;
    space.check_function(v.as_function())?;
    let pc = exponent.conjugate();
    let eta = a / (a - 1.0);
    let sigma = dual_weight(v, p)?;
    let ap = ap_characteristic(space, v, p)?.characteristic;
    let constant = a * a * eta.powf(pc - 1.0) * pc * ap.powf(pc / p);
    let sparse_factor = eta.powf(p * (pc - 1.0)) * ap.powf(pc);

    let f_sigma = f.mul(sigma.as_function());
    let full = LeafSet::full(space.leaf_count());
    let weighted_pow = |g: &SimpleFunction, w: &[f64], set: &LeafSet| -> f64 {
        set.iter()
            .map(|l| g.values()[l].abs().powf(p) * w[l] * space.leaf_measures()[l])
            .sum::<f64>()
    };

    let mut slices = Vec::new();
    let mut level_sums_hold = true;
    let martingale = Martingale::new(space, &f_sigma)?;
    for level in 0..=space.depth() {
        let mut level_lhs = 0.0;
        let mut level_rhs = 0.0;
        for scale in base_scales(space, &f_sigma, a, level, &full)? {
            let p0 = base_set(space, &martingale, a, level, scale, &full);
            let h = f_sigma.restrict(&p0);
            let forest = build_principal_forest(space, &h, a, level, scale, &full)?
                .expect("scale was taken from a nonempty slice");
            debug_assert_eq!(forest.root().support, p0);
            let forest_properties_hold = verify_properties(space, &forest)?.passed()
                && lemma_domination_check(space, &forest)?.passed();

            let tailed = tailed_maximal(space, &h, level)?;
            let lhs_p = weighted_pow(&tailed, v.values(), &p0);
            let f_pow = weighted_pow(f, sigma.values(), &p0);

            let f_local = f.restrict(&p0);
            let m_sigma = weighted_maximal(space, &f_local, &sigma)?;
            let sigma_martingale = Martingale::weighted(space, &f_local, &sigma)?;
            let mut principal_sum = 0.0;
            let mut per_set_holds = true;
            for set in &forest.sets {
                let level_value = power(a, set.k2 - 1).powf(p);
                let v_mass = integrate(space, v.as_function(), &set.exceptional)?;
                principal_sum += level_value * v_mass;
                let averaged: f64 = set
                    .exceptional
                    .iter()
                    .map(|l| {
                        sigma_martingale.at_leaf(space, set.k1, l).powf(p)
                            * sigma.values()[l]
                            * space.leaf_measures()[l]
                    })
                    .sum();
                let maximal = weighted_pow(&m_sigma, sigma.values(), &set.exceptional);
                per_set_holds &= le_rel(level_value * v_mass, sparse_factor * averaged, TOLERANCE)
                    && le_rel(averaged, maximal, TOLERANCE);
            }
            let principal_sum_holds = le_rel(lhs_p, a.powf(2.0 * p) * principal_sum, TOLERANCE);

            level_lhs += lhs_p;
            level_rhs += f_pow;
            slices.push(SliceEstimate {
                level,
                scale,
                lhs: lhs_p.powf(1.0 / p),
                rhs: constant * f_pow.powf(1.0 / p),
                principal_sum_holds,
                per_set_holds,
                forest_properties_hold,
            });
        }
        level_sums_hold &= le_rel(level_lhs, constant.powf(p) * level_rhs, TOLERANCE);
    }

    let m = crate::operators::doob_maximal(space, &f_sigma)?;
    let global_lhs = weighted_pow(&m, v.values(), &full).powf(1.0 / p);
    let global_rhs = constant * weighted_pow(f, sigma.values(), &full).powf(1.0 / p);
    Ok(WeightedEstimateReport {
        p,
        a,
        eta,
        ap,
        constant,
        slices,
        level_sums_hold,
        global_lhs,
        global_rhs,
    })
}

/// The default base `a₀(p) = (2p−1)/(2p−2)`.
pub fn default_base(p: f64) -> Result<f64> {
    constants::a0(p)
}
