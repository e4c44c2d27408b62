// SPDX-License-Identifier: Apache-2.0

//! Stopping-time decomposition of the weighted Doob bound.
//!
//! For `b > 1` and each scale `k`, `τ_k = inf{n : |𝔼_n f| > b^k}`. The sets
//!
//! ```text
//! A_{k,j} = {τ_k < ∞} ∩ {b^j < 𝔼(σ|F_{τ_k}) ≤ b^{j+1}}
//! B_{k,j} = {τ_k < ∞, τ_{k+1} = ∞} ∩ {b^j < 𝔼(σ|F_{τ_k}) ≤ b^{j+1}}
//! ```
//!
//! carry the discrete measure `ϑ(k,j) = ∫_{B_{k,j}} 𝔼^v(v^{−1}|F_{τ_k})^{p′} v dμ`
//! and the values `Tf(k,j) = min_{A_{k,j}} |𝔼^σ(fσ^{−1}|F_{τ_k})|^p`.
//! Conditional expectations at `F_{τ_k}` are read off the level-`τ_k(x)` atom
//! containing each leaf `x`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::constants;
use crate::error::{Error, Result};
use crate::filtration::{FilteredSpace, LeafSet, SimpleFunction};
use crate::operators::{doob_maximal, stopping_time, weighted_maximal, Martingale, StoppingTime};
use crate::scale::{close_rel, le_rel, power, relative_margin, scale_index};
use crate::weights::{ap_characteristic, dual_weight, Exponent, Weight};

/// Relative slack for the chain inequalities.
pub const TOLERANCE: f64 = 1e-12;

/// The bases at which the `b → 1+` limit is probed.
pub const B_GRID: [f64; 6] = [2.0, 1.5, 1.2, 1.1, 1.05, 1.01];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub k: i32,
    pub j: i32,
    pub a_set: LeafSet,
    pub b_set: LeafSet,
    /// `μ(B_{k,j})`.
    pub mass: f64,
    pub vartheta: f64,
    pub t: f64,
    /// `∫_{B_{k,j}} (Mf)^p v dμ`.
    pub maximal_mass: f64,
    /// `b^{2p}[v]^{p′}·T·ϑ`, the per-cell bound on `maximal_mass`.
    pub bound: f64,
}

impl Cell {
    pub fn margin(&self) -> f64 {
        relative_margin(self.maximal_mass, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingDecomposition {
    pub b: f64,
    pub p: f64,
    pub ap: f64,
    /// Scales `k` with `{b^k < Mf ≤ b^{k+1}}` nonempty.
    pub scales: Vec<i32>,
    /// `τ_k` for every `k` in `scales` and `k + 1`.
    pub tau: BTreeMap<i32, StoppingTime>,
    /// Cells with nonempty `A_{k,j}`, ordered by `(k, j)`.
    pub cells: Vec<Cell>,
}

impl StoppingDecomposition {
    pub fn cell(&self, k: i32, j: i32) -> Option<&Cell> {
        self.cells.iter().find(|c| c.k == k && c.j == j)
    }

    /// `Σ T(k,j)·ϑ(k,j) = ∫_X Tf dϑ`.
    pub fn integral(&self) -> f64 {
        self.cells.iter().map(|c| c.t * c.vartheta).sum()
    }

    /// `k,j,mass,vartheta,T,margin` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,j,mass,vartheta,T,margin\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.k,
                c.j,
                crate::emit::fmt_f64(c.mass),
                crate::emit::fmt_f64(c.vartheta),
                crate::emit::fmt_f64(c.t),
                crate::emit::fmt_f64(c.margin())
            ));
        }
        out
    }
}

fn check_base(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidBase { name, value })
    }
}

struct Ingredients {
    sigma: Weight,
    maximal: SimpleFunction,
    f: Martingale,
    sigma_avg: Martingale,
    /// `𝔼^σ(fσ^{−1})`.
    f_over_sigma: Martingale,
    /// `𝔼^v(v^{−1})`.
    v_inverse: Martingale,
    v_avg: Martingale,
}

fn ingredients(
    space: &FilteredSpace,
    f: &SimpleFunction,
    v: &Weight,
    p: f64,
) -> Result<Ingredients> {
    let sigma = dual_weight(v, p)?;
    let f_over_sigma = SimpleFunction::new(
        f.values()
            .iter()
            .zip(sigma.values())
            .map(|(f, s)| f / s)
            .collect(),
    )?;
    let v_inverse = SimpleFunction::new(v.values().iter().map(|v| 1.0 / v).collect())?;
    Ok(Ingredients {
        maximal: doob_maximal(space, f)?,
        f: Martingale::new(space, f)?,
        sigma_avg: Martingale::new(space, sigma.as_function())?,
        f_over_sigma: Martingale::weighted(space, &f_over_sigma, &sigma)?,
        v_inverse: Martingale::weighted(space, &v_inverse, v)?,
        v_avg: Martingale::new(space, v.as_function())?,
        sigma,
    })
}

pub fn build_decomposition(
    space: &FilteredSpace,
    f: &SimpleFunction,
    v: &Weight,
    p: f64,
    b: f64,
) -> Result<StoppingDecomposition> {
    let exponent = Exponent::new(p)?;
    check_base("b", b)?;
    space.check_function(f)?;
    space.check_function(v.as_function())?;
    let pc = exponent.conjugate();
    let ap = ap_characteristic(space, v, p)?.characteristic;
    let ing = ingredients(space, f, v, p)?;
    let mu = space.leaf_measures();

    let mut scales: Vec<i32> = ing
        .maximal
        .values()
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| scale_index(m, b) - 1)
        .collect();
    scales.sort_unstable();
    scales.dedup();

    let mut tau = BTreeMap::new();
    for &k in &scales {
        for key in [k, k + 1] {
            tau.entry(key).or_insert_with(|| {
                let threshold = power(b, key);
                stopping_time(space, |node| ing.f.at_node(node).abs() > threshold)
            });
        }
    }

    let n = space.leaf_count();
    let factor = b.powf(2.0 * p) * ap.powf(pc);
    let mut cells = Vec::new();
    for &k in &scales {
        let tau_k = &tau[&k];
        let tau_next = &tau[&(k + 1)];
        let mut grouped: BTreeMap<i32, (LeafSet, LeafSet)> = BTreeMap::new();
        for leaf in 0..n {
            let Some(level) = tau_k.at(leaf) else {
                continue;
            };
            let s = ing.sigma_avg.at_leaf(space, level, leaf);
            let j = scale_index(s, b) - 1;
            let entry = grouped
                .entry(j)
                .or_insert_with(|| (LeafSet::empty(n), LeafSet::empty(n)));
            entry.0.insert(leaf);
            if !tau_next.is_finite(leaf) {
                entry.1.insert(leaf);
            }
        }
        for (j, (a_set, b_set)) in grouped {
            let t = a_set
                .iter()
                .map(|leaf| {
                    let level = tau_k.at(leaf).expect("A cells lie in {tau_k < inf}");
                    ing.f_over_sigma.at_leaf(space, level, leaf).abs().powf(p)
                })
                .fold(f64::INFINITY, f64::min);
            let mut vartheta = 0.0;
            let mut maximal_mass = 0.0;
            for leaf in b_set.iter() {
                let level = tau_k.at(leaf).expect("B cells lie in {tau_k < inf}");
                let w = v.values()[leaf] * mu[leaf];
                vartheta += ing.v_inverse.at_leaf(space, level, leaf).powf(pc) * w;
                maximal_mass += ing.maximal.values()[leaf].powf(p) * w;
            }
            cells.push(Cell {
                k,
                j,
                mass: space.measure_of(&b_set),
                a_set,
                b_set,
                vartheta,
                t,
                maximal_mass,
                bound: factor * t * vartheta,
            });
        }
    }

    Ok(StoppingDecomposition {
        b,
        p,
        ap,
        scales,
        tau,
        cells,
    })
}

/// A named check with its first counterexample leaf, if any.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedCheck {
    pub name: &'static str,
    pub passed: bool,
    pub counterexample: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub checks: Vec<NamedCheck>,
}

impl PartitionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&NamedCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

fn first_difference(x: &LeafSet, y: &LeafSet) -> Option<usize> {
    (0..x.len()).find(|&l| x.contains(l) != y.contains(l))
}

/// Checks `{b^k < Mf ≤ b^{k+1}} = {τ_k < ∞, τ_{k+1} = ∞} = ⋃_j B_{k,j}` for
/// every scale, disjointness of the `B` cells, `B ⊆ A`, and that each `A_{k,j}`
/// is a union of stopped atoms.
pub fn verify_partition(
    dec: &StoppingDecomposition,
    space: &FilteredSpace,
    f: &SimpleFunction,
) -> Result<PartitionReport> {
    space.check_function(f)?;
    let n = space.leaf_count();
    let maximal = doob_maximal(space, f)?;
    let b = dec.b;

    let mut level_sets = None;
    let mut stopping_sets = None;
    let mut union_sets = None;
    let mut covered = LeafSet::empty(n);
    for &k in &dec.scales {
        let (lo, hi) = (power(b, k), power(b, k + 1));
        let band = LeafSet::from_mask(
            maximal
                .values()
                .iter()
                .map(|&m| lo < m && m <= hi)
                .collect(),
        );
        let stopped = LeafSet::from_mask(
            (0..n)
                .map(|l| dec.tau[&k].is_finite(l) && !dec.tau[&(k + 1)].is_finite(l))
                .collect(),
        );
        let union = dec
            .cells
            .iter()
            .filter(|c| c.k == k)
            .fold(LeafSet::empty(n), |acc, c| acc.union(&c.b_set));
        if level_sets.is_none() {
            level_sets = first_difference(&band, &stopped);
        }
        if union_sets.is_none() {
            union_sets = first_difference(&stopped, &union);
        }
        covered = covered.union(&band);
        if stopping_sets.is_none() {
            stopping_sets =
                (0..n).find(|&l| dec.tau[&k].is_finite(l) != (maximal.values()[l] > lo));
        }
    }
    let positive = LeafSet::from_mask(maximal.values().iter().map(|&m| m > 0.0).collect());

    let mut owner = vec![false; n];
    let mut disjoint = None;
    let mut nested = None;
    let mut measurable = None;
    for cell in &dec.cells {
        for leaf in cell.b_set.iter() {
            if owner[leaf] {
                disjoint.get_or_insert(leaf);
            }
            owner[leaf] = true;
        }
        if !cell.b_set.is_subset(&cell.a_set) {
            nested.get_or_insert(
                first_difference(&cell.b_set, &cell.b_set.intersection(&cell.a_set)).unwrap_or(0),
            );
        }
        let tau_k = &dec.tau[&cell.k];
        for leaf in cell.a_set.iter() {
            let Some(level) = tau_k.at(leaf) else {
                measurable.get_or_insert(leaf);
                continue;
            };
            let atom = space.node_of_leaf(level, leaf);
            if space
                .node_range(atom)
                .any(|l| !cell.a_set.contains(l) || tau_k.at(l) != Some(level))
            {
                measurable.get_or_insert(leaf);
            }
        }
    }
    let adapted = dec.tau.values().all(|t| t.is_adapted(space));

    let check = |name, counterexample: Option<usize>| NamedCheck {
        name,
        passed: counterexample.is_none(),
        counterexample,
    };
    Ok(PartitionReport {
        checks: vec![
            check("{tau_k < inf} = {Mf > b^k}", stopping_sets),
            check(
                "{b^k < Mf <= b^(k+1)} = {tau_k < inf, tau_(k+1) = inf}",
                level_sets,
            ),
            check(
                "{tau_k < inf, tau_(k+1) = inf} = union_j B_(k,j)",
                union_sets,
            ),
            check(
                "level sets cover {Mf > 0}",
                first_difference(&covered, &positive),
            ),
            check("B cells pairwise disjoint", disjoint),
            check("B_(k,j) subset of A_(k,j)", nested),
            check("A_(k,j) is F_tau_k-measurable", measurable),
            NamedCheck {
                name: "stopping times adapted",
                passed: adapted,
                counterexample: None,
            },
        ],
    })
}

/// One inequality of the chain with both sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

impl Inequality {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Self {
            name,
            lhs,
            rhs,
            passed: le_rel(lhs, rhs, TOLERANCE),
        }
    }

    pub fn margin(&self) -> f64 {
        relative_margin(self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub b: f64,
    pub p: f64,
    pub ap: f64,
    /// The chain `∫(Mf)^p v ≤ b^{2p}[v]^{p′}∫Tf dϑ ≤ b^{2p}[v]^{p′}p^{p′}∫M^σ(fσ^{−1})^pσ
    /// ≤ b^{2p}p^{p′}p′^p[v]^{p′}∫|f|^p v`, in order.
    pub chain: Vec<Inequality>,
    /// Side conditions: per-cell bounds, the change-of-measure identity, the
    /// `A_p` bound at stopping times, the distribution-function estimate and
    /// the total mass of `ϑ`.
    pub side: Vec<NamedCheck>,
    /// `(b, b²·ψ(p)p′[v]^{1/(p−1)})` over the probe grid.
    pub b_grid: Vec<(f64, f64)>,
    /// `ψ(p)·p′·[v]^{1/(p−1)}`.
    pub limit_constant: f64,
    pub b_grid_converges: bool,
    /// `‖Mf‖_{L^p(v)}/‖f‖_{L^p(v)}`, absent for `f = 0`.
    pub ratio: Option<f64>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.chain.iter().all(|i| i.passed)
            && self.side.iter().all(|c| c.passed)
            && self.b_grid_converges
            && self
                .ratio
                .is_none_or(|r| le_rel(r, self.limit_constant, TOLERANCE))
    }

    pub fn first_failure(&self) -> Option<String> {
        if let Some(i) = self.chain.iter().find(|i| !i.passed) {
            return Some(format!("{}: {} > {}", i.name, i.lhs, i.rhs));
        }
        if let Some(c) = self.side.iter().find(|c| !c.passed) {
            return Some(format!("{} (leaf {:?})", c.name, c.counterexample));
        }
        if !self.b_grid_converges {
            return Some("b-grid constants do not decrease to the limit".into());
        }
        match self.ratio {
            Some(r) if !le_rel(r, self.limit_constant, TOLERANCE) => {
                Some(format!("ratio {r} exceeds {}", self.limit_constant))
            }
            _ => None,
        }
    }
}

/// Evaluates every step of the stopping-time chain on `dec`.
pub fn verify_chain(
    dec: &StoppingDecomposition,
    space: &FilteredSpace,
    f: &SimpleFunction,
    v: &Weight,
    p: f64,
) -> Result<ChainReport> {
    let exponent = Exponent::new(p)?;
    let pc = exponent.conjugate();
    let b = dec.b;
    let ap = ap_characteristic(space, v, p)?.characteristic;
    let ing = ingredients(space, f, v, p)?;
    let mu = space.leaf_measures();
    let n = space.leaf_count();
    let sigma = &ing.sigma;
    let integral = |values: &[f64], w: &[f64], e: f64| -> f64 {
        (0..n)
            .map(|l| values[l].abs().powf(e) * w[l] * mu[l])
            .sum::<f64>()
    };

    let f_over_sigma = SimpleFunction::new(
        f.values()
            .iter()
            .zip(sigma.values())
            .map(|(f, s)| f / s)
            .collect(),
    )?;
    let m_sigma = weighted_maximal(space, &f_over_sigma, sigma)?;

    let bp = b.powf(2.0 * p);
    let apc = ap.powf(pc);
    let s1 = integral(ing.maximal.values(), v.values(), p);
    let s2 = bp * apc * dec.integral();
    let s3 = bp * apc * p.powf(pc) * integral(m_sigma.values(), sigma.values(), p);
    let s4 = bp * p.powf(pc) * pc.powf(p) * apc * integral(f.values(), v.values(), p);
    let chain = vec![
        Inequality::new("int (Mf)^p v <= b^2p [v]^p' int Tf dtheta", s1, s2),
        Inequality::new(
            "b^2p [v]^p' int Tf dtheta <= b^2p [v]^p' p^p' int M^s(f/s)^p s",
            s2,
            s3,
        ),
        Inequality::new(
            "b^2p [v]^p' p^p' int M^s(f/s)^p s <= b^2p p^p' p'^p [v]^p' int |f|^p v",
            s3,
            s4,
        ),
    ];

    let mut side = Vec::new();
    let mut push = |name, counterexample: Option<usize>| {
        side.push(NamedCheck {
            name,
            passed: counterexample.is_none(),
            counterexample,
        })
    };

    // Per cell: ∫_B (Mf)^p v ≤ b^p b^{kp} v(B) ≤ b^p T ∫_B 𝔼(σ|F_τ)^p v ≤ b^{2p}[v]^{p′} T ϑ.
    let mut bad = None;
    for cell in &dec.cells {
        let tau_k = &dec.tau[&cell.k];
        let mut v_mass = 0.0;
        let mut sigma_mass = 0.0;
        for leaf in cell.b_set.iter() {
            let level = tau_k.at(leaf).unwrap();
            let w = v.values()[leaf] * mu[leaf];
            v_mass += w;
            sigma_mass += ing.sigma_avg.at_leaf(space, level, leaf).powf(p) * w;
        }
        let level_value = power(b, cell.k).powf(p);
        let ok = le_rel(
            cell.maximal_mass,
            b.powf(p) * level_value * v_mass,
            TOLERANCE,
        ) && le_rel(
            level_value * v_mass,
            b.powf(p) * cell.t * sigma_mass,
            TOLERANCE,
        ) && le_rel(b.powf(p) * cell.t * sigma_mass, cell.bound, TOLERANCE);
        if !ok {
            bad.get_or_insert(cell.b_set.iter().next().unwrap_or(0));
        }
    }
    push("per-cell bound", bad);

    // 𝔼(f|F_τ) = 𝔼^σ(fσ^{−1}|F_τ)·𝔼(σ|F_τ) and 1 ≤ 𝔼(v|F_τ)𝔼(σ|F_τ)^{p−1} ≤ [v].
    let mut identity = None;
    let mut ap_bound = None;
    for tau in dec.tau.values() {
        for leaf in 0..n {
            let Some(level) = tau.at(leaf) else { continue };
            let lhs = ing.f.at_leaf(space, level, leaf);
            let s = ing.sigma_avg.at_leaf(space, level, leaf);
            let rhs = ing.f_over_sigma.at_leaf(space, level, leaf) * s;
            if !(close_rel(lhs, rhs, TOLERANCE) || (lhs - rhs).abs() <= 1e-300) {
                identity.get_or_insert(leaf);
            }
            let product = ing.v_avg.at_leaf(space, level, leaf) * s.powf(p - 1.0);
            if !(le_rel(1.0, product, 1e-12) && le_rel(product, ap, 1e-12)) {
                ap_bound.get_or_insert(leaf);
            }
        }
    }
    push("E(f|F_tau) = E^s(f/s|F_tau) E(s|F_tau)", identity);
    push("1 <= E(v|F_tau) E(s|F_tau)^(p-1) <= [v]", ap_bound);

    // Distribution functions: for each level λ of Tf,
    // ϑ{Tf > λ} ≤ ∫_G M^v(v^{−1}χ_G)^{p′} v ≤ p^{p′} σ{M^σ(fσ^{−1})^p > λ}, with G = ⋃ A over {Tf > λ}.
    let mut lambdas: Vec<f64> = dec.cells.iter().map(|c| c.t).collect();
    lambdas.push(0.0);
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let mut distribution = None;
    for &lambda in &lambdas {
        let active: Vec<&Cell> = dec.cells.iter().filter(|c| c.t > lambda).collect();
        if active.is_empty() {
            continue;
        }
        let measure: f64 = active.iter().map(|c| c.vartheta).sum();
        let g = active
            .iter()
            .fold(LeafSet::empty(n), |acc, c| acc.union(&c.a_set));
        let g_fn = SimpleFunction::new(
            (0..n)
                .map(|l| {
                    if g.contains(l) {
                        1.0 / v.values()[l]
                    } else {
                        0.0
                    }
                })
                .collect(),
        )?;
        let m_v = weighted_maximal(space, &g_fn, v)?;
        let middle: f64 = g
            .iter()
            .map(|l| m_v.values()[l].powf(pc) * v.values()[l] * mu[l])
            .sum();
        let level_set = LeafSet::from_mask(
            m_sigma
                .values()
                .iter()
                .map(|&m| m.powf(p) > lambda)
                .collect(),
        );
        let right = p.powf(pc)
            * level_set
                .iter()
                .map(|l| sigma.values()[l] * mu[l])
                .sum::<f64>();
        if !(g.is_subset(&level_set)
            && le_rel(measure, middle, TOLERANCE)
            && le_rel(middle, right, TOLERANCE))
        {
            distribution.get_or_insert(g.iter().next().unwrap_or(0));
        }
    }
    push("distribution estimate for Tf", distribution);

    let total: f64 = dec.cells.iter().map(|c| c.vartheta).sum();
    let ones = SimpleFunction::new(v.values().iter().map(|v| 1.0 / v).collect())?;
    let cap = integral(weighted_maximal(space, &ones, v)?.values(), v.values(), pc);
    let theta_ok = dec.cells.iter().all(|c| c.vartheta >= 0.0) && le_rel(total, cap, TOLERANCE);
    push(
        "0 <= vartheta, total <= int M^v(1/v)^p' v",
        (!theta_ok).then_some(0),
    );

    let limit_constant = constants::weighted_upper_constant(p, ap)?;
    let b_grid: Vec<(f64, f64)> = B_GRID
        .iter()
        .map(|&b| {
            (
                b,
                (bp_of(b, p) * p.powf(pc) * pc.powf(p) * apc).powf(1.0 / p),
            )
        })
        .collect();
    let b_grid_converges = b_grid.windows(2).all(|w| w[1].1 < w[0].1)
        && b_grid
            .iter()
            .all(|&(_, c)| le_rel(limit_constant, c, TOLERANCE))
        && b_grid.last().is_some_and(|&(b, c)| {
            le_rel(c - limit_constant, (b * b - 1.0) * limit_constant, 1e-9)
        });

    let norm_f = integral(f.values(), v.values(), p).powf(1.0 / p);
    let ratio = (norm_f > 0.0).then(|| s1.powf(1.0 / p) / norm_f);

    Ok(ChainReport {
        b,
        p,
        ap,
        chain,
        side,
        b_grid,
        limit_constant,
        b_grid_converges,
        ratio,
    })
}

fn bp_of(b: f64, p: f64) -> f64 {
    b.powf(2.0 * p)
}
