// SPDX-License-Identifier: Apache-2.0

//! Conditional expectations, the Doob maximal operator and its tailed and
//! weighted variants, and stopping times on a [`FilteredSpace`].
//!
//! Every operator works on node averages: sums are accumulated bottom-up
//! through the parent links, and maxima are propagated top-down, so a full
//! maximal function costs one pass over the nodes of the tree.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::filtration::{FilteredSpace, NodeId, SimpleFunction};
use crate::weights::Weight;

/// Node averages of `values` (with density `density` when given) at every
/// level, indexed `[level][node]`.
///
/// The finest level is returned verbatim so that `𝔼_L f = f` holds exactly.
pub(crate) fn level_averages(
    space: &FilteredSpace,
    values: &[f64],
    density: Option<&[f64]>,
) -> Vec<Vec<f64>> {
    let depth = space.depth();
    let mu = space.leaf_measures();
    let mut sums: Vec<Vec<f64>> = vec![Vec::new(); depth + 1];
    let mut masses: Vec<Vec<f64>> = vec![Vec::new(); depth + 1];
    sums[depth] = match density {
        None => values.iter().zip(mu).map(|(v, m)| v * m).collect(),
        Some(w) => values
            .iter()
            .zip(w)
            .zip(mu)
            .map(|((v, w), m)| v * w * m)
            .collect(),
    };
    masses[depth] = match density {
        None => mu.to_vec(),
        Some(w) => w.iter().zip(mu).map(|(w, m)| w * m).collect(),
    };
    for level in (0..depth).rev() {
        let parents = space.parents(level + 1);
        let mut s = vec![0.0; space.node_count(level)];
        let mut m = vec![0.0; space.node_count(level)];
        for (child, &p) in parents.iter().enumerate() {
            s[p] += sums[level + 1][child];
            m[p] += masses[level + 1][child];
        }
        sums[level] = s;
        masses[level] = m;
    }
    let mut averages: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(masses)
        .map(|(s, m)| s.iter().zip(&m).map(|(s, m)| s / m).collect())
        .collect();
    averages[depth] = values.to_vec();
    averages
}

/// Copies node values at `level` out to the leaves.
pub(crate) fn expand(space: &FilteredSpace, level: usize, node_values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; space.leaf_count()];
    for node in space.nodes(level) {
        let value = node_values[node.index];
        for leaf in space.node_range(node) {
            out[leaf] = value;
        }
    }
    out
}

/// Per-leaf maximum over levels `from..=depth` of `|averages[level]|`.
pub(crate) fn running_max(space: &FilteredSpace, averages: &[Vec<f64>], from: usize) -> Vec<f64> {
    let mut current: Vec<f64> = averages[from].iter().map(|v| v.abs()).collect();
    for (level, row) in averages.iter().enumerate().skip(from + 1) {
        let parents = space.parents(level);
        current = row
            .iter()
            .zip(parents)
            .map(|(v, &p)| v.abs().max(current[p]))
            .collect();
    }
    // Finest-level nodes are the leaves, in order.
    current
}

/// Node averages `𝔼_i f` at a single level, one value per level-`i` node.
pub fn node_averages(space: &FilteredSpace, f: &SimpleFunction, level: usize) -> Result<Vec<f64>> {
    space.check_function(f)?;
    space.check_level(level)?;
    Ok(level_averages(space, f.values(), None).swap_remove(level))
}

/// `𝔼(f | F_i)`.
pub fn cond_exp(space: &FilteredSpace, f: &SimpleFunction, level: usize) -> Result<SimpleFunction> {
    let averages = node_averages(space, f, level)?;
    Ok(SimpleFunction::from_vec(expand(space, level, &averages)))
}

/// `𝔼^w_i(f) = 𝔼_i(fw) / 𝔼_i(w)`.
pub fn weighted_cond_exp(
    space: &FilteredSpace,
    f: &SimpleFunction,
    w: &Weight,
    level: usize,
) -> Result<SimpleFunction> {
    space.check_function(f)?;
    space.check_function(w.as_function())?;
    space.check_level(level)?;
    let averages = level_averages(space, f.values(), Some(w.values())).swap_remove(level);
    Ok(SimpleFunction::from_vec(expand(space, level, &averages)))
}

/// `Mf = max_i |𝔼_i f|`.
pub fn doob_maximal(space: &FilteredSpace, f: &SimpleFunction) -> Result<SimpleFunction> {
    tailed_maximal(space, f, 0)
}

/// `*M_i f = max_{j ≥ i} |𝔼_j f|`.
pub fn tailed_maximal(
    space: &FilteredSpace,
    f: &SimpleFunction,
    level: usize,
) -> Result<SimpleFunction> {
    space.check_function(f)?;
    space.check_level(level)?;
    let averages = level_averages(space, f.values(), None);
    Ok(SimpleFunction::from_vec(running_max(
        space, &averages, level,
    )))
}

/// `M^w f = max_i |𝔼^w_i f|`.
pub fn weighted_maximal(
    space: &FilteredSpace,
    f: &SimpleFunction,
    w: &Weight,
) -> Result<SimpleFunction> {
    space.check_function(f)?;
    space.check_function(w.as_function())?;
    let averages = level_averages(space, f.values(), Some(w.values()));
    Ok(SimpleFunction::from_vec(running_max(space, &averages, 0)))
}

/// A level-valued stopping time, `None` standing for `+∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingTime {
    levels: Vec<Option<usize>>,
}

impl StoppingTime {
    pub fn never(len: usize) -> Self {
        Self {
            levels: vec![None; len],
        }
    }

    pub fn from_levels(levels: Vec<Option<usize>>) -> Self {
        Self { levels }
    }

    pub fn at(&self, leaf: usize) -> Option<usize> {
        self.levels[leaf]
    }

    pub fn levels(&self) -> &[Option<usize>] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn is_finite(&self, leaf: usize) -> bool {
        self.levels[leaf].is_some()
    }

    /// Checks `{τ = i} ∈ F_i` for every level `i`: leaves sharing a level-`i`
    /// atom either all stop at `i` or none do.
    pub fn is_adapted(&self, space: &FilteredSpace) -> bool {
        (0..=space.depth()).all(|level| {
            space.nodes(level).all(|node| {
                let range = space.node_range(node);
                let first = self.levels[range.start] == Some(level);
                range
                    .into_iter()
                    .all(|leaf| (self.levels[leaf] == Some(level)) == first)
            })
        })
    }
}

impl Serialize for StoppingTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.levels.iter())
    }
}

/// First-hitting time of a node predicate: per leaf, the smallest level whose
/// atom containing the leaf satisfies `predicate`.
///
/// The predicate only sees the node, so `{τ = i}` is a union of level-`i`
/// atoms by construction. Nodes below an already-stopped node are not visited.
pub fn stopping_time(
    space: &FilteredSpace,
    mut predicate: impl FnMut(NodeId) -> bool,
) -> StoppingTime {
    let mut stopped: Vec<Option<usize>> = Vec::new();
    for level in 0..=space.depth() {
        let parents = space.parents(level);
        stopped = (0..space.node_count(level))
            .map(|index| {
                let inherited = if level == 0 {
                    None
                } else {
                    stopped[parents[index]]
                };
                inherited.or_else(|| predicate(NodeId { level, index }).then_some(level))
            })
            .collect();
    }
    let mut levels = vec![None; space.leaf_count()];
    for node in space.nodes(space.depth()) {
        levels[space.node_range(node).start] = stopped[node.index];
    }
    StoppingTime { levels }
}

/// Per-level averages, reusable across several stopping-time lookups.
#[derive(Debug, Clone)]
pub struct Martingale {
    averages: Vec<Vec<f64>>,
}

impl Martingale {
    /// `(𝔼_i f)_i`.
    pub fn new(space: &FilteredSpace, f: &SimpleFunction) -> Result<Self> {
        space.check_function(f)?;
        Ok(Self {
            averages: level_averages(space, f.values(), None),
        })
    }

    /// `(𝔼^w_i f)_i`.
    pub fn weighted(space: &FilteredSpace, f: &SimpleFunction, w: &Weight) -> Result<Self> {
        space.check_function(f)?;
        space.check_function(w.as_function())?;
        Ok(Self {
            averages: level_averages(space, f.values(), Some(w.values())),
        })
    }

    pub fn at_node(&self, node: NodeId) -> f64 {
        self.averages[node.level][node.index]
    }

    pub fn level(&self, level: usize) -> &[f64] {
        &self.averages[level]
    }

    pub fn at_leaf(&self, space: &FilteredSpace, level: usize, leaf: usize) -> f64 {
        self.at_node(space.node_of_leaf(level, leaf))
    }

    /// `𝔼(f | F_τ)` per leaf, `None` where `τ = ∞`.
    pub fn at_stopping_time(&self, space: &FilteredSpace, tau: &StoppingTime) -> Vec<Option<f64>> {
        (0..space.leaf_count())
            .map(|leaf| tau.at(leaf).map(|level| self.at_leaf(space, level, leaf)))
            .collect()
    }
}

/// `𝔼(f | F_τ)` per leaf, evaluated at the level-`τ(leaf)` atom.
pub fn cond_exp_at_stopping_time(
    space: &FilteredSpace,
    f: &SimpleFunction,
    tau: &StoppingTime,
) -> Result<Vec<Option<f64>>> {
    if tau.len() != space.leaf_count() {
        return Err(Error::Shape {
            expected: space.leaf_count(),
            got: tau.len(),
        });
    }
    Ok(Martingale::new(space, f)?.at_stopping_time(space, tau))
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
    fn cond_exp_examples() {
        let two = FilteredSpace::dyadic(1, None).unwrap();
        assert_eq!(
            cond_exp(&two, &f(&[1.0, 3.0]), 0).unwrap().values(),
            &[2.0, 2.0]
        );

        let four = FilteredSpace::dyadic(2, None).unwrap();
        let spike = f(&[4.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            cond_exp(&four, &spike, 1).unwrap().values(),
            &[2.0, 2.0, 0.0, 0.0]
        );
        assert_eq!(cond_exp(&four, &spike, 2).unwrap(), spike);
        assert!(matches!(
            cond_exp(&four, &spike, 3),
            Err(Error::LevelOutOfRange { level: 3, depth: 2 })
        ));
    }

    #[test]
    fn weighted_cond_exp_examples() {
        let two = FilteredSpace::dyadic(1, None).unwrap();
        let g = f(&[1.0, 3.0]);
        let out = weighted_cond_exp(&two, &g, &w(&[1.0, 3.0]), 0).unwrap();
        assert_eq!(out.values(), &[2.5, 2.5]);
        let unweighted = weighted_cond_exp(&two, &g, &w(&[1.0, 1.0]), 0).unwrap();
        assert_eq!(unweighted, cond_exp(&two, &g, 0).unwrap());
        let c = weighted_cond_exp(&two, &f(&[7.0, 7.0]), &w(&[0.1, 9.0]), 0).unwrap();
        assert!(c.values().iter().all(|&x| (x - 7.0).abs() < 1e-12));
    }

    #[test]
    fn doob_maximal_examples() {
        let four = FilteredSpace::dyadic(2, None).unwrap();
        let expected = [4.0, 2.0, 1.0, 1.0];
        assert_eq!(
            doob_maximal(&four, &f(&[4.0, 0.0, 0.0, 0.0]))
                .unwrap()
                .values(),
            &expected
        );
        assert_eq!(
            doob_maximal(&four, &f(&[-4.0, 0.0, 0.0, 0.0]))
                .unwrap()
                .values(),
            &expected
        );
        let c = doob_maximal(&four, &f(&[3.0; 4])).unwrap();
        assert_eq!(c.values(), &[3.0; 4]);
    }

    #[test]
    fn tailed_maximal_examples() {
        let four = FilteredSpace::dyadic(2, None).unwrap();
        let spike = f(&[4.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            tailed_maximal(&four, &spike, 1).unwrap().values(),
            &[4.0, 2.0, 0.0, 0.0]
        );
        let signed = f(&[-1.0, 2.0, 0.5, -3.0]);
        assert_eq!(tailed_maximal(&four, &signed, 2).unwrap(), signed.abs());
        assert_eq!(
            tailed_maximal(&four, &signed, 0).unwrap(),
            doob_maximal(&four, &signed).unwrap()
        );
    }

    #[test]
    fn weighted_maximal_examples() {
        let two = FilteredSpace::dyadic(1, None).unwrap();
        let out = weighted_maximal(&two, &f(&[1.0, 3.0]), &w(&[1.0, 3.0])).unwrap();
        assert_eq!(out.values(), &[2.5, 3.0]);
        let g = f(&[1.0, -3.0]);
        assert_eq!(
            weighted_maximal(&two, &g, &w(&[1.0, 1.0])).unwrap(),
            doob_maximal(&two, &g).unwrap()
        );
        let c = weighted_maximal(&two, &f(&[-2.0, -2.0]), &w(&[0.3, 5.0])).unwrap();
        assert!(c.values().iter().all(|&x| (x - 2.0).abs() < 1e-12));
    }

    #[test]
    fn stopping_time_examples() {
        let four = FilteredSpace::dyadic(2, None).unwrap();
        assert_eq!(stopping_time(&four, |_| true).levels(), &[Some(0); 4]);
        assert_eq!(stopping_time(&four, |_| false).levels(), &[None; 4]);

        let m = Martingale::new(&four, &f(&[4.0, 0.0, 0.0, 0.0])).unwrap();
        let tau = stopping_time(&four, |node| m.at_node(node) > 2.0);
        assert_eq!(tau.levels(), &[Some(2), None, None, None]);
        assert!(tau.is_adapted(&four));
        assert_eq!(
            m.at_stopping_time(&four, &tau),
            vec![Some(4.0), None, None, None]
        );
    }

    #[test]
    fn adaptedness_detects_leaf_level_splits() {
        let four = FilteredSpace::dyadic(2, None).unwrap();
        let bad = StoppingTime::from_levels(vec![Some(1), None, None, None]);
        assert!(!bad.is_adapted(&four));
    }

    #[test]
    fn shape_errors() {
        let four = FilteredSpace::dyadic(2, None).unwrap();
        assert!(matches!(
            doob_maximal(&four, &f(&[1.0])),
            Err(Error::Shape {
                expected: 4,
                got: 1
            })
        ));
        assert!(matches!(
            weighted_maximal(&four, &f(&[1.0; 4]), &w(&[1.0; 2])),
            Err(Error::Shape { .. })
        ));
    }
}
