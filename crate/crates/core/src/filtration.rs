// SPDX-License-Identifier: Apache-2.0

//! Finite filtered measure spaces.
//!
//! A [`FilteredSpace`] is a rooted refinement tree over a fixed, ordered set
//! of leaves (the finest atoms). Level `i` partitions the leaves into
//! contiguous groups, the atoms of `F_i`. Level 0 is the single root and the
//! finest level `depth` consists of singletons, so every [`SimpleFunction`]
//! (one value per leaf) is measurable with respect to the finest level.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest depth accepted by [`FilteredSpace::dyadic`] (4M leaves).
pub const MAX_DYADIC_DEPTH: usize = 22;

#[derive(Debug, Clone, PartialEq)]
struct Level {
    /// Leaf range of node `n` is `offsets[n]..offsets[n + 1]`.
    offsets: Vec<usize>,
    /// Index of the containing node one level up; empty at level 0.
    parent: Vec<usize>,
    measure: Vec<f64>,
    /// Node index of each leaf at this level.
    leaf_node: Vec<u32>,
}

impl Level {
    fn len(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// A node of the refinement tree, addressed by level and position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    pub level: usize,
    pub index: usize,
}

/// Rooted refinement tree of atoms with strictly positive leaf masses.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSpace {
    leaf_measure: Vec<f64>,
    levels: Vec<Level>,
}

/// Serialized form of a [`FilteredSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceDocument {
    pub depth: usize,
    pub leaf_measures: Vec<f64>,
    /// Node sizes (leaf counts) per level, from the root down.
    pub levels: Vec<Vec<usize>>,
}

impl FilteredSpace {
    /// Binary refinement tree of the given depth. Leaf masses default to
    /// `2^-depth`.
    pub fn dyadic(depth: usize, leaf_measures: Option<&[f64]>) -> Result<Self> {
        if depth > MAX_DYADIC_DEPTH {
            return Err(Error::Capacity {
                depth,
                max: MAX_DYADIC_DEPTH,
            });
        }
        let n = 1usize << depth;
        let measures = match leaf_measures {
            Some(m) if m.len() != n => {
                return Err(Error::Shape {
                    expected: n,
                    got: m.len(),
                })
            }
            Some(m) => m.to_vec(),
            None => vec![1.0 / n as f64; n],
        };
        let levels = (0..=depth)
            .map(|i| vec![1usize << (depth - i); 1 << i])
            .collect();
        Self::from_document(&SpaceDocument {
            depth,
            leaf_measures: measures,
            levels,
        })
    }

    /// Validates a document and builds the space it describes.
    pub fn from_document(doc: &SpaceDocument) -> Result<Self> {
        let n = doc.leaf_measures.len();
        if n == 0 {
            return Err(Error::Malformed("no leaves".into()));
        }
        if doc.levels.len() != doc.depth + 1 {
            return Err(Error::Malformed(format!(
                "depth {} requires {} levels, found {}",
                doc.depth,
                doc.depth + 1,
                doc.levels.len()
            )));
        }
        for (index, &value) in doc.leaf_measures.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidMeasure { index, value });
            }
        }
        for (i, sizes) in doc.levels.iter().enumerate() {
            if sizes.contains(&0) {
                return Err(Error::Malformed(format!("level {i} has an empty node")));
            }
            let total: usize = sizes.iter().sum();
            if total != n {
                return Err(Error::Malformed(format!(
                    "level {i} covers {total} leaves, expected {n}"
                )));
            }
        }
        if doc.levels[0].len() != 1 {
            return Err(Error::Malformed("level 0 must be a single root".into()));
        }
        if doc.levels[doc.depth].iter().any(|&s| s != 1) {
            return Err(Error::Malformed(
                "finest level must consist of single leaves".into(),
            ));
        }

        let mut levels: Vec<Level> = Vec::with_capacity(doc.depth + 1);
        for (i, sizes) in doc.levels.iter().enumerate() {
            let mut offsets = Vec::with_capacity(sizes.len() + 1);
            offsets.push(0);
            for s in sizes {
                offsets.push(offsets.last().unwrap() + s);
            }
            let mut leaf_node = vec![0u32; n];
            for (node, bounds) in offsets.windows(2).enumerate() {
                leaf_node[bounds[0]..bounds[1]].fill(node as u32);
            }
            let parent = match levels.last() {
                None => Vec::new(),
                Some(up) => {
                    let mut parent = Vec::with_capacity(sizes.len());
                    for node in 0..sizes.len() {
                        let first = up.leaf_node[offsets[node]] as usize;
                        let last = up.leaf_node[offsets[node + 1] - 1] as usize;
                        if first != last {
                            return Err(Error::Refinement {
                                level: i,
                                parent: i - 1,
                                node,
                            });
                        }
                        parent.push(first);
                    }
                    parent
                }
            };
            levels.push(Level {
                offsets,
                parent,
                measure: Vec::new(),
                leaf_node,
            });
        }

        // Node masses bottom-up, so each parent is exactly the sum of its children.
        levels[doc.depth].measure = doc.leaf_measures.clone();
        for i in (0..doc.depth).rev() {
            let mut measure = vec![0.0; levels[i].len()];
            let (up, down) = levels.split_at_mut(i + 1);
            for (child, &m) in down[0].measure.iter().enumerate() {
                measure[down[0].parent[child]] += m;
            }
            up[i].measure = measure;
        }

        Ok(Self {
            leaf_measure: doc.leaf_measures.clone(),
            levels,
        })
    }

    /// Parses a JSON space document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpaceDocument =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_document(&doc)
    }

    pub fn to_document(&self) -> SpaceDocument {
        SpaceDocument {
            depth: self.depth(),
            leaf_measures: self.leaf_measure.clone(),
            levels: self
                .levels
                .iter()
                .map(|l| l.offsets.windows(2).map(|w| w[1] - w[0]).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document serializes")
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_measure.len()
    }

    pub fn leaf_measures(&self) -> &[f64] {
        &self.leaf_measure
    }

    pub fn total_measure(&self) -> f64 {
        self.levels[0].measure[0]
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level > self.depth() {
            Err(Error::LevelOutOfRange {
                level,
                depth: self.depth(),
            })
        } else {
            Ok(())
        }
    }

    pub fn node_count(&self, level: usize) -> usize {
        self.levels[level].len()
    }

    pub fn nodes(&self, level: usize) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count(level)).map(move |index| NodeId { level, index })
    }

    /// Every node of the tree, root first, level by level.
    pub fn all_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..=self.depth()).flat_map(move |level| self.nodes(level))
    }

    pub fn node_range(&self, node: NodeId) -> Range<usize> {
        let offsets = &self.levels[node.level].offsets;
        offsets[node.index]..offsets[node.index + 1]
    }

    pub fn node_measure(&self, node: NodeId) -> f64 {
        self.levels[node.level].measure[node.index]
    }

    pub fn level_measures(&self, level: usize) -> &[f64] {
        &self.levels[level].measure
    }

    /// Parent indices of the nodes at `level` (empty at the root level).
    pub fn parents(&self, level: usize) -> &[usize] {
        &self.levels[level].parent
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        (node.level > 0).then(|| NodeId {
            level: node.level - 1,
            index: self.levels[node.level].parent[node.index],
        })
    }

    /// The level-`level` atom containing `leaf`.
    pub fn node_of_leaf(&self, level: usize, leaf: usize) -> NodeId {
        NodeId {
            level,
            index: self.levels[level].leaf_node[leaf] as usize,
        }
    }

    /// Children of `node` at the next level, as a contiguous index range.
    pub fn children(&self, node: NodeId) -> Range<usize> {
        let next = node.level + 1;
        if next > self.depth() {
            return 0..0;
        }
        let range = self.node_range(node);
        let first = self.levels[next].leaf_node[range.start] as usize;
        let last = self.levels[next].leaf_node[range.end - 1] as usize;
        first..last + 1
    }

    /// True when every node splits into exactly two children down to
    /// `2^depth` leaves.
    pub fn is_dyadic(&self) -> bool {
        self.levels
            .iter()
            .enumerate()
            .all(|(i, l)| l.len() == 1 << i)
    }

    pub fn check_function(&self, f: &SimpleFunction) -> Result<()> {
        if f.len() == self.leaf_count() {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.leaf_count(),
                got: f.len(),
            })
        }
    }

    pub fn check_set(&self, set: &LeafSet) -> Result<()> {
        if set.len() == self.leaf_count() {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.leaf_count(),
                got: set.len(),
            })
        }
    }

    /// True when `set` is a union of level-`level` atoms.
    pub fn is_measurable(&self, set: &LeafSet, level: usize) -> bool {
        self.nodes(level).all(|node| {
            let range = self.node_range(node);
            let inside = set.contains(range.start);
            range.clone().all(|leaf| set.contains(leaf) == inside)
        })
    }

    /// `μ(S)`.
    pub fn measure_of(&self, set: &LeafSet) -> f64 {
        set.iter().map(|leaf| self.leaf_measure[leaf]).sum()
    }

    /// The leaves of a single node as a set.
    pub fn node_set(&self, node: NodeId) -> LeafSet {
        let mut set = LeafSet::empty(self.leaf_count());
        for leaf in self.node_range(node) {
            set.insert(leaf);
        }
        set
    }
}

/// `Σ_{leaf ∈ S} f(leaf)·μ(leaf)`.
pub fn integrate(space: &FilteredSpace, f: &SimpleFunction, set: &LeafSet) -> Result<f64> {
    space.check_function(f)?;
    space.check_set(set)?;
    Ok(set
        .iter()
        .map(|leaf| f.values[leaf] * space.leaf_measure[leaf])
        .sum())
}

/// A real value per leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimpleFunction {
    values: Vec<f64>,
}

impl SimpleFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    /// Wraps values already known to be finite.
    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values }
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self::from_vec(vec![value; len])
    }

    pub fn indicator(set: &LeafSet) -> Self {
        Self::from_vec(
            set.mask
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Self {
        Self::from_vec(self.values.iter().map(|&v| op(v)).collect())
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise product; panics on length mismatch.
    pub fn mul(&self, other: &SimpleFunction) -> Self {
        assert_eq!(
            self.len(),
            other.len(),
            "pointwise product of mismatched functions"
        );
        Self::from_vec(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    /// `f·χ_S`.
    pub fn restrict(&self, set: &LeafSet) -> Self {
        assert_eq!(self.len(), set.len(), "restriction to mismatched set");
        Self::from_vec(
            self.values
                .iter()
                .zip(&set.mask)
                .map(|(&v, &m)| if m { v } else { 0.0 })
                .collect(),
        )
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }
}

/// A subset of the leaves, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LeafSet {
    mask: Vec<bool>,
}

impl LeafSet {
    pub fn empty(len: usize) -> Self {
        Self {
            mask: vec![false; len],
        }
    }

    pub fn full(len: usize) -> Self {
        Self {
            mask: vec![true; len],
        }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(len);
        for i in indices {
            set.insert(i);
        }
        set
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.contains(&true)
    }

    pub fn contains(&self, leaf: usize) -> bool {
        self.mask[leaf]
    }

    pub fn insert(&mut self, leaf: usize) {
        self.mask[leaf] = true;
    }

    pub fn remove(&mut self, leaf: usize) {
        self.mask[leaf] = false;
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn zip_with(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Self {
        assert_eq!(self.len(), other.len(), "set operation on mismatched sets");
        Self {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !(a && b))
    }
}

impl Serialize for LeafSet {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_depth_zero_is_a_single_atom() {
        let space = FilteredSpace::dyadic(0, None).unwrap();
        assert_eq!(space.depth(), 0);
        assert_eq!(space.leaf_count(), 1);
        assert_eq!(space.total_measure(), 1.0);
    }

    #[test]
    fn dyadic_levels_double() {
        let space = FilteredSpace::dyadic(2, None).unwrap();
        let sizes: Vec<_> = (0..=2).map(|i| space.node_count(i)).collect();
        assert_eq!(sizes, vec![1, 2, 4]);
        assert!(space.leaf_measures().iter().all(|&m| m == 0.25));
        assert!(space.is_dyadic());
    }

    #[test]
    fn parent_mass_is_sum_of_children() {
        let space = FilteredSpace::dyadic(1, Some(&[0.25, 0.75])).unwrap();
        assert_eq!(space.total_measure(), 1.0);
        assert_eq!(space.level_measures(1), &[0.25, 0.75]);
    }

    #[test]
    fn rejects_nonpositive_measure() {
        let err = FilteredSpace::dyadic(1, Some(&[0.5, 0.0])).unwrap_err();
        assert_eq!(
            err,
            Error::InvalidMeasure {
                index: 1,
                value: 0.0
            }
        );
        assert!(matches!(
            FilteredSpace::dyadic(1, Some(&[-1.0, 1.0])),
            Err(Error::InvalidMeasure { index: 0, .. })
        ));
    }

    #[test]
    fn rejects_excessive_depth() {
        assert!(matches!(
            FilteredSpace::dyadic(MAX_DYADIC_DEPTH + 1, None),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn document_round_trip() {
        let space = FilteredSpace::dyadic(2, None).unwrap();
        let back = FilteredSpace::from_json(&space.to_json()).unwrap();
        assert_eq!(back, space);
    }

    #[test]
    fn straddling_node_is_a_refinement_error() {
        let doc = r#"{"depth":2,"leaf_measures":[1,1,1,1],"levels":[[4],[2,2],[1,2,1]]}"#;
        assert!(matches!(
            FilteredSpace::from_json(doc),
            Err(Error::Malformed(_))
        ));
        let doc = r#"{"depth":3,"leaf_measures":[1,1,1,1],"levels":[[4],[2,2],[1,2,1],[1,1,1,1]]}"#;
        assert_eq!(
            FilteredSpace::from_json(doc).unwrap_err(),
            Error::Refinement {
                level: 2,
                parent: 1,
                node: 1
            }
        );
    }

    #[test]
    fn ternary_tree() {
        let doc = r#"{"depth":1,"leaf_measures":[1,1,1],"levels":[[3],[1,1,1]]}"#;
        let space = FilteredSpace::from_json(doc).unwrap();
        assert_eq!(space.total_measure(), 3.0);
        assert!(!space.is_dyadic());
        assert_eq!(space.children(NodeId { level: 0, index: 0 }), 0..3);
    }

    #[test]
    fn malformed_documents() {
        for doc in [
            "not json",
            r#"{"depth":1,"leaf_measures":[],"levels":[[0],[]]}"#,
            r#"{"depth":1,"leaf_measures":[1,1],"levels":[[2]]}"#,
            r#"{"depth":1,"leaf_measures":[1,1],"levels":[[1,1],[1,1]]}"#,
            r#"{"depth":1,"leaf_measures":[1,1],"levels":[[2],[2]]}"#,
            r#"{"depth":1,"leaf_measures":[1,1],"levels":[[2],[1,1,1]]}"#,
        ] {
            assert!(
                matches!(FilteredSpace::from_json(doc), Err(Error::Malformed(_))),
                "{doc}"
            );
        }
    }

    #[test]
    fn integrate_examples() {
        let space = FilteredSpace::dyadic(2, None).unwrap();
        let all = LeafSet::full(4);
        let one = SimpleFunction::constant(4, 1.0);
        assert_eq!(integrate(&space, &one, &all).unwrap(), 1.0);
        let spike = SimpleFunction::new(vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(integrate(&space, &spike, &all).unwrap(), 1.0);
        assert_eq!(integrate(&space, &spike, &LeafSet::empty(4)).unwrap(), 0.0);
        let short = SimpleFunction::constant(3, 1.0);
        assert!(matches!(
            integrate(&space, &short, &all),
            Err(Error::Shape {
                expected: 4,
                got: 3
            })
        ));
    }

    #[test]
    fn measurability() {
        let space = FilteredSpace::dyadic(2, None).unwrap();
        let left = LeafSet::from_indices(4, [0, 1]);
        assert!(space.is_measurable(&left, 1));
        assert!(!space.is_measurable(&left, 0));
        let odd = LeafSet::from_indices(4, [1]);
        assert!(!space.is_measurable(&odd, 1));
        assert!(space.is_measurable(&odd, 2));
    }

    #[test]
    fn non_finite_values_rejected() {
        assert_eq!(
            SimpleFunction::new(vec![1.0, f64::NAN]).unwrap_err(),
            Error::NonFinite { index: 1 }
        );
    }
}
