// SPDX-License-Identifier: Apache-2.0

//! Weights, dual weights and the `A_p` characteristic.
//!
//! The dual weight is always `σ = v^{1−p′} = v^{−1/(p−1)}`. With this choice
//! `𝔼_j(v)·𝔼_j(σ)^{p−1}` is the quantity bounded by `[v]_{A_p}`, and
//! `σ^{p−1}·v = 1` pointwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::{FilteredSpace, NodeId, SimpleFunction};
use crate::operators::level_averages;

/// A Lebesgue exponent `p ∈ (1, ∞)` together with its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    p: f64,
    conj: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self {
            p,
            conj: p / (p - 1.0),
        })
    }

    pub fn p(self) -> f64 {
        self.p
    }

    /// `p′ = p/(p−1)`.
    pub fn conjugate(self) -> f64 {
        self.conj
    }

    /// The exponent `p′` as an [`Exponent`].
    pub fn dual(self) -> Self {
        Self {
            p: self.conj,
            conj: self.p,
        }
    }
}

/// A strictly positive, finite function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Weight {
    inner: SimpleFunction,
}

impl Weight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonpositiveWeight { index, value });
        }
        Ok(Self {
            inner: SimpleFunction::from_vec(values),
        })
    }

    pub fn from_function(f: &SimpleFunction) -> Result<Self> {
        Self::new(f.values().to_vec())
    }

    pub fn unit(len: usize) -> Self {
        Self {
            inner: SimpleFunction::constant(len, 1.0),
        }
    }

    pub fn values(&self) -> &[f64] {
        self.inner.values()
    }

    pub fn as_function(&self) -> &SimpleFunction {
        &self.inner
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.values().iter().map(|v| v * c).collect())
    }

    /// `v^e` pointwise.
    pub fn powf(&self, e: f64) -> Result<Self> {
        Self::new(self.values().iter().map(|v| v.powf(e)).collect())
    }

    /// `v(S) = ∫_S v dμ` over all leaves.
    pub fn mass(&self, space: &FilteredSpace) -> f64 {
        self.values()
            .iter()
            .zip(space.leaf_measures())
            .map(|(v, m)| v * m)
            .sum()
    }
}

impl TryFrom<Vec<f64>> for Weight {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Weight> for Vec<f64> {
    fn from(w: Weight) -> Self {
        w.inner.into_values()
    }
}

/// `σ = v^{1−p′}`.
pub fn dual_weight(v: &Weight, p: f64) -> Result<Weight> {
    let exponent = Exponent::new(p)?;
    v.powf(1.0 - exponent.conjugate())
}

/// One row of the `A_p` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApNode {
    pub level: usize,
    pub index: usize,
    /// `𝔼_j(v)·𝔼_j(σ)^{p−1}` on this node.
    pub value: f64,
}

/// The `A_p` characteristic with its per-node table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    pub p: f64,
    pub p_conj: f64,
    pub characteristic: f64,
    pub argmax: NodeId,
    pub nodes: Vec<ApNode>,
}

impl ApReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn value_at(&self, node: NodeId) -> Option<f64> {
        self.nodes
            .iter()
            .find(|n| n.level == node.level && n.index == node.index)
            .map(|n| n.value)
    }
}

/// `[v]_{A_p} = max_j max_{N ∈ F_j} 𝔼_N(v)·𝔼_N(σ)^{p−1}`.
pub fn ap_characteristic(space: &FilteredSpace, v: &Weight, p: f64) -> Result<ApReport> {
    let exponent = Exponent::new(p)?;
    space.check_function(v.as_function())?;
    let sigma = dual_weight(v, p)?;
    let v_avg = level_averages(space, v.values(), None);
    let s_avg = level_averages(space, sigma.values(), None);

    let mut nodes = Vec::new();
    let mut best = (f64::NEG_INFINITY, NodeId { level: 0, index: 0 });
    for node in space.all_nodes() {
        let value = v_avg[node.level][node.index] * s_avg[node.level][node.index].powf(p - 1.0);
        if value > best.0 {
            best = (value, node);
        }
        nodes.push(ApNode {
            level: node.level,
            index: node.index,
            value,
        });
    }
    Ok(ApReport {
        p,
        p_conj: exponent.conjugate(),
        characteristic: best.0,
        argmax: best.1,
        nodes,
    })
}

/// Leaf averages of `x^α` on a dyadic space identified with `[0, 1)`.
///
/// Leaf `k` covers `[c_k, c_{k+1})` where `c_k` is the normalized cumulative
/// mass of the leaves before it; for uniform masses these are the standard
/// dyadic intervals.
pub fn power_weight(space: &FilteredSpace, alpha: f64) -> Result<Weight> {
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if !space.is_dyadic() {
        return Err(Error::NotDyadic);
    }
    let total = space.total_measure();
    let mut left = 0.0f64;
    let mut acc = 0.0f64;
    let mut values = Vec::with_capacity(space.leaf_count());
    let e = alpha + 1.0;
    for &m in space.leaf_measures() {
        acc += m;
        let right = (acc / total).min(1.0);
        let value = if alpha == 0.0 {
            1.0
        } else {
            (right.powf(e) - left.powf(e)) / (e * (right - left))
        };
        values.push(value);
        left = right;
    }
    Weight::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(values: &[f64]) -> Weight {
        Weight::new(values.to_vec()).unwrap()
    }

    #[test]
    fn exponent_validation() {
        assert_eq!(Exponent::new(2.0).unwrap().conjugate(), 2.0);
        assert_eq!(Exponent::new(3.0).unwrap().conjugate(), 1.5);
        for p in [1.0, 0.5, f64::NAN, f64::INFINITY] {
            assert!(Exponent::new(p).is_err());
        }
    }

    #[test]
    fn weight_rejects_nonpositive_values() {
        assert_eq!(
            Weight::new(vec![1.0, 0.0]).unwrap_err(),
            Error::NonpositiveWeight {
                index: 1,
                value: 0.0
            }
        );
        assert!(Weight::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn dual_weight_examples() {
        assert_eq!(
            dual_weight(&w(&[1.0, 4.0]), 2.0).unwrap().values(),
            &[1.0, 0.25]
        );
        assert_eq!(
            dual_weight(&w(&[1.0, 1.0]), 3.7).unwrap().values(),
            &[1.0, 1.0]
        );
        assert!(matches!(
            dual_weight(&w(&[1.0]), 1.0),
            Err(Error::InvalidExponent(_))
        ));
    }

    #[test]
    fn ap_characteristic_examples() {
        let space = FilteredSpace::dyadic(2, None).unwrap();
        let report = ap_characteristic(&space, &Weight::unit(4), 3.0).unwrap();
        assert_eq!(report.characteristic, 1.0);
        assert!(report.nodes.iter().all(|n| n.value == 1.0));

        let two = FilteredSpace::dyadic(1, None).unwrap();
        let report = ap_characteristic(&two, &w(&[1.0, 4.0]), 2.0).unwrap();
        assert!((report.characteristic - 1.5625).abs() < 1e-15);
        assert_eq!(report.argmax, NodeId { level: 0, index: 0 });
        assert_eq!(report.value_at(NodeId { level: 1, index: 1 }), Some(1.0));

        let v = w(&[0.3, 2.0]);
        let a = ap_characteristic(&two, &v, 2.5).unwrap().characteristic;
        let b = ap_characteristic(&two, &v.scale(17.0).unwrap(), 2.5)
            .unwrap()
            .characteristic;
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn ap_report_json() {
        let two = FilteredSpace::dyadic(1, None).unwrap();
        let report = ap_characteristic(&two, &w(&[1.0, 4.0]), 2.0).unwrap();
        let back: ApReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn power_weight_examples() {
        let space = FilteredSpace::dyadic(3, None).unwrap();
        assert!(power_weight(&space, 0.0)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 1.0));
        let one = FilteredSpace::dyadic(1, None).unwrap();
        let lin = power_weight(&one, 1.0).unwrap();
        assert!((lin.values()[0] - 0.25).abs() < 1e-15);
        assert!((lin.values()[1] - 0.75).abs() < 1e-15);
        assert!(matches!(
            power_weight(&space, -1.0),
            Err(Error::InvalidAlpha(_))
        ));
        let ternary = FilteredSpace::from_json(
            r#"{"depth":1,"leaf_measures":[1,1,1],"levels":[[3],[1,1,1]]}"#,
        )
        .unwrap();
        assert!(matches!(power_weight(&ternary, 0.5), Err(Error::NotDyadic)));
    }

    #[test]
    fn power_weight_characteristic_grows_toward_minus_one() {
        let space = FilteredSpace::dyadic(12, None).unwrap();
        let chars: Vec<f64> = [-0.5, -0.7, -0.9]
            .iter()
            .map(|&a| {
                ap_characteristic(&space, &power_weight(&space, a).unwrap(), 2.0)
                    .unwrap()
                    .characteristic
            })
            .collect();
        assert!(chars.windows(2).all(|w| w[0] < w[1]), "{chars:?}");
    }
}
