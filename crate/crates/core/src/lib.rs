// SPDX-License-Identifier: Apache-2.0

pub mod bounds;
pub mod constants;
pub mod emit;
pub mod error;
pub mod filtration;
pub mod operators;
pub mod principal;
pub mod sample;
pub mod scale;
pub mod stopping;
pub mod suite;
pub mod weights;

pub use bounds::{
    ap_lower_test_family, extremal_search, sharpness_experiment, verify_upper, weighted_norm,
    NormEstimate,
};
pub use constants::{profile, ConstantProfile};
pub use error::{Error, Result};
pub use filtration::{integrate, FilteredSpace, LeafSet, NodeId, SimpleFunction, SpaceDocument};
pub use operators::{
    cond_exp, doob_maximal, stopping_time, tailed_maximal, weighted_cond_exp, weighted_maximal,
    Martingale, StoppingTime,
};
pub use principal::{build_principal_forest, PrincipalForest};
pub use stopping::{build_decomposition, verify_chain, verify_partition, StoppingDecomposition};
pub use weights::{ap_characteristic, dual_weight, power_weight, ApReport, Exponent, Weight};
