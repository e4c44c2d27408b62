// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised while building spaces or evaluating operators on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("leaf measure at index {index} is not strictly positive and finite: {value}")]
    InvalidMeasure { index: usize, value: f64 },

    #[error("depth {depth} exceeds the supported maximum of {max}")]
    Capacity { depth: usize, max: usize },

    #[error(
        "level {level} does not refine level {parent}: node {node} straddles a parent boundary"
    )]
    Refinement {
        level: usize,
        parent: usize,
        node: usize,
    },

    #[error("malformed space document: {0}")]
    Malformed(String),

    #[error("function has {got} values but the space has {expected} leaves")]
    Shape { expected: usize, got: usize },

    #[error("function value at leaf {index} is not finite")]
    NonFinite { index: usize },

    #[error("level {level} is outside 0..={depth}")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("exponent p = {0} must be finite and greater than 1")]
    InvalidExponent(f64),

    #[error("weight value at leaf {index} is not strictly positive and finite: {value}")]
    NonpositiveWeight { index: usize, value: f64 },

    #[error("function value at leaf {index} is negative: {value}")]
    NegativeFunction { index: usize, value: f64 },

    #[error("base {name} = {value} must be finite and greater than 1")]
    InvalidBase { name: &'static str, value: f64 },

    #[error("set is not measurable with respect to level {level}")]
    NotMeasurable { level: usize },

    #[error("power exponent alpha = {0} must be greater than -1")]
    InvalidAlpha(f64),

    #[error("space is not a dyadic filtration")]
    NotDyadic,

    #[error("invalid range: {0}")]
    InvalidRange(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
