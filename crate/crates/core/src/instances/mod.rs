//! Instance families: hand-built games, hardness reductions and random
//! energy markets.

pub mod energy;
pub mod games;
pub mod hardness;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstanceError {
    #[error("invalid instance: {0}")]
    Invalid(&'static str),
}
