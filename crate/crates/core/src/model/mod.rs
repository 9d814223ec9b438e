//! GRec and the NextItNet family built on the autodiff engine.

pub mod checkpoint;
mod config;
mod layers;
mod mostpop;
mod network;
mod params;
mod ranking;

pub use config::{ModelConfig, ModelKind};
pub use layers::{receptive_field, ConvKernel};
pub use mostpop::MostPop;
pub use network::{nextitnet_plus_expand, reverse_valid, LossOutput, Network};
pub use params::ParamStore;
pub use ranking::{rank_of, top_n, Recommender};
