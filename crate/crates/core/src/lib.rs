pub mod datasets;
pub mod dp_mixture;
pub mod error;
pub mod eval;
pub mod quadrature;
pub mod rng;
pub mod rounded;
pub mod sim;
pub mod skew_normal;
pub mod special;

pub use dp_mixture::{AlphaUpdate, BaseMeasure, ChainConfig, ChainState, Gibbs, KernelFamily, PosteriorSummary};
pub use error::{Error, Result};
pub use skew_normal::SkewNormalParams;
