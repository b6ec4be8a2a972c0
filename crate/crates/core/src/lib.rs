//! Nonlinear interference estimation for WDM fiber links with inter-channel
//! stimulated Raman scattering, following the enhanced Gaussian noise model.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod config;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod fwm;
pub mod link;
pub mod parallel;
pub mod quadrature;
pub mod raman;
pub mod scalar;
pub mod units;

pub use config::{
    parse_config, CenterConvention, ChannelGrid, FiberSpan, GainMode, ModulationFormat, NumericsPolicy,
    SystemConfig,
};
pub use engine::{enumerate_islands, classify_island, Island, NliClass, NliEngine, NliReport};
pub use error::{ConfigError, EngineError, NumericError};
pub use fwm::{MuMethod, MuQuery};
pub use link::{LinkFunction, SpanChain};
pub use raman::RamanContext;
pub use scalar::Scalar;

pub type Config = SystemConfig<f64>;
pub type Span = FiberSpan<f64>;
pub type Grid = ChannelGrid<f64>;
pub type Modulation = ModulationFormat<f64>;
pub type Numerics = NumericsPolicy<f64>;
pub type Raman = RamanContext<f64>;
pub type Query = MuQuery<f64>;
pub type Chain = SpanChain<f64>;
pub type Link = LinkFunction<f64>;
pub type Engine = NliEngine<f64>;
pub type Report = NliReport<f64>;

pub type Config32 = SystemConfig<f32>;
pub type Engine32 = NliEngine<f32>;
pub type Report32 = NliReport<f32>;
