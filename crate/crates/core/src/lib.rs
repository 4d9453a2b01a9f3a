pub mod error;
pub mod kernels;
pub mod par;
pub mod quadrature;
pub mod rng;
pub mod smoothing;
pub mod variance;
pub mod benchmarks;
pub mod deviation;
pub mod testing;
pub mod changetime;
pub mod locstat;
pub mod pipeline;
pub mod simharness;
