//! Connection provisioning under resource crunch.
//!
//! When a request cannot be routed on free capacity, the engine looks for a cheap
//! set of live malleable connections to throttle. Candidates come from a
//! connection adjacency graph search with a linear-programming fallback, and are
//! accepted only if serving beats the blocking penalty. A discrete-event
//! simulator compares this against blocking and greedy baselines.
//!
//! Bandwidth is exact fixed-point ([`Bandwidth`]); money and LP arithmetic are
//! generic over [`Scalar`] (`f32` or `f64`). The aliases below fix `f64`.

pub mod bandwidth;
pub mod baselines;
pub mod cag;
pub mod lp;
pub mod net;
pub mod pricing;
pub mod provisioner;
pub mod scalar;
pub mod sim;
pub mod snapshot;

pub use bandwidth::Bandwidth;
pub use scalar::Scalar;

pub type Connection = net::Connection<f64>;
pub type NetworkState = net::NetworkState<f64>;
pub type Request = pricing::Request<f64>;
pub type Cag = cag::Cag<f64>;
pub type CandidateSet = provisioner::CandidateSet<f64>;
pub type Decision = provisioner::Decision<f64>;
pub type DegradedRegistry = provisioner::DegradedRegistry<f64>;
