//! Discrete Bayesian networks with exact inference, applied to recognizing
//! driver maneuvers from partial highway observations.
//!
//! The crate splits into five layers:
//!
//! - [`network`]: variables, categorical domains, CPTs, DAG validation,
//!   chain-rule evaluation, and the JSON interchange format ([`codec`]).
//! - [`factor`] and [`inference`]: factor algebra, variable elimination
//!   with min-fill ordering, and an independent enumeration oracle.
//! - [`sampling`]: seeded ancestral sampling.
//! - [`recognition`]: the role/time discipline (Context → MentalState →
//!   Plan → Activity/Communication → Effect) and the recognize/predict
//!   query wrappers.
//! - [`traffic`] and [`report`]: the parameterized traffic-monitoring
//!   network and its reference-scenario report.
//!
//! With the default `parallel` feature, enumeration, sampling, and batch
//! queries fan out over rayon; disabling it yields a fully sequential
//! build with identical sampling output and equal-within-tolerance
//! posteriors.

pub mod codec;
pub mod factor;
pub mod inference;
pub mod network;
pub mod recognition;
pub mod report;
pub mod sampling;
pub mod scenario;
pub mod traffic;

pub use codec::NetworkDocument;
pub use factor::Factor;
pub use inference::{enumerate_posterior, joint_posterior, posterior, Posterior};
pub use network::{Assignment, Domain, Evidence, Network, Role, TimeIndex, VarId, Variable};
pub use recognition::{predict, recognize, validate_roles};
pub use sampling::forward_sample;
pub use scenario::Scenario;
pub use traffic::{build_traffic_network, paper_scenarios, traffic_mini, TrafficParams};
