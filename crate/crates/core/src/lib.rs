//! Random walks on coset graphs of free-group subgroups and the entropy
//! spectra they produce.
//!
//! The crate has four layers:
//!
//! * [`words`] — freely reduced words over a finite symmetric generating set,
//!   step distributions, exact convolutions, and Shannon entropy.
//! * [`schreier`] — self-loop oracles describing tree-like coset graphs
//!   (trivial subgroup, the `K_ell` family, their Bernoulli loop covers, and
//!   normal closures of a single generator), Stallings folding as an
//!   independent reference, ball materialization, and tree-likeness checks.
//! * [`entropy`] — exact sparse push-forward distributions of the coset walk,
//!   entropy curves and increments, Monte Carlo estimators (Kingman-style
//!   log-probability sampling, boundary hitting cells, prefix approximations,
//!   two-sided strip occupancy), and divergence bounds on finite partitions.
//! * [`flag`] / [`lyapunov`] — block combinatorics of parabolic subgroups of
//!   `SL(d, R)`, flag-manifold entropies from a Lyapunov vector, the resulting
//!   union-of-intervals spectrum, and a QR-iteration estimator for Lyapunov
//!   exponents of i.i.d. matrix products.
//!
//! All entropies are in nats. Randomized routines take explicit
//! [`words::RngStream`] values; results are reproducible byte-for-byte for a
//! fixed seed and independent of the number of worker threads.

pub mod entropy;
pub mod error;
pub mod exec;
pub mod flag;
pub mod lyapunov;
pub mod schreier;
pub mod stats;
pub mod words;

pub use error::{Error, Result};
