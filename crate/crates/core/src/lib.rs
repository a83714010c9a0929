//! Zero-temperature asymptotics of Gibbs equilibrium states on subshifts of
//! finite type.
//!
//! The crate is organised bottom-up:
//!
//! - [`symbolic`]: shifts of finite type, words, eventually periodic points.
//! - [`maxplus`]: tropical linear algebra (cycle means, eigenvectors).
//! - [`aubry`]: Mañé potential, Aubry components and the inter-component
//!   cost matrix of a locally constant potential.
//! - [`spectral`]: log-domain Perron data of the transfer operator.
//! - [`zerotemp`]: convergence speed of the pressure, subactions, limit
//!   measures.
//! - [`walters`]: exact series machinery for Walters-type potentials on the
//!   full 2-shift and the perturbation experiments built on it.
//! - [`suites`]: named verification suites shared by the CLI and the
//!   acceptance tests.

pub mod aubry;
mod error;
pub mod examples;
pub mod logsum;
pub mod maxplus;
pub mod oracle;
pub mod spectral;
pub mod suites;
pub mod symbolic;
pub mod walters;
pub mod zerotemp;

pub use error::{Error, Result};
