//! Clustering under anisotropic Gaussian mixtures.
//!
//! The crate is organized around the pipeline of a synthetic clustering
//! experiment:
//!
//! - [`numkit`]: dense symmetric linear algebra (Cholesky, Jacobi
//!   eigendecomposition, SPD inverse/sqrt, Gram-matrix SVD).
//! - [`model`]: ground-truth mixture parameters and seeded data generation,
//!   including the two built-in simulation designs.
//! - [`loss`]: misclustering rate under the best label bijection and the
//!   center-distance loss.
//! - [`snr`]: separation functionals — minimum center gap, the whitened
//!   signal-to-noise ratio for shared covariances, and its generalization to
//!   heterogeneous covariances via a minimum-norm point on a quadric.
//! - [`bayes`]: optimal two-class LDA/QDA decision rules and Monte-Carlo
//!   estimates of their testing error.
//! - [`cluster`]: initializers (k-means++, vanilla Lloyd, spectral) and the
//!   covariance-adjusted Lloyd iterations with full traces.
//! - [`bench`]: replicated experiment harness, seed derivation, and file I/O.

pub mod bayes;
pub mod bench;
pub mod cluster;
pub mod loss;
pub mod model;
pub mod numkit;
pub mod snr;
