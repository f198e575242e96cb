//! Separability-entanglement classification for bipartite quantum states.
//!
//! The pieces, bottom-up:
//!
//! * [`qstate`]: density matrices, Gell-Mann feature vectors, partial transpose.
//! * [`sampling`]: seeded Haar x Dirichlet random states and product states.
//! * [`lp`]: the revised simplex behind hull membership.
//! * [`cha`]: convex hull approximation, `alpha(C, p)`, and the iterative
//!   critical-point search.
//! * [`ensemble`]: CART trees, bagging, and the hull-augmented committee (BCHA).
//! * [`kext`]: k-symmetric-extension boundary points and witnesses.
//! * [`io`]: QSDS dataset and QHUL hull files, model JSON.
//! * [`bench`]: the benchmark protocols that regenerate the result tables.

pub mod bench;
pub mod cha;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod kext;
pub mod linalg;
pub mod lp;
pub mod qstate;
pub mod sampling;

pub use error::{Error, Result};
pub use qstate::{DensityMatrix, Dims, FeatureVector};
pub use sampling::{Label, LabeledDataset, Record};
