//! Multiple-instance learning on point patterns.
//!
//! Observations are finite sets (multisets) of points or tokens. The crate
//! compares them with the Hausdorff, Wasserstein and OSPA set distances and
//! builds three learners on top:
//!
//! - [`ap`]: affinity-propagation clustering on set-distance similarities,
//! - [`knn`]: k-nearest-neighbour classification with OSPA cutoff learning,
//! - [`novelty`]: nearest-normal-neighbour novelty detection.
//!
//! [`simgen`] draws benchmark datasets from Poisson point processes with
//! Gaussian intensities and [`eval`] scores the results.
//!
//! ```
//! use ppkit::{setdist, PointPattern, BaseDistance};
//!
//! let x = PointPattern::numeric("x", vec![vec![0.0]]).unwrap();
//! let y = PointPattern::numeric("y", vec![vec![0.0], vec![10.0]]).unwrap();
//! let e = BaseDistance::Euclidean;
//! assert_eq!(setdist::hausdorff(&x, &y, e).unwrap(), 10.0);
//! assert_eq!(setdist::wasserstein(&x, &y, 1.0, e).unwrap(), 5.0);
//! assert_eq!(setdist::ospa(&x, &y, 1.0, 5.0, e).unwrap(), 2.5);
//! ```

pub mod ap;
pub mod base;
pub mod error;
pub mod eval;
pub mod io;
pub mod knn;
pub mod novelty;
pub mod pattern;
pub mod setdist;
pub mod simgen;
pub mod solver;

pub use base::BaseDistance;
pub use error::{Error, Result};
pub use pattern::{Element, ElementKind, LabeledDataset, PointPattern};
pub use setdist::{DistanceMatrix, DistanceSpec, Family};
