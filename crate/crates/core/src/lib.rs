//! Intrusion-detection experiment library for KDD-format connection records.
//!
//! The crate covers a full desk-scale pipeline: parsing and numeric
//! transformation of 41-feature connection records ([`kdd`]), equal-frequency
//! discretization ([`discretize`]), rough-set attribute reduction
//! ([`rough_set`]), information-gain feature ranking ([`entropy`]), a binary
//! RBF-kernel SVM trained with sequential minimal optimization ([`svm`]),
//! confusion-matrix reporting ([`metrics`]), and the experiment orchestration
//! that ties the arms together ([`pipeline`]).
//!
//! Heavy batch loops (kernel rows, candidate scans, batch prediction) fan out
//! through rayon when the `parallel` feature is enabled (the default).
//! Disabling it yields a fully sequential build with bit-identical results:
//! every parallel site is a pure index map, never a parallel floating-point
//! reduction.

pub mod discretize;
pub mod entropy;
pub mod kdd;
pub mod mask;
pub mod metrics;
pub mod pipeline;
pub mod rough_set;
pub mod svm;
pub mod table;

mod exec;
