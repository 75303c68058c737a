//! Oracles for the acceptance suite, implemented from scratch on flat
//! buffers so they share no code path with the library under test: a
//! cyclic Jacobi eigensolver for the Gaussian distance, a dense Weiszfeld
//! iteration for 1-D medians, an exhaustive zoom search for 2x2 Gaussian
//! medians, and a synthetic two-blob digit dataset in IDX byte format.

pub mod blobs;
pub mod gridsearch;
pub mod jacobi;
pub mod weiszfeld;
