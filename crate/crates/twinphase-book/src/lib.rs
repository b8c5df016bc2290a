//! Test shim for the user guide: each chapter of `book/src/` is included
//! as module documentation, so every fenced Rust block in the book runs as
//! a doc-test of this crate and `cargo test --workspace` fails if the book
//! ever drifts from the library.
#![doc = include_str!("../../../book/src/introduction.md")]

#[doc = include_str!("../../../book/src/grids-and-fields.md")]
pub mod grids_and_fields {}

#[doc = include_str!("../../../book/src/propagation.md")]
pub mod propagation {}

#[doc = include_str!("../../../book/src/photon-statistics.md")]
pub mod photon_statistics {}

#[doc = include_str!("../../../book/src/phase-retrieval.md")]
pub mod phase_retrieval {}

#[doc = include_str!("../../../book/src/noise-subtraction.md")]
pub mod noise_subtraction {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
