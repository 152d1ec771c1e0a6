//! Doc-test harness for the guide in `book/`.
//!
//! Each chapter is attached as the documentation of an empty module, so
//! every fenced Rust block in the book compiles and runs under
//! `cargo test`. If an example drifts from the library's API or behavior,
//! the build breaks here.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/grids.md")]
pub mod grids {}

#[doc = include_str!("../../../book/src/preprocessing.md")]
pub mod preprocessing {}

#[doc = include_str!("../../../book/src/detection.md")]
pub mod detection {}

#[doc = include_str!("../../../book/src/statistics.md")]
pub mod statistics {}

#[doc = include_str!("../../../book/src/scalefree.md")]
pub mod scalefree {}

#[doc = include_str!("../../../book/src/attribution.md")]
pub mod attribution {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/determinism.md")]
pub mod determinism {}
