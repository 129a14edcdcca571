//! Shim crate that turns the book's chapters into rustdoc doc-tests.
//!
//! mdBook cannot run snippets against workspace crates, so each chapter is
//! included here as module documentation; `cargo test --doc -p
//! vsp-book-tests` then compiles and runs every ```rust fence in the book.
//! A failing test names the chapter via its module.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}

#[doc = include_str!("../../../book/src/solvers.md")]
pub mod solvers {}

#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}

#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness {}

#[doc = include_str!("../../../book/src/internals.md")]
pub mod internals {}
