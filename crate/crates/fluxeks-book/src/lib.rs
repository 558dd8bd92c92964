//! Doc-test shim for the book.
//!
//! mdBook cannot run snippets that depend on external crates, so each chapter
//! is included here as a module's documentation and `cargo test --doc` runs
//! every ```rust block against the real library. One module per chapter keeps
//! failures attributable to the right file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/forward-model.md")]
pub mod forward_model {}

#[doc = include_str!("../../../book/src/flux-waveforms.md")]
pub mod flux_waveforms {}

#[doc = include_str!("../../../book/src/state-estimation.md")]
pub mod state_estimation {}

#[doc = include_str!("../../../book/src/surrogates.md")]
pub mod surrogates {}

#[doc = include_str!("../../../book/src/inversion.md")]
pub mod inversion {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
