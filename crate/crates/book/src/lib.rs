//! The guide's chapters, compiled so their snippets run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/graphs.md")]
mod graphs {}

#[doc = include_str!("../../../book/src/programs.md")]
mod programs {}

#[doc = include_str!("../../../book/src/generation.md")]
mod generation {}

#[doc = include_str!("../../../book/src/balancing.md")]
mod balancing {}

#[doc = include_str!("../../../book/src/splits.md")]
mod splits {}

#[doc = include_str!("../../../book/src/evaluation.md")]
mod evaluation {}

#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
