//! Compiles the guide in `book/` so its Rust examples run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/parsing.md")]
pub mod parsing {}

#[doc = include_str!("../../../book/src/cpg.md")]
pub mod cpg {}

#[doc = include_str!("../../../book/src/queries.md")]
pub mod queries {}

#[doc = include_str!("../../../book/src/detectors.md")]
pub mod detectors {}

#[doc = include_str!("../../../book/src/clones.md")]
pub mod clones {}

#[doc = include_str!("../../../book/src/study.md")]
pub mod study {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
