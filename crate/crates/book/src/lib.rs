//! The listings of the guide under `book/src`, run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/sequences.md")]
pub mod sequences {}
#[doc = include_str!("../../../book/src/reduction.md")]
pub mod reduction {}
#[doc = include_str!("../../../book/src/averages.md")]
pub mod averages {}
#[doc = include_str!("../../../book/src/couplings.md")]
pub mod couplings {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
