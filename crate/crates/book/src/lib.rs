//! The guide in `book/src`, compiled so that `cargo test --doc` runs every
//! snippet. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/curves.md")]
pub mod curves {}
#[doc = include_str!("../../../book/src/cycles.md")]
pub mod cycles {}
#[doc = include_str!("../../../book/src/periods.md")]
pub mod periods {}
#[doc = include_str!("../../../book/src/degenerations.md")]
pub mod degenerations {}
#[doc = include_str!("../../../book/src/potential.md")]
pub mod potential {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
