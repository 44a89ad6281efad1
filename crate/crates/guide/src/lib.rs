// SPDX-License-Identifier: MIT OR Apache-2.0

//! Compiles and runs every code listing of the book as a doctest.
//!
//! mdbook cannot test listings that depend on external crates, so each
//! chapter is pulled in as the docs of an empty module instead.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/signals.md")]
pub mod signals {}
#[doc = include_str!("../../../book/src/difference-design.md")]
pub mod difference_design {}
#[doc = include_str!("../../../book/src/preconditioning.md")]
pub mod preconditioning {}
#[doc = include_str!("../../../book/src/fusion-path.md")]
pub mod fusion_path {}
#[doc = include_str!("../../../book/src/irrepresentable.md")]
pub mod irrepresentable {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
