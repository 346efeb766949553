//! The guide in `book/` has no way to link against workspace crates when
//! mdbook tests it, so each chapter is included here and checked by
//! `cargo test --doc` instead.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/trap.md")]
mod trap {}
#[doc = include_str!("../../../book/src/design.md")]
mod design {}
#[doc = include_str!("../../../book/src/two_level.md")]
mod two_level {}
#[doc = include_str!("../../../book/src/grid.md")]
mod grid {}
#[doc = include_str!("../../../book/src/robustness.md")]
mod robustness {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
#[doc = include_str!("../../../book/src/validation.md")]
mod validation {}

#[doc = include_str!("../../../README.md")]
mod readme {}
