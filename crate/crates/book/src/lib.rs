//! Guide chapters, kept compiling as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}
#[doc = include_str!("../../../book/src/formulas.md")]
pub mod formulas {}
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../../book/src/strategies.md")]
pub mod strategies {}
#[doc = include_str!("../../../book/src/games.md")]
pub mod games {}
#[doc = include_str!("../../../book/src/futures.md")]
pub mod futures {}
#[doc = include_str!("../../../book/src/checking.md")]
pub mod checking {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
