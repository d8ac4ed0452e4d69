//! The narrative guide, shared with the rendered book.
//!
//! Each module embeds one chapter of `book/src/`; `cargo test --doc` runs
//! every code block, which keeps the book and the crate in sync.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}

#[doc = include_str!("../../../book/src/zones.md")]
pub mod zones {}

#[doc = include_str!("../../../book/src/fixed-point.md")]
pub mod fixed_point {}

#[doc = include_str!("../../../book/src/airtime.md")]
pub mod airtime {}

#[doc = include_str!("../../../book/src/delay.md")]
pub mod delay {}

#[doc = include_str!("../../../book/src/ccdf.md")]
pub mod ccdf {}

#[doc = include_str!("../../../book/src/simulator.md")]
pub mod simulator {}

#[doc = include_str!("../../../book/src/optimization.md")]
pub mod optimization {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
