//! The book under `book/` rendered as doc-tested modules.
//!
//! mdBook renders the chapters for reading; including the same markdown
//! here makes `cargo test --doc` compile and run every code snippet, so the
//! guide cannot drift from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/weather.md")]
pub mod weather {}

#[doc = include_str!("../../../book/src/thermal-model.md")]
pub mod thermal_model {}

#[doc = include_str!("../../../book/src/environment.md")]
pub mod environment {}

#[doc = include_str!("../../../book/src/q-learning.md")]
pub mod q_learning {}

#[doc = include_str!("../../../book/src/dqn.md")]
pub mod dqn {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
