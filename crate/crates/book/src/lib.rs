//! The guide's chapters, compiled as documentation so every Rust listing in
//! `book/src` runs as a doctest.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral {}

#[doc = include_str!("../../../book/src/channel.md")]
pub mod channel {}

#[doc = include_str!("../../../book/src/gqi.md")]
pub mod gqi {}

#[doc = include_str!("../../../book/src/dgqi.md")]
pub mod dgqi {}

#[doc = include_str!("../../../book/src/keyrate.md")]
pub mod keyrate {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
