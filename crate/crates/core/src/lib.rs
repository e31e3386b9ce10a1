// SPDX-License-Identifier: MIT OR Apache-2.0

pub mod baseline;
pub mod bench;
pub mod error;
pub mod io;
pub mod mosum;
pub mod path;
pub mod sdll;
pub mod signal;
mod stats;

pub use error::{Error, Result};
