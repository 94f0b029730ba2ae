//! Decentralized pliable index coding: closed-form optimal lengths,
//! code synthesis, validation and an exhaustive search oracle.

pub mod construct;
pub mod error;
pub mod gf;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod theorems;
pub mod verify;

pub use error::{Error, Result};

#[cfg(feature = "cli")]
pub mod cli;
