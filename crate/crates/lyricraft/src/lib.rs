//! IO, file formats, the suggestion service and the remote backend for
//! `lyricraft-core`.

pub mod corpus_io;
pub mod dataset_io;
pub mod error;
pub mod g2p;
pub mod model_io;
pub mod remote;
pub mod service;
pub mod session;
pub mod toolkit;

pub use error::{Error, Result};
