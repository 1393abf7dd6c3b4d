//! Passive error averaging for linear-optical networks.
//!
//! A noisy target network is copied `N` times between an encoder and its
//! inverse; post-selecting on vacuum in the extra modes leaves the average of
//! the copies on the kept modes. This crate builds those networks, evaluates
//! few-photon statistics exactly, and estimates noise averages by Monte Carlo.

pub mod analytics;
pub mod circuit;
pub mod encoding;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod montecarlo;
pub mod phase_stats;

pub use circuit::{compile, mean_matrix, sample_realization, Circuit, Element, NoiseRealization};
pub use encoding::{encode, EncodedCircuit, EncoderKind, EncodingScheme, Strategy};
pub use error::{Error, Result};
pub use fock::FockState;
pub use linalg::NetworkMatrix;
