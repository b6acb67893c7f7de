//! Polar codes with local-global decoding.
//!
//! Several inner polar codes ("subblocks") are coupled through a systematic
//! outer polar code whose codeword rides on the inner codes' semipolarized
//! bit-channels. A subblock can be decoded alone for low-latency random
//! access, or all codes can be decoded together for better reliability.
//!
//! - [`polar`]: transform, Bhattacharyya construction, channel classification
//! - [`systematic`]: systematic encoding
//! - [`bp`]: belief-propagation decoding with G-matrix early stopping
//! - [`coupled`]: the coupled encoder and the local / global decoders
//! - [`channel`], [`sim`], [`config`]: BPSK-AWGN Monte Carlo simulation

pub mod bp;
pub mod channel;
pub mod config;
pub mod coupled;
pub mod error;
pub mod polar;
pub mod sim;
pub mod systematic;

pub use bp::{bp_decode, box_plus, g_matrix_check, BpOptions, CheckRule, DecodeOutcome, MessageGrid, LLR_MAX};
pub use coupled::{
    global_decode, lg_encode, local_decode, validate_config, CoupledConfig, CouplingParams, InterleaverMap, RateReport,
};
pub use error::{Error, Result};
pub use polar::{construct_reliability, partition_channels, polar_transform, CodeConfig};
pub use systematic::{systematic_encode, systematic_extract, SystematicCodeword};
