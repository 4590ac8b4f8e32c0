//! Direct q-ary polar codes over GF(q).
//!
//! The crate provides finite-field arithmetic ([`gfq`]), the extended polar
//! transform ([`transform`]), a successive-cancellation decoder working on
//! log-domain LR vectors ([`decoder`]), Monte-Carlo and exact code
//! construction ([`construction`]), lossless source coding with side
//! information ([`source`]), channel coding with synchronized frozen streams
//! ([`channel`]), an AWGN modem with PAM/QAM/circular constellations
//! ([`modem`]) and brute-force reference implementations ([`oracle`],
//! behind the default `oracle` feature).
//!
//! All indices are 0-based.

pub mod channel;
pub mod codefile;
pub mod construction;
pub mod decoder;
pub mod error;
pub mod gfq;
pub mod modem;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod source;
pub mod transform;

pub use channel::{channel_decode, channel_encode, FrozenStream};
pub use construction::{
    estimate_z_mc, exact_z, exact_z_all, select_info_set, Criterion, JointSampler, McConfig, PolarCode,
    ZEstimate, ZMode,
};
pub use decoder::{detect, lr_combine_even, lr_combine_odd, Decoded, FrozenPolicy, LlrVector, ScDecoder};
pub use error::{Error, Result};
pub use gfq::{FieldSpec, Symbol};
pub use modem::{Constellation, NoiseModel};
pub use source::{compress, decompress, error_bound, CompressedBlock, JointSource};
pub use transform::{bit_reversal, polar_decode_transform, polar_encode};
