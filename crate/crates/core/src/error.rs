use thiserror::Error;

use crate::dataset::DatasetError;
use crate::decoding::DecodeError;
use crate::evaluation::EvalError;
use crate::gsn::GsnError;
use crate::spike_codec::CodecError;
use crate::wta_network::NetworkError;

/// Any failure raised by the pipeline, tagged with the stage it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset: {0}")]
    Dataset(#[from] DatasetError),
    #[error("gsn: {0}")]
    Gsn(#[from] GsnError),
    #[error("spike codec: {0}")]
    Codec(#[from] CodecError),
    #[error("network: {0}")]
    Network(#[from] NetworkError),
    #[error("decoding: {0}")]
    Decode(#[from] DecodeError),
    #[error("evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
