//! Error type shared by every stage of the pipeline.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error for I/O, format, geometry, and parameter failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying filesystem or stream failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// The file is not a NIfTI-1 single-file image (bad magic or
    /// unsupported layout).
    #[error("format error: {0}")]
    Format(String),

    /// The file claims to be NIfTI-1 but its header or payload is
    /// internally inconsistent.
    #[error("corrupt file: {0}")]
    Corrupt(String),

    /// The voxel datatype is valid NIfTI but not supported here.
    #[error("unsupported datatype code {0}")]
    UnsupportedDatatype(i16),

    /// Voxel spacing or dimensions violate the geometry invariants.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Voxel data contains NaN or infinity; the filter cascade requires
    /// finite intensities end to end.
    #[error("non-finite voxel data: {0}")]
    NonFinite(String),

    /// A statistic was requested over an empty voxel selection.
    #[error("empty selection: {0}")]
    EmptySelection(String),

    /// A caller-supplied parameter is out of its documented range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two volumes that must share a voxel grid do not.
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
}
