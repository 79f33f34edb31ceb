//! Classical vessel segmentation for 3-D time-of-flight MR angiography.
//!
//! The pipeline enhances bright tubular structures with a Hessian
//! eigenvalue line filter (Sato et al., *Medical Image Analysis* 1998)
//! evaluated at two physical scales, binarizes each enhanced map with
//! percentile-anchored hysteresis thresholds, merges the per-scale masks,
//! and discards connected components below a physical volume cutoff.
//! Everything is deterministic: repeated runs (at any thread count)
//! produce bit-identical masks.
//!
//! The stages are exposed individually so they can be recombined or
//! ablated:
//!
//! * [`volume`] — NIfTI-1 I/O, the dense volume/mask containers, and
//!   intensity statistics.
//! * [`filters`] — Gaussian smoothing, Hessian assembly, the symmetric
//!   3x3 eigensolver, and the tubular vesselness measure.
//! * [`threshold`] — percentile-anchored hysteresis binarization.
//! * [`components`] — connected-component labeling and the physical
//!   volume filter.
//! * [`pipeline`] — the end-to-end segmentation and its ablation
//!   variants.
//! * [`phantom`] — synthetic tube phantoms and segmentation metrics for
//!   validation without patient data.

pub mod components;
pub mod error;
pub mod filters;
pub mod phantom;
pub mod pipeline;
pub mod threshold;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{BinaryMask, Connectivity, Orientation, Volume3D};
