//! Hysteresis thresholding of vesselness maps.
//!
//! Fixed absolute thresholds do not transfer between scans (or between
//! enhancement scales), so thresholds here are expressed as fractions
//! of a per-map anchor: a high percentile of the strictly positive
//! vesselness scores. Voxels at or above the high threshold seed a
//! flood fill that is allowed to grow through voxels at or above the
//! low threshold, which keeps faint vessel segments that are connected
//! to confident ones while rejecting isolated low-score noise.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::filters::VesselnessMap;
use crate::volume::{BinaryMask, Connectivity};

/// Absolute low/high thresholds plus the anchor fractions they came
/// from (kept for reporting).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdPair {
    pub low: f64,
    pub high: f64,
    pub low_frac: f64,
    pub high_frac: f64,
}

impl ThresholdPair {
    /// Build a pair from absolute values; `0 < low <= high` required.
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low > 0.0) || !(high >= low) || !low.is_finite() || !high.is_finite() {
            return Err(Error::Parameter(format!(
                "thresholds must satisfy 0 < low <= high (got low={low}, high={high})"
            )));
        }
        Ok(ThresholdPair {
            low,
            high,
            low_frac: f64::NAN,
            high_frac: f64::NAN,
        })
    }
}

/// Derive absolute thresholds from a vesselness map.
///
/// The anchor is the given percentile (nearest-rank) of the map's
/// strictly positive scores; the returned thresholds are
/// `low_frac * anchor` and `high_frac * anchor`. Fractions must satisfy
/// `0 < low_frac < high_frac <= 1`. A map with no positive score (e.g.
/// a constant input volume) has nothing to anchor on and yields an
/// empty-selection error.
pub fn relative_thresholds(
    map: &VesselnessMap,
    low_frac: f64,
    high_frac: f64,
    percentile: f64,
) -> Result<ThresholdPair> {
    if !(low_frac > 0.0) || !(high_frac > low_frac) || !(high_frac <= 1.0) {
        return Err(Error::Parameter(format!(
            "threshold fractions must satisfy 0 < low < high <= 1 \
             (got low={low_frac}, high={high_frac})"
        )));
    }
    let anchor = map.volume.percentile(percentile, true)?;
    let mut pair = ThresholdPair::new(low_frac * anchor, high_frac * anchor)?;
    pair.low_frac = low_frac;
    pair.high_frac = high_frac;
    Ok(pair)
}

/// Hysteresis threshold: keep every voxel at or above `pair.high`, plus
/// any voxel at or above `pair.low` connected to one of those through
/// the `>= low` set under the given connectivity.
///
/// Both comparisons are inclusive. Implemented as a breadth-first flood
/// fill seeded at all strong voxels; the output is the set of reached
/// voxels, which is independent of visit order and therefore
/// deterministic. With `low == high` this degenerates to a simple
/// threshold.
pub fn hysteresis(
    map: &VesselnessMap,
    pair: &ThresholdPair,
    connectivity: Connectivity,
) -> Result<BinaryMask> {
    let vol = &map.volume;
    let dims = vol.dims();
    let [nx, ny, nz] = dims;
    let data = vol.data();

    let mut keep = vec![false; data.len()];
    let mut queue = VecDeque::new();
    for (p, &v) in data.iter().enumerate() {
        if v >= pair.high {
            keep[p] = true;
            queue.push_back(p);
        }
    }

    let offsets = connectivity.offsets();
    while let Some(p) = queue.pop_front() {
        let i = (p % nx) as isize;
        let j = ((p / nx) % ny) as isize;
        let k = (p / (nx * ny)) as isize;
        for &[di, dj, dk] in offsets {
            let (ni, nj, nk) = (i + di as isize, j + dj as isize, k + dk as isize);
            if ni < 0
                || nj < 0
                || nk < 0
                || ni >= nx as isize
                || nj >= ny as isize
                || nk >= nz as isize
            {
                continue;
            }
            let q = ni as usize + nx * (nj as usize + ny * nk as usize);
            if !keep[q] && data[q] >= pair.low {
                keep[q] = true;
                queue.push_back(q);
            }
        }
    }

    BinaryMask::with_orientation(dims, vol.spacing(), vol.orientation(), keep)
}

/// Voxelwise OR of two masks on the same grid.
pub fn union_masks(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    if !a.same_grid(b) {
        return Err(Error::GeometryMismatch(format!(
            "mask union needs matching grids (got {:?} @ {:?} vs {:?} @ {:?})",
            a.dims(),
            a.spacing(),
            b.dims(),
            b.spacing()
        )));
    }
    let data: Vec<bool> = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| *x || *y)
        .collect();
    BinaryMask::with_orientation(a.dims(), a.spacing(), a.orientation(), data)
}
