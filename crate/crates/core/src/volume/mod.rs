//! Dense volumetric containers and voxel-grid bookkeeping.
//!
//! A [`Volume3D`] is a dense scalar field on a regular anisotropic grid:
//! intensities are stored as `f64` in x-fastest order (the NIfTI layout),
//! and the physical voxel spacing is carried in millimetres so that every
//! downstream computation — smoothing widths, derivative steps, component
//! volumes — can work in physical units. A [`BinaryMask`] is the boolean
//! counterpart sharing the same grid.
//!
//! Intensities are required to be finite everywhere. Rejecting NaN/Inf at
//! the container boundary (rather than propagating them through the filter
//! cascade) keeps every later stage total and makes failures attributable
//! to the offending input file.

mod nifti;

pub use nifti::{read_header, read_nifti, write_mask, write_nifti, HeaderInfo};

use crate::error::{Error, Result};

/// Affine orientation metadata carried through from input to output files.
///
/// The segmentation itself never interprets these fields; they exist so a
/// mask written next to its source volume lands in the same world space
/// when both are opened in a viewer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Orientation {
    /// Stored qfac (`pixdim[0]`); ±1, with 0 conventionally meaning +1.
    pub qfac: f32,
    /// NIfTI qform code (0 = unknown).
    pub qform_code: i16,
    /// NIfTI sform code (0 = unknown).
    pub sform_code: i16,
    /// Quaternion b, c, d.
    pub quatern: [f32; 3],
    /// Quaternion offset x, y, z.
    pub qoffset: [f32; 3],
    /// Affine rows `srow_x`, `srow_y`, `srow_z`.
    pub srow: [[f32; 4]; 3],
}

impl Default for Orientation {
    fn default() -> Self {
        Orientation {
            qfac: 1.0,
            qform_code: 0,
            sform_code: 0,
            quatern: [0.0; 3],
            qoffset: [0.0; 3],
            srow: [[0.0; 4]; 3],
        }
    }
}

/// Neighborhood definition on the voxel grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    /// Face neighbors only.
    Six,
    /// Face and edge neighbors.
    Eighteen,
    /// Face, edge, and corner neighbors.
    TwentySix,
}

const OFFSETS_6: [[i32; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

const OFFSETS_18: [[i32; 3]; 18] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
    [-1, -1, 0],
    [-1, 1, 0],
    [1, -1, 0],
    [1, 1, 0],
    [-1, 0, -1],
    [-1, 0, 1],
    [1, 0, -1],
    [1, 0, 1],
    [0, -1, -1],
    [0, -1, 1],
    [0, 1, -1],
    [0, 1, 1],
];

const OFFSETS_26: [[i32; 3]; 26] = [
    [-1, -1, -1],
    [0, -1, -1],
    [1, -1, -1],
    [-1, 0, -1],
    [0, 0, -1],
    [1, 0, -1],
    [-1, 1, -1],
    [0, 1, -1],
    [1, 1, -1],
    [-1, -1, 0],
    [0, -1, 0],
    [1, -1, 0],
    [-1, 0, 0],
    [1, 0, 0],
    [-1, 1, 0],
    [0, 1, 0],
    [1, 1, 0],
    [-1, -1, 1],
    [0, -1, 1],
    [1, -1, 1],
    [-1, 0, 1],
    [0, 0, 1],
    [1, 0, 1],
    [-1, 1, 1],
    [0, 1, 1],
    [1, 1, 1],
];

impl Connectivity {
    /// Neighbor offsets `[di, dj, dk]` for this connectivity.
    pub fn offsets(self) -> &'static [[i32; 3]] {
        match self {
            Connectivity::Six => &OFFSETS_6,
            Connectivity::Eighteen => &OFFSETS_18,
            Connectivity::TwentySix => &OFFSETS_26,
        }
    }

    /// Parse from the conventional neighbor count (6, 18, or 26).
    pub fn from_count(n: u8) -> Result<Self> {
        match n {
            6 => Ok(Connectivity::Six),
            18 => Ok(Connectivity::Eighteen),
            26 => Ok(Connectivity::TwentySix),
            other => Err(Error::Parameter(format!(
                "connectivity must be 6, 18, or 26 (got {other})"
            ))),
        }
    }

    /// The conventional neighbor count.
    pub fn count(self) -> u8 {
        match self {
            Connectivity::Six => 6,
            Connectivity::Eighteen => 18,
            Connectivity::TwentySix => 26,
        }
    }
}

impl std::fmt::Display for Connectivity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.count())
    }
}

pub(crate) fn check_geometry(dims: [usize; 3], spacing: [f64; 3]) -> Result<()> {
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidGeometry(format!(
            "dimensions must be positive (got {dims:?})"
        )));
    }
    if spacing.iter().any(|s| !s.is_finite() || *s <= 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "voxel spacing must be finite and positive (got {spacing:?})"
        )));
    }
    Ok(())
}

/// Dense 3-D scalar volume with physical voxel spacing in millimetres.
///
/// Data is stored x-fastest: voxel `(i, j, k)` lives at linear index
/// `i + nx * (j + ny * k)`. All intensities are finite by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume3D {
    dims: [usize; 3],
    spacing: [f64; 3],
    orientation: Orientation,
    data: Vec<f64>,
}

impl Volume3D {
    /// Build a volume, validating geometry, length, and finiteness.
    pub fn new(dims: [usize; 3], spacing: [f64; 3], data: Vec<f64>) -> Result<Self> {
        Self::with_orientation(dims, spacing, Orientation::default(), data)
    }

    /// [`Volume3D::new`] with explicit orientation metadata.
    pub fn with_orientation(
        dims: [usize; 3],
        spacing: [f64; 3],
        orientation: Orientation,
        data: Vec<f64>,
    ) -> Result<Self> {
        check_geometry(dims, spacing)?;
        let expected = dims[0] * dims[1] * dims[2];
        if data.len() != expected {
            return Err(Error::InvalidGeometry(format!(
                "data length {} does not match dims {:?} ({} voxels)",
                data.len(),
                dims,
                expected
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "voxel at linear index {pos} is {}",
                data[pos]
            )));
        }
        Ok(Volume3D {
            dims,
            spacing,
            orientation,
            data,
        })
    }

    /// Build a volume by evaluating `f` at every voxel coordinate.
    pub fn from_fn<F>(dims: [usize; 3], spacing: [f64; 3], mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> f64,
    {
        check_geometry(dims, spacing)?;
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    data.push(f(i, j, k));
                }
            }
        }
        Self::new(dims, spacing, data)
    }

    /// Grid dimensions `(nx, ny, nz)`.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Voxel spacing in millimetres per axis.
    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    /// Orientation metadata (passed through to output files).
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Total voxel count.
    pub fn num_voxels(&self) -> usize {
        self.data.len()
    }

    /// Linear index of voxel `(i, j, k)`.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    /// Intensity at voxel `(i, j, k)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(i, j, k)]
    }

    /// Raw intensities in x-fastest order.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Consume the volume and return its raw intensities.
    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Physical volume of a single voxel in mm³.
    ///
    /// At the common angiographic spacing 0.47 x 0.47 x 0.8 mm this is
    /// 0.17672 mm³, the unit in which component volume cutoffs are
    /// expressed.
    pub fn voxel_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// Nearest-rank percentile of the voxel intensities.
    ///
    /// With `restrict_to_positive` set, only strictly positive voxels are
    /// eligible; this is the form the pipeline uses, since zero fills the
    /// background of vesselness maps and would otherwise drag any anchor
    /// percentile toward zero. The result is always an intensity that
    /// occurs in the eligible set: the eligible values are sorted
    /// ascending and the value at rank `ceil(p·N/100)` (1-based) is
    /// returned. The rank is evaluated with a 1e-9 downward slack before
    /// the ceiling so that decimal percentages act as exact decimals
    /// (`p = 99.9`, `N = 1000` must give rank 999 even though the binary
    /// representation of 99.9 lands a hair above it).
    ///
    /// Errors with [`Error::Parameter`] unless `0 < p <= 100`, and with
    /// [`Error::EmptySelection`] if no voxel is eligible.
    pub fn percentile(&self, p: f64, restrict_to_positive: bool) -> Result<f64> {
        if !(p > 0.0 && p <= 100.0) {
            return Err(Error::Parameter(format!(
                "percentile must lie in (0, 100] (got {p})"
            )));
        }
        let mut eligible: Vec<f64> = if restrict_to_positive {
            self.data.iter().copied().filter(|v| *v > 0.0).collect()
        } else {
            self.data.clone()
        };
        if eligible.is_empty() {
            return Err(Error::EmptySelection(
                "percentile over zero eligible voxels".into(),
            ));
        }
        let rank = nearest_rank(p, eligible.len());
        let (_, value, _) = eligible.select_nth_unstable_by(rank - 1, f64::total_cmp);
        Ok(*value)
    }
}

/// 1-based nearest rank for percentile `p` over `n` samples.
pub(crate) fn nearest_rank(p: f64, n: usize) -> usize {
    debug_assert!(n > 0);
    let raw = p * (n as f64) / 100.0;
    let rank = (raw - 1e-9).ceil() as usize;
    rank.clamp(1, n)
}

/// Dense boolean mask on the same grid layout as [`Volume3D`].
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryMask {
    dims: [usize; 3],
    spacing: [f64; 3],
    orientation: Orientation,
    data: Vec<bool>,
}

impl BinaryMask {
    /// Build a mask, validating geometry and length.
    pub fn new(dims: [usize; 3], spacing: [f64; 3], data: Vec<bool>) -> Result<Self> {
        Self::with_orientation(dims, spacing, Orientation::default(), data)
    }

    /// [`BinaryMask::new`] with explicit orientation metadata.
    pub fn with_orientation(
        dims: [usize; 3],
        spacing: [f64; 3],
        orientation: Orientation,
        data: Vec<bool>,
    ) -> Result<Self> {
        check_geometry(dims, spacing)?;
        let expected = dims[0] * dims[1] * dims[2];
        if data.len() != expected {
            return Err(Error::InvalidGeometry(format!(
                "mask length {} does not match dims {:?} ({} voxels)",
                data.len(),
                dims,
                expected
            )));
        }
        Ok(BinaryMask {
            dims,
            spacing,
            orientation,
            data,
        })
    }

    /// All-false mask on the given grid.
    pub fn empty(dims: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        let n = dims[0] * dims[1] * dims[2];
        Self::new(dims, spacing, vec![false; n])
    }

    /// Grid dimensions `(nx, ny, nz)`.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Voxel spacing in millimetres per axis.
    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    /// Orientation metadata (passed through to output files).
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Physical volume of a single voxel in mm³.
    pub fn voxel_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// Linear index of voxel `(i, j, k)`.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    /// Value at voxel `(i, j, k)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.data[self.idx(i, j, k)]
    }

    /// Number of set voxels.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|v| **v).count()
    }

    /// Raw mask values in x-fastest order.
    pub fn data(&self) -> &[bool] {
        &self.data
    }

    /// Consume the mask and return its raw values.
    pub fn into_data(self) -> Vec<bool> {
        self.data
    }

    /// True when `other` lives on an identical grid (dims and spacing).
    pub fn same_grid(&self, other: &BinaryMask) -> bool {
        self.dims == other.dims && self.spacing == other.spacing
    }
}
