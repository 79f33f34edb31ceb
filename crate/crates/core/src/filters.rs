//! Tubular structure enhancement: Gaussian scale space, Hessian
//! assembly, symmetric 3x3 eigendecomposition, and the Sato line filter
//! (Sato et al., "Three-dimensional multi-scale line filter for
//! segmentation and visualization of curvilinear structures in medical
//! images", Medical Image Analysis 2(2), 1998).
//!
//! All geometry is physical: smoothing widths are given in millimetres
//! and converted to per-axis voxel sigmas, and derivative steps use the
//! voxel spacing, so results are consistent across anisotropic grids.
//! Every operation here is a pure per-voxel or per-line map evaluated in
//! a fixed order, which is what makes the pipeline bit-reproducible at
//! any thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::volume::Volume3D;

/// Weighting parameters of the Sato vesselness measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SatoParams {
    /// Exponent on |lambda2| / |lambda3| (cross-section symmetry).
    pub gamma23: f64,
    /// Exponent on the lambda1 weight (suppresses blobs and plates).
    pub gamma12: f64,
    /// Asymmetry factor for positive lambda1 (curved bright structures).
    pub alpha: f64,
}

impl Default for SatoParams {
    fn default() -> Self {
        SatoParams {
            gamma23: 1.0,
            gamma12: 1.0,
            alpha: 0.25,
        }
    }
}

impl SatoParams {
    /// Validate the documented ranges: `alpha > 0`, gammas `>= 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Parameter(format!(
                "sato alpha must be finite and positive (got {})",
                self.alpha
            )));
        }
        for (name, g) in [("gamma23", self.gamma23), ("gamma12", self.gamma12)] {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(Error::Parameter(format!(
                    "sato {name} must be finite and non-negative (got {g})"
                )));
            }
        }
        Ok(())
    }
}

/// Eigenvalues of a symmetric 3x3 matrix, sorted `l1 >= l2 >= l3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenTriple {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl EigenTriple {
    fn sorted(mut v: [f64; 3]) -> Self {
        // Three-element sorting network, descending.
        if v[0] < v[1] {
            v.swap(0, 1);
        }
        if v[1] < v[2] {
            v.swap(1, 2);
        }
        if v[0] < v[1] {
            v.swap(0, 1);
        }
        EigenTriple {
            l1: v[0],
            l2: v[1],
            l3: v[2],
        }
    }
}

/// The six independent second derivatives of a smoothed volume, one
/// dense channel per component, all in physical units (1/mm²).
#[derive(Clone, Debug)]
pub struct HessianField {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub xx: Vec<f64>,
    pub yy: Vec<f64>,
    pub zz: Vec<f64>,
    pub xy: Vec<f64>,
    pub xz: Vec<f64>,
    pub yz: Vec<f64>,
}

/// One scale's vesselness scores (non-negative) plus the scale that
/// produced them.
#[derive(Clone, Debug)]
pub struct VesselnessMap {
    pub volume: Volume3D,
    pub scale_mm: f64,
}

/// Mirror (reflect-without-repeat) index: `-1 -> 1`, `n -> n-2`.
#[inline]
fn reflect(q: isize, n: usize) -> usize {
    debug_assert!(n >= 1);
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut m = q.rem_euclid(period);
    if m >= n as isize {
        m = period - m;
    }
    m as usize
}

/// Sampled Gaussian kernel of standard deviation `sigma_vox` voxels,
/// truncated at radius `ceil(4 sigma)` and renormalized to unit sum.
fn gaussian_kernel(sigma_vox: f64) -> Vec<f64> {
    let radius = (4.0 * sigma_vox).ceil() as usize;
    let mut kernel: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|t| (-((t * t) as f64) / (2.0 * sigma_vox * sigma_vox)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= sum;
    }
    kernel
}

/// Convolve one contiguous line with a symmetric kernel, mirroring at
/// the ends. `kernel.len()` is odd; the center weight sits at `radius`.
fn convolve_line(out: &mut [f64], src: &[f64], kernel: &[f64]) {
    let n = src.len();
    let radius = kernel.len() / 2;
    let interior = n.saturating_sub(2 * radius);
    // Left edge (mirrored).
    for i in 0..n.min(radius) {
        let mut acc = 0.0;
        for (t, w) in kernel.iter().enumerate() {
            let q = i as isize + t as isize - radius as isize;
            acc += w * src[reflect(q, n)];
        }
        out[i] = acc;
    }
    // Interior (no bounds handling).
    for i in radius..radius + interior {
        let window = &src[i - radius..=i + radius];
        let mut acc = 0.0;
        for (w, v) in kernel.iter().zip(window) {
            acc += w * v;
        }
        out[i] = acc;
    }
    // Right edge (mirrored).
    for i in (radius + interior).max(n.min(radius))..n {
        let mut acc = 0.0;
        for (t, w) in kernel.iter().enumerate() {
            let q = i as isize + t as isize - radius as isize;
            acc += w * src[reflect(q, n)];
        }
        out[i] = acc;
    }
}

/// Separable pass along the x axis (contiguous lines).
fn smooth_axis_x(src: &[f64], dims: [usize; 3], kernel: &[f64]) -> Vec<f64> {
    let nx = dims[0];
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(nx)
        .zip(src.par_chunks(nx))
        .for_each(|(o, s)| convolve_line(o, s, kernel));
    out
}

/// Separable pass along the y axis, processed one z-slab at a time.
fn smooth_axis_y(src: &[f64], dims: [usize; 3], kernel: &[f64]) -> Vec<f64> {
    let [nx, ny, _] = dims;
    let slab = nx * ny;
    let radius = kernel.len() / 2;
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(slab)
        .zip(src.par_chunks(slab))
        .for_each(|(o, s)| {
            for j in 0..ny {
                let row = &mut o[j * nx..(j + 1) * nx];
                for (t, w) in kernel.iter().enumerate() {
                    let jj = reflect(j as isize + t as isize - radius as isize, ny);
                    let src_row = &s[jj * nx..(jj + 1) * nx];
                    for (acc, v) in row.iter_mut().zip(src_row) {
                        *acc += w * v;
                    }
                }
            }
        });
    out
}

/// Separable pass along the z axis, parallel over output slabs.
fn smooth_axis_z(src: &[f64], dims: [usize; 3], kernel: &[f64]) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let slab = nx * ny;
    let radius = kernel.len() / 2;
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(slab).enumerate().for_each(|(k, o)| {
        for (t, w) in kernel.iter().enumerate() {
            let kk = reflect(k as isize + t as isize - radius as isize, nz);
            let src_slab = &src[kk * slab..(kk + 1) * slab];
            for (acc, v) in o.iter_mut().zip(src_slab) {
                *acc += w * v;
            }
        }
    });
    out
}

/// Gaussian smoothing with an isotropic physical width.
///
/// `sigma_mm` is divided by each axis's voxel spacing, so the effective
/// voxel-space kernel is anisotropic exactly when the grid is. Each 1-D
/// kernel is truncated at radius `ceil(4 sigma_axis)` voxels and
/// renormalized to unit sum; boundaries mirror without repeating the
/// edge sample. The three separable passes run x, then y, then z, each a
/// pure function of its input, so results are identical at any thread
/// count. A normalized non-negative kernel makes this a convex
/// combination per voxel: constants are preserved and the global
/// max/min can only tighten (up to float rounding).
pub fn gaussian_smooth(vol: &Volume3D, sigma_mm: f64) -> Result<Volume3D> {
    if !(sigma_mm > 0.0) || !sigma_mm.is_finite() {
        return Err(Error::Parameter(format!(
            "smoothing sigma must be finite and positive (got {sigma_mm} mm)"
        )));
    }
    let dims = vol.dims();
    let spacing = vol.spacing();
    let kx = gaussian_kernel(sigma_mm / spacing[0]);
    let ky = gaussian_kernel(sigma_mm / spacing[1]);
    let kz = gaussian_kernel(sigma_mm / spacing[2]);
    let pass_x = smooth_axis_x(vol.data(), dims, &kx);
    let pass_y = smooth_axis_y(&pass_x, dims, &ky);
    let pass_z = smooth_axis_z(&pass_y, dims, &kz);
    Volume3D::with_orientation(dims, spacing, vol.orientation(), pass_z)
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
    Z,
}

/// Central first difference along one axis with physical step size and
/// mirrored boundaries (where the difference is exactly zero).
fn central_diff(src: &[f64], dims: [usize; 3], axis: Axis, step: f64) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let slab = nx * ny;
    let inv2h = 1.0 / (2.0 * step);
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(slab).enumerate().for_each(|(k, o)| {
        for j in 0..ny {
            for i in 0..nx {
                let (plus, minus) = match axis {
                    Axis::X => {
                        let ip = reflect(i as isize + 1, nx);
                        let im = reflect(i as isize - 1, nx);
                        (ip + nx * (j + ny * k), im + nx * (j + ny * k))
                    }
                    Axis::Y => {
                        let jp = reflect(j as isize + 1, ny);
                        let jm = reflect(j as isize - 1, ny);
                        (i + nx * (jp + ny * k), i + nx * (jm + ny * k))
                    }
                    Axis::Z => {
                        let kp = reflect(k as isize + 1, nz);
                        let km = reflect(k as isize - 1, nz);
                        (i + nx * (j + ny * kp), i + nx * (j + ny * km))
                    }
                };
                o[i + nx * j] = (src[plus] - src[minus]) * inv2h;
            }
        }
    });
    out
}

/// Central second difference along one axis with physical step size and
/// mirrored boundaries.
fn second_diff(src: &[f64], dims: [usize; 3], axis: Axis, step: f64) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let slab = nx * ny;
    let inv_h2 = 1.0 / (step * step);
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(slab).enumerate().for_each(|(k, o)| {
        for j in 0..ny {
            for i in 0..nx {
                let center = src[i + nx * (j + ny * k)];
                let (plus, minus) = match axis {
                    Axis::X => {
                        let ip = reflect(i as isize + 1, nx);
                        let im = reflect(i as isize - 1, nx);
                        (ip + nx * (j + ny * k), im + nx * (j + ny * k))
                    }
                    Axis::Y => {
                        let jp = reflect(j as isize + 1, ny);
                        let jm = reflect(j as isize - 1, ny);
                        (i + nx * (jp + ny * k), i + nx * (jm + ny * k))
                    }
                    Axis::Z => {
                        let kp = reflect(k as isize + 1, nz);
                        let km = reflect(k as isize - 1, nz);
                        (i + nx * (j + ny * kp), i + nx * (j + ny * km))
                    }
                };
                o[i + nx * j] = (src[plus] - 2.0 * center + src[minus]) * inv_h2;
            }
        }
    });
    out
}

/// Hessian of the sigma-smoothed volume via central finite differences.
///
/// The volume is smoothed once at `sigma_mm`, then differentiated:
/// diagonal terms by second central differences, mixed terms by two
/// successive first central differences (e.g. `Hxy = Dy(Dx(f))`). All
/// steps use the voxel spacing in millimetres, so the returned channels
/// are in 1/mm² regardless of grid anisotropy. Requires at least three
/// samples per axis.
pub fn hessian(vol: &Volume3D, sigma_mm: f64) -> Result<HessianField> {
    let dims = vol.dims();
    if dims.iter().any(|&d| d < 3) {
        return Err(Error::InvalidGeometry(format!(
            "hessian needs at least 3 samples per axis (got {dims:?})"
        )));
    }
    let spacing = vol.spacing();
    let smooth = gaussian_smooth(vol, sigma_mm)?;
    let f = smooth.data();

    let xx = second_diff(f, dims, Axis::X, spacing[0]);
    let yy = second_diff(f, dims, Axis::Y, spacing[1]);
    let zz = second_diff(f, dims, Axis::Z, spacing[2]);
    let dx = central_diff(f, dims, Axis::X, spacing[0]);
    let dy = central_diff(f, dims, Axis::Y, spacing[1]);
    let xy = central_diff(&dx, dims, Axis::Y, spacing[1]);
    let xz = central_diff(&dx, dims, Axis::Z, spacing[2]);
    let yz = central_diff(&dy, dims, Axis::Z, spacing[2]);

    Ok(HessianField {
        dims,
        spacing,
        xx,
        yy,
        zz,
        xy,
        xz,
        yz,
    })
}

/// Scale of a symmetric matrix, used to make tolerances relative.
fn sym_scale(a11: f64, a22: f64, a33: f64, a12: f64, a13: f64, a23: f64) -> f64 {
    a11.abs()
        .max(a22.abs())
        .max(a33.abs())
        .max(a12.abs())
        .max(a13.abs())
        .max(a23.abs())
}

/// Cyclic Jacobi sweeps; unconditionally convergent fallback path.
fn eig_sym3_jacobi(mut a: [[f64; 3]; 3]) -> [f64; 3] {
    let scale = sym_scale(a[0][0], a[1][1], a[2][2], a[0][1], a[0][2], a[1][2]);
    if scale == 0.0 {
        return [0.0; 3];
    }
    let tol = (f64::EPSILON * scale) * (f64::EPSILON * scale);
    for _ in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off <= tol {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut rot = [[0.0; 3]; 3];
            for i in 0..3 {
                rot[i][i] = 1.0;
            }
            rot[p][p] = c;
            rot[q][q] = c;
            rot[p][q] = s;
            rot[q][p] = -s;
            // a <- R^T a R
            let mut tmp = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    tmp[i][j] = (0..3).map(|m| a[i][m] * rot[m][j]).sum();
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    a[i][j] = (0..3).map(|m| rot[m][i] * tmp[m][j]).sum();
                }
            }
            // Re-symmetrize to keep rounding from accumulating.
            let s01 = 0.5 * (a[0][1] + a[1][0]);
            let s02 = 0.5 * (a[0][2] + a[2][0]);
            let s12 = 0.5 * (a[1][2] + a[2][1]);
            a[0][1] = s01;
            a[1][0] = s01;
            a[0][2] = s02;
            a[2][0] = s02;
            a[1][2] = s12;
            a[2][1] = s12;
        }
    }
    [a[0][0], a[1][1], a[2][2]]
}

/// Eigenvalues of a symmetric 3x3 matrix, sorted descending.
///
/// Uses the closed-form trigonometric solution of the characteristic
/// cubic; when the discriminant is degenerate (the acos argument lands
/// on ±1, i.e. two eigenvalues nearly coincide) it falls back to cyclic
/// Jacobi sweeps, which converge unconditionally. Only the upper
/// triangle of `m` is read; entries must be finite.
pub fn eig_sym3(m: &[[f64; 3]; 3]) -> Result<EigenTriple> {
    let (a11, a22, a33) = (m[0][0], m[1][1], m[2][2]);
    let (a12, a13, a23) = (m[0][1], m[0][2], m[1][2]);
    for v in [a11, a22, a33, a12, a13, a23] {
        if !v.is_finite() {
            return Err(Error::Parameter(format!(
                "eig_sym3 requires finite entries (got {v})"
            )));
        }
    }

    let p1 = a12 * a12 + a13 * a13 + a23 * a23;
    if p1 == 0.0 {
        return Ok(EigenTriple::sorted([a11, a22, a33]));
    }

    let q = (a11 + a22 + a33) / 3.0;
    let p2 = (a11 - q) * (a11 - q)
        + (a22 - q) * (a22 - q)
        + (a33 - q) * (a33 - q)
        + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let inv_p = 1.0 / p;
    let b11 = (a11 - q) * inv_p;
    let b22 = (a22 - q) * inv_p;
    let b33 = (a33 - q) * inv_p;
    let b12 = a12 * inv_p;
    let b13 = a13 * inv_p;
    let b23 = a23 * inv_p;
    let det_b = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13)
        + b13 * (b12 * b23 - b22 * b13);
    let r = det_b / 2.0;

    if r.abs() > 1.0 - 1e-9 {
        // Degenerate discriminant: two roots (nearly) coincide. The
        // closed form is still defined after clamping, but Jacobi is the
        // better-conditioned route here and this path is rare.
        let full = [[a11, a12, a13], [a12, a22, a23], [a13, a23, a33]];
        return Ok(EigenTriple::sorted(eig_sym3_jacobi(full)));
    }

    let phi = r.clamp(-1.0, 1.0).acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let e2 = 3.0 * q - e1 - e3; // trace is preserved exactly
    Ok(EigenTriple::sorted([e1, e2, e3]))
}

/// Sato line-filter response for one voxel's Hessian eigenvalues.
///
/// Bright tubes have two strongly negative eigenvalues across the tube
/// and one near zero along it. The measure is zero unless
/// `l3 <= l2 < 0`; otherwise
///
/// ```text
/// v = |l3| * (l2 / l3)^gamma23 * w(l1, l2)
/// w = (1 + l1 / |l2|)^gamma12            if l1 <= 0
///   = (1 - alpha * l1 / |l2|)^gamma12    if 0 < l1 < |l2| / alpha
///   = 0                                  otherwise
/// ```
///
/// With the default exponents the response is 1-homogeneous: scaling
/// all eigenvalues by a positive constant scales the response by the
/// same constant (true for any exponents, since only |l3| carries
/// magnitude).
pub fn sato_vesselness(e: &EigenTriple, params: &SatoParams) -> f64 {
    if !(e.l2 < 0.0) {
        return 0.0;
    }
    let base = e.l3.abs() * (e.l2 / e.l3).powf(params.gamma23);
    let abs_l2 = e.l2.abs();
    let w = if e.l1 <= 0.0 {
        (1.0 + e.l1 / abs_l2).powf(params.gamma12)
    } else if e.l1 < abs_l2 / params.alpha {
        (1.0 - params.alpha * e.l1 / abs_l2).powf(params.gamma12)
    } else {
        return 0.0;
    };
    base * w
}

/// Vesselness map of `vol` at physical scale `sigma_mm`.
///
/// Pipeline: Gaussian smoothing at `sigma_mm`, Hessian by central
/// differences, per-voxel eigendecomposition, Sato response, and a
/// final `sigma_mm²` factor (the standard second-derivative scale
/// normalization) so maps from different scales are comparable in
/// magnitude. The normalization has no effect on the segmentation
/// itself — each scale is later thresholded relative to its own
/// percentile anchor, which cancels any constant factor — but it makes
/// cross-scale response comparisons meaningful.
///
/// Scores are non-negative, zero on constant volumes, and invariant
/// under adding a constant to the input (a constant offset does not
/// survive differentiation).
pub fn vessel_enhance(
    vol: &Volume3D,
    sigma_mm: f64,
    params: &SatoParams,
) -> Result<VesselnessMap> {
    params.validate()?;
    let h = hessian(vol, sigma_mm)?;
    let norm = sigma_mm * sigma_mm;
    let scores: Vec<f64> = (0..vol.num_voxels())
        .into_par_iter()
        .map(|p| {
            let m = [
                [h.xx[p], h.xy[p], h.xz[p]],
                [h.xy[p], h.yy[p], h.yz[p]],
                [h.xz[p], h.yz[p], h.zz[p]],
            ];
            eig_sym3(&m).map(|e| norm * sato_vesselness(&e, params))
        })
        .collect::<Result<_>>()?;
    let volume =
        Volume3D::with_orientation(vol.dims(), vol.spacing(), vol.orientation(), scores)?;
    Ok(VesselnessMap {
        volume,
        scale_mm: sigma_mm,
    })
}
