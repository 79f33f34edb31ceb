//! Independent reference implementations (oracles) for the
//! integration tests. Each one recomputes a library result with a
//! deliberately different algorithm — brute force where the library is
//! clever — so that agreement between the two is real evidence and not
//! the same bug twice.

#![allow(dead_code)] // each test binary uses its own subset

/// Neighbor offsets for a 6/18/26 neighborhood, derived from the
/// Manhattan-norm classification rather than a hand-written table.
pub fn neighbor_offsets(count: u8) -> Vec<[i32; 3]> {
    let max_manhattan = match count {
        6 => 1,
        18 => 2,
        26 => 3,
        _ => panic!("not a 3D connectivity: {count}"),
    };
    let mut out = Vec::new();
    for dk in -1i32..=1 {
        for dj in -1i32..=1 {
            for di in -1i32..=1 {
                let m = di.abs() + dj.abs() + dk.abs();
                if m >= 1 && m <= max_manhattan {
                    out.push([di, dj, dk]);
                }
            }
        }
    }
    out
}

fn neighbors_of(
    idx: usize,
    dims: [usize; 3],
    offsets: &[[i32; 3]],
) -> impl Iterator<Item = usize> + '_ {
    let [nx, ny, nz] = dims;
    let i = (idx % nx) as i32;
    let j = ((idx / nx) % ny) as i32;
    let k = (idx / (nx * ny)) as i32;
    offsets.iter().filter_map(move |&[di, dj, dk]| {
        let (ni, nj, nk) = (i + di, j + dj, k + dk);
        if ni >= 0
            && nj >= 0
            && nk >= 0
            && (ni as usize) < nx
            && (nj as usize) < ny
            && (nk as usize) < nz
        {
            Some(ni as usize + nx * (nj as usize + ny * nk as usize))
        } else {
            None
        }
    })
}

/// Hysteresis by repeated dilation: start from the strong set and keep
/// absorbing adjacent weak voxels until nothing changes. The library
/// uses a single BFS pass; the fixed point must be the same set.
pub fn hysteresis_by_dilation(
    values: &[f64],
    dims: [usize; 3],
    low: f64,
    high: f64,
    connectivity: u8,
) -> Vec<bool> {
    let offsets = neighbor_offsets(connectivity);
    let mut mask: Vec<bool> = values.iter().map(|v| *v >= high).collect();
    loop {
        let mut changed = false;
        for idx in 0..values.len() {
            if mask[idx] || !(values[idx] >= low) {
                continue;
            }
            if neighbors_of(idx, dims, &offsets).any(|n| mask[n]) {
                mask[idx] = true;
                changed = true;
            }
        }
        if !changed {
            return mask;
        }
    }
}

/// Connected components by flood fill, reported as a canonical
/// partition: `out[i]` is the smallest voxel index in i's component
/// (or usize::MAX for background). Two labelings agree exactly when
/// their canonical partitions agree, regardless of label numbering.
pub fn flood_fill_partition(
    mask: &[bool],
    dims: [usize; 3],
    connectivity: u8,
) -> (usize, Vec<usize>) {
    let offsets = neighbor_offsets(connectivity);
    let mut rep = vec![usize::MAX; mask.len()];
    let mut count = 0usize;
    for start in 0..mask.len() {
        if !mask[start] || rep[start] != usize::MAX {
            continue;
        }
        count += 1;
        // `start` is the smallest index of this component because we
        // scan in index order.
        rep[start] = start;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(idx) = queue.pop_front() {
            for n in neighbors_of(idx, dims, &offsets) {
                if mask[n] && rep[n] == usize::MAX {
                    rep[n] = start;
                    queue.push_back(n);
                }
            }
        }
    }
    (count, rep)
}

/// Canonical partition of a label map (any positive label = foreground),
/// comparable with [`flood_fill_partition`] output.
pub fn canonical_partition(labels: &[u32]) -> Vec<usize> {
    let mut first: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
    let mut rep = vec![usize::MAX; labels.len()];
    for (idx, &l) in labels.iter().enumerate() {
        if l != 0 {
            rep[idx] = *first.entry(l).or_insert(idx);
        }
    }
    rep
}

/// Classical Jacobi eigenvalue iteration for a symmetric 3x3 matrix,
/// pivoting on the largest off-diagonal element each sweep. Returns
/// eigenvalues sorted descending. The library solves the cubic
/// characteristic polynomial in closed form instead.
pub fn jacobi_eigenvalues(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let mut a = *m;
    for _ in 0..200 {
        // Largest off-diagonal entry.
        let (mut p, mut q, mut best) = (0usize, 1usize, 0.0f64);
        for (r, c) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[r][c].abs() > best {
                best = a[r][c].abs();
                p = r;
                q = c;
            }
        }
        if best < 1e-14 {
            break;
        }
        // Rotation angle zeroing a[p][q].
        let theta = 0.5 * (2.0 * a[p][q]).atan2(a[p][p] - a[q][q]);
        let (s, c) = theta.sin_cos();
        let mut rot = [[0.0f64; 3]; 3];
        for (d, row) in rot.iter_mut().enumerate() {
            row[d] = 1.0;
        }
        rot[p][p] = c;
        rot[q][q] = c;
        rot[p][q] = -s;
        rot[q][p] = s;
        // a = rot^T * a * rot, straight triple product.
        let mut tmp = [[0.0f64; 3]; 3];
        for r in 0..3 {
            for cc in 0..3 {
                let mut acc = 0.0;
                for t in 0..3 {
                    acc += rot[t][r] * a[t][cc];
                }
                tmp[r][cc] = acc;
            }
        }
        let mut next = [[0.0f64; 3]; 3];
        for r in 0..3 {
            for cc in 0..3 {
                let mut acc = 0.0;
                for t in 0..3 {
                    acc += tmp[r][t] * rot[t][cc];
                }
                next[r][cc] = acc;
            }
        }
        // Re-symmetrize to cancel rounding drift.
        for r in 0..3 {
            for cc in (r + 1)..3 {
                let avg = 0.5 * (next[r][cc] + next[cc][r]);
                next[r][cc] = avg;
                next[cc][r] = avg;
            }
        }
        a = next;
    }
    let mut ev = [a[0][0], a[1][1], a[2][2]];
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Nearest-rank percentile by explicit sort: rank ceil(p/100 * n) with
/// the same documented epsilon guard against decimal rounding, but a
/// completely separate code path (full sort + index, no selection).
pub fn percentile_by_sort(values: &[f64], p: f64, positive_only: bool) -> Option<f64> {
    let mut pool: Vec<f64> = values
        .iter()
        .copied()
        .filter(|v| !positive_only || *v > 0.0)
        .collect();
    if pool.is_empty() {
        return None;
    }
    pool.sort_by(f64::total_cmp);
    let n = pool.len();
    let rank = ((p / 100.0 * n as f64) - 1e-9).ceil().max(1.0) as usize;
    Some(pool[rank.min(n) - 1])
}

/// Mirror (reflect-without-repeat) index folding, written as explicit
/// period arithmetic instead of the library's stepwise reflection.
pub fn mirror_index(q: i64, n: i64) -> usize {
    assert!(n >= 1);
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut r = q.rem_euclid(period);
    if r >= n {
        r = period - r;
    }
    r as usize
}

/// The truncated, renormalized Gaussian kernel for a sigma in voxels.
pub fn gaussian_kernel_ref(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|t| (-(t as f64) * (t as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Separable Gaussian smoothing by direct per-voxel gather along each
/// axis in turn, with mirrored borders. O(n * kernel) and allocation
/// heavy, but independent of the library's line-buffer scheme.
pub fn smooth_by_direct_convolution(
    data: &[f64],
    dims: [usize; 3],
    spacing: [f64; 3],
    sigma_mm: f64,
) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let idx = |i: usize, j: usize, k: usize| i + nx * (j + ny * k);
    let mut cur = data.to_vec();
    for axis in 0..3 {
        let sigma = sigma_mm / spacing[axis];
        let kernel = gaussian_kernel_ref(sigma);
        let radius = (kernel.len() / 2) as i64;
        let n_axis = dims[axis] as i64;
        let mut next = vec![0.0f64; cur.len()];
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let along = [i, j, k][axis] as i64;
                    let mut acc = 0.0;
                    for (t, w) in kernel.iter().enumerate() {
                        let q = along + (t as i64 - radius);
                        let m = mirror_index(q, n_axis);
                        let src = match axis {
                            0 => idx(m, j, k),
                            1 => idx(i, m, k),
                            _ => idx(i, j, m),
                        };
                        acc += w * cur[src];
                    }
                    next[idx(i, j, k)] = acc;
                }
            }
        }
        cur = next;
    }
    cur
}

/// Hand-built single-file NIfTI-1 bytes: float32 data, little endian,
/// magic "n+1". Only the fields the reader contract cares about are
/// populated; everything else stays zero.
pub fn build_nifti_f32(dims: [usize; 3], spacing: [f32; 3], values: &[f32]) -> Vec<u8> {
    assert_eq!(values.len(), dims[0] * dims[1] * dims[2]);
    let mut h = vec![0u8; 352]; // 348-byte header + 4-byte extension flag
    let put_i32 = |h: &mut [u8], off: usize, v: i32| {
        h[off..off + 4].copy_from_slice(&v.to_le_bytes());
    };
    let put_i16 = |h: &mut [u8], off: usize, v: i16| {
        h[off..off + 2].copy_from_slice(&v.to_le_bytes());
    };
    let put_f32 = |h: &mut [u8], off: usize, v: f32| {
        h[off..off + 4].copy_from_slice(&v.to_le_bytes());
    };
    put_i32(&mut h, 0, 348); // sizeof_hdr
    put_i16(&mut h, 40, 3); // dim[0]
    put_i16(&mut h, 42, dims[0] as i16);
    put_i16(&mut h, 44, dims[1] as i16);
    put_i16(&mut h, 46, dims[2] as i16);
    for off in [48usize, 50, 52, 54] {
        put_i16(&mut h, off, 1);
    }
    put_i16(&mut h, 70, 16); // datatype DT_FLOAT32
    put_i16(&mut h, 72, 32); // bitpix
    put_f32(&mut h, 76, 1.0); // pixdim[0]
    put_f32(&mut h, 80, spacing[0]);
    put_f32(&mut h, 84, spacing[1]);
    put_f32(&mut h, 88, spacing[2]);
    put_f32(&mut h, 108, 352.0); // vox_offset
    put_f32(&mut h, 112, 1.0); // scl_slope
    h[344..348].copy_from_slice(b"n+1\0");
    for v in values {
        h.extend_from_slice(&v.to_le_bytes());
    }
    h
}
