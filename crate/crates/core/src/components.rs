//! Connected-component labeling and size filtering of binary masks.
//!
//! Labeling is the classic two-pass union-find algorithm: a raster scan
//! assigns provisional labels while merging across already-visited
//! neighbors, then a second pass resolves each voxel to its set root
//! and renumbers roots densely in first-encounter order. That numbering
//! is a pure function of the mask and connectivity, so labels are
//! stable across runs and thread counts.
//!
//! Size filtering is physical: a component is kept when its voxel count
//! times the voxel volume (in mm³) reaches the threshold, so the same
//! cutoff means the same thing on differently sampled grids.

use crate::error::{Error, Result};
use crate::volume::{BinaryMask, Connectivity, Orientation};

/// Dense component labeling of a mask. Label 0 is background;
/// components are numbered 1..=N in first-encounter (raster) order.
#[derive(Clone, Debug)]
pub struct LabeledComponents {
    dims: [usize; 3],
    spacing: [f64; 3],
    orientation: Orientation,
    labels: Vec<u32>,
    counts: Vec<usize>,
}

impl LabeledComponents {
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    /// Per-voxel labels (0 = background), raster order.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn num_components(&self) -> usize {
        self.counts.len()
    }

    /// Voxel count of each component; index `c - 1` holds label `c`.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Volume of one voxel in mm³.
    pub fn voxel_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// Physical volume of each component in mm³.
    pub fn volumes_mm3(&self) -> Vec<f64> {
        let vv = self.voxel_volume();
        self.counts.iter().map(|c| *c as f64 * vv).collect()
    }
}

/// Union-find with path halving.
struct DisjointSets {
    parent: Vec<u32>,
}

impl DisjointSets {
    fn new() -> Self {
        DisjointSets { parent: Vec::new() }
    }

    fn make_set(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // Point the larger id at the smaller so roots stay stable.
            if ra < rb {
                self.parent[rb as usize] = ra;
            } else {
                self.parent[ra as usize] = rb;
            }
        }
    }
}

/// Label the connected components of `mask` under `connectivity`.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> LabeledComponents {
    let dims = mask.dims();
    let [nx, ny, nz] = dims;
    let data = mask.data();

    // Neighbors already visited by a raster scan (k, then j, then i).
    let prior: Vec<[i32; 3]> = connectivity
        .offsets()
        .iter()
        .copied()
        .filter(|&[di, dj, dk]| dk < 0 || (dk == 0 && (dj < 0 || (dj == 0 && di < 0))))
        .collect();

    let mut sets = DisjointSets::new();
    let mut provisional = vec![0u32; data.len()]; // 0 = background, else id + 1

    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let p = i + nx * (j + ny * k);
                if !data[p] {
                    continue;
                }
                let mut label: Option<u32> = None;
                for &[di, dj, dk] in &prior {
                    let (ni, nj, nk) = (
                        i as isize + di as isize,
                        j as isize + dj as isize,
                        k as isize + dk as isize,
                    );
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
                    if provisional[q] != 0 {
                        let neighbor = provisional[q] - 1;
                        match label {
                            None => label = Some(neighbor),
                            Some(mine) => sets.union(mine, neighbor),
                        }
                    }
                }
                let id = match label {
                    Some(id) => id,
                    None => sets.make_set(),
                };
                provisional[p] = id + 1;
            }
        }
    }

    // Second pass: resolve roots and renumber densely in raster order.
    let mut dense_of_root: Vec<u32> = vec![0; sets.parent.len()];
    let mut counts: Vec<usize> = Vec::new();
    let mut labels = vec![0u32; data.len()];
    for (p, &prov) in provisional.iter().enumerate() {
        if prov == 0 {
            continue;
        }
        let root = sets.find(prov - 1) as usize;
        if dense_of_root[root] == 0 {
            counts.push(0);
            dense_of_root[root] = counts.len() as u32;
        }
        let dense = dense_of_root[root];
        labels[p] = dense;
        counts[dense as usize - 1] += 1;
    }

    LabeledComponents {
        dims,
        spacing: mask.spacing(),
        orientation: mask.orientation(),
        labels,
        counts,
    }
}

/// Keep only components whose physical volume reaches `min_mm3`.
///
/// A component of `n` voxels survives when `n * voxel_volume >= min_mm3`
/// (inclusive). `min_mm3 = 0` keeps everything.
pub fn filter_small(labeled: &LabeledComponents, min_mm3: f64) -> Result<BinaryMask> {
    if !(min_mm3 >= 0.0) || !min_mm3.is_finite() {
        return Err(Error::Parameter(format!(
            "minimum component volume must be finite and non-negative (got {min_mm3})"
        )));
    }
    let vv = labeled.voxel_volume();
    let keep: Vec<bool> = labeled
        .counts
        .iter()
        .map(|&c| c as f64 * vv >= min_mm3)
        .collect();
    let data: Vec<bool> = labeled
        .labels
        .iter()
        .map(|&l| l != 0 && keep[l as usize - 1])
        .collect();
    BinaryMask::with_orientation(labeled.dims, labeled.spacing, labeled.orientation, data)
}
