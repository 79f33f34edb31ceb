//! The full segmentation pipeline and its ablations.
//!
//! A volume is enhanced at two physical scales chosen for cerebral TOF
//! angiography — a thin scale for sub-millimetre cortical vessels and a
//! doubled scale for the large trunk arteries. Each scale's vesselness
//! map is hysteresis-thresholded relative to its own high-percentile
//! anchor, the two branch masks are OR-ed, and connected components
//! below a physical volume floor are dropped. Every stage is
//! deterministic, so the same input and configuration produce the same
//! mask at any thread count.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::components::{filter_small, label_components};
use crate::error::{Error, Result};
use crate::filters::{vessel_enhance, SatoParams, VesselnessMap};
use crate::threshold::{hysteresis, relative_thresholds, union_masks, ThresholdPair};
use crate::volume::{BinaryMask, Connectivity, Volume3D};

/// All tunable parameters of the pipeline.
///
/// The defaults target time-of-flight MR angiography resampled to
/// roughly half-millimetre in-plane resolution; see [`Default`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig {
    /// Thin-vessel enhancement scale in mm.
    pub sigma_low_mm: f64,
    /// Thick-vessel enhancement scale in mm.
    pub sigma_high_mm: f64,
    /// (low, high) hysteresis fractions of the thin-scale anchor.
    pub frac_low_scale: (f64, f64),
    /// (low, high) hysteresis fractions of the thick-scale anchor.
    pub frac_high_scale: (f64, f64),
    /// Components smaller than this many mm³ are removed.
    pub min_component_mm3: f64,
    /// Percentile (of strictly positive scores) anchoring thresholds.
    pub percentile: f64,
    /// Neighborhood used for hysteresis growth and component analysis.
    pub connectivity: Connectivity,
    /// Vesselness weighting parameters.
    pub sato: SatoParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sigma_low_mm: 0.47,
            sigma_high_mm: 0.94,
            frac_low_scale: (0.57, 0.67),
            frac_high_scale: (0.39, 0.49),
            min_component_mm3: 10.0,
            percentile: 99.9,
            connectivity: Connectivity::TwentySix,
            sato: SatoParams::default(),
        }
    }
}

impl PipelineConfig {
    /// Check every parameter's documented range.
    pub fn validate(&self) -> Result<()> {
        for (name, s) in [
            ("sigma_low_mm", self.sigma_low_mm),
            ("sigma_high_mm", self.sigma_high_mm),
        ] {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Parameter(format!(
                    "{name} must be finite and positive (got {s})"
                )));
            }
        }
        for (name, (lo, hi)) in [
            ("frac_low_scale", self.frac_low_scale),
            ("frac_high_scale", self.frac_high_scale),
        ] {
            if !(lo > 0.0) || !(hi > lo) || !(hi <= 1.0) {
                return Err(Error::Parameter(format!(
                    "{name} must satisfy 0 < low < high <= 1 (got ({lo}, {hi}))"
                )));
            }
        }
        if !(self.min_component_mm3 >= 0.0) || !self.min_component_mm3.is_finite() {
            return Err(Error::Parameter(format!(
                "min_component_mm3 must be finite and non-negative (got {})",
                self.min_component_mm3
            )));
        }
        if !(self.percentile > 0.0) || !(self.percentile <= 100.0) {
            return Err(Error::Parameter(format!(
                "percentile must lie in (0, 100] (got {})",
                self.percentile
            )));
        }
        self.sato.validate()
    }

    /// Load a configuration from a plain `key = value` file.
    ///
    /// Lines starting with `#` (and inline `# ...` tails) are comments;
    /// blank lines are ignored. Keys are the field names of this struct
    /// plus `gamma23` / `gamma12` / `alpha` for the vesselness weights;
    /// pair-valued fields take two comma-separated numbers. Unknown
    /// keys are rejected so typos cannot silently fall back to a
    /// default. The result is validated before it is returned.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = PipelineConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parameter(format!(
                    "config line {} is not `key = value`: {raw:?}",
                    lineno + 1
                ))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(key: &str, value: &str) -> Result<f64> {
            value.parse::<f64>().map_err(|_| {
                Error::Parameter(format!("config key {key}: expected a number, got {value:?}"))
            })
        }
        fn pair(key: &str, value: &str) -> Result<(f64, f64)> {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(Error::Parameter(format!(
                    "config key {key}: expected two comma-separated numbers, got {value:?}"
                )));
            }
            Ok((num(key, parts[0])?, num(key, parts[1])?))
        }
        match key {
            "sigma_low_mm" => self.sigma_low_mm = num(key, value)?,
            "sigma_high_mm" => self.sigma_high_mm = num(key, value)?,
            "frac_low_scale" => self.frac_low_scale = pair(key, value)?,
            "frac_high_scale" => self.frac_high_scale = pair(key, value)?,
            "min_component_mm3" => self.min_component_mm3 = num(key, value)?,
            "percentile" => self.percentile = num(key, value)?,
            "connectivity" => {
                let n = value.parse::<u8>().map_err(|_| {
                    Error::Parameter(format!(
                        "config key connectivity: expected 6, 18 or 26, got {value:?}"
                    ))
                })?;
                self.connectivity = Connectivity::from_count(n)?;
            }
            "gamma23" => self.sato.gamma23 = num(key, value)?,
            "gamma12" => self.sato.gamma12 = num(key, value)?,
            "alpha" => self.sato.alpha = num(key, value)?,
            _ => {
                return Err(Error::Parameter(format!("unknown config key {key:?}")));
            }
        }
        Ok(())
    }
}

/// Pipeline variants used to measure each stage's contribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AblationVariant {
    /// The complete pipeline.
    Full,
    /// Drop the thin enhancement scale.
    NoSigmaLow,
    /// Drop the thick enhancement scale.
    NoSigmaHigh,
    /// Replace hysteresis with a simple threshold at the high value.
    NoHysteresis,
    /// Skip the small-component filter.
    NoComponents,
}

impl AblationVariant {
    /// All variants in a fixed reporting order.
    pub fn all() -> [AblationVariant; 5] {
        [
            AblationVariant::Full,
            AblationVariant::NoSigmaLow,
            AblationVariant::NoSigmaHigh,
            AblationVariant::NoHysteresis,
            AblationVariant::NoComponents,
        ]
    }
}

impl fmt::Display for AblationVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AblationVariant::Full => "full",
            AblationVariant::NoSigmaLow => "no_sigma_low",
            AblationVariant::NoSigmaHigh => "no_sigma_high",
            AblationVariant::NoHysteresis => "no_hysteresis",
            AblationVariant::NoComponents => "no_components",
        };
        f.write_str(name)
    }
}

impl FromStr for AblationVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(AblationVariant::Full),
            "no_sigma_low" => Ok(AblationVariant::NoSigmaLow),
            "no_sigma_high" => Ok(AblationVariant::NoSigmaHigh),
            "no_hysteresis" => Ok(AblationVariant::NoHysteresis),
            "no_components" => Ok(AblationVariant::NoComponents),
            _ => Err(Error::Parameter(format!(
                "unknown ablation variant {s:?} (expected full, no_sigma_low, \
                 no_sigma_high, no_hysteresis or no_components)"
            ))),
        }
    }
}

/// One enhancement scale's intermediate results.
#[derive(Clone, Debug)]
pub struct ScaleBranch {
    /// The smoothing scale this branch ran at, in mm.
    pub scale_mm: f64,
    /// Vesselness scores at this scale.
    pub vesselness: VesselnessMap,
    /// Thresholds actually applied; `None` when the branch had no
    /// positive score to anchor on (its mask is then empty).
    pub thresholds: Option<ThresholdPair>,
    /// The branch's binary mask.
    pub mask: BinaryMask,
}

/// Everything a pipeline run produces, for reporting and debugging.
#[derive(Clone, Debug)]
pub struct SegmentationRun {
    /// Which variant ran.
    pub variant: AblationVariant,
    /// Final mask after all stages.
    pub mask: BinaryMask,
    /// Union of the branch masks, before component filtering.
    pub union_mask: BinaryMask,
    /// Per-scale intermediates, in the order the scales ran.
    pub branches: Vec<ScaleBranch>,
    /// Connected components in the union mask.
    pub components_before: usize,
    /// Components surviving the volume filter.
    pub components_after: usize,
}

/// Run the full pipeline. See [`segment_detailed`] for the staged
/// breakdown this wraps.
pub fn segment(vol: &Volume3D, cfg: &PipelineConfig) -> Result<BinaryMask> {
    Ok(segment_detailed(vol, cfg, AblationVariant::Full)?.mask)
}

/// Run an ablated pipeline variant, returning only the mask.
pub fn segment_ablated(
    vol: &Volume3D,
    cfg: &PipelineConfig,
    variant: AblationVariant,
) -> Result<BinaryMask> {
    Ok(segment_detailed(vol, cfg, variant)?.mask)
}

/// Run the pipeline and keep every intermediate.
///
/// The input must contain at least one strictly positive intensity;
/// angiography volumes are non-negative with bright vessels, and a
/// volume with no positive voxel has nothing to segment, which is
/// reported as an empty-selection error rather than an empty mask. A
/// *branch* whose vesselness is identically zero (e.g. a constant
/// region at that scale) is not an error: it contributes an empty mask
/// and its `thresholds` field stays `None`.
pub fn segment_detailed(
    vol: &Volume3D,
    cfg: &PipelineConfig,
    variant: AblationVariant,
) -> Result<SegmentationRun> {
    cfg.validate()?;
    if !vol.data().iter().any(|v| *v > 0.0) {
        return Err(Error::EmptySelection(
            "input volume has no positive intensities".into(),
        ));
    }

    let mut scales: Vec<(f64, (f64, f64))> = Vec::new();
    if variant != AblationVariant::NoSigmaLow {
        scales.push((cfg.sigma_low_mm, cfg.frac_low_scale));
    }
    if variant != AblationVariant::NoSigmaHigh {
        scales.push((cfg.sigma_high_mm, cfg.frac_high_scale));
    }

    let mut branches = Vec::with_capacity(scales.len());
    for (sigma, (low_frac, high_frac)) in scales {
        let map = vessel_enhance(vol, sigma, &cfg.sato)?;
        let (thresholds, mask) =
            match relative_thresholds(&map, low_frac, high_frac, cfg.percentile) {
                Ok(pair) => {
                    if variant == AblationVariant::NoHysteresis {
                        // Simple threshold at the high value; record the
                        // degenerate pair that was actually applied.
                        let applied = ThresholdPair {
                            low: pair.high,
                            high: pair.high,
                            low_frac: pair.high_frac,
                            high_frac: pair.high_frac,
                        };
                        let mask = hysteresis(&map, &applied, cfg.connectivity)?;
                        (Some(applied), mask)
                    } else {
                        let mask = hysteresis(&map, &pair, cfg.connectivity)?;
                        (Some(pair), mask)
                    }
                }
                // Nothing to anchor on at this scale: empty branch.
                Err(Error::EmptySelection(_)) => (
                    None,
                    BinaryMask::with_orientation(
                        vol.dims(),
                        vol.spacing(),
                        vol.orientation(),
                        vec![false; vol.num_voxels()],
                    )?,
                ),
                Err(e) => return Err(e),
            };
        branches.push(ScaleBranch {
            scale_mm: sigma,
            vesselness: map,
            thresholds,
            mask,
        });
    }

    let mut union = branches[0].mask.clone();
    for branch in &branches[1..] {
        union = union_masks(&union, &branch.mask)?;
    }

    let labeled = label_components(&union, cfg.connectivity);
    let components_before = labeled.num_components();
    let (mask, components_after) = if variant == AblationVariant::NoComponents {
        (union.clone(), components_before)
    } else {
        let kept = filter_small(&labeled, cfg.min_component_mm3)?;
        let voxel = labeled.voxel_volume();
        let surviving = labeled
            .counts()
            .iter()
            .filter(|&&c| c as f64 * voxel >= cfg.min_component_mm3)
            .count();
        (kept, surviving)
    };

    Ok(SegmentationRun {
        variant,
        mask,
        union_mask: union,
        branches,
        components_before,
        components_after,
    })
}
