//! Max-perturbation variant grids (VTLN warp × frame rate) and the
//! one-variant-per-epoch schedule.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{append_deltas, cmvn_per_speaker, compute_logmel, FeatureMatrix, FilterbankConfig, Waveform};

pub const IDENTITY_WARP: f64 = 1.0;
pub const IDENTITY_HOP_MS: f64 = 10.0;

const NINEFOLD_WARPS: [f64; 3] = [0.8, 1.0, 1.2];
const NINEFOLD_HOPS: [f64; 3] = [8.0, 10.0, 11.0];
const TWENTYFOLD_WARPS: [f64; 5] = [0.7, 0.8, 1.0, 1.2, 1.3];
const TWENTYFOLD_HOPS: [f64; 4] = [8.0, 10.0, 11.0, 12.0];

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationVariant {
    pub warp_factor: f64,
    pub hop_ms: f64,
    pub variant_id: String,
}

fn fmt_num(v: f64, min_decimals: usize) -> String {
    if v.fract() == 0.0 {
        format!("{v:.min_decimals$}")
    } else {
        format!("{v}")
    }
}

impl PerturbationVariant {
    pub fn new(warp_factor: f64, hop_ms: f64) -> Self {
        PerturbationVariant {
            warp_factor,
            hop_ms,
            variant_id: format!("w{}-h{}", fmt_num(warp_factor, 1), fmt_num(hop_ms, 0)),
        }
    }

    pub fn identity() -> Self {
        Self::new(IDENTITY_WARP, IDENTITY_HOP_MS)
    }

    pub fn is_identity(&self) -> bool {
        self.warp_factor == IDENTITY_WARP && self.hop_ms == IDENTITY_HOP_MS
    }

    /// `<corpus>.<variant_id>.farc`
    pub fn archive_name(&self, corpus: &str) -> String {
        format!("{corpus}.{}.farc", self.variant_id)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AugmentMode {
    None,
    Ninefold,
    Twentyfold,
    /// Cross product of the given warps and hops.
    Custom { warps: Vec<f64>, hops: Vec<f64> },
}

impl FromStr for AugmentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AugmentMode::None),
            "ninefold" => Ok(AugmentMode::Ninefold),
            "twentyfold" => Ok(AugmentMode::Twentyfold),
            other => Err(Error::InvalidMode(other.to_string())),
        }
    }
}

impl fmt::Display for AugmentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AugmentMode::None => f.write_str("none"),
            AugmentMode::Ninefold => f.write_str("ninefold"),
            AugmentMode::Twentyfold => f.write_str("twentyfold"),
            AugmentMode::Custom { .. } => f.write_str("custom"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentPlan {
    pub mode: AugmentMode,
    pub variants: Vec<PerturbationVariant>,
}

/// Builds the variant grid: identity first, then the rest ordered by
/// (warp, hop).
pub fn build_plan(mode: &AugmentMode) -> Result<AugmentPlan> {
    let (warps, hops): (Vec<f64>, Vec<f64>) = match mode {
        AugmentMode::None => (vec![IDENTITY_WARP], vec![IDENTITY_HOP_MS]),
        AugmentMode::Ninefold => (NINEFOLD_WARPS.to_vec(), NINEFOLD_HOPS.to_vec()),
        AugmentMode::Twentyfold => (TWENTYFOLD_WARPS.to_vec(), TWENTYFOLD_HOPS.to_vec()),
        AugmentMode::Custom { warps, hops } => (warps.clone(), hops.clone()),
    };
    if let Some(h) = hops.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
        return Err(Error::InvalidMode(format!("hop {h} ms is not positive")));
    }
    if let Some(w) = warps.iter().find(|w| !w.is_finite()) {
        return Err(Error::InvalidMode(format!("warp factor {w} is not finite")));
    }
    let mut pairs: Vec<(f64, f64)> = warps.iter().flat_map(|&w| hops.iter().map(move |&h| (w, h))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    if pairs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidMode("duplicate (warp, hop) pair".into()));
    }
    let id = pairs
        .iter()
        .position(|&(w, h)| w == IDENTITY_WARP && h == IDENTITY_HOP_MS)
        .ok_or_else(|| Error::InvalidMode("plan must contain the unperturbed variant (1.0, 10 ms)".into()))?;
    let identity = pairs.remove(id);
    let variants = std::iter::once(identity)
        .chain(pairs)
        .map(|(w, h)| PerturbationVariant::new(w, h))
        .collect();
    Ok(AugmentPlan { mode: mode.clone(), variants })
}

/// `variants[epoch mod |variants|]`
pub fn variant_for_epoch(plan: &AugmentPlan, epoch: usize) -> &PerturbationVariant {
    &plan.variants[epoch % plan.variants.len()]
}

/// Log-mel with the variant's warp and hop, then deltas, then per-speaker
/// CMVN. Output order matches `corpus`.
pub fn materialize_variant(
    corpus: &[Waveform],
    variant: &PerturbationVariant,
    base: &FilterbankConfig,
) -> Result<Vec<FeatureMatrix>> {
    if corpus.is_empty() {
        return Err(Error::InvalidFeatureConfig("cannot materialize an empty corpus".into()));
    }
    let cfg = FilterbankConfig {
        warp_factor: variant.warp_factor,
        hop_ms: variant.hop_ms,
        ..base.clone()
    };
    let feats: Vec<FeatureMatrix> = corpus
        .par_iter()
        .map(|w| compute_logmel(w, &cfg).map(|fm| append_deltas(&fm)))
        .collect::<Result<_>>()?;
    Ok(cmvn_per_speaker(&feats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes_and_identity_first() {
        for (mode, n) in [(AugmentMode::None, 1), (AugmentMode::Ninefold, 9), (AugmentMode::Twentyfold, 20)] {
            let plan = build_plan(&mode).unwrap();
            assert_eq!(plan.variants.len(), n);
            assert!(plan.variants[0].is_identity());
            assert_eq!(plan.variants.iter().filter(|v| v.is_identity()).count(), 1);
        }
    }

    #[test]
    fn rest_is_lexicographic() {
        let plan = build_plan(&AugmentMode::Ninefold).unwrap();
        let ids: Vec<&str> = plan.variants.iter().map(|v| v.variant_id.as_str()).collect();
        assert_eq!(
            ids,
            ["w1.0-h10", "w0.8-h8", "w0.8-h10", "w0.8-h11", "w1.0-h8", "w1.0-h11", "w1.2-h8", "w1.2-h10", "w1.2-h11"]
        );
    }

    #[test]
    fn cycling() {
        let plan = build_plan(&AugmentMode::Twentyfold).unwrap();
        assert_eq!(variant_for_epoch(&plan, 23), &plan.variants[3]);
        assert_eq!(variant_for_epoch(&plan, 0), variant_for_epoch(&plan, 20));
    }

    #[test]
    fn unknown_mode() {
        assert!(matches!("elevenfold".parse::<AugmentMode>(), Err(Error::InvalidMode(_))));
    }

    #[test]
    fn custom_plans_are_validated() {
        let no_identity = AugmentMode::Custom { warps: vec![0.9], hops: vec![10.0] };
        assert!(build_plan(&no_identity).is_err());
        let dup = AugmentMode::Custom { warps: vec![1.0, 1.0], hops: vec![10.0] };
        assert!(build_plan(&dup).is_err());
        let ok = AugmentMode::Custom { warps: vec![1.0, 0.9], hops: vec![10.0, 9.0] };
        assert_eq!(build_plan(&ok).unwrap().variants.len(), 4);
    }

    #[test]
    fn archive_naming() {
        assert_eq!(PerturbationVariant::new(0.8, 8.0).archive_name("train"), "train.w0.8-h8.farc");
    }
}
