//! Dropout masks, the three dropout placements and the naive / stochastic /
//! cascade combination policies.
//!
//! Masks use inverted scaling: kept entries are `1/(1-p)` during training so
//! evaluation runs the network unchanged.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Where a mask is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DropoutLocation {
    /// Non-recurrent output of every LSTM layer, before the next layer or the softmax.
    ForwardConnection,
    /// The whole cell state: `c_t = m ⊙ (f ⊙ c_prev + i ⊙ g)` (RNNDrop).
    RnnDropCell,
    /// Only the cell update: `c_t = f ⊙ c_prev + m ⊙ i ⊙ g` (no memory loss).
    NmlCellUpdate,
}

impl DropoutLocation {
    fn prefix(self) -> &'static str {
        match self {
            DropoutLocation::ForwardConnection => "forward",
            DropoutLocation::RnnDropCell => "rnndrop",
            DropoutLocation::NmlCellUpdate => "nml",
        }
    }

    pub fn is_cell(self) -> bool {
        !matches!(self, DropoutLocation::ForwardConnection)
    }
}

impl fmt::Display for DropoutLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.prefix())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MaskGranularity {
    /// A fresh mask every time step.
    PerStep,
    /// One mask held fixed for the whole utterance.
    PerSequence,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DropoutEntry {
    pub location: DropoutLocation,
    pub granularity: MaskGranularity,
    pub rate: f64,
}

pub const DEFAULT_RATE: f64 = 0.2;

impl DropoutEntry {
    pub fn new(location: DropoutLocation, granularity: MaskGranularity, rate: f64) -> Self {
        DropoutEntry {
            location,
            granularity,
            rate,
        }
    }

    /// Config name such as `nml-sequence`.
    pub fn name(&self) -> String {
        let g = match self.granularity {
            MaskGranularity::PerStep => "step",
            MaskGranularity::PerSequence => "sequence",
        };
        format!("{}-{g}", self.location.prefix())
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.rate) {
            return Err(Error::InvalidRate(self.rate));
        }
        if self.location == DropoutLocation::RnnDropCell
            && self.granularity == MaskGranularity::PerSequence
        {
            return Err(Error::ForbiddenConfiguration(
                "rnndrop-sequence: a per-sequence mask on the full cell state lets memory cell values explode".into(),
            ));
        }
        Ok(())
    }
}

impl FromStr for DropoutEntry {
    type Err = Error;

    /// Parses `forward-step`, `nml-sequence`, ... with the default rate.
    fn from_str(s: &str) -> Result<Self> {
        let (loc, gran) = s
            .trim()
            .rsplit_once('-')
            .ok_or_else(|| Error::InvalidPolicy(format!("unknown dropout entry `{s}`")))?;
        let location = match loc {
            "forward" => DropoutLocation::ForwardConnection,
            "rnndrop" => DropoutLocation::RnnDropCell,
            "nml" => DropoutLocation::NmlCellUpdate,
            _ => return Err(Error::InvalidPolicy(format!("unknown dropout location `{loc}`"))),
        };
        let granularity = match gran {
            "step" => MaskGranularity::PerStep,
            "sequence" => MaskGranularity::PerSequence,
            _ => return Err(Error::InvalidPolicy(format!("unknown mask granularity `{gran}`"))),
        };
        let e = DropoutEntry::new(location, granularity, DEFAULT_RATE);
        e.validate()?;
        Ok(e)
    }
}

/// What makes a cascade advance to its next stage.
#[derive(Clone, Debug, PartialEq)]
pub enum CascadeTrigger {
    /// An operator flag; each firing advances one stage.
    Manual,
    /// Stage `s` begins at 0-based epoch index `boundaries[s - 1]`.
    AtEpochs(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Combination {
    /// All entries active together.
    Naive,
    /// One entry per minibatch; with two entries the first is chosen with
    /// probability `choice_prob`, otherwise the choice is uniform.
    Stochastic { choice_prob: f64 },
    /// A sequence of non-cascade policies switched during training.
    Cascade {
        stages: Vec<DropoutPolicy>,
        trigger: CascadeTrigger,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DropoutPolicy {
    pub entries: Vec<DropoutEntry>,
    pub combination: Combination,
}

impl Default for DropoutPolicy {
    fn default() -> Self {
        DropoutPolicy::none()
    }
}

impl DropoutPolicy {
    pub fn none() -> Self {
        DropoutPolicy {
            entries: Vec::new(),
            combination: Combination::Naive,
        }
    }

    pub fn naive(entries: Vec<DropoutEntry>) -> Self {
        DropoutPolicy {
            entries,
            combination: Combination::Naive,
        }
    }

    pub fn stochastic(entries: Vec<DropoutEntry>, choice_prob: f64) -> Self {
        DropoutPolicy {
            entries,
            combination: Combination::Stochastic { choice_prob },
        }
    }

    pub fn cascade(stages: Vec<DropoutPolicy>, trigger: CascadeTrigger) -> Self {
        DropoutPolicy {
            entries: Vec::new(),
            combination: Combination::Cascade { stages, trigger },
        }
    }

    /// Display name, e.g. `nml-sequence+forward-step/naive`.
    pub fn describe(&self) -> String {
        match &self.combination {
            Combination::Cascade { stages, .. } => {
                let parts: Vec<String> = stages.iter().map(|s| s.describe()).collect();
                format!("cascade[{}]", parts.join(" -> "))
            }
            c => {
                if self.entries.is_empty() {
                    return "none".into();
                }
                let names: Vec<String> = self.entries.iter().map(|e| e.name()).collect();
                let mode = if matches!(c, Combination::Naive) { "naive" } else { "stochastic" };
                format!("{}/{mode}", names.join("+"))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.combination {
            Combination::Cascade { stages, trigger } => {
                if !self.entries.is_empty() {
                    return Err(Error::InvalidPolicy("a cascade carries its entries in its stages".into()));
                }
                if stages.is_empty() {
                    return Err(Error::InvalidPolicy("a cascade needs at least one stage".into()));
                }
                for s in stages {
                    if matches!(s.combination, Combination::Cascade { .. }) {
                        return Err(Error::InvalidPolicy("cascade stages cannot nest".into()));
                    }
                    s.validate()?;
                }
                if let CascadeTrigger::AtEpochs(b) = trigger {
                    if b.len() + 1 != stages.len() || b.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(Error::InvalidPolicy(format!(
                            "{} stages need {} strictly increasing switch epochs, got {b:?}",
                            stages.len(),
                            stages.len() - 1
                        )));
                    }
                }
                Ok(())
            }
            combination => {
                for e in &self.entries {
                    e.validate()?;
                }
                for (i, a) in self.entries.iter().enumerate() {
                    if self.entries[i + 1..].iter().any(|b| b.location == a.location) {
                        return Err(Error::InvalidPolicy(format!("location `{}` listed twice", a.location)));
                    }
                }
                if self.entries.iter().filter(|e| e.location.is_cell()).count() > 1 {
                    return Err(Error::InvalidPolicy(
                        "at most one cell-state dropout location per policy".into(),
                    ));
                }
                if let Combination::Stochastic { choice_prob } = combination {
                    if self.entries.len() < 2 {
                        return Err(Error::InvalidPolicy("stochastic combination needs at least two entries".into()));
                    }
                    if !(0.0..=1.0).contains(choice_prob) {
                        return Err(Error::InvalidPolicy(format!("choice probability {choice_prob} outside [0, 1]")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Draws the per-minibatch entry choice for a stochastic policy.
    pub fn draw_choice<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        match self.combination {
            Combination::Stochastic { choice_prob } => Some(if self.entries.len() == 2 {
                if rng.random::<f64>() < choice_prob { 0 } else { 1 }
            } else {
                rng.random_range(0..self.entries.len())
            }),
            _ => None,
        }
    }
}

/// An inverted-dropout mask over `steps` time steps of width `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    dim: usize,
    steps: usize,
    granularity: MaskGranularity,
    values: Vec<f64>,
}

impl Mask {
    pub fn sample<R: Rng + ?Sized>(
        dim: usize,
        steps: usize,
        granularity: MaskGranularity,
        rate: f64,
        rng: &mut R,
    ) -> Result<Mask> {
        let rows = match granularity {
            MaskGranularity::PerStep => steps,
            MaskGranularity::PerSequence => 1,
        };
        Ok(Mask {
            dim,
            steps,
            granularity,
            values: sample_mask(dim * rows, rate, rng)?,
        })
    }

    /// A mask built from explicit values, one row per step (or a single
    /// row for per-sequence masks).
    pub fn from_values(dim: usize, steps: usize, granularity: MaskGranularity, values: Vec<f64>) -> Result<Mask> {
        let rows = match granularity {
            MaskGranularity::PerStep => steps,
            MaskGranularity::PerSequence => 1,
        };
        if values.len() != dim * rows {
            return Err(Error::ShapeError(format!("mask needs {} values, got {}", dim * rows, values.len())));
        }
        Ok(Mask { dim, steps, granularity, values })
    }

    #[inline]
    pub fn at(&self, t: usize) -> &[f64] {
        debug_assert!(t < self.steps);
        match self.granularity {
            MaskGranularity::PerStep => &self.values[t * self.dim..(t + 1) * self.dim],
            MaskGranularity::PerSequence => &self.values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn granularity(&self) -> MaskGranularity {
        self.granularity
    }

    /// Distinct sampled values (all rows).
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `len` i.i.d. entries: 0 with probability `p`, otherwise `1/(1-p)`.
pub fn sample_mask<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidRate(p));
    }
    let keep = 1.0 / (1.0 - p);
    Ok((0..len)
        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellMask {
    pub location: DropoutLocation,
    pub mask: Mask,
}

/// Masks for one layer: the layer-output mask and one cell mask per direction
/// (index 0 forward in time, 1 backward).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LayerMasks {
    pub forward: Option<Mask>,
    pub cell: [Option<CellMask>; 2],
}

/// Every mask for one utterance.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskSet {
    pub steps: usize,
    pub layers: Vec<LayerMasks>,
    /// Entries whose masks are live in this set.
    pub active: Vec<DropoutEntry>,
    /// Stochastic choice used, if any.
    pub choice: Option<usize>,
}

impl MaskSet {
    pub fn empty(layers: usize, steps: usize) -> Self {
        MaskSet {
            steps,
            layers: vec![LayerMasks::default(); layers],
            active: Vec::new(),
            choice: None,
        }
    }

    pub fn is_active(&self, location: DropoutLocation) -> bool {
        self.active.iter().any(|e| e.location == location)
    }
}

/// Samples the masks one utterance needs under a (non-cascade) policy.
///
/// `cells_per_layer` gives each layer's cells per direction; forward masks
/// cover both directions (`2·cells`). Under a stochastic combination only
/// the chosen entry is sampled; `choice` carries the minibatch-level draw and
/// is drawn from `rng` when absent.
pub fn masks_for_utterance<R: Rng + ?Sized>(
    policy: &DropoutPolicy,
    steps: usize,
    cells_per_layer: &[usize],
    rng: &mut R,
    choice: Option<usize>,
) -> Result<MaskSet> {
    policy.validate()?;
    if matches!(policy.combination, Combination::Cascade { .. }) {
        return Err(Error::InvalidPolicy(
            "resolve the active cascade stage before sampling masks".into(),
        ));
    }
    let choice = match policy.combination {
        Combination::Stochastic { .. } => {
            let c = match choice {
                Some(c) => c,
                None => policy.draw_choice(rng).expect("stochastic policy"),
            };
            if c >= policy.entries.len() {
                return Err(Error::InvalidPolicy(format!("choice {c} out of range")));
            }
            Some(c)
        }
        _ => None,
    };
    let active: Vec<DropoutEntry> = match choice {
        Some(c) => vec![policy.entries[c]],
        None => policy.entries.clone(),
    };

    let mut layers = Vec::with_capacity(cells_per_layer.len());
    for &cells in cells_per_layer {
        let mut lm = LayerMasks::default();
        for e in &active {
            if e.location.is_cell() {
                for slot in lm.cell.iter_mut() {
                    *slot = Some(CellMask {
                        location: e.location,
                        mask: Mask::sample(cells, steps, e.granularity, e.rate, rng)?,
                    });
                }
            } else {
                lm.forward = Some(Mask::sample(2 * cells, steps, e.granularity, e.rate, rng)?);
            }
        }
        layers.push(lm);
    }
    Ok(MaskSet {
        steps,
        layers,
        active,
        choice,
    })
}

/// Cell-state update with a dropout mask at a cell location, written into `out`.
pub fn cell_state_with_dropout(
    f: &[f64],
    c_prev: &[f64],
    i: &[f64],
    g: &[f64],
    m: &[f64],
    location: DropoutLocation,
    out: &mut [f64],
) -> Result<()> {
    let n = out.len();
    if [f.len(), c_prev.len(), i.len(), g.len(), m.len()].iter().any(|&l| l != n) {
        return Err(Error::ShapeError("cell-state operands differ in width".into()));
    }
    match location {
        DropoutLocation::RnnDropCell => {
            for k in 0..n {
                out[k] = m[k] * (f[k] * c_prev[k] + i[k] * g[k]);
            }
        }
        DropoutLocation::NmlCellUpdate => {
            for k in 0..n {
                out[k] = f[k] * c_prev[k] + m[k] * i[k] * g[k];
            }
        }
        DropoutLocation::ForwardConnection => {
            return Err(Error::WrongLocation(location.to_string()))
        }
    }
    Ok(())
}

/// Survival and reset probabilities for a per-step RNNDrop cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Retention {
    /// Probability the cell is never zeroed over the window: `(1-p)^n`.
    pub survival: f64,
    /// Probability it is reset at least once: `1 - (1-p)^n`.
    pub reset: f64,
}

pub fn expected_memory_retention(p: f64, steps: u32) -> Result<Retention> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidRate(p));
    }
    let survival = (1.0 - p).powi(steps as i32);
    Ok(Retention {
        survival,
        reset: 1.0 - survival,
    })
}

/// Training progress seen by a cascade trigger.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TriggerState {
    /// 0-based epoch index.
    pub epoch: usize,
    /// How many times the manual flag has fired so far.
    pub manual_switches: usize,
}

/// Index of the active cascade stage and the stage itself. A non-cascade
/// policy is its own single stage.
pub fn cascade_active_stage(policy: &DropoutPolicy, state: TriggerState) -> (usize, &DropoutPolicy) {
    let Combination::Cascade { stages, trigger } = &policy.combination else {
        return (0, policy);
    };
    let fired = match trigger {
        CascadeTrigger::Manual => state.manual_switches,
        CascadeTrigger::AtEpochs(b) => b.iter().filter(|&&e| e <= state.epoch).count(),
    };
    let idx = fired.min(stages.len() - 1);
    (idx, &stages[idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn entry(s: &str) -> DropoutEntry {
        s.parse().unwrap()
    }

    #[test]
    fn zero_rate_is_all_ones() {
        let mut r = rng::stream(1, &[]);
        assert!(sample_mask(1000, 0.0, &mut r).unwrap().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn values_are_zero_or_scaled() {
        let mut r = rng::stream(2, &[]);
        let m = sample_mask(10_000, 0.2, &mut r).unwrap();
        assert!(m.iter().all(|&v| v == 0.0 || v == 1.25));
        assert!(m.contains(&0.0) && m.contains(&1.25));
        assert!(matches!(sample_mask(3, 1.0, &mut r), Err(Error::InvalidRate(_))));
        assert!(matches!(sample_mask(3, -0.1, &mut r), Err(Error::InvalidRate(_))));
    }

    #[test]
    fn names_round_trip() {
        for n in ["forward-step", "forward-sequence", "rnndrop-step", "nml-step", "nml-sequence"] {
            assert_eq!(entry(n).name(), n);
        }
        assert!(matches!("rnndrop-sequence".parse::<DropoutEntry>(), Err(Error::ForbiddenConfiguration(_))));
        assert!("dropout-step".parse::<DropoutEntry>().is_err());
        assert!("nml-always".parse::<DropoutEntry>().is_err());
    }

    #[test]
    fn only_rnndrop_sequence_is_forbidden() {
        for loc in [DropoutLocation::ForwardConnection, DropoutLocation::RnnDropCell, DropoutLocation::NmlCellUpdate] {
            for g in [MaskGranularity::PerStep, MaskGranularity::PerSequence] {
                let res = DropoutEntry::new(loc, g, 0.2).validate();
                let forbidden = loc == DropoutLocation::RnnDropCell && g == MaskGranularity::PerSequence;
                assert_eq!(matches!(res, Err(Error::ForbiddenConfiguration(_))), forbidden, "{loc:?} {g:?}");
                assert_eq!(res.is_ok(), !forbidden);
            }
        }
        let mut r = rng::stream(0, &[]);
        let p = DropoutPolicy::naive(vec![DropoutEntry::new(DropoutLocation::RnnDropCell, MaskGranularity::PerSequence, 0.2)]);
        assert!(matches!(
            masks_for_utterance(&p, 5, &[3], &mut r, None),
            Err(Error::ForbiddenConfiguration(_))
        ));
    }

    #[test]
    fn per_sequence_masks_are_constant() {
        let mut r = rng::stream(3, &[]);
        let p = DropoutPolicy::naive(vec![entry("forward-sequence"), entry("nml-sequence")]);
        let ms = masks_for_utterance(&p, 9, &[4, 4], &mut r, None).unwrap();
        for l in &ms.layers {
            let f = l.forward.as_ref().unwrap();
            assert_eq!(f.dim(), 8);
            assert_eq!(f.at(0), f.at(8));
            for c in l.cell.iter().flatten() {
                assert_eq!(c.location, DropoutLocation::NmlCellUpdate);
                assert_eq!(c.mask.at(0), c.mask.at(8));
            }
        }
    }

    #[test]
    fn per_step_masks_vary() {
        let mut r = rng::stream(4, &[]);
        let p = DropoutPolicy::naive(vec![entry("forward-step")]);
        let ms = masks_for_utterance(&p, 50, &[16], &mut r, None).unwrap();
        let f = ms.layers[0].forward.as_ref().unwrap();
        assert!((1..50).any(|t| f.at(t) != f.at(0)));
    }

    #[test]
    fn stochastic_uses_only_the_chosen_entry() {
        let mut r = rng::stream(5, &[]);
        let p = DropoutPolicy::stochastic(vec![entry("nml-sequence"), entry("forward-sequence")], 0.5);
        let ms = masks_for_utterance(&p, 4, &[3], &mut r, Some(1)).unwrap();
        assert!(ms.is_active(DropoutLocation::ForwardConnection));
        assert!(!ms.is_active(DropoutLocation::NmlCellUpdate));
        assert!(ms.layers[0].cell.iter().all(Option::is_none));
        let ms = masks_for_utterance(&p, 4, &[3], &mut r, Some(0)).unwrap();
        assert!(ms.layers[0].forward.is_none());
        assert!(ms.layers[0].cell.iter().all(Option::is_some));
    }

    #[test]
    fn policy_validation() {
        let dup = DropoutPolicy::naive(vec![entry("forward-step"), entry("forward-sequence")]);
        assert!(matches!(dup.validate(), Err(Error::InvalidPolicy(_))));
        let two_cells = DropoutPolicy::naive(vec![entry("nml-step"), entry("rnndrop-step")]);
        assert!(matches!(two_cells.validate(), Err(Error::InvalidPolicy(_))));
        let lonely = DropoutPolicy::stochastic(vec![entry("nml-step")], 0.5);
        assert!(matches!(lonely.validate(), Err(Error::InvalidPolicy(_))));
        let cas = DropoutPolicy::cascade(
            vec![DropoutPolicy::none(), DropoutPolicy::none()],
            CascadeTrigger::AtEpochs(vec![]),
        );
        assert!(matches!(cas.validate(), Err(Error::InvalidPolicy(_))));
    }

    #[test]
    fn cell_update_locations() {
        let f = [0.5, 0.25];
        let c = [2.0, -4.0];
        let i = [0.5, 1.0];
        let g = [1.0, 0.5];
        let mut out = [0.0; 2];
        let eq3 = [f[0] * c[0] + i[0] * g[0], f[1] * c[1] + i[1] * g[1]];
        for loc in [DropoutLocation::RnnDropCell, DropoutLocation::NmlCellUpdate] {
            cell_state_with_dropout(&f, &c, &i, &g, &[1.0, 1.0], loc, &mut out).unwrap();
            assert_eq!(out, eq3);
        }
        cell_state_with_dropout(&f, &c, &i, &g, &[0.0, 0.0], DropoutLocation::RnnDropCell, &mut out).unwrap();
        assert_eq!(out, [0.0, 0.0]);
        cell_state_with_dropout(&f, &c, &i, &g, &[0.0, 0.0], DropoutLocation::NmlCellUpdate, &mut out).unwrap();
        assert_eq!(out, [f[0] * c[0], f[1] * c[1]]);
        assert!(matches!(
            cell_state_with_dropout(&f, &c, &i, &g, &[1.0, 1.0], DropoutLocation::ForwardConnection, &mut out),
            Err(Error::WrongLocation(_))
        ));
    }

    #[test]
    fn retention_arithmetic() {
        let r = expected_memory_retention(0.2, 20).unwrap();
        assert!((r.reset - (1.0 - 0.8f64.powi(20))).abs() < 1e-12);
        assert!((r.reset - 0.9885).abs() < 5e-5);
        assert_eq!(expected_memory_retention(0.2, 0).unwrap().survival, 1.0);
    }

    #[test]
    fn cascade_boundaries() {
        let a = DropoutPolicy::naive(vec![entry("nml-sequence"), entry("forward-step")]);
        let b = DropoutPolicy::naive(vec![entry("nml-sequence"), entry("forward-sequence")]);
        let cas = DropoutPolicy::cascade(vec![a.clone(), b.clone()], CascadeTrigger::AtEpochs(vec![10]));
        cas.validate().unwrap();
        let at = |epoch| cascade_active_stage(&cas, TriggerState { epoch, manual_switches: 0 });
        assert_eq!(at(9), (0, &a));
        assert_eq!(at(10), (1, &b));
        assert_eq!(at(50), (1, &b));

        let single = DropoutPolicy::naive(vec![entry("forward-step")]);
        assert_eq!(cascade_active_stage(&single, TriggerState { epoch: 99, manual_switches: 3 }).1, &single);

        let manual = DropoutPolicy::cascade(vec![a.clone(), b.clone()], CascadeTrigger::Manual);
        assert_eq!(cascade_active_stage(&manual, TriggerState { epoch: 40, manual_switches: 0 }).0, 0);
        assert_eq!(cascade_active_stage(&manual, TriggerState { epoch: 0, manual_switches: 1 }).0, 1);
        assert_eq!(cascade_active_stage(&manual, TriggerState { epoch: 0, manual_switches: 7 }).0, 1);
    }
}
