//! The newbob learning-rate schedule.
//!
//! The rate stays fixed until the CV token-accuracy improvement over the best
//! previous epoch drops below the halving threshold; from then on it halves
//! every epoch, and training stops once the improvement drops below the stop
//! threshold.

use crate::error::{Error, Result};

pub const DEFAULT_LR: f64 = 0.00004;
pub const DEFAULT_HALVING_THRESHOLD: f64 = 0.5;
pub const DEFAULT_STOP_THRESHOLD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NewbobAction {
    Keep,
    Halve,
    Stop,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewbobState {
    pub lr: f64,
    /// Percentage points.
    pub halving_threshold: f64,
    /// Percentage points.
    pub stop_threshold: f64,
    /// Epochs (1-based) before which no halving happens; 0 disables.
    pub min_epochs_before_halving: usize,
    pub halving_active: bool,
    /// Operator override: start halving at the next decision regardless of
    /// the improvement or the minimum-epoch rule.
    pub manual_trigger: bool,
    /// `(epoch, CV token accuracy %)`, epochs strictly increasing.
    pub cv_history: Vec<(usize, f64)>,
}

impl Default for NewbobState {
    fn default() -> Self {
        NewbobState::new(DEFAULT_LR)
    }
}

impl NewbobState {
    pub fn new(lr: f64) -> Self {
        NewbobState {
            lr,
            halving_threshold: DEFAULT_HALVING_THRESHOLD,
            stop_threshold: DEFAULT_STOP_THRESHOLD,
            min_epochs_before_halving: 0,
            halving_active: false,
            manual_trigger: false,
            cv_history: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Schedule(format!("learning rate {} must be positive", self.lr)));
        }
        if !(self.halving_threshold > 0.0 && self.stop_threshold > 0.0) {
            return Err(Error::Schedule("thresholds must be positive".into()));
        }
        Ok(())
    }

    /// Best CV accuracy recorded so far.
    pub fn best(&self) -> Option<f64> {
        self.cv_history.iter().map(|&(_, a)| a).reduce(f64::max)
    }
}

/// Records `new_cv_acc` for `epoch` (1-based) and decides what happens to
/// the learning rate. On [`NewbobAction::Halve`] `state.lr` is halved.
pub fn newbob_decide(state: &mut NewbobState, epoch: usize, new_cv_acc: f64) -> Result<NewbobAction> {
    state.validate()?;
    if let Some(&(last, _)) = state.cv_history.last() {
        if epoch <= last {
            return Err(Error::Schedule(format!("epoch {epoch} does not follow epoch {last}")));
        }
    }
    if !new_cv_acc.is_finite() {
        return Err(Error::Schedule(format!("CV accuracy {new_cv_acc} is not finite")));
    }
    let improvement = state.best().map_or(f64::INFINITY, |b| new_cv_acc - b);
    state.cv_history.push((epoch, new_cv_acc));

    let action = if state.halving_active {
        if improvement < state.stop_threshold {
            NewbobAction::Stop
        } else {
            NewbobAction::Halve
        }
    } else if state.manual_trigger {
        state.halving_active = true;
        NewbobAction::Halve
    } else if epoch < state.min_epochs_before_halving {
        NewbobAction::Keep
    } else if improvement < state.halving_threshold {
        state.halving_active = true;
        NewbobAction::Halve
    } else {
        NewbobAction::Keep
    };
    if action == NewbobAction::Halve {
        state.lr *= 0.5;
    }
    Ok(action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use NewbobAction::*;

    fn run(state: &mut NewbobState, accs: &[f64]) -> Vec<NewbobAction> {
        accs.iter()
            .enumerate()
            .map(|(i, &a)| newbob_decide(state, i + 1, a).unwrap())
            .collect()
    }

    #[test]
    fn halve_then_stop() {
        let mut s = NewbobState::default();
        assert_eq!(run(&mut s, &[50.0, 60.0, 70.0, 70.3, 70.35]), [Keep, Keep, Keep, Halve, Stop]);
        assert_eq!(s.lr, DEFAULT_LR / 2.0);
    }

    #[test]
    fn threshold_boundaries() {
        let mut s = NewbobState::default();
        assert_eq!(run(&mut s, &[70.0, 70.6]), [Keep, Keep]);
        let mut s = NewbobState::default();
        assert_eq!(run(&mut s, &[70.0, 70.3]), [Keep, Halve]);
    }

    #[test]
    fn minimum_epochs_hold_the_rate() {
        let mut s = NewbobState { min_epochs_before_halving: 6, ..Default::default() };
        assert_eq!(run(&mut s, &[60.0, 59.0, 58.0, 61.0, 61.1, 61.2]), [Keep, Keep, Keep, Keep, Keep, Halve]);
    }

    #[test]
    fn manual_trigger_overrides_minimum() {
        let mut s = NewbobState { min_epochs_before_halving: 6, ..Default::default() };
        run(&mut s, &[60.0, 65.0]);
        s.manual_trigger = true;
        assert_eq!(newbob_decide(&mut s, 3, 70.0).unwrap(), Halve);
        assert_eq!(newbob_decide(&mut s, 4, 71.0).unwrap(), Halve);
        assert_eq!(newbob_decide(&mut s, 5, 71.05).unwrap(), Stop);
    }

    #[test]
    fn epochs_must_increase() {
        let mut s = NewbobState::default();
        newbob_decide(&mut s, 2, 50.0).unwrap();
        assert!(newbob_decide(&mut s, 2, 51.0).is_err());
    }
}
