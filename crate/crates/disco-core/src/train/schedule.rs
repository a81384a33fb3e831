use serde::{Deserialize, Serialize};

/// Learning-rate schedules; all are monotone non-increasing in the step
/// and equal their `initial` rate at step 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LrSchedule {
    Constant {
        initial: f64,
    },
    /// Linear decay hitting exactly 0 at `end_step` and staying there.
    Linear {
        initial: f64,
        end_step: usize,
    },
    /// `initial * decay^step` with `decay` in (0, 1].
    Exponential {
        initial: f64,
        decay: f64,
    },
    /// Multiply by `factor` in (0, 1] every `every` steps.
    Step {
        initial: f64,
        factor: f64,
        every: usize,
    },
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule::Exponential {
            initial: 0.1,
            decay: 0.999,
        }
    }
}

impl LrSchedule {
    pub fn initial(&self) -> f64 {
        match self {
            LrSchedule::Constant { initial }
            | LrSchedule::Linear { initial, .. }
            | LrSchedule::Exponential { initial, .. }
            | LrSchedule::Step { initial, .. } => *initial,
        }
    }
}

/// Learning rate at a 0-based optimizer step.
pub fn lr_at_step(schedule: &LrSchedule, step: usize) -> f64 {
    match schedule {
        LrSchedule::Constant { initial } => *initial,
        LrSchedule::Linear { initial, end_step } => {
            let end = (*end_step).max(1);
            if step >= end {
                0.0
            } else {
                initial * (1.0 - step as f64 / end as f64)
            }
        }
        LrSchedule::Exponential { initial, decay } => {
            initial * num_traits::Float::powi(*decay, step as i32)
        }
        LrSchedule::Step {
            initial,
            factor,
            every,
        } => {
            let drops = step / (*every).max(1);
            initial * num_traits::Float::powi(*factor, drops as i32)
        }
    }
}
