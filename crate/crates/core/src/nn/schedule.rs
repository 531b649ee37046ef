use crate::{Error, Result};

/// Step schedule that halves the learning rate every `halve_every` epochs.
/// `halve_every == 0` keeps the rate constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    base_lr: f64,
    halve_every: u64,
}

impl LrSchedule {
    pub fn new(base_lr: f64, halve_every: u64) -> Result<Self> {
        if !(base_lr > 0.0 && base_lr.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive and finite, got {base_lr}"
            )));
        }
        Ok(Self {
            base_lr,
            halve_every,
        })
    }

    pub fn constant(base_lr: f64) -> Result<Self> {
        Self::new(base_lr, 0)
    }

    pub fn base_lr(&self) -> f64 {
        self.base_lr
    }

    pub fn halve_every(&self) -> u64 {
        self.halve_every
    }

    pub fn lr_at(&self, epoch: u64) -> f64 {
        if self.halve_every == 0 {
            return self.base_lr;
        }
        let halvings = epoch / self.halve_every;
        // powi on 0.5 is exact; saturate long before the exponent underflows
        self.base_lr * 0.5f64.powi(halvings.min(2000) as i32)
    }
}
