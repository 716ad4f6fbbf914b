//! Stage configuration for the reduction pipeline. The asymptotic
//! constructions leave several constants unspecified (field-size exponent,
//! repetition counts); these are configuration knobs with documented
//! defaults.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionConfig {
    /// Soundness target for the first stage; drives the field size.
    pub eps1: f64,
    /// Noise rate of the XOR gadget (honest value becomes 1 - eps).
    pub eps_xor: f64,
    /// Field size is a prime in [(log2 n / eps1)^e, 2 (log2 n / eps1)^e].
    pub d3_exponent: u32,
    /// Real repetitions K.
    pub repetitions: usize,
    /// Confuse repetitions K'.
    pub confusions: usize,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            eps1: 0.1,
            eps_xor: 0.05,
            d3_exponent: 3,
            repetitions: 8,
            confusions: 8,
        }
    }
}

impl ReductionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eps1 <= 0.0 || !(0.0..=0.5).contains(&self.eps_xor) {
            return Err(Error::InvalidGame("eps targets out of range".into()));
        }
        if self.d3_exponent == 0 || self.repetitions == 0 || self.confusions == 0 {
            return Err(Error::InvalidGame(
                "exponent and repetition counts must be >= 1".into(),
            ));
        }
        Ok(())
    }
}
