use serde::{Deserialize, Serialize};

use crate::numerics::binomial;
use crate::{Error, Result};

/// Size of a level-`k` moment matrix. Counts saturate at `u128::MAX`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryEstimate {
    pub n: usize,
    pub d: usize,
    pub k: u32,
    /// `A + B`: state words plus measurement words.
    pub a_plus_b: u128,
    /// `sum_{i <= k} (A + B)^i`.
    pub word_count: u128,
    /// `word_count^2 / 2` real parameters.
    pub parameter_count: u128,
    /// Eight bytes per parameter.
    pub bytes: u128,
    pub saturated: bool,
}

pub fn memory_estimate(n: usize, d: usize, k: u32) -> Result<MemoryEstimate> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 and d >= 2 (n={n}, d={d})")));
    }
    let a = binomial(n, 2).saturating_mul((d * d) as u128);
    let ab = a.saturating_add((n * d) as u128);
    let mut saturated = false;
    let mut sat = |x: Option<u128>| {
        x.unwrap_or_else(|| {
            saturated = true;
            u128::MAX
        })
    };
    let mut word_count: u128 = 0;
    let mut power: u128 = 1;
    for i in 0..=k {
        if i > 0 {
            power = sat(power.checked_mul(ab));
        }
        word_count = sat(word_count.checked_add(power));
    }
    let parameter_count = sat(word_count.checked_mul(word_count)) / 2;
    let bytes = sat(parameter_count.checked_mul(8));
    Ok(MemoryEstimate { n, d, k, a_plus_b: ab, word_count, parameter_count, bytes, saturated })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(memory_estimate(4, 6, 1).unwrap().a_plus_b, 240);
        let e = memory_estimate(4, 5, 1).unwrap();
        assert_eq!(e.word_count, 171);
        assert_eq!(e.parameter_count, 171 * 171 / 2);
        assert_eq!(e.bytes, 8 * (171 * 171 / 2));
        assert_eq!(memory_estimate(4, 5, 0).unwrap().word_count, 1);
    }

    #[test]
    fn saturates() {
        let e = memory_estimate(50, 50, 40).unwrap();
        assert!(e.saturated);
        assert_eq!(e.bytes, u128::MAX);
        assert!(memory_estimate(1, 5, 1).is_err());
    }
}
