//! Memory budget for dense allocations.
//!
//! Every entry point that allocates `d^n`-sized matrices checks the estimated
//! footprint against a budget before doing any work. The default is 2048 MiB
//! and can be overridden with the `TRANSFERKIT_MEM_BUDGET_MB` environment
//! variable.

use crate::error::{Error, Result};

pub const MEM_BUDGET_ENV: &str = "TRANSFERKIT_MEM_BUDGET_MB";
pub const DEFAULT_BUDGET_MIB: u64 = 2048;

const MIB: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    bytes: u64,
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self::from_mib(DEFAULT_BUDGET_MIB)
    }
}

impl MemoryBudget {
    pub fn from_mib(mib: u64) -> Self {
        Self {
            bytes: mib.saturating_mul(MIB),
        }
    }

    /// Reads `TRANSFERKIT_MEM_BUDGET_MB`, falling back to the default when the
    /// variable is unset or unparsable.
    pub fn from_env() -> Self {
        match std::env::var(MEM_BUDGET_ENV) {
            Ok(v) => match v.trim().parse::<u64>() {
                Ok(mib) => Self::from_mib(mib),
                Err(_) => {
                    log::warn!("ignoring unparsable {MEM_BUDGET_ENV}={v:?}");
                    Self::default()
                }
            },
            Err(_) => Self::default(),
        }
    }

    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    pub fn mib(&self) -> u64 {
        self.bytes / MIB
    }

    /// Checks that `count` dense `dim x dim` matrices with `elem_size`-byte
    /// entries fit in the budget.
    pub fn require_matrices(&self, what: &str, dim: u128, count: u128, elem_size: usize) -> Result<()> {
        let required = dim
            .saturating_mul(dim)
            .saturating_mul(count)
            .saturating_mul(elem_size as u128);
        if required > self.bytes as u128 {
            return Err(Error::ResourceExhausted {
                what: what.to_string(),
                required_mib: u64::try_from(required / MIB as u128).unwrap_or(u64::MAX),
                budget_mib: self.mib(),
            });
        }
        Ok(())
    }
}

/// `base^exp` without overflow; `None` if it does not fit in `usize`.
pub fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// `base^exp` or a resource error naming `what`.
pub(crate) fn dim_or_err(base: usize, exp: usize, what: &str) -> Result<usize> {
    checked_pow(base, exp).ok_or_else(|| Error::ResourceExhausted {
        what: format!("{what} ({base}^{exp} states)"),
        required_mib: u64::MAX,
        budget_mib: MemoryBudget::from_env().mib(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_requests_fit() {
        let b = MemoryBudget::from_mib(1);
        assert!(b.require_matrices("x", 64, 2, 16).is_ok());
        assert!(matches!(
            b.require_matrices("x", 1024, 1, 16),
            Err(Error::ResourceExhausted { .. })
        ));
    }

    #[test]
    fn pow_overflow_is_detected() {
        assert_eq!(checked_pow(2, 10), Some(1024));
        assert_eq!(checked_pow(2, 200), None);
        assert!(dim_or_err(4, 100, "interval").is_err());
    }
}
