use crate::budget::{checked_pow, MemoryBudget};
use crate::error::{invalid, Result};

/// `c1` in the practical rule `ceil(c1 + c2 log10(1/eps))`.
pub const PRACTICAL_INTERCEPT: f64 = 2.0;
/// `c2` in the practical rule `ceil(c1 + c2 log10(1/eps))`.
pub const PRACTICAL_SLOPE: f64 = 0.75;

/// How [`choose_l`] picks the window size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WindowRule {
    /// `ceil((x (2 + 2 e^(2C-1)) + 2 log G) / log x)` with `x = log(1/eps)`.
    /// `c` must already account for the inverse temperature; `g >= 1`.
    Theoretical { c: f64, g: f64 },
    /// `min(budget_l, ceil(c1 + c2 log10(1/eps)))`, at least 2.
    Practical { budget_l: usize },
}

/// Window size for a target accuracy `epsilon` in `(0, 1/e)`.
///
/// The theoretical bound is not monotone in `epsilon` for `log(1/eps)` close
/// to 1, so its monotone envelope is returned: the bound is evaluated at
/// `max(log(1/eps), x*)` with `x*` its minimizer. Both rules are
/// non-increasing in `epsilon`.
pub fn choose_l(epsilon: f64, rule: WindowRule) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < (-1.0f64).exp()) {
        return Err(invalid(format!("target error must lie in (0, 1/e), got {epsilon}")));
    }
    match rule {
        WindowRule::Practical { budget_l } => {
            let raw = (PRACTICAL_INTERCEPT + PRACTICAL_SLOPE * (1.0 / epsilon).log10()).ceil();
            Ok((raw as usize).min(budget_l).max(2))
        }
        WindowRule::Theoretical { c, g } => {
            if !c.is_finite() {
                return Err(invalid(format!("constant C must be finite, got {c}")));
            }
            if !(g >= 1.0) || !g.is_finite() {
                return Err(invalid(format!("constant G must be finite and at least 1, got {g}")));
            }
            let a = 2.0 + 2.0 * (2.0 * c - 1.0).exp();
            let b = 2.0 * g.ln();
            let x = (1.0 / epsilon).ln().max(bound_minimizer(a, b));
            let value = ((a * x + b) / x.ln()).ceil();
            if !value.is_finite() || value > usize::MAX as f64 {
                return Err(invalid(format!("theoretical window {value} is not representable")));
            }
            Ok((value as usize).max(2))
        }
    }
}

/// Minimizer over `x > 1` of `(a x + b) / log x`: the root of
/// `x (log x - 1) = b / a`, which lies in `[e, inf)`.
fn bound_minimizer(a: f64, b: f64) -> f64 {
    let target = b / a;
    let phi = |x: f64| x * (x.ln() - 1.0) - target;
    let (mut lo, mut hi) = (std::f64::consts::E, std::f64::consts::E);
    while phi(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Largest window whose transfer operator `E` (and the three work matrices
/// of the same size built alongside it) fits in `budget`.
pub fn budget_window(local_dim: usize, budget: &MemoryBudget, elem_size: usize) -> usize {
    let mut l = 2;
    while let Some(n) = checked_pow(local_dim, l + 1) {
        if budget
            .require_matrices("transfer operator E", n as u128, 4, elem_size)
            .is_err()
        {
            break;
        }
        l += 1;
    }
    l
}
