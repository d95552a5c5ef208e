//! Wall-clock budgets. The core crate has no clock, so callers supply one.

pub trait Budget {
    /// True once the caller's time allowance is used up.
    fn expired(&self) -> bool;
}

/// Never expires.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unlimited;

impl Budget for Unlimited {
    fn expired(&self) -> bool {
        false
    }
}

impl<F: Fn() -> bool> Budget for F {
    fn expired(&self) -> bool {
        self()
    }
}
