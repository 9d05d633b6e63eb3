//! Per-thread bound on brute-force lattice-point enumerations.

use std::cell::Cell;

pub const DEFAULT_BUDGET: u64 = 5_000_000;

thread_local! {
    static BUDGET: Cell<u64> = const { Cell::new(DEFAULT_BUDGET) };
}

pub fn current() -> u64 {
    BUDGET.with(|b| b.get())
}

/// Runs `f` with the enumeration budget set to `n` on this thread.
pub fn with_budget<R>(n: u64, f: impl FnOnce() -> R) -> R {
    let old = BUDGET.with(|b| b.replace(n));
    struct Restore(u64);
    impl Drop for Restore {
        fn drop(&mut self) {
            BUDGET.with(|b| b.set(self.0));
        }
    }
    let _guard = Restore(old);
    f()
}
