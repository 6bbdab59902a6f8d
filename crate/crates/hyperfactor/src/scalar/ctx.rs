//! Thread-local working precision shared by every big-float operation.

use std::cell::{Cell, RefCell};

use astro_float::{Consts, RoundingMode};

/// Precision (bits) used when nothing else has been configured.
pub const DEFAULT_PRECISION: usize = 256;

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static PRECISION: Cell<usize> = const { Cell::new(DEFAULT_PRECISION) };
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Current working precision in bits.
pub fn precision() -> usize {
    PRECISION.with(|p| p.get())
}

/// Sets the working precision for the current thread.
pub fn set_precision(bits: usize) {
    assert!(bits >= 64, "precision below 64 bits is not supported");
    PRECISION.with(|p| p.set(bits));
}

/// Restores the previous precision when dropped.
#[must_use]
pub struct PrecisionScope {
    prev: usize,
}

impl Drop for PrecisionScope {
    fn drop(&mut self) {
        set_precision(self.prev);
    }
}

/// Switches precision until the returned guard is dropped.
pub fn scoped_precision(bits: usize) -> PrecisionScope {
    let prev = precision();
    set_precision(bits);
    PrecisionScope { prev }
}

/// Runs `f` at the given precision.
pub fn with_precision<R>(bits: usize, f: impl FnOnce() -> R) -> R {
    let _g = scoped_precision(bits);
    f()
}

pub(crate) fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Unit roundoff 2^(1-P) as an f64 exponent, used by error bounds.
pub fn unit_roundoff_log2() -> f64 {
    1.0 - precision() as f64
}
