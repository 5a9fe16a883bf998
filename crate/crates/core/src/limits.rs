//! Global resource cap on the size of materialized groups.
//!
//! The default is `10^7` elements; the `AIMG_CAP_ORDER` environment
//! variable or [`set_cap_order`] override it.

use std::sync::atomic::{AtomicUsize, Ordering};

pub const DEFAULT_CAP_ORDER: usize = 10_000_000;

static CAP: AtomicUsize = AtomicUsize::new(0);

pub fn cap_order() -> usize {
    let cap = CAP.load(Ordering::Relaxed);
    if cap != 0 {
        return cap;
    }
    let from_env = std::env::var("AIMG_CAP_ORDER")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(DEFAULT_CAP_ORDER);
    let _ = CAP.compare_exchange(0, from_env, Ordering::Relaxed, Ordering::Relaxed);
    CAP.load(Ordering::Relaxed)
}

pub fn set_cap_order(cap: usize) {
    CAP.store(cap.max(1), Ordering::Relaxed);
}
