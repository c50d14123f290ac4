//! A minimal runner: each criterion is a function returning a one-line detail
//! on success or a reason on failure. Panics count as failures.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

pub type Outcome = Result<String, String>;

pub struct Criterion {
    pub name: &'static str,
    pub check: fn() -> Outcome,
}

/// Shorthand for early returns inside checks.
#[macro_export]
macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Runs every criterion, prints one PASS or FAIL line each, and returns the failure count.
pub fn run(criteria: &[Criterion], filter: Option<&str>) -> usize {
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_none_or(|f| c.name.contains(f))) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} ({secs:.2}s): {detail}", c.name),
            Err(reason) => {
                failed += 1;
                println!("FAIL {} ({secs:.2}s): {reason}", c.name);
            }
        }
    }
    failed
}
