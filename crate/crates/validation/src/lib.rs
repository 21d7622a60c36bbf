//! Small harness for end-to-end acceptance checks: each check runs under a
//! wall-clock budget and reports one PASS/FAIL line.

use std::time::{Duration, Instant};

pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<44} {} ({:.1} s of {:.0} s) {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64(),
            self.detail
        )
    }
}

/// Runs `check`, which returns whether its numerical conditions hold and a
/// detail string. Exceeding the budget fails the check as well.
pub fn run_check(
    id: usize,
    name: &'static str,
    budget_secs: u64,
    check: impl FnOnce() -> (bool, String),
) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = check();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    let outcome = Outcome {
        id,
        name,
        pass: ok && elapsed <= budget,
        detail,
        elapsed,
        budget,
    };
    println!("{}", outcome.line());
    outcome
}

/// Fraction of `values` strictly above `threshold`.
pub fn fraction_above(values: &[f64], threshold: f64) -> f64 {
    values.iter().filter(|&&v| v > threshold).count() as f64 / values.len() as f64
}

pub fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn min_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::INFINITY, f64::min)
}
