//! The check registry, one module per suite.

pub mod algebroid;
pub mod bott;
pub mod courant;
pub mod forms;
pub mod fusion;
pub mod lifting;
pub mod qham;

use crate::check::Check;

/// Interior times at which path profiles are compared.
pub const TIMES: [f64; 4] = [0.1, 0.37, 0.5, 0.81];

/// Every check, grouped by suite in a fixed order.
pub fn registry() -> Vec<Check> {
    [algebroid::checks(), forms::checks(), lifting::checks(), bott::checks(), fusion::checks(), courant::checks(), qham::checks()]
        .concat()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut names: Vec<String> = registry().iter().map(Check::full_name).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
    }
}
