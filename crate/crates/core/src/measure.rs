use core::fmt;
use core::ops::Add;

use num_rational::Ratio;

/// Exact measure of a set inside a truncation tower: `count / total`.
///
/// The pair is kept unreduced so that the denominator stays `h_J + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Measure {
    pub count: u64,
    pub total: u64,
}

impl Measure {
    pub fn new(count: u64, total: u64) -> Self {
        debug_assert!(total > 0);
        Measure { count, total }
    }

    pub fn zero(total: u64) -> Self {
        Measure { count: 0, total }
    }

    pub fn ratio(&self) -> Ratio<u128> {
        Ratio::new(u128::from(self.count), u128::from(self.total))
    }

    pub fn to_f64(&self) -> f64 {
        self.count as f64 / self.total as f64
    }
}

impl Add for Measure {
    type Output = Measure;

    /// Both operands must live in the same truncation tower.
    fn add(self, rhs: Measure) -> Measure {
        assert_eq!(self.total, rhs.total, "measures from different truncations");
        Measure::new(self.count + rhs.count, self.total)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.count, self.total)
    }
}
