//! Small pinned pairs used across the test suites and the CLI examples.
//!
//! All live on the counting measure with two atoms.

use crate::measure::WeightedFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// f = (3, 0), g = (1, 2), p = 2.
    A,
    /// f = (1, 1), g = (1, 0), p = 4.
    B,
    /// f = g = (1, 1); the exponent is free.
    C,
    /// f = (1, 0), g = (0, 1), p = 4.
    D,
    /// f = (2, 1), g = (1, 1), p = 1.5.
    E,
}

impl Fixture {
    pub const ALL: [Fixture; 5] = [Fixture::A, Fixture::B, Fixture::C, Fixture::D, Fixture::E];

    pub fn values(self) -> ([f64; 2], [f64; 2]) {
        match self {
            Fixture::A => ([3.0, 0.0], [1.0, 2.0]),
            Fixture::B => ([1.0, 1.0], [1.0, 0.0]),
            Fixture::C => ([1.0, 1.0], [1.0, 1.0]),
            Fixture::D => ([1.0, 0.0], [0.0, 1.0]),
            Fixture::E => ([2.0, 1.0], [1.0, 1.0]),
        }
    }

    /// The exponent the fixture is pinned at (FIX-C defaults to 3).
    pub fn default_p(self) -> f64 {
        match self {
            Fixture::A => 2.0,
            Fixture::B | Fixture::D => 4.0,
            Fixture::C => 3.0,
            Fixture::E => 1.5,
        }
    }

    pub fn functions(self) -> (WeightedFunction, WeightedFunction) {
        let (f, g) = self.values();
        let f = WeightedFunction::counting(f.to_vec()).expect("fixture values are valid");
        let g = WeightedFunction::new(f.space(), g.to_vec()).expect("fixture values are valid");
        (f, g)
    }
}
