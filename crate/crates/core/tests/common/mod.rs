#![allow(dead_code)]

use lpbounds::measure::{ExponentContext, MeasureSpace, WeightedFunction};
use lpbounds::pairwise::PairInput;
use proptest::prelude::*;

/// Nonnegative values: zeros mixed with magnitudes spread over several decades.
pub fn value() -> impl Strategy<Value = f64> {
    prop_oneof![
        1 => Just(0.0),
        4 => (-6.0f64..3.0).prop_map(|e| 10f64.powf(e)),
        4 => 0.0f64..1.0,
    ]
}

pub fn positive_value() -> impl Strategy<Value = f64> {
    prop_oneof![(-6.0f64..3.0).prop_map(|e| 10f64.powf(e)), 0.01f64..1.0]
}

pub fn weight() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), 0.1f64..10.0]
}

/// `(weights, f, g)` on 2 to 32 atoms.
pub fn raw_pair(positive: bool) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..=32).prop_flat_map(move |n| {
        let v = move || {
            if positive {
                positive_value().boxed()
            } else {
                value().boxed()
            }
        };
        (
            prop::collection::vec(weight(), n),
            prop::collection::vec(v(), n),
            prop::collection::vec(v(), n),
        )
    })
}

pub fn pair(weights: Vec<f64>, f: Vec<f64>, g: Vec<f64>, p: f64) -> Option<PairInput> {
    let space = MeasureSpace::new(weights).ok()?;
    let f = WeightedFunction::new(&space, f).ok()?;
    let g = WeightedFunction::new(&space, g).ok()?;
    PairInput::new(f, g, ExponentContext::new(p).ok()?).ok()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
