//! Published expected spreads for 12 objects at `p = 0.8`, rounded to three
//! decimals. Used by the verification suite.

use crate::ranking::PositionPair;

pub const REFERENCE_N: usize = 12;
pub const REFERENCE_P: f64 = 0.8;

/// Row `j - 2` lists the values for `i = 1..j`.
const LOWER_TRIANGLE: [&[f64]; 11] = [
    &[0.319],
    &[-0.010, 0.557],
    &[-0.251, 0.247, 0.661],
    &[-0.389, 0.051, 0.346, 0.694],
    &[-0.458, -0.057, 0.154, 0.376, 0.702],
    &[-0.492, -0.111, 0.050, 0.184, 0.384, 0.704],
    &[-0.508, -0.138, -0.004, 0.079, 0.190, 0.384, 0.702],
    &[-0.523, -0.157, -0.036, 0.019, 0.079, 0.184, 0.376, 0.694],
    &[
        -0.557, -0.193, -0.078, -0.036, -0.004, 0.050, 0.154, 0.346, 0.661,
    ],
    &[
        -0.669, -0.306, -0.193, -0.157, -0.138, -0.111, -0.057, 0.051, 0.247, 0.557,
    ],
    &[
        -1.031, -0.669, -0.557, -0.523, -0.508, -0.492, -0.458, -0.389, -0.251, -0.010, 0.319,
    ],
];

/// All 66 reference values.
pub fn reference_table() -> Vec<(PositionPair, f64)> {
    LOWER_TRIANGLE
        .iter()
        .enumerate()
        .flat_map(|(row, values)| {
            let j = row + 2;
            values.iter().enumerate().map(move |(k, &v)| {
                (
                    PositionPair::new(k + 1, j, REFERENCE_N).expect("valid pair"),
                    v,
                )
            })
        })
        .collect()
}
