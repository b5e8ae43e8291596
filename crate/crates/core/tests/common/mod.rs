#![allow(dead_code)]

use k2reg::{ExactScalar, LineConfiguration, Parameter};

pub fn t_param(num: i64, den: i64) -> Parameter {
    Parameter::T(ExactScalar::from_ratio(num, den))
}

/// {x}, {y}, {y - x + 1}
pub fn cfg_a() -> LineConfiguration {
    LineConfiguration::from_ints(
        &[(1, 0, &[0]), (0, 1, &[0]), (-1, 1, &[1])],
        t_param(1, 10000),
    )
    .unwrap()
}

/// {x, x+1}, {y, y+1}
pub fn cfg_b() -> LineConfiguration {
    LineConfiguration::from_ints(&[(1, 0, &[0, 1]), (0, 1, &[0, 1])], t_param(1, 10000)).unwrap()
}

/// {x, x+1}, {y, y+1}, {y - x + 3}
pub fn cfg_c() -> LineConfiguration {
    LineConfiguration::from_ints(
        &[(1, 0, &[0, 1]), (0, 1, &[0, 1]), (-1, 1, &[3])],
        t_param(1, 10000),
    )
    .unwrap()
}

/// Four groups of sizes (2, 2, 1, 1).
pub fn cfg_four() -> LineConfiguration {
    LineConfiguration::from_ints(
        &[
            (1, 0, &[0, 1]),
            (0, 1, &[0, 2]),
            (-1, 1, &[3]),
            (1, 2, &[7]),
        ],
        t_param(1, 1000),
    )
    .unwrap()
}

pub fn all_small() -> Vec<(&'static str, LineConfiguration)> {
    vec![("A", cfg_a()), ("B", cfg_b()), ("C", cfg_c())]
}
