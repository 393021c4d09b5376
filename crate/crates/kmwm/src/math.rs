//! Thin wrappers over `libm` so the crate stays `no_std`.

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

pub(crate) const PI: f64 = core::f64::consts::PI;

/// Closest integer to `x`; exact half-integers round down.
pub(crate) fn round_first(x: f64) -> i64 {
    ceil(x - 0.5) as i64
}

/// Second-closest integer to `x`; at a tie this is `round_first(x) + 1`.
pub(crate) fn round_second(x: f64) -> i64 {
    let f1 = round_first(x);
    if x - f1 as f64 >= 0.0 {
        f1 + 1
    } else {
        f1 - 1
    }
}
