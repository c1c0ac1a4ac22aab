use std::f64::consts::LN_2;

use super::pmf::{Alphabet, JointPmf};
use crate::error::{check_probability, Error, Result};

/// Bisection stops once the bracketing interval is this narrow.
const INVERSE_WIDTH: f64 = 1e-14;

/// `h_b(p) = -p ln p - (1 - p) ln(1 - p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability("binary_entropy argument", p)?;
    Ok(hb(p))
}

pub(crate) fn hb(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// The unique `p` in `[0, 1/2]` with `h_b(p) = h`.
pub fn binary_entropy_inverse(h: f64) -> Result<f64> {
    if !(0.0..=LN_2).contains(&h) {
        return Err(Error::Domain {
            what: "binary entropy value",
            value: h,
        });
    }
    Ok(hb_inverse(h))
}

pub(crate) fn hb_inverse(h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    if h >= LN_2 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    while hi - lo > INVERSE_WIDTH {
        let mid = 0.5 * (lo + hi);
        if hb(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `a * b = a (1 - b) + (1 - a) b`, the crossover of two cascaded BSCs.
pub fn binary_convolution(a: f64, b: f64) -> Result<f64> {
    check_probability("binary_convolution argument", a)?;
    check_probability("binary_convolution argument", b)?;
    Ok(bconv(a, b))
}

pub(crate) fn bconv(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + (1.0 - a) * b
}

/// Doubly symmetric binary source: `x ~ B(1/2)`, `z = x xor n`, `n ~ B(p)`.
/// Axes are labeled `x` and `z`.
pub fn dsbs(p: f64) -> Result<JointPmf> {
    check_probability("dsbs crossover", p)?;
    let axes = vec![Alphabet::new("x", 2)?, Alphabet::new("z", 2)?];
    let same = 0.5 * (1.0 - p);
    let diff = 0.5 * p;
    JointPmf::new(axes, vec![same, diff, diff, same])
}
