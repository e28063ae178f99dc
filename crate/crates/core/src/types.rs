//! Shared domain types and the extended-real conventions used by every engine.

use std::fmt;

use crate::error::{Error, Result};

/// The full operating point of the tradeoff.
///
/// `r1`, `r2` are first-block multiplexing gains, `t2` is the common part of
/// user 2's gain, `b` is the private-power split exponent, `beta` the
/// interference level and `max_rounds` the ARQ delay `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub r1: f64,
    pub r2: f64,
    pub t2: f64,
    pub b: f64,
    pub beta: f64,
    pub max_rounds: u32,
}

impl SystemParams {
    pub fn new(r1: f64, r2: f64, t2: f64, b: f64, beta: f64, max_rounds: u32) -> Self {
        Self { r1, r2, t2, b, beta, max_rounds }
    }

    /// Private multiplexing gain of user 2.
    pub fn s2(&self) -> f64 {
        (self.r2 - self.t2).max(0.0)
    }

    /// Private power fraction `1 / (1 + rho^b)` at linear SNR `rho`.
    pub fn alpha(&self, rho: f64) -> f64 {
        1.0 / (1.0 + rho.powf(self.b))
    }

    /// Copy with a different round count.
    pub fn with_rounds(&self, max_rounds: u32) -> Self {
        Self { max_rounds, ..*self }
    }

    pub fn validate(self) -> Result<Self> {
        validate(self)
    }
}

/// Check every invariant of [`SystemParams`], returning the params unchanged.
pub fn validate(p: SystemParams) -> Result<SystemParams> {
    let fields = [("r1", p.r1), ("r2", p.r2), ("t2", p.t2), ("b", p.b), ("beta", p.beta)];
    for (name, v) in fields {
        if !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be finite (got {v})")));
        }
    }
    if !(0.0..=1.0).contains(&p.r1) {
        return Err(Error::Domain(format!("r1 must lie in [0, 1] (got {})", p.r1)));
    }
    if !(0.0..=1.0).contains(&p.r2) {
        return Err(Error::Domain(format!("r2 must lie in [0, 1] (got {})", p.r2)));
    }
    if p.t2 < 0.0 {
        return Err(Error::Domain(format!("t2 must be >= 0 (got {})", p.t2)));
    }
    if p.t2 > p.r2 {
        return Err(Error::Domain(format!("t2 exceeds r2 ({} > {})", p.t2, p.r2)));
    }
    if p.b < 0.0 {
        return Err(Error::Domain(format!("b must be >= 0 (got {})", p.b)));
    }
    if p.beta < 0.0 {
        return Err(Error::Domain(format!("beta must be >= 0 (got {})", p.beta)));
    }
    if p.max_rounds < 1 {
        return Err(Error::Domain("L must be >= 1".into()));
    }
    Ok(p)
}

/// A diversity or SNR exponent. Nonnegative, possibly `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ZERO: Exponent = Exponent(0.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidArgument(format!("exponent must be >= 0 (got {value})")));
        }
        Ok(Exponent(value))
    }

    /// Build from a value the caller knows is nonnegative; tiny negative
    /// rounding noise is clamped.
    pub(crate) fn clamp(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        Exponent(value.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl From<Exponent> for f64 {
    fn from(e: Exponent) -> f64 {
        e.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else if let Some(p) = f.precision() {
            write!(f, "{:.*}", p, self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Channel-gain exponents (`|h_ij|^2 = rho^-gamma_ij`) plus the relay-link
/// exponent `u` and listening fraction `f`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExponentPoint {
    pub gamma11: f64,
    pub gamma21: f64,
    pub gamma22: f64,
    pub u: f64,
    pub f: f64,
}

impl ExponentPoint {
    pub fn new(gamma11: f64, gamma21: f64, gamma22: f64, u: f64, f: f64) -> Self {
        Self { gamma11, gamma21, gamma22, u, f }
    }

    /// Point on the RX1 plane with `f = 1` (a listening fraction of one round).
    pub fn rx1(gamma11: f64, gamma21: f64) -> Self {
        Self { gamma11, gamma21, gamma22: 0.0, u: 0.0, f: 1.0 }
    }

    pub fn rx2(gamma22: f64) -> Self {
        Self { gamma22, f: 1.0, ..Self::default() }
    }

    /// Relay-link exponent tied to `r1` by the listening constraint,
    /// `u = 1 - r1 / f`, defined for `f >= r1`.
    pub fn listening_u(r1: f64, f: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&f) || f < r1 {
            return Err(Error::Domain(format!("listening fraction {f} outside [{r1}, 1]")));
        }
        Ok(if f == 0.0 { 1.0 } else { (1.0 - r1 / f).max(0.0) })
    }
}

/// The `[x]^+` operator. NaN is rejected.
pub fn pos_part(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::InvalidArgument("pos_part of NaN".into()));
    }
    Ok(pp(x))
}

/// Infallible `[x]^+` for internal use where NaN cannot occur.
#[inline]
pub(crate) fn pp(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Extended division: `num/0` is `+inf` for `num > 0` and `0` for `num = 0`.
pub fn ext_div(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}
