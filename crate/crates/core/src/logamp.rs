//! Sign / log-magnitude reals.
//!
//! Backward evolution multiplies mode `n` by `exp(n²π²t)`; already at mode 15
//! and `t = 1` that is `e^2220`, far outside `f64`. Every coefficient is
//! therefore carried as `sign · exp(log_mag)`.

use std::cmp::Ordering;
use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

/// Relative magnitude below which a signed sum is treated as exact cancellation.
const CANCELLATION_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogAmplitude {
    sign: i8,
    log_mag: f64,
}

impl LogAmplitude {
    pub const ZERO: LogAmplitude = LogAmplitude {
        sign: 0,
        log_mag: f64::NEG_INFINITY,
    };
    pub const ONE: LogAmplitude = LogAmplitude {
        sign: 1,
        log_mag: 0.0,
    };

    /// Builds from parts. A zero sign or a `-inf` magnitude yields zero; a
    /// nonzero sign is normalised to ±1.
    pub fn new(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogAmplitude {
                sign: sign.signum(),
                log_mag,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogAmplitude {
                sign: if x > 0.0 { 1 } else { -1 },
                log_mag: x.abs().ln(),
            }
        }
    }

    /// `sign · exp(log_mag)`; may overflow to ±inf or underflow to 0.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_mag.exp(),
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn log_mag(self) -> f64 {
        self.log_mag
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn is_finite(self) -> bool {
        self.sign == 0 || self.log_mag.is_finite()
    }

    pub fn abs(self) -> Self {
        LogAmplitude::new(self.sign.abs(), self.log_mag)
    }

    /// Multiplies by `exp(k)`.
    pub fn scale_exp(self, k: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            LogAmplitude::new(self.sign, self.log_mag + k)
        }
    }

    pub fn scale(self, alpha: f64) -> Self {
        self * LogAmplitude::from_f64(alpha)
    }

    /// Sign-aware addition in the log domain.
    pub fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (hi, lo) = if self.log_mag >= other.log_mag {
            (self, other)
        } else {
            (other, self)
        };
        let d = lo.log_mag - hi.log_mag;
        if hi.sign == lo.sign {
            LogAmplitude::new(hi.sign, hi.log_mag + d.exp().ln_1p())
        } else {
            let rel = -d.exp_m1();
            if rel < CANCELLATION_FLOOR {
                Self::ZERO
            } else {
                LogAmplitude::new(hi.sign, hi.log_mag + rel.ln())
            }
        }
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(-other)
    }

    /// Compares magnitudes.
    pub fn cmp_abs(self, other: Self) -> Ordering {
        match (self.sign == 0, other.sign == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.log_mag.total_cmp(&other.log_mag),
        }
    }
}

impl Default for LogAmplitude {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Neg for LogAmplitude {
    type Output = LogAmplitude;
    fn neg(self) -> Self {
        LogAmplitude {
            sign: -self.sign,
            log_mag: self.log_mag,
        }
    }
}

impl Mul for LogAmplitude {
    type Output = LogAmplitude;
    fn mul(self, rhs: Self) -> Self {
        LogAmplitude::new(self.sign * rhs.sign, self.log_mag + rhs.log_mag)
    }
}

/// `ln Σ exp(xᵢ)`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Signed accumulation: positives and negatives are reduced separately with
/// log-sum-exp and combined once, so only the final subtraction can cancel.
#[derive(Debug, Default, Clone)]
pub struct SignedLogSum {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl SignedLogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: LogAmplitude) {
        match x.sign() {
            1 => self.pos.push(x.log_mag()),
            -1 => self.neg.push(x.log_mag()),
            _ => {}
        }
    }

    pub fn total(&self) -> LogAmplitude {
        let p = LogAmplitude::new(1, log_sum_exp(&self.pos));
        let n = LogAmplitude::new(-1, log_sum_exp(&self.neg));
        p.add(n)
    }
}
