//! How far back a trajectory extends inside H.
//!
//! The horizon of a state is `sup{t ≥ 0 : Σ aₙ² exp(−2λₙt) < ∞}`. It is read
//! off the tail law symbolically: a term `C·n^(-p)·exp(γλₙ)` survives backward
//! evolution for every `t < γ`, and at `t = γ` it is left with `C·n^(-p)`,
//! which is in H exactly when `p > 1/2`. Partial sums can never certify
//! divergence, so no numerical summation happens here.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::spectral::SpectralState;

/// Supremum of admissible backward times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    value: f64,
    open: bool,
}

impl Horizon {
    pub const INFINITE: Horizon = Horizon {
        value: f64::INFINITY,
        open: false,
    };

    pub fn new(value: f64, open: bool) -> Self {
        Horizon {
            value,
            open: open && value.is_finite(),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// True when backward evolution exists for `s < value` but not at `value`.
    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }

    /// Whether backward evolution by `t ≥ 0` stays in H.
    pub fn admits(&self, t: f64) -> bool {
        t == 0.0 || t < self.value || (t == self.value && !self.open)
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else if self.open {
            write!(f, "{} (open)", self.value)
        } else {
            write!(f, "{} (closed)", self.value)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Class {
    /// Trajectory extends to `t = −∞`.
    InD,
    /// Trajectory extends back up to the horizon.
    InDtUpTo(Horizon),
    /// No backward extension at all.
    InZ,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: Class,
    pub certificate: String,
}

impl Classification {
    pub fn horizon(&self) -> Horizon {
        match self.class {
            Class::InD => Horizon::INFINITE,
            Class::InDtUpTo(h) => h,
            Class::InZ => Horizon::new(0.0, true),
        }
    }
}

pub fn horizon(state: &SpectralState) -> Horizon {
    let terms = state.tail().terms();
    let Some(gamma) = terms.iter().map(|t| t.damping).reduce(f64::min) else {
        return Horizon::INFINITE;
    };
    if gamma <= 0.0 {
        // Only the trivial step s = 0 is available.
        return Horizon::new(0.0, true);
    }
    let slowest = terms
        .iter()
        .filter(|t| t.damping == gamma)
        .map(|t| t.power)
        .fold(f64::INFINITY, f64::min);
    Horizon::new(gamma, slowest <= 0.5)
}

pub fn classify(state: &SpectralState) -> Classification {
    let h = horizon(state);
    if h.is_infinite() {
        return Classification {
            class: Class::InD,
            certificate: "zero tail: finite modal sum, every backward image stays in H".into(),
        };
    }
    if h.value() == 0.0 {
        return Classification {
            class: Class::InZ,
            certificate: format!(
                "undamped power-law tail {}: exp(2n²π²t) outgrows n^-2p for every t > 0",
                state.tail().describe()
            ),
        };
    }
    let endpoint = if h.is_open() {
        "the residual law at t = horizon is not square-summable"
    } else {
        "the residual power law at t = horizon is still square-summable"
    };
    Classification {
        class: Class::InDtUpTo(h),
        certificate: format!(
            "tail {} is damped by exp({}·λn); {}",
            state.tail().describe(),
            h.value(),
            endpoint
        ),
    }
}

/// Result of a backward solve.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardImage {
    pub state: SpectralState,
    /// `ln exp(−λ_N t)` for the largest retained mode `N`.
    pub log_amplification: f64,
}

impl BackwardImage {
    /// May be `inf` for high modes; see `log_amplification`.
    pub fn amplification(&self) -> f64 {
        self.log_amplification.exp()
    }
}

/// `T_{−t}`, for `t` inside the horizon.
pub fn backward_evolve(state: &SpectralState, t: f64) -> Result<BackwardImage> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid(format!("backward time must be finite and >= 0, got {t}")));
    }
    let h = horizon(state);
    if !h.admits(t) {
        return Err(Error::HorizonExceeded {
            horizon: h.value(),
            open: h.is_open(),
            requested: t,
        });
    }
    let log_amplification = state
        .spectrum()
        .eigenvalues()
        .last()
        .map_or(0.0, |l| -l * t);
    Ok(BackwardImage {
        state: state.shift_time(-t),
        log_amplification,
    })
}

/// `ln ‖T_{−k} x‖` for `k = 0..=n_max`; requires `x ∈ D`.
pub fn frechet_log_seminorms(state: &SpectralState, n_max: usize) -> Result<Vec<f64>> {
    let h = horizon(state);
    if !h.is_infinite() {
        return Err(Error::NotInD { horizon: h.value() });
    }
    (0..=n_max)
        .map(|k| Ok(backward_evolve(state, k as f64)?.state.log_norm_h()))
        .collect()
}

/// `‖x‖ₖ = ‖T_{−k} x‖` for `k = 0..=n_max`; entries may overflow to `inf`,
/// use [`frechet_log_seminorms`] when that matters.
pub fn frechet_seminorms(state: &SpectralState, n_max: usize) -> Result<Vec<f64>> {
    Ok(frechet_log_seminorms(state, n_max)?
        .into_iter()
        .map(f64::exp)
        .collect())
}
