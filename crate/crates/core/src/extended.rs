//! The extended space E and the group `𝒯_t` acting on it.
//!
//! A point of E is stored as `(τ, y)`: the class whose image under `T_τ` is
//! the H-state `y`, i.e. the formal backward image `T_{−τ} y`. Under backward
//! uniqueness the class is fixed by this first entry into H. Forward motion
//! eats the offset first and then evolves `y`; backward motion grows the
//! offset and [`ExtendedState::canonicalize`] pushes as much of it as the
//! horizon of `y` allows back into `y`.

use crate::error::{invalid, Error, Result};
use crate::reversibility::horizon;
use crate::spectral::{SpectralState, TailTerm};

/// Distance kept from an open horizon when canonicalising, in time units.
pub const CANON_GAP: f64 = 1e-12;

/// Offsets closer than this (relative) are treated as the same instant.
const TIME_SNAP: f64 = 1e-13;

/// Default tolerance for [`ExtendedState::equals`].
pub const DEFAULT_EQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    offset: f64,
    rep: SpectralState,
}

fn same_instant(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_SNAP * 1f64.max(a.abs()).max(b.abs())
}

/// Pins the slowest tail terms at exactly [`CANON_GAP`]. Different routes to
/// the same class leave them a few ulps of the original damping apart, which
/// at this scale would keep equal tails from merging.
fn snap_to_gap(rep: SpectralState) -> SpectralState {
    let tail = rep.tail().map_terms(|t| {
        let mut t = *t;
        if (t.damping - CANON_GAP).abs() <= 0.5 * CANON_GAP {
            t.damping = CANON_GAP;
        }
        t
    });
    let (spectrum, coeffs) = (rep.spectrum().clone(), rep.coeffs().to_vec());
    SpectralState::new(spectrum, coeffs, tail).expect("snapped tail stays damped")
}

impl ExtendedState {
    pub fn new(offset: f64, rep: SpectralState) -> Result<Self> {
        if !(offset.is_finite() && offset >= 0.0) {
            return Err(invalid(format!("offset must be finite and >= 0, got {offset}")));
        }
        Ok(ExtendedState { offset, rep })
    }

    /// Embeds `x ∈ H` as the class with offset zero.
    pub fn lift(state: SpectralState) -> Self {
        ExtendedState {
            offset: 0.0,
            rep: state,
        }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn rep(&self) -> &SpectralState {
        &self.rep
    }

    pub fn into_parts(self) -> (f64, SpectralState) {
        (self.offset, self.rep)
    }

    /// `𝒯_s` for any real `s`.
    ///
    /// # Panics
    /// If `s` is not finite.
    pub fn group_evolve(&self, s: f64) -> ExtendedState {
        assert!(s.is_finite(), "group_evolve needs a finite time, got {s}");
        if s == 0.0 {
            return self.clone();
        }
        let tau = self.offset;
        if s >= tau || same_instant(s, tau) {
            let dt = if s > tau { s - tau } else { 0.0 };
            ExtendedState::lift(self.rep.shift_time(dt))
        } else if s >= 0.0 {
            ExtendedState {
                offset: tau - s,
                rep: self.rep.clone(),
            }
        } else {
            ExtendedState {
                offset: tau - s,
                rep: self.rep.clone(),
            }
            .canonicalize()
        }
    }

    /// Moves as much of the offset into the representative as its horizon
    /// allows. Open horizons are approached to within [`CANON_GAP`].
    pub fn canonicalize(&self) -> ExtendedState {
        let tau = self.offset;
        if tau == 0.0 {
            return self.clone();
        }
        let h = horizon(&self.rep);
        let near_open = !h.admits(tau) && h.is_open();
        let step = if h.admits(tau) {
            tau
        } else if near_open {
            if h.value() <= 2.0 * CANON_GAP {
                0.0
            } else {
                h.value() - CANON_GAP
            }
        } else {
            h.value()
        };
        if step == 0.0 {
            return self.clone();
        }
        let mut rep = self.rep.shift_time(-step);
        if near_open {
            rep = snap_to_gap(rep);
        }
        ExtendedState {
            offset: if step == tau { 0.0 } else { tau - step },
            rep,
        }
    }

    /// Representatives of both classes at the later of the two offsets.
    fn at_common_offset(&self, other: &ExtendedState) -> (f64, SpectralState, SpectralState) {
        let t = self.offset.max(other.offset);
        if same_instant(self.offset, other.offset) {
            return (t, self.rep.clone(), other.rep.clone());
        }
        (
            t,
            self.rep.shift_time(t - self.offset),
            other.rep.shift_time(t - other.offset),
        )
    }

    /// Class equality: the forward images at the common offset agree to
    /// `tol` relative to `max(‖·‖, 1)`.
    pub fn equals(&self, other: &ExtendedState, tol: f64) -> Result<bool> {
        if !self.rep.spectrum().compatible(other.rep.spectrum()) {
            return Err(invalid("states live on different spectra"));
        }
        let (_, a, b) = self.at_common_offset(other);
        let diff = a.sub(&b)?.log_norm_h();
        let scale = a.log_norm_h().max(b.log_norm_h()).max(0.0);
        Ok(diff < tol.ln() + scale)
    }

    /// `ln ‖·‖_{−t}`.
    pub fn log_norm_minus_t(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(invalid(format!("t must be finite and >= 0, got {t}")));
        }
        let c = self.canonicalize();
        if t < c.offset {
            return Err(Error::NotInEMinusT {
                t,
                offset: c.offset,
            });
        }
        Ok(c.rep.shift_time(t - c.offset).log_norm_h())
    }

    /// `‖·‖_{−t} = ‖T_t-image in H‖`, defined once `t` reaches the canonical offset.
    pub fn norm_minus_t(&self, t: f64) -> Result<f64> {
        Ok(self.log_norm_minus_t(t)?.exp())
    }

    /// The extended generator: multiplies the representative by `λₙ`.
    pub fn apply_generator(&self) -> Result<ExtendedState> {
        let rep = &self.rep;
        let coeffs = rep
            .coeffs()
            .iter()
            .zip(rep.spectrum().eigenvalues())
            .map(|(c, l)| -c.scale_exp((-l).ln()))
            .collect();
        // λₙ C n^-p e^{γλₙ} = (−π² C) n^-(p−2) e^{γλₙ}
        let pi2 = std::f64::consts::PI.powi(2);
        let tail = rep.tail().map_terms(|t| TailTerm {
            amp: -t.amp.scale_exp(pi2.ln()),
            power: t.power - 2.0,
            damping: t.damping,
        });
        tail.validate_h().map_err(|_| {
            Error::NotInDomain(format!(
                "Σ λn² an² diverges for tail {}",
                rep.tail().describe()
            ))
        })?;
        Ok(ExtendedState {
            offset: self.offset,
            rep: SpectralState::new(rep.spectrum().clone(), coeffs, tail)?,
        })
    }

    pub fn add(&self, other: &ExtendedState) -> Result<ExtendedState> {
        let (t, a, b) = self.at_common_offset(other);
        Ok(ExtendedState {
            offset: t,
            rep: a.add(&b)?,
        }
        .canonicalize())
    }

    pub fn scale(&self, alpha: f64) -> ExtendedState {
        ExtendedState {
            offset: self.offset,
            rep: self.rep.scale(alpha),
        }
    }

    pub fn sub(&self, other: &ExtendedState) -> Result<ExtendedState> {
        self.add(&other.scale(-1.0))
    }
}
