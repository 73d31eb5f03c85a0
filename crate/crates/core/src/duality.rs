//! The pairing between D and E, and the identification of coefficient
//! functionals on D with classes in E.

use crate::error::{invalid, Error, Result};
use crate::extended::{ExtendedState, CANON_GAP};
use crate::logamp::{LogAmplitude, SignedLogSum};
use crate::reversibility::{backward_evolve, horizon};
use crate::spectral::{SpectralState, Spectrum, SpectrumKind, TailModel};

/// A linear functional on D given by its values `bₙ = F(eₙ)`.
///
/// Unlike a state, the tail law may grow (negative damping): `F(x)` only has
/// to make sense for `x ∈ D`, whose coefficients decay faster than any
/// exponential in `λₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    spectrum: Spectrum,
    coeffs: Vec<LogAmplitude>,
    tail: TailModel,
}

impl Functional {
    pub fn new(spectrum: Spectrum, coeffs: Vec<LogAmplitude>, tail: TailModel) -> Result<Self> {
        if coeffs.len() != spectrum.len() {
            return Err(invalid(format!(
                "{} coefficients for a {}-mode spectrum",
                coeffs.len(),
                spectrum.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("functional coefficients must be finite"));
        }
        if spectrum.kind() == SpectrumKind::Custom && !tail.is_zero() {
            return Err(invalid("custom spectra are finite-dimensional and take no tail"));
        }
        if tail
            .terms()
            .iter()
            .any(|t| !(t.amp.is_finite() && t.power.is_finite()))
        {
            return Err(invalid("functional tail parameters must be finite"));
        }
        if let Some(t) = tail.terms().iter().find(|t| !t.damping.is_finite()) {
            return Err(Error::Unrepresentable(format!(
                "tail damping {} admits no square-summable rescaling",
                t.damping
            )));
        }
        Ok(Functional {
            spectrum,
            coeffs,
            tail,
        })
    }

    pub fn from_linear(spectrum: Spectrum, coeffs: &[f64], tail: TailModel) -> Result<Self> {
        let c = coeffs.iter().map(|&x| LogAmplitude::from_f64(x)).collect();
        Self::new(spectrum, c, tail)
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn coeffs(&self) -> &[LogAmplitude] {
        &self.coeffs
    }

    pub fn tail(&self) -> &TailModel {
        &self.tail
    }

    /// `bₙ` for any mode, explicit or from the tail law.
    pub fn coeff(&self, n: usize) -> LogAmplitude {
        match n {
            0 => LogAmplitude::ZERO,
            n if n <= self.coeffs.len() => self.coeffs[n - 1],
            n => self.tail.at(n as u64),
        }
    }

    /// `sup{s : (bₙ e^{−λₙ s}) ∈ l²}` together with whether it is attained.
    pub fn representation_time(&self) -> (f64, bool) {
        let terms = self.tail.terms();
        let Some(gamma) = terms.iter().map(|t| t.damping).reduce(f64::min) else {
            return (f64::INFINITY, true);
        };
        let slowest = terms
            .iter()
            .filter(|t| t.damping == gamma)
            .map(|t| t.power)
            .fold(f64::INFINITY, f64::min);
        (gamma, slowest > 0.5)
    }

    /// `F(x) = Σ aₙ bₙ` for `x ∈ D`.
    pub fn apply_log(&self, x: &SpectralState) -> Result<LogAmplitude> {
        require_d(x)?;
        if !self.spectrum.compatible(x.spectrum()) {
            return Err(invalid("functional and state live on different spectra"));
        }
        let mut acc = SignedLogSum::new();
        for (n, a) in x.coeffs().iter().enumerate() {
            acc.push(*a * self.coeff(n + 1));
        }
        Ok(acc.total())
    }

    pub fn apply(&self, x: &SpectralState) -> Result<f64> {
        Ok(self.apply_log(x)?.to_f64())
    }
}

fn require_d(x: &SpectralState) -> Result<()> {
    let h = horizon(x);
    if h.is_infinite() {
        Ok(())
    } else {
        Err(Error::NotInD { horizon: h.value() })
    }
}

/// `⟨x, z⟩ = (T_{−t} x, y)` for `z = T_{−t} y`, as a signed log amplitude.
pub fn pairing_log(x: &SpectralState, z: &ExtendedState) -> Result<LogAmplitude> {
    require_d(x)?;
    let z = z.canonicalize();
    let back = backward_evolve(x, z.offset())?.state;
    back.inner_product_log(z.rep())
}

pub fn pairing(x: &SpectralState, z: &ExtendedState) -> Result<f64> {
    Ok(pairing_log(x, z)?.to_f64())
}

/// The class `z ∈ E` with `⟨eₙ, z⟩ = bₙ` for every mode.
pub fn functional_to_e(f: &Functional) -> Result<ExtendedState> {
    let (t, attained) = f.representation_time();
    let t = if attained { t } else { t - CANON_GAP };
    if t == f64::INFINITY || t >= 0.0 {
        let state = SpectralState::new(f.spectrum.clone(), f.coeffs.clone(), f.tail.clone())?;
        return Ok(ExtendedState::lift(state));
    }
    // βₙ = bₙ e^{−λₙ t}, paired at offset |t|
    let coeffs = f
        .coeffs
        .iter()
        .zip(f.spectrum.eigenvalues())
        .map(|(b, l)| b.scale_exp(-l * t))
        .collect();
    let rep = SpectralState::new(f.spectrum.clone(), coeffs, f.tail.shift_damping(-t))
        .map_err(|e| Error::Unrepresentable(e.to_string()))?;
    ExtendedState::new(-t, rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn e(n_modes: usize, l: usize) -> SpectralState {
        SpectralState::basis(Spectrum::heat(n_modes), l).unwrap()
    }

    #[test]
    fn basis_pairings() {
        assert_eq!(pairing(&e(2, 1), &ExtendedState::lift(e(2, 1))).unwrap(), 1.0);
        assert_eq!(pairing(&e(2, 1), &ExtendedState::lift(e(2, 2))).unwrap(), 0.0);
    }

    #[test]
    fn offset_bookkeeping() {
        // x = T_1 e1, z = T_{-0.5} e1: ⟨x, z⟩ = (T_{-0.5} T_1 e1, e1) = e^{-0.5π²}
        let x = e(1, 1).evolve(1.0).unwrap();
        let z = ExtendedState::new(0.5, e(1, 1)).unwrap();
        let got = pairing_log(&x, &z).unwrap();
        assert_eq!(got.sign(), 1);
        assert!((got.log_mag() + 0.5 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn pairing_needs_d() {
        let x = SpectralState::from_linear(Spectrum::heat(1), &[1.0], TailModel::exp_decay(0.3, 1.0)).unwrap();
        let z = ExtendedState::lift(e(1, 1));
        assert!(matches!(pairing(&x, &z), Err(Error::NotInD { .. })));
    }

    #[test]
    fn decaying_functional_lands_in_h() {
        let f = Functional::new(Spectrum::heat(0), vec![], TailModel::exp_decay(0.5, 1.0)).unwrap();
        assert_eq!(f.representation_time(), (0.5, false));
        let z = functional_to_e(&f).unwrap();
        assert_eq!(z.offset(), 0.0);
        for l in 1..=6 {
            let p = pairing_log(&e(l, l), &z).unwrap();
            assert!((p.log_mag() - f.coeff(l).log_mag()).abs() < 1e-9 * p.log_mag().abs().max(1.0));
        }
    }

    #[test]
    fn growing_functional_needs_an_offset() {
        let f = Functional::new(Spectrum::heat(0), vec![], TailModel::exp_decay(-0.1, 1.0)).unwrap();
        let z = functional_to_e(&f).unwrap();
        assert!((z.offset() - 0.1).abs() < 1e-11);
        for l in 1..=16 {
            let b = 0.1 * (l * l) as f64 * PI * PI;
            let p = pairing_log(&e(l, l), &z).unwrap();
            assert_eq!(p.sign(), 1);
            assert!((p.log_mag() - b).abs() <= 1e-9 * b, "l = {l}");
        }
    }

    #[test]
    fn explicit_coefficients_and_zero() {
        let f = Functional::from_linear(Spectrum::heat(3), &[2.0, -1.0, 0.5], TailModel::zero()).unwrap();
        let z = functional_to_e(&f).unwrap();
        assert_eq!(z.offset(), 0.0);
        assert_eq!(pairing(&e(3, 2), &z).unwrap(), -1.0);
        let zero = Functional::from_linear(Spectrum::heat(2), &[0.0, 0.0], TailModel::zero()).unwrap();
        assert!(functional_to_e(&zero).unwrap().rep().is_zero());
    }

    #[test]
    fn functional_application_agrees_with_pairing() {
        let f = Functional::from_linear(Spectrum::heat(2), &[1.5, -0.5], TailModel::exp_decay(-0.2, 3.0)).unwrap();
        let z = functional_to_e(&f).unwrap();
        let x = SpectralState::from_linear(Spectrum::heat(5), &[0.3, 0.1, -0.2, 1e-3, 1e-6], TailModel::zero()).unwrap();
        let direct = f.apply(&x).unwrap();
        let paired = pairing(&x, &z).unwrap();
        assert!((direct - paired).abs() <= 1e-9 * direct.abs());
    }

    #[test]
    fn non_finite_damping_is_unrepresentable() {
        let tail = TailModel::exp_decay(f64::NEG_INFINITY, 1.0);
        assert!(matches!(
            Functional::new(Spectrum::heat(0), vec![], tail),
            Err(Error::Unrepresentable(_))
        ));
    }
}
