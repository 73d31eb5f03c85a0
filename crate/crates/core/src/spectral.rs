//! Spectral states of a diagonal generator and the forward semigroup.
//!
//! A state is a finite list of modal coefficients `a₁ … a_N` plus an analytic
//! tail law for `n > N`. Tails are sums of terms `C·n^(-p)·exp(γλₙ)`; this
//! family is closed under evolution (`γ → γ + t`), backward evolution
//! (`γ → γ − t`), the generator (`p → p − 2`) and linear combination, so none
//! of those operations ever has to approximate the tail.

use std::borrow::Cow;
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::logamp::{log_sum_exp, LogAmplitude, SignedLogSum};
use crate::series::log_power_gauss_sum;

/// `λₙ = −n²π²`, the `n`-th Dirichlet eigenvalue on (0, 1) (1-based).
pub fn heat_eigenvalue(n: u64) -> f64 {
    -((n * n) as f64) * (PI * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Heat,
    Custom,
}

/// Eigenvalues `λ₁ > λ₂ > … > λ_N`, all strictly negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    kind: SpectrumKind,
}

/// Heat spectrum `λₙ = −n²π²`, `n = 1..=num_modes`.
pub fn make_heat_spectrum(num_modes: usize) -> Result<Spectrum> {
    if num_modes == 0 {
        return Err(invalid("a heat spectrum needs at least one mode"));
    }
    Ok(Spectrum::heat(num_modes))
}

impl Spectrum {
    /// Heat spectrum truncated at `num_modes` (zero is allowed for pure-tail states).
    pub fn heat(num_modes: usize) -> Self {
        Spectrum {
            eigenvalues: (1..=num_modes as u64).map(heat_eigenvalue).collect(),
            kind: SpectrumKind::Heat,
        }
    }

    pub fn custom(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(invalid("custom spectrum is empty"));
        }
        if eigenvalues.iter().any(|l| !(l.is_finite() && *l < 0.0)) {
            return Err(invalid("eigenvalues must be finite and strictly negative"));
        }
        if eigenvalues.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("eigenvalues must be strictly decreasing"));
        }
        Ok(Spectrum {
            eigenvalues,
            kind: SpectrumKind::Custom,
        })
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `λₙ` for 1-based `n`; heat spectra answer beyond their truncation.
    pub fn eigenvalue(&self, n: usize) -> Option<f64> {
        match self.kind {
            SpectrumKind::Heat if n >= 1 => Some(heat_eigenvalue(n as u64)),
            _ => self.eigenvalues.get(n.checked_sub(1)?).copied(),
        }
    }

    /// Same operator: heat spectra of any truncation, or identical custom lists.
    pub fn compatible(&self, other: &Spectrum) -> bool {
        match (self.kind, other.kind) {
            (SpectrumKind::Heat, SpectrumKind::Heat) => true,
            (SpectrumKind::Custom, SpectrumKind::Custom) => self.eigenvalues == other.eigenvalues,
            _ => false,
        }
    }
}

/// One tail term `aₙ = amp · n^(-power) · exp(damping · λₙ)` for `n > N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailTerm {
    pub amp: LogAmplitude,
    pub power: f64,
    pub damping: f64,
}

impl TailTerm {
    pub fn at(&self, n: u64) -> LogAmplitude {
        self.amp
            .scale_exp(-self.power * (n as f64).ln() + self.damping * heat_eigenvalue(n))
    }

    fn same_law(&self, other: &TailTerm) -> bool {
        close(self.power, other.power) && close(self.damping, other.damping)
    }

    /// Square-summable on its own with the given extra damping.
    fn summable_with(&self, extra: f64) -> bool {
        let g = self.damping + extra;
        g > 0.0 || (g == 0.0 && self.power > 0.5)
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Coefficient law beyond the truncation: a sum of [`TailTerm`]s.
///
/// The named constructors cover the usual cases: `zero`, `exp_decay(γ, C)`
/// meaning `C·exp(γλₙ)`, and `power_decay(p, C)` meaning `C·n^(-p)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TailModel {
    terms: Vec<TailTerm>,
}

impl TailModel {
    pub fn zero() -> Self {
        TailModel { terms: Vec::new() }
    }

    pub fn exp_decay(gamma: f64, c: f64) -> Self {
        Self::damped_power(0.0, gamma, c)
    }

    pub fn power_decay(p: f64, c: f64) -> Self {
        Self::damped_power(p, 0.0, c)
    }

    /// `C · n^(-p) · exp(γλₙ)`.
    pub fn damped_power(p: f64, gamma: f64, c: f64) -> Self {
        Self::from_terms(vec![TailTerm {
            amp: LogAmplitude::from_f64(c),
            power: p,
            damping: gamma,
        }])
    }

    /// Merges like terms and drops zero amplitudes.
    pub fn from_terms(terms: Vec<TailTerm>) -> Self {
        let mut merged: Vec<TailTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.iter_mut().find(|m| m.same_law(&t)) {
                Some(m) => m.amp = m.amp.add(t.amp),
                None => merged.push(t),
            }
        }
        merged.retain(|t| !t.amp.is_zero());
        merged.sort_by(|a, b| {
            a.damping
                .total_cmp(&b.damping)
                .then(a.power.total_cmp(&b.power))
        });
        TailModel { terms: merged }
    }

    pub fn terms(&self) -> &[TailTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Checks that the law defines an element of H.
    pub fn validate_h(&self) -> Result<()> {
        for t in &self.terms {
            if !(t.amp.is_finite() && t.power.is_finite() && t.damping.is_finite()) {
                return Err(invalid("tail parameters must be finite"));
            }
            if t.damping < 0.0 {
                return Err(invalid(format!(
                    "tail damping {} < 0 is not square-summable",
                    t.damping
                )));
            }
            if !t.summable_with(0.0) {
                return Err(invalid(format!(
                    "power-law tail needs p > 1/2 to be square-summable, got {}",
                    t.power
                )));
            }
        }
        Ok(())
    }

    /// Coefficient at mode `n` (only meaningful for `n > N`).
    pub fn at(&self, n: u64) -> LogAmplitude {
        let mut acc = SignedLogSum::new();
        for t in &self.terms {
            acc.push(t.at(n));
        }
        acc.total()
    }

    pub(crate) fn shift_damping(&self, dt: f64) -> Self {
        TailModel {
            terms: self
                .terms
                .iter()
                .map(|t| TailTerm {
                    damping: t.damping + dt,
                    ..*t
                })
                .collect(),
        }
    }

    pub(crate) fn map_terms(&self, f: impl Fn(&TailTerm) -> TailTerm) -> Self {
        Self::from_terms(self.terms.iter().map(f).collect())
    }

    pub fn scale(&self, alpha: f64) -> Self {
        let a = LogAmplitude::from_f64(alpha);
        self.map_terms(|t| TailTerm { amp: t.amp * a, ..*t })
    }

    pub fn add(&self, other: &TailModel) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_terms(terms)
    }

    /// `ln Σ_{n>last} xₙ·yₙ` as a signed amplitude, where `x`, `y` are the two tails.
    pub fn cross_beyond(&self, other: &TailModel, last: usize) -> LogAmplitude {
        let mut acc = SignedLogSum::new();
        for a in &self.terms {
            for b in &other.terms {
                let s = a.power + b.power;
                let c = (a.damping + b.damping) * PI * PI;
                let log_sum = log_power_gauss_sum(last as u64 + 1, s, c);
                acc.push((a.amp * b.amp).scale_exp(log_sum));
            }
        }
        acc.total()
    }

    /// `ln Σ_{n>last} aₙ²` (`-inf` for a zero tail).
    pub fn log_norm_sq_beyond(&self, last: usize) -> f64 {
        let v = self.cross_beyond(self, last);
        if v.sign() > 0 {
            v.log_mag()
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn describe(&self) -> String {
        if self.terms.is_empty() {
            return "zero tail".into();
        }
        self.terms
            .iter()
            .map(|t| {
                format!(
                    "{:+.6e}·n^-{}·exp({}·λn)",
                    t.amp.to_f64(),
                    t.power,
                    t.damping
                )
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// An element of H: modal coefficients over a spectrum plus a tail law.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    spectrum: Spectrum,
    coeffs: Vec<LogAmplitude>,
    tail: TailModel,
}

impl SpectralState {
    pub fn new(spectrum: Spectrum, coeffs: Vec<LogAmplitude>, tail: TailModel) -> Result<Self> {
        if coeffs.len() != spectrum.len() {
            return Err(invalid(format!(
                "{} coefficients for a {}-mode spectrum",
                coeffs.len(),
                spectrum.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        if spectrum.kind() == SpectrumKind::Custom && !tail.is_zero() {
            return Err(invalid("custom spectra are finite-dimensional and take no tail"));
        }
        tail.validate_h()?;
        Ok(SpectralState {
            spectrum,
            coeffs,
            tail,
        })
    }

    pub fn from_linear(spectrum: Spectrum, coeffs: &[f64], tail: TailModel) -> Result<Self> {
        let c = coeffs.iter().map(|&x| LogAmplitude::from_f64(x)).collect();
        Self::new(spectrum, c, tail)
    }

    pub fn zero(spectrum: Spectrum) -> Self {
        let n = spectrum.len();
        SpectralState {
            spectrum,
            coeffs: vec![LogAmplitude::ZERO; n],
            tail: TailModel::zero(),
        }
    }

    /// Basis vector `e_l` (1-based).
    pub fn basis(spectrum: Spectrum, l: usize) -> Result<Self> {
        if l == 0 || l > spectrum.len() {
            return Err(invalid(format!("basis index {l} outside 1..={}", spectrum.len())));
        }
        let mut s = Self::zero(spectrum);
        s.coeffs[l - 1] = LogAmplitude::ONE;
        Ok(s)
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

    pub fn num_modes(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of mode `n` (1-based), read from the tail beyond `N`.
    pub fn coeff(&self, n: usize) -> LogAmplitude {
        match n {
            0 => LogAmplitude::ZERO,
            n if n <= self.coeffs.len() => self.coeffs[n - 1],
            n => self.tail.at(n as u64),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.tail.is_zero() && self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `ln ‖x‖_H`; `-inf` for the zero state.
    pub fn log_norm_h(&self) -> f64 {
        let mut logs: Vec<f64> = self
            .coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| 2.0 * c.log_mag())
            .collect();
        logs.push(self.tail.log_norm_sq_beyond(self.num_modes()));
        0.5 * log_sum_exp(&logs)
    }

    pub fn norm_h(&self) -> f64 {
        self.log_norm_h().exp()
    }

    /// `ln` of the H-norm of the part beyond the explicit modes.
    pub fn log_tail_norm(&self) -> f64 {
        0.5 * self.tail.log_norm_sq_beyond(self.num_modes())
    }

    pub fn tail_norm(&self) -> f64 {
        self.log_tail_norm().exp()
    }

    /// Forward semigroup `T_t`, `t ≥ 0`.
    pub fn evolve(&self, t: f64) -> Result<SpectralState> {
        if !t.is_finite() || t < 0.0 {
            return Err(invalid(format!(
                "evolve needs a finite t >= 0, got {t}; use backward_evolve for negative time"
            )));
        }
        Ok(self.shift_time(t))
    }

    /// `exp(λₙ·t)` on every mode for any real `t`; callers check the horizon.
    pub(crate) fn shift_time(&self, t: f64) -> SpectralState {
        if t == 0.0 {
            return self.clone();
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.spectrum.eigenvalues())
            .map(|(c, l)| c.scale_exp(l * t))
            .collect();
        SpectralState {
            spectrum: self.spectrum.clone(),
            coeffs,
            tail: self.tail.shift_damping(t),
        }
    }

    pub fn inner_product(&self, other: &SpectralState) -> Result<f64> {
        Ok(self.inner_product_log(other)?.to_f64())
    }

    /// Inner product as a signed log amplitude.
    pub fn inner_product_log(&self, other: &SpectralState) -> Result<LogAmplitude> {
        let (a, b) = align(self, other)?;
        let mut acc = SignedLogSum::new();
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            acc.push(*x * *y);
        }
        acc.push(a.tail.cross_beyond(&b.tail, a.num_modes()));
        Ok(acc.total())
    }

    pub fn scale(&self, alpha: f64) -> SpectralState {
        let a = LogAmplitude::from_f64(alpha);
        SpectralState {
            spectrum: self.spectrum.clone(),
            coeffs: self.coeffs.iter().map(|c| *c * a).collect(),
            tail: self.tail.scale(alpha),
        }
    }

    pub fn add(&self, other: &SpectralState) -> Result<SpectralState> {
        let (a, b) = align(self, other)?;
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x.add(*y)).collect();
        Ok(SpectralState {
            spectrum: a.spectrum.clone(),
            coeffs,
            tail: a.tail.add(&b.tail),
        })
    }

    pub fn sub(&self, other: &SpectralState) -> Result<SpectralState> {
        self.add(&other.scale(-1.0))
    }

    /// `‖x − y‖_H`, aligning heat truncations first.
    pub fn distance(&self, other: &SpectralState) -> Result<f64> {
        Ok(self.sub(other)?.norm_h())
    }

    /// Materialises tail modes `N+1..=num_modes` as explicit coefficients.
    /// The tail law is indexed by absolute mode number, so it is unchanged.
    pub fn extend_to(&self, num_modes: usize) -> Result<SpectralState> {
        if num_modes <= self.num_modes() {
            return Ok(self.clone());
        }
        if self.spectrum.kind() != SpectrumKind::Heat {
            return Err(invalid("only heat spectra can be extended"));
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.extend((self.num_modes() + 1..=num_modes).map(|n| self.tail.at(n as u64)));
        Ok(SpectralState {
            spectrum: Spectrum::heat(num_modes),
            coeffs,
            tail: self.tail.clone(),
        })
    }

    /// The explicit modes only (tail dropped).
    pub fn truncated(&self) -> SpectralState {
        SpectralState {
            spectrum: self.spectrum.clone(),
            coeffs: self.coeffs.clone(),
            tail: TailModel::zero(),
        }
    }
}

/// Brings two states onto one truncation. Heat states of different length are
/// padded from their tails; anything else must share the exact spectrum.
pub fn align<'a>(
    a: &'a SpectralState,
    b: &'a SpectralState,
) -> Result<(Cow<'a, SpectralState>, Cow<'a, SpectralState>)> {
    if !a.spectrum.compatible(&b.spectrum) {
        return Err(invalid("states live on different spectra"));
    }
    let n = a.num_modes().max(b.num_modes());
    let pad = |s: &'a SpectralState| -> Result<Cow<'a, SpectralState>> {
        if s.num_modes() == n {
            Ok(Cow::Borrowed(s))
        } else {
            Ok(Cow::Owned(s.extend_to(n)?))
        }
    };
    Ok((pad(a)?, pad(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heat(coeffs: &[f64], tail: TailModel) -> SpectralState {
        SpectralState::from_linear(Spectrum::heat(coeffs.len()), coeffs, tail).unwrap()
    }

    #[test]
    fn heat_spectrum_values() {
        let s = make_heat_spectrum(3).unwrap();
        let pi2 = PI * PI;
        assert_eq!(s.eigenvalues(), &[-pi2, -4.0 * pi2, -9.0 * pi2]);
        assert!((s.eigenvalues()[0] + 9.869_604_4).abs() < 1e-7);
        assert!(s.eigenvalues()[0] > s.eigenvalues()[1]);
        assert!(make_heat_spectrum(0).is_err());
    }

    #[test]
    fn custom_spectrum_validation() {
        assert!(Spectrum::custom(vec![-1.0, -2.0]).is_ok());
        assert!(Spectrum::custom(vec![-2.0, -1.0]).is_err());
        assert!(Spectrum::custom(vec![-1.0, 0.0]).is_err());
        let s = Spectrum::custom(vec![-1.0]).unwrap();
        assert!(SpectralState::from_linear(s, &[1.0], TailModel::exp_decay(0.1, 1.0)).is_err());
    }

    #[test]
    fn pythagorean_norms() {
        assert!((heat(&[3.0, 4.0], TailModel::zero()).norm_h() - 5.0).abs() < 1e-15);
        assert!((heat(&[1.0], TailModel::zero()).norm_h() - 1.0).abs() < 1e-15);
        assert_eq!(SpectralState::zero(Spectrum::heat(4)).norm_h(), 0.0);
    }

    #[test]
    fn pure_exp_tail_norm_matches_brute_force() {
        let s = heat(&[], TailModel::exp_decay(0.3, 1.0));
        let brute: f64 = (1..50)
            .map(|n| (-0.6 * (n as f64 * PI).powi(2)).exp())
            .sum::<f64>()
            .sqrt();
        assert!((s.norm_h() - brute).abs() <= 1e-12 * brute);
        assert!((s.tail_norm() - s.norm_h()).abs() <= 1e-15 * brute);
    }

    #[test]
    fn power_tail_norm_is_zeta_tail() {
        let s = heat(&[1.0], TailModel::power_decay(1.0, 1.0));
        let want = (PI * PI / 6.0 - 1.0).sqrt();
        assert!((s.tail_norm() - want).abs() < 1e-14);
        assert!((s.tail_norm() - 0.8031).abs() < 1e-4);
        assert_eq!(heat(&[1.0], TailModel::zero()).tail_norm(), 0.0);
    }

    #[test]
    fn invalid_tails_rejected() {
        assert!(heat_try(&[1.0], TailModel::power_decay(0.5, 1.0)).is_err());
        assert!(heat_try(&[1.0], TailModel::exp_decay(-0.1, 1.0)).is_err());
        assert!(heat_try(&[1.0], TailModel::exp_decay(0.0, 1.0)).is_err());
        assert!(heat_try(&[1.0], TailModel::exp_decay(0.0, 0.0)).is_ok());
    }

    fn heat_try(coeffs: &[f64], tail: TailModel) -> Result<SpectralState> {
        SpectralState::from_linear(Spectrum::heat(coeffs.len()), coeffs, tail)
    }

    #[test]
    fn evolve_single_mode() {
        let s = heat(&[1.0], TailModel::zero()).evolve(0.5).unwrap();
        let want = (-PI * PI / 2.0).exp();
        assert!((s.coeffs()[0].to_f64() - want).abs() <= 1e-15 * want);
        assert!((want - 7.192e-3).abs() < 1e-6);
    }

    #[test]
    fn evolve_zero_is_identity_and_negative_rejected() {
        let s = heat(&[0.3, -2.0], TailModel::power_decay(1.5, 0.2));
        assert_eq!(s.evolve(0.0).unwrap(), s);
        assert!(s.evolve(-0.1).is_err());
    }

    #[test]
    fn evolve_matches_matrix_exponential_oracle() {
        // Dense exp(tA) for the 2x2 diagonal generator via a truncated Taylor series
        // with scaling and squaring; independent of the log-domain path.
        let a = [[-PI * PI, 0.0], [0.0, -4.0 * PI * PI]];
        let m = dense_expm(a, 1.0);
        let x = [1.0, 1.0];
        let want = [
            m[0][0] * x[0] + m[0][1] * x[1],
            m[1][0] * x[0] + m[1][1] * x[1],
        ];
        let got = heat(&x, TailModel::zero()).evolve(1.0).unwrap();
        for k in 0..2 {
            let g = got.coeffs()[k].to_f64();
            assert!((g - want[k]).abs() <= 1e-10 * want[k], "{g} vs {}", want[k]);
        }
        assert!((want[0] - (-PI * PI).exp()).abs() < 1e-12 * want[0]);
    }

    fn dense_expm(a: [[f64; 2]; 2], t: f64) -> [[f64; 2]; 2] {
        let squarings = 10;
        let scale = t / f64::from(1 << squarings);
        let b = [[a[0][0] * scale, a[0][1] * scale], [a[1][0] * scale, a[1][1] * scale]];
        let mul = |x: [[f64; 2]; 2], y: [[f64; 2]; 2]| {
            let mut r = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
                }
            }
            r
        };
        let mut result = [[1.0, 0.0], [0.0, 1.0]];
        let mut term = [[1.0, 0.0], [0.0, 1.0]];
        for k in 1..30 {
            term = mul(term, b);
            for row in term.iter_mut() {
                for v in row.iter_mut() {
                    *v /= k as f64;
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    result[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..squarings {
            result = mul(result, result);
        }
        result
    }

    #[test]
    fn inner_products() {
        let sp = Spectrum::heat(2);
        let e1 = SpectralState::basis(sp.clone(), 1).unwrap();
        let e2 = SpectralState::basis(sp.clone(), 2).unwrap();
        assert_eq!(e1.inner_product(&e1).unwrap(), 1.0);
        assert_eq!(e1.inner_product(&e2).unwrap(), 0.0);
        let x = heat(&[3.0, 4.0], TailModel::zero());
        let y = heat(&[4.0, -3.0], TailModel::zero());
        assert_eq!(x.inner_product(&y).unwrap(), 0.0);
        let c = SpectralState::from_linear(Spectrum::custom(vec![-1.0, -3.0]).unwrap(), &[1.0, 1.0], TailModel::zero()).unwrap();
        assert!(x.inner_product(&c).is_err());
    }

    #[test]
    fn tail_inner_product_is_consistent_with_norm() {
        let x = heat(&[1.0, 0.5], TailModel::exp_decay(0.2, 0.7).add(&TailModel::power_decay(2.0, -0.3)));
        let ip = x.inner_product(&x).unwrap();
        let n = x.norm_h();
        assert!((ip - n * n).abs() <= 1e-13 * ip);
    }

    #[test]
    fn extension_preserves_norm_and_alignment_works() {
        let x = heat(&[1.0], TailModel::power_decay(1.0, 1.0));
        let y = x.extend_to(5).unwrap();
        assert_eq!(y.num_modes(), 5);
        assert!((y.coeffs()[3].to_f64() - 0.25).abs() < 1e-15);
        assert!((x.norm_h() - y.norm_h()).abs() < 1e-14);
        assert!(x.distance(&y).unwrap() < 1e-14);
    }

    #[test]
    fn sub_cancels_exactly() {
        let x = heat(&[1.0, -2.0], TailModel::exp_decay(0.4, 3.0));
        let d = x.sub(&x).unwrap();
        assert!(d.is_zero());
        assert_eq!(d.norm_h(), 0.0);
    }
}
