//! Affine evolution `S_t x = T_t x + ∫₀ᵗ T_{t−s} f(s) ds` with mode-wise forcing.
//!
//! Constant and exponential forcing integrate in closed form. Tabulated and
//! callable forcing go through product-integration Simpson: the kernel
//! `e^{λ(t−s)}` is integrated exactly against the quadratic interpolant of
//! `f` on each panel, so stiff modes (large `|λ|`) cost nothing extra.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::logamp::LogAmplitude;
use crate::reversibility::backward_evolve;
use crate::spectral::{SpectralState, SpectrumKind};

/// Time profile of one mode's forcing.
#[derive(Clone)]
pub enum ForcingKind {
    Const { c: f64 },
    /// `c·exp(μ s)`.
    Exp { c: f64, mu: f64 },
    /// Linear interpolation through `(times[i], values[i])`.
    Table { times: Vec<f64>, values: Vec<f64> },
    /// Arbitrary callable, sampled at the quadrature nodes.
    Sampled(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ForcingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForcingKind::Const { c } => write!(f, "Const {{ c: {c} }}"),
            ForcingKind::Exp { c, mu } => write!(f, "Exp {{ c: {c}, mu: {mu} }}"),
            ForcingKind::Table { times, values } => f
                .debug_struct("Table")
                .field("times", times)
                .field("values", values)
                .finish(),
            ForcingKind::Sampled(_) => write!(f, "Sampled(..)"),
        }
    }
}

impl ForcingKind {
    pub fn table(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(invalid("table forcing needs equally many (>= 1) times and values"));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("table forcing entries must be finite"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("table times must be strictly increasing"));
        }
        Ok(ForcingKind::Table { times, values })
    }

    pub fn sampled(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ForcingKind::Sampled(Arc::new(f))
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            ForcingKind::Const { c } => *c,
            ForcingKind::Exp { c, mu } => c * (mu * s).exp(),
            ForcingKind::Table { times, values } => interpolate(times, values, s),
            ForcingKind::Sampled(f) => f(s),
        }
    }

    fn has_closed_form(&self) -> bool {
        matches!(self, ForcingKind::Const { .. } | ForcingKind::Exp { .. })
    }

    /// `s ↦ f(s + shift)`.
    pub fn shifted(&self, shift: f64) -> ForcingKind {
        match self {
            ForcingKind::Const { c } => ForcingKind::Const { c: *c },
            ForcingKind::Exp { c, mu } => ForcingKind::Exp {
                c: c * (mu * shift).exp(),
                mu: *mu,
            },
            ForcingKind::Table { times, values } => ForcingKind::Table {
                times: times.iter().map(|t| t - shift).collect(),
                values: values.clone(),
            },
            ForcingKind::Sampled(f) => {
                let f = Arc::clone(f);
                ForcingKind::Sampled(Arc::new(move |s| f(s + shift)))
            }
        }
    }

    fn covers(&self, t: f64) -> Result<()> {
        match self {
            ForcingKind::Const { c } if !c.is_finite() => Err(invalid("constant forcing must be finite")),
            ForcingKind::Exp { c, mu } if !(c.is_finite() && mu.is_finite()) => {
                Err(invalid("exponential forcing parameters must be finite"))
            }
            ForcingKind::Table { times, .. } => {
                let (lo, hi) = (times[0], times[times.len() - 1]);
                // a little slack for interval endpoints produced by shifting
                let slack = 1e-12 * (1.0 + t.abs());
                if lo > slack || hi < t - slack {
                    Err(invalid(format!(
                        "table forcing covers [{lo}, {hi}] but [0, {t}] is required"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

fn interpolate(times: &[f64], values: &[f64], s: f64) -> f64 {
    let last = times.len() - 1;
    if s <= times[0] {
        return values[0];
    }
    if s >= times[last] {
        return values[last];
    }
    let i = times.partition_point(|&x| x <= s) - 1;
    let w = (s - times[i]) / (times[i + 1] - times[i]);
    values[i] + w * (values[i + 1] - values[i])
}

#[derive(Debug, Clone)]
pub struct ModeForcing {
    /// 1-based mode index.
    pub n: usize,
    pub kind: ForcingKind,
}

/// Forcing on finitely many modes; entries for the same mode add up.
#[derive(Debug, Clone, Default)]
pub struct Forcing {
    pub modes: Vec<ModeForcing>,
}

impl Forcing {
    pub fn zero() -> Self {
        Forcing::default()
    }

    pub fn single(n: usize, kind: ForcingKind) -> Self {
        Forcing {
            modes: vec![ModeForcing { n, kind }],
        }
    }

    pub fn with(mut self, n: usize, kind: ForcingKind) -> Self {
        self.modes.push(ModeForcing { n, kind });
        self
    }

    pub fn max_mode(&self) -> usize {
        self.modes.iter().map(|m| m.n).max().unwrap_or(0)
    }

    /// The forcing seen by a trajectory restarted at time `s`.
    pub fn shift_by(&self, s: f64) -> Forcing {
        Forcing {
            modes: self
                .modes
                .iter()
                .map(|m| ModeForcing {
                    n: m.n,
                    kind: m.kind.shifted(s),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Simpson weights integrated exactly against the exponential kernel.
    ExpFittedSimpson,
    /// Textbook composite Simpson on the full integrand.
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rule: QuadratureRule,
    /// Even, at least 2.
    pub steps: usize,
    /// When set, steps double until the error estimate drops below it.
    pub adaptive_tol: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rule: QuadratureRule::ExpFittedSimpson,
            steps: 64,
            adaptive_tol: None,
        }
    }
}

const MAX_ADAPTIVE_STEPS: usize = 1 << 20;

impl QuadratureConfig {
    pub fn with_steps(steps: usize) -> Self {
        QuadratureConfig {
            steps,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.steps < 2 || self.steps % 2 != 0 {
            return Err(invalid(format!("quadrature steps must be even and >= 2, got {}", self.steps)));
        }
        if let Some(tol) = self.adaptive_tol {
            if !(tol > 0.0) {
                return Err(invalid(format!("adaptive tolerance must be > 0, got {tol}")));
            }
        }
        Ok(())
    }
}

/// `∫₀ᵗ e^{λ(t−s)} f(s) ds` for one mode, together with an error estimate
/// (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeIntegral {
    pub value: f64,
    pub error_estimate: f64,
    pub steps: usize,
}

/// `expm1(d·t)/d`, continuous at `d = 0`.
fn expm1_ratio(d: f64, t: f64) -> f64 {
    if d == 0.0 {
        t
    } else {
        (d * t).exp_m1() / d
    }
}

fn closed_form(kind: &ForcingKind, lambda: f64, t: f64) -> f64 {
    match *kind {
        ForcingKind::Const { c } => c * expm1_ratio(lambda, t),
        ForcingKind::Exp { c, mu } => {
            let d = mu - lambda;
            if d > 0.0 {
                c * (mu * t).exp() * expm1_ratio(-d, t)
            } else {
                c * (lambda * t).exp() * expm1_ratio(d, t)
            }
        }
        _ => unreachable!("closed_form on a sampled forcing"),
    }
}

/// `∫₀^L u^k e^{−cu} du` for `k = 0, 1, 2`.
fn kernel_moments(c: f64, len: f64) -> [f64; 3] {
    let x = c * len;
    if x < 1.0 {
        // Σ_j (−x)^j/j! · L^{k+1}/(k+j+1)
        let mut m = [0.0; 3];
        let mut term = 1.0;
        for j in 0..40 {
            for (k, mk) in m.iter_mut().enumerate() {
                *mk += term / (k + j + 1) as f64;
            }
            term *= -x / (j + 1) as f64;
            if term.abs() < 1e-18 {
                break;
            }
        }
        [m[0] * len, m[1] * len * len, m[2] * len.powi(3)]
    } else {
        let e = (-x).exp();
        let m0 = -(-x).exp_m1() / c;
        let m1 = (m0 - len * e) / c;
        let m2 = (2.0 * m1 - len * len * e) / c;
        [m0, m1, m2]
    }
}

fn quadrature(kind: &ForcingKind, lambda: f64, t: f64, rule: QuadratureRule, steps: usize) -> f64 {
    let h = t / steps as f64;
    match rule {
        QuadratureRule::Simpson => {
            let g = |s: f64| (lambda * (t - s)).exp() * kind.eval(s);
            let mut acc = g(0.0) + g(t);
            for i in 1..steps {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * g(i as f64 * h);
            }
            acc * h / 3.0
        }
        QuadratureRule::ExpFittedSimpson => {
            let c = -lambda;
            let [m0, m1, m2] = kernel_moments(c, 2.0 * h);
            // Weights for nodes at u = 0, h, 2h, where u runs backward from
            // the panel's right end.
            let w_right = (m2 - 3.0 * h * m1 + 2.0 * h * h * m0) / (2.0 * h * h);
            let w_mid = (2.0 * h * m1 - m2) / (h * h);
            let w_left = (m2 - h * m1) / (2.0 * h * h);
            let mut acc = 0.0;
            for p in 0..steps / 2 {
                let s0 = 2.0 * p as f64 * h;
                let s2 = s0 + 2.0 * h;
                let damp = (lambda * (t - s2)).exp();
                acc += damp
                    * (w_right * kind.eval(s2) + w_mid * kind.eval(s0 + h) + w_left * kind.eval(s0));
            }
            acc
        }
    }
}

/// One mode's Duhamel integral.
pub fn mode_integral(kind: &ForcingKind, lambda: f64, t: f64, q: &QuadratureConfig) -> Result<ModeIntegral> {
    q.validate()?;
    if !t.is_finite() || t < 0.0 {
        return Err(invalid(format!("duhamel time must be finite and >= 0, got {t}")));
    }
    kind.covers(t)?;
    if t == 0.0 {
        return Ok(ModeIntegral {
            value: 0.0,
            error_estimate: 0.0,
            steps: 0,
        });
    }
    if kind.has_closed_form() {
        return Ok(ModeIntegral {
            value: closed_form(kind, lambda, t),
            error_estimate: 0.0,
            steps: 0,
        });
    }
    let mut steps = q.steps;
    loop {
        let fine = quadrature(kind, lambda, t, q.rule, steps);
        let coarse = if steps % 4 == 0 {
            quadrature(kind, lambda, t, q.rule, steps / 2)
        } else {
            quadrature(kind, lambda, t, q.rule, steps * 2)
        };
        let error_estimate = (fine - coarse).abs() / 15.0;
        let done = match q.adaptive_tol {
            Some(tol) => error_estimate <= tol || steps * 2 > MAX_ADAPTIVE_STEPS,
            None => true,
        };
        if done {
            return Ok(ModeIntegral {
                value: fine,
                error_estimate,
                steps,
            });
        }
        steps *= 2;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DuhamelResult {
    pub state: SpectralState,
    /// Euclidean combination of the per-mode quadrature estimates.
    pub error_estimate: f64,
}

/// Per-mode Duhamel integrals, aligned with `base`'s modes (extended if the
/// forcing reaches further).
fn integrals(base: &SpectralState, f: &Forcing, t: f64, q: &QuadratureConfig) -> Result<(SpectralState, Vec<f64>, f64)> {
    let needed = f.max_mode();
    if f.modes.iter().any(|m| m.n == 0) {
        return Err(invalid("forcing mode indices are 1-based"));
    }
    let base = if needed > base.num_modes() {
        if base.spectrum().kind() != SpectrumKind::Heat {
            return Err(invalid(format!(
                "forcing on mode {needed} but the custom spectrum has {} modes",
                base.num_modes()
            )));
        }
        base.extend_to(needed)?
    } else {
        base.clone()
    };
    let mut values = vec![0.0; base.num_modes()];
    let mut err_sq = 0.0;
    for m in &f.modes {
        let lambda = base
            .spectrum()
            .eigenvalue(m.n)
            .ok_or_else(|| invalid(format!("no eigenvalue for mode {}", m.n)))?;
        let r = mode_integral(&m.kind, lambda, t, q)?;
        values[m.n - 1] += r.value;
        err_sq += r.error_estimate * r.error_estimate;
    }
    Ok((base, values, err_sq.sqrt()))
}

fn translate(state: &SpectralState, values: &[f64], sign: f64) -> Result<SpectralState> {
    let coeffs = state
        .coeffs()
        .iter()
        .zip(values)
        .map(|(c, v)| c.add(LogAmplitude::from_f64(sign * v)))
        .collect();
    SpectralState::new(state.spectrum().clone(), coeffs, state.tail().clone())
}

/// `S_t x0`.
pub fn duhamel_evolve(x0: &SpectralState, f: &Forcing, t: f64, q: &QuadratureConfig) -> Result<DuhamelResult> {
    let forward = x0.evolve(t)?;
    let (forward, values, error_estimate) = integrals(&forward, f, t, q)?;
    Ok(DuhamelResult {
        state: translate(&forward, &values, 1.0)?,
        error_estimate,
    })
}

/// `T_{−t}(x − ∫₀ᵗ T_{t−s} f(s) ds)`, the unique `S_t`-preimage.
pub fn affine_backward(x: &SpectralState, f: &Forcing, t: f64, q: &QuadratureConfig) -> Result<SpectralState> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid(format!("backward time must be finite and >= 0, got {t}")));
    }
    let (x, values, _) = integrals(x, f, t, q)?;
    let homogeneous = translate(&x, &values, -1.0)?;
    Ok(backward_evolve(&homogeneous, t)?.state)
}

/// `‖S_t x − ∫₀ᵗ T_{t−s} f(s) ds‖`, which is `‖T_t x‖`.
pub fn affine_norm_minus_t(x: &SpectralState, f: &Forcing, t: f64, q: &QuadratureConfig) -> Result<f64> {
    let s = duhamel_evolve(x, f, t, q)?.state;
    let (s, values, _) = integrals(&s, f, t, q)?;
    Ok(translate(&s, &values, -1.0)?.norm_h())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Spectrum, TailModel};
    use std::f64::consts::PI;

    const L1: f64 = -PI * PI;

    fn heat(coeffs: &[f64]) -> SpectralState {
        SpectralState::from_linear(Spectrum::heat(coeffs.len()), coeffs, TailModel::zero()).unwrap()
    }

    fn exp_exact(mu: f64, lambda: f64, t: f64) -> f64 {
        ((mu * t).exp() - (lambda * t).exp()) / (mu - lambda)
    }

    #[test]
    fn closed_forms() {
        let q = QuadratureConfig::default();
        let c = mode_integral(&ForcingKind::Const { c: 1.0 }, L1, 1.0, &q).unwrap().value;
        let want = (1.0 - (-PI * PI).exp()) / (PI * PI);
        assert!((c - want).abs() < 1e-15 * want);
        assert!((c - 0.10131).abs() < 1e-5);
        let e = mode_integral(&ForcingKind::Exp { c: 1.0, mu: 1.0 }, L1, 0.5, &q).unwrap().value;
        assert!((e - exp_exact(1.0, L1, 0.5)).abs() < 1e-15);
        // resonant case μ = λ
        let r = mode_integral(&ForcingKind::Exp { c: 2.0, mu: L1 }, L1, 0.3, &q).unwrap().value;
        assert!((r - 2.0 * 0.3 * (L1 * 0.3).exp()).abs() < 1e-15);
        // large positive μ − λ stays finite
        let big = mode_integral(&ForcingKind::Exp { c: 1.0, mu: 1.0 }, -1e6, 2.0, &q).unwrap().value;
        assert!((big - 2f64.exp() / (1.0 + 1e6)).abs() < 1e-12);
    }

    #[test]
    fn fitted_simpson_is_exact_on_constants() {
        for steps in [2, 8, 64] {
            let q = QuadratureConfig::with_steps(steps);
            let v = mode_integral(&ForcingKind::sampled(|_| 1.0), L1, 1.0, &q).unwrap().value;
            let want = (1.0 - (-PI * PI).exp()) / (PI * PI);
            assert!((v - want).abs() < 1e-13 * want, "steps {steps}: {v}");
        }
    }

    #[test]
    fn plain_simpson_at_64_steps_is_coarse() {
        let q = QuadratureConfig {
            rule: QuadratureRule::Simpson,
            steps: 64,
            adaptive_tol: None,
        };
        let v = mode_integral(&ForcingKind::sampled(|_| 1.0), L1, 1.0, &q).unwrap().value;
        let want = (1.0 - (-PI * PI).exp()) / (PI * PI);
        let rel = (v - want).abs() / want;
        assert!(rel > 1e-7 && rel < 1e-5, "{rel}");
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = exp_exact(1.0, L1, 0.5);
        for rule in [QuadratureRule::ExpFittedSimpson, QuadratureRule::Simpson] {
            let err = |steps| {
                let q = QuadratureConfig {
                    rule,
                    steps,
                    adaptive_tol: None,
                };
                (mode_integral(&ForcingKind::sampled(|s| s.exp()), L1, 0.5, &q).unwrap().value - exact).abs()
            };
            for steps in [4, 8, 16] {
                let ratio = err(steps) / err(2 * steps);
                assert!(ratio >= 8.0, "{rule:?} {steps}: ratio {ratio}");
            }
            let q = QuadratureConfig { rule, steps: 64, adaptive_tol: None };
            let v = mode_integral(&ForcingKind::sampled(|s| s.exp()), L1, 0.5, &q).unwrap().value;
            let rel = (v - exact).abs() / exact.abs();
            match rule {
                QuadratureRule::ExpFittedSimpson => assert!(rel < 1e-8, "{rel}"),
                QuadratureRule::Simpson => assert!(rel > 1e-8, "{rel}"),
            }
        }
    }

    #[test]
    fn stiff_modes_are_handled_by_the_fitted_rule() {
        let lambda = -64.0 * 64.0 * PI * PI;
        let q = QuadratureConfig::with_steps(16);
        let v = mode_integral(&ForcingKind::sampled(|s| (0.7 * s).exp()), lambda, 1.0, &q).unwrap().value;
        let want = exp_exact(0.7, lambda, 1.0);
        assert!((v - want).abs() < 1e-6 * want);
    }

    #[test]
    fn adaptive_refinement_reaches_tolerance() {
        let q = QuadratureConfig {
            rule: QuadratureRule::Simpson,
            steps: 2,
            adaptive_tol: Some(1e-12),
        };
        let r = mode_integral(&ForcingKind::sampled(|s| s.exp()), L1, 0.5, &q).unwrap();
        assert!(r.steps > 2);
        assert!(r.error_estimate <= 1e-12);
        assert!((r.value - exp_exact(1.0, L1, 0.5)).abs() < 1e-10);
    }

    #[test]
    fn table_forcing_must_cover_the_interval() {
        let kind = ForcingKind::table(vec![0.0, 0.5], vec![1.0, 1.0]).unwrap();
        let q = QuadratureConfig::default();
        assert!(mode_integral(&kind, L1, 1.0, &q).is_err());
        let v = mode_integral(&kind, L1, 0.5, &q).unwrap().value;
        let want = -(L1 * 0.5).exp_m1() / PI / PI;
        assert!((v - want).abs() < 1e-13);
        assert!(ForcingKind::table(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(ForcingKind::table(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn zero_forcing_is_homogeneous() {
        let x = heat(&[1.0, -0.5, 0.25]);
        let q = QuadratureConfig::default();
        let r = duhamel_evolve(&x, &Forcing::zero(), 0.3, &q).unwrap();
        assert_eq!(r.state, x.evolve(0.3).unwrap());
        let back = affine_backward(&r.state, &Forcing::zero(), 0.3, &q).unwrap();
        assert_eq!(back, backward_evolve(&r.state, 0.3).unwrap().state);
    }

    #[test]
    fn scalar_ode_example() {
        let x0 = SpectralState::zero(Spectrum::heat(1));
        let f = Forcing::single(1, ForcingKind::Const { c: 1.0 });
        let r = duhamel_evolve(&x0, &f, 1.0, &QuadratureConfig::default()).unwrap();
        let a1 = r.state.coeff(1).to_f64();
        assert!((a1 - (1.0 - (-PI * PI).exp()) / (PI * PI)).abs() < 1e-16);
        assert_eq!(r.error_estimate, 0.0);
    }

    #[test]
    fn forcing_beyond_explicit_modes_extends_the_state() {
        let x0 = heat(&[1.0]);
        let f = Forcing::single(3, ForcingKind::Const { c: 2.0 });
        let r = duhamel_evolve(&x0, &f, 0.1, &QuadratureConfig::default()).unwrap();
        assert_eq!(r.state.num_modes(), 3);
        assert!(r.state.coeff(2).is_zero());
        assert!(r.state.coeff(3).to_f64() > 0.0);
    }

    #[test]
    fn affine_roundtrip() {
        let x0 = heat(&[0.4, -0.3, 0.2, 0.1]);
        let f = Forcing::single(1, ForcingKind::Exp { c: 1.0, mu: 1.0 })
            .with(2, ForcingKind::Const { c: -0.5 });
        let q = QuadratureConfig::default();
        let x = duhamel_evolve(&x0, &f, 0.5, &q).unwrap().state;
        let back = affine_backward(&x, &f, 0.5, &q).unwrap();
        assert!(back.distance(&x0).unwrap() / x0.norm_h() < 1e-8);

        let pure = duhamel_evolve(&SpectralState::zero(Spectrum::heat(2)), &f, 0.5, &q).unwrap().state;
        assert!(affine_backward(&pure, &f, 0.5, &q).unwrap().is_zero());
    }

    #[test]
    fn affine_semigroup_law() {
        let x = heat(&[1.0, 0.5]);
        let f = Forcing::single(1, ForcingKind::Exp { c: 0.8, mu: 0.6 }).with(2, ForcingKind::Exp { c: 1.0, mu: -2.0 });
        let q = QuadratureConfig::default();
        let (s, t) = (0.2, 0.35);
        let step = duhamel_evolve(&x, &f, s, &q).unwrap().state;
        let two = duhamel_evolve(&step, &f.shift_by(s), t, &q).unwrap().state;
        let one = duhamel_evolve(&x, &f, s + t, &q).unwrap().state;
        assert!(two.distance(&one).unwrap() <= 1e-8 * one.norm_h());
    }

    #[test]
    fn affine_norm() {
        let e1 = SpectralState::basis(Spectrum::heat(1), 1).unwrap();
        let q = QuadratureConfig::default();
        let f = Forcing::single(1, ForcingKind::Const { c: 3.0 });
        let v = affine_norm_minus_t(&e1, &f, 1.0, &q).unwrap();
        assert!((v - (-PI * PI).exp()).abs() < 1e-12 * v);
        assert!((v - 5.172e-5).abs() < 1e-8);
        let x = heat(&[0.3, -0.7]);
        assert_eq!(affine_norm_minus_t(&x, &f, 0.0, &q).unwrap(), x.norm_h());
        let g = affine_norm_minus_t(&x, &Forcing::zero(), 0.4, &q).unwrap();
        assert_eq!(g, x.evolve(0.4).unwrap().norm_h());
    }
}
