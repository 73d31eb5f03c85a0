//! Constructive density of the backward-complete states.
//!
//! Two routes: plain spectral truncation (every finite modal sum has an
//! infinite horizon), and the Cauchy iteration that turns density of the
//! ranges `T_1 X` into density of D. The iteration only ever calls an
//! approximate-preimage oracle and uses the growth bound `‖T_t‖ ≤ M e^{wt}`;
//! it never relies on linearity, so the same code serves the Lipschitz
//! (nonlinear) form of the argument.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::logamp::log_sum_exp;
use crate::reversibility::backward_evolve;
use crate::spectral::SpectralState;

/// Largest truncation `truncate_to_d` will materialise.
pub const MAX_TRUNCATION_MODES: usize = 1 << 22;

/// `‖T_t‖ ≤ M·exp(w·t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthBound {
    pub m: f64,
    pub w: f64,
}

impl GrowthBound {
    pub fn new(m: f64, w: f64) -> Result<Self> {
        if !(m >= 1.0 && m.is_finite() && w.is_finite()) {
            return Err(invalid(format!("growth bound needs M >= 1 and finite w, got ({m}, {w})")));
        }
        Ok(GrowthBound { m, w })
    }

    /// The heat semigroup is a contraction.
    pub fn contraction() -> Self {
        GrowthBound { m: 1.0, w: 0.0 }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.m * (self.w * t).exp()
    }
}

/// Which hypothesis the certificate relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// Finite modal sums lie in D.
    SpectralTruncation,
    /// Linear semigroup with dense ranges.
    LinearDenseRange,
    /// Lipschitz (possibly nonlinear) semigroup with dense ranges.
    LipschitzDenseRange,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCertificate {
    pub hypothesis: Hypothesis,
    pub target_error: f64,
    /// Telescoping bound including the residual beyond the last iteration.
    pub achieved_error_bound: f64,
    pub iterations: usize,
    pub epsilon_schedule: Vec<f64>,
    /// `‖T_k x_k − T_{k−1} x_{k−1}‖` as measured.
    pub step_increments: Vec<f64>,
    /// `M e^{w(k−1)} ε_{k−1}`, the bound each increment must respect.
    pub step_bounds: Vec<f64>,
    /// Bound on the Cauchy tail `Σ_{k>K} M e^{wk} ε_k`.
    pub residual_bound: f64,
    /// Number of explicit modes in the returned state.
    pub modes: usize,
}

/// Zero-tail truncation with tail norm `< eps`, at the smallest admissible
/// number of modes `N' ≥ N`.
pub fn truncate_to_d(state: &SpectralState, eps: f64) -> Result<(SpectralState, DensityCertificate)> {
    if !(eps > 0.0) {
        return Err(invalid(format!("eps must be > 0, got {eps}")));
    }
    let n = state.num_modes();
    let log_eps = eps.ln();
    let log_tail = |m: usize| 0.5 * state.tail().log_norm_sq_beyond(m);

    let modes = if log_tail(n) < log_eps {
        n
    } else {
        // exponential search, then bisection on the monotone tail norm
        let mut bad = n;
        let mut step = 1usize;
        let good = loop {
            let m = n + step;
            if m > MAX_TRUNCATION_MODES {
                return Err(Error::TruncationTooLarge {
                    limit: MAX_TRUNCATION_MODES,
                    eps,
                });
            }
            if log_tail(m) < log_eps {
                break m;
            }
            bad = m;
            step *= 2;
        };
        let (mut lo, mut hi) = (bad, good);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if log_tail(mid) < log_eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    let out = state.extend_to(modes)?.truncated();
    let cert = DensityCertificate {
        hypothesis: Hypothesis::SpectralTruncation,
        target_error: eps,
        achieved_error_bound: log_tail(modes).exp(),
        iterations: 0,
        epsilon_schedule: Vec::new(),
        step_increments: Vec::new(),
        step_bounds: Vec::new(),
        residual_bound: 0.0,
        modes,
    };
    Ok((out, cert))
}

/// Supplies `x'` with `‖T_1 x' − target‖ < eps`.
pub trait PreimageOracle {
    fn preimage(&mut self, target: &SpectralState, eps: f64) -> std::result::Result<SpectralState, String>;
}

/// Preimage by truncating the target and solving exactly backward by one.
#[derive(Debug, Default, Clone, Copy)]
pub struct TruncationOracle;

impl PreimageOracle for TruncationOracle {
    fn preimage(&mut self, target: &SpectralState, eps: f64) -> std::result::Result<SpectralState, String> {
        let (near, _) = truncate_to_d(target, eps).map_err(|e| e.to_string())?;
        backward_evolve(&near, 1.0)
            .map(|b| b.state)
            .map_err(|e| e.to_string())
    }
}

/// `ε_k = eps0 · e^{−w(k+1)} · 2^{−(k+1)} / M` with `w` clamped at zero.
pub fn epsilon_schedule(eps0: f64, bound: GrowthBound, iterations: usize) -> Vec<f64> {
    let w = bound.w.max(0.0);
    (0..iterations)
        .map(|k| {
            let j = (k + 1) as f64;
            eps0 * (-w * j).exp() * 0.5f64.powi(k as i32 + 1) / bound.m
        })
        .collect()
}

/// `ln` of a roundoff estimate for `T_at x` after work spanning time `work`:
/// each log magnitude carries an absolute error of a few ulps of
/// `|ln cₙ| + work·|λₙ|`.
fn log_roundoff(state: &SpectralState, at: f64, work: f64) -> f64 {
    let logs: Vec<f64> = state
        .coeffs()
        .iter()
        .zip(state.spectrum().eigenvalues())
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, l)| {
            let weight = 1.0 + c.log_mag().abs() + work * l.abs();
            2.0 * (c.log_mag() + l * at + weight.ln())
        })
        .collect();
    0.5 * log_sum_exp(&logs) + (8.0 * f64::EPSILON).ln()
}

/// Runs the Cauchy iteration for `max_iters` steps and returns `T_K x_K`,
/// a point of D within the certified distance of `x0`.
pub fn lemma1_iterate(
    x0: &SpectralState,
    eps0: f64,
    oracle: &mut dyn PreimageOracle,
    bound: GrowthBound,
    max_iters: usize,
    hypothesis: Hypothesis,
) -> Result<(SpectralState, DensityCertificate)> {
    if !(eps0 > 0.0) {
        return Err(invalid(format!("eps0 must be > 0, got {eps0}")));
    }
    if max_iters == 0 {
        return Err(invalid("at least one iteration is required"));
    }
    let w_plus = bound.w.max(0.0);
    let schedule = epsilon_schedule(eps0, bound, max_iters);
    let residual_bound = eps0 * (-w_plus).exp() * 0.5f64.powi(max_iters as i32);

    let mut cert = DensityCertificate {
        hypothesis,
        target_error: eps0,
        achieved_error_bound: f64::NAN,
        iterations: 0,
        epsilon_schedule: schedule.clone(),
        step_increments: Vec::with_capacity(max_iters),
        step_bounds: Vec::with_capacity(max_iters),
        residual_bound,
        modes: x0.num_modes(),
    };
    let fail = |step: usize, reason: String, cert: &DensityCertificate| Error::OracleFailed {
        step,
        reason,
        partial: Box::new(cert.clone()),
    };

    let mut current = x0.clone();
    let mut image = x0.clone();
    for (k, &eps) in schedule.iter().enumerate() {
        let proposal = oracle
            .preimage(&current, 0.5 * eps)
            .map_err(|r| fail(k, r, &cert))?;
        // For k ≥ 1 the iterates are astronomically large, so the raw
        // residual is only meaningful up to their own roundoff.
        let log_residual = proposal.evolve(1.0)?.sub(&current)?.log_norm_h();
        let log_allowed = (0.5 * eps).ln().max(log_roundoff(&current, 0.0, 1.0));
        if !(log_residual < log_allowed) {
            return Err(fail(
                k,
                format!("preimage residual exp({log_residual}) is not below {}", 0.5 * eps),
                &cert,
            ));
        }
        let next = if proposal.tail().is_zero() {
            proposal
        } else {
            let budget = 0.5 * eps / (bound.m * w_plus.exp());
            truncate_to_d(&proposal, budget)?.0
        };

        let next_image = next.evolve((k + 1) as f64)?;
        let increment = next_image.distance(&image)?;
        let step_bound = bound.at(k as f64) * eps;
        cert.step_increments.push(increment);
        cert.step_bounds.push(step_bound);
        cert.iterations = k + 1;
        let slack = log_roundoff(&next, (k + 1) as f64, (k + 1) as f64).exp();
        if increment > step_bound + slack {
            return Err(fail(
                k,
                format!("increment {increment} exceeds the growth bound {step_bound}"),
                &cert,
            ));
        }
        current = next;
        image = next_image;
    }

    cert.achieved_error_bound = schedule
        .iter()
        .enumerate()
        .map(|(k, e)| bound.m * (w_plus * k as f64).exp() * e)
        .sum::<f64>()
        + residual_bound;
    cert.modes = image.num_modes();
    Ok((image, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reversibility::{classify, Class};
    use crate::spectral::{Spectrum, TailModel};
    use std::f64::consts::PI;

    fn power_state() -> SpectralState {
        SpectralState::from_linear(Spectrum::heat(1), &[1.0], TailModel::power_decay(1.0, 1.0)).unwrap()
    }

    #[test]
    fn zero_tail_is_already_in_d() {
        let x = SpectralState::from_linear(Spectrum::heat(2), &[1.0, 2.0], TailModel::zero()).unwrap();
        let (y, cert) = truncate_to_d(&x, 1e-3).unwrap();
        assert_eq!(y, x);
        assert_eq!(cert.achieved_error_bound, 0.0);
    }

    #[test]
    fn zeta_tail_truncation_points() {
        let (y, _) = truncate_to_d(&power_state(), 0.9).unwrap();
        assert_eq!(y.num_modes(), 1);
        // brute-force scan: smallest N' with Σ_{n>N'} n^-2 < 0.25
        let tail_sq = |m: usize| PI * PI / 6.0 - (1..=m).map(|n| 1.0 / (n * n) as f64).sum::<f64>();
        let brute = (1..).find(|&m| tail_sq(m) < 0.25).unwrap();
        assert_eq!(brute, 4);
        assert!((tail_sq(4) - 0.2213).abs() < 1e-4);
        let (y, cert) = truncate_to_d(&power_state(), 0.5).unwrap();
        assert_eq!(y.num_modes(), brute);
        assert!(cert.achieved_error_bound < 0.5);
        assert!(y.distance(&power_state()).unwrap() < 0.5);
        assert_eq!(classify(&y).class, Class::InD);
    }

    #[test]
    fn rejects_bad_eps() {
        assert!(truncate_to_d(&power_state(), 0.0).is_err());
        assert!(lemma1_iterate(&power_state(), -1.0, &mut TruncationOracle, GrowthBound::contraction(), 3, Hypothesis::LinearDenseRange).is_err());
    }

    #[test]
    fn geometric_schedule_for_contractions() {
        let s = epsilon_schedule(0.1, GrowthBound::contraction(), 4);
        assert_eq!(s, vec![0.05, 0.025, 0.0125, 0.00625]);
        assert!(s.iter().sum::<f64>() <= 0.1);
    }

    #[test]
    fn iterate_on_power_tail() {
        let x0 = power_state();
        let (out, cert) = lemma1_iterate(&x0, 0.1, &mut TruncationOracle, GrowthBound::contraction(), 6, Hypothesis::LinearDenseRange).unwrap();
        assert_eq!(classify(&out).class, Class::InD);
        let err = out.distance(&x0).unwrap();
        assert!(err <= cert.achieved_error_bound, "{err} > {}", cert.achieved_error_bound);
        assert!(cert.achieved_error_bound <= 0.1);
        for (inc, b) in cert.step_increments.iter().zip(&cert.step_bounds) {
            assert!(inc <= &(b + 1e-9));
        }
    }

    #[test]
    fn iterate_on_state_already_in_d() {
        let x0 = SpectralState::from_linear(Spectrum::heat(3), &[0.3, -0.2, 0.1], TailModel::zero()).unwrap();
        let (out, cert) = lemma1_iterate(&x0, 1e-6, &mut TruncationOracle, GrowthBound::contraction(), 3, Hypothesis::LipschitzDenseRange).unwrap();
        assert!(out.distance(&x0).unwrap() < 1e-6);
        assert_eq!(cert.hypothesis, Hypothesis::LipschitzDenseRange);
    }

    struct Failing;
    impl PreimageOracle for Failing {
        fn preimage(&mut self, _: &SpectralState, _: f64) -> std::result::Result<SpectralState, String> {
            Err("no preimage".into())
        }
    }

    #[test]
    fn oracle_failure_carries_partial_certificate() {
        match lemma1_iterate(&power_state(), 0.1, &mut Failing, GrowthBound::contraction(), 3, Hypothesis::LinearDenseRange) {
            Err(Error::OracleFailed { step, partial, .. }) => {
                assert_eq!(step, 0);
                assert_eq!(partial.iterations, 0);
                assert_eq!(partial.epsilon_schedule.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
