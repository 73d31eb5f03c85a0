#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use semiext::{ExtendedState, LogAmplitude, SpectralState, Spectrum, TailModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficient with random sign and magnitude in `[e^-3, 1]`.
pub fn coeff(rng: &mut ChaCha8Rng) -> f64 {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    sign * rng.gen_range(-3.0f64..0.0).exp()
}

pub fn random_tail(rng: &mut ChaCha8Rng) -> TailModel {
    match rng.gen_range(0..3) {
        0 => TailModel::zero(),
        1 => TailModel::exp_decay(rng.gen_range(0.05..1.0), coeff(rng)),
        _ => TailModel::power_decay(rng.gen_range(0.75..3.0), coeff(rng)),
    }
}

pub fn random_state(rng: &mut ChaCha8Rng, modes: usize) -> SpectralState {
    let tail = random_tail(rng);
    random_state_with_tail(rng, modes, tail)
}

pub fn random_state_with_tail(rng: &mut ChaCha8Rng, modes: usize, tail: TailModel) -> SpectralState {
    let c: Vec<f64> = (0..modes).map(|_| coeff(rng)).collect();
    SpectralState::from_linear(Spectrum::heat(modes), &c, tail).unwrap()
}

pub fn random_finite_state(rng: &mut ChaCha8Rng, modes: usize) -> SpectralState {
    random_state_with_tail(rng, modes, TailModel::zero())
}

pub fn random_extended(rng: &mut ChaCha8Rng, modes: usize, max_offset: f64) -> ExtendedState {
    let offset = if max_offset > 0.0 { rng.gen_range(0.0..=max_offset) } else { 0.0 };
    ExtendedState::new(offset, random_state(rng, modes)).unwrap()
}

/// `ln Σ exp(v)` written out directly, independent of the library's helper.
pub fn oracle_log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn log_abs(a: LogAmplitude) -> f64 {
    a.log_mag()
}
