//! Uniformly sampled trajectories as CSV.
//!
//! Columns: `t, offset, norm, log_norm, a1..a8, log_a1..log_a8`. `offset` is
//! the canonical offset of the sample (0 when it lies in H); `norm` and
//! `log_norm` are left empty when it does not. Linear coefficient columns may
//! read `inf`/`-inf` for huge backward images; `log_a*` holds `ln|aₙ|` and
//! is always finite or empty (for zero coefficients).

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::extended::ExtendedState;
use crate::io::AnyState;
use crate::reversibility::{backward_evolve, horizon};

pub const LEADING_COEFFS: usize = 8;

pub fn csv_header() -> String {
    let mut h = String::from("t,offset,norm,log_norm");
    for k in 1..=LEADING_COEFFS {
        let _ = write!(h, ",a{k}");
    }
    for k in 1..=LEADING_COEFFS {
        let _ = write!(h, ",log_a{k}");
    }
    h
}

/// Sample times `t_min + i·(t_max − t_min)/(steps − 1)`, endpoints exact.
pub fn sample_times(t_min: f64, t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(invalid(format!("a trajectory needs at least 2 samples, got {steps}")));
    }
    if !(t_min.is_finite() && t_max.is_finite() && t_min <= t_max) {
        return Err(invalid(format!("bad time window [{t_min}, {t_max}]")));
    }
    let last = steps - 1;
    Ok((0..steps)
        .map(|i| match i {
            0 => t_min,
            i if i == last => t_max,
            i => t_min + (t_max - t_min) * i as f64 / last as f64,
        })
        .collect())
}

/// Shortest round-trip form, switching to exponent notation for tiny and
/// huge magnitudes.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn row(t: f64, z: &ExtendedState) -> String {
    let mut r = format!("{},{}", num(t), num(z.offset()));
    if z.offset() == 0.0 {
        let l = z.rep().log_norm_h();
        let _ = write!(r, ",{},{}", num(l.exp()), fmt_log(l));
    } else {
        r.push_str(",,");
    }
    let coeff = |n: usize| z.rep().coeff(n);
    for n in 1..=LEADING_COEFFS {
        let _ = write!(r, ",{}", num(coeff(n).to_f64()));
    }
    for n in 1..=LEADING_COEFFS {
        let c = coeff(n);
        let _ = write!(r, ",{}", if c.is_zero() { String::new() } else { num(c.log_mag()) });
    }
    r
}

fn fmt_log(l: f64) -> String {
    if l.is_finite() {
        num(l)
    } else {
        String::new()
    }
}

/// CSV text for the trajectory through `state` on `[t_min, t_max]`.
///
/// Plain states must stay in H: `t_min` may not reach past the backward
/// horizon. Extended states move with the group and accept any window.
pub fn emit_trajectory(state: &AnyState, t_min: f64, t_max: f64, steps: usize) -> Result<String> {
    let times = sample_times(t_min, t_max, steps)?;
    let mut out = csv_header();
    out.push('\n');
    match state {
        AnyState::Plain(x) => {
            if t_min < 0.0 {
                let h = horizon(x);
                if !h.admits(-t_min) {
                    return Err(Error::HorizonExceeded {
                        horizon: h.value(),
                        open: h.is_open(),
                        requested: -t_min,
                    });
                }
            }
            for &t in &times {
                let y = if t >= 0.0 { x.evolve(t)? } else { backward_evolve(x, -t)?.state };
                out.push_str(&row(t, &ExtendedState::lift(y)));
                out.push('\n');
            }
        }
        AnyState::Extended(z) => {
            for &t in &times {
                out.push_str(&row(t, &z.group_evolve(t).canonicalize()));
                out.push('\n');
            }
        }
    }
    Ok(out)
}
