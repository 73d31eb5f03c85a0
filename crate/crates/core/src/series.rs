//! Log-domain evaluation of `Σ_{n ≥ n0} n^(-s) · exp(-c·n²)`.
//!
//! Every tail norm and tail inner product reduces to this family: a tail term
//! `C·n^(-p)·exp(γλₙ)` on the heat spectrum is `C·n^(-p)·exp(-γπ²n²)`, and
//! the product of two terms is again of that shape.
//!
//! * `c = 0` is the Hurwitz zeta function `ζ(s, n0)`, evaluated by
//!   Euler–Maclaurin with Bernoulli corrections.
//! * `c > 0` is summed directly until a rigorous remainder bound drops below
//!   the series tolerance. When the damping is so weak that this would take
//!   more than [`DIRECT_CAP`] terms, the remainder is taken from an
//!   Euler–Maclaurin tail whose integral is done by composite Gauss–Legendre.

/// Relative tolerance of every series evaluation.
pub const SERIES_TOL: f64 = 1e-12;

const STOP_TOL: f64 = 1e-17;
const DIRECT_CAP: u64 = 2000;

fn log_term(n: f64, s: f64, c: f64) -> f64 {
    -s * n.ln() - c * n * n
}

/// `ln Σ_{n ≥ n0} n^(-s) exp(-c n²)`.
///
/// Requires `n0 ≥ 1`, `c ≥ 0`, and `s > 1` when `c = 0`; returns NaN otherwise.
pub fn log_power_gauss_sum(n0: u64, s: f64, c: f64) -> f64 {
    if n0 == 0 || !(c >= 0.0) || !s.is_finite() || !c.is_finite() {
        return f64::NAN;
    }
    if c == 0.0 {
        return log_hurwitz_zeta(s, n0 as f64);
    }

    let a = n0 as f64;
    // Peak of x^(-s) e^(-c x²) for s < 0.
    let peak = if s < 0.0 { (-s / (2.0 * c)).sqrt() } else { 0.0 };
    let reference = if peak > a {
        log_term(peak.floor().max(a), s, c).max(log_term(peak.ceil(), s, c))
    } else {
        log_term(a, s, c)
    };

    let mut acc = 0.0f64;
    let mut n = n0;
    loop {
        let x = n as f64;
        let lt = log_term(x, s, c);
        let term = (lt - reference).exp();
        acc += term;

        if x >= peak {
            let rem = remainder_bound(x, s, c) * term;
            if rem <= STOP_TOL * acc {
                return reference + acc.ln();
            }
        }
        n += 1;
        if n - n0 >= DIRECT_CAP {
            break;
        }
    }

    acc += euler_maclaurin_tail(n as f64, s, c, reference);
    reference + acc.ln()
}

/// Upper bound on `Σ_{k>n} f(k) / f(n)` once `n` is past the peak of `f`.
fn remainder_bound(x: f64, s: f64, c: f64) -> f64 {
    if s >= 0.0 {
        // f(n+k)/f(n) ≤ exp(-c(2nk + k²)) ≤ q^k
        let q = (-2.0 * c * x).exp();
        let geometric = if q < 1.0 { q / (1.0 - q) } else { f64::INFINITY };
        let power = if s > 1.0 { x / (s - 1.0) } else { f64::INFINITY };
        geometric.min(power)
    } else {
        // log-concave beyond the peak: ratios only shrink
        let r = (log_term(x + 1.0, s, c) - log_term(x, s, c)).exp();
        if r < 1.0 {
            r / (1.0 - r)
        } else {
            f64::INFINITY
        }
    }
}

/// `Σ_{n ≥ m} f(n) · exp(-reference)` by Euler–Maclaurin through `f'''`.
fn euler_maclaurin_tail(m: f64, s: f64, c: f64, reference: f64) -> f64 {
    let fm = (log_term(m, s, c) - reference).exp();
    let u = -s / m - 2.0 * c * m;
    let du = s / (m * m) - 2.0 * c;
    let ddu = -2.0 * s / (m * m * m);
    let d1 = fm * u;
    let d3 = fm * (u * u * u + 3.0 * u * du + ddu);
    scaled_gauss_integral(m, s, c, reference) + 0.5 * fm - d1 / 12.0 + d3 / 720.0
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// `∫_m^∞ x^(-s) exp(-c x² - reference) dx` through `x = m·e^w`.
fn scaled_gauss_integral(m: f64, s: f64, c: f64, reference: f64) -> f64 {
    let a = c * m * m;
    let lnm = m.ln();
    let integrand = |w: f64| ((1.0 - s) * (lnm + w) - a * (2.0 * w).exp() - reference).exp();
    let upper = 0.5 * (((s - 1.0).abs() + 60.0) / a).max(1.0).ln() + 2.0;
    let width = 0.125;
    let panels = (upper / width).ceil() as usize;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * width;
        let half = 0.5 * width;
        let mut panel = 0.0;
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            panel += w * (integrand(mid - half * x) + integrand(mid + half * x));
        }
        total += half * panel;
    }
    total
}

const BERNOULLI_2J: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// `ln ζ(s, a)` for `s > 1`, `a ≥ 1`.
pub fn log_hurwitz_zeta(s: f64, a: f64) -> f64 {
    if !(s > 1.0) || !(a >= 1.0) {
        return f64::NAN;
    }
    // All terms are scaled by a^s so large s or a cannot underflow.
    let shift = (12.0 + s.ceil()).min(10_000.0);
    let direct: f64 = (0..shift as u64)
        .map(|k| (-s * ((a + k as f64) / a).ln()).exp())
        .sum();
    let b = a + shift;
    let mut corr = b / (s - 1.0) + 0.5;
    // rising factorial s(s+1)…(s+2j-2) / (2j)! · b^(1-2j)
    let mut factor = s / b;
    let mut fact = 2.0;
    for (j, bern) in BERNOULLI_2J.iter().enumerate() {
        let term = bern * factor / fact;
        corr += term;
        if term.abs() < 1e-18 * corr.abs() {
            break;
        }
        let k = 2 * j as u32 + 1;
        factor *= (s + k as f64) * (s + k as f64 + 1.0) / (b * b);
        fact *= f64::from((k + 2) * (k + 3));
    }
    let tail = (-s * (b / a).ln()).exp() * corr;
    -s * a.ln() + (direct + tail).ln()
}
