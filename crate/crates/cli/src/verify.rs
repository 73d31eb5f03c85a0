//! Invariant suites behind `semiext verify`.
//!
//! Every suite is deterministic (fixed seeds), so `all` may run them on
//! separate threads and still print the same table.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semiext::density::{lemma1_iterate, GrowthBound, Hypothesis, TruncationOracle};
use semiext::duality::{functional_to_e, pairing_log, Functional};
use semiext::inhomogeneous::{duhamel_evolve, Forcing, ForcingKind, QuadratureConfig};
use semiext::io::{state_from_json, state_to_json, Encoding};
use semiext::reversibility::{backward_evolve, classify, frechet_log_seminorms, horizon};
use semiext::shift::{d_is_trivial, distance_to_range, prop4_witness, shift_evolve, GridFunction, WitnessReport};
use semiext::{Class, Error, ExtendedState, Horizon, SpectralState, Spectrum, TailModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    GroupLaw,
    Restriction,
    Roundtrip,
    Horizon,
    NormAxioms,
    Seminorms,
    Density,
    Duhamel,
    Duality,
    Shift,
    Uniqueness,
    All,
}

struct Params {
    modes: Option<usize>,
    tol: f64,
}

type Check = Result<(usize, String), String>;

struct Suite {
    name: &'static str,
    arg: SuiteArg,
    default_tol: f64,
    run: fn(&Params) -> Check,
}

const SUITES: [Suite; 11] = [
    Suite { name: "group-law", arg: SuiteArg::GroupLaw, default_tol: 1e-9, run: group_law },
    Suite { name: "restriction", arg: SuiteArg::Restriction, default_tol: 0.0, run: restriction },
    Suite { name: "roundtrip", arg: SuiteArg::Roundtrip, default_tol: 1e-9, run: roundtrip },
    Suite { name: "horizon", arg: SuiteArg::Horizon, default_tol: 1e-10, run: horizon_suite },
    Suite { name: "norm-axioms", arg: SuiteArg::NormAxioms, default_tol: 1e-12, run: norm_axioms },
    Suite { name: "seminorms", arg: SuiteArg::Seminorms, default_tol: 1e-12, run: seminorms },
    Suite { name: "density", arg: SuiteArg::Density, default_tol: 0.0, run: density },
    Suite { name: "duhamel", arg: SuiteArg::Duhamel, default_tol: 1e-8, run: duhamel },
    Suite { name: "duality", arg: SuiteArg::Duality, default_tol: 1e-9, run: duality },
    Suite { name: "shift", arg: SuiteArg::Shift, default_tol: 1e-12, run: shift },
    Suite { name: "uniqueness", arg: SuiteArg::Uniqueness, default_tol: 1e-9, run: uniqueness },
];

pub struct Row {
    name: &'static str,
    tol: f64,
    cases: usize,
    secs: f64,
    outcome: Result<String, String>,
}

pub struct Report {
    rows: Vec<Row>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.outcome.is_ok())
    }

    pub fn table(&self) -> String {
        let mut s = format!("{:<6} {:<12} {:>7} {:>9} {:>8}  detail\n", "result", "suite", "cases", "tol", "secs");
        for r in &self.rows {
            let (tag, detail) = match &r.outcome {
                Ok(d) => ("PASS", d),
                Err(d) => ("FAIL", d),
            };
            let tol = if r.tol == 0.0 { "exact".to_string() } else { format!("{:.0e}", r.tol) };
            let _ = writeln!(s, "{tag:<6} {:<12} {:>7} {tol:>9} {:>8.2}  {detail}", r.name, r.cases, r.secs);
        }
        let passed = self.rows.iter().filter(|r| r.outcome.is_ok()).count();
        let _ = writeln!(s, "{passed} of {} suites passed", self.rows.len());
        s
    }
}

fn run_one(suite: &Suite, modes: Option<usize>, tol: Option<f64>) -> Row {
    let params = Params {
        modes,
        tol: tol.unwrap_or(suite.default_tol),
    };
    let start = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(|| (suite.run)(&params)))
        .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&*p))));
    let (cases, outcome) = match result {
        Ok((n, d)) => (n, Ok(d)),
        Err(e) => (0, Err(e)),
    };
    Row {
        name: suite.name,
        tol: params.tol,
        cases,
        secs: start.elapsed().as_secs_f64(),
        outcome,
    }
}

pub fn run(which: SuiteArg, modes: Option<usize>, tol: Option<f64>) -> Report {
    let chosen: Vec<&Suite> = SUITES.iter().filter(|s| which == SuiteArg::All || s.arg == which).collect();
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = chosen
            .iter()
            .map(|s| scope.spawn(move || run_one(s, modes, tol)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite threads catch their panics")).collect()
    });
    Report { rows }
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: semiext::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coeff(rng: &mut ChaCha8Rng) -> f64 {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    sign * rng.gen_range(-3.0f64..0.0).exp()
}

fn state_with_tail(rng: &mut ChaCha8Rng, modes: usize, tail: TailModel) -> SpectralState {
    let c: Vec<f64> = (0..modes).map(|_| coeff(rng)).collect();
    SpectralState::from_linear(Spectrum::heat(modes), &c, tail).expect("finite coefficients")
}

fn random_state(rng: &mut ChaCha8Rng, modes: usize) -> SpectralState {
    let tail = match rng.gen_range(0..3) {
        0 => TailModel::zero(),
        1 => TailModel::exp_decay(rng.gen_range(0.05..1.0), coeff(rng)),
        _ => TailModel::power_decay(rng.gen_range(0.75..3.0), coeff(rng)),
    };
    state_with_tail(rng, modes, tail)
}

fn random_extended(rng: &mut ChaCha8Rng, modes: usize, max_offset: f64) -> ExtendedState {
    let offset = if max_offset > 0.0 { rng.gen_range(0.0..=max_offset) } else { 0.0 };
    ExtendedState::new(offset, random_state(rng, modes)).expect("offset is in range")
}

fn group_law(p: &Params) -> Check {
    let modes = p.modes.unwrap_or(64);
    let mut rng = rng(1);
    for case in 0..1000 {
        let x = random_extended(&mut rng, modes, 1.0);
        let (s, t) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
        let ok = lib(x.group_evolve(s).group_evolve(t).equals(&x.group_evolve(s + t), p.tol))?;
        ensure(ok, || format!("case {case}: s = {s}, t = {t}"))?;
    }
    Ok((1000, format!("{modes}-mode heat model, s, t in [-2, 2]")))
}

fn restriction(p: &Params) -> Check {
    let modes = p.modes.unwrap_or(16);
    let mut rng = rng(2);
    for case in 0..200 {
        let x = random_state(&mut rng, modes);
        for t in [0.0, 0.1, 1.0, 5.0] {
            let lifted = ExtendedState::lift(x.clone()).group_evolve(t);
            let direct = ExtendedState::lift(lib(x.evolve(t))?);
            let ok = if p.tol == 0.0 { lifted == direct } else { lib(lifted.equals(&direct, p.tol))? };
            ensure(ok, || format!("case {case}, t = {t}"))?;
        }
    }
    Ok((800, format!("{modes} modes, t in {{0, 0.1, 1, 5}}")))
}

fn roundtrip(p: &Params) -> Check {
    let modes = p.modes.unwrap_or(32);
    let mut rng = rng(3);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let t = if case == 0 { 1.0 } else { rng.gen_range(0.0..=1.0) };
        let tail = match case % 3 {
            0 => TailModel::zero(),
            1 => TailModel::exp_decay(t + rng.gen_range(0.01..1.0), coeff(&mut rng)),
            _ => TailModel::damped_power(rng.gen_range(0.0..2.0), t + 0.05, coeff(&mut rng)),
        };
        let x = state_with_tail(&mut rng, modes, tail);
        let back = lib(backward_evolve(&x, t))?;
        let rel = lib(lib(back.state.evolve(t))?.distance(&x))? / x.norm_h();
        ensure(rel < p.tol, || format!("case {case}: t = {t}, relative error {rel:.2e}"))?;
        worst = worst.max(rel);

        let log_copy = lib(state_from_json(&state_to_json(&back.state, Encoding::Log)))?;
        ensure(log_copy == back.state, || format!("case {case}: log encoding changed the state"))?;
    }
    let top = (modes * modes) as f64 * PI * PI;
    Ok((200, format!("{modes} modes, factor up to exp({top:.0}), max rel err {worst:.1e}, log json bit-exact")))
}

fn horizon_suite(p: &Params) -> Check {
    for gamma in [0.1, 0.3, 1.0] {
        let x = lib(SpectralState::from_linear(Spectrum::heat(0), &[], TailModel::exp_decay(gamma, 1.0)))?;
        ensure(horizon(&x) == Horizon::new(gamma, true), || format!("γ = {gamma}: horizon {}", horizon(&x)))?;
        let term = |n: u64, t: f64| (2.0 * (n as f64 * PI).powi(2) * (t - gamma)).exp();

        let below = 0.97 * gamma;
        let mut sum = 0.0;
        for n in 1.. {
            let a = term(n, below);
            sum += a;
            if a < 1e-20 * sum {
                break;
            }
            ensure(n < 1_000_000, || format!("γ = {gamma}: partial sums at 0.97γ do not settle"))?;
        }
        let lib_log = lib(backward_evolve(&x, below))?.state.log_norm_h();
        let err = (2.0 * lib_log - sum.ln()).abs();
        ensure(err < p.tol, || format!("γ = {gamma}: norm² differs by {err:e} in log"))?;

        let above = 1.03 * gamma;
        let mut sum = 0.0;
        let diverges = (1..100_000u64).any(|k| {
            sum += term(k, above);
            sum > 1e12
        });
        ensure(diverges, || format!("γ = {gamma}: partial sums at 1.03γ stayed below 1e12"))?;
        ensure(matches!(backward_evolve(&x, above), Err(Error::HorizonExceeded { .. })), || {
            format!("γ = {gamma}: backward past the horizon was accepted")
        })?;
    }
    Ok((3, "ExpDecay γ in {0.1, 0.3, 1}: converges at 0.97γ, > 1e12 at 1.03γ".into()))
}

fn norm_axioms(p: &Params) -> Check {
    let modes = p.modes.unwrap_or(8);
    let mut rng = rng(5);
    for t in [0.0, 0.5, 2.0] {
        for case in 0..1000 {
            let a = random_extended(&mut rng, modes, t);
            let b = random_extended(&mut rng, modes, t);
            let na = lib(a.norm_minus_t(t))?;
            let nb = lib(b.norm_minus_t(t))?;
            let ns = lib(lib(a.add(&b))?.norm_minus_t(t))?;
            ensure(ns <= (na + nb) * (1.0 + p.tol), || format!("t = {t}, case {case}: triangle"))?;
            let alpha: f64 = rng.gen_range(-3.0..3.0);
            let nscaled = lib(a.scale(alpha).norm_minus_t(t))?;
            ensure((nscaled - alpha.abs() * na).abs() <= p.tol * alpha.abs() * na, || {
                format!("t = {t}, case {case}: homogeneity")
            })?;
            let nzero = lib(lib(a.sub(&a))?.norm_minus_t(t))?;
            ensure(nzero == 0.0 && na > 0.0, || format!("t = {t}, case {case}: definiteness"))?;
        }
    }
    Ok((3000, "t in {0, 0.5, 2}: triangle, homogeneity, definiteness".into()))
}

fn seminorms(p: &Params) -> Check {
    let mut rng = rng(6);
    for case in 0..100 {
        let modes = rng.gen_range(1..=p.modes.unwrap_or(8).max(1));
        let x = state_with_tail(&mut rng, modes, TailModel::zero());
        let logs = lib(frechet_log_seminorms(&x, 5))?;
        for (n, l) in logs.iter().enumerate() {
            ensure(l.is_finite(), || format!("case {case}: seminorm {n} vanishes"))?;
            // per-mode ln(|aₖ| e^{λₖ n}), summed in plain floats after shifting
            let terms: Vec<f64> = x
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, a)| 2.0 * a.log_mag() + 2.0 * ((k + 1) as f64 * PI).powi(2) * n as f64)
                .collect();
            let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let oracle = 0.5 * (m + terms.iter().map(|v| (v - m).exp()).sum::<f64>().ln());
            ensure((l - oracle).abs() <= p.tol, || format!("case {case}, n = {n}: off by {:e}", (l - oracle).abs()))?;
        }
    }
    Ok((100, "n = 0..5: positive and matching per-mode arithmetic".into()))
}

fn density(p: &Params) -> Check {
    let mut rng = rng(7);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let (pw, c) = if case == 0 { (1.0, 1.0) } else { (rng.gen_range(1.0..=3.0), rng.gen_range(0.1..=1.0)) };
        let modes = rng.gen_range(0..=4);
        let x0 = state_with_tail(&mut rng, modes, TailModel::power_decay(pw, c));
        for eps0 in [0.1, 0.01] {
            let (out, cert) = lemma1_iterate(
                &x0,
                eps0,
                &mut TruncationOracle,
                GrowthBound::contraction(),
                6,
                Hypothesis::LinearDenseRange,
            )
            .map_err(|e| format!("case {case}: {e}"))?;
            ensure(classify(&out).class == Class::InD, || format!("case {case}: output not in D"))?;
            let err = lib(out.distance(&x0))?;
            ensure(err <= eps0 * (1.0 + p.tol), || format!("case {case}: error {err} > {eps0}"))?;
            ensure(cert.achieved_error_bound >= err, || format!("case {case}: certificate below the error"))?;
            worst = worst.max(err / eps0);
        }
    }
    Ok((40, format!("PowerDecay tails, (M, w) = (1, 0), max error / eps0 = {worst:.3}")))
}

fn duhamel(p: &Params) -> Check {
    let exact = (1.0 - (-PI * PI).exp()) / (PI * PI);
    let x0 = SpectralState::zero(Spectrum::heat(1));
    let q = QuadratureConfig::with_steps(64);
    let forcing = Forcing::single(1, ForcingKind::sampled(|_| 1.0));
    let a1 = lib(duhamel_evolve(&x0, &forcing, 1.0, &q))?.state.coeff(1).to_f64();
    let rel = (a1 - exact).abs() / exact;
    ensure(rel < p.tol, || format!("a1 = {a1}, rel err {rel:e}"))?;

    let (mu, t) = (1.0f64, 0.5f64);
    let l1 = -PI * PI;
    let exact_exp = ((mu * t).exp() - (l1 * t).exp()) / (mu - l1);
    let smooth = Forcing::single(1, ForcingKind::sampled(move |s| (mu * s).exp()));
    let err = |steps: usize| -> Result<f64, String> {
        let r = lib(duhamel_evolve(&x0, &smooth, t, &QuadratureConfig::with_steps(steps)))?;
        Ok((r.state.coeff(1).to_f64() - exact_exp).abs())
    };
    let mut ratios = Vec::new();
    for steps in [4, 8, 16] {
        let ratio = err(steps)? / err(2 * steps)?;
        ensure(ratio >= 8.0, || format!("halving ratio {ratio:.2} at {steps} steps"))?;
        ratios.push(format!("{ratio:.1}"));
    }
    Ok((4, format!("a1 = {a1:.8}, rel err {rel:.1e}; halving ratios [{}]", ratios.join(", "))))
}

fn duality(p: &Params) -> Check {
    let modes = p.modes.unwrap_or(16);
    for gamma in [0.5, -0.1] {
        let f = lib(Functional::new(Spectrum::heat(0), vec![], TailModel::exp_decay(gamma, 1.0)))?;
        let z = lib(functional_to_e(&f))?;
        for l in 1..=modes {
            let pr = lib(pairing_log(&lib(SpectralState::basis(Spectrum::heat(l), l))?, &z))?;
            let want = -gamma * (l * l) as f64 * PI * PI;
            let rel = (pr.log_mag() - want).abs();
            ensure(pr.sign() == 1 && rel < p.tol, || format!("γ = {gamma}, l = {l}: ln pairing off by {rel:e}"))?;
        }
    }
    Ok((2 * modes, format!("bₙ = e^(γλₙ), γ in {{0.5, -0.1}}, l <= {modes}")))
}

fn shift(p: &Params) -> Check {
    let r = 1000;
    let ones = lib(GridFunction::constant(r, 1.0))?;
    let mut previous = f64::INFINITY;
    for k in (1..r).rev() {
        let t = k as f64 / r as f64;
        let d = lib(distance_to_range(&ones, t))?;
        ensure((d - t.sqrt()).abs() <= p.tol, || format!("t = {t}: {d} vs {}", t.sqrt()))?;
        ensure(d < previous, || format!("not decreasing at t = {t}"))?;
        previous = d;
    }
    let mut onsets = Vec::new();
    for radius in [0.5, 0.2, 0.1, 0.05] {
        match lib(prop4_witness(&ones, radius))? {
            WitnessReport::Witness { t_min, .. } => onsets.push(t_min),
            other => return Err(format!("radius {radius}: {other:?}")),
        }
    }
    ensure(onsets.windows(2).all(|w| w[1] < w[0]), || format!("onsets {onsets:?}"))?;
    Ok((r - 1, format!("distance = sqrt(t) on the grid, onsets {onsets:?}")))
}

fn uniqueness(p: &Params) -> Check {
    let modes = p.modes.unwrap_or(16);
    let mut rng = rng(11);
    for case in 0..200 {
        let x = state_with_tail(&mut rng, modes, TailModel::zero());
        let t = rng.gen_range(0.0..=2.0);
        let image = lib(x.evolve(t))?;
        let y = lib(backward_evolve(&image, t))?.state;
        let rel = lib(y.distance(&x))? / x.norm_h();
        ensure(rel < p.tol, || format!("case {case}: preimage differs by {rel:e}"))?;
        let bump = lib(SpectralState::basis(Spectrum::heat(modes), rng.gen_range(1..=modes)))?.scale(1e-3);
        let gap = lib(lib(lib(x.add(&bump))?.evolve(t))?.sub(&image))?.log_norm_h();
        ensure(gap > f64::NEG_INFINITY, || format!("case {case}: distinct states share an image"))?;
    }
    let ones = lib(GridFunction::constant(64, 1.0))?;
    let zero = lib(GridFunction::zero(64))?;
    ensure(lib(shift_evolve(&ones, 1.0))? == lib(shift_evolve(&zero, 1.0))?, || "shift: T_1 is not zero".into())?;
    ensure(lib(d_is_trivial(64))?, || "shift: D is not {0}".into())?;
    Ok((200, format!("{modes}-mode preimages unique; shift has T_1 = 0 and D = {{0}}")))
}
