use std::f64::consts::PI;

use proptest::prelude::*;

use semiext::duality::{pairing, pairing_log};
use semiext::extended::DEFAULT_EQ_TOL;
use semiext::inhomogeneous::{duhamel_evolve, Forcing, ForcingKind, QuadratureConfig};
use semiext::io::{extended_from_json, extended_to_json, state_from_json, state_to_json, Encoding};
use semiext::reversibility::{backward_evolve, classify, frechet_log_seminorms, horizon};
use semiext::shift::{distance_to_range, GridFunction};
use semiext::{Class, ExtendedState, LogAmplitude, SpectralState, Spectrum, TailModel};

fn tail() -> impl Strategy<Value = TailModel> {
    prop_oneof![
        Just(TailModel::zero()),
        (0.05..1.0f64, -1.0..1.0f64).prop_map(|(g, c)| TailModel::exp_decay(g, c)),
        (0.75..3.0f64, -1.0..1.0f64).prop_map(|(p, c)| TailModel::power_decay(p, c)),
        (0.0..2.0f64, 0.05..1.0f64, -1.0..1.0f64).prop_map(|(p, g, c)| TailModel::damped_power(p, g, c)),
    ]
}

fn coeffs(max_modes: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 0..=max_modes)
}

fn state() -> impl Strategy<Value = SpectralState> {
    (coeffs(12), tail()).prop_map(|(c, t)| SpectralState::from_linear(Spectrum::heat(c.len()), &c, t).unwrap())
}

fn finite_state() -> impl Strategy<Value = SpectralState> {
    coeffs(10).prop_map(|c| SpectralState::from_linear(Spectrum::heat(c.len()), &c, TailModel::zero()).unwrap())
}

fn extended() -> impl Strategy<Value = ExtendedState> {
    (0.0..1.5f64, state()).prop_map(|(o, s)| ExtendedState::new(o, s).unwrap())
}

/// `|got − want| ≤ 1e-12·(1 + scale)`, all in log form.
fn within(got: LogAmplitude, want: LogAmplitude, scale: LogAmplitude) -> bool {
    let diff = got.sub(want).log_mag();
    diff <= (1e-12f64).ln() + scale.add(LogAmplitude::ONE).log_mag()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn semigroup_law(x in state(), s in 0.0..2.0f64, t in 0.0..2.0f64) {
        let two = x.evolve(s).unwrap().evolve(t).unwrap();
        let one = x.evolve(s + t).unwrap();
        prop_assert!(two.distance(&one).unwrap() <= 1e-12 * x.norm_h().max(1e-300));
    }

    #[test]
    fn contraction(x in state(), t in 0.0..3.0f64) {
        prop_assert!(x.evolve(t).unwrap().norm_h() <= x.norm_h() * (1.0 + 1e-13));
    }

    #[test]
    fn linearity(x in state(), y in state(), a in -2.0..2.0f64, b in -2.0..2.0f64, t in 0.0..1.0f64) {
        let lhs = x.scale(a).add(&y.scale(b)).unwrap().evolve(t).unwrap();
        let rhs = x.evolve(t).unwrap().scale(a).add(&y.evolve(t).unwrap().scale(b)).unwrap();
        let scale = a.abs() * x.norm_h() + b.abs() * y.norm_h();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn finite_norm_is_the_euclidean_sum(c in coeffs(16)) {
        let x = SpectralState::from_linear(Spectrum::heat(c.len()), &c, TailModel::zero()).unwrap();
        let naive = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(close(x.norm_h(), naive, 1e-13));
    }

    #[test]
    fn tail_norm_matches_partial_sums(g in 0.02..0.5f64, c in 0.1..2.0f64, n in 0usize..4) {
        let x = SpectralState::from_linear(Spectrum::heat(n), &vec![0.0; n], TailModel::exp_decay(g, c)).unwrap();
        let brute: f64 = (n + 1..400).map(|k| (c * (-g * (k * k) as f64 * PI * PI).exp()).powi(2)).sum();
        prop_assert!(close(x.tail_norm(), brute.sqrt(), 1e-11));
    }

    #[test]
    fn seminorms_grow_and_separate(x in finite_state()) {
        let logs = frechet_log_seminorms(&x, 5).unwrap();
        prop_assert!(logs.windows(2).all(|w| w[1] >= w[0]));
        if !x.is_zero() {
            prop_assert!(logs.iter().all(|l| l.is_finite()));
        }
    }

    #[test]
    fn backward_inverts_forward(x in state(), t in 0.0..0.05f64) {
        let back = backward_evolve(&x.evolve(t).unwrap(), t).unwrap().state;
        prop_assert!(back.distance(&x).unwrap() <= 1e-10 * x.norm_h().max(1e-300));
    }

    #[test]
    fn classification_matches_horizon(x in state()) {
        let h = horizon(&x);
        match classify(&x).class {
            Class::InD => prop_assert!(h.is_infinite() && x.tail().is_zero()),
            Class::InZ => prop_assert!(h.value() == 0.0 && h.is_open()),
            Class::InDtUpTo(k) => prop_assert!(k == h && h.value() > 0.0),
        }
    }

    #[test]
    fn log_encoding_roundtrips_bit_for_bit(x in state(), t in 0.0..0.04f64) {
        // a backward image when there is one, otherwise a forward one
        let y = backward_evolve(&x, t).map(|b| b.state).unwrap_or_else(|_| x.evolve(t).unwrap());
        for s in [&x, &y] {
            prop_assert_eq!(&state_from_json(&state_to_json(s, Encoding::Log)).unwrap(), s);
            prop_assert_eq!(&state_from_json(&state_to_json(s, Encoding::Auto)).unwrap(), s);
        }
    }

    #[test]
    fn extended_roundtrips(z in extended()) {
        prop_assert_eq!(extended_from_json(&extended_to_json(&z, Encoding::Log)).unwrap(), z);
    }

    #[test]
    fn group_law(z in extended(), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        let two = z.group_evolve(s).group_evolve(t);
        prop_assert!(two.equals(&z.group_evolve(s + t), DEFAULT_EQ_TOL).unwrap());
    }

    #[test]
    fn canonicalize_is_idempotent_and_preserves_the_class(z in extended()) {
        let c = z.canonicalize();
        prop_assert_eq!(c.canonicalize(), c.clone());
        prop_assert!(c.offset() <= z.offset());
        prop_assert!(c.equals(&z, DEFAULT_EQ_TOL).unwrap());
    }

    #[test]
    fn pairing_is_bilinear(
        x in finite_state(), y in finite_state(), z in extended(), w in extended(),
        a in -2.0..2.0f64, b in -2.0..2.0f64,
    ) {
        // pairings can exceed f64 range, so combine them as log amplitudes
        let p = |u: &SpectralState, v: &ExtendedState| pairing_log(u, v).unwrap();
        let (a_, b_) = (LogAmplitude::from_f64(a), LogAmplitude::from_f64(b));

        let left = p(&x.scale(a).add(&y.scale(b)).unwrap(), &z);
        let (u, v) = (a_ * p(&x, &z), b_ * p(&y, &z));
        prop_assert!(within(left, u.add(v), u.abs().add(v.abs())));

        let right = p(&x, &z.scale(a).add(&w.scale(b)).unwrap());
        let (u, v) = (a_ * p(&x, &z), b_ * p(&x, &w));
        prop_assert!(within(right, u.add(v), u.abs().add(v.abs())));
    }

    #[test]
    fn pairing_is_non_degenerate(x in finite_state()) {
        let n = x.num_modes();
        let probes: Vec<f64> = (1..=n)
            .map(|l| pairing(&x, &ExtendedState::lift(SpectralState::basis(Spectrum::heat(n), l).unwrap())).unwrap())
            .collect();
        for (l, p) in probes.iter().enumerate() {
            prop_assert_eq!(*p, x.coeff(l + 1).to_f64());
        }
        prop_assert_eq!(probes.iter().all(|p| *p == 0.0), x.is_zero());
    }

    #[test]
    fn affine_semigroup_law(
        c in prop::collection::vec((-1.0..1.0f64, -3.0..3.0f64), 1..4),
        x in finite_state(), s in 0.0..0.5f64, t in 0.0..0.5f64,
    ) {
        let mut f = Forcing::zero();
        for (k, (amp, mu)) in c.iter().enumerate() {
            f = f.with(k + 1, ForcingKind::Exp { c: *amp, mu: *mu });
        }
        let q = QuadratureConfig::default();
        let step = duhamel_evolve(&x, &f, s, &q).unwrap().state;
        let two = duhamel_evolve(&step, &f.shift_by(s), t, &q).unwrap().state;
        let one = duhamel_evolve(&x, &f, s + t, &q).unwrap().state;
        prop_assert!(two.distance(&one).unwrap() <= 1e-8 * one.norm_h().max(1.0));
    }

    #[test]
    fn range_distance_is_monotone(v in prop::collection::vec(-2.0..2.0f64, 2..40)) {
        let r = v.len();
        let f = GridFunction::new(r, v).unwrap();
        let d: Vec<f64> = (0..=r).map(|k| distance_to_range(&f, k as f64 / r as f64).unwrap()).collect();
        prop_assert_eq!(d[0], 0.0);
        prop_assert!(d.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!((d[r] - f.norm()).abs() <= 1e-12 * f.norm().max(1.0));
    }
}
