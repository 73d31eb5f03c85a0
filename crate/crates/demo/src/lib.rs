//! Browser demo: three operations exported to JavaScript, each returning a
//! JSON string for `www/index.html` to plot.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use semiext::io::classification_to_value;
use semiext::reversibility::classify;
use semiext::shift::{distance_to_range, prop4_witness, GridFunction};
use semiext::{ExtendedState, Result, SpectralState, Spectrum, TailModel};

/// Tail laws selectable on the page.
fn tail_law(kind: &str, p: f64, gamma: f64, c: f64) -> Result<TailModel> {
    let t = match kind {
        "zero" => TailModel::zero(),
        "exp_decay" => TailModel::exp_decay(gamma, c),
        "power_decay" => TailModel::power_decay(p, c),
        "damped_power" => TailModel::damped_power(p, gamma, c),
        other => return Err(semiext::Error::InvalidArgument(format!("unknown tail law {other:?}"))),
    };
    t.validate_h()?;
    Ok(t)
}

/// Heat state with `aₖ = 1/k` on the first `modes` modes and the given tail.
fn demo_state(modes: usize, kind: &str, p: f64, gamma: f64) -> Result<SpectralState> {
    let coeffs: Vec<f64> = (1..=modes).map(|k| 1.0 / k as f64).collect();
    SpectralState::from_linear(Spectrum::heat(modes), &coeffs, tail_law(kind, p, gamma, 1.0)?)
}

fn null_if_infinite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn trajectory_json(modes: usize, kind: &str, p: f64, gamma: f64, t_min: f64, t_max: f64, steps: usize) -> Result<String> {
    let z = ExtendedState::lift(demo_state(modes, kind, p, gamma)?);
    let times = semiext::trajectory::sample_times(t_min, t_max, steps)?;
    let (mut offsets, mut log_norms) = (Vec::new(), Vec::new());
    for &t in &times {
        let c = z.group_evolve(t).canonicalize();
        offsets.push(c.offset());
        // the H norm exists only once the class is back in H
        log_norms.push(if c.offset() == 0.0 { null_if_infinite(c.rep().log_norm_h()) } else { Value::Null });
    }
    Ok(json!({"t": times, "offset": offsets, "log_norm": log_norms}).to_string())
}

pub fn classify_json(kind: &str, p: f64, gamma: f64) -> Result<String> {
    let x = demo_state(0, kind, p, gamma)?;
    Ok(classification_to_value(&classify(&x)).to_string())
}

pub fn shift_json(resolution: usize, radius: f64) -> Result<String> {
    let ones = GridFunction::constant(resolution, 1.0)?;
    let times: Vec<f64> = (0..=resolution).map(|k| k as f64 / resolution as f64).collect();
    let distances = times
        .iter()
        .map(|&t| distance_to_range(&ones, t))
        .collect::<Result<Vec<f64>>>()?;
    let witness = serde_json::to_value(prop4_witness(&ones, radius)?)?;
    Ok(json!({"t": times, "distance": distances, "witness": witness}).to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// `{t, offset, log_norm}` along the group orbit of the demo state.
#[wasm_bindgen]
pub fn trajectory(modes: usize, kind: &str, p: f64, gamma: f64, t_min: f64, t_max: f64, steps: usize) -> std::result::Result<String, JsError> {
    js(trajectory_json(modes, kind, p, gamma, t_min, t_max, steps))
}

/// Classification of a pure tail law.
#[wasm_bindgen]
pub fn classification(kind: &str, p: f64, gamma: f64) -> std::result::Result<String, JsError> {
    js(classify_json(kind, p, gamma))
}

/// Distance from the constant 1 to the shift ranges, plus the witness scan.
#[wasm_bindgen]
pub fn shift_distances(resolution: usize, radius: f64) -> std::result::Result<String, JsError> {
    js(shift_json(resolution, radius))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn trajectory_crosses_the_horizon() {
        let v = parse(&trajectory_json(4, "exp_decay", 1.0, 0.3, -0.6, 0.6, 13).unwrap());
        let t = v["t"].as_array().unwrap();
        assert_eq!(t.len(), 13);
        // before −0.3 the class has left H
        assert!(v["log_norm"][0].is_null());
        assert!(v["offset"][0].as_f64().unwrap() > 0.29);
        assert_eq!(v["offset"][12], 0.0);
        let norms: Vec<f64> = v["log_norm"].as_array().unwrap().iter().filter_map(|x| x.as_f64()).collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn classification_of_tail_laws() {
        assert_eq!(parse(&classify_json("power_decay", 1.0, 0.0).unwrap())["class"], "Z");
        let v = parse(&classify_json("exp_decay", 0.0, 0.4).unwrap());
        assert_eq!(v["class"], "Dt");
        assert_eq!(v["horizon"], 0.4);
        assert_eq!(parse(&classify_json("zero", 0.0, 0.0).unwrap())["horizon"], "inf");
        assert!(classify_json("power_decay", 0.25, 0.0).is_err(), "not square summable");
        assert!(classify_json("sine", 1.0, 1.0).is_err());
    }

    #[test]
    fn shift_distance_is_sqrt_t() {
        let v = parse(&shift_json(100, 0.3).unwrap());
        let (t, d) = (v["t"].as_array().unwrap(), v["distance"].as_array().unwrap());
        for (t, d) in t.iter().zip(d) {
            assert!((d.as_f64().unwrap() - t.as_f64().unwrap().sqrt()).abs() < 1e-12);
        }
        assert_eq!(v["witness"]["result"], "witness");
        assert!(shift_json(0, 0.3).is_err());
    }
}
