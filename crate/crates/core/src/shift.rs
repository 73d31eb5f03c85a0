//! Right shift on piecewise-constant functions over (0,1).
//!
//! `(T_t f)(x) = f(x − t)` for `x > t` and `0` otherwise. The semigroup is
//! nilpotent (`T_1 = 0`), so its ranges `D_t = {g : g = 0 on (0,t)}` are not
//! dense and backward uniqueness fails.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Tolerance for `t·R` to count as an integer.
const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridFunction {
    resolution: usize,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawGrid {
    resolution: usize,
    values: Vec<f64>,
}

impl TryFrom<RawGrid> for GridFunction {
    type Error = crate::error::Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        GridFunction::new(raw.resolution, raw.values)
    }
}

impl GridFunction {
    pub fn new(resolution: usize, values: Vec<f64>) -> Result<Self> {
        if resolution == 0 {
            return Err(invalid("grid resolution must be positive"));
        }
        if values.len() != resolution {
            return Err(invalid(format!(
                "{} cell values for resolution {resolution}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("cell values must be finite"));
        }
        Ok(GridFunction { resolution, values })
    }

    pub fn constant(resolution: usize, c: f64) -> Result<Self> {
        Self::new(resolution, vec![c; resolution])
    }

    pub fn zero(resolution: usize) -> Result<Self> {
        Self::constant(resolution, 0.0)
    }

    /// Cell averages of `f` sampled at cell midpoints.
    pub fn from_fn(resolution: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let r = resolution as f64;
        Self::new(resolution, (0..resolution).map(|i| f((i as f64 + 0.5) / r)).collect())
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// L²(0,1) norm.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).fold(0.0, |a, b| a + b) / self.resolution as f64).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn distance(&self, other: &GridFunction) -> Result<f64> {
        if self.resolution != other.resolution {
            return Err(invalid("grid functions have different resolutions"));
        }
        let sq: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok((sq / self.resolution as f64).sqrt())
    }

    /// Number of grid cells covered by `t`; `t·R` must be an integer.
    pub fn cells(&self, t: f64) -> Result<usize> {
        if !t.is_finite() || t < 0.0 {
            return Err(invalid(format!("shift time must be finite and >= 0, got {t}")));
        }
        let k = t * self.resolution as f64;
        let rounded = k.round();
        if (k - rounded).abs() > GRID_TOL {
            return Err(invalid(format!(
                "t = {t} is not a multiple of the grid step 1/{}",
                self.resolution
            )));
        }
        Ok(rounded as usize)
    }
}

pub fn shift_evolve(f: &GridFunction, t: f64) -> Result<GridFunction> {
    let k = f.cells(t)?.min(f.resolution);
    let mut values = vec![0.0; f.resolution];
    values[k..].copy_from_slice(&f.values[..f.resolution - k]);
    Ok(GridFunction {
        resolution: f.resolution,
        values,
    })
}

/// Whether `g` lies in `T_t X`, i.e. vanishes on `(0,t)`.
pub fn range_contains(g: &GridFunction, t: f64) -> Result<bool> {
    let k = g.cells(t)?.min(g.resolution);
    Ok(g.values[..k].iter().all(|&v| v == 0.0))
}

/// Distance from `f` to `D_t`: the norm of `f` restricted to `(0,t)`.
pub fn distance_to_range(f: &GridFunction, t: f64) -> Result<f64> {
    let k = f.cells(t)?.min(f.resolution);
    let sq = f.values[..k].iter().fold(0.0, |a, v| a + v * v);
    Ok((sq / f.resolution as f64).sqrt())
}

/// Outcome of the scan for the first time the ball `B(f, radius)` misses `D_t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum WitnessReport {
    Witness {
        t_min: f64,
        /// `distance_to_range(f, t_min)`, strictly above the radius.
        distance_at: f64,
        /// `distance_to_range(f, t_min − 1/R)`, at most the radius.
        distance_before: f64,
    },
    /// `B(f, radius)` meets every `D_t` on the grid.
    NoWitness { max_distance: f64 },
}

/// Scans grid times in `(0,1)` for the smallest `t` with
/// `distance_to_range(f, t) > radius`.
pub fn prop4_witness(f: &GridFunction, radius: f64) -> Result<WitnessReport> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid(format!("radius must be finite and > 0, got {radius}")));
    }
    let r = f.resolution;
    let mut sq = 0.0;
    let mut before = 0.0;
    for k in 1..r {
        sq += f.values[k - 1] * f.values[k - 1];
        let d = (sq / r as f64).sqrt();
        if d > radius {
            return Ok(WitnessReport::Witness {
                t_min: k as f64 / r as f64,
                distance_at: d,
                distance_before: before,
            });
        }
        before = d;
    }
    Ok(WitnessReport::NoWitness { max_distance: before })
}

/// `T_1 X = {0}`, so the backward-complete set of the shift is `{0}`: checks
/// that every basis cell is annihilated by `T_1`.
pub fn d_is_trivial(resolution: usize) -> Result<bool> {
    for i in 0..resolution {
        let mut values = vec![0.0; resolution];
        values[i] = 1.0;
        if !shift_evolve(&GridFunction::new(resolution, values)?, 1.0)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Two different functions with the same image under `T_1`.
pub fn uniqueness_counterexample(resolution: usize) -> Result<(GridFunction, GridFunction)> {
    let f = GridFunction::constant(resolution, 1.0)?;
    let g = GridFunction::zero(resolution)?;
    debug_assert_eq!(shift_evolve(&f, 1.0)?, shift_evolve(&g, 1.0)?);
    Ok((f, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(r: usize) -> GridFunction {
        GridFunction::constant(r, 1.0).unwrap()
    }

    #[test]
    fn shifting() {
        let f = GridFunction::new(4, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(shift_evolve(&f, 0.0).unwrap(), f);
        assert_eq!(shift_evolve(&ones(4), 0.25).unwrap().values(), &[0.0, 1.0, 1.0, 1.0]);
        assert!(shift_evolve(&f, 1.0).unwrap().is_zero());
        assert!(shift_evolve(&f, 3.0).unwrap().is_zero());
        assert!(shift_evolve(&f, 0.3).is_err());
        assert!(shift_evolve(&f, -0.25).is_err());
    }

    #[test]
    fn semigroup_law() {
        let f = GridFunction::from_fn(10, |x| x * x - 0.3).unwrap();
        let a = shift_evolve(&shift_evolve(&f, 0.2).unwrap(), 0.3).unwrap();
        assert_eq!(a, shift_evolve(&f, 0.5).unwrap());
    }

    #[test]
    fn range_distance() {
        assert_eq!(distance_to_range(&ones(4), 0.25).unwrap(), 0.5);
        let g = shift_evolve(&GridFunction::from_fn(8, |x| x + 1.0).unwrap(), 0.25).unwrap();
        assert_eq!(distance_to_range(&g, 0.25).unwrap(), 0.0);
        assert!(range_contains(&g, 0.25).unwrap());
        assert!(!range_contains(&g, 0.375).unwrap());
    }

    #[test]
    fn range_is_exactly_the_vanishing_functions() {
        // all 0/1 grid functions for R = 6
        let r = 6;
        let all: Vec<GridFunction> = (0..1u32 << r)
            .map(|bits| GridFunction::new(r, (0..r).map(|i| f64::from((bits >> i) & 1)).collect()).unwrap())
            .collect();
        for k in 0..=r {
            let t = k as f64 / r as f64;
            let image: Vec<GridFunction> = all.iter().map(|f| shift_evolve(f, t).unwrap()).collect();
            for g in &all {
                assert_eq!(image.contains(g), range_contains(g, t).unwrap(), "k = {k}");
            }
        }
    }

    #[test]
    fn witness_examples() {
        match prop4_witness(&ones(100), 0.4).unwrap() {
            WitnessReport::Witness { t_min, distance_at, distance_before } => {
                assert_eq!(t_min, 0.17);
                assert!(distance_at > 0.4 && distance_before <= 0.4);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(prop4_witness(&ones(100), 1.0).unwrap(), WitnessReport::NoWitness { .. }));
        let late = GridFunction::from_fn(100, |x| if x > 0.5 { 1.0 } else { 0.0 }).unwrap();
        match prop4_witness(&late, 0.05).unwrap() {
            WitnessReport::Witness { t_min, .. } => assert!(t_min > 0.5 && t_min < 0.52),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nilpotent_model_breaks_backward_uniqueness() {
        assert!(d_is_trivial(16).unwrap());
        let (f, g) = uniqueness_counterexample(8).unwrap();
        assert_ne!(f, g);
        assert_eq!(shift_evolve(&f, 1.0).unwrap(), shift_evolve(&g, 1.0).unwrap());
    }

    #[test]
    fn json_shape() {
        let f: GridFunction = serde_json::from_str(r#"{"resolution": 2, "values": [1.0, -2.5]}"#).unwrap();
        assert_eq!(f.values(), &[1.0, -2.5]);
        assert!(serde_json::from_str::<GridFunction>(r#"{"resolution": 3, "values": [1.0]}"#).is_err());
    }
}
