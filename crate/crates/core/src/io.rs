//! JSON file formats.
//!
//! A state looks like
//!
//! ```json
//! {"spectrum": {"kind": "heat", "modes": 2},
//!  "coeffs": {"encoding": "linear", "values": [1.0, -0.5]},
//!  "tail": {"variant": "exp_decay", "gamma": 0.3, "c": 1.0}}
//! ```
//!
//! The `log` encoding stores `[sign, log_mag]` pairs (`[0, null]` is zero)
//! and round-trips bit for bit. Tail amplitudes use `"c"` when the linear
//! value is exact and `"log_c": [sign, log_mag]` otherwise.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::duality::Functional;
use crate::error::{invalid, Error, Result};
use crate::extended::ExtendedState;
use crate::inhomogeneous::{Forcing, ForcingKind, ModeForcing};
use crate::logamp::LogAmplitude;
use crate::reversibility::{Class, Classification};
use crate::spectral::{SpectralState, Spectrum, SpectrumKind, TailModel, TailTerm};

/// Coefficient encoding used when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Encoding {
    Linear,
    Log,
    /// Linear when every coefficient survives the round trip, else log.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SpectrumFile {
    Heat { modes: usize },
    Custom { eigenvalues: Vec<f64> },
}

type LogPair = (i8, Option<f64>);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "encoding", rename_all = "snake_case", deny_unknown_fields)]
enum CoeffsFile {
    Linear { values: Vec<f64> },
    Log { values: Vec<LogPair> },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct AmpFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    log_c: Option<LogPair>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermFile {
    p: f64,
    gamma: f64,
    #[serde(flatten)]
    amp: AmpFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum TailLaw {
    Zero,
    ExpDecay {
        gamma: f64,
        #[serde(flatten)]
        amp: AmpFile,
    },
    PowerDecay {
        p: f64,
        #[serde(flatten)]
        amp: AmpFile,
    },
    DampedPower {
        p: f64,
        gamma: f64,
        #[serde(flatten)]
        amp: AmpFile,
    },
    Sum { terms: Vec<TermFile> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TailFile {
    #[serde(flatten)]
    law: TailLaw,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    may_grow: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StateFile {
    spectrum: SpectrumFile,
    coeffs: CoeffsFile,
    #[serde(default = "zero_tail")]
    tail: TailFile,
}

fn zero_tail() -> TailFile {
    TailFile {
        law: TailLaw::Zero,
        may_grow: false,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ExtendedFile {
    offset: f64,
    rep: StateFile,
}

fn pair_of(a: LogAmplitude) -> LogPair {
    if a.is_zero() {
        (0, None)
    } else {
        (a.sign(), Some(a.log_mag()))
    }
}

fn amp_of_pair((sign, log_mag): LogPair) -> Result<LogAmplitude> {
    match (sign, log_mag) {
        (0, _) | (_, None) => Ok(LogAmplitude::ZERO),
        (s, Some(m)) if (s == 1 || s == -1) && m.is_finite() => Ok(LogAmplitude::new(s, m)),
        (s, Some(m)) => Err(Error::Parse(format!("bad log amplitude [{s}, {m}]"))),
    }
}

fn exact_linear(a: LogAmplitude) -> Option<f64> {
    let v = a.to_f64();
    (v.is_finite() && LogAmplitude::from_f64(v) == a).then_some(v)
}

impl AmpFile {
    fn from_amp(a: LogAmplitude) -> Self {
        match exact_linear(a) {
            Some(c) => AmpFile { c: Some(c), log_c: None },
            None => AmpFile { c: None, log_c: Some(pair_of(a)) },
        }
    }

    fn to_amp(&self) -> Result<LogAmplitude> {
        match (self.c, self.log_c) {
            (Some(c), None) => Ok(LogAmplitude::from_f64(c)),
            (None, Some(p)) => amp_of_pair(p),
            (None, None) => Ok(LogAmplitude::ONE),
            (Some(_), Some(_)) => Err(Error::Parse("tail gives both c and log_c".into())),
        }
    }
}

fn spectrum_to_file(s: &Spectrum) -> SpectrumFile {
    match s.kind() {
        SpectrumKind::Heat => SpectrumFile::Heat { modes: s.len() },
        SpectrumKind::Custom => SpectrumFile::Custom {
            eigenvalues: s.eigenvalues().to_vec(),
        },
    }
}

fn spectrum_from_file(f: &SpectrumFile) -> Result<Spectrum> {
    match f {
        SpectrumFile::Heat { modes } => Ok(Spectrum::heat(*modes)),
        SpectrumFile::Custom { eigenvalues } => Spectrum::custom(eigenvalues.clone()),
    }
}

fn coeffs_to_file(c: &[LogAmplitude], encoding: Encoding) -> CoeffsFile {
    let linear = match encoding {
        Encoding::Log => None,
        Encoding::Linear => Some(c.iter().map(|a| a.to_f64()).collect()),
        Encoding::Auto => c.iter().map(|a| exact_linear(*a)).collect::<Option<Vec<f64>>>(),
    };
    match linear {
        Some(values) => CoeffsFile::Linear { values },
        None => CoeffsFile::Log {
            values: c.iter().map(|a| pair_of(*a)).collect(),
        },
    }
}

fn coeffs_from_file(f: &CoeffsFile) -> Result<Vec<LogAmplitude>> {
    match f {
        CoeffsFile::Linear { values } => {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(invalid("linear coefficients must be finite"));
            }
            Ok(values.iter().map(|&v| LogAmplitude::from_f64(v)).collect())
        }
        CoeffsFile::Log { values } => values.iter().map(|&p| amp_of_pair(p)).collect(),
    }
}

fn tail_to_file(t: &TailModel, may_grow: bool) -> TailFile {
    let law = match t.terms() {
        [] => TailLaw::Zero,
        [one] => {
            let amp = AmpFile::from_amp(one.amp);
            if one.power == 0.0 {
                TailLaw::ExpDecay { gamma: one.damping, amp }
            } else if one.damping == 0.0 {
                TailLaw::PowerDecay { p: one.power, amp }
            } else {
                TailLaw::DampedPower {
                    p: one.power,
                    gamma: one.damping,
                    amp,
                }
            }
        }
        many => TailLaw::Sum {
            terms: many
                .iter()
                .map(|t| TermFile {
                    p: t.power,
                    gamma: t.damping,
                    amp: AmpFile::from_amp(t.amp),
                })
                .collect(),
        },
    };
    TailFile { law, may_grow }
}

fn tail_from_file(f: &TailFile) -> Result<TailModel> {
    let term = |p: f64, gamma: f64, amp: &AmpFile| -> Result<TailTerm> {
        Ok(TailTerm {
            amp: amp.to_amp()?,
            power: p,
            damping: gamma,
        })
    };
    let terms = match &f.law {
        TailLaw::Zero => vec![],
        TailLaw::ExpDecay { gamma, amp } => vec![term(0.0, *gamma, amp)?],
        TailLaw::PowerDecay { p, amp } => vec![term(*p, 0.0, amp)?],
        TailLaw::DampedPower { p, gamma, amp } => vec![term(*p, *gamma, amp)?],
        TailLaw::Sum { terms } => terms
            .iter()
            .map(|t| term(t.p, t.gamma, &t.amp))
            .collect::<Result<_>>()?,
    };
    Ok(TailModel::from_terms(terms))
}

fn state_to_file(s: &SpectralState, encoding: Encoding) -> StateFile {
    StateFile {
        spectrum: spectrum_to_file(s.spectrum()),
        coeffs: coeffs_to_file(s.coeffs(), encoding),
        tail: tail_to_file(s.tail(), false),
    }
}

fn state_from_file(f: &StateFile) -> Result<SpectralState> {
    if f.tail.may_grow {
        return Err(invalid("a state tail cannot be marked may_grow; that flag is for functionals"));
    }
    SpectralState::new(
        spectrum_from_file(&f.spectrum)?,
        coeffs_from_file(&f.coeffs)?,
        tail_from_file(&f.tail)?,
    )
}

fn to_pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("file formats always serialize")
}

pub fn state_to_json(s: &SpectralState, encoding: Encoding) -> String {
    to_pretty(&state_to_file(s, encoding))
}

pub fn state_to_value(s: &SpectralState, encoding: Encoding) -> Value {
    serde_json::to_value(state_to_file(s, encoding)).expect("file formats always serialize")
}

pub fn state_from_json(text: &str) -> Result<SpectralState> {
    state_from_file(&serde_json::from_str(text)?)
}

pub fn extended_to_json(z: &ExtendedState, encoding: Encoding) -> String {
    to_pretty(&ExtendedFile {
        offset: z.offset(),
        rep: state_to_file(z.rep(), encoding),
    })
}

pub fn extended_to_value(z: &ExtendedState, encoding: Encoding) -> Value {
    serde_json::to_value(ExtendedFile {
        offset: z.offset(),
        rep: state_to_file(z.rep(), encoding),
    })
    .expect("file formats always serialize")
}

pub fn extended_from_json(text: &str) -> Result<ExtendedState> {
    let f: ExtendedFile = serde_json::from_str(text)?;
    ExtendedState::new(f.offset, state_from_file(&f.rep)?)
}

/// Either kind of state, as found in an input file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyState {
    Plain(SpectralState),
    Extended(ExtendedState),
}

impl AnyState {
    pub fn into_extended(self) -> ExtendedState {
        match self {
            AnyState::Plain(s) => ExtendedState::lift(s),
            AnyState::Extended(z) => z,
        }
    }
}

/// Reads a plain state, or an extended one when the document has an `offset`.
pub fn any_from_json(text: &str) -> Result<AnyState> {
    let v: Value = serde_json::from_str(text)?;
    if v.get("offset").is_some() {
        Ok(AnyState::Extended(extended_from_json(text)?))
    } else {
        Ok(AnyState::Plain(state_from_json(text)?))
    }
}

pub fn functional_to_json(f: &Functional, encoding: Encoding) -> String {
    to_pretty(&StateFile {
        spectrum: spectrum_to_file(f.spectrum()),
        coeffs: coeffs_to_file(f.coeffs(), encoding),
        tail: tail_to_file(f.tail(), true),
    })
}

pub fn functional_from_json(text: &str) -> Result<Functional> {
    let f: StateFile = serde_json::from_str(text)?;
    let tail = tail_from_file(&f.tail)?;
    if !f.tail.may_grow && tail.terms().iter().any(|t| t.damping < 0.0) {
        return Err(invalid("a growing functional tail must be marked \"may_grow\": true"));
    }
    Functional::new(spectrum_from_file(&f.spectrum)?, coeffs_from_file(&f.coeffs)?, tail)
}

pub fn classification_to_value(c: &Classification) -> Value {
    let h = c.horizon();
    let class = match c.class {
        Class::InD => "D",
        Class::InDtUpTo(_) => "Dt",
        Class::InZ => "Z",
    };
    let horizon = if h.is_infinite() {
        Value::from("inf")
    } else {
        Value::from(h.value())
    };
    serde_json::json!({
        "class": class,
        "horizon": horizon,
        "open": h.is_open(),
        "certificate": c.certificate,
    })
}

pub fn classification_to_json(c: &Classification) -> String {
    to_pretty(&classification_to_value(c))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum KindFile {
    Const { c: f64 },
    Exp { c: f64, mu: f64 },
    Table { times: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModeFile {
    n: usize,
    #[serde(flatten)]
    kind: KindFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ForcingFile {
    modes: Vec<ModeFile>,
}

pub fn forcing_from_json(text: &str) -> Result<Forcing> {
    let f: ForcingFile = serde_json::from_str(text)?;
    let modes = f
        .modes
        .into_iter()
        .map(|m| {
            if m.n == 0 {
                return Err(invalid("forcing mode indices are 1-based"));
            }
            let kind = match m.kind {
                KindFile::Const { c } => ForcingKind::Const { c },
                KindFile::Exp { c, mu } => ForcingKind::Exp { c, mu },
                KindFile::Table { times, values } => ForcingKind::table(times, values)?,
            };
            Ok(ModeForcing { n: m.n, kind })
        })
        .collect::<Result<_>>()?;
    Ok(Forcing { modes })
}

/// Fails for callable forcing, which has no file representation.
pub fn forcing_to_json(f: &Forcing) -> Result<String> {
    let modes = f
        .modes
        .iter()
        .map(|m| {
            let kind = match &m.kind {
                ForcingKind::Const { c } => KindFile::Const { c: *c },
                ForcingKind::Exp { c, mu } => KindFile::Exp { c: *c, mu: *mu },
                ForcingKind::Table { times, values } => KindFile::Table {
                    times: times.clone(),
                    values: values.clone(),
                },
                ForcingKind::Sampled(_) => {
                    return Err(invalid("callable forcing cannot be serialized; tabulate it first"))
                }
            };
            Ok(ModeFile { n: m.n, kind })
        })
        .collect::<Result<_>>()?;
    Ok(to_pretty(&ForcingFile { modes }))
}
