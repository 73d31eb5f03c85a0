use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use semiext::density::{lemma1_iterate, truncate_to_d, GrowthBound, Hypothesis, TruncationOracle};
use semiext::duality::{functional_to_e, pairing_log};
use semiext::inhomogeneous::{duhamel_evolve, QuadratureConfig, QuadratureRule};
use semiext::io::{
    any_from_json, classification_to_value, extended_to_value, forcing_from_json, functional_from_json,
    state_to_value, AnyState, Encoding,
};
use semiext::reversibility::{backward_evolve, classify, horizon};
use semiext::shift::{d_is_trivial, distance_to_range, prop4_witness, uniqueness_counterexample, GridFunction};
use semiext::trajectory::emit_trajectory;
use semiext::{Error, ExtendedState, LogAmplitude, SpectralState};

mod verify;

#[derive(Parser)]
#[command(name = "semiext", version, about = "Backward extension of diagonal linear semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Coefficient encoding for JSON state output.
    #[arg(long, global = true, value_enum, default_value_t = EncodingArg::Auto)]
    encoding: EncodingArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Linear,
    Log,
    Auto,
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Linear => Encoding::Linear,
            EncodingArg::Log => Encoding::Log,
            EncodingArg::Auto => Encoding::Auto,
        }
    }
}

#[derive(Args)]
struct Input {
    /// State file (plain, or extended when it has an "offset").
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Report whether the state lies in D, in D_t up to its horizon, or in Z.
    Classify(Input),
    /// Backward horizon of the state.
    Horizon(Input),
    /// Forward evolution by t >= 0.
    Evolve {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
    },
    /// Backward evolution by t, which must lie inside the horizon.
    Backward {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
    },
    /// Evolution on the extended space, for any real t.
    GroupEvolve {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// Reduce the result to its smallest offset.
        #[arg(long)]
        canonical: bool,
    },
    /// Pairing of a D state with an extended state or a functional.
    Pair {
        #[arg(long, value_name = "FILE")]
        x: PathBuf,
        #[arg(long, value_name = "FILE", required_unless_present = "functional", conflicts_with = "functional")]
        z: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        functional: Option<PathBuf>,
    },
    /// Affine evolution with a forcing term.
    Duhamel {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "FILE")]
        forcing: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = RuleArg::Fitted)]
        rule: RuleArg,
        /// Double the steps until the error estimate is below this.
        #[arg(long)]
        adaptive_tol: Option<f64>,
    },
    /// Approximate the state by a point of D.
    Density {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = DensityMethod::Truncate)]
        method: DensityMethod,
        #[arg(long, default_value_t = 6)]
        iters: usize,
        /// Growth bound constant M in ||T_t|| <= M e^{wt}.
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        w: f64,
    },
    /// Range distances and non-density witness on the nilpotent shift.
    ShiftDemo {
        #[arg(long, default_value_t = 1000)]
        resolution: usize,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        /// Grid function file; defaults to the constant 1.
        #[arg(long = "in", value_name = "FILE")]
        input: Option<PathBuf>,
    },
    /// Sampled trajectory as CSV.
    Trajectory {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_negative_numbers = true)]
        t_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        t_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
    /// Run invariant suites and print a pass/fail table.
    Verify {
        #[arg(long, value_enum, default_value_t = verify::SuiteArg::All)]
        suite: verify::SuiteArg,
        /// Mode count for the suites that take one.
        #[arg(long)]
        modes: Option<usize>,
        /// Overrides every suite's default tolerance.
        #[arg(long, env = "SEMIEXT_TOL")]
        tol: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Fitted,
    Simpson,
}

#[derive(Clone, Copy, ValueEnum)]
enum DensityMethod {
    Truncate,
    Iterate,
}

enum Failure {
    Usage(String),
    Lib(Error),
    /// Carries the report, which is still written out.
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Run<T> = Result<T, Failure>;

fn read(path: &Path) -> Run<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_any(path: &Path) -> Run<AnyState> {
    Ok(any_from_json(&read(path)?)?)
}

fn load_plain(path: &Path) -> Run<SpectralState> {
    match load_any(path)? {
        AnyState::Plain(x) => Ok(x),
        AnyState::Extended(z) => {
            let c = z.canonicalize();
            if c.offset() == 0.0 {
                Ok(c.into_parts().1)
            } else {
                // E_0 is H itself
                Err(Error::NotInEMinusT { t: 0.0, offset: c.offset() }.into())
            }
        }
    }
}

fn log_value(a: LogAmplitude) -> Value {
    let v = a.to_f64();
    json!({
        "value": if v.is_finite() { json!(v) } else { Value::Null },
        "sign": a.sign(),
        "log_mag": if a.is_zero() { Value::Null } else { json!(a.log_mag()) },
    })
}

fn state_csv(offset: Option<f64>, x: &SpectralState) -> String {
    let mut out = String::from(if offset.is_some() { "offset,n,eigenvalue,value,sign,log_mag\n" } else { "n,eigenvalue,value,sign,log_mag\n" });
    for (k, (c, l)) in x.coeffs().iter().zip(x.spectrum().eigenvalues()).enumerate() {
        if let Some(o) = offset {
            out.push_str(&format!("{o:?},"));
        }
        let log = if c.is_zero() { String::new() } else { format!("{:?}", c.log_mag()) };
        out.push_str(&format!("{},{l:?},{:?},{},{log}\n", k + 1, c.to_f64(), c.sign()));
    }
    out
}

struct Ctx {
    format: Format,
    encoding: Encoding,
}

impl Ctx {
    fn state(&self, x: &SpectralState) -> String {
        match self.format {
            Format::Json => pretty(&state_to_value(x, self.encoding)),
            Format::Csv => state_csv(None, x),
        }
    }

    fn extended(&self, z: &ExtendedState) -> String {
        match self.format {
            Format::Json => pretty(&extended_to_value(z, self.encoding)),
            Format::Csv => state_csv(Some(z.offset()), z.rep()),
        }
    }

    fn json_only(&self, verb: &str, v: &Value) -> Run<String> {
        match self.format {
            Format::Json => Ok(pretty(v)),
            Format::Csv => Err(Failure::Usage(format!("{verb} has no CSV form"))),
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn horizon_value(h: semiext::Horizon) -> Value {
    if h.is_infinite() {
        json!("inf")
    } else {
        json!(h.value())
    }
}

fn run(cli: Cli) -> Run<String> {
    let ctx = Ctx {
        format: cli.format,
        encoding: cli.encoding.into(),
    };
    match cli.command {
        Command::Classify(input) => {
            let c = classify(&load_plain(&input.input)?);
            let v = classification_to_value(&c);
            match ctx.format {
                Format::Json => Ok(pretty(&v)),
                Format::Csv => Ok(format!("class,horizon,open\n{},{},{}\n", v["class"].as_str().unwrap_or(""), v["horizon"].to_string().trim_matches('"'), v["open"])),
            }
        }
        Command::Horizon(input) => {
            let h = horizon(&load_plain(&input.input)?);
            match ctx.format {
                Format::Json => Ok(pretty(&json!({"horizon": horizon_value(h), "open": h.is_open()}))),
                Format::Csv => Ok(format!("horizon,open\n{},{}\n", h.value(), h.is_open())),
            }
        }
        Command::Evolve { input, t } => {
            if !(t >= 0.0) {
                return Err(Failure::Usage(format!("evolve needs t >= 0, got {t}; use backward or group-evolve")));
            }
            match load_any(&input.input)? {
                AnyState::Plain(x) => Ok(ctx.state(&x.evolve(t)?)),
                AnyState::Extended(z) => Ok(ctx.extended(&z.group_evolve(t).canonicalize())),
            }
        }
        Command::Backward { input, t } => {
            let b = backward_evolve(&load_plain(&input.input)?, t)?;
            Ok(ctx.state(&b.state))
        }
        Command::GroupEvolve { input, t, canonical } => {
            if !t.is_finite() {
                return Err(Failure::Usage(format!("t must be finite, got {t}")));
            }
            let z = load_any(&input.input)?.into_extended().group_evolve(t);
            Ok(ctx.extended(&if canonical { z.canonicalize() } else { z }))
        }
        Command::Pair { x, z, functional } => {
            let x = load_plain(&x)?;
            let z = match (z, functional) {
                (Some(p), _) => load_any(&p)?.into_extended(),
                (None, Some(p)) => functional_to_e(&functional_from_json(&read(&p)?)?)?,
                (None, None) => return Err(Failure::Usage("pair needs --z or --functional".into())),
            };
            ctx.json_only("pair", &log_value(pairing_log(&x, &z)?))
        }
        Command::Duhamel { input, forcing, t, steps, rule, adaptive_tol } => {
            let x0 = load_plain(&input.input)?;
            let f = forcing_from_json(&read(&forcing)?)?;
            let q = QuadratureConfig {
                rule: match rule {
                    RuleArg::Fitted => QuadratureRule::ExpFittedSimpson,
                    RuleArg::Simpson => QuadratureRule::Simpson,
                },
                steps,
                adaptive_tol,
            };
            let r = duhamel_evolve(&x0, &f, t, &q)?;
            match ctx.format {
                Format::Json => Ok(pretty(&json!({
                    "state": state_to_value(&r.state, ctx.encoding),
                    "error_estimate": r.error_estimate,
                }))),
                Format::Csv => Ok(state_csv(None, &r.state)),
            }
        }
        Command::Density { input, eps, method, iters, m, w } => {
            let x0 = load_plain(&input.input)?;
            let (out, cert) = match method {
                DensityMethod::Truncate => truncate_to_d(&x0, eps)?,
                DensityMethod::Iterate => lemma1_iterate(
                    &x0,
                    eps,
                    &mut TruncationOracle,
                    GrowthBound::new(m, w)?,
                    iters,
                    Hypothesis::LinearDenseRange,
                )?,
            };
            match ctx.format {
                Format::Json => Ok(pretty(&json!({
                    "state": state_to_value(&out, ctx.encoding),
                    "certificate": cert,
                    "distance": out.distance(&x0)?,
                }))),
                Format::Csv => Ok(state_csv(None, &out)),
            }
        }
        Command::ShiftDemo { resolution, radius, input } => {
            let f = match input {
                Some(p) => serde_json::from_str::<GridFunction>(&read(&p)?).map_err(Error::from)?,
                None => GridFunction::constant(resolution, 1.0)?,
            };
            let r = f.resolution();
            let times: Vec<f64> = (0..=r).map(|k| k as f64 / r as f64).collect();
            let distances = times
                .iter()
                .map(|&t| distance_to_range(&f, t))
                .collect::<semiext::Result<Vec<f64>>>()?;
            match ctx.format {
                Format::Csv => {
                    let mut s = String::from("t,distance\n");
                    for (t, d) in times.iter().zip(&distances) {
                        s.push_str(&format!("{t:?},{d:?}\n"));
                    }
                    Ok(s)
                }
                Format::Json => {
                    let (a, b) = uniqueness_counterexample(r)?;
                    Ok(pretty(&json!({
                        "resolution": r,
                        "radius": radius,
                        "witness": prop4_witness(&f, radius)?,
                        "d_is_trivial": d_is_trivial(r)?,
                        "uniqueness_counterexample": {"f": a, "g": b, "images_equal": true},
                        "distances": times.iter().zip(&distances).map(|(t, d)| json!([t, d])).collect::<Vec<_>>(),
                    })))
                }
            }
        }
        Command::Trajectory { input, t_min, t_max, steps } => {
            if ctx.format == Format::Json {
                return Err(Failure::Usage("trajectory output is CSV only; pass --format csv".into()));
            }
            Ok(emit_trajectory(&load_any(&input.input)?, t_min, t_max, steps)?)
        }
        Command::Verify { suite, modes, tol } => {
            if let Some(t) = tol {
                if !(t > 0.0) {
                    return Err(Failure::Usage(format!("tolerance must be > 0, got {t}")));
                }
            }
            let report = verify::run(suite, modes, tol);
            if report.all_passed() {
                Ok(report.table())
            } else {
                Err(Failure::Verification(report.table()))
            }
        }
    }
}

fn error_json(e: &Error) -> Value {
    let kind = match e {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::HorizonExceeded { .. } => "horizon_exceeded",
        Error::NotInD { .. } => "not_in_d",
        Error::NotInEMinusT { .. } => "not_in_e_minus_t",
        Error::NotInDomain(_) => "not_in_domain",
        Error::OracleFailed { .. } => "oracle_failed",
        Error::Unrepresentable(_) => "unrepresentable",
        Error::TruncationTooLarge { .. } => "truncation_too_large",
        Error::Parse(_) => "parse",
    };
    let mut v = json!({"error": kind, "message": e.to_string()});
    match e {
        Error::HorizonExceeded { horizon, open, requested } => {
            v["horizon"] = json!(horizon);
            v["open"] = json!(open);
            v["requested"] = json!(requested);
        }
        Error::NotInD { horizon } => v["horizon"] = json!(horizon),
        Error::NotInEMinusT { t, offset } => {
            v["t"] = json!(t);
            v["offset"] = json!(offset);
        }
        Error::OracleFailed { step, partial, .. } => {
            v["step"] = json!(step);
            v["partial"] = json!(partial);
        }
        _ => {}
    }
    v
}

fn emit(out: Option<&Path>, text: &str) -> bool {
    match out {
        Some(path) => match fs::write(path, text) {
            Ok(()) => true,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                false
            }
        },
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                Ok(()) => true,
                // a closed pipe (e.g. `| head`) is not an error
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => true,
                Err(e) => {
                    eprintln!("error: cannot write to stdout: {e}");
                    false
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli) {
        Ok(text) => ExitCode::from(if emit(out.as_deref(), &text) { 0 } else { 2 }),
        Err(Failure::Verification(report)) => {
            emit(out.as_deref(), &report);
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("{}", serde_json::to_string(&error_json(&e)).expect("values serialize"));
            ExitCode::from(if e.is_domain() { 3 } else { 2 })
        }
    }
}
