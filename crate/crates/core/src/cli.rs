//! Command-line interface. Every command prints JSON or CSV to stdout with
//! floats at 12 significant digits.
//!
//! Exit codes: 0 success, 2 bad input or flags, 3 SDP failure,
//! 4 covering unreachable, 1 anything else.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bounds::{
    axial_optimal, curve_csv, curve_sweep, lower_family, lower_sharpness, upper_family,
    upper_sharpness,
};
use crate::channels::{
    choi, diamond_distance_with, optimal_mix_with, unitary_distance, ChoiOperator,
};
use crate::error::{Error, Result};
use crate::fmt::{round_json, round_sig};
use crate::linalg::{ComplexMatrix, HermitianMatrix, Unitary};
use crate::sdp::SdpOptions;
use crate::synth::{named_gate, prob_synth, rz, sample, GateSet, PoolParams, SynthParams};

#[derive(Parser, Debug)]
#[command(name = "usynth", version, about = "Probabilistic unitary synthesis toolkit")]
pub struct Cli {
    /// SDP duality-gap tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub gap_tol: f64,
    /// SDP feasibility tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub feas_tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Half-diamond distance between two unitaries or Choi operators.
    Diamond { a: PathBuf, b: PathBuf },
    /// Optimal mixture of the candidates in a directory of JSON files.
    Mixopt {
        target: PathBuf,
        candidates: PathBuf,
        /// Also write the result JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probabilistic single-qubit synthesis over a brute-force pool.
    Synth1q {
        /// Named gate (I, X, Y, Z, H, S, Sdg, T, Tdg, Rz(angle)) or a JSON file.
        #[arg(long)]
        target: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
        /// Comma-separated gate names or a gate-set JSON file.
        #[arg(long, default_value = "H,T,Tdg,S,Sdg")]
        gateset: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        #[arg(long, default_value_t = 1e-9)]
        dedup_tol: f64,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long, default_value_t = 0.5)]
        c_prime: f64,
        #[arg(long, default_value_t = crate::synth::DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Lower and upper bound curves as CSV.
    Bounds {
        #[arg(long)]
        d: usize,
        /// `start:stop:step`, stop inclusive.
        #[arg(long, default_value = "0:1:0.05")]
        eps_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mixing value over a meshed extremal family.
    Sharpness {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 0.05)]
        mesh: f64,
        /// Fail when the mesh slack exceeds this.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Optimal mixture of axial rotations.
    Axial {
        #[arg(long, allow_hyphen_values = true)]
        target_theta: String,
        /// Comma-separated angles; `pi` expressions such as `2pi/3` are accepted.
        #[arg(long, allow_hyphen_values = true)]
        thetas: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Lower,
    Upper,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SdpFailure { .. } => 3,
        Error::CoveringUnreachable { .. } => 4,
        Error::Parse(_)
        | Error::InvalidArgument(_)
        | Error::MeshTooCoarse { .. }
        | Error::NotHermitian { .. }
        | Error::NotUnitary { .. }
        | Error::NotDensity(_)
        | Error::DimensionMismatch(_)
        | Error::NonFinite
        | Error::NotUnit { .. }
        | Error::EmptyCandidates => 2,
        _ => 1,
    }
}

/// Angle from a float or a `pi` expression: `pi`, `-pi/4`, `2pi/3`, `2*pi/3`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim().to_lowercase().replace('π', "pi");
    let bad = || Error::Parse(format!("bad angle {s:?}"));
    if let Ok(v) = t.parse::<f64>() {
        return v.is_finite().then_some(v).ok_or_else(bad);
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let num = num.trim();
    let coef = match num.strip_suffix("pi") {
        Some(c) => match c.trim().trim_end_matches('*').trim() {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        },
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let v = coef * std::f64::consts::PI / den;
    v.is_finite().then_some(v).ok_or_else(bad)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse_json(path: &Path) -> Result<Value> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// A channel read from JSON: a bare matrix (unitary if it is one, Choi
/// operator otherwise) or `{"kind": "unitary" | "choi", "matrix": ...}`.
pub struct Channel {
    pub choi: ChoiOperator,
    pub unitary: Option<Unitary>,
}

fn channel_from_value(v: &Value) -> Result<Channel> {
    let (kind, m) = match v.get("matrix") {
        Some(m) => (v.get("kind").and_then(Value::as_str), m),
        None => (None, v),
    };
    let m = ComplexMatrix::from_json_value(m)?;
    let as_unitary = || -> Result<Channel> {
        let u = Unitary::new(m.clone())?;
        Ok(Channel {
            choi: choi(&u),
            unitary: Some(u),
        })
    };
    let as_choi = || -> Result<Channel> {
        let n = m.rows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::DimensionMismatch(format!("Choi operator of size {n}")));
        }
        Ok(Channel {
            choi: ChoiOperator::new(HermitianMatrix::new(m.clone())?, (d, d))?,
            unitary: None,
        })
    };
    match kind {
        Some("unitary") => as_unitary(),
        Some("choi") => as_choi(),
        Some(k) => Err(Error::Parse(format!("unknown kind {k:?}"))),
        None if m.is_square() && m.unitary_deviation() < 1e-8 => as_unitary(),
        None => as_choi(),
    }
}

pub fn load_channel(path: &Path) -> Result<Channel> {
    channel_from_value(&parse_json(path)?)
}

/// Named gate, `Rz(angle)`, or a unitary JSON file.
pub fn load_target(spec: &str) -> Result<Unitary> {
    if let Some(g) = named_gate(spec) {
        return Ok(g);
    }
    if let Some(arg) = spec.strip_prefix("Rz(").and_then(|r| r.strip_suffix(')')) {
        return Ok(rz(parse_angle(arg)?));
    }
    let path = Path::new(spec);
    if path.exists() {
        return load_channel(path)?
            .unitary
            .ok_or_else(|| Error::Parse(format!("{spec}: target must be a unitary")));
    }
    Err(Error::Parse(format!("unknown target {spec:?}")))
}

fn load_gateset(spec: &str) -> Result<GateSet> {
    let path = Path::new(spec);
    if path.exists() {
        return GateSet::from_json_str(&read(path)?);
    }
    let names: Vec<&str> = spec.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    GateSet::from_names(&names)
}

/// `start:stop:step` with `stop` included up to rounding.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Parse(format!("bad grid {s:?}, expected start:stop:step"));
    let [a, b, step] = parts.as_slice() else {
        return Err(bad());
    };
    let (a, b, step): (f64, f64, f64) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
        step.trim().parse().map_err(|_| bad())?,
    );
    if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| round_sig(a + k as f64 * step)).collect())
}

fn pretty(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v)).expect("JSON serializes");
    s.push('\n');
    s
}

fn write_out(path: &Path, s: &str) -> Result<()> {
    fs::write(path, s).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Runs one command and returns what it prints.
pub fn run(cli: &Cli) -> Result<String> {
    let opts = SdpOptions {
        gap_tol: cli.gap_tol,
        feas_tol: cli.feas_tol,
        ..SdpOptions::default()
    };
    match &cli.command {
        Command::Diamond { a, b } => {
            let (a, b) = (load_channel(a)?, load_channel(b)?);
            let c = diamond_distance_with(&a.choi, &b.choi, &opts)?;
            Ok(pretty(json!({ "value": c.value, "gap": c.gap })))
        }
        Command::Mixopt {
            target,
            candidates,
            out,
        } => {
            let t = load_channel(target)?;
            let mut files: Vec<PathBuf> = fs::read_dir(candidates)
                .map_err(|e| Error::Parse(format!("{}: {e}", candidates.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            let cands = files.iter().map(|f| load_channel(f)).collect::<Result<Vec<_>>>()?;
            let chois: Vec<ChoiOperator> = cands.iter().map(|c| c.choi.clone()).collect();
            let mix = optimal_mix_with(&t.choi, &chois, &opts)?;
            let mut min_distance = f64::INFINITY;
            for c in &cands {
                let r = match (&t.unitary, &c.unitary) {
                    (Some(u), Some(v)) => unitary_distance(u, v)?,
                    _ => diamond_distance_with(&t.choi, &c.choi, &opts)?.value,
                };
                min_distance = min_distance.min(r);
            }
            let p: Vec<Value> = files
                .iter()
                .zip(mix.p.weights())
                .map(|(f, w)| {
                    let name = f.file_stem().map(|s| s.to_string_lossy().into_owned());
                    json!({ "name": name, "p": w })
                })
                .collect();
            let s = pretty(json!({
                "value": mix.value,
                "gap": mix.gap,
                "min_distance": min_distance,
                "p": p,
            }));
            if let Some(o) = out {
                write_out(o, &s)?;
            }
            Ok(s)
        }
        Command::Synth1q {
            target,
            eps,
            delta,
            gateset,
            seed,
            samples,
            max_len,
            dedup_tol,
            c,
            c_prime,
            budget,
        } => {
            let u = load_target(target)?;
            let gs = load_gateset(gateset)?;
            let params = SynthParams {
                c: *c,
                c_prime: *c_prime,
            };
            let pool = PoolParams {
                max_len: *max_len,
                dedup_tol: *dedup_tol,
                budget: *budget,
            };
            let r = prob_synth(&u, *eps, *delta, &gs, *seed, params, pool)?;
            let drawn: Vec<&[String]> = sample(&r.p, *seed, *samples)
                .into_iter()
                .map(|i| r.support[i].labels.as_slice())
                .collect();
            let mut v = r.to_json();
            v["samples"] = json!(drawn);
            Ok(pretty(v))
        }
        Command::Bounds { d, eps_grid, out } => {
            let rows = curve_sweep(*d, &parse_grid(eps_grid)?)?;
            let csv = curve_csv(&rows);
            match out {
                Some(o) => {
                    write_out(o, &csv)?;
                    Ok(String::new())
                }
                None => Ok(csv),
            }
        }
        Command::Sharpness {
            d,
            eps,
            family,
            mesh,
            tolerance,
        } => {
            if let Some(tol) = tolerance {
                match family {
                    Family::Lower => lower_family(*eps, *d, *mesh)?,
                    Family::Upper => upper_family(*eps, *d, *mesh)?,
                }
                .require_slack(*tol)?;
            }
            let s = match family {
                Family::Lower => lower_sharpness(*eps, *d, *mesh)?,
                Family::Upper => upper_sharpness(*eps, *d, *mesh)?,
            };
            let mut v = serde_json::to_value(&s).expect("serializes");
            v["family"] = json!(match family {
                Family::Lower => "lower",
                Family::Upper => "upper",
            });
            v["within_slack"] = json!(s
                .slack
                .map(|sl| (s.value - s.expected).abs() <= sl + 1e-7));
            Ok(pretty(v))
        }
        Command::Axial {
            target_theta,
            thetas,
        } => {
            let t = parse_angle(target_theta)?;
            let th = thetas
                .split(',')
                .map(parse_angle)
                .collect::<Result<Vec<f64>>>()?;
            let (p, value) = axial_optimal(t, &th)?;
            let det = th
                .iter()
                .map(|x| ((t - x) / 2.0).sin().abs())
                .fold(f64::INFINITY, f64::min);
            Ok(pretty(json!({
                "value": value,
                "det_error": det,
                "p": p.weights(),
            })))
        }
    }
}

fn init_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("USYNTH_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("USYNTH_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Binary entry point.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(s) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("1/0").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0:0:0.1").unwrap(), vec![0.0]);
        assert_eq!(parse_grid("0:0.3:0.1").unwrap().len(), 4);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn targets() {
        assert!(load_target("T").is_ok());
        let r = load_target("Rz(pi/2)").unwrap();
        assert!(r.as_matrix().max_abs() > 0.0);
        assert!(matches!(load_target("Q"), Err(Error::Parse(_))));
    }

    #[test]
    fn codes() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(
            exit_code(&Error::CoveringUnreachable {
                achieved: 1.0,
                required: 0.5
            }),
            4
        );
    }
}
