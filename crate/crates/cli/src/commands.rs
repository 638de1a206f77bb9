//! Subcommand implementations. Each returns the parameter echo and the
//! results as JSON values; [`crate::run`] wraps them into a report.

use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};
use wiretap_core::additivity::{additivity_probe, random_channels, QccChannel};
use wiretap_core::channels::{bec, bsc, ChannelConfig};
use wiretap_core::entropy::BinaryObjective;
use wiretap_core::preprocessing::{
    compose, parameter_grid, parity_preprocessor, parity_rate, rate_curve, repcode_optimal_rate,
    repcode_rate, repetition_optimal_rate, repetition_p1_rate, write_dat, zero_crossing,
};
use wiretap_core::private_info::{
    classify as classify_channel, p0, p1_binary, solve_threshold, upper_bound,
};
use wiretap_core::{quantum_bob, Error, Family, Tolerances};

use crate::error::{CliError, CliResult};
use crate::report::write_atomic;
use crate::{
    AdditivityArgs, ClassifyArgs, CurveArgs, ProbeChannel, RateArgs, Scheme, ThresholdArgs,
};

/// Largest repetition block whose composed channel is still optimized
/// densely; longer blocks report the uniform-input rate only.
pub const DENSE_REPETITION_BLOCK: usize = 6;

pub struct CommandOutput {
    pub parameters: Value,
    pub results: Value,
    pub seed: Option<u64>,
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

pub fn classify(args: &ClassifyArgs) -> CliResult<CommandOutput> {
    let (channel, parameters) = match (&args.config, args.family, args.param) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Read {
                path: path.clone(),
                source,
            })?;
            let w = ChannelConfig::from_json(&text)?.build()?;
            (w, json!({ "config": path }))
        }
        (None, Some(family), Some(param)) => {
            let family = Family::from(family);
            (
                family.channel(param)?,
                json!({ "family": family, "param": param }),
            )
        }
        _ => {
            return Err(CliError::Usage(
                "give --config, or --family with --param".into(),
            ))
        }
    };
    let report = classify_channel(&channel)?;
    let mut results = to_value(&report);
    if channel.input_size() == 2 {
        let (p0_value, p0_input) = p0(&channel)?;
        results["private_information"] = json!({
            "p1": p1_binary(&channel)?.p1,
            "p0": p0_value,
            "p0_input": p0_input.probabilities(),
            "upper_bound": upper_bound(&channel)?,
        });
    }
    Ok(CommandOutput {
        parameters,
        results,
        seed: None,
    })
}

pub fn threshold(args: &ThresholdArgs) -> CliResult<CommandOutput> {
    let value = solve_threshold(args.kind)?;
    Ok(CommandOutput {
        parameters: json!({ "kind": args.kind }),
        results: json!({ "kind": args.kind, "value": value, "residual": args.kind.residual(value) }),
        seed: None,
    })
}

pub fn curve(args: &CurveArgs) -> CliResult<CommandOutput> {
    let (start, end) = args.range;
    let grid = parameter_grid(start, end, args.step)?;
    let points = rate_curve(args.family, &grid)?;
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.dat", args.family)));
    let mut dat = Vec::new();
    write_dat(&mut dat, &points).map_err(Error::from)?;
    write_atomic(&output, &dat)?;

    let band = Tolerances::DEFAULT.zero_band;
    let max = points
        .iter()
        .cloned()
        .max_by(|a, b| a.rate.total_cmp(&b.rate));
    let last_positive = points.iter().rev().find(|p| p.rate > band);
    Ok(CommandOutput {
        parameters: json!({
            "family": args.family,
            "range": [start, end],
            "step": args.step,
            "output": output,
        }),
        results: json!({
            "output": output,
            "count": points.len(),
            "zero_crossing": zero_crossing(&points, band),
            "last_positive": last_positive,
            "max": max,
            "points": points,
        }),
        seed: None,
    })
}

pub fn rate(args: &RateArgs) -> CliResult<CommandOutput> {
    let parameters = json!({
        "family": Family::from(args.family),
        "param": args.param,
        "scheme": match args.scheme { Scheme::Parity => "parity", Scheme::Rep => "rep" },
        "n": args.n,
        "q": args.q,
    });
    let results = match (args.scheme, Family::from(args.family)) {
        (Scheme::Parity, Family::Bob) => parity_results(args.param, args.q)?,
        (Scheme::Rep, Family::Eve) => repetition_results(args.param, args.n, args.q)?,
        (Scheme::Parity, Family::Eve) => {
            return Err(Error::Unsupported(
                "the parity scheme is defined for the bob family".into(),
            )
            .into())
        }
        (Scheme::Rep, Family::Bob) => {
            return Err(Error::Unsupported(
                "the repetition scheme is defined for the eve family".into(),
            )
            .into())
        }
    };
    Ok(CommandOutput {
        parameters,
        results,
        seed: None,
    })
}

/// `½ [f_c(½) − f_c(q)]` for the parity-encoded channel, optimized over `q`
/// unless it is given.
fn parity_results(r: f64, q: Option<f64>) -> CliResult<Value> {
    let single = p1_binary(&quantum_bob(r)?)?.p1;
    let (rate, q_star) = match q {
        None => {
            let opt = parity_rate(r)?;
            (opt.rate, opt.q_star)
        }
        Some(q) => {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::Domain {
                    name: "q",
                    value: q,
                    range: "[0, 1]",
                }
                .into());
            }
            let composed = compose(&parity_preprocessor(), &quantum_bob(r)?)?;
            let obj = BinaryObjective::new(&composed)?;
            (0.5 * (obj.value(0.5) - obj.value(q)), q)
        }
    };
    Ok(json!({
        "rate": rate,
        "q_star": q_star,
        "block_length": 2,
        "single_letter_p1": single,
        "gain": rate - single,
    }))
}

/// Repetition scheme. With `q` fixed the headline is the uniform-input rate
/// with its Bob and Charlie terms; otherwise the best rate over `q` (from
/// `P₁` of the composed channel when the block is small enough to compose).
fn repetition_results(p: f64, n: usize, q: Option<f64>) -> CliResult<Value> {
    let dense = n <= DENSE_REPETITION_BLOCK;
    match q {
        Some(q) => {
            let breakdown = repcode_rate(p, q, n)?;
            let p1_rate = if dense {
                Some(repetition_p1_rate(p, q, n)?)
            } else {
                None
            };
            Ok(json!({
                "rate": breakdown.rate,
                "q_star": q,
                "breakdown": breakdown,
                "p1_rate": p1_rate,
            }))
        }
        None => {
            let uniform = repcode_optimal_rate(p, n)?;
            let envelope = if dense {
                Some(repetition_optimal_rate(p, n)?)
            } else {
                None
            };
            let best = envelope.unwrap_or(uniform);
            let breakdown = repcode_rate(p, best.q_star, n)?;
            Ok(json!({
                "rate": best.rate,
                "q_star": best.q_star,
                "breakdown": breakdown,
                "p1_optimum": envelope,
                "uniform_optimum": uniform,
            }))
        }
    }
}

/// The fixed classical channel offered by `--channel classical`.
pub fn classical_probe_channel() -> wiretap_core::Result<QccChannel> {
    QccChannel::basis_measurement(&bsc(0.1)?, &bec(0.3)?)
}

pub fn additivity(args: &AdditivityArgs) -> CliResult<CommandOutput> {
    let channels = match args.channel {
        ProbeChannel::Random => random_channels(args.seed, args.count, 2),
        ProbeChannel::Classical => vec![classical_probe_channel()?; args.count],
    };
    let rows = channels
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let r = additivity_probe(ch, ch, args.restarts, args.seed.wrapping_add(i as u64))?;
            Ok(json!({
                "index": i,
                "v1": r.v1,
                "v2": r.v2,
                "joint": r.joint,
                "gap": r.gap,
                "anomaly": r.anomaly,
            }))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let worst = rows.iter().max_by(|a, b| {
        a["gap"]
            .as_f64()
            .unwrap_or(f64::NAN)
            .total_cmp(&b["gap"].as_f64().unwrap_or(f64::NAN))
    });
    Ok(CommandOutput {
        parameters: json!({
            "seed": args.seed,
            "restarts": args.restarts,
            "count": args.count,
            "channel": match args.channel { ProbeChannel::Random => "random", ProbeChannel::Classical => "classical" },
        }),
        results: json!({
            "max_gap": worst.map(|w| w["gap"].clone()),
            "max_gap_index": worst.map(|w| w["index"].clone()),
            "anomalies": rows.iter().filter(|r| r["anomaly"] == true).count(),
            "channels": rows,
        }),
        seed: Some(args.seed),
    })
}
