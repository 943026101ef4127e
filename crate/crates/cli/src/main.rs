use clap::{Args, Parser, Subcommand};
use num::bigint::BigInt;
use num::{BigRational, Zero};
use rigadic::classify::{
    classify_positive_type, kedlaya_identity_check, lebras_divergence_check, TypeVerdict,
};
use rigadic::connection::{
    coadmissibility_probe, divergence_witness, theta_preimage, verify_witness, ProbeConfig,
    ProbeVerdict, WitnessReport, WitnessVerdict,
};
use rigadic::laurent::{LaurentElement, RingTag};
use rigadic::suite::run_acceptance;
use rigadic::valuation::{ExponentBound, ExtValuation};
use rigadic::{Config, DensePAdic, PAdicScalar, SparsePAdic};
use serde_json::{json, Value};
use std::process::ExitCode;

/// Exact nonarchimedean computations on the rigid unit disk.
#[derive(Parser)]
#[command(name = "rigadic", version)]
struct Cli {
    /// Run a bundled verification suite ("acceptance") and exit.
    #[arg(long, global = true)]
    suite: Option<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Clone)]
struct Common {
    /// Residue characteristic p; the uniformizer is p itself.
    #[arg(long, default_value_t = 2)]
    prime: u64,
    /// Dense digit cap for scalar expansions.
    #[arg(long, default_value_t = 256)]
    precision: usize,
    /// Emit a single JSON object instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a scalar literal by searching for a positive-type witness.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Scalar literal: rat:a/b, int:n, sparse:[k,..], lebras:p,d, digits:v=v;[d,..]
        lambda: String,
        /// Number of prefix valuations inspected.
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        /// Largest slope tried for the witness.
        #[arg(long, default_value_t = 8)]
        rmax: u64,
        /// Reduction cap for dense difference valuations.
        #[arg(long, default_value_t = 4096)]
        cap: u64,
    },
    /// Build a tower scalar and print its spike valuations and divergence table.
    Lebras {
        #[command(flatten)]
        common: Common,
        /// Number of tower stages kept symbolically.
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Slope range for the divergence table, e.g. "0..8".
        #[arg(long, value_name = "A..B", default_value = "0..8")]
        check_divergence: String,
    },
    /// Verify the two power-series expansions of 1/(lambda - i) agree exactly.
    IdentityCheck {
        #[command(flatten)]
        common: Common,
        /// Rational lambda, e.g. "1/2" or "-7/5".
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Highest series coefficient compared.
        #[arg(long, default_value_t = 25)]
        order: usize,
    },
    /// Level Gauss norms of a Laurent element on the disk or punctured disk.
    Norms {
        #[command(flatten)]
        common: Common,
        /// Terms "k:num/den,k:num/den,..." (exponent:coefficient pairs).
        #[arg(long, allow_hyphen_values = true)]
        terms: String,
        /// Ring: "disk" or "punctured".
        #[arg(long, default_value = "disk")]
        tag: String,
        /// Largest level reported.
        #[arg(long, default_value_t = 3)]
        nmax: u32,
    },
    /// Consolidated coadmissibility evidence for a scalar.
    Probe {
        #[command(flatten)]
        common: Common,
        lambda: String,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        /// Largest slope for the classification search.
        #[arg(long, default_value_t = 8)]
        rmax: u64,
        /// Levels 0..nmax receive a sufficient radius.
        #[arg(long, default_value_t = 3)]
        nmax: u32,
        /// Chain length for the divergence search.
        #[arg(long, default_value_t = 2)]
        witness_rmax: u64,
        #[arg(long, default_value_t = 256)]
        imax: u64,
        #[arg(long, default_value_t = 32)]
        jmax: usize,
        #[arg(long, default_value_t = 1 << 20)]
        cap: u64,
    },
    /// Search for a divergence witness chain.
    Witness {
        #[command(flatten)]
        common: Common,
        lambda: String,
        /// Chain length r = 1..rmax.
        #[arg(long, default_value_t = 2)]
        rmax: u64,
        /// Ordinary spike candidates run up to this index.
        #[arg(long, default_value_t = 256)]
        imax: u64,
        #[arg(long, default_value_t = 1 << 20)]
        cap: u64,
    },
    /// Solve for the constant-coefficient operator mapping x^lambda to a target.
    Preimage {
        #[command(flatten)]
        common: Common,
        /// Rational lambda, e.g. "1/5".
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Target terms "k:num/den,..." supported in nonpositive exponents.
        #[arg(long, allow_hyphen_values = true)]
        terms: String,
        /// Largest membership level reported.
        #[arg(long, default_value_t = 3)]
        nmax: u32,
    },
}

fn main() -> ExitCode {
    // exit code 2 is reserved for inconclusive verdicts, so argv problems
    // must not fall through to clap's default exit status
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(name) = &cli.suite {
        return run_suite(name);
    }
    let Some(cmd) = cli.command else {
        eprintln!("error: a subcommand or --suite is required (try --help)");
        return ExitCode::from(1);
    };
    match dispatch(cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", json!({ "error": format!("{e}") }));
            ExitCode::from(1)
        }
    }
}

fn run_suite(name: &str) -> ExitCode {
    if name != "acceptance" {
        eprintln!("error: unknown suite '{name}' (available: acceptance)");
        return ExitCode::from(1);
    }
    let outcomes = run_acceptance();
    let mut all = true;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {} ({})", o.index, o.label, o.detail);
        all &= o.passed;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn ext_val(v: &ExtValuation) -> Value {
    match v {
        ExtValuation::Finite(x) => json!({ "kind": "finite", "exponent": x.to_string() }),
        ExtValuation::LowerBound(x) => json!({ "kind": "at-least", "exponent": x.to_string() }),
        ExtValuation::PlusInfinity => json!({ "kind": "infinite" }),
    }
}

fn exp_bound(b: &ExponentBound) -> Value {
    match b {
        ExponentBound::Exact(x) => json!({ "kind": "exact", "exponent": x.to_string() }),
        ExponentBound::AtMost(x) => json!({ "kind": "at-most", "exponent": x.to_string() }),
    }
}

fn emit(json_mode: bool, value: &Value, text: &str) {
    if json_mode {
        println!("{value}");
    } else {
        println!("{text}");
    }
}

fn parse_rational(s: &str) -> Result<BigRational, rigadic::Error> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| rigadic::Error::Parse(format!("bad numerator: {num}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| rigadic::Error::Parse(format!("bad denominator: {den}")))?;
    if den.is_zero() {
        return Err(rigadic::Error::DivisionByZero);
    }
    Ok(BigRational::new(num, den))
}

fn parse_terms(
    config: &Config,
    s: &str,
    tag: RingTag,
) -> Result<LaurentElement, rigadic::Error> {
    let mut entries = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, coeff) = part
            .split_once(':')
            .ok_or_else(|| rigadic::Error::Parse(format!("term needs 'k:coeff': {part}")))?;
        let k: i64 = k
            .trim()
            .parse()
            .map_err(|_| rigadic::Error::Parse(format!("bad exponent: {k}")))?;
        let q = parse_rational(coeff)?;
        let c = DensePAdic::from_rational(config, q.numer().clone(), q.denom().clone())?;
        entries.push((k, c));
    }
    LaurentElement::from_coeffs(config, tag, entries)
}

fn parse_range(s: &str) -> Result<(u64, u64), rigadic::Error> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| rigadic::Error::Parse(format!("range needs 'a..b': {s}")))?;
    let a: u64 = a
        .trim()
        .parse()
        .map_err(|_| rigadic::Error::Parse(format!("bad range start: {a}")))?;
    let b: u64 = b
        .trim()
        .parse()
        .map_err(|_| rigadic::Error::Parse(format!("bad range end: {b}")))?;
    if b < a {
        return Err(rigadic::Error::Parse(format!("empty range: {s}")));
    }
    Ok((a, b))
}

fn witness_json(rep: &WitnessReport) -> Value {
    let steps: Vec<Value> = rep
        .steps
        .iter()
        .map(|s| {
            json!({
                "r": s.r,
                "i": s.i.to_string(),
                "j": s.j.to_string(),
                "eps_exponent": s.eps_exponent.to_string(),
                "m_coeff_exponent": s.m_coeff_exponent.to_string(),
                "product_valuation": ext_val(&s.product_valuation),
                "g_exponent": exp_bound(&s.g_exponent),
            })
        })
        .collect();
    let membership: Vec<Value> = rep
        .membership
        .iter()
        .map(|t| {
            json!({
                "level": t.level,
                "passes": t.passes,
                "margins": t.margins.iter()
                    .map(|(i, m)| json!([i.to_string(), m.to_string()]))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "verdict": match rep.verdict {
            WitnessVerdict::DivergenceWitnessed => "divergence-witnessed",
            WitnessVerdict::NoWitnessInBox => "no-witness-in-box",
        },
        "box": { "r_max": rep.r_max, "i_max": rep.i_max },
        "steps": steps,
        "membership": membership,
        "verified": verify_witness(rep),
    })
}

fn dispatch(cmd: Command) -> Result<ExitCode, rigadic::Error> {
    match cmd {
        Command::Classify { common, lambda, horizon, rmax, cap } => {
            let config = Config::new(common.prime, common.precision)?;
            let lam = PAdicScalar::parse(&config, &lambda)?;
            let rep = classify_positive_type(&lam, horizon, rmax, cap)?;
            let (verdict, r, conclusive) = match &rep.verdict {
                TypeVerdict::PositiveInteger => ("positive-integer", None, true),
                TypeVerdict::PositiveWitness { r, .. } => ("positive-witness", Some(*r), true),
                TypeVerdict::NoWitnessUpTo { .. } => ("no-witness-in-box", None, false),
            };
            let out = json!({
                "lambda": lam.describe(),
                "verdict": verdict,
                "witness_r": r,
                "proven_type_zero": rep.proven_type_zero,
                "box": { "horizon": horizon, "r_max": rmax, "cap": cap },
            });
            let text = match r {
                Some(r) => format!("{verdict} (r = {r})"),
                None => verdict.to_string(),
            };
            emit(common.json, &out, &text);
            Ok(if conclusive { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Lebras { common, depth, check_divergence } => {
            let config = Config::new(common.prime, common.precision)?;
            let lam = SparsePAdic::lebras(config.prime, depth)?;
            let (r_lo, r_hi) = parse_range(&check_divergence)?;
            let r_list: Vec<u64> = (r_lo..=r_hi).collect();
            let usable = depth
                .min(lam.materializable_partial_sums())
                .min(lam.materialized_depth());
            let mut spikes = Vec::new();
            for j in 1..=usable {
                spikes.push(json!({
                    "j": j,
                    "partial_sum": lam.partial_sum(j)?.to_string(),
                    "spike_valuation": ext_val(&lam.sub_partial_sum(j)?.valuation()),
                }));
            }
            let rows = lebras_divergence_check(&lam, &r_list, usable)?;
            let mut text = String::new();
            let rows_json: Vec<Value> = rows
                .iter()
                .map(|row| {
                    text.push_str(&format!(
                        "r = {}: [{}] strictly decreasing: {}\n",
                        row.r,
                        row.entries
                            .iter()
                            .map(|(j, e)| format!("j={j}: {e:?}"))
                            .collect::<Vec<_>>()
                            .join(", "),
                        row.strictly_decreasing
                    ));
                    json!({
                        "r": row.r,
                        "entries": row.entries.iter()
                            .map(|(j, e)| json!([j, exp_bound(e)]))
                            .collect::<Vec<_>>(),
                        "strictly_decreasing": row.strictly_decreasing,
                    })
                })
                .collect();
            let out = json!({
                "prime": config.prime,
                "depth": depth,
                "spikes": spikes,
                "divergence_table": rows_json,
            });
            emit(common.json, &out, text.trim_end());
            Ok(ExitCode::SUCCESS)
        }
        Command::IdentityCheck { common, lambda, order } => {
            let lam = parse_rational(&lambda)?;
            let residuals = kedlaya_identity_check(&lam, order)?;
            let all_zero = residuals.iter().all(|r| r.is_zero());
            let out = json!({
                "lambda": lam.to_string(),
                "order": order,
                "residuals_zero": all_zero,
                "nonzero_residuals": residuals.iter().enumerate()
                    .filter(|(_, r)| !r.is_zero())
                    .map(|(i, r)| json!([i, r.to_string()]))
                    .collect::<Vec<_>>(),
            });
            emit(
                common.json,
                &out,
                &format!("residuals zero to order {order}: {all_zero}"),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Norms { common, terms, tag, nmax } => {
            let config = Config::new(common.prime, common.precision)?;
            let tag = match tag.as_str() {
                "disk" => RingTag::Disk,
                "punctured" => RingTag::PuncturedDiskTruncated,
                other => {
                    return Err(rigadic::Error::Parse(format!(
                        "unknown ring tag: {other} (disk | punctured)"
                    )))
                }
            };
            let el = parse_terms(&config, &terms, tag.clone())?;
            let mut text = String::new();
            let norms: Vec<Value> = (0..=nmax)
                .map(|n| {
                    let v = el.level_norm(n);
                    text.push_str(&format!("level {n}: {v:?}\n"));
                    json!([n, ext_val(&v)])
                })
                .collect();
            let out = json!({
                "tag": format!("{tag}"),
                "window": el.window().map(|(lo, hi)| json!([lo, hi])),
                "level_norms": norms,
            });
            emit(common.json, &out, text.trim_end());
            Ok(ExitCode::SUCCESS)
        }
        Command::Probe {
            common,
            lambda,
            horizon,
            rmax,
            nmax,
            witness_rmax,
            imax,
            jmax,
            cap,
        } => {
            let config = Config::new(common.prime, common.precision)?;
            let lam = PAdicScalar::parse(&config, &lambda)?;
            let probe = ProbeConfig {
                horizon,
                r_max: rmax,
                i_max: imax,
                n_max: nmax,
                j_max: jmax,
                cap,
                witness_r_max: witness_rmax,
            };
            let box_json = json!({
                "horizon": horizon, "r_max": rmax, "n_max": nmax,
                "witness_r_max": witness_rmax, "i_max": imax, "j_max": jmax, "cap": cap,
            });
            match coadmissibility_probe(&lam, &config, &probe)? {
                ProbeVerdict::CoadmissibleEvidence { r_per_level } => {
                    let out = json!({
                        "lambda": lam.describe(),
                        "verdict": "coadmissible-evidence",
                        "r_per_level": r_per_level.iter()
                            .map(|(n, r)| json!([n, r.to_string()]))
                            .collect::<Vec<_>>(),
                        "box": box_json,
                    });
                    let text = r_per_level
                        .iter()
                        .map(|(n, r)| format!("level {n}: r = {r}"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    emit(common.json, &out, &format!("coadmissible evidence ({text})"));
                    Ok(ExitCode::SUCCESS)
                }
                ProbeVerdict::DivergenceWitnessed(rep) => {
                    let out = json!({
                        "lambda": lam.describe(),
                        "verdict": "divergence-witnessed",
                        "witness": witness_json(&rep),
                        "box": box_json,
                    });
                    emit(
                        common.json,
                        &out,
                        &format!("divergence witnessed ({} chain steps)", rep.steps.len()),
                    );
                    Ok(ExitCode::SUCCESS)
                }
                ProbeVerdict::Inconclusive => {
                    let out = json!({
                        "lambda": lam.describe(),
                        "verdict": "inconclusive",
                        "box": box_json,
                    });
                    emit(common.json, &out, "inconclusive within box");
                    Ok(ExitCode::from(2))
                }
            }
        }
        Command::Witness { common, lambda, rmax, imax, cap } => {
            let config = Config::new(common.prime, common.precision)?;
            let lam = PAdicScalar::parse(&config, &lambda)?;
            let rep = divergence_witness(&lam, rmax, imax, cap)?;
            let witnessed = rep.verdict == WitnessVerdict::DivergenceWitnessed;
            let out = json!({
                "lambda": lam.describe(),
                "report": witness_json(&rep),
            });
            let text = if witnessed {
                format!("divergence witnessed; chain verified: {}", verify_witness(&rep))
            } else {
                "no witness found in box".into()
            };
            emit(common.json, &out, &text);
            Ok(if witnessed { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Preimage { common, lambda, terms, nmax } => {
            let config = Config::new(common.prime, common.precision)?;
            let q = parse_rational(&lambda)?;
            let lam = DensePAdic::from_rational(&config, q.numer().clone(), q.denom().clone())?;
            let target = parse_terms(&config, &terms, RingTag::PuncturedDiskTruncated)?;
            let (op, membership) = theta_preimage(&lam, &target, nmax)?;
            let mut text = String::new();
            let coeffs: Vec<Value> = op
                .terms()
                .map(|(i, g)| {
                    let v = g.level_norm(0);
                    text.push_str(&format!("g_{i}: valuation {v:?}\n"));
                    json!([i, ext_val(&v)])
                })
                .collect();
            let out = json!({
                "lambda": q.to_string(),
                "g_valuations": coeffs,
                "membership": membership.verdicts.iter()
                    .map(|v| json!({ "level": v.level, "passes": v.passes }))
                    .collect::<Vec<_>>(),
            });
            emit(common.json, &out, text.trim_end());
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parser() {
        assert_eq!(parse_rational("1/2").unwrap().to_string(), "1/2");
        assert_eq!(parse_rational("-7").unwrap().to_string(), "-7");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn range_parser() {
        assert_eq!(parse_range("0..8").unwrap(), (0, 8));
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("5").is_err());
    }
}
