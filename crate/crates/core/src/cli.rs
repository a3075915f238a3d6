//! Command-line front end. Every command resolves a reproducible
//! configuration (flags override an optional key=value config file), runs a
//! pure computation, and emits deterministic CSV or JSON.
//!
//! Exit codes: 0 success, 1 solver failure, 2 usage error, 3 verification
//! failure.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::conic::{beta_opt, StateSet};
use crate::divergence::{
    hayashi_rate, petz_renyi, sandwiched_renyi, umegaki, DivergenceValue, RenyiOrder,
    SchmidtVector,
};
use crate::error::{Error, Result};
use crate::exponent::{
    hoeffding_exponent, reliability_measured, strong_converse_bound, CurveMetadata,
    ExponentCurve,
};
use crate::linalg::parse_state_spec;
use crate::protocol::{channel_from_test, distillation_error, threshold_test, verify_theorem1};
use crate::suites::{run_suite, ALL_SUITES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "distillex",
    about = "Entanglement distillation as hypothesis testing: divergences, optimal errors, exponents",
    version
)]
pub struct Cli {
    /// Output format for structured results.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write output to this path instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for randomized property suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Verification tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// key=value configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Divergence between two states, in bits.
    Div {
        /// umegaki | petz | sandwiched
        #[arg(long)]
        kind: String,
        /// Renyi order (petz and sandwiched only).
        #[arg(long)]
        alpha: Option<f64>,
        /// First state spec.
        rho: String,
        /// Second state spec.
        sigma: String,
    },
    /// Optimal type-II error over tests constrained on the PPT set.
    Beta {
        /// Vertex state specs (repeatable).
        #[arg(long = "state", required = true)]
        states: Vec<String>,
        /// Type-I budget; alternatively derive it from --r and --n.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Build the threshold protocol and report its measured errors.
    Distill {
        #[arg(long)]
        state: String,
        #[arg(long)]
        n: Option<usize>,
        /// Renyi order in (0,1) for the divergence radius.
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
    },
    /// Exponent curves: reliability | hoeffding | converse | hayashi.
    Exponent {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        state: Option<String>,
        /// Schmidt coefficients for the hayashi curve, comma separated.
        #[arg(long)]
        schmidt: Option<String>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Check the exact distillation-testing equivalence at one point.
    Verify {
        #[arg(long)]
        state: String,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Seeded randomized property suites.
    Proptest {
        /// audenaert | domination | round-trip | ppt-boundary | all
        #[arg(long)]
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
    },
}

/// key=value lines; '#' starts a comment.
fn parse_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("config line {} is not key=value: '{raw}'", lineno + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

struct Resolved {
    cfg: BTreeMap<String, String>,
}

impl Resolved {
    fn get<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.cfg.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Parse(format!("bad config value for '{key}': '{s}'"))),
        }
    }

    fn require<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.get(flag, key)?
            .ok_or_else(|| Error::Parse(format!("missing required parameter '{key}'")))
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json_doc(config: serde_json::Value, result: impl Serialize) -> String {
    let doc = json!({ "config": config, "result": result });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

fn divergence_csv(kind: &str, alpha: Option<f64>, value: &DivergenceValue) -> String {
    let v = match value {
        DivergenceValue::Bits(b) => format!("{b:.12e}"),
        DivergenceValue::Infinite => "inf".into(),
    };
    let a = alpha.map(|a| format!("{a:.12e}")).unwrap_or_default();
    format!("kind,alpha,value_bits\n{kind},{a},{v}\n")
}

/// Run the parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let resolved = Resolved { cfg };
    let format = match resolved.get(
        cli.format.map(|f| if f == Format::Json { "json".to_string() } else { "csv".to_string() }),
        "format",
    )? {
        Some(s) if s == "json" => Format::Json,
        Some(s) if s == "csv" => Format::Csv,
        Some(s) => return Err(Error::Parse(format!("unknown format '{s}'"))),
        None => Format::Csv,
    };
    let out = match cli.out.clone() {
        Some(p) => Some(p),
        None => resolved.get(None::<String>, "out")?.map(PathBuf::from),
    };
    let seed = resolved.get(cli.seed, "seed")?.unwrap_or(7);
    let tol = resolved.get(cli.tol, "tol")?.unwrap_or(1e-6);

    match cli.command {
        Command::Div { kind, alpha, rho, sigma } => {
            let alpha = resolved.get(alpha, "alpha")?;
            let rho_s = parse_state_spec(&rho)?;
            let sigma_s = parse_state_spec(&sigma)?;
            let value = match kind.as_str() {
                "umegaki" => umegaki(&rho_s, &sigma_s)?,
                "petz" | "sandwiched" => {
                    let a = alpha.ok_or_else(|| {
                        Error::Parse(format!("--alpha is required for kind '{kind}'"))
                    })?;
                    let order = RenyiOrder::new(a)?;
                    if kind == "petz" {
                        petz_renyi(order, &rho_s, &sigma_s)?
                    } else {
                        sandwiched_renyi(order, &rho_s, &sigma_s)?
                    }
                }
                other => {
                    return Err(Error::Parse(format!(
                        "unknown divergence kind '{other}' (umegaki, petz, sandwiched)"
                    )))
                }
            };
            let config = json!({"command": "div", "kind": kind, "alpha": alpha,
                                 "rho": rho, "sigma": sigma, "format": fmt_name(format)});
            let text = match format {
                Format::Csv => divergence_csv(&kind, alpha, &value),
                Format::Json => json_doc(config, &value),
            };
            emit(&out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Beta { states, eps, r, n } => {
            let eps = resolved.get(eps, "eps")?;
            let r = resolved.get(r, "r")?;
            let n = resolved.get(n, "n")?.unwrap_or(1);
            let eps = match (eps, r) {
                (Some(e), _) => e,
                (None, Some(r)) => {
                    let m = (r * n as f64).floor() as i32;
                    if m < 1 {
                        return Err(Error::Parse(format!(
                            "floor(r n) = 0 for r={r}, n={n}: no Bell-pair budget"
                        )));
                    }
                    2f64.powi(-m)
                }
                (None, None) => {
                    return Err(Error::Parse("need --eps, or --r with --n".into()))
                }
            };
            let mut vertices = Vec::new();
            for s in &states {
                vertices.push(parse_state_spec(s)?.tensor_power(n)?);
            }
            let set = StateSet::from_vertices(vertices)?;
            let sol = beta_opt(&set, eps)?;
            let config = json!({"command": "beta", "states": states, "eps": eps, "n": n,
                                 "format": fmt_name(format)});
            let text = match format {
                Format::Csv => format!(
                    "eps,n,beta,gap,iterations\n{:.12e},{},{:.12e},{:.3e},{}\n",
                    eps, n, sol.value, sol.gap, sol.iterations
                ),
                Format::Json => json_doc(config, sol.diagnostics()),
            };
            emit(&out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Distill { state, n, s, r } => {
            let n = resolved.require(n, "n")?;
            let s = resolved.require(s, "s")?;
            let r = resolved.require(r, "r")?;
            let rho = parse_state_spec(&state)?;
            let (test, params) = threshold_test(&rho, n, s, r)?;
            let m = (r * n as f64).floor() as usize;
            let dist_err = if m >= 1 {
                let channel = channel_from_test(test, m)?;
                let rn = StateSet::from_vertices(vec![rho.tensor_power(n)?])?;
                Some(distillation_error(&channel, &rn)?)
            } else {
                None
            };
            let config = json!({"command": "distill", "state": state, "n": n, "s": s, "r": r,
                                 "format": fmt_name(format)});
            let result = json!({"params": params, "distillation_error": dist_err});
            let text = match format {
                Format::Csv => format!(
                    "n,s,r,a_n,type1_measured,type1_budget,distillation_error\n{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}\n",
                    n, s, r, params.a_n, params.type1_measured, params.type1_budget,
                    dist_err.map(|e| format!("{e:.12e}")).unwrap_or_default()
                ),
                Format::Json => json_doc(config, result),
            };
            emit(&out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Exponent { curve, state, schmidt, r, n, n_max } => {
            let r = resolved.require(r, "r")?;
            let config = json!({"command": "exponent", "curve": curve, "state": state,
                                 "schmidt": schmidt, "r": r, "n": n, "n_max": n_max,
                                 "format": fmt_name(format)});
            if curve == "hayashi" {
                let spec = resolved.require(schmidt, "schmidt")?;
                let lambdas: Result<Vec<f64>> = spec
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Parse(format!("bad Schmidt coefficient '{t}'")))
                    })
                    .collect();
                let sv = SchmidtVector::new(lambdas?)?;
                let rate = hayashi_rate(r, &sv)?;
                let text = match format {
                    Format::Csv => format!("curve,r,rate_bits\nhayashi,{r:.12e},{rate:.12e}\n"),
                    Format::Json => json_doc(config, json!({"rate_bits": rate})),
                };
                emit(&out, &text)?;
                return Ok(EXIT_OK);
            }
            let state_spec = resolved.require(state, "state")?;
            let rho = parse_state_spec(&state_spec)?;
            let curve_out: ExponentCurve = match curve.as_str() {
                "reliability" => {
                    let n_max = resolved.get(n_max, "n_max")?.unwrap_or(2);
                    let set = StateSet::from_vertices(vec![rho])?;
                    reliability_measured(&set, r, n_max)?
                }
                "hoeffding" => {
                    let n = resolved.get(n, "n")?.unwrap_or(1);
                    ExponentCurve::new(
                        vec![hoeffding_exponent(&rho, r, n)?],
                        CurveMetadata {
                            state: state_spec.clone(),
                            free_set: "PPT".into(),
                            method: "hoeffding".into(),
                        },
                    )
                }
                "converse" => {
                    let n = resolved.get(n, "n")?.unwrap_or(1);
                    ExponentCurve::new(
                        vec![strong_converse_bound(&rho, r, n)?],
                        CurveMetadata {
                            state: state_spec.clone(),
                            free_set: "PPT".into(),
                            method: "strong-converse".into(),
                        },
                    )
                }
                other => {
                    return Err(Error::Parse(format!(
                        "unknown curve '{other}' (reliability, hoeffding, converse, hayashi)"
                    )))
                }
            };
            let text = match format {
                Format::Csv => curve_out.to_csv(),
                Format::Json => json_doc(config, &curve_out),
            };
            emit(&out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Verify { state, r, n } => {
            let r = resolved.require(r, "r")?;
            let n = resolved.require(n, "n")?;
            if (r * n as f64).floor() < 1.0 {
                return Err(Error::Parse(format!(
                    "floor(r n) = 0 for r={r}, n={n}: target of zero copies is meaningless"
                )));
            }
            let rho = parse_state_spec(&state)?;
            let set = StateSet::from_vertices(vec![rho])?;
            let report = verify_theorem1(&set, r, n)?;
            let pass = report.gap <= tol
                && report.roundtrip_deviation <= 1e-10
                && report.reverse_type1 <= report.type1_budget + tol;
            let verdict = if pass { "PASS" } else { "FAIL" };
            let config = json!({"command": "verify", "state": state, "r": r, "n": n,
                                 "tol": tol, "format": fmt_name(format)});
            let text = match format {
                Format::Csv => format!(
                    "state,r,n,beta,epsilon,gap,verdict\n{},{:.12e},{},{:.12e},{:.12e},{:.3e},{}\n",
                    state, r, n, report.beta, report.epsilon, report.gap, verdict
                ),
                Format::Json => json_doc(config, json!({"report": report, "verdict": verdict})),
            };
            emit(&out, &text)?;
            println!("{verdict}: |beta - epsilon| = {:.3e} (tol {tol:.1e})", report.gap);
            Ok(if pass { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::Proptest { suite, trials } => {
            let trials = resolved.get(trials, "trials")?.unwrap_or(100);
            let names: Vec<&str> = if suite == "all" {
                ALL_SUITES.to_vec()
            } else {
                vec![suite.as_str()]
            };
            let mut reports = Vec::new();
            for name in names {
                reports.push(run_suite(name, trials, seed)?);
            }
            let all_pass = reports.iter().all(|r| r.passed());
            let config = json!({"command": "proptest", "suite": suite, "trials": trials,
                                 "seed": seed, "format": fmt_name(format)});
            let mut csv =
                String::from("suite,seed,trials,checks,violations,worst_margin\n");
            for rep in &reports {
                csv.push_str(&format!(
                    "{},{},{},{},{},{:.12e}\n",
                    rep.suite, rep.seed, rep.trials, rep.checks, rep.violations, rep.worst_margin
                ));
            }
            let text = match format {
                Format::Csv => csv,
                Format::Json => json_doc(config, &reports),
            };
            emit(&out, &text)?;
            for rep in &reports {
                println!(
                    "{}: {} checks, {} violations",
                    rep.suite, rep.checks, rep.violations
                );
            }
            Ok(if all_pass { EXIT_OK } else { EXIT_VERIFY })
        }
    }
}

fn fmt_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Map an error to its exit code: malformed input is a usage error,
/// everything else is a solver/runtime failure.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::Domain(_) | Error::Unsupported(_) | Error::LayoutMismatch(_) => {
            EXIT_USAGE
        }
        _ => EXIT_SOLVER,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<i32> {
        let cli = Cli::try_parse_from(args).map_err(|e| Error::Parse(e.to_string()))?;
        run(cli)
    }

    #[test]
    fn div_examples() {
        let out = tempdir_file("div1.csv");
        let code = run_args(&[
            "distillex", "div", "--kind", "petz", "--alpha", "0.5", "bell", "maxmix:4",
            "--out", out.to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(code, EXIT_OK);
        let text = std::fs::read_to_string(&out).unwrap();
        let val: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
        assert!((val - 2.0).abs() < 1e-9, "petz 0.5 bell vs maxmix: {val}");

        let out2 = tempdir_file("div2.csv");
        run_args(&[
            "distillex", "div", "--kind", "umegaki", "bell", "bell",
            "--out", out2.to_str().unwrap(),
        ])
        .unwrap();
        let text = std::fs::read_to_string(&out2).unwrap();
        let val: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
        assert!(val.abs() < 1e-12);
    }

    #[test]
    fn malformed_spec_is_usage_error() {
        let err = run_args(&["distillex", "div", "--kind", "umegaki", "belll", "bell"])
            .unwrap_err();
        assert_eq!(exit_code_for(&err), EXIT_USAGE);
    }

    #[test]
    fn hayashi_example() {
        let out = tempdir_file("hay.csv");
        run_args(&[
            "distillex", "exponent", "--curve", "hayashi", "--schmidt", "0.5,0.5",
            "--r", "0.3", "--out", out.to_str().unwrap(),
        ])
        .unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let rate: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
        assert!((rate - 1.0).abs() < 1e-6, "rate {rate}");
    }

    #[test]
    fn verify_passes_when_budget_positive() {
        let out = tempdir_file("verify.json");
        let code = run_args(&[
            "distillex", "verify", "--state", "isotropic:0.9:1", "--r", "1.0", "--n", "1",
            "--format", "json", "--out", out.to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(code, EXIT_OK);
        let text = std::fs::read_to_string(&out).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["result"]["verdict"], "PASS");
        assert!(doc["config"]["tol"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn verify_rejects_zero_budget() {
        let err = run_args(&[
            "distillex", "verify", "--state", "isotropic:0.9:1", "--r", "0.2", "--n", "1",
        ])
        .unwrap_err();
        assert_eq!(exit_code_for(&err), EXIT_USAGE);
    }

    #[test]
    fn proptest_counts_and_determinism() {
        let out1 = tempdir_file("p1.csv");
        let code = run_args(&[
            "distillex", "proptest", "--suite", "audenaert", "--trials", "40",
            "--seed", "7", "--out", out1.to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(code, EXIT_OK);
        let out2 = tempdir_file("p2.csv");
        run_args(&[
            "distillex", "proptest", "--suite", "audenaert", "--trials", "40",
            "--seed", "7", "--out", out2.to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(
            std::fs::read_to_string(&out1).unwrap(),
            std::fs::read_to_string(&out2).unwrap()
        );
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let cfg = tempdir_file("run.cfg");
        std::fs::write(&cfg, "r = 0.3\nn = 1\nformat = csv\n").unwrap();
        let out = tempdir_file("beta_cfg.csv");
        // n from config, eps derived from flag r overriding config r
        let code = run_args(&[
            "distillex", "beta", "--state", "maxmix:4", "--r", "1.0",
            "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(code, EXIT_OK);
        let text = std::fs::read_to_string(&out).unwrap();
        let eps: f64 = text.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        assert!((eps - 0.5).abs() < 1e-12, "eps {eps} should come from r=1.0 flag");
    }

    fn tempdir_file(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("distillex-cli-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }
}
