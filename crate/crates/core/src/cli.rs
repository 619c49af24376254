//! Command-line surface: state sums, Seifert formulas, Hempel reports, verification.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::hempel::report;
use crate::seifert::{dedekind_sum, tv_closed_form, tv_prime_seifert, tv_seifert, ClosedForm, SeifertSymbol};
use crate::statesum::{state_sum, tv_float, Engine};
use crate::verify::{asset_dir, load, run_suite, Options};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "quantum3", version, about = "Turaev-Viro invariants of closed 3-manifolds")]
pub struct Cli {
    /// Relative tolerance for comparisons.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Frontier,
    Enumerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    #[value(name = "closed_form", alias = "closed-form")]
    ClosedForm,
    Hansen,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// TV_{r,s} (or TV'_{r,s}) of a triangulation file.
    Statesum {
        file: PathBuf,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        s: i64,
        #[arg(long)]
        refined: bool,
        /// Floating-point sweep instead of exact arithmetic.
        #[arg(long, conflicts_with = "engine")]
        float: bool,
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
    },
    /// TV of a Seifert fiber space given as "g; a1/b1, a2/b2, ...".
    Seifert {
        symbol: String,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        s: i64,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        refined: bool,
    },
    /// Compare the mapping tori of [f] and [f^k] for 3 <= r <= r_max.
    Hempel {
        symbol: String,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        r_max: u32,
        /// Also write the rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        suite: String,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Exact Dedekind sum s(b, a).
    Dedekind {
        #[arg(allow_hyphen_values = true)]
        b: i64,
        #[arg(allow_hyphen_values = true)]
        a: i64,
    },
}

enum Outcome {
    Done(String),
    Failed(String),
}

fn execute(cli: &Cli) -> Result<Outcome, Error> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Error::Parse(format!("--tol must be positive, got {}", cli.tol)));
    }
    match &cli.command {
        Command::Statesum { file, r, s, refined, float, engine } => {
            let t = load(file, &asset_dir())?;
            let result = if *float {
                tv_float(&t, *r, *s, *refined)?
            } else {
                let engine = match engine {
                    Some(EngineArg::Enumerate) => Engine::Enumerate,
                    _ => Engine::Frontier,
                };
                state_sum(&t, *r, *refined, engine)?.evaluate(*s)?
            };
            Ok(Outcome::Done(result.to_json()))
        }
        Command::Seifert { symbol, r, s, mode, refined } => {
            let sym: SeifertSymbol = symbol.parse()?;
            let out = match mode {
                Mode::ClosedForm => match tv_closed_form(&sym, *r, *s, *refined)? {
                    ClosedForm::Value(v) => json!({ "value": v, "vanishing": false }),
                    ClosedForm::Vanishing => json!({ "value": 0.0, "vanishing": true }),
                },
                Mode::Hansen if *refined => {
                    json!({ "value": tv_prime_seifert(&sym, *r, *s, cli.tol)?, "refined": true })
                }
                Mode::Hansen => {
                    if *s != 1 {
                        return Err(Error::Hypothesis("the hansen mode evaluates s = 1 only".into()));
                    }
                    json!({ "value": tv_seifert(&sym, *r)?, "refined": false })
                }
            };
            Ok(Outcome::Done(out.to_string()))
        }
        Command::Hempel { symbol, k, r_max, csv } => {
            let sym: SeifertSymbol = symbol.parse()?;
            let rep = report(&sym, *k, *r_max, cli.tol)?;
            if let Some(path) = csv {
                std::fs::write(path, rep.to_csv())?;
            }
            Ok(Outcome::Done(rep.to_json()))
        }
        Command::Verify { suite, r, file } => {
            let opts = Options { tol: cli.tol, r: *r, file: file.clone(), assets: asset_dir() };
            let checks = run_suite(suite, &opts)?;
            let failed: Vec<_> = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
            let out = json!({
                "suite": suite,
                "pass": failed.is_empty(),
                "checks": checks
                    .iter()
                    .map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
                    .collect::<Vec<_>>(),
                "failed": failed,
            })
            .to_string();
            Ok(if failed.is_empty() { Outcome::Done(out) } else { Outcome::Failed(out) })
        }
        Command::Dedekind { b, a } => {
            let v = dedekind_sum(*b, *a)?;
            Ok(Outcome::Done(json!({ "b": b, "a": a, "value": v.to_string() }).to_string()))
        }
    }
}

/// Runs a parsed command, writing one JSON document to `sink`; returns the exit code.
pub fn run(cli: &Cli, sink: &mut dyn Write) -> i32 {
    if let Some(n) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let (code, text) = match execute(cli) {
        Ok(Outcome::Done(s)) => (0, s),
        Ok(Outcome::Failed(s)) => (2, s),
        Err(e) => (1, json!({ "error": e.kind(), "message": e.to_string() }).to_string()),
    };
    let _ = writeln!(sink, "{text}");
    code
}

/// Parses `args` (program name first) and runs; usage errors exit 1 as JSON too.
pub fn run_args<I, T>(args: I, sink: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, sink),
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = write!(sink, "{e}");
            0
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(sink, "{}", json!({ "error": "usage", "message": first }));
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let code = run_args(std::iter::once("quantum3").chain(args.iter().copied()), &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn statesum_sphere() {
        let (code, out) = call(&["statesum", "s3_boundary4simplex.json", "--r", "5", "--s", "1"]);
        assert_eq!(code, 0, "{out}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["value"].as_f64().unwrap() - 0.138197).abs() < 1e-6);
    }

    #[test]
    fn seifert_vanishing() {
        let (code, out) = call(&["seifert", "0; 5/1, 5/1, 5/-2", "--r", "5", "--mode", "closed_form"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), r#"{"value":0.0,"vanishing":true}"#);
    }

    #[test]
    fn domain_and_usage_errors() {
        let (code, out) = call(&["seifert", "0; 5/1", "--r", "5", "--s", "5", "--mode", "closed_form"]);
        assert_eq!(code, 1);
        assert!(out.contains("\"error\":\"not_coprime\""), "{out}");
        assert_eq!(out.lines().count(), 1);
        let (code, out) = call(&["statesum", "x.json", "--r", "5", "--float", "--engine", "enumerate"]);
        assert_eq!(code, 1);
        assert!(out.contains("\"error\":\"usage\""));
    }

    #[test]
    fn verify_exit_codes() {
        let (code, _) = call(&["verify", "splitting", "--r", "5", "--file", "s3_boundary4simplex.json"]);
        assert_eq!(code, 0);
        let (code, _) = call(&["verify", "no-such-suite"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn dedekind_negative_and_deterministic() {
        let (code, out) = call(&["dedekind", "-1", "5"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"value\":\"-1/5\""), "{out}");
        assert_eq!(call(&["dedekind", "-1", "5"]).1, out);
    }
}
