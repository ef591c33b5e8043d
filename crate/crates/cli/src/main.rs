use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mfps::composition::{compose, existence_check, ComposeOptions};
use mfps::json;
use mfps::outer_seq::CoeffSequence;
use mfps::rdl::{abel_check, counterexample_demo, rdl_verify};
use mfps::series::{Mode, TruncatedSeries};
use serde_json::Value;

mod table;

#[derive(Parser)]
#[command(
    name = "mfps",
    version,
    about = "Truncated multivariate power series: arithmetic, composition, distributive-law checks"
)]
struct Cli {
    /// Expected number of variables; series literals must agree.
    #[arg(long, global = true)]
    q: Option<usize>,
    /// Truncation degree; inputs are truncated to it.
    #[arg(long = "K", global = true)]
    k: Option<usize>,
    /// Mode for literals that do not name one.
    #[arg(long, global = true, default_value = "exact")]
    mode: Mode,
    /// Convergence tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Maximum number of terms examined per numeric sum.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Depth of the direct partial-sum cross-check.
    #[arg(long = "check-depth", global = true)]
    check_depth: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PowMethod {
    Multinomial,
    Repeated,
}

#[derive(Subcommand)]
enum Command {
    /// List the coefficients of a series (or of a sequence up to K).
    Coeffs { input: String },
    /// Product of two series.
    Mul { left: String, right: String },
    /// Power of a series.
    Pow {
        input: String,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = PowMethod::Multinomial)]
        method: PowMethod,
    },
    /// Composition g o f.
    Compose {
        #[arg(long)]
        g: String,
        #[arg(long)]
        f: String,
    },
    /// Existence verdicts for g o f without computing it.
    Check {
        #[arg(long)]
        g: String,
        #[arg(long)]
        f: String,
    },
    /// Check (A o P)(B o P) = (AB) o P.
    Rdl {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        p: String,
    },
    /// The alternating square-root counterexample to the distributive law.
    DemoCounterexample {
        #[arg(long, default_value_t = 10_000)]
        n: u64,
    },
    /// Check (sum a)(sum b) = sum (a * b).
    Abel {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
}

/// Literal text, or the contents of a `.json` file.
fn resolve(arg: &str) -> Result<String> {
    let path = Path::new(arg);
    if arg.ends_with(".json") && !arg.trim_start().starts_with('{') {
        return fs::read_to_string(path).with_context(|| format!("cannot read {arg}"));
    }
    Ok(arg.to_string())
}

impl Cli {
    fn series(&self, what: &str, arg: &str) -> Result<TruncatedSeries> {
        let text = resolve(arg)?;
        let f = json::parse_series(&text, self.mode).with_context(|| format!("invalid series for {what}"))?;
        if let Some(q) = self.q {
            if q != f.q() {
                bail!("{what} has q = {}, but --q {q} was given", f.q());
            }
        }
        match self.k {
            Some(k) if k > f.max_degree() => {
                bail!(
                    "{what} is truncated at K = {}, cannot extend to --K {k}",
                    f.max_degree()
                )
            }
            Some(k) => Ok(f.truncated(k)),
            None => Ok(f),
        }
    }

    fn sequence(&self, what: &str, arg: &str) -> Result<CoeffSequence> {
        let seq = if let Some(rule) = arg.strip_prefix("rule:") {
            json::parse_rule(rule)
        } else {
            json::parse_sequence(&resolve(arg)?, self.mode)
        };
        seq.with_context(|| format!("invalid sequence for {what}"))
    }

    fn options(&self) -> Result<ComposeOptions> {
        let mut o = ComposeOptions::default();
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                bail!("--tol must be positive and finite");
            }
            o.verdict.tolerance = t;
        }
        if let Some(n) = self.nmax {
            if n < 4 {
                bail!("--nmax must be at least 4");
            }
            o.verdict.n_max = n;
        }
        if let Some(d) = self.check_depth {
            o.check_depth = d;
        }
        Ok(o)
    }

    fn emit(&self, json_value: Value, text: String) -> Result<()> {
        let body = match self.format {
            Format::Json => serde_json::to_string_pretty(&json_value)? + "\n",
            Format::Table => text,
        };
        match &self.out {
            Some(path) => fs::write(path, body).with_context(|| format!("cannot write {}", path.display())),
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }

    fn run(&self) -> Result<()> {
        let opts = self.options()?;
        match &self.command {
            Command::Coeffs { input } => {
                let looks_like_sequence = input.starts_with("rule:") || input.contains("\"kind\"");
                if looks_like_sequence {
                    let seq = self.sequence("input", input)?;
                    let k = self.k.unwrap_or(10);
                    let coeffs = (0..=k as u64)
                        .map(|n| seq.coeff_at(n, self.mode))
                        .collect::<Result<Vec<_>, _>>()?;
                    let values: Vec<Value> = coeffs.iter().map(|c| Value::String(c.to_text())).collect();
                    self.emit(serde_json::json!({"coeffs": values}), table::sequence(&coeffs))
                } else {
                    let f = self.series("input", input)?;
                    self.emit(json::series_to_json(&f), table::series(&f))
                }
            }
            Command::Mul { left, right } => {
                let (f, g) = (self.series("left operand", left)?, self.series("right operand", right)?);
                let h = f.mul(&g)?;
                self.emit(json::series_to_json(&h), table::series(&h))
            }
            Command::Pow { input, n, method } => {
                let f = self.series("input", input)?;
                let h = match method {
                    PowMethod::Multinomial => f.pow_multinomial(*n)?,
                    PowMethod::Repeated => f.pow_repeated(*n)?,
                };
                self.emit(json::series_to_json(&h), table::series(&h))
            }
            Command::Compose { g, f } => {
                let (g, f) = (self.sequence("--g", g)?, self.series("--f", f)?);
                let r = compose(&g, &f, &opts)?;
                self.emit(json::composition_to_json(&r), table::composition(&r))
            }
            Command::Check { g, f } => {
                let (g, f) = (self.sequence("--g", g)?, self.series("--f", f)?);
                let r = existence_check(&g, &f, &opts)?;
                self.emit(json::composition_to_json(&r), table::composition(&r))
            }
            Command::Rdl { a, b, p } => {
                let (a, b, p) = (
                    self.sequence("--a", a)?,
                    self.sequence("--b", b)?,
                    self.series("--p", p)?,
                );
                let r = rdl_verify(&a, &b, &p, &opts)?;
                self.emit(json::rdl_to_json(&r), table::rdl(&r))
            }
            Command::DemoCounterexample { n } => {
                if *n < 100 {
                    bail!("--n must be at least 100");
                }
                let r = counterexample_demo(*n, &opts)?;
                self.emit(json::counterexample_to_json(&r), table::counterexample(&r))
            }
            Command::Abel { a, b } => {
                let (a, b) = (self.sequence("--a", a)?, self.sequence("--b", b)?);
                let r = abel_check(&a, &b, &opts)?;
                self.emit(json::abel_to_json(&r), table::abel(&r))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
