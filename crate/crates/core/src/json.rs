//! JSON literals for series and sequences, and JSON renderings of reports.
//!
//! Series: `{"q":2,"K":3,"mode":"exact","terms":[{"exp":[1,0],"coef":"1/2"}]}`.
//! Sequences: `{"kind":"rule","rule":"(-1)^n/sqrt(n+1)"}` or
//! `{"kind":"list","coeffs":["1","1/2"]}`, each with an optional `"radius"`.
//! Coefficients are strings (numbers are accepted too) so exact values
//! survive; output lists terms in graded-lex order.

use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::composition::CompositionReport;
use crate::multiindex::{MultiIndex, MultiIndexError};
use crate::outer_seq::{CoeffSequence, ConvergenceVerdict, RuleParseError};
use crate::rdl::{AbelReport, CounterexampleReport, RdlReport, RdlStatus};
use crate::series::{Mode, Scalar, ScalarError, SeriesError, TruncatedSeries};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("term {term}: {error}")]
    Coefficient { term: usize, error: ScalarError },
    #[error("term {term}: {error}")]
    Exponent { term: usize, error: MultiIndexError },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("rule {text:?}: {error}")]
    Rule { text: String, error: RuleParseError },
    #[error("{0}")]
    Invalid(String),
}

impl From<serde_json::Error> for InputError {
    fn from(e: serde_json::Error) -> Self {
        InputError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermLiteral {
    exp: Vec<u32>,
    coef: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesLiteral {
    q: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(default)]
    mode: Option<Mode>,
    #[serde(default)]
    terms: Vec<TermLiteral>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
enum SequenceLiteral {
    Rule {
        rule: String,
        #[serde(default)]
        radius: Option<Value>,
    },
    List {
        coeffs: Vec<Value>,
        #[serde(default)]
        radius: Option<Value>,
    },
}

fn text_of(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Parses a series literal. `default_mode` applies when `"mode"` is absent.
pub fn parse_series(text: &str, default_mode: Mode) -> Result<TruncatedSeries, InputError> {
    let lit: SeriesLiteral = serde_json::from_str(text)?;
    if lit.q == 0 {
        return Err(InputError::Invalid("q must be at least 1".into()));
    }
    let mode = lit.mode.unwrap_or(default_mode);
    let mut terms = Vec::with_capacity(lit.terms.len());
    for (i, t) in lit.terms.into_iter().enumerate() {
        let c = MultiIndex::new(t.exp).map_err(|error| InputError::Exponent { term: i, error })?;
        let raw = text_of(&t.coef)
            .ok_or_else(|| InputError::Invalid(format!("term {i}: coef must be a string or number")))?;
        let v = Scalar::parse(&raw, mode).map_err(|error| InputError::Coefficient { term: i, error })?;
        terms.push((c, v));
    }
    Ok(TruncatedSeries::from_terms(lit.q, lit.k, mode, terms)?)
}

fn parse_radius(v: &Value) -> Result<f64, InputError> {
    let text = text_of(v).ok_or_else(|| InputError::Invalid("radius must be a string or number".into()))?;
    let r = match text.trim() {
        "inf" | "infinity" | "Infinity" => f64::INFINITY,
        t => Scalar::parse(t, Mode::Binary64)
            .map_err(|_| InputError::Invalid(format!("unreadable radius {t:?}")))?
            .to_f64(),
    };
    if r.is_nan() || r < 0.0 {
        return Err(InputError::Invalid(format!("radius must be nonnegative, got {text}")));
    }
    Ok(r)
}

/// Parses a sequence literal; list entries are read in `mode`.
pub fn parse_sequence(text: &str, mode: Mode) -> Result<CoeffSequence, InputError> {
    let lit: SequenceLiteral = serde_json::from_str(text)?;
    let (seq, radius) = match lit {
        SequenceLiteral::Rule { rule, radius } => (parse_rule(&rule)?, radius),
        SequenceLiteral::List { coeffs, radius } => {
            let mut v = Vec::with_capacity(coeffs.len());
            for (i, c) in coeffs.iter().enumerate() {
                let raw =
                    text_of(c).ok_or_else(|| InputError::Invalid(format!("coeffs[{i}] must be a string or number")))?;
                v.push(Scalar::parse(&raw, mode).map_err(|error| InputError::Coefficient { term: i, error })?);
            }
            (CoeffSequence::list(v), radius)
        }
    };
    match radius {
        Some(r) => Ok(seq.with_radius(parse_radius(&r)?)),
        None => Ok(seq),
    }
}

pub fn parse_rule(text: &str) -> Result<CoeffSequence, InputError> {
    CoeffSequence::parse_rule(text).map_err(|error| InputError::Rule {
        text: text.to_string(),
        error,
    })
}

pub fn series_to_json(f: &TruncatedSeries) -> Value {
    let terms: Vec<Value> = f
        .terms()
        .map(|(c, v)| json!({"exp": c.exponents(), "coef": v.to_text()}))
        .collect();
    json!({"q": f.q(), "K": f.max_degree(), "mode": f.mode().as_str(), "terms": terms})
}

fn bound(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn verdict_to_json(v: &ConvergenceVerdict) -> Value {
    match v {
        ConvergenceVerdict::Converged {
            value,
            error_bound,
            regime,
            terms_used,
        } => json!({
            "kind": "Converged",
            "value": value.to_text(),
            "bound": bound(*error_bound),
            "regime": regime,
            "terms": terms_used,
        }),
        ConvergenceVerdict::Diverged(w) => json!({"kind": "Diverged", "witness": w}),
        ConvergenceVerdict::Inconclusive(d) => json!({
            "kind": "Inconclusive",
            "terms": d.terms_used,
            "last_partial_sum": bound(d.last_partial_sum),
            "oscillation": bound(d.oscillation),
            "last_term": bound(d.last_term),
        }),
    }
}

pub fn composition_to_json(r: &CompositionReport) -> Value {
    let g: Vec<Value> = r
        .verdicts
        .iter()
        .enumerate()
        .map(|(s, v)| {
            let mut obj = Map::new();
            obj.insert("s".into(), json!(s));
            if let Value::Object(m) = verdict_to_json(v) {
                obj.extend(m);
            }
            Value::Object(obj)
        })
        .collect();
    json!({
        "q": r.q,
        "K": r.max_degree,
        "b0": r.b0.to_text(),
        "special_case": r.special_case,
        "scope": r.scope,
        "exists": r.exists(),
        "offending_s": if r.exists() == Some(true) { None } else { r.offending() },
        "G": g,
        "result": r.result.as_ref().map(series_to_json),
        "residual": r.cross_check_residual.map(bound),
    })
}

pub fn rdl_status_to_json(s: &RdlStatus) -> Value {
    let mut obj = json!({"status": s.name(), "max_discrepancy": s.max_discrepancy()});
    let extra = match s {
        RdlStatus::LhsNotExists { factor, s, witness } => json!({"factor": factor, "s": s, "witness": witness}),
        RdlStatus::RhsNotExists { s, witness } => json!({"s": s, "witness": witness}),
        RdlStatus::Inconclusive { reason } => json!({"reason": reason}),
        _ => json!({}),
    };
    if let (Value::Object(o), Value::Object(e)) = (&mut obj, extra) {
        o.extend(e);
    }
    obj
}

pub fn rdl_to_json(r: &RdlReport) -> Value {
    let mut obj = json!({
        "q": r.q,
        "K": r.max_degree,
        "lhs": {
            "A": composition_to_json(&r.lhs_a),
            "B": composition_to_json(&r.lhs_b),
            "product": r.lhs_product.as_ref().map(series_to_json),
        },
        "rhs": composition_to_json(&r.rhs),
        "rhs_existence_implied": r.rhs_existence_implied,
    });
    if let (Value::Object(o), Value::Object(s)) = (&mut obj, rdl_status_to_json(&r.status)) {
        o.extend(s);
    }
    obj
}

pub fn counterexample_to_json(r: &CounterexampleReport) -> Value {
    json!({
        "n_terms": r.n_terms,
        "partial_sums": r.partial_sums,
        "product_terms": r.product_terms,
        "min_margin": r.min_margin,
        "lower_bound_holds": r.lower_bound_holds,
        "rdl": rdl_to_json(&r.rdl),
    })
}

pub fn abel_to_json(r: &AbelReport) -> Value {
    json!({
        "sum_a": verdict_to_json(&r.sum_a),
        "sum_b": verdict_to_json(&r.sum_b),
        "sum_c": verdict_to_json(&r.sum_c),
        "product": r.product.map(bound),
        "difference": r.difference.map(bound),
        "combined_bound": r.combined_bound.map(bound),
        "consistent": r.consistent,
        "rdl": rdl_to_json(&r.rdl),
    })
}
