//! Plain-text renderings. Coefficients are listed in graded-lex order.

use std::fmt::Write;

use mfps::composition::CompositionReport;
use mfps::multiindex::enumerate_up_to;
use mfps::outer_seq::ConvergenceVerdict;
use mfps::rdl::{AbelReport, CounterexampleReport, RdlReport, RdlStatus};
use mfps::series::{Scalar, TruncatedSeries};

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.3e}")
    } else {
        "unbounded".into()
    }
}

pub fn series(f: &TruncatedSeries) -> String {
    let mut out = format!("q={} K={} mode={}\n", f.q(), f.max_degree(), f.mode());
    write_coefficients(&mut out, f, "");
    out
}

fn write_coefficients(out: &mut String, f: &TruncatedSeries, indent: &str) {
    let rows: Vec<(String, String)> = enumerate_up_to(f.q(), f.max_degree())
        .into_iter()
        .map(|c| (c.to_string(), f.coefficient(&c).to_text()))
        .collect();
    let width = rows.iter().map(|(c, _)| c.len()).max().unwrap_or(0).max(8);
    let _ = writeln!(out, "{indent}{:<width$}  coefficient", "exponent");
    for (c, v) in rows {
        let _ = writeln!(out, "{indent}{c:<width$}  {v}");
    }
}

pub fn sequence(coeffs: &[Scalar]) -> String {
    let mut out = String::from("n  coefficient\n");
    for (n, c) in coeffs.iter().enumerate() {
        let _ = writeln!(out, "{n}  {}", c.to_text());
    }
    out
}

fn verdict_line(v: &ConvergenceVerdict) -> String {
    match v {
        ConvergenceVerdict::Converged {
            value,
            error_bound,
            regime,
            terms_used,
        } => format!(
            "Converged     {}  +/- {}  ({}, {terms_used} terms)",
            value.to_text(),
            num(*error_bound),
            serde_json::to_value(regime)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default()
        ),
        ConvergenceVerdict::Diverged(w) => format!(
            "Diverged      {} over n in [{}, {}], magnitude {}",
            w.note,
            w.first_index,
            w.last_index,
            num(w.magnitude)
        ),
        ConvergenceVerdict::Inconclusive(d) => format!(
            "Inconclusive  after {} terms: partial sum {}, window spread {}, last term {}",
            d.terms_used,
            num(d.last_partial_sum),
            num(d.oscillation),
            num(d.last_term)
        ),
    }
}

fn write_composition(out: &mut String, r: &CompositionReport, indent: &str) {
    let special = match r.special_case {
        Some(s) => serde_json::to_value(s)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
        None => "none".into(),
    };
    let scope = serde_json::to_value(r.scope)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    let _ = writeln!(
        out,
        "{indent}b0 = {}   special case: {special}   scope: {scope}",
        r.b0.to_text()
    );
    for (s, v) in r.verdicts.iter().enumerate() {
        let _ = writeln!(out, "{indent}G_{s:<3} {}", verdict_line(v));
    }
    match (&r.result, r.exists()) {
        (Some(h), _) => {
            let _ = writeln!(out, "{indent}result (mode {}):", h.mode());
            write_coefficients(out, h, &format!("{indent}  "));
            if let Some(res) = r.cross_check_residual {
                let _ = writeln!(out, "{indent}cross-check residual: {}", num(res));
            }
        }
        (None, Some(true)) => {
            let _ = writeln!(out, "{indent}composition exists");
        }
        (None, Some(false)) => {
            let _ = writeln!(
                out,
                "{indent}composition does not exist (G_{} diverges)",
                r.offending().unwrap_or(0)
            );
        }
        (None, None) => {
            let _ = writeln!(
                out,
                "{indent}existence undecided (G_{} inconclusive)",
                r.offending().unwrap_or(0)
            );
        }
    }
}

pub fn composition(r: &CompositionReport) -> String {
    let mut out = format!("q={} K={}\n", r.q, r.max_degree);
    write_composition(&mut out, r, "");
    out
}

fn status_line(s: &RdlStatus) -> String {
    match s {
        RdlStatus::Holds { max_discrepancy } | RdlStatus::Discrepant { max_discrepancy } => {
            format!("status: {} (max discrepancy {})", s.name(), num(*max_discrepancy))
        }
        RdlStatus::LhsNotExists { factor, s: idx, .. } => {
            format!("status: {} ({factor:?} o P, G_{idx} diverges)", s.name())
        }
        RdlStatus::RhsNotExists { s: idx, witness } => format!(
            "status: {} (G_{idx} diverges{})",
            s.name(),
            witness.as_ref().map(|w| format!(": {}", w.note)).unwrap_or_default()
        ),
        RdlStatus::Inconclusive { reason } => format!("status: {} ({reason})", s.name()),
    }
}

pub fn rdl(r: &RdlReport) -> String {
    let mut out = format!("q={} K={}\n", r.q, r.max_degree);
    for (name, c) in [("A o P", &r.lhs_a), ("B o P", &r.lhs_b), ("(AB) o P", &r.rhs)] {
        let _ = writeln!(out, "{name}:");
        write_composition(&mut out, c, "  ");
    }
    if let Some(p) = &r.lhs_product {
        let _ = writeln!(out, "(A o P)(B o P):");
        write_coefficients(&mut out, p, "  ");
    }
    let _ = writeln!(
        out,
        "rhs existence implied by nonnegativity: {}",
        r.rhs_existence_implied
    );
    let _ = writeln!(out, "{}", status_line(&r.status));
    out
}

pub fn counterexample(r: &CounterexampleReport) -> String {
    let mut out = String::from("partial sums of (-1)^n/sqrt(n+1):\n");
    for row in &r.partial_sums {
        let _ = writeln!(
            out,
            "  n={:<8} S_n={:.10}  |remainder| <= {}",
            row.n,
            row.partial_sum,
            num(row.bound)
        );
    }
    let _ = writeln!(out, "Cauchy square c_n against 2(n+1)/(n+2):");
    for row in &r.product_terms {
        let _ = writeln!(
            out,
            "  n={:<8} c_n={:+.10}  lower bound {:.10}",
            row.n, row.c_n, row.lower_bound
        );
    }
    let _ = writeln!(
        out,
        "lower bound holds for all n <= {}: {} (min margin {})",
        r.n_terms,
        r.lower_bound_holds,
        num(r.min_margin)
    );
    out.push_str(&rdl(&r.rdl));
    out
}

pub fn abel(r: &AbelReport) -> String {
    let mut out = String::new();
    for (name, v) in [("sum a", &r.sum_a), ("sum b", &r.sum_b), ("sum c", &r.sum_c)] {
        let _ = writeln!(out, "{name:<6} {}", verdict_line(v));
    }
    match (r.product, r.difference, r.combined_bound, r.consistent) {
        (Some(p), Some(d), Some(b), Some(ok)) => {
            let _ = writeln!(out, "(sum a)(sum b) = {p:.12}");
            let _ = writeln!(out, "|(sum a)(sum b) - sum c| = {}  combined bound {}", num(d), num(b));
            let _ = writeln!(out, "consistent: {ok}");
        }
        _ => {
            let _ = writeln!(out, "precondition failed: not every sum converged");
        }
    }
    out
}
