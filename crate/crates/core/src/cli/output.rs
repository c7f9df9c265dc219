//! Number formatting and table/record rendering.

use std::fmt::Write as _;

use num_complex::Complex;
use serde_json::{json, Value};

use crate::kernel::Truncation;
use crate::tower::TowerReport;

/// Full precision for machine files: 17 significant digits.
pub fn full(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        non_finite(x).to_string()
    }
}

fn non_finite(x: f64) -> &'static str {
    if x.is_nan() {
        "nan"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

/// Six significant digits for terminal summaries.
pub fn human(x: f64) -> String {
    if !x.is_finite() {
        return non_finite(x).to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor();
    if (-4.0..6.0).contains(&mag) {
        let decimals = (5.0 - mag).max(0.0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

pub fn human_complex(z: Complex<f64>) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{} {sign} {}i", human(z.re), human(z.im.abs()))
}

/// JSON number, or a string for values JSON cannot represent.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(non_finite(x))
    }
}

pub fn pair(z: Complex<f64>) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn opt(x: Option<f64>) -> String {
    x.map(full).unwrap_or_else(|| "none".to_string())
}

pub fn truncation_header(t: &Truncation<f64>) -> String {
    format!(
        "# max_word_length={} policy={} terms_used={} fitted_ratio={} decaying={}\n",
        t.max_len,
        t.policy,
        t.terms_used,
        opt(t.fitted_ratio),
        t.decaying
    )
}

pub fn truncation_record(t: &Truncation<f64>) -> Value {
    json!({
        "max_word_length": t.max_len,
        "policy": t.policy.to_string(),
        "terms_used": t.terms_used,
        "fitted_ratio": t.fitted_ratio.map(num),
        "decaying": t.decaying,
    })
}

const TOWER_COLUMNS: &str = "level,index,tau_j,tau_certified,sup_grid_error,ej_bound,hyp_norm_deviation,terms_used,tail,partition_residual,hyp_norm_bound,hyp_norm_excess,excess_bound";

pub fn tower_csv(r: &TowerReport<f64>, hash: &str, policy: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# config_sha256={hash}");
    let _ = writeln!(
        s,
        "# max_word_length={} policy={} elements={} grid_points={} fitted_ratio={} decaying={}",
        r.max_len,
        policy,
        r.elements,
        r.grid_points,
        opt(r.fitted_ratio),
        r.decaying
    );
    let _ = writeln!(s, "{TOWER_COLUMNS}");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.level,
            row.index,
            full(row.tau),
            row.tau_certified,
            full(row.sup_grid_error),
            full(row.ej_bound),
            full(row.hyp_norm_deviation),
            row.terms_used,
            full(row.tail),
            full(row.partition_residual),
            full(row.hyp_norm_bound),
            full(row.hyp_norm_excess),
            full(row.excess_bound),
        );
    }
    s
}

pub fn tower_records(r: &TowerReport<f64>, hash: &str, policy: &str) -> String {
    let mut lines = vec![json!({
        "record": "tower",
        "config_sha256": hash,
        "max_word_length": r.max_len,
        "policy": policy,
        "elements": r.elements,
        "grid_points": r.grid_points,
        "fitted_ratio": r.fitted_ratio.map(num),
        "decaying": r.decaying,
    })];
    for row in &r.rows {
        lines.push(json!({
            "record": "level",
            "level": row.level,
            "index": row.index.to_string(),
            "tau_j": num(row.tau),
            "tau_certified": row.tau_certified,
            "sup_grid_error": num(row.sup_grid_error),
            "ej_bound": num(row.ej_bound),
            "hyp_norm_deviation": num(row.hyp_norm_deviation),
            "terms_used": row.terms_used,
            "tail": num(row.tail),
            "partition_residual": num(row.partition_residual),
            "hyp_norm_bound": num(row.hyp_norm_bound),
            "hyp_norm_excess": num(row.hyp_norm_excess),
            "excess_bound": num(row.excess_bound),
        }));
    }
    lines.into_iter().map(|v| v.to_string() + "\n").collect()
}

pub fn tower_human(r: &TowerReport<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>5} {:>6} {:>12} {:>12} {:>12} {:>12} {:>8}",
        "level", "index", "tau_j", "sup|E_j|", "E_j bound", "hyp dev", "terms"
    );
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{:>5} {:>6} {:>12} {:>12} {:>12} {:>12} {:>8}",
            row.level,
            row.index.to_string(),
            human(row.tau),
            human(row.sup_grid_error),
            human(row.ej_bound),
            human(row.hyp_norm_deviation),
            row.terms_used
        );
    }
    let _ = writeln!(
        s,
        "elements enumerated: {} (max word length {})",
        r.elements, r.max_len
    );
    s
}
