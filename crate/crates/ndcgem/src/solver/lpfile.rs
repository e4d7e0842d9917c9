//! CPLEX LP format writer, used for `--debug-lp` dumps.

use std::fmt::Write as _;

use super::model::LinearModel;

fn sanitize(name: &str, fallback: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "_.(),".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    match s.chars().next() {
        None => fallback.to_string(),
        Some(c) if c.is_ascii_digit() || c == '.' => format!("_{s}"),
        _ => s,
    }
}

fn term(out: &mut String, coef: f64, name: &str, first: bool) {
    if coef < 0.0 {
        let _ = write!(out, " - {} {}", -coef, name);
    } else if first {
        let _ = write!(out, " {coef} {name}");
    } else {
        let _ = write!(out, " + {coef} {name}");
    }
}

/// Renders `model` as LP text. Column and row names are made LP-safe and
/// disambiguated with their index where needed.
pub fn to_lp_string(model: &LinearModel) -> String {
    let names: Vec<String> = model
        .vars
        .iter()
        .enumerate()
        .map(|(j, v)| format!("{}#{j}", sanitize(&v.name, "x")).replace('#', "_"))
        .collect();
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let mut first = true;
    for (j, &c) in model.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut out, c, &names[j], first);
            first = false;
        }
    }
    if model.objective_offset != 0.0 || first {
        term(&mut out, model.objective_offset, "", first);
    }
    out.push_str("\nSubject To\n");
    for (i, r) in model.rows.iter().enumerate() {
        let name = format!("{}_{i}", sanitize(&r.name, "r"));
        let mut lhs = String::new();
        let mut first = true;
        for &(v, a) in &r.coeffs {
            term(&mut lhs, a, &names[v.0], first);
            first = false;
        }
        if first {
            lhs.push_str(" 0 ");
            lhs.push_str(&names.first().cloned().unwrap_or_default());
        }
        let (lo, hi) = (r.lower, r.upper);
        if lo == hi {
            let _ = writeln!(out, " {name}:{lhs} = {lo}");
        } else if lo.is_finite() && hi.is_finite() {
            let _ = writeln!(out, " {name}: {lo} <={lhs} <= {hi}");
        } else if lo.is_finite() {
            let _ = writeln!(out, " {name}:{lhs} >= {lo}");
        } else if hi.is_finite() {
            let _ = writeln!(out, " {name}:{lhs} <= {hi}");
        }
    }
    out.push_str("Bounds\n");
    for (j, v) in model.vars.iter().enumerate() {
        let n = &names[j];
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {n} free");
            }
            (true, true) if v.lower == v.upper => {
                let _ = writeln!(out, " {n} = {}", v.lower);
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {n} <= {}", v.lower, v.upper);
            }
            (true, false) => {
                if v.lower != 0.0 {
                    let _ = writeln!(out, " {n} >= {}", v.lower);
                }
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {n} <= {}", v.upper);
            }
        }
    }
    let ints: Vec<&String> = model.integer_vars().map(|v| &names[v.0]).collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for n in ints {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    out
}
