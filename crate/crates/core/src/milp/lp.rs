//! CPLEX LP text output, and a reader for the subset we emit.

use std::fmt::Write as _;

use super::model::{LinExpr, MilpModel, Objective, Sense, VarId, VarKind};
use super::MilpError;

const TERMS_PER_LINE: usize = 8;

/// Shortest decimal that round-trips the value rounded to 12 significant
/// digits.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn write_terms(out: &mut String, terms: &[(VarId, f64)], model: &MilpModel) {
    for (i, &(v, c)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.variable(v).name;
        let sign = if c < 0.0 { "-" } else { "+" };
        if i == 0 {
            if c < 0.0 {
                out.push_str("- ");
            }
        } else {
            write!(out, " {sign} ").unwrap();
        }
        let m = c.abs();
        if m == 1.0 {
            out.push_str(name);
        } else {
            write!(out, "{} {}", format_number(m), name).unwrap();
        }
    }
}

/// Deterministic LP text; a feasibility model gets `obj: 0 x` on its first
/// variable.
pub fn write_lp(model: &MilpModel) -> Result<String, MilpError> {
    let first = model.variables().first().ok_or(MilpError::EmptyModel)?;
    let mut out = String::from("\\ molinfer model\n");
    // an objective with no surviving terms is written as a feasibility model
    let (head, expr) = match model.objective() {
        Objective::Feasibility => ("Minimize", None),
        Objective::Minimize(e) => ("Minimize", Some(e.simplified())),
        Objective::Maximize(e) => ("Maximize", Some(e.simplified())),
    };
    match expr.filter(|e| !e.terms.is_empty()) {
        Some(e) => {
            writeln!(out, "{head}").unwrap();
            out.push_str(" obj: ");
            write_terms(&mut out, &e.terms, model);
            out.push('\n');
        }
        None => writeln!(out, "Minimize\n obj: 0 {}", first.name).unwrap(),
    }
    out.push_str("Subject To\n");
    for c in model.constraints() {
        write!(out, " {}: ", c.name).unwrap();
        if c.terms.is_empty() {
            write!(out, "0 {}", first.name).unwrap();
        } else {
            write_terms(&mut out, &c.terms, model);
        }
        writeln!(out, " {} {}", c.sense, format_number(c.rhs)).unwrap();
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            continue;
        }
        let lo = v.lower;
        let hi = v.upper;
        if lo == hi {
            writeln!(out, " {} = {}", v.name, format_number(lo)).unwrap();
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            writeln!(out, " {} free", v.name).unwrap();
        } else if hi == f64::INFINITY {
            writeln!(out, " {} >= {}", v.name, format_number(lo)).unwrap();
        } else {
            writeln!(out, " {} <= {} <= {}", format_number(lo), v.name, format_number(hi)).unwrap();
        }
    }
    let generals: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Integer)
        .map(|v| v.name.as_str())
        .collect();
    let binaries: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    for (title, names) in [("Generals", generals), ("Binaries", binaries)] {
        if names.is_empty() {
            continue;
        }
        writeln!(out, "{title}").unwrap();
        for chunk in names.chunks(TERMS_PER_LINE) {
            writeln!(out, " {}", chunk.join(" ")).unwrap();
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
}

fn parse_number(tok: &str, line: usize) -> Result<f64, MilpError> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| MilpError::LpSyntax {
            line,
            message: format!("expected a number, found `{tok}`"),
        }),
    }
}

fn is_number(tok: &str) -> bool {
    tok.parse::<f64>().is_ok()
}

/// Reads the LP subset produced by [`write_lp`]. Variables are declared in
/// order of first appearance.
pub fn read_lp(text: &str) -> Result<MilpModel, MilpError> {
    // join continuation lines onto their statement
    let mut statements: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with("   ") && !statements.is_empty() {
            let last = statements.last_mut().unwrap();
            last.1.push(' ');
            last.1.push_str(line.trim());
        } else {
            statements.push((i + 1, line.trim().to_string()));
        }
    }

    struct Pending {
        name: String,
        terms: Vec<(String, f64)>,
        sense: Sense,
        rhs: f64,
    }
    let mut order: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut declare = |n: &str, order: &mut Vec<String>| {
        if seen.insert(n.to_string()) {
            order.push(n.to_string());
        }
    };
    let mut objective: Option<(bool, Vec<(String, f64)>)> = None;
    let mut constraints: Vec<Pending> = Vec::new();
    let mut bounds: std::collections::HashMap<String, (f64, f64)> = Default::default();
    let mut kinds: std::collections::HashMap<String, VarKind> = Default::default();
    let mut section = None;
    let mut maximize = false;

    let parse_terms = |toks: &[&str], line: usize| -> Result<Vec<(String, f64)>, MilpError> {
        let mut terms = Vec::new();
        let mut sign = 1.0;
        let mut coef: Option<f64> = None;
        for &t in toks {
            match t {
                "+" => sign = 1.0,
                "-" => sign = -1.0,
                _ if is_number(t) => coef = Some(parse_number(t, line)?),
                _ => {
                    terms.push((t.to_string(), sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
        Ok(terms)
    };

    for (line, stmt) in &statements {
        let lower = stmt.to_ascii_lowercase();
        match lower.as_str() {
            "minimize" | "maximize" => {
                maximize = lower == "maximize";
                section = Some(Section::Objective);
                continue;
            }
            "subject to" => {
                section = Some(Section::Constraints);
                continue;
            }
            "bounds" => {
                section = Some(Section::Bounds);
                continue;
            }
            "generals" => {
                section = Some(Section::Generals);
                continue;
            }
            "binaries" => {
                section = Some(Section::Binaries);
                continue;
            }
            "end" => break,
            _ => {}
        }
        let syntax = |message: &str| MilpError::LpSyntax {
            line: *line,
            message: message.to_string(),
        };
        match section.ok_or_else(|| syntax("statement outside any section"))? {
            Section::Objective => {
                let body = stmt.split_once(':').map_or(stmt.as_str(), |p| p.1);
                let toks: Vec<&str> = body.split_whitespace().collect();
                let terms = parse_terms(&toks, *line)?;
                for (n, _) in &terms {
                    declare(n, &mut order);
                }
                objective = Some((maximize, terms));
            }
            Section::Constraints => {
                let (name, body) = stmt.split_once(':').ok_or_else(|| syntax("constraint without a name"))?;
                let toks: Vec<&str> = body.split_whitespace().collect();
                let pos = toks
                    .iter()
                    .position(|t| matches!(*t, "<=" | ">=" | "=" | "<" | ">" | "=<" | "=>"))
                    .ok_or_else(|| syntax("constraint without a sense"))?;
                let sense = match toks[pos] {
                    "<=" | "<" | "=<" => Sense::Le,
                    ">=" | ">" | "=>" => Sense::Ge,
                    _ => Sense::Eq,
                };
                let rhs_tok = toks.get(pos + 1).ok_or_else(|| syntax("missing right-hand side"))?;
                let terms = parse_terms(&toks[..pos], *line)?;
                for (n, _) in &terms {
                    declare(n, &mut order);
                }
                constraints.push(Pending {
                    name: name.trim().to_string(),
                    terms,
                    sense,
                    rhs: parse_number(rhs_tok, *line)?,
                });
            }
            Section::Bounds => {
                let toks: Vec<&str> = stmt.split_whitespace().collect();
                let (name, lo, hi) = match toks.as_slice() {
                    [n, "free"] => (*n, f64::NEG_INFINITY, f64::INFINITY),
                    [n, "=", v] => {
                        let v = parse_number(v, *line)?;
                        (*n, v, v)
                    }
                    [n, ">=", v] => (*n, parse_number(v, *line)?, f64::INFINITY),
                    [n, "<=", v] => (*n, 0.0, parse_number(v, *line)?),
                    [lo, "<=", n, "<=", hi] => (*n, parse_number(lo, *line)?, parse_number(hi, *line)?),
                    _ => return Err(syntax("unsupported bound statement")),
                };
                declare(name, &mut order);
                bounds.insert(name.to_string(), (lo, hi));
            }
            Section::Generals | Section::Binaries => {
                let kind = if section == Some(Section::Generals) {
                    VarKind::Integer
                } else {
                    VarKind::Binary
                };
                for n in stmt.split_whitespace() {
                    declare(n, &mut order);
                    kinds.insert(n.to_string(), kind);
                }
            }
        }
    }

    let mut model = MilpModel::new();
    for n in &order {
        let kind = kinds.get(n).copied().unwrap_or(VarKind::Continuous);
        let (lo, hi) = bounds.get(n).copied().unwrap_or((0.0, f64::INFINITY));
        let v = model.add_var(n, kind, lo, hi)?;
        if kind == VarKind::Binary && bounds.contains_key(n) {
            model.restrict_bounds(v, lo, hi)?;
        }
    }
    let resolve = |terms: &[(String, f64)], model: &MilpModel| -> Vec<(VarId, f64)> {
        terms
            .iter()
            .map(|(n, c)| (model.var_by_name(n).expect("declared above"), *c))
            .collect()
    };
    for c in &constraints {
        let terms = resolve(&c.terms, &model);
        model.add_constraint(&c.name, terms, c.sense, c.rhs)?;
    }
    if let Some((max, terms)) = objective {
        let expr = LinExpr::from(resolve(&terms, &model)).simplified();
        if !expr.terms.is_empty() {
            model.set_objective(if max {
                Objective::Maximize(expr)
            } else {
                Objective::Minimize(expr)
            })?;
        }
    }
    Ok(model)
}
