//! ARFF reader/writer for the subset used by cell-KPI datasets:
//! `@relation`, `@attribute <name> numeric`, `@attribute <name> {v1,...}`,
//! `@data`, `%` comments, and `?` missing cells. No date, string, or
//! sparse attributes.

use super::{fmt_num, AttrKind, Attribute, Dataset, Value};
use crate::error::{Error, Result};

/// Parse ARFF text into a dataset. Errors carry 1-based line numbers.
pub fn parse_arff(text: &str) -> Result<Dataset> {
    let mut relation = String::new();
    let mut attributes: Vec<Attribute> = Vec::new();
    let mut in_data = false;
    let mut dataset: Option<Dataset> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("@relation") {
                relation = line["@relation".len()..].trim().to_string();
            } else if lower.starts_with("@attribute") {
                let rest = line["@attribute".len()..].trim();
                attributes.push(parse_attribute(rest, lineno)?);
            } else if lower == "@data" {
                let mut d = Dataset::new(relation.clone(), attributes.clone())
                    .map_err(|e| Error::data(format!("line {lineno}: {e}")))?;
                d.apply_default_class();
                dataset = Some(d);
                in_data = true;
            } else {
                return Err(Error::data(format!(
                    "line {lineno}: unrecognized ARFF directive `{line}`"
                )));
            }
        } else {
            let d = dataset.as_mut().expect("in data section");
            let values = parse_row(line, &d.attributes, lineno)?;
            d.push(values)
                .map_err(|e| Error::data(format!("line {lineno}: {e}")))?;
        }
    }

    dataset.ok_or_else(|| Error::data("missing @data section"))
}

fn parse_attribute(rest: &str, lineno: usize) -> Result<Attribute> {
    let rest = rest.trim();
    if let Some(brace) = rest.find('{') {
        let name = rest[..brace].trim();
        if name.is_empty() {
            return Err(Error::data(format!("line {lineno}: attribute without a name")));
        }
        let close = rest
            .rfind('}')
            .ok_or_else(|| Error::data(format!("line {lineno}: unterminated nominal domain")))?;
        let domain: Vec<String> = rest[brace + 1..close]
            .split(',')
            .map(|v| v.trim().to_string())
            .collect();
        if domain.iter().any(|v| v.is_empty()) {
            return Err(Error::data(format!(
                "line {lineno}: empty value in nominal domain"
            )));
        }
        Ok(Attribute::nominal(name, domain))
    } else {
        let mut parts = rest.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| Error::data(format!("line {lineno}: attribute without a name")))?;
        let kind = parts
            .next()
            .ok_or_else(|| Error::data(format!("line {lineno}: attribute `{name}` without a type")))?;
        if !kind.eq_ignore_ascii_case("numeric") {
            return Err(Error::data(format!(
                "line {lineno}: unsupported attribute type `{kind}`"
            )));
        }
        Ok(Attribute::numeric(name))
    }
}

fn parse_row(line: &str, attributes: &[Attribute], lineno: usize) -> Result<Vec<Value>> {
    let cells: Vec<&str> = line.split(',').map(str::trim).collect();
    if cells.len() != attributes.len() {
        return Err(Error::data(format!(
            "line {lineno}: row has {} cells but the schema declares {} attributes",
            cells.len(),
            attributes.len()
        )));
    }
    cells
        .iter()
        .zip(attributes)
        .map(|(cell, attr)| parse_cell(cell, attr, lineno))
        .collect()
}

fn parse_cell(cell: &str, attr: &Attribute, lineno: usize) -> Result<Value> {
    if cell == "?" {
        return Ok(Value::Missing);
    }
    match &attr.kind {
        AttrKind::Numeric => {
            let v: f64 = cell.parse().map_err(|_| {
                Error::data(format!(
                    "line {lineno}: cannot parse `{cell}` as a number for attribute `{}`",
                    attr.name
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::data(format!(
                    "line {lineno}: non-finite value for attribute `{}`",
                    attr.name
                )));
            }
            Ok(Value::Num(v))
        }
        AttrKind::Nominal(domain) => domain
            .iter()
            .position(|d| d == cell)
            .map(Value::Nom)
            .ok_or_else(|| {
                Error::data(format!(
                    "line {lineno}: value `{cell}` is not in the domain of attribute `{}`",
                    attr.name
                ))
            }),
    }
}

/// Write the canonical ARFF form: one attribute per line, numeric values
/// in the canonical 6-significant-digit format, `?` for missing cells.
pub fn write_arff(dataset: &Dataset) -> String {
    let mut out = String::new();
    out.push_str("@relation ");
    out.push_str(&dataset.relation);
    out.push('\n');
    for attr in &dataset.attributes {
        match &attr.kind {
            AttrKind::Numeric => {
                out.push_str(&format!("@attribute {} numeric\n", attr.name));
            }
            AttrKind::Nominal(domain) => {
                out.push_str(&format!("@attribute {} {{{}}}\n", attr.name, domain.join(",")));
            }
        }
    }
    out.push_str("@data\n");
    for inst in &dataset.instances {
        let row: Vec<String> = inst
            .values
            .iter()
            .zip(&dataset.attributes)
            .map(|(v, a)| match v {
                Value::Missing => "?".to_string(),
                Value::Num(x) => fmt_num(*x),
                Value::Nom(i) => a.domain().expect("nominal")[*i].clone(),
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
