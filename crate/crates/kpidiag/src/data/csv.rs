//! CSV reader/writer sharing the dataset model with ARFF. Header row is
//! required; cells containing commas, quotes, or newlines are `"`-quoted;
//! an empty cell is a missing value.

use std::collections::HashMap;

use super::{fmt_num, AttrKind, Attribute, Dataset, Value};
use crate::error::{Error, Result};

/// Per-column kind overrides for `parse_csv`. Unhinted columns are
/// inferred: all-numeric cells make a numeric column, anything else is
/// nominal with the domain in first-appearance order.
#[derive(Debug, Clone, Default)]
pub struct SchemaHints {
    forced: HashMap<String, AttrKind>,
}

impl SchemaHints {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn force_numeric(mut self, column: impl Into<String>) -> Self {
        self.forced.insert(column.into(), AttrKind::Numeric);
        self
    }

    pub fn force_nominal(mut self, column: impl Into<String>) -> Self {
        self.forced
            .insert(column.into(), AttrKind::Nominal(Vec::new()));
        self
    }

    fn get(&self, column: &str) -> Option<&AttrKind> {
        self.forced.get(column)
    }
}

/// Split one CSV record, honoring `""`-quoting. Returns the raw cells.
fn split_record(line: &str, lineno: usize) -> Result<Vec<String>> {
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut in_quotes = false;
    while let Some(ch) = chars.next() {
        if in_quotes {
            if ch == '"' {
                if chars.peek() == Some(&'"') {
                    cur.push('"');
                    chars.next();
                } else {
                    in_quotes = false;
                }
            } else {
                cur.push(ch);
            }
        } else {
            match ch {
                '"' => in_quotes = true,
                ',' => {
                    cells.push(std::mem::take(&mut cur));
                }
                _ => cur.push(ch),
            }
        }
    }
    if in_quotes {
        return Err(Error::data(format!("line {lineno}: unterminated quote")));
    }
    cells.push(cur);
    Ok(cells)
}

fn quote_cell(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Parse CSV text into a dataset. The last column is promoted to class
/// when it is nominal and named `KPIAlarms`, mirroring the ARFF rule.
pub fn parse_csv(text: &str, hints: &SchemaHints) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();
    let (_, header_line) = lines
        .next()
        .ok_or_else(|| Error::data("empty input: missing header row"))?;
    let names = split_record(header_line, 1)?;
    if names.iter().all(|n| n.trim().is_empty()) {
        return Err(Error::data("empty header row"));
    }
    let names: Vec<String> = names.into_iter().map(|n| n.trim().to_string()).collect();
    if names.iter().any(|n| n.is_empty()) {
        return Err(Error::data("header row contains an empty column name"));
    }

    // First pass: collect raw cells, tracking the source line per row.
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for (idx, raw) in lines {
        let lineno = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let cells = split_record(raw, lineno)?;
        if cells.len() != names.len() {
            return Err(Error::data(format!(
                "line {lineno}: row has {} cells but the header declares {} columns",
                cells.len(),
                names.len()
            )));
        }
        rows.push((lineno, cells));
    }

    // Decide each column's kind.
    let mut attributes = Vec::with_capacity(names.len());
    for (col, name) in names.iter().enumerate() {
        let forced = hints.get(name);
        let numeric = match forced {
            Some(AttrKind::Numeric) => true,
            Some(AttrKind::Nominal(_)) => false,
            None => rows
                .iter()
                .all(|(_, cells)| cells[col].is_empty() || cells[col].parse::<f64>().is_ok()),
        };
        if numeric {
            attributes.push(Attribute::numeric(name.clone()));
        } else {
            let mut domain: Vec<String> = Vec::new();
            for (_, cells) in &rows {
                let cell = &cells[col];
                if !cell.is_empty() && !domain.iter().any(|d| d == cell) {
                    domain.push(cell.clone());
                }
            }
            if domain.is_empty() {
                return Err(Error::data(format!(
                    "column `{name}` is nominal but has no values"
                )));
            }
            attributes.push(Attribute::nominal(name.clone(), domain));
        }
    }

    let mut dataset = Dataset::new("csv-import", attributes)?;
    for (lineno, cells) in &rows {
        let values: Result<Vec<Value>> = cells
            .iter()
            .zip(&dataset.attributes)
            .map(|(cell, attr)| {
                if cell.is_empty() {
                    return Ok(Value::Missing);
                }
                match &attr.kind {
                    AttrKind::Numeric => {
                        let v: f64 = cell.parse().map_err(|_| {
                            Error::data(format!(
                                "line {lineno}: cannot parse `{cell}` as a number for column `{}`",
                                attr.name
                            ))
                        })?;
                        if !v.is_finite() {
                            return Err(Error::data(format!(
                                "line {lineno}: non-finite value in column `{}`",
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
                                "line {lineno}: value `{cell}` is not in the domain of column `{}`",
                                attr.name
                            ))
                        }),
                }
            })
            .collect();
        dataset.push(values?)?;
    }
    dataset.apply_default_class();
    Ok(dataset)
}

/// Write CSV with the canonical numeric format; missing cells are empty.
pub fn write_csv(dataset: &Dataset) -> String {
    let mut out = String::new();
    let header: Vec<String> = dataset
        .attributes
        .iter()
        .map(|a| quote_cell(&a.name))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for inst in &dataset.instances {
        let row: Vec<String> = inst
            .values
            .iter()
            .zip(&dataset.attributes)
            .map(|(v, a)| match v {
                Value::Missing => String::new(),
                Value::Num(x) => fmt_num(*x),
                Value::Nom(i) => quote_cell(&a.domain().expect("nominal")[*i]),
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infers_numeric_and_nominal_columns() {
        let d = parse_csv("a,b\n1,x\n2,y\n", &SchemaHints::none()).unwrap();
        assert_eq!(d.attributes[0].kind, AttrKind::Numeric);
        assert_eq!(
            d.attributes[1].kind,
            AttrKind::Nominal(vec!["x".into(), "y".into()])
        );
    }

    #[test]
    fn nominal_domain_in_first_appearance_order() {
        let d = parse_csv("c\nz\na\nz\nm\n", &SchemaHints::none()).unwrap();
        assert_eq!(
            d.attributes[0].domain().unwrap(),
            &["z".to_string(), "a".to_string(), "m".to_string()]
        );
    }

    #[test]
    fn forced_numeric_on_text_is_a_data_error() {
        let hints = SchemaHints::none().force_numeric("b");
        let err = parse_csv("a,b\n1,x\n", &hints).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn forced_nominal_keeps_numbers_as_strings() {
        let hints = SchemaHints::none().force_nominal("a");
        let d = parse_csv("a\n1\n2\n1\n", &hints).unwrap();
        assert_eq!(
            d.attributes[0].domain().unwrap(),
            &["1".to_string(), "2".to_string()]
        );
    }

    #[test]
    fn ragged_row_is_a_data_error() {
        let err = parse_csv("a,b\n1\n", &SchemaHints::none()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn empty_header_is_a_data_error() {
        assert!(parse_csv("\n1\n", &SchemaHints::none()).is_err());
        assert!(parse_csv("", &SchemaHints::none()).is_err());
    }

    #[test]
    fn quoting_round_trips() {
        let text = "name,v\n\"a,b\",1\n\"say \"\"hi\"\"\",2\n";
        let d = parse_csv(text, &SchemaHints::none()).unwrap();
        assert_eq!(d.attributes[0].domain().unwrap()[0], "a,b");
        assert_eq!(d.attributes[0].domain().unwrap()[1], "say \"hi\"");
        let again = parse_csv(&write_csv(&d), &SchemaHints::none()).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn empty_cell_is_missing() {
        let d = parse_csv("a,b\n1,\n,x\n", &SchemaHints::none()).unwrap();
        assert!(d.instances[0].values[1].is_missing());
        assert!(d.instances[1].values[0].is_missing());
    }

    #[test]
    fn class_promotion_applies_to_csv_too() {
        let d = parse_csv("a,KPIAlarms\n1,NORM\n2,WARN\n", &SchemaHints::none()).unwrap();
        assert_eq!(d.class_index, Some(1));
    }
}
