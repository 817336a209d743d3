//! Tabular dataset model: numeric and nominal attributes, ordered rows,
//! an optional class attribute, plus the ARFF/CSV readers and writers and
//! stratified fold splitting built on top of it.

mod arff;
mod csv;
mod folds;

pub use arff::{parse_arff, write_arff};
pub use csv::{parse_csv, write_csv, SchemaHints};
pub use folds::stratified_folds;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attribute name that is promoted to class when it is the last column.
pub const DEFAULT_CLASS_NAME: &str = "KPIAlarms";

/// Attribute kind: numeric, or nominal with an ordered value domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttrKind {
    Numeric,
    Nominal(Vec<String>),
}

/// A named column of the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttrKind,
}

impl Attribute {
    pub fn numeric(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttrKind::Numeric,
        }
    }

    pub fn nominal<S: Into<String>>(name: impl Into<String>, domain: Vec<S>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttrKind::Nominal(domain.into_iter().map(Into::into).collect()),
        }
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self.kind, AttrKind::Nominal(_))
    }

    pub fn domain(&self) -> Option<&[String]> {
        match &self.kind {
            AttrKind::Nominal(d) => Some(d),
            AttrKind::Numeric => None,
        }
    }
}

/// One cell: a finite number, an index into a nominal domain, or missing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Num(f64),
    Nom(usize),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_nom(&self) -> Option<usize> {
        match self {
            Value::Nom(i) => Some(*i),
            _ => None,
        }
    }
}

/// One row; arity always equals the schema length.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub values: Vec<Value>,
}

/// Schema + ordered rows + optional class attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub relation: String,
    pub attributes: Vec<Attribute>,
    pub instances: Vec<Instance>,
    pub class_index: Option<usize>,
}

impl Dataset {
    /// Build an empty dataset, validating the schema invariants.
    pub fn new(relation: impl Into<String>, attributes: Vec<Attribute>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for a in &attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(Error::data(format!("duplicate attribute name `{}`", a.name)));
            }
            if let AttrKind::Nominal(domain) = &a.kind {
                if domain.is_empty() {
                    return Err(Error::data(format!(
                        "nominal attribute `{}` has an empty domain",
                        a.name
                    )));
                }
                let mut vals = std::collections::HashSet::new();
                for v in domain {
                    if !vals.insert(v.as_str()) {
                        return Err(Error::data(format!(
                            "nominal attribute `{}` repeats value `{v}`",
                            a.name
                        )));
                    }
                }
            }
        }
        Ok(Dataset {
            relation: relation.into(),
            attributes,
            instances: Vec::new(),
            class_index: None,
        })
    }

    /// Append a row after checking arity and nominal index ranges.
    pub fn push(&mut self, values: Vec<Value>) -> Result<()> {
        if values.len() != self.attributes.len() {
            return Err(Error::data(format!(
                "row arity {} does not match schema arity {}",
                values.len(),
                self.attributes.len()
            )));
        }
        for (v, a) in values.iter().zip(&self.attributes) {
            match (v, &a.kind) {
                (Value::Nom(i), AttrKind::Nominal(dom)) if *i >= dom.len() => {
                    return Err(Error::data(format!(
                        "nominal index {i} out of range for attribute `{}`",
                        a.name
                    )));
                }
                (Value::Num(x), AttrKind::Numeric) if !x.is_finite() => {
                    return Err(Error::data(format!(
                        "non-finite value in attribute `{}`",
                        a.name
                    )));
                }
                (Value::Num(_), AttrKind::Nominal(_)) | (Value::Nom(_), AttrKind::Numeric) => {
                    return Err(Error::data(format!(
                        "value kind does not match attribute `{}`",
                        a.name
                    )));
                }
                _ => {}
            }
        }
        self.instances.push(Instance { values });
        Ok(())
    }

    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    /// Mark an attribute as the class; it must be nominal.
    pub fn set_class(&mut self, index: usize) -> Result<()> {
        let attr = self
            .attributes
            .get(index)
            .ok_or_else(|| Error::usage(format!("class index {index} out of range")))?;
        if !attr.is_nominal() {
            return Err(Error::usage(format!(
                "class attribute `{}` must be nominal",
                attr.name
            )));
        }
        self.class_index = Some(index);
        Ok(())
    }

    /// Promote the last attribute to class if it carries the default name.
    pub fn apply_default_class(&mut self) {
        if let Some(last) = self.attributes.last() {
            if last.name == DEFAULT_CLASS_NAME && last.is_nominal() {
                self.class_index = Some(self.attributes.len() - 1);
            }
        }
    }

    /// Class domain; errors when no class attribute is set.
    pub fn class_domain(&self) -> Result<&[String]> {
        let idx = self
            .class_index
            .ok_or_else(|| Error::usage("dataset has no class attribute"))?;
        Ok(self.attributes[idx].domain().expect("class is nominal"))
    }

    pub fn num_classes(&self) -> Result<usize> {
        Ok(self.class_domain()?.len())
    }

    /// Class index of a row, if present and not missing.
    pub fn class_of(&self, row: usize) -> Option<usize> {
        let idx = self.class_index?;
        self.instances[row].values[idx].as_nom()
    }

    /// Per-class instance counts over the class domain.
    pub fn class_counts(&self) -> Result<Vec<usize>> {
        let k = self.num_classes()?;
        let mut counts = vec![0usize; k];
        for row in 0..self.instances.len() {
            if let Some(c) = self.class_of(row) {
                counts[c] += 1;
            }
        }
        Ok(counts)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Canonical numeric formatting: up to six significant digits below 1e6,
/// integral rendering above, trailing zeros trimmed. This is the single
/// formatter used by the ARFF/CSV writers and the model renderers, so
/// written files are bit-stable.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    let dec = (5 - mag).max(0) as usize;
    let mut s = format!("{:.*}", dec, v);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

/// Quantize onto the canonical 6-significant-digit grid, so that a value
/// survives a write/parse round-trip exactly.
pub fn canon_num(v: f64) -> f64 {
    fmt_num(v).parse().expect("canonical format is parseable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_num_six_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.5), "1.5");
        assert_eq!(fmt_num(123456.7), "123457");
        assert_eq!(fmt_num(0.001234567), "0.00123457");
        assert_eq!(fmt_num(-2.25), "-2.25");
        assert_eq!(fmt_num(100.0), "100");
        assert_eq!(fmt_num(99.99999999), "100");
        assert_eq!(fmt_num(1.96), "1.96");
    }

    #[test]
    fn canon_num_round_trips() {
        for &v in &[0.0, 1.5, 3.1415926535, 99.95, 1e-4, -17.25, 965.0] {
            let c = canon_num(v);
            assert_eq!(canon_num(c), c);
            assert_eq!(fmt_num(c).parse::<f64>().unwrap(), c);
        }
    }

    #[test]
    fn schema_rejects_duplicates_and_empty_domains() {
        let err = Dataset::new(
            "r",
            vec![Attribute::numeric("a"), Attribute::numeric("a")],
        );
        assert!(err.is_err());
        let err = Dataset::new("r", vec![Attribute::nominal("n", Vec::<String>::new())]);
        assert!(err.is_err());
        let err = Dataset::new("r", vec![Attribute::nominal("n", vec!["x", "x"])]);
        assert!(err.is_err());
    }

    #[test]
    fn push_checks_arity_and_ranges() {
        let mut d = Dataset::new(
            "r",
            vec![
                Attribute::numeric("a"),
                Attribute::nominal("b", vec!["x", "y"]),
            ],
        )
        .unwrap();
        assert!(d.push(vec![Value::Num(1.0)]).is_err());
        assert!(d.push(vec![Value::Num(1.0), Value::Nom(2)]).is_err());
        assert!(d.push(vec![Value::Num(f64::NAN), Value::Nom(0)]).is_err());
        assert!(d.push(vec![Value::Num(1.0), Value::Nom(1)]).is_ok());
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn default_class_promotion() {
        let mut d = Dataset::new(
            "r",
            vec![
                Attribute::numeric("a"),
                Attribute::nominal(DEFAULT_CLASS_NAME, vec!["NORM", "CR", "WARN"]),
            ],
        )
        .unwrap();
        d.apply_default_class();
        assert_eq!(d.class_index, Some(1));
    }
}
