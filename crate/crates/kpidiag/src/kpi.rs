//! KPI severity model and fault labeling.
//!
//! Four driver KPIs feed the alarm state of a cell: dropped-call rate
//! (DCR), call-setup success rate (CSSR), traffic rate (TR), and handover
//! failure rate (HOF). Each driver maps into one of three bands, and two
//! labeling modes combine the bands into an alarm class:
//!
//! - `SeverityMax`: the worst per-KPI band wins. Total and monotone.
//! - `Figure2`: a fixed first-match rule cascade over the raw values,
//!   using its own hard-coded constants (HOF bound 25 instead of 15).

use std::collections::HashMap;
use std::fmt;

use crate::data::{AttrKind, Attribute, Dataset, Value, DEFAULT_CLASS_NAME};
use crate::error::{Error, Result};

/// Alarm severity. The order is ascending severity: a warning cell is in
/// worse shape than a critical one on this scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlarmClass {
    Norm,
    Cr,
    Warn,
}

impl AlarmClass {
    pub const ALL: [AlarmClass; 3] = [AlarmClass::Norm, AlarmClass::Cr, AlarmClass::Warn];

    pub fn as_str(&self) -> &'static str {
        match self {
            AlarmClass::Norm => "NORM",
            AlarmClass::Cr => "CR",
            AlarmClass::Warn => "WARN",
        }
    }

    pub fn from_str(s: &str) -> Option<AlarmClass> {
        match s {
            "NORM" => Some(AlarmClass::Norm),
            "CR" => Some(AlarmClass::Cr),
            "WARN" => Some(AlarmClass::Warn),
            _ => None,
        }
    }

    /// Position in the canonical class domain (NORM, CR, WARN).
    pub fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for AlarmClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Driver KPI roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriverKpi {
    Dcr,
    Cssr,
    Tr,
    Hof,
}

impl DriverKpi {
    pub const ALL: [DriverKpi; 4] = [DriverKpi::Dcr, DriverKpi::Cssr, DriverKpi::Tr, DriverKpi::Hof];

    pub fn as_str(&self) -> &'static str {
        match self {
            DriverKpi::Dcr => "dcr",
            DriverKpi::Cssr => "cssr",
            DriverKpi::Tr => "tr",
            DriverKpi::Hof => "hof",
        }
    }

    /// Higher values are worse for every driver except CSSR.
    pub fn higher_is_worse(&self) -> bool {
        !matches!(self, DriverKpi::Cssr)
    }
}

/// A cell's four driver KPI readings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverKpis {
    pub dcr: f64,
    pub cssr: f64,
    pub tr: f64,
    pub hof: f64,
}

impl DriverKpis {
    pub fn new(dcr: f64, cssr: f64, tr: f64, hof: f64) -> Result<Self> {
        let k = DriverKpis { dcr, cssr, tr, hof };
        k.check_finite()?;
        Ok(k)
    }

    fn check_finite(&self) -> Result<()> {
        for (role, v) in self.iter() {
            if !v.is_finite() {
                return Err(Error::data(format!(
                    "driver KPI {} is not finite",
                    role.as_str()
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, role: DriverKpi) -> f64 {
        match role {
            DriverKpi::Dcr => self.dcr,
            DriverKpi::Cssr => self.cssr,
            DriverKpi::Tr => self.tr,
            DriverKpi::Hof => self.hof,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (DriverKpi, f64)> + '_ {
        DriverKpi::ALL.iter().map(move |&r| (r, self.get(r)))
    }
}

/// Two band boundaries per driver KPI.
///
/// For the higher-is-worse drivers, `cr` opens the critical band and
/// `warn` opens the warning band: NORM below `cr`, CR in `[cr, warn)`,
/// WARN at or above `warn`. For CSSR the orientation flips: NORM at or
/// above `cr`, CR in `[warn, cr)`, WARN below `warn`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub cr: f64,
    pub warn: f64,
}

/// Band boundaries for all four drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpiThresholds {
    pub dcr: Band,
    pub cssr: Band,
    pub tr: Band,
    pub hof: Band,
}

impl Default for KpiThresholds {
    fn default() -> Self {
        KpiThresholds {
            dcr: Band { cr: 2.0, warn: 4.0 },
            cssr: Band { cr: 98.0, warn: 90.0 },
            tr: Band { cr: 60.0, warn: 70.0 },
            hof: Band { cr: 10.0, warn: 15.0 },
        }
    }
}

impl KpiThresholds {
    pub fn band(&self, role: DriverKpi) -> Band {
        match role {
            DriverKpi::Dcr => self.dcr,
            DriverKpi::Cssr => self.cssr,
            DriverKpi::Tr => self.tr,
            DriverKpi::Hof => self.hof,
        }
    }

    fn band_mut(&mut self, role: DriverKpi) -> &mut Band {
        match role {
            DriverKpi::Dcr => &mut self.dcr,
            DriverKpi::Cssr => &mut self.cssr,
            DriverKpi::Tr => &mut self.tr,
            DriverKpi::Hof => &mut self.hof,
        }
    }

    /// Boundaries must be finite, distinct, and ordered per orientation.
    pub fn validate(&self) -> Result<()> {
        for role in DriverKpi::ALL {
            let b = self.band(role);
            if !b.cr.is_finite() || !b.warn.is_finite() {
                return Err(Error::usage(format!(
                    "thresholds for {} are not finite",
                    role.as_str()
                )));
            }
            let ordered = if role.higher_is_worse() {
                b.cr < b.warn
            } else {
                b.warn < b.cr
            };
            if !ordered {
                return Err(Error::usage(format!(
                    "thresholds for {} are not ordered for its orientation ({} / {})",
                    role.as_str(),
                    b.cr,
                    b.warn
                )));
            }
        }
        Ok(())
    }
}

/// Association from driver role to a dataset attribute name.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiMapping {
    pub dcr: String,
    pub cssr: String,
    pub tr: String,
    pub hof: String,
}

impl Default for KpiMapping {
    fn default() -> Self {
        KpiMapping {
            dcr: "TCHDropRate".into(),
            cssr: "TCHSS".into(),
            tr: "TCHTR".into(),
            hof: "HOFR".into(),
        }
    }
}

impl KpiMapping {
    pub fn name(&self, role: DriverKpi) -> &str {
        match role {
            DriverKpi::Dcr => &self.dcr,
            DriverKpi::Cssr => &self.cssr,
            DriverKpi::Tr => &self.tr,
            DriverKpi::Hof => &self.hof,
        }
    }

    fn name_mut(&mut self, role: DriverKpi) -> &mut String {
        match role {
            DriverKpi::Dcr => &mut self.dcr,
            DriverKpi::Cssr => &mut self.cssr,
            DriverKpi::Tr => &mut self.tr,
            DriverKpi::Hof => &mut self.hof,
        }
    }

    /// Resolve the mapped column indices against a dataset, checking that
    /// the mapping is injective and that every target is numeric.
    pub fn resolve(&self, dataset: &Dataset) -> Result<[usize; 4]> {
        let mut indices = [0usize; 4];
        for (slot, role) in DriverKpi::ALL.iter().enumerate() {
            let name = self.name(*role);
            let idx = dataset.attr_index(name).ok_or_else(|| {
                Error::data(format!(
                    "mapped attribute `{name}` for {} is not in the dataset schema",
                    role.as_str()
                ))
            })?;
            if dataset.attributes[idx].is_nominal() {
                return Err(Error::data(format!(
                    "mapped attribute `{name}` must be numeric"
                )));
            }
            indices[slot] = idx;
        }
        let mut sorted = indices;
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::usage("KPI mapping is not injective"));
        }
        Ok(indices)
    }
}

/// Labeling mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    SeverityMax,
    Figure2,
}

impl LabelMode {
    pub fn from_str(s: &str) -> Option<LabelMode> {
        match s {
            "severity-max" => Some(LabelMode::SeverityMax),
            "figure2" => Some(LabelMode::Figure2),
            _ => None,
        }
    }
}

/// Band of a single KPI reading.
pub fn classify_kpi(role: DriverKpi, value: f64, thresholds: &KpiThresholds) -> Result<AlarmClass> {
    if !value.is_finite() {
        return Err(Error::data(format!(
            "KPI value for {} is not finite",
            role.as_str()
        )));
    }
    thresholds.validate()?;
    let b = thresholds.band(role);
    let state = if role.higher_is_worse() {
        if value < b.cr {
            AlarmClass::Norm
        } else if value < b.warn {
            AlarmClass::Cr
        } else {
            AlarmClass::Warn
        }
    } else if value >= b.cr {
        AlarmClass::Norm
    } else if value >= b.warn {
        AlarmClass::Cr
    } else {
        AlarmClass::Warn
    };
    Ok(state)
}

/// Worst per-KPI band across the four drivers.
pub fn label_severity_max(drivers: &DriverKpis, thresholds: &KpiThresholds) -> Result<AlarmClass> {
    drivers.check_finite()?;
    let mut worst = AlarmClass::Norm;
    for (role, value) in drivers.iter() {
        worst = worst.max(classify_kpi(role, value, thresholds)?);
    }
    Ok(worst)
}

/// First-match rule cascade with the fixed printed constants.
pub fn label_figure2(drivers: &DriverKpis) -> Result<AlarmClass> {
    drivers.check_finite()?;
    let DriverKpis { dcr, cssr, tr, hof } = *drivers;
    if dcr > 2.0 && cssr >= 90.0 && dcr <= 4.0 && cssr < 98.0 {
        return Ok(AlarmClass::Cr);
    }
    if tr > 60.0 && hof > 10.0 && tr < 70.0 && hof < 25.0 {
        return Ok(AlarmClass::Cr);
    }
    if (dcr > 4.0 || cssr < 90.0) && (hof >= 25.0 || tr > 70.0) {
        return Ok(AlarmClass::Warn);
    }
    Ok(AlarmClass::Norm)
}

/// Counts per class over the canonical (NORM, CR, WARN) order. Every
/// class is present, possibly with a zero count.
pub fn class_frequencies(labels: &[AlarmClass]) -> [usize; 3] {
    let mut counts = [0usize; 3];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}

/// Label every row of a dataset, appending or overwriting the `KPIAlarms`
/// class attribute. Instance order is preserved and the operation is
/// idempotent.
pub fn label_dataset(
    dataset: &Dataset,
    mapping: &KpiMapping,
    thresholds: &KpiThresholds,
    mode: LabelMode,
) -> Result<Dataset> {
    thresholds.validate()?;
    let driver_cols = mapping.resolve(dataset)?;

    let mut labels = Vec::with_capacity(dataset.len());
    for (row, inst) in dataset.instances.iter().enumerate() {
        let mut vals = [0.0f64; 4];
        for (slot, role) in DriverKpi::ALL.iter().enumerate() {
            let col = driver_cols[slot];
            match inst.values[col] {
                Value::Num(v) => vals[slot] = v,
                Value::Missing => {
                    return Err(Error::data(format!(
                        "row {} has a missing value in driver column `{}` ({})",
                        row + 1,
                        dataset.attributes[col].name,
                        role.as_str()
                    )));
                }
                Value::Nom(_) => unreachable!("resolve() checked numeric"),
            }
        }
        let drivers = DriverKpis {
            dcr: vals[0],
            cssr: vals[1],
            tr: vals[2],
            hof: vals[3],
        };
        let label = match mode {
            LabelMode::SeverityMax => label_severity_max(&drivers, thresholds)?,
            LabelMode::Figure2 => label_figure2(&drivers)?,
        };
        labels.push(label);
    }

    let domain: Vec<String> = AlarmClass::ALL.iter().map(|c| c.as_str().to_string()).collect();
    let mut out = dataset.clone();
    let class_col = match out.attr_index(DEFAULT_CLASS_NAME) {
        Some(idx) => {
            out.attributes[idx].kind = AttrKind::Nominal(domain);
            idx
        }
        None => {
            out.attributes.push(Attribute::nominal(DEFAULT_CLASS_NAME, domain));
            for inst in out.instances.iter_mut() {
                inst.values.push(Value::Missing);
            }
            out.attributes.len() - 1
        }
    };
    for (inst, label) in out.instances.iter_mut().zip(&labels) {
        inst.values[class_col] = Value::Nom(label.index());
    }
    out.class_index = Some(class_col);
    Ok(out)
}

/// Parsed contents of a threshold configuration file: flat `key=value`
/// lines, `#` comments, keys `<kpi>.cr`, `<kpi>.warn`, and
/// `mapping.<role>`. Unknown keys are rejected.
pub fn parse_threshold_config(text: &str) -> Result<(KpiThresholds, KpiMapping)> {
    let mut thresholds = KpiThresholds::default();
    let mut mapping = KpiMapping::default();
    let roles: HashMap<&str, DriverKpi> = DriverKpi::ALL.iter().map(|r| (r.as_str(), *r)).collect();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::data(format!("line {lineno}: expected key=value, got `{line}`"))
        })?;
        let key = key.trim();
        let value = value.trim();
        if let Some(role_name) = key.strip_prefix("mapping.") {
            let role = roles.get(role_name).ok_or_else(|| {
                Error::data(format!("line {lineno}: unknown mapping role `{role_name}`"))
            })?;
            if value.is_empty() {
                return Err(Error::data(format!("line {lineno}: empty attribute name")));
            }
            *mapping.name_mut(*role) = value.to_string();
        } else if let Some((kpi, bound)) = key.split_once('.') {
            let role = roles
                .get(kpi)
                .ok_or_else(|| Error::data(format!("line {lineno}: unknown key `{key}`")))?;
            let v: f64 = value.parse().map_err(|_| {
                Error::data(format!("line {lineno}: cannot parse `{value}` as a number"))
            })?;
            match bound {
                "cr" => thresholds.band_mut(*role).cr = v,
                "warn" => thresholds.band_mut(*role).warn = v,
                _ => {
                    return Err(Error::data(format!("line {lineno}: unknown key `{key}`")));
                }
            }
        } else {
            return Err(Error::data(format!("line {lineno}: unknown key `{key}`")));
        }
    }

    thresholds.validate()?;
    Ok((thresholds, mapping))
}
