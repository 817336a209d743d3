//! Deterministic generator of cell-KPI datasets.
//!
//! The generator produces the 25-attribute schema plus the `KPIAlarms`
//! class. Class counts follow the configured priors exactly (largest-
//! remainder rounding), each row's four driver KPIs are sampled from the
//! band region consistent with its class under severity-max labeling, and
//! the remaining attributes are noisy monotone companions of the drivers
//! or independent nuisance columns. Every numeric cell is quantized onto
//! the canonical 6-significant-digit grid so written files round-trip.
//!
//! All ranges, formulas, and skews are reported by [`describe`]; tests
//! treat that manifest as the source of truth for the generation scheme.

use crate::data::{canon_num, Attribute, Dataset, Value};
use crate::error::{Error, Result};
use crate::kpi::{AlarmClass, DriverKpi, DriverKpis};
use crate::rng::Rng;

/// Generation parameters.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub n: usize,
    pub seed: u64,
    /// Class priors in (WARN, CR, NORM) order.
    pub priors: [f64; 3],
    /// Global scale on every companion column's noise term.
    pub companion_noise: f64,
    pub bsc_roster: Vec<String>,
    pub date_range: Vec<String>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n: 2100,
            seed: 7,
            priors: [0.46, 0.38, 0.16],
            companion_noise: 1.0,
            bsc_roster: DEFAULT_BSC_ROSTER.iter().map(|s| s.to_string()).collect(),
            date_range: (13..=26).map(|d| format!("{d:02}/06/2014")).collect(),
        }
    }
}

/// Base station controllers of the default roster.
pub const DEFAULT_BSC_ROSTER: [&str; 13] = [
    "BSC2", "BSC5", "BSC411", "BSC1", "BSC21", "BSC25", "BSC55", "BSC18", "BSC05", "BSC11",
    "BSC19", "BSC10", "BSC293",
];

/// Stations that receive elevated fault rates when present in the roster.
pub const HIGH_FAULT_BSCS: [&str; 2] = ["BSC21", "BSC11"];

/// Weight multiplier a high-fault station gets for WARN/CR rows.
const FAULT_SKEW_WEIGHT: f64 = 6.0;

/// Probability that a non-warning driver of a WARN row sits in its normal
/// band (otherwise critical).
const WARN_REST_NORMAL_PROB: f64 = 0.7;

/// Fraction of a sampling band's width by which each edge may be jittered
/// inward per draw.
const EDGE_JITTER: f64 = 0.08;

/// Per-driver sampling bands `(lo, hi)`, strictly inside the severity
/// bands of the default thresholds so that quantization cannot move a
/// value across a boundary.
#[derive(Debug, Clone, Copy)]
struct DriverBands {
    normal: (f64, f64),
    critical: (f64, f64),
    warning: (f64, f64),
}

fn driver_bands(role: DriverKpi) -> DriverBands {
    match role {
        DriverKpi::Dcr => DriverBands {
            normal: (0.1, 1.9),
            critical: (2.1, 3.9),
            warning: (4.1, 7.0),
        },
        DriverKpi::Cssr => DriverBands {
            normal: (98.1, 99.9),
            critical: (90.1, 97.9),
            warning: (85.0, 89.9),
        },
        DriverKpi::Tr => DriverBands {
            normal: (5.0, 59.9),
            critical: (60.1, 69.9),
            warning: (70.1, 78.0),
        },
        DriverKpi::Hof => DriverBands {
            normal: (0.1, 9.9),
            critical: (10.1, 14.9),
            warning: (15.1, 21.0),
        },
    }
}

/// How a non-driver numeric column is produced.
enum Source {
    /// Independent uniform draw; optionally rounded to an integer.
    Uniform { lo: f64, hi: f64, integer: bool },
    /// Deterministic function of the row context plus scaled noise,
    /// clamped into a range.
    Derived {
        base: fn(&RowCtx) -> f64,
        noise_scale: f64,
        clamp: (f64, f64),
        formula: &'static str,
    },
    /// One of the four driver KPIs.
    Driver(DriverKpi),
}

struct ColumnSpec {
    name: &'static str,
    source: Source,
}

/// Values a derived column may depend on.
struct RowCtx {
    drivers: DriverKpis,
    seizure_attempts: f64,
}

fn columns() -> Vec<ColumnSpec> {
    use Source::*;
    vec![
        ColumnSpec { name: "Id", source: Uniform { lo: 1000.0, hi: 10000.0, integer: true } },
        ColumnSpec {
            name: "SDCCHCR",
            source: Derived {
                base: |c| 0.08 * c.drivers.tr,
                noise_scale: 1.5,
                clamp: (0.0, 100.0),
                formula: "SDCCHCR = 0.08 * TCHTR ± 1.5*noise, clamp [0,100]",
            },
        },
        ColumnSpec { name: "TCHSeizureAttempts", source: Uniform { lo: 5.0, hi: 95.0, integer: false } },
        ColumnSpec {
            name: "TCHAccessRate",
            source: Derived {
                base: |c| 0.9 * c.drivers.cssr + 8.0,
                noise_scale: 2.0,
                clamp: (0.0, 100.0),
                formula: "TCHAccessRate = 0.9 * TCHSS + 8 ± 2*noise, clamp [0,100]",
            },
        },
        ColumnSpec { name: "TCHAvailability", source: Uniform { lo: 85.0, hi: 100.0, integer: false } },
        ColumnSpec {
            name: "TCHDrop",
            source: Derived {
                base: |c| 3.0 * c.drivers.dcr,
                noise_scale: 2.0,
                clamp: (0.0, 400.0),
                formula: "TCHDrop = 3 * TCHDropRate ± 2*noise, clamp [0,400]",
            },
        },
        ColumnSpec {
            name: "TCHCR",
            source: Derived {
                base: |c| 0.05 * c.drivers.tr,
                noise_scale: 1.0,
                clamp: (0.0, 100.0),
                formula: "TCHCR = 0.05 * TCHTR ± noise, clamp [0,100]",
            },
        },
        ColumnSpec { name: "TCHTR", source: Driver(DriverKpi::Tr) },
        ColumnSpec {
            name: "HandoverSuccess",
            source: Derived {
                base: |c| 2.0 * (100.0 - c.drivers.hof),
                noise_scale: 4.0,
                clamp: (0.0, 250.0),
                formula: "HandoverSuccess = 2 * (100 - HOFR) ± 4*noise, clamp [0,250]",
            },
        },
        ColumnSpec {
            name: "SDCCHDropsExcessiveTA",
            source: Derived {
                base: |c| 0.3 * c.drivers.dcr,
                noise_scale: 1.0,
                clamp: (0.0, 100.0),
                formula: "SDCCHDropsExcessiveTA = 0.3 * TCHDropRate ± noise, clamp [0,100]",
            },
        },
        ColumnSpec { name: "RAN", source: Uniform { lo: 40.0, hi: 100.0, integer: false } },
        ColumnSpec {
            name: "SDCCHDR",
            source: Derived {
                base: |c| 0.8 * c.drivers.dcr,
                noise_scale: 1.5,
                clamp: (0.0, 100.0),
                formula: "SDCCHDR = 0.8 * TCHDropRate ± 1.5*noise, clamp [0,100]",
            },
        },
        ColumnSpec { name: "SDCCHAavailabilityRate", source: Uniform { lo: 90.0, hi: 100.0, integer: false } },
        ColumnSpec {
            name: "HF",
            source: Derived {
                base: |c| c.seizure_attempts * c.drivers.hof / 100.0,
                noise_scale: 2.0,
                clamp: (0.0, 200.0),
                formula: "HF = TCHSeizureAttempts * HOFR / 100 ± 2*noise, clamp [0,200]",
            },
        },
        ColumnSpec {
            name: "SDCCHDropSuddLostCon",
            source: Derived {
                base: |c| 0.5 * c.drivers.dcr,
                noise_scale: 1.0,
                clamp: (0.0, 100.0),
                formula: "SDCCHDropSuddLostCon = 0.5 * TCHDropRate ± noise, clamp [0,100]",
            },
        },
        ColumnSpec {
            name: "TCHAssignmentFailureRate",
            source: Derived {
                base: |c| 0.4 * (100.0 - c.drivers.cssr),
                noise_scale: 1.5,
                clamp: (0.0, 100.0),
                formula: "TCHAssignmentFailureRate = 0.4 * (100 - TCHSS) ± 1.5*noise, clamp [0,100]",
            },
        },
        ColumnSpec { name: "TCHDropRate", source: Driver(DriverKpi::Dcr) },
        ColumnSpec {
            name: "TCHCongestionRate",
            source: Derived {
                base: |c| 0.06 * c.drivers.tr,
                noise_scale: 1.2,
                clamp: (0.0, 100.0),
                formula: "TCHCongestionRate = 0.06 * TCHTR ± 1.2*noise, clamp [0,100]",
            },
        },
        ColumnSpec { name: "HOFR", source: Driver(DriverKpi::Hof) },
        ColumnSpec { name: "TCHSS", source: Driver(DriverKpi::Cssr) },
        ColumnSpec {
            name: "SDCCHDrops",
            source: Derived {
                base: |c| 2.0 * c.drivers.dcr,
                noise_scale: 3.0,
                clamp: (0.0, 300.0),
                formula: "SDCCHDrops = 2 * TCHDropRate ± 3*noise, clamp [0,300]",
            },
        },
        ColumnSpec {
            name: "HOSR",
            source: Derived {
                base: |c| 100.0 - c.drivers.hof,
                noise_scale: 1.0,
                clamp: (0.0, 100.0),
                formula: "HOSR = 100 - HOFR ± noise, clamp [0,100]",
            },
        },
        ColumnSpec { name: "RAB", source: Uniform { lo: 0.0, hi: 100.0, integer: false } },
    ]
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::usage("instance count must be at least 1"));
        }
        let sum: f64 = self.priors.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::usage(format!("priors must sum to 1, got {sum}")));
        }
        if self.priors.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::usage("priors must lie in [0, 1]"));
        }
        if self.companion_noise < 0.0 {
            return Err(Error::usage("companion noise must be nonnegative"));
        }
        if self.bsc_roster.is_empty() || self.date_range.is_empty() {
            return Err(Error::usage("rosters must be non-empty"));
        }
        Ok(())
    }
}

/// Largest-remainder apportionment of `n` over the prior weights.
pub fn largest_remainder(n: usize, priors: &[f64; 3]) -> [usize; 3] {
    let shares: Vec<f64> = priors.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = shares[a] - shares[a].floor();
        let fb = shares[b] - shares[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for i in 0..(n - assigned) {
        counts[order[i % 3]] += 1;
    }
    [counts[0], counts[1], counts[2]]
}

fn band_sample(rng: &mut Rng, (lo, hi): (f64, f64)) -> f64 {
    let w = hi - lo;
    let a = rng.uniform(0.0, EDGE_JITTER * w);
    let b = rng.uniform(0.0, EDGE_JITTER * w);
    canon_num(rng.uniform(lo + a, hi - b))
}

fn sample_drivers(rng: &mut Rng, label: AlarmClass) -> DriverKpis {
    // Non-empty subset of the four drivers, encoded as a 4-bit mask.
    let mask = match label {
        AlarmClass::Norm => 0u64,
        _ => 1 + rng.below(15),
    };
    let mut vals = [0.0f64; 4];
    for (i, role) in DriverKpi::ALL.iter().enumerate() {
        let bands = driver_bands(*role);
        let in_subset = mask & (1 << i) != 0;
        let band = match label {
            AlarmClass::Norm => bands.normal,
            AlarmClass::Cr => {
                if in_subset {
                    bands.critical
                } else {
                    bands.normal
                }
            }
            AlarmClass::Warn => {
                if in_subset {
                    bands.warning
                } else if rng.next_f64() < WARN_REST_NORMAL_PROB {
                    bands.normal
                } else {
                    bands.critical
                }
            }
        };
        vals[i] = band_sample(rng, band);
    }
    DriverKpis {
        dcr: vals[0],
        cssr: vals[1],
        tr: vals[2],
        hof: vals[3],
    }
}

fn weighted_pick(rng: &mut Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.uniform(0.0, total);
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

/// Generate a dataset under the given configuration.
pub fn generate(config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    let specs = columns();

    let mut attributes = Vec::with_capacity(specs.len() + 3);
    attributes.push(Attribute::nominal("Period", config.date_range.clone()));
    attributes.push(Attribute::nominal("BSC", config.bsc_roster.clone()));
    for spec in &specs {
        attributes.push(Attribute::numeric(spec.name));
    }
    attributes.push(Attribute::nominal(
        "KPIAlarms",
        vec!["NORM", "CR", "WARN"],
    ));
    let mut dataset = Dataset::new("cell-kpi-synthetic", attributes)?;
    dataset.apply_default_class();

    // Class sequence: exact largest-remainder counts, then shuffled.
    let counts = largest_remainder(config.n, &config.priors);
    let mut labels: Vec<AlarmClass> = Vec::with_capacity(config.n);
    labels.extend(std::iter::repeat(AlarmClass::Warn).take(counts[0]));
    labels.extend(std::iter::repeat(AlarmClass::Cr).take(counts[1]));
    labels.extend(std::iter::repeat(AlarmClass::Norm).take(counts[2]));
    let mut rng = Rng::new(config.seed);
    rng.shuffle(&mut labels);

    // BSC weights per row kind.
    let uniform_weights = vec![1.0; config.bsc_roster.len()];
    let fault_weights: Vec<f64> = config
        .bsc_roster
        .iter()
        .map(|name| {
            if HIGH_FAULT_BSCS.contains(&name.as_str()) {
                FAULT_SKEW_WEIGHT
            } else {
                1.0
            }
        })
        .collect();

    for label in labels {
        let drivers = sample_drivers(&mut rng, label);
        let mut ctx = RowCtx {
            drivers,
            seizure_attempts: 0.0,
        };

        let mut row: Vec<Value> = Vec::with_capacity(dataset.attributes.len());
        let period = rng.below(config.date_range.len() as u64) as usize;
        let bsc_weights = if label == AlarmClass::Norm {
            &uniform_weights
        } else {
            &fault_weights
        };
        let bsc = weighted_pick(&mut rng, bsc_weights);
        row.push(Value::Nom(period));
        row.push(Value::Nom(bsc));

        for spec in &specs {
            let v = match &spec.source {
                Source::Driver(role) => ctx.drivers.get(*role),
                Source::Uniform { lo, hi, integer } => {
                    let x = rng.uniform(*lo, *hi);
                    if *integer {
                        x.floor()
                    } else {
                        canon_num(x)
                    }
                }
                Source::Derived {
                    base,
                    noise_scale,
                    clamp,
                    ..
                } => {
                    let u = rng.uniform(-1.0, 1.0);
                    let x = base(&ctx) + noise_scale * config.companion_noise * u;
                    canon_num(x.clamp(clamp.0, clamp.1))
                }
            };
            if spec.name == "TCHSeizureAttempts" {
                ctx.seizure_attempts = v;
            }
            row.push(Value::Num(v));
        }
        row.push(Value::Nom(label.index()));
        dataset.push(row)?;
    }
    Ok(dataset)
}

/// Plain-text manifest of everything the generator does: distributions,
/// rosters, derivation formulas, and band layout.
pub fn describe(config: &GeneratorConfig) -> String {
    let mut out = String::new();
    let counts = largest_remainder(config.n, &config.priors);
    out.push_str("cell-kpi synthetic dataset manifest\n");
    out.push_str(&format!("n = {}\n", config.n));
    out.push_str(&format!("seed = {}\n", config.seed));
    out.push_str(&format!(
        "priors (WARN, CR, NORM) = {}, {}, {}\n",
        config.priors[0], config.priors[1], config.priors[2]
    ));
    out.push_str(&format!(
        "class counts (largest remainder) = WARN {}, CR {}, NORM {}\n",
        counts[0], counts[1], counts[2]
    ));
    out.push_str("attributes: 25 input attributes + class KPIAlarms\n");
    out.push_str(&format!(
        "Period: nominal, uniform over {} day labels ({} .. {})\n",
        config.date_range.len(),
        config.date_range.first().map(String::as_str).unwrap_or(""),
        config.date_range.last().map(String::as_str).unwrap_or(""),
    ));
    out.push_str(&format!(
        "BSC: nominal over {} stations; WARN/CR rows weight {} at {}x (uniform otherwise)\n",
        config.bsc_roster.len(),
        HIGH_FAULT_BSCS.join(", "),
        FAULT_SKEW_WEIGHT
    ));
    out.push_str(&format!("companion noise scale = {}\n", config.companion_noise));
    out.push_str("numeric cells quantized to 6 significant digits\n");
    out.push_str("\ndriver bands (consistent with severity-max labeling):\n");
    for role in DriverKpi::ALL {
        let b = driver_bands(role);
        let name = columns()
            .iter()
            .find_map(|c| match c.source {
                Source::Driver(r) if r == role => Some(c.name),
                _ => None,
            })
            .unwrap();
        out.push_str(&format!(
            "  {name}: NORM [{}, {}]  CR [{}, {}]  WARN [{}, {}]\n",
            b.normal.0, b.normal.1, b.critical.0, b.critical.1, b.warning.0, b.warning.1
        ));
    }
    out.push_str(&format!(
        "band edges jittered inward up to {}% of band width per draw\n",
        EDGE_JITTER * 100.0
    ));
    out.push_str("NORM rows: all four drivers in normal bands\n");
    out.push_str("CR rows: uniformly chosen non-empty driver subset in critical bands, rest normal\n");
    out.push_str(&format!(
        "WARN rows: uniformly chosen non-empty driver subset in warning bands, rest normal w.p. {WARN_REST_NORMAL_PROB} else critical\n"
    ));
    out.push_str("\ncolumn derivations:\n");
    for spec in columns() {
        match &spec.source {
            Source::Driver(role) => {
                out.push_str(&format!("  {}: driver KPI ({})\n", spec.name, role.as_str()));
            }
            Source::Uniform { lo, hi, integer } => {
                let kind = if *integer { "uniform integer" } else { "uniform" };
                out.push_str(&format!("  {}: {kind} in [{lo}, {hi}]\n", spec.name));
            }
            Source::Derived { formula, .. } => {
                out.push_str(&format!("  {formula}\n"));
            }
        }
    }
    out
}
