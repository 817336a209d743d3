//! Command-line driver. One subcommand per pipeline stage:
//!
//! ```text
//! synth    --out F [--n N --seed S --priors w,c,n]
//! label    --in F --out F [--mode severity-max|figure2 --config T]
//! train    --algo j48|jrip|part|nb|bayesnet --in F --model F [--params k=v ...]
//! eval     --algo A --in F [--folds K --seed S --report F --format text|json]
//! compare  --algos a,b,c --in F [--folds K --seed S --report F --format text|json]
//! rules    --model F
//! predict  --model F --in F --out F
//! localize --in F [--by Period,BSC] [--out F]
//! explain  --model F --in F
//! ```
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.
//! The first line on stderr for any failure is `ERROR <code>: <message>`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::data::{parse_arff, parse_csv, write_arff, write_csv, Dataset, SchemaHints, Value};
use crate::error::{Error, Result};
use crate::eval::{compare, cross_validate, render_comparison, render_report, EvalReport};
use crate::kpi::{label_dataset, parse_threshold_config, KpiMapping, KpiThresholds, LabelMode};
use crate::learners::{
    load_model, render_model, save_model, train, AlgorithmId, ModelEnvelope, ModelKind, TrainParams,
};
use crate::localization::{localization_report, norm_gap, render_localization, NORMAL_CLASS};
use crate::synth::{generate, GeneratorConfig};

/// Fixed default seed for every seeded subcommand.
pub const DEFAULT_SEED: u64 = 7;
/// Default cross-validation fold count.
pub const DEFAULT_FOLDS: usize = 10;

/// Run the CLI; returns the process exit code. Results go to `stdout`,
/// diagnostics to `stderr`.
pub fn run(args: &[String]) -> i32 {
    match dispatch(args, &mut std::io::stdout()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ERROR {}: {e}", e.exit_code());
            if matches!(e, Error::Usage(_)) {
                eprintln!("{USAGE}");
            }
            e.exit_code()
        }
    }
}

const USAGE: &str = "usage: kpidiag <subcommand> [flags]
  synth    --out F [--n N --seed S --priors w,c,n]
  label    --in F --out F [--mode severity-max|figure2 --config T]
  train    --algo j48|jrip|part|nb|bayesnet --in F --model F [--params k=v ...]
  eval     --algo A --in F [--folds K --seed S --report F --format text|json]
  compare  --algos a,b,c --in F [--folds K --seed S --report F --format text|json]
  rules    --model F
  predict  --model F --in F --out F
  localize --in F [--by Period,BSC] [--out F]
  explain  --model F --in F";

fn dispatch(args: &[String], out: &mut dyn std::io::Write) -> Result<()> {
    let Some(sub) = args.first() else {
        return Err(Error::usage("missing subcommand"));
    };
    let flags = Flags::parse(&args[1..])?;
    match sub.as_str() {
        "synth" => cmd_synth(flags),
        "label" => cmd_label(flags),
        "train" => cmd_train(flags),
        "eval" => cmd_eval(flags, out),
        "compare" => cmd_compare(flags, out),
        "rules" => cmd_rules(flags, out),
        "predict" => cmd_predict(flags),
        "localize" => cmd_localize(flags, out),
        "explain" => cmd_explain(flags, out),
        other => Err(Error::usage(format!("unknown subcommand `{other}`"))),
    }
}

/// Parsed `--key value` flags; `--params` may repeat.
struct Flags {
    values: BTreeMap<String, String>,
    params: Vec<String>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Flags> {
        let mut values = BTreeMap::new();
        let mut params = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let key = args[i]
                .strip_prefix("--")
                .ok_or_else(|| Error::usage(format!("expected a --flag, got `{}`", args[i])))?;
            let value = args
                .get(i + 1)
                .ok_or_else(|| Error::usage(format!("flag --{key} needs a value")))?;
            if key == "params" {
                params.push(value.clone());
            } else if values.insert(key.to_string(), value.clone()).is_some() {
                return Err(Error::usage(format!("flag --{key} given twice")));
            }
            i += 2;
        }
        Ok(Flags { values, params })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| Error::usage(format!("missing required flag --{key}")))
    }

    /// All flags must have been consumed by the subcommand.
    fn finish(self) -> Result<()> {
        if let Some(key) = self.values.keys().next() {
            return Err(Error::usage(format!("unknown flag --{key} for this subcommand")));
        }
        Ok(())
    }

    fn finish_no_params(self) -> Result<()> {
        if !self.params.is_empty() {
            return Err(Error::usage("--params is not accepted by this subcommand"));
        }
        self.finish()
    }
}

fn parse_seed(flags: &mut Flags) -> Result<u64> {
    match flags.take("seed") {
        None => Ok(DEFAULT_SEED),
        Some(s) => s
            .parse()
            .map_err(|_| Error::usage(format!("cannot parse seed `{s}`"))),
    }
}

fn parse_folds(flags: &mut Flags) -> Result<usize> {
    match flags.take("folds") {
        None => Ok(DEFAULT_FOLDS),
        Some(s) => s
            .parse()
            .map_err(|_| Error::usage(format!("cannot parse fold count `{s}`"))),
    }
}

#[derive(PartialEq)]
enum OutputFormat {
    Text,
    Json,
}

fn parse_format(flags: &mut Flags) -> Result<OutputFormat> {
    match flags.take("format").as_deref() {
        None | Some("text") => Ok(OutputFormat::Text),
        Some("json") => Ok(OutputFormat::Json),
        Some(other) => Err(Error::usage(format!(
            "unknown format `{other}`; valid: text, json"
        ))),
    }
}

/// Load a dataset by file extension (`.arff` or `.csv`).
fn load_dataset(path: &str) -> Result<Dataset> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::data(format!("cannot read `{path}`: {e}")))?;
    match extension(path)?.as_str() {
        "arff" => parse_arff(&text),
        "csv" => parse_csv(&text, &SchemaHints::none()),
        _ => unreachable!("extension checked"),
    }
}

fn save_dataset(path: &str, dataset: &Dataset) -> Result<()> {
    let text = match extension(path)?.as_str() {
        "arff" => write_arff(dataset),
        "csv" => write_csv(dataset),
        _ => unreachable!("extension checked"),
    };
    fs::write(path, text).map_err(|e| Error::data(format!("cannot write `{path}`: {e}")))
}

fn extension(path: &str) -> Result<String> {
    Path::new(path)
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .filter(|e| e == "arff" || e == "csv")
        .ok_or_else(|| {
            Error::data(format!(
                "cannot infer dataset format of `{path}`; use an .arff or .csv extension"
            ))
        })
}

fn cmd_synth(mut flags: Flags) -> Result<()> {
    let out_path = flags.require("out")?;
    let mut config = GeneratorConfig {
        seed: parse_seed(&mut flags)?,
        ..GeneratorConfig::default()
    };
    if let Some(n) = flags.take("n") {
        config.n = n
            .parse()
            .map_err(|_| Error::usage(format!("cannot parse instance count `{n}`")))?;
    }
    if let Some(p) = flags.take("priors") {
        let parts: Vec<&str> = p.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::usage("--priors expects three comma-separated weights (WARN,CR,NORM)"));
        }
        for (slot, part) in parts.iter().enumerate() {
            config.priors[slot] = part
                .trim()
                .parse()
                .map_err(|_| Error::usage(format!("cannot parse prior `{part}`")))?;
        }
    }
    flags.finish_no_params()?;
    let dataset = generate(&config)?;
    save_dataset(&out_path, &dataset)
}

fn cmd_label(mut flags: Flags) -> Result<()> {
    let in_path = flags.require("in")?;
    let out_path = flags.require("out")?;
    let mode = match flags.take("mode") {
        None => LabelMode::SeverityMax,
        Some(m) => LabelMode::from_str(&m).ok_or_else(|| {
            Error::usage(format!("unknown mode `{m}`; valid: severity-max, figure2"))
        })?,
    };
    let (thresholds, mapping) = match flags.take("config") {
        None => (KpiThresholds::default(), KpiMapping::default()),
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| Error::data(format!("cannot read `{path}`: {e}")))?;
            parse_threshold_config(&text)?
        }
    };
    flags.finish_no_params()?;
    let dataset = load_dataset(&in_path)?;
    let labeled = label_dataset(&dataset, &mapping, &thresholds, mode)?;
    save_dataset(&out_path, &labeled)
}

fn parse_params(flags: &Flags) -> Result<TrainParams> {
    let mut params = TrainParams::default();
    for chunk in &flags.params {
        for pair in chunk.split_whitespace() {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::usage(format!("expected key=value in --params, got `{pair}`")))?;
            params.apply(key, value)?;
        }
    }
    Ok(params)
}

fn cmd_train(mut flags: Flags) -> Result<()> {
    let algo = AlgorithmId::from_str(&flags.require("algo")?)?;
    let in_path = flags.require("in")?;
    let model_path = flags.require("model")?;
    let params = parse_params(&flags)?;
    flags.params.clear();
    flags.finish()?;
    let mut dataset = load_dataset(&in_path)?;
    if dataset.class_index.is_none() {
        return Err(Error::usage(format!(
            "dataset `{in_path}` has no class attribute (expected a nominal `{}` as the last column)",
            crate::data::DEFAULT_CLASS_NAME
        )));
    }
    dataset.relation = dataset.relation.clone();
    let envelope = train(algo, &dataset, &params)?;
    fs::write(&model_path, save_model(&envelope))
        .map_err(|e| Error::data(format!("cannot write `{model_path}`: {e}")))
}

fn write_or_print(
    report_path: Option<String>,
    text: String,
    out: &mut dyn std::io::Write,
) -> Result<()> {
    match report_path {
        Some(path) => {
            fs::write(&path, text).map_err(|e| Error::data(format!("cannot write `{path}`: {e}")))
        }
        None => {
            out.write_all(text.as_bytes())
                .map_err(|e| Error::data(format!("cannot write output: {e}")))
        }
    }
}

fn report_json(reports: &[EvalReport]) -> String {
    let mut text = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0]).expect("report serializes")
    } else {
        serde_json::to_string_pretty(reports).expect("reports serialize")
    };
    text.push('\n');
    text
}

fn cmd_eval(mut flags: Flags, out: &mut dyn std::io::Write) -> Result<()> {
    let algo = AlgorithmId::from_str(&flags.require("algo")?)?;
    let in_path = flags.require("in")?;
    let folds = parse_folds(&mut flags)?;
    let seed = parse_seed(&mut flags)?;
    let format = parse_format(&mut flags)?;
    let report_path = flags.take("report");
    flags.finish_no_params()?;
    let dataset = load_dataset(&in_path)?;
    let report = cross_validate(algo, &dataset, &TrainParams::default(), folds, seed)?;
    let text = match format {
        OutputFormat::Text => render_report(&report),
        OutputFormat::Json => report_json(&[report]),
    };
    write_or_print(report_path, text, out)
}

fn cmd_compare(mut flags: Flags, out: &mut dyn std::io::Write) -> Result<()> {
    let algorithms: Vec<AlgorithmId> = match flags.take("algos") {
        None => AlgorithmId::ALL.to_vec(),
        Some(list) => list
            .split(',')
            .map(|a| AlgorithmId::from_str(a.trim()))
            .collect::<Result<_>>()?,
    };
    let in_path = flags.require("in")?;
    let folds = parse_folds(&mut flags)?;
    let seed = parse_seed(&mut flags)?;
    let format = parse_format(&mut flags)?;
    let report_path = flags.take("report");
    flags.finish_no_params()?;
    let dataset = load_dataset(&in_path)?;
    let reports = compare(&algorithms, &dataset, &TrainParams::default(), folds, seed)?;
    let text = match format {
        OutputFormat::Text => render_comparison(&reports),
        OutputFormat::Json => report_json(&reports),
    };
    write_or_print(report_path, text, out)
}

fn load_model_file(path: &str) -> Result<ModelEnvelope> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::data(format!("cannot read `{path}`: {e}")))?;
    load_model(&text)
}

fn cmd_rules(mut flags: Flags, out: &mut dyn std::io::Write) -> Result<()> {
    let model_path = flags.require("model")?;
    flags.finish_no_params()?;
    let envelope = load_model_file(&model_path)?;
    write_or_print(None, render_model(&envelope), out)
}

fn cmd_predict(mut flags: Flags) -> Result<()> {
    let model_path = flags.require("model")?;
    let in_path = flags.require("in")?;
    let out_path = flags.require("out")?;
    flags.finish_no_params()?;
    let envelope = load_model_file(&model_path)?;
    let dataset = load_dataset(&in_path)?;
    envelope.check_schema(&dataset)?;

    // Input columns plus predicted class, winning probability, and one
    // probability column per class.
    let class_names = envelope.class_names().to_vec();
    let mut text = String::new();
    let mut header: Vec<String> = dataset.attributes.iter().map(|a| a.name.clone()).collect();
    header.push("predicted".into());
    header.push("p_max".into());
    for name in &class_names {
        header.push(format!("p_{name}"));
    }
    text.push_str(&header.join(","));
    text.push('\n');
    let base_csv = write_csv(&dataset);
    let mut base_lines = base_csv.lines().skip(1);
    for inst in &dataset.instances {
        let (class, probs) = envelope.predict(&inst.values)?;
        let base = base_lines.next().expect("one line per instance");
        let mut row = vec![base.to_string(), class_names[class].clone()];
        row.push(format!("{:.6}", probs[class]));
        for p in &probs {
            row.push(format!("{p:.6}"));
        }
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(&out_path, text).map_err(|e| Error::data(format!("cannot write `{out_path}`: {e}")))
}

fn cmd_localize(mut flags: Flags, out: &mut dyn std::io::Write) -> Result<()> {
    let in_path = flags.require("in")?;
    let by = flags.take("by").unwrap_or_else(|| "Period,BSC".to_string());
    let out_path = flags.take("out");
    flags.finish_no_params()?;
    let attributes: Vec<String> = by.split(',').map(|s| s.trim().to_string()).collect();
    let dataset = load_dataset(&in_path)?;
    if dataset.class_index.is_none() {
        return Err(Error::usage(format!("dataset `{in_path}` has no class attribute")));
    }
    let report = localization_report(&dataset, &attributes)?;
    write_or_print(out_path, render_localization(&report), out)
}

fn cmd_explain(mut flags: Flags, out: &mut dyn std::io::Write) -> Result<()> {
    let model_path = flags.require("model")?;
    let in_path = flags.require("in")?;
    flags.finish_no_params()?;
    let envelope = load_model_file(&model_path)?;
    if !matches!(envelope.model, ModelKind::Rules(_)) {
        return Err(Error::model("explain requires a rule model (jrip or part)"));
    }
    let dataset = load_dataset(&in_path)?;
    envelope.check_schema(&dataset)?;
    let class_names = envelope.class_names().to_vec();

    let mut text = String::new();
    for (row, inst) in dataset.instances.iter().enumerate() {
        let (class, _) = envelope.predict(&inst.values)?;
        if class_names[class] == NORMAL_CLASS {
            continue;
        }
        let gaps = norm_gap(&envelope, &inst.values)?;
        let best = &gaps[0];
        text.push_str(&format!(
            "instance {}: predicted {}\n",
            row + 1,
            class_names[class]
        ));
        if best.violated.is_empty() {
            text.push_str("  already satisfies a NORM rule\n");
            continue;
        }
        text.push_str(&format!(
            "  rule {} => NORM; {} condition(s) to fix:\n",
            best.rule_index + 1,
            best.violated.len()
        ));
        for cond in &best.violated {
            text.push_str(&format!("    {}\n", describe_condition(cond, &envelope, inst)));
        }
    }
    if text.is_empty() {
        text.push_str("all instances already classify as NORM\n");
    }
    write_or_print(None, text, out)
}

fn describe_condition(
    cond: &crate::learners::Condition,
    envelope: &ModelEnvelope,
    inst: &crate::data::Instance,
) -> String {
    use crate::data::fmt_num;
    use crate::learners::Condition;
    let attr = cond.attr();
    let a = &envelope.schema.attributes[attr];
    let actual = match &inst.values[attr] {
        Value::Missing => "?".to_string(),
        Value::Num(v) => fmt_num(*v),
        Value::Nom(i) => a.domain().expect("nominal")[*i].clone(),
    };
    match cond {
        Condition::Le { threshold, .. } => {
            format!("{} <= {} (actual {actual})", a.name, fmt_num(*threshold))
        }
        Condition::Gt { threshold, .. } => {
            format!("{} > {} (actual {actual})", a.name, fmt_num(*threshold))
        }
        Condition::Eq { value, .. } => format!(
            "{} = {} (actual {actual})",
            a.name,
            a.domain().expect("nominal")[*value]
        ),
    }
}
