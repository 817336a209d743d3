//! Incremental reduced-error rule induction.
//!
//! Classes are processed in ascending frequency. Rules for a class are
//! grown greedily by FOIL information gain on a grow split, pruned back on
//! a prune split by `(p - n) / (p + n)`, and accepted until the ruleset
//! description length exceeds the best seen by more than 64 bits or a new
//! rule's prune-set error passes 50%. Optimization passes re-grow
//! replacement and revision candidates per rule and keep the variant with
//! the smallest description length. The most frequent class becomes the
//! unconditional default rule.

use super::rules::{Condition, Rule, RuleModel, RuleStyle};
use super::TrainParams;
use crate::data::{AttrKind, Dataset, Value};
use crate::error::{Error, Result};
use crate::rng::Rng;

const MAX_DL_SURPLUS: f64 = 64.0;

pub fn train_ripper(dataset: &Dataset, params: &TrainParams) -> Result<RuleModel> {
    let class_index = dataset
        .class_index
        .ok_or_else(|| Error::usage("training requires a class attribute"))?;
    if dataset.is_empty() {
        return Err(Error::usage("training requires at least one instance"));
    }
    let k = dataset.num_classes()?;
    let mut counts = vec![0usize; k];
    for (row, inst) in dataset.instances.iter().enumerate() {
        match inst.values[class_index].as_nom() {
            Some(c) => counts[c] += 1,
            None => {
                return Err(Error::data(format!("row {} has a missing class value", row + 1)));
            }
        }
    }

    // Ascending frequency; ties keep declaration order. The last (most
    // frequent) class is covered by the default rule alone.
    let mut order: Vec<usize> = (0..k).filter(|&c| counts[c] > 0).collect();
    order.sort_by_key(|&c| counts[c]);
    let default_class = *order.last().expect("at least one class present");

    let mut rng = Rng::new(params.seed);
    let mut remaining: Vec<usize> = (0..dataset.len()).collect();
    let mut rules: Vec<Rule> = Vec::new();

    let ctx = Ctx {
        dataset,
        class_index,
        num_classes: k,
    };

    for &class in &order[..order.len() - 1] {
        let stage_rules = rules_for_class(&ctx, class, &remaining, params, &mut rng);
        // Drop everything the new rules cover before the next class.
        remaining.retain(|&row| {
            !stage_rules
                .iter()
                .any(|r| r.matches(&dataset.instances[row].values))
        });
        rules.extend(stage_rules);
    }

    rules.push(Rule {
        conditions: Vec::new(),
        class: default_class,
        counts: vec![0.0; k],
    });

    let mut model = RuleModel {
        rules,
        style: RuleStyle::Conjunctive,
    };
    model.refresh_counts(dataset);
    Ok(model)
}

struct Ctx<'a> {
    dataset: &'a Dataset,
    class_index: usize,
    num_classes: usize,
}

impl Ctx<'_> {
    fn is_pos(&self, row: usize, class: usize) -> bool {
        self.dataset.instances[row].values[self.class_index].as_nom() == Some(class)
    }

    fn values(&self, row: usize) -> &[Value] {
        &self.dataset.instances[row].values
    }
}

fn rules_for_class(
    ctx: &Ctx,
    class: usize,
    stage_data: &[usize],
    params: &TrainParams,
    rng: &mut Rng,
) -> Vec<Rule> {
    let pos_total = stage_data.iter().filter(|&&r| ctx.is_pos(r, class)).count();
    if pos_total == 0 {
        return Vec::new();
    }
    let total_conditions = count_possible_conditions(ctx, stage_data);
    let exp_fp = (pos_total as f64 / stage_data.len() as f64).clamp(1e-6, 1.0 - 1e-6);

    let mut rules: Vec<Rule> = Vec::new();
    grow_ruleset(ctx, class, stage_data, params, rng, total_conditions, exp_fp, &mut rules);

    for _ in 0..params.optimizations {
        optimize_pass(ctx, class, stage_data, params, rng, total_conditions, exp_fp, &mut rules);
        // Cover any positives the optimized ruleset no longer reaches.
        grow_ruleset(ctx, class, stage_data, params, rng, total_conditions, exp_fp, &mut rules);
    }
    rules
}

#[allow(clippy::too_many_arguments)]
fn grow_ruleset(
    ctx: &Ctx,
    class: usize,
    stage_data: &[usize],
    params: &TrainParams,
    rng: &mut Rng,
    total_conditions: f64,
    exp_fp: f64,
    rules: &mut Vec<Rule>,
) {
    let mut current: Vec<usize> = stage_data
        .iter()
        .copied()
        .filter(|&r| !rules.iter().any(|rule| rule.matches(ctx.values(r))))
        .collect();
    let mut min_dl = ruleset_dl(ctx, class, stage_data, rules, total_conditions, exp_fp);

    loop {
        if !current.iter().any(|&r| ctx.is_pos(r, class)) {
            break;
        }
        let (grow_rows, prune_rows) = stratified_split(ctx, &current, params.grow_ratio, rng);
        let mut rule = grow_rule(ctx, class, &grow_rows);
        if rule.conditions.is_empty() {
            break;
        }
        if !prune_rows.is_empty() {
            prune_rule(ctx, class, &mut rule, &prune_rows);
            let (p, n) = coverage(ctx, class, &rule, &prune_rows);
            if p + n > 0.0 && n / (p + n) > 0.5 {
                break;
            }
        }
        let (p_cov, _) = coverage(ctx, class, &rule, &current);
        if p_cov == 0.0 {
            break;
        }

        rules.push(rule);
        let dl = ruleset_dl(ctx, class, stage_data, rules, total_conditions, exp_fp);
        if dl > min_dl + MAX_DL_SURPLUS {
            rules.pop();
            break;
        }
        min_dl = min_dl.min(dl);
        let last = rules.last().expect("just pushed");
        current.retain(|&r| !last.matches(ctx.values(r)));
    }
}

#[allow(clippy::too_many_arguments)]
fn optimize_pass(
    ctx: &Ctx,
    class: usize,
    stage_data: &[usize],
    params: &TrainParams,
    rng: &mut Rng,
    total_conditions: f64,
    exp_fp: f64,
    rules: &mut Vec<Rule>,
) {
    for i in 0..rules.len() {
        // Data not claimed by the other rules of this stage.
        let data_i: Vec<usize> = stage_data
            .iter()
            .copied()
            .filter(|&r| {
                !rules
                    .iter()
                    .enumerate()
                    .any(|(j, rule)| j != i && rule.matches(ctx.values(r)))
            })
            .collect();
        if data_i.is_empty() {
            continue;
        }
        let (grow_rows, prune_rows) = stratified_split(ctx, &data_i, params.grow_ratio, rng);

        let mut replacement = grow_rule(ctx, class, &grow_rows);
        if !prune_rows.is_empty() && !replacement.conditions.is_empty() {
            prune_rule(ctx, class, &mut replacement, &prune_rows);
        }

        let mut revision = rules[i].clone();
        grow_more(ctx, class, &mut revision, &grow_rows);
        if !prune_rows.is_empty() && !revision.conditions.is_empty() {
            prune_rule(ctx, class, &mut revision, &prune_rows);
        }

        let mut best_dl = ruleset_dl(ctx, class, stage_data, rules, total_conditions, exp_fp);
        for cand in [replacement, revision] {
            if cand.conditions.is_empty() {
                continue;
            }
            let original = std::mem::replace(&mut rules[i], cand);
            let dl = ruleset_dl(ctx, class, stage_data, rules, total_conditions, exp_fp);
            if dl < best_dl - 1e-9 {
                best_dl = dl;
            } else {
                rules[i] = original;
            }
        }
    }
}

/// FOIL-gain greedy growing until no negatives remain or no condition helps.
fn grow_rule(ctx: &Ctx, class: usize, rows: &[usize]) -> Rule {
    let mut rule = Rule {
        conditions: Vec::new(),
        class,
        counts: vec![0.0; ctx.num_classes],
    };
    let mut covered: Vec<usize> = rows.to_vec();
    loop {
        let p_before = covered.iter().filter(|&&r| ctx.is_pos(r, class)).count() as f64;
        let n_before = covered.len() as f64 - p_before;
        if n_before == 0.0 || p_before == 0.0 {
            break;
        }
        match best_condition(ctx, class, &covered, p_before, n_before) {
            Some((cond, gain)) if gain > 1e-12 => {
                covered.retain(|&r| cond.matches(ctx.values(r)));
                rule.conditions.push(cond);
            }
            _ => break,
        }
    }
    rule
}

/// Extend an existing rule with further conditions (revision candidate).
fn grow_more(ctx: &Ctx, class: usize, rule: &mut Rule, rows: &[usize]) {
    let mut covered: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&r| rule.matches(ctx.values(r)))
        .collect();
    loop {
        let p = covered.iter().filter(|&&r| ctx.is_pos(r, class)).count() as f64;
        let n = covered.len() as f64 - p;
        if n == 0.0 || p == 0.0 {
            break;
        }
        match best_condition(ctx, class, &covered, p, n) {
            Some((cond, gain)) if gain > 1e-12 => {
                covered.retain(|&r| cond.matches(ctx.values(r)));
                rule.conditions.push(cond);
            }
            _ => break,
        }
    }
}

pub(crate) fn foil_gain(p: f64, n: f64, p_before: f64, n_before: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    p * ((p / (p + n)).log2() - (p_before / (p_before + n_before)).log2())
}

fn best_condition(
    ctx: &Ctx,
    class: usize,
    covered: &[usize],
    p_before: f64,
    n_before: f64,
) -> Option<(Condition, f64)> {
    let mut best: Option<(Condition, f64)> = None;
    let mut consider = |cond: Condition, p: f64, n: f64| {
        let gain = foil_gain(p, n, p_before, n_before);
        if best.as_ref().map_or(true, |(_, g)| gain > *g + 1e-12) {
            best = Some((cond, gain));
        }
    };

    for (attr, a) in ctx.dataset.attributes.iter().enumerate() {
        if attr == ctx.class_index {
            continue;
        }
        match &a.kind {
            AttrKind::Numeric => {
                let mut vals: Vec<(f64, bool)> = covered
                    .iter()
                    .filter_map(|&r| {
                        ctx.values(r)[attr]
                            .as_num()
                            .map(|v| (v, ctx.is_pos(r, class)))
                    })
                    .collect();
                if vals.len() < 2 {
                    continue;
                }
                vals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
                let total_p: f64 = vals.iter().filter(|v| v.1).count() as f64;
                let total_n = vals.len() as f64 - total_p;
                let mut p_le = 0.0;
                let mut n_le = 0.0;
                for i in 0..vals.len() - 1 {
                    if vals[i].1 {
                        p_le += 1.0;
                    } else {
                        n_le += 1.0;
                    }
                    if vals[i + 1].0 <= vals[i].0 {
                        continue;
                    }
                    let t = (vals[i].0 + vals[i + 1].0) / 2.0;
                    consider(Condition::Le { attr, threshold: t }, p_le, n_le);
                    consider(
                        Condition::Gt { attr, threshold: t },
                        total_p - p_le,
                        total_n - n_le,
                    );
                }
            }
            AttrKind::Nominal(domain) => {
                let mut per_value = vec![(0.0, 0.0); domain.len()];
                for &r in covered {
                    if let Some(v) = ctx.values(r)[attr].as_nom() {
                        if ctx.is_pos(r, class) {
                            per_value[v].0 += 1.0;
                        } else {
                            per_value[v].1 += 1.0;
                        }
                    }
                }
                for (v, &(p, n)) in per_value.iter().enumerate() {
                    if p + n > 0.0 {
                        consider(Condition::Eq { attr, value: v }, p, n);
                    }
                }
            }
        }
    }
    best
}

/// Keep the condition prefix maximizing `(p - n) / (p + n)` on the prune
/// rows; the shortest prefix wins ties.
fn prune_rule(ctx: &Ctx, class: usize, rule: &mut Rule, prune_rows: &[usize]) {
    let k = rule.conditions.len();
    let mut best_len = k;
    let mut best_value = f64::NEG_INFINITY;
    for len in 1..=k {
        let prefix = &rule.conditions[..len];
        let mut p = 0.0;
        let mut n = 0.0;
        for &r in prune_rows {
            if prefix.iter().all(|c| c.matches(ctx.values(r))) {
                if ctx.is_pos(r, class) {
                    p += 1.0;
                } else {
                    n += 1.0;
                }
            }
        }
        let value = if p + n > 0.0 {
            (p - n) / (p + n)
        } else {
            f64::NEG_INFINITY
        };
        if value > best_value + 1e-12 || (value > best_value - 1e-12 && len < best_len) {
            best_value = value;
            best_len = len;
        }
    }
    rule.conditions.truncate(best_len);
}

fn coverage(ctx: &Ctx, class: usize, rule: &Rule, rows: &[usize]) -> (f64, f64) {
    let mut p = 0.0;
    let mut n = 0.0;
    for &r in rows {
        if rule.matches(ctx.values(r)) {
            if ctx.is_pos(r, class) {
                p += 1.0;
            } else {
                n += 1.0;
            }
        }
    }
    (p, n)
}

/// Deterministic stratified grow/prune split; `grow_ratio` grow parts per
/// one prune part.
fn stratified_split(
    ctx: &Ctx,
    rows: &[usize],
    grow_ratio: f64,
    rng: &mut Rng,
) -> (Vec<usize>, Vec<usize>) {
    let frac = grow_ratio / (grow_ratio + 1.0);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ctx.num_classes];
    for &r in rows {
        if let Some(c) = ctx.values(r)[ctx.class_index].as_nom() {
            by_class[c].push(r);
        }
    }
    let mut grow = Vec::new();
    let mut prune = Vec::new();
    for mut group in by_class {
        rng.shuffle(&mut group);
        let g = ((group.len() as f64) * frac).round() as usize;
        for (i, r) in group.into_iter().enumerate() {
            if i < g {
                grow.push(r);
            } else {
                prune.push(r);
            }
        }
    }
    grow.sort_unstable();
    prune.sort_unstable();
    (grow, prune)
}

/// Universe size of candidate conditions: one per nominal value, two per
/// distinct numeric value.
fn count_possible_conditions(ctx: &Ctx, rows: &[usize]) -> f64 {
    let mut total = 0.0;
    for (attr, a) in ctx.dataset.attributes.iter().enumerate() {
        if attr == ctx.class_index {
            continue;
        }
        match &a.kind {
            AttrKind::Nominal(domain) => total += domain.len() as f64,
            AttrKind::Numeric => {
                let mut vals: Vec<f64> = rows
                    .iter()
                    .filter_map(|&r| ctx.values(r)[attr].as_num())
                    .collect();
                vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
                vals.dedup();
                total += 2.0 * vals.len() as f64;
            }
        }
    }
    total.max(1.0)
}

/// Description length of a subset indicator: `k` elements chosen out of
/// `t` with expected proportion `p`.
fn subset_dl(t: f64, k: f64, p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    let mut bits = -k * p.log2();
    if t > k {
        bits -= (t - k) * (1.0 - p).log2();
    }
    bits
}

/// Theory bits for one rule: condition count plus the subset of the
/// possible-condition universe, halved for encoding redundancy.
fn theory_bits(num_conditions: usize, total_conditions: f64) -> f64 {
    if num_conditions == 0 {
        return 0.0;
    }
    let k = num_conditions as f64;
    let t = total_conditions.max(k);
    0.5 * (k.log2().max(0.0) + subset_dl(t, k, k / t))
}

/// Exception bits: false positives among covered rows plus false
/// negatives among uncovered rows.
fn data_bits(exp_fp: f64, cover: f64, uncover: f64, fp: f64, fnn: f64) -> f64 {
    let total_bits = (cover + uncover + 1.0).log2();
    let (cover_bits, uncover_bits) = if cover > uncover {
        let exp_err = exp_fp * (fp + fnn);
        let cb = if cover > 0.0 {
            subset_dl(cover, fp, exp_err / cover)
        } else {
            0.0
        };
        let ub = if uncover > 0.0 {
            subset_dl(uncover, fnn, fnn / uncover)
        } else {
            0.0
        };
        (cb, ub)
    } else {
        let exp_err = (1.0 - exp_fp) * (fp + fnn);
        let cb = if cover > 0.0 {
            subset_dl(cover, fp, fp / cover)
        } else {
            0.0
        };
        let ub = if uncover > 0.0 {
            subset_dl(uncover, fnn, exp_err / uncover)
        } else {
            0.0
        };
        (cb, ub)
    };
    total_bits + cover_bits + uncover_bits
}

fn ruleset_dl(
    ctx: &Ctx,
    class: usize,
    stage_data: &[usize],
    rules: &[Rule],
    total_conditions: f64,
    exp_fp: f64,
) -> f64 {
    let theory: f64 = rules
        .iter()
        .map(|r| theory_bits(r.conditions.len(), total_conditions))
        .sum();
    let mut cover = 0.0;
    let mut fp = 0.0;
    let mut uncover = 0.0;
    let mut fnn = 0.0;
    for &r in stage_data {
        let covered = rules.iter().any(|rule| rule.matches(ctx.values(r)));
        let pos = ctx.is_pos(r, class);
        if covered {
            cover += 1.0;
            if !pos {
                fp += 1.0;
            }
        } else {
            uncover += 1.0;
            if pos {
                fnn += 1.0;
            }
        }
    }
    theory + data_bits(exp_fp, cover, uncover, fp, fnn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Attribute;

    fn dataset(rows: &[(f64, &str)], classes: &[&str]) -> Dataset {
        let mut d = Dataset::new(
            "t",
            vec![
                Attribute::numeric("x"),
                Attribute::nominal("KPIAlarms", classes.to_vec()),
            ],
        )
        .unwrap();
        d.apply_default_class();
        for &(x, c) in rows {
            let ci = classes.iter().position(|v| *v == c).unwrap();
            d.push(vec![Value::Num(x), Value::Nom(ci)]).unwrap();
        }
        d
    }

    #[test]
    fn separable_data_yields_one_rule_plus_default() {
        let rows: Vec<(f64, &str)> = (0..30)
            .map(|i| (i as f64, if i < 10 { "A" } else { "B" }))
            .collect();
        let d = dataset(&rows, &["A", "B"]);
        let m = train_ripper(&d, &TrainParams::default()).unwrap();
        assert_eq!(m.rules.len(), 2, "{:?}", m.rules);
        assert!(m.rules.last().unwrap().is_default());
        assert_eq!(m.rules.last().unwrap().class, 1);
        // Zero training errors.
        for (i, inst) in d.instances.iter().enumerate() {
            let idx = m.first_match(&inst.values);
            assert_eq!(Some(m.rules[idx].class), d.class_of(i));
        }
    }

    #[test]
    fn single_class_data_gives_default_only_model() {
        let rows: Vec<(f64, &str)> = (0..5).map(|i| (i as f64, "A")).collect();
        let d = dataset(&rows, &["A", "B"]);
        let m = train_ripper(&d, &TrainParams::default()).unwrap();
        assert_eq!(m.rules.len(), 1);
        assert!(m.rules[0].is_default());
        assert_eq!(m.rules[0].class, 0);
    }

    #[test]
    fn every_training_instance_is_covered() {
        let rows: Vec<(f64, &str)> = (0..60)
            .map(|i| {
                let x = i as f64;
                (x, if x < 15.0 { "A" } else if x < 40.0 { "B" } else { "C" })
            })
            .collect();
        let d = dataset(&rows, &["A", "B", "C"]);
        let m = train_ripper(&d, &TrainParams::default()).unwrap();
        let covered_total: f64 = m.rules.iter().map(|r| r.covered()).sum();
        assert_eq!(covered_total, d.len() as f64);
    }

    #[test]
    fn foil_gain_positive_iff_precision_improves() {
        // Brute force over small count combinations.
        for p in 1..6 {
            for n in 0..6 {
                for pb in p..8 {
                    for nb in n..8 {
                        let g = foil_gain(p as f64, n as f64, pb as f64, nb as f64);
                        let prec_after = p as f64 / (p + n) as f64;
                        let prec_before = pb as f64 / (pb + nb) as f64;
                        if prec_after > prec_before + 1e-12 {
                            assert!(g > 0.0, "p={p} n={n} pb={pb} nb={nb}");
                        } else if prec_after < prec_before - 1e-12 {
                            assert!(g < 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let rows: Vec<(f64, &str)> = (0..50)
            .map(|i| (i as f64, if i % 3 == 0 { "A" } else { "B" }))
            .collect();
        let d = dataset(&rows, &["A", "B"]);
        let a = train_ripper(&d, &TrainParams::default()).unwrap();
        let b = train_ripper(&d, &TrainParams::default()).unwrap();
        assert_eq!(a, b);
    }
}
