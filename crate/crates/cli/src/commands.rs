//! Subcommand implementations.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context as _};
use serde::{Deserialize, Serialize};

use dirstep::format::sig10;
use dirstep::hypothesis::FamilyLayout;
use dirstep::procedures::{ProcedureId, ProcedureSpec};
use dirstep::pvalue::{NullDistribution, PairedPValues, StatisticVector};
use dirstep::sim::{run_experiment_with_threads, ScenarioJson};
use dirstep::{make_schedule, proc1_exact_fwer, proc1_fwer_bound, DecisionSet, ScheduleKind};

use crate::output::{round10, Context};
use crate::Failure;

fn csv_body(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Serialize)]
struct CritvalsEcho<'a> {
    kind: &'a str,
    n: usize,
    alpha: f64,
}

pub fn critvals(ctx: &Context, kind: &str, n: usize, alpha: f64) -> Result<(), Failure> {
    let kind: ScheduleKind = kind.parse()?;
    let sched = make_schedule(kind, n, alpha)?;
    let rows = sched
        .constants()
        .iter()
        .enumerate()
        .map(|(i, &c)| vec![(i + 1).to_string(), sig10(c)]);
    let body = csv_body(&["i", "constant"], rows)?;
    ctx.emit("critvals", None, CritvalsEcho { kind: kind.tag(), n, alpha }, &body)?;
    Ok(())
}

/// Input of `run`: either statistics (with their null law) or the `n`
/// p-values of `H_11..H_n1`. Blocks are 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunInput {
    pub procedure: String,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistics: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pvalues: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Vec<usize>>>,
}

#[derive(Serialize)]
struct RunOutput<'a> {
    procedure: &'a str,
    alpha: f64,
    #[serde(flatten)]
    decisions: &'a DecisionSet,
}

fn paired_from_input(input: &RunInput) -> anyhow::Result<PairedPValues<f64>> {
    match (&input.statistics, &input.pvalues) {
        (Some(t), None) => {
            let dist: NullDistribution = input.distribution.as_deref().unwrap_or("normal").parse()?;
            Ok(StatisticVector::new(t.clone(), dist)?.paired())
        }
        (None, Some(p)) => {
            if input.distribution.is_some() {
                bail!("\"distribution\" only applies to \"statistics\"");
            }
            Ok(PairedPValues::from_upper(p)?)
        }
        _ => Err(anyhow!("exactly one of \"statistics\" and \"pvalues\" is required")),
    }
}

pub fn run(ctx: &Context, path: &Path) -> Result<(), Failure> {
    let input: RunInput = read_json(path)?;
    let id: ProcedureId = input.procedure.parse()?;
    let p = paired_from_input(&input)?;
    let layout = input
        .blocks
        .as_ref()
        .map(|b| FamilyLayout::from_one_based(p.n(), b))
        .transpose()?;
    if layout.is_some() && !id.needs_layout() {
        return Err(anyhow!("procedure {id} takes no blocks").into());
    }
    let spec = ProcedureSpec::new(id, input.alpha, layout)?;
    let decisions = spec.apply(&p)?;
    let out = RunOutput {
        procedure: id.tag(),
        alpha: round10(input.alpha),
        decisions: &decisions,
    };
    let body = serde_json::to_string_pretty(&out)? + "\n";
    ctx.emit("run", Some(path), &input, &body)?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(ScenarioJson),
    Many(Vec<ScenarioJson>),
}

pub fn simulate(ctx: &Context, path: &Path) -> Result<(), Failure> {
    let scenarios = match read_json::<OneOrMany>(path)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    };
    if scenarios.is_empty() {
        return Err(anyhow!("{} contains no scenarios", path.display()).into());
    }
    let mut resolved = Vec::with_capacity(scenarios.len());
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for (k, mut s) in scenarios.into_iter().enumerate() {
        if let Some(seed) = ctx.seed {
            s.seed = seed;
        }
        let config = s
            .to_config::<f64>()
            .with_context(|| format!("scenario {}", k + 1))?;
        let result = run_experiment_with_threads(&config, ctx.threads)?;
        if result.violations.total() > 0 {
            violations.push(format!("{}: {:?}", result.name, result.violations));
        }
        for e in &result.estimates {
            rows.push(vec![
                e.label.clone(),
                config.procedure.tag().to_string(),
                result.name.clone(),
                config.n().to_string(),
                sig10(s.alpha),
                sig10(e.estimate),
                sig10(e.se),
                e.reps.to_string(),
                s.seed.to_string(),
            ]);
        }
        resolved.push(config.to_json());
    }
    let body = csv_body(
        &["metric", "procedure", "scenario", "n", "alpha", "estimate", "se", "reps", "seed"],
        rows,
    )?;
    ctx.emit("simulate", Some(path), &resolved, &body)?;
    if !violations.is_empty() {
        return Err(Failure::Check(format!("invariant violations in {}", violations.join("; "))));
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleEcho {
    n: usize,
    alpha: f64,
}

pub fn oracle(ctx: &Context, n: usize, alpha: f64) -> Result<(), Failure> {
    let exact = proc1_exact_fwer(n, alpha)?;
    let bound = proc1_fwer_bound(n, alpha)?;
    let body = csv_body(
        &["n", "alpha", "exact_fwer", "bound", "difference"],
        [vec![n.to_string(), sig10(alpha), sig10(exact), sig10(bound), sig10(bound - exact)]],
    )?;
    ctx.emit("oracle", None, OracleEcho { n, alpha }, &body)?;
    Ok(())
}
