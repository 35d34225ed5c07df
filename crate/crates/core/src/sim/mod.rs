//! Monte Carlo replication loop.
//!
//! Replication `r` of a scenario draws from `ChaCha8Rng` seeded with the
//! master seed and switched to stream `r`, so every replication owns an
//! independent, addressable stream. Replications are processed in fixed
//! chunks whose partial accumulators are merged in chunk order; results are
//! therefore identical for any number of worker threads.

pub mod generators;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use generators::{
    gen_between_block, gen_cauchy_independent, gen_equicorrelated, gen_independent, gen_null_pvalues,
    gen_within_block, Generator, GeneratorKind,
};

use crate::error::{invalid, Error, Result};
use crate::hypothesis::{Family, FamilyLayout, ParameterVector};
use crate::metrics::{tally, ErrorRateEstimate, Metric, TallyAccumulator};
use crate::procedures::{ProcedureId, ProcedureSpec};
use crate::scalar::Real;

/// Replications per work unit.
pub const CHUNK: u64 = 8192;

/// A scenario as read from JSON. Blocks are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub generator: String,
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Vec<usize>>>,
    pub procedure: String,
    pub alpha: f64,
    pub reps: u64,
    pub seed: u64,
}

impl ScenarioJson {
    pub fn to_config<S: Real>(&self) -> Result<ScenarioConfig<S>> {
        let theta = ParameterVector::new(self.theta.iter().map(|&x| S::lit(x)).collect())?;
        let layout = self
            .blocks
            .as_ref()
            .map(|b| FamilyLayout::from_one_based(theta.len(), b))
            .transpose()?;
        let config = ScenarioConfig {
            name: self.name.clone(),
            generator: self.generator.parse()?,
            theta,
            rho: S::lit(self.rho.unwrap_or(0.0)),
            layout,
            procedure: self.procedure.parse()?,
            alpha: S::lit(self.alpha),
            reps: self.reps,
            master_seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<S> {
    pub name: Option<String>,
    pub generator: GeneratorKind,
    pub theta: ParameterVector<S>,
    pub rho: S,
    pub layout: Option<FamilyLayout>,
    pub procedure: ProcedureId,
    pub alpha: S,
    pub reps: u64,
    pub master_seed: u64,
}

impl<S: Real> ScenarioConfig<S> {
    /// Independent generator, no layout, `rho = 0`.
    pub fn new(generator: GeneratorKind, theta: ParameterVector<S>, procedure: ProcedureId, alpha: S, reps: u64, seed: u64) -> Self {
        Self {
            name: None,
            generator,
            theta,
            rho: S::zero(),
            layout: None,
            procedure,
            alpha,
            reps,
            master_seed: seed,
        }
    }

    pub fn with_rho(mut self, rho: S) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_layout(mut self, layout: FamilyLayout) -> Self {
        self.layout = Some(layout);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    /// Explicit name, or one derived from procedure, generator and `n`.
    pub fn display_name(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{}_{}_n{}", self.procedure, self.generator, self.n()))
    }

    /// Checks the configuration and builds the generator and procedure.
    pub fn validate(&self) -> Result<(Generator<S>, ProcedureSpec<S>)> {
        if self.reps == 0 {
            return Err(invalid("reps must be at least 1"));
        }
        let needs = self.generator.needs_layout() || self.procedure.needs_layout();
        match (&self.layout, needs) {
            (None, true) => {
                return Err(invalid(format!(
                    "generator {} with procedure {} requires blocks",
                    self.generator, self.procedure
                )))
            }
            (Some(_), false) => {
                return Err(invalid(format!(
                    "blocks given but neither generator {} nor procedure {} uses them",
                    self.generator, self.procedure
                )))
            }
            (Some(l), true) if l.n() != self.n() => {
                return Err(Error::DimensionMismatch {
                    expected: self.n(),
                    got: l.n(),
                })
            }
            _ => {}
        }
        let generator_layout = if self.generator.needs_layout() { self.layout.clone() } else { None };
        let procedure_layout = if self.procedure.needs_layout() { self.layout.clone() } else { None };
        let generator = Generator::new(self.generator, self.rho, generator_layout)?;
        let spec = ProcedureSpec::new(self.procedure, self.alpha, procedure_layout)?;
        Ok((generator, spec))
    }

    pub fn to_json(&self) -> ScenarioJson {
        let f = |x: S| x.to_f64().unwrap_or(f64::NAN);
        ScenarioJson {
            name: self.name.clone(),
            generator: self.generator.tag().to_string(),
            theta: self.theta.values().iter().map(|&x| f(x)).collect(),
            rho: self.generator.uses_rho().then(|| f(self.rho)),
            blocks: self.layout.as_ref().map(FamilyLayout::to_one_based),
            procedure: self.procedure.tag().to_string(),
            alpha: f(self.alpha),
            reps: self.reps,
            seed: self.master_seed,
        }
    }
}

/// Replications on which a standing invariant failed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    /// `p_h1 + p_h2 != 1` for some pair.
    pub pairing: u64,
    /// Both claims for one parameter.
    pub direction: u64,
    /// Per-replication union bound over the family split.
    pub union_bound: u64,
    /// Tally count identities or disagreement of the two error views.
    pub accounting: u64,
}

impl Violations {
    pub fn total(&self) -> u64 {
        self.pairing + self.direction + self.union_bound + self.accounting
    }

    fn merge(&mut self, o: &Violations) {
        self.pairing += o.pairing;
        self.direction += o.direction;
        self.union_bound += o.union_bound;
        self.accounting += o.accounting;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationResult {
    pub name: String,
    pub scenario: ScenarioJson,
    pub family: Family,
    pub reps: u64,
    pub seed: u64,
    pub estimates: Vec<ErrorRateEstimate>,
    pub accumulator: TallyAccumulator,
    pub violations: Violations,
    /// Wall time; excluded from equality.
    pub elapsed: Duration,
}

impl PartialEq for SimulationResult {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.scenario == other.scenario
            && self.family == other.family
            && self.reps == other.reps
            && self.seed == other.seed
            && self.estimates == other.estimates
            && self.accumulator == other.accumulator
            && self.violations == other.violations
    }
}

impl SimulationResult {
    pub fn estimate(&self, metric: Metric) -> Option<&ErrorRateEstimate> {
        self.estimates.iter().find(|e| e.metric == metric)
    }

    pub fn by_label(&self, label: &str) -> Option<&ErrorRateEstimate> {
        self.estimates.iter().find(|e| e.label == label)
    }
}

fn run_chunk<S: Real>(
    config: &ScenarioConfig<S>,
    generator: &Generator<S>,
    spec: &ProcedureSpec<S>,
    base: &ChaCha8Rng,
    reps: std::ops::Range<u64>,
) -> Result<(TallyAccumulator, Violations)> {
    let mut acc = TallyAccumulator::default();
    let mut v = Violations::default();
    for rep in reps {
        let mut rng = base.clone();
        rng.set_stream(rep);
        let stats = generator.generate(&config.theta, &mut rng)?;
        let p = stats.paired();
        if p.first_pairing_violation().is_some() {
            v.pairing += 1;
        }
        let decisions = match spec.apply(&p) {
            Ok(d) => d,
            Err(Error::DirectionConflict { .. }) => {
                v.direction += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let t = match tally(&decisions, &config.theta) {
            Ok(t) => t,
            Err(Error::Invariant(_)) => {
                v.accounting += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if !t.is_consistent() {
            v.accounting += 1;
        }
        if !t.union_bound_holds() {
            v.union_bound += 1;
        }
        acc.push(&t);
    }
    Ok((acc, v))
}

/// Runs every replication of the scenario on the current rayon pool.
pub fn run_experiment<S: Real>(config: &ScenarioConfig<S>) -> Result<SimulationResult> {
    let start = Instant::now();
    let (generator, spec) = config.validate()?;
    let base = ChaCha8Rng::seed_from_u64(config.master_seed);
    let chunks = config.reps.div_ceil(CHUNK);
    let parts: Vec<(TallyAccumulator, Violations)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(config.reps);
            run_chunk(config, &generator, &spec, &base, lo..hi)
        })
        .collect::<Result<_>>()?;

    let mut acc = TallyAccumulator::default();
    let mut violations = Violations::default();
    for (a, v) in &parts {
        acc.merge(a);
        violations.merge(v);
    }
    let family = config.procedure.family();
    let estimates = Metric::for_family(family)
        .into_iter()
        .map(|m| acc.estimate(m, family))
        .collect();
    Ok(SimulationResult {
        name: config.display_name(),
        scenario: config.to_json(),
        family,
        reps: config.reps,
        seed: config.master_seed,
        estimates,
        accumulator: acc,
        violations,
        elapsed: start.elapsed(),
    })
}

/// As [`run_experiment`], on a dedicated pool of `threads` workers
/// (`None` or `0` uses the global pool).
pub fn run_experiment_with_threads<S: Real>(config: &ScenarioConfig<S>, threads: Option<usize>) -> Result<SimulationResult> {
    match threads {
        Some(t) if t > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| invalid(format!("cannot start {t} worker threads: {e}")))?;
            pool.install(|| run_experiment(config))
        }
        _ => run_experiment(config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Scope;

    fn cfg(procedure: ProcedureId, n: usize, reps: u64) -> ScenarioConfig<f64> {
        ScenarioConfig::new(
            GeneratorKind::Independent,
            ParameterVector::zeros(n).unwrap(),
            procedure,
            0.05,
            reps,
            7,
        )
    }

    #[test]
    fn deterministic_across_runs_and_threads() {
        let c = cfg(ProcedureId::P3, 4, 20_000);
        let a = run_experiment_with_threads(&c, Some(1)).unwrap();
        let b = run_experiment_with_threads(&c, Some(3)).unwrap();
        assert_eq!(a, b);
        let one = cfg(ProcedureId::P1, 2, 1);
        assert_eq!(run_experiment(&one).unwrap(), run_experiment(&one).unwrap());
    }

    #[test]
    fn estimates_have_full_reps() {
        let r = run_experiment(&cfg(ProcedureId::P5, 3, 5000)).unwrap();
        assert_eq!(r.violations.total(), 0);
        assert!(r.estimates.iter().all(|e| e.reps == 5000));
        assert!(r.by_label("FWER_F1prime").is_some());
        assert!(r.estimate(Metric::Fwer(Scope::Part2)).is_some());
    }

    #[test]
    fn validation_errors() {
        assert!(cfg(ProcedureId::P4, 4, 10).validate().is_err());
        assert!(cfg(ProcedureId::P3, 4, 0).validate().is_err());
        let extra = cfg(ProcedureId::P3, 4, 10).with_layout(FamilyLayout::single(4).unwrap());
        assert!(extra.validate().is_err());
        let mut bad_rho = cfg(ProcedureId::P3, 4, 10);
        bad_rho.generator = GeneratorKind::Equicorrelated;
        bad_rho.rho = 1.0;
        assert!(bad_rho.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = cfg(ProcedureId::P4, 4, 10)
            .with_layout(FamilyLayout::contiguous(4, 2).unwrap())
            .with_name("demo");
        let j = c.to_json();
        assert_eq!(j.blocks, Some(vec![vec![1, 2], vec![3, 4]]));
        assert_eq!(j.to_config::<f64>().unwrap(), c);
    }
}
