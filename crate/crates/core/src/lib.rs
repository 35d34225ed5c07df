//! Stepwise multiple testing procedures for directional decisions about
//! many parameters.
//!
//! Each parameter `theta_i` gets the one-sided nulls `H_i1: theta_i <= 0`
//! and `H_i2: theta_i > 0` and the point null `H_i3: theta_i = 0`. The
//! procedures turn paired one-sided p-values into rejections and from them
//! into sign claims, controlling familywise or false discovery rates of
//! type 1 and type 3 errors. The crate also contains exact and brute-force
//! reference computations and a reproducible Monte Carlo harness.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod error;
pub mod format;
pub mod hypothesis;
pub mod metrics;
pub mod oracles;
pub mod procedures;
pub mod pvalue;
pub mod scalar;
pub mod sim;
pub mod special;
pub mod stepwise;

pub use error::{Error, Result};
pub use hypothesis::{
    true_null_set, DecisionSet, Direction, Family, FamilyLayout, Hypothesis, LayoutViolation, NullKind,
};
pub use metrics::{estimate, tally, union_bound_check, ErrorRateEstimate, ErrorTally, Metric, Scope};
pub use oracles::{a2_condition_check, proc1_exact_fwer, proc1_fwer_bound, stepdown_bruteforce, stepup_bruteforce};
pub use procedures::{combine_f, F1Method, F2Method, ProcedureId};
pub use pvalue::NullDistribution;
pub use scalar::Real;
pub use sim::{run_experiment, run_experiment_with_threads, GeneratorKind, ScenarioJson, SimulationResult};
pub use stepwise::{make_schedule, stepdown, stepup, ScheduleKind, StepwiseOutcome};

pub type Theta = hypothesis::ParameterVector<f64>;
pub type Statistics = pvalue::StatisticVector<f64>;
pub type PValues = pvalue::PairedPValues<f64>;
pub type Schedule = stepwise::CriticalSchedule<f64>;
pub type Procedure = procedures::ProcedureSpec<f64>;
pub type Scenario = sim::ScenarioConfig<f64>;
