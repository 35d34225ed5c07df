//! Stepdown and stepup executors over an arbitrary p-value vector, and the
//! critical schedules used by the procedures.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    /// `alpha / (n - i + 1)`, run as a stepdown.
    Holm,
    /// `alpha / (n - i + 1)`, run as a stepup.
    Hochberg,
    /// `alpha / (n - i + 1 + alpha)`.
    Proc3,
    /// `i alpha / n`.
    Bh,
    /// `alpha / (n - floor((i + 1) / 2) + 1)` for `i = 1..2n`.
    Proc5,
    /// Constant `alpha / n`.
    Bonferroni,
    Custom,
}

impl ScheduleKind {
    pub const VALID: &'static str = "holm, hochberg, proc3, bh, proc5, bonferroni";

    pub fn tag(self) -> &'static str {
        match self {
            ScheduleKind::Holm => "holm",
            ScheduleKind::Hochberg => "hochberg",
            ScheduleKind::Proc3 => "proc3",
            ScheduleKind::Bh => "bh",
            ScheduleKind::Proc5 => "proc5",
            ScheduleKind::Bonferroni => "bonferroni",
            ScheduleKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "holm" => ScheduleKind::Holm,
            "hochberg" => ScheduleKind::Hochberg,
            "proc3" => ScheduleKind::Proc3,
            "bh" => ScheduleKind::Bh,
            "proc5" => ScheduleKind::Proc5,
            "bonferroni" => ScheduleKind::Bonferroni,
            _ => {
                return Err(Error::UnknownTag {
                    what: "schedule kind",
                    got: s.to_string(),
                    valid: Self::VALID,
                })
            }
        })
    }
}

/// Nondecreasing critical constants `0 < c_1 <= ... <= c_m < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSchedule<S> {
    kind: ScheduleKind,
    constants: Vec<S>,
}

impl<S: Real> CriticalSchedule<S> {
    pub fn new(kind: ScheduleKind, constants: Vec<S>) -> Result<Self> {
        if constants.is_empty() {
            return Err(invalid("critical schedule must be nonempty"));
        }
        for (i, &c) in constants.iter().enumerate() {
            if !(c > S::zero() && c < S::one()) {
                return Err(invalid(format!("critical constant c_{} = {c} outside (0, 1)", i + 1)));
            }
            if i > 0 && c < constants[i - 1] {
                return Err(invalid(format!("critical constants decrease at position {}", i + 1)));
            }
        }
        Ok(Self { kind, constants })
    }

    pub fn custom(constants: Vec<S>) -> Result<Self> {
        Self::new(ScheduleKind::Custom, constants)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn constants(&self) -> &[S] {
        &self.constants
    }

    pub fn len(&self) -> usize {
        self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
    }

    /// Extends the schedule to length `m` by repeating `fill`, which must
    /// not be smaller than the last constant.
    pub fn padded(&self, m: usize, fill: S) -> Result<Self> {
        let mut constants = self.constants.clone();
        constants.resize(m.max(constants.len()), fill);
        Self::new(ScheduleKind::Custom, constants)
    }
}

/// `i alpha / n`, shared by every BH-type computation so that the same
/// threshold is produced bit-for-bit wherever it is needed.
#[inline]
pub fn bh_constant<S: Real>(i: usize, n: usize, level: S) -> S {
    S::from_count(i) * level / S::from_count(n)
}

/// `level / k`, the Holm/Hochberg constant with `k = n - i + 1`.
#[inline]
pub fn holm_constant<S: Real>(k: usize, level: S) -> S {
    level / S::from_count(k)
}

pub fn make_schedule<S: Real>(kind: ScheduleKind, n: usize, level: S) -> Result<CriticalSchedule<S>> {
    if n == 0 {
        return Err(invalid("schedule length n must be at least 1"));
    }
    if !(level > S::zero() && level < S::one()) {
        return Err(Error::InvalidLevel(level.to_f64().unwrap_or(f64::NAN), "must lie in (0, 1)"));
    }
    let constants: Vec<S> = match kind {
        ScheduleKind::Holm | ScheduleKind::Hochberg => (1..=n).map(|i| holm_constant(n - i + 1, level)).collect(),
        ScheduleKind::Proc3 => (1..=n)
            .map(|i| level / (S::from_count(n - i + 1) + level))
            .collect(),
        ScheduleKind::Bh => (1..=n).map(|i| bh_constant(i, n, level)).collect(),
        ScheduleKind::Proc5 => (1..=2 * n).map(|i| holm_constant(n - i.div_ceil(2) + 1, level)).collect(),
        ScheduleKind::Bonferroni => vec![level / S::from_count(n); n],
        ScheduleKind::Custom => {
            return Err(invalid("custom schedules are built from explicit constants"));
        }
    };
    CriticalSchedule::new(kind, constants)
}

/// Result of a stepwise run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepwiseOutcome {
    pub rejected_count: usize,
    /// Original indices of the rejected p-values, in increasing index order.
    pub rejected_indices: Vec<usize>,
}

fn check_inputs<S: Real>(p: &[S], sched: &CriticalSchedule<S>) -> Result<()> {
    if p.len() != sched.len() {
        return Err(Error::DimensionMismatch {
            expected: sched.len(),
            got: p.len(),
        });
    }
    if let Some(i) = p.iter().position(|&x| !(x >= S::zero() && x <= S::one())) {
        return Err(invalid(format!("p-value at index {i} outside [0, 1]")));
    }
    Ok(())
}

/// Indices sorted by p-value, ties broken by original index.
pub(crate) fn sorted_order<S: Real>(p: &[S]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    // Inputs are validated to be in [0, 1], so partial_cmp never fails.
    order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap_or(std::cmp::Ordering::Equal));
    order
}

pub(crate) fn outcome_from_order(order: &[usize], count: usize) -> StepwiseOutcome {
    let mut rejected_indices = order[..count].to_vec();
    rejected_indices.sort_unstable();
    StepwiseOutcome {
        rejected_count: count,
        rejected_indices,
    }
}

/// Rejects the `k` smallest p-values, `k = max{i : p_(j) <= c_j for all j <= i}`.
/// The schedule must have exactly one constant per p-value.
pub fn stepdown<S: Real>(p: &[S], sched: &CriticalSchedule<S>) -> Result<StepwiseOutcome> {
    check_inputs(p, sched)?;
    let order = sorted_order(p);
    let c = sched.constants();
    let count = order.iter().zip(c).take_while(|(&idx, &ci)| p[idx] <= ci).count();
    Ok(outcome_from_order(&order, count))
}

/// Rejects the `k` smallest p-values, `k = max{i : p_(i) <= c_i}`.
pub fn stepup<S: Real>(p: &[S], sched: &CriticalSchedule<S>) -> Result<StepwiseOutcome> {
    check_inputs(p, sched)?;
    let order = sorted_order(p);
    let c = sched.constants();
    let count = (0..order.len())
        .rev()
        .find(|&k| p[order[k]] <= c[k])
        .map_or(0, |k| k + 1);
    Ok(outcome_from_order(&order, count))
}
