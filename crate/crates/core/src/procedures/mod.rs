//! Directional multiple testing procedures.
//!
//! Every procedure consumes the paired one-sided p-values of
//! [`PairedPValues`] (which also determine the `H_i3` p-values and the
//! two-sided p-values) and returns a [`DecisionSet`]. Levels are restricted
//! to `(0, 1/2)`: with every critical constant below one half at most one
//! member of each pair `(H_i1, H_i2)` can be rejected.

mod baselines;
mod fdr;
mod fwer;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use baselines::{bauer_bonferroni, conventional_holm_2n, directional_holm};
pub use fdr::{proc6_bh, proc7_between_block_bh, proc8_within_block_bh, proc9_positive_dep_bh};
pub use fwer::{
    proc1_prime, proc1_prime_level, proc1_two_stage, proc2_modified_two_stage, proc2_stage2_threshold,
    proc3_stepdown, proc4_block, proc5_hochberg_directional,
};

use crate::error::{Error, Result};
use crate::hypothesis::{DecisionSet, Family, FamilyLayout, Hypothesis, NullKind};
use crate::pvalue::{PairedPValues, StatisticVector};
use crate::scalar::Real;
use crate::stepwise::{make_schedule, stepdown, stepup, ScheduleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcedureId {
    P1,
    #[serde(rename = "P1prime")]
    P1Prime,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P9,
    #[serde(rename = "bauer_bonferroni")]
    BauerBonferroni,
    #[serde(rename = "directional_holm")]
    DirectionalHolm,
    #[serde(rename = "conventional_holm_2n")]
    ConventionalHolm2n,
    #[serde(rename = "combined_F_remark3")]
    CombinedF,
}

impl ProcedureId {
    pub const ALL: [ProcedureId; 14] = [
        ProcedureId::P1,
        ProcedureId::P1Prime,
        ProcedureId::P2,
        ProcedureId::P3,
        ProcedureId::P4,
        ProcedureId::P5,
        ProcedureId::P6,
        ProcedureId::P7,
        ProcedureId::P8,
        ProcedureId::P9,
        ProcedureId::BauerBonferroni,
        ProcedureId::DirectionalHolm,
        ProcedureId::ConventionalHolm2n,
        ProcedureId::CombinedF,
    ];

    const VALID: &'static str = "P1, P1prime, P2, P3, P4, P5, P6, P7, P8, P9, bauer_bonferroni, \
                                 directional_holm, conventional_holm_2n, combined_F_remark3";

    pub fn tag(self) -> &'static str {
        match self {
            ProcedureId::P1 => "P1",
            ProcedureId::P1Prime => "P1prime",
            ProcedureId::P2 => "P2",
            ProcedureId::P3 => "P3",
            ProcedureId::P4 => "P4",
            ProcedureId::P5 => "P5",
            ProcedureId::P6 => "P6",
            ProcedureId::P7 => "P7",
            ProcedureId::P8 => "P8",
            ProcedureId::P9 => "P9",
            ProcedureId::BauerBonferroni => "bauer_bonferroni",
            ProcedureId::DirectionalHolm => "directional_holm",
            ProcedureId::ConventionalHolm2n => "conventional_holm_2n",
            ProcedureId::CombinedF => "combined_F_remark3",
        }
    }

    /// Family the procedure's rejections are expressed in.
    pub fn family(self) -> Family {
        match self {
            ProcedureId::P5 => Family::F1PrimeF2Prime,
            ProcedureId::CombinedF => Family::F,
            _ => Family::F1,
        }
    }

    pub fn needs_layout(self) -> bool {
        matches!(self, ProcedureId::P4 | ProcedureId::P7 | ProcedureId::P8)
    }
}

impl fmt::Display for ProcedureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ProcedureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProcedureId::ALL
            .into_iter()
            .find(|id| id.tag() == s)
            .ok_or_else(|| Error::UnknownTag {
                what: "procedure",
                got: s.to_string(),
                valid: Self::VALID,
            })
    }
}

/// Procedure choice, level and (for P4, P7, P8) block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureSpec<S> {
    pub id: ProcedureId,
    pub level: S,
    pub layout: Option<FamilyLayout>,
}

impl<S: Real> ProcedureSpec<S> {
    pub fn new(id: ProcedureId, level: S, layout: Option<FamilyLayout>) -> Result<Self> {
        check_level(level)?;
        if id.needs_layout() && layout.is_none() {
            return Err(crate::error::invalid(format!("procedure {id} requires a block layout")));
        }
        Ok(Self { id, level, layout })
    }

    pub fn apply(&self, p: &PairedPValues<S>) -> Result<DecisionSet> {
        let alpha = self.level;
        match self.id {
            ProcedureId::P1 => proc1_two_stage(p, alpha),
            ProcedureId::P1Prime => proc1_prime(p, alpha),
            ProcedureId::P2 => proc2_modified_two_stage(p, alpha),
            ProcedureId::P3 => proc3_stepdown(p, alpha),
            ProcedureId::P4 => proc4_block(p, alpha, self.layout()?),
            ProcedureId::P5 => proc5_hochberg_directional(p, alpha),
            ProcedureId::P6 => proc6_bh(p, alpha),
            ProcedureId::P7 => proc7_between_block_bh(p, alpha, self.layout()?),
            ProcedureId::P8 => proc8_within_block_bh(p, alpha, self.layout()?),
            ProcedureId::P9 => proc9_positive_dep_bh(p, alpha),
            ProcedureId::BauerBonferroni => bauer_bonferroni(p, alpha),
            ProcedureId::DirectionalHolm => directional_holm(p, alpha),
            ProcedureId::ConventionalHolm2n => conventional_holm_2n(p, alpha),
            ProcedureId::CombinedF => combine_f(p, alpha, F1Method::P3, F2Method::Proc3),
        }
    }

    pub fn apply_statistics(&self, stats: &StatisticVector<S>) -> Result<DecisionSet> {
        self.apply(&stats.paired())
    }

    fn layout(&self) -> Result<&FamilyLayout> {
        self.layout
            .as_ref()
            .ok_or_else(|| crate::error::invalid(format!("procedure {} requires a block layout", self.id)))
    }
}

/// Levels must lie in `(0, 1/2)`.
pub fn check_level<S: Real>(alpha: S) -> Result<()> {
    if alpha > S::zero() && alpha < S::half() {
        Ok(())
    } else {
        Err(Error::InvalidLevel(alpha.to_f64().unwrap_or(f64::NAN), "must lie in (0, 1/2)"))
    }
}

/// Maps an index into the `2n` paired vector of a block back to the global
/// hypothesis. `params[k]` is the global parameter of the block's k-th pair.
pub(crate) fn f1_hypothesis(params: Option<&[usize]>, n_local: usize, idx: usize) -> Hypothesis {
    let (local, kind) = if idx < n_local {
        (idx, NullKind::NonPositive)
    } else {
        (idx - n_local, NullKind::Positive)
    };
    let param = params.map_or(local, |ps| ps[local]);
    Hypothesis::new(param, kind)
}

pub(crate) fn f1_decisions(n: usize, indices: &[usize]) -> Result<DecisionSet> {
    let rejected = indices.iter().map(|&i| f1_hypothesis(None, n, i)).collect();
    DecisionSet::new(Family::F1, n, rejected)
}

pub(crate) fn check_layout(p_n: usize, layout: &FamilyLayout) -> Result<()> {
    if layout.n() != p_n {
        return Err(Error::DimensionMismatch {
            expected: p_n,
            got: layout.n(),
        });
    }
    Ok(())
}

/// Level share `alpha * n_i / n` of a block.
pub(crate) fn block_level<S: Real>(alpha: S, block_len: usize, n: usize) -> S {
    alpha * (S::from_count(block_len) / S::from_count(n))
}

/// Runs `inner` on each block at level `n_i alpha / n` and returns the union
/// of the rejections, in global indices.
pub(crate) fn per_block<S: Real>(
    p: &PairedPValues<S>,
    alpha: S,
    layout: &FamilyLayout,
    inner: impl Fn(&PairedPValues<S>, S) -> Result<DecisionSet>,
) -> Result<DecisionSet> {
    let n = p.n();
    check_layout(n, layout)?;
    let mut rejected = BTreeSet::new();
    for block in layout.blocks() {
        let sub = p.select(block);
        let local = inner(&sub, block_level(alpha, block.len(), n))?;
        rejected.extend(
            local
                .rejected()
                .iter()
                .map(|h| Hypothesis::new(block[h.param], h.kind)),
        );
    }
    DecisionSet::new(Family::F1, n, rejected)
}

/// F1 procedures usable inside [`combine_f`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum F1Method {
    P1Prime,
    P2,
    P3,
    P6,
    P9,
    BauerBonferroni,
}

impl F1Method {
    fn run<S: Real>(self, p: &PairedPValues<S>, level: S) -> Result<DecisionSet> {
        match self {
            F1Method::P1Prime => proc1_prime(p, level),
            F1Method::P2 => proc2_modified_two_stage(p, level),
            F1Method::P3 => proc3_stepdown(p, level),
            F1Method::P6 => proc6_bh(p, level),
            F1Method::P9 => proc9_positive_dep_bh(p, level),
            F1Method::BauerBonferroni => bauer_bonferroni(p, level),
        }
    }
}

/// Conventional procedures for the `n` point nulls of `F2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum F2Method {
    /// Stepdown with the `alpha / (n - i + 1 + alpha)` constants.
    Proc3,
    Holm,
    Hochberg,
    Bh,
}

impl F2Method {
    fn run<S: Real>(self, lower: &[S], level: S) -> Result<DecisionSet> {
        let n = lower.len();
        let outcome = match self {
            F2Method::Proc3 => stepdown(lower, &make_schedule(ScheduleKind::Proc3, n, level)?)?,
            F2Method::Holm => stepdown(lower, &make_schedule(ScheduleKind::Holm, n, level)?)?,
            F2Method::Hochberg => stepup(lower, &make_schedule(ScheduleKind::Hochberg, n, level)?)?,
            F2Method::Bh => stepup(lower, &make_schedule(ScheduleKind::Bh, n, level)?)?,
        };
        let rejected = outcome
            .rejected_indices
            .iter()
            .map(|&i| Hypothesis::new(i, NullKind::Zero))
            .collect();
        DecisionSet::new(Family::F2, n, rejected)
    }
}

/// Tests `F1` with `f1` and `F2` with `f2`, each at `alpha / 2`, and
/// rejects the union.
pub fn combine_f<S: Real>(p: &PairedPValues<S>, alpha: S, f1: F1Method, f2: F2Method) -> Result<DecisionSet> {
    check_level(alpha)?;
    let half = alpha * S::half();
    let first = f1.run(p, half)?;
    let second = f2.run(p.lower(), half)?;
    first.union(&second, Family::F)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::Direction;

    fn h(s: &str) -> Hypothesis {
        s.parse().unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for id in ProcedureId::ALL {
            assert_eq!(id.tag().parse::<ProcedureId>().unwrap(), id);
        }
        assert!("P10".parse::<ProcedureId>().is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ProcedureSpec::new(ProcedureId::P3, 0.05, None).is_ok());
        assert!(ProcedureSpec::new(ProcedureId::P3, 0.5, None).is_err());
        assert!(ProcedureSpec::new(ProcedureId::P3, 0.0, None).is_err());
        assert!(ProcedureSpec::new(ProcedureId::P4, 0.05, None).is_err());
    }

    #[test]
    fn combine_empty() {
        let p = PairedPValues::from_upper(&[0.5, 0.5]).unwrap();
        let d = combine_f(&p, 0.05, F1Method::P3, F2Method::Proc3).unwrap();
        assert!(d.rejected().is_empty());
        assert_eq!(d.family(), Family::F);
    }

    #[test]
    fn combine_merges_directions() {
        // theta_1 strongly positive, theta_2 strongly negative.
        let p = PairedPValues::from_upper(&[1e-6, 1.0 - 1e-6]).unwrap();
        let d = combine_f(&p, 0.05, F1Method::P3, F2Method::Proc3).unwrap();
        assert!(d.is_rejected(h("H_1_1")));
        assert!(d.is_rejected(h("H_2_3")));
        assert_eq!(d.directions(), &[Direction::Positive, Direction::Negative]);
    }

    #[test]
    fn combine_splits_budget() {
        // 0.02 passes the first constant at alpha = 0.05 (0.05 / 2.05) but
        // not at the halved budget (0.025 / 2.025).
        let p = PairedPValues::from_upper(&[0.02, 0.5]).unwrap();
        let full = proc3_stepdown(&p, 0.05).unwrap();
        assert!(full.is_rejected(h("H_1_1")));
        let combined = combine_f(&p, 0.05, F1Method::P3, F2Method::Proc3).unwrap();
        assert!(combined.rejected().is_empty());
        let half = proc3_stepdown(&p, 0.025).unwrap();
        assert_eq!(half.rejected(), combined.rejected());
    }
}
