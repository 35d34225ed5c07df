//! Mixed directional FDR procedures built on the BH constants `i alpha / n`.

use super::{check_layout, check_level, f1_decisions, f1_hypothesis, per_block};
use crate::error::Result;
use crate::hypothesis::{DecisionSet, Family, FamilyLayout, Hypothesis, NullKind};
use crate::pvalue::PairedPValues;
use crate::scalar::Real;
use crate::stepwise::{bh_constant, make_schedule, stepup, ScheduleKind};

fn proc6_indices<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<Vec<usize>> {
    let n = p.n();
    let base = make_schedule(ScheduleKind::Bh, n, alpha)?;
    // n * alpha / n can round one ulp above alpha; the fill must not drop
    // below it. The padded tail is never reached for alpha < 1/2.
    let fill = base.constants()[n - 1].max(alpha);
    let sched = base.padded(2 * n, fill)?;
    Ok(stepup(p.values(), &sched)?.rejected_indices)
}

/// Procedure 6: BH stepup over the `2n` paired p-values.
pub fn proc6_bh<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<DecisionSet> {
    check_level(alpha)?;
    f1_decisions(p.n(), &proc6_indices(p, alpha)?)
}

/// Procedure 7: Procedure 6 inside each block at level `n_i alpha / n`.
pub fn proc7_between_block_bh<S: Real>(p: &PairedPValues<S>, alpha: S, layout: &FamilyLayout) -> Result<DecisionSet> {
    check_level(alpha)?;
    check_layout(p.n(), layout)?;
    per_block(p, alpha, layout, |sub, level| {
        let idx = proc6_indices(sub, level)?;
        let rejected = idx.iter().map(|&i| f1_hypothesis(None, sub.n(), i)).collect();
        DecisionSet::new(Family::F1, sub.n(), rejected)
    })
}

/// Procedure 8. With `P~_i` the smallest p-value in block `i`,
/// `B = max{i <= b : P~_(i) <= i alpha / n}` and every hypothesis with
/// `p <= B alpha / n` is rejected (none when no index qualifies).
pub fn proc8_within_block_bh<S: Real>(p: &PairedPValues<S>, alpha: S, layout: &FamilyLayout) -> Result<DecisionSet> {
    check_level(alpha)?;
    let n = p.n();
    check_layout(n, layout)?;
    let mut minima: Vec<S> = layout
        .blocks()
        .iter()
        .map(|block| {
            block
                .iter()
                .map(|&j| {
                    let (a, b) = p.pair(j);
                    a.min(b)
                })
                .fold(S::infinity(), S::min)
        })
        .collect();
    minima.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let big_b = (1..=minima.len())
        .rev()
        .find(|&i| minima[i - 1] <= bh_constant(i, n, alpha))
        .unwrap_or(0);
    if big_b == 0 {
        return DecisionSet::new(Family::F1, n, Default::default());
    }
    let threshold = bh_constant(big_b, n, alpha);
    let indices: Vec<usize> = (0..2 * n).filter(|&i| p.values()[i] <= threshold).collect();
    f1_decisions(n, &indices)
}

/// Procedure 9: BH at the full level `alpha`, separately on the `H_i1`
/// p-values and on the `H_i2` p-values.
pub fn proc9_positive_dep_bh<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<DecisionSet> {
    check_level(alpha)?;
    let n = p.n();
    let sched = make_schedule(ScheduleKind::Bh, n, alpha)?;
    let k1 = stepup(p.upper(), &sched)?;
    let k2 = stepup(p.lower(), &sched)?;
    let rejected = k1
        .rejected_indices
        .iter()
        .map(|&i| Hypothesis::new(i, NullKind::NonPositive))
        .chain(k2.rejected_indices.iter().map(|&i| Hypothesis::new(i, NullKind::Positive)))
        .collect();
    DecisionSet::new(Family::F1, n, rejected)
}
