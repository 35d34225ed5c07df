//! Familywise error procedures: the two-stage procedures, the Holm-type
//! stepdown and its block version, and the Hochberg-type procedure over `F`.

use std::collections::BTreeSet;

use super::{check_layout, check_level, f1_decisions, f1_hypothesis, per_block};
use crate::error::Result;
use crate::hypothesis::{DecisionSet, Family, FamilyLayout, Hypothesis, NullKind};
use crate::pvalue::PairedPValues;
use crate::scalar::Real;
use crate::stepwise::{make_schedule, stepdown, stepup, ScheduleKind};

/// Bonferroni at `stage1` over all `2n` p-values, then, unless all `n`
/// pairs are resolved, a second pass over the rest at `stage2(r)`.
fn two_stage<S: Real>(p: &PairedPValues<S>, stage1: S, stage2: impl Fn(usize) -> S) -> Result<DecisionSet> {
    let n = p.n();
    let values = p.values();
    let mut rejected: Vec<bool> = values.iter().map(|&x| x <= stage1).collect();
    let r = rejected.iter().filter(|&&b| b).count();
    if r < n {
        let threshold = stage2(r);
        for (flag, &x) in rejected.iter_mut().zip(values) {
            if !*flag && x <= threshold {
                *flag = true;
            }
        }
    }
    let indices: Vec<usize> = (0..2 * n).filter(|&i| rejected[i]).collect();
    f1_decisions(n, &indices)
}

/// Procedure 1: stage 1 at `alpha / n`, stage 2 at `alpha / (n - r)`.
pub fn proc1_two_stage<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<DecisionSet> {
    check_level(alpha)?;
    let n = p.n();
    let nn = S::from_count(n);
    two_stage(p, alpha / nn, |r| alpha / S::from_count(n - r))
}

/// `alpha / (1 + alpha / n)`.
pub fn proc1_prime_level<S: Real>(n: usize, alpha: S) -> S {
    alpha / (S::one() + alpha / S::from_count(n))
}

/// Procedure 1 run at the rescaled level `alpha / (1 + alpha / n)`.
pub fn proc1_prime<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<DecisionSet> {
    check_level(alpha)?;
    proc1_two_stage(p, proc1_prime_level(p.n(), alpha))
}

/// Stage-2 threshold `beta / (n - r)` of Procedure 2.
pub fn proc2_stage2_threshold<S: Real>(n: usize, r: usize, alpha: S) -> S {
    proc1_prime_level(n, alpha) / S::from_count(n - r)
}

/// Procedure 2: stage 1 at `alpha / n`; only stage 2 is rescaled.
pub fn proc2_modified_two_stage<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<DecisionSet> {
    check_level(alpha)?;
    let n = p.n();
    two_stage(p, alpha / S::from_count(n), |r| proc2_stage2_threshold(n, r, alpha))
}

/// Indices (into the `2n` vector) rejected by the Procedure 3 stepdown.
fn proc3_indices<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<Vec<usize>> {
    let n = p.n();
    let base = make_schedule(ScheduleKind::Proc3, n, alpha)?;
    // Beyond position n the order statistics are >= 1/2, above every
    // constant, so repeating the last one is inert.
    let last = base.constants()[n - 1];
    let sched = base.padded(2 * n, last)?;
    Ok(stepdown(p.values(), &sched)?.rejected_indices)
}

/// Procedure 3: stepdown over the `2n` p-values with constants
/// `alpha / (n - i + 1 + alpha)`.
pub fn proc3_stepdown<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<DecisionSet> {
    check_level(alpha)?;
    f1_decisions(p.n(), &proc3_indices(p, alpha)?)
}

/// Procedure 4: Procedure 3 inside each block at level `n_i alpha / n`.
pub fn proc4_block<S: Real>(p: &PairedPValues<S>, alpha: S, layout: &FamilyLayout) -> Result<DecisionSet> {
    check_level(alpha)?;
    check_layout(p.n(), layout)?;
    per_block(p, alpha, layout, |sub, level| {
        let idx = proc3_indices(sub, level)?;
        let rejected = idx.iter().map(|&i| f1_hypothesis(None, sub.n(), i)).collect();
        DecisionSet::new(Family::F1, sub.n(), rejected)
    })
}

/// Procedure 5 over `F` split as `F'1 = {H_i1}` and `F'2 = {H_i2, H_i3}`:
/// Hochberg at `alpha / 2` on `F'1`, and the duplicated-constant stepup
/// `lambda / (n - floor((i + 1) / 2) + 1)` with `lambda = alpha / 2` on the
/// `2n` p-values of `F'2`.
pub fn proc5_hochberg_directional<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<DecisionSet> {
    check_level(alpha)?;
    let n = p.n();
    let lambda = alpha * S::half();
    let mut rejected = BTreeSet::new();

    let first = stepup(p.upper(), &make_schedule(ScheduleKind::Hochberg, n, lambda)?)?;
    rejected.extend(
        first
            .rejected_indices
            .iter()
            .map(|&i| Hypothesis::new(i, NullKind::NonPositive)),
    );

    let family = p.family_values(Family::F1PrimeF2Prime);
    let second = stepup(family.part2(), &make_schedule(ScheduleKind::Proc5, n, lambda)?)?;
    rejected.extend(second.rejected_indices.iter().map(|&k| {
        let kind = if k % 2 == 0 { NullKind::Positive } else { NullKind::Zero };
        Hypothesis::new(k / 2, kind)
    }));

    DecisionSet::new(Family::F1PrimeF2Prime, n, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::Direction;
    use crate::pvalue::{NullDistribution, StatisticVector};

    fn h(s: &str) -> Hypothesis {
        s.parse().unwrap()
    }

    fn labels(d: &DecisionSet) -> Vec<String> {
        d.labels()
    }

    fn upper(v: &[f64]) -> PairedPValues<f64> {
        PairedPValues::from_upper(v).unwrap()
    }

    #[test]
    fn proc1_examples() {
        let d = proc1_two_stage(&upper(&[0.00135, 0.3085]), 0.05).unwrap();
        assert_eq!(labels(&d), vec!["H_1_1"]);
        assert_eq!(d.directions(), &[Direction::Positive, Direction::None]);

        let none = proc1_two_stage(&upper(&[0.3, 0.6]), 0.05).unwrap();
        assert!(none.rejected().is_empty());

        let both = proc1_two_stage(&upper(&[0.01, 0.02]), 0.05).unwrap();
        assert_eq!(labels(&both), vec!["H_1_1", "H_2_1"]);
    }

    #[test]
    fn proc1_second_stage_uses_remaining_count() {
        // n = 3: 0.01 passes 0.05/3, then the threshold becomes 0.05/2.
        let p = PairedPValues::from_upper(&[0.01, 0.02, 0.4]).unwrap();
        let d = proc1_two_stage(&p, 0.05).unwrap();
        assert_eq!(labels(&d), vec!["H_1_1", "H_2_1"]);
    }

    #[test]
    fn proc1_prime_level_value() {
        let l = proc1_prime_level(10, 0.05f64);
        assert!((l - 0.0497512).abs() < 1e-7);
        assert!(l < 0.05);
    }

    #[test]
    fn proc2_thresholds() {
        assert!((proc2_stage2_threshold(2, 1, 0.05f64) - 0.0487805).abs() < 1e-7);
        for n in 2..50 {
            for r in 1..n {
                assert!(proc2_stage2_threshold(n, r, 0.05) > 0.05 / n as f64);
            }
            assert!(proc2_stage2_threshold(n, 0, 0.05) < 0.05 / n as f64);
        }
        // After one stage-1 rejection at n = 4, a p-value between
        // beta / 3 and alpha / 3 separates the two procedures.
        let x = 0.5 * (proc2_stage2_threshold(4, 1, 0.05) + 0.05 / 3.0);
        let p = upper(&[0.001, x, 0.5, 0.5]);
        let p1 = proc1_two_stage(&p, 0.05).unwrap();
        assert_eq!(labels(&p1), vec!["H_1_1", "H_2_1"]);
        let p2 = proc2_modified_two_stage(&p, 0.05).unwrap();
        assert_eq!(labels(&p2), vec!["H_1_1"]);
    }

    #[test]
    fn proc3_examples() {
        let p = upper(&[0.010, 0.015, 0.030, 0.20]);
        let d = proc3_stepdown(&p, 0.05).unwrap();
        assert_eq!(labels(&d), vec!["H_1_1", "H_2_1"]);
        let flat = upper(&[0.5; 4]);
        assert!(proc3_stepdown(&flat, 0.05).unwrap().rejected().is_empty());
    }

    #[test]
    fn proc4_block_constants() {
        let sched = make_schedule(ScheduleKind::Proc3, 2, 0.025f64).unwrap();
        assert!((sched.constants()[0] - 0.0123457).abs() < 1e-7);
        assert!((sched.constants()[1] - 0.0243902).abs() < 1e-7);
        let layout = FamilyLayout::contiguous(4, 2).unwrap();
        // Second block: 0.02 passes 0.0243902 only after 0.012 passes 0.0123457.
        let p = upper(&[0.3, 0.9, 0.012, 0.98]);
        let d = proc4_block(&p, 0.05, &layout).unwrap();
        assert_eq!(labels(&d), vec!["H_3_1", "H_4_2"]);
        assert!(proc4_block(&p, 0.05, &FamilyLayout::contiguous(2, 1).unwrap()).is_err());
    }

    #[test]
    fn proc4_single_block_is_proc3() {
        let p = upper(&[0.001, 0.9995, 0.02, 0.4, 0.7]);
        let layout = FamilyLayout::single(5).unwrap();
        assert_eq!(proc4_block(&p, 0.05, &layout).unwrap(), proc3_stepdown(&p, 0.05).unwrap());
    }

    #[test]
    fn proc5_examples() {
        let stats = StatisticVector::new(vec![2.5], NullDistribution::StandardNormal).unwrap();
        let d = proc5_hochberg_directional(&stats.paired(), 0.05).unwrap();
        assert_eq!(labels(&d), vec!["H_1_1"]);
        assert_eq!(d.directions(), &[Direction::Positive]);

        let zeros = StatisticVector::new(vec![0.0; 4], NullDistribution::StandardNormal).unwrap();
        assert!(proc5_hochberg_directional(&zeros.paired(), 0.05).unwrap().rejected().is_empty());

        let neg = StatisticVector::new(vec![-2.5, 0.3], NullDistribution::StandardNormal).unwrap();
        let d = proc5_hochberg_directional(&neg.paired(), 0.05).unwrap();
        assert!(d.is_rejected(h("H_1_2")) && d.is_rejected(h("H_1_3")));
        assert_eq!(d.rejected().len(), 2);
        assert_eq!(d.directions()[0], Direction::Negative);
    }
}
