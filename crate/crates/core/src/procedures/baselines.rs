//! Reference procedures the directional procedures are compared against.

use super::{check_level, f1_decisions};
use crate::error::Result;
use crate::hypothesis::{DecisionSet, Family, Hypothesis, NullKind};
use crate::pvalue::PairedPValues;
use crate::scalar::Real;
use crate::stepwise::{make_schedule, stepdown, ScheduleKind};

/// Rejects every one of the `2n` p-values at most `alpha / n`.
pub fn bauer_bonferroni<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<DecisionSet> {
    check_level(alpha)?;
    let n = p.n();
    let c = alpha / S::from_count(n);
    let indices: Vec<usize> = (0..2 * n).filter(|&i| p.values()[i] <= c).collect();
    f1_decisions(n, &indices)
}

/// Holm on the two-sided p-values; each rejected parameter is assigned the
/// sign of its statistic, reported as `H_i1` (positive) or `H_i2` (negative).
pub fn directional_holm<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<DecisionSet> {
    check_level(alpha)?;
    let n = p.n();
    let two = p.two_sided();
    let out = stepdown(&two.values, &make_schedule(ScheduleKind::Holm, n, alpha)?)?;
    let rejected = out
        .rejected_indices
        .iter()
        .map(|&i| {
            let (hi, lo) = p.pair(i);
            let kind = if hi < lo { NullKind::NonPositive } else { NullKind::Positive };
            Hypothesis::new(i, kind)
        })
        .collect();
    DecisionSet::new(Family::F1, n, rejected)
}

/// Holm over all `2n` p-values, constants `alpha / (2n - i + 1)`.
pub fn conventional_holm_2n<S: Real>(p: &PairedPValues<S>, alpha: S) -> Result<DecisionSet> {
    check_level(alpha)?;
    let n = p.n();
    let out = stepdown(p.values(), &make_schedule(ScheduleKind::Holm, 2 * n, alpha)?)?;
    f1_decisions(n, &out.rejected_indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::Direction;

    #[test]
    fn bauer_example() {
        let p = PairedPValues::from_upper(&[0.02, 0.3]).unwrap();
        assert_eq!(bauer_bonferroni(&p, 0.05).unwrap().labels(), vec!["H_1_1"]);
    }

    #[test]
    fn directional_holm_example() {
        // Two-sided (0.004, 0.6) with the first statistic negative.
        let p = PairedPValues::from_upper(&[0.998, 0.3]).unwrap();
        let d = directional_holm(&p, 0.05).unwrap();
        assert_eq!(d.labels(), vec!["H_1_2"]);
        assert_eq!(d.directions(), &[Direction::Negative, Direction::None]);
        let q = PairedPValues::from_upper(&[0.002, 0.3]).unwrap();
        assert_eq!(directional_holm(&q, 0.05).unwrap().directions()[0], Direction::Positive);
    }

    #[test]
    fn holm_2n_constants() {
        // n = 2: constants 0.0125, 0.01667, ...; 0.014 fails the first.
        let p = PairedPValues::from_upper(&[0.014, 0.3]).unwrap();
        assert!(conventional_holm_2n(&p, 0.05).unwrap().rejected().is_empty());
        let p = PairedPValues::from_upper(&[0.012, 0.016]).unwrap();
        assert_eq!(conventional_holm_2n(&p, 0.05).unwrap().labels(), vec!["H_1_1", "H_2_1"]);
    }
}
