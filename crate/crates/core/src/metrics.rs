//! Type 1 / type 3 error accounting and Monte Carlo estimation of the
//! mixed directional and family error rates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypothesis::{DecisionSet, Direction, Family, Hypothesis, NullKind, ParameterVector};
use crate::scalar::Real;

/// Error counts of a single replication.
///
/// The `*_check` fields use the original three-decision view (type 1 and
/// type 3 errors among the per-parameter claims). `v`, `r` and the split
/// counts use the family view: rejected true nulls and rejections of the
/// family the procedure addressed, with part 2 empty for unsplit families.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorTally {
    pub v_check: usize,
    pub s_check: usize,
    pub u_check: usize,
    pub r_check: usize,
    pub v: usize,
    pub r: usize,
    pub v1: usize,
    pub r1: usize,
    pub v2: usize,
    pub r2: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    num as f64 / den.max(1) as f64
}

impl ErrorTally {
    /// `V / max(R, 1) <= V1 / max(R1, 1) + V2 / max(R2, 1)` and
    /// `V >= 1` implies `V1 >= 1` or `V2 >= 1`.
    pub fn union_bound_holds(&self) -> bool {
        let fdp = ratio(self.v, self.r);
        let parts = ratio(self.v1, self.r1) + ratio(self.v2, self.r2);
        let implication = self.v == 0 || self.v1 > 0 || self.v2 > 0;
        fdp <= parts && implication
    }

    /// Count identities every tally satisfies.
    pub fn is_consistent(&self) -> bool {
        self.u_check == self.v_check + self.s_check
            && self.u_check <= self.r_check
            && self.v == self.v1 + self.v2
            && self.r == self.r1 + self.r2
            && self.v <= self.r
            && self.v <= self.u_check
    }
}

/// Classifies the decisions against the true parameter vector.
///
/// Besides the counts, checks per parameter that the original-view error
/// indicator `e_i` equals the number of rejected true nulls `f_i` plus the
/// gap term `g_i`, which is one exactly when a negative claim is made with
/// `theta_i = 0` and `H_i3` not rejected, or with `theta_i > 0` and `H_i2`
/// not rejected. Such claims are directional errors that no true null of
/// the family accounts for.
pub fn tally<S: Real>(decisions: &DecisionSet, theta: &ParameterVector<S>) -> Result<ErrorTally> {
    let n = decisions.n();
    if theta.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: theta.len(),
        });
    }
    let family = decisions.family();
    let mut t = ErrorTally::default();
    let mut f = vec![0usize; n];

    for h in decisions.rejected() {
        let truth = h.kind.is_true_at(theta.get(h.param));
        let part = family.part_of(h);
        t.r += 1;
        if part == 1 {
            t.r1 += 1;
        } else {
            t.r2 += 1;
        }
        if truth {
            t.v += 1;
            f[h.param] += 1;
            if part == 1 {
                t.v1 += 1;
            } else {
                t.v2 += 1;
            }
        }
    }

    let zero = S::zero();
    for (i, &d) in decisions.directions().iter().enumerate() {
        if d == Direction::None {
            continue;
        }
        t.r_check += 1;
        let th = theta.get(i);
        let type1 = th == zero;
        let type3 = (th > zero && d == Direction::Negative) || (th < zero && d == Direction::Positive);
        t.v_check += usize::from(type1);
        t.s_check += usize::from(type3);
        let e = usize::from(type1 || type3);
        let g = d == Direction::Negative
            && ((th == zero && !decisions.is_rejected(Hypothesis::new(i, NullKind::Zero)))
                || (th > zero && !decisions.is_rejected(Hypothesis::new(i, NullKind::Positive))));
        if e != f[i] + usize::from(g) {
            return Err(Error::Invariant(format!(
                "error accounting disagrees at parameter {}: e = {e}, f = {}, g = {}",
                i + 1,
                f[i],
                usize::from(g)
            )));
        }
    }
    t.u_check = t.v_check + t.s_check;
    Ok(t)
}

/// Which subfamily a family-level rate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scope {
    Whole,
    Part1,
    Part2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    /// `Pr(U >= 1)` over type 1 and type 3 errors.
    MdFwer,
    /// `E[U / max(R, 1)]`.
    MdFdr,
    Fwer(Scope),
    Fdr(Scope),
}

impl Metric {
    /// Every metric tracked by the simulation, in reporting order.
    pub const ALL: [Metric; 8] = [
        Metric::MdFwer,
        Metric::MdFdr,
        Metric::Fwer(Scope::Whole),
        Metric::Fwer(Scope::Part1),
        Metric::Fwer(Scope::Part2),
        Metric::Fdr(Scope::Whole),
        Metric::Fdr(Scope::Part1),
        Metric::Fdr(Scope::Part2),
    ];

    /// Metrics meaningful for rejections expressed in `family`: the split
    /// scopes only for split families.
    pub fn for_family(family: Family) -> Vec<Metric> {
        Self::ALL
            .into_iter()
            .filter(|m| family.is_split() || !matches!(m, Metric::Fwer(Scope::Part1 | Scope::Part2) | Metric::Fdr(Scope::Part1 | Scope::Part2)))
            .collect()
    }

    /// Per-replication value whose mean is the rate.
    pub fn value(self, t: &ErrorTally) -> f64 {
        match self {
            Metric::MdFwer => f64::from(u8::from(t.u_check > 0)),
            Metric::MdFdr => ratio(t.u_check, t.r_check),
            Metric::Fwer(Scope::Whole) => f64::from(u8::from(t.v > 0)),
            Metric::Fwer(Scope::Part1) => f64::from(u8::from(t.v1 > 0)),
            Metric::Fwer(Scope::Part2) => f64::from(u8::from(t.v2 > 0)),
            Metric::Fdr(Scope::Whole) => ratio(t.v, t.r),
            Metric::Fdr(Scope::Part1) => ratio(t.v1, t.r1),
            Metric::Fdr(Scope::Part2) => ratio(t.v2, t.r2),
        }
    }

    /// Tag such as `mdFWER`, `FWER_F1`, `FDR_F2prime`.
    pub fn label(self, family: Family) -> String {
        let (p1, p2) = family.part_names();
        let whole = match family {
            Family::F1PrimeF2Prime => "F",
            other => other.name(),
        };
        let scoped = |kind: &str, s: Scope| {
            let name = match s {
                Scope::Whole => whole,
                Scope::Part1 => p1,
                Scope::Part2 => p2,
            };
            format!("{kind}_{name}")
        };
        match self {
            Metric::MdFwer => "mdFWER".to_string(),
            Metric::MdFdr => "mdFDR".to_string(),
            Metric::Fwer(s) => scoped("FWER", s),
            Metric::Fdr(s) => scoped("FDR", s),
        }
    }
}

/// Single-pass mean and variance (Welford), mergeable across chunks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count = n;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance; zero for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// `s / sqrt(m)`.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateEstimate {
    pub metric: Metric,
    pub label: String,
    pub estimate: f64,
    pub se: f64,
    pub reps: u64,
}

impl ErrorRateEstimate {
    pub fn from_accumulator(metric: Metric, family: Family, acc: &Welford) -> Self {
        Self {
            metric,
            label: metric.label(family),
            estimate: acc.mean().clamp(0.0, 1.0),
            se: acc.std_error(),
            reps: acc.count(),
        }
    }
}

impl fmt::Display for ErrorRateEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} (se {}, m = {})", self.label, self.estimate, self.se, self.reps)
    }
}

/// Accumulates every metric of [`Metric::ALL`] over a replication stream.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TallyAccumulator {
    acc: [Welford; 8],
}

impl TallyAccumulator {
    pub fn push(&mut self, t: &ErrorTally) {
        for (a, m) in self.acc.iter_mut().zip(Metric::ALL) {
            a.push(m.value(t));
        }
    }

    pub fn merge(&mut self, other: &TallyAccumulator) {
        for (a, b) in self.acc.iter_mut().zip(&other.acc) {
            a.merge(b);
        }
    }

    pub fn reps(&self) -> u64 {
        self.acc[0].count()
    }

    pub fn get(&self, metric: Metric) -> &Welford {
        let idx = Metric::ALL.iter().position(|&m| m == metric).unwrap_or(0);
        &self.acc[idx]
    }

    pub fn estimate(&self, metric: Metric, family: Family) -> ErrorRateEstimate {
        ErrorRateEstimate::from_accumulator(metric, family, self.get(metric))
    }
}

/// Estimates `metric` from a finished sequence of tallies.
pub fn estimate(tallies: &[ErrorTally], metric: Metric, family: Family) -> Result<ErrorRateEstimate> {
    if tallies.is_empty() {
        return Err(invalid("cannot estimate from an empty tally sequence"));
    }
    let mut acc = Welford::default();
    for t in tallies {
        acc.push(metric.value(t));
    }
    Ok(ErrorRateEstimate::from_accumulator(metric, family, &acc))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnionBoundReport {
    pub pass: bool,
    /// `est_F1 + est_F2 - est_F`.
    pub slack: f64,
}

/// Checks `est_F <= est_F1 + est_F2` up to three combined standard errors.
pub fn union_bound_check(
    est_f1: &ErrorRateEstimate,
    est_f2: &ErrorRateEstimate,
    est_f: &ErrorRateEstimate,
) -> Result<UnionBoundReport> {
    if est_f1.reps != est_f.reps || est_f2.reps != est_f.reps {
        return Err(invalid(format!(
            "replication counts differ: {}, {}, {}",
            est_f1.reps, est_f2.reps, est_f.reps
        )));
    }
    let slack = est_f1.estimate + est_f2.estimate - est_f.estimate;
    let tol = 3.0 * (est_f1.se.powi(2) + est_f2.se.powi(2) + est_f.se.powi(2)).sqrt();
    Ok(UnionBoundReport {
        pass: slack >= -tol,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn h(s: &str) -> Hypothesis {
        s.parse().unwrap()
    }

    fn decisions(family: Family, n: usize, labels: &[&str]) -> DecisionSet {
        let set: BTreeSet<Hypothesis> = labels.iter().map(|s| h(s)).collect();
        DecisionSet::new(family, n, set).unwrap()
    }

    fn theta(v: &[f64]) -> ParameterVector<f64> {
        ParameterVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn tally_examples() {
        // Claims (negative, none, positive) at theta = (2, -1, 0).
        let d = decisions(Family::F1, 3, &["H_1_2", "H_3_1"]);
        let t = tally(&d, &theta(&[2.0, -1.0, 0.0])).unwrap();
        assert_eq!((t.v_check, t.s_check, t.u_check, t.r_check), (1, 1, 2, 2));
        assert_eq!((t.v, t.r), (2, 2));
        assert!(t.is_consistent());

        let none = tally(&DecisionSet::empty(Family::F1, 2), &theta(&[0.0, 1.0])).unwrap();
        assert_eq!(none, ErrorTally::default());

        let right = tally(&decisions(Family::F1, 2, &["H_1_1", "H_2_1"]), &theta(&[1.0, 1.0])).unwrap();
        assert_eq!((right.u_check, right.r_check, right.v), (0, 2, 0));
    }

    #[test]
    fn negative_claim_at_zero_is_a_gap() {
        // H_12 is false at theta = 0, so the type 1 error is not a family error.
        let d = decisions(Family::F1, 1, &["H_1_2"]);
        let t = tally(&d, &theta(&[0.0])).unwrap();
        assert_eq!((t.u_check, t.v), (1, 0));
        assert!(t.union_bound_holds());
        // In F the same claim made through H_13 is a rejected true null.
        let d = decisions(Family::F, 1, &["H_1_2", "H_1_3"]);
        let t = tally(&d, &theta(&[0.0])).unwrap();
        assert_eq!((t.u_check, t.v, t.v1, t.v2, t.r1, t.r2), (1, 1, 0, 1, 1, 1));
    }

    #[test]
    fn split_counts() {
        let d = decisions(Family::F1PrimeF2Prime, 2, &["H_1_1", "H_2_2", "H_2_3"]);
        let t = tally(&d, &theta(&[-1.0, 0.5])).unwrap();
        // H_11 true at -1; H_22 true at 0.5; H_23 false.
        assert_eq!((t.v1, t.r1, t.v2, t.r2), (1, 1, 1, 2));
        assert_eq!((t.s_check, t.v_check), (2, 0));
        assert!(t.is_consistent() && t.union_bound_holds());
    }

    #[test]
    fn tally_dimension_mismatch() {
        assert!(tally(&DecisionSet::empty(Family::F1, 2), &theta(&[0.0])).is_err());
    }

    #[test]
    fn estimate_examples() {
        let mk = |u: usize, r: usize| ErrorTally {
            v_check: u,
            u_check: u,
            r_check: r,
            ..Default::default()
        };
        let ts = [mk(0, 0), mk(2, 2), mk(0, 3), mk(1, 2)];
        let fwer = estimate(&ts, Metric::MdFwer, Family::F1).unwrap();
        assert_eq!(fwer.estimate, 0.5);
        assert_eq!(fwer.reps, 4);
        let fdr = estimate(&ts, Metric::MdFdr, Family::F1).unwrap();
        assert!((fdr.estimate - 0.375).abs() < 1e-15);
        let zero = estimate(&[ErrorTally::default(); 5], Metric::MdFwer, Family::F1).unwrap();
        assert_eq!((zero.estimate, zero.se), (0.0, 0.0));
        assert!(estimate(&[], Metric::MdFdr, Family::F1).is_err());
    }

    #[test]
    fn welford_matches_two_pass_and_merges() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let mut whole = Welford::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Welford::default();
        let mut b = Welford::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        for w in [whole, a] {
            assert!((w.mean() - mean).abs() < 1e-14);
            assert!((w.variance() - var).abs() < 1e-14);
        }
        let mut single = Welford::default();
        single.push(1.0);
        assert_eq!(single.std_error(), 0.0);
    }

    #[test]
    fn labels() {
        assert_eq!(Metric::Fwer(Scope::Whole).label(Family::F1), "FWER_F1");
        assert_eq!(Metric::Fwer(Scope::Part2).label(Family::F), "FWER_F2");
        assert_eq!(Metric::Fdr(Scope::Part1).label(Family::F1PrimeF2Prime), "FDR_F1prime");
        assert_eq!(Metric::Fwer(Scope::Whole).label(Family::F1PrimeF2Prime), "FWER_F");
        assert_eq!(Metric::for_family(Family::F1).len(), 4);
        assert_eq!(Metric::for_family(Family::F).len(), 8);
    }

    #[test]
    fn union_bound_examples() {
        let e = |x: f64| ErrorRateEstimate {
            metric: Metric::Fwer(Scope::Whole),
            label: String::new(),
            estimate: x,
            se: 0.0,
            reps: 100,
        };
        let r = union_bound_check(&e(0.03), &e(0.02), &e(0.045)).unwrap();
        assert!(r.pass);
        assert!((r.slack - 0.005).abs() < 1e-12);
        let z = union_bound_check(&e(0.0), &e(0.0), &e(0.0)).unwrap();
        assert!(z.pass && z.slack == 0.0);
        let mut other = e(0.0);
        other.reps = 99;
        assert!(union_bound_check(&e(0.0), &other, &e(0.0)).is_err());
    }
}
