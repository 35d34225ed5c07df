//! Null distributions and the conversion from statistics to p-values.
//!
//! For each statistic `t_i` two one-sided p-values are produced: `1 - F0(t_i)`
//! for `H_i1` (small when `t_i` is large) and `F0(t_i)` for `H_i2` and `H_i3`.
//! The smaller of the two is evaluated directly as the lower tail
//! `F0(-|t_i|)`; the other is `1 - smaller`, so every pair satisfies the
//! pairing identity bit-exactly and tail p-values keep full relative
//! precision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypothesis::Family;
use crate::scalar::Real;
use crate::special::{normal_cdf, normal_quantile};

/// Symmetric continuous null law `F0` of the test statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum NullDistribution {
    #[default]
    #[serde(rename = "normal")]
    StandardNormal,
    #[serde(rename = "cauchy")]
    StandardCauchy,
    /// Uniform on `(-1/2, 1/2)`.
    #[serde(rename = "uniform")]
    UniformSymmetric,
}

impl NullDistribution {
    pub fn tag(self) -> &'static str {
        match self {
            NullDistribution::StandardNormal => "normal",
            NullDistribution::StandardCauchy => "cauchy",
            NullDistribution::UniformSymmetric => "uniform",
        }
    }

    /// `F0(t)`.
    pub fn cdf<S: Real>(self, t: S) -> Result<S> {
        check_finite(t)?;
        Ok(self.cdf_unchecked(t))
    }

    pub(crate) fn cdf_unchecked<S: Real>(self, t: S) -> S {
        match self {
            NullDistribution::StandardNormal => normal_cdf(t),
            NullDistribution::StandardCauchy => {
                if t < S::zero() {
                    (-t.recip()).atan() / S::PI()
                } else if t == S::zero() {
                    S::half()
                } else {
                    S::one() - t.recip().atan() / S::PI()
                }
            }
            NullDistribution::UniformSymmetric => (t + S::half()).max(S::zero()).min(S::one()),
        }
    }

    /// `F0(-|t|)`, the smaller of `F0(t)` and `1 - F0(t)`.
    pub(crate) fn lower_tail<S: Real>(self, t: S) -> S {
        let a = -t.abs();
        match self {
            NullDistribution::StandardNormal => normal_cdf(a),
            NullDistribution::StandardCauchy => {
                if a == S::zero() {
                    S::half()
                } else {
                    (-a.recip()).atan() / S::PI()
                }
            }
            NullDistribution::UniformSymmetric => (a + S::half()).max(S::zero()),
        }
    }

    /// `F0^{-1}(p)`.
    pub fn quantile<S: Real>(self, p: S) -> Result<S> {
        if !(p >= S::zero() && p <= S::one()) {
            return Err(invalid(format!("quantile level {p} outside [0, 1]")));
        }
        Ok(match self {
            NullDistribution::StandardNormal => normal_quantile(p),
            NullDistribution::StandardCauchy => {
                if p == S::zero() {
                    S::neg_infinity()
                } else if p == S::one() {
                    S::infinity()
                } else if p == S::half() {
                    S::zero()
                } else if p < S::half() {
                    -(S::PI() * p).tan().recip()
                } else {
                    (S::PI() * (S::one() - p)).tan().recip()
                }
            }
            NullDistribution::UniformSymmetric => p - S::half(),
        })
    }
}

impl fmt::Display for NullDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for NullDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(NullDistribution::StandardNormal),
            "cauchy" => Ok(NullDistribution::StandardCauchy),
            "uniform" => Ok(NullDistribution::UniformSymmetric),
            _ => Err(Error::UnknownTag {
                what: "distribution",
                got: s.to_string(),
                valid: "normal, cauchy, uniform",
            }),
        }
    }
}

fn check_finite<S: Real>(t: S) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("statistic {t} is not finite")))
    }
}

pub fn null_cdf<S: Real>(dist: NullDistribution, t: S) -> Result<S> {
    dist.cdf(t)
}

/// `(p for H_i1, p for H_i2)` = `(1 - F0(t), F0(t))`; the two sum to one.
pub fn one_sided_pair<S: Real>(dist: NullDistribution, t: S) -> Result<(S, S)> {
    check_finite(t)?;
    Ok(pair_unchecked(dist, t))
}

#[inline]
fn pair_unchecked<S: Real>(dist: NullDistribution, t: S) -> (S, S) {
    let small = dist.lower_tail(t);
    let large = S::one() - small;
    if t >= S::zero() {
        (small, large)
    } else {
        (large, small)
    }
}

/// Two-sided p-value `2 min(F0(t), 1 - F0(t))`.
pub fn two_sided<S: Real>(dist: NullDistribution, t: S) -> Result<S> {
    check_finite(t)?;
    Ok(S::two() * dist.lower_tail(t))
}

/// Observed statistics `t_1..t_n` under a common null law.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticVector<S> {
    t: Vec<S>,
    dist: NullDistribution,
}

impl<S: Real> StatisticVector<S> {
    pub fn new(t: Vec<S>, dist: NullDistribution) -> Result<Self> {
        if t.is_empty() {
            return Err(invalid("statistic vector must be nonempty"));
        }
        for &x in &t {
            check_finite(x)?;
        }
        Ok(Self { t, dist })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.t
    }

    pub fn distribution(&self) -> NullDistribution {
        self.dist
    }

    pub fn paired(&self) -> PairedPValues<S> {
        PairedPValues::from_statistics(self)
    }

    pub fn two_sided(&self) -> TwoSidedPValues<S> {
        TwoSidedPValues {
            values: self.t.iter().map(|&t| S::two() * self.dist.lower_tail(t)).collect(),
        }
    }
}

/// `2n` one-sided p-values: `p[i]` for `H_i1`, `p[n + i]` for `H_i2`, with
/// `p[n + i] = 1 - p[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedPValues<S> {
    values: Vec<S>,
}

/// Whether `(a, b)` satisfies the pairing identity in floating point: the
/// larger equals `1 - smaller` exactly and the sum rounds to one.
pub fn pair_is_exact<S: Real>(a: S, b: S) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    hi == S::one() - lo && a + b == S::one()
}

impl<S: Real> PairedPValues<S> {
    pub fn from_statistics(stats: &StatisticVector<S>) -> Self {
        let n = stats.len();
        let mut values = vec![S::zero(); 2 * n];
        for (i, &t) in stats.t.iter().enumerate() {
            let (p1, p2) = pair_unchecked(stats.dist, t);
            values[i] = p1;
            values[n + i] = p2;
        }
        Self { values }
    }

    /// Builds the pairs from the `H_i1` p-values alone.
    pub fn from_upper(upper: &[S]) -> Result<Self> {
        if upper.is_empty() {
            return Err(invalid("need at least one p-value"));
        }
        let n = upper.len();
        let mut values = vec![S::zero(); 2 * n];
        for (i, &p) in upper.iter().enumerate() {
            if !(p >= S::zero() && p <= S::one()) {
                return Err(invalid(format!("p-value {p} outside [0, 1]")));
            }
            values[i] = p;
            values[n + i] = S::one() - p;
        }
        Ok(Self { values })
    }

    /// Accepts a full `2n` vector, checking the pairing identity.
    pub fn from_full(values: Vec<S>) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(invalid("paired p-values need an even, nonzero length"));
        }
        let n = values.len() / 2;
        for i in 0..n {
            if !(values[i] >= S::zero() && values[i] <= S::one()) {
                return Err(invalid(format!("p-value {} outside [0, 1]", values[i])));
            }
            if !pair_is_exact(values[i], values[n + i]) {
                return Err(invalid(format!("p[{}] and p[{}] do not sum to one", i, n + i)));
            }
        }
        Ok(Self { values })
    }

    /// Number of parameters `n`.
    pub fn n(&self) -> usize {
        self.values.len() / 2
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// p-values of `H_11..H_n1`.
    pub fn upper(&self) -> &[S] {
        &self.values[..self.n()]
    }

    /// p-values of `H_12..H_n2` (also those of `H_i3`).
    pub fn lower(&self) -> &[S] {
        &self.values[self.n()..]
    }

    pub fn pair(&self, i: usize) -> (S, S) {
        (self.values[i], self.values[self.n() + i])
    }

    /// Restriction to a subset of parameters, in the given order.
    pub fn select(&self, params: &[usize]) -> Self {
        let n = self.n();
        let mut values = Vec::with_capacity(2 * params.len());
        values.extend(params.iter().map(|&i| self.values[i]));
        values.extend(params.iter().map(|&i| self.values[n + i]));
        Self { values }
    }

    pub fn two_sided(&self) -> TwoSidedPValues<S> {
        let n = self.n();
        TwoSidedPValues {
            values: (0..n)
                .map(|i| S::two() * self.values[i].min(self.values[n + i]))
                .collect(),
        }
    }

    /// Index of the first pair violating the pairing identity, if any.
    pub fn first_pairing_violation(&self) -> Option<usize> {
        let n = self.n();
        (0..n).find(|&i| !pair_is_exact(self.values[i], self.values[n + i]))
    }

    /// The p-value vector a family is tested on, in `Family::hypotheses` order.
    pub fn family_values(&self, family: Family) -> FamilyPValues<S> {
        let n = self.n();
        let values = match family {
            Family::F1 => self.values.clone(),
            Family::F2 => self.lower().to_vec(),
            Family::F => {
                let mut v = self.values.clone();
                v.extend_from_slice(self.lower());
                v
            }
            Family::F1PrimeF2Prime => {
                let mut v = self.upper().to_vec();
                for &p in self.lower() {
                    v.push(p);
                    v.push(p);
                }
                v
            }
        };
        FamilyPValues { family, n, values }
    }
}

/// p-values of an entire family, with the family tag they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPValues<S> {
    pub family: Family,
    pub n: usize,
    pub values: Vec<S>,
}

impl<S: Real> FamilyPValues<S> {
    /// Values of the first subfamily (`F1`, or `F'1` for the primed split).
    pub fn part1(&self) -> &[S] {
        match self.family {
            Family::F => &self.values[..2 * self.n],
            Family::F1PrimeF2Prime => &self.values[..self.n],
            _ => &self.values,
        }
    }

    /// Values of the second subfamily; empty for unsplit families.
    pub fn part2(&self) -> &[S] {
        match self.family {
            Family::F => &self.values[2 * self.n..],
            Family::F1PrimeF2Prime => &self.values[self.n..],
            _ => &[],
        }
    }
}

pub fn family_pvalues<S: Real>(stats: &StatisticVector<S>, family: Family) -> FamilyPValues<S> {
    stats.paired().family_values(family)
}

/// Two-sided p-values `2 min(p[i], p[n + i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedPValues<S> {
    pub values: Vec<S>,
}
