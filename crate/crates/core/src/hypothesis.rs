//! Hypothesis families, parameter vectors, block layouts and decisions.
//!
//! Every parameter `theta_i` gives rise to three one-sided nulls:
//!
//! * `H_i1: theta_i <= 0`, rejected in favour of `theta_i > 0`;
//! * `H_i2: theta_i > 0`, rejected in favour of `theta_i < 0`;
//! * `H_i3: theta_i = 0`, rejected in favour of `theta_i < 0`.
//!
//! Families group these nulls. Parameter indices are 0-based in the API and
//! 1-based in labels (`H_1_1` is `H_11`).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Effect sizes `theta_1..theta_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector<S> {
    theta: Vec<S>,
}

impl<S: Real> ParameterVector<S> {
    pub fn new(theta: Vec<S>) -> Result<Self> {
        if theta.is_empty() {
            return Err(invalid("parameter vector must have at least one entry"));
        }
        if let Some(i) = theta.iter().position(|t| !t.is_finite()) {
            return Err(invalid(format!("theta[{i}] is not finite")));
        }
        Ok(Self { theta })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![S::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.theta
    }

    pub fn get(&self, i: usize) -> S {
        self.theta[i]
    }
}

/// Which of the three nulls attached to a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NullKind {
    /// `H_i1: theta_i <= 0`.
    NonPositive,
    /// `H_i2: theta_i > 0`.
    Positive,
    /// `H_i3: theta_i = 0`.
    Zero,
}

impl NullKind {
    /// Second subscript in the `H_ij` notation.
    pub fn subscript(self) -> usize {
        match self {
            NullKind::NonPositive => 1,
            NullKind::Positive => 2,
            NullKind::Zero => 3,
        }
    }

    /// Whether the null is true at the given parameter value. The boundary
    /// `theta = 0` belongs to `H_i1`.
    pub fn is_true_at<S: Real>(self, theta: S) -> bool {
        match self {
            NullKind::NonPositive => theta <= S::zero(),
            NullKind::Positive => theta > S::zero(),
            NullKind::Zero => theta == S::zero(),
        }
    }

    /// Directional claim implied by rejecting this null.
    pub fn claim(self) -> Direction {
        match self {
            NullKind::NonPositive => Direction::Positive,
            NullKind::Positive | NullKind::Zero => Direction::Negative,
        }
    }
}

/// One null hypothesis `H_ij`, identified by its parameter and kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hypothesis {
    pub param: usize,
    pub kind: NullKind,
}

impl Hypothesis {
    pub fn new(param: usize, kind: NullKind) -> Self {
        Self { param, kind }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H_{}_{}", self.param + 1, self.kind.subscript())
    }
}

impl FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid(format!("malformed hypothesis label `{s}`"));
        let rest = s.strip_prefix("H_").ok_or_else(bad)?;
        let (i, j) = rest.split_once('_').ok_or_else(bad)?;
        let i: usize = i.parse().map_err(|_| bad())?;
        let kind = match j {
            "1" => NullKind::NonPositive,
            "2" => NullKind::Positive,
            "3" => NullKind::Zero,
            _ => return Err(bad()),
        };
        if i == 0 {
            return Err(bad());
        }
        Ok(Hypothesis::new(i - 1, kind))
    }
}

impl Serialize for Hypothesis {
    fn serialize<Se: Serializer>(&self, serializer: Se) -> std::result::Result<Se::Ok, Se::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Hypothesis {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The hypothesis families a procedure can address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `{H_i1, H_i2}`: 2n one-sided nulls, exactly n of them true.
    F1,
    /// `{H_i3}`: n point nulls.
    F2,
    /// `F1 ∪ F2`, split as `F1` and `F2`.
    F,
    /// `F` re-split as `F'1 = {H_i1}` and `F'2 = {H_i2, H_i3}`.
    #[serde(rename = "F1_prime_F2_prime")]
    F1PrimeF2Prime,
}

impl Family {
    /// Number of hypotheses in the family for `n` parameters.
    pub fn size(self, n: usize) -> usize {
        match self {
            Family::F1 => 2 * n,
            Family::F2 => n,
            Family::F | Family::F1PrimeF2Prime => 3 * n,
        }
    }

    /// Fixed global ordering of the family's hypotheses.
    ///
    /// `F1`: `H_11..H_n1, H_12..H_n2`. `F2`: `H_13..H_n3`. `F`: the `F1`
    /// order followed by `F2`. `F'`: `H_11..H_n1` followed by the interleaved
    /// `H_12, H_13, H_22, H_23, ...`.
    pub fn hypotheses(self, n: usize) -> Vec<Hypothesis> {
        let of = |kind| (0..n).map(move |i| Hypothesis::new(i, kind));
        match self {
            Family::F1 => of(NullKind::NonPositive).chain(of(NullKind::Positive)).collect(),
            Family::F2 => of(NullKind::Zero).collect(),
            Family::F => of(NullKind::NonPositive)
                .chain(of(NullKind::Positive))
                .chain(of(NullKind::Zero))
                .collect(),
            Family::F1PrimeF2Prime => of(NullKind::NonPositive)
                .chain((0..n).flat_map(|i| {
                    [Hypothesis::new(i, NullKind::Positive), Hypothesis::new(i, NullKind::Zero)]
                }))
                .collect(),
        }
    }

    pub fn contains(self, h: &Hypothesis) -> bool {
        match self {
            Family::F1 => h.kind != NullKind::Zero,
            Family::F2 => h.kind == NullKind::Zero,
            Family::F | Family::F1PrimeF2Prime => true,
        }
    }

    /// Which subfamily (1 or 2) of the split a hypothesis belongs to.
    /// Unsplit families put everything in subfamily 1.
    pub fn part_of(self, h: &Hypothesis) -> u8 {
        match self {
            Family::F1 | Family::F2 => 1,
            Family::F => {
                if h.kind == NullKind::Zero {
                    2
                } else {
                    1
                }
            }
            Family::F1PrimeF2Prime => {
                if h.kind == NullKind::NonPositive {
                    1
                } else {
                    2
                }
            }
        }
    }

    pub fn is_split(self) -> bool {
        matches!(self, Family::F | Family::F1PrimeF2Prime)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::F1 => "F1",
            Family::F2 => "F2",
            Family::F => "F",
            Family::F1PrimeF2Prime => "F1_prime_F2_prime",
        }
    }

    /// Names of the two subfamilies of the split.
    pub fn part_names(self) -> (&'static str, &'static str) {
        match self {
            Family::F1PrimeF2Prime => ("F1prime", "F2prime"),
            _ => ("F1", "F2"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F1" => Ok(Family::F1),
            "F2" => Ok(Family::F2),
            "F" => Ok(Family::F),
            "F1_prime_F2_prime" => Ok(Family::F1PrimeF2Prime),
            _ => Err(Error::UnknownTag {
                what: "family",
                got: s.to_string(),
                valid: "F1, F2, F, F1_prime_F2_prime",
            }),
        }
    }
}

/// Set of true nulls of a family at a given `theta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrueNullIndex {
    pub family: Family,
    pub nulls: BTreeSet<Hypothesis>,
}

impl TrueNullIndex {
    pub fn contains(&self, h: &Hypothesis) -> bool {
        self.nulls.contains(h)
    }

    pub fn len(&self) -> usize {
        self.nulls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nulls.is_empty()
    }
}

pub fn true_null_set<S: Real>(theta: &ParameterVector<S>, family: Family) -> TrueNullIndex {
    let nulls = family
        .hypotheses(theta.len())
        .into_iter()
        .filter(|h| h.kind.is_true_at(theta.get(h.param)))
        .collect();
    TrueNullIndex { family, nulls }
}

/// First problem found in a candidate block partition. Indices are 0-based;
/// `Display` prints them 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutViolation {
    #[error("layout must have n >= 1")]
    EmptyLayout,
    #[error("block {0} is empty")]
    EmptyBlock(usize),
    #[error("index {} is outside 1..={n}", .index + 1)]
    OutOfRange { index: usize, n: usize },
    #[error("overlap at {}", .0 + 1)]
    Overlap(usize),
    #[error("{} uncovered", fmt_one_based(.0))]
    Uncovered(Vec<usize>),
}

fn fmt_one_based(idx: &[usize]) -> String {
    idx.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

/// Checks that `blocks` partitions `0..n`; returns the first violation.
pub fn validate_layout(n: usize, blocks: &[Vec<usize>]) -> std::result::Result<(), LayoutViolation> {
    if n == 0 {
        return Err(LayoutViolation::EmptyLayout);
    }
    let mut seen = vec![false; n];
    for (b, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(LayoutViolation::EmptyBlock(b));
        }
        for &i in block {
            if i >= n {
                return Err(LayoutViolation::OutOfRange { index: i, n });
            }
            if seen[i] {
                return Err(LayoutViolation::Overlap(i));
            }
            seen[i] = true;
        }
    }
    let missing: Vec<usize> = (0..n).filter(|&i| !seen[i]).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(LayoutViolation::Uncovered(missing))
    }
}

/// Partition of the parameters into `b` blocks given as explicit index lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyLayout {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl FamilyLayout {
    /// Builds a layout from 0-based index lists.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        validate_layout(n, &blocks)?;
        Ok(Self { n, blocks })
    }

    /// Builds a layout from 1-based index lists, as used in config files.
    pub fn from_one_based(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut zero_based = Vec::with_capacity(blocks.len());
        for block in blocks {
            let mut b = Vec::with_capacity(block.len());
            for &i in block {
                if i == 0 {
                    return Err(invalid("block indices are 1-based; found 0"));
                }
                b.push(i - 1);
            }
            zero_based.push(b);
        }
        Self::new(n, zero_based)
    }

    pub fn single(n: usize) -> Result<Self> {
        Self::new(n, vec![(0..n).collect()])
    }

    pub fn singletons(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|i| vec![i]).collect())
    }

    /// Consecutive blocks of `size` parameters; `size` must divide `n`.
    pub fn contiguous(n: usize, size: usize) -> Result<Self> {
        if size == 0 || !n.is_multiple_of(size) {
            return Err(invalid(format!("block size {size} does not divide n = {n}")));
        }
        Self::new(n, (0..n / size).map(|b| (b * size..(b + 1) * size).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block size if all blocks have the same size.
    pub fn common_block_size(&self) -> Option<usize> {
        let first = self.blocks[0].len();
        self.blocks.iter().all(|b| b.len() == first).then_some(first)
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.iter().map(|i| i + 1).collect()).collect()
    }
}

/// Directional claim about a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
    None,
}

/// Rejections of a procedure plus the induced per-parameter claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionSet {
    family: Family,
    rejected: BTreeSet<Hypothesis>,
    directions: Vec<Direction>,
}

impl DecisionSet {
    /// Derives the claims from the rejected set: `H_i1` gives a positive
    /// claim, `H_i2` or `H_i3` a negative one. Fails if some parameter would
    /// get both.
    pub fn new(family: Family, n: usize, rejected: BTreeSet<Hypothesis>) -> Result<Self> {
        let directions = directions_from_rejections(family, n, &rejected)?;
        Ok(Self {
            family,
            rejected,
            directions,
        })
    }

    pub fn empty(family: Family, n: usize) -> Self {
        Self {
            family,
            rejected: BTreeSet::new(),
            directions: vec![Direction::None; n],
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.directions.len()
    }

    pub fn rejected(&self) -> &BTreeSet<Hypothesis> {
        &self.rejected
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn is_rejected(&self, h: Hypothesis) -> bool {
        self.rejected.contains(&h)
    }

    /// Union of two decision sets over the same parameters.
    pub fn union(&self, other: &DecisionSet, family: Family) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: other.n(),
            });
        }
        let rejected = self.rejected.union(&other.rejected).copied().collect();
        Self::new(family, self.n(), rejected)
    }

    /// Labels of the rejected hypotheses, in family order.
    pub fn labels(&self) -> Vec<String> {
        self.family
            .hypotheses(self.n())
            .into_iter()
            .filter(|h| self.rejected.contains(h))
            .map(|h| h.to_string())
            .collect()
    }
}

/// The single place where rejections are mapped to directional claims.
pub fn directions_from_rejections(
    family: Family,
    n: usize,
    rejected: &BTreeSet<Hypothesis>,
) -> Result<Vec<Direction>> {
    let mut directions = vec![Direction::None; n];
    for h in rejected {
        if h.param >= n {
            return Err(invalid(format!("hypothesis {h} refers to a parameter beyond n = {n}")));
        }
        if !family.contains(h) {
            return Err(invalid(format!("hypothesis {h} is not in family {family}")));
        }
        let claim = h.kind.claim();
        let slot = &mut directions[h.param];
        match *slot {
            Direction::None => *slot = claim,
            existing if existing == claim => {}
            _ => return Err(Error::DirectionConflict { param: h.param }),
        }
    }
    Ok(directions)
}

#[derive(Serialize, Deserialize)]
struct DecisionSetRepr {
    family: Family,
    n: usize,
    rejected: Vec<Hypothesis>,
    directions: Vec<Direction>,
}

impl Serialize for DecisionSet {
    fn serialize<Se: Serializer>(&self, serializer: Se) -> std::result::Result<Se::Ok, Se::Error> {
        let rejected = self
            .family
            .hypotheses(self.n())
            .into_iter()
            .filter(|h| self.rejected.contains(h))
            .collect();
        DecisionSetRepr {
            family: self.family,
            n: self.n(),
            rejected,
            directions: self.directions.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DecisionSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DecisionSetRepr::deserialize(deserializer)?;
        let set = DecisionSet::new(repr.family, repr.n, repr.rejected.into_iter().collect())
            .map_err(D::Error::custom)?;
        if set.directions != repr.directions {
            return Err(D::Error::custom("directions do not match the rejected set"));
        }
        Ok(set)
    }
}
