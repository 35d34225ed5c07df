//! Data-generating processes for the test statistics.
//!
//! Every normal generator draws the `n` idiosyncratic variates `Z_i` first,
//! in parameter order, and only then its shared factors, so at `rho = 0`
//! each one reproduces [`gen_independent`] bit for bit on the same stream.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypothesis::{FamilyLayout, ParameterVector};
use crate::pvalue::{NullDistribution, PairedPValues, StatisticVector};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Independent,
    Equicorrelated,
    BetweenBlock,
    WithinBlock,
    CauchyIndependent,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 5] = [
        GeneratorKind::Independent,
        GeneratorKind::Equicorrelated,
        GeneratorKind::BetweenBlock,
        GeneratorKind::WithinBlock,
        GeneratorKind::CauchyIndependent,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            GeneratorKind::Independent => "independent",
            GeneratorKind::Equicorrelated => "equicorrelated",
            GeneratorKind::BetweenBlock => "between_block",
            GeneratorKind::WithinBlock => "within_block",
            GeneratorKind::CauchyIndependent => "cauchy_independent",
        }
    }

    pub fn needs_layout(self) -> bool {
        matches!(self, GeneratorKind::BetweenBlock | GeneratorKind::WithinBlock)
    }

    pub fn uses_rho(self) -> bool {
        matches!(
            self,
            GeneratorKind::Equicorrelated | GeneratorKind::BetweenBlock | GeneratorKind::WithinBlock
        )
    }

    pub fn distribution(self) -> NullDistribution {
        match self {
            GeneratorKind::CauchyIndependent => NullDistribution::StandardCauchy,
            _ => NullDistribution::StandardNormal,
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GeneratorKind::ALL
            .into_iter()
            .find(|g| g.tag() == s)
            .ok_or_else(|| Error::UnknownTag {
                what: "generator",
                got: s.to_string(),
                valid: "independent, equicorrelated, between_block, within_block, cauchy_independent",
            })
    }
}

fn check_rho<S: Real>(rho: S) -> Result<()> {
    if rho >= S::zero() && rho < S::one() {
        Ok(())
    } else {
        Err(invalid(format!("rho = {rho} outside [0, 1)")))
    }
}

fn draw_z<S: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<S> {
    (0..n).map(|_| S::sample_standard_normal(rng)).collect()
}

fn normal_stats<S: Real>(t: Vec<S>) -> StatisticVector<S> {
    // Finite by construction.
    StatisticVector::new(t, NullDistribution::StandardNormal).expect("finite normal statistics")
}

/// `T_i = theta_i + Z_i`.
pub fn gen_independent<S: Real, R: Rng + ?Sized>(theta: &ParameterVector<S>, rng: &mut R) -> StatisticVector<S> {
    let z = draw_z::<S, R>(theta.len(), rng);
    normal_stats(theta.values().iter().zip(z).map(|(&th, zi)| th + zi).collect())
}

/// `T_i = theta_i + sqrt(rho) W + sqrt(1 - rho) Z_i`.
pub fn gen_equicorrelated<S: Real, R: Rng + ?Sized>(
    theta: &ParameterVector<S>,
    rho: S,
    rng: &mut R,
) -> Result<StatisticVector<S>> {
    check_rho(rho)?;
    let z = draw_z::<S, R>(theta.len(), rng);
    let w = S::sample_standard_normal(rng);
    let (a, b) = (rho.sqrt(), (S::one() - rho).sqrt());
    Ok(normal_stats(
        theta
            .values()
            .iter()
            .zip(z)
            .map(|(&th, zi)| th + a * w + b * zi)
            .collect(),
    ))
}

fn check_layout_dims(n: usize, layout: &FamilyLayout) -> Result<()> {
    if layout.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: layout.n(),
        });
    }
    Ok(())
}

/// Position `j` of every block shares the factor `W_j`; members of one
/// block are independent. Blocks must have equal sizes.
pub fn gen_between_block<S: Real, R: Rng + ?Sized>(
    theta: &ParameterVector<S>,
    rho: S,
    layout: &FamilyLayout,
    rng: &mut R,
) -> Result<StatisticVector<S>> {
    check_rho(rho)?;
    check_layout_dims(theta.len(), layout)?;
    let k = layout
        .common_block_size()
        .ok_or_else(|| invalid("between-block generator needs blocks of equal size"))?;
    let z = draw_z::<S, R>(theta.len(), rng);
    let w = draw_z::<S, R>(k, rng);
    let (a, b) = (rho.sqrt(), (S::one() - rho).sqrt());
    let mut t = vec![S::zero(); theta.len()];
    for block in layout.blocks() {
        for (j, &i) in block.iter().enumerate() {
            t[i] = theta.get(i) + a * w[j] + b * z[i];
        }
    }
    Ok(normal_stats(t))
}

/// Equicorrelated inside each block with its own factor `W_b`; blocks are
/// independent.
pub fn gen_within_block<S: Real, R: Rng + ?Sized>(
    theta: &ParameterVector<S>,
    rho: S,
    layout: &FamilyLayout,
    rng: &mut R,
) -> Result<StatisticVector<S>> {
    check_rho(rho)?;
    check_layout_dims(theta.len(), layout)?;
    let z = draw_z::<S, R>(theta.len(), rng);
    let w = draw_z::<S, R>(layout.num_blocks(), rng);
    let (a, b) = (rho.sqrt(), (S::one() - rho).sqrt());
    let mut t = vec![S::zero(); theta.len()];
    for (bi, block) in layout.blocks().iter().enumerate() {
        for &i in block {
            t[i] = theta.get(i) + a * w[bi] + b * z[i];
        }
    }
    Ok(normal_stats(t))
}

/// `T_i = theta_i + C_i` with `C_i = tan(pi (U - 1/2))` standard Cauchy.
pub fn gen_cauchy_independent<S: Real, R: Rng + ?Sized>(
    theta: &ParameterVector<S>,
    rng: &mut R,
) -> StatisticVector<S> {
    let t = theta
        .values()
        .iter()
        .map(|&th| th + (S::PI() * (S::sample_open_unit(rng) - S::half())).tan())
        .collect();
    // U lies in the open interval, so the tangent is finite.
    StatisticVector::new(t, NullDistribution::StandardCauchy).expect("finite Cauchy statistics")
}

/// Paired p-values whose `H_i1` members are i.i.d. uniform, i.e. the
/// probability-integral transform of any continuous null.
pub fn gen_null_pvalues<S: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PairedPValues<S>> {
    let u: Vec<S> = (0..n).map(|_| S::sample_open_unit(rng)).collect();
    PairedPValues::from_upper(&u)
}

/// A validated generator with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator<S> {
    pub kind: GeneratorKind,
    pub rho: S,
    pub layout: Option<FamilyLayout>,
}

impl<S: Real> Generator<S> {
    pub fn new(kind: GeneratorKind, rho: S, layout: Option<FamilyLayout>) -> Result<Self> {
        check_rho(rho)?;
        if !kind.uses_rho() && rho != S::zero() {
            return Err(invalid(format!("generator {kind} takes no rho")));
        }
        if kind.needs_layout() {
            let l = layout
                .as_ref()
                .ok_or_else(|| invalid(format!("generator {kind} requires a block layout")))?;
            if kind == GeneratorKind::BetweenBlock && l.common_block_size().is_none() {
                return Err(invalid("between-block generator needs blocks of equal size"));
            }
        }
        Ok(Self { kind, rho, layout })
    }

    pub fn generate<R: Rng + ?Sized>(&self, theta: &ParameterVector<S>, rng: &mut R) -> Result<StatisticVector<S>> {
        let layout = || {
            self.layout
                .as_ref()
                .ok_or_else(|| invalid(format!("generator {} requires a block layout", self.kind)))
        };
        match self.kind {
            GeneratorKind::Independent => Ok(gen_independent(theta, rng)),
            GeneratorKind::Equicorrelated => gen_equicorrelated(theta, self.rho, rng),
            GeneratorKind::BetweenBlock => gen_between_block(theta, self.rho, layout()?, rng),
            GeneratorKind::WithinBlock => gen_within_block(theta, self.rho, layout()?, rng),
            GeneratorKind::CauchyIndependent => Ok(gen_cauchy_independent(theta, rng)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn rho_zero_reduces_to_independent() {
        let theta = ParameterVector::new(vec![0.0, 1.0, -0.5, 2.0, 0.0, 0.3]).unwrap();
        let layout = FamilyLayout::contiguous(6, 3).unwrap();
        for seed in 0..20 {
            let base = gen_independent(&theta, &mut rng(seed));
            assert_eq!(gen_equicorrelated(&theta, 0.0, &mut rng(seed)).unwrap(), base);
            assert_eq!(gen_between_block(&theta, 0.0, &layout, &mut rng(seed)).unwrap(), base);
            assert_eq!(gen_within_block(&theta, 0.0, &layout, &mut rng(seed)).unwrap(), base);
        }
    }

    #[test]
    fn validation() {
        let theta = ParameterVector::<f64>::zeros(4).unwrap();
        assert!(gen_equicorrelated(&theta, 1.0, &mut rng(0)).is_err());
        assert!(gen_equicorrelated(&theta, -0.1, &mut rng(0)).is_err());
        let uneven = FamilyLayout::new(4, vec![vec![0], vec![1, 2, 3]]).unwrap();
        assert!(gen_between_block(&theta, 0.5, &uneven, &mut rng(0)).is_err());
        assert!(gen_within_block(&theta, 0.5, &uneven, &mut rng(0)).is_ok());
        assert!(Generator::new(GeneratorKind::Independent, 0.5, None).is_err());
        assert!(Generator::<f64>::new(GeneratorKind::WithinBlock, 0.5, None).is_err());
        assert!("bogus".parse::<GeneratorKind>().is_err());
        assert_eq!("between_block".parse::<GeneratorKind>().unwrap(), GeneratorKind::BetweenBlock);
    }

    #[test]
    fn cauchy_statistics_use_cauchy_null() {
        let theta = ParameterVector::<f64>::zeros(3).unwrap();
        let s = gen_cauchy_independent(&theta, &mut rng(1));
        assert_eq!(s.distribution(), NullDistribution::StandardCauchy);
    }

    #[test]
    fn null_pvalues_pair_exactly() {
        let p = gen_null_pvalues::<f64, _>(50, &mut rng(3)).unwrap();
        assert!(p.first_pairing_violation().is_none());
    }
}
