//! Reference values: the exact FWER of the two-stage Procedure 1 under the
//! global null, its level bound, definitional stepwise executors, and a
//! numerical check of the conditional p-value condition.

use crate::error::{invalid, Error, Result};
use crate::pvalue::NullDistribution;
use crate::stepwise::{CriticalSchedule, StepwiseOutcome};

/// Neumaier's compensated sum.
fn neumaier(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `ln C(n, r)` for `r = 0..n`: exact integers for `n <= 30`, otherwise a
/// running sum of `ln((n - k) / (k + 1))`.
fn ln_binomials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    if n <= 30 {
        let mut c: u128 = 1;
        for k in 0..=n {
            out.push((c as f64).ln());
            c = c * (n - k) as u128 / (k + 1) as u128;
        }
    } else {
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        for k in 0..=n {
            out.push(acc + comp);
            let x = ((n - k) as f64).ln() - ((k + 1) as f64).ln();
            let t = acc + x;
            comp += if acc.abs() >= x.abs() { (acc - t) + x } else { (x - t) + acc };
            acc = t;
        }
    }
    out
}

/// Exact FWER over `F1` of Procedure 1 at `theta = 0`:
///
/// `sum_{r=0}^{n-1} C(n,r) (a/n)^r [(1 - a/n)^{n-r} - (1 - a/n - a/(n-r))^{n-r}]`.
///
/// The bracket is evaluated as `A^m (1 - (B/A)^m)` with `expm1`/`ln_1p`, and
/// terms are combined in log space and summed with compensation.
pub fn proc1_exact_fwer(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let nf = n as f64;
    // r = n - 1 has the smallest base 1 - a/n - a.
    if !(alpha > 0.0 && alpha < nf / (nf + 1.0)) {
        return Err(Error::InvalidLevel(alpha, "exact FWER needs 0 < alpha < n / (n + 1)"));
    }
    let a_over_n = alpha / nf;
    let big_a = 1.0 - a_over_n;
    let ln_a = (-a_over_n).ln_1p();
    let ln_c = ln_binomials(n);
    let terms = (0..n).map(|r| {
        let m = (n - r) as f64;
        let delta = alpha / m;
        let bracket = -(m * (-delta / big_a).ln_1p()).exp_m1();
        let ln_term = ln_c[r] + r as f64 * a_over_n.ln() + m * ln_a + bracket.ln();
        ln_term.exp()
    });
    Ok(neumaier(terms))
}

/// `alpha / (1 - alpha / n)`, the level Procedure 1 is guaranteed to attain.
pub fn proc1_fwer_bound(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf) {
        return Err(Error::InvalidLevel(alpha, "bound needs 0 < alpha < n"));
    }
    Ok(alpha / (1.0 - alpha / nf))
}

fn check_bruteforce_inputs(p: &[f64], sched: &CriticalSchedule<f64>) -> Result<()> {
    if p.len() != sched.len() {
        return Err(Error::DimensionMismatch {
            expected: sched.len(),
            got: p.len(),
        });
    }
    if let Some(i) = p.iter().position(|x| !(0.0..=1.0).contains(x)) {
        return Err(invalid(format!("p-value at index {i} outside [0, 1]")));
    }
    Ok(())
}

/// Rank of every index under the order "smaller p first, then smaller index",
/// by pairwise counting.
fn ranks(p: &[f64]) -> Vec<usize> {
    (0..p.len())
        .map(|j| {
            (0..p.len())
                .filter(|&k| p[k] < p[j] || (p[k] == p[j] && k < j))
                .count()
        })
        .collect()
}

fn order_statistics(p: &[f64], rank: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    for (j, &r) in rank.iter().enumerate() {
        out[r] = p[j];
    }
    out
}

fn outcome(rank: &[usize], count: usize) -> StepwiseOutcome {
    StepwiseOutcome {
        rejected_count: count,
        rejected_indices: (0..rank.len()).filter(|&j| rank[j] < count).collect(),
    }
}

/// `i* = max{i : p_(j) <= c_j for all j <= i}`, by exhaustive scan.
pub fn stepdown_bruteforce(p: &[f64], sched: &CriticalSchedule<f64>) -> Result<StepwiseOutcome> {
    check_bruteforce_inputs(p, sched)?;
    let rank = ranks(p);
    let sorted = order_statistics(p, &rank);
    let c = sched.constants();
    let mut best = 0;
    for i in 1..=p.len() {
        if (0..i).all(|j| sorted[j] <= c[j]) {
            best = i;
        }
    }
    Ok(outcome(&rank, best))
}

/// `i* = max{i : p_(i) <= c_i}`, by exhaustive scan.
pub fn stepup_bruteforce(p: &[f64], sched: &CriticalSchedule<f64>) -> Result<StepwiseOutcome> {
    check_bruteforce_inputs(p, sched)?;
    let rank = ranks(p);
    let sorted = order_statistics(p, &rank);
    let c = sched.constants();
    let mut best = 0;
    for i in 1..=p.len() {
        if sorted[i - 1] <= c[i - 1] {
            best = i;
        }
    }
    Ok(outcome(&rank, best))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A2Report {
    pub holds: bool,
    /// `Pr{P <= p | P <= p'}` under the shifted law.
    pub lhs: f64,
    /// `p / p'`.
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
}

/// Compares `Pr_theta{P <= p | P <= p'}` with `p / p'` for the p-value of a
/// true null at distance `|theta|` from the boundary, under the location
/// family `F0(x - theta)`. With `x = F0^{-1}(p)` the left side is
/// `F0(x - |theta|) / F0(x' - |theta|)`.
pub fn a2_condition_check(dist: NullDistribution, theta: f64, p: f64, p_prime: f64) -> Result<A2Report> {
    if !theta.is_finite() {
        return Err(invalid("theta must be finite"));
    }
    if !(p > 0.0 && p <= p_prime && p_prime <= 1.0) {
        return Err(invalid(format!("need 0 < p <= p' <= 1, got p = {p}, p' = {p_prime}")));
    }
    let shift = theta.abs();
    let x = dist.quantile(p)?;
    let x_prime = dist.quantile(p_prime)?;
    let num = dist.cdf_unchecked(x - shift);
    let den = dist.cdf_unchecked(x_prime - shift);
    let lhs = if den > 0.0 { num / den } else { 0.0 };
    let rhs = p / p_prime;
    let margin = rhs - lhs;
    Ok(A2Report {
        holds: margin >= -1e-12 * rhs,
        lhs,
        rhs,
        margin,
    })
}
