//! Error function, standard normal CDF and quantile.
//!
//! `erfc` follows the FreeBSD `s_erf.c` rational approximations (as shipped
//! in Go's `math` package), evaluated in the generic scalar type. The
//! high/low split of `x` used for `exp(-x*x)` is done by truncating to 16
//! fractional bits instead of masking the low word, which keeps the routine
//! independent of the float layout.

#![allow(clippy::excessive_precision)]

use crate::scalar::Real;

const ERX: f64 = 8.45062911510467529297e-01;

const PP: [f64; 5] = [
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
];
const QQ: [f64; 5] = [
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
];
const PA: [f64; 7] = [
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
];
const QA: [f64; 6] = [
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
];
const RA: [f64; 8] = [
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e+01,
    -6.23753324503260060396e+01,
    -1.62396669462573470355e+02,
    -1.84605092906711035994e+02,
    -8.12874355063065934246e+01,
    -9.81432934416914548592e+00,
];
const SA: [f64; 8] = [
    1.96512716674392571292e+01,
    1.37657754143519042600e+02,
    4.34565877475229228821e+02,
    6.45387271733267880336e+02,
    4.29008140027567833386e+02,
    1.08635005541779435134e+02,
    6.57024977031928170135e+00,
    -6.04244152148580987438e-02,
];
const RB: [f64; 7] = [
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e+01,
    -1.60636384855821916062e+02,
    -6.37566443368389627722e+02,
    -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
];
const SB: [f64; 7] = [
    3.03380607434824582924e+01,
    3.25792512996573918826e+02,
    1.53672958608443695994e+03,
    3.19985821950859553908e+03,
    2.55305040643316442583e+03,
    4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
];

/// Horner evaluation of `c[0] + c[1] x + ...`.
#[inline]
fn poly<S: Real>(c: &[f64], x: S) -> S {
    c.iter().rev().fold(S::zero(), |acc, &ci| acc * x + S::lit(ci))
}

/// `1 + c[0] x + c[1] x^2 + ...`.
#[inline]
fn poly1<S: Real>(c: &[f64], x: S) -> S {
    S::one() + x * poly(c, x)
}

/// Complementary error function.
pub fn erfc<S: Real>(x: S) -> S {
    if x.is_nan() {
        return x;
    }
    let one = S::one();
    let two = S::two();
    let neg = x < S::zero();
    let ax = x.abs();

    if ax < S::lit(0.84375) {
        let temp = if ax < S::lit(1.3877787807814457e-17) {
            ax
        } else {
            let z = ax * ax;
            let y = poly(&PP, z) / poly1(&QQ, z);
            if ax < S::lit(0.25) {
                ax + ax * y
            } else {
                S::half() + (ax * y + (ax - S::half()))
            }
        };
        return if neg { one + temp } else { one - temp };
    }
    if ax < S::lit(1.25) {
        let s = ax - one;
        let pq = poly(&PA, s) / poly1(&QA, s);
        return if neg {
            one + S::lit(ERX) + pq
        } else {
            one - S::lit(ERX) - pq
        };
    }
    if ax < S::lit(28.0) {
        if neg && ax > S::lit(6.0) {
            return two;
        }
        let s = one / (ax * ax);
        let (r, q) = if ax < S::lit(1.0 / 0.35) {
            (poly(&RA, s), poly1(&SA, s))
        } else {
            (poly(&RB, s), poly1(&SB, s))
        };
        let scale = S::lit(65536.0);
        let hi = (ax * scale).floor() / scale;
        let e = (-hi * hi - S::lit(0.5625)).exp() * ((hi - ax) * (hi + ax) + r / q).exp();
        return if neg { two - e / ax } else { e / ax };
    }
    if neg {
        two
    } else {
        S::zero()
    }
}

/// Error function.
pub fn erf<S: Real>(x: S) -> S {
    S::one() - erfc(x)
}

/// Standard normal CDF `Phi(x) = erfc(-x / sqrt 2) / 2`. Accurate in both
/// tails in absolute terms, and in relative terms in the lower tail.
pub fn normal_cdf<S: Real>(x: S) -> S {
    S::half() * erfc(-x * S::FRAC_1_SQRT_2())
}

/// Standard normal density.
pub fn normal_pdf<S: Real>(x: S) -> S {
    (-S::half() * x * x).exp() / (S::two() * S::PI()).sqrt()
}

// Acklam's rational approximation, refined by one Halley step.
const ACK_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ACK_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ACK_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ACK_D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

/// Leading-coefficient-first Horner.
#[inline]
fn horner_desc<S: Real>(c: &[f64], x: S) -> S {
    c.iter().fold(S::zero(), |acc, &ci| acc * x + S::lit(ci))
}

/// Inverse of the standard normal CDF on `[0, 1]`.
pub fn normal_quantile<S: Real>(p: S) -> S {
    if p.is_nan() || p < S::zero() || p > S::one() {
        return S::nan();
    }
    if p == S::zero() {
        return S::neg_infinity();
    }
    if p == S::one() {
        return S::infinity();
    }
    if p > S::half() {
        // 1 - p is exact for p in [1/2, 1].
        return -normal_quantile(S::one() - p);
    }
    let x = if p < S::lit(0.02425) {
        let q = (-S::two() * p.ln()).sqrt();
        horner_desc(&ACK_C, q) / (horner_desc(&ACK_D, q) * q + S::one())
    } else {
        let q = p - S::half();
        let r = q * q;
        horner_desc(&ACK_A, r) * q / (horner_desc(&ACK_B, r) * r + S::one())
    };
    let e = normal_cdf(x) - p;
    let u = e / normal_pdf(x);
    x - u / (S::one() + x * u * S::half())
}
