use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{log_add_exp, AlphabetParams, KernelError, Method, NumericMode, Result};

/// `C(a, b)` when it fits in 128 bits. Always the case for `a ≤ 60`.
fn exact_binomial(a: usize, b: usize) -> Option<u128> {
    let b = b.min(a - b);
    let mut c: u128 = 1;
    for j in 0..b {
        // c·(a−j) is C(a, j+1)·(j+1), so the division is exact.
        c = c.checked_mul((a - j) as u128)? / (j + 1) as u128;
    }
    Some(c)
}

/// `ln C(a, b)`: exact integers while `C(a, b)` fits in 128 bits,
/// log-gamma beyond.
pub fn ln_binomial(a: usize, b: usize) -> f64 {
    if b > a {
        return f64::NEG_INFINITY;
    }
    if let Some(c) = exact_binomial(a, b) {
        return (c as f64).ln();
    }
    let lg = |x: usize| libm::lgamma(x as f64 + 1.0);
    lg(a) - lg(b) - lg(a - b)
}

/// `i·ln α + ln C(m+i, i)` for `i = 0..k`.
fn log_terms(k: usize, m: usize, ln_alpha: f64) -> impl Iterator<Item = f64> {
    (0..k).map(move |i| i as f64 * ln_alpha + ln_binomial(m + i, i))
}

/// Single-pass log-sum-exp with a running maximum.
fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let mut hi = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for t in terms {
        if t == f64::NEG_INFINITY {
            continue;
        }
        if t <= hi {
            acc += (t - hi).exp();
        } else {
            acc = acc * (hi - t).exp() + 1.0;
            hi = t;
        }
    }
    if hi == f64::NEG_INFINITY {
        hi
    } else {
        hi + acc.ln()
    }
}

fn clamp_unit(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// Shared base cases: `Some(p)` when no summation is needed.
fn trivial(k: usize, n: usize, params: AlphabetParams) -> Option<f64> {
    if k == 0 {
        Some(1.0)
    } else if k > n {
        Some(0.0)
    } else if params.is_degenerate() {
        Some(1.0)
    } else {
        None
    }
}

/// Binomial closed form `p(k,n) = 1 − β^{n−k+1} Σ_{i=0}^{k−1} α^i C(n−k+i, i)`.
///
/// A single-letter alphabet yields 1 for every `k ≤ n`.
pub fn p_closed(k: usize, n: usize, params: AlphabetParams, mode: NumericMode) -> Result<f64> {
    p_closed_raw(k, n, params, mode).map(clamp_unit)
}

pub(crate) fn p_closed_raw(
    k: usize,
    n: usize,
    params: AlphabetParams,
    mode: NumericMode,
) -> Result<f64> {
    if let Some(p) = trivial(k, n, params) {
        return Ok(p);
    }
    let m = n - k;
    let (alpha, beta) = (params.alpha(), params.beta());
    Ok(match mode {
        NumericMode::Linear => {
            let sum: f64 = (0..k)
                .map(|i| match exact_binomial(m + i, i) {
                    Some(c) => alpha.powi(i as i32) * c as f64,
                    None => (i as f64 * alpha.ln() + ln_binomial(m + i, i)).exp(),
                })
                .sum();
            1.0 - beta.powi((m + 1) as i32) * sum
        }
        NumericMode::LogSpace => {
            let ln_sum = log_sum_exp(log_terms(k, m, alpha.ln()));
            -((m + 1) as f64 * beta.ln() + ln_sum).exp_m1()
        }
        NumericMode::ExactRational => p_closed_exact(k, n, params.sigma_size())
            .to_f64()
            .unwrap_or(f64::NAN),
    })
}

/// Closed form evaluated in exact rationals.
///
/// Uses `|Σ|^n p(k,n) = |Σ|^n − (|Σ|−1)^{n−k+1} Σ_{i<k} C(n−k+i, i) |Σ|^{k−1−i}`,
/// which is an integer identity, so the result is exact.
pub fn p_closed_exact(k: usize, n: usize, sigma_size: usize) -> BigRational {
    if k == 0 || (sigma_size == 1 && k <= n) {
        return BigRational::one();
    }
    if k > n {
        return BigRational::zero();
    }
    let m = n - k;
    let sigma = BigUint::from(sigma_size);
    // Horner: Σ_{i<k} C(m+i, i) σ^{k−1−i}
    let mut binom = BigUint::one();
    let mut acc = BigUint::zero();
    for i in 0..k {
        if i > 0 {
            binom = binom * BigUint::from(m + i) / BigUint::from(i);
        }
        acc = acc * &sigma + &binom;
    }
    let tail = num_traits::pow(BigUint::from(sigma_size - 1), m + 1) * acc;
    let denom = num_traits::pow(sigma, n);
    let numer = BigInt::from(denom.clone()) - BigInt::from(tail);
    BigRational::new(numer, BigInt::from(denom))
}

/// Running-product form `1 − β^{n−k+1} − β^{n−k+1} Σ_{i=1}^{k−1} Π_{j=1}^{i} α(n−k+j)/j`.
///
/// Each product reuses the previous one. Exact arithmetic is not offered.
pub fn p_closed_form2(k: usize, n: usize, params: AlphabetParams, mode: NumericMode) -> Result<f64> {
    p_closed_form2_raw(k, n, params, mode).map(clamp_unit)
}

pub(crate) fn p_closed_form2_raw(
    k: usize,
    n: usize,
    params: AlphabetParams,
    mode: NumericMode,
) -> Result<f64> {
    if mode == NumericMode::ExactRational {
        return Err(KernelError::UnsupportedMode { method: Method::ClosedFormII, mode });
    }
    if let Some(p) = trivial(k, n, params) {
        return Ok(p);
    }
    let m = n - k;
    let (alpha, beta) = (params.alpha(), params.beta());
    Ok(match mode {
        NumericMode::Linear => {
            let lead = beta.powi((m + 1) as i32);
            let mut product = 1.0;
            let mut sum = 0.0;
            for i in 1..k {
                product *= alpha * (m + i) as f64 / i as f64;
                sum += product;
            }
            1.0 - lead - lead * sum
        }
        _ => {
            let ln_lead = (m + 1) as f64 * beta.ln();
            let ln_alpha = alpha.ln();
            let mut ln_product = 0.0;
            let mut ln_sum = f64::NEG_INFINITY;
            for i in 1..k {
                ln_product += ln_alpha + ((m + i) as f64 / i as f64).ln();
                ln_sum = log_add_exp(ln_sum, ln_product);
            }
            -log_add_exp(ln_lead, ln_lead + ln_sum).exp_m1()
        }
    })
}

/// `ln` of the Beta(a, b) density at `x`, given `x` and `1 − x` separately.
fn ln_beta_density(x: f64, one_minus_x: f64, a: f64, b: f64) -> f64 {
    let ln_beta_fn = libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b);
    (a - 1.0) * x.ln() + (b - 1.0) * one_minus_x.ln() - ln_beta_fn
}

/// Beta-density form
/// `p(k,n) = 1 − β^{n−k+1} − αβ Σ_{i=1}^{k−1} (1/i)·BetaDensity(β; n−k+1, i)`.
///
/// Undefined for the single-letter alphabet (`β = 0`).
pub fn p_beta_form(k: usize, n: usize, params: AlphabetParams, mode: NumericMode) -> Result<f64> {
    p_beta_form_raw(k, n, params, mode).map(clamp_unit)
}

pub(crate) fn p_beta_form_raw(
    k: usize,
    n: usize,
    params: AlphabetParams,
    mode: NumericMode,
) -> Result<f64> {
    if mode == NumericMode::ExactRational {
        return Err(KernelError::UnsupportedMode { method: Method::BetaForm, mode });
    }
    let (alpha, beta) = (params.alpha(), params.beta());
    if beta == 0.0 || beta == 1.0 {
        return Err(KernelError::Domain("Beta density form needs 0 < β < 1"));
    }
    if let Some(p) = trivial(k, n, params) {
        return Ok(p);
    }
    let m = n - k;
    let a = (m + 1) as f64;
    let weighted = (1..k).map(|i| -(i as f64).ln() + ln_beta_density(beta, alpha, a, i as f64));
    Ok(match mode {
        NumericMode::Linear => {
            let sum: f64 = weighted.map(f64::exp).sum();
            1.0 - beta.powi((m + 1) as i32) - alpha * beta * sum
        }
        _ => {
            let ln_sum = log_sum_exp(weighted);
            let tail = log_add_exp(a * beta.ln(), alpha.ln() + beta.ln() + ln_sum);
            -tail.exp_m1()
        }
    })
}

/// `q(k,n) = (1 − p(k,n)) / β^{n−k+1} = Σ_{i=0}^{k−1} α^i C(n−k+i, i)`.
///
/// In [`NumericMode::LogSpace`] the natural log of `q` is returned.
pub fn q_value(k: usize, n: usize, params: AlphabetParams, mode: NumericMode) -> Result<f64> {
    if params.is_degenerate() {
        return Err(KernelError::Domain("q(k, n) needs |Σ| ≥ 2"));
    }
    if k > n {
        return Err(KernelError::Domain("q(k, n) needs k ≤ n"));
    }
    let m = n - k;
    let alpha = params.alpha();
    Ok(match mode {
        NumericMode::LogSpace => log_sum_exp(log_terms(k, m, alpha.ln())),
        NumericMode::Linear => {
            // Terms α^i C(m+i, i) by running product; the ratio α(m+i)/i is
            // decreasing, so the terms rise then fall and never underflow early.
            let mut term = 1.0;
            let mut sum = 0.0;
            for i in 0..k {
                if i > 0 {
                    term *= alpha * (m + i) as f64 / i as f64;
                }
                sum += term;
            }
            sum
        }
        NumericMode::ExactRational => {
            let sigma = BigInt::from(params.sigma_size());
            let mut binom = BigInt::one();
            let mut sum = BigRational::zero();
            for i in 0..k {
                if i > 0 {
                    binom = binom * BigInt::from(m + i) / BigInt::from(i);
                }
                sum += BigRational::new(binom.clone(), num_traits::pow(sigma.clone(), i));
            }
            sum.to_f64().unwrap_or(f64::NAN)
        }
    })
}
