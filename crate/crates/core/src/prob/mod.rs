//! Probability that a uniform random string of length `n` over an alphabet of
//! size `|Σ|` contains a fixed subsequence of length `k`.
//!
//! Four evaluation routes are provided and checked against each other:
//!
//! * the tabular recurrence `p(k, n) = α·p(k−1, n−1) + β·p(k, n−1)` ([`build_table`]),
//! * the binomial closed form `1 − β^{n−k+1} Σ_{i<k} α^i C(n−k+i, i)` ([`p_closed`]),
//! * the running-product variant of the closed form ([`p_closed_form2`]),
//! * the weighted sum of Beta densities ([`p_beta_form`]).
//!
//! with `α = 1/|Σ|` and `β = 1 − α`.

mod closed;
mod table;
mod validate;

pub use closed::{ln_binomial, p_beta_form, p_closed, p_closed_exact, p_closed_form2, q_value};
pub use table::{build_table, build_table_with_budget, cached_table, KernelBudget, ProbTable};
pub use validate::{cross_validate, ConsistencyReport, PairDeviation, EXACT_GRID_CAP};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the probability kernel.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,
    #[error("table for n_max={n_max} needs {needed} bytes, budget is {budget}")]
    Capacity { n_max: usize, needed: usize, budget: usize },
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("{method:?} does not support {mode:?} evaluation")]
    UnsupportedMode { method: Method, mode: NumericMode },
    #[error("exact evaluation is capped at n_max={cap}, got {n_max}")]
    ExactGridTooLarge { n_max: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, KernelError>;

/// `α = 1/|Σ|`, `β = 1 − α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphabetParams {
    sigma_size: usize,
    alpha: f64,
    beta: f64,
}

impl AlphabetParams {
    pub fn new(sigma_size: usize) -> Result<Self> {
        if sigma_size == 0 {
            return Err(KernelError::EmptyAlphabet);
        }
        let alpha = 1.0 / sigma_size as f64;
        Ok(Self { sigma_size, alpha, beta: 1.0 - alpha })
    }

    pub fn sigma_size(&self) -> usize {
        self.sigma_size
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True for the single-letter alphabet, where `β = 0`.
    pub fn is_degenerate(&self) -> bool {
        self.sigma_size == 1
    }
}

/// Evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    TabularDp,
    ClosedForm,
    ClosedFormII,
    BetaForm,
}

/// Arithmetic used by an evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NumericMode {
    Linear,
    LogSpace,
    ExactRational,
}

impl NumericMode {
    /// Log-space for long strings or large alphabets, linear otherwise.
    pub fn default_for(sigma_size: usize, n: usize) -> Self {
        if n > 300 || sigma_size >= 20 {
            NumericMode::LogSpace
        } else {
            NumericMode::Linear
        }
    }
}

/// A route together with its arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvalMethod {
    pub method: Method,
    pub mode: NumericMode,
}

impl EvalMethod {
    pub fn new(method: Method, mode: NumericMode) -> Result<Self> {
        if mode == NumericMode::ExactRational
            && !matches!(method, Method::TabularDp | Method::ClosedForm)
        {
            return Err(KernelError::UnsupportedMode { method, mode });
        }
        Ok(Self { method, mode })
    }

    /// Evaluates `p(k, n)` by this route. Tabular routes build (or reuse) a
    /// cached table covering `n`.
    pub fn p(&self, k: usize, n: usize, params: AlphabetParams) -> Result<f64> {
        match self.method {
            Method::TabularDp => match self.mode {
                NumericMode::ExactRational => {
                    let exact = crate::oracle::ExactProbTable::build(params.sigma_size(), n)?;
                    Ok(exact.p_f64(k, n))
                }
                NumericMode::Linear => Ok(cached_table(params.sigma_size(), n)?.p(k, n)),
                NumericMode::LogSpace => Ok(cached_table(params.sigma_size(), n)?.ln_p(k, n).exp()),
            },
            Method::ClosedForm => p_closed(k, n, params, self.mode),
            Method::ClosedFormII => p_closed_form2(k, n, params, self.mode),
            Method::BetaForm => p_beta_form(k, n, params, self.mode),
        }
    }
}

/// `ln(e^a + e^b)` without overflow.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
