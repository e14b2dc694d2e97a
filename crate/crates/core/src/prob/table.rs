use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::{log_add_exp, AlphabetParams, KernelError, Result};

/// Environment variable overriding the table memory budget, in bytes.
pub const BUDGET_ENV_VAR: &str = "MLCS_KERNEL_MAX_BYTES";

const DEFAULT_BUDGET_BYTES: usize = 1 << 30;

/// Memory cap for a single probability table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelBudget {
    pub max_bytes: usize,
}

impl Default for KernelBudget {
    fn default() -> Self {
        Self { max_bytes: DEFAULT_BUDGET_BYTES }
    }
}

impl KernelBudget {
    /// Reads [`BUDGET_ENV_VAR`]; falls back to 1 GiB when unset or unparsable.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(|max_bytes| Self { max_bytes })
            .unwrap_or_default()
    }
}

/// Dense lower-triangular table of `p(k, n)` for `0 ≤ k ≤ n ≤ n_max`.
///
/// Both the linear values and their natural logarithms are kept. The log
/// table is produced by running the recurrence in log space, so entries far
/// below `f64::MIN_POSITIVE` keep their ranking information.
#[derive(Debug, Clone)]
pub struct ProbTable {
    sigma_size: usize,
    n_max: usize,
    values: Vec<f64>,
    log_values: Vec<f64>,
}

#[inline]
fn tri_index(k: usize, n: usize) -> usize {
    n * (n + 1) / 2 + k
}

impl ProbTable {
    pub fn sigma_size(&self) -> usize {
        self.sigma_size
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `p(k, n)`; zero for `k > n`.
    ///
    /// Panics if `n > n_max`.
    #[inline]
    pub fn p(&self, k: usize, n: usize) -> f64 {
        assert!(n <= self.n_max, "n={n} outside table (n_max={})", self.n_max);
        if k > n {
            0.0
        } else {
            self.values[tri_index(k, n)]
        }
    }

    /// `ln p(k, n)`; negative infinity for `k > n`.
    #[inline]
    pub fn ln_p(&self, k: usize, n: usize) -> f64 {
        assert!(n <= self.n_max, "n={n} outside table (n_max={})", self.n_max);
        if k > n {
            f64::NEG_INFINITY
        } else {
            self.log_values[tri_index(k, n)]
        }
    }

    pub fn covers(&self, n: usize) -> bool {
        n <= self.n_max
    }
}

fn table_bytes(n_max: usize) -> Option<usize> {
    let cells = (n_max + 1).checked_mul(n_max + 2)? / 2;
    cells.checked_mul(2 * std::mem::size_of::<f64>())
}

/// Builds the full table with the budget from the environment.
pub fn build_table(sigma_size: usize, n_max: usize) -> Result<ProbTable> {
    build_table_with_budget(sigma_size, n_max, KernelBudget::from_env())
}

pub fn build_table_with_budget(
    sigma_size: usize,
    n_max: usize,
    budget: KernelBudget,
) -> Result<ProbTable> {
    let params = AlphabetParams::new(sigma_size)?;
    let needed = table_bytes(n_max).unwrap_or(usize::MAX);
    if needed > budget.max_bytes {
        return Err(KernelError::Capacity { n_max, needed, budget: budget.max_bytes });
    }
    let cells = needed / (2 * std::mem::size_of::<f64>());
    let (alpha, beta) = (params.alpha(), params.beta());
    let (ln_alpha, ln_beta) = (alpha.ln(), beta.ln());

    let mut values = vec![0.0; cells];
    let mut log_values = vec![f64::NEG_INFINITY; cells];
    for n in 0..=n_max {
        values[tri_index(0, n)] = 1.0;
        log_values[tri_index(0, n)] = 0.0;
        for k in 1..=n {
            // p(k, n−1) is zero when k = n.
            let (keep, ln_keep) = if k < n {
                (values[tri_index(k, n - 1)], log_values[tri_index(k, n - 1)])
            } else {
                (0.0, f64::NEG_INFINITY)
            };
            let take = values[tri_index(k - 1, n - 1)];
            let ln_take = log_values[tri_index(k - 1, n - 1)];
            values[tri_index(k, n)] = alpha * take + beta * keep;
            log_values[tri_index(k, n)] = log_add_exp(ln_alpha + ln_take, ln_beta + ln_keep);
        }
    }
    Ok(ProbTable { sigma_size, n_max, values, log_values })
}

type TableCache = RwLock<HashMap<(usize, usize), Arc<ProbTable>>>;

fn cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Process-wide table for `(sigma_size, n_max)`, built on first request.
///
/// A cached table with the same alphabet and a larger `n_max` is reused.
/// Builds run outside the lock, so distinct keys can be built in parallel.
pub fn cached_table(sigma_size: usize, n_max: usize) -> Result<Arc<ProbTable>> {
    {
        let guard = cache().read().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = guard.get(&(sigma_size, n_max)) {
            return Ok(Arc::clone(t));
        }
        if let Some(t) = guard
            .iter()
            .filter(|((s, m), _)| *s == sigma_size && *m >= n_max)
            .min_by_key(|((_, m), _)| *m)
            .map(|(_, t)| t)
        {
            return Ok(Arc::clone(t));
        }
    }
    let built = Arc::new(build_table(sigma_size, n_max)?);
    let mut guard = cache().write().unwrap_or_else(|e| e.into_inner());
    Ok(Arc::clone(guard.entry((sigma_size, n_max)).or_insert(built)))
}
