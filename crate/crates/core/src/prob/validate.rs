use serde::Serialize;

use super::closed::{p_beta_form_raw, p_closed_form2_raw, p_closed_raw};
use super::{build_table, AlphabetParams, KernelError, NumericMode, Result};
use crate::oracle::ExactProbTable;

/// Largest grid accepted for exact-rational tabulation.
pub const EXACT_GRID_CAP: usize = 500;

/// Largest deviation observed between two routes.
#[derive(Debug, Clone, Serialize)]
pub struct PairDeviation {
    pub first: &'static str,
    pub second: &'static str,
    pub max_abs: f64,
    /// `(k, n)` where the maximum occurred.
    pub at: (usize, usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub sigma_size: usize,
    pub n_max: usize,
    pub tolerance: f64,
    pub pairs: Vec<PairDeviation>,
    pub passed: bool,
}

impl ConsistencyReport {
    pub fn worst(&self) -> Option<&PairDeviation> {
        self.pairs.iter().max_by(|a, b| a.max_abs.total_cmp(&b.max_abs))
    }
}

/// Evaluates every route over `0 ≤ k ≤ n ≤ n_max` and records the largest
/// pairwise absolute deviation. Values are compared before clamping to `[0, 1]`.
///
/// Routes: exact-rational recurrence, linear recurrence, binomial closed form,
/// running-product form and Beta-density form, the last three in the default
/// numeric mode for the grid. The Beta form is skipped for `|Σ| = 1`.
pub fn cross_validate(sigma_size: usize, n_max: usize, tolerance: f64) -> Result<ConsistencyReport> {
    if n_max > EXACT_GRID_CAP {
        return Err(KernelError::ExactGridTooLarge { n_max, cap: EXACT_GRID_CAP });
    }
    let params = AlphabetParams::new(sigma_size)?;
    let mode = NumericMode::default_for(sigma_size, n_max);
    let exact = ExactProbTable::build(sigma_size, n_max)?;
    let linear = build_table(sigma_size, n_max)?;

    let mut names = vec!["tabular-exact", "tabular-linear", "closed", "closed2"];
    if !params.is_degenerate() {
        names.push("beta");
    }
    let mut pairs: Vec<PairDeviation> = Vec::new();
    for (i, &first) in names.iter().enumerate() {
        for &second in &names[i + 1..] {
            pairs.push(PairDeviation { first, second, max_abs: 0.0, at: (0, 0) });
        }
    }

    let mut row = vec![0.0; names.len()];
    for n in 0..=n_max {
        for k in 0..=n {
            row[0] = exact.p_f64(k, n);
            row[1] = linear.p(k, n);
            row[2] = p_closed_raw(k, n, params, mode)?;
            row[3] = p_closed_form2_raw(k, n, params, mode)?;
            if names.len() > 4 {
                row[4] = p_beta_form_raw(k, n, params, mode)?;
            }
            let mut idx = 0;
            for i in 0..names.len() {
                for j in i + 1..names.len() {
                    let d = (row[i] - row[j]).abs();
                    let pair = &mut pairs[idx];
                    // NaN must register as a failure.
                    if d > pair.max_abs || d.is_nan() {
                        pair.max_abs = if d.is_nan() { f64::INFINITY } else { d };
                        pair.at = (k, n);
                    }
                    idx += 1;
                }
            }
        }
    }
    let passed = pairs.iter().all(|p| p.max_abs <= tolerance);
    Ok(ConsistencyReport { sigma_size, n_max, tolerance, pairs, passed })
}
