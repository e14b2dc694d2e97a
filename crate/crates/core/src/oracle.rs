//! Ground truth for tests: exact LCS by dynamic programming for two and
//! three strings, brute-force enumeration for tiny instances, and the
//! exact-rational probability recurrence.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::prob::{KernelError, EXACT_GRID_CAP};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("DP table of {needed} cells exceeds the budget of {cap}")]
    CellBudget { needed: u128, cap: u64 },
    #[error("enumeration of {needed} subsequences exceeds the budget of {cap}")]
    EnumBudget { needed: u128, cap: u64 },
    #[error("shortest string has {0} symbols; enumeration is limited to 20")]
    ShortestTooLong(usize),
    #[error("no strings given")]
    NoStrings,
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Caps checked before any allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_cells: u64,
    pub max_enum: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { max_cells: 50_000_000, max_enum: 1 << 20 }
    }
}

fn check_cells(needed: u128, budget: OracleBudget) -> Result<()> {
    if needed > budget.max_cells as u128 {
        return Err(OracleError::CellBudget { needed, cap: budget.max_cells });
    }
    Ok(())
}

/// Classical two-string LCS with one witness.
pub fn exact_lcs2(s1: &[u8], s2: &[u8], budget: OracleBudget) -> Result<(usize, Vec<u8>)> {
    let (n1, n2) = (s1.len(), s2.len());
    check_cells((n1 as u128 + 1) * (n2 as u128 + 1), budget)?;
    let w = n2 + 1;
    // dp[i][j] = LCS of s1[i..], s2[j..]
    let mut dp = vec![0u32; (n1 + 1) * w];
    for i in (0..n1).rev() {
        for j in (0..n2).rev() {
            dp[i * w + j] = if s1[i] == s2[j] {
                dp[(i + 1) * w + j + 1] + 1
            } else {
                dp[(i + 1) * w + j].max(dp[i * w + j + 1])
            };
        }
    }
    let mut witness = Vec::with_capacity(dp[0] as usize);
    let (mut i, mut j) = (0, 0);
    while i < n1 && j < n2 {
        if s1[i] == s2[j] {
            witness.push(s1[i]);
            i += 1;
            j += 1;
        } else if dp[(i + 1) * w + j] >= dp[i * w + j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok((dp[0] as usize, witness))
}

/// Three-string LCS length by 3-D dynamic programming.
pub fn exact_lcs3(s1: &[u8], s2: &[u8], s3: &[u8], budget: OracleBudget) -> Result<usize> {
    let (n1, n2, n3) = (s1.len(), s2.len(), s3.len());
    check_cells((n1 as u128 + 1) * (n2 as u128 + 1) * (n3 as u128 + 1), budget)?;
    // Two rolling planes over the first string.
    let plane = (n2 + 1) * (n3 + 1);
    let mut next = vec![0u32; plane];
    let mut cur = vec![0u32; plane];
    let at = |j: usize, l: usize| j * (n3 + 1) + l;
    for i in (0..n1).rev() {
        for j in (0..=n2).rev() {
            for l in (0..=n3).rev() {
                cur[at(j, l)] = if j == n2 || l == n3 {
                    0
                } else if s1[i] == s2[j] && s2[j] == s3[l] {
                    next[at(j + 1, l + 1)] + 1
                } else {
                    next[at(j, l)].max(cur[at(j + 1, l)]).max(cur[at(j, l + 1)])
                };
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(next[0] as usize)
}

/// Linear-scan subsequence test.
pub fn is_subsequence(needle: &[u8], haystack: &[u8]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|c| it.any(|h| h == c))
}

/// Longest common subsequence length by enumerating subsequences of the
/// shortest string, longest first.
pub fn exhaustive_lcs<S: AsRef<[u8]>>(strings: &[S], budget: OracleBudget) -> Result<usize> {
    let shortest = strings
        .iter()
        .map(AsRef::as_ref)
        .min_by_key(|s| s.len())
        .ok_or(OracleError::NoStrings)?;
    let len = shortest.len();
    if len > 20 {
        return Err(OracleError::ShortestTooLong(len));
    }
    let needed = 1u128 << len;
    if needed > budget.max_enum as u128 {
        return Err(OracleError::EnumBudget { needed, cap: budget.max_enum });
    }
    let mut candidate = Vec::with_capacity(len);
    for size in (1..=len).rev() {
        // Gosper's hack over masks with `size` bits set.
        let mut mask: u32 = (1u32 << size) - 1;
        while mask < (1u32 << len) {
            candidate.clear();
            candidate.extend((0..len).filter(|b| mask >> b & 1 == 1).map(|b| shortest[b]));
            if strings.iter().all(|s| is_subsequence(&candidate, s.as_ref())) {
                return Ok(size);
            }
            let lowest = mask & mask.wrapping_neg();
            let ripple = mask + lowest;
            mask = (((ripple ^ mask) >> 2) / lowest) | ripple;
        }
    }
    Ok(0)
}

/// `p(k, n)` for every `0 ≤ k ≤ n ≤ n_max` in exact arithmetic.
///
/// Stores the integers `P(k, n) = |Σ|^n p(k, n)`, which obey
/// `P(k, n) = P(k−1, n−1) + (|Σ|−1)·P(k, n−1)`.
#[derive(Debug, Clone)]
pub struct ExactProbTable {
    sigma_size: usize,
    n_max: usize,
    scaled: Vec<BigUint>,
    powers: Vec<BigUint>,
}

#[inline]
fn tri(k: usize, n: usize) -> usize {
    n * (n + 1) / 2 + k
}

impl ExactProbTable {
    pub fn build(sigma_size: usize, n_max: usize) -> std::result::Result<Self, KernelError> {
        if sigma_size == 0 {
            return Err(KernelError::EmptyAlphabet);
        }
        if n_max > EXACT_GRID_CAP {
            return Err(KernelError::ExactGridTooLarge { n_max, cap: EXACT_GRID_CAP });
        }
        let keep = BigUint::from(sigma_size - 1);
        let mut scaled = vec![BigUint::zero(); tri(n_max, n_max) + 1];
        for n in 0..=n_max {
            scaled[tri(0, n)] = num_traits::pow(BigUint::from(sigma_size), n);
            for k in 1..=n {
                let mut v = scaled[tri(k - 1, n - 1)].clone();
                if k < n {
                    v += &keep * &scaled[tri(k, n - 1)];
                }
                scaled[tri(k, n)] = v;
            }
        }
        let mut powers = Vec::with_capacity(n_max + 1);
        let mut acc = BigUint::one();
        for _ in 0..=n_max {
            powers.push(acc.clone());
            acc *= sigma_size;
        }
        Ok(Self { sigma_size, n_max, scaled, powers })
    }

    pub fn sigma_size(&self) -> usize {
        self.sigma_size
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn p_rational(&self, k: usize, n: usize) -> BigRational {
        assert!(n <= self.n_max);
        if k > n {
            return BigRational::zero();
        }
        BigRational::new(
            BigInt::from(self.scaled[tri(k, n)].clone()),
            BigInt::from(self.powers[n].clone()),
        )
    }

    /// Nearest `f64` to the exact value.
    pub fn p_f64(&self, k: usize, n: usize) -> f64 {
        self.p_rational(k, n).to_f64().unwrap_or(f64::NAN)
    }
}
