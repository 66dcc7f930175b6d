//! Decimations `d` with `d (2^l + 1) ≡ 2^i (mod 2^n - 1)` and their structural parameters.
//!
//! For such a `d`, the exponent `l` can always be replaced by `n - l` (shifting
//! `i`) so that `gcd(2^l + 1, 2^(2n) - 1) = 1`; that choice is called the
//! normalized `l`. With `k = gcd(l, n)`, `r = n / k`, `s = l / k` and
//! `t = n + l`, normalization makes `s` even, `r` odd and `gcd(r, s) = 1`.

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

/// Largest half-degree handled by the enumeration (m = 2n <= 26).
pub const MAX_HALF_DEGREE: u32 = 13;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecimationError {
    #[error("d = {d} is not coprime to 2^{n} - 1")]
    DNotCoprime { d: u64, n: u32 },
    #[error("d = {d} is outside 1..2^{n}-1")]
    DOutOfRange { d: u64, n: u32 },
    #[error("neither l = {l} nor n - l gives gcd(2^l + 1, 2^(2n) - 1) = 1 for n = {n}")]
    NoValidL { l: u32, n: u32 },
    #[error("n = {0} is outside 2..={MAX_HALF_DEGREE}")]
    NOutOfRange(u32),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

/// A decimation satisfying the congruence, with normalized `l` and derived parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecimationParams {
    pub n: u32,
    pub d: u32,
    pub l: u32,
    pub i: u32,
    /// gcd(l, n)
    pub k: u32,
    /// n / k
    pub r: u32,
    /// l / k
    pub s: u32,
    /// n + l
    pub t: u32,
    /// Smallest member of the cyclotomic coset of `d` modulo 2^n - 1.
    pub coset_leader: u32,
    /// Every `(l, i)` pair solving the congruence, normalized or not.
    pub solutions: Vec<(u32, u32)>,
}

impl DecimationParams {
    pub fn m(&self) -> u32 {
        2 * self.n
    }

    pub fn is_coset_leader(&self) -> bool {
        self.d == self.coset_leader
    }
}

fn modulus(n: u32) -> u64 {
    (1u64 << n) - 1
}

fn check_d(d: u64, n: u32) -> Result<u64, DecimationError> {
    if !(2..=MAX_HALF_DEGREE).contains(&n) {
        return Err(DecimationError::NOutOfRange(n));
    }
    let big_n = modulus(n);
    if d == 0 || d >= big_n {
        return Err(DecimationError::DOutOfRange { d, n });
    }
    if d.gcd(&big_n) != 1 {
        return Err(DecimationError::DNotCoprime { d, n });
    }
    Ok(big_n)
}

/// Every `(l, i)` with `0 < l < n`, `0 <= i < n` solving the congruence.
pub fn solve_congruence(d: u64, n: u32) -> Result<Vec<(u32, u32)>, DecimationError> {
    let big_n = check_d(d, n)?;
    let mut out = Vec::new();
    for l in 1..n {
        let lhs = d * ((1u64 << l) + 1) % big_n;
        if lhs.is_power_of_two() {
            let i = lhs.trailing_zeros();
            if i < n {
                out.push((l, i));
            }
        }
    }
    Ok(out)
}

/// The solution with the smallest normalized `l`, or `None` if the congruence has no solution.
pub fn find_l_i(d: u64, n: u32) -> Result<Option<(u32, u32)>, DecimationError> {
    Ok(solve_congruence(d, n)?
        .into_iter()
        .filter(|&(l, _)| normalize_l(l, n) == Ok(l))
        .min())
}

/// Picks whichever of `l`, `n - l` has `l / 2^e` even, where `2^e` exactly divides `n`.
pub fn normalize_l(l: u32, n: u32) -> Result<u32, DecimationError> {
    if l == 0 || l >= n {
        return Err(DecimationError::NoValidL { l, n });
    }
    let e = n.trailing_zeros();
    let normalized = |x: u32| x.is_multiple_of(1 << e) && (x >> e).is_multiple_of(2);
    if normalized(l) {
        Ok(l)
    } else if normalized(n - l) {
        Ok(n - l)
    } else {
        Err(DecimationError::NoValidL { l, n })
    }
}

/// The exponent `i'` that goes with `n - l` when `(l, i)` solves the congruence.
pub fn complementary_i(l: u32, i: u32, n: u32) -> u32 {
    (n - l + i) % n
}

/// The cyclotomic coset `{d 2^j mod 2^n - 1}`, ascending.
pub fn cyclotomic_coset(d: u64, n: u32) -> Vec<u64> {
    let big_n = modulus(n);
    let mut out: Vec<u64> = (0..n).map(|j| (d << j) % big_n).collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub fn coset_leader(d: u64, n: u32) -> u64 {
    cyclotomic_coset(d, n)[0]
}

/// Coset leaders of all `d` coprime to 2^n - 1, ascending.
pub fn coprime_coset_leaders(n: u32) -> Vec<u64> {
    let big_n = modulus(n);
    (1..big_n)
        .filter(|&d| d.gcd(&big_n) == 1 && coset_leader(d, n) == d)
        .collect()
}

fn violation(msg: String) -> DecimationError {
    DecimationError::InvariantViolation(msg)
}

/// Validates `(d, l, i)` and fills in `k, r, s, t`.
pub fn derive_params(d: u64, l: u32, i: u32, n: u32) -> Result<DecimationParams, DecimationError> {
    let big_n = check_d(d, n)?;
    if l == 0 || l >= n {
        return Err(violation(format!("l = {l} must satisfy 0 < l < n = {n}")));
    }
    if i >= n {
        return Err(violation(format!("i = {i} must satisfy 0 <= i < n = {n}")));
    }
    if d * ((1u64 << l) + 1) % big_n != (1u64 << i) % big_n {
        return Err(violation(format!(
            "{d} (2^{l} + 1) is not 2^{i} mod 2^{n} - 1"
        )));
    }
    let m = 2 * n;
    let big_m = (1u64 << m) - 1;
    let two_l_plus = (1u64 << l) + 1;
    if two_l_plus.gcd(&big_n) != 1 {
        return Err(violation(format!("gcd(2^{l} + 1, 2^{n} - 1) != 1")));
    }
    if two_l_plus.gcd(&big_m) != 1 {
        return Err(violation(format!(
            "l = {l} is not normalized: gcd(2^{l} + 1, 2^{m} - 1) != 1"
        )));
    }
    let k = l.gcd(&n);
    let (r, s) = (n / k, l / k);
    let t = n + l;
    if s % 2 != 0 || s == 0 || s >= r || r.gcd(&s) != 1 || r % 2 == 0 {
        return Err(violation(format!("bad (r, s) = ({r}, {s})")));
    }
    if t.gcd(&m) != k || t.gcd(&n) != k {
        return Err(violation(format!(
            "gcd(t, m) or gcd(t, n) differs from k = {k}"
        )));
    }
    Ok(DecimationParams {
        n,
        d: d as u32,
        l,
        i,
        k,
        r,
        s,
        t,
        coset_leader: coset_leader(d, n) as u32,
        solutions: solve_congruence(d, n)?,
    })
}

/// Params for `d` using its canonical (smallest normalized) `l`, or `None` if `d` is outside the family.
pub fn params_for(d: u64, n: u32) -> Result<Option<DecimationParams>, DecimationError> {
    match find_l_i(d, n)? {
        Some((l, i)) => derive_params(d, l, i, n).map(Some),
        None => Ok(None),
    }
}

/// Every `d` in `1..2^n-1` coprime to `2^n - 1` that solves the congruence, sorted by `d`.
pub fn enumerate_decimations(n: u32) -> Result<Vec<DecimationParams>, DecimationError> {
    if !(2..=MAX_HALF_DEGREE).contains(&n) {
        return Err(DecimationError::NOutOfRange(n));
    }
    let big_n = modulus(n);
    let mut out = Vec::new();
    for d in (1..big_n).filter(|d| d.gcd(&big_n) == 1) {
        if let Some(p) = params_for(d, n)? {
            out.push(p);
        }
    }
    Ok(out)
}
