//! Closed-form distribution of `C_d`, moment identities, the `ν` count and the decimation search.

use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::decimation::{
    coprime_coset_leaders, find_l_i, solve_congruence, DecimationError, DecimationParams,
};
use crate::gf2m::{Field, FieldError};
use crate::quadform::{rank_counts, rank_tally, FormParams, QuadFormError, RankCensus};
use crate::sequences::{CorrelationSpectrum, Correlator, SequenceError, ValueCount};

/// Searches run up to this `m` unless explicitly extended.
pub const DEFAULT_SEARCH_BOUND: u32 = 16;
/// Hard ceiling for [`search_decimations`].
pub const MAX_SEARCH_BOUND: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Decimation(#[from] DecimationError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    QuadForm(#[from] QuadFormError),
    #[error("need k >= 1, k | n and n / k odd; got n = {n}, k = {k}")]
    BadParameters { n: u32, k: u32 },
    #[error("spectrum covers {found} shifts, expected {expected}")]
    IncompleteSpectrum { found: u64, expected: u64 },
    #[error("m = {m}, d = {d}: empirical distribution differs from the prediction")]
    PredictionMismatch { m: u32, d: u32 },
    #[error("m = {m} exceeds the search bound {bound}")]
    MTooLarge { m: u32, bound: u32 },
    #[error("max_values = {0} must be at least 3")]
    MaxValuesTooSmall(usize),
    #[error("decimation parameters are for m = {params} but the field has m = {field}")]
    DegreeMismatch { params: u32, field: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PredictionRow {
    pub c: i128,
    pub count: u64,
}

/// The four-row distribution of `C_d` for given `n` and `k = gcd(l, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TheoremPrediction {
    pub n: u32,
    pub k: u32,
    /// Rows in the order `-1`, `-1 + 2^n`, `-1 - 2^n`, `-1 - 2^(n+k)`; zero counts kept.
    pub entries: Vec<PredictionRow>,
}

impl TheoremPrediction {
    pub fn nonzero(&self) -> BTreeMap<i128, u64> {
        self.entries
            .iter()
            .filter(|r| r.count > 0)
            .map(|r| (r.c, r.count))
            .collect()
    }

    /// Rows whose count is zero.
    pub fn zero_rows(&self) -> Vec<i128> {
        self.entries
            .iter()
            .filter(|r| r.count == 0)
            .map(|r| r.c)
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|r| r.count).sum()
    }
}

fn div_exact(num: u128, den: u128) -> Option<u64> {
    num.is_multiple_of(den)
        .then(|| u64::try_from(num / den).ok())
        .flatten()
}

pub fn theorem1_prediction(n: u32, k: u32) -> Result<TheoremPrediction, AnalysisError> {
    let bad = AnalysisError::BadParameters { n, k };
    if k == 0 || n == 0 || n > 32 || !n.is_multiple_of(k) || (n / k).is_multiple_of(2) {
        return Err(bad);
    }
    let p = |e: u32| 1u128 << e;
    let counts = [
        div_exact(p(n - k) - 1, 1),
        div_exact((p(n) + 1) * p(k - 1), p(k) + 1),
        div_exact((p(n) - 1) * (p(k - 1) - 1), p(k) - 1),
        div_exact(p(n - k) - 1, p(2 * k) - 1),
    ];
    let values = [
        -1,
        -1 + (1i128 << n),
        -1 - (1i128 << n),
        -1 - (1i128 << (n + k)),
    ];
    let mut entries = Vec::with_capacity(4);
    for (c, count) in values.into_iter().zip(counts) {
        entries.push(PredictionRow {
            c,
            count: count.ok_or(bad.clone())?,
        });
    }
    Ok(TheoremPrediction { n, k, entries })
}

/// The three power sums `Σ C`, `Σ (C+1)^2`, `Σ (C+1)^3` over all shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Moments {
    pub sum: i128,
    pub second: i128,
    pub third: i128,
}

pub fn moments(spec: &CorrelationSpectrum) -> Moments {
    let mut out = Moments {
        sum: 0,
        second: 0,
        third: 0,
    };
    for (&c, &count) in spec.entries() {
        let (c, count) = (c as i128, count as i128);
        out.sum += c * count;
        out.second += (c + 1).pow(2) * count;
        out.third += (c + 1).pow(3) * count;
    }
    out
}

/// Expected moments for a complete spectrum at degree `m` with `ν` solutions.
pub fn expected_moments(m: u32, nu: u64) -> Moments {
    let n = m / 2;
    let p = |e: u32| 1i128 << e;
    Moments {
        sum: 1,
        second: p(m) * (p(n) - 1),
        third: -p(2 * m) + (nu as i128 + 3) * p(n + m),
    }
}

/// Whether all three moment identities hold exactly.
pub fn lemma6_check(spec: &CorrelationSpectrum, nu: u64, m: u32) -> Result<bool, AnalysisError> {
    let expected = (1u64 << (m / 2)) - 1;
    if spec.total() != expected || spec.m() != m {
        return Err(AnalysisError::IncompleteSpectrum {
            found: spec.total(),
            expected,
        });
    }
    Ok(moments(spec) == expected_moments(m, nu))
}

/// Every `x ∉ {0, 1}` with `x^(dT) + (x+1)^(dT) + 1 = 0`, as `(x, x + 1)` pairs.
pub fn nu_solutions(field: &Field, d: u64) -> Result<Vec<(u32, u32)>, AnalysisError> {
    let n = field.n();
    if d == 0 || d.gcd(&(field.half_order() as u64)) != 1 {
        return Err(SequenceError::DNotCoprime { d, n }.into());
    }
    let order = field.order() as u64;
    let e = (d % order * field.t_exponent() as u64 % order) as i64;
    Ok((2..field.size())
        .into_par_iter()
        .filter(|&x| field.pow_bits(x, e) ^ field.pow_bits(x ^ 1, e) == 1)
        .map(|x| (x, x ^ 1))
        .collect())
}

pub fn count_nu(field: &Field, d: u64) -> Result<u64, AnalysisError> {
    Ok(nu_solutions(field, d)?.len() as u64)
}

/// Number of distinct values in the spectrum.
pub fn classify_valuedness(spec: &CorrelationSpectrum) -> usize {
    spec.distinct_values()
}

/// Outcome of comparing the empirical spectrum with the prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub m: u32,
    pub d: u32,
    pub l: u32,
    pub i: u32,
    pub k: u32,
    pub pass: bool,
    pub spectrum_matches: bool,
    /// Empirical count of `-1 ± 2^n` against the number of full-rank forms.
    pub rank_matches: bool,
    pub empirical: Vec<ValueCount>,
    pub predicted: Vec<PredictionRow>,
    pub rank_census: RankCensus,
}

impl VerifyReport {
    pub fn ensure_pass(self) -> Result<Self, AnalysisError> {
        if self.pass {
            Ok(self)
        } else {
            Err(AnalysisError::PredictionMismatch {
                m: self.m,
                d: self.d,
            })
        }
    }
}

/// Compares the spectrum of `params.d` with [`theorem1_prediction`] and the rank census with
/// [`rank_counts`]. Mismatches are reported in the returned value, not as errors.
pub fn verify_theorem1(
    field: &Field,
    params: &DecimationParams,
) -> Result<VerifyReport, AnalysisError> {
    if params.m() != field.m() {
        return Err(AnalysisError::DegreeMismatch {
            params: params.m(),
            field: field.m(),
        });
    }
    let n = params.n;
    let spec = Correlator::new(field).spectrum(params.d as u64)?;
    let prediction = theorem1_prediction(n, params.k)?;
    let census = rank_tally(field, FormParams::from(params))?;
    let empirical: BTreeMap<i128, u64> = spec
        .entries()
        .iter()
        .map(|(&c, &n)| (c.into(), n))
        .collect();
    let spectrum_matches = empirical == prediction.nonzero();
    let m2_m3 = spec.count(-1 + (1i64 << n)) + spec.count(-1 - (1i64 << n));
    let rank_matches = m2_m3 == census.full_rank()
        && (census.full_rank(), census.deficient_rank()) == rank_counts(n, params.k);
    Ok(VerifyReport {
        m: field.m(),
        d: params.d,
        l: params.l,
        i: params.i,
        k: params.k,
        pass: spectrum_matches && rank_matches,
        spectrum_matches,
        rank_matches,
        empirical: spec.to_record().values,
        predicted: prediction.entries,
        rank_census: census,
    })
}

/// One coset leader whose spectrum has few distinct values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchRecord {
    pub m: u32,
    pub d: u32,
    pub num_values: usize,
    pub spectrum: CorrelationSpectrum,
    /// Canonical `(l, i)` if `d` solves the congruence with a normalized `l`.
    pub matched: Option<(u32, u32)>,
    pub k: Option<u32>,
    /// Raw congruence solutions, normalized or not.
    pub solutions: Vec<(u32, u32)>,
}

/// Spectra of every coprime coset leader modulo `2^n - 1`, keeping those with at most
/// `max_values` distinct values, sorted by `d`. Fields above [`DEFAULT_SEARCH_BOUND`]
/// require `extended`, and nothing above [`MAX_SEARCH_BOUND`] is accepted.
pub fn search_decimations(
    field: &Field,
    max_values: usize,
    extended: bool,
) -> Result<Vec<SearchRecord>, AnalysisError> {
    let m = field.m();
    let bound = if extended {
        MAX_SEARCH_BOUND
    } else {
        DEFAULT_SEARCH_BOUND
    };
    if m > bound {
        return Err(AnalysisError::MTooLarge { m, bound });
    }
    if max_values < 3 {
        return Err(AnalysisError::MaxValuesTooSmall(max_values));
    }
    let n = field.n();
    let correlator = Correlator::new(field);
    let records: Vec<Option<SearchRecord>> = coprime_coset_leaders(n)
        .into_par_iter()
        .map(|d| {
            let spectrum = correlator.spectrum(d)?;
            let num_values = classify_valuedness(&spectrum);
            if num_values > max_values {
                return Ok(None);
            }
            let matched = find_l_i(d, n)?;
            Ok(Some(SearchRecord {
                m,
                d: d as u32,
                num_values,
                spectrum,
                matched,
                k: matched.map(|(l, _)| l.gcd(&n)),
                solutions: solve_congruence(d, n)?,
            }))
        })
        .collect::<Result<_, AnalysisError>>()?;
    Ok(records.into_iter().flatten().collect())
}
