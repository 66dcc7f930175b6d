//! The two m-sequences `s_t = tr^m_1(α^t)`, `u_t = tr^n_1(β^t)` and their cross
//! correlation `C_d(τ) = Σ_{t < 2^m-1} (-1)^(s_t + u_{d(t+τ)})`.
//!
//! Four routes compute the same numbers:
//!
//! * [`Route::Direct`]: the defining sum over one long period, on packed bits.
//! * [`Route::CharacterSum`]: `Σ_{x ≠ 0} (-1)^(tr^m_1(x) + tr^n_1(a x^(dT)))` with
//!   `a = β^(dτ)`, evaluated with field arithmetic.
//! * [`Route::QuadraticForm`]: `-1 + Σ_x (-1)^ρ(x)` after substituting
//!   `x = y^(2^l+1)`; only for decimations solving the congruence.
//! * [`Route::Folded`]: the defining sum with the long sequence folded modulo
//!   `2^n - 1` first, so a whole spectrum costs O(2^m). This is what
//!   [`spectrum`] uses.

use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::decimation::{params_for, DecimationError, DecimationParams};
use crate::gf2m::{Field, FieldElement, FieldError};
use crate::quadform::{FormParams, QuadForm, QuadFormError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Decimation(#[from] DecimationError),
    #[error(transparent)]
    QuadForm(#[from] QuadFormError),
    #[error("shift {tau} is outside 0..={max}")]
    TauOutOfRange { tau: u64, max: u64 },
    #[error("d = {d} is not coprime to 2^{n} - 1")]
    DNotCoprime { d: u64, n: u32 },
    #[error("a must be nonzero")]
    AZero,
    #[error("a is not in GF(2^{0})")]
    ANotInSubfield(u32),
    #[error("gcd(2^{l} + 1, 2^{m} - 1) != 1")]
    LNotNormalized { l: u32, m: u32 },
    #[error("decimation parameters are for m = {params} but the field has m = {field}")]
    DegreeMismatch { params: u32, field: u32 },
    #[error("d = {d} does not solve d (2^l + 1) = 2^i mod 2^{n} - 1 for any l, i")]
    NotInFamily { d: u64, n: u32 },
}

/// One period of a binary sequence, packed 64 bits per word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSequence {
    len: usize,
    words: Vec<u64>,
}

impl BitSequence {
    fn from_fn(len: usize, mut bit: impl FnMut(usize) -> u32) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for t in 0..len {
            words[t / 64] |= u64::from(bit(t) & 1) << (t % 64);
        }
        BitSequence { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, t: usize) -> u32 {
        (self.words[t / 64] >> (t % 64)) as u32 & 1
    }

    /// Number of ones in the period.
    pub fn weight(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len).map(|t| self.get(t))
    }

    fn hamming_distance(&self, other: &BitSequence) -> u64 {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    /// Period 2^m - 1: `tr^m_1(α^t)`.
    Long,
    /// Period 2^n - 1: `tr^n_1(β^t)`.
    Short,
}

/// One full period of the long or short m-sequence, generated by stepping the field.
pub fn m_sequence(field: &Field, kind: SequenceKind) -> BitSequence {
    match kind {
        SequenceKind::Long => {
            let mut x = 1u32;
            BitSequence::from_fn(field.order() as usize, |_| {
                let b = field.trace_bit(x);
                x = field.mul_alpha_bits(x);
                b
            })
        }
        SequenceKind::Short => {
            let beta = field.beta().bits();
            let mut y = 1u32;
            BitSequence::from_fn(field.half_order() as usize, |_| {
                let b = field.half_trace_bit(y);
                y = field.mul_bits(y, beta);
                b
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    Direct,
    CharacterSum,
    QuadraticForm,
    Folded,
}

/// Multiset of correlation values over all shifts `0 <= τ <= 2^n - 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationSpectrum {
    pub n: u32,
    pub d: u32,
    entries: BTreeMap<i64, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueCount {
    pub c: i64,
    pub count: u64,
}

/// Serialized form: `{"m":…, "d":…, "values":[{"c":…, "count":…}, …]}`, values ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectrumRecord {
    pub m: u32,
    pub d: u32,
    pub values: Vec<ValueCount>,
}

impl CorrelationSpectrum {
    pub fn from_values(n: u32, d: u32, values: impl IntoIterator<Item = i64>) -> Self {
        let mut entries = BTreeMap::new();
        for v in values {
            *entries.entry(v).or_insert(0) += 1;
        }
        CorrelationSpectrum { n, d, entries }
    }

    pub fn from_entries(n: u32, d: u32, entries: BTreeMap<i64, u64>) -> Self {
        let entries = entries.into_iter().filter(|&(_, c)| c > 0).collect();
        CorrelationSpectrum { n, d, entries }
    }

    pub fn m(&self) -> u32 {
        2 * self.n
    }

    /// Value -> count, ascending by value; zero counts are never stored.
    pub fn entries(&self) -> &BTreeMap<i64, u64> {
        &self.entries
    }

    pub fn count(&self, value: i64) -> u64 {
        self.entries.get(&value).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn distinct_values(&self) -> usize {
        self.entries.len()
    }

    pub fn to_record(&self) -> SpectrumRecord {
        SpectrumRecord {
            m: self.m(),
            d: self.d,
            values: self
                .entries
                .iter()
                .map(|(&c, &count)| ValueCount { c, count })
                .collect(),
        }
    }

    /// `value:count` pairs joined by `;`.
    pub fn compact(&self) -> String {
        self.entries
            .iter()
            .map(|(v, c)| format!("{v}:{c}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Shared per-field state for correlation computations: both sequences and the folded long sequence.
pub struct Correlator<'a> {
    field: &'a Field,
    long: BitSequence,
    short: BitSequence,
    folded: Vec<i64>,
}

impl<'a> Correlator<'a> {
    pub fn new(field: &'a Field) -> Self {
        let long = m_sequence(field, SequenceKind::Long);
        let short = m_sequence(field, SequenceKind::Short);
        let period = short.len();
        let mut folded = vec![0i64; period];
        for (t, b) in long.iter().enumerate() {
            folded[t % period] += 1 - 2 * b as i64;
        }
        Correlator {
            field,
            long,
            short,
            folded,
        }
    }

    pub fn field(&self) -> &'a Field {
        self.field
    }

    pub fn long(&self) -> &BitSequence {
        &self.long
    }

    pub fn short(&self) -> &BitSequence {
        &self.short
    }

    fn check_d(&self, d: u64) -> Result<u64, SequenceError> {
        let period = self.field.half_order() as u64;
        let n = self.field.n();
        if d == 0 || d.gcd(&period) != 1 {
            return Err(SequenceError::DNotCoprime { d, n });
        }
        Ok(d % period)
    }

    fn check_tau(&self, tau: u64) -> Result<(), SequenceError> {
        let max = self.field.half_order() as u64 - 1;
        if tau > max {
            return Err(SequenceError::TauOutOfRange { tau, max });
        }
        Ok(())
    }

    /// `C_d(τ)` from the defining sum.
    pub fn direct(&self, d: u64, tau: u64) -> Result<i64, SequenceError> {
        let d = self.check_d(d)?;
        self.check_tau(tau)?;
        let period = self.short.len() as u64;
        let step = d;
        let mut idx = d * tau % period;
        let shifted = BitSequence::from_fn(self.long.len(), |_| {
            let b = self.short.get(idx as usize);
            idx += step;
            if idx >= period {
                idx -= period;
            }
            b
        });
        let differ = self.long.hamming_distance(&shifted) as i64;
        Ok(self.long.len() as i64 - 2 * differ)
    }

    /// All shifts at once from the folded long sequence.
    pub fn folded_values(&self, d: u64) -> Result<Vec<i64>, SequenceError> {
        let d = self.check_d(d)?;
        let period = self.short.len();
        let decimated: Vec<i64> = (0..period)
            .map(|j| 1 - 2 * self.short.get((d as usize * j) % period) as i64)
            .collect();
        Ok((0..period)
            .into_par_iter()
            .map(|tau| {
                let (head, tail) = decimated.split_at(tau);
                let rotated = tail.iter().chain(head);
                self.folded.iter().zip(rotated).map(|(f, v)| f * v).sum()
            })
            .collect())
    }

    /// `C_d(τ)` for every `τ`, by the chosen route.
    pub fn values(&self, d: u64, route: Route) -> Result<Vec<i64>, SequenceError> {
        let d = self.check_d(d)?;
        let taus = 0..self.field.half_order() as u64;
        match route {
            Route::Folded => self.folded_values(d),
            Route::Direct => taus
                .into_par_iter()
                .map(|tau| self.direct(d, tau))
                .collect(),
            Route::CharacterSum => taus
                .into_par_iter()
                .map(|tau| cross_correlation_charsum(self.field, d, self.shift_to_a(d, tau)))
                .collect(),
            Route::QuadraticForm => {
                let n = self.field.n();
                let params = params_for(d, n)?.ok_or(SequenceError::NotInFamily { d, n })?;
                taus.into_par_iter()
                    .map(|tau| {
                        correlation_via_quadform(self.field, &params, self.shift_to_a(d, tau))
                    })
                    .collect()
            }
        }
    }

    /// `a = β^(dτ)`.
    pub fn shift_to_a(&self, d: u64, tau: u64) -> FieldElement {
        let e = (d * tau % self.field.half_order() as u64) as i64;
        self.field
            .pow(self.field.beta(), e)
            .expect("beta belongs to its field")
    }

    pub fn spectrum(&self, d: u64) -> Result<CorrelationSpectrum, SequenceError> {
        self.spectrum_by(d, Route::Folded)
    }

    pub fn spectrum_by(&self, d: u64, route: Route) -> Result<CorrelationSpectrum, SequenceError> {
        let values = self.values(d, route)?;
        Ok(CorrelationSpectrum::from_values(
            self.field.n(),
            d as u32,
            values,
        ))
    }
}

/// `C_d(τ)` from the defining sum. Builds both sequences; use [`Correlator`] for repeated calls.
pub fn cross_correlation_direct(field: &Field, d: u64, tau: u64) -> Result<i64, SequenceError> {
    Correlator::new(field).direct(d, tau)
}

/// `Σ_{x ∈ GF(2^m)*} (-1)^(tr^m_1(x) + tr^n_1(a x^(dT)))`, `T = 2^n + 1`.
pub fn cross_correlation_charsum(
    field: &Field,
    d: u64,
    a: FieldElement,
) -> Result<i64, SequenceError> {
    let n = field.n();
    let in_subfield = field.is_in_subfield(a, n)?;
    if a.is_zero() {
        return Err(SequenceError::AZero);
    }
    if !in_subfield {
        return Err(SequenceError::ANotInSubfield(n));
    }
    if d == 0 || d.gcd(&(field.half_order() as u64)) != 1 {
        return Err(SequenceError::DNotCoprime { d, n });
    }
    let e = (d % field.order() as u64 * field.t_exponent() as u64 % field.order() as u64) as i64;
    let a = a.bits();
    let ones = (1..field.size())
        .filter(|&x| {
            let y = field.mul_bits(a, field.pow_bits(x, e));
            field.trace_bit(x) ^ field.half_trace_bit(y) == 1
        })
        .count() as i64;
    Ok(field.order() as i64 - 2 * ones)
}

/// `C_d` at `a` through the quadratic form: `-1 + Σ_x (-1)^ρ_{a'}(x)` with `a' = a^(2^(n-i))`.
///
/// The substitution `x = y^(2^l+1)` turns `a x^(dT)` into `a (y^T)^(2^i)`, whose
/// half-field trace equals that of `a^(2^(-i)) y^T`; hence the twist by `2^(n-i)`.
pub fn correlation_via_quadform(
    field: &Field,
    params: &DecimationParams,
    a: FieldElement,
) -> Result<i64, SequenceError> {
    if params.m() != field.m() {
        return Err(SequenceError::DegreeMismatch {
            params: params.m(),
            field: field.m(),
        });
    }
    let m = field.m();
    if ((1u64 << params.l) + 1).gcd(&((1u64 << m) - 1)) != 1 {
        return Err(SequenceError::LNotNormalized { l: params.l, m });
    }
    let n = field.n();
    let in_subfield = field.is_in_subfield(a, n)?;
    if a.is_zero() {
        return Err(SequenceError::AZero);
    }
    if !in_subfield {
        return Err(SequenceError::ANotInSubfield(n));
    }
    let twisted = field.element(field.frobenius_bits(a.bits(), n - params.i) as u64)?;
    let form = QuadForm::new(field, FormParams::from(params), twisted)?;
    Ok(form.transform_at_zero() - 1)
}

/// Correlation spectrum of `d`, via the folded route.
pub fn spectrum(field: &Field, d: u64) -> Result<CorrelationSpectrum, SequenceError> {
    Correlator::new(field).spectrum(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decimation::derive_params;
    use crate::gf2m::build_field;

    #[test]
    fn sequence_weights() {
        let f = build_field(4, None).unwrap();
        let s = m_sequence(&f, SequenceKind::Long);
        assert_eq!((s.len(), s.weight()), (15, 8));
        assert_eq!(s.get(0), 0);
        let u = m_sequence(&f, SequenceKind::Short);
        assert_eq!((u.len(), u.weight()), (3, 2));
        for m in [6, 8, 10, 12] {
            let f = build_field(m, None).unwrap();
            let s = m_sequence(&f, SequenceKind::Long);
            assert_eq!(s.weight(), 1 << (m - 1));
            assert_eq!(s.get(0), 0);
            let u = m_sequence(&f, SequenceKind::Short);
            assert_eq!(u.weight(), 1 << (m / 2 - 1));
        }
    }

    #[test]
    fn long_sequence_is_trace_of_powers() {
        let f = build_field(8, None).unwrap();
        let s = m_sequence(&f, SequenceKind::Long);
        for t in 0..f.order() {
            let x = f.pow(f.alpha(), t as i64).unwrap();
            assert_eq!(s.get(t as usize), f.trace(x, 8, 1).unwrap().bits());
        }
    }

    #[test]
    fn golden_spectra() {
        let f = build_field(6, None).unwrap();
        let sp = spectrum(&f, 3).unwrap();
        assert_eq!(sp.entries(), &BTreeMap::from([(-17, 1), (-1, 3), (7, 3)]));
        let f = build_field(12, None).unwrap();
        let sp = spectrum(&f, 26).unwrap();
        assert_eq!(
            sp.entries(),
            &BTreeMap::from([(-257, 1), (-65, 21), (-1, 15), (63, 26)])
        );
        let f = build_field(8, None).unwrap();
        let sp = spectrum(&f, 7).unwrap();
        assert_eq!(
            sp.entries(),
            &BTreeMap::from([(-33, 2), (-9, 4), (7, 4), (15, 5)])
        );
    }

    #[test]
    fn direct_m6_tau0_in_expected_set() {
        let f = build_field(6, None).unwrap();
        let c = cross_correlation_direct(&f, 3, 0).unwrap();
        assert!([-1, 7, -17].contains(&c));
    }

    #[test]
    fn errors() {
        let f = build_field(6, None).unwrap();
        assert_eq!(
            cross_correlation_direct(&f, 3, 7).unwrap_err(),
            SequenceError::TauOutOfRange { tau: 7, max: 6 }
        );
        assert_eq!(
            cross_correlation_charsum(&f, 3, f.zero()).unwrap_err(),
            SequenceError::AZero
        );
        assert_eq!(
            cross_correlation_charsum(&f, 3, f.alpha()).unwrap_err(),
            SequenceError::ANotInSubfield(3)
        );
        let f8 = build_field(8, None).unwrap();
        assert_eq!(
            spectrum(&f8, 3).unwrap_err(),
            SequenceError::DNotCoprime { d: 3, n: 4 }
        );
        assert!(matches!(
            Correlator::new(&f8).values(7, Route::QuadraticForm),
            Err(SequenceError::NotInFamily { .. })
        ));
        let p = derive_params(3, 2, 0, 3).unwrap();
        let f10 = build_field(10, None).unwrap();
        assert!(matches!(
            correlation_via_quadform(&f10, &p, f10.one()),
            Err(SequenceError::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn quadform_route_m6_pointwise() {
        let f = build_field(6, None).unwrap();
        let p = derive_params(3, 2, 0, 3).unwrap();
        let mut values = Vec::new();
        for a in f.subfield_units(3) {
            let a = f.element(a as u64).unwrap();
            let q = correlation_via_quadform(&f, &p, a).unwrap();
            assert_eq!(q, cross_correlation_charsum(&f, 3, a).unwrap());
            values.push(q);
        }
        let sp = CorrelationSpectrum::from_values(3, 3, values);
        assert_eq!(sp.entries(), &BTreeMap::from([(-17, 1), (-1, 3), (7, 3)]));
    }

    #[test]
    fn quadform_route_with_nonzero_i() {
        // d = 7 at n = 5 has canonical (l, i) = (2, 2).
        let f = build_field(10, None).unwrap();
        let c = Correlator::new(&f);
        assert_eq!(
            c.values(7, Route::QuadraticForm).unwrap(),
            c.values(7, Route::Folded).unwrap()
        );
    }

    #[test]
    fn routes_agree_m4_all_d() {
        let f = build_field(4, None).unwrap();
        let c = Correlator::new(&f);
        for d in [1, 2, 4, 7, 8, 11, 13, 14] {
            let direct = c.values(d, Route::Direct).unwrap();
            assert_eq!(direct, c.values(d, Route::CharacterSum).unwrap());
            assert_eq!(direct, c.values(d, Route::Folded).unwrap());
        }
    }

    #[test]
    fn record_layout() {
        let f = build_field(6, None).unwrap();
        let rec = spectrum(&f, 3).unwrap().to_record();
        assert_eq!(rec.m, 6);
        let cs: Vec<i64> = rec.values.iter().map(|v| v.c).collect();
        assert_eq!(cs, vec![-17, -1, 7]);
    }
}
