//! The quadratic form `ρ_a(x) = tr^m_1(x^(2^l+1)) + tr^n_1(a x^(2^n+1))` for `a` in GF(2^n)*.
//!
//! Its symplectic form is `tr^m_1(z^(2^l) f_a(x))` with the linearized
//! polynomial `f_a(x) = x^(2^(2t)) + a^(2^l) x^(2^t) + x`, `t = n + l`, so the
//! radical of `ρ_a` is exactly the root space of `f_a` and
//! `rank(ρ_a) = m - dim ker f_a`. Kernels are computed as nullspaces of the
//! m×m bit matrix of `f_a`; the non-linear companions
//!
//! * `g_a(y) = y^(2^t+1) + a^(2^l) y + 1`
//! * `h_c(z) = z^(2^t+1) + c z + c`
//!
//! are counted by exhaustive evaluation.

use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bitmatrix;
use crate::decimation::{normalize_l, DecimationParams};
use crate::gf2m::{Field, FieldElement, FieldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadFormError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("a must be nonzero")]
    AZero,
    #[error("a is not in GF(2^{0})")]
    ANotInSubfield(u32),
    #[error("c is not in GF(2^{0})")]
    CNotInSubfield(u32),
    #[error("form parameters are for n = {n} but the field has m = {m}")]
    FormFieldMismatch { n: u32, m: u32 },
    #[error("l = {l} is not a normalized exponent for n = {n}")]
    LNotNormalized { l: u32, n: u32 },
    #[error("h = {h} is outside 1..={max}")]
    HOutOfRange { h: u32, max: u32 },
    #[error("mu = {0} must be odd")]
    MuEven(u32),
    #[error("q = {0} must be a power of two, at least 2")]
    BadQ(u64),
    #[error("kernel dimension {kernel_dim} is not a multiple of k = {k}")]
    NonPowerOfTwoKernel { kernel_dim: u32, k: u32 },
    #[error("rank census for n = {n}, l = {l} found (R_m, R_m-2k) = {found:?}, closed form gives {expected:?}")]
    CensusMismatch {
        n: u32,
        l: u32,
        found: (u64, u64),
        expected: (u64, u64),
    },
}

/// The exponents that define `ρ_a`: half-degree `n`, normalized `l`, `k = gcd(l, n)`, `t = n + l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FormParams {
    pub n: u32,
    pub l: u32,
    pub k: u32,
    pub t: u32,
}

impl FormParams {
    pub fn new(n: u32, l: u32) -> Result<Self, QuadFormError> {
        match normalize_l(l, n) {
            Ok(l2) if l2 == l => Ok(FormParams {
                n,
                l,
                k: l.gcd(&n),
                t: n + l,
            }),
            _ => Err(QuadFormError::LNotNormalized { l, n }),
        }
    }

    /// Any `0 < l < n`. The rank and root-count machinery still applies; the
    /// substitution into the correlation sum and the closed-form censuses do not.
    pub fn unnormalized(n: u32, l: u32) -> Self {
        assert!(0 < l && l < n, "need 0 < l < n");
        FormParams {
            n,
            l,
            k: l.gcd(&n),
            t: n + l,
        }
    }

    pub fn m(&self) -> u32 {
        2 * self.n
    }
}

impl From<&DecimationParams> for FormParams {
    fn from(p: &DecimationParams) -> Self {
        FormParams {
            n: p.n,
            l: p.l,
            k: p.k,
            t: p.t,
        }
    }
}

/// Where roots are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootField {
    /// GF(2^m)
    Full,
    /// GF(2^n)
    Half,
}

/// `ρ_a` for one fixed `a`.
#[derive(Debug, Clone, Copy)]
pub struct QuadForm<'a> {
    field: &'a Field,
    form: FormParams,
    a: u32,
    a_frob: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankResult {
    pub a: u32,
    pub kernel_dim: u32,
    pub rank: u32,
    pub half_rank: u32,
}

impl<'a> QuadForm<'a> {
    pub fn new(field: &'a Field, form: FormParams, a: FieldElement) -> Result<Self, QuadFormError> {
        if field.m() != form.m() {
            return Err(QuadFormError::FormFieldMismatch {
                n: form.n,
                m: field.m(),
            });
        }
        let in_subfield = field.is_in_subfield(a, form.n)?;
        if a.is_zero() {
            return Err(QuadFormError::AZero);
        }
        if !in_subfield {
            return Err(QuadFormError::ANotInSubfield(form.n));
        }
        Ok(Self::from_bits(field, form, a.bits()))
    }

    pub(crate) fn from_bits(field: &'a Field, form: FormParams, a: u32) -> Self {
        QuadForm {
            field,
            form,
            a,
            a_frob: field.frobenius_bits(a, form.l),
        }
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn form(&self) -> FormParams {
        self.form
    }

    /// ρ_a(x) as 0 or 1.
    pub fn eval(&self, x: u32) -> u32 {
        let f = self.field;
        let lhs = f.mul_bits(f.frobenius_bits(x, self.form.l), x);
        let norm = f.mul_bits(f.frobenius_bits(x, self.form.n), x);
        f.trace_bit(lhs) ^ f.half_trace_bit(f.mul_bits(self.a, norm))
    }

    /// Σ_{x ∈ GF(2^m)} (-1)^ρ_a(x).
    pub fn transform_at_zero(&self) -> i64 {
        let size = self.field.size();
        let ones: u64 = (0..size).map(|x| self.eval(x) as u64).sum();
        size as i64 - 2 * ones as i64
    }

    /// Column images of the F2-linear map f_a on the polynomial basis.
    pub fn f_columns(&self) -> Vec<u32> {
        let f = self.field;
        let t = self.form.t;
        (0..f.m())
            .map(|j| {
                let e = 1u32 << j;
                f.frobenius_bits(e, 2 * t) ^ f.mul_bits(self.a_frob, f.frobenius_bits(e, t)) ^ e
            })
            .collect()
    }

    /// f_a(x) evaluated directly.
    pub fn eval_f(&self, x: u32) -> u32 {
        let f = self.field;
        let t = self.form.t;
        f.frobenius_bits(x, 2 * t) ^ f.mul_bits(self.a_frob, f.frobenius_bits(x, t)) ^ x
    }

    /// g_a(y) evaluated directly.
    pub fn eval_g(&self, y: u32) -> u32 {
        let f = self.field;
        f.mul_bits(f.frobenius_bits(y, self.form.t), y) ^ f.mul_bits(self.a_frob, y) ^ 1
    }

    /// Basis of the root space of f_a in GF(2^m).
    pub fn f_kernel_basis(&self) -> Vec<u32> {
        bitmatrix::nullspace(&self.f_columns())
    }

    /// Number of roots of f_a in GF(2^m).
    pub fn count_roots_f(&self) -> u64 {
        let dim = self.field.m() - bitmatrix::rank(&self.f_columns());
        1u64 << dim
    }

    pub fn rank(&self) -> Result<RankResult, QuadFormError> {
        let m = self.field.m();
        let rank = bitmatrix::rank(&self.f_columns());
        let kernel_dim = m - rank;
        // The root space is a vector space over GF(2^gcd(t, m)); gcd(t, m) = k when l is normalized.
        let w = self.form.t.gcd(&m);
        if !kernel_dim.is_multiple_of(w) || !rank.is_multiple_of(2) {
            return Err(QuadFormError::NonPowerOfTwoKernel { kernel_dim, k: w });
        }
        Ok(RankResult {
            a: self.a,
            kernel_dim,
            rank,
            half_rank: rank / 2,
        })
    }

    /// Size of `{x : ρ(x+z) + ρ(x) + ρ(z) = 0 for all z}`, by enumerating every pair.
    pub fn radical_size_exhaustive(&self) -> u64 {
        let size = self.field.size();
        let rho: Vec<u32> = (0..size).map(|x| self.eval(x)).collect();
        (0..size)
            .filter(|&x| {
                (0..size).all(|z| rho[(x ^ z) as usize] ^ rho[x as usize] ^ rho[z as usize] == 0)
            })
            .count() as u64
    }

    /// Roots of g_a in the chosen field. g_a(0) = 1, so all roots are nonzero.
    pub fn roots_g(&self, domain: RootField) -> Vec<u32> {
        match domain {
            RootField::Full => (1..self.field.size())
                .filter(|&y| self.eval_g(y) == 0)
                .collect(),
            RootField::Half => self
                .field
                .subfield_units(self.form.n)
                .into_iter()
                .filter(|&y| self.eval_g(y) == 0)
                .collect(),
        }
    }

    pub fn count_roots_g(&self, domain: RootField) -> u64 {
        self.roots_g(domain).len() as u64
    }

    /// The parameter `c = a^(2^l (2^t + 1))` for which h_c has as many roots as g_a.
    pub fn matching_c(&self) -> u32 {
        let f = self.field;
        f.mul_bits(f.frobenius_bits(self.a_frob, self.form.t), self.a_frob)
    }
}

/// h_c(z) = z^(2^t+1) + c z + c.
pub fn eval_h(field: &Field, t: u32, c: u32, z: u32) -> u32 {
    field.mul_bits(field.frobenius_bits(z, t), z) ^ field.mul_bits(c, z) ^ c
}

/// Number of roots of h_c in GF(2^m) or GF(2^n), `c` in that field.
pub fn count_roots_h(
    field: &Field,
    domain: RootField,
    t: u32,
    c: FieldElement,
) -> Result<u64, QuadFormError> {
    let n = field.n();
    if domain == RootField::Half && !field.is_in_subfield(c, n)? {
        return Err(QuadFormError::CNotInSubfield(n));
    }
    Ok(count_roots_h_bits(field, domain, t, c.bits()))
}

fn count_roots_h_bits(field: &Field, domain: RootField, t: u32, c: u32) -> u64 {
    match domain {
        RootField::Full => {
            let nonzero = (1..field.size())
                .filter(|&z| eval_h(field, t, c, z) == 0)
                .count() as u64;
            u64::from(c == 0) + nonzero
        }
        RootField::Half if c == 0 => 1,
        RootField::Half => {
            let units = field.subfield_units(field.n());
            let jc = units
                .iter()
                .position(|&u| u == c)
                .expect("c is in GF(2^n)*");
            count_h_half(&units, field.n(), t, jc)
        }
    }
}

/// Roots of h_c in GF(2^n) for `c = units[jc]`, where `units[j] = g^j` for a generator `g`.
/// Works on exponents: `z^(2^t+1) = g^(j (2^t+1))`, `c z = g^(jc + j)`.
fn count_h_half(units: &[u32], n: u32, t: u32, jc: usize) -> u64 {
    let order = units.len();
    let e = ((1usize << (t % n)) + 1) % order;
    let c = units[jc];
    let (mut pow_idx, mut cz_idx) = (0usize, jc);
    let mut roots = 0;
    for _ in 0..order {
        if units[pow_idx] ^ units[cz_idx] == c {
            roots += 1;
        }
        pow_idx += e;
        if pow_idx >= order {
            pow_idx -= order;
        }
        cz_idx += 1;
        if cz_idx == order {
            cz_idx = 0;
        }
    }
    roots
}

/// Predicted trace-transform distribution of a quadratic form of rank 2h on GF(2^m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TransformDistribution {
    pub m: u32,
    pub h: u32,
    pub magnitude: i64,
    pub positive: u64,
    pub negative: u64,
    pub zero: u64,
}

impl TransformDistribution {
    /// `(value, count)` rows, ascending by value.
    pub fn entries(&self) -> [(i64, u64); 3] {
        [
            (-self.magnitude, self.negative),
            (0, self.zero),
            (self.magnitude, self.positive),
        ]
    }
}

pub fn lemma2_distribution(m: u32, h: u32) -> Result<TransformDistribution, QuadFormError> {
    if h == 0 || h > m / 2 || m > 62 {
        return Err(QuadFormError::HOutOfRange { h, max: m / 2 });
    }
    let big = 1u64 << (2 * h - 1);
    let small = 1u64 << (h - 1);
    Ok(TransformDistribution {
        m,
        h,
        magnitude: 1i64 << (m - h),
        positive: big + small,
        negative: big - small,
        zero: (1u64 << m) - (1u64 << (2 * h)),
    })
}

/// Closed-form number of `c ∈ GF(q^μ)*` for which h_c has 0, 1, 2 and q+1 roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HRootCounts {
    pub n0: u64,
    pub n1: u64,
    pub n2: u64,
    pub n_q1: u64,
}

impl HRootCounts {
    pub fn total(&self) -> u64 {
        self.n0 + self.n1 + self.n2 + self.n_q1
    }
}

fn exact_div(num: u128, den: u128) -> u64 {
    debug_assert_eq!(num % den, 0, "{num} / {den}");
    (num / den) as u64
}

pub fn lemma5_counts(q: u64, mu: u32) -> Result<HRootCounts, QuadFormError> {
    if q < 2 || !q.is_power_of_two() {
        return Err(QuadFormError::BadQ(q));
    }
    if mu.is_multiple_of(2) {
        return Err(QuadFormError::MuEven(mu));
    }
    let q = q as u128;
    let qmu = q.pow(mu);
    let qmu1 = q.pow(mu - 1);
    Ok(HRootCounts {
        n0: exact_div(q * qmu + q, 2 * (q + 1)),
        n1: (qmu1 - 1) as u64,
        n2: exact_div((q - 2) * (qmu - 1), 2 * (q - 1)),
        n_q1: exact_div(qmu1 - 1, q * q - 1),
    })
}

/// Closed-form `(R_m, R_{m-2k})`: how many `a ∈ GF(2^n)*` give full rank and rank m - 2k.
pub fn rank_counts(n: u32, k: u32) -> (u64, u64) {
    let p = |e: u32| 1u128 << e;
    let den = p(2 * k) - 1;
    let full = exact_div(p(n + 2 * k) - p(n + k) - p(n) + 1, den);
    let deficient = exact_div(p(n + k) - p(2 * k), den);
    (full, deficient)
}

/// Ranks of ρ_a over all `a ∈ GF(2^n)*`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankCensus {
    pub m: u32,
    pub l: u32,
    pub k: u32,
    /// rank -> number of `a`
    pub ranks: BTreeMap<u32, u64>,
}

impl RankCensus {
    pub fn full_rank(&self) -> u64 {
        self.ranks.get(&self.m).copied().unwrap_or(0)
    }

    pub fn deficient_rank(&self) -> u64 {
        self.ranks.get(&(self.m - 2 * self.k)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.ranks.values().sum()
    }
}

fn tally<I: IntoIterator<Item = u64>>(items: I) -> BTreeMap<u64, u64> {
    let mut out = BTreeMap::new();
    for v in items {
        *out.entry(v).or_insert(0) += 1;
    }
    out
}

/// Tallies rank(ρ_a) over GF(2^n)* and checks the tallies against [`rank_counts`].
pub fn rank_census(field: &Field, form: FormParams) -> Result<RankCensus, QuadFormError> {
    let census = rank_tally(field, form)?;
    let found = (census.full_rank(), census.deficient_rank());
    let expected = rank_counts(form.n, form.k);
    if found != expected || census.total() != field.half_order() as u64 {
        return Err(QuadFormError::CensusMismatch {
            n: form.n,
            l: form.l,
            found,
            expected,
        });
    }
    Ok(census)
}

/// Like [`rank_census`] without the comparison against the closed forms.
pub fn rank_tally(field: &Field, form: FormParams) -> Result<RankCensus, QuadFormError> {
    if field.m() != form.m() {
        return Err(QuadFormError::FormFieldMismatch {
            n: form.n,
            m: field.m(),
        });
    }
    let ranks: Vec<u32> = field
        .subfield_units(form.n)
        .into_par_iter()
        .map(|a| QuadForm::from_bits(field, form, a).rank().map(|r| r.rank))
        .collect::<Result<_, _>>()?;
    let census = RankCensus {
        m: form.m(),
        l: form.l,
        k: form.k,
        ranks: tally(ranks.into_iter().map(u64::from))
            .into_iter()
            .map(|(r, c)| (r as u32, c))
            .collect(),
    };
    Ok(census)
}

/// Which polynomial family a [`RootCensus`] counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PolyTag {
    /// f_a over GF(2^m)
    FFull,
    /// g_a over GF(2^m)
    GFull,
    /// g_a over GF(2^n)
    GHalf,
    /// h_c over GF(2^n), parameter c instead of a
    HHalf,
}

/// Root count -> number of parameters (a or c in GF(2^n)*) attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootCensus {
    pub tag: PolyTag,
    pub counts: BTreeMap<u64, u64>,
}

impl RootCensus {
    pub fn get(&self, roots: u64) -> u64 {
        self.counts.get(&roots).copied().unwrap_or(0)
    }

    pub fn scanned(&self) -> u64 {
        self.counts.values().sum()
    }
}

pub fn root_census(
    field: &Field,
    form: FormParams,
    tag: PolyTag,
) -> Result<RootCensus, QuadFormError> {
    if field.m() != form.m() {
        return Err(QuadFormError::FormFieldMismatch {
            n: form.n,
            m: field.m(),
        });
    }
    let params = field.subfield_units(form.n);
    let counts: Vec<u64> = params
        .par_iter()
        .enumerate()
        .map(|(j, &p)| {
            let q = QuadForm::from_bits(field, form, p);
            match tag {
                PolyTag::FFull => q.count_roots_f(),
                PolyTag::GFull => q.count_roots_g(RootField::Full),
                PolyTag::GHalf => q.count_roots_g(RootField::Half),
                PolyTag::HHalf => count_h_half(&params, form.n, form.t, j),
            }
        })
        .collect();
    Ok(RootCensus {
        tag,
        counts: tally(counts),
    })
}

/// Root counts of h_c over GF(2^n) for every `c ∈ GF(2^n)*`, for an arbitrary exponent `t`.
pub fn h_census(field: &Field, t: u32) -> RootCensus {
    let units = field.subfield_units(field.n());
    let counts: Vec<u64> = (0..units.len())
        .into_par_iter()
        .map(|jc| count_h_half(&units, field.n(), t, jc))
        .collect();
    RootCensus {
        tag: PolyTag::HHalf,
        counts: tally(counts),
    }
}
