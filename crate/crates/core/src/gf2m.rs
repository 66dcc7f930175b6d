//! Arithmetic in the binary field tower GF(2^k) ⊂ GF(2^n) ⊂ GF(2^m), m = 2n.
//!
//! Elements are bit masks in the polynomial basis of GF(2^m): bit `i` is the
//! coefficient of `x^i`. Multiplication is a shift-xor carry-less product
//! followed by reduction modulo the primitive polynomial. For `m <= 20` an
//! exp/log table pair is built lazily on first use and all multiplicative
//! operations go through it; larger fields fall back to square-and-multiply.
//!
//! The checked API (`Field::mul`, `Field::pow`, `Field::trace`, ...) works on
//! [`FieldElement`] values, which remember the modulus of the field that
//! produced them. The `*_bits` methods are the unchecked fast paths used by the
//! exhaustive loops elsewhere in the crate.

use std::fmt;
use std::sync::OnceLock;

use num_integer::Integer;
use thiserror::Error;

/// Smallest supported extension degree.
pub const MIN_DEGREE: u32 = 4;
/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 26;
/// Fields up to this degree get exp/log tables.
pub const LOG_TABLE_MAX_DEGREE: u32 = 20;

/// Smallest (as an integer mask) primitive polynomial for each even degree.
const DEFAULT_POLYS: [(u32, u32); 12] = [
    (4, 0x13),
    (6, 0x43),
    (8, 0x11d),
    (10, 0x409),
    (12, 0x1053),
    (14, 0x402b),
    (16, 0x1002d),
    (18, 0x40027),
    (20, 0x100009),
    (22, 0x400003),
    (24, 0x100001b),
    (26, 0x4000047),
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("extension degree {0} is odd")]
    OddDegree(u32),
    #[error("extension degree {0} is outside the supported range {MIN_DEGREE}..={MAX_DEGREE}")]
    DegreeOutOfRange(u32),
    #[error("polynomial {poly:#x} has degree {found}, expected {expected}")]
    WrongDegree {
        poly: u64,
        found: u32,
        expected: u32,
    },
    #[error("polynomial {0:#x} is not primitive")]
    NotPrimitive(u64),
    #[error("element belongs to a different field")]
    FieldMismatch,
    #[error("bit mask {bits:#x} is not an element of GF(2^{m})")]
    InvalidElement { bits: u64, m: u32 },
    #[error("element is not in the subfield GF(2^{0})")]
    NotInSubfield(u32),
    #[error("trace from GF(2^{from}) to GF(2^{to}) is undefined inside GF(2^{m})")]
    NonDivisorDegrees { from: u32, to: u32, m: u32 },
    #[error("GF(2^{u}) is not a subfield of GF(2^{m})")]
    NonDivisorDegree { u: u32, m: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// Returns the built-in primitive polynomial for an even degree in range.
pub fn default_polynomial(m: u32) -> Option<u32> {
    DEFAULT_POLYS
        .iter()
        .find(|(deg, _)| *deg == m)
        .map(|(_, p)| *p)
}

/// Sign in `gcd(2^u ± 1, 2^v - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowSign {
    /// gcd(2^u - 1, 2^v - 1)
    Minus,
    /// gcd(2^u - 1, 2^v + 1)
    Plus,
}

/// Closed-form gcd of Mersenne-type numbers.
///
/// With `w = gcd(u, v)`: `Minus` gives `2^w - 1`; `Plus` gives `1` when `u / w`
/// is odd and `2^w + 1` otherwise.
///
/// Panics if `u` or `v` is zero or larger than 63.
pub fn gcd_pow2(u: u32, v: u32, sign: PowSign) -> u64 {
    assert!(
        (1..64).contains(&u) && (1..64).contains(&v),
        "exponents must lie in 1..=63"
    );
    let w = u.gcd(&v);
    match sign {
        PowSign::Minus => (1u64 << w) - 1,
        PowSign::Plus if (u / w) % 2 == 1 => 1,
        PowSign::Plus => (1u64 << w) + 1,
    }
}

/// Distinct prime factors of `n`, ascending. Trial division; `n < 2^53` in practice.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn clmul_reduce(mut x: u32, mut y: u32, m: u32, poly: u32) -> u32 {
    let top = 1u32 << m;
    let mut acc = 0u32;
    while y != 0 {
        if y & 1 != 0 {
            acc ^= x;
        }
        y >>= 1;
        x <<= 1;
        if x & top != 0 {
            x ^= poly;
        }
    }
    acc
}

fn pow_slow(mut base: u32, mut e: u64, m: u32, poly: u32) -> u32 {
    let mut acc = 1u32;
    while e != 0 {
        if e & 1 != 0 {
            acc = clmul_reduce(acc, base, m, poly);
        }
        base = clmul_reduce(base, base, m, poly);
        e >>= 1;
    }
    acc
}

/// True iff `poly` (bit `i` = coefficient of `x^i`) is a primitive polynomial of degree `m`.
pub fn is_primitive(poly: u64, m: u32) -> bool {
    if m == 0 || m > 31 || poly >> m != 1 || poly & 1 == 0 {
        return false;
    }
    let order = (1u64 << m) - 1;
    let p = poly as u32;
    if pow_slow(2, order, m, p) != 1 {
        return false;
    }
    prime_factors(order)
        .into_iter()
        .all(|q| pow_slow(2, order / q, m, p) != 1)
}

/// Exp/log tables for the primitive element `alpha`.
pub struct LogTables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl LogTables {
    fn build(m: u32, poly: u32) -> Self {
        let order = (1usize << m) - 1;
        let mut exp = vec![0u32; 2 * order];
        let mut log = vec![0u32; order + 1];
        let top = 1u32 << m;
        let mut x = 1u32;
        for j in 0..order {
            exp[j] = x;
            exp[j + order] = x;
            log[x as usize] = j as u32;
            x <<= 1;
            if x & top != 0 {
                x ^= poly;
            }
        }
        LogTables { exp, log }
    }

    /// `alpha^j` for `0 <= j < 2 (2^m - 1)`.
    #[inline]
    pub fn exp(&self, j: usize) -> u32 {
        self.exp[j]
    }

    /// Discrete log of a nonzero element.
    #[inline]
    pub fn log(&self, x: u32) -> u32 {
        self.log[x as usize]
    }
}

/// A validated GF(2^m) with m even, its primitive element `alpha` and `beta = alpha^(2^n + 1)`.
pub struct Field {
    m: u32,
    poly: u32,
    order: u32,
    beta: u32,
    trace_mask: u32,
    half_trace_mask: u32,
    tables: OnceLock<Option<LogTables>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("m", &self.m)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

/// An element of a particular [`Field`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    bits: u32,
    modulus: u32,
}

impl FieldElement {
    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    /// The primitive polynomial of the owning field.
    pub fn modulus(self) -> u32 {
        self.modulus
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.bits)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.bits)
    }
}

/// Builds GF(2^m), using the built-in primitive polynomial when `poly` is `None`.
pub fn build_field(m: u32, poly: Option<u64>) -> Result<Field, FieldError> {
    Field::new(m, poly)
}

impl Field {
    pub fn new(m: u32, poly: Option<u64>) -> Result<Self, FieldError> {
        if m % 2 == 1 {
            return Err(FieldError::OddDegree(m));
        }
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&m) {
            return Err(FieldError::DegreeOutOfRange(m));
        }
        let poly = match poly {
            Some(p) => {
                let found = 63 - p.max(1).leading_zeros();
                if found != m {
                    return Err(FieldError::WrongDegree {
                        poly: p,
                        found,
                        expected: m,
                    });
                }
                if !is_primitive(p, m) {
                    return Err(FieldError::NotPrimitive(p));
                }
                p as u32
            }
            None => default_polynomial(m).expect("table covers every even degree in range"),
        };
        let n = m / 2;
        let order = (1u32 << m) - 1;
        let beta = pow_slow(2, (1u64 << n) + 1, m, poly);

        let mut field = Field {
            m,
            poly,
            order,
            beta,
            trace_mask: 0,
            half_trace_mask: 0,
            tables: OnceLock::new(),
        };
        // The absolute trace and the GF(2^n) -> GF(2) trace are F2-linear, so
        // each is a parity of the element under a fixed mask.
        for j in 0..m {
            let e = 1u32 << j;
            field.trace_mask |= (field.frobenius_sum_slow(e, 1, m) & 1) << j;
            field.half_trace_mask |= (field.frobenius_sum_slow(e, 1, n) & 1) << j;
        }
        Ok(field)
    }

    /// Σ_{i < count} x^(2^(step·i)), using plain squaring.
    fn frobenius_sum_slow(&self, x: u32, step: u32, count: u32) -> u32 {
        let mut acc = 0;
        let mut y = x;
        for _ in 0..count {
            acc ^= y;
            for _ in 0..step {
                y = clmul_reduce(y, y, self.m, self.poly);
            }
        }
        acc
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.m / 2
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// 2^m - 1, the order of the multiplicative group.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// 2^n - 1, the order of the multiplicative group of the half-degree subfield.
    pub fn half_order(&self) -> u32 {
        (1u32 << self.n()) - 1
    }

    /// T = 2^n + 1, so that `beta = alpha^T`.
    pub fn t_exponent(&self) -> u32 {
        (1u32 << self.n()) + 1
    }

    pub fn size(&self) -> u32 {
        1u32 << self.m
    }

    pub fn tables(&self) -> Option<&LogTables> {
        self.tables
            .get_or_init(|| {
                (self.m <= LOG_TABLE_MAX_DEGREE).then(|| LogTables::build(self.m, self.poly))
            })
            .as_ref()
    }

    fn wrap(&self, bits: u32) -> FieldElement {
        FieldElement {
            bits,
            modulus: self.poly,
        }
    }

    pub fn element(&self, bits: u64) -> Result<FieldElement, FieldError> {
        if bits >> self.m != 0 {
            return Err(FieldError::InvalidElement { bits, m: self.m });
        }
        Ok(self.wrap(bits as u32))
    }

    pub fn zero(&self) -> FieldElement {
        self.wrap(0)
    }

    pub fn one(&self) -> FieldElement {
        self.wrap(1)
    }

    pub fn alpha(&self) -> FieldElement {
        self.wrap(2)
    }

    pub fn beta(&self) -> FieldElement {
        self.wrap(self.beta)
    }

    fn check(&self, x: FieldElement) -> Result<u32, FieldError> {
        if x.modulus != self.poly {
            return Err(FieldError::FieldMismatch);
        }
        Ok(x.bits)
    }

    pub fn add(&self, x: FieldElement, y: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.wrap(self.check(x)? ^ self.check(y)?))
    }

    pub fn mul(&self, x: FieldElement, y: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.wrap(self.mul_bits(self.check(x)?, self.check(y)?)))
    }

    /// `x^e`; negative exponents are reduced modulo 2^m - 1 for nonzero `x`.
    /// `pow(0, 0) = 1` and `pow(0, e > 0) = 0`.
    pub fn pow(&self, x: FieldElement, e: i64) -> Result<FieldElement, FieldError> {
        let bits = self.check(x)?;
        if bits == 0 && e < 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.wrap(self.pow_bits(bits, e)))
    }

    pub fn inv(&self, x: FieldElement) -> Result<FieldElement, FieldError> {
        self.pow(x, -1)
    }

    /// Trace from GF(2^from) to GF(2^to): Σ_{i < from/to} x^(2^(to·i)).
    pub fn trace(&self, x: FieldElement, from: u32, to: u32) -> Result<FieldElement, FieldError> {
        let bits = self.check(x)?;
        if to == 0 || from == 0 || !from.is_multiple_of(to) || !self.m.is_multiple_of(from) {
            return Err(FieldError::NonDivisorDegrees {
                from,
                to,
                m: self.m,
            });
        }
        if self.frobenius_bits(bits, from) != bits {
            return Err(FieldError::NotInSubfield(from));
        }
        let mut acc = 0;
        let mut y = bits;
        for _ in 0..from / to {
            acc ^= y;
            y = self.frobenius_bits(y, to);
        }
        Ok(self.wrap(acc))
    }

    /// True iff `x^(2^u) = x`, i.e. `x` lies in GF(2^u).
    pub fn is_in_subfield(&self, x: FieldElement, u: u32) -> Result<bool, FieldError> {
        let bits = self.check(x)?;
        if u == 0 || !self.m.is_multiple_of(u) {
            return Err(FieldError::NonDivisorDegree { u, m: self.m });
        }
        Ok(self.frobenius_bits(bits, u) == bits)
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, x: FieldElement) -> Result<u64, FieldError> {
        let bits = self.check(x)?;
        if bits == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let mut ord = self.order as u64;
        for q in prime_factors(self.order as u64) {
            while ord.is_multiple_of(q) && self.pow_bits(bits, (ord / q) as i64) == 1 {
                ord /= q;
            }
        }
        Ok(ord)
    }

    // ---- unchecked fast paths on raw bit masks ----

    #[inline]
    pub fn mul_bits(&self, x: u32, y: u32) -> u32 {
        if x == 0 || y == 0 {
            return 0;
        }
        match self.tables() {
            Some(t) => t.exp(t.log(x) as usize + t.log(y) as usize),
            None => clmul_reduce(x, y, self.m, self.poly),
        }
    }

    #[inline]
    pub fn pow_bits(&self, x: u32, e: i64) -> u32 {
        if x == 0 {
            return u32::from(e == 0);
        }
        let e = e.rem_euclid(self.order as i64) as u64;
        match self.tables() {
            Some(t) => t.exp(((t.log(x) as u64 * e) % self.order as u64) as usize),
            None => pow_slow(x, e, self.m, self.poly),
        }
    }

    /// `x^(2^j)`, with `j` taken modulo m.
    #[inline]
    pub fn frobenius_bits(&self, x: u32, j: u32) -> u32 {
        let j = j % self.m;
        if x == 0 || j == 0 {
            return x;
        }
        match self.tables() {
            Some(t) => t.exp((((t.log(x) as u64) << j) % self.order as u64) as usize),
            None => {
                let mut y = x;
                for _ in 0..j {
                    y = clmul_reduce(y, y, self.m, self.poly);
                }
                y
            }
        }
    }

    /// `alpha^e` for any integer `e`.
    #[inline]
    pub fn exp_bits(&self, e: i64) -> u32 {
        let e = e.rem_euclid(self.order as i64) as usize;
        match self.tables() {
            Some(t) => t.exp(e),
            None => pow_slow(2, e as u64, self.m, self.poly),
        }
    }

    /// Multiplies by `alpha`; one step of the Galois LFSR.
    #[inline]
    pub fn mul_alpha_bits(&self, x: u32) -> u32 {
        let y = x << 1;
        if y >> self.m != 0 {
            y ^ self.poly
        } else {
            y
        }
    }

    /// Absolute trace tr^m_1 as a bit.
    #[inline]
    pub fn trace_bit(&self, x: u32) -> u32 {
        (x & self.trace_mask).count_ones() & 1
    }

    /// tr^n_1 as a bit; only meaningful for `y` in GF(2^n).
    #[inline]
    pub fn half_trace_bit(&self, y: u32) -> u32 {
        (y & self.half_trace_mask).count_ones() & 1
    }

    /// True iff nonzero `x` is an `e`-th power, for `e | 2^m - 1`: `x^((2^m-1)/e) = 1`.
    pub fn is_power_bits(&self, x: u32, e: u32) -> bool {
        debug_assert!(self.order.is_multiple_of(e));
        x == 0 || self.pow_bits(x, (self.order / e) as i64) == 1
    }

    /// The nonzero elements of GF(2^u) for `u | m`, as powers of a generator of that subgroup.
    pub fn subfield_units(&self, u: u32) -> Vec<u32> {
        assert!(
            u > 0 && self.m.is_multiple_of(u),
            "GF(2^{u}) is not a subfield"
        );
        let sub_order = (1u64 << u) - 1;
        let step = self.order as u64 / sub_order;
        let g = self.pow_bits(2, step as i64);
        let mut out = Vec::with_capacity(sub_order as usize);
        let mut x = 1u32;
        for _ in 0..sub_order {
            out.push(x);
            x = self.mul_bits(x, g);
        }
        out
    }
}
