//! Exact evaluation of the closed-form bounds and parameter schedules.
//!
//! All logs are base 2. Values that live in log space are represented by
//! [`LogValue`], a polynomial in symbols log2(p) for odd primes (and, for
//! arguments too large to factor, opaque odd integers) with exact rational
//! coefficients. Powers of two inside a logarithm fold into the rational part,
//! so every quantity whose log arguments are powers of two collapses to an
//! exact rational, and identities between schedule values reduce to
//! normal-form equality. Comparisons of genuinely irrational values use
//! rigorous dyadic enclosures with directed rounding, refined on demand.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("parameter out of range: {0}")]
    BadParam(String),
}

fn bad<T>(msg: impl Into<String>) -> Result<T, BoundsError> {
    Err(BoundsError::BadParam(msg.into()))
}

fn big(n: u64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// log2 argument: a canonical odd integer >= 3 (prime whenever the odd part
/// factors within the trial-division limit, otherwise opaque).
type LogSym = BigUint;

type Monomial = BTreeMap<LogSym, u32>;

/// A sum of terms c · Π log2(aᵢ)^eᵢ with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogValue {
    terms: BTreeMap<Monomial, BigRational>,
}

const FACTOR_LIMIT: u64 = 1_000_000;

impl LogValue {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        let mut v = Self::zero();
        v.add_term(Monomial::new(), c);
        v
    }

    /// log2 of a positive rational: powers of two fold into the constant
    /// part, the remaining odd parts are prime-factored when small enough.
    pub fn log2_of(r: &BigRational) -> Result<Self, BoundsError> {
        if r <= &BigRational::zero() {
            return bad("log2 argument must be positive");
        }
        let mut out = Self::zero();
        let (num_two, num_odd) = split_twos(r.numer().magnitude());
        let (den_two, den_odd) = split_twos(r.denom().magnitude());
        out.add_term(
            Monomial::new(),
            BigRational::from(BigInt::from(num_two) - BigInt::from(den_two)),
        );
        out.accumulate_odd_log(&num_odd, 1);
        out.accumulate_odd_log(&den_odd, -1);
        Ok(out)
    }

    fn accumulate_odd_log(&mut self, odd: &BigUint, sign: i32) {
        if odd.is_one() {
            return;
        }
        for (factor, multiplicity) in factor_or_opaque(odd) {
            let mut mono = Monomial::new();
            mono.insert(factor, 1);
            self.add_term(
                mono,
                BigRational::from(BigInt::from(sign) * BigInt::from(multiplicity)),
            );
        }
    }

    fn add_term(&mut self, mono: Monomial, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, by: &BigRational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * by);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut mono = ma.clone();
                for (sym, pow) in mb {
                    *mono.entry(sym.clone()).or_insert(0) += pow;
                }
                out.add_term(mono, ca * cb);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact rational value when no symbolic logs remain.
    pub fn as_exact(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().expect("len 1");
            return m.is_empty().then(|| c.clone());
        }
        None
    }

    /// Rigorous enclosure with `precision` fractional bits per symbol.
    pub fn enclosure(&self, precision: u32) -> (BigRational, BigRational) {
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (mono, coeff) in &self.terms {
            // every symbol is an odd integer >= 3, so its log2 is positive
            let mut m_lo = BigRational::one();
            let mut m_hi = BigRational::one();
            for (sym, pow) in mono {
                let (s_lo, s_hi) =
                    log2_enclosure(&BigRational::from(BigInt::from(sym.clone())), precision);
                for _ in 0..*pow {
                    m_lo *= &s_lo;
                    m_hi *= &s_hi;
                }
            }
            if coeff >= &BigRational::zero() {
                lo += coeff * &m_lo;
                hi += coeff * &m_hi;
            } else {
                lo += coeff * &m_hi;
                hi += coeff * &m_lo;
            }
        }
        (lo, hi)
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.enclosure(64);
        let mid = (&lo + &hi) / big(2);
        mid.to_f64().unwrap_or(f64::NAN)
    }

    /// Sound three-way comparison: equality is decided on normal forms, order
    /// by enclosure refinement. `None` when undecidable at 512 bits.
    pub fn compare(&self, other: &Self) -> Option<std::cmp::Ordering> {
        let diff = self.sub(other);
        if diff.is_zero() {
            return Some(std::cmp::Ordering::Equal);
        }
        for precision in [32u32, 64, 128, 256, 512] {
            let (lo, hi) = diff.enclosure(precision);
            if lo > BigRational::zero() {
                return Some(std::cmp::Ordering::Greater);
            }
            if hi < BigRational::zero() {
                return Some(std::cmp::Ordering::Less);
            }
        }
        None
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{coeff}")?;
            for (sym, pow) in mono {
                if *pow == 1 {
                    write!(f, "*log2({sym})")?;
                } else {
                    write!(f, "*log2({sym})^{pow}")?;
                }
            }
        }
        Ok(())
    }
}

/// Split a positive integer into (power of two, odd part).
fn split_twos(x: &BigUint) -> (u64, BigUint) {
    if x.is_zero() {
        return (0, BigUint::zero());
    }
    let twos = x.trailing_zeros().unwrap_or(0);
    (twos, x >> twos)
}

/// Factor an odd integer by trial division up to the limit; any unfactored
/// remainder is returned as one opaque factor.
fn factor_or_opaque(odd: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out = Vec::new();
    let mut rest = odd.clone();
    let mut p = 3u64;
    while BigUint::from(p) * BigUint::from(p) <= rest && p <= FACTOR_LIMIT {
        let bp = BigUint::from(p);
        let mut mult = 0u32;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            mult += 1;
        }
        if mult > 0 {
            out.push((bp, mult));
        }
        p += 2;
    }
    if !rest.is_one() {
        out.push((rest, 1));
    }
    out
}

/// Rigorous [lo, hi] enclosure of log2 of a rational >= 1 with `precision`
/// fractional bits, by fixed-point squaring with outward rounding.
fn log2_enclosure(value: &BigRational, precision: u32) -> (BigRational, BigRational) {
    let num = value.numer().magnitude().clone();
    let den = value.denom().magnitude().clone();
    // find b with 2^b <= value < 2^(b+1)
    let mut b: i64 = num.bits() as i64 - den.bits() as i64;
    let pow_cmp = |e: i64| -> std::cmp::Ordering {
        if e >= 0 {
            num.cmp(&(&den << e as u64))
        } else {
            (&num << (-e) as u64).cmp(&den)
        }
    };
    while pow_cmp(b) == std::cmp::Ordering::Less {
        b -= 1;
    }
    while pow_cmp(b + 1) != std::cmp::Ordering::Less {
        b += 1;
    }

    let mut work = precision + 24;
    loop {
        if let Some(frac) = log2_fraction_bits(&num, &den, b, precision, work) {
            let scale = BigInt::one() << precision;
            let lo =
                BigRational::new(BigInt::from(b) * &scale + BigInt::from(frac), scale.clone());
            let hi = &lo + BigRational::new(BigInt::one(), scale);
            return (lo, hi);
        }
        work *= 2;
    }
}

/// Extract `precision` fraction bits of log2(num/den / 2^b) in [0, 1) via
/// interval squaring at `work` bits; None if an ambiguous straddle occurs.
fn log2_fraction_bits(
    num: &BigUint,
    den: &BigUint,
    b: i64,
    precision: u32,
    work: u32,
) -> Option<BigUint> {
    let two = BigUint::one() << (work + 1);
    // y = value / 2^b in [1, 2), as an interval [lo, hi] at scale 2^work
    let (ynum, yden) = if b >= 0 {
        (num.clone(), den << b as u64)
    } else {
        (num << (-b) as u64, den.clone())
    };
    let mut lo = (&ynum << work) / &yden;
    let mut hi = &lo + 1u32;
    let mut bits = BigUint::zero();
    for _ in 0..precision {
        lo = (&lo * &lo) >> work;
        hi = ((&hi * &hi) >> work) + 1u32;
        bits <<= 1u32;
        if lo >= two {
            lo >>= 1u32;
            hi = (&hi >> 1u32) + 1u32;
            bits += 1u32;
        } else if hi <= two {
            // bit 0
        } else {
            return None; // straddles 2: retry at higher working precision
        }
        if &hi - &lo > BigUint::one() << (work / 2) {
            return None;
        }
    }
    Some(bits)
}

/// log2(N) for the two-color universal host: 100 n² (log2 n)².
pub fn bound_two_color(n: u64) -> Result<LogValue, BoundsError> {
    if n < 2 {
        return bad("n must be at least 2");
    }
    let log_n = LogValue::log2_of(&big(n))?;
    Ok(log_n.mul(&log_n).scale(&big(100 * n * n)))
}

/// log2(N) for q colors: 8^(q+1) n^(2q-2) (log2 n)^q.
pub fn bound_multicolor(n: u64, q: u32) -> Result<LogValue, BoundsError> {
    if n < 2 {
        return bad("n must be at least 2");
    }
    if q < 2 {
        return bad("q must be at least 2");
    }
    let log_n = LogValue::log2_of(&big(n))?;
    let mut acc = LogValue::constant(BigRational::one());
    for _ in 0..q {
        acc = acc.mul(&log_n);
    }
    let coeff = BigRational::from(BigInt::from(8).pow(q + 1) * BigInt::from(n).pow(2 * q - 2));
    Ok(acc.scale(&coeff))
}

/// log2(N) for d-degenerate patterns: 600 d³ log2(d+1) log2(n).
pub fn bound_degenerate(n: u64, d: u64) -> Result<LogValue, BoundsError> {
    if n < 2 {
        return bad("n must be at least 2");
    }
    if d < 1 {
        return bad("d must be at least 1");
    }
    let log_n = LogValue::log2_of(&big(n))?;
    let log_d1 = LogValue::log2_of(&big(d + 1))?;
    Ok(log_n.mul(&log_d1).scale(&big(600 * d * d * d)))
}

/// The weaker two-color bound from iterated sparseness: 180 n³ (log2 n)².
pub fn bound_weak(n: u64) -> Result<LogValue, BoundsError> {
    if n < 4 {
        return bad("n must be at least 4");
    }
    let log_n = LogValue::log2_of(&big(n))?;
    Ok(log_n.mul(&log_n).scale(&big(180 * n * n * n)))
}

const MAX_ITERATION_LEVEL: u32 = 20;

/// Schedule for iterated sparseness at level h against an n-vertex
/// d-degenerate pattern: interval fraction n^-(2^(h+1)-2) and set-size
/// fraction (δ₂ / (2^(h+2)(n-d)))^(h(d+1)), both exact rationals.
pub fn sparse_schedule(
    n: usize,
    d: usize,
    delta2: &BigRational,
    h: u32,
) -> Result<(BigRational, BigRational), BoundsError> {
    if n < 2 {
        return bad("n must be at least 2");
    }
    if d < 1 || d > n - 1 {
        return bad("d must lie in 1..=n-1");
    }
    let inv_n = BigRational::new(BigInt::one(), BigInt::from(n));
    if delta2 <= &BigRational::zero() || delta2 >= &inv_n {
        return bad(format!("delta2 must lie in (0, 1/{n})"));
    }
    if h > MAX_ITERATION_LEVEL {
        return bad(format!("level h capped at {MAX_ITERATION_LEVEL}"));
    }
    let alpha_exp = (1u64 << (h + 1)) - 2;
    let alpha = BigRational::new(BigInt::one(), BigInt::from(n).pow(alpha_exp as u32));
    let gamma_base = delta2
        / (BigRational::from(BigInt::one() << (h + 2)) * BigRational::from(BigInt::from(n - d)));
    let gamma = power(&gamma_base, (h as usize) * (d + 1));
    Ok((alpha, gamma))
}

fn power(base: &BigRational, exp: usize) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Multicolor schedule at color depth k and level h. Exponents are exact; the
/// values are exact rationals when small enough (α always has an integer
/// exponent; γ's exponent is integral only when k = 1 or log2 n is).
#[derive(Debug, Clone)]
pub struct MulticolorSchedule {
    /// log2 of the interval fraction α_{k,h} = n^-E.
    pub alpha_log2: LogValue,
    /// The exponent E = 2^k n^(k-1) (2^h - 1).
    pub alpha_exponent: BigInt,
    pub alpha_exact: Option<BigRational>,
    /// log2 of the set fraction γ_{k,h}(δ₄) = (δ₄ / 2^(2h))^(h n (4 n log2 n)^(k-1)).
    pub gamma_log2: LogValue,
    pub gamma_exact: Option<BigRational>,
}

const EXACT_EXPONENT_LIMIT: u64 = 65_536;

pub fn multicolor_schedule(
    n: u64,
    k: u32,
    h: u32,
    delta4: &BigRational,
) -> Result<MulticolorSchedule, BoundsError> {
    if n < 2 {
        return bad("n must be at least 2");
    }
    if k < 1 || h < 1 {
        return bad("k and h must be at least 1");
    }
    if h > MAX_ITERATION_LEVEL {
        return bad(format!("level h capped at {MAX_ITERATION_LEVEL}"));
    }
    let inv_n_sq = BigRational::new(BigInt::one(), BigInt::from(n * n));
    if delta4 <= &BigRational::zero() || delta4 >= &inv_n_sq {
        return bad(format!("delta4 must lie in (0, 1/{})", n * n));
    }

    let log_n = LogValue::log2_of(&big(n))?;

    let alpha_exponent = BigInt::from(2u64).pow(k)
        * BigInt::from(n).pow(k - 1)
        * BigInt::from((1u64 << h) - 1);
    let alpha_log2 = log_n.scale(&-BigRational::from(alpha_exponent.clone()));
    let alpha_exact = alpha_exponent.to_u64().and_then(|e| {
        (e <= EXACT_EXPONENT_LIMIT)
            .then(|| BigRational::new(BigInt::one(), BigInt::from(n).pow(e as u32)))
    });

    // exponent h n (4 n log2 n)^(k-1), carried in log space
    let mut gamma_exponent = LogValue::constant(big(h as u64 * n));
    for _ in 0..k - 1 {
        gamma_exponent = gamma_exponent.mul(&log_n.scale(&big(4 * n)));
    }
    let base = delta4 / BigRational::from(BigInt::one() << (2 * h));
    let log_base = LogValue::log2_of(&base)?;
    let gamma_log2 = gamma_exponent.mul(&log_base);
    let gamma_exact = gamma_exponent.as_exact().and_then(|e| {
        if !e.is_integer() {
            return None;
        }
        e.to_integer()
            .to_u64()
            .and_then(|exp| (exp <= EXACT_EXPONENT_LIMIT).then(|| power(&base, exp as usize)))
    });

    Ok(MulticolorSchedule {
        alpha_log2,
        alpha_exponent,
        alpha_exact,
        gamma_log2,
        gamma_exact,
    })
}

/// Parameters of the edge-labeled host construction. `L`, `Q`, and ε are
/// exact; the clique-host bound `k ≤ (Qn)! / (n!)^Q` and everything downstream
/// (β = k⁻¹ ε^(k² ε⁻⁵), N = 32 L β⁻²) are documented floating-point estimates
/// in log space.
#[derive(Debug, Clone)]
pub struct LabeledParams {
    pub l: u64,
    pub q_cap: BigUint,
    pub epsilon: BigRational,
    pub log2_k_bound: f64,
    /// log2 of β⁻¹ (infinity when it exceeds f64 range; see the log-log field).
    pub log2_beta_inv: f64,
    pub log2_log2_beta_inv: f64,
    pub log2_log2_n_estimate: f64,
}

pub fn labeled_parameters(n: u64, m: u64, q: u64) -> Result<LabeledParams, BoundsError> {
    if n < 3 {
        return bad("n must be at least 3");
    }
    if m < 2 {
        return bad("m must be at least 2");
    }
    if q < 2 {
        return bad("q must be at least 2");
    }
    let l = q * (m - 1) + 1;
    let q_cap = BigUint::from(q) * binomial(l, m);
    let epsilon = power(
        &BigRational::new(BigInt::one(), BigInt::from(8 * q * l)),
        n as usize,
    );

    let q_f64 = q_cap.to_f64().unwrap_or(f64::INFINITY);
    let log2_k_bound = log2_factorial(q_f64 * n as f64) - q_f64 * log2_factorial(n as f64);

    let log2_inv_eps = n as f64 * ((8 * q * l) as f64).log2();
    // log2(k² ε⁻⁵) = 2 log2 k + 5 log2(1/ε)
    let a = 2.0 * log2_k_bound + 5.0 * log2_inv_eps;
    let log2_log2_beta_inv = a + log2_inv_eps.log2();
    let log2_beta_inv = if a < 900.0 {
        (2f64).powf(a) * log2_inv_eps + log2_k_bound
    } else {
        f64::INFINITY
    };
    let log2_log2_n_estimate = if log2_beta_inv.is_finite() {
        (5.0 + (l as f64).log2() + 2.0 * log2_beta_inv).log2()
    } else {
        log2_log2_beta_inv + 1.0
    };

    Ok(LabeledParams {
        l,
        q_cap,
        epsilon,
        log2_k_bound,
        log2_beta_inv,
        log2_log2_beta_inv,
        log2_log2_n_estimate,
    })
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k.min(n));
    let mut out = BigUint::one();
    for i in 0..k {
        out = out * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    out
}

/// log2(x!) — exact summation for small x, Stirling's series beyond.
fn log2_factorial(x: f64) -> f64 {
    if x < 2.0 {
        return 0.0;
    }
    if x <= 256.0 {
        let mut acc = 0.0;
        let mut i = 2.0;
        while i <= x {
            acc += i.log2();
            i += 1.0;
        }
        return acc;
    }
    let ln2 = std::f64::consts::LN_2;
    (x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)) / ln2
}

/// The dichotomy's sparseness triple for an n-vertex d-degenerate pattern at
/// threshold δ₁: (n⁻², δ₁^(d+1)/(n-d), δ₁).
pub fn lemma_dichotomy_parameters(
    n: usize,
    d: usize,
    delta1: &BigRational,
) -> Result<(BigRational, BigRational, BigRational), BoundsError> {
    if n < 2 || d < 1 || d > n - 1 {
        return bad("need n >= 2 and d in 1..=n-1");
    }
    let inv_n = BigRational::new(BigInt::one(), BigInt::from(n));
    if delta1 <= &BigRational::zero() || delta1 >= &inv_n {
        return bad(format!("delta1 must lie in (0, 1/{n})"));
    }
    let alpha = BigRational::new(BigInt::one(), BigInt::from(n * n));
    let gamma = power(delta1, d + 1) / BigRational::from(BigInt::from(n - d));
    Ok((alpha, gamma, delta1.clone()))
}
