//! Extended-precision reference arithmetic for the numerical test suites.
//!
//! A small sign/magnitude binary float on top of `BigUint` (1600-bit
//! mantissas, ~480 decimal digits) supports exactly the operations the
//! reference values need: field arithmetic, integer powers, n-th roots, and
//! a handful of classical constants.  Everything is built from rational
//! data and algebraic operations, so no step depends on the `f64` routines
//! under test:
//!
//! * `pi` comes from Machin's formula (two arctangent series of rational
//!   arguments), `e` from its factorial series.
//! * `Gamma(p/q)` reduces the argument into `[1, 2)` with the functional
//!   equation and evaluates the lower incomplete gamma series at the cutoff
//!   `R = 2048`; the truncated upper tail is below `10^-880`, far under the
//!   working precision.  `R` being a power of two keeps `R^j` an exact
//!   shift and `R^(p/q)` an exact shift times a q-th root of a small
//!   integer.
//! * The Mittag-Leffler series advances the needed `Gamma(alpha k + beta)`
//!   values along residue classes of k (the argument grows by an integer
//!   every `q_alpha` terms), so only a few base gamma evaluations are ever
//!   required, and the recurrence itself is exact rational multiplication.
//!
//! The `self_check` test in the reference suite pins the constants against
//! memorised 50-digit literals and the gamma code against reflection
//! identities before any comparison with the code under test.

#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigUint;

/// Working mantissa width in bits (~481 decimal digits).
pub const PREC: u64 = 1600;
/// Mantissas are trimmed once they exceed `PREC + SLACK` bits.
const SLACK: u64 = 64;

/// Sign/magnitude binary float: value = sign * mant * 2^exp.
#[derive(Clone, Debug)]
pub struct Big {
    neg: bool,
    mant: BigUint,
    exp: i64,
}

impl Big {
    pub fn zero() -> Self {
        Big { neg: false, mant: BigUint::from(0u32), exp: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Big { neg: n < 0, mant: BigUint::from(n.unsigned_abs()), exp: 0 }.normalized()
    }

    pub fn from_ratio(num: i64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        Big::from_int(num) / Big::from_int(den as i64)
    }

    /// Exact conversion: every finite f64 is a dyadic rational.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite f64");
        if x == 0.0 {
            return Big::zero();
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let exp_field = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if exp_field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        Big { neg, mant: BigUint::from(mant), exp }.normalized()
    }

    /// Parses a positive decimal literal "d.ddd..." (sanity pins only).
    pub fn from_decimal(s: &str) -> Self {
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        let digits: String = format!("{int_part}{frac_part}");
        let n = BigUint::parse_bytes(digits.as_bytes(), 10).expect("decimal literal");
        let value = Big { neg: false, mant: n, exp: 0 }.normalized();
        let scale = Big::from_int(10).powi(frac_part.len() as u64);
        value / scale
    }

    pub fn is_zero(&self) -> bool {
        self.mant == BigUint::from(0u32)
    }

    pub fn abs(mut self) -> Self {
        self.neg = false;
        self
    }

    pub fn neg(mut self) -> Self {
        if !self.is_zero() {
            self.neg = !self.neg;
        }
        self
    }

    /// log2 of the magnitude, rounded up; i64::MIN for zero.
    fn mag_log2(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + self.mant.bits() as i64
        }
    }

    /// True when adding `self` to `other` cannot move the top
    /// `PREC` bits of `other`.
    pub fn negligible_against(&self, other: &Big) -> bool {
        if self.is_zero() {
            return true;
        }
        if other.is_zero() {
            return false;
        }
        self.mag_log2() + (PREC as i64) + 24 < other.mag_log2()
    }

    fn normalized(mut self) -> Self {
        let bits = self.mant.bits();
        let cap = PREC + SLACK;
        if bits > cap {
            let shift = bits - cap;
            self.mant >>= shift;
            self.exp += shift as i64;
        }
        if self.is_zero() {
            self.neg = false;
            self.exp = 0;
        }
        self
    }

    pub fn shl(mut self, k: u64) -> Self {
        if !self.is_zero() {
            self.exp += k as i64;
        }
        self
    }

    pub fn mul_small(mut self, k: u64) -> Self {
        self.mant *= BigUint::from(k);
        self.normalized()
    }

    pub fn div_small(mut self, k: u64) -> Self {
        assert!(k != 0);
        // Pad so the quotient keeps full precision.
        let pad = 64u64;
        self.mant <<= pad;
        self.exp -= pad as i64;
        self.mant /= BigUint::from(k);
        self.normalized()
    }

    pub fn powi(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Big::from_int(1);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            n >>= 1;
        }
        acc
    }

    pub fn recip(&self) -> Self {
        Big::from_int(1) / self.clone()
    }

    /// Positive n-th root by Newton iteration seeded from f64.
    pub fn nth_root(&self, n: u32) -> Self {
        assert!(!self.neg && !self.is_zero(), "nth_root needs a positive value");
        assert!(n >= 1);
        if n == 1 {
            return self.clone();
        }
        // Seed from a scaled f64 to dodge overflow for extreme exponents.
        let log2 = self.mag_log2();
        let scale_pow = log2.div_euclid(n as i64) * n as i64;
        let scaled = Big { neg: false, mant: self.mant.clone(), exp: self.exp - scale_pow };
        let seed = scaled.to_f64().powf(1.0 / n as f64);
        let mut y = Big::from_f64(seed);
        y.exp += scale_pow / n as i64;
        let nf = Big::from_int(n as i64);
        let n1 = Big::from_int(n as i64 - 1);
        for _ in 0..9 {
            let y_pow = y.powi(n as u64 - 1);
            y = (n1.clone() * y.clone() + self.clone() / y_pow) / nf.clone();
        }
        y
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let (top, exp) = if bits > 63 {
            let shift = bits - 63;
            let top: BigUint = self.mant.clone() >> shift;
            (top.to_u64_digits()[0], self.exp + shift as i64)
        } else {
            (self.mant.to_u64_digits()[0], self.exp)
        };
        let sign = if self.neg { -1.0 } else { 1.0 };
        sign * top as f64 * 2f64.powi(exp.clamp(-2000, 2000) as i32)
    }

    /// |self - x| as f64 (for tolerance assertions against the code under
    /// test).
    pub fn abs_diff_f64(&self, x: f64) -> f64 {
        (self.clone() - Big::from_f64(x)).abs().to_f64()
    }

    /// |self - x| / max(|self|, tiny) as f64.
    pub fn rel_diff_f64(&self, x: f64) -> f64 {
        let denom = self.clone().abs().to_f64().max(1e-300);
        self.abs_diff_f64(x) / denom
    }
}

impl std::ops::Add for Big {
    type Output = Big;
    fn add(self, rhs: Big) -> Big {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        if self.negligible_against(&rhs) {
            return rhs;
        }
        if rhs.negligible_against(&self) {
            return self;
        }
        // Align to the smaller exponent by shifting the larger one left.
        let exp = self.exp.min(rhs.exp);
        let a = self.mant << (self.exp - exp) as u64;
        let b = rhs.mant << (rhs.exp - exp) as u64;
        let (neg, mant) = if self.neg == rhs.neg {
            (self.neg, a + b)
        } else if a >= b {
            (self.neg, a - b)
        } else {
            (rhs.neg, b - a)
        };
        Big { neg, mant, exp }.normalized()
    }
}

impl std::ops::Sub for Big {
    type Output = Big;
    // Subtraction delegates to addition of the negated operand.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: Big) -> Big {
        self + rhs.neg()
    }
}

impl std::ops::Mul for Big {
    type Output = Big;
    fn mul(self, rhs: Big) -> Big {
        Big { neg: self.neg != rhs.neg, mant: self.mant * rhs.mant, exp: self.exp + rhs.exp }
            .normalized()
    }
}

impl std::ops::Div for Big {
    type Output = Big;
    fn div(self, rhs: Big) -> Big {
        assert!(!rhs.is_zero(), "division by zero");
        if self.is_zero() {
            return Big::zero();
        }
        let shift = PREC + SLACK + rhs.mant.bits();
        let mant = (self.mant << shift) / rhs.mant;
        Big { neg: self.neg != rhs.neg, mant, exp: self.exp - rhs.exp - shift as i64 }.normalized()
    }
}

/// arctan(1/k) by its alternating series (rational argument).
fn atan_inv(k: u64) -> Big {
    let inv_k2 = Big::from_ratio(1, k * k);
    let mut power = Big::from_ratio(1, k);
    let mut sum = Big::zero();
    let mut j = 0u64;
    loop {
        let term = power.clone().div_small(2 * j + 1);
        let next =
            if j.is_multiple_of(2) { sum.clone() + term.clone() } else { sum.clone() - term.clone() };
        if term.negligible_against(&next) && j > 0 {
            return next;
        }
        sum = next;
        power = power * inv_k2.clone();
        j += 1;
    }
}

/// pi = 16 atan(1/5) - 4 atan(1/239) (Machin).
pub fn pi() -> Big {
    static CACHE: OnceLock<Big> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            atan_inv(5).mul_small(16) - atan_inv(239).mul_small(4)
        })
        .clone()
}

/// e = sum 1/k!.
pub fn e_const() -> Big {
    static CACHE: OnceLock<Big> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let mut term = Big::from_int(1);
            let mut sum = Big::from_int(1);
            let mut k = 1u64;
            loop {
                term = term.div_small(k);
                let next = sum.clone() + term.clone();
                if term.negligible_against(&next) {
                    return next;
                }
                sum = next;
                k += 1;
            }
        })
        .clone()
}

/// Incomplete-gamma cutoff; a power of two so `R^j` and `R^(p/q)` stay
/// exact shifts (up to one small-integer q-th root).
const GAMMA_CUTOFF_LOG2: u64 = 11;

/// Gamma(p/q) for p/q in (0, 2): lower incomplete gamma series at
/// R = 2^11, `gamma(x, R) = R^x e^-R sum_j R^j / (x (x+1) ... (x+j))`.
fn gamma_base(p: u64, q: u64) -> Big {
    let r_log2 = GAMMA_CUTOFF_LOG2;
    let r = 1u64 << r_log2;
    let mut term = Big::from_ratio(q as i64, p);
    let mut sum = term.clone();
    let mut j = 1u64;
    loop {
        term = term.shl(r_log2).mul_small(q).div_small(p + j * q);
        let next = sum.clone() + term.clone();
        if j > r && term.negligible_against(&next) {
            sum = next;
            break;
        }
        sum = next;
        j += 1;
    }
    // R^(p/q) = 2^(r_log2 p / q): integer shift times q-th root of 2^rem.
    let total = r_log2 * p;
    let (whole, rem) = (total / q, total % q);
    let root = Big::from_int(1).shl(rem).nth_root(q as u32);
    let r_pow = root.shl(whole);
    let e_neg_r = e_const().recip().powi(r);
    sum * r_pow * e_neg_r
}

/// Gamma at a positive rational, reduced into the base strip by the
/// functional equation `Gamma(x) = (x-1) Gamma(x-1)` (exact rational
/// multiplications).  Base values are cached per (p, q).
pub fn gamma_rational(p: u64, q: u64) -> Big {
    assert!(p > 0 && q > 0);
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Big>>> = OnceLock::new();
    let mut pp = p;
    let mut factor = Big::from_int(1);
    while pp >= 2 * q {
        pp -= q;
        factor = factor * Big::from_ratio(pp as i64, q);
    }
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let base = {
        let mut guard = cache.lock().unwrap();
        guard.entry((pp, q)).or_insert_with(|| gamma_base(pp, q)).clone()
    };
    factor * base
}

/// Reference Mittag-Leffler sum `E_{alpha,beta}(z)` for rational
/// parameters `alpha = pa/qa`, `beta = pb/qb` and arbitrary `Big` z.
///
/// Returns the value together with the largest term's magnitude exponent
/// (base 2), so callers can assert the working precision dominated the
/// alternating-series cancellation.
pub fn mlf_reference(alpha: (u64, u64), beta: (u64, u64), z: &Big) -> (Big, i64) {
    let (pa, qa) = alpha;
    let (pb, qb) = beta;
    // Common denominator for the gamma arguments alpha k + beta.
    let q = qa * qb;
    let step = pa * qb; // numerator increment per k
    let base_num = pb * qa;

    // Gamma(alpha k + beta) advances by the integer `pa * qb / q * qa`...
    // more directly: k -> k + qa adds exactly `pa` to the argument, so each
    // residue class of k mod qa supports an exact upward recurrence.
    let mut gammas: Vec<Big> = Vec::with_capacity(qa as usize);
    let mut args: Vec<u64> = Vec::with_capacity(qa as usize);
    for j in 0..qa {
        let num = base_num + step * j;
        gammas.push(gamma_rational(num, q));
        args.push(num);
    }

    let mut sum = Big::zero();
    let mut zpow = Big::from_int(1);
    let mut max_term_log2 = i64::MIN;
    let mut k = 0u64;
    loop {
        let class = (k % qa) as usize;
        if k >= qa {
            // Advance the cached gamma by pa integer steps:
            // Gamma(x + pa) = Gamma(x) * x (x+1) ... (x + pa - 1)
            // with x = args[class]/q.
            let mut g = gammas[class].clone();
            for i in 0..pa {
                g = g * Big::from_ratio((args[class] + i * q) as i64, q);
            }
            gammas[class] = g;
            args[class] += pa * q;
        }
        let term = zpow.clone() / gammas[class].clone();
        max_term_log2 = max_term_log2.max(term.mag_log2());
        let next = sum.clone() + term.clone();
        let past_peak = {
            // Terms shrink once Gamma growth beats |z|^k: compare the
            // argument against |z|^(1/alpha) in low precision.
            let arg = (args[class] as f64) / q as f64;
            let zmag = z.clone().abs().to_f64();
            arg > zmag.powf(qa as f64 / pa as f64) + 2.0
        };
        if past_peak && term.negligible_against(&next) && k > 2 {
            return (next, max_term_log2);
        }
        sum = next;
        zpow = zpow * z.clone();
        k += 1;
        assert!(k < 100_000, "reference Mittag-Leffler series did not converge");
    }
}
