//! Finite fields GF(p^m) backed by exponent and logarithm tables.
//!
//! Elements are carried in log-index form with an explicit zero marker, so
//! multiplication is an addition of exponents and addition goes through the
//! antilog table.  Values map to field elements by reading base-p digits as
//! polynomial coefficients in the residue ring defined by the modulus.

use crate::{Error, Result};
use std::sync::atomic::{AtomicU32, Ordering};

/// Largest supported field size; tables are dense, so stay at desk scale.
const MAX_FIELD_SIZE: u64 = 1 << 20;

/// Primitive polynomials over GF(2) for degrees 1..=16, as bit masks with the
/// least significant bit holding the constant term.
const BINARY_MODULI: [u32; 16] = [
    0b11,      // x + 1
    0b111,     // x^2 + x + 1
    0b1011,    // x^3 + x + 1
    0b10011,   // x^4 + x + 1
    0b100101,  // x^5 + x^2 + 1
    0b1000011, // x^6 + x + 1
    0b10001001,
    0b100011101,
    0b1000010001,
    0b10000001001,
    0b100000000101,
    0b1000001010011,
    0b10000000011011,
    0b100010000000011,
    0b1000000000000011,
    0b10001000000001011,
];

static NEXT_FIELD_ID: AtomicU32 = AtomicU32::new(1);

/// Element of a specific [`Field`], in log-index form.  `log == None` marks
/// the zero element; otherwise `log` lies in `[0, size - 2]`.
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: u32,
    log: Option<u32>,
}

impl std::fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.log {
            None => write!(f, "0"),
            Some(0) => write!(f, "1"),
            Some(l) => write!(f, "g^{l}"),
        }
    }
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.log.is_none()
    }

    /// Discrete log with respect to the field generator; `None` for zero.
    pub fn log(&self) -> Option<u32> {
        self.log
    }
}

/// GF(p^m) with dense exp/log tables over a fixed generator.
pub struct Field {
    id: u32,
    p: u32,
    m: u32,
    size: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl Field {
    /// Build GF(p^m).  Uses a table of primitive binary moduli when p = 2 and
    /// m <= 16, otherwise searches for an irreducible modulus; either way the
    /// modulus is re-checked irreducible by trial division.
    pub fn new(p: u32, m: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::invalid(format!("characteristic {p} is not prime")));
        }
        if m == 0 {
            return Err(Error::invalid("extension degree must be positive"));
        }
        let size = (p as u64).checked_pow(m).filter(|&s| s <= MAX_FIELD_SIZE);
        let Some(size) = size else {
            return Err(Error::capacity(format!(
                "field GF({p}^{m}) exceeds the table limit of 2^20 elements"
            )));
        };
        let size = size as u32;

        let modulus = if m == 1 {
            vec![0, 1] // x; residues are plain integers mod p
        } else if p == 2 && (m as usize) <= BINARY_MODULI.len() {
            mask_to_poly(BINARY_MODULI[m as usize - 1])
        } else {
            search_irreducible(p, m)?
        };
        if m > 1 && !is_irreducible(p, &modulus) {
            return Err(Error::construction(format!(
                "modulus for GF({p}^{m}) is not irreducible"
            )));
        }

        let mut field = Field {
            id: NEXT_FIELD_ID.fetch_add(1, Ordering::Relaxed),
            p,
            m,
            size,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
        };
        let generator = field.find_generator()?;
        field.fill_tables(generator)?;
        Ok(field)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// Number of elements, p^m.
    pub fn size(&self) -> u32 {
        self.size
    }

    /// Modulus polynomial coefficients, ascending degree.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: self.id,
            log: None,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            field: self.id,
            log: Some(0),
        }
    }

    /// Fixed multiplicative generator; every nonzero element is a power of it.
    pub fn generator(&self) -> FieldElement {
        FieldElement {
            field: self.id,
            log: Some(if self.size > 2 { 1 } else { 0 }),
        }
    }

    /// Element whose base-p digits are the polynomial coefficients.
    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if value >= self.size {
            return Err(Error::invalid(format!(
                "value {value} outside field of size {}",
                self.size
            )));
        }
        Ok(FieldElement {
            field: self.id,
            log: if value == 0 {
                None
            } else {
                Some(self.log[value as usize])
            },
        })
    }

    /// Value form of an element (base-p digit encoding of its polynomial).
    pub fn value(&self, a: FieldElement) -> u32 {
        self.check(a);
        match a.log {
            None => 0,
            Some(l) => self.exp[l as usize],
        }
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        let v = add_values(self.p, self.m, self.value(a), self.value(b));
        self.element(v).expect("sum stays inside the field")
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.check(a);
        if self.p == 2 {
            return a;
        }
        let v = self.value(a);
        let neg = scale_digits(self.p, self.m, v, self.p - 1);
        self.element(neg).expect("negation stays inside the field")
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        let log = match (a.log, b.log) {
            (Some(la), Some(lb)) => Some((la + lb) % (self.size - 1)),
            _ => None,
        };
        FieldElement {
            field: self.id,
            log,
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(a);
        match a.log {
            None => Err(Error::invalid("zero has no multiplicative inverse")),
            Some(l) => Ok(FieldElement {
                field: self.id,
                log: Some((self.size - 1 - l) % (self.size - 1)),
            }),
        }
    }

    /// a^e with e >= 0; 0^0 = 1 by convention.
    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        self.check(a);
        match a.log {
            None => {
                if e == 0 {
                    self.one()
                } else {
                    self.zero()
                }
            }
            Some(l) => FieldElement {
                field: self.id,
                log: Some(((l as u64 * (e % (self.size as u64 - 1))) % (self.size as u64 - 1)) as u32),
            },
        }
    }

    /// Multiplicative order of a nonzero element.
    pub fn order_of(&self, a: FieldElement) -> Result<u32> {
        self.check(a);
        match a.log {
            None => Err(Error::invalid("zero has no multiplicative order")),
            Some(l) => {
                let group = self.size - 1;
                Ok(group / gcd(group as u64, l as u64) as u32)
            }
        }
    }

    /// Primitive n-th root of unity: generator^((p^m - 1) / n).
    /// Requires n to divide p^m - 1.
    pub fn nth_root(&self, n: u32) -> Result<FieldElement> {
        if n == 0 || (self.size - 1) % n != 0 {
            return Err(Error::invalid(format!(
                "{n} does not divide the multiplicative group order {}",
                self.size - 1
            )));
        }
        Ok(FieldElement {
            field: self.id,
            log: Some(((self.size - 1) / n) % (self.size - 1)),
        })
    }

    /// Evaluate a polynomial with base-field coefficient values (ascending
    /// degree) at a point of this field, by Horner's rule.
    pub fn eval_poly(&self, coeffs: &[u32], point: FieldElement) -> Result<FieldElement> {
        self.check(point);
        let mut acc = self.zero();
        for &c in coeffs.iter().rev() {
            if c >= self.p {
                return Err(Error::invalid(format!(
                    "coefficient {c} is not a base-field value (p = {})",
                    self.p
                )));
            }
            acc = self.add(self.mul(acc, point), self.element(c)?);
        }
        Ok(acc)
    }

    fn check(&self, a: FieldElement) {
        debug_assert_eq!(a.field, self.id, "element used with a foreign field");
        debug_assert!(a.log.is_none_or(|l| l < self.size - 1));
    }

    /// Smallest value (in value order) generating the full multiplicative
    /// group, confirmed against the prime factors of p^m - 1.
    fn find_generator(&self) -> Result<u32> {
        let group = (self.size - 1) as u64;
        let primes = prime_factors(group);
        for cand in 1..self.size {
            let full_order = primes
                .iter()
                .all(|&f| pow_value(self.p, self.m, &self.modulus, cand, group / f) != 1);
            if group == 1 || full_order {
                return Ok(cand);
            }
        }
        Err(Error::construction(format!(
            "no generator found for GF({}^{})",
            self.p, self.m
        )))
    }

    fn fill_tables(&mut self, generator: u32) -> Result<()> {
        let group = (self.size - 1) as usize;
        self.exp = vec![0; group];
        self.log = vec![0; self.size as usize];
        let mut acc = 1u32;
        for i in 0..group {
            self.exp[i] = acc;
            self.log[acc as usize] = i as u32;
            acc = mul_values(self.p, self.m, &self.modulus, acc, generator);
        }
        if acc != 1 {
            return Err(Error::construction(
                "generator order does not close the multiplicative group",
            ));
        }
        Ok(())
    }
}

/// Multiplicative order of q modulo n; errors unless gcd(q, n) = 1.
pub fn multiplicative_order(q: u64, n: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::invalid("modulus must be positive"));
    }
    if gcd(q, n) != 1 {
        return Err(Error::invalid(format!("gcd({q}, {n}) != 1")));
    }
    if n == 1 {
        return Ok(1);
    }
    let q = q % n;
    let mut acc = q;
    let mut order = 1u32;
    while acc != 1 {
        acc = acc * q % n;
        order += 1;
    }
    Ok(order)
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn mask_to_poly(mask: u32) -> Vec<u32> {
    (0..=31 - mask.leading_zeros())
        .map(|i| (mask >> i) & 1)
        .collect()
}

// -- value-form arithmetic: base-p digit vectors packed into a u32 --

fn digits(p: u32, m: u32, mut v: u32) -> Vec<u32> {
    let mut out = vec![0; m as usize];
    for slot in out.iter_mut() {
        *slot = v % p;
        v /= p;
    }
    out
}

fn undigits(p: u32, ds: &[u32]) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn add_values(p: u32, m: u32, a: u32, b: u32) -> u32 {
    if p == 2 {
        return a ^ b;
    }
    let da = digits(p, m, a);
    let db = digits(p, m, b);
    let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
    undigits(p, &sum)
}

fn scale_digits(p: u32, m: u32, v: u32, s: u32) -> u32 {
    let dv = digits(p, m, v);
    let scaled: Vec<u32> = dv.iter().map(|d| d * s % p).collect();
    undigits(p, &scaled)
}

/// Polynomial product of value-form elements, reduced by the modulus.
fn mul_values(p: u32, m: u32, modulus: &[u32], a: u32, b: u32) -> u32 {
    if m == 1 {
        return ((a as u64 * b as u64) % p as u64) as u32;
    }
    let da = digits(p, m, a);
    let db = digits(p, m, b);
    let mut prod = vec![0u32; 2 * m as usize - 1];
    for (i, &x) in da.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // Reduce: modulus is monic of degree m.
    for deg in (m as usize..prod.len()).rev() {
        let coef = prod[deg];
        if coef == 0 {
            continue;
        }
        prod[deg] = 0;
        for (j, &mc) in modulus.iter().enumerate().take(m as usize) {
            let idx = deg - m as usize + j;
            prod[idx] = (prod[idx] + coef * (p - mc % p)) % p;
        }
    }
    undigits(p, &prod[..m as usize])
}

fn pow_value(p: u32, m: u32, modulus: &[u32], base: u32, mut e: u64) -> u32 {
    let mut acc = 1u32;
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_values(p, m, modulus, acc, b);
        }
        b = mul_values(p, m, modulus, b, b);
        e >>= 1;
    }
    acc
}

/// Irreducibility over GF(p) by trial division with every monic polynomial of
/// degree 1..=deg/2.
fn is_irreducible(p: u32, poly: &[u32]) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        // Candidate divisors: monic, degree d, encoded by their lower d coefficients.
        let count = (p as u64).pow(d as u32);
        for enc in 0..count {
            let mut div = digits_u64(p, d, enc);
            div.push(1);
            if poly_rem_is_zero(p, poly, &div) {
                return false;
            }
        }
    }
    true
}

fn digits_u64(p: u32, len: usize, mut v: u64) -> Vec<u32> {
    let mut out = vec![0; len];
    for slot in out.iter_mut() {
        *slot = (v % p as u64) as u32;
        v /= p as u64;
    }
    out
}

fn poly_rem_is_zero(p: u32, num: &[u32], div: &[u32]) -> bool {
    let mut rem: Vec<u32> = num.to_vec();
    let dd = div.len() - 1;
    while rem.len() > dd {
        let deg = rem.len() - 1;
        let lead = rem[deg];
        if lead != 0 {
            // div is monic, so subtracting lead * x^(deg-dd) * div clears the top term.
            for (j, &dc) in div.iter().enumerate() {
                let idx = deg - dd + j;
                rem[idx] = (rem[idx] + lead * (p - dc % p)) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c == 0)
}

fn search_irreducible(p: u32, m: u32) -> Result<Vec<u32>> {
    let count = (p as u64).pow(m);
    for enc in 0..count {
        let mut poly = digits_u64(p, m as usize, enc);
        poly.push(1);
        if poly[0] == 0 {
            continue; // divisible by x
        }
        if is_irreducible(p, &poly) {
            return Ok(poly);
        }
    }
    Err(Error::construction(format!(
        "no irreducible modulus of degree {m} over GF({p})"
    )))
}
