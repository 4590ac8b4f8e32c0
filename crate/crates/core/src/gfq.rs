//! Arithmetic over GF(q), q = p^m <= 1024.
//!
//! Elements are dense integers in `[0, q)`. For prime fields the integer is
//! the residue mod p. For extension fields the integer is read in base p and
//! digit `k` is the coefficient of `x^k` in the polynomial representation
//! modulo a fixed monic irreducible polynomial.
//!
//! The modulus for each `(p, m)` is the lexicographically smallest monic
//! irreducible polynomial, ordering candidates by the integer
//! `c_0 + c_1 p + ... + c_{m-1} p^{m-1}`. The transform constant `alpha` is 1
//! for prime fields and otherwise the smallest integer whose multiplicative
//! order is `q - 1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A field element, stored as its dense integer code.
pub type Symbol = u16;

/// Largest supported field order.
pub const MAX_FIELD_ORDER: usize = 1024;

/// Canonical moduli `(p, m, coefficients low -> high)` for every prime power
/// `p^m <= 1024` with `m > 1`.
pub const CANONICAL_MODULI: &[(usize, usize, &[u16])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 0, 0, 0, 1]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, 8, &[1, 1, 0, 1, 1, 0, 0, 0, 1]),
    (2, 9, &[1, 1, 0, 0, 0, 0, 0, 0, 0, 1]),
    (2, 10, &[1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1]),
    (3, 2, &[1, 0, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 1, 0, 0, 1]),
    (3, 5, &[1, 2, 0, 0, 0, 1]),
    (3, 6, &[2, 1, 0, 0, 0, 0, 1]),
    (5, 2, &[2, 0, 1]),
    (5, 3, &[1, 1, 0, 1]),
    (5, 4, &[2, 0, 0, 0, 1]),
    (7, 2, &[1, 0, 1]),
    (7, 3, &[2, 0, 0, 1]),
    (11, 2, &[1, 0, 1]),
    (13, 2, &[2, 0, 1]),
    (17, 2, &[3, 0, 1]),
    (19, 2, &[1, 0, 1]),
    (23, 2, &[1, 0, 1]),
    (29, 2, &[2, 0, 1]),
    (31, 2, &[1, 0, 1]),
];

/// Splits `q` into `(p, m)` with `q = p^m`, or `None` if `q` is not a prime power.
pub fn prime_power(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

struct Tables {
    add: Vec<Symbol>,
    sub: Vec<Symbol>,
    mul: Vec<Symbol>,
    inv: Vec<Symbol>,
    /// `sub_alpha[a * q + b] = a - alpha * b`
    sub_alpha: Vec<Symbol>,
}

/// An immutable description of GF(q) with precomputed operation tables.
///
/// Cloning is cheap; the tables are shared.
#[derive(Clone)]
pub struct FieldSpec {
    q: usize,
    p: usize,
    m: usize,
    modulus: Vec<u16>,
    alpha: Symbol,
    tables: Arc<Tables>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("q", &self.q)
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.modulus == other.modulus && self.alpha == other.alpha
    }
}

impl FieldSpec {
    /// Builds GF(q) with the canonical modulus and transform constant.
    pub fn new(q: usize) -> Result<Self> {
        if !(2..=MAX_FIELD_ORDER).contains(&q) {
            return match prime_power(q) {
                Some(_) => Err(Error::UnsupportedField(q)),
                None => Err(Error::NotPrimePower(q)),
            };
        }
        let (p, m) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        if m == 1 {
            return Ok(Self::build(p, 1, Vec::new()));
        }
        let modulus = CANONICAL_MODULI
            .iter()
            .find(|(pp, mm, _)| *pp == p && *mm == m)
            .map(|(_, _, c)| c.to_vec())
            .ok_or(Error::UnsupportedField(q))?;
        Self::with_modulus(p, &modulus)
    }

    /// Builds GF(p^m) from an explicit monic modulus (coefficients low -> high).
    ///
    /// The polynomial is checked for irreducibility by exhaustive trial
    /// division, and `alpha` is the smallest primitive element under it.
    pub fn with_modulus(p: usize, modulus: &[u16]) -> Result<Self> {
        let m = modulus.len().saturating_sub(1);
        if m < 2 || !is_prime(p) || modulus[m] != 1 || modulus.iter().any(|&c| c as usize >= p) {
            return Err(Error::InvalidModel(format!(
                "modulus {modulus:?} is not a monic polynomial of degree >= 2 over F_{p}"
            )));
        }
        let q = p.pow(m as u32);
        if q > MAX_FIELD_ORDER {
            return Err(Error::UnsupportedField(q));
        }
        if !is_irreducible(modulus, p) {
            return Err(Error::InvalidModel(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        Ok(Self::build(p, m, modulus.to_vec()))
    }

    fn build(p: usize, m: usize, modulus: Vec<u16>) -> Self {
        let q = p.pow(m as u32);
        let mut this = FieldSpec {
            q,
            p,
            m,
            modulus,
            alpha: 1,
            tables: Arc::new(Tables {
                add: Vec::new(),
                sub: Vec::new(),
                mul: Vec::new(),
                inv: Vec::new(),
                sub_alpha: Vec::new(),
            }),
        };
        let mut add = vec![0; q * q];
        let mut sub = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            for b in 0..q {
                let (sa, sb) = (a as Symbol, b as Symbol);
                add[a * q + b] = this.add_slow(sa, sb);
                sub[a * q + b] = this.add_slow(sa, this.neg_slow(sb));
                mul[a * q + b] = this.mul_slow(sa, sb);
            }
        }
        let mut inv = vec![0; q];
        for a in 1..q {
            inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).unwrap_or(0) as Symbol;
        }
        if m > 1 {
            // Smallest primitive element; 1 never is for q > 2.
            let order_of = |a: usize| {
                let mut x = a;
                let mut k = 1;
                while x != 1 {
                    x = mul[x * q + a] as usize;
                    k += 1;
                }
                k
            };
            this.alpha = (2..q).find(|&a| order_of(a) == q - 1).expect("GF(q)* is cyclic") as Symbol;
        }
        let alpha = this.alpha as usize;
        let mut sub_alpha = vec![0; q * q];
        for a in 0..q {
            for b in 0..q {
                sub_alpha[a * q + b] = sub[a * q + mul[alpha * q + b] as usize];
            }
        }
        this.tables = Arc::new(Tables { add, sub, mul, inv, sub_alpha });
        this
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Characteristic.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Extension degree.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Modulus coefficients, low -> high; empty for prime fields.
    pub fn modulus(&self) -> &[u16] {
        &self.modulus
    }

    /// The constant of the 2x2 kernel `u1 = x1 + alpha x2`.
    pub fn alpha(&self) -> Symbol {
        self.alpha
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        self.tables.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        self.tables.sub[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        self.tables.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: Symbol) -> Symbol {
        self.sub(0, a)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Symbol) -> Option<Symbol> {
        (a != 0).then(|| self.tables.inv[a as usize])
    }

    /// `a - alpha * b`, the per-kernel inverse used throughout the decoder.
    #[inline]
    pub fn sub_alpha(&self, a: Symbol, b: Symbol) -> Symbol {
        self.tables.sub_alpha[a as usize * self.q + b as usize]
    }

    /// Row `a` of the `a - alpha * v` table, indexed by `v`.
    #[inline]
    pub(crate) fn sub_alpha_row(&self, a: Symbol) -> &[Symbol] {
        let start = a as usize * self.q;
        &self.tables.sub_alpha[start..start + self.q]
    }

    /// `a + alpha * b`, the forward kernel.
    #[inline]
    pub fn add_alpha(&self, a: Symbol, b: Symbol) -> Symbol {
        self.add(a, self.mul(self.alpha, b))
    }

    pub fn contains(&self, a: Symbol) -> bool {
        (a as usize) < self.q
    }

    /// Multiplicative order of `a`, by repeated multiplication.
    pub fn order(&self, a: Symbol) -> Result<usize> {
        if a == 0 {
            return Err(Error::ZeroElement);
        }
        let mut x = a;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        Ok(k)
    }

    /// True iff `a` generates the multiplicative group.
    pub fn is_primitive(&self, a: Symbol) -> Result<bool> {
        Ok(self.order(a)? == self.q - 1)
    }

    fn digits(&self, a: Symbol) -> Vec<usize> {
        let mut a = a as usize;
        (0..self.m)
            .map(|_| {
                let d = a % self.p;
                a /= self.p;
                d
            })
            .collect()
    }

    fn from_digits(&self, d: &[usize]) -> Symbol {
        d.iter().rev().fold(0usize, |acc, &c| acc * self.p + c) as Symbol
    }

    /// Addition without tables.
    pub fn add_slow(&self, a: Symbol, b: Symbol) -> Symbol {
        if self.m == 1 {
            return ((a as usize + b as usize) % self.p) as Symbol;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let s: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.from_digits(&s)
    }

    fn neg_slow(&self, a: Symbol) -> Symbol {
        if self.m == 1 {
            return ((self.p - a as usize) % self.p) as Symbol;
        }
        let d: Vec<usize> = self.digits(a).iter().map(|x| (self.p - x) % self.p).collect();
        self.from_digits(&d)
    }

    /// Multiplication without tables: modular for prime fields, polynomial
    /// product reduced by the modulus otherwise.
    pub fn mul_slow(&self, a: Symbol, b: Symbol) -> Symbol {
        let p = self.p;
        if self.m == 1 {
            return ((a as usize * b as usize) % p) as Symbol;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0usize; 2 * self.m - 1];
        for (i, x) in da.iter().enumerate() {
            for (j, y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        // Modulus is monic: x^m = -(c_0 + ... + c_{m-1} x^{m-1}).
        for k in (self.m..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (j, &mc) in self.modulus[..self.m].iter().enumerate() {
                let t = k - self.m + j;
                prod[t] = (prod[t] + c * (p - mc as usize)) % p;
            }
        }
        self.from_digits(&prod[..self.m])
    }
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Remainder of `a` modulo monic `b` over F_p; coefficient vectors low -> high.
fn poly_rem(a: &[u16], b: &[u16], p: usize) -> Vec<usize> {
    let mut r: Vec<usize> = a.iter().map(|&c| c as usize).collect();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = r.pop().unwrap_or(0);
        if lead != 0 {
            let shift = r.len() - db;
            for (j, &bc) in b[..db].iter().enumerate() {
                r[shift + j] = (r[shift + j] + lead * (p - bc as usize)) % p;
            }
        }
    }
    r
}

/// Exhaustive irreducibility test: no monic factor of degree `1..=m/2`.
pub fn is_irreducible(f: &[u16], p: usize) -> bool {
    let m = f.len() - 1;
    for d in 1..=m / 2 {
        for v in 0..p.pow(d as u32) {
            let mut g: Vec<u16> = (0..d).map(|k| ((v / p.pow(k as u32)) % p) as u16).collect();
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_fields_use_unit_alpha() {
        for q in [2, 3, 5, 7, 67, 1021] {
            let f = FieldSpec::new(q).unwrap();
            assert_eq!((f.p(), f.m(), f.alpha()), (q, 1, 1));
        }
    }

    #[test]
    fn rejects_non_prime_powers() {
        for q in [0, 1, 6, 10, 12, 100, 1000] {
            assert!(matches!(FieldSpec::new(q), Err(Error::NotPrimePower(_))), "q={q}");
        }
        assert!(matches!(FieldSpec::new(2048), Err(Error::UnsupportedField(2048))));
    }

    #[test]
    fn gf4_alpha_is_x_with_order_three() {
        let f = FieldSpec::new(4).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        assert_eq!(f.alpha(), 2);
        // x, x^2 = x + 1, x^3 = 1
        let powers: Vec<Symbol> = (1..=3)
            .scan(1, |acc, _| {
                *acc = f.mul_slow(*acc, 2);
                Some(*acc)
            })
            .collect();
        assert_eq!(powers, vec![2, 3, 1]);
        assert_eq!(f.mul(2, 2), 3);
    }

    #[test]
    fn small_arithmetic_examples() {
        let f3 = FieldSpec::new(3).unwrap();
        assert_eq!(f3.sub(0, 2), 1);
        let f5 = FieldSpec::new(5).unwrap();
        assert_eq!(f5.add(2, 4), 1);
        assert!(f5.is_primitive(2).unwrap());
        assert!(!f5.is_primitive(1).unwrap());
        assert!(matches!(f5.is_primitive(0), Err(Error::ZeroElement)));
        let f2 = FieldSpec::new(2).unwrap();
        assert!(f2.is_primitive(1).unwrap());
    }

    #[test]
    fn canonical_moduli_are_minimal_irreducibles() {
        for &(p, m, coeffs) in CANONICAL_MODULI {
            assert!(is_irreducible(coeffs, p), "p={p} m={m}");
            // Every smaller candidate is reducible.
            let rank = |c: &[u16]| c[..m].iter().rev().fold(0usize, |a, &x| a * p + x as usize);
            for v in 0..rank(coeffs) {
                let mut g: Vec<u16> = (0..m).map(|k| ((v / p.pow(k as u32)) % p) as u16).collect();
                g.push(1);
                assert!(!is_irreducible(&g, p), "p={p} m={m} smaller candidate {g:?}");
            }
        }
    }

    #[test]
    fn every_supported_order_builds_with_primitive_alpha() {
        for q in 2..=MAX_FIELD_ORDER {
            if let Some((_, m)) = prime_power(q) {
                if m == 1 && q > 40 {
                    continue;
                }
                let f = FieldSpec::new(q).unwrap();
                if q > 2 && m > 1 {
                    assert!(f.is_primitive(f.alpha()).unwrap(), "q={q}");
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_up_to_32() {
        for q in [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 32] {
            let f = FieldSpec::new(q).unwrap();
            let all: Vec<Symbol> = (0..q as Symbol).collect();
            for &a in &all {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for &b in &all {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.sub(a, b), f.add(a, f.neg(b)));
                    assert_eq!(f.add(a, b), f.add_slow(a, b));
                    assert_eq!(f.mul(a, b), f.mul_slow(a, b));
                    for &c in &all {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_multiplication_is_bijective() {
        for q in [2, 3, 4, 8, 9, 16, 27, 64, 67, 256, 1024] {
            let f = FieldSpec::new(q).unwrap();
            let mut seen = vec![false; q];
            for a in 0..q as Symbol {
                seen[f.mul(f.alpha(), a) as usize] = true;
            }
            assert!(seen.iter().all(|&s| s), "q={q}");
        }
    }

    #[test]
    fn tables_match_slow_arithmetic_for_large_fields() {
        for q in [64, 243, 256, 625, 1024] {
            let f = FieldSpec::new(q).unwrap();
            for a in (0..q as Symbol).step_by(7) {
                for b in 0..q as Symbol {
                    assert_eq!(f.mul(a, b), f.mul_slow(a, b));
                    assert_eq!(f.add(a, b), f.add_slow(a, b));
                }
            }
        }
    }

    #[test]
    fn custom_reducible_modulus_is_rejected() {
        // x^2 + 1 = (x + 1)^2 over F_2
        assert!(FieldSpec::with_modulus(2, &[1, 0, 1]).is_err());
        let f = FieldSpec::with_modulus(2, &[1, 1, 1]).unwrap();
        assert_eq!(f, FieldSpec::new(4).unwrap());
    }
}
