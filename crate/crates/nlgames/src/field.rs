//! Exact arithmetic in prime fields F_p.
//!
//! Every polynomial and every referee protocol in this crate works over a
//! prime field. Moduli are restricted to `< 2^62` so that products fit in
//! `u128` without overflow; primality is checked deterministically at
//! construction.

use crate::error::{Error, Result};
use rand::RngCore;

/// A prime field, identified by its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldParams {
    modulus: u64,
}

/// An element of a prime field. Carries its field so that operations
/// between elements of different fields are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    field: FieldParams,
}

/// Operation selector for the checked [`arith`] entry point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Neg,
    Inv,
    Pow(u64),
}

const MAX_MODULUS: u64 = 1 << 62;

/// Constructs the field F_p, verifying that `p` is prime.
pub fn make_field(modulus: u64) -> Result<FieldParams> {
    if modulus < 2 || modulus >= MAX_MODULUS {
        return Err(Error::ModulusRange(modulus));
    }
    if !is_prime(modulus) {
        return Err(Error::NotPrime(modulus));
    }
    Ok(FieldParams { modulus })
}

impl FieldParams {
    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Bits needed to write down one element.
    pub fn bit_length(&self) -> u32 {
        64 - (self.modulus - 1).max(1).leading_zeros()
    }

    #[inline]
    pub fn elem(&self, value: u64) -> FieldElem {
        FieldElem { value: value % self.modulus, field: *self }
    }

    pub fn zero(&self) -> FieldElem {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElem {
        self.elem(1)
    }

    /// All field elements in order 0, 1, ..., p-1.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.modulus).map(move |v| self.elem(v))
    }

    #[inline]
    pub fn add_raw(&self, a: u64, b: u64) -> u64 {
        let s = a + b; // both < 2^62, no overflow
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub_raw(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.modulus - (b - a)
        }
    }

    #[inline]
    pub fn mul_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    #[inline]
    pub fn neg_raw(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    /// Square-and-multiply exponentiation.
    pub fn pow_raw(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        base %= self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse by Fermat's little theorem; errors on zero.
    pub fn inv_raw(&self, a: u64) -> Result<u64> {
        if a % self.modulus == 0 {
            return Err(Error::DivisionByZero(self.modulus));
        }
        Ok(self.pow_raw(a, self.modulus - 2))
    }

    /// Uniform element via rejection sampling from the raw stream, so the
    /// draw sequence is independent of platform integer widths.
    pub fn sample_uniform<R: RngCore>(&self, rng: &mut R) -> FieldElem {
        let p = self.modulus;
        let zone = u64::MAX - (u64::MAX % p);
        loop {
            let x = rng.next_u64();
            if x < zone {
                return self.elem(x % p);
            }
        }
    }

    /// Uniform point of F_p^m.
    pub fn sample_point<R: RngCore>(&self, m: usize, rng: &mut R) -> Vec<FieldElem> {
        (0..m).map(|_| self.sample_uniform(rng)).collect()
    }
}

impl FieldElem {
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn field(&self) -> FieldParams {
        self.field
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn pow(&self, exp: u64) -> FieldElem {
        FieldElem { value: self.field.pow_raw(self.value, exp), field: self.field }
    }

    pub fn inv(&self) -> Result<FieldElem> {
        Ok(FieldElem { value: self.field.inv_raw(self.value)?, field: self.field })
    }

    fn check_same(&self, other: &FieldElem) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.modulus, other.field.modulus));
        }
        Ok(())
    }
}

/// Checked arithmetic matching the operation contract; rejects mixed-field
/// operands and inversion of zero.
pub fn arith(op: ArithOp, a: FieldElem, b: Option<FieldElem>) -> Result<FieldElem> {
    let f = a.field;
    let bin = |b: Option<FieldElem>| -> Result<FieldElem> {
        let b = b.ok_or_else(|| Error::InvalidStrategy("missing operand".into()))?;
        a.check_same(&b)?;
        Ok(b)
    };
    Ok(match op {
        ArithOp::Add => f.elem(f.add_raw(a.value, bin(b)?.value)),
        ArithOp::Sub => f.elem(f.sub_raw(a.value, bin(b)?.value)),
        ArithOp::Mul => f.elem(f.mul_raw(a.value, bin(b)?.value)),
        ArithOp::Neg => f.elem(f.neg_raw(a.value)),
        ArithOp::Inv => a.inv()?,
        ArithOp::Pow(e) => a.pow(e),
    })
}

macro_rules! elem_binop {
    ($trait:ident, $method:ident, $raw:ident) => {
        impl std::ops::$trait for FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: FieldElem) -> FieldElem {
                self.check_same(&rhs).expect("field mismatch");
                FieldElem {
                    value: self.field.$raw(self.value, rhs.value),
                    field: self.field,
                }
            }
        }
    };
}

elem_binop!(Add, add, add_raw);
elem_binop!(Sub, sub, sub_raw);
elem_binop!(Mul, mul, mul_raw);

impl std::ops::Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem { value: self.field.neg_raw(self.value), field: self.field }
    }
}

impl std::fmt::Display for FieldElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Deterministic Miller-Rabin, exact for all u64 with these witnesses.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        a %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime >= n, for field-size selection in the reductions.
pub fn next_prime(mut n: u64) -> u64 {
    if n <= 2 {
        return 2;
    }
    if n % 2 == 0 {
        n += 1;
    }
    while !is_prime(n) {
        n += 2;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;

    #[test]
    fn make_field_checks_primality() {
        assert!(make_field(17).is_ok());
        assert!(matches!(make_field(15), Err(Error::NotPrime(15))));
        assert!(matches!(make_field(1), Err(Error::ModulusRange(1))));
        // F_2, the field with two elements
        let f2 = make_field(2).unwrap();
        assert_eq!(f2.modulus(), 2);
    }

    #[test]
    fn basic_arithmetic() {
        let f5 = make_field(5).unwrap();
        assert_eq!((f5.elem(3) + f5.elem(4)).value(), 2);
        let f7 = make_field(7).unwrap();
        assert_eq!(f7.elem(2).inv().unwrap().value(), 4);
        let f17 = make_field(17).unwrap();
        assert_eq!(f17.elem(3).pow(16).value(), 1);
    }

    #[test]
    fn error_paths() {
        let f5 = make_field(5).unwrap();
        let f7 = make_field(7).unwrap();
        assert!(matches!(
            arith(ArithOp::Add, f5.elem(1), Some(f7.elem(1))),
            Err(Error::FieldMismatch(5, 7))
        ));
        assert!(matches!(
            arith(ArithOp::Inv, f5.elem(0), None),
            Err(Error::DivisionByZero(5))
        ));
    }

    #[test]
    fn fermat_property_all_nonzero() {
        for p in [2u64, 5, 17, 101] {
            let f = make_field(p).unwrap();
            for x in 1..p {
                assert_eq!(f.elem(x).pow(p - 1).value(), 1);
            }
        }
    }

    #[test]
    fn field_axioms_random_triples() {
        let mut rng = StreamSeed::new(11, "field-axioms").rng();
        for p in [2u64, 5, 17, 101] {
            let f = make_field(p).unwrap();
            for _ in 0..10_000 {
                let a = f.sample_uniform(&mut rng);
                let b = f.sample_uniform(&mut rng);
                let c = f.sample_uniform(&mut rng);
                assert_eq!((a + b) + c, a + (b + c));
                assert_eq!((a * b) * c, a * (b * c));
                assert_eq!(a * (b + c), a * b + a * c);
                assert_eq!(a + (-a), f.zero());
                if !a.is_zero() {
                    assert_eq!(a * a.inv().unwrap(), f.one());
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_in_range() {
        let seed = StreamSeed::new(42, "field-sample");
        let a = make_field(17).unwrap().sample_uniform(&mut seed.rng());
        let b = make_field(17).unwrap().sample_uniform(&mut seed.rng());
        assert_eq!(a, b);
        let f2 = make_field(2).unwrap();
        let mut rng = seed.rng();
        for _ in 0..100 {
            assert!(f2.sample_uniform(&mut rng).value() < 2);
        }
    }

    #[test]
    fn next_prime_walks_upward() {
        assert_eq!(next_prime(10), 11);
        assert_eq!(next_prime(11), 11);
        assert_eq!(next_prime(14), 17);
    }

    #[test]
    fn uniformity_chi_square_p17() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let f = make_field(17).unwrap();
        let mut rng = StreamSeed::new(5, "field-chi2").rng();
        let n = 100_000usize;
        let mut counts = [0usize; 17];
        for _ in 0..n {
            counts[f.sample_uniform(&mut rng).value() as usize] += 1;
        }
        let expected = n as f64 / 17.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        let p_value = 1.0 - ChiSquared::new(16.0).unwrap().cdf(stat);
        assert!(p_value > 0.001, "chi-square stat {stat}, p {p_value}");
    }
}
