//! Helpers for exact rationals viewed inside Q_p.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

fn vp_int(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (quo, rem) = m.div_rem(&pb);
        if !rem.is_zero() {
            return v;
        }
        m = quo;
        v += 1;
    }
}

/// p-adic valuation; `None` for zero.
pub fn vp(x: &Q, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(vp_int(x.numer(), p) - vp_int(x.denom(), p))
    }
}

/// Valuation with zero mapped to `i64::MAX`.
pub fn vp_or_inf(x: &Q, p: u64) -> i64 {
    vp(x, p).unwrap_or(i64::MAX)
}

pub fn big_pow(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// p^e as a rational, e of either sign.
pub fn p_pow(p: u64, e: i64) -> Q {
    if e >= 0 {
        Q::from_integer(big_pow(p, e as u32))
    } else {
        Q::new(BigInt::one(), big_pow(p, (-e) as u32))
    }
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let g = a.extended_gcd(m);
    debug_assert!(g.gcd.is_one());
    g.x.mod_floor(m)
}

/// Residue of the p-integral rational `y` modulo p^k, as an integer in [0, p^k).
pub fn residue_mod(y: &Q, p: u64, k: u32) -> BigInt {
    let m = big_pow(p, k);
    let n = y.numer().mod_floor(&m);
    let d = y.denom().mod_floor(&m);
    (n * mod_inverse(&d, &m)).mod_floor(&m)
}

/// Unit part of x (that is x / p^val(x)) modulo p^k.
pub fn unit_mod(x: &Q, p: u64, k: u32) -> BigInt {
    let v = vp(x, p).expect("unit_mod of zero");
    residue_mod(&(x * p_pow(p, -v)), p, k)
}

/// Leading unit digit u0 in {1, ..., p-1}.
pub fn unit_residue(x: &Q, p: u64) -> u64 {
    unit_mod(x, p, 1).to_u64().unwrap()
}

/// Canonical representative of x modulo p^e O: the rational k / p^j with
/// j = max(0, -val x) and 0 <= k < p^(e + j), or 0 when val(x) >= e.
pub fn reduce_mod(x: &Q, p: u64, e: i64) -> Q {
    let v = match vp(x, p) {
        None => return Q::zero(),
        Some(v) => v,
    };
    if v >= e {
        return Q::zero();
    }
    let j = (-v).max(0);
    let y = x * p_pow(p, j);
    let k = residue_mod(&y, p, (e + j) as u32);
    Q::new(k, big_pow(p, j as u32))
}

/// Whether x lies in p^e O.
pub fn in_ideal(x: &Q, p: u64, e: i64) -> bool {
    vp(x, p).is_none_or(|v| v >= e)
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Q::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Q::from_integer(n))
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Legendre symbol (a/p) for a unit residue a.
pub fn legendre(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let mut r = 1u64;
    let mut b = a;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

/// Smallest positive integer that is a non-square modulo p.
pub fn smallest_nonsquare(p: u64) -> u64 {
    (2..p).find(|&a| legendre(a, p) == -1).expect("p odd prime")
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}
