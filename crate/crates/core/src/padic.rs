//! Arithmetic in Q_p with pessimistic precision tracking.
//!
//! A known scalar stands for the coset `p^v * u + p^(v+n) O` where `u` is a
//! unit known modulo `p^n`. Scalars built from rationals additionally carry
//! the exact value; operations between exact scalars stay exact, which is the
//! fast path every downstream engine relies on.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{
    big_pow, is_prime, legendre, mod_inverse, p_pow, smallest_nonsquare, unit_mod, vp, Q,
};

pub const DEFAULT_PRECISION: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldConfig {
    pub p: u64,
    pub precision: u32,
}

impl FieldConfig {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        if !is_prime(p) || p == 2 {
            return Err(Error::InvalidConfig(format!("p = {p} must be an odd prime")));
        }
        if precision < 4 {
            return Err(Error::InvalidConfig(format!(
                "precision {precision} is below the minimum of 4 digits"
            )));
        }
        Ok(Self { p, precision })
    }

    pub fn with_prime(p: u64) -> Result<Self> {
        Self::new(p, DEFAULT_PRECISION)
    }

    /// Cardinality of the residue field.
    pub fn q(&self) -> u64 {
        self.p
    }

    /// The fixed non-square unit: smallest positive non-residue mod p.
    pub fn eps(&self) -> u64 {
        smallest_nonsquare(self.p)
    }

    /// Uniformizer; val(zeta) = 1.
    pub fn zeta(&self) -> PadicScalar {
        PadicScalar::from_q(&Q::from_integer(BigInt::from(self.p)), *self)
    }
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { p: 5, precision: DEFAULT_PRECISION }
    }
}

/// Element of F*/(F*)^2, a Klein four-group for p odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SquareClass {
    One,
    Eps,
    Pi,
    EpsPi,
}

impl SquareClass {
    pub const ALL: [SquareClass; 4] = [Self::One, Self::Eps, Self::Pi, Self::EpsPi];

    pub fn from_parts(odd_valuation: bool, nonsquare_unit: bool) -> Self {
        match (odd_valuation, nonsquare_unit) {
            (false, false) => Self::One,
            (false, true) => Self::Eps,
            (true, false) => Self::Pi,
            (true, true) => Self::EpsPi,
        }
    }

    pub fn odd_valuation(self) -> bool {
        matches!(self, Self::Pi | Self::EpsPi)
    }

    pub fn nonsquare_unit(self) -> bool {
        matches!(self, Self::Eps | Self::EpsPi)
    }

    pub fn mul(self, other: Self) -> Self {
        Self::from_parts(
            self.odd_valuation() ^ other.odd_valuation(),
            self.nonsquare_unit() ^ other.nonsquare_unit(),
        )
    }

    /// Canonical representative 1, eps, p or eps*p.
    pub fn representative(self, cfg: FieldConfig) -> Q {
        let mut r = Q::one();
        if self.nonsquare_unit() {
            r *= Q::from_integer(BigInt::from(cfg.eps()));
        }
        if self.odd_valuation() {
            r *= Q::from_integer(BigInt::from(cfg.p));
        }
        r
    }

    /// Class of a nonzero rational.
    pub fn of_rational(x: &Q, p: u64) -> Self {
        let v = vp(x, p).expect("square class of zero");
        let u0 = unit_mod(x, p, 1).to_u64().unwrap();
        Self::from_parts(v.rem_euclid(2) == 1, legendre(u0, p) == -1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::One => "One",
            Self::Eps => "Eps",
            Self::Pi => "Pi",
            Self::EpsPi => "EpsPi",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "one" | "1" => Ok(Self::One),
            "eps" => Ok(Self::Eps),
            "pi" => Ok(Self::Pi),
            "epspi" | "eps_pi" => Ok(Self::EpsPi),
            other => Err(Error::Parse(format!("unknown square class '{other}'"))),
        }
    }
}

/// A quadratic extension E = F(sqrt d), d a non-square class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuadExtDescriptor {
    Eps,
    Pi,
    EpsPi,
}

impl QuadExtDescriptor {
    pub const ALL: [QuadExtDescriptor; 3] = [Self::Eps, Self::Pi, Self::EpsPi];

    pub fn from_class(c: SquareClass) -> Option<Self> {
        match c {
            SquareClass::One => None,
            SquareClass::Eps => Some(Self::Eps),
            SquareClass::Pi => Some(Self::Pi),
            SquareClass::EpsPi => Some(Self::EpsPi),
        }
    }

    pub fn class(self) -> SquareClass {
        match self {
            Self::Eps => SquareClass::Eps,
            Self::Pi => SquareClass::Pi,
            Self::EpsPi => SquareClass::EpsPi,
        }
    }

    pub fn is_ramified(self) -> bool {
        self != Self::Eps
    }

    pub fn discriminant(self, cfg: FieldConfig) -> Q {
        self.class().representative(cfg)
    }

    /// Norm test for a nonzero rational via the Hilbert symbol (d, x).
    pub fn is_norm_rational(self, x: &Q, p: u64) -> bool {
        let d = self.class();
        hilbert_from_parts(
            (d.odd_valuation() as i64, if d.nonsquare_unit() { -1 } else { 1 }),
            (
                vp(x, p).expect("norm test of zero"),
                legendre(unit_mod(x, p, 1).to_u64().unwrap(), p),
            ),
            p,
        ) == 1
    }

    /// Norm test for any element of the square class `c`.
    pub fn is_norm_class(self, c: SquareClass, p: u64) -> bool {
        let parts = |s: SquareClass| (s.odd_valuation() as i64, if s.nonsquare_unit() { -1 } else { 1 });
        hilbert_from_parts(parts(self.class()), parts(c), p) == 1
    }

    pub fn name(self) -> &'static str {
        self.class().name()
    }
}

/// (a, b)_p from (valuation, Legendre symbol of the unit part) pairs.
fn hilbert_from_parts(a: (i64, i32), b: (i64, i32), p: u64) -> i32 {
    let (alpha, la) = a;
    let (beta, lb) = b;
    let mut s = 1;
    if (alpha * beta).rem_euclid(2) == 1 && ((p - 1) / 2) % 2 == 1 {
        s = -s;
    }
    if beta.rem_euclid(2) == 1 {
        s *= la;
    }
    if alpha.rem_euclid(2) == 1 {
        s *= lb;
    }
    s
}

#[derive(Clone, Debug)]
enum Repr {
    Zero,
    Known {
        val: i64,
        /// Unit part modulo p^prec; its residue mod p is nonzero.
        unit: BigInt,
        prec: u32,
        exact: Option<Q>,
    },
}

#[derive(Clone, Debug)]
pub struct PadicScalar {
    cfg: FieldConfig,
    repr: Repr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl PadicScalar {
    pub fn zero(cfg: FieldConfig) -> Self {
        Self { cfg, repr: Repr::Zero }
    }

    pub fn from_rational(num: i64, den: i64, cfg: FieldConfig) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::from_q(&Q::new(BigInt::from(num), BigInt::from(den)), cfg))
    }

    pub fn from_q(x: &Q, cfg: FieldConfig) -> Self {
        match vp(x, cfg.p) {
            None => Self::zero(cfg),
            Some(val) => Self {
                cfg,
                repr: Repr::Known {
                    val,
                    unit: unit_mod(x, cfg.p, cfg.precision),
                    prec: cfg.precision,
                    exact: Some(x.clone()),
                },
            },
        }
    }

    /// An inexact scalar p^val * (d0 + d1 p + ...) known to `digits.len()` digits.
    pub fn from_digits(val: i64, digits: &[u64], cfg: FieldConfig) -> Result<Self> {
        if digits.is_empty() || digits[0].is_multiple_of(cfg.p) {
            return Err(Error::InsufficientPrecision(
                "leading unit digit must be nonzero".into(),
            ));
        }
        let mut unit = BigInt::zero();
        for d in digits.iter().rev() {
            if *d >= cfg.p {
                return Err(Error::Parse(format!("digit {d} out of range")));
            }
            unit = unit * BigInt::from(cfg.p) + BigInt::from(*d);
        }
        Ok(Self {
            cfg,
            repr: Repr::Known { val, unit, prec: digits.len() as u32, exact: None },
        })
    }

    pub fn config(&self) -> FieldConfig {
        self.cfg
    }

    /// `None` stands for +infinity (exact zero).
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Known { val, .. } => Some(*val),
        }
    }

    /// Number of known unit digits; `None` for exact values.
    pub fn precision(&self) -> Option<u32> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Known { exact: Some(_), .. } => None,
            Repr::Known { prec, .. } => Some(*prec),
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    pub fn exact(&self) -> Option<Q> {
        match &self.repr {
            Repr::Zero => Some(Q::zero()),
            Repr::Known { exact, .. } => exact.clone(),
        }
    }

    /// Base-p unit digits u0, u1, ... (as stored).
    pub fn digits(&self) -> Vec<u64> {
        match &self.repr {
            Repr::Zero => Vec::new(),
            Repr::Known { unit, prec, .. } => {
                let pb = BigInt::from(self.cfg.p);
                let mut u = unit.clone();
                (0..*prec)
                    .map(|_| {
                        let (qq, r) = u.div_mod_floor(&pb);
                        u = qq;
                        r.to_u64().unwrap()
                    })
                    .collect()
            }
        }
    }

    /// Drops the exact shadow and keeps `n` digits.
    pub fn truncated(&self, n: u32) -> Self {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Known { val, unit, prec, exact } => {
                let n = match exact {
                    Some(_) => n,
                    None => n.min(*prec),
                };
                let unit = match exact {
                    Some(x) => unit_mod(x, self.cfg.p, n),
                    None => unit.mod_floor(&big_pow(self.cfg.p, n)),
                };
                Self {
                    cfg: self.cfg,
                    repr: Repr::Known { val: *val, unit, prec: n, exact: None },
                }
            }
        }
    }

    /// A rational inside the represented coset, with its absolute precision
    /// (`None` when the value is exact).
    pub fn approximation(&self) -> (Q, Option<i64>) {
        match &self.repr {
            Repr::Zero => (Q::zero(), None),
            Repr::Known { exact: Some(x), .. } => (x.clone(), None),
            Repr::Known { val, unit, prec, .. } => {
                (Q::from_integer(unit.clone()) * p_pow(self.cfg.p, *val), Some(val + *prec as i64))
            }
        }
    }

    /// Unit part modulo p^k; requires k <= known digits for inexact values.
    fn unit_to(&self, k: u32) -> BigInt {
        match &self.repr {
            Repr::Zero => BigInt::zero(),
            Repr::Known { exact: Some(x), .. } => unit_mod(x, self.cfg.p, k),
            Repr::Known { unit, prec, .. } => {
                debug_assert!(k <= *prec);
                unit.mod_floor(&big_pow(self.cfg.p, k))
            }
        }
    }

    /// Absolute precision v + n; `None` when exact.
    fn abs_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero | Repr::Known { exact: Some(_), .. } => None,
            Repr::Known { val, prec, .. } => Some(val + *prec as i64),
        }
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Known { val, unit, prec, exact } => {
                let m = big_pow(self.cfg.p, *prec);
                Self {
                    cfg: self.cfg,
                    repr: Repr::Known {
                        val: *val,
                        unit: (-unit).mod_floor(&m),
                        prec: *prec,
                        exact: exact.as_ref().map(|x| -x),
                    },
                }
            }
        }
    }

    pub fn arith(&self, other: &Self, op: ArithOp) -> Result<Self> {
        match op {
            ArithOp::Add => self.add(other),
            ArithOp::Sub => self.sub(other),
            ArithOp::Mul => self.mul(other),
            ArithOp::Div => self.div(other),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if let (Some(x), Some(y)) = (self.exact(), other.exact()) {
            return Ok(Self::from_q(&(x + y), self.cfg));
        }
        if self.is_exact_zero() {
            return Ok(other.clone());
        }
        if other.is_exact_zero() {
            return Ok(self.clone());
        }
        let p = self.cfg.p;
        let (v1, v2) = (self.valuation().unwrap(), other.valuation().unwrap());
        let abs = match (self.abs_precision(), other.abs_precision()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => unreachable!(),
        };
        let vmin = v1.min(v2);
        if abs <= vmin {
            return Err(Error::InsufficientPrecision("no digits survive the sum".into()));
        }
        let k = (abs - vmin) as u32;
        let modulus = big_pow(p, k);
        let term = |s: &Self, v: i64| -> BigInt {
            let shift = (v - vmin) as u32;
            if shift >= k {
                BigInt::zero()
            } else {
                s.unit_to(k - shift) * big_pow(p, shift)
            }
        };
        let w = (term(self, v1) + term(other, v2)).mod_floor(&modulus);
        if w.is_zero() {
            return Err(Error::InsufficientPrecision(
                "addition cancels every known digit".into(),
            ));
        }
        let shift = vp(&Q::from_integer(w.clone()), p).unwrap();
        let unit = w / big_pow(p, shift as u32);
        Ok(Self {
            cfg: self.cfg,
            repr: Repr::Known { val: vmin + shift, unit, prec: k - shift as u32, exact: None },
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if let (Some(x), Some(y)) = (self.exact(), other.exact()) {
            return Ok(Self::from_q(&(x * y), self.cfg));
        }
        if self.is_exact_zero() || other.is_exact_zero() {
            return Ok(Self::zero(self.cfg));
        }
        let prec = self.precision().unwrap_or(u32::MAX).min(other.precision().unwrap_or(u32::MAX));
        let m = big_pow(self.cfg.p, prec);
        let unit = (self.unit_to(prec) * other.unit_to(prec)).mod_floor(&m);
        Ok(Self {
            cfg: self.cfg,
            repr: Repr::Known {
                val: self.valuation().unwrap() + other.valuation().unwrap(),
                unit,
                prec,
                exact: None,
            },
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if let (Some(x), Some(y)) = (self.exact(), other.exact()) {
            return Ok(Self::from_q(&(x / y), self.cfg));
        }
        if self.is_exact_zero() {
            return Ok(self.clone());
        }
        let prec = self.precision().unwrap_or(u32::MAX).min(other.precision().unwrap_or(u32::MAX));
        let m = big_pow(self.cfg.p, prec);
        let unit = (self.unit_to(prec) * mod_inverse(&other.unit_to(prec), &m)).mod_floor(&m);
        Ok(Self {
            cfg: self.cfg,
            repr: Repr::Known {
                val: self.valuation().unwrap() - other.valuation().unwrap(),
                unit,
                prec,
                exact: None,
            },
        })
    }

    fn leading_digit(&self) -> Result<u64> {
        match &self.repr {
            Repr::Zero => Err(Error::InsufficientPrecision("value is zero".into())),
            Repr::Known { prec, exact, .. } => {
                if exact.is_none() && *prec < 2 {
                    return Err(Error::InsufficientPrecision(
                        "at least two digits are needed".into(),
                    ));
                }
                Ok(self.unit_to(1).to_u64().unwrap())
            }
        }
    }

    pub fn square_class(&self) -> Result<SquareClass> {
        let u0 = self.leading_digit()?;
        let v = self.valuation().unwrap();
        Ok(SquareClass::from_parts(v.rem_euclid(2) == 1, legendre(u0, self.cfg.p) == -1))
    }

    /// Square root by Hensel lifting; `None` when x is not a square.
    /// Branch: the residue of the root's unit part lies in {1, ..., (p-1)/2}.
    pub fn sqrt(&self) -> Result<Option<Self>> {
        if self.square_class()? != SquareClass::One {
            return Ok(None);
        }
        let p = self.cfg.p;
        let v = self.valuation().unwrap();
        if let Some(x) = self.exact() {
            if let Some(r) = exact_sqrt(&x) {
                let r = if canonical_branch(&r, p) { r } else { -r };
                return Ok(Some(Self::from_q(&r, self.cfg)));
            }
        }
        let prec = self.precision().unwrap_or(self.cfg.precision);
        let u = self.unit_to(prec);
        let u0 = (&u % BigInt::from(p)).to_u64().unwrap();
        let r0 = (1..=(p - 1) / 2).find(|r| r * r % p == u0).unwrap();
        let m = big_pow(p, prec);
        let mut y = BigInt::from(r0);
        // Newton doubles the number of correct digits per step.
        let mut correct = 1u32;
        while correct < prec {
            let f = (&y * &y - &u).mod_floor(&m);
            let d = mod_inverse(&(BigInt::from(2) * &y).mod_floor(&m), &m);
            y = (&y - f * d).mod_floor(&m);
            correct *= 2;
        }
        Ok(Some(Self {
            cfg: self.cfg,
            repr: Repr::Known { val: v / 2, unit: y, prec, exact: None },
        }))
    }

    pub fn is_norm(&self, ext: QuadExtDescriptor) -> Result<bool> {
        let u0 = self.leading_digit()?;
        let d = ext.class();
        Ok(hilbert_from_parts(
            (d.odd_valuation() as i64, if d.nonsquare_unit() { -1 } else { 1 }),
            (self.valuation().unwrap(), legendre(u0, self.cfg.p)),
            self.cfg.p,
        ) == 1)
    }

    /// True if both scalars agree on every digit known to both.
    pub fn agrees_with(&self, other: &Self) -> bool {
        match self.sub(other) {
            Ok(d) => match (d.valuation(), self.abs_precision(), other.abs_precision()) {
                (None, _, _) => true,
                (Some(v), a, b) => {
                    let abs = a.unwrap_or(i64::MAX).min(b.unwrap_or(i64::MAX));
                    v >= abs
                }
            },
            Err(Error::InsufficientPrecision(_)) => true,
            Err(_) => false,
        }
    }
}

fn exact_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

fn canonical_branch(r: &Q, p: u64) -> bool {
    let u0 = unit_mod(r, p, 1).to_u64().unwrap();
    u0 <= (p - 1) / 2
}

impl PartialEq for PadicScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.cfg.p != other.cfg.p {
            return false;
        }
        match (self.exact(), other.exact()) {
            (Some(x), Some(y)) => x == y,
            (None, None) => {
                self.valuation() == other.valuation()
                    && self.precision() == other.precision()
                    && self.digits() == other.digits()
            }
            _ => false,
        }
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.cfg.p;
        match &self.repr {
            Repr::Zero => write!(f, "0"),
            Repr::Known { val, prec, .. } => {
                let terms: Vec<String> = self
                    .digits()
                    .iter()
                    .enumerate()
                    .map(|(i, d)| match i {
                        0 => format!("{d}"),
                        1 => format!("{d}*{p}"),
                        _ => format!("{d}*{p}^{i}"),
                    })
                    .collect();
                write!(f, "{p}^{val} * ({}) mod {p}^{}", terms.join(" + "), val + *prec as i64)
            }
        }
    }
}

/// Exact-rational convenience: p^e as a scalar.
pub fn zeta_pow(cfg: FieldConfig, e: i64) -> PadicScalar {
    PadicScalar::from_q(&p_pow(cfg.p, e), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, q_frac};

    fn cfg5() -> FieldConfig {
        FieldConfig::with_prime(5).unwrap()
    }

    fn s(n: i64) -> PadicScalar {
        PadicScalar::from_rational(n, 1, cfg5()).unwrap()
    }

    #[test]
    fn config_rejects_bad_primes() {
        assert!(FieldConfig::new(2, 12).is_err());
        assert!(FieldConfig::new(9, 12).is_err());
        assert!(FieldConfig::new(5, 3).is_err());
        assert_eq!(cfg5().eps(), 2);
    }

    #[test]
    fn from_rational_examples() {
        assert!(PadicScalar::from_rational(0, 1, cfg5()).unwrap().is_exact_zero());
        let five = s(5);
        assert_eq!(five.valuation(), Some(1));
        assert_eq!(five.digits()[0], 1);
        let fifth = PadicScalar::from_rational(1, 5, cfg5()).unwrap();
        assert_eq!(fifth.valuation(), Some(-1));
        assert_eq!(fifth.digits()[0], 1);
        assert_eq!(PadicScalar::from_rational(1, 0, cfg5()), Err(Error::DivisionByZero));
        assert_eq!(cfg5().zeta().valuation(), Some(1));
    }

    #[test]
    fn arithmetic_examples() {
        assert!(s(1).add(&s(-1)).unwrap().is_exact_zero());
        assert_eq!(s(5).mul(&s(5)).unwrap().valuation(), Some(2));
        let one3 = s(1).truncated(3);
        let other = PadicScalar::from_q(&(q(-1) + q(125) * q(7)), cfg5()).truncated(12);
        assert!(matches!(one3.add(&other), Err(Error::InsufficientPrecision(_))));
        assert_eq!(s(3).div(&s(0)), Err(Error::DivisionByZero));
    }

    #[test]
    fn inexact_arithmetic_tracks_digits() {
        let a = s(7).truncated(6);
        let b = s(-2).truncated(6);
        let c = a.add(&b).unwrap();
        assert_eq!(c.valuation(), Some(1));
        assert_eq!(c.precision(), Some(5));
        assert!(c.agrees_with(&s(5)));
        let d = a.mul(&b).unwrap();
        assert!(d.agrees_with(&s(-14)));
        let e = a.div(&b).unwrap();
        assert!(e.agrees_with(&PadicScalar::from_q(&q_frac(-7, 2), cfg5())));
    }

    #[test]
    fn square_classes() {
        assert_eq!(s(4).square_class().unwrap(), SquareClass::One);
        assert_eq!(s(5).square_class().unwrap(), SquareClass::Pi);
        assert_eq!(s(2).square_class().unwrap(), SquareClass::Eps);
        assert_eq!(s(10).square_class().unwrap(), SquareClass::EpsPi);
        assert!(s(1).truncated(1).square_class().is_err());
    }

    #[test]
    fn square_roots() {
        let r = s(4).sqrt().unwrap().unwrap();
        assert_eq!(r.exact(), Some(q(2)));
        assert!(s(5).sqrt().unwrap().is_none());
        let r = s(6).sqrt().unwrap().unwrap();
        assert!(r.exact().is_none());
        assert_eq!(r.digits()[0], 1);
        assert!(r.mul(&r).unwrap().agrees_with(&s(6)));
        // -1 is a square in Q_5
        let i = s(-1).sqrt().unwrap().unwrap();
        assert_eq!(i.digits()[0], 2);
        assert!(i.mul(&i).unwrap().agrees_with(&s(-1)));
    }

    /// Oracle: sample norms a^2 - d b^2 over a digit grid and collect which
    /// (valuation parity, leading residue) patterns occur.
    fn brute_norm_patterns(d: i64, p: i64) -> std::collections::BTreeSet<(i64, u64)> {
        let mut seen = std::collections::BTreeSet::new();
        let bound = p * p * p;
        for a in -bound..=bound {
            for b in -bound..=bound {
                let n = a * a - d * b * b;
                if n == 0 {
                    continue;
                }
                let nq = q(n);
                let v = vp(&nq, p as u64).unwrap();
                if v <= 3 {
                    seen.insert((v % 2, unit_mod(&nq, p as u64, 1).to_u64().unwrap()));
                }
            }
        }
        seen
    }

    #[test]
    fn norm_tests_match_brute_force() {
        let c = cfg5();
        for ext in QuadExtDescriptor::ALL {
            let d = ext.discriminant(c).numer().to_i64().unwrap();
            let seen = brute_norm_patterns(d, 5);
            for parity in 0..2 {
                for u0 in 1..5u64 {
                    let x = q(u0 as i64 * if parity == 1 { 5 } else { 1 });
                    let expected = seen.contains(&(parity, u0));
                    assert_eq!(ext.is_norm_rational(&x, 5), expected, "{ext:?} {x}");
                    let xs = PadicScalar::from_q(&x, c);
                    assert_eq!(xs.is_norm(ext).unwrap(), expected);
                }
            }
        }
        assert!(!s(5).is_norm(QuadExtDescriptor::Eps).unwrap());
        assert!(s(9).is_norm(QuadExtDescriptor::Pi).unwrap());
    }

    #[test]
    fn display_format() {
        let x = PadicScalar::from_digits(1, &[1, 2, 0, 4], cfg5()).unwrap();
        assert_eq!(x.to_string(), "5^1 * (1 + 2*5 + 0*5^2 + 4*5^3) mod 5^5");
    }
}
