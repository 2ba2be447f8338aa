//! Exact rational 2x2 matrices and trace-zero matrices.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, p_pow, parse_q, vp, Q};

/// The trace-zero matrix ((a, b), (c, -a)) with rational entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QSl2 {
    pub a: Q,
    pub b: Q,
    pub c: Q,
}

impl QSl2 {
    pub fn new(a: Q, b: Q, c: Q) -> Self {
        Self { a, b, c }
    }

    pub fn zero() -> Self {
        Self::new(Q::zero(), Q::zero(), Q::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn diag(u: Q) -> Self {
        Self::new(u, Q::zero(), Q::zero())
    }

    /// The standard basis of sl2: H, E, F.
    pub fn basis() -> [QSl2; 3] {
        [
            Self::new(Q::one(), Q::zero(), Q::zero()),
            Self::new(Q::zero(), Q::one(), Q::zero()),
            Self::new(Q::zero(), Q::zero(), Q::one()),
        ]
    }

    pub fn det(&self) -> Q {
        -(&self.a * &self.a) - &self.b * &self.c
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.a + &o.a, &self.b + &o.b, &self.c + &o.c)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.a - &o.a, &self.b - &o.b, &self.c - &o.c)
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self::new(&self.a * s, &self.b * s, &self.c * s)
    }

    pub fn entries(&self) -> [&Q; 3] {
        [&self.a, &self.b, &self.c]
    }

    /// Minimum valuation over the entries; `None` for the zero matrix.
    pub fn min_val(&self, p: u64) -> Option<i64> {
        self.entries().iter().filter_map(|x| vp(x, p)).min()
    }

    /// Whether every entry lies in p^n O.
    pub fn in_level(&self, p: u64, n: i64) -> bool {
        self.min_val(p).is_none_or(|v| v >= n)
    }

    pub fn as_mat(&self) -> QMat2 {
        QMat2::new(self.a.clone(), self.b.clone(), self.c.clone(), -&self.a)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "0" {
            return Ok(Self::zero());
        }
        if let Some(inner) = t.strip_prefix("diag(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 2 {
                return Err(Error::Parse(format!("diag needs two entries: '{s}'")));
            }
            let u = parse_q(parts[0])?;
            let w = parse_q(parts[1])?;
            if u != -w {
                return Err(Error::Parse(format!("diag entries must sum to zero: '{s}'")));
            }
            return Ok(Self::diag(u));
        }
        let inner = t
            .strip_prefix("[[")
            .and_then(|r| r.strip_suffix("]]"))
            .ok_or_else(|| Error::Parse(format!("expected [[a,b],[c,-a]]: '{s}'")))?;
        let rows: Vec<&str> = inner.split("],[").collect();
        if rows.len() != 2 {
            return Err(Error::Parse(format!("expected two rows: '{s}'")));
        }
        let r0: Vec<&str> = rows[0].split(',').collect();
        let r1: Vec<&str> = rows[1].split(',').collect();
        if r0.len() != 2 || r1.len() != 2 {
            return Err(Error::Parse(format!("expected 2x2 entries: '{s}'")));
        }
        let a = parse_q(r0[0])?;
        let b = parse_q(r0[1])?;
        let c = parse_q(r1[0])?;
        let d = parse_q(r1[1])?;
        if &a + &d != Q::zero() {
            return Err(Error::Parse(format!("matrix is not trace zero: '{s}'")));
        }
        Ok(Self::new(a, b, c))
    }
}

impl fmt::Display for QSl2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{},{}],[{},{}]]",
            fmt_q(&self.a),
            fmt_q(&self.b),
            fmt_q(&self.c),
            fmt_q(&-&self.a)
        )
    }
}

/// A 2x2 rational matrix ((m00, m01), (m10, m11)).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMat2 {
    pub m: [[Q; 2]; 2],
}

impl QMat2 {
    pub fn new(m00: Q, m01: Q, m10: Q, m11: Q) -> Self {
        Self { m: [[m00, m01], [m10, m11]] }
    }

    pub fn identity() -> Self {
        Self::new(Q::one(), Q::zero(), Q::zero(), Q::one())
    }

    pub fn diag(x: Q, y: Q) -> Self {
        Self::new(x, Q::zero(), Q::zero(), y)
    }

    pub fn upper(x: Q) -> Self {
        Self::new(Q::one(), x, Q::zero(), Q::one())
    }

    pub fn lower(x: Q) -> Self {
        Self::new(Q::one(), Q::zero(), x, Q::one())
    }

    pub fn det(&self) -> Q {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    pub fn mul(&self, o: &Self) -> Self {
        let e = |i: usize, j: usize| &self.m[i][0] * &o.m[0][j] + &self.m[i][1] * &o.m[1][j];
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn inv(&self) -> Result<Self> {
        let d = self.det();
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::new(
            &self.m[1][1] / &d,
            -&self.m[0][1] / &d,
            -&self.m[1][0] / &d,
            &self.m[0][0] / &d,
        ))
    }

    pub fn add(&self, o: &Self) -> Self {
        let e = |i: usize, j: usize| &self.m[i][j] + &o.m[i][j];
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn scale(&self, s: &Q) -> Self {
        let e = |i: usize, j: usize| &self.m[i][j] * s;
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    /// Conjugation g X g^{-1}.
    pub fn ad(&self, x: &QSl2) -> QSl2 {
        let inv = self.inv().expect("invertible conjugator");
        let r = self.mul(&x.as_mat()).mul(&inv);
        QSl2::new(r.m[0][0].clone(), r.m[0][1].clone(), r.m[1][0].clone())
    }

    /// Conjugation g^{-1} X g.
    pub fn ad_inv(&self, x: &QSl2) -> QSl2 {
        let inv = self.inv().expect("invertible conjugator");
        let r = inv.mul(&x.as_mat()).mul(self);
        QSl2::new(r.m[0][0].clone(), r.m[0][1].clone(), r.m[1][0].clone())
    }

    pub fn min_val(&self, p: u64) -> Option<i64> {
        self.m.iter().flatten().filter_map(|x| vp(x, p)).min()
    }
}

impl fmt::Display for QMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{},{}],[{},{}]]",
            fmt_q(&self.m[0][0]),
            fmt_q(&self.m[0][1]),
            fmt_q(&self.m[1][0]),
            fmt_q(&self.m[1][1])
        )
    }
}

/// diag(p^e, 1).
pub fn p_diag(p: u64, e: i64) -> QMat2 {
    QMat2::diag(p_pow(p, e), Q::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, q_frac};

    #[test]
    fn parse_and_print() {
        let x = QSl2::parse("[[1, 1/5], [3, -1]]").unwrap();
        assert_eq!(x, QSl2::new(q(1), q_frac(1, 5), q(3)));
        assert_eq!(x.to_string(), "[[1,1/5],[3,-1]]");
        assert_eq!(QSl2::parse("diag(5,-5)").unwrap(), QSl2::diag(q(5)));
        assert_eq!(QSl2::parse("0").unwrap(), QSl2::zero());
        assert!(QSl2::parse("[[1,0],[0,1]]").is_err());
        assert!(QSl2::parse("[[1,0]]").is_err());
    }

    #[test]
    fn conjugation_preserves_det() {
        let g = QMat2::new(q(2), q(3), q(1), q(5));
        let x = QSl2::new(q(1), q(4), q_frac(-2, 3));
        let y = g.ad(&x);
        assert_eq!(y.det(), x.det());
        assert_eq!(g.ad_inv(&y), x);
    }
}
