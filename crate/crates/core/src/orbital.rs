//! Exact semisimple and nilpotent orbital integrals on sl2(F).
//!
//! Orbits are parametrised by (a, b) with c = (D - a^2)/b, D = -det, and
//! carry the measure da db/|b|. Every coset `Y + g_{v,n}` is moved to a coset
//! of the standard lattice by the vertex frame and a scaling, and the chart
//! integral over `Y + sl2(O)` is computed stratum by stratum in val(b).
//! Within a stratum, a-boxes are refined until a Hensel step decides them.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lcf::{CosetCell, LCFunction};
use crate::mat::QSl2;
use crate::padic::{QuadExtDescriptor, SquareClass};
use crate::rational::{fmt_q, p_pow, q, vp, vp_or_inf, Q};
use crate::sl2::{OrbitLabel, TorusType};
use crate::tree::{tree_count_oracle, TreeVertex};

/// Fingerprint of the measure conventions, embedded in every report.
pub const NORMALIZATION: &str = "sl2-chart-v1: ss=q^floor(val(-det)/2)*int da db/|b| over SL2-orbit \
(elliptic: b in norm coset); nil(Regular l)=int da db/|b| over b in l*F^2; nil(Zero)=delta_0; \
germs stored for the chart integral I/q^floor(val(-det)/2)";

/// Largest starting stratum tried before giving up on a tail.
const TAIL_CAP: i64 = 60;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntegralResult {
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
    /// First stratum summed by the geometric tail.
    pub v0: i64,
    /// Contribution of the geometric tails.
    #[serde(serialize_with = "ser_q")]
    pub tail: Q,
    pub certified: bool,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

impl IntegralResult {
    pub fn exact(value: Q) -> Self {
        Self { value, v0: 0, tail: Q::zero(), certified: true }
    }

    fn accumulate(&mut self, c: &Q, other: &IntegralResult) {
        self.value += c * &other.value;
        self.tail += c * &other.tail;
        self.v0 = self.v0.max(other.v0);
        self.certified &= other.certified;
    }
}

/// Which b are allowed in the chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum BFilter {
    Any,
    Norm(QuadExtDescriptor, bool),
    Class(SquareClass),
}

impl BFilter {
    fn allows(self, c: SquareClass, p: u64) -> bool {
        match self {
            BFilter::Any => true,
            BFilter::Norm(e, tag) => e.is_norm_class(c, p) == tag,
            BFilter::Class(l) => l == c,
        }
    }
}

/// The chart integral of 1_{Y + sl2(O)} over {a^2 + bc = D} with a b-filter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Chart {
    p: u64,
    d: Q,
    filter: BFilter,
    y: QSl2,
}

fn qpow(p: u64, e: i64) -> Q {
    p_pow(p, e)
}

impl Chart {
    /// Fraction of (s, t) in O^2 with val(P) >= v, where
    /// P = D - (a0 + p^k s)^2 - (b0 + p^l t) y_c.
    fn fraction(&self, a0: &Q, k: i64, b0: &Q, l: i64, v: i64) -> Q {
        let p = self.p;
        let c0 = &self.d - a0 * a0 - b0 * &self.y.c;
        let m0 = vp_or_inf(&c0, p);
        let m1 = vp_or_inf(a0, p).saturating_add(k);
        let m2 = 2 * k;
        let me = vp_or_inf(&self.y.c, p).saturating_add(l);
        if m0 >= v && m1 >= v && m2 >= v && me >= v {
            return Q::one();
        }
        if m0 < m1.min(m2).min(me) {
            return Q::zero();
        }
        if me < m1.min(m2) && me <= m0 {
            return qpow(p, me - v);
        }
        if m1 < m2 && m1 < me && m1 <= m0 {
            return qpow(p, m1 - v);
        }
        let step = p_pow(p, k);
        let mut acc = Q::zero();
        for j in 0..p {
            let child = a0 + &step * q(j as i64);
            acc += self.fraction(&child, k + 1, b0, l, v);
        }
        acc / q(p as i64)
    }

    fn y_b_integral(&self) -> bool {
        vp(&self.y.b, self.p).is_none_or(|v| v >= 0)
    }

    /// Sum over b in p^v O^x (allowed classes only) of the chart integrand.
    fn stratum(&self, v: i64) -> Q {
        let p = self.p;
        let mut acc = Q::zero();
        for beta in 1..p {
            let b0 = p_pow(p, v) * q(beta as i64);
            if !self.filter.allows(SquareClass::of_rational(&b0, p), p) {
                continue;
            }
            acc += self.fraction(&self.y.a, 0, &b0, v + 1, v);
        }
        // q^v * q^{-(v+1)} * sum of fractions
        acc / q(p as i64)
    }

    fn integral(&self) -> Result<IntegralResult> {
        let p = self.p;
        if !self.y_b_integral() {
            let v = vp(&self.y.b, p).unwrap();
            if !self.filter.allows(SquareClass::of_rational(&self.y.b, p), p) {
                return Ok(IntegralResult::exact(Q::zero()));
            }
            let f = self.fraction(&self.y.a, 0, &self.y.b, 0, v);
            return Ok(IntegralResult::exact(f * qpow(p, v)));
        }
        let delta = vp(&self.d, p).unwrap_or(0).max(0);
        let s = self.y.min_val(p).map_or(0, |m| (-m).max(0));
        let mut v0 = delta + 2 * s + 4;
        let mut strata: Vec<Q> = Vec::new();
        while v0 <= TAIL_CAP {
            while (strata.len() as i64) < v0 + 6 {
                strata.push(self.stratum(strata.len() as i64));
            }
            if let Some(tail) = geometric_tail(&strata[v0 as usize..(v0 + 6) as usize]) {
                let head: Q = strata[..v0 as usize].iter().sum();
                return Ok(IntegralResult { value: head + &tail, v0, tail, certified: true });
            }
            v0 += 2;
        }
        Err(Error::TailUnstable { last_stratum: v0 - 2 + 5 })
    }
}

/// Period-2 geometric tail from six consecutive strata S(v0..v0+5), or
/// `None` if the last two do not match the ratios fitted on the first four.
fn geometric_tail(s: &[Q]) -> Option<Q> {
    let mut tail = Q::zero();
    for parity in 0..2 {
        let (x0, x1, x2) = (&s[parity], &s[parity + 2], &s[parity + 4]);
        if x0.is_zero() {
            if !x1.is_zero() || !x2.is_zero() {
                return None;
            }
            continue;
        }
        let rho = x1 / x0;
        if &(&rho * x1) != x2 || rho >= Q::one() || rho < Q::zero() {
            return None;
        }
        tail += x0 / (Q::one() - rho);
    }
    Some(tail)
}

/// q^{floor(val(-det)/2)}, the semisimple normalization factor.
pub fn ss_normalization(x: &QSl2, p: u64) -> Q {
    let d = vp(&x.det(), p).expect("regular element");
    qpow(p, d.div_euclid(2))
}

/// SL2-orbit filter for a regular semisimple element.
fn ss_filter(x: &QSl2, p: u64) -> BFilter {
    let d = -x.det();
    match TorusType::of_minus_det(&d, p) {
        TorusType::Split => BFilter::Any,
        TorusType::Elliptic(e) => {
            let w = if x.b.is_zero() { -&x.c } else { x.b.clone() };
            BFilter::Norm(e, e.is_norm_rational(&w, p))
        }
    }
}

/// Frame data for a cell: X -> p^{-n} Ad(g_v^{-1}) X.
fn reduce(x: &QSl2, cell: &CosetCell, p: u64) -> QSl2 {
    cell.lattice.frame(x, p).scale(&p_pow(p, -cell.lattice.level))
}

type CacheKey = (u64, Q, BFilterKey, QSl2);
type BFilterKey = (u8, u8, bool);

fn filter_key(f: BFilter) -> BFilterKey {
    match f {
        BFilter::Any => (0, 0, false),
        BFilter::Norm(e, t) => (1, e as u8, t),
        BFilter::Class(c) => (2, c as u8, false),
    }
}

static CACHE: Mutex<Option<HashMap<CacheKey, IntegralResult>>> = Mutex::new(None);

fn chart_integral(chart: Chart) -> Result<IntegralResult> {
    let key = (chart.p, chart.d.clone(), filter_key(chart.filter), chart.y.clone());
    if let Some(r) = CACHE.lock().unwrap().as_ref().and_then(|m| m.get(&key)) {
        return Ok(r.clone());
    }
    let r = chart.integral()?;
    CACHE.lock().unwrap().get_or_insert_with(HashMap::new).insert(key, r.clone());
    Ok(r)
}

/// I_X(1_cell) for a single coset.
fn ss_cell(x: &QSl2, cell: &CosetCell, p: u64) -> Result<IntegralResult> {
    let xr = reduce(x, cell, p);
    let yr = reduce(&cell.center, cell, p);
    let norm = ss_normalization(&xr, p);
    let chart = Chart { p, d: -xr.det(), filter: ss_filter(&xr, p), y: yr };
    let mut r = chart_integral(chart)?;
    r.value *= &norm;
    r.tail *= &norm;
    Ok(r)
}

/// I_X(f) for regular semisimple X.
pub fn ss_orbital(x: &QSl2, f: &LCFunction) -> Result<IntegralResult> {
    if x.det().is_zero() {
        return Err(Error::NotRegular);
    }
    let p = f.p;
    let parts: Vec<Result<(Q, IntegralResult)>> = f
        .terms
        .par_iter()
        .map(|t| ss_cell(x, &t.cell, p).map(|r| (t.coeff.clone(), r)))
        .collect();
    let mut out = IntegralResult::exact(Q::zero());
    for part in parts {
        let (c, r) = part?;
        out.accumulate(&c, &r);
    }
    Ok(out)
}

/// mu_lambda(1_cell) for a regular nilpotent label.
fn nil_cell(lambda: SquareClass, cell: &CosetCell, p: u64) -> Result<IntegralResult> {
    let (m, n) = (cell.lattice.vertex.m, cell.lattice.level);
    let shift = SquareClass::of_rational(&p_pow(p, -(n + m)), p);
    let chart = Chart {
        p,
        d: Q::zero(),
        filter: BFilter::Class(lambda.mul(shift)),
        y: reduce(&cell.center, cell, p),
    };
    let mut r = chart_integral(chart)?;
    let s = qpow(p, -n);
    r.value *= &s;
    r.tail *= &s;
    Ok(r)
}

pub fn nilpotent_orbital(label: OrbitLabel, f: &LCFunction) -> Result<IntegralResult> {
    let p = f.p;
    match label {
        OrbitLabel::Zero => Ok(IntegralResult::exact(f.evaluate(&QSl2::zero()))),
        OrbitLabel::Regular(lambda) => {
            let mut out = IntegralResult::exact(Q::zero());
            for t in &f.terms {
                out.accumulate(&t.coeff, &nil_cell(lambda, &t.cell, p)?);
            }
            Ok(out)
        }
    }
}

/// All five nilpotent orbital integrals, in `OrbitLabel::ALL` order.
pub fn nilpotent_vector(f: &LCFunction) -> Result<[Q; 5]> {
    let mut out: [Q; 5] = Default::default();
    for (i, l) in OrbitLabel::ALL.iter().enumerate() {
        out[i] = nilpotent_orbital(*l, f)?.value;
    }
    Ok(out)
}

/// Target of the brute-force oracle.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleTarget {
    Semisimple(QSl2),
    Nilpotent(OrbitLabel),
}

/// Largest grid (points per stratum) the oracle will enumerate.
pub const ORACLE_BUDGET: u128 = 4_000_000;

/// Independent evaluation by full enumeration of (a, b) boxes at a uniform
/// level per stratum, strata up to `vmax`, and a geometric tail whose ratio is
/// fixed by the orbit type and checked on the last two strata.
pub fn brute_force_cell_oracle(
    target: &OracleTarget,
    f: &LCFunction,
    refine: i64,
    vmax: i64,
) -> Result<Q> {
    let p = f.p;
    let f = f.canonicalize();
    let (d, filter, norm, rho) = match target {
        OracleTarget::Nilpotent(OrbitLabel::Zero) => return Ok(f.evaluate(&QSl2::zero())),
        OracleTarget::Nilpotent(OrbitLabel::Regular(l)) => {
            (Q::zero(), BFilter::Class(*l), Q::one(), qpow(p, -1))
        }
        OracleTarget::Semisimple(x) => {
            if x.det().is_zero() {
                return Err(Error::NotRegular);
            }
            let rho = match TorusType::of_minus_det(&-x.det(), p) {
                TorusType::Split => qpow(p, -2),
                TorusType::Elliptic(_) => Q::zero(),
            };
            (-x.det(), ss_filter(x, p), ss_normalization(x, p), rho)
        }
    };
    if f.terms.is_empty() {
        return Ok(Q::zero());
    }
    let n = f.level();
    let m = f.support_bound().max(0);
    let kb = (n + m + refine).max(1);
    let b_count = (p as u128 - 1) * (p as u128).pow((kb - 1) as u32);
    let ka_of = |v: i64| (n + m + v + refine).max(-m);
    let widest = (p as u128).pow((ka_of(vmax) + m) as u32) * b_count;
    if widest > ORACLE_BUDGET {
        return Err(Error::GridTooLarge { cells: widest });
    }
    let mut strata = Vec::new();
    for v in -m..=vmax {
        let ka = ka_of(v);
        let a_count = (p as u128).pow((ka + m) as u32);
        let a_scale = p_pow(p, -m);
        let bs: Vec<Q> = (1..(p as i64).pow(kb as u32))
            .filter(|beta| beta % p as i64 != 0)
            .map(|beta| p_pow(p, v) * q(beta))
            .filter(|b| filter.allows(SquareClass::of_rational(b, p), p))
            .collect();
        let hits: Q = (0..a_count as i64)
            .into_par_iter()
            .map(|ai| {
                let a = q(ai) * &a_scale;
                let a2 = &a * &a;
                let mut acc = Q::zero();
                for b in &bs {
                    let c = (&d - &a2) / b;
                    acc += f.evaluate(&QSl2::new(a.clone(), b.clone(), c));
                }
                acc
            })
            .sum();
        // q^v * q^{-ka} * q^{-(v + kb)}
        strata.push(hits * qpow(p, -ka - kb));
    }
    let k = strata.len();
    if k < 4 {
        return Err(Error::TailUnstable { last_stratum: vmax });
    }
    let (s0, s1, s2, s3) = (&strata[k - 4], &strata[k - 3], &strata[k - 2], &strata[k - 1]);
    if &(&rho * s0) != s2 || &(&rho * s1) != s3 {
        return Err(Error::TailUnstable { last_stratum: vmax });
    }
    let total: Q = strata.iter().sum();
    let tail = (s2 + s3) * &rho / (Q::one() - &rho);
    Ok(norm * (total + tail))
}

/// Representative elements used to calibrate the fixed-point count per torus.
pub fn calibration_representative(torus: TorusType, p: u64) -> QSl2 {
    match torus {
        TorusType::Split => QSl2::diag(Q::one()),
        TorusType::Elliptic(e) => {
            let cfg = crate::padic::FieldConfig::with_prime(p).expect("odd prime");
            QSl2::new(Q::zero(), Q::one(), e.discriminant(cfg))
        }
    }
}

/// ss_orbital / tree_count_oracle on the unit ball at the calibration element.
pub fn calibration_constant(torus: TorusType, p: u64) -> Result<Q> {
    let x = calibration_representative(torus, p);
    let ss = ss_orbital(&x, &LCFunction::unit_ball(p))?.value;
    let count = tree_count_oracle(&x, 0, 4, p)?;
    Ok(ss / count)
}

/// The fixed-point count times the calibration constant for the torus of X.
pub fn tree_prediction(x: &QSl2, n: i64, radius: i64, p: u64) -> Result<Q> {
    let torus = TorusType::of_minus_det(&-x.det(), p);
    Ok(tree_count_oracle(x, n, radius, p)? * calibration_constant(torus, p)?)
}

/// 1_{g_{v0,n}}.
pub fn vertex_lattice_indicator(n: i64, p: u64) -> LCFunction {
    LCFunction::indicator(CosetCell::new(QSl2::zero(), crate::tree::mp_lattice(&TreeVertex::base(), n), p), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_frac;

    #[test]
    fn semisimple_anchors() {
        let ball = LCFunction::unit_ball(5);
        let r = ss_orbital(&QSl2::diag(q(1)), &ball).unwrap();
        assert_eq!(r.value, q_frac(6, 5));
        assert!(r.certified);
        assert_eq!(ss_orbital(&QSl2::diag(q(5)), &ball).unwrap().value, q(6));
    }

    #[test]
    fn nilpotent_anchors() {
        let ball = LCFunction::unit_ball(5);
        let v = nilpotent_vector(&ball).unwrap();
        assert_eq!(v[0], q(1));
        // One and Eps give 1/2; the odd-valuation classes give 1/(2q).
        assert_eq!(v[1..], [q_frac(1, 2), q_frac(1, 2), q_frac(1, 10), q_frac(1, 10)]);
        let d = ball.dilate(&q(25));
        assert_eq!(nilpotent_orbital(OrbitLabel::Regular(SquareClass::One), &d).unwrap().value, q_frac(25, 2));
    }

    #[test]
    fn oracle_anchors() {
        let ball = LCFunction::unit_ball(5);
        let o = brute_force_cell_oracle(&OracleTarget::Semisimple(QSl2::diag(q(1))), &ball, 0, 5)
            .unwrap();
        assert_eq!(o, q_frac(6, 5));
        let o = brute_force_cell_oracle(
            &OracleTarget::Nilpotent(OrbitLabel::Regular(SquareClass::One)),
            &ball,
            0,
            5,
        )
        .unwrap();
        assert_eq!(o, q_frac(1, 2));
    }

    #[test]
    fn covariance() {
        let p = 5;
        let ball = LCFunction::unit_ball(p);
        for x in [QSl2::diag(q(1)), QSl2::new(q(0), q(1), q(2)), QSl2::new(q(0), q(1), q(5))] {
            let lhs = ss_orbital(&x.scale(&q(25)), &ball).unwrap().value;
            let rhs = ss_orbital(&x, &ball.dilate(&q(25))).unwrap().value;
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn calibration() {
        let p = 5;
        assert_eq!(calibration_constant(TorusType::Split, p).unwrap(), q_frac(6, 5));
        assert_eq!(tree_prediction(&QSl2::diag(q(5)), 0, 4, p).unwrap(), q(6));
    }
}
