//! Locally constant compactly supported functions on sl2(F), stored as
//! rational combinations of indicators of cosets `Y + g_{v,n}`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::QSl2;
use crate::rational::{fmt_q, p_pow, parse_q, reduce_mod, vp, Q};
use crate::sl2::{cayley_inv, GroupElement, Sl2Element};
use crate::tree::{mp_lattice, LatticeDescriptor, TreeVertex};

/// Upper bound on coset enumeration in the invariance checker.
const MAX_COSETS: u128 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetCell {
    pub lattice: LatticeDescriptor,
    pub center: QSl2,
}

impl CosetCell {
    /// The coset `center + lattice`, with the center reduced to its canonical
    /// representative in the vertex frame.
    pub fn new(center: QSl2, lattice: LatticeDescriptor, p: u64) -> Self {
        let g = lattice.vertex.basis(p);
        let y = g.ad_inv(&center);
        let n = lattice.level;
        let r = QSl2::new(reduce_mod(&y.a, p, n), reduce_mod(&y.b, p, n), reduce_mod(&y.c, p, n));
        Self { center: g.ad(&r), lattice }
    }

    /// `p^n sl2(O)` around zero.
    pub fn standard(n: i64) -> Self {
        Self { center: QSl2::zero(), lattice: mp_lattice(&TreeVertex::base(), n) }
    }

    pub fn contains(&self, x: &QSl2, p: u64) -> bool {
        self.lattice.contains(&x.sub(&self.center), p)
    }

    /// Center in the vertex frame.
    pub fn frame_center(&self, p: u64) -> QSl2 {
        self.lattice.frame(&self.center, p)
    }

    pub fn contains_cell(&self, other: &CosetCell, p: u64) -> bool {
        self.contains(&other.center, p) && self.lattice.contains_lattice(&other.lattice, p)
    }

    /// The image `s * (Y + L)`.
    pub fn scaled(&self, s: &Q, p: u64) -> Self {
        let shift = vp(s, p).expect("nonzero scale");
        Self::new(self.center.scale(s), self.lattice.scaled(shift), p)
    }

    pub fn translated(&self, t: &QSl2, p: u64) -> Self {
        Self::new(self.center.add(t), self.lattice.clone(), p)
    }

    /// Representatives of the cosets of `g_{v,level}` inside this cell, for a
    /// level at least the cell's own and the same vertex v.
    pub fn subcell_centers(&self, level: i64, p: u64) -> Vec<QSl2> {
        let k = level - self.lattice.level;
        assert!(k >= 0);
        let g = self.lattice.vertex.basis(p);
        let y = self.frame_center(p);
        let step = p_pow(p, self.lattice.level);
        let span = p.pow(k as u32) as i64;
        let mut out = Vec::with_capacity((span * span * span) as usize);
        for i in 0..span {
            for j in 0..span {
                for l in 0..span {
                    let d = QSl2::new(crate::rational::q(i), crate::rational::q(j), crate::rational::q(l))
                        .scale(&step);
                    out.push(g.ad(&y.add(&d)));
                }
            }
        }
        out
    }

    pub fn children(&self, p: u64) -> Vec<CosetCell> {
        let lat = self.lattice.scaled(1);
        self.subcell_centers(self.lattice.level + 1, p)
            .into_iter()
            .map(|c| CosetCell::new(c, lat.clone(), p))
            .collect()
    }

    /// Largest r with this cell a generator of the depth-r proxy space.
    pub fn proxy_depth(&self) -> i64 {
        self.lattice.level - 1
    }

    /// Largest M with the cell inside p^{-M} sl2(O).
    pub fn support_bound(&self, p: u64) -> i64 {
        let m = self.lattice.standard_outer_bound(p);
        match self.center.min_val(p) {
            Some(v) => m.max(-v),
            None => m,
        }
    }
}

impl fmt::Display for CosetCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}", self.center, self.lattice)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub cell: CosetCell,
    pub coeff: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LCFunction {
    pub p: u64,
    pub terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    center: String,
    vertex: String,
    level: i64,
}

impl LCFunction {
    pub fn zero(p: u64) -> Self {
        Self { p, terms: Vec::new() }
    }

    pub fn indicator(cell: CosetCell, p: u64) -> Self {
        Self { p, terms: vec![Term { cell, coeff: Q::one() }] }
    }

    /// Indicator of sl2(O).
    pub fn unit_ball(p: u64) -> Self {
        Self::indicator(CosetCell::standard(0), p)
    }

    pub fn from_terms(p: u64, terms: Vec<(Q, CosetCell)>) -> Self {
        Self { p, terms: terms.into_iter().map(|(coeff, cell)| Term { cell, coeff }).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Self { p: self.p, terms }.canonicalize()
    }

    pub fn scale(&self, s: &Q) -> Self {
        let terms =
            self.terms.iter().map(|t| Term { cell: t.cell.clone(), coeff: &t.coeff * s }).collect();
        Self { p: self.p, terms }.canonicalize()
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn linear_combination(p: u64, parts: &[(Q, &LCFunction)]) -> Self {
        let mut terms = Vec::new();
        for (c, f) in parts {
            terms.extend(f.terms.iter().map(|t| Term { cell: t.cell.clone(), coeff: &t.coeff * c }));
        }
        Self { p, terms }.canonicalize()
    }

    pub fn evaluate(&self, x: &QSl2) -> Q {
        self.terms
            .iter()
            .filter(|t| t.cell.contains(x, self.p))
            .fold(Q::zero(), |acc, t| acc + &t.coeff)
    }

    /// Evaluation at a possibly inexact element.
    pub fn evaluate_element(&self, x: &Sl2Element) -> Result<Q> {
        let parts = [x.a.approximation(), x.b.approximation(), x.c.approximation()];
        let known = parts.iter().filter_map(|(_, a)| *a).min();
        if let Some(abs) = known {
            if !self.terms.is_empty() && abs < self.level() {
                return Err(Error::InsufficientPrecision(format!(
                    "element known to p^{abs}, function level {}",
                    self.level()
                )));
            }
        }
        let [(a, _), (b, _), (c, _)] = parts;
        Ok(self.evaluate(&QSl2::new(a, b, c)))
    }

    /// Smallest N with f invariant under p^N sl2(O).
    pub fn level(&self) -> i64 {
        self.terms
            .iter()
            .map(|t| t.cell.lattice.standard_inner_level(self.p))
            .max()
            .unwrap_or(0)
    }

    /// Smallest M with support inside p^{-M} sl2(O).
    pub fn support_bound(&self) -> i64 {
        self.terms.iter().map(|t| t.cell.support_bound(self.p)).max().unwrap_or(0)
    }

    /// Largest r for which every cell generates the depth-r proxy space.
    pub fn proxy_depth(&self) -> Option<i64> {
        self.terms.iter().map(|t| t.cell.proxy_depth()).min()
    }

    /// f_c with f_c(X) = f(cX).
    pub fn dilate(&self, c: &Q) -> Self {
        let inv = c.recip();
        let terms = self
            .terms
            .iter()
            .map(|t| Term { cell: t.cell.scaled(&inv, self.p), coeff: t.coeff.clone() })
            .collect();
        Self { p: self.p, terms }.canonicalize()
    }

    /// q^d f - f_zeta, with zeta = p.
    pub fn h_combination(&self, d: u32) -> Result<Self> {
        if d != 0 && d != 2 {
            return Err(Error::InvalidConfig(format!("h-combination needs d in {{0,2}}, got {d}")));
        }
        let qd = Q::from(num_bigint::BigInt::from(self.p.pow(d)));
        Ok(self.scale(&qd).sub(&self.dilate(&p_pow(self.p, 2))))
    }

    /// Merges identical cosets, drops zero terms and sorts.
    pub fn canonicalize(&self) -> Self {
        let mut acc: BTreeMap<CosetCell, Q> = BTreeMap::new();
        for t in &self.terms {
            *acc.entry(t.cell.clone()).or_insert_with(Q::zero) += &t.coeff;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(cell, coeff)| Term { cell, coeff })
            .collect();
        Self { p: self.p, terms }
    }

    /// Splits cells until cells sharing a vertex are pairwise disjoint.
    pub fn disjoint_refinement(&self) -> Self {
        let p = self.p;
        let base = self.canonicalize();
        let mut by_vertex: BTreeMap<TreeVertex, Vec<Term>> = BTreeMap::new();
        for t in base.terms {
            by_vertex.entry(t.cell.lattice.vertex.clone()).or_default().push(t);
        }
        let mut out = Vec::new();
        for (_, terms) in by_vertex {
            let cells: Vec<CosetCell> = terms.iter().map(|t| t.cell.clone()).collect();
            for t in &terms {
                for piece in split_against(&t.cell, &cells, p) {
                    out.push(Term { cell: piece, coeff: t.coeff.clone() });
                }
            }
        }
        Self { p, terms: out }.canonicalize()
    }

    /// Exact check that f(Z + l) = f(Z) for all Z and all l in L.
    pub fn is_invariant_under(&self, l: &LatticeDescriptor) -> Result<bool> {
        let p = self.p;
        let f = self.canonicalize();
        if f.terms.iter().all(|t| t.cell.lattice.contains_lattice(l, p)) {
            return Ok(true);
        }
        let gens = l.generators(p);
        for t in &f.terms {
            let v = &t.cell.lattice.vertex;
            let mut k = t.cell.lattice.level;
            while !f.terms.iter().all(|u| u.cell.lattice.contains_lattice(&mp_lattice(v, k), p)) {
                k += 1;
            }
            let per_cell = (p as u128).pow(3 * (k - t.cell.lattice.level) as u32);
            if per_cell > MAX_COSETS {
                return Err(Error::GridTooLarge { cells: per_cell });
            }
            let reps = t.cell.subcell_centers(k, p);
            for gen in &gens {
                for z in &reps {
                    for base in [z.clone(), z.sub(gen)] {
                        if f.evaluate(&base.add(gen)) != f.evaluate(&base) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<TermJson> = self
            .terms
            .iter()
            .map(|t| TermJson {
                coeff: fmt_q(&t.coeff),
                center: t.cell.center.to_string(),
                vertex: t.cell.lattice.vertex.to_string(),
                level: t.cell.lattice.level,
            })
            .collect();
        serde_json::to_string(&rows).expect("serializable")
    }

    pub fn from_json(s: &str, p: u64) -> Result<Self> {
        let rows: Vec<TermJson> =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("function JSON: {e}")))?;
        let mut terms = Vec::new();
        for r in rows {
            let lattice = mp_lattice(&TreeVertex::parse(&r.vertex, p)?, r.level);
            let cell = CosetCell::new(QSl2::parse(&r.center)?, lattice, p);
            terms.push((parse_q(&r.coeff)?, cell));
        }
        Ok(Self::from_terms(p, terms))
    }
}

impl fmt::Display for LCFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|t| format!("{}*1[{}]", fmt_q(&t.coeff), t.cell)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Refines `cell` until no piece strictly contains a finer cell of `others`.
fn split_against(cell: &CosetCell, others: &[CosetCell], p: u64) -> Vec<CosetCell> {
    let finer_inside = others
        .iter()
        .any(|o| o.lattice.level > cell.lattice.level && cell.contains_cell(o, p));
    if !finer_inside {
        return vec![cell.clone()];
    }
    cell.children(p).iter().flat_map(|c| split_against(c, others, p)).collect()
}

/// A proxy-space generator together with the lattice it is invariant under.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxyMember {
    pub f: LCFunction,
    pub certificate: LatticeDescriptor,
    pub r: i64,
}

impl ProxyMember {
    pub fn verify(&self) -> Result<bool> {
        self.f.is_invariant_under(&self.certificate)
    }
}

/// Generators 1_{Y + g_{x, r+1}} of the depth-r proxy space.
pub fn depth_r_family(
    r: i64,
    centers: &[QSl2],
    points: &[TreeVertex],
    p: u64,
) -> Vec<ProxyMember> {
    let mut out = Vec::new();
    for x in points {
        let lat = mp_lattice(x, r + 1);
        for y in centers {
            out.push(ProxyMember {
                f: LCFunction::indicator(CosetCell::new(y.clone(), lat.clone(), p), p),
                certificate: lat.clone(),
                r,
            });
        }
    }
    out
}

/// Whether every element of the cell is topologically nilpotent.
fn cell_in_nilpotent_domain(cell: &CosetCell, p: u64) -> bool {
    let y = cell.frame_center(p);
    let n = cell.lattice.level;
    if n < 1 {
        return false;
    }
    if y.is_zero() {
        return true;
    }
    let mu = y.min_val(p).unwrap();
    let det_ok = vp(&y.det(), p).is_none_or(|v| v >= 1);
    mu + n >= 1 && det_ok
}

/// The group-side function g -> f(cayley_inv(g)) on topologically unipotent g.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupFunction {
    pub f: LCFunction,
}

impl GroupFunction {
    pub fn evaluate(&self, g: &GroupElement) -> Result<Q> {
        self.f.evaluate_element(&cayley_inv(g)?)
    }
}

pub fn phi_pullback_support(f: &LCFunction) -> Result<GroupFunction> {
    for t in &f.terms {
        if !cell_in_nilpotent_domain(&t.cell, f.p) {
            return Err(Error::OutsideDomain(format!(
                "cell {} meets non-topologically-nilpotent elements",
                t.cell
            )));
        }
    }
    Ok(GroupFunction { f: f.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::FieldConfig;
    use crate::rational::{q, q_frac};
    use crate::sl2::cayley;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u64 = 5;

    fn rand_q(rng: &mut ChaCha8Rng, lo: i64) -> Q {
        q(rng.gen_range(-30..=30)) * p_pow(P, rng.gen_range(lo..=2))
    }

    fn rand_sl2(rng: &mut ChaCha8Rng, lo: i64) -> QSl2 {
        QSl2::new(rand_q(rng, lo), rand_q(rng, lo), rand_q(rng, lo))
    }

    fn rand_cell(rng: &mut ChaCha8Rng) -> CosetCell {
        let v = TreeVertex::new(rng.gen_range(-1..=2), q(rng.gen_range(0..25)), P);
        CosetCell::new(rand_sl2(rng, -1), mp_lattice(&v, rng.gen_range(-1..=2)), P)
    }

    #[test]
    fn indicator_examples() {
        let ball = LCFunction::unit_ball(P);
        assert_eq!(ball.evaluate(&QSl2::diag(q(1))), q(1));
        assert_eq!(ball.evaluate(&QSl2::zero()), q(1));
        let l1 = LCFunction::indicator(CosetCell::standard(1), P);
        assert_eq!(l1.evaluate(&QSl2::diag(q(1))), q(0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let c = rand_cell(&mut rng);
            assert_eq!(LCFunction::indicator(c.clone(), P).evaluate(&c.center), q(1));
        }
    }

    #[test]
    fn dilation() {
        let ball = LCFunction::unit_ball(P);
        let d = ball.dilate(&q(25));
        assert_eq!(d, LCFunction::indicator(CosetCell::standard(-2), P));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let f = LCFunction::from_terms(
                P,
                vec![(q(2), rand_cell(&mut rng)), (q_frac(-1, 3), rand_cell(&mut rng))],
            );
            let c = [q(25), q_frac(1, 5), q(3), q_frac(-2, 25)][rng.gen_range(0..4)].clone();
            let x = rand_sl2(&mut rng, -2);
            assert_eq!(f.dilate(&c).evaluate(&x), f.evaluate(&x.scale(&c)));
            assert_eq!(f.dilate(&c).dilate(&c.recip()), f.canonicalize());
        }
    }

    #[test]
    fn canonical_forms_preserve_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = TreeVertex::new(1, q(2), P);
        let big = CosetCell::new(QSl2::zero(), mp_lattice(&v, 0), P);
        let small = CosetCell::new(rand_sl2(&mut rng, 0), mp_lattice(&v, 1), P);
        let other = rand_cell(&mut rng);
        let f = LCFunction::from_terms(
            P,
            vec![(q(1), big.clone()), (q(3), small), (q(-2), other), (q(1), big)],
        );
        let c = f.canonicalize();
        let d = f.disjoint_refinement();
        for _ in 0..300 {
            let x = rand_sl2(&mut rng, -1);
            assert_eq!(c.evaluate(&x), f.evaluate(&x));
            assert_eq!(d.evaluate(&x), f.evaluate(&x));
        }
        for (i, s) in d.terms.iter().enumerate() {
            for t in &d.terms[i + 1..] {
                if s.cell.lattice.vertex == t.cell.lattice.vertex {
                    assert!(!s.cell.contains_cell(&t.cell, P) && !t.cell.contains_cell(&s.cell, P));
                }
            }
        }
    }

    #[test]
    fn invariance_checks() {
        let v0 = TreeVertex::base();
        let l1 = LCFunction::indicator(CosetCell::standard(1), P);
        assert!(l1.is_invariant_under(&mp_lattice(&v0, 1)).unwrap());
        assert!(!l1.is_invariant_under(&mp_lattice(&v0, 0)).unwrap());
        let shifted = CosetCell::new(QSl2::diag(q(1)), mp_lattice(&v0, 1), P);
        let f = LCFunction::from_terms(
            P,
            vec![(q(1), CosetCell::standard(0)), (q(-1), shifted)],
        );
        assert!(f.is_invariant_under(&mp_lattice(&v0, 1)).unwrap());
        assert!(!f.is_invariant_under(&mp_lattice(&v0, 0)).unwrap());
        // Cells at two vertices, invariant under their common sublattice.
        let w = TreeVertex::new(1, q(0), P);
        let g = LCFunction::from_terms(
            P,
            vec![(q(1), CosetCell::standard(1)), (q(2), CosetCell::new(QSl2::zero(), mp_lattice(&w, 1), P))],
        );
        assert!(g.is_invariant_under(&mp_lattice(&w, 2)).unwrap());
        assert!(!g.is_invariant_under(&mp_lattice(&w, 0)).unwrap());
    }

    #[test]
    fn proxy_family() {
        let fam = depth_r_family(0, &[QSl2::zero()], &[TreeVertex::base()], P);
        assert_eq!(fam.len(), 1);
        assert_eq!(fam[0].f, LCFunction::indicator(CosetCell::standard(1), P));
        assert!(fam[0].verify().unwrap());
        assert_eq!(fam[0].f.proxy_depth(), Some(0));
        let d = fam[0].f.dilate(&q(25));
        assert_eq!(d.proxy_depth(), Some(-2));
        assert_eq!(fam[0].f.dilate(&q(2)).proxy_depth(), Some(0));
    }

    #[test]
    fn h_combination_examples() {
        let ball = LCFunction::unit_ball(P);
        let h = ball.h_combination(2).unwrap();
        let expect = LCFunction::from_terms(
            P,
            vec![(q(25), CosetCell::standard(0)), (q(-1), CosetCell::standard(-2))],
        )
        .canonicalize();
        assert_eq!(h, expect);
        assert_eq!(h.evaluate(&QSl2::zero()), q(24));
        assert_eq!(ball.h_combination(0).unwrap().evaluate(&QSl2::zero()), q(0));
        assert!(ball.h_combination(1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = LCFunction::from_terms(
            P,
            vec![(q_frac(3, 7), rand_cell(&mut rng)), (q(-2), rand_cell(&mut rng))],
        )
        .canonicalize();
        let s = f.to_json();
        assert_eq!(LCFunction::from_json(&s, P).unwrap(), f);
    }

    #[test]
    fn group_side_wrapper() {
        let cfg = FieldConfig::default();
        let f = LCFunction::from_terms(
            P,
            vec![(q(2), CosetCell::standard(1)), (q(1), CosetCell::standard(2))],
        );
        let w = phi_pullback_support(&f).unwrap();
        assert_eq!(w.evaluate(&GroupElement::identity(cfg)).unwrap(), q(3));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = rand_sl2(&mut rng, 1);
            let g = cayley(&Sl2Element::from_exact(&x, cfg)).unwrap();
            assert_eq!(w.evaluate(&g).unwrap(), f.evaluate(&x));
        }
        assert!(matches!(
            phi_pullback_support(&LCFunction::unit_ball(P)),
            Err(Error::OutsideDomain(_))
        ));
    }
}
