//! The Bruhat–Tits tree of SL2(Q_p) and its vertex Moy–Prasad lattices.
//!
//! Vertex `(m, x)` is the homothety class of the lattice spanned by the
//! columns of `[[p^m, x], [0, 1]]`, with `x` reduced modulo `p^m O`.
//! The lattice `g_{v,n}` is `Ad(g_v)(p^n sl2(O))`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::mat::{QMat2, QSl2};
use crate::rational::{fmt_q, p_pow, parse_q, reduce_mod, vp, vp_or_inf, Q};
use crate::sl2::TorusType;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeVertex {
    pub m: i64,
    pub x: Q,
}

impl TreeVertex {
    pub fn new(m: i64, x: Q, p: u64) -> Self {
        let x = reduce_mod(&x, p, m);
        Self { m, x }
    }

    pub fn base() -> Self {
        Self { m: 0, x: Q::zero() }
    }

    /// Basis matrix g_v with g_v O^2 in the class of v.
    pub fn basis(&self, p: u64) -> QMat2 {
        QMat2::new(p_pow(p, self.m), self.x.clone(), Q::zero(), Q::one())
    }

    /// Type of the vertex; SL2 preserves it.
    pub fn parity(&self) -> i64 {
        self.m.rem_euclid(2)
    }

    pub fn parse(s: &str, p: u64) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("expected (m,x): '{s}'")))?;
        let (m, x) = inner
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected (m,x): '{s}'")))?;
        let m: i64 = m.parse().map_err(|_| Error::Parse(format!("bad m in '{s}'")))?;
        Ok(Self::new(m, parse_q(x)?, p))
    }
}

impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, fmt_q(&self.x))
    }
}

/// The q+1 adjacent vertices.
pub fn neighbors(v: &TreeVertex, p: u64) -> Vec<TreeVertex> {
    let step = p_pow(p, v.m);
    let mut out: Vec<TreeVertex> = (0..p)
        .map(|j| TreeVertex::new(v.m + 1, &v.x + &step * Q::from_integer(BigInt::from(j)), p))
        .collect();
    out.push(TreeVertex::new(v.m - 1, v.x.clone(), p));
    out
}

pub fn distance(v: &TreeVertex, w: &TreeVertex, p: u64) -> i64 {
    let lo = v.m.min(w.m);
    let j = lo.min(vp_or_inf(&(&v.x - &w.x), p));
    v.m + w.m - 2 * j
}

/// All vertices within distance R of `center`, in BFS order.
pub fn ball(center: &TreeVertex, radius: i64, p: u64) -> Vec<TreeVertex> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(center.clone());
    queue.push_back((center.clone(), 0));
    while let Some((v, d)) = queue.pop_front() {
        if d < radius {
            for w in neighbors(&v, p) {
                if seen.insert(w.clone()) {
                    queue.push_back((w, d + 1));
                }
            }
        }
        out.push(v);
    }
    out
}

pub fn ball_size(p: u64, radius: i64) -> u64 {
    if radius == 0 {
        1
    } else {
        1 + (p + 1) * (p.pow(radius as u32) - 1) / (p - 1)
    }
}

/// Vertex of the lattice spanned by the columns of `g`.
pub fn vertex_of_lattice(g: &QMat2, p: u64) -> TreeVertex {
    let mut c1 = [g.m[0][0].clone(), g.m[1][0].clone()];
    let mut c2 = [g.m[0][1].clone(), g.m[1][1].clone()];
    // Pivot on the column whose bottom entry has the smaller valuation.
    if vp_or_inf(&c1[1], p) < vp_or_inf(&c2[1], p) {
        std::mem::swap(&mut c1, &mut c2);
    }
    let t = &c1[1] / &c2[1];
    let alpha = &c1[0] - &t * &c2[0];
    let gamma = c2[1].clone();
    let m = vp(&(&alpha / &gamma), p).expect("lattice matrix must be invertible");
    TreeVertex::new(m, &c2[0] / &gamma, p)
}

/// g . v for g in GL2(F).
pub fn act(g: &QMat2, v: &TreeVertex, p: u64) -> TreeVertex {
    vertex_of_lattice(&g.mul(&v.basis(p)), p)
}

/// g_{v,n} = Ad(g_v)(p^n sl2(O)).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeDescriptor {
    pub vertex: TreeVertex,
    pub level: i64,
}

impl LatticeDescriptor {
    pub fn basis_matrix(&self, p: u64) -> QMat2 {
        self.vertex.basis(p)
    }

    /// Ad(g_v^{-1}) X, the coordinates of X in the vertex frame.
    pub fn frame(&self, x: &QSl2, p: u64) -> QSl2 {
        let (m, t) = (self.vertex.m, &self.vertex.x);
        let b = &x.b + (&x.a * t) * Q::from_integer(2.into()) - &x.c * t * t;
        QSl2::new(&x.a - &x.c * t, b * p_pow(p, -m), &x.c * p_pow(p, m))
    }

    pub fn contains(&self, x: &QSl2, p: u64) -> bool {
        self.frame(x, p).in_level(p, self.level)
    }

    /// Largest n with X in g_{v,n}.
    pub fn level_of(&self, x: &QSl2, p: u64) -> Option<i64> {
        self.frame(x, p).min_val(p)
    }

    /// Z-module generators Ad(g_v)(p^n H), Ad(g_v)(p^n E), Ad(g_v)(p^n F).
    pub fn generators(&self, p: u64) -> [QSl2; 3] {
        let g = self.vertex.basis(p);
        let s = p_pow(p, self.level);
        QSl2::basis().map(|e| g.ad(&e.scale(&s)))
    }

    pub fn contains_lattice(&self, other: &LatticeDescriptor, p: u64) -> bool {
        other.generators(p).iter().all(|y| self.contains(y, p))
    }

    /// Smallest k with p^k sl2(O) inside this lattice.
    pub fn standard_inner_level(&self, p: u64) -> i64 {
        let g = self.vertex.basis(p);
        let e = QSl2::basis().iter().map(|b| g.ad_inv(b).min_val(p).unwrap()).min().unwrap();
        self.level - e
    }

    /// Largest M with this lattice inside p^{-M} sl2(O).
    pub fn standard_outer_bound(&self, p: u64) -> i64 {
        -self.generators(p).iter().map(|y| y.min_val(p).unwrap()).min().unwrap()
    }

    pub fn scaled(&self, shift: i64) -> Self {
        Self { vertex: self.vertex.clone(), level: self.level + shift }
    }
}

impl fmt::Display for LatticeDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g[{},{}]", self.vertex, self.level)
    }
}

pub fn mp_lattice(v: &TreeVertex, n: i64) -> LatticeDescriptor {
    LatticeDescriptor { vertex: v.clone(), level: n }
}

/// Maximal Moy–Prasad level of X over the vertices of ball(v0, R).
pub fn depth_via_tree(x: &QSl2, radius: i64, p: u64) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::Unsupported("depth_via_tree of the zero element".into()));
    }
    Ok(ball(&TreeVertex::base(), radius, p)
        .iter()
        .map(|v| mp_lattice(v, 0).level_of(x, p).unwrap())
        .max()
        .unwrap())
}

/// Count of vertices w with X in g_{w,n} and w in the SL2-orbit of v0,
/// modulo the split torus for split X.
pub fn tree_count_oracle(x: &QSl2, n: i64, radius: i64, p: u64) -> Result<Q> {
    tree_count_typed(x, &TreeVertex::base(), n, radius, p)
}

/// As [`tree_count_oracle`], restricted to the vertex type of `orbit_of`.
///
/// Split X must be diagonal: the fixed set is then a tube around the standard
/// apartment, and the vertices projecting to positions 0 and 1 form a
/// fundamental domain for the torus translations.
pub fn tree_count_typed(
    x: &QSl2,
    orbit_of: &TreeVertex,
    n: i64,
    radius: i64,
    p: u64,
) -> Result<Q> {
    let minus_det = -x.det();
    if minus_det.is_zero() {
        return Err(Error::NotRegular);
    }
    let parity = orbit_of.parity();
    let mut count = 0u64;
    match TorusType::of_minus_det(&minus_det, p) {
        TorusType::Split => {
            if !x.b.is_zero() || !x.c.is_zero() {
                return Err(Error::Unsupported(
                    "split tree oracle requires a diagonal element".into(),
                ));
            }
            for k in 0..2i64 {
                let apt = TreeVertex::new(k, Q::zero(), p);
                if apt.parity() == parity && mp_lattice(&apt, n).contains(x, p) {
                    count += 1;
                }
                for m in (k + 1)..=(k + radius) {
                    if m.rem_euclid(2) != parity {
                        continue;
                    }
                    let span = p.pow((m - k) as u32);
                    for t in 1..span {
                        if t % p == 0 {
                            continue;
                        }
                        let v = TreeVertex::new(
                            m,
                            Q::from_integer(BigInt::from(t)) * p_pow(p, k),
                            p,
                        );
                        if mp_lattice(&v, n).contains(x, p) {
                            if m - k == radius {
                                return Err(Error::BallTooSmall { radius });
                            }
                            count += 1;
                        }
                    }
                }
            }
        }
        TorusType::Elliptic(_) => {
            let base = TreeVertex::base();
            for v in ball(&base, radius, p) {
                if v.parity() == parity && mp_lattice(&v, n).contains(x, p) {
                    if distance(&v, &base, p) == radius {
                        return Err(Error::BallTooSmall { radius });
                    }
                    count += 1;
                }
            }
        }
    }
    Ok(Q::from_integer(BigInt::from(count)))
}
