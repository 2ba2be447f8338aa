//! Elements of sl2(F) and SL2(F): classification, depth, and the Cayley map.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{QMat2, QSl2};
use crate::padic::{FieldConfig, PadicScalar, QuadExtDescriptor, SquareClass};
use crate::rational::{p_pow, q, vp, Q};

/// Dimension of the nilpotent cone of sl2.
pub const DIM_NILPOTENT_CONE: i64 = 2;

/// A nilpotent orbit of sl2(F): zero, or regular with square-class tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrbitLabel {
    Zero,
    Regular(SquareClass),
}

impl OrbitLabel {
    pub const ALL: [OrbitLabel; 5] = [
        OrbitLabel::Zero,
        OrbitLabel::Regular(SquareClass::One),
        OrbitLabel::Regular(SquareClass::Eps),
        OrbitLabel::Regular(SquareClass::Pi),
        OrbitLabel::Regular(SquareClass::EpsPi),
    ];

    pub fn dim(self) -> i64 {
        match self {
            OrbitLabel::Zero => 0,
            OrbitLabel::Regular(_) => 2,
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).unwrap()
    }

    pub fn name(self) -> String {
        match self {
            OrbitLabel::Zero => "Zero".into(),
            OrbitLabel::Regular(c) => format!("Regular({})", c.name()),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("zero") {
            return Ok(OrbitLabel::Zero);
        }
        let inner = t
            .strip_prefix("Regular(")
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(t);
        Ok(OrbitLabel::Regular(SquareClass::parse(inner)?))
    }
}

impl fmt::Display for OrbitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TorusType {
    Split,
    Elliptic(QuadExtDescriptor),
}

impl TorusType {
    pub const ALL: [TorusType; 4] = [
        TorusType::Split,
        TorusType::Elliptic(QuadExtDescriptor::Eps),
        TorusType::Elliptic(QuadExtDescriptor::Pi),
        TorusType::Elliptic(QuadExtDescriptor::EpsPi),
    ];

    pub fn of_minus_det(minus_det: &Q, p: u64) -> Self {
        match QuadExtDescriptor::from_class(SquareClass::of_rational(minus_det, p)) {
            None => TorusType::Split,
            Some(e) => TorusType::Elliptic(e),
        }
    }

    pub fn name(self) -> String {
        match self {
            TorusType::Split => "split".into(),
            TorusType::Elliptic(e) if e.is_ramified() => format!("ramified-{}", e.name()),
            TorusType::Elliptic(e) => format!("unramified-{}", e.name()),
        }
    }
}

/// Classification of an element of sl2(F).
#[derive(Clone, Debug, PartialEq)]
pub enum ElementClass {
    RegularSS {
        torus: TorusType,
        /// Norm-coset flag of b (or -c) for elliptic tori; always true for split.
        ss_tag: bool,
        /// -det = u^2.
        minus_det: PadicScalar,
        /// Eigenvalue u for split tori.
        u: Option<PadicScalar>,
    },
    Nilpotent(OrbitLabel),
    ZeroElt,
}

impl ElementClass {
    /// Tags that must be invariant under conjugation.
    pub fn tags(&self) -> String {
        match self {
            ElementClass::RegularSS { torus, ss_tag, minus_det, .. } => {
                format!("ss:{}:{}:{}", torus.name(), ss_tag, minus_det)
            }
            ElementClass::Nilpotent(l) => format!("nil:{l}"),
            ElementClass::ZeroElt => "zero".into(),
        }
    }
}

/// Depth of an element: a half-integer, or `Deep` for nilpotent elements,
/// which lie in g_r for every r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Depth {
    Finite(Ratio<i64>),
    Deep,
}

impl Depth {
    pub fn finite(self) -> Option<Ratio<i64>> {
        match self {
            Depth::Finite(r) => Some(r),
            Depth::Deep => None,
        }
    }
}

impl PartialOrd for Depth {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Depth {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Depth::Deep, Depth::Deep) => Ordering::Equal,
            (Depth::Deep, _) => Ordering::Greater,
            (_, Depth::Deep) => Ordering::Less,
            (Depth::Finite(a), Depth::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Deep => write!(f, "deep"),
            Depth::Finite(r) => write!(f, "{r}"),
        }
    }
}

/// Boundary convention for g_r membership.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    #[default]
    Closed,
    Strict,
}

/// The trace-zero matrix ((a, b), (c, -a)) over Q_p.
#[derive(Clone, Debug, PartialEq)]
pub struct Sl2Element {
    pub a: PadicScalar,
    pub b: PadicScalar,
    pub c: PadicScalar,
}

impl Sl2Element {
    pub fn new(a: PadicScalar, b: PadicScalar, c: PadicScalar) -> Self {
        Self { a, b, c }
    }

    pub fn from_exact(x: &QSl2, cfg: FieldConfig) -> Self {
        Self::new(
            PadicScalar::from_q(&x.a, cfg),
            PadicScalar::from_q(&x.b, cfg),
            PadicScalar::from_q(&x.c, cfg),
        )
    }

    pub fn config(&self) -> FieldConfig {
        self.a.config()
    }

    pub fn to_exact(&self) -> Result<QSl2> {
        Ok(QSl2::new(
            self.a.exact().ok_or(Error::NotExact)?,
            self.b.exact().ok_or(Error::NotExact)?,
            self.c.exact().ok_or(Error::NotExact)?,
        ))
    }

    pub fn det(&self) -> Result<PadicScalar> {
        let aa = self.a.mul(&self.a)?;
        let bc = self.b.mul(&self.c)?;
        aa.add(&bc).map(|s| s.neg())
    }

    pub fn is_exact_zero(&self) -> bool {
        self.a.is_exact_zero() && self.b.is_exact_zero() && self.c.is_exact_zero()
    }

    pub fn scale(&self, s: &PadicScalar) -> Result<Self> {
        Ok(Self::new(self.a.mul(s)?, self.b.mul(s)?, self.c.mul(s)?))
    }

    pub fn parse(s: &str, cfg: FieldConfig) -> Result<Self> {
        Ok(Self::from_exact(&QSl2::parse(s)?, cfg))
    }
}

impl fmt::Display for Sl2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_exact() {
            Ok(x) => write!(f, "{x}"),
            Err(_) => write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.a.neg()),
        }
    }
}

pub fn classify(x: &Sl2Element) -> Result<ElementClass> {
    if x.is_exact_zero() {
        return Ok(ElementClass::ZeroElt);
    }
    let det = match x.det() {
        Ok(d) => d,
        Err(Error::InsufficientPrecision(_)) => return Err(Error::AmbiguousNilpotent),
        Err(e) => return Err(e),
    };
    if det.is_exact_zero() {
        let tag = if !x.b.is_exact_zero() { x.b.square_class()? } else { x.c.neg().square_class()? };
        return Ok(ElementClass::Nilpotent(OrbitLabel::Regular(tag)));
    }
    let minus_det = det.neg();
    match QuadExtDescriptor::from_class(minus_det.square_class()?) {
        None => {
            let u = minus_det.sqrt()?;
            Ok(ElementClass::RegularSS { torus: TorusType::Split, ss_tag: true, minus_det, u })
        }
        Some(ext) => {
            let ss_tag = if !x.b.is_exact_zero() {
                x.b.is_norm(ext)?
            } else {
                x.c.neg().is_norm(ext)?
            };
            Ok(ElementClass::RegularSS { torus: TorusType::Elliptic(ext), ss_tag, minus_det, u: None })
        }
    }
}

/// Depth: val(-det)/2 for regular semisimple elements, `Deep` otherwise.
pub fn depth(x: &Sl2Element) -> Result<Depth> {
    match classify(x)? {
        ElementClass::RegularSS { minus_det, .. } => {
            Ok(Depth::Finite(Ratio::new(minus_det.valuation().unwrap(), 2)))
        }
        _ => Ok(Depth::Deep),
    }
}

pub fn in_g_r(x: &Sl2Element, r: Ratio<i64>) -> Result<bool> {
    in_g_r_with(x, r, Boundary::Closed)
}

pub fn in_g_r_with(x: &Sl2Element, r: Ratio<i64>, boundary: Boundary) -> Result<bool> {
    let d = depth(x)?;
    Ok(match boundary {
        Boundary::Closed => d >= Depth::Finite(r),
        Boundary::Strict => d > Depth::Finite(r),
    })
}

/// Depth of an exact element, computed straight from the determinant.
pub fn depth_exact(x: &QSl2, p: u64) -> Depth {
    match vp(&x.det(), p) {
        None => Depth::Deep,
        Some(v) => Depth::Finite(Ratio::new(v, 2)),
    }
}

pub fn is_top_nilpotent(x: &Sl2Element) -> Result<bool> {
    let det = x.det()?;
    Ok(det.valuation().is_none_or(|v| v > 0))
}

/// 2x2 matrix over Q_p.
#[derive(Clone, Debug, PartialEq)]
pub struct PMat2 {
    pub m: [[PadicScalar; 2]; 2],
}

impl PMat2 {
    pub fn from_exact(g: &QMat2, cfg: FieldConfig) -> Self {
        let e = |i: usize, j: usize| PadicScalar::from_q(&g.m[i][j], cfg);
        Self { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn to_exact(&self) -> Result<QMat2> {
        let e = |i: usize, j: usize| self.m[i][j].exact().ok_or(Error::NotExact);
        Ok(QMat2::new(e(0, 0)?, e(0, 1)?, e(1, 0)?, e(1, 1)?))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let e = |i: usize, j: usize| -> Result<PadicScalar> {
            self.m[i][0].mul(&o.m[0][j])?.add(&self.m[i][1].mul(&o.m[1][j])?)
        };
        Ok(Self { m: [[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]] })
    }

    pub fn det(&self) -> Result<PadicScalar> {
        self.m[0][0].mul(&self.m[1][1])?.sub(&self.m[0][1].mul(&self.m[1][0])?)
    }

    pub fn inv(&self) -> Result<Self> {
        let d = self.det()?;
        Ok(Self {
            m: [
                [self.m[1][1].div(&d)?, self.m[0][1].neg().div(&d)?],
                [self.m[1][0].neg().div(&d)?, self.m[0][0].div(&d)?],
            ],
        })
    }

    fn of_sl2(x: &Sl2Element) -> Self {
        Self { m: [[x.a.clone(), x.b.clone()], [x.c.clone(), x.a.neg()]] }
    }

    fn shifted(&self, t: &PadicScalar) -> Result<Self> {
        let mut r = self.clone();
        r.m[0][0] = r.m[0][0].add(t)?;
        r.m[1][1] = r.m[1][1].add(t)?;
        Ok(r)
    }
}

/// An element of SL2(F).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    mat: PMat2,
}

impl GroupElement {
    pub fn new(mat: PMat2) -> Result<Self> {
        let cfg = mat.m[0][0].config();
        let one = PadicScalar::from_rational(1, 1, cfg)?;
        if !mat.det()?.agrees_with(&one) {
            return Err(Error::SpecMismatch("determinant is not 1".into()));
        }
        Ok(Self { mat })
    }

    pub fn from_exact(g: &QMat2, cfg: FieldConfig) -> Result<Self> {
        Self::new(PMat2::from_exact(g, cfg))
    }

    pub fn identity(cfg: FieldConfig) -> Self {
        Self { mat: PMat2::from_exact(&QMat2::identity(), cfg) }
    }

    pub fn matrix(&self) -> &PMat2 {
        &self.mat
    }

    pub fn to_exact(&self) -> Result<QMat2> {
        self.mat.to_exact()
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Ok(Self { mat: self.mat.mul(&o.mat)? })
    }

    /// Inverse via the adjugate (det = 1).
    pub fn inverse(&self) -> Self {
        let m = &self.mat.m;
        Self {
            mat: PMat2 {
                m: [[m[1][1].clone(), m[0][1].neg()], [m[1][0].neg(), m[0][0].clone()]],
            },
        }
    }

    pub fn trace(&self) -> Result<PadicScalar> {
        self.mat.m[0][0].add(&self.mat.m[1][1])
    }

    pub fn is_top_unipotent(&self) -> Result<bool> {
        let cfg = self.mat.m[0][0].config();
        let two = PadicScalar::from_rational(2, 1, cfg)?;
        match self.trace()?.sub(&two) {
            Ok(t) => Ok(t.valuation().is_none_or(|v| v > 0)),
            // All known digits cancelled: trace agrees with 2 to full precision.
            Err(Error::InsufficientPrecision(_)) => Ok(true),
            Err(e) => Err(e),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_exact() {
            Ok(g) => write!(f, "{g}"),
            Err(_) => {
                let m = &self.mat.m;
                write!(f, "[[{},{}],[{},{}]]", m[0][0], m[0][1], m[1][0], m[1][1])
            }
        }
    }
}

/// g X g^{-1}; the a-entry is reread from the (0,0) slot so the trace stays zero.
pub fn ad(g: &GroupElement, x: &Sl2Element) -> Result<Sl2Element> {
    let r = g.mat.mul(&PMat2::of_sl2(x))?.mul(&g.inverse().mat)?;
    let [[a, b], [c, _]] = r.m;
    Ok(Sl2Element::new(a, b, c))
}

/// Cayley map (1 + X/2)(1 - X/2)^{-1}, defined on topologically nilpotent X.
pub fn cayley(x: &Sl2Element) -> Result<GroupElement> {
    if !is_top_nilpotent(x)? {
        return Err(Error::OutsideDomain(format!("{x} is not topologically nilpotent")));
    }
    let cfg = x.config();
    let half = PadicScalar::from_rational(1, 2, cfg)?;
    let h = x.scale(&half)?;
    let hm = PMat2::of_sl2(&h);
    let one = PadicScalar::from_rational(1, 1, cfg)?;
    let plus = hm.shifted(&one)?;
    let minus = PMat2::of_sl2(&h.scale(&PadicScalar::from_rational(-1, 1, cfg)?)?).shifted(&one)?;
    GroupElement::new(plus.mul(&minus.inv()?)?)
}

/// Inverse Cayley map 2(g - 1)(g + 1)^{-1}, defined on topologically unipotent g.
pub fn cayley_inv(g: &GroupElement) -> Result<Sl2Element> {
    if !g.is_top_unipotent()? {
        return Err(Error::OutsideDomain("group element is not topologically unipotent".into()));
    }
    let cfg = g.mat.m[0][0].config();
    let one = PadicScalar::from_rational(1, 1, cfg)?;
    let gm1 = g.mat.shifted(&one.neg())?;
    let gp1 = g.mat.shifted(&one)?;
    let r = gm1.mul(&gp1.inv()?)?;
    let two = PadicScalar::from_rational(2, 1, cfg)?;
    Ok(Sl2Element::new(r.m[0][0].mul(&two)?, r.m[0][1].mul(&two)?, r.m[1][0].mul(&two)?))
}

/// A random element of SL2(Z[1/p]) built from elementary factors.
pub fn random_sl2(cfg: FieldConfig, rng: &mut impl Rng, size_bound: i64) -> QMat2 {
    let entry = |rng: &mut dyn rand::RngCore| {
        let n = rng.gen_range(-size_bound..=size_bound);
        let e = rng.gen_range(0..=1);
        q(n) * p_pow(cfg.p, -e)
    };
    let k = rng.gen_range(-1..=1);
    let t = QMat2::diag(p_pow(cfg.p, k), p_pow(cfg.p, -k));
    QMat2::upper(entry(rng))
        .mul(&QMat2::lower(entry(rng)))
        .mul(&QMat2::upper(entry(rng)))
        .mul(&t)
}

/// A seeded random SL2-conjugate of X, together with the conjugator.
pub fn random_conjugate(
    x: &Sl2Element,
    seed: u64,
    size_bound: i64,
) -> Result<(GroupElement, Sl2Element)> {
    let cfg = x.config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = GroupElement::from_exact(&random_sl2(cfg, &mut rng, size_bound), cfg)?;
    let y = ad(&g, x)?;
    Ok((g, y))
}

/// What to build a standard representative for.
#[derive(Clone, Debug, PartialEq)]
pub enum RepSpec {
    Orbit(OrbitLabel),
    Split { u: Q },
    /// Elliptic element with -det = minus_det; `norm_tag` selects the SL2-orbit.
    Elliptic { ext: QuadExtDescriptor, minus_det: Q, norm_tag: bool },
}

pub fn standard_representative(spec: &RepSpec, cfg: FieldConfig) -> Result<Sl2Element> {
    let p = cfg.p;
    let x = match spec {
        RepSpec::Orbit(OrbitLabel::Zero) => QSl2::zero(),
        RepSpec::Orbit(OrbitLabel::Regular(c)) => {
            QSl2::new(Q::zero(), c.representative(cfg), Q::zero())
        }
        RepSpec::Split { u } => {
            if u.is_zero() {
                return Err(Error::SpecMismatch("split representative needs u != 0".into()));
            }
            QSl2::diag(u.clone())
        }
        RepSpec::Elliptic { ext, minus_det, norm_tag } => {
            if minus_det.is_zero() || SquareClass::of_rational(minus_det, p) != ext.class() {
                return Err(Error::SpecMismatch(format!(
                    "-det = {minus_det} is not in class {}",
                    ext.name()
                )));
            }
            let beta = if *norm_tag {
                Q::one()
            } else {
                [q(cfg.eps() as i64), q(p as i64), q((cfg.eps() * p) as i64)]
                    .into_iter()
                    .find(|b| !ext.is_norm_rational(b, p))
                    .unwrap()
            };
            QSl2::new(Q::zero(), beta.clone(), minus_det / &beta)
        }
    };
    Ok(Sl2Element::from_exact(&x, cfg))
}

/// Convenience: eigenvalue data for an exact regular element.
pub fn minus_det_exact(x: &QSl2) -> Q {
    -x.det()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn cfg() -> FieldConfig {
        FieldConfig::with_prime(5).unwrap()
    }

    fn el(a: i64, b: i64, c: i64) -> Sl2Element {
        Sl2Element::from_exact(&QSl2::new(q(a), q(b), q(c)), cfg())
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify(&el(0, 1, 0)).unwrap(),
            ElementClass::Nilpotent(OrbitLabel::Regular(SquareClass::One))
        );
        match classify(&el(1, 0, 0)).unwrap() {
            ElementClass::RegularSS { torus: TorusType::Split, u: Some(u), .. } => {
                assert_eq!(u.exact(), Some(q(1)))
            }
            other => panic!("{other:?}"),
        }
        match classify(&el(0, 1, 2)).unwrap() {
            ElementClass::RegularSS { torus, .. } => {
                assert_eq!(torus, TorusType::Elliptic(QuadExtDescriptor::Eps))
            }
            other => panic!("{other:?}"),
        }
        // -1 is a square in Q_5
        assert_eq!(
            classify(&el(0, 0, 1)).unwrap(),
            ElementClass::Nilpotent(OrbitLabel::Regular(SquareClass::One))
        );
        assert_eq!(classify(&el(0, 0, 0)).unwrap(), ElementClass::ZeroElt);
    }

    #[test]
    fn ambiguous_nilpotent() {
        let c = cfg();
        let a = PadicScalar::from_digits(0, &[1, 0, 0], c).unwrap();
        let b = PadicScalar::from_digits(0, &[1, 0, 0], c).unwrap();
        let cc = PadicScalar::from_digits(0, &[4, 4, 4], c).unwrap();
        // det = -1 - (1)(-1) = 0 to precision
        assert_eq!(classify(&Sl2Element::new(a, b, cc)), Err(Error::AmbiguousNilpotent));
    }

    #[test]
    fn depth_examples() {
        assert_eq!(depth(&el(5, 0, 0)).unwrap(), Depth::Finite(Ratio::from_integer(1)));
        assert_eq!(depth(&el(1, 0, 0)).unwrap(), Depth::Finite(Ratio::from_integer(0)));
        assert_eq!(depth(&el(0, 1, 5)).unwrap(), Depth::Finite(Ratio::new(1, 2)));
        assert_eq!(depth(&el(0, 1, 0)).unwrap(), Depth::Deep);
        assert!(in_g_r(&el(5, 0, 0), Ratio::from_integer(1)).unwrap());
        assert!(!in_g_r_with(&el(5, 0, 0), Ratio::from_integer(1), Boundary::Strict).unwrap());
        assert!(!in_g_r(&el(1, 0, 0), Ratio::from_integer(1)).unwrap());
        assert!(in_g_r(&el(0, 1, 0), Ratio::from_integer(100)).unwrap());
    }

    #[test]
    fn top_nilpotence() {
        assert!(is_top_nilpotent(&el(5, 0, 0)).unwrap());
        assert!(!is_top_nilpotent(&el(1, 0, 0)).unwrap());
        assert!(is_top_nilpotent(&el(0, 1, 0)).unwrap());
    }

    #[test]
    fn cayley_examples() {
        let c = cfg();
        assert_eq!(cayley(&el(0, 0, 0)).unwrap(), GroupElement::identity(c));
        let g = cayley(&el(5, 0, 0)).unwrap().to_exact().unwrap();
        let u = q(5) / q(2);
        assert_eq!(g.m[0][0], (q(1) + &u) / (q(1) - &u));
        assert_eq!(g.m[1][1], (q(1) - &u) / (q(1) + &u));
        assert!(matches!(cayley(&el(1, 0, 0)), Err(Error::OutsideDomain(_))));
        let x = el(5, 25, -10);
        assert_eq!(cayley_inv(&cayley(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn standard_representatives() {
        let c = cfg();
        let n = standard_representative(&RepSpec::Orbit(OrbitLabel::Regular(SquareClass::Pi)), c)
            .unwrap();
        assert_eq!(n.to_exact().unwrap(), QSl2::new(q(0), q(5), q(0)));
        let s = standard_representative(&RepSpec::Split { u: q(1) }, c).unwrap();
        assert_eq!(s.to_exact().unwrap(), QSl2::diag(q(1)));
        for tag in [true, false] {
            let e = standard_representative(
                &RepSpec::Elliptic { ext: QuadExtDescriptor::Eps, minus_det: q(2), norm_tag: tag },
                c,
            )
            .unwrap();
            match classify(&e).unwrap() {
                ElementClass::RegularSS { torus, ss_tag, minus_det, .. } => {
                    assert_eq!(torus, TorusType::Elliptic(QuadExtDescriptor::Eps));
                    assert_eq!(ss_tag, tag);
                    assert_eq!(minus_det.exact(), Some(q(2)));
                }
                other => panic!("{other:?}"),
            }
        }
        assert!(standard_representative(
            &RepSpec::Elliptic { ext: QuadExtDescriptor::Pi, minus_det: q(2), norm_tag: true },
            c
        )
        .is_err());
    }
}
