//! Shalika germs: extraction from exact orbital integrals, homogeneity,
//! and the expansion, scaling and vanishing checks built on them.

use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lcf::{CosetCell, LCFunction};
use crate::linalg::{kernel, rank, solve, transpose, Matrix};
use crate::mat::QSl2;
use crate::orbital::{nilpotent_vector, ss_normalization, ss_orbital};
use crate::padic::{FieldConfig, SquareClass};
use crate::rational::{fmt_q, p_pow, q, Q};
use crate::sl2::{depth_exact, Boundary, Depth, OrbitLabel, TorusType, DIM_NILPOTENT_CONE};
use crate::tree::{mp_lattice, TreeVertex};

/// How many times extraction may replace X by zeta^2 X before giving up.
pub const MAX_DEEPENING: i64 = 4;

/// Germs of the chart integral I_X / q^{floor(val(-det X)/2)} at X.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GermTable {
    pub x: QSl2,
    pub p: u64,
    /// Indexed as `OrbitLabel::ALL`.
    pub j: [Q; 5],
    /// JSON of the basis functions the table was solved from.
    pub provenance: Vec<String>,
    /// The table was extracted at zeta^{2 shift} X and extended back.
    pub shift: i64,
}

impl GermTable {
    pub fn get(&self, label: OrbitLabel) -> &Q {
        &self.j[label.index()]
    }

    /// Germs of I_X itself (the stored values times the normalization).
    pub fn unnormalized(&self) -> [Q; 5] {
        let n = ss_normalization(&self.x, self.p);
        self.j.clone().map(|v| v * &n)
    }

    /// Right-hand side of the expansion for a nilpotent vector.
    pub fn expand(&self, nil: &[Q; 5]) -> Q {
        let s: Q = self.j.iter().zip(nil).map(|(a, b)| a * b).sum();
        s * ss_normalization(&self.x, self.p)
    }
}

/// The table at zeta^{2k} X: j_Omega scaled by q^{-k (dim N - dim Omega)}.
pub fn homogeneity_extend(table: &GermTable, k: i64) -> GermTable {
    let p = table.p;
    let mut j = table.j.clone();
    for (i, l) in OrbitLabel::ALL.iter().enumerate() {
        j[i] *= p_pow(p, -k * (DIM_NILPOTENT_CONE - l.dim()));
    }
    GermTable {
        x: table.x.scale(&p_pow(p, 2 * k)),
        p,
        j,
        provenance: table.provenance.clone(),
        shift: table.shift - k,
    }
}

/// n_lambda = ((0, lambda), (0, 0)).
pub fn nilpotent_rep(lambda: SquareClass, p: u64) -> QSl2 {
    let cfg = FieldConfig::with_prime(p).expect("odd prime");
    QSl2::new(Q::zero(), lambda.representative(cfg), Q::zero())
}

/// Unit ball, its zeta^2-dilate and 1_{n_lambda + g_{v0,2}} for all lambda.
pub fn default_basis(p: u64) -> Vec<LCFunction> {
    let ball = LCFunction::unit_ball(p);
    let mut out = vec![ball.clone(), ball.dilate(&p_pow(p, 2))];
    for l in SquareClass::ALL {
        let cell = CosetCell::new(nilpotent_rep(l, p), mp_lattice(&TreeVertex::base(), 2), p);
        out.push(LCFunction::indicator(cell, p));
    }
    out
}

fn depth_value(x: &QSl2, p: u64) -> Ratio<i64> {
    match depth_exact(x, p) {
        Depth::Finite(d) => d,
        Depth::Deep => unreachable!("regular elements have finite depth"),
    }
}

fn nil_matrix(fs: &[LCFunction]) -> Result<Matrix> {
    fs.par_iter().map(|f| nilpotent_vector(f).map(|v| v.to_vec())).collect()
}

/// The germ system at X itself: the basis rows determine j, every
/// basis and held-out row must then have zero residual.
pub fn extract_germs(x: &QSl2, basis: &[LCFunction], held_out: &[LCFunction]) -> Result<GermTable> {
    if x.det().is_zero() {
        return Err(Error::NotRegular);
    }
    let p = basis.first().map_or(5, |f| f.p);
    let rows = nil_matrix(basis)?;
    let r = rank(&rows);
    if r < 5 {
        return Err(Error::RankDeficient { rank: r });
    }
    let norm = ss_normalization(x, p);
    let lhs: Vec<Q> = basis
        .par_iter()
        .map(|f| ss_orbital(x, f).map(|r| r.value / &norm))
        .collect::<Result<_>>()?;
    let sol = solve(&rows, &lhs)
        .ok_or_else(|| Error::InconsistentSystem(format!("basis rows disagree at {x}")))?;
    let table = GermTable {
        x: x.clone(),
        p,
        j: sol.try_into().expect("five unknowns"),
        provenance: basis.iter().map(|f| f.to_json()).collect(),
        shift: 0,
    };
    for f in held_out {
        let row = expansion_row(f, x, &table)?;
        if !row.residual.is_zero() {
            return Err(Error::InconsistentSystem(format!(
                "held-out residual {} at {x}",
                fmt_q(&row.residual)
            )));
        }
    }
    Ok(table)
}

/// Extraction at the first zeta^{2k} X deep enough for the basis (depth at
/// least the largest proxy depth plus one), deepening further on
/// inconsistency, then extended back to X.
pub fn extract_germs_deepening(
    x: &QSl2,
    basis: &[LCFunction],
    held_out: &[LCFunction],
) -> Result<GermTable> {
    let p = basis.first().map_or(5, |f| f.p);
    let need = basis.iter().chain(held_out).filter_map(|f| f.proxy_depth()).max().unwrap_or(0) + 1;
    let mut k = 0;
    while depth_value(&x.scale(&p_pow(p, 2 * k)), p) < Ratio::from_integer(need) {
        k += 1;
    }
    let first = k;
    loop {
        let xk = x.scale(&p_pow(p, 2 * k));
        match extract_germs(&xk, basis, held_out) {
            Ok(t) => return Ok(homogeneity_extend(&t, -k)),
            Err(Error::InconsistentSystem(_)) if k < first + MAX_DEEPENING => k += 1,
            Err(e) => return Err(e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpansionReport {
    pub f_id: String,
    #[serde(rename = "X_id")]
    pub x_id: String,
    pub torus: String,
    pub depth: String,
    pub r: i64,
    pub lhs: String,
    pub rhs: String,
    pub residual: String,
    pub pass: bool,
    /// Contrast rows lie outside the asserted range and never gate.
    pub contrast: bool,
    #[serde(skip)]
    pub residual_q: Q,
}

pub struct Row {
    pub lhs: Q,
    pub rhs: Q,
    pub residual: Q,
}

pub fn expansion_row(f: &LCFunction, x: &QSl2, table: &GermTable) -> Result<Row> {
    let lhs = ss_orbital(x, f)?.value;
    let rhs = table.expand(&nilpotent_vector(f)?);
    let residual = &lhs - &rhs;
    Ok(Row { lhs, rhs, residual })
}

fn torus_name(x: &QSl2, p: u64) -> String {
    TorusType::of_minus_det(&-x.det(), p).name()
}

fn fmt_depth(d: Ratio<i64>) -> String {
    if d.is_integer() {
        d.to_integer().to_string()
    } else {
        format!("{}/{}", d.numer(), d.denom())
    }
}

/// Combinations of pool members whose nilpotent vector is supported on
/// Omega alone: one with vector e_Omega, and its sums with each element of
/// the pool's nilpotent kernel.
pub fn construct_hr_omega(omega: OrbitLabel, pool: &[LCFunction]) -> Result<Vec<LCFunction>> {
    let p = pool.first().map_or(5, |f| f.p);
    let rows = nil_matrix(pool)?;
    let cols = transpose(&rows);
    let mut e = vec![Q::zero(); 5];
    e[omega.index()] = Q::one();
    let c = solve(&cols, &e).ok_or_else(|| {
        Error::PoolDeficient(format!("pool does not reach {} (rank {})", omega, rank(&rows)))
    })?;
    let combine = |coeffs: &[Q]| {
        let parts: Vec<(Q, &LCFunction)> =
            coeffs.iter().cloned().zip(pool.iter()).filter(|(c, _)| !c.is_zero()).collect();
        LCFunction::linear_combination(p, &parts)
    };
    let base = combine(&c);
    let mut out = vec![base.clone()];
    for k in kernel(&cols) {
        let sum: Vec<Q> = c.iter().zip(&k).map(|(a, b)| a + b).collect();
        out.push(combine(&sum));
    }
    Ok(out)
}

/// Pool combinations with identically zero nilpotent vector.
pub fn nilpotent_kernel(pool: &[LCFunction]) -> Result<Vec<LCFunction>> {
    let p = pool.first().map_or(5, |f| f.p);
    let cols = transpose(&nil_matrix(pool)?);
    Ok(kernel(&cols)
        .into_iter()
        .map(|k| {
            let parts: Vec<(Q, &LCFunction)> = k.into_iter().zip(pool.iter()).collect();
            LCFunction::linear_combination(p, &parts)
        })
        .filter(|f| !f.is_zero())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimRow {
    pub h_id: String,
    #[serde(rename = "X_id")]
    pub x_id: String,
    pub torus: String,
    pub depth: String,
    pub r: i64,
    pub value: String,
    pub pass: bool,
}

/// For every h with vanishing nilpotent vector built from the pool (the
/// h-combinations of each H_r(Omega) member and the pool's nilpotent kernel),
/// I_X(h) = 0 on the grid.
pub fn verify_claim(r: i64, pool: &[LCFunction], grid: &[QSl2]) -> Result<Vec<ClaimRow>> {
    let mut hs: Vec<(String, LCFunction)> = Vec::new();
    for omega in OrbitLabel::ALL {
        for (i, f) in construct_hr_omega(omega, pool)?.iter().enumerate() {
            let h = f.h_combination(omega.dim() as u32)?;
            if nilpotent_vector(&h)?.iter().any(|v| !v.is_zero()) {
                return Err(Error::InconsistentSystem(format!(
                    "h-combination for {omega} has a nonzero nilpotent vector"
                )));
            }
            hs.push((format!("h[{omega}#{i}]"), h));
        }
    }
    for (i, h) in nilpotent_kernel(pool)?.into_iter().enumerate() {
        hs.push((format!("ker#{i}"), h));
    }
    let cells: Vec<(usize, usize)> =
        (0..hs.len()).flat_map(|i| (0..grid.len()).map(move |j| (i, j))).collect();
    cells
        .par_iter()
        .map(|&(i, j)| {
            let x = &grid[j];
            let p = hs[i].1.p;
            let v = ss_orbital(x, &hs[i].1)?.value;
            Ok(ClaimRow {
                h_id: hs[i].0.clone(),
                x_id: x.to_string(),
                torus: torus_name(x, p),
                depth: fmt_depth(depth_value(x, p)),
                r,
                pass: v.is_zero(),
                value: fmt_q(&v),
            })
        })
        .collect()
}

/// q^{dim Omega} I_X(f) = I_{zeta^2 X}(f).
pub fn verify_scaling(omega: OrbitLabel, f: &LCFunction, x: &QSl2) -> Result<bool> {
    let p = f.p;
    let lhs = ss_orbital(x, f)?.value * p_pow(p, omega.dim());
    let rhs = ss_orbital(&x.scale(&p_pow(p, 2)), f)?.value;
    Ok(lhs == rhs)
}

/// Expansion residuals for every (f, X) in the family and grid. Rows with X
/// outside g_r (under `boundary`) or f finer than depth r are contrast rows.
pub fn verify_theorem(
    r: i64,
    family: &[(String, LCFunction)],
    grid: &[QSl2],
    basis: &[LCFunction],
    boundary: Boundary,
) -> Result<Vec<ExpansionReport>> {
    let p = basis.first().map_or(5, |f| f.p);
    let tables: Vec<GermTable> =
        grid.iter().map(|x| extract_germs_deepening(x, basis, &[])).collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> =
        (0..family.len()).flat_map(|i| (0..grid.len()).map(move |j| (i, j))).collect();
    cells
        .par_iter()
        .map(|&(i, j)| {
            let (id, f) = &family[i];
            let x = &grid[j];
            let row = expansion_row(f, x, &tables[j])?;
            let d = depth_value(x, p);
            let inside = match boundary {
                Boundary::Closed => d >= Ratio::from_integer(r),
                Boundary::Strict => d > Ratio::from_integer(r),
            };
            let contrast = !inside || f.proxy_depth().is_some_and(|pd| pd > r);
            Ok(ExpansionReport {
                f_id: id.clone(),
                x_id: x.to_string(),
                torus: torus_name(x, p),
                depth: fmt_depth(d),
                r,
                lhs: fmt_q(&row.lhs),
                rhs: fmt_q(&row.rhs),
                residual: fmt_q(&row.residual),
                pass: row.residual.is_zero(),
                contrast,
                residual_q: row.residual,
            })
        })
        .collect()
}

/// Regular elements of depth exactly `d` (a half-integer for ramified tori)
/// for each torus type.
pub fn grid_at_depth(twice_depth: i64, p: u64) -> Vec<QSl2> {
    let cfg = FieldConfig::with_prime(p).expect("odd prime");
    let eps = q(cfg.eps() as i64);
    let mut out = Vec::new();
    if twice_depth % 2 == 0 {
        let k = twice_depth / 2;
        let pk = p_pow(p, k);
        out.push(QSl2::diag(pk.clone()));
        out.push(QSl2::new(pk.clone(), pk.clone(), Q::zero()));
        out.push(QSl2::new(Q::zero(), pk.clone(), &pk * &eps));
        out.push(QSl2::new(Q::zero(), Q::one(), &pk * &pk * &eps));
    } else {
        let pd = p_pow(p, twice_depth);
        out.push(QSl2::new(Q::zero(), Q::one(), pd.clone()));
        out.push(QSl2::new(Q::zero(), Q::one(), &pd * &eps));
    }
    out
}

/// Generators of the depth-r proxy space over a small set of centers and
/// vertices near v0.
pub fn proxy_family(r: i64, p: u64) -> Vec<(String, LCFunction)> {
    let cfg = FieldConfig::with_prime(p).expect("odd prime");
    let eps = q(cfg.eps() as i64);
    let centers = [
        QSl2::zero(),
        QSl2::new(Q::zero(), Q::one(), Q::zero()),
        QSl2::new(Q::zero(), eps.clone(), Q::zero()),
        QSl2::new(Q::zero(), Q::zero(), q(p as i64)),
        QSl2::diag(Q::one()),
        QSl2::new(Q::zero(), Q::one(), eps.clone()),
    ];
    let points = [TreeVertex::base(), TreeVertex::new(1, q(0), p), TreeVertex::new(-1, q(0), p)];
    let mut out = Vec::new();
    for m in crate::lcf::depth_r_family(r, &centers, &points, p) {
        let t = &m.f.terms[0];
        out.push((format!("1[{} + {}]", t.cell.center, t.cell.lattice), m.f));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.dedup_by(|a, b| a.1 == b.1);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_frac;

    #[test]
    fn default_basis_rank() {
        let rows = nil_matrix(&default_basis(5)).unwrap();
        assert_eq!(rank(&rows), 5);
    }

    #[test]
    fn homogeneity_rules() {
        let t = GermTable {
            x: QSl2::diag(q(25)),
            p: 5,
            j: [q(3), q(1), q(1), q(0), q_frac(1, 2)],
            provenance: vec![],
            shift: 0,
        };
        assert_eq!(homogeneity_extend(&t, 0), t);
        let e = homogeneity_extend(&t, -1);
        assert_eq!(e.x, QSl2::diag(q(1)));
        assert_eq!(e.j[0], q(75));
        assert_eq!(e.j[1..], t.j[1..]);
        assert_eq!(homogeneity_extend(&e, 1).j, t.j);
    }

    #[test]
    fn extraction_is_consistent_across_depths() {
        let p = 5;
        let basis = default_basis(p);
        let deep = extract_germs(&QSl2::diag(q(125)), &basis, &[]).unwrap();
        let direct = extract_germs(&QSl2::diag(q(25)), &basis, &[]).unwrap();
        assert_eq!(homogeneity_extend(&deep, -1).j, direct.j);
    }

    #[test]
    fn h_spaces() {
        let p = 5;
        let pool: Vec<LCFunction> = proxy_family(0, p).into_iter().map(|(_, f)| f).collect();
        for omega in OrbitLabel::ALL {
            for f in construct_hr_omega(omega, &pool).unwrap() {
                let v = nilpotent_vector(&f).unwrap();
                for (i, x) in v.iter().enumerate() {
                    assert_eq!(x.is_zero(), i != omega.index());
                }
            }
        }
    }
}
