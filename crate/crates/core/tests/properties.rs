use germlab::germ::{default_basis, extract_germs, grid_at_depth, nilpotent_rep};
use germlab::lcf::{depth_r_family, CosetCell, LCFunction};
use germlab::mat::{QMat2, QSl2};
use germlab::orbital::{nilpotent_orbital, ss_orbital};
use germlab::padic::{FieldConfig, PadicScalar, QuadExtDescriptor, SquareClass};
use germlab::rational::{p_pow, q, Q};
use germlab::sl2::{
    classify, cayley, cayley_inv, depth, depth_exact, in_g_r, is_top_nilpotent, random_conjugate,
    random_sl2, Depth, OrbitLabel, Sl2Element,
};
use germlab::tree::{act, ball, ball_size, depth_via_tree, distance, mp_lattice, TreeVertex};
use num_rational::Ratio;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn primes() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![3u64, 5, 7])
}

/// Nonzero rationals n/d * p^e with small n, d.
fn nonzero_q(p: u64) -> impl Strategy<Value = Q> {
    (1i64..60, 1i64..12, -3i64..4, any::<bool>()).prop_map(move |(n, d, e, neg)| {
        let x = Q::new(n.into(), d.into()) * p_pow(p, e);
        if neg {
            -x
        } else {
            x
        }
    })
}

fn small_q(p: u64) -> impl Strategy<Value = Q> {
    prop_oneof![1 => Just(Q::zero()), 4 => nonzero_q(p)]
}

fn regular_x(p: u64) -> impl Strategy<Value = QSl2> {
    (small_q(p), small_q(p), small_q(p))
        .prop_map(|(a, b, c)| QSl2::new(a, b, c))
        .prop_filter("regular", |x| !x.det().is_zero())
}

fn scalar(x: &Q, p: u64) -> PadicScalar {
    PadicScalar::from_q(x, FieldConfig::with_prime(p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn valuation_is_additive((p, x, y) in primes().prop_flat_map(|p| (Just(p), nonzero_q(p), nonzero_q(p)))) {
        let xy = scalar(&x, p).mul(&scalar(&y, p)).unwrap();
        prop_assert_eq!(
            xy.valuation().unwrap(),
            scalar(&x, p).valuation().unwrap() + scalar(&y, p).valuation().unwrap()
        );
        prop_assert_eq!(xy.exact(), Some(&x * &y));
    }

    #[test]
    fn square_classes_multiply((p, x, y) in primes().prop_flat_map(|p| (Just(p), nonzero_q(p), nonzero_q(p)))) {
        let cx = scalar(&x, p).square_class().unwrap();
        let cy = scalar(&y, p).square_class().unwrap();
        let cxy = scalar(&x, p).mul(&scalar(&y, p)).unwrap().square_class().unwrap();
        prop_assert_eq!(cxy, cx.mul(cy));
    }

    #[test]
    fn square_roots_square_back((p, x) in primes().prop_flat_map(|p| (Just(p), nonzero_q(p)))) {
        let s = scalar(&x, p);
        if let Some(r) = s.sqrt().unwrap() {
            prop_assert!(r.mul(&r).unwrap().agrees_with(&s));
        } else {
            prop_assert_ne!(s.square_class().unwrap(), SquareClass::One);
        }
    }

    #[test]
    fn norm_group_has_index_two(
        (p, x, y) in primes().prop_flat_map(|p| (Just(p), nonzero_q(p), nonzero_q(p))),
        e in prop::sample::select(QuadExtDescriptor::ALL.to_vec()),
    ) {
        let (sx, sy) = (scalar(&x, p), scalar(&y, p));
        let nxy = sx.mul(&sy).unwrap().is_norm(e).unwrap();
        prop_assert_eq!(nxy, sx.is_norm(e).unwrap() == sy.is_norm(e).unwrap());
    }

    #[test]
    fn arithmetic_contains_exact_result(
        (p, x, y) in primes().prop_flat_map(|p| (Just(p), nonzero_q(p), nonzero_q(p))),
    ) {
        let (sx, sy) = (scalar(&x, p), scalar(&y, p));
        let cases = [
            (sx.add(&sy).unwrap(), &x + &y),
            (sx.sub(&sy).unwrap(), &x - &y),
            (sx.mul(&sy).unwrap(), &x * &y),
            (sx.div(&sy).unwrap(), &x / &y),
        ];
        for (got, want) in cases {
            prop_assert!(got.agrees_with(&scalar(&want, p)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn element_invariants_are_conjugation_invariant(
        (p, x) in primes().prop_flat_map(|p| (Just(p), regular_x(p))),
        seed in any::<u64>(),
    ) {
        let cfg = FieldConfig::with_prime(p).unwrap();
        let e = Sl2Element::from_exact(&x, cfg);
        let tags = classify(&e).unwrap().tags();
        let d = depth(&e).unwrap();
        let tn = is_top_nilpotent(&e).unwrap();
        for i in 0..100u64 {
            let (_, y) = random_conjugate(&e, seed.wrapping_add(i), 4).unwrap();
            prop_assert_eq!(classify(&y).unwrap().tags(), tags.clone());
            prop_assert_eq!(depth(&y).unwrap(), d);
            prop_assert_eq!(is_top_nilpotent(&y).unwrap(), tn);
            prop_assert_eq!(in_g_r(&y, Ratio::from_integer(1)).unwrap(), in_g_r(&e, Ratio::from_integer(1)).unwrap());
        }
    }

    #[test]
    fn depth_shifts_under_zeta_squared((p, x) in primes().prop_flat_map(|p| (Just(p), regular_x(p)))) {
        let d0 = depth_exact(&x, p).finite().unwrap();
        let d1 = depth_exact(&x.scale(&p_pow(p, 2)), p).finite().unwrap();
        prop_assert_eq!(d1, d0 + Ratio::from_integer(2));
    }

    #[test]
    fn cayley_round_trip_and_congruence(
        (p, k, a, b, c) in primes().prop_flat_map(|p| (Just(p), 1i64..4, -30i64..30, -30i64..30, -30i64..30)),
    ) {
        let cfg = FieldConfig::with_prime(p).unwrap();
        let pk = p_pow(p, k);
        let x = QSl2::new(q(a) * &pk, q(b) * &pk, q(c) * &pk);
        let e = Sl2Element::from_exact(&x, cfg);
        let g = cayley(&e).unwrap();
        let m = g.to_exact().unwrap();
        prop_assert!(m.det().is_one());
        prop_assert_eq!(cayley_inv(&g).unwrap().to_exact().unwrap(), x);
        let id = QMat2::identity();
        for i in 0..2 {
            for j in 0..2 {
                let diff = &m.m[i][j] - &id.m[i][j];
                prop_assert!(germlab::rational::in_ideal(&diff, p, k));
            }
        }
    }

    #[test]
    fn nilpotent_tags_partition((p, l, s) in primes().prop_flat_map(|p| (Just(p), nonzero_q(p), any::<u64>()))) {
        let cfg = FieldConfig::with_prime(p).unwrap();
        let x = Sl2Element::from_exact(&QSl2::new(Q::zero(), l.clone(), Q::zero()), cfg);
        let (_, y) = random_conjugate(&x, s, 4).unwrap();
        let want = OrbitLabel::Regular(SquareClass::of_rational(&l, p));
        prop_assert_eq!(classify(&y).unwrap().tags(), format!("nil:{want}"));
    }
}

#[test]
fn five_orbit_labels() {
    let names: std::collections::BTreeSet<String> = OrbitLabel::ALL.iter().map(|l| l.name()).collect();
    assert_eq!(names.len(), 5);
}

#[test]
fn ball_sizes_match_closed_form() {
    for p in [3u64, 5, 7] {
        for r in 0..=4 {
            assert_eq!(ball(&TreeVertex::base(), r, p).len() as u64, ball_size(p, r));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn action_preserves_distance(p in primes(), s in any::<u64>()) {
        let cfg = FieldConfig::with_prime(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let v = act(&random_sl2(cfg, &mut rng, 6), &TreeVertex::base(), p);
        let w = act(&random_sl2(cfg, &mut rng, 6), &TreeVertex::base(), p);
        let g = random_sl2(cfg, &mut rng, 6);
        prop_assert_eq!(distance(&act(&g, &v, p), &act(&g, &w, p), p), distance(&v, &w, p));
    }
}

#[test]
fn tree_depth_is_monotone_and_converges() {
    for p in [3u64, 5] {
        for twice in [0i64, 2, 4] {
            for x in grid_at_depth(twice, p) {
                let mut last = i64::MIN;
                for r in 0..=5 {
                    let d = depth_via_tree(&x, r, p).unwrap();
                    assert!(d >= last);
                    last = d;
                }
                let bound = x.min_val(p).unwrap().abs() * 2 + 4;
                assert_eq!(depth_via_tree(&x, bound, p).unwrap(), twice / 2, "{x}");
            }
        }
    }
}

fn random_function(p: u64, seed: u64) -> LCFunction {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = FieldConfig::with_prime(p).unwrap();
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..4) {
        let v = act(&random_sl2(cfg, &mut rng, 3), &TreeVertex::base(), p);
        let n = rng.gen_range(-1..3);
        let c = QSl2::new(q(rng.gen_range(-4..5)), q(rng.gen_range(-4..5)), q(rng.gen_range(-4..5)));
        terms.push((q(rng.gen_range(-3..4)), CosetCell::new(c, mp_lattice(&v, n), p)));
    }
    LCFunction::from_terms(p, terms)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn canonicalize_preserves_values(p in primes(), s in any::<u64>()) {
        use rand::Rng;
        let f = random_function(p, s);
        let g = f.canonicalize();
        let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x9e37);
        for _ in 0..1000 {
            let mut e = || q(rng.gen_range(-40..41)) * p_pow(p, rng.gen_range(-2..3));
            let x = QSl2::new(e(), e(), e());
            prop_assert_eq!(f.evaluate(&x), g.evaluate(&x));
        }
    }

    #[test]
    fn dilation_composes(p in primes(), s in any::<u64>()) {
        let f = random_function(p, s);
        let twice = f.dilate(&p_pow(p, 2)).dilate(&p_pow(p, 2)).canonicalize();
        prop_assert_eq!(twice, f.dilate(&p_pow(p, 4)).canonicalize());
    }

    #[test]
    fn proxy_members_certify_and_survive_unit_dilation(
        p in primes(),
        r in 0i64..2,
        unit in prop::sample::select(vec![1i64, 2, -1, 4]),
    ) {
        let centers = [QSl2::zero(), QSl2::diag(q(1)), nilpotent_rep(SquareClass::Pi, p)];
        let points = [TreeVertex::base(), TreeVertex::new(1, q(1), p)];
        for m in depth_r_family(r, &centers, &points, p) {
            prop_assert!(m.verify().unwrap());
            prop_assert!(m.f.support_bound() <= 1);
            let g = m.f.dilate(&q(unit));
            prop_assert!(g.is_invariant_under(&m.certificate).unwrap());
        }
    }

    #[test]
    fn semisimple_covariance(
        (p, x) in primes().prop_flat_map(|p| (Just(p), regular_x(p))),
        c in prop::sample::select(vec![2i64, 4, 0]),
        s in any::<u64>(),
    ) {
        let f = random_function(p, s);
        let cq = if c == 0 { q(2) } else { p_pow(p, c) };
        let lhs = ss_orbital(&x.scale(&cq), &f).unwrap().value;
        let rhs = ss_orbital(&x, &f.dilate(&cq)).unwrap().value;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn nilpotent_scaling_law(p in primes(), s in any::<u64>()) {
        let f = random_function(p, s);
        let g = f.dilate(&p_pow(p, 2));
        for l in OrbitLabel::ALL {
            prop_assert_eq!(
                nilpotent_orbital(l, &g).unwrap().value,
                nilpotent_orbital(l, &f).unwrap().value * p_pow(p, l.dim())
            );
        }
    }

    #[test]
    fn orbital_integrals_are_conjugation_invariant(
        (p, x) in primes().prop_flat_map(|p| (Just(p), regular_x(p))),
        s in any::<u64>(),
    ) {
        let cfg = FieldConfig::with_prime(p).unwrap();
        let f = random_function(p, s);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let g = random_sl2(cfg, &mut rng, 3);
        prop_assert_eq!(ss_orbital(&g.ad(&x), &f).unwrap().value, ss_orbital(&x, &f).unwrap().value);
    }

    #[test]
    fn certified_tails(
        (p, x) in primes().prop_flat_map(|p| (Just(p), regular_x(p))),
        s in any::<u64>(),
    ) {
        prop_assert!(ss_orbital(&x, &random_function(p, s)).unwrap().certified);
    }
}

fn second_basis(p: u64) -> Vec<LCFunction> {
    let v0 = TreeVertex::base();
    let mut out = vec![
        LCFunction::indicator(CosetCell::new(QSl2::zero(), mp_lattice(&v0, -1), p), p),
        LCFunction::indicator(CosetCell::new(QSl2::zero(), mp_lattice(&v0, 1), p), p),
    ];
    for l in SquareClass::ALL {
        out.push(LCFunction::indicator(CosetCell::new(nilpotent_rep(l, p), mp_lattice(&v0, 3), p), p));
    }
    out
}

#[test]
fn germ_tables_ignore_basis_and_conjugation() {
    for p in [3u64, 5] {
        let cfg = FieldConfig::with_prime(p).unwrap();
        for x in [6, 7].iter().flat_map(|&d| grid_at_depth(d, p)) {
            let a = extract_germs(&x, &default_basis(p), &[]).unwrap();
            let b = extract_germs(&x, &second_basis(p), &[]).unwrap();
            assert_eq!(a.j, b.j, "{x}");
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let y = random_sl2(cfg, &mut rng, 3).ad(&x);
            assert_eq!(extract_germs(&y, &default_basis(p), &[]).unwrap().j, a.j, "{x} ~ {y}");
        }
    }
}

#[test]
fn deep_tags_for_nilpotents() {
    let cfg = FieldConfig::with_prime(5).unwrap();
    let n = Sl2Element::from_exact(&QSl2::new(Q::zero(), q(1), Q::zero()), cfg);
    assert_eq!(depth(&n).unwrap(), Depth::Deep);
}
