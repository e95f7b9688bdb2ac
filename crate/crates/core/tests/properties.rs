mod common;

use std::f64::consts::TAU;

use common::{c, count_in_disk, boundary_gap, min_fiber_scan};
use proptest::prelude::*;
use symcurve::blaschke::{BlaschkeProduct, DiskAutomorphism};
use symcurve::contour::interior_sample;
use symcurve::decomp::{analyze, RunConfig};
use symcurve::fixtures::{composite_fixture, random_blaschke, random_symbol};
use symcurve::group::track_local_inverse;
use symcurve::rational::polynomial_rotational_order;
use symcurve::{
    count_zeros, fiber_on_circle, min_self_intersection, min_winding, poly_roots, rational_normalize,
    symbol_compile, symmetry_group, winding_number, Polynomial, RationalMap, Region, SymbolSpec,
    Tolerances, C64,
};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn complex_in(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

fn disk_point(r: f64) -> impl Strategy<Value = C64> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(move |(u, v)| C64::from_polar(r * u.sqrt(), TAU * v))
}

fn compile(spec: &SymbolSpec) -> RationalMap {
    symbol_compile(spec, &tol()).unwrap()
}

fn automorphism(rot: f64, a: C64) -> RationalMap {
    DiskAutomorphism {
        rotation: C64::from_polar(1.0, rot),
        point: a,
    }
    .as_rational(&tol())
    .unwrap()
}

/// Expanding a composition into coefficients can lose many digits; only
/// compare invariants when the expanded map still matches its definition.
fn faithful(expanded: &RationalMap, direct: impl Fn(C64) -> C64) -> bool {
    let (sup, _) = expanded.circle_bounds(256);
    (0..256).all(|k| {
        let z = C64::from_polar(1.0, TAU * (k as f64 + 0.37) / 256.0);
        (expanded.eval(z) - direct(z)).norm() <= 1e-10 * (1.0 + sup)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn roots_rebuild_the_polynomial(coeffs in prop::collection::vec(complex_in(1.0), 2..=13)) {
        let p = Polynomial::new(coeffs);
        prop_assume!(p.deg() >= 1 && p.leading().norm() > 1e-3);
        let roots = poly_roots(&p, &tol()).unwrap();
        let flat: Vec<C64> = roots
            .iter()
            .flat_map(|r| std::iter::repeat(r.value).take(r.multiplicity))
            .collect();
        prop_assert_eq!(flat.len(), p.deg());
        let rebuilt = Polynomial::from_roots(&flat).scale(p.leading());
        let scale = p.max_coeff();
        for k in 0..=p.deg() {
            prop_assert!((rebuilt.coeff(k) - p.coeff(k)).norm() < 1e-8 * scale);
        }
    }

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>()) {
        let map = compile(&random_symbol(seed));
        let again = rational_normalize(map.num().clone(), map.den().clone(), &tol()).unwrap();
        prop_assert_eq!(again.num().coeffs(), map.num().coeffs());
        prop_assert_eq!(again.den().coeffs(), map.den().coeffs());
    }

    #[test]
    fn blaschke_products_are_unimodular(
        zeros in prop::collection::vec(disk_point(0.97), 0..=8),
        angle in 0.0..TAU,
    ) {
        let b = BlaschkeProduct::new(C64::from_polar(1.0, angle), zeros, &tol()).unwrap();
        for k in 0..512 {
            let z = C64::from_polar(1.0, TAU * k as f64 / 512.0);
            prop_assert!((b.eval(z).unwrap().norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rotational_order_scales_under_powers(
        coeffs in prop::collection::vec(complex_in(1.0), 2..=6),
        k in 1usize..=5,
    ) {
        let p = Polynomial::new(coeffs);
        prop_assume!(p.deg() >= 1);
        let base = polynomial_rotational_order(&p, &tol());
        let lifted = p.compose(&Polynomial::monomial(k));
        prop_assert_eq!(polynomial_rotational_order(&lifted, &tol()), k * base);
    }

    #[test]
    fn winding_is_additive(
        a in prop::collection::vec(complex_in(1.5), 1..=5),
        b in prop::collection::vec(complex_in(1.5), 1..=5),
    ) {
        let f = RationalMap::polynomial(Polynomial::new(a));
        let g = RationalMap::polynomial(Polynomial::new(b));
        prop_assume!(!f.num().is_zero() && !g.num().is_zero());
        let t = tol();
        let zero = c(0.0, 0.0);
        let (wf, wg) = match (winding_number(&f, zero, &t), winding_number(&g, zero, &t)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => return Ok(()),
        };
        let fg = f.mul(&g, &t).unwrap();
        if let Ok(w) = winding_number(&fg, zero, &t) {
            prop_assert_eq!(w, wf + wg);
        }
    }

    #[test]
    fn interior_samples_lie_in_the_disk(i in 0usize..100_000, seed in any::<u64>()) {
        prop_assert!(interior_sample(i, seed).norm() < 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn boundary_count_matches_companion_roots(
        seed in any::<u64>(),
        a in disk_point(1.2),
        radius in prop::sample::select(vec![0.5, 1.0, 1.3]),
    ) {
        let map = compile(&random_symbol(seed));
        let lambda = map.eval(a);
        prop_assume!(map.poles().iter().all(|p| p.norm() > radius + 1e-3));
        prop_assume!(boundary_gap(&map, lambda, radius) > 1e-6);
        match count_zeros(&map, lambda, Region::Disk { radius }, &tol()) {
            Ok(n) => prop_assert_eq!(n, count_in_disk(&map, lambda, radius)),
            Err(symcurve::Error::PointOnCurve { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn min_winding_never_grows_with_budget(seed in any::<u64>(), budget in 16usize..80) {
        let map = compile(&random_symbol(seed));
        let small = min_winding(&map, budget, seed, None, &tol()).unwrap();
        let large = min_winding(&map, 2 * budget, seed, None, &tol()).unwrap();
        prop_assert!(large.n <= small.n);
    }

    #[test]
    fn invariants_agree_and_match_oracles(seed in any::<u64>()) {
        let map = compile(&random_symbol(seed));
        let report = analyze(&map, &RunConfig { seed, ..RunConfig::default() });
        prop_assert!(!report.partial, "{:?}", report.warnings);
        prop_assert!(report.equality_check.pass, "{:?}", report.equality_check.discrepancies);
        let d = report.divisibility.as_ref().unwrap();
        prop_assert!(d.fiber_law && d.winding_law);
        prop_assert_eq!(report.big_n, Some(min_fiber_scan(&map, 720)));
    }

    #[test]
    fn group_order_is_invariant_under_disk_automorphisms(
        seed in 0u64..1000,
        rot in 0.0..TAU,
        a in disk_point(0.6),
    ) {
        let t = tol();
        let map = compile(&random_symbol(seed));
        let m = automorphism(rot, a);
        let moved = map.compose(&m, &t).unwrap();
        prop_assume!(moved.validate_symbol(&t).is_ok());
        prop_assume!(faithful(&moved, |z| map.eval(m.eval(z))));
        let o1 = symmetry_group(&map, seed, &t).unwrap().order;
        let o2 = symmetry_group(&moved, seed, &t).unwrap().order;
        prop_assert_eq!(o1, o2);
    }

    #[test]
    fn self_intersection_is_invariant_under_moebius_changes(
        seed in 0u64..1000,
        rot in 0.0..TAU,
        a in disk_point(0.6),
        alpha in complex_in(3.0),
        beta in complex_in(3.0),
    ) {
        prop_assume!(alpha.norm() > 0.1);
        let t = tol();
        let map = compile(&composite_fixture(seed).composite);
        let m = automorphism(rot, a);
        let inner = map.compose(&m, &t).unwrap();
        let affine = RationalMap::polynomial(Polynomial::new(vec![beta, alpha]));
        let moved = affine.compose(&inner, &t).unwrap();
        prop_assume!(moved.validate_symbol(&t).is_ok());
        prop_assume!(faithful(&moved, |z| alpha * map.eval(m.eval(z)) + beta));
        let n1 = min_self_intersection(&map, 64, seed, None, &t).unwrap().n;
        let n2 = min_self_intersection(&moved, 64, seed, None, &t).unwrap().n;
        prop_assert_eq!(n1, n2);
    }

    #[test]
    fn generator_permutes_every_fiber(seed in 0u64..1000, turn in 0.0..1.0f64) {
        let t = tol();
        let map = compile(&composite_fixture(seed).composite);
        let g = symmetry_group(&map, seed, &t).unwrap();
        let fiber = fiber_on_circle(&map, C64::from_polar(1.0, TAU * turn), &t).unwrap();
        prop_assume!(fiber.reliable);
        let angles = fiber.angles();
        for &a in &angles {
            let image = C64::from_polar(1.0, g.generator.eval(&map, a));
            let hit = angles
                .iter()
                .any(|&b| (C64::from_polar(1.0, b) - image).norm() < t.cluster);
            prop_assert!(hit, "image of {} left the fiber", a);
        }
    }

    #[test]
    fn elements_agreeing_at_one_point_agree_everywhere(seed in 0u64..1000, turn in 0.0..1.0f64) {
        // continue the generator from a second base point and compare
        let t = tol();
        let map = compile(&random_blaschke(seed, 2 + (seed % 4) as usize, 0.8));
        let g = symmetry_group(&map, seed, &t).unwrap();
        let xi1 = TAU * turn;
        let zeta1 = C64::from_polar(1.0, g.generator.eval(&map, xi1));
        let other = track_local_inverse(&map, C64::from_polar(1.0, xi1), zeta1, &t).unwrap();
        prop_assert!(other.deviation_from(&g.generator, &map) < 10.0 * t.track);
    }

    #[test]
    fn group_elements_are_monotone_with_winding_one(seed in 0u64..1000) {
        let t = tol();
        let map = compile(&composite_fixture(seed).composite);
        let g = symmetry_group(&map, seed, &t).unwrap();
        for e in &g.elements {
            prop_assert_eq!(e.winding, 1);
            prop_assert!(e.is_strictly_increasing());
        }
    }

    #[test]
    fn prime_order_rationals_are_blaschke_or_totally_abelian(seed in any::<u64>()) {
        // (P)/(z^3 + q) with deg P ≤ 2: order 3
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let num: Vec<[f64; 2]> = (0..3).map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        let q = C64::from_polar(rng.gen_range(1.8..8.0), TAU * rng.gen::<f64>());
        let spec = SymbolSpec::Rat { num, den: vec![[q.re, q.im], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]] };
        let map = compile(&spec);
        prop_assume!(map.order() == 3);
        let r = analyze(&map, &RunConfig { seed, ..RunConfig::default() });
        let b = r.b.unwrap();
        prop_assert!(b == 1 || b == 3);
        prop_assert_eq!(r.totally_abelian, Some(b == 1));
    }

    #[test]
    fn gcd_rule_for_polynomials(
        k in 1usize..=4,
        coeffs in prop::collection::vec(complex_in(1.0), 1..=3),
    ) {
        // φ(z) = p(z^k) with p(0) arbitrary: expected b = k · gcd(exponents of p)
        let mut full = vec![c(0.3, 0.0)];
        full.extend(coeffs);
        let p = Polynomial::new(full);
        prop_assume!(p.deg() >= 1 && p.leading().norm() > 1e-2);
        let exps: Vec<usize> = (1..=p.deg()).filter(|&j| p.coeff(j).norm() > 1e-9).collect();
        let g = exps.iter().fold(0, |acc, &e| num_gcd(acc, e));
        let map = RationalMap::polynomial(p.compose(&Polynomial::monomial(k)));
        let r = analyze(&map, &RunConfig::default());
        prop_assert_eq!(r.b, Some(k * g));
        prop_assert!(r.equality_check.pass, "{:?}", r.equality_check.discrepancies);
    }
}

fn num_gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { num_gcd(b, a % b) }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let map = compile(&composite_fixture(3).composite);
    let config = RunConfig { seed: 9, ..RunConfig::default() };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| serde_json::to_string(&analyze(&map, &config)).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(2));
}

#[test]
fn reports_embed_reproducibility_fields() {
    let map = compile(&SymbolSpec::builtin("zpow2"));
    let config = RunConfig { seed: 42, ..RunConfig::default() };
    let v: serde_json::Value = serde_json::to_value(analyze(&map, &config)).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["interior_samples"], 256);
    assert_eq!(v["circle_samples"], 64);
    assert_eq!(v["tolerances"]["track"], 1e-8);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}
