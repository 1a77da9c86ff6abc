use std::f64::consts::PI;

use hyperdyn::scenarios::{
    build_scenario, g_map, interval_net, leaf_coordinates, leaf_index, leaf_point,
    projective_translate, rotation_angle, IntervalPoint, POLE,
};
use hyperdyn::{hausdorff, hausdorff_indexed, OperatorOrigin};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_interval(rng: &mut ChaCha8Rng) -> IntervalPoint {
    let (x, y): (f64, f64) = (rng.gen(), rng.gen());
    IntervalPoint::new(x.min(y), x.max(y)).unwrap()
}

#[test]
fn g_preserves_leaves() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..1000 {
        let p = random_interval(&mut rng);
        let q = g_map(p);
        assert!(q.a <= q.b && q.a >= 0.0 && q.b <= 1.0);
        match (leaf_index(p), leaf_index(q)) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9, "{p:?} -> {q:?}"),
            (None, None) => {}
            (a, b) => panic!("pole mismatch {a:?} {b:?}"),
        }
    }
}

#[test]
fn g_orbits_reach_the_pole_after_swinging_out() {
    // oracle: follow x = tan(θ/2) directly; a point at x_0 on leaf α sits at
    // σ_n = 1/2 + atan(x_0 + n)/π after n steps
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let alpha: f64 = rng.gen_range(0.2..=1.0);
        let sigma0: f64 = rng.gen_range(0.001..0.05);
        let p0 = leaf_point(alpha, sigma0).unwrap();
        let x0 = (0.5 * (PI + 2.0 * PI * sigma0)).tan();
        let mut p = p0;
        let mut far = p0.distance_to_pole();
        for n in 1..=400 {
            p = g_map(p);
            let sigma = 0.5 + (x0 + n as f64).atan() / PI;
            let q = leaf_point(alpha, sigma).unwrap();
            assert!(p.chebyshev(&q) < 1e-9, "n={n}: {p:?} vs {q:?}");
            far = far.max(p.distance_to_pole());
        }
        // the leaf's farthest points from the pole are its outer corners
        let corner = alpha * (1.0 + alpha) / 2.0;
        assert!(far > p0.distance_to_pole());
        assert!(far >= 0.5 * corner);
    }
    let (_, s) = leaf_coordinates(IntervalPoint { a: 0.5, b: 0.5 }).unwrap();
    assert!((s - 0.5).abs() < 1e-12);
    assert_eq!(g_map(POLE), POLE);
}

#[test]
fn projective_translation_moves_x_by_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let x: f64 = rng.gen_range(-50.0..50.0);
        let theta = (2.0 * x.atan()).rem_euclid(2.0 * PI);
        let next = projective_translate(theta);
        assert!(((0.5 * next).tan() - (x + 1.0)).abs() < 1e-8 * (1.0 + x * x));
    }
}

#[test]
fn interval_operator_attracts_random_sets() {
    let sc = build_scenario("interval-g").unwrap();
    let op = sc.operator();
    assert_eq!(op.origin(), OperatorOrigin::SetLevel);
    let full = &sc.expected_attractors[0];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let b = interval_net(&sc.space, random_interval(&mut rng), 0.01).unwrap();
        let mut cur = b;
        let hit = (1..=2000).any(|_| {
            cur = op.apply(&cur, 0.01).unwrap();
            hausdorff_indexed(&cur, full).unwrap() <= 0.02
        });
        assert!(hit);
    }
}

#[test]
fn interval_net_distance_to_the_full_interval() {
    let sc = build_scenario("interval-g").unwrap();
    let full = &sc.expected_attractors[0];
    let p = IntervalPoint::new(0.03, 0.99).unwrap();
    let net = interval_net(&sc.space, p, 0.01).unwrap();
    assert!((hausdorff(&net, full).unwrap() - p.distance_to_pole()).abs() < 1e-12);
}

#[test]
fn rotation_angle_is_an_irrational_multiple_of_pi() {
    let a = rotation_angle();
    assert!((a - PI * (5f64.sqrt() - 1.0)).abs() < 1e-15);
    let sc = build_scenario("circle-rotation").unwrap();
    assert_eq!(sc.expected_attractors[0].len(), 629);
}
