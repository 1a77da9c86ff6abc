use std::sync::Arc;
use std::time::Instant;

use hyperdyn::{directed_hausdorff, directed_hausdorff_indexed, hausdorff_indexed, CompactSet, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Run with `cargo test --release -- --ignored`. The brute-force time is
/// extrapolated from a slice of the first set.
#[test]
#[ignore]
fn indexed_hausdorff_is_ten_times_faster_at_1e5_points() {
    let n = 100_000;
    let space = Arc::new(Space::euclidean(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cloud = |rng: &mut ChaCha8Rng| {
        let raw: Vec<f64> = (0..2 * n).map(|_| rng.gen()).collect();
        CompactSet::from_coords(space.clone(), 0.0, raw).unwrap()
    };
    let a = cloud(&mut rng);
    let b = cloud(&mut rng);

    let t = Instant::now();
    let d = hausdorff_indexed(&a, &b).unwrap();
    let indexed = t.elapsed().as_secs_f64();

    let m = 2_000;
    let slice = CompactSet::from_coords(space.clone(), 0.0, a.raw()[..2 * m].to_vec()).unwrap();
    let t = Instant::now();
    let part = directed_hausdorff(&slice, &b).unwrap();
    let brute = t.elapsed().as_secs_f64() * (2 * n / m) as f64;
    assert_eq!(part, directed_hausdorff_indexed(&slice, &b).unwrap());
    assert!(d > 0.0);
    eprintln!("indexed {indexed:.3}s, brute force ≈ {brute:.1}s, speedup ≈ {:.0}x", brute / indexed);
    assert!(brute >= 10.0 * indexed);
}
