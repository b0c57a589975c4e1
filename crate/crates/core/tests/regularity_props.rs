//! Inheritance and widening of certified regular pairs, plus the joint
//! degree-outlier check.

use eorders_core::graph::{ratio, Graph};
use eorders_core::prng::SeededRng;
use eorders_core::regularity::{
    degree_outliers, pair_regularity_check, CheckMode,
};
use num_bigint::BigInt;
use num_rational::BigRational;

fn random_bipartite(nx: usize, ny: usize, num: u64, den: u64, seed: u64) -> (Graph, Vec<usize>, Vec<usize>) {
    let mut rng = SeededRng::new(seed);
    let mut g = Graph::new(nx + ny);
    for i in 0..nx {
        for j in 0..ny {
            if rng.below(den) < num {
                g.add_edge(i, nx + j);
            }
        }
    }
    (g, (0..nx).collect(), (nx..nx + ny).collect())
}

fn certified(g: &Graph, x: &[usize], y: &[usize], alpha: &BigRational, eps: &BigRational) -> bool {
    pair_regularity_check(g, x, y, alpha, eps, CheckMode::Exact)
        .unwrap()
        .certified
        .unwrap()
}

/// Find a random instance the exact checker certifies at the given (α, ε).
fn find_certified(
    nx: usize,
    ny: usize,
    alpha: &BigRational,
    eps: &BigRational,
) -> Option<(Graph, Vec<usize>, Vec<usize>)> {
    for seed in 0..200 {
        let (g, x, y) = random_bipartite(nx, ny, 1, 2, seed);
        if certified(&g, &x, &y, alpha, eps) {
            return Some((g, x, y));
        }
    }
    None
}

#[test]
fn inheritance_in_large_subsets_exhaustive_small() {
    // certified (α, ε)-regular (X, Y) stays certified on every sub-pair at
    // ε' = ε · max(|X|/|X'|, |Y|/|Y'|); exhaustive over all sub-pairs at 6+6
    let alpha = ratio(1, 2);
    let eps = ratio(2, 5);
    let (g, x, y) = find_certified(6, 6, &alpha, &eps).expect("some 6+6 instance certifies");
    for xm in 1u32..(1 << x.len()) {
        let xs: Vec<usize> = (0..x.len())
            .filter(|i| xm >> i & 1 == 1)
            .map(|i| x[i])
            .collect();
        for ym in 1u32..(1 << y.len()) {
            let ys: Vec<usize> = (0..y.len())
                .filter(|j| ym >> j & 1 == 1)
                .map(|j| y[j])
                .collect();
            let blowup_x = ratio(x.len() as u64, xs.len() as u64);
            let blowup_y = ratio(y.len() as u64, ys.len() as u64);
            let eps_prime = &eps * blowup_x.max(blowup_y);
            if eps_prime >= ratio(1, 1) {
                continue; // checker domain is (0, 1); huge blowups are vacuous
            }
            assert!(
                certified(&g, &xs, &ys, &alpha, &eps_prime),
                "sub-pair {xs:?} {ys:?} lost certification"
            );
        }
    }
}

#[test]
fn inheritance_spot_checks_at_twelve() {
    let alpha = ratio(1, 2);
    let eps = ratio(9, 20);
    let (g, x, y) = find_certified(12, 12, &alpha, &eps).expect("some 12+12 instance certifies");
    let mut rng = SeededRng::new(99);
    for _ in 0..60 {
        let kx = 6 + rng.below(7) as usize;
        let ky = 6 + rng.below(7) as usize;
        let xs = rng.subset_of(&x, kx);
        let ys = rng.subset_of(&y, ky);
        let blowup_x = ratio(x.len() as u64, xs.len() as u64);
        let blowup_y = ratio(y.len() as u64, ys.len() as u64);
        let eps_prime = &eps * blowup_x.max(blowup_y);
        if eps_prime >= ratio(1, 1) {
            continue;
        }
        assert!(certified(&g, &xs, &ys, &alpha, &eps_prime));
    }
}

#[test]
fn widening_of_certified_pairs() {
    // (α', ε')-certified implies (α, ε)-certified whenever ε ≥ ε' + |α - α'|
    let alpha_prime = ratio(1, 2);
    let eps_prime = ratio(2, 5);
    let (g, x, y) =
        find_certified(8, 8, &alpha_prime, &eps_prime).expect("some 8+8 instance certifies");
    for (da, de) in [(1i64, 2u64), (-1, 2), (2, 3), (0, 1)] {
        let alpha = &alpha_prime + BigRational::new(BigInt::from(da), BigInt::from(20));
        let shift = BigRational::new(BigInt::from(da.abs()), BigInt::from(20))
            + BigRational::new(BigInt::from(de), BigInt::from(20));
        let eps = &eps_prime + shift;
        if eps >= ratio(1, 1) {
            continue;
        }
        assert!(
            certified(&g, &x, &y, &alpha, &eps),
            "widened ({alpha}, {eps}) lost certification"
        );
    }
}

#[test]
fn degree_outliers_bounded_on_certified_pairs() {
    // whenever the exact checker certifies (α, ε)-regularity, the number of
    // degree outliers is at most 2ε|X|
    let alpha = ratio(1, 2);
    let eps = ratio(2, 5);
    let mut found = 0;
    for seed in 0..120 {
        let (g, x, y) = random_bipartite(8, 8, 1, 2, seed);
        if !certified(&g, &x, &y, &alpha, &eps) {
            continue;
        }
        found += 1;
        let outliers = degree_outliers(&g, &x, &y, &alpha, &eps);
        let bound = ratio(2, 1) * &eps * ratio(x.len() as u64, 1);
        assert!(
            ratio(outliers.len() as u64, 1) <= bound,
            "outliers {outliers:?} exceed 2ε|X|"
        );
    }
    assert!(found > 0, "no certified instance in the sweep");
}
