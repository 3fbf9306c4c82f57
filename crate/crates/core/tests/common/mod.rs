#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trifocal_core::{classify_triangle, FocusTriple, TriangleClass};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn equilateral() -> FocusTriple {
    FocusTriple::unit((0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0))
}

/// Random unit-weight triangle in a 10 x 10 square, rejecting slivers whose
/// shortest side is under 5% of the longest.
pub fn random_triangle(rng: &mut impl Rng) -> FocusTriple {
    loop {
        let mut p = || (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let tri = FocusTriple::unit(p(), p(), p());
        let [a, b, c] = tri.positions();
        let sides = [a.distance_to(b), b.distance_to(c), c.distance_to(a)];
        let longest = sides.iter().cloned().fold(0.0, f64::max);
        let shortest = sides.iter().cloned().fold(f64::INFINITY, f64::min);
        if shortest >= 0.05 * longest && classify_triangle(&tri) != TriangleClass::Collinear {
            return tri;
        }
    }
}

/// Random triangle whose angles are all below 120 degrees.
pub fn random_admissible(rng: &mut impl Rng) -> FocusTriple {
    loop {
        let tri = random_triangle(rng);
        if classify_triangle(&tri) == TriangleClass::AllAnglesBelow120 {
            return tri;
        }
    }
}

/// Direct evaluation of the unit-weight Euclidean sum, independent of the
/// library's metric code.
pub fn distance_sum(tri: &FocusTriple, x: f64, y: f64) -> f64 {
    tri.positions().iter().map(|p| (x - p.x).hypot(y - p.y)).sum()
}
