use rand::seq::SliceRandom;
use rand::Rng;

/// `n` points in `[lo, hi]^dim`, one per stratum along every axis.
pub fn latin_hypercube<R: Rng>(rng: &mut R, n: usize, dim: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dim]; n];
    let width = (hi - lo) / n as f64;
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..dim {
        strata.shuffle(rng);
        for (i, p) in points.iter_mut().enumerate() {
            p[j] = lo + (strata[i] as f64 + rng.random::<f64>()) * width;
        }
    }
    points
}
