use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{inverse_ft, FreqGrid, GridImage, Spectrum};

/// Real image with random spectrum on `|xi|_inf <= band`.
pub fn random_bandlimited(grid: &FreqGrid, band: i64, seed: u64) -> GridImage<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = Spectrum::<f64>::zeros(grid);
    for (f, a, b) in grid.points() {
        if a.abs() <= band && b.abs() <= band {
            spec.values_mut()[f] = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let mirrored = spec.clone();
    for (f, v) in spec.values_mut().iter_mut().enumerate() {
        *v = (*v + mirrored.values()[grid.mirror(f)].conj()) * 0.5;
    }
    inverse_ft(&spec)
}
