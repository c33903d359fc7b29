use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::matrix::QMatrix;
use crate::quaternion::Quaternion;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn rand_quaternion(rng: &mut StdRng, r: f64) -> Quaternion {
    Quaternion::new(
        rng.gen_range(-r..r),
        rng.gen_range(-r..r),
        rng.gen_range(-r..r),
        rng.gen_range(-r..r),
    )
}

/// Entries with components uniform in `[-r, r)`.
pub fn rand_qmatrix(rng: &mut StdRng, n: usize, r: f64) -> QMatrix {
    QMatrix::from_fn(n, n, |_, _| rand_quaternion(rng, r))
}
