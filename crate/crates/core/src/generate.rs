//! Seeded random model generation: binary contact and higher-order weight
//! matrices with `Gamma = 2 I`, the setup behind the epidemic-diagram
//! experiments. ChaCha8 keyed by the seed makes the draws platform
//! independent; identical seeds give identical models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::model::{SimplicialSis, SisTemplate};
use crate::scalar::{cst, Scalar};

/// Draw a binary template: `A` and each `B_i` have independent Bernoulli
/// entries at the given density, recovery rates are `gamma_scale` for every
/// group. If the sampled `A` is reducible, the `n`-cycle is added (the
/// minimal deterministic repair; a no-op at density 1).
pub fn binary_template<T: Scalar>(
    n: usize,
    density: f64,
    seed: u64,
    gamma_scale: f64,
) -> Result<SisTemplate<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_matrix = |rng: &mut ChaCha8Rng| {
        DenseMatrix::from_fn(n, |_, _| {
            if rng.gen::<f64>() < density {
                T::one()
            } else {
                T::zero()
            }
        })
    };
    let mut a = draw_matrix(&mut rng);
    if !a.is_irreducible()? {
        for i in 0..n {
            a[(i, (i + 1) % n)] = T::one();
        }
    }
    let b: Vec<DenseMatrix<T>> = (0..n).map(|_| draw_matrix(&mut rng)).collect();
    SisTemplate::new(vec![cst(gamma_scale); n], a, b)
}

/// [`binary_template`] with infection rates attached.
pub fn binary_model<T: Scalar>(
    n: usize,
    density: f64,
    seed: u64,
    gamma_scale: f64,
    beta1: T,
    beta2: T,
) -> Result<SimplicialSis<T>> {
    binary_template(n, density, seed, gamma_scale)?.instantiate(beta1, beta2)
}
