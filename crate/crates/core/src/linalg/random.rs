//! Seeded generators for structured test matrices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{c, svd, vec_norm, CMat, CVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    Symmetric,
    Skew,
    ComplexOrthogonal,
}

/// Spectral norm of the Cayley generator; keeps `I + K` well inside the
/// invertible region.
const CAYLEY_GENERATOR_NORM: f64 = 0.45;

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize, scale: f64) -> CMat {
    CMat::from_fn(n, m, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * scale, im * scale)
    })
}

/// Random matrix with the requested transpose structure, deterministic per seed.
///
/// Entries are complex Gaussians with variance `1/n` so that spectra stay O(1).
/// `ComplexOrthogonal` uses the Cayley transform `(I - K)(I + K)^{-1}` of a
/// skew `K` with spectral norm 0.45.
pub fn random_structured(kind: StructureKind, n: usize, seed: u64) -> CMat {
    assert!(n >= 1, "random_structured needs n >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (0.5 / n as f64).sqrt();
    let b = gaussian_matrix(&mut rng, n, n, scale);
    match kind {
        StructureKind::Symmetric => (&b + b.transpose()).scale(0.5),
        StructureKind::Skew => (&b - b.transpose()).scale(0.5),
        StructureKind::ComplexOrthogonal => {
            let mut k = (&b - b.transpose()).scale(0.5);
            let norm = svd(&k).map(|s| s.sigma_max()).unwrap_or(0.0);
            if norm > 0.0 {
                k.scale_mut(CAYLEY_GENERATOR_NORM / norm);
            }
            let id = CMat::identity(n, n);
            let inv = (&id + &k)
                .try_inverse()
                .expect("I + K is invertible for ||K|| < 1");
            (&id - &k) * inv
        }
    }
}

/// Random vector of unit Euclidean norm.
pub fn random_unit_vector(n: usize, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = CVec::from_fn(n, |_, _| {
        c(
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        )
    });
    let norm = vec_norm(&v);
    v.unscale(norm)
}

/// Random unitary matrix from the QR factorization of a Gaussian matrix.
pub fn random_unitary(n: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(&mut rng, n, n, 1.0);
    g.qr().q()
}
