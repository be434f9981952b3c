//! Seeded random inputs: Gaussian vectors give Haar-distributed subspaces.

use qlattice::gleason::DensityOperator;
use qlattice::{CMatrix, CVector, HilbertSpace, Result, Subspace, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| gaussian(rng))
}

pub fn subspace(rng: &mut ChaCha8Rng, ambient: &HilbertSpace, rank: usize) -> Result<Subspace> {
    let vs: Vec<CVector> = (0..rank).map(|_| vector(rng, ambient.dim())).collect();
    Subspace::span(ambient, &vs)
}

/// `(X, Z)` with `Z ⊆ X`, ranks drawn uniformly.
pub fn nested_pair(rng: &mut ChaCha8Rng, ambient: &HilbertSpace) -> Result<(Subspace, Subspace)> {
    let r = rng.gen_range(1..=ambient.dim());
    let x = subspace(rng, ambient, r)?;
    let s = rng.gen_range(0..=r);
    let vs: Vec<CVector> = (0..s).map(|_| x.basis() * vector(rng, r)).collect();
    let z = Subspace::span(ambient, &vs)?;
    Ok((x, z))
}

/// `GGᴴ/Tr` for a Gaussian `n × m` factor of random width.
pub fn density(rng: &mut ChaCha8Rng, ambient: &HilbertSpace) -> Result<DensityOperator> {
    let n = ambient.dim();
    let m = rng.gen_range(1..=n);
    let g = CMatrix::from_fn(n, m, |_, _| gaussian(rng));
    DensityOperator::from_factor(ambient, &g)
}

/// A random orthonormal basis cut into consecutive blocks of random sizes.
pub fn resolution(rng: &mut ChaCha8Rng, ambient: &HilbertSpace) -> Result<Vec<Subspace>> {
    let n = ambient.dim();
    let full = subspace(rng, ambient, n)?;
    let basis = full.basis();
    let mut parts = Vec::new();
    let mut start = 0;
    while start < n {
        let len = rng.gen_range(1..=n - start);
        let cols: Vec<CVector> = (start..start + len).map(|j| basis.column(j).into_owned()).collect();
        parts.push(Subspace::span(ambient, &cols)?);
        start += len;
    }
    Ok(parts)
}
