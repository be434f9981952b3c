//! Density operators and the trace-formula probability `p(P) = Tr(T·P)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigen};
use crate::subspace::{HilbertSpace, Operator, Subspace, EQUALITY_TOL};
use crate::{CMatrix, CVector, C64};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Probabilities this close to 0 or 1 from outside are clamped.
pub const CLAMP_TOL: f64 = 1e-10;
pub const ADDITIVITY_TOL: f64 = 1e-9;

/// Positive semi-definite, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    ambient: HilbertSpace,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(ambient: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let op = Operator::new(ambient, matrix)?;
        let dev = op.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let (vals, _) = hermitian_eigen(op.matrix());
        if let Some(&min) = vals.first() {
            if min < -PSD_TOL {
                return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
            }
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {tr} is not 1")));
        }
        let ambient = op.ambient().clone();
        Ok(Self { ambient, matrix: op.into_matrix() })
    }

    /// `I/n`.
    pub fn maximally_mixed(ambient: &HilbertSpace) -> Self {
        let n = ambient.dim();
        let matrix = CMatrix::identity(n, n).unscale(n as f64);
        Self { ambient: ambient.clone(), matrix }
    }

    /// Rank-one projector onto the ray of `v`.
    pub fn pure(ambient: &HilbertSpace, v: &CVector) -> Result<Self> {
        if v.len() != ambient.dim() {
            return Err(Error::DimensionMismatch { expected: ambient.dim(), found: v.len() });
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::NotDensity("zero state vector".into()));
        }
        let u = v.unscale(norm);
        Ok(Self { ambient: ambient.clone(), matrix: &u * u.adjoint() })
    }

    /// Normalizes `A·Aᴴ` to unit trace.
    pub fn from_factor(ambient: &HilbertSpace, factor: &CMatrix) -> Result<Self> {
        let m = factor * factor.adjoint();
        let tr = linalg::trace(&m).re;
        if tr <= 0.0 {
            return Err(Error::NotDensity("zero factor".into()));
        }
        let m = (&m + m.adjoint()).unscale(2.0 * tr);
        Self::new(ambient.clone(), m)
    }

    /// Diagonal state with the given weights, which must sum to 1.
    pub fn diagonal(ambient: &HilbertSpace, weights: &[f64]) -> Result<Self> {
        let d = CVector::from_iterator(weights.len(), weights.iter().map(|&w| C64::new(w, 0.0)));
        Self::new(ambient.clone(), CMatrix::from_diagonal(&d))
    }

    pub fn ambient(&self) -> &HilbertSpace {
        &self.ambient
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn as_operator(&self) -> Operator {
        Operator::new(self.ambient.clone(), self.matrix.clone()).expect("shape checked at construction")
    }
}

/// A probability value with its unclamped source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probability {
    pub value: f64,
    pub raw: f64,
    /// `raw` was outside `[0, 1]` by at most [`CLAMP_TOL`] and was clamped.
    pub clamped: bool,
    /// The ambient has dimension below 3, where not every probability
    /// measure on the lattice arises from a density operator.
    pub low_dimension: bool,
}

/// `Tr(T·P)` for the orthogonal projector `P` onto `subspace`.
pub fn gleason_probability(state: &DensityOperator, subspace: &Subspace) -> Result<Probability> {
    if state.ambient.dim() != subspace.ambient().dim() {
        return Err(Error::AmbientMismatch { left: state.ambient.dim(), right: subspace.ambient().dim() });
    }
    let low_dimension = state.ambient.dim() < 3;
    if low_dimension {
        log::warn!(
            "trace-formula probability in dimension {} < 3: computed, but not every lattice measure is of this form",
            state.ambient.dim()
        );
    }
    let b = subspace.basis();
    // Tr(T·B·Bᴴ) = Tr(Bᴴ·T·B).
    let raw = linalg::trace(&(b.adjoint() * &state.matrix * b)).re;
    let (value, clamped) = if (-CLAMP_TOL..0.0).contains(&raw) {
        (0.0, true)
    } else if raw > 1.0 && raw <= 1.0 + CLAMP_TOL {
        (1.0, true)
    } else {
        (raw, false)
    };
    Ok(Probability { value, raw, clamped, low_dimension })
}

pub fn trace(op: &Operator) -> C64 {
    op.trace()
}

/// Finite spectral resolution `A = Σ λ_i P_i` with distinct `λ_i` ascending.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralResolution {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<Subspace>,
    pub multiplicities: Vec<usize>,
}

impl SpectralResolution {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.projectors.first().map_or(0, |p| p.ambient().dim());
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(n, n), |acc, (&l, p)| acc + p.projector().scale(l))
    }
}

/// Eigenvalue clustering gap for an operator of the given spectral radius.
pub fn cluster_gap(spectral_radius: f64) -> f64 {
    1e-8 * (spectral_radius + 1.0)
}

/// Spectral resolution of a Hermitian operator.
///
/// Eigenvalues within [`cluster_gap`] of their sorted neighbour share an
/// eigenspace; the reported eigenvalue is the cluster mean.
pub fn spectral_decompose(op: &Operator, hermitian_tol: f64) -> Result<SpectralResolution> {
    let dev = op.hermitian_deviation();
    if dev > hermitian_tol {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let (vals, vecs) = hermitian_eigen(op.matrix());
    let radius = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let gap = cluster_gap(radius);

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if v - vals[*c.last().unwrap()] <= gap => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }

    let mut out = SpectralResolution { eigenvalues: vec![], projectors: vec![], multiplicities: vec![] };
    for c in clusters {
        let mean = c.iter().map(|&i| vals[i]).sum::<f64>() / c.len() as f64;
        let cols: Vec<CVector> = c.iter().map(|&i| vecs.column(i).into_owned()).collect();
        let basis = CMatrix::from_columns(&cols);
        out.eigenvalues.push(mean);
        out.projectors.push(Subspace::from_orthonormal(op.ambient(), basis, 1e-9)?);
        out.multiplicities.push(c.len());
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub parts: Vec<Probability>,
    pub sum: f64,
    /// Probability of the join of all parts.
    pub joined: f64,
    pub defect: f64,
    pub holds: bool,
    /// The parts join to the whole space, so the sum must be 1.
    pub resolves_identity: bool,
}

/// Compares `p(∨ parts)` with `Σ p(part)` for pairwise-orthogonal parts.
pub fn check_additivity(state: &DensityOperator, parts: &[Subspace]) -> Result<AdditivityReport> {
    for (i, a) in parts.iter().enumerate() {
        for (j, b) in parts.iter().enumerate().skip(i + 1) {
            let overlap = a.overlap(b)?;
            if overlap > EQUALITY_TOL {
                return Err(Error::NotOrthogonal { i, j, overlap });
            }
        }
    }
    let probs: Vec<Probability> =
        parts.iter().map(|p| gleason_probability(state, p)).collect::<Result<_>>()?;
    let sum: f64 = probs.iter().map(|p| p.raw).sum();
    let join = parts
        .iter()
        .try_fold(Subspace::zero(state.ambient()), |acc, p| acc.join(p))?;
    let joined = gleason_probability(state, &join)?.raw;
    let resolves_identity = join.is_full();
    let mut defect = (joined - sum).abs();
    if resolves_identity {
        defect = defect.max((sum - 1.0).abs());
    }
    Ok(AdditivityReport { parts: probs, sum, joined, defect, holds: defect <= ADDITIVITY_TOL, resolves_identity })
}

/// One row of a probability table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbabilityRow {
    pub label: String,
    pub dimension: usize,
    pub probability: f64,
}

/// CSV with columns `label,dimension,probability`.
pub fn probability_table_csv(rows: &[ProbabilityRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Malformed(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Malformed(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::linalg::op_norm;
    use crate::subspace::testutil::{random_subspace, random_vector};

    fn space(n: usize) -> HilbertSpace {
        HilbertSpace::complex(n).unwrap()
    }

    fn random_state(rng: &mut ChaCha8Rng, h: &HilbertSpace) -> DensityOperator {
        let n = h.dim();
        let cols: Vec<CVector> = (0..n).map(|_| random_vector(rng, n)).collect();
        DensityOperator::from_factor(h, &CMatrix::from_columns(&cols)).unwrap()
    }

    fn random_unitary(rng: &mut ChaCha8Rng, h: &HilbertSpace) -> CMatrix {
        random_subspace(rng, h, h.dim()).basis().clone()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let cols: Vec<CVector> = (0..n).map(|_| random_vector(rng, n)).collect();
        let g = CMatrix::from_columns(&cols);
        (&g + g.adjoint()).unscale(2.0)
    }

    #[test]
    fn density_validation() {
        let h = space(2);
        let bad_trace = CMatrix::identity(2, 2);
        assert!(matches!(DensityOperator::new(h.clone(), bad_trace), Err(Error::NotDensity(_))));
        let non_herm = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0)],
        );
        assert!(matches!(DensityOperator::new(h.clone(), non_herm), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            DensityOperator::diagonal(&h, &[1.5, -0.5]),
            Err(Error::NotDensity(_))
        ));
    }

    #[test]
    fn maximally_mixed_gives_dimension_ratio() {
        let h = space(5);
        let t = DensityOperator::maximally_mixed(&h);
        let p = Subspace::coordinate(&h, &[0, 3]).unwrap();
        let prob = gleason_probability(&t, &p).unwrap();
        assert!((prob.value - 0.4).abs() < 1e-15);
        assert!(!prob.low_dimension);
    }

    #[test]
    fn pure_state_on_own_ray() {
        let h = space(3);
        let v = CVector::from_vec(vec![C64::new(1.0, 1.0), C64::new(0.0, -2.0), C64::new(0.5, 0.0)]);
        let t = DensityOperator::pure(&h, &v).unwrap();
        let p = gleason_probability(&t, &Subspace::span(&h, &[v]).unwrap()).unwrap();
        assert!((p.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_state_on_diagonal_ray() {
        let h = space(3);
        let t = DensityOperator::diagonal(&h, &[0.5, 0.3, 0.2]).unwrap();
        let v = h.basis_vector(0) + h.basis_vector(1);
        let p = gleason_probability(&t, &Subspace::span(&h, &[v]).unwrap()).unwrap();
        // (0.5 + 0.3) / 2 by direct product.
        assert!((p.value - 0.4).abs() < 1e-15);
    }

    #[test]
    fn zero_and_full() {
        let h = space(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_state(&mut rng, &h);
        assert_eq!(gleason_probability(&t, &Subspace::zero(&h)).unwrap().value, 0.0);
        assert!((gleason_probability(&t, &Subspace::full(&h)).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn low_dimension_is_flagged_not_rejected() {
        let h = space(2);
        let t = DensityOperator::maximally_mixed(&h);
        let p = gleason_probability(&t, &Subspace::coordinate(&h, &[0]).unwrap()).unwrap();
        assert!(p.low_dimension);
        assert_eq!(p.value, 0.5);
    }

    #[test]
    fn probability_ambient_mismatch() {
        let t = DensityOperator::maximally_mixed(&space(3));
        assert!(matches!(
            gleason_probability(&t, &Subspace::full(&space(4))),
            Err(Error::AmbientMismatch { .. })
        ));
    }

    #[test]
    fn traces() {
        let h = space(4);
        assert_eq!(trace(&Operator::identity(h.clone())), C64::new(4.0, 0.0));
        let p = Subspace::coordinate(&h, &[1, 2, 3]).unwrap();
        assert!((trace(&p.projector_operator()) - C64::new(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn spectral_examples() {
        let h = space(3);
        let r = spectral_decompose(&Operator::identity(h.clone()), 1e-12).unwrap();
        assert_eq!(r.eigenvalues.len(), 1);
        assert!(r.projectors[0].is_full());

        let d = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0)]);
        let a = Operator::new(h.clone(), CMatrix::from_diagonal(&d)).unwrap();
        let r = spectral_decompose(&a, 1e-12).unwrap();
        assert_eq!(r.multiplicities, vec![2, 1]);
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-14 && (r.eigenvalues[1] - 2.0).abs() < 1e-14);

        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        let skew = Operator::from_matrix(m).unwrap();
        assert!(matches!(spectral_decompose(&skew, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn additivity_examples() {
        let h = space(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_state(&mut rng, &h);
        let parts = [Subspace::coordinate(&h, &[0]).unwrap(), Subspace::coordinate(&h, &[1]).unwrap()];
        let r = check_additivity(&t, &parts).unwrap();
        assert!(r.holds && r.resolves_identity);
        assert!((r.sum - 1.0).abs() < 1e-12);

        let v = h.basis_vector(0) + h.basis_vector(1);
        let bad = [parts[0].clone(), Subspace::span(&h, &[v]).unwrap()];
        assert!(matches!(check_additivity(&t, &bad), Err(Error::NotOrthogonal { i: 0, j: 1, .. })));
    }

    #[test]
    fn csv_table() {
        let rows = vec![
            ProbabilityRow { label: "k=0".into(), dimension: 1, probability: 0.25 },
            ProbabilityRow { label: "a,b".into(), dimension: 2, probability: 0.75 },
        ];
        let csv = probability_table_csv(&rows).unwrap();
        assert_eq!(csv, "label,dimension,probability\nk=0,1,0.25\n\"a,b\",2,0.75\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn trace_is_basis_independent(seed in any::<u64>(), n in 1usize..=12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = space(n);
            let a = random_hermitian(&mut rng, n) + CMatrix::from_fn(n, n, |r, c| C64::new(0.0, (r * c) as f64 * 0.1));
            let u = random_unitary(&mut rng, &h);
            let rotated = u.adjoint() * &a * &u;
            prop_assert!((linalg::trace(&rotated) - linalg::trace(&a)).norm() <= 1e-10 * (1.0 + a.norm()));
        }

        #[test]
        fn probability_monotone_and_complementary(seed in any::<u64>(), n in 1usize..=10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = space(n);
            let t = random_state(&mut rng, &h);
            let rq = rng.gen_range(0..=n);
            let q = random_subspace(&mut rng, &h, rq);
            let rp = rng.gen_range(0..=rq);
            let ps: Vec<CVector> = (0..rp).map(|_| q.basis() * random_vector(&mut rng, rq)).collect();
            let p = Subspace::span(&h, &ps).unwrap();
            let pp = gleason_probability(&t, &p).unwrap().value;
            let pq = gleason_probability(&t, &q).unwrap().value;
            prop_assert!(pp <= pq + 1e-10);
            let comp = gleason_probability(&t, &p.ortho()).unwrap().value;
            prop_assert!((pp + comp - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn spectral_reconstruction(seed in any::<u64>(), n in 1usize..=64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_hermitian(&mut rng, n);
            let op = Operator::from_matrix(a.clone()).unwrap();
            let r = spectral_decompose(&op, 1e-12).unwrap();
            prop_assert!(op_norm(&(a - r.reconstruct())) <= 1e-9);
            prop_assert_eq!(r.multiplicities.iter().sum::<usize>(), n);
            for w in r.eigenvalues.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
        }

        #[test]
        fn eigenspaces_are_additive(seed in any::<u64>(), n in 1usize..=16) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = space(n);
            let t = random_state(&mut rng, &h);
            let op = Operator::from_matrix(random_hermitian(&mut rng, n)).unwrap();
            let r = spectral_decompose(&op, 1e-12).unwrap();
            let rep = check_additivity(&t, &r.projectors).unwrap();
            prop_assert!(rep.holds && rep.resolves_identity);
            prop_assert!((rep.sum - 1.0).abs() <= 1e-9);
        }
    }
}
