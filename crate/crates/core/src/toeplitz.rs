//! Berezin–Toeplitz operators `T_k[f] = Π_k M_f Π_k`, latitude-band POVMs
//! `E_k(B) = T_k[1_B]`, their Riemann sums, and the Tuynman-corrected
//! operator `Q_k[f] = i·T_k[f − Δf/(2k)]`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{op_norm, to_rows};
use crate::p1::{build_sections, QuantizedGeometry, SectionSpace};
use crate::quadrature::QuadratureSpec;
use crate::sphere::{laplace_beltrami, SpherePoint, Symbol};
use crate::subspace::Operator;
use crate::{CMatrix, C64};

/// Band edges closer than this are treated as equal.
const EDGE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ToeplitzOperator {
    matrix: CMatrix,
    symbol_id: String,
    k: usize,
    quadrature: QuadratureSpec,
    exact: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToeplitzDoc {
    pub symbol_id: String,
    pub k: usize,
    pub quadrature: QuadratureSpec,
    pub exact: bool,
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl ToeplitzOperator {
    /// Matrix in the orthonormal section basis.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn symbol_id(&self) -> &str {
        &self.symbol_id
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quadrature
    }

    /// Whether the quadrature integrates `f·ŝ_j·conj(ŝ_i)` exactly.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn norm(&self) -> f64 {
        op_norm(&self.matrix)
    }

    pub fn to_operator(&self, space: &SectionSpace) -> Result<Operator> {
        Operator::new(space.hilbert().clone(), self.matrix.clone())
    }

    pub fn doc(&self) -> ToeplitzDoc {
        let (real, imag) = to_rows(&self.matrix);
        ToeplitzDoc {
            symbol_id: self.symbol_id.clone(),
            k: self.k,
            quadrature: self.quadrature,
            exact: self.exact,
            real,
            imag,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.doc())?)
    }
}

/// `T_k[f]` on `space`. Non-polynomial symbols are integrated approximately
/// and logged; the returned operator records whether the rule was exact.
pub fn toeplitz(f: &Symbol, space: &SectionSpace) -> ToeplitzOperator {
    let quadrature = space.geometry().quadrature;
    let exact = f.polynomial_degree().is_some_and(|d| space.k() + d <= quadrature.exactness_degree);
    if !exact {
        warn!(
            "T_{}[{}]: quadrature of degree {} is not exact for this symbol",
            space.k(),
            f.id(),
            quadrature.exactness_degree
        );
    }
    ToeplitzOperator { matrix: space.compress(f), symbol_id: f.id(), k: space.k(), quadrature, exact }
}

/// `T_k[f]` on a freshly built section space.
pub fn toeplitz_for(f: &Symbol, k: usize, geometry: &QuantizedGeometry) -> Result<ToeplitzOperator> {
    Ok(toeplitz(f, &build_sections(k, geometry)?))
}

/// A partition of P¹ into latitude bands `[lo, hi)` in the height variable,
/// with one sample point per band.
#[derive(Clone, Debug)]
pub struct RegionPartition {
    bands: Vec<(f64, f64)>,
    samples: Vec<SpherePoint>,
}

impl RegionPartition {
    pub fn new(bands: Vec<(f64, f64)>, samples: Vec<SpherePoint>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidPartition("no regions".into()));
        }
        if samples.len() != bands.len() {
            return Err(Error::MissingSamples { regions: bands.len(), samples: samples.len() });
        }
        if (bands[0].0 + 1.0).abs() > EDGE_TOL || (bands[bands.len() - 1].1 - 1.0).abs() > EDGE_TOL {
            return Err(Error::InvalidPartition("bands must cover heights −1 to 1".into()));
        }
        for (i, &(lo, hi)) in bands.iter().enumerate() {
            if !(lo < hi) {
                return Err(Error::InvalidPartition(format!("band {i} has bounds [{lo}, {hi})")));
            }
            if let Some(&(next, _)) = bands.get(i + 1) {
                if (next - hi).abs() > EDGE_TOL {
                    return Err(Error::InvalidPartition(format!(
                        "band {i} ends at {hi} but band {} starts at {next}",
                        i + 1
                    )));
                }
            }
            let h = samples[i].height();
            if h < lo - EDGE_TOL || h > hi + EDGE_TOL {
                return Err(Error::InvalidPartition(format!("sample {i} at height {h} lies outside [{lo}, {hi})")));
            }
        }
        Ok(Self { bands, samples })
    }

    /// `n` bands of equal measure, sampled at mid-height on the meridian φ = 0.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("no regions".into()));
        }
        let edge = |i: usize| -1.0 + 2.0 * i as f64 / n as f64;
        let bands: Vec<(f64, f64)> = (0..n).map(|i| (edge(i), edge(i + 1))).collect();
        let samples = bands.iter().map(|(lo, hi)| SpherePoint::from_height(0.5 * (lo + hi), 0.0)).collect();
        Self::new(bands, samples)
    }

    /// Southern remainder and a northern cap of normalized measure `q`.
    pub fn cap(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidPartition(format!("cap fraction {q} must lie in (0, 1)")));
        }
        let cut = 1.0 - 2.0 * q;
        let bands = vec![(-1.0, cut), (cut, 1.0)];
        let samples = bands.iter().map(|(lo, hi)| SpherePoint::from_height(0.5 * (lo + hi), 0.0)).collect();
        Self::new(bands, samples)
    }

    pub fn bands(&self) -> &[(f64, f64)] {
        &self.bands
    }

    pub fn samples(&self) -> &[SpherePoint] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    /// Every band split in two at mid-height, samples at the new midpoints.
    pub fn refined(&self) -> Result<Self> {
        let mut bands = Vec::with_capacity(2 * self.len());
        for &(lo, hi) in &self.bands {
            let mid = 0.5 * (lo + hi);
            bands.push((lo, mid));
            bands.push((mid, hi));
        }
        let samples = bands.iter().map(|(lo, hi)| SpherePoint::from_height(0.5 * (lo + hi), 0.0)).collect();
        Self::new(bands, samples)
    }
}

/// `E_k(B_i) = T_k[1_{B_i}]` for every band.
pub fn povm_blocks(partition: &RegionPartition, space: &SectionSpace) -> Result<Vec<Operator>> {
    partition
        .bands()
        .iter()
        .map(|&(lo, hi)| toeplitz(&Symbol::Band { lo, hi }, space).to_operator(space))
        .collect()
}

/// `Σ_i f(sample_i)·E_k(B_i)`.
pub fn riemann_reconstruct(f: &Symbol, partition: &RegionPartition, space: &SectionSpace) -> Result<Operator> {
    let n = space.dim();
    let mut acc = CMatrix::zeros(n, n);
    for (block, sample) in povm_blocks(partition, space)?.iter().zip(partition.samples()) {
        acc += block.matrix() * f.eval(sample);
    }
    Operator::new(space.hilbert().clone(), acc)
}

/// `Q_k[f] = i·T_k[f − Δf/(2k)]`, assembled as `i·(T_k[f] − T_k[Δf]/(2k))`.
/// The Laplacian uses the metric radius of the space's geometry.
pub fn tuynman_q(f: &Symbol, space: &SectionSpace) -> Result<CMatrix> {
    let k = space.k();
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let lap = laplace_beltrami(f, space.geometry().metric_radius)?;
    let t = toeplitz(f, space).into_matrix();
    let tl = toeplitz(&lap, space).into_matrix();
    Ok((t - tl / C64::new(2.0 * k as f64, 0.0)) * C64::i())
}

/// `‖(1/i)·Q_k[f] − T_k[f]‖`.
pub fn tuynman_deviation(f: &Symbol, space: &SectionSpace) -> Result<f64> {
    let q = tuynman_q(f, space)?;
    let t = toeplitz(f, space).into_matrix();
    Ok(op_norm(&(q * (-C64::i()) - t)))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::linalg::hermitian_eigen;

    fn identity_distance(m: &CMatrix) -> f64 {
        op_norm(&(m - CMatrix::identity(m.nrows(), m.ncols())))
    }

    /// Simpson rule for ∫₀¹ t^a (1−t)^b dt.
    fn beta(a: usize, b: usize) -> f64 {
        let n = 4000;
        let h = 1.0 / n as f64;
        let f = |t: f64| t.powi(a as i32) * (1.0 - t).powi(b as i32);
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn constant_symbols() {
        for k in [0, 1, 6, 25] {
            let s = SectionSpace::standard(k).unwrap();
            assert!(identity_distance(toeplitz(&Symbol::one(), &s).matrix()) <= 1e-12);
            let c = toeplitz(&Symbol::constant(-2.5), &s);
            assert!(op_norm(&(c.matrix() + CMatrix::identity(k + 1, k + 1) * C64::new(2.5, 0.0))) <= 1e-12);
            assert!(c.is_exact());
        }
    }

    #[test]
    fn height_is_diagonal_with_beta_oracle() {
        for k in [0, 1, 5, 12] {
            let s = SectionSpace::standard(k).unwrap();
            let t = toeplitz(&Symbol::height(), &s);
            for a in 0..=k {
                // mean of 2t − 1 against t^a(1−t)^{k−a}
                let want = 2.0 * beta(a + 1, k - a) / beta(a, k - a) - 1.0;
                assert!((t.matrix()[(a, a)].re - want).abs() < 1e-9);
                assert!((want - (2.0 * a as f64 - k as f64) / (k as f64 + 2.0)).abs() < 1e-9);
                for b in 0..=k {
                    if a != b {
                        assert!(t.matrix()[(a, b)].norm() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn hemispheres_and_caps_at_k0() {
        let s = SectionSpace::standard(0).unwrap();
        let hemi = povm_blocks(&RegionPartition::uniform(2).unwrap(), &s).unwrap();
        for b in &hemi {
            assert!((b.matrix()[(0, 0)].re - 0.5).abs() < 1e-14);
        }
        for q in [0.1, 0.37, 0.9] {
            let blocks = povm_blocks(&RegionPartition::cap(q).unwrap(), &s).unwrap();
            assert!((blocks[1].matrix()[(0, 0)].re - q).abs() < 1e-14);
        }
        let whole = povm_blocks(&RegionPartition::uniform(1).unwrap(), &s).unwrap();
        assert!((whole[0].matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn povm_blocks_psd_and_complete() {
        for k in [1, 7, 20] {
            let s = SectionSpace::standard(k).unwrap();
            let blocks = povm_blocks(&RegionPartition::uniform(9).unwrap(), &s).unwrap();
            let mut sum = CMatrix::zeros(k + 1, k + 1);
            for b in &blocks {
                assert!(hermitian_eigen(b.matrix()).0[0] >= -1e-10);
                sum += b.matrix();
            }
            assert!(identity_distance(&sum) <= 1e-9);
        }
    }

    #[test]
    fn partition_validation() {
        let p = |h: f64| SpherePoint::from_height(h, 0.0);
        assert!(matches!(
            RegionPartition::new(vec![(-1.0, 0.2), (0.1, 1.0)], vec![p(0.0), p(0.5)]),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            RegionPartition::new(vec![(-1.0, 0.0), (0.0, 1.0)], vec![p(0.0)]),
            Err(Error::MissingSamples { regions: 2, samples: 1 })
        ));
        assert!(RegionPartition::new(vec![(-1.0, 0.5)], vec![p(0.0)]).is_err());
        assert!(RegionPartition::new(vec![(-1.0, 0.0), (0.0, 1.0)], vec![p(0.5), p(0.5)]).is_err());
    }

    #[test]
    fn riemann_reconstruction() {
        let k = 5;
        let s = SectionSpace::standard(k).unwrap();
        let t = toeplitz(&Symbol::height(), &s);
        let c = Symbol::constant(1.7);
        let rc = riemann_reconstruct(&c, &RegionPartition::uniform(6).unwrap(), &s).unwrap();
        assert!(op_norm(&(rc.matrix() - toeplitz(&c, &s).matrix())) < 1e-12);

        let one = riemann_reconstruct(&Symbol::height(), &RegionPartition::uniform(1).unwrap(), &s).unwrap();
        assert!(one.matrix().norm() < 1e-15);
        let d1 = op_norm(&(one.matrix() - t.matrix()));
        assert!((d1 - k as f64 / (k as f64 + 2.0)).abs() < 1e-12);

        let dist = |n| {
            let r = riemann_reconstruct(&Symbol::height(), &RegionPartition::uniform(n).unwrap(), &s).unwrap();
            op_norm(&(r.matrix() - t.matrix()))
        };
        assert!(dist(100) / dist(10) < 1.0);
    }

    #[test]
    fn tuynman_height() {
        for k in [1, 4, 10, 31] {
            let s = SectionSpace::standard(k).unwrap();
            let q = tuynman_q(&Symbol::height(), &s).unwrap();
            let kf = k as f64;
            for a in 0..=k {
                let want = C64::i() * (1.0 + 1.0 / kf) * (2.0 * a as f64 - kf) / (kf + 2.0);
                assert!((q[(a, a)] - want).norm() < 1e-12);
            }
        }
        let s10 = SectionSpace::standard(10).unwrap();
        assert!((tuynman_deviation(&Symbol::height(), &s10).unwrap() - 1.0 / 12.0).abs() < 1e-12);
        let s0 = SectionSpace::standard(0).unwrap();
        assert!(matches!(tuynman_q(&Symbol::height(), &s0), Err(Error::ZeroK)));
    }

    #[test]
    fn tuynman_constant_and_radius() {
        let s = SectionSpace::standard(6).unwrap();
        let q = tuynman_q(&Symbol::constant(3.0), &s).unwrap();
        assert!(op_norm(&(q - CMatrix::identity(7, 7) * C64::new(0.0, 3.0))) < 1e-12);
        // On a sphere of radius 2 the Laplacian is four times weaker.
        let g = QuantizedGeometry::new(6).with_metric_radius(2.0).unwrap();
        let s2 = build_sections(6, &g).unwrap();
        let d1 = tuynman_deviation(&Symbol::height(), &s).unwrap();
        let d2 = tuynman_deviation(&Symbol::height(), &s2).unwrap();
        assert!((d1 - 4.0 * d2).abs() < 1e-12);
    }

    #[test]
    fn tuynman_deviation_bound_for_harmonics() {
        for (l, m) in [(2, 0), (3, 1), (4, -2)] {
            let f = Symbol::harmonic(l, m).unwrap();
            for k in [3, 8, 15] {
                let s = SectionSpace::standard(k).unwrap();
                let dev = tuynman_deviation(&f, &s).unwrap();
                let sup = sup_on_grid(&laplace_beltrami(&f, 1.0).unwrap());
                assert!(dev * k as f64 <= sup / 2.0 + 1e-9, "l={l} k={k}");
            }
        }
    }

    fn sup_on_grid(f: &Symbol) -> f64 {
        let rule = QuadratureSpec::with_degree(60).rule();
        rule.points().map(|(p, _)| f.eval(&p).norm()).fold(0.0, f64::max)
    }

    fn random_band_limited(rng: &mut ChaCha8Rng) -> (Symbol, f64) {
        let terms: Vec<(usize, i64, C64)> = (0..4)
            .map(|_| {
                let l = rng.gen_range(0..5usize);
                let m = rng.gen_range(-(l as i64)..=l as i64);
                (l, m, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            })
            .collect();
        let f = Symbol::custom("random-harmonics", move |p| {
            terms.iter().map(|(l, m, c)| c * crate::sphere::spherical_harmonic(*l, *m, p.theta(), p.azimuth())).sum()
        });
        let sup = sup_on_grid(&f);
        (f, sup)
    }

    #[test]
    fn norm_contraction_random_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let spaces: Vec<SectionSpace> = [1, 9, 22, 40].iter().map(|&k| SectionSpace::standard(k).unwrap()).collect();
        for i in 0..50 {
            let (f, sup) = random_band_limited(&mut rng);
            let s = &spaces[i % spaces.len()];
            let t = toeplitz(&f, s);
            assert!(t.norm() <= sup + 1e-8);
        }
    }

    #[test]
    fn json_round_trip_fields() {
        let s = SectionSpace::standard(2).unwrap();
        let t = toeplitz(&Symbol::height(), &s);
        let doc: ToeplitzDoc = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(doc.symbol_id, "height");
        assert_eq!(doc.k, 2);
        assert_eq!(doc.real[0][0], t.matrix()[(0, 0)].re);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn positivity_and_adjoint(seed in any::<u64>(), k in 0usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = SectionSpace::standard(k).unwrap();
            let (f, _) = random_band_limited(&mut rng);
            let t = toeplitz(&f, &s);
            let tc = toeplitz(&f.conj(), &s);
            prop_assert!(op_norm(&(tc.matrix() - t.matrix().adjoint())) <= 1e-10);

            let sq = Symbol::custom("abs2", move |p| C64::new(f.eval(p).norm_sqr(), 0.0));
            let tp = toeplitz(&sq, &s);
            prop_assert!(hermitian_eigen(tp.matrix()).0[0] >= -1e-9);
        }

        #[test]
        fn riemann_refinement_is_monotone(k in 1usize..25, base in 1usize..6) {
            let s = SectionSpace::standard(k).unwrap();
            let t = toeplitz(&Symbol::height(), &s);
            let mut part = RegionPartition::uniform(base).unwrap();
            let mut last = f64::INFINITY;
            for _ in 0..4 {
                let r = riemann_reconstruct(&Symbol::height(), &part, &s).unwrap();
                let d = op_norm(&(r.matrix() - t.matrix()));
                prop_assert!(d <= last);
                last = d;
                part = part.refined().unwrap();
            }
        }
    }
}
