//! Geometric quantization of P¹: the section spaces `H⁰(P¹, O(k))`, their
//! equivariant isotypes, coherent vectors and covariant Berezin symbols.
//!
//! Sections of `O(k)` are homogeneous polynomials of degree `k`, with monomial
//! basis `z₀^a z₁^{k−a}` indexed by `a = 0..=k`. The inner product is
//! `⟨s, s'⟩ = vol · ∫ s·s̄' dμ` over unit-norm representatives, μ the
//! normalized Fubini–Study measure; it makes the monomials orthogonal with
//! `‖z₀^a z₁^b‖² = vol · a!·b!/(k+1)!`.
//!
//! Coordinates of vectors and operators on a [`SectionSpace`] always refer to
//! the orthonormal basis `ŝ_a = z₀^a z₁^{k−a} / ‖z₀^a z₁^{k−a}‖`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{QuadratureSpec, SphereRule};
use crate::sphere::{SpherePoint, Symbol};
use crate::subspace::{HilbertSpace, Subspace};
use crate::{CMatrix, CVector, C64};

/// Total Fubini–Study volume of P¹ when none is given.
pub const DEFAULT_VOLUME: f64 = PI;
/// Radius of the SU(2) moment sphere when none is given.
pub const DEFAULT_SU2_RADIUS: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizedGeometry {
    /// Tensor power of the line bundle; plays the role of 1/ħ.
    pub k: usize,
    pub volume_normalization: f64,
    pub quadrature: QuadratureSpec,
    /// Radius of the round metric used by the Laplace–Beltrami operator.
    pub metric_radius: f64,
}

impl QuantizedGeometry {
    pub fn new(k: usize) -> Self {
        Self { k, volume_normalization: DEFAULT_VOLUME, quadrature: QuadratureSpec::for_k(k), metric_radius: 1.0 }
    }

    pub fn with_volume(mut self, volume: f64) -> Result<Self> {
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::Malformed(format!("volume normalization must be positive, got {volume}")));
        }
        self.volume_normalization = volume;
        Ok(self)
    }

    /// Replaces the quadrature; it must be exact to degree `2k + 2`.
    pub fn with_quadrature(mut self, quadrature: QuadratureSpec) -> Result<Self> {
        quadrature.validate()?;
        let required = 2 * self.k + 2;
        if quadrature.exactness_degree < required {
            return Err(Error::InsufficientQuadrature { required, available: quadrature.exactness_degree });
        }
        self.quadrature = quadrature;
        Ok(self)
    }

    pub fn with_metric_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Malformed(format!("metric radius must be positive, got {radius}")));
        }
        self.metric_radius = radius;
        Ok(self)
    }
}

/// `vol · a!·b!/(a+b+1)!`, computed as `vol / ((k+1)·C(k, a))`.
pub fn monomial_norm_sq(a: usize, b: usize, volume: f64) -> f64 {
    let k = a + b;
    let small = a.min(b);
    let mut binom = 1.0_f64;
    for i in 0..small {
        binom = binom * (k - i) as f64 / (i + 1) as f64;
    }
    volume / ((k + 1) as f64 * binom)
}

#[derive(Clone, Debug)]
pub struct SectionSpace {
    geometry: QuantizedGeometry,
    monomials: Vec<(usize, usize)>,
    /// Monomial Gram matrix by quadrature.
    gram: CMatrix,
    /// Closed-form diagonal of the Gram matrix.
    gram_closed: Vec<f64>,
    /// `ŝ_a = scale[a] · z₀^a z₁^{k−a}`.
    scale: Vec<f64>,
    hilbert: HilbertSpace,
}

/// Section space of degree `k` with the volume, quadrature and metric of
/// `geometry`. The quadrature must be exact to degree `2k`.
pub fn build_sections(k: usize, geometry: &QuantizedGeometry) -> Result<SectionSpace> {
    let required = 2 * k;
    geometry.quadrature.validate()?;
    if geometry.quadrature.exactness_degree < required {
        return Err(Error::InsufficientQuadrature { required, available: geometry.quadrature.exactness_degree });
    }
    let geometry = QuantizedGeometry { k, ..geometry.clone() };
    let vol = geometry.volume_normalization;
    let monomials: Vec<(usize, usize)> = (0..=k).map(|a| (a, k - a)).collect();
    let gram_closed: Vec<f64> = monomials.iter().map(|&(a, b)| monomial_norm_sq(a, b, vol)).collect();
    let scale = gram_closed.iter().map(|g| 1.0 / g.sqrt()).collect();
    let hilbert = HilbertSpace::new(k + 1, format!("H0(P1,O({k}))"))?;
    let mut space = SectionSpace { geometry, monomials, gram: CMatrix::zeros(0, 0), gram_closed, scale, hilbert };
    let rule = space.geometry.quadrature.rule();
    space.gram = space.monomial_form(&rule, &Symbol::one());
    Ok(space)
}

impl SectionSpace {
    /// Section space with the default geometry for `k`.
    pub fn standard(k: usize) -> Result<Self> {
        build_sections(k, &QuantizedGeometry::new(k))
    }

    pub fn k(&self) -> usize {
        self.geometry.k
    }

    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn volume(&self) -> f64 {
        self.geometry.volume_normalization
    }

    pub fn geometry(&self) -> &QuantizedGeometry {
        &self.geometry
    }

    pub fn hilbert(&self) -> &HilbertSpace {
        &self.hilbert
    }

    /// Exponent pairs `(a, b)`, `a + b = k`, in basis order.
    pub fn monomials(&self) -> &[(usize, usize)] {
        &self.monomials
    }

    /// Monomial Gram matrix computed by quadrature.
    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn gram_closed_form(&self) -> &[f64] {
        &self.gram_closed
    }

    /// Largest relative deviation of the quadrature Gram diagonal from the
    /// closed form.
    pub fn gram_relative_error(&self) -> f64 {
        self.gram_closed
            .iter()
            .enumerate()
            .map(|(i, g)| (self.gram[(i, i)] - C64::new(*g, 0.0)).norm() / g)
            .fold(0.0, f64::max)
    }

    /// Largest off-diagonal Gram entry relative to the largest diagonal one.
    pub fn gram_offdiag_ratio(&self) -> f64 {
        let n = self.dim();
        let diag = (0..n).map(|i| self.gram[(i, i)].norm()).fold(0.0, f64::max);
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off.max(self.gram[(i, j)].norm());
                }
            }
        }
        off / diag
    }

    /// Orthonormal basis sections evaluated at the given homogeneous
    /// coordinates (not normalized).
    pub fn evaluate(&self, point: &SpherePoint) -> CVector {
        let (z0, z1) = point.coords();
        self.evaluate_at(z0, z1)
    }

    /// Orthonormal basis sections at the unit-norm lift of `point`.
    pub fn evaluate_unit(&self, point: &SpherePoint) -> CVector {
        let (z0, z1) = point.unit_lift();
        self.evaluate_at(z0, z1)
    }

    fn evaluate_at(&self, z0: C64, z1: C64) -> CVector {
        CVector::from_iterator(
            self.dim(),
            self.monomials.iter().zip(&self.scale).map(|(&(a, b), s)| z0.powu(a as u32) * z1.powu(b as u32) * *s),
        )
    }

    /// Value at `point` (raw coordinates) of the section with orthonormal
    /// coefficients `coeffs`.
    pub fn section_value(&self, coeffs: &CVector, point: &SpherePoint) -> C64 {
        self.evaluate(point).iter().zip(coeffs.iter()).map(|(s, c)| s * c).sum()
    }

    /// `⟨u, v⟩` for sections given by orthonormal coefficients, integrated
    /// pointwise with the quadrature rule rather than read off coordinates.
    pub fn quadrature_inner_product(&self, u: &CVector, v: &CVector) -> C64 {
        let rule = self.geometry.quadrature.rule();
        rule.points()
            .map(|(p, w)| {
                let basis = self.evaluate_unit(&p);
                let su: C64 = basis.iter().zip(u.iter()).map(|(s, c)| s * c).sum();
                let sv: C64 = basis.iter().zip(v.iter()).map(|(s, c)| s * c).sum();
                su * sv.conj() * w
            })
            .sum::<C64>()
            * self.volume()
    }

    /// `M[i][j] = vol · ∫ f · m_j · m̄_i dμ` in the monomial basis.
    ///
    /// On the lift `(√t·e^{iφ}, √(1−t))` the product `m_j·m̄_i` is
    /// `t^{(i+j)/2}(1−t)^{k−(i+j)/2}·e^{i(j−i)φ}`, so the azimuthal sum reduces
    /// to Fourier coefficients of `f` on each latitude circle.
    pub(crate) fn monomial_form(&self, rule: &SphereRule, f: &Symbol) -> CMatrix {
        let k = self.k();
        let n = self.dim();
        let lw = rule.longitude_weight();
        // twiddle[l][d + k] = e^{i·d·φ_l}, d = −k..=k
        let twiddle: Vec<Vec<C64>> = rule
            .longitudes
            .iter()
            .map(|&phi| (0..=2 * k).map(|d| C64::from_polar(1.0, (d as f64 - k as f64) * phi)).collect())
            .collect();
        let mut m = CMatrix::zeros(n, n);
        let mut fourier = vec![C64::new(0.0, 0.0); 2 * k + 1];
        let mut radial = vec![0.0_f64; n];
        for lat in &rule.latitudes {
            fourier.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            for (l, &phi) in rule.longitudes.iter().enumerate() {
                let fv = f.eval(&SpherePoint::from_height(lat.height, phi)) * lw;
                if fv == C64::new(0.0, 0.0) {
                    continue;
                }
                for (c, t) in fourier.iter_mut().zip(&twiddle[l]) {
                    *c += fv * t;
                }
            }
            let t = (0.5 * (1.0 + lat.height)).clamp(0.0, 1.0);
            let (st, sc) = (t.sqrt(), (1.0 - t).sqrt());
            for (a, r) in radial.iter_mut().enumerate() {
                *r = st.powi(a as i32) * sc.powi((k - a) as i32);
            }
            for i in 0..n {
                for j in 0..n {
                    let d = j + k - i;
                    m[(i, j)] += fourier[d] * (lat.weight * radial[i] * radial[j]);
                }
            }
        }
        m * C64::new(self.volume(), 0.0)
    }

    /// Compression of multiplication by `f` in the orthonormal basis, with
    /// the height axis split at the symbol's breakpoints.
    pub fn compress(&self, f: &Symbol) -> CMatrix {
        let rule = self.geometry.quadrature.rule_on_panels(&f.breakpoints());
        let m = self.monomial_form(&rule, f);
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| m[(i, j)] * (self.scale[i] * self.scale[j]))
    }
}

/// A Hamiltonian action on P¹ lifted to the line bundle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupAction {
    /// `t·(z₀, z₁) = (t z₀, t z₁)`; grades by tensor power.
    Circle,
    /// `t·(z₀, z₁) = (t z₀, t⁻¹ z₁)`.
    Torus,
    /// Linear SU(2) action; moment map onto the sphere of the given radius.
    Su2 { radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MomentValue {
    Scalar(f64),
    Vector([f64; 3]),
}

impl GroupAction {
    pub fn su2() -> Self {
        GroupAction::Su2 { radius: DEFAULT_SU2_RADIUS }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GroupAction::Circle => "circle",
            GroupAction::Torus => "torus",
            GroupAction::Su2 { .. } => "su2",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "circle" => Ok(GroupAction::Circle),
            "torus" => Ok(GroupAction::Torus),
            "su2" => Ok(GroupAction::su2()),
            other => Err(Error::Malformed(format!("unknown action `{other}` (circle, torus, su2)"))),
        }
    }

    /// Weight of the monomial `z₀^a z₁^{k−a}`.
    ///
    /// Torus: sections transform as `s ∘ μ_{t⁻¹}`, giving `t^{k−2a}`. The same
    /// integer `b − a` labels the SU(2) weight spaces. The circle weight is `k`.
    pub fn weight(&self, a: usize, k: usize) -> i64 {
        match self {
            GroupAction::Circle => k as i64,
            GroupAction::Torus | GroupAction::Su2 { .. } => k as i64 - 2 * a as i64,
        }
    }

    pub fn moment_map(&self, point: &SpherePoint) -> MomentValue {
        match self {
            GroupAction::Circle => MomentValue::Scalar(1.0),
            GroupAction::Torus => MomentValue::Scalar(point.height()),
            GroupAction::Su2 { radius } => {
                let x = point.cartesian();
                MomentValue::Vector([radius * x[0], radius * x[1], radius * x[2]])
            }
        }
    }
}

pub fn moment_map(action: &GroupAction, point: &SpherePoint) -> MomentValue {
    action.moment_map(point)
}

/// How finely to split a section space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Refinement {
    /// One component per irreducible representation.
    Isotypic,
    /// SU(2) only: one component per weight `b − a`.
    Atomic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivariantComponent {
    pub nu_g: i64,
    pub nu_t: i64,
    pub subspace: Subspace,
    /// Dimension of the irreducible representation of the acting group.
    pub rep_dimension: usize,
    pub label: String,
}

impl EquivariantComponent {
    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }
}

/// Span of the monomials of `space` whose weight under `action` is `nu_g`.
/// Empty when no monomial carries that weight.
pub fn isotype(action: &GroupAction, space: &SectionSpace, nu_g: i64) -> Result<Subspace> {
    let k = space.k();
    let idx: Vec<usize> = (0..=k).filter(|&a| action.weight(a, k) == nu_g).collect();
    Subspace::coordinate(space.hilbert(), &idx)
}

/// Equivariant splitting of one section space. Components are nonzero and
/// listed by increasing `ν_G`.
pub fn decompose(action: &GroupAction, space: &SectionSpace, refinement: Refinement) -> Result<Vec<EquivariantComponent>> {
    let k = space.k();
    let kt = k as i64;
    match (action, refinement) {
        (GroupAction::Circle, Refinement::Isotypic) => Ok(vec![EquivariantComponent {
            nu_g: 0,
            nu_t: kt,
            subspace: Subspace::full(space.hilbert()),
            rep_dimension: 1,
            label: format!("circle k={k}"),
        }]),
        (GroupAction::Su2 { .. }, Refinement::Isotypic) => Ok(vec![EquivariantComponent {
            nu_g: kt,
            nu_t: kt,
            subspace: Subspace::full(space.hilbert()),
            rep_dimension: k + 1,
            label: format!("Sym^{k}"),
        }]),
        (GroupAction::Torus, Refinement::Isotypic) | (GroupAction::Su2 { .. }, Refinement::Atomic) => {
            let mut out = Vec::new();
            for nu in (-kt..=kt).filter(|nu| (kt - nu) % 2 == 0) {
                let subspace = isotype(action, space, nu)?;
                if subspace.is_zero() {
                    continue;
                }
                let (rep_dimension, label) = match action {
                    GroupAction::Torus => (1, format!("torus nu={nu} k={k}")),
                    _ => (k + 1, format!("Sym^{k} weight {nu}")),
                };
                out.push(EquivariantComponent { nu_g: nu, nu_t: kt, subspace, rep_dimension, label });
            }
            Ok(out)
        }
        (GroupAction::Circle | GroupAction::Torus, Refinement::Atomic) => Err(Error::ActionMismatch {
            action: action.name().into(),
            reason: "atomic refinement is defined for su2 only".into(),
        }),
    }
}

/// Finite direct sum `⊕_{k_min ≤ k ≤ k_max} H⁰(P¹, O(k))`, the truncation of
/// the Hardy space of the circle bundle.
#[derive(Clone, Debug)]
pub struct TruncatedHardySpace {
    blocks: Vec<SectionSpace>,
    offsets: Vec<usize>,
    ambient: HilbertSpace,
}

impl TruncatedHardySpace {
    pub fn new(k_min: usize, k_max: usize, volume: f64) -> Result<Self> {
        if k_min > k_max {
            return Err(Error::InvalidTruncation(format!("k_min = {k_min} exceeds k_max = {k_max}")));
        }
        let blocks: Vec<SectionSpace> = (k_min..=k_max)
            .map(|k| build_sections(k, &QuantizedGeometry::new(k).with_volume(volume)?))
            .collect::<Result<_>>()?;
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut total = 0;
        for b in &blocks {
            offsets.push(total);
            total += b.dim();
        }
        let ambient = HilbertSpace::new(total, format!("H(X) truncated to {k_min}..={k_max}"))?;
        Ok(Self { blocks, offsets, ambient })
    }

    /// `⊕_{k ≤ max_k}` with the default volume.
    pub fn up_to(max_k: usize) -> Result<Self> {
        Self::new(0, max_k, DEFAULT_VOLUME)
    }

    pub fn ambient(&self) -> &HilbertSpace {
        &self.ambient
    }

    pub fn blocks(&self) -> &[SectionSpace] {
        &self.blocks
    }

    pub fn k_range(&self) -> (usize, usize) {
        (self.blocks[0].k(), self.blocks[self.blocks.len() - 1].k())
    }

    pub fn block(&self, k: usize) -> Option<(&SectionSpace, usize)> {
        let (lo, hi) = self.k_range();
        if k < lo || k > hi {
            return None;
        }
        Some((&self.blocks[k - lo], self.offsets[k - lo]))
    }

    /// Components of every block, embedded in the ambient direct sum.
    pub fn decompose(&self, action: &GroupAction, refinement: Refinement) -> Result<Vec<EquivariantComponent>> {
        let mut out = Vec::new();
        for (block, &offset) in self.blocks.iter().zip(&self.offsets) {
            for c in decompose(action, block, refinement)? {
                out.push(EquivariantComponent { subspace: c.subspace.embed(&self.ambient, offset)?, ..c });
            }
        }
        Ok(out)
    }
}

/// The reproducing vector `e_α` with `⟨s, e_α⟩ = s(α)` for every section.
///
/// In orthonormal coordinates `(e_α)_j = conj(ŝ_j(α))`, so `e_{cα} = c̄^k e_α`.
pub fn coherent_vector(point: &SpherePoint, space: &SectionSpace) -> CVector {
    space.evaluate(point).map(|v| v.conj())
}

/// Covariant Berezin symbol `⟨A e_α, e_α⟩ / ⟨e_α, e_α⟩`.
pub fn berezin_symbol(op: &CMatrix, point: &SpherePoint, space: &SectionSpace) -> Result<C64> {
    if op.nrows() != space.dim() || op.ncols() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: op.nrows() });
    }
    let e = coherent_vector(point, space);
    Ok(e.dotc(&(op * &e)) / e.norm_squared())
}
