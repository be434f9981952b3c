//! Closed subspaces of finite-dimensional complex inner-product spaces.
//!
//! A [`Subspace`] is stored as an orthonormal column basis; its projector is
//! derived on demand. Equality of subspaces is projector distance in operator
//! norm, at most [`EQUALITY_TOL`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigen, op_norm};
use crate::{CMatrix, CVector, C64};

/// Default numerical-rank tolerance, relative to the largest input norm.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Projector distance below which two subspaces are considered equal.
pub const EQUALITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpace {
    dim: usize,
    label: String,
}

impl HilbertSpace {
    pub fn new(dim: usize, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyAmbient);
        }
        Ok(Self { dim, label: label.into() })
    }

    /// `C^dim`, labelled as such.
    pub fn complex(dim: usize) -> Result<Self> {
        Self::new(dim, format!("C^{dim}"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Standard basis vector `e_i` (zero-based).
    pub fn basis_vector(&self, i: usize) -> CVector {
        let mut v = CVector::zeros(self.dim);
        v[i] = C64::new(1.0, 0.0);
        v
    }

    fn check_compatible(&self, other: &HilbertSpace) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::AmbientMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }
}

/// A linear operator on a [`HilbertSpace`], as a dense square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    ambient: HilbertSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(ambient: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != ambient.dim() || matrix.ncols() != ambient.dim() {
            return Err(Error::DimensionMismatch {
                expected: ambient.dim(),
                found: if matrix.nrows() != ambient.dim() { matrix.nrows() } else { matrix.ncols() },
            });
        }
        Ok(Self { ambient, matrix })
    }

    /// Wraps a square matrix in an anonymous `C^n`.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        Self::new(HilbertSpace::complex(matrix.nrows())?, matrix)
    }

    pub fn identity(ambient: HilbertSpace) -> Self {
        let n = ambient.dim();
        Self { ambient, matrix: CMatrix::identity(n, n) }
    }

    pub fn ambient(&self) -> &HilbertSpace {
        &self.ambient
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix)
    }

    pub fn norm(&self) -> f64 {
        op_norm(&self.matrix)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.matrix)
    }

    /// Operator-norm distance to another operator on the same space.
    pub fn distance(&self, other: &Operator) -> Result<f64> {
        self.ambient.check_compatible(&other.ambient)?;
        Ok(op_norm(&(&self.matrix - &other.matrix)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&OperatorDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<OperatorDoc>(s)?.try_into()
    }
}

/// JSON form of an [`Operator`]: row-major real and imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub dim: usize,
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl From<&Operator> for OperatorDoc {
    fn from(op: &Operator) -> Self {
        let (real, imag) = linalg::to_rows(&op.matrix);
        Self { dim: op.dim(), real, imag }
    }
}

impl TryFrom<OperatorDoc> for Operator {
    type Error = Error;

    fn try_from(doc: OperatorDoc) -> Result<Self> {
        let m = linalg::from_rows(&doc.real, &doc.imag, doc.dim, doc.dim)?;
        Operator::new(HilbertSpace::complex(doc.dim)?, m)
    }
}

/// A closed subspace with an orthonormal column basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SubspaceDoc", into = "SubspaceDoc")]
pub struct Subspace {
    ambient: HilbertSpace,
    basis: CMatrix,
    tol: f64,
}

/// Gram–Schmidt span of `vectors`, processed in order.
///
/// A direction is dropped when its residual norm is at most
/// `tol × (largest input norm)`.
pub fn orthonormalize(ambient: &HilbertSpace, vectors: &[CVector], tol: f64) -> Result<Subspace> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let n = ambient.dim();
    for v in vectors {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
    }
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    let mut cols: Vec<CVector> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        // Two passes of modified Gram–Schmidt keep the basis orthonormal to
        // machine precision.
        for _ in 0..2 {
            for q in &cols {
                let c = q.dotc(&w);
                w.axpy(-c, q, C64::new(1.0, 0.0));
            }
        }
        let r = w.norm();
        if r > tol * scale && r > 0.0 {
            cols.push(w.unscale(r));
        }
    }
    let basis = if cols.is_empty() { CMatrix::zeros(n, 0) } else { CMatrix::from_columns(&cols) };
    Ok(Subspace { ambient: ambient.clone(), basis, tol })
}

impl Subspace {
    pub fn zero(ambient: &HilbertSpace) -> Self {
        Self { ambient: ambient.clone(), basis: CMatrix::zeros(ambient.dim(), 0), tol: DEFAULT_RANK_TOL }
    }

    pub fn full(ambient: &HilbertSpace) -> Self {
        let n = ambient.dim();
        Self { ambient: ambient.clone(), basis: CMatrix::identity(n, n), tol: DEFAULT_RANK_TOL }
    }

    /// Span of the given vectors with the default rank tolerance.
    pub fn span(ambient: &HilbertSpace, vectors: &[CVector]) -> Result<Self> {
        orthonormalize(ambient, vectors, DEFAULT_RANK_TOL)
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(ambient: &HilbertSpace, indices: &[usize]) -> Result<Self> {
        let vs: Vec<CVector> = indices
            .iter()
            .map(|&i| {
                if i >= ambient.dim() {
                    Err(Error::DimensionMismatch { expected: ambient.dim(), found: i + 1 })
                } else {
                    Ok(ambient.basis_vector(i))
                }
            })
            .collect::<Result<_>>()?;
        Self::span(ambient, &vs)
    }

    /// Wraps a basis that is already orthonormal, checking it to within `tol`.
    pub fn from_orthonormal(ambient: &HilbertSpace, basis: CMatrix, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidTolerance(tol));
        }
        if basis.nrows() != ambient.dim() {
            return Err(Error::DimensionMismatch { expected: ambient.dim(), found: basis.nrows() });
        }
        let r = basis.ncols();
        let dev = op_norm(&(basis.adjoint() * &basis - CMatrix::identity(r, r)));
        // Orthonormality is checked against the larger of the rank tolerance
        // and a round-off floor.
        if dev > tol.max(1e-10) {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
        Ok(Self { ambient: ambient.clone(), basis, tol })
    }

    pub fn ambient(&self) -> &HilbertSpace {
        &self.ambient
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient.dim()
    }

    /// Orthogonal projector `B·Bᴴ`.
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    pub fn projector_operator(&self) -> Operator {
        Operator { ambient: self.ambient.clone(), matrix: self.projector() }
    }

    /// Operator-norm distance between the two projectors.
    ///
    /// Projectors of different rank are at distance exactly 1; for equal rank
    /// the distance is the sine of the largest principal angle, ‖(I − P_B)·A‖.
    pub fn distance(&self, other: &Subspace) -> Result<f64> {
        self.ambient.check_compatible(&other.ambient)?;
        if self.dim() != other.dim() {
            return Ok(1.0);
        }
        Ok(self.residual_outside(other).min(1.0))
    }

    /// Equality up to [`EQUALITY_TOL`] in projector distance.
    pub fn same_as(&self, other: &Subspace) -> Result<bool> {
        if self.dim() != other.dim() {
            self.ambient.check_compatible(&other.ambient)?;
            return Ok(false);
        }
        Ok(self.distance(other)? <= EQUALITY_TOL)
    }

    /// Intersection `A ∩ B`.
    ///
    /// Computed inside `A`'s coordinates as the kernel of `I − AᴴP_BA`, the
    /// compression of `(I − P_A) + (I − P_B)` to `A`.
    pub fn meet(&self, other: &Subspace) -> Result<Subspace> {
        self.ambient.check_compatible(&other.ambient)?;
        let tol = self.tol.max(other.tol);
        if self.is_zero() || other.is_zero() {
            return Ok(Subspace { tol, ..Subspace::zero(&self.ambient) });
        }
        let overlap = self.basis.adjoint() * &other.basis;
        let r = self.dim();
        let defect = CMatrix::identity(r, r) - &overlap * overlap.adjoint();
        let (vals, vecs) = hermitian_eigen(&defect);
        let kept: Vec<CVector> = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v <= tol)
            .map(|(i, _)| &self.basis * vecs.column(i))
            .collect();
        orthonormalize(&self.ambient, &kept, tol)
    }

    /// Closed span `A ∨ B` of the union of the two bases.
    pub fn join(&self, other: &Subspace) -> Result<Subspace> {
        self.ambient.check_compatible(&other.ambient)?;
        let cols: Vec<CVector> = self
            .basis
            .column_iter()
            .chain(other.basis.column_iter())
            .map(|c| c.into_owned())
            .collect();
        orthonormalize(&self.ambient, &cols, self.tol.max(other.tol))
    }

    /// Orthocomplement `A^⊥`.
    ///
    /// The basis is the trailing `n − r` columns of the Householder `Q` factor
    /// of the basis of `A`.
    pub fn ortho(&self) -> Subspace {
        let n = self.ambient.dim();
        let r = self.dim();
        if r == 0 {
            return Subspace { tol: self.tol, ..Subspace::full(&self.ambient) };
        }
        if r == n {
            return Subspace { tol: self.tol, ..Subspace::zero(&self.ambient) };
        }
        let reflectors = householder_reflectors(&self.basis);
        let mut basis = CMatrix::zeros(n, n - r);
        for (c, j) in (r..n).enumerate() {
            let mut v = self.ambient.basis_vector(j);
            for (i, w) in reflectors.iter().enumerate().rev() {
                apply_reflector(w, i, &mut v);
            }
            basis.set_column(c, &v);
        }
        Subspace { ambient: self.ambient.clone(), basis, tol: self.tol }
    }

    /// Inclusion `A ⊆ B`, i.e. `P_B·P_A = P_A` within [`EQUALITY_TOL`].
    pub fn leq(&self, other: &Subspace) -> Result<bool> {
        self.ambient.check_compatible(&other.ambient)?;
        if self.is_zero() {
            return Ok(true);
        }
        if self.dim() > other.dim() {
            return Ok(false);
        }
        Ok(self.residual_outside(other) <= EQUALITY_TOL)
    }

    /// ‖(I − P_other)·B_self‖, the part of `self` sticking out of `other`.
    pub fn residual_outside(&self, other: &Subspace) -> f64 {
        let inside = &other.basis * (other.basis.adjoint() * &self.basis);
        op_norm(&(&self.basis - inside))
    }

    /// Largest overlap ‖B_selfᴴ·B_other‖; zero iff the subspaces are orthogonal.
    pub fn overlap(&self, other: &Subspace) -> Result<f64> {
        self.ambient.check_compatible(&other.ambient)?;
        Ok(op_norm(&(self.basis.adjoint() * &other.basis)))
    }

    /// Embeds this subspace into a larger ambient space at coordinate `offset`.
    pub fn embed(&self, ambient: &HilbertSpace, offset: usize) -> Result<Subspace> {
        if offset + self.ambient.dim() > ambient.dim() {
            return Err(Error::DimensionMismatch {
                expected: ambient.dim(),
                found: offset + self.ambient.dim(),
            });
        }
        let mut basis = CMatrix::zeros(ambient.dim(), self.dim());
        basis
            .view_mut((offset, 0), (self.ambient.dim(), self.dim()))
            .copy_from(&self.basis);
        Ok(Subspace { ambient: ambient.clone(), basis, tol: self.tol })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SubspaceDoc::from(self.clone()))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Householder vectors `w_i` (unit norm, supported on rows `i..`) such that
/// `H_r⋯H_1·A` is upper triangular, with `H_i = I − 2·w_i·w_iᴴ`.
fn householder_reflectors(a: &CMatrix) -> Vec<CVector> {
    let (n, r) = a.shape();
    let mut work = a.clone();
    let mut out = Vec::with_capacity(r);
    for i in 0..r {
        let x: CVector = work.view((i, i), (n - i, 1)).column(0).into_owned();
        let alpha = x.norm();
        let mut w = CVector::zeros(n);
        if alpha > 0.0 {
            let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
            let mut v = x;
            v[0] += phase * alpha;
            let vn = v.norm();
            w.rows_mut(i, n - i).copy_from(&v.unscale(vn));
        }
        for c in i..r {
            let mut col: CVector = work.column(c).into_owned();
            apply_reflector(&w, i, &mut col);
            work.set_column(c, &col);
        }
        out.push(w);
    }
    out
}

fn apply_reflector(w: &CVector, start: usize, v: &mut CVector) {
    let n = v.len();
    let ws = w.rows(start, n - start);
    let dot = ws.dotc(&v.rows(start, n - start));
    if dot.norm() == 0.0 {
        return;
    }
    let mut tail = v.rows_mut(start, n - start);
    tail.axpy(-2.0 * dot, &ws, C64::new(1.0, 0.0));
}

/// JSON form of a [`Subspace`]. The basis is a `dim × r` row-major matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubspaceDoc {
    pub dim: usize,
    pub basis_real: Vec<Vec<f64>>,
    pub basis_imag: Vec<Vec<f64>>,
    pub tol: f64,
}

impl From<Subspace> for SubspaceDoc {
    fn from(s: Subspace) -> Self {
        let (basis_real, basis_imag) = linalg::to_rows(&s.basis);
        Self { dim: s.ambient.dim(), basis_real, basis_imag, tol: s.tol }
    }
}

impl TryFrom<SubspaceDoc> for Subspace {
    type Error = Error;

    fn try_from(doc: SubspaceDoc) -> Result<Self> {
        let ambient = HilbertSpace::complex(doc.dim)?;
        let cols = doc.basis_real.first().map_or(0, Vec::len);
        let basis = linalg::from_rows(&doc.basis_real, &doc.basis_imag, doc.dim, cols)?;
        Subspace::from_orthonormal(&ambient, basis, doc.tol)
    }
}
