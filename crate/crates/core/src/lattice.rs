//! Lattice-law checks on families of subspaces.
//!
//! Every check compares subspaces with [`Subspace::distance`] and the single
//! equality tolerance [`EQUALITY_TOL`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subspace::{Subspace, EQUALITY_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    Distributive,
    Orthomodular,
}

/// Outcome of comparing the two sides of a lattice law.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LawReport {
    pub law: LawKind,
    pub holds: bool,
    pub lhs: Subspace,
    pub rhs: Subspace,
    /// Projector-norm distance between `lhs` and `rhs`.
    pub defect: f64,
    pub inputs: Vec<Subspace>,
}

impl LawReport {
    fn new(law: LawKind, lhs: Subspace, rhs: Subspace, inputs: Vec<Subspace>) -> Result<Self> {
        let defect = lhs.distance(&rhs)?;
        Ok(Self { law, holds: defect <= EQUALITY_TOL, lhs, rhs, defect, inputs })
    }
}

/// Compares `X ∩ (Y ∨ Z)` with `(X ∩ Y) ∨ (X ∩ Z)`.
pub fn check_distributive(x: &Subspace, y: &Subspace, z: &Subspace) -> Result<LawReport> {
    let lhs = x.meet(&y.join(z)?)?;
    let rhs = x.meet(y)?.join(&x.meet(z)?)?;
    LawReport::new(LawKind::Distributive, lhs, rhs, vec![x.clone(), y.clone(), z.clone()])
}

/// Compares `X` with `(X ∩ Z^⊥) ∨ Z` for `Z ⊆ X`.
///
/// Returns [`Error::LawNotApplicable`] when `Z` is not contained in `X`.
pub fn check_orthomodular(x: &Subspace, z: &Subspace) -> Result<LawReport> {
    if !z.leq(x)? {
        return Err(Error::LawNotApplicable(format!(
            "Z is not contained in X (residual {:.3e})",
            z.residual_outside(x)
        )));
    }
    let rhs = x.meet(&z.ortho())?.join(z)?;
    LawReport::new(LawKind::Orthomodular, x.clone(), rhs, vec![x.clone(), z.clone()])
}

/// `{meet, left, right, join}` for an incomparable pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiamondWitness {
    pub bottom: Subspace,
    pub left: Subspace,
    pub right: Subspace,
    pub top: Subspace,
    /// Positions of `left` and `right` in the searched family.
    pub indices: (usize, usize),
}

/// Exhaustive pair search for two incomparable members of `family`.
///
/// Returns the first pair in lexicographic index order, or `None` when the
/// family is a chain.
pub fn find_diamond(family: &[Subspace]) -> Result<Option<DiamondWitness>> {
    let first = family
        .first()
        .ok_or_else(|| Error::Malformed("diamond search needs a nonempty family".into()))?;
    for s in family {
        if s.ambient().dim() != first.ambient().dim() {
            return Err(Error::AmbientMismatch { left: first.ambient().dim(), right: s.ambient().dim() });
        }
    }
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let (a, b) = (&family[i], &family[j]);
            if a.leq(b)? || b.leq(a)? {
                continue;
            }
            return Ok(Some(DiamondWitness {
                bottom: a.meet(b)?,
                left: a.clone(),
                right: b.clone(),
                top: a.join(b)?,
                indices: (i, j),
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Orthogonality,
    DirectSum,
    Orthomodular,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Component indices involved; the orthomodular case lists `Z` first.
    pub indices: Vec<usize>,
    pub defect: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct OrthoalgebraReport {
    pub components: usize,
    pub orthogonality_checks: usize,
    pub direct_sum_checks: usize,
    pub orthomodular_checks: usize,
    pub violations: Vec<Violation>,
}

impl OrthoalgebraReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Checks the orthoalgebra structure of a family of components.
///
/// * every pair is orthogonal, defect `‖B_iᴴ·B_j‖`;
/// * every pairwise join, and the join of the whole family, has dimension
///   equal to the sum of its parts;
/// * the orthomodular law holds for each component `Z` inside each pairwise
///   join containing it and inside the join of the whole family.
///
/// Violations are reported, never raised; only an ambient mismatch errors.
pub fn verify_orthoalgebra(components: &[Subspace]) -> Result<OrthoalgebraReport> {
    let mut report = OrthoalgebraReport { components: components.len(), ..Default::default() };
    let Some(first) = components.first() else {
        return Ok(report);
    };
    for s in components {
        if s.ambient().dim() != first.ambient().dim() {
            return Err(Error::AmbientMismatch { left: first.ambient().dim(), right: s.ambient().dim() });
        }
    }

    let n = components.len();
    let mut pair_joins = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&components[i], &components[j]);
            report.orthogonality_checks += 1;
            let overlap = a.overlap(b)?;
            if overlap > EQUALITY_TOL {
                report.violations.push(Violation {
                    kind: ViolationKind::Orthogonality,
                    indices: vec![i, j],
                    defect: overlap,
                });
            }
            let joined = a.join(b)?;
            report.direct_sum_checks += 1;
            if joined.dim() != a.dim() + b.dim() {
                report.violations.push(Violation {
                    kind: ViolationKind::DirectSum,
                    indices: vec![i, j],
                    defect: (a.dim() + b.dim()).abs_diff(joined.dim()) as f64,
                });
            }
            pair_joins.push(((i, j), joined));
        }
    }

    let mut total = first.clone();
    for s in &components[1..] {
        total = total.join(s)?;
    }
    let dim_sum: usize = components.iter().map(Subspace::dim).sum();
    report.direct_sum_checks += 1;
    if total.dim() != dim_sum {
        report.violations.push(Violation {
            kind: ViolationKind::DirectSum,
            indices: (0..n).collect(),
            defect: dim_sum.abs_diff(total.dim()) as f64,
        });
    }

    let mut orthomodular = |z_idx: usize, x: &Subspace, mut indices: Vec<usize>| -> Result<()> {
        report.orthomodular_checks += 1;
        let defect = match check_orthomodular(x, &components[z_idx]) {
            Ok(law) if law.holds => return Ok(()),
            Ok(law) => law.defect,
            // Z outside its own join only happens when the join lost rank.
            Err(Error::LawNotApplicable(_)) => components[z_idx].residual_outside(x),
            Err(e) => return Err(e),
        };
        indices.insert(0, z_idx);
        report.violations.push(Violation { kind: ViolationKind::Orthomodular, indices, defect });
        Ok(())
    };
    for ((i, j), joined) in &pair_joins {
        orthomodular(*i, joined, vec![*i, *j])?;
        orthomodular(*j, joined, vec![*i, *j])?;
    }
    for z in 0..n {
        orthomodular(z, &total, (0..n).collect())?;
    }
    Ok(report)
}
