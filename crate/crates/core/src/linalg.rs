//! Small dense linear-algebra helpers shared by the lattice and quantization code.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Eigenvector columns are reordered to match. Only the Hermitian part of the
/// input is used.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Spectral (operator 2-) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    // ‖M‖₂² is the top eigenvalue of the smaller Gram matrix.
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    let (vals, _) = hermitian_eigen(&gram);
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Spectral norm of a matrix known to be Hermitian (max |eigenvalue|).
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    let (vals, _) = hermitian_eigen(m);
    vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Largest elementwise deviation from Hermiticity, max |m_ij − conj(m_ji)|.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Splits a matrix into row-major real and imaginary parts.
pub fn to_rows(m: &CMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].re).collect())
        .collect();
    let im = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].im).collect())
        .collect();
    (re, im)
}

/// Inverse of [`to_rows`]; `cols` is needed when there are zero columns.
pub fn from_rows(re: &[Vec<f64>], im: &[Vec<f64>], rows: usize, cols: usize) -> Result<CMatrix> {
    if re.len() != rows || im.len() != rows {
        return Err(Error::Malformed(format!(
            "expected {rows} rows, found {} real / {} imaginary",
            re.len(),
            im.len()
        )));
    }
    for (r, (a, b)) in re.iter().zip(im).enumerate() {
        if a.len() != cols || b.len() != cols {
            return Err(Error::Malformed(format!(
                "row {r}: expected {cols} entries, found {} real / {} imaginary",
                a.len(),
                b.len()
            )));
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| C64::new(re[r][c], im[r][c])))
}
