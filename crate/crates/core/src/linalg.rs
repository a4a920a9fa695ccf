//! Dense complex linear algebra shared by the quantum modules.
//!
//! Every operator in this crate lives in the symmetric subspace of dimension
//! `N + 1`, so all matrices are stored dense. Two structural facts are used
//! throughout:
//!
//! * matrices built from `Jz`, `Jx^p` and their exponentials are often block
//!   diagonal up to a permutation (parity sectors for even `p`, singletons for
//!   diagonal operators). Eigensolvers work block by block, which keeps exact
//!   zeros exact and prevents spurious mixing of symmetry sectors.
//! * unitaries are normal, so their eigenvectors can be obtained from the two
//!   commuting Hermitian parts `(U + U†)/2` and `(U - U†)/2i`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const EIGEN_EPS: f64 = 1.0e-15;
const EIGEN_MAX_ITER: usize = 100_000;

/// Eigenvalues of the Hermitian part closer than this are refined together.
const CLUSTER_TOL: f64 = 1.0e-7;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let d = m.nrows();
    max_abs(&(m.adjoint() * m - CMatrix::identity(d, d)))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Spectral (operator 2-) norm, the largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Index sets of the connected components of the nonzero pattern of `m`.
///
/// Two indices are connected when `m[(i, j)]` or `m[(j, i)]` is nonzero.
/// Components are returned sorted by their smallest index, each sorted
/// ascending.
pub fn block_partition(m: &CMatrix) -> Vec<Vec<usize>> {
    let d = m.nrows();
    let mut parent: Vec<usize> = (0..d).collect();

    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    for j in 0..d {
        for i in 0..d {
            if i != j && m[(i, j)] != C64::new(0.0, 0.0) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                    parent[hi] = lo;
                }
            }
        }
    }

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; d];
    for i in 0..d {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[root]].push(i);
    }
    blocks
}

fn submatrix(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

fn hermitian_eigen_dense(h: CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if h.nrows() == 1 {
        return Ok((vec![h[(0, 0)].re], CMatrix::identity(1, 1)));
    }
    let eig = SymmetricEigen::try_new(h, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenNoConvergence)?;
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNoConvergence);
    }
    Ok((values, eig.eigenvectors))
}

/// Sort eigenpairs by key, applying the permutation to the columns.
fn sort_pairs(values: Vec<f64>, vectors: CMatrix) -> (Vec<f64>, CMatrix) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| vectors[(i, order[j])]);
    (sorted_values, sorted_vectors)
}

/// Eigendecomposition `H = V diag(λ) V†` of a Hermitian matrix, eigenvalues
/// ascending.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl HermitianSpectrum {
    /// Diagonalize `h`, which must be Hermitian to `1e-10` relative to its
    /// largest entry.
    pub fn new(h: &CMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
        }
        let scale = max_abs(h).max(1.0);
        let residual = hermiticity_residual(h);
        if residual > 1.0e-10 * scale {
            return Err(Error::NotHermitian { residual });
        }
        let h = (h + h.adjoint()) * c64(0.5, 0.0);
        let d = h.nrows();
        let mut values = Vec::with_capacity(d);
        let mut vectors = CMatrix::zeros(d, d);
        let mut col = 0;
        for block in block_partition(&h) {
            let (vals, vecs) = hermitian_eigen_dense(submatrix(&h, &block))?;
            for (k, v) in vals.into_iter().enumerate() {
                values.push(v);
                for (a, &row) in block.iter().enumerate() {
                    vectors[(row, col)] = vecs[(a, k)];
                }
                col += 1;
            }
        }
        let (eigenvalues, eigenvectors) = sort_pairs(values, vectors);
        Ok(Self { eigenvalues, eigenvectors })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `exp(i * scale * H)`.
    pub fn exp_i(&self, scale: f64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut weighted = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let phase = C64::from_polar(1.0, scale * lambda);
            for z in weighted.column_mut(j).iter_mut() {
                *z *= phase;
            }
        }
        &weighted * v.adjoint()
    }

    /// Smallest gap between consecutive eigenvalues (`inf` for `d = 1`).
    pub fn min_spacing(&self) -> f64 {
        self.eigenvalues.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// Principal branch in `(-π, π]`.
pub fn principal_phase(phi: f64) -> f64 {
    use std::f64::consts::PI;
    let mut x = phi.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Eigendecomposition of a unitary matrix: `(phases, vectors)` with phases
/// in `(-π, π]` sorted ascending and orthonormal eigenvector columns.
pub fn unitary_eigen(u: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let d = u.nrows();
    let mut phases = Vec::with_capacity(d);
    let mut vectors = CMatrix::zeros(d, d);
    let mut col = 0;
    for block in block_partition(u) {
        let sub = submatrix(u, &block);
        let (ph, vecs) = unitary_eigen_block(&sub)?;
        for (k, phi) in ph.into_iter().enumerate() {
            phases.push(phi);
            for (a, &row) in block.iter().enumerate() {
                vectors[(row, col)] = vecs[(a, k)];
            }
            col += 1;
        }
    }
    Ok(sort_pairs(phases, vectors))
}

fn unitary_eigen_block(u: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let k = u.nrows();
    if k == 1 {
        return Ok((vec![principal_phase(u[(0, 0)].arg())], CMatrix::identity(1, 1)));
    }
    let half = c64(0.5, 0.0);
    let cos_part = (u + u.adjoint()) * half;
    let sin_part = (u - u.adjoint()) * c64(0.0, -0.5);

    let (values, vectors) = hermitian_eigen_dense(cos_part)?;
    let (values, mut vectors) = sort_pairs(values, vectors);

    // Eigenvalues of the cosine part are two-fold ambiguous (φ and -φ share
    // cos φ); split each near-degenerate cluster with the sine part.
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && values[end] - values[end - 1] < CLUSTER_TOL {
            end += 1;
        }
        if end - start > 1 {
            let q = vectors.columns(start, end - start).into_owned();
            let projected = q.adjoint() * &sin_part * &q;
            let projected = (&projected + projected.adjoint()) * half;
            let (_, w) = hermitian_eigen_dense(projected)?;
            let rotated = &q * w;
            vectors.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }

    let phases = (0..k)
        .map(|j| {
            let v = vectors.column(j);
            let uv = u * v;
            principal_phase(v.dotc(&uv).arg())
        })
        .collect();
    Ok((phases, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn block_partition_finds_parity_sectors() {
        let mut m = CMatrix::zeros(5, 5);
        for i in 0..3 {
            m[(i, i + 2)] = c64(1.0, 0.0);
            m[(i + 2, i)] = c64(1.0, 0.0);
        }
        let blocks = block_partition(&m);
        assert_eq!(blocks, vec![vec![0, 2, 4], vec![1, 3]]);
    }

    #[test]
    fn principal_phase_maps_minus_pi_to_pi() {
        assert_eq!(principal_phase(-PI), PI);
        assert!((principal_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((principal_phase(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unitary_eigen_resolves_conjugate_pairs() {
        // diag(e^{iθ}, e^{-iθ}) rotated into a generic basis: the cosine
        // part is exactly degenerate and only the sine part separates them.
        let theta = 0.8;
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::from_polar(1.0, theta),
            C64::from_polar(1.0, -theta),
        ]));
        let s = 1.0 / 2f64.sqrt();
        let q = CMatrix::from_row_slice(2, 2, &[c64(s, 0.0), c64(0.0, s), c64(0.0, s), c64(s, 0.0)]);
        let u = &q * d * q.adjoint();
        let (phases, v) = unitary_eigen(&u).unwrap();
        assert!((phases[0] + theta).abs() < 1e-12);
        assert!((phases[1] - theta).abs() < 1e-12);
        let rebuilt = &v * CMatrix::from_diagonal(&CVector::from_iterator(2, phases.iter().map(|&p| C64::from_polar(1.0, p)))) * v.adjoint();
        assert!(max_abs(&(rebuilt - u)) < 1e-12);
    }

    #[test]
    fn hermitian_spectrum_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        assert!(matches!(HermitianSpectrum::new(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(0.5, 0.0), c64(0.0, -3.0)]));
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-12);
    }
}
