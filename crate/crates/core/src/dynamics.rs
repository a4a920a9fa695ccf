//! Target and Floquet unitaries, state evolution, spectral decompositions
//! and eigenbasis-comparison diagnostics.

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, HermitianSpectrum, C64};
use crate::spin::{hamiltonian_terms, target_hamiltonian, CollectiveOperators, ModelParams, StateVector};

/// A `d × d` unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator(CMatrix);

impl UnitaryOperator {
    /// Wrap `m`, rejecting it if `‖U†U − I‖_max ≥ 1e-10`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let residual = linalg::unitarity_residual(&m);
        if !(residual < 1.0e-10) {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(d: usize) -> Self {
        Self(CMatrix::identity(d, d))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn unitarity_residual(&self) -> f64 {
        linalg::unitarity_residual(&self.0)
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self · other`
    pub fn compose(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    /// `U^n` by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Self {
        let d = self.dim();
        let mut result = CMatrix::identity(d, d);
        let mut base = self.0.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        Self(result)
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        StateVector::from_normalized(&self.0 * state.amplitudes())
    }
}

/// `exp(i · scale · H)` via Hermitian eigendecomposition.
pub fn exp_hermitian(h: &CMatrix, scale: f64) -> Result<UnitaryOperator> {
    let spectrum = HermitianSpectrum::new(h)?;
    Ok(UnitaryOperator::new_unchecked(spectrum.exp_i(scale)))
}

/// `U_tar(t) = exp(−i H(s) t)`.
pub fn target_unitary(params: &ModelParams, ops: &CollectiveOperators, t: f64) -> Result<UnitaryOperator> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("evolution time must be finite and >= 0, got {t}")));
    }
    exp_hermitian(&target_hamiltonian(params, ops), -t)
}

/// One-period Floquet operator of the kicked model,
/// `U_δ(τ) = exp(i(1−s)τ Jz) · exp(i sτ/(p J^{p−1}) Jx^p)`.
pub fn floquet_operator(params: &ModelParams, ops: &CollectiveOperators) -> Result<UnitaryOperator> {
    FloquetFactory::new(ops, params.p)?.floquet(params.s, params.tau)
}

/// Caches the spectrum of `Jx^p` so that Floquet operators along a `(τ, s)`
/// sweep cost a single matrix product each.
#[derive(Debug, Clone)]
pub struct FloquetFactory<'a> {
    ops: &'a CollectiveOperators,
    p: u32,
    kick: HermitianSpectrum,
}

impl<'a> FloquetFactory<'a> {
    pub fn new(ops: &'a CollectiveOperators, p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParams(format!("interaction order p must be >= 2, got {p}")));
        }
        let kick = HermitianSpectrum::new(&ops.jx_power(p))?;
        Ok(Self { ops, p, kick })
    }

    pub fn ops(&self) -> &'a CollectiveOperators {
        self.ops
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `exp(i θ Jx^p)`.
    pub fn kick(&self, theta: f64) -> CMatrix {
        self.kick.exp_i(theta)
    }

    pub fn floquet(&self, s: f64, tau: f64) -> Result<UnitaryOperator> {
        let params = ModelParams::new(self.p, s, tau)?;
        let theta = params.s * params.tau / (self.p as f64 * self.ops.j().powi(self.p as i32 - 1));
        let kick = self.kick(theta);
        let rotation = self.ops.z_rotation((1.0 - s) * tau);
        // rotation is diagonal: scale rows instead of a dense product
        let mut u = kick;
        for i in 0..u.nrows() {
            let phase = rotation[(i, i)];
            for z in u.row_mut(i).iter_mut() {
                *z *= phase;
            }
        }
        Ok(UnitaryOperator::new_unchecked(u))
    }
}

/// States after `1 ..= n` applications of `u`.
pub fn evolve(state: &StateVector, u: &UnitaryOperator, n: usize) -> Vec<StateVector> {
    let mut out = Vec::with_capacity(n);
    let mut current = state.clone();
    for _ in 0..n {
        current = u.apply(&current);
        out.push(current.clone());
    }
    out
}

/// Anything exposing an orthonormal eigenbasis as matrix columns.
pub trait Eigenbasis {
    fn eigenvectors(&self) -> &CMatrix;

    /// Smallest separation between eigenvalues (phases are compared on the
    /// circle).
    fn min_spacing(&self) -> f64;
}

impl Eigenbasis for HermitianSpectrum {
    fn eigenvectors(&self) -> &CMatrix {
        HermitianSpectrum::eigenvectors(self)
    }

    fn min_spacing(&self) -> f64 {
        HermitianSpectrum::min_spacing(self)
    }
}

/// Eigenphases in `(−π, π]` (ascending) with orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenphases: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenphases.len()
    }

    /// `V · diag(e^{iφ}) · V†`
    pub fn reconstruct(&self) -> CMatrix {
        let mut weighted = self.eigenvectors.clone();
        for (j, &phi) in self.eigenphases.iter().enumerate() {
            let phase = C64::from_polar(1.0, phi);
            for z in weighted.column_mut(j).iter_mut() {
                *z *= phase;
            }
        }
        &weighted * self.eigenvectors.adjoint()
    }
}

impl Eigenbasis for SpectralDecomposition {
    fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    fn min_spacing(&self) -> f64 {
        use std::f64::consts::TAU;
        let phases = &self.eigenphases;
        if phases.len() < 2 {
            return f64::INFINITY;
        }
        let inner = phases.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let wrap = phases[0] + TAU - phases[phases.len() - 1];
        inner.min(wrap)
    }
}

pub fn spectral_decompose(u: &UnitaryOperator) -> Result<SpectralDecomposition> {
    let (eigenphases, eigenvectors) = linalg::unitary_eigen(u.matrix())?;
    Ok(SpectralDecomposition { eigenphases, eigenvectors })
}

/// `(1/d) Σ_{i,j} |⟨a_i|b_j⟩|⁴`.
pub fn average_ipr(a: &impl Eigenbasis, b: &impl Eigenbasis) -> Result<f64> {
    let (va, vb) = (a.eigenvectors(), b.eigenvectors());
    if va.nrows() != vb.nrows() {
        return Err(Error::DimensionMismatch { expected: va.nrows(), found: vb.nrows() });
    }
    let overlaps = va.adjoint() * vb;
    let sum: f64 = overlaps.iter().map(|z| z.norm_sqr().powi(2)).sum();
    Ok(sum / va.nrows() as f64)
}

/// Average IPR of the circular orthogonal ensemble, `3 / (N + 3)`.
pub fn coe_ipr(n: usize) -> f64 {
    3.0 / (n as f64 + 3.0)
}

/// `(1 − IPR) / (1 − IPR_COE)` between two eigenbases of dimension `N + 1`.
pub fn dissimilarity_of_bases(target: &impl Eigenbasis, floquet: &impl Eigenbasis, n: usize) -> Result<f64> {
    let d = target.eigenvectors().nrows();
    if d != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, found: d });
    }
    let ipr = average_ipr(target, floquet)?;
    Ok((1.0 - ipr) / (1.0 - coe_ipr(n)))
}

/// Dissimilarity between the eigenbases of two unitaries.
pub fn dissimilarity(u_tar: &UnitaryOperator, u_delta: &UnitaryOperator, n: usize) -> Result<f64> {
    if u_tar.dim() != u_delta.dim() {
        return Err(Error::DimensionMismatch { expected: u_tar.dim(), found: u_delta.dim() });
    }
    let a = spectral_decompose(u_tar)?;
    let b = spectral_decompose(u_delta)?;
    dissimilarity_of_bases(&a, &b, n)
}

/// `(t² / 2n) ‖[H₁, H₂]‖₂`.
pub fn trotter_error_bound(params: &ModelParams, ops: &CollectiveOperators, t: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("number of Trotter steps must be >= 1".into()));
    }
    let (h1, h2) = hamiltonian_terms(params, ops);
    // [H₁, H₂] is anti-Hermitian; i[H₁, H₂] is Hermitian with the same norm.
    let ic = linalg::commutator(&h1, &h2) * c64(0.0, 1.0);
    let spectrum = HermitianSpectrum::new(&ic)?;
    let norm = spectrum.eigenvalues().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    Ok(t * t / (2.0 * n as f64) * norm)
}

/// Measured `‖U_δ(t/n)^n − U_tar(t)‖₂`.
pub fn trotter_error(params: &ModelParams, ops: &CollectiveOperators, t: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("number of Trotter steps must be >= 1".into()));
    }
    let step = params.with_tau(t / n as f64)?;
    let trot = floquet_operator(&step, ops)?.pow(n);
    let tar = target_unitary(params, ops, t)?;
    Ok(linalg::spectral_norm(&(trot.matrix() - tar.matrix())))
}
