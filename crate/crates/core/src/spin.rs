//! Symmetric-subspace representation of `N` spin-1/2 particles.
//!
//! Basis index `k = 0 ..= N` labels the Dicke state `|J, m_z = -J + k⟩`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, CVector, C64};

/// Maximal-spin sector `J = N/2` of `N` spin-1/2 particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinSector {
    n: usize,
}

impl SpinSector {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSector("N must be at least 1".into()));
        }
        Ok(Self { n })
    }

    /// Number of spin-1/2 particles.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total spin `J = N/2`.
    pub fn j(&self) -> f64 {
        self.n as f64 / 2.0
    }

    /// Hilbert-space dimension `N + 1`.
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// `m_z` eigenvalue of basis index `k`.
    pub fn m_z(&self, k: usize) -> f64 {
        k as f64 - self.j()
    }
}

impl TryFrom<f64> for SpinSector {
    type Error = Error;

    fn try_from(n: f64) -> Result<Self> {
        if !n.is_finite() || n.fract() != 0.0 || n < 1.0 {
            return Err(Error::InvalidSector(format!("N must be a positive integer, got {n}")));
        }
        Self::new(n as usize)
    }
}

/// Dense tridiagonal operator with zero diagonal, as produced by
/// `Jx cos φ + Jy sin φ`. Used to form integer powers without dense
/// matrix-matrix products.
#[derive(Debug, Clone)]
struct ZeroDiagTridiagonal {
    /// `lower[k] = T[(k + 1, k)]`
    lower: Vec<C64>,
    /// `upper[k] = T[(k, k + 1)]`
    upper: Vec<C64>,
}

impl ZeroDiagTridiagonal {
    /// `self * m`
    fn left_mul(&self, m: &CMatrix) -> CMatrix {
        let d = m.nrows();
        let mut out = CMatrix::zeros(d, m.ncols());
        for j in 0..m.ncols() {
            for i in 0..d {
                let mut acc = c64(0.0, 0.0);
                if i > 0 {
                    acc += self.lower[i - 1] * m[(i - 1, j)];
                }
                if i + 1 < d {
                    acc += self.upper[i] * m[(i + 1, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    fn power(&self, p: u32) -> CMatrix {
        let d = self.lower.len() + 1;
        let mut acc = CMatrix::identity(d, d);
        for _ in 0..p {
            acc = self.left_mul(&acc);
        }
        acc
    }
}

/// Collective spin operators `Jx`, `Jy`, `Jz` of a sector.
#[derive(Debug, Clone)]
pub struct CollectiveOperators {
    sector: SpinSector,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
    /// Raising-operator coefficients `⟨k+1|J+|k⟩`.
    ladder: Vec<f64>,
}

/// Builds `Jx`, `Jy`, `Jz` from the ladder coefficients
/// `⟨m+1|J+|m⟩ = √(J(J+1) − m(m+1))`.
pub fn build_collective_operators(sector: SpinSector) -> CollectiveOperators {
    let d = sector.dim();
    let j = sector.j();
    let ladder: Vec<f64> = (0..d - 1)
        .map(|k| {
            let m = sector.m_z(k);
            (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
        })
        .collect();

    let mut jx = CMatrix::zeros(d, d);
    let mut jy = CMatrix::zeros(d, d);
    let mut jz = CMatrix::zeros(d, d);
    for k in 0..d {
        jz[(k, k)] = c64(sector.m_z(k), 0.0);
    }
    for (k, &c) in ladder.iter().enumerate() {
        jx[(k + 1, k)] = c64(c / 2.0, 0.0);
        jx[(k, k + 1)] = c64(c / 2.0, 0.0);
        jy[(k + 1, k)] = c64(0.0, -c / 2.0);
        jy[(k, k + 1)] = c64(0.0, c / 2.0);
    }
    CollectiveOperators { sector, jx, jy, jz, ladder }
}

impl CollectiveOperators {
    pub fn new(sector: SpinSector) -> Self {
        build_collective_operators(sector)
    }

    pub fn sector(&self) -> SpinSector {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    pub fn j(&self) -> f64 {
        self.sector.j()
    }

    fn rotated(&self, phi: f64) -> ZeroDiagTridiagonal {
        let down = C64::from_polar(0.5, -phi);
        let up = C64::from_polar(0.5, phi);
        ZeroDiagTridiagonal {
            lower: self.ladder.iter().map(|&c| down * c).collect(),
            upper: self.ladder.iter().map(|&c| up * c).collect(),
        }
    }

    /// `Jx^p`, formed by repeated multiplication with the tridiagonal `Jx`.
    pub fn jx_power(&self, p: u32) -> CMatrix {
        self.rotated(0.0).power(p)
    }

    /// `(Jx cos φ + Jy sin φ)^p`.
    pub fn rotated_power(&self, phi: f64, p: u32) -> CMatrix {
        self.rotated(phi).power(p)
    }

    /// Parity operator `Π = exp(iπ Jz)`.
    pub fn parity(&self) -> CMatrix {
        self.z_rotation(PI)
    }

    /// `exp(iθ Jz)`, diagonal in the Dicke basis.
    pub fn z_rotation(&self, theta: f64) -> CMatrix {
        let d = self.dim();
        CMatrix::from_diagonal(&CVector::from_iterator(
            d,
            (0..d).map(|k| C64::from_polar(1.0, theta * self.sector.m_z(k))),
        ))
    }

    /// Casimir residual `‖Jx² + Jy² + Jz² − J(J+1)‖_max`.
    pub fn casimir_residual(&self) -> f64 {
        let d = self.dim();
        let j = self.j();
        let c = &self.jx * &self.jx + &self.jy * &self.jy + &self.jz * &self.jz;
        crate::linalg::max_abs(&(c - CMatrix::identity(d, d) * c64(j * (j + 1.0), 0.0)))
    }
}

/// Parameters `(p, s, τ)` of the target and kicked p-spin models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub p: u32,
    pub s: f64,
    pub tau: f64,
}

impl ModelParams {
    pub fn new(p: u32, s: f64, tau: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParams(format!("interaction order p must be >= 2, got {p}")));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParams(format!("s must lie in [0, 1], got {s}")));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParams(format!("tau must be positive and finite, got {tau}")));
        }
        Ok(Self { p, s, tau })
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(self.p, self.s, tau)
    }

    /// Rotation angle of the classical map, `α = −(1−s)τ`.
    pub fn alpha(&self) -> f64 {
        -(1.0 - self.s) * self.tau
    }

    /// Kick strength of the classical map, `k = −sτ`.
    pub fn kick(&self) -> f64 {
        -self.s * self.tau
    }

    /// Coefficient `s / (p J^{p-1})` multiplying `Jx^p` in `H(s)`.
    pub fn interaction_coefficient(&self, j: f64) -> f64 {
        self.s / (self.p as f64 * j.powi(self.p as i32 - 1))
    }
}

/// `H(s) = −(1−s) Jz − s/(p J^{p−1}) Jx^p`.
pub fn target_hamiltonian(params: &ModelParams, ops: &CollectiveOperators) -> CMatrix {
    let (field, interaction) = hamiltonian_terms(params, ops);
    field + interaction
}

/// The two Trotter terms `(H₁, H₂) = (−(1−s) Jz, −s/(p J^{p−1}) Jx^p)`.
pub fn hamiltonian_terms(params: &ModelParams, ops: &CollectiveOperators) -> (CMatrix, CMatrix) {
    let h1 = &ops.jz * c64(-(1.0 - params.s), 0.0);
    let h2 = ops.jx_power(params.p) * c64(-params.interaction_coefficient(ops.j()), 0.0);
    (h1, h2)
}

/// Normalized state in the Dicke basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    /// Wrap and normalize a nonzero amplitude vector.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument("state vector must have finite nonzero norm".into()));
        }
        Ok(Self(amplitudes / c64(norm, 0.0)))
    }

    /// Dicke basis state `|−J + k⟩`.
    pub fn basis(sector: SpinSector, k: usize) -> Result<Self> {
        if k >= sector.dim() {
            return Err(Error::InvalidArgument(format!("basis index {k} out of range")));
        }
        let mut v = CVector::zeros(sector.dim());
        v[k] = c64(1.0, 0.0);
        Ok(Self(v))
    }

    pub(crate) fn from_normalized(v: CVector) -> Self {
        Self(v)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `Re ⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, a: &CMatrix) -> f64 {
        self.0.dotc(&(a * &self.0)).re
    }

    /// `⟨J⟩ / J`.
    pub fn bloch_vector(&self, ops: &CollectiveOperators) -> [f64; 3] {
        let j = ops.j();
        [self.expectation(&ops.jx) / j, self.expectation(&ops.jy) / j, self.expectation(&ops.jz) / j]
    }

    /// Density-matrix element `ρ_{a,b} = ψ_a ψ_b*`.
    pub fn density_element(&self, a: usize, b: usize) -> C64 {
        self.0[a] * self.0[b].conj()
    }
}

/// Spin coherent state `exp(−iΦ Jz) exp(−iΘ Jy) |J, m = J⟩`, whose Bloch
/// vector is `(sin Θ cos Φ, sin Θ sin Φ, cos Θ)`.
pub fn spin_coherent_state(sector: SpinSector, theta: f64, phi: f64) -> Result<StateVector> {
    if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
        return Err(Error::InvalidArgument(format!("coherent-state angles out of range: theta={theta}, phi={phi}")));
    }
    let n = sector.n();
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    // log of base^e with 0^0 = 1
    let log_pow = |base: f64, e: usize| if e == 0 { 0.0 } else { e as f64 * base.abs().ln() };
    let mut log_binom = 0.0_f64;
    let mut amps = CVector::zeros(n + 1);
    for k in 0..=n {
        if k > 0 {
            log_binom += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        let magnitude = (0.5 * log_binom + log_pow(c, k) + log_pow(s, n - k)).exp();
        amps[k] = C64::from_polar(magnitude, -sector.m_z(k) * phi);
    }
    StateVector::new(amps)
}
