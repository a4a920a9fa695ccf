//! Structural instabilities of the Trotterized evolution: resonance
//! locations, first-order perturbation theory around the Jz rotation,
//! effective Hamiltonians near resonances and their saddle-point exponents.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::dynamics::{exp_hermitian, FloquetFactory};
use crate::error::{Error, Result};
use crate::linalg::{c64, max_abs, spectral_norm, CMatrix, CVector, C64};
use crate::spin::{spin_coherent_state, CollectiveOperators, ModelParams, StateVector};

/// Resonance points closer than this are reported as one group.
pub const COINCIDENCE_TOL: f64 = 1.0e-9;
/// Threshold on `|e^{ix} − 1|` below which first-order theory is refused.
pub const DEGENERACY_TOL: f64 = 1.0e-9;

/// Offsets `q = m − m′` coupled by `Jx^p`: `p, p−2, …` down to 2 (even `p`)
/// or 1 (odd `p`).
pub fn coupled_offsets(p: u32) -> Vec<u32> {
    (1..=p).rev().filter(|q| (p - q) % 2 == 0).collect()
}

/// Degenerate point `τ* = 2πr / ((1−s) q)` of the unperturbed rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstabilityPoint {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub s: f64,
    pub tau_star: f64,
}

impl InstabilityPoint {
    pub fn new(p: u32, q: u32, r: u32, s: f64) -> Result<Self> {
        ModelParams::new(p, s, 1.0)?;
        if s >= 1.0 {
            return Err(Error::InvalidParams("no resonances at s = 1".into()));
        }
        if !coupled_offsets(p).contains(&q) {
            return Err(Error::InvalidArgument(format!("offset q = {q} is not coupled by Jx^{p}")));
        }
        if r == 0 {
            return Err(Error::InvalidArgument("resonance order r must be positive".into()));
        }
        Ok(Self { p, q, r, s, tau_star: TAU * r as f64 / ((1.0 - s) * q as f64) })
    }

    /// `Δτ / (τ* + Δτ)`
    pub fn reduced_detuning(&self, delta_tau: f64) -> f64 {
        delta_tau / (self.tau_star + delta_tau)
    }
}

/// Every resonance with `τ* ≤ tau_max`, ordered by `τ*` and, within a
/// coincident group, by decreasing `q`.
pub fn instability_points(p: u32, s: f64, tau_max: f64) -> Result<Vec<InstabilityPoint>> {
    ModelParams::new(p, s, 1.0)?;
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau_max must be positive and finite, got {tau_max}")));
    }
    if s >= 1.0 {
        return Ok(Vec::new());
    }
    let mut points = Vec::new();
    for q in coupled_offsets(p) {
        let mut r = 1;
        loop {
            let point = InstabilityPoint::new(p, q, r, s)?;
            if point.tau_star > tau_max * (1.0 + 1e-12) {
                break;
            }
            points.push(point);
            r += 1;
        }
    }
    points.sort_by(|a, b| a.tau_star.total_cmp(&b.tau_star).then(b.q.cmp(&a.q)));
    Ok(points)
}

/// Splits a sorted point list into groups of coincident `τ*`.
pub fn group_coincident(points: &[InstabilityPoint]) -> Vec<Vec<InstabilityPoint>> {
    let mut groups: Vec<Vec<InstabilityPoint>> = Vec::new();
    for &point in points {
        match groups.last_mut() {
            Some(group) if (point.tau_star - group[0].tau_star).abs() <= COINCIDENCE_TOL => group.push(point),
            _ => groups.push(vec![point]),
        }
    }
    groups
}

fn phase_gap(x: f64) -> C64 {
    C64::from_polar(1.0, x) - 1.0
}

/// First-order correction `|φ_m^{(1)}⟩` to the `m`-th eigenvector of the
/// Floquet operator; the perturbed eigenvector is `|m⟩ + s |φ_m^{(1)}⟩`.
pub fn eigenvector_correction(params: &ModelParams, ops: &CollectiveOperators, m: usize) -> Result<CVector> {
    let d = ops.dim();
    if m >= d {
        return Err(Error::InvalidArgument(format!("basis index {m} out of range for dimension {d}")));
    }
    let kick = ops.jx_power(params.p);
    let scale = params.tau / (params.p as f64 * ops.j().powi(params.p as i32 - 1));
    let mut out = CVector::zeros(d);
    for n in 0..d {
        if n == m || kick[(n, m)] == C64::new(0.0, 0.0) {
            continue;
        }
        let gap = phase_gap((1.0 - params.s) * params.tau * (m as f64 - n as f64));
        if gap.norm() < DEGENERACY_TOL {
            return Err(Error::Degenerate { m, m_prime: n, gap: gap.norm() });
        }
        out[n] = c64(0.0, scale) * kick[(n, m)] / gap;
    }
    Ok(out)
}

/// First-order estimate of `E_z^∞` with a flag for resonance proximity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeError {
    pub value: f64,
    pub masked: bool,
}

/// `E_z^∞(τ)` for the spin coherent state `|θ, φ⟩`, from the closed form
/// that sums over coupled offsets `q` with `|ρ_{m+q,m}|`.
pub fn perturbative_error_coherent(params: &ModelParams, ops: &CollectiveOperators, theta: f64, phi: f64) -> Result<PerturbativeError> {
    let state = spin_coherent_state(ops.sector(), theta, phi)?;
    let (p, s, tau) = (params.p, params.s, params.tau);
    let j = ops.j();
    let kick = ops.jx_power(p);
    let d = ops.dim();
    let mut total = 0.0;
    for q in coupled_offsets(p) {
        let qf = q as f64;
        let x = qf * (1.0 - s) * tau;
        let bracket = (qf * phi).cos() * (2.0 / (qf * (1.0 - s)) - tau / (x / 2.0).tan()) + tau * (qf * phi).sin();
        let weight: f64 = (0..d.saturating_sub(q as usize))
            .map(|m| state.density_element(m + q as usize, m).norm() * kick[(m, m + q as usize)].re)
            .sum();
        total += s * qf / (p as f64 * j.powi(p as i32 - 1)) * bracket * weight;
    }
    Ok(PerturbativeError { value: total.abs() / j, masked: is_masked(params) })
}

/// `E_z^∞(τ)` for an arbitrary initial state from first-order Hamiltonian
/// and unitary perturbation theory in the Jz basis.
pub fn perturbative_error_state(params: &ModelParams, ops: &CollectiveOperators, state: &StateVector) -> Result<PerturbativeError> {
    let (p, s, tau) = (params.p, params.s, params.tau);
    let j = ops.j();
    let d = ops.dim();
    if state.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: state.dim() });
    }
    let kick = ops.jx_power(p);
    let sector = ops.sector();
    let mut sum = 0.0;
    for m in 0..d {
        let a_mm = sector.m_z(m);
        for n in 0..d {
            let v = kick[(m, n)];
            if n == m || v == C64::new(0.0, 0.0) {
                continue;
            }
            let k = m as f64 - n as f64;
            let static_part = C64::new(1.0 / ((1.0 - s) * k), 0.0);
            let floquet_part = c64(0.0, tau) / phase_gap(-(1.0 - s) * tau * k);
            sum += (state.density_element(n, m) * a_mm * v * (static_part + floquet_part)).re;
        }
    }
    let value = 2.0 * s / (p as f64 * j.powi(p as i32 - 1)) * sum.abs() / j;
    Ok(PerturbativeError { value, masked: is_masked(params) })
}

/// Closed interval of step sizes around a resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauInterval {
    pub lo: f64,
    pub hi: f64,
}

impl TauInterval {
    pub fn contains(&self, tau: f64) -> bool {
        self.lo <= tau && tau <= self.hi
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// Largest `|∂V̄/∂z|` over the unit sphere, where `V̄ = (1/pq) Σ_m (n_m·v)^p`
/// is the kick averaged over the `q` rotated axes of the resonance.
///
/// `∂V̄/∂z = −z (1−z²)^{(p−2)/2} (1/q) Σ_m cos^p(φ − φ_m)`; the angular
/// factor has nonnegative Fourier coefficients, so it peaks at `φ = 0`.
pub fn kick_slope(point: &InstabilityPoint) -> f64 {
    let pf = point.p as f64;
    let radial = if point.p == 2 { 1.0 } else { (1.0 / (pf - 1.0)).sqrt() * ((pf - 2.0) / (pf - 1.0)).powf((pf - 2.0) / 2.0) };
    let angular = kick_axes(point).iter().map(|phi| phi.cos().powi(point.p as i32)).sum::<f64>() / point.q as f64;
    radial * angular.abs()
}

/// Region around `τ*` where first-order nondegenerate theory fails.
///
/// The first-order shift of the quasienergy spacing of levels `q` apart is
/// at most `q s τ κ` with `κ` = [`kick_slope`]; the mask edge is the smaller
/// `Δτ` at which this equals half the unperturbed spacing `q(1−s)|Δτ|`,
/// which is reached on the left flank: `δ = 2sκτ* / (1 − s + 2sκ)`.
pub fn immediate_vicinity_mask(point: &InstabilityPoint) -> TauInterval {
    let k = 2.0 * point.s * kick_slope(point);
    let delta = k * point.tau_star / (1.0 - point.s + k);
    TauInterval { lo: point.tau_star - delta, hi: point.tau_star + delta }
}

fn is_masked(params: &ModelParams) -> bool {
    if params.s >= 1.0 {
        return false;
    }
    // δ < τ* 2s/(1−s), so no farther resonance can reach τ
    let tau_max = params.tau * (1.0 + 2.0 * params.s / (1.0 - params.s)) + 1.0;
    instability_points(params.p, params.s, tau_max)
        .map(|points| points.iter().any(|pt| immediate_vicinity_mask(pt).contains(params.tau)))
        .unwrap_or(false)
}

/// `F(p)`, the `q = 2` width factor (`F(2) = 1`).
pub fn width_factor_f(p: u32) -> f64 {
    if p == 2 {
        return 1.0;
    }
    let pf = p as f64;
    let num = (pf - 1.0) * (pf - 2.0).powi(p as i32 - 2) - (pf - 2.0).powi(p as i32 - 1);
    (num / (pf - 1.0).powi(p as i32 - 1)).sqrt()
}

/// `G(p) = F(p) / 2^{p/2}`, the `q = 4` width factor, i.e. the largest
/// reduced detuning `((1−s)/s) Δτ/(τ*+Δτ)` with a real off-axis fixed point.
pub fn width_factor_g(p: u32) -> f64 {
    width_factor_f(p) / 2f64.powf(p as f64 / 2.0)
}

/// Range of `Δτ` over which the resonance supports its extra fixed points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstabilityWidth {
    Bounded {
        delta_tau: f64,
        factor: f64,
        /// Set for `r > 1`, where the bound is the `r = 1` formula at the
        /// shifted `τ*`.
        extrapolated: bool,
    },
    Unbounded {
        factor: f64,
    },
}

impl InstabilityWidth {
    pub fn delta_tau(&self) -> Option<f64> {
        match self {
            InstabilityWidth::Bounded { delta_tau, .. } => Some(*delta_tau),
            InstabilityWidth::Unbounded { .. } => None,
        }
    }
}

/// `Δτ ≤ s τ* K / (1 − s − s K)` with `K = F(p)` for `q = 2` and `G(p)` for
/// `q = 4` (even `p` only).
pub fn instability_width(point: &InstabilityPoint) -> Result<InstabilityWidth> {
    let factor = match point.q {
        2 => width_factor_f(point.p),
        4 => width_factor_g(point.p),
        q => return Err(Error::InvalidArgument(format!("widths are only available for q = 2 and q = 4, got q = {q}"))),
    };
    let s = point.s;
    let denom = 1.0 - s - s * factor;
    if denom <= 0.0 {
        return Ok(InstabilityWidth::Unbounded { factor });
    }
    Ok(InstabilityWidth::Bounded { delta_tau: s * point.tau_star * factor / denom, factor, extrapolated: point.r > 1 })
}

/// Azimuths `2π r (m−1)/q`, `m = 1..=q`, of the rotated kick axes.
fn kick_axes(point: &InstabilityPoint) -> Vec<f64> {
    (0..point.q).map(|m| TAU * (point.r as f64 * m as f64 / point.q as f64).fract()).collect()
}

/// Generator of every `q`-th step near `τ*`:
/// `−(1−s) τ̄ Jz − s/(p q J^{p−1}) Σ_m (Jx cos φ_m + Jy sin φ_m)^p`,
/// with `τ̄ = Δτ/(τ*+Δτ)`.
///
/// For even `p` the sum is also evaluated over half the axes (axes `φ` and
/// `φ + π` give the same power) and the two must agree to 1e−12.
pub fn effective_hamiltonian(point: &InstabilityPoint, delta_tau: f64, ops: &CollectiveOperators) -> Result<CMatrix> {
    let (p, s) = (point.p, point.s);
    if !(point.tau_star + delta_tau > 0.0) {
        return Err(Error::InvalidArgument(format!("τ* + Δτ must be positive, got {}", point.tau_star + delta_tau)));
    }
    let axes = kick_axes(point);
    let full = axes.iter().fold(CMatrix::zeros(ops.dim(), ops.dim()), |acc, &phi| acc + ops.rotated_power(phi, p));
    if p % 2 == 0 && point.q % 2 == 0 && point.r % 2 == 1 {
        let half = axes[..axes.len() / 2].iter().fold(CMatrix::zeros(ops.dim(), ops.dim()), |acc, &phi| acc + ops.rotated_power(phi, p));
        let diff = max_abs(&(&full - &half * C64::new(2.0, 0.0)));
        let scale = max_abs(&full).max(1.0);
        if diff > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!("half-sum mismatch {diff:.3e} in the effective Hamiltonian")));
        }
    }
    let coupling = s / (p as f64 * point.q as f64 * ops.j().powi(p as i32 - 1));
    let detuning = (1.0 - s) * point.reduced_detuning(delta_tau);
    Ok(&ops.jz * C64::new(-detuning, 0.0) - full * C64::new(coupling, 0.0))
}

/// `1 / (1 + ((1−s)/s) Δτ/(τ*+Δτ))`.
pub fn s_effective(s: f64, delta_tau: f64, tau_star: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParams(format!("s must lie in (0, 1), got {s}")));
    }
    if !(delta_tau > 0.0) {
        return Err(Error::InvalidArgument(format!("Δτ must be positive, got {delta_tau}")));
    }
    Ok(1.0 / (1.0 + (1.0 - s) / s * delta_tau / (tau_star + delta_tau)))
}

/// Mean-field limit of [`effective_hamiltonian`] divided by `J`.
#[derive(Debug, Clone)]
pub struct EffectiveFlow {
    p: u32,
    detuning: f64,
    coupling: f64,
    axes: Vec<Vector3<f64>>,
    time_scale: f64,
}

impl EffectiveFlow {
    pub fn new(point: &InstabilityPoint, delta_tau: f64) -> Result<Self> {
        if !(point.tau_star + delta_tau > 0.0) {
            return Err(Error::InvalidArgument(format!("τ* + Δτ must be positive, got {}", point.tau_star + delta_tau)));
        }
        Ok(Self {
            p: point.p,
            detuning: (1.0 - point.s) * point.reduced_detuning(delta_tau),
            coupling: point.s / (point.p as f64 * point.q as f64),
            axes: kick_axes(point).into_iter().map(|phi| Vector3::new(phi.cos(), phi.sin(), 0.0)).collect(),
            time_scale: point.tau_star + delta_tau,
        })
    }

    /// Energy per spin, `−(1−s)τ̄ Z − s/(pq) Σ_m (n_m · v)^p`.
    pub fn energy(&self, v: &Vector3<f64>) -> f64 {
        -self.detuning * v[2] - self.coupling * self.axes.iter().map(|n| n.dot(v).powi(self.p as i32)).sum::<f64>()
    }

    fn gradient(&self, v: &Vector3<f64>) -> Vector3<f64> {
        let p = self.p as i32;
        let kick: Vector3<f64> = self.axes.iter().map(|n| n * (p as f64 * n.dot(v).powi(p - 1))).sum();
        Vector3::new(0.0, 0.0, -self.detuning) - kick * self.coupling
    }

    fn hessian(&self, v: &Vector3<f64>) -> Matrix3<f64> {
        let p = self.p as i32;
        let kick: Matrix3<f64> = self.axes.iter().map(|n| n * n.transpose() * ((p * (p - 1)) as f64 * n.dot(v).powi(p - 2))).sum();
        -kick * self.coupling
    }

    /// `dv/dt = ∇E × v`.
    pub fn velocity(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.gradient(v).cross(v)
    }

    pub fn jacobian(&self, v: &Vector3<f64>) -> Matrix3<f64> {
        self.gradient(v).cross_matrix() - v.cross_matrix() * self.hessian(v)
    }

    /// Largest real part of the linearized flow in the tangent plane at a
    /// fixed point `v`, scaled by `τ* + Δτ` (growth per Floquet step).
    pub fn fixed_point_exponent(&self, v: &Vector3<f64>) -> f64 {
        let (e1, e2) = tangent_basis(v);
        let jac = self.jacobian(v);
        let m = Matrix2::new(e1.dot(&(jac * e1)), e1.dot(&(jac * e2)), e2.dot(&(jac * e1)), e2.dot(&(jac * e2)));
        let tr = m.trace();
        let disc = tr * tr / 4.0 - m.determinant();
        let re = if disc > 0.0 { tr / 2.0 + disc.sqrt() } else { tr / 2.0 };
        re * self.time_scale
    }
}

fn tangent_basis(v: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let n = v.normalize();
    let helper = if n[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = helper.cross(&n).normalize();
    (e1, n.cross(&e1))
}

/// Real roots of `z³ + a z + b`, ascending, each polished by Newton steps.
pub fn depressed_cubic_roots(a: f64, b: f64) -> Vec<f64> {
    let disc = -(4.0 * a * a * a + 27.0 * b * b);
    let mut roots = if a < 0.0 && disc >= 0.0 {
        let m = 2.0 * (-a / 3.0).sqrt();
        let arg = (3.0 * b / (a * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3).map(|k| m * (theta - TAU * k as f64 / 3.0).cos()).collect::<Vec<_>>()
    } else if a == 0.0 {
        vec![(-b).cbrt()]
    } else {
        let sq = (b * b / 4.0 + a * a * a / 27.0).sqrt();
        vec![(-b / 2.0 + sq).cbrt() + (-b / 2.0 - sq).cbrt()]
    };
    for z in roots.iter_mut() {
        for _ in 0..4 {
            let f = *z * *z * *z + a * *z + b;
            let df = 3.0 * *z * *z + a;
            if df.abs() > 1e-300 {
                *z -= f / df;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Unstable fixed point of the effective flow and its exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleData {
    pub x_sd: f64,
    pub y_sd: f64,
    pub z_sd: f64,
    /// Growth rate per Floquet step.
    pub lambda_saddle: f64,
    /// Edge of the `Δτ` range with a real saddle.
    pub width: Option<f64>,
    pub exists: bool,
}

/// Exponent of the pole that turns unstable near `τ*_{2,2}`:
/// `(τ*+Δτ) √(s(1−s)|Δτ|/(τ*+Δτ) − ((1−s)Δτ/(τ*+Δτ))²)`.
///
/// The north pole is the saddle for `Δτ > 0` and the south pole for
/// `Δτ < 0`. A negative radicand gives `exists = false` and exponent 0.
pub fn saddle_exponent_22(s: f64, delta_tau: f64) -> Result<SaddleData> {
    let point = InstabilityPoint::new(2, 2, 1, s)?;
    let total = point.tau_star + delta_tau;
    if !(total > 0.0) {
        return Err(Error::InvalidArgument(format!("τ* + Δτ must be positive, got {total}")));
    }
    let radicand = s * (1.0 - s) * delta_tau.abs() / total - ((1.0 - s) * delta_tau / total).powi(2);
    let width = instability_width(&point)?.delta_tau();
    let z = if delta_tau >= 0.0 { 1.0 } else { -1.0 };
    let (lambda, exists) = if radicand >= 0.0 { (total * radicand.sqrt(), true) } else { (0.0, false) };
    Ok(SaddleData { x_sd: 0.0, y_sd: 0.0, z_sd: z, lambda_saddle: lambda, width, exists })
}

/// Saddle of the `(4,2)` effective flow. Fixed points with `Y = 0` satisfy
/// `Z³ − Z + A = 0`, `A = ((1−s)/s) Δτ/(τ*+Δτ)`, `X² = 1 − Z²`; the root
/// with a hyperbolic linearization is kept and its exponent evaluated as
/// `s(τ*+Δτ) √(2A² − X_sd⁶)`.
pub fn saddle_exponent_42(s: f64, delta_tau: f64) -> Result<SaddleData> {
    let point = InstabilityPoint::new(4, 2, 1, s)?;
    let flow = EffectiveFlow::new(&point, delta_tau)?;
    let a = (1.0 - s) / s * point.reduced_detuning(delta_tau);
    let width = instability_width(&point)?.delta_tau();
    let best = depressed_cubic_roots(-1.0, a)
        .into_iter()
        .filter(|z| z.abs() < 1.0)
        .map(|z| (z, (1.0 - z * z).sqrt()))
        .filter(|&(z, x)| flow.fixed_point_exponent(&Vector3::new(x, 0.0, z)) > 0.0)
        .map(|(z, x)| {
            let radicand = 2.0 * a * a - x.powi(6);
            (z, x, s * (point.tau_star + delta_tau) * radicand.abs().sqrt() * radicand.signum().max(0.0))
        })
        .max_by(|a, b| a.2.total_cmp(&b.2));
    Ok(match best {
        Some((z, x, lambda)) => SaddleData { x_sd: x, y_sd: 0.0, z_sd: z, lambda_saddle: lambda, width, exists: true },
        None => SaddleData { x_sd: 0.0, y_sd: 0.0, z_sd: 0.0, lambda_saddle: 0.0, width, exists: false },
    })
}

/// Saddle of the `(4,4)` effective flow. Off-axis fixed points have
/// `X² = Y² = (1 − Z²)/2` with `Z³ − Z + 4A = 0`; the exponent is the
/// leading eigenvalue of the linearized flow there, times `τ*+Δτ`.
pub fn saddle_exponent_44(s: f64, delta_tau: f64) -> Result<SaddleData> {
    let point = InstabilityPoint::new(4, 4, 1, s)?;
    let flow = EffectiveFlow::new(&point, delta_tau)?;
    let a = (1.0 - s) / s * point.reduced_detuning(delta_tau);
    let width = instability_width(&point)?.delta_tau();
    let best = depressed_cubic_roots(-1.0, 4.0 * a)
        .into_iter()
        .filter(|z| z.abs() < 1.0)
        .map(|z| {
            let x = ((1.0 - z * z) / 2.0).sqrt();
            (z, x, flow.fixed_point_exponent(&Vector3::new(x, x, z)))
        })
        .filter(|&(_, _, lambda)| lambda > 0.0)
        .max_by(|a, b| a.2.total_cmp(&b.2));
    Ok(match best {
        Some((z, x, lambda)) => SaddleData { x_sd: x, y_sd: x, z_sd: z, lambda_saddle: lambda, width, exists: true },
        None => SaddleData { x_sd: 0.0, y_sd: 0.0, z_sd: 0.0, lambda_saddle: 0.0, width, exists: false },
    })
}

/// `min_± ‖U_δ(τ*+Δτ)^q ∓ exp(−i q (τ*+Δτ) H_eff)‖₂`.
pub fn effective_unitary_check(point: &InstabilityPoint, delta_tau: f64, ops: &CollectiveOperators) -> Result<f64> {
    let tau = point.tau_star + delta_tau;
    let u = FloquetFactory::new(ops, point.p)?.floquet(point.s, tau)?.pow(point.q as u64);
    let h = effective_hamiltonian(point, delta_tau, ops)?;
    let v = exp_hermitian(&h, -(point.q as f64) * tau)?;
    let plus = spectral_norm(&(u.matrix() - v.matrix()));
    let minus = spectral_norm(&(u.matrix() + v.matrix()));
    Ok(plus.min(minus))
}

/// Eigenphase spacing `q (1−s) |Δτ|` (mod 2π) of the resonant pair.
pub fn unperturbed_gap(point: &InstabilityPoint, delta_tau: f64) -> f64 {
    let x = (point.q as f64 * (1.0 - point.s) * delta_tau).rem_euclid(TAU);
    x.min(TAU - x)
}
