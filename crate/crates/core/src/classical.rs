//! Mean-field (large-J) dynamics on the unit sphere: the continuous flow of
//! `H(s)`, the stroboscopic kicked map of one Trotter step, its Jacobian and
//! Lyapunov exponents.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::ModelParams;

/// Map iterations between projections back onto the sphere.
pub const RENORMALIZE_EVERY: usize = 1000;
/// Fraction of a Lyapunov run discarded as transient.
pub const TRANSIENT_FRACTION: f64 = 0.1;

/// Point `(X, Y, Z)` on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ClassicalState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Point at polar angle `theta` from +Z and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
    }

    /// Normalized copy; errors on a zero or non-finite vector.
    pub fn on_sphere(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument(format!("cannot project ({x}, {y}, {z}) onto the sphere")));
        }
        Ok(Self::new(x / n, y / n, z / n))
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }

    pub fn renormalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n, self.z / n)
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.as_vector() - other.as_vector()).norm()
    }
}

fn flow_rhs(v: &Vector3<f64>, p: u32, s: f64) -> Vector3<f64> {
    let xp = v[0].powi(p as i32 - 1);
    Vector3::new((1.0 - s) * v[1], -(1.0 - s) * v[0] + s * xp * v[2], -s * xp * v[1])
}

/// One classical RK4 step of the mean-field equations of `H(s)`.
pub fn flow_step_rk4(state: ClassicalState, params: &ModelParams, dt: f64) -> ClassicalState {
    let (p, s) = (params.p, params.s);
    let v = state.as_vector();
    let k1 = flow_rhs(&v, p, s);
    let k2 = flow_rhs(&(v + k1 * (dt / 2.0)), p, s);
    let k3 = flow_rhs(&(v + k2 * (dt / 2.0)), p, s);
    let k4 = flow_rhs(&(v + k3 * dt), p, s);
    ClassicalState::from_vector(&(v + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)))
}

/// Mean-field energy per spin, `−(1−s)Z − (s/p)X^p`.
pub fn classical_energy(state: ClassicalState, params: &ModelParams) -> f64 {
    -(1.0 - params.s) * state.z - params.s / params.p as f64 * state.x.powi(params.p as i32)
}

/// Rotation about z by `alpha = −(1−s)τ` followed by a rotation about x by
/// `k X^{p−1}` with `k = −sτ`.
pub fn kicked_map_step(state: ClassicalState, params: &ModelParams) -> ClassicalState {
    let alpha = -(1.0 - params.s) * params.tau;
    let k = -params.s * params.tau;
    let (sa, ca) = alpha.sin_cos();
    let x1 = state.x * ca - state.y * sa;
    let y1 = state.x * sa + state.y * ca;
    let (sk, ck) = (k * x1.powi(params.p as i32 - 1)).sin_cos();
    ClassicalState::new(x1, ck * y1 - sk * state.z, sk * y1 + ck * state.z)
}

/// Jacobian `∂X_{m+1}/∂X_m` of [`kicked_map_step`].
pub fn tangent_map(state: ClassicalState, params: &ModelParams) -> Matrix3<f64> {
    let p = params.p as i32;
    let alpha = -(1.0 - params.s) * params.tau;
    let k = -params.s * params.tau;
    let (sa, ca) = alpha.sin_cos();
    let rotation = Matrix3::new(ca, -sa, 0.0, sa, ca, 0.0, 0.0, 0.0, 1.0);
    let x1 = state.x * ca - state.y * sa;
    let y1 = state.x * sa + state.y * ca;
    let z1 = state.z;
    let (sk, ck) = (k * x1.powi(p - 1)).sin_cos();
    let dkappa = k * (p - 1) as f64 * x1.powi(p - 2);
    let y2 = ck * y1 - sk * z1;
    let z2 = sk * y1 + ck * z1;
    let kick = Matrix3::new(1.0, 0.0, 0.0, -dkappa * z2, ck, -sk, dkappa * y2, sk, ck);
    kick * rotation
}

/// Trajectory `[X_0, X_1, …, X_n]` of the kicked map, with periodic
/// projection back onto the sphere.
pub fn map_trajectory(init: ClassicalState, params: &ModelParams, n_steps: usize) -> Vec<ClassicalState> {
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut state = init;
    out.push(state);
    for step in 1..=n_steps {
        state = kicked_map_step(state, params);
        if step % RENORMALIZE_EVERY == 0 {
            state = state.renormalized();
        }
        out.push(state);
    }
    out
}

/// Largest Lyapunov exponent per map step.
///
/// A 3-frame is carried through the tangent map and re-orthonormalized by QR
/// every step; the logarithm of the leading stretch `|R_00|` is averaged over
/// the steps after the first 10%.
pub fn lyapunov_exponent(params: &ModelParams, init: ClassicalState, n_steps: usize) -> Result<f64> {
    if n_steps < 1000 {
        return Err(Error::InvalidArgument(format!("Lyapunov runs need at least 1000 steps, got {n_steps}")));
    }
    let transient = (n_steps as f64 * TRANSIENT_FRACTION).floor() as usize;
    let mut state = init.renormalized();
    let mut frame = Matrix3::<f64>::identity();
    let mut sum = 0.0;
    for step in 0..n_steps {
        let m = tangent_map(state, params);
        let qr = (m * frame).qr();
        let r00 = qr.r()[(0, 0)].abs();
        frame = qr.q();
        if step >= transient {
            sum += r00.ln();
        }
        state = kicked_map_step(state, params);
        if (step + 1) % RENORMALIZE_EVERY == 0 {
            state = state.renormalized();
        }
    }
    Ok(sum / (n_steps - transient) as f64)
}

/// Lyapunov exponents over seeded uniformly random initial points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSummary {
    pub mean: f64,
    pub max: f64,
    pub values: Vec<f64>,
}

/// `n_points` uniformly distributed points on the sphere. Point `i` is drawn
/// from stream `i` of a ChaCha generator seeded with `seed`, so the sample
/// does not depend on evaluation order.
pub fn sample_sphere(n_points: usize, seed: u64) -> Vec<ClassicalState> {
    (0..n_points)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let rho = (1.0 - z * z).max(0.0).sqrt();
            ClassicalState::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

/// Mean and maximum Lyapunov exponent over [`sample_sphere`] initial points,
/// evaluated in parallel.
pub fn lyapunov_averaged(params: &ModelParams, n_points: usize, n_steps: usize, seed: u64) -> Result<LyapunovSummary> {
    if n_points == 0 {
        return Err(Error::InvalidArgument("n_points must be at least 1".into()));
    }
    let values = sample_sphere(n_points, seed)
        .into_par_iter()
        .map(|init| lyapunov_exponent(params, init, n_steps))
        .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / n_points as f64;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(LyapunovSummary { mean, max, values })
}

/// One row of a phase-portrait table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortraitPoint {
    pub trajectory_id: usize,
    pub step: usize,
    pub state: ClassicalState,
}

/// Every `stride`-th iterate (starting with the initial point) of each
/// trajectory, up to and including step `n_steps`.
pub fn phase_portrait(params: &ModelParams, inits: &[ClassicalState], n_steps: usize, stride: usize) -> Result<Vec<PortraitPoint>> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be at least 1".into()));
    }
    let tables: Vec<Vec<PortraitPoint>> = inits
        .par_iter()
        .enumerate()
        .map(|(id, &init)| {
            map_trajectory(init, params, n_steps)
                .into_iter()
                .enumerate()
                .filter(|(step, _)| step % stride == 0)
                .map(|(step, state)| PortraitPoint { trajectory_id: id, step, state })
                .collect()
        })
        .collect();
    Ok(tables.into_iter().flatten().collect())
}
