//! Long-time averages, the Trotter error of the time-averaged
//! magnetization, and square-commutator (OTOC) time series.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::dynamics::{spectral_decompose, Eigenbasis, FloquetFactory, UnitaryOperator};
use crate::error::Result;
use crate::linalg::{CMatrix, HermitianSpectrum};
use crate::spin::{target_hamiltonian, CollectiveOperators, ModelParams, StateVector};

/// Eigenvalue gaps below this make the diagonal-ensemble formula unreliable.
pub const DEGENERACY_GAP: f64 = 1.0e-8;

/// Diagonal-ensemble average together with the smallest level spacing of
/// the basis it was computed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongTimeAverage {
    pub value: f64,
    pub min_gap: f64,
}

impl LongTimeAverage {
    pub fn is_degenerate(&self) -> bool {
        self.min_gap < DEGENERACY_GAP
    }
}

/// `Σ_r ⟨φ_r|ρ⁰|φ_r⟩ ⟨φ_r|A|φ_r⟩` over the eigenbasis `basis`.
///
/// Logs a warning when the basis has a gap below [`DEGENERACY_GAP`]; the
/// result is then gauge dependent.
pub fn long_time_average(state: &StateVector, basis: &impl Eigenbasis, a: &CMatrix) -> LongTimeAverage {
    let v = basis.eigenvectors();
    let weights = v.adjoint() * state.amplitudes();
    let av = a * v;
    let value = (0..v.ncols())
        .map(|r| weights[r].norm_sqr() * v.column(r).dotc(&av.column(r)).re)
        .sum();
    let min_gap = basis.min_spacing();
    if min_gap < DEGENERACY_GAP {
        warn!("long-time average over a basis with near-degenerate levels (gap {min_gap:.3e})");
    }
    LongTimeAverage { value, min_gap }
}

/// `E_z^∞` for one step size, with both long-time averages attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnetizationError {
    pub value: f64,
    pub target: LongTimeAverage,
    pub trotter: LongTimeAverage,
}

impl MagnetizationError {
    pub fn is_degenerate(&self) -> bool {
        self.target.is_degenerate() || self.trotter.is_degenerate()
    }
}

/// `(1/J) |⟨Jz⟩_tar − ⟨Jz⟩_trot|` with the target average taken in the
/// eigenbasis of `H(s)` and the Trotterized one in the eigenbasis of
/// `U_δ(τ)`.
pub fn error_ez_infinity_exact(params: &ModelParams, ops: &CollectiveOperators, state: &StateVector) -> Result<MagnetizationError> {
    ErrorCurve::new(ops, params.p, params.s)?.error(state, params.tau)
}

/// Reusable context for `E_z^∞` along a τ sweep at fixed `(p, s)`.
#[derive(Debug, Clone)]
pub struct ErrorCurve<'a> {
    factory: FloquetFactory<'a>,
    target: HermitianSpectrum,
    s: f64,
}

impl<'a> ErrorCurve<'a> {
    pub fn new(ops: &'a CollectiveOperators, p: u32, s: f64) -> Result<Self> {
        let params = ModelParams::new(p, s, 1.0)?;
        let target = HermitianSpectrum::new(&target_hamiltonian(&params, ops))?;
        Ok(Self { factory: FloquetFactory::new(ops, p)?, target, s })
    }

    pub fn target_basis(&self) -> &HermitianSpectrum {
        &self.target
    }

    pub fn factory(&self) -> &FloquetFactory<'a> {
        &self.factory
    }

    pub fn error(&self, state: &StateVector, tau: f64) -> Result<MagnetizationError> {
        let ops = self.factory.ops();
        let floquet = spectral_decompose(&self.factory.floquet(self.s, tau)?)?;
        let target = long_time_average(state, &self.target, &ops.jz);
        let trotter = long_time_average(state, &floquet, &ops.jz);
        Ok(MagnetizationError { value: (target.value - trotter.value).abs() / ops.j(), target, trotter })
    }
}

/// Square commutator `c(t) = Tr(|[Jz(t), Jz(0)]|²) / (N + 1)` sampled at
/// `t = l τ`, `l = 0 ..= n_steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtocSeries {
    pub tau: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl OtocSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// OTOC of the Floquet operator of `params`.
pub fn otoc_series(params: &ModelParams, ops: &CollectiveOperators, n_steps: usize) -> Result<OtocSeries> {
    let u = FloquetFactory::new(ops, params.p)?.floquet(params.s, params.tau)?;
    Ok(otoc_series_for(&u, ops, params.tau, n_steps))
}

/// OTOC for an arbitrary one-step unitary `u` of duration `tau`.
///
/// `Jz(l) = (U†)^l Jz U^l` is propagated as a matrix. Since `Jz` is
/// diagonal, `[A, Jz]_{ij} = A_{ij} (m_j − m_i)`.
pub fn otoc_series_for(u: &UnitaryOperator, ops: &CollectiveOperators, tau: f64, n_steps: usize) -> OtocSeries {
    let d = ops.dim();
    let sector = ops.sector();
    let m: Vec<f64> = (0..d).map(|k| sector.m_z(k)).collect();
    let u_mat = u.matrix();
    let u_adj = u_mat.adjoint();
    let mut heis = ops.jz.clone();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut values = Vec::with_capacity(n_steps + 1);
    for l in 0..=n_steps {
        if l > 0 {
            heis = &u_adj * &heis * u_mat;
        }
        let mut sum = 0.0;
        for j in 0..d {
            for i in 0..d {
                let dm = m[j] - m[i];
                sum += heis[(i, j)].norm_sqr() * dm * dm;
            }
        }
        times.push(l as f64 * tau);
        values.push(sum / d as f64);
    }
    OtocSeries { tau, times, values }
}

/// Outcome of an exponential-growth fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthFit {
    Growth {
        /// Slope of `ln c` per sample (per Floquet step for an OTOC series).
        rate: f64,
        r_squared: f64,
        /// Inclusive index range of the fitted window.
        start: usize,
        end: usize,
    },
    NoGrowth,
}

impl GrowthFit {
    pub fn rate(&self) -> Option<f64> {
        match self {
            GrowthFit::Growth { rate, .. } => Some(*rate),
            GrowthFit::NoGrowth => None,
        }
    }
}

/// Number of consecutive samples in a fit window.
pub const FIT_WINDOW: usize = 10;

/// Exponential growth rate of `c` as the slope of `ln c` against the sample
/// index, taken from the most linear window of [`FIT_WINDOW`] samples.
///
/// Windows lie between the first sample above `1e-10 · max(c)` and the
/// first local maximum (onset of saturation). Among windows with positive
/// slope and `R² ≥ r2_threshold`, the one with the largest `R²` wins; ties
/// go to the earliest.
pub fn fit_growth_rate(series: &OtocSeries, r2_threshold: f64) -> GrowthFit {
    let c = &series.values;
    let peak = c.iter().copied().fold(0.0, f64::max);
    let Some(first) = c.iter().position(|&v| v > 0.0 && v >= 1e-10 * peak) else {
        return GrowthFit::NoGrowth;
    };
    let mut last = c.len() - 1;
    for i in first + 1..c.len().saturating_sub(1) {
        if c[i] >= c[i - 1] && c[i] > c[i + 1] {
            last = i;
            break;
        }
    }
    if last + 1 < first + FIT_WINDOW || c[first..=last].iter().any(|&v| !(v > 0.0)) {
        return GrowthFit::NoGrowth;
    }

    let k = FIT_WINDOW as f64;
    let mx = (k - 1.0) / 2.0;
    let vxx = (k * k - 1.0) / 12.0;
    let mut best = GrowthFit::NoGrowth;
    let mut best_r2 = f64::NEG_INFINITY;
    for a in first..=last + 1 - FIT_WINDOW {
        let y: Vec<f64> = c[a..a + FIT_WINDOW].iter().map(|v| v.ln()).collect();
        let my = y.iter().sum::<f64>() / k;
        let vxy = y.iter().enumerate().map(|(i, yi)| (i as f64 - mx) * (yi - my)).sum::<f64>() / k;
        let vyy = y.iter().map(|yi| (yi - my) * (yi - my)).sum::<f64>() / k;
        if vyy <= 0.0 {
            continue;
        }
        let slope = vxy / vxx;
        let r2 = vxy * vxy / (vxx * vyy);
        if slope > 0.0 && r2 >= r2_threshold && r2 > best_r2 {
            best_r2 = r2;
            best = GrowthFit::Growth { rate: slope, r_squared: r2, start: a, end: a + FIT_WINDOW - 1 };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::spectral_decompose;
    use crate::spin::{spin_coherent_state, SpinSector};
    use std::f64::consts::PI;

    #[test]
    fn long_time_average_of_eigenstate() {
        let sector = SpinSector::new(6).unwrap();
        let ops = CollectiveOperators::new(sector);
        let u = UnitaryOperator::new(ops.z_rotation(0.37)).unwrap();
        let dec = spectral_decompose(&u).unwrap();
        let psi = StateVector::basis(sector, 4).unwrap();
        let avg = long_time_average(&psi, &dec, &ops.jz);
        assert!((avg.value - 1.0).abs() < 1e-14);
        assert!(!avg.is_degenerate());
    }

    #[test]
    fn equatorial_state_averages_to_zero_without_interaction() {
        let sector = SpinSector::new(10).unwrap();
        let ops = CollectiveOperators::new(sector);
        let psi = spin_coherent_state(sector, PI / 2.0, 0.0).unwrap();
        let err = error_ez_infinity_exact(&ModelParams::new(2, 0.0, 1.3).unwrap(), &ops, &psi).unwrap();
        assert!(err.target.value.abs() < 1e-12);
        assert!(err.value.abs() < 1e-12);
    }

    #[test]
    fn otoc_starts_at_zero_and_vanishes_for_z_rotation() {
        let ops = CollectiveOperators::new(SpinSector::new(12).unwrap());
        let u = UnitaryOperator::new(ops.z_rotation(0.8)).unwrap();
        let series = otoc_series_for(&u, &ops, 0.8, 10);
        assert_eq!(series.len(), 11);
        assert!(series.values.iter().all(|&c| c.abs() < 1e-20));

        let s = otoc_series(&ModelParams::new(2, 0.3, 1.0).unwrap(), &ops, 5).unwrap();
        assert!(s.values[0].abs() < 1e-12);
        assert!(s.values.iter().all(|&c| c >= -1e-12));
        assert!(s.values[5] > 0.0);
    }

    #[test]
    fn fit_exact_exponential() {
        let times: Vec<f64> = (0..40).map(|l| l as f64 * 0.25).collect();
        let values = times.iter().map(|t| (0.5 * t).exp()).collect();
        let series = OtocSeries { tau: 0.25, times, values };
        let fit = fit_growth_rate(&series, 0.995);
        assert!((fit.rate().unwrap() - 0.5 * 0.25).abs() < 1e-9);
    }

    #[test]
    fn fit_constant_is_no_growth() {
        let series = OtocSeries { tau: 1.0, times: (0..30).map(|l| l as f64).collect(), values: vec![2.0; 30] };
        assert_eq!(fit_growth_rate(&series, 0.995), GrowthFit::NoGrowth);
        let zeros = OtocSeries { tau: 1.0, times: (0..30).map(|l| l as f64).collect(), values: vec![0.0; 30] };
        assert_eq!(fit_growth_rate(&zeros, 0.995), GrowthFit::NoGrowth);
    }

    #[test]
    fn fit_stops_at_saturation() {
        // exponential growth followed by decay: only the rising part is fitted
        let times: Vec<f64> = (0..60).map(|l| l as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| if t <= 30.0 { (0.3 * t).exp() } else { 9.0_f64.exp() * (-(t - 30.0) * 0.1).exp() }).collect();
        let fit = fit_growth_rate(&OtocSeries { tau: 1.0, times, values }, 0.999);
        match fit {
            GrowthFit::Growth { rate, end, .. } => {
                assert!((rate - 0.3).abs() < 1e-9);
                assert!(end <= 30);
            }
            GrowthFit::NoGrowth => panic!("expected growth"),
        }
    }
}
