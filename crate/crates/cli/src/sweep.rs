//! Sweep runners. Every runner evaluates independent cells on the rayon
//! pool it is called from and gathers results in input order.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use trotterlab_core::classical::{lyapunov_averaged, phase_portrait, sample_sphere, ClassicalState, PortraitPoint};
use trotterlab_core::dynamics::{dissimilarity_of_bases, spectral_decompose, FloquetFactory};
use trotterlab_core::instability::{
    group_coincident, immediate_vicinity_mask, instability_points, instability_width, perturbative_error_coherent,
    s_effective, saddle_exponent_22, saddle_exponent_42, saddle_exponent_44, InstabilityPoint, InstabilityWidth,
    TauInterval,
};
use trotterlab_core::linalg::HermitianSpectrum;
use trotterlab_core::observables::{fit_growth_rate, otoc_series, ErrorCurve, GrowthFit, OtocSeries};
use trotterlab_core::spin::{spin_coherent_state, target_hamiltonian, CollectiveOperators, ModelParams, SpinSector};

use crate::config::SweepConfig;
use crate::error::CliError;
use crate::output::{fmt_f64, CsvTable};

/// Number of detunings probed by default in an OTOC run.
pub const DEFAULT_OTOC_POINTS: usize = 8;

fn operators(config: &SweepConfig) -> Result<CollectiveOperators, CliError> {
    Ok(CollectiveOperators::new(SpinSector::new(config.n)?))
}

fn warn_failure(what: &str, err: &dyn std::fmt::Display) {
    eprintln!("warning: {what}: {err}");
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatmapRow {
    pub tau: f64,
    pub s: f64,
    pub dissimilarity: f64,
    pub lyapunov: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapResult {
    pub rows: Vec<HeatmapRow>,
    pub failed: usize,
}

impl CsvTable for HeatmapResult {
    const HEADER: &'static str = "tau,s,dissimilarity,lyapunov";

    fn write_rows(&self, w: &mut dyn Write) -> io::Result<()> {
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", fmt_f64(r.tau), fmt_f64(r.s), fmt_f64(r.dissimilarity), fmt_f64(r.lyapunov))?;
        }
        Ok(())
    }
}

/// Dissimilarity between the eigenbases of `H(s)` and `U_δ(τ)`, and the
/// mean Lyapunov exponent of the classical map, on a row-major `(s, τ)`
/// grid. Every cell uses the same seeded set of initial points.
pub fn run_heatmap(config: &SweepConfig) -> Result<HeatmapResult, CliError> {
    let ops = operators(config)?;
    let factory = FloquetFactory::new(&ops, config.p)?;
    let s_values = config.s_grid.values();
    let tau_values = config.tau_grid.values();
    let targets: Vec<_> = s_values
        .par_iter()
        .map(|&s| {
            let params = ModelParams::new(config.p, s, 1.0)?;
            HermitianSpectrum::new(&target_hamiltonian(&params, &ops))
        })
        .collect();
    let cells: Vec<(usize, usize)> = (0..s_values.len()).flat_map(|i| (0..tau_values.len()).map(move |j| (i, j))).collect();
    let results: Vec<(HeatmapRow, bool)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let (s, tau) = (s_values[i], tau_values[j]);
            let dis = targets[i].as_ref().map_err(Clone::clone).and_then(|target| {
                let floquet = spectral_decompose(&factory.floquet(s, tau)?)?;
                dissimilarity_of_bases(target, &floquet, config.n)
            });
            let lyap = ModelParams::new(config.p, s, tau)
                .and_then(|params| lyapunov_averaged(&params, config.n_points, config.steps, config.seed));
            let ok = dis.is_ok() && lyap.is_ok();
            if let Err(e) = &dis {
                warn_failure(&format!("dissimilarity at s={s}, tau={tau}"), e);
            }
            if let Err(e) = &lyap {
                warn_failure(&format!("Lyapunov exponent at s={s}, tau={tau}"), e);
            }
            let row = HeatmapRow {
                tau,
                s,
                dissimilarity: dis.unwrap_or(f64::NAN),
                lyapunov: lyap.map(|l| l.mean).unwrap_or(f64::NAN),
            };
            (row, ok)
        })
        .collect();
    let failed = results.iter().filter(|(_, ok)| !ok).count();
    Ok(HeatmapResult { rows: results.into_iter().map(|(r, _)| r).collect(), failed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorCurveRow {
    pub tau: f64,
    pub error_exact: f64,
    pub error_perturbative: f64,
    pub masked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorCurveResult {
    pub rows: Vec<ErrorCurveRow>,
    pub failed: usize,
}

impl CsvTable for ErrorCurveResult {
    const HEADER: &'static str = "tau,error_exact,error_perturbative,masked";

    fn write_rows(&self, w: &mut dyn Write) -> io::Result<()> {
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", fmt_f64(r.tau), fmt_f64(r.error_exact), fmt_f64(r.error_perturbative), u8::from(r.masked))?;
        }
        Ok(())
    }
}

/// Exact and first-order long-time magnetization errors along the τ grid
/// for the coherent state `(theta, phi)`.
pub fn run_error_curve(config: &SweepConfig) -> Result<ErrorCurveResult, CliError> {
    let ops = operators(config)?;
    let curve = ErrorCurve::new(&ops, config.p, config.s)?;
    let state = spin_coherent_state(ops.sector(), config.theta, config.phi)?;
    let results: Vec<(ErrorCurveRow, bool)> = config
        .tau_grid
        .values()
        .par_iter()
        .map(|&tau| {
            let exact = curve.error(&state, tau);
            let pert = ModelParams::new(config.p, config.s, tau)
                .and_then(|params| perturbative_error_coherent(&params, &ops, config.theta, config.phi));
            if let Err(e) = &exact {
                warn_failure(&format!("exact error at tau={tau}"), e);
            }
            if let Err(e) = &pert {
                warn_failure(&format!("perturbative error at tau={tau}"), e);
            }
            let ok = exact.is_ok() && pert.is_ok();
            let row = ErrorCurveRow {
                tau,
                error_exact: exact.map(|e| e.value).unwrap_or(f64::NAN),
                error_perturbative: pert.as_ref().map(|e| e.value).unwrap_or(f64::NAN),
                masked: pert.as_ref().map(|e| e.masked).unwrap_or(false),
            };
            (row, ok)
        })
        .collect();
    let failed = results.iter().filter(|(_, ok)| !ok).count();
    Ok(ErrorCurveResult { rows: results.into_iter().map(|(r, _)| r).collect(), failed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitResult {
    pub points: Vec<PortraitPoint>,
}

impl CsvTable for PortraitResult {
    const HEADER: &'static str = "trajectory_id,step,X,Y,Z";

    fn write_rows(&self, w: &mut dyn Write) -> io::Result<()> {
        for pt in &self.points {
            let v = pt.state;
            writeln!(w, "{},{},{},{},{}", pt.trajectory_id, pt.step, fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z))?;
        }
        Ok(())
    }
}

/// Initial points of a portrait: the explicit list if given, otherwise a
/// seeded uniform sample of the sphere.
pub fn portrait_inits(config: &SweepConfig) -> Vec<ClassicalState> {
    match &config.inits {
        Some(list) => list.iter().map(|&[theta, phi]| ClassicalState::from_angles(theta, phi)).collect(),
        None => sample_sphere(config.n_points, config.seed),
    }
}

pub fn run_phase_portrait(config: &SweepConfig) -> Result<PortraitResult, CliError> {
    let params = ModelParams::new(config.p, config.s, config.tau)?;
    let points = phase_portrait(&params, &portrait_inits(config), config.steps, config.stride)?;
    Ok(PortraitResult { points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtocPoint {
    pub delta_tau: f64,
    pub tau: f64,
    pub fit: GrowthFit,
    /// Saddle exponent per Floquet step, where an analytic form exists.
    pub analytic: Option<f64>,
    pub saddle_exists: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtocReport {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub s: f64,
    pub n: usize,
    pub tau_star: f64,
    pub width: Option<f64>,
    pub r2_threshold: f64,
    pub points: Vec<OtocPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtocResult {
    pub series: Vec<(f64, OtocSeries)>,
    pub report: OtocReport,
    pub failed: usize,
}

impl CsvTable for OtocResult {
    const HEADER: &'static str = "delta_tau,step,t,c";

    fn write_rows(&self, w: &mut dyn Write) -> io::Result<()> {
        for (dt, series) in &self.series {
            for (l, (t, c)) in series.times.iter().zip(&series.values).enumerate() {
                writeln!(w, "{},{},{},{}", fmt_f64(*dt), l, fmt_f64(*t), fmt_f64(*c))?;
            }
        }
        Ok(())
    }
}

/// Detunings `−w + 2w(k + ½)/K`, `k = 0..K`, spread evenly inside the
/// instability width `w`.
pub fn default_detunings(width: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| -width + 2.0 * width * (k as f64 + 0.5) / count as f64).collect()
}

/// Analytic saddle exponent, where one is available for `(p, q, r)`.
pub fn analytic_exponent(point: &InstabilityPoint, delta_tau: f64) -> Option<(f64, bool)> {
    let data = match (point.p, point.q, point.r) {
        (2, 2, 1) => saddle_exponent_22(point.s, delta_tau),
        (4, 2, 1) => saddle_exponent_42(point.s, delta_tau),
        (4, 4, 1) => saddle_exponent_44(point.s, delta_tau),
        _ => return None,
    };
    data.ok().map(|d| (d.lambda_saddle, d.exists))
}

/// OTOC series at `τ* + Δτ` for each detuning, with growth fits.
pub fn run_otoc(config: &SweepConfig) -> Result<OtocResult, CliError> {
    let ops = operators(config)?;
    let point = InstabilityPoint::new(config.p, config.q, config.r, config.s)?;
    let width = instability_width(&point).ok().and_then(|w| w.delta_tau());
    let detunings = match (&config.delta_tau, width) {
        (Some(list), _) => list.clone(),
        (None, Some(w)) => default_detunings(w, DEFAULT_OTOC_POINTS),
        (None, None) => {
            return Err(CliError::Config(format!(
                "no width is available for (p, q) = ({}, {}); pass delta-tau explicitly",
                config.p, config.q
            )))
        }
    };
    if let Some(dt) = detunings.iter().find(|&&dt| !(point.tau_star + dt > 0.0)) {
        return Err(CliError::Config(format!("delta-tau {dt} gives a non-positive step")));
    }
    let computed: Vec<(f64, Result<OtocSeries, trotterlab_core::Error>)> = detunings
        .par_iter()
        .map(|&dt| (dt, ModelParams::new(config.p, config.s, point.tau_star + dt).and_then(|params| otoc_series(&params, &ops, config.steps))))
        .collect();
    let mut failed = 0;
    let mut series = Vec::with_capacity(computed.len());
    let mut points = Vec::with_capacity(computed.len());
    for (dt, result) in computed {
        let tau = point.tau_star + dt;
        let s = match result {
            Ok(s) => s,
            Err(e) => {
                warn_failure(&format!("OTOC at delta_tau={dt}"), &e);
                failed += 1;
                OtocSeries { tau, times: (0..=config.steps).map(|l| l as f64 * tau).collect(), values: vec![f64::NAN; config.steps + 1] }
            }
        };
        let fit = fit_growth_rate(&s, config.r2_threshold);
        let analytic = analytic_exponent(&point, dt);
        points.push(OtocPoint { delta_tau: dt, tau, fit, analytic: analytic.map(|a| a.0), saddle_exists: analytic.map(|a| a.1) });
        series.push((dt, s));
    }
    let report = OtocReport {
        p: config.p,
        q: config.q,
        r: config.r,
        s: config.s,
        n: config.n,
        tau_star: point.tau_star,
        width,
        r2_threshold: config.r2_threshold,
        points,
    };
    Ok(OtocResult { series, report, failed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SEffSample {
    pub delta_tau: f64,
    pub s_eff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstabilityRecord {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub s: f64,
    pub tau_star: f64,
    /// Index of the group of coincident `tau_star` values.
    pub group: usize,
    pub width: Option<InstabilityWidth>,
    pub mask: TauInterval,
    pub s_eff: Vec<SEffSample>,
}

/// Fractions of the width (or of the mask half-width when no width is
/// known) at which `s_eff` is sampled.
pub const S_EFF_FRACTIONS: [f64; 3] = [0.25, 0.5, 1.0];

/// Catalog of resonances with `τ* ≤ tau-max` at the configured `s`.
pub fn list_instabilities(config: &SweepConfig) -> Result<Vec<InstabilityRecord>, CliError> {
    let points = instability_points(config.p, config.s, config.tau_grid.max)?;
    let mut records = Vec::with_capacity(points.len());
    for (group, members) in group_coincident(&points).into_iter().enumerate() {
        for point in members {
            let width = instability_width(&point).ok();
            let mask = immediate_vicinity_mask(&point);
            let scale = width.and_then(|w| w.delta_tau()).unwrap_or(mask.half_width());
            let s_eff = S_EFF_FRACTIONS
                .iter()
                .filter_map(|&f| {
                    let dt = f * scale;
                    s_effective(point.s, dt, point.tau_star).ok().map(|v| SEffSample { delta_tau: dt, s_eff: v })
                })
                .collect();
            records.push(InstabilityRecord {
                p: point.p,
                q: point.q,
                r: point.r,
                s: point.s,
                tau_star: point.tau_star,
                group,
                width,
                mask,
                s_eff,
            });
        }
    }
    Ok(records)
}
