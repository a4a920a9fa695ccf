//! End-to-end checks of the sweep modes and the command-line contract.

use std::path::Path;
use std::process::Command;

use trotterlab::config::{ConfigFile, Overrides};
use trotterlab::output::CsvTable;
use trotterlab::sweep::{list_instabilities, run_error_curve, run_heatmap, run_otoc, run_phase_portrait};
use trotterlab::{with_workers, Mode, SweepConfig};

fn config(mode: Mode, o: Overrides) -> SweepConfig {
    SweepConfig::resolve(mode, o).unwrap()
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_trotterlab"));
    cmd.env_remove("TROTTERLAB_WORKERS");
    cmd
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn single_cell_heatmap_without_kick() {
    let cfg = config(
        Mode::Heatmap,
        Overrides { n: Some(16), s_min: Some(0.0), s_max: Some(0.0), s_steps: Some(1), tau_min: Some(1.0), tau_max: Some(1.0), tau_steps: Some(1), n_points: Some(2), steps: Some(1000), ..Default::default() },
    );
    let result = run_heatmap(&cfg).unwrap();
    assert_eq!(result.rows.len(), 1);
    assert_eq!(result.failed, 0);
    assert!(result.rows[0].dissimilarity.abs() < 1e-12);
    assert!(result.rows[0].lyapunov.abs() < 1e-3);
    let csv = result.to_csv_string();
    assert!(csv.starts_with("tau,s,dissimilarity,lyapunov\n"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn heatmap_rows_are_row_major_in_s_then_tau() {
    let cfg = config(
        Mode::Heatmap,
        Overrides { n: Some(8), s_steps: Some(3), tau_steps: Some(4), n_points: Some(1), steps: Some(1000), ..Default::default() },
    );
    let rows = run_heatmap(&cfg).unwrap().rows;
    assert_eq!(rows.len(), 12);
    let s = cfg.s_grid.values();
    let tau = cfg.tau_grid.values();
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row.s, s[k / 4]);
        assert_eq!(row.tau, tau[k % 4]);
    }
}

#[test]
fn error_curve_vanishes_without_kick() {
    let cfg = config(Mode::ErrorCurve, Overrides { n: Some(32), s: Some(0.0), tau_min: Some(0.3), tau_max: Some(7.3), tau_steps: Some(25), ..Default::default() });
    let result = run_error_curve(&cfg).unwrap();
    assert_eq!(result.rows.len(), 25);
    assert!(result.rows.iter().all(|r| r.error_exact <= 1e-10 && !r.masked));
    assert!(result.to_csv_string().starts_with("tau,error_exact,error_perturbative,masked\n"));
}

#[test]
fn error_curve_flags_resonance_neighbourhood() {
    let cfg = config(Mode::ErrorCurve, Overrides { n: Some(32), s: Some(0.1), tau_min: Some(3.0), tau_max: Some(4.0), tau_steps: Some(11), ..Default::default() });
    let rows = run_error_curve(&cfg).unwrap().rows;
    let masked: Vec<bool> = rows.iter().map(|r| r.masked).collect();
    assert!(masked[5]);
    assert!(masked.iter().any(|&m| m));
}

#[test]
fn uniform_rotation_portrait_has_constant_z() {
    let cfg = config(
        Mode::PhasePortrait,
        Overrides { s: Some(0.0), tau: Some(0.4), steps: Some(100), inits: Some(vec![[1.1, 0.2]]), ..Default::default() },
    );
    let result = run_phase_portrait(&cfg).unwrap();
    assert_eq!(result.points.len(), 101);
    let z0 = result.points[0].state.z;
    assert!(result.points.iter().all(|p| (p.state.z - z0).abs() < 1e-12));
    assert!(result.to_csv_string().starts_with("trajectory_id,step,X,Y,Z\n"));
}

#[test]
fn portrait_stride_and_seeded_inits() {
    let cfg = config(Mode::PhasePortrait, Overrides { n_points: Some(3), steps: Some(10), stride: Some(4), seed: Some(9), ..Default::default() });
    let points = run_phase_portrait(&cfg).unwrap().points;
    assert_eq!(points.len(), 9);
    assert!(points.iter().all(|p| p.step % 4 == 0));
}

#[test]
fn otoc_without_kick_is_zero() {
    let cfg = config(Mode::Otoc, Overrides { n: Some(16), s: Some(0.0), delta_tau: Some(vec![0.1, 0.2]), steps: Some(20), ..Default::default() });
    let result = run_otoc(&cfg).unwrap();
    assert_eq!(result.series.len(), 2);
    assert!(result.series.iter().all(|(_, s)| s.values.iter().all(|&c| c.abs() < 1e-12)));
    assert!(result.report.points.iter().all(|p| p.fit.rate().is_none()));
    let csv = result.to_csv_string();
    assert!(csv.starts_with("delta_tau,step,t,c\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 21);
}

#[test]
fn otoc_defaults_span_the_width() {
    let cfg = config(Mode::Otoc, Overrides { n: Some(16), steps: Some(5), ..Default::default() });
    let report = run_otoc(&cfg).unwrap().report;
    let w = report.width.unwrap();
    assert_eq!(report.points.len(), 8);
    assert!(report.points.iter().all(|p| p.delta_tau.abs() < w && p.analytic.is_some()));
    let unknown = config(Mode::Otoc, Overrides { p: Some(3), n: Some(8), ..Default::default() });
    assert_eq!(run_otoc(&unknown).unwrap_err().exit_code(), 2);
}

#[test]
fn instability_reports() {
    let p2 = list_instabilities(&config(Mode::Instabilities, Overrides { tau_max: Some(4.0), ..Default::default() })).unwrap();
    assert_eq!(p2.len(), 1);
    assert!((p2[0].tau_star - 3.4907).abs() < 1e-4);
    assert!((p2[0].width.unwrap().delta_tau().unwrap() - 0.4363).abs() < 1e-4);
    assert!(p2[0].s_eff.iter().all(|x| x.s_eff >= 0.5 - 1e-9));

    let p5 = list_instabilities(&config(Mode::Instabilities, Overrides { p: Some(5), tau_max: Some(7.0), ..Default::default() })).unwrap();
    let mut qs: Vec<u32> = p5.iter().map(|r| r.q).collect();
    qs.sort_unstable();
    qs.dedup();
    assert_eq!(qs, vec![1, 3, 5]);

    let p4 = list_instabilities(&config(Mode::Instabilities, Overrides { p: Some(4), tau_max: Some(3.6), ..Default::default() })).unwrap();
    assert_eq!(p4.len(), 3);
    assert_eq!(p4[1].group, p4[2].group);
    assert_ne!(p4[0].group, p4[1].group);
    assert!((p4[1].tau_star - 3.491).abs() < 1e-3);
}

#[test]
fn config_file_keys_match_flags() {
    let file = ConfigFile::parse(r#"{"mode": "error-curve", "p": 3, "tau-min": 0.5, "tau-steps": 7}"#).unwrap();
    assert_eq!(file.mode, Some(Mode::ErrorCurve));
    assert_eq!(file.settings.tau_min, Some(0.5));
    assert!(ConfigFile::parse(r#"{"tau_min": 0.5}"#).is_err());
    assert!(ConfigFile::parse("[1, 2]").is_err());
    let merged = file.settings.merge(Overrides { p: Some(4), ..Default::default() });
    assert_eq!(merged.p, Some(4));
    assert_eq!(merged.tau_steps, Some(7));
}

#[test]
fn invalid_settings_are_config_errors() {
    let cases = [
        (Mode::Heatmap, Overrides { s_min: Some(0.5), s_max: Some(0.2), ..Default::default() }),
        (Mode::Heatmap, Overrides { steps: Some(10), ..Default::default() }),
        (Mode::ErrorCurve, Overrides { tau_steps: Some(0), ..Default::default() }),
        (Mode::ErrorCurve, Overrides { p: Some(1), ..Default::default() }),
        (Mode::PhasePortrait, Overrides { stride: Some(0), ..Default::default() }),
        (Mode::Otoc, Overrides { s: Some(1.0), ..Default::default() }),
        (Mode::Instabilities, Overrides { workers: Some(0), ..Default::default() }),
    ];
    for (mode, o) in cases {
        assert_eq!(SweepConfig::resolve(mode, o.clone()).unwrap_err().exit_code(), 2, "{mode:?} {o:?}");
    }
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let heat = Overrides { n: Some(12), s_steps: Some(3), tau_steps: Some(5), n_points: Some(3), steps: Some(1000), seed: Some(5), ..Default::default() };
    let curve = Overrides { n: Some(24), tau_steps: Some(9), ..Default::default() };
    let portrait = Overrides { n_points: Some(4), steps: Some(50), seed: Some(2), ..Default::default() };
    let otoc = Overrides { n: Some(16), steps: Some(30), ..Default::default() };
    let run = |workers: usize| {
        with_workers(workers, || {
            [
                run_heatmap(&config(Mode::Heatmap, heat.clone())).unwrap().to_csv_string(),
                run_error_curve(&config(Mode::ErrorCurve, curve.clone())).unwrap().to_csv_string(),
                run_phase_portrait(&config(Mode::PhasePortrait, portrait.clone())).unwrap().to_csv_string(),
                run_otoc(&config(Mode::Otoc, otoc.clone())).unwrap().to_csv_string(),
            ]
        })
        .unwrap()
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn binary_writes_files_and_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("config.json");
    std::fs::write(&cfg_path, r#"{"mode": "otoc", "n": 12, "steps": 15, "seed": 1}"#).unwrap();
    let out = dir.path().join("otoc.csv");
    let status = bin().args(["otoc", "--config"]).arg(&cfg_path).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(read(&out).starts_with("delta_tau,step,t,c\n"));
    let report: serde_json::Value = serde_json::from_str(&read(&out.with_extension("json"))).unwrap();
    assert_eq!(report["points"].as_array().unwrap().len(), 8);

    let again = dir.path().join("again.csv");
    let status = bin().args(["otoc", "--config"]).arg(&cfg_path).arg("--out").arg(&again).env("TROTTERLAB_WORKERS", "2").status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(read(&out), read(&again));

    let status = bin().args(["heatmap", "--config"]).arg(&cfg_path).status().unwrap();
    assert_eq!(status.code(), Some(2), "mode mismatch");
    let status = bin().args(["error-curve", "--tau-min", "2", "--tau-max", "1"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin().args(["instabilities", "--config"]).arg(dir.path().join("missing.json")).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin().args(["instabilities", "--workers", "0"]).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let json = dir.path().join("inst.json");
    let status = bin().args(["instabilities", "--p", "4", "--tau-max", "3.6", "--out"]).arg(&json).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let records: serde_json::Value = serde_json::from_str(&read(&json)).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 3);
    assert!(records[0]["tau_star"].as_f64().unwrap() > 1.74);
}

#[test]
fn negative_detunings_parse_from_flags() {
    let out = bin().args(["otoc", "--n", "8", "--steps", "3", "--delta-tau", "-0.1,0.05"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    assert!(text.lines().nth(1).unwrap().starts_with("-1.0000000000000001e-1,0,"));
}
