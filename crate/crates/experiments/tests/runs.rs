use std::fs;
use std::path::{Path, PathBuf};

use fprinciple::poisson::{assemble_poisson, g_rhs, iterate, thomas_solve, Grid1D, IterateOptions, Method};
use fprinciple::spectral::FreqTrace;
use fprinciple_experiments::output::read_numeric_csv;
use fprinciple_experiments::runners::SpectralOutcome;
use fprinciple_experiments::train::{Objective, Trainer};
use fprinciple_experiments::{run_seed, Config, Experiment, Outcome};
use fprinciple::loss::EnergyLossConfig;
use fprinciple::nn::OutputActivation;
use ndarray::Array2;

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("runs").join(name);
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn small_toy() -> Config {
    let mut c = Config::defaults(Experiment::ToyCe);
    c.hidden_widths = vec![12, 12];
    c.samples = 101;
    c.epochs = 40;
    c.record_every = 10;
    c
}

fn spectral(outcome: Outcome) -> SpectralOutcome {
    match outcome {
        Outcome::ToyCe(o) => o,
        Outcome::MnistPca(o) => o.spectral,
        Outcome::PoissonDnn(o) => o.spectral,
        _ => panic!("not a spectral run"),
    }
}

#[test]
fn zero_epochs_record_only_the_initial_state() {
    let dir = scratch("zero-epochs");
    let mut c = small_toy();
    c.epochs = 0;
    let out = run_seed(&c, &dir).unwrap();
    let o = spectral(out.outcome);
    assert_eq!(o.trace.rows().len(), 1);
    assert_eq!(o.trace.rows()[0].step, 0);
    let (_, rows) = read_numeric_csv(&dir.join("trace.csv")).unwrap();
    assert_eq!(rows.len(), 1);
}

#[test]
fn empty_trace_writes_header_only() {
    let mut buf = Vec::new();
    FreqTrace::new(vec![3, 5]).write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "step,epoch,wall_ms,loss,df_3,df_5\n");
}

#[test]
fn trace_csv_round_trips_exactly() {
    let dir = scratch("round-trip");
    let out = run_seed(&small_toy(), &dir).unwrap();
    let o = spectral(out.outcome);
    let (header, rows) = read_numeric_csv(&dir.join("trace.csv")).unwrap();
    assert_eq!(header.len(), 4 + o.trace.selected_peaks().len());
    assert_eq!(rows.len(), o.trace.rows().len());
    assert_eq!(rows.len(), 5);
    for (csv, mem) in rows.iter().zip(o.trace.rows()) {
        assert_eq!(csv[0], mem.step as f64);
        assert_eq!(csv[1], mem.epoch as f64);
        assert_eq!(csv[3].to_bits(), mem.loss.to_bits());
        for (a, b) in csv[4..].iter().zip(&mem.deltas) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn svg_has_one_polyline_per_peak() {
    let dir = scratch("svg");
    let mut c = small_toy();
    c.svg = true;
    let out = run_seed(&c, &dir).unwrap();
    let peaks = spectral(out.outcome).trace.selected_peaks().len();
    let svg = fs::read_to_string(dir.join("trace.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), peaks);
}

#[test]
fn target_spectrum_is_the_same_at_every_step() {
    let dir = scratch("spectra");
    run_seed(&small_toy(), &dir).unwrap();
    let (header, rows) = read_numeric_csv(&dir.join("spectra.csv")).unwrap();
    assert_eq!(header, ["step", "gamma", "target_amp", "model_amp"]);
    let first: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] == 0.0).collect();
    assert!(!first.is_empty());
    for r in &rows {
        let base = first.iter().find(|b| b[1] == r[1]).unwrap();
        assert_eq!(base[2].to_bits(), r[2].to_bits());
    }
}

#[test]
fn synthetic_image_run_emits_every_csv() {
    let dir = scratch("mnist");
    let mut c = Config::defaults(Experiment::MnistPca);
    c.synthetic = true;
    c.samples = 200;
    c.hidden_widths = vec![8];
    c.epochs = 3;
    let out = run_seed(&c, &dir).unwrap();
    for f in ["config.toml", "report.json", "dataset.csv", "trace.csv", "spectra.csv", "first_passage.csv"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let Outcome::MnistPca(o) = out.outcome else { panic!() };
    assert!(o.synthetic);
    assert_eq!(o.images, 200);
    let (header, rows) = read_numeric_csv(&dir.join("dataset.csv")).unwrap();
    assert_eq!(header.len(), 12);
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r[0])));
}

#[test]
fn switch_at_step_zero_is_jacobi_from_the_untrained_network() {
    let dir = scratch("djacobi");
    let mut c = Config::defaults(Experiment::DJacobi);
    c.hidden_widths = vec![16];
    c.grid_n = 32;
    c.epochs = 300;
    c.plateau_window = 20;
    c.switch_fractions = vec![0.0, 1.0];
    let out = run_seed(&c, &dir).unwrap();
    let Outcome::DJacobi(o) = out.outcome else { panic!() };
    let at_zero = o.switch(Method::Jacobi, 0.0).unwrap();
    assert_eq!(at_zero.switch_step, 0);

    let grid = Grid1D::symmetric(c.grid_n).unwrap();
    let system = assemble_poisson(&grid, g_rhs).unwrap();
    let reference = thomas_solve(&system).unwrap();
    let points: Vec<f64> = grid.points().collect();
    let xs = Array2::from_shape_vec((points.len(), 1), points.clone()).unwrap();
    let objective = Objective::Energy {
        g: points.iter().map(|&x| g_rhs(x)).collect(),
        config: EnergyLossConfig::new(c.beta, grid.clone()).unwrap(),
    };
    let trainer = Trainer::new(&c, xs, 1, OutputActivation::Identity, objective).unwrap();
    let values = trainer.evaluate().unwrap().1.column(0).to_vec();
    let eps = c.eps_rel * reference.sup_norm();
    let opts = IterateOptions::new(Method::Jacobi, c.max_iters, eps);
    let cold = iterate(&system, &values[1..c.grid_n], &reference.interior, &opts).unwrap();
    assert_eq!(at_zero.post_iters, cold.converged_at);
    assert!(cold.converged_at.is_some());
}

#[test]
fn zero_boundary_penalty_is_rejected() {
    let mut c = Config::defaults(Experiment::PoissonDnn);
    c.beta = 0.0;
    assert!(run_seed(&c, scratch("beta")).is_err());
    assert!(!scratch("beta").join("config.toml").exists());
}
