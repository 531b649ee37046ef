//! Flat TOML experiment configuration.
//!
//! A run's settings are layered: built-in defaults for the experiment, then
//! an optional named preset, then an optional config file, then command-line
//! overrides. Later layers replace earlier keys. The merged table must match
//! [`Config`] exactly; unknown keys are rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use fprinciple::nn::Activation;
use fprinciple::poisson::Method;
use fprinciple::spectral::Denominator;
use serde::{Deserialize, Serialize};
use toml::Table;

use crate::error::{RunError, RunResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    ToyCe,
    MnistPca,
    PoissonDirect,
    PoissonJacobi,
    PoissonDnn,
    DJacobi,
    DiagnoseGrad,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::ToyCe,
        Experiment::MnistPca,
        Experiment::PoissonDirect,
        Experiment::PoissonJacobi,
        Experiment::PoissonDnn,
        Experiment::DJacobi,
        Experiment::DiagnoseGrad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ToyCe => "toy_ce",
            Experiment::MnistPca => "mnist_pca",
            Experiment::PoissonDirect => "poisson_direct",
            Experiment::PoissonJacobi => "poisson_jacobi",
            Experiment::PoissonDnn => "poisson_dnn",
            Experiment::DJacobi => "d_jacobi",
            Experiment::DiagnoseGrad => "diagnose_grad",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Experiment,

    /// Hidden layer widths; input and output widths follow from the task.
    pub hidden_widths: Vec<usize>,
    /// `tanh` or `relu`.
    pub activation: String,
    pub init_std: f64,
    pub lr: f64,
    /// Halve the learning rate every this many epochs; 0 keeps it constant.
    pub lr_halve_every: usize,
    /// Mini-batch size; 0 means full batch.
    pub batch_size: usize,
    pub epochs: usize,
    /// Epochs per training step. A step is the unit of recording.
    pub epochs_per_step: usize,
    /// Record every this many steps.
    pub record_every: usize,

    /// Training samples for the toy and image tasks.
    pub samples: usize,
    /// Number of grid intervals for the Poisson tasks.
    pub grid_n: usize,
    pub beta: f64,

    pub seed: u64,
    /// Runs use seeds `seed, seed + 1, …, seed + seeds − 1`.
    pub seeds: usize,

    pub max_peaks: usize,
    pub min_rel_amplitude: f64,
    /// First-passage threshold on the relative frequency difference.
    pub tau: f64,
    /// `target` or `model`.
    pub denominator: String,
    /// Frequency indices evaluated by the non-uniform transform.
    pub nufft_k: usize,

    /// IDX image and label files, possibly gzipped. Empty when unused.
    pub mnist_images: String,
    pub mnist_labels: String,
    /// Use the generated two-blob set instead of image files.
    pub synthetic: bool,

    /// Initial iterate for `poisson_jacobi`: `zero` or `random`.
    pub jacobi_init: String,
    /// Modes whose amplitudes are traced by `poisson_jacobi`. Empty picks the
    /// modes matching the spectral peaks of `u*`.
    pub track_modes: Vec<usize>,
    /// `jacobi` or `gauss_seidel`.
    pub iter_method: String,
    pub max_iters: usize,
    /// Absolute sup-error tolerance for `poisson_jacobi`; 0 runs `max_iters`.
    pub iter_tol: f64,

    pub plateau_window: usize,
    pub plateau_delta: f64,
    /// Switch times for `d_jacobi` as fractions of the plateau step.
    pub switch_fractions: Vec<f64>,
    /// Target `‖u − u*‖_∞ ≤ eps_rel · ‖u*‖_∞` after the switch.
    pub eps_rel: f64,
    /// Iterative methods run after each switch.
    pub post_methods: Vec<String>,

    /// Write measured wall times into CSVs. Off keeps outputs byte-stable.
    pub wall_clock: bool,
    pub svg: bool,
    pub out_dir: String,
}

impl Config {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Config {
            experiment,
            hidden_widths: vec![64, 64, 32],
            activation: "tanh".into(),
            init_std: 0.1,
            lr: 2e-4,
            lr_halve_every: 0,
            batch_size: 0,
            epochs: 1000,
            epochs_per_step: 1,
            record_every: 50,
            samples: 201,
            grid_n: 64,
            beta: 10.0,
            seed: 0,
            seeds: 1,
            max_peaks: fprinciple::spectral::DEFAULT_MAX_PEAKS,
            min_rel_amplitude: fprinciple::spectral::DEFAULT_MIN_REL_AMPLITUDE,
            tau: 0.3,
            denominator: "target".into(),
            nufft_k: 100,
            mnist_images: String::new(),
            mnist_labels: String::new(),
            synthetic: false,
            jacobi_init: "random".into(),
            track_modes: Vec::new(),
            iter_method: "jacobi".into(),
            max_iters: 200,
            iter_tol: 0.0,
            plateau_window: 200,
            plateau_delta: 0.01,
            switch_fractions: vec![0.0, 0.25, 1.0, 2.0],
            eps_rel: 1e-3,
            post_methods: vec!["jacobi".into()],
            wall_clock: false,
            svg: false,
            out_dir: "runs".into(),
        };
        match experiment {
            Experiment::MnistPca => {
                c.hidden_widths = vec![400, 200];
                c.lr = 1e-5;
                c.init_std = 0.2;
                c.batch_size = 128;
                c.samples = 10_000;
                c.epochs = 200;
                c.record_every = 1;
            }
            Experiment::PoissonDnn | Experiment::DJacobi => {
                c.hidden_widths = vec![256, 64];
                c.init_std = 0.05;
                c.lr = 5e-6;
                c.epochs_per_step = if experiment == Experiment::PoissonDnn { 4 } else { 1 };
                c.tau = 0.2;
                c.max_iters = 10_000_000;
            }
            Experiment::PoissonJacobi => c.record_every = 1,
            Experiment::DiagnoseGrad => {
                c.hidden_widths = vec![16];
                c.samples = 32;
                c.init_std = 0.5;
            }
            _ => {}
        }
        c
    }

    pub fn activation(&self) -> Activation {
        self.activation.parse().expect("validated")
    }

    pub fn denominator(&self) -> Denominator {
        self.denominator.parse().expect("validated")
    }

    pub fn iter_method(&self) -> Method {
        self.iter_method.parse().expect("validated")
    }

    pub fn post_methods(&self) -> Vec<Method> {
        self.post_methods.iter().map(|m| m.parse().expect("validated")).collect()
    }

    /// Training steps implied by `epochs` and `epochs_per_step`.
    pub fn steps(&self) -> usize {
        self.epochs / self.epochs_per_step
    }

    /// Copy with a different base seed and a single run.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            seeds: 1,
            ..self.clone()
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> RunResult<()> {
        let bad = |msg: String| Err(RunError::Config(msg));
        let parse_err = |e: fprinciple::Error| RunError::Config(e.to_string());
        Activation::from_str(&self.activation).map_err(parse_err)?;
        Denominator::from_str(&self.denominator).map_err(parse_err)?;
        Method::from_str(&self.iter_method).map_err(parse_err)?;
        for m in &self.post_methods {
            Method::from_str(m).map_err(parse_err)?;
        }
        if self.hidden_widths.contains(&0) {
            return bad("hidden widths must be positive".into());
        }
        for (name, v) in [
            ("init_std", self.init_std),
            ("lr", self.lr),
            ("min_rel_amplitude", self.min_rel_amplitude),
            ("tau", self.tau),
            ("plateau_delta", self.plateau_delta),
            ("eps_rel", self.eps_rel),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!(
                "beta must be positive (beta = 0 leaves the energy minimiser undetermined), got {}",
                self.beta
            ));
        }
        for (name, v) in [
            ("epochs_per_step", self.epochs_per_step),
            ("record_every", self.record_every),
            ("seeds", self.seeds),
            ("max_peaks", self.max_peaks),
            ("nufft_k", self.nufft_k),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.grid_n < 2 {
            return bad(format!("grid_n must be at least 2, got {}", self.grid_n));
        }
        if self.samples < 2 {
            return bad(format!("samples must be at least 2, got {}", self.samples));
        }
        if self.plateau_window < 2 {
            return bad("plateau_window must be at least 2".into());
        }
        if !(self.iter_tol >= 0.0) {
            return bad(format!("iter_tol must be non-negative, got {}", self.iter_tol));
        }
        if self.switch_fractions.iter().any(|f| !(*f >= 0.0 && f.is_finite())) {
            return bad("switch fractions must be non-negative".into());
        }
        if self.experiment == Experiment::PoissonJacobi {
            if let Some(k) = self.track_modes.iter().find(|&&k| k == 0 || k >= self.grid_n) {
                return bad(format!("tracked mode {k} outside 1..{}", self.grid_n - 1));
            }
        }
        if !["zero", "random"].contains(&self.jacobi_init.as_str()) {
            return bad(format!("jacobi_init must be zero or random, got `{}`", self.jacobi_init));
        }
        if self.experiment == Experiment::MnistPca
            && !self.synthetic
            && (self.mnist_images.is_empty() || self.mnist_labels.is_empty())
        {
            return bad("mnist_pca needs mnist_images and mnist_labels, or synthetic = true".into());
        }
        Ok(())
    }
}

/// Named configurations shipped with the binary.
pub const PRESETS: [(&str, &str); 8] = [
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("desk-toy", include_str!("../presets/desk-toy.toml")),
    ("desk-mnist", include_str!("../presets/desk-mnist.toml")),
    ("desk-poisson", include_str!("../presets/desk-poisson.toml")),
    ("desk-djacobi", include_str!("../presets/desk-djacobi.toml")),
];

pub fn preset(name: &str) -> RunResult<Table> {
    let text = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            RunError::Config(format!("unknown preset `{name}`; expected one of {}", names.join(", ")))
        })?;
    parse_table(text, &format!("preset {name}"))
}

pub fn parse_table(text: &str, origin: &str) -> RunResult<Table> {
    text.parse::<Table>()
        .map_err(|e| RunError::Config(format!("{origin}: {e}")))
}

pub fn read_table(path: &Path) -> RunResult<Table> {
    let text = std::fs::read_to_string(path).map_err(RunError::io(path))?;
    parse_table(&text, &path.display().to_string())
}

/// Merges layers over the defaults of `experiment`, then checks the result.
/// A layer naming a different experiment is an error.
pub fn resolve(experiment: Experiment, layers: &[Table]) -> RunResult<Config> {
    let mut merged = Table::try_from(Config::defaults(experiment)).expect("defaults serialise");
    for layer in layers {
        if let Some(v) = layer.get("experiment") {
            if v.as_str() != Some(experiment.name()) {
                return Err(RunError::Config(format!(
                    "configuration is for experiment {v}, not {experiment}"
                )));
            }
        }
        for (k, v) in layer {
            merged.insert(k.clone(), v.clone());
        }
    }
    let config: Config = merged
        .try_into()
        .map_err(|e: toml::de::Error| RunError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for e in Experiment::ALL {
            let mut c = Config::defaults(e);
            c.synthetic = true;
            c.validate().unwrap();
        }
    }

    #[test]
    fn presets_resolve() {
        for (name, text) in PRESETS {
            let table = preset(name).unwrap();
            let experiment: Experiment = table["experiment"].clone().try_into().unwrap();
            // Image presets need data paths, which only the command line supplies.
            let data = parse_table("synthetic = true", "cli").unwrap();
            let c = resolve(experiment, &[table, data]).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
            assert_eq!(c.experiment, experiment);
        }
    }

    #[test]
    fn later_layers_win() {
        let a = parse_table("lr = 0.5\nseed = 3", "a").unwrap();
        let b = parse_table("lr = 0.25", "b").unwrap();
        let c = resolve(Experiment::ToyCe, &[a, b]).unwrap();
        assert_eq!((c.lr, c.seed), (0.25, 3));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let unknown = parse_table("learning_rate = 0.1", "x").unwrap();
        assert!(matches!(resolve(Experiment::ToyCe, &[unknown]), Err(RunError::Config(_))));
        let zero_beta = parse_table("beta = 0.0", "x").unwrap();
        assert!(resolve(Experiment::PoissonDnn, &[zero_beta]).is_err());
        let wrong = parse_table("experiment = \"toy_ce\"", "x").unwrap();
        assert!(resolve(Experiment::PoissonDnn, &[wrong]).is_err());
        let typo = parse_table("activation = \"gelu\"", "x").unwrap();
        assert!(resolve(Experiment::ToyCe, &[typo]).is_err());
        let wrong_type = parse_table("epochs = \"many\"", "x").unwrap();
        assert!(resolve(Experiment::ToyCe, &[wrong_type]).is_err());
        assert!(resolve(Experiment::MnistPca, &[]).is_err());
    }

    #[test]
    fn snapshot_round_trips() {
        let c = resolve(Experiment::DJacobi, &[preset("desk-djacobi").unwrap()]).unwrap();
        let again = resolve(Experiment::DJacobi, &[parse_table(&c.to_toml(), "snap").unwrap()]).unwrap();
        assert_eq!(c, again);
    }
}
