use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fprinciple_experiments::config::{parse_table, preset, read_table};
use fprinciple_experiments::{resolve, run, Experiment, RunError, RunResult};
use toml::{Table, Value};

#[derive(Parser)]
#[command(name = "fprinciple", version, about = "Frequency-principle and Poisson solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-class step target on [-1, 1] with a softmax network.
    ToyCe(Common),
    /// Image classification along the first principal direction.
    MnistPca(Common),
    /// Direct tridiagonal solve of the reference problem.
    PoissonDirect(Common),
    /// Jacobi or Gauss-Seidel with traced error modes.
    PoissonJacobi(Common),
    /// Network trained on the energy loss.
    PoissonDnn(Common),
    /// Network warm start followed by Jacobi or Gauss-Seidel.
    DJacobi(Common),
    /// Fourier-mode split of a small network's gradient.
    DiagnoseGrad(Common),
}

#[derive(Args)]
struct Common {
    /// Named preset (fig2, fig3, fig4, fig5, desk-toy, desk-mnist, desk-poisson, desk-djacobi).
    #[arg(long)]
    preset: Option<String>,
    /// TOML config file, applied after the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds, counting up from --seed.
    #[arg(long)]
    seeds: Option<usize>,
    /// Output root; each run goes to <out>/<experiment>/seed_<n>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: bool,
    /// Record measured wall times in CSVs (makes them non-reproducible).
    #[arg(long)]
    wall_clock: bool,
    #[arg(long)]
    mnist_images: Option<PathBuf>,
    #[arg(long)]
    mnist_labels: Option<PathBuf>,
    /// Use the generated two-blob image set.
    #[arg(long)]
    synthetic: bool,
    /// Override any config key, e.g. --set epochs=500 --set hidden_widths=[32,32].
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn layers(&self) -> RunResult<Vec<Table>> {
        let mut layers = Vec::new();
        if let Some(name) = &self.preset {
            layers.push(preset(name)?);
        }
        if let Some(path) = &self.config {
            layers.push(read_table(path)?);
        }
        let mut flags = Table::new();
        if let Some(s) = self.seed {
            let s = i64::try_from(s).map_err(|_| RunError::Config(format!("seed {s} too large")))?;
            flags.insert("seed".into(), Value::Integer(s));
        }
        if let Some(k) = self.seeds {
            flags.insert("seeds".into(), Value::Integer(k as i64));
        }
        if let Some(out) = &self.out {
            flags.insert("out_dir".into(), Value::String(out.display().to_string()));
        }
        if self.svg {
            flags.insert("svg".into(), Value::Boolean(true));
        }
        if self.wall_clock {
            flags.insert("wall_clock".into(), Value::Boolean(true));
        }
        if self.synthetic {
            flags.insert("synthetic".into(), Value::Boolean(true));
        }
        if let Some(p) = &self.mnist_images {
            flags.insert("mnist_images".into(), Value::String(p.display().to_string()));
        }
        if let Some(p) = &self.mnist_labels {
            flags.insert("mnist_labels".into(), Value::String(p.display().to_string()));
        }
        for o in &self.overrides {
            let parsed = parse_table(o, "--set").or_else(|_| {
                // Accept bare words for string values, e.g. activation=relu.
                let (k, v) = o
                    .split_once('=')
                    .ok_or_else(|| RunError::Config(format!("--set expects KEY=VALUE, got `{o}`")))?;
                parse_table(&format!("{} = \"{}\"", k.trim(), v.trim()), "--set")
            })?;
            flags.extend(parsed);
        }
        layers.push(flags);
        Ok(layers)
    }
}

fn execute(experiment: Experiment, common: &Common) -> RunResult<()> {
    let config = resolve(experiment, &common.layers()?)?;
    for output in run(&config)? {
        println!("seed {}: {}", output.seed, output.dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match &cli.command {
        Command::ToyCe(c) => (Experiment::ToyCe, c),
        Command::MnistPca(c) => (Experiment::MnistPca, c),
        Command::PoissonDirect(c) => (Experiment::PoissonDirect, c),
        Command::PoissonJacobi(c) => (Experiment::PoissonJacobi, c),
        Command::PoissonDnn(c) => (Experiment::PoissonDnn, c),
        Command::DJacobi(c) => (Experiment::DJacobi, c),
        Command::DiagnoseGrad(c) => (Experiment::DiagnoseGrad, c),
    };
    match execute(experiment, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
