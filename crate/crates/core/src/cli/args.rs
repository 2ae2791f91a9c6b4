use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{Mode, Settings};
use super::CliError;

/// Dirichlet-process mixtures of skew-normal kernels.
///
/// Every setting can be given in a `key = value` config file and
/// overridden by the flag of the same name.
#[derive(Debug, Parser)]
#[command(name = "skewmix", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a density to real-valued data and write a result bundle.
    FitDensity(RunArgs),
    /// Fit a pmf to counts through a rounded latent mixture.
    FitPmf(RunArgs),
    /// Run a simulation study over scenarios, sample sizes and kernels.
    Simulate(RunArgs),
    /// Score a fitted bundle against a scenario's true law.
    Eval(RunArgs),
}

impl Command {
    pub fn mode(&self) -> Mode {
        match self {
            Command::FitDensity(_) => Mode::FitDensity,
            Command::FitPmf(_) => Mode::FitPmf,
            Command::Simulate(_) => Mode::Simulate,
            Command::Eval(_) => Mode::Eval,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::FitDensity(a) | Command::FitPmf(a) | Command::Simulate(a) | Command::Eval(a) => a,
        }
    }
}

#[derive(Debug, Args, Default)]
#[command(allow_negative_numbers = true)]
pub struct RunArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Data file, one value per line; for eval, a fit-density or fit-pmf bundle.
    #[arg(long)]
    pub input: Option<String>,
    /// Output bundle directory (fits, simulate) or report file (eval).
    #[arg(long)]
    pub output: Option<String>,
    /// Replace an existing output bundle.
    #[arg(long)]
    pub force: bool,
    /// Bundled analysis: `galaxy`.
    #[arg(long)]
    pub preset: Option<String>,
    /// gaussian or skew-normal; simulate also takes `both`.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Total sweeps, burn-in included.
    #[arg(long)]
    pub iters: Option<String>,
    #[arg(long)]
    pub burnin: Option<String>,
    #[arg(long)]
    pub thin: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Truncation level of the stick-breaking prior.
    #[arg(long)]
    pub hmax: Option<String>,
    /// count, floor, or custom:<threshold file>.
    #[arg(long)]
    pub rounding: Option<String>,
    /// Scenario ids 1 to 8, comma separated, or `all`.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Sample sizes, comma separated.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub replicates: Option<String>,
    #[arg(long)]
    pub grid_points: Option<String>,
    #[arg(long)]
    pub xi0: Option<String>,
    #[arg(long)]
    pub kappa: Option<String>,
    /// Shape of the gamma prior on ω⁻².
    #[arg(long)]
    pub a: Option<String>,
    /// Rate of the gamma prior on ω⁻².
    #[arg(long)]
    pub b: Option<String>,
    /// Prior variance of the shape λ.
    #[arg(long)]
    pub psi0: Option<String>,
    #[arg(long)]
    pub a_alpha: Option<String>,
    #[arg(long)]
    pub b_alpha: Option<String>,
    /// stick-conditional or escobar-west.
    #[arg(long)]
    pub alpha_update: Option<String>,
    /// Metropolis moves per shape update.
    #[arg(long)]
    pub shape_moves: Option<String>,
    /// Read scenario 1's second arguments as variances (true/false).
    #[arg(long)]
    pub s1_variance: Option<String>,
    /// Read scenario 3's gamma parameter as a scale (true/false).
    #[arg(long)]
    pub s3_gamma_scale: Option<String>,
}

impl RunArgs {
    /// Settings from the config file, then the flags on top.
    pub fn settings(&self, mode: Mode) -> Result<Settings, CliError> {
        let mut s = Settings::new(mode);
        if let Some(path) = &self.config {
            s.load_file(path)?;
        }
        let flags: [(&str, &Option<String>); 25] = [
            ("input", &self.input),
            ("output", &self.output),
            ("preset", &self.preset),
            ("kernel", &self.kernel),
            ("iters", &self.iters),
            ("burnin", &self.burnin),
            ("thin", &self.thin),
            ("seed", &self.seed),
            ("hmax", &self.hmax),
            ("rounding", &self.rounding),
            ("scenario", &self.scenario),
            ("n", &self.n),
            ("replicates", &self.replicates),
            ("grid-points", &self.grid_points),
            ("xi0", &self.xi0),
            ("kappa", &self.kappa),
            ("a", &self.a),
            ("b", &self.b),
            ("psi0", &self.psi0),
            ("a-alpha", &self.a_alpha),
            ("b-alpha", &self.b_alpha),
            ("alpha-update", &self.alpha_update),
            ("shape-moves", &self.shape_moves),
            ("s1-variance", &self.s1_variance),
            ("s3-gamma-scale", &self.s3_gamma_scale),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set_flag(key, v)?;
            }
        }
        Ok(s)
    }
}
