use std::path::PathBuf;
use std::process::ExitCode;

use bmtk::harness::{self, Command, ExperimentConfig, InitKind, Scheme};
use bmtk::norms::{parse_exponent, BMParams, WindowSet};
use bmtk::paraproduct::MoserVariant;
use bmtk::report::LemmaId;
use bmtk::spectral::Grid;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Besov-Morrey toolkit: norms, inequality checks and ideal-flow solvers.
#[derive(Parser, Debug)]
#[command(name = "bmtk", version)]
struct Cli {
    /// Print only the report JSON, no human-readable summary.
    #[arg(long, global = true)]
    json_only: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Morrey and Besov-Morrey norms of a stored or generated field.
    Norms {
        #[command(flatten)]
        common: Common,
        /// Field stem (as written by `corpus`); a random field is used if absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Empirical constants of one inequality over random trials.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Lemma id, e.g. 3.4.
        #[arg(long)]
        lemma: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Fail if any trial ratio exceeds this bound.
        #[arg(long)]
        max_ratio: Option<f64>,
        #[arg(long, value_enum, default_value_t = MoserArg::Inhomogeneous)]
        moser_variant: MoserArg,
        /// Flow horizon for the composition check.
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        /// Root-mean-square speed of the random driver for the composition check.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
    },
    /// Incompressible Euler runs.
    Euler {
        #[command(subcommand)]
        action: RunAction,
    },
    /// Ideal MHD runs.
    Mhd {
        #[command(subcommand)]
        action: MhdAction,
    },
    /// Recompute blow-up diagnostics from a run directory.
    Diagnose {
        #[command(flatten)]
        common: Common,
        /// Run directory.
        #[arg(long, alias = "input")]
        run: PathBuf,
        /// Refuse the run unless its config hash equals this value.
        #[arg(long)]
        expect_hash: Option<String>,
    },
    /// Generate a labelled field corpus.
    Corpus {
        #[command(flatten)]
        common: Common,
        /// Random fields per family.
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum RunAction {
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Subcommand, Debug)]
enum MhdAction {
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
        /// Initial magnetic field.
        #[arg(long, value_enum, default_value_t = InitArg::Random)]
        binit: InitArg,
        #[arg(long)]
        binit_file: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Points per axis.
    #[arg(long, visible_alias = "N", default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Period of the torus.
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    length: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report file (`*.json`) or output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 2.5, allow_negative_numbers = true)]
    s: f64,
    #[arg(long, default_value = "4", value_parser = parse_exponent)]
    p: f64,
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    q: f64,
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    r: f64,
    /// Use the homogeneous norm.
    #[arg(long)]
    homogeneous: bool,
    /// Smallest window is L·2^-kmax; defaults to the grid spacing.
    #[arg(long)]
    kmax: Option<u32>,
    /// Window corners on every stride-th node.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Largest wavenumber of random fields; defaults to N/4.
    #[arg(long)]
    band_kmax: Option<i64>,
    /// Spectral slope of random fields.
    #[arg(long, default_value_t = 1.0)]
    slope: f64,
    /// Root-mean-square value of random fields.
    #[arg(long, default_value_t = 1.0)]
    rms: f64,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = InitArg::TaylorGreen)]
    init: InitArg,
    /// Vector field stem for `--init file`.
    #[arg(long)]
    init_file: Option<PathBuf>,
    /// Amplitude of generated initial data.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Direct)]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 30)]
    max_iter: usize,
    /// Steps between snapshots; 0 stores about ten.
    #[arg(long, default_value_t = 0)]
    snapshot_every: usize,
    /// Steps between diagnostic samples.
    #[arg(long, default_value_t = 1)]
    diag_stride: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum InitArg {
    TaylorGreen,
    Random,
    File,
    Zero,
    Aligned,
}

impl From<InitArg> for InitKind {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::TaylorGreen => InitKind::TaylorGreen,
            InitArg::Random => InitKind::Random,
            InitArg::File => InitKind::File,
            InitArg::Zero => InitKind::Zero,
            InitArg::Aligned => InitKind::Aligned,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SchemeArg {
    Direct,
    Iterate,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MoserArg {
    Homogeneous,
    Inhomogeneous,
    SmoothnessShift,
}

impl From<MoserArg> for MoserVariant {
    fn from(a: MoserArg) -> Self {
        match a {
            MoserArg::Homogeneous => MoserVariant::Homogeneous,
            MoserArg::Inhomogeneous => MoserVariant::Inhomogeneous,
            MoserArg::SmoothnessShift => MoserVariant::SmoothnessShift,
        }
    }
}

fn base_config(command: Command, c: &Common) -> bmtk::Result<ExperimentConfig> {
    let grid = Grid::new(c.dim, c.grid, c.length)?;
    let mut cfg = ExperimentConfig::new(command, grid);
    cfg.bm = BMParams::new(c.s, c.p, c.q, c.r, c.homogeneous)?;
    let full = WindowSet::full(&grid);
    cfg.window = WindowSet::new(&grid, c.kmax.unwrap_or(full.kmax), c.stride)?;
    cfg.seed = c.seed;
    cfg.band.kmax = c.band_kmax.unwrap_or(cfg.band.kmax);
    cfg.band.slope = c.slope;
    cfg.band.rms = c.rms;
    cfg.output = c.out.clone();
    Ok(cfg)
}

fn apply_solver(cfg: &mut ExperimentConfig, s: &SolverArgs) {
    let k = &mut cfg.solver;
    k.init = s.init.into();
    k.init_file = s.init_file.clone();
    k.amplitude = s.amplitude;
    k.horizon = s.horizon;
    k.dt = s.dt;
    k.scheme = match s.scheme {
        SchemeArg::Direct => Scheme::Direct,
        SchemeArg::Iterate => Scheme::Iterate,
    };
    k.tol = s.tol;
    k.max_iter = s.max_iter;
    k.snapshot_every = s.snapshot_every;
    k.diag_stride = s.diag_stride;
}

fn build_config(cmd: Cmd) -> bmtk::Result<ExperimentConfig> {
    Ok(match cmd {
        Cmd::Norms { common, input } => {
            let mut cfg = base_config(Command::Norms, &common)?;
            cfg.input = input;
            cfg
        }
        Cmd::Verify {
            common,
            lemma,
            trials,
            max_ratio,
            moser_variant,
            horizon,
            dt,
            amplitude,
        } => {
            let lemma: LemmaId = lemma.parse()?;
            let mut cfg = base_config(Command::Verify, &common)?;
            cfg.lemma = Some(lemma);
            cfg.trials = trials;
            cfg.max_ratio = max_ratio;
            cfg.moser_variant = moser_variant.into();
            cfg.solver.horizon = horizon;
            cfg.solver.dt = dt;
            cfg.solver.amplitude = amplitude;
            cfg
        }
        Cmd::Euler {
            action: RunAction::Run { common, solver },
        } => {
            let mut cfg = base_config(Command::Euler, &common)?;
            apply_solver(&mut cfg, &solver);
            cfg
        }
        Cmd::Mhd {
            action:
                MhdAction::Run {
                    common,
                    solver,
                    binit,
                    binit_file,
                },
        } => {
            let mut cfg = base_config(Command::Mhd, &common)?;
            apply_solver(&mut cfg, &solver);
            cfg.solver.binit = binit.into();
            cfg.solver.binit_file = binit_file;
            cfg
        }
        Cmd::Diagnose {
            common,
            run,
            expect_hash,
        } => {
            let mut cfg = base_config(Command::Diagnose, &common)?;
            cfg.input = Some(run);
            cfg.expect_hash = expect_hash;
            cfg
        }
        Cmd::Corpus { common, trials } => {
            let mut cfg = base_config(Command::Corpus, &common)?;
            cfg.trials = trials;
            cfg
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json_only = cli.json_only;
    let result = harness::configure_threads()
        .and_then(|_| build_config(cli.command))
        .and_then(|cfg| harness::run_experiment(&cfg));
    match result {
        Ok(outcome) => {
            if json_only {
                println!("{}", outcome.report);
            } else {
                println!("{}", outcome.summary);
                println!("report: {}", outcome.report_path.display());
                if !outcome.passed {
                    eprintln!("assertion failed");
                }
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
