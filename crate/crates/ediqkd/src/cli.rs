//! Command line front end.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::cache::FgcCache;
use crate::commands::{Analysis, Context, Report};
use crate::config::{
    ChannelConfig, EfactorConfig, EfactorEtaConfig, FiniteConfig, FrameName, Grid, HolevoName, KeyConfig, LogName,
    MethodName, NoClickName, PhotonicConfig, RateConfig, RunConfig, SecrecyConfig, SettingsConfig, SurfaceConfig,
};
use crate::error::{AppError, AppResult};
use crate::output::{write_csv, Header};
use crate::parallel::Workers;

#[derive(Debug, Parser)]
#[command(
    name = "ediqkd",
    version,
    about = "Prepare-and-measure DIQKD workbench",
    arg_required_else_help = true
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; all available cores when absent.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Do not read or write the classical-bound cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Rotated,
    Aligned,
}

impl From<FrameArg> for FrameName {
    fn from(f: FrameArg) -> Self {
        match f {
            FrameArg::Rotated => FrameName::Rotated,
            FrameArg::Aligned => FrameName::Aligned,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical bound F_GC and the optimal classical transition matrix.
    Bound {
        #[arg(long, value_enum)]
        frame: Option<FrameArg>,
        #[arg(long, value_enum)]
        method: Option<MethodName>,
    },
    /// Asymptotic key rates against QBER.
    Rate {
        #[arg(long, value_enum)]
        holevo: Option<HolevoName>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Finite-size key rates against the number of key rounds.
    Finite {
        /// QBER values (repeatable).
        #[arg(long = "q")]
        qbers: Vec<f64>,
        #[arg(long, value_enum)]
        log: Option<LogName>,
    },
    /// Minimum key rounds of both protocols and their ratio.
    Efactor {
        #[arg(long = "q")]
        qbers: Vec<f64>,
        #[arg(long, value_enum)]
        log: Option<LogName>,
    },
    /// Trace distance to the ideal separable process against QBER.
    Secrecy {
        #[arg(long)]
        points: Option<usize>,
    },
    /// Optimised key rate against detection efficiency.
    Photonic {
        /// Source fidelities (repeatable).
        #[arg(long = "f-source")]
        f_sources: Vec<f64>,
        #[arg(long, value_enum)]
        no_click: Option<NoClickName>,
        /// Also optimise post-selection and noisy preprocessing.
        #[arg(long)]
        preprocessing: bool,
        #[arg(long, value_enum)]
        log: Option<LogName>,
    },
    /// Minimum key rounds of both protocols against detection efficiency.
    EfactorEta {
        #[arg(long)]
        f_source: Option<f64>,
        #[arg(long, value_enum)]
        no_click: Option<NoClickName>,
        #[arg(long, value_enum)]
        log: Option<LogName>,
    },
    /// Key rates of both protocols over detection efficiency and key rounds.
    Surface {
        #[arg(long)]
        f_source: Option<f64>,
    },
    /// Monte Carlo run of the protocol.
    Simulate {
        #[arg(long)]
        rounds: Option<u64>,
        /// ideal, flip:Q, uqcm:P, depolarizing:Q or photonic:ETA
        #[arg(long)]
        channel: Option<ChannelConfig>,
        /// uniform, uniform:SACRIFICE or biased:GAMMA
        #[arg(long)]
        settings: Option<SettingsConfig>,
        /// Number of blocks for the homogeneity check.
        #[arg(long)]
        blocks: Option<usize>,
        /// Per-round CSV output.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Test-statistics CSV output.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        f_gc: Option<f64>,
    },
    /// Regenerates the data behind a figure or table.
    Repro {
        #[arg(value_enum)]
        id: ReproId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproId {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Table2,
    Table3,
}

impl ReproId {
    pub fn name(self) -> &'static str {
        match self {
            ReproId::Fig3 => "fig3",
            ReproId::Fig4 => "fig4",
            ReproId::Fig5 => "fig5",
            ReproId::Fig6 => "fig6",
            ReproId::Fig7 => "fig7",
            ReproId::Table2 => "table2",
            ReproId::Table3 => "table3",
        }
    }

    /// The analysis and configuration that produce this item.
    pub fn preset(self) -> (Analysis, RunConfig) {
        let decimal = KeyConfig {
            log: LogName::Decimal,
            ..KeyConfig::default()
        };
        let mut cfg = RunConfig::default();
        let analysis = match self {
            ReproId::Fig3 => {
                cfg.finite = Some(FiniteConfig {
                    qbers: vec![0.005, 0.025, 0.05],
                    log10_n: Grid::new(2.0, 12.0, 201),
                    key: decimal,
                });
                Analysis::Finite
            }
            ReproId::Fig4 => {
                cfg.photonic = Some(PhotonicConfig {
                    eta: Grid::new(0.8, 1.0, 41),
                    f_sources: vec![0.9952, 0.998, 1.0],
                    preprocessing: vec![false, true],
                    key: decimal,
                    ..PhotonicConfig::default()
                });
                Analysis::Photonic
            }
            ReproId::Fig5 => {
                cfg.surface = Some(SurfaceConfig {
                    key: decimal,
                    ..SurfaceConfig::default()
                });
                Analysis::Surface
            }
            ReproId::Fig6 => {
                cfg.rate = Some(RateConfig {
                    qber: Grid::new(0.0, 0.1, 201),
                    holevo: HolevoName::AverageState,
                });
                Analysis::Rate
            }
            ReproId::Fig7 => {
                cfg.secrecy = Some(SecrecyConfig {
                    qber: Grid::new(0.0, 0.15, 50),
                });
                Analysis::Secrecy
            }
            ReproId::Table2 => {
                cfg.efactor = Some(EfactorConfig {
                    key: decimal,
                    ..EfactorConfig::default()
                });
                Analysis::Efactor
            }
            ReproId::Table3 => {
                cfg.efactor_eta = Some(EfactorEtaConfig {
                    key: decimal,
                    ..EfactorEtaConfig::default()
                });
                Analysis::EfactorEta
            }
        };
        (analysis, analysis.resolve(&cfg))
    }
}

fn set_log(key: &mut KeyConfig, log: Option<LogName>) {
    if let Some(l) = log {
        key.log = l;
    }
}

/// Folds subcommand flags into the resolved configuration.
fn apply_flags(command: &Command, cfg: &mut RunConfig) {
    match command {
        Command::Bound { frame, method } => {
            let b = cfg.bound.get_or_insert_with(Default::default);
            if let Some(f) = frame {
                b.frame = (*f).into();
            }
            if let Some(m) = method {
                b.method = *m;
            }
        }
        Command::Rate { holevo, points } => {
            let r = cfg.rate.get_or_insert_with(Default::default);
            if let Some(h) = holevo {
                r.holevo = *h;
            }
            if let Some(p) = points {
                r.qber.points = *p;
            }
        }
        Command::Finite { qbers, log } => {
            let f = cfg.finite.get_or_insert_with(Default::default);
            if !qbers.is_empty() {
                f.qbers = qbers.clone();
            }
            set_log(&mut f.key, *log);
        }
        Command::Efactor { qbers, log } => {
            let e = cfg.efactor.get_or_insert_with(Default::default);
            if !qbers.is_empty() {
                e.qbers = qbers.clone();
            }
            set_log(&mut e.key, *log);
        }
        Command::Secrecy { points } => {
            let s = cfg.secrecy.get_or_insert_with(Default::default);
            if let Some(p) = points {
                s.qber.points = *p;
            }
        }
        Command::Photonic {
            f_sources,
            no_click,
            preprocessing,
            log,
        } => {
            let p = cfg.photonic.get_or_insert_with(Default::default);
            if !f_sources.is_empty() {
                p.f_sources = f_sources.clone();
            }
            if let Some(n) = no_click {
                p.source.no_click = *n;
            }
            if *preprocessing {
                p.preprocessing = vec![true];
            }
            set_log(&mut p.key, *log);
        }
        Command::EfactorEta {
            f_source,
            no_click,
            log,
        } => {
            let e = cfg.efactor_eta.get_or_insert_with(Default::default);
            if let Some(f) = f_source {
                e.f_source = *f;
            }
            if let Some(n) = no_click {
                e.source.no_click = *n;
            }
            set_log(&mut e.key, *log);
        }
        Command::Surface { f_source } => {
            let s = cfg.surface.get_or_insert_with(Default::default);
            if let Some(f) = f_source {
                s.f_source = *f;
            }
        }
        Command::Simulate {
            rounds,
            channel,
            settings,
            blocks,
            records,
            stats,
            f_gc,
        } => {
            let s = cfg.simulate.get_or_insert_with(Default::default);
            if let Some(r) = rounds {
                s.rounds = *r;
            }
            if let Some(c) = channel {
                s.channel = *c;
            }
            if let Some(m) = settings {
                s.settings = *m;
            }
            if blocks.is_some() {
                s.blocks = *blocks;
            }
            if records.is_some() {
                s.records.clone_from(records);
            }
            if stats.is_some() {
                s.stats.clone_from(stats);
            }
            if f_gc.is_some() {
                s.f_gc = *f_gc;
            }
        }
        Command::Repro { .. } => {}
    }
}

fn analysis_of(command: &Command) -> Analysis {
    match command {
        Command::Bound { .. } => Analysis::Bound,
        Command::Rate { .. } => Analysis::Rate,
        Command::Finite { .. } => Analysis::Finite,
        Command::Efactor { .. } => Analysis::Efactor,
        Command::Secrecy { .. } => Analysis::Secrecy,
        Command::Photonic { .. } => Analysis::Photonic,
        Command::EfactorEta { .. } => Analysis::EfactorEta,
        Command::Surface { .. } => Analysis::Surface,
        Command::Simulate { .. } => Analysis::Simulate,
        Command::Repro { id } => id.preset().0,
    }
}

fn create(path: &Path) -> AppResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn emit(
    label: String,
    cfg: &RunConfig,
    report: &Report,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> AppResult<()> {
    let header = |notes: Vec<(String, String)>| Header {
        command: label.clone(),
        notes,
        config: cfg.clone(),
    };
    for (path, table) in &report.files {
        let mut w = create(path)?;
        write_csv(&mut w, &header(vec![]), table)?;
        w.flush()?;
    }
    match (&report.table, output) {
        (Some(table), Some(path)) => {
            let mut w = create(path)?;
            write_csv(&mut w, &header(report.notes.clone()), table)?;
            w.flush()?;
            for l in &report.summary {
                writeln!(out, "{l}")?;
            }
        }
        (Some(table), None) => {
            write_csv(out, &header(report.notes.clone()), table)?;
            for l in &report.summary {
                writeln!(err, "{l}")?;
            }
        }
        (None, Some(path)) => {
            let mut w = create(path)?;
            for l in &report.summary {
                writeln!(w, "{l}")?;
            }
            w.flush()?;
        }
        (None, None) => {
            for l in &report.summary {
                writeln!(out, "{l}")?;
            }
        }
    }
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> AppResult<()> {
    let file_cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let analysis = analysis_of(&cli.command);
    let (label, mut cfg) = match &cli.command {
        Command::Repro { id } => {
            if cli.config.is_some() {
                return Err(AppError::Config(
                    "repro uses fixed parameters and takes no --config".into(),
                ));
            }
            (format!("repro {}", id.name()), id.preset().1)
        }
        cmd => {
            let mut c = analysis.resolve(&file_cfg);
            apply_flags(cmd, &mut c);
            (analysis.name().to_string(), c)
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    cfg.validate()?;
    let threads = cli.threads.or(file_cfg.threads);
    let ctx = Context {
        workers: match threads {
            Some(n) => Workers::new(n)?,
            None => Workers::available(),
        },
        cache: (!cli.no_cache).then(FgcCache::from_env),
    };
    let output = cli.output.or(file_cfg.output);
    let report = analysis.run(&cfg, &ctx)?;
    emit(label, &cfg, &report, output.as_deref(), out, err)
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{text}");
            return e.exit_code();
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
