//! The analyses behind each subcommand. Every analysis turns a resolved
//! [`RunConfig`] into a [`Report`]; writing it out is the caller's job.

use std::fmt;
use std::path::PathBuf;

use ediqkd_core::adversary::{eve_information_with, secrecy_distance, HolevoModel};
use ediqkd_core::classical::{FgcResult, Method};
use ediqkd_core::keyrate::{
    asymptotic_rate_diqkd, asymptotic_rate_diqkd_raw, asymptotic_rate_ediqkd_with, critical_qber, finite_rate_diqkd,
    finite_rate_ediqkd, holevo_model_selection, min_key_rounds, min_key_rounds_diqkd, min_key_rounds_ediqkd,
    FiniteKeyParams,
};
use ediqkd_core::photonic::{
    compared_rates, efactor_vs_efficiency, rate_with_imperfections, EfficiencySearch, RateSetup,
};
use ediqkd_core::protocol::{RoundKind, SessionResult};
use ediqkd_core::tomography::MeasurementFrame;
use ediqkd_core::{Error as CoreError, Sign};
use serde::Serialize;

use crate::cache::FgcCache;
use crate::config::{
    BoundConfig, EfactorConfig, EfactorEtaConfig, FiniteConfig, PhotonicConfig, RateConfig, RunConfig, SecrecyConfig,
    SimulateConfig, SurfaceConfig,
};
use crate::error::{AppError, AppResult};
use crate::output::{num, opt_num, schema, Table};
use crate::parallel::{self, map_ordered, Workers};

/// Zero crossings of the EDIQKD rate in the default sweeps lie below this.
const CRITICAL_SEARCH_HI: f64 = 1.0 / 6.0;
/// Target used when asking for the first `n` with a strictly positive rate.
const POSITIVE_RATE: f64 = f64::MIN_POSITIVE;

#[derive(Debug, Clone, Default)]
pub struct Context {
    pub workers: Workers,
    /// `None` disables the classical-bound cache.
    pub cache: Option<FgcCache>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub notes: Vec<(String, String)>,
    pub table: Option<Table>,
    /// Extra CSV files requested by the configuration.
    pub files: Vec<(PathBuf, Table)>,
    /// Human-readable lines; for `simulate` this is the structured summary.
    pub summary: Vec<String>,
}

impl Report {
    fn note(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.notes.push((key.into(), value.to_string()));
    }

    pub fn note_value(&self, key: &str) -> Option<&str> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Bound,
    Rate,
    Finite,
    Efactor,
    Secrecy,
    Photonic,
    EfactorEta,
    Surface,
    Simulate,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Bound => "bound",
            Analysis::Rate => "rate",
            Analysis::Finite => "finite",
            Analysis::Efactor => "efactor",
            Analysis::Secrecy => "secrecy",
            Analysis::Photonic => "photonic",
            Analysis::EfactorEta => "efactor-eta",
            Analysis::Surface => "surface",
            Analysis::Simulate => "simulate",
        }
    }

    /// Keeps the global keys that affect results and this analysis' table,
    /// filling it with defaults when absent.
    pub fn resolve(self, cfg: &RunConfig) -> RunConfig {
        let mut out = RunConfig {
            seed: Some(cfg.seed()),
            ..RunConfig::default()
        };
        match self {
            Analysis::Bound => out.bound = Some(cfg.bound.unwrap_or_default()),
            Analysis::Rate => out.rate = Some(cfg.rate.unwrap_or_default()),
            Analysis::Finite => out.finite = Some(cfg.finite.clone().unwrap_or_default()),
            Analysis::Efactor => out.efactor = Some(cfg.efactor.clone().unwrap_or_default()),
            Analysis::Secrecy => out.secrecy = Some(cfg.secrecy.unwrap_or_default()),
            Analysis::Photonic => out.photonic = Some(cfg.photonic.clone().unwrap_or_default()),
            Analysis::EfactorEta => out.efactor_eta = Some(cfg.efactor_eta.clone().unwrap_or_default()),
            Analysis::Surface => out.surface = Some(cfg.surface.clone().unwrap_or_default()),
            Analysis::Simulate => out.simulate = Some(cfg.simulate.clone().unwrap_or_default()),
        }
        out
    }

    /// Runs on a configuration produced by [`Analysis::resolve`].
    pub fn run(self, cfg: &RunConfig, ctx: &Context) -> AppResult<Report> {
        cfg.validate()?;
        let missing = || AppError::Config(format!("no [{}] table", self.name()));
        match self {
            Analysis::Bound => bound(&cfg.bound.ok_or_else(missing)?, ctx).map(|(_, r)| r),
            Analysis::Rate => rate(&cfg.rate.ok_or_else(missing)?),
            Analysis::Finite => finite(cfg.finite.as_ref().ok_or_else(missing)?),
            Analysis::Efactor => efactor(cfg.efactor.as_ref().ok_or_else(missing)?),
            Analysis::Secrecy => secrecy(&cfg.secrecy.ok_or_else(missing)?),
            Analysis::Photonic => photonic(cfg.photonic.as_ref().ok_or_else(missing)?, ctx),
            Analysis::EfactorEta => efactor_eta(cfg.efactor_eta.as_ref().ok_or_else(missing)?, ctx),
            Analysis::Surface => surface(cfg.surface.as_ref().ok_or_else(missing)?, ctx),
            Analysis::Simulate => simulate(cfg.simulate.as_ref().ok_or_else(missing)?, cfg.seed(), ctx),
        }
    }
}

/// Classical bound of `frame`, from the cache when enabled.
pub fn classical_bound(frame: &MeasurementFrame, method: Method, ctx: &Context) -> AppResult<(FgcResult, bool)> {
    let compute = || parallel::maximize_fgc(frame, method, ctx.workers);
    match &ctx.cache {
        Some(c) => c.get_or_compute(frame, method, compute),
        None => Ok((compute(), false)),
    }
}

fn f_gc(frame: &MeasurementFrame, ctx: &Context) -> AppResult<f64> {
    Ok(classical_bound(frame, Method::Both, ctx)?.0.f_gc)
}

pub fn bound(cfg: &BoundConfig, ctx: &Context) -> AppResult<(FgcResult, Report)> {
    let frame = cfg.frame.frame();
    let local = Context {
        workers: ctx.workers,
        cache: if cfg.cache { ctx.cache.clone() } else { None },
    };
    let (res, cached) = classical_bound(&frame, cfg.method.into(), &local)?;
    let mut report = Report::default();
    report.note("f_gc", num(res.f_gc));
    if let Some(v) = res.vertex {
        report.note("vertex_index", v.index);
        report.note("vertex_value", num(v.value));
    }
    report.note("cached", cached);
    let mut t = Table::new(schema::OMEGA);
    for (xi, row) in res.model.omega.rows().iter().enumerate() {
        for (mu, w) in row.iter().enumerate() {
            t.push(vec![xi.to_string(), mu.to_string(), num(*w)]);
        }
    }
    report.table = Some(t);
    report.summary.push(format!("F_GC = {:.10}", res.f_gc));
    Ok((res, report))
}

pub fn rate(cfg: &RateConfig) -> AppResult<Report> {
    let model: HolevoModel = cfg.holevo.into();
    let mut t = Table::new(schema::RATE);
    for q in cfg.qber.values() {
        let e = asymptotic_rate_ediqkd_with(q, model)?.max(0.0);
        let d = asymptotic_rate_diqkd(q.min(0.5))?;
        t.push(vec![num(q), num(e), num(d)]);
    }
    let mut report = Report::default();
    let hi = CRITICAL_SEARCH_HI.min(model.max_qber() - 1e-12);
    let qe = critical_qber(|q| asymptotic_rate_ediqkd_with(q, model), 1e-4, hi)?;
    let qd = critical_qber(asymptotic_rate_diqkd_raw, 1e-4, 0.14)?;
    report.note("holevo_model", model.name());
    report.note("critical_qber_ediqkd", num(qe));
    report.note("critical_qber_diqkd", num(qd));
    let sel = holevo_model_selection(0.069)?;
    for e in sel.entries {
        report.note(format!("critical_qber[{}]", e.model.name()), num(e.critical_qber));
    }
    report.note("model_closest_to_0.069", sel.selected.name());
    report
        .summary
        .push(format!("critical QBER: EDIQKD {:.4}, DIQKD {:.4}", qe, qd));
    report.summary.push(format!(
        "Holevo model closest to a 6.9% crossing: {}",
        sel.selected.name()
    ));
    report.table = Some(t);
    Ok(report)
}

/// First `n` with a strictly positive rate.
pub fn first_positive_n(q: f64, params: &FiniteKeyParams) -> AppResult<(f64, f64)> {
    let f = 1.0 - 1.5 * q;
    let e = min_key_rounds(
        |n| finite_rate_ediqkd(q, f, &params.with_n(n)).map(|r| r.raw),
        POSITIVE_RATE,
    )?;
    let d = min_key_rounds(
        |n| finite_rate_diqkd(q, &params.with_n(n)).map(|r| r.raw),
        POSITIVE_RATE,
    )?;
    Ok((e, d))
}

pub fn finite(cfg: &FiniteConfig) -> AppResult<Report> {
    let params = cfg.key.params()?;
    let mut t = Table::new(schema::FINITE);
    let mut report = Report::default();
    for &q in &cfg.qbers {
        let f = 1.0 - 1.5 * q;
        for x in cfg.log10_n.values() {
            let p = params.with_n(10f64.powf(x));
            let e = finite_rate_ediqkd(q, f, &p)?.r;
            let d = finite_rate_diqkd(q, &p)?.r;
            t.push(vec![num(q), num(p.n), num(e), num(d)]);
        }
        match first_positive_n(q, &params) {
            Ok((e, d)) => {
                report.note(
                    format!("first_positive_n[Q={q}]"),
                    format!("ediqkd {} diqkd {}", num(e), num(d)),
                );
            }
            Err(AppError::Core(CoreError::NoSolution(_))) => report.note(format!("first_positive_n[Q={q}]"), "none"),
            Err(e) => return Err(e),
        }
    }
    report.table = Some(t);
    Ok(report)
}

fn factor_row(label: f64, ne: Option<f64>, nd: Option<f64>) -> Vec<String> {
    let ratio = ne.zip(nd).map(|(e, d)| d / e);
    vec![
        num(label),
        opt_num(ne),
        opt_num(nd),
        opt_num(ratio),
        opt_num(ne.map(f64::log10)),
        opt_num(nd.map(f64::log10)),
        opt_num(ratio.map(f64::log10)),
    ]
}

/// `Ok(None)` for a missing solution, other errors propagate.
fn solved<T>(r: ediqkd_core::Result<T>) -> AppResult<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(CoreError::NoSolution(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn require_any(t: &Table, col: &str) -> AppResult<()> {
    if t.values(col).iter().any(Option::is_some) {
        Ok(())
    } else {
        Err(CoreError::NoSolution("no row has a solution").into())
    }
}

pub fn efactor(cfg: &EfactorConfig) -> AppResult<Report> {
    let params = cfg.key.params()?;
    let mut t = Table::new(schema::EFACTOR);
    for &q in &cfg.qbers {
        let ne = solved(min_key_rounds_ediqkd(q, &params, cfg.target))?;
        let nd = solved(min_key_rounds_diqkd(q, &params, cfg.target))?;
        t.push(factor_row(q, ne, nd));
    }
    require_any(&t, "E_f")?;
    Ok(Report {
        table: Some(t),
        ..Report::default()
    })
}

pub fn secrecy(cfg: &SecrecyConfig) -> AppResult<Report> {
    let mut t = Table::new(schema::SECRECY);
    for q in cfg.qber.values() {
        t.push(vec![
            num(q),
            num(secrecy_distance(q)?),
            num(eve_information_with(q, HolevoModel::NumericMixture)?),
            num(eve_information_with(q, HolevoModel::ClosedForm)?),
        ]);
    }
    let mut report = Report::default();
    report.note("D_at_0.069", num(secrecy_distance(0.069)?));
    report.table = Some(t);
    Ok(report)
}

fn rate_setup(frame: MeasurementFrame, f_gc: f64, key: FiniteKeyParams, total_rounds: f64) -> RateSetup {
    RateSetup {
        total_rounds,
        ..RateSetup::new(frame, f_gc, key)
    }
}

pub fn photonic(cfg: &PhotonicConfig, ctx: &Context) -> AppResult<Report> {
    if !cfg.optimize && cfg.preprocessing.iter().any(|&p| p) {
        return Err(AppError::Config("preprocessing needs optimize = true".into()));
    }
    let frame = cfg.frame.frame();
    let f_gc = f_gc(&frame, ctx)?;
    let key = cfg.key.params()?;
    let etas = cfg.eta.values();
    let mut t = Table::new(schema::PHOTONIC);
    let mut report = Report::default();
    report.note("f_gc", num(f_gc));
    for &f in &cfg.f_sources {
        for &pre in &cfg.preprocessing {
            let base = cfg.source.params(1.0, f)?;
            let setup = rate_setup(frame.clone(), f_gc, key, cfg.total_rounds);
            let search = EfficiencySearch {
                preprocessing: pre,
                threshold: cfg.threshold,
                ..EfficiencySearch::new(base, setup.clone())
            };
            let rows = map_ordered(etas.len(), ctx.workers, |k| -> ediqkd_core::Result<Option<_>> {
                let eta = etas[k];
                if cfg.optimize {
                    Ok(search.optimized_rate(eta).map(|o| (o.params, o.rate)))
                } else {
                    let p = ediqkd_core::photonic::PhotonicParams { eta, ..base };
                    Ok(Some((p, rate_with_imperfections(&p, &setup)?)))
                }
            });
            for (eta, row) in etas.iter().zip(rows) {
                let mut cells = vec![num(f), pre.to_string(), num(*eta)];
                match row? {
                    Some((p, r)) => cells.extend([
                        num(r.rate()),
                        num(p.alpha.to_degrees()),
                        num(p.mu),
                        num(p.p_post),
                        num(p.p_noise),
                        num(r.f_expt),
                        num(r.qber),
                        r.certified.to_string(),
                    ]),
                    None => cells.extend((0..8).map(|_| String::new())),
                }
                t.push(cells);
            }
            if cfg.find_threshold && cfg.optimize {
                let key = format!("eta_min[f_source={f},preprocessing={pre}]");
                match parallel::required_efficiency(&search, ctx.workers) {
                    Ok(th) => {
                        report.summary.push(format!(
                            "F_source {f}, preprocessing {pre}: required efficiency {:.4}",
                            th.eta_min
                        ));
                        report.note(key, num(th.eta_min));
                    }
                    Err(AppError::Core(CoreError::NoSolution(_))) => report.note(key, "none"),
                    Err(e) => return Err(e),
                }
            }
        }
    }
    report.table = Some(t);
    Ok(report)
}

pub fn efactor_eta(cfg: &EfactorEtaConfig, ctx: &Context) -> AppResult<Report> {
    let frame = cfg.frame.frame();
    let f_gc = f_gc(&frame, ctx)?;
    let key = cfg.key.params()?;
    let setup = RateSetup::new(frame, f_gc, key);
    let rows = map_ordered(cfg.etas.len(), ctx.workers, |k| -> AppResult<_> {
        let p = cfg.source.params(cfg.etas[k], cfg.f_source)?;
        solved(efactor_vs_efficiency(&p, &setup, cfg.target))
    });
    let mut t = Table::new(schema::EFACTOR_ETA);
    for (&eta, row) in cfg.etas.iter().zip(rows) {
        let ef = row?;
        t.push(factor_row(eta, ef.map(|e| e.n_ediqkd), ef.map(|e| e.n_diqkd)));
    }
    require_any(&t, "E_f")?;
    let mut report = Report::default();
    report.note("f_gc", num(f_gc));
    report.table = Some(t);
    Ok(report)
}

pub fn surface(cfg: &SurfaceConfig, ctx: &Context) -> AppResult<Report> {
    let frame = cfg.frame.frame();
    let f_gc = f_gc(&frame, ctx)?;
    let setup = RateSetup::new(frame, f_gc, cfg.key.params()?);
    let etas = cfg.eta.values();
    let ns: Vec<f64> = cfg.log10_n.values().into_iter().map(|x| 10f64.powf(x)).collect();
    let rows = map_ordered(etas.len(), ctx.workers, |k| -> AppResult<Vec<Vec<String>>> {
        let p = cfg.source.params(etas[k], cfg.f_source)?;
        ns.iter()
            .map(|&n| {
                let r = compared_rates(&p, &setup, n)?;
                let e = if r.certified { r.ediqkd.max(0.0) } else { 0.0 };
                Ok(vec![
                    num(etas[k]),
                    num(n),
                    num(e),
                    num(r.diqkd.max(0.0)),
                    r.certified.to_string(),
                ])
            })
            .collect()
    });
    let mut t = Table::new(schema::SURFACE);
    for r in rows {
        r?.into_iter().for_each(|row| t.push(row));
    }
    let mut report = Report::default();
    report.note("f_gc", num(f_gc));
    report.table = Some(t);
    Ok(report)
}

fn sign_cell(s: Option<Sign>) -> String {
    s.map(|s| s.as_i8().to_string()).unwrap_or_default()
}

pub fn records_table(res: &SessionResult) -> Table {
    let mut t = Table::new(schema::RECORDS);
    for r in &res.records {
        t.push(vec![
            r.k.to_string(),
            r.i.to_string(),
            sign_cell(r.a),
            r.j.to_string(),
            sign_cell(r.b),
            r.kind.name().to_string(),
        ]);
    }
    t
}

pub fn stats_table(res: &SessionResult) -> Table {
    let mut t = Table::new(schema::STATS);
    for cell in res.stats.cells() {
        let count = cell.count.map(|c| c.to_string()).unwrap_or_default();
        t.push(vec![
            cell.i.to_string(),
            cell.a.as_i8().to_string(),
            cell.j.to_string(),
            cell.b.as_i8().to_string(),
            num(cell.probability),
            count,
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSummary {
    pub blocks: usize,
    pub statistic: f64,
    pub max_z: f64,
    pub flagged: bool,
}

/// Structured summary of a session, written as TOML.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionSummary {
    pub rounds: u64,
    pub seed: u64,
    pub channel: String,
    pub f_gc: f64,
    pub f_expt: f64,
    pub aborted: bool,
    pub q_emp: f64,
    pub key_rounds: usize,
    pub test_rounds: usize,
    pub discarded_rounds: usize,
    pub settings: Vec<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_check: Option<BlockSummary>,
}

impl SessionSummary {
    pub fn new(cfg: &SimulateConfig, seed: u64, res: &SessionResult) -> Self {
        Self {
            rounds: cfg.rounds,
            seed,
            channel: cfg.channel.to_string(),
            f_gc: res.f_gc,
            f_expt: res.f_expt,
            aborted: res.aborted,
            q_emp: res.q_emp,
            key_rounds: res.count(RoundKind::Key),
            test_rounds: res.count(RoundKind::Test),
            discarded_rounds: res.count(RoundKind::Discarded),
            settings: res.settings.iter().map(|r| r.to_vec()).collect(),
            block_check: res.block_report.as_ref().map(|b| BlockSummary {
                blocks: b.blocks.len(),
                statistic: b.statistic,
                max_z: b.max_z,
                flagged: b.flagged,
            }),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("summary serialises")
    }
}

pub fn run_simulation(cfg: &SimulateConfig, seed: u64, ctx: &Context) -> AppResult<SessionResult> {
    let session = cfg.session(seed)?;
    let f_gc = match cfg.f_gc {
        Some(f) => f,
        None => f_gc(&session.frame, ctx)?,
    };
    parallel::run_session(&session, f_gc, ctx.workers)
}

pub fn simulate(cfg: &SimulateConfig, seed: u64, ctx: &Context) -> AppResult<Report> {
    let res = run_simulation(cfg, seed, ctx)?;
    let mut report = Report::default();
    let summary = SessionSummary::new(cfg, seed, &res);
    report.summary = summary.to_toml().lines().map(str::to_string).collect();
    report.note("f_expt", num(res.f_expt));
    report.note("q_emp", num(res.q_emp));
    report.note("aborted", res.aborted);
    if let Some(p) = &cfg.records {
        report.files.push((p.clone(), records_table(&res)));
    }
    if let Some(p) = &cfg.stats {
        report.files.push((p.clone(), stats_table(&res)));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ChannelConfig, Grid};

    #[test]
    fn secrecy_table_shape() {
        let r = secrecy(&SecrecyConfig {
            qber: Grid::new(0.0, 0.1, 5),
        })
        .unwrap();
        let t = r.table.unwrap();
        assert_eq!(t.rows.len(), 5);
        assert_eq!(t.values("D")[0], Some(0.0));
    }

    #[test]
    fn efactor_without_any_solution_is_no_solution() {
        let cfg = EfactorConfig {
            qbers: vec![0.12],
            ..EfactorConfig::default()
        };
        assert_eq!(efactor(&cfg).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn simulate_writes_summary_and_tables() {
        let cfg = SimulateConfig {
            rounds: 2_000,
            channel: ChannelConfig::Flip { q: 0.05 },
            f_gc: Some(0.85),
            records: Some("r.csv".into()),
            stats: Some("s.csv".into()),
            ..SimulateConfig::default()
        };
        let r = simulate(&cfg, 3, &Context::default()).unwrap();
        assert!(r.summary.iter().any(|l| l.starts_with("f_expt = ")));
        assert_eq!(r.files[0].1.rows.len(), 2_000);
        assert_eq!(r.files[1].1.rows.len(), 36);
    }

    #[test]
    fn resolve_keeps_one_table() {
        let cfg = RunConfig {
            threads: Some(3),
            secrecy: Some(SecrecyConfig::default()),
            ..RunConfig::default()
        };
        let r = Analysis::Rate.resolve(&cfg);
        assert!(r.rate.is_some() && r.secrecy.is_none() && r.threads.is_none());
        assert_eq!(r.seed, Some(crate::config::DEFAULT_SEED));
    }
}
