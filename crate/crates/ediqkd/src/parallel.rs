//! Thread-parallel drivers. Work is cut into a fixed list of tasks that
//! does not depend on the worker count, and results are merged in task
//! order, so every driver returns the same value for any number of workers.

use std::num::NonZeroUsize;
use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use ediqkd_core::classical::{
    branch_and_bound, is_feasible, maximize_fgc_with, uniform_prep, FgcResult, GcpModel, Method, TransitionMatrix,
    VertexBest, VertexTable, NATURAL_ORDER, VERTEX_COUNT,
};
use ediqkd_core::photonic::{EfficiencySearch, EfficiencyThreshold, OptimizedRate};
use ediqkd_core::protocol::{finish, Partial, PreparedSession, SessionConfig, SessionResult};
use ediqkd_core::tomography::MeasurementFrame;

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workers(NonZeroUsize);

impl Workers {
    pub fn new(n: usize) -> AppResult<Self> {
        NonZeroUsize::new(n)
            .map(Workers)
            .ok_or_else(|| AppError::Config("threads must be at least 1".into()))
    }

    pub fn available() -> Self {
        Workers(thread::available_parallelism().unwrap_or(NonZeroUsize::MIN))
    }

    pub fn get(self) -> usize {
        self.0.get()
    }
}

impl Default for Workers {
    fn default() -> Self {
        Self::available()
    }
}

/// Runs `f` on every task index and returns the results in index order.
pub fn map_ordered<T: Send>(tasks: usize, workers: Workers, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..tasks).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let n = workers.get().min(tasks.max(1));
    thread::scope(|s| {
        for _ in 0..n {
            s.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                if t >= tasks {
                    break;
                }
                let v = f(t);
                slots.lock().expect("worker panicked")[t] = Some(v);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|v| v.expect("every task ran"))
        .collect()
}

/// Splits `range` into `parts` contiguous pieces of near-equal length.
pub fn split(range: Range<u64>, parts: u64) -> Vec<Range<u64>> {
    let len = range.end - range.start;
    let parts = parts.clamp(1, len.max(1));
    (0..parts)
        .map(|p| range.start + len * p / parts..range.start + len * (p + 1) / parts)
        .collect()
}

const VERTEX_TASKS: u64 = 256;

/// Full vertex enumeration, data-parallel over disjoint index ranges.
pub fn enumerate_vertices(frame: &MeasurementFrame, workers: Workers) -> VertexBest {
    let table = VertexTable::new(frame, &uniform_prep());
    let ranges = split(0..VERTEX_COUNT as u64, VERTEX_TASKS);
    let parts = map_ordered(ranges.len(), workers, |t| {
        let r = ranges[t].start as u32..ranges[t].end as u32;
        branch_and_bound(&table, &NATURAL_ORDER, r, |m| {
            is_feasible(&GcpModel::uniform(TransitionMatrix::deterministic(m)), frame)
        })
    });
    parts
        .into_iter()
        .fold(None, VertexBest::merge)
        .expect("constant maps are feasible")
}

pub fn maximize_fgc(frame: &MeasurementFrame, method: Method, workers: Workers) -> FgcResult {
    maximize_fgc_with(frame, method, |f| enumerate_vertices(f, workers))
}

/// Rounds per simulation task; fixed so that the task list is independent
/// of the worker count.
pub const SESSION_CHUNK: u64 = 1 << 16;

pub fn run_session(config: &SessionConfig, f_gc: f64, workers: Workers) -> AppResult<SessionResult> {
    let session = PreparedSession::new(config)?;
    let ranges = split(0..config.rounds, config.rounds.div_ceil(SESSION_CHUNK));
    let parts = map_ordered(ranges.len(), workers, |t| session.simulate(ranges[t].clone()));
    let merged = parts.into_iter().reduce(Partial::merge).unwrap_or_default();
    Ok(finish(&session, merged, f_gc)?)
}

/// Restarts of the photonic optimisation run in parallel and merged in
/// start order.
pub fn optimized_rate(search: &EfficiencySearch, eta: f64, workers: Workers) -> Option<OptimizedRate> {
    let starts = search.starts();
    map_ordered(starts.len(), workers, |t| search.optimize_from(eta, &starts[t]))
        .into_iter()
        .flatten()
        .reduce(OptimizedRate::better)
}

pub fn required_efficiency(search: &EfficiencySearch, workers: Workers) -> AppResult<EfficiencyThreshold> {
    Ok(search.required_efficiency_with(|eta| optimized_rate(search, eta, workers))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ediqkd_core::protocol::{run_session as serial_session, ChannelSpec};

    #[test]
    fn split_covers_range() {
        let r = split(3..103, 7);
        assert_eq!(r.first().unwrap().start, 3);
        assert_eq!(r.last().unwrap().end, 103);
        assert!(r.windows(2).all(|w| w[0].end == w[1].start));
        assert_eq!(split(0..2, 5).len(), 2);
    }

    #[test]
    fn ordered_map_preserves_order() {
        let v = map_ordered(50, Workers::new(7).unwrap(), |t| t * t);
        assert_eq!(v, (0..50).map(|t| t * t).collect::<Vec<_>>());
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(Workers::new(0).is_err());
    }

    #[test]
    fn parallel_session_matches_serial() {
        let cfg = SessionConfig::new(200_000, ChannelSpec::Flip(0.05), 11);
        let serial = serial_session(&cfg, 0.85).unwrap();
        let par = run_session(&cfg, 0.85, Workers::new(3).unwrap()).unwrap();
        assert_eq!(serial, par);
    }
}
