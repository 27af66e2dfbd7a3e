//! Genuinely classical processes and the fidelity threshold they can reach.
//!
//! A classical model assigns every qubit a hidden tuple `(v1, v2, v3)` of
//! `±1` values, one per Alice observable. Preparation picks a hidden state
//! consistent with Alice's outcome, a stochastic matrix `Ω` moves it to a new
//! hidden state, and Bob reads component `j`. The best such model gives the
//! threshold `F_GC`.

use core::ops::Range;

use crate::error::{Error, Result};
use crate::quantum::Sign;
use crate::tomography::{process_fidelity, process_matrix_1q, ConditionalStats, MeasurementFrame, ProcessMatrix};

pub const HIDDEN_STATES: usize = 8;
/// Number of deterministic transition maps, `8^8`.
pub const VERTEX_COUNT: u32 = 1 << 24;
pub const PSD_TOL: f64 = 1e-9;
/// Slack used while ascending. Near the PSD boundary a `1e-9` eigenvalue
/// slack buys `~sqrt(1e-9)` in fidelity, so refinement stays much tighter.
pub const REFINE_PSD_TOL: f64 = 1e-14;

/// Hidden state `xi` in `0..8`; bit `2 - k` set means `v_{k+1} = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct HiddenState(u8);

impl HiddenState {
    pub fn all() -> impl Iterator<Item = HiddenState> {
        (0..HIDDEN_STATES as u8).map(HiddenState)
    }

    pub fn new(xi: usize) -> Result<Self> {
        if xi < HIDDEN_STATES {
            Ok(Self(xi as u8))
        } else {
            Err(Error::OutOfRange {
                name: "hidden state",
                value: xi as f64,
                range: "0..8",
            })
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Value of property `k` (0-based).
    pub fn component(self, k: usize) -> Sign {
        Sign::from_index(((self.0 >> (2 - k)) & 1) as usize)
    }

    pub fn components(self) -> [Sign; 3] {
        [self.component(0), self.component(1), self.component(2)]
    }
}

/// Row-stochastic 8x8 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix([[f64; 8]; 8]);

impl TransitionMatrix {
    pub fn new(rows: [[f64; 8]; 8]) -> Result<Self> {
        for row in &rows {
            if row.iter().any(|&x| x.is_nan() || x < 0.0) {
                return Err(Error::OutOfRange {
                    name: "transition probability",
                    value: row.iter().copied().fold(f64::INFINITY, f64::min),
                    range: "[0, 1]",
                });
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized("transition row"));
            }
        }
        Ok(Self(rows))
    }

    pub fn identity() -> Self {
        Self::deterministic(&[0, 1, 2, 3, 4, 5, 6, 7])
    }

    /// Row `xi` is the unit vector at `map[xi]`.
    pub fn deterministic(map: &[u8; 8]) -> Self {
        let mut rows = [[0.0; 8]; 8];
        for (row, &m) in rows.iter_mut().zip(map) {
            row[m as usize] = 1.0;
        }
        Self(rows)
    }

    pub fn from_vertex(idx: u32) -> Self {
        Self::deterministic(&vertex_map(idx))
    }

    pub fn rows(&self) -> &[[f64; 8]; 8] {
        &self.0
    }

    pub fn mix(&self, other: &Self, w: f64) -> Self {
        let mut rows = self.0;
        for (r, o) in rows.iter_mut().zip(&other.0) {
            for (x, y) in r.iter_mut().zip(o) {
                *x = (1.0 - w) * *x + w * y;
            }
        }
        Self(rows)
    }
}

/// Digits of a vertex index, row 0 most significant.
pub fn vertex_map(idx: u32) -> [u8; 8] {
    core::array::from_fn(|xi| ((idx >> (3 * (7 - xi))) & 7) as u8)
}

pub fn vertex_index(map: &[u8; 8]) -> u32 {
    map.iter().fold(0, |acc, &d| (acc << 3) | d as u32)
}

/// Preparation distributions `P(xi | a_i)` indexed `[i][a][xi]`.
pub type PrepDistribution = [[[f64; 8]; 2]; 3];

pub fn uniform_prep() -> PrepDistribution {
    core::array::from_fn(|i| {
        core::array::from_fn(|a| {
            core::array::from_fn(|xi| {
                if HiddenState(xi as u8).component(i).index() == a {
                    0.25
                } else {
                    0.0
                }
            })
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcpModel {
    pub omega: TransitionMatrix,
    prep: PrepDistribution,
}

impl GcpModel {
    pub fn new(omega: TransitionMatrix, prep: PrepDistribution) -> Result<Self> {
        for (i, per_a) in prep.iter().enumerate() {
            for (a, dist) in per_a.iter().enumerate() {
                for (xi, &p) in dist.iter().enumerate() {
                    if p.is_nan() || p < 0.0 {
                        return Err(Error::NotNormalized("negative preparation weight"));
                    }
                    if p > 0.0 && HiddenState(xi as u8).component(i).index() != a {
                        return Err(Error::NotNormalized("preparation supported on inconsistent state"));
                    }
                }
                if (dist.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(Error::NotNormalized("preparation distribution"));
                }
            }
        }
        Ok(Self { omega, prep })
    }

    pub fn uniform(omega: TransitionMatrix) -> Self {
        Self {
            omega,
            prep: uniform_prep(),
        }
    }

    pub fn prep(&self) -> &PrepDistribution {
        &self.prep
    }
}

/// `P(b_j | a_i) = sum_{xi, mu} P(xi | a_i) Ω_{xi mu} [mu_j = b]`
pub fn gcp_stats(model: &GcpModel) -> ConditionalStats {
    let mut prob = [[[[0.0; 2]; 3]; 2]; 3];
    let om = model.omega.rows();
    for i in 0..3 {
        for a in 0..2 {
            let mut out = [0.0; 8];
            for (xi, &w) in model.prep[i][a].iter().enumerate() {
                for (mu, o) in out.iter_mut().enumerate() {
                    *o += w * om[xi][mu];
                }
            }
            for j in 0..3 {
                let plus: f64 = out
                    .iter()
                    .enumerate()
                    .filter(|(mu, _)| HiddenState(*mu as u8).component(j) == Sign::Plus)
                    .map(|(_, p)| p)
                    .sum();
                let total: f64 = out.iter().sum();
                let plus = (plus / total).clamp(0.0, 1.0);
                prob[i][a][j] = [plus, 1.0 - plus];
            }
        }
    }
    ConditionalStats::from_probabilities(prob).expect("stochastic models give normalised tables")
}

pub fn build_chi_gc(model: &GcpModel, frame: &MeasurementFrame) -> ProcessMatrix {
    process_matrix_1q(&gcp_stats(model), frame).expect("frames are validated at construction")
}

pub fn fidelity(model: &GcpModel, frame: &MeasurementFrame) -> f64 {
    process_fidelity(&build_chi_gc(model, frame), &ProcessMatrix::identity(1)).expect("one-qubit processes")
}

pub fn is_feasible(model: &GcpModel, frame: &MeasurementFrame) -> bool {
    build_chi_gc(model, frame).min_eigenvalue() >= -PSD_TOL
}

/// Per-row decomposition of the fidelity over deterministic maps:
/// `F(f) = base + sum_xi contrib[xi][f(xi)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexTable {
    pub base: f64,
    pub contrib: [[f64; 8]; 8],
    row_max: [f64; 8],
}

impl VertexTable {
    pub fn new(frame: &MeasurementFrame, prep: &PrepDistribution) -> Self {
        let f = |map: &[u8; 8]| {
            fidelity(
                &GcpModel {
                    omega: TransitionMatrix::deterministic(map),
                    prep: *prep,
                },
                frame,
            )
        };
        let base = f(&[0; 8]);
        let contrib = core::array::from_fn(|xi| {
            core::array::from_fn(|mu| {
                let mut m = [0u8; 8];
                m[xi] = mu as u8;
                f(&m) - base
            })
        });
        Self::from_parts(base, contrib)
    }

    fn from_parts(base: f64, contrib: [[f64; 8]; 8]) -> Self {
        let row_max = contrib.map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        Self { base, contrib, row_max }
    }

    pub fn value(&self, map: &[u8; 8]) -> f64 {
        map.iter()
            .enumerate()
            .fold(self.base, |acc, (xi, &mu)| acc + self.contrib[xi][mu as usize])
    }

    /// Upper bound ignoring the PSD constraint.
    pub fn unconstrained_max(&self) -> f64 {
        self.row_max.iter().fold(self.base, |a, b| a + b)
    }
}

/// Best feasible vertex found in a range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexBest {
    pub value: f64,
    pub index: u32,
}

impl VertexBest {
    /// Larger value wins; equal values keep the lower index.
    pub fn merge(a: Option<Self>, b: Option<Self>) -> Option<Self> {
        match (a, b) {
            (Some(x), Some(y)) => Some(if y.value > x.value || (y.value == x.value && y.index < x.index) {
                y
            } else {
                x
            }),
            (x, None) => x,
            (None, y) => y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    Exhaustive,
    #[default]
    BranchAndBound,
}

/// Visits every vertex in `range` in index order. The PSD check only runs
/// for candidates that beat the best feasible value seen so far.
pub fn scan_range(
    table: &VertexTable,
    range: Range<u32>,
    mut feasible: impl FnMut(&[u8; 8]) -> bool,
) -> Option<VertexBest> {
    let mut best: Option<VertexBest> = None;
    for idx in range {
        let map = vertex_map(idx);
        let v = table.value(&map);
        if best.is_none_or(|b| v > b.value) && feasible(&map) {
            best = Some(VertexBest { value: v, index: idx });
        }
    }
    best
}

/// Depth-first search in lexicographic order over `rows` (a permutation of
/// `0..8`), restricted to vertex indices in `range`. Subtrees whose
/// row-maxima bound cannot reach the incumbent are skipped.
pub fn branch_and_bound(
    table: &VertexTable,
    rows: &[usize; 8],
    range: Range<u32>,
    mut feasible: impl FnMut(&[u8; 8]) -> bool,
) -> Option<VertexBest> {
    // suffix bounds over the search order
    let mut tail = [0.0; 9];
    for d in (0..8).rev() {
        tail[d] = tail[d + 1] + table.row_max[rows[d]];
    }
    struct Search<'a> {
        table: &'a VertexTable,
        rows: &'a [usize; 8],
        tail: [f64; 9],
        range: Range<u32>,
        best: Option<VertexBest>,
        map: [u8; 8],
    }
    // ordinal index in search order; identical to vertex index when rows is the identity
    fn rec(d: usize, prefix: u32, partial: f64, s: &mut Search, feasible: &mut dyn FnMut(&[u8; 8]) -> bool) {
        let span = 1u32 << (3 * (8 - d));
        let lo = prefix * span;
        if lo >= s.range.end || lo + span <= s.range.start {
            return;
        }
        if let Some(b) = s.best {
            if s.table.base + partial + s.tail[d] < b.value - 1e-12 {
                return;
            }
        }
        if d == 8 {
            let v = s.table.value(&s.map);
            if s.best.is_none_or(|b| v > b.value) && feasible(&s.map) {
                s.best = Some(VertexBest {
                    value: v,
                    index: prefix,
                });
            }
            return;
        }
        let row = s.rows[d];
        for mu in 0..8u8 {
            s.map[row] = mu;
            let c = s.table.contrib[row][mu as usize];
            rec(d + 1, prefix * 8 + mu as u32, partial + c, s, feasible);
        }
    }
    let mut search = Search {
        table,
        rows,
        tail,
        range,
        best: None,
        map: [0; 8],
    };
    rec(0, 0, 0.0, &mut search, &mut feasible);
    let best = search.best;
    // report the natural vertex index rather than the search ordinal
    best.map(|b| {
        let ord = vertex_map(b.index);
        let mut m = [0u8; 8];
        for (d, &row) in rows.iter().enumerate() {
            m[row] = ord[d];
        }
        VertexBest {
            value: b.value,
            index: vertex_index(&m),
        }
    })
}

pub const NATURAL_ORDER: [usize; 8] = [0, 1, 2, 3, 4, 5, 6, 7];

/// Full vertex enumeration with uniform preparation.
pub fn enumerate_vertices(frame: &MeasurementFrame, strategy: Strategy) -> VertexBest {
    let table = VertexTable::new(frame, &uniform_prep());
    let feasible = |m: &[u8; 8]| is_feasible(&GcpModel::uniform(TransitionMatrix::deterministic(m)), frame);
    let best = match strategy {
        Strategy::Exhaustive => scan_range(&table, 0..VERTEX_COUNT, feasible),
        Strategy::BranchAndBound => branch_and_bound(&table, &NATURAL_ORDER, 0..VERTEX_COUNT, feasible),
    };
    // the fully mixing map to a single state is always a valid classical process
    best.expect("constant maps are feasible")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    pub max_iter: usize,
    /// Also ascend over the preparation distributions.
    pub relax_prep: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            max_iter: 400,
            relax_prep: false,
        }
    }
}

/// Euclidean projection onto the probability simplex restricted to `support`.
fn project_simplex(x: &mut [f64; 8], support: impl Fn(usize) -> bool) {
    let mut v: [f64; 8] = [f64::NEG_INFINITY; 8];
    let mut n = 0;
    for (k, &val) in x.iter().enumerate() {
        if support(k) {
            v[n] = val;
            n += 1;
        }
    }
    let vs = &mut v[..n];
    vs.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in vs.iter().enumerate() {
        cum += u;
        let t = (cum - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    for (k, val) in x.iter_mut().enumerate() {
        *val = if support(k) { (*val - theta).max(0.0) } else { 0.0 };
    }
}

/// Projected-gradient ascent from a feasible seed. Infeasible steps are
/// pulled back toward the current point until the process matrix is PSD.
pub fn refine(seed: &GcpModel, frame: &MeasurementFrame, opts: RefineOptions) -> (f64, GcpModel) {
    let mut cur = *seed;
    let mut f_cur = fidelity(&cur, frame);
    let mut step = 0.5;
    for _ in 0..opts.max_iter {
        if step < 1e-10 {
            break;
        }
        // the objective is affine, so differences against row vertices give the gradient up to a per-row constant
        let table = VertexTable::new(frame, &cur.prep);
        let mut rows = *cur.omega.rows();
        for (xi, row) in rows.iter_mut().enumerate() {
            for (mu, x) in row.iter_mut().enumerate() {
                *x += step * table.contrib[xi][mu];
            }
            project_simplex(row, |_| true);
        }
        let mut prep = cur.prep;
        if opts.relax_prep {
            let g = prep_gradient(&cur, frame, f_cur);
            for i in 0..3 {
                for a in 0..2 {
                    for xi in 0..8 {
                        prep[i][a][xi] += step * g[i][a][xi];
                    }
                    project_simplex(&mut prep[i][a], |xi| HiddenState(xi as u8).component(i).index() == a);
                }
            }
        }
        let target = GcpModel {
            omega: TransitionMatrix(rows),
            prep,
        };
        let mut s = 1.0;
        let mut accepted = false;
        while s > 1e-6 {
            let cand = interpolate(&cur, &target, s);
            if build_chi_gc(&cand, frame).min_eigenvalue() >= -REFINE_PSD_TOL {
                let f = fidelity(&cand, frame);
                if f > f_cur + 1e-15 {
                    cur = cand;
                    f_cur = f;
                    accepted = true;
                }
                break;
            }
            s *= 0.5;
        }
        step = if accepted { step * 2.0 } else { step * 0.25 };
    }
    (f_cur, cur)
}

fn interpolate(a: &GcpModel, b: &GcpModel, s: f64) -> GcpModel {
    let mut prep = a.prep;
    for i in 0..3 {
        for k in 0..2 {
            for xi in 0..8 {
                prep[i][k][xi] = (1.0 - s) * a.prep[i][k][xi] + s * b.prep[i][k][xi];
            }
        }
    }
    GcpModel {
        omega: a.omega.mix(&b.omega, s),
        prep,
    }
}

fn prep_gradient(m: &GcpModel, frame: &MeasurementFrame, f0: f64) -> PrepDistribution {
    let mut g = [[[0.0; 8]; 2]; 3];
    for i in 0..3 {
        for a in 0..2 {
            for xi in 0..8 {
                if HiddenState(xi as u8).component(i).index() != a {
                    continue;
                }
                let mut p = m.prep;
                p[i][a] = [0.0; 8];
                p[i][a][xi] = 1.0;
                g[i][a][xi] = fidelity(
                    &GcpModel {
                        omega: m.omega,
                        prep: p,
                    },
                    frame,
                ) - f0;
            }
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    Enumerate,
    Refine,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgcResult {
    pub f_gc: f64,
    pub model: GcpModel,
    /// Best deterministic vertex, when enumeration ran.
    pub vertex: Option<VertexBest>,
}

/// Maximum fidelity to the identity over classical models.
pub fn maximize_fgc(frame: &MeasurementFrame, method: Method) -> FgcResult {
    maximize_fgc_with(frame, method, |f| enumerate_vertices(f, Strategy::BranchAndBound))
}

/// As [`maximize_fgc`] with a caller-supplied enumerator, e.g. a parallel one.
pub fn maximize_fgc_with(
    frame: &MeasurementFrame,
    method: Method,
    enumerate: impl FnOnce(&MeasurementFrame) -> VertexBest,
) -> FgcResult {
    let vertex = match method {
        Method::Refine => None,
        _ => Some(enumerate(frame)),
    };
    let seed = match vertex {
        Some(v) => GcpModel::uniform(TransitionMatrix::from_vertex(v.index)),
        None => greedy_seed(frame),
    };
    let f_seed = fidelity(&seed, frame);
    let (f_gc, model) = match method {
        Method::Enumerate => (f_seed, seed),
        _ => {
            let (f, m) = refine(&seed, frame, RefineOptions::default());
            if f >= f_seed {
                (f, m)
            } else {
                (f_seed, seed)
            }
        }
    };
    FgcResult { f_gc, model, vertex }
}

/// Row-wise argmax vertex when feasible, otherwise the uniform mixing map.
fn greedy_seed(frame: &MeasurementFrame) -> GcpModel {
    let table = VertexTable::new(frame, &uniform_prep());
    let map: [u8; 8] = core::array::from_fn(|xi| {
        let row = &table.contrib[xi];
        (0..8).fold(0u8, |b, mu| if row[mu] > row[b as usize] { mu as u8 } else { b })
    });
    let m = GcpModel::uniform(TransitionMatrix::deterministic(&map));
    if is_feasible(&m, frame) {
        m
    } else {
        GcpModel::uniform(TransitionMatrix([[0.125; 8]; 8]))
    }
}

/// Strict `F_expt > F_GC`.
pub fn certify(f_expt: f64, f_gc: f64) -> bool {
    f_expt > f_gc
}
