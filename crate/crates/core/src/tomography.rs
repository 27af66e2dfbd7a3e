//! Process tomography from prepare-and-measure statistics.
//!
//! Alice prepares the eigenstates of her three observables, Bob measures
//! his three observables, and the conditional statistics `P(b_j | a_i)`
//! are inverted into a process matrix. Process matrices are trace-one Choi
//! matrices with the input system as the outer tensor factor, so the ideal
//! identity process is the projector onto `|Phi+>`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use crate::channel::{choi, Channel, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{c, eigvalsh, inverse, ComplexMat, C64, MAX_DIM};
use crate::quantum::{pauli, rotated_paulis, Axis, DensityOp, Observable, Sign};
use crate::rng::{bernoulli, Rng};

/// Alice's preparation observables and Bob's measurement observables.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFrame {
    pub alice: [Observable; 3],
    pub bob: [Observable; 3],
}

impl MeasurementFrame {
    /// Pauli preparations, Bob measuring `U sigma_j U^dagger`.
    pub fn rotated() -> Self {
        Self {
            alice: Axis::ALL.map(Observable::pauli),
            bob: rotated_paulis(),
        }
    }

    /// Pauli preparations and Pauli measurements.
    pub fn aligned() -> Self {
        Self {
            alice: Axis::ALL.map(Observable::pauli),
            bob: Axis::ALL.map(Observable::pauli),
        }
    }

    pub fn new(alice: [Observable; 3], bob: [Observable; 3]) -> Result<Self> {
        let f = Self { alice, bob };
        inv3(&bloch_rows(&f.alice))?;
        inv3(&bloch_rows(&f.bob))?;
        Ok(f)
    }

    /// Eigenstate of Alice's observable `i` (0-based) with eigenvalue `a`.
    pub fn input_state(&self, i: usize, a: Sign) -> DensityOp {
        self.alice[i].eigenstate(a)
    }

    /// Bloch vectors of Alice's then Bob's observables.
    pub fn bloch_vectors(&self) -> [[f64; 3]; 6] {
        let a = bloch_rows(&self.alice);
        let b = bloch_rows(&self.bob);
        [a[0], a[1], a[2], b[0], b[1], b[2]]
    }
}

fn bloch_vector(o: &Observable) -> [f64; 3] {
    Axis::ALL.map(|ax| 0.5 * pauli(ax).trace_product(o.matrix()).re)
}

fn bloch_rows(obs: &[Observable; 3]) -> [[f64; 3]; 3] {
    [bloch_vector(&obs[0]), bloch_vector(&obs[1]), bloch_vector(&obs[2])]
}

fn inv3(m: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-12 {
        return Err(Error::Singular);
    }
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            *v = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Ok(out)
}

pub type ProbTable = [[[[f64; 2]; 3]; 2]; 3];
pub type CountTable = [[[[u64; 2]; 3]; 2]; 3];

/// One entry of a statistics table with 1-based setting labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsCell {
    pub i: usize,
    pub a: Sign,
    pub j: usize,
    pub b: Sign,
    pub probability: f64,
    pub count: Option<u64>,
}

/// `P(b_j | a_i)` indexed `[i][a][j][b]` with 0-based settings, optionally
/// backed by raw counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalStats {
    prob: ProbTable,
    counts: Option<CountTable>,
}

impl ConditionalStats {
    pub fn from_probabilities(prob: ProbTable) -> Result<Self> {
        for i in 0..3 {
            for a in 0..2 {
                for j in 0..3 {
                    let [p, q] = prob[i][a][j];
                    if !(-1e-12..=1.0 + 1e-12).contains(&p) || !(-1e-12..=1.0 + 1e-12).contains(&q) {
                        return Err(Error::NotNormalized("probability outside [0, 1]"));
                    }
                    if (p + q - 1.0).abs() > 1e-9 {
                        return Err(Error::NotNormalized("P(+|a_i, j) + P(-|a_i, j) != 1"));
                    }
                }
            }
        }
        Ok(Self { prob, counts: None })
    }

    pub fn from_counts(counts: CountTable) -> Result<Self> {
        let mut prob = [[[[0.0; 2]; 3]; 2]; 3];
        for i in 0..3 {
            for a in 0..2 {
                for j in 0..3 {
                    let [p, m] = counts[i][a][j];
                    let n = p + m;
                    if n == 0 {
                        return Err(Error::InsufficientData("a setting pair has no counts"));
                    }
                    prob[i][a][j] = [p as f64 / n as f64, m as f64 / n as f64];
                }
            }
        }
        Ok(Self {
            prob,
            counts: Some(counts),
        })
    }

    /// Rebuilds a table from cells; every cell must appear exactly once.
    pub fn from_cells(cells: impl IntoIterator<Item = StatsCell>) -> Result<Self> {
        let mut prob = [[[[f64::NAN; 2]; 3]; 2]; 3];
        let mut counts = [[[[0u64; 2]; 3]; 2]; 3];
        let mut have_counts = true;
        let mut seen = 0usize;
        for cell in cells {
            if !(1..=3).contains(&cell.i) || !(1..=3).contains(&cell.j) {
                return Err(Error::OutOfRange {
                    name: "setting index",
                    value: cell.i.max(cell.j) as f64,
                    range: "{1, 2, 3}",
                });
            }
            let slot = &mut prob[cell.i - 1][cell.a.index()][cell.j - 1][cell.b.index()];
            if !slot.is_nan() {
                return Err(Error::NotNormalized("duplicate cell"));
            }
            *slot = cell.probability;
            match cell.count {
                Some(n) => counts[cell.i - 1][cell.a.index()][cell.j - 1][cell.b.index()] = n,
                None => have_counts = false,
            }
            seen += 1;
        }
        if seen != 36 {
            return Err(Error::InsufficientData("expected 36 cells"));
        }
        let mut s = Self::from_probabilities(prob)?;
        if have_counts {
            s.counts = Some(counts);
        }
        Ok(s)
    }

    pub fn prob(&self, i: usize, a: Sign, j: usize, b: Sign) -> f64 {
        self.prob[i][a.index()][j][b.index()]
    }

    pub fn table(&self) -> &ProbTable {
        &self.prob
    }

    pub fn counts(&self) -> Option<&CountTable> {
        self.counts.as_ref()
    }

    /// `<B_j>` given Alice prepared `a_i`.
    pub fn correlator(&self, i: usize, a: Sign, j: usize) -> f64 {
        let [p, m] = self.prob[i][a.index()][j];
        p - m
    }

    pub fn cells(&self) -> impl Iterator<Item = StatsCell> + '_ {
        (0..3).flat_map(move |i| {
            Sign::BOTH.into_iter().flat_map(move |a| {
                (0..3).flat_map(move |j| {
                    Sign::BOTH.into_iter().map(move |b| StatsCell {
                        i: i + 1,
                        a,
                        j: j + 1,
                        b,
                        probability: self.prob(i, a, j, b),
                        count: self.counts.as_ref().map(|c| c[i][a.index()][j][b.index()]),
                    })
                })
            })
        })
    }
}

/// Hermitian, trace-one process matrix on 1 or 2 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    mat: ComplexMat,
    qubits: usize,
}

impl ProcessMatrix {
    pub fn new(mat: ComplexMat, qubits: usize) -> Result<Self> {
        let d = 1usize << (2 * qubits);
        if mat.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: mat.dim(),
            });
        }
        let herr = mat.hermiticity_error();
        if herr > 1e-10 {
            return Err(Error::NotHermitian(herr));
        }
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::BadTrace(tr));
        }
        Ok(Self { mat, qubits })
    }

    /// Hermitises and trace-normalises before validating.
    pub fn normalized(mat: &ComplexMat, qubits: usize) -> Result<Self> {
        let h = mat.hermitian_part();
        let tr = h.trace().re;
        if tr.abs() < 1e-300 {
            return Err(Error::BadTrace(tr));
        }
        Self::new(h.scale_re(1.0 / tr), qubits)
    }

    /// The ideal identity process.
    pub fn identity(qubits: usize) -> Self {
        Self::from_channel(&KrausChannel::identity(1 << qubits)).expect("identity channel")
    }

    pub fn from_channel(ch: &impl Channel) -> Result<Self> {
        let d = ch.dim();
        let qubits = d.trailing_zeros() as usize;
        if 1 << qubits != d {
            return Err(Error::BadSubsystems);
        }
        Self::normalized(&choi(ch)?, qubits)
    }

    pub fn matrix(&self) -> &ComplexMat {
        &self.mat
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigvalsh(&self.mat)
            .map(|v| v[0])
            .expect("process matrices are Hermitian")
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        // (in1 out1) ⊗ (in2 out2) -> (in1 in2 out1 out2)
        if self.qubits != 1 || other.qubits != 1 {
            return Err(Error::DimensionOverflow(1 << (2 * (self.qubits + other.qubits))));
        }
        let m = self.mat.tensor(&other.mat)?.permute_qubits(&[0, 2, 1, 3])?;
        Self::new(m, 2)
    }
}

/// Linear inversion of one-qubit statistics into a process matrix.
pub fn process_matrix_1q(stats: &ConditionalStats, frame: &MeasurementFrame) -> Result<ProcessMatrix> {
    let bob_inv = inv3(&bloch_rows(&frame.bob))?;
    let alice_inv = inv3(&bloch_rows(&frame.alice))?;
    let out: [[ComplexMat; 2]; 3] =
        core::array::from_fn(|i| core::array::from_fn(|a| reconstruct_with(stats, &bob_inv, i, Sign::from_index(a))));
    let e_id = out
        .iter()
        .fold(ComplexMat::zeros(2), |acc, [p, m]| &acc + &(p + m))
        .scale_re(1.0 / 3.0);
    let e_obs: [ComplexMat; 3] = core::array::from_fn(|i| &out[i][0] - &out[i][1]);
    // sigma_k = sum_i (M^-1)_{ki} A_i
    let e_pauli: [ComplexMat; 3] = core::array::from_fn(|k| {
        (0..3).fold(ComplexMat::zeros(2), |acc, i| {
            &acc + &e_obs[i].scale_re(alice_inv[k][i])
        })
    });
    let [ex, ey, ez] = e_pauli;
    let i_unit = c(0.0, 1.0);
    let blocks = [
        [(&e_id + &ez).scale_re(0.5), (&ex + &ey.scale(i_unit)).scale_re(0.5)],
        [(&ex - &ey.scale(i_unit)).scale_re(0.5), (&e_id - &ez).scale_re(0.5)],
    ];
    let chi = ComplexMat::from_fn(4, |r, s| blocks[r / 2][s / 2][(r % 2, s % 2)]);
    ProcessMatrix::normalized(&chi, 1)
}

fn reconstruct_with(stats: &ConditionalStats, bob_inv: &[[f64; 3]; 3], i: usize, a: Sign) -> ComplexMat {
    let ev: [f64; 3] = core::array::from_fn(|j| stats.correlator(i, a, j));
    let r: [f64; 3] = core::array::from_fn(|k| (0..3).map(|j| bob_inv[k][j] * ev[j]).sum());
    Axis::ALL
        .iter()
        .zip(r)
        .fold(ComplexMat::identity(2), |acc, (&ax, w)| &acc + &pauli(ax).scale_re(w))
        .scale_re(0.5)
}

/// Bob's conditional state for preparation `a_i`. Hermitian with unit trace
/// but not forced to be positive.
pub fn reconstruct_state(stats: &ConditionalStats, frame: &MeasurementFrame, i: usize, a: Sign) -> Result<ComplexMat> {
    let bob_inv = inv3(&bloch_rows(&frame.bob))?;
    Ok(reconstruct_with(stats, &bob_inv, i, a))
}

/// `{|0>, |1>, |+>, |R>}`, a basis of the qubit operator space.
pub fn standard_inputs_1q() -> [ComplexMat; 4] {
    let s = FRAC_1_SQRT_2;
    let kets: [[C64; 2]; 4] = [
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(s, 0.0), c(s, 0.0)],
        [c(s, 0.0), c(0.0, s)],
    ];
    kets.map(|k| ComplexMat::projector(&k))
}

/// Products of [`standard_inputs_1q`] on `qubits` qubits.
pub fn standard_inputs(qubits: usize) -> Vec<ComplexMat> {
    let one = standard_inputs_1q();
    let mut out = alloc::vec![ComplexMat::identity(1)];
    for _ in 0..qubits {
        out = out
            .iter()
            .flat_map(|a| one.iter().map(move |b| a.tensor(b).expect("small")))
            .collect();
    }
    out
}

/// Linear-inversion process tomography from input/output pairs. The
/// inputs must be `d^2` operators spanning the operator space.
pub fn process_matrix_from_io(inputs: &[ComplexMat], outputs: &[ComplexMat]) -> Result<ProcessMatrix> {
    let d = inputs.first().map(ComplexMat::dim).ok_or(Error::Singular)?;
    let dd = d * d;
    if inputs.len() != dd || outputs.len() != dd {
        return Err(Error::DimensionMismatch {
            expected: dd,
            found: inputs.len().min(outputs.len()),
        });
    }
    if dd > MAX_DIM {
        return Err(Error::DimensionOverflow(dd));
    }
    // column m holds vec(input_m)
    let m = ComplexMat::from_fn(dd, |r, col| inputs[col].vec()[r]);
    let minv = inverse(&m)?;
    let mut chi = ComplexMat::zeros(dd);
    for a in 0..d {
        for b in 0..d {
            // vec(|a><b|) is the unit vector at a*d+b, so coefficients are column a*d+b of M^-1
            let idx = a * d + b;
            let img = (0..dd).fold(ComplexMat::zeros(d), |acc, k| &acc + &outputs[k].scale(minv[(k, idx)]));
            for i in 0..d {
                for j in 0..d {
                    chi[(a * d + i, b * d + j)] = img[(i, j)];
                }
            }
        }
    }
    let qubits = d.trailing_zeros() as usize;
    ProcessMatrix::normalized(&chi, qubits)
}

/// Two-qubit tomography of `ch` on the standard product inputs.
pub fn process_matrix_2q(ch: &impl Channel) -> Result<ProcessMatrix> {
    if ch.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: ch.dim(),
        });
    }
    let inputs = standard_inputs(2);
    let outputs: Vec<ComplexMat> = inputs.iter().map(|x| ch.apply(x)).collect();
    process_matrix_from_io(&inputs, &outputs)
}

/// `E(rho) = d tr_in[(rho^T ⊗ I) chi]`
pub fn apply_process(chi: &ProcessMatrix, rho: &ComplexMat) -> Result<ComplexMat> {
    let d = 1usize << chi.qubits;
    if rho.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.dim(),
        });
    }
    let m = chi.matrix();
    Ok(ComplexMat::from_fn(d, |i, j| {
        let mut s = c(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                s += rho[(a, b)] * m[(a * d + i, b * d + j)];
            }
        }
        s * d as f64
    }))
}

/// `tr(chi * target)` after trace-normalising `chi`.
pub fn process_fidelity(chi: &ProcessMatrix, target: &ProcessMatrix) -> Result<f64> {
    if chi.qubits != target.qubits {
        return Err(Error::DimensionMismatch {
            expected: target.matrix().dim(),
            found: chi.matrix().dim(),
        });
    }
    let tr = chi.matrix().trace().re;
    let f = chi.matrix().trace_product(target.matrix()) / tr;
    if f.im.abs() > 1e-10 {
        return Err(Error::NotHermitian(f.im.abs()));
    }
    Ok(f.re)
}

/// Fidelity of the reconstructed process with the identity.
pub fn fidelity_to_identity(stats: &ConditionalStats, frame: &MeasurementFrame) -> Result<f64> {
    process_fidelity(&process_matrix_1q(stats, frame)?, &ProcessMatrix::identity(1))
}

/// Born-rule statistics of `ch` in `frame`.
pub fn exact_stats(ch: &impl Channel, frame: &MeasurementFrame) -> Result<ConditionalStats> {
    if ch.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: ch.dim(),
        });
    }
    let mut prob = [[[[0.0; 2]; 3]; 2]; 3];
    for (i, row) in prob.iter_mut().enumerate() {
        for a in Sign::BOTH {
            let out = ch.apply(frame.input_state(i, a).matrix());
            for (j, cell) in row[a.index()].iter_mut().enumerate() {
                let p = frame.bob[j].projector(Sign::Plus).trace_product(&out).re;
                let p = p.clamp(0.0, 1.0);
                *cell = [p, 1.0 - p];
            }
        }
    }
    ConditionalStats::from_probabilities(prob)
}

/// Draws `shots` Bernoulli outcomes for every `(i, a, j)` setting.
pub fn sample_stats<R: Rng + ?Sized>(stats: &ConditionalStats, shots: u64, rng: &mut R) -> Result<ConditionalStats> {
    let mut counts = [[[[0u64; 2]; 3]; 2]; 3];
    for i in 0..3 {
        for a in Sign::BOTH {
            for j in 0..3 {
                let p = stats.prob(i, a, j, Sign::Plus);
                let plus = (0..shots).filter(|_| bernoulli(rng, p)).count() as u64;
                counts[i][a.index()][j] = [plus, shots - plus];
            }
        }
    }
    ConditionalStats::from_counts(counts)
}
