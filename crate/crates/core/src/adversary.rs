//! Collective attack by a universal quantum cloning machine.
//!
//! Eve clones the qubit travelling to Bob. The cloner acts on Bob's qubit
//! `B` together with her pair `E E'` and outputs the pure state
//! `sum_jk sqrt(λ_jk) U_jk|ψ>_B ⊗ (I ⊗ U_jk)|Φ+>_{EE'}`, where
//! `U_jk = X^j Z^k` in a fixed reference basis.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::channel::{Channel, KrausChannel, Mixture};
use crate::error::{check_range, Error, Result};
use crate::linalg::{c, ComplexMat, C64};
use crate::quantum::{
    h2, ket0, ket1, kron_ket, overlap_with_ket, rotated_paulis, trace_distance, von_neumann_entropy, DensityOp, Sign,
};
use crate::tomography::{process_matrix_from_io, standard_inputs, MeasurementFrame, ProcessMatrix};

/// Cloner strength used by the probabilistic attack.
pub const ATTACK_CLONER_P: f64 = 0.25;

/// Weights `λ_jk` for `jk = 00, 01, 10, 11`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloneSpec {
    lambda: [f64; 4],
}

impl CloneSpec {
    pub fn new(lambda: [f64; 4]) -> Result<Self> {
        if lambda.iter().any(|&l| l.is_nan() || l < 0.0) {
            return Err(Error::NotNormalized("negative cloner weight"));
        }
        if (lambda.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized("cloner weights"));
        }
        Ok(Self { lambda })
    }

    /// `λ00 = 1 - p`, the rest `p/3`.
    pub fn symmetric(p: f64) -> Result<Self> {
        check_range("cloner strength p", p, 0.0, 0.75, "[0, 3/4]")?;
        Ok(Self {
            lambda: [1.0 - p, p / 3.0, p / 3.0, p / 3.0],
        })
    }

    pub fn lambda(&self) -> [f64; 4] {
        self.lambda
    }

    /// Error rate the cloner induces on Bob's qubit.
    pub fn qber(&self) -> f64 {
        let [_, l01, l10, l11] = self.lambda;
        // Bob's fidelity is 1 - 2p/3 for every input
        2.0 * (l01 + l10 + l11) / 3.0
    }
}

/// With probability `p_attack` Eve runs the `p = 1/4` cloner, otherwise she
/// leaves the qubit alone and keeps `|00>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackModel {
    pub clone: CloneSpec,
    pub p_attack: f64,
}

impl AttackModel {
    pub fn new(p_attack: f64) -> Result<Self> {
        check_range("attack probability", p_attack, 0.0, 1.0, "[0, 1]")?;
        Ok(Self {
            clone: CloneSpec::symmetric(ATTACK_CLONER_P)?,
            p_attack,
        })
    }

    /// `p' = 6 Q`
    pub fn from_qber(q: f64) -> Result<Self> {
        check_range("QBER", q, 0.0, 1.0 / 6.0, "[0, 1/6]")?;
        Self::new((6.0 * q).min(1.0))
    }

    pub fn qber(&self) -> f64 {
        self.clone.qber() * self.p_attack
    }
}

/// Reference basis for `U_jk` and the `E E'` companion states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CloneBasis {
    /// Eigenbasis of Bob's first observable.
    #[default]
    BobFirst,
    Computational,
}

impl CloneBasis {
    fn vectors(self) -> [Vec<C64>; 2] {
        match self {
            CloneBasis::BobFirst => {
                let v1 = &rotated_paulis()[0];
                [v1.eigenvector(Sign::Plus), v1.eigenvector(Sign::Minus)]
            }
            CloneBasis::Computational => [ket0(), ket1()],
        }
    }
}

/// The cloning isometry `B -> B E E'`.
#[derive(Debug, Clone)]
pub struct Cloner {
    spec: CloneSpec,
    /// `V|0>` and `V|1>`.
    images: [Vec<C64>; 2],
}

impl Cloner {
    pub fn new(spec: CloneSpec, basis: CloneBasis) -> Self {
        let s = basis.vectors();
        let basis_mat = ComplexMat::from_fn(2, |r, col| s[col][r]);
        let u = |j: usize, k: usize| {
            // X^j Z^k written in the reference basis
            let mut m = ComplexMat::zeros(2);
            for t in 0..2 {
                m[((t + j) % 2, t)] = if k == 1 && t == 1 { c(-1.0, 0.0) } else { c(1.0, 0.0) };
            }
            &(&basis_mat * &m) * &basis_mat.adjoint()
        };
        let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
        let phi: Vec<C64> = kron_ket(&s[0], &s[0])
            .iter()
            .zip(kron_ket(&s[1], &s[1]))
            .map(|(a, b)| (a + b) * inv_sqrt2)
            .collect();
        let images = [ket0(), ket1()].map(|psi| {
            let mut out = alloc::vec![c(0.0, 0.0); 8];
            for j in 0..2 {
                for k in 0..2 {
                    let w = spec.lambda[2 * j + k].sqrt();
                    if w == 0.0 {
                        continue;
                    }
                    let ujk = u(j, k);
                    let b = ujk.apply(&psi);
                    let ee = ComplexMat::identity(2).tensor(&ujk).expect("4x4").apply(&phi);
                    for (o, v) in out.iter_mut().zip(kron_ket(&b, &ee)) {
                        *o += v * w;
                    }
                }
            }
            out
        });
        Self { spec, images }
    }

    pub fn spec(&self) -> &CloneSpec {
        &self.spec
    }

    pub fn apply_ket(&self, psi: &[C64]) -> Vec<C64> {
        (0..8)
            .map(|r| psi[0] * self.images[0][r] + psi[1] * self.images[1][r])
            .collect()
    }

    /// `V x V^dagger` for any 2x2 operator `x`.
    pub fn apply_operator(&self, x: &ComplexMat) -> ComplexMat {
        let mut out = ComplexMat::zeros(8);
        for a in 0..2 {
            for b in 0..2 {
                let w = x[(a, b)];
                if w.norm() == 0.0 {
                    continue;
                }
                for r in 0..8 {
                    for s in 0..8 {
                        out[(r, s)] += w * self.images[a][r] * self.images[b][s].conj();
                    }
                }
            }
        }
        out
    }

    /// Channel on `A' ⊗ E`: drops the incoming `E`, clones `A'` into
    /// `B E E'` and discards `E'`.
    pub fn be_channel(&self) -> KrausChannel {
        let mut ops = Vec::with_capacity(4);
        for m in 0..2 {
            for e in 0..2 {
                // rows (b, e_out), columns (s, e_in)
                let k = ComplexMat::from_fn(4, |row, col| {
                    let (b, eo) = (row / 2, row % 2);
                    let (s, ei) = (col / 2, col % 2);
                    if ei == e {
                        self.images[s][b * 4 + eo * 2 + m]
                    } else {
                        c(0.0, 0.0)
                    }
                });
                ops.push(k);
            }
        }
        KrausChannel::new(ops).expect("four 4x4 operators")
    }
}

/// Tripartite `B E E'` state after cloning a pure input.
pub fn uqcm_state(rho_in: &DensityOp, clone: &CloneSpec) -> Result<DensityOp> {
    uqcm_state_in(rho_in, clone, CloneBasis::default())
}

pub fn uqcm_state_in(rho_in: &DensityOp, clone: &CloneSpec, basis: CloneBasis) -> Result<DensityOp> {
    if rho_in.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho_in.dim(),
        });
    }
    let psi = rho_in.pure_ket()?;
    DensityOp::from_ket(&Cloner::new(*clone, basis).apply_ket(&psi))
}

/// Fidelities of the `B`, `E` and `E'` marginals with a pure input.
pub fn marginal_fidelities(rho_in: &DensityOp, clone: &CloneSpec) -> Result<[f64; 3]> {
    let psi = rho_in.pure_ket()?;
    let out = uqcm_state(rho_in, clone)?;
    let f = |k: usize| -> Result<f64> {
        let m = out.partial_trace(&[2, 2, 2], &[k])?;
        Ok(overlap_with_ket(m.matrix(), &psi))
    };
    Ok([f(0)?, f(1)?, f(2)?])
}

/// Largest trace distance between `E'` marginals over the six protocol
/// inputs. Independence would make this zero.
pub fn ancilla_independence(clone: &CloneSpec) -> f64 {
    let frame = MeasurementFrame::rotated();
    let marginals: Vec<ComplexMat> = (0..3)
        .flat_map(|i| Sign::BOTH.map(|a| (i, a)))
        .map(|(i, a)| {
            uqcm_state(&frame.input_state(i, a), clone)
                .and_then(|s| s.partial_trace(&[2, 2, 2], &[2]))
                .expect("protocol inputs are pure")
                .into_matrix()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (k, a) in marginals.iter().enumerate() {
        for b in &marginals[k + 1..] {
            worst = worst.max(trace_distance(a, b).expect("2x2"));
        }
    }
    worst
}

/// `rho -> (1 - Q) rho + Q rho_perp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipChannel {
    q: f64,
}

impl FlipChannel {
    pub fn new(q: f64) -> Result<Self> {
        check_range("flip probability", q, 0.0, 1.0, "[0, 1]")?;
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `(1 - 2Q)|Φ+><Φ+| + Q I/2`
    pub fn process_matrix(&self) -> ProcessMatrix {
        let phi = ProcessMatrix::identity(1);
        let m = &phi.matrix().scale_re(1.0 - 2.0 * self.q) + &ComplexMat::identity(4).scale_re(self.q / 2.0);
        ProcessMatrix::new(m, 1).expect("flip channel is a valid process")
    }
}

impl Channel for FlipChannel {
    fn dim(&self) -> usize {
        2
    }
    fn apply(&self, x: &ComplexMat) -> ComplexMat {
        // rho_perp = tr(rho) I - rho
        &x.scale_re(1.0 - 2.0 * self.q) + &ComplexMat::identity(2).scale(x.trace() * self.q)
    }
}

/// What Bob receives under the attack at QBER `Q`.
pub fn bob_channel(q: f64) -> Result<FlipChannel> {
    check_range("QBER", q, 0.0, 1.0 / 6.0, "[0, 1/6]")?;
    FlipChannel::new(q)
}

/// Identity on `A'`, Eve's qubit reset to `|0>`.
pub fn no_attack_channel() -> KrausChannel {
    let ops = (0..2)
        .map(|e| {
            let mut reset = ComplexMat::zeros(2);
            reset[(0, e)] = c(1.0, 0.0);
            ComplexMat::identity(2).tensor(&reset).expect("4x4")
        })
        .collect();
    KrausChannel::new(ops).expect("two 4x4 operators")
}

/// Two-qubit `A' E -> B E` channel of the probabilistic attack.
pub fn attack_channel(model: &AttackModel) -> impl Channel {
    Mixture {
        a: Cloner::new(model.clone, CloneBasis::default()).be_channel(),
        b: no_attack_channel(),
        w: model.p_attack,
    }
}

/// How Eve's information is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HolevoModel {
    /// Holevo quantity of the probabilistic `p = 1/4` attack with `p' = 6Q`,
    /// Eve holding `|00>` when idle.
    NumericMixture,
    /// `H(λ) - h(λ10 + λ00)` with a pure cloner of strength `p = 3Q/2`.
    ClosedForm,
    /// `S(ρ_EE')` of the pure `p = 3Q/2` cloner averaged over the key basis,
    /// i.e. the Holevo quantity with the conditional entropies dropped.
    #[default]
    AverageStateBound,
}

impl HolevoModel {
    pub const ALL: [HolevoModel; 3] = [
        HolevoModel::NumericMixture,
        HolevoModel::ClosedForm,
        HolevoModel::AverageStateBound,
    ];

    /// Largest QBER the model is defined for.
    pub fn max_qber(self) -> f64 {
        match self {
            HolevoModel::NumericMixture => 1.0 / 6.0,
            _ => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HolevoModel::NumericMixture => "numeric-mixture",
            HolevoModel::ClosedForm => "closed-form",
            HolevoModel::AverageStateBound => "average-state",
        }
    }
}

/// Eve's `E E'` states conditioned on Alice's key-basis value.
pub fn eve_conditional_states(q: f64, model: HolevoModel) -> Result<[DensityOp; 2]> {
    check_range("QBER", q, 0.0, model.max_qber(), "model domain")?;
    let (spec, p_attack) = match model {
        HolevoModel::NumericMixture => (CloneSpec::symmetric(ATTACK_CLONER_P)?, (6.0 * q).min(1.0)),
        _ => (CloneSpec::symmetric((1.5 * q).min(0.75))?, 1.0),
    };
    let cloner = Cloner::new(spec, CloneBasis::default());
    let idle = ComplexMat::projector(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let states = [ket0(), ket1()].map(|k| {
        let full = ComplexMat::projector(&cloner.apply_ket(&k));
        let ee = full.partial_trace(&[2, 4], &[1]).expect("8 = 2 x 4");
        let m = &ee.scale_re(p_attack) + &idle.scale_re(1.0 - p_attack);
        DensityOp::from_approx(&m).expect("mixture of states")
    });
    Ok(states)
}

/// Holevo-type bound on `I(A:E)` in bits.
pub fn eve_information(q: f64) -> Result<f64> {
    eve_information_with(q, HolevoModel::default())
}

pub fn eve_information_with(q: f64, model: HolevoModel) -> Result<f64> {
    check_range("QBER", q, 0.0, model.max_qber(), "model domain")?;
    match model {
        HolevoModel::ClosedForm => {
            let l = CloneSpec::symmetric((1.5 * q).min(0.75))?.lambda();
            let h_l = crate::quantum::shannon_entropy(&l);
            Ok((h_l - h2(l[2] + l[0])).max(0.0))
        }
        HolevoModel::NumericMixture => {
            let [r0, r1] = eve_conditional_states(q, model)?;
            let avg = r0.mix(&r1, 0.5)?;
            let i = von_neumann_entropy(&avg) - 0.5 * (von_neumann_entropy(&r0) + von_neumann_entropy(&r1));
            Ok(i.max(0.0))
        }
        HolevoModel::AverageStateBound => {
            let [r0, r1] = eve_conditional_states(q, model)?;
            Ok(von_neumann_entropy(&r0.mix(&r1, 0.5)?))
        }
    }
}

/// `H(λ)` for the `p = 3Q/2` cloner; closed form of
/// [`HolevoModel::AverageStateBound`].
pub fn average_state_entropy_closed_form(q: f64) -> Result<f64> {
    check_range("QBER", q, 0.0, 0.5, "[0, 1/2]")?;
    Ok(crate::quantum::shannon_entropy(
        &CloneSpec::symmetric((1.5 * q).min(0.75))?.lambda(),
    ))
}

/// Eve's information after Alice flips each key bit with probability
/// `p_noise`. The conditional states become mixtures, and the entropy
/// this mixing creates is credited against the bound.
pub fn eve_information_preprocessed(q: f64, p_noise: f64, model: HolevoModel) -> Result<f64> {
    check_range("noise probability", p_noise, 0.0, 0.5, "[0, 1/2]")?;
    let base = eve_information_with(q, model)?;
    if p_noise == 0.0 {
        return Ok(base);
    }
    let [r0, r1] = eve_conditional_states(q, model)?;
    let (s0, s1) = (von_neumann_entropy(&r0), von_neumann_entropy(&r1));
    let m0 = von_neumann_entropy(&r0.mix(&r1, p_noise)?);
    let m1 = von_neumann_entropy(&r1.mix(&r0, p_noise)?);
    let gain = 0.5 * ((m0 - ((1.0 - p_noise) * s0 + p_noise * s1)) + (m1 - ((1.0 - p_noise) * s1 + p_noise * s0)));
    Ok((base - gain.max(0.0)).max(0.0))
}

/// Process matrices of the attack and of the separable reference on the
/// standard two-qubit inputs.
pub fn attack_processes(q: f64) -> Result<(ProcessMatrix, ProcessMatrix)> {
    let model = AttackModel::from_qber(q)?;
    let inputs = standard_inputs(2);
    let cloned = Cloner::new(model.clone, CloneBasis::default()).be_channel();
    let sep = no_attack_channel();
    let w = model.p_attack;
    let (mix_out, sep_out): (Vec<ComplexMat>, Vec<ComplexMat>) = inputs
        .iter()
        .map(|x| {
            let s = sep.apply(x);
            let m = &cloned.apply(x).scale_re(w) + &s.scale_re(1.0 - w);
            (m, s)
        })
        .unzip();
    Ok((
        process_matrix_from_io(&inputs, &mix_out)?,
        process_matrix_from_io(&inputs, &sep_out)?,
    ))
}

/// Trace distance between the attacked process and the ideal separable one.
pub fn secrecy_distance(q: f64) -> Result<f64> {
    let (chi, sep) = attack_processes(q)?;
    trace_distance(chi.matrix(), sep.matrix())
}

/// `χ_AB ⊗ χ_AE` with identity on Bob's line and Eve's qubit reset to `|0>`.
pub fn separable_reference() -> ProcessMatrix {
    let mut reset = ComplexMat::zeros(4);
    // |0><0| ⊗ |0><0| + |1><1| ⊗ |0><0|, halved
    reset[(0, 0)] = c(0.5, 0.0);
    reset[(2, 2)] = c(0.5, 0.0);
    let chi_ae = ProcessMatrix::new(reset, 1).expect("reset channel");
    ProcessMatrix::identity(1)
        .tensor(&chi_ae)
        .expect("two one-qubit processes")
}
