//! Photonic implementation model: SPDC pairs, lossy threshold detectors with
//! dark counts, and the key-rate consequences.
//!
//! Alice heralds on her own detection. One pulse yields zero, one or two
//! pairs with truncated Poisson weights. A single pair carries the source
//! state, two pairs act as an accidental coincidence whose photons leave
//! through random ports. Each side has one detector per outcome; double
//! clicks are resolved by a fair coin.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::adversary::{eve_information_preprocessed, HolevoModel};
use crate::error::{check_range, Error, Result};
use crate::keyrate::{
    finite_rate_diqkd_observed, finite_rate_ediqkd_with, min_key_rounds, DiqkdOptions, EfficiencyFactor,
    FiniteKeyParams, RateResult,
};
use crate::linalg::{c, ComplexMat};
use crate::optimize::{bisect_threshold, nelder_mead, Bounds, NelderMeadOptions};
use crate::quantum::{Axis, DensityOp, Observable, Sign};
use crate::tomography::{fidelity_to_identity, ConditionalStats, MeasurementFrame};

pub const DEFAULT_DARK_COUNT: f64 = 1e-6;
/// Total rounds of the reference experiment.
pub const REFERENCE_ROUNDS: f64 = 1.44e9;
pub const DEFAULT_RATE_THRESHOLD: f64 = 1e-5;

/// What Bob records when neither of his detectors fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoClick {
    /// Outcome `-1`.
    #[default]
    Minus,
    /// Fair coin.
    Random,
    /// The round is dropped.
    Discard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonicParams {
    /// Detection efficiency of each side.
    pub eta: f64,
    /// Dark-count probability per detector per round.
    pub p_dc: f64,
    /// Mean pair number per pulse.
    pub mu: f64,
    /// Fidelity of the emitted two-photon state with the target.
    pub f_source: f64,
    /// State angle in radians, `cos α |01> + sin α |10>`, in `[0, π/4]`.
    pub alpha: f64,
    /// Probability of discarding a key bit 1, applied by each party.
    pub p_post: f64,
    /// Probability that Alice flips a key bit.
    pub p_noise: f64,
    pub no_click: NoClick,
}

impl Default for PhotonicParams {
    fn default() -> Self {
        Self {
            eta: 1.0,
            p_dc: DEFAULT_DARK_COUNT,
            mu: 0.01,
            f_source: 1.0,
            alpha: FRAC_PI_4,
            p_post: 0.0,
            p_noise: 0.0,
            no_click: NoClick::Minus,
        }
    }
}

impl PhotonicParams {
    pub fn validate(&self) -> Result<()> {
        check_range("eta", self.eta, 0.0, 1.0, "[0, 1]")?;
        check_range("p_dc", self.p_dc, 0.0, 1.0, "[0, 1]")?;
        check_range("mu", self.mu, 0.0, f64::MAX, "[0, inf)")?;
        check_range("f_source", self.f_source, 0.0, 1.0, "[0, 1]")?;
        check_range("alpha", self.alpha, 0.0, FRAC_PI_4 + 1e-12, "[0, pi/4]")?;
        check_range("p_post", self.p_post, 0.0, 1.0, "[0, 1]")?;
        check_range("p_noise", self.p_noise, 0.0, 1.0, "[0, 1]")?;
        Ok(())
    }

    /// Ideal source and detectors.
    pub fn ideal() -> Self {
        Self {
            p_dc: 0.0,
            mu: 1e-12,
            ..Self::default()
        }
    }

    /// The mixed two-photon state emitted for one pair.
    pub fn source_state(&self) -> DensityOp {
        let w = (4.0 * self.f_source - 1.0) / 3.0;
        let psi = [
            c(0.0, 0.0),
            c(self.alpha.cos(), 0.0),
            c(self.alpha.sin(), 0.0),
            c(0.0, 0.0),
        ];
        let m = &ComplexMat::projector(&psi).scale_re(w) + &ComplexMat::identity(4).scale_re((1.0 - w) / 4.0);
        DensityOp::from_approx(&m).expect("isotropic mixture")
    }
}

/// Optical-element efficiencies making up the one-side detection efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalElements {
    pub dhwp: f64,
    pub hwp: f64,
    pub qwp: f64,
    pub dm: f64,
    pub dm_count: u32,
    pub spherical: f64,
    pub aspherical: f64,
    pub ppktp: f64,
    pub pbs: f64,
    pub dpbs: f64,
}

impl OpticalElements {
    pub fn transmission(&self) -> f64 {
        self.dhwp
            * self.hwp
            * self.qwp
            * self.dm.powi(self.dm_count as i32)
            * self.spherical
            * self.spherical
            * self.aspherical
            * self.ppktp
            * self.pbs
            * self.dpbs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyBudget {
    /// Single-mode fibre coupling.
    pub coupling: f64,
    pub detector: f64,
    pub optics: OpticalElements,
}

impl EfficiencyBudget {
    pub fn validate(&self) -> Result<()> {
        let o = &self.optics;
        for (name, v) in [
            ("coupling", self.coupling),
            ("detector", self.detector),
            ("dhwp", o.dhwp),
            ("hwp", o.hwp),
            ("qwp", o.qwp),
            ("dm", o.dm),
            ("spherical", o.spherical),
            ("aspherical", o.aspherical),
            ("ppktp", o.ppktp),
            ("pbs", o.pbs),
            ("dpbs", o.dpbs),
        ] {
            check_range(name, v, 0.0, 1.0, "[0, 1]")?;
        }
        Ok(())
    }

    pub fn optical(&self) -> f64 {
        self.optics.transmission()
    }

    pub fn eta(&self) -> f64 {
        self.coupling * self.detector * self.optical()
    }
}

// Report indices: 0 = +1, 1 = -1, 2 = no click.
type Report = [f64; 3];
/// Joint report probabilities per pulse, `[x][y][ra][rb]`.
type JointReports = Vec<Vec<[[f64; 3]; 3]>>;

/// Which detectors receive a photon: `[none, + only, - only, both]`.
fn respond(lit: [f64; 4], p_dc: f64) -> Report {
    let mut out = [0.0; 3];
    for (k, &pl) in lit.iter().enumerate() {
        if pl == 0.0 {
            continue;
        }
        let plus = if k & 1 == 1 { 1.0 } else { p_dc };
        let minus = if k & 2 == 2 { 1.0 } else { p_dc };
        let both = plus * minus;
        out[0] += pl * (plus * (1.0 - minus) + 0.5 * both);
        out[1] += pl * ((1.0 - plus) * minus + 0.5 * both);
        out[2] += pl * (1.0 - plus) * (1.0 - minus);
    }
    out
}

fn single_photon(eta: f64, s: Sign) -> [f64; 4] {
    match s {
        Sign::Plus => [1.0 - eta, eta, 0.0, 0.0],
        Sign::Minus => [1.0 - eta, 0.0, eta, 0.0],
    }
}

/// Two photons, each leaving through a random port.
fn two_photons(eta: f64) -> [f64; 4] {
    let none = (1.0 - eta) * (1.0 - eta);
    let no_plus = (1.0 - 0.5 * eta) * (1.0 - 0.5 * eta);
    let one = no_plus - none;
    [none, one, one, 1.0 - none - 2.0 * one]
}

/// `(P0, P1, P2)` of the pair number truncated at two.
pub fn pair_weights(mu: f64) -> [f64; 3] {
    let p0 = (-mu).exp();
    let p1 = mu * p0;
    let p2 = (-(-mu).exp_m1() - p1).max(0.0);
    [p0, p1, p2]
}

fn outer(a: Report, b: Report, w: f64, into: &mut [[f64; 3]; 3]) {
    for (ra, row) in into.iter_mut().enumerate() {
        for (rb, v) in row.iter_mut().enumerate() {
            *v += w * a[ra] * b[rb];
        }
    }
}

fn joint_reports(params: &PhotonicParams, alice: &[Observable], bob: &[Observable]) -> Result<JointReports> {
    params.validate()?;
    let rho = params.source_state();
    let [p0, p1, p2] = pair_weights(params.mu);
    let (eta, d) = (params.eta, params.p_dc);
    let vac = respond([1.0, 0.0, 0.0, 0.0], d);
    let dbl = respond(two_photons(eta), d);
    let single = [
        respond(single_photon(eta, Sign::Plus), d),
        respond(single_photon(eta, Sign::Minus), d),
    ];
    let mut out = vec![vec![[[0.0; 3]; 3]; bob.len()]; alice.len()];
    for (x, ax) in alice.iter().enumerate() {
        for (y, by) in bob.iter().enumerate() {
            let cell = &mut out[x][y];
            outer(vac, vac, p0, cell);
            outer(dbl, dbl, p2, cell);
            for qa in Sign::BOTH {
                for qb in Sign::BOTH {
                    let proj = ax.projector(qa).tensor(&by.projector(qb))?;
                    let p = rho.matrix().trace_product(&proj).re.max(0.0);
                    outer(single[qa.index()], single[qb.index()], p1 * p, cell);
                }
            }
        }
    }
    Ok(out)
}

/// Per-pulse probabilities of Alice's and Bob's raw reports in `frame`,
/// `[i][j][ra][rb]` with report index 0 = +1, 1 = -1, 2 = no click.
pub fn report_table(params: &PhotonicParams, frame: &MeasurementFrame) -> Result<[[[[f64; 3]; 3]; 3]; 3]> {
    let joint = joint_reports(params, &frame.alice, &frame.bob)?;
    Ok(core::array::from_fn(|i| core::array::from_fn(|j| joint[i][j])))
}

/// Sign of `<A_i ⊗ A_i>` on the maximally entangled target; Alice
/// multiplies her outcome by it so her record names Bob's state.
pub fn correction_signs(frame: &MeasurementFrame) -> [Sign; 3] {
    let target = PhotonicParams {
        f_source: 1.0,
        alpha: FRAC_PI_4,
        ..PhotonicParams::default()
    }
    .source_state();
    core::array::from_fn(|i| {
        let a = frame.alice[i].matrix();
        let e = target.matrix().trace_product(&a.tensor(a).expect("4x4")).re;
        if e < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    })
}

/// Bob's report after applying the no-click rule; `None` drops the round.
fn bob_outcomes(rule: NoClick, row: &[f64; 3]) -> [f64; 2] {
    match rule {
        NoClick::Minus => [row[0], row[1] + row[2]],
        NoClick::Random => [row[0] + 0.5 * row[2], row[1] + 0.5 * row[2]],
        NoClick::Discard => [row[0], row[1]],
    }
}

/// Heralded, corrected outcome probabilities per pulse, `[i][a'][j][b]`.
pub type KeptTable = [[[[f64; 2]; 3]; 2]; 3];

/// Per-pulse probabilities of every kept `(i, a', j, b)` combination.
pub fn kept_outcomes(params: &PhotonicParams, frame: &MeasurementFrame) -> Result<KeptTable> {
    let joint = joint_reports(params, &frame.alice, &frame.bob)?;
    let signs = correction_signs(frame);
    let mut kept = [[[[0.0; 2]; 3]; 2]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for a in Sign::BOTH {
                let a_rec = signs[i].times(a);
                kept[i][a_rec.index()][j] = bob_outcomes(params.no_click, &joint[i][j][a.index()]);
            }
        }
    }
    Ok(kept)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicStats {
    /// Conditional statistics fed to tomography.
    pub tomography: ConditionalStats,
    /// Probability that a pulse gives a kept round.
    pub acceptance: f64,
    /// Key-round joint distribution `[a][b]` after post-selection and noise.
    pub key: [[f64; 2]; 2],
    /// Fraction of key rounds surviving post-selection.
    pub key_survival: f64,
    /// QBER after post-selection, before noisy preprocessing.
    pub qber_sifted: f64,
}

impl PhotonicStats {
    pub fn qber(&self) -> f64 {
        self.key[0][1] + self.key[1][0]
    }
}

/// Statistics produced by the imperfection pipeline. Preprocessing acts on
/// the key-round distribution only; tomography uses the raw records.
pub fn effective_stats(params: &PhotonicParams, frame: &MeasurementFrame) -> Result<PhotonicStats> {
    let kept = kept_outcomes(params, frame)?;
    let mut prob = [[[[0.0; 2]; 3]; 2]; 3];
    for i in 0..3 {
        for a in 0..2 {
            for j in 0..3 {
                let [p, m] = kept[i][a][j];
                if p + m <= 0.0 {
                    return Err(Error::NoSolution("no kept rounds for a setting"));
                }
                prob[i][a][j] = [p / (p + m), m / (p + m)];
            }
        }
    }
    let tomography = ConditionalStats::from_probabilities(prob)?;
    let cell: [[f64; 2]; 2] = [kept[2][0][2], kept[2][1][2]];
    let acceptance: f64 = cell.iter().flatten().sum();

    let keep = [1.0, 1.0 - params.p_post];
    let mut post = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            post[a][b] = cell[a][b] * keep[a] * keep[b];
        }
    }
    let surviving: f64 = post.iter().flatten().sum();
    if surviving <= 0.0 {
        return Err(Error::NoSolution("post-selection removes every key round"));
    }
    post.iter_mut().flatten().for_each(|v| *v /= surviving);
    let qber_sifted = post[0][1] + post[1][0];
    let pn = params.p_noise;
    let mut key = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            key[a][b] = (1.0 - pn) * post[a][b] + pn * post[1 - a][b];
        }
    }
    Ok(PhotonicStats {
        tomography,
        acceptance,
        key,
        key_survival: surviving / acceptance,
        qber_sifted,
    })
}

/// Everything the finite-size rate needs besides the photonic parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSetup {
    pub frame: MeasurementFrame,
    /// Classical bound the tomography must beat.
    pub f_gc: f64,
    /// Total pulses `N`.
    pub total_rounds: f64,
    /// Test fraction, error parameters and log convention; `n` is replaced.
    pub key: FiniteKeyParams,
    pub holevo: HolevoModel,
}

impl RateSetup {
    pub fn new(frame: MeasurementFrame, f_gc: f64, key: FiniteKeyParams) -> Self {
        Self {
            frame,
            f_gc,
            total_rounds: REFERENCE_ROUNDS,
            key,
            holevo: HolevoModel::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonicRate {
    pub result: RateResult,
    pub f_expt: f64,
    pub qber: f64,
    /// Key rounds `N (1 - γ)` times acceptance and post-selection survival.
    pub n: f64,
    /// `F_expt > F_GC`
    pub certified: bool,
}

impl PhotonicRate {
    /// Key rate, zero when certification fails.
    pub fn rate(&self) -> f64 {
        if self.certified {
            self.result.r
        } else {
            0.0
        }
    }

    /// Smooth figure of merit for the optimiser: the raw rate when
    /// certified, pushed below every certified value otherwise.
    pub fn objective(&self, f_gc: f64) -> f64 {
        if self.certified {
            self.result.raw
        } else {
            self.result.raw.min(0.0) - 1.0 - (f_gc - self.f_expt)
        }
    }
}

fn eve_term(stats: &PhotonicStats, p_noise: f64, holevo: HolevoModel) -> Result<f64> {
    // flipping with p > 1/2 is a public flip followed by 1 - p
    let pn = p_noise.min(1.0 - p_noise);
    eve_information_preprocessed(stats.qber_sifted.min(0.5), pn, holevo)
}

pub fn rate_with_imperfections(params: &PhotonicParams, setup: &RateSetup) -> Result<PhotonicRate> {
    let stats = effective_stats(params, &setup.frame)?;
    let f_expt = fidelity_to_identity(&stats.tomography, &setup.frame)?;
    let qber = stats.qber();
    let n = (setup.total_rounds * (1.0 - setup.key.gamma) * stats.acceptance * stats.key_survival).max(1.0);
    let eve = eve_term(&stats, params.p_noise, setup.holevo)?;
    let result = finite_rate_ediqkd_with(
        qber.min(1.0 - qber),
        f_expt.clamp(0.0, 1.0),
        &setup.key.with_n(n),
        setup.holevo,
        Some(eve),
    )?;
    Ok(PhotonicRate {
        result,
        f_expt,
        qber,
        n,
        certified: f_expt > setup.f_gc,
    })
}

/// Optimisation of the free source and preprocessing parameters at fixed
/// detection efficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencySearch {
    /// Fixed parameters (`f_source`, `p_dc`, `no_click`); the optimised
    /// fields are ignored.
    pub base: PhotonicParams,
    pub setup: RateSetup,
    /// Also optimise `p_post` and `p_noise`.
    pub preprocessing: bool,
    pub threshold: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub eta_tol: f64,
    pub nelder_mead: NelderMeadOptions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedRate {
    pub params: PhotonicParams,
    pub rate: PhotonicRate,
    pub objective: f64,
}

impl OptimizedRate {
    /// Larger objective wins; ties keep `a`.
    pub fn better(a: Self, b: Self) -> Self {
        if b.objective > a.objective {
            b
        } else {
            a
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyThreshold {
    pub eta_min: f64,
    pub at: OptimizedRate,
}

const LOG_MU_RANGE: (f64, f64) = (-4.0, 0.0);

impl EfficiencySearch {
    pub fn new(base: PhotonicParams, setup: RateSetup) -> Self {
        Self {
            base,
            setup,
            preprocessing: false,
            threshold: DEFAULT_RATE_THRESHOLD,
            eta_lo: 0.0,
            eta_hi: 1.0,
            eta_tol: 1e-4,
            nelder_mead: NelderMeadOptions {
                max_evals: 300,
                f_tol: 1e-12,
                step: 0.1,
            },
        }
    }

    fn bounds(&self) -> Vec<Bounds> {
        let mut b = vec![Bounds::new(0.0, FRAC_PI_4), Bounds::new(LOG_MU_RANGE.0, LOG_MU_RANGE.1)];
        if self.preprocessing {
            b.push(Bounds::new(0.0, 0.95));
            b.push(Bounds::new(0.0, 0.5));
        }
        b
    }

    /// The fixed coarse grid of starting points.
    pub fn starts(&self) -> Vec<Vec<f64>> {
        let grid = [
            (1.0, -1.0, 0.0, 0.0),
            (1.0, -2.0, 0.2, 0.02),
            (0.85, -1.5, 0.4, 0.05),
            (0.7, -1.0, 0.1, 0.1),
            (0.95, -0.5, 0.6, 0.01),
        ];
        grid.iter()
            .map(|&(a, lm, pp, pn)| {
                let mut x = vec![a * FRAC_PI_4, lm];
                if self.preprocessing {
                    x.extend([pp, pn]);
                }
                x
            })
            .collect()
    }

    pub fn params_at(&self, eta: f64, x: &[f64]) -> PhotonicParams {
        let mut p = PhotonicParams {
            eta,
            alpha: x[0].clamp(0.0, FRAC_PI_4),
            mu: 10f64.powf(x[1]),
            p_post: 0.0,
            p_noise: 0.0,
            ..self.base
        };
        if self.preprocessing {
            p.p_post = x[2];
            p.p_noise = x[3];
        }
        p
    }

    fn evaluate(&self, p: &PhotonicParams) -> Option<(PhotonicRate, f64)> {
        let r = rate_with_imperfections(p, &self.setup).ok()?;
        let obj = r.objective(self.setup.f_gc);
        Some((r, obj))
    }

    /// Nelder–Mead from one starting point.
    pub fn optimize_from(&self, eta: f64, start: &[f64]) -> Option<OptimizedRate> {
        let bounds = self.bounds();
        let mut f = |x: &[f64]| match self.evaluate(&self.params_at(eta, x)) {
            Some((_, obj)) => -obj,
            None => f64::INFINITY,
        };
        let m = nelder_mead(&mut f, start, &bounds, self.nelder_mead);
        let params = self.params_at(eta, &m.x);
        let (rate, objective) = self.evaluate(&params)?;
        Some(OptimizedRate {
            params,
            rate,
            objective,
        })
    }

    /// Best rate over all restarts, evaluated in order.
    pub fn optimized_rate(&self, eta: f64) -> Option<OptimizedRate> {
        self.starts()
            .iter()
            .filter_map(|s| self.optimize_from(eta, s))
            .reduce(OptimizedRate::better)
    }

    /// Smallest detection efficiency whose optimised rate reaches the
    /// threshold, using `optimize` for the inner maximisation.
    pub fn required_efficiency_with(
        &self,
        mut optimize: impl FnMut(f64) -> Option<OptimizedRate>,
    ) -> Result<EfficiencyThreshold> {
        let mut meets =
            |eta: f64| -> Result<bool> { Ok(optimize(eta).is_some_and(|o| o.rate.rate() >= self.threshold)) };
        let eta_min = bisect_threshold(&mut meets, self.eta_lo, self.eta_hi, self.eta_tol)
            .map_err(|_| Error::NoSolution("no detection efficiency up to 1 reaches the threshold rate"))?;
        let at = optimize(eta_min).ok_or(Error::NoSolution("optimisation failed at the threshold"))?;
        Ok(EfficiencyThreshold { eta_min, at })
    }

    pub fn required_efficiency(&self) -> Result<EfficiencyThreshold> {
        self.required_efficiency_with(|eta| self.optimized_rate(eta))
    }
}

/// Settings of the fixed-parameter comparison: Ψ+ source at the given
/// fidelity, `μ = 0.01`, no preprocessing.
pub fn fixed_comparison_params(eta: f64, f_source: f64) -> PhotonicParams {
    PhotonicParams {
        eta,
        f_source,
        mu: 0.01,
        alpha: FRAC_PI_4,
        ..PhotonicParams::default()
    }
}

/// Alice's two and Bob's three DIQKD observables; the key pair is
/// `(alice[1], bob[2])`.
pub fn diqkd_observables() -> ([Observable; 2], [Observable; 3]) {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let x = Observable::pauli(Axis::X);
    let z = Observable::pauli(Axis::Z);
    let bob = [
        Observable::bloch([h, 0.0, -h]).expect("unit vector"),
        Observable::bloch([h, 0.0, h]).expect("unit vector"),
        z.clone(),
    ];
    ([x, z], bob)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiqkdObserved {
    pub qber: f64,
    pub chsh: f64,
}

/// QBER of the key pair and the largest CHSH combination of the test
/// pairs, both conditioned on Alice's detection.
pub fn diqkd_statistics(params: &PhotonicParams) -> Result<DiqkdObserved> {
    let (alice, bob) = diqkd_observables();
    let joint = joint_reports(params, &alice, &bob)?;
    let kept = |x: usize, y: usize| -> [[f64; 2]; 2] {
        let cell = &joint[x][y];
        [
            bob_outcomes(params.no_click, &cell[0]),
            bob_outcomes(params.no_click, &cell[1]),
        ]
    };
    let correlator = |x: usize, y: usize| -> Result<f64> {
        let k = kept(x, y);
        let total: f64 = k.iter().flatten().sum();
        if total <= 0.0 {
            return Err(Error::NoSolution("no heralded rounds"));
        }
        Ok((k[0][0] + k[1][1] - k[0][1] - k[1][0]) / total)
    };
    let e = [
        [correlator(0, 0)?, correlator(0, 1)?],
        [correlator(1, 0)?, correlator(1, 1)?],
    ];
    let chsh = (0..4)
        .map(|minus| {
            (0..4)
                .map(|k| if k == minus { -e[k / 2][k % 2] } else { e[k / 2][k % 2] })
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);
    let z = Observable::pauli(Axis::Z);
    let sign = {
        let zz = z.matrix().tensor(z.matrix())?;
        PhotonicParams::default().source_state().matrix().trace_product(&zz).re
    };
    let k = kept(1, 2);
    let total: f64 = k.iter().flatten().sum();
    let agree = k[0][0] + k[1][1];
    let disagree = k[0][1] + k[1][0];
    let qber = if sign < 0.0 { agree } else { disagree } / total;
    Ok(DiqkdObserved { qber, chsh })
}

/// Minimum key rounds of both protocols for a target rate at fixed
/// settings (see [`fixed_comparison_params`]). The tomography side must also beat `setup.f_gc`.
pub fn efactor_vs_efficiency(params: &PhotonicParams, setup: &RateSetup, target: f64) -> Result<EfficiencyFactor> {
    let params = *params;
    let stats = effective_stats(&params, &setup.frame)?;
    let f_expt = fidelity_to_identity(&stats.tomography, &setup.frame)?;
    if f_expt <= setup.f_gc {
        return Err(Error::NoSolution("tomography does not beat the classical bound"));
    }
    let q = stats.qber();
    let eve = eve_term(&stats, 0.0, setup.holevo)?;
    let n_ediqkd = min_key_rounds(
        |n| finite_rate_ediqkd_with(q, f_expt, &setup.key.with_n(n), setup.holevo, Some(eve)).map(|r| r.raw),
        target,
    )?;
    let obs = diqkd_statistics(&params)?;
    let n_diqkd = min_key_rounds(
        |n| {
            finite_rate_diqkd_observed(obs.qber, obs.chsh, &setup.key.with_n(n), DiqkdOptions::default()).map(|r| r.raw)
        },
        target,
    )?;
    Ok(EfficiencyFactor { n_ediqkd, n_diqkd })
}

/// Raw finite-size rates of both protocols at `n` key rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparedRates {
    pub ediqkd: f64,
    pub diqkd: f64,
    /// Tomography beats `setup.f_gc`; the EDIQKD rate is meaningless otherwise.
    pub certified: bool,
}

pub fn compared_rates(params: &PhotonicParams, setup: &RateSetup, n: f64) -> Result<ComparedRates> {
    let stats = effective_stats(params, &setup.frame)?;
    let f_expt = fidelity_to_identity(&stats.tomography, &setup.frame)?;
    let q = stats.qber();
    let eve = eve_term(&stats, params.p_noise, setup.holevo)?;
    let key = setup.key.with_n(n);
    let ediqkd = finite_rate_ediqkd_with(q.min(1.0 - q), f_expt.clamp(0.0, 1.0), &key, setup.holevo, Some(eve))?.raw;
    let obs = diqkd_statistics(params)?;
    let diqkd = finite_rate_diqkd_observed(obs.qber.min(0.5), obs.chsh, &key, DiqkdOptions::default())?.raw;
    Ok(ComparedRates {
        ediqkd,
        diqkd,
        certified: f_expt > setup.f_gc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyrate::asymptotic_rate_ediqkd;
    use proptest::prelude::*;

    const F_GC: f64 = 0.853_553_390_593_273_8;

    fn setup() -> RateSetup {
        RateSetup::new(MeasurementFrame::rotated(), F_GC, FiniteKeyParams::default())
    }

    #[test]
    fn compared_rates_ideal_source() {
        let p = fixed_comparison_params(1.0, 1.0);
        let r = compared_rates(&p, &setup(), 1e10).unwrap();
        assert!(r.certified);
        assert!(r.ediqkd > r.diqkd && r.diqkd > 0.0, "{r:?}");
    }

    #[test]
    fn ideal_limit_collapses() {
        let s = effective_stats(&PhotonicParams::ideal(), &MeasurementFrame::rotated()).unwrap();
        let f = fidelity_to_identity(&s.tomography, &MeasurementFrame::rotated()).unwrap();
        assert!(s.qber() < 1e-9, "{}", s.qber());
        assert!((f - 1.0).abs() < 1e-9, "{f}");
    }

    #[test]
    fn ideal_limit_matches_singlet_table() {
        let frame = MeasurementFrame::rotated();
        let s = effective_stats(&PhotonicParams::ideal(), &frame).unwrap();
        let exact = crate::tomography::exact_stats(&crate::channel::KrausChannel::identity(2), &frame).unwrap();
        for (x, y) in s.tomography.cells().zip(exact.cells()) {
            assert!((x.probability - y.probability).abs() < 1e-9);
        }
    }

    #[test]
    fn blind_detectors_give_half_qber() {
        let p = PhotonicParams {
            eta: 0.0,
            p_dc: 1e-3,
            ..PhotonicParams::default()
        };
        let s = effective_stats(&p, &MeasurementFrame::rotated()).unwrap();
        assert!((s.qber() - 0.5).abs() < 1e-12, "{}", s.qber());
    }

    #[test]
    fn correction_signs_of_psi_plus() {
        assert_eq!(
            correction_signs(&MeasurementFrame::rotated()),
            [Sign::Plus, Sign::Plus, Sign::Minus]
        );
    }

    #[test]
    fn single_photon_response_oracle() {
        // signal detector fires with 1 - (1 - η)(1 - d), the other with d
        let (eta, d) = (0.8, 0.01);
        let r = respond(single_photon(eta, Sign::Plus), d);
        let sig = 1.0 - (1.0 - eta) * (1.0 - d);
        assert!((r[0] - (sig * (1.0 - d) + 0.5 * sig * d)).abs() < 1e-15);
        assert!((r[2] - (1.0 - eta) * (1.0 - d) * (1.0 - d)).abs() < 1e-15);
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pair_weights_oracle() {
        let [p0, p1, p2] = pair_weights(0.01);
        assert!((p0 - 0.990_049_833_749_168).abs() < 1e-15);
        assert!((p1 - 0.009_900_498_337_491_68).abs() < 1e-15);
        assert!((p2 - 4.966_791_334_0e-5).abs() < 1e-13);
    }

    #[test]
    fn ideal_rate_near_asymptote() {
        let mut st = setup();
        let p = PhotonicParams {
            mu: 1e-6,
            ..PhotonicParams::ideal()
        };
        let acc = effective_stats(&p, &st.frame).unwrap().acceptance;
        st.total_rounds = 1e9 / ((1.0 - st.key.gamma) * acc);
        let r = rate_with_imperfections(&p, &st).unwrap();
        assert!((r.n - 1e9).abs() < 1.0);
        assert!(r.certified);
        assert!(
            (r.rate() - asymptotic_rate_ediqkd(0.0).unwrap()).abs() < 2e-2,
            "{}",
            r.rate()
        );
    }

    #[test]
    fn rate_monotone_in_eta_and_dark_counts() {
        let st = setup();
        let base = PhotonicParams {
            f_source: 0.9952,
            mu: 0.05,
            ..PhotonicParams::default()
        };
        let rates: Vec<f64> = (0..=10)
            .map(|k| {
                let p = PhotonicParams {
                    eta: 0.8 + 0.02 * k as f64,
                    ..base
                };
                rate_with_imperfections(&p, &st).unwrap().rate()
            })
            .collect();
        assert!(rates.windows(2).all(|w| w[1] >= w[0]), "{rates:?}");
        let raw = |pdc: f64| {
            let p = PhotonicParams {
                p_dc: pdc,
                eta: 0.95,
                ..base
            };
            rate_with_imperfections(&p, &st).unwrap().result.raw
        };
        assert!(raw(1e-6) > raw(1e-4) && raw(1e-4) > raw(1e-2));
    }

    #[test]
    fn noisy_preprocessing_raises_qber_only_in_key() {
        let frame = MeasurementFrame::rotated();
        let base = PhotonicParams {
            eta: 0.9,
            ..PhotonicParams::default()
        };
        let a = effective_stats(&base, &frame).unwrap();
        let b = effective_stats(&PhotonicParams { p_noise: 0.1, ..base }, &frame).unwrap();
        let q = a.qber();
        assert!((b.qber() - (q * 0.9 + (1.0 - q) * 0.1)).abs() < 1e-12);
        assert_eq!(a.tomography, b.tomography);
    }

    #[test]
    fn post_selection_lowers_qber_and_survival() {
        let frame = MeasurementFrame::rotated();
        let base = PhotonicParams {
            eta: 0.85,
            ..PhotonicParams::default()
        };
        let a = effective_stats(&base, &frame).unwrap();
        let b = effective_stats(&PhotonicParams { p_post: 0.5, ..base }, &frame).unwrap();
        assert!(b.qber() < a.qber());
        assert!(b.key_survival < 1.0 && a.key_survival == 1.0);
    }

    #[test]
    fn budget_product_identity() {
        let b = EfficiencyBudget {
            coupling: 0.97,
            detector: 0.95,
            optics: OpticalElements {
                dhwp: 0.999,
                hwp: 0.999,
                qwp: 0.999,
                dm: 0.997,
                dm_count: 7,
                spherical: 0.999,
                aspherical: 0.998,
                ppktp: 0.995,
                pbs: 0.995,
                dpbs: 0.995,
            },
        };
        let so = b.optical();
        assert_eq!(b.eta(), 0.97 * 0.95 * so);
        let dm7 = 0.997f64.powi(7);
        assert!((so - 0.999 * 0.999 * 0.999 * dm7 * 0.999 * 0.999 * 0.998 * 0.995 * 0.995 * 0.995).abs() < 1e-15);
    }

    #[test]
    fn diqkd_ideal_limit() {
        let o = diqkd_statistics(&PhotonicParams::ideal()).unwrap();
        assert!(o.qber < 1e-9);
        assert!((o.chsh - 2.0 * core::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn nonmaximal_state_rejected_above_quarter_pi() {
        let p = PhotonicParams {
            alpha: 1.0,
            ..PhotonicParams::default()
        };
        assert!(p.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn rows_normalize(eta in 0.0f64..=1.0, pdc in 0.0f64..0.01, mu in 1e-4f64..1.0,
                          f in 0.5f64..=1.0, alpha in 0.05f64..FRAC_PI_4, rule in 0usize..2) {
            let p = PhotonicParams {
                eta, p_dc: pdc, mu, f_source: f, alpha,
                no_click: [NoClick::Minus, NoClick::Random][rule],
                ..PhotonicParams::default()
            };
            let frame = MeasurementFrame::rotated();
            let s = effective_stats(&p, &frame).unwrap();
            for i in 0..3 { for a in Sign::BOTH { for j in 0..3 {
                let t = s.tomography.prob(i, a, j, Sign::Plus) + s.tomography.prob(i, a, j, Sign::Minus);
                prop_assert!((t - 1.0).abs() < 1e-12);
            }}}
            let k: f64 = s.key.iter().flatten().sum();
            prop_assert!((k - 1.0).abs() < 1e-12);
        }
    }
}
